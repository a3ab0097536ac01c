//! Plain-text formats for images, fields and polygons.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.
//!
//! * image: a line `N`, then `N` rows of `N` numbers;
//! * field: a line `N`, then `N` rows of the first component and `N` rows of
//!   the second;
//! * polytope: a line `dim k`, then `k` points of `dim` numbers each.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridImage, VectorField};
use crate::polytope::PolytopeNorm;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next meaningful line with its 1-based number.
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok((i + 1, t));
            }
        }
        Err(Error::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }

    fn numbers(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let (line, text) = self.next_line(what)?;
        let values = text
            .split_whitespace()
            .map(|tok| {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("invalid number {tok:?}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line,
                        msg: format!("non-finite number {tok:?}"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != count {
            return Err(Error::Parse {
                line,
                msg: format!("expected {count} numbers in {what}, found {}", values.len()),
            });
        }
        Ok(values)
    }

    fn sizes(&mut self, count: usize, what: &str) -> Result<(usize, Vec<usize>)> {
        let (line, text) = self.next_line(what)?;
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("invalid size {tok:?} in {what}"),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        if values.len() != count {
            return Err(Error::Parse {
                line,
                msg: format!("expected {what}"),
            });
        }
        Ok((line, values))
    }

    fn finish(&mut self) -> Result<()> {
        match self.next_line("") {
            Ok((line, _)) => Err(Error::Parse {
                line,
                msg: "trailing data".into(),
            }),
            Err(_) => Ok(()),
        }
    }
}

fn read_rows(lines: &mut Lines<'_>, n: usize, what: &str) -> Result<Vec<f64>> {
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        data.extend(lines.numbers(n, what)?);
    }
    Ok(data)
}

fn grid_side(lines: &mut Lines<'_>) -> Result<usize> {
    let (line, v) = lines.sizes(1, "the grid side N")?;
    if v[0] == 0 {
        return Err(Error::Parse {
            line,
            msg: "grid side must be positive".into(),
        });
    }
    Ok(v[0])
}

pub fn parse_image(text: &str) -> Result<GridImage> {
    let mut lines = Lines::new(text);
    let n = grid_side(&mut lines)?;
    let data = read_rows(&mut lines, n, "an image row")?;
    lines.finish()?;
    GridImage::new(n, data)
}

pub fn parse_field(text: &str) -> Result<VectorField> {
    let mut lines = Lines::new(text);
    let n = grid_side(&mut lines)?;
    let c1 = read_rows(&mut lines, n, "a row of the first component")?;
    let c2 = read_rows(&mut lines, n, "a row of the second component")?;
    lines.finish()?;
    VectorField::new(n, c1, c2)
}

/// Points of a polytope file, before any hull computation.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = Lines::new(text);
    let (line, v) = lines.sizes(2, "a header `dim k`")?;
    let (dim, k) = (v[0], v[1]);
    if dim == 0 || k == 0 {
        return Err(Error::Parse {
            line,
            msg: "dimension and point count must be positive".into(),
        });
    }
    let points = (0..k)
        .map(|_| lines.numbers(dim, "a point"))
        .collect::<Result<Vec<_>>>()?;
    lines.finish()?;
    Ok(points)
}

/// Parses a polytope file; the points are symmetrized and reduced to the
/// extreme points of their hull.
pub fn parse_polytope(text: &str) -> Result<PolytopeNorm> {
    PolytopeNorm::from_vertices(&parse_points(text)?)
}

fn push_row(out: &mut String, row: &[f64]) {
    let line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    out.push_str(&line);
    out.push('\n');
}

/// Writes an image with shortest round-trip number formatting.
pub fn format_image(u: &GridImage) -> String {
    let mut out = format!("{}\n", u.n());
    for row in u.rows() {
        push_row(&mut out, row);
    }
    out
}

pub fn format_field(p: &VectorField) -> String {
    let n = p.n();
    let mut out = format!("{n}\n");
    for comp in [p.comp1(), p.comp2()] {
        for row in comp.chunks(n) {
            push_row(&mut out, row);
        }
    }
    out
}

pub fn format_points(points: &[Vec<f64>]) -> String {
    let dim = points.first().map_or(0, Vec::len);
    let mut out = String::new();
    let _ = writeln!(out, "{dim} {}", points.len());
    for p in points {
        push_row(&mut out, p);
    }
    out
}

pub fn read_image(path: impl AsRef<Path>) -> Result<GridImage> {
    parse_image(&std::fs::read_to_string(path)?)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<VectorField> {
    parse_field(&std::fs::read_to_string(path)?)
}

pub fn read_polytope(path: impl AsRef<Path>) -> Result<PolytopeNorm> {
    parse_polytope(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_round_trip() {
        let u = GridImage::from_rows(&[vec![1.0, -0.1], vec![1e-17, 3.25]]).unwrap();
        let text = format_image(&u);
        assert_eq!(text, "2\n1 -0.1\n0.00000000000000001 3.25\n");
        assert_eq!(parse_image(&text).unwrap(), u);
    }

    #[test]
    fn field_round_trip() {
        let p = VectorField::new(2, vec![0.1, 0.2, 0.3, 0.4], vec![-1.0, 0.0, 1.0, 2.0 / 3.0]).unwrap();
        assert_eq!(parse_field(&format_field(&p)).unwrap(), p);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# hexagon\n\n2 3\n0 1\n  0.5 0.5\n# lower\n0.5 -0.5\n";
        let pts = parse_points(text).unwrap();
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![0.5, -0.5]]);
        assert_eq!(parse_polytope(text).unwrap().vertices().len(), 6);
        assert_eq!(parse_points(&format_points(&pts)).unwrap(), pts);
    }

    fn parse_line(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_line(parse_image("2\n1 2\n3 x\n").unwrap_err()), 3);
        assert_eq!(parse_line(parse_image("2\n1 2\n3\n").unwrap_err()), 3);
        assert_eq!(parse_line(parse_image("2\n1 2\n").unwrap_err()), 3);
        assert_eq!(parse_line(parse_image("two\n").unwrap_err()), 1);
        assert_eq!(parse_line(parse_image("1\n5\n6\n").unwrap_err()), 3);
        assert_eq!(parse_line(parse_image("1\nnan\n").unwrap_err()), 2);
        assert_eq!(parse_line(parse_points("2\n").unwrap_err()), 1);
        assert_eq!(parse_line(parse_points("2 2\n1 0\n\n0 1 5\n").unwrap_err()), 4);
        assert_eq!(parse_line(parse_field("1\n1\n").unwrap_err()), 3);
    }

    #[test]
    fn degenerate_polygon_is_rejected() {
        assert!(matches!(
            parse_polytope("2 2\n1 0\n2 0\n"),
            Err(Error::DegeneratePolytope(_))
        ));
    }
}
