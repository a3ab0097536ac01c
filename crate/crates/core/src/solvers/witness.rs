use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::polytope::{PolytopeNorm, WTriple};
use crate::vector::{angle, dot, norm, scale, sub};

/// A point whose projection onto the dual ball is a whole segment.
///
/// `x0 - w1 = -r u1` and `x0 - w2 = -r u2`, with `[u1, u2]` a boundary edge of
/// the unit ball, so both dual-ball vertices `w1`, `w2` sit at distance `r`.
/// `a` is the common normal of both segments, scaled so that `a . u1 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonUniqueInstance {
    pub x0: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub r: f64,
    pub a: Vec<f64>,
}

fn two_of(points: Vec<Vec<f64>>, what: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    match <[Vec<f64>; 2]>::try_from(points) {
        Ok([p, q]) => Ok((p, q)),
        Err(points) => Err(Error::NoWitness(format!(
            "expected an edge of two vertices for the {what}, found {}",
            points.len()
        ))),
    }
}

/// Builds a point with non-unique projection from an element of the
/// orthogonality set of a planar norm.
pub fn witness_from_triple(norm_ball: &PolytopeNorm, triple: &WTriple) -> Result<NonUniqueInstance> {
    if norm_ball.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: norm_ball.dim(),
            reason: "witnesses are constructed for planar norms only",
        });
    }
    let x1 = &triple.x1;
    let dir = sub(&triple.x2, &triple.x3);
    let tol = 1e-9 * norm(&dir).max(1.0);
    if dot(x1, &dir).abs() > tol * norm(x1).max(1.0) {
        return Err(Error::NoWitness("x1 is not orthogonal to [x2, x3]".into()));
    }

    // the dual-ball edge exposed by x1
    let polar = norm_ball.polar()?;
    let level = 1e-9 * norm(x1).max(1.0);
    let exposed: Vec<Vec<f64>> = polar
        .vertices()
        .iter()
        .filter(|y| (dot(x1, y) - 1.0).abs() <= level)
        .cloned()
        .collect();
    let (p, q) = two_of(exposed, "dual ball")?;
    let turn = (angle(&q) - angle(&p)).rem_euclid(TAU);
    let (w1, w2) = if turn < PI { (q, p) } else { (p, q) };

    // the unit-ball edge opposite to x1
    let low = norm_ball
        .vertices()
        .iter()
        .map(|u| dot(x1, u))
        .fold(f64::INFINITY, f64::min);
    let opposite: Vec<Vec<f64>> = norm_ball
        .vertices()
        .iter()
        .filter(|u| dot(x1, u) - low <= level)
        .cloned()
        .collect();
    let (mut u1, mut u2) = two_of(opposite, "unit ball")?;
    let dw = sub(&w1, &w2);
    if dot(&sub(&u1, &u2), &dw) < 0.0 {
        std::mem::swap(&mut u1, &mut u2);
    }
    let r = norm(&dw) / norm(&sub(&u1, &u2));
    let x0 = sub(&w1, &scale(&u1, r));
    Ok(NonUniqueInstance {
        x0,
        w1,
        w2,
        u1,
        u2,
        r,
        // facet normal of [u1, u2]: a.u1 = 1 and the ball lies below it
        a: scale(x1, -1.0 / low.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::shapes::hexagon;
    use crate::polytope::DEFAULT_ORTHOGONALITY_TOL;
    use crate::solvers::project_onto_polar;
    use crate::vector::max_abs;

    #[test]
    fn hexagon_witness() {
        let h = hexagon();
        let triple = WTriple {
            x1: vec![0.5, 0.5],
            x2: vec![0.0, 1.0],
            x3: vec![0.5, 0.5],
        };
        let w = witness_from_triple(&h, &triple).unwrap();
        assert_eq!(w.x0, vec![2.0, 2.0]);
        assert_eq!(w.w1, vec![1.0, 1.0]);
        assert_eq!(w.w2, vec![2.0, 0.0]);
        assert_eq!(w.u1, vec![-0.5, -0.5]);
        assert_eq!(w.u2, vec![0.0, -1.0]);
        assert_eq!(w.r, 2.0);
        assert_eq!(w.a, vec![-1.0, -1.0]);
    }

    #[test]
    fn every_hexagon_triple_gives_a_segment() {
        let h = hexagon();
        let ws = h.w_set(DEFAULT_ORTHOGONALITY_TOL);
        assert!(!ws.is_empty());
        for t in &ws.triples {
            let w = witness_from_triple(&h, t).unwrap();
            assert!((h.gauge(&sub(&w.x0, &w.w1)) - w.r).abs() <= 1e-12);
            assert!((h.gauge(&sub(&w.x0, &w.w2)) - w.r).abs() <= 1e-12);
            let face = project_onto_polar(&h, &w.x0).unwrap();
            assert!(!face.is_unique);
            assert!((face.optimal_value - w.r).abs() <= 1e-9);
            for v in [&w.w1, &w.w2] {
                assert!(face.face_vertices.iter().any(|f| max_abs(&sub(f, v)) <= 1e-9));
            }
        }
    }

    #[test]
    fn symmetric_triple_negates_the_instance() {
        let h = hexagon();
        let t = WTriple {
            x1: vec![0.5, 0.5],
            x2: vec![0.0, 1.0],
            x3: vec![0.5, 0.5],
        };
        let w = witness_from_triple(&h, &t).unwrap();
        let m = witness_from_triple(&h, &t.negated()).unwrap();
        assert_eq!(m.x0, vec![-2.0, -2.0]);
        assert_eq!(m.r, w.r);
    }

    #[test]
    fn rejects_non_orthogonal_triple() {
        let triple = WTriple {
            x1: vec![0.0, 1.0],
            x2: vec![0.0, 1.0],
            x3: vec![0.5, 0.5],
        };
        assert!(matches!(
            witness_from_triple(&hexagon(), &triple),
            Err(Error::NoWitness(_))
        ));
    }
}
