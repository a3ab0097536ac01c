//! Exact projection onto the dual unit ball of a planar polytope norm.
//!
//! `min rho(x0 - x) s.t. x in D`, with `D` the polar of the unit ball, is the
//! small linear program
//!
//! ```text
//! min t  s.t.  a_i . (x0 - x) <= t   for every facet normal a_i of the ball
//!              b_j . x <= 1          for every vertex b_j of the ball
//! ```
//!
//! in `(x, t)`. Its feasible region is a pointed polyhedron, so the optimum
//! is attained at a vertex, and every vertex is the solution of three active
//! constraints. Enumerating all triples gives the optimal value and every
//! optimal vertex; the argmin set is the convex hull of the latter.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::polytope::PolytopeNorm;
use crate::vector::{cross, dedup, dist, dist_to_segment, norm, sub};

/// Absolute tolerance on the objective for membership in the argmin face.
pub const FACE_TOL: f64 = 1e-9;

/// The solution set of a projection problem: the optimal value and the
/// extreme points of the set of minimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgminFace {
    pub optimal_value: f64,
    pub face_vertices: Vec<Vec<f64>>,
    pub is_unique: bool,
}

impl ArgminFace {
    fn single(x: Vec<f64>, value: f64) -> Self {
        Self {
            optimal_value: value,
            face_vertices: vec![x],
            is_unique: true,
        }
    }

    /// Euclidean distance from `x` to the face (a point or a segment in
    /// the plane).
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        match self.face_vertices.as_slice() {
            [p] => dist(x, p),
            [p, q] => dist_to_segment(x, p, q),
            verts => verts
                .iter()
                .circular_tuple_windows()
                .map(|(p, q)| dist_to_segment(x, p, q))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

struct Row {
    coef: [f64; 3],
    rhs: f64,
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Extreme points of a planar point set that is expected to be a point or a
/// segment (a polygon is handled too).
fn extreme_points(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let points = dedup(points, tol);
    if points.len() <= 1 {
        return points;
    }
    // farthest pair spans the set when it is collinear
    let (i, j) = (0..points.len())
        .tuple_combinations()
        .max_by(|&(a, b), &(c, d)| dist(&points[a], &points[b]).total_cmp(&dist(&points[c], &points[d])))
        .expect("at least two points");
    let dir = sub(&points[j], &points[i]);
    let len = norm(&dir);
    let collinear = points
        .iter()
        .all(|p| cross(&dir, &sub(p, &points[i])).abs() <= tol * len.max(1.0));
    if collinear {
        vec![points[i].clone(), points[j].clone()]
    } else {
        crate::polytope::convex_hull_2d(points, tol)
    }
}

/// Projects `x0` onto the dual unit ball of `norm_ball` in its own gauge,
/// returning the full set of minimizers. A segment face is reported with its
/// endpoints in lexicographic order.
pub fn project_onto_polar(norm_ball: &PolytopeNorm, x0: &[f64]) -> Result<ArgminFace> {
    if norm_ball.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: norm_ball.dim(),
            reason: "the exact projection enumerates planar constraint triples",
        });
    }
    if x0.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x0.len(),
        });
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if norm_ball.dual_norm(x0) <= 1.0 {
        return Ok(ArgminFace::single(x0.to_vec(), 0.0));
    }

    let mut rows: Vec<Row> = Vec::new();
    for h in norm_ball.halfspaces() {
        let a = &h.normal;
        // -a.x - t <= -a.x0
        rows.push(Row {
            coef: [-a[0], -a[1], -1.0],
            rhs: -(a[0] * x0[0] + a[1] * x0[1]),
        });
    }
    for b in norm_ball.vertices() {
        rows.push(Row {
            coef: [b[0], b[1], 0.0],
            rhs: 1.0,
        });
    }
    let row_norms: Vec<f64> = rows.iter().map(|r| norm(&r.coef)).collect();
    let feas_tol = |r: &Row| 1e-9 * (1.0 + r.rhs.abs());

    // any dual-ball vertex is feasible, which seeds the pruning bound
    let polar = norm_ball.polar()?;
    let mut best = polar
        .vertices()
        .iter()
        .map(|w| norm_ball.gauge(&sub(x0, w)))
        .fold(f64::INFINITY, f64::min);

    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    for (i, j, k) in (0..rows.len()).tuple_combinations() {
        let m = [rows[i].coef, rows[j].coef, rows[k].coef];
        let det = det3(m);
        if det.abs() <= 1e-12 * row_norms[i] * row_norms[j] * row_norms[k] {
            continue;
        }
        let rhs = [rows[i].rhs, rows[j].rhs, rows[k].rhs];
        let with_col = |c: usize| {
            let mut mm = m;
            for r in 0..3 {
                mm[r][c] = rhs[r];
            }
            det3(mm) / det
        };
        let t = with_col(2);
        if t > best + FACE_TOL {
            continue;
        }
        let z = [with_col(0), with_col(1), t];
        let feasible = rows
            .iter()
            .all(|r| r.coef[0] * z[0] + r.coef[1] * z[1] + r.coef[2] * z[2] <= r.rhs + feas_tol(r));
        if feasible {
            best = best.min(t);
            candidates.push((vec![z[0], z[1]], t));
        }
    }

    let optimal: Vec<Vec<f64>> = candidates
        .into_iter()
        .filter(|(_, t)| *t <= best + FACE_TOL)
        .map(|(x, _)| x)
        .collect();
    let scale = x0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut face_vertices = extreme_points(optimal, 1e-8 * scale);
    if face_vertices.len() == 2 {
        face_vertices.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    }
    Ok(ArgminFace {
        optimal_value: best.max(0.0),
        is_unique: face_vertices.len() == 1,
        face_vertices,
    })
}
