//! Norms whose unit ball is a centrally symmetric convex polytope.
//!
//! A [`PolytopeNorm`] keeps both descriptions of its closed unit ball: the
//! extreme points, and the facet inequalities `a . x <= 1`. The gauge is the
//! largest facet value, the dual norm the largest vertex value, and the polar
//! ball swaps the two lists.
//!
//! Everything here is exact-in-spirit but floating point: vertex
//! deduplication and facet saturation use absolute tolerances scaled by the
//! size of the input.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vector::{angle, cross, dedup, dot, max_abs, neg, norm, sub};

/// Largest dimension for which facets are enumerated.
pub const MAX_DIM: usize = 4;

/// Default relative tolerance of the vertex/edge orthogonality test.
pub const DEFAULT_ORTHOGONALITY_TOL: f64 = 1e-9;

/// The closed halfspace `{ x : normal . x <= offset }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if norm(&normal) == 0.0 || !normal.iter().all(|v| v.is_finite()) {
            return Err(Error::DegeneratePolytope(
                "halfspace normal must be finite and nonzero".into(),
            ));
        }
        Ok(Self { normal, offset })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.value(x) <= self.offset + tol
    }

    /// Whether `x` lies on the bounding hyperplane.
    pub fn saturates(&self, x: &[f64], tol: f64) -> bool {
        (self.value(x) - self.offset).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeNorm {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    halfspaces: Vec<Halfspace>,
    tol: f64,
}

/// A vertex `x1` orthogonal to the direction of a boundary segment `[x2, x3]`
/// between two vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct WTriple {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
}

impl WTriple {
    pub fn negated(&self) -> Self {
        Self {
            x1: neg(&self.x1),
            x2: neg(&self.x2),
            x3: neg(&self.x3),
        }
    }
}

/// Result of the vertex/edge orthogonality search.
///
/// In the plane an empty set is equivalent to every projection onto the dual
/// ball being unique. In higher dimensions emptiness is only conjectured to
/// be sufficient, so `certified` is false there.
#[derive(Debug, Clone, PartialEq)]
pub struct WSet {
    pub triples: Vec<WTriple>,
    pub certified: bool,
}

impl WSet {
    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

fn scale_of(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| max_abs(p)).fold(0.0, f64::max).max(1.0)
}

/// Solves `A a = 1` for the rows of `A`; `None` if the rows are (nearly)
/// linearly dependent.
fn unit_offset_normal(rows: &[&Vec<f64>]) -> Option<Vec<f64>> {
    let d = rows.len();
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    let row_scale: f64 = rows.iter().map(|r| norm(r)).product();
    let det = m.clone().lu().determinant();
    if det.abs() <= 1e-10 * row_scale {
        return None;
    }
    m.lu()
        .solve(&DVector::from_element(d, 1.0))
        .map(|a| a.iter().copied().collect())
}

impl PolytopeNorm {
    /// Canonical norm whose unit ball is the convex hull of `points` and
    /// their negatives.
    pub fn from_vertices(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::DegeneratePolytope("no points given".into()))?;
        if dim == 0 {
            return Err(Error::DegeneratePolytope(
                "points must have positive dimension".into(),
            ));
        }
        if dim > MAX_DIM {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "facet enumeration is limited to dimension 4",
            });
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let tol = 1e-12 * scale_of(points);
        let symmetric: Vec<Vec<f64>> = points.iter().flat_map(|p| [p.clone(), neg(p)]).collect();
        let symmetric = dedup(symmetric, tol);
        if dim == 2 {
            Self::planar(symmetric, tol)
        } else {
            Self::general(dim, symmetric, tol)
        }
    }

    fn planar(points: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let hull = convex_hull_2d(points, tol);
        if hull.len() < 3 {
            return Err(Error::DegeneratePolytope("points are collinear".into()));
        }
        let mut vertices = hull;
        vertices.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
        let k = vertices.len();
        let mut halfspaces = Vec::with_capacity(k);
        for i in 0..k {
            let (p, q) = (&vertices[i], &vertices[(i + 1) % k]);
            let det = cross(p, q);
            // origin strictly inside means every edge line misses it
            if det <= tol * norm(p).max(norm(q)) {
                return Err(Error::DegeneratePolytope(
                    "origin is not interior to the hull".into(),
                ));
            }
            let normal = vec![(q[1] - p[1]) / det, (p[0] - q[0]) / det];
            halfspaces.push(Halfspace::new(normal, 1.0)?);
        }
        Ok(Self {
            dim: 2,
            vertices,
            halfspaces,
            tol,
        })
    }

    fn general(dim: usize, points: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let scale = scale_of(&points);
        let mut normals: Vec<Vec<f64>> = Vec::new();
        for subset in points.iter().combinations(dim) {
            let Some(a) = unit_offset_normal(&subset) else {
                continue;
            };
            let slack = 1e-9 * norm(&a) * scale;
            if points.iter().all(|p| dot(&a, p) <= 1.0 + slack) {
                normals.push(a);
            }
        }
        let normal_tol = 1e-9 * scale_of(&normals);
        let normals = dedup(normals, normal_tol);
        if normals.is_empty() {
            return Err(Error::DegeneratePolytope(
                "hull is not full-dimensional, so the origin is not interior".into(),
            ));
        }
        // extreme points saturate facets whose normals span the space
        let mut vertices: Vec<Vec<f64>> = points
            .into_iter()
            .filter(|p| {
                let active: Vec<&Vec<f64>> = normals
                    .iter()
                    .filter(|a| (dot(a, p) - 1.0).abs() <= 1e-9 * norm(a) * scale)
                    .collect();
                let m = DMatrix::from_fn(active.len(), dim, |i, j| active[i][j]);
                m.rank(1e-9 * scale_of(&normals)) == dim
            })
            .collect();
        vertices.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let halfspaces = normals
            .into_iter()
            .map(|a| Halfspace::new(a, 1.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim,
            vertices,
            halfspaces,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extreme points of the unit ball (angular order in the plane).
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Absolute tolerance used for deduplication and saturation tests.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Minkowski gauge of the unit ball: the largest facet value, floored
    /// at zero.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.halfspaces.iter().map(|h| h.value(x)).fold(0.0, f64::max)
    }

    /// Support function of the unit ball.
    pub fn dual_norm(&self, y: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, y)).fold(0.0, f64::max)
    }

    /// Whether `x` satisfies every facet inequality.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x, tol))
    }

    /// Lipschitz constant of the gauge with respect to the Euclidean norm.
    pub fn gauge_lipschitz(&self) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| norm(&h.normal))
            .fold(0.0, f64::max)
    }

    /// The norm whose unit ball is the polar of this one.
    pub fn polar(&self) -> Result<Self> {
        let normals: Vec<Vec<f64>> = self.halfspaces.iter().map(|h| h.normal.clone()).collect();
        Self::from_vertices(&normals)
    }

    /// Boundary edges as consecutive vertex pairs in angular order.
    pub fn edges(&self) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension {
                dim: self.dim,
                reason: "edges are enumerated for planar polygons only",
            });
        }
        let k = self.vertices.len();
        Ok((0..k)
            .map(|i| (self.vertices[i].clone(), self.vertices[(i + 1) % k].clone()))
            .collect())
    }

    /// Vertex pairs whose segment lies on the unit sphere: both endpoints
    /// saturate a common facet. In the plane these are exactly the edges.
    pub fn boundary_pairs(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        if let Ok(edges) = self.edges() {
            return edges;
        }
        let sat_tol = 1e-9 * scale_of(&self.vertices);
        let mut pairs = Vec::new();
        for (i, j) in (0..self.vertices.len()).tuple_combinations() {
            let (p, q) = (&self.vertices[i], &self.vertices[j]);
            let shared = self.halfspaces.iter().any(|h| {
                let t = sat_tol * norm(&h.normal);
                h.saturates(p, t) && h.saturates(q, t)
            });
            if shared {
                pairs.push((p.clone(), q.clone()));
            }
        }
        pairs
    }

    /// All triples `(x1, x2, x3)` with `x1` a vertex, `[x2, x3]` a boundary
    /// segment between vertices and `|x1 . (x2 - x3)| <= tol * |x2 - x3|`.
    pub fn w_set(&self, tol: f64) -> WSet {
        let mut triples = Vec::new();
        for (x2, x3) in self.boundary_pairs() {
            let dir = sub(&x2, &x3);
            let len = norm(&dir);
            for x1 in &self.vertices {
                if dot(x1, &dir).abs() <= tol * len {
                    triples.push(WTriple {
                        x1: x1.clone(),
                        x2: x2.clone(),
                        x3: x3.clone(),
                    });
                }
            }
        }
        WSet {
            triples,
            certified: self.dim == 2,
        }
    }
}

/// Strict convex hull (no collinear points) by the monotone chain, in
/// counterclockwise order.
pub(crate) fn convex_hull_2d(mut points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let points = dedup(points, tol);
    if points.len() < 3 {
        return points;
    }
    let turn = |o: &[f64], a: &[f64], b: &[f64]| cross(&sub(a, o), &sub(b, o));
    let scale = scale_of(&points);
    let eps = tol * scale;
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &points {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in points.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Standard test bodies.
pub mod shapes {
    use super::PolytopeNorm;

    /// The hexagon with vertices `(0, +-1)`, `(+-1/2, +-1/2)`; its gauge is
    /// `|x| + max(|x|, |y|)`.
    pub fn hexagon() -> PolytopeNorm {
        PolytopeNorm::from_vertices(&[
            vec![0.0, 1.0],
            vec![0.5, 0.5],
            vec![0.5, -0.5],
            vec![0.0, -1.0],
            vec![-0.5, -0.5],
            vec![-0.5, 0.5],
        ])
        .expect("hexagon is a valid body")
    }

    /// Unit ball of the l1 norm in `dim` dimensions.
    pub fn cross_polytope(dim: usize) -> PolytopeNorm {
        let pts: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        PolytopeNorm::from_vertices(&pts).expect("cross-polytope is a valid body")
    }

    /// Unit ball of the l-infinity norm in `dim` dimensions.
    pub fn cube(dim: usize) -> PolytopeNorm {
        let pts: Vec<Vec<f64>> = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        PolytopeNorm::from_vertices(&pts).expect("cube is a valid body")
    }

    /// Regular polygon with `2m` vertices on the unit circle, rotated by
    /// `phase`.
    pub fn regular(m: usize, phase: f64) -> PolytopeNorm {
        let pts: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let t = phase + std::f64::consts::PI * k as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        PolytopeNorm::from_vertices(&pts).expect("regular polygon is a valid body")
    }
}
