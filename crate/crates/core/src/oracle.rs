//! Brute-force grid references for small instances.
//!
//! Every oracle here scans a lattice over a box, keeps the feasible points
//! whose objective is within `step * lipschitz` of the incumbent minimum, then
//! zooms in 4x around the kept set for a fixed number of rounds. Nothing is
//! shared with the exact or iterative solvers beyond the objective
//! evaluations, so agreement between the two is meaningful.

use std::collections::{BinaryHeap, HashSet};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::grid::{check_mean_zero, div_preimage, divergence, pairwise_sum, GridImage, VectorField};
use crate::polytope::PolytopeNorm;

/// Lattice points evaluated before refinement are capped at this count.
const MAX_INITIAL_POINTS: usize = 20_000_000;
/// Kept points per round are capped at this count (lowest values first).
const MAX_KEPT: usize = 256;
/// Zoom factor per refinement round.
const ZOOM: i64 = 4;
/// Full-cube children are used while `(2 ZOOM + 1)^dim` stays below this.
const MAX_CUBE_CHILDREN: usize = 6561;

/// Box, resolution and refinement depth of a grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchSpec {
    pub box_halfwidth: f64,
    pub points_per_axis: usize,
    pub refine_rounds: usize,
}

impl GridSearchSpec {
    pub fn new(box_halfwidth: f64, points_per_axis: usize, refine_rounds: usize) -> Result<Self> {
        let spec = Self {
            box_halfwidth,
            points_per_axis,
            refine_rounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 3 {
            return Err(Error::InvalidConfig(format!(
                "points_per_axis must be at least 3, got {}",
                self.points_per_axis
            )));
        }
        if !(self.box_halfwidth > 0.0 && self.box_halfwidth.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "box_halfwidth must be positive, got {}",
                self.box_halfwidth
            )));
        }
        Ok(())
    }

    /// Lattice spacing of the initial scan.
    pub fn initial_step(&self) -> f64 {
        2.0 * self.box_halfwidth / (self.points_per_axis - 1) as f64
    }

    /// Lattice spacing after all refinement rounds.
    pub fn final_step(&self) -> f64 {
        self.initial_step() / (ZOOM as f64).powi(self.refine_rounds as i32)
    }

    /// Default for [`oracle_tv_min`]: a fine scan for `n = 2` (4 coordinates)
    /// and a coarse one for `n = 3` (12 coordinates).
    pub fn for_tv_min(n: usize) -> Self {
        let points_per_axis = if n <= 2 { 41 } else { 3 };
        Self {
            box_halfwidth: 1.0,
            points_per_axis,
            refine_rounds: 3,
        }
    }
}

/// Result of a grid search: the best value, the near-optimal lattice points
/// of the last round, its spacing, and the keep tolerance used there.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub value: f64,
    pub samples: Vec<Vec<f64>>,
    pub step: f64,
    pub tolerance: f64,
}

struct Lattice {
    origin: f64,
    step: f64,
}

impl Lattice {
    fn fill(&self, idx: &[i64], x: &mut [f64]) {
        for (xi, &i) in x.iter_mut().zip(idx) {
            *xi = self.origin + i as f64 * self.step;
        }
    }

    fn point(&self, idx: &[i64]) -> Vec<f64> {
        let mut x = vec![0.0; idx.len()];
        self.fill(idx, &mut x);
        x
    }
}

/// A scored lattice point, ordered by value then index.
#[derive(Debug, PartialEq)]
struct Scored {
    value: f64,
    idx: Vec<i64>,
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| self.idx.cmp(&other.idx))
    }
}

/// Keeps the `MAX_KEPT` lowest-valued points seen.
struct Keeper {
    heap: BinaryHeap<Scored>,
}

impl Keeper {
    fn offer(&mut self, value: f64, idx: &[i64]) {
        if self.heap.len() == MAX_KEPT {
            let worst = self.heap.peek().expect("heap is full");
            if value
                .total_cmp(&worst.value)
                .then_with(|| idx.cmp(&worst.idx[..]))
                .is_ge()
            {
                return;
            }
            self.heap.pop();
        }
        self.heap.push(Scored {
            value,
            idx: idx.to_vec(),
        });
    }
}

fn child_offsets(dim: usize) -> Vec<Vec<i64>> {
    let cube = (2 * ZOOM as usize + 1).checked_pow(dim as u32);
    if cube.is_some_and(|c| c <= MAX_CUBE_CHILDREN) {
        (0..dim).map(|_| -ZOOM..=ZOOM).multi_cartesian_product().collect()
    } else {
        // pattern moves along single axes keep high dimensions tractable
        let mut offs = vec![vec![0; dim]];
        for axis in 0..dim {
            for d in (-ZOOM..=ZOOM).filter(|&d| d != 0) {
                let mut o = vec![0; dim];
                o[axis] = d;
                offs.push(o);
            }
        }
        offs
    }
}

/// Advances `idx` through `[0, max]^dim` in lexicographic order; false
/// once exhausted.
fn next_index(idx: &mut [i64], max: i64) -> bool {
    for d in (0..idx.len()).rev() {
        if idx[d] < max {
            idx[d] += 1;
            return true;
        }
        idx[d] = 0;
    }
    false
}

/// Minimizes `objective` over the feasible lattice points of
/// `[-R, R]^dim`, refining around the near-optimal set.
///
/// `lipschitz` bounds the change of the objective per unit of sup-norm
/// distance; it sets the keep tolerance `step * lipschitz`. At most
/// `MAX_KEPT` points (the lowest) are kept per round.
pub fn grid_minimize(
    dim: usize,
    spec: &GridSearchSpec,
    lipschitz: f64,
    feasible: impl Fn(&[f64]) -> bool,
    objective: impl Fn(&[f64]) -> f64,
) -> Result<GridMinimum> {
    spec.validate()?;
    if dim == 0 {
        return Ok(GridMinimum {
            value: objective(&[]),
            samples: vec![vec![]],
            step: 0.0,
            tolerance: 0.0,
        });
    }
    let m = spec.points_per_axis;
    let total = m.checked_pow(dim as u32).unwrap_or(usize::MAX);
    if total > MAX_INITIAL_POINTS {
        return Err(Error::InvalidConfig(format!(
            "{m}^{dim} initial grid points exceed the oracle budget"
        )));
    }
    let mut lattice = Lattice {
        origin: -spec.box_halfwidth,
        step: spec.initial_step(),
    };
    let max_index = (m - 1) as i64;
    let offsets = child_offsets(dim);
    let mut x = vec![0.0; dim];
    let mut keeper = Keeper {
        heap: BinaryHeap::with_capacity(MAX_KEPT + 1),
    };
    let mut visit = |keeper: &mut Keeper, lattice: &Lattice, idx: &[i64]| {
        lattice.fill(idx, &mut x);
        if feasible(&x) {
            keeper.offer(objective(&x), idx);
        }
    };

    let mut idx = vec![0i64; dim];
    loop {
        visit(&mut keeper, &lattice, &idx);
        if !next_index(&mut idx, max_index) {
            break;
        }
    }

    let mut round = 0;
    loop {
        let mut kept = std::mem::take(&mut keeper.heap).into_sorted_vec();
        let Some(best) = kept.first().map(|s| s.value) else {
            return Err(Error::InvalidConfig(
                "no feasible grid point in the search box".into(),
            ));
        };
        let tolerance = lattice.step * lipschitz;
        kept.retain(|s| s.value <= best + tolerance);

        if round == spec.refine_rounds {
            return Ok(GridMinimum {
                value: best,
                samples: kept.iter().map(|s| lattice.point(&s.idx)).collect(),
                step: lattice.step,
                tolerance,
            });
        }

        round += 1;
        lattice.step /= ZOOM as f64;
        let limit = max_index * ZOOM.pow(round as u32);
        let mut children: HashSet<Vec<i64>> = HashSet::new();
        for s in &kept {
            for off in &offsets {
                let child: Vec<i64> = s.idx.iter().zip(off).map(|(i, o)| i * ZOOM + o).collect();
                if child.iter().all(|&c| (0..=limit).contains(&c)) {
                    children.insert(child);
                }
            }
        }
        let mut children: Vec<Vec<i64>> = children.into_iter().collect();
        children.sort();
        for child in &children {
            visit(&mut keeper, &lattice, child);
        }
    }
}

/// l1-nearest point of the l-infinity unit ball to `f`, by grid search.
pub fn oracle_clamp(f: &[f64], spec: &GridSearchSpec) -> Result<GridMinimum> {
    let dim = f.len();
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension {
            dim,
            reason: "the clamp oracle grids dimensions 1 to 3",
        });
    }
    grid_minimize(
        dim,
        spec,
        dim as f64,
        |x| x.iter().all(|v| v.abs() <= 1.0 + 1e-12),
        |x| f.iter().zip(x).map(|(a, b)| (a - b).abs()).sum(),
    )
}

/// Grid reference for `min gauge(x0 - x)` over the dual unit ball.
pub fn oracle_project(norm_ball: &PolytopeNorm, x0: &[f64], spec: &GridSearchSpec) -> Result<GridMinimum> {
    if norm_ball.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: norm_ball.dim(),
            reason: "the projection oracle grids the plane only",
        });
    }
    if x0.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x0.len(),
        });
    }
    // |gauge(a) - gauge(b)| <= max_i |a_i|_1 * |a - b|_inf
    let lipschitz = norm_ball
        .halfspaces()
        .iter()
        .map(|h| h.normal.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    grid_minimize(
        2,
        spec,
        lipschitz,
        |x| norm_ball.dual_norm(x) <= 1.0 + 1e-12,
        |x| norm_ball.gauge(&[x0[0] - x[0], x0[1] - x[1]]),
    )
}

/// Grid reference for an image problem: optimal value and the distinct
/// near-optimal images.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGridMinimum {
    pub value: f64,
    pub samples: Vec<GridImage>,
    pub step: f64,
    pub tolerance: f64,
}

/// The coordinates of `p` that the divergence reads: `p1` off the last row
/// and `p2` off the last column.
fn field_from_coords(n: usize, coords: &[f64]) -> VectorField {
    let mut c1 = vec![0.0; n * n];
    let mut c2 = vec![0.0; n * n];
    let mut it = coords.iter();
    for i in 0..n - 1 {
        for j in 0..n {
            c1[i * n + j] = *it.next().expect("coordinate count");
        }
    }
    for i in 0..n {
        for j in 0..n - 1 {
            c2[i * n + j] = *it.next().expect("coordinate count");
        }
    }
    VectorField::new(n, c1, c2).expect("sizes agree")
}

/// Pixel magnitudes of the field with read coordinates `coords` are <= 1.
fn pixels_in_disk(n: usize, coords: &[f64]) -> bool {
    let (c1, c2) = coords.split_at(n * (n - 1));
    (0..n).all(|i| {
        (0..n).all(|j| {
            let a = if i + 1 < n { c1[i * n + j] } else { 0.0 };
            let b = if j + 1 < n { c2[i * (n - 1) + j] } else { 0.0 };
            a * a + b * b <= 1.0 + 1e-12
        })
    })
}

/// `tv(f - div p)` for the field with read coordinates `coords`, `n <= 3`,
/// without allocating.
fn residual_tv(f: &GridImage, coords: &[f64]) -> f64 {
    let n = f.n();
    let (c1, c2) = coords.split_at(n * (n - 1));
    let p1 = |i: usize, j: usize| if i + 1 < n { c1[i * n + j] } else { 0.0 };
    let p2 = |i: usize, j: usize| if j + 1 < n { c2[i * (n - 1) + j] } else { 0.0 };
    let mut r = [0.0; 9];
    for i in 0..n {
        for j in 0..n {
            let mut d = p1(i, j) + p2(i, j);
            if i > 0 {
                d -= p1(i - 1, j);
            }
            if j > 0 {
                d -= p2(i, j - 1);
            }
            r[i * n + j] = f.get(i, j) - d;
        }
    }
    let mut mags = [0.0; 9];
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let gx = if i + 1 < n { r[k + n] - r[k] } else { 0.0 };
            let gy = if j + 1 < n { r[k + 1] - r[k] } else { 0.0 };
            mags[k] = gx.hypot(gy);
        }
    }
    pairwise_sum(&mags[..n * n])
}

fn tv_min_grid(f: &GridImage, spec: &GridSearchSpec) -> Result<ImageGridMinimum> {
    let n = f.n();
    if n > 3 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "the image oracle grids n <= 3 only",
        });
    }
    let dim = 2 * n * (n - 1);
    // each read coordinate moves div p by <= 4 per pixel, its gradient by
    // <= 8 per component
    let lipschitz = 8.0 * 2f64.sqrt() * (n * n) as f64;
    let res = grid_minimize(
        dim,
        spec,
        lipschitz,
        |x| pixels_in_disk(n, x),
        |x| residual_tv(f, x),
    )?;
    let mut samples: Vec<GridImage> = Vec::new();
    for x in &res.samples {
        let v = divergence(&field_from_coords(n, x));
        if !samples.iter().any(|s| s.sub(&v).max_abs() <= 1e-12) {
            samples.push(v);
        }
    }
    Ok(ImageGridMinimum {
        value: res.value,
        samples,
        step: res.step,
        tolerance: res.tolerance,
    })
}

/// Grid reference for `inf { tv(f0 - v) : v in div(B) }`, `B` the fields
/// with pixel magnitudes at most 1, for mean-zero `f0` and `n <= 3`.
///
/// The search runs over the read coordinates of `p` (4 for `n = 2`, 12 for
/// `n = 3`), so the samples are the images `div p` of near-optimal fields.
pub fn oracle_tv_min(f0: &GridImage, spec: &GridSearchSpec) -> Result<ImageGridMinimum> {
    check_mean_zero(f0)?;
    tv_min_grid(f0, spec)
}

/// Same search as [`oracle_tv_min`] for an image that need not be mean-zero.
pub fn oracle_tv_min_unreduced(f: &GridImage, spec: &GridSearchSpec) -> Result<ImageGridMinimum> {
    tv_min_grid(f, spec)
}

/// Grid reference for the dual total-variation norm of a mean-zero `2 x 2`
/// image: `min |p|_inf` over `div p = v`.
///
/// For `n = 2` the read coordinates of `p` are 4 and the divergence has rank
/// 3, so the constraint leaves one free parameter along the kernel field.
pub fn oracle_tv_dual_norm(v: &GridImage, spec: &GridSearchSpec) -> Result<GridMinimum> {
    if v.n() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: v.n(),
            reason: "the dual-norm oracle handles 2 x 2 images only",
        });
    }
    let base = div_preimage(v)?;
    let kernel = VectorField::new(2, vec![1.0, -1.0, 0.0, 0.0], vec![-1.0, 0.0, 1.0, 0.0])?;
    let sup = |s: f64| crate::grid::field_sup_norm(&base.add(&kernel.scale(s)));
    // each unit of s moves a pixel pair by at most sqrt(2)
    grid_minimize(1, spec, 2f64.sqrt(), |_| true, |x| sup(x[0]))
}
