//! Discrete images on an `n x n` grid and the forward-difference calculus on them.
//!
//! Storage is row-major with zero-based `(i, j)`; pixel `(i, j)` here is pixel
//! `(i + 1, j + 1)` in the usual 1-based matrix notation. The first component
//! of a field differentiates along `i` (rows), the second along `j` (columns).

use crate::error::{Error, Result};

/// An `n x n` real image.
#[derive(Debug, Clone, PartialEq)]
pub struct GridImage {
    n: usize,
    data: Vec<f64>,
}

/// A pair of `n x n` images, e.g. a discrete gradient or a dual variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    n: usize,
    comp1: Vec<f64>,
    comp2: Vec<f64>,
}

fn check_entries(n: usize, data: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("grid side must be positive".into()));
    }
    if data.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: data.len(),
        });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Sum by recursive halving. Blocks of power-of-two length sum exactly when
/// all their entries are equal.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

impl GridImage {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        check_entries(n, &data)?;
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        assert!(n > 0, "grid side must be positive");
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "grid sizes differ");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn sum(&self) -> f64 {
        pairwise_sum(&self.data)
    }

    pub fn mean(&self) -> f64 {
        self.sum() / (self.n * self.n) as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Scalar product of `X`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "grid sizes differ");
        let prods: Vec<f64> = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        pairwise_sum(&prods)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }
}

impl VectorField {
    pub fn new(n: usize, comp1: Vec<f64>, comp2: Vec<f64>) -> Result<Self> {
        check_entries(n, &comp1)?;
        check_entries(n, &comp2)?;
        Ok(Self { n, comp1, comp2 })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "grid side must be positive");
        Self {
            n,
            comp1: vec![0.0; n * n],
            comp2: vec![0.0; n * n],
        }
    }

    pub fn from_components(comp1: GridImage, comp2: GridImage) -> Result<Self> {
        if comp1.n != comp2.n {
            return Err(Error::DimensionMismatch {
                expected: comp1.n,
                got: comp2.n,
            });
        }
        Ok(Self {
            n: comp1.n,
            comp1: comp1.data,
            comp2: comp2.data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn comp1(&self) -> &[f64] {
        &self.comp1
    }

    pub fn comp2(&self) -> &[f64] {
        &self.comp2
    }

    pub(crate) fn comps_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.comp1, &mut self.comp2)
    }

    pub fn component_images(&self) -> (GridImage, GridImage) {
        (
            GridImage {
                n: self.n,
                data: self.comp1.clone(),
            },
            GridImage {
                n: self.n,
                data: self.comp2.clone(),
            },
        )
    }

    /// The pair `(comp1, comp2)` at pixel `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        let k = i * self.n + j;
        (self.comp1[k], self.comp2[k])
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "field sizes differ");
        let comp1 = self
            .comp1
            .iter()
            .zip(&other.comp1)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let comp2 = self
            .comp2
            .iter()
            .zip(&other.comp2)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self {
            n: self.n,
            comp1,
            comp2,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            comp1: self.comp1.iter().map(|v| s * v).collect(),
            comp2: self.comp2.iter().map(|v| s * v).collect(),
        }
    }

    /// Scalar product of `Y = X x X`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "field sizes differ");
        let prods: Vec<f64> = self
            .comp1
            .iter()
            .zip(&other.comp1)
            .chain(self.comp2.iter().zip(&other.comp2))
            .map(|(a, b)| a * b)
            .collect();
        pairwise_sum(&prods)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Per-pixel Euclidean magnitudes.
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.comp1.iter().zip(&self.comp2).map(|(a, b)| a.hypot(*b))
    }

    /// Radial projection of every pixel pair onto the closed unit disk.
    pub fn project_unit_disk(&mut self) {
        for (a, b) in self.comp1.iter_mut().zip(self.comp2.iter_mut()) {
            let m = a.hypot(*b);
            if m > 1.0 {
                *a /= m;
                *b /= m;
            }
        }
    }
}

/// Forward differences with zero rows/columns at the far boundary.
pub fn gradient(u: &GridImage) -> VectorField {
    let mut g = VectorField::zeros(u.n);
    gradient_into(u.n, &u.data, &mut g.comp1, &mut g.comp2);
    g
}

pub(crate) fn gradient_into(n: usize, u: &[f64], out1: &mut [f64], out2: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            out1[k] = if i + 1 < n { u[k + n] - u[k] } else { 0.0 };
            out2[k] = if j + 1 < n { u[k + 1] - u[k] } else { 0.0 };
        }
    }
}

/// Discrete divergence, the negative adjoint of [`gradient`].
///
/// `(div p)_{i,j} = p1_{i,j} - p1_{i-1,j} + p2_{i,j} - p2_{i,j-1}` where
/// `p1` is read as zero on the last row and before the first, and likewise
/// `p2` on the last and before the first column.
pub fn divergence(p: &VectorField) -> GridImage {
    let mut out = vec![0.0; p.n * p.n];
    divergence_into(p.n, &p.comp1, &p.comp2, &mut out);
    GridImage { n: p.n, data: out }
}

pub(crate) fn divergence_into(n: usize, p1: &[f64], p2: &[f64], out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let mut d = 0.0;
            if i + 1 < n {
                d += p1[k];
            }
            if i > 0 {
                d -= p1[k - n];
            }
            if j + 1 < n {
                d += p2[k];
            }
            if j > 0 {
                d -= p2[k - 1];
            }
            out[k] = d;
        }
    }
}

/// Isotropic discrete total variation: sum of pixelwise gradient magnitudes.
pub fn tv(u: &GridImage) -> f64 {
    let mags: Vec<f64> = gradient(u).magnitudes().collect();
    pairwise_sum(&mags)
}

/// `max_{i,j} |g_{i,j}|` with the Euclidean norm on pairs.
pub fn field_sup_norm(g: &VectorField) -> f64 {
    g.magnitudes().fold(0.0, f64::max)
}

/// Splits `f` into its mean (as a constant image) and the mean-zero rest.
pub fn mean_zero_split(f: &GridImage) -> (GridImage, GridImage) {
    let fhat = GridImage::constant(f.n, f.mean());
    let f0 = f.sub(&fhat);
    (fhat, f0)
}

/// Tolerance used to decide that an image lies in the mean-zero subspace.
pub fn mean_zero_tolerance(v: &GridImage) -> f64 {
    1e-9 * (v.n * v.n) as f64 * v.max_abs().max(1.0)
}

pub fn check_mean_zero(v: &GridImage) -> Result<()> {
    let sum = v.sum();
    if sum.abs() > mean_zero_tolerance(v) {
        return Err(Error::NotMeanZero { sum });
    }
    Ok(())
}

/// A field `p` with `div p = t`, built by cumulative sums.
///
/// `t` must be mean-zero; the first row of `p2` carries the column sums of
/// `t`, and `p1` integrates each column of the remainder. Entries that the
/// divergence never reads (last row of `p1`, last column of `p2`) are zero.
pub fn div_preimage(t: &GridImage) -> Result<VectorField> {
    check_mean_zero(t)?;
    let n = t.n;
    let mut p = VectorField::zeros(n);
    let col_sums: Vec<f64> = (0..n).map(|j| (0..n).map(|i| t.data[i * n + j]).sum()).collect();
    for (j, &col_sum) in col_sums.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..n.saturating_sub(1) {
            let mut entry = t.data[i * n + j];
            if i == 0 {
                entry -= col_sum;
            }
            acc += entry;
            p.comp1[i * n + j] = acc;
        }
    }
    let mut acc = 0.0;
    for (out, &col_sum) in p.comp2.iter_mut().zip(&col_sums).take(n.saturating_sub(1)) {
        acc += col_sum;
        *out = acc;
    }
    Ok(p)
}

/// `M(a, b)`: first row equal to `a`, all other rows equal to `b`.
pub fn two_level_image(n: usize, a: f64, b: f64) -> GridImage {
    let mut data = vec![b; n * n];
    data[..n].fill(a);
    GridImage { n, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn img(rows: &[&[f64]]) -> GridImage {
        GridImage::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        for n in 1..6 {
            let g = gradient(&GridImage::constant(n, 3.7));
            assert_eq!(field_sup_norm(&g), 0.0);
        }
    }

    #[test]
    fn gradient_small_case() {
        let g = gradient(&img(&[&[0.0, 0.0], &[1.0, 1.0]]));
        assert_eq!(g.comp1(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(g.comp2(), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_of_two_level_image() {
        let n = 5;
        let g = gradient(&two_level_image(n, 1.5, -2.0));
        for i in 0..n {
            for j in 0..n {
                let (g1, g2) = g.at(i, j);
                assert_eq!(g1, if i == 0 { -3.5 } else { 0.0 });
                assert_eq!(g2, 0.0);
            }
        }
    }

    #[test]
    fn divergence_small_case() {
        let p = VectorField::new(2, vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]).unwrap();
        assert_eq!(divergence(&p).data(), &[1.0, 0.0, -1.0, 0.0]);
        assert_eq!(divergence(&VectorField::zeros(3)), GridImage::zeros(3));
    }

    #[test]
    fn divergence_matches_case_formulas() {
        // interior, first and last row/column cases written out for n = 4
        let n = 4;
        let p1: Vec<f64> = (0..16).map(|k| (k * k % 7) as f64 - 3.0).collect();
        let p2: Vec<f64> = (0..16).map(|k| (k * 5 % 11) as f64 - 5.0).collect();
        let p = VectorField::new(n, p1.clone(), p2.clone()).unwrap();
        let d = divergence(&p);
        let at = |v: &Vec<f64>, i: usize, j: usize| v[i * n + j];
        for i in 0..n {
            for j in 0..n {
                let d1 = match i {
                    0 => at(&p1, 0, j),
                    i if i == n - 1 => -at(&p1, n - 2, j),
                    i => at(&p1, i, j) - at(&p1, i - 1, j),
                };
                let d2 = match j {
                    0 => at(&p2, i, 0),
                    j if j == n - 1 => -at(&p2, i, n - 2),
                    j => at(&p2, i, j) - at(&p2, i, j - 1),
                };
                assert_eq!(d.get(i, j), d1 + d2);
            }
        }
    }

    #[test]
    fn tv_values() {
        assert_eq!(tv(&GridImage::constant(4, -2.0)), 0.0);
        assert_eq!(tv(&img(&[&[0.0, 1.0], &[0.0, 1.0]])), 2.0);
        assert_eq!(tv(&two_level_image(8, 0.25, 1.0)), 8.0 * 0.75);
    }

    #[test]
    fn sup_norm_values() {
        assert_eq!(field_sup_norm(&VectorField::zeros(3)), 0.0);
        let g = VectorField::new(2, vec![3.0; 4], vec![4.0; 4]).unwrap();
        assert_eq!(field_sup_norm(&g), 5.0);
        let g = VectorField::new(2, vec![0.0, 1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0, 0.0]).unwrap();
        assert_eq!(field_sup_norm(&g), 2f64.sqrt());
    }

    #[test]
    fn mean_zero_split_values() {
        let (fhat, f0) = mean_zero_split(&GridImage::constant(3, 2.5));
        assert_eq!(fhat, GridImage::constant(3, 2.5));
        assert_eq!(f0, GridImage::zeros(3));

        let (fhat, f0) = mean_zero_split(&img(&[&[1.0, 3.0], &[5.0, 7.0]]));
        assert_eq!(fhat, GridImage::constant(2, 4.0));
        assert_eq!(f0, img(&[&[-3.0, -1.0], &[1.0, 3.0]]));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(GridImage::new(2, vec![0.0; 3]).is_err());
        assert!(GridImage::new(1, vec![f64::NAN]).is_err());
        assert!(GridImage::new(0, vec![]).is_err());
        assert!(VectorField::new(2, vec![0.0; 4], vec![0.0; 5]).is_err());
    }

    #[test]
    fn div_preimage_rejects_nonzero_mean() {
        assert!(matches!(
            div_preimage(&GridImage::constant(3, 1.0)),
            Err(Error::NotMeanZero { .. })
        ));
    }

    fn image_strategy(n: usize) -> impl Strategy<Value = GridImage> {
        prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |d| GridImage::new(n, d).unwrap())
    }

    // dyadic entries keep sums and differences exact
    fn dyadic_image(n: usize) -> impl Strategy<Value = GridImage> {
        prop::collection::vec(-4096i32..4096, n * n)
            .prop_map(move |d| GridImage::new(n, d.into_iter().map(|k| k as f64 / 256.0).collect()).unwrap())
    }

    fn field_strategy(n: usize) -> impl Strategy<Value = VectorField> {
        (
            prop::collection::vec(-5.0..5.0f64, n * n),
            prop::collection::vec(-5.0..5.0f64, n * n),
        )
            .prop_map(move |(a, b)| VectorField::new(n, a, b).unwrap())
    }

    proptest! {
        #[test]
        fn adjointness((u, p) in (2usize..=16).prop_flat_map(|n| (image_strategy(n), field_strategy(n)))) {
            let lhs = -divergence(&p).inner(&u);
            let rhs = p.inner(&gradient(&u));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + u.norm() * p.norm()));
        }

        #[test]
        fn tv_translation_invariant(u in (1usize..=8).prop_flat_map(dyadic_image), c in -1000i32..1000) {
            let shifted = u.map(|v| v + c as f64 / 8.0);
            prop_assert_eq!(tv(&shifted), tv(&u));
        }

        #[test]
        fn tv_is_seminorm(
            (u, v) in (2usize..=8).prop_flat_map(|n| (dyadic_image(n), dyadic_image(n))),
            k in -3i32..4,
        ) {
            let lambda = 2f64.powi(k) * if k % 2 == 0 { -1.0 } else { 1.0 };
            prop_assert_eq!(tv(&u.scale(lambda)), lambda.abs() * tv(&u));
            let lhs = tv(&u.add(&v));
            let rhs = tv(&u) + tv(&v);
            prop_assert!(lhs <= rhs * (1.0 + 4.0 * f64::EPSILON));
        }

        #[test]
        fn tv_kernel_is_constants(u in (2usize..=8).prop_flat_map(image_strategy), c in -5.0..5.0f64) {
            let n = u.n();
            prop_assert_eq!(tv(&GridImage::constant(n, c)), 0.0);
            // a generic random image is never constant, so its tv is positive
            prop_assert!(tv(&u) > 0.0);
            let is_constant = field_sup_norm(&gradient(&u)) == 0.0;
            prop_assert_eq!(tv(&u) == 0.0, is_constant);
        }

        #[test]
        fn split_is_orthogonal_to_constants(f in (1usize..=10).prop_flat_map(image_strategy)) {
            let (fhat, f0) = mean_zero_split(&f);
            let n = f.n() as f64;
            prop_assert!(f0.sum().abs() <= 1e-12 * n * n * f.max_abs());
            prop_assert!((tv(&f0) - tv(&f)).abs() <= 1e-12 * (1.0 + tv(&f)));
            prop_assert_eq!(fhat.add(&f0).sub(&f).max_abs() < 1e-12, true);
        }

        #[test]
        fn div_preimage_inverts_divergence(f in (1usize..=10).prop_flat_map(image_strategy)) {
            let (_, f0) = mean_zero_split(&f);
            let p = div_preimage(&f0).unwrap();
            prop_assert!(divergence(&p).sub(&f0).max_abs() <= 1e-10);
        }
    }
}
