use crate::error::{Error, Result};
use crate::grid::{divergence_into, gradient_into, pairwise_sum, VectorField};

/// Settings for [`tv_projected_subgradient`].
///
/// Step `k` (counting from 1) has length `step / k^exponent`. The run stops
/// after `max_iters` steps, or early once the best value has improved by
/// less than `tolerance` over the last `window` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradientConfig {
    pub max_iters: usize,
    pub step: f64,
    pub exponent: f64,
    /// Seed the starting point was drawn from; echoed in reports.
    pub seed: u64,
    pub tolerance: f64,
    pub window: usize,
}

impl Default for SubgradientConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            step: 1.0,
            exponent: 0.5,
            seed: 0,
            tolerance: 0.0,
            window: 1000,
        }
    }
}

impl SubgradientConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.exponent > 0.0 && self.exponent <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step exponent must lie in (0, 1], got {}",
                self.exponent
            )));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 || self.window == 0 {
            return Err(Error::InvalidConfig(
                "stagnation window must be positive with tolerance >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a projected subgradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientRun {
    /// Best iterate found.
    pub h: VectorField,
    pub value: f64,
    /// Best value after 0, 1, 2, ... steps.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

struct Workspace {
    n: usize,
    diff1: Vec<f64>,
    diff2: Vec<f64>,
    d: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
    mags: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; n * n];
        Self {
            n,
            diff1: z(),
            diff2: z(),
            d: z(),
            g1: z(),
            g2: z(),
            mags: z(),
        }
    }

    /// Evaluates `tv(div(h - g0))`, leaving `grad div(h - g0)` in `g1, g2`.
    fn objective(&mut self, h: &VectorField, g0: &VectorField) -> f64 {
        for (k, (a, b)) in h.comp1().iter().zip(g0.comp1()).enumerate() {
            self.diff1[k] = a - b;
        }
        for (k, (a, b)) in h.comp2().iter().zip(g0.comp2()).enumerate() {
            self.diff2[k] = a - b;
        }
        divergence_into(self.n, &self.diff1, &self.diff2, &mut self.d);
        gradient_into(self.n, &self.d, &mut self.g1, &mut self.g2);
        for (m, (a, b)) in self.mags.iter_mut().zip(self.g1.iter().zip(&self.g2)) {
            *m = a.hypot(*b);
        }
        pairwise_sum(&self.mags)
    }

    /// Turns the gradient left by [`Self::objective`] into the subgradient
    /// `grad div q`, with `q` its pixelwise normalization (zero at kinks).
    fn subgradient(&mut self) -> (&[f64], &[f64]) {
        for ((a, b), m) in self.g1.iter_mut().zip(self.g2.iter_mut()).zip(&self.mags) {
            if *m > 0.0 {
                *a /= m;
                *b /= m;
            } else {
                *a = 0.0;
                *b = 0.0;
            }
        }
        divergence_into(self.n, &self.g1, &self.g2, &mut self.d);
        gradient_into(self.n, &self.d, &mut self.diff1, &mut self.diff2);
        (&self.diff1, &self.diff2)
    }
}

/// Minimizes `tv(div(h - g0))` over fields with `|h_{i,j}| <= 1` at every
/// pixel by projected subgradient steps from `h_init`.
pub fn tv_projected_subgradient(
    g0: &VectorField,
    cfg: &SubgradientConfig,
    h_init: &VectorField,
) -> Result<SubgradientRun> {
    cfg.validate()?;
    let n = g0.n();
    if h_init.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h_init.n(),
        });
    }
    let finite = |f: &VectorField| f.comp1().iter().chain(f.comp2()).all(|v| v.is_finite());
    if !finite(g0) || !finite(h_init) {
        return Err(Error::NonFinite);
    }
    let sup = crate::grid::field_sup_norm(h_init);
    if sup > 1.0 + 1e-12 {
        return Err(Error::InfeasibleStart { norm: sup });
    }

    let mut ws = Workspace::new(n);
    let mut h = h_init.clone();
    let mut best_h = h.clone();
    let mut best = ws.objective(&h, g0);
    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    trace.push(best);
    let mut iterations = 0;

    for k in 1..=cfg.max_iters {
        if best == 0.0 {
            break;
        }
        let t = cfg.step / (k as f64).powf(cfg.exponent);
        let (s1, s2) = ws.subgradient();
        let (h1, h2) = h.comps_mut();
        for (x, s) in h1.iter_mut().zip(s1) {
            *x -= t * s;
        }
        for (x, s) in h2.iter_mut().zip(s2) {
            *x -= t * s;
        }
        h.project_unit_disk();
        iterations = k;

        let value = ws.objective(&h, g0);
        if value < best {
            best = value;
            best_h.clone_from(&h);
        }
        trace.push(best);
        if k >= cfg.window && trace[k - cfg.window] - best < cfg.tolerance {
            break;
        }
    }

    Ok(SubgradientRun {
        h: best_h,
        value: best,
        trace,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{divergence, field_sup_norm, tv};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> VectorField {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..n * n {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r = radius * rng.random::<f64>().sqrt();
            a.push(r * t.cos());
            b.push(r * t.sin());
        }
        VectorField::new(n, a, b).unwrap()
    }

    fn objective(h: &VectorField, g0: &VectorField) -> f64 {
        tv(&divergence(&h.sub(g0)))
    }

    #[test]
    fn zero_problem_stops_immediately() {
        let z = VectorField::zeros(4);
        let run = tv_projected_subgradient(&z, &SubgradientConfig::default(), &z).unwrap();
        assert_eq!(run.value, 0.0);
        assert_eq!(run.iterations, 0);
        assert_eq!(run.trace, vec![0.0]);
    }

    #[test]
    fn feasible_target_is_approached() {
        // the optimum is 0 at h = g0; the method only gets there at a
        // sublinear rate
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g0 = random_field(4, 0.9, &mut rng);
        let h0 = random_field(4, 1.0, &mut rng);
        let cfg = SubgradientConfig {
            max_iters: 20_000,
            exponent: 1.0,
            ..Default::default()
        };
        let run = tv_projected_subgradient(&g0, &cfg, &h0).unwrap();
        assert!(run.value <= 0.02, "value {}", run.value);
        let longer = SubgradientConfig {
            max_iters: 80_000,
            ..cfg
        };
        assert!(tv_projected_subgradient(&g0, &longer, &h0).unwrap().value < run.value);
    }

    #[test]
    fn trace_nonincreasing_and_iterates_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g0 = random_field(5, 1.0, &mut rng).scale(1.3);
        let h0 = random_field(5, 1.0, &mut rng);
        let cfg = SubgradientConfig {
            max_iters: 3000,
            ..Default::default()
        };
        let run = tv_projected_subgradient(&g0, &cfg, &h0).unwrap();
        assert_eq!(run.trace.len(), run.iterations + 1);
        assert!(run.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(field_sup_norm(&run.h) <= 1.0 + 1e-12);
        assert_eq!(run.value, *run.trace.last().unwrap());
        assert_eq!(run.value, objective(&run.h, &g0));
        assert!(run.value < run.trace[0]);
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g0 = random_field(4, 1.0, &mut rng).scale(1.1);
        let h0 = random_field(4, 1.0, &mut rng);
        let cfg = SubgradientConfig {
            max_iters: 500,
            ..Default::default()
        };
        let a = tv_projected_subgradient(&g0, &cfg, &h0).unwrap();
        let b = tv_projected_subgradient(&g0, &cfg, &h0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g0 = VectorField::zeros(3);
        let cfg = SubgradientConfig::default();
        assert!(matches!(
            tv_projected_subgradient(&g0, &cfg, &VectorField::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
        let big = VectorField::new(3, vec![2.0; 9], vec![0.0; 9]).unwrap();
        assert!(matches!(
            tv_projected_subgradient(&g0, &cfg, &big),
            Err(Error::InfeasibleStart { .. })
        ));
        let bad = SubgradientConfig { step: 0.0, ..cfg };
        assert!(tv_projected_subgradient(&g0, &bad, &g0).is_err());
    }

    #[test]
    fn subgradient_matches_finite_differences() {
        // away from kinks the objective is differentiable and the
        // subgradient is its gradient
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 4;
        let g0 = random_field(n, 2.0, &mut rng);
        let h = random_field(n, 1.0, &mut rng);
        let mut ws = Workspace::new(n);
        ws.objective(&h, &g0);
        let (s1, s2) = ws.subgradient();
        let (s1, s2) = (s1.to_vec(), s2.to_vec());
        let eps = 1e-6;
        for k in 0..n * n {
            for comp in 0..2 {
                let bump = |sign: f64| {
                    let mut c1 = h.comp1().to_vec();
                    let mut c2 = h.comp2().to_vec();
                    if comp == 0 {
                        c1[k] += sign * eps;
                    } else {
                        c2[k] += sign * eps;
                    }
                    objective(&VectorField::new(n, c1, c2).unwrap(), &g0)
                };
                let fd = (bump(1.0) - bump(-1.0)) / (2.0 * eps);
                let s = if comp == 0 { s1[k] } else { s2[k] };
                assert!((fd - s).abs() <= 1e-5, "k={k} comp={comp}: fd {fd} vs {s}");
            }
        }
    }
}
