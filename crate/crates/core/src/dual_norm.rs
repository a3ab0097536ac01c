//! The dual of the total variation norm on mean-zero images,
//! `T°(v) = max { <x, v> : tv(x) <= 1, sum(x) = 0 }`.
//!
//! There is no closed form. We run a projected subgradient method on the
//! equivalent problem `min { tv(x) : <x, v> = 1, sum(x) = 0 }`, whose optimum
//! is `1 / T°(v)`. Every primal iterate gives a lower bound on `T°(v)`, and the
//! step-weighted average of the subgradient directions yields a field `p`
//! with `div p = v`, whose sup norm is an upper bound. The iteration stops
//! once the relative gap between the two closes to the requested tolerance.

use crate::error::Result;
use crate::grid::{check_mean_zero, divergence, field_sup_norm, gradient, tv, GridImage, VectorField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualNormConfig {
    pub max_iters: usize,
    /// Relative gap `(upper - lower) / upper` at which to stop.
    pub tolerance: f64,
    /// Initial step, relative to the norm of the starting point.
    pub step: f64,
}

impl Default for DualNormConfig {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            tolerance: 1e-6,
            step: 0.5,
        }
    }
}

/// Certified bracket `lower <= T°(v) <= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualNormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DualNormEstimate {
    /// Midpoint of the bracket.
    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn relative_gap(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            (self.upper - self.lower) / self.upper
        }
    }
}

/// Solves `-div(grad x) = r` for mean-zero `r` by conjugate gradients,
/// returning the mean-zero solution.
pub(crate) fn solve_neumann_poisson(r: &GridImage) -> GridImage {
    let apply = |x: &GridImage| divergence(&gradient(x)).scale(-1.0);
    let n = r.n();
    let mut x = GridImage::zeros(n);
    let mut res = r.clone();
    let mut dir = res.clone();
    let mut rr = res.inner(&res);
    let stop = 1e-28 * rr.max(f64::MIN_POSITIVE);
    for _ in 0..(4 * n * n + 50) {
        if rr <= stop {
            break;
        }
        let ad = apply(&dir);
        let alpha = rr / dir.inner(&ad);
        x = x.add(&dir.scale(alpha));
        res = res.sub(&ad.scale(alpha));
        let rr_next = res.inner(&res);
        dir = res.add(&dir.scale(rr_next / rr));
        rr = rr_next;
    }
    let mean = x.mean();
    x.map(|value| value - mean)
}

/// Euclidean projection of `q` onto `{ p : div p = v }`.
pub(crate) fn project_divergence_constraint(q: &VectorField, v: &GridImage) -> VectorField {
    let residual = divergence(q).sub(v);
    let (_, residual) = crate::grid::mean_zero_split(&residual);
    q.add(&gradient(&solve_neumann_poisson(&residual)))
}

fn zero_unread_entries(p: &mut VectorField) {
    let n = p.n();
    let (c1, c2) = p.comps_mut();
    for k in 0..n {
        c1[(n - 1) * n + k] = 0.0;
        c2[k * n + n - 1] = 0.0;
    }
}

/// FISTA on `0.5 ||div p - v||^2` over `{ ||p||_inf <= radius }`.
fn fit_divergence_in_ball(
    v: &GridImage,
    start: &VectorField,
    radius: f64,
    iters: usize,
) -> (VectorField, usize) {
    // ||div||^2 <= 8 on any grid
    let step = 1.0 / 8.0;
    let clamp = |p: &mut VectorField| {
        let mut scaled = p.scale(1.0 / radius);
        scaled.project_unit_disk();
        *p = scaled.scale(radius);
    };
    let mut p = start.clone();
    clamp(&mut p);
    let mut y = p.clone();
    let mut momentum = 1.0f64;
    let tol = 1e-13 * (1.0 + v.norm());
    for k in 0..iters {
        let r = divergence(&y).sub(v);
        if r.norm() <= tol {
            return (y, k + 1);
        }
        // gradient of the fit is -grad(r)
        let mut next = y.add(&gradient(&r).scale(step));
        clamp(&mut next);
        zero_unread_entries(&mut next);
        let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        y = next.add(&next.sub(&p).scale((momentum - 1.0) / m_next));
        p = next;
        momentum = m_next;
    }
    (p, iters)
}

/// Pixelwise normalised gradient of `x`, zero where the gradient vanishes.
fn normalized_gradient(x: &GridImage) -> VectorField {
    let g = gradient(x);
    let n = g.n();
    let (mut c1, mut c2) = (g.comp1().to_vec(), g.comp2().to_vec());
    for k in 0..n * n {
        let m = c1[k].hypot(c2[k]);
        if m > 0.0 {
            c1[k] /= m;
            c2[k] /= m;
        }
    }
    VectorField::new(n, c1, c2).expect("finite by construction")
}

pub fn tv_dual_norm(v: &GridImage, cfg: &DualNormConfig) -> Result<DualNormEstimate> {
    check_mean_zero(v)?;
    let (_, v) = crate::grid::mean_zero_split(v);
    let vv = v.inner(&v);
    if vv == 0.0 {
        return Ok(DualNormEstimate {
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let n = v.n();
    let onto_hyperplane = |x: &GridImage| {
        let (_, x) = crate::grid::mean_zero_split(x);
        let shift = (1.0 - x.inner(&v)) / vv;
        x.add(&v.scale(shift))
    };
    let onto_tangent = |d: &GridImage| {
        let (_, d) = crate::grid::mean_zero_split(d);
        let shift = d.inner(&v) / vv;
        d.sub(&v.scale(shift))
    };

    // minimum-norm preimage of v: an upper-bound candidate from the start
    let mut best_p = gradient(&solve_neumann_poisson(&v)).scale(-1.0);
    zero_unread_entries(&mut best_p);
    let mut upper = field_sup_norm(&best_p);

    let mut x = v.scale(1.0 / vv);
    let base_step = cfg.step * x.norm();
    let mut best_tv = tv(&x);
    let mut lower = 1.0 / best_tv;
    let mut avg_q = VectorField::zeros(n);
    let mut weight = 0.0;
    let mut iterations = 0;
    let gap_closed = |lower: f64, upper: f64| (upper - lower) <= cfg.tolerance * upper;
    let mut converged = gap_closed(lower, upper);

    // primal phase: improves the lower bound
    let primal_budget = cfg.max_iters / 2;
    let mut last_improvement = 0;
    while !converged && iterations < primal_budget {
        iterations += 1;
        let q = normalized_gradient(&x);
        // subgradient of tv at x is -div q
        let s = onto_tangent(&divergence(&q).scale(-1.0));
        let s_norm = s.norm();
        if s_norm == 0.0 {
            lower = 1.0 / tv(&x);
            break;
        }
        let step = base_step / (iterations as f64).sqrt();
        avg_q = avg_q.add(&q.scale(step));
        weight += step;
        x = onto_hyperplane(&x.sub(&s.scale(step / s_norm)));
        let value = tv(&x);
        if value < best_tv * (1.0 - 1e-3 * cfg.tolerance) {
            last_improvement = iterations;
        }
        if value < best_tv {
            best_tv = value;
            lower = 1.0 / value;
        }
        if iterations % 64 == 0 {
            let q_bar = avg_q.scale(1.0 / weight);
            let lambda = -divergence(&q_bar).inner(&v) / vv;
            if lambda > 0.0 {
                let mut p = project_divergence_constraint(&q_bar.scale(-1.0 / lambda), &v);
                zero_unread_entries(&mut p);
                let value = field_sup_norm(&p);
                if value < upper {
                    upper = value;
                    best_p = p;
                }
            }
            converged = gap_closed(lower, upper);
            if iterations - last_improvement > 2000 {
                break;
            }
        }
    }

    // smoothed phase: accelerated descent on a Huber-smoothed tv with
    // shrinking smoothing; each iterate is still scored by its exact tv
    let mut mu = 0.1 * best_tv / (n * n) as f64;
    let mut y = x.clone();
    while !converged && iterations < cfg.max_iters && mu > 1e-12 * best_tv {
        let budget = (cfg.max_iters - iterations).min(2000);
        let mut z = y.clone();
        let mut momentum = 1.0f64;
        let step = mu / 8.0;
        for _ in 0..budget {
            iterations += 1;
            let g = gradient(&z);
            let (g1, g2) = (g.comp1(), g.comp2());
            let q = VectorField::new(
                n,
                g1.iter().zip(g2).map(|(a, b)| a / a.hypot(*b).max(mu)).collect(),
                g2.iter().zip(g1).map(|(b, a)| b / a.hypot(*b).max(mu)).collect(),
            )
            .expect("finite by construction");
            let next = onto_hyperplane(&z.add(&divergence(&q).scale(step)));
            let value = tv(&next);
            if value < best_tv {
                best_tv = value;
                lower = 1.0 / value;
                x = next.clone();
            }
            let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            z = onto_hyperplane(&next.add(&next.sub(&y).scale((momentum - 1.0) / m_next)));
            y = next;
            momentum = m_next;
        }
        y = x.clone();
        mu *= 0.1;
        converged = gap_closed(lower, upper);
    }

    // dual phase: aim just above the lower bound and fit `div p = v` over
    // `||p||_inf <= t` by accelerated projected gradient; every corrected fit
    // is an admissible preimage and so an upper bound
    let mut p = best_p;
    while !converged && iterations < cfg.max_iters {
        let t = lower + 0.3 * (upper - lower);
        let budget = (cfg.max_iters - iterations).min(4000);
        let (fit, used) = fit_divergence_in_ball(&v, &p, t, budget);
        iterations += used;
        let mut corrected = project_divergence_constraint(&fit, &v);
        zero_unread_entries(&mut corrected);
        let value = field_sup_norm(&corrected);
        if value < upper {
            upper = value;
            p = corrected;
        } else {
            p = fit;
        }
        converged = gap_closed(lower, upper);
    }

    Ok(DualNormEstimate {
        lower,
        upper: upper.max(lower),
        iterations,
        converged,
    })
}
