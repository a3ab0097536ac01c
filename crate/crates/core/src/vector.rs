//! Small dense vector helpers for polytope work (dimensions 1 to 4).

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

pub fn neg(a: &[f64]) -> Vec<f64> {
    scale(a, -1.0)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// 2D cross product `a x b`.
pub fn cross(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub fn dist_to_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d = sub(b, a);
    let dd = dot(&d, &d);
    if dd == 0.0 {
        return dist(p, a);
    }
    let t = (dot(&sub(p, a), &d) / dd).clamp(0.0, 1.0);
    dist(p, &add(a, &scale(&d, t)))
}

/// Removes near-duplicates (sup-norm distance `<= tol`), keeping first
/// occurrences.
pub fn dedup(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| max_abs(&sub(&p, q)) <= tol) {
            out.push(p);
        }
    }
    out
}

/// Angle of a 2D point in `[0, 2pi)`.
pub fn angle(p: &[f64]) -> f64 {
    let a = p[1].atan2(p[0]);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}
