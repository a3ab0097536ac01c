/// Componentwise clamp to `[-1, 1]`: the unique l1-nearest point of the
/// l-infinity unit ball.
pub fn clamp_project(f: &[f64]) -> Vec<f64> {
    f.iter().map(|v| v.clamp(-1.0, 1.0)).collect()
}
