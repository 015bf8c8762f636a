/// Bi-objective form of a system: a location term on the first decision
/// variable plus a system term on the residuals,
///
/// ```text
/// g1 = x_first       + Σ|f_i|
/// g2 = (1 - x_first) + p · max|f_i|
/// ```
///
/// where `p` is the number of residuals. Exact roots map onto `g2 = 1 - g1`.
/// An empty residual list (every equation eliminated) leaves only the
/// location term.
pub fn mones_objectives(x_first: f64, residuals: &[f64]) -> (f64, f64) {
    let (sum, max) = residuals
        .iter()
        .fold((0.0f64, 0.0f64), |(s, m), r| (s + r.abs(), m.max(r.abs())));
    let max = if residuals.iter().any(|r| r.is_nan()) { f64::NAN } else { max };
    let p = residuals.len() as f64;
    (x_first + sum, (1.0 - x_first) + p * max)
}
