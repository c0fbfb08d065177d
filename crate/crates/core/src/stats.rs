//! Small population-moment helpers shared by the evaluation code.
//!
//! All moments use population normalisation (divide by N, not N-1) so that
//! the variance-combination identity over per-band statistics is exact for a
//! shared sample matrix. A constant sample has zero variance by definition;
//! detecting that case explicitly returns an exact 0.0 instead of rounding
//! dust, which keeps deterministic bands at exactly zero spread.

/// Population mean; `xs` must be non-empty.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population mean and variance in one call.
pub(crate) fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if is_constant(xs) {
        return (m, 0.0);
    }
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (m, (ss / xs.len() as f64).max(0.0))
}

/// True when every element equals the first (bitwise on the f64 value).
pub(crate) fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Population covariance of two equally long columns given their means.
/// Either column being constant forces an exact 0.0.
pub(crate) fn covariance(a: &[f64], mean_a: f64, b: &[f64], mean_b: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if is_constant(a) || is_constant(b) {
        return 0.0;
    }
    let s: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - mean_a) * (y - mean_b))
        .sum();
    s / a.len() as f64
}
