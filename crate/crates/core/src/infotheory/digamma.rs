use super::InfoError;

// B_{2k} / (2k) for k = 1..6, applied to x^{-2k}.
const ASYMPTOTIC: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
];

/// The digamma function ψ(x) = d/dx ln Γ(x) for x > 0.
///
/// Shifts the argument up to x ≥ 6 with ψ(x) = ψ(x+1) − 1/x, then evaluates
/// ln x − 1/(2x) − Σ B_{2k}/(2k x^{2k}) through x^{-12}.
pub fn digamma(x: f64) -> Result<f64, InfoError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(InfoError::NonPositiveArgument(x));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 6.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in ASYMPTOTIC {
        series += c * pow;
        pow *= inv2;
    }
    shift + x.ln() - 0.5 / x - series
}
