use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Expected improvement over `best` for maximization.
///
/// `σ (z Φ(z) + φ(z))` with `z = (mean − best) / σ`; with zero variance the
/// improvement is deterministic.
pub fn expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    let sigma = variance.max(0.0).sqrt();
    if sigma < 1e-12 {
        return (mean - best).max(0.0);
    }
    let z = (mean - best) / sigma;
    (sigma * (z * normal_cdf(z) + normal_pdf(z))).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(expected_improvement(0.0, 0.0, 1.0), 0.0);
        assert_eq!(expected_improvement(2.0, 0.0, 1.0), 1.0);
        assert!((expected_improvement(0.0, 1.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-12);
        assert!((expected_improvement(1.0, 1.0, 0.0) - 1.083_315_470_587_686_4).abs() < 1e-12);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
    }

    #[test]
    fn far_below_is_tiny_but_nonnegative() {
        let ei = expected_improvement(-40.0, 1.0, 0.0);
        assert!((0.0..1e-100).contains(&ei));
    }
}
