//! Standard normal and chi-squared(1) quantiles.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

// Acklam's rational approximation (relative error about 1.15e-9).
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

fn acklam(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Phi^-1(p)`: Acklam's approximation refined by one Newton step on the CDF.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability {p} must lie in (0, 1)")));
    }
    // Refine in the lower tail where the CDF is computed without cancellation.
    if p > 0.5 {
        return normal_quantile(1.0 - p).map(|x| -x);
    }
    let x = acklam(p);
    Ok(x - (normal_cdf(x) - p) / normal_pdf(x))
}

/// Critical value `c_alpha` with `P(chi2_1 > c_alpha) = alpha`, i.e.
/// `Phi^-1(1 - alpha/2)^2`.
pub fn chi2_1_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let z = normal_quantile(0.5 * alpha)?;
    Ok(z * z)
}

/// CDF of the chi-squared distribution with one degree of freedom.
pub fn chi2_1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        statrs::function::erf::erf((0.5 * x).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection on the chi2(1) CDF, independent of the rational approximation.
    fn chi2_quantile_by_bisection(alpha: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 100.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - chi2_1_cdf(mid) > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn reference_critical_values() {
        let c05 = chi2_1_quantile(0.05).unwrap();
        let c01 = chi2_1_quantile(0.01).unwrap();
        assert!((c05 - 3.841458821).abs() < 1e-6, "{c05}");
        assert!((c01 - 6.634896601).abs() < 1e-6, "{c01}");
        // P(Z^2 > 1) = 2 (1 - Phi(1)) = 0.3173...
        assert!((chi2_1_quantile(0.3173).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn agrees_with_bisection_oracle() {
        for &alpha in &[1e-6, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.9, 0.999] {
            let got = chi2_1_quantile(alpha).unwrap();
            let want = chi2_quantile_by_bisection(alpha);
            assert!((got - want).abs() <= 1e-9 * want.max(1.0), "alpha {alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &p in &[1e-10, 1e-4, 0.02, 0.3, 0.5, 0.7, 0.975, 0.9999] {
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() <= 1e-12 * p.max(1e-3), "p {p}");
        }
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(chi2_1_quantile(bad).is_err());
        }
    }
}
