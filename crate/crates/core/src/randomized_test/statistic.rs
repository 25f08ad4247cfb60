//! The randomized statistics: `delta(beta)`, `phi`, `Psi` and `Q(alpha)`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::quadrature::Quadrature;
use crate::error::{Error, Result};
use crate::rng::{mix, stream, StreamRng};
use crate::spectra::Spectrum;

/// Damping exponent for a `p`-dimensional axis with opposite dimension `q`
/// and `t` time points.
///
/// With `beta = ln p / ln(q t)`, returns `epsilon` when `beta <= 1/2` and
/// `1 - 1/(2 beta) + epsilon` otherwise. The result must stay below one.
pub fn delta_exponent(p: usize, q: usize, t: usize, epsilon: f64) -> Result<f64> {
    let qt = (q as f64) * (t as f64);
    if p < 2 || qt <= 1.0 {
        return Err(Error::invalid(format!(
            "delta needs p >= 2 and q*T > 1 (got p = {p}, q*T = {qt})"
        )));
    }
    let beta = (p as f64).ln() / qt.ln();
    let delta = if beta <= 0.5 {
        epsilon
    } else {
        1.0 - 1.0 / (2.0 * beta) + epsilon
    };
    if delta >= 1.0 {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} is too large for beta = {beta:.4}: delta = {delta:.4} >= 1"
        )));
    }
    Ok(delta)
}

/// `phi = exp{ p^-delta * lambda_k0 / (p^-1 sum_j lambda_j) } - 1`.
///
/// Uses the first `p` eigenvalues of `spectrum`; negative eigenvalues are
/// treated as zero so that `phi >= 0`.
pub fn phi_statistic(spectrum: &Spectrum, k0: usize, delta: f64, p: usize) -> Result<f64> {
    if k0 == 0 || k0 > p || p > spectrum.len() {
        return Err(Error::invalid(format!(
            "k0 = {k0} must be in 1..={p} and p <= {}",
            spectrum.len()
        )));
    }
    let mean = spectrum.eigenvalues[..p].iter().sum::<f64>() / p as f64;
    if !(mean > 0.0) {
        return Err(Error::DegenerateSpectrum(format!(
            "eigenvalue mean is {mean}; the input data may be all zeros"
        )));
    }
    let lambda = spectrum.eigenvalue(k0).max(0.0);
    Ok(((p as f64).powf(-delta) * lambda / mean).exp_m1())
}

/// One randomized round.
///
/// Draws `eta_1..eta_M ~ N(0,1)`, forms
/// `nu(u) = (2/sqrt(M)) sum_m (1[sqrt(phi) eta_m <= u] - 1/2)` at every node
/// and returns `Psi = sum_s w_s nu(u_s)^2`.
pub fn psi_statistic(phi: f64, draws: usize, quadrature: &Quadrature, rng: &mut StreamRng) -> f64 {
    let nodes = quadrature.nodes();
    let scale = phi.max(0.0).sqrt();
    let mut counts = vec![0u64; nodes.len()];
    for _ in 0..draws {
        let eta: f64 = StandardNormal.sample(rng);
        let z = scale * eta;
        for (c, &u) in counts.iter_mut().zip(nodes) {
            *c += u64::from(z <= u);
        }
    }
    // nu(u)^2 = M * r^2 with r = (2 count - M) / M, |r| <= 1.
    let m = draws as f64;
    let weighted: f64 = quadrature
        .weights()
        .iter()
        .zip(&counts)
        .map(|(w, &c)| {
            let r = (2.0 * c as f64 - m) / m;
            w * (r * r)
        })
        .sum();
    m * weighted
}

/// Stream seed of randomized round `round` given the seed of a test.
pub fn round_seed(test_seed: u64, round: usize) -> u64 {
    mix(test_seed, round as u64)
}

/// Runs `rounds` independent [`psi_statistic`] rounds (in parallel; each round
/// owns the stream `round_seed(test_seed, s)`) and returns
/// `Q = #{Psi_s <= c_alpha} / S` with the `Psi` values in round order.
pub fn q_fraction(
    phi: f64,
    draws: usize,
    rounds: usize,
    quadrature: &Quadrature,
    c_alpha: f64,
    test_seed: u64,
) -> (f64, Vec<f64>) {
    let psi_values: Vec<f64> = (0..rounds)
        .into_par_iter()
        .map(|s| psi_statistic(phi, draws, quadrature, &mut stream(round_seed(test_seed, s))))
        .collect();
    (fraction_at_most(&psi_values, c_alpha), psi_values)
}

/// `#{v <= c} / len`.
pub fn fraction_at_most(values: &[f64], c: f64) -> f64 {
    let hits = values.iter().filter(|&&v| v <= c).count();
    hits as f64 / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomized_test::quantile::{chi2_1_cdf, chi2_1_quantile};

    #[test]
    fn delta_branches() {
        // beta = ln 10 / ln 10000 = 0.25.
        assert_eq!(delta_exponent(10, 100, 100, 0.05).unwrap(), 0.05);
        // beta = ln 1000 / ln 100 = 1.5 -> 1 - 1/3 + 0.05.
        let d = delta_exponent(1000, 10, 10, 0.05).unwrap();
        assert!((d - 0.716_666_666_666_666_7).abs() < 1e-12, "{d}");
        assert_eq!(format!("{d:.4}"), "0.7167");
    }

    #[test]
    fn delta_boundary_belongs_to_first_branch() {
        // p = 16, q*T = 256: beta = ln 16 / ln 256 = 1/2 up to rounding.
        let beta = 16f64.ln() / 256f64.ln();
        assert_eq!(beta, 0.5);
        assert_eq!(delta_exponent(16, 16, 16, 0.05).unwrap(), 0.05);
    }

    #[test]
    fn delta_errors() {
        assert!(delta_exponent(1, 10, 10, 0.05).is_err());
        assert!(delta_exponent(10, 1, 1, 0.05).is_err());
        // beta huge -> 1 - 1/(2 beta) close to 1; epsilon pushes it over.
        assert!(delta_exponent(1_000_000, 2, 1, 0.3).is_err());
    }

    fn spectrum(values: &[f64]) -> Spectrum {
        Spectrum::from_eigenvalues(values.to_vec()).unwrap()
    }

    #[test]
    fn phi_examples() {
        let s = spectrum(&[4.0, 0.0, 0.0, 0.0]);
        let phi = phi_statistic(&s, 1, 0.0, 4).unwrap();
        assert!((phi - (4f64.exp() - 1.0)).abs() < 1e-12);
        assert!((phi - 53.598).abs() < 1e-3);
        assert_eq!(phi_statistic(&s, 2, 0.0, 4).unwrap(), 0.0);
    }

    #[test]
    fn phi_is_scale_invariant() {
        let base = [9.0, 4.0, 1.5, 1.0, 0.7];
        let reference = phi_statistic(&spectrum(&base), 2, 0.3, 5).unwrap();
        for c in [1e-6, 0.37, 1.0, 123.0, 1e6] {
            let scaled: Vec<f64> = base.iter().map(|v| v * c).collect();
            let phi = phi_statistic(&spectrum(&scaled), 2, 0.3, 5).unwrap();
            assert!((phi - reference).abs() <= 1e-12 * reference, "c {c}");
        }
    }

    #[test]
    fn phi_rejects_degenerate_input() {
        let err = phi_statistic(&spectrum(&[0.0, 0.0]), 1, 0.1, 2).unwrap_err();
        assert!(err.to_string().contains("degenerate spectrum"));
        assert!(phi_statistic(&spectrum(&[1.0, 0.5]), 3, 0.1, 2).is_err());
        assert!(phi_statistic(&spectrum(&[1.0, 0.5]), 0, 0.1, 2).is_err());
    }

    #[test]
    fn psi_at_zero_phi_is_m() {
        for quad in [Quadrature::rounded_four_point(), Quadrature::gauss_hermite(4).unwrap(), Quadrature::gauss_hermite(7).unwrap()] {
            for seed in 0..20 {
                for m in [1usize, 2, 17, 300] {
                    let psi = psi_statistic(0.0, m, &quad, &mut stream(seed));
                    assert_eq!(psi, m as f64);
                }
            }
        }
    }

    #[test]
    fn psi_is_bounded() {
        let quad = Quadrature::default();
        for (seed, phi) in [0.0, 1e-3, 0.5, 3.0, 50.0, 1e6, 1e300].into_iter().enumerate() {
            let psi = psi_statistic(phi, 250, &quad, &mut stream(seed as u64));
            assert!((0.0..=250.0).contains(&psi), "phi {phi}: {psi}");
        }
    }

    #[test]
    fn q_at_zero_phi_is_zero() {
        let quad = Quadrature::default();
        let c = chi2_1_quantile(0.01).unwrap();
        let (q, psis) = q_fraction(0.0, 300, 50, &quad, c, 1);
        assert_eq!(q, 0.0);
        assert!(psis.iter().all(|&v| v == 300.0));
    }

    #[test]
    fn single_round_gives_zero_or_one() {
        let quad = Quadrature::default();
        let c = chi2_1_quantile(0.05).unwrap();
        for seed in 0..20 {
            let (q, psis) = q_fraction(1e6, 100, 1, &quad, c, seed);
            assert!(q == 0.0 || q == 1.0);
            assert_eq!(psis.len(), 1);
        }
    }

    #[test]
    fn q_concentrates_under_null() {
        // Binomial(S, 1 - alpha) concentration: |q - 0.95| <= 4 sd in >= 95%
        // of seeds.
        let quad = Quadrature::default();
        let alpha = 0.05;
        let c = chi2_1_quantile(alpha).unwrap();
        let s = 300;
        let band = 4.0 * (alpha * (1.0 - alpha) / s as f64).sqrt();
        let seeds = 40;
        let inside = (0..seeds)
            .filter(|&seed| {
                let (q, _) = q_fraction(1e6, 300, s, &quad, c, 100 + seed);
                (q - (1.0 - alpha)).abs() <= band
            })
            .count();
        assert!(inside as f64 >= 0.95 * seeds as f64, "{inside}/{seeds}");
    }

    #[test]
    fn q_is_monotone_in_critical_value() {
        let quad = Quadrature::default();
        let (_, psis) = q_fraction(5.0, 200, 200, &quad, 1.0, 3);
        let mut last = 0.0;
        for c in [0.0, 0.5, 1.0, 3.84, 6.63, 20.0, 200.0] {
            let q = fraction_at_most(&psis, c);
            assert!(q >= last);
            last = q;
        }
    }

    #[test]
    fn parallel_rounds_match_serial() {
        let quad = Quadrature::default();
        let (_, parallel) = q_fraction(2.5, 150, 40, &quad, 3.84, 77);
        let serial: Vec<f64> = (0..40)
            .map(|s| psi_statistic(2.5, 150, &quad, &mut stream(round_seed(77, s))))
            .collect();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn psi_null_distribution_is_chi2() {
        // KS test of 2000 Psi draws at M = 1e4 against chi2(1) at level 0.01
        // (critical value 1.628 / sqrt(n)). phi = 1e10 keeps the node offsets
        // 2 sqrt(M) phi(0) u / sqrt(phi) negligible.
        let quad = Quadrature::default();
        let n = 2000;
        let mut psis: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| psi_statistic(1e10, 10_000, &quad, &mut stream(round_seed(2024, i))))
            .collect();
        psis.sort_by(f64::total_cmp);
        let nf = n as f64;
        let d = psis
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = chi2_1_cdf(x);
                (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / nf.sqrt(), "KS distance {d}");
    }
}
