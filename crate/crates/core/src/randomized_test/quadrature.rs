use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{sym_eigen, SymMatrix};

/// Discrete weight function `F(u)`: nodes `u_s` with positive weights that sum
/// to one.
///
/// Weights are renormalized on construction so that their left-to-right
/// floating point sum is exactly `1.0`; with that, a statistic whose squared
/// terms all equal one evaluates to exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuadrature")]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawQuadrature> for Quadrature {
    type Error = Error;

    fn try_from(raw: RawQuadrature) -> Result<Self> {
        Quadrature::new(raw.nodes, raw.weights)
    }
}

impl Quadrature {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::invalid(format!(
                "quadrature needs matching non-empty node and weight lists ({} nodes, {} weights)",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|u| !u.is_finite()) {
            return Err(Error::invalid("quadrature nodes must be finite"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("quadrature weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "quadrature weights sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(Self {
            nodes,
            weights: normalize_exactly(weights),
        })
    }

    /// Four-point rule with rounded nodes `(-2.4, -0.7, 0.7, 2.4)` and weights
    /// `(0.05, 0.45, 0.45, 0.05)`.
    pub fn rounded_four_point() -> Self {
        Self::new(vec![-2.4, -0.7, 0.7, 2.4], vec![0.05, 0.45, 0.45, 0.05])
            .expect("constant rule is valid")
    }

    /// `n`-point Gauss-Hermite rule for the standard normal weight, computed
    /// with Golub-Welsch: the nodes are the eigenvalues of the symmetric
    /// tridiagonal Jacobi matrix of the probabilists' Hermite polynomials
    /// (off-diagonal `sqrt(k)`), and the weights are the squared first
    /// components of its normalized eigenvectors.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::invalid(format!("Gauss-Hermite order {n} must be in 1..=64")));
        }
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let spectrum = sym_eigen(&SymMatrix::new(jacobi)?, true)?;
        let vectors = spectrum.eigenvectors.expect("requested");
        // Ascending node order.
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in (0..n).rev() {
            nodes.push(spectrum.eigenvalues[k]);
            weights.push(vectors[(0, k)].powi(2));
        }
        // Symmetrize: the rule is exactly symmetric about zero.
        for k in 0..n / 2 {
            let u = 0.5 * (nodes[n - 1 - k] - nodes[k]);
            let w = 0.5 * (weights[k] + weights[n - 1 - k]);
            nodes[k] = -u;
            nodes[n - 1 - k] = u;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let total: f64 = weights.iter().sum();
        Self::new(nodes, weights.iter().map(|w| w / total).collect())
    }

    /// Parses `four-point` or `hermite:N`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "four-point" => Ok(Self::rounded_four_point()),
            other => match other.strip_prefix("hermite:") {
                Some(n) => {
                    let n = n.parse().map_err(|_| {
                        Error::invalid(format!("bad Gauss-Hermite order in `{other}`"))
                    })?;
                    Self::gauss_hermite(n)
                }
                None => Err(Error::invalid(format!(
                    "unknown quadrature `{other}` (expected `four-point` or `hermite:N`)"
                ))),
            },
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::rounded_four_point()
    }
}

fn normalize_exactly(mut weights: Vec<f64>) -> Vec<f64> {
    let sum = |w: &[f64]| w.iter().sum::<f64>();
    if sum(&weights) == 1.0 {
        return weights;
    }
    let total = sum(&weights);
    for w in &mut weights {
        *w /= total;
    }
    // Nudge the largest weight, one ulp at a time, towards the value that
    // makes the left-to-right sum exactly one.
    let largest = (0..weights.len())
        .max_by(|&a, &b| weights[a].total_cmp(&weights[b]))
        .expect("non-empty");
    let start = weights[largest];
    for direction in [1.0, -1.0] {
        let mut candidate = start;
        for _ in 0..256 {
            weights[largest] = candidate;
            if sum(&weights) == 1.0 {
                return weights;
            }
            candidate = if direction > 0.0 { candidate.next_up() } else { candidate.next_down() };
        }
    }
    weights[largest] = start;
    // Otherwise let the last weight absorb the residual.
    let last = weights.len() - 1;
    let head = sum(&weights[..last]);
    if head < 1.0 {
        weights[last] = 1.0 - head;
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounded_rule_constants() {
        let q = Quadrature::rounded_four_point();
        assert_eq!(q.nodes(), &[-2.4, -0.7, 0.7, 2.4]);
        assert_eq!(q.weights(), &[0.05, 0.45, 0.45, 0.05]);
        assert_eq!(q.nodes()[0], -q.nodes()[3]);
        assert_eq!(q.nodes()[1], -q.nodes()[2]);
    }

    #[test]
    fn four_point_hermite_matches_tables() {
        // sqrt(2) * (0.5246476, 1.6506801) and w / sqrt(pi).
        let q = Quadrature::gauss_hermite(4).unwrap();
        let expected_nodes = [-2.334414218338977, -0.741963784302726, 0.741963784302726, 2.334414218338977];
        for (a, b) in q.nodes().iter().zip(expected_nodes) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let outer = 0.045875854768068;
        let inner = 0.454124145231932;
        assert!((q.weights()[0] - outer).abs() < 1e-12);
        assert!((q.weights()[1] - inner).abs() < 1e-12);
    }

    #[test]
    fn hermite_rules_integrate_moments() {
        // E[Z^2] = 1, E[Z^4] = 3 for a standard normal.
        for n in [3, 5, 8, 12] {
            let q = Quadrature::gauss_hermite(n).unwrap();
            let m2: f64 = q.nodes().iter().zip(q.weights()).map(|(u, w)| w * u * u).sum();
            let m4: f64 = q.nodes().iter().zip(q.weights()).map(|(u, w)| w * u.powi(4)).sum();
            assert!((m2 - 1.0).abs() < 1e-10 && (m4 - 3.0).abs() < 1e-10, "n {n}");
        }
    }

    #[test]
    fn weights_sum_to_exactly_one() {
        for n in 1..20 {
            let q = Quadrature::gauss_hermite(n).unwrap();
            assert_eq!(q.weights().iter().sum::<f64>(), 1.0, "n {n}");
        }
        let q = Quadrature::new(vec![0.0, 1.0, 2.0], vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(q.weights().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(Quadrature::new(vec![0.0], vec![0.5]).is_err());
        assert!(Quadrature::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Quadrature::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(Quadrature::parse("simpson").is_err());
        assert!(Quadrature::parse("hermite:x").is_err());
        assert_eq!(Quadrature::parse("four-point").unwrap(), Quadrature::default());
    }

    #[test]
    fn serde_round_trip_validates() {
        let q = Quadrature::gauss_hermite(6).unwrap();
        let json = serde_json::to_string(&q).unwrap();
        let back: Quadrature = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
        let bad: std::result::Result<Quadrature, _> =
            serde_json::from_str(r#"{"nodes":[0.0],"weights":[0.3]}"#);
        assert!(bad.is_err());
    }
}
