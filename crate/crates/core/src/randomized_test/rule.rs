use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Choice of the vanishing slack `f(S)` in the strong rule
/// `accept H0 iff Q >= (1 - alpha) - f(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// `sqrt(2 ln ln S / S)`
    Lil,
    /// `S^(-1/3)`
    PowerThird,
    /// `S^(-1/4)`
    PowerQuarter,
    /// `S^(-1/5)`
    PowerFifth,
    /// `(1 - alpha) / 2`
    HalfLevel,
}

impl ThresholdRule {
    pub const ALL: [ThresholdRule; 5] = [
        ThresholdRule::Lil,
        ThresholdRule::PowerThird,
        ThresholdRule::PowerQuarter,
        ThresholdRule::PowerFifth,
        ThresholdRule::HalfLevel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdRule::Lil => "lil",
            ThresholdRule::PowerThird => "power-third",
            ThresholdRule::PowerQuarter => "power-quarter",
            ThresholdRule::PowerFifth => "power-fifth",
            ThresholdRule::HalfLevel => "half-level",
        }
    }

    /// `f(S)`.
    pub fn slack(self, alpha: f64, rounds: usize) -> Result<f64> {
        if rounds == 0 {
            return Err(Error::invalid("S must be at least 1"));
        }
        let s = rounds as f64;
        Ok(match self {
            ThresholdRule::Lil => {
                if rounds < 3 {
                    return Err(Error::invalid(format!(
                        "the LIL threshold needs S >= 3, got S = {rounds}"
                    )));
                }
                (2.0 * s.ln().ln() / s).sqrt()
            }
            ThresholdRule::PowerThird => s.powf(-1.0 / 3.0),
            ThresholdRule::PowerQuarter => s.powf(-0.25),
            ThresholdRule::PowerFifth => s.powf(-0.2),
            ThresholdRule::HalfLevel => (1.0 - alpha) / 2.0,
        })
    }

    /// Acceptance threshold `(1 - alpha) - f(S)`.
    pub fn threshold(self, alpha: f64, rounds: usize) -> Result<f64> {
        Ok((1.0 - alpha) - self.slack(alpha, rounds)?)
    }
}

impl std::fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|r| r.name()).collect();
                Error::invalid(format!(
                    "unknown threshold rule `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    AcceptH0,
    RejectH0,
}

/// Strong decision rule: accept `H0` iff `q >= (1 - alpha) - f(S)`.
pub fn strong_rule(q: f64, alpha: f64, rounds: usize, rule: ThresholdRule) -> Result<Decision> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("Q = {q} must lie in [0, 1]")));
    }
    let threshold = rule.threshold(alpha, rounds)?;
    Ok(if q >= threshold {
        Decision::AcceptH0
    } else {
        Decision::RejectH0
    })
}
