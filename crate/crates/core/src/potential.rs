//! The fast periodic potential V (period 1, real-valued).
//!
//! Two representations are supported: piecewise-constant segments (admit an
//! exact per-segment propagator) and trigonometric polynomials (propagated
//! with a fixed-step 4th-order Magnus integrator). Both keep the transfer
//! matrix exactly unimodular.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the piecewise segment lengths summing to the period.
pub const SEGMENT_SUM_TOL: f64 = 1e-12;

/// One harmonic of a trigonometric polynomial:
/// `cos_coeff * cos(2 pi h x) + sin_coeff * sin(2 pi h x)` for period-1
/// potentials (the slow potential uses its own period-2pi variant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub index: u32,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
}

/// The fast potential, period fixed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Constant values on consecutive segments whose lengths sum to 1.
    PiecewiseConstant { segments: Vec<(f64, f64)> },
    /// Real trigonometric polynomial sum_h (a_h cos(2 pi h x) + b_h sin(2 pi h x)).
    TrigPolynomial { harmonics: Vec<Harmonic> },
}

impl PotentialSpec {
    /// The zero potential (free operator) as a single segment.
    pub fn free() -> Self {
        PotentialSpec::PiecewiseConstant {
            segments: vec![(1.0, 0.0)],
        }
    }

    /// Square barrier `v0` on [0, width), 0 on [width, 1).
    pub fn kronig_penney(v0: f64, width: f64) -> Self {
        PotentialSpec::PiecewiseConstant {
            segments: vec![(width, v0), (1.0 - width, 0.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::PiecewiseConstant { segments } => {
                if segments.is_empty() {
                    return Err(Error::InvalidInput("potential has no segments".into()));
                }
                let mut sum = 0.0;
                for &(len, val) in segments {
                    if !(len > 0.0) || !len.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "segment length {len} must be finite and > 0"
                        )));
                    }
                    if !val.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "segment value {val} must be finite"
                        )));
                    }
                    sum += len;
                }
                if (sum - 1.0).abs() > SEGMENT_SUM_TOL {
                    return Err(Error::InvalidInput(format!(
                        "segment lengths sum to {sum}, expected 1 within {SEGMENT_SUM_TOL:e}"
                    )));
                }
                Ok(())
            }
            PotentialSpec::TrigPolynomial { harmonics } => {
                for h in harmonics {
                    if !h.cos_coeff.is_finite() || !h.sin_coeff.is_finite() {
                        return Err(Error::InvalidInput(
                            "trigonometric coefficients must be finite".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// V(x), using the periodic extension.
    pub fn eval(&self, x: f64) -> f64 {
        let xf = x - x.floor();
        match self {
            PotentialSpec::PiecewiseConstant { segments } => {
                let mut acc = 0.0;
                for &(len, val) in segments {
                    acc += len;
                    if xf < acc {
                        return val;
                    }
                }
                segments.last().map(|s| s.1).unwrap_or(0.0)
            }
            PotentialSpec::TrigPolynomial { harmonics } => {
                let tau = std::f64::consts::TAU;
                harmonics
                    .iter()
                    .map(|h| {
                        let arg = tau * h.index as f64 * xf;
                        h.cos_coeff * arg.cos() + h.sin_coeff * arg.sin()
                    })
                    .sum()
            }
        }
    }

    /// A lower bound for V on the real line (used to anchor energy windows
    /// below the spectrum, since H0 >= inf V).
    pub fn lower_bound(&self) -> f64 {
        match self {
            PotentialSpec::PiecewiseConstant { segments } => segments
                .iter()
                .map(|s| s.1)
                .fold(f64::INFINITY, f64::min),
            PotentialSpec::TrigPolynomial { harmonics } => {
                // l1 bound: V >= a0 - sum |coeffs|
                let mut lo = 0.0;
                for h in harmonics {
                    if h.index == 0 {
                        lo += h.cos_coeff;
                    } else {
                        lo -= (h.cos_coeff.powi(2) + h.sin_coeff.powi(2)).sqrt();
                    }
                }
                lo
            }
        }
    }

    /// Breakpoints of the piecewise representation within [0, 1), starting at 0.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialSpec::PiecewiseConstant { segments } => {
                let mut pts = Vec::with_capacity(segments.len());
                let mut acc = 0.0;
                for &(len, _) in segments {
                    pts.push(acc);
                    acc += len;
                }
                pts
            }
            PotentialSpec::TrigPolynomial { .. } => vec![0.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_segment_sum() {
        let bad = PotentialSpec::PiecewiseConstant {
            segments: vec![(0.5, 1.0), (0.4, 0.0)],
        };
        assert!(bad.validate().is_err());
        let good = PotentialSpec::kronig_penney(10.0, 0.5);
        assert!(good.validate().is_ok());
    }

    #[test]
    fn periodic_evaluation() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        assert_eq!(v.eval(0.25), 10.0);
        assert_eq!(v.eval(0.75), 0.0);
        assert_eq!(v.eval(1.25), 10.0);
        assert_eq!(v.eval(-0.25), 0.0);
    }

    #[test]
    fn trig_eval_and_bound() {
        let v = PotentialSpec::TrigPolynomial {
            harmonics: vec![Harmonic {
                index: 1,
                cos_coeff: 2.0,
                sin_coeff: 0.0,
            }],
        };
        assert!((v.eval(0.0) - 2.0).abs() < 1e-15);
        assert!((v.eval(0.5) + 2.0).abs() < 1e-15);
        assert!(v.lower_bound() <= -2.0 + 1e-15);
    }
}
