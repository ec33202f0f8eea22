//! The slow potential W: a real trigonometric polynomial of period 2 pi,
//! entire in zeta, with cached range and analytic derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::golden_min;

/// One harmonic a cos(h zeta) + b sin(h zeta) of a 2 pi periodic polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowHarmonic {
    pub index: u32,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlowPotential {
    pub harmonics: Vec<SlowHarmonic>,
    /// User cap on the strip half-height used by the complex geometry.
    pub strip_height: f64,
    #[serde(skip)]
    w_minus: f64,
    #[serde(skip)]
    w_plus: f64,
}

impl SlowPotential {
    pub fn new(harmonics: Vec<SlowHarmonic>, strip_height: f64) -> Result<Self> {
        if !(strip_height > 0.0) {
            return Err(Error::InvalidInput("strip height must be positive".into()));
        }
        for h in &harmonics {
            if !h.cos_coeff.is_finite() || !h.sin_coeff.is_finite() {
                return Err(Error::InvalidInput("slow potential coefficients must be finite".into()));
            }
        }
        let mut w = SlowPotential {
            harmonics,
            strip_height,
            w_minus: 0.0,
            w_plus: 0.0,
        };
        let (lo, hi) = w.scan_range();
        w.w_minus = lo;
        w.w_plus = hi;
        Ok(w)
    }

    /// a cos(zeta) slow potential.
    pub fn cosine(amplitude: f64, strip_height: f64) -> Self {
        SlowPotential::new(
            vec![SlowHarmonic {
                index: 1,
                cos_coeff: amplitude,
                sin_coeff: 0.0,
            }],
            strip_height,
        )
        .expect("cosine potential is always valid")
    }

    /// Recompute the cached range after deserialization.
    pub fn refresh_range(&mut self) {
        let (lo, hi) = self.scan_range();
        self.w_minus = lo;
        self.w_plus = hi;
    }

    pub fn w_minus(&self) -> f64 {
        self.w_minus
    }

    pub fn w_plus(&self) -> f64 {
        self.w_plus
    }

    /// inf/sup over the real line by dense scan plus local golden refinement.
    fn scan_range(&self) -> (f64, f64) {
        let n = 4096;
        let tau = std::f64::consts::TAU;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut lo_at = 0.0;
        let mut hi_at = 0.0;
        for i in 0..n {
            let z = tau * i as f64 / n as f64;
            let w = self.eval_real(z);
            if w < lo {
                lo = w;
                lo_at = z;
            }
            if w > hi {
                hi = w;
                hi_at = z;
            }
        }
        let d = tau / n as f64;
        let (_, lo_ref) = golden_min(|z| self.eval_real(z), lo_at - d, lo_at + d, 1e-13);
        let (_, hi_ref) = golden_min(|z| -self.eval_real(z), hi_at - d, hi_at + d, 1e-13);
        (lo.min(lo_ref), hi.max(-hi_ref))
    }

    pub fn eval_real(&self, zeta: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let arg = h.index as f64 * zeta;
                h.cos_coeff * arg.cos() + h.sin_coeff * arg.sin()
            })
            .sum()
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.harmonics
            .iter()
            .map(|h| {
                let arg = zeta * h.index as f64;
                arg.cos() * h.cos_coeff + arg.sin() * h.sin_coeff
            })
            .sum()
    }

    /// d^order W / d zeta^order, term-by-term.
    pub fn derivative(&self, zeta: Complex64, order: u32) -> Complex64 {
        self.harmonics
            .iter()
            .map(|h| {
                let k = h.index as f64;
                if h.index == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let arg = zeta * k;
                let scale = k.powi(order as i32);
                // derivatives cycle cos -> -sin -> -cos -> sin
                let (c, s) = match order % 4 {
                    0 => (arg.cos(), arg.sin()),
                    1 => (-arg.sin(), arg.cos()),
                    2 => (-arg.cos(), -arg.sin()),
                    _ => (arg.sin(), -arg.cos()),
                };
                (c * h.cos_coeff + s * h.sin_coeff) * scale
            })
            .sum()
    }

    pub fn derivative_real(&self, zeta: f64, order: u32) -> f64 {
        self.derivative(Complex64::new(zeta, 0.0), order).re
    }

    /// Upper bound for |W| on the strip |Im zeta| <= y.
    pub fn strip_bound(&self, y: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let amp = (h.cos_coeff.powi(2) + h.sin_coeff.powi(2)).sqrt();
                amp * (h.index as f64 * y).cosh()
            })
            .sum()
    }

    /// Real extrema of W in [0, 2 pi): roots of W' with their orders.
    /// The order n means W behaves like (zeta - z0)^n near z0 (n = 2 for a
    /// quadratic extremum); derivative vanishing is tested up to order 8.
    pub fn real_extrema(&self) -> Result<Vec<(f64, usize)>> {
        let tau = std::f64::consts::TAU;
        let n = 8192;
        let mut roots: Vec<f64> = Vec::new();
        let mut prev = self.derivative_real(0.0, 1);
        for i in 1..=n {
            let z = tau * i as f64 / n as f64;
            let cur = self.derivative_real(z, 1);
            if prev == 0.0 {
                roots.push(tau * (i - 1) as f64 / n as f64);
            } else if (prev < 0.0) != (cur < 0.0) {
                let a = tau * (i - 1) as f64 / n as f64;
                let r = crate::roots::bisect(|x| self.derivative_real(x, 1), a, z, 1e-13);
                roots.push(r);
            }
            prev = cur;
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        if roots.len() > 1 && (roots[0] + tau - *roots.last().unwrap()).abs() < 1e-9 {
            roots.pop();
        }
        let thresh = 1e-8 * (1.0 + self.strip_bound(0.0));
        let mut out = Vec::with_capacity(roots.len());
        for r in roots {
            let mut order = None;
            for ord in 2..=8u32 {
                if self.derivative_real(r, ord).abs() > thresh {
                    order = Some(ord as usize);
                    break;
                }
            }
            match order {
                Some(o) => out.push((r.rem_euclid(tau), o)),
                None => {
                    return Err(Error::UnsupportedOrder { order: 9 });
                }
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_range_and_extrema() {
        let w = SlowPotential::cosine(0.8, 1.0);
        assert!((w.w_plus() - 0.8).abs() < 1e-10);
        assert!((w.w_minus() + 0.8).abs() < 1e-10);
        let ext = w.real_extrema().unwrap();
        assert_eq!(ext.len(), 2);
        assert!((ext[0].0 - 0.0).abs() < 1e-8 || (ext[0].0 - 2.0 * PI).abs() < 1e-8);
        assert_eq!(ext[0].1, 2);
        assert!((ext[1].0 - PI).abs() < 1e-8);
        assert_eq!(ext[1].1, 2);
    }

    #[test]
    fn periodicity_and_conjugate_symmetry() {
        let w = SlowPotential::new(
            vec![
                SlowHarmonic { index: 1, cos_coeff: 0.7, sin_coeff: 0.2 },
                SlowHarmonic { index: 2, cos_coeff: -0.3, sin_coeff: 0.1 },
            ],
            1.0,
        )
        .unwrap();
        let z = Complex64::new(0.83, 0.41);
        let tau = Complex64::new(std::f64::consts::TAU, 0.0);
        assert!((w.eval(z + tau) - w.eval(z)).norm() < 1e-12);
        assert!((w.eval(z.conj()) - w.eval(z).conj()).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let w = SlowPotential::new(
            vec![
                SlowHarmonic { index: 1, cos_coeff: 0.7, sin_coeff: 0.2 },
                SlowHarmonic { index: 3, cos_coeff: 0.05, sin_coeff: -0.04 },
            ],
            1.0,
        )
        .unwrap();
        let z = 1.234;
        let h = 1e-5;
        let fd = (w.eval_real(z + h) - w.eval_real(z - h)) / (2.0 * h);
        assert!((w.derivative_real(z, 1) - fd).abs() < 1e-8);
        let fd2 = (w.eval_real(z + h) - 2.0 * w.eval_real(z) + w.eval_real(z - h)) / (h * h);
        assert!((w.derivative_real(z, 2) - fd2).abs() < 1e-5);
    }

    #[test]
    fn quartic_extremum_order() {
        // W = cos(z) + cos(2z)/4... choose coefficients so W'(0)=W''(0)=W'''(0)=0
        // W = cos z - cos(2 z)/4: W' = -sin z + sin(2z)/2, W'' = -cos z + cos 2z,
        // at 0: W'' = 0, W''' = sin... = 0, W'''' = cos z - 4 cos 2z = -3 != 0 -> order 4
        let w = SlowPotential::new(
            vec![
                SlowHarmonic { index: 1, cos_coeff: 1.0, sin_coeff: 0.0 },
                SlowHarmonic { index: 2, cos_coeff: -0.25, sin_coeff: 0.0 },
            ],
            1.0,
        )
        .unwrap();
        let ext = w.real_extrema().unwrap();
        let at_zero = ext.iter().find(|(z, _)| *z < 1e-6 || (*z - std::f64::consts::TAU).abs() < 1e-6);
        assert_eq!(at_zero.map(|e| e.1), Some(4), "extrema: {ext:?}");
    }

    #[test]
    fn strip_bound_dominates() {
        let w = SlowPotential::cosine(1.0, 1.0);
        let b = w.strip_bound(0.5);
        for i in 0..50 {
            let z = Complex64::new(0.13 * i as f64, 0.5);
            assert!(w.eval(z).norm() <= b + 1e-12);
        }
    }
}
