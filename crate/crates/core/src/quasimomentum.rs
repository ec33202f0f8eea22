//! The Bloch quasi-momentum k(E) and Bloch solutions.
//!
//! The multiplier satisfies lambda + 1/lambda = D(E), i.e. 2 cos k = D(E).
//! The main branch is pinned by Re k(E+i0) = 0, Im k(E+i0) > 0 below the
//! spectrum; it increases from (n-1) pi to n pi along the n-th band and has
//! constant real part n pi across the n-th gap. All other branches are
//! +-k + 2 pi l, which is what the candidate-matching continuation exploits.

use num_complex::Complex64;

use crate::bands::{BandStructure, Locus};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::transfer::{discriminant, discriminant_real, propagate, DEFAULT_MAGNUS_STEPS};

/// One determination of the quasi-momentum: value = sign * k_main + 2 pi sheet.
#[derive(Debug, Clone, Copy)]
pub struct QuasiMomentumValue {
    pub value: Complex64,
    pub sheet: i32,
    pub sign: i8,
    pub energy: Complex64,
}

/// Nearest branch value of arccos-type multivalued k given D/2, measured
/// from `near`. Returns (best, |best - near|, |second - near|); the second
/// distance is the separation guard used by path continuation.
pub fn nearest_branch(d_half: Complex64, near: Complex64) -> (Complex64, f64, f64) {
    let a = d_half.acos();
    let tau = std::f64::consts::TAU;
    let mut best = Complex64::new(0.0, 0.0);
    let mut d1 = f64::INFINITY;
    let mut d2 = f64::INFINITY;
    for s in [1.0f64, -1.0] {
        let base = a * s;
        let l0 = ((near.re - base.re) / tau).round();
        for dl in [-1.0, 0.0, 1.0] {
            let cand = base + Complex64::new((l0 + dl) * tau, 0.0);
            let d = (cand - near).norm();
            if d < d1 {
                d2 = d1;
                d1 = d;
                best = cand;
            } else if d < d2 {
                d2 = d;
            }
        }
    }
    (best, d1, d2)
}

/// Continue a branch of k along a parametrized path, nearest-candidate
/// matching with adaptive bisection of the parameter. `d_half_at(t)` must
/// give D(path(t))/2; t runs over [0, 1]; `seed` is the branch value at t=0.
pub fn continue_branch<F: Fn(f64) -> Complex64>(
    d_half_at: &F,
    seed: Complex64,
    initial_steps: usize,
) -> Result<Complex64> {
    let min_dt = 1e-8;
    // absolute acceptance: near band edges the +- candidates collide but
    // converge to the same value, so a tiny best-distance is unambiguous
    let collapse_tol = 1e-3;
    let n = initial_steps.max(1);
    let mut val = seed;
    for i in 0..n {
        let t0 = i as f64 / n as f64;
        let t1 = (i + 1) as f64 / n as f64;
        val = continue_segment(d_half_at, t0, t1, val, min_dt, collapse_tol, 0)?;
    }
    Ok(val)
}

fn continue_segment<F: Fn(f64) -> Complex64>(
    d_half_at: &F,
    t0: f64,
    t1: f64,
    v0: Complex64,
    min_dt: f64,
    collapse_tol: f64,
    depth: usize,
) -> Result<Complex64> {
    let (best, d1, d2) = nearest_branch(d_half_at(t1), v0);
    if d1 < collapse_tol || (d1 < 0.35 * d2 && d1 < 0.7) {
        return Ok(best);
    }
    if t1 - t0 < min_dt || depth > 40 {
        return Err(Error::ContinuationAccuracy {
            residual: d1,
            limit: 0.35 * d2,
        });
    }
    let tm = 0.5 * (t0 + t1);
    let vm = continue_segment(d_half_at, t0, tm, v0, min_dt, collapse_tol, depth + 1)?;
    continue_segment(d_half_at, tm, t1, vm, min_dt, collapse_tol, depth + 1)
}

/// Main branch of the quasi-momentum at a real energy (E + i0 limit).
pub fn main_branch_real(
    pot: &PotentialSpec,
    bands: &BandStructure,
    e: f64,
) -> Result<Complex64> {
    if !bands.anchored {
        return Err(Error::InvalidInput(
            "quasi-momentum needs a band structure anchored below the spectrum".into(),
        ));
    }
    if e > bands.coverage_hi() {
        return Err(Error::WindowExhausted {
            requested: e,
            limit: bands.coverage_hi(),
        });
    }
    let d = discriminant_real(pot, e)?;
    let pi = std::f64::consts::PI;
    match bands.classify(e) {
        Locus::BelowSpectrum => {
            let y = (d / 2.0).max(1.0).acosh();
            Ok(Complex64::new(0.0, y))
        }
        Locus::InBand(i) => {
            let n = bands.bands[i].n;
            let x = (d / 2.0).clamp(-1.0, 1.0);
            let a = x.acos();
            let k = if n % 2 == 1 {
                (n - 1) as f64 * pi + a
            } else {
                n as f64 * pi - a
            };
            Ok(Complex64::new(k, 0.0))
        }
        Locus::InGap(i) => {
            let n = bands.gaps[i].n;
            let y = (d.abs() / 2.0).max(1.0).acosh();
            Ok(Complex64::new(n as f64 * pi, y))
        }
        Locus::BelowWindow => Err(Error::WindowExhausted {
            requested: e,
            limit: bands.window.0,
        }),
        _ => Err(Error::WindowExhausted {
            requested: e,
            limit: bands.coverage_hi(),
        }),
    }
}

/// Main branch for energies in the closed upper half-plane. Real energies
/// use the band-counting formula directly; complex ones are continued from
/// an anchor on the real axis along the vertical segment.
pub fn quasi_momentum_main(
    pot: &PotentialSpec,
    bands: &BandStructure,
    energy: Complex64,
) -> Result<QuasiMomentumValue> {
    if energy.im < 0.0 {
        return Err(Error::InvalidInput(
            "main branch is defined on the closed upper half-plane".into(),
        ));
    }
    let value = if energy.im == 0.0 {
        main_branch_real(pot, bands, energy.re)?
    } else {
        // anchor just off any branch point
        let mut anchor_re = energy.re;
        if let Some(edge) = bands
            .edges
            .iter()
            .min_by(|a, b| {
                (a.energy - energy.re)
                    .abs()
                    .partial_cmp(&(b.energy - energy.re).abs())
                    .unwrap()
            })
        {
            if (edge.energy - anchor_re).abs() < 1e-4 {
                anchor_re += 2e-4;
            }
        }
        let seed = main_branch_real(pot, bands, anchor_re)?;
        let a = Complex64::new(anchor_re, 0.0);
        let d_half_at = |t: f64| -> Complex64 {
            let e = a + (energy - a) * t;
            discriminant(pot, e).map(|d| d / 2.0).unwrap_or(Complex64::new(f64::NAN, 0.0))
        };
        continue_branch(&d_half_at, seed, 8)?
    };
    Ok(QuasiMomentumValue {
        value,
        sheet: 0,
        sign: 1,
        energy,
    })
}

/// Bloch solution value at `x` and its Floquet multiplier, normalized so
/// that psi(1) = 1. The energy must avoid band edges where the two
/// multipliers collide.
pub fn bloch_solution(
    pot: &PotentialSpec,
    bands: &BandStructure,
    e: f64,
    x: f64,
) -> Result<(Complex64, Complex64)> {
    let d = discriminant_real(pot, e)?;
    if (d * d - 4.0).abs() < 1e-9 {
        return Err(Error::DegenerateMultiplier { energy: e });
    }
    let kp = main_branch_real(pot, bands, e)?;
    let lambda = (Complex64::i() * kp).exp();
    let m = propagate(pot, Complex64::new(e, 0.0), 0.0, 1.0, DEFAULT_MAGNUS_STEPS)?;
    let v = m.eigenvector(lambda);
    // psi(1) = lambda * psi(0) = lambda * v0 * scale = 1
    let denom = lambda * v[0];
    if denom.norm() < 1e-14 {
        return Err(Error::DegenerateMultiplier { energy: e });
    }
    let scale = Complex64::new(1.0, 0.0) / denom;
    let data0 = [v[0] * scale, v[1] * scale];
    let px = propagate(pot, Complex64::new(e, 0.0), 0.0, x, DEFAULT_MAGNUS_STEPS)?;
    let at_x = px.apply(data0);
    Ok((at_x[0], lambda))
}

/// Both Bloch solutions (psi, psi-hat) values at `x` with their multipliers.
pub fn bloch_pair(
    pot: &PotentialSpec,
    bands: &BandStructure,
    e: f64,
    x: f64,
) -> Result<[(Complex64, Complex64); 2]> {
    let first = bloch_solution(pot, bands, e, x)?;
    let d = discriminant_real(pot, e)?;
    let kp = main_branch_real(pot, bands, e)?;
    let lambda_hat = (-Complex64::i() * kp).exp();
    debug_assert!(
        ((first.1 + lambda_hat).re - d).abs() < 1e-6,
        "multipliers must sum to D"
    );
    let m = propagate(pot, Complex64::new(e, 0.0), 0.0, 1.0, DEFAULT_MAGNUS_STEPS)?;
    let v = m.eigenvector(lambda_hat);
    let denom = lambda_hat * v[0];
    if denom.norm() < 1e-14 {
        return Err(Error::DegenerateMultiplier { energy: e });
    }
    let scale = Complex64::new(1.0, 0.0) / denom;
    let data0 = [v[0] * scale, v[1] * scale];
    let px = propagate(pot, Complex64::new(e, 0.0), 0.0, x, DEFAULT_MAGNUS_STEPS)?;
    let at_x = px.apply(data0);
    Ok([first, (at_x[0], lambda_hat)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::band_structure_anchored;
    use std::f64::consts::PI;

    fn free_bands() -> (PotentialSpec, BandStructure) {
        let v = PotentialSpec::free();
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        (v, bs)
    }

    #[test]
    fn free_quasi_momentum_is_sqrt_e() {
        let (v, bs) = free_bands();
        for &e in &[0.1, 1.0, 4.0, 17.3, 50.0, 88.0] {
            let k = quasi_momentum_main(&v, &bs, Complex64::new(e, 0.0)).unwrap();
            assert!(
                (k.value.re - e.sqrt()).abs() < 1e-8 && k.value.im.abs() < 1e-10,
                "k_p({e}) = {} vs sqrt = {}",
                k.value,
                e.sqrt()
            );
        }
    }

    #[test]
    fn free_below_spectrum_branch() {
        let (v, bs) = free_bands();
        let k = quasi_momentum_main(&v, &bs, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((k.value - Complex64::new(0.0, 1.0)).norm() < 1e-10, "got {}", k.value);
    }

    #[test]
    fn kp_band_edges_map_to_pi_multiples() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        for n in 1..=3usize {
            let b = bs.band_by_number(n).unwrap().clone();
            let k_lo = main_branch_real(&v, &bs, b.lo + 1e-9).unwrap();
            let k_hi = main_branch_real(&v, &bs, b.hi - 1e-9).unwrap();
            assert!(
                (k_lo.re - (n - 1) as f64 * PI).abs() < 1e-4,
                "band {n} lower edge k = {}",
                k_lo.re
            );
            assert!(
                (k_hi.re - n as f64 * PI).abs() < 1e-4,
                "band {n} upper edge k = {}",
                k_hi.re
            );
        }
    }

    #[test]
    fn monotone_on_bands_and_flat_imaginary() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        let b = bs.band_by_number(2).unwrap().clone();
        let mut last = -1.0;
        for i in 0..=40 {
            let e = b.lo + (b.hi - b.lo) * (0.01 + 0.98 * i as f64 / 40.0);
            let k = main_branch_real(&v, &bs, e).unwrap();
            assert!(k.im.abs() < 1e-9, "Im k = {} inside band", k.im);
            assert!(k.re > last, "Re k not increasing at E={e}");
            last = k.re;
        }
    }

    #[test]
    fn gap_has_constant_real_part() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        let g = &bs.gaps[0];
        let mut max_im = 0.0f64;
        for i in 1..20 {
            let e = g.lo + (g.hi - g.lo) * i as f64 / 20.0;
            let k = main_branch_real(&v, &bs, e).unwrap();
            assert!((k.re - PI).abs() < 1e-9, "gap 1 Re k = {}", k.re);
            assert!(k.im > 0.0);
            max_im = max_im.max(k.im);
        }
        assert!(max_im > 0.1, "gap decay rate looks too small: {max_im}");
    }

    #[test]
    fn complex_energy_continuation_consistent() {
        // 2 cos(k) must reproduce D at the continued point
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        for &(re, im) in &[(8.0, 1.0), (14.0, 2.0), (3.0, 0.5), (30.0, 4.0)] {
            let e = Complex64::new(re, im);
            let k = quasi_momentum_main(&v, &bs, e).unwrap();
            let d = discriminant(&v, e).unwrap();
            let resid = (2.0 * k.value.cos() - d).norm();
            assert!(resid < 1e-8, "2cos(k)-D = {resid:.2e} at {e}");
            assert!(k.value.im > 0.0, "Im k_p must stay positive off the axis");
        }
    }

    #[test]
    fn free_bloch_solution_is_plane_wave() {
        let (v, bs) = free_bands();
        for &x in &[0.0, 0.3, 1.7, -0.4] {
            let (psi, lambda) = bloch_solution(&v, &bs, 4.0, x).unwrap();
            let expect = (Complex64::i() * 2.0 * (x - 1.0)).exp();
            assert!((psi - expect).norm() < 1e-9, "psi({x}) = {psi} vs {expect}");
            assert!((lambda - (Complex64::i() * 2.0).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn bloch_multiplier_relation_generic() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        for &e in &[5.0, 8.5, 15.0, 20.0] {
            let (_, lambda) = bloch_solution(&v, &bs, e, 0.0).unwrap();
            for &x in &[0.2, 0.9, 1.5] {
                let (p1, _) = bloch_solution(&v, &bs, e, x).unwrap();
                let (p2, _) = bloch_solution(&v, &bs, e, x + 1.0).unwrap();
                assert!(
                    (p2 - lambda * p1).norm() < 1e-8 * (1.0 + p1.norm()),
                    "psi(x+1) != lambda psi(x) at E={e}, x={x}"
                );
            }
        }
    }

    #[test]
    fn bloch_real_in_gap() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        // E=15 sits in the first open gap of KP(10); E=5 quoted elsewhere is
        // inside band 1, where the solutions are complex conjugates instead.
        for &x in &[0.1, 0.6, 1.3] {
            let (psi, lambda) = bloch_solution(&v, &bs, 15.0, x).unwrap();
            assert!(psi.im.abs() < 1e-9, "gap Bloch solution not real: {psi}");
            assert!(lambda.im.abs() < 1e-12);
        }
    }

    #[test]
    fn band_edge_is_degenerate() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        let e1 = bs.edges[0].energy;
        assert!(matches!(
            bloch_solution(&v, &bs, e1, 0.5),
            Err(Error::DegenerateMultiplier { .. })
        ));
    }

    #[test]
    fn branch_relation_on_random_band_points() {
        // any two determinations differ by an element of {+-k + 2 pi l}
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        let b = bs.band_by_number(2).unwrap().clone();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let e = rng.gen_range(b.lo + 0.05..b.hi - 0.05);
            let k_main = main_branch_real(&v, &bs, e).unwrap();
            // independent evaluation through principal arccos
            let d = discriminant_real(&v, e).unwrap();
            let a = Complex64::new(d / 2.0, 0.0).acos();
            // check k_main = +-a + 2 pi l for integer l
            let tau = std::f64::consts::TAU;
            let fits = [1.0, -1.0].iter().any(|s| {
                let l = (k_main.re - s * a.re) / tau;
                (l - l.round()).abs() < 1e-8 && (k_main.im - s * a.im).abs() < 1e-8
            });
            assert!(fits, "determinations unrelated at E={e}");
        }
    }
}
