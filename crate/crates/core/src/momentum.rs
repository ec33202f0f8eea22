//! The complex momentum kappa(zeta) = k(E - W(zeta)) and its continuation
//! along paths in the zeta strip.
//!
//! kappa is multivalued; all branches at a point are +-kappa_p + 2 pi m.
//! Continuation therefore reduces to nearest-candidate matching of
//! arccos(D(E - W(zeta))/2) along a path, with adaptive refinement, which is
//! also how period signatures and indices are extracted downstream.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::AdiabaticProblem;
use crate::quasimomentum::{continue_branch, main_branch_real};

/// Branch label: value = sign * kappa_main + 2 pi * sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchSpec {
    pub sign: i8,
    pub sheet: i32,
}

impl BranchSpec {
    pub const MAIN: BranchSpec = BranchSpec { sign: 1, sheet: 0 };
}

#[derive(Debug, Clone, Copy)]
pub struct MomentumValue {
    pub value: Complex64,
    /// Set when zeta is within ~1e-6 of a branch point; the value is still
    /// returned but carries reduced accuracy.
    pub near_branch_point: bool,
}

/// Main-branch kappa at a real zeta: direct composition with the real-axis
/// quasi-momentum.
pub fn main_branch_at_real(problem: &AdiabaticProblem, zeta: f64) -> Result<Complex64> {
    let e = problem.energy - problem.slow.eval_real(zeta);
    main_branch_real(&problem.potential, &problem.bands, e)
}

/// kappa on the requested branch at any zeta in the strip.
///
/// Real zeta evaluates through the band-counting formula; complex zeta is
/// continued from an anchor on the real axis along the connecting segment,
/// retrying with shifted anchors when the straight path brushes a branch
/// point.
pub fn complex_momentum(
    problem: &AdiabaticProblem,
    zeta: Complex64,
    branch: BranchSpec,
) -> Result<MomentumValue> {
    let near = problem.branch_point_distance(zeta) < 1e-6;
    let main = if zeta.im == 0.0 {
        main_branch_at_real(problem, zeta.re)?
    } else {
        let mut last_err = None;
        let mut value = None;
        for shift in [0.0f64, 0.05, -0.05, 0.13, -0.13, 0.29, -0.29] {
            let anchor = zeta.re + shift;
            let seed = match main_branch_at_real(problem, anchor) {
                Ok(s) => s,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let a = Complex64::new(anchor, 0.0);
            let d_half_at = |t: f64| problem.d_half(a + (zeta - a) * t);
            match continue_branch(&d_half_at, seed, 8) {
                Ok(v) => {
                    value = Some(v);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        match value {
            Some(v) => v,
            None => return Err(last_err.unwrap_or(Error::InternalInconsistency(
                "momentum continuation failed with no diagnostic".into(),
            ))),
        }
    };
    let tau = std::f64::consts::TAU;
    let value = main * branch.sign as f64 + Complex64::new(branch.sheet as f64 * tau, 0.0);
    Ok(MomentumValue {
        value,
        near_branch_point: near,
    })
}

/// A crossing of the path with the preimage of the closed spectral gaps
/// (where Re kappa is pinned to a multiple of pi).
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    /// Segment index and local parameter of the crossing along the path.
    pub segment: usize,
    pub t: f64,
    pub zeta: Complex64,
    /// Re kappa of the continued branch at the crossing.
    pub re_kappa: f64,
    /// H0 gap number (gap n lies above band n); None marks the region below
    /// the spectrum, which pins Re kappa all the same.
    pub gap: Option<usize>,
}

/// Continue a branch along a polyline; returns the values at the nodes.
pub fn continue_along_path(
    problem: &AdiabaticProblem,
    path: &[Complex64],
    seed: Complex64,
) -> Result<Vec<Complex64>> {
    let mut values = Vec::with_capacity(path.len());
    values.push(seed);
    let mut current = seed;
    for i in 0..path.len() - 1 {
        let a = path[i];
        let b = path[i + 1];
        let d_half_at = |t: f64| problem.d_half(a + (b - a) * t);
        current = continue_branch(&d_half_at, current, 1)?;
        values.push(current);
    }
    Ok(values)
}

/// Continue along a polyline and record every transversal crossing of the
/// gap preimage (the set where E - W is real and lies in a spectral gap or
/// below the spectrum).
pub fn continue_with_crossings(
    problem: &AdiabaticProblem,
    path: &[Complex64],
    seed: Complex64,
) -> Result<(Vec<Complex64>, Vec<Crossing>)> {
    let mut values = Vec::with_capacity(path.len());
    values.push(seed);
    let mut crossings = Vec::new();
    let mut current = seed;
    for i in 0..path.len() - 1 {
        let a = path[i];
        let b = path[i + 1];
        // scan Im W along the segment for sign changes; samples landing
        // exactly on a zero are nudged off it so a transversal crossing
        // cannot hide behind an exact-zero sample (segments running along
        // the real axis stay identically zero and record nothing)
        let im_w = |t: f64| problem.slow.eval(a + (b - a) * t).im;
        let nsub = 33;
        let mut prev_t = 0.0;
        let mut prev = im_w(0.0);
        for j in 1..=nsub {
            let mut t = j as f64 / nsub as f64;
            let mut cur = im_w(t);
            if cur == 0.0 && j < nsub {
                t += 1e-4 / nsub as f64;
                cur = im_w(t);
            }
            if prev != 0.0 && (prev < 0.0) != (cur < 0.0) && cur != 0.0 {
                let tc = crate::roots::bisect(&im_w, prev_t, t, 1e-13);
                let zc = a + (b - a) * tc;
                let e_at = problem.energy - problem.slow.eval(zc).re;
                let locus = problem.bands.classify(e_at);
                let gap = match locus {
                    crate::bands::Locus::InGap(g) => Some(Some(problem.bands.gaps[g].n)),
                    crate::bands::Locus::BelowSpectrum => Some(None),
                    _ => None,
                };
                if let Some(gap) = gap {
                    // continue the branch to the crossing to read Re kappa
                    let d_half_at = |t: f64| problem.d_half(a + (b - a) * t);
                    let scale = tc.max(1e-12);
                    let to_cross =
                        continue_branch(&|t: f64| d_half_at(t * scale), current, 1)?;
                    let pi = std::f64::consts::PI;
                    let r = to_cross.re;
                    let near_multiple = (r / pi - (r / pi).round()).abs() < 1e-5;
                    if !near_multiple {
                        return Err(Error::InvalidCrossing { value: r });
                    }
                    crossings.push(Crossing {
                        segment: i,
                        t: tc,
                        zeta: zc,
                        re_kappa: (r / pi).round() * pi,
                        gap,
                    });
                }
            }
            prev_t = t;
            prev = cur;
        }
        let d_half_at = |t: f64| problem.d_half(a + (b - a) * t);
        current = continue_branch(&d_half_at, current, 1)?;
        values.push(current);
    }
    Ok((values, crossings))
}

/// Seed value for continuations starting at a real point: the main branch
/// with Im >= 0 (below the spectrum or in a gap this is the decaying branch).
pub fn real_seed(problem: &AdiabaticProblem, zeta: f64) -> Result<Complex64> {
    main_branch_at_real(problem, zeta)
}

/// Sanity helper used in tests: verify a value is a valid branch at zeta,
/// i.e. 2 cos(value) reproduces the discriminant.
pub fn branch_residual(problem: &AdiabaticProblem, zeta: Complex64, value: Complex64) -> f64 {
    (value.cos() - problem.d_half(zeta)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::problem::AdiabaticProblem;
    use crate::slow::SlowPotential;

    fn free_cos_problem(e: f64) -> AdiabaticProblem {
        let v = PotentialSpec::free();
        let w = SlowPotential::cosine(1.0, 1.0);
        AdiabaticProblem::new(v, w, e, 0.3).unwrap()
    }

    #[test]
    fn free_momentum_closed_form() {
        // V=0, W=cos, E=2, zeta=0: kappa = sqrt(E - 1) = 1
        let p = free_cos_problem(2.0);
        let k = complex_momentum(&p, Complex64::new(0.0, 0.0), BranchSpec::MAIN).unwrap();
        assert!((k.value - Complex64::new(1.0, 0.0)).norm() < 1e-9, "kappa = {}", k.value);
    }

    #[test]
    fn free_momentum_below_spectrum() {
        // V=0, W=cos, E=0.5, zeta=0: kappa = i sqrt(0.5)
        let p = free_cos_problem(0.5);
        let k = complex_momentum(&p, Complex64::new(0.0, 0.0), BranchSpec::MAIN).unwrap();
        let want = Complex64::new(0.0, 0.5f64.sqrt());
        assert!((k.value - want).norm() < 1e-9, "kappa = {}", k.value);
    }

    #[test]
    fn composition_identity_on_real_grid() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let w = SlowPotential::cosine(1.0, 1.0);
        let p = AdiabaticProblem::new(v, w, 8.0, 0.3).unwrap();
        for i in 0..50 {
            let z = std::f64::consts::TAU * i as f64 / 50.0;
            let k = complex_momentum(&p, Complex64::new(z, 0.0), BranchSpec::MAIN).unwrap();
            let direct = main_branch_real(
                &p.potential,
                &p.bands,
                p.energy - p.slow.eval_real(z),
            )
            .unwrap();
            assert!((k.value - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn complex_point_satisfies_branch_equation() {
        let p = free_cos_problem(2.0);
        for &(re, im) in &[(1.0, 0.4), (3.0, -0.3), (5.5, 0.7)] {
            let z = Complex64::new(re, im);
            let k = complex_momentum(&p, z, BranchSpec::MAIN).unwrap();
            assert!(
                branch_residual(&p, z, k.value) < 1e-8,
                "residual at {z}: {}",
                branch_residual(&p, z, k.value)
            );
        }
    }

    #[test]
    fn near_branch_point_flag() {
        // E=0.5, W=cos: real branch points at +-pi/3 (cos z = 0.5)
        let p = free_cos_problem(0.5);
        let close = Complex64::new(std::f64::consts::PI / 3.0 + 5e-7, 0.0);
        let k = complex_momentum(&p, close, BranchSpec::MAIN).unwrap();
        assert!(k.near_branch_point);
    }

    #[test]
    fn requested_branch_transform() {
        let p = free_cos_problem(2.0);
        let z = Complex64::new(0.7, 0.2);
        let main = complex_momentum(&p, z, BranchSpec::MAIN).unwrap().value;
        let other = complex_momentum(&p, z, BranchSpec { sign: -1, sheet: 2 })
            .unwrap()
            .value;
        let tau = std::f64::consts::TAU;
        assert!((other - (-main + Complex64::new(2.0 * tau, 0.0))).norm() < 1e-12);
    }
}
