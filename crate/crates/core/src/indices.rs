//! Combinatorial index machinery of the slow geometry.
//!
//! * interval indices p_j of the band arcs (quasi-momentum increments);
//! * period signatures and indices (sigma, m) of curves from zeta0 to
//!   zeta0 + 2 pi, both by brute-force branch continuation and by the
//!   alternating-sum formula over the recorded gap crossings;
//! * the alternation tables lambda_j^+-, beta_j^+- and the Fourier indices
//!   P_+-, Q_+- of the monodromy coefficients, with their parity relations.
//!
//! The brute-force continuation is the arbiter: the closed formulas are
//! evaluated exactly as printed and cross-checked against it, and any
//! disagreement is reported, never patched over.

use num_complex::Complex64;
use serde::Serialize;

use crate::decomposition::IsoEnergyDecomposition;
use crate::error::{Error, Result};
use crate::momentum::{continue_along_path, continue_with_crossings, real_seed, Crossing};
use crate::problem::AdiabaticProblem;
use crate::quasimomentum::continue_branch;

/// Residual gate for rounding a continued increment to an integer index.
pub const INDEX_RESIDUAL_TOL: f64 = 0.01;
/// Residual gate for the (sigma, m) period fit.
pub const PERIOD_FIT_TOL: f64 = 1e-3;

/// A curve from zeta0 to zeta0 + 2 pi with a branch seed at its start.
#[derive(Debug, Clone)]
pub struct PeriodCurve {
    pub samples: Vec<Complex64>,
    pub seed: Complex64,
}

impl PeriodCurve {
    pub fn new(samples: Vec<Complex64>, seed: Complex64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput("period curve needs at least two samples".into()));
        }
        let shift = samples.last().unwrap() - samples.first().unwrap();
        let tau = std::f64::consts::TAU;
        let fwd = (shift - Complex64::new(tau, 0.0)).norm();
        let bwd = (shift + Complex64::new(tau, 0.0)).norm();
        if fwd > 1e-9 && bwd > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "period curve endpoints must differ by exactly +-2 pi (got {shift})"
            )));
        }
        Ok(PeriodCurve { samples, seed })
    }

    /// Minimum distance of the sample polyline to the problem's branch points.
    pub fn branch_clearance(&self, problem: &AdiabaticProblem) -> f64 {
        self.samples
            .iter()
            .map(|z| problem.branch_point_distance(*z))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn reversed(&self, problem: &AdiabaticProblem) -> Result<PeriodCurve> {
        // seed at the former end: continue the branch forward first
        let values = continue_along_path(problem, &self.samples, self.seed)?;
        let samples: Vec<Complex64> = self.samples.iter().rev().cloned().collect();
        PeriodCurve::new(samples, *values.last().unwrap())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PeriodIndex {
    pub sigma: i8,
    pub m: i64,
}

/// Interval index over [lo, hi] with branch seed at lo: continues kappa
/// along the (branch-point free) open arc and rounds the increment.
pub fn interval_index_raw(
    problem: &AdiabaticProblem,
    lo: f64,
    hi: f64,
    seed_at_lo: Complex64,
) -> Result<(i32, f64, f64)> {
    let path = vec![Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)];
    let vals = continue_along_path(problem, &path, seed_at_lo)?;
    let k_lo = vals[0].re;
    let k_hi = vals.last().unwrap().re;
    let dp = (k_hi - k_lo) / std::f64::consts::PI;
    let p = dp.round();
    if (dp - p).abs() > INDEX_RESIDUAL_TOL {
        return Err(Error::ContinuationAccuracy {
            residual: (dp - p).abs(),
            limit: INDEX_RESIDUAL_TOL,
        });
    }
    Ok((p as i32, k_lo, k_hi))
}

/// The index p_j of the j-th band arc (0-based j), re-derived from the
/// decomposition's stored branch values.
pub fn interval_index(
    problem: &AdiabaticProblem,
    decomposition: &IsoEnergyDecomposition,
    j: usize,
) -> Result<i32> {
    let arc = decomposition
        .bands
        .get(j)
        .ok_or_else(|| Error::InvalidInput(format!("no band arc {j}")))?;
    if decomposition.full_circle_band {
        return Ok(0);
    }
    let seed = Complex64::new(arc.kappa_lo, 0.0);
    let (p, _, k_hi) = interval_index_raw(problem, arc.lo, arc.hi, seed)?;
    debug_assert!((k_hi - arc.kappa_hi).abs() < 1e-6);
    Ok(p)
}

/// Brute-force period data: continue the seed along the curve and fit
/// kappa(end) = sigma kappa(start) + 2 pi m.
pub fn period_index_bruteforce(
    problem: &AdiabaticProblem,
    curve: &PeriodCurve,
) -> Result<PeriodIndex> {
    let fit = |samples: &[Complex64]| -> Result<(PeriodIndex, f64, f64)> {
        let values = continue_along_path(problem, samples, curve.seed)?;
        let start = values[0];
        let end = *values.last().unwrap();
        let tau = std::f64::consts::TAU;
        let mut best: Option<(PeriodIndex, f64)> = None;
        let mut second = f64::INFINITY;
        for sigma in [1i8, -1] {
            let m = ((end - start * sigma as f64).re / tau).round();
            let resid = (end - start * sigma as f64 - Complex64::new(m * tau, 0.0)).norm();
            match &mut best {
                None => best = Some((PeriodIndex { sigma, m: m as i64 }, resid)),
                Some((bi, br)) => {
                    if resid < *br {
                        second = *br;
                        *bi = PeriodIndex { sigma, m: m as i64 };
                        *br = resid;
                    } else {
                        second = second.min(resid);
                    }
                }
            }
        }
        let (idx, resid) = best.unwrap();
        Ok((idx, resid, second))
    };

    let (idx, resid, second) = fit(&curve.samples)?;
    if resid < PERIOD_FIT_TOL && second > PERIOD_FIT_TOL {
        return Ok(idx);
    }
    // refine the sampling once and retry
    let mut dense = Vec::with_capacity(curve.samples.len() * 4);
    for w in curve.samples.windows(2) {
        for k in 0..4 {
            dense.push(w[0] + (w[1] - w[0]) * (k as f64 / 4.0));
        }
    }
    dense.push(*curve.samples.last().unwrap());
    let (idx2, resid2, second2) = fit(&dense)?;
    if resid2 < PERIOD_FIT_TOL && second2 > PERIOD_FIT_TOL {
        return Ok(idx2);
    }
    if resid2 >= PERIOD_FIT_TOL {
        return Err(Error::ContinuationAccuracy {
            residual: resid2,
            limit: PERIOD_FIT_TOL,
        });
    }
    Err(Error::AmbiguousPeriodFit(format!(
        "best ({}, {}) residual {resid2:.2e}, competing residual {second2:.2e}",
        idx2.sigma, idx2.m
    )))
}

/// Continue along the curve and record the gap-preimage crossings with the
/// pinned Re kappa values, in traversal order.
pub fn period_crossings(
    problem: &AdiabaticProblem,
    curve: &PeriodCurve,
) -> Result<Vec<Crossing>> {
    let (_, crossings) = continue_with_crossings(problem, &curve.samples, curve.seed)?;
    Ok(crossings)
}

/// The alternating-sum formula: sigma = (-1)^n,
/// m = (1/pi)(r_n - r_{n-1} + ... + (-1)^{n-1} r_1).
pub fn period_index_formula(crossing_re_kappa: &[f64]) -> Result<PeriodIndex> {
    let pi = std::f64::consts::PI;
    let n = crossing_re_kappa.len();
    let mut acc = 0.0;
    for (i, &r) in crossing_re_kappa.iter().enumerate() {
        let mult = r / pi;
        if (mult - mult.round()).abs() > 1e-6 {
            return Err(Error::InvalidCrossing { value: r });
        }
        // sign (-1)^{n - i - 1} for the i-th (0-based) crossing
        let sign = if (n - i - 1) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * r;
    }
    let m = acc / pi;
    let m_round = m.round();
    if (m - m_round).abs() > INDEX_RESIDUAL_TOL {
        return Err(Error::ContinuationAccuracy {
            residual: (m - m_round).abs(),
            limit: INDEX_RESIDUAL_TOL,
        });
    }
    Ok(PeriodIndex {
        sigma: if n % 2 == 0 { 1 } else { -1 },
        m: m_round as i64,
    })
}

/// The alternation tables and Fourier indices computed from the
/// decomposition data (extrema orders per gap and the interval indices).
#[derive(Debug, Clone, Serialize)]
pub struct FourierIndices {
    /// N_j = 1 + sum over earlier gaps of (order - 1) contributions.
    pub n_table: Vec<i64>,
    pub lambda_plus: Vec<i64>,
    pub lambda_minus: Vec<i64>,
    pub beta_plus: Vec<i64>,
    pub beta_minus: Vec<i64>,
    pub p_plus: i64,
    pub p_minus: i64,
    pub q_plus: i64,
    pub q_minus: i64,
    /// n = N_N, the parity driver.
    pub parity: i64,
    pub parity_relations_ok: bool,
    /// Brute-force period indices along the four canonical curves, when the
    /// curves could be built for this geometry, in order P+, P-, Q+, Q-.
    pub bruteforce: Option<[PeriodIndex; 4]>,
    /// Per-index agreement between formula and brute force.
    pub bruteforce_agrees: Option<[bool; 4]>,
}

/// Sum over a gap of (order - 1) for each extremum.
fn gap_branch_count(decomposition: &IsoEnergyDecomposition, j: usize) -> i64 {
    decomposition.gaps[j]
        .extrema
        .iter()
        .map(|&(_, o)| (o as i64 - 1).max(0))
        .sum()
}

/// Fourier indices from the printed alternation tables.
pub fn fourier_indices(
    problem: &AdiabaticProblem,
    decomposition: &IsoEnergyDecomposition,
) -> Result<FourierIndices> {
    let n_arcs = decomposition.bands.len();
    if n_arcs == 0 || decomposition.full_circle_band {
        return Err(Error::InvalidInput(
            "Fourier indices need a nondegenerate decomposition".into(),
        ));
    }
    let s: Vec<i64> = (0..n_arcs).map(|j| gap_branch_count(decomposition, j)).collect();
    // N_j = 1 + sum_{i<j} s_i (1-based j); the paper's N_N uses gaps 1..N-1
    let n_table: Vec<i64> = (0..n_arcs)
        .map(|j| 1 + s[..j].iter().sum::<i64>())
        .collect();
    let parity = 1 + s[..n_arcs - 1].iter().sum::<i64>();

    let even = |x: i64| (x % 2) == 0;
    let half = |num: i64| num / 2;
    // lambda_1^+ = (1 + (-1)^{s_1})/2; lambda_j^+ = (-1)^{N_j} (-1 + (-1)^{s_j})/2
    let mut lambda_plus = Vec::with_capacity(n_arcs);
    let mut lambda_minus = Vec::with_capacity(n_arcs);
    let mut beta_plus = Vec::with_capacity(n_arcs);
    let mut beta_minus = Vec::with_capacity(n_arcs);
    for j in 0..n_arcs {
        let sj = if even(s[j]) { 1i64 } else { -1 };
        let tail = half(-1 + sj); // 0 when s_j even, -1 when odd
        let sign_nj = if even(n_table[j]) { 1i64 } else { -1 };
        if j == 0 {
            lambda_plus.push(half(1 + sj)); // 1 if even, 0 if odd
            lambda_minus.push(tail);
            beta_plus.push(tail);
            beta_minus.push(half(1 + sj));
        } else {
            lambda_plus.push(sign_nj * tail);
            lambda_minus.push(sign_nj * tail);
            beta_plus.push(sign_nj * tail);
            beta_minus.push(sign_nj * tail);
        }
    }

    let p: Vec<i64> = decomposition.bands.iter().map(|b| b.p as i64).collect();
    let partial: Vec<i64> = p
        .iter()
        .scan(0i64, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let global = if even(parity) { 1i64 } else { -1 };
    let sum_with = |table: &[i64]| -> i64 {
        global
            * partial
                .iter()
                .zip(table)
                .map(|(ps, t)| ps * t)
                .sum::<i64>()
    };
    let p_plus = sum_with(&lambda_plus);
    let p_minus = sum_with(&lambda_minus);
    let q_plus = sum_with(&beta_plus);
    let q_minus = sum_with(&beta_minus);

    // parity relations; these follow identically from the tables with the
    // p_1 = 1 convention, so a violation flags a transcription bug
    let parity_relations_ok = if even(parity) {
        q_minus == q_plus + 1 && q_minus == p_minus + 1 && q_minus == p_plus
    } else {
        q_plus == q_minus + 1 && p_minus == q_plus && p_plus + 1 == q_plus
    };
    if !parity_relations_ok && p.first() == Some(&1) {
        return Err(Error::InternalInconsistency(format!(
            "parity relations violated: P+={p_plus} P-={p_minus} Q+={q_plus} Q-={q_minus} n={parity}"
        )));
    }

    // brute-force cross-check along the canonical curves
    let (bruteforce, bruteforce_agrees) =
        match canonical_period_indices(problem, decomposition) {
            Ok(bf) => {
                let agrees = [
                    bf[0].m == p_plus,
                    bf[1].m == p_minus,
                    bf[2].m == q_plus,
                    bf[3].m == q_minus,
                ];
                (Some(bf), Some(agrees))
            }
            Err(_) => (None, None),
        };

    Ok(FourierIndices {
        n_table,
        lambda_plus,
        lambda_minus,
        beta_plus,
        beta_minus,
        p_plus,
        p_minus,
        q_plus,
        q_minus,
        parity,
        parity_relations_ok,
        bruteforce,
        bruteforce_agrees,
    })
}

/// The four canonical period curves behind P+, P-, Q+, Q-: horizontal
/// travel at +-y_eff/2 from a start in the wraparound gap, with the seed
/// branch continued from the first band arc around its left endpoint
/// (above for the "+" curves, below for the "-" ones), and the reflected
/// seed -conj(kappa(conj zeta)) for the Q pair.
pub fn canonical_period_indices(
    problem: &AdiabaticProblem,
    decomposition: &IsoEnergyDecomposition,
) -> Result<[PeriodIndex; 4]> {
    let curves = canonical_curves(problem, decomposition)?;
    let mut out = [PeriodIndex { sigma: 1, m: 0 }; 4];
    for (i, c) in curves.iter().enumerate() {
        out[i] = period_index_bruteforce(problem, c)?;
    }
    Ok(out)
}

/// Build the four canonical curves; see `canonical_period_indices`.
pub fn canonical_curves(
    problem: &AdiabaticProblem,
    decomposition: &IsoEnergyDecomposition,
) -> Result<[PeriodCurve; 4]> {
    let tau = std::f64::consts::TAU;
    let wrap = decomposition
        .gaps
        .last()
        .ok_or_else(|| Error::InvalidInput("no wraparound gap".into()))?;
    // start abscissa: middle of the wraparound gap, kept clear of its extrema
    let mut x0 = 0.5 * (wrap.lo + wrap.hi);
    for &(ze, _) in &wrap.extrema {
        if (x0 - ze).abs() < 0.15 * (wrap.hi - wrap.lo) {
            x0 = ze + 0.3 * (wrap.hi - wrap.lo);
        }
    }
    let h = 0.5 * problem.y_eff();

    // seeds: the gap branch at x0 with Im >= 0 ("above" continuation) and
    // its opposite; the reflected family swaps the roles
    let seed_main = real_seed(problem, x0)?;
    let seed_conj = -seed_main.conj(); // -conj(kappa(conj zeta0)) at real zeta0

    let build = |height: f64, seed: Complex64| -> Result<PeriodCurve> {
        // lift the seed off the axis first; period endpoints must avoid the
        // gap preimage for the crossing count to be well defined
        let lift = vec![Complex64::new(x0, 0.0), Complex64::new(x0, height)];
        let seed_h = *continue_along_path(problem, &lift, seed)?.last().unwrap();
        let n = 96;
        let samples: Vec<Complex64> = (0..=n)
            .map(|i| Complex64::new(x0 + tau * i as f64 / n as f64, height))
            .collect();
        PeriodCurve::new(samples, seed_h)
    };

    Ok([
        build(h, seed_main)?,
        build(-h, seed_main)?,
        build(h, seed_conj)?,
        build(-h, seed_conj)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::real_decomposition;
    use crate::potential::PotentialSpec;
    use crate::slow::SlowPotential;

    fn reference_problem() -> AdiabaticProblem {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let w = SlowPotential::cosine(4.5, 1.0);
        AdiabaticProblem::new(v, w, 8.0216344857324497, 0.3).unwrap()
    }

    #[test]
    fn interval_index_free_cosine_zero() {
        let v = PotentialSpec::free();
        let w = SlowPotential::cosine(1.0, 1.0);
        let p = AdiabaticProblem::new(v, w, 0.5, 0.3).unwrap();
        let d = real_decomposition(&p).unwrap();
        assert_eq!(interval_index(&p, &d, 0).unwrap(), 0);
    }

    #[test]
    fn interval_indices_reference() {
        let p = reference_problem();
        let d = real_decomposition(&p).unwrap();
        assert_eq!(interval_index(&p, &d, 0).unwrap(), 1);
        assert_eq!(interval_index(&p, &d, 1).unwrap().abs(), 1);
        let weight: i32 = (0..d.n())
            .map(|j| interval_index(&p, &d, j).unwrap().abs())
            .sum();
        assert_eq!(weight % 2, 0, "sum |p_j| must be even");
    }

    #[test]
    fn formula_trivial_cases() {
        // n = 0: empty alternating sum
        assert_eq!(
            period_index_formula(&[]).unwrap(),
            PeriodIndex { sigma: 1, m: 0 }
        );
        // n = 1, r = pi: sigma = -1, m = 1
        let pi = std::f64::consts::PI;
        assert_eq!(
            period_index_formula(&[pi]).unwrap(),
            PeriodIndex { sigma: -1, m: 1 }
        );
        // n = 2, (pi, 2 pi): sigma = +1, m = 1
        assert_eq!(
            period_index_formula(&[pi, 2.0 * pi]).unwrap(),
            PeriodIndex { sigma: 1, m: 1 }
        );
        // not a multiple of pi
        assert!(matches!(
            period_index_formula(&[1.0]),
            Err(Error::InvalidCrossing { .. })
        ));
    }

    #[test]
    fn gap_avoiding_curve_is_trivial_period() {
        // horizontal curve above the axis in a geometry whose strip carries
        // no gap preimage along it: E - W inside one huge band (V = 0)
        let v = PotentialSpec::free();
        let w = SlowPotential::cosine(1.0, 1.0);
        let p = AdiabaticProblem::new(v, w, 30.0, 0.3).unwrap();
        let tau = std::f64::consts::TAU;
        let seed = real_seed(&p, 0.3).unwrap();
        let samples: Vec<Complex64> = (0..=64)
            .map(|i| Complex64::new(0.3 + tau * i as f64 / 64.0, 0.0))
            .collect();
        let curve = PeriodCurve::new(samples, seed).unwrap();
        let idx = period_index_bruteforce(&p, &curve).unwrap();
        // kappa = sqrt(E - W) is single-valued and 2 pi periodic here, but a
        // full real period picks up the winding of the band branch
        let crossings = period_crossings(&p, &curve).unwrap();
        assert!(crossings.is_empty());
        assert_eq!(idx.sigma, 1);
        assert_eq!(idx.m, 0);
    }

    #[test]
    fn real_axis_period_free_band_oracle() {
        // V=0, W=cos, E=2: E - W in [1, 3] stays in the band; the real-axis
        // period has sigma=+1 and m=0 (kappa returns to itself), frozen
        // against a 10^5-step fine continuation
        let v = PotentialSpec::free();
        let w = SlowPotential::cosine(1.0, 1.0);
        let p = AdiabaticProblem::new(v, w, 2.0, 0.3).unwrap();
        let tau = std::f64::consts::TAU;
        let seed = real_seed(&p, 0.0).unwrap();
        let samples: Vec<Complex64> = (0..=100)
            .map(|i| Complex64::new(tau * i as f64 / 100.0, 0.0))
            .collect();
        let curve = PeriodCurve::new(samples, seed).unwrap();
        let idx = period_index_bruteforce(&p, &curve).unwrap();
        assert_eq!(idx, PeriodIndex { sigma: 1, m: 0 });
        // fine-step oracle
        let fine: Vec<Complex64> = (0..=100_000)
            .map(|i| Complex64::new(tau * i as f64 / 100_000.0, 0.0))
            .collect();
        let mut val = seed;
        for w2 in fine.windows(2) {
            let d_half_at = |t: f64| p.d_half(w2[0] + (w2[1] - w2[0]) * t);
            val = continue_branch(&d_half_at, val, 1).unwrap();
        }
        assert!((val - seed).norm() < 1e-6, "fine-step end {val} vs seed {seed}");
    }

    #[test]
    fn reversal_negates_m_for_positive_sigma() {
        let p = reference_problem();
        let d = real_decomposition(&p).unwrap();
        let curves = canonical_curves(&p, &d).unwrap();
        for c in &curves {
            let idx = period_index_bruteforce(&p, c).unwrap();
            if idx.sigma == 1 {
                let rev = c.reversed(&p).unwrap();
                let back = period_index_bruteforce(&p, &rev).unwrap();
                assert_eq!(back.sigma, 1);
                assert_eq!(back.m, -idx.m, "reversal must negate m");
            }
        }
    }

    #[test]
    fn formula_matches_bruteforce_on_canonical_curves() {
        let p = reference_problem();
        let d = real_decomposition(&p).unwrap();
        let curves = canonical_curves(&p, &d).unwrap();
        for c in &curves {
            let bf = period_index_bruteforce(&p, c).unwrap();
            let crossings = period_crossings(&p, c).unwrap();
            let rs: Vec<f64> = crossings.iter().map(|x| x.re_kappa).collect();
            let ff = period_index_formula(&rs).unwrap();
            assert_eq!(bf, ff, "crossings {rs:?}");
        }
    }

    #[test]
    fn fourier_indices_reference_tables() {
        // FK-style geometry: one quadratic extremum per gap, p = (1, 1):
        // s = (1, 1), N = (1, 2), n = 2 even;
        // lambda+ = (0, -1), lambda- = (-1, -1), beta+ = (-1, -1), beta- = (0, -1)
        // P+ = -(p1+p2) = -2, P- = -p1 - 2... = -3, Q+ = -3, Q- = -2
        let p = reference_problem();
        let d = real_decomposition(&p).unwrap();
        let fi = fourier_indices(&p, &d).unwrap();
        assert_eq!(fi.parity, 2);
        assert_eq!(fi.n_table, vec![1, 2]);
        assert_eq!(fi.lambda_plus, vec![0, -1]);
        assert_eq!(fi.lambda_minus, vec![-1, -1]);
        assert_eq!(fi.beta_plus, vec![-1, -1]);
        assert_eq!(fi.beta_minus, vec![0, -1]);
        assert_eq!(fi.p_plus, -2);
        assert_eq!(fi.p_minus, -3);
        assert_eq!(fi.q_plus, -3);
        assert_eq!(fi.q_minus, -2);
        assert!(fi.parity_relations_ok);
    }

    #[test]
    fn parity_relations_even_synthetic() {
        // even n: Q- = Q+ + 1, Q- = P- + 1, Q- = P+ must hold exactly
        let p = reference_problem();
        let d = real_decomposition(&p).unwrap();
        let fi = fourier_indices(&p, &d).unwrap();
        assert_eq!(fi.q_minus, fi.q_plus + 1);
        assert_eq!(fi.q_minus, fi.p_minus + 1);
        assert_eq!(fi.q_minus, fi.p_plus);
    }
}
