//! Decomposition of the real line (one 2 pi period) under zeta -> E - W(zeta)
//! into band arcs B_j = [phi_j^-, phi_j^+] and gap arcs G_j, with the
//! per-arc quasi-momentum indices p_j, the extrema catalog of each gap, and
//! the H4 geometric flags.

use num_complex::Complex64;
use serde::Serialize;

use crate::bands::Locus;
use crate::error::{Error, Result};
use crate::momentum::{continue_along_path, real_seed};
use crate::problem::AdiabaticProblem;
use crate::roots::bisect;

/// Transversality floor for |W'| at a crossing of a band edge.
const CROSSING_TRANSVERSAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct BandArc {
    /// phi_j^- and phi_j^+.
    pub lo: f64,
    pub hi: f64,
    /// Index of the continued branch across the arc: kappa(hi) - kappa(lo) = p pi.
    pub p: i32,
    /// Which band of the periodic operator the arc maps into (1-based).
    pub band_n: usize,
    /// Branch values at the arc ends for the canonical continuation.
    pub kappa_lo: f64,
    pub kappa_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapArc {
    /// (phi_j^+, phi_{j+1}^-); for the wraparound gap hi = phi_1^- + 2 pi.
    pub lo: f64,
    pub hi: f64,
    /// Extrema of W inside the arc: (zeta, order); order 2 = quadratic.
    pub extrema: Vec<(f64, usize)>,
    /// Pinned Re kappa of the canonical branch on this gap (multiple of pi).
    pub re_kappa: f64,
    /// H0 gap number; None marks the region below the spectrum.
    pub gap_n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct H4Report {
    pub h4a: bool,
    pub h4b: bool,
    pub h4c: bool,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoEnergyDecomposition {
    pub energy: f64,
    /// Band arcs B_1..B_N in increasing phi order, B_1 chosen so p_1 = 1
    /// whenever some p_j is nonzero.
    pub bands: Vec<BandArc>,
    /// Gap arcs; gaps[j] follows bands[j], the last one wraps around.
    pub gaps: Vec<GapArc>,
    pub h4: H4Report,
    /// E - W stays inside a single band: one degenerate full-circle arc.
    pub full_circle_band: bool,
}

impl IsoEnergyDecomposition {
    pub fn n(&self) -> usize {
        self.bands.len()
    }

    /// Sum of |p_j|, even by the index parity property.
    pub fn index_weight(&self) -> i32 {
        self.bands.iter().map(|b| b.p.abs()).sum()
    }
}

/// Real crossing points of E - W with one band-edge level.
fn edge_crossings(problem: &AdiabaticProblem, edge_energy: f64) -> Result<Vec<f64>> {
    let tau = std::f64::consts::TAU;
    let target = problem.energy - edge_energy; // W(zeta) = target
    let w = &problem.slow;
    let scale = 1.0 + w.strip_bound(0.0);

    // tangency guard: an extremum of W sitting on the level is a degenerate
    // (isolated-point or tangential) configuration
    for (ze, _) in w.real_extrema()? {
        if (w.eval_real(ze) - target).abs() < 1e-9 * scale {
            return Err(Error::DegenerateGeometry {
                zeta: ze,
                detail: format!("W extremum touches edge level E_l = {edge_energy}"),
            });
        }
    }

    let n = 4096;
    let g = |z: f64| w.eval_real(z) - target;
    let mut roots = Vec::new();
    let mut prev = g(0.0);
    for i in 1..=n {
        let z = tau * i as f64 / n as f64;
        let cur = g(z);
        if prev == 0.0 {
            roots.push(tau * (i - 1) as f64 / n as f64);
        } else if (prev < 0.0) != (cur < 0.0) {
            let a = tau * (i - 1) as f64 / n as f64;
            roots.push(bisect(g, a, z, 1e-12));
        }
        prev = cur;
    }
    for &r in &roots {
        if w.derivative_real(r, 1).abs() < CROSSING_TRANSVERSAL_TOL * scale {
            return Err(Error::DegenerateGeometry {
                zeta: r,
                detail: format!("tangential crossing of edge level E_l = {edge_energy}"),
            });
        }
    }
    Ok(roots)
}

/// Real-axis polyline from `start` to `end` with upper semicircular detours
/// around the listed branch-point abscissae. Nodes at phi +- r become exact
/// waypoints so callers can read branch values there.
pub fn detoured_path(start: f64, end: f64, branch_res: &[f64], radius_cap: f64) -> Vec<Complex64> {
    let mut pts: Vec<f64> = branch_res
        .iter()
        .flat_map(|&p| {
            let mut images = Vec::new();
            let mut q = p;
            while q > start + 1e-12 {
                q -= std::f64::consts::TAU;
            }
            while q < end - 1e-12 {
                if q > start + 1e-12 {
                    images.push(q);
                }
                q += std::f64::consts::TAU;
            }
            images
        })
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-10);

    let mut radius = radius_cap;
    for w in pts.windows(2) {
        radius = radius.min(0.3 * (w[1] - w[0]));
    }
    if let Some(&first) = pts.first() {
        radius = radius.min(0.45 * (first - start));
    }
    if let Some(&last) = pts.last() {
        radius = radius.min(0.45 * (end - last));
    }
    let radius = radius.max(1e-4);

    let mut path = vec![Complex64::new(start, 0.0)];
    for &p in &pts {
        path.push(Complex64::new(p - radius, 0.0));
        for k in 1..7 {
            let th = std::f64::consts::PI * (1.0 - k as f64 / 7.0);
            path.push(Complex64::new(p + radius * th.cos(), radius * th.sin()));
        }
        path.push(Complex64::new(p + radius, 0.0));
    }
    path.push(Complex64::new(end, 0.0));
    path
}

/// The decomposition for the problem's energy.
pub fn real_decomposition(problem: &AdiabaticProblem) -> Result<IsoEnergyDecomposition> {
    let tau = std::f64::consts::TAU;
    let (sweep_lo, sweep_hi) = problem.swept_interval();

    // crossings with every open-structure edge reachable by the sweep
    let mut crossings: Vec<f64> = Vec::new();
    for edge in &problem.bands.edges {
        if edge.double {
            continue; // closed-gap edges are regular points of the momentum
        }
        if edge.energy < sweep_lo - 1e-12 || edge.energy > sweep_hi + 1e-12 {
            continue;
        }
        crossings.extend(edge_crossings(problem, edge.energy)?);
    }
    crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
    crossings.dedup_by(|a, b| (*a - *b).abs() < 1e-10);

    if crossings.is_empty() {
        let locus = problem.bands.classify(problem.energy - problem.slow.eval_real(0.0));
        return match locus {
            Locus::InBand(i) => {
                let mut h4 = H4Report {
                    h4a: true,
                    h4b: false,
                    h4c: true,
                    witnesses: vec!["no-gap geometry: E - W stays inside one band".into()],
                };
                h4.h4c = problem.bands.bands[i].isolated.unwrap_or(false);
                Ok(IsoEnergyDecomposition {
                    energy: problem.energy,
                    bands: vec![BandArc {
                        lo: 0.0,
                        hi: tau,
                        p: 0,
                        band_n: problem.bands.bands[i].n,
                        kappa_lo: 0.0,
                        kappa_hi: 0.0,
                    }],
                    gaps: vec![],
                    h4,
                    full_circle_band: true,
                })
            }
            _ => Ok(IsoEnergyDecomposition {
                energy: problem.energy,
                bands: vec![],
                gaps: vec![],
                h4: H4Report {
                    h4a: true,
                    h4b: false,
                    h4c: true,
                    witnesses: vec!["E - W never meets the spectrum".into()],
                },
                full_circle_band: false,
            }),
        };
    }

    // classify arcs between consecutive crossings (cyclically)
    #[derive(Debug)]
    struct Arc {
        lo: f64,
        hi: f64,
        locus: Locus,
    }
    let mut arcs = Vec::with_capacity(crossings.len());
    for i in 0..crossings.len() {
        let lo = crossings[i];
        let hi = if i + 1 < crossings.len() {
            crossings[i + 1]
        } else {
            crossings[0] + tau
        };
        let mid = 0.5 * (lo + hi);
        let e_mid = problem.energy - problem.slow.eval_real(mid);
        let locus = problem.bands.classify(e_mid);
        match locus {
            Locus::InBand(_) | Locus::InGap(_) | Locus::BelowSpectrum => {}
            other => {
                return Err(Error::InternalInconsistency(format!(
                    "arc midpoint {mid} classified {other:?}; band window too small"
                )))
            }
        }
        arcs.push(Arc { lo, hi, locus });
    }
    let band_positions: Vec<usize> = arcs
        .iter()
        .enumerate()
        .filter(|(_, a)| matches!(a.locus, Locus::InBand(_)))
        .map(|(i, _)| i)
        .collect();
    if band_positions.is_empty() {
        return Err(Error::InternalInconsistency(
            "crossings found but no band arc classified".into(),
        ));
    }
    for (i, a) in arcs.iter().enumerate() {
        let next = &arcs[(i + 1) % arcs.len()];
        let both_band =
            matches!(a.locus, Locus::InBand(_)) && matches!(next.locus, Locus::InBand(_));
        let both_gap =
            !matches!(a.locus, Locus::InBand(_)) && !matches!(next.locus, Locus::InBand(_));
        if both_band || both_gap {
            return Err(Error::InternalInconsistency(
                "band/gap arcs do not alternate".into(),
            ));
        }
    }

    // provisional continuation around the full circle to get p per band arc
    let compute_pass = |start_arc: usize| -> Result<(Vec<(i32, f64, f64)>, Vec<f64>)> {
        // start at the midpoint of the gap arc preceding the chosen band arc
        let prev_gap = &arcs[(start_arc + arcs.len() - 1) % arcs.len()];
        let x_start = 0.5 * (prev_gap.lo + prev_gap.hi);
        let seed = real_seed(problem, x_start)?;
        let radius_cap = 0.05f64;
        let mut p_data: Vec<(i32, f64, f64)> = Vec::new();
        let mut gap_ladder: Vec<f64> = Vec::new();
        let mut current_seed = seed;
        let mut cursor = x_start;
        // walk band arcs in cyclic order starting at start_arc
        let mut order: Vec<usize> = Vec::new();
        let mut i = start_arc;
        loop {
            order.push(i);
            i = (i + 2) % arcs.len();
            if i == start_arc {
                break;
            }
        }
        for &ai in &order {
            let arc = &arcs[ai];
            let (mut lo, mut hi) = (arc.lo, arc.hi);
            while lo < cursor - 1e-9 {
                lo += tau;
                hi += tau;
            }
            // continue along the real axis from cursor to just outside the
            // arc, detouring over the two branch points at lo and hi
            let r = radius_cap
                .min(0.3 * (hi - lo))
                .min(0.45 * (lo - cursor).abs().max(1e-3));
            let path_in = detoured_path(cursor, lo + r, &[lo], r);
            let vals = continue_along_path(problem, &path_in, current_seed)?;
            let at_inside = *vals.last().unwrap();
            // endpoint values: pull back from lo + r to lo, push to hi - r, then hi
            let path_lo = vec![Complex64::new(lo + r, 0.0), Complex64::new(lo, 0.0)];
            let k_lo = *continue_along_path(problem, &path_lo, at_inside)?.last().unwrap();
            let path_across = vec![Complex64::new(lo + r, 0.0), Complex64::new(hi - r, 0.0)];
            let at_hi_inside = *continue_along_path(problem, &path_across, at_inside)?
                .last()
                .unwrap();
            let path_hi = vec![Complex64::new(hi - r, 0.0), Complex64::new(hi, 0.0)];
            let k_hi = *continue_along_path(problem, &path_hi, at_hi_inside)?.last().unwrap();

            let dp = (k_hi.re - k_lo.re) / std::f64::consts::PI;
            let p = dp.round();
            if (dp - p).abs() > 0.01 {
                return Err(Error::ContinuationAccuracy {
                    residual: (dp - p).abs(),
                    limit: 0.01,
                });
            }
            p_data.push((p as i32, k_lo.re, k_hi.re));

            // exit the arc over hi and record the gap plateau
            let next_gap = &arcs[(ai + 1) % arcs.len()];
            let mut g_hi = next_gap.hi;
            let mut g_lo = next_gap.lo;
            while g_lo < hi - r - 1e-9 {
                g_lo += tau;
                g_hi += tau;
            }
            let gap_mid = 0.5 * (g_lo + g_hi);
            let path_out = detoured_path(hi - r, gap_mid, &[hi], r);
            current_seed = *continue_along_path(problem, &path_out, at_hi_inside)?
                .last()
                .unwrap();
            gap_ladder.push(current_seed.re);
            cursor = gap_mid;
        }
        Ok((p_data, gap_ladder))
    };

    // first pass from band arc 0 to find which arc should be B_1
    let (p_prov, ladder_prov) = compute_pass(band_positions[0])?;
    let first_nonzero = p_prov.iter().position(|&(p, _, _)| p != 0);
    let b1_arc = match first_nonzero {
        Some(k) => band_positions[k % band_positions.len()],
        None => band_positions[0],
    };
    // final pass with the canonical start
    let (mut p_data, mut ladder) = if b1_arc == band_positions[0] {
        (p_prov, ladder_prov)
    } else {
        compute_pass(b1_arc)?
    };

    // sign convention: p_1 = +1 when any index is nonzero
    if let Some(&(p1, _, _)) = p_data.first() {
        if p1 < 0 {
            for entry in p_data.iter_mut() {
                entry.0 = -entry.0;
                entry.1 = -entry.1;
                entry.2 = -entry.2;
            }
            for r in ladder.iter_mut() {
                *r = -*r;
            }
        }
    }
    // ladder offset normalization: shift by 2 pi l so the wraparound gap
    // plateau lands in [0, 2 pi)
    if let Some(&last) = ladder.last() {
        let shift = (last / tau).floor() * tau;
        if shift != 0.0 {
            for entry in p_data.iter_mut() {
                entry.1 -= shift;
                entry.2 -= shift;
            }
            for r in ladder.iter_mut() {
                *r -= shift;
            }
        }
    }

    // assemble arcs in canonical order with unrolled angles
    let extrema = problem.slow.real_extrema()?;
    let mut bands_out: Vec<BandArc> = Vec::new();
    let mut gaps_out: Vec<GapArc> = Vec::new();
    let mut offset = 0.0;
    let mut prev_hi = f64::NEG_INFINITY;
    let mut idx = b1_arc;
    for j in 0..band_positions.len() {
        let arc = &arcs[idx];
        let (mut lo, mut hi) = (arc.lo + offset, arc.hi + offset);
        while lo < prev_hi - 1e-9 {
            offset += tau;
            lo += tau;
            hi += tau;
        }
        let band_n = match arc.locus {
            Locus::InBand(i) => problem.bands.bands[i].n,
            _ => unreachable!(),
        };
        let (p, klo, khi) = p_data[j];
        bands_out.push(BandArc {
            lo,
            hi,
            p,
            band_n,
            kappa_lo: klo,
            kappa_hi: khi,
        });
        prev_hi = hi;

        let gap_arc = &arcs[(idx + 1) % arcs.len()];
        let (mut glo, mut ghi) = (gap_arc.lo + offset, gap_arc.hi + offset);
        while glo < prev_hi - 1e-9 {
            offset += tau;
            glo += tau;
            ghi += tau;
        }
        let gap_n = {
            let mid = 0.5 * (gap_arc.lo + gap_arc.hi);
            let e_mid = problem.energy - problem.slow.eval_real(mid);
            match problem.bands.classify(e_mid) {
                Locus::InGap(i) => Some(problem.bands.gaps[i].n),
                Locus::BelowSpectrum => None,
                _ => unreachable!(),
            }
        };
        let in_gap_extrema: Vec<(f64, usize)> = extrema
            .iter()
            .flat_map(|&(z, o)| {
                [z, z + tau, z + 2.0 * tau]
                    .into_iter()
                    .filter(|zz| *zz > glo + 1e-10 && *zz < ghi - 1e-10)
                    .map(move |zz| (zz, o))
            })
            .collect();
        gaps_out.push(GapArc {
            lo: glo,
            hi: ghi,
            extrema: in_gap_extrema,
            re_kappa: ladder[j],
            gap_n,
        });
        prev_hi = ghi;
        idx = (idx + 2) % arcs.len();
    }

    // rebase so phi_1^- lies in [0, 2 pi)
    let base = bands_out[0].lo.rem_euclid(tau) - bands_out[0].lo;
    if base != 0.0 {
        for b in &mut bands_out {
            b.lo += base;
            b.hi += base;
        }
        for g in &mut gaps_out {
            g.lo += base;
            g.hi += base;
            for e in &mut g.extrema {
                e.0 += base;
            }
        }
    }

    // H4 flags
    let h4b = bands_out.iter().any(|b| b.p != 0);
    let mut witnesses = Vec::new();
    let mut h4c = true;
    for band in &problem.bands.bands {
        if band.hi < sweep_lo || band.lo > sweep_hi {
            continue;
        }
        match band.isolated {
            Some(true) => {}
            Some(false) => {
                h4c = false;
                witnesses.push(format!("band {} met by the sweep is not isolated", band.n));
            }
            None => {
                h4c = false;
                witnesses.push(format!(
                    "band {} isolation undetermined within the window",
                    band.n
                ));
            }
        }
    }
    if !h4b {
        witnesses.push("no band arc with nonzero index (no vertically unbounded component)".into());
    }

    let ordered = bands_out.windows(2).all(|w| w[0].hi < w[1].lo + 1e-12);
    if !ordered || bands_out.last().unwrap().hi - bands_out[0].lo >= tau {
        return Err(Error::InternalInconsistency(
            "decomposition arcs not strictly ordered within one period".into(),
        ));
    }

    Ok(IsoEnergyDecomposition {
        energy: problem.energy,
        bands: bands_out,
        gaps: gaps_out,
        h4: H4Report {
            h4a: true,
            h4b,
            h4c,
            witnesses,
        },
        full_circle_band: false,
    })
}

/// H4 report over a sampled energy interval J.
pub fn check_h4(
    potential: &crate::potential::PotentialSpec,
    slow: &crate::slow::SlowPotential,
    interval: (f64, f64),
    samples: usize,
    epsilon: f64,
) -> Vec<(f64, H4Report)> {
    let n = samples.max(1);
    (0..n)
        .map(|i| {
            let e = if n == 1 {
                0.5 * (interval.0 + interval.1)
            } else {
                interval.0 + (interval.1 - interval.0) * i as f64 / (n - 1) as f64
            };
            let report = AdiabaticProblem::new(potential.clone(), slow.clone(), e, epsilon)
                .and_then(|p| real_decomposition(&p).map(|d| d.h4));
            match report {
                Ok(r) => (e, r),
                Err(err) => (
                    e,
                    H4Report {
                        h4a: !matches!(err, Error::DegenerateGeometry { .. }),
                        h4b: false,
                        h4c: false,
                        witnesses: vec![format!("decomposition failed: {err}")],
                    },
                ),
            }
        })
        .collect()
}
