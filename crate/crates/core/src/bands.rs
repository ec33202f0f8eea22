//! Band structure of the periodic operator: roots of D(E) = +-2.
//!
//! Edges are bracketed by sign changes of D -+ 2 on a scan grid that is
//! uniform in sqrt(E) (edges cluster like n^2 pi^2, so this equidistributes
//! them), then refined by bisection. Closed or nearly closed gaps leave no
//! sign change; they are caught by refining local maxima of |D| - 2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::roots::{bisect, golden_min};
use crate::transfer::discriminant_real;

/// Bisection tolerance for edge locations.
pub const EDGE_TOL: f64 = 1e-10;
/// A gap whose refined |D|-2 maximum stays below this is reported closed.
pub const CLOSED_GAP_TOL: f64 = 1e-8;
/// Above CLOSED_GAP_TOL but below this, an unresolved pair gets a diagnostic.
const NEAR_DEGENERATE_TOL: f64 = 1e-5;
/// Scan density in sqrt-energy space (points per unit of sqrt(E)).
const SCAN_PER_SQRT_UNIT: f64 = 60.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeInfo {
    pub energy: f64,
    /// Which discriminant level the edge sits on: +1 for D=+2, -1 for D=-2.
    pub disc_target: i8,
    /// True when the edge is one of a coincident pair (closed gap).
    pub double: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    /// 1-based band number, absolute when the structure is anchored below E1.
    pub n: usize,
    /// Both flanking gaps open (below-spectrum counts as open). None when the
    /// flanking gap lies outside the window.
    pub isolated: Option<bool>,
    /// The band continues beyond the scan window on this side.
    pub clipped_lo: bool,
    pub clipped_hi: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    /// 1-based gap number (gap n sits above band n).
    pub n: usize,
    pub open: bool,
    /// The gap runs past the scan window; `hi` is the window edge, not a
    /// band edge.
    pub clipped: bool,
    /// Set when the scan saw a near-degenerate pair it could not resolve.
    pub diagnostic: Option<String>,
}

/// Where a real energy sits relative to the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Locus {
    BelowSpectrum,
    /// Index into `bands`.
    InBand(usize),
    /// Index into `gaps`.
    InGap(usize),
    /// Inside the window but in a clipped gap region of an unanchored scan.
    Unresolved,
    AboveWindow,
    BelowWindow,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandStructure {
    pub window: (f64, f64),
    /// True when the window provably starts below the whole spectrum, so
    /// band numbers are absolute.
    pub anchored: bool,
    pub edges: Vec<EdgeInfo>,
    pub bands: Vec<Band>,
    pub gaps: Vec<Gap>,
}

impl BandStructure {
    /// Classify a real energy. Edges resolve to the adjacent band (closed
    /// intervals), matching the convention that bands are closed sets.
    pub fn classify(&self, e: f64) -> Locus {
        if e < self.window.0 {
            return Locus::BelowWindow;
        }
        if e > self.window.1 {
            return Locus::AboveWindow;
        }
        for (i, b) in self.bands.iter().enumerate() {
            if e >= b.lo && e <= b.hi {
                return Locus::InBand(i);
            }
        }
        for (i, g) in self.gaps.iter().enumerate() {
            if e > g.lo && e < g.hi {
                return Locus::InGap(i);
            }
        }
        if self.anchored {
            if let Some(first) = self.bands.first() {
                if e < first.lo {
                    return Locus::BelowSpectrum;
                }
            } else {
                return Locus::BelowSpectrum;
            }
        }
        Locus::Unresolved
    }

    /// The band with absolute number `n` (anchored structures only).
    pub fn band_by_number(&self, n: usize) -> Option<&Band> {
        self.bands.iter().find(|b| b.n == n)
    }

    /// Highest energy up to which the structure is complete.
    pub fn coverage_hi(&self) -> f64 {
        self.window.1
    }
}

/// Find all band edges of the periodic operator inside `window`.
pub fn band_edges(pot: &PotentialSpec, window: (f64, f64)) -> Result<BandStructure> {
    pot.validate()?;
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad window [{lo}, {hi}]")));
    }
    let anchored = lo < pot.lower_bound();

    let disc = |e: f64| discriminant_real(pot, e).expect("discriminant eval");

    // scan grid, uniform in s = sqrt(E - E_ref)
    let e_ref = lo.min(pot.lower_bound()) - 1.0;
    let s_lo = (lo - e_ref).sqrt();
    let s_hi = (hi - e_ref).sqrt();
    let n_pts = ((s_hi - s_lo) * SCAN_PER_SQRT_UNIT).ceil() as usize + 2;
    let grid: Vec<f64> = (0..=n_pts)
        .map(|i| {
            let s = s_lo + (s_hi - s_lo) * i as f64 / n_pts as f64;
            e_ref + s * s
        })
        .collect();
    let dvals: Vec<f64> = grid.iter().map(|&e| disc(e)).collect();

    let mut edges: Vec<EdgeInfo> = Vec::new();

    // sign-change brackets for both targets
    for (target, sign) in [(2.0f64, 1i8), (-2.0f64, -1i8)] {
        for i in 0..grid.len() - 1 {
            let g0 = dvals[i] - target;
            let g1 = dvals[i + 1] - target;
            if g0 == 0.0 {
                // grid point exactly on an edge: treat as found (rare)
                edges.push(EdgeInfo { energy: grid[i], disc_target: sign, double: false });
                continue;
            }
            if (g0 < 0.0) != (g1 < 0.0) {
                let r = bisect(|e| disc(e) - target, grid[i], grid[i + 1], EDGE_TOL);
                edges.push(EdgeInfo { energy: r, disc_target: sign, double: false });
            }
        }
    }

    // closed / near-closed gaps: local maxima of |D| - 2 with no sign change
    let mut diagnostics: Vec<(f64, String)> = Vec::new();
    for i in 1..grid.len() - 1 {
        let h0 = dvals[i - 1].abs() - 2.0;
        let h1 = dvals[i].abs() - 2.0;
        let h2 = dvals[i + 1].abs() - 2.0;
        if h1 >= h0 && h1 >= h2 && h1 <= 0.0 {
            // |D| local max at or below 2: candidate closed gap
            let (x, neg_h) = golden_min(|e| -(disc(e).abs() - 2.0), grid[i - 1], grid[i + 1], 1e-12);
            let hmax = -neg_h;
            if hmax.abs() <= CLOSED_GAP_TOL {
                let sign = if disc(x) > 0.0 { 1 } else { -1 };
                // avoid duplicating an edge already found via sign change
                let dup = edges.iter().any(|e| (e.energy - x).abs() < 10.0 * EDGE_TOL);
                if !dup {
                    edges.push(EdgeInfo { energy: x, disc_target: sign, double: true });
                    edges.push(EdgeInfo { energy: x, disc_target: sign, double: true });
                }
            } else if hmax < 0.0 && hmax > -NEAR_DEGENERATE_TOL {
                diagnostics.push((x, format!(
                    "near-degenerate gap candidate at E={x:.9}: max(|D|-2)={hmax:.3e} unresolved"
                )));
            }
        }
    }

    edges.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());

    // assemble alternating bands and gaps by classifying inter-edge segments
    let mut bands: Vec<Band> = Vec::new();
    let mut gaps: Vec<Gap> = Vec::new();
    let mut boundaries: Vec<f64> = Vec::with_capacity(edges.len() + 2);
    boundaries.push(lo);
    boundaries.extend(edges.iter().map(|e| e.energy));
    boundaries.push(hi);

    let mut band_count = 0usize;
    let mut pending_gap: Option<(f64, f64, bool)> = None; // (lo, hi, open)
    let mut i = 0;
    while i + 1 < boundaries.len() {
        let a = boundaries[i];
        let b = boundaries[i + 1];
        if b - a <= 10.0 * EDGE_TOL {
            // coincident pair: a closed gap between adjacent bands
            if i > 0 && i + 2 < boundaries.len() {
                pending_gap = Some((a, b, false));
            }
            i += 1;
            continue;
        }
        let mid = 0.5 * (a + b);
        let in_band = disc(mid).abs() <= 2.0;
        if in_band {
            band_count += 1;
            if let Some((glo, ghi, open)) = pending_gap.take() {
                gaps.push(Gap {
                    lo: glo,
                    hi: ghi,
                    n: band_count - 1,
                    open,
                    clipped: false,
                    diagnostic: None,
                });
            }
            bands.push(Band {
                lo: a,
                hi: b,
                n: band_count,
                isolated: None,
                clipped_lo: i == 0,
                clipped_hi: i + 2 == boundaries.len(),
            });
        } else if band_count > 0 {
            pending_gap = Some((a, b, true));
        }
        i += 1;
    }
    // a gap the window truncates is still a (clipped) open gap
    if let Some((glo, ghi, open)) = pending_gap.take() {
        gaps.push(Gap {
            lo: glo,
            hi: ghi,
            n: band_count,
            open,
            clipped: true,
            diagnostic: None,
        });
    }

    // attach scan diagnostics to the nearest gap
    for (x, msg) in diagnostics {
        if let Some(g) = gaps
            .iter_mut()
            .min_by(|p, q| {
                let dp = (0.5 * (p.lo + p.hi) - x).abs();
                let dq = (0.5 * (q.lo + q.hi) - x).abs();
                dp.partial_cmp(&dq).unwrap()
            })
        {
            g.diagnostic = Some(msg);
        }
    }

    // isolation flags: both flanking gaps open; below-spectrum counts as open
    let n_bands = bands.len();
    for bi in 0..n_bands {
        let b_n = bands[bi].n;
        let below_open = if bi == 0 {
            if anchored && !bands[0].clipped_lo {
                Some(true)
            } else {
                None
            }
        } else {
            gaps.iter().find(|g| g.n == b_n - 1).map(|g| g.open)
        };
        let above_open = if bands[bi].clipped_hi {
            None
        } else {
            gaps.iter().find(|g| g.n == b_n).map(|g| g.open)
        };
        bands[bi].isolated = match (below_open, above_open) {
            (Some(x), Some(y)) => Some(x && y),
            _ => None,
        };
    }

    Ok(BandStructure {
        window,
        anchored,
        edges,
        bands,
        gaps,
    })
}

/// Band structure anchored below the spectrum so band numbers are absolute.
pub fn band_structure_anchored(pot: &PotentialSpec, hi: f64) -> Result<BandStructure> {
    let floor = pot.lower_bound() - 1.0;
    band_edges(pot, (floor, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_operator_edges_all_closed() {
        let v = PotentialSpec::free();
        let bs = band_edges(&v, (-1.0, 100.0)).unwrap();
        assert!(bs.anchored);
        // edges at n^2 pi^2 for n = 0..3 within the window (0 simple, rest double)
        let expected = [0.0, PI * PI, PI * PI, 4.0 * PI * PI, 4.0 * PI * PI, 9.0 * PI * PI, 9.0 * PI * PI];
        assert_eq!(bs.edges.len(), expected.len(), "edges: {:?}", bs.edges);
        for (e, want) in bs.edges.iter().zip(expected) {
            assert!(
                (e.energy - want).abs() < 1e-6,
                "edge {} vs {}",
                e.energy,
                want
            );
        }
        for g in &bs.gaps {
            assert!(!g.open, "free operator gap {} reported open", g.n);
        }
    }

    #[test]
    fn kronig_penney_edges_match_oracle() {
        // Frozen from a 30-digit mpmath dense-grid bisection of D(E) -+ 2.
        let oracle = [
            4.4854668206209484,
            11.557802150843951,
            17.907426111521389,
            44.320286839797923,
            44.946986496376518,
            92.836381732992424,
            94.938777380228936,
        ];
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_edges(&v, (-1.0, 120.0)).unwrap();
        assert_eq!(bs.edges.len(), oracle.len(), "edges {:?}", bs.edges);
        for (e, want) in bs.edges.iter().zip(oracle) {
            assert!(
                (e.energy - want).abs() < 1e-8,
                "edge {} vs oracle {}",
                e.energy,
                want
            );
        }
        assert!(bs.gaps[0].open, "first KP gap must be open");
        assert!(bs.gaps[0].hi - bs.gaps[0].lo > 6.0);
        // discriminant really sits on +-2 at every edge
        for e in &bs.edges {
            let d = discriminant_real(&v, e.energy).unwrap();
            assert!(
                (d.abs() - 2.0).abs() < 1e-7,
                "D({}) = {} not on +-2",
                e.energy,
                d
            );
        }
    }

    #[test]
    fn window_inside_band_yields_partial_band() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        // strictly inside band 1 = [4.485, 11.558]
        let bs = band_edges(&v, (6.0, 9.0)).unwrap();
        assert!(bs.edges.is_empty());
        assert_eq!(bs.bands.len(), 1);
        assert!(bs.bands[0].clipped_lo && bs.bands[0].clipped_hi);
        assert!(!bs.anchored);
    }

    #[test]
    fn empty_window_in_gap_is_not_an_error() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_edges(&v, (13.0, 16.0)).unwrap(); // inside gap 1
        assert!(bs.edges.is_empty());
        assert!(bs.bands.is_empty());
    }

    #[test]
    fn classification_and_isolation() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let bs = band_structure_anchored(&v, 120.0).unwrap();
        assert!(matches!(bs.classify(0.0), Locus::BelowSpectrum));
        assert!(matches!(bs.classify(8.0), Locus::InBand(0)));
        assert!(matches!(bs.classify(15.0), Locus::InGap(_)));
        let b1 = bs.band_by_number(1).unwrap();
        assert_eq!(b1.isolated, Some(true));
    }
}
