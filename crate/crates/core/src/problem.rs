//! The assembled adiabatic problem: fast potential, slow potential, energy,
//! adiabatic parameter, and the band structure covering the energy range
//! swept by E - W.

use num_complex::Complex64;

use crate::bands::{band_edges, BandStructure};
use crate::branch_points::{locate_branch_points, locate_zeros_periodic, BranchPoint};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::slow::SlowPotential;
use crate::transfer::discriminant;

/// The golden ratio; epsilon = 2 pi / (n + GOLDEN_RATIO) keeps epsilon/2pi
/// irrational by construction.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_894_8;

pub fn epsilon_from_index(n: u32) -> f64 {
    std::f64::consts::TAU / (n as f64 + GOLDEN_RATIO)
}

#[derive(Debug, Clone)]
pub struct AdiabaticProblem {
    pub potential: PotentialSpec,
    pub slow: SlowPotential,
    pub energy: f64,
    pub epsilon: f64,
    pub bands: BandStructure,
    branch_points: Vec<BranchPoint>,
    /// Largest strip half-height free of complex branch points and complex
    /// critical points of W; horizontal period curves and Stokes tracing are
    /// homotopy-safe inside |Im zeta| < y_eff.
    y_eff: f64,
}

impl AdiabaticProblem {
    /// Build the problem: anchors the band structure below the spectrum and
    /// covers everything E - W can reach on the strip, locates all branch
    /// points in the requested strip, and derives the safe strip height.
    pub fn new(
        potential: PotentialSpec,
        slow: SlowPotential,
        energy: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        potential.validate()?;
        let strip_reach = slow.strip_bound(slow.strip_height);
        let window_hi = energy + strip_reach + 2.0;
        let window_lo = (potential.lower_bound() - 1.0).min(energy - strip_reach - 2.0);
        let bands = band_edges(&potential, (window_lo, window_hi))?;

        let mut problem = AdiabaticProblem {
            potential,
            slow,
            energy,
            epsilon,
            bands,
            branch_points: Vec::new(),
            y_eff: 0.0,
        };
        problem.branch_points = locate_branch_points(
            &problem.potential,
            &problem.bands,
            &problem.slow,
            problem.energy,
            problem.slow.strip_height,
        )?;
        problem.y_eff = problem.compute_y_eff()?;
        Ok(problem)
    }

    /// Epsilon from the golden family, keeping everything else.
    pub fn with_epsilon_index(mut self, n: u32) -> Self {
        self.epsilon = epsilon_from_index(n);
        self
    }

    /// The energy set swept on the real line: [E - W+, E - W-].
    pub fn swept_interval(&self) -> (f64, f64) {
        (self.energy - self.slow.w_plus(), self.energy - self.slow.w_minus())
    }

    pub fn branch_points(&self) -> &[BranchPoint] {
        &self.branch_points
    }

    pub fn y_eff(&self) -> f64 {
        self.y_eff
    }

    /// D(E - W(zeta)) / 2, the basic quantity behind every branch of the
    /// complex momentum.
    pub fn d_half(&self, zeta: Complex64) -> Complex64 {
        let e = Complex64::new(self.energy, 0.0) - self.slow.eval(zeta);
        discriminant(&self.potential, e)
            .map(|d| d / 2.0)
            .unwrap_or(Complex64::new(f64::NAN, 0.0))
    }

    /// Distance from zeta to the nearest located branch point (periodic in
    /// the real direction).
    pub fn branch_point_distance(&self, zeta: Complex64) -> f64 {
        let tau = std::f64::consts::TAU;
        let mut best = f64::INFINITY;
        for bp in &self.branch_points {
            for shift in [-tau, 0.0, tau] {
                let d = (zeta - (bp.zeta + Complex64::new(shift, 0.0))).norm();
                best = best.min(d);
            }
        }
        best
    }

    fn compute_y_eff(&self) -> Result<f64> {
        let cap = self.slow.strip_height;
        let mut y = cap;
        for bp in &self.branch_points {
            let im = bp.zeta.im.abs();
            if im > 1e-9 {
                y = y.min(0.9 * im);
            }
        }
        // complex critical points of W would merge preimage branches
        let wp = |z: Complex64| self.slow.derivative(z, 1);
        let wpp = |z: Complex64| self.slow.derivative(z, 2);
        let crit = locate_zeros_periodic(&wp, &wpp, cap, 1e-10)?;
        for (z, _) in crit {
            if z.im.abs() > 1e-9 {
                y = y.min(0.9 * z.im.abs());
            }
        }
        if !(y > 0.0) {
            return Err(Error::GeometryInconsistency(
                "no branch-point-free strip height available".into(),
            ));
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slow::SlowPotential;

    #[test]
    fn epsilon_family_values() {
        let e = epsilon_from_index(14);
        assert!((e - 0.40230322).abs() < 1e-6, "eps(14) = {e}");
        assert!(epsilon_from_index(29) < epsilon_from_index(14));
    }

    #[test]
    fn problem_assembles_for_reference_scenario() {
        let v = PotentialSpec::kronig_penney(10.0, 0.5);
        let w = SlowPotential::cosine(4.5, 1.0);
        let p = AdiabaticProblem::new(v, w, 8.0216344857324497, epsilon_from_index(14)).unwrap();
        let (lo, hi) = p.swept_interval();
        assert!((lo - 3.5216).abs() < 1e-3 && (hi - 12.5216).abs() < 1e-3);
        assert!(p.bands.anchored);
        assert!(p.y_eff() > 0.05, "y_eff = {}", p.y_eff());
        assert!(p.y_eff() <= 1.0);
        // the four real branch points of the swept band-1 geometry exist
        let real_bps = p
            .branch_points()
            .iter()
            .filter(|b| b.zeta.im.abs() < 1e-9)
            .count();
        assert!(real_bps >= 4, "found {real_bps} real branch points");
    }
}
