//! Tunneling actions: S_j = i times the loop integral of kappa around a gap
//! arc, evaluated on the collapsed real segment as 2 int |Im kappa| d zeta
//! (the constant real part cancels around the loop), with the endpoint
//! square-root vanishing removed by substitution. A rectangle contour
//! evaluation cross-checks each action.

use num_complex::Complex64;
use serde::Serialize;

use crate::decomposition::IsoEnergyDecomposition;
use crate::error::{Error, Result};
use crate::momentum::continue_along_path;
use crate::problem::AdiabaticProblem;
use crate::quad::{integrate_sqrt_left, integrate_sqrt_right, GL20_W, GL20_X};

/// Relative agreement required between the collapsed-segment and
/// rectangle-contour evaluations.
pub const CROSS_CHECK_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ActionSet {
    /// S_j, one per gap arc, strictly positive.
    pub actions: Vec<f64>,
    /// t_j = exp(-S_j / (2 epsilon)).
    pub coefficients: Vec<f64>,
    /// T = prod t_j.
    pub product: f64,
    /// Absolute quadrature error estimates per action.
    pub quadrature_errors: Vec<f64>,
    /// Rectangle-contour evaluations of the same actions.
    pub rectangle_values: Vec<f64>,
    pub epsilon: f64,
}

impl ActionSet {
    pub fn action_sum(&self) -> f64 {
        self.actions.iter().sum()
    }

    /// (1/4 pi) sum_j S_j, the predicted Lyapunov exponent.
    pub fn lyapunov_prediction(&self) -> f64 {
        self.action_sum() / (4.0 * std::f64::consts::PI)
    }

    /// Worst relative disagreement between the two evaluation routes.
    pub fn cross_check_defect(&self) -> f64 {
        self.actions
            .iter()
            .zip(&self.rectangle_values)
            .map(|(a, r)| (a - r).abs() / a.max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// |Im kappa| on a gap arc at real zeta: acosh(|D(E - W(zeta))| / 2).
fn gap_decay_rate(problem: &AdiabaticProblem, zeta: f64) -> f64 {
    let d = problem.d_half(Complex64::new(zeta, 0.0));
    let a = d.re.abs();
    if a <= 1.0 {
        0.0
    } else {
        a.acosh()
    }
}

/// The collapsed-segment action over one gap arc [lo, hi].
fn collapsed_action(problem: &AdiabaticProblem, lo: f64, hi: f64) -> (f64, f64, usize) {
    let mid = 0.5 * (lo + hi);
    let tol = 1e-11;
    let left = integrate_sqrt_left(|z| gap_decay_rate(problem, z), lo, mid, tol, 4000);
    let right = integrate_sqrt_right(|z| gap_decay_rate(problem, z), mid, hi, tol, 4000);
    (
        2.0 * (left.value + right.value),
        2.0 * (left.abs_error + right.abs_error),
        left.panels + right.panels,
    )
}

/// i times the contour integral of kappa around a rectangle enclosing the
/// gap segment [lo, hi], continued branch, orientation fixed so the result
/// is positive.
fn rectangle_action(problem: &AdiabaticProblem, lo: f64, hi: f64) -> Result<f64> {
    // keep the contour clear of branch points other than the two endpoints
    let len = hi - lo;
    let mut clearance: f64 = 0.35 * problem.y_eff().min(len);
    let tau = std::f64::consts::TAU;
    for bp in problem.branch_points() {
        for shift in [-tau, 0.0, tau] {
            let z = bp.zeta + Complex64::new(shift, 0.0);
            let dre = if z.re < lo {
                lo - z.re
            } else if z.re > hi {
                z.re - hi
            } else {
                0.0
            };
            let dist = (dre * dre + z.im * z.im).sqrt();
            if dist > 1e-9 {
                clearance = clearance.min(0.45 * dist);
            }
        }
    }
    let h = clearance.max(1e-4);
    let d = h;

    // seed: continue the gap branch from the segment midpoint straight down
    let mid = 0.5 * (lo + hi);
    let seed0 = crate::momentum::real_seed(problem, mid)?;
    let drop = vec![Complex64::new(mid, 0.0), Complex64::new(mid, -h)];
    let seed = *continue_along_path(problem, &drop, seed0)?.last().unwrap();
    let start = Complex64::new(mid, -h);

    let nodes = [
        start,
        Complex64::new(hi + d, -h),
        Complex64::new(hi + d, h),
        Complex64::new(lo - d, h),
        Complex64::new(lo - d, -h),
        start,
    ];

    let mut integral = Complex64::new(0.0, 0.0);
    let mut current = seed;
    for w in nodes.windows(2) {
        let (side_val, end_val) = integrate_side(problem, w[0], w[1], current, h)?;
        integral += side_val;
        current = end_val;
    }
    // closed loop: the branch must return to the seed
    if (current - seed).norm() > 1e-7 * (1.0 + seed.norm()) {
        return Err(Error::GeometryInconsistency(format!(
            "kappa did not return to its seed around the gap contour (defect {:.2e})",
            (current - seed).norm()
        )));
    }
    Ok((Complex64::i() * integral).re.abs())
}

/// Integral of the continued kappa along one straight side, Gauss-Legendre
/// panels with the branch carried through every node in order.
fn integrate_side(
    problem: &AdiabaticProblem,
    a: Complex64,
    b: Complex64,
    seed: Complex64,
    scale: f64,
) -> Result<(Complex64, Complex64)> {
    let side_len = (b - a).norm();
    let panels = ((side_len / (0.5 * scale)).ceil() as usize).clamp(4, 400);
    // ordered GL20 nodes on [0, 1]
    let mut ts = Vec::with_capacity(20);
    for i in (0..10).rev() {
        ts.push((0.5 * (1.0 - GL20_X[i]), GL20_W[i] * 0.5));
    }
    for i in 0..10 {
        ts.push((0.5 * (1.0 + GL20_X[i]), GL20_W[i] * 0.5));
    }

    let mut integral = Complex64::new(0.0, 0.0);
    let mut current = seed;
    let mut pos = 0.0f64; // global parameter in [0,1] along the side
    for p in 0..panels {
        let pa = p as f64 / panels as f64;
        let pb = (p + 1) as f64 / panels as f64;
        for &(t, wgt) in &ts {
            let target = pa + (pb - pa) * t;
            let za = a + (b - a) * pos;
            let zb = a + (b - a) * target;
            let d_half_at = |s: f64| problem.d_half(za + (zb - za) * s);
            current = crate::quasimomentum::continue_branch(&d_half_at, current, 1)?;
            integral += current * wgt * (pb - pa) * (b - a);
            pos = target;
        }
    }
    // carry the branch to the end of the side
    let za = a + (b - a) * pos;
    let d_half_at = |s: f64| problem.d_half(za + (b - za) * s);
    current = crate::quasimomentum::continue_branch(&d_half_at, current, 1)?;
    Ok((integral, current))
}

/// Tunneling actions for every gap arc of the decomposition.
pub fn tunneling_actions(
    problem: &AdiabaticProblem,
    decomposition: &IsoEnergyDecomposition,
) -> Result<ActionSet> {
    if decomposition.gaps.is_empty() {
        return Err(Error::InvalidInput(
            "decomposition has no gap arcs (no tunneling geometry)".into(),
        ));
    }
    let mut actions = Vec::new();
    let mut errors = Vec::new();
    let mut rects = Vec::new();
    for gap in &decomposition.gaps {
        let (s, err, nodes) = collapsed_action(problem, gap.lo, gap.hi);
        if !(s > 0.0) {
            return Err(Error::GeometryInconsistency(format!(
                "non-positive action {s} on gap [{}, {}]",
                gap.lo, gap.hi
            )));
        }
        if err > 1e-8 * (1.0 + s) {
            return Err(Error::Accuracy {
                detail: format!(
                    "action quadrature error {err:.3e} on gap [{}, {}]",
                    gap.lo, gap.hi
                ),
                nodes,
            });
        }
        let rect = rectangle_action(problem, gap.lo, gap.hi)?;
        actions.push(s);
        errors.push(err);
        rects.push(rect);
    }
    let epsilon = problem.epsilon;
    let coefficients: Vec<f64> = actions
        .iter()
        .map(|s| (-s / (2.0 * epsilon)).exp())
        .collect();
    let product: f64 = coefficients.iter().product();
    let direct = (-actions.iter().sum::<f64>() / (2.0 * epsilon)).exp();
    if (product - direct).abs() > 1e-12 * direct.max(f64::MIN_POSITIVE) {
        return Err(Error::InternalInconsistency(format!(
            "tunneling product identity violated: {product} vs {direct}"
        )));
    }
    Ok(ActionSet {
        actions,
        coefficients,
        product,
        quadrature_errors: errors,
        rectangle_values: rects,
        epsilon,
    })
}
