//! Stokes lines: level sets Im int_{zeta0}^zeta (kappa - kappa(zeta0)) = 0
//! traced from a simple (square-root) branch point.
//!
//! Near the origin the integral behaves like c (zeta - zeta0)^{3/2}, so
//! exactly three lines leave the point at mutual angles 2 pi / 3. Each is
//! followed by a predictor-corrector walk on the level set; the corrector
//! uses d/d zeta of the integral, which is just kappa - kappa0.

use num_complex::Complex64;
use serde::Serialize;

use crate::branch_points::BranchPoint;
use crate::error::{Error, Result};
use crate::problem::AdiabaticProblem;
use crate::quasimomentum::continue_branch;

/// Level-set residual allowed at every accepted node.
pub const PATH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LineDirection {
    Upward,
    Downward,
    AlongReal,
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesLine {
    pub origin: BranchPoint,
    /// Initial departure angle at the origin.
    pub start_angle: f64,
    pub points: Vec<Complex64>,
    pub direction: LineDirection,
    /// Largest |Im F| seen at accepted nodes.
    pub residual_max: f64,
    /// Set when tracing stopped early (corrector divergence, another branch
    /// point, step collapse); carries the reason.
    pub truncated: Option<String>,
    /// Whether the line stayed within a 15-degree cone of the vertical once
    /// it left the origin region (reported, not asserted).
    pub stays_vertical: bool,
}

struct Tracer<'a> {
    problem: &'a AdiabaticProblem,
    origin: Complex64,
    kappa0: Complex64,
}

impl<'a> Tracer<'a> {
    /// kappa at b continued from (a, value_at_a).
    fn step_kappa(&self, a: Complex64, b: Complex64, va: Complex64) -> Result<Complex64> {
        let d_half_at = |t: f64| self.problem.d_half(a + (b - a) * t);
        continue_branch(&d_half_at, va, 1)
    }

    /// Integral increment of (kappa - kappa0) from a to b by 3-point
    /// Gauss-Legendre with continued kappa.
    fn step_integral(&self, a: Complex64, b: Complex64, va: Complex64) -> Result<(Complex64, Complex64)> {
        const T: [f64; 3] = [0.112701665379258, 0.5, 0.887298334620742];
        const W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut cur = va;
        let mut pos = 0.0;
        for (&t, &w) in T.iter().zip(W.iter()) {
            let za = a + (b - a) * pos;
            let zb = a + (b - a) * t;
            cur = self.step_kappa(za, zb, cur)?;
            acc += (cur - self.kappa0) * w * (b - a);
            pos = t;
        }
        let za = a + (b - a) * pos;
        cur = self.step_kappa(za, b, cur)?;
        Ok((acc, cur))
    }
}

/// Estimate the square-root coefficient c in
/// kappa - kappa0 ~ c sqrt(zeta - zeta0), from a small real offset probe.
fn sqrt_coefficient(problem: &AdiabaticProblem, origin: Complex64) -> Result<(Complex64, Complex64)> {
    let kappa0_probe = 1e-7;
    // kappa0: branch value at the branch point itself (finite limit)
    let near = origin + Complex64::new(kappa0_probe, 0.0);
    let seed = seed_near(problem, near)?;
    let kappa0 = {
        // both colliding candidates converge to the edge value
        let d = problem.d_half(origin);
        let a = d.acos();
        // pick the candidate nearest the probe value
        let tau = std::f64::consts::TAU;
        let mut best = a;
        let mut bd = f64::INFINITY;
        for s in [1.0, -1.0] {
            let base = a * s;
            let l = ((seed.re - base.re) / tau).round();
            let cand = base + Complex64::new(l * tau, 0.0);
            if (cand - seed).norm() < bd {
                bd = (cand - seed).norm();
                best = cand;
            }
        }
        best
    };
    // probe at a few radii and average c = (kappa - kappa0)/sqrt(dz)
    let mut c = Complex64::new(0.0, 0.0);
    let mut count = 0.0;
    for r in [3e-5, 1e-4, 3e-4] {
        let z = origin + Complex64::new(r, 0.0);
        let s = seed_near(problem, z)?;
        c += (s - kappa0) / Complex64::new(r, 0.0).sqrt();
        count += 1.0;
    }
    Ok((c / count, kappa0))
}

/// A branch value of kappa near a point, continued from a real-axis anchor.
fn seed_near(problem: &AdiabaticProblem, z: Complex64) -> Result<Complex64> {
    crate::momentum::complex_momentum(problem, z, crate::momentum::BranchSpec::MAIN)
        .map(|m| m.value)
}

/// Trace the three Stokes lines leaving a simple branch point.
pub fn trace_stokes_lines(
    problem: &AdiabaticProblem,
    origin: &BranchPoint,
) -> Result<Vec<StokesLine>> {
    if !origin.simple {
        return Err(Error::UnsupportedOrder { order: 2 });
    }
    let z0 = origin.zeta;
    let (c, kappa0) = sqrt_coefficient(problem, z0)?;
    if c.norm() < 1e-8 {
        return Err(Error::GeometryInconsistency(
            "vanishing square-root coefficient at branch point".into(),
        ));
    }
    // Im[ (2c/3) r^{3/2} e^{i 3 theta / 2} ] = 0
    // => 3 theta / 2 + arg(c) = k pi  => theta = (2/3)(k pi - arg c)
    let mut lines = Vec::with_capacity(3);
    for k in 0..3 {
        let theta = 2.0 / 3.0 * (k as f64 * std::f64::consts::PI - c.arg());
        let line = trace_one(problem, origin, kappa0, theta)?;
        lines.push(line);
    }
    Ok(lines)
}

fn trace_one(
    problem: &AdiabaticProblem,
    origin: &BranchPoint,
    kappa0: Complex64,
    theta: f64,
) -> Result<StokesLine> {
    let z0 = origin.zeta;
    let tracer = Tracer {
        problem,
        origin: z0,
        kappa0,
    };
    let _ = tracer.origin;
    let y_lim = problem.slow.strip_height;
    let r_start = 1e-3;
    let arc_budget = 2.0 * (std::f64::consts::TAU + 2.0 * y_lim);

    // launch point: integral along the ray via u^2 substitution keeps the
    // sqrt behavior smooth
    let dir = Complex64::new(theta.cos(), theta.sin());
    let mut z = z0 + dir * r_start;
    let mut kappa = seed_near(problem, z)?;
    // F = int (kappa - kappa0); along the launch ray with zeta = z0 + u^2 dir
    let mut f_acc = Complex64::new(0.0, 0.0);
    {
        let umax = r_start.sqrt();
        let n = 24;
        let mut prev_u = 0.0;
        let mut cur = kappa0; // value at the branch point
        for i in 1..=n {
            let u = umax * i as f64 / n as f64;
            let za = z0 + dir * prev_u * prev_u;
            let zb = z0 + dir * u * u;
            if i > 1 {
                cur = tracer.step_kappa(za, zb, cur)?;
            } else {
                cur = seed_near(problem, zb)?;
            }
            // midpoint rule in u with jacobian 2 u du
            let um = 0.5 * (prev_u + u);
            f_acc += (cur - kappa0) * (2.0 * um * (u - prev_u)) * dir;
            prev_u = u;
        }
        kappa = cur;
    }

    let mut points = vec![z0, z];
    let mut residual_max = f_acc.im.abs();
    let mut truncated = None;
    let mut arc_len = r_start;
    let mut step = 2e-3f64;
    let mut prev_dir = dir;

    for _ in 0..200_000 {
        if z.im.abs() > y_lim || arc_len > arc_budget {
            break;
        }
        let grad = kappa - kappa0;
        if grad.norm() < 1e-9 {
            truncated = Some("level-set gradient vanished".into());
            break;
        }
        // unit tangent: Im[(kappa - kappa0) dzeta] = 0
        let mut tangent = grad.conj() / grad.norm();
        if (tangent * prev_dir.conj()).re < 0.0 {
            tangent = -tangent;
        }
        // keep clear of other branch points
        let bp_dist = problem.branch_point_distance(z);
        if bp_dist < 5e-4 && (z - z0).norm() > 1e-2 {
            truncated = Some(format!(
                "approached another branch point (distance {bp_dist:.1e})"
            ));
            break;
        }
        let h = step.min(0.25 * bp_dist.max(1e-4)).min(0.02);
        let z_pred = z + tangent * h;
        // integral and kappa to the predicted point
        let (df, kappa_pred) = match tracer.step_integral(z, z_pred, kappa) {
            Ok(v) => v,
            Err(e) => {
                truncated = Some(format!("continuation failed: {e}"));
                break;
            }
        };
        let mut f_new = f_acc + df;
        let mut z_new = z_pred;
        let mut kappa_new = kappa_pred;
        // corrector: move along i*tangent to cancel Im F
        for _ in 0..4 {
            if f_new.im.abs() < 0.25 * PATH_TOL {
                break;
            }
            let g = kappa_new - kappa0;
            let denom = (g * Complex64::i() * tangent).im;
            if denom.abs() < 1e-12 {
                break;
            }
            let s = -f_new.im / denom;
            let z_corr = z_new + Complex64::i() * tangent * s;
            match tracer.step_integral(z_new, z_corr, kappa_new) {
                Ok((dfc, kc)) => {
                    f_new += dfc;
                    z_new = z_corr;
                    kappa_new = kc;
                }
                Err(_) => break,
            }
        }
        if f_new.im.abs() > PATH_TOL {
            // halve the step and retry; if the step collapses, truncate
            step *= 0.5;
            if step < 1e-7 {
                truncated = Some(format!(
                    "corrector divergence (|Im F| = {:.2e})",
                    f_new.im.abs()
                ));
                break;
            }
            continue;
        }
        arc_len += (z_new - z).norm();
        prev_dir = (z_new - z) / (z_new - z).norm();
        z = z_new;
        kappa = kappa_new;
        f_acc = f_new;
        residual_max = residual_max.max(f_acc.im.abs());
        points.push(z);
        step = (step * 1.6).min(2e-2);
    }

    let last = *points.last().unwrap();
    let dz = last - z0;
    let direction = if dz.im > 0.2 * dz.norm() {
        LineDirection::Upward
    } else if dz.im < -0.2 * dz.norm() {
        LineDirection::Downward
    } else {
        LineDirection::AlongReal
    };
    // verticality: once past the origin region, |Re drift| small vs |Im climb|
    let stays_vertical = match direction {
        LineDirection::AlongReal => false,
        _ => {
            let tail: Vec<&Complex64> = points
                .iter()
                .filter(|p| (*p - z0).norm() > 0.3)
                .collect();
            tail.iter()
                .all(|p| (p.re - z0.re).abs() < 0.27 * (p.im - z0.im).abs() + 0.15)
        }
    };

    Ok(StokesLine {
        origin: *origin,
        start_angle: theta,
        points,
        direction,
        residual_max,
        truncated,
        stays_vertical,
    })
}

/// Pairwise departure angles of the three lines (radians, in [0, pi]).
pub fn departure_angles(lines: &[StokesLine]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let mut d = (lines[i].start_angle - lines[j].start_angle).abs()
                % std::f64::consts::TAU;
            if d > std::f64::consts::PI {
                d = std::f64::consts::TAU - d;
            }
            out.push(d);
        }
    }
    out
}
