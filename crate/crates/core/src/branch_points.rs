//! Branch points of the complex momentum: solutions of W(zeta) = E - E_l
//! inside the strip, found by argument-principle counting on subrectangles
//! followed by Newton polishing.

use num_complex::Complex64;
use serde::Serialize;

use crate::bands::BandStructure;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::slow::SlowPotential;

/// Threshold on |W'| below which a branch point is flagged non-simple.
pub const SIMPLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchPoint {
    pub zeta: Complex64,
    /// Index of the band edge (into BandStructure::edges) this point projects to.
    pub edge_index: usize,
    pub edge_energy: f64,
    /// True iff W'(zeta) != 0, i.e. the branch point is of square-root type.
    pub simple: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    fn diameter(&self) -> f64 {
        ((self.re1 - self.re0).powi(2) + (self.im1 - self.im0).powi(2)).sqrt()
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re0 - slack
            && z.re <= self.re1 + slack
            && z.im >= self.im0 - slack
            && z.im <= self.im1 + slack
    }

    fn quarters(&self) -> [Rect; 4] {
        let rm = 0.5 * (self.re0 + self.re1);
        let im = 0.5 * (self.im0 + self.im1);
        [
            Rect { re0: self.re0, re1: rm, im0: self.im0, im1: im },
            Rect { re0: rm, re1: self.re1, im0: self.im0, im1: im },
            Rect { re0: self.re0, re1: rm, im0: im, im1: self.im1 },
            Rect { re0: rm, re1: self.re1, im0: im, im1: self.im1 },
        ]
    }
}

/// Winding number of f around the rectangle boundary, by adaptive phase
/// tracking. Fails if f comes indistinguishably close to zero on the boundary.
fn winding_number<F: Fn(Complex64) -> Complex64>(f: &F, rect: &Rect) -> Result<i64> {
    let corners = rect.corners();
    let mut total = 0.0f64;
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        total += edge_arg_change(f, a, b, 0)?;
    }
    let n = total / std::f64::consts::TAU;
    let rounded = n.round();
    if (n - rounded).abs() > 0.1 {
        return Err(Error::InternalInconsistency(format!(
            "argument principle winding {n} not near an integer"
        )));
    }
    Ok(rounded as i64)
}

fn edge_arg_change<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    depth: usize,
) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    if fa.norm() < 1e-13 || fb.norm() < 1e-13 {
        return Err(Error::GeometryInconsistency(
            "zero of f on counting rectangle boundary".into(),
        ));
    }
    let dphi = (fb / fa).arg();
    if dphi.abs() < std::f64::consts::FRAC_PI_2 && depth >= 1 {
        return Ok(dphi);
    }
    if depth > 48 {
        return Err(Error::GeometryInconsistency(
            "argument tracking failed to refine (zero too close to boundary)".into(),
        ));
    }
    let mid = (a + b) * 0.5;
    Ok(edge_arg_change(f, a, mid, depth + 1)? + edge_arg_change(f, mid, b, depth + 1)?)
}

/// All zeros of an analytic f in `rect`, as (location, multiplicity).
/// Subdivides until each cell holds one simple zero or shrinks to cluster
/// scale; polishes with Newton.
pub fn locate_zeros<F, D>(f: &F, df: &D, rect: Rect, tol: f64) -> Result<Vec<(Complex64, usize)>>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let total = winding_number(f, &rect)?;
    let mut out = Vec::new();
    if total > 0 {
        collect_zeros(f, df, rect, tol, &mut out, 0)?;
    }
    let found: usize = out.iter().map(|(_, m)| m).sum();
    if found != total as usize {
        return Err(Error::BranchPointCount {
            counted: total as usize,
            found,
        });
    }
    Ok(out)
}

fn collect_zeros<F, D>(
    f: &F,
    df: &D,
    rect: Rect,
    tol: f64,
    out: &mut Vec<(Complex64, usize)>,
    depth: usize,
) -> Result<()>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let n = winding_number(f, &rect)?;
    if n == 0 {
        return Ok(());
    }
    if n == 1 || rect.diameter() < 1e-6 {
        // Newton polish from the center
        let mut z = rect.center();
        let mut ok = false;
        for _ in 0..80 {
            let fz = f(z);
            let dz = df(z);
            if dz.norm() < 1e-14 {
                break;
            }
            let step = fz / dz;
            z -= step;
            if step.norm() < tol {
                ok = true;
                break;
            }
        }
        if ok && f(z).norm() < 1e-7 && rect.contains(z, 0.15 * rect.diameter() + 1e-9) {
            out.push((z, n as usize));
            return Ok(());
        }
        if rect.diameter() < 1e-6 {
            // cluster or stubborn multiple zero: report the center
            out.push((rect.center(), n as usize));
            return Ok(());
        }
    }
    if depth > 60 {
        return Err(Error::InternalInconsistency(
            "zero search exceeded subdivision depth".into(),
        ));
    }
    for q in rect.quarters() {
        // nudge the shared boundary if a zero sits on it
        match collect_zeros(f, df, q, tol, out, depth + 1) {
            Ok(()) => {}
            Err(Error::GeometryInconsistency(_)) => {
                // shift the quarter slightly and retry once
                let eps = 1e-4 * (1.0 + q.diameter());
                let q2 = Rect {
                    re0: q.re0 - eps,
                    re1: q.re1 + eps * 0.618,
                    im0: q.im0 - eps * 0.741,
                    im1: q.im1 + eps * 0.867,
                };
                collect_zeros(f, df, q2, tol, out, depth + 1)?;
            }
            Err(e) => return Err(e),
        }
    }
    // deduplicate zeros found twice near shared boundaries
    out.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap()
    });
    out.dedup_by(|a, b| {
        if (a.0 - b.0).norm() < 1e-7 {
            b.1 = b.1.max(a.1);
            true
        } else {
            false
        }
    });
    Ok(())
}

/// Zeros of f in one real period times [-y_max, y_max], retrying with
/// laterally shifted and slightly inflated rectangles until no zero sits on
/// the counting boundary. Results are reported with Re in [0, 2 pi).
pub fn locate_zeros_periodic<F, D>(
    f: &F,
    df: &D,
    y_max: f64,
    tol: f64,
) -> Result<Vec<(Complex64, usize)>>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let tau = std::f64::consts::TAU;
    let mut shift = 0.0f64;
    for attempt in 0..12 {
        let rect = Rect {
            re0: shift,
            re1: shift + tau,
            im0: -y_max - 1e-3 * (attempt as f64 + 1.0),
            im1: y_max + 1.3e-3 * (attempt as f64 + 1.0),
        };
        match locate_zeros(f, df, rect, tol) {
            Ok(zs) => {
                return Ok(zs
                    .into_iter()
                    .map(|(z, m)| (Complex64::new(z.re.rem_euclid(tau), z.im), m))
                    .collect())
            }
            Err(Error::GeometryInconsistency(_)) => {
                shift += 0.0137 + 0.003 * attempt as f64;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::GeometryInconsistency(
        "could not find a zero-free counting boundary".into(),
    ))
}

/// All branch points W(zeta) = E - E_l in {0 <= Re < 2 pi, |Im| <= y_max},
/// for every band edge E_l the slow potential can reach on that strip.
pub fn locate_branch_points(
    _pot: &PotentialSpec,
    bands: &BandStructure,
    slow: &SlowPotential,
    energy: f64,
    y_max: f64,
) -> Result<Vec<BranchPoint>> {

    let reach = slow.strip_bound(y_max);
    let mut points: Vec<BranchPoint> = Vec::new();
    for (idx, edge) in bands.edges.iter().enumerate() {
        if edge.double && idx > 0 && (bands.edges[idx - 1].energy - edge.energy).abs() < 1e-12 {
            continue; // coincident partner already processed
        }
        let target = energy - edge.energy;
        if target.abs() > reach + 1e-9 {
            continue; // unreachable on this strip
        }
        let f = |z: Complex64| slow.eval(z) - Complex64::new(target, 0.0);
        let df = |z: Complex64| slow.derivative(z, 1);
        let zs = locate_zeros_periodic(&f, &df, y_max, 1e-12).map_err(|e| match e {
            Error::GeometryInconsistency(msg) => Error::GeometryInconsistency(format!(
                "edge E_l = {}: {msg}",
                edge.energy
            )),
            other => other,
        })?;
        for (z, mult) in zs {
            let simple = slow.derivative(z, 1).norm() > SIMPLE_TOL;
            for _ in 0..mult {
                points.push(BranchPoint {
                    zeta: z,
                    edge_index: idx,
                    edge_energy: edge.energy,
                    simple,
                });
            }
        }
    }
    points.sort_by(|a, b| {
        (a.zeta.re, a.zeta.im, a.edge_energy)
            .partial_cmp(&(b.zeta.re, b.zeta.im, b.edge_energy))
            .unwrap()
    });
    points.dedup_by(|a, b| (a.zeta - b.zeta).norm() < 1e-9 && a.edge_index == b.edge_index);
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn winding_counts_polynomial_zeros() {
        // f(z) = (z - 0.3)(z - (1 + 0.5i)) has 2 zeros in [0,2]x[-1,1]
        let z1 = Complex64::new(0.3, 0.0);
        let z2 = Complex64::new(1.0, 0.5);
        let f = |z: Complex64| (z - z1) * (z - z2);
        let rect = Rect { re0: 0.0, re1: 2.0, im0: -1.0, im1: 1.0 };
        assert_eq!(winding_number(&f, &rect).unwrap(), 2);
    }

    #[test]
    fn locates_cosine_roots_closed_form() {
        // cos(z) = 0.5 on [0, 2pi): z = pi/3, 5pi/3
        let f = |z: Complex64| z.cos() - Complex64::new(0.5, 0.0);
        let df = |z: Complex64| -z.sin();
        let rect = Rect { re0: -0.1, re1: std::f64::consts::TAU - 0.1, im0: -1.0, im1: 1.0 };
        let zs = locate_zeros(&f, &df, rect, 1e-13).unwrap();
        assert_eq!(zs.len(), 2);
        let pi = std::f64::consts::PI;
        assert!((zs[0].0 - Complex64::new(pi / 3.0, 0.0)).norm() < 1e-10);
        assert!((zs[1].0 - Complex64::new(5.0 * pi / 3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn locates_complex_cosh_pair() {
        // cos(z) = -1.5: z = pi +- i arccosh(1.5)
        let f = |z: Complex64| z.cos() + Complex64::new(1.5, 0.0);
        let df = |z: Complex64| -z.sin();
        let rect = Rect { re0: 0.0, re1: std::f64::consts::TAU - 0.01, im0: -1.5, im1: 1.5 };
        let zs = locate_zeros(&f, &df, rect, 1e-13).unwrap();
        assert_eq!(zs.len(), 2);
        let pi = std::f64::consts::PI;
        let y = 1.5f64.acosh();
        let want1 = Complex64::new(pi, -y);
        let want2 = Complex64::new(pi, y);
        assert!(zs.iter().any(|(z, _)| (z - want1).norm() < 1e-10));
        assert!(zs.iter().any(|(z, _)| (z - want2).norm() < 1e-10));
    }
}
