//! Minimal complex 2x2 matrix arithmetic.
//!
//! Everything downstream (transfer matrices, period maps, cocycles) lives in
//! SL(2, C), so a fixed-size type with closed-form determinant, eigenvalues
//! and spectral norm beats pulling in a general linear-algebra crate.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    /// Row-major entries: [[m[0][0], m[0][1]], [m[1][0], m[1][1]]].
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(d, 0.0),
        )
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let f = Complex64::new(s, 0.0);
        Mat2::new(
            self.m[0][0] * f,
            self.m[0][1] * f,
            self.m[1][0] * f,
            self.m[1][1] * f,
        )
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Frobenius norm squared.
    pub fn frob_sq(&self) -> f64 {
        self.m[0][0].norm_sqr()
            + self.m[0][1].norm_sqr()
            + self.m[1][0].norm_sqr()
            + self.m[1][1].norm_sqr()
    }

    /// Spectral norm (largest singular value), closed form for 2x2:
    /// the singular values squared are the eigenvalues of A^H A,
    /// sigma^2 = (t +- sqrt(t^2 - 4 d)) / 2 with t = ||A||_F^2, d = |det A|^2.
    pub fn spectral_norm(&self) -> f64 {
        let t = self.frob_sq();
        let d = self.det().norm_sqr();
        let disc = (t * t - 4.0 * d).max(0.0);
        (0.5 * (t + disc.sqrt())).sqrt()
    }

    /// Eigenvalues, largest-|.| first.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let t = self.trace();
        let d = self.det();
        let half = Complex64::new(0.5, 0.0);
        let disc = (t * t - Complex64::new(4.0, 0.0) * d).sqrt();
        let l1 = (t + disc) * half;
        let l2 = (t - disc) * half;
        if l1.norm() >= l2.norm() {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }

    /// An (unnormalized) eigenvector for the eigenvalue `lambda`.
    /// Picks the numerically larger of the two closed-form candidates.
    pub fn eigenvector(&self, lambda: Complex64) -> [Complex64; 2] {
        let a = &self.m;
        let cand1 = [a[0][1], lambda - a[0][0]];
        let cand2 = [lambda - a[1][1], a[1][0]];
        let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
        let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
        if n1 >= n2 {
            cand1
        } else {
            cand2
        }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max absolute entry-wise difference.
    pub fn max_diff(&self, other: &Mat2) -> f64 {
        let mut d = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        d
    }
}

/// exp(M) for a traceless 2x2 matrix, via M^2 = delta I:
/// exp(M) = cosh(mu) I + sinhc(mu) M with mu = sqrt(delta).
/// The result has determinant exactly 1 up to rounding, which is what keeps
/// long transfer-matrix products unimodular.
pub fn exp_traceless(m: &Mat2) -> Mat2 {
    debug_assert!(m.trace().norm() < 1e-12 * (1.0 + m.frob_sq().sqrt()));
    let delta = -m.det(); // M^2 = (a^2 + bc) I = -det(M) I for traceless M
    let mu = delta.sqrt();
    let (ch, shc) = cosh_sinhc(mu);
    let mut out = Mat2::identity();
    for r in 0..2 {
        for c in 0..2 {
            out.m[r][c] = if r == c { ch } else { Complex64::new(0.0, 0.0) };
            out.m[r][c] += shc * m.m[r][c];
        }
    }
    out
}

/// (cosh(mu), sinh(mu)/mu) with the removable singularity at mu = 0 handled
/// by the Taylor series.
fn cosh_sinhc(mu: Complex64) -> (Complex64, Complex64) {
    if mu.norm() < 1e-4 {
        let m2 = mu * mu;
        let one = Complex64::new(1.0, 0.0);
        let ch = one + m2 / 2.0 + m2 * m2 / 24.0;
        let shc = one + m2 / 6.0 + m2 * m2 / 120.0;
        (ch, shc)
    } else {
        (mu.cosh(), mu.sinh() / mu)
    }
}
