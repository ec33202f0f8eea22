//! Adaptive Gauss-Kronrod quadrature (G7/K15) plus helpers for integrands
//! with square-root endpoint behavior.

/// 15-point Kronrod abscissae on [0, 1] side (symmetric), QUADPACK values.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// 7-point Gauss weights (for abscissae XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 panel on [a, b]: returns (kronrod_value, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kron * h, (kron - gauss).abs() * h.abs())
}

pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

/// Adaptive bisection on the panel with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> QuadResult {
    struct Panel {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }
    let (val, err) = gk15(&f, a, b);
    let mut panels = vec![Panel { a, b, val, err }];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= tol || panels.len() >= max_panels {
            let value = panels.iter().map(|p| p.val).sum();
            return QuadResult {
                value,
                abs_error: total_err,
                panels: panels.len(),
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, mid);
        let (v2, e2) = gk15(&f, mid, p.b);
        panels.push(Panel { a: p.a, b: mid, val: v1, err: e1 });
        panels.push(Panel { a: mid, b: p.b, val: v2, err: e2 });
    }
}

/// Integrate f over [a, b] where f vanishes like sqrt(x - a) at the left
/// endpoint: substitute x = a + u^2 so the integrand becomes smooth.
pub fn integrate_sqrt_left<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> QuadResult {
    let umax = (b - a).sqrt();
    integrate(|u| 2.0 * u * f(a + u * u), 0.0, umax, tol, max_panels)
}

/// Same with sqrt(b - x) behavior at the right endpoint: x = b - u^2.
pub fn integrate_sqrt_right<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> QuadResult {
    let umax = (b - a).sqrt();
    integrate(|u| 2.0 * u * f(b - u * u), 0.0, umax, tol, max_panels)
}

/// Fixed-order Gauss-Legendre nodes/weights on [-1, 1], 20 points.
/// Used for path integrals where the integrand is smooth and the caller
/// controls panel size.
pub const GL20_X: [f64; 10] = [
    0.076526521133497,
    0.227785851141645,
    0.373706088715420,
    0.510867001950827,
    0.636053680726515,
    0.746331906460151,
    0.839116971822219,
    0.912234428251326,
    0.963971927277914,
    0.993128599185095,
];

pub const GL20_W: [f64; 10] = [
    0.152753387130726,
    0.149172986472604,
    0.142096109318382,
    0.131688638449177,
    0.118194531961518,
    0.101930119817240,
    0.083276741576705,
    0.062672048334109,
    0.040601429800387,
    0.017614007139152,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, 100);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-12, "got {}", r.value);
    }

    #[test]
    fn sqrt_endpoint_substitution() {
        // int_0^1 sqrt(x) dx = 2/3 with integrable endpoint derivative blowup
        let r = integrate_sqrt_left(|x| x.sqrt(), 0.0, 1.0, 1e-13, 200);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-13, "got {}", r.value);
        let r2 = integrate_sqrt_right(|x| (1.0 - x).sqrt(), 0.0, 1.0, 1e-13, 200);
        assert!((r2.value - 2.0 / 3.0).abs() < 1e-13, "got {}", r2.value);
    }

    #[test]
    fn adaptive_handles_peak() {
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 2000);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!(
            (r.value - exact).abs() < 1e-7 * exact,
            "got {} want {}",
            r.value,
            exact
        );
    }
}
