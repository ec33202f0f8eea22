//! Topology search over snake period curves: which side each branch point is
//! passed on, and the branch seed sign. Prints (sigma, m) per topology.

use adiaq_core::decomposition::real_decomposition;
use adiaq_core::indices::{period_crossings, period_index_bruteforce, PeriodCurve};
use adiaq_core::momentum::real_seed;
use adiaq_core::potential::PotentialSpec;
use adiaq_core::problem::AdiabaticProblem;
use adiaq_core::slow::SlowPotential;
use adiaq_core::momentum::continue_along_path;
use num_complex::Complex64;

fn main() {
    let v = PotentialSpec::kronig_penney(10.0, 0.5);
    let w = SlowPotential::cosine(4.5, 1.0);
    let p = AdiabaticProblem::new(v, w, 8.0216344857324497, 0.3).unwrap();
    let d = real_decomposition(&p).unwrap();
    let tau = std::f64::consts::TAU;

    // canonical unrolled geometry
    let a1 = d.bands[0].lo + tau; // work one period up so everything is ordered
    let b1 = d.bands[0].hi + tau;
    let a2 = d.bands[1].lo + tau;
    let b2 = d.bands[1].hi + tau;
    let wrap_lo = d.gaps[1].lo + tau;
    let wrap_hi = d.gaps[1].hi + tau;
    let g1_ext = d.gaps[0].extrema[0].0 + tau;
    let g2_ext = d.gaps[1].extrema[0].0 + tau;
    println!("B1=[{a1:.4},{b1:.4}] G1 ext {g1_ext:.4} B2=[{a2:.4},{b2:.4}] G2=({wrap_lo:.4},{wrap_hi:.4}) ext {g2_ext:.4}");
    println!("p = ({}, {}), formulas: P+=-2 P-=-3 Q+=-3 Q-=-2", d.bands[0].p, d.bands[1].p);

    let x0 = {
        let mut x = 0.5 * (wrap_lo + wrap_hi);
        if (x - g2_ext).abs() < 0.2 * (wrap_hi - wrap_lo) {
            x = g2_ext + 0.35 * (wrap_hi - wrap_lo);
        }
        x - tau + 0.0 * tau // keep x0 left of a1 = phi_1^- + 2 pi
    };
    let h = 0.5 * p.y_eff();

    // crossing x-position inside a zone, clear of a vertical if present
    let cross_pos = |lo: f64, hi: f64, avoid: Option<f64>| -> f64 {
        let mid = 0.5 * (lo + hi);
        match avoid {
            Some(a) if (a - mid).abs() < 0.3 * (hi - lo) => {
                if a > mid { lo + 0.2 * (hi - lo) } else { lo + 0.8 * (hi - lo) }
            }
            _ => mid,
        }
    };

    // zones between consecutive branch points (unrolled, starting at x0):
    // [x0, a1] in G2, [a1,b1]=B1, [b1,a2]=G1, [a2,b2]=B2, [b2, x0+tau] in G2
    let zones = [
        (x0, a1, None),
        (a1, b1, None),
        (b1, a2, Some(g1_ext)),
        (a2, b2, None),
        (b2, x0 + tau, Some(g2_ext)),
    ];

    for seed_sign in [1.0f64, -1.0] {
        for mask in 0..16u32 {
            let sides: Vec<f64> = (0..4).map(|k| if mask & (1 << k) != 0 { 1.0 } else { -1.0 }).collect();
            // side sequence per zone: zone 0 ends at bp a1 (side[0]); zone k
            // between bp k-1 and bp k uses transition side[k-1] -> side[k];
            // last zone returns to side[0]
            let zone_sides: Vec<(f64, f64)> = vec![
                (sides[0], sides[0]),
                (sides[0], sides[1]),
                (sides[1], sides[2]),
                (sides[2], sides[3]),
                (sides[3], sides[0]),
            ];
            let mut pts: Vec<Complex64> = Vec::new();
            pts.push(Complex64::new(x0, zone_sides[0].0 * h));
            for (zi, &(s_in, s_out)) in zone_sides.iter().enumerate() {
                let (lo, hi, avoid) = zones[zi];
                if (s_in - s_out).abs() > 0.5 {
                    let xc = cross_pos(lo, hi, avoid);
                    let wdt = 0.04 * (hi - lo);
                    pts.push(Complex64::new(xc - wdt, s_in * h));
                    pts.push(Complex64::new(xc + wdt, s_out * h));
                }
                pts.push(Complex64::new(hi, s_out * h));
            }
            // seed: lift +-main from the axis at x0 to the start height
            let seed0 = real_seed(&p, x0).unwrap() * seed_sign;
            let lift = vec![Complex64::new(x0, 0.0), pts[0]];
            let seed = *continue_along_path(&p, &lift, seed0).unwrap().last().unwrap();
            let curve = match PeriodCurve::new(pts.clone(), seed) {
                Ok(c) => c,
                Err(e) => { println!("mask {mask:02b} skip: {e}"); continue; }
            };
            match period_index_bruteforce(&p, &curve) {
                Ok(idx) => {
                    let cs = period_crossings(&p, &curve).unwrap_or_default();
                    let rs: Vec<f64> = cs.iter().map(|c| c.re_kappa / std::f64::consts::PI).collect();
                    if seed_sign > 0.0 && mask == 0b1101 {
                        for c in &cs {
                            println!("   crossing at zeta = {} seg {} gap {:?} re_kappa/pi = {}", c.zeta, c.segment, c.gap, c.re_kappa / std::f64::consts::PI);
                        }
                    }
                    println!(
                        "seed {s:+} sides [{s0:+},{s1:+},{s2:+},{s3:+}]  sigma {sg:+} m {m:+}   r/pi {rs:?}",
                        s = seed_sign as i32, s0 = sides[0] as i32, s1 = sides[1] as i32,
                        s2 = sides[2] as i32, s3 = sides[3] as i32,
                        sg = idx.sigma, m = idx.m
                    );
                }
                Err(e) => println!("seed {} mask {mask:04b} failed: {e}", seed_sign),
            }
        }
    }
}
