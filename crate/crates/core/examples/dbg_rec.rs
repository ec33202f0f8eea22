use adiaq_core::decomposition::real_decomposition;
use adiaq_core::momentum::{continue_with_crossings, real_seed, continue_along_path};
use adiaq_core::potential::PotentialSpec;
use adiaq_core::problem::AdiabaticProblem;
use adiaq_core::slow::SlowPotential;
use num_complex::Complex64;

fn main() {
    let v = PotentialSpec::kronig_penney(10.0, 0.5);
    let w = SlowPotential::cosine(4.5, 1.0);
    let p = AdiabaticProblem::new(v, w, 8.0216344857324497, 0.3).unwrap();
    let _d = real_decomposition(&p).unwrap();
    // isolated steep segment crossing the G1 real segment
    let a = Complex64::new(8.972, -0.5);
    let b = Complex64::new(9.078, 0.5);
    let seed0 = real_seed(&p, 8.9).unwrap(); // in G1? no: 8.9 is in G1 (8.758..10.09): gap branch
    let lift = vec![Complex64::new(8.9, 0.0), Complex64::new(8.9, -0.5), a];
    let seed = *continue_along_path(&p, &lift, seed0).unwrap().last().unwrap();
    println!("seed at a = {seed}");
    let (vals, crossings) = continue_with_crossings(&p, &[a, b], seed).unwrap();
    println!("end value = {}", vals.last().unwrap());
    for c in &crossings {
        println!("crossing: zeta = {}, gap {:?}, re/pi = {}", c.zeta, c.gap, c.re_kappa / std::f64::consts::PI);
    }
    println!("n = {}", crossings.len());
}
