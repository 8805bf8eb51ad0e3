//! The half-line construction: rings accumulating at 0 and ∞, the sector
//! where the growth envelope applies, and the ring locator.

use num_complex::Complex64;
use whitney::bounds::{in_region_v, ring_locator_check};
use whitney::taylor::parse;
use whitney::whitney::verify::grid;
use whitney::whitney::{build_approximant, verify, Case, Mode, ProblemSpec};

fn main() {
    let delta = ProblemSpec::default_delta(Case::Rpos);
    let spec = ProblemSpec::new(parse("1/(1+t)").unwrap(), parse("1/(2*(1+t))").unwrap(), parse("0").unwrap(), None, Case::Rpos, delta);
    let ap = build_approximant(&spec, 3, Mode::Practical).unwrap();
    for n in 0..4 {
        println!("K_{n} = {:?}", ap.scheme.k_interval(n));
    }
    let (lo, hi) = ap.scheme.k_interval(1);
    let r = verify(&ap, &grid(lo, hi, 201)).unwrap();
    println!("verify on K_1: pass = {}, worst margin {:.4e}", r.pass, r.worst_margin);

    let alpha = 2.0 * delta * delta;
    for z in [Complex64::new(2.0, 0.5), Complex64::new(4.0, -3.0), Complex64::new(1.0, 0.9)] {
        if !in_region_v(z, alpha) {
            println!("{z} lies outside the sector");
            continue;
        }
        let c = ring_locator_check(z, &ap.scheme).unwrap();
        println!("{z}: first ring {} ({} <= {:.4}: {})", c.n, c.lhs, c.rhs, c.holds);
    }
}
