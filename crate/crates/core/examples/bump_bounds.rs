//! Derivative bounds for the flat bump θ(t) = e^{-1/t} and the ramp α.

use num_bigint::BigInt;
use whitney::bump::{alpha_jet, derivative_bound, pn_poly, theta_jet, Hump, hump_jet};
use whitney::taylor::sup_norms_by_order;

fn main() {
    // θ^{(n)} = p_n(t) t^{-2n} θ(t) with integer p_n.
    let mut fact = BigInt::from(1);
    for n in 1..=8usize {
        fact *= n;
        let p = pn_poly(n);
        println!("p_{n}: degree {}, max |coeff| {} <= 2^(n-1) n! = {}", p.degree(), p.max_abs(), BigInt::from(2).pow(n as u32 - 1) * &fact);
    }

    let theta = sup_norms_by_order(|t, k| Ok::<_, whitney::taylor::TaylorError>(theta_jet(t, k)), (0.0, 1.0), 6, 8193).unwrap();
    let alpha = sup_norms_by_order(|t, k| Ok::<_, whitney::taylor::TaylorError>(alpha_jet(t, k)), (0.0, 1.0), 6, 8193).unwrap();
    for n in 1..=6 {
        let c = derivative_bound(n);
        println!(
            "n = {n}: sup|theta^(n)| = {:.4e} (n^3n = {:.3e}), sup|alpha^(n)| = {:.4e} (headline bound {:.3e})",
            theta[n].lower(),
            (n as f64).powf(3.0 * n as f64),
            alpha[n].lower(),
            c.headline()
        );
    }

    let h = Hump::new(0.0, 1.0, 2.0, 3.0).unwrap();
    for t in [0.25, 0.5, 1.5, 2.75] {
        println!("hump({t}) = {:.6}", hump_jet(&h, t, 0)[0]);
    }
}
