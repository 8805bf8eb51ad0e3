//! Gaussian smoothing of a compactly supported function, at the λ the
//! approximation guarantee asks for, and off the real axis.

use num_complex::Complex64;
use whitney::bump::Hump;
use whitney::taylor::{parse, sup_norm_with, DEFAULT_SAMPLES};
use whitney::weierstrass::{certify_approx, lambda_for_eps, transform_complex, transform_jet, windowed, Supported};

fn main() {
    let hump = Hump::new(0.0, 1.0, 2.0, 3.0).unwrap();
    let f = windowed(parse("t^3").unwrap(), hump);

    for eps in [1e-1, 1e-2, 1e-3] {
        let m = 1;
        let nm = sup_norm_with(|t, k| f.jet(t, k), (0.0, 3.0), m, DEFAULT_SAMPLES).unwrap().inflated();
        let nm1 = sup_norm_with(|t, k| f.jet(t, k), (0.0, 3.0), m + 1, DEFAULT_SAMPLES).unwrap().inflated();
        let lambda = 1.01 * lambda_for_eps(nm, nm1, eps).unwrap();
        let r = certify_approx(&f, m, eps, lambda).unwrap();
        println!("eps = {eps:e}: lambda = {lambda:.4e}, max deviation {:.3e} at t = {:.3}", r.max_deviation, r.worst_point);
    }

    let lambda = 25.0;
    let w = transform_jet(&f, lambda, 1.5, 2).unwrap();
    println!("W f(1.5) = {:.8}, (W f)' = {:.8}, (W f)'' = {:.8}", w[0], w[1], w[2]);
    for y in [0.0, 0.5, 1.0, 2.0] {
        let v = transform_complex(&f, lambda, Complex64::new(1.5, y), Some(30.0)).unwrap();
        println!("log|W f(1.5 + {y}i)| = {:.6}", v.log_magnitude);
    }
}
