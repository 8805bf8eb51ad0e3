//! Higher derivatives of a composition three ways: Bell polynomials, jet
//! composition, and the crude composition bound.

use whitney::combinatorics::{bell_number, composition_bound, faa_di_bruno, stirling2};
use whitney::taylor::parse;

fn main() {
    let outer = parse("exp(t)").unwrap();
    let inner = parse("sin(t)").unwrap();
    let composed = outer.substitute(&inner);
    let t = 0.7;
    let n = 6;

    let f = inner.jet(t, n).unwrap();
    let g = outer.jet(f[0], n).unwrap();
    let direct = composed.jet(t, n).unwrap();
    for k in 0..=n {
        let fdb = faa_di_bruno(&g, &f, k).unwrap();
        // |sin^{(j)}| ≤ 1 and |exp^{(m)}| ≤ e on the range of sin.
        let bound = if k == 0 { 1f64.exp() } else { composition_bound(1.0, 1f64.exp(), k).unwrap() };
        println!("k = {k}: Faa di Bruno {fdb:+.12}, jet {:+.12}, bound {bound:.3e}", direct[k]);
    }

    for n in [5, 10, 20] {
        println!("B_{n} = {}, S({n}, 3) = {}", bell_number(n), stirling2(n, 3).unwrap());
    }
}
