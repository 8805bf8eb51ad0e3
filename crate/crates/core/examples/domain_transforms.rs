//! Approximants on a bounded interval and on the half-line, obtained by
//! composing a line approximant with explicit diffeomorphisms.

use whitney::taylor::parse;
use whitney::transforms::{bounded_pipeline, halfline_pipeline, DomainMap, PipelineOptions};
use whitney::whitney::verify::grid;

fn main() {
    let m = DomainMap::mobius();
    for t in [-0.9, 0.0, 0.5] {
        let s = m.forward(t).unwrap();
        println!("mobius: {t} -> {s:.6} -> {:.6}", m.inverse(s));
    }

    let f = parse("exp(t)").unwrap();
    let g = bounded_pipeline(&f, &parse("0.1").unwrap(), &parse("1").unwrap(), (-1.0, 1.0), PipelineOptions::default()).unwrap();
    let r = g.verify(&grid(-0.9, 0.9, 201)).unwrap();
    println!("exp on (-1, 1): protected {:?}, pass = {}, worst margin {:.4e}", g.protected_region(), r.pass, r.worst_margin);
    let j = g.eval_jet(0.5, 1).unwrap();
    println!("g(0.5) = {:.10}, g'(0.5) = {:.10}, e^0.5 = {:.10}", j[0], j[1], 0.5f64.exp());

    let h = halfline_pipeline(&parse("1/(1+t)").unwrap(), &parse("1/(2*(1+t))").unwrap(), &parse("1").unwrap(), PipelineOptions::default()).unwrap();
    let (lo, hi) = h.protected_region().unwrap();
    let r = h.verify(&grid(lo, hi, 201)).unwrap();
    println!("1/(1+t) on (0, inf): protected [{lo:.4}, {hi:.4}], pass = {}", r.pass);
}
