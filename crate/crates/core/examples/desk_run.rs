//! Build an entire approximant of sin t on the line with error
//! 1/(2(1+|t|)), check it on the protected region, audit the stage ledger,
//! and round-trip it through the file format.

use whitney::taylor::parse;
use whitney::whitney::verify::grid;
use whitney::whitney::{build_approximant, from_json, ledger_check, to_json, verify, Case, Mode, ProblemSpec};

fn main() {
    let spec = ProblemSpec::new(parse("sin(t)").unwrap(), parse("1/(2*(1+t))").unwrap(), parse("1").unwrap(), None, Case::R, ProblemSpec::default_delta(Case::R));
    let ap = build_approximant(&spec, 4, Mode::Practical).unwrap();
    for st in &ap.stages {
        println!("stage {}: ln lambda = {:.4}, support {:?}", st.n, st.ln_lambda, st.support);
    }

    let (lo, hi) = ap.protected_region().unwrap();
    let report = verify(&ap, &grid(lo, hi, 401)).unwrap();
    println!("verify on [{lo:.4}, {hi:.4}]: pass = {}, worst margin {:.4e}", report.pass, report.worst_margin);

    let g = ap.eval_jet(0.3, 1).unwrap();
    println!("g(0.3) = {:.12} vs sin(0.3) = {:.12}; g'(0.3) = {:.12}", g[0], 0.3f64.sin(), g[1]);

    let audit = ledger_check(&ap).unwrap();
    for item in audit.items.iter().filter(|i| !i.pass) {
        println!("ledger item failed: {} at {}: {}", item.name, item.n, item.detail);
    }
    println!("ledger: {} items, pass = {}", audit.items.len(), audit.pass);

    let text = to_json(&ap).unwrap();
    let back = from_json(&text).unwrap();
    println!("file round trip: {} bytes, identical = {}", text.len(), back == ap);
}
