//! Compare the measured growth of a certified approximant with its
//! closed-form envelope.

use num_complex::Complex64;
use whitney::bounds::{compare_thm2, derive_constants, index_diagnostic, lambda_bound_check};
use whitney::taylor::parse;
use whitney::whitney::{build_approximant, Case, Mode, ProblemSpec};

fn main() {
    let spec = ProblemSpec::new(parse("sin(t)").unwrap(), parse("1/(2*(1+t))").unwrap(), parse("0").unwrap(), None, Case::R, ProblemSpec::default_delta(Case::R));
    let ap = build_approximant(&spec, 3, Mode::Certified).unwrap();

    let consts = derive_constants(&ap).unwrap();
    for line in &consts.trace {
        println!("{line}");
    }
    for c in lambda_bound_check(&ap, &consts).unwrap() {
        println!("stage {}: ln lambda {:.3} <= {:.3}: {}", c.n, c.ln_lambda, c.ln_bound, c.pass);
    }

    let report = compare_thm2(&ap, &consts, &[0.5, 1.0, 1.5, 2.0], 64).unwrap();
    print!("{}", report.to_csv());
    println!("envelope holds: {}", report.pass);

    // The measured log|g| along the imaginary axis, as an order diagnostic.
    let samples: Vec<(f64, f64)> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&y| (y, ap.eval_complex(Complex64::new(0.0, y)).unwrap().total_ln))
        .collect();
    println!("sampled order index (m = 2): {:.3}", index_diagnostic(&samples, 2).unwrap());
}
