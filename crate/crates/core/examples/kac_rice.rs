//! Expected number of real solutions of P_n(x) = K by Kac–Rice quadrature,
//! with the per-panel F1/F2 breakdown.
use level_crossings::moments::PolynomialEnsemble;
use level_crossings::quadrature::{expected_crossings, IntervalSpec};
use level_crossings::spectrum::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(Ok(100), |s| s.parse())?;
    let k: f64 = args.get(2).map_or(Ok(1.0), |s| s.parse())?;
    let model: ModelSpec = args.get(3).map_or(Ok("geometric:0.5".parse()?), |s| s.parse())?;

    let e = PolynomialEnsemble::new(n, model.build()?, k)?;
    for spec in ["-inf..inf", "-1..1", "1..inf", "-inf..-1"] {
        let est = expected_crossings(&e, &spec.parse::<IntervalSpec>()?, 1e-9)?;
        println!(
            "{spec:>10}: {:.10} (±{:.1e})  F1 {:.10}  F2 {:.10}",
            est.value,
            est.abs_err,
            est.f1_part(),
            est.f2_part()
        );
    }

    let est = expected_crossings(&e, &IntervalSpec::unit(), 1e-9)?;
    println!("\npanels of (-1, 1):");
    for p in &est.pieces {
        println!("  [{:+.6}, {:+.6}] {:?}: {:.3e} + {:.3e}", p.x_lo, p.x_hi, p.variable, p.f1, p.f2);
    }
    Ok(())
}
