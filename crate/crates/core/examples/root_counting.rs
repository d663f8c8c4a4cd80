//! Distinct real solutions of P(x) = K in half-open intervals.
use level_crossings::montecarlo::{count_level_crossings, real_level_roots, RootMethod};
use level_crossings::quadrature::IntervalSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // x³ - x = 0: roots -1, 0, 1
    let c = [0.0, -1.0, 0.0, 1.0];
    for spec in ["-0.5..2", "-1..0", "0..1", "-inf..inf"] {
        let n = count_level_crossings(&c, 0.0, &spec.parse::<IntervalSpec>()?)?;
        println!("x³ - x on [{spec}): {n}");
    }
    // (x - 1)²(x + 2) = 0 touches at 1: counted once
    let roots = real_level_roots(&[2.0, -3.0, 0.0, 1.0], 0.0, RootMethod::Companion)?;
    println!("(x-1)²(x+2): {:?}", roots.roots());
    // P(x) = K with K = 4 for x²: ±2
    let roots = real_level_roots(&[0.0, 0.0, 1.0], 4.0, RootMethod::Subdivision)?;
    println!("x² = 4: {:?}", roots.roots());
    Ok(())
}
