//! Monte Carlo against Kac–Rice quadrature for one ensemble.
use level_crossings::montecarlo::{simulate_counts, RootMethod};
use level_crossings::moments::PolynomialEnsemble;
use level_crossings::quadrature::{expected_crossings_region, Region};
use level_crossings::spectrum::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(Ok(50), |s| s.parse())?;
    let model: ModelSpec = args.get(2).map_or(Ok("geometric:0.5".parse()?), |s| s.parse())?;
    let k: f64 = args.get(3).map_or(Ok(1.0), |s| s.parse())?;
    let count: usize = args.get(4).map_or(Ok(10_000), |s| s.parse())?;

    let e = PolynomialEnsemble::new(n, model.build()?, k)?;
    let regions: Vec<Region> = ["-1..1", "1..inf", "outer"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let sim = simulate_counts(&e, &regions, count, 7, RootMethod::Auto)?;
    for (i, region) in regions.iter().enumerate() {
        let quad = expected_crossings_region(&e, region, 1e-8)?;
        let mc = sim.estimate(i);
        println!(
            "{region:>8}  quadrature {:.6}  monte carlo {:.6} ± {:.6}  z = {:+.2}",
            quad.value,
            mc.mean,
            mc.std_error,
            mc.z_score(quad.value)
        );
    }
    Ok(())
}
