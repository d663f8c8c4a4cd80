//! Crossing table over dyadic degrees against (1/π) ln n, with the fitted
//! slope per region.
use level_crossings::asymptotics::fit_log_slope;
use level_crossings::quadrature::{crossing_table, KRule, Region};
use level_crossings::spectrum::CovarianceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns: Vec<usize> = (7..=13).map(|p| 1 << p).collect();
    let regions: Vec<Region> = vec!["-1..1".parse()?, Region::Outer];
    let rows = crossing_table(&CovarianceModel::Independent, &ns, &KRule::Fixed(0.0), &regions, 1e-8)?;

    println!("{:>6} {:>8} {:>12} {:>12} {:>8}", "n", "region", "E[N]", "prediction", "ratio");
    for r in &rows {
        println!(
            "{:>6} {:>8} {:>12.6} {:>12.6} {:>8.4}",
            r.n,
            r.region.to_string(),
            r.estimate.value,
            r.prediction.unwrap_or(f64::NAN),
            r.ratio().unwrap_or(f64::NAN)
        );
    }
    for region in &regions {
        let subset: Vec<_> = rows.iter().filter(|r| r.region == *region).cloned().collect();
        let fit = fit_log_slope(&subset)?;
        println!("{region}: slope·π = {:.4} (max residual {:.2e})", fit.slope * std::f64::consts::PI, fit.max_residual);
    }

    // growing level: K(n) = √(n / ln ln n) / ln n
    let rule = KRule::Growing { scale: 1.0, decay: 1.0 };
    let geometric = CovarianceModel::Density(level_crossings::spectrum::SpectralDensity::geometric(0.5)?);
    for r in crossing_table(&geometric, &[256, 1024, 4096], &rule, &regions[..1], 1e-8)? {
        println!("n={:>5} K={:>7.3}: {:.6} vs ln(n/K²)/π = {:.6}", r.n, r.level, r.estimate.value, r.prediction.unwrap_or(f64::NAN));
    }
    Ok(())
}
