//! Coefficient sampling and the empirical covariance of a batch.
use level_crossings::montecarlo::sample_coefficients;
use level_crossings::spectrum::{CovarianceModel, SpectralDensity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let models = [
        ("independent", CovarianceModel::Independent),
        ("geometric:0.5", CovarianceModel::Density(SpectralDensity::geometric(0.5)?)),
        ("constant:0.5", CovarianceModel::constant(0.5)?),
    ];
    for (name, model) in models {
        let batch = sample_coefficients(&model, 32, 20_000, 1)?;
        print!("{name:<14} {:?}:", batch.method);
        for k in [0, 1, 2, 5] {
            let (g, se) = batch.empirical_covariance(k)?;
            print!("  Γ({k}) = {g:.3}±{se:.3}");
        }
        println!();
    }
    Ok(())
}
