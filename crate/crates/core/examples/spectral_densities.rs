//! Built-in spectral densities, their covariances and positivity bounds.
use level_crossings::spectrum::{
    covariance_from_density, density_from_covariance, positivity_bounds, CovarianceSequence, SpectralDensity,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let densities = [
        SpectralDensity::independent(),
        SpectralDensity::geometric(0.5)?,
        SpectralDensity::raised_cosine(0.5)?,
    ];
    for f in &densities {
        let gamma = covariance_from_density(f, 5)?;
        let (lo, hi) = positivity_bounds(f, 4096)?;
        println!("{:<20} Γ(0..5) = {:?}", f.label(), gamma.as_slice().iter().map(|g| format!("{g:.6}")).collect::<Vec<_>>());
        println!("{:<20} {lo:.6} <= f <= {hi:.6}", "");
    }

    // and back: a finite covariance defines a trigonometric-polynomial density
    let gamma = CovarianceSequence::finite(vec![1.0, 0.3, -0.1])?;
    let f = density_from_covariance(&gamma)?;
    println!("custom: f(0) = {:.6}, f(π) = {:.6}", f.evaluate(0.0), f.evaluate(std::f64::consts::PI));
    Ok(())
}
