//! A, B, C by the lag sums and by spectral quadrature, inside and outside
//! the unit interval.
use level_crossings::moments::{integrand, moments_direct, moments_outer_scaled, moments_spectral, PolynomialEnsemble};
use level_crossings::spectrum::{covariance_from_density, CovarianceModel, SpectralDensity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 200;
    let f = SpectralDensity::geometric(0.5)?;
    let e = PolynomialEnsemble::new(n, CovarianceModel::Density(f.clone()), 1.0)?;
    let gamma = covariance_from_density(&f, n)?;

    println!("{:>6} {:>24} {:>24} {:>10}", "x", "A direct", "A spectral", "F1+F2");
    for x in [-0.99, -0.5, 0.0, 0.5, 0.9, 0.99] {
        let d = moments_direct(&e, &gamma, x)?;
        let s = moments_spectral(&e, &f, x)?;
        let v = integrand(&e, &d, false)?;
        println!("{x:>6} {:>24.16e} {:>24.16e} {:>10.6}", d.a, s.a, v.total());
    }

    // |x| > 1 through z = 1/x; only scaled moments are formed
    for z in [0.5, -0.9, 0.999] {
        let m = moments_outer_scaled(&e, &f, z)?;
        let v = integrand(&e, &m, true)?;
        println!("z = {z:>6}: Ã = {:.6e}, B̃ = {:.6e}, C̃ = {:.6e}, density in z = {:.6}", m.a, m.b, m.c, v.total());
    }
    Ok(())
}
