//! Constant covariance ρ against independent coefficients: the mean number
//! of real zeros roughly halves.
use level_crossings::montecarlo::estimate_crossings;
use level_crossings::moments::PolynomialEnsemble;
use level_crossings::quadrature::IntervalSpec;
use level_crossings::spectrum::CovarianceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(Ok(512), |s| s.parse())?;
    let count: usize = args.get(2).map_or(Ok(4000), |s| s.parse())?;
    let rho = 0.5;

    let line = IntervalSpec::real_line();
    let constant = PolynomialEnsemble::new(n, CovarianceModel::constant(rho)?, 0.0)?;
    let independent = PolynomialEnsemble::new(n, CovarianceModel::Independent, 0.0)?;
    let a = estimate_crossings(&constant, &line, count, 1)?;
    let b = estimate_crossings(&independent, &line, count, 2)?;
    println!("constant ρ={rho}: {:.4} ± {:.4}", a.mean, a.std_error);
    println!("independent:     {:.4} ± {:.4}", b.mean, b.std_error);
    println!("ratio:           {:.4}", a.mean / b.mean);
    Ok(())
}
