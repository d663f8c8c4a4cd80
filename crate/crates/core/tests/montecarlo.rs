use level_crossings::montecarlo::{
    estimate_crossings, sample_coefficients, simulate_counts, CoefficientSampler, RootMethod, SamplingMethod,
};
use level_crossings::moments::PolynomialEnsemble;
use level_crossings::quadrature::{expected_crossings, IntervalSpec, Region};
use level_crossings::spectrum::{CovarianceModel, ModelSpec, SpectralDensity};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let model = CovarianceModel::Density(SpectralDensity::geometric(0.6).unwrap());
    let e = PolynomialEnsemble::new(40, model.clone(), 0.5).unwrap();
    let regions: Vec<Region> = vec!["-1..1".parse().unwrap(), Region::Outer];
    let one = pool(1).install(|| simulate_counts(&e, &regions, 3000, 42, RootMethod::Auto).unwrap());
    let many = pool(5).install(|| simulate_counts(&e, &regions, 3000, 42, RootMethod::Auto).unwrap());
    assert_eq!(one, many);
    let b1 = pool(1).install(|| sample_coefficients(&model, 10, 500, 3).unwrap());
    let b2 = pool(3).install(|| sample_coefficients(&model, 10, 500, 3).unwrap());
    assert_eq!(b1.coefficients, b2.coefficients);
}

#[test]
fn linear_polynomials_always_cross_once() {
    let e = PolynomialEnsemble::new(1, CovarianceModel::Independent, 0.0).unwrap();
    let m = estimate_crossings(&e, &IntervalSpec::real_line(), 100_000, 8).unwrap();
    assert_eq!((m.mean, m.count, m.rejected), (1.0, 100_000, 0));
}

#[test]
fn mean_converges_to_quadrature_at_root_n_rate() {
    let e = PolynomialEnsemble::new(6, CovarianceModel::Independent, 0.5).unwrap();
    let spec = IntervalSpec::unit();
    let exact = expected_crossings(&e, &spec, 1e-10).unwrap().value;
    let mut errors = Vec::new();
    for count in [1_000, 10_000, 100_000] {
        let m = estimate_crossings(&e, &spec, count, 21).unwrap();
        assert!((m.mean - exact).abs() < 4.0 * m.std_error, "count {count}: {} vs {exact}", m.mean);
        errors.push(m.std_error);
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((2.5..4.0).contains(&ratio), "SE ratio {ratio}");
    }
}

#[test]
fn geometric_agrees_with_quadrature() {
    let model = ModelSpec::Geometric { rho: 0.5 }.build().unwrap();
    let e = PolynomialEnsemble::new(20, model, 1.0).unwrap();
    for spec in ["-1..1", "1..inf", "-inf..-1"] {
        let spec: IntervalSpec = spec.parse().unwrap();
        let exact = expected_crossings(&e, &spec, 1e-9).unwrap().value;
        let m = estimate_crossings(&e, &spec, 20_000, 4).unwrap();
        assert!(m.z_score(exact).abs() < 3.5, "{spec}: {} ± {} vs {exact}", m.mean, m.std_error);
    }
}

#[test]
fn high_degree_uses_subdivision_consistently() {
    let e = PolynomialEnsemble::new(300, CovarianceModel::Independent, 0.0).unwrap();
    let regions = [Region::Interval(IntervalSpec::real_line())];
    let auto = simulate_counts(&e, &regions, 200, 1, RootMethod::Auto).unwrap();
    let sub = simulate_counts(&e, &regions, 200, 1, RootMethod::Subdivision).unwrap();
    assert_eq!(auto, sub);
    let exact = level_crossings::quadrature::expected_crossings(&e, &IntervalSpec::real_line(), 1e-8)
        .unwrap()
        .value;
    let m = auto.estimate(0);
    assert!(m.z_score(exact).abs() < 4.0, "{} ± {} vs {exact}", m.mean, m.std_error);
}

#[test]
fn sampler_choice_follows_the_model() {
    let s = CoefficientSampler::new(&CovarianceModel::constant(0.3).unwrap(), 5, 0).unwrap();
    assert_eq!(s.method(), SamplingMethod::ConstantRho);
    let s = CoefficientSampler::new(&CovarianceModel::Independent, 5, 0).unwrap();
    assert_eq!(s.method(), SamplingMethod::Independent);
    let model = ModelSpec::CustomFourier { gamma: vec![1.0, 0.4, 0.1] }.build().unwrap();
    let s = CoefficientSampler::new(&model, 5, 0).unwrap();
    assert!(matches!(s.method(), SamplingMethod::CirculantEmbedding { .. }));
}

#[test]
fn raw_counts_stream() {
    let e = PolynomialEnsemble::new(3, CovarianceModel::Independent, 0.0).unwrap();
    let regions = [Region::Interval(IntervalSpec::real_line())];
    let s = simulate_counts(&e, &regions, 100, 2, RootMethod::Auto).unwrap();
    let mut csv = Vec::new();
    s.write_csv(0, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sample_index,count");
    assert_eq!(lines.len(), 101);
    let total: u32 = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse::<u32>().unwrap()).sum();
    assert_eq!(total as f64 / 100.0, s.estimate(0).mean);
    let mut bin = Vec::new();
    s.write_binary(0, &mut bin).unwrap();
    assert_eq!(bin.len(), 400);
}
