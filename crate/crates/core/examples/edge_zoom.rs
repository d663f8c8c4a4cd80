//! Moments near the edge x = 1 - y against their arctan approximation.
use level_crossings::asymptotics::{edge_moment_approx, EdgeSide, EdgeZoom};
use level_crossings::spectrum::{Smoothness, SpectralDensity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = SpectralDensity::independent();
    let y = 1e-3;
    println!("{:>8} {:>12} {:>12} {:>8}", "n", "approx A", "exact A", "ratio");
    for e in [6, 9, 12, 15, 18] {
        let n = 10usize.pow(e);
        let zoom = EdgeZoom::new(y, n, EdgeSide::Plus)?;
        let approx = edge_moment_approx(&zoom, &f, Smoothness::C0)?.moments.a;
        let x2 = (1.0 - y) * (1.0 - y);
        let exact = (1.0 - x2.powf(n as f64 + 1.0)) / (1.0 - x2);
        println!("{:>8} {approx:>12.4} {exact:>12.4} {:>8.4}", format!("1e{e}"), approx / exact);
    }
    Ok(())
}
