use alpharen::graph::banana;
use alpharen::laurent::circle_samples;
use alpharen::parametric::ExternalMomenta;
use alpharen::sector::{EvalContext, NumericConfig};
use num_complex::Complex64;
use std::time::Instant;

#[test]
fn circle_scaling() {
    let d = banana::<f64>(3, 1.0);
    let ctx = EvalContext::new(&d, NumericConfig::default()).unwrap();
    let p = ExternalMomenta::zero::<f64>(&d);
    let zs: Vec<Complex64> = circle_samples(0.1f64, 32);
    let t0 = Instant::now();
    let grid = ctx.bare_batch(&zs, &[p]).unwrap();
    println!("sunset 32-sample circle: {:?}", t0.elapsed());
    // smoke: fit and print the pole structure
    let samples: Vec<(Complex64, Complex64)> =
        zs.iter().enumerate().map(|(i, z)| (*z, grid.at(i, 0))).collect();
    let fit = alpharen::laurent::fit_laurent(&samples, (-4, 2), 1e-6).unwrap();
    for k in -4..=2 {
        println!("  a_{k} = {:.8e}", fit.series.coefficient(k));
    }
    println!("  residual {:.2e}", fit.residual);
}
