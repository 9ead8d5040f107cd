use alpharen::graph::{banana, tadpole};
use alpharen::parametric::ExternalMomenta;
use alpharen::sector::{EvalContext, NumericConfig};
use alpharen::special::gamma;
use num_complex::Complex64;
use std::time::Instant;

#[test]
fn closed_forms() {
    let zs: Vec<Complex64> = vec![
        Complex64::new(0.1, 0.0),
        Complex64::new(-0.07, 0.071),
        Complex64::new(0.0, 0.1),
        Complex64::new(2.0, 0.0),
    ];
    let pi2 = std::f64::consts::PI.powi(2);

    let d = tadpole::<f64>(1.0, 2);
    let ctx = EvalContext::new(&d, NumericConfig::default()).unwrap();
    let p = ExternalMomenta::zero::<f64>(&d);
    let t0 = Instant::now();
    let grid = ctx.bare_batch(&zs, &[p]).unwrap();
    println!("tadpole: {:?}", t0.elapsed());
    for (i, z) in zs.iter().enumerate() {
        let want = Complex64::new(pi2, 0.0) * gamma(z - Complex64::new(1.0, 0.0));
        println!("  z={z}: rel {:.2e}", (grid.at(i, 0) - want).norm() / want.norm());
    }

    let d = banana::<f64>(2, 1.0);
    let ctx = EvalContext::new(&d, NumericConfig::default()).unwrap();
    let p = ExternalMomenta::zero::<f64>(&d);
    let t0 = Instant::now();
    let grid = ctx.bare_batch(&zs, &[p]).unwrap();
    println!("bubble: {:?}", t0.elapsed());
    for (i, z) in zs.iter().enumerate() {
        let one = Complex64::new(1.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        let want = Complex64::new(pi2, 0.0) * gamma(one + z) * gamma(one + z) * gamma(two * z)
            / gamma(two + two * z);
        println!("  z={z}: rel {:.2e}", (grid.at(i, 0) - want).norm() / want.norm());
    }
}

#[test]
fn sunset_reference() {
    let d = banana::<f64>(3, 1.0);
    let ctx = EvalContext::new(&d, NumericConfig::default()).unwrap();
    let p = ExternalMomenta::zero::<f64>(&d);
    let zs = vec![
        Complex64::new(2.0, 0.0),
        Complex64::new(0.25, 0.0),
        Complex64::new(0.2, 0.1),
    ];
    let wants = [
        Complex64::new(5.3843868746613472882, 0.0),
        Complex64::new(-1944.99881642270386, 0.0),
        Complex64::new(-1165.2123851938446, 582.542757215325032),
    ];
    let t0 = Instant::now();
    let grid = ctx.bare_batch(&zs, &[p]).unwrap();
    println!("sunset batch: {:?}", t0.elapsed());
    for (i, (z, want)) in zs.iter().zip(wants.iter()).enumerate() {
        let got = grid.at(i, 0);
        println!(
            "  z={z}: got {got:.10e} want {want:.10e} rel {:.2e}",
            (got - want).norm() / want.norm()
        );
    }
}
