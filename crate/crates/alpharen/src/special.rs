//! Complex gamma function (Lanczos approximation, g = 7, 9 terms).
//!
//! Used by tests and reports as a closed-form reference; the amplitude
//! evaluation pipeline never calls into this module.

use crate::float::{c, r, Real, C};
use num_complex::Complex;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for complex argument.
pub fn gamma<R: Real>(z: C<R>) -> C<R> {
    let half = r::<R>(0.5);
    if z.re < half {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let pi = R::PI();
        let pi_c = Complex::new(pi, R::zero());
        let s = (Complex::new(pi, R::zero()) * z).sin();
        return pi_c / (s * gamma(Complex::new(R::one(), R::zero()) - z));
    }
    let z = z - Complex::new(R::one(), R::zero());
    let mut x = c::<R>(LANCZOS[0], 0.0);
    for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
        x += Complex::new(r::<R>(coef), R::zero())
            / (z + Complex::new(r::<R>(i as f64), R::zero()));
    }
    let t = z + Complex::new(r::<R>(LANCZOS_G + 0.5), R::zero());
    let sqrt_two_pi = r::<R>((2.0 * std::f64::consts::PI).sqrt());
    Complex::new(sqrt_two_pi, R::zero())
        * t.powc(z + Complex::new(half, R::zero()))
        * (-t).exp()
        * x
}

/// Euler–Mascheroni constant.
pub fn euler_gamma<R: Real>() -> R {
    r(0.577_215_664_901_532_9)
}
