//! Analytic small-scale integration: Taylor terms of a radial profile
//! against the power weight integrate to explicit meromorphic functions of
//! the regulator; all poles live here.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use crate::laurent::LaurentSeries;
use num_complex::Complex;

/// The analytic part of `int_0^cutoff t^(a + b z) f(t) dt` with
/// `f(t) = sum_k taylor[k] t^k`:
/// each term contributes `taylor[k] cutoff^(a+bz+k+1) / (a+bz+k+1)`.
#[derive(Clone, Debug)]
pub struct AnalyticRadial<R> {
    pub taylor: Vec<C<R>>,
    pub a: R,
    pub b: R,
    pub cutoff: R,
}

impl<R: Real> AnalyticRadial<R> {
    pub fn new(taylor: Vec<C<R>>, a: R, b: R, cutoff: R) -> Self {
        AnalyticRadial {
            taylor,
            a,
            b,
            cutoff,
        }
    }

    /// Exact evaluation at one regulator sample. Fails if the sample sits on
    /// top of one of the integration poles.
    pub fn eval_at(&self, z: C<R>, guard: R) -> Result<C<R>> {
        let mut acc = Complex::new(R::zero(), R::zero());
        let ln_cut = self.cutoff.ln();
        for (k, f_k) in self.taylor.iter().enumerate() {
            let e = z * Complex::new(self.b, R::zero())
                + Complex::new(self.a + r::<R>(k as f64 + 1.0), R::zero());
            if e.norm() < guard {
                return Err(Error::PoleProximity(format!(
                    "exponent {:?} at taylor order {k}",
                    (e.re.to_f64(), e.im.to_f64())
                )));
            }
            let power = (e * Complex::new(ln_cut, R::zero())).exp();
            acc += f_k * power / e;
        }
        Ok(acc)
    }

    /// Symbolic Laurent expansion around `z = 0` on the given window.
    pub fn into_laurent(&self, window: (i64, i64)) -> Result<LaurentSeries<R>> {
        let (_, kmax) = window;
        let mut total = LaurentSeries::zero(kmax);
        let ln_cut = self.cutoff.ln();
        for (k, f_k) in self.taylor.iter().enumerate() {
            if f_k.norm() == R::zero() {
                continue;
            }
            let e0 = self.a + r::<R>(k as f64 + 1.0);
            // cutoff^(e0 + b z) = cutoff^e0 * exp(b ln(cutoff) z)
            let mut exp_coeffs = Vec::with_capacity((kmax + 1).max(1) as usize);
            let mut term = Complex::new(self.cutoff.powf(e0), R::zero());
            for m in 0..=kmax.max(0) {
                exp_coeffs.push(term);
                term = term * Complex::new(self.b * ln_cut / r::<R>(m as f64 + 1.0), R::zero());
            }
            let power = LaurentSeries::new(0, exp_coeffs, kmax)?;
            // 1 / (e0 + b z); e0 is an exact integer shift in practice
            let denom = LaurentSeries::new(
                0,
                vec![
                    Complex::new(snap_zero(e0), R::zero()),
                    Complex::new(self.b, R::zero()),
                ],
                kmax + 2,
            )?;
            let inv = denom.recip()?;
            let contrib = power.mul(&inv)?.scale(*f_k);
            total = total.add(&contrib)?;
        }
        Ok(total)
    }
}

fn snap_zero<R: Real>(x: R) -> R {
    if x.abs() < r(1e-12) {
        R::zero()
    } else {
        x
    }
}
