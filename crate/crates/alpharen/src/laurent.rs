//! Truncated bilateral series in the regulator and the subtraction operator.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Which part of a series the subtraction operator keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Pole part including the constant term (exponents <= 0).
    Paper,
    /// Strictly negative exponents only.
    Minimal,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::Paper
    }
}

/// Coefficients for exponents `min_exp ..= trunc`; everything below
/// `min_exp` is an exact zero, everything above `trunc` is unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<R> {
    min_exp: i64,
    coeffs: Vec<C<R>>,
    trunc: i64,
}

impl<R: Real> LaurentSeries<R> {
    pub fn new(min_exp: i64, coeffs: Vec<C<R>>, trunc: i64) -> Result<Self> {
        if trunc < min_exp + coeffs.len() as i64 - 1 {
            return Err(Error::EmptyWindow);
        }
        let mut s = LaurentSeries {
            min_exp,
            coeffs,
            trunc,
        };
        s.normalize();
        Ok(s)
    }

    pub fn zero(trunc: i64) -> Self {
        LaurentSeries {
            min_exp: trunc,
            coeffs: Vec::new(),
            trunc,
        }
    }

    pub fn constant(cv: C<R>, trunc: i64) -> Self {
        LaurentSeries {
            min_exp: 0,
            coeffs: vec![cv],
            trunc,
        }
        .normalized()
    }

    /// Single term `cv * z^k`.
    pub fn monomial(k: i64, cv: C<R>, trunc: i64) -> Result<Self> {
        if k > trunc {
            return Err(Error::EmptyWindow);
        }
        Self::new(k, vec![cv], trunc)
    }

    fn normalize(&mut self) {
        while let Some(c0) = self.coeffs.first() {
            if c0.norm_sqr() == R::zero() {
                self.coeffs.remove(0);
                self.min_exp += 1;
            } else {
                break;
            }
        }
        while let Some(cl) = self.coeffs.last() {
            if cl.norm_sqr() == R::zero() {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            self.min_exp = self.trunc;
        }
    }

    fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    /// Highest exponent whose coefficient is known.
    pub fn truncation(&self) -> i64 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, k: i64) -> C<R> {
        if k < self.min_exp || k >= self.min_exp + self.coeffs.len() as i64 {
            Complex::new(R::zero(), R::zero())
        } else {
            self.coeffs[(k - self.min_exp) as usize]
        }
    }

    /// Known coefficients in ascending exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, C<R>)> + '_ {
        let base = self.min_exp;
        self.coeffs.iter().enumerate().map(move |(i, c)| (base + i as i64, *c))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let trunc = self.trunc.min(other.trunc);
        let min_exp = self.min_exp.min(other.min_exp);
        if trunc < min_exp {
            // both effectively zero on the common window
            return Ok(Self::zero(trunc));
        }
        let len = (trunc - min_exp + 1) as usize;
        let mut coeffs = vec![Complex::new(R::zero(), R::zero()); len];
        for (k, cv) in self.iter().chain(other.iter()) {
            if k >= min_exp && k <= trunc {
                coeffs[(k - min_exp) as usize] += cv;
            }
        }
        Self::new(min_exp, coeffs, trunc)
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            min_exp: self.min_exp,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, s: C<R>) -> Self {
        LaurentSeries {
            min_exp: self.min_exp,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            trunc: self.trunc,
        }
        .normalized()
    }

    /// Cauchy product; the result carries the weakest truncation implied by
    /// the operands.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            let trunc = (self.min_exp + other.trunc).min(other.min_exp + self.trunc);
            return Ok(Self::zero(trunc));
        }
        let trunc = (self.min_exp + other.trunc).min(other.min_exp + self.trunc);
        let min_exp = self.min_exp + other.min_exp;
        if trunc < min_exp {
            return Err(Error::EmptyWindow);
        }
        let len = (trunc - min_exp + 1) as usize;
        let mut coeffs = vec![Complex::new(R::zero(), R::zero()); len];
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                let k = ka + kb;
                if k >= min_exp && k <= trunc {
                    coeffs[(k - min_exp) as usize] += ca * cb;
                }
            }
        }
        Self::new(min_exp, coeffs, trunc)
    }

    /// Reciprocal of a series with nonzero leading coefficient.
    pub fn recip(&self) -> Result<Self> {
        let Some(lead) = self.coeffs.first().copied() else {
            return Err(Error::EmptyWindow);
        };
        // self = lead z^m (1 + u), invert the unit part order by order
        let m = self.min_exp;
        let order = (self.trunc - m) as usize;
        let mut u = vec![Complex::new(R::zero(), R::zero()); order + 1];
        for (i, cv) in self.coeffs.iter().enumerate() {
            u[i] = cv / lead;
        }
        let mut inv = vec![Complex::new(R::zero(), R::zero()); order + 1];
        inv[0] = Complex::new(R::one(), R::zero());
        for k in 1..=order {
            let mut s = Complex::new(R::zero(), R::zero());
            for j in 1..=k {
                s += u[j] * inv[k - j];
            }
            inv[k] = -s;
        }
        let coeffs = inv.iter().map(|c| c / lead).collect();
        Self::new(-m, coeffs, -m + order as i64)
    }

    /// Subtraction operator `T`: pole part, with the constant term included
    /// in the [`Scheme::Paper`] convention.
    pub fn pole_part(&self, scheme: Scheme) -> Self {
        let cutoff = match scheme {
            Scheme::Paper => 0,
            Scheme::Minimal => -1,
        };
        let mut coeffs = Vec::new();
        let mut min_exp = self.min_exp;
        if min_exp > cutoff {
            return Self::zero(self.trunc);
        }
        for (k, cv) in self.iter() {
            if k <= cutoff {
                coeffs.push(cv);
            }
        }
        if coeffs.is_empty() {
            min_exp = self.trunc;
        }
        LaurentSeries {
            min_exp,
            coeffs,
            trunc: self.trunc,
        }
        .normalized()
    }

    /// Evaluate the known coefficients as a finite Laurent polynomial.
    pub fn eval(&self, z: C<R>) -> C<R> {
        let mut acc = Complex::new(R::zero(), R::zero());
        for (k, cv) in self.iter() {
            acc += cv * powi(z, k);
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> R {
        self.coeffs
            .iter()
            .map(|c| c.norm())
            .fold(R::zero(), |a, b| a.max(b))
    }
}

fn powi<R: Real>(z: C<R>, k: i64) -> C<R> {
    if k == 0 {
        return Complex::new(R::one(), R::zero());
    }
    let mut base = if k > 0 { z } else { z.inv() };
    let mut e = k.unsigned_abs();
    let mut acc = Complex::new(R::one(), R::zero());
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Result of a discrete-contour fit.
#[derive(Clone, Debug)]
pub struct FitResult<R> {
    pub series: LaurentSeries<R>,
    /// Max deviation of the refit series from the input samples.
    pub residual: R,
}

/// Trigonometric-moment estimate of Laurent coefficients from equally spaced
/// samples on a circle around the origin. `tol` bounds the accepted refit
/// residual relative to the sample scale.
pub fn fit_laurent<R: Real>(
    samples: &[(C<R>, C<R>)],
    window: (i64, i64),
    tol: R,
) -> Result<FitResult<R>> {
    let (kmin, kmax) = window;
    if kmax < kmin {
        return Err(Error::EmptyWindow);
    }
    let n = samples.len();
    if (n as i64) < kmax - kmin + 1 {
        return Err(Error::Parse(format!(
            "{n} samples cannot resolve a window of width {}",
            kmax - kmin + 1
        )));
    }
    let rho = samples[0].0.norm();
    for (z, _) in samples.iter() {
        if ((z.norm() - rho) / rho).abs() > r(1e-9) {
            return Err(Error::Parse("samples must lie on a common circle".into()));
        }
    }
    // Estimate the full resolvable range; the DFT on exact circle data mixes
    // exponents only through aliasing (k -> k +/- n), so the extra
    // coefficients cost nothing and make the refit residual a genuine
    // conditioning diagnostic rather than a window-truncation measure.
    let inv_n = R::one() / r::<R>(n as f64);
    let full_max = kmin + n as i64 - 1;
    let mut coeffs = Vec::with_capacity(n);
    for k in kmin..=full_max {
        let mut s = Complex::new(R::zero(), R::zero());
        for (z, v) in samples.iter() {
            s += v * powi(*z, -k);
        }
        coeffs.push(s * Complex::new(inv_n, R::zero()));
    }
    let full = LaurentSeries::new(kmin, coeffs, full_max)?;
    let scale = samples
        .iter()
        .map(|(_, v)| v.norm())
        .fold(R::zero(), |a, b| a.max(b))
        .max(R::min_positive_value());
    let mut residual = R::zero();
    for (z, v) in samples.iter() {
        residual = residual.max((full.eval(*z) - v).norm());
    }
    residual = residual / scale;
    let window_coeffs: Vec<C<R>> = (kmin..=kmax).map(|k| full.coefficient(k)).collect();
    let series = LaurentSeries::new(kmin, window_coeffs, kmax)?;
    if residual > tol {
        return Err(Error::IllConditionedFit {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(FitResult { series, residual })
}

/// Equally spaced points on the circle `|z| = rho`.
pub fn circle_samples<R: Real>(rho: R, count: usize) -> Vec<C<R>> {
    (0..count)
        .map(|j| {
            let th = r::<R>(2.0 * std::f64::consts::PI * j as f64 / count as f64);
            Complex::new(rho * th.cos(), rho * th.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type S = LaurentSeries<f64>;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pole_cancellation_in_addition() {
        // (1/z) + (-1/z + 2) = 2
        let a = S::monomial(-1, cx(1.0, 0.0), 2).unwrap();
        let b = S::new(-1, vec![cx(-1.0, 0.0), cx(2.0, 0.0)], 2).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.min_exp(), 0);
        assert_eq!(s.coefficient(0), cx(2.0, 0.0));
        assert_eq!(s.coefficient(-1), cx(0.0, 0.0));
    }

    #[test]
    fn simple_product() {
        // (1/z) * z = 1
        let a = S::monomial(-1, cx(1.0, 0.0), 3).unwrap();
        let b = S::monomial(1, cx(1.0, 0.0), 3).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coefficient(0), cx(1.0, 0.0));
        assert!(p.is_zero() == false);
    }

    #[test]
    fn cauchy_product_by_hand() {
        // (1/z + 1) * (1/z - 1) = 1/z^2 - 1, window up to z^0
        let a = S::new(-1, vec![cx(1.0, 0.0), cx(1.0, 0.0)], 1).unwrap();
        let b = S::new(-1, vec![cx(1.0, 0.0), cx(-1.0, 0.0)], 1).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.truncation(), 0);
        assert_eq!(p.coefficient(-2), cx(1.0, 0.0));
        assert_eq!(p.coefficient(-1), cx(0.0, 0.0));
        assert_eq!(p.coefficient(0), cx(-1.0, 0.0));
    }

    #[test]
    fn pole_part_schemes() {
        let s = S::new(
            -2,
            vec![cx(1.0, 0.0), cx(3.0, 0.0), cx(5.0, 0.0), cx(2.0, 0.0)],
            1,
        )
        .unwrap();
        let tp = s.pole_part(Scheme::Paper);
        assert_eq!(tp.coefficient(-2), cx(1.0, 0.0));
        assert_eq!(tp.coefficient(-1), cx(3.0, 0.0));
        assert_eq!(tp.coefficient(0), cx(5.0, 0.0));
        assert_eq!(tp.coefficient(1), cx(0.0, 0.0));
        let tm = s.pole_part(Scheme::Minimal);
        assert_eq!(tm.coefficient(0), cx(0.0, 0.0));
        assert_eq!(tm.coefficient(-1), cx(3.0, 0.0));

        // positive powers only -> zero under both schemes
        let s2 = S::new(1, vec![cx(7.0, 0.0), cx(1.0, 0.0)], 2).unwrap();
        assert!(s2.pole_part(Scheme::Paper).is_zero());
        // pure constant: kept by paper, dropped by minimal
        let s3 = S::constant(cx(4.0, 0.0), 2);
        assert_eq!(s3.pole_part(Scheme::Paper).coefficient(0), cx(4.0, 0.0));
        assert!(s3.pole_part(Scheme::Minimal).is_zero());
    }

    #[test]
    fn projector_laws() {
        let s = S::new(
            -3,
            vec![
                cx(0.3, 0.1),
                cx(-1.0, 2.0),
                cx(4.0, 0.0),
                cx(5.0, -1.0),
                cx(2.0, 2.0),
                cx(0.0, 1.0),
            ],
            2,
        )
        .unwrap();
        for scheme in [Scheme::Paper, Scheme::Minimal] {
            let t = s.pole_part(scheme);
            let tt = t.pole_part(scheme);
            assert_eq!(t, tt, "T is a projector");
            let one_minus_t = s.add(&t.neg()).unwrap();
            let again = one_minus_t.add(&one_minus_t.pole_part(scheme).neg()).unwrap();
            assert_eq!(one_minus_t, again, "(1-T) is a projector");
        }
    }

    #[test]
    fn fit_recovers_simple_pole() {
        let zs = circle_samples(0.1f64, 16);
        let samples: Vec<(Complex64, Complex64)> = zs.iter().map(|z| (*z, z.inv())).collect();
        let fit = fit_laurent(&samples, (-2, 2), 1e-10).unwrap();
        assert!((fit.series.coefficient(-1) - cx(1.0, 0.0)).norm() < 1e-12);
        for k in [-2, 0, 1, 2] {
            assert!(fit.series.coefficient(k).norm() < 1e-12);
        }
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_gamma_expansion() {
        // Gamma(z) = 1/z - euler_gamma + O(z)
        let zs = circle_samples(0.1f64, 32);
        let samples: Vec<(Complex64, Complex64)> = zs
            .iter()
            .map(|z| (*z, crate::special::gamma(*z)))
            .collect();
        let fit = fit_laurent(&samples, (-2, 2), 1e-8).unwrap();
        assert!((fit.series.coefficient(-1) - cx(1.0, 0.0)).norm() < 1e-10);
        assert!(
            (fit.series.coefficient(0) - cx(-crate::special::euler_gamma::<f64>(), 0.0)).norm()
                < 1e-10
        );
    }

    #[test]
    fn fit_constant_function() {
        let zs = circle_samples(0.1f64, 16);
        let samples: Vec<(Complex64, Complex64)> =
            zs.iter().map(|z| (*z, cx(2.5, -1.0))).collect();
        let fit = fit_laurent(&samples, (-2, 2), 1e-10).unwrap();
        assert!((fit.series.coefficient(0) - cx(2.5, -1.0)).norm() < 1e-12);
        assert!(fit.series.coefficient(-1).norm() < 1e-13);
    }

    #[test]
    fn recip_of_simple_zero() {
        // 1 / (2z + z^2) = (1/2) z^-1 (1 / (1 + z/2)) = 1/(2z) - 1/4 + z/8 ...
        let s = S::new(1, vec![cx(2.0, 0.0), cx(1.0, 0.0)], 3).unwrap();
        let inv = s.recip().unwrap();
        assert!((inv.coefficient(-1) - cx(0.5, 0.0)).norm() < 1e-14);
        assert!((inv.coefficient(0) - cx(-0.25, 0.0)).norm() < 1e-14);
        assert!((inv.coefficient(1) - cx(0.125, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eval_matches_polynomial() {
        let s = S::new(-1, vec![cx(2.0, 0.0), cx(1.0, 0.0), cx(3.0, 0.0)], 1).unwrap();
        let z = cx(0.2, 0.1);
        let direct = cx(2.0, 0.0) / z + cx(1.0, 0.0) + cx(3.0, 0.0) * z;
        assert!((s.eval(z) - direct).norm() < 1e-14);
    }
}
