//! Polynomials in line momenta built from scalar invariants: numeric
//! constants, the mass-squared token, and dot products `p_a.p_b`.
//!
//! Degree-one momenta never appear alone (only inside dots), so every
//! monomial is a scalar and monomial momentum degree is even.

use crate::float::Real;
use crate::graph::LineId;
use std::collections::BTreeMap;

/// Product of dot factors times a power of the mass-squared token.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub mass2_pow: u32,
    /// Each pair sorted, list sorted: canonical representative.
    pub dots: Vec<(LineId, LineId)>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial {
            mass2_pow: 0,
            dots: Vec::new(),
        }
    }

    pub fn dot(a: LineId, b: LineId) -> Self {
        let pair = if a <= b { (a, b) } else { (b, a) };
        Monomial {
            mass2_pow: 0,
            dots: vec![pair],
        }
    }

    pub fn mass2() -> Self {
        Monomial {
            mass2_pow: 1,
            dots: Vec::new(),
        }
    }

    pub fn momentum_degree(&self) -> usize {
        2 * self.dots.len()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut dots = self.dots.clone();
        dots.extend(other.dots.iter().cloned());
        dots.sort();
        Monomial {
            mass2_pow: self.mass2_pow + other.mass2_pow,
            dots,
        }
    }
}

/// Finite sum of monomials with scalar coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumPolynomial<R> {
    terms: BTreeMap<Monomial, R>,
}

impl<R: Real> Default for MomentumPolynomial<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Real> MomentumPolynomial<R> {
    pub fn zero() -> Self {
        MomentumPolynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(cv: R) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::unit(), cv);
        p
    }

    pub fn one() -> Self {
        Self::constant(R::one())
    }

    pub fn dot(a: LineId, b: LineId) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::dot(a, b), R::one());
        p
    }

    pub fn mass2() -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::mass2(), R::one());
        p
    }

    pub fn add_term(&mut self, m: Monomial, cv: R) {
        let entry = self.terms.entry(m).or_insert_with(R::zero);
        *entry += cv;
        if *entry == R::zero() {
            // keep the map free of exact zeros
            let key = self
                .terms
                .iter()
                .find(|(_, v)| **v == R::zero())
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.dots.is_empty() && m.mass2_pow == 0)
    }

    pub fn constant_part(&self) -> R {
        self.terms
            .get(&Monomial::unit())
            .copied()
            .unwrap_or_else(R::zero)
    }

    /// Momentum degree (mass token counts zero).
    pub fn momentum_degree(&self) -> usize {
        self.terms
            .keys()
            .map(Monomial::momentum_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, cv) in other.terms.iter() {
            out.add_term(m.clone(), *cv);
        }
        out
    }

    pub fn scaled(&self, s: R) -> Self {
        let mut out = Self::zero();
        if s == R::zero() {
            return out;
        }
        for (m, cv) in self.terms.iter() {
            out.add_term(m.clone(), *cv * s);
        }
        out
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in other.terms.iter() {
                out.add_term(ma.mul(mb), *ca * *cb);
            }
        }
        out
    }

    /// Replace `p_target` by the linear combination `sum_i c_i p_i` in every
    /// dot factor. Dots expand bilinearly; `target` may appear on both sides.
    pub fn substitute(&self, target: &LineId, replacement: &[(LineId, R)]) -> Self {
        let mut out = Self::zero();
        for (mono, coef) in self.terms.iter() {
            // expand each dot into a polynomial, then multiply them back up
            let mut acc = Self::constant(*coef);
            for (a, b) in mono.dots.iter() {
                let factor = expand_dot(a, b, target, replacement);
                acc = acc.times(&factor);
            }
            for _ in 0..mono.mass2_pow {
                acc = acc.times(&Self::mass2());
            }
            out = out.plus(&acc);
        }
        out
    }

    /// Numeric evaluation given 4-momenta per line and the mass-squared value.
    pub fn eval(&self, momenta: &BTreeMap<LineId, [R; 4]>, mass2: R) -> Option<R> {
        let mut total = R::zero();
        for (mono, coef) in self.terms.iter() {
            let mut v = *coef;
            for (a, b) in mono.dots.iter() {
                let pa = momenta.get(a)?;
                let pb = momenta.get(b)?;
                let mut d = R::zero();
                for k in 0..4 {
                    d += pa[k] * pb[k];
                }
                v = v * d;
            }
            for _ in 0..mono.mass2_pow {
                v = v * mass2;
            }
            total += v;
        }
        Some(total)
    }

    /// Drop terms with coefficients below `tol` in magnitude.
    pub fn chopped(&self, tol: R) -> Self {
        let mut out = Self::zero();
        for (m, cv) in self.terms.iter() {
            if cv.abs() > tol {
                out.add_term(m.clone(), *cv);
            }
        }
        out
    }
}

fn expand_dot<R: Real>(
    a: &LineId,
    b: &LineId,
    target: &LineId,
    replacement: &[(LineId, R)],
) -> MomentumPolynomial<R> {
    let sides = |x: &LineId| -> Vec<(LineId, R)> {
        if x == target {
            replacement.to_vec()
        } else {
            vec![(x.clone(), R::one())]
        }
    };
    let mut out = MomentumPolynomial::zero();
    for (la, ca) in sides(a) {
        for (lb, cb) in sides(b).into_iter() {
            out.add_term(Monomial::dot(la.clone(), lb), ca * cb);
        }
    }
    out
}

impl<R: Real> std::fmt::Display for MomentumPolynomial<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, cv) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            if m.dots.is_empty() && m.mass2_pow == 0 {
                factors.push(format!("{cv}"));
            } else {
                if *cv != R::one() {
                    factors.push(format!("{cv}"));
                }
                for _ in 0..m.mass2_pow {
                    factors.push("m2".to_string());
                }
                for (a, b) in m.dots.iter() {
                    factors.push(format!("p_{a}.p_{b}"));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
