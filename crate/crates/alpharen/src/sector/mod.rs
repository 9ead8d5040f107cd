//! Numerical parameter-space integration: the smooth partition of unity on
//! the simplex, radial analytic continuation, and the sector evaluator.

pub mod eval;
pub mod radial;

pub use eval::{EvalContext, EvalGrid, NumericConfig};
pub use radial::AnalyticRadial;

use crate::error::{Error, Result};
use crate::float::{r, Real};

/// Smooth partition of unity on the simplex indexed by the subsets of small
/// lines. Member `A` is supported where the lines in `A` are small and the
/// others are not.
#[derive(Clone, Debug)]
pub struct SectorPartition<R> {
    pub n: usize,
    pub delta: R,
    pub gamma: R,
}

impl<R: Real> SectorPartition<R> {
    /// `delta` defaults to `1/(4n)`; the constraint `delta (1+gamma) < 1/n`
    /// keeps the all-small subset empty on the simplex.
    pub fn build(n: usize, delta: Option<R>, gamma: R) -> Result<Self> {
        if n == 0 {
            return Err(Error::ParamConstraint("empty line set".into()));
        }
        let delta = delta.unwrap_or_else(|| R::one() / r::<R>(4.0 * n as f64));
        if !(delta > R::zero() && gamma > R::zero()) {
            return Err(Error::ParamConstraint("delta, gamma must be positive".into()));
        }
        if delta * (R::one() + gamma) >= R::one() / r::<R>(n as f64) {
            return Err(Error::ParamConstraint(format!(
                "delta (1+gamma) must stay below 1/n = 1/{n}"
            )));
        }
        Ok(SectorPartition { n, delta, gamma })
    }

    /// All proper subsets of the line index set, the full set excluded,
    /// ascending by bitmask.
    pub fn sectors(&self) -> impl Iterator<Item = u64> {
        let full: u64 = (1 << self.n) - 1;
        (0..full).chain(std::iter::empty())
    }

    /// C^2 ramp: 0 below the window, 1 above.
    fn ramp_up(&self, x: R, lo: R, hi: R) -> R {
        if x <= lo {
            R::zero()
        } else if x >= hi {
            R::one()
        } else {
            let t = (x - lo) / (hi - lo);
            t * t * t * (r::<R>(10.0) - r::<R>(15.0) * t + r::<R>(6.0) * t * t)
        }
    }

    /// Raw bump for subset `a`: 1 on the open sector, 0 outside its closed
    /// enlargement.
    pub fn eta(&self, a: u64, beta: &[R]) -> R {
        let lo = self.delta * (R::one() - self.gamma);
        let hi = self.delta * (R::one() + self.gamma);
        let mut v = R::one();
        for (i, &b) in beta.iter().enumerate() {
            let f = if a & (1 << i) != 0 {
                // small line: falls from 1 at delta to 0 at delta(1+gamma)
                R::one() - self.ramp_up(b, self.delta, hi)
            } else {
                // large line: rises from 0 at delta(1-gamma) to 1 at delta
                self.ramp_up(b, lo, self.delta)
            };
            if f == R::zero() {
                return R::zero();
            }
            v = v * f;
        }
        v
    }

    /// Normalized member: `eta_a / sum_b eta_b`. The sum is at least one
    /// everywhere on the simplex.
    pub fn eta_tilde(&self, a: u64, beta: &[R]) -> R {
        let va = self.eta(a, beta);
        if va == R::zero() {
            return R::zero();
        }
        va / self.eta_sum(beta)
    }

    pub fn eta_sum(&self, beta: &[R]) -> R {
        // only subsets between {i : beta_i < delta} and {i : beta_i < delta(1+gamma)}
        // can contribute; enumerate the difference set
        let mut base: u64 = 0;
        let mut flex: Vec<usize> = Vec::new();
        let lo = self.delta;
        let hi = self.delta * (R::one() + self.gamma);
        let lo2 = self.delta * (R::one() - self.gamma);
        for (i, &b) in beta.iter().enumerate() {
            if b < lo2 {
                base |= 1 << i;
            } else if b < hi {
                flex.push(i);
            }
        }
        let _ = lo;
        let full: u64 = (1 << self.n) - 1;
        let mut total = R::zero();
        for mask in 0..(1u64 << flex.len()) {
            let mut a = base;
            for (j, &i) in flex.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    a |= 1 << i;
                }
            }
            if a == full {
                continue;
            }
            total += self.eta(a, beta);
        }
        total
    }

    /// Ramp breakpoints, used to seed quadrature panels.
    pub fn breakpoints(&self) -> Vec<R> {
        vec![
            self.delta * (R::one() - self.gamma),
            self.delta,
            self.delta * (R::one() + self.gamma),
        ]
    }

    /// Upper edge of the small-line support.
    pub fn small_hi(&self) -> R {
        self.delta * (R::one() + self.gamma)
    }

    /// Lower edge of the large-line support.
    pub fn large_lo(&self) -> R {
        self.delta * (R::one() - self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn simplex_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut raw: Vec<f64> = (0..n).map(|_| -f64::ln(rng.gen_range(1e-12..1.0))).collect();
                let s: f64 = raw.iter().sum();
                for x in raw.iter_mut() {
                    *x /= s;
                }
                raw
            })
            .collect()
    }

    #[test]
    fn single_line_partition_is_trivial() {
        let p = SectorPartition::<f64>::build(1, None, 0.125).unwrap();
        assert!((p.eta_tilde(0, &[1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partition_sums_to_one_n2() {
        let p = SectorPartition::<f64>::build(2, None, 0.125).unwrap();
        for pt in simplex_points(2, 500, 3) {
            let total: f64 = (0..3u64).map(|a| p.eta_tilde(a, &pt)).sum();
            assert!((total - 1.0).abs() < 1e-12, "sum {total} at {pt:?}");
        }
        // dense 1-d sweep across the ramps
        for k in 0..=2000 {
            let b1 = k as f64 / 2000.0;
            let pt = [b1, 1.0 - b1];
            let total: f64 = (0..3u64).map(|a| p.eta_tilde(a, &pt)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_sums_to_one_n3_and_n5() {
        for n in [3usize, 5] {
            let p = SectorPartition::<f64>::build(n, None, 0.125).unwrap();
            let full: u64 = (1 << n) - 1;
            for pt in simplex_points(n, 400, 17) {
                let total: f64 = (0..full).map(|a| p.eta_tilde(a, &pt)).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn member_vanishes_near_foreign_small_face() {
        // eta_tilde_{A'} = 0 near X_A when A is not contained in A'
        let p = SectorPartition::<f64>::build(3, None, 0.125).unwrap();
        // X_{{0}}: beta_0 = 0; any A' without line 0 must vanish there
        for a_prime in [0b000u64, 0b010, 0b100, 0b110] {
            let v = p.eta_tilde(a_prime, &[1e-9, 0.5, 0.5 - 1e-9]);
            assert_eq!(v, 0.0, "sector {a_prime:b} should vanish near X_{{0}}");
        }
        // sectors containing line 0 can be nonzero there
        let v = p.eta_tilde(0b001, &[1e-9, 0.5, 0.5 - 1e-9]);
        assert!(v > 0.0);
    }

    #[test]
    fn full_subset_is_excluded_and_unreachable() {
        let p = SectorPartition::<f64>::build(2, None, 0.125).unwrap();
        // all lines below delta(1+gamma) simultaneously is impossible on the
        // simplex: 2 * delta(1+gamma) < 1
        assert!(2.0 * p.small_hi() < 1.0);
    }

    #[test]
    fn constraint_violations_rejected() {
        assert!(SectorPartition::<f64>::build(2, Some(0.5), 0.125).is_err());
        assert!(SectorPartition::<f64>::build(0, None, 0.125).is_err());
        assert!(SectorPartition::<f64>::build(2, Some(0.1), -0.5).is_err());
    }

    #[test]
    fn empty_sector_dominates_interior_for_small_delta() {
        let p = SectorPartition::<f64>::build(3, Some(1e-3), 0.125).unwrap();
        let pt = [0.3, 0.3, 0.4];
        assert!((p.eta_tilde(0, &pt) - 1.0).abs() < 1e-15);
    }
}
