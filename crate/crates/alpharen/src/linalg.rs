//! Dense little-matrix helpers for the loop-momentum quadratic forms.
//!
//! All matrices here are tiny (dimension = loop count or line count), so the
//! implementations favour clarity and determinism over blocking tricks.

use crate::error::{Error, Result};
use crate::float::{r, Real};

/// Row-major symmetric matrix storage with explicit dimension.
#[derive(Clone, Debug)]
pub struct SymMat<R> {
    pub n: usize,
    pub a: Vec<R>,
}

impl<R: Real> SymMat<R> {
    pub fn zeros(n: usize) -> Self {
        SymMat {
            n,
            a: vec![R::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: R) {
        self.a[i * self.n + j] += v;
        if i != j {
            self.a[j * self.n + i] += v;
        }
    }

    /// Cholesky factor `L` with `A = L L^T`. Fails on non-SPD input.
    pub fn cholesky(&self) -> Result<Chol<R>> {
        let n = self.n;
        let mut l = vec![R::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= R::zero() {
                        return Err(Error::SingularNetwork(format!(
                            "quadratic form not positive definite at pivot {i}"
                        )));
                    }
                    l[i * n + j] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Chol { n, l })
    }

    /// All eigenvalues by cyclic Jacobi rotations; deterministic sweep order.
    pub fn eigenvalues(&self) -> Vec<R> {
        let n = self.n;
        let mut a = self.a.clone();
        let tol = r::<R>(1e-14);
        for _sweep in 0..64 {
            let mut off = R::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            let scale: R = (0..n).map(|i| a[i * n + i] * a[i * n + i]).fold(R::zero(), |s, x| s + x);
            if off <= tol * tol * (scale + R::one()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == R::zero() {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (r::<R>(2.0) * apq);
                    let t = if theta >= R::zero() {
                        R::one() / (theta + (R::one() + theta * theta).sqrt())
                    } else {
                        -R::one() / (-theta + (R::one() + theta * theta).sqrt())
                    };
                    let cos = R::one() / (R::one() + t * t).sqrt();
                    let sin = t * cos;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = cos * akp - sin * akq;
                        a[k * n + q] = sin * akp + cos * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = cos * apk - sin * aqk;
                        a[q * n + k] = sin * apk + cos * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<R> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> R {
        self.eigenvalues()[0]
    }

    /// Smallest generalized eigenvalue of the pencil `(A, B)` with SPD `B`.
    pub fn min_generalized_eigenvalue(&self, b: &SymMat<R>) -> Result<R> {
        let lb = b.cholesky()?;
        let n = self.n;
        // M = L^-1 A L^-T
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let col: Vec<R> = (0..n).map(|i| self.get(i, j)).collect();
            cols.push(lb.forward(&col));
        }
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            let row: Vec<R> = (0..n).map(|j| cols[j][i]).collect();
            let sol = lb.forward(&row);
            for j in 0..n {
                m.a[i * n + j] = sol[j];
            }
        }
        // symmetrize against rounding
        let mut s = SymMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                s.a[i * n + j] = (m.a[i * n + j] + m.a[j * n + i]) / r::<R>(2.0);
            }
        }
        Ok(s.min_eigenvalue())
    }
}

/// Cholesky factor of an SPD matrix.
#[derive(Clone, Debug)]
pub struct Chol<R> {
    pub n: usize,
    l: Vec<R>,
}

impl<R: Real> Chol<R> {
    pub fn det(&self) -> R {
        let mut d = R::one();
        for i in 0..self.n {
            let li = self.l[i * self.n + i];
            d = d * li * li;
        }
        d
    }

    /// Solve `L y = b`.
    pub fn forward(&self, b: &[R]) -> Vec<R> {
        let n = self.n;
        let mut y = vec![R::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[R]) -> Vec<R> {
        let n = self.n;
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// `A^{-1}` as a dense symmetric matrix.
    pub fn inverse(&self) -> SymMat<R> {
        let n = self.n;
        let mut inv = SymMat::zeros(n);
        for j in 0..n {
            let mut e = vec![R::zero(); n];
            e[j] = R::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv.a[i * n + j] = col[i];
            }
        }
        inv
    }
}
