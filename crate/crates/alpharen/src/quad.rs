//! Deterministic quadrature: batched adaptive Gauss-Kronrod panels, nested
//! multi-dimensional integration with dependent bounds, Chebyshev fits for
//! radial Taylor data, and a seeded Monte-Carlo fallback for high dimension.
//!
//! Every integrand writes a whole batch of complex values per abscissa, so
//! one adaptive refinement pass serves all regulator samples and momentum
//! points at once; refinement decisions look at the worst batch entry, which
//! keeps the node set identical across the batch and the results
//! reproducible.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use num_complex::Complex;

// Gauss-Kronrod 7-15 pair on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadCfg<R> {
    pub rel_tol: R,
    /// Panels whose contribution falls below `abs_floor` (scaled by the
    /// running magnitude) are accepted without refinement.
    pub abs_floor: R,
    pub max_depth: u32,
}

impl<R: Real> Default for QuadCfg<R> {
    fn default() -> Self {
        QuadCfg {
            rel_tol: r(1e-8),
            abs_floor: r(1e-13),
            max_depth: 48,
        }
    }
}

fn batch_norm<R: Real>(v: &[C<R>]) -> R {
    v.iter().map(|c| c.norm()).fold(R::zero(), |a, b| a.max(b))
}

/// One Gauss-Kronrod pass over `[a, b]`; returns `(kronrod, gauss)` sums.
fn gk15<R: Real, F>(f: &mut F, a: R, b: R, m: usize) -> (Vec<C<R>>, Vec<C<R>>)
where
    F: FnMut(R, &mut [C<R>]),
{
    let half = (b - a) / r::<R>(2.0);
    let mid = (a + b) / r::<R>(2.0);
    let mut k_acc = vec![Complex::new(R::zero(), R::zero()); m];
    let mut g_acc = vec![Complex::new(R::zero(), R::zero()); m];
    let mut buf = vec![Complex::new(R::zero(), R::zero()); m];
    for (i, (xg, wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let gauss_w = if i % 2 == 1 { Some(WG[i / 2]) } else { None };
        let offsets: &[R] = if *xg == 0.0 {
            &[R::zero()]
        } else {
            // evaluate both mirror nodes
            &[]
        };
        let _ = offsets;
        let nodes: Vec<R> = if *xg == 0.0 {
            vec![mid]
        } else {
            vec![mid - half * r::<R>(*xg), mid + half * r::<R>(*xg)]
        };
        for x in nodes {
            for v in buf.iter_mut() {
                *v = Complex::new(R::zero(), R::zero());
            }
            f(x, &mut buf);
            let wkr = r::<R>(*wk) * half;
            for (acc, v) in k_acc.iter_mut().zip(buf.iter()) {
                *acc += v * Complex::new(wkr, R::zero());
            }
            if let Some(wg) = gauss_w {
                let wgr = r::<R>(wg) * half;
                for (acc, v) in g_acc.iter_mut().zip(buf.iter()) {
                    *acc += v * Complex::new(wgr, R::zero());
                }
            }
        }
    }
    (k_acc, g_acc)
}

struct Panel<R> {
    a: R,
    b: R,
    depth: u32,
    kron: Vec<C<R>>,
    err: R,
}

/// Adaptive panel integration of a batched integrand over `[a, b]`.
/// `breaks` seeds panel boundaries (partition ramps, cutoffs); endpoint
/// algebraic singularities are resolved by depth-capped bisection.
pub fn integrate_1d<R: Real, F>(
    f: &mut F,
    a: R,
    b: R,
    m: usize,
    breaks: &[R],
    cfg: &QuadCfg<R>,
    label: &str,
) -> Result<Vec<C<R>>>
where
    F: FnMut(R, &mut [C<R>]),
{
    if !(b > a) {
        return Ok(vec![Complex::new(R::zero(), R::zero()); m]);
    }
    let mut edges: Vec<R> = vec![a];
    for &x in breaks.iter() {
        if x > a && x < b {
            edges.push(x);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup_by(|x, y| (*x - *y).abs() <= R::epsilon() * (x.abs() + y.abs()));

    let mut stack: Vec<Panel<R>> = Vec::new();
    let mut scale = R::zero();
    for w in edges.windows(2) {
        let (pa, pb) = (w[0], w[1]);
        let (kron, gauss) = gk15(f, pa, pb, m);
        let err = {
            let mut e = R::zero();
            for (k, g) in kron.iter().zip(gauss.iter()) {
                e = e.max((k - g).norm());
            }
            e
        };
        scale = scale.max(batch_norm(&kron));
        stack.push(Panel {
            a: pa,
            b: pb,
            depth: 0,
            kron,
            err,
        });
    }

    let mut total = vec![Complex::new(R::zero(), R::zero()); m];
    let mut err_total = R::zero();
    let mut done: Vec<Panel<R>> = Vec::new();
    while let Some(p) = stack.pop() {
        let tol_here = (cfg.rel_tol * scale.max(R::min_positive_value()))
            .max(cfg.abs_floor * scale)
            / r::<R>(8.0);
        let negligible = batch_norm(&p.kron) + p.err < cfg.abs_floor * scale;
        if p.err <= tol_here || p.depth >= cfg.max_depth || negligible {
            err_total += p.err;
            done.push(p);
            continue;
        }
        let mid = (p.a + p.b) / r::<R>(2.0);
        if !(mid > p.a && mid < p.b) {
            err_total += p.err;
            done.push(p);
            continue;
        }
        for (pa, pb) in [(p.a, mid), (mid, p.b)] {
            let (kron, gauss) = gk15(f, pa, pb, m);
            let err = {
                let mut e = R::zero();
                for (k, g) in kron.iter().zip(gauss.iter()) {
                    e = e.max((k - g).norm());
                }
                e
            };
            scale = scale.max(batch_norm(&kron));
            stack.push(Panel {
                a: pa,
                b: pb,
                depth: p.depth + 1,
                kron,
                err,
            });
        }
    }
    // deterministic summation order
    done.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    for p in done.iter() {
        for (t, v) in total.iter_mut().zip(p.kron.iter()) {
            *t += v;
        }
    }
    let final_scale = batch_norm(&total).max(scale * r(1e-3)).max(R::min_positive_value());
    if err_total > cfg.rel_tol * final_scale * r(200.0) {
        return Err(Error::Quadrature {
            where_: label.to_string(),
            detail: format!(
                "accumulated error estimate {:e} vs scale {:e}",
                err_total.to_f64().unwrap_or(f64::NAN),
                final_scale.to_f64().unwrap_or(f64::NAN)
            ),
        });
    }
    Ok(total)
}

/// One integration dimension: bounds may depend on the outer coordinates.
/// Power maps soften endpoint singularities: with `map_pow_lo = m > 1` the
/// lower half is traversed as `x = a + u^m`, and correspondingly at the top.
pub struct Dim<'a, R> {
    pub lo: Box<dyn Fn(&[R]) -> R + Sync + 'a>,
    pub hi: Box<dyn Fn(&[R]) -> R + Sync + 'a>,
    pub breaks: Vec<R>,
    pub map_pow_lo: u32,
    pub map_pow_hi: u32,
}

impl<'a, R: Real> Dim<'a, R> {
    pub fn fixed(lo: R, hi: R, breaks: Vec<R>) -> Self {
        Dim {
            lo: Box::new(move |_| lo),
            hi: Box::new(move |_| hi),
            breaks,
            map_pow_lo: 1,
            map_pow_hi: 1,
        }
    }
}

/// Nested integration over `dims` (outermost first); the integrand sees the
/// full coordinate vector.
pub fn integrate_nd<R: Real, F>(
    dims: &[Dim<'_, R>],
    f: &mut F,
    m: usize,
    cfg: &QuadCfg<R>,
    label: &str,
) -> Result<Vec<C<R>>>
where
    F: FnMut(&[R], &mut [C<R>]),
{
    let mut coords: Vec<R> = Vec::with_capacity(dims.len());
    nest(dims, f, m, cfg, label, &mut coords)
}

fn nest<R: Real, F>(
    dims: &[Dim<'_, R>],
    f: &mut F,
    m: usize,
    cfg: &QuadCfg<R>,
    label: &str,
    coords: &mut Vec<R>,
) -> Result<Vec<C<R>>>
where
    F: FnMut(&[R], &mut [C<R>]),
{
    let level = coords.len();
    let dim = &dims[level];
    let a = (dim.lo)(coords);
    let b = (dim.hi)(coords);
    if !(b > a) {
        return Ok(vec![Complex::new(R::zero(), R::zero()); m]);
    }
    let mut failure: Option<Error> = None;
    let last = dims.len() == level + 1;
    let mut eval_x = |x: R, out: &mut [C<R>], coords: &mut Vec<R>, failure: &mut Option<Error>| {
        if failure.is_some() {
            return;
        }
        coords.push(x);
        if last {
            f(coords, out);
        } else {
            match nest(dims, f, m, cfg, label, coords) {
                Ok(vals) => out.copy_from_slice(&vals),
                Err(e) => *failure = Some(e),
            }
        }
        coords.pop();
    };
    let mut total = vec![Complex::new(R::zero(), R::zero()); m];
    let (mlo, mhi) = (dim.map_pow_lo.max(1), dim.map_pow_hi.max(1));
    if mlo == 1 && mhi == 1 {
        let mut g = |x: R, out: &mut [C<R>]| eval_x(x, out, coords, &mut failure);
        total = integrate_1d(&mut g, a, b, m, &dim.breaks, cfg, label)?;
    } else {
        // split at the midpoint; power-map each singular half
        let mid = (a + b) / r::<R>(2.0);
        for (xa, xb, pw, from_lo) in [(a, mid, mlo, true), (mid, b, mhi, false)] {
            let pwi = pw as i32;
            let pwr = r::<R>(pw as f64);
            let ulen = (xb - xa).powf(R::one() / pwr);
            let to_x = |u: R| {
                if from_lo {
                    xa + u.powi(pwi)
                } else {
                    xb - u.powi(pwi)
                }
            };
            let mut ubreaks: Vec<R> = dim
                .breaks
                .iter()
                .filter(|&&bk| bk > xa && bk < xb)
                .map(|&bk| {
                    let d = if from_lo { bk - xa } else { xb - bk };
                    d.powf(R::one() / pwr)
                })
                .collect();
            ubreaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut g = |u: R, out: &mut [C<R>]| {
                let x = to_x(u);
                eval_x(x, out, coords, &mut failure);
                let jac = pwr * u.powi(pwi - 1);
                for v in out.iter_mut() {
                    *v = *v * Complex::new(jac, R::zero());
                }
            };
            let part = integrate_1d(&mut g, R::zero(), ulen, m, &ubreaks, cfg, label)?;
            for (t, v) in total.iter_mut().zip(part.iter()) {
                *t += v;
            }
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Seeded plain Monte-Carlo over a fixed box, for dimensions past the
/// deterministic limit. The caller logs the seed.
pub fn monte_carlo_nd<R: Real, F>(
    ranges: &[(R, R)],
    f: &mut F,
    m: usize,
    samples: u64,
    seed: u64,
) -> Vec<C<R>>
where
    F: FnMut(&[R], &mut [C<R>]),
{
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![Complex::new(R::zero(), R::zero()); m];
    let mut buf = vec![Complex::new(R::zero(), R::zero()); m];
    let mut point = vec![R::zero(); ranges.len()];
    let mut vol = R::one();
    for (lo, hi) in ranges.iter() {
        vol = vol * (*hi - *lo);
    }
    for _ in 0..samples {
        for (x, (lo, hi)) in point.iter_mut().zip(ranges.iter()) {
            let u: f64 = rng.gen_range(0.0..1.0);
            *x = *lo + (*hi - *lo) * r::<R>(u);
        }
        for v in buf.iter_mut() {
            *v = Complex::new(R::zero(), R::zero());
        }
        f(&point, &mut buf);
        for (a, v) in acc.iter_mut().zip(buf.iter()) {
            *a += v;
        }
    }
    let w = vol / r::<R>(samples as f64);
    acc.into_iter().map(|c| c * Complex::new(w, R::zero())).collect()
}

/// Chebyshev interpolation of a batched function on `[0, b]`.
pub struct ChebFit<R> {
    pub b: R,
    /// `coeffs[k][j]`: k-th Chebyshev coefficient of batch entry j, in the
    /// variable `t = 2x/b - 1`.
    pub coeffs: Vec<Vec<C<R>>>,
}

pub fn cheb_fit<R: Real, F>(f: &mut F, b: R, n: usize, m: usize) -> ChebFit<R>
where
    F: FnMut(R, &mut [C<R>]),
{
    let mut values: Vec<Vec<C<R>>> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let t = r::<R>((std::f64::consts::PI * j as f64 / n as f64).cos());
        let x = b * (R::one() + t) / r::<R>(2.0);
        let mut buf = vec![Complex::new(R::zero(), R::zero()); m];
        f(x, &mut buf);
        values.push(buf);
    }
    let mut coeffs = vec![vec![Complex::new(R::zero(), R::zero()); m]; n + 1];
    for k in 0..=n {
        for j in 0..=n {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            let c = r::<R>(w * (std::f64::consts::PI * (j * k) as f64 / n as f64).cos());
            for (acc, v) in coeffs[k].iter_mut().zip(values[j].iter()) {
                *acc += v * Complex::new(c, R::zero());
            }
        }
        let norm = r::<R>(if k == 0 || k == n { 1.0 } else { 2.0 } / n as f64);
        for acc in coeffs[k].iter_mut() {
            *acc = *acc * Complex::new(norm, R::zero());
        }
    }
    ChebFit { b, coeffs }
}

impl<R: Real> ChebFit<R> {
    /// Taylor coefficients at `x = 0` (in powers of `x`) through `orders-1`,
    /// from the interpolant. Only reliable for low orders.
    pub fn taylor(&self, orders: usize) -> Vec<Vec<C<R>>> {
        let m = self.coeffs.first().map(|c| c.len()).unwrap_or(0);
        let n = self.coeffs.len();
        // shifted Chebyshev on [0,b]: T_k(2x/b - 1), monomial expansion in
        // s = x/b via the recurrence T_{k+1} = (4s-2) T_k - T_{k-1}
        let mut tk: Vec<Vec<f64>> = vec![vec![1.0], vec![-1.0, 2.0]];
        for k in 2..n {
            let prev = &tk[k - 1];
            let prev2 = &tk[k - 2];
            let mut next = vec![0.0; k + 1];
            for (i, c) in prev.iter().enumerate() {
                next[i + 1] += 4.0 * c;
                next[i] -= 2.0 * c;
            }
            for (i, c) in prev2.iter().enumerate() {
                next[i] -= c;
            }
            tk.push(next);
        }
        let mut out = vec![vec![Complex::new(R::zero(), R::zero()); m]; orders];
        for (k, cheb_k) in self.coeffs.iter().enumerate() {
            let poly = &tk[k];
            for (ord, row) in out.iter_mut().enumerate() {
                if ord < poly.len() && poly[ord] != 0.0 {
                    let factor = r::<R>(poly[ord]) / self.b.powi(ord as i32);
                    for (acc, v) in row.iter_mut().zip(cheb_k.iter()) {
                        *acc += v * Complex::new(factor, R::zero());
                    }
                }
            }
        }
        out
    }

    pub fn eval(&self, x: R) -> Vec<C<R>> {
        let t = r::<R>(2.0) * x / self.b - R::one();
        let m = self.coeffs.first().map(|c| c.len()).unwrap_or(0);
        // Clenshaw
        let mut b1 = vec![Complex::new(R::zero(), R::zero()); m];
        let mut b2 = vec![Complex::new(R::zero(), R::zero()); m];
        for k in (1..self.coeffs.len()).rev() {
            let mut b0 = self.coeffs[k].clone();
            for i in 0..m {
                b0[i] += b1[i] * Complex::new(r::<R>(2.0) * t, R::zero()) - b2[i];
            }
            b2 = std::mem::replace(&mut b1, b0);
        }
        let mut out = self.coeffs[0].clone();
        for i in 0..m {
            out[i] += b1[i] * Complex::new(t, R::zero()) - b2[i];
        }
        out
    }
}
