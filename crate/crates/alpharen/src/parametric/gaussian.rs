//! Exact loop-momentum integration at fixed line parameters: the Gaussian
//! reduction with shifted-mean moment factors for polynomial vertices.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use crate::graph::{FeynmanDiagram, LineId};
use crate::linalg::SymMat;
use crate::mompoly::Monomial;
use crate::parametric::basis::{ExternalMomenta, LoopBasis};
use num_complex::Complex;

/// Everything the quadratic minimization yields at one parameter point.
#[derive(Clone, Debug)]
pub struct GaussianCore<R> {
    /// Determinant of the loop form (the Symanzik polynomial value).
    pub u: R,
    /// `min_q sum_r alpha_r p_r(q)^2`, the momentum part of the exponent.
    pub vmin: R,
    /// Minimizing loop momenta.
    pub qstar: Vec<[R; 4]>,
    /// Line momenta at the minimum (the physical current distribution).
    pub currents: Vec<[R; 4]>,
    /// Inverse loop form, for moment contractions.
    pub qinv: SymMat<R>,
}

/// Loop quadratic form data: `sum_r alpha_r p_r^2 = q^T Q q + 2 b.q + c`.
pub struct QuadraticForm<R> {
    pub q: SymMat<R>,
    /// One 4-vector per loop direction.
    pub b: Vec<[R; 4]>,
    pub c: R,
}

pub fn quadratic_form<R: Real>(
    basis: &LoopBasis<R>,
    alpha: &[R],
    p: &ExternalMomenta<R>,
) -> Result<QuadraticForm<R>> {
    if alpha.iter().any(|a| *a <= R::zero()) {
        return Err(Error::NonPositiveAlpha);
    }
    let l = basis.loop_count();
    let n = basis.lines.len();
    let mut q = SymMat::zeros(l);
    for i in 0..l {
        for j in i..l {
            let mut s = R::zero();
            for ri in 0..n {
                let cij = basis.cycle[ri][i] * basis.cycle[ri][j];
                if cij != 0 {
                    s += alpha[ri] * r::<R>(cij as f64);
                }
            }
            q.set(i, j, s);
        }
    }
    let ext: Vec<[R; 4]> = (0..n)
        .map(|ri| {
            let mut d = [R::zero(); 4];
            for (e, cv) in basis.route[ri].iter() {
                let pe = p.get(e);
                for k in 0..4 {
                    d[k] += *cv * pe[k];
                }
            }
            d
        })
        .collect();
    let mut b = vec![[R::zero(); 4]; l];
    for i in 0..l {
        for ri in 0..n {
            let cri = basis.cycle[ri][i];
            if cri != 0 {
                let s = alpha[ri] * r::<R>(cri as f64);
                for k in 0..4 {
                    b[i][k] += s * ext[ri][k];
                }
            }
        }
    }
    let mut c = R::zero();
    for ri in 0..n {
        let d2 = ext[ri].iter().fold(R::zero(), |a, x| a + *x * *x);
        c += alpha[ri] * d2;
    }
    Ok(QuadraticForm { q, b, c })
}

/// Complete the square: minimizing loop momenta, currents, determinant.
pub fn gaussian_core<R: Real>(
    basis: &LoopBasis<R>,
    alpha: &[R],
    p: &ExternalMomenta<R>,
) -> Result<GaussianCore<R>> {
    let form = quadratic_form(basis, alpha, p)?;
    let l = basis.loop_count();
    let chol = form.q.cholesky().map_err(|_| {
        Error::SingularNetwork("loop form degenerate (boundary singularity)".into())
    })?;
    let mut qstar = vec![[R::zero(); 4]; l];
    for k in 0..4 {
        let rhs: Vec<R> = (0..l).map(|i| -form.b[i][k]).collect();
        let sol = chol.solve(&rhs);
        for i in 0..l {
            qstar[i][k] = sol[i];
        }
    }
    let currents: Vec<[R; 4]> = (0..basis.lines.len())
        .map(|ri| basis.line_momentum(ri, &qstar, p))
        .collect();
    let mut vmin = R::zero();
    for (ri, cur) in currents.iter().enumerate() {
        let sq = cur.iter().fold(R::zero(), |a, x| a + *x * *x);
        vmin += alpha[ri] * sq;
    }
    let qinv = chol.inverse();
    Ok(GaussianCore {
        u: chol.det(),
        vmin,
        qstar,
        currents,
        qinv,
    })
}

/// Moment factor of the product of all vertex operators against the shifted
/// Gaussian, split by contraction count: entry `j` of the result collects
/// the terms with `j` propagator pairings, which scale as `u^{-j}` under a
/// global rescaling of the parameters.
///
/// Supports total momentum degree up to four (two dot factors).
pub fn moment_factor_terms<R: Real>(
    d: &FeynmanDiagram<R>,
    basis: &LoopBasis<R>,
    core: &GaussianCore<R>,
    p: &ExternalMomenta<R>,
) -> Result<Vec<R>> {
    moment_terms_from(d, basis, &core.currents, &core.qinv, p)
}

/// Moment factor from precomputed currents and inverse loop form.
pub fn moment_terms_from<R: Real>(
    d: &FeynmanDiagram<R>,
    basis: &LoopBasis<R>,
    currents: &[[R; 4]],
    qinv: &crate::linalg::SymMat<R>,
    p: &ExternalMomenta<R>,
) -> Result<Vec<R>> {
    // product of all vertex polynomials
    let mut product = crate::mompoly::MomentumPolynomial::one();
    for (_, op) in d.vertex_ops.iter() {
        if op.is_constant() {
            product = product.scaled(op.poly().constant_part());
        } else {
            product = product.times(op.poly());
        }
    }
    let mass2 = uniform_mass2(d)?;

    // mean momentum of a line symbol: internal -> current, external -> fixed
    let mean = |l: &LineId| -> Result<[R; 4]> {
        if let Some(ri) = basis.line_index(l) {
            Ok(currents[ri])
        } else if p.map.contains_key(l) {
            Ok(p.get(l))
        } else {
            Err(Error::Graph(format!("operator references unknown line {l}")))
        }
    };
    // per-component covariance between two line symbols
    let cov = |a: &LineId, b: &LineId| -> R {
        let (Some(ra), Some(rb)) = (basis.line_index(a), basis.line_index(b)) else {
            return R::zero();
        };
        let l = basis.loop_count();
        let mut s = R::zero();
        for i in 0..l {
            for j in 0..l {
                let cc = basis.cycle[ra][i] * basis.cycle[rb][j];
                if cc != 0 {
                    s += r::<R>(cc as f64) * qinv.get(i, j);
                }
            }
        }
        s / r::<R>(2.0)
    };
    let dot = |x: &[R; 4], y: &[R; 4]| -> R {
        let mut s = R::zero();
        for k in 0..4 {
            s += x[k] * y[k];
        }
        s
    };

    let mut out = vec![R::zero(); 3];
    for (mono, coef) in product.terms() {
        let mut base = *coef;
        if mono.mass2_pow > 0 {
            let m2 = mass2.ok_or_else(|| {
                Error::ParamConstraint(
                    "mass-squared token requires a uniform internal mass".into(),
                )
            })?;
            for _ in 0..mono.mass2_pow {
                base = base * m2;
            }
        }
        match mono.dots.len() {
            0 => out[0] += base,
            1 => {
                let (a, b) = &mono.dots[0];
                let (ma, mb) = (mean(a)?, mean(b)?);
                out[0] += base * dot(&ma, &mb);
                out[1] += base * r::<R>(4.0) * cov(a, b);
            }
            2 => {
                let (a, b) = &mono.dots[0];
                let (cc, dd) = &mono.dots[1];
                let (ma, mb, mc, md) = (mean(a)?, mean(b)?, mean(cc)?, mean(dd)?);
                let (kab, kcd) = (cov(a, b), cov(cc, dd));
                let (kac, kad) = (cov(a, cc), cov(a, dd));
                let (kbc, kbd) = (cov(b, cc), cov(b, dd));
                let four = r::<R>(4.0);
                out[0] += base * dot(&ma, &mb) * dot(&mc, &md);
                out[1] += base
                    * (four * kab * dot(&mc, &md)
                        + four * kcd * dot(&ma, &mb)
                        + kac * dot(&mb, &md)
                        + kad * dot(&mb, &mc)
                        + kbc * dot(&ma, &md)
                        + kbd * dot(&ma, &mc));
                out[2] += base
                    * (r::<R>(16.0) * kab * kcd + four * kac * kbd + four * kad * kbc);
            }
            deg => return Err(Error::DegreeCap(2 * deg)),
        }
    }
    Ok(out)
}

fn uniform_mass2<R: Real>(d: &FeynmanDiagram<R>) -> Result<Option<R>> {
    let mut it = d.masses.values();
    let Some(first) = it.next() else {
        return Ok(None);
    };
    for m in it {
        if *m != *first {
            return Ok(None);
        }
    }
    Ok(Some(*first * *first))
}

/// Maximum possible contraction count for the diagram's vertex operators;
/// bounds the `u^{-j}` tail of the moment factor.
pub fn max_pairings<R: Real>(d: &FeynmanDiagram<R>) -> usize {
    d.op_degree_sum() / 2
}

/// The regulated integrand value at one parameter point: the loop-momentum
/// integral of the product of propagator Gaussians and vertex polynomials,
/// times the per-line regulator powers and the mass damping.
pub fn gaussian_reduce<R: Real>(
    d: &FeynmanDiagram<R>,
    basis: &LoopBasis<R>,
    alpha: &[R],
    p: &ExternalMomenta<R>,
    z: C<R>,
) -> Result<C<R>> {
    if alpha.iter().any(|a| *a <= R::zero()) {
        return Err(Error::NonPositiveAlpha);
    }
    let core = gaussian_core(basis, alpha, p)?;
    let moments = moment_factor_terms(d, basis, &core, p)?;
    let moment_sum: R = moments.iter().fold(R::zero(), |a, x| a + *x);
    let l = basis.loop_count();
    let mut mass_term = R::zero();
    for (ri, lid) in basis.lines.iter().enumerate() {
        let m = d.masses[lid];
        mass_term += alpha[ri] * m * m;
    }
    let pi = R::PI();
    let prefactor = pi.powi(2 * l as i32) / (core.u * core.u) * (-core.vmin - mass_term).exp();
    let ln_alpha_sum: R = alpha.iter().fold(R::zero(), |a, x| a + x.ln());
    let reg = (z * Complex::new(ln_alpha_sum, R::zero())).exp();
    Ok(reg * Complex::new(prefactor * moment_sum, R::zero()))
}

/// Evaluate at `(lambda * alpha, p / sqrt(lambda))`.
pub fn scale_lambda<R: Real>(
    d: &FeynmanDiagram<R>,
    basis: &LoopBasis<R>,
    alpha: &[R],
    p: &ExternalMomenta<R>,
    z: C<R>,
    lambda: R,
) -> Result<C<R>> {
    let scaled_alpha: Vec<R> = alpha.iter().map(|a| *a * lambda).collect();
    let scaled_p = p.scaled(R::one() / lambda.sqrt());
    gaussian_reduce(d, basis, &scaled_alpha, &scaled_p, z)
}

/// True when every monomial of every vertex operator is homogeneous in the
/// momenta (no mass token, single momentum degree per operator).
pub fn ops_homogeneous<R: Real>(d: &FeynmanDiagram<R>) -> bool {
    d.vertex_ops.values().all(|op| {
        let degs: std::collections::BTreeSet<usize> = op
            .poly()
            .terms()
            .map(|(m, _)| m.momentum_degree())
            .collect();
        op.poly().terms().all(|(m, _)| m.mass2_pow == 0) && degs.len() <= 1
    })
}

/// Degree-aware zero test used by tests; a monomial is even in the momenta.
pub fn monomial_degree(m: &Monomial) -> usize {
    m.momentum_degree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, lid, tadpole};
    use num_complex::Complex64;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tadpole_closed_form() {
        // alpha^z pi^2 alpha^-2 e^{-alpha m^2}
        let d = tadpole::<f64>(1.3, 2);
        let basis = LoopBasis::build(&d).unwrap();
        let p = ExternalMomenta::zero::<f64>(&d);
        let z = cx(0.35, 0.2);
        let alpha = [0.7];
        let got = gaussian_reduce(&d, &basis, &alpha, &p, z).unwrap();
        let pi = std::f64::consts::PI;
        let want = cx(0.7, 0.0).powc(z) * pi.powi(2) / 0.7f64.powi(2)
            * (-0.7 * 1.3f64 * 1.3).exp();
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn bubble_at_zero_momentum() {
        let d = banana::<f64>(2, 1.0);
        let basis = LoopBasis::build(&d).unwrap();
        let p = ExternalMomenta::zero::<f64>(&d);
        let z = cx(0.5, -0.1);
        let (a1, a2) = (0.4, 1.1);
        let got = gaussian_reduce(&d, &basis, &[a1, a2], &p, z).unwrap();
        let pi = std::f64::consts::PI;
        let want =
            cx(a1 * a2, 0.0).powc(z) * pi.powi(2) / (a1 + a2).powi(2) * (-(a1 + a2)).exp();
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn bubble_at_general_momentum_completes_the_square() {
        let d = banana::<f64>(2, 1.0);
        let basis = LoopBasis::build(&d).unwrap();
        let mut p = ExternalMomenta::zero::<f64>(&d);
        let pv = [0.8, -0.3, 0.2, 0.5];
        p.set(&lid("x1"), pv);
        p.set(&lid("x2"), pv);
        let z = cx(0.0, 0.0);
        let (a1, a2) = (0.9, 0.35);
        let got = gaussian_reduce(&d, &basis, &[a1, a2], &p, z).unwrap();
        let p2: f64 = pv.iter().map(|x| x * x).sum();
        let pi = std::f64::consts::PI;
        let want = pi.powi(2) / (a1 + a2).powi(2)
            * (-(a1 * a2 / (a1 + a2)) * p2 - (a1 + a2)).exp();
        assert!((got.re - want).abs() < 1e-12 * want.abs());
        assert!(got.im.abs() < 1e-14);
    }

    #[test]
    fn bubble_momentum_factor_matches_monte_carlo() {
        // direct 4d Monte-Carlo of the two-propagator Gaussian at fixed alpha
        use rand::{Rng, SeedableRng};
        let d = banana::<f64>(2, 1.0);
        let basis = LoopBasis::build(&d).unwrap();
        let mut p = ExternalMomenta::zero::<f64>(&d);
        let pv = [1.0, 0.0, 0.0, 0.0];
        p.set(&lid("x1"), pv);
        p.set(&lid("x2"), pv);
        let (a1, a2) = (0.8, 0.6);
        let exact = gaussian_reduce(&d, &basis, &[a1, a2], &p, cx(0.0, 0.0))
            .unwrap()
            .re
            * ((a1 + a2) * 1.0f64).exp(); // strip the mass factor for the oracle
        // oracle: int d4q exp(-a1 q^2 - a2 (P - q)^2), P = inflow, by
        // importance sampling from the Gaussian around the known mean is
        // cheating; sample uniformly in a box instead
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let box_half = 4.0;
        let mut acc = 0.0;
        let nsamp = 1_200_000;
        for _ in 0..nsamp {
            let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-box_half..box_half));
            let q2: f64 = q.iter().map(|x| x * x).sum();
            let mut d2 = 0.0;
            for k in 0..4 {
                let dkk = pv[k] - q[k];
                d2 += dkk * dkk;
            }
            acc += (-a1 * q2 - a2 * d2).exp();
        }
        let est = acc / nsamp as f64 * (2.0 * box_half).powi(4);
        assert!(
            (est - exact).abs() < 0.04 * exact.abs(),
            "MC {est} vs exact {exact}"
        );
    }

    #[test]
    fn degree_two_vertex_moment() {
        // single-vertex self-loop with operator p_l1 . p_l1:
        // int d4q (q^2) e^{-a q^2} = 2 pi^2 / a^3 (vs pi^2/a^2 for 1)
        use crate::graph::{FeynmanDiagram, VertexOperator};
        use crate::mompoly::MomentumPolynomial;
        let d0 = tadpole::<f64>(0.0, 2);
        let v = crate::graph::vid("v1");
        let signs = d0.graph.conservation_signs(&v);
        let op =
            VertexOperator::new(MomentumPolynomial::dot(lid("l1"), lid("l1")), &signs).unwrap();
        let mut ops = d0.vertex_ops.clone();
        ops.insert(v, op);
        let d = FeynmanDiagram::new(d0.graph.clone(), ops, d0.masses.clone()).unwrap();
        let basis = LoopBasis::build(&d).unwrap();
        let p = ExternalMomenta::zero::<f64>(&d);
        let a = 0.85;
        let got = gaussian_reduce(&d, &basis, &[a], &p, cx(0.0, 0.0)).unwrap().re;
        let pi = std::f64::consts::PI;
        let want = 2.0 * pi.powi(2) / a.powi(3);
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn degree_four_product_moment() {
        // (q^2)^2 moment: int d4q (q^2)^2 e^{-a q^2} = 6 pi^2 / a^4
        use crate::graph::{FeynmanDiagram, VertexOperator};
        use crate::mompoly::MomentumPolynomial;
        let d0 = tadpole::<f64>(0.0, 2);
        let v = crate::graph::vid("v1");
        let signs = d0.graph.conservation_signs(&v);
        let dotp = MomentumPolynomial::dot(lid("l1"), lid("l1"));
        let op = VertexOperator::new(dotp.times(&dotp), &signs).unwrap();
        let mut ops = d0.vertex_ops.clone();
        ops.insert(v, op);
        let d = FeynmanDiagram::new(d0.graph.clone(), ops, d0.masses.clone()).unwrap();
        let basis = LoopBasis::build(&d).unwrap();
        let p = ExternalMomenta::zero::<f64>(&d);
        let a = 1.2;
        let got = gaussian_reduce(&d, &basis, &[a], &p, cx(0.0, 0.0)).unwrap().re;
        let pi = std::f64::consts::PI;
        let want = 6.0 * pi.powi(2) / a.powi(4);
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn degree_cap_is_enforced() {
        use crate::graph::{FeynmanDiagram, VertexOperator};
        use crate::mompoly::MomentumPolynomial;
        let d0 = tadpole::<f64>(1.0, 2);
        let v = crate::graph::vid("v1");
        let signs = d0.graph.conservation_signs(&v);
        let dotp = MomentumPolynomial::dot(lid("l1"), lid("l1"));
        let op = VertexOperator::new(dotp.times(&dotp).times(&dotp), &signs).unwrap();
        let mut ops = d0.vertex_ops.clone();
        ops.insert(v, op);
        let d = FeynmanDiagram::new(d0.graph.clone(), ops, d0.masses.clone()).unwrap();
        let basis = LoopBasis::build(&d).unwrap();
        let p = ExternalMomenta::zero::<f64>(&d);
        assert!(matches!(
            gaussian_reduce(&d, &basis, &[1.0], &p, cx(0.0, 0.0)),
            Err(Error::DegreeCap(6))
        ));
    }

    #[test]
    fn orientation_flip_leaves_value_unchanged() {
        use crate::graph::{vid, FeynmanDiagram, FeynmanGraph, Incidence};
        // bubble with l2 flipped
        let v1 = vid("v1");
        let v2 = vid("v2");
        let mk = |flip: bool| {
            let lines = vec![
                (
                    lid("l1"),
                    Incidence::Internal {
                        from: v1.clone(),
                        to: v2.clone(),
                    },
                ),
                (
                    lid("l2"),
                    if flip {
                        Incidence::Internal {
                            from: v2.clone(),
                            to: v1.clone(),
                        }
                    } else {
                        Incidence::Internal {
                            from: v1.clone(),
                            to: v2.clone(),
                        }
                    },
                ),
                (
                    lid("x1"),
                    Incidence::External {
                        vertex: v1.clone(),
                        dir: crate::graph::Direction::In,
                    },
                ),
                (
                    lid("x2"),
                    Incidence::External {
                        vertex: v2.clone(),
                        dir: crate::graph::Direction::Out,
                    },
                ),
            ];
            let g = FeynmanGraph::new([v1.clone(), v2.clone()], lines).unwrap();
            FeynmanDiagram::constant_ops(g, 1.0).unwrap()
        };
        let da = mk(false);
        let db = mk(true);
        let ba = LoopBasis::build(&da).unwrap();
        let bb = LoopBasis::build(&db).unwrap();
        let mut p = ExternalMomenta::zero::<f64>(&da);
        p.set(&lid("x1"), [0.3, 0.7, -0.2, 0.1]);
        p.set(&lid("x2"), [0.3, 0.7, -0.2, 0.1]);
        let z = cx(0.2, 0.15);
        for alpha in [[0.5, 1.5], [2.0, 0.3]] {
            let va = gaussian_reduce(&da, &ba, &alpha, &p, z).unwrap();
            let vb = gaussian_reduce(&db, &bb, &alpha, &p, z).unwrap();
            assert!((va - vb).norm() <= 1e-14 * va.norm());
        }
    }
}
