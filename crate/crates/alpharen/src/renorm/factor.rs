//! The two routes through a sector slice: direct evaluation against the
//! partition member, and the factorized form where the painted block's
//! subtracted amplitude multiplies the quotient integrand and the quotient
//! loop momenta are integrated out. Their agreement is the factorization
//! check for overlapping divergences.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use crate::graph::FeynmanDiagram;
use crate::linalg::SymMat;
use crate::parametric::basis::ExternalMomenta;
use crate::parametric::gaussian::gaussian_core;
use crate::parametric::ParametricIntegrand;
use crate::quad::{integrate_nd, Dim, QuadCfg};
use crate::renorm::RenormEngine;
use crate::subgraph::{painted_components, DisjointFamily};
use num_complex::Complex;
use std::collections::BTreeSet;

impl<R: Real> RenormEngine<R> {
    /// Direct route: the partition-weighted slice of the subtracted
    /// integrand at fixed total scale. The bare part integrates over the
    /// sector; each insertion term embeds the quotient slice under the
    /// parent weight with the collapsed lines at zero.
    pub fn rtilde_sector_slice(
        &mut self,
        d: &FeynmanDiagram<R>,
        mask: u64,
        lambda: R,
        z: C<R>,
        p: &ExternalMomenta<R>,
    ) -> Result<C<R>> {
        let zs = [z];
        let ps = [p.clone()];
        let parent_ctx_key = d.canonical_key();
        let bare = {
            let ctx = self.context_pub(d)?;
            ctx.sector_slice(mask, lambda, &zs, &ps)?.at(0, 0)
        };
        let mut total = bare;
        let star = self.star_terms_pub(d)?;
        for (term, fam) in star {
            let w = term.weight.eval(z);
            if w.norm() == R::zero() {
                continue;
            }
            // embed the quotient simplex into the parent coordinates with
            // the collapsed lines at zero and weigh with the parent member
            let parent_ctx = self.context_pub(d)?;
            let parent_lines = parent_ctx.integrand.basis.lines.clone();
            let parent_partition = parent_ctx.partition.clone();
            let _ = parent_ctx_key;
            let quot_ctx = self.context_pub(&term.diagram)?;
            let quot_lines = quot_ctx.integrand.basis.lines.clone();
            let embed: Vec<usize> = quot_lines
                .iter()
                .map(|l| {
                    parent_lines
                        .iter()
                        .position(|pl| pl == l)
                        .expect("quotient line exists upstream")
                })
                .collect();
            let n_parent = parent_lines.len();
            let weight_fn = move |beta_q: &[R]| -> R {
                let mut beta = vec![R::zero(); n_parent];
                for (qi, &pi) in embed.iter().enumerate() {
                    beta[pi] = beta_q[qi];
                }
                parent_partition.eta_tilde(mask, &beta)
            };
            let v = quot_ctx.weighted_slice(lambda, &zs, &ps, &weight_fn)?.at(0, 0);
            total += w * v;
            let _ = fam;
        }
        Ok(total)
    }

    /// Factorized route at one painted block: the block's subtracted
    /// amplitude as a function of the quotient loop momenta, times the
    /// quotient integrand, with the quotient loop integral done by
    /// completing the square on a reconstructed quadratic form.
    pub fn factorized_sector_slice(
        &mut self,
        d: &FeynmanDiagram<R>,
        mask: u64,
        lambda: R,
        z: C<R>,
        p: &ExternalMomenta<R>,
    ) -> Result<C<R>> {
        let parent = ParametricIntegrand::new(d)?;
        let n = parent.basis.lines.len();
        let painted: BTreeSet<crate::graph::LineId> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| parent.basis.lines[i].clone())
            .collect();
        let comps = painted_components(d, &painted)?;
        if comps.len() != 1 {
            return Err(Error::UnsupportedContinuation(format!(
                "factorized slice wants exactly one painted block, found {}",
                comps.len()
            )));
        }
        let gamma = comps[0].clone();
        let fam = DisjointFamily {
            members: vec![gamma.clone()],
        };
        let quot = crate::subgraph::quotient(d, &fam, &[crate::mompoly::MomentumPolynomial::one()])?;
        let quot_int = ParametricIntegrand::new(&quot)?;
        let sub = gamma.induced_diagram(d)?;
        let sub_int = ParametricIntegrand::new(&sub)?;
        if !sub.vertex_ops.values().all(|op| op.is_constant())
            || !d.vertex_ops.values().all(|op| op.is_constant())
        {
            return Err(Error::UnsupportedContinuation(
                "factorized slice supports constant vertex operators".into(),
            ));
        }
        let const_factor: R = d
            .vertex_ops
            .values()
            .map(|op| op.poly().constant_part())
            .fold(R::one(), |a, b| a * b);

        // include the block's own counterterm: the subtracted block
        // amplitude is bare plus the delta term, which reproduces exactly
        // the insertion contribution of the direct route
        let sub_ct = self.counterterm(&sub)?;

        let partition = crate::sector::SectorPartition::build(
            n,
            self.cfg.numeric.delta,
            self.cfg.numeric.gamma_smooth,
        )?;

        // line index bookkeeping
        let comp_idx: Vec<usize> = gamma
            .lines
            .iter()
            .map(|l| parent.basis.line_index(l).unwrap())
            .collect();
        let rest_idx: Vec<usize> = (0..n).filter(|i| !comp_idx.contains(i)).collect();
        let n_c = comp_idx.len();
        let n_b = rest_idx.len();
        let l_q = quot_int.basis.loop_count();
        let boundary = gamma.boundary(&d.graph);

        // factorized bare part over (mu, sigma, tau)
        let mut dims: Vec<Dim<'_, R>> = Vec::new();
        dims.push(Dim::fixed(
            R::zero(),
            (r::<R>(n_c as f64) * partition.small_hi()).min(r(0.95)),
            partition.breakpoints(),
        ));
        for level in 0..n_c - 1 {
            dims.push(Dim {
                lo: Box::new(move |_c: &[R]| R::zero()),
                hi: Box::new(move |c: &[R]| {
                    let used: R = c[1..1 + level].iter().fold(R::zero(), |a, b| a + *b);
                    R::one() - used
                }),
                breaks: vec![],
                map_pow_lo: 1,
                map_pow_hi: 1,
            });
        }
        for level in 0..n_b - 1 {
            dims.push(Dim {
                lo: Box::new(move |_c: &[R]| R::zero()),
                hi: Box::new(move |c: &[R]| {
                    let used: R = c[n_c..n_c + level].iter().fold(R::zero(), |a, b| a + *b);
                    R::one() - used
                }),
                breaks: vec![],
                map_pow_lo: 1,
                map_pow_hi: 1,
            });
        }

        let quot_masses: Vec<R> = quot_int.masses.clone();
        let mut failure: Option<Error> = None;
        let mut f = |coords: &[R], out: &mut [C<R>]| {
            if failure.is_some() {
                return;
            }
            match factor_node(
                d,
                &parent,
                &quot,
                &quot_int,
                &sub,
                &sub_int,
                &partition,
                mask,
                &comp_idx,
                &rest_idx,
                &boundary,
                &quot_masses,
                lambda,
                z,
                p,
                coords,
                l_q,
                const_factor,
            ) {
                Ok(v) => out[0] = v,
                Err(e) => failure = Some(e),
            }
        };
        let cfgq = QuadCfg {
            rel_tol: self.cfg.numeric.quad_rel_tol,
            abs_floor: self.cfg.numeric.quad_abs_floor,
            max_depth: self.cfg.numeric.max_depth,
        };
        let bare_part = integrate_nd(&dims, &mut f, 1, &cfgq, "factorized slice")?[0];
        if let Some(e) = failure {
            return Err(e);
        }

        // the block counterterm contribution: identical embedding as the
        // direct route
        let mut total = bare_part;
        if let Some(w) = sub_ct.scalar_weight() {
            let wz = w.eval(z);
            let quot_ctx = self.context_pub(&quot)?;
            let quot_lines = quot_ctx.integrand.basis.lines.clone();
            let parent_lines = parent.basis.lines.clone();
            let embed: Vec<usize> = quot_lines
                .iter()
                .map(|l| parent_lines.iter().position(|pl| pl == l).unwrap())
                .collect();
            let weight_fn = move |beta_q: &[R]| -> R {
                let mut beta = vec![R::zero(); n];
                for (qi, &pi) in embed.iter().enumerate() {
                    beta[pi] = beta_q[qi];
                }
                partition.eta_tilde(mask, &beta)
            };
            let v = quot_ctx
                .weighted_slice(lambda, &[z], &[p.clone()], &weight_fn)?
                .at(0, 0);
            total += wz * v;
        }
        Ok(total)
    }
}

#[allow(clippy::too_many_arguments)]
fn factor_node<R: Real>(
    _d: &FeynmanDiagram<R>,
    parent: &ParametricIntegrand<R>,
    _quot: &FeynmanDiagram<R>,
    quot_int: &ParametricIntegrand<R>,
    _sub: &FeynmanDiagram<R>,
    sub_int: &ParametricIntegrand<R>,
    partition: &crate::sector::SectorPartition<R>,
    mask: u64,
    comp_idx: &[usize],
    rest_idx: &[usize],
    boundary: &[(crate::graph::LineId, crate::graph::Direction)],
    quot_masses: &[R],
    lambda: R,
    z: C<R>,
    p: &ExternalMomenta<R>,
    coords: &[R],
    l_q: usize,
    const_factor: R,
) -> Result<C<R>> {
    let n = parent.basis.lines.len();
    let n_c = comp_idx.len();
    let n_b = rest_idx.len();
    let mu = coords[0];
    if mu <= R::zero() {
        return Ok(Complex::new(R::zero(), R::zero()));
    }
    let one_minus = R::one() - mu;
    // assemble the simplex point
    let mut beta = vec![R::zero(); n];
    let mut sig_sum = R::zero();
    for (k, &li) in comp_idx[..n_c - 1].iter().enumerate() {
        beta[li] = mu * coords[1 + k];
        sig_sum += coords[1 + k];
    }
    let sig_rest = R::one() - sig_sum;
    if sig_rest <= R::zero() {
        return Ok(Complex::new(R::zero(), R::zero()));
    }
    beta[comp_idx[n_c - 1]] = mu * sig_rest;
    let mut tau_sum = R::zero();
    for (k, &li) in rest_idx[..n_b - 1].iter().enumerate() {
        beta[li] = one_minus * coords[n_c + k];
        tau_sum += coords[n_c + k];
    }
    let tau_rest = R::one() - tau_sum;
    if tau_rest <= R::zero() {
        return Ok(Complex::new(R::zero(), R::zero()));
    }
    beta[rest_idx[n_b - 1]] = one_minus * tau_rest;

    let w = partition.eta_tilde(mask, &beta);
    if w == R::zero() {
        return Ok(Complex::new(R::zero(), R::zero()));
    }
    let jac = mu.powi(n_c as i32 - 1) * one_minus.powi(n_b as i32 - 1);

    // actual parameters at total scale lambda
    let alpha: Vec<R> = beta.iter().map(|b| *b * lambda).collect();
    let alpha_sub: Vec<R> = sub_int
        .basis
        .lines
        .iter()
        .map(|l| alpha[parent.basis.line_index(l).unwrap()])
        .collect();
    let alpha_quot: Vec<R> = quot_int
        .basis
        .lines
        .iter()
        .map(|l| alpha[parent.basis.line_index(l).unwrap()])
        .collect();

    // exponent of the combined Gaussian as a quadratic form in the
    // quotient loop momenta, reconstructed from a quadratic stencil
    let mut eval_t = |q: &[[R; 4]]| -> Result<R> {
        // boundary momenta of the block as functions of q
        let mut p_sub: ExternalMomenta<R> = ExternalMomenta { map: Default::default() };
        let seen_twice: std::collections::BTreeMap<&crate::graph::LineId, usize> = {
            let mut m = std::collections::BTreeMap::new();
            for (l, _) in boundary.iter() {
                *m.entry(l).or_insert(0) += 1;
            }
            m
        };
        for (l, dir) in boundary.iter() {
            let ext_id = if seen_twice[&l] > 1 {
                let suffix = match dir {
                    crate::graph::Direction::In => "#in",
                    crate::graph::Direction::Out => "#out",
                };
                crate::graph::LineId(format!("{l}{suffix}"))
            } else {
                l.clone()
            };
            // momentum of the surviving line l in the quotient basis, or
            // the external value itself
            let val = if let Some(ri) = quot_int.basis.line_index(l) {
                quot_int.basis.line_momentum(ri, q, p)
            } else {
                p.get(l)
            };
            p_sub.set(&ext_id, val);
        }
        let core = gaussian_core(&sub_int.basis, &alpha_sub, &p_sub)?;
        let mut t = core.vmin + sub_int.mass_term(&alpha_sub);
        for (ri, a) in alpha_quot.iter().enumerate() {
            let pm = quot_int.basis.line_momentum(ri, q, p);
            let sq = pm.iter().fold(R::zero(), |acc, x| acc + *x * *x);
            t += *a * sq;
            t += *a * quot_masses[ri] * quot_masses[ri];
        }
        Ok(t)
    };

    let zero_q = vec![[R::zero(); 4]; l_q];
    let t0 = eval_t(&zero_q)?;
    let mut a_mat = SymMat::zeros(l_q);
    let mut b_vec = vec![[R::zero(); 4]; l_q];
    let h = R::one();
    for i in 0..l_q {
        // diagonal and linear parts per 4-component
        for k in 0..4 {
            let mut qp = zero_q.clone();
            qp[i][k] = h;
            let mut qm = zero_q.clone();
            qm[i][k] = -h;
            let tp = eval_t(&qp)?;
            let tm = eval_t(&qm)?;
            if k == 0 {
                a_mat.set(i, i, (tp + tm - t0 - t0) / (r::<R>(2.0) * h * h));
            }
            b_vec[i][k] = (tp - tm) / (r::<R>(4.0) * h);
        }
    }
    for i in 0..l_q {
        for j in (i + 1)..l_q {
            let mut qq = zero_q.clone();
            qq[i][0] = h;
            qq[j][0] = h;
            let tij = eval_t(&qq)?;
            let aij = (tij - t0 - r::<R>(2.0) * (b_vec[i][0] + b_vec[j][0]) * h
                - (a_mat.get(i, i) + a_mat.get(j, j)) * h * h)
                / (r::<R>(2.0) * h * h);
            a_mat.set(i, j, aij);
        }
    }
    let chol = a_mat.cholesky().map_err(|_| Error::SingularNetwork(
        "quotient loop form degenerate in the factorized slice".into(),
    ))?;
    // min over q: t0 - b A^{-1} b (summed over the 4 components)
    let mut shift = R::zero();
    for k in 0..4 {
        let rhs: Vec<R> = (0..l_q).map(|i| b_vec[i][k]).collect();
        let sol = chol.solve(&rhs);
        for i in 0..l_q {
            shift += rhs[i] * sol[i];
        }
    }
    let exponent = t0 - shift;
    let pi_const = R::PI();
    let l_c = sub_int.loops;
    let u_c = sub_int.eval_u(&alpha_sub);
    let det_q = chol.det();
    let ln_alpha: R = alpha.iter().fold(R::zero(), |a, x| a + x.ln());
    let reg = (z * Complex::new(ln_alpha, R::zero())).exp();
    let scale_pow = lambda.powi(n as i32 - 1);
    let real = w
        * jac
        * scale_pow
        * const_factor
        * pi_const.powi(2 * l_c as i32)
        / (u_c * u_c)
        * pi_const.powi(2 * l_q as i32)
        / (det_q * det_q)
        * (-exponent).exp();
    Ok(reg * Complex::new(real, R::zero()))
}
