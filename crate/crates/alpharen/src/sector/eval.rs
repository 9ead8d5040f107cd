//! Sector-decomposed evaluation of the parameter integral, analytically
//! continued in the regulator.
//!
//! Per sector the radial integral splits three ways: an analytic part on
//! `[0, lambda_f]` built from Taylor data (all regulator poles live in these
//! explicit meromorphic terms), a fixed Gauss-Kronrod grid on
//! `[lambda_f, lambda0]`, and doubling tail panels. The whole radial grid
//! and every regulator sample and momentum point ride along one adaptive
//! pass over the simplex slice, so the expensive parameter-space exploration
//! happens once per sector.
//!
//! Sectors whose painted lines contain a one-loop irreducible block get the
//! same small-scale treatment a second time in the block's relative scale,
//! which is what makes the continuation across subdivergences possible.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use crate::graph::FeynmanDiagram;
use crate::linalg::{Chol, SymMat};
use crate::parametric::basis::ExternalMomenta;
use crate::parametric::gaussian::max_pairings;
use crate::parametric::ParametricIntegrand;
use crate::quad::{cheb_fit, integrate_1d, integrate_nd, Dim, QuadCfg};
use crate::sector::SectorPartition;
use crate::subgraph::painted_components;
use num_complex::Complex;
use rayon::prelude::*;
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug)]
pub struct NumericConfig<R> {
    /// Upper end of the radial region handled analytically + on the grid.
    pub lambda0: R,
    /// Fraction of `lambda0` below which the radial profile is replaced by
    /// its Taylor expansion.
    pub lambda_f_frac: R,
    /// Extra Taylor orders beyond the power-counting minimum (the series
    /// must out-resolve the grid region start).
    pub taylor_extra: usize,
    /// Chebyshev points for the block-scale profile fit.
    pub cheb_points: usize,
    /// Panels per decade on the radial mid grid.
    pub radial_panels: usize,
    pub quad_rel_tol: R,
    pub quad_abs_floor: R,
    pub max_depth: u32,
    /// Partition parameter; `None` picks `1/(4 n)`.
    pub delta: Option<R>,
    pub gamma_smooth: R,
    /// Smallest `Re z` at which sectors with unsupported block structure
    /// fall back to direct quadrature instead of erroring.
    pub direct_rez_min: R,
    /// Dimension count beyond which plain seeded Monte-Carlo takes over.
    pub mc_dim_threshold: usize,
    pub mc_samples: u64,
    pub seed: u64,
    pub pole_guard: R,
}

impl<R: Real> Default for NumericConfig<R> {
    fn default() -> Self {
        NumericConfig {
            lambda0: R::one(),
            lambda_f_frac: r(0.1),
            taylor_extra: 12,
            cheb_points: 20,
            radial_panels: 4,
            quad_rel_tol: r(1e-9),
            quad_abs_floor: r(1e-14),
            max_depth: 48,
            delta: None,
            gamma_smooth: r(0.125),
            direct_rez_min: r(0.75),
            mc_dim_threshold: 5,
            mc_samples: 200_000,
            seed: 42,
            pole_guard: r(1e-9),
        }
    }
}

/// Values on the (regulator sample) x (momentum point) grid.
#[derive(Clone, Debug)]
pub struct EvalGrid<R> {
    pub nz: usize,
    pub np: usize,
    pub v: Vec<C<R>>,
}

impl<R: Real> EvalGrid<R> {
    pub fn zeros(nz: usize, np: usize) -> Self {
        EvalGrid {
            nz,
            np,
            v: vec![Complex::new(R::zero(), R::zero()); nz * np],
        }
    }

    #[inline]
    pub fn at(&self, zi: usize, pj: usize) -> C<R> {
        self.v[zi * self.np + pj]
    }

    #[inline]
    pub fn add_at(&mut self, zi: usize, pj: usize, val: C<R>) {
        self.v[zi * self.np + pj] += val;
    }

    pub fn add(&mut self, other: &EvalGrid<R>) {
        for (a, b) in self.v.iter_mut().zip(other.v.iter()) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, other: &EvalGrid<R>, weights_per_z: &[C<R>]) {
        for zi in 0..self.nz {
            for pj in 0..self.np {
                let w = weights_per_z[zi];
                let v = other.at(zi, pj);
                self.add_at(zi, pj, v * w);
            }
        }
    }
}

#[derive(Clone, Debug)]
struct CompPlan {
    lines: Vec<usize>,
    rest: Vec<usize>,
    loops: usize,
    j_c: usize,
}

#[derive(Clone, Debug)]
struct SectorPlan {
    mask: u64,
    comp: Option<CompPlan>,
    /// Multiple blocks or a multi-loop block: continuation unsupported,
    /// direct quadrature only.
    hard: bool,
}

/// What the simplex pass produces per `(z, p)` pair: Taylor orders of the
/// radial profile at scale zero, then the profile on the radial grid.
#[derive(Clone, Debug)]
struct BetaRequest<R> {
    taylor_k: usize,
    lambdas: Vec<R>,
}

impl<R: Real> BetaRequest<R> {
    fn width(&self) -> usize {
        self.taylor_k + 1 + self.lambdas.len()
    }
}

/// Fixed radial grid: Gauss-Kronrod panels with an embedded error estimate.
struct LambdaGrid<R> {
    nodes: Vec<R>,
    /// Kronrod weight per node (panel-scaled).
    wk: Vec<R>,
    /// Embedded Gauss weight per node (zero off the Gauss subset).
    wg: Vec<R>,
    panel_of: Vec<usize>,
    panels: usize,
}

const GK_NODES: [(f64, f64, f64); 15] = {
    // (abscissa, kronrod weight, gauss weight)
    [
        (-0.991455371120813, 0.022935322010529, 0.0),
        (-0.949107912342759, 0.063092092629979, 0.129484966168870),
        (-0.864864423359769, 0.104790010322250, 0.0),
        (-0.741531185599394, 0.140653259715525, 0.279705391489277),
        (-0.586087235467691, 0.169004726639267, 0.0),
        (-0.405845151377397, 0.190350578064785, 0.381830050505119),
        (-0.207784955007898, 0.204432940075298, 0.0),
        (0.0, 0.209482141084728, 0.417959183673469),
        (0.207784955007898, 0.204432940075298, 0.0),
        (0.405845151377397, 0.190350578064785, 0.381830050505119),
        (0.586087235467691, 0.169004726639267, 0.0),
        (0.741531185599394, 0.140653259715525, 0.279705391489277),
        (0.864864423359769, 0.104790010322250, 0.0),
        (0.949107912342759, 0.063092092629979, 0.129484966168870),
        (0.991455371120813, 0.022935322010529, 0.0),
    ]
};

fn build_lambda_grid<R: Real>(
    lam_f: R,
    lam0: R,
    min_mass2: R,
    panels_mid: usize,
) -> Result<LambdaGrid<R>> {
    let mut edges: Vec<(R, R)> = Vec::new();
    // log-spaced mid panels
    let ratio = (lam0 / lam_f).powf(R::one() / r::<R>(panels_mid as f64));
    let mut lo = lam_f;
    for _ in 0..panels_mid {
        let hi = lo * ratio;
        edges.push((lo, hi));
        lo = hi;
    }
    // doubling tail panels under the mass damping
    if min_mass2 <= R::zero() {
        return Err(Error::UnsupportedContinuation(
            "full parameter integral needs a positive mass on every line".into(),
        ));
    }
    let lam_hi = r::<R>(48.0) / min_mass2;
    let mut lo = lam0;
    let mut guard = 0;
    while lo < lam_hi {
        let hi = lo * r::<R>(2.0);
        edges.push((lo, hi));
        lo = hi;
        guard += 1;
        if guard > 90 {
            break;
        }
    }
    let mut grid = LambdaGrid {
        nodes: Vec::new(),
        wk: Vec::new(),
        wg: Vec::new(),
        panel_of: Vec::new(),
        panels: edges.len(),
    };
    for (pi, (a, b)) in edges.iter().enumerate() {
        let half = (*b - *a) / r::<R>(2.0);
        let mid = (*a + *b) / r::<R>(2.0);
        for (x, wk, wg) in GK_NODES.iter() {
            grid.nodes.push(mid + half * r::<R>(*x));
            grid.wk.push(half * r::<R>(*wk));
            grid.wg.push(half * r::<R>(*wg));
            grid.panel_of.push(pi);
        }
    }
    Ok(grid)
}

/// Prepared evaluator for one diagram.
pub struct EvalContext<R: Real> {
    pub integrand: ParametricIntegrand<R>,
    pub partition: SectorPartition<R>,
    pub cfg: NumericConfig<R>,
    n: usize,
    loops: usize,
    j_max: usize,
    const_moment: Option<R>,
    plans: Vec<SectorPlan>,
    taylor_k: usize,
    min_mass2: R,
}

/// Reusable per-node buffers for the hot loop.
struct Scratch<R> {
    beta: Vec<R>,
    ext: Vec<[R; 4]>,
    qstar: Vec<[R; 4]>,
    rhs: Vec<R>,
    e_vals: Vec<R>,
    moments: Vec<[R; 3]>,
    qmat: SymMat<R>,
}

impl<R: Real> Scratch<R> {
    fn new(n: usize, l: usize, np: usize) -> Self {
        Scratch {
            beta: vec![R::zero(); n],
            ext: vec![[R::zero(); 4]; n],
            qstar: vec![[R::zero(); 4]; l],
            rhs: vec![R::zero(); l],
            e_vals: vec![R::zero(); np],
            moments: vec![[R::zero(); 3]; np],
            qmat: SymMat::zeros(l),
        }
    }
}

impl<R: Real> EvalContext<R> {
    pub fn new(d: &FeynmanDiagram<R>, cfg: NumericConfig<R>) -> Result<Self> {
        let integrand = ParametricIntegrand::new(d)?;
        let n = integrand.line_count();
        if n == 0 {
            return Err(Error::UnsupportedContinuation(
                "diagram has no internal lines".into(),
            ));
        }
        let partition = SectorPartition::build(n, cfg.delta, cfg.gamma_smooth)?;
        let loops = integrand.loops;
        let all_const = d.vertex_ops.values().all(|op| op.is_constant());
        let j_max = if all_const { 0 } else { max_pairings(d) };
        let const_moment = if all_const {
            let mut c = R::one();
            for op in d.vertex_ops.values() {
                c = c * op.poly().constant_part();
            }
            Some(c)
        } else {
            None
        };
        let pcd = d.op_degree_sum() as i64 - 4 * d.graph.vertex_count() as i64
            + 2 * n as i64
            + 4;
        let taylor_k = (pcd.max(0) as usize + 2).max(2) + cfg.taylor_extra;
        let min_mass2 = integrand
            .masses
            .iter()
            .map(|m| *m * *m)
            .fold(R::infinity(), |a, b| a.min(b));

        let mut plans = Vec::new();
        for mask in 0..((1u64 << n) - 1) {
            let painted: BTreeSet<crate::graph::LineId> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| integrand.basis.lines[i].clone())
                .collect();
            let comps = painted_components(d, &painted)?;
            let to_plan = |c: &crate::subgraph::Subdiagram| -> CompPlan {
                let lines: Vec<usize> = c
                    .lines
                    .iter()
                    .map(|l| integrand.basis.line_index(l).unwrap())
                    .collect();
                let rest: Vec<usize> = (0..n).filter(|i| !lines.contains(i)).collect();
                let loops = c.lines.len() + 1 - c.vertices.len();
                let j_c = if all_const {
                    0
                } else {
                    let deg: usize = c.vertices.iter().map(|v| d.vertex_ops[v].degree()).sum();
                    deg / 2
                };
                CompPlan {
                    lines,
                    rest,
                    loops,
                    j_c,
                }
            };
            let plan = match comps.len() {
                0 => SectorPlan {
                    mask,
                    comp: None,
                    hard: false,
                },
                1 => {
                    let cp = to_plan(&comps[0]);
                    if cp.loops == 1 {
                        SectorPlan {
                            mask,
                            comp: Some(cp),
                            hard: false,
                        }
                    } else {
                        SectorPlan {
                            mask,
                            comp: None,
                            hard: true,
                        }
                    }
                }
                _ => SectorPlan {
                    mask,
                    comp: None,
                    hard: true,
                },
            };
            plans.push(plan);
        }

        Ok(EvalContext {
            integrand,
            partition,
            cfg,
            n,
            loops,
            j_max,
            const_moment,
            plans,
            taylor_k,
            min_mass2,
        })
    }

    pub fn line_count(&self) -> usize {
        self.n
    }

    fn quad_cfg(&self) -> QuadCfg<R> {
        QuadCfg {
            rel_tol: self.cfg.quad_rel_tol,
            abs_floor: self.cfg.quad_abs_floor,
            max_depth: self.cfg.max_depth,
        }
    }

    /// Integer part of the radial exponent; the full exponent is
    /// `c_int + n z`.
    fn c_lambda_int(&self) -> i64 {
        self.n as i64 - 1 - 2 * self.loops as i64 - self.j_max as i64
    }

    /// The analytically continued bare amplitude on the whole grid.
    pub fn bare_batch(&self, zs: &[C<R>], ps: &[ExternalMomenta<R>]) -> Result<EvalGrid<R>> {
        let results: Vec<Result<EvalGrid<R>>> = self
            .plans
            .par_iter()
            .map(|plan| self.sector_full(plan, zs, ps))
            .collect();
        let mut total = EvalGrid::zeros(zs.len(), ps.len());
        for res in results {
            total.add(&res?);
        }
        Ok(total)
    }

    pub fn bare_value(&self, z: C<R>, p: &ExternalMomenta<R>) -> Result<C<R>> {
        Ok(self.bare_batch(&[z], &[p.clone()])?.at(0, 0))
    }

    /// One sector's contribution to the full radial integral.
    pub fn sector_eval(&self, mask: u64, zs: &[C<R>], ps: &[ExternalMomenta<R>]) -> Result<EvalGrid<R>> {
        let plan = self.plan(mask)?;
        self.sector_full(plan, zs, ps)
    }

    fn plan(&self, mask: u64) -> Result<&SectorPlan> {
        self.plans
            .iter()
            .find(|p| p.mask == mask)
            .ok_or_else(|| Error::ParamConstraint(format!("no sector {mask:#b}")))
    }

    /// Radial profile slice at fixed scale, one sector, all scale powers in.
    pub fn sector_slice(
        &self,
        mask: u64,
        lambda: R,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
    ) -> Result<EvalGrid<R>> {
        let plan = self.plan(mask)?;
        let req = BetaRequest {
            taylor_k: 0,
            lambdas: vec![lambda],
        };
        let vals = self.beta_pass(plan, zs, ps, &req)?;
        let mut out = EvalGrid::zeros(zs.len(), ps.len());
        let width = req.width();
        for (zi, z) in zs.iter().enumerate() {
            let pw = self.lambda_power(lambda, *z);
            for pj in 0..ps.len() {
                out.add_at(zi, pj, vals[(zi * ps.len() + pj) * width + 1] * pw);
            }
        }
        Ok(out)
    }

    /// Full profile slice: sum of all sector slices.
    pub fn slice_total(
        &self,
        lambda: R,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
    ) -> Result<EvalGrid<R>> {
        let mut total = EvalGrid::zeros(zs.len(), ps.len());
        for plan in self.plans.iter() {
            total.add(&self.sector_slice(plan.mask, lambda, zs, ps)?);
        }
        Ok(total)
    }

    /// Sampled radial profile of the bare integrand.
    pub fn radial_profile(
        &self,
        z: C<R>,
        p: &ExternalMomenta<R>,
        lambdas: &[R],
    ) -> Result<Vec<C<R>>> {
        let zs = [z];
        let ps = [p.clone()];
        lambdas
            .iter()
            .map(|l| self.slice_total(*l, &zs, &ps).map(|g| g.at(0, 0)))
            .collect()
    }

    #[inline]
    fn lambda_power(&self, lambda: R, z: C<R>) -> C<R> {
        let ln_l = lambda.ln();
        (Complex::new(r::<R>(self.c_lambda_int() as f64) * ln_l, R::zero())
            + z * Complex::new(r::<R>(self.n as f64) * ln_l, R::zero()))
        .exp()
    }

    // ---- radial assembly ----

    fn sector_full(
        &self,
        plan: &SectorPlan,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
    ) -> Result<EvalGrid<R>> {
        let nz = zs.len();
        let np = ps.len();
        let c_int = self.c_lambda_int();
        let kmax = self.taylor_k;
        let lam0 = self.cfg.lambda0;
        let lam_f = lam0 * self.cfg.lambda_f_frac;
        let grid = build_lambda_grid(lam_f, lam0, self.min_mass2, self.cfg.radial_panels)?;

        let req = BetaRequest {
            taylor_k: kmax,
            lambdas: grid.nodes.clone(),
        };
        let width = req.width();
        let vals = self.beta_pass(plan, zs, ps, &req)?;

        let mut out = EvalGrid::zeros(nz, np);
        let ln_f = lam_f.ln();
        let guard = self.cfg.pole_guard;
        for (zi, z) in zs.iter().enumerate() {
            for pj in 0..np {
                let base = (zi * np + pj) * width;
                // analytic part on [0, lam_f]
                let mut acc = Complex::new(R::zero(), R::zero());
                for k in 0..=kmax {
                    let fk = vals[base + k];
                    if fk.norm() == R::zero() {
                        continue;
                    }
                    let e = z * Complex::new(r::<R>(self.n as f64), R::zero())
                        + Complex::new(r::<R>((c_int + k as i64 + 1) as f64), R::zero());
                    if e.norm() < guard {
                        return Err(Error::PoleProximity(format!(
                            "radial exponent at order {k} in sector {:#b}",
                            plan.mask
                        )));
                    }
                    acc += fk * (e * Complex::new(ln_f, R::zero())).exp() / e;
                }
                // grid region with embedded error check
                let mut kron = Complex::new(R::zero(), R::zero());
                let mut gauss = Complex::new(R::zero(), R::zero());
                for (ni, lam) in grid.nodes.iter().enumerate() {
                    let h = vals[base + kmax + 1 + ni];
                    if h.norm() == R::zero() {
                        continue;
                    }
                    let f = h * self.lambda_power(*lam, *z);
                    kron += f * Complex::new(grid.wk[ni], R::zero());
                    gauss += f * Complex::new(grid.wg[ni], R::zero());
                }
                let scale = acc.norm().max(kron.norm()).max(R::min_positive_value());
                if (kron - gauss).norm() > r::<R>(3e3) * self.cfg.quad_rel_tol * scale {
                    return Err(Error::Quadrature {
                        where_: format!("radial grid sector {:#b}", plan.mask),
                        detail: format!(
                            "embedded error {:e} vs scale {:e}",
                            (kron - gauss).norm().to_f64().unwrap_or(f64::NAN),
                            scale.to_f64().unwrap_or(f64::NAN)
                        ),
                    });
                }
                out.add_at(zi, pj, acc + kron);
            }
        }
        let _ = grid.panels;
        Ok(out)
    }

    // ---- simplex passes ----

    fn beta_pass(
        &self,
        plan: &SectorPlan,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
        req: &BetaRequest<R>,
    ) -> Result<Vec<C<R>>> {
        if plan.hard {
            let min_rez = zs.iter().map(|z| z.re).fold(R::infinity(), |a, b| a.min(b));
            if min_rez < self.cfg.direct_rez_min {
                return Err(Error::UnsupportedContinuation(format!(
                    "sector {:#b} has nested or multi-loop painted blocks; \
                     continuation to Re z < {} is not supported",
                    plan.mask,
                    self.cfg.direct_rez_min.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        match (&plan.comp, plan.hard) {
            (Some(cp), false) => self.beta_pass_block(plan, cp, zs, ps, req),
            _ => self.beta_pass_plain(plan, zs, ps, req),
        }
    }

    /// Direct quadrature over the simplex slice (no painted block).
    fn beta_pass_plain(
        &self,
        plan: &SectorPlan,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
        req: &BetaRequest<R>,
    ) -> Result<Vec<C<R>>> {
        let n = self.n;
        let m = zs.len() * ps.len() * req.width();
        let mut scratch = Scratch::new(n, self.loops, ps.len());
        if n == 1 {
            let mut buf = vec![Complex::new(R::zero(), R::zero()); m];
            scratch.beta[0] = R::one();
            let beta = scratch.beta.clone();
            self.node_accumulate(&beta, plan.mask, zs, ps, req, R::one(), &mut scratch, &mut buf)?;
            return Ok(buf);
        }
        let dep = (0..n)
            .rev()
            .find(|i| plan.mask & (1 << i) == 0)
            .expect("proper sector has an unpainted line");
        let free: Vec<usize> = (0..n).filter(|i| *i != dep).collect();
        let small_hi = self.partition.small_hi();
        let large_lo = self.partition.large_lo();
        let breaks = self.partition.breakpoints();

        let dims: Vec<Dim<'_, R>> = free
            .iter()
            .enumerate()
            .map(|(level, &li)| {
                let painted = plan.mask & (1 << li) != 0;
                let lo = if painted { R::zero() } else { large_lo };
                let cap = if painted { small_hi } else { R::one() };
                Dim {
                    lo: Box::new(move |_c: &[R]| lo),
                    hi: Box::new(move |c: &[R]| {
                        let used: R = c[..level].iter().fold(R::zero(), |a, b| a + *b);
                        cap.min(R::one() - used)
                    }),
                    breaks: breaks.clone(),
                    map_pow_lo: if painted { 3 } else { 1 },
                    map_pow_hi: 1,
                }
            })
            .collect();

        let mut first_err: Option<Error> = None;
        let mut f = |coords: &[R], out: &mut [C<R>]| {
            if first_err.is_some() {
                return;
            }
            let mut sum = R::zero();
            for (k, &li) in free.iter().enumerate() {
                scratch.beta[li] = coords[k];
                sum += coords[k];
            }
            let rest = R::one() - sum;
            if rest <= R::zero() {
                return;
            }
            scratch.beta[dep] = rest;
            let beta = std::mem::take(&mut scratch.beta);
            let res = self.node_accumulate(&beta, plan.mask, zs, ps, req, R::one(), &mut scratch, out);
            scratch.beta = beta;
            if let Err(e) = res {
                first_err = Some(e);
            }
        };
        let res = integrate_nd(
            &dims,
            &mut f,
            m,
            &self.quad_cfg(),
            &format!("sector {:#b} simplex", plan.mask),
        )?;
        if let Some(e) = first_err {
            return Err(e);
        }
        Ok(res)
    }

    /// Sector integral with one one-loop painted block: radial split in the
    /// block scale, Chebyshev Taylor data near zero, direct quadrature on
    /// the ramp region.
    fn beta_pass_block(
        &self,
        plan: &SectorPlan,
        cp: &CompPlan,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
        req: &BetaRequest<R>,
    ) -> Result<Vec<C<R>>> {
        let width = req.width();
        let m = zs.len() * ps.len() * width;
        let n_c = cp.lines.len();
        let c_mu_int = n_c as i64 - 1 - 2 * cp.loops as i64 - cp.j_c as i64;
        let mu0 = self.partition.large_lo() * r::<R>(0.9);
        let mu_max = (r::<R>(n_c as f64) * self.partition.small_hi()).min(r(0.95));

        // psi(mu) = mu^{-c_mu(z)} mu^{n_c-1} inner(mu): smooth at zero
        let psi = |mu: R, out: &mut [C<R>]| -> Result<()> {
            let inner = self.block_inner(plan, cp, mu, zs, ps, req)?;
            let ln_mu = mu.ln();
            let peel_re = r::<R>((2 * cp.loops + cp.j_c) as f64) * ln_mu;
            for (zi, z) in zs.iter().enumerate() {
                let pw = (Complex::new(peel_re, R::zero())
                    - z * Complex::new(r::<R>(n_c as f64) * ln_mu, R::zero()))
                .exp();
                for pj in 0..ps.len() {
                    for k in 0..width {
                        let idx = (zi * ps.len() + pj) * width + k;
                        out[idx] = inner[idx] * pw;
                    }
                }
            }
            Ok(())
        };

        // Chebyshev Taylor data on [0, mu0]
        let mut fit_err: Option<Error> = None;
        let mut psi_f = |mu: R, out: &mut [C<R>]| {
            if fit_err.is_some() {
                return;
            }
            let mu_eval = mu.max(mu0 * r(1e-9));
            if let Err(e) = psi(mu_eval, out) {
                fit_err = Some(e);
            }
        };
        let fit = cheb_fit(&mut psi_f, mu0, self.cfg.cheb_points, m);
        if let Some(e) = fit_err {
            return Err(e);
        }
        let taylor = fit.taylor(self.cfg.cheb_points + 1);

        let mut total = vec![Complex::new(R::zero(), R::zero()); m];
        let ln_mu0 = mu0.ln();
        for (zi, z) in zs.iter().enumerate() {
            for pj in 0..ps.len() {
                for k in 0..width {
                    let idx = (zi * ps.len() + pj) * width + k;
                    let mut acc = Complex::new(R::zero(), R::zero());
                    for (ord, row) in taylor.iter().enumerate() {
                        let fk = row[idx];
                        if fk.norm() == R::zero() {
                            continue;
                        }
                        let e = z * Complex::new(r::<R>(n_c as f64), R::zero())
                            + Complex::new(r::<R>((c_mu_int + ord as i64 + 1) as f64), R::zero());
                        if e.norm() < self.cfg.pole_guard {
                            return Err(Error::PoleProximity(format!(
                                "block exponent at order {ord} in sector {:#b}",
                                plan.mask
                            )));
                        }
                        acc += fk * (e * Complex::new(ln_mu0, R::zero())).exp() / e;
                    }
                    total[idx] += acc;
                }
            }
        }

        // ramp region [mu0, mu_max]
        let cfgq = self.quad_cfg();
        let mut failure: Option<Error> = None;
        let mut buf = vec![Complex::new(R::zero(), R::zero()); m];
        let mut f = |mu: R, out_buf: &mut [C<R>]| {
            if failure.is_some() {
                return;
            }
            for v in buf.iter_mut() {
                *v = Complex::new(R::zero(), R::zero());
            }
            match psi(mu, &mut buf) {
                Ok(()) => {
                    let ln_mu = mu.ln();
                    for (zi, z) in zs.iter().enumerate() {
                        let pw = (Complex::new(r::<R>(c_mu_int as f64) * ln_mu, R::zero())
                            + z * Complex::new(r::<R>(n_c as f64) * ln_mu, R::zero()))
                        .exp();
                        for pj in 0..ps.len() {
                            for k in 0..width {
                                let idx = (zi * ps.len() + pj) * width + k;
                                out_buf[idx] = buf[idx] * pw;
                            }
                        }
                    }
                }
                Err(e) => failure = Some(e),
            }
        };
        let upper = integrate_1d(
            &mut f,
            mu0,
            mu_max,
            m,
            &self.partition.breakpoints(),
            &cfgq,
            &format!("block scale sector {:#b}", plan.mask),
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        for (t, v) in total.iter_mut().zip(upper.iter()) {
            *t += v;
        }
        Ok(total)
    }

    /// Inner integral over the block direction simplex and the remaining
    /// lines at fixed block scale; includes the `(1-mu)` measure power from
    /// the rest-simplex rescaling but no `mu` powers.
    fn block_inner(
        &self,
        plan: &SectorPlan,
        cp: &CompPlan,
        mu: R,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
        req: &BetaRequest<R>,
    ) -> Result<Vec<C<R>>> {
        let m = zs.len() * ps.len() * req.width();
        let n = self.n;
        let n_c = cp.lines.len();
        let n_b = cp.rest.len();
        let one_minus = R::one() - mu;
        let jac = one_minus.powi(n_b as i32 - 1);

        let sig_free: Vec<usize> = cp.lines[..n_c - 1].to_vec();
        let sig_dep = cp.lines[n_c - 1];
        let tau_free: Vec<usize> = cp.rest[..n_b - 1].to_vec();
        let tau_dep = cp.rest[n_b - 1];

        let large_lo = self.partition.large_lo();
        let small_hi = self.partition.small_hi();
        let mut dims: Vec<Dim<'_, R>> = Vec::new();
        for (level, _li) in sig_free.iter().enumerate() {
            dims.push(Dim {
                lo: Box::new(move |_c: &[R]| R::zero()),
                hi: Box::new(move |c: &[R]| {
                    let used: R = c[..level].iter().fold(R::zero(), |a, b| a + *b);
                    R::one() - used
                }),
                breaks: vec![],
                map_pow_lo: 3,
                map_pow_hi: 3,
            });
        }
        let n_sig_free = sig_free.len();
        for (j, &li) in tau_free.iter().enumerate() {
            let painted = plan.mask & (1 << li) != 0;
            let lo = if painted {
                R::zero()
            } else {
                (large_lo / one_minus).min(r(0.999))
            };
            let cap = if painted {
                (small_hi / one_minus).min(R::one())
            } else {
                R::one()
            };
            dims.push(Dim {
                lo: Box::new(move |_c: &[R]| lo),
                hi: Box::new(move |c: &[R]| {
                    let used: R = c[n_sig_free..n_sig_free + j]
                        .iter()
                        .fold(R::zero(), |a, b| a + *b);
                    cap.min(R::one() - used)
                }),
                breaks: vec![],
                map_pow_lo: if painted { 3 } else { 1 },
                map_pow_hi: 1,
            });
        }

        let mut scratch = Scratch::new(n, self.loops, ps.len());
        let mut first_err: Option<Error> = None;
        let mut f = |coords: &[R], out: &mut [C<R>]| {
            if first_err.is_some() {
                return;
            }
            let mut sig_sum = R::zero();
            for (k, &li) in sig_free.iter().enumerate() {
                scratch.beta[li] = mu * coords[k];
                sig_sum += coords[k];
            }
            let sig_rest = R::one() - sig_sum;
            if sig_rest <= R::zero() {
                return;
            }
            scratch.beta[sig_dep] = mu * sig_rest;
            let mut tau_sum = R::zero();
            for (j, &li) in tau_free.iter().enumerate() {
                scratch.beta[li] = one_minus * coords[n_sig_free + j];
                tau_sum += coords[n_sig_free + j];
            }
            let tau_rest = R::one() - tau_sum;
            if tau_rest <= R::zero() {
                return;
            }
            scratch.beta[tau_dep] = one_minus * tau_rest;
            let beta = std::mem::take(&mut scratch.beta);
            let res = self.node_accumulate(&beta, plan.mask, zs, ps, req, jac, &mut scratch, out);
            scratch.beta = beta;
            if let Err(e) = res {
                first_err = Some(e);
            }
        };
        let res = if dims.is_empty() {
            let mut out = vec![Complex::new(R::zero(), R::zero()); m];
            f(&[], &mut out);
            out
        } else {
            integrate_nd(
                &dims,
                &mut f,
                m,
                &self.quad_cfg(),
                &format!("block inner sector {:#b}", plan.mask),
            )?
        };
        if let Some(e) = first_err {
            return Err(e);
        }
        Ok(res)
    }

    /// Weighted profile slice over the whole simplex (no sector partition):
    /// embeds quotient-diagram slices under a parent weight.
    pub fn weighted_slice<W>(
        &self,
        lambda: R,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
        weight: &W,
    ) -> Result<EvalGrid<R>>
    where
        W: Fn(&[R]) -> R,
    {
        let n = self.n;
        let nz = zs.len();
        let np = ps.len();
        let req = BetaRequest {
            taylor_k: 0,
            lambdas: vec![lambda],
        };
        let width = req.width();
        let m = nz * np * width;
        let mut scratch = Scratch::new(n, self.loops, np);
        let mut vals = vec![Complex::new(R::zero(), R::zero()); m];
        if n == 1 {
            let beta = vec![R::one()];
            let w = weight(&beta);
            if w != R::zero() {
                self.node_values(&beta, zs, ps, &req, w, &mut scratch, &mut vals)?;
            }
        } else {
            let dims: Vec<Dim<'_, R>> = (0..n - 1)
                .map(|level| Dim {
                    lo: Box::new(move |_c: &[R]| R::zero()),
                    hi: Box::new(move |c: &[R]| {
                        let used: R = c[..level].iter().fold(R::zero(), |a, b| a + *b);
                        R::one() - used
                    }),
                    breaks: self.partition.breakpoints(),
                    map_pow_lo: 3,
                    map_pow_hi: if level == n - 2 { 3 } else { 1 },
                })
                .collect();
            let mut first_err: Option<Error> = None;
            let mut f = |coords: &[R], out: &mut [C<R>]| {
                if first_err.is_some() {
                    return;
                }
                let mut sum = R::zero();
                for (k, x) in coords.iter().enumerate() {
                    scratch.beta[k] = *x;
                    sum += *x;
                }
                let rest = R::one() - sum;
                if rest <= R::zero() {
                    return;
                }
                scratch.beta[n - 1] = rest;
                let beta = std::mem::take(&mut scratch.beta);
                let w = weight(&beta);
                if w != R::zero() {
                    if let Err(e) = self.node_values(&beta, zs, ps, &req, w, &mut scratch, out) {
                        first_err = Some(e);
                    }
                }
                scratch.beta = beta;
            };
            vals = integrate_nd(&dims, &mut f, m, &self.quad_cfg(), "weighted slice")?;
            if let Some(e) = first_err {
                return Err(e);
            }
        }
        let mut out = EvalGrid::zeros(nz, np);
        for (zi, z) in zs.iter().enumerate() {
            let pw = self.lambda_power(lambda, *z);
            for pj in 0..np {
                out.add_at(zi, pj, vals[(zi * np + pj) * width + 1] * pw);
            }
        }
        Ok(out)
    }

    // ---- the pointwise integrand ----

    fn node_accumulate(
        &self,
        beta: &[R],
        mask: u64,
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
        req: &BetaRequest<R>,
        extra_jac: R,
        scratch: &mut Scratch<R>,
        out: &mut [C<R>],
    ) -> Result<()> {
        let w = self.partition.eta_tilde(mask, beta);
        if w == R::zero() {
            return Ok(());
        }
        self.node_values(beta, zs, ps, req, w * extra_jac, scratch, out)
    }

    /// Accumulate the weighted integrand at one simplex point into the
    /// batch buffer, for all Taylor orders and radial nodes at once.
    fn node_values(
        &self,
        beta: &[R],
        zs: &[C<R>],
        ps: &[ExternalMomenta<R>],
        req: &BetaRequest<R>,
        weight: R,
        scratch: &mut Scratch<R>,
        out: &mut [C<R>],
    ) -> Result<()> {
        let width = req.width();
        let np = ps.len();
        let kmax = req.taylor_k;
        let n = self.n;
        let l = self.loops;
        let basis = &self.integrand.basis;

        // loop form and its Cholesky factor
        let chol: Option<Chol<R>> = if l > 0 {
            for i in 0..l {
                for j in i..l {
                    let mut s = R::zero();
                    for ri in 0..n {
                        let cij = basis.cycle[ri][i] * basis.cycle[ri][j];
                        if cij != 0 {
                            s += beta[ri] * r::<R>(cij as f64);
                        }
                    }
                    scratch.qmat.set(i, j, s);
                }
            }
            Some(scratch.qmat.cholesky().map_err(|_| Error::Quadrature {
                where_: "node".into(),
                detail: "degenerate loop form inside a sector".into(),
            })?)
        } else {
            None
        };
        let u = chol.as_ref().map(|c| c.det()).unwrap_or_else(R::one);
        let qinv = if self.const_moment.is_none() {
            chol.as_ref().map(|c| c.inverse())
        } else {
            None
        };
        let mass = self.integrand.mass_term(beta);
        let ln_sum: R = beta.iter().fold(R::zero(), |a, b| a + b.ln());
        let pi = R::PI();
        let base = weight * pi.powi(2 * l as i32) / (u * u);

        for (pj, p) in ps.iter().enumerate() {
            let (vmin, mom) = self.momentum_data(beta, chol.as_ref(), qinv.as_ref(), p, scratch)?;
            scratch.e_vals[pj] = vmin + mass;
            scratch.moments[pj] = mom;
        }

        // z-independent real factor table: per momentum point, the Taylor
        // orders followed by the radial nodes
        let mut table = vec![R::zero(); np * width];
        let mut powers = vec![R::zero(); kmax + 1];
        for pj in 0..np {
            let e = scratch.e_vals[pj];
            let mom = scratch.moments[pj];
            let row = &mut table[pj * width..(pj + 1) * width];
            let mut pow_over_fact = R::one();
            for (k, slot_p) in powers.iter_mut().enumerate() {
                *slot_p = pow_over_fact;
                pow_over_fact = pow_over_fact * (-e) / r::<R>(k as f64 + 1.0);
            }
            for (j, mj) in mom.iter().enumerate() {
                if *mj == R::zero() || j > self.j_max {
                    continue;
                }
                let shift = self.j_max - j;
                for k in shift..=kmax {
                    row[k] += *mj * powers[k - shift];
                }
            }
            for (ni, lam) in req.lambdas.iter().enumerate() {
                let damp = (-*lam * e).exp();
                let mut mfac = R::zero();
                for (j, mj) in mom.iter().enumerate() {
                    if *mj != R::zero() && j <= self.j_max {
                        mfac += *mj * lam.powi(self.j_max as i32 - j as i32);
                    }
                }
                row[kmax + 1 + ni] = damp * mfac;
            }
        }
        let tiny = r::<R>(1e-290);
        for (zi, z) in zs.iter().enumerate() {
            let reg = (z * Complex::new(ln_sum, R::zero())).exp()
                * Complex::new(base, R::zero());
            for pj in 0..np {
                let row = &table[pj * width..(pj + 1) * width];
                let slot = &mut out[(zi * np + pj) * width..(zi * np + pj + 1) * width];
                for (s, fac) in slot.iter_mut().zip(row.iter()) {
                    if fac.abs() > tiny {
                        *s += reg * Complex::new(*fac, R::zero());
                    }
                }
            }
        }
        Ok(())
    }

    fn momentum_data(
        &self,
        beta: &[R],
        chol: Option<&Chol<R>>,
        qinv: Option<&SymMat<R>>,
        p: &ExternalMomenta<R>,
        scratch: &mut Scratch<R>,
    ) -> Result<(R, [R; 3])> {
        let basis = &self.integrand.basis;
        let n = self.n;
        let l = self.loops;
        for ri in 0..n {
            let mut d = [R::zero(); 4];
            for (e, cv) in basis.route[ri].iter() {
                let pe = p.get(e);
                for k in 0..4 {
                    d[k] += *cv * pe[k];
                }
            }
            scratch.ext[ri] = d;
        }
        if let Some(ch) = chol {
            for k in 0..4 {
                for i in 0..l {
                    let mut s = R::zero();
                    for ri in 0..n {
                        let cri = basis.cycle[ri][i];
                        if cri != 0 {
                            s += beta[ri] * r::<R>(cri as f64) * scratch.ext[ri][k];
                        }
                    }
                    scratch.rhs[i] = -s;
                }
                let sol = ch.solve(&scratch.rhs);
                for i in 0..l {
                    scratch.qstar[i][k] = sol[i];
                }
            }
        }
        let mut vmin = R::zero();
        // currents go back into scratch.ext to avoid another buffer
        for ri in 0..n {
            let mut cur = scratch.ext[ri];
            for i in 0..l {
                let cri = basis.cycle[ri][i];
                if cri != 0 {
                    let s = r::<R>(cri as f64);
                    for k in 0..4 {
                        cur[k] += s * scratch.qstar[i][k];
                    }
                }
            }
            let sq = cur.iter().fold(R::zero(), |a, x| a + *x * *x);
            vmin += beta[ri] * sq;
            scratch.ext[ri] = cur;
        }
        let moments = if let Some(c0) = self.const_moment {
            [c0, R::zero(), R::zero()]
        } else {
            let qi = qinv.expect("moment path retains the inverse form");
            let v = crate::parametric::gaussian::moment_terms_from(
                &self.integrand.diagram,
                basis,
                &scratch.ext,
                qi,
                p,
            )?;
            [v[0], v[1], v[2]]
        };
        Ok((vmin, moments))
    }
}
