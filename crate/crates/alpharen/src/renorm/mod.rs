//! The recursive subtraction: local counterterms, star insertion of
//! subdiagram counterterms, assembly of the subtracted amplitude, and the
//! finiteness certification.

pub mod factor;
pub mod taylor;

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use crate::graph::{omega, FeynmanDiagram, LineId};
use crate::laurent::{circle_samples, fit_laurent, LaurentSeries, Scheme};
use crate::mompoly::MomentumPolynomial;
use crate::parametric::basis::ExternalMomenta;
use crate::sector::{EvalContext, EvalGrid, NumericConfig};
use crate::subgraph::{enumerate_disjoint_families, quotient, DisjointFamily};
use num_complex::Complex;
use std::collections::BTreeMap;

/// One local counterterm term: delta-derivative orders per line and a
/// momentum polynomial with a Laurent coefficient.
#[derive(Clone, Debug)]
pub struct CtTerm<R> {
    pub delta_orders: BTreeMap<LineId, u32>,
    pub poly: MomentumPolynomial<R>,
    pub coeff: LaurentSeries<R>,
}

impl<R: Real> CtTerm<R> {
    pub fn delta_weight(&self) -> u32 {
        self.delta_orders.values().sum()
    }
}

/// The local counterterm of one diagram.
#[derive(Clone, Debug)]
pub struct LocalCounterterm<R> {
    pub diagram_key: String,
    pub omega: i64,
    pub lines: Vec<LineId>,
    pub terms: Vec<CtTerm<R>>,
}

impl<R: Real> LocalCounterterm<R> {
    pub fn empty(key: String, omega: i64, lines: Vec<LineId>) -> Self {
        LocalCounterterm {
            diagram_key: key,
            omega,
            lines,
            terms: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every stored term must satisfy `2 |m| + deg P = Omega` exactly and
    /// `deg P <= Omega`.
    pub fn check_homogeneity(&self) -> Result<()> {
        for t in self.terms.iter() {
            let weight = 2 * t.delta_weight() as i64;
            let deg = t.poly.momentum_degree() as i64;
            if weight + deg != self.omega || deg > self.omega {
                return Err(Error::HomogeneityViolation(format!(
                    "term with |m| = {}, deg P = {deg} against Omega = {}",
                    t.delta_weight(),
                    self.omega
                )));
            }
        }
        Ok(())
    }

    /// The momentum-space subtraction polynomial evaluated at one point, as
    /// a Laurent series. Delta-derivative terms carry no polynomial beyond
    /// their constant and participate only through the local polynomial.
    pub fn subtraction_series_at(
        &self,
        p: &ExternalMomenta<R>,
        trunc: i64,
    ) -> Result<LaurentSeries<R>> {
        let mut total = LaurentSeries::zero(trunc);
        for t in self.terms.iter() {
            let val = t
                .poly
                .eval(&p.map, R::zero())
                .ok_or_else(|| Error::Graph("counterterm polynomial references unknown momenta".into()))?;
            total = total.add(&t.coeff.scale(Complex::new(val, R::zero())))?;
        }
        Ok(total)
    }

    /// The single scalar weight of a purely logarithmic counterterm.
    pub fn scalar_weight(&self) -> Option<&LaurentSeries<R>> {
        if self.terms.len() == 1
            && self.terms[0].delta_orders.is_empty()
            && self.terms[0].poly.is_constant()
        {
            Some(&self.terms[0].coeff)
        } else {
            None
        }
    }
}

/// One expanded star-insertion term: a quotient diagram, the product of the
/// Laurent weights, and the delta-derivative record on the collapsed lines.
#[derive(Clone, Debug)]
pub struct StarTerm<R: Real> {
    pub diagram: FeynmanDiagram<R>,
    pub weight: LaurentSeries<R>,
    pub delta_orders: BTreeMap<LineId, u32>,
}

/// Expand the product of family counterterms into weighted quotient
/// diagrams. Split boundary legs are renamed back to the surviving line.
pub fn star_insert<R: Real>(
    d: &FeynmanDiagram<R>,
    family: &DisjointFamily,
    cts: &[LocalCounterterm<R>],
) -> Result<Vec<StarTerm<R>>> {
    if cts.len() != family.members.len() {
        return Err(Error::Subgraph(format!(
            "{} counterterms for {} family members",
            cts.len(),
            family.members.len()
        )));
    }
    let mut combos: Vec<(Vec<MomentumPolynomial<R>>, LaurentSeries<R>, BTreeMap<LineId, u32>)> = vec![(
        Vec::new(),
        LaurentSeries::constant(Complex::new(R::one(), R::zero()), i64::MAX / 4),
        BTreeMap::new(),
    )];
    for (member, ct) in family.members.iter().zip(cts.iter()) {
        let mut next = Vec::new();
        for term in ct.terms.iter() {
            let poly = rename_split_legs(&term.poly, member, d);
            for (ops, weight, deltas) in combos.iter() {
                let mut ops2 = ops.clone();
                ops2.push(poly.clone());
                let weight2 = weight.mul(&term.coeff)?;
                let mut deltas2 = deltas.clone();
                for (l, o) in term.delta_orders.iter() {
                    *deltas2.entry(l.clone()).or_insert(0) += o;
                }
                next.push((ops2, weight2, deltas2));
            }
        }
        combos = next;
        if combos.is_empty() {
            return Ok(Vec::new());
        }
    }
    let mut out = Vec::new();
    for (ops, weight, delta_orders) in combos {
        let diagram = quotient(d, family, &ops)?;
        out.push(StarTerm {
            diagram,
            weight,
            delta_orders,
        });
    }
    Ok(out)
}

fn rename_split_legs<R: Real>(
    poly: &MomentumPolynomial<R>,
    member: &crate::subgraph::Subdiagram,
    d: &FeynmanDiagram<R>,
) -> MomentumPolynomial<R> {
    // boundary legs split as <id>#in / <id>#out refer to the surviving line
    let mut renamed = poly.clone();
    for (l, _) in member.boundary(&d.graph) {
        for suffix in ["#in", "#out"] {
            let split = LineId(format!("{l}{suffix}"));
            renamed = renamed.substitute(&split, &[(l.clone(), R::one())]);
        }
    }
    renamed
}

/// Run configuration of the subtraction engine.
#[derive(Clone, Debug)]
pub struct RenormConfig<R> {
    pub scheme: Scheme,
    pub z_radius: R,
    pub z_samples: usize,
    pub tol_fit: R,
    pub tol_finite: R,
    /// Base momentum step of the Taylor stencils.
    pub taylor_h: R,
    pub numeric: NumericConfig<R>,
}

impl<R: Real> Default for RenormConfig<R> {
    fn default() -> Self {
        RenormConfig {
            scheme: Scheme::Paper,
            z_radius: r(0.1),
            z_samples: 32,
            tol_fit: r(1e-8),
            tol_finite: r(1e-4),
            taylor_h: r(0.5),
            numeric: NumericConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PointResult<R> {
    pub momenta: ExternalMomenta<R>,
    /// The subtracted series.
    pub series: LaurentSeries<R>,
    /// The unsubtracted series, for scale reference.
    pub raw_series: LaurentSeries<R>,
    pub fit_residual: R,
    /// Largest pole coefficient relative to the constant-term scale.
    pub rel_pole: R,
    pub finite: bool,
}

#[derive(Clone, Debug)]
pub struct RenormalizedAmplitude<R> {
    pub diagram_key: String,
    pub scheme: Scheme,
    pub counterterm: LocalCounterterm<R>,
    pub points: Vec<PointResult<R>>,
    pub finite: bool,
    pub notes: Vec<String>,
}

/// Memoizing driver of the recursion. Counterterms are computed bottom-up
/// (each family member is a strictly smaller subdiagram), and evaluation
/// grids are cached per diagram and momentum list.
pub struct RenormEngine<R: Real> {
    pub cfg: RenormConfig<R>,
    zs: Vec<C<R>>,
    memo_ct: BTreeMap<String, LocalCounterterm<R>>,
    ctx_cache: BTreeMap<String, EvalContext<R>>,
    grid_cache: BTreeMap<(String, String), EvalGrid<R>>,
}

impl<R: Real> RenormEngine<R> {
    pub fn new(cfg: RenormConfig<R>) -> Self {
        let zs = circle_samples(cfg.z_radius, cfg.z_samples);
        RenormEngine {
            cfg,
            zs,
            memo_ct: BTreeMap::new(),
            ctx_cache: BTreeMap::new(),
            grid_cache: BTreeMap::new(),
        }
    }

    pub fn z_samples(&self) -> &[C<R>] {
        &self.zs
    }

    pub(crate) fn context_pub(&mut self, d: &FeynmanDiagram<R>) -> Result<&EvalContext<R>> {
        self.context(d)
    }

    pub(crate) fn star_terms_pub(
        &mut self,
        d: &FeynmanDiagram<R>,
    ) -> Result<Vec<(StarTerm<R>, usize)>> {
        self.star_terms(d)
    }

    fn context(&mut self, d: &FeynmanDiagram<R>) -> Result<&EvalContext<R>> {
        let key = d.canonical_key();
        if !self.ctx_cache.contains_key(&key) {
            let ctx = EvalContext::new(d, self.cfg.numeric)?;
            self.ctx_cache.insert(key.clone(), ctx);
        }
        Ok(&self.ctx_cache[&key])
    }

    fn momenta_fingerprint(ps: &[ExternalMomenta<R>]) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for p in ps.iter() {
            for (l, v) in p.map.iter() {
                write!(s, "{l}:{:e},{:e},{:e},{:e};", v[0], v[1], v[2], v[3]).unwrap();
            }
            s.push('|');
        }
        s
    }

    /// Cached bare amplitude grid on the regulator circle.
    pub fn bare_grid(
        &mut self,
        d: &FeynmanDiagram<R>,
        ps: &[ExternalMomenta<R>],
    ) -> Result<EvalGrid<R>> {
        let key = (d.canonical_key(), Self::momenta_fingerprint(ps));
        if let Some(g) = self.grid_cache.get(&key) {
            return Ok(g.clone());
        }
        let zs = self.zs.clone();
        let grid = self.context(d)?.bare_batch(&zs, ps)?;
        self.grid_cache.insert(key, grid.clone());
        Ok(grid)
    }

    /// The subtracted-integrand grid: bare plus all star-inserted quotients
    /// weighted by their counterterm Laurent weights at each sample.
    pub fn rtilde_grid(
        &mut self,
        d: &FeynmanDiagram<R>,
        ps: &[ExternalMomenta<R>],
    ) -> Result<EvalGrid<R>> {
        let mut total = self.bare_grid(d, ps)?;
        for (term, _) in self.star_terms(d)? {
            let weights: Vec<C<R>> = self.zs.iter().map(|z| term.weight.eval(*z)).collect();
            let qgrid = self.bare_grid(&term.diagram, ps)?;
            total.add_scaled(&qgrid, &weights);
        }
        Ok(total)
    }

    /// All evaluable star-insertion terms of the subtraction sum, paired
    /// with their family index. Families whose counterterms vanish drop
    /// out; delta-derivative insertions are rejected.
    fn star_terms(&mut self, d: &FeynmanDiagram<R>) -> Result<Vec<(StarTerm<R>, usize)>> {
        let families = enumerate_disjoint_families(d)?;
        let mut out = Vec::new();
        for (fi, fam) in families.iter().enumerate() {
            let mut cts = Vec::new();
            let mut empty = false;
            for member in fam.members.iter() {
                let sub = member.induced_diagram(d)?;
                let ct = self.counterterm(&sub)?;
                if ct.is_empty() {
                    empty = true;
                    break;
                }
                cts.push(ct);
            }
            if empty {
                continue;
            }
            for term in star_insert(d, fam, &cts)? {
                if !term.delta_orders.is_empty() {
                    return Err(Error::UnsupportedSubdivergence(format!(
                        "family {fi} carries delta-derivative counterterm terms \
                         (superficial degree above zero)"
                    )));
                }
                out.push((term, fi));
            }
        }
        Ok(out)
    }

    /// One subtracted-integrand sample.
    pub fn rtilde_eval(
        &mut self,
        d: &FeynmanDiagram<R>,
        p: &ExternalMomenta<R>,
        z: C<R>,
    ) -> Result<C<R>> {
        let mut total = self.context(d)?.bare_batch(&[z], &[p.clone()])?.at(0, 0);
        for (term, _) in self.star_terms(d)? {
            let w = term.weight.eval(z);
            let v = self
                .context(&term.diagram)?
                .bare_batch(&[z], &[p.clone()])?
                .at(0, 0);
            total += w * v;
        }
        Ok(total)
    }

    /// Radial profile of the subtracted integrand: the bare profile plus
    /// the weighted quotient profiles (the collapsed lines sit at zero and
    /// do not shift the scale).
    pub fn rtilde_profile(
        &mut self,
        d: &FeynmanDiagram<R>,
        z: C<R>,
        p: &ExternalMomenta<R>,
        lambdas: &[R],
    ) -> Result<Vec<C<R>>> {
        let mut total = self.context(d)?.radial_profile(z, p, lambdas)?;
        for (term, _) in self.star_terms(d)? {
            let w = term.weight.eval(z);
            let prof = self.context(&term.diagram)?.radial_profile(z, p, lambdas)?;
            for (t, v) in total.iter_mut().zip(prof.iter()) {
                *t += w * *v;
            }
        }
        Ok(total)
    }

    /// The counterterm of a superficially divergent diagram, memoized.
    pub fn counterterm(&mut self, d: &FeynmanDiagram<R>) -> Result<LocalCounterterm<R>> {
        let key = d.canonical_key();
        if let Some(ct) = self.memo_ct.get(&key) {
            return Ok(ct.clone());
        }
        let (ct, _) = self.counterterm_with_grid(d, &[])?;
        Ok(ct)
    }

    fn fit_window(&self, d: &FeynmanDiagram<R>) -> Result<(i64, i64)> {
        let loops = d.graph.loop_count()? as i64;
        Ok((-2 * loops, 2))
    }

    fn fit_column(
        &self,
        grid: &EvalGrid<R>,
        col: usize,
        window: (i64, i64),
    ) -> Result<crate::laurent::FitResult<R>> {
        let samples: Vec<(C<R>, C<R>)> = self
            .zs
            .iter()
            .enumerate()
            .map(|(zi, z)| (*z, grid.at(zi, col)))
            .collect();
        fit_laurent(&samples, window, self.cfg.tol_fit)
    }

    /// Compute the counterterm and return it together with the shared
    /// evaluation grid over `[zero] ++ stencils ++ extra_ps`.
    fn counterterm_with_grid(
        &mut self,
        d: &FeynmanDiagram<R>,
        extra_ps: &[ExternalMomenta<R>],
    ) -> Result<(LocalCounterterm<R>, (EvalGrid<R>, Vec<ExternalMomenta<R>>))> {
        let key = d.canonical_key();
        let om = omega(d)?;
        let lines: Vec<LineId> = d
            .graph
            .internal_lines()
            .into_iter()
            .map(|(l, _, _)| l)
            .collect();

        // assemble the momentum columns: origin, stencils for the local
        // polynomial, then the caller's extra points
        let mut plist: Vec<ExternalMomenta<R>> = vec![ExternalMomenta::zero::<R>(d)];
        let degree = om.max(0) as usize;
        if om > 2 {
            return Err(Error::UnsupportedContinuation(format!(
                "local polynomials above degree two are not supported (Omega = {om})"
            )));
        }
        let dirs = if om >= 1 {
            taylor::default_directions(d)?
        } else {
            Vec::new()
        };
        let offsets = taylor::stencil_offsets(degree);
        let h = self.cfg.taylor_h;
        for u in dirs.iter() {
            for t in offsets.iter() {
                plist.push(u.scaled(h * r::<R>(*t)));
            }
        }
        let stencil_cols = plist.len();
        plist.extend(extra_ps.iter().cloned());

        let grid = self.rtilde_grid(d, &plist)?;
        if om < 0 {
            let ct = LocalCounterterm::empty(key.clone(), om, lines);
            self.memo_ct.insert(key, ct.clone());
            return Ok((ct, (grid, plist)));
        }

        let window = self.fit_window(d)?;
        // degree-0 series from the origin column
        let zero_fit = self.fit_column(&grid, 0, window)?;
        let mut terms: Vec<CtTerm<R>> = Vec::new();
        let scale = zero_fit.series.max_abs_coeff();

        let c0 = zero_fit.series.pole_part(self.cfg.scheme).neg();
        if !c0.is_zero() {
            if om == 0 {
                terms.push(CtTerm {
                    delta_orders: BTreeMap::new(),
                    poly: MomentumPolynomial::one(),
                    coeff: c0,
                });
            } else {
                // constant part of a quadratically divergent diagram:
                // distributed first-derivative delta terms
                let weight = om / 2;
                if om % 2 != 0 {
                    return Err(Error::HomogeneityViolation(format!(
                        "odd superficial degree {om} with a constant pole part"
                    )));
                }
                let share = Complex::new(R::one() / r::<R>(lines.len() as f64), R::zero());
                for l in lines.iter() {
                    let mut delta = BTreeMap::new();
                    delta.insert(l.clone(), weight as u32);
                    terms.push(CtTerm {
                        delta_orders: delta,
                        poly: MomentumPolynomial::one(),
                        coeff: c0.scale(share),
                    });
                }
            }
        }

        if om >= 2 && !dirs.is_empty() {
            // directional quadratic coefficients
            let n_ind = d.graph.external_lines().len() - 1;
            let independent: Vec<LineId> = d
                .graph
                .external_lines()
                .into_iter()
                .take(n_ind)
                .map(|(l, _, _)| l)
                .collect();
            let mut c2_dir: Vec<LaurentSeries<R>> = Vec::new();
            let mut c1_max = R::zero();
            for (di, _) in dirs.iter().enumerate() {
                let col_of = |t: f64| -> usize {
                    let idx = offsets
                        .iter()
                        .position(|x| (*x - t).abs() < 1e-12)
                        .expect("offset in stencil");
                    1 + di * offsets.len() + idx
                };
                // per sample: finite differences, then one fit per degree
                let mut c1_samples = Vec::with_capacity(self.zs.len());
                let mut c2_samples = Vec::with_capacity(self.zs.len());
                for (zi, z) in self.zs.iter().enumerate() {
                    let at = |t: f64| -> C<R> {
                        if t == 0.0 {
                            grid.at(zi, 0)
                        } else {
                            grid.at(zi, col_of(t))
                        }
                    };
                    let (coeffs, _errs) = taylor::coefficients_from_samples(&at, h, 2);
                    c1_samples.push((*z, coeffs[1]));
                    c2_samples.push((*z, coeffs[2]));
                }
                let c1_fit = fit_laurent(&c1_samples, window, r::<R>(1e30))?;
                c1_max = c1_max.max(c1_fit.series.max_abs_coeff());
                let c2_fit = fit_laurent(&c2_samples, window, r::<R>(1e30))?;
                c2_dir.push(c2_fit.series.pole_part(self.cfg.scheme).neg());
            }
            if c1_max > r::<R>(1e-5) * scale.max(R::min_positive_value()) {
                return Err(Error::HomogeneityViolation(format!(
                    "odd directional coefficient of size {:e}",
                    c1_max.to_f64().unwrap_or(f64::NAN)
                )));
            }
            // reconstruct the dot-product polynomial: axes first, pairs after
            let n_axes = independent.len();
            for i in 0..n_axes {
                let cii = &c2_dir[i];
                if !cii.is_zero() {
                    terms.push(CtTerm {
                        delta_orders: BTreeMap::new(),
                        poly: MomentumPolynomial::dot(independent[i].clone(), independent[i].clone()),
                        coeff: cii.clone(),
                    });
                }
            }
            let mut k = n_axes;
            for i in 0..n_axes {
                for j in (i + 1)..n_axes {
                    let cij = c2_dir[k]
                        .add(&c2_dir[i].neg())?
                        .add(&c2_dir[j].neg())?;
                    if !cij.is_zero() {
                        terms.push(CtTerm {
                            delta_orders: BTreeMap::new(),
                            poly: MomentumPolynomial::dot(
                                independent[i].clone(),
                                independent[j].clone(),
                            ),
                            coeff: cij,
                        });
                    }
                    k += 1;
                }
            }
        }

        let ct = LocalCounterterm {
            diagram_key: key.clone(),
            omega: om,
            lines,
            terms,
        };
        ct.check_homogeneity()?;
        self.memo_ct.insert(key, ct.clone());
        let _ = stencil_cols;
        Ok((ct, (grid, plist)))
    }

    /// Full subtraction and finiteness certification at the given points.
    pub fn renormalize(
        &mut self,
        d: &FeynmanDiagram<R>,
        pts: &[ExternalMomenta<R>],
    ) -> Result<RenormalizedAmplitude<R>> {
        let om = omega(d)?;
        // certification rays: the local polynomial is exact for the poles,
        // so the stencil along each point's ray pins the subtraction there
        let h = self.cfg.taylor_h;
        let offsets = taylor::stencil_offsets(om.max(0) as usize);
        let mut extra: Vec<ExternalMomenta<R>> = Vec::new();
        let mut ray_base: Vec<Option<usize>> = Vec::new();
        for pt in pts.iter() {
            let nonzero = pt.map.values().any(|v| v.iter().any(|x| *x != R::zero()));
            if nonzero && om >= 1 {
                ray_base.push(Some(extra.len()));
                for t in offsets.iter() {
                    extra.push(pt.scaled(h * r::<R>(*t)));
                }
            } else {
                ray_base.push(None);
            }
            extra.push(pt.clone());
        }
        let (ct, (grid, plist)) = self.counterterm_with_grid(d, &extra)?;
        let window = self.fit_window(d)?;
        let base_col = plist.len() - extra.len();

        let mut points = Vec::new();
        let mut notes = Vec::new();
        let mut all_finite = true;
        let mut cursor = base_col;
        for (pi, pt) in pts.iter().enumerate() {
            let ray = ray_base[pi].map(|off| base_col + off);
            if ray.is_some() {
                cursor += offsets.len();
            }
            let pt_col = cursor;
            cursor += 1;

            let raw_fit = self.fit_column(&grid, pt_col, window)?;
            let subtraction = if om < 0 {
                LaurentSeries::zero(window.1)
            } else if let Some(ray_col) = ray {
                // 1-d Taylor along the ray through pt; t* = 1
                let mut sub = LaurentSeries::zero(window.1);
                for deg in 0..=(om.max(0) as usize) {
                    let mut samples = Vec::with_capacity(self.zs.len());
                    for (zi, z) in self.zs.iter().enumerate() {
                        let at = |t: f64| -> C<R> {
                            if t == 0.0 {
                                grid.at(zi, 0)
                            } else {
                                let idx = offsets
                                    .iter()
                                    .position(|x| (*x - t).abs() < 1e-12)
                                    .expect("offset present");
                                grid.at(zi, ray_col + idx)
                            }
                        };
                        let (coeffs, _) =
                            taylor::coefficients_from_samples(&at, h, om.max(0) as usize);
                        samples.push((*z, coeffs[deg]));
                    }
                    let cfit = fit_laurent(&samples, window, r::<R>(1e30))?;
                    let t_star = R::one() / h; // pt = (1/h) * (h * pt)
                    let scalef = Complex::new(t_star.powi(deg as i32), R::zero());
                    sub = sub.add(&cfit.series.pole_part(self.cfg.scheme).neg().scale(scalef))?;
                }
                sub
            } else {
                ct.subtraction_series_at(pt, window.1)?
            };
            let series = raw_fit.series.add(&subtraction)?;

            let mut max_pole = R::zero();
            for (k, cv) in series.iter() {
                if k < 0 {
                    max_pole = max_pole.max(cv.norm());
                }
            }
            let denom = series
                .coefficient(0)
                .norm()
                .max(raw_fit.series.coefficient(0).norm())
                .max(R::min_positive_value());
            let rel_pole = max_pole / denom;
            let finite = rel_pole <= self.cfg.tol_finite;
            if !finite {
                all_finite = false;
                notes.push(format!(
                    "point {pi}: pole remainder {:e} above tolerance",
                    rel_pole.to_f64().unwrap_or(f64::NAN)
                ));
            }
            points.push(PointResult {
                momenta: pt.clone(),
                series,
                raw_series: raw_fit.series,
                fit_residual: raw_fit.residual,
                rel_pole,
                finite,
            });
        }
        Ok(RenormalizedAmplitude {
            diagram_key: d.canonical_key(),
            scheme: self.cfg.scheme,
            counterterm: ct,
            points,
            finite: all_finite,
            notes,
        })
    }

    /// Laurent series of the directional Taylor coefficients of the
    /// subtracted integrand, through `max_degree`; degrees above the
    /// superficial one probe the locality of the pole part.
    pub fn taylor_series_along(
        &mut self,
        d: &FeynmanDiagram<R>,
        u: &ExternalMomenta<R>,
        max_degree: usize,
    ) -> Result<Vec<LaurentSeries<R>>> {
        let h = self.cfg.taylor_h;
        let offsets = taylor::stencil_offsets(max_degree);
        let mut plist = vec![ExternalMomenta::zero::<R>(d)];
        for t in offsets.iter() {
            plist.push(u.scaled(h * r::<R>(*t)));
        }
        // run the full subtraction assembly on these columns
        let grid = self.rtilde_grid(d, &plist)?;
        let window = self.fit_window(d)?;
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            let mut samples = Vec::with_capacity(self.zs.len());
            for (zi, z) in self.zs.iter().enumerate() {
                let at = |t: f64| -> C<R> {
                    if t == 0.0 {
                        grid.at(zi, 0)
                    } else {
                        let idx = offsets
                            .iter()
                            .position(|x| (*x - t).abs() < 1e-12)
                            .expect("offset present");
                        grid.at(zi, 1 + idx)
                    }
                };
                let (coeffs, _) = taylor::coefficients_from_samples(&at, h, max_degree);
                samples.push((*z, coeffs[deg]));
            }
            out.push(fit_laurent(&samples, window, r::<R>(1e30))?.series);
        }
        Ok(out)
    }
}
