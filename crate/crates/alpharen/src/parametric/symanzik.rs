//! Exact graph polynomials: the first Symanzik polynomial by spanning-tree
//! enumeration and by symbolic determinant of the loop form, and the
//! momentum polynomial by two-forest enumeration.

use crate::error::{Error, Result};
use crate::float::{r, Real};
use crate::graph::VertexId;
use crate::parametric::basis::LoopBasis;
use std::collections::BTreeMap;

/// Integer-coefficient polynomial in the line parameters, exponents by
/// line index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaPoly {
    pub n: usize,
    pub terms: BTreeMap<Vec<u8>, i64>,
}

impl AlphaPoly {
    pub fn zero(n: usize) -> Self {
        AlphaPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, cv: i64) -> Self {
        let mut p = Self::zero(n);
        if cv != 0 {
            p.terms.insert(vec![0; n], cv);
        }
        p
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0u8; n];
        e[i] = 1;
        let mut p = Self::zero(n);
        p.terms.insert(e, 1);
        p
    }

    pub fn add_term(&mut self, expo: Vec<u8>, cv: i64) {
        let entry = self.terms.entry(expo).or_insert(0);
        *entry += cv;
        if *entry == 0 {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| **v == 0)
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, cv) in other.terms.iter() {
            out.add_term(e.clone(), *cv);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, cv) in other.terms.iter() {
            out.add_term(e.clone(), -*cv);
        }
        out
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (ea, ca) in self.terms.iter() {
            for (eb, cb) in other.terms.iter() {
                let e: Vec<u8> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: i64) -> Self {
        let mut out = Self::zero(self.n);
        if s == 0 {
            return out;
        }
        for (e, cv) in self.terms.iter() {
            out.terms.insert(e.clone(), cv * s);
        }
        out
    }

    pub fn eval<R: Real>(&self, alpha: &[R]) -> R {
        let mut acc = R::zero();
        for (e, cv) in self.terms.iter() {
            let mut t = r::<R>(*cv as f64);
            for (i, &pow) in e.iter().enumerate() {
                for _ in 0..pow {
                    t = t * alpha[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// First Symanzik polynomial by spanning-tree enumeration:
/// `U = sum over trees T of prod_{r not in T} alpha_r`.
pub fn u_from_trees<R: Real>(basis: &LoopBasis<R>) -> AlphaPoly {
    let n = basis.lines.len();
    let nv = basis.vertices.len();
    let mut u = AlphaPoly::zero(n);
    let candidates: Vec<usize> = (0..n).filter(|&i| basis.ends[i].0 != basis.ends[i].1).collect();
    let want = nv - 1;
    if want == 0 {
        // single vertex: the empty tree, complement is everything
        let e: Vec<u8> = vec![1; n];
        u.add_term(e, 1);
        return u;
    }
    let mut choice: Vec<usize> = Vec::with_capacity(want);
    enumerate_forests(basis, &candidates, want, 0, &mut choice, &mut |chosen| {
        // connected acyclic with nv-1 edges == spanning tree
        if count_components(nv, basis, chosen) == 1 {
            let mut e = vec![1u8; n];
            for &i in chosen.iter() {
                e[i] = 0;
            }
            u.add_term(e, 1);
        }
    });
    u
}

fn enumerate_forests<R: Real, F: FnMut(&[usize])>(
    basis: &LoopBasis<R>,
    candidates: &[usize],
    want: usize,
    start: usize,
    choice: &mut Vec<usize>,
    emit: &mut F,
) {
    if choice.len() == want {
        if is_acyclic(basis, choice) {
            emit(choice);
        }
        return;
    }
    let left = want - choice.len();
    for pos in start..candidates.len() {
        if candidates.len() - pos < left {
            break;
        }
        choice.push(candidates[pos]);
        if is_acyclic(basis, choice) {
            enumerate_forests(basis, candidates, want, pos + 1, choice, emit);
        }
        choice.pop();
    }
}

fn is_acyclic<R: Real>(basis: &LoopBasis<R>, chosen: &[usize]) -> bool {
    let nv = basis.vertices.len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &i in chosen.iter() {
        let (f, t) = basis.ends[i];
        let (rf, rt) = (find(&mut parent, f), find(&mut parent, t));
        if rf == rt {
            return false;
        }
        parent[rf] = rt;
    }
    true
}

fn count_components<R: Real>(nv: usize, basis: &LoopBasis<R>, chosen: &[usize]) -> usize {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = nv;
    for &i in chosen.iter() {
        let (f, t) = basis.ends[i];
        let (rf, rt) = (find(&mut parent, f), find(&mut parent, t));
        if rf != rt {
            parent[rf] = rt;
            comps -= 1;
        }
    }
    comps
}

const DET_LOOP_CAP: usize = 7;

/// First Symanzik polynomial as the determinant of the loop-momentum form
/// `Q(alpha)_{ij} = sum_r alpha_r c_{ri} c_{rj}`.
pub fn u_from_det<R: Real>(basis: &LoopBasis<R>) -> Result<AlphaPoly> {
    let l = basis.loop_count();
    let n = basis.lines.len();
    if l > DET_LOOP_CAP {
        return Err(Error::Subgraph(format!(
            "symbolic determinant capped at {DET_LOOP_CAP} loops"
        )));
    }
    if l == 0 {
        return Ok(AlphaPoly::constant(n, 1));
    }
    let mut entries = vec![AlphaPoly::zero(n); l * l];
    for i in 0..l {
        for j in 0..l {
            let mut e = AlphaPoly::zero(n);
            for ri in 0..n {
                let cij = basis.cycle[ri][i] * basis.cycle[ri][j];
                if cij != 0 {
                    e = e.plus(&AlphaPoly::var(n, ri).scale(cij));
                }
            }
            entries[i * l + j] = e;
        }
    }
    Ok(det_poly(&entries, l))
}

fn det_poly(entries: &[AlphaPoly], l: usize) -> AlphaPoly {
    let n = entries[0].n;
    if l == 1 {
        return entries[0].clone();
    }
    let mut acc = AlphaPoly::zero(n);
    // Laplace expansion along the first row
    for j in 0..l {
        if entries[j].is_zero() {
            continue;
        }
        let mut minor = Vec::with_capacity((l - 1) * (l - 1));
        for i in 1..l {
            for jj in 0..l {
                if jj != j {
                    minor.push(entries[i * l + jj].clone());
                }
            }
        }
        let sub = det_poly(&minor, l - 1);
        let term = entries[j].times(&sub);
        acc = if j % 2 == 0 {
            acc.plus(&term)
        } else {
            acc.minus(&term)
        };
    }
    acc
}

/// Momentum polynomial term: off-forest line exponents together with the
/// vertex side whose squared external inflow multiplies the monomial.
#[derive(Clone, Debug)]
pub struct ForestTerm {
    pub expo: Vec<u8>,
    pub side: Vec<VertexId>,
}

/// Two-forest enumeration:
/// `F = sum over 2-forests (T1, T2) of (inflow into T1)^2 prod_{r off-forest} alpha_r`.
pub fn f_from_forests<R: Real>(basis: &LoopBasis<R>) -> Vec<ForestTerm> {
    let n = basis.lines.len();
    let nv = basis.vertices.len();
    if nv < 2 {
        return Vec::new();
    }
    let want = nv - 2;
    let candidates: Vec<usize> = (0..n).filter(|&i| basis.ends[i].0 != basis.ends[i].1).collect();
    let mut out = Vec::new();
    let mut choice = Vec::with_capacity(want);
    enumerate_forests(basis, &candidates, want, 0, &mut choice, &mut |chosen| {
        if count_components(nv, basis, chosen) != 2 {
            return;
        }
        // identify the component containing vertex 0
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &i in chosen.iter() {
            let (f, t) = basis.ends[i];
            let (rf, rt) = (find(&mut parent, f), find(&mut parent, t));
            if rf != rt {
                parent[rf] = rt;
            }
        }
        let root0 = find(&mut parent, 0);
        let side: Vec<VertexId> = (0..nv)
            .filter(|&v| find(&mut parent, v) == root0)
            .map(|v| basis.vertices[v].clone())
            .collect();
        let mut e = vec![1u8; n];
        for &i in chosen.iter() {
            e[i] = 0;
        }
        out.push(ForestTerm { expo: e, side });
    });
    out
}

/// Evaluate the momentum polynomial for given parameters and per-vertex
/// external inflows.
pub fn eval_forest_terms<R: Real>(
    terms: &[ForestTerm],
    alpha: &[R],
    inflows: &BTreeMap<VertexId, [R; 4]>,
) -> R {
    let mut acc = R::zero();
    for t in terms.iter() {
        let mut flow = [R::zero(); 4];
        for v in t.side.iter() {
            if let Some(f) = inflows.get(v) {
                for k in 0..4 {
                    flow[k] += f[k];
                }
            }
        }
        let sq = flow.iter().fold(R::zero(), |a, x| a + *x * *x);
        if sq == R::zero() {
            continue;
        }
        let mut mono = sq;
        for (i, &pow) in t.expo.iter().enumerate() {
            for _ in 0..pow {
                mono = mono * alpha[i];
            }
        }
        acc += mono;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, bubble4, nested_double_bubble, tadpole};
    use crate::parametric::basis::LoopBasis;

    fn poly_of(d: &crate::graph::FeynmanDiagram<f64>) -> (AlphaPoly, AlphaPoly) {
        let basis = LoopBasis::build(d).unwrap();
        (u_from_trees(&basis), u_from_det(&basis).unwrap())
    }

    #[test]
    fn bubble_u_is_sum_of_alphas() {
        let (u, udet) = poly_of(&banana::<f64>(2, 1.0));
        assert_eq!(u, udet);
        assert!((u.eval::<f64>(&[2.0, 5.0]) - 7.0).abs() < 1e-14);
        assert_eq!(u.terms.len(), 2);
    }

    #[test]
    fn sunset_u_is_pairwise_products() {
        let (u, udet) = poly_of(&banana::<f64>(3, 1.0));
        assert_eq!(u, udet);
        // a1 a2 + a1 a3 + a2 a3
        assert_eq!(u.terms.len(), 3);
        assert!((u.eval::<f64>(&[1.0, 2.0, 3.0]) - 11.0).abs() < 1e-14);
    }

    #[test]
    fn tadpole_u_is_single_alpha() {
        let (u, udet) = poly_of(&tadpole::<f64>(1.0, 2));
        assert_eq!(u, udet);
        assert!((u.eval::<f64>(&[4.0]) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn det_equals_trees_on_stock_diagrams() {
        for d in [
            bubble4::<f64>(1.0),
            banana::<f64>(4, 1.0),
            nested_double_bubble::<f64>(1.0),
        ] {
            let (u, udet) = poly_of(&d);
            assert_eq!(u, udet);
        }
    }

    #[test]
    fn det_equals_trees_on_random_graphs() {
        use crate::graph::{lid, vid, FeynmanDiagram, FeynmanGraph, Incidence};
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut tested = 0;
        while tested < 40 {
            let nv = rng.gen_range(2..=5);
            let nl = rng.gen_range(nv - 1..=8.min(nv + 4));
            let vs: Vec<_> = (0..nv).map(|i| vid(&format!("v{i}"))).collect();
            let mut lines = Vec::new();
            for i in 0..nl {
                let a = rng.gen_range(0..nv);
                let b = rng.gen_range(0..nv);
                lines.push((
                    lid(&format!("l{i:02}")),
                    Incidence::Internal {
                        from: vs[a].clone(),
                        to: vs[b].clone(),
                    },
                ));
            }
            lines.push((
                lid("x1"),
                Incidence::External {
                    vertex: vs[0].clone(),
                    dir: crate::graph::Direction::In,
                },
            ));
            let Ok(g) = FeynmanGraph::new(vs.clone(), lines) else {
                continue;
            };
            if !g.is_connected() {
                continue;
            }
            let d = FeynmanDiagram::constant_ops(g, 1.0).unwrap();
            let basis = LoopBasis::build(&d).unwrap();
            let u = u_from_trees(&basis);
            let udet = u_from_det(&basis).unwrap();
            assert_eq!(u, udet, "det/tree mismatch on random graph");
            tested += 1;
        }
    }

    #[test]
    fn loop_count_equals_cycle_space_rank_via_trees() {
        // the spanning-tree construction provides the independent oracle
        for d in [
            banana::<f64>(2, 1.0),
            banana::<f64>(3, 1.0),
            nested_double_bubble::<f64>(1.0),
            tadpole::<f64>(1.0, 2),
        ] {
            let basis = LoopBasis::build(&d).unwrap();
            assert_eq!(basis.loop_count(), d.graph.loop_count().unwrap());
        }
    }

    #[test]
    fn sunset_f_is_triple_product() {
        let d = banana::<f64>(3, 1.0);
        let basis = LoopBasis::build(&d).unwrap();
        let f = f_from_forests(&basis);
        assert_eq!(f.len(), 1);
        let mut inflows = std::collections::BTreeMap::new();
        inflows.insert(crate::graph::vid("v1"), [1.0, 0.0, 0.0, 0.0]);
        inflows.insert(crate::graph::vid("v2"), [-1.0, 0.0, 0.0, 0.0]);
        let val: f64 = eval_forest_terms(&f, &[2.0, 3.0, 5.0], &inflows);
        assert!((val - 30.0).abs() < 1e-12); // p^2 * a1 a2 a3 with p^2 = 1
    }
}
