//! Loop-momentum basis: deterministic spanning tree, fundamental-cycle
//! coefficients, and routing of external momenta through the tree.

use crate::error::{Error, Result};
use crate::float::{r, Real};
use crate::graph::{FeynmanDiagram, Incidence, LineId, VertexId};
use std::collections::BTreeMap;

/// Assignment of a Euclidean 4-momentum to each external line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExternalMomenta<R> {
    pub map: BTreeMap<LineId, [R; 4]>,
}

impl<R: Real> ExternalMomenta<R> {
    pub fn zero<S: Real>(d: &FeynmanDiagram<S>) -> Self {
        let map = d
            .graph
            .external_lines()
            .into_iter()
            .map(|(id, _, _)| (id, [R::zero(); 4]))
            .collect();
        ExternalMomenta { map }
    }

    pub fn get(&self, l: &LineId) -> [R; 4] {
        self.map.get(l).copied().unwrap_or([R::zero(); 4])
    }

    pub fn set(&mut self, l: &LineId, p: [R; 4]) {
        self.map.insert(l.clone(), p);
    }

    /// Net external inflow per vertex: `in` lines count positive.
    pub fn vertex_inflows(&self, d: &FeynmanDiagram<R>) -> BTreeMap<VertexId, [R; 4]> {
        let mut out: BTreeMap<VertexId, [R; 4]> = BTreeMap::new();
        for (id, vertex, dir) in d.graph.external_lines() {
            let p = self.get(&id);
            let sign = match dir {
                crate::graph::Direction::In => R::one(),
                crate::graph::Direction::Out => -R::one(),
            };
            let entry = out.entry(vertex).or_insert([R::zero(); 4]);
            for k in 0..4 {
                entry[k] += sign * p[k];
            }
        }
        out
    }

    /// Total signed inflow; zero for a conserving assignment.
    pub fn total_inflow(&self, d: &FeynmanDiagram<R>) -> [R; 4] {
        let mut total = [R::zero(); 4];
        for (_, inflow) in self.vertex_inflows(d) {
            for k in 0..4 {
                total[k] += inflow[k];
            }
        }
        total
    }

    pub fn check_conservation(&self, d: &FeynmanDiagram<R>, tol: R) -> Result<()> {
        let t = self.total_inflow(d);
        let norm = t.iter().fold(R::zero(), |a, x| a + *x * *x).sqrt();
        if norm > tol {
            return Err(Error::ParamConstraint(format!(
                "external momenta do not conserve (|sum| = {:e})",
                norm.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: R) -> Self {
        let map = self
            .map
            .iter()
            .map(|(l, p)| (l.clone(), [p[0] * s, p[1] * s, p[2] * s, p[3] * s]))
            .collect();
        ExternalMomenta { map }
    }
}

/// Spanning tree plus fundamental-cycle data for a connected diagram.
#[derive(Clone, Debug)]
pub struct LoopBasis<R> {
    /// Internal lines in id order; all index spaces below refer to this.
    pub lines: Vec<LineId>,
    pub ends: Vec<(usize, usize)>,
    pub vertices: Vec<VertexId>,
    pub tree: Vec<usize>,
    pub loop_lines: Vec<usize>,
    /// `cycle[r][i]`: coefficient of loop momentum `i` on line `r`.
    pub cycle: Vec<Vec<i64>>,
    /// `route[r]`: external-line coefficients of the tree-routed part.
    pub route: Vec<BTreeMap<LineId, R>>,
}

impl<R: Real> LoopBasis<R> {
    pub fn build(d: &FeynmanDiagram<R>) -> Result<Self> {
        if !d.graph.is_connected() {
            return Err(Error::Disconnected);
        }
        let vertices: Vec<VertexId> = d.graph.vertices().cloned().collect();
        let vindex = |v: &VertexId| vertices.iter().position(|x| x == v).unwrap();
        let internal = d.graph.internal_lines();
        let lines: Vec<LineId> = internal.iter().map(|(id, _, _)| id.clone()).collect();
        let ends: Vec<(usize, usize)> = internal
            .iter()
            .map(|(_, f, t)| (vindex(f), vindex(t)))
            .collect();
        let n = lines.len();
        let nv = vertices.len();

        // greedy union-find spanning tree in line-id order
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut tree = Vec::new();
        let mut in_tree = vec![false; n];
        for (i, (f, t)) in ends.iter().enumerate() {
            if f == t {
                continue;
            }
            let rf = find(&mut parent, *f);
            let rt = find(&mut parent, *t);
            if rf != rt {
                parent[rf] = rt;
                tree.push(i);
                in_tree[i] = true;
            }
        }
        let loop_lines: Vec<usize> = (0..n).filter(|i| !in_tree[*i]).collect();
        let nl = loop_lines.len();

        // tree adjacency for path finding
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv]; // (neighbor, line)
        for &i in tree.iter() {
            let (f, t) = ends[i];
            adj[f].push((t, i));
            adj[t].push((f, i));
        }
        let tree_path = |a: usize, b: usize| -> Vec<(usize, i64)> {
            // BFS from a to b over the tree; returns (line, sign along a->b)
            if a == b {
                return Vec::new();
            }
            let mut prev: Vec<Option<(usize, usize, i64)>> = vec![None; nv];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(a);
            let mut seen = vec![false; nv];
            seen[a] = true;
            while let Some(v) = queue.pop_front() {
                if v == b {
                    break;
                }
                for &(w, li) in adj[v].iter() {
                    if !seen[w] {
                        seen[w] = true;
                        // +1 when traversed from->to
                        let sign = if ends[li].0 == v { 1 } else { -1 };
                        prev[w] = Some((v, li, sign));
                        queue.push_back(w);
                    }
                }
            }
            let mut path = Vec::new();
            let mut cur = b;
            while cur != a {
                let (pv, li, sign) = prev[cur].expect("tree path exists");
                path.push((li, sign));
                cur = pv;
            }
            path
        };

        // fundamental cycles: loop momentum i runs along its loop line and
        // returns through the tree
        let mut cycle = vec![vec![0i64; nl]; n];
        for (i, &li) in loop_lines.iter().enumerate() {
            cycle[li][i] = 1;
            let (f, t) = ends[li];
            if f == t {
                continue;
            }
            for (tl, sign) in tree_path(t, f) {
                cycle[tl][i] += sign;
            }
        }

        // external routing: leaf-peel conservation on the tree
        let mut route: Vec<BTreeMap<LineId, R>> = vec![BTreeMap::new(); n];
        let mut resolved = vec![false; n];
        for &i in loop_lines.iter() {
            resolved[i] = true; // loop lines carry no external part
        }
        // symbolic inflow per vertex
        let mut inflow: Vec<BTreeMap<LineId, R>> = vec![BTreeMap::new(); nv];
        for (id, inc) in d.graph.lines() {
            if let Incidence::External { vertex, dir } = inc {
                let s = match dir {
                    crate::graph::Direction::In => R::one(),
                    crate::graph::Direction::Out => -R::one(),
                };
                *inflow[vindex(vertex)]
                    .entry(id.clone())
                    .or_insert_with(R::zero) += s;
            }
        }
        let mut tree_deg: Vec<usize> = vec![0; nv];
        for &i in tree.iter() {
            tree_deg[ends[i].0] += 1;
            tree_deg[ends[i].1] += 1;
        }
        let mut done_v = vec![false; nv];
        for _ in 0..nv.saturating_sub(1) {
            // deterministic: lowest-index current leaf
            let v = (0..nv)
                .find(|&v| !done_v[v] && tree_deg[v] == 1)
                .ok_or_else(|| Error::SingularNetwork("tree peeling stalled".into()))?;
            // the single unresolved tree line at v
            let li = *tree
                .iter()
                .find(|&&i| !resolved[i] && (ends[i].0 == v || ends[i].1 == v))
                .ok_or_else(|| Error::SingularNetwork("leaf without line".into()))?;
            // conservation at v: sum_in - sum_out + inflow = 0
            let mut acc: BTreeMap<LineId, R> = inflow[v].clone();
            for &j in tree.iter() {
                if j == li || !resolved[j] {
                    continue;
                }
                let s = line_sign_at(ends[j], v);
                if s != 0 {
                    for (e, cv) in route[j].iter() {
                        *acc.entry(e.clone()).or_insert_with(R::zero) += r::<R>(s as f64) * *cv;
                    }
                }
            }
            let s_li = line_sign_at(ends[li], v);
            debug_assert!(s_li != 0);
            let scale = -R::one() / r::<R>(s_li as f64);
            route[li] = acc
                .into_iter()
                .map(|(e, cv)| (e, cv * scale))
                .filter(|(_, cv)| *cv != R::zero())
                .collect();
            resolved[li] = true;
            done_v[v] = true;
            tree_deg[v] -= 1;
            let other = if ends[li].0 == v { ends[li].1 } else { ends[li].0 };
            tree_deg[other] -= 1;
        }

        Ok(LoopBasis {
            lines,
            ends,
            vertices,
            tree,
            loop_lines,
            cycle,
            route,
        })
    }

    pub fn loop_count(&self) -> usize {
        self.loop_lines.len()
    }

    /// Momentum on line `ri` for given loop momenta and externals.
    pub fn line_momentum(
        &self,
        ri: usize,
        q: &[[R; 4]],
        p: &ExternalMomenta<R>,
    ) -> [R; 4] {
        let mut out = [R::zero(); 4];
        for (i, &cv) in self.cycle[ri].iter().enumerate() {
            if cv != 0 {
                let s = r::<R>(cv as f64);
                for k in 0..4 {
                    out[k] += s * q[i][k];
                }
            }
        }
        for (e, cv) in self.route[ri].iter() {
            let pe = p.get(e);
            for k in 0..4 {
                out[k] += *cv * pe[k];
            }
        }
        out
    }

    /// Residual of momentum conservation at every vertex; identically zero
    /// for conserving externals and arbitrary loop momenta.
    pub fn conservation_residual(
        &self,
        d: &FeynmanDiagram<R>,
        q: &[[R; 4]],
        p: &ExternalMomenta<R>,
    ) -> R {
        let inflows = p.vertex_inflows(d);
        let mut worst = R::zero();
        for (vi, v) in self.vertices.iter().enumerate() {
            let mut acc = [R::zero(); 4];
            if let Some(f) = inflows.get(v) {
                acc = *f;
            }
            for (ri, &(fidx, tidx)) in self.ends.iter().enumerate() {
                let s = if fidx == tidx {
                    0
                } else if tidx == vi {
                    1
                } else if fidx == vi {
                    -1
                } else {
                    0
                };
                if s != 0 {
                    let pm = self.line_momentum(ri, q, p);
                    for k in 0..4 {
                        acc[k] += r::<R>(s as f64) * pm[k];
                    }
                }
            }
            let norm = acc.iter().fold(R::zero(), |a, x| a + *x * *x).sqrt();
            worst = worst.max(norm);
        }
        worst
    }

    pub fn line_index(&self, l: &LineId) -> Option<usize> {
        self.lines.iter().position(|x| x == l)
    }
}

fn line_sign_at(ends: (usize, usize), v: usize) -> i64 {
    let (f, t) = ends;
    if f == t {
        0
    } else if t == v {
        1
    } else if f == v {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, bubble4, lid, nested_double_bubble, tadpole};

    #[test]
    fn bubble_basis_assigns_loop_plus_external() {
        let d = banana::<f64>(2, 1.0);
        let basis = LoopBasis::build(&d).unwrap();
        assert_eq!(basis.loop_count(), 1);
        let mut p = ExternalMomenta::zero::<f64>(&d);
        p.set(&lid("x1"), [1.0, 0.0, 0.0, 0.0]);
        p.set(&lid("x2"), [1.0, 0.0, 0.0, 0.0]);
        let q = vec![[0.3, 0.0, -0.2, 0.5]];
        // conservation holds identically
        assert!(basis.conservation_residual(&d, &q, &p) < 1e-12);
        // one line carries q(+-p), the other the rest
        let m1 = basis.line_momentum(0, &q, &p);
        let m2 = basis.line_momentum(1, &q, &p);
        let sum = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2], m1[3] + m2[3]];
        assert!((sum[0] - 1.0).abs() < 1e-12); // total flow equals inflow
    }

    #[test]
    fn tadpole_loop_momentum_is_free() {
        let d = tadpole::<f64>(1.0, 2);
        let basis = LoopBasis::build(&d).unwrap();
        assert_eq!(basis.loop_count(), 1);
        let mut p = ExternalMomenta::zero::<f64>(&d);
        p.set(&lid("x1"), [2.0, 0.0, 0.0, 0.0]);
        p.set(&lid("x2"), [2.0, 0.0, 0.0, 0.0]);
        let q = vec![[0.7, 0.1, 0.0, 0.0]];
        let m = basis.line_momentum(0, &q, &p);
        assert_eq!(m, [0.7, 0.1, 0.0, 0.0]);
        assert!(basis.conservation_residual(&d, &q, &p) < 1e-12);
    }

    #[test]
    fn tree_diagram_has_no_loops_and_fixed_momenta() {
        use crate::graph::{vid, FeynmanDiagram, FeynmanGraph, Incidence};
        let vs = [vid("a"), vid("b")];
        let lines = vec![
            (
                lid("l1"),
                Incidence::Internal {
                    from: vs[0].clone(),
                    to: vs[1].clone(),
                },
            ),
            (
                lid("x1"),
                Incidence::External {
                    vertex: vs[0].clone(),
                    dir: crate::graph::Direction::In,
                },
            ),
            (
                lid("x2"),
                Incidence::External {
                    vertex: vs[1].clone(),
                    dir: crate::graph::Direction::Out,
                },
            ),
        ];
        let g = FeynmanGraph::new(vs, lines).unwrap();
        let d = FeynmanDiagram::constant_ops(g, 1.0).unwrap();
        let basis = LoopBasis::build(&d).unwrap();
        assert_eq!(basis.loop_count(), 0);
        let mut p = ExternalMomenta::zero::<f64>(&d);
        p.set(&lid("x1"), [1.0, 2.0, 0.0, 0.0]);
        p.set(&lid("x2"), [1.0, 2.0, 0.0, 0.0]);
        let m = basis.line_momentum(0, &[], &p);
        // line carries the external flow from a to b (up to orientation)
        assert!((m[0].abs() - 1.0).abs() < 1e-12);
        assert!((m[1].abs() - 2.0).abs() < 1e-12);
        assert!(basis.conservation_residual(&d, &[], &p) < 1e-12);
    }

    #[test]
    fn conservation_holds_on_all_stock_diagrams_with_random_momenta() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in [
            banana::<f64>(2, 1.0),
            banana::<f64>(3, 1.0),
            bubble4::<f64>(1.0),
            nested_double_bubble::<f64>(1.0),
            tadpole::<f64>(1.0, 2),
        ] {
            let basis = LoopBasis::build(&d).unwrap();
            let exts = d.graph.external_lines();
            for _ in 0..5 {
                let mut p = ExternalMomenta::zero::<f64>(&d);
                // conserving assignment: last external absorbs the rest
                let mut total = [0.0; 4];
                for (id, _, dir) in exts.iter().take(exts.len() - 1) {
                    let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                    p.set(id, v);
                    let s = match dir {
                        crate::graph::Direction::In => 1.0,
                        crate::graph::Direction::Out => -1.0,
                    };
                    for k in 0..4 {
                        total[k] += s * v[k];
                    }
                }
                let (last_id, _, last_dir) = exts.last().unwrap();
                let s = match last_dir {
                    crate::graph::Direction::In => -1.0,
                    crate::graph::Direction::Out => 1.0,
                };
                p.set(last_id, [s * total[0], s * total[1], s * total[2], s * total[3]]);
                p.check_conservation(&d, 1e-10).unwrap();
                let q: Vec<[f64; 4]> = (0..basis.loop_count())
                    .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
                    .collect();
                assert!(basis.conservation_residual(&d, &q, &p) < 1e-10);
            }
        }
    }
}
