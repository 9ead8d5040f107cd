//! Subdiagram combinatorics: 1PI subdiagram enumeration, pairwise-disjoint
//! families, quotient construction, and the 1PI components of a painted
//! line subset.

use crate::error::{Error, Result};
use crate::float::Real;
use crate::graph::{
    Direction, FeynmanDiagram, FeynmanGraph, Incidence, LineId, VertexId, VertexOperator,
};
use crate::mompoly::MomentumPolynomial;
use std::collections::{BTreeMap, BTreeSet};

/// Enumeration refuses diagrams with more internal lines than this.
pub const DEFAULT_LINE_CAP: usize = 12;

const FAMILY_CAP: usize = 100_000;

/// A subdiagram of a fixed parent: a vertex subset together with a subset of
/// the internal lines induced on it. Boundary lines are derived on demand.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Subdiagram {
    pub vertices: BTreeSet<VertexId>,
    pub lines: BTreeSet<LineId>,
}

impl Subdiagram {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        lines: impl IntoIterator<Item = LineId>,
    ) -> Self {
        Subdiagram {
            vertices: vertices.into_iter().collect(),
            lines: lines.into_iter().collect(),
        }
    }

    /// Lines of the parent, not in this subdiagram, with an endpoint inside;
    /// a line with both endpoints inside shows up once entering and once
    /// leaving. Parent external lines attached inside are included.
    pub fn boundary(&self, parent: &FeynmanGraph) -> Vec<(LineId, Direction)> {
        let mut out = Vec::new();
        for (id, inc) in parent.lines() {
            if self.lines.contains(id) {
                continue;
            }
            match inc {
                Incidence::Internal { from, to } => {
                    if self.vertices.contains(to) {
                        out.push((id.clone(), Direction::In));
                    }
                    if self.vertices.contains(from) {
                        out.push((id.clone(), Direction::Out));
                    }
                }
                Incidence::External { vertex, dir } => {
                    if self.vertices.contains(vertex) {
                        out.push((id.clone(), *dir));
                    }
                }
            }
        }
        out
    }

    /// Structural validity against the parent: line endpoints inside the
    /// vertex set and all ids known.
    pub fn validate<R: Real>(&self, parent: &FeynmanDiagram<R>) -> Result<()> {
        for v in self.vertices.iter() {
            if !parent.graph.has_vertex(v) {
                return Err(Error::Subgraph(format!("unknown vertex {v}")));
            }
        }
        for l in self.lines.iter() {
            match parent.graph.incidence(l) {
                Some(Incidence::Internal { from, to }) => {
                    if !self.vertices.contains(from) || !self.vertices.contains(to) {
                        return Err(Error::Subgraph(format!(
                            "line {l} leaves the subdiagram vertex set"
                        )));
                    }
                }
                _ => return Err(Error::Subgraph(format!("line {l} is not internal"))),
            }
        }
        Ok(())
    }

    pub fn is_proper<R: Real>(&self, parent: &FeynmanDiagram<R>) -> bool {
        let all_lines = parent.graph.internal_count();
        !(self.vertices.len() == parent.graph.vertex_count() && self.lines.len() == all_lines)
    }

    /// 1PI test of the induced graph (externals ignored).
    pub fn is_1pi<R: Real>(&self, parent: &FeynmanDiagram<R>) -> bool {
        induced_bare_graph(self, parent).map_or(false, |g| g.is_1pi())
    }

    /// The subdiagram as a standalone diagram. Boundary lines keep their
    /// parent ids; an internal parent line appearing on both sides of the
    /// boundary is split into `<id>#in` / `<id>#out` external legs.
    pub fn induced_diagram<R: Real>(&self, parent: &FeynmanDiagram<R>) -> Result<FeynmanDiagram<R>> {
        self.validate(parent)?;
        let mut lines: Vec<(LineId, Incidence)> = Vec::new();
        for l in self.lines.iter() {
            if let Some(inc) = parent.graph.incidence(l) {
                lines.push((l.clone(), inc.clone()));
            }
        }
        // which boundary lines occur twice
        let boundary = self.boundary(&parent.graph);
        let mut seen: BTreeMap<LineId, usize> = BTreeMap::new();
        for (l, _) in boundary.iter() {
            *seen.entry(l.clone()).or_insert(0) += 1;
        }
        let mut renames: BTreeMap<(LineId, Direction), LineId> = BTreeMap::new();
        for (l, dir) in boundary.iter() {
            let ext_id = if seen[l] > 1 {
                let suffix = match dir {
                    Direction::In => "#in",
                    Direction::Out => "#out",
                };
                LineId(format!("{l}{suffix}"))
            } else {
                l.clone()
            };
            renames.insert((l.clone(), *dir), ext_id.clone());
            // attach to the endpoint inside the vertex set
            let vertex = match parent.graph.incidence(l) {
                Some(Incidence::Internal { from, to }) => match dir {
                    Direction::In => to.clone(),
                    Direction::Out => from.clone(),
                },
                Some(Incidence::External { vertex, .. }) => vertex.clone(),
                None => return Err(Error::Subgraph(format!("unknown boundary line {l}"))),
            };
            lines.push((ext_id, Incidence::External { vertex, dir: *dir }));
        }
        let graph = FeynmanGraph::new(self.vertices.iter().cloned(), lines)?;
        let mut ops = BTreeMap::new();
        for v in self.vertices.iter() {
            let signs = graph.conservation_signs(v);
            let raw = parent.vertex_ops[v].poly().clone();
            // operators referencing a split boundary line are ambiguous; only
            // constant operators are carried across that case
            let references_split = raw.terms().any(|(m, _)| {
                m.dots
                    .iter()
                    .any(|(a, b)| [a, b].iter().any(|x| seen.get(x).copied().unwrap_or(0) > 1))
            });
            if references_split {
                return Err(Error::Subgraph(format!(
                    "vertex operator at {v} references a line split by the boundary"
                )));
            }
            ops.insert(v.clone(), VertexOperator::new(raw, &signs)?);
        }
        let masses = self
            .lines
            .iter()
            .map(|l| (l.clone(), parent.masses[l]))
            .collect();
        FeynmanDiagram::new(graph, ops, masses)
    }
}

fn induced_bare_graph<R: Real>(sub: &Subdiagram, parent: &FeynmanDiagram<R>) -> Option<FeynmanGraph> {
    let mut lines = Vec::new();
    for l in sub.lines.iter() {
        match parent.graph.incidence(l) {
            Some(inc @ Incidence::Internal { from, to }) => {
                if !sub.vertices.contains(from) || !sub.vertices.contains(to) {
                    return None;
                }
                lines.push((l.clone(), inc.clone()));
            }
            _ => return None,
        }
    }
    // dummy external so isolated-vertex validation cannot trip; connectivity
    // ignores externals anyway
    let mut vs: Vec<VertexId> = sub.vertices.iter().cloned().collect();
    vs.sort();
    if vs.is_empty() {
        return None;
    }
    let mut all = lines;
    for (i, v) in vs.iter().enumerate() {
        all.push((
            LineId(format!("#ext{i}")),
            Incidence::External {
                vertex: v.clone(),
                dir: Direction::In,
            },
        ));
    }
    FeynmanGraph::new(vs, all).ok()
}

/// An ordered list of pairwise vertex-disjoint proper 1PI subdiagrams.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DisjointFamily {
    pub members: Vec<Subdiagram>,
}

impl DisjointFamily {
    pub fn validate<R: Real>(&self, parent: &FeynmanDiagram<R>) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Subgraph("empty family".into()));
        }
        for m in self.members.iter() {
            m.validate(parent)?;
            if !m.is_proper(parent) {
                return Err(Error::Subgraph(
                    "family member is the whole diagram".into(),
                ));
            }
            if !m.is_1pi(parent) {
                return Err(Error::Subgraph("family member is not 1PI".into()));
            }
        }
        for i in 0..self.members.len() {
            for j in (i + 1)..self.members.len() {
                if !self.members[i]
                    .vertices
                    .is_disjoint(&self.members[j].vertices)
                {
                    return Err(Error::Subgraph(
                        "family members share a vertex".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// All proper 1PI subdiagrams with at least one internal line, sorted by
/// vertex set then line set.
pub fn enumerate_1pi_subdiagrams<R: Real>(d: &FeynmanDiagram<R>) -> Result<Vec<Subdiagram>> {
    if !d.graph.is_1pi() {
        return Err(Error::NotOnePi);
    }
    let internal = d.graph.internal_lines();
    let n = internal.len();
    if n > DEFAULT_LINE_CAP {
        return Err(Error::Subgraph(format!(
            "{n} internal lines exceeds the enumeration cap of {DEFAULT_LINE_CAP}"
        )));
    }
    let mut out = Vec::new();
    for mask in 1u64..(1 << n) {
        if mask == (1 << n) - 1 {
            // the full line set is the diagram itself
            continue;
        }
        let mut vertices = BTreeSet::new();
        let mut lines = BTreeSet::new();
        for (i, (id, from, to)) in internal.iter().enumerate() {
            if mask & (1 << i) != 0 {
                lines.insert(id.clone());
                vertices.insert(from.clone());
                vertices.insert(to.clone());
            }
        }
        let sub = Subdiagram { vertices, lines };
        if sub.is_1pi(d) {
            out.push(sub);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// All non-empty families of pairwise vertex-disjoint proper 1PI
/// subdiagrams, canonically ordered.
pub fn enumerate_disjoint_families<R: Real>(d: &FeynmanDiagram<R>) -> Result<Vec<DisjointFamily>> {
    let subs = enumerate_1pi_subdiagrams(d)?;
    let mut out: Vec<DisjointFamily> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn rec(
        subs: &[Subdiagram],
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<DisjointFamily>,
    ) -> Result<()> {
        for i in start..subs.len() {
            let disjoint = current
                .iter()
                .all(|&j| subs[j].vertices.is_disjoint(&subs[i].vertices));
            if !disjoint {
                continue;
            }
            current.push(i);
            out.push(DisjointFamily {
                members: current.iter().map(|&j| subs[j].clone()).collect(),
            });
            if out.len() > FAMILY_CAP {
                return Err(Error::Subgraph("family enumeration exploded".into()));
            }
            rec(subs, i + 1, current, out)?;
            current.pop();
        }
        Ok(())
    }
    rec(&subs, 0, &mut current, &mut out)?;
    out.sort();
    Ok(out)
}

/// Collapse each family member to a fresh vertex carrying the corresponding
/// replacement operator. Lines internal to a member disappear; boundary
/// lines reattach preserving direction.
pub fn quotient<R: Real>(
    d: &FeynmanDiagram<R>,
    family: &DisjointFamily,
    ops: &[MomentumPolynomial<R>],
) -> Result<FeynmanDiagram<R>> {
    family.validate(d)?;
    if ops.len() != family.members.len() {
        return Err(Error::Subgraph(format!(
            "{} replacement operators for {} family members",
            ops.len(),
            family.members.len()
        )));
    }
    // fresh ids that cannot collide with user ids
    let fresh: Vec<VertexId> = (0..family.members.len())
        .map(|i| {
            let mut name = format!("~{}", i + 1);
            while d.graph.has_vertex(&VertexId(name.clone())) {
                name.insert(0, '~');
            }
            VertexId(name)
        })
        .collect();
    let mut vmap: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (i, m) in family.members.iter().enumerate() {
        for v in m.vertices.iter() {
            vmap.insert(v.clone(), fresh[i].clone());
        }
    }
    let map = |v: &VertexId| vmap.get(v).cloned().unwrap_or_else(|| v.clone());
    let dropped: BTreeSet<LineId> = family
        .members
        .iter()
        .flat_map(|m| m.lines.iter().cloned())
        .collect();

    let mut vertices: BTreeSet<VertexId> = d
        .graph
        .vertices()
        .filter(|v| !vmap.contains_key(v))
        .cloned()
        .collect();
    vertices.extend(fresh.iter().cloned());

    let mut lines = Vec::new();
    let mut masses = BTreeMap::new();
    for (id, inc) in d.graph.lines() {
        if dropped.contains(id) {
            continue;
        }
        match inc {
            Incidence::Internal { from, to } => {
                lines.push((
                    id.clone(),
                    Incidence::Internal {
                        from: map(from),
                        to: map(to),
                    },
                ));
                masses.insert(id.clone(), d.masses[id]);
            }
            Incidence::External { vertex, dir } => {
                lines.push((
                    id.clone(),
                    Incidence::External {
                        vertex: map(vertex),
                        dir: *dir,
                    },
                ));
            }
        }
    }
    let graph = FeynmanGraph::new(vertices, lines)?;
    let mut vertex_ops = BTreeMap::new();
    for v in graph.vertices() {
        let raw = if let Some(i) = fresh.iter().position(|f| f == v) {
            ops[i].clone()
        } else {
            d.vertex_ops[v].poly().clone()
        };
        let signs = graph.conservation_signs(v);
        vertex_ops.insert(v.clone(), VertexOperator::new(raw, &signs)?);
    }
    FeynmanDiagram::new(graph, vertex_ops, masses)
}

/// The 1PI components of the painted line subset `a`, i.e. the bridgeless
/// blocks of the painted subgraph with at least one line, completed by
/// boundary lines on demand. Bare vertices are dropped.
pub fn painted_components<R: Real>(
    d: &FeynmanDiagram<R>,
    a: &BTreeSet<LineId>,
) -> Result<Vec<Subdiagram>> {
    let internal: BTreeMap<LineId, (VertexId, VertexId)> = d
        .graph
        .internal_lines()
        .into_iter()
        .map(|(id, f, t)| (id, (f, t)))
        .collect();
    for l in a.iter() {
        if !internal.contains_key(l) {
            return Err(Error::Subgraph(format!("painted line {l} is not internal")));
        }
    }
    let painted: Vec<(LineId, VertexId, VertexId)> = a
        .iter()
        .map(|l| {
            let (f, t) = internal[l].clone();
            (l.clone(), f, t)
        })
        .collect();

    // brute-force bridge detection inside the painted subgraph
    let connected_within = |skip: Option<&LineId>, start: &VertexId| -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut stack = vec![start.clone()];
        while let Some(v) = stack.pop() {
            for (id, f, t) in painted.iter() {
                if Some(id) == skip {
                    continue;
                }
                let other = if f == &v {
                    t
                } else if t == &v {
                    f
                } else {
                    continue;
                };
                if seen.insert(other.clone()) {
                    stack.push(other.clone());
                }
            }
        }
        seen
    };
    let mut bridges: BTreeSet<LineId> = BTreeSet::new();
    for (id, f, t) in painted.iter() {
        if f == t {
            continue;
        }
        let reach = connected_within(Some(id), f);
        if !reach.contains(t) {
            bridges.insert(id.clone());
        }
    }
    // components of painted minus bridges
    let mut unassigned: BTreeSet<LineId> = painted
        .iter()
        .filter(|(id, _, _)| !bridges.contains(id))
        .map(|(id, _, _)| id.clone())
        .collect();
    let mut comps = Vec::new();
    while let Some(seed) = unassigned.iter().next().cloned() {
        let mut lines = BTreeSet::new();
        let mut verts = BTreeSet::new();
        let (f0, t0) = internal[&seed].clone();
        lines.insert(seed.clone());
        verts.insert(f0);
        verts.insert(t0);
        loop {
            let mut grew = false;
            for (id, f, t) in painted.iter() {
                if bridges.contains(id) || lines.contains(id) {
                    continue;
                }
                if verts.contains(f) || verts.contains(t) {
                    lines.insert(id.clone());
                    verts.insert(f.clone());
                    verts.insert(t.clone());
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        for l in lines.iter() {
            unassigned.remove(l);
        }
        comps.push(Subdiagram {
            vertices: verts,
            lines,
        });
    }
    comps.sort();
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, bubble4, lid, nested_double_bubble, omega, vid};

    /// Independent oracle: exhaustive scan over line subsets with a
    /// delete-each-line 1PI check written from scratch.
    fn brute_1pi_subdiagrams(d: &FeynmanDiagram<f64>) -> Vec<(Vec<String>, Vec<String>)> {
        let internal = d.graph.internal_lines();
        let n = internal.len();
        let mut out = Vec::new();
        for mask in 1u64..(1u64 << n) {
            let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if chosen.len() == n {
                continue;
            }
            let mut verts: BTreeSet<String> = BTreeSet::new();
            for &i in chosen.iter() {
                verts.insert(internal[i].1 .0.clone());
                verts.insert(internal[i].2 .0.clone());
            }
            let vlist: Vec<String> = verts.iter().cloned().collect();
            let connected = |skip: Option<usize>| -> bool {
                if vlist.is_empty() {
                    return false;
                }
                let mut seen = vec![false; vlist.len()];
                seen[0] = true;
                let mut stack = vec![0usize];
                while let Some(vi) = stack.pop() {
                    for &i in chosen.iter() {
                        if Some(i) == skip {
                            continue;
                        }
                        let (f, t) = (&internal[i].1 .0, &internal[i].2 .0);
                        let fi = vlist.iter().position(|x| x == f).unwrap();
                        let ti = vlist.iter().position(|x| x == t).unwrap();
                        if fi == vi && !seen[ti] {
                            seen[ti] = true;
                            stack.push(ti);
                        }
                        if ti == vi && !seen[fi] {
                            seen[fi] = true;
                            stack.push(fi);
                        }
                    }
                }
                seen.iter().all(|&x| x)
            };
            if !connected(None) {
                continue;
            }
            let mut ok = true;
            for &i in chosen.iter() {
                if internal[i].1 == internal[i].2 {
                    continue;
                }
                if !connected(Some(i)) {
                    ok = false;
                    break;
                }
            }
            if ok {
                let ls: Vec<String> = chosen.iter().map(|&i| internal[i].0 .0.clone()).collect();
                out.push((vlist, ls));
            }
        }
        out.sort();
        out
    }

    fn keys(subs: &[Subdiagram]) -> Vec<(Vec<String>, Vec<String>)> {
        let mut v: Vec<_> = subs
            .iter()
            .map(|s| {
                (
                    s.vertices.iter().map(|x| x.0.clone()).collect::<Vec<_>>(),
                    s.lines.iter().map(|x| x.0.clone()).collect::<Vec<_>>(),
                )
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn bubble_has_no_proper_1pi_subdiagrams() {
        let d = bubble4::<f64>(1.0);
        assert!(enumerate_1pi_subdiagrams(&d).unwrap().is_empty());
        assert!(enumerate_disjoint_families(&d).unwrap().is_empty());
    }

    #[test]
    fn sunset_has_three_pair_subdiagrams() {
        let d = banana::<f64>(3, 1.0);
        let subs = enumerate_1pi_subdiagrams(&d).unwrap();
        assert_eq!(subs.len(), 3);
        for s in subs.iter() {
            assert_eq!(s.vertices.len(), 2);
            assert_eq!(s.lines.len(), 2);
        }
        assert_eq!(keys(&subs), brute_1pi_subdiagrams(&d));
        // families: three singletons, all pairwise vertex-overlapping
        let fams = enumerate_disjoint_families(&d).unwrap();
        assert_eq!(fams.len(), 3);
        assert!(fams.iter().all(|f| f.members.len() == 1));
    }

    #[test]
    fn nested_double_bubble_contains_inner_bubble() {
        let d = nested_double_bubble::<f64>(1.0);
        let subs = enumerate_1pi_subdiagrams(&d).unwrap();
        assert_eq!(keys(&subs), brute_1pi_subdiagrams(&d));
        let inner = Subdiagram::new([vid("a"), vid("b")], [lid("ab1"), lid("ab2")]);
        assert!(subs.contains(&inner));
        // the two four-line cycles through one inner line also qualify
        assert_eq!(subs.len(), 3);
    }

    #[test]
    fn disjoint_pair_family_found_in_ring() {
        // ring of vertices a..f with double lines a-b and c-d
        let names = ["a", "b", "c", "d", "e", "f"];
        let vs: Vec<VertexId> = names.iter().map(|s| vid(s)).collect();
        let mut lines = Vec::new();
        let mut push = |i: usize, from: usize, to: usize| {
            lines.push((
                lid(&format!("l{i}")),
                Incidence::Internal {
                    from: vs[from].clone(),
                    to: vs[to].clone(),
                },
            ));
        };
        push(1, 0, 1);
        push(2, 0, 1);
        push(3, 1, 2);
        push(4, 2, 3);
        push(5, 2, 3);
        push(6, 3, 4);
        push(7, 4, 5);
        push(8, 5, 0);
        lines.push((
            lid("x1"),
            Incidence::External {
                vertex: vs[0].clone(),
                dir: Direction::In,
            },
        ));
        lines.push((
            lid("x2"),
            Incidence::External {
                vertex: vs[3].clone(),
                dir: Direction::Out,
            },
        ));
        let g = FeynmanGraph::new(vs.clone(), lines).unwrap();
        let d = FeynmanDiagram::constant_ops(g, 1.0).unwrap();
        assert!(d.graph.is_1pi());
        let fams = enumerate_disjoint_families(&d).unwrap();
        let bubble_ab = Subdiagram::new([vs[0].clone(), vs[1].clone()], [lid("l1"), lid("l2")]);
        let bubble_cd = Subdiagram::new([vs[2].clone(), vs[3].clone()], [lid("l4"), lid("l5")]);
        let two = fams
            .iter()
            .any(|f| f.members.len() == 2 && f.members.contains(&bubble_ab) && f.members.contains(&bubble_cd));
        assert!(two, "two-bubble family missing");
    }

    #[test]
    fn quotient_of_sunset_is_a_self_loop_tadpole() {
        let d = banana::<f64>(3, 1.0);
        let gamma = Subdiagram::new([vid("v1"), vid("v2")], [lid("l1"), lid("l2")]);
        let fam = DisjointFamily {
            members: vec![gamma],
        };
        let q = quotient(&d, &fam, &[MomentumPolynomial::one()]).unwrap();
        assert_eq!(q.graph.vertex_count(), 1);
        let ints = q.graph.internal_lines();
        assert_eq!(ints.len(), 1);
        assert_eq!(ints[0].0, lid("l3"));
        assert_eq!(ints[0].1, ints[0].2); // self-loop
        assert_eq!(q.graph.external_lines().len(), 2);
        assert_eq!(q.graph.loop_count().unwrap(), 1);
    }

    #[test]
    fn quotient_of_nested_double_bubble_is_triangle() {
        let d = nested_double_bubble::<f64>(1.0);
        let gamma = Subdiagram::new([vid("a"), vid("b")], [lid("ab1"), lid("ab2")]);
        let fam = DisjointFamily {
            members: vec![gamma],
        };
        let q = quotient(&d, &fam, &[MomentumPolynomial::one()]).unwrap();
        assert_eq!(q.graph.vertex_count(), 3);
        assert_eq!(q.graph.internal_count(), 3);
        assert_eq!(q.graph.loop_count().unwrap(), 1);
        assert!(q.graph.is_1pi());
    }

    #[test]
    fn quotient_by_the_whole_diagram_is_rejected() {
        let d = banana::<f64>(3, 1.0);
        let fam = DisjointFamily {
            members: vec![Subdiagram::new(
                [vid("v1"), vid("v2")],
                [lid("l1"), lid("l2"), lid("l3")],
            )],
        };
        assert!(quotient(&d, &fam, &[MomentumPolynomial::one()]).is_err());
    }

    #[test]
    fn painted_components_on_sunset() {
        let d = banana::<f64>(3, 1.0);
        let two: BTreeSet<LineId> = [lid("l1"), lid("l2")].into_iter().collect();
        let comps = painted_components(&d, &two).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].lines, two);

        let one: BTreeSet<LineId> = [lid("l1")].into_iter().collect();
        assert!(painted_components(&d, &one).unwrap().is_empty());
        assert!(painted_components(&d, &BTreeSet::new()).unwrap().is_empty());
    }

    #[test]
    fn painting_a_full_subdiagram_recovers_it() {
        for d in [banana::<f64>(3, 1.0), nested_double_bubble::<f64>(1.0)] {
            for sub in enumerate_1pi_subdiagrams(&d).unwrap() {
                let comps = painted_components(&d, &sub.lines).unwrap();
                assert_eq!(comps, vec![sub.clone()]);
            }
        }
    }

    #[test]
    fn loop_and_omega_additivity_under_quotient() {
        for d in [banana::<f64>(3, 1.0), nested_double_bubble::<f64>(1.0)] {
            let l_total = d.graph.loop_count().unwrap();
            for fam in enumerate_disjoint_families(&d).unwrap() {
                let ops: Vec<MomentumPolynomial<f64>> =
                    fam.members.iter().map(|_| MomentumPolynomial::one()).collect();
                let q = quotient(&d, &fam, &ops).unwrap();
                let mut l_sum = q.graph.loop_count().unwrap();
                let mut omega_sum = omega(&q).unwrap();
                for m in fam.members.iter() {
                    let sub = m.induced_diagram(&d).unwrap();
                    l_sum += sub.graph.loop_count().unwrap();
                    omega_sum += omega(&sub).unwrap();
                }
                assert_eq!(l_sum, l_total);
                assert_eq!(omega_sum, omega(&d).unwrap());
            }
        }
    }

    #[test]
    fn enumeration_is_stable_and_duplicate_free() {
        let d = nested_double_bubble::<f64>(1.0);
        let a = enumerate_1pi_subdiagrams(&d).unwrap();
        let b = enumerate_1pi_subdiagrams(&d).unwrap();
        assert_eq!(a, b);
        let mut dedup = a.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), a.len());
    }

    #[test]
    fn induced_diagram_splits_double_boundary_lines() {
        let d = banana::<f64>(3, 1.0);
        let gamma = Subdiagram::new([vid("v1"), vid("v2")], [lid("l1"), lid("l2")]);
        let sub = gamma.induced_diagram(&d).unwrap();
        assert_eq!(sub.graph.internal_count(), 2);
        let ext: Vec<String> = sub
            .graph
            .external_lines()
            .into_iter()
            .map(|(l, _, _)| l.0)
            .collect();
        assert!(ext.contains(&"l3#in".to_string()));
        assert!(ext.contains(&"l3#out".to_string()));
        assert!(ext.contains(&"x1".to_string()));
        assert!(ext.contains(&"x2".to_string()));
        assert_eq!(omega(&sub).unwrap(), 0);
    }
}
