//! Feynman graphs and diagrams: incidence structure, structural predicates,
//! vertex operators, and power counting.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use crate::mompoly::MomentumPolynomial;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub String);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineId(pub String);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for LineId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn vid(s: &str) -> VertexId {
    VertexId(s.to_string())
}

pub fn lid(s: &str) -> LineId {
    LineId(s.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    In,
    Out,
}

/// What a line is attached to. Internal lines are ordered pairs; the momentum
/// flows `from -> to`, and conservation counts it positive at `to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Incidence {
    Internal { from: VertexId, to: VertexId },
    External { vertex: VertexId, dir: Direction },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeynmanGraph {
    vertices: BTreeSet<VertexId>,
    lines: BTreeMap<LineId, Incidence>,
}

impl FeynmanGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        lines: impl IntoIterator<Item = (LineId, Incidence)>,
    ) -> Result<Self> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut map = BTreeMap::new();
        for (id, inc) in lines {
            let mentioned: Vec<&VertexId> = match &inc {
                Incidence::Internal { from, to } => vec![from, to],
                Incidence::External { vertex, .. } => vec![vertex],
            };
            for v in mentioned {
                if !vertices.contains(v) {
                    return Err(Error::Graph(format!(
                        "line {id} references unknown vertex {v}"
                    )));
                }
            }
            if map.insert(id.clone(), inc).is_some() {
                return Err(Error::Graph(format!("duplicate line id {id}")));
            }
        }
        let graph = FeynmanGraph {
            vertices,
            lines: map,
        };
        for v in graph.vertices.iter() {
            if graph.incident_end_count(v) == 0 {
                return Err(Error::Graph(format!("vertex {v} has no incident line")));
            }
        }
        Ok(graph)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn lines(&self) -> impl Iterator<Item = (&LineId, &Incidence)> {
        self.lines.iter()
    }

    pub fn incidence(&self, l: &LineId) -> Option<&Incidence> {
        self.lines.get(l)
    }

    /// Internal lines in id order as `(id, from, to)`.
    pub fn internal_lines(&self) -> Vec<(LineId, VertexId, VertexId)> {
        self.lines
            .iter()
            .filter_map(|(id, inc)| match inc {
                Incidence::Internal { from, to } => Some((id.clone(), from.clone(), to.clone())),
                Incidence::External { .. } => None,
            })
            .collect()
    }

    /// External lines in id order as `(id, vertex, direction)`.
    pub fn external_lines(&self) -> Vec<(LineId, VertexId, Direction)> {
        self.lines
            .iter()
            .filter_map(|(id, inc)| match inc {
                Incidence::External { vertex, dir } => Some((id.clone(), vertex.clone(), *dir)),
                Incidence::Internal { .. } => None,
            })
            .collect()
    }

    pub fn internal_count(&self) -> usize {
        self.internal_lines().len()
    }

    /// Number of line-ends at a vertex; a self-loop contributes two.
    pub fn incident_end_count(&self, v: &VertexId) -> usize {
        let mut n = 0;
        for (_, inc) in self.lines.iter() {
            match inc {
                Incidence::Internal { from, to } => {
                    if from == v {
                        n += 1;
                    }
                    if to == v {
                        n += 1;
                    }
                }
                Incidence::External { vertex, .. } => {
                    if vertex == v {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    /// Lines incident to `v` (internal or external), id order, deduplicated.
    pub fn incident_lines(&self, v: &VertexId) -> Vec<LineId> {
        let mut out = Vec::new();
        for (id, inc) in self.lines.iter() {
            let hit = match inc {
                Incidence::Internal { from, to } => from == v || to == v,
                Incidence::External { vertex, .. } => vertex == v,
            };
            if hit {
                out.push(id.clone());
            }
        }
        out
    }

    /// Net conservation sign of each incident line momentum at `v`:
    /// `+1` flowing in, `-1` flowing out, `0` for a self-loop.
    pub fn conservation_signs(&self, v: &VertexId) -> BTreeMap<LineId, i64> {
        let mut out = BTreeMap::new();
        for (id, inc) in self.lines.iter() {
            let sign = match inc {
                Incidence::Internal { from, to } => {
                    let mut s = 0;
                    if to == v {
                        s += 1;
                    }
                    if from == v {
                        s -= 1;
                    }
                    if to != v && from != v {
                        continue;
                    }
                    s
                }
                Incidence::External { vertex, dir } => {
                    if vertex != v {
                        continue;
                    }
                    match dir {
                        Direction::In => 1,
                        Direction::Out => -1,
                    }
                }
            };
            out.insert(id.clone(), sign);
        }
        out
    }

    /// Connectivity through internal lines only.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices.iter().next() else {
            return true;
        };
        let skip: Option<&LineId> = None;
        self.reachable_from(start, skip) == self.vertices.len()
    }

    fn reachable_from(&self, start: &VertexId, skip_line: Option<&LineId>) -> usize {
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::new();
        queue.push_back(start.clone());
        while let Some(v) = queue.pop_front() {
            for (id, inc) in self.lines.iter() {
                if Some(id) == skip_line {
                    continue;
                }
                if let Incidence::Internal { from, to } = inc {
                    let other = if from == &v {
                        to
                    } else if to == &v {
                        from
                    } else {
                        continue;
                    };
                    if seen.insert(other.clone()) {
                        queue.push_back(other.clone());
                    }
                }
            }
        }
        seen.len()
    }

    /// One-particle irreducibility: connected and no single internal line
    /// whose removal disconnects the graph.
    pub fn is_1pi(&self) -> bool {
        if !self.is_connected() {
            return false;
        }
        let start = match self.vertices.iter().next() {
            Some(v) => v,
            None => return true,
        };
        for (id, inc) in self.lines.iter() {
            if let Incidence::Internal { from, to } = inc {
                if from == to {
                    continue; // self-loop removal never disconnects
                }
                if self.reachable_from(start, Some(id)) != self.vertices.len() {
                    return false;
                }
            }
        }
        true
    }

    /// First Betti number `#R_int - #V + 1` for a connected graph.
    pub fn loop_count(&self) -> Result<usize> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(self.internal_count() + 1 - self.vertex_count())
    }
}

/// Canonical vertex polynomial: the momentum of the lexicographically
/// largest incident line with nonzero conservation sign is eliminated.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexOperator<R> {
    poly: MomentumPolynomial<R>,
    degree: usize,
}

impl<R: Real> VertexOperator<R> {
    /// Canonicalize `raw` against the conservation relation at the vertex.
    pub fn new(raw: MomentumPolynomial<R>, signs: &BTreeMap<LineId, i64>) -> Result<Self> {
        for (mono, _) in raw.terms() {
            for (a, b) in mono.dots.iter() {
                for x in [a, b] {
                    if !signs.contains_key(x) {
                        return Err(Error::Graph(format!(
                            "vertex operator references non-incident line {x}"
                        )));
                    }
                }
            }
        }
        let poly = canonicalize(raw, signs);
        let degree = poly.momentum_degree();
        Ok(VertexOperator { poly, degree })
    }

    pub fn unit() -> Self {
        VertexOperator {
            poly: MomentumPolynomial::one(),
            degree: 0,
        }
    }

    pub fn constant(cv: R) -> Self {
        VertexOperator {
            poly: MomentumPolynomial::constant(cv),
            degree: 0,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn poly(&self) -> &MomentumPolynomial<R> {
        &self.poly
    }

    pub fn is_constant(&self) -> bool {
        self.poly.is_constant()
    }
}

fn canonicalize<R: Real>(
    raw: MomentumPolynomial<R>,
    signs: &BTreeMap<LineId, i64>,
) -> MomentumPolynomial<R> {
    // eliminate the largest incident momentum with nonzero sign
    let target = signs
        .iter()
        .filter(|(_, s)| **s != 0)
        .map(|(l, _)| l.clone())
        .max();
    let Some(target) = target else {
        return raw; // only self-loops: conservation is vacuous
    };
    let s_t = signs[&target];
    let replacement: Vec<(LineId, R)> = signs
        .iter()
        .filter(|(l, s)| **s != 0 && **l != target)
        .map(|(l, s)| (l.clone(), -r::<R>(*s as f64) / r::<R>(s_t as f64)))
        .collect();
    raw.substitute(&target, &replacement)
}

/// A Feynman graph dressed with vertex operators and line masses.
#[derive(Clone, Debug, PartialEq)]
pub struct FeynmanDiagram<R> {
    pub graph: FeynmanGraph,
    pub vertex_ops: BTreeMap<VertexId, VertexOperator<R>>,
    pub masses: BTreeMap<LineId, R>,
}

impl<R: Real> FeynmanDiagram<R> {
    pub fn new(
        graph: FeynmanGraph,
        vertex_ops: BTreeMap<VertexId, VertexOperator<R>>,
        masses: BTreeMap<LineId, R>,
    ) -> Result<Self> {
        for v in graph.vertices() {
            if !vertex_ops.contains_key(v) {
                return Err(Error::Graph(format!("missing vertex operator for {v}")));
            }
        }
        for (id, _, _) in graph.internal_lines() {
            match masses.get(&id) {
                None => return Err(Error::Graph(format!("missing mass for internal line {id}"))),
                Some(m) if *m < R::zero() => {
                    return Err(Error::Graph(format!("negative mass on line {id}")))
                }
                _ => {}
            }
        }
        Ok(FeynmanDiagram {
            graph,
            vertex_ops,
            masses,
        })
    }

    /// All vertex operators set to 1, all masses equal.
    pub fn constant_ops(graph: FeynmanGraph, mass: R) -> Result<Self> {
        let ops = graph
            .vertices()
            .map(|v| (v.clone(), VertexOperator::unit()))
            .collect();
        let masses = graph
            .internal_lines()
            .into_iter()
            .map(|(id, _, _)| (id, mass))
            .collect();
        Self::new(graph, ops, masses)
    }

    pub fn op_degree_sum(&self) -> usize {
        self.vertex_ops.values().map(|op| op.degree()).sum()
    }

    /// Structural fingerprint used as a memo key; identifier-preserving.
    pub fn canonical_key(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for v in self.graph.vertices() {
            let op = &self.vertex_ops[v];
            write!(s, "v:{v}[{}];", op.poly()).unwrap();
        }
        for (id, inc) in self.graph.lines() {
            match inc {
                Incidence::Internal { from, to } => {
                    let m = self.masses[id];
                    write!(s, "i:{id}:{from}>{to}:m={m:e};").unwrap();
                }
                Incidence::External { vertex, dir } => {
                    let d = match dir {
                        Direction::In => "+",
                        Direction::Out => "-",
                    };
                    write!(s, "e:{id}:{vertex}{d};").unwrap();
                }
            }
        }
        s
    }
}

/// Superficial degree of divergence at `z = 0`.
pub fn omega<R: Real>(d: &FeynmanDiagram<R>) -> Result<i64> {
    if !d.graph.is_1pi() {
        return Err(Error::NotOnePi);
    }
    let deg: i64 = d.op_degree_sum() as i64;
    let nv = d.graph.vertex_count() as i64;
    let nr = d.graph.internal_count() as i64;
    Ok(deg - 4 * nv + 2 * nr + 4)
}

/// Regulated degree of divergence: the per-internal-line contribution is
/// `4 - 2(1 + z)`.
pub fn omega_z<R: Real>(d: &FeynmanDiagram<R>, z: C<R>) -> Result<C<R>> {
    let base = omega(d)?;
    let nr = d.graph.internal_count() as f64;
    Ok(Complex::new(r::<R>(base as f64), R::zero())
        - z * Complex::new(r::<R>(2.0 * nr), R::zero()))
}

// ---- stock diagrams used across the test suite ----

/// One vertex, one massive self-loop, `next` external legs.
pub fn tadpole<R: Real>(mass: R, next: usize) -> FeynmanDiagram<R> {
    let v = vid("v1");
    let mut lines = vec![(
        lid("l1"),
        Incidence::Internal {
            from: v.clone(),
            to: v.clone(),
        },
    )];
    for k in 0..next {
        lines.push((
            lid(&format!("x{}", k + 1)),
            Incidence::External {
                vertex: v.clone(),
                dir: if k % 2 == 0 {
                    Direction::In
                } else {
                    Direction::Out
                },
            },
        ));
    }
    let graph = FeynmanGraph::new([v], lines).unwrap();
    FeynmanDiagram::constant_ops(graph, mass).unwrap()
}

/// Two vertices joined by `k` parallel internal lines, one external leg in at
/// `v1` and one out at `v2`. `k = 2` is the bubble, `k = 3` the sunset.
pub fn banana<R: Real>(k: usize, mass: R) -> FeynmanDiagram<R> {
    let v1 = vid("v1");
    let v2 = vid("v2");
    let mut lines = Vec::new();
    for i in 0..k {
        lines.push((
            lid(&format!("l{}", i + 1)),
            Incidence::Internal {
                from: v1.clone(),
                to: v2.clone(),
            },
        ));
    }
    lines.push((
        lid("x1"),
        Incidence::External {
            vertex: v1.clone(),
            dir: Direction::In,
        },
    ));
    lines.push((
        lid("x2"),
        Incidence::External {
            vertex: v2.clone(),
            dir: Direction::Out,
        },
    ));
    let graph = FeynmanGraph::new([v1, v2], lines).unwrap();
    FeynmanDiagram::constant_ops(graph, mass).unwrap()
}

/// Bubble with four external legs (two per vertex), phi^4 style.
pub fn bubble4<R: Real>(mass: R) -> FeynmanDiagram<R> {
    let v1 = vid("v1");
    let v2 = vid("v2");
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
            Incidence::Internal {
                from: v1.clone(),
                to: v2.clone(),
            },
        ),
        (
            lid("x1"),
            Incidence::External {
                vertex: v1.clone(),
                dir: Direction::In,
            },
        ),
        (
            lid("x2"),
            Incidence::External {
                vertex: v1.clone(),
                dir: Direction::In,
            },
        ),
        (
            lid("x3"),
            Incidence::External {
                vertex: v2.clone(),
                dir: Direction::Out,
            },
        ),
        (
            lid("x4"),
            Incidence::External {
                vertex: v2.clone(),
                dir: Direction::Out,
            },
        ),
    ];
    let graph = FeynmanGraph::new([v1, v2], lines).unwrap();
    FeynmanDiagram::constant_ops(graph, mass).unwrap()
}

/// Bubble inserted into one line of an outer bubble: vertices `u, a, b, w`,
/// lines `uw`, `ua`, `ab1`, `ab2`, `bw`, externals at `u` and `w`.
pub fn nested_double_bubble<R: Real>(mass: R) -> FeynmanDiagram<R> {
    let (u, a, b, w) = (vid("u"), vid("a"), vid("b"), vid("w"));
    let lines = vec![
        (
            lid("ab1"),
            Incidence::Internal {
                from: a.clone(),
                to: b.clone(),
            },
        ),
        (
            lid("ab2"),
            Incidence::Internal {
                from: a.clone(),
                to: b.clone(),
            },
        ),
        (
            lid("bw"),
            Incidence::Internal {
                from: b.clone(),
                to: w.clone(),
            },
        ),
        (
            lid("ua"),
            Incidence::Internal {
                from: u.clone(),
                to: a.clone(),
            },
        ),
        (
            lid("uw"),
            Incidence::Internal {
                from: u.clone(),
                to: w.clone(),
            },
        ),
        (
            lid("x1"),
            Incidence::External {
                vertex: u.clone(),
                dir: Direction::In,
            },
        ),
        (
            lid("x2"),
            Incidence::External {
                vertex: w.clone(),
                dir: Direction::Out,
            },
        ),
    ];
    let graph = FeynmanGraph::new([u, a, b, w], lines).unwrap();
    FeynmanDiagram::constant_ops(graph, mass).unwrap()
}
