//! Coupling graphs, the shipped 20-qubit map, geometry enumeration and
//! connectivity checks for circuits.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};

pub const POUGHKEEPSIE_JSON: &str = include_str!("../data/poughkeepsie.json");
pub const ORIENTATIONS_JSON: &str = include_str!("../data/orientations.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    n_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n_qubits: usize,
    edges: Vec<[usize; 2]>,
}

impl CouplingGraph {
    /// Edges are unordered; self-loops, repeats and out-of-range ends fail.
    pub fn new(n_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n_qubits];
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on qubit {a}")));
            }
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) outside {n_qubits} qubits"
                )));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(CouplingGraph {
            n_qubits,
            edges: set,
            adjacency,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s)?;
        Self::new(file.n_qubits, file.edges.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s)
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            n_qubits: self.n_qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&file).expect("serializable")
    }

    /// The shipped 20-qubit, 23-edge map.
    pub fn poughkeepsie() -> Self {
        Self::from_json_str(POUGHKEEPSIE_JSON).expect("shipped map is valid")
    }

    /// Path graph `0 – 1 – … – (n−1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path graph is valid")
    }

    /// Every pair connected.
    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
            .expect("complete graph is valid")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Edges as `(low, high)` pairs, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        self.adjacency.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn degree(&self, q: usize) -> usize {
        self.neighbors(q).len()
    }

    fn require_edge(&self, a: usize, b: usize) -> Result<()> {
        if self.has_edge(a, b) {
            Ok(())
        } else {
            Err(Error::NotAdjacent(a, b))
        }
    }

    /// Fails unless consecutive entries are adjacent and no qubit repeats.
    pub fn check_path(&self, path: &[usize]) -> Result<()> {
        let distinct: BTreeSet<_> = path.iter().collect();
        if distinct.len() != path.len() {
            return Err(Error::InvalidPlacement(format!("path {path:?} revisits a qubit")));
        }
        for w in path.windows(2) {
            self.require_edge(w[0], w[1])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    /// Line `Q1 – Q2 – Q3`, target on the end.
    Linear3Cct,
    /// Line `Q1 – Q3 – Q2`, target in the middle.
    Linear3Ctc,
    /// Three computational qubits around one ancilla.
    Star4,
    /// Six-ring, `Q1`–`Q3` joined through a chain of three ancilla.
    Ring6ThreeChain,
    /// Six-ring alternating computational and ancilla qubits.
    Ring6OneChains,
    /// Control, ancilla path, target.
    ChainPath,
}

impl GeometryKind {
    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Linear3Cct => "linear3-cct",
            GeometryKind::Linear3Ctc => "linear3-ctc",
            GeometryKind::Star4 => "star4",
            GeometryKind::Ring6ThreeChain => "ring6-3chain",
            GeometryKind::Ring6OneChains => "ring6-1chains",
            GeometryKind::ChainPath => "chain-path",
        }
    }
}

/// Device qubits assigned to one geometry.
///
/// `computational` lists `Q1, Q2, Q3` for three-qubit kinds (the last entry is
/// the target) and `control, target` for chains. Ancilla order is fixed per
/// kind: the chain from `Q1` to `Q3` for [`GeometryKind::Ring6ThreeChain`],
/// the mediators of `(Q1,Q2)`, `(Q2,Q3)`, `(Q3,Q1)` for
/// [`GeometryKind::Ring6OneChains`], and the path interior for chains.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeometryPlacement {
    pub kind: GeometryKind,
    pub computational: Vec<usize>,
    pub ancilla: Vec<usize>,
    pub target: usize,
}

impl GeometryPlacement {
    pub fn new(
        kind: GeometryKind,
        computational: Vec<usize>,
        ancilla: Vec<usize>,
    ) -> Result<Self> {
        let target = *computational
            .last()
            .ok_or_else(|| Error::InvalidPlacement("no computational qubits".into()))?;
        let p = GeometryPlacement {
            kind,
            computational,
            ancilla,
            target,
        };
        p.check_shape()?;
        Ok(p)
    }

    /// A chain along `path`: control first, target last.
    pub fn chain(path: &[usize]) -> Result<Self> {
        if path.len() < 2 {
            return Err(Error::InvalidPlacement(
                "a chain needs at least two qubits".into(),
            ));
        }
        Self::new(
            GeometryKind::ChainPath,
            vec![path[0], path[path.len() - 1]],
            path[1..path.len() - 1].to_vec(),
        )
    }

    fn check_shape(&self) -> Result<()> {
        let (nc, na) = match self.kind {
            GeometryKind::Linear3Cct | GeometryKind::Linear3Ctc => (3, Some(0)),
            GeometryKind::Star4 => (3, Some(1)),
            GeometryKind::Ring6ThreeChain | GeometryKind::Ring6OneChains => (3, Some(3)),
            GeometryKind::ChainPath => (2, None),
        };
        if self.computational.len() != nc || na.is_some_and(|na| self.ancilla.len() != na) {
            return Err(Error::InvalidPlacement(format!(
                "{} takes {nc} computational qubits, got {} plus {} ancilla",
                self.kind.name(),
                self.computational.len(),
                self.ancilla.len()
            )));
        }
        if self.target != self.computational[nc - 1] {
            return Err(Error::InvalidPlacement("target must be the last computational qubit".into()));
        }
        let all = self.wires();
        let distinct: BTreeSet<_> = all.iter().collect();
        if distinct.len() != all.len() {
            return Err(Error::InvalidPlacement(format!("repeated qubit in {all:?}")));
        }
        Ok(())
    }

    /// Device qubit of each circuit wire. Chains run along the path;
    /// other kinds list computational qubits first, then ancilla.
    pub fn wires(&self) -> Vec<usize> {
        match self.kind {
            GeometryKind::ChainPath => {
                let mut w = vec![self.computational[0]];
                w.extend(&self.ancilla);
                w.push(self.computational[1]);
                w
            }
            _ => self
                .computational
                .iter()
                .chain(&self.ancilla)
                .copied()
                .collect(),
        }
    }

    /// Edges the kind needs, as device-qubit pairs.
    pub fn required_edges(&self) -> Vec<(usize, usize)> {
        let c = &self.computational;
        let a = &self.ancilla;
        match self.kind {
            GeometryKind::Linear3Cct => vec![(c[0], c[1]), (c[1], c[2])],
            GeometryKind::Linear3Ctc => vec![(c[0], c[2]), (c[2], c[1])],
            GeometryKind::Star4 => c.iter().map(|&q| (a[0], q)).collect(),
            GeometryKind::Ring6ThreeChain => vec![
                (c[2], c[1]),
                (c[1], c[0]),
                (c[0], a[0]),
                (a[0], a[1]),
                (a[1], a[2]),
                (a[2], c[2]),
            ],
            GeometryKind::Ring6OneChains => vec![
                (c[0], a[0]),
                (a[0], c[1]),
                (c[1], a[1]),
                (a[1], c[2]),
                (c[2], a[2]),
                (a[2], c[0]),
            ],
            GeometryKind::ChainPath => {
                let w = self.wires();
                w.windows(2).map(|p| (p[0], p[1])).collect()
            }
        }
    }

    pub fn validate(&self, g: &CouplingGraph) -> Result<()> {
        self.check_shape()?;
        for q in self.wires() {
            if q >= g.n_qubits() {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: g.n_qubits(),
                });
            }
        }
        for (a, b) in self.required_edges() {
            g.require_edge(a, b)?;
        }
        Ok(())
    }

    /// The three target choices of a linear triple or star: for a triple
    /// `a – b – c` the outer targets `[a,b,c]`, `[c,b,a]` and the central
    /// target `[a,c,b]`; for a star each outer qubit in turn.
    pub fn target_variants(&self) -> Vec<GeometryPlacement> {
        let c = &self.computational;
        let make = |kind, comp: Vec<usize>| {
            GeometryPlacement::new(kind, comp, self.ancilla.clone()).expect("permuted placement")
        };
        match self.kind {
            GeometryKind::Linear3Cct | GeometryKind::Linear3Ctc => {
                let (a, b, e) = if self.kind == GeometryKind::Linear3Cct {
                    (c[0], c[1], c[2])
                } else {
                    (c[0], c[2], c[1])
                };
                let (a, e) = (a.min(e), a.max(e));
                vec![
                    make(GeometryKind::Linear3Cct, vec![a, b, e]),
                    make(GeometryKind::Linear3Cct, vec![e, b, a]),
                    make(GeometryKind::Linear3Ctc, vec![a, e, b]),
                ]
            }
            GeometryKind::Star4 => {
                let mut outer = c.clone();
                outer.sort_unstable();
                (0..3)
                    .map(|t| {
                        let mut comp: Vec<usize> =
                            outer.iter().copied().filter(|&q| q != outer[t]).collect();
                        comp.push(outer[t]);
                        make(GeometryKind::Star4, comp)
                    })
                    .collect()
            }
            _ => vec![self.clone()],
        }
    }

    /// Line order `end – center – end` of a linear placement.
    pub fn line(&self) -> Option<[usize; 3]> {
        let c = &self.computational;
        match self.kind {
            GeometryKind::Linear3Cct => Some([c[0], c[1], c[2]]),
            GeometryKind::Linear3Ctc => Some([c[0], c[2], c[1]]),
            _ => None,
        }
    }
}

/// Every path `a – b – c` once, as a CCT placement with `a < c`.
pub fn enumerate_linear_triples(g: &CouplingGraph) -> Vec<GeometryPlacement> {
    let mut out = Vec::new();
    for b in 0..g.n_qubits() {
        let nb = g.neighbors(b);
        for (i, &a) in nb.iter().enumerate() {
            for &c in &nb[i + 1..] {
                out.push(
                    GeometryPlacement::new(GeometryKind::Linear3Cct, vec![a, b, c], vec![])
                        .expect("triple"),
                );
            }
        }
    }
    out.sort();
    out
}

/// One star per center and unordered set of three neighbors; the target is
/// the largest outer qubit.
pub fn enumerate_stars(g: &CouplingGraph) -> Vec<GeometryPlacement> {
    let mut out = Vec::new();
    for center in 0..g.n_qubits() {
        let nb = g.neighbors(center);
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                for k in j + 1..nb.len() {
                    out.push(
                        GeometryPlacement::new(
                            GeometryKind::Star4,
                            vec![nb[i], nb[j], nb[k]],
                            vec![center],
                        )
                        .expect("star"),
                    );
                }
            }
        }
    }
    out.sort_by_key(|p| (p.ancilla[0], p.computational.clone()));
    out
}

/// All simple 6-cycles, each once. A cycle starts at its smallest vertex and
/// runs toward the smaller of that vertex's two cycle neighbors.
pub fn enumerate_six_rings(g: &CouplingGraph) -> Vec<[usize; 6]> {
    fn extend(g: &CouplingGraph, path: &mut Vec<usize>, out: &mut Vec<[usize; 6]>) {
        let start = path[0];
        let last = *path.last().expect("nonempty");
        if path.len() == 6 {
            if g.has_edge(last, start) && path[1] < path[5] {
                out.push(path.as_slice().try_into().expect("six vertices"));
            }
            return;
        }
        for &n in g.neighbors(last) {
            if n > start && !path.contains(&n) {
                path.push(n);
                extend(g, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..g.n_qubits() {
        extend(g, &mut vec![s], &mut out);
    }
    out.sort();
    out
}

/// The six placements of `kind` on one ring, one per target position.
pub fn ring_placements(ring: &[usize; 6], kind: GeometryKind) -> Result<Vec<GeometryPlacement>> {
    let r = |i: usize| ring[i % 6];
    (0..6)
        .map(|i| match kind {
            GeometryKind::Ring6ThreeChain => GeometryPlacement::new(
                kind,
                vec![r(i + 2), r(i + 1), r(i)],
                vec![r(i + 3), r(i + 4), r(i + 5)],
            ),
            GeometryKind::Ring6OneChains => GeometryPlacement::new(
                kind,
                vec![r(i + 2), r(i + 4), r(i)],
                vec![r(i + 3), r(i + 5), r(i + 1)],
            ),
            _ => Err(Error::InvalidPlacement(format!(
                "{} is not a ring kind",
                kind.name()
            ))),
        })
        .collect()
}

/// Ring placements of `kind` over every six-ring of `g`.
pub fn enumerate_ring_placements(
    g: &CouplingGraph,
    kind: GeometryKind,
) -> Result<Vec<GeometryPlacement>> {
    let mut out = Vec::new();
    for ring in enumerate_six_rings(g) {
        out.extend(ring_placements(&ring, kind)?);
    }
    Ok(out)
}

/// Stored full-length chain paths, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Orientations(Vec<Vec<usize>>);

impl Orientations {
    pub fn new(paths: Vec<Vec<usize>>) -> Self {
        Orientations(paths)
    }

    pub fn shipped() -> Self {
        Self::from_json_str(ORIENTATIONS_JSON).expect("shipped orientations are valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> {
        1..=self.0.len()
    }
}

/// The stored path `id`, checked against `g`.
pub fn chain_paths(g: &CouplingGraph, orientations: &Orientations, id: usize) -> Result<Vec<usize>> {
    let path = id
        .checked_sub(1)
        .and_then(|i| orientations.0.get(i))
        .ok_or(Error::UnknownOrientation(id))?;
    for &q in path {
        if q >= g.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: g.n_qubits(),
            });
        }
    }
    g.check_path(path)?;
    Ok(path.clone())
}

/// A two-qubit op acting on a pair the device cannot couple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub op: GateOp,
    /// Device qubits the op lands on.
    pub qubits: Vec<usize>,
}

/// Every two-qubit op whose device pair is not an edge of `g`.
pub fn validate_circuit(g: &CouplingGraph, c: &Circuit) -> Vec<Violation> {
    c.ops()
        .iter()
        .enumerate()
        .filter(|(_, op)| op.is_two_qubit())
        .filter_map(|(index, op)| {
            let qubits: Vec<usize> = op.qubits.iter().map(|&w| c.physical()[w]).collect();
            (!g.has_edge(qubits[0], qubits[1])).then(|| Violation {
                index,
                op: op.clone(),
                qubits,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(CouplingGraph::new(2, [(0, 0)]).is_err());
        assert!(CouplingGraph::new(2, [(0, 1), (1, 0)]).is_err());
        assert!(CouplingGraph::new(2, [(0, 2)]).is_err());
        assert!(CouplingGraph::from_json_str(r#"{"n_qubits": 2}"#).is_err());
    }

    #[test]
    fn path_file() {
        let g = CouplingGraph::from_json_str(r#"{"n_qubits": 3, "edges": [[1, 0], [1, 2]]}"#)
            .unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), [(0, 1), (1, 2)]);
    }

    #[test]
    fn small_graph_counts() {
        let p3 = CouplingGraph::path(3);
        let k3 = CouplingGraph::complete(3);
        let k13 = CouplingGraph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let c6 = CouplingGraph::new(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        assert_eq!(enumerate_linear_triples(&p3).len(), 1);
        assert_eq!(enumerate_linear_triples(&k3).len(), 3);
        assert_eq!(enumerate_stars(&k13).len(), 1);
        assert_eq!(enumerate_stars(&p3).len(), 0);
        assert_eq!(enumerate_six_rings(&c6), vec![[0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn shipped_map_counts() {
        let g = CouplingGraph::poughkeepsie();
        assert_eq!((g.n_qubits(), g.n_edges()), (20, 23));
        assert_eq!(enumerate_linear_triples(&g).len(), 32);
        assert_eq!(enumerate_stars(&g).len(), 6);
        let rings = enumerate_six_rings(&g);
        assert_eq!(rings, vec![[5, 6, 7, 12, 11, 10], [7, 8, 9, 14, 13, 12]]);
        for kind in [GeometryKind::Ring6ThreeChain, GeometryKind::Ring6OneChains] {
            let ps = enumerate_ring_placements(&g, kind).unwrap();
            assert_eq!(ps.len(), 12);
            for p in ps {
                p.validate(&g).unwrap();
            }
        }
    }

    #[test]
    fn variants_validate() {
        let g = CouplingGraph::poughkeepsie();
        for base in enumerate_linear_triples(&g)
            .into_iter()
            .chain(enumerate_stars(&g))
        {
            let vs = base.target_variants();
            assert_eq!(vs.len(), 3);
            let targets: BTreeSet<usize> = vs.iter().map(|p| p.target).collect();
            assert_eq!(targets.len(), 3);
            for v in vs {
                v.validate(&g).unwrap();
            }
        }
    }

    #[test]
    fn orientations_are_hamiltonian() {
        let g = CouplingGraph::poughkeepsie();
        let o = Orientations::shipped();
        assert_eq!(o.len(), 4);
        let paths: Vec<_> = o.ids().map(|id| chain_paths(&g, &o, id).unwrap()).collect();
        for p in &paths {
            assert_eq!(p.len(), 20);
            assert_eq!(p.iter().collect::<BTreeSet<_>>().len(), 20);
        }
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(paths[i], paths[j]);
            }
        }
        assert!(matches!(chain_paths(&g, &o, 0), Err(Error::UnknownOrientation(0))));
        assert!(matches!(chain_paths(&g, &o, 5), Err(Error::UnknownOrientation(5))));
    }

    #[test]
    fn off_graph_cnot_is_a_violation() {
        let g = CouplingGraph::path(3);
        let ok = Circuit::from_ops(3, [GateOp::cnot(0, 1)]).unwrap();
        assert!(validate_circuit(&g, &ok).is_empty());
        let bad = Circuit::from_ops(3, [GateOp::x(1), GateOp::cnot(0, 2)]).unwrap();
        let v = validate_circuit(&g, &bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].index, 1);
    }

    #[test]
    fn placement_shape_checks() {
        assert!(GeometryPlacement::new(GeometryKind::Star4, vec![1, 2, 3], vec![]).is_err());
        assert!(GeometryPlacement::new(GeometryKind::Linear3Cct, vec![1, 2, 1], vec![]).is_err());
        let g = CouplingGraph::poughkeepsie();
        let p = GeometryPlacement::new(GeometryKind::Linear3Cct, vec![0, 2, 1], vec![]).unwrap();
        assert!(matches!(p.validate(&g), Err(Error::NotAdjacent(0, 2))));
    }
}
