//! Transversal structures: blue/red colored and directed edges satisfying the
//! local property, conversions to and from 4-orientations, and constructive
//! existence by contraction to the one-vertex triangulation and decontraction.

use std::fmt::Write as _;

use log::debug;

use crate::angle::{AngleMap, FourOrientation, TtsLabeling};
use crate::map::{ContractionRecord, DartId, EdgeId, ToroidalMap, VertexId};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TsColor {
    Blue,
    Red,
}

impl TsColor {
    fn name(self) -> &'static str {
        match self {
            TsColor::Blue => "blue",
            TsColor::Red => "red",
        }
    }
}

/// Per-dart view of a transversal structure. Both darts of an edge carry the
/// same color; `outgoing[d]` is true when the edge is directed away from
/// `vertex_of(d)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TransversalStructure {
    pub color: Vec<TsColor>,
    pub outgoing: Vec<bool>,
}

/// Half-edge class in the ccw interval order of the local property:
/// 0 = outgoing blue, 1 = outgoing red, 2 = incoming blue, 3 = incoming red.
fn class_of(ts: &TransversalStructure, d: DartId) -> u8 {
    match (ts.outgoing[d], ts.color[d]) {
        (true, TsColor::Blue) => 0,
        (true, TsColor::Red) => 1,
        (false, TsColor::Blue) => 2,
        (false, TsColor::Red) => 3,
    }
}

impl TransversalStructure {
    pub fn new(g: &ToroidalMap, color: Vec<TsColor>, outgoing: Vec<bool>) -> Result<Self> {
        if color.len() != g.n_darts() || outgoing.len() != g.n_darts() {
            return Err(Error::InvalidMap("transversal structure has wrong dart count".into()));
        }
        for d in g.edges() {
            let a = g.alpha(d);
            if color[d] != color[a] {
                return Err(Error::InvalidMap(format!("edge {d} darts disagree on color")));
            }
            if outgoing[d] == outgoing[a] {
                return Err(Error::InvalidMap(format!("edge {d} darts disagree on direction")));
            }
        }
        Ok(TransversalStructure { color, outgoing })
    }

    /// The equivalent half-edge labeling (0 = outgoing blue, 1 = outgoing red,
    /// 2 = incoming blue, 3 = incoming red).
    pub fn to_labeling(&self) -> TtsLabeling {
        TtsLabeling {
            label: (0..self.color.len()).map(|d| class_of(self, d)).collect(),
        }
    }

    pub fn from_labeling(g: &ToroidalMap, l: &TtsLabeling) -> Result<TransversalStructure> {
        l.validate(g)?;
        let color = l
            .label
            .iter()
            .map(|&x| if x % 2 == 0 { TsColor::Blue } else { TsColor::Red })
            .collect();
        let outgoing = l.label.iter().map(|&x| x < 2).collect();
        TransversalStructure::new(g, color, outgoing)
    }

    /// Local property at every vertex: the ccw dart classes form four
    /// non-empty intervals, outgoing blue, outgoing red, incoming blue,
    /// incoming red, in this cyclic order.
    pub fn check_local_property(&self, g: &ToroidalMap) -> bool {
        (0..g.n_vertices()).all(|v| self.local_property_at(g, v))
    }

    pub fn local_property_at(&self, g: &ToroidalMap, v: VertexId) -> bool {
        let rot = g.rotation(v);
        if rot.len() < 4 {
            return false;
        }
        let mut increments = 0usize;
        for i in 0..rot.len() {
            let a = class_of(self, rot[i]);
            let b = class_of(self, rot[(i + 1) % rot.len()]);
            if b == (a + 1) % 4 {
                increments += 1;
            } else if b != a {
                return false;
            }
        }
        increments == 4
    }

    /// Serialization: one `ts` line per edge; the head is given as a dart so
    /// that loops stay unambiguous.
    pub fn serialize(&self, g: &ToroidalMap) -> String {
        let mut out = String::new();
        for d in g.edges() {
            let head = if self.outgoing[d] { g.alpha(d) } else { d };
            writeln!(out, "ts {} {} {}", g.edge_of(d), self.color[d].name(), head).unwrap();
        }
        out
    }

    pub fn parse(g: &ToroidalMap, text: &str) -> Result<TransversalStructure> {
        let mut color: Vec<Option<TsColor>> = vec![None; g.n_darts()];
        let mut outgoing = vec![false; g.n_darts()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            if toks.next() != Some("ts") {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("ts line {}: {}", lineno + 1, msg));
            let e: EdgeId = toks
                .next()
                .ok_or_else(|| err("missing edge"))?
                .parse()
                .map_err(|_| err("bad edge id"))?;
            if e >= g.n_darts() || g.edge_of(e) != e {
                return Err(err("edge id must be the smaller dart of a pair"));
            }
            let c = match toks.next() {
                Some("blue") => TsColor::Blue,
                Some("red") => TsColor::Red,
                _ => return Err(err("color must be blue or red")),
            };
            let head: DartId = toks
                .next()
                .ok_or_else(|| err("missing head dart"))?
                .parse()
                .map_err(|_| err("bad head dart"))?;
            if head != e && head != g.alpha(e) {
                return Err(err("head dart does not belong to the edge"));
            }
            color[e] = Some(c);
            color[g.alpha(e)] = Some(c);
            outgoing[e] = head != e;
            outgoing[g.alpha(e)] = head == e;
        }
        let color: Option<Vec<TsColor>> = color.into_iter().collect();
        TransversalStructure::new(
            g,
            color.ok_or_else(|| Error::Parse("missing ts line for some edge".into()))?,
            outgoing,
        )
    }
}

// ---------------------------------------------------------------------------
// Conversions with 4-orientations
// ---------------------------------------------------------------------------

/// An angle edge points toward its primal vertex iff the two edges of G
/// around the angle share a color.
pub fn ts_to_orientation(
    a: &AngleMap,
    ts: &TransversalStructure,
) -> Result<FourOrientation> {
    let g = a.g();
    if !ts.check_local_property(g) {
        let v = (0..g.n_vertices())
            .find(|&v| !ts.local_property_at(g, v))
            .unwrap();
        return Err(Error::LocalProperty(v));
    }
    let out = g
        .darts()
        .map(|c| ts.color[c] != ts.color[g.sigma(c)])
        .collect();
    let orientation = FourOrientation { out };
    orientation.validate(a)?;
    Ok(orientation)
}

/// Rebuilds the transversal structure from a 4-orientation admitting a
/// TTS-labeling. When the map has a root, labels are shifted so the root
/// half-edge is outgoing blue (label 0); otherwise dart 0 is labeled 0.
pub fn orientation_to_ts(
    a: &AngleMap,
    orientation: &FourOrientation,
) -> Result<TransversalStructure> {
    let g = a.g();
    let anchor = g.root().unwrap_or(0);
    let labeling = a.tts_labeling(orientation, anchor)?;
    debug_assert_eq!(labeling.label[anchor], 0);
    let ts = TransversalStructure::from_labeling(g, &labeling)?;
    let back = ts_to_orientation(a, &ts)?;
    if &back != orientation {
        return Err(Error::Internal(
            "orientation/TS round-trip failed".into(),
        ));
    }
    Ok(ts)
}

// ---------------------------------------------------------------------------
// Base case and decontraction
// ---------------------------------------------------------------------------

/// All balanced transversal structures of a one-vertex triangulation, found by
/// exhaustive search over the 4^3 colorings/orientations of the three loops;
/// sorted by serialization so the first is the canonical choice.
pub fn one_vertex_balanced_structures(g: &ToroidalMap) -> Result<Vec<TransversalStructure>> {
    if g.n_vertices() != 1 || !g.is_triangulation() {
        return Err(Error::Precondition("base case needs the one-vertex triangulation".into()));
    }
    let a = AngleMap::new(g)?;
    let basis = g.homology_basis();
    let edges: Vec<DartId> = g.edges().collect();
    let mut found = Vec::new();
    for mask in 0..(1usize << (2 * edges.len())) {
        let mut color = vec![TsColor::Blue; g.n_darts()];
        let mut outgoing = vec![false; g.n_darts()];
        for (i, &e) in edges.iter().enumerate() {
            let c = if mask >> (2 * i) & 1 == 1 { TsColor::Red } else { TsColor::Blue };
            let dir = mask >> (2 * i + 1) & 1 == 1;
            color[e] = c;
            color[g.alpha(e)] = c;
            outgoing[e] = dir;
            outgoing[g.alpha(e)] = !dir;
        }
        let ts = TransversalStructure::new(g, color, outgoing)?;
        if !ts.check_local_property(g) {
            continue;
        }
        let orientation = ts_to_orientation(&a, &ts)?;
        if a.is_balanced(&orientation, &basis)? {
            found.push(ts);
        }
    }
    found.sort_by_key(|x| x.serialize(g));
    found.dedup();
    Ok(found)
}

/// Interval relation of the two merged edges around the contracted vertex,
/// kept for diagnostics of the decontraction case analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecontractionCase {
    Consecutive,
    SameInterval,
    Opposite,
    Identified,
}

fn classify_case(
    gp: &ToroidalMap,
    ts: &TransversalStructure,
    e_wx: DartId,
    e_wy: DartId,
) -> DecontractionCase {
    if gp.edge_of(e_wx) == gp.edge_of(e_wy) {
        return DecontractionCase::Identified;
    }
    let (cx, cy) = (class_of(ts, e_wx), class_of(ts, e_wy));
    if cx == cy {
        DecontractionCase::SameInterval
    } else if (cx + 2) % 4 == cy {
        DecontractionCase::Opposite
    } else {
        DecontractionCase::Consecutive
    }
}

/// Extends a balanced transversal structure of G/e to G. The five touched
/// edges are re-decided by exhaustive local search; every candidate is checked
/// against the local property at the four touched vertices and against the
/// balance of the resulting orientation, and the lexicographically smallest
/// survivor is returned.
pub fn decontract(
    g: &ToroidalMap,
    record: &ContractionRecord,
    contracted: &ToroidalMap,
    ts_contracted: &TransversalStructure,
) -> Result<TransversalStructure> {
    let e = record.e_dart;
    let u = g.vertex_of(e);
    let v = g.vertex_of(g.alpha(e));
    if g.degree(u) < 4 || g.degree(v) < 4 {
        return Err(Error::Precondition(
            "decontraction needs both endpoints of degree at least 4".into(),
        ));
    }
    // diagnostics: which case of the analysis this instance falls into
    if log::log_enabled!(log::Level::Debug) {
        let e_wx = record.dart_map[record.kept_x].expect("kept edge survives");
        let e_wy = record.dart_map[record.kept_y].expect("kept edge survives");
        debug!(
            "decontraction case: {:?}",
            classify_case(contracted, ts_contracted, e_wx, e_wy)
        );
    }
    let touched: Vec<EdgeId> = record.touched_edges(g).into_iter().collect();
    let touched_vertices: std::collections::BTreeSet<VertexId> = touched
        .iter()
        .flat_map(|&t| [g.vertex_of(t), g.vertex_of(g.alpha(t))])
        .collect();
    // inherited part
    let mut base_color = vec![TsColor::Blue; g.n_darts()];
    let mut base_out = vec![false; g.n_darts()];
    for d in g.darts() {
        if let Some(nd) = record.dart_map[d] {
            base_color[d] = ts_contracted.color[nd];
            base_out[d] = ts_contracted.outgoing[nd];
        }
    }
    let a = AngleMap::new(g)?;
    let basis = g.homology_basis();
    let mut best: Option<TransversalStructure> = None;
    for mask in 0..(1usize << (2 * touched.len())) {
        let mut color = base_color.clone();
        let mut outgoing = base_out.clone();
        for (i, &t) in touched.iter().enumerate() {
            let c = if mask >> (2 * i) & 1 == 1 { TsColor::Red } else { TsColor::Blue };
            let dir = mask >> (2 * i + 1) & 1 == 1;
            color[t] = c;
            color[g.alpha(t)] = c;
            outgoing[t] = dir;
            outgoing[g.alpha(t)] = !dir;
        }
        let ts = TransversalStructure { color, outgoing };
        if !touched_vertices.iter().all(|&w| ts.local_property_at(g, w)) {
            continue;
        }
        debug_assert!(ts.check_local_property(g));
        let orientation = ts_to_orientation(&a, &ts)?;
        if !a.is_balanced(&orientation, &basis)? {
            continue;
        }
        if best.as_ref().is_none_or(|b| ts.serialize(g) < b.serialize(g)) {
            best = Some(ts);
        }
    }
    best.ok_or_else(|| {
        Error::Internal("no balanced extension of the contracted structure exists".into())
    })
}

/// Constructive existence: contract to one vertex, install the canonical
/// balanced base-case structure, decontract back.
pub fn find_balanced_ts(g: &ToroidalMap, k: i64) -> Result<TransversalStructure> {
    if !g.is_essentially_4connected(k)? {
        return Err(Error::Precondition(
            "the triangulation is not essentially 4-connected".into(),
        ));
    }
    let mut chain: Vec<(ToroidalMap, ContractionRecord)> = Vec::new();
    let mut current = g.clone();
    while current.n_vertices() > 1 {
        let e = current.find_contractible_edge(k)?;
        let (next, record) = current.contract_edge(e)?;
        chain.push((current, record));
        current = next;
    }
    let mut ts = one_vertex_balanced_structures(&current)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Internal("one-vertex base case has no balanced structure".into()))?;
    for (bigger, record) in chain.iter().rev() {
        ts = decontract(bigger, record, &current, &ts)?;
        current = bigger.clone();
    }
    Ok(ts)
}
