//! The angle map A(G), 4-orientations, the gamma and delta functionals, the
//! angle-dual-completion, and TTS-labelings.
//!
//! Corners of G index everything: corner `c` is the angle between dart `c` and
//! `sigma(c)` at their common vertex, and is also the angle-map edge joining
//! that vertex to the dual vertex of `face_left(c)`. Angle-map darts are `2c`
//! (primal side) and `2c+1` (dual side).

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::map::{CycleWalk, DartId, FaceId, HomologyBasis, ToroidalMap, VertexId};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct AngleMap {
    g: ToroidalMap,
    amap: ToroidalMap,
}

impl AngleMap {
    pub fn new(g: &ToroidalMap) -> Result<AngleMap> {
        if !g.is_triangulation() {
            return Err(Error::NotTriangulation);
        }
        let n = g.n_vertices();
        let mut rotations: Vec<Vec<DartId>> = Vec::with_capacity(n + g.n_faces());
        for v in 0..n {
            rotations.push(g.rotation(v).iter().map(|&d| 2 * d).collect());
        }
        for orbit in g.faces() {
            rotations.push(orbit.iter().rev().map(|&d| 2 * d + 1).collect());
        }
        let pairs: Vec<(DartId, DartId)> = g.darts().map(|c| (2 * c, 2 * c + 1)).collect();
        let amap = ToroidalMap::from_rotations(rotations, &pairs, None)?;
        if !amap.faces().iter().all(|f| f.len() == 4) {
            return Err(Error::Internal("angle map faces are not quadrangles".into()));
        }
        Ok(AngleMap { g: g.clone(), amap })
    }

    pub fn g(&self) -> &ToroidalMap {
        &self.g
    }
    /// The angle map itself, as a toroidal map.
    pub fn map(&self) -> &ToroidalMap {
        &self.amap
    }
    pub fn n_corners(&self) -> usize {
        self.g.n_darts()
    }
    pub fn primal_of_corner(&self, c: DartId) -> VertexId {
        self.g.vertex_of(c)
    }
    pub fn dual_of_corner(&self, c: DartId) -> FaceId {
        self.g.face_left(c)
    }
    /// Angle-map vertex id of a primal vertex.
    pub fn primal_vertex(&self, v: VertexId) -> VertexId {
        v
    }
    /// Angle-map vertex id of a dual vertex.
    pub fn dual_vertex(&self, f: FaceId) -> VertexId {
        self.g.n_vertices() + f
    }
    /// The face of A(G) corresponding to an edge of G (the quadrangle the
    /// edge crosses diagonally). It is the orbit holding the dual-side darts
    /// of the edge's two corners.
    pub fn face_of_g_edge(&self, d: DartId) -> FaceId {
        self.amap.face_left(2 * d + 1)
    }

    /// Inverse of `face_of_g_edge`: the G-edge crossing an angle-map face.
    pub fn g_edge_of_face(&self, f: FaceId) -> DartId {
        self.amap.faces()[f]
            .iter()
            .filter(|&&ad| ad % 2 == 1)
            .map(|&ad| self.g.edge_of((ad - 1) / 2))
            .min()
            .expect("every angle-map face holds two dual-side darts")
    }
}

/// Orientation of the angle map with primal outdegree 4 and dual outdegree 1.
/// `out[c]` is true when the angle edge of corner `c` points from its primal
/// vertex to its dual vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FourOrientation {
    pub out: Vec<bool>,
}

impl FourOrientation {
    pub fn validate(&self, a: &AngleMap) -> Result<()> {
        if self.out.len() != a.n_corners() {
            return Err(Error::NotFourOrientation("wrong corner count".into()));
        }
        for v in 0..a.g().n_vertices() {
            let outdeg = a.g().rotation(v).iter().filter(|&&c| self.out[c]).count();
            if outdeg != 4 {
                return Err(Error::NotFourOrientation(format!(
                    "primal vertex {v} has outdegree {outdeg}"
                )));
            }
        }
        for (f, orbit) in a.g().faces().iter().enumerate() {
            let outdeg = orbit.iter().filter(|&&c| !self.out[c]).count();
            if outdeg != 1 {
                return Err(Error::NotFourOrientation(format!(
                    "dual vertex of face {f} has outdegree {outdeg}"
                )));
            }
        }
        Ok(())
    }

    /// Text serialization: one `orient` line per angle edge.
    pub fn serialize(&self, a: &AngleMap) -> String {
        let mut out = String::new();
        for c in 0..self.out.len() {
            let head = if self.out[c] {
                a.dual_vertex(a.dual_of_corner(c))
            } else {
                a.primal_vertex(a.primal_of_corner(c))
            };
            writeln!(out, "orient {} {}", c, head).unwrap();
        }
        out
    }

    pub fn parse(a: &AngleMap, text: &str) -> Result<FourOrientation> {
        let mut out = vec![None; a.n_corners()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("orient line {}: {}", lineno + 1, msg));
            let mut toks = line.split_whitespace();
            if toks.next() != Some("orient") {
                continue;
            }
            let c: usize = toks
                .next()
                .ok_or_else(|| err("missing corner"))?
                .parse()
                .map_err(|_| err("bad corner id"))?;
            let head: usize = toks
                .next()
                .ok_or_else(|| err("missing head"))?
                .parse()
                .map_err(|_| err("bad head id"))?;
            if c >= a.n_corners() {
                return Err(err("corner out of range"));
            }
            let to_dual = head == a.dual_vertex(a.dual_of_corner(c));
            let to_primal = head == a.primal_vertex(a.primal_of_corner(c));
            if !(to_dual || to_primal) {
                return Err(err("head vertex is not an endpoint of this angle edge"));
            }
            out[c] = Some(to_dual);
        }
        let out: Option<Vec<bool>> = out.into_iter().collect();
        let orientation = FourOrientation {
            out: out.ok_or_else(|| Error::Parse("missing orient line for some corner".into()))?,
        };
        orientation.validate(a)?;
        Ok(orientation)
    }
}

// ---------------------------------------------------------------------------
// gamma
// ---------------------------------------------------------------------------

/// Corners at the vertices of a directed cycle, split by side. At a vertex
/// entered by dart `d_in` and left by `d_out`, the corners `c` with
/// `c in {d_out, sigma(d_out), ..., sigma^-1(alpha(d_in))}` lie on the left.
fn side_corners(g: &ToroidalMap, c: &CycleWalk) -> (Vec<DartId>, Vec<DartId>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    let k = c.darts.len();
    for i in 0..k {
        let d_in = c.darts[i];
        let d_out = c.darts[(i + 1) % k];
        let arrive = g.alpha(d_in); // dart at the vertex, pointing back
        let mut x = d_out;
        loop {
            left.push(x);
            x = g.sigma(x);
            if x == arrive {
                break;
            }
        }
        let mut x = arrive;
        loop {
            right.push(x);
            x = g.sigma(x);
            if x == d_out {
                break;
            }
        }
    }
    (left, right)
}

impl AngleMap {
    /// gamma(C): edges of A(G) leaving the cycle on its right minus on its
    /// left. Errors when the walk repeats a vertex.
    pub fn gamma(&self, orientation: &FourOrientation, c: &CycleWalk) -> Result<i64> {
        CycleWalk::new(&self.g, c.darts.clone())?;
        if !c.is_simple(&self.g) {
            return Err(Error::InvalidWalk(
                "gamma needs a cycle without repeated vertices".into(),
            ));
        }
        let edges: BTreeSet<_> = c.darts.iter().map(|&d| self.g.edge_of(d)).collect();
        if edges.len() != c.darts.len() {
            return Err(Error::InvalidWalk(
                "gamma needs a cycle without repeated edges".into(),
            ));
        }
        let (left, right) = side_corners(&self.g, c);
        let count = |side: &[DartId]| side.iter().filter(|&&x| orientation.out[x]).count() as i64;
        Ok(count(&right) - count(&left))
    }

    /// Balanced test: gamma vanishes on both basis cycles, which certifies
    /// gamma(C) = 0 for every non-contractible cycle.
    pub fn is_balanced(
        &self,
        orientation: &FourOrientation,
        basis: &HomologyBasis,
    ) -> Result<bool> {
        orientation.validate(self)?;
        Ok(self.gamma(orientation, &basis.b1)? == 0 && self.gamma(orientation, &basis.b2)? == 0)
    }

    /// TTS-labeling existence: both basis gammas are 0 mod 8.
    pub fn admits_tts_labeling(
        &self,
        orientation: &FourOrientation,
        basis: &HomologyBasis,
    ) -> Result<bool> {
        Ok(self.gamma(orientation, &basis.b1)?.rem_euclid(8) == 0
            && self.gamma(orientation, &basis.b2)?.rem_euclid(8) == 0)
    }
}

// ---------------------------------------------------------------------------
// The angle-dual-completion and delta
// ---------------------------------------------------------------------------

/// An edge of the angle-dual-completion.
///
/// `Corner(c)` is the angle edge of corner `c`, directed by the orientation.
/// `DualHalf(h)` is the half of the dual edge of `edge(h)` joining the
/// edge-vertex to the dual vertex of `face_left(h)`, always directed from the
/// edge-vertex to the dual vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompEdge {
    Corner(DartId),
    DualHalf(DartId),
}

/// One step of a walk in the dual of the completion. Faces of the completion
/// are half-edges of G (each quadrangle face holds one half-edge of G).
#[derive(Clone, Copy, Debug)]
pub struct DualStep {
    pub from: DartId,
    pub via: CompEdge,
    pub to: DartId,
}

#[derive(Clone, Debug, Default)]
pub struct DualWalk {
    pub steps: Vec<DualStep>,
}

/// Vertices of the completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompVertex {
    Primal(VertexId),
    Dual(FaceId),
    /// Edge-vertex, named by a dart of the edge.
    EdgeMid(DartId),
}

impl AngleMap {
    fn check_step(&self, s: &DualStep) -> Result<()> {
        let g = &self.g;
        let ok = match s.via {
            CompEdge::Corner(c) => {
                let (a, b) = (c, g.sigma(c));
                (s.from == a && s.to == b) || (s.from == b && s.to == a)
            }
            CompEdge::DualHalf(h) => {
                let (a, b) = (h, g.alpha(h));
                (s.from == a && s.to == b) || (s.from == b && s.to == a)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidWalk(format!(
                "dual step {s:?} does not match the completion"
            )))
        }
    }

    fn step_delta(&self, orientation: &FourOrientation, s: &DualStep) -> i64 {
        let g = &self.g;
        match s.via {
            CompEdge::Corner(c) => {
                if orientation.out[c] {
                    // directed primal -> dual; its left side is the quad of sigma(c)
                    if s.to == g.sigma(c) {
                        1
                    } else {
                        -1
                    }
                } else {
                    0
                }
            }
            CompEdge::DualHalf(h) => {
                // directed edge-vertex -> dual(face_left(h)); left side is quad(h)
                if s.to == h {
                    2
                } else {
                    -2
                }
            }
        }
    }

    /// delta of a closed walk of the completion's dual: +-1 per crossed
    /// out-edge, +-2 per crossed dual-edge, positive when the step ends on the
    /// left side of the crossed edge.
    pub fn delta(&self, orientation: &FourOrientation, w: &DualWalk) -> Result<i64> {
        if w.steps.is_empty() {
            return Err(Error::InvalidWalk("empty dual walk".into()));
        }
        for i in 0..w.steps.len() {
            self.check_step(&w.steps[i])?;
            let next = &w.steps[(i + 1) % w.steps.len()];
            if w.steps[i].to != next.from {
                return Err(Error::InvalidWalk("dual walk is not closed".into()));
            }
        }
        Ok(w.steps.iter().map(|s| self.step_delta(orientation, s)).sum())
    }

    /// Counterclockwise facial walk of the completion's dual around a
    /// completion vertex.
    pub fn dual_face_walk(&self, x: CompVertex) -> DualWalk {
        let g = &self.g;
        let mut steps = Vec::new();
        match x {
            CompVertex::Primal(v) => {
                for &c in g.rotation(v) {
                    steps.push(DualStep {
                        from: c,
                        via: CompEdge::Corner(c),
                        to: g.sigma(c),
                    });
                }
            }
            CompVertex::Dual(f) => {
                // walks the orbit backward: quad(d) across its dual half, then
                // across the corner of the orbit predecessor
                let orbit = &g.faces()[f];
                let k = orbit.len();
                for j in 0..k {
                    let d = orbit[(k - j) % k];
                    let prev = orbit[(2 * k - j - 1) % k];
                    steps.push(DualStep {
                        from: d,
                        via: CompEdge::DualHalf(d),
                        to: g.sigma(prev),
                    });
                    steps.push(DualStep {
                        from: g.sigma(prev),
                        via: CompEdge::Corner(prev),
                        to: prev,
                    });
                }
            }
            CompVertex::EdgeMid(h) => {
                steps.push(DualStep {
                    from: h,
                    via: CompEdge::DualHalf(g.alpha(h)),
                    to: g.alpha(h),
                });
                steps.push(DualStep {
                    from: g.alpha(h),
                    via: CompEdge::DualHalf(h),
                    to: h,
                });
            }
        }
        DualWalk { steps }
    }

    /// The cycle of the completion's dual just left of a cycle of G, going in
    /// the same direction.
    pub fn walk_left(&self, c: &CycleWalk) -> DualWalk {
        self.side_walk(c, true)
    }

    /// The cycle just right of a cycle of G.
    pub fn walk_right(&self, c: &CycleWalk) -> DualWalk {
        self.side_walk(c, false)
    }

    fn side_walk(&self, c: &CycleWalk, left: bool) -> DualWalk {
        let g = &self.g;
        let k = c.darts.len();
        let mut steps = Vec::new();
        for i in 0..k {
            let d = c.darts[i];
            let d_next = c.darts[(i + 1) % k];
            let arrive = g.alpha(d);
            if left {
                steps.push(DualStep {
                    from: d,
                    via: CompEdge::DualHalf(d),
                    to: arrive,
                });
                // clockwise through the left sector
                let mut y = arrive;
                while y != d_next {
                    let prev = g.sigma_inv(y);
                    steps.push(DualStep {
                        from: y,
                        via: CompEdge::Corner(prev),
                        to: prev,
                    });
                    y = prev;
                }
            } else {
                steps.push(DualStep {
                    from: d,
                    via: CompEdge::DualHalf(arrive),
                    to: arrive,
                });
                // counterclockwise through the right sector
                let mut y = arrive;
                while y != d_next {
                    steps.push(DualStep {
                        from: y,
                        via: CompEdge::Corner(y),
                        to: g.sigma(y),
                    });
                    y = g.sigma(y);
                }
            }
        }
        DualWalk { steps }
    }

    /// Returns (gamma(C), delta(W_L(C)), delta(W_R(C))) and asserts the
    /// identities gamma = delta_L + delta_R and delta_L = gamma/2 - 4k.
    pub fn gamma_delta_consistency(
        &self,
        orientation: &FourOrientation,
        c: &CycleWalk,
    ) -> Result<(i64, i64, i64)> {
        let gamma = self.gamma(orientation, c)?;
        let dl = self.delta(orientation, &self.walk_left(c))?;
        let dr = self.delta(orientation, &self.walk_right(c))?;
        let k = c.darts.len() as i64;
        if gamma != dl + dr || 2 * dl != gamma - 8 * k {
            return Err(Error::Internal(format!(
                "gamma/delta identity failed: gamma={gamma}, dl={dl}, dr={dr}, k={k}"
            )));
        }
        Ok((gamma, dl, dr))
    }
}

// ---------------------------------------------------------------------------
// TTS-labelings
// ---------------------------------------------------------------------------

/// Half-edge labeling in {0,1,2,3}: per edge the two labels differ by 2 mod 4,
/// around each vertex the labels form four non-empty intervals 0,1,2,3 in ccw
/// order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtsLabeling {
    pub label: Vec<u8>,
}

impl TtsLabeling {
    pub fn validate(&self, g: &ToroidalMap) -> Result<()> {
        if self.label.len() != g.n_darts() {
            return Err(Error::Labeling("wrong dart count".into()));
        }
        for d in g.edges() {
            let (a, b) = (self.label[d], self.label[g.alpha(d)]);
            if (a + 2) % 4 != b {
                return Err(Error::Labeling(format!(
                    "edge {} labels {a},{b} do not differ by 2 mod 4",
                    g.edge_of(d)
                )));
            }
        }
        for v in 0..g.n_vertices() {
            let rot = g.rotation(v);
            let mut increments = 0usize;
            for i in 0..rot.len() {
                let a = self.label[rot[i]];
                let b = self.label[rot[(i + 1) % rot.len()]];
                if b == (a + 1) % 4 {
                    increments += 1;
                } else if b != a {
                    return Err(Error::Labeling(format!(
                        "labels around vertex {v} are not four ccw intervals"
                    )));
                }
            }
            if increments != 4 {
                return Err(Error::Labeling(format!(
                    "labels around vertex {v} have {increments} interval boundaries, want 4"
                )));
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (d, l) in self.label.iter().enumerate() {
            writeln!(out, "label {} {}", d, l).unwrap();
        }
        out
    }

    /// Shift every label by a constant mod 4.
    pub fn shifted(&self, by: u8) -> TtsLabeling {
        TtsLabeling {
            label: self.label.iter().map(|&l| (l + by) % 4).collect(),
        }
    }
}

impl AngleMap {
    /// Builds the TTS-labeling by propagating delta along a BFS of the
    /// completion's dual from a seed face (a half-edge of G, labeled 0).
    /// Cycle consistency is checked on every non-tree adjacency.
    pub fn tts_labeling(&self, orientation: &FourOrientation, seed: DartId) -> Result<TtsLabeling> {
        orientation.validate(self)?;
        let g = &self.g;
        let mut label: Vec<Option<i64>> = vec![None; g.n_darts()];
        label[seed] = Some(0);
        let mut queue = VecDeque::from([seed]);
        while let Some(h) = queue.pop_front() {
            let base = label[h].unwrap();
            // neighbors of quad(h): across its two corners and its two dual halves
            let nbrs = [
                DualStep {
                    from: h,
                    via: CompEdge::Corner(h),
                    to: g.sigma(h),
                },
                DualStep {
                    from: h,
                    via: CompEdge::Corner(g.sigma_inv(h)),
                    to: g.sigma_inv(h),
                },
                DualStep {
                    from: h,
                    via: CompEdge::DualHalf(h),
                    to: g.alpha(h),
                },
                DualStep {
                    from: h,
                    via: CompEdge::DualHalf(g.alpha(h)),
                    to: g.alpha(h),
                },
            ];
            for s in nbrs {
                let l = (base + self.step_delta(orientation, &s)).rem_euclid(4);
                match label[s.to] {
                    None => {
                        label[s.to] = Some(l);
                        queue.push_back(s.to);
                    }
                    Some(prev) => {
                        if prev != l {
                            return Err(Error::Labeling(format!(
                                "label propagation inconsistent at half-edge {} ({} vs {}): \
                                 the orientation does not satisfy gamma = 0 mod 8",
                                s.to, prev, l
                            )));
                        }
                    }
                }
            }
        }
        let label: Vec<u8> = label
            .into_iter()
            .map(|l| l.expect("completion dual is connected") as u8)
            .collect();
        let tl = TtsLabeling { label };
        tl.validate(g)?;
        Ok(tl)
    }
}

// ---------------------------------------------------------------------------
// Exhaustive oracles
// ---------------------------------------------------------------------------

/// Enumerates all 4-orientations by choosing, for each face, the corner
/// through which the dual vertex sends its out-edge, with primal indegree
/// pruning. Guarded to small instances.
pub fn enumerate_four_orientations(
    a: &AngleMap,
    max_vertices: usize,
) -> Result<Vec<FourOrientation>> {
    let g = a.g();
    if g.n_vertices() > max_vertices {
        return Err(Error::SizeGuard(format!(
            "enumeration is guarded to n <= {max_vertices}, instance has n = {}",
            g.n_vertices()
        )));
    }
    let faces = g.faces();
    let target: Vec<usize> = (0..g.n_vertices()).map(|v| g.degree(v) - 4).collect();
    let mut capacity = vec![0usize; g.n_vertices()];
    for orbit in faces {
        for &c in orbit {
            capacity[g.vertex_of(c)] += 1;
        }
    }
    let mut chosen = vec![0usize; g.n_vertices()];
    let mut out = vec![true; a.n_corners()];
    let mut results = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &ToroidalMap,
        faces: &[Vec<DartId>],
        i: usize,
        chosen: &mut Vec<usize>,
        capacity: &mut Vec<usize>,
        target: &[usize],
        out: &mut Vec<bool>,
        results: &mut Vec<FourOrientation>,
    ) {
        if i == faces.len() {
            if chosen == target {
                results.push(FourOrientation { out: out.clone() });
            }
            return;
        }
        for &c in &faces[i] {
            capacity[g.vertex_of(c)] -= 1;
        }
        for &c in &faces[i] {
            let v = g.vertex_of(c);
            if chosen[v] + 1 > target[v] {
                continue;
            }
            chosen[v] += 1;
            out[c] = false;
            if (0..g.n_vertices()).all(|w| chosen[w] + capacity[w] >= target[w]) {
                rec(g, faces, i + 1, chosen, capacity, target, out, results);
            }
            out[c] = true;
            chosen[v] -= 1;
        }
        for &c in &faces[i] {
            capacity[g.vertex_of(c)] += 1;
        }
    }
    if g.rotation(0).len() >= 4 || g.n_vertices() > 1 {
        rec(
            g,
            faces,
            0,
            &mut chosen,
            &mut capacity,
            &target,
            &mut out,
            &mut results,
        );
    }
    Ok(results)
}

/// Enumerates simple cycles of G (no repeated vertices) up to a length bound,
/// in both directions of traversal.
pub fn simple_cycles(g: &ToroidalMap, max_len: usize) -> Vec<CycleWalk> {
    let mut out = Vec::new();
    let mut stack: Vec<DartId> = Vec::new();
    let mut on_stack: BTreeSet<VertexId> = BTreeSet::new();
    fn rec(
        g: &ToroidalMap,
        start: DartId,
        max_len: usize,
        stack: &mut Vec<DartId>,
        on_stack: &mut BTreeSet<VertexId>,
        out: &mut Vec<CycleWalk>,
    ) {
        let last = *stack.last().unwrap();
        let head = g.vertex_of(g.alpha(last));
        if head == g.vertex_of(start) {
            if start != g.alpha(last) {
                out.push(CycleWalk {
                    darts: stack.clone(),
                });
            }
            return;
        }
        if stack.len() == max_len || on_stack.contains(&head) {
            return;
        }
        on_stack.insert(head);
        for &d in g.rotation(head) {
            if d > start && d != g.alpha(last) {
                stack.push(d);
                rec(g, start, max_len, stack, on_stack, out);
                stack.pop();
            }
        }
        on_stack.remove(&head);
    }
    for start in g.darts() {
        stack.push(start);
        on_stack.insert(g.vertex_of(start));
        rec(g, start, max_len, &mut stack, &mut on_stack, &mut out);
        on_stack.clear();
        stack.clear();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn angle_map_counts() {
        for (g, n) in [(fixtures::one_vertex(), 1usize), (fixtures::k7(), 7)] {
            let a = AngleMap::new(&g).unwrap();
            assert_eq!(a.map().n_vertices(), 3 * n);
            assert_eq!(a.map().n_edges(), 6 * n);
            assert_eq!(a.map().n_faces(), 3 * n);
            assert!(a.map().faces().iter().all(|f| f.len() == 4));
            for f in 0..g.n_faces() {
                assert_eq!(a.map().degree(a.dual_vertex(f)), 3);
            }
        }
    }

    #[test]
    fn angle_map_rejects_non_triangulations() {
        assert!(AngleMap::new(&fixtures::square_grid()).is_err());
    }

    #[test]
    fn one_vertex_orientation_oracle() {
        let g = fixtures::one_vertex();
        let a = AngleMap::new(&g).unwrap();
        let all = enumerate_four_orientations(&a, 4).unwrap();
        // per-face dual choices: 3 x 3; the primal constraint (indegree 2)
        // keeps exactly the assignments with both faces pointing inward
        assert_eq!(all.len(), 9);
        let basis = g.homology_basis();
        let balanced: Vec<_> = all
            .iter()
            .filter(|o| a.is_balanced(o, &basis).unwrap())
            .collect();
        assert!(!balanced.is_empty());
        assert!(balanced.len() < all.len(), "some 4-orientation is not balanced");
        let mut found_gamma2 = false;
        for o in &all {
            for d in g.edges() {
                let c = CycleWalk { darts: vec![d] };
                if a.gamma(o, &c).unwrap().abs() == 2 {
                    found_gamma2 = true;
                }
            }
        }
        assert!(found_gamma2, "an orientation with |gamma| = 2 on a loop exists");
    }

    #[test]
    fn gamma_negates_under_reversal() {
        let g = fixtures::one_vertex();
        let a = AngleMap::new(&g).unwrap();
        for o in enumerate_four_orientations(&a, 4).unwrap() {
            for d in g.edges() {
                let c = CycleWalk { darts: vec![d] };
                let r = c.reversed(&g);
                assert_eq!(a.gamma(&o, &c).unwrap(), -a.gamma(&o, &r).unwrap());
            }
        }
    }

    #[test]
    fn delta_of_dual_faces_matches_vertex_type() {
        for g in [fixtures::one_vertex(), fixtures::two_vertex()] {
            let a = AngleMap::new(&g).unwrap();
            let all = enumerate_four_orientations(&a, 4).unwrap();
            for o in all.iter().take(5) {
                for v in 0..g.n_vertices() {
                    let w = a.dual_face_walk(CompVertex::Primal(v));
                    assert_eq!(a.delta(o, &w).unwrap(), 4, "primal dual-face delta");
                }
                for f in 0..g.n_faces() {
                    let w = a.dual_face_walk(CompVertex::Dual(f));
                    assert_eq!(a.delta(o, &w).unwrap(), -8, "dual dual-face delta");
                }
                for h in g.edges() {
                    let w = a.dual_face_walk(CompVertex::EdgeMid(h));
                    assert_eq!(a.delta(o, &w).unwrap(), 4, "edge dual-face delta");
                }
            }
        }
    }

    #[test]
    fn gamma_delta_identities_hold_exhaustively() {
        for g in [fixtures::one_vertex(), fixtures::two_vertex()] {
            let a = AngleMap::new(&g).unwrap();
            let all = enumerate_four_orientations(&a, 4).unwrap();
            let cycles = simple_cycles(&g, 6);
            assert!(!cycles.is_empty());
            for o in &all {
                for c in &cycles {
                    let (gamma, dl, _dr) = a.gamma_delta_consistency(o, c).unwrap();
                    assert_eq!(gamma.rem_euclid(8) == 0, dl.rem_euclid(4) == 0);
                }
            }
        }
    }

    #[test]
    fn gamma_homology_additivity() {
        for g in [fixtures::one_vertex(), fixtures::two_vertex()] {
            let a = AngleMap::new(&g).unwrap();
            let basis = g.homology_basis();
            let all = enumerate_four_orientations(&a, 4).unwrap();
            let cycles = simple_cycles(&g, 8);
            for o in &all {
                let g1 = a.gamma(o, &basis.b1).unwrap();
                let g2 = a.gamma(o, &basis.b2).unwrap();
                for c in &cycles {
                    let class = g.cycle_class(&basis, c).unwrap();
                    if class == [0, 0] {
                        continue;
                    }
                    assert_eq!(
                        a.gamma(o, c).unwrap(),
                        class[0] * g1 + class[1] * g2,
                        "gamma additivity fails"
                    );
                }
            }
        }
    }

    #[test]
    fn balanced_iff_gamma_zero_on_all_noncontractible_cycles() {
        let g = fixtures::two_vertex();
        let a = AngleMap::new(&g).unwrap();
        let basis = g.homology_basis();
        let all = enumerate_four_orientations(&a, 4).unwrap();
        let cycles = simple_cycles(&g, 8);
        for o in &all {
            let balanced = a.is_balanced(o, &basis).unwrap();
            let all_zero = cycles
                .iter()
                .filter(|c| g.cycle_class(&basis, c).unwrap() != [0, 0])
                .all(|c| a.gamma(o, c).unwrap() == 0);
            assert_eq!(balanced, all_zero);
        }
    }

    #[test]
    fn tts_labeling_exists_iff_mod8() {
        let g = fixtures::one_vertex();
        let a = AngleMap::new(&g).unwrap();
        let basis = g.homology_basis();
        for o in enumerate_four_orientations(&a, 4).unwrap() {
            let admits = a.admits_tts_labeling(&o, &basis).unwrap();
            let labeled = a.tts_labeling(&o, 0).is_ok();
            assert_eq!(admits, labeled);
        }
    }

    #[test]
    fn tts_labeling_seed_shift() {
        let g = fixtures::two_vertex();
        let a = AngleMap::new(&g).unwrap();
        let basis = g.homology_basis();
        let all = enumerate_four_orientations(&a, 4).unwrap();
        let o = all
            .iter()
            .find(|o| a.is_balanced(o, &basis).unwrap())
            .expect("balanced orientation exists");
        let l0 = a.tts_labeling(o, 0).unwrap();
        for seed in 1..g.n_darts() {
            let l = a.tts_labeling(o, seed).unwrap();
            let shift = (4 + l0.label[seed] as i64 - l.label[seed] as i64).rem_euclid(4) as u8;
            assert_eq!(l.shifted(shift), l0, "labelings differ by a constant shift");
        }
    }

    #[test]
    fn labels_differ_by_two_across_edges() {
        let g = fixtures::one_vertex();
        let a = AngleMap::new(&g).unwrap();
        let basis = g.homology_basis();
        for o in enumerate_four_orientations(&a, 4).unwrap() {
            if !a.is_balanced(&o, &basis).unwrap() {
                continue;
            }
            let l = a.tts_labeling(&o, 0).unwrap();
            for d in g.edges() {
                assert_eq!((l.label[d] + 2) % 4, l.label[g.alpha(d)]);
            }
        }
    }

    #[test]
    fn orientation_serialization_roundtrip() {
        let g = fixtures::one_vertex();
        let a = AngleMap::new(&g).unwrap();
        for o in enumerate_four_orientations(&a, 4).unwrap() {
            let text = o.serialize(&a);
            let parsed = FourOrientation::parse(&a, &text).unwrap();
            assert_eq!(parsed, o);
        }
    }
}
