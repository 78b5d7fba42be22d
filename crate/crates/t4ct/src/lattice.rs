//! The distributive lattice of balanced 4-orientations: the order relative to
//! a root face, descent to the minimal element, exhaustive reconstruction at
//! desk scale, and the {4,8}-disk machinery.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use log::warn;

use crate::angle::{enumerate_four_orientations, AngleMap, FourOrientation};
use crate::map::{CoverPatch, DartId, FaceId, HomologyBasis, Side};
use crate::{Error, Result};

/// Flow of an orientation difference on the angle map: +1 on corners where
/// `d1` points primal-to-dual and `d2` does not, -1 the other way, else 0.
pub fn difference_flow(d1: &FourOrientation, d2: &FourOrientation) -> Vec<i64> {
    d1.out
        .iter()
        .zip(&d2.out)
        .map(|(&a, &b)| match (a, b) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        })
        .collect()
}

/// Decomposes a flow of the angle map as an integer combination of
/// counterclockwise face boundary flows, with the coefficient of `root_face`
/// pinned to zero. Returns None when the flow is not 0-homologous.
pub fn lambda_decomposition(a: &AngleMap, flow: &[i64], root_face: FaceId) -> Option<Vec<i64>> {
    let amap = a.map();
    let n_faces = amap.n_faces();
    let mut lambda: Vec<Option<i64>> = vec![None; n_faces];
    lambda[root_face] = Some(0);
    let mut queue = VecDeque::from([root_face]);
    let mut visited_edges = vec![false; a.n_corners()];
    while let Some(f) = queue.pop_front() {
        let lf = lambda[f].unwrap();
        for &ad in &amap.faces()[f] {
            let c = ad / 2;
            visited_edges[c] = true;
            // flow_c = lambda[face(2c)] - lambda[face(2c+1)]
            let (f_plus, f_minus) = (amap.face_left(2 * c), amap.face_left(2 * c + 1));
            let (other, lo) = if f == f_plus {
                (f_minus, lf - flow[c])
            } else {
                (f_plus, lf + flow[c])
            };
            match lambda[other] {
                None => {
                    lambda[other] = Some(lo);
                    queue.push_back(other);
                }
                Some(prev) => {
                    if prev != lo {
                        return None;
                    }
                }
            }
        }
    }
    // disconnected angle maps cannot happen; all faces reached
    let lambda: Vec<i64> = lambda.into_iter().map(|l| l.unwrap()).collect();
    // verify every edge equation (BFS only guarantees tree edges plus the
    // queue revisits; self-paired faces need the explicit check)
    for c in 0..a.n_corners() {
        let (f_plus, f_minus) = (amap.face_left(2 * c), amap.face_left(2 * c + 1));
        if lambda[f_plus] - lambda[f_minus] != flow[c] {
            return None;
        }
    }
    Some(lambda)
}

/// Orientations homologous: the difference is 0-homologous.
pub fn homologous(a: &AngleMap, d1: &FourOrientation, d2: &FourOrientation) -> bool {
    lambda_decomposition(a, &difference_flow(d1, d2), 0).is_some()
}

/// The lattice order: d1 <= d2 iff d1 \ d2 is counterclockwise w.r.t. the
/// root face (all face coefficients non-negative with the root pinned to 0).
pub fn order_le(
    a: &AngleMap,
    root_face: FaceId,
    d1: &FourOrientation,
    d2: &FourOrientation,
) -> bool {
    match lambda_decomposition(a, &difference_flow(d1, d2), root_face) {
        Some(lambda) => lambda.iter().all(|&l| l >= 0),
        None => false,
    }
}

// ---------------------------------------------------------------------------
// Descent to the minimal element
// ---------------------------------------------------------------------------

/// Visits directed edge-simple closed trails of the oriented angle map, up to
/// a length bound, in deterministic order (lowest corner first). The visitor
/// returns true to stop the enumeration.
fn for_each_closed_trail(
    a: &AngleMap,
    orientation: &FourOrientation,
    max_len: usize,
    visit: &mut dyn FnMut(&[DartId]) -> bool,
) {
    // successor corners: at each angle-map vertex, the outgoing corners
    let mut out_at: BTreeMap<usize, Vec<DartId>> = BTreeMap::new();
    for c in 0..a.n_corners() {
        let from = if orientation.out[c] {
            a.primal_vertex(a.primal_of_corner(c))
        } else {
            a.dual_vertex(a.dual_of_corner(c))
        };
        out_at.entry(from).or_default().push(c);
    }
    let head_of = |c: DartId| {
        if orientation.out[c] {
            a.dual_vertex(a.dual_of_corner(c))
        } else {
            a.primal_vertex(a.primal_of_corner(c))
        }
    };
    let mut trail: Vec<DartId> = Vec::new();
    let mut used = vec![false; a.n_corners()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        out_at: &BTreeMap<usize, Vec<DartId>>,
        head_of: &dyn Fn(DartId) -> usize,
        start: DartId,
        start_vertex: usize,
        max_len: usize,
        trail: &mut Vec<DartId>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[DartId]) -> bool,
    ) -> bool {
        let here = head_of(*trail.last().unwrap());
        if here == start_vertex && trail.len() > 1 && visit(trail) {
            return true;
        }
        if trail.len() == max_len {
            return false;
        }
        if let Some(nexts) = out_at.get(&here) {
            for &c in nexts {
                if c > start && !used[c] {
                    used[c] = true;
                    trail.push(c);
                    let stop = rec(out_at, head_of, start, start_vertex, max_len, trail, used, visit);
                    trail.pop();
                    used[c] = false;
                    if stop {
                        return true;
                    }
                }
            }
        }
        false
    }
    for start in 0..a.n_corners() {
        let start_vertex = if orientation.out[start] {
            a.primal_vertex(a.primal_of_corner(start))
        } else {
            a.dual_vertex(a.dual_of_corner(start))
        };
        trail.push(start);
        used[start] = true;
        let stop = rec(
            &out_at,
            &head_of,
            start,
            start_vertex,
            max_len,
            &mut trail,
            &mut used,
            visit,
        );
        used[start] = false;
        trail.pop();
        if stop {
            return;
        }
    }
}

/// Flip-order chooser: picks one of the currently flippable corner sets.
type Chooser<'a> = &'a mut dyn FnMut(&[Vec<DartId>]) -> usize;

/// Result of a descent: the minimal orientation plus the flip log.
#[derive(Clone, Debug)]
pub struct Descent {
    pub result: FourOrientation,
    /// Corner sets reversed at each step.
    pub flips: Vec<Vec<DartId>>,
}

/// Repeatedly reverses clockwise (w.r.t. the root face) 0-homologous directed
/// closed trails until none remains; {4,8}-disk flips (length <= 8) are tried
/// first, longer trails only as a logged fallback.
pub fn minimize(
    a: &AngleMap,
    basis: &HomologyBasis,
    orientation: &FourOrientation,
    root_face: FaceId,
) -> Result<Descent> {
    run_descent(a, basis, orientation, root_face, None)
}

/// Descent with an externally chosen flip order; the lattice guarantees the
/// same minimum whatever the chooser picks.
pub fn minimize_with(
    a: &AngleMap,
    basis: &HomologyBasis,
    orientation: &FourOrientation,
    root_face: FaceId,
    mut choose: impl FnMut(&[Vec<DartId>]) -> usize,
) -> Result<Descent> {
    run_descent(a, basis, orientation, root_face, Some(&mut choose))
}

/// A clockwise (w.r.t. the root face) 0-homologous oriented subgraph exists
/// iff some angle-map face cannot reach the root face in the implication
/// digraph "if this face carries a negative coefficient, so does that one".
/// Returns the forward closure of the lowest such face: reversing its
/// boundary corners is a downward lattice move.
fn clockwise_region(
    a: &AngleMap,
    orientation: &FourOrientation,
    root_face: FaceId,
) -> Option<Vec<bool>> {
    let amap = a.map();
    let n_faces = amap.n_faces();
    // implication per corner c: with c oriented primal->dual, face(2c) in a
    // negative region forces face(2c+1) in as well; the reverse otherwise
    let implies = |c: DartId| -> (FaceId, FaceId) {
        let (fp, fd) = (amap.face_left(2 * c), amap.face_left(2 * c + 1));
        if orientation.out[c] {
            (fp, fd)
        } else {
            (fd, fp)
        }
    };
    // faces that reach the root face
    let mut reaches = vec![false; n_faces];
    reaches[root_face] = true;
    let mut queue = VecDeque::from([root_face]);
    let mut rev: BTreeMap<FaceId, Vec<FaceId>> = BTreeMap::new();
    for c in 0..a.n_corners() {
        let (from, to) = implies(c);
        rev.entry(to).or_default().push(from);
    }
    while let Some(f) = queue.pop_front() {
        if let Some(srcs) = rev.get(&f) {
            for &s in srcs {
                if !reaches[s] {
                    reaches[s] = true;
                    queue.push_back(s);
                }
            }
        }
    }
    let seed = (0..n_faces).find(|&f| !reaches[f])?;
    // forward closure of the seed
    let mut fwd: BTreeMap<FaceId, Vec<FaceId>> = BTreeMap::new();
    for c in 0..a.n_corners() {
        let (from, to) = implies(c);
        fwd.entry(from).or_default().push(to);
    }
    let mut region = vec![false; n_faces];
    region[seed] = true;
    let mut queue = VecDeque::from([seed]);
    while let Some(f) = queue.pop_front() {
        if let Some(dsts) = fwd.get(&f) {
            for &t in dsts {
                if !region[t] {
                    region[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    debug_assert!(!region[root_face]);
    Some(region)
}

fn boundary_corners(a: &AngleMap, region: &[bool]) -> Vec<DartId> {
    let amap = a.map();
    (0..a.n_corners())
        .filter(|&c| region[amap.face_left(2 * c)] != region[amap.face_left(2 * c + 1)])
        .collect()
}

fn run_descent(
    a: &AngleMap,
    basis: &HomologyBasis,
    orientation: &FourOrientation,
    root_face: FaceId,
    mut choose: Option<Chooser>,
) -> Result<Descent> {
    if !a.is_balanced(orientation, basis)? {
        return Err(Error::Precondition("minimize needs a balanced orientation".into()));
    }
    let mut current = orientation.clone();
    let mut flips = Vec::new();
    let budget = 1usize << 20;
    let mut steps = 0usize;
    let mut flow = vec![0i64; a.n_corners()];
    loop {
        steps += 1;
        if steps > budget {
            return Err(Error::Internal("descent did not terminate".into()));
        }
        // exact fixpoint test: no clockwise 0-homologous subgraph remains
        let region = match clockwise_region(a, &current, root_face) {
            None => break,
            Some(r) => r,
        };
        // elementary {4,8}-disk flips first
        let mut flippable: Vec<Vec<DartId>> = Vec::new();
        {
            let stop_at_first = choose.is_none();
            let cur = &current;
            for_each_closed_trail(a, cur, 8, &mut |trail| {
                for &c in trail {
                    flow[c] = if cur.out[c] { 1 } else { -1 };
                }
                let lambda = lambda_decomposition(a, &flow, root_face);
                for &c in trail {
                    flow[c] = 0;
                }
                if let Some(lambda) = lambda {
                    if lambda.iter().all(|&l| l <= 0) && lambda.iter().any(|&l| l < 0) {
                        flippable.push(trail.to_vec());
                        return stop_at_first;
                    }
                }
                false
            });
        }
        let trail = if flippable.is_empty() {
            // composite fallback: reverse the whole region boundary
            warn!(
                "elementary {{4,8}}-disk flips exhausted; flipping a composite region boundary"
            );
            boundary_corners(a, &region)
        } else {
            let i = match choose.as_mut() {
                Some(f) => f(&flippable).min(flippable.len() - 1),
                None => 0,
            };
            flippable.swap_remove(i)
        };
        for &c in &trail {
            current.out[c] = !current.out[c];
        }
        flips.push(trail);
    }
    debug_assert!(a.is_balanced(&current, basis)?);
    Ok(Descent { result: current, flips })
}

// ---------------------------------------------------------------------------
// Exhaustive reconstruction
// ---------------------------------------------------------------------------

/// All balanced 4-orientations (guarded enumeration).
pub fn enumerate_balanced(
    a: &AngleMap,
    basis: &HomologyBasis,
    max_vertices: usize,
) -> Result<Vec<FourOrientation>> {
    let mut out = Vec::new();
    for o in enumerate_four_orientations(a, max_vertices)? {
        if a.is_balanced(&o, basis)? {
            out.push(o);
        }
    }
    out.sort();
    Ok(out)
}

/// Corners whose orientation differs across the states: the edge set of the
/// reduced angle graph.
pub fn non_rigid_edges(states: &[FourOrientation]) -> BTreeSet<DartId> {
    let mut out = BTreeSet::new();
    if let Some(first) = states.first() {
        for c in 0..first.out.len() {
            if states.iter().any(|s| s.out[c] != first.out[c]) {
                out.insert(c);
            }
        }
    }
    out
}

/// Face regions of the reduced angle graph: angle-map faces glued across
/// rigid edges. Returns one flow per region (the sum of its ccw face boundary
/// flows) keyed by a region id, plus the region containing each face.
pub fn reduced_face_regions(
    a: &AngleMap,
    non_rigid: &BTreeSet<DartId>,
) -> (Vec<Vec<i64>>, Vec<usize>) {
    let amap = a.map();
    let n_faces = amap.n_faces();
    let mut parent: Vec<usize> = (0..n_faces).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for c in 0..a.n_corners() {
        if !non_rigid.contains(&c) {
            let (f1, f2) = (amap.face_left(2 * c), amap.face_left(2 * c + 1));
            let (r1, r2) = (find(&mut parent, f1), find(&mut parent, f2));
            if r1 != r2 {
                parent[r1] = r2;
            }
        }
    }
    let mut region_of_face = vec![0usize; n_faces];
    let mut region_ids: BTreeMap<usize, usize> = BTreeMap::new();
    for f in 0..n_faces {
        let r = find(&mut parent, f);
        let next = region_ids.len();
        let id = *region_ids.entry(r).or_insert(next);
        region_of_face[f] = id;
    }
    let mut flows = vec![vec![0i64; a.n_corners()]; region_ids.len()];
    for f in 0..n_faces {
        let region = region_of_face[f];
        for &ad in &amap.faces()[f] {
            let c = ad / 2;
            flows[region][c] += if ad % 2 == 0 { 1 } else { -1 };
        }
    }
    (flows, region_of_face)
}

/// Hasse diagram of the lattice on an enumerated state set: an edge from i to
/// j when the difference state_i \ state_j is the counterclockwise boundary
/// flow of exactly one non-root face region of the reduced angle graph.
pub fn hasse_diagram(
    a: &AngleMap,
    root_face: FaceId,
    states: &[FourOrientation],
) -> Vec<(usize, usize)> {
    let non_rigid = non_rigid_edges(states);
    let (flows, region_of_face) = reduced_face_regions(a, &non_rigid);
    let root_region = region_of_face[root_face];
    let mut edges = Vec::new();
    for i in 0..states.len() {
        for j in 0..states.len() {
            if i == j {
                continue;
            }
            let diff = difference_flow(&states[i], &states[j]);
            for (r, flow) in flows.iter().enumerate() {
                if r != root_region && &diff == flow {
                    edges.push((i, j));
                }
            }
        }
    }
    edges
}

/// Brute-force lattice structure checks over an enumerated state set: unique
/// minimum and maximum, meets and joins exist, and both distribute.
pub struct LatticeCheck {
    pub min: usize,
    pub max: usize,
    pub le: Vec<Vec<bool>>,
}

pub fn check_lattice(
    a: &AngleMap,
    root_face: FaceId,
    states: &[FourOrientation],
) -> Result<LatticeCheck> {
    let n = states.len();
    let mut le = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            le[i][j] = order_le(a, root_face, &states[i], &states[j]);
        }
    }
    for i in 0..n {
        if !le[i][i] {
            return Err(Error::Internal("order is not reflexive".into()));
        }
        for j in 0..n {
            if i != j && le[i][j] && le[j][i] {
                return Err(Error::Internal("order is not antisymmetric".into()));
            }
            for k in 0..n {
                if le[i][j] && le[j][k] && !le[i][k] {
                    return Err(Error::Internal("order is not transitive".into()));
                }
            }
        }
    }
    let meet = |x: usize, y: usize| -> Option<usize> {
        let lower: Vec<usize> = (0..n).filter(|&z| le[z][x] && le[z][y]).collect();
        lower
            .iter()
            .copied()
            .find(|&z| lower.iter().all(|&w| le[w][z]))
    };
    let join = |x: usize, y: usize| -> Option<usize> {
        let upper: Vec<usize> = (0..n).filter(|&z| le[x][z] && le[y][z]).collect();
        upper
            .iter()
            .copied()
            .find(|&z| upper.iter().all(|&w| le[z][w]))
    };
    let mut meets = vec![vec![0usize; n]; n];
    let mut joins = vec![vec![0usize; n]; n];
    for x in 0..n {
        for y in 0..n {
            meets[x][y] =
                meet(x, y).ok_or_else(|| Error::Internal(format!("no meet for {x},{y}")))?;
            joins[x][y] =
                join(x, y).ok_or_else(|| Error::Internal(format!("no join for {x},{y}")))?;
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                // x meet (y join z) == (x meet y) join (x meet z)
                if meets[x][joins[y][z]] != joins[meets[x][y]][meets[x][z]] {
                    return Err(Error::Internal("meet does not distribute over join".into()));
                }
                if joins[x][meets[y][z]] != meets[joins[x][y]][joins[x][z]] {
                    return Err(Error::Internal("join does not distribute over meet".into()));
                }
            }
        }
    }
    let min = (0..n)
        .find(|&i| (0..n).all(|j| le[i][j]))
        .ok_or_else(|| Error::Internal("no unique minimum".into()))?;
    let max = (0..n)
        .find(|&i| (0..n).all(|j| le[j][i]))
        .ok_or_else(|| Error::Internal("no unique maximum".into()))?;
    Ok(LatticeCheck { min, max, le })
}

// ---------------------------------------------------------------------------
// Left/right walks and {4,8}-disks
// ---------------------------------------------------------------------------

/// A closed walk of A(G) of length 4 or 8 bounding a disk: either a face of
/// A(G), or an 8-walk whose dual vertices have their third edge inside.
#[derive(Clone, Debug)]
pub struct Disk48 {
    /// Boundary as angle-map darts (interior on the left).
    pub boundary: Vec<DartId>,
    /// Angle-map faces inside the disk (including the face itself for a
    /// 4-disk).
    pub interior: BTreeSet<FaceId>,
}

impl Disk48 {
    pub fn is_4disk(&self) -> bool {
        self.boundary.len() == 4
    }

    /// True when every boundary edge is directed along the boundary walk
    /// orientation given by `forward`: forward means the walk traverses each
    /// angle-map dart in the direction the orientation points.
    fn aligned(&self, orientation: &FourOrientation, forward: bool) -> bool {
        self.boundary.iter().all(|&ad| {
            let c = ad / 2;
            let along = if ad % 2 == 0 {
                orientation.out[c]
            } else {
                !orientation.out[c]
            };
            along == forward
        })
    }

    /// Interior sits on the left of the boundary darts, so traversing them
    /// forward is counterclockwise around the disk.
    pub fn oriented_ccw(&self, orientation: &FourOrientation) -> bool {
        self.aligned(orientation, true)
    }

    pub fn oriented_cw(&self, orientation: &FourOrientation) -> bool {
        self.aligned(orientation, false)
    }
}

/// The left or right walk of an oriented angle map from a starting corner
/// traversed in its orientation direction; returns the eventually periodic
/// cycle part as corner ids.
pub fn left_right_walk(
    a: &AngleMap,
    orientation: &FourOrientation,
    start: DartId,
    side: Side,
) -> Vec<DartId> {
    let g = a.g();
    // next corner after entering a vertex via corner c
    let next = |c: DartId| -> DartId {
        if orientation.out[c] {
            // entering the dual vertex of face_left(c): unique out corner
            *g.faces()[a.dual_of_corner(c)]
                .iter()
                .find(|&&x| !orientation.out[x])
                .expect("dual vertex has outdegree 1")
        } else {
            // entering the primal vertex: first outgoing corner going
            // clockwise (left walk) or counterclockwise (right walk) from c
            let mut x = c;
            loop {
                x = match side {
                    Side::Left => g.sigma_inv(x),
                    Side::Right => g.sigma(x),
                };
                if orientation.out[x] {
                    return x;
                }
            }
        }
    };
    let mut seen: BTreeMap<DartId, usize> = BTreeMap::new();
    let mut seq = vec![start];
    let mut c = start;
    loop {
        match seen.get(&c) {
            Some(&i) => {
                return seq[i..seq.len() - 1].to_vec();
            }
            None => {
                seen.insert(c, seq.len() - 1);
            }
        }
        c = next(c);
        seq.push(c);
    }
}

/// Lifts a corner walk of A(G) to angle-map darts travelling in the
/// orientation direction.
pub fn corner_walk_to_adarts(orientation: &FourOrientation, walk: &[DartId]) -> Vec<DartId> {
    walk.iter()
        .map(|&c| if orientation.out[c] { 2 * c } else { 2 * c + 1 })
        .collect()
}

/// Extracts the disk region enclosed by a closed walk of the angle map and
/// returns its border as a Disk48 when the border has length 4 or 8.
pub fn disk_of_closed_walk(
    a: &AngleMap,
    patch: &CoverPatch,
    adarts: &[DartId],
    expect_side: Side,
) -> Result<Disk48> {
    let amap = a.map();
    let region = patch
        .disk_interior(adarts)?
        .ok_or_else(|| Error::Internal("closed walk does not bound a disk".into()))?;
    if region.side != expect_side {
        return Err(Error::Internal(format!(
            "disk found on side {:?}, expected {:?}",
            region.side, expect_side
        )));
    }
    let interior: BTreeSet<FaceId> = region.interior_faces.iter().copied().collect();
    let walk = patch.region_boundary(&region.lifted_faces)?;
    if walk.len() != 4 && walk.len() != 8 {
        return Err(Error::Internal(format!(
            "disk border has length {}, expected 4 or 8",
            walk.len()
        )));
    }
    if walk.len() == 8 {
        // the dual vertices of the border must have their third edge inside
        for &ad in &walk {
            let v = amap.vertex_of(ad);
            if v >= a.g().n_vertices() {
                let third: Vec<DartId> = amap
                    .rotation(v)
                    .iter()
                    .copied()
                    .filter(|&d| !walk.contains(&d) && !walk.contains(&amap.alpha(d)))
                    .collect();
                if third.len() != 1 || !interior.contains(&amap.face_left(third[0])) {
                    return Err(Error::Internal(
                        "8-walk border fails the dual third-edge condition".into(),
                    ));
                }
            }
        }
    }
    Ok(Disk48 {
        boundary: walk,
        interior,
    })
}

/// The unique maximal {4,8}-disk of A(G) whose interior contains the root
/// face, built from the maximal quadrangle of G around the root edge.
pub fn maximal_disk48_at_root(
    a: &AngleMap,
    g_patch: &CoverPatch,
    a_patch: &CoverPatch,
    root_face: FaceId,
) -> Result<Disk48> {
    let g = a.g();
    // the G-edge crossing the root face of A(G)
    let e0 = a.g_edge_of_face(root_face);
    let (quad, _) = g.maximal_quadrangle_containing(g_patch, e0)?;
    if quad.interior_faces.len() == 2 {
        // the 4-disk is the root face itself; boundary = reversed orbit (ccw)
        let orbit = &a.map().faces()[root_face];
        let boundary: Vec<DartId> = orbit.iter().rev().copied().collect();
        let disk = disk_of_closed_walk(a, a_patch, &boundary, Side::Left)?;
        return Ok(disk);
    }
    // 8-disk: walk the quadrangle boundary, alternating primal corners and
    // the dual vertices of the interior faces leaning on each boundary edge;
    // the enclosed region sits on the left
    let phi = |d: DartId| g.alpha(g.sigma(d));
    let mut adarts = Vec::with_capacity(8);
    for &b in &quad.boundary {
        adarts.push(2 * b); // primal w_i -> dual(face_left(b))
        adarts.push(2 * phi(phi(b)) + 1); // dual -> primal w_{i+1}
    }
    disk_of_closed_walk(a, a_patch, &adarts, Side::Left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::simple_cycles;
    use crate::fixtures;
    use crate::transversal::{find_balanced_ts, ts_to_orientation};

    fn setup(g: &crate::map::ToroidalMap) -> (AngleMap, HomologyBasis, Vec<FourOrientation>) {
        let a = AngleMap::new(g).unwrap();
        let basis = g.homology_basis();
        let states = enumerate_balanced(&a, &basis, 4).unwrap();
        (a, basis, states)
    }

    #[test]
    fn balanced_states_are_pairwise_homologous() {
        for g in [fixtures::one_vertex(), fixtures::two_vertex()] {
            let (a, basis, states) = setup(&g);
            assert!(!states.is_empty());
            for s in &states {
                assert!(homologous(&a, &states[0], s));
            }
            // balanced vs non-balanced is never homologous
            for o in enumerate_four_orientations(&a, 4).unwrap() {
                let bal = a.is_balanced(&o, &basis).unwrap();
                assert_eq!(homologous(&a, &states[0], &o), bal);
            }
        }
    }

    #[test]
    fn identical_orientations_are_homologous() {
        let g = fixtures::one_vertex();
        let (a, _, states) = setup(&g);
        assert!(homologous(&a, &states[0], &states[0]));
    }

    #[test]
    fn minimize_reaches_the_poset_minimum() {
        for g in [fixtures::one_vertex(), fixtures::two_vertex()] {
            let (a, basis, states) = setup(&g);
            for root_face in [0usize, 1] {
                let check = check_lattice(&a, root_face, &states).unwrap();
                for s in &states {
                    let descent = minimize(&a, &basis, s, root_face).unwrap();
                    assert_eq!(
                        descent.result, states[check.min],
                        "descent must reach the unique minimum"
                    );
                }
                // minimize is a fixpoint
                let dmin = &states[check.min];
                let again = minimize(&a, &basis, dmin, root_face).unwrap();
                assert!(again.flips.is_empty());
                assert_eq!(&again.result, dmin);
            }
        }
    }

    #[test]
    fn hasse_diagram_has_unique_source_and_sink() {
        for g in [fixtures::one_vertex(), fixtures::two_vertex()] {
            let (a, _, states) = setup(&g);
            let root_face = 0;
            let edges = hasse_diagram(&a, root_face, &states);
            let check = check_lattice(&a, root_face, &states).unwrap();
            if states.len() == 1 {
                assert!(edges.is_empty());
                continue;
            }
            let mut indeg = vec![0usize; states.len()];
            let mut outdeg = vec![0usize; states.len()];
            for &(i, j) in &edges {
                outdeg[i] += 1;
                indeg[j] += 1;
                assert!(check.le[i][j], "hasse edges respect the order");
            }
            let sources: Vec<usize> = (0..states.len()).filter(|&i| indeg[i] == 0).collect();
            let sinks: Vec<usize> = (0..states.len()).filter(|&i| outdeg[i] == 0).collect();
            assert_eq!(sources, vec![check.min]);
            assert_eq!(sinks, vec![check.max]);
        }
    }

    #[test]
    fn hasse_equals_cover_relation() {
        for g in [fixtures::one_vertex(), fixtures::two_vertex()] {
            let (a, _, states) = setup(&g);
            let root_face = 0;
            let edges: BTreeSet<(usize, usize)> =
                hasse_diagram(&a, root_face, &states).into_iter().collect();
            let check = check_lattice(&a, root_face, &states).unwrap();
            let n = states.len();
            let mut covers = BTreeSet::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && check.le[i][j] {
                        let strictly_between = (0..n).any(|z| {
                            z != i && z != j && check.le[i][z] && check.le[z][j]
                        });
                        if !strictly_between {
                            covers.insert((i, j));
                        }
                    }
                }
            }
            assert_eq!(edges, covers);
        }
    }

    #[test]
    fn flips_preserve_balance_along_descents() {
        let g = fixtures::two_vertex();
        let (a, basis, states) = setup(&g);
        for s in &states {
            let descent = minimize(&a, &basis, s, 0).unwrap();
            let mut cur = s.clone();
            for flip in &descent.flips {
                for &c in flip {
                    cur.out[c] = !cur.out[c];
                }
                assert!(a.is_balanced(&cur, &basis).unwrap());
            }
        }
    }

    #[test]
    fn non_rigid_edges_match_state_differences() {
        let g = fixtures::two_vertex();
        let (_, _, states) = setup(&g);
        let nr = non_rigid_edges(&states);
        if states.len() == 1 {
            assert!(nr.is_empty());
        } else {
            assert!(!nr.is_empty());
        }
        // every hasse flip uses only non-rigid corners
        let a = AngleMap::new(&g).unwrap();
        for (i, j) in hasse_diagram(&a, 0, &states) {
            let diff = difference_flow(&states[i], &states[j]);
            for (c, &x) in diff.iter().enumerate() {
                if x != 0 {
                    assert!(nr.contains(&c));
                }
            }
        }
    }

    #[test]
    fn left_right_walks_bound_48disks() {
        // every closed left/right walk of a balanced orientation bounds a
        // {4,8}-disk on the stated side
        let mut cases: Vec<(crate::map::ToroidalMap, Vec<FourOrientation>)> = Vec::new();
        let g = fixtures::two_vertex();
        let a = AngleMap::new(&g).unwrap();
        let basis = g.homology_basis();
        let states = enumerate_balanced(&a, &basis, 4).unwrap();
        cases.push((g, states));
        for g in [fixtures::grid_torus(4, 2), fixtures::nested_quadrangle()] {
            let ts = crate::transversal::find_balanced_ts(&g, 3).unwrap();
            let a = AngleMap::new(&g).unwrap();
            let o = crate::transversal::ts_to_orientation(&a, &ts).unwrap();
            cases.push((g, vec![o]));
        }
        for (g, states) in cases {
            let a = AngleMap::new(&g).unwrap();
            let a_basis = a.map().homology_basis();
            let patch = CoverPatch::with_basis(a.map(), 3, a_basis);
            for o in &states {
                for start in 0..a.n_corners() {
                    for side in [Side::Left, Side::Right] {
                        let cycle = left_right_walk(&a, o, start, side);
                        let adarts = corner_walk_to_adarts(o, &cycle);
                        let disk = disk_of_closed_walk(&a, &patch, &adarts, side);
                        let disk = disk.unwrap_or_else(|e| {
                            panic!("closed {side:?} walk must bound a {{4,8}}-disk: {e}")
                        });
                        assert!(disk.boundary.len() == 4 || disk.boundary.len() == 8);
                    }
                }
            }
        }
    }

    #[test]
    fn root_disk_is_cw_in_minimum_and_ccw_in_maximum() {
        let g = fixtures::two_vertex();
        let (a, _basis, states) = setup(&g);
        let g_patch = CoverPatch::new(&g, 3);
        let a_basis = a.map().homology_basis();
        let a_patch = CoverPatch::with_basis(a.map(), 3, a_basis);
        for root_face in 0..a.map().n_faces() {
            let check = check_lattice(&a, root_face, &states).unwrap();
            let disk_min =
                maximal_disk48_at_root(&a, &g_patch, &a_patch, root_face).unwrap();
            assert!(disk_min.interior.contains(&root_face));
            assert!(
                disk_min.oriented_cw(&states[check.min]),
                "root disk must be clockwise in the minimum"
            );
            assert!(
                disk_min.oriented_ccw(&states[check.max]),
                "root disk must be counterclockwise in the maximum"
            );
        }
    }

    #[test]
    fn k7_root_disk_is_a_4disk_and_cw_in_minimum() {
        let g = fixtures::k7();
        let ts = find_balanced_ts(&g, 3).unwrap();
        let a = AngleMap::new(&g).unwrap();
        let basis = g.homology_basis();
        let o = ts_to_orientation(&a, &ts).unwrap();
        let root_face = a.face_of_g_edge(0);
        let descent = minimize(&a, &basis, &o, root_face).unwrap();
        let g_patch = CoverPatch::new(&g, 3);
        let a_basis = a.map().homology_basis();
        let a_patch = CoverPatch::with_basis(a.map(), 3, a_basis);
        let disk = maximal_disk48_at_root(&a, &g_patch, &a_patch, root_face).unwrap();
        assert!(disk.is_4disk(), "K7 root quadrangle has empty interior");
        assert!(disk.oriented_cw(&descent.result));
    }

    #[test]
    fn nested_quadrangle_root_disk_is_an_8disk() {
        let g = fixtures::nested_quadrangle();
        let a = AngleMap::new(&g).unwrap();
        let h0 = g.root().unwrap();
        let root_face = a.face_of_g_edge(h0);
        let g_patch = CoverPatch::new(&g, 3);
        let a_basis = a.map().homology_basis();
        let a_patch = CoverPatch::with_basis(a.map(), 3, a_basis);
        let disk = maximal_disk48_at_root(&a, &g_patch, &a_patch, root_face).unwrap();
        assert_eq!(disk.boundary.len(), 8);
        assert!(disk.interior.contains(&root_face));
    }

    #[test]
    fn eight_disk_interior_edges_enter_it() {
        // edges inside an 8-disk incident to its border enter the disk
        let g = fixtures::nested_quadrangle();
        let ts = find_balanced_ts(&g, 3).unwrap();
        let a = AngleMap::new(&g).unwrap();
        let basis = g.homology_basis();
        let o = ts_to_orientation(&a, &ts).unwrap();
        let h0 = g.root().unwrap();
        let root_face = a.face_of_g_edge(h0);
        let dmin = minimize(&a, &basis, &o, root_face).unwrap().result;
        let g_patch = CoverPatch::new(&g, 3);
        let a_basis = a.map().homology_basis();
        let a_patch = CoverPatch::with_basis(a.map(), 3, a_basis);
        let disk = maximal_disk48_at_root(&a, &g_patch, &a_patch, root_face).unwrap();
        assert_eq!(disk.boundary.len(), 8);
        let boundary_vertices: BTreeSet<usize> = disk
            .boundary
            .iter()
            .map(|&ad| a.map().vertex_of(ad))
            .collect();
        let boundary_edges: BTreeSet<DartId> = disk.boundary.iter().map(|&ad| ad / 2).collect();
        for c in 0..a.n_corners() {
            if boundary_edges.contains(&c) {
                continue;
            }
            // corner edges with both angle-map faces inside are interior;
            // incident to the border when an endpoint lies on it
            let inside = disk.interior.contains(&a.map().face_left(2 * c))
                && disk.interior.contains(&a.map().face_left(2 * c + 1));
            if !inside {
                continue;
            }
            // interior edges incident to the 8-disk enter it: they are
            // directed from the interior toward their boundary endpoint
            let pv = a.primal_vertex(a.primal_of_corner(c));
            let dv = a.dual_vertex(a.dual_of_corner(c));
            for (vertex, toward_boundary) in [(pv, !dmin.out[c]), (dv, dmin.out[c])] {
                if boundary_vertices.contains(&vertex) {
                    assert!(
                        toward_boundary,
                        "interior edge at corner {c} must enter the 8-disk boundary"
                    );
                }
            }
        }
    }

    #[test]
    fn reduced_face_regions_are_48disks() {
        // every face region of the reduced angle graph has a {4,8}-disk as its
        // outer walk; some instance shows the mixed one-8-disk-plus-4-disks
        // structure
        let mut instances = vec![fixtures::one_vertex(), fixtures::two_vertex()];
        instances.push(fixtures::contracted_to(3));
        let mut saw_mixed = false;
        for g in &instances {
            let a = AngleMap::new(g).unwrap();
            let basis = g.homology_basis();
            let states = enumerate_balanced(&a, &basis, 4).unwrap();
            if states.len() < 2 {
                continue;
            }
            let non_rigid = non_rigid_edges(&states);
            let (flows, region_of_face) = reduced_face_regions(&a, &non_rigid);
            let a_basis = a.map().homology_basis();
            let patch = CoverPatch::with_basis(a.map(), 3, a_basis);
            let amap = a.map();
            let mut lens = BTreeSet::new();
            for region_id in 0..flows.len() {
                let faces: Vec<usize> = (0..amap.n_faces())
                    .filter(|&f| region_of_face[f] == region_id)
                    .collect();
                if faces.len() == amap.n_faces() {
                    continue; // everything rigid; no reduced faces
                }
                // lift the region from an anchor copy
                let anchor = (faces[0], (0i64, 0i64));
                let mut lifted = BTreeSet::from([anchor]);
                let mut queue = vec![anchor];
                while let Some((f, t)) = queue.pop() {
                    for (d, s) in patch.face_darts(f, t) {
                        assert!(patch.dart_present(d, s), "region must fit the window");
                        let c = d / 2;
                        if non_rigid.contains(&c) {
                            continue; // region boundary
                        }
                        let nb = patch.face_at(amap.alpha(d), patch.head_shift(d, s));
                        assert_eq!(region_of_face[nb.0], region_id);
                        if lifted.insert(nb) {
                            queue.push(nb);
                        }
                    }
                }
                let walk = patch.region_boundary(&lifted).unwrap();
                let disk = disk_of_closed_walk(&a, &patch, &walk, Side::Left).unwrap();
                assert!(disk.boundary.len() == 4 || disk.boundary.len() == 8);
                lens.insert(disk.boundary.len());
            }
            if lens.contains(&4) && lens.contains(&8) {
                saw_mixed = true;
            }
        }
        assert!(
            saw_mixed,
            "some instance exhibits one 8-disk and some 4-disks as reduced faces"
        );
    }

    #[test]
    fn descent_gamma_stays_zero() {
        let g = fixtures::two_vertex();
        let (a, basis, states) = setup(&g);
        let cycles = simple_cycles(&g, 6);
        for s in states.iter().take(4) {
            let descent = minimize(&a, &basis, s, 0).unwrap();
            let mut cur = s.clone();
            for flip in &descent.flips {
                for &c in flip {
                    cur.out[c] = !cur.out[c];
                }
                for cyc in &cycles {
                    if g.cycle_class(&basis, cyc).unwrap() != [0, 0] {
                        assert_eq!(a.gamma(&cur, cyc).unwrap(), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn singleton_state_set_has_no_nonrigid_edges() {
        let states = vec![FourOrientation { out: vec![true, false] }];
        assert!(non_rigid_edges(&states).is_empty());
    }
}
