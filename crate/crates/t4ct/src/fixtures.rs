//! Reference instances used across tests and the CLI examples.

use std::sync::OnceLock;

use crate::map::{DartId, ToroidalMap};

/// The toroidal triangulation on one vertex: three loops a, b, c with rotation
/// (a b c a' b' c'); two triangular faces.
pub fn one_vertex() -> ToroidalMap {
    ToroidalMap::from_rotations(vec![vec![0, 1, 2, 3, 4, 5]], &[(0, 3), (1, 4), (2, 5)], None)
        .expect("one-vertex triangulation")
}

/// The square-grid quadrangulation of the torus: one vertex, two loops, one
/// quadrangular face.
pub fn square_grid() -> ToroidalMap {
    ToroidalMap::from_rotations(vec![vec![0, 1, 2, 3]], &[(0, 2), (1, 3)], None)
        .expect("square grid")
}

/// K7 embedded on the torus. The cyclic neighbor order around each vertex v is
/// (v+p[0], ..., v+p[5]) mod 7 for one fixed offset permutation p, found by
/// exhaustive search so that all 14 faces are triangles.
pub fn k7() -> ToroidalMap {
    static CACHE: OnceLock<ToroidalMap> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let mut perm = [1usize, 2, 3, 4, 5, 6];
            let found = permutations(&mut perm, 0, &mut |p| k7_from_offsets(p));
            found.expect("some offset order triangulates K7 on the torus")
        })
        .clone()
}

fn permutations(
    arr: &mut [usize; 6],
    k: usize,
    try_build: &mut dyn FnMut(&[usize; 6]) -> Option<ToroidalMap>,
) -> Option<ToroidalMap> {
    if k == arr.len() {
        return try_build(arr);
    }
    for i in k..arr.len() {
        arr.swap(k, i);
        if let Some(found) = permutations(arr, k + 1, try_build) {
            return Some(found);
        }
        arr.swap(k, i);
    }
    None
}

fn k7_from_offsets(p: &[usize; 6]) -> Option<ToroidalMap> {
    // dart (v, i) = 6v + i points from v to (v + p[i]) mod 7
    let dart = |v: usize, i: usize| 6 * v + i;
    let slot_of = |off: usize| p.iter().position(|&q| q == off).unwrap();
    let rotations: Vec<Vec<DartId>> = (0..7).map(|v| (0..6).map(|i| dart(v, i)).collect()).collect();
    let mut pairs = Vec::new();
    for v in 0..7 {
        for i in 0..6 {
            let w = (v + p[i]) % 7;
            let j = slot_of(7 - p[i]);
            if dart(v, i) < dart(w, j) {
                pairs.push((dart(v, i), dart(w, j)));
            }
        }
    }
    let m = ToroidalMap::from_rotations(rotations, &pairs, None).ok()?;
    if m.is_triangulation() {
        Some(m)
    } else {
        None
    }
}

/// An essentially 4-connected toroidal triangulation on `n` <= 7 vertices,
/// obtained by contracting K7.
pub fn contracted_to(n: usize) -> ToroidalMap {
    assert!((1..=7).contains(&n));
    let mut m = k7();
    while m.n_vertices() > n {
        let e = m.find_contractible_edge(3).expect("contractible edge exists");
        m = m.contract_edge(e).expect("contraction succeeds").0;
    }
    m
}

/// A two-vertex essentially 4-connected toroidal triangulation, obtained by
/// contracting K7 five times.
pub fn two_vertex() -> ToroidalMap {
    static CACHE: OnceLock<ToroidalMap> = OnceLock::new();
    CACHE.get_or_init(|| contracted_to(2)).clone()
}

/// K7 with one extra vertex stacked inside a face: a triangulation that is not
/// essentially 4-connected (the stacking triangle separates in the cover).
pub fn k7_stacked() -> ToroidalMap {
    let m = k7();
    let orbit = m.faces()[0].clone();
    stack_vertex_in_triangle(&m, &orbit).expect("stacking preserves the map structure")
}

fn stack_vertex_in_triangle(m: &ToroidalMap, orbit: &[DartId]) -> Option<ToroidalMap> {
    assert_eq!(orbit.len(), 3);
    let nd = m.n_darts();
    // new darts: n_i = nd + 2*i at the corner vertices, m_i = nd + 2*i + 1 at z
    let mut rotations: Vec<Vec<DartId>> = (0..m.n_vertices())
        .map(|v| m.rotation(v).to_vec())
        .collect();
    for (i, &d) in orbit.iter().enumerate() {
        // insert n_i in the face corner between d and sigma(d)
        let v = m.vertex_of(d);
        let pos = rotations[v].iter().position(|&x| x == d).unwrap();
        rotations[v].insert(pos + 1, nd + 2 * i);
    }
    let mut pairs: Vec<(DartId, DartId)> = m.edges().map(|d| (d, m.alpha(d))).collect();
    for i in 0..3 {
        pairs.push((nd + 2 * i, nd + 2 * i + 1));
    }
    for z_rot in [
        vec![nd + 1, nd + 3, nd + 5],
        vec![nd + 5, nd + 3, nd + 1],
    ] {
        let mut rots = rotations.clone();
        rots.push(z_rot);
        if let Ok(map) = ToroidalMap::from_rotations(rots, &pairs, None) {
            if map.is_triangulation() {
                return Some(map);
            }
        }
    }
    None
}

/// An essentially 4-connected toroidal triangulation with a nested (non-empty)
/// maximal quadrangle: one edge of K7 is replaced by a degree-4 vertex joined
/// to the four corners of the quadrangle around it. The root dart points from
/// a quadrangle corner to the inserted vertex.
pub fn nested_quadrangle() -> ToroidalMap {
    static CACHE: OnceLock<ToroidalMap> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let m = k7();
            let e = 0; // any edge of K7 works; quadrangles all look alike
            build_nested(&m, e).expect("vertex insertion triangulates")
        })
        .clone()
}

/// The triangulated p x q grid torus: vertex (i,j) joins (i+1,j), (i,j+1) and
/// (i+1,j+1), rotation (E, NE, N, W, SW, S). Needs p, q >= 2 to avoid loops.
pub fn grid_torus(p: usize, q: usize) -> ToroidalMap {
    assert!(p >= 2 && q >= 2);
    let vid = |i: usize, j: usize| (i % p) + p * (j % q);
    let dart = |i: usize, j: usize, slot: usize| 6 * vid(i, j) + slot;
    // slots: 0=E, 1=NE, 2=N, 3=W, 4=SW, 5=S
    let rotations: Vec<Vec<DartId>> = (0..p * q)
        .map(|v| (0..6).map(|s| 6 * v + s).collect())
        .collect();
    let mut pairs = Vec::new();
    for j in 0..q {
        for i in 0..p {
            pairs.push((dart(i, j, 0), dart(i + 1, j, 3)));
            pairs.push((dart(i, j, 2), dart(i, j + 1, 5)));
            pairs.push((dart(i, j, 1), dart(i + 1, j + 1, 4)));
        }
    }
    let m = ToroidalMap::from_rotations(rotations, &pairs, None).expect("grid torus");
    assert!(m.is_triangulation());
    m
}

/// Two levels of nesting: the root edge of the nested instance is itself
/// replaced by a stacked degree-4 vertex, so the root quadrangle of the
/// innermost edge sits strictly inside a bigger non-empty quadrangle.
pub fn doubly_nested_quadrangle() -> ToroidalMap {
    static CACHE: OnceLock<ToroidalMap> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let m = nested_quadrangle();
            let e = m.root().expect("nested fixture is rooted");
            build_nested(&m, e).expect("vertex insertion triangulates")
        })
        .clone()
}

fn build_nested(m: &ToroidalMap, e: DartId) -> Option<ToroidalMap> {
    let a = m.alpha(e);
    let phi = |d: DartId| m.alpha(m.sigma(d));
    let (l1, _l2) = (phi(e), phi(phi(e)));
    let (r1, _r2) = (phi(a), phi(phi(a)));
    // quadrangle boundary ccw: (l2, l1, r2, r1); corners after darts l1 -> at u, etc.
    let u = m.vertex_of(e);
    let v = m.vertex_of(a);
    let x = m.vertex_of(l1);
    let y = m.vertex_of(r1);
    let nd = m.n_darts();
    // new darts at the corners: u -> nd, x -> nd+2, v -> nd+4, y -> nd+6; at z: odd ids
    let mut rotations: Vec<Vec<DartId>> = (0..m.n_vertices())
        .map(|w| m.rotation(w).to_vec())
        .collect();
    // u: replace e by the new dart
    let pu = rotations[u].iter().position(|&d| d == e).unwrap();
    rotations[u][pu] = nd;
    // v: replace a
    let pv = rotations[v].iter().position(|&d| d == a).unwrap();
    rotations[v][pv] = nd + 4;
    // x: insert after l1 (the corner between l1 and alpha(l2))
    let px = rotations[x].iter().position(|&d| d == l1).unwrap();
    rotations[x].insert(px + 1, nd + 2);
    // y: insert after r1
    let py = rotations[y].iter().position(|&d| d == r1).unwrap();
    rotations[y].insert(py + 1, nd + 6);
    let mut pairs: Vec<(DartId, DartId)> = m
        .edges()
        .filter(|&d| d != e.min(a))
        .map(|d| (d, m.alpha(d)))
        .collect();
    for i in 0..4 {
        pairs.push((nd + 2 * i, nd + 2 * i + 1));
    }
    for z_rot in [
        vec![nd + 1, nd + 3, nd + 5, nd + 7],
        vec![nd + 7, nd + 5, nd + 3, nd + 1],
    ] {
        let mut rots = rotations.clone();
        rots.push(z_rot);
        let (rots, pairs, root) = compact_darts(rots, pairs.clone(), Some(nd));
        if let Ok(map) = ToroidalMap::from_rotations(rots, &pairs, root) {
            if map.is_triangulation() {
                return Some(map);
            }
        }
    }
    None
}

type CompactParts = (Vec<Vec<DartId>>, Vec<(DartId, DartId)>, Option<DartId>);

/// Renumbers arbitrary dart ids to the contiguous range the map type requires.
fn compact_darts(
    rotations: Vec<Vec<DartId>>,
    pairs: Vec<(DartId, DartId)>,
    root: Option<DartId>,
) -> CompactParts {
    let mut remap = std::collections::BTreeMap::new();
    let mut next = 0usize;
    let mut get = |d: DartId, remap: &mut std::collections::BTreeMap<DartId, DartId>| {
        *remap.entry(d).or_insert_with(|| {
            let id = next;
            next += 1;
            id
        })
    };
    let rotations = rotations
        .into_iter()
        .map(|rot| rot.into_iter().map(|d| get(d, &mut remap)).collect())
        .collect();
    let pairs = pairs
        .into_iter()
        .map(|(a, b)| (get(a, &mut remap), get(b, &mut remap)))
        .collect();
    let root = root.map(|r| get(r, &mut remap));
    (rotations, pairs, root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_torus_shape() {
        let m = grid_torus(4, 3);
        assert_eq!(m.n_vertices(), 12);
        assert_eq!(m.n_edges(), 36);
        assert!(m.is_triangulation());
        assert!(m.is_essentially_4connected(3).unwrap());
        assert!((0..m.n_vertices()).all(|v| m.degree(v) == 6));
    }

    #[test]
    fn nested_quadrangle_is_essentially_4connected() {
        let m = nested_quadrangle();
        assert_eq!(m.n_vertices(), 8);
        assert!(m.is_triangulation());
        assert!(m.is_essentially_4connected(3).unwrap());
    }

    #[test]
    fn nested_quadrangle_root_edge_sits_in_a_big_quadrangle() {
        let m = nested_quadrangle();
        let patch = crate::map::CoverPatch::new(&m, 3);
        let h0 = m.root().unwrap();
        let (q, incident) = m.maximal_quadrangle_containing(&patch, h0).unwrap();
        assert!(incident);
        assert_eq!(q.interior_faces.len(), 4);
    }
}
