//! Exhaustive micro-census: all essentially 4-connected toroidal
//! triangulations on one or two vertices, generated as rotation systems of
//! the dual cubic map (gluings of 2n labeled triangles) and counted up to
//! orientation-preserving isomorphism, rooted and unrooted.

use std::collections::BTreeSet;

use crate::map::{DartId, ToroidalMap};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusResult {
    pub n: usize,
    /// rooted isomorphism classes (the census analogue of T_h(n))
    pub rooted: usize,
    /// underlying unrooted maps
    pub maps: usize,
}

/// All perfect matchings of 0..count.
fn matchings(count: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut [usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free[0];
        for i in 1..free.len() {
            let b = free[i];
            let mut rest: Vec<usize> = free.to_vec();
            rest.retain(|&x| x != a && x != b);
            cur.push((a, b));
            rec(&mut rest, cur, out);
            cur.pop();
        }
    }
    let mut free: Vec<usize> = (0..count).collect();
    let mut out = Vec::new();
    rec(&mut free, &mut Vec::new(), &mut out);
    out
}

/// The primal triangulation of a cubic rotation system: primal rotations are
/// alpha composed with the dual rotation, so primal vertices are the dual's
/// faces and primal faces are the glued triangles.
fn primal_of_dual(n_darts: usize, sigma_d: &[usize], pairs: &[(usize, usize)]) -> Option<ToroidalMap> {
    let mut alpha = vec![usize::MAX; n_darts];
    for &(a, b) in pairs {
        alpha[a] = b;
        alpha[b] = a;
    }
    let sigma_p: Vec<usize> = (0..n_darts).map(|d| alpha[sigma_d[d]]).collect();
    // orbits of sigma_p are the primal rotations
    let mut seen = vec![false; n_darts];
    let mut rotations = Vec::new();
    for start in 0..n_darts {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut d = start;
        loop {
            seen[d] = true;
            orbit.push(d);
            d = sigma_p[d];
            if d == start {
                break;
            }
        }
        rotations.push(orbit);
    }
    ToroidalMap::from_rotations(rotations, pairs, None).ok()
}

/// Enumerates every toroidal triangulation with 2n faces (n vertices), filters
/// the essentially 4-connected ones, and counts rooted and unrooted classes.
pub fn census(n: usize, window: i64, jobs: usize) -> Result<CensusResult> {
    if n == 0 || n > 2 {
        return Err(Error::SizeGuard(
            "the micro-census is implemented for n = 1 and n = 2".into(),
        ));
    }
    let triangles = 2 * n;
    let n_darts = 3 * triangles;
    // dual rotations: per triangle, one of the two cyclic orders of its sides
    let all_matchings = matchings(n_darts);
    let rotation_choices = 1usize << triangles;
    type CodeSet = BTreeSet<Vec<(usize, usize)>>;
    let shard = |worker: usize| -> (CodeSet, CodeSet) {
        let mut rooted: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
        let mut unrooted: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
        for (mi, pairs) in all_matchings.iter().enumerate() {
            if mi % jobs != worker {
                continue;
            }
            for mask in 0..rotation_choices {
                let mut sigma_d = vec![0usize; n_darts];
                for t in 0..triangles {
                    let base = 3 * t;
                    if mask >> t & 1 == 0 {
                        sigma_d[base] = base + 1;
                        sigma_d[base + 1] = base + 2;
                        sigma_d[base + 2] = base;
                    } else {
                        sigma_d[base] = base + 2;
                        sigma_d[base + 2] = base + 1;
                        sigma_d[base + 1] = base;
                    }
                }
                let map = match primal_of_dual(n_darts, &sigma_d, pairs) {
                    Some(m) if m.n_vertices() == n && m.is_triangulation() => m,
                    _ => continue,
                };
                let code = map.canonical_code();
                if unrooted.contains(&code) {
                    // a known map: all its rooted codes are recorded already
                    continue;
                }
                match map.is_essentially_4connected(window) {
                    Ok(true) => {}
                    _ => continue,
                }
                unrooted.insert(code);
                for d in map.darts() {
                    rooted.insert(map.rooted_code(d));
                }
            }
        }
        (rooted, unrooted)
    };
    let (rooted, unrooted) = if jobs <= 1 {
        shard(0)
    } else {
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs).map(|w| scope.spawn(move || shard(w))).collect();
            handles.into_iter().map(|h| h.join().expect("census worker")).collect()
        });
        let mut rooted = BTreeSet::new();
        let mut unrooted = BTreeSet::new();
        for (r, u) in results {
            rooted.extend(r);
            unrooted.extend(u);
        }
        (rooted, unrooted)
    };
    Ok(CensusResult {
        n,
        rooted: rooted.len(),
        maps: unrooted.len(),
    })
}

/// The distinct essentially 4-connected maps found by the census, one
/// representative per unrooted class.
pub fn census_representatives(n: usize, window: i64) -> Result<Vec<ToroidalMap>> {
    if n == 0 || n > 2 {
        return Err(Error::SizeGuard(
            "the micro-census is implemented for n = 1 and n = 2".into(),
        ));
    }
    let triangles = 2 * n;
    let n_darts = 3 * triangles;
    let mut seen: BTreeSet<Vec<(DartId, DartId)>> = BTreeSet::new();
    let mut out = Vec::new();
    for pairs in matchings(n_darts) {
        for mask in 0..(1usize << triangles) {
            let mut sigma_d = vec![0usize; n_darts];
            for t in 0..triangles {
                let base = 3 * t;
                if mask >> t & 1 == 0 {
                    sigma_d[base] = base + 1;
                    sigma_d[base + 1] = base + 2;
                    sigma_d[base + 2] = base;
                } else {
                    sigma_d[base] = base + 2;
                    sigma_d[base + 2] = base + 1;
                    sigma_d[base + 1] = base;
                }
            }
            let map = match primal_of_dual(n_darts, &sigma_d, &pairs) {
                Some(m) if m.n_vertices() == n && m.is_triangulation() => m,
                _ => continue,
            };
            let code = map.canonical_code();
            if seen.contains(&code) {
                continue;
            }
            if let Ok(true) = map.is_essentially_4connected(window) {
                seen.insert(code);
                out.push(map);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_vertex_census() {
        let r = census(1, 3, 1).unwrap();
        assert_eq!(r.rooted, 1, "T_h(1) = 1");
        assert_eq!(r.maps, 1);
    }

    #[test]
    fn census_guard() {
        assert!(census(3, 3, 1).is_err());
        assert!(census(0, 3, 1).is_err());
    }

    #[test]
    fn representatives_are_valid() {
        for m in census_representatives(1, 3).unwrap() {
            assert!(m.is_essentially_4connected(3).unwrap());
            assert_eq!(m.n_vertices(), 1);
        }
    }
}
