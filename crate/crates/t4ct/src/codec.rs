//! Binary codec for rooted essentially 4-connected toroidal triangulations:
//! the extended mobile splits at the root into a toroidal part and a tree,
//! the toroidal part is cut along two edges into a second tree, and both
//! trees are emitted as ternary-tree bitstrings plus logarithmic side
//! information.

use crate::angle::AngleMap;
use crate::lattice::minimize;
use crate::map::{CoverPatch, DartId, ToroidalMap};
use crate::mobile::{extract_mobile, inverse_bijection, split_at_root, Mobile};
use crate::transversal::{find_balanced_ts, ts_to_orientation};
use crate::{Error, Result};

/// A plane tree rooted at a leaf whose inner vertices have degree four.
/// `Inner` children are in counterclockwise order after the parent edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TernaryTree {
    Leaf,
    Inner(Box<[TernaryTree; 3]>),
}

impl TernaryTree {
    pub fn inner_count(&self) -> usize {
        match self {
            TernaryTree::Leaf => 0,
            TernaryTree::Inner(c) => 1 + c.iter().map(|t| t.inner_count()).sum::<usize>(),
        }
    }

    /// Walk encoding: a 1 when an inner vertex is first discovered, a 0 per
    /// leaf, with the closing 0 for the root leaf itself. A tree with i inner
    /// vertices yields 3i+2 bits with i ones; the single vertex gives "00".
    pub fn encode_bits(&self) -> Vec<bool> {
        let mut bits = Vec::new();
        fn rec(t: &TernaryTree, bits: &mut Vec<bool>) {
            match t {
                TernaryTree::Leaf => bits.push(false),
                TernaryTree::Inner(c) => {
                    bits.push(true);
                    for child in c.iter() {
                        rec(child, bits);
                    }
                }
            }
        }
        rec(self, &mut bits);
        bits.push(false);
        bits
    }

    /// Inverse of `encode_bits`; rejects malformed words.
    pub fn decode_bits(bits: &[bool]) -> Result<TernaryTree> {
        fn rec(bits: &[bool], pos: &mut usize) -> Result<TernaryTree> {
            match bits.get(*pos) {
                None => Err(Error::Codec("tree word ended early".into())),
                Some(false) => {
                    *pos += 1;
                    Ok(TernaryTree::Leaf)
                }
                Some(true) => {
                    *pos += 1;
                    let a = rec(bits, pos)?;
                    let b = rec(bits, pos)?;
                    let c = rec(bits, pos)?;
                    Ok(TernaryTree::Inner(Box::new([a, b, c])))
                }
            }
        }
        let mut pos = 0;
        let tree = rec(bits, &mut pos)?;
        if bits.get(pos) != Some(&false) {
            return Err(Error::Codec("tree word misses its closing leaf bit".into()));
        }
        if pos + 1 != bits.len() {
            return Err(Error::Codec("tree word has trailing bits".into()));
        }
        Ok(tree)
    }

    /// All ternary trees with exactly `i` inner vertices.
    pub fn enumerate(i: usize) -> Vec<TernaryTree> {
        if i == 0 {
            return vec![TernaryTree::Leaf];
        }
        let mut out = Vec::new();
        for a in 0..i {
            for b in 0..i - a {
                let c = i - 1 - a - b;
                for ta in TernaryTree::enumerate(a) {
                    for tb in TernaryTree::enumerate(b) {
                        for tc in TernaryTree::enumerate(c) {
                            out.push(TernaryTree::Inner(Box::new([
                                ta.clone(),
                                tb.clone(),
                                tc.clone(),
                            ])));
                        }
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Code words
// ---------------------------------------------------------------------------

/// The encoded form: side information plus two ternary-tree bitstrings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeWord {
    /// Inner vertices of the tree part hanging at the root half-edge.
    pub k: usize,
    /// Leaf index (in T1 walk order) of the stem paired with T1's root stem.
    pub e1_partner: usize,
    /// Leaf indices of the two stems forming the second cut edge.
    pub e2_first: usize,
    pub e2_second: usize,
    /// Corner index (in T1 walk order) where the root half-edge attaches.
    pub root_attach: usize,
    pub tree1_bits: Vec<bool>,
    pub tree2_bits: Vec<bool>,
}

fn push_int(bits: &mut Vec<bool>, v: usize) {
    let len = usize::BITS - v.leading_zeros();
    assert!(len < 64, "side info field too large");
    for i in (0..6).rev() {
        bits.push(len >> i & 1 == 1);
    }
    for i in (0..len).rev() {
        bits.push(v >> i & 1 == 1);
    }
}

fn read_int(bits: &[bool], pos: &mut usize) -> Result<usize> {
    if *pos + 6 > bits.len() {
        return Err(Error::Codec("side info ended early".into()));
    }
    let mut len = 0usize;
    for _ in 0..6 {
        len = len << 1 | bits[*pos] as usize;
        *pos += 1;
    }
    if *pos + len > bits.len() {
        return Err(Error::Codec("side info value ended early".into()));
    }
    let mut v = 0usize;
    for _ in 0..len {
        v = v << 1 | bits[*pos] as usize;
        *pos += 1;
    }
    Ok(v)
}

impl CodeWord {
    pub fn side_info_bit_len(&self) -> usize {
        self.to_bits().len() - self.tree1_bits.len() - self.tree2_bits.len()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = Vec::new();
        push_int(&mut bits, self.k);
        push_int(&mut bits, self.e1_partner);
        push_int(&mut bits, self.e2_first);
        push_int(&mut bits, self.e2_second);
        push_int(&mut bits, self.root_attach);
        bits.extend_from_slice(&self.tree1_bits);
        bits.extend_from_slice(&self.tree2_bits);
        bits
    }

    pub fn from_bits(bits: &[bool]) -> Result<CodeWord> {
        let mut pos = 0usize;
        let k = read_int(bits, &mut pos)?;
        let e1_partner = read_int(bits, &mut pos)?;
        let e2_first = read_int(bits, &mut pos)?;
        let e2_second = read_int(bits, &mut pos)?;
        let root_attach = read_int(bits, &mut pos)?;
        // tree words are self-delimiting: descend, then expect the closing 0
        let tree_end = |bits: &[bool], start: usize| -> Result<usize> {
            let mut open = 1i64; // pending subtrees
            let mut i = start;
            loop {
                match bits.get(i) {
                    None => return Err(Error::Codec("truncated tree word".into())),
                    Some(true) => open += 2,
                    Some(false) => open -= 1,
                }
                i += 1;
                if open == 0 {
                    // closing root-leaf bit
                    match bits.get(i) {
                        Some(false) => return Ok(i + 1),
                        _ => return Err(Error::Codec("tree word misses closing bit".into())),
                    }
                }
            }
        };
        let t1_end = tree_end(bits, pos)?;
        let tree1_bits = bits[pos..t1_end].to_vec();
        let t2_end = tree_end(bits, t1_end)?;
        let tree2_bits = bits[t1_end..t2_end].to_vec();
        if t2_end != bits.len() {
            return Err(Error::Codec("trailing bits after the code word".into()));
        }
        Ok(CodeWord {
            k,
            e1_partner,
            e2_first,
            e2_second,
            root_attach,
            tree1_bits,
            tree2_bits,
        })
    }

    /// File form: 4-byte magic, the bit count, and the hex dump of the bits
    /// packed most-significant-first.
    pub fn to_file(&self) -> String {
        let bits = self.to_bits();
        let mut bytes = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
        format!("T4CT {}\n{}\n", bits.len(), hex)
    }

    pub fn from_file(text: &str) -> Result<CodeWord> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Codec("empty file".into()))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("T4CT") {
            return Err(Error::Codec("missing T4CT magic".into()));
        }
        let nbits: usize = toks
            .next()
            .ok_or_else(|| Error::Codec("missing bit count".into()))?
            .parse()
            .map_err(|_| Error::Codec("bad bit count".into()))?;
        let hex = lines
            .next()
            .ok_or_else(|| Error::Codec("missing hex payload".into()))?
            .trim();
        if hex.len() % 2 != 0 || hex.len() / 2 != nbits.div_ceil(8) {
            return Err(Error::Codec("hex payload has the wrong length".into()));
        }
        let mut bytes = Vec::with_capacity(hex.len() / 2);
        for i in (0..hex.len()).step_by(2) {
            let b = u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| Error::Codec("bad hex digit".into()))?;
            bytes.push(b);
        }
        let bits: Vec<bool> = (0..nbits).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect();
        CodeWord::from_bits(&bits)
    }
}

// ---------------------------------------------------------------------------
// The walk order of a cut mobile
// ---------------------------------------------------------------------------

/// Canonical traversal of an acyclic mobile (a tree with stems) from a root
/// stem: records leaves and corners in walk order, matching the ternary-tree
/// bit order.
struct TreeWalk {
    /// stems in discovery order, the root stem excluded
    leaves: Vec<DartId>,
    /// corners (x, sigma(x)) in discovery order
    corners: Vec<(DartId, DartId)>,
    tree: TernaryTree,
}

fn walk_tree(m: &Mobile, root_stem: DartId) -> TreeWalk {
    let mut leaves = Vec::new();
    let mut corners = Vec::new();
    fn subtree(
        m: &Mobile,
        item: DartId,
        leaves: &mut Vec<DartId>,
        corners: &mut Vec<(DartId, DartId)>,
    ) -> TernaryTree {
        match m.alpha[item] {
            None => {
                leaves.push(item);
                TernaryTree::Leaf
            }
            Some(back) => {
                let mut children = Vec::with_capacity(3);
                let mut x = m.sigma(back);
                let mut prev = back;
                while x != back {
                    corners.push((prev, x));
                    children.push(subtree(m, x, leaves, corners));
                    prev = x;
                    x = m.sigma(x);
                }
                corners.push((prev, back));
                assert_eq!(children.len(), 3, "inner vertices have degree four");
                TernaryTree::Inner(Box::new([
                    children[0].clone(),
                    children[1].clone(),
                    children[2].clone(),
                ]))
            }
        }
    }
    // the root stem behaves like the back edge of a virtual parent
    let mut children = Vec::with_capacity(3);
    let mut prev = root_stem;
    let mut x = m.sigma(root_stem);
    while x != root_stem {
        corners.push((prev, x));
        children.push(subtree(m, x, &mut leaves, &mut corners));
        prev = x;
        x = m.sigma(x);
    }
    corners.push((prev, root_stem));
    assert_eq!(children.len(), 3);
    let tree = TernaryTree::Inner(Box::new([
        children[0].clone(),
        children[1].clone(),
        children[2].clone(),
    ]));
    TreeWalk {
        leaves,
        corners,
        tree,
    }
}

/// Rebuilds the cut mobile of a ternary tree, with darts created in the same
/// walk order as `walk_tree` so that leaf and corner indices agree.
fn mobile_from_tree(tree: &TernaryTree) -> (Mobile, DartId) {
    let mut rotations: Vec<Vec<usize>> = Vec::new();
    let mut alpha: Vec<Option<usize>> = Vec::new();
    let new_dart = |alpha: &mut Vec<Option<usize>>| -> usize {
        alpha.push(None);
        alpha.len() - 1
    };
    fn build(
        t: &TernaryTree,
        parent_dart: usize,
        rotations: &mut Vec<Vec<usize>>,
        alpha: &mut Vec<Option<usize>>,
    ) {
        match t {
            TernaryTree::Leaf => {}
            TernaryTree::Inner(children) => {
                let back = alpha.len();
                alpha.push(None);
                alpha[back] = Some(parent_dart);
                alpha[parent_dart] = Some(back);
                let mut rot = vec![back];
                let mut child_darts = Vec::new();
                for _ in 0..3 {
                    let cd = alpha.len();
                    alpha.push(None);
                    rot.push(cd);
                    child_darts.push(cd);
                }
                rotations.push(rot);
                for (child, cd) in children.iter().zip(child_darts) {
                    build(child, cd, rotations, alpha);
                }
            }
        }
    }
    let root_stem = new_dart(&mut alpha);
    match tree {
        TernaryTree::Leaf => {
            // a single root leaf has no inner vertex to host the stem
            rotations.push(vec![root_stem]);
        }
        TernaryTree::Inner(children) => {
            let mut rot = vec![root_stem];
            let mut child_darts = Vec::new();
            for _ in 0..3 {
                let cd = new_dart(&mut alpha);
                rot.push(cd);
                child_darts.push(cd);
            }
            rotations.push(rot);
            for (child, cd) in children.iter().zip(child_darts) {
                build(child, cd, &mut rotations, &mut alpha);
            }
        }
    }
    let m = Mobile::new(rotations, alpha, None).expect("tree mobiles are valid");
    (m, root_stem)
}

// ---------------------------------------------------------------------------
// encode / decode
// ---------------------------------------------------------------------------

/// Encodes a rooted essentially 4-connected toroidal triangulation. The root
/// half-edge must be interior-incident to its maximal quadrangle.
pub fn encode(g: &ToroidalMap, h0: DartId, window: i64) -> Result<CodeWord> {
    // canonical relabeling makes the emitted bits depend only on the
    // isomorphism class of (g, h0), so decoding and re-encoding is exact
    let g = g.canonical_rooted(h0);
    let h0 = 0;
    let patch = CoverPatch::new(&g, window);
    let (_, incident) = g.maximal_quadrangle_containing(&patch, h0)?;
    if !incident {
        return Err(Error::Precondition(
            "the root half-edge is not interior-incident to its maximal quadrangle".into(),
        ));
    }
    let ts = find_balanced_ts(&g, window)?;
    let a = AngleMap::new(&g)?;
    let basis = g.homology_basis();
    let o = ts_to_orientation(&a, &ts)?;
    let root_face = a.face_of_g_edge(h0);
    let dmin = minimize(&a, &basis, &o, root_face)?.result;
    let ex = extract_mobile(&g, &dmin, h0)?;
    encode_mobile(&ex.mobile)
}

/// Encodes an extended mobile directly.
pub fn encode_mobile(m: &Mobile) -> Result<CodeWord> {
    m.check_rooted_structure()?;
    let (g1, attach_after, t2) = split_at_root(m)?;
    let k = t2.inner_count();
    // BFS spanning forest over full edges from the attachment vertex; the two
    // non-tree edges get cut
    let v0 = g1.vertex_of[attach_after];
    let mut visited = vec![false; g1.n_vertices()];
    let mut in_tree = vec![false; g1.n_darts()];
    visited[v0] = true;
    let mut queue = std::collections::VecDeque::from([v0]);
    while let Some(v) = queue.pop_front() {
        for &d in &g1.rotations[v] {
            if let Some(a) = g1.alpha[d] {
                let w = g1.vertex_of[a];
                if !visited[w] {
                    visited[w] = true;
                    in_tree[d] = true;
                    in_tree[a] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut cut_edges: Vec<(DartId, DartId)> = (0..g1.n_darts())
        .filter_map(|d| match g1.alpha[d] {
            Some(a) if d < a && !in_tree[d] => Some((d, a)),
            _ => None,
        })
        .collect();
    cut_edges.sort();
    if cut_edges.len() != 2 {
        return Err(Error::Internal(format!(
            "expected 2 non-tree edges in the toroidal part, found {}",
            cut_edges.len()
        )));
    }
    let (e1, e2) = (cut_edges[0], cut_edges[1]);
    // cut both edges into stems
    let mut cut = g1.clone();
    for &(d, a) in &[e1, e2] {
        cut.alpha[d] = None;
        cut.alpha[a] = None;
    }
    let walk = walk_tree(&cut, e1.0);
    let leaf_index = |d: DartId| -> Result<usize> {
        walk.leaves
            .iter()
            .position(|&x| x == d)
            .ok_or_else(|| Error::Internal("special stem not found in the walk".into()))
    };
    let corner_index = walk
        .corners
        .iter()
        .position(|&(x, _)| x == attach_after)
        .ok_or_else(|| Error::Internal("attachment corner not found in the walk".into()))?;
    let code = CodeWord {
        k,
        e1_partner: leaf_index(e1.1)?,
        e2_first: leaf_index(e2.0)?,
        e2_second: leaf_index(e2.1)?,
        root_attach: corner_index,
        tree1_bits: walk.tree.encode_bits(),
        tree2_bits: t2.encode_bits(),
    };
    Ok(code)
}

/// Decodes a code word back to the rooted triangulation (in canonical rooted
/// labeling), re-running the full closure and minimality checks.
pub fn decode(code: &CodeWord, window: i64) -> Result<(ToroidalMap, DartId)> {
    let m = decode_mobile(code)?;
    let (g, h0) = inverse_bijection(&m, window)?;
    Ok((g.canonical_rooted(h0), 0))
}

/// Rebuilds the extended mobile of a code word.
pub fn decode_mobile(code: &CodeWord) -> Result<Mobile> {
    let t1 = TernaryTree::decode_bits(&code.tree1_bits)?;
    let t2 = TernaryTree::decode_bits(&code.tree2_bits)?;
    if t2.inner_count() != code.k {
        return Err(Error::Codec("tree part size disagrees with k".into()));
    }
    if matches!(t1, TernaryTree::Leaf) {
        return Err(Error::Codec("toroidal part cannot be a bare leaf".into()));
    }
    let (mut cut, root_stem) = mobile_from_tree(&t1);
    let walk = walk_tree(&cut, root_stem);
    let leaf_at = |i: usize| -> Result<DartId> {
        walk.leaves
            .get(i)
            .copied()
            .ok_or_else(|| Error::Codec(format!("leaf index {i} out of range")))
    };
    let e1b = leaf_at(code.e1_partner)?;
    let e2a = leaf_at(code.e2_first)?;
    let e2b = leaf_at(code.e2_second)?;
    if e1b == e2a || e1b == e2b || e2a == e2b {
        return Err(Error::Codec("special stems collide".into()));
    }
    // reattach the special stems
    cut.alpha[root_stem] = Some(e1b);
    cut.alpha[e1b] = Some(root_stem);
    cut.alpha[e2a] = Some(e2b);
    cut.alpha[e2b] = Some(e2a);
    let g1 = Mobile::new(cut.rotations.clone(), cut.alpha.clone(), None)?;
    // insert the root half-edge, carrying the tree part, at the recorded corner
    let &(x, _) = walk
        .corners
        .get(code.root_attach)
        .ok_or_else(|| Error::Codec("root attachment corner out of range".into()))?;
    let mut rotations = g1.rotations.clone();
    let mut alpha = g1.alpha.clone();
    let h0 = alpha.len();
    alpha.push(None);
    let v0 = g1.vertex_of[x];
    let pos = rotations[v0].iter().position(|&d| d == x).unwrap();
    rotations[v0].insert(pos + 1, h0);
    // hang the tree part behind h0
    fn attach(
        t: &TernaryTree,
        parent_dart: usize,
        rotations: &mut Vec<Vec<usize>>,
        alpha: &mut Vec<Option<usize>>,
    ) {
        if let TernaryTree::Inner(children) = t {
            let back = alpha.len();
            alpha.push(None);
            alpha[back] = Some(parent_dart);
            alpha[parent_dart] = Some(back);
            let mut rot = vec![back];
            let mut child_darts = Vec::new();
            for _ in 0..3 {
                let cd = alpha.len();
                alpha.push(None);
                rot.push(cd);
                child_darts.push(cd);
            }
            rotations.push(rot);
            for (child, cd) in children.iter().zip(child_darts) {
                attach(child, cd, rotations, alpha);
            }
        }
    }
    attach(&t2, h0, &mut rotations, &mut alpha);
    let m = Mobile::new(rotations, alpha, Some(h0))?;
    m.check_rooted_structure()?;
    Ok(m)
}

/// Total payload length in bits: side info + both tree words.
pub fn code_len(code: &CodeWord) -> usize {
    code.to_bits().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn tree_count_matches_ternary_numbers() {
        let counts: Vec<usize> = (0..=5).map(|i| TernaryTree::enumerate(i).len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 12, 55, 273]);
    }

    #[test]
    fn golden_tree_words() {
        assert_eq!(TernaryTree::Leaf.encode_bits(), vec![false, false]);
        let one = TernaryTree::Inner(Box::new([
            TernaryTree::Leaf,
            TernaryTree::Leaf,
            TernaryTree::Leaf,
        ]));
        assert_eq!(
            one.encode_bits(),
            vec![true, false, false, false, false],
            "the unique 1-inner-vertex tree encodes as 10000"
        );
    }

    #[test]
    fn tree_codec_roundtrip_exhaustive() {
        let mut total = 0usize;
        for i in 0..=5 {
            for t in TernaryTree::enumerate(i) {
                let bits = t.encode_bits();
                assert_eq!(bits.len(), 3 * i + 2);
                assert_eq!(bits.iter().filter(|&&b| b).count(), i);
                assert_eq!(TernaryTree::decode_bits(&bits).unwrap(), t);
                total += 1;
            }
        }
        assert_eq!(total, 345);
    }

    #[test]
    fn tree_word_prefixes_are_ballot_like() {
        for i in 0..=5 {
            for t in TernaryTree::enumerate(i) {
                let bits = t.encode_bits();
                let mut zeros = 0i64;
                let mut ones = 0i64;
                for (j, &b) in bits.iter().enumerate() {
                    if b {
                        ones += 1;
                    } else {
                        zeros += 1;
                    }
                    if j + 1 < bits.len() {
                        assert!(zeros <= 2 * ones + 1);
                    }
                }
                assert_eq!(zeros, 2 * ones + 2);
            }
        }
    }

    #[test]
    fn truncated_words_error() {
        let one = TernaryTree::Inner(Box::new([
            TernaryTree::Leaf,
            TernaryTree::Leaf,
            TernaryTree::Leaf,
        ]));
        let bits = one.encode_bits();
        for cut in 0..bits.len() {
            assert!(TernaryTree::decode_bits(&bits[..cut]).is_err());
        }
    }

    #[test]
    fn k7_code_roundtrip_and_lengths() {
        let g = fixtures::k7();
        let h0 = 0;
        let code = encode(&g, h0, 3).unwrap();
        let n = 7;
        let k = code.k;
        assert_eq!(code.tree1_bits.len(), 3 * (n - k) + 2);
        assert_eq!(code.tree2_bits.len(), 3 * k + 2);
        assert_eq!(code.tree1_bits.len() + code.tree2_bits.len(), 3 * n + 4);
        let (g2, h2) = decode(&code, 3).unwrap();
        assert_eq!(g2.rooted_code(h2), g.rooted_code(h0));
        // bit-exact re-encode
        let code2 = encode(&g2, h2, 3).unwrap();
        assert_eq!(code2.to_bits(), code.to_bits());
    }

    #[test]
    fn corpus_roundtrip() {
        for (g, h0) in [
            (fixtures::one_vertex(), 0),
            (fixtures::two_vertex(), 0),
            (
                fixtures::nested_quadrangle(),
                fixtures::nested_quadrangle().root().unwrap(),
            ),
        ] {
            let code = encode(&g, h0, 3).unwrap();
            let (g2, h2) = decode(&code, 3).unwrap();
            assert_eq!(g2.rooted_code(h2), g.rooted_code(h0));
            let n = g.n_vertices();
            assert_eq!(
                code.tree1_bits.len() + code.tree2_bits.len(),
                3 * n + 4,
                "tree payload is 3n+4 bits"
            );
            let side = code.side_info_bit_len();
            let bound = 8 * (usize::BITS - (n + 2).leading_zeros()) as usize + 64;
            assert!(side <= bound, "side info {side} exceeds {bound}");
        }
    }

    #[test]
    fn file_roundtrip_is_bit_exact() {
        let g = fixtures::k7();
        let code = encode(&g, 0, 3).unwrap();
        let text = code.to_file();
        assert!(text.starts_with("T4CT "));
        let parsed = CodeWord::from_file(&text).unwrap();
        assert_eq!(parsed, code);
        assert_eq!(parsed.to_file(), text);
    }

    #[test]
    fn truncated_file_errors() {
        let g = fixtures::k7();
        let code = encode(&g, 0, 3).unwrap();
        let text = code.to_file();
        let lines: Vec<&str> = text.lines().collect();
        let truncated = format!("{}\n{}\n", lines[0], &lines[1][..lines[1].len() - 2]);
        assert!(CodeWord::from_file(&truncated).is_err());
        assert!(CodeWord::from_file("T4CT\n").is_err());
        assert!(CodeWord::from_file("").is_err());
    }

    #[test]
    fn nested_quadrangle_has_tree_part() {
        let g = fixtures::nested_quadrangle();
        let h0 = g.root().unwrap();
        let code = encode(&g, h0, 3).unwrap();
        assert!(code.k > 0, "the nested instance hangs a tree at the root");
    }

    proptest! {
        #[test]
        fn random_bitstrings_never_panic(bits in proptest::collection::vec(any::<bool>(), 0..64)) {
            let _ = TernaryTree::decode_bits(&bits);
            let _ = CodeWord::from_bits(&bits);
        }

        #[test]
        fn codeword_bits_roundtrip(k in 0usize..5, a in 0usize..40, b in 0usize..40,
                                   c in 0usize..40, r in 0usize..60) {
            let t1 = TernaryTree::Inner(Box::new([
                TernaryTree::Leaf,
                TernaryTree::Leaf,
                TernaryTree::Leaf,
            ]));
            let code = CodeWord {
                k,
                e1_partner: a,
                e2_first: b,
                e2_second: c,
                root_attach: r,
                tree1_bits: t1.encode_bits(),
                tree2_bits: TernaryTree::Leaf.encode_bits(),
            };
            let bits = code.to_bits();
            prop_assert_eq!(CodeWord::from_bits(&bits).unwrap(), code);
        }
    }
}
