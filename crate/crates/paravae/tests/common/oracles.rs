//! Brute-force oracles, independent of the implementation paths they check.

use paravae::metrics::ParseTree;
use rand::Rng;

/// Exhaustive edit-mapping tree edit distance for small trees.
///
/// Enumerates every order-isomorphic node mapping (subset pairs of equal size
/// matched in postorder; ancestor relations must agree), scoring renames plus
/// unmapped deletions/insertions. Exponential, fine for <= 6 nodes.
pub fn ted_oracle(t1: &ParseTree, t2: &ParseTree) -> usize {
    let a = flatten(t1);
    let b = flatten(t2);
    let n1 = a.labels.len();
    let n2 = b.labels.len();
    assert!(n1 <= 16 && n2 <= 16, "oracle is exponential; keep trees tiny");
    let mut best = n1 + n2; // empty mapping: delete all, insert all
    for mask1 in 0u32..(1 << n1) {
        let k = mask1.count_ones() as usize;
        let sel1: Vec<usize> = (0..n1).filter(|i| mask1 & (1 << i) != 0).collect();
        'outer: for mask2 in 0u32..(1 << n2) {
            if mask2.count_ones() as usize != k {
                continue;
            }
            let sel2: Vec<usize> = (0..n2).filter(|i| mask2 & (1 << i) != 0).collect();
            // Postorder-sorted pairing is forced; ancestor relations must
            // agree. Only the later postorder node of a pair can be the
            // ancestor, so that is the direction to compare.
            for x in 0..k {
                for y in (x + 1)..k {
                    let anc_a = a.ancestor[sel1[y]][sel1[x]];
                    let anc_b = b.ancestor[sel2[y]][sel2[x]];
                    if anc_a != anc_b {
                        continue 'outer;
                    }
                }
            }
            let renames = (0..k)
                .filter(|&x| a.labels[sel1[x]] != b.labels[sel2[x]])
                .count();
            let cost = renames + (n1 - k) + (n2 - k);
            best = best.min(cost);
        }
    }
    best
}

struct FlatTree {
    labels: Vec<String>,
    /// ancestor[i][j]: node i (postorder index) is a strict ancestor of j.
    ancestor: Vec<Vec<bool>>,
}

fn flatten(t: &ParseTree) -> FlatTree {
    let mut labels = Vec::new();
    let mut starts: Vec<usize> = Vec::new(); // first postorder index inside each subtree
    fn walk(t: &ParseTree, labels: &mut Vec<String>, starts: &mut Vec<usize>) {
        let start = labels.len();
        for c in &t.children {
            walk(c, labels, starts);
        }
        labels.push(t.label.clone());
        starts.push(start);
    }
    walk(t, &mut labels, &mut starts);
    let n = labels.len();
    // In postorder the subtree rooted at i covers exactly [starts[i], i).
    let mut ancestor = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            ancestor[i][j] = starts[i] <= j && j < i;
        }
    }
    FlatTree { labels, ancestor }
}

/// Random labeled tree with at most `max_nodes` nodes.
pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize, labels: &[&str]) -> ParseTree {
    let n = rng.random_range(1..=max_nodes);
    build_random(rng, n, labels)
}

fn build_random<R: Rng>(rng: &mut R, nodes: usize, labels: &[&str]) -> ParseTree {
    let label = labels[rng.random_range(0..labels.len())].to_string();
    let mut remaining = nodes - 1;
    let mut children = Vec::new();
    while remaining > 0 {
        let take = rng.random_range(1..=remaining);
        children.push(build_random(rng, take, labels));
        remaining -= take;
    }
    ParseTree { label, is_token: false, children }
}

/// Recursive edit-script enumeration for sequence edit distance.
pub fn levenshtein_oracle(a: &[String], b: &[String]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let sub = levenshtein_oracle(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
    let del = levenshtein_oracle(&a[1..], b) + 1;
    let ins = levenshtein_oracle(a, &b[1..]) + 1;
    sub.min(del).min(ins)
}
