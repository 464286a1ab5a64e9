//! Ordered-tree edit distance (Zhang & Shasha style dynamic program) and the
//! ST corpus metric built on it.

use super::parse::{parse_bracketed, strip_tokens, ParseTree};
use super::{MetricsError, Result};

const DELETE: usize = 1;
const INSERT: usize = 1;

fn rename_cost(a: &str, b: &str) -> usize {
    usize::from(a != b)
}

/// Postorder arrays for the edit-distance DP: labels in postorder (1-indexed
/// via offset) and l[i] = postorder index of the leftmost leaf under node i.
struct PostOrder {
    labels: Vec<String>,
    l: Vec<usize>,
    keyroots: Vec<usize>,
}

impl PostOrder {
    fn build(tree: &ParseTree) -> Self {
        let mut labels = Vec::new();
        let mut l = Vec::new();
        fn walk(t: &ParseTree, labels: &mut Vec<String>, l: &mut Vec<usize>) -> usize {
            let mut leftmost = 0usize;
            for (idx, c) in t.children.iter().enumerate() {
                let cl = walk(c, labels, l);
                if idx == 0 {
                    leftmost = cl;
                }
            }
            labels.push(t.label.clone());
            l.push(if t.children.is_empty() { labels.len() } else { leftmost });
            if t.children.is_empty() {
                labels.len()
            } else {
                leftmost
            }
        }
        walk(tree, &mut labels, &mut l);
        let n = l.len();
        let mut keyroots = Vec::new();
        for i in 1..=n {
            if (i + 1..=n).all(|j| l[j - 1] != l[i - 1]) {
                keyroots.push(i);
            }
        }
        PostOrder { labels, l, keyroots }
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

/// Edit distance between two labeled ordered trees with unit insert/delete
/// costs and rename cost 1 for unequal labels.
pub fn tree_edit_distance(t1: &ParseTree, t2: &ParseTree) -> usize {
    let a = PostOrder::build(t1);
    let b = PostOrder::build(t2);
    let (n, m) = (a.len(), b.len());
    let mut td = vec![vec![0usize; m + 1]; n + 1];

    for &i in &a.keyroots {
        for &j in &b.keyroots {
            tree_dist(&a, &b, i, j, &mut td);
        }
    }
    td[n][m]
}

fn tree_dist(a: &PostOrder, b: &PostOrder, i: usize, j: usize, td: &mut [Vec<usize>]) {
    let li = a.l[i - 1];
    let lj = b.l[j - 1];
    let rows = i - li + 2;
    let cols = j - lj + 2;
    let mut fd = vec![vec![0usize; cols]; rows];
    for di in 1..rows {
        fd[di][0] = fd[di - 1][0] + DELETE;
    }
    for dj in 1..cols {
        fd[0][dj] = fd[0][dj - 1] + INSERT;
    }
    for i1 in li..=i {
        let di = i1 - li + 1;
        for j1 in lj..=j {
            let dj = j1 - lj + 1;
            if a.l[i1 - 1] == li && b.l[j1 - 1] == lj {
                let cost = rename_cost(&a.labels[i1 - 1], &b.labels[j1 - 1]);
                fd[di][dj] = (fd[di - 1][dj] + DELETE)
                    .min(fd[di][dj - 1] + INSERT)
                    .min(fd[di - 1][dj - 1] + cost);
                td[i1][j1] = fd[di][dj];
            } else {
                let fi = a.l[i1 - 1] - li;
                let fj = b.l[j1 - 1] - lj;
                fd[di][dj] = (fd[di - 1][dj] + DELETE)
                    .min(fd[di][dj - 1] + INSERT)
                    .min(fd[fi][fj] + td[i1][j1]);
            }
        }
    }
}

/// Mean tree edit distance between token-stripped parses of aligned output
/// and reference files. Lower is a closer syntactic match.
pub fn st_score(outputs: &[String], references: &[String]) -> Result<f64> {
    if outputs.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            left: outputs.len(),
            right: references.len(),
        });
    }
    if outputs.is_empty() {
        return Ok(0.0);
    }
    let pairs: Vec<(usize, &String, &String)> = outputs
        .iter()
        .zip(references.iter())
        .enumerate()
        .map(|(i, (a, b))| (i, a, b))
        .collect();
    let distances = crate::parallel::try_map(&pairs, |(line, out, reference)| {
        let parse_side = |text: &str| {
            parse_bracketed(text).map_err(|e| MetricsError::ParseLine {
                line: line + 1,
                source: Box::new(e),
            })
        };
        let to = strip_tokens(&parse_side(out)?);
        let tr = strip_tokens(&parse_side(reference)?);
        Ok::<f64, MetricsError>(tree_edit_distance(&to, &tr) as f64)
    })?;
    Ok(distances.iter().sum::<f64>() / distances.len() as f64)
}
