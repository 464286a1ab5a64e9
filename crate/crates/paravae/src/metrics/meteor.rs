//! Simplified METEOR: exact-match unigram alignment, recall-weighted F-mean,
//! and the fragmentation penalty. No stemming or synonym stages.

/// Score one candidate/reference pair, in [0, 100].
///
/// Alignment is leftmost maximal matching: each candidate token, in order,
/// pairs with the leftmost unmatched identical reference token. With matches
/// m, chunks ch, P = m/|cand| and R = m/|ref|:
/// score = 100 * F * (1 - 0.5 (ch/m)^3), F = P R / (0.9 P + 0.1 R).
pub fn meteor_simplified(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut ref_used = vec![false; reference.len()];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (ci, tok) in candidate.iter().enumerate() {
        if let Some(rj) = reference
            .iter()
            .enumerate()
            .position(|(j, r)| !ref_used[j] && r == tok)
        {
            ref_used[rj] = true;
            pairs.push((ci, rj));
        }
    }
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    let mut chunks = 1usize;
    for w in pairs.windows(2) {
        let contiguous = w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1;
        if !contiguous {
            chunks += 1;
        }
    }
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let f_mean = p * r / (0.9 * p + 0.1 * r);
    let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
    100.0 * f_mean * (1.0 - penalty)
}
