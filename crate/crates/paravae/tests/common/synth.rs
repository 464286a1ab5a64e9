//! A tiny closed-world grammar for the desk-scale experiments: five
//! templates that all share the POS multiset {DT, DT, NN, NN, VB, RB} at
//! length six, so only word ORDER separates them, over interchangeable
//! content words. "Semantics" is the content tuple (two nouns, a verb, an
//! adverb); "syntax" is the template — measurable independently.

use rand::Rng;

pub const NOUNS: [&str; 12] = [
    "dog", "cat", "bird", "fish", "horse", "mouse", "bear", "wolf", "frog", "deer", "owl", "fox",
];
pub const VERBS: [&str; 8] = [
    "sees", "likes", "chases", "finds", "hears", "follows", "greets", "avoids",
];
pub const ADVERBS: [&str; 6] = ["quickly", "quietly", "slowly", "happily", "badly", "gladly"];

pub const NUM_TEMPLATES: usize = 5;

/// POS tag of a word in the closed world.
pub fn pos_of(word: &str) -> Option<&'static str> {
    if word == "the" {
        return Some("DT");
    }
    if NOUNS.contains(&word) {
        return Some("NN");
    }
    if VERBS.contains(&word) {
        return Some("VB");
    }
    if ADVERBS.contains(&word) {
        return Some("RB");
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Content {
    pub n1: usize,
    pub v: usize,
    pub n2: usize,
    pub adv: usize,
}

pub fn sample_content<R: Rng>(rng: &mut R) -> Content {
    let n1 = rng.random_range(0..NOUNS.len());
    let mut n2 = rng.random_range(0..NOUNS.len() - 1);
    if n2 >= n1 {
        n2 += 1;
    }
    Content {
        n1,
        v: rng.random_range(0..VERBS.len()),
        n2,
        adv: rng.random_range(0..ADVERBS.len()),
    }
}

pub fn realize(template: usize, c: Content) -> Vec<String> {
    let n1 = NOUNS[c.n1];
    let n2 = NOUNS[c.n2];
    let v = VERBS[c.v];
    let adv = ADVERBS[c.adv];
    let words: Vec<&str> = match template {
        0 => vec!["the", n1, v, adv, "the", n2],
        1 => vec!["the", n1, adv, v, "the", n2],
        2 => vec![adv, "the", n1, v, "the", n2],
        3 => vec!["the", n1, v, "the", n2, adv],
        4 => vec![v, "the", n1, adv, "the", n2],
        _ => panic!("unknown template {template}"),
    };
    words.into_iter().map(String::from).collect()
}

pub fn template_pos(template: usize) -> Vec<&'static str> {
    match template {
        0 => vec!["DT", "NN", "VB", "RB", "DT", "NN"],
        1 => vec!["DT", "NN", "RB", "VB", "DT", "NN"],
        2 => vec!["RB", "DT", "NN", "VB", "DT", "NN"],
        3 => vec!["DT", "NN", "VB", "DT", "NN", "RB"],
        4 => vec!["VB", "DT", "NN", "RB", "DT", "NN"],
        _ => panic!("unknown template {template}"),
    }
}

/// POS sequence of a sentence; None when any word leaves the closed world.
pub fn pos_seq(words: &[String]) -> Option<Vec<&'static str>> {
    words.iter().map(|w| pos_of(w)).collect()
}

/// Does a generated sentence realize the template's POS sequence exactly?
pub fn matches_template(words: &[String], template: usize) -> bool {
    pos_seq(words).is_some_and(|seq| seq == template_pos(template))
}

/// Two distinct template ids.
pub fn sample_template_pair<R: Rng>(rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..NUM_TEMPLATES);
    let mut b = rng.random_range(0..NUM_TEMPLATES - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Paraphrase-pair TSV lines: same content, two different templates.
pub fn train_pairs_tsv<R: Rng>(n: usize, rng: &mut R) -> String {
    let mut out = String::new();
    for _ in 0..n {
        let c = sample_content(rng);
        let (ta, tb) = sample_template_pair(rng);
        out.push_str(&format!(
            "{}\t{}\n",
            realize(ta, c).join(" "),
            realize(tb, c).join(" ")
        ));
    }
    out
}

/// An eval triple: semantic input carries the content in one template, the
/// syntactic input shows the target template with unrelated content, and the
/// reference realizes the content in the target template.
pub struct Triple {
    pub semantic: Vec<String>,
    pub syntactic: Vec<String>,
    pub reference: Vec<String>,
    pub target_template: usize,
}

pub fn sample_triple<R: Rng>(rng: &mut R) -> Triple {
    let c = sample_content(rng);
    let c_other = sample_content(rng);
    let (ta, tb) = sample_template_pair(rng);
    Triple {
        semantic: realize(ta, c),
        syntactic: realize(tb, c_other),
        reference: realize(tb, c),
        target_template: tb,
    }
}

pub fn triples_tsv(triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            t.semantic.join(" "),
            t.syntactic.join(" "),
            t.reference.join(" ")
        ));
    }
    out
}

/// Tagged corpus ("word_TAG") derived from realized sentences; drives the
/// POS-group noising tables.
pub fn tagged_corpus<R: Rng>(n: usize, rng: &mut R) -> String {
    let mut out = String::new();
    for _ in 0..n {
        let c = sample_content(rng);
        let t = rng.random_range(0..NUM_TEMPLATES);
        let tagged: Vec<String> = realize(t, c)
            .iter()
            .map(|w| format!("{w}_{}", pos_of(w).unwrap()))
            .collect();
        out.push_str(&tagged.join(" "));
        out.push('\n');
    }
    out
}

/// Flat one-level constituency parse over dictionary tags:
/// `(S (DT the) (NN dog) ...)`.
pub fn flat_parse(words: &[String]) -> String {
    let parts: Vec<String> = words
        .iter()
        .map(|w| format!("({} {w})", pos_of(w).unwrap_or("XX")))
        .collect();
    format!("(S {})", parts.join(" "))
}

/// Structured parse of a template realization, with per-template bracketing
/// so that different templates disagree on labeled brackets, not just on
/// preterminal order. `words` must be the aligned realization.
pub fn template_parse(template: usize, words: &[String]) -> String {
    let w = |i: usize| -> String {
        format!("({} {})", pos_of(&words[i]).unwrap(), words[i])
    };
    match template {
        // the n1 v adv the n2
        0 => format!(
            "(S (NP {} {}) (VP {} {} (NP {} {})))",
            w(0), w(1), w(2), w(3), w(4), w(5)
        ),
        // the n1 adv v the n2
        1 => format!(
            "(S (NP {} {}) (ADVP {}) (VP {} (NP {} {})))",
            w(0), w(1), w(2), w(3), w(4), w(5)
        ),
        // adv the n1 v the n2
        2 => format!(
            "(S (ADVP {}) (NP {} {}) (VP {} (NP {} {})))",
            w(0), w(1), w(2), w(3), w(4), w(5)
        ),
        // the n1 v the n2 adv
        3 => format!(
            "(S (NP {} {}) (VP {} (NP {} {})) (ADVP {}))",
            w(0), w(1), w(2), w(3), w(4), w(5)
        ),
        // v the n1 adv the n2
        4 => format!(
            "(S (VP {} (NP {} {}) (ADVP {})) (NP {} {}))",
            w(0), w(1), w(2), w(3), w(4), w(5)
        ),
        _ => panic!("unknown template {template}"),
    }
}

/// Deterministic synthetic "parser": a sentence whose POS sequence matches a
/// known template gets that template's structured parse, anything else the
/// flat parse.
pub fn parse_sentence(words: &[String]) -> String {
    if let Some(seq) = pos_seq(words) {
        for t in 0..NUM_TEMPLATES {
            if seq == template_pos(t) {
                return template_parse(t, words);
            }
        }
    }
    flat_parse(words)
}

/// A similarity pair whose gold score is the fraction of shared content
/// slots (n1, v, n2, adv), templates drawn independently.
pub fn similarity_pair<R: Rng>(rng: &mut R, shared_slots: usize) -> (Vec<String>, Vec<String>, f64) {
    assert!(shared_slots <= 4);
    let c1 = sample_content(rng);
    let mut c2 = sample_content(rng);
    if shared_slots >= 1 {
        c2.n1 = c1.n1;
    } else if c2.n1 == c1.n1 {
        c2.n1 = (c1.n1 + 1) % NOUNS.len();
    }
    if shared_slots >= 2 {
        c2.v = c1.v;
    } else if c2.v == c1.v {
        c2.v = (c1.v + 1) % VERBS.len();
    }
    if shared_slots >= 3 {
        c2.n2 = c1.n2;
    } else if c2.n2 == c1.n2 {
        c2.n2 = (c1.n2 + 1) % NOUNS.len();
    }
    if shared_slots >= 4 {
        c2.adv = c1.adv;
    } else if c2.adv == c1.adv {
        c2.adv = (c1.adv + 1) % ADVERBS.len();
    }
    if c2.n1 == c2.n2 {
        c2.n2 = (c2.n2 + 1) % NOUNS.len();
        if c2.n1 == c2.n2 {
            c2.n2 = (c2.n2 + 1) % NOUNS.len();
        }
    }
    let t1 = rng.random_range(0..NUM_TEMPLATES);
    let t2 = rng.random_range(0..NUM_TEMPLATES);
    (realize(t1, c1), realize(t2, c2), shared_slots as f64 / 4.0)
}
