//! Penn-style bracketed constituency trees.

use super::{MetricsError, Result};

/// Labeled ordered tree. Word tokens are stored as child nodes flagged
/// `is_token`, so a preterminal like `(PRP it)` is a labeled node with one
/// token child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub label: String,
    pub is_token: bool,
    pub children: Vec<ParseTree>,
}

impl ParseTree {
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree { label: label.into(), is_token: false, children }
    }

    pub fn token(text: impl Into<String>) -> Self {
        ParseTree { label: text.into(), is_token: true, children: Vec::new() }
    }

    /// Total node count, tokens included.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn label_node_count(&self) -> usize {
        let own = if self.is_token { 0 } else { 1 };
        own + self.children.iter().map(|c| c.label_node_count()).sum::<usize>()
    }

    pub fn token_count(&self) -> usize {
        let own = if self.is_token { 1 } else { 0 };
        own + self.children.iter().map(|c| c.token_count()).sum::<usize>()
    }

    pub fn render(&self) -> String {
        if self.is_token {
            return self.label.clone();
        }
        if self.children.is_empty() {
            return format!("({})", self.label);
        }
        let kids: Vec<String> = self.children.iter().map(|c| c.render()).collect();
        format!("({} {})", self.label, kids.join(" "))
    }
}

/// Parse one bracketed tree, e.g. `(S (NP (PRP it)) (VP (VBZ works)))`.
pub fn parse_bracketed(text: &str) -> Result<ParseTree> {
    let bytes: Vec<char> = text.chars().collect();
    let mut pos = 0usize;
    skip_ws(&bytes, &mut pos);
    if pos >= bytes.len() {
        return Err(MetricsError::Parse { offset: pos, message: "empty input".into() });
    }
    let tree = parse_node(&bytes, &mut pos)?;
    skip_ws(&bytes, &mut pos);
    if pos < bytes.len() {
        return Err(MetricsError::Parse {
            offset: pos,
            message: format!("trailing input after tree: '{}'", bytes[pos]),
        });
    }
    Ok(tree)
}

fn skip_ws(b: &[char], pos: &mut usize) {
    while *pos < b.len() && b[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_node(b: &[char], pos: &mut usize) -> Result<ParseTree> {
    if b.get(*pos) != Some(&'(') {
        return Err(MetricsError::Parse {
            offset: *pos,
            message: "expected '('".into(),
        });
    }
    let open = *pos;
    *pos += 1;
    skip_ws(b, pos);
    let label = read_atom(b, pos);
    let mut children = Vec::new();
    loop {
        skip_ws(b, pos);
        match b.get(*pos) {
            Some(')') => {
                *pos += 1;
                return Ok(ParseTree { label, is_token: false, children });
            }
            Some('(') => children.push(parse_node(b, pos)?),
            Some(_) => {
                let atom = read_atom(b, pos);
                children.push(ParseTree::token(atom));
            }
            None => {
                return Err(MetricsError::Parse {
                    offset: *pos,
                    message: format!("unbalanced bracket opened at offset {open}"),
                })
            }
        }
    }
}

fn read_atom(b: &[char], pos: &mut usize) -> String {
    let start = *pos;
    while *pos < b.len() && !b[*pos].is_whitespace() && b[*pos] != '(' && b[*pos] != ')' {
        *pos += 1;
    }
    b[start..*pos].iter().collect()
}

/// Remove all word-token leaves; preterminal labels remain as leaves.
pub fn strip_tokens(tree: &ParseTree) -> ParseTree {
    ParseTree {
        label: tree.label.clone(),
        is_token: false,
        children: tree
            .children
            .iter()
            .filter(|c| !c.is_token)
            .map(strip_tokens)
            .collect(),
    }
}

/// Labeled brackets (label, start, end) of all internal nodes, with spans over
/// leaf positions of the tree as given (strip first for the stripped-span
/// convention). `end` is exclusive.
pub fn labeled_brackets(tree: &ParseTree) -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    collect_brackets(tree, &mut 0, &mut out);
    out
}

fn collect_brackets(
    tree: &ParseTree,
    next_leaf: &mut usize,
    out: &mut Vec<(String, usize, usize)>,
) -> (usize, usize) {
    if tree.children.is_empty() {
        let pos = *next_leaf;
        *next_leaf += 1;
        return (pos, pos + 1);
    }
    let mut start = usize::MAX;
    let mut end = 0;
    for c in &tree.children {
        let (s, e) = collect_brackets(c, next_leaf, out);
        start = start.min(s);
        end = end.max(e);
    }
    out.push((tree.label.clone(), start, end));
    (start, end)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_tree() {
        let t = parse_bracketed("(S (NP (PRP it)) (VP (VBZ works)))").unwrap();
        assert_eq!(t.label_node_count(), 5);
        assert_eq!(t.token_count(), 2);
        assert_eq!(t.label, "S");
        assert_eq!(t.children.len(), 2);
        assert_eq!(t.children[0].children[0].children[0].label, "it");
        assert!(t.children[0].children[0].children[0].is_token);
    }

    #[test]
    fn single_node() {
        let t = parse_bracketed("(X)").unwrap();
        assert_eq!(t.label, "X");
        assert!(t.children.is_empty());
        assert_eq!(t.size(), 1);
    }

    #[test]
    fn unbalanced_reports_offset() {
        let err = parse_bracketed("((S").unwrap_err();
        match err {
            MetricsError::Parse { offset, .. } => assert_eq!(offset, 3),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse_bracketed("").is_err());
        assert!(parse_bracketed("   ").is_err());
        assert!(parse_bracketed("(X) junk").is_err());
    }

    #[test]
    fn strip_keeps_preterminals_as_leaves() {
        let t = parse_bracketed("(S (NP (PRP it)) (VP (VBZ works)))").unwrap();
        let s = strip_tokens(&t);
        assert_eq!(s.token_count(), 0);
        assert_eq!(s.label_node_count(), 5);
        let leaves: Vec<&str> = leaf_labels(&s);
        assert_eq!(leaves, vec!["PRP", "VBZ"]);
    }

    fn leaf_labels(t: &ParseTree) -> Vec<&str> {
        if t.children.is_empty() {
            return vec![t.label.as_str()];
        }
        t.children.iter().flat_map(leaf_labels).collect()
    }

    #[test]
    fn strip_is_idempotent() {
        let inputs = [
            "(S (NP (PRP it)) (VP (VBZ works)))",
            "(X)",
            "(A (B c) (D (E f) (G)))",
        ];
        for src in inputs {
            let t = parse_bracketed(src).unwrap();
            let once = strip_tokens(&t);
            let twice = strip_tokens(&once);
            assert_eq!(once, twice);
            assert_eq!(once.label_node_count(), t.label_node_count());
        }
    }

    #[test]
    fn brackets_of_stripped_parse() {
        let t = parse_bracketed("(S (NP (PRP it)) (VP (VBZ works)))").unwrap();
        let s = strip_tokens(&t);
        let mut brackets = labeled_brackets(&s);
        brackets.sort();
        assert_eq!(
            brackets,
            vec![
                ("NP".to_string(), 0, 1),
                ("S".to_string(), 0, 2),
                ("VP".to_string(), 1, 2),
            ]
        );
    }

    #[test]
    fn render_round_trips() {
        let src = "(S (NP (PRP it)) (VP (VBZ works)))";
        let t = parse_bracketed(src).unwrap();
        assert_eq!(t.render(), src);
    }
}
