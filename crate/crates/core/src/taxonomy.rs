//! Rooted-tree taxonomy of concept codes with precomputed structural indices.
//!
//! A [`Taxonomy`] is parsed once from a `child,parent` edge list and is
//! immutable afterwards. Depth, lowest common ancestor, leaf counts and
//! subsumer counts are all resolved against indices built at parse time,
//! so every query is cheap and the taxonomy can be shared freely between
//! threads.

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

/// Errors raised while parsing or querying a taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    /// More than one node has no parent.
    #[error("multiple roots: {}", roots.join(", "))]
    MultipleRoots { roots: Vec<String> },
    /// The edge list contains a cycle; the listed codes lie on it.
    #[error("cycle detected through: {}", codes.join(" -> "))]
    CycleDetected { codes: Vec<String> },
    /// A child is listed with two different parents.
    #[error("duplicate child {code:?} with parents {:?} and {:?}", parents.0, parents.1)]
    DuplicateChild { code: String, parents: (String, String) },
    /// The document holds no edges at all.
    #[error("empty document: no edges found")]
    EmptyDocument,
    /// A line could not be split into a `child,parent` pair.
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    /// A concept code was empty after trimming.
    #[error("empty concept code")]
    EmptyCode,
    /// A queried code is not part of the taxonomy.
    #[error("unknown code: {code}")]
    UnknownCode { code: String },
    /// Several queried codes are not part of the taxonomy.
    #[error("unknown codes: {}", codes.join(", "))]
    UnknownCodes { codes: Vec<String> },
    /// A cached JSON taxonomy did not have the expected shape.
    #[error("invalid taxonomy JSON: {0}")]
    InvalidJson(String),
}

/// Normalized identifier of one taxonomy node, e.g. `C25.0`.
///
/// Whitespace is trimmed on construction; the empty string is rejected.
/// Case is preserved and comparisons are exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptCode(String);

impl ConceptCode {
    pub fn new(raw: &str) -> Result<Self, TaxonomyError> {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(TaxonomyError::EmptyCode);
        }
        Ok(Self(trimmed.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ConceptCode {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Immutable rooted tree of concept codes.
///
/// Node ids are assigned by sorting all codes lexicographically, so two
/// documents describing the same tree parse to identical values no matter
/// how their lines are ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    codes: Vec<ConceptCode>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
    leaf_count_under: Vec<u64>,
    subsumer_count: Vec<u32>,
    root: usize,
    max_depth: u32,
    total_leaves: u64,
}

impl Taxonomy {
    /// Parse a `child,parent` edge-list document.
    ///
    /// One pair per line; `#`-prefixed lines and blank lines are skipped;
    /// LF and CRLF are both accepted. The root is the single code that
    /// never appears on the child side, or the child of a `code,` line
    /// with an empty parent field.
    pub fn parse_edge_list(text: &str) -> Result<Self, TaxonomyError> {
        // child -> parent (None = explicitly declared root)
        let mut parents: HashMap<String, Option<String>> = HashMap::new();
        let mut mentioned: Vec<String> = Vec::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (child_raw, parent_raw) = line.split_once(',').ok_or_else(|| {
                TaxonomyError::MalformedLine {
                    line: line_no,
                    reason: format!("expected `child,parent`, got {line:?}"),
                }
            })?;
            if parent_raw.contains(',') {
                return Err(TaxonomyError::MalformedLine {
                    line: line_no,
                    reason: format!("too many fields in {line:?}"),
                });
            }
            let child = child_raw.trim();
            if child.is_empty() {
                return Err(TaxonomyError::MalformedLine {
                    line: line_no,
                    reason: "empty child code".to_owned(),
                });
            }
            let parent = parent_raw.trim();
            let parent = if parent.is_empty() { None } else { Some(parent.to_owned()) };

            mentioned.push(child.to_owned());
            if let Some(p) = &parent {
                mentioned.push(p.clone());
            }
            match parents.get(child) {
                Some(existing) if *existing != parent => {
                    let shown = |p: &Option<String>| {
                        p.clone().unwrap_or_else(|| "(root)".to_owned())
                    };
                    return Err(TaxonomyError::DuplicateChild {
                        code: child.to_owned(),
                        parents: (shown(existing), shown(&parent)),
                    });
                }
                Some(_) => {} // identical repeated edge
                None => {
                    parents.insert(child.to_owned(), parent);
                }
            }
        }

        if mentioned.is_empty() {
            return Err(TaxonomyError::EmptyDocument);
        }

        Self::build(&parents, &mentioned)
    }

    fn build(
        parents: &HashMap<String, Option<String>>,
        mentioned: &[String],
    ) -> Result<Self, TaxonomyError> {
        let mut codes: Vec<String> = mentioned.to_vec();
        codes.sort();
        codes.dedup();

        // Roots: declared via empty parent, or never listed as a child.
        let mut roots: Vec<&String> = codes
            .iter()
            .filter(|c| matches!(parents.get(*c), None | Some(None)))
            .collect();
        roots.sort();
        let root_code = match roots.as_slice() {
            [] => {
                // Every node has a parent, so following parent links from
                // any node must revisit one: extract that cycle.
                return Err(Self::find_cycle(parents, &codes[0]));
            }
            [r] => (*r).clone(),
            many => {
                return Err(TaxonomyError::MultipleRoots {
                    roots: many.iter().map(|r| (*r).clone()).collect(),
                })
            }
        };

        let index: HashMap<String, usize> = codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        let n = codes.len();
        let root = index[&root_code];

        let mut parent_ids: Vec<Option<usize>> = vec![None; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (child, parent) in parents {
            if let Some(p) = parent {
                let c_id = index[child];
                let p_id = index[p];
                parent_ids[c_id] = Some(p_id);
                children[p_id].push(c_id);
            }
        }
        for ch in &mut children {
            ch.sort_unstable();
        }

        // Breadth-first from the root assigns depths and proves reachability.
        let mut depth = vec![0u32; n];
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([root]);
        visited[root] = true;
        let mut order = Vec::with_capacity(n);
        while let Some(id) = queue.pop_front() {
            order.push(id);
            for &c in &children[id] {
                if !visited[c] {
                    visited[c] = true;
                    depth[c] = depth[id] + 1;
                    queue.push_back(c);
                }
            }
        }
        if order.len() < n {
            let start = (0..n).find(|&i| !visited[i]).expect("unvisited node");
            return Err(Self::find_cycle(parents, &codes[start]));
        }

        let mut leaf_count_under = vec![0u64; n];
        for &id in order.iter().rev() {
            if children[id].is_empty() {
                leaf_count_under[id] = 1;
            } else {
                leaf_count_under[id] = children[id].iter().map(|&c| leaf_count_under[c]).sum();
            }
        }
        let total_leaves = leaf_count_under[root];
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let subsumer_count = depth.iter().map(|&d| d + 1).collect();

        Ok(Self {
            codes: codes.into_iter().map(ConceptCode).collect(),
            index,
            parent: parent_ids,
            children,
            depth,
            leaf_count_under,
            subsumer_count,
            root,
            max_depth,
            total_leaves,
        })
    }

    fn find_cycle(parents: &HashMap<String, Option<String>>, start: &str) -> TaxonomyError {
        let mut seen: Vec<String> = vec![start.to_owned()];
        let mut cur = start.to_owned();
        loop {
            let next = match parents.get(&cur) {
                Some(Some(p)) => p.clone(),
                _ => {
                    // Dead end; the offending region is what we walked.
                    return TaxonomyError::CycleDetected { codes: seen };
                }
            };
            if let Some(pos) = seen.iter().position(|c| *c == next) {
                let mut cycle = seen.split_off(pos);
                cycle.sort();
                return TaxonomyError::CycleDetected { codes: cycle };
            }
            seen.push(next.clone());
            cur = next;
        }
    }

    pub fn node_count(&self) -> usize {
        self.codes.len()
    }

    pub fn total_leaves(&self) -> u64 {
        self.total_leaves
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn root(&self) -> &ConceptCode {
        &self.codes[self.root]
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    /// All codes in lexicographic order.
    pub fn codes(&self) -> impl Iterator<Item = &ConceptCode> {
        self.codes.iter()
    }

    pub(crate) fn id_of(&self, code: &str) -> Result<usize, TaxonomyError> {
        self.index
            .get(code)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownCode { code: code.to_owned() })
    }

    pub(crate) fn depth_by_id(&self, id: usize) -> u32 {
        self.depth[id]
    }

    pub(crate) fn leaf_count_by_id(&self, id: usize) -> u64 {
        self.leaf_count_under[id]
    }

    pub(crate) fn subsumer_count_by_id(&self, id: usize) -> u32 {
        self.subsumer_count[id]
    }

    /// Number of edges from the root to `code`; the root has depth 0.
    pub fn depth(&self, code: &str) -> Result<u32, TaxonomyError> {
        Ok(self.depth[self.id_of(code)?])
    }

    /// Count of leaf descendants; a leaf counts itself.
    pub fn leaf_count_under(&self, code: &str) -> Result<u64, TaxonomyError> {
        Ok(self.leaf_count_under[self.id_of(code)?])
    }

    /// Count of ancestors including the node itself.
    pub fn subsumer_count(&self, code: &str) -> Result<u32, TaxonomyError> {
        Ok(self.subsumer_count[self.id_of(code)?])
    }

    pub(crate) fn lca_by_id(&self, a: usize, b: usize) -> usize {
        let (mut x, mut y) = (a, b);
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].expect("non-root node has a parent");
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].expect("non-root node has a parent");
        }
        while x != y {
            x = self.parent[x].expect("non-root node has a parent");
            y = self.parent[y].expect("non-root node has a parent");
        }
        x
    }

    /// The deepest common ancestor of `a` and `b`; `lca(a, a) = a`.
    pub fn lca(&self, a: &str, b: &str) -> Result<&ConceptCode, TaxonomyError> {
        let id = self.lca_by_id(self.id_of(a)?, self.id_of(b)?);
        Ok(&self.codes[id])
    }

    pub(crate) fn shortest_path_by_id(&self, a: usize, b: usize) -> u32 {
        let l = self.lca_by_id(a, b);
        self.depth[a] + self.depth[b] - 2 * self.depth[l]
    }

    /// Edge count of the unique tree path between `a` and `b`.
    pub fn shortest_path_len(&self, a: &str, b: &str) -> Result<u32, TaxonomyError> {
        Ok(self.shortest_path_by_id(self.id_of(a)?, self.id_of(b)?))
    }

    /// Serialize back to the edge-list format accepted by
    /// [`Taxonomy::parse_edge_list`]. Lines are sorted by child code with
    /// the root declared first, so the output is canonical.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        out.push_str(self.codes[self.root].as_str());
        out.push_str(",\n");
        for (id, code) in self.codes.iter().enumerate() {
            if let Some(p) = self.parent[id] {
                out.push_str(code.as_str());
                out.push(',');
                out.push_str(self.codes[p].as_str());
                out.push('\n');
            }
        }
        out
    }

    /// JSON form for caching: `{"root": ..., "edges": [[child, parent], ...]}`.
    pub fn to_json(&self) -> String {
        let edges: Vec<Value> = self
            .codes
            .iter()
            .enumerate()
            .filter_map(|(id, code)| {
                self.parent[id]
                    .map(|p| json!([code.as_str(), self.codes[p].as_str()]))
            })
            .collect();
        serde_json::to_string_pretty(&json!({
            "root": self.codes[self.root].as_str(),
            "edges": edges,
        }))
        .expect("taxonomy JSON serialization")
    }

    /// Rebuild a taxonomy from its [`Taxonomy::to_json`] form.
    pub fn from_json(text: &str) -> Result<Self, TaxonomyError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| TaxonomyError::InvalidJson(e.to_string()))?;
        let root = value
            .get("root")
            .and_then(Value::as_str)
            .ok_or_else(|| TaxonomyError::InvalidJson("missing root".to_owned()))?;
        let edges = value
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| TaxonomyError::InvalidJson("missing edges".to_owned()))?;

        let mut parents: HashMap<String, Option<String>> = HashMap::new();
        let mut mentioned = vec![root.to_owned()];
        parents.insert(root.to_owned(), None);
        for edge in edges {
            let pair = edge
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| TaxonomyError::InvalidJson("edge is not a pair".to_owned()))?;
            let child = pair[0]
                .as_str()
                .ok_or_else(|| TaxonomyError::InvalidJson("non-string code".to_owned()))?;
            let parent = pair[1]
                .as_str()
                .ok_or_else(|| TaxonomyError::InvalidJson("non-string code".to_owned()))?;
            match parents.get(child) {
                Some(existing) if existing.as_deref() != Some(parent) => {
                    let shown = existing.clone().unwrap_or_else(|| "(root)".to_owned());
                    return Err(TaxonomyError::DuplicateChild {
                        code: child.to_owned(),
                        parents: (shown, parent.to_owned()),
                    });
                }
                Some(_) => {}
                None => {
                    parents.insert(child.to_owned(), Some(parent.to_owned()));
                }
            }
            mentioned.push(child.to_owned());
            mentioned.push(parent.to_owned());
        }
        Self::build(&parents, &mentioned)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Root-to-leaf chain mirroring an ICD-10-GM path down to C25.0.
    pub(crate) const CHAIN: &str = "\
root,
Chapter-II,root
C00-C97,Chapter-II
C00-C75,C00-C97
C15-C26,C00-C75
C25,C15-C26
C25.0,C25
";

    #[test]
    fn parses_chain_with_expected_depths() {
        let tax = Taxonomy::parse_edge_list(CHAIN).unwrap();
        assert_eq!(tax.node_count(), 7);
        assert_eq!(tax.total_leaves(), 1);
        assert_eq!(tax.max_depth(), 6);
        assert_eq!(tax.depth("root").unwrap(), 0);
        assert_eq!(tax.depth("C25.0").unwrap(), 6);
        assert_eq!(tax.depth("C25").unwrap(), 5);
        assert_eq!(tax.root().as_str(), "root");
    }

    #[test]
    fn parses_single_root_line() {
        let tax = Taxonomy::parse_edge_list("root,\n").unwrap();
        assert_eq!(tax.node_count(), 1);
        assert_eq!(tax.depth("root").unwrap(), 0);
        assert_eq!(tax.total_leaves(), 1);
        assert_eq!(tax.max_depth(), 0);
    }

    #[test]
    fn accepts_crlf_comments_and_blank_lines() {
        let text = "# header\r\n\r\nA,root\r\nB,root\r\n  # indented comment\r\nC,A\r\n";
        let tax = Taxonomy::parse_edge_list(text).unwrap();
        assert_eq!(tax.node_count(), 4);
        assert_eq!(tax.depth("C").unwrap(), 2);
    }

    #[test]
    fn trims_field_whitespace() {
        let tax = Taxonomy::parse_edge_list(" A , root \nroot,\n").unwrap();
        assert!(tax.contains("A"));
        assert_eq!(tax.depth("A").unwrap(), 1);
    }

    #[test]
    fn duplicate_identical_edge_is_tolerated() {
        let tax = Taxonomy::parse_edge_list("A,root\nA,root\n").unwrap();
        assert_eq!(tax.node_count(), 2);
    }

    #[test]
    fn rejects_child_with_two_parents() {
        let err = Taxonomy::parse_edge_list("A,root\nB,root\nC,A\nA,B\n").unwrap_err();
        match err {
            TaxonomyError::DuplicateChild { code, .. } => assert_eq!(code, "A"),
            other => panic!("expected DuplicateChild, got {other:?}"),
        }
    }

    #[test]
    fn rejects_multiple_roots() {
        let err = Taxonomy::parse_edge_list("C,A\nD,B\n").unwrap_err();
        match err {
            TaxonomyError::MultipleRoots { roots } => {
                assert_eq!(roots, vec!["A".to_owned(), "B".to_owned()]);
            }
            other => panic!("expected MultipleRoots, got {other:?}"),
        }
    }

    #[test]
    fn rejects_cycles() {
        let err = Taxonomy::parse_edge_list("a,b\nb,a\n").unwrap_err();
        match err {
            TaxonomyError::CycleDetected { codes } => {
                assert_eq!(codes, vec!["a".to_owned(), "b".to_owned()]);
            }
            other => panic!("expected CycleDetected, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unreachable_cycle_beside_valid_tree() {
        let err = Taxonomy::parse_edge_list("A,root\nx,y\ny,x\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::CycleDetected { .. }));
    }

    #[test]
    fn rejects_self_loop() {
        let err = Taxonomy::parse_edge_list("A,A\n").unwrap_err();
        match err {
            TaxonomyError::CycleDetected { codes } => assert_eq!(codes, vec!["A".to_owned()]),
            other => panic!("expected CycleDetected, got {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_document() {
        assert_eq!(
            Taxonomy::parse_edge_list(""),
            Err(TaxonomyError::EmptyDocument)
        );
        assert_eq!(
            Taxonomy::parse_edge_list("# only a comment\n\n"),
            Err(TaxonomyError::EmptyDocument)
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            Taxonomy::parse_edge_list("justonecode\n"),
            Err(TaxonomyError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            Taxonomy::parse_edge_list("a,b,c\n"),
            Err(TaxonomyError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            Taxonomy::parse_edge_list(" ,root\n"),
            Err(TaxonomyError::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn unknown_code_is_reported() {
        let tax = Taxonomy::parse_edge_list(CHAIN).unwrap();
        assert_eq!(
            tax.depth("Z99"),
            Err(TaxonomyError::UnknownCode { code: "Z99".to_owned() })
        );
    }

    #[test]
    fn lca_identity_sibling_and_root_cases() {
        let text = format!("{CHAIN}C25.1,C25\n");
        let tax = Taxonomy::parse_edge_list(&text).unwrap();
        assert_eq!(tax.lca("C25.0", "C25.0").unwrap().as_str(), "C25.0");
        assert_eq!(tax.lca("C25.0", "C25.1").unwrap().as_str(), "C25");
        assert_eq!(tax.lca("C25.0", "root").unwrap().as_str(), "root");
    }

    #[test]
    fn shortest_path_examples() {
        let text = format!("{CHAIN}C25.1,C25\n");
        let tax = Taxonomy::parse_edge_list(&text).unwrap();
        assert_eq!(tax.shortest_path_len("C25.0", "C25.0").unwrap(), 0);
        assert_eq!(tax.shortest_path_len("C25.0", "C25.1").unwrap(), 2);
        assert_eq!(tax.shortest_path_len("C25.0", "root").unwrap(), 6);
    }

    #[test]
    fn leaf_and_subsumer_counts() {
        let text = "root,\nA,root\nB,root\nA1,A\nA2,A\n";
        let tax = Taxonomy::parse_edge_list(text).unwrap();
        assert_eq!(tax.total_leaves(), 3); // A1, A2, B
        assert_eq!(tax.leaf_count_under("A").unwrap(), 2);
        assert_eq!(tax.leaf_count_under("B").unwrap(), 1);
        assert_eq!(tax.leaf_count_under("root").unwrap(), 3);
        assert_eq!(tax.subsumer_count("root").unwrap(), 1);
        assert_eq!(tax.subsumer_count("A1").unwrap(), 3);
    }

    #[test]
    fn edge_list_round_trip_is_identical() {
        // Input deliberately out of order relative to canonical form.
        let text = "C25,C15-C26\nroot,\nC15-C26,root\nC25.0,C25\nC25.1,C25\n";
        let tax = Taxonomy::parse_edge_list(text).unwrap();
        let reparsed = Taxonomy::parse_edge_list(&tax.to_edge_list()).unwrap();
        assert_eq!(tax, reparsed);
    }

    #[test]
    fn json_round_trip_is_identical() {
        let tax = Taxonomy::parse_edge_list(CHAIN).unwrap();
        let reparsed = Taxonomy::from_json(&tax.to_json()).unwrap();
        assert_eq!(tax, reparsed);
    }

    #[test]
    fn concept_code_normalization() {
        assert_eq!(ConceptCode::new("  C25.0 ").unwrap().as_str(), "C25.0");
        assert_eq!(ConceptCode::new("   "), Err(TaxonomyError::EmptyCode));
    }
}
