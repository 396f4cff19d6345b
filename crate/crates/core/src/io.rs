//! JSON file formats. Rationals are always strings; syntax and value errors
//! carry the line and column where the parser stopped.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::json;

use crate::constructors::{GluePiece, GlueSchedule};
use crate::exact::{BitWord, Rational};
use crate::metrics::{FiniteMetricSpace, Provenance, SpectrumSet};
use crate::spectra::{ColoredClique, TriangleSet};
use crate::trees::{BinaryTree, TreeNode, TruncatedTree};

#[derive(Debug)]
pub enum IoError {
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(String),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Read { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Syntax { line, column, message } => write!(f, "line {line}, column {column}: {message}"),
            IoError::Invalid(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for IoError {}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        let full = e.to_string();
        let message = match full.rsplit_once(" at line ") {
            Some((m, _)) => m.to_string(),
            None => full,
        };
        IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

fn invalid(e: impl fmt::Display) -> IoError {
    IoError::Invalid(e.to_string())
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| {
        let data = e.classify() == serde_json::error::Category::Data;
        let mut err = IoError::from(e);
        if data {
            anchor_to_last_token(text, &mut err);
        }
        err
    })
}

/// Value errors are raised after the parser has looked past the offending
/// value; move the position back to its last character.
fn anchor_to_last_token(text: &str, err: &mut IoError) {
    let IoError::Syntax { line, column, .. } = err else {
        return;
    };
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    // the reported column is the look-ahead character itself
    let offset = (start + column.saturating_sub(1)).min(text.len());
    let Some((pos, _)) = text[..offset]
        .char_indices()
        .rev()
        .find(|(_, c)| !c.is_whitespace() && *c != ',')
    else {
        return;
    };
    let before = &text[..pos];
    *line = before.matches('\n').count() + 1;
    *column = pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    points: Vec<String>,
    matrix: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

pub fn parse_space(text: &str) -> Result<FiniteMetricSpace, IoError> {
    let f: SpaceFile = parse(text)?;
    let x = FiniteMetricSpace::from_matrix(f.points, f.matrix).map_err(invalid)?;
    Ok(match f.provenance {
        Some(p) => x.with_provenance(p),
        None => x,
    })
}

pub fn space_to_json(x: &FiniteMetricSpace) -> String {
    pretty(&SpaceFile {
        points: x.labels().to_vec(),
        matrix: x.matrix(),
        provenance: x.provenance().cloned(),
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NodeSpec {
    Pair(BitWord, Vec<u32>),
    Bits(BitWord),
}

#[derive(Deserialize)]
struct TreeFile {
    depth: usize,
    #[serde(default)]
    branching_bound: u32,
    nodes: Vec<NodeSpec>,
}

/// Tree on `2 × ℕ`. Nodes may be `["bits", [b…]]` pairs or bare bit strings
/// (second coordinate all zero); only leaves need be listed, and the zero
/// branch is added.
pub fn parse_tree(text: &str) -> Result<TruncatedTree, IoError> {
    let f: TreeFile = parse(text)?;
    let mut nodes = Vec::with_capacity(f.nodes.len());
    for spec in f.nodes {
        nodes.push(match spec {
            NodeSpec::Pair(s, b) => TreeNode::new(s, b).map_err(invalid)?,
            NodeSpec::Bits(s) => TreeNode::lift(&s),
        });
    }
    TruncatedTree::with_zero_branch(f.branching_bound, f.depth, nodes).map_err(invalid)
}

/// Tree on `2`, in the tree-file layout with bare bit strings. The zero
/// branch is added.
pub fn parse_binary_tree(text: &str) -> Result<BinaryTree, IoError> {
    let f: TreeFile = parse(text)?;
    let mut words = Vec::with_capacity(f.nodes.len());
    for spec in f.nodes {
        match spec {
            NodeSpec::Bits(s) => words.push(s),
            NodeSpec::Pair(s, b) if b.iter().all(|&v| v == 0) => words.push(s),
            NodeSpec::Pair(s, _) => {
                return Err(IoError::Invalid(format!(
                    "node {s} has a nonzero second coordinate; expected a tree on 2"
                )))
            }
        }
    }
    BinaryTree::with_zero_branch(f.depth, words).map_err(invalid)
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    n: usize,
    tuples: Vec<Vec<Rational>>,
}

pub fn parse_spectrum(text: &str) -> Result<SpectrumSet, IoError> {
    let f: SpectrumFile = parse(text)?;
    SpectrumSet::new(f.n, f.tuples).map_err(invalid)
}

pub fn spectrum_to_json(s: &SpectrumSet) -> String {
    pretty(&SpectrumFile {
        n: s.n(),
        tuples: s.tuples().cloned().collect(),
    })
}

/// A triple checked while parsing, so that a bad triple is reported at its
/// own line.
struct MetricTriple([Rational; 3]);

impl<'de> Deserialize<'de> for MetricTriple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let t = <[Rational; 3]>::deserialize(deserializer)?;
        TriangleSet::new([t.clone()]).map_err(serde::de::Error::custom)?;
        Ok(MetricTriple(t))
    }
}

#[derive(Deserialize)]
struct TriangleFile {
    triples: Vec<MetricTriple>,
}

pub fn parse_triangles(text: &str) -> Result<TriangleSet, IoError> {
    let f: TriangleFile = parse(text)?;
    TriangleSet::new(f.triples.into_iter().map(|t| t.0)).map_err(invalid)
}

pub fn triangles_to_json(t: &TriangleSet) -> String {
    pretty(&json!({ "triples": t.triples() }))
}

#[derive(Deserialize)]
struct ValuesFile {
    values: Vec<Rational>,
}

/// `{"values": [...]}` or a bare array of rational strings, in file order.
pub fn parse_values(text: &str) -> Result<Vec<Rational>, IoError> {
    if text.trim_start().starts_with('{') {
        Ok(parse::<ValuesFile>(text)?.values)
    } else {
        parse(text)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PieceSpec {
    Path(PathBuf),
    Inline(serde_json::Value),
}

#[derive(Deserialize)]
struct GlueFile {
    pieces: Vec<PieceSpec>,
    #[serde(default)]
    deltas: Option<Vec<Rational>>,
}

/// `{"pieces": [path-or-space, …], "deltas": [...]?}`. Relative paths are
/// resolved against `base`; without `deltas` the least admissible
/// non-decreasing choice is made.
pub fn parse_glue(text: &str, base: &Path) -> Result<GlueSchedule, IoError> {
    let f: GlueFile = parse(text)?;
    let mut pieces = Vec::with_capacity(f.pieces.len());
    for (n, spec) in f.pieces.into_iter().enumerate() {
        let space = match spec {
            PieceSpec::Path(p) => {
                let path = base.join(p);
                parse_space(&read_text(&path)?).map_err(|e| IoError::Invalid(format!("{}: {e}", path.display())))?
            }
            PieceSpec::Inline(v) => {
                parse_space(&v.to_string()).map_err(|e| IoError::Invalid(format!("piece {}: {e}", n + 1)))?
            }
        };
        pieces.push(GluePiece::from_space(space).map_err(|e| IoError::Invalid(format!("piece {}: {e}", n + 1)))?);
    }
    match f.deltas {
        Some(d) => Ok(GlueSchedule::new(pieces, d)),
        None => GlueSchedule::with_auto_deltas(pieces).map_err(invalid),
    }
}

/// Edge list with colors, plus the derived space.
pub fn witness_to_json(w: &ColoredClique) -> String {
    let edges: Vec<serde_json::Value> = w
        .edges()
        .map(|(i, j, c)| json!([format!("v{i}"), format!("v{j}"), c]))
        .collect();
    let x = w.to_space();
    pretty(&json!({
        "k": w.k(),
        "edges": edges,
        "space": { "points": x.labels(), "matrix": x.matrix() },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{build_discrete_ultrametric, DistanceTarget};
    use crate::exact::rat;

    #[test]
    fn space_round_trip() {
        let a = DistanceTarget::new([rat("1/3"), rat("2")]).unwrap();
        let x = build_discrete_ultrametric(&a).unwrap();
        let text = space_to_json(&x);
        let y = parse_space(&text).unwrap();
        assert_eq!(x.matrix(), y.matrix());
        assert_eq!(x.labels(), y.labels());
        assert_eq!(x.provenance(), y.provenance());
        assert_eq!(text, space_to_json(&y));
    }

    #[test]
    fn bad_rational_is_line_anchored() {
        let text =
            "{\n  \"points\": [\"a\", \"b\"],\n  \"matrix\": [\n    [\"0\", \"1\"],\n    [\"1\", \"x/2\"]\n  ]\n}";
        match parse_space(text) {
            Err(IoError::Syntax { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn non_square_matrix_is_invalid() {
        let text = r#"{"points": ["a", "b"], "matrix": [["0", "1"]]}"#;
        assert!(matches!(parse_space(text), Err(IoError::Invalid(_))));
    }

    #[test]
    fn tree_file_forms() {
        let text = r#"{"depth": 2, "branching_bound": 1, "nodes": [["01", [0, 1]], "10", ["11", [1, 0]]]}"#;
        let t = parse_tree(text).unwrap();
        let leaves: Vec<String> = t.branches().map(TreeNode::label).collect();
        assert_eq!(leaves, ["00:0.0", "01:0.1", "10:0.0", "11:1.0"]);
        let b = parse_binary_tree(r#"{"depth": 2, "nodes": ["01", "10"]}"#).unwrap();
        assert_eq!(b.leaves().count(), 3);
        assert!(parse_binary_tree(text).is_err());
    }

    #[test]
    fn triangle_violation_points_at_the_triple() {
        let text = "{\"triples\": [\n  [\"1\", \"1\", \"1\"],\n  [\"1\", \"1\", \"3\"],\n  [\"2\", \"2\", \"2\"]\n]}";
        match parse_triangles(text) {
            Err(IoError::Syntax { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("triangle inequality"), "{message}");
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
        match parse_triangles("{\"triples\": [\n  [\"1\", \"1\", \"3\"]\n]}") {
            Err(IoError::Syntax { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("triangle inequality"), "{message}");
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn values_forms() {
        assert_eq!(parse_values(r#"["3", "1/2"]"#).unwrap(), vec![rat("3"), rat("1/2")]);
        assert_eq!(parse_values(r#"{"values": ["1/2^3"]}"#).unwrap(), vec![rat("1/8")]);
        assert!(matches!(
            parse_values("[\n\"1\",\n\"-2\"]"),
            Err(IoError::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn spectrum_round_trip() {
        let s = SpectrumSet::new(3, vec![vec![rat("1"), rat("0"), rat("1")]]).unwrap();
        let t = parse_spectrum(&spectrum_to_json(&s)).unwrap();
        assert_eq!(s, t);
    }
}
