//! Finite metric spaces with prescribed distance sets.
//!
//! * [`build_discrete_ultrametric`]: pairs `x_i, y_i` at distance `a_i`,
//!   everything else at `max(a, a_i, a_j)`.
//! * [`build_cantor_ultrametric`]: binary words of a fixed length, at
//!   distance `d_n` where `n` is the first index where they differ.
//! * [`build_tree_space`]: branches of a truncated tree on `2 × ℕ` under
//!   the three-case metric keyed to their maximal mutual predecessor.
//! * [`build_compact_tree_space`]: the same on a tree on `2`, lifted with
//!   all-zero second coordinates.
//! * [`glue_spaces`]: disjoint union of pieces, with cross distances taken
//!   from a non-decreasing schedule.
//!
//! Every builder re-verifies the metric axioms on its output and reports a
//! [`ConstructError::MetricViolation`] if they fail.

use std::collections::BTreeSet;

use serde_json::json;
use thiserror::Error;

use crate::exact::{pi_of_word, two_pow_neg, BitWord, Dyadic, Rational};
use crate::metrics::{distance_set, is_metric, Construction, FiniteMetricSpace, Provenance, Verdict};
use crate::trees::{
    make_choices, mutual_predecessor, project_first, BinaryTree, ChoiceData, TreeError, TreeNode, TruncatedTree,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleViolation {
    #[error("δ_{piece} = {delta} is not an element of A_{piece}")]
    NotInTarget { piece: usize, delta: Rational },
    #[error("δ_{piece} = {delta} is below half of sup A_{piece} = {sup}")]
    BelowHalfSup {
        piece: usize,
        delta: Rational,
        sup: Rational,
    },
    #[error("δ_{piece} = {delta} is smaller than the previous δ = {prev_delta}")]
    Decreasing {
        piece: usize,
        delta: Rational,
        prev_delta: Rational,
    },
    #[error("piece {piece} realizes distance {value} outside its target")]
    PieceOutsideTarget { piece: usize, value: Rational },
    #[error("{pieces} pieces but {deltas} deltas")]
    LengthMismatch { pieces: usize, deltas: usize },
    #[error("no δ_{piece} in A_{piece} satisfies the schedule conditions")]
    NoAdmissibleDelta { piece: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("distance target is empty")]
    EmptyTarget,
    #[error("distance target contains the non-positive value {0}")]
    NonPositiveTarget(Rational),
    #[error("distance sequence is not strictly decreasing at index {index}")]
    NotStrictlyDecreasing { index: usize },
    #[error("depth {needed} needs {needed} distances, got {got}")]
    SequenceTooShort { needed: usize, got: usize },
    #[error("choice data has depth {choices}, tree has depth {tree}")]
    ChoiceDepthMismatch { tree: usize, choices: usize },
    #[error("tree on 2 has no zero branch")]
    MissingZeroBranch,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("schedule violation")]
    Schedule(#[from] ScheduleViolation),
    #[error("constructed matrix is not a metric: {0}")]
    MetricViolation(String),
}

/// A finite set of positive distances; `0` is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTarget(BTreeSet<Rational>);

impl DistanceTarget {
    pub fn new<I: IntoIterator<Item = Rational>>(values: I) -> Result<Self, ConstructError> {
        let set: BTreeSet<Rational> = values.into_iter().collect();
        if let Some(z) = set.iter().find(|v| v.is_zero()) {
            return Err(ConstructError::NonPositiveTarget(z.clone()));
        }
        if set.is_empty() {
            return Err(ConstructError::EmptyTarget);
        }
        Ok(DistanceTarget(set))
    }

    /// Nonzero distances realized by `x`.
    pub fn of_space(x: &FiniteMetricSpace) -> Result<Self, ConstructError> {
        Self::new(distance_set(x).into_iter().filter(Rational::is_positive))
    }

    pub fn values(&self) -> &BTreeSet<Rational> {
        &self.0
    }

    pub fn min(&self) -> &Rational {
        self.0.first().expect("nonempty")
    }

    pub fn sup(&self) -> &Rational {
        self.0.last().expect("nonempty")
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.0.contains(v)
    }

    /// The set with `0` added.
    pub fn with_zero(&self) -> BTreeSet<Rational> {
        let mut s = self.0.clone();
        s.insert(Rational::zero());
        s
    }
}

fn verified(x: FiniteMetricSpace) -> Result<FiniteMetricSpace, ConstructError> {
    match is_metric(&x) {
        Verdict::Pass => Ok(x),
        Verdict::Fail(v) => Err(ConstructError::MetricViolation(v.describe(&x))),
    }
}

fn strings<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Vec<String> {
    values.into_iter().map(Rational::to_string).collect()
}

/// Points `x_0, y_0, x_1, y_1, …` indexed by `A` in increasing order, with
/// the anchor `a = min A`.
pub fn build_discrete_ultrametric(target: &DistanceTarget) -> Result<FiniteMetricSpace, ConstructError> {
    let a: Vec<&Rational> = target.values().iter().collect();
    let anchor = target.min();
    let labels = (0..a.len()).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect();
    let x = FiniteMetricSpace::from_fn(labels, |p, q| {
        let (i, j) = (p / 2, q / 2);
        if i == j {
            a[i].clone()
        } else {
            anchor.max(a[i]).max(a[j]).clone()
        }
    })
    .with_provenance(Provenance {
        construction: Construction::Lemma1,
        parameters: json!({ "target": strings(target.values()), "anchor": anchor.to_string() }),
    });
    verified(x)
}

/// All `2^depth` words, at distance `d_seq[n]` where `n` is the first index
/// at which two words differ.
pub fn build_cantor_ultrametric(d_seq: &[Rational], depth: usize) -> Result<FiniteMetricSpace, ConstructError> {
    if d_seq.len() < depth {
        return Err(ConstructError::SequenceTooShort {
            needed: depth,
            got: d_seq.len(),
        });
    }
    let seq = &d_seq[..depth];
    if let Some(v) = seq.iter().find(|v| v.is_zero()) {
        return Err(ConstructError::NonPositiveTarget(v.clone()));
    }
    if let Some(index) = seq.windows(2).position(|w| w[0] <= w[1]) {
        return Err(ConstructError::NotStrictlyDecreasing { index: index + 1 });
    }
    let words: Vec<BitWord> = BitWord::all_of_length(depth).collect();
    let labels = words.iter().map(BitWord::to_string).collect();
    let x = FiniteMetricSpace::from_fn(labels, |i, j| seq[words[i].common_prefix_len(&words[j])].clone())
        .with_provenance(Provenance {
            construction: Construction::Cantor,
            parameters: json!({ "depth": depth, "sequence": strings(seq) }),
        });
    verified(x)
}

/// A tree space together with the tree and choices it was built from.
/// Point `i` of [`TreeSpace::space`] is branch `i` of [`TreeSpace::branches`].
#[derive(Debug, Clone)]
pub struct TreeSpace {
    space: FiniteMetricSpace,
    tree: TruncatedTree,
    choices: ChoiceData,
    branches: Vec<TreeNode>,
}

impl TreeSpace {
    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn into_space(self) -> FiniteMetricSpace {
        self.space
    }

    pub fn tree(&self) -> &TruncatedTree {
        &self.tree
    }

    pub fn choices(&self) -> &ChoiceData {
        &self.choices
    }

    pub fn branches(&self) -> &[TreeNode] {
        &self.branches
    }

    pub fn point_of(&self, branch: &TreeNode) -> Option<usize> {
        self.branches.binary_search(branch).ok()
    }

    /// The chosen branch through `node`: the least branch (first coordinate,
    /// then second) extending `node` whose first coordinate is not `0^N`,
    /// or the zero branch when that is the only one. For lifted trees on `2`
    /// this is `(alpha(s), 0^N)`.
    pub fn representative(&self, node: &TreeNode) -> Option<usize> {
        let mut through = self.branches.iter().enumerate().filter(|(_, x)| node.is_prefix_of(x));
        let first = through.next()?;
        if !first.1.s.is_all_zero() {
            return Some(first.0);
        }
        Some(through.next().unwrap_or(first).0)
    }

    /// Least `n_0 <= N` such that some ε_i lies strictly between `2^-n_0`
    /// and `eps`; `N` when none does.
    pub fn net_depth(&self, eps: &Rational) -> usize {
        let depth = self.tree.depth();
        (0..=depth)
            .find(|&n| {
                let lo = two_pow_neg(n as u32).to_rational();
                self.choices
                    .epsilons()
                    .iter()
                    .any(|e| lo < e.to_rational() && e.to_rational() < *eps)
            })
            .unwrap_or(depth)
    }

    /// Chosen branches through every node of length `<= net_depth(eps)`.
    pub fn canonical_net(&self, eps: &Rational) -> Vec<usize> {
        let n0 = self.net_depth(eps);
        let net: BTreeSet<usize> = self
            .tree
            .nodes()
            .filter(|node| node.len() <= n0)
            .filter_map(|node| self.representative(node))
            .collect();
        net.into_iter().collect()
    }
}

/// The three-case distance between distinct branches.
pub fn tree_distance(choices: &ChoiceData, x1: &TreeNode, x2: &TreeNode) -> Result<Dyadic, TreeError> {
    let p = mutual_predecessor(x1, x2)?;
    if p.s.is_all_zero() {
        return Ok(pi_of_word(&x1.s).max(pi_of_word(&x2.s)));
    }
    let d_s = choices.d(&p.s).expect("a nonzero node of T* has a nonzero extension");
    Ok(choices.least_epsilon_in_range(&p.s).unwrap_or(d_s).clone())
}

fn tree_space_with(
    tree: &TruncatedTree,
    choices: &ChoiceData,
    label: impl Fn(&TreeNode) -> String,
    provenance: Provenance,
) -> Result<TreeSpace, ConstructError> {
    if tree.depth() != choices.depth() {
        return Err(ConstructError::ChoiceDepthMismatch {
            tree: tree.depth(),
            choices: choices.depth(),
        });
    }
    let branches: Vec<TreeNode> = tree.branches().cloned().collect();
    let labels = branches.iter().map(label).collect();
    let space = FiniteMetricSpace::from_fn(labels, |i, j| {
        tree_distance(choices, &branches[i], &branches[j])
            .expect("branches are distinct")
            .to_rational()
    })
    .with_provenance(provenance);
    Ok(TreeSpace {
        space: verified(space)?,
        tree: tree.clone(),
        choices: choices.clone(),
        branches,
    })
}

fn tree_parameters(tree: &TruncatedTree, choices: &ChoiceData) -> serde_json::Value {
    let eps: Vec<String> = choices.epsilons().iter().map(Dyadic::to_string).collect();
    json!({
        "depth": tree.depth(),
        "branching_bound": tree.branching_bound(),
        "branches": tree.branches().count(),
        "epsilons": eps,
    })
}

/// Branches of `tree` under the three-case metric. `choices` must come from
/// [`make_choices`] on the same tree.
pub fn build_tree_space(tree: &TruncatedTree, choices: &ChoiceData) -> Result<TreeSpace, ConstructError> {
    let provenance = Provenance {
        construction: Construction::Tree,
        parameters: tree_parameters(tree, choices),
    };
    tree_space_with(tree, choices, TreeNode::label, provenance)
}

/// [`make_choices`] followed by [`build_tree_space`].
pub fn build_tree_space_auto(tree: &TruncatedTree) -> Result<TreeSpace, ConstructError> {
    build_tree_space(tree, &make_choices(tree)?)
}

/// Tree space of `{(s, 0^{|s|}) : s ∈ star}`, cut to `depth`. Points are
/// labelled by their first coordinate alone.
pub fn build_compact_tree_space(star: &BinaryTree, depth: usize) -> Result<TreeSpace, ConstructError> {
    let star = star.truncate(depth)?;
    if !star.has_zero_chain() {
        return Err(ConstructError::MissingZeroBranch);
    }
    let tree = star.lift()?;
    debug_assert_eq!(project_first(&tree), star);
    let choices = make_choices(&tree)?;
    let provenance = Provenance {
        construction: Construction::Compact,
        parameters: tree_parameters(&tree, &choices),
    };
    tree_space_with(&tree, &choices, |n| n.s.to_string(), provenance)
}

/// Compact construction for a finite target: the discrete ultrametric on
/// `2|A|` points.
pub fn build_compact_finite(target: &DistanceTarget) -> Result<FiniteMetricSpace, ConstructError> {
    let x = build_discrete_ultrametric(target)?;
    Ok(x.with_provenance(Provenance {
        construction: Construction::Compact,
        parameters: json!({ "mode": "finite", "target": strings(target.values()) }),
    }))
}

#[derive(Debug, Clone)]
pub struct GluePiece {
    pub space: FiniteMetricSpace,
    pub target: DistanceTarget,
}

impl GluePiece {
    /// Piece whose target is its own nonzero distance set.
    pub fn from_space(space: FiniteMetricSpace) -> Result<Self, ConstructError> {
        let target = DistanceTarget::of_space(&space)?;
        Ok(GluePiece { space, target })
    }
}

/// Pieces `X_1, X_2, …` with targets `A_n` and cross distances `δ_n`.
#[derive(Debug, Clone)]
pub struct GlueSchedule {
    pub pieces: Vec<GluePiece>,
    pub deltas: Vec<Rational>,
}

impl GlueSchedule {
    pub fn new(pieces: Vec<GluePiece>, deltas: Vec<Rational>) -> Self {
        GlueSchedule { pieces, deltas }
    }

    /// Picks each `δ_n` as the least element of `A_n` that is at least
    /// `sup A_n / 2` and at least `δ_{n-1}`.
    pub fn with_auto_deltas(pieces: Vec<GluePiece>) -> Result<Self, ConstructError> {
        let mut deltas: Vec<Rational> = Vec::with_capacity(pieces.len());
        for (k, piece) in pieces.iter().enumerate() {
            let half = piece.target.sup().half();
            let floor = match deltas.last() {
                Some(prev) if *prev > half => prev.clone(),
                _ => half,
            };
            let delta = piece
                .target
                .values()
                .range(floor..)
                .next()
                .ok_or(ScheduleViolation::NoAdmissibleDelta { piece: k + 1 })?;
            deltas.push(delta.clone());
        }
        Ok(GlueSchedule { pieces, deltas })
    }

    /// First failed condition, with pieces numbered from 1.
    pub fn check(&self) -> Result<(), ScheduleViolation> {
        if self.pieces.len() != self.deltas.len() {
            return Err(ScheduleViolation::LengthMismatch {
                pieces: self.pieces.len(),
                deltas: self.deltas.len(),
            });
        }
        for (k, (piece, delta)) in self.pieces.iter().zip(&self.deltas).enumerate() {
            let n = k + 1;
            if !piece.target.contains(delta) {
                return Err(ScheduleViolation::NotInTarget {
                    piece: n,
                    delta: delta.clone(),
                });
            }
            if *delta < piece.target.sup().half() {
                return Err(ScheduleViolation::BelowHalfSup {
                    piece: n,
                    delta: delta.clone(),
                    sup: piece.target.sup().clone(),
                });
            }
            if k > 0 && *delta < self.deltas[k - 1] {
                return Err(ScheduleViolation::Decreasing {
                    piece: n,
                    delta: delta.clone(),
                    prev_delta: self.deltas[k - 1].clone(),
                });
            }
            if let Some(value) = piece
                .space
                .values()
                .iter()
                .find(|v| v.is_positive() && !piece.target.contains(v))
            {
                return Err(ScheduleViolation::PieceOutsideTarget {
                    piece: n,
                    value: value.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Disjoint union; `x ∈ X_n`, `y ∈ X_m` with `n < m` are at distance `δ_m`.
/// Labels are prefixed with the 1-based piece number.
pub fn glue_spaces(schedule: &GlueSchedule) -> Result<FiniteMetricSpace, ConstructError> {
    schedule.check()?;
    let mut owner = Vec::new();
    let mut labels = Vec::new();
    for (k, piece) in schedule.pieces.iter().enumerate() {
        for (i, l) in piece.space.labels().iter().enumerate() {
            owner.push((k, i));
            labels.push(format!("X{}/{}", k + 1, l));
        }
    }
    let x = FiniteMetricSpace::from_fn(labels, |p, q| {
        let ((n, i), (m, j)) = (owner[p], owner[q]);
        if n == m {
            schedule.pieces[n].space.dist(i, j).clone()
        } else {
            schedule.deltas[n.max(m)].clone()
        }
    })
    .with_provenance(Provenance {
        construction: Construction::Glue,
        parameters: json!({
            "pieces": schedule.pieces.len(),
            "deltas": strings(&schedule.deltas),
        }),
    });
    verified(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::metrics::{eps_net, is_ultrametric};

    fn target(vals: &[&str]) -> DistanceTarget {
        DistanceTarget::new(vals.iter().map(|v| rat(v))).unwrap()
    }

    fn set(vals: &[&str]) -> BTreeSet<Rational> {
        vals.iter().map(|v| rat(v)).collect()
    }

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    #[test]
    fn lemma1_single_value() {
        let x = build_discrete_ultrametric(&target(&["1"])).unwrap();
        assert_eq!(x.labels(), ["x0", "y0"]);
        assert_eq!(x.dist(0, 1), &rat("1"));
        assert_eq!(distance_set(&x), set(&["0", "1"]));
    }

    #[test]
    fn lemma1_two_values() {
        let x = build_discrete_ultrametric(&target(&["1", "2"])).unwrap();
        let d = |a, b| x.dist_by_label(a, b).unwrap().clone();
        assert_eq!(d("x0", "y0"), rat("1"));
        assert_eq!(d("x1", "y1"), rat("2"));
        for (a, b) in [("x0", "x1"), ("x0", "y1"), ("y0", "x1"), ("y0", "y1")] {
            assert_eq!(d(a, b), rat("2"), "{a}-{b}");
        }
        assert!(is_ultrametric(&x).is_pass());
        assert_eq!(distance_set(&x), set(&["0", "1", "2"]));
    }

    #[test]
    fn lemma1_ignores_input_order() {
        let a = build_discrete_ultrametric(&target(&["3", "1", "2"])).unwrap();
        let b = build_discrete_ultrametric(&target(&["1", "2", "3"])).unwrap();
        assert_eq!(a, b);
        assert_eq!(distance_set(&a), set(&["0", "1", "2", "3"]));
    }

    #[test]
    fn targets_reject_bad_values() {
        assert_eq!(DistanceTarget::new([]), Err(ConstructError::EmptyTarget));
        assert!(matches!(
            DistanceTarget::new([rat("0"), rat("1")]),
            Err(ConstructError::NonPositiveTarget(_))
        ));
    }

    #[test]
    fn cantor_examples() {
        let x = build_cantor_ultrametric(&[rat("1/2"), rat("1/4"), rat("1/8")], 3).unwrap();
        let d = |a, b| x.dist_by_label(a, b).unwrap().clone();
        assert_eq!(d("000", "100"), rat("1/2"));
        assert_eq!(d("000", "010"), rat("1/4"));
        assert_eq!(d("000", "001"), rat("1/8"));
        assert_eq!(d("101", "101"), rat("0"));
        assert!(is_ultrametric(&x).is_pass());

        let two = build_cantor_ultrametric(&[rat("5")], 1).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(distance_set(&two), set(&["0", "5"]));
    }

    #[test]
    fn cantor_rejects_bad_sequences() {
        assert_eq!(
            build_cantor_ultrametric(&[rat("1"), rat("1")], 2),
            Err(ConstructError::NotStrictlyDecreasing { index: 1 })
        );
        assert_eq!(
            build_cantor_ultrametric(&[rat("1"), rat("1/2"), rat("3/4")], 3),
            Err(ConstructError::NotStrictlyDecreasing { index: 2 })
        );
        assert_eq!(
            build_cantor_ultrametric(&[rat("1")], 2),
            Err(ConstructError::SequenceTooShort { needed: 2, got: 1 })
        );
    }

    #[test]
    fn cantor_net_has_one_center_per_first_bit() {
        let x = build_cantor_ultrametric(&[rat("1/2"), rat("1/4"), rat("1/8")], 3).unwrap();
        let net = eps_net(&x, &rat("1/4")).unwrap();
        let labels: Vec<&str> = net.iter().map(|&i| x.labels()[i].as_str()).collect();
        assert_eq!(labels, ["000", "100"]);
    }

    fn lifted(depth: usize, words: &[&str]) -> TruncatedTree {
        BinaryTree::with_zero_branch(depth, words.iter().map(|s| w(s)))
            .unwrap()
            .lift()
            .unwrap()
    }

    #[test]
    fn tree_space_zero_predecessor_case() {
        // 100, 010, 001 code 1/2, 1/4, 1/8; every pair splits inside the zero chain
        let t = lifted(3, &["100", "010", "001"]);
        let ts = build_tree_space_auto(&t).unwrap();
        let x = ts.space();
        let d = |a: &str, b: &str| x.dist_by_label(a, b).unwrap().clone();
        assert_eq!(d("100:0.0.0", "010:0.0.0"), rat("1/2"));
        assert_eq!(d("010:0.0.0", "001:0.0.0"), rat("1/4"));
        assert_eq!(d("000:0.0.0", "001:0.0.0"), rat("1/8"));

        // same values one level deeper, with 0001 added for the limit-point condition
        let t = lifted(4, &["1000", "0100", "0010", "0001"]);
        let x = build_tree_space_auto(&t).unwrap().into_space();
        let d = |a: &str, b: &str| x.dist_by_label(a, b).unwrap().clone();
        assert_eq!(d("1000:0.0.0.0", "0100:0.0.0.0"), rat("1/2"));
        assert_eq!(d("0100:0.0.0.0", "0010:0.0.0.0"), rat("1/4"));
        assert_eq!(d("0000:0.0.0.0", "0010:0.0.0.0"), rat("1/8"));
    }

    #[test]
    fn tree_space_epsilon_case() {
        let t = lifted(4, &["0001", "0100", "1100", "1110"]);
        let ts = build_tree_space_auto(&t).unwrap();
        assert_eq!(ts.choices().d(&w("11")).unwrap().to_rational(), rat("3/4"));
        let d = ts.space().dist_by_label("1100:0.0.0.0", "1110:0.0.0.0").unwrap();
        assert_eq!(d, &rat("1/4"));
    }

    #[test]
    fn tree_space_fallthrough_case() {
        // T* leaves 0000 0001 1000 1001: ε = (9/16, 1/16, 1/16, 1/16), and
        // nothing lies in [2^-3, d(100)] = [1/8, 1/2], so d = d(100) = 1/2
        let t = lifted(4, &["0001", "1000", "1001"]);
        let ts = build_tree_space_auto(&t).unwrap();
        assert_eq!(ts.choices().least_epsilon_in_range(&w("100")), None);
        let d = ts.space().dist_by_label("1000:0.0.0.0", "1001:0.0.0.0").unwrap();
        assert_eq!(d, &rat("1/2"));
    }

    #[test]
    fn tree_space_second_coordinate_split() {
        // same first coordinate, different second coordinate: split at the root
        let t = TruncatedTree::with_zero_branch(
            1,
            2,
            [
                TreeNode::new(w("01"), vec![0, 0]).unwrap(),
                TreeNode::new(w("11"), vec![0, 0]).unwrap(),
                TreeNode::new(w("11"), vec![1, 0]).unwrap(),
            ],
        )
        .unwrap();
        let ts = build_tree_space_auto(&t).unwrap();
        let d = ts.space().dist_by_label("11:0.0", "11:1.0").unwrap();
        assert_eq!(d, &rat("3/4"));
    }

    #[test]
    fn compact_examples() {
        let full = build_compact_tree_space(&BinaryTree::full(3), 3).unwrap();
        assert_eq!(full.space().len(), 8);
        let leaves: BTreeSet<Rational> = BitWord::all_of_length(3)
            .map(|w| pi_of_word(&w).to_rational())
            .collect();
        assert!(distance_set(full.space()).is_subset(&leaves));

        let two = build_compact_tree_space(&BinaryTree::with_zero_branch(1, [w("1")]).unwrap(), 1).unwrap();
        assert_eq!(two.space().len(), 2);
        assert_eq!(two.space().dist(0, 1), &rat("1/2"));

        let finite = build_compact_finite(&target(&["1", "2"])).unwrap();
        assert_eq!(finite.len(), 4);
        assert_eq!(finite.provenance().unwrap().construction, Construction::Compact);
    }

    #[test]
    fn compact_requires_zero_branch() {
        let no_zero = BinaryTree::new(2, [w("10"), w("11")]).unwrap();
        assert_eq!(
            build_compact_tree_space(&no_zero, 2).unwrap_err(),
            ConstructError::MissingZeroBranch
        );
    }

    #[test]
    fn canonical_net_on_full_tree() {
        let ts = build_compact_tree_space(&BinaryTree::full(4), 4).unwrap();
        for eps in ["1/2", "1/4", "1/8"] {
            let eps = rat(eps);
            let net = ts.canonical_net(&eps);
            assert!(crate::metrics::covers(ts.space(), &net, &eps));
        }
        // ε = (15/16, 7/16, 3/16, 1/16)
        assert_eq!(ts.net_depth(&rat("1/2")), 2);
        assert_eq!(ts.net_depth(&rat("1/4")), 3);
        // only 1/16 is below 1/8, and 2^-n < 1/16 needs n = 5 > N
        assert_eq!(ts.net_depth(&rat("1/8")), 4);
    }

    fn piece(vals: &[&str]) -> GluePiece {
        GluePiece::from_space(build_discrete_ultrametric(&target(vals)).unwrap()).unwrap()
    }

    #[test]
    fn glue_example() {
        let schedule = GlueSchedule::new(
            vec![piece(&["1/2"]), piece(&["1/2", "3/2"])],
            vec![rat("1/2"), rat("3/2")],
        );
        let x = glue_spaces(&schedule).unwrap();
        assert_eq!(x.len(), 6);
        assert_eq!(x.dist_by_label("X1/x0", "X2/y1").unwrap(), &rat("3/2"));
        assert_eq!(distance_set(&x), set(&["0", "1/2", "3/2"]));
    }

    #[test]
    fn glue_single_piece_is_identity() {
        let p = piece(&["1", "2"]);
        let x = glue_spaces(&GlueSchedule::new(vec![p.clone()], vec![rat("2")])).unwrap();
        assert_eq!(x.matrix(), p.space.matrix());
    }

    #[test]
    fn glue_schedule_violations() {
        let bad = GlueSchedule::new(
            vec![piece(&["1/2"]), piece(&["1/2", "3/2"])],
            vec![rat("1/2"), rat("1/2")],
        );
        assert!(matches!(
            glue_spaces(&bad),
            Err(ConstructError::Schedule(ScheduleViolation::BelowHalfSup {
                piece: 2,
                ..
            }))
        ));
        let bad = GlueSchedule::new(vec![piece(&["1"]), piece(&["1/2", "3/4"])], vec![rat("1"), rat("3/4")]);
        assert!(matches!(
            glue_spaces(&bad),
            Err(ConstructError::Schedule(ScheduleViolation::Decreasing { piece: 2, .. }))
        ));
        let bad = GlueSchedule::new(vec![piece(&["1"])], vec![rat("2")]);
        assert!(matches!(
            glue_spaces(&bad),
            Err(ConstructError::Schedule(ScheduleViolation::NotInTarget {
                piece: 1,
                ..
            }))
        ));
        let bad = GlueSchedule::new(vec![piece(&["1"])], vec![]);
        assert!(matches!(
            glue_spaces(&bad),
            Err(ConstructError::Schedule(ScheduleViolation::LengthMismatch { .. }))
        ));
    }

    #[test]
    fn auto_deltas_satisfy_schedule() {
        let s = GlueSchedule::with_auto_deltas(vec![piece(&["1/4", "1/2"]), piece(&["1/8", "1", "3/2"])]).unwrap();
        assert_eq!(s.deltas, vec![rat("1/4"), rat("1")]);
        assert!(glue_spaces(&s).is_ok());
        let stuck = GlueSchedule::with_auto_deltas(vec![piece(&["4"]), piece(&["1"])]);
        assert!(matches!(
            stuck,
            Err(ConstructError::Schedule(ScheduleViolation::NoAdmissibleDelta {
                piece: 2
            }))
        ));
    }

    #[test]
    fn scaling_stretches_pieces() {
        let x = build_discrete_ultrametric(&target(&["1/2", "3/4"])).unwrap();
        let y = x.scaled(&rat("4")).unwrap();
        assert_eq!(distance_set(&y), set(&["0", "2", "3"]));
        assert!(is_ultrametric(&y).is_pass());
    }
}
