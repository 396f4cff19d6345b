//! Pruned trees on `2` and on `2 × ℕ`, cut off at a finite depth, and the
//! deterministic choices (representative words, their codes, and the small
//! distance sequence) that the tree-space metric is built from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::exact::{pi_of_word, two_pow_neg, BitWord, Dyadic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {0} has coordinates of different lengths")]
    Ragged(TreeNode),
    #[error("node {node} is deeper than the tree depth {depth}")]
    TooDeep { node: TreeNode, depth: usize },
    #[error("node {node} uses value {value} above the branching bound {bound}")]
    BoundExceeded { node: TreeNode, value: u32, bound: u32 },
    #[error("node {0} has no extension in the tree (not pruned)")]
    NotPruned(String),
    #[error("tree is missing the zero node of length {0}")]
    MissingZeroChain(usize),
    #[error("branch {0} projects to the zero word but is not the zero branch")]
    DuplicateZeroBranch(TreeNode),
    #[error("no nonzero branch codes a value below 2^-{i}")]
    LimitPointViolation { i: usize },
    #[error("a branch has no maximal mutual predecessor with itself")]
    IdenticalBranches,
    #[error("requested depth {requested} exceeds tree depth {depth}")]
    DepthTooLarge { requested: usize, depth: usize },
}

/// A node `(s, b)` of a tree on `2 × ℕ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeNode {
    pub s: BitWord,
    pub b: Vec<u32>,
}

impl TreeNode {
    pub fn new(s: BitWord, b: Vec<u32>) -> Result<Self, TreeError> {
        let node = TreeNode { s, b };
        if node.s.len() != node.b.len() {
            return Err(TreeError::Ragged(node));
        }
        Ok(node)
    }

    pub fn root() -> Self {
        TreeNode {
            s: BitWord::new(),
            b: Vec::new(),
        }
    }

    /// `(0^k, 0^k)`
    pub fn zero(k: usize) -> Self {
        TreeNode {
            s: BitWord::zeros(k),
            b: vec![0; k],
        }
    }

    /// `(s, 0^{|s|})`, the lift used for trees on `2`.
    pub fn lift(s: &BitWord) -> Self {
        TreeNode {
            b: vec![0; s.len()],
            s: s.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn prefix(&self, n: usize) -> TreeNode {
        let n = n.min(self.len());
        TreeNode {
            s: self.s.prefix(n),
            b: self.b[..n].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &TreeNode) -> bool {
        self.s.is_prefix_of(&other.s) && other.b.starts_with(&self.b)
    }

    /// Length of the longest common prefix of both coordinates jointly.
    pub fn common_prefix_len(&self, other: &TreeNode) -> usize {
        let b = self.b.iter().zip(&other.b).take_while(|(x, y)| x == y).count();
        self.s.common_prefix_len(&other.s).min(b)
    }

    /// Label used for points of tree spaces: `bits:b0.b1.…`.
    pub fn label(&self) -> String {
        let b: Vec<String> = self.b.iter().map(u32::to_string).collect();
        format!("{}:{}", self.s, b.join("."))
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?})", self.s, self.b)
    }
}

impl fmt::Debug for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn all_prefixes(s: &BitWord) -> impl Iterator<Item = BitWord> + '_ {
    (0..=s.len()).map(move |k| s.prefix(k))
}

/// A pruned tree on `2`, stored to depth `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryTree {
    depth: usize,
    nodes: BTreeSet<BitWord>,
}

impl BinaryTree {
    /// Predecessor closure of `words`, checked to be pruned at `depth`.
    pub fn new<I>(depth: usize, words: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = BitWord>,
    {
        let mut nodes = BTreeSet::new();
        for w in words {
            if w.len() > depth {
                return Err(TreeError::TooDeep {
                    node: TreeNode::lift(&w),
                    depth,
                });
            }
            nodes.extend(all_prefixes(&w));
        }
        nodes.insert(BitWord::new());
        let tree = BinaryTree { depth, nodes };
        if let Some(stuck) = tree
            .nodes
            .iter()
            .find(|s| s.len() < depth && !tree.contains(&s.child(false)) && !tree.contains(&s.child(true)))
        {
            return Err(TreeError::NotPruned(stuck.to_string()));
        }
        Ok(tree)
    }

    /// Like [`BinaryTree::new`], with the zero branch `0^N` added.
    pub fn with_zero_branch<I>(depth: usize, words: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = BitWord>,
    {
        Self::new(depth, words.into_iter().chain([BitWord::zeros(depth)]))
    }

    /// Every word of length `<= depth`.
    pub fn full(depth: usize) -> Self {
        Self::new(depth, BitWord::all_of_length(depth)).expect("full tree is pruned")
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn contains(&self, s: &BitWord) -> bool {
        self.nodes.contains(s)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &BitWord> {
        self.nodes.iter()
    }

    /// Depth-`N` words in lexicographic order.
    pub fn leaves(&self) -> impl Iterator<Item = &BitWord> {
        let depth = self.depth;
        self.nodes.iter().filter(move |s| s.len() == depth)
    }

    pub fn has_zero_chain(&self) -> bool {
        self.contains(&BitWord::zeros(self.depth))
    }

    /// Nodes of length `<= depth`.
    pub fn truncate(&self, depth: usize) -> Result<Self, TreeError> {
        if depth > self.depth {
            return Err(TreeError::DepthTooLarge {
                requested: depth,
                depth: self.depth,
            });
        }
        Ok(BinaryTree {
            depth,
            nodes: self.nodes.iter().filter(|s| s.len() <= depth).cloned().collect(),
        })
    }

    /// `{(s, 0^{|s|}) : s ∈ self}`.
    pub fn lift(&self) -> Result<TruncatedTree, TreeError> {
        TruncatedTree::new(0, self.depth, self.nodes.iter().map(TreeNode::lift))
    }
}

/// A pruned tree on `2 × ℕ` stored to depth `N`, with second coordinates in
/// `0..=branching_bound`, containing the zero chain `(0^k, 0^k)` as the only
/// branch whose first coordinate is `0^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedTree {
    depth: usize,
    branching_bound: u32,
    nodes: BTreeSet<TreeNode>,
}

impl TruncatedTree {
    /// Predecessor closure of `nodes`, then every structural check.
    pub fn new<I>(branching_bound: u32, depth: usize, nodes: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = TreeNode>,
    {
        let mut closed = BTreeSet::new();
        for node in nodes {
            if node.s.len() != node.b.len() {
                return Err(TreeError::Ragged(node));
            }
            if node.len() > depth {
                return Err(TreeError::TooDeep { node, depth });
            }
            if let Some(&value) = node.b.iter().find(|&&v| v > branching_bound) {
                return Err(TreeError::BoundExceeded {
                    node,
                    value,
                    bound: branching_bound,
                });
            }
            for k in 0..=node.len() {
                closed.insert(node.prefix(k));
            }
        }
        closed.insert(TreeNode::root());
        let tree = TruncatedTree {
            depth,
            branching_bound,
            nodes: closed,
        };
        tree.check_pruned()?;
        tree.check_zero_branch()?;
        Ok(tree)
    }

    /// Like [`TruncatedTree::new`], with the zero branch added.
    pub fn with_zero_branch<I>(branching_bound: u32, depth: usize, nodes: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = TreeNode>,
    {
        Self::new(branching_bound, depth, nodes.into_iter().chain([TreeNode::zero(depth)]))
    }

    fn check_pruned(&self) -> Result<(), TreeError> {
        let parents: BTreeSet<TreeNode> = self
            .nodes
            .iter()
            .filter(|n| !n.is_empty())
            .map(|n| n.prefix(n.len() - 1))
            .collect();
        match self
            .nodes
            .iter()
            .find(|n| n.len() < self.depth && !parents.contains(*n))
        {
            Some(n) => Err(TreeError::NotPruned(n.to_string())),
            None => Ok(()),
        }
    }

    fn check_zero_branch(&self) -> Result<(), TreeError> {
        for k in 0..=self.depth {
            if !self.nodes.contains(&TreeNode::zero(k)) {
                return Err(TreeError::MissingZeroChain(k));
            }
        }
        let zero = TreeNode::zero(self.depth);
        match self.branches().find(|n| n.s.is_all_zero() && **n != zero) {
            Some(n) => Err(TreeError::DuplicateZeroBranch(n.clone())),
            None => Ok(()),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn branching_bound(&self) -> u32 {
        self.branching_bound
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter()
    }

    pub fn contains(&self, node: &TreeNode) -> bool {
        self.nodes.contains(node)
    }

    /// Depth-`N` nodes, i.e. the points of the truncated branch space `[T]`.
    pub fn branches(&self) -> impl Iterator<Item = &TreeNode> {
        let depth = self.depth;
        self.nodes.iter().filter(move |n| n.len() == depth)
    }

    /// Depth-`N` nodes extending `node`.
    pub fn branches_through<'a>(&'a self, node: &'a TreeNode) -> impl Iterator<Item = &'a TreeNode> + 'a {
        self.branches().filter(move |x| node.is_prefix_of(x))
    }
}

/// `T* = {s : ∃b (s, b) ∈ T}`.
pub fn project_first(t: &TruncatedTree) -> BinaryTree {
    BinaryTree {
        depth: t.depth,
        nodes: t.nodes.iter().map(|n| n.s.clone()).collect(),
    }
}

/// The longest node below both branches.
pub fn mutual_predecessor(x1: &TreeNode, x2: &TreeNode) -> Result<TreeNode, TreeError> {
    if x1 == x2 {
        return Err(TreeError::IdenticalBranches);
    }
    Ok(x1.prefix(x1.common_prefix_len(x2)))
}

/// Representative words and the values derived from them.
///
/// For every `s ∈ T*` with a nonzero depth-`N` extension, `alpha(s)` is the
/// lexicographically least such extension and `d(s) = π(alpha(s))`.
/// `epsilons[i]` is the largest `d` value strictly below `2^-i`, for
/// `i < N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceData {
    depth: usize,
    alpha: BTreeMap<BitWord, BitWord>,
    d: BTreeMap<BitWord, Dyadic>,
    epsilons: Vec<Dyadic>,
}

impl ChoiceData {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alpha(&self, s: &BitWord) -> Option<&BitWord> {
        self.alpha.get(s)
    }

    pub fn d(&self, s: &BitWord) -> Option<&Dyadic> {
        self.d.get(s)
    }

    pub fn alphas(&self) -> impl Iterator<Item = (&BitWord, &BitWord)> {
        self.alpha.iter()
    }

    pub fn epsilons(&self) -> &[Dyadic] {
        &self.epsilons
    }

    /// Distinct `d` values, ascending.
    pub fn d_values(&self) -> BTreeSet<Dyadic> {
        self.d.values().cloned().collect()
    }

    /// Least ε value in `[2^-|s|, d(s)]`, if any.
    pub fn least_epsilon_in_range(&self, s: &BitWord) -> Option<&Dyadic> {
        let lo = two_pow_neg(s.len() as u32);
        let hi = self.d(s)?;
        self.epsilons.iter().filter(|e| **e >= lo && *e <= hi).min()
    }
}

/// Choices for `T* = project_first(t)`.
pub fn make_choices(t: &TruncatedTree) -> Result<ChoiceData, TreeError> {
    make_choices_on(&project_first(t))
}

/// Choices on a tree on `2` directly. The tree must satisfy the truncated
/// limit-point condition: for each `i < N` some nonzero depth-`N` word
/// codes a value below `2^-i`.
pub fn make_choices_on(star: &BinaryTree) -> Result<ChoiceData, TreeError> {
    let depth = star.depth();
    let nonzero: BTreeSet<&BitWord> = star.leaves().filter(|w| !w.is_all_zero()).collect();

    let mut alpha = BTreeMap::new();
    let mut d = BTreeMap::new();
    for s in star.nodes() {
        let lo = s.padded(depth);
        let least = nonzero
            .range::<&BitWord, _>(&lo..)
            .take_while(|w| s.is_prefix_of(w))
            .next();
        if let Some(&w) = least {
            d.insert(s.clone(), pi_of_word(w));
            alpha.insert(s.clone(), w.clone());
        }
    }

    let values: BTreeSet<Dyadic> = nonzero.iter().map(|w| pi_of_word(w)).collect();
    let mut epsilons = Vec::with_capacity(depth);
    for i in 0..depth {
        let bound = two_pow_neg(i as u32);
        match values.range(..bound).next_back() {
            Some(e) => epsilons.push(e.clone()),
            None => return Err(TreeError::LimitPointViolation { i }),
        }
    }
    Ok(ChoiceData {
        depth,
        alpha,
        d,
        epsilons,
    })
}
