//! Finite metric spaces with exact distances, and the measurements taken on
//! them: axiom checks, distance sets, n-point spectra, and ε-nets.
//!
//! Distances are interned: a space stores its sorted distinct values once and
//! an `n × n` table of indices into them. Because the value list is sorted,
//! comparing two indices is the same as comparing the two distances, which
//! keeps the cubic-time checks free of big-integer work.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::Rational;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("matrix row {row} has {found} entries, expected {expected}")]
    NotSquare { row: usize, found: usize, expected: usize },
    #[error("{labels} labels for a {size}x{size} matrix")]
    LabelCount { labels: usize, size: usize },
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("spectrum size n = {0} is outside the supported range 2..=8")]
    BadSpectrumSize(usize),
    #[error("projection to m = {m} needs 2 <= m <= {n}")]
    BadProjection { m: usize, n: usize },
    #[error("enumeration of {needed} tuples exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("ε must be positive")]
    NonPositiveEps,
    #[error("spectrum tuple has {found} entries, expected {expected}")]
    TupleLength { found: usize, expected: usize },
    #[error("scale factor must be positive")]
    NonPositiveScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Lemma1,
    Cantor,
    Tree,
    Compact,
    Glue,
}

/// Which constructor produced a space, and with what parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: Construction,
    pub parameters: serde_json::Value,
}

/// Point labels plus an exact distance matrix. The matrix is not assumed to
/// be a metric; [`is_metric`] decides that.
#[derive(Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    values: Vec<Rational>,
    cells: Vec<u32>,
    provenance: Option<Provenance>,
}

fn intern(entries: Vec<Rational>) -> (Vec<Rational>, Vec<u32>) {
    let values: Vec<Rational> = entries.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let index: HashMap<&Rational, u32> = values.iter().enumerate().map(|(i, v)| (v, i as u32)).collect();
    let cells = entries.iter().map(|e| index[e]).collect();
    (values, cells)
}

impl FiniteMetricSpace {
    /// Symmetric space from a distance function on unordered pairs. `dist` is
    /// called once per pair `i < j`; the diagonal is zero.
    pub fn from_fn<F>(labels: Vec<String>, mut dist: F) -> Self
    where
        F: FnMut(usize, usize) -> Rational,
    {
        let n = labels.len();
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = dist(i, j);
                entries[j * n + i] = d.clone();
                entries[i * n + j] = d;
            }
        }
        let (values, cells) = intern(entries);
        FiniteMetricSpace {
            labels,
            values,
            cells,
            provenance: None,
        }
    }

    /// Arbitrary square matrix, possibly violating the metric axioms.
    pub fn from_matrix(labels: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self, MetricsError> {
        let n = rows.len();
        if labels.len() != n {
            return Err(MetricsError::LabelCount {
                labels: labels.len(),
                size: n,
            });
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(MetricsError::DuplicateLabel(l.clone()));
            }
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricsError::NotSquare {
                    row,
                    found: r.len(),
                    expected: n,
                });
            }
        }
        let (values, cells) = intern(rows.into_iter().flatten().collect());
        Ok(FiniteMetricSpace {
            labels,
            values,
            cells,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.values[self.rank(i, j) as usize]
    }

    pub fn dist_by_label(&self, a: &str, b: &str) -> Option<&Rational> {
        Some(self.dist(self.index_of(a)?, self.index_of(b)?))
    }

    /// Position of `d(i, j)` among the sorted distinct entries. Ranks compare
    /// exactly like the distances they stand for.
    pub fn rank(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.len() + j]
    }

    /// Sorted distinct matrix entries.
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.dist(i, j).clone()).collect())
            .collect()
    }

    pub fn diameter(&self) -> Rational {
        self.values.last().cloned().unwrap_or_else(Rational::zero)
    }

    /// Every distance multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self, MetricsError> {
        if !factor.is_positive() {
            return Err(MetricsError::NonPositiveScale);
        }
        let mut out = self.clone();
        out.values = self.values.iter().map(|v| v * factor).collect();
        if let Some(p) = out.provenance.as_mut() {
            if let Some(obj) = p.parameters.as_object_mut() {
                obj.insert("scale".into(), serde_json::Value::String(factor.to_string()));
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FiniteMetricSpace({} points)", self.len())?;
        for i in 0..self.len() {
            let row = (0..self.len()).map(|j| self.dist(i, j).to_string()).join(" ");
            writeln!(f, "  {}: {}", self.labels[i], row)?;
        }
        Ok(())
    }
}

/// Why a matrix fails to be a metric or an ultrametric. Indices are points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonZeroDiagonal {
        i: usize,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    NonPositive {
        i: usize,
        j: usize,
    },
    /// `d(i, k) > d(i, j) + d(j, k)`
    Triangle {
        i: usize,
        j: usize,
        k: usize,
    },
    /// `d(i, k) > max(d(i, j), d(j, k))`
    Ultrametric {
        i: usize,
        j: usize,
        k: usize,
    },
}

impl Violation {
    pub fn describe(&self, x: &FiniteMetricSpace) -> String {
        let l = |p: usize| x.labels()[p].as_str();
        match *self {
            Violation::NonZeroDiagonal { i } => {
                format!("d({0},{0}) = {1} is not 0", l(i), x.dist(i, i))
            }
            Violation::Asymmetric { i, j } => format!(
                "d({},{}) = {} but d({},{}) = {}",
                l(i),
                l(j),
                x.dist(i, j),
                l(j),
                l(i),
                x.dist(j, i)
            ),
            Violation::NonPositive { i, j } => {
                format!("d({},{}) = 0 for distinct points", l(i), l(j))
            }
            Violation::Triangle { i, j, k } => format!(
                "triangle ({},{},{}): d({},{}) = {} > {} + {}",
                l(i),
                l(j),
                l(k),
                l(i),
                l(k),
                x.dist(i, k),
                x.dist(i, j),
                x.dist(j, k)
            ),
            Violation::Ultrametric { i, j, k } => format!(
                "triangle ({},{},{}): d({},{}) = {} > max({}, {})",
                l(i),
                l(j),
                l(k),
                l(i),
                l(k),
                x.dist(i, k),
                x.dist(i, j),
                x.dist(j, k)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Violation),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn render(&self, x: &FiniteMetricSpace) -> String {
        match self {
            Verdict::Pass => "PASS".to_string(),
            Verdict::Fail(v) => format!("FAIL {}", v.describe(x)),
        }
    }
}

/// For each pair of value ranks `(a, b)`, the number of values that are
/// `<= v[a] + v[b]`. A rank `c` then satisfies `v[c] <= v[a] + v[b]` iff
/// `c < bound(a, b)`.
struct SumBounds {
    width: usize,
    bounds: Vec<u32>,
}

impl SumBounds {
    const MAX_VALUES: usize = 4096;

    fn new(values: &[Rational]) -> Option<Self> {
        let width = values.len();
        if width > Self::MAX_VALUES {
            return None;
        }
        let mut bounds = vec![0u32; width * width];
        for a in 0..width {
            for b in a..width {
                let s = &values[a] + &values[b];
                let c = values.partition_point(|v| *v <= s) as u32;
                bounds[a * width + b] = c;
                bounds[b * width + a] = c;
            }
        }
        Some(SumBounds { width, bounds })
    }

    fn le_sum(&self, c: u32, a: u32, b: u32) -> bool {
        c < self.bounds[a as usize * self.width + b as usize]
    }
}

fn check_axioms(x: &FiniteMetricSpace) -> Option<Violation> {
    let n = x.len();
    for i in 0..n {
        if !x.dist(i, i).is_zero() {
            return Some(Violation::NonZeroDiagonal { i });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if x.rank(i, j) != x.rank(j, i) {
                return Some(Violation::Asymmetric { i, j });
            }
            if x.dist(i, j).is_zero() {
                return Some(Violation::NonPositive { i, j });
            }
        }
    }
    None
}

/// Checks zero diagonal, symmetry, positivity and the triangle inequality on
/// every triple. Degenerate triangles (`c = a + b`) pass.
pub fn is_metric(x: &FiniteMetricSpace) -> Verdict {
    if let Some(v) = check_axioms(x) {
        return Verdict::Fail(v);
    }
    let n = x.len();
    let table = SumBounds::new(x.values());
    let le = |c: (usize, usize), a: (usize, usize), b: (usize, usize)| match &table {
        Some(t) => t.le_sum(x.rank(c.0, c.1), x.rank(a.0, a.1), x.rank(b.0, b.1)),
        None => *x.dist(c.0, c.1) <= x.dist(a.0, a.1) + x.dist(b.0, b.1),
    };
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                // each side against the other two
                if !le((i, k), (i, j), (j, k)) {
                    return Verdict::Fail(Violation::Triangle { i, j, k });
                }
                if !le((i, j), (i, k), (k, j)) {
                    return Verdict::Fail(Violation::Triangle { i, j: k, k: j });
                }
                if !le((j, k), (j, i), (i, k)) {
                    return Verdict::Fail(Violation::Triangle { i: j, j: i, k });
                }
            }
        }
    }
    Verdict::Pass
}

/// Checks `d(x, z) <= max(d(x, y), d(y, z))` on every triple, after the
/// metric axioms.
pub fn is_ultrametric(x: &FiniteMetricSpace) -> Verdict {
    if let Verdict::Fail(v) = is_metric(x) {
        return Verdict::Fail(v);
    }
    let n = x.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (ij, ik, jk) = (x.rank(i, j), x.rank(i, k), x.rank(j, k));
                if ik > ij.max(jk) {
                    return Verdict::Fail(Violation::Ultrametric { i, j, k });
                }
                if ij > ik.max(jk) {
                    return Verdict::Fail(Violation::Ultrametric { i, j: k, k: j });
                }
                if jk > ij.max(ik) {
                    return Verdict::Fail(Violation::Ultrametric { i: j, j: i, k });
                }
            }
        }
    }
    Verdict::Pass
}

/// All matrix entries; contains 0 whenever the space is nonempty.
pub fn distance_set(x: &FiniteMetricSpace) -> BTreeSet<Rational> {
    x.values().iter().cloned().collect()
}

/// Index of the pair `i < j` in a tuple `⟨d_ij⟩_{i<j<n}` listed in
/// lexicographic order of `(i, j)`.
pub fn pair_slot(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn tuple_len(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Slot permutations induced by every permutation of `n` points.
fn slot_permutations(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .permutations(n)
        .map(|p| {
            let mut map = vec![0; tuple_len(n)];
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = if p[i] < p[j] { (p[i], p[j]) } else { (p[j], p[i]) };
                    map[pair_slot(n, i, j)] = pair_slot(n, a, b);
                }
            }
            map
        })
        .collect()
}

/// Canonicalizes distance tuples under relabeling of the `n` points: the
/// canonical form is the lexicographically least relabeled tuple.
pub struct Canonicalizer {
    n: usize,
    perms: Vec<Vec<usize>>,
}

impl Canonicalizer {
    pub fn new(n: usize) -> Self {
        let perms = if n > 3 { slot_permutations(n) } else { Vec::new() };
        Canonicalizer { n, perms }
    }

    pub fn canonical<T: Ord + Clone>(&self, tuple: &[T]) -> Vec<T> {
        debug_assert_eq!(tuple.len(), tuple_len(self.n));
        if self.n <= 3 {
            // the relabelings act as the full symmetric group on <= 3 slots
            let mut t = tuple.to_vec();
            t.sort();
            return t;
        }
        self.perms
            .iter()
            .map(|map| map.iter().map(|&s| tuple[s].clone()).collect::<Vec<T>>())
            .min()
            .expect("at least one permutation")
    }
}

/// `Spec_n`: distance tuples realized by `n`-tuples of points, stored in
/// canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSet {
    n: usize,
    tuples: BTreeSet<Vec<Rational>>,
}

impl SpectrumSet {
    /// Canonicalizes the given tuples.
    pub fn new<I>(n: usize, tuples: I) -> Result<Self, MetricsError>
    where
        I: IntoIterator<Item = Vec<Rational>>,
    {
        check_n(n)?;
        let canon = Canonicalizer::new(n);
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != tuple_len(n) {
                return Err(MetricsError::TupleLength {
                    found: t.len(),
                    expected: tuple_len(n),
                });
            }
            set.insert(canon.canonical(&t));
        }
        Ok(SpectrumSet { n, tuples: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Canonical representatives, sorted.
    pub fn tuples(&self) -> impl Iterator<Item = &Vec<Rational>> {
        self.tuples.iter()
    }

    /// Membership of an arbitrary (not necessarily canonical) tuple.
    pub fn contains(&self, tuple: &[Rational]) -> bool {
        tuple.len() == tuple_len(self.n) && self.tuples.contains(&Canonicalizer::new(self.n).canonical(tuple))
    }

    /// Every tuple in the orbit of every representative.
    pub fn expand(&self) -> BTreeSet<Vec<Rational>> {
        let perms = slot_permutations(self.n);
        self.tuples
            .iter()
            .flat_map(|t| {
                perms
                    .iter()
                    .map(move |map| map.iter().map(|&s| t[s].clone()).collect::<Vec<_>>())
            })
            .collect()
    }

    /// For `n = 2`, the underlying set of values.
    pub fn as_value_set(&self) -> Option<BTreeSet<Rational>> {
        (self.n == 2).then(|| self.tuples.iter().map(|t| t[0].clone()).collect())
    }
}

fn check_n(n: usize) -> Result<(), MetricsError> {
    if (2..=8).contains(&n) {
        Ok(())
    } else {
        Err(MetricsError::BadSpectrumSize(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrumOptions {
    /// Only tuples of pairwise distinct points.
    pub distinct_points: bool,
    /// Upper bound on the number of point tuples enumerated.
    pub budget: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            distinct_points: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// `Spec_n(X)`. The canonical form depends only on the multiset of points
/// in a tuple, so only multisets (or subsets, for distinct points) are
/// enumerated; the budget bounds that count.
pub fn spectrum(x: &FiniteMetricSpace, n: usize, opts: SpectrumOptions) -> Result<SpectrumSet, MetricsError> {
    check_n(n)?;
    let size = x.len() as u128;
    let needed = if opts.distinct_points {
        binomial(size, n as u128)
    } else {
        binomial(size + n as u128 - 1, n as u128)
    };
    if needed > u128::from(opts.budget) {
        return Err(MetricsError::BudgetExceeded {
            needed,
            budget: opts.budget,
        });
    }
    let canon = Canonicalizer::new(n);
    let mut ranks: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut tuple = vec![0u32; tuple_len(n)];
    let mut visit = |pts: &[usize]| {
        for i in 0..n {
            for j in i + 1..n {
                tuple[pair_slot(n, i, j)] = x.rank(pts[i], pts[j]);
            }
        }
        ranks.insert(canon.canonical(&tuple));
    };
    if opts.distinct_points {
        (0..x.len()).combinations(n).for_each(|c| visit(&c));
    } else {
        (0..x.len()).combinations_with_replacement(n).for_each(|c| visit(&c));
    }
    let tuples = ranks
        .into_iter()
        .map(|t| t.into_iter().map(|r| x.values()[r as usize].clone()).collect())
        .collect();
    Ok(SpectrumSet { n, tuples })
}

/// `Spec_m` induced by `Spec_n`: every restriction of every tuple to `m`
/// of its points.
pub fn spectrum_project(s: &SpectrumSet, m: usize) -> Result<SpectrumSet, MetricsError> {
    if m < 2 || m > s.n {
        return Err(MetricsError::BadProjection { m, n: s.n });
    }
    if m == s.n {
        return Ok(s.clone());
    }
    let n = s.n;
    let canon = Canonicalizer::new(m);
    let subsets: Vec<Vec<usize>> = (0..n).combinations(m).collect();
    let mut out = BTreeSet::new();
    for t in &s.tuples {
        for sub in &subsets {
            let mut r = Vec::with_capacity(tuple_len(m));
            for a in 0..m {
                for b in a + 1..m {
                    r.push(t[pair_slot(n, sub[a], sub[b])].clone());
                }
            }
            out.insert(canon.canonical(&r));
        }
    }
    Ok(SpectrumSet { n: m, tuples: out })
}

/// Greedy first-fit ε-net in label order: a point becomes a center when no
/// earlier center is within `eps`. Centers are pairwise more than `eps`
/// apart, so none can be dropped.
pub fn eps_net(x: &FiniteMetricSpace, eps: &Rational) -> Result<Vec<usize>, MetricsError> {
    if !eps.is_positive() {
        return Err(MetricsError::NonPositiveEps);
    }
    let limit = x.values().partition_point(|v| v <= eps) as u32;
    let mut centers: Vec<usize> = Vec::new();
    for p in 0..x.len() {
        if !centers.iter().any(|&c| x.rank(p, c) < limit) {
            centers.push(p);
        }
    }
    Ok(centers)
}

/// True when every point lies within `eps` of some point of `net`.
pub fn covers(x: &FiniteMetricSpace, net: &[usize], eps: &Rational) -> bool {
    (0..x.len()).all(|p| net.iter().any(|&c| x.dist(p, c) <= eps))
}

/// Counts how many pairs realize each distance; handy for reports.
pub fn distance_histogram(x: &FiniteMetricSpace) -> BTreeMap<Rational, usize> {
    let mut h = BTreeMap::new();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            *h.entry(x.dist(i, j).clone()).or_insert(0) += 1;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    fn triangle(a: &str, b: &str, c: &str) -> FiniteMetricSpace {
        let (a, b, c) = (rat(a), rat(b), rat(c));
        FiniteMetricSpace::from_fn(labels(3), |i, j| match (i, j) {
            (0, 1) => a.clone(),
            (0, 2) => b.clone(),
            _ => c.clone(),
        })
    }

    #[test]
    fn metric_examples() {
        let one = FiniteMetricSpace::from_fn(labels(1), |_, _| unreachable!());
        assert!(is_metric(&one).is_pass());
        assert!(is_metric(&triangle("1", "2", "3")).is_pass());
        let bad = triangle("1", "1", "3");
        match is_metric(&bad) {
            Verdict::Fail(Violation::Triangle { i, j, k }) => {
                assert!(*bad.dist(i, k) > bad.dist(i, j) + bad.dist(j, k));
            }
            other => panic!("expected a triangle witness, got {other:?}"),
        }
    }

    #[test]
    fn malformed_matrices() {
        let err = FiniteMetricSpace::from_matrix(labels(2), vec![vec![rat("0")], vec![rat("0"), rat("1")]]);
        assert!(matches!(err, Err(MetricsError::NotSquare { row: 0, .. })));
        let err = FiniteMetricSpace::from_matrix(labels(1), vec![]);
        assert!(matches!(err, Err(MetricsError::LabelCount { .. })));
        let dup = vec!["a".to_string(), "a".to_string()];
        let err = FiniteMetricSpace::from_matrix(dup, vec![vec![rat("0"); 2]; 2]);
        assert!(matches!(err, Err(MetricsError::DuplicateLabel(_))));
    }

    #[test]
    fn axiom_witnesses() {
        let m = |rows: [[&str; 2]; 2]| {
            FiniteMetricSpace::from_matrix(
                labels(2),
                rows.iter().map(|r| r.iter().map(|s| rat(s)).collect()).collect(),
            )
            .unwrap()
        };
        assert_eq!(
            is_metric(&m([["1", "1"], ["1", "0"]])),
            Verdict::Fail(Violation::NonZeroDiagonal { i: 0 })
        );
        assert_eq!(
            is_metric(&m([["0", "1"], ["2", "0"]])),
            Verdict::Fail(Violation::Asymmetric { i: 0, j: 1 })
        );
        assert_eq!(
            is_metric(&m([["0", "0"], ["0", "0"]])),
            Verdict::Fail(Violation::NonPositive { i: 0, j: 1 })
        );
    }

    #[test]
    fn ultrametric_examples() {
        assert!(!is_ultrametric(&triangle("3", "4", "5")).is_pass());
        assert!(is_ultrametric(&triangle("1", "2", "2")).is_pass());
        let two = FiniteMetricSpace::from_fn(labels(2), |_, _| rat("7"));
        assert!(is_ultrametric(&two).is_pass());
    }

    #[test]
    fn spectrum_of_equilateral_triangle() {
        let x = triangle("1", "1", "1");
        let s = spectrum(&x, 3, SpectrumOptions::default()).unwrap();
        let expected: BTreeSet<Vec<Rational>> = [["0", "0", "0"], ["0", "1", "1"], ["1", "1", "1"]]
            .iter()
            .map(|t| t.iter().map(|v| rat(v)).collect())
            .collect();
        assert_eq!(s.tuples().cloned().collect::<BTreeSet<_>>(), expected);
        assert!(s.contains(&[rat("1"), rat("0"), rat("1")]));
        let p = spectrum_project(&s, 2).unwrap();
        assert_eq!(p.as_value_set().unwrap(), [rat("0"), rat("1")].into_iter().collect());
        assert_eq!(spectrum_project(&s, 3).unwrap(), s);
        assert!(matches!(
            spectrum_project(&s, 4),
            Err(MetricsError::BadProjection { .. })
        ));
        assert!(matches!(
            spectrum_project(&s, 1),
            Err(MetricsError::BadProjection { .. })
        ));
    }

    #[test]
    fn spectrum_single_point_and_distinct_flag() {
        let one = FiniteMetricSpace::from_fn(labels(1), |_, _| unreachable!());
        let s = spectrum(&one, 3, SpectrumOptions::default()).unwrap();
        assert_eq!(s.tuples().cloned().collect::<Vec<_>>(), vec![vec![rat("0"); 3]]);
        let distinct = SpectrumOptions {
            distinct_points: true,
            ..Default::default()
        };
        assert!(spectrum(&one, 3, distinct).unwrap().is_empty());
        let s = spectrum(&triangle("1", "2", "2"), 3, distinct).unwrap();
        assert_eq!(
            s.tuples().cloned().collect::<Vec<_>>(),
            vec![vec![rat("1"), rat("2"), rat("2")]]
        );
    }

    #[test]
    fn spectrum_budget_guard() {
        let x = FiniteMetricSpace::from_fn(labels(20), |_, _| rat("1"));
        let tight = SpectrumOptions {
            budget: 100,
            ..Default::default()
        };
        assert!(matches!(
            spectrum(&x, 3, tight),
            Err(MetricsError::BudgetExceeded { .. })
        ));
        assert!(matches!(
            spectrum(&x, 9, SpectrumOptions::default()),
            Err(MetricsError::BadSpectrumSize(9))
        ));
    }

    #[test]
    fn pair_slots_are_lexicographic() {
        let n = 5;
        let mut expected = 0;
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(pair_slot(n, i, j), expected);
                expected += 1;
            }
        }
    }

    #[test]
    fn canonical_form_for_four_points_is_orbit_minimum() {
        let c = Canonicalizer::new(4);
        let t: Vec<u32> = vec![5, 4, 3, 2, 1, 0];
        let orbit: BTreeSet<Vec<u32>> = slot_permutations(4)
            .iter()
            .map(|m| m.iter().map(|&s| t[s]).collect())
            .collect();
        assert_eq!(&c.canonical(&t), orbit.iter().next().unwrap());
        for u in &orbit {
            assert_eq!(c.canonical(u), c.canonical(&t));
        }
    }

    #[test]
    fn eps_net_examples() {
        let x = triangle("1", "2", "2");
        assert_eq!(eps_net(&x, &rat("2")).unwrap(), vec![0]);
        assert_eq!(eps_net(&x, &rat("1/2")).unwrap(), vec![0, 1, 2]);
        assert_eq!(eps_net(&x, &rat("1")).unwrap(), vec![0, 2]);
        assert!(matches!(eps_net(&x, &rat("0")), Err(MetricsError::NonPositiveEps)));
    }

    #[test]
    fn scaling_multiplies_every_distance() {
        let x = triangle("1", "2", "2").scaled(&rat("3/2")).unwrap();
        assert_eq!(x.dist(0, 1), &rat("3/2"));
        assert_eq!(x.dist(1, 2), &rat("3"));
        assert!(triangle("1", "1", "1").scaled(&rat("0")).is_err());
    }

    fn random_space(max: usize) -> impl Strategy<Value = FiniteMetricSpace> {
        (1..max).prop_flat_map(|n| {
            prop::collection::vec(1u64..5, tuple_len(n)).prop_map(move |vals| {
                FiniteMetricSpace::from_fn(labels(n), |i, j| Rational::from_integer(vals[pair_slot(n, i, j)]))
            })
        })
    }

    /// Naive triangle check on every ordered triple, for comparison.
    fn naive_metric(x: &FiniteMetricSpace) -> bool {
        let n = x.len();
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| *x.dist(i, k) <= x.dist(i, j) + x.dist(j, k))))
    }

    proptest! {
        #[test]
        fn metric_check_agrees_with_naive(x in random_space(7)) {
            prop_assert_eq!(is_metric(&x).is_pass(), naive_metric(&x));
        }

        #[test]
        fn spec2_is_distance_set(x in random_space(7)) {
            let s = spectrum(&x, 2, SpectrumOptions::default()).unwrap();
            prop_assert_eq!(s.as_value_set().unwrap(), distance_set(&x));
        }

        #[test]
        fn spectrum_invariant_under_relabeling(x in random_space(6), seed in any::<u64>()) {
            let n = x.len();
            let mut perm: Vec<usize> = (0..n).collect();
            // Fisher-Yates driven by the seed
            let mut state = seed;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (state >> 33) as usize % (i + 1));
            }
            let y = FiniteMetricSpace::from_fn(labels(n), |i, j| x.dist(perm[i], perm[j]).clone());
            for k in 2..=4 {
                prop_assert_eq!(
                    spectrum(&x, k, SpectrumOptions::default()).unwrap(),
                    spectrum(&y, k, SpectrumOptions::default()).unwrap()
                );
            }
        }

        #[test]
        fn projection_matches_direct_spectrum(x in random_space(6)) {
            for n in 3..=4 {
                let s = spectrum(&x, n, SpectrumOptions::default()).unwrap();
                for m in 2..n {
                    prop_assert_eq!(
                        spectrum_project(&s, m).unwrap(),
                        spectrum(&x, m, SpectrumOptions::default()).unwrap()
                    );
                }
            }
        }

        #[test]
        fn greedy_net_covers_and_is_minimal(x in random_space(8), e in 1u64..5) {
            let eps = Rational::from_integer(e);
            let net = eps_net(&x, &eps).unwrap();
            prop_assert!(covers(&x, &net, &eps));
            for &c in &net {
                let rest: Vec<usize> = net.iter().copied().filter(|&o| o != c).collect();
                prop_assert!(!covers(&x, &rest, &eps));
            }
        }
    }
}
