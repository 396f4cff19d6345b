//! Realizing a prescribed set of triangles as the 3-point spectrum of a
//! `k`-point space.
//!
//! A `k`-point space is an edge coloring of `K_k` by distances, and its
//! distinct-point 3-point spectrum is the set of sorted color triples of its
//! triangles. [`realize_spec3`] searches those colorings by backtracking;
//! [`brute_force_oracle`] enumerates them all and exists to cross-check it.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exact::Rational;
use crate::metrics::{pair_slot, tuple_len, FiniteMetricSpace};

pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;
pub const ORACLE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectraError {
    #[error("triple ({0}, {1}, {2}) contains a non-positive distance")]
    NonPositive(Rational, Rational, Rational),
    #[error("triple ({0}, {1}, {2}) violates the triangle inequality")]
    NotMetricTriple(Rational, Rational, Rational),
    #[error("k = {0} is too small; a triangle needs at least 3 points")]
    KTooSmall(usize),
    #[error("search explored {explored} nodes without finishing (budget {budget})")]
    BudgetExceeded { explored: u64, budget: u64 },
    #[error("{0} distinct distances; the search handles at most 255")]
    AlphabetTooLarge(usize),
    #[error("oracle would enumerate {colorings} colorings, above the limit {limit}")]
    OracleTooLarge { colorings: u128, limit: u128 },
}

/// Sorted metric triples `a <= b <= c <= a + b` of positive distances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TriangleSet {
    triples: BTreeSet<[Rational; 3]>,
}

impl TriangleSet {
    /// Sorts each triple, then rejects non-positive entries and triangle
    /// inequality failures.
    pub fn new<I>(triples: I) -> Result<Self, SpectraError>
    where
        I: IntoIterator<Item = [Rational; 3]>,
    {
        let mut set = BTreeSet::new();
        for mut t in triples {
            t.sort();
            let [a, b, c] = &t;
            if a.is_zero() {
                return Err(SpectraError::NonPositive(a.clone(), b.clone(), c.clone()));
            }
            if *c > a + b {
                return Err(SpectraError::NotMetricTriple(a.clone(), b.clone(), c.clone()));
            }
            set.insert(t);
        }
        Ok(TriangleSet { triples: set })
    }

    pub fn triples(&self) -> &BTreeSet<[Rational; 3]> {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Distances occurring in some triple, ascending.
    pub fn alphabet(&self) -> Vec<Rational> {
        self.triples
            .iter()
            .flat_map(|t| t.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Every triple multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self, SpectraError> {
        TriangleSet::new(
            self.triples
                .iter()
                .map(|t| [&t[0] * factor, &t[1] * factor, &t[2] * factor]),
        )
    }
}

/// An edge coloring of `K_k` by positive distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredClique {
    k: usize,
    colors: Vec<Rational>,
}

impl ColoredClique {
    /// `colors` is indexed by [`pair_slot`].
    pub fn new(k: usize, colors: Vec<Rational>) -> Self {
        assert_eq!(colors.len(), tuple_len(k));
        ColoredClique { k, colors }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn color(&self, i: usize, j: usize) -> &Rational {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        &self.colors[pair_slot(self.k, a, b)]
    }

    /// `(i, j, color)` for `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        let k = self.k;
        (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j, self.color(i, j))))
    }

    /// Sorted color triples of all triangles.
    pub fn triangle_triples(&self) -> BTreeSet<[Rational; 3]> {
        let mut out = BTreeSet::new();
        for a in 0..self.k {
            for b in a + 1..self.k {
                for c in b + 1..self.k {
                    let mut t = [
                        self.color(a, b).clone(),
                        self.color(a, c).clone(),
                        self.color(b, c).clone(),
                    ];
                    t.sort();
                    out.insert(t);
                }
            }
        }
        out
    }

    /// Points `v0 … v{k-1}` with the colors as distances.
    pub fn to_space(&self) -> FiniteMetricSpace {
        let labels = (0..self.k).map(|i| format!("v{i}")).collect();
        FiniteMetricSpace::from_fn(labels, |i, j| self.color(i, j).clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realization {
    Sat(ColoredClique),
    Unsat,
}

impl Realization {
    pub fn is_sat(&self) -> bool {
        matches!(self, Realization::Sat(_))
    }

    pub fn witness(&self) -> Option<&ColoredClique> {
        match self {
            Realization::Sat(w) => Some(w),
            Realization::Unsat => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of search nodes (edge assignments) explored.
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

fn binomial3(k: usize) -> usize {
    if k < 3 {
        0
    } else {
        k * (k - 1) * (k - 2) / 6
    }
}

/// Target triples as color indices, with a dense lookup from index triples
/// to target ids.
struct Encoded {
    alphabet: Vec<Rational>,
    width: usize,
    // sorted (a, b, c) -> target id
    lookup: Vec<Option<u32>>,
    targets: usize,
}

impl Encoded {
    fn new(t: &TriangleSet) -> Self {
        let alphabet = t.alphabet();
        let index: BTreeMap<&Rational, usize> = alphabet.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let width = alphabet.len();
        let mut lookup = vec![None; width * width * width];
        for (id, [a, b, c]) in t.triples().iter().enumerate() {
            let key = (index[a] * width + index[b]) * width + index[c];
            lookup[key] = Some(id as u32);
        }
        Encoded {
            width,
            targets: t.len(),
            lookup,
            alphabet,
        }
    }

    fn target_of(&self, x: u8, y: u8, z: u8) -> Option<u32> {
        let mut t = [x as usize, y as usize, z as usize];
        t.sort_unstable();
        self.lookup[(t[0] * self.width + t[1]) * self.width + t[2]]
    }
}

struct Search<'a> {
    k: usize,
    enc: &'a Encoded,
    // edges in assignment order: (i, j) with j ascending, then i ascending
    order: Vec<(usize, usize)>,
    color: Vec<u8>,
    hits: Vec<u32>,
    covered: usize,
    explored: u64,
    budget: u64,
}

impl Search<'_> {
    fn get(&self, i: usize, j: usize) -> u8 {
        self.color[pair_slot(self.k, i.min(j), i.max(j))]
    }

    /// Number of triangles still open after edge `pos` has been assigned.
    fn open_after(&self, pos: usize) -> usize {
        let (i, j) = self.order[pos];
        // triangles (a, b, j') closed so far: all with j' < j, plus (a, b, j) for b <= i
        binomial3(self.k) - binomial3(j) - (i * (i + 1) / 2)
    }

    fn breaks_symmetry(&self, i: usize, j: usize) -> bool {
        // first triangle sorted in edge order (0,1), (0,2), (1,2)
        if j == 2 {
            return match i {
                0 => self.get(0, 2) < self.get(0, 1),
                1 => self.get(1, 2) < self.get(0, 2),
                _ => false,
            };
        }
        // rows against {0, 1, 2} non-decreasing for vertices 3, 4, …
        if j >= 4 && i == 2 {
            let prev = [self.get(0, j - 1), self.get(1, j - 1), self.get(2, j - 1)];
            let cur = [self.get(0, j), self.get(1, j), self.get(2, j)];
            return cur < prev;
        }
        false
    }

    fn run(&mut self, pos: usize) -> Result<bool, SpectraError> {
        if pos == self.order.len() {
            return Ok(self.covered == self.enc.targets);
        }
        let (i, j) = self.order[pos];
        let slot = pair_slot(self.k, i, j);
        for c in 0..self.enc.width as u8 {
            self.explored += 1;
            if self.explored > self.budget {
                return Err(SpectraError::BudgetExceeded {
                    explored: self.explored,
                    budget: self.budget,
                });
            }
            self.color[slot] = c;
            if self.breaks_symmetry(i, j) {
                continue;
            }
            // edge (i, j) closes the triangles (a, i, j) for a < i
            let mut closed: Vec<u32> = Vec::with_capacity(i);
            let mut ok = true;
            for a in 0..i {
                match self.enc.target_of(self.get(a, i), self.get(a, j), c) {
                    Some(id) => closed.push(id),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                for &id in &closed {
                    if self.hits[id as usize] == 0 {
                        self.covered += 1;
                    }
                    self.hits[id as usize] += 1;
                }
                let missing = self.enc.targets - self.covered;
                if missing <= self.open_after(pos) && self.run(pos + 1)? {
                    return Ok(true);
                }
                for &id in &closed {
                    self.hits[id as usize] -= 1;
                    if self.hits[id as usize] == 0 {
                        self.covered -= 1;
                    }
                }
            }
        }
        Ok(false)
    }
}

/// Searches for a coloring of `K_k` whose triangle triples are exactly `t`.
///
/// Colors come from the distances occurring in `t`. The search fixes the
/// order of the colors on triangle `(0, 1, 2)` and orders the remaining
/// vertices by their colors towards `0, 1, 2`; both only remove vertex
/// relabelings, so `Unsat` is a proof for this `k`. The witness is the
/// first one in edge order with colors tried in increasing order.
pub fn realize_spec3(t: &TriangleSet, k: usize, opts: SearchOptions) -> Result<Realization, SpectraError> {
    if k < 3 {
        return Err(SpectraError::KTooSmall(k));
    }
    if t.is_empty() || binomial3(k) < t.len() {
        return Ok(Realization::Unsat);
    }
    let enc = Encoded::new(t);
    if enc.width > u8::MAX as usize {
        return Err(SpectraError::AlphabetTooLarge(enc.width));
    }
    let order: Vec<(usize, usize)> = (1..k).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let mut search = Search {
        k,
        enc: &enc,
        order,
        color: vec![0; tuple_len(k)],
        hits: vec![0; enc.targets],
        covered: 0,
        explored: 0,
        budget: opts.budget,
    };
    if search.run(0)? {
        let colors = search.color.iter().map(|&c| enc.alphabet[c as usize].clone()).collect();
        Ok(Realization::Sat(ColoredClique::new(k, colors)))
    } else {
        Ok(Realization::Unsat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UptoResult {
    Found { k: usize, witness: ColoredClique },
    UnsatUpTo(usize),
}

/// Least `k` in `3..=k_max` for which `t` is realizable.
pub fn realize_spec3_upto(t: &TriangleSet, k_max: usize, opts: SearchOptions) -> Result<UptoResult, SpectraError> {
    if k_max < 3 {
        return Err(SpectraError::KTooSmall(k_max));
    }
    for k in 3..=k_max {
        if let Realization::Sat(witness) = realize_spec3(t, k, opts)? {
            return Ok(UptoResult::Found { k, witness });
        }
    }
    Ok(UptoResult::UnsatUpTo(k_max))
}

/// Enumerates every coloring of `K_k` over the alphabet of `t`, without
/// pruning or symmetry breaking.
pub fn brute_force_oracle(t: &TriangleSet, k: usize) -> Result<Realization, SpectraError> {
    if k < 3 {
        return Err(SpectraError::KTooSmall(k));
    }
    let alphabet = t.alphabet();
    let edges = tuple_len(k);
    let base = alphabet.len() as u128;
    let colorings = base.checked_pow(edges as u32).unwrap_or(u128::MAX);
    if colorings > ORACLE_LIMIT {
        return Err(SpectraError::OracleTooLarge {
            colorings,
            limit: ORACLE_LIMIT,
        });
    }
    let target: BTreeSet<[usize; 3]> = t
        .triples()
        .iter()
        .map(|tr| {
            tr.clone()
                .map(|v| alphabet.binary_search(&v).expect("alphabet covers triples"))
        })
        .collect();
    let triangles: Vec<[usize; 3]> = (0..k)
        .flat_map(|a| (a + 1..k).flat_map(move |b| (b + 1..k).map(move |c| [a, b, c])))
        .map(|[a, b, c]| [pair_slot(k, a, b), pair_slot(k, a, c), pair_slot(k, b, c)])
        .collect();
    let mut digits = vec![0usize; edges];
    for _ in 0..colorings {
        let mut seen = BTreeSet::new();
        let mut ok = true;
        for tri in &triangles {
            let mut key = tri.map(|s| digits[s]);
            key.sort_unstable();
            if !target.contains(&key) {
                ok = false;
                break;
            }
            seen.insert(key);
        }
        if ok && seen.len() == target.len() {
            let colors = digits.iter().map(|&d| alphabet[d].clone()).collect();
            return Ok(Realization::Sat(ColoredClique::new(k, colors)));
        }
        // next coloring, little-endian in base |alphabet|
        for d in digits.iter_mut() {
            *d += 1;
            if *d < alphabet.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(Realization::Unsat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::metrics::{is_metric, spectrum, SpectrumOptions};

    fn tri(ts: &[[&str; 3]]) -> TriangleSet {
        TriangleSet::new(ts.iter().map(|t| t.map(rat))).unwrap()
    }

    fn check_witness(t: &TriangleSet, w: &ColoredClique) {
        assert_eq!(&w.triangle_triples(), t.triples());
        let x = w.to_space();
        assert!(is_metric(&x).is_pass());
        let distinct = SpectrumOptions {
            distinct_points: true,
            ..Default::default()
        };
        let s = spectrum(&x, 3, distinct).unwrap();
        let got: BTreeSet<[Rational; 3]> = s.tuples().map(|v| [v[0].clone(), v[1].clone(), v[2].clone()]).collect();
        assert_eq!(&got, t.triples());
    }

    #[test]
    fn monochromatic_triangle() {
        let t = tri(&[["1", "1", "1"]]);
        for k in 3..=7 {
            let r = realize_spec3(&t, k, SearchOptions::default()).unwrap();
            let w = r.witness().expect("constant coloring works");
            assert!(w.edges().all(|(_, _, c)| *c == rat("1")));
            check_witness(&t, w);
        }
    }

    #[test]
    fn degenerate_triple_is_allowed() {
        let t = tri(&[["2", "3", "1"]]);
        assert_eq!(t.triples().iter().next().unwrap(), &[rat("1"), rat("2"), rat("3")]);
        let r = realize_spec3(&t, 3, SearchOptions::default()).unwrap();
        check_witness(&t, r.witness().unwrap());
        // K4 splits into three perfect matchings, one per color
        let r4 = realize_spec3(&t, 4, SearchOptions::default()).unwrap();
        check_witness(&t, r4.witness().unwrap());
        // with five points some vertex repeats a color on two of its edges
        assert_eq!(
            realize_spec3(&t, 5, SearchOptions::default()).unwrap(),
            Realization::Unsat
        );
        assert_eq!(brute_force_oracle(&t, 5).unwrap(), Realization::Unsat);
    }

    #[test]
    fn non_metric_triples_are_rejected() {
        assert!(matches!(
            TriangleSet::new([["1", "1", "3"].map(rat)]),
            Err(SpectraError::NotMetricTriple(..))
        ));
        assert!(matches!(
            TriangleSet::new([["0", "1", "1"].map(rat)]),
            Err(SpectraError::NonPositive(..))
        ));
    }

    #[test]
    fn small_k_is_an_error() {
        let t = tri(&[["1", "1", "1"]]);
        assert_eq!(
            realize_spec3(&t, 2, SearchOptions::default()),
            Err(SpectraError::KTooSmall(2))
        );
        assert_eq!(brute_force_oracle(&t, 1), Err(SpectraError::KTooSmall(1)));
    }

    #[test]
    fn triangle_count_prefilter() {
        let t = tri(&[["1", "1", "1"], ["1", "1", "2"]]);
        assert_eq!(
            realize_spec3(&t, 3, SearchOptions::default()).unwrap(),
            Realization::Unsat
        );
        assert_eq!(brute_force_oracle(&t, 3).unwrap(), Realization::Unsat);
    }

    #[test]
    fn three_triangle_types() {
        let t = tri(&[["1", "1", "1"], ["1", "1", "2"], ["2", "2", "1"]]);
        // least k by plain enumeration
        let oracle_k = (3..=5).find(|&k| brute_force_oracle(&t, k).unwrap().is_sat());
        assert_eq!(oracle_k, Some(4));
        match realize_spec3_upto(&t, 6, SearchOptions::default()).unwrap() {
            UptoResult::Found { k, witness } => {
                assert_eq!(k, 4);
                check_witness(&t, &witness);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn agreement_over_all_binary_alphabet_sets() {
        let all = [["1", "1", "1"], ["1", "1", "2"], ["1", "2", "2"], ["2", "2", "2"]];
        for mask in 1u32..16 {
            let chosen: Vec<[&str; 3]> = (0..4).filter(|b| mask >> b & 1 == 1).map(|b| all[b]).collect();
            let t = tri(&chosen);
            for k in 3..=4 {
                let fast = realize_spec3(&t, k, SearchOptions::default()).unwrap();
                let slow = brute_force_oracle(&t, k).unwrap();
                assert_eq!(fast.is_sat(), slow.is_sat(), "mask {mask:04b}, k {k}");
                if let Realization::Sat(w) = &fast {
                    check_witness(&t, w);
                }
            }
        }
    }

    #[test]
    fn scaling_preserves_verdicts() {
        let t = tri(&[["1", "1", "1"], ["1", "1", "2"], ["2", "2", "1"]]);
        let s = t.scaled(&rat("3/7")).unwrap();
        for k in 3..=5 {
            assert_eq!(
                realize_spec3(&t, k, SearchOptions::default()).unwrap().is_sat(),
                realize_spec3(&s, k, SearchOptions::default()).unwrap().is_sat()
            );
        }
    }

    #[test]
    fn budget_guard_trips() {
        let t = tri(&[["1", "1", "1"], ["1", "1", "2"], ["2", "2", "3"]]);
        let tiny = SearchOptions { budget: 10 };
        assert!(matches!(
            realize_spec3(&t, 6, tiny),
            Err(SpectraError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn oracle_limit() {
        let t = tri(&[["1", "2", "3"], ["2", "2", "2"], ["3", "3", "3"]]);
        assert!(matches!(
            brute_force_oracle(&t, 7),
            Err(SpectraError::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn witness_is_deterministic() {
        let t = tri(&[["1", "1", "1"], ["1", "2", "2"]]);
        let a = realize_spec3(&t, 5, SearchOptions::default()).unwrap();
        let b = realize_spec3(&t, 5, SearchOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
