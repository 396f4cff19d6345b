//! Named checks over constructor outputs, collected into reports.
//!
//! Each audit recomputes its claims from the inputs rather than trusting
//! the builder, so a report is an independent second opinion on a space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::constructors::{DistanceTarget, GlueSchedule, TreeSpace};
use crate::exact::{pi_of_word, two_pow_neg, Rational};
use crate::metrics::{covers, distance_set, is_metric, is_ultrametric, FiniteMetricSpace, Verdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Witness or summary; empty when there is nothing to add.
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_verdict(name: &str, x: &FiniteMetricSpace, v: Verdict) -> Self {
        match v {
            Verdict::Pass => Check::new(name, true, ""),
            Verdict::Fail(w) => Check::new(name, false, w.describe(x)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub subject: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report {
            subject: subject.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "report: {}", self.subject)?;
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "  {tag} {}", c.name)?;
            } else {
                writeln!(f, "  {tag} {} — {}", c.name, c.detail)?;
            }
        }
        let verdict = if self.all_pass() { "PASS" } else { "FAIL" };
        write!(f, "overall: {verdict}")
    }
}

pub fn render_set(values: &BTreeSet<Rational>) -> String {
    let parts: Vec<String> = values.iter().map(Rational::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn set_equality(name: &str, got: &BTreeSet<Rational>, want: &BTreeSet<Rational>) -> Check {
    if got == want {
        Check::new(name, true, render_set(got))
    } else {
        let missing: BTreeSet<Rational> = want.difference(got).cloned().collect();
        let extra: BTreeSet<Rational> = got.difference(want).cloned().collect();
        Check::new(
            name,
            false,
            format!("missing {}, unexpected {}", render_set(&missing), render_set(&extra)),
        )
    }
}

/// Metric axioms, and the ultrametric inequality when asked.
pub fn audit_space(x: &FiniteMetricSpace, ultrametric: bool) -> Report {
    let mut r = Report::new(format!("{}-point space", x.len()));
    r.push(Check::from_verdict("metric", x, is_metric(x)));
    if ultrametric {
        r.push(Check::from_verdict("ultrametric", x, is_ultrametric(x)));
    }
    r
}

/// Discrete ultrametric against its target `A`.
pub fn audit_lemma1(x: &FiniteMetricSpace, target: &DistanceTarget) -> Report {
    let mut r = audit_space(x, true);
    r.subject = format!("discrete ultrametric on {} points", x.len());
    r.push(set_equality(
        "distance set is A ∪ {0}",
        &distance_set(x),
        &target.with_zero(),
    ));
    r
}

/// Number of distinct distances `>= b`.
pub fn count_at_least(x: &FiniteMetricSpace, b: &Rational) -> usize {
    x.values().iter().filter(|v| *v >= b).count()
}

/// Cantor ultrametric against its sequence; `probes` are thresholds `b > 0`
/// for the large-distance count.
pub fn audit_cantor(x: &FiniteMetricSpace, d_seq: &[Rational], depth: usize, probes: &[Rational]) -> Report {
    let mut r = audit_space(x, true);
    r.subject = format!("Cantor ultrametric, depth {depth}");
    let mut want: BTreeSet<Rational> = d_seq[..depth].iter().cloned().collect();
    want.insert(Rational::zero());
    r.push(set_equality(
        "distance set is {d_0..d_(depth-1)} ∪ {0}",
        &distance_set(x),
        &want,
    ));
    let bad: Vec<String> = probes
        .iter()
        .filter_map(|b| {
            let got = count_at_least(x, b);
            let expected = d_seq[..depth].iter().filter(|d| *d >= b).count();
            (got != expected).then(|| format!("b={b}: {got} != {expected}"))
        })
        .collect();
    r.push(Check::new(
        "large-distance counts",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} thresholds", probes.len())
        } else {
            bad.join("; ")
        },
    ));
    r
}

/// All checks on a tree space.
pub fn audit_tree_space(ts: &TreeSpace) -> Report {
    let x = ts.space();
    let branches = ts.branches();
    let n = branches.len();
    let mut r = Report::new(format!("tree space, depth {}, {} branches", ts.tree().depth(), n));
    r.push(Check::from_verdict("metric", x, is_metric(x)));

    let pis: Vec<Rational> = branches.iter().map(|b| pi_of_word(&b.s).to_rational()).collect();
    // pairs whose maximal mutual predecessor has first coordinate 0^k
    let zero_pred = |i: usize, j: usize| {
        let k = branches[i].common_prefix_len(&branches[j]);
        branches[i].s.prefix(k).is_all_zero()
    };
    let mut zero = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            zero[i * n + j] = i != j && zero_pred(i, j);
        }
    }

    let mut case1 = Ok(0usize);
    'outer: for i in 0..n {
        for j in i + 1..n {
            if !zero[i * n + j] {
                continue;
            }
            for k in j + 1..n {
                if !(zero[i * n + k] && zero[j * n + k]) {
                    continue;
                }
                let mut sides = [x.dist(i, j), x.dist(i, k), x.dist(j, k)];
                sides.sort();
                if sides[1] != sides[2] {
                    case1 = Err(format!(
                        "{}, {}, {}: sides {}, {}, {}",
                        x.labels()[i],
                        x.labels()[j],
                        x.labels()[k],
                        sides[0],
                        sides[1],
                        sides[2]
                    ));
                    break 'outer;
                }
                case1 = case1.map(|c| c + 1);
            }
        }
    }
    r.push(match case1 {
        Ok(c) => Check::new(
            "zero-predecessor triangles are ultrametric",
            true,
            format!("{c} triangles"),
        ),
        Err(w) => Check::new("zero-predecessor triangles are ultrametric", false, w),
    });

    let mut bound = Ok(0usize);
    'pairs: for i in 0..n {
        for j in i + 1..n {
            if zero[i * n + j] {
                continue;
            }
            let d = x.dist(i, j);
            let lo = pis[i].abs_diff(&pis[j]);
            let hi = &pis[i] + &pis[j];
            if !(lo <= *d && *d <= hi) {
                bound = Err(format!(
                    "{}, {}: {} <= {} <= {} fails",
                    x.labels()[i],
                    x.labels()[j],
                    lo,
                    d,
                    hi
                ));
                break 'pairs;
            }
            bound = bound.map(|c| c + 1);
        }
    }
    r.push(match bound {
        Ok(c) => Check::new(
            "|π(α1) − π(α2)| <= d <= π(α1) + π(α2) off the zero chain",
            true,
            format!("{c} pairs"),
        ),
        Err(w) => Check::new("|π(α1) − π(α2)| <= d <= π(α1) + π(α2) off the zero chain", false, w),
    });

    let dist = distance_set(x);
    let leaf_values: BTreeSet<Rational> = pis.iter().cloned().collect();
    let missing: BTreeSet<Rational> = leaf_values.difference(&dist).cloned().collect();
    r.push(Check::new(
        "distance set contains π of every branch of T*",
        missing.is_empty(),
        if missing.is_empty() {
            format!("{} values", leaf_values.len())
        } else {
            format!("missing {}", render_set(&missing))
        },
    ));

    let mut allowed = leaf_values.clone();
    allowed.insert(Rational::zero());
    for e in ts.choices().epsilons() {
        allowed.insert(e.to_rational());
    }
    for v in ts.choices().d_values() {
        allowed.insert(v.to_rational());
    }
    let outside: BTreeSet<Rational> = dist.difference(&allowed).cloned().collect();
    let image_ok = allowed.iter().all(|v| v.is_zero() || leaf_values.contains(v));
    r.push(Check::new(
        "distance set within π-values, ε and d_s, all in π[T*]",
        outside.is_empty() && image_ok,
        if !outside.is_empty() {
            format!("unexpected {}", render_set(&outside))
        } else if !image_ok {
            "an ε or d_s value is not π of a branch".to_string()
        } else {
            String::new()
        },
    ));

    r.push(separability(ts));
    r
}

/// `d(x, chosen(x↾n)) < 2^(-n+1)` for every branch `x` and `n <= N`.
pub fn separability(ts: &TreeSpace) -> Check {
    const NAME: &str = "d(x, chosen(x↾n)) < 2^(1-n)";
    let x = ts.space();
    let mut checked = 0usize;
    let mut failures = 0usize;
    let mut first: Option<String> = None;
    for (i, branch) in ts.branches().iter().enumerate() {
        for n in 0..=ts.tree().depth() {
            let node = branch.prefix(n);
            let rep = ts.representative(&node).expect("a branch passes through its prefix");
            let bound = if n == 0 {
                Rational::from_integer(2)
            } else {
                two_pow_neg(n as u32 - 1).to_rational()
            };
            checked += 1;
            if *x.dist(i, rep) >= bound {
                failures += 1;
                first.get_or_insert_with(|| {
                    format!(
                        "x={}, n={}, chosen={}, d={} not < {}",
                        x.labels()[i],
                        n,
                        x.labels()[rep],
                        x.dist(i, rep),
                        bound
                    )
                });
            }
        }
    }
    match first {
        None => Check::new(NAME, true, format!("{checked} (x, n) pairs")),
        Some(w) => Check::new(NAME, false, format!("{failures} of {checked} pairs fail; first: {w}")),
    }
}

/// Whether every dyadic shell `[2^-(i+1), 2^-i)`, `i < N`, holds the π-value
/// of some branch. The separability bound is only guaranteed under this
/// condition; reports use it to explain failures.
pub fn shells_dense(ts: &TreeSpace) -> bool {
    let depth = ts.tree().depth();
    let pis: BTreeSet<Rational> = ts.branches().iter().map(|b| pi_of_word(&b.s).to_rational()).collect();
    (0..depth).all(|i| {
        let lo = two_pow_neg(i as u32 + 1).to_rational();
        let hi = two_pow_neg(i as u32).to_rational();
        pis.range(lo..hi).next().is_some()
    })
}

/// Tree checks plus coverage by the canonical net for each `eps`.
pub fn audit_compact(ts: &TreeSpace, eps: &[Rational]) -> Report {
    let mut r = audit_tree_space(ts);
    r.subject = format!("compact {}", r.subject);
    for e in eps {
        let net = ts.canonical_net(e);
        let ok = covers(ts.space(), &net, e);
        r.push(Check::new(
            &format!("canonical net covers at ε={e}"),
            ok,
            format!("n0={}, {} points", ts.net_depth(e), net.len()),
        ));
    }
    r
}

/// Glued space against its schedule.
pub fn audit_glue(x: &FiniteMetricSpace, schedule: &GlueSchedule) -> Report {
    let mut r = audit_space(x, false);
    r.subject = format!("glued space, {} pieces", schedule.pieces.len());
    let mut union = BTreeSet::new();
    for p in &schedule.pieces {
        union.extend(distance_set(&p.space));
    }
    r.push(set_equality(
        "distance set is the union of the pieces'",
        &distance_set(x),
        &union,
    ));
    r
}

/// Occurrence count of each distance over unordered pairs.
pub fn histogram_lines(x: &FiniteMetricSpace) -> Vec<String> {
    let mut counts: BTreeMap<&Rational, usize> = BTreeMap::new();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            *counts.entry(x.dist(i, j)).or_default() += 1;
        }
    }
    counts.into_iter().map(|(v, c)| format!("{v}\t{c}")).collect()
}
