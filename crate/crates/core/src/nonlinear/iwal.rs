//! Importance-weighted active learning for extracting trees and forests.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attacks::{ExtractionReport, Outcome, RunMeter};
use crate::error::{Error, Result};
use crate::geometry::ClassId;
use crate::nonlinear::eat::agreement;
use crate::nonlinear::forest::{rf_train_weighted, RandomForest};
use crate::nonlinear::tree::{dt_train_weighted, DecisionTree, TreeParams};
use crate::oracle::Oracle;

/// A labelled instance together with the probability it was queried with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weighted {
    pub x: Vec<f64>,
    pub y: ClassId,
    pub p: f64,
}

fn log_term(n: u64, c0: f64) -> f64 {
    c0 * (n as f64).ln() / (n - 1) as f64
}

/// `mu(n) = sqrt(c0 ln n / (n-1)) + c0 ln n / (n-1)`.
pub fn iwal_threshold(n: u64, c0: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("IWAL threshold needs n >= 2"));
    }
    if !(c0 >= 0.0) {
        return Err(Error::invalid("c0 must be nonnegative"));
    }
    let b = log_term(n, c0);
    Ok(b.sqrt() + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryProbability {
    pub s: f64,
    /// No root in `(0, 1]`; `s` was clamped to the nearer endpoint.
    pub clamped: bool,
}

/// Positive solution `s` of
/// `G = c1/(sqrt(s) - c1 + 1) * A + c2/(sqrt(s) - c2 + 1) * B`
/// with `A = sqrt(c0 ln n/(n-1))` and `B = c0 ln n/(n-1)`.
pub fn iwal_solve_s(g: f64, n: u64, c0: f64, c1: f64, c2: f64) -> Result<QueryProbability> {
    iwal_threshold(n, c0)?;
    if !(c1 >= 1.0 && c2 >= 1.0) || g.is_nan() {
        return Err(Error::invalid("IWAL needs c1, c2 >= 1 and a numeric G"));
    }
    let b = log_term(n, c0);
    let a = b.sqrt();
    if a + b == 0.0 {
        // Zero constant: any positive gap is decisive.
        return Ok(QueryProbability { s: f64::MIN_POSITIVE, clamped: true });
    }
    if g <= a + b {
        return Ok(QueryProbability { s: 1.0, clamped: g < a + b });
    }
    if c1 == 1.0 && c2 == 1.0 {
        let s = ((a + b) / g).powi(2);
        return Ok(if s > 0.0 {
            QueryProbability { s, clamped: false }
        } else {
            QueryProbability { s: f64::MIN_POSITIVE, clamped: true }
        });
    }
    // Right-hand side is decreasing in t = sqrt(s) on (max(c1, c2) - 1, 1].
    let rhs = |t: f64| c1 * a / (t - c1 + 1.0) + c2 * b / (t - c2 + 1.0);
    let mut lo = c1.max(c2) - 1.0;
    let mut hi = 1.0;
    if lo >= hi {
        return Ok(QueryProbability { s: 1.0, clamped: true });
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) > g {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    if t <= 0.0 {
        return Ok(QueryProbability { s: f64::MIN_POSITIVE, clamped: true });
    }
    Ok(QueryProbability { s: t * t, clamped: false })
}

/// `(1/n) * sum over S of 1[h(x) != y] / p`.
pub fn importance_weighted_error(h: impl Fn(&[f64]) -> ClassId, s: &[Weighted], n: u64) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    if n == 0 || (s.len() as u64) > n {
        return Err(Error::invalid("processed count must be at least |S| and positive"));
    }
    let mut total = 0.0;
    for t in s {
        if !(t.p > 0.0 && t.p <= 1.0) {
            return Err(Error::invalid(format!("stored query probability {} outside (0, 1]", t.p)));
        }
        if h(&t.x) != t.y {
            total += 1.0 / t.p;
        }
    }
    Ok(total / n as f64)
}

/// Best single-leaf relabelling of `h` that disagrees with it at `x`.
/// Ties go to the lowest label.
pub fn tree_alternative(
    h: &DecisionTree,
    x: &[f64],
    s: &[Weighted],
    n: u64,
    labels: &[ClassId],
) -> Result<DecisionTree> {
    let current = h.predict(x);
    let leaf = h.leaf_index(x);
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(DecisionTree, f64)> = None;
    for l in sorted.into_iter().filter(|l| *l != current) {
        let cand = h.with_leaf_label(leaf, l);
        let err = importance_weighted_error(|z| cand.predict(z), s, n)?;
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((cand, err));
        }
    }
    best.map(|(t, _)| t).ok_or_else(|| Error::invalid("label set has no alternative to the current prediction"))
}

fn binomial_at_most(r: usize, j: usize, cap: usize) -> Option<usize> {
    let mut c: u128 = 1;
    for i in 0..j {
        c = c * (r - i) as u128 / (i + 1) as u128;
        if c > cap as u128 {
            return None;
        }
    }
    Some(c as usize)
}

fn combinations(r: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, r: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            cur.push(i);
            rec(i + 1, r, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, r, j, &mut Vec::new(), &mut out);
    out
}

/// Number of agreeing trees to flip: `r - floor(o/2) + 1`, capped at `r`.
pub fn forest_flip_count(o: usize, r: usize) -> usize {
    (r + 1 - o / 2).min(r)
}

/// Forest whose vote at `x` is flipped by relabelling the leaves of `j`
/// agreeing trees, choosing the flip set with least weighted error. All
/// `C(r, j)` sets are tried when there are at most `sample_count` of them;
/// otherwise `sample_count` random sets are drawn.
pub fn forest_alternative<R: Rng + ?Sized>(
    rf: &RandomForest,
    x: &[f64],
    s: &[Weighted],
    n: u64,
    sample_count: usize,
    rng: &mut R,
) -> Result<RandomForest> {
    let current = rf.predict(x).class();
    let agreeing: Vec<usize> = (0..rf.len()).filter(|&i| rf.trees()[i].predict(x) == current).collect();
    let r = agreeing.len();
    let j = forest_flip_count(rf.len(), r);
    let subsets: Vec<Vec<usize>> = match binomial_at_most(r, j, sample_count.max(1)) {
        Some(_) => combinations(r, j),
        None => (0..sample_count.max(1)).map(|_| sample(rng, r, j).into_vec()).collect(),
    };
    let mut best: Option<(RandomForest, f64)> = None;
    for subset in subsets {
        let which: Vec<usize> = subset.iter().map(|&i| agreeing[i]).collect();
        let cand = rf.with_flipped_trees(x, &which);
        let err = importance_weighted_error(|z| cand.predict(z).class(), s, n)?;
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((cand, err));
        }
    }
    let (alt, _) = best.expect("at least one flip set");
    debug_assert_ne!(alt.predict(x), rf.predict(x));
    Ok(alt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Learner {
    Tree,
    Forest { trees: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IwalConfig {
    pub learner: Learner,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Leading instances labelled with `p = 1`.
    pub seed_size: usize,
    /// Cap on label queries.
    pub budget: Option<u64>,
    /// Retrain at most once per this many processed instances.
    pub cadence: usize,
    pub tree: TreeParams,
    /// Number of passes over the pool.
    pub passes: usize,
    /// Label set; the labels seen so far are used when absent.
    pub labels: Option<Vec<ClassId>>,
    /// Candidate cap for forest alternatives.
    pub sample_count: usize,
}

impl Default for IwalConfig {
    fn default() -> Self {
        IwalConfig {
            learner: Learner::Tree,
            c0: 8.0,
            c1: 1.0,
            c2: 1.0,
            seed_size: 20,
            budget: None,
            cadence: 1,
            tree: TreeParams::default(),
            passes: 1,
            labels: None,
            sample_count: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IwalModel {
    Tree(DecisionTree),
    Forest(RandomForest),
}

impl IwalModel {
    pub fn predict(&self, x: &[f64]) -> ClassId {
        match self {
            IwalModel::Tree(t) => t.predict(x),
            IwalModel::Forest(f) => f.predict(x).class(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IwalStats {
    pub processed: u64,
    pub queried: u64,
    pub seed_queries: u64,
    /// Instances for which `s` hit an endpoint clamp.
    pub clamped: u64,
}

impl IwalStats {
    /// Fraction of post-seed instances whose label was bought.
    pub fn post_seed_query_fraction(&self) -> f64 {
        let post = self.processed - self.seed_queries;
        if post == 0 {
            return 0.0;
        }
        (self.queried - self.seed_queries) as f64 / post as f64
    }
}

#[derive(Debug, Clone)]
pub struct IwalExtraction {
    pub model: IwalModel,
    pub report: ExtractionReport,
    pub stats: IwalStats,
}

fn train<R: Rng + ?Sized>(cfg: &IwalConfig, s: &[Weighted], rng: &mut R) -> Result<IwalModel> {
    let xs: Vec<Vec<f64>> = s.iter().map(|t| t.x.clone()).collect();
    let ys: Vec<ClassId> = s.iter().map(|t| t.y).collect();
    let ws: Vec<f64> = s.iter().map(|t| 1.0 / t.p).collect();
    Ok(match cfg.learner {
        Learner::Tree => IwalModel::Tree(dt_train_weighted(&xs, &ys, &ws, &cfg.tree)?),
        Learner::Forest { trees } => IwalModel::Forest(rf_train_weighted(&xs, &ys, &ws, trees, &cfg.tree, rng)?),
    })
}

fn validate(cfg: &IwalConfig, d: usize, pool: &[Vec<f64>]) -> Result<()> {
    if pool.is_empty() || pool.iter().any(|x| x.len() != d) {
        return Err(Error::invalid("IWAL pool must be nonempty and match the server dimension"));
    }
    if !(cfg.c0 >= 0.0 && cfg.c1 >= 1.0 && cfg.c2 >= 1.0) {
        return Err(Error::invalid("IWAL needs c0 >= 0 and c1, c2 >= 1"));
    }
    if cfg.seed_size == 0 || cfg.cadence == 0 || cfg.passes == 0 {
        return Err(Error::invalid("seed_size, cadence and passes must be >= 1"));
    }
    if let Learner::Forest { trees } = cfg.learner {
        if trees % 2 == 0 {
            return Err(Error::invalid("forest size must be odd"));
        }
    }
    Ok(())
}

/// Streams the pool, buying each label with probability `p_n`, and returns
/// the model retrained on the importance-weighted sample. Agreement with the
/// server is measured on `test`.
pub fn iwal_extract<R: Rng + ?Sized>(
    o: &mut Oracle,
    pool: &[Vec<f64>],
    cfg: &IwalConfig,
    test: &[Vec<f64>],
    rng: &mut R,
) -> Result<IwalExtraction> {
    validate(cfg, o.dim(), pool)?;
    let meter = RunMeter::start(o);
    let mut stats = IwalStats::default();
    let mut s: Vec<Weighted> = Vec::new();
    let mut labels: Vec<ClassId> = cfg.labels.clone().unwrap_or_default();
    let mut h: Option<IwalModel> = None;
    // |S| at the last retrain, and the processed count at that point.
    let mut trained_on = 0usize;
    let mut trained_at = 0u64;
    let stream = pool.iter().cycle().take(pool.len() * cfg.passes);
    for x in stream {
        if cfg.budget.is_some_and(|b| stats.queried >= b) {
            break;
        }
        stats.processed += 1;
        let n = stats.processed;
        let p = if n <= cfg.seed_size as u64 {
            1.0
        } else {
            let due = h.is_none() || (s.len() > trained_on && n - trained_at >= cfg.cadence as u64);
            if due {
                h = Some(train(cfg, &s, rng)?);
                trained_on = s.len();
                trained_at = n;
            }
            let cur = h.as_ref().expect("trained above");
            let prev = n - 1;
            let err_h = importance_weighted_error(|z| cur.predict(z), &s, prev)?;
            let err_alt = match cur {
                IwalModel::Tree(t) => {
                    let alt = tree_alternative(t, x, &s, prev, &labels)?;
                    importance_weighted_error(|z| alt.predict(z), &s, prev)?
                }
                IwalModel::Forest(f) => {
                    let alt = forest_alternative(f, x, &s, prev, cfg.sample_count, rng)?;
                    importance_weighted_error(|z| alt.predict(z).class(), &s, prev)?
                }
            };
            let g = (err_alt - err_h).max(0.0);
            if g <= iwal_threshold(n, cfg.c0)? {
                1.0
            } else {
                let q = iwal_solve_s(g, n, cfg.c0, cfg.c1, cfg.c2)?;
                stats.clamped += q.clamped as u64;
                q.s
            }
        };
        if p >= 1.0 || rng.random::<f64>() < p {
            let y = o.query(x)?;
            if !labels.contains(&y) {
                labels.push(y);
            }
            s.push(Weighted { x: x.clone(), y, p });
            stats.queried += 1;
            if n <= cfg.seed_size as u64 {
                stats.seed_queries += 1;
            }
        }
    }
    let model = if s.len() == trained_on && h.is_some() { h.expect("checked") } else { train(cfg, &s, rng)? };
    let mut report = meter.finish(o, Outcome::Success);
    if !test.is_empty() {
        report.accuracy = Some(agreement(o.ground_truth(), test, |z| model.predict(z))?);
    }
    Ok(IwalExtraction { model, report, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_box;
    use crate::nonlinear::tree::Node;
    use crate::oracle::{DefensePolicy, Dollars, QueryLedger, ServerModel};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(x: f64, y: ClassId, p: f64) -> Weighted {
        Weighted { x: vec![x], y, p }
    }

    #[test]
    fn threshold_examples() {
        let expected = (8.0 * 2f64.ln()).sqrt() + 8.0 * 2f64.ln();
        assert_abs_diff_eq!(iwal_threshold(2, 8.0).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(iwal_threshold(2, 8.0).unwrap(), 7.9001, epsilon = 2e-4);
        assert_eq!(iwal_threshold(3, 0.0).unwrap(), 0.0);
        assert!(iwal_threshold(1, 8.0).is_err());
        let mut last = f64::INFINITY;
        for n in 3..5000 {
            let m = iwal_threshold(n, 8.0).unwrap();
            assert!(m < last);
            last = m;
        }
    }

    #[test]
    fn closed_form_s_matches_bisection() {
        let q = iwal_solve_s(10.0, 2, 8.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(q.s, (7.9001f64 / 10.0).powi(2), epsilon = 1e-4);
        assert_abs_diff_eq!(q.s, 0.62412, epsilon = 1e-4);
        // Bisection root of the same equation, from first principles.
        let b = 8.0 * 2f64.ln();
        let (mut lo, mut hi) = (1e-12f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (b.sqrt() + b) / mid.sqrt() > 10.0 { lo = mid } else { hi = mid }
        }
        assert_abs_diff_eq!(q.s, lo, epsilon = 1e-9);
        assert!(!q.clamped);
    }

    #[test]
    fn general_constants_use_bisection() {
        let (n, c0, c1, c2, g) = (50u64, 8.0, 1.2, 1.5, 5.0);
        let q = iwal_solve_s(g, n, c0, c1, c2).unwrap();
        let b = c0 * (n as f64).ln() / (n - 1) as f64;
        let t = q.s.sqrt();
        let rhs = c1 * b.sqrt() / (t - c1 + 1.0) + c2 * b / (t - c2 + 1.0);
        assert_abs_diff_eq!(rhs, g, epsilon = 1e-6);
        assert!(q.s > 0.0 && q.s <= 1.0);
    }

    #[test]
    fn s_boundaries_and_monotonicity() {
        let mu = iwal_threshold(40, 8.0).unwrap();
        assert_eq!(iwal_solve_s(mu, 40, 8.0, 1.0, 1.0).unwrap().s, 1.0);
        let mut last = 1.0;
        for k in 1..50 {
            let s = iwal_solve_s(mu + k as f64, 40, 8.0, 1.0, 1.0).unwrap().s;
            assert!(s < last && s > 0.0);
            last = s;
        }
        assert!(iwal_solve_s(1e12, 40, 8.0, 1.0, 1.0).unwrap().s < 1e-20);
        assert!(iwal_solve_s(0.5 * mu, 40, 8.0, 1.0, 1.0).unwrap().clamped);
    }

    #[test]
    fn weighted_error_examples() {
        let always = |v: ClassId| move |_: &[f64]| v;
        assert_eq!(importance_weighted_error(always(1), &[], 0).unwrap(), 0.0);
        assert_eq!(importance_weighted_error(always(1), &[w(0.0, 1, 0.3)], 5).unwrap(), 0.0);
        assert_eq!(importance_weighted_error(always(-1), &[w(0.0, 1, 1.0)], 1).unwrap(), 1.0);
        let s = [w(0.0, -1, 0.5), w(1.0, 1, 1.0)];
        assert_eq!(importance_weighted_error(always(1), &s, 4).unwrap(), 0.5);
        assert!(importance_weighted_error(always(1), &[w(0.0, 1, 0.0)], 1).is_err());
        // A correctly predicted triple leaves n * err unchanged.
        let s2 = [w(0.0, -1, 0.5), w(1.0, 1, 1.0), w(2.0, 1, 0.25)];
        let a = 4.0 * importance_weighted_error(always(1), &s, 4).unwrap();
        let b = 5.0 * importance_weighted_error(always(1), &s2, 5).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }

    fn stump() -> DecisionTree {
        DecisionTree::from_nodes(
            1,
            vec![
                Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 },
                Node::Leaf { label: 0 },
                Node::Leaf { label: 1 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn binary_tree_alternative_is_the_leaf_flip() {
        let t = DecisionTree::from_nodes(
            1,
            vec![
                Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 },
                Node::Leaf { label: -1 },
                Node::Leaf { label: 1 },
            ],
        )
        .unwrap();
        let alt = tree_alternative(&t, &[0.9], &[], 1, &[-1, 1]).unwrap();
        assert_eq!(alt.predict(&[0.9]), -1);
        assert_eq!(alt.predict(&[0.1]), -1);
    }

    #[test]
    fn multiclass_alternative_minimises_error_with_low_label_ties() {
        let t = stump();
        // Empty sample: both candidates tie at zero, lowest label wins.
        let alt = tree_alternative(&t, &[0.1], &[], 1, &[0, 1, 2]).unwrap();
        assert_eq!(alt.predict(&[0.1]), 1);
        // Points in the left leaf labelled 2 make label 2 the cheaper flip.
        let s = [w(0.2, 2, 1.0), w(0.3, 2, 1.0), w(0.4, 1, 1.0)];
        let alt = tree_alternative(&t, &[0.1], &s, 3, &[0, 1, 2]).unwrap();
        let brute: Vec<f64> = [1, 2]
            .iter()
            .map(|&l| {
                let c = t.with_leaf_label(1, l);
                importance_weighted_error(|z| c.predict(z), &s, 3).unwrap()
            })
            .collect();
        assert!(brute[1] < brute[0]);
        assert_eq!(alt.predict(&[0.1]), 2);
        assert_ne!(alt.predict(&[0.1]), t.predict(&[0.1]));
    }

    fn const_tree(label: ClassId) -> DecisionTree {
        DecisionTree::leaf(1, label)
    }

    #[test]
    fn flip_counts() {
        assert_eq!(forest_flip_count(1, 1), 1);
        assert_eq!(forest_flip_count(3, 3), 3);
        assert_eq!(forest_flip_count(3, 2), 2);
        assert_eq!(forest_flip_count(5, 3), 2);
        assert_eq!(forest_flip_count(5, 5), 4);
    }

    #[test]
    fn forest_alternatives_flip_the_vote() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (trees, o) in [(vec![1], 1), (vec![1, 1, 1], 3), (vec![1, 1, 1, -1, -1], 5), (vec![1; 9], 9)] {
            let f = RandomForest::new(trees.into_iter().map(const_tree).collect()).unwrap();
            assert_eq!(f.len(), o);
            let alt = forest_alternative(&f, &[0.0], &[], 1, 50, &mut rng).unwrap();
            assert_ne!(alt.predict(&[0.0]), f.predict(&[0.0]));
        }
    }

    #[test]
    fn forest_alternative_picks_the_cheapest_flip_set() {
        // Trees 0..2 vote +1 at x and j = 2 of them must flip. Flipping the
        // constant tree 2 also flips the vote at 3.0, so only {0, 1} is free.
        let split = || {
            DecisionTree::from_nodes(
                1,
                vec![
                    Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 },
                    Node::Leaf { label: 1 },
                    Node::Leaf { label: 1 },
                ],
            )
            .unwrap()
        };
        let f = RandomForest::new(vec![split(), split(), const_tree(1), const_tree(-1), const_tree(-1)]).unwrap();
        let s = [w(3.0, 1, 1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alt = forest_alternative(&f, &[0.0], &s, 1, 50, &mut rng).unwrap();
        assert_eq!(alt.predict(&[0.0]).class(), -1);
        assert_eq!(importance_weighted_error(|z| alt.predict(z).class(), &s, 1).unwrap(), 0.0);
    }

    fn tree_oracle(t: &DecisionTree) -> Oracle {
        let ledger = QueryLedger::new(Dollars::from_micros(0), None);
        Oracle::new(ServerModel::DecisionTree(t.clone()), DefensePolicy::NoDefense, ledger, 0).unwrap()
    }

    #[test]
    fn self_extraction_skips_some_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bx = vec![(0.0, 1.0); 3];
        let pool: Vec<Vec<f64>> = (0..800).map(|_| sample_box(&bx, &mut rng)).collect();
        let seed_xs = pool[..60].to_vec();
        let seed_ys: Vec<ClassId> = seed_xs.iter().map(|x| if x[0] + x[1] > 1.0 { 1 } else { -1 }).collect();
        let teacher = dt_train_weighted(&seed_xs, &seed_ys, &[1.0; 60], &TreeParams::default()).unwrap();
        let mut o = tree_oracle(&teacher);
        let test: Vec<Vec<f64>> = (0..500).map(|_| sample_box(&bx, &mut rng)).collect();
        let out = iwal_extract(&mut o, &pool, &IwalConfig::default(), &test, &mut rng).unwrap();
        assert_eq!(out.stats.processed, 800);
        assert_eq!(out.stats.seed_queries, 20);
        assert_eq!(out.report.queries_used, out.stats.queried);
        assert!(out.stats.post_seed_query_fraction() < 1.0, "{:?}", out.stats);
        assert!(out.report.accuracy.unwrap() > 0.9);
    }

    #[test]
    fn budget_caps_label_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let t = stump();
        let mut o = tree_oracle(&t);
        let pool: Vec<Vec<f64>> = (0..300).map(|i| vec![i as f64 / 300.0]).collect();
        let cfg = IwalConfig { budget: Some(40), labels: Some(vec![0, 1]), ..IwalConfig::default() };
        let out = iwal_extract(&mut o, &pool, &cfg, &[], &mut rng).unwrap();
        assert!(out.stats.queried <= 40);
        assert_eq!(o.ledger().count(), out.stats.queried);
    }
}
