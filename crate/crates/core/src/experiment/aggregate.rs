//! Per-method means, rank scores, best-combination table and pairwise
//! method comparisons, all built from the mean rows of a results store.

use std::collections::BTreeMap;

use super::stats::{bonferroni, cohens_d_paired, paired_t_test};
use super::store::ResultsStore;
use crate::error::{Error, Result};
use crate::model::{enumerate_combinations, CombinationSpec, Scaling, Step};

/// Steps compared in the aggregations (scaling is held at z_at_mm_at).
pub const RANKED_STEPS: [Step; 6] = [
    Step::Filtering,
    Step::Derivative,
    Step::TimePoints,
    Step::Reduction,
    Step::WeightNorm,
    Step::Classifier,
];

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; None below two values.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    (xs.len() >= 2).then(|| {
        let m = mean(xs);
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    })
}

/// Restricted-grid mean F1 per subject and spec.
fn restricted_f1(store: &ResultsStore) -> BTreeMap<String, BTreeMap<CombinationSpec, f64>> {
    let mut out: BTreeMap<String, BTreeMap<CombinationSpec, f64>> = BTreeMap::new();
    for r in store.mean_rows() {
        if r.spec.scaling == Scaling::ZAtMmAt {
            out.entry(r.subject_id.clone()).or_default().insert(r.spec, r.f1);
        }
    }
    out
}

/// Errors unless every subject has all 288 restricted combinations.
pub fn check_complete(store: &ResultsStore) -> Result<()> {
    let by_subject = restricted_f1(store);
    if by_subject.is_empty() {
        return Err(Error::Aggregation(
            "results store has no restricted-grid mean rows (scale=z_at_mm_at)".into(),
        ));
    }
    let expected = enumerate_combinations(true).len();
    for (subject, specs) in &by_subject {
        if specs.len() != expected {
            return Err(Error::Aggregation(format!(
                "subject {subject} has {} of the {expected} restricted combinations; \
                 run the full grid or pass --partial",
                specs.len()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodMean {
    pub step: Step,
    pub method: String,
    /// (subject, mean F1 over that subject's specs containing the method, spec count)
    pub per_subject: Vec<(String, f64, usize)>,
    /// mean over subjects
    pub mean: f64,
    /// sd over subjects
    pub sd: Option<f64>,
}

/// For each method of each ranked step, the mean F1 of the specs that
/// contain it, per subject and averaged over subjects.
pub fn method_means(store: &ResultsStore, partial: bool) -> Result<Vec<MethodMean>> {
    if !partial {
        check_complete(store)?;
    }
    let by_subject = restricted_f1(store);
    let mut out = Vec::new();
    for step in RANKED_STEPS {
        for method in step.methods() {
            let mut per_subject = Vec::new();
            for (subject, specs) in &by_subject {
                let vals: Vec<f64> = specs
                    .iter()
                    .filter(|(s, _)| s.method(step) == method)
                    .map(|(_, f)| *f)
                    .collect();
                if !vals.is_empty() {
                    per_subject.push((subject.clone(), mean(&vals), vals.len()));
                }
            }
            if per_subject.is_empty() {
                continue;
            }
            let means: Vec<f64> = per_subject.iter().map(|p| p.1).collect();
            out.push(MethodMean {
                step,
                method: method.to_string(),
                mean: mean(&means),
                sd: sample_sd(&means),
                per_subject,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Aggregation("no restricted-grid results to average".into()));
    }
    Ok(out)
}

/// 0-based ascending ranks (lowest value gets 0); tied values share the
/// mean of their rank range.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankBounds {
    /// all of the method's items ranked worst: Σ 0..g
    pub min: f64,
    /// all ranked best: Σ (n−g)..n
    pub max: f64,
    /// Σ 0..n
    pub total: f64,
    pub methods: usize,
}

impl RankBounds {
    /// `n` items split evenly over `methods` methods.
    pub fn new(n: usize, methods: usize) -> Self {
        let g = (n / methods) as f64;
        let n = n as f64;
        Self {
            min: g * (g - 1.0) / 2.0,
            max: g * ((n - g) + (n - 1.0)) / 2.0,
            total: n * (n - 1.0) / 2.0,
            methods,
        }
    }

    /// Score rescaled between the minimum and the largest score a method
    /// can reach once every other method holds its minimum:
    /// (score − min) / (total − m·min) · 100.
    pub fn pct_max(&self, score: f64) -> f64 {
        (score - self.min) / (self.total - self.methods as f64 * self.min) * 100.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub step: Step,
    pub method: String,
    pub score: f64,
    pub pct_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub rows: Vec<RankRow>,
    pub bounds: Vec<(Step, RankBounds)>,
}

impl RankTable {
    pub fn step_sum(&self, step: Step) -> f64 {
        self.rows.iter().filter(|r| r.step == step).map(|r| r.score).sum()
    }
}

/// Ranks `items` by value and sums ranks per method of each step in
/// `steps`. Every step's methods must be equally represented.
pub fn rank_items(items: &[(CombinationSpec, f64)], steps: &[Step]) -> Result<RankTable> {
    let ranks = average_ranks(&items.iter().map(|i| i.1).collect::<Vec<_>>());
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for &step in steps {
        let methods = step.methods();
        let mut scores = vec![0.0; methods.len()];
        let mut counts = vec![0usize; methods.len()];
        for ((spec, _), r) in items.iter().zip(&ranks) {
            let m = methods
                .iter()
                .position(|&m| m == spec.method(step))
                .expect("method of its own step");
            scores[m] += r;
            counts[m] += 1;
        }
        let present: Vec<usize> = (0..methods.len()).filter(|&m| counts[m] > 0).collect();
        if present.iter().any(|&m| counts[m] != counts[present[0]]) {
            return Err(Error::Aggregation(format!(
                "step {} is unbalanced ({:?} combinations per method)",
                step.key(),
                counts
            )));
        }
        let b = RankBounds::new(items.len(), present.len());
        for m in present {
            rows.push(RankRow {
                step,
                method: methods[m].to_string(),
                score: scores[m],
                pct_max: b.pct_max(scores[m]),
            });
        }
        bounds.push((step, b));
    }
    Ok(RankTable { rows, bounds })
}

/// Subject-averaged mean F1 per spec (all specs with mean rows).
pub fn subject_averaged(store: &ResultsStore) -> Vec<(CombinationSpec, f64, Option<f64>, usize)> {
    store
        .spec_f1()
        .into_iter()
        .map(|(spec, per)| {
            let v: Vec<f64> = per.values().copied().collect();
            (spec, mean(&v), sample_sd(&v), v.len())
        })
        .collect()
}

/// Rank scores over the complete 288-combination restricted grid.
pub fn rank_scores(store: &ResultsStore) -> Result<RankTable> {
    let n_specs = store
        .spec_f1()
        .keys()
        .filter(|s| s.scaling == Scaling::ZAtMmAt)
        .count();
    let expected = enumerate_combinations(true).len();
    if n_specs != expected {
        return Err(Error::Aggregation(format!(
            "rank table needs all {expected} restricted combinations, found {n_specs}"
        )));
    }
    check_complete(store)?;
    let items: Vec<(CombinationSpec, f64)> = subject_averaged(store)
        .into_iter()
        .filter(|(s, ..)| s.scaling == Scaling::ZAtMmAt)
        .map(|(s, m, ..)| (s, m))
        .collect();
    rank_items(&items, &RANKED_STEPS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestRow {
    /// 1-based
    pub rank: usize,
    pub spec: CombinationSpec,
    pub mean_f1: f64,
    pub sd_f1: Option<f64>,
    pub n_subjects: usize,
}

/// Combinations by descending subject-averaged F1; ties by serialization.
pub fn best_table(store: &ResultsStore, top_n: usize) -> Vec<BestRow> {
    let mut all = subject_averaged(store);
    all.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
    });
    all.into_iter()
        .take(top_n)
        .enumerate()
        .map(|(i, (spec, mean_f1, sd_f1, n_subjects))| BestRow {
            rank: i + 1,
            spec,
            mean_f1,
            sd_f1,
            n_subjects,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTest {
    pub step: Step,
    pub method_a: String,
    pub method_b: String,
    pub n: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    /// p times the number of pairs within the step, capped at 1
    pub p_bonferroni: f64,
    /// None when the differences have zero spread
    pub cohens_d: Option<f64>,
}

/// Paired t-tests across subjects between the methods of each step.
pub fn pairwise_tests(means: &[MethodMean]) -> Result<Vec<PairwiseTest>> {
    let mut out = Vec::new();
    for step in RANKED_STEPS {
        let ms: Vec<&MethodMean> = means.iter().filter(|m| m.step == step).collect();
        let mut tests = Vec::new();
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                let a: BTreeMap<&str, f64> =
                    ms[i].per_subject.iter().map(|p| (p.0.as_str(), p.1)).collect();
                let (xs, ys): (Vec<f64>, Vec<f64>) = ms[j]
                    .per_subject
                    .iter()
                    .filter_map(|p| a.get(p.0.as_str()).map(|&x| (x, p.1)))
                    .unzip();
                let t = paired_t_test(&xs, &ys)?;
                tests.push(PairwiseTest {
                    step,
                    method_a: ms[i].method.clone(),
                    method_b: ms[j].method.clone(),
                    n: xs.len(),
                    mean_a: mean(&xs),
                    mean_b: mean(&ys),
                    t: t.t,
                    df: t.df,
                    p: t.p,
                    p_bonferroni: 0.0,
                    cohens_d: cohens_d_paired(&xs, &ys).ok(),
                });
            }
        }
        let adjusted = bonferroni(&tests.iter().map(|t| t.p).collect::<Vec<_>>(), tests.len())?;
        for (t, p) in tests.iter_mut().zip(adjusted) {
            t.p_bonferroni = p;
        }
        out.extend(tests);
    }
    Ok(out)
}
