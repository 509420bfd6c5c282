//! k-dilation estimates from sampled Jacobian singular values.
//!
//! Samples come from a shifted Halton set mapped uniformly onto the domain,
//! followed by rounds of Gaussian jitter around the running argmax. Points
//! near a map's declared non-smooth interfaces are skipped and counted.

pub mod sampling;

use crate::error::{Error, Result};
use crate::forms::EuclideanForm;
use crate::maps::{pullback_at, AnalyticMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingPlan {
    /// Size of the low-discrepancy base set.
    pub samples: usize,
    pub refine_rounds: usize,
    /// Points jittered around each refinement center per round.
    pub refine_points: usize,
    /// Refinement centers per round: the best distinct samples so far.
    pub refine_starts: usize,
    /// Jitter scale of the first refinement round; each later round divides it by 5.
    pub refine_sigma: f64,
    pub seed: u64,
    /// Singular values below rank_tol·s₁ count as zero.
    pub rank_tol: f64,
    /// Exclusion distance around declared interfaces.
    pub interface_tol: f64,
    /// Point pairs for the Lipschitz cross-check.
    pub pairs: usize,
    /// Keep every sample in the report.
    pub echo: bool,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            samples: 10_000,
            refine_rounds: 3,
            refine_points: 1000,
            refine_starts: 1,
            refine_sigma: 0.1,
            seed: 0,
            rank_tol: 1e-8,
            interface_tol: crate::maps::INTERFACE_TOL,
            pairs: 10_000,
            echo: false,
        }
    }
}

impl SamplingPlan {
    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub point: Vec<f64>,
    /// Decreasing singular values of DF in orthonormal frames.
    pub singular_values: Vec<f64>,
}

impl Sample {
    pub fn product(&self, k: usize) -> f64 {
        self.singular_values.iter().take(k).product()
    }
}

#[derive(Clone, Debug)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    /// Points skipped because they were near a non-smooth interface or rejected by a filter.
    pub excluded: usize,
}

fn evaluate(
    f: &AnalyticMap,
    points: Vec<Vec<f64>>,
    plan: &SamplingPlan,
    filter: &(dyn Fn(&[f64]) -> bool + Sync),
) -> Result<(Vec<Sample>, usize)> {
    let out: Vec<Result<Option<Sample>>> = points
        .into_par_iter()
        .map(|p| {
            if f.interface_distance(&p) < plan.interface_tol || !filter(&p) {
                return Ok(None);
            }
            let singular_values = crate::maps::singular_values(f, &p)?;
            Ok(Some(Sample { point: p, singular_values }))
        })
        .collect();
    let mut samples = Vec::with_capacity(out.len());
    let mut excluded = 0;
    for s in out {
        match s? {
            Some(s) => samples.push(s),
            None => excluded += 1,
        }
    }
    Ok((samples, excluded))
}

/// First index attaining the maximum, so ties resolve the same way on every run.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

/// Indices of the `count` largest objective values, ties broken by index.
fn best_indices(samples: &[Sample], objective: &(dyn Fn(&Sample) -> f64 + Sync), count: usize) -> Vec<usize> {
    if count == 1 {
        return argmax(samples.iter().map(objective)).map(|(i, _)| vec![i]).unwrap_or_default();
    }
    let values: Vec<f64> = samples.par_iter().map(objective).collect();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(count);
    order
}

/// Base samples plus refinement around the best samples by `objective`, keeping
/// only points accepted by `filter`.
pub fn collect_samples(
    f: &AnalyticMap,
    plan: &SamplingPlan,
    objective: &(dyn Fn(&Sample) -> f64 + Sync),
    filter: &(dyn Fn(&[f64]) -> bool + Sync),
) -> Result<SampleSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let space = f.domain().clone();
    let (mut samples, mut excluded) = evaluate(f, sampling::base_points(&space, plan.samples, &mut rng), plan, filter)?;
    let mut sigma = plan.refine_sigma;
    for _ in 0..plan.refine_rounds {
        if samples.is_empty() {
            break;
        }
        let mut pts = Vec::new();
        for i in best_indices(&samples, objective, plan.refine_starts.max(1)) {
            pts.extend(sampling::jitter(&space, &samples[i].point, sigma, plan.refine_points, &mut rng));
        }
        let (more, ex) = evaluate(f, pts, plan, filter)?;
        samples.extend(more);
        excluded += ex;
        sigma /= 5.0;
    }
    if samples.is_empty() {
        return Err(Error::DegeneratePlan {
            detail: format!("all {excluded} sample points of `{}` were excluded", f.name()),
        });
    }
    Ok(SampleSet { samples, excluded })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantile {
    pub q: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DilationReport {
    pub map: String,
    pub k: usize,
    pub sup_estimate: f64,
    pub argmax_point: Vec<f64>,
    pub sample_count: usize,
    pub excluded_count: usize,
    /// Quantiles of the per-sample product s₁⋯s_k.
    pub histogram: Vec<Quantile>,
    /// Max over samples of #{i : s_i > rank_tol·s₁}.
    pub rank_profile: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Sample>>,
}

const QUANTILES: [f64; 9] = [0.0, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];

fn check_k(f: &AnalyticMap, k: usize) -> Result<()> {
    let max = f.domain().dim().min(f.codomain().ambient_dim());
    if k == 0 || k > max {
        return Err(Error::KOutOfRange { k, max });
    }
    Ok(())
}

pub fn rank_of(s: &[f64], rank_tol: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().filter(|&&v| v > rank_tol * s1).count(),
        _ => 0,
    }
}

/// Summarizes an existing sample set for dil_k.
pub fn report_from_samples(f: &AnalyticMap, k: usize, set: &SampleSet, plan: &SamplingPlan) -> Result<DilationReport> {
    check_k(f, k)?;
    let products: Vec<f64> = set.samples.iter().map(|s| s.product(k)).collect();
    let (i, sup) = argmax(products.iter().copied()).ok_or_else(|| Error::DegeneratePlan { detail: "no samples".into() })?;
    let mut sorted = products.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let histogram = QUANTILES
        .iter()
        .map(|&q| Quantile { q, value: sorted[((sorted.len() - 1) as f64 * q).round() as usize] })
        .collect();
    let rank_profile = set.samples.iter().map(|s| rank_of(&s.singular_values, plan.rank_tol)).max().unwrap_or(0);
    Ok(DilationReport {
        map: f.name().to_string(),
        k,
        sup_estimate: sup,
        argmax_point: set.samples[i].point.clone(),
        sample_count: set.samples.len(),
        excluded_count: set.excluded,
        histogram,
        rank_profile,
        seed: plan.seed,
        samples: plan.echo.then(|| set.samples.clone()),
    })
}

/// Estimates dil_k(F) = sup_x s₁(x)⋯s_k(x).
pub fn dilation(f: &AnalyticMap, k: usize, plan: &SamplingPlan) -> Result<DilationReport> {
    check_k(f, k)?;
    let set = collect_samples(f, plan, &|s: &Sample| s.product(k), &|_| true)?;
    report_from_samples(f, k, &set, plan)
}

impl DilationReport {
    pub fn csv_header(&self) -> String {
        let mut h = String::from("map,k,sup_estimate,samples,excluded,rank_profile,seed");
        for i in 0..self.argmax_point.len() {
            write!(h, ",argmax_{i}").unwrap();
        }
        for q in &self.histogram {
            write!(h, ",q{}", q.q).unwrap();
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut r = format!(
            "{},{},{:e},{},{},{},{}",
            self.map, self.k, self.sup_estimate, self.sample_count, self.excluded_count, self.rank_profile, self.seed
        );
        for v in &self.argmax_point {
            write!(r, ",{v:e}").unwrap();
        }
        for q in &self.histogram {
            write!(r, ",{:e}", q.value).unwrap();
        }
        r
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", self.csv_header(), self.csv_row())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCheck {
    pub j: usize,
    pub k: usize,
    /// dil_j^{1/j} over the sample set.
    pub lhs: f64,
    /// dil_k^{1/k} over the same set.
    pub rhs: f64,
    pub holds: bool,
    /// min over samples of (∏₁^j s)^{1/j} − (∏₁^k s)^{1/k}.
    pub min_sample_slack: f64,
    pub sample_count: usize,
}

pub const RELATION_SLACK: f64 = 1e-12;

/// Checks dil_j^{1/j} ≥ dil_k^{1/k} per sample and on the sups.
pub fn check_dilation_relation(f: &AnalyticMap, j: usize, k: usize, plan: &SamplingPlan) -> Result<RelationCheck> {
    if j >= k {
        return Err(Error::parameter("j", format!("need j < k, got j = {j}, k = {k}")));
    }
    check_k(f, k)?;
    let set = collect_samples(f, plan, &|s: &Sample| s.product(k), &|_| true)?;
    Ok(relation_on_samples(&set.samples, j, k))
}

pub fn relation_on_samples(samples: &[Sample], j: usize, k: usize) -> RelationCheck {
    let root = |s: &Sample, m: usize| s.product(m).powf(1.0 / m as f64);
    let mut slack = f64::INFINITY;
    let (mut lhs, mut rhs) = (0.0f64, 0.0f64);
    for s in samples {
        let (a, b) = (root(s, j), root(s, k));
        slack = slack.min(a - b);
        lhs = lhs.max(a);
        rhs = rhs.max(b);
    }
    RelationCheck {
        j,
        k,
        lhs,
        rhs,
        holds: slack >= -RELATION_SLACK && lhs >= rhs - RELATION_SLACK,
        min_sample_slack: slack,
        sample_count: samples.len(),
    }
}

/// Max over samples of ∏₁^k s − (∏₁^j s)^{k/j}, evaluated where the
/// singular values are ordered and s_k ≤ (∏₁^j s)^{1/j}; nonpositive when
/// the log-majorization inequality holds.
pub fn product_power_violation(samples: &[Sample], j: usize, k: usize) -> f64 {
    samples
        .iter()
        .filter(|s| s.singular_values.len() >= k)
        .filter(|s| s.singular_values.windows(2).all(|w| w[0] >= w[1]))
        .filter(|s| s.singular_values[k - 1] <= s.product(j).powf(1.0 / j as f64))
        .map(|s| s.product(k) - s.product(j).powf(k as f64 / j as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullbackCheck {
    pub k: usize,
    /// max over samples of comass(F*ω) − s₁⋯s_k·comass(ω∘F); ≤ 0 when the bound holds.
    pub max_violation: f64,
    pub sample_count: usize,
    pub excluded_count: usize,
}

/// Checks comass((F*ω)_p) ≤ s₁⋯s_k(p)·comass(ω_{F(p)}) at every sample.
pub fn check_pullback_bound(f: &AnalyticMap, form: &EuclideanForm, plan: &SamplingPlan) -> Result<PullbackCheck> {
    let k = form.degree();
    check_k(f, k)?;
    let set = collect_samples(f, plan, &|s: &Sample| s.product(k), &|_| true)?;
    let gaps: Result<Vec<f64>> = set
        .samples
        .par_iter()
        .map(|s| {
            let lhs = pullback_at(f, form, &s.point)?.form.comass();
            let y = f.eval(&s.point)?;
            Ok(lhs - s.product(k) * form.eval(&y).comass())
        })
        .collect();
    let max_violation = gaps?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(PullbackCheck { k, max_violation, sample_count: set.samples.len(), excluded_count: set.excluded })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub map: String,
    /// The larger of the two estimates.
    pub value: f64,
    pub singular_sup: f64,
    pub pair_sup: f64,
    /// Set when the two estimates differ by more than 5%.
    pub disagree: bool,
    pub argmax_point: Vec<f64>,
    pub sample_count: usize,
}

/// max s₁ over samples, cross-checked against difference quotients of close point pairs.
///
/// Half of the pairs are anchored at the s₁-argmax, the rest at base points.
pub fn lipschitz_estimate(f: &AnalyticMap, plan: &SamplingPlan) -> Result<LipschitzReport> {
    let set = collect_samples(f, plan, &|s: &Sample| s.singular_values.first().copied().unwrap_or(0.0), &|_| true)?;
    let rep = report_from_samples(f, 1, &set, plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0x9e37_79b9_7f4a_7c15);
    let space = f.domain().clone();
    let h = 1e-4;
    let mut pairs = Vec::with_capacity(plan.pairs);
    let anchors = sampling::base_points(&space, plan.pairs / 2, &mut rng);
    for a in anchors {
        let b = sampling::jitter(&space, &a, h, 1, &mut rng).pop().unwrap();
        pairs.push((a, b));
    }
    for b in sampling::jitter(&space, &rep.argmax_point, h, plan.pairs - pairs.len(), &mut rng) {
        pairs.push((rep.argmax_point.clone(), b));
    }
    let quotients: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let dist = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            if dist == 0.0 {
                return Ok(0.0);
            }
            let (fa, fb) = (f.eval(a)?, f.eval(b)?);
            Ok(fa.iter().zip(&fb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() / dist)
        })
        .collect();
    let pair_sup = quotients?.into_iter().fold(0.0, f64::max);
    let singular_sup = rep.sup_estimate;
    let value = singular_sup.max(pair_sup);
    let disagree = value > 0.0 && (singular_sup - pair_sup).abs() > 0.05 * value;
    Ok(LipschitzReport {
        map: f.name().to_string(),
        value,
        singular_sup,
        pair_sup,
        disagree,
        argmax_point: rep.argmax_point,
        sample_count: rep.sample_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{hopf_map, identity, linear_isometry, Space};
    use nalgebra::DMatrix;

    fn small() -> SamplingPlan {
        SamplingPlan { samples: 500, refine_points: 100, pairs: 200, ..SamplingPlan::default() }
    }

    #[test]
    fn identity_has_unit_dilation() {
        let id = identity(Space::Sphere(3));
        for k in 1..=3 {
            let r = dilation(&id, k, &small()).unwrap();
            assert!((r.sup_estimate - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn k_out_of_range() {
        assert!(matches!(dilation(&hopf_map(), 4, &small()), Err(Error::KOutOfRange { .. })));
        assert!(matches!(dilation(&hopf_map(), 0, &small()), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn linear_map_relation() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let f = linear_isometry("diag(2,1)", Space::Euclidean(2), a);
        let c = check_dilation_relation(&f, 1, 2, &small()).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-12);
        assert!((c.rhs - 2f64.sqrt()).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = dilation(&hopf_map(), 2, &small()).unwrap();
        let b = dilation(&hopf_map(), 2, &small()).unwrap();
        assert_eq!(a, b);
    }
}
