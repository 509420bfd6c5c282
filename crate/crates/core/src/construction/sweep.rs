use super::{build_lambda_r, build_psi, SqueezeParams, DEFAULT_R, DEFAULT_W};
use crate::dilation::{collect_samples, lipschitz_estimate, sampling, Sample, SamplingPlan};
use crate::error::{Error, Result};
use crate::maps::{compose, AnalyticMap, Space};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub deltas: Vec<f64>,
    pub w: f64,
    pub r: f64,
    /// Lattice offset in units of δ.
    pub offset_fraction: [f64; 3],
    pub plan: SamplingPlan,
    /// First-round refinement jitter in units of δ; the structure of Ψ lives on the lattice scale.
    pub refine_sigma_cells: f64,
    /// Points of the boundary sphere used for the extension check.
    pub boundary_samples: usize,
    /// Optional diffeomorphism of the source ball applied before F₀.
    #[serde(skip)]
    pub phi: Option<AnalyticMap>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            deltas: vec![0.2, 0.1, 0.05],
            w: DEFAULT_W,
            r: DEFAULT_R,
            offset_fraction: [1.0 / 3.0; 3],
            plan: SamplingPlan { refine_rounds: 5, refine_points: 200, refine_starts: 50, ..SamplingPlan::default() },
            refine_sigma_cells: 0.5,
            boundary_samples: 1000,
            phi: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub lip_lambda_r: f64,
    pub lip_psi: f64,
    /// max s₃/s₁ of DΨ over samples y ∉ V_W.
    pub max_third_singular_outside_vw: f64,
    /// sup of s₁s₂s₃ of D(Ψ∘F₀) over samples with F₀(x) ∉ V_W.
    pub dil3_composite_outside: f64,
    pub dil3_composite_overall: f64,
    /// Fraction of composite samples skipped near interfaces.
    pub excluded_fraction: f64,
    /// max |Ψ(F₀(x)) − F₀(x)| over x on the boundary sphere.
    pub boundary_defect: f64,
    pub outside_samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub f0: String,
    pub config: SweepConfig,
    /// Sorted by δ, largest first.
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "delta,lip_lambda_r,lip_psi,max_third_singular_outside_vw,dil3_composite_outside,\
             dil3_composite_overall,excluded_fraction,boundary_defect,outside_samples\n",
        );
        for r in &self.rows {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                r.delta,
                r.lip_lambda_r,
                r.lip_psi,
                r.max_third_singular_outside_vw,
                r.dil3_composite_outside,
                r.dil3_composite_overall,
                r.excluded_fraction,
                r.boundary_defect,
                r.outside_samples
            )
            .unwrap();
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn max_dil3_outside(&self) -> f64 {
        self.rows.iter().map(|r| r.dil3_composite_outside).fold(0.0, f64::max)
    }

    pub fn max_boundary_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.boundary_defect).fold(0.0, f64::max)
    }
}

fn max_of(samples: &[Sample], f: impl Fn(&Sample) -> f64) -> f64 {
    samples.iter().map(f).fold(0.0, f64::max)
}

fn row(f0: &AnalyticMap, delta: f64, config: &SweepConfig) -> Result<SweepRow> {
    let base = SqueezeParams::new(delta, config.w, config.r)?;
    let offset = config.offset_fraction.map(|c| c * delta);
    let params = base.with_offset(offset);
    let psi = build_psi(&params)?;
    let inner = match &config.phi {
        Some(phi) => compose(f0, phi)?,
        None => f0.clone(),
    };
    let composite = compose(&psi, &inner)?;
    let plan = &SamplingPlan { refine_sigma: config.refine_sigma_cells * delta, ..config.plan.clone() };

    let set = collect_samples(&composite, plan, &|s: &Sample| s.product(3), &|_| true)?;
    let mut outside = Vec::new();
    for s in &set.samples {
        if !params.in_v_w(&inner.eval(&s.point)?) {
            outside.push(s.clone());
        }
    }
    if outside.is_empty() {
        return Err(Error::DegeneratePlan { detail: format!("no composite samples outside V_W at δ = {delta}") });
    }
    let total = set.samples.len() + set.excluded;

    let psi_outside =
        collect_samples(&psi, plan, &|s: &Sample| s.singular_values[2] / s.singular_values[0], &|y| !params.in_v_w(y))?;

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let Space::Ball(d) = inner.domain() else {
        return Err(Error::DomainMismatch { detail: format!("sweep needs F₀ defined on a ball, got {}", inner.domain()) });
    };
    let mut boundary_defect = 0.0f64;
    for x in sampling::base_points(&Space::Sphere(d - 1), config.boundary_samples, &mut rng) {
        let (a, b) = (composite.eval(&x)?, inner.eval(&x)?);
        let e = a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        boundary_defect = boundary_defect.max(e);
    }

    Ok(SweepRow {
        delta,
        lip_lambda_r: lipschitz_estimate(&build_lambda_r(&params)?, plan)?.value,
        lip_psi: lipschitz_estimate(&psi, plan)?.value,
        max_third_singular_outside_vw: max_of(&psi_outside.samples, |s| s.singular_values[2] / s.singular_values[0]),
        dil3_composite_outside: max_of(&outside, |s| s.product(3)),
        dil3_composite_overall: max_of(&set.samples, |s| s.product(3)),
        excluded_fraction: set.excluded as f64 / total as f64,
        boundary_defect,
        outside_samples: outside.len(),
    })
}

/// Runs the δ-sweep of Ψ∘F₀ (or Ψ∘F₀∘Φ when Φ is given).
pub fn sweep(f0: &AnalyticMap, config: &SweepConfig) -> Result<SweepReport> {
    if config.deltas.is_empty() {
        return Err(Error::parameter("delta-list", "needs at least one δ"));
    }
    if f0.codomain().ambient_dim() != 3 {
        return Err(Error::DomainMismatch { detail: format!("F₀ must map into B³, `{}` maps into {}", f0.name(), f0.codomain()) });
    }
    let mut deltas = config.deltas.clone();
    deltas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let rows = deltas.iter().map(|&d| row(f0, d, config)).collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { f0: f0.name().to_string(), config: config.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::lookup;

    #[test]
    fn rows_are_sorted_and_collapse() {
        let config = SweepConfig {
            deltas: vec![0.1, 0.2],
            plan: SamplingPlan { samples: 2000, refine_points: 200, pairs: 500, ..SamplingPlan::default() },
            boundary_samples: 200,
            ..SweepConfig::default()
        };
        let rep = sweep(&lookup("cone:hopf").unwrap(), &config).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows[0].delta > rep.rows[1].delta);
        assert!(rep.max_dil3_outside() <= 1e-6, "{:?}", rep.rows);
        assert!(rep.max_boundary_defect() <= 1e-9);
        assert_eq!(rep.to_csv().lines().count(), 3);
    }

    #[test]
    fn empty_delta_list_is_rejected() {
        let config = SweepConfig { deltas: vec![], ..SweepConfig::default() };
        assert!(sweep(&lookup("cone:hopf").unwrap(), &config).is_err());
    }
}
