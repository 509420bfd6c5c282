//! The generalized Hopf invariant H_ω(F) = ∫ α ∧ F*ω with dα = F*ω,
//! computed on a mesh of S³, and the linking-number oracle it is checked against.

mod linking;

pub use linking::{
    gauss_linking, linking_oracle, linking_report, oracle_mesh, preimage_loops, regular_values, sampled_linking,
    LinkingReport, Loop, DEFAULT_ORACLE_LEVEL, REGULARITY_THRESHOLD, ROUNDING_TOL,
};

use crate::dilation::{collect_samples, rank_of, Sample, SamplingPlan};
use crate::error::{Error, Result};
use crate::forms::{
    comass_estimate, d, integrate_wedge, project_form_with_rule, Cochain, EuclideanForm, PullbackField, SimplexRule,
};
use crate::maps::{AnalyticMap, Space};
use crate::mesh::{ComplexKind, SimplicialComplex};
use crate::solver::{least_norm_primitive, EXACTNESS_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HopfConfig {
    /// Degree of the base rule used to project F*ω onto 2-simplices.
    pub quadrature_order: usize,
    /// Each projection triangle is split into m² pieces, each integrated with the base rule.
    pub projection_subdivisions: usize,
    /// Degree of the rule for the final ∫ α ∧ F*ω.
    pub wedge_order: usize,
    /// Relative non-exactness threshold for the projected pullback.
    pub tol: f64,
    /// Samples used to check rank DF ≤ 2.
    pub rank_samples: usize,
    pub seed: u64,
}

impl Default for HopfConfig {
    fn default() -> Self {
        HopfConfig {
            quadrature_order: 9,
            projection_subdivisions: 4,
            wedge_order: 9,
            tol: EXACTNESS_TOL,
            rank_samples: 2000,
            seed: 0,
        }
    }
}

impl HopfConfig {
    pub fn projection_rule(&self, k: usize) -> Result<SimplexRule> {
        Ok(SimplexRule::new(k, self.quadrature_order)?.composite(self.projection_subdivisions))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HopfReport {
    pub map: String,
    pub value: f64,
    /// ∫ |α ∧ F*ω|.
    pub abs_integral: f64,
    /// ‖d c‖ / ‖ |d| |c| ‖ for the projected pullback c: 0 when c is closed.
    pub closedness_defect: f64,
    /// Share of c orthogonal to the range of d, in the mass norm.
    pub exactness_obstruction: f64,
    /// ‖dα − c‖_M / ‖c‖_M.
    pub primitive_residual: f64,
    /// Comass estimate of α.
    pub primitive_sup: f64,
    pub sup_ratio: f64,
    pub solver_iterations: usize,
    pub mesh_level: Option<usize>,
    pub mesh_checksum: String,
    pub quadrature_order: usize,
    pub projection_subdivisions: usize,
    /// Fraction of sampled points where rank DF > 2.
    pub rank_violation_fraction: f64,
    /// Set when any sampled point has rank DF > 2.
    pub rank_flag: bool,
}

/// Everything the audit and the independence check reuse.
pub struct HopfPipeline {
    pub report: HopfReport,
    pub target: Cochain,
    pub primitive: Cochain,
}

fn closedness_defect(c_: &Cochain, c: &SimplicialComplex) -> Result<f64> {
    let k = c_.degree();
    if k >= c.dim() {
        return Ok(0.0);
    }
    let dc = d(c_, c)?;
    let mut scale = 0.0;
    for s in 0..c.count(k + 1) {
        let v: f64 = c.boundary(k + 1, s).map(|(f, _)| c_.values()[f].abs()).sum();
        scale += v * v;
    }
    let num = dc.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(if scale == 0.0 { 0.0 } else { num / scale.sqrt() })
}

/// Fraction of sampled points where the rank of DF exceeds `max_rank`.
pub fn rank_violation(f: &AnalyticMap, max_rank: usize, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Ok(0.0);
    }
    let plan = SamplingPlan { samples, refine_rounds: 0, seed, ..SamplingPlan::default() };
    let set = collect_samples(f, &plan, &|s: &Sample| s.product(max_rank + 1), &|_| true)?;
    let bad = set.samples.iter().filter(|s| rank_of(&s.singular_values, plan.rank_tol) > max_rank).count();
    Ok(bad as f64 / set.samples.len() as f64)
}

/// Runs the discrete pipeline and keeps the intermediate cochains.
pub fn hopf_pipeline(f: &AnalyticMap, omega: &EuclideanForm, c: &SimplicialComplex, config: &HopfConfig) -> Result<HopfPipeline> {
    if c.kind() != ComplexKind::Sphere || c.dim() != 3 {
        return Err(Error::DomainMismatch { detail: "the Hopf invariant needs a mesh of S³".into() });
    }
    if f.domain() != &Space::Sphere(3) || f.codomain().ambient_dim() != 3 || omega.degree() != 2 {
        return Err(Error::DomainMismatch {
            detail: format!("need F: S³ → R³ and a 2-form on R³, got `{}`: {} → {}", f.name(), f.domain(), f.codomain()),
        });
    }
    let violation = rank_violation(f, 2, config.rank_samples, config.seed)?;
    let target = project_form_with_rule(f, omega, c, &config.projection_rule(2)?)?;
    let mut report = HopfReport {
        map: f.name().to_string(),
        value: 0.0,
        abs_integral: 0.0,
        closedness_defect: closedness_defect(&target, c)?,
        exactness_obstruction: 0.0,
        primitive_residual: 0.0,
        primitive_sup: 0.0,
        sup_ratio: 0.0,
        solver_iterations: 0,
        mesh_level: c.level(),
        mesh_checksum: c.checksum().to_string(),
        quadrature_order: config.quadrature_order,
        projection_subdivisions: config.projection_subdivisions,
        rank_violation_fraction: violation,
        rank_flag: violation > 0.0,
    };
    if target.is_zero() {
        let primitive = Cochain::zeros(c, 1)?;
        return Ok(HopfPipeline { report, target, primitive });
    }
    let sol = least_norm_primitive(&target, c, config.tol)?;
    let field = PullbackField::new(f, omega, c)?;
    let integral = integrate_wedge(&sol.primitive, &field, c, &SimplexRule::new(3, config.wedge_order)?)?;
    report.value = integral.value;
    report.abs_integral = integral.abs;
    report.exactness_obstruction = sol.residual;
    report.primitive_residual = sol.residual;
    report.primitive_sup = comass_estimate(&sol.primitive, c)?;
    report.sup_ratio = sol.sup_ratio;
    report.solver_iterations = sol.solver_iterations;
    Ok(HopfPipeline { report, target, primitive: sol.primitive })
}

/// H_ω(F) for F: S³ → R³ of rank ≤ 2.
pub fn hopf_invariant(f: &AnalyticMap, omega: &EuclideanForm, c: &SimplicialComplex, config: &HopfConfig) -> Result<HopfReport> {
    Ok(hopf_pipeline(f, omega, c, config)?.report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub base_value: f64,
    /// |H(α + dγ) − H(α)| per trial.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

/// Perturbs the primitive by dγ for random 0-cochains γ with max |γ| equal to
/// the comass estimate of α and reports how much the integral moves.
pub fn primitive_independence(
    f: &AnalyticMap,
    omega: &EuclideanForm,
    c: &SimplicialComplex,
    trials: usize,
    config: &HopfConfig,
) -> Result<IndependenceReport> {
    let run = hopf_pipeline(f, omega, c, config)?;
    let base = run.report.value;
    if run.target.is_zero() {
        return Ok(IndependenceReport { base_value: base, deviations: vec![0.0; trials], max_deviation: 0.0 });
    }
    let amplitude = run.report.primitive_sup;
    let field = PullbackField::new(f, omega, c)?;
    let rule = SimplexRule::new(3, config.wedge_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut deviations = Vec::with_capacity(trials);
    for _ in 0..trials {
        let gamma = Cochain::from_values(c, 0, (0..c.count(0)).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect())?;
        let alpha = run.primitive.add(&d(&gamma, c)?)?;
        deviations.push((integrate_wedge(&alpha, &field, c, &rule)?.value - base).abs());
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(IndependenceReport { base_value: base, deviations, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::bump_area_form;
    use crate::maps::lookup;
    use crate::mesh::gen_sphere;

    #[test]
    fn constant_map_has_zero_invariant() {
        let c = gen_sphere(3, 1).unwrap();
        let r = hopf_invariant(&lookup("const:0.1,0.2,0.3").unwrap(), &bump_area_form(), &c, &HopfConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.rank_flag);
    }

    #[test]
    fn coarse_hopf_is_positive_and_rank_two() {
        let c = gen_sphere(3, 2).unwrap();
        let r = hopf_invariant(&lookup("i∘hopf").unwrap(), &bump_area_form(), &c, &HopfConfig::default()).unwrap();
        assert!(r.value > 0.8 && r.value < 1.1, "{r:?}");
        assert!(!r.rank_flag);
        assert!(r.exactness_obstruction < 1e-6);
    }

    #[test]
    fn zero_perturbation_changes_nothing() {
        let c = gen_sphere(3, 1).unwrap();
        let r = primitive_independence(&lookup("const:1,0,0").unwrap(), &bump_area_form(), &c, 3, &HopfConfig::default()).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn rejects_non_sphere_meshes() {
        let c = crate::mesh::gen_product_interval(&gen_sphere(3, 0).unwrap(), 1).unwrap();
        assert!(hopf_invariant(&lookup("i∘hopf").unwrap(), &bump_area_form(), &c, &HopfConfig::default()).is_err());
    }
}
