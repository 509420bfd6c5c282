//! Runs the robustness argument for the Hopf invariant on a concrete homotopy
//! F: S³×[0,1] → R³ and measures every term it bounds.
//!
//! On the product mesh: c = ∫F*ω, α with dα = dc, β with dβ = c − α. On each
//! end slice: β̃ with dβ̃ = c_i, γ with dγ = α|, η with dη = β| − β̃ + γ.
//! (d(β| − β̃) = −α| since dβ = c − α, hence the sign in front of γ.)
//! Stokes for the piecewise smooth 3-form W(β) ∧ F*ω ties the boundary
//! integrals to the bulk, and the end-slice integrals split into the Hopf
//! value, the γ correction and the exact η part.

use crate::dilation::{dilation, product_power_violation, Sample, SamplingPlan};
use crate::error::{Error, Result};
use crate::forms::{
    comass_estimate, d, integrate_top, integrate_wedge, project_form_with_rule, sup_norm, Cochain, EuclideanForm, PullbackField,
    SimplexRule, WedgeField,
};
use crate::hopf::{hopf_invariant, hopf_pipeline, HopfConfig};
use crate::maps::{time_slice, AnalyticMap, Space};
use crate::mesh::{gen_sphere, ComplexKind, SimplicialComplex, Slice};
use crate::solver::{least_norm_primitive, mass_norm, PrimitiveSolution};
use serde::{Serialize, Serializer};

/// Bounds and implied constants below this are reported as undefined.
pub const UNDEFINED_BELOW: f64 = 1e-10;
/// Default relative Stokes mismatch above which the audit is rejected.
pub const STOKES_TOL: f64 = 0.01;

/// A quotient that is only meaningful when its denominator is not degenerate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Value(f64),
    Undefined,
}

impl Ratio {
    pub fn of(lhs: f64, rhs: f64) -> Ratio {
        if rhs.is_finite() && rhs >= UNDEFINED_BELOW {
            Ratio::Value(lhs / rhs)
        } else {
            Ratio::Undefined
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => s.serialize_f64(*v),
            Ratio::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ratio::Value(v) => write!(f, "{v}"),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditConfig {
    /// Projection and end-slice settings; `hopf.wedge_order` is the 3-simplex rule.
    pub hopf: HopfConfig,
    /// Degree of the 4-simplex rule for the bulk integrals.
    pub bulk_order: usize,
    /// Each 4-simplex is split into m⁴ pieces for the bulk integrals.
    pub bulk_subdivisions: usize,
    pub stokes_tol: f64,
    /// S³ level on which the end-point Hopf values are recomputed by the hopf
    /// module; `None` uses the end slices themselves.
    pub reference_level: Option<usize>,
    pub plan: SamplingPlan,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            hopf: HopfConfig::default(),
            bulk_order: 5,
            bulk_subdivisions: 2,
            stokes_tol: STOKES_TOL,
            reference_level: Some(3),
            plan: SamplingPlan::default(),
        }
    }
}

/// L¹ norms of the three pieces of d(β ∧ F*ω) = F*(ω∧ω) − α ∧ F*ω − β ∧ F*dω.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BulkTerms {
    pub beta_d_omega: f64,
    /// F*ω ∧ F*ω pointwise; ω∧ω is a 4-form on R³, so this is roundoff.
    pub omega_omega: f64,
    pub alpha_omega: f64,
    /// W(c) ∧ F*ω, the term the discrete identity actually carries in place
    /// of F*(ω∧ω). It is an interpolation error and vanishes under refinement.
    pub discrete_omega_omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointTerms {
    pub t: f64,
    /// ∫ β ∧ F*ω over the slice.
    pub boundary_integral: f64,
    /// ∫ β̃ ∧ F*ω, the Hopf value on the slice mesh.
    pub slice_hopf: f64,
    /// ∫ γ ∧ F*ω.
    pub correction: f64,
    /// ∫ dη ∧ F*ω, zero up to quadrature when F_t has rank ≤ 2. The
    /// boundary integral equals slice_hopf − correction + exact_part.
    pub exact_part: f64,
    pub gamma_sup: f64,
    pub eta_sup: f64,
    pub beta_tilde_sup: f64,
    pub gamma_obstruction: f64,
    pub eta_obstruction: f64,
    pub rank_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub map: String,
    pub mesh_level: Option<usize>,
    pub steps: usize,
    pub product_checksum: String,
    /// |H(F₀) − H(F₁)| from the hopf module.
    pub hopf_gap: f64,
    pub hopf_values: [f64; 2],
    pub reference_level: Option<usize>,
    /// The same gap assembled from the chain: |bulk + (correction − exact part)|₁ − (correction − exact part)|₀|.
    pub chain_gap: f64,
    pub dil2: f64,
    pub dil3: f64,
    /// max over samples of s₁s₂s₃s₄ − (s₁s₂s₃)^{4/3}, with s₄ = 0 past the codomain.
    pub dil4_violation: f64,
    pub alpha_sup: f64,
    pub beta_sup: f64,
    pub gamma_sup: f64,
    pub eta_sup: f64,
    /// ∫ d(β ∧ F*ω) over the product.
    pub bulk_integral: f64,
    /// |boundary − bulk| / max(1, |boundary|).
    pub stokes_residual: f64,
    /// ∫ γ ∧ F*ω at t = 0 and t = 1.
    pub endpoint_correction: [f64; 2],
    pub endpoints: [EndpointTerms; 2],
    pub bulk_terms: BulkTerms,
    /// max |dc − ∫F*dω| / vol over 3-simplices.
    pub d_omega_discrepancy: f64,
    pub alpha_obstruction: f64,
    pub beta_obstruction: f64,
    pub bound_value: f64,
    pub measured_ratio: Ratio,
}

impl AuditReport {
    pub fn csv_header() -> &'static str {
        "map,mesh_level,steps,hopf_gap,chain_gap,dil2,dil3,alpha_sup,beta_sup,gamma_sup,eta_sup,stokes_residual,\
         correction_0,correction_1,beta_d_omega,omega_omega,alpha_omega,bound_value,measured_ratio"
    }

    pub fn csv_row(&self) -> String {
        let level = self.mesh_level.map(|l| l.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.map,
            level,
            self.steps,
            self.hopf_gap,
            self.chain_gap,
            self.dil2,
            self.dil3,
            self.alpha_sup,
            self.beta_sup,
            self.gamma_sup,
            self.eta_sup,
            self.stokes_residual,
            self.endpoint_correction[0],
            self.endpoint_correction[1],
            self.bulk_terms.beta_d_omega,
            self.bulk_terms.omega_omega,
            self.bulk_terms.alpha_omega,
            self.bound_value,
            self.measured_ratio
        )
    }
}

/// Time steps making the time step about as long as the longest spatial edge.
pub fn default_steps(base: &SimplicialComplex) -> usize {
    (1.0 / base.max_edge_length()).ceil().max(1.0) as usize
}

/// Least-norm primitive whose non-exact remainder is measured against
/// max(‖target‖, reference) rather than ‖target‖ alone. Targets that are
/// themselves small differences of large cochains need this.
fn gated_primitive(
    stage: &str,
    target: &Cochain,
    c: &SimplicialComplex,
    reference: f64,
    tol: f64,
) -> Result<(PrimitiveSolution, f64)> {
    let run = || -> Result<(PrimitiveSolution, f64)> {
        let sol = least_norm_primitive(target, c, f64::INFINITY)?;
        let tn = mass_norm(target, c)?;
        let scale = tn.max(reference);
        let obstruction = if scale == 0.0 { 0.0 } else { sol.residual * tn / scale };
        if obstruction >= tol {
            return Err(Error::NonExact { obstruction, tol });
        }
        Ok((sol, obstruction))
    };
    run().map_err(|e| e.in_stage(stage))
}

/// |d||a|: the coboundary with every term counted positively.
fn abs_coboundary(a: &Cochain, c: &SimplicialComplex) -> Result<Cochain> {
    let k = a.degree() + 1;
    let values = (0..c.count(k)).map(|s| c.boundary(k, s).map(|(f, _)| a.values()[f].abs()).sum()).collect();
    Cochain::from_values(c, k, values)
}

fn check_inputs(f: &AnalyticMap, omega: &EuclideanForm, product: &SimplicialComplex) -> Result<()> {
    if product.kind() != ComplexKind::Product || product.dim() != 4 {
        return Err(Error::DomainMismatch { detail: "the audit needs a product mesh of S³×[0,1]".into() });
    }
    if f.domain() != &Space::product(Space::Sphere(3)) || f.codomain().ambient_dim() != 3 {
        return Err(Error::DomainMismatch {
            detail: format!("need a homotopy S³×[0,1] → R³, got `{}`: {} → {}", f.name(), f.domain(), f.codomain()),
        });
    }
    if omega.degree() != 2 || omega.ambient_dim() != 3 {
        return Err(Error::DomainMismatch { detail: "the audit needs a 2-form on R³".into() });
    }
    if omega.exterior_derivative().is_none() {
        return Err(Error::parameter("omega", "the audit needs a form with a known exterior derivative"));
    }
    Ok(())
}

struct Bulk<'a> {
    f: &'a AnalyticMap,
    omega: &'a EuclideanForm,
    product: &'a SimplicialComplex,
    alpha: Cochain,
    beta: Cochain,
    config: &'a AuditConfig,
}

impl Bulk<'_> {
    fn endpoint(&self, slice: &Slice) -> Result<EndpointTerms> {
        let stage = |s: &str| format!("{s} at t={}", slice.t);
        let sc = &slice.complex;
        let ft = time_slice(self.f, slice.t)?;
        let run = hopf_pipeline(&ft, self.omega, sc, &self.config.hopf).map_err(|e| e.in_stage(&stage("beta_tilde")))?;
        let beta_tilde = run.primitive;
        let tol = self.config.hopf.tol;

        let alpha_s = self.alpha.restrict(self.product, slice)?;
        let (gamma, gamma_obstruction) = gated_primitive(&stage("gamma"), &alpha_s, sc, mass_norm(&run.target, sc)?, tol)?;
        let gamma = gamma.primitive;

        let beta_s = self.beta.restrict(self.product, slice)?;
        let rest = beta_s.sub(&beta_tilde)?.add(&gamma)?;
        let (eta, eta_obstruction) = gated_primitive(&stage("eta"), &rest, sc, mass_norm(&beta_tilde, sc)?, tol)?;
        let eta = eta.primitive;

        let field = PullbackField::new(&ft, self.omega, sc)?;
        let rule = SimplexRule::new(3, self.config.hopf.wedge_order)?;
        Ok(EndpointTerms {
            t: slice.t,
            boundary_integral: integrate_wedge(&beta_s, &field, sc, &rule)?.value,
            slice_hopf: run.report.value,
            correction: integrate_wedge(&gamma, &field, sc, &rule)?.value,
            exact_part: integrate_wedge(&d(&eta, sc)?, &field, sc, &rule)?.value,
            gamma_sup: comass_estimate(&gamma, sc)?,
            eta_sup: eta.max_abs(),
            beta_tilde_sup: run.report.primitive_sup,
            gamma_obstruction,
            eta_obstruction,
            rank_flag: run.report.rank_flag,
        })
    }
}

/// Executes the chain on `product` and the end slices of its boundary.
pub fn audit_homotopy(
    f: &AnalyticMap,
    omega: &EuclideanForm,
    product: &SimplicialComplex,
    config: &AuditConfig,
) -> Result<AuditReport> {
    check_inputs(f, omega, product)?;
    let d_omega = omega.exterior_derivative().expect("checked above");
    let tol = config.hopf.tol;

    let c = project_form_with_rule(f, omega, product, &config.hopf.projection_rule(2)?).map_err(|e| e.in_stage("project"))?;
    let dc = d(&c, product)?;
    let direct = project_form_with_rule(f, d_omega, product, &SimplexRule::new(3, config.hopf.quadrature_order)?).map_err(|e| e.in_stage("project"))?;
    let d_omega_discrepancy = sup_norm(&dc.sub(&direct)?, product)?;

    // dc and c − α come out of cancellation; measure what is left against the
    // sizes they were computed from.
    let (alpha, alpha_obstruction) = gated_primitive("alpha", &dc, product, mass_norm(&abs_coboundary(&c, product)?, product)?, tol)?;
    let alpha = alpha.primitive;
    let closed = c.sub(&alpha)?;
    let (beta, beta_obstruction) = gated_primitive("beta", &closed, product, mass_norm(&c, product)?, tol)?;
    let beta = beta.primitive;

    let field = PullbackField::new(f, omega, product)?;
    let d_field = PullbackField::new(f, d_omega, product)?;
    let rule = SimplexRule::new(4, config.bulk_order)?.composite(config.bulk_subdivisions);
    let db_part = integrate_wedge(&d(&beta, product)?, &field, product, &rule)?;
    let b_domega = integrate_wedge(&beta, &d_field, product, &rule)?;
    let bulk_integral = db_part.value - b_domega.value;
    let bulk_terms = BulkTerms {
        beta_d_omega: b_domega.abs,
        omega_omega: integrate_top(&WedgeField(&field, &field), product, &rule)?.abs,
        alpha_omega: integrate_wedge(&alpha, &field, product, &rule)?.abs,
        discrete_omega_omega: integrate_wedge(&c, &field, product, &rule)?.abs,
    };

    let (s0, s1) = product.boundary_slices()?;
    let bulk = Bulk { f, omega, product, alpha, beta, config };
    let e0 = bulk.endpoint(&s0)?;
    let e1 = bulk.endpoint(&s1)?;

    let boundary = e1.boundary_integral - e0.boundary_integral;
    let stokes_residual = (boundary - bulk_integral).abs() / boundary.abs().max(1.0);
    if !(stokes_residual <= config.stokes_tol) {
        return Err(Error::AuditInconsistent {
            detail: format!(
                "Stokes mismatch {stokes_residual:.3e} exceeds {:.1e}: boundary {boundary}, bulk {bulk_integral}",
                config.stokes_tol
            ),
        });
    }
    let chain_gap = (bulk_integral + (e1.correction - e1.exact_part) - (e0.correction - e0.exact_part)).abs();

    let hopf_values = match config.reference_level {
        None => [e0.slice_hopf, e1.slice_hopf],
        Some(level) => {
            let sphere = gen_sphere(3, level)?;
            let value = |t: f64| -> Result<f64> {
                let ft = time_slice(f, t)?;
                Ok(hopf_invariant(&ft, omega, &sphere, &config.hopf).map_err(|e| e.in_stage("hopf"))?.value)
            };
            [value(0.0)?, value(1.0)?]
        }
    };

    let echo = SamplingPlan { echo: true, ..config.plan.clone() };
    let r2 = dilation(f, 2, &config.plan).map_err(|e| e.in_stage("dilation"))?;
    let r3 = dilation(f, 3, &echo).map_err(|e| e.in_stage("dilation"))?;
    let padded: Vec<Sample> = r3
        .samples
        .iter()
        .flatten()
        .map(|s| {
            let mut v = s.singular_values.clone();
            v.resize(4, 0.0);
            Sample { point: s.point.clone(), singular_values: v }
        })
        .collect();
    let (dil2, dil3) = (r2.sup_estimate, r3.sup_estimate);
    let bound_value = dil2 * dil3 + dil3 * dil3 + dil3.powf(4.0 / 3.0);
    let hopf_gap = (hopf_values[0] - hopf_values[1]).abs();

    Ok(AuditReport {
        map: f.name().to_string(),
        mesh_level: product.level(),
        steps: product_steps(product),
        product_checksum: product.checksum().to_string(),
        hopf_gap,
        hopf_values,
        reference_level: config.reference_level,
        chain_gap,
        dil2,
        dil3,
        dil4_violation: product_power_violation(&padded, 3, 4),
        alpha_sup: comass_estimate(&bulk.alpha, product)?,
        beta_sup: comass_estimate(&bulk.beta, product)?,
        gamma_sup: e0.gamma_sup.max(e1.gamma_sup),
        eta_sup: e0.eta_sup.max(e1.eta_sup),
        bulk_integral,
        stokes_residual,
        endpoint_correction: [e0.correction, e1.correction],
        endpoints: [e0, e1],
        bulk_terms,
        d_omega_discrepancy,
        alpha_obstruction,
        beta_obstruction,
        bound_value,
        measured_ratio: Ratio::of(hopf_gap, bound_value),
    })
}

fn product_steps(product: &SimplicialComplex) -> usize {
    let a = product.ambient_dim();
    let mut times: Vec<f64> = (0..product.vertex_count()).map(|v| product.vertex(v)[a - 1]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    times.len() - 1
}

/// One inequality from the chain with its measured implied constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainBound {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: Ratio,
}

/// Each step's lhs against the dilation expression that bounds it.
pub fn verify_chain_bounds(r: &AuditReport) -> Vec<ChainBound> {
    let (d2, d3) = (r.dil2, r.dil3);
    let bound = |name, lhs: f64, rhs: f64| ChainBound { name, lhs, rhs, constant: Ratio::of(lhs, rhs) };
    vec![
        bound("alpha_sup <= c dil3", r.alpha_sup, d3),
        bound("beta_sup <= c (dil2 + dil3)", r.beta_sup, d2 + d3),
        bound("gamma_sup <= c dil3", r.gamma_sup, d3),
        bound(
            "endpoint correction <= c dil2 dil3",
            r.endpoint_correction[0].abs().max(r.endpoint_correction[1].abs()),
            d2 * d3,
        ),
        bound("|beta ^ F*dw| <= c (dil2 + dil3) dil3", r.bulk_terms.beta_d_omega, (d2 + d3) * d3),
        bound("|F*(w ^ w)| <= c dil3^(4/3)", r.bulk_terms.omega_omega, d3.powf(4.0 / 3.0)),
        bound("|alpha ^ F*w| <= c dil2 dil3", r.bulk_terms.alpha_omega, d2 * d3),
        bound("hopf gap <= c bound", r.hopf_gap, r.bound_value),
    ]
}

/// Bounds whose lhs is below this multiple of max(1, rhs) are treated as
/// identically zero when comparing constants across meshes.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// How one implied constant moved between a coarse and a fine audit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantDrift {
    pub name: &'static str,
    pub coarse: Ratio,
    pub fine: Ratio,
    /// fine / coarse − 1, when both are defined and not at roundoff.
    pub relative_change: Option<f64>,
    pub stable: bool,
}

fn at_roundoff(b: &ChainBound) -> bool {
    b.lhs.abs() <= ROUNDOFF_FLOOR * b.rhs.max(1.0)
}

/// Compares the chain constants of two audits of the same homotopy. A
/// constant is stable when both are undefined, both lhs sit at roundoff, or
/// the relative change is at most `tol`.
pub fn constant_drift(coarse: &AuditReport, fine: &AuditReport, tol: f64) -> Vec<ConstantDrift> {
    verify_chain_bounds(coarse)
        .into_iter()
        .zip(verify_chain_bounds(fine))
        .map(|(a, b)| {
            let (relative_change, stable) = match (a.constant, b.constant) {
                (Ratio::Undefined, Ratio::Undefined) => (None, true),
                _ if at_roundoff(&a) && at_roundoff(&b) => (None, true),
                (Ratio::Value(x), Ratio::Value(y)) if x.is_finite() && y.is_finite() && x != 0.0 => {
                    let r = y / x - 1.0;
                    (Some(r), r.abs() <= tol)
                }
                _ => (None, false),
            };
            ConstantDrift { name: a.name, coarse: a.constant, fine: b.constant, relative_change, stable }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_serializes_undefined_as_text() {
        assert_eq!(serde_json::to_string(&Ratio::of(1.0, 0.0)).unwrap(), "\"undefined\"");
        assert_eq!(serde_json::to_string(&Ratio::of(1.0, 4.0)).unwrap(), "0.25");
        assert_eq!(Ratio::of(0.0, 1e-11), Ratio::Undefined);
    }
}
