//! Cochains, Whitney interpolation and quadrature-based integrals of forms.
//!
//! A k-cochain stores one value per k-simplex, relative to the simplex's
//! stored orientation. Integrals over the flat simplices of a sphere mesh are
//! taken against the pullback through radial projection, so they are
//! integrals over the curved simplices of the smooth manifold.

pub mod exterior;
pub mod quadrature;
mod whitney;

pub use exterior::AltForm;
pub use quadrature::SimplexRule;
pub use whitney::{at_barycentric, SimplexGeometry, TangentForm, WhitneyTable};

use crate::error::{Error, Result};
use crate::maps::AnalyticMap;
use crate::mesh::{ComplexKind, SimplicialComplex, Slice};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    degree: usize,
    values: Vec<f64>,
    complex_id: String,
}

impl Cochain {
    pub fn zeros(c: &SimplicialComplex, degree: usize) -> Result<Self> {
        Self::from_values(c, degree, vec![0.0; c.count(degree.min(c.dim()))])
    }

    pub fn from_values(c: &SimplicialComplex, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > c.dim() {
            return Err(Error::DegreeMismatch {
                detail: format!("degree {degree} exceeds the complex dimension {}", c.dim()),
            });
        }
        if values.len() != c.count(degree) {
            return Err(Error::DegreeMismatch {
                detail: format!("{} values for {} {degree}-simplices", values.len(), c.count(degree)),
            });
        }
        Ok(Cochain { degree, values, complex_id: c.checksum().to_string() })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn complex_id(&self) -> &str {
        &self.complex_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn check_complex(&self, c: &SimplicialComplex) -> Result<()> {
        if self.complex_id != c.checksum() {
            return Err(Error::ComplexMismatch {
                expected: c.checksum().to_string(),
                found: self.complex_id.clone(),
            });
        }
        Ok(())
    }

    fn same_space(&self, other: &Cochain) -> Result<()> {
        if self.complex_id != other.complex_id {
            return Err(Error::ComplexMismatch {
                expected: self.complex_id.clone(),
                found: other.complex_id.clone(),
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                detail: format!("degrees {} and {}", self.degree, other.degree),
            });
        }
        Ok(())
    }

    fn with_values(&self, values: Vec<f64>) -> Cochain {
        Cochain { degree: self.degree, values, complex_id: self.complex_id.clone() }
    }

    pub fn scaled(&self, t: f64) -> Cochain {
        self.with_values(self.values.iter().map(|v| t * v).collect())
    }

    /// self + t·other
    pub fn axpy(&self, t: f64, other: &Cochain) -> Result<Cochain> {
        self.same_space(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + t * b).collect()))
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.axpy(-1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Restriction to a boundary slice of a product complex.
    pub fn restrict(&self, product: &SimplicialComplex, slice: &Slice) -> Result<Cochain> {
        self.check_complex(product)?;
        let k = self.degree;
        let sc = &slice.complex;
        if k > sc.dim() {
            return Err(Error::DegreeMismatch {
                detail: format!("cannot restrict a {k}-cochain to a {}-dimensional slice", sc.dim()),
            });
        }
        let mut values = Vec::with_capacity(sc.count(k));
        let mut tuple = Vec::with_capacity(k + 1);
        for s in 0..sc.count(k) {
            tuple.clear();
            tuple.extend(sc.simplex(k, s).iter().map(|&v| slice.vertex_map[v]));
            let g = product.find(k, &tuple).ok_or_else(|| Error::DomainMismatch {
                detail: format!("slice simplex {tuple:?} is not a simplex of the product"),
            })?;
            let sign = (sc.orientation(k, s) * product.orientation(k, g)) as f64;
            values.push(sign * self.values[g]);
        }
        Cochain::from_values(sc, k, values)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&CochainFile {
            degree: self.degree,
            complex: self.complex_id.clone(),
            values: self.values.clone(),
        })
        .expect("cochain serialization")
    }

    /// Parses a cochain file and checks it against `c`.
    pub fn from_json_str(text: &str, c: &SimplicialComplex) -> Result<Cochain> {
        let f: CochainFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if f.complex != c.checksum() {
            return Err(Error::ComplexMismatch { expected: c.checksum().to_string(), found: f.complex });
        }
        Cochain::from_values(c, f.degree, f.values)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CochainFile {
    degree: usize,
    complex: String,
    values: Vec<f64>,
}

pub fn save_cochain(a: &Cochain, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, a.to_json_string()).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn load_cochain(path: impl AsRef<Path>, c: &SimplicialComplex) -> Result<Cochain> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    Cochain::from_json_str(&text, c)
}

/// Coboundary: (da)(σ) = Σ over faces of σ of the signed values of a.
pub fn d(a: &Cochain, c: &SimplicialComplex) -> Result<Cochain> {
    a.check_complex(c)?;
    let k = a.degree;
    if k >= c.dim() {
        return Err(Error::TopDegree { degree: k, dim: c.dim() });
    }
    let values = (0..c.count(k + 1))
        .map(|s| c.boundary(k + 1, s).map(|(f, sign)| sign as f64 * a.values[f]).sum())
        .collect();
    Cochain::from_values(c, k + 1, values)
}

type FormFn = dyn Fn(&[f64]) -> AltForm + Send + Sync;

/// A differential form on R^D with pointwise coefficients.
#[derive(Clone)]
pub struct EuclideanForm {
    degree: usize,
    ambient_dim: usize,
    eval: Arc<FormFn>,
    derivative: Option<Arc<EuclideanForm>>,
    sup_norm_hint: Option<f64>,
}

impl std::fmt::Debug for EuclideanForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EuclideanForm")
            .field("degree", &self.degree)
            .field("ambient_dim", &self.ambient_dim)
            .field("has_derivative", &self.derivative.is_some())
            .field("sup_norm_hint", &self.sup_norm_hint)
            .finish()
    }
}

impl EuclideanForm {
    pub fn new(degree: usize, ambient_dim: usize, eval: impl Fn(&[f64]) -> AltForm + Send + Sync + 'static) -> Self {
        EuclideanForm { degree, ambient_dim, eval: Arc::new(eval), derivative: None, sup_norm_hint: None }
    }

    pub fn with_derivative(mut self, d: EuclideanForm) -> Self {
        assert_eq!(d.degree, self.degree + 1, "exterior derivative degree");
        assert_eq!(d.ambient_dim, self.ambient_dim);
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_sup_norm_hint(mut self, hint: f64) -> Self {
        self.sup_norm_hint = Some(hint);
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn sup_norm_hint(&self) -> Option<f64> {
        self.sup_norm_hint
    }

    pub fn eval(&self, p: &[f64]) -> AltForm {
        (self.eval)(p)
    }

    /// Full antisymmetric coefficient array at `p`.
    pub fn eval_full(&self, p: &[f64]) -> Vec<f64> {
        self.eval(p).to_full()
    }

    pub fn exterior_derivative(&self) -> Option<&EuclideanForm> {
        self.derivative.as_deref()
    }

    /// t·ω, with derivative and hint scaled accordingly.
    pub fn scaled(&self, t: f64) -> EuclideanForm {
        let inner = self.eval.clone();
        EuclideanForm {
            degree: self.degree,
            ambient_dim: self.ambient_dim,
            eval: Arc::new(move |p| inner(p).scaled(t)),
            derivative: self.derivative.as_ref().map(|d| Arc::new(d.scaled(t))),
            sup_norm_hint: self.sup_norm_hint.map(|h| h * t.abs()),
        }
    }

    /// ω ∧ η pointwise.
    pub fn wedge(&self, other: &EuclideanForm) -> EuclideanForm {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let (a, b) = (self.eval.clone(), other.eval.clone());
        EuclideanForm::new(self.degree + other.degree, self.ambient_dim, move |p| a(p).wedge(&b(p)))
    }

    /// dω at `p` by central differences with step h.
    pub fn fd_derivative(&self, p: &[f64], h: f64) -> AltForm {
        let n = self.ambient_dim;
        let mut out = AltForm::zero(n, self.degree + 1);
        let mut x = p.to_vec();
        for i in 0..n {
            x[i] = p[i] + h;
            let fp = self.eval(&x);
            x[i] = p[i] - h;
            let fm = self.eval(&x);
            x[i] = p[i];
            let mut partial = fp;
            partial.add_scaled(-1.0, &fm);
            partial.scale(0.5 / h);
            let mut dxi = AltForm::zero(n, 1);
            dxi.coeffs_mut()[i] = 1.0;
            out.add_scaled(1.0, &dxi.wedge(&partial));
        }
        out
    }
}

/// Radial profile of the bump area form, total = ∫_{S²} i*ω.
fn bump_profile(total: f64, r: f64) -> (f64, f64) {
    let u = 2.0 * (r - 1.0);
    if u.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - u * u;
    let f = total / (4.0 * std::f64::consts::PI) * (1.0 - 1.0 / q).exp();
    // d/dr: u' = 2, d/du (1 − 1/q) = −2u/q²
    let fp = f * (-4.0 * u / (q * q));
    (f, fp)
}

/// The 2-form f(|v|)(v₁ dv₂∧dv₃ + v₂ dv₃∧dv₁ + v₃ dv₁∧dv₂) on R³ with a bump
/// f supported in [1/2, 3/2] and f(1) = 1/(4π), so it restricts to the unit
/// sphere with total integral 1.
pub fn bump_area_form() -> EuclideanForm {
    bump_area_form_with_total(1.0)
}

/// As [`bump_area_form`] but with ∫_{S²} i*ω = `total`.
pub fn bump_area_form_with_total(total: f64) -> EuclideanForm {
    let dw = EuclideanForm::new(3, 3, move |v| {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (f, fp) = bump_profile(total, r);
        AltForm::from_coeffs(3, 3, vec![fp * r + 3.0 * f])
    });
    EuclideanForm::new(2, 3, move |v| {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (f, _) = bump_profile(total, r);
        // coefficient order: dv1∧dv2, dv1∧dv3, dv2∧dv3
        AltForm::from_coeffs(3, 2, vec![f * v[2], -f * v[1], f * v[0]])
    })
    .with_derivative(dw)
    .with_sup_norm_hint(total.abs() / (4.0 * std::f64::consts::PI) * 1.5)
}

/// The closed 2-form x·dA / (4π|x|³) on R³ minus the origin. Its restriction
/// to any sphere about 0 has total 1, so it is closed but not exact there.
pub fn sphere_area_form() -> EuclideanForm {
    let zero = EuclideanForm::new(3, 3, |_| AltForm::zero(3, 3));
    EuclideanForm::new(2, 3, |v| {
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let s = 1.0 / (4.0 * std::f64::consts::PI * r2 * r2.sqrt());
        AltForm::from_coeffs(3, 2, vec![s * v[2], -s * v[1], s * v[0]])
    })
    .with_derivative(zero)
}

/// A form field that can be evaluated on the flat simplices of a mesh.
pub trait FormField: Sync {
    fn degree(&self) -> usize;

    /// The field at ambient point `x`, pulled back to the simplex whose edge
    /// vectors are the columns of `edges`, in the dual edge basis.
    fn on_simplex(&self, x: &[f64], edges: &DMatrix<f64>) -> Result<AltForm>;
}

/// x ↦ ((F∘φ)*ω)_x, where φ is the carrier projection of the mesh.
pub struct PullbackField<'a> {
    pub map: &'a AnalyticMap,
    pub form: &'a EuclideanForm,
    pub complex: &'a SimplicialComplex,
}

impl<'a> PullbackField<'a> {
    pub fn new(map: &'a AnalyticMap, form: &'a EuclideanForm, complex: &'a SimplicialComplex) -> Result<Self> {
        if map.domain().ambient_dim() != complex.ambient_dim() {
            return Err(Error::DomainMismatch {
                detail: format!(
                    "map `{}` has domain {} but the mesh lives in R^{}",
                    map.name(),
                    map.domain(),
                    complex.ambient_dim()
                ),
            });
        }
        if map.codomain().ambient_dim() != form.ambient_dim() {
            return Err(Error::DomainMismatch {
                detail: format!("map `{}` lands in {} but the form lives on R^{}", map.name(), map.codomain(), form.ambient_dim()),
            });
        }
        Ok(PullbackField { map, form, complex })
    }
}

impl FormField for PullbackField<'_> {
    fn degree(&self) -> usize {
        self.form.degree()
    }

    fn on_simplex(&self, x: &[f64], edges: &DMatrix<f64>) -> Result<AltForm> {
        let p = self.complex.carrier_point(x);
        let y = self.map.eval(&p)?;
        if self.form.degree() == 0 {
            return Ok(AltForm::from_coeffs(edges.ncols(), 0, self.form.eval(&y).coeffs().to_vec()));
        }
        let j = self.map.jacobian(&p)?;
        let m = j * self.complex.carrier_jacobian(x) * edges;
        Ok(self.form.eval(&y).pullback(&m))
    }
}

/// Pointwise wedge of two fields.
pub struct WedgeField<'a, A: FormField, B: FormField>(pub &'a A, pub &'a B);

impl<A: FormField, B: FormField> FormField for WedgeField<'_, A, B> {
    fn degree(&self) -> usize {
        self.0.degree() + self.1.degree()
    }

    fn on_simplex(&self, x: &[f64], edges: &DMatrix<f64>) -> Result<AltForm> {
        Ok(self.0.on_simplex(x, edges)?.wedge(&self.1.on_simplex(x, edges)?))
    }
}

/// Quadrature of a degree-k field over every k-simplex, with orientation signs.
pub fn integrate_field(field: &dyn FormField, c: &SimplicialComplex, rule: &SimplexRule) -> Result<Cochain> {
    let k = field.degree();
    if k > c.dim() || rule.dim() != k {
        return Err(Error::DegreeMismatch {
            detail: format!("field of degree {k} with a {}-simplex rule on a {}-complex", rule.dim(), c.dim()),
        });
    }
    let scale = 1.0 / factorial(k);
    let values: Result<Vec<f64>> = (0..c.count(k))
        .into_par_iter()
        .map(|s| {
            let edges = c.edge_matrix(k, s);
            let p0 = c.vertex(c.simplex(k, s)[0]);
            let mut acc = 0.0;
            for (lam, w) in rule.iter() {
                let x = point_at(p0, &edges, lam);
                acc += w * field.on_simplex(&x, &edges)?.coeffs()[0];
            }
            Ok(c.orientation(k, s) as f64 * scale * acc)
        })
        .collect();
    Cochain::from_values(c, k, values?)
}

fn point_at(p0: &[f64], edges: &DMatrix<f64>, lambda: &[f64]) -> Vec<f64> {
    let mut x = p0.to_vec();
    for (j, &l) in lambda.iter().enumerate().skip(1) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += l * edges[(i, j - 1)];
        }
    }
    x
}

/// Cochain of ∫_σ F*ω over every k-simplex (k = degree of ω) with a rule of the given order.
pub fn project_form(map: &AnalyticMap, form: &EuclideanForm, c: &SimplicialComplex, order: usize) -> Result<Cochain> {
    let rule = SimplexRule::new(form.degree(), order)?;
    project_form_with_rule(map, form, c, &rule)
}

pub fn project_form_with_rule(
    map: &AnalyticMap,
    form: &EuclideanForm,
    c: &SimplicialComplex,
    rule: &SimplexRule,
) -> Result<Cochain> {
    if form.degree() > c.dim() {
        return Err(Error::DegreeMismatch {
            detail: format!("form of degree {} on a {}-complex", form.degree(), c.dim()),
        });
    }
    let field = PullbackField::new(map, form, c)?;
    integrate_field(&field, c, rule)
}

/// Local values of `a` on the k-faces of top simplex `s`, relative to sorted order.
fn local_values(a: &Cochain, c: &SimplicialComplex, s: usize) -> Vec<f64> {
    let k = a.degree;
    let per = exterior::binomial(c.dim() + 1, k + 1);
    c.top_subfaces(k)[s * per..(s + 1) * per]
        .iter()
        .map(|&f| c.orientation(k, f) as f64 * a.values[f])
        .collect()
}

/// Whitney interpolant of `a` on top simplex `s` as an affine form Σ λ_m A_m
/// in the edge basis (A_m is the value at vertex m).
pub fn whitney_vertex_forms(a: &Cochain, c: &SimplicialComplex, s: usize) -> Vec<AltForm> {
    WhitneyTable::get(c.dim(), a.degree).vertex_forms(&local_values(a, c, s))
}

/// Whitney interpolant of `a` at barycentric point `lambda` of top simplex `s`,
/// in an orthonormal frame of the simplex's tangent space.
pub fn whitney_eval(a: &Cochain, c: &SimplicialComplex, s: usize, lambda: &[f64]) -> Result<TangentForm> {
    a.check_complex(c)?;
    if lambda.len() != c.dim() + 1 || s >= c.count(c.dim()) {
        return Err(Error::parameter("lambda", "barycentric point must have dim+1 entries on an existing top simplex"));
    }
    let geo = SimplexGeometry::new(c, c.dim(), s)?;
    let w = at_barycentric(&whitney_vertex_forms(a, c, s), lambda);
    Ok(TangentForm { frame: geo.frame(), form: geo.to_orthonormal(&w) })
}

/// Signed integral and L¹ norm of a top-degree integrand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub abs: f64,
}

/// ∫ W(a) ∧ b over the complex, together with ∫ |W(a) ∧ b|.
pub fn integrate_wedge(a: &Cochain, b: &dyn FormField, c: &SimplicialComplex, rule: &SimplexRule) -> Result<Integral> {
    a.check_complex(c)?;
    let n = c.dim();
    if a.degree + b.degree() != n {
        return Err(Error::DegreeMismatch {
            detail: format!("degrees {} + {} do not add up to {n}", a.degree, b.degree()),
        });
    }
    if rule.dim() != n {
        return Err(Error::DegreeMismatch { detail: format!("{}-simplex rule on a {n}-complex", rule.dim()) });
    }
    let scale = 1.0 / factorial(n);
    let parts: Result<Vec<(f64, f64)>> = (0..c.count(n))
        .into_par_iter()
        .map(|s| {
            let forms = whitney_vertex_forms(a, c, s);
            if forms.iter().all(|f| f.is_zero()) {
                return Ok((0.0, 0.0));
            }
            let edges = c.edge_matrix(n, s);
            let p0 = c.vertex(c.simplex(n, s)[0]);
            let (mut v, mut m) = (0.0, 0.0);
            for (lam, w) in rule.iter() {
                let x = point_at(p0, &edges, lam);
                let top = at_barycentric(&forms, lam).wedge_top(&b.on_simplex(&x, &edges)?);
                v += w * top;
                m += w * top.abs();
            }
            let o = c.orientation(n, s) as f64;
            Ok((o * scale * v, scale * m))
        })
        .collect();
    Ok(sum_integrals(&parts?))
}

/// ∫ b and ∫ |b| for a top-degree field.
pub fn integrate_top(b: &dyn FormField, c: &SimplicialComplex, rule: &SimplexRule) -> Result<Integral> {
    let n = c.dim();
    if b.degree() != n || rule.dim() != n {
        return Err(Error::DegreeMismatch { detail: format!("field of degree {} on a {n}-complex", b.degree()) });
    }
    let scale = 1.0 / factorial(n);
    let parts: Result<Vec<(f64, f64)>> = (0..c.count(n))
        .into_par_iter()
        .map(|s| {
            let edges = c.edge_matrix(n, s);
            let p0 = c.vertex(c.simplex(n, s)[0]);
            let (mut v, mut m) = (0.0, 0.0);
            for (lam, w) in rule.iter() {
                let top = b.on_simplex(&point_at(p0, &edges, lam), &edges)?.coeffs()[0];
                v += w * top;
                m += w * top.abs();
            }
            Ok((c.orientation(n, s) as f64 * scale * v, scale * m))
        })
        .collect();
    Ok(sum_integrals(&parts?))
}

fn sum_integrals(parts: &[(f64, f64)]) -> Integral {
    parts.iter().fold(Integral::default(), |acc, &(v, m)| Integral { value: acc.value + v, abs: acc.abs + m })
}

/// max |a(σ)| / vol(σ), a mass-density proxy for the sup norm.
pub fn sup_norm(a: &Cochain, c: &SimplicialComplex) -> Result<f64> {
    a.check_complex(c)?;
    let k = a.degree;
    let dens: Vec<f64> = (0..c.count(k))
        .into_par_iter()
        .map(|s| if a.values[s] == 0.0 { 0.0 } else { a.values[s].abs() / c.volume(k, s) })
        .collect();
    Ok(dens.into_iter().fold(0.0, f64::max))
}

/// Sup of the comass and of the mass norm of the Whitney interpolant.
///
/// The interpolant is affine on each top simplex and both norms are convex,
/// so the maxima over a simplex are attained at its vertices; the vertices
/// are therefore the only sample points needed.
pub fn norm_estimates(a: &Cochain, c: &SimplicialComplex) -> Result<(f64, f64)> {
    a.check_complex(c)?;
    let n = c.dim();
    let per: Result<Vec<(f64, f64)>> = (0..c.count(n))
        .into_par_iter()
        .map(|s| {
            let forms = whitney_vertex_forms(a, c, s);
            if forms.iter().all(|f| f.is_zero()) {
                return Ok((0.0, 0.0));
            }
            let geo = SimplexGeometry::new(c, n, s)?;
            Ok(forms.iter().fold((0.0f64, 0.0f64), |(cm, ms), f| {
                let o = geo.to_orthonormal(f);
                (cm.max(o.comass()), ms.max(o.euclidean_norm()))
            }))
        })
        .collect();
    Ok(per?.into_iter().fold((0.0, 0.0), |(a, b), (x, y)| (a.max(x), b.max(y))))
}

pub fn comass_estimate(a: &Cochain, c: &SimplicialComplex) -> Result<f64> {
    Ok(norm_estimates(a, c)?.0)
}

/// Discrete Stokes check for a (dim−1)-cochain: returns (Σ da over top
/// simplices, Σ over the t=1 slice − Σ over the t=0 slice). The boundary term
/// is 0 on closed complexes.
pub fn stokes_check(a: &Cochain, c: &SimplicialComplex) -> Result<(f64, f64)> {
    if a.degree + 1 != c.dim() {
        return Err(Error::DegreeMismatch {
            detail: format!("Stokes check needs a degree-{} cochain, got degree {}", c.dim() - 1, a.degree),
        });
    }
    let bulk: f64 = d(a, c)?.values.iter().sum();
    if c.kind() != ComplexKind::Product {
        return Ok((bulk, 0.0));
    }
    let (s0, s1) = c.boundary_slices()?;
    let total = |s: &Slice| -> Result<f64> { Ok(a.restrict(c, s)?.values.iter().sum()) };
    Ok((bulk, total(&s1)? - total(&s0)?))
}
