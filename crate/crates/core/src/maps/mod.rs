//! Smooth maps with Jacobians, and the combinators that build homotopies.
//!
//! Jacobians are ambient: for a map with domain in R^a and codomain in R^b,
//! `jacobian(p)` is b × a. On sphere domains only the tangential part is
//! meaningful; [`AnalyticMap::tangent_jacobian`] restricts to an orthonormal
//! tangent frame.

mod registry;
mod space;

pub use registry::{lookup, registry_names};
pub use space::Space;

use crate::error::{Error, Result};
use crate::forms::{EuclideanForm, TangentForm};
use nalgebra::DMatrix;
use serde::Serialize;
use std::sync::Arc;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Points closer than this to a declared interface count as non-smooth.
pub const INTERFACE_TOL: f64 = 1e-6;

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type DistFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    ClosedForm,
    FiniteDifference { h: f64 },
}

#[derive(Clone)]
pub struct AnalyticMap {
    name: String,
    domain: Space,
    codomain: Space,
    eval: Arc<EvalFn>,
    jac: Option<Arc<JacFn>>,
    mode: JacobianMode,
    interfaces: Option<Arc<DistFn>>,
}

impl std::fmt::Debug for AnalyticMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AnalyticMap({}: {} → {}, {:?})", self.name, self.domain, self.codomain, self.mode)
    }
}

impl AnalyticMap {
    /// A map with finite-difference Jacobians until [`Self::with_jacobian`] is called.
    pub fn new(
        name: impl Into<String>,
        domain: Space,
        codomain: Space,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        AnalyticMap {
            name: name.into(),
            domain,
            codomain,
            eval: Arc::new(eval),
            jac: None,
            mode: JacobianMode::FiniteDifference { h: FD_STEP },
            interfaces: None,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jac = Some(Arc::new(jac));
        self.mode = JacobianMode::ClosedForm;
        self
    }

    /// Declares non-smooth interfaces through a distance function.
    pub fn with_interfaces(mut self, dist: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.interfaces = Some(Arc::new(dist));
        self
    }

    /// Forces finite-difference Jacobians with step h.
    pub fn with_finite_differences(mut self, h: f64) -> Self {
        self.mode = JacobianMode::FiniteDifference { h };
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Space {
        &self.domain
    }

    pub fn codomain(&self) -> &Space {
        &self.codomain
    }

    pub fn jacobian_mode(&self) -> JacobianMode {
        self.mode
    }

    pub fn has_interfaces(&self) -> bool {
        self.interfaces.is_some()
    }

    fn eval_unchecked(&self, p: &[f64]) -> Vec<f64> {
        (self.eval)(p)
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.domain.ambient_dim() {
            return Err(Error::DomainMismatch {
                detail: format!("map `{}` expects points of R^{}, got {}", self.name, self.domain.ambient_dim(), p.len()),
            });
        }
        let y = self.eval_unchecked(p);
        if y.len() != self.codomain.ambient_dim() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::MapEval { map: self.name.clone(), point: p.to_vec() });
        }
        Ok(y)
    }

    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let j = match (self.mode, &self.jac) {
            (JacobianMode::ClosedForm, Some(jac)) => jac(p),
            (JacobianMode::FiniteDifference { h }, _) => self.fd_jacobian(p, h),
            (JacobianMode::ClosedForm, None) => self.fd_jacobian(p, FD_STEP),
        };
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::MapEval { map: self.name.clone(), point: p.to_vec() });
        }
        Ok(j)
    }

    /// Central differences along an orthonormal tangent frame, with the
    /// sphere factor retracted radially so the map is only evaluated on its
    /// domain. The normal direction gets a zero column.
    pub fn fd_jacobian(&self, p: &[f64], h: f64) -> DMatrix<f64> {
        let frame = self.domain.tangent_frame(p);
        let dt = self.fd_tangent(p, &frame, h);
        dt * frame.transpose()
    }

    fn fd_tangent(&self, p: &[f64], frame: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
        let b = self.codomain.ambient_dim();
        let mut out = DMatrix::zeros(b, frame.ncols());
        for j in 0..frame.ncols() {
            let step = |s: f64| -> Vec<f64> {
                let mut x: Vec<f64> = p.iter().enumerate().map(|(i, v)| v + s * frame[(i, j)]).collect();
                self.retract(&mut x);
                x
            };
            let (fp, fm) = (self.eval_unchecked(&step(h)), self.eval_unchecked(&step(-h)));
            for i in 0..b {
                out[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        out
    }

    fn retract(&self, x: &mut [f64]) {
        let sphere_part = match &self.domain {
            Space::Sphere(_) => x.len(),
            Space::Product(b) if matches!(**b, Space::Sphere(_)) => x.len() - 1,
            _ => return,
        };
        let r = x[..sphere_part].iter().map(|v| v * v).sum::<f64>().sqrt();
        x[..sphere_part].iter_mut().for_each(|v| *v /= r);
    }

    /// DF in an orthonormal tangent frame of the domain (codomain ambient × dim).
    pub fn tangent_jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let frame = self.domain.tangent_frame(p);
        Ok(self.jacobian(p)? * frame)
    }

    /// Tangent-frame Jacobian by central differences, for consistency checks.
    pub fn fd_tangent_jacobian(&self, p: &[f64], h: f64) -> DMatrix<f64> {
        let frame = self.domain.tangent_frame(p);
        self.fd_tangent(p, &frame, h)
    }

    /// Distance to the nearest declared non-smooth interface (∞ if none).
    pub fn interface_distance(&self, p: &[f64]) -> f64 {
        self.interfaces.as_ref().map_or(f64::INFINITY, |d| d(p))
    }

    pub fn is_smooth_at(&self, p: &[f64]) -> bool {
        self.interface_distance(p) >= INTERFACE_TOL
    }
}

pub fn identity(space: Space) -> AnalyticMap {
    let n = space.ambient_dim();
    AnalyticMap::new("id", space.clone(), space, |p| p.to_vec()).with_jacobian(move |_| DMatrix::identity(n, n))
}

/// h(z₁, z₂) = (2 Re(z₁z̄₂), 2 Im(z₁z̄₂), |z₁|² − |z₂|²) with z₁ = x₁ + i x₂, z₂ = x₃ + i x₄.
pub fn hopf_map() -> AnalyticMap {
    AnalyticMap::new("hopf", Space::Sphere(3), Space::Sphere(2), |x| {
        vec![
            2.0 * (x[0] * x[2] + x[1] * x[3]),
            2.0 * (x[1] * x[2] - x[0] * x[3]),
            x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3],
        ]
    })
    .with_jacobian(|x| {
        DMatrix::from_row_slice(
            3,
            4,
            &[
                2.0 * x[2], 2.0 * x[3], 2.0 * x[0], 2.0 * x[1], //
                -2.0 * x[3], 2.0 * x[2], 2.0 * x[1], -2.0 * x[0], //
                2.0 * x[0], 2.0 * x[1], -2.0 * x[2], -2.0 * x[3],
            ],
        )
    })
}

/// The inclusion S² → R³.
pub fn inclusion_s2() -> AnalyticMap {
    AnalyticMap::new("i-s2", Space::Sphere(2), Space::Euclidean(3), |p| p.to_vec())
        .with_jacobian(|_| DMatrix::identity(3, 3))
}

pub fn constant_map(domain: Space, value: Vec<f64>) -> AnalyticMap {
    let (a, b) = (domain.ambient_dim(), value.len());
    let name = format!("const:{}", value.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
    AnalyticMap::new(name, domain, Space::Euclidean(b), move |_| value.clone())
        .with_jacobian(move |_| DMatrix::zeros(b, a))
}

/// The reflection (x₁, x₂, x₃, x₄) ↦ (x₁, x₂, x₃, −x₄) of S³.
pub fn orientation_reversal() -> AnalyticMap {
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
    linear_isometry("rev", Space::Sphere(3), m)
}

/// x ↦ A x for an orthogonal matrix A, as a self-map of `space`.
pub fn linear_isometry(name: &str, space: Space, a: DMatrix<f64>) -> AnalyticMap {
    let a2 = a.clone();
    AnalyticMap::new(name, space.clone(), space, move |p| (&a * nalgebra::DVector::from_column_slice(p)).as_slice().to_vec())
        .with_jacobian(move |_| a2.clone())
}

/// f ∘ g.
pub fn compose(f: &AnalyticMap, g: &AnalyticMap) -> Result<AnalyticMap> {
    if !g.codomain.is_subset_of(&f.domain) {
        return Err(Error::DomainMismatch {
            detail: format!(
                "cannot compose `{}` ∘ `{}`: {} is not contained in {}",
                f.name, g.name, g.codomain, f.domain
            ),
        });
    }
    let (fe, ge) = (f.clone(), g.clone());
    let mut out = AnalyticMap::new(format!("{}∘{}", f.name, g.name), g.domain.clone(), f.codomain.clone(), move |p| {
        fe.eval_unchecked(&ge.eval_unchecked(p))
    });
    if f.mode == JacobianMode::ClosedForm && g.mode == JacobianMode::ClosedForm {
        let (fj, gj) = (f.clone(), g.clone());
        out = out.with_jacobian(move |p| {
            let y = gj.eval_unchecked(p);
            fj.jac.as_ref().unwrap()(&y) * gj.jac.as_ref().unwrap()(p)
        });
    }
    if f.interfaces.is_some() || g.interfaces.is_some() {
        let (fi, gi) = (f.clone(), g.clone());
        // distances are measured in the space where each interface lives
        out = out.with_interfaces(move |p| gi.interface_distance(p).min(fi.interface_distance(&gi.eval_unchecked(p))));
    }
    Ok(out)
}

fn require_r3(f: &AnalyticMap, op: &str) -> Result<()> {
    if f.codomain.ambient_dim() != 3 {
        return Err(Error::DomainMismatch { detail: format!("{op} needs a map into R³, `{}` maps into {}", f.name, f.codomain) });
    }
    if matches!(f.domain, Space::Product(_)) {
        return Err(Error::DomainMismatch { detail: format!("{op} needs a map on a non-product domain, got {}", f.domain) });
    }
    Ok(())
}

fn split_time(p: &[f64]) -> (&[f64], f64) {
    (&p[..p.len() - 1], p[p.len() - 1])
}

/// F(x, t) = (1 − t)·F₀(x).
pub fn straight_line_null_homotopy(f0: &AnalyticMap) -> Result<AnalyticMap> {
    require_r3(f0, "straight-line null-homotopy")?;
    let e = f0.clone();
    let mut out = AnalyticMap::new(
        format!("line-null:{}", f0.name),
        Space::product(f0.domain.clone()),
        Space::Euclidean(3),
        move |p| {
            let (x, t) = split_time(p);
            e.eval_unchecked(x).into_iter().map(|v| (1.0 - t) * v).collect()
        },
    );
    if f0.mode == JacobianMode::ClosedForm {
        let g = f0.clone();
        out = out.with_jacobian(move |p| {
            let (x, t) = split_time(p);
            let j0 = g.jac.as_ref().unwrap()(x);
            let y = g.eval_unchecked(x);
            let mut j = DMatrix::zeros(3, p.len());
            j.columns_mut(0, x.len()).copy_from(&(j0 * (1.0 - t)));
            for i in 0..3 {
                j[(i, x.len())] = -y[i];
            }
            j
        });
    }
    if let Some(d) = f0.interfaces.clone() {
        out = out.with_interfaces(move |p| d(split_time(p).0));
    }
    Ok(out)
}

/// F(x, t) = F₀(x).
pub fn time_constant(f0: &AnalyticMap) -> Result<AnalyticMap> {
    require_r3(f0, "time-constant homotopy")?;
    let e = f0.clone();
    let mut out = AnalyticMap::new(
        format!("time-const:{}", f0.name),
        Space::product(f0.domain.clone()),
        Space::Euclidean(3),
        move |p| e.eval_unchecked(split_time(p).0),
    );
    if f0.mode == JacobianMode::ClosedForm {
        let g = f0.clone();
        out = out.with_jacobian(move |p| {
            let x = split_time(p).0;
            let mut j = DMatrix::zeros(3, p.len());
            j.columns_mut(0, x.len()).copy_from(&g.jac.as_ref().unwrap()(x));
            j
        });
    }
    Ok(out)
}

fn rot_z(a: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (s, c) = a.sin_cos();
    let r = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    let dr = DMatrix::from_row_slice(3, 3, &[-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0]);
    (r, dr)
}

/// F(x, t) = i(R(θt)·G(x)) with R(a) the rotation by a about the x₃-axis.
pub fn rotation_path(g: &AnalyticMap, theta: f64) -> Result<AnalyticMap> {
    if g.codomain != Space::Sphere(2) {
        return Err(Error::DomainMismatch { detail: format!("rotation path needs a map into S², `{}` maps into {}", g.name, g.codomain) });
    }
    let e = g.clone();
    let mut out = AnalyticMap::new(
        format!("rot:{theta}:{}", g.name),
        Space::product(g.domain.clone()),
        Space::Euclidean(3),
        move |p| {
            let (x, t) = split_time(p);
            let y = nalgebra::DVector::from_vec(e.eval_unchecked(x));
            (rot_z(theta * t).0 * y).as_slice().to_vec()
        },
    );
    if g.mode == JacobianMode::ClosedForm {
        let h = g.clone();
        out = out.with_jacobian(move |p| {
            let (x, t) = split_time(p);
            let (r, dr) = rot_z(theta * t);
            let y = nalgebra::DVector::from_vec(h.eval_unchecked(x));
            let mut j = DMatrix::zeros(3, p.len());
            j.columns_mut(0, x.len()).copy_from(&(&r * h.jac.as_ref().unwrap()(x)));
            j.column_mut(x.len()).copy_from(&(dr * y * theta));
            j
        });
    }
    Ok(out)
}

/// x ↦ F(x, t) for a homotopy F.
pub fn time_slice(f: &AnalyticMap, t: f64) -> Result<AnalyticMap> {
    let Space::Product(base) = &f.domain else {
        return Err(Error::DomainMismatch { detail: format!("`{}` is not a homotopy", f.name) });
    };
    let e = f.clone();
    let append = move |x: &[f64]| {
        let mut p = x.to_vec();
        p.push(t);
        p
    };
    let a2 = append.clone();
    let mut out = AnalyticMap::new(format!("{}@t={t}", f.name), (**base).clone(), f.codomain.clone(), move |x| {
        e.eval_unchecked(&append(x))
    });
    if f.mode == JacobianMode::ClosedForm {
        let g = f.clone();
        out = out.with_jacobian(move |x| {
            let j = g.jac.as_ref().unwrap()(&a2(x));
            j.columns(0, x.len()).into_owned()
        });
    }
    Ok(out)
}

/// Smooth step on [0,1]: 0 for s ≤ 0, 1 for s ≥ 1, flat to all orders at both ends.
/// Returns (value, derivative).
pub fn smooth_transition(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let g = |u: f64| (-1.0 / u).exp();
    let gp = |u: f64| g(u) / (u * u);
    let (a, b) = (g(s), g(1.0 - s));
    let sum = a + b;
    (a / sum, (gp(s) * b + a * gp(1.0 - s)) / (sum * sum))
}

/// Cone profile: 0 on [0, 1/4], 1 at 1, smooth and nondecreasing.
fn cone_profile(r: f64) -> (f64, f64) {
    let (v, dv) = smooth_transition((r - 0.25) / 0.75);
    (v, dv / 0.75)
}

/// F₀(x) = χ(|x|)·G(x/|x|) extending G: S^m → S^n to B^(m+1) → B^(n+1).
pub fn cone_extension(g: &AnalyticMap) -> Result<AnalyticMap> {
    let Space::Sphere(m) = g.domain else {
        return Err(Error::DomainMismatch { detail: format!("cone extension needs a sphere domain, got {}", g.domain) });
    };
    let Space::Sphere(n) = g.codomain else {
        return Err(Error::DomainMismatch { detail: format!("cone extension needs a sphere codomain, got {}", g.codomain) });
    };
    let e = g.clone();
    let mut out = AnalyticMap::new(format!("cone:{}", g.name), Space::Ball(m + 1), Space::Ball(n + 1), move |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (chi, _) = cone_profile(r);
        if chi == 0.0 {
            return vec![0.0; n + 1];
        }
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        e.eval_unchecked(&u).into_iter().map(|v| chi * v).collect()
    });
    if g.mode == JacobianMode::ClosedForm {
        let h = g.clone();
        out = out.with_jacobian(move |x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let (chi, dchi) = cone_profile(r);
            if chi == 0.0 && dchi == 0.0 {
                return DMatrix::zeros(n + 1, m + 1);
            }
            let u = nalgebra::DVector::from_iterator(m + 1, x.iter().map(|v| v / r));
            let y = nalgebra::DVector::from_vec(h.eval_unchecked(u.as_slice()));
            let proj = (DMatrix::identity(m + 1, m + 1) - &u * u.transpose()) / r;
            &y * u.transpose() * dchi + h.jac.as_ref().unwrap()(u.as_slice()) * proj * chi
        });
    }
    Ok(out)
}

/// (F*ω)_p in the orthonormal tangent frame of the domain at p.
pub fn pullback_at(f: &AnalyticMap, form: &EuclideanForm, p: &[f64]) -> Result<TangentForm> {
    if !f.is_smooth_at(p) {
        return Err(Error::NonSmooth { map: f.name.clone(), point: p.to_vec() });
    }
    if form.ambient_dim() != f.codomain.ambient_dim() {
        return Err(Error::DomainMismatch {
            detail: format!("form on R^{} cannot be pulled back by a map into {}", form.ambient_dim(), f.codomain),
        });
    }
    let frame = f.domain.tangent_frame(p);
    let y = f.eval(p)?;
    let m = f.jacobian(p)? * &frame;
    Ok(TangentForm { form: form.eval(&y).pullback(&m), frame })
}

/// Singular values of the tangent Jacobian, in decreasing order.
pub fn singular_values(f: &AnalyticMap, p: &[f64]) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = f.tangent_jacobian(p)?.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn hopf_poles() {
        let h = hopf_map();
        assert_eq!(h.eval(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 1.0]);
        assert_eq!(h.eval(&[0.0, 0.0, 1.0, 0.0]).unwrap(), vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn closed_form_jacobians_match_differences() {
        let p3 = [0.5, -0.1, 0.7, (1.0f64 - 0.25 - 0.01 - 0.49).sqrt()];
        let ih = compose(&inclusion_s2(), &hopf_map()).unwrap();
        let maps = [hopf_map(), ih.clone(), compose(&ih, &orientation_reversal()).unwrap()];
        for m in &maps {
            let a = m.tangent_jacobian(&p3).unwrap();
            let b = m.fd_tangent_jacobian(&p3, FD_STEP);
            assert!(rel_err(&a, &b) < 1e-6, "{}: {}", m.name(), rel_err(&a, &b));
        }
        let mut pt = p3.to_vec();
        pt.push(0.3);
        for m in [straight_line_null_homotopy(&ih).unwrap(), rotation_path(&hopf_map(), 1.3).unwrap(), time_constant(&ih).unwrap()] {
            let a = m.tangent_jacobian(&pt).unwrap();
            let b = m.fd_tangent_jacobian(&pt, FD_STEP);
            assert!(rel_err(&a, &b) < 1e-6, "{}: {}", m.name(), rel_err(&a, &b));
        }
        let cone = cone_extension(&hopf_map()).unwrap();
        let x = [0.3, -0.2, 0.4, 0.1];
        let a = cone.tangent_jacobian(&x).unwrap();
        let b = cone.fd_tangent_jacobian(&x, FD_STEP);
        assert!(rel_err(&a, &b) < 1e-6);
    }

    #[test]
    fn homotopy_endpoints() {
        let ih = compose(&inclusion_s2(), &hopf_map()).unwrap();
        let f = straight_line_null_homotopy(&ih).unwrap();
        let x = [0.0, 0.6, 0.8, 0.0];
        let f0 = time_slice(&f, 0.0).unwrap();
        let f1 = time_slice(&f, 1.0).unwrap();
        assert_eq!(f0.eval(&x).unwrap(), ih.eval(&x).unwrap());
        assert_eq!(f1.eval(&x).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn compose_rejects_mismatched_spaces() {
        assert!(matches!(compose(&hopf_map(), &hopf_map()), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn cone_extension_vanishes_near_origin_and_matches_on_boundary() {
        let c = cone_extension(&hopf_map()).unwrap();
        assert_eq!(c.eval(&[0.1, 0.0, 0.1, 0.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(c.eval(&[0.0; 4]).unwrap(), vec![0.0; 3]);
        let x = [0.5, 0.5, 0.5, 0.5];
        let a = c.eval(&x).unwrap();
        let b = hopf_map().eval(&x).unwrap();
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-15);
        }
    }
}
