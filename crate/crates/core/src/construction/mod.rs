//! Small-dilation squeeze maps of the 3-ball: the radial map Λ, the
//! δℤ³-periodic squeeze R onto the dual cubical skeleton, the glued map Ψ,
//! and the δ-sweep measuring rank collapse of Ψ∘F₀.
//!
//! Every map carries a closed-form Jacobian. Finite differences would leave
//! the third singular value of DΨ at the 1e-5 level, far above the
//! rank-collapse threshold we want to test.

mod sweep;

pub use sweep::{sweep, SweepConfig, SweepReport, SweepRow};

use crate::error::{Error, Result};
use crate::maps::{AnalyticMap, Space};
use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::Serialize;

/// Default base-ball radius.
pub const DEFAULT_R: f64 = 0.9;
/// Default neighborhood factor: the ramp of R runs over [Wδ/2, Wδ].
pub const DEFAULT_W: f64 = 0.4;

/// Quintic smoothstep on [0,1] with (value, derivative).
pub fn smoothstep5(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let v = s * s * s * (s * (6.0 * s - 15.0) + 10.0);
    let d = 30.0 * s * s * (s - 1.0) * (s - 1.0);
    (v, d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezeParams {
    /// Lattice pitch.
    pub delta: f64,
    /// Neighborhood factor; the squeeze neighborhood of a lattice point has radius W·δ.
    pub w: f64,
    /// Base-ball radius.
    pub r: f64,
    /// Lattice offset: lattice points are offset + δℤ³.
    pub offset: [f64; 3],
}

impl SqueezeParams {
    /// Validated parameters with the default offset δ/3·(1,1,1).
    ///
    /// Requires r ∈ (1/2, 1), 0 < W < 1/2 (so the neighborhoods fit inside
    /// their lattice cells), and √3δ/2 ≤ r/4 so that R never moves a point of
    /// the 3r/4-sphere into the ball of radius r/2.
    pub fn new(delta: f64, w: f64, r: f64) -> Result<Self> {
        check_r(r)?;
        if !(w > 0.0 && w < 0.5) {
            return Err(Error::parameter("W", format!("need 0 < W < 1/2 so that W·δ < δ/2, got {w}")));
        }
        let max_delta = r / (2.0 * 3f64.sqrt());
        if !(delta > 0.0 && delta <= max_delta) {
            return Err(Error::parameter("delta", format!("need 0 < δ ≤ r/(2√3) = {max_delta:.4}, got {delta}")));
        }
        Ok(SqueezeParams { delta, w, r, offset: [delta / 3.0; 3] })
    }

    pub fn with_offset(mut self, offset: [f64; 3]) -> Self {
        self.offset = offset;
        self
    }

    /// Nearest lattice point q (the center of the cubical cell containing y).
    pub fn nearest_lattice_point(&self, y: &[f64]) -> [f64; 3] {
        let mut q = [0.0; 3];
        for i in 0..3 {
            q[i] = self.offset[i] + self.delta * ((y[i] - self.offset[i]) / self.delta).round();
        }
        q
    }

    /// Whether y lies in V_W, the W·δ-neighborhood of the lattice points inside B_r.
    pub fn in_v_w(&self, y: &[f64]) -> bool {
        let q = self.nearest_lattice_point(y);
        let dist = (0..3).map(|i| (y[i] - q[i]).powi(2)).sum::<f64>().sqrt();
        let qn = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        dist < self.w * self.delta && qn < self.r
    }

    /// Distance from y to the dual skeleton (the boundaries of the lattice cells).
    pub fn skeleton_distance(&self, y: &[f64]) -> f64 {
        let q = self.nearest_lattice_point(y);
        let inf = (0..3).map(|i| (y[i] - q[i]).abs()).fold(0.0, f64::max);
        (self.delta / 2.0 - inf).abs()
    }

    /// Distance to the creases of R: cell faces, and the diagonal planes
    /// |w_i| = |w_j| where the cube projection is active.
    pub fn crease_distance(&self, y: &[f64]) -> f64 {
        let q = self.nearest_lattice_point(y);
        let w: Vec<f64> = (0..3).map(|i| y[i] - q[i]).collect();
        let a: Vec<f64> = w.iter().map(|v| v.abs()).collect();
        let k = argmax3(&a);
        let mut dist = self.delta / 2.0 - a[k];
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= self.w * self.delta / 2.0 - INTERFACE_MARGIN {
            for j in (0..3).filter(|&j| j != k) {
                dist = dist.min((a[k] - a[j]) / 2f64.sqrt());
            }
        }
        dist
    }
}

const INTERFACE_MARGIN: f64 = 1e-6;

fn argmax3(a: &[f64]) -> usize {
    let mut k = 0;
    for i in 1..3 {
        if a[i] > a[k] {
            k = i;
        }
    }
    k
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.5 && r < 1.0) {
        return Err(Error::parameter("r", format!("need 1/2 < r < 1, got {r}")));
    }
    Ok(())
}

/// λ(s) = s/r for s ≤ r/4, 1 for s ≥ r/2, blended by a quintic smoothstep.
/// Returns (λ, λ').
pub fn lambda(r: f64, s: f64) -> (f64, f64) {
    let lin = s / r;
    let (sig, dsig) = smoothstep5((s - r / 4.0) / (r / 4.0));
    let v = (1.0 - sig) * lin + sig;
    let d = (1.0 - sig) / r + dsig * (4.0 / r) * (1.0 - lin);
    (v, d)
}

/// Λ(x) = λ(|x|) x/|x| and its Jacobian.
fn lambda_eval(r: f64, x: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let s = x.norm();
    if s <= r / 4.0 {
        return (x / r, Matrix3::identity() / r);
    }
    let u = x / s;
    let (l, dl) = lambda(r, s);
    let uu = u * u.transpose();
    (u * l, uu * dl + (Matrix3::identity() - uu) * (l / s))
}

pub fn build_lambda_map(r: f64) -> Result<AnalyticMap> {
    check_r(r)?;
    Ok(AnalyticMap::new(format!("Lambda:{r}"), Space::Ball(3), Space::Ball(3), move |x| {
        lambda_eval(r, &Vector3::from_column_slice(x)).0.as_slice().to_vec()
    })
    .with_jacobian(move |x| to_dmatrix(&lambda_eval(r, &Vector3::from_column_slice(x)).1)))
}

fn to_dmatrix(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(3, 3, m.as_slice())
}

/// R(y) and DR(y).
///
/// With q the nearest lattice point, w = y − q and P the radial projection of
/// y from q onto the boundary of q's cell, R(y) = y + ρ(|w|/(Wδ))·(P − y)
/// where ρ ramps from 0 at 1/2 to 1 at 1.
fn r_eval(p: &SqueezeParams, y: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let q = Vector3::from(p.nearest_lattice_point(y.as_slice()));
    let w = y - q;
    let wn = w.norm();
    let scale = p.w * p.delta;
    let (rho, drho) = smoothstep5(2.0 * wn / scale - 1.0);
    if rho == 0.0 && drho == 0.0 {
        return (*y, Matrix3::identity());
    }
    let a = w.abs();
    let k = argmax3(a.as_slice());
    let m = a[k];
    let h = p.delta / 2.0;
    let proj = q + w * (h / m);
    let mut grad_m = Vector3::zeros();
    grad_m[k] = w[k].signum();
    let dproj = Matrix3::identity() * (h / m) - w * grad_m.transpose() * (h / (m * m));
    let grad_rho = w * (2.0 * drho / (scale * wn));
    let disp = proj - y;
    let value = y + disp * rho;
    let jac = Matrix3::identity() + disp * grad_rho.transpose() + (dproj - Matrix3::identity()) * rho;
    (value, jac)
}

pub fn build_r(params: &SqueezeParams) -> Result<AnalyticMap> {
    let (p1, p2, p3) = (params.clone(), params.clone(), params.clone());
    Ok(AnalyticMap::new(
        format!("R:{},{}", params.delta, params.w),
        Space::Euclidean(3),
        Space::Euclidean(3),
        move |y| r_eval(&p1, &Vector3::from_column_slice(y)).0.as_slice().to_vec(),
    )
    .with_jacobian(move |y| to_dmatrix(&r_eval(&p2, &Vector3::from_column_slice(y)).1))
    .with_interfaces(move |y| p3.crease_distance(y)))
}

/// Λ∘R on the unit ball, the inner piece of Ψ.
pub fn build_lambda_r(params: &SqueezeParams) -> Result<AnalyticMap> {
    let (p1, p2, p3) = (params.clone(), params.clone(), params.clone());
    let compose = |p: &SqueezeParams, y: &[f64]| {
        let (ry, dr) = r_eval(p, &Vector3::from_column_slice(y));
        let (v, dl) = lambda_eval(p.r, &ry);
        (v, dl * dr)
    };
    Ok(AnalyticMap::new(
        format!("Lambda∘R:{},{},{}", params.delta, params.w, params.r),
        Space::Ball(3),
        Space::Ball(3),
        move |y| compose(&p1, y).0.as_slice().to_vec(),
    )
    .with_jacobian(move |y| to_dmatrix(&compose(&p2, y).1))
    .with_interfaces(move |y| p3.crease_distance(y)))
}

/// Spherical interpolation from a to b (unit vectors) at parameter s, with
/// the derivative matrices with respect to a, b and s.
fn slerp(a: &Vector3<f64>, b: &Vector3<f64>, s: f64) -> (Vector3<f64>, Matrix3<f64>, Matrix3<f64>, Vector3<f64>) {
    let c = a.dot(b).clamp(-1.0, 1.0);
    let theta = c.acos();
    if theta < 1e-6 {
        // normalized linear interpolation
        let v = a * (1.0 - s) + b * s;
        let n = v.norm();
        let out = v / n;
        let proj = (Matrix3::identity() - out * out.transpose()) / n;
        return (out, proj * (1.0 - s), proj * s, proj * (b - a));
    }
    let sin = theta.sin();
    let (sa, sb) = (((1.0 - s) * theta).sin(), (s * theta).sin());
    let (ca, cb) = (((1.0 - s) * theta).cos(), (s * theta).cos());
    let out = (a * sa + b * sb) / sin;
    // ∂out/∂θ
    let dtheta_vec = (a * (ca * (1.0 - s)) + b * (cb * s)) / sin - out * (theta.cos() / sin);
    // dθ = −(b·da + a·db)/sin θ
    let da = Matrix3::identity() * (sa / sin) - dtheta_vec * b.transpose() / sin;
    let db = Matrix3::identity() * (sb / sin) - dtheta_vec * a.transpose() / sin;
    let ds = (b * cb - a * ca) * (theta / sin);
    (out, da, db, ds)
}

/// Ψ(x) and DΨ(x).
fn psi_eval(p: &SqueezeParams, x: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let r = p.r;
    let s = x.norm();
    let inner = 0.75 * r;
    if s < inner {
        let (y, dy) = r_eval(p, x);
        let (v, dv) = lambda_eval(r, &y);
        return (v, dv * dy);
    }
    if s >= r {
        return lambda_eval(r, x);
    }
    // shell: slerp from Λ∘R to Λ on the 3r/4-sphere, time τ = 4|x|/r − 3
    let u = x / s;
    let y0 = u * inner;
    let dy0 = (Matrix3::identity() - u * u.transpose()) * (inner / s);
    let (ry, dry) = r_eval(p, &y0);
    let (a, da_dry) = lambda_eval(r, &ry);
    let da = da_dry * dry * dy0;
    // Λ(y0) = u since 3r/4 > r/2
    let b = u;
    let db = (Matrix3::identity() - u * u.transpose()) / s;
    let tau = 4.0 * s / r - 3.0;
    let (t, dt) = smoothstep5(tau);
    let grad_t = u * (dt * 4.0 / r);
    let (out, ja, jb, js) = slerp(&a, &b, t);
    (out, ja * da + jb * db + js * grad_t.transpose())
}

/// Distance to the declared non-smooth interfaces of Ψ.
fn psi_interfaces(p: &SqueezeParams, x: &[f64]) -> f64 {
    let v = Vector3::from_column_slice(x);
    let s = v.norm();
    let inner = 0.75 * p.r;
    let sphere = (s - inner).abs();
    if s < inner {
        sphere.min(p.crease_distance(x))
    } else if s < p.r {
        // cone over the creases of R on the 3r/4-sphere
        let y0 = v * (inner / s);
        sphere.min(p.crease_distance(y0.as_slice()))
    } else {
        (s - p.r).abs().min(sphere)
    }
}

pub fn build_psi(params: &SqueezeParams) -> Result<AnalyticMap> {
    let (p1, p2, p3) = (params.clone(), params.clone(), params.clone());
    Ok(AnalyticMap::new(
        format!("psi:{},{},{}", params.delta, params.w, params.r),
        Space::Ball(3),
        Space::Ball(3),
        move |x| psi_eval(&p1, &Vector3::from_column_slice(x)).0.as_slice().to_vec(),
    )
    .with_jacobian(move |x| to_dmatrix(&psi_eval(&p2, &Vector3::from_column_slice(x)).1))
    .with_interfaces(move |x| psi_interfaces(&p3, x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SqueezeParams {
        SqueezeParams::new(0.1, DEFAULT_W, DEFAULT_R).unwrap()
    }

    #[test]
    fn lambda_pieces() {
        let r = DEFAULT_R;
        assert!((lambda(r, r / 8.0).0 - 0.125).abs() < 1e-15);
        assert_eq!(lambda(r, 0.6 * r).0, 1.0);
        let mut prev = 0.0;
        for i in 1..1000 {
            let v = lambda(r, i as f64 / 1000.0).0;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn parameters_are_validated() {
        assert!(SqueezeParams::new(0.1, 0.6, 0.9).is_err());
        assert!(SqueezeParams::new(0.3, 0.4, 0.9).is_err());
        assert!(SqueezeParams::new(0.1, 0.4, 1.2).is_err());
        assert!(build_lambda_map(0.4).is_err());
    }

    fn fd_check(f: impl Fn(&Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>), x: Vector3<f64>) -> f64 {
        let h = 1e-6;
        let (_, j) = f(&x);
        let mut err: f64 = 0.0;
        for c in 0..3 {
            let mut e = Vector3::zeros();
            e[c] = h;
            let d = (f(&(x + e)).0 - f(&(x - e)).0) / (2.0 * h);
            err = err.max((d - j.column(c)).norm());
        }
        err / j.norm().max(1.0)
    }

    #[test]
    fn jacobians_match_differences_off_creases() {
        let p = params();
        let pts = [
            Vector3::new(0.31, -0.12, 0.2),
            Vector3::new(0.041, 0.052, 0.018),
            Vector3::new(0.5, 0.3, -0.2),
            Vector3::new(0.62, 0.12, -0.22),
            Vector3::new(0.1, 0.9, 0.2),
        ];
        for x in pts {
            if psi_interfaces(&p, x.as_slice()) < 1e-3 {
                continue;
            }
            assert!(fd_check(|y| psi_eval(&p, y), x) < 1e-6, "Ψ at {x:?}");
            if p.crease_distance(x.as_slice()) >= 1e-3 {
                assert!(fd_check(|y| r_eval(&p, y), x) < 1e-6, "R at {x:?}");
            }
            assert!(fd_check(|y| lambda_eval(p.r, y), x) < 1e-6, "Λ at {x:?}");
        }
    }

    #[test]
    fn slerp_derivatives() {
        let a = Vector3::new(0.6, 0.8, 0.0);
        let b = Vector3::new(0.0, 0.8, 0.6);
        let (_, ja, jb, js) = slerp(&a, &b, 0.3);
        let h = 1e-6;
        let ds = (slerp(&a, &b, 0.3 + h).0 - slerp(&a, &b, 0.3 - h).0) / (2.0 * h);
        assert!((ds - js).norm() < 1e-8);
        let e = Vector3::new(0.0, 0.0, h);
        let num = (slerp(&(a + e), &b, 0.3).0 - slerp(&(a - e), &b, 0.3).0) / (2.0 * h);
        assert!((num - ja.column(2)).norm() < 1e-7);
        let e = Vector3::new(h, 0.0, 0.0);
        let num = (slerp(&a, &(b + e), 0.3).0 - slerp(&a, &(b - e), 0.3).0) / (2.0 * h);
        assert!((num - jb.column(0)).norm() < 1e-7);
    }

    #[test]
    fn r_is_periodic_and_lands_on_the_skeleton() {
        let p = params();
        let y = Vector3::new(0.237, -0.118, 0.402);
        let shift = Vector3::new(p.delta, 0.0, 0.0);
        let d = r_eval(&p, &(y + shift)).0 - r_eval(&p, &y).0 - shift;
        assert!(d.norm() < 1e-12);
        let q = Vector3::from(p.nearest_lattice_point(y.as_slice()));
        if (y - q).norm() >= p.w * p.delta {
            assert!(p.skeleton_distance(r_eval(&p, &y).0.as_slice()) < 1e-12);
        }
    }
}
