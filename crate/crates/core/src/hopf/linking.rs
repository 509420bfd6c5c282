//! Linking numbers of regular-value preimages, the classical definition of
//! the Hopf invariant.

use crate::error::{Error, Result};
use crate::maps::{singular_values, AnalyticMap, Space};
use crate::mesh::{gen_sphere, SimplicialComplex};
use nalgebra::{Matrix2, Vector2, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Minimum second singular value of DG along a preimage for a value to count as regular.
pub const REGULARITY_THRESHOLD: f64 = 1e-3;
/// Farthest the linking integral may sit from an integer.
pub const ROUNDING_TOL: f64 = 0.2;
pub const DEFAULT_ORACLE_LEVEL: usize = 3;

/// A closed polygon on S³, oriented as the preimage of a regular value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Loop {
    pub points: Vec<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkingReport {
    pub p: [f64; 3],
    pub q: [f64; 3],
    /// Unrounded Gauss integral.
    pub integral: f64,
    pub linking: i64,
    pub loops_p: usize,
    pub loops_q: usize,
    pub mesh_level: usize,
}

fn unit3(v: &[f64]) -> Result<Vector3<f64>> {
    let v = Vector3::from_column_slice(v);
    let n = v.norm();
    if v.len() != 3 || !(n > 0.0) {
        return Err(Error::parameter("value", "regular values must be nonzero points of R³"));
    }
    Ok(v / n)
}

/// Orthonormal e1, e2 with det[p, e1, e2] > 0.
fn target_frame(p: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if p.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (seed - p * p.dot(&seed)).normalize();
    let e2 = p.cross(&e1);
    (e1, e2)
}

struct Level<'a> {
    c: &'a SimplicialComplex,
    /// Chart coordinates of G at each vertex; None when G(v) is not in p's open hemisphere.
    chart: Vec<Option<Vector2<f64>>>,
}

impl Level<'_> {
    /// Zero of the linear chart model on triangle `f`, in ambient coordinates.
    fn face_crossing(&self, f: usize) -> Option<Vector4<f64>> {
        let t = self.c.simplex(2, f);
        let (a, b, c) = (self.chart[t[0]]?, self.chart[t[1]]?, self.chart[t[2]]?);
        let m = Matrix2::from_columns(&[b - a, c - a]);
        let sr = m.try_inverse()? * (-a);
        let bary = [1.0 - sr[0] - sr[1], sr[0], sr[1]];
        if bary.iter().any(|&l| l < 0.0) {
            return None;
        }
        let mut x = Vector4::zeros();
        for (&v, &l) in t.iter().zip(&bary) {
            x += Vector4::from_column_slice(self.c.vertex(v)) * l;
        }
        Some(x)
    }
}

fn non_regular(value: &Vector3<f64>, detail: impl Into<String>) -> Error {
    Error::NonRegularValue { value: value.as_slice().to_vec(), detail: detail.into() }
}

/// Oriented preimage loops of `value` under `g`, traced through the
/// piecewise-linear model of g on the tetrahedra of `c`.
///
/// A loop is oriented by t with det[t, n₁, n₂] > 0 whenever DG·n_i is the
/// positive frame of T_pS², which with the outward-normal-first orientations
/// of S³ and S² is the preimage orientation in the linking definition.
pub fn preimage_loops(g: &AnalyticMap, value: &[f64], c: &SimplicialComplex) -> Result<Vec<Loop>> {
    if g.domain() != &Space::Sphere(3) || g.codomain() != &Space::Sphere(2) {
        return Err(Error::DomainMismatch { detail: format!("preimage loops need a map S³ → S², got `{}`", g.name()) });
    }
    if c.dim() != 3 || c.ambient_dim() != 4 {
        return Err(Error::DomainMismatch { detail: "preimage loops need a mesh of S³".into() });
    }
    let p = unit3(value)?;
    let (e1, e2) = target_frame(&p);
    let mut chart = Vec::with_capacity(c.vertex_count());
    for v in 0..c.vertex_count() {
        let y = Vector3::from_vec(g.eval(c.vertex(v))?);
        chart.push((y.dot(&p) > 0.0).then(|| Vector2::new(y.dot(&e1), y.dot(&e2))));
    }
    let level = Level { c, chart };
    let mut crossings: HashMap<usize, Option<Vector4<f64>>> = HashMap::new();
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut incoming: HashMap<usize, usize> = HashMap::new();
    for s in 0..c.count(3) {
        let faces = c.face_indices(3, s);
        let hits: Vec<(usize, Vector4<f64>)> = faces
            .iter()
            .filter_map(|&f| crossings.entry(f).or_insert_with(|| level.face_crossing(f)).map(|x| (f, x)))
            .collect();
        match hits.len() {
            0 => continue,
            2 => {}
            n => return Err(non_regular(&p, format!("preimage meets {n} faces of one tetrahedron"))),
        }
        let mut tuple = c.simplex(3, s).to_vec();
        if c.orientation(3, s) < 0 {
            tuple.swap(0, 1);
        }
        let u: Vec<Vector2<f64>> = tuple.iter().map(|&v| level.chart[v].expect("crossing faces have charted vertices")).collect();
        let (r1, r2) = (
            Vector3::new(u[1].x - u[0].x, u[2].x - u[0].x, u[3].x - u[0].x),
            Vector3::new(u[1].y - u[0].y, u[2].y - u[0].y, u[3].y - u[0].y),
        );
        let t = r1.cross(&r2);
        let p0 = Vector4::from_column_slice(c.vertex(tuple[0]));
        let mut dir = Vector4::zeros();
        for i in 0..3 {
            dir += (Vector4::from_column_slice(c.vertex(tuple[i + 1])) - p0) * t[i];
        }
        let ((fa, xa), (fb, xb)) = (hits[0], hits[1]);
        let (from, to) = if (xb - xa).dot(&dir) >= 0.0 { (fa, fb) } else { (fb, fa) };
        if next.insert(from, to).is_some() || incoming.insert(to, from).is_some() {
            return Err(non_regular(&p, "preimage branches"));
        }
    }
    if next.is_empty() {
        return Err(non_regular(&p, "preimage is empty"));
    }
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    let mut loops = Vec::new();
    for start in starts {
        if seen.contains(&start) {
            continue;
        }
        let mut pts = Vec::new();
        let mut f = start;
        loop {
            if !seen.insert(f) {
                return Err(non_regular(&p, "preimage curve does not close"));
            }
            let x = crossings[&f].expect("crossing");
            let x = x / x.norm();
            pts.push([x[0], x[1], x[2], x[3]]);
            f = *next.get(&f).ok_or_else(|| non_regular(&p, "preimage curve ends on a skipped tetrahedron"))?;
            if f == start {
                break;
            }
        }
        if pts.len() < 3 {
            return Err(non_regular(&p, "degenerate preimage loop"));
        }
        loops.push(Loop { points: pts });
    }
    for l in &loops {
        for x in &l.points {
            if singular_values(g, x)?.get(1).copied().unwrap_or(0.0) <= REGULARITY_THRESHOLD {
                return Err(non_regular(&p, format!("DG has rank < 2 near {x:?}")));
            }
        }
    }
    Ok(loops)
}

/// Rotation in SO(4) taking `n` to e₄.
fn rotation_to_e4(n: &Vector4<f64>) -> nalgebra::Matrix4<f64> {
    let e4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
    let v = n - e4;
    let house = if v.norm() < 1e-12 {
        nalgebra::Matrix4::identity()
    } else {
        let v = v.normalize();
        nalgebra::Matrix4::identity() - v * v.transpose() * 2.0
    };
    // a Householder reflection has determinant −1; flipping e₁ restores orientation and fixes e₄
    let flip = nalgebra::Matrix4::from_diagonal(&Vector4::new(if v.norm() < 1e-12 { 1.0 } else { -1.0 }, 1.0, 1.0, 1.0));
    flip * house
}

/// Orientation-preserving stereographic chart of S³ \ {n}.
fn stereographic(rot: &nalgebra::Matrix4<f64>, x: &[f64; 4]) -> Vector3<f64> {
    let y = rot * Vector4::from_column_slice(x);
    Vector3::new(y[0], y[1], y[2]) / (1.0 - y[3])
}

/// Signed solid-angle contribution of segment pair (a→b, c→d) to the Gauss integral.
fn segment_linking(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, d: &Vector3<f64>) -> f64 {
    let (r13, r14, r23, r24) = (c - a, d - a, c - b, d - b);
    let normal = |u: Vector3<f64>, v: Vector3<f64>| {
        let w = u.cross(&v);
        let n = w.norm();
        if n == 0.0 {
            w
        } else {
            w / n
        }
    };
    let n = [normal(r13, r14), normal(r14, r24), normal(r24, r23), normal(r23, r13)];
    let omega: f64 = (0..4).map(|i| n[i].dot(&n[(i + 1) % 4]).clamp(-1.0, 1.0).asin()).sum();
    let sign = (d - c).cross(&(b - a)).dot(&r13);
    omega * sign.signum() / (4.0 * PI)
}

/// Gauss linking integral of two closed polygons in R³, exact for polygons.
pub fn gauss_linking(l1: &[Vector3<f64>], l2: &[Vector3<f64>]) -> f64 {
    let mut total = 0.0;
    for i in 0..l1.len() {
        let (a, b) = (&l1[i], &l1[(i + 1) % l1.len()]);
        for j in 0..l2.len() {
            total += segment_linking(a, b, &l2[j], &l2[(j + 1) % l2.len()]);
        }
    }
    total
}

/// A projection pole far from every loop point.
fn pole(loops: &[&Loop]) -> Vector4<f64> {
    let candidates = (0..4).flat_map(|i| [1.0, -1.0].map(move |s| (i, s))).chain(std::iter::once((4, 0.0)));
    let mut best = (Vector4::new(0.0, 0.0, 0.0, 1.0), -1.0);
    for (i, s) in candidates {
        let n = if i == 4 { Vector4::new(0.5, 0.5, 0.5, 0.5) } else { Vector4::ith(i, s) };
        let dist = loops
            .iter()
            .flat_map(|l| l.points.iter())
            .map(|x| (Vector4::from_column_slice(x) - n).norm())
            .fold(f64::INFINITY, f64::min);
        if dist > best.1 {
            best = (n, dist);
        }
    }
    best.0
}

/// The level-`level` sphere mesh turned by a fixed generic rotation, so that
/// preimages of symmetric values (fibers through coordinate points) do not
/// run through mesh vertices.
pub fn oracle_mesh(level: usize) -> Result<SimplicialComplex> {
    let c = gen_sphere(3, level)?;
    let givens = |i: usize, j: usize, a: f64| {
        let mut m = nalgebra::Matrix4::identity();
        let (s, co) = a.sin_cos();
        m[(i, i)] = co;
        m[(j, j)] = co;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        m
    };
    let rot = givens(0, 2, 0.3183) * givens(1, 3, 0.5772) * givens(0, 1, 0.2719) * givens(2, 3, 0.1412);
    let mut coords = Vec::with_capacity(4 * c.vertex_count());
    for v in 0..c.vertex_count() {
        coords.extend((rot * Vector4::from_column_slice(c.vertex(v))).iter());
    }
    let tops: Vec<Vec<usize>> = (0..c.count(3))
        .map(|s| {
            let mut t = c.simplex(3, s).to_vec();
            if c.orientation(3, s) < 0 {
                t.swap(0, 1);
            }
            t
        })
        .collect();
    SimplicialComplex::from_oriented_top(3, 4, coords, &tops, Some(level))
}

/// Linking number of G⁻¹(p) and G⁻¹(q), with the unrounded integral.
pub fn linking_report(g: &AnalyticMap, p: &[f64], q: &[f64], mesh_level: usize) -> Result<LinkingReport> {
    let (pu, qu) = (unit3(p)?, unit3(q)?);
    if (pu - qu).norm() < 1e-9 {
        return Err(Error::parameter("value", "p and q must differ"));
    }
    let c = oracle_mesh(mesh_level)?;
    let lp = preimage_loops(g, p, &c)?;
    let lq = preimage_loops(g, q, &c)?;
    let all: Vec<&Loop> = lp.iter().chain(&lq).collect();
    let rot = rotation_to_e4(&pole(&all));
    let project = |l: &Loop| -> Vec<Vector3<f64>> { l.points.iter().map(|x| stereographic(&rot, x)).collect() };
    let mut integral = 0.0;
    for a in &lp {
        let pa = project(a);
        for b in &lq {
            integral += gauss_linking(&pa, &project(b));
        }
    }
    let linking = integral.round();
    if (integral - linking).abs() > ROUNDING_TOL {
        return Err(Error::AmbiguousLinking { value: integral });
    }
    Ok(LinkingReport {
        p: [pu.x, pu.y, pu.z],
        q: [qu.x, qu.y, qu.z],
        integral,
        linking: linking as i64,
        loops_p: lp.len(),
        loops_q: lq.len(),
        mesh_level,
    })
}

/// Linking number of G⁻¹(p) and G⁻¹(q) on the default oracle mesh.
pub fn linking_oracle(g: &AnalyticMap, p: &[f64], q: &[f64]) -> Result<i64> {
    Ok(linking_report(g, p, q, DEFAULT_ORACLE_LEVEL)?.linking)
}

/// Rejection-samples `count` regular values of g on S².
pub fn regular_values(g: &AnalyticMap, count: usize, mesh_level: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    let c = oracle_mesh(mesh_level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 100 * count.max(1) {
            return Err(Error::DegeneratePlan { detail: format!("found only {} regular values in {tries} tries", out.len()) });
        }
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let rho = (1.0 - z * z).sqrt();
        let v = [rho * phi.cos(), rho * phi.sin(), z];
        if preimage_loops(g, &v, &c).is_ok() {
            out.push(v);
        }
    }
    Ok(out)
}

/// Linking number of two regular values found by rejection sampling.
pub fn sampled_linking(g: &AnalyticMap, mesh_level: usize, seed: u64) -> Result<LinkingReport> {
    let v = regular_values(g, 2, mesh_level, seed)?;
    linking_report(g, &v[0], &v[1], mesh_level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{compose, constant_map, hopf_map, orientation_reversal};

    fn circle(center: Vector3<f64>, u: Vector3<f64>, v: Vector3<f64>, n: usize) -> Vec<Vector3<f64>> {
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                center + u * t.cos() + v * t.sin()
            })
            .collect()
    }

    /// Direct midpoint quadrature of (1/4π)∮∮ (r₁−r₂)·(dr₁×dr₂)/|r₁−r₂|³.
    fn gauss_quadrature(l1: &[Vector3<f64>], l2: &[Vector3<f64>]) -> f64 {
        let mut total = 0.0;
        for i in 0..l1.len() {
            let (a, b) = (l1[i], l1[(i + 1) % l1.len()]);
            for j in 0..l2.len() {
                let (c, d) = (l2[j], l2[(j + 1) % l2.len()]);
                let r = (a + b) / 2.0 - (c + d) / 2.0;
                total += r.dot(&(b - a).cross(&(d - c))) / r.norm().powi(3);
            }
        }
        total / (4.0 * PI)
    }

    #[test]
    fn solid_angle_formula_matches_quadrature() {
        let l1 = circle(Vector3::zeros(), Vector3::x(), Vector3::y(), 200);
        let l2 = circle(Vector3::new(1.0, 0.0, 0.0), Vector3::x(), Vector3::z(), 200);
        let exact = gauss_linking(&l1, &l2);
        let quad = gauss_quadrature(&l1, &l2);
        assert!((exact - quad).abs() < 1e-3, "{exact} vs {quad}");
        assert!((exact.abs() - 1.0).abs() < 1e-9);
        let far = circle(Vector3::new(5.0, 0.0, 0.0), Vector3::x(), Vector3::z(), 50);
        assert!(gauss_linking(&l1, &far).abs() < 1e-9);
    }

    #[test]
    fn stereographic_chart_preserves_orientation() {
        for n in [Vector4::new(0.0, 0.0, 0.0, 1.0), Vector4::new(0.5, 0.5, 0.5, 0.5), Vector4::new(-1.0, 0.0, 0.0, 0.0)] {
            let rot = rotation_to_e4(&n);
            assert!((rot.determinant() - 1.0).abs() < 1e-12);
            assert!((rot * n - Vector4::new(0.0, 0.0, 0.0, 1.0)).norm() < 1e-12);
            let x = -n;
            // positive frame at x: det[x, f1, f2, f3] > 0
            let frame = crate::maps::Space::Sphere(3).tangent_frame(x.as_slice());
            let h = 1e-6;
            let mut jac = nalgebra::Matrix3::zeros();
            for k in 0..3 {
                let d = Vector4::from_iterator(frame.column(k).iter().copied());
                let xp = (x + d * h).normalize();
                let xm = (x - d * h).normalize();
                let col = (stereographic(&rot, &[xp[0], xp[1], xp[2], xp[3]]) - stereographic(&rot, &[xm[0], xm[1], xm[2], xm[3]])) / (2.0 * h);
                jac.set_column(k, &col);
            }
            let mut full = nalgebra::Matrix4::zeros();
            full.set_column(0, &x);
            for k in 0..3 {
                full.set_column(k + 1, &Vector4::from_iterator(frame.column(k).iter().copied()));
            }
            assert!(full.determinant() > 0.0, "frame must be positive");
            assert!(jac.determinant() > 0.0);
        }
    }

    #[test]
    fn hopf_fibers_link_once() {
        assert_eq!(linking_oracle(&hopf_map(), &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn reversed_hopf_links_negatively() {
        let g = compose(&hopf_map(), &orientation_reversal()).unwrap();
        assert_eq!(linking_oracle(&g, &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap(), -1);
    }

    #[test]
    fn extracted_fiber_is_the_great_circle() {
        // h⁻¹(0,0,1) = {(z₁, 0)}: the circle x₃ = x₄ = 0
        let c = oracle_mesh(3).unwrap();
        let loops = preimage_loops(&hopf_map(), &[0.0, 0.0, 1.0], &c).unwrap();
        assert_eq!(loops.len(), 1);
        // chord points of the marched polygon sit within the mesh resolution of the circle
        for x in &loops[0].points {
            assert!(x[2].hypot(x[3]) < 0.05, "{x:?}");
        }
    }

    #[test]
    fn degenerate_values_are_refused() {
        let g = constant_map(Space::Sphere(3), vec![1.0, 0.0, 0.0]);
        let g = AnalyticMap::new("const-s2", Space::Sphere(3), Space::Sphere(2), move |x| g.eval(x).unwrap());
        assert!(matches!(linking_oracle(&g, &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]), Err(Error::NonRegularValue { .. })));
    }
}
