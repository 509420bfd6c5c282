//! Primitives of exact cochains.
//!
//! The production solver minimizes ‖Dβ − c‖ in the Whitney mass norm by
//! preconditioned conjugate gradients on the normal equations, then removes
//! the component of β in ker D so the result is the mass-least-norm
//! primitive. A linear program computing the sup-norm-optimal primitive is
//! kept as an oracle for small meshes.

mod lp;

pub use lp::{lp_sup_primitive, LP_SIMPLEX_CAP};

use crate::error::{Error, Result};
use crate::forms::{comass_estimate, sup_norm, Cochain, SimplexGeometry, WhitneyTable};
use crate::mesh::SimplicialComplex;
use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;
use serde::Serialize;

/// Default relative non-exactness threshold.
pub const EXACTNESS_TOL: f64 = 1e-6;
/// Relative residual at which conjugate gradients stop.
pub const CG_TOL: f64 = 1e-12;
pub const CG_MAX_ITER: usize = 50_000;

/// Coboundary matrix from k-cochains to (k+1)-cochains.
pub fn coboundary_matrix(c: &SimplicialComplex, k: usize) -> Result<CsrMatrix<f64>> {
    if k >= c.dim() {
        return Err(Error::TopDegree { degree: k, dim: c.dim() });
    }
    let mut coo = CooMatrix::new(c.count(k + 1), c.count(k));
    for s in 0..c.count(k + 1) {
        for (f, sign) in c.boundary(k + 1, s) {
            coo.push(s, f, sign as f64);
        }
    }
    Ok(CsrMatrix::from(&coo))
}

/// Whitney mass matrix M_k[i,j] = ∫ ⟨W_i, W_j⟩ over the complex.
///
/// On a top simplex W = Σ_m λ_m A_m is affine and ∫ λ_a λ_b = vol·(1+δ_ab)/((n+1)(n+2)),
/// so the local matrix is exact.
pub fn mass_matrix(c: &SimplicialComplex, k: usize) -> Result<CsrMatrix<f64>> {
    let n = c.dim();
    if k > n {
        return Err(Error::DegreeMismatch { detail: format!("mass matrix of degree {k} on a {n}-complex") });
    }
    let table = WhitneyTable::get(n, k);
    let per = table.faces.len();
    let subfaces = c.top_subfaces(k);
    let scale = 1.0 / ((n + 1) * (n + 2)) as f64;
    let locals: Result<Vec<Vec<f64>>> = (0..c.count(n))
        .into_par_iter()
        .map(|s| {
            let geo = SimplexGeometry::new(c, n, s)?;
            let orth: Vec<Vec<Vec<f64>>> = table
                .terms
                .iter()
                .map(|t| t.iter().map(|a| geo.to_orthonormal(a).coeffs().to_vec()).collect())
                .collect();
            let signs: Vec<f64> = subfaces[s * per..(s + 1) * per].iter().map(|&f| c.orientation(k, f) as f64).collect();
            let mut m = vec![0.0; per * per];
            for i in 0..per {
                for j in i..per {
                    let mut acc = 0.0;
                    for a in 0..=n {
                        for b in 0..=n {
                            let w = if a == b { 2.0 } else { 1.0 };
                            acc += w * dot(&orth[i][a], &orth[j][b]);
                        }
                    }
                    let v = signs[i] * signs[j] * geo.volume * scale * acc;
                    m[i * per + j] = v;
                    m[j * per + i] = v;
                }
            }
            Ok(m)
        })
        .collect();
    let mut coo = CooMatrix::new(c.count(k), c.count(k));
    for (s, m) in locals?.into_iter().enumerate() {
        let faces = &subfaces[s * per..(s + 1) * per];
        for i in 0..per {
            for j in 0..per {
                coo.push(faces[i], faces[j], m[i * per + j]);
            }
        }
    }
    Ok(CsrMatrix::from(&coo))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn spmv(a: &CsrMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.nrows(), a.row_iter().map(|row| row.col_indices().iter().zip(row.values()).map(|(&j, v)| v * x[j]).sum()))
}

/// ‖ |Dᵀ| |y| ‖, the size Dᵀy would have without cancellation.
fn transpose_scale(d: &CsrMatrix<f64>, y: &DVector<f64>) -> f64 {
    let mut acc = vec![0.0; d.ncols()];
    for (i, j, v) in d.triplet_iter() {
        acc[j] += (v * y[i]).abs();
    }
    acc.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn m_norm(m: &CsrMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&spmv(m, x)).max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CgStats {
    pub iterations: usize,
    /// ‖b − Ax‖/‖b‖ at exit.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// semidefinite A and a right-hand side in its range.
pub fn pcg(a: &CsrMatrix<f64>, b: &DVector<f64>, tol: f64, max_iter: usize) -> Result<(DVector<f64>, CgStats)> {
    pcg_scaled(a, b, b.norm(), tol, max_iter)
}

/// As [`pcg`], with residuals measured relative to `scale` instead of ‖b‖.
/// Needed when b is itself roundoff-sized, e.g. Dᵀ(Mβ) for β already
/// orthogonal to range D.
pub fn pcg_scaled(a: &CsrMatrix<f64>, b: &DVector<f64>, scale: f64, tol: f64, max_iter: usize) -> Result<(DVector<f64>, CgStats)> {
    let n = b.len();
    let bnorm = scale.max(b.norm());
    let mut x = DVector::zeros(n);
    if bnorm == 0.0 {
        return Ok((x, CgStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut diag = vec![0.0; n];
    for (i, j, v) in a.triplet_iter() {
        if i == j {
            diag[i] += *v;
        }
    }
    let inv: DVector<f64> = DVector::from_iterator(n, diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }));
    let mut r = b.clone();
    let mut z = r.component_mul(&inv);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for it in 0..max_iter {
        let res = r.norm() / bnorm;
        if res <= tol {
            return Ok((x, CgStats { iterations: it, relative_residual: res }));
        }
        let ap = spmv(a, &p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        z = r.component_mul(&inv);
        let rz_new = r.dot(&z);
        p = &z + &p * (rz_new / rz);
        rz = rz_new;
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: r.norm() / bnorm })
}

/// Operators shared by the exactness check and the primitive solve for degree-k targets.
struct Normal {
    dk: CsrMatrix<f64>,
    mk: CsrMatrix<f64>,
    normal: CsrMatrix<f64>,
}

impl Normal {
    fn new(c: &SimplicialComplex, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::DegreeMismatch { detail: "0-cochains have no primitives".into() });
        }
        if k > c.dim() {
            return Err(Error::DegreeMismatch { detail: format!("degree {k} on a {}-complex", c.dim()) });
        }
        let dk = coboundary_matrix(c, k - 1)?;
        let mk = mass_matrix(c, k)?;
        let normal = &dk.transpose() * &(&mk * &dk);
        Ok(Normal { dk, mk, normal })
    }

    /// Least-squares β with ‖Dβ − c‖_M minimal, plus the relative residual.
    fn least_squares(&self, target: &DVector<f64>) -> Result<(DVector<f64>, f64, CgStats)> {
        let mt = spmv(&self.mk, target);
        let rhs = spmv(&self.dk.transpose(), &mt);
        let (beta, stats) = pcg_scaled(&self.normal, &rhs, transpose_scale(&self.dk, &mt), CG_TOL, CG_MAX_ITER)?;
        let tn = m_norm(&self.mk, target);
        let resid = target - spmv(&self.dk, &beta);
        let rel = if tn == 0.0 { 0.0 } else { m_norm(&self.mk, &resid) / tn };
        Ok((beta, rel, stats))
    }
}

/// ‖a‖_M, the L² norm of the Whitney interpolant.
pub fn mass_norm(a: &Cochain, c: &SimplicialComplex) -> Result<f64> {
    a.check_complex(c)?;
    Ok(m_norm(&mass_matrix(c, a.degree())?, &DVector::from_column_slice(a.values())))
}

/// ‖c − Dψ‖_M / ‖c‖_M for the least-squares ψ: the share of `target`
/// orthogonal to the range of d. 0 means exact.
pub fn exactness_check(target: &Cochain, c: &SimplicialComplex) -> Result<f64> {
    target.check_complex(c)?;
    let t = DVector::from_column_slice(target.values());
    Ok(Normal::new(c, target.degree())?.least_squares(&t)?.1)
}

/// The part of `target` orthogonal to the range of d.
pub fn obstruction_part(target: &Cochain, c: &SimplicialComplex) -> Result<Cochain> {
    target.check_complex(c)?;
    let op = Normal::new(c, target.degree())?;
    let t = DVector::from_column_slice(target.values());
    let (beta, _, _) = op.least_squares(&t)?;
    Cochain::from_values(c, target.degree(), (t - spmv(&op.dk, &beta)).as_slice().to_vec())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimitiveSolution {
    #[serde(skip)]
    pub primitive: Cochain,
    /// ‖Dβ − target‖_M / ‖target‖_M.
    pub residual: f64,
    /// comass_estimate(β) / comass_estimate(target); 0 for a zero target.
    pub sup_ratio: f64,
    /// sup_norm(β) / sup_norm(target), the simplexwise mass-density ratio the LP optimizes.
    pub density_ratio: f64,
    pub solver_iterations: usize,
    pub method: String,
}

pub(crate) fn ratios(beta: &Cochain, target: &Cochain, c: &SimplicialComplex) -> Result<(f64, f64)> {
    if target.is_zero() {
        return Ok((0.0, 0.0));
    }
    Ok((comass_estimate(beta, c)? / comass_estimate(target, c)?, sup_norm(beta, c)? / sup_norm(target, c)?))
}

/// Mass-least-norm β with dβ = target.
///
/// Kernel removal assumes ker d at degree k−1 equals the range of d (or the
/// constants when k = 1), i.e. H^{k−1} = 0 for 1 ≤ k−1. This holds for the
/// spheres and sphere × interval complexes generated here at the degrees used.
pub fn least_norm_primitive(target: &Cochain, c: &SimplicialComplex, tol: f64) -> Result<PrimitiveSolution> {
    target.check_complex(c)?;
    let k = target.degree();
    let op = Normal::new(c, k)?;
    let t = DVector::from_column_slice(target.values());
    let (mut beta, obstruction, stats) = op.least_squares(&t)?;
    if obstruction >= tol {
        return Err(Error::NonExact { obstruction, tol });
    }
    let mut iterations = stats.iterations;
    let m = mass_matrix(c, k - 1)?;
    if k == 1 {
        let ones = DVector::from_element(beta.len(), 1.0);
        let m1 = spmv(&m, &ones);
        let mean = beta.dot(&m1) / ones.dot(&m1);
        beta.add_scalar_mut(-mean);
    } else {
        let dprev = coboundary_matrix(c, k - 2)?;
        let lap = &dprev.transpose() * &(&m * &dprev);
        let mb = spmv(&m, &beta);
        let rhs = spmv(&dprev.transpose(), &mb);
        let (phi, s2) = pcg_scaled(&lap, &rhs, transpose_scale(&dprev, &mb), CG_TOL, CG_MAX_ITER)?;
        iterations += s2.iterations;
        beta -= spmv(&dprev, &phi);
    }
    let resid = &t - spmv(&op.dk, &beta);
    let tn = m_norm(&op.mk, &t);
    let residual = if tn == 0.0 { 0.0 } else { m_norm(&op.mk, &resid) / tn };
    let primitive = Cochain::from_values(c, k - 1, beta.as_slice().to_vec())?;
    let (sup_ratio, density_ratio) = ratios(&primitive, target, c)?;
    Ok(PrimitiveSolution {
        primitive,
        residual,
        sup_ratio,
        density_ratio,
        solver_iterations: iterations,
        method: "least-norm".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::d;
    use crate::mesh::gen_sphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(c: &SimplicialComplex, k: usize, seed: u64) -> Cochain {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Cochain::from_values(c, k, (0..c.count(k)).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn p1_mass_sums_to_volume() {
        let c = gen_sphere(2, 2).unwrap();
        let m = mass_matrix(&c, 0).unwrap();
        let total: f64 = m.values().iter().sum();
        let area: f64 = c.volumes(2).iter().sum();
        assert!((total - area).abs() < 1e-12 * area);
    }

    #[test]
    fn top_mass_is_inverse_volume() {
        let c = gen_sphere(3, 1).unwrap();
        let m = mass_matrix(&c, 3).unwrap();
        for (i, j, v) in m.triplet_iter() {
            assert_eq!(i, j);
            assert!((v - 1.0 / c.volume(3, i)).abs() < 1e-9 / c.volume(3, i));
        }
    }

    #[test]
    fn mass_matrices_are_positive_definite_on_samples() {
        let c = gen_sphere(3, 0).unwrap();
        for k in 0..=3 {
            let m = mass_matrix(&c, k).unwrap();
            for seed in 0..5 {
                let x = DVector::from_column_slice(random(&c, k, seed).values());
                assert!(x.dot(&spmv(&m, &x)) > 0.0);
            }
        }
    }

    #[test]
    fn primitive_of_a_coboundary() {
        let c = gen_sphere(3, 1).unwrap();
        let target = d(&random(&c, 1, 3), &c).unwrap();
        let sol = least_norm_primitive(&target, &c, EXACTNESS_TOL).unwrap();
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        let back = d(&sol.primitive, &c).unwrap();
        assert!(back.sub(&target).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn primitive_is_orthogonal_to_the_kernel() {
        let c = gen_sphere(3, 1).unwrap();
        let target = d(&random(&c, 1, 5), &c).unwrap();
        let beta = DVector::from_column_slice(least_norm_primitive(&target, &c, EXACTNESS_TOL).unwrap().primitive.values());
        let m = mass_matrix(&c, 1).unwrap();
        let d0 = coboundary_matrix(&c, 0).unwrap();
        let g = random(&c, 0, 6);
        let dg = spmv(&d0, &DVector::from_column_slice(g.values()));
        assert!(dg.dot(&spmv(&m, &beta)).abs() < 1e-9 * dg.norm() * beta.norm());
    }

    #[test]
    fn random_cochain_is_not_closed() {
        let c = gen_sphere(2, 2).unwrap();
        let a = random(&c, 2, 1);
        let ob = exactness_check(&a, &c).unwrap();
        assert!(ob > 1e-3);
        let cleaned = a.sub(&obstruction_part(&a, &c).unwrap()).unwrap();
        assert!(exactness_check(&cleaned, &c).unwrap() < 1e-8);
        assert!(matches!(least_norm_primitive(&a, &c, EXACTNESS_TOL), Err(Error::NonExact { .. })));
    }

    #[test]
    fn zero_target() {
        let c = gen_sphere(2, 1).unwrap();
        let z = Cochain::zeros(&c, 2).unwrap();
        let sol = least_norm_primitive(&z, &c, EXACTNESS_TOL).unwrap();
        assert!(sol.primitive.is_zero());
        assert_eq!(sol.sup_ratio, 0.0);
    }
}
