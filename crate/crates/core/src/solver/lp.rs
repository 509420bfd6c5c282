use super::{coboundary_matrix, m_norm, mass_matrix, ratios, spmv, PrimitiveSolution};
use crate::error::{Error, Result};
use crate::forms::Cochain;
use crate::mesh::SimplicialComplex;
use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use nalgebra::DVector;

/// Largest number of (k−1)- plus k-simplices the LP oracle accepts.
pub const LP_SIMPLEX_CAP: usize = 20_000;

/// Primitive minimizing max_σ |β(σ)|/vol(σ) subject to dβ = target.
pub fn lp_sup_primitive(target: &Cochain, c: &SimplicialComplex) -> Result<PrimitiveSolution> {
    target.check_complex(c)?;
    let k = target.degree();
    if k == 0 || k > c.dim() {
        return Err(Error::DegreeMismatch { detail: format!("no primitives for degree {k} on a {}-complex", c.dim()) });
    }
    let size = c.count(k - 1) + c.count(k);
    if size > LP_SIMPLEX_CAP {
        return Err(Error::Resource { what: "LP primitive".into(), requested: size, cap: LP_SIMPLEX_CAP });
    }
    let dk = coboundary_matrix(c, k - 1)?;
    let n = c.count(k - 1);
    let values = if target.is_zero() {
        vec![0.0; n]
    } else {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let t = lp.add_var(1.0, (0.0, f64::INFINITY));
        let beta: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
        for (row, &rhs) in dk.row_iter().zip(target.values()) {
            let mut e = LinearExpr::empty();
            for (&j, &v) in row.col_indices().iter().zip(row.values()) {
                e.add(beta[j], v);
            }
            lp.add_constraint(e, ComparisonOp::Eq, rhs);
        }
        for (j, &b) in beta.iter().enumerate() {
            let vol = c.volume(k - 1, j);
            lp.add_constraint([(b, 1.0), (t, -vol)], ComparisonOp::Le, 0.0);
            lp.add_constraint([(b, -1.0), (t, -vol)], ComparisonOp::Le, 0.0);
        }
        let sol = lp.solve().map_err(|e| match e {
            microlp::Error::Infeasible => Error::NonExact { obstruction: f64::NAN, tol: 0.0 },
            other => Error::Lp(other.to_string()),
        })?;
        beta.iter().map(|&b| *sol.var_value(b)).collect()
    };
    let mk = mass_matrix(c, k)?;
    let tv = DVector::from_column_slice(target.values());
    let resid = &tv - spmv(&dk, &DVector::from_column_slice(&values));
    let tn = m_norm(&mk, &tv);
    let residual = if tn == 0.0 { 0.0 } else { m_norm(&mk, &resid) / tn };
    let primitive = Cochain::from_values(c, k - 1, values)?;
    let (sup_ratio, density_ratio) = ratios(&primitive, target, c)?;
    Ok(PrimitiveSolution { primitive, residual, sup_ratio, density_ratio, solver_iterations: 0, method: "lp-sup".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{d, sup_norm};
    use crate::mesh::gen_sphere;
    use crate::solver::{least_norm_primitive, EXACTNESS_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lp_beats_least_norm_in_density() {
        let c = gen_sphere(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b0 = Cochain::from_values(&c, 1, (0..c.count(1)).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let target = d(&b0, &c).unwrap();
        let lp = lp_sup_primitive(&target, &c).unwrap();
        let ln = least_norm_primitive(&target, &c, EXACTNESS_TOL).unwrap();
        assert!(lp.residual < 1e-8, "{}", lp.residual);
        assert!(sup_norm(&lp.primitive, &c).unwrap() <= sup_norm(&ln.primitive, &c).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn zero_target_gives_zero() {
        let c = gen_sphere(2, 0).unwrap();
        let sol = lp_sup_primitive(&Cochain::zeros(&c, 2).unwrap(), &c).unwrap();
        assert!(sol.primitive.is_zero());
        assert_eq!(sol.density_ratio, 0.0);
    }
}
