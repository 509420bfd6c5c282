//! Exact and near-exact checks that must hold on any build.

use hopflab::audit::{audit_homotopy, AuditConfig, Ratio};
use hopflab::construction::{build_lambda_map, sweep, SweepConfig};
use hopflab::dilation::{check_dilation_relation, check_pullback_bound, dilation, SamplingPlan};
use hopflab::forms::{bump_area_form, d, project_form, stokes_check, Cochain};
use hopflab::hopf::{hopf_invariant, primitive_independence, HopfConfig};
use hopflab::maps::{lookup, singular_values};
use hopflab::mesh::{gen_product_interval, gen_sphere, SimplicialComplex};
use hopflab::solver::{least_norm_primitive, lp_sup_primitive, EXACTNESS_TOL};
use hopflab::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

type Check = fn() -> Result<std::result::Result<(), String>>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<std::result::Result<(), String>> {
    Ok(if ok { Ok(()) } else { Err(msg()) })
}

fn random(c: &SimplicialComplex, k: usize, seed: u64) -> Result<Cochain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Cochain::from_values(c, k, (0..c.count(k)).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn small_plan() -> SamplingPlan {
    SamplingPlan { samples: 2000, refine_rounds: 1, refine_points: 200, pairs: 1000, ..SamplingPlan::default() }
}

fn octahedron() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(2, 0)?;
    ensure(c.counts() == [6, 12, 8] && c.euler_characteristic() == 2, || format!("{:?}", c.counts()))
}

fn sixteen_cell() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(3, 0)?;
    ensure(c.counts() == [8, 24, 32, 16] && c.euler_characteristic() == 0, || format!("{:?}", c.counts()))
}

fn product_counts() -> Result<std::result::Result<(), String>> {
    let base = gen_sphere(3, 1)?;
    let p = gen_product_interval(&base, 3)?;
    let (s0, s1) = p.boundary_slices()?;
    ensure(
        p.count(4) == 4 * base.count(3) * 3 && s0.complex.counts() == base.counts() && s1.complex.counts() == base.counts(),
        || format!("{:?}", p.counts()),
    )
}

fn dd_zero() -> Result<std::result::Result<(), String>> {
    let p = gen_product_interval(&gen_sphere(3, 1)?, 2)?;
    for k in 0..=2 {
        let dd = d(&d(&random(&p, k, k as u64)?, &p)?, &p)?;
        if dd.max_abs() >= 1e-12 {
            return ensure(false, || format!("degree {k}: {}", dd.max_abs()));
        }
    }
    ensure(d(&Cochain::zeros(&p, 1)?, &p)?.is_zero(), || "d(0) ≠ 0".into())
}

fn mesh_round_trip() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(2, 1)?;
    let back = SimplicialComplex::from_json_str(&c.to_json_string())?;
    ensure(back == c, || "round trip changed the complex".into())
}

fn dangling_vertex() -> Result<std::result::Result<(), String>> {
    let mut file: serde_json::Value = serde_json::from_str(&gen_sphere(2, 0)?.to_json_string()).expect("mesh JSON");
    file["simplices"]["2"][0][2] = 99.into();
    let r = SimplicialComplex::from_json_str(&file.to_string());
    ensure(matches!(r, Err(Error::Validation { .. })), || format!("{r:?}"))
}

fn bump_support() -> Result<std::result::Result<(), String>> {
    let w = bump_area_form();
    ensure(w.eval(&[2.0, 0.0, 0.0]).is_zero() && w.eval(&[0.0, 1.2, 1.6]).is_zero(), || "nonzero outside support".into())
}

fn constant_projection() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(3, 1)?;
    ensure(project_form(&lookup("const:0.1,0.9,0.2")?, &bump_area_form(), &c, 2)?.is_zero(), || "nonzero".into())
}

fn stokes_product() -> Result<std::result::Result<(), String>> {
    let p = gen_product_interval(&gen_sphere(3, 1)?, 2)?;
    let (bulk, boundary) = stokes_check(&random(&p, 3, 5)?, &p)?;
    let closed = gen_sphere(3, 1)?;
    let (b2, _) = stokes_check(&random(&closed, 2, 6)?, &closed)?;
    ensure((bulk - boundary).abs() < 1e-9 * (1.0 + bulk.abs()) && b2.abs() < 1e-9, || format!("{bulk} vs {boundary}, {b2}"))
}

fn primitive_of_coboundary() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(3, 1)?;
    let target = d(&random(&c, 1, 7)?, &c)?;
    let sol = least_norm_primitive(&target, &c, EXACTNESS_TOL)?;
    ensure(sol.residual < 1e-10, || format!("residual {}", sol.residual))
}

fn area_form_not_exact() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(2, 2)?;
    let target = project_form(&lookup("i-s2")?, &bump_area_form(), &c, 4)?;
    match least_norm_primitive(&target, &c, EXACTNESS_TOL) {
        Err(Error::NonExact { obstruction, .. }) => ensure((obstruction - 1.0).abs() < 1e-3, || format!("obstruction {obstruction}")),
        other => ensure(false, || format!("{other:?}")),
    }
}

fn lp_optimal() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(2, 1)?;
    let target = d(&random(&c, 1, 8)?, &c)?;
    let lp = lp_sup_primitive(&target, &c)?;
    let ln = least_norm_primitive(&target, &c, EXACTNESS_TOL)?;
    ensure(lp.density_ratio <= ln.density_ratio * (1.0 + 1e-9), || format!("{} > {}", lp.density_ratio, ln.density_ratio))
}

fn hopf_poles() -> Result<std::result::Result<(), String>> {
    let h = lookup("hopf")?;
    let a = h.eval(&[1.0, 0.0, 0.0, 0.0])?;
    let b = h.eval(&[0.0, 0.0, 1.0, 0.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut p: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        p.iter_mut().for_each(|x| *x /= n);
        let y = h.eval(&p)?;
        worst = worst.max((y.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs());
    }
    let close = |u: &[f64], v: [f64; 3]| u.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-15);
    ensure(close(&a, [0.0, 0.0, 1.0]) && close(&b, [0.0, 0.0, -1.0]) && worst < 1e-12, || format!("{a:?} {b:?} {worst}"))
}

fn constant_jacobian() -> Result<std::result::Result<(), String>> {
    let s = singular_values(&lookup("const:1,2,3")?, &[0.5, 0.5, 0.5, 0.5])?;
    ensure(s.iter().all(|&v| v == 0.0), || format!("{s:?}"))
}

fn isometry_dilation() -> Result<std::result::Result<(), String>> {
    let f = lookup("id-s3")?;
    for k in 1..=3 {
        let r = dilation(&f, k, &small_plan())?;
        if (r.sup_estimate - 1.0).abs() > 1e-9 {
            return ensure(false, || format!("dil_{k} = {}", r.sup_estimate));
        }
    }
    let rel = check_dilation_relation(&f, 1, 3, &small_plan())?;
    ensure(rel.holds, || format!("{rel:?}"))
}

fn constant_dilation() -> Result<std::result::Result<(), String>> {
    let f = lookup("const:0,0,1")?;
    let r = dilation(&f, 2, &small_plan())?;
    let pb = check_pullback_bound(&f, &bump_area_form(), &small_plan())?;
    ensure(r.sup_estimate == 0.0 && pb.max_violation <= 0.0, || format!("{} {}", r.sup_estimate, pb.max_violation))
}

fn constant_hopf() -> Result<std::result::Result<(), String>> {
    let c = gen_sphere(3, 1)?;
    let f = lookup("const:0.3,0.2,0.1")?;
    let h = hopf_invariant(&f, &bump_area_form(), &c, &HopfConfig::default())?;
    let ind = primitive_independence(&f, &bump_area_form(), &c, 3, &HopfConfig::default())?;
    ensure(h.value == 0.0 && ind.max_deviation == 0.0, || format!("{} {}", h.value, ind.max_deviation))
}

fn time_constant_audit() -> Result<std::result::Result<(), String>> {
    let p = gen_product_interval(&gen_sphere(3, 1)?, 1)?;
    let config = AuditConfig { reference_level: None, plan: small_plan(), ..AuditConfig::default() };
    let r = audit_homotopy(&lookup("time-const:i∘hopf")?, &bump_area_form(), &p, &config)?;
    ensure(
        r.hopf_gap <= 0.01 && r.dil3 <= 1e-8 && r.alpha_sup <= 1e-8 && r.measured_ratio == Ratio::Undefined && r.dil4_violation <= 0.0,
        || format!("gap {} dil3 {} alpha {} ratio {}", r.hopf_gap, r.dil3, r.alpha_sup, r.measured_ratio),
    )
}

fn radial_unit() -> Result<std::result::Result<(), String>> {
    let r = 0.8;
    let l = build_lambda_map(r)?;
    let y = l.eval(&[0.3, -0.4, 0.5])?;
    let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    ensure((n - 1.0).abs() < 1e-12, || format!("|Λ(x)| = {n}"))
}

fn sweep_rows_sorted() -> Result<std::result::Result<(), String>> {
    let config = SweepConfig { deltas: vec![0.1, 0.2], plan: small_plan(), boundary_samples: 100, ..SweepConfig::default() };
    let r = sweep(&lookup("cone:hopf")?, &config)?;
    ensure(r.rows.len() == 2 && r.rows[0].delta > r.rows[1].delta, || format!("{:?}", r.rows.iter().map(|x| x.delta).collect::<Vec<_>>()))
}

const CHECKS: &[(&str, Check)] = &[
    ("octahedron combinatorics", octahedron),
    ("16-cell combinatorics", sixteen_cell),
    ("product counts and boundary slices", product_counts),
    ("d∘d = 0 and d(0) = 0", dd_zero),
    ("mesh file round trip", mesh_round_trip),
    ("dangling vertex rejected", dangling_vertex),
    ("bump form vanishes off its support", bump_support),
    ("constant map projects to zero", constant_projection),
    ("discrete Stokes", stokes_product),
    ("primitive of a coboundary", primitive_of_coboundary),
    ("S² area form is not exact", area_form_not_exact),
    ("LP primitive is sup-optimal", lp_optimal),
    ("Hopf map poles and norm", hopf_poles),
    ("constant map has zero Jacobian", constant_jacobian),
    ("isometry has unit dilation", isometry_dilation),
    ("constant map has zero dilation", constant_dilation),
    ("constant map has zero Hopf invariant", constant_hopf),
    ("time-constant audit", time_constant_audit),
    ("Λ lands on the unit sphere", radial_unit),
    ("sweep rows sorted", sweep_rows_sorted),
];

/// Runs every check, printing one line each; returns the number of failures.
pub fn run(out: &mut impl Write) -> usize {
    let mut failures = 0;
    for (name, check) in CHECKS {
        let verdict = match check() {
            Ok(Ok(())) => "PASS".to_string(),
            Ok(Err(why)) => {
                failures += 1;
                format!("FAIL ({why})")
            }
            Err(e) => {
                failures += 1;
                format!("FAIL (error: {e})")
            }
        };
        let _ = writeln!(out, "{verdict:<5} {name}");
    }
    let _ = writeln!(out, "{} of {} checks passed", CHECKS.len() - failures, CHECKS.len());
    failures
}
