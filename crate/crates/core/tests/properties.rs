use hopflab::audit::{Ratio, UNDEFINED_BELOW};
use hopflab::dilation::{relation_on_samples, Sample, RELATION_SLACK};
use hopflab::forms::{comass_estimate, d, stokes_check, sup_norm, Cochain};
use hopflab::maps::lookup;
use hopflab::mesh::{gen_product_interval, gen_sphere, SimplicialComplex};
use hopflab::solver::{least_norm_primitive, mass_norm};
use proptest::prelude::*;
use std::sync::OnceLock;

fn s3() -> &'static SimplicialComplex {
    static C: OnceLock<SimplicialComplex> = OnceLock::new();
    C.get_or_init(|| gen_sphere(3, 1).unwrap())
}

fn product() -> &'static SimplicialComplex {
    static C: OnceLock<SimplicialComplex> = OnceLock::new();
    C.get_or_init(|| gen_product_interval(&gen_sphere(3, 0).unwrap(), 2).unwrap())
}

fn cochain(c: &'static SimplicialComplex, k: usize) -> impl Strategy<Value = Cochain> {
    prop::collection::vec(-1.0f64..1.0, c.count(k)).prop_map(move |v| Cochain::from_values(c, k, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dd_vanishes_on_the_sphere(a in cochain(s3(), 1)) {
        prop_assert!(d(&d(&a, s3()).unwrap(), s3()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn dd_vanishes_on_the_product(k in 0usize..3, seed in any::<u64>()) {
        let p = product();
        let v: Vec<f64> = (0..p.count(k)).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64 / 500.0) - 1.0).collect();
        let a = Cochain::from_values(p, k, v).unwrap();
        prop_assert!(d(&d(&a, p).unwrap(), p).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn d_is_linear(a in cochain(s3(), 1), b in cochain(s3(), 1), t in -3.0f64..3.0) {
        let c = s3();
        let lhs = d(&a.axpy(t, &b).unwrap(), c).unwrap();
        let rhs = d(&a, c).unwrap().axpy(t, &d(&b, c).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn stokes_on_closed_and_bounded(a in cochain(s3(), 2), b in cochain(product(), 3)) {
        let (bulk, boundary) = stokes_check(&a, s3()).unwrap();
        prop_assert!(bulk.abs() < 1e-10 && boundary == 0.0);
        let (bulk, boundary) = stokes_check(&b, product()).unwrap();
        prop_assert!((bulk - boundary).abs() < 1e-9 * (1.0 + bulk.abs()));
    }

    #[test]
    fn norms_are_absolutely_homogeneous(a in cochain(s3(), 1), t in -5.0f64..5.0) {
        let c = s3();
        let ta = a.scaled(t);
        for (x, y) in [
            (sup_norm(&ta, c).unwrap(), sup_norm(&a, c).unwrap()),
            (mass_norm(&ta, c).unwrap(), mass_norm(&a, c).unwrap()),
            (comass_estimate(&ta, c).unwrap(), comass_estimate(&a, c).unwrap()),
        ] {
            prop_assert!((x - t.abs() * y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn least_norm_primitive_is_no_larger_than_any_primitive(b in cochain(s3(), 1)) {
        let c = s3();
        let target = d(&b, c).unwrap();
        let sol = least_norm_primitive(&target, c, f64::INFINITY).unwrap();
        prop_assert!(sol.residual < 1e-9);
        prop_assert!(d(&sol.primitive, c).unwrap().sub(&target).unwrap().max_abs() < 1e-8);
        prop_assert!(mass_norm(&sol.primitive, c).unwrap() <= mass_norm(&b, c).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn dilation_relation_holds_per_sample(mut s in prop::collection::vec(0.0f64..10.0, 4)) {
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let sample = Sample { point: vec![0.0; 4], singular_values: s };
        for (j, k) in [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)] {
            let r = relation_on_samples(std::slice::from_ref(&sample), j, k);
            prop_assert!(r.holds && r.min_sample_slack >= -RELATION_SLACK, "{r:?}");
        }
    }

    #[test]
    fn ratio_is_undefined_exactly_below_threshold(lhs in -1e3f64..1e3, rhs in 0.0f64..1e-6) {
        match Ratio::of(lhs, rhs) {
            Ratio::Undefined => prop_assert!(rhs < UNDEFINED_BELOW),
            Ratio::Value(v) => {
                prop_assert!(rhs >= UNDEFINED_BELOW);
                prop_assert_eq!(v, lhs / rhs);
            }
        }
    }

    #[test]
    fn hopf_map_lands_on_the_sphere(p in prop::collection::vec(-1.0f64..1.0, 4)) {
        let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let x: Vec<f64> = p.iter().map(|v| v / n).collect();
        let y = lookup("hopf").unwrap().eval(&x).unwrap();
        prop_assert!((y.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mesh_json_round_trips() {
    for (dim, level) in [(2, 0), (2, 2), (3, 1)] {
        let c = gen_sphere(dim, level).unwrap();
        let back = SimplicialComplex::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.checksum(), c.checksum());
    }
}
