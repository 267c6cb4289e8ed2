//! Property-based invariants for the norm machinery, field handling, and
//! config round-tripping.

use std::sync::Arc;

use proptest::prelude::*;

use dp::config::parse_config_str;
use dp::fem::{io as fem_io, BoxDomain, DiscreteField, Mesh};
use dp::orlicz::{self, Mode, PhaseExponents, WeightField};

fn interval(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::uniform(BoxDomain::unit_interval(), &[n]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn luxemburg_norm_is_absolutely_homogeneous(
        values in prop::collection::vec(-5.0f64..5.0, 9),
        c in prop_oneof![-4.0f64..-0.1, 0.1f64..4.0],
    ) {
        let mesh = interval(8);
        let u = DiscreteField::from_values(&mesh, values.clone()).unwrap();
        let cu = DiscreteField::from_values(
            &mesh, values.iter().map(|v| c * v).collect()).unwrap();
        let mu = WeightField::constant(&mesh, 1.0).unwrap();
        let exps = PhaseExponents::new(2.0, 3.0, 3).unwrap();
        let n1 = orlicz::luxemburg_norm(&u, &mu, &exps).unwrap();
        let n2 = orlicz::luxemburg_norm(&cu, &mu, &exps).unwrap();
        prop_assert!((n2 - c.abs() * n1).abs() <= 1e-9 * (1.0 + n2));
    }

    #[test]
    fn sandwich_holds_on_random_fields(
        values in prop::collection::vec(-5.0f64..5.0, 9),
        wvals in prop::collection::vec(0.0f64..3.0, 9),
        p in 1.2f64..3.0,
        dq in 0.1f64..2.0,
    ) {
        let mesh = interval(8);
        let u = DiscreteField::from_values(&mesh, values).unwrap();
        let mu = WeightField::new(
            DiscreteField::from_values(&mesh, wvals).unwrap()).unwrap();
        let exps = PhaseExponents::new(p, p + dq, 3).unwrap();
        let report = orlicz::check_sandwich(&u, &mu, &exps, Mode::Value).unwrap();
        prop_assert!(report.holds, "{:?}", report);
    }

    #[test]
    fn luxemburg_reduces_to_lp_without_weight(
        values in prop::collection::vec(-5.0f64..5.0, 9),
        p in 1.2f64..3.0,
    ) {
        let mesh = interval(8);
        let u = DiscreteField::from_values(&mesh, values).unwrap();
        let zero = WeightField::zero(&mesh);
        let exps = PhaseExponents::new(p, p + 1.0, 3).unwrap();
        let lux = orlicz::luxemburg_norm(&u, &zero, &exps).unwrap();
        let lp = orlicz::lp_norm(&u, p).unwrap();
        prop_assert!((lux - lp).abs() <= 1e-10 * (1.0 + lp));
    }

    #[test]
    fn apply_dirichlet_is_idempotent(
        values in prop::collection::vec(-5.0f64..5.0, 9),
    ) {
        let mesh = interval(8);
        let mut u = DiscreteField::from_values(&mesh, values).unwrap();
        u.apply_dirichlet();
        let once = u.values.clone();
        u.apply_dirichlet();
        prop_assert_eq!(once, u.values.clone());
        prop_assert!(u.satisfies_mask());
    }

    #[test]
    fn field_io_round_trip(
        values in prop::collection::vec(-1e6f64..1e6, 9),
    ) {
        let mesh = interval(8);
        let u = DiscreteField::from_values(&mesh, values).unwrap();
        let text = fem_io::format_field(&u);
        let back = fem_io::parse_field(&text, &mesh).unwrap();
        prop_assert_eq!(u.values, back.values);
    }

    #[test]
    fn mesh_io_round_trip(n in 2usize..20) {
        let mesh = Mesh::uniform(BoxDomain::unit_interval(), &[n]).unwrap();
        let text = fem_io::format_mesh(&mesh);
        let back = fem_io::parse_mesh(&text).unwrap();
        prop_assert_eq!(mesh.n_nodes(), back.n_nodes());
        prop_assert_eq!(mesh.n_elements(), back.n_elements());
        prop_assert_eq!(&mesh.boundary, &back.boundary);
    }

    #[test]
    fn config_round_trip(
        p in 1.5f64..2.9,
        dq in 0.2f64..2.0,
        res in 2usize..64,
        seed in 0u64..1000,
        threads in 1usize..8,
    ) {
        let text = format!(
            "[problem]\np = {:?}\nq = {:?}\nresolution = [{}]\n[solver]\nseed = {}\nthreads = {}\n",
            p, p + dq, res, seed, threads
        );
        let cfg = parse_config_str(&text).unwrap();
        let echoed = cfg.to_toml().unwrap();
        let reparsed = parse_config_str(&echoed).unwrap();
        prop_assert_eq!(cfg, reparsed);
    }
}
