use covering_lab::covering::{greedy_5r_cover, verify_5r_cover, BallFamily};
use covering_lab::io::{format_balls, format_measure, parse_balls, parse_measure};
use covering_lab::measure::{density_representation_check, maximal_function, AtomicMeasure};
use covering_lab::metric::{Ball, MetricSpec, Point};
use covering_lab::wbcp::{
    export_certificate, parse_certificate, BesicovitchConfig, Certificate, SearchBudget,
};
use num_traits::Zero;
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = MetricSpec> {
    prop_oneof![
        (1usize..4).prop_map(|n| MetricSpec::Euclidean { n }),
        (1.0f64..6.0).prop_map(|p| MetricSpec::PNorm { n: 2, p }),
        Just(MetricSpec::Koranyi),
        (0.3f64..3.0).prop_map(|gamma| MetricSpec::HebischSikora { gamma }),
        (0.5f64..8.0).prop_map(|eps| MetricSpec::HeisenbergEps { eps }),
        (0.2f64..1.0).prop_map(|s| MetricSpec::snowflake(MetricSpec::Euclidean { n: 2 }, s)),
        Just(MetricSpec::LpMeanProduct { p: 2.0, s: 3.0 }),
    ]
}

fn spec_and_points(count: usize) -> impl Strategy<Value = (MetricSpec, Vec<Vec<f64>>)> {
    spec().prop_flat_map(move |s| {
        let dim = s.dim();
        (
            Just(s),
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), count),
        )
    })
}

fn plane_balls() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0.01f64..3.0), 1..80)
}

fn to_family(rows: &[(f64, f64, f64)]) -> BallFamily {
    let balls = rows
        .iter()
        .map(|&(x, y, r)| Ball::new(Point::new(vec![x, y]).unwrap(), r).unwrap())
        .collect();
    BallFamily::new(MetricSpec::Euclidean { n: 2 }, balls).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn triangle_symmetry_identity((s, pts) in spec_and_points(3)) {
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        let dxy = s.dist(x, y);
        prop_assert!(dxy >= 0.0);
        prop_assert_eq!(s.dist(x, x), 0.0);
        prop_assert!((dxy - s.dist(y, x)).abs() <= 1e-12 * dxy.max(1.0));
        prop_assert!(s.dist(x, z) <= dxy + s.dist(y, z) + 1e-9 * (1.0 + s.dist(x, z)));
    }

    #[test]
    fn translation_and_dilation((s, pts) in spec_and_points(3), t in 0.1f64..10.0) {
        let (x, y, g) = (&pts[0], &pts[1], &pts[2]);
        let d = s.dist(x, y);
        let moved = s.dist(&s.translate(g, x), &s.translate(g, y));
        prop_assert!((moved - d).abs() <= 1e-9 * (1.0 + d));
        let scaled = s.dist(&s.dilate(t, x), &s.dilate(t, y));
        prop_assert!((scaled - t * d).abs() <= 1e-9 * (1.0 + t * d));
    }

    #[test]
    fn five_r_cover_verifies(rows in plane_balls()) {
        let fam = to_family(&rows);
        let res = greedy_5r_cover(&fam).unwrap();
        let v = verify_5r_cover(&fam, &res);
        prop_assert!(v.passed(), "{:?}", v.failures);
    }

    #[test]
    fn ball_files_round_trip(rows in plane_balls()) {
        let fam = to_family(&rows);
        let spec = fam.spec.clone();
        prop_assert_eq!(parse_balls(&format_balls(&fam), &spec).unwrap(), fam);
    }

    #[test]
    fn measure_files_round_trip(atoms in prop::collection::btree_map((-100i32..100, -100i32..100), 1e-6f64..1e6, 1..40)) {
        let atoms = atoms.into_iter().map(|((x, y), m)| (Point::new(vec![x as f64 / 3.0, y as f64 / 7.0]).unwrap(), m)).collect();
        let m = AtomicMeasure::new(MetricSpec::Euclidean { n: 2 }, atoms).unwrap();
        prop_assert_eq!(parse_measure(&format_measure(&m), &m.spec).unwrap(), m);
    }

    #[test]
    fn density_residual_is_exactly_zero(
        sites in prop::collection::btree_map(0i32..30, (0.0f64..1.0, 0.0f64..1.0, 0.1f64..10.0, 0.1f64..10.0), 1..25),
    ) {
        let spec = MetricSpec::Euclidean { n: 1 };
        let mut mu = Vec::new();
        let mut lambda = Vec::new();
        let mut set = Vec::new();
        for (x, (pm, pl, a, b)) in sites {
            let p = Point::new(vec![x as f64 * 0.37]).unwrap();
            if pm < 0.7 { mu.push((p.clone(), a)); }
            if pl < 0.7 { lambda.push((p.clone(), b)); }
            if pm + pl > 0.6 { set.push(p); }
        }
        let mu = AtomicMeasure::new(spec.clone(), mu).unwrap();
        let lambda = AtomicMeasure::new(spec, lambda).unwrap();
        prop_assert!(density_representation_check(&mu, &lambda, &set).unwrap().is_zero());
    }

    #[test]
    fn maximal_function_dominates_values(f in prop::collection::vec(-5.0f64..5.0, 25), at in 0usize..25) {
        let lambda = AtomicMeasure::grid_lebesgue(2, 5).unwrap();
        let x = lambda.points()[at].coords().to_vec();
        let mf = maximal_function(&f, &lambda, &x, None).unwrap();
        prop_assert!(mf >= f[at].abs() * (1.0 - 1e-12));
        let avg = f.iter().map(|v| v.abs()).sum::<f64>() / 25.0;
        prop_assert!(mf >= avg * (1.0 - 1e-12));
    }

    #[test]
    fn certificates_round_trip(k in 1usize..6, jitter in prop::collection::vec(-0.1f64..0.1, 5), slack in 1e-3f64..0.2) {
        let centers = (0..k)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * (i as f64 + jitter[i]) / k as f64;
                Point::new(vec![t.cos(), t.sin()]).unwrap()
            })
            .collect();
        let config = BesicovitchConfig::new(MetricSpec::Euclidean { n: 2 }, Point::origin(2), centers, vec![1.0 + slack; k], None).unwrap();
        let cert = Certificate::from_config(config, 1e-12, SearchBudget::default()).unwrap();
        let text = export_certificate(&cert).unwrap();
        let back = parse_certificate(&text, Some(cert.precision));
        if cert.is_valid() {
            let back = back.unwrap();
            prop_assert_eq!(export_certificate(&back).unwrap(), text);
            prop_assert_eq!(back.margin.to_bits(), cert.margin.to_bits());
        } else {
            prop_assert!(back.is_err());
        }
    }
}
