use covering_lab::covering::{
    besicovitch_select, besicovitch_select_only, disjoint_color, multiplicity_profile,
    uncovered_centers, BallFamily,
};
use covering_lab::metric::{Ball, MetricSpec, Point, DEFAULT_STRICT_MARGIN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn family(
    rng: &mut ChaCha8Rng,
    n: usize,
    side: f64,
    radius: impl Fn(&mut ChaCha8Rng) -> f64,
) -> BallFamily {
    let balls = (0..n)
        .map(|_| {
            let c = Point::new(vec![
                rng.random_range(0.0..side),
                rng.random_range(0.0..side),
            ])
            .unwrap();
            let r = radius(rng);
            Ball::new(c, r).unwrap()
        })
        .collect();
    BallFamily::new(MetricSpec::Euclidean { n: 2 }, balls).unwrap()
}

#[test]
fn unit_balls_multiplicity_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fam = family(&mut rng, 10_000, 40.0, |_| 1.0);
    let sel = besicovitch_select(&fam).unwrap();
    assert!(uncovered_centers(&fam, &sel.selected).is_empty());

    // selected unit disks have centers more than 1 apart, so no point lies in six of them
    assert!(sel.multiplicity.max <= 5, "{:?}", sel.multiplicity);

    let random: Vec<Vec<f64>> = (0..100_000)
        .map(|_| vec![rng.random_range(-1.0..41.0), rng.random_range(-1.0..41.0)])
        .collect();
    let sampled = multiplicity_profile(&fam, &sel.selected, &random);
    assert!(
        sampled.max <= sel.multiplicity.max,
        "random probe found depth {} > {}",
        sampled.max,
        sel.multiplicity.max
    );

    let coloring = disjoint_color(&fam, &sel).unwrap();
    assert!(coloring.verify(&fam, DEFAULT_STRICT_MARGIN));
    assert_eq!(coloring.balls.len(), sel.selected.len());
}

/// Among all subsets of a small family, exactly one is closed under the
/// selection rule: it keeps ball `i` iff no kept ball of larger rank covers
/// center `i`. That subset must be the library's selection, and it must cover
/// every center.
#[test]
fn selection_matches_exhaustive_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let fam = family(&mut rng, 12, 4.0, |r| r.random_range(0.2..1.5));
        let n = fam.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            fam.balls[b]
                .radius
                .total_cmp(&fam.balls[a].radius)
                .then(a.cmp(&b))
        });
        let rank: Vec<usize> = {
            let mut r = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                r[i] = pos;
            }
            r
        };
        let covers = |j: usize, i: usize| {
            let (a, b) = (fam.balls[j].center.coords(), fam.balls[i].center.coords());
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() <= fam.balls[j].radius
        };
        let mut fixed = Vec::new();
        for mask in 0u32..(1 << n) {
            let closed = (0..n).all(|i| {
                let blocked =
                    (0..n).any(|j| mask >> j & 1 == 1 && rank[j] < rank[i] && covers(j, i));
                (mask >> i & 1 == 1) == !blocked
            });
            if closed {
                fixed.push(mask);
            }
        }
        assert_eq!(fixed.len(), 1);
        let mut want: Vec<usize> = (0..n).filter(|&i| fixed[0] >> i & 1 == 1).collect();
        let mut got = besicovitch_select_only(&fam).unwrap().selected;
        want.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, want);
        assert!((0..n).all(|i| got.iter().any(|&j| covers(j, i))));
    }
}

#[test]
fn quasi_metrics_are_refused() {
    let balls = vec![Ball::new(Point::new(vec![0.0, 0.0, 0.0]).unwrap(), 1.0).unwrap()];
    let fam = BallFamily::new(MetricSpec::Koranyi, balls).unwrap();
    assert!(besicovitch_select(&fam).is_err());
}
