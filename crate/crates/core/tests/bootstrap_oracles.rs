mod common;

use common::{random_diagram, rng};
use persboot::bootstrap::{
    diagram_confidence, kde_bootstrap, landscape_band, landscape_band_from_landscapes,
    quantile_upper, replicate_mean,
};
use persboot::density::{Grid, Kernel};
use persboot::filtration::Direction;
use persboot::landscape::{diagram_to_landscape, landscape_sup_diff, Landscape};
use persboot::persistence::{Diagram, DiagramPoint};
use persboot::sampling::{PointCloud, Seed};
use proptest::prelude::*;
use rand::RngExt;

fn draws(seed: Seed, j: u64, n: usize) -> Vec<usize> {
    let mut r = seed.stream(j);
    (0..n).map(|_| r.random_range(0..n)).collect()
}

#[test]
fn micro_diagram_confidence_by_hand() {
    let xs = [0.0, 0.5, 1.7];
    let cloud = PointCloud::new(1, xs.to_vec()).unwrap();
    let grid = Grid::new(vec![-1.0], vec![3.0], vec![4]).unwrap();
    let h = 0.5;
    let seed = Seed::new(11);
    let (diag, summary) =
        diagram_confidence(&cloud, &grid, Kernel::Gaussian, h, 4, 0.5, seed).unwrap();

    let k = |x: f64, xi: f64| {
        (-0.5 * ((x - xi) / h).powi(2)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * h)
    };
    let vertices = [-1.0, 0.0, 1.0, 2.0, 3.0];
    let p: Vec<f64> = vertices
        .iter()
        .map(|&x| xs.iter().map(|&xi| k(x, xi)).sum::<f64>() / 3.0)
        .collect();
    let mut theta = Vec::new();
    for j in 1..=4 {
        let idx = draws(seed, j, 3);
        let sup = vertices
            .iter()
            .zip(&p)
            .map(|(&x, &pv)| {
                let star = idx.iter().map(|&i| k(x, xs[i])).sum::<f64>() / 3.0;
                (star - pv).abs()
            })
            .fold(0.0, f64::max);
        theta.push(3f64.sqrt() * sup);
    }
    for (got, want) in summary.replicates.iter().zip(&theta) {
        assert!((got - want).abs() <= 1e-14, "{got} vs {want}");
    }
    let mut sorted = theta.clone();
    sorted.sort_by(f64::total_cmp);
    // ⌈4 · (1 − 0.5)⌉ = 2
    assert!((summary.q_alpha - sorted[2]).abs() <= 1e-14);
    assert!((summary.radius - sorted[2] / 3f64.sqrt()).abs() <= 1e-14);
    assert_eq!(diag.direction, Direction::Superlevel);
    assert_eq!(diag.restrict(0).len(), 1);
}

#[test]
fn two_landscape_band_by_enumeration() {
    let d1 = Diagram::new(
        vec![DiagramPoint::new(0.0, 2.0, 1)],
        Direction::Sublevel,
        4.0,
    )
    .unwrap();
    let d2 = Diagram::new(
        vec![DiagramPoint::new(1.0, 4.0, 1)],
        Direction::Sublevel,
        4.0,
    )
    .unwrap();
    let seed = Seed::new(5);
    let bands = landscape_band(&[d1, d2], 1, 8, 0.05, seed).unwrap();
    let (band, summary) = &bands[0];

    // sup |L1 − L2| = 1.5 at z = 2.5, so the draws (2,0) and (0,2) give
    // √2 · 0.75 and (1,1) gives 0.
    let off = 2f64.sqrt() * 0.75;
    let mut seen = [false; 2];
    for (j, &got) in (1..=8).zip(&summary.replicates) {
        let idx = draws(seed, j, 2);
        let want = if idx[0] == idx[1] {
            seen[0] = true;
            off
        } else {
            seen[1] = true;
            0.0
        };
        assert!(
            (got - want).abs() <= 1e-12,
            "replicate {j}: {got} vs {want}"
        );
    }
    assert!(
        seen[0] && seen[1],
        "seed should exercise both kinds of draw"
    );
    assert!((summary.q_alpha - off).abs() <= 1e-12);
    assert!((band.center.eval(2.5) - 0.75).abs() <= 1e-15);
}

#[test]
fn identical_diagrams_give_zero_radius() {
    let d = random_diagram(&mut rng(1), 6, Direction::Sublevel, 3.0);
    let bands = landscape_band(&vec![d; 10], 3, 200, 0.05, Seed::new(0)).unwrap();
    for (band, s) in bands {
        assert_eq!(band.radius, 0.0);
        assert!(s.replicates.iter().all(|&t| t == 0.0));
    }
}

#[test]
fn single_replicate() {
    let ls: Vec<Landscape> = (0..5)
        .map(|i| {
            diagram_to_landscape(&random_diagram(&mut rng(i), 4, Direction::Sublevel, 2.0), 1)
                .unwrap()
        })
        .collect();
    let (band, s) = &landscape_band_from_landscapes(&ls, 1, 1, 0.05, Seed::new(2)).unwrap()[0];
    assert_eq!(s.replicates.len(), 1);
    assert_eq!(s.q_alpha, s.replicates[0]);
    assert_eq!(band.radius, s.radius);
}

#[test]
fn replicates_match_literal_resample_means() {
    let ls: Vec<Landscape> = (0..12)
        .map(|i| {
            diagram_to_landscape(
                &random_diagram(&mut rng(100 + i), 5, Direction::Sublevel, 3.0),
                2,
            )
            .unwrap()
        })
        .collect();
    let seed = Seed::new(8);
    let bands = landscape_band_from_landscapes(&ls, 2, 30, 0.1, seed).unwrap();
    for (k, (band, s)) in bands.iter().enumerate() {
        for (j, &theta) in (1..=30u64).zip(&s.replicates) {
            let mut counts = vec![0u32; 12];
            for i in draws(seed, j, 12) {
                counts[i] += 1;
            }
            let mean = replicate_mean(&ls, k + 1, &counts);
            let literal = 12f64.sqrt() * landscape_sup_diff(&mean, &band.center);
            assert!((theta - literal).abs() <= 1e-12);
        }
    }
}

#[test]
fn band_scales_exactly() {
    let ls: Vec<Landscape> = (0..20)
        .map(|i| {
            diagram_to_landscape(
                &random_diagram(&mut rng(200 + i), 6, Direction::Sublevel, 3.0),
                3,
            )
            .unwrap()
        })
        .collect();
    let base = landscape_band_from_landscapes(&ls, 3, 100, 0.05, Seed::new(4)).unwrap();
    for s in [2.0, 0.5] {
        let scaled: Vec<Landscape> = ls.iter().map(|l| l.scaled(s)).collect();
        let got = landscape_band_from_landscapes(&scaled, 3, 100, 0.05, Seed::new(4)).unwrap();
        for ((b0, s0), (b1, s1)) in base.iter().zip(&got) {
            assert_eq!(b1.center, b0.center.scaled(s));
            assert_eq!(b1.radius, s * b0.radius);
            assert_eq!(s1.q_alpha, s * s0.q_alpha);
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let diags: Vec<Diagram> = (0..15)
        .map(|i| random_diagram(&mut rng(i), 8, Direction::Sublevel, 2.0))
        .collect();
    let cloud =
        PointCloud::new(2, (0..60).map(|i| ((i * 37) % 11) as f64 / 11.0).collect()).unwrap();
    let grid = Grid::cube(2, -0.5, 1.5, 12).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (
                landscape_band(&diags, 2, 300, 0.05, Seed::new(3)).unwrap(),
                kde_bootstrap(&cloud, &grid, Kernel::Gaussian, 0.3, 50, 0.05, Seed::new(3))
                    .unwrap(),
            )
        })
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
}

proptest! {
    #[test]
    fn quantile_is_monotone_in_alpha(reps in prop::collection::vec(0.0f64..10.0, 1..200), a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantile_upper(&reps, lo).unwrap() >= quantile_upper(&reps, hi).unwrap());
    }

    #[test]
    fn quantile_meets_tail_bound(reps in prop::collection::vec(0.0f64..10.0, 1..200), alpha in 0.001f64..0.999) {
        let q = quantile_upper(&reps, alpha).unwrap();
        let above = reps.iter().filter(|&&t| t > q).count() as f64;
        prop_assert!(above / reps.len() as f64 <= alpha);
        prop_assert!(reps.contains(&q));
    }
}
