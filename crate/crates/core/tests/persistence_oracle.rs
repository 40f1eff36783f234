mod common;

use common::{naive_diagram, random_complex, rng, triples};
use persboot::filtration::{rips_filtration, Direction, Filtration};
use persboot::persistence::{
    compute_persistence, compute_persistence_with, rips_persistence, Algorithm, PersistenceOptions,
};
use persboot::sampling::PointCloud;
use proptest::prelude::*;
use rand::RngExt;

fn random_cloud(seed: u64, n: usize, dim: usize) -> PointCloud {
    let mut r = rng(seed);
    let coords = (0..n * dim).map(|_| r.random::<f64>()).collect();
    PointCloud::new(dim, coords).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// Vertex set of every cell, recovered through boundaries.
fn vertex_sets(f: &Filtration) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(f.len());
    for c in f.cells() {
        let mut vs: Vec<usize> = if c.dim == 0 {
            vec![c.id]
        } else {
            c.boundary.iter().flat_map(|&b| sets[b].clone()).collect()
        };
        vs.sort_unstable();
        vs.dedup();
        sets.push(vs);
    }
    sets
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reductions_match_naive_oracle(seed in any::<u64>(), superlevel in any::<bool>()) {
        let direction = if superlevel { Direction::Superlevel } else { Direction::Sublevel };
        let cells = random_complex(&mut rng(seed), 30, direction);
        let expected = naive_diagram(&cells, direction);
        let filt = Filtration::from_cells(direction, cells).unwrap();
        for algorithm in [Algorithm::Twist, Algorithm::Cohomology] {
            let d = compute_persistence_with(&filt, PersistenceOptions { algorithm, bound: None }).unwrap();
            prop_assert_eq!(triples(&d), expected.clone());
        }
    }

    #[test]
    fn rips_h0_matches_union_find(seed in any::<u64>(), n in 1usize..25, max_radius in 0.05f64..1.5) {
        let cloud = random_cloud(seed, n, 2);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = dist(cloud.point(i), cloud.point(j));
                if d <= max_radius {
                    edges.push((d, i, j));
                }
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut expected = Vec::new();
        let mut components = n;
        for (d, i, j) in edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
                components -= 1;
                if d > 0.0 {
                    expected.push(d);
                }
            }
        }
        expected.extend(std::iter::repeat_n(max_radius, components));
        expected.sort_by(f64::total_cmp);

        let diag = rips_persistence(&cloud, 1, max_radius).unwrap().restrict(0);
        let mut got: Vec<f64> = diag.points.iter().map(|p| {
            assert_eq!(p.birth, 0.0);
            p.death
        }).collect();
        got.sort_by(f64::total_cmp);
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn rips_contains_exactly_the_short_simplices(seed in any::<u64>(), n in 1usize..12, max_radius in 0.1f64..1.5) {
        let cloud = random_cloud(seed, n, 3);
        let filt = rips_filtration(&cloud, 2, max_radius).unwrap();
        filt.validate().unwrap();
        let sets = vertex_sets(&filt);
        let diameter = |vs: &[usize]| {
            let mut m = 0.0f64;
            for (a, &i) in vs.iter().enumerate() {
                for &j in &vs[a + 1..] {
                    m = m.max(dist(cloud.point(i), cloud.point(j)));
                }
            }
            m
        };
        let mut expected = Vec::new();
        for i in 0..n {
            expected.push(vec![i]);
            for j in i + 1..n {
                expected.push(vec![i, j]);
                for k in j + 1..n {
                    expected.push(vec![i, j, k]);
                }
            }
        }
        expected.retain(|vs| diameter(vs) <= max_radius);
        expected.sort();
        for (c, vs) in filt.cells().zip(&sets) {
            prop_assert_eq!(vs.len(), c.dim + 1);
            prop_assert_eq!(c.value, diameter(vs));
        }
        let mut got = sets.clone();
        got.sort();
        prop_assert_eq!(got, expected);
    }
}

#[test]
fn twist_and_cohomology_agree_on_rips() {
    for seed in 0..20 {
        let cloud = random_cloud(seed, 30, 2);
        let filt = rips_filtration(&cloud, 2, 0.6).unwrap();
        let a = compute_persistence_with(
            &filt,
            PersistenceOptions {
                algorithm: Algorithm::Twist,
                bound: Some(0.6),
            },
        );
        let b = compute_persistence_with(
            &filt,
            PersistenceOptions {
                algorithm: Algorithm::Cohomology,
                bound: Some(0.6),
            },
        );
        assert_eq!(triples(&a.unwrap()), triples(&b.unwrap()));
    }
}

#[test]
fn default_bound_is_largest_value() {
    let cells = random_complex(&mut rng(3), 30, Direction::Sublevel);
    let max = cells.iter().map(|c| c.value).fold(0.0, f64::max);
    let d =
        compute_persistence(&Filtration::from_cells(Direction::Sublevel, cells).unwrap()).unwrap();
    assert_eq!(d.bound, max);
}

#[test]
fn random_complexes_reach_higher_homology() {
    let mut counts = [0usize; 3];
    for seed in 0..500 {
        for direction in [Direction::Sublevel, Direction::Superlevel] {
            for (dim, _, _) in
                naive_diagram(&random_complex(&mut rng(seed), 30, direction), direction)
            {
                counts[dim] += 1;
            }
        }
    }
    assert!(counts.iter().all(|&c| c > 20), "{counts:?}");
}
