mod oracles;

use std::collections::BTreeMap;

use corpus_lens::topics::{ctfidf_terms, hdbscan_rows, mutual_reachability_mst, HdbscanParams};
use oracles::{brute_mst_weights, gaussian_blobs, three_centers};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(mcs: usize) -> HdbscanParams {
    HdbscanParams { min_cluster_size: mcs, min_samples: mcs }
}

#[test]
fn mst_weights_match_brute_force_prim() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for inst in 0..40 {
        let n = rng.random_range(2..=200);
        let dim = rng.random_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| if inst % 2 == 0 { rng.random_range(-1.0..1.0) } else { rng.random_range(0..4) as f64 })
                    .collect()
            })
            .collect();
        let ms = rng.random_range(1..=10);
        let got = mutual_reachability_mst(&rows, ms);
        assert_eq!(got.len(), n - 1);
        let mut w: Vec<f64> = got.iter().map(|e| e.weight).collect();
        w.sort_by(f64::total_cmp);
        assert_eq!(w, brute_mst_weights(&rows, ms), "instance {inst}, n {n}");
        let total: f64 = w.iter().sum();
        let want: f64 = brute_mst_weights(&rows, ms).iter().sum();
        assert_eq!(total, want);
    }
}

#[test]
fn three_blobs_give_three_clusters() {
    for seed in 0..10 {
        let (rows, truth) = gaussian_blobs(seed, &three_centers(8), 100, 0.05);
        let r = hdbscan_rows(&rows, params(15)).unwrap();
        assert_eq!(r.k, 3, "seed {seed}");
        assert!(r.noise_fraction() <= 0.05, "seed {seed}: noise {}", r.noise_fraction());
        // each cluster is pure
        let mut map: BTreeMap<i64, usize> = BTreeMap::new();
        for (l, t) in r.labels.iter().zip(&truth) {
            if *l >= 0 {
                assert_eq!(*map.entry(*l).or_insert(*t), *t);
            }
        }
    }
}

#[test]
fn permutation_keeps_the_partition() {
    let (rows, _) = gaussian_blobs(3, &three_centers(4), 40, 0.1);
    let base = hdbscan_rows(&rows, params(10)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..3 {
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        perm.shuffle(&mut rng);
        let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let r = hdbscan_rows(&shuffled, params(10)).unwrap();
        assert_eq!(r.k, base.k);
        // same partition: labels correspond one-to-one
        let mut fwd: BTreeMap<i64, i64> = BTreeMap::new();
        for (pos, &i) in perm.iter().enumerate() {
            let (a, b) = (base.labels[i], r.labels[pos]);
            assert_eq!(a < 0, b < 0);
            assert_eq!(*fwd.entry(a).or_insert(b), b);
        }
    }
}

#[test]
fn raising_min_cluster_size_never_adds_clusters() {
    let centers = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.2, 1.2]];
    let (rows, _) = gaussian_blobs(21, &centers, 40, 0.12);
    let mut prev = usize::MAX;
    for mcs in 2..=60 {
        let k = hdbscan_rows(&rows, params(mcs)).unwrap().k;
        assert!(k <= prev, "mcs {mcs}: {k} > {prev}");
        prev = k;
    }
}

#[test]
fn ctfidf_hand_computation() {
    // c0: "lock lock road", "stolen road"    c1: "trail trail road", "river road"
    let toks = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    let clusters = vec![
        vec![toks("lock lock road"), toks("stolen road")],
        vec![toks("trail trail road"), toks("river road")],
    ];
    // 10 tokens over 2 clusters: A = 5; road has tf 4 overall, lock 2
    let t = ctfidf_terms(&clusters, 10);
    let w: BTreeMap<&str, f64> = t[0].iter().map(|x| (x.term.as_str(), x.weight)).collect();
    assert_eq!(w["lock"], 2.0 * (1.0f64 + 5.0 / 2.0).ln());
    assert_eq!(w["road"], 2.0 * (1.0f64 + 5.0 / 4.0).ln());
    assert_eq!(w["stolen"], (1.0f64 + 5.0).ln());
    // equal in-cluster count, but the exclusive term outranks the shared one
    assert_eq!(t[0][0].term, "lock");
    assert!(w["lock"] > w["road"]);
    assert_eq!(t[1][0].term, "trail");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn labels_stay_in_range(seed in 0u64..1000, n in 10usize..80, mcs in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let r = hdbscan_rows(&rows, params(mcs)).unwrap();
        prop_assert!(r.labels.iter().all(|&l| l >= -1 && l < r.k as i64));
        prop_assert!(r.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn ctfidf_weights_nonnegative(docs in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 0..6), 1..8)) {
        let clusters: Vec<Vec<Vec<String>>> = docs.chunks(2).map(|c| c.to_vec()).collect();
        let t = ctfidf_terms(&clusters, 100);
        for (c, terms) in t.iter().enumerate() {
            for w in terms {
                prop_assert!(w.weight > 0.0);
                prop_assert!(clusters[c].iter().flatten().any(|x| *x == w.term));
            }
            prop_assert!(terms.windows(2).all(|p| p[0].weight >= p[1].weight));
        }
    }
}
