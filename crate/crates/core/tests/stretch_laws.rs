use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treestretch::gen::{random_graph, random_graph_instance, random_matrix, random_point};
use treestretch::padic::Prime;
use treestretch::rational::{parse_rational, q, qr, Q};
use treestretch::stretch::{
    lipschitz_of_pl_map, os_distance, stretch_factor, stretch_oracle, PlMap, Representation, StretchReport,
};

fn instance(seed: u64, rank: usize) -> (treestretch::graph::MarkedMetricGraph, Representation) {
    random_graph_instance(&mut ChaCha8Rng::seed_from_u64(seed), rank, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn oracle_agreement(seed in any::<u64>(), rank in 1usize..4) {
        let (src, rep) = instance(seed, rank);
        let s = stretch_factor(&src, &rep).unwrap();
        let o = stretch_oracle(&src, &rep, 6).unwrap();
        prop_assert_eq!(s.value, o.value);
    }

    #[test]
    fn matrix_targets_agree_with_oracle(seed in any::<u64>(), rank in 1usize..3, p in prop::sample::select(vec![2u64, 3])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Prime::new(p).unwrap();
        let src = random_graph(&mut rng, rank, 3, 6);
        let images = (0..rank).map(|_| random_matrix(&mut rng, p, 3)).collect();
        let rep = Representation::sl2(rank, p, images).unwrap();
        let s = stretch_factor(&src, &rep).unwrap();
        let o = stretch_oracle(&src, &rep, 6).unwrap();
        prop_assert_eq!(s.value, o.value);
    }

    #[test]
    fn pl_maps_bound_the_stretch(seed in any::<u64>(), rank in 1usize..4) {
        let (src, rep) = instance(seed, rank);
        let c = stretch_factor(&src, &rep).unwrap().value;
        let (tgt, _) = rep.target_graph().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..4 {
            let images = (0..src.vertex_count()).map(|_| rng.gen_range(0..tgt.vertex_count())).collect();
            let map = PlMap::with_vertex_images(&src, &rep, images).unwrap();
            prop_assert!(lipschitz_of_pl_map(&src, &rep, &map).unwrap() >= c);
        }
    }

    #[test]
    fn scaling_covariance(seed in any::<u64>(), rank in 1usize..4, num in 1i64..6, den in 1i64..6) {
        let (src, rep) = instance(seed, rank);
        let r = stretch_factor(&src, &rep).unwrap();
        let k = qr(num, den);
        let up = stretch_factor(&src, &rep.scaled(&k)).unwrap();
        let down = stretch_factor(&src.scaled(&k), &rep).unwrap();
        prop_assert_eq!(up.value, &r.value * &k);
        prop_assert_eq!(down.value, &r.value / &k);
        prop_assert_eq!(&up.witness, &r.witness);
        prop_assert_eq!(&down.witness, &r.witness);
    }

    #[test]
    fn distance_axioms(seed in any::<u64>(), rank in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_point(&mut rng, rank, 3, 6);
        let b = random_point(&mut rng, rank, 3, 6);
        let c = random_point(&mut rng, rank, 3, 6);
        let d = |x, y| os_distance(x, y).unwrap().ratio;
        prop_assert_eq!(d(&a, &a), q(1));
        prop_assert!(d(&a, &b) >= q(1));
        prop_assert!(d(&a, &c) <= d(&a, &b) * d(&b, &c));
    }

    #[test]
    fn report_round_trip(seed in any::<u64>(), rank in 1usize..4) {
        let (src, rep) = instance(seed, rank);
        let r: StretchReport = stretch_factor(&src, &rep).unwrap();
        let json: serde_json::Value = serde_json::to_value(&r).unwrap();
        let value = parse_rational(json["value"].as_str().unwrap()).unwrap();
        prop_assert_eq!(value, r.value.clone());
        let rows = json["table"].as_array().unwrap();
        prop_assert_eq!(rows.len(), r.table.len());
        for (row, orig) in rows.iter().zip(&r.table) {
            let ratio: Q = parse_rational(row["ratio"].as_str().unwrap()).unwrap();
            prop_assert_eq!(ratio, orig.ratio.clone());
        }
    }
}

#[test]
fn parallelism_does_not_change_reports() {
    let (src, rep) = instance(99, 3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| (stretch_factor(&src, &rep).unwrap(), stretch_oracle(&src, &rep, 6).unwrap()))
    };
    assert_eq!(run(1), run(4));
}
