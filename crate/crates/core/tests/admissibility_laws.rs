use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treestretch::admissibility::{
    admissibility_profile, admissible, kobayashi_sufficient, schottky_profile, word_length_bound_check, BoundStatus,
    Method, Verdict,
};
use treestretch::bruhat_tits::MatSL2;
use treestretch::gen::{complete_bipartite, random_graph, random_graph_instance, random_point};
use treestretch::graph::{FreeWord, MarkedMetricGraph};
use treestretch::padic::Prime;
use treestretch::rational::{q, qr};
use treestretch::stretch::{Automorphism, MarkedPoint, Representation};

fn p2() -> Prime {
    Prime::new(2).unwrap()
}

fn unit_rose() -> MarkedMetricGraph {
    MarkedMetricGraph::rose(&[q(1), q(1)])
}

fn m(s: &str) -> MatSL2 {
    MatSL2::parse(s, p2()).unwrap()
}

#[test]
fn exact_verdicts() {
    let rose = unit_rose();
    let trivial = Representation::sl2(2, p2(), vec![m("[[1,0],[0,1]]"), m("[[1,0],[0,1]]")]).unwrap();
    let r = admissible(&rose, &trivial).unwrap();
    assert_eq!((r.c_rho, r.admissible), (Some(q(0)), true));

    let rep = Representation::sl2(2, p2(), vec![m("[[2,0],[0,1/2]]"), m("[[1,0],[0,1]]")]).unwrap();
    let r = admissible(&rose, &rep).unwrap();
    assert_eq!(r.c_rho, Some(q(2)));
    assert!(!r.admissible);
    assert_eq!(r.witness.as_deref(), Some("a"));
    assert_eq!(r.method, Method::Exact);

    let r = admissible(&rose, &Representation::identity(&rose)).unwrap();
    assert_eq!(r.c_rho, Some(q(1)));
    assert_eq!(r.verdict, Verdict::NotAdmissible);
}

#[test]
fn kobayashi_examples() {
    let rose3 = unit_rose().scaled(&q(3));
    let rep = Representation::sl2(2, p2(), vec![m("[[2,0],[0,1/2]]"), m("[[1,2],[1/2,2]]")]).unwrap();
    let r = kobayashi_sufficient(&rose3, &rep).unwrap();
    assert_eq!(r.delta, Some(q(3)));
    assert_eq!(r.verdict, Verdict::Admissible);
    assert!(r.kobayashi_margin.unwrap().iter().all(|row| row.target_displacement == q(2)));

    let r = kobayashi_sufficient(&unit_rose(), &rep).unwrap();
    assert_eq!(r.delta, Some(q(1)));
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(!r.admissible);

    let trivial = Representation::sl2(2, p2(), vec![m("[[1,0],[0,1]]"), m("[[1,0],[0,1]]")]).unwrap();
    assert_eq!(kobayashi_sufficient(&unit_rose(), &trivial).unwrap().verdict, Verdict::Admissible);
}

#[test]
fn word_length_examples() {
    let rose = unit_rose();
    let ab3 = FreeWord::from_signed(&[1, 2]).pow(3);
    let rows = word_length_bound_check(&rose, &[FreeWord::gen(0), ab3, FreeWord::identity()]).unwrap();
    let got: Vec<_> = rows.iter().map(|r| (r.f_length, r.bound.clone(), r.status)).collect();
    assert_eq!(
        got,
        [
            (Some(1), q(2), BoundStatus::Holds),
            (Some(6), q(7), BoundStatus::Holds),
            (Some(0), q(1), BoundStatus::Holds),
        ]
    );
}

#[test]
fn profile_examples() {
    let rose = unit_rose();
    let trivial = Representation::sl2(2, p2(), vec![m("[[1,0],[0,1]]"), m("[[1,0],[0,1]]")]).unwrap();
    let prof = admissibility_profile(&rose, &trivial, 5).unwrap();
    let gaps: Vec<_> = prof.shells.iter().map(|s| s.min_gap.clone()).collect();
    assert_eq!(gaps, (1..=5).map(q).collect::<Vec<_>>());

    let halved = Representation::identity(&rose).scaled(&qr(1, 2));
    let prof = admissibility_profile(&rose, &halved, 5).unwrap();
    assert!(prof.shells.iter().all(|s| s.min_gap == qr(s.length as i64, 2)));
    assert_eq!(prof.positive_from, Some(1));
    assert!(prof.nondecreasing);

    let prof = admissibility_profile(&rose, &Representation::identity(&rose), 5).unwrap();
    assert!(prof.shells.iter().all(|s| s.min_gap == q(0)));
    assert_eq!(prof.positive_from, None);
}

#[test]
fn schottky_matrix_mode() {
    let sigma = [m("[[4,0],[0,1/4]]"), m("[[5/4,3/8],[3/2,5/4]]")];
    let rep = Representation::sl2(2, p2(), vec![m("[[2,0],[0,1/2]]"), m("[[1,0],[0,1]]")]).unwrap();
    let g = m("[[1,1/2],[0,1]]");
    let prof = schottky_profile(&sigma, &rep, &g, 3).unwrap();
    assert_eq!(prof.mu_g, 2);
    assert_eq!(prof.shells.len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn soundness_chain(seed in any::<u64>(), rank in 1usize..4, shrink in 0u32..5) {
        let (src, rep) = random_graph_instance(&mut ChaCha8Rng::seed_from_u64(seed), rank, 8);
        let rep = rep.scaled(&qr(1, 1 << (2 * shrink)));
        if kobayashi_sufficient(&src, &rep).unwrap().verdict == Verdict::Admissible {
            prop_assert!(admissible(&src, &rep).unwrap().admissible);
        }
    }

    #[test]
    fn not_both_directions(seed in any::<u64>(), rank in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_point(&mut rng, rank, 3, 6);
        let b = random_point(&mut rng, rank, 3, 6);
        let ab = admissible(&a.graph, &a.representation_to(&b).unwrap()).unwrap();
        let ba = admissible(&b.graph, &b.representation_to(&a).unwrap()).unwrap();
        prop_assert!(!(ab.admissible && ba.admissible));
    }

    #[test]
    fn bipartite_markings_never_admissible(seed in any::<u64>(), wide in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = if wide { complete_bipartite(2, 4) } else { complete_bipartite(2, 3) };
        let rank = g.rank();
        let a = MarkedPoint::with_marking(g.clone(), Automorphism::random(&mut rng, rank, 5)).unwrap();
        let b = MarkedPoint::with_marking(g, Automorphism::random(&mut rng, rank, 5)).unwrap();
        let r = admissible(&a.graph, &a.representation_to(&b).unwrap()).unwrap();
        prop_assert!(r.c_rho.unwrap() >= q(1));
    }

    #[test]
    fn contracted_identity_gap(seed in any::<u64>(), rank in 1usize..3, den in 2i64..6) {
        let src = random_graph(&mut ChaCha8Rng::seed_from_u64(seed), rank, 3, 6);
        let c = qr(1, den);
        let prof = admissibility_profile(&src, &Representation::identity(&src).scaled(&c), 4).unwrap();
        prop_assert_eq!(prof.c_rho.clone(), c.clone());
        for s in &prof.shells {
            prop_assert_eq!(s.min_gap.clone(), (q(1) - &c) * &s.min_source_displacement);
        }
    }
}
