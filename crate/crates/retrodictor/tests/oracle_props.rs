//! Property suites: every closed form against the brute-force oracle, the
//! oracle against itself (chain rule, Bayes symmetry, marginal identity),
//! and the structural invariants of generated instances.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use retrodictor::qla::{
    rotate_fixing_axis, DensityOperator, Ket, ProjectiveDecomposition, Projector,
};
use retrodictor::random::{random_density, random_fine_pvm, random_ket, random_partition};
use retrodictor::retrodict::{
    abl_coarse, abl_fine, classical_retrodict, corrected_bayes, corrected_marginal,
    margenau_discrepancy, naive_bayes, naive_marginal, oracle_conditional, ClassicalModel,
    RetrodictionQuery,
};
use retrodictor::sequence::{
    joint_distribution, luders_update, EventAtom, MeasurementPlan, OutcomeSequence,
};
use retrodictor::tol;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A state diagonal in the given fine basis, so that it commutes with the
/// slot-1 observation.
fn diagonal_state(rng: &mut ChaCha8Rng, pvm: &ProjectiveDecomposition) -> DensityOperator {
    let dim = pvm.dim();
    let mut weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let parts: Vec<(f64, DensityOperator)> = pvm
        .blocks()
        .iter()
        .zip(weights)
        .map(|((_, p), w)| {
            (
                w,
                DensityOperator::from_ket(&p.to_ket().expect("fine block")),
            )
        })
        .collect();
    DensityOperator::mixture(&parts).expect("convex mixture")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Chain rule: every two-slot joint entry is the product of its branch
    /// probabilities reconstructed directly from the update rule.
    #[test]
    fn chain_rule_reconstructs_the_joint_table(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = rng_for(seed);
        let rho = random_density(&mut rng, dim);
        let p = random_fine_pvm(&mut rng, dim);
        let q = random_fine_pvm(&mut rng, dim);
        let plan = MeasurementPlan::new(dim, vec![p.clone(), q.clone()]).unwrap();
        let dist = joint_distribution(&rho, &plan).unwrap();
        for (p_label, p_block) in p.blocks() {
            let first = luders_update(&rho, p_block).unwrap();
            for (q_label, q_block) in q.blocks() {
                let expected = match &first.post {
                    None => 0.0,
                    Some(post) => {
                        first.probability * luders_update(post, q_block).unwrap().probability
                    }
                };
                let entry = dist
                    .probability(&OutcomeSequence::new(vec![p_label.clone(), q_label.clone()]))
                    .unwrap();
                prop_assert!((entry - expected).abs() <= tol::REARRANGED_SUM,
                    "entry {entry} vs chained {expected}");
            }
        }
    }

    /// Bayes symmetry at the oracle level:
    /// Pr(p|q) Pr(q) = Pr(q|p) Pr(p) whenever both conditionals exist.
    #[test]
    fn bayes_symmetry_holds_on_the_joint_table(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = rng_for(seed);
        let rho = random_density(&mut rng, dim);
        let p = random_fine_pvm(&mut rng, dim);
        let q = random_fine_pvm(&mut rng, dim);
        let plan = MeasurementPlan::new(dim, vec![p.clone(), q.clone()]).unwrap();
        let dist = joint_distribution(&rho, &plan).unwrap();
        for (p_label, _) in p.blocks() {
            for (q_label, _) in q.blocks() {
                let p_atom = [EventAtom::new(1, p_label.clone())];
                let q_atom = [EventAtom::new(2, q_label.clone())];
                let fwd = dist.conditional(&q_atom, &p_atom).unwrap();
                let bwd = dist.conditional(&p_atom, &q_atom).unwrap();
                if let (Some(fwd), Some(bwd)) = (fwd.defined(), bwd.defined()) {
                    let p_prob = dist.event_probability(&p_atom).unwrap();
                    let q_prob = dist.event_probability(&q_atom).unwrap();
                    prop_assert!((fwd * p_prob - bwd * q_prob).abs() <= tol::ORACLE_MATCH);
                }
            }
        }
    }

    /// Marginal identity: the event-query engine and the literal sum over
    /// slot-1 outcomes walk the same entries in the same order.
    #[test]
    fn marginal_query_is_exactly_the_row_sum(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = rng_for(seed);
        let rho = random_density(&mut rng, dim);
        let p = random_fine_pvm(&mut rng, dim);
        let q = random_fine_pvm(&mut rng, dim);
        let plan = MeasurementPlan::new(dim, vec![p.clone(), q.clone()]).unwrap();
        let dist = joint_distribution(&rho, &plan).unwrap();
        let q_label = q.blocks()[0].0.clone();
        let via_query = dist
            .event_probability(&[EventAtom::new(2, q_label.clone())])
            .unwrap();
        let mut via_sum = 0.0;
        for (outcome, prob) in dist.iter() {
            if outcome.labels()[1] == q_label {
                via_sum += prob;
            }
        }
        prop_assert_eq!(via_query, via_sum);
    }

    /// Classical embedding: a state diagonal in the slot-1 basis makes the
    /// post-selection marginal equal the unmeasured Born weight. This is
    /// the one family where the naive marginal's label happens to be right.
    #[test]
    fn commuting_states_hide_the_intervening_observation(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = rng_for(seed);
        let p = random_fine_pvm(&mut rng, dim);
        let rho = diagonal_state(&mut rng, &p);
        let q = random_ket(&mut rng, dim);
        let marginal = corrected_marginal(&rho, &p, &q).unwrap();
        let born = rho.born_weight(&q).unwrap();
        prop_assert!((marginal - born).abs() <= tol::ORACLE_MATCH);

        // And the naive pair agrees with the correct pair here.
        let query =
            RetrodictionQuery::new(rho.clone(), p.clone(), q.clone(), p.blocks()[0].0.clone())
                .unwrap();
        let naive = naive_bayes(&query).unwrap();
        let fine = abl_fine(&query).unwrap();
        match (naive.defined(), fine.defined()) {
            (Some(n), Some(f)) => prop_assert!((n - f).abs() <= tol::ORACLE_MATCH),
            (n, f) => prop_assert_eq!(n.is_none(), f.is_none()),
        }
    }

    /// Any completion of the post-selection ket yields the same
    /// conditional: only the selected branch is ever read.
    #[test]
    fn completion_choice_does_not_change_the_conditional(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = rng_for(seed);
        let rho = random_density(&mut rng, dim);
        let p = random_fine_pvm(&mut rng, dim);
        let q_basis = random_fine_pvm(&mut rng, dim);
        let q_label = q_basis.blocks()[0].0.clone();
        let q = q_basis.blocks()[0].1.to_ket().unwrap();

        let two_block = ProjectiveDecomposition::completion(&q, "q").unwrap();
        let plan_two = MeasurementPlan::new(dim, vec![p.clone(), two_block]).unwrap();
        let plan_full = MeasurementPlan::new(dim, vec![p.clone(), q_basis.clone()]).unwrap();
        let dist_two = joint_distribution(&rho, &plan_two).unwrap();
        let dist_full = joint_distribution(&rho, &plan_full).unwrap();

        for (p_label, _) in p.blocks() {
            let target = [EventAtom::new(1, p_label.clone())];
            let a = dist_two
                .conditional(&target, &[EventAtom::new(2, "q")])
                .unwrap();
            let b = dist_full
                .conditional(&target, &[EventAtom::new(2, q_label.clone())])
                .unwrap();
            match (a.defined(), b.defined()) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= tol::ORACLE_MATCH),
                (a, b) => prop_assert_eq!(a.is_none(), b.is_none()),
            }
        }
    }

    /// The rotation keeps the fixed block bit for bit and returns a valid
    /// fine decomposition (validated on construction).
    #[test]
    fn rotation_preserves_the_fixed_block(seed in any::<u64>(), dim in 3usize..=6) {
        let mut rng = rng_for(seed);
        let p = random_fine_pvm(&mut rng, dim);
        let k = dim - 1;
        let angles: Vec<f64> = (0..k * (k - 1) / 2)
            .map(|_| rng.gen_range(-3.0..3.0))
            .collect();
        let fixed = p.blocks()[rng.gen_range(0..dim)].0.clone();
        let rotated = rotate_fixing_axis(&p, &fixed, &angles).unwrap();
        prop_assert!(rotated.is_fine());
        prop_assert_eq!(rotated.block(&fixed), p.block(&fixed));
    }

    /// Rank-1 extraction and projector construction are mutually inverse
    /// up to rounding.
    #[test]
    fn projector_ket_round_trip(seed in any::<u64>(), dim in 1usize..=8) {
        let mut rng = rng_for(seed);
        let v = random_ket(&mut rng, dim);
        let p = Projector::from_ket(&v);
        prop_assert_eq!(p.rank(), 1);
        prop_assert!((p.matrix().trace().re - 1.0).abs() <= tol::STRUCTURAL);
        let w = p.to_ket().unwrap();
        let rebuilt = Projector::from_ket(&w);
        prop_assert!(rebuilt.matrix().sub(p.matrix()).unwrap().max_norm() < 1e-13);
    }
}

/// The master equivalence property over a deterministic corpus: on 200
/// fine and coarse instances across dimensions 2 through 6, each closed
/// form matches the brute-force conditional whenever defined, is undefined
/// exactly when the oracle conditioning probability vanishes, and sums to
/// one over targets.
#[test]
fn closed_forms_match_the_oracle_on_two_hundred_instances() {
    let mut rng = rng_for(0xabcd_0001);
    for trial in 0..200 {
        let dim = 2 + trial % 5;
        let rho = if trial % 3 == 0 {
            DensityOperator::from_ket(&random_ket(&mut rng, dim))
        } else {
            random_density(&mut rng, dim)
        };
        let p = random_fine_pvm(&mut rng, dim);
        let q = random_ket(&mut rng, dim);

        let mut sum = 0.0;
        let mut all_defined = true;
        for (label, _) in p.blocks() {
            let query =
                RetrodictionQuery::new(rho.clone(), p.clone(), q.clone(), label.clone()).unwrap();
            let fine = abl_fine(&query).unwrap();
            let corrected = corrected_bayes(&query).unwrap();
            let oracle = oracle_conditional(&query).unwrap();
            assert_eq!(fine.is_defined(), oracle.is_defined(), "trial {trial}");
            assert_eq!(corrected.is_defined(), oracle.is_defined(), "trial {trial}");
            if let (Some(f), Some(c), Some(o)) =
                (fine.defined(), corrected.defined(), oracle.defined())
            {
                assert!(
                    (f - o).abs() <= tol::ORACLE_MATCH,
                    "trial {trial}: {f} vs {o}"
                );
                assert!(
                    (c - o).abs() <= tol::ORACLE_MATCH,
                    "trial {trial}: {c} vs {o}"
                );
                sum += f;
            } else {
                all_defined = false;
            }
        }
        if all_defined {
            assert!(
                (sum - 1.0).abs() <= tol::ORACLE_MATCH,
                "trial {trial}: sum {sum}"
            );
        }

        // Coarse observation over a random partition of the same basis.
        let labels: Vec<String> = p.labels().map(str::to_string).collect();
        let groups = random_partition(&mut rng, &labels, 2);
        let coarse = p.coarsen(&groups).unwrap();
        for (label, _) in coarse.blocks() {
            let query =
                RetrodictionQuery::new(rho.clone(), coarse.clone(), q.clone(), label.clone())
                    .unwrap();
            let value = abl_coarse(&query).unwrap();
            let corrected = corrected_bayes(&query).unwrap();
            let oracle = oracle_conditional(&query).unwrap();
            assert_eq!(value.is_defined(), oracle.is_defined(), "trial {trial}");
            if let (Some(v), Some(c), Some(o)) =
                (value.defined(), corrected.defined(), oracle.defined())
            {
                assert!(
                    (v - o).abs() <= tol::ORACLE_MATCH,
                    "trial {trial}: {v} vs {o}"
                );
                assert!(
                    (c - o).abs() <= tol::ORACLE_MATCH,
                    "trial {trial}: {c} vs {o}"
                );
            }
        }
    }
}

/// Error cancellation, both directions, on a deterministic corpus: where
/// the marginal gap is negligible the naive and correct formulas agree;
/// where it exceeds the non-commuting threshold they must part ways at the
/// heaviest target.
#[test]
fn naive_bayes_fails_exactly_with_the_naive_marginal() {
    let mut rng = rng_for(0xabcd_0002);
    let mut noncommuting = 0;
    for trial in 0..200 {
        let dim = 2 + trial % 5;
        let rho = random_density(&mut rng, dim);
        let p = random_fine_pvm(&mut rng, dim);
        let q = random_ket(&mut rng, dim);

        let marginal = naive_marginal(&rho, &p, &q).unwrap();
        let born = rho.born_weight(&q).unwrap();
        let gap = (marginal - born).abs();

        let values: Vec<(String, f64)> = p
            .blocks()
            .iter()
            .filter_map(|(label, _)| {
                let query =
                    RetrodictionQuery::new(rho.clone(), p.clone(), q.clone(), label.clone())
                        .unwrap();
                abl_fine(&query)
                    .unwrap()
                    .defined()
                    .map(|v| (label.clone(), v))
            })
            .collect();
        let heaviest = values
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
        let Some((label, abl_value)) = heaviest else {
            continue;
        };
        let query =
            RetrodictionQuery::new(rho.clone(), p.clone(), q.clone(), label.clone()).unwrap();
        let naive = naive_bayes(&query).unwrap();

        if gap > tol::NONCOMMUTING_GAP {
            noncommuting += 1;
            let disagrees = match naive.defined() {
                None => true,
                Some(n) => (n - abl_value).abs() > tol::ORACLE_MATCH,
            };
            assert!(
                disagrees,
                "trial {trial}: naive agrees despite marginal gap {gap:.3e}"
            );
        } else if gap <= tol::ORACLE_MATCH {
            if let Some(n) = naive.defined() {
                assert!(
                    (n - abl_value).abs() <= tol::ORACLE_MATCH,
                    "trial {trial}: naive {n} vs abl {abl_value} despite marginal agreement"
                );
            }
        }
    }
    // Haar-random instances are almost surely non-commuting; the corpus
    // must actually exercise the failing branch.
    assert!(
        noncommuting > 150,
        "only {noncommuting} non-commuting instances"
    );
}

/// The two marginal routes are the same sum and stay within rounding of
/// each other, while both leave the unmeasured Born weight behind on
/// non-commuting instances.
#[test]
fn dropping_the_observation_changes_the_event_not_the_sum() {
    let mut rng = rng_for(0xabcd_0003);
    let mut witnessed = 0;
    for trial in 0..200 {
        let dim = 2 + trial % 5;
        let rho = DensityOperator::from_ket(&random_ket(&mut rng, dim));
        let p = random_fine_pvm(&mut rng, dim);
        let q = random_ket(&mut rng, dim);

        let literal = naive_marginal(&rho, &p, &q).unwrap();
        let tabulated = corrected_marginal(&rho, &p, &q).unwrap();
        assert!(
            (literal - tabulated).abs() <= tol::REARRANGED_SUM,
            "trial {trial}: {literal} vs {tabulated}"
        );

        let report = margenau_discrepancy(&rho, &p, &q).unwrap();
        assert!((report.correct_value - report.oracle_value).abs() <= tol::ORACLE_MATCH);
        if report.gap.unwrap() > tol::NONCOMMUTING_GAP {
            witnessed += 1;
        }
    }
    assert!(
        witnessed > 150,
        "only {witnessed} instances with a visible gap"
    );
}

/// Pure dimension-3 states off the slot-1 basis leave a visible marginal
/// gap for at least one outcome of any second basis.
#[test]
fn margenau_gap_is_generic_in_dimension_three() {
    let mut rng = rng_for(0xabcd_0004);
    for trial in 0..200 {
        let psi = random_ket(&mut rng, 3);
        let rho = DensityOperator::from_ket(&psi);
        let p = random_fine_pvm(&mut rng, 3);
        let q_basis = random_fine_pvm(&mut rng, 3);

        // Skip the measure-zero family where psi sits in the slot-1 basis.
        let aligned = p.blocks().iter().any(|(_, block)| {
            let b = block.to_ket().unwrap();
            (b.inner(&psi).unwrap().norm() - 1.0).abs() < 1e-6
        });
        if aligned {
            continue;
        }
        let max_gap = q_basis
            .blocks()
            .iter()
            .map(|(_, block)| {
                let q = block.to_ket().unwrap();
                margenau_discrepancy(&rho, &p, &q).unwrap().gap.unwrap()
            })
            .fold(0.0, f64::max);
        assert!(
            max_gap > tol::NONCOMMUTING_GAP,
            "trial {trial}: max gap {max_gap:.3e}"
        );
    }
}

/// The classical bridge: the retrodiction formula on the extracted model
/// reproduces the quantum fine-grained formula to near machine precision.
#[test]
fn classical_bridge_holds_on_every_instance() {
    let mut rng = rng_for(0xabcd_0005);
    for trial in 0..200 {
        let dim = 2 + trial % 5;
        let rho = random_density(&mut rng, dim);
        let p = random_fine_pvm(&mut rng, dim);
        let q_basis = random_fine_pvm(&mut rng, dim);
        let model = ClassicalModel::from_quantum(&rho, &p, &q_basis).unwrap();
        let (q_label, q_block) = &q_basis.blocks()[trial % dim];
        let q = q_block.to_ket().unwrap();
        for (label, _) in p.blocks() {
            let classical = classical_retrodict(&model, q_label, label).unwrap();
            let query =
                RetrodictionQuery::new(rho.clone(), p.clone(), q.clone(), label.clone()).unwrap();
            let quantum = abl_fine(&query).unwrap();
            match (classical.defined(), quantum.defined()) {
                (Some(c), Some(f)) => assert!(
                    (c - f).abs() <= tol::CLASSICAL_BRIDGE,
                    "trial {trial}: {c} vs {f}"
                ),
                (c, f) => assert_eq!(c.is_none(), f.is_none(), "trial {trial}"),
            }
        }
    }
}

/// Plans with the same observations in opposite orders induce different
/// joint tables: sequencing is not symmetric.
#[test]
fn plan_order_is_observable() {
    let s = 1.0 / 2.0_f64.sqrt();
    let y = ProjectiveDecomposition::from_labeled_kets(vec![
        (
            "y+".into(),
            Ket::new(vec![s.into(), num_complex::Complex64::new(0.0, s)]).unwrap(),
        ),
        (
            "y-".into(),
            Ket::new(vec![s.into(), num_complex::Complex64::new(0.0, -s)]).unwrap(),
        ),
    ])
    .unwrap();
    let z = ProjectiveDecomposition::from_labeled_kets(vec![
        ("z+".into(), Ket::basis_vector(2, 0).unwrap()),
        ("z-".into(), Ket::basis_vector(2, 1).unwrap()),
    ])
    .unwrap();
    let rho = DensityOperator::from_ket(&Ket::basis_vector(2, 0).unwrap());
    let forward = joint_distribution(
        &rho,
        &MeasurementPlan::new(2, vec![y.clone(), z.clone()]).unwrap(),
    )
    .unwrap();
    let reverse = joint_distribution(&rho, &MeasurementPlan::new(2, vec![z, y]).unwrap()).unwrap();
    let fwd = forward
        .probability(&OutcomeSequence::new(vec!["y+".into(), "z-".into()]))
        .unwrap();
    let rev = reverse
        .probability(&OutcomeSequence::new(vec!["z-".into(), "y+".into()]))
        .unwrap();
    assert!(
        (fwd - rev).abs() > 0.2,
        "joint tables coincide: {fwd} vs {rev}"
    );
}

mod record_round_trip {
    use proptest::prelude::*;
    use retrodictor::scenario::{QueryKind, QuerySpec, ResultRecord};

    fn kinds() -> impl Strategy<Value = QueryKind> {
        prop_oneof![
            Just(QueryKind::Abl),
            Just(QueryKind::Naive),
            Just(QueryKind::Corrected),
            Just(QueryKind::Oracle),
            Just(QueryKind::Discrepancy),
            Just(QueryKind::Classical),
        ]
    }

    fn records() -> impl Strategy<Value = ResultRecord> {
        (
            kinds(),
            proptest::option::of("[a-z+∨-]{1,8}"),
            proptest::option::of("[a-z+∨-]{1,8}"),
            "[a-z_]{3,20}",
            proptest::option::of(0.0..1.5f64),
            proptest::option::of(0.0..1.0f64),
        )
            .prop_map(|(kind, target, given, method, value, oracle)| ResultRecord {
                query: QuerySpec {
                    kind,
                    target,
                    given,
                    target_atoms: None,
                    given_atoms: None,
                },
                method,
                value,
                oracle,
                gap: match (value, oracle) {
                    (Some(v), Some(o)) => Some((v - o).abs()),
                    _ => None,
                },
            })
    }

    proptest! {
        /// Machine-readable output re-parses to equal records, floats
        /// included bit for bit.
        #[test]
        fn any_record_list_survives_serialization(list in proptest::collection::vec(records(), 0..8)) {
            let text = serde_json::to_string(&list).unwrap();
            let back: Vec<ResultRecord> = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(list, back);
        }
    }
}
