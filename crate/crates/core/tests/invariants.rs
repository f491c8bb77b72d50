use fosd_screen_core::dist::Piece;
use fosd_screen_core::mc::{read_le, DKW_CONFIDENCE};
use fosd_screen_core::*;
use proptest::prelude::*;

fn linear_prior(a: f64, b: f64) -> Distribution {
    Distribution::new(vec![Piece::polynomial(0.0, 1.0, &[a, b])], vec![], None, true).unwrap()
}

#[test]
fn mc_same_seed_same_samples() {
    let prior = Distribution::uniform(0.0, 1.0).unwrap();
    let k = triangle_rectangle_kernel();
    let cond = McCondition::band(1.5, 1e-2);
    let a = sample_conditional(&prior, &k, &cond, 200_000, 7).unwrap();
    let b = sample_conditional(&prior, &k, &cond, 200_000, 7).unwrap();
    assert_eq!(a.samples(), b.samples());
    let c = sample_conditional(&prior, &k, &cond, 200_000, 8).unwrap();
    assert_ne!(a.samples(), c.samples());
}

#[test]
fn mc_returns_exactly_n_sorted_samples() {
    let prior = Distribution::uniform(0.0, 1.0).unwrap();
    let k = triangle_rectangle_kernel();
    let ts = threshold_transform(&k).unwrap();
    let cond = McCondition::Threshold(ts, 1.0);
    let emp = sample_conditional(&prior, &k, &cond, 50_000, 3).unwrap();
    assert_eq!(emp.n(), 50_000);
    assert!(emp.samples().windows(2).all(|w| w[0] <= w[1]));
    assert!(emp.acceptance_rate() > 0.0 && emp.acceptance_rate() <= 1.0);
}

#[test]
fn mc_dump_round_trips() {
    let prior = Distribution::uniform(-1.0, 0.0).unwrap();
    let k = additive_kernel(make_named_prior("exponential", &[1.0]).unwrap());
    let emp = sample_conditional(&prior, &k, &McCondition::band(1.0, 1e-3), 10_000, 11).unwrap();
    let mut buf = Vec::new();
    emp.write_le(&mut buf).unwrap();
    assert_eq!(buf.len(), 8 * 10_000);
    assert_eq!(read_le(&buf), emp.samples());
}

#[test]
fn mc_detects_wrong_analytic() {
    let prior = Distribution::uniform(0.0, 1.0).unwrap();
    let k = triangle_rectangle_kernel();
    let wrong = posterior_point(&prior, &k, 2.0).unwrap().dist;
    let r = oracle_check(&prior, &k, &McCondition::band(1.0, 1e-3), &wrong, 200_000, 5).unwrap();
    assert!(!r.pass);
    assert!(r.statistic > dkw_band(200_000, DKW_CONFIDENCE));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A finer probe grid never overturns a verdict on piecewise-polynomial
    /// posteriors: breakpoints are always probed.
    #[test]
    fn fosd_verdict_stable_under_refinement(
        a in 0.1f64..2.0, b in -0.09f64..2.0, z1 in 0.2f64..1.4, dz in 0.1f64..1.4
    ) {
        let prior = linear_prior(a, b.max(-a + 0.01));
        let k = triangle_rectangle_kernel();
        let z2 = (z1 + dz).min(2.9);
        prop_assume!(z2 > z1);
        let p1 = posterior_point(&prior, &k, z1).unwrap();
        let p2 = posterior_point(&prior, &k, z2).unwrap();
        let coarse = fosd_compare_grid(&p1.dist, &p2.dist, 1e-9, 1_000);
        let fine = fosd_compare_grid(&p1.dist, &p2.dist, 1e-9, 50_000);
        prop_assert_eq!(coarse.relation, fine.relation);
    }

    /// Swapping arguments mirrors the relation.
    #[test]
    fn fosd_swap_mirrors(a in 0.1f64..2.0, b in 0.0f64..2.0, z1 in 0.2f64..2.5, dz in 0.05f64..0.5) {
        let prior = linear_prior(a, b);
        let k = three_piece_kernel(0.1, 1.0).unwrap();
        let z2 = (z1 + dz).min(2.05);
        prop_assume!(z2 > z1);
        let p1 = posterior_point(&prior, &k, z1).unwrap().dist;
        let p2 = posterior_point(&prior, &k, z2).unwrap().dist;
        let fwd = fosd_compare(&p1, &p2, 1e-9).relation;
        let back = fosd_compare(&p2, &p1, 1e-9).relation;
        let mirrored = match fwd {
            Relation::StrictDominates | Relation::WeakDominates => back == Relation::Dominated,
            Relation::Equal => back == Relation::Equal,
            Relation::Dominated => back.dominates() && back != Relation::Equal,
            Relation::Incomparable => back == Relation::Incomparable,
        };
        prop_assert!(mirrored, "{:?} vs {:?}", fwd, back);
    }

    /// Posterior cdfs are monotone and reach 1.
    #[test]
    fn posterior_is_a_distribution(a in 0.1f64..2.0, b in 0.0f64..2.0, z in 0.05f64..2.95) {
        let prior = linear_prior(a, b);
        let p = posterior_point(&prior, &triangle_rectangle_kernel(), z).unwrap().dist;
        let mut last = 0.0;
        for i in 0..=200 {
            let c = p.cdf(i as f64 / 200.0);
            prop_assert!(c >= last - 1e-15);
            last = c;
        }
        prop_assert!((last - 1.0).abs() < 1e-12);
    }
}
