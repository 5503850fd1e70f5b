use proptest::prelude::*;
use scatterlab_core::brokenlines::{
    central_endpoints, chamber_of, enumerate, extract_r, genus_table, laurent_to_hbar, multiplicity_q, theta, unbounded_endpoints, unbounded_thetas,
    verify_theta_identities, with_generic, Chamber, CurveContribution, InvariantTable, TraceOptions, TropCurveType,
};
use scatterlab_core::exec::Sequential;
use scatterlab_core::scattering::{complete_to_order, initial_structure, ScatteringDiagram};
use scatterlab_core::series::vertex_kernel;
use scatterlab_core::surface::builtin_p2;
use scatterlab_core::{Mono, Rat, Series};

fn p2(k: u32) -> ScatteringDiagram {
    complete_to_order(&initial_structure(&builtin_p2(), 0), k, &Sequential).unwrap().0
}

#[test]
fn superpotential_through_order_six() {
    let d = p2(6);
    let w = theta(&d, 1, &TraceOptions::new(6, 0), &Sequential).unwrap().forget_classes();
    assert_eq!(w, Series::parse("y + 2 * y^-2 * t^3 + 5 * y^-5 * t^6", 0, 6, 0).unwrap());
}

#[test]
fn broken_lines_of_theta_1_at_order_three() {
    let d = p2(3);
    let lines = with_generic(unbounded_endpoints(&d), |p| enumerate(&d, p, 1, &TraceOptions::new(3, 0), &Sequential)).unwrap();
    // the straight line and the ones picking up t^3 y^-3 (total coefficient 2)
    let straight = lines.iter().filter(|l| l.ending().0.d == 0).count();
    assert_eq!(straight, 1);
    let bent: Rat = lines.iter().filter(|l| l.ending().0.d == 3).map(|l| l.ending().1.constant_term()).fold(Rat::zero(), |a, b| &a + &b);
    assert_eq!(bent, Rat::int(2));
    for l in &lines {
        assert_eq!(l.asymptotic_charge, 1);
        assert_eq!(l.final_segment().mono.a, 0);
    }
}

#[test]
fn thetas_from_one_pass_match_single_charges() {
    let d = p2(6);
    let opts = TraceOptions::new(6, 0);
    let all = unbounded_thetas(&d, 3, &opts, &Sequential).unwrap();
    for q in 1..=3 {
        assert_eq!(all[q as usize], theta(&d, q, &opts, &Sequential).unwrap(), "theta_{}", q);
    }
}

#[test]
fn extract_r_reads_the_two_point_counts() {
    let d = p2(6);
    let th = unbounded_thetas(&d, 5, &TraceOptions::new(6, 0), &Sequential).unwrap();
    let want = [(1, 2, Rat::int(4)), (2, 1, Rat::int(1)), (1, 5, Rat::int(25)), (3, 3, Rat::int(9)), (4, 2, Rat::new(7, 2))];
    for (p, q, r) in want {
        let (trop, got) = extract_r(&th[q as usize], p, q).unwrap();
        assert_eq!(got, r, "R_{},{}", p, q);
        assert_eq!(trop, &r * &Rat::int(p));
    }
    assert!(verify_theta_identities(&th, 1, 6).all_ok());
    let t = InvariantTable::from_thetas(&th, 1);
    assert_eq!(t.trop_total(1, 2, 0), Rat::int(4));
}

#[test]
fn central_chamber_is_classified() {
    let d = p2(3);
    let p = central_endpoints(&d).next().unwrap();
    assert!(matches!(chamber_of(&d, &p), Some(Chamber::Central(_))));
    let p = unbounded_endpoints(&d).next().unwrap();
    assert!(matches!(chamber_of(&d, &p), Some(Chamber::Unbounded(0))));
}

/// `2 sin(m h / 2) / h` from its Taylor series.
fn sine_ratio(m: i64, h_cut: u32) -> Series {
    let mut terms = Vec::new();
    for j in 0..=h_cut / 2 {
        let c = &Rat::new(if j % 2 == 0 { 1 } else { -1 }, 1) * &(&Rat::new(m, 2).pow(2 * j as i32) / &Rat::factorial(2 * j + 1));
        terms.push((&c * &Rat::int(m), Mono::hbar(2 * j)));
    }
    Series::from_terms(0, i32::MAX / 4, h_cut, terms)
}

#[test]
fn vertex_multiplicity_is_the_sine_ratio() {
    for m in 1..=5 {
        assert_eq!(vertex_kernel(m, 8), sine_ratio(m, 8), "m = {}", m);
    }
}

#[test]
fn leg_weight_one_gives_the_bernoulli_expansion() {
    // h / (2 sin(h/2)) = 1 + h^2/24 + 7 h^4/5760 + 31 h^6/967680
    let t = TropCurveType::new(vec![], vec![1], 1);
    let m = multiplicity_q(&t, 6);
    let want = [Rat::one(), Rat::new(1, 24), Rat::new(7, 5760), Rat::new(31, 967680)];
    for (j, w) in want.iter().enumerate() {
        assert_eq!(m.coeff(&Mono::hbar(2 * j as u32)), *w);
    }
}

#[test]
fn genus_table_of_a_single_vertex() {
    // one vertex of multiplicity 2 and a weight-1 leg, read with p = 2
    let curves = vec![(Rat::one(), CurveContribution::Type(TropCurveType::new(vec![2], vec![1], 1)))];
    let g = genus_table(&curves, 2, 8).unwrap();
    assert_eq!(g, vec![Rat::one(), Rat::new(-1, 8), Rat::new(1, 384), Rat::new(-1, 46080), Rat::new(1, 10321920)]);
}

#[test]
fn non_palindromic_laurent_is_rejected() {
    assert!(laurent_to_hbar(&[(1, Rat::one())], 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    /// `[m]_q` as a Laurent polynomial equals the ratio of vertex kernels.
    #[test]
    fn quantum_numbers_agree(m in 1i64..=9) {
        let terms: Vec<(i64, Rat)> = (0..m).map(|k| (m - 1 - 2 * k, Rat::one())).collect();
        let lhs = laurent_to_hbar(&terms, 6).unwrap();
        let rhs = &vertex_kernel(m, 6) * &vertex_kernel(1, 6).pow_int(-1).unwrap();
        prop_assert_eq!(lhs.coeff(&Mono::hbar(0)), Rat::int(m));
        for h in [0u32, 2, 4, 6] {
            prop_assert_eq!(lhs.coeff(&Mono::hbar(h)), rhs.coeff(&Mono::hbar(h)));
        }
    }

    /// The classical limit of the refined multiplicity is the classical one.
    #[test]
    fn refined_multiplicity_has_the_classical_limit(vs in prop::collection::vec(1i64..=5, 1..4), ls in prop::collection::vec(1i64..=4, 0..3), aut in 1i64..=3) {
        let t = TropCurveType::new(vs, ls, aut);
        prop_assert_eq!(multiplicity_q(&t, 4).coeff(&Mono::hbar(0)), t.classical());
    }
}
