use proptest::prelude::*;
use scatterlab_core::{Mono, Rat, Series};

const CUT: i32 = 6;
const H: u32 = 4;

fn rat() -> impl Strategy<Value = Rat> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| Rat::new(n, d))
}

fn mono(min_t: i32) -> impl Strategy<Value = Mono> {
    (-3i32..=3, -3i32..=3, min_t..=CUT, 0u32..=2, -1i32..=1).prop_map(|(a, b, d, h, c)| Mono { h: 2 * h, ..Mono::xyt(a, b, d).with_class(&[c]) })
}

fn series(min_t: i32) -> impl Strategy<Value = Series> {
    prop::collection::vec((rat(), mono(min_t)), 0..6).prop_map(|ts| Series::from_terms(1, CUT, H, ts))
}

fn one() -> Series {
    Series::one(1, CUT, H)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn addition_is_an_abelian_group(a in series(0), b in series(0), c in series(0)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a + &(-&a)).is_zero());
        prop_assert_eq!(&a - &b, &a + &(-&b));
    }

    #[test]
    fn multiplication_is_commutative_and_distributes(a in series(0), b in series(0), c in series(0)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &one(), a.clone());
    }

    #[test]
    fn truncation_commutes_with_products(a in series(0), b in series(0), k in 0i32..=CUT) {
        prop_assert_eq!((&a * &b).truncate(k, H), &a.truncate(k, H) * &b.truncate(k, H));
    }

    #[test]
    fn exp_and_log_are_inverse(s in series(1)) {
        prop_assert_eq!(s.exp().unwrap().log().unwrap(), s.clone());
        let u = &one() + &s;
        prop_assert_eq!(u.log().unwrap().exp().unwrap(), u);
    }

    #[test]
    fn exp_turns_sums_into_products(a in series(1), b in series(1)) {
        prop_assert_eq!((&a + &b).exp().unwrap(), &a.exp().unwrap() * &b.exp().unwrap());
    }

    #[test]
    fn units_invert(s in series(1), m in mono(0), n in 1i64..=3) {
        // a monomial times 1 + (positive order) is a unit
        let u = &Series::monomial(1, CUT, H, Mono { d: 0, h: 0, ..m }, Rat::new(2, 3)) * &(&one() + &s);
        let inv = u.pow_int(-n).unwrap();
        let back = &inv * &u.pow_int(n).unwrap();
        prop_assert_eq!(back, one());
    }

    #[test]
    fn text_round_trips(s in series(0)) {
        let back = Series::parse(&s.to_text(), 1, CUT, H).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn compositional_inverse(cs in prop::collection::vec(rat(), 5)) {
        let mut terms = vec![(Rat::one(), Mono::t(1))];
        terms.extend(cs.into_iter().enumerate().map(|(i, c)| (c, Mono::t(i as i32 + 2))));
        let f = Series::from_terms(0, 7, 0, terms);
        let g = f.invert_series().unwrap();
        let t = Series::monomial(0, 7, 0, Mono::t(1), Rat::one());
        prop_assert_eq!(f.compose(&g).unwrap(), t.clone());
        prop_assert_eq!(g.compose(&f).unwrap(), t);
    }
}

#[test]
fn log_needs_constant_one() {
    assert!(Series::parse("2 + t", 0, 4, 0).unwrap().log().is_err());
    assert!(Series::parse("x", 0, 4, 0).unwrap().exp().is_err());
}
