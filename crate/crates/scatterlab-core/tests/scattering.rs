use std::collections::BTreeMap;

use proptest::prelude::*;
use scatterlab_core::exec::Sequential;
use scatterlab_core::geom::{neg, IVec};
use scatterlab_core::scattering::{
    complete_to_order, consistency_check, corrective_rays, cross, initial_structure, loop_images, path_product, sort_rays, vertex_scatter, Grading,
    LoopRay, ZWall,
};
use scatterlab_core::surface::{builtin_f1, builtin_p2};
use scatterlab_core::{Mono, Rat, Series};

const NO_CUT: i32 = i32::MAX / 4;

fn s(text: &str) -> Series {
    Series::parse(text, 0, NO_CUT, 0).unwrap()
}

/// Scatters two lines through the origin carrying `fx` (along x) and `fy`
/// (along y) up to total degree `top`; returns the new rays merged by direction.
fn scatter_lines(fx: &Series, fy: &Series, top: i64) -> BTreeMap<IVec, Series> {
    let g = Grading::Linear([1, 1], 1);
    let mut out: BTreeMap<IVec, Series> = BTreeMap::new();
    for j in 2..=top {
        let mut rays = vec![
            LoopRay { dir: [1, 0], function: fx.clone() },
            LoopRay { dir: [-1, 0], function: fx.clone() },
            LoopRay { dir: [0, 1], function: fy.clone() },
            LoopRay { dir: [0, -1], function: fy.clone() },
        ];
        rays.extend(out.iter().map(|(d, f)| LoopRay { dir: *d, function: f.clone() }));
        sort_rays(&mut rays);
        for (d, f) in corrective_rays(&rays, &g, j, 0).unwrap() {
            let e = out.entry(d).or_insert_with(|| Series::one(0, NO_CUT, 0));
            *e = &*e * &f;
        }
    }
    out
}

fn upto(f: &Series, top: i32) -> Series {
    f.filter(|m, _| m.a + m.b <= top)
}

#[test]
fn simple_lines_scatter_into_one_ray() {
    let out = scatter_lines(&s("1 + x"), &s("1 + y"), 6);
    assert_eq!(out.len(), 1, "{:?}", out);
    let (d, f) = out.iter().next().unwrap();
    assert_eq!(*d, [-1, -1]);
    assert_eq!(*f, s("1 + x * y"));
}

#[test]
fn squared_lines_match_the_known_tropical_vertex() {
    // (1 + x)^2 and (1 + y)^2: the diagonal carries (1 - xy)^-4, and the
    // (2,1), (1,2) rays carry (1 + x^2 y)^2, (1 + x y^2)^2
    let out = scatter_lines(&s("1 + 2 * x + x^2"), &s("1 + 2 * y + y^2"), 6);
    let diag = upto(&out[&[-1, -1]], 6);
    assert_eq!(diag, s("1 + 4 * x * y + 10 * x^2 * y^2 + 20 * x^3 * y^3"));
    assert_eq!(upto(&out[&[-2, -1]], 6), s("1 + 2 * x^2 * y + x^4 * y^2"));
    assert_eq!(upto(&out[&[-1, -2]], 6), s("1 + 2 * x * y^2 + x^2 * y^4"));
    assert!(!out.contains_key(&[-3, -1]) && !out.contains_key(&[-1, -3]));
}

#[test]
fn completed_loop_is_trivial() {
    let (fx, fy) = (s("1 + x"), s("1 + y"));
    let mut rays = vec![
        LoopRay { dir: [1, 0], function: fx.clone() },
        LoopRay { dir: [-1, 0], function: fx },
        LoopRay { dir: [0, 1], function: fy.clone() },
        LoopRay { dir: [0, -1], function: fy },
        LoopRay { dir: [-1, -1], function: s("1 + x * y") },
    ];
    sort_rays(&mut rays);
    let (rx, ry) = loop_images(&rays, &Grading::Linear([1, 1], 1), 12, 0).unwrap();
    assert!(rx.is_one() && ry.is_one(), "{} {}", rx, ry);
}

#[test]
fn p2_vertex_produces_the_order_three_ray() {
    let v = vertex_scatter(&builtin_p2(), 0, 3).unwrap();
    assert_eq!(v.kappa, 3);
    // two continuation rays plus one new ray carrying a single t^3 term
    assert_eq!(v.rays.len(), 3, "{:?}", v.rays);
    let new: Vec<&(IVec, Series)> = v.rays.iter().filter(|(d, _)| *d != neg(v.a) && *d != neg(v.b)).collect();
    assert_eq!(new.len(), 1);
    assert_eq!(new[0].1.len(), 2);
}

#[test]
fn p2_and_f1_diagrams_are_consistent() {
    for (f, k) in [(builtin_p2(), 6), (builtin_f1(), 4)] {
        let (d, _) = complete_to_order(&initial_structure(&f, 0), k, &Sequential).unwrap();
        assert!(d.consistent);
        assert!(d.class_lock_holds());
        let rep = consistency_check(&d, &Sequential).unwrap();
        assert!(rep.all_ok(), "{} fails at {:?}", f.name, rep.first_failure());
    }
}

#[test]
fn p2_wall_coefficients_through_order_six() {
    let (d, _) = complete_to_order(&initial_structure(&builtin_p2(), 0), 6, &Sequential).unwrap();
    let texts: Vec<String> = d.walls.iter().map(|w| w.z_function(&d.surface, w.first_cell(&d.surface)).forget_classes().to_text()).collect();
    for want in ["1 + x * y^-3 * t^3", "1 + 3 * x * y^-6 * t^6"] {
        assert!(texts.iter().any(|t| t == want), "{} missing from {:?}", want, texts);
    }
}

#[test]
fn slab_crossing_multiplies_by_the_kink() {
    let val = Series::parse("y", 0, 6, 0).unwrap();
    let slab = ZWall { function: Series::parse("1 + x^-1", 0, 6, 0).unwrap(), is_slab: true, kink: 1 };
    let got = cross(&val, &slab, [0, 1]).unwrap();
    assert_eq!(got, Series::parse("t * y + t * x^-1 * y", 0, 6, 0).unwrap());
    let plain = ZWall { is_slab: false, kink: 0, ..slab };
    assert_eq!(cross(&val, &plain, [0, 1]).unwrap(), Series::parse("y + x^-1 * y", 0, 6, 0).unwrap());
}

fn wall_fn() -> impl Strategy<Value = (Series, IVec)> {
    (-3i32..=3, -3i32..=3, 1i32..=3, 1i64..=3)
        .prop_filter("nonzero exponent", |(a, b, _, _)| *a != 0 || *b != 0)
        .prop_map(|(a, b, d, c)| {
            let f = Series::from_terms(0, 7, 0, [(Rat::one(), Mono::ONE), (Rat::int(c), Mono::xyt(a, b, d))]);
            (f, [b as i64, -a as i64])
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn crossing_back_undoes_a_wall(walls in prop::collection::vec(wall_fn(), 1..4)) {
        let mut there: Vec<(Series, IVec)> = walls.clone();
        there.extend(walls.iter().rev().map(|(f, n)| (f.clone(), neg(*n))));
        let (x, y) = path_product(&there, 0, 7).unwrap();
        prop_assert_eq!(x, Series::monomial(0, 7, 0, Mono::xy(1, 0), Rat::one()));
        prop_assert_eq!(y, Series::monomial(0, 7, 0, Mono::xy(0, 1), Rat::one()));
    }

    #[test]
    fn crossing_is_a_ring_map((f, n) in wall_fn(), a in -2i32..=2, b in -2i32..=2, c in -2i32..=2, d in -2i32..=2) {
        let w = ZWall { function: f, is_slab: false, kink: 0 };
        let m1 = Series::monomial(0, 7, 0, Mono::xy(a, b), Rat::one());
        let m2 = Series::monomial(0, 7, 0, Mono::xy(c, d), Rat::one());
        let lhs = cross(&(&m1 * &m2), &w, n).unwrap();
        let rhs = &cross(&m1, &w, n).unwrap() * &cross(&m2, &w, n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
