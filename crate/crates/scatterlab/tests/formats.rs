use scatterlab::formats::{diagram_json, fan_picture_from_json, fan_picture_json, parse_rat, rat_json, render_svg, series_json, table_csv, Viewport};
use scatterlab::Pool;
use scatterlab_core::brokenlines::{enumerate, unbounded_endpoints, with_generic, InvariantTable, TraceOptions};
use scatterlab_core::exec::Sequential;
use scatterlab_core::geom::Pt;
use scatterlab_core::scattering::{complete_to_order, initial_structure, ScatteringDiagram};
use scatterlab_core::surface::{blow_up, builtin_f1, builtin_p2};
use scatterlab_core::{Rat, Series};
use serde_json::json;

fn p2(k: u32) -> ScatteringDiagram {
    complete_to_order(&initial_structure(&builtin_p2(), 0), k, &Sequential).unwrap().0
}

#[test]
fn rationals_are_pairs_and_grow_to_strings() {
    assert_eq!(rat_json(&Rat::new(-6, 4)), json!([-3, 2]));
    let huge: Rat = "123456789012345678901234567891/2".parse().unwrap();
    assert_eq!(rat_json(&huge), json!(["123456789012345678901234567891", 2]));
    assert_eq!(parse_rat(" -7/21 ").unwrap(), Rat::new(-1, 3));
    assert!(parse_rat("1/0").is_err());
}

#[test]
fn series_terms_carry_every_exponent() {
    let s = Series::parse("3/2 * x^-1 * y^2 * t^3 * h^2", 0, 5, 4).unwrap();
    assert_eq!(series_json(&s), json!([{"c": [3, 2], "x": -1, "y": 2, "t": 3, "s": [], "h": 2}]));
}

#[test]
fn diagram_dump_lists_walls_in_key_order() {
    let d = p2(3);
    let v = diagram_json(&d);
    assert_eq!(v["surface"], "P2");
    assert_eq!(v["order"], 3);
    let walls = v["walls"].as_array().unwrap();
    assert_eq!(walls.len(), d.walls.len());
    assert!(walls.iter().any(|w| w["text"] == "1 + x * y^-3 * t^3 * s^(1)"));
    for w in walls {
        for key in ["base", "dir", "end", "slab", "kink", "birth", "f", "text"] {
            assert!(w.get(key).is_some(), "missing {}", key);
        }
    }
    // the dump does not depend on the executor
    let again = complete_to_order(&initial_structure(&builtin_p2(), 0), 3, &Pool::with_threads(3)).unwrap().0;
    assert_eq!(diagram_json(&again), v);
}

#[test]
fn fan_pictures_round_trip() {
    for f in [builtin_p2(), builtin_f1(), blow_up(&builtin_p2(), 1).unwrap().0] {
        let v = fan_picture_json(&f);
        assert_eq!(v["version"], 1);
        let back = fan_picture_from_json(&v).unwrap();
        assert_eq!(fan_picture_json(&back), v);
        assert_eq!(back.vertex_kinks(), f.vertex_kinks());
    }
}

#[test]
fn malformed_fan_pictures_are_rejected() {
    let mut v = fan_picture_json(&builtin_p2());
    v["version"] = json!(7);
    assert!(fan_picture_from_json(&v).is_err());
    assert!(fan_picture_from_json(&json!({"version": 1})).is_err());
}

#[test]
fn viewport_clips_exactly() {
    let vp = Viewport { x0: Rat::int(-1), y0: Rat::int(0), x1: Rat::int(2), y1: Rat::int(3), scale: 10 };
    // y = -1 + 3s enters at the bottom edge and leaves at the top
    let (a, b) = vp.clip(&Pt::int(0, -1), [1, 3], &Rat::zero(), None).unwrap();
    assert_eq!((a, b), (Pt::ratio(1, 3, 0, 1), Pt::ratio(4, 3, 3, 1)));
    let (_, b) = vp.clip(&Pt::int(0, -1), [1, 3], &Rat::zero(), Some(&Rat::new(1, 2))).unwrap();
    assert_eq!(b, Pt::ratio(1, 2, 1, 2));
    assert!(vp.clip(&Pt::int(5, 5), [1, 0], &Rat::zero(), None).is_none());
    assert_eq!(vp.map(&Pt::ratio(1, 2, 1, 3)), (Rat::int(15), Rat::new(80, 3)));
}

fn attr<'a>(tag: &'a str, name: &str) -> &'a str {
    let key = format!("{}=\"", name);
    let i = tag.find(&key).unwrap() + key.len();
    let j = tag[i..].find('"').unwrap();
    &tag[i..i + j]
}

fn pt(s: &str) -> Pt {
    let (x, y) = s.split_once(',').unwrap();
    Pt::new(parse_rat(x).unwrap(), parse_rat(y).unwrap())
}

#[test]
fn svg_lines_carry_exact_endpoints() {
    let d = p2(3);
    let vp = Viewport { x0: Rat::int(-3), y0: Rat::int(-2), x1: Rat::int(4), y1: Rat::int(8), scale: 60 };
    let opts = TraceOptions::new(3, 0);
    let lines = with_generic(unbounded_endpoints(&d), |p| enumerate(&d, p, 1, &opts, &Sequential)).unwrap();
    let svg = render_svg(&d, &vp, &lines);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let tags: Vec<&str> = svg.lines().filter(|l| l.starts_with("<line")).collect();
    for class in ["slab", "wall", "sing", "broken"] {
        assert!(tags.iter().any(|t| attr(t, "class") == class), "no {} lines", class);
    }
    for t in &tags {
        let (a, b) = (pt(attr(t, "data-from")), pt(attr(t, "data-to")));
        for q in [&a, &b] {
            assert!(q.x >= vp.x0 && q.x <= vp.x1 && q.y >= vp.y0 && q.y <= vp.y1, "{} outside the viewport", t);
        }
        // pixel coordinates are the rounded images of the exact endpoints
        let (px, _) = vp.map(&a);
        let drawn: f64 = attr(t, "x1").parse().unwrap();
        assert!((drawn - px.to_f64()).abs() < 1e-3);
    }
}

#[test]
fn csv_table_has_exact_cells() {
    let d = p2(3);
    let th = scatterlab_core::brokenlines::unbounded_thetas(&d, 2, &TraceOptions::new(3, 0), &Sequential).unwrap();
    let csv = table_csv(&InvariantTable::from_thetas(&th, 1));
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("p,q,class,genus,R_trop,R"));
    // theta_1 = y + 2 t^3 y^-2: R_trop_2,1 = 2 in degree 1
    assert!(rows.any(|r| r == "2,1,1,0,2,1"), "{}", csv);
}
