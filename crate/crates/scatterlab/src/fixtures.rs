//! Reference data for local P^2: a printed wall sequence with its starting
//! potential, tropical curve types behind the two-point genus tables, the
//! printed tables themselves, and the local Gopakumar-Vafa inputs.

use scatterlab_core::brokenlines::{CurveContribution, TropCurveType};
use scatterlab_core::geom::{IVec, Pt};
use scatterlab_core::scattering::{cross, ScatterError, ZWall};
use scatterlab_core::{Rat, Series};

/// Potential in the chamber the reference path starts in.
pub const START_POTENTIAL: &str = "t * x^-1 * y + t * y + t * x * y^-2";

/// The slab crossed first, with its normal; crossing it also multiplies by `t^<n,m>`.
pub const REFERENCE_SLAB: (&str, IVec) = ("1 + x^-1", [0, -1]);

/// Walls crossed after the slab, in path order, with their normals.
pub const REFERENCE_WALLS: [(&str, IVec); 17] = [
    ("1 + x * y^-3 * t^3", [-3, -1]),
    ("1 + x^-1 * y^-3 * t^3", [3, -1]),
    ("1 + 15 * x^-1 * y^-9 * t^9", [9, -1]),
    ("1 + x^2 * y^-9 * t^9", [-9, -2]),
    ("1 + x^-2 * y^-9 * t^9", [9, -2]),
    ("1 + 3 * x * y^-6 * t^6", [-6, -1]),
    ("1 + 3 * x^-1 * y^-6 * t^6", [6, -1]),
    ("1 + 13 * x * y^-9 * t^9", [-9, -1]),
    ("1 + 13 * x^-1 * y^-9 * t^9", [9, -1]),
    ("1 + x * y^-6 * t^6", [-6, -1]),
    ("1 + x^-1 * y^-6 * t^6", [6, -1]),
    ("1 + 9 * x * y^-9 * t^9", [-9, -1]),
    ("1 + 9 * x^-1 * y^-9 * t^9", [9, -1]),
    ("1 + 3 * x * y^-9 * t^9", [-9, -1]),
    ("1 + 3 * x^-1 * y^-9 * t^9", [9, -1]),
    ("1 + x * y^-9 * t^9", [-9, -1]),
    ("1 + x^-1 * y^-9 * t^9", [9, -1]),
];

/// Indices into `REFERENCE_WALLS` of the walls a generated diagram must
/// reproduce on the reference path (orders 3 and 6).
pub const GENERATED_SUBSET: [usize; 6] = [0, 1, 5, 6, 9, 10];

/// The printed result of the replay, pure `y` part.
pub const REPLAY_PURE_Y: &str = "y + 2 * y^-2 * t^3 + 5 * y^-5 * t^6 + 32 * y^-8 * t^9 + 286 * y^-11 * t^12";

/// Vertical path through the generated P^2 diagram matching the reference sequence.
pub fn reference_path() -> Vec<Pt> {
    vec![Pt::ratio(-93, 200, -1, 20), Pt::ratio(-93, 200, 200, 1)]
}

fn parse(s: &str, t_cut: i32) -> Series {
    Series::parse(s, 0, t_cut, 0).expect("fixture series parse")
}

pub fn start_potential(t_cut: i32) -> Series {
    parse(START_POTENTIAL, t_cut)
}

pub fn reference_wall(i: usize, t_cut: i32) -> Series {
    parse(REFERENCE_WALLS[i].0, t_cut)
}

/// Replays the reference sequence on the start potential, expanding
/// negative powers of `x` inside the window `[lo, hi]`.
pub fn replay(t_cut: i32, lo: i32, hi: i32) -> Result<Series, ScatterError> {
    let mut w = start_potential(t_cut).with_window(lo, hi);
    let slab = ZWall { function: parse(REFERENCE_SLAB.0, t_cut), is_slab: true, kink: 1 };
    w = cross(&w, &slab, REFERENCE_SLAB.1)?;
    for (f, n) in REFERENCE_WALLS.iter() {
        let zw = ZWall { function: parse(f, t_cut), is_slab: false, kink: 0 };
        w = cross(&w, &zw, *n)?;
    }
    Ok(w)
}

/// One row of the two-point genus tables: weighted curve contributions,
/// the tangencies, and the printed values for genus 0..=4.
#[derive(Clone, Debug)]
pub struct GenusRow {
    pub p: i64,
    pub q: i64,
    pub curves: Vec<(Rat, CurveContribution)>,
    pub printed: [Rat; 5],
}

fn ty(v: &[i64], l: &[i64], aut: i64) -> CurveContribution {
    CurveContribution::Type(TropCurveType::new(v.to_vec(), l.to_vec(), aut))
}

fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

fn w(n: i64) -> Rat {
    Rat::int(n)
}

/// Palindromic Laurent polynomial from its coefficients at `q^{k/2}` for
/// `k = top, top-2, ...` down to the middle; the mirror half is implied.
fn palindromic(top: i64, upper: &[i64]) -> CurveContribution {
    let mut terms = Vec::new();
    for (i, c) in upper.iter().enumerate() {
        let k = top - 2 * i as i64;
        terms.push((k, Rat::int(*c)));
        if k != 0 {
            terms.push((-k, Rat::int(*c)));
        }
    }
    CurveContribution::Laurent(terms)
}

/// All rows with tropical curve data, degrees 1 to 3.
pub fn genus_rows() -> Vec<GenusRow> {
    vec![
        GenusRow {
            p: 1,
            q: 2,
            curves: vec![(w(1), ty(&[2], &[1], 1)), (w(1), ty(&[2, 1], &[1, 1], 1))],
            printed: [w(4), r(-1, 2), r(1, 1536), r(-1, 184320), r(1, 10321920)],
        },
        GenusRow { p: 2, q: 1, curves: vec![(w(1), ty(&[2], &[1], 1))], printed: [w(1), r(-1, 8), r(1, 384), r(-1, 46080), r(1, 2580480)] },
        GenusRow {
            p: 1,
            q: 5,
            // three simple curves and two that come with a leg splitting
            curves: vec![
                (w(3), ty(&[5], &[1], 1)),
                (w(2), ty(&[5, 4], &[2, 1], 1)),
                (w(2), ty(&[5, 2, 2], &[1, 1, 1], 2)),
            ],
            printed: [w(25), w(-25), r(85, 12), r(-65, 72), r(257, 4032)],
        },
        GenusRow {
            p: 2,
            q: 4,
            curves: vec![(w(2), ty(&[4, 2], &[1, 1], 1)), (w(2), palindromic(4, &[1, 1, 2]))],
            printed: [w(14), w(-11), r(35, 12), r(-131, 360), r(103, 4032)],
        },
        GenusRow { p: 3, q: 3, curves: vec![(w(3), ty(&[3, 3], &[1, 1], 1))], printed: [w(9), w(-6), r(3, 2), r(-11, 60), r(43, 3360)] },
        GenusRow {
            p: 4,
            q: 2,
            curves: vec![(w(1), ty(&[4, 2], &[1, 1], 1)), (w(1), palindromic(4, &[1, 1, 2]))],
            printed: [r(7, 2), r(-11, 4), r(35, 48), r(-131, 1440), r(103, 16128)],
        },
        GenusRow { p: 5, q: 1, curves: vec![(w(1), ty(&[5], &[1], 1))], printed: [w(1), w(-1), r(17, 60), r(-13, 360), r(257, 100800)] },
        GenusRow {
            p: 8,
            q: 1,
            curves: vec![(w(1), ty(&[8, 1], &[1, 1], 1)), (w(1), ty(&[8, 6, 1], &[2, 1, 1], 1)), (w(1), ty(&[8, 3, 3, 1], &[1, 1, 1, 1], 2))],
            printed: [w(4), r(-23, 2), r(1037, 96), r(-59363, 11520), r(3870617, 2580480)],
        },
        GenusRow {
            p: 7,
            q: 2,
            curves: vec![
                (w(1), ty(&[7, 2], &[1, 1], 1)),
                (w(1), ty(&[7, 6, 2], &[2, 1, 1], 1)),
                (w(1), ty(&[7, 3, 3, 2], &[1, 1, 1, 1], 2)),
                (w(1), ty(&[7, 12], &[3, 1], 1)),
                (w(1), ty(&[7, 8, 4], &[2, 1, 1], 1)),
                (w(1), ty(&[7, 4, 4, 4], &[1, 1, 1, 1], 6)),
            ],
            printed: [w(12), r(-59, 2), r(2483, 96), r(-966893, 80640), r(8904803, 2580480)],
        },
    ]
}

/// Closed forms printed next to the tables, `R^g_{p,q}` as a function of `g`.
pub fn genus_closed_form(p: i64, q: i64, g: u32) -> Option<Rat> {
    let sign = Rat::int(if g % 2 == 0 { 1 } else { -1 });
    let fact = Rat::factorial(2 * g);
    let four_g = Rat::int(4).pow(g as i32);
    let delta = |c: i64| if g == 0 { Rat::int(c) } else { Rat::zero() };
    // sum_j c_j (j/2)^{2g}, j odd
    let halves = |cs: &[(i64, i64)]| {
        let mut s = Rat::zero();
        for (c, j) in cs {
            s += &(Rat::int(*c) * Rat::new(*j, 2).pow(2 * g as i32));
        }
        s
    };
    let v = match (p, q) {
        (1, 2) => Rat::int(4) * sign / (fact * four_g),
        (2, 1) => sign / (fact * four_g),
        (1, 5) => delta(5) + sign / fact * (Rat::int(10) + Rat::int(10) * four_g),
        (2, 4) => delta(4) + sign / fact * (Rat::int(6) + Rat::int(4) * four_g),
        (3, 3) => delta(3) + sign / fact * (Rat::int(4) + Rat::int(2) * four_g),
        (4, 2) => delta(1) + sign / fact * (Rat::new(3, 2) + four_g),
        (5, 1) => delta(1) + sign / fact * (Rat::new(2, 5) + Rat::new(2, 5) * four_g),
        (8, 1) => sign / (Rat::int(8) * fact) * halves(&[(8, 1), (8, 3), (8, 5), (6, 7), (2, 9)]),
        (7, 2) => sign / (Rat::int(7) * fact) * halves(&[(24, 1), (24, 3), (20, 5), (12, 7), (4, 9)]),
        _ => return None,
    };
    Some(v)
}

/// Which printed source an erratum corrects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Printed {
    Table,
    ClosedForm,
}

/// Printed genus values that disagree with the rest of the printed data,
/// as `(p, q, genus, source, corrected value)`. The table entries at genus
/// 2 and 3 for `(1, 2)` contradict both the closed form and the value stated
/// in the worked example; the two genus-4 entries are swapped between the
/// `(1, 2)` and `(2, 1)` tables. The `(5, 1)` closed form has the constant
/// of `(1, 5)` without the division by `p`.
pub const ERRATA: [(i64, i64, u32, Printed, (i64, i64)); 5] = [
    (1, 2, 2, Printed::Table, (1, 96)),
    (1, 2, 3, Printed::Table, (-1, 11520)),
    (1, 2, 4, Printed::Table, (1, 2580480)),
    (2, 1, 4, Printed::Table, (1, 10321920)),
    (5, 1, 0, Printed::ClosedForm, (1, 1)),
];

fn erratum(p: i64, q: i64, g: u32, src: Printed) -> Option<Rat> {
    ERRATA.iter().find(|e| e.0 == p && e.1 == q && e.2 == g && e.3 == src).map(|e| Rat::new(e.4 .0, e.4 .1))
}

impl GenusRow {
    /// The printed table with `ERRATA` applied.
    pub fn corrected(&self) -> Vec<Rat> {
        (0..5u32).map(|g| erratum(self.p, self.q, g, Printed::Table).unwrap_or_else(|| self.printed[g as usize].clone())).collect()
    }
}

/// `genus_closed_form` with `ERRATA` applied.
pub fn corrected_closed_form(p: i64, q: i64, g: u32) -> Option<Rat> {
    erratum(p, q, g, Printed::ClosedForm).or_else(|| genus_closed_form(p, q, g))
}

/// Genus-0 two-point counts `(p, q, R)` at orders 6 and 9.
pub const GENUS0_COUNTS: [(i64, i64, i64, i64); 9] =
    [(1, 2, 4, 1), (2, 1, 1, 1), (1, 5, 25, 1), (2, 4, 14, 1), (3, 3, 9, 1), (4, 2, 7, 2), (5, 1, 1, 1), (8, 1, 4, 1), (7, 2, 12, 1)];

/// Local genus-0 and genus-1 Gopakumar-Vafa invariants of `dL - C` on `F_1`
/// for `d = 1, 2`. External inputs quoted from published tables, not computed.
pub const LOCAL_GV: [(i64, i64, i64); 2] = [(1, -2, 0), (2, 5, 0)];

/// Central-chamber `theta_2` with the bracket `q^{1/2} + q^{-1/2}` written
/// as `2 cos(h/2)` through `h^4`.
pub const CENTRAL_THETA2: &str = "t^2 * y^2 + t^2 * x^-2 * y^2 + t^2 * x^2 * y^-4 \
+ 2 * t^2 * y^-1 + 2 * t^2 * x * y^-1 + 2 * t^2 * x^-1 * y^2 \
- 1/4 * t^2 * y^-1 * h^2 - 1/4 * t^2 * x * y^-1 * h^2 - 1/4 * t^2 * x^-1 * y^2 * h^2 \
+ 1/192 * t^2 * y^-1 * h^4 + 1/192 * t^2 * x * y^-1 * h^4 + 1/192 * t^2 * x^-1 * y^2 * h^4";
