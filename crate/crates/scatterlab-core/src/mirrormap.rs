//! Mirror maps of local P^2, the Lerche-Mayr operators, blow-up and
//! Gopakumar-Vafa convolutions, and the comparison of the superpotential
//! with the open mirror map.
//!
//! Single-variable series use the `t` axis of [`Series`] as the variable
//! (`z` or `Q`); two-variable series put the open variable `x` on the `x` axis.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rat::Rat;
use crate::series::{n_gp_kernel, Mono, Series, SeriesError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MirrorError {
    Series(SeriesError),
    /// `M^3 z(Q) = Q` failed.
    InconsistentMaps,
    MissingEntry(String),
    BadInput(String),
}

impl fmt::Display for MirrorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MirrorError::Series(e) => write!(f, "{}", e),
            MirrorError::InconsistentMaps => write!(f, "M^3 z(Q) differs from Q"),
            MirrorError::MissingEntry(s) => write!(f, "missing table entry: {}", s),
            MirrorError::BadInput(s) => write!(f, "bad input: {}", s),
        }
    }
}

impl From<SeriesError> for MirrorError {
    fn from(e: SeriesError) -> Self {
        MirrorError::Series(e)
    }
}

fn var(cut: i32) -> Series {
    Series::monomial(0, cut, 0, Mono::t(1), Rat::one())
}

/// `F(z) = sum_{k=1}^{terms} (-1)^k (3k)! / (k (k!)^3) z^k`, cut at `z^order`.
pub fn hypergeometric_tail(order: i32, terms: i32) -> Series {
    let mut f = Series::zero(0, order, 0);
    for k in 1..=terms.min(order) {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let c = Rat::int(sign) * Rat::factorial(3 * k as u32) / (Rat::int(k as i64) * Rat::factorial(k as u32).pow(3));
        f.add_term(Mono::t(k), c);
    }
    f
}

/// The closed and open mirror maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MirrorMaps {
    pub f: Series,
    pub q_of_z: Series,
    pub z_of_q: Series,
    /// Open mirror map `M(Q) = (Q / z(Q))^{1/3} = exp(F(z(Q)) / 3)`.
    pub m: Series,
}

/// Mirror maps through order `n`.
pub fn open_closed_maps(n: u32) -> Result<MirrorMaps, MirrorError> {
    open_closed_maps_truncated(n, n as i32)
}

/// As [`open_closed_maps`] with only the first `terms` terms of `F` kept.
pub fn open_closed_maps_truncated(n: u32, terms: i32) -> Result<MirrorMaps, MirrorError> {
    if n == 0 {
        return Err(MirrorError::BadInput(String::from("order must be at least 1")));
    }
    let cut = n as i32;
    let f = hypergeometric_tail(cut, terms);
    let z = var(cut);
    let q_of_z = &z * &f.exp()?;
    let z_of_q = q_of_z.invert_series()?;
    let m = f.compose(&z_of_q)?.scale(&Rat::new(1, 3)).exp()?;
    if &m.pow_int(3)? * &z_of_q != z {
        return Err(MirrorError::InconsistentMaps);
    }
    Ok(MirrorMaps { f, q_of_z, z_of_q, m })
}

/// `c_x log x + c_z log z + tail`, with the logs kept symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogSeries {
    pub log_x: Rat,
    pub log_coefficient: Rat,
    pub tail: Series,
}

impl LogSeries {
    pub fn new(log_x: Rat, log_z: Rat, tail: Series) -> LogSeries {
        LogSeries { log_x, log_coefficient: log_z, tail }
    }

    pub fn plain(tail: Series) -> LogSeries {
        LogSeries::new(Rat::zero(), Rat::zero(), tail)
    }

    fn constant(&self, c: &Rat) -> Series {
        Series::monomial(self.tail.rank(), self.tail.t_cut(), self.tail.h_cut(), Mono::ONE, c.clone())
    }

    /// `z d/dz`, with `theta(log z) = 1`.
    pub fn theta_z(&self) -> LogSeries {
        LogSeries::plain(&self.tail.theta_t() + &self.constant(&self.log_coefficient))
    }

    /// `x d/dx`, with `theta_o(log x) = 1`.
    pub fn theta_x(&self) -> LogSeries {
        LogSeries::plain(&self.tail.theta_x() + &self.constant(&self.log_x))
    }

    pub fn add(&self, o: &LogSeries) -> LogSeries {
        LogSeries::new(&self.log_x + &o.log_x, &self.log_coefficient + &o.log_coefficient, &self.tail + &o.tail)
    }

    pub fn scale(&self, k: &Rat) -> LogSeries {
        LogSeries::new(&self.log_x * k, &self.log_coefficient * k, self.tail.scale(k))
    }

    /// Multiplies by `x^a z^d`; the log part must already be gone.
    pub fn shift(&self, a: i32, d: i32) -> LogSeries {
        assert!(self.log_x.is_zero() && self.log_coefficient.is_zero(), "a log term would mix into the tail");
        LogSeries::plain(self.tail.mul_mono(&Mono::xyt(a, 0, d), &Rat::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.log_x.is_zero() && self.log_coefficient.is_zero() && self.tail.is_zero()
    }
}

/// `a theta_z + b theta_x + c`.
fn affine(f: &LogSeries, a: i64, b: i64, c: i64) -> LogSeries {
    f.theta_z().scale(&Rat::int(a)).add(&f.theta_x().scale(&Rat::int(b))).add(&f.scale(&Rat::int(c)))
}

/// `L_c = theta^3 + 3 z theta (3 theta + 1)(3 theta + 2)`.
pub fn closed_operator(f: &LogSeries) -> LogSeries {
    let cube = f.theta_z().theta_z().theta_z();
    let inner = affine(&affine(f, 3, 0, 2), 3, 0, 1).theta_z();
    cube.add(&inner.shift(0, 1).scale(&Rat::int(3)))
}

/// `L_oc^(1) = theta^2 (theta - theta_o) + z (3 theta - theta_o)(3 theta - theta_o + 1)(3 theta - theta_o + 2)`.
pub fn open_closed_operator_1(f: &LogSeries) -> LogSeries {
    let first = affine(f, 1, -1, 0).theta_z().theta_z();
    let second = affine(&affine(&affine(f, 3, -1, 2), 3, -1, 1), 3, -1, 0);
    first.add(&second.shift(0, 1))
}

/// `L_oc^(2) = (theta_o - 3 theta) theta_o - x (theta_o - theta) theta_o`.
pub fn open_closed_operator_2(f: &LogSeries) -> LogSeries {
    let tho = f.theta_x();
    let first = affine(&tho, -3, 1, 0);
    let second = affine(&tho, -1, 1, 0).shift(1, 0);
    first.add(&second.scale(&Rat::int(-1)))
}

/// Residuals of the Lerche-Mayr operators on the logarithmic solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmReport {
    pub order: u32,
    pub closed: LogSeries,
    pub open_closed_1: LogSeries,
    pub open_closed_2: LogSeries,
}

impl LmReport {
    pub fn ok(&self) -> bool {
        self.closed.is_zero() && self.open_closed_1.is_zero() && self.open_closed_2.is_zero()
    }
}

/// Applies `L_c` to `log z + F` and both open-closed operators to
/// `log x - F/3`, through `z^n`.
pub fn lm_operator_check(n: u32) -> Result<LmReport, MirrorError> {
    if n < 2 {
        return Err(MirrorError::BadInput(String::from("order must be at least 2")));
    }
    let f = hypergeometric_tail(n as i32, n as i32);
    let closed_sol = LogSeries::new(Rat::zero(), Rat::one(), f.clone());
    let open_sol = LogSeries::new(Rat::one(), Rat::zero(), f.scale(&Rat::new(-1, 3)));
    Ok(LmReport {
        order: n,
        closed: closed_operator(&closed_sol),
        open_closed_1: open_closed_operator_1(&open_sol),
        open_closed_2: open_closed_operator_2(&open_sol),
    })
}

/// The disk potential `sum_{n > m >= 0} (-1)^m (n-m-1)! / (n (n-3m)! (m!)^2) x^n z^m`,
/// `n <= order_x`, `m <= order_z`; terms with `n < 3m` are left out.
pub fn lm_potential(order_x: u32, order_z: u32) -> Series {
    let mut s = Series::zero(0, order_z as i32, 0);
    for n in 1..=order_x as i64 {
        for m in 0..n.min(order_z as i64 + 1) {
            if n - 3 * m < 0 {
                continue;
            }
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let c = Rat::int(sign) * Rat::factorial((n - m - 1) as u32)
                / (Rat::int(n) * Rat::factorial((n - 3 * m) as u32) * Rat::factorial(m as u32).pow(2));
            s.add_term(Mono::xyt(n as i32, 0, m as i32), c);
        }
    }
    s
}

/// Winding-one part of the potential after `x = U M(Q)`, `z = z(Q)`: the
/// coefficient of `U^1` as a series in `Q`.
pub fn lm_winding_one(order: u32) -> Result<Series, MirrorError> {
    let maps = open_closed_maps(order)?;
    let pot = lm_potential(1, order);
    let mut x1 = Series::zero(0, order as i32, 0);
    for (m, c) in pot.iter() {
        if m.a == 1 {
            x1.add_term(Mono::t(m.d), c.clone());
        }
    }
    let zq = maps.z_of_q.clone();
    // the x^1 part is a power series in z; substitute and multiply by M
    let sub = if x1.iter().all(|(m, _)| m.d == 0) { x1.clone() } else { x1.compose(&zq)? };
    Ok(&sub * &maps.m)
}

/// Outcome of comparing `W / y` with `M(Q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub order: u32,
    /// `(k, coefficient read from W with the sign of Q^k, coefficient of M)`.
    pub compared: Vec<(u32, Rat, Rat)>,
}

impl TheoremReport {
    pub fn ok(&self) -> bool {
        self.compared.iter().all(|(_, a, b)| a == b)
    }

    pub fn first_mismatch(&self) -> Option<&(u32, Rat, Rat)> {
        self.compared.iter().find(|(_, a, b)| a != b)
    }
}

/// Substitutes `Q = -t^3 y^-3` in `W / y` (local P^2) and compares with
/// `M(Q)` through `Q^order`. Classes in `W` are summed over.
pub fn theorem_check(w: &Series, order: u32) -> Result<TheoremReport, MirrorError> {
    if w.t_cut() < 3 * order as i32 {
        return Err(MirrorError::BadInput(alloc::format!("W is cut at t^{} but order {} needs t^{}", w.t_cut(), order, 3 * order)));
    }
    let m = if order == 0 { Series::one(0, 0, 0) } else { open_closed_maps(order)?.m };
    let w = w.forget_classes();
    let mut compared = Vec::new();
    for k in 0..=order {
        let d = 3 * k as i32;
        let got = w.coeff(&Mono::xyt(0, 1 - d, d));
        let signed = if k % 2 == 0 { got } else { -got };
        compared.push((k, signed, m.t_coeff(k as i32)));
    }
    Ok(TheoremReport { order, compared })
}

/// `N(g, p)`: the `h^{2g}` coefficient of `((-1)^{p+1}/p) i h / (q^{p/2} - q^{-p/2})`.
pub fn n_gp(g: u32, p: i64) -> Rat {
    assert!(p >= 1, "p must be positive");
    n_gp_kernel(p, 2 * g).coeff(&Mono::hbar(2 * g))
}

/// The genus-0 value as stated in prose, `(-1)^{p+1}/p`; agrees with
/// `n_gp(0, p)` only for `p = 1`.
pub fn n_gp_stated_genus0(p: i64) -> Rat {
    Rat::new(if p % 2 == 1 { 1 } else { -1 }, p)
}

/// Inputs for the blow-up convolutions, for one class `beta` of `X` and
/// its partner class on the blow-up.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlowupTable {
    /// `R^g_{p_1..p_r, q}(X, beta)` keyed by sorted point tangencies and genus.
    pub multi_point: BTreeMap<(Vec<i64>, u32), Rat>,
    /// `R^g(X^, pi^* beta - C)` keyed by genus.
    pub blown_up: BTreeMap<u32, Rat>,
}

impl BlowupTable {
    fn multi(&self, ps: &[i64], g: u32) -> Result<Rat, MirrorError> {
        let mut key = ps.to_vec();
        key.sort_unstable();
        self.multi_point.get(&(key.clone(), g)).cloned().ok_or_else(|| MirrorError::MissingEntry(alloc::format!("R^{}_{:?}", g, key)))
    }

    fn blown(&self, g: u32) -> Result<Rat, MirrorError> {
        self.blown_up.get(&g).cloned().ok_or_else(|| MirrorError::MissingEntry(alloc::format!("R^{} of the blow-up", g)))
    }
}

/// Which convolution to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlowupMode {
    /// `R^g(X^, pi^* beta - p C)` from multi-point invariants of `X`.
    Thm64 { p: i64, genus: u32 },
    /// `R^g(X^, pi^* beta - C) = sum R^{g0}_{1,q} N(g1, 1)`.
    Cor65 { genus: u32 },
    /// `R^g_{1,d}(X) = sum R^{g1}_d(X^) (-1/4)^{g2} / (2 g2 + 1)!`.
    Cor710 { genus: u32 },
}

fn compositions(p: i64) -> Vec<Vec<i64>> {
    if p == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=p {
        for mut rest in compositions(p - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn genus_splits(g: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return alloc::vec![alloc::vec![g]];
    }
    let mut out = Vec::new();
    for first in 0..=g {
        for mut rest in genus_splits(g - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn blowup_convolution(table: &BlowupTable, mode: BlowupMode) -> Result<Rat, MirrorError> {
    match mode {
        BlowupMode::Thm64 { p, genus } => {
            if p < 1 {
                return Err(MirrorError::BadInput(String::from("p must be positive")));
            }
            let mut total = Rat::zero();
            for comp in compositions(p) {
                let r = comp.len();
                let weight = comp.iter().fold(Rat::one(), |acc, v| acc * Rat::int(*v)) / Rat::factorial(r as u32);
                for gs in genus_splits(genus, r + 1) {
                    let mut term = &weight * &table.multi(&comp, gs[0])?;
                    for (pi, gi) in comp.iter().zip(&gs[1..]) {
                        term *= &n_gp(*gi, *pi);
                    }
                    total += &term;
                }
            }
            Ok(total)
        }
        BlowupMode::Cor65 { genus } => {
            let mut total = Rat::zero();
            for g0 in 0..=genus {
                total += &(table.multi(&[1], g0)? * n_gp(genus - g0, 1));
            }
            Ok(total)
        }
        BlowupMode::Cor710 { genus } => {
            let mut total = Rat::zero();
            for g1 in 0..=genus {
                let g2 = genus - g1;
                let f = Rat::new(-1, 4).pow(g2 as i32) / Rat::factorial(2 * g2 + 1);
                total += &(table.blown(g1)? * f);
            }
            Ok(total)
        }
    }
}

/// Gopakumar-Vafa transforms and the genus-1 log invariant of `dL - C` on `F_1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GvCheck {
    pub n0: Rat,
    pub n1: Rat,
    /// `R^1_{3d-1}(F_1, dL - C)`.
    pub r_genus1: Rat,
}

/// `N^0 = n^0`, `N^1 = n^1 + n^0/12`, and with `e = 3d - 1 = gamma.E`,
/// `R^1 = (-1)^{e+1} e (N^1 - e^2 N^0 / 24)`.
pub fn gv_crosscheck(n0: &Rat, n1: &Rat, d: i64) -> GvCheck {
    assert!(d >= 1, "degree must be positive");
    let big0 = n0.clone();
    let big1 = n1 + &(n0 * &Rat::new(1, 12));
    let e = 3 * d - 1;
    let sign = if e % 2 == 1 { 1 } else { -1 };
    let r = Rat::int(sign * e) * (&big1 - &(&big0 * &Rat::new(e * e, 24)));
    GvCheck { n0: big0, n1: big1, r_genus1: r }
}

/// `R(X^, gamma) = (-1)^{d+1} d N(gamma)`.
pub fn ggr_check(r: &Rat, n_local: &Rat, d: i64) -> bool {
    let sign = if d % 2 == 1 { 1 } else { -1 };
    *r == Rat::int(sign * d) * n_local.clone()
}
