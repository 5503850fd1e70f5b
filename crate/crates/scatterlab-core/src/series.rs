//! Truncated multivariate Laurent series in `x`, `y`, `t`, a class vector `s^c`
//! and `h` (standing for ħ), with exact rational coefficients.
//!
//! Single-variable series (`z`, `Q`, ...) live on the `t` axis.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::rat::{binomial, Rat};

/// Largest supported Picard rank.
pub const MAX_RANK: usize = 3;

/// Stand-in for "no truncation" on the `t` axis.
pub const NO_CUT: i32 = i32::MAX / 4;

/// Exponent tuple of a single monomial `x^a y^b t^d s^c h^h`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono {
    pub a: i32,
    pub b: i32,
    pub d: i32,
    pub c: [i32; MAX_RANK],
    pub h: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { a: 0, b: 0, d: 0, c: [0; MAX_RANK], h: 0 };

    pub fn xy(a: i32, b: i32) -> Mono {
        Mono { a, b, ..Mono::ONE }
    }

    pub fn xyt(a: i32, b: i32, d: i32) -> Mono {
        Mono { a, b, d, ..Mono::ONE }
    }

    /// `t^d`, the convention for single-axis series.
    pub fn t(d: i32) -> Mono {
        Mono { d, ..Mono::ONE }
    }

    pub fn hbar(h: u32) -> Mono {
        Mono { h, ..Mono::ONE }
    }

    pub fn with_class(mut self, c: &[i32]) -> Mono {
        for (slot, v) in self.c.iter_mut().zip(c) {
            *slot = *v;
        }
        self
    }

    pub fn is_one(&self) -> bool {
        *self == Mono::ONE
    }

    pub fn times(&self, o: &Mono) -> Mono {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c.iter()) {
            *x += *y;
        }
        Mono { a: self.a + o.a, b: self.b + o.b, d: self.d + o.d, c, h: self.h + o.h }
    }

    /// The inverse monomial; ħ must be absent.
    pub fn inverse(&self) -> Mono {
        debug_assert_eq!(self.h, 0);
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = -*x;
        }
        Mono { a: -self.a, b: -self.b, d: -self.d, c, h: 0 }
    }

    /// Integer power; negative powers require `h == 0`.
    pub fn power(&self, n: i32) -> Mono {
        assert!(n >= 0 || self.h == 0, "negative power of a monomial with hbar");
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= n;
        }
        Mono { a: self.a * n, b: self.b * n, d: self.d * n, c, h: (self.h as i64 * n as i64) as u32 }
    }

    /// Lattice exponent `(a, b)`.
    pub fn m(&self) -> (i32, i32) {
        (self.a, self.b)
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Mono) -> Ordering {
        self.d
            .cmp(&o.d)
            .then(self.h.cmp(&o.h))
            .then(o.b.cmp(&self.b))
            .then(self.a.cmp(&o.a))
            .then(self.c.cmp(&o.c))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Mono) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Failures of series operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeriesError {
    RankMismatch(usize, usize),
    NotInvertible(String),
    ConstantTerm(String),
    LeadingTerm(String),
    Parse(String),
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::RankMismatch(a, b) => write!(f, "class rank mismatch: {} vs {}", a, b),
            SeriesError::NotInvertible(s) => write!(f, "not invertible: {}", s),
            SeriesError::ConstantTerm(s) => write!(f, "constant term violation: {}", s),
            SeriesError::LeadingTerm(s) => write!(f, "wrong leading term: {}", s),
            SeriesError::Parse(s) => write!(f, "parse error: {}", s),
        }
    }
}

/// A truncated Laurent series.
///
/// Stored terms always satisfy `d <= t_cut`, `h <= h_cut` and, when a window
/// `(lo, hi)` is set, `lo <= a <= hi`. Iteration follows the `Mono` order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    terms: BTreeMap<Mono, Rat>,
    t_cut: i32,
    h_cut: u32,
    x_window: Option<(i32, i32)>,
    rank: usize,
}

impl Series {
    pub fn zero(rank: usize, t_cut: i32, h_cut: u32) -> Series {
        assert!(rank <= MAX_RANK, "class rank above {}", MAX_RANK);
        Series { terms: BTreeMap::new(), t_cut, h_cut, x_window: None, rank }
    }

    pub fn one(rank: usize, t_cut: i32, h_cut: u32) -> Series {
        Series::monomial(rank, t_cut, h_cut, Mono::ONE, Rat::one())
    }

    pub fn monomial(rank: usize, t_cut: i32, h_cut: u32, m: Mono, c: Rat) -> Series {
        let mut s = Series::zero(rank, t_cut, h_cut);
        s.add_term(m, c);
        s
    }

    /// Builds a series from `(coefficient, monomial)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (Rat, Mono)>>(rank: usize, t_cut: i32, h_cut: u32, it: I) -> Series {
        let mut s = Series::zero(rank, t_cut, h_cut);
        for (c, m) in it {
            s.add_term(m, c);
        }
        s
    }

    /// Single-axis series `sum c_k t^k` from a coefficient list starting at `t^0`.
    pub fn from_coeffs(coeffs: &[Rat], t_cut: i32) -> Series {
        let mut s = Series::zero(0, t_cut, 0);
        for (k, c) in coeffs.iter().enumerate() {
            s.add_term(Mono::t(k as i32), c.clone());
        }
        s
    }

    pub fn with_window(mut self, lo: i32, hi: i32) -> Series {
        assert!(lo <= hi);
        self.x_window = Some((lo, hi));
        self.terms.retain(|m, _| lo <= m.a && m.a <= hi);
        self
    }

    pub fn without_window(mut self) -> Series {
        self.x_window = None;
        self
    }

    pub fn t_cut(&self) -> i32 {
        self.t_cut
    }

    pub fn h_cut(&self) -> u32 {
        self.h_cut
    }

    pub fn x_window(&self) -> Option<(i32, i32)> {
        self.x_window
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(&Mono::ONE).is_one()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&Mono::ONE)
    }

    fn admits(&self, m: &Mono) -> bool {
        if m.d > self.t_cut || m.h > self.h_cut {
            return false;
        }
        match self.x_window {
            Some((lo, hi)) => lo <= m.a && m.a <= hi,
            None => true,
        }
    }

    /// Adds `c * m`, dropping it silently if it lies outside the cuts.
    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() || !self.admits(&m) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn empty_like(&self, o: &Series) -> Series {
        let x_window = match (self.x_window, o.x_window) {
            (Some((a, b)), Some((c, d))) => Some((a.max(c), b.min(d))),
            (Some(w), None) | (None, Some(w)) => Some(w),
            (None, None) => None,
        };
        Series {
            terms: BTreeMap::new(),
            t_cut: self.t_cut.min(o.t_cut),
            h_cut: self.h_cut.min(o.h_cut),
            x_window,
            rank: self.rank,
        }
    }

    fn check_rank(&self, o: &Series) -> Result<(), SeriesError> {
        if self.rank != o.rank {
            Err(SeriesError::RankMismatch(self.rank, o.rank))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, o: &Series) -> Result<Series, SeriesError> {
        self.check_rank(o)?;
        let mut r = self.empty_like(o);
        for (m, c) in self.terms.iter().chain(o.terms.iter()) {
            r.add_term(*m, c.clone());
        }
        Ok(r)
    }

    pub fn try_sub(&self, o: &Series) -> Result<Series, SeriesError> {
        self.try_add(&o.neg_ref())
    }

    pub fn try_mul(&self, o: &Series) -> Result<Series, SeriesError> {
        self.check_rank(o)?;
        let mut r = self.empty_like(o);
        for (m1, c1) in self.terms.iter() {
            for (m2, c2) in o.terms.iter() {
                let m = m1.times(m2);
                if r.admits(&m) {
                    r.add_term(m, c1 * c2);
                }
            }
        }
        Ok(r)
    }

    fn neg_ref(&self) -> Series {
        let mut r = self.clone();
        for v in r.terms.values_mut() {
            *v = -&*v;
        }
        r
    }

    pub fn scale(&self, k: &Rat) -> Series {
        let mut r = self.clone();
        if k.is_zero() {
            r.terms.clear();
            return r;
        }
        for v in r.terms.values_mut() {
            *v *= k;
        }
        r
    }

    /// Multiplies by the single term `c * m`.
    pub fn mul_mono(&self, m: &Mono, c: &Rat) -> Series {
        let mut r = Series { terms: BTreeMap::new(), ..*self };
        if c.is_zero() {
            return r;
        }
        for (m1, c1) in self.terms.iter() {
            r.add_term(m1.times(m), c1 * c);
        }
        r
    }

    /// Re-truncates to tighter cuts.
    pub fn truncate(&self, t_cut: i32, h_cut: u32) -> Series {
        let mut r = Series { terms: BTreeMap::new(), t_cut: t_cut.min(self.t_cut), h_cut: h_cut.min(self.h_cut), ..*self };
        for (m, c) in self.terms.iter() {
            r.add_term(*m, c.clone());
        }
        r
    }

    /// Same terms under new cuts, which may be looser.
    pub fn with_cuts(&self, t_cut: i32, h_cut: u32) -> Series {
        let mut r = Series { terms: BTreeMap::new(), t_cut, h_cut, ..*self };
        for (m, c) in self.terms.iter() {
            r.add_term(*m, c.clone());
        }
        r
    }

    /// Applies `f` to every exponent tuple and re-collects.
    pub fn map_monos<F: Fn(&Mono) -> Mono>(&self, f: F) -> Series {
        let mut r = Series { terms: BTreeMap::new(), ..*self };
        for (m, c) in self.terms.iter() {
            r.add_term(f(m), c.clone());
        }
        r
    }

    /// Drops curve classes, giving a rank-0 series.
    pub fn forget_classes(&self) -> Series {
        let mut r = Series { terms: BTreeMap::new(), rank: 0, ..*self };
        for (m, c) in self.terms.iter() {
            r.add_term(Mono { c: [0; MAX_RANK], ..*m }, c.clone());
        }
        r
    }

    /// Keeps only the terms satisfying `keep`.
    pub fn filter<F: Fn(&Mono, &Rat) -> bool>(&self, keep: F) -> Series {
        let mut r = self.clone();
        r.terms.retain(|m, c| keep(m, c));
        r
    }

    /// Smallest `t`-order present.
    pub fn min_t(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.d).min()
    }

    /// Whether a retained term sits on the edge of the `x` window.
    pub fn touches_window(&self) -> bool {
        match self.x_window {
            Some((lo, hi)) => self.terms.keys().any(|m| m.a == lo || m.a == hi),
            None => false,
        }
    }

    fn nilpotent_term(&self, m: &Mono) -> bool {
        m.d > 0 || m.h > 0 || (self.x_window.is_some() && m.a < 0)
    }

    /// `self^n`. Negative powers factor the series as `u(1 + N)` with `u` a
    /// monomial of least `t`-order and `N` topologically nilpotent.
    pub fn pow_int(&self, n: i64) -> Result<Series, SeriesError> {
        if n >= 0 {
            return Ok(self.pow_nat(n as u64));
        }
        let (u, uc) = self.unit_part()?;
        let k = (-n) as i32;
        let u_pow = u.power(-k);
        let shift_t = u_pow.d;
        let shift_a = u_pow.a;
        let mut rel = Series {
            terms: BTreeMap::new(),
            t_cut: self.t_cut.saturating_sub(shift_t),
            h_cut: self.h_cut,
            x_window: self.x_window.map(|(lo, hi)| (lo - shift_a, hi - shift_a)),
            rank: self.rank,
        };
        let inv_u = u.inverse();
        let inv_c = uc.recip();
        for (m, c) in self.terms.iter() {
            if *m == u {
                continue;
            }
            rel.add_term(m.times(&inv_u), c * &inv_c);
        }
        for m in rel.terms.keys() {
            if !rel.nilpotent_term(m) {
                return Err(SeriesError::NotInvertible(alloc::format!("{}", self)));
            }
        }
        // (1 + N)^{-k} = sum_j C(-k, j) N^j
        let mut acc = Series::one(self.rank, rel.t_cut, rel.h_cut);
        acc.x_window = rel.x_window;
        let mut nj = acc.clone();
        let mut j = 0u32;
        loop {
            j += 1;
            nj = &nj * &rel;
            if nj.is_zero() {
                break;
            }
            acc = &acc + &nj.scale(&binomial(-(k as i64), j));
            if j > 100_000 {
                return Err(SeriesError::NotInvertible(String::from("expansion does not terminate")));
            }
        }
        let mut out = Series { terms: BTreeMap::new(), ..*self };
        let coef = inv_c.pow(k);
        for (m, c) in acc.terms.iter() {
            out.add_term(m.times(&u_pow), c * &coef);
        }
        Ok(out)
    }

    fn unit_part(&self) -> Result<(Mono, Rat), SeriesError> {
        let min_d = self
            .terms
            .keys()
            .filter(|m| m.h == 0)
            .map(|m| m.d)
            .min()
            .ok_or_else(|| SeriesError::NotInvertible(alloc::format!("{}", self)))?;
        let lead: Vec<(&Mono, &Rat)> = self.terms.iter().filter(|(m, _)| m.h == 0 && m.d == min_d).collect();
        let pick = if lead.len() == 1 {
            lead[0]
        } else if self.x_window.is_some() {
            // descending powers of x
            *lead.iter().max_by_key(|(m, _)| m.a).unwrap()
        } else {
            return Err(SeriesError::NotInvertible(alloc::format!("{}", self)));
        };
        Ok((*pick.0, pick.1.clone()))
    }

    fn pow_nat(&self, mut n: u64) -> Series {
        let mut base = self.clone();
        let mut acc = Series { terms: BTreeMap::new(), ..*self };
        acc.add_term(Mono::ONE, Rat::one());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn check_nilpotent(&self, what: &str) -> Result<(), SeriesError> {
        for m in self.terms.keys() {
            if !(m.d > 0 || m.h > 0) {
                return Err(SeriesError::ConstantTerm(alloc::format!("{} argument has non-positive order term in {}", what, self)));
            }
        }
        Ok(())
    }

    /// `exp(self)`; requires every term to have positive `t`- or ħ-order.
    pub fn exp(&self) -> Result<Series, SeriesError> {
        self.check_nilpotent("exp")?;
        let mut acc = Series::one(self.rank, self.t_cut, self.h_cut);
        acc.x_window = self.x_window;
        let mut term = acc.clone();
        let mut k = 0i64;
        loop {
            k += 1;
            term = (&term * self).scale(&Rat::new(1, k));
            if term.is_zero() {
                return Ok(acc);
            }
            acc = &acc + &term;
        }
    }

    /// `log(self)`; requires constant term exactly 1.
    pub fn log(&self) -> Result<Series, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::ConstantTerm(alloc::format!("log needs constant term 1 in {}", self)));
        }
        let mut n = self.clone();
        n.terms.remove(&Mono::ONE);
        n.check_nilpotent("log")?;
        let mut acc = Series { terms: BTreeMap::new(), ..*self };
        let mut p = n.clone();
        let mut k = 1i64;
        while !p.is_zero() {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = &acc + &p.scale(&Rat::new(sign, k));
            p = &p * &n;
            k += 1;
        }
        Ok(acc)
    }

    fn is_single_axis(&self) -> bool {
        self.terms.keys().all(|m| m.a == 0 && m.b == 0 && m.h == 0 && m.c.iter().all(|v| *v == 0))
    }

    /// Coefficient of `t^k` in a single-axis series.
    pub fn t_coeff(&self, k: i32) -> Rat {
        self.coeff(&Mono::t(k))
    }

    /// Coefficients of `t^0 .. t^n` in a single-axis series.
    pub fn t_coeffs(&self, n: i32) -> Vec<Rat> {
        (0..=n).map(|k| self.t_coeff(k)).collect()
    }

    /// `self(g)` for single-axis `self` and `g` with no constant term.
    pub fn compose(&self, g: &Series) -> Result<Series, SeriesError> {
        if !self.is_single_axis() {
            return Err(SeriesError::LeadingTerm(String::from("compose needs a single-axis outer series")));
        }
        if !g.constant_term().is_zero() {
            return Err(SeriesError::ConstantTerm(String::from("inner series has a constant term")));
        }
        if self.terms.keys().any(|m| m.d < 0) {
            return Err(SeriesError::LeadingTerm(String::from("compose needs a power series")));
        }
        let top = self.terms.keys().map(|m| m.d).max().unwrap_or(0);
        let cut = self.t_cut.min(g.t_cut);
        let mut acc = Series::zero(g.rank, cut, g.h_cut);
        for k in (0..=top).rev() {
            acc = &(&acc * g) + &Series::monomial(g.rank, cut, g.h_cut, Mono::ONE, self.t_coeff(k));
        }
        Ok(acc)
    }

    /// Compositional inverse of a single-axis series `t + O(t^2)`.
    pub fn invert_series(&self) -> Result<Series, SeriesError> {
        if !self.is_single_axis() {
            return Err(SeriesError::LeadingTerm(String::from("inversion needs a single-axis series")));
        }
        if !self.t_coeff(0).is_zero() || !self.t_coeff(1).is_one() || self.terms.keys().any(|m| m.d < 0) {
            return Err(SeriesError::LeadingTerm(alloc::format!("expected t + O(t^2), got {}", self)));
        }
        let tail = self.filter(|m, _| m.d >= 2);
        let t = Series::monomial(0, self.t_cut, 0, Mono::t(1), Rat::one());
        let mut g = t.clone();
        // each pass of g = t - tail(g) fixes one more order
        for _ in 0..self.t_cut.max(1) {
            g = &t - &tail.compose(&g)?;
        }
        let check = self.compose(&g)?;
        if check != t {
            return Err(SeriesError::LeadingTerm(String::from("inversion failed to converge")));
        }
        Ok(g)
    }

    /// `t d/dt` applied termwise.
    pub fn theta_t(&self) -> Series {
        let mut r = self.clone();
        r.terms = self.terms.iter().filter(|(m, _)| m.d != 0).map(|(m, c)| (*m, c * &Rat::int(m.d as i64))).collect();
        r
    }

    /// `x d/dx` applied termwise.
    pub fn theta_x(&self) -> Series {
        let mut r = self.clone();
        r.terms = self.terms.iter().filter(|(m, _)| m.a != 0).map(|(m, c)| (*m, c * &Rat::int(m.a as i64))).collect();
        r
    }

    /// Sets `h = 0`.
    pub fn classical(&self) -> Series {
        self.filter(|m, _| m.h == 0).with_cuts(self.t_cut, 0)
    }

    /// Terms with `a == 0`, no class and no ħ.
    pub fn pure_y_part(&self) -> Series {
        self.filter(|m, _| m.a == 0)
    }

    /// Deterministic text rendering (same as `Display`).
    pub fn to_text(&self) -> String {
        alloc::format!("{}", self)
    }

    /// Parses the text form; cuts and rank are supplied by the caller.
    pub fn parse(s: &str, rank: usize, t_cut: i32, h_cut: u32) -> Result<Series, SeriesError> {
        let mut out = Series::zero(rank, t_cut, h_cut);
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(out);
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut rest = s;
        let mut neg = false;
        if let Some(r) = rest.strip_prefix('-') {
            neg = true;
            rest = r.trim_start();
        }
        loop {
            let plus = rest.find(" + ");
            let minus = rest.find(" - ");
            let next = match (plus, minus) {
                (Some(p), Some(m)) => Some(p.min(m)),
                (p, m) => p.or(m),
            };
            match next {
                Some(i) => {
                    pieces.push((neg, String::from(&rest[..i])));
                    neg = &rest[i..i + 3] == " - ";
                    rest = &rest[i + 3..];
                }
                None => {
                    pieces.push((neg, String::from(rest)));
                    break;
                }
            }
        }
        for (neg, body) in pieces {
            let (c, m) = parse_term(&body, rank)?;
            out.add_term(m, if neg { -c } else { c });
        }
        Ok(out)
    }
}

fn parse_term(body: &str, rank: usize) -> Result<(Rat, Mono), SeriesError> {
    let err = || SeriesError::Parse(String::from(body));
    let mut coef = Rat::one();
    let mut m = Mono::ONE;
    for f in body.split('*') {
        let f = f.trim();
        if f.is_empty() {
            return Err(err());
        }
        let first = f.as_bytes()[0];
        if first.is_ascii_digit() {
            coef = f.parse().map_err(|_| err())?;
            continue;
        }
        let (var, exp) = match f.split_once('^') {
            Some((v, e)) => (v, Some(e)),
            None => (f, None),
        };
        match var {
            "s" => {
                let e = exp.ok_or_else(err)?;
                let inner = e.strip_prefix('(').and_then(|e| e.strip_suffix(')')).ok_or_else(err)?;
                let vals: Result<Vec<i32>, _> = inner.split(',').map(|v| v.trim().parse::<i32>()).collect();
                let vals = vals.map_err(|_| err())?;
                if vals.len() != rank {
                    return Err(err());
                }
                m = m.with_class(&vals);
            }
            _ => {
                let e: i32 = match exp {
                    Some(e) => e.parse().map_err(|_| err())?,
                    None => 1,
                };
                match var {
                    "x" => m.a = e,
                    "y" => m.b = e,
                    "t" => m.d = e,
                    "h" if e >= 0 => m.h = e as u32,
                    _ => return Err(err()),
                }
            }
        }
    }
    Ok((coef, m))
}

fn write_factors(f: &mut fmt::Formatter<'_>, c: &Rat, m: &Mono, rank: usize) -> fmt::Result {
    let mut parts: Vec<String> = Vec::new();
    let mut var = |name: &str, e: i32| {
        if e == 1 {
            parts.push(String::from(name));
        } else if e != 0 {
            parts.push(alloc::format!("{}^{}", name, e));
        }
    };
    var("x", m.a);
    var("y", m.b);
    var("t", m.d);
    if m.c[..rank].iter().any(|v| *v != 0) {
        let inner: Vec<String> = m.c[..rank].iter().map(|v| alloc::format!("{}", v)).collect();
        parts.push(alloc::format!("s^({})", inner.join(",")));
    }
    if m.h == 1 {
        parts.push(String::from("h"));
    } else if m.h > 1 {
        parts.push(alloc::format!("h^{}", m.h));
    }
    if parts.is_empty() {
        write!(f, "{}", c)
    } else if c.is_one() {
        write!(f, "{}", parts.join(" * "))
    } else {
        write!(f, "{} * {}", c, parts.join(" * "))
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write_factors(f, &a, m, self.rank)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [t<={}, h<={}]", self, self.t_cut, self.h_cut)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, o: &Series) -> Series {
        self.try_add(o).expect("series add")
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, o: &Series) -> Series {
        self.try_sub(o).expect("series sub")
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, o: &Series) -> Series {
        self.try_mul(o).expect("series mul")
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.neg_ref()
    }
}

/// `(q^{m/2} - q^{-m/2}) / (i h)` with `q = e^{i h}`, as an even series in `h`.
pub fn vertex_kernel(m: i64, h_cut: u32) -> Series {
    let mut s = Series::zero(0, NO_CUT, h_cut);
    let m = Rat::int(m);
    let mut j = 0u32;
    while 2 * j <= h_cut {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let c = Rat::int(sign) * m.pow(2 * j as i32 + 1) / (Rat::int(4).pow(j as i32) * Rat::factorial(2 * j + 1));
        s.add_term(Mono::hbar(2 * j), c);
        j += 1;
    }
    s
}

/// `((-1)^{w+1}/w) * i h / (q^{w/2} - q^{-w/2})`.
pub fn leg_kernel(w: i64, h_cut: u32) -> Series {
    assert!(w > 0, "leg weight must be positive");
    let sign = if w % 2 == 1 { 1 } else { -1 };
    vertex_kernel(w, h_cut)
        .pow_int(-1)
        .expect("vertex kernel is a unit")
        .scale(&Rat::new(sign, w))
}

/// The multiple-cover kernel; same expression as the leg factor.
pub fn n_gp_kernel(p: i64, h_cut: u32) -> Series {
    leg_kernel(p, h_cut)
}

/// `cos(k h / 2)` expanded in `h`, i.e. the real part of `q^{k/2}`.
pub fn half_power_cos(k: i64, h_cut: u32) -> Series {
    let mut s = Series::zero(0, NO_CUT, h_cut);
    let mut j = 0u32;
    let half = Rat::new(k, 2);
    while 2 * j <= h_cut {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        s.add_term(Mono::hbar(2 * j), Rat::int(sign) * half.pow(2 * j as i32) / Rat::factorial(2 * j));
        j += 1;
    }
    s
}

/// The q-refined slab function: `exp(sum_k (-1)^{k+1} a^k s^{k beta} z^{k m} / vertex(k))`.
pub fn qlog_slab(a: &Rat, beta: &[i32], m: &Mono, rank: usize, t_cut: i32, h_cut: u32) -> Series {
    assert!(m.d > 0, "q-refined slab functions need a monomial of positive t-order");
    let base = Mono { c: [0; MAX_RANK], h: 0, ..*m }.with_class(beta);
    let mut log = Series::zero(rank, t_cut, h_cut);
    let mut k = 1i64;
    while base.d * (k as i32) <= t_cut {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        let inv = vertex_kernel(k, h_cut).pow_int(-1).expect("unit");
        let coef = Rat::int(sign) * a.pow(k as i32);
        let mono = base.power(k as i32);
        for (hm, hc) in inv.iter() {
            log.add_term(mono.times(hm), &coef * hc);
        }
        k += 1;
    }
    log.exp().expect("positive order")
}

/// Conjugation factor of the q-refined slab function on a monomial with pairing `k`:
/// `exp(sum_w (-1)^{w+1}/w * [k w]_q/[w]_q * a^w s^{w beta} z^{w m})`.
/// At `h = 0` this is `(1 + a s^beta z^m)^k`; for `k = 1` it is that exactly.
pub fn quantum_power(a: &Rat, beta: &[i32], m: &Mono, k: i64, rank: usize, t_cut: i32, h_cut: u32) -> Series {
    assert!(m.d > 0, "q-refined slab powers need a monomial of positive t-order");
    if k == 0 {
        return Series::one(rank, t_cut, h_cut);
    }
    let base = Mono { c: [0; MAX_RANK], h: 0, ..*m }.with_class(beta);
    let mut log = Series::zero(rank, t_cut, h_cut);
    let mut w = 1i64;
    while base.d * (w as i32) <= t_cut {
        let mono = base.power(w as i32);
        let ratio = &vertex_kernel(k * w, h_cut) * &vertex_kernel(w, h_cut).pow_int(-1).expect("unit");
        let sign = if w % 2 == 1 { 1 } else { -1 };
        let coef = Rat::new(sign, w) * a.pow(w as i32);
        for (hm, hc) in ratio.iter() {
            log.add_term(mono.times(hm), &coef * hc);
        }
        w += 1;
    }
    log.exp().expect("positive order")
}

/// Coefficients (as ħ-series) of `z^{j m}`, `j = 0..=jmax`, in `quantum_power` with `a = 1`.
pub fn quantum_bend_coeffs(k: i64, jmax: u32, h_cut: u32) -> Vec<Series> {
    let f = quantum_power(&Rat::one(), &[], &Mono::t(1), k, 0, jmax as i32, h_cut);
    (0..=jmax as i32)
        .map(|j| {
            let mut s = Series::zero(0, NO_CUT, h_cut);
            for (m, c) in f.iter().filter(|(m, _)| m.d == j) {
                s.add_term(Mono::hbar(m.h), c.clone());
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, t: i32) -> Series {
        Series::parse(s, 0, t, 0).unwrap()
    }

    #[test]
    fn binomial_square() {
        let a = p("1 + x * t", 10);
        assert_eq!((&a * &a).to_text(), "1 + 2 * x * t + x^2 * t^2");
    }

    #[test]
    fn appendix_expansion_step() {
        let f3 = p("1 + x^-1 * y^-3 * t^3", 6);
        let lead = p("x^-1 * y^-2 * t^3", 6);
        let prod = &lead * &f3.pow_int(5).unwrap();
        assert_eq!(prod.coeff(&Mono::xyt(-2, -5, 6)), Rat::int(5));
    }

    #[test]
    fn window_geometric_series() {
        let s = p("1 + x^-1", 0).with_window(-3, 0);
        assert_eq!(s.pow_int(-1).unwrap().to_text(), "-x^-3 + x^-2 - x^-1 + 1");
    }

    #[test]
    fn square_mod_t7() {
        let f = p("1 + x * y^-3 * t^3", 6);
        assert_eq!(f.pow_int(2).unwrap().to_text(), "1 + 2 * x * y^-3 * t^3 + x^2 * y^-6 * t^6");
    }

    #[test]
    fn w2_reduction() {
        let f2 = p("1 + x * y^-3 * t^3", 12);
        let w = p("y + x * y^-2 * t^3", 12);
        let r = &w * &f2.pow_int(-1).unwrap();
        assert_eq!(r.to_text(), "y");
    }

    #[test]
    fn cross_y_over_f2() {
        let f2 = p("1 + x * y^-3 * t^3", 6);
        let y = p("y", 6);
        let r = &y * &f2.pow_int(-1).unwrap();
        assert_eq!(r.to_text(), "y - x * y^-2 * t^3 + x^2 * y^-5 * t^6");
    }

    #[test]
    fn mercator() {
        let s = Series::parse("1 + 2 * x * t", 0, 4, 0).unwrap();
        let l = s.log().unwrap();
        assert_eq!(l.to_text(), "2 * x * t - 2 * x^2 * t^2 + 8/3 * x^3 * t^3 - 4 * x^4 * t^4");
        assert_eq!(l.exp().unwrap(), s);
    }

    #[test]
    fn exp_zero_is_one() {
        assert!(Series::zero(0, 5, 0).exp().unwrap().is_one());
    }

    #[test]
    fn exp_rejects_constant() {
        assert!(p("1 + t", 5).exp().is_err());
        assert!(p("2 + t", 5).log().is_err());
    }

    #[test]
    fn catalan_inversion() {
        let s = p("t + t^2", 5);
        let g = s.invert_series().unwrap();
        assert_eq!(g.t_coeffs(5), [0, 1, -1, 2, -5, 14].map(Rat::int).to_vec());
        let id = p("t", 5);
        assert_eq!(id.invert_series().unwrap(), id);
    }

    #[test]
    fn inversion_rejects_bad_lead() {
        assert!(p("2 * t", 4).invert_series().is_err());
    }

    #[test]
    fn rank_mismatch() {
        let a = Series::one(1, 3, 0);
        let b = Series::one(2, 3, 0);
        assert_eq!(a.try_mul(&b), Err(SeriesError::RankMismatch(1, 2)));
    }

    #[test]
    fn text_roundtrip_with_class_and_h() {
        let s = Series::parse("-3/2 * x^-1 * y^2 * t^3 * s^(1,-1) * h^2 + x - 7", 2, 10, 4).unwrap();
        let again = Series::parse(&s.to_text(), 2, 10, 4).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.to_text(), "-7 + x - 3/2 * x^-1 * y^2 * t^3 * s^(1,-1) * h^2");
    }

    #[test]
    fn cor710_kernel() {
        // (q^{1/2} - q^{-1/2})/(i h)
        let v = vertex_kernel(1, 4);
        assert_eq!(v.coeff(&Mono::hbar(2)), Rat::new(-1, 24));
        assert_eq!(v.coeff(&Mono::hbar(4)), Rat::new(1, 1920));
    }

    #[test]
    fn n_gp_one_is_reciprocal() {
        let n = n_gp_kernel(1, 4);
        assert_eq!(n.coeff(&Mono::ONE), Rat::int(1));
        assert_eq!(n.coeff(&Mono::hbar(2)), Rat::new(1, 24));
        assert_eq!(n.coeff(&Mono::hbar(4)), Rat::new(7, 5760));
        assert!((&n * &vertex_kernel(1, 4)).is_one());
    }

    #[test]
    fn two_cos_half() {
        let s = &vertex_kernel(2, 8) * &leg_kernel(1, 8);
        for g in 0..=4u32 {
            let sign = if g % 2 == 0 { 2 } else { -2 };
            let want = Rat::int(sign) / (Rat::factorial(2 * g) * Rat::int(2).pow(2 * g as i32));
            assert_eq!(s.coeff(&Mono::hbar(2 * g)), want);
        }
        assert_eq!(s, half_power_cos(1, 8).scale(&Rat::int(2)));
    }

    #[test]
    fn vertex_leg_identity() {
        for m in 1..6 {
            let sign = if m % 2 == 1 { 1 } else { -1 };
            let prod = (&vertex_kernel(m, 6) * &leg_kernel(m, 6)).scale(&Rat::int(m * sign));
            assert!(prod.is_one());
        }
    }

    #[test]
    fn qlog_classical_limit() {
        let m = Mono::xyt(1, 0, 1);
        let f = qlog_slab(&Rat::new(3, 2), &[], &m, 0, 6, 0);
        assert_eq!(f.to_text(), "1 + 3/2 * x * t");
    }

    #[test]
    fn qlog_second_order_h2() {
        // log f = z/vertex(1) - z^2/vertex(2) + ...; vertex(1)^{-1} = 1 + h^2/24, vertex(2)^{-1} = 1/2 + h^2/12
        // z^2 coefficient of exp: -(1/2 + h^2/12) + (1 + h^2/24)^2/2 = h^2/24 + O(h^4)... oracle below
        let m = Mono::xyt(1, 0, 1);
        let f = qlog_slab(&Rat::one(), &[], &m, 0, 2, 2);
        let v1 = [Rat::one(), Rat::new(1, 24)];
        let v2 = [Rat::new(1, 2), Rat::new(1, 12)];
        let sq_h2 = &v1[0] * &v1[1] * Rat::int(2);
        let want_h2 = -&v2[1] + sq_h2 * Rat::new(1, 2);
        assert_eq!(f.coeff(&Mono { h: 2, ..Mono::xyt(2, 0, 2) }), want_h2);
        assert_eq!(f.coeff(&Mono::xyt(2, 0, 2)), Rat::zero());
    }

    #[test]
    fn quantum_power_b4_bracket() {
        let m = Mono::xyt(1, 0, 1);
        let f = quantum_power(&Rat::one(), &[], &m, 2, 0, 2, 4);
        // z^m coefficient: q^{1/2} + q^{-1/2}
        let want = half_power_cos(1, 4).scale(&Rat::int(2));
        for h in [0u32, 2, 4] {
            assert_eq!(f.coeff(&Mono { h, ..m }), want.coeff(&Mono::hbar(h)));
        }
        // z^{2m}: -(q + q^-1)/2 + (q^{1/2} + q^{-1/2})^2/2 = 1
        assert_eq!(f.coeff(&Mono::xyt(2, 0, 2)), Rat::one());
        assert_eq!(f.coeff(&Mono { h: 2, ..Mono::xyt(2, 0, 2) }), Rat::zero());
    }
}
