//! Broken lines, theta functions and invariant tables.
//!
//! Lines are traced from their endpoint backwards with negated monomials.
//! Under this reversal a broken line is again a broken line for the same
//! crossing rule: the bend exponent `<n, m>` and the chosen term coefficients
//! are unchanged. A reversed trace starting at `P` with `-m_b` and escaping to
//! infinity with `z^{-q m_out}` is therefore a broken line for `theta_q` ending
//! in `z^{m_b}`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::exec::Executor;
use crate::geom::{det, det_pt, dot, intersect, neg, param_on_line, IVec, Pt};
use crate::rat::Rat;
use crate::scattering::{crossing_normal, Grading, ScatterError, ScatteringDiagram, Wall};
use crate::series::{half_power_cos, leg_kernel, quantum_bend_coeffs, vertex_kernel, Mono, Series, MAX_RANK, NO_CUT};
use crate::surface::{Cell, FanPicture};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BrokenLineError {
    /// Endpoint or trace meets a joint, wall end, singularity or cut vertex.
    NonGeneric(String),
    Scatter(ScatterError),
    Unsupported(String),
    MissingEntry(String),
}

impl fmt::Display for BrokenLineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BrokenLineError::NonGeneric(s) => write!(f, "non-generic: {}", s),
            BrokenLineError::Scatter(e) => write!(f, "{}", e),
            BrokenLineError::Unsupported(s) => write!(f, "unsupported: {}", s),
            BrokenLineError::MissingEntry(s) => write!(f, "missing table entry: {}", s),
        }
    }
}

impl From<ScatterError> for BrokenLineError {
    fn from(e: ScatterError) -> Self {
        BrokenLineError::Scatter(e)
    }
}

fn non_generic(what: &str, p: &Pt) -> BrokenLineError {
    BrokenLineError::NonGeneric(alloc::format!("{} at {:?}", what, p))
}

/// Coefficient as a polynomial in `h^2`, truncated.
#[derive(Clone, Debug, PartialEq, Eq)]
struct QCoef(Vec<Rat>);

impl QCoef {
    fn one(h_cut: u32) -> QCoef {
        let mut v = vec![Rat::zero(); h_cut as usize / 2 + 1];
        v[0] = Rat::one();
        QCoef(v)
    }

    fn from_series(s: &Series, h_cut: u32) -> QCoef {
        let mut v = vec![Rat::zero(); h_cut as usize / 2 + 1];
        for (m, c) in s.iter() {
            if m.h % 2 == 0 && (m.h as usize / 2) < v.len() {
                v[m.h as usize / 2] += c;
            }
        }
        QCoef(v)
    }

    fn scalar(c: &Rat, h_cut: u32) -> QCoef {
        let mut q = QCoef::one(h_cut);
        q.0[0] = c.clone();
        q
    }

    fn mul(&self, o: &QCoef) -> QCoef {
        let n = self.0.len();
        let mut v = vec![Rat::zero(); n];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate().take(n - i) {
                v[i + j] += &(a * b);
            }
        }
        QCoef(v)
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }
}

/// One straight piece of a broken line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    /// Start point; the unbounded first segment reports its finite end.
    pub start: Pt,
    /// Travel direction, `-m` of the attached monomial.
    pub direction: IVec,
    /// z-form monomial of the cell the segment starts in; `d` is its `t`-order.
    pub mono: Mono,
    /// Classical coefficient.
    pub coeff: Rat,
    /// Coefficient as an `h`-series (rank 0).
    pub q_coeff: Series,
}

/// A broken line ending at `endpoint`, listed from its unbounded segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrokenLine {
    pub segments: Vec<Segment>,
    pub endpoint: Pt,
    pub asymptotic_charge: i64,
}

impl BrokenLine {
    pub fn final_segment(&self) -> &Segment {
        self.segments.last().expect("broken line has segments")
    }

    /// The ending monomial with its coefficient.
    pub fn ending(&self) -> (Mono, Series) {
        let s = self.final_segment();
        (s.mono, s.q_coeff.clone())
    }
}

#[derive(Clone, Debug)]
struct Bend {
    /// where the previous piece ends, in its own frame
    before: Pt,
    point: Pt,
    cell: Cell,
    /// w-form monomial after the event
    m: IVec,
    /// the term picked at this event
    term: QCoef,
}

#[derive(Clone, Debug)]
struct Trace {
    start: Pt,
    start_cell: Cell,
    start_m: IVec,
    bends: Vec<Bend>,
    class: [i32; MAX_RANK],
    coef: QCoef,
}

#[derive(Clone, Debug)]
enum Region {
    Strips,
    Piece(i64),
}

/// State of a reversed trace.
#[derive(Clone, Debug)]
struct State {
    pt: Pt,
    region: Region,
    m: IVec,
    class: [i32; MAX_RANK],
    coef: QCoef,
    bends: Vec<Bend>,
}

enum Hit {
    Walls(Vec<usize>),
    Slab(usize),
    Cut { to: i64 },
}

/// Enumeration settings.
#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub k: u32,
    pub h_cut: u32,
    /// Safety limit on events per trace.
    pub max_events: usize,
}

impl TraceOptions {
    pub fn new(k: u32, h_cut: u32) -> TraceOptions {
        TraceOptions { k, h_cut, max_events: 4096 }
    }
}

/// Broken-line tracer bound to one diagram.
pub struct Tracer<'a> {
    s: &'a ScatteringDiagram,
    opts: TraceOptions,
    // float copies of walls and slabs: base, direction, end
    coarse: [Vec<[f64; 5]>; 2],
}

fn coarse(ws: &[Wall]) -> Vec<[f64; 5]> {
    ws.iter()
        .map(|w| [w.base.x.to_f64(), w.base.y.to_f64(), w.direction[0] as f64, w.direction[1] as f64, w.end.as_ref().map_or(f64::INFINITY, |e| e.to_f64())])
        .collect()
}

/// Float test that a ray can not meet a segment; conservative.
fn surely_missed(p: (f64, f64), v: IVec, w: &[f64; 5]) -> bool {
    let (vx, vy) = (v[0] as f64, v[1] as f64);
    let dn = vx * w[3] - vy * w[2];
    if dn == 0.0 {
        return false;
    }
    let (qx, qy) = (w[0] - p.0, w[1] - p.1);
    let s = (qx * w[3] - qy * w[2]) / dn;
    let u = (qx * vy - qy * vx) / dn;
    let tol = 1e-7 * (1.0 + s.abs() + u.abs());
    s < -tol || u < -tol || u > w[4] + tol
}

fn strip_cell(f: &FanPicture, p: &Pt, v: IVec) -> Cell {
    match f.kink_line_at(&p.x) {
        Some(n) => {
            if v[0] < 0 {
                Cell::Strip(n - 1)
            } else {
                Cell::Strip(n)
            }
        }
        None => Cell::Strip(f.strip_at(&p.x)),
    }
}

fn add_class(a: &mut [i32; MAX_RANK], b: &[i32], k: i32) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y * k;
    }
}

impl<'a> Tracer<'a> {
    pub fn new(s: &'a ScatteringDiagram, opts: TraceOptions) -> Tracer<'a> {
        Tracer { s, opts, coarse: [coarse(&s.walls), coarse(&s.slabs)] }
    }

    fn f(&self) -> &FanPicture {
        &self.s.surface
    }

    fn order(&self, e: i64, cell: Cell, m: IVec) -> i64 {
        e - self.f().phi(cell, m)
    }

    /// First hit along `p + s v`, `s > 0`, among walls and slabs.
    fn strip_event(&self, p: &Pt, v: IVec) -> Result<Option<(Rat, Hit)>, BrokenLineError> {
        let mut best: Option<Rat> = None;
        let mut hits: Vec<(bool, usize)> = Vec::new();
        let lists: [(&[Wall], bool); 2] = [(&self.s.walls, false), (&self.s.slabs, true)];
        let pf = (p.x.to_f64(), p.y.to_f64());
        for (li, (list, slab)) in lists.into_iter().enumerate() {
            for (i, w) in list.iter().enumerate() {
                if surely_missed(pf, v, &self.coarse[li][i]) {
                    continue;
                }
                let (s, u) = match intersect(p, v, &w.base, w.direction) {
                    Some(x) => x,
                    None => {
                        if let Some(u) = param_on_line(&w.base, w.direction, p) {
                            // moving along the wall's line: fail if the ray overlaps the wall
                            let forward = dot(v, w.direction) > 0;
                            let overlaps = if forward { w.end.as_ref().map_or(true, |e| &u < e) } else { u.is_positive() };
                            if overlaps {
                                return Err(non_generic("trace runs along a wall", p));
                            }
                        }
                        continue;
                    }
                };
                if !s.is_positive() || u.is_negative() {
                    continue;
                }
                if let Some(e) = &w.end {
                    if &u > e {
                        continue;
                    }
                    if &u == e {
                        return Err(non_generic("trace meets a wall end", &w.point_at(&u)));
                    }
                }
                if u.is_zero() {
                    return Err(non_generic("trace meets a wall base", &w.base));
                }
                match &best {
                    Some(b) if &s > b => continue,
                    Some(b) if &s == b => hits.push((slab, i)),
                    _ => {
                        best = Some(s);
                        hits.clear();
                        hits.push((slab, i));
                    }
                }
            }
        }
        let s = match best {
            Some(s) => s,
            None => return Ok(None),
        };
        let at = p.offset(v, &s);
        if hits.iter().any(|h| h.0) {
            if hits.len() > 1 {
                return Err(non_generic("trace meets the chain at a wall", &at));
            }
            return Ok(Some((s, Hit::Slab(hits[0].1))));
        }
        let dir0 = self.s.walls[hits[0].1].direction;
        if hits.iter().any(|h| det(self.s.walls[h.1].direction, dir0) != 0) {
            return Err(non_generic("trace passes through a joint", &at));
        }
        Ok(Some((s, Hit::Walls(hits.into_iter().map(|h| h.1).collect()))))
    }

    fn slab_index(&self, base: &Pt, dir: IVec) -> Option<usize> {
        self.s.slabs.iter().position(|w| &w.base == base && w.direction == dir)
    }

    /// Exit of piece `n` along `p + s v`.
    fn piece_event(&self, n: i64, p: &Pt, v: IVec) -> Result<(Rat, Hit), BrokenLineError> {
        let f = self.f();
        let pn = f.vertex_pt(n);
        let mid_r = f.mid(n);
        let mid_l = f.mid(n - 1);
        let c = f.centre(n);
        // (a, b, what): slab halves first, then cuts
        let edges: [(&Pt, &Pt, u8); 4] = [(&pn, &mid_r, 0), (&pn, &mid_l, 1), (&mid_r, &c, 2), (&c, &mid_l, 3)];
        let mut best: Option<(Rat, u8, Rat)> = None;
        for (a, b, what) in edges {
            let d = b - a;
            let dn = det_pt(&Pt::int(v[0], v[1]), &d);
            if dn.is_zero() {
                continue;
            }
            let q = a - p;
            let s = &det_pt(&q, &d) / &dn;
            let u = &det_pt(&q, &Pt::int(v[0], v[1])) / &dn;
            if !s.is_positive() || u.is_negative() || u > Rat::one() {
                continue;
            }
            if best.as_ref().map_or(true, |bb| s < bb.0) {
                best = Some((s, what, u));
            }
        }
        let (s, what, u) = best.ok_or_else(|| non_generic("trace leaves a piece nowhere", p))?;
        let at = p.offset(v, &s);
        if u.is_zero() || u == Rat::one() {
            return Err(non_generic("trace meets a piece corner", &at));
        }
        let hit = match what {
            0 => Hit::Slab(self.slab_index(&pn, f.edge_dir(n)).ok_or_else(|| non_generic("slab outside replicated range", &at))?),
            1 => Hit::Slab(self.slab_index(&pn, neg(f.edge_dir(n - 1))).ok_or_else(|| non_generic("slab outside replicated range", &at))?),
            2 => Hit::Cut { to: n + 1 },
            _ => Hit::Cut { to: n - 1 },
        };
        Ok((s, hit))
    }

    /// Runs all reversed traces from `p` with initial monomial `m0`.
    fn run(&self, p: &Pt, m0: IVec, e: i64, class0: [i32; MAX_RANK]) -> Result<Vec<Trace>, BrokenLineError> {
        let f = self.f();
        let start_cell = f.locate(p).ok_or_else(|| non_generic("endpoint on the chain", p))?;
        let region = match start_cell {
            Cell::Strip(_) => Region::Strips,
            Cell::Piece(n) => Region::Piece(n),
        };
        let k = self.opts.k as i64;
        let h_cut = self.opts.h_cut;
        let mut out = Vec::new();
        let mut stack = vec![State { pt: p.clone(), region, m: m0, class: class0, coef: QCoef::one(h_cut), bends: Vec::new() }];
        while let Some(st) = stack.pop() {
            if st.bends.len() > self.opts.max_events {
                return Err(BrokenLineError::Unsupported(String::from("trace exceeds the event limit")));
            }
            let v = neg(st.m);
            match st.region {
                Region::Strips => {
                    let ev = self.strip_event(&st.pt, v)?;
                    let (s, hit) = match ev {
                        None => {
                            if st.m[0] == 0 && st.m[1] < 0 {
                                out.push(Trace { start: p.clone(), start_cell, start_m: m0, bends: st.bends, class: st.class, coef: st.coef });
                            }
                            continue;
                        }
                        Some(x) => x,
                    };
                    let at = st.pt.offset(v, &s);
                    match hit {
                        Hit::Walls(ids) => {
                            let cell = strip_cell(f, &at, v);
                            let n = crossing_normal(self.s.walls[ids[0]].direction, &Pt::int(v[0], v[1]));
                            let kexp = dot(n, st.m);
                            debug_assert!(kexp > 0, "bend exponent must be positive");
                            let h0 = self.order(e, cell, st.m);
                            if h0 > k {
                                continue;
                            }
                            let g = match cell {
                                Cell::Strip(c) => {
                                    let d = f.edge_dir(c);
                                    Grading::Linear([d[1], -d[0]], 1)
                                }
                                Cell::Piece(_) => unreachable!(),
                            };
                            let budget = (k - h0) as i32;
                            let mut prod = Series::one(f.picard_rank(), budget, 0);
                            for id in &ids {
                                let mut gf = Series::zero(f.picard_rank(), budget, 0);
                                for (mm, c) in self.s.walls[*id].function.iter() {
                                    let mut m2 = *mm;
                                    m2.d = g.of([mm.a as i64, mm.b as i64]) as i32;
                                    gf.add_term(m2, c.clone());
                                }
                                prod = &prod * &gf;
                            }
                            let power = prod.pow_int(kexp).map_err(ScatterError::from)?;
                            for (tm, tc) in power.iter() {
                                if !tm.is_one() && h_cut > 0 {
                                    return Err(BrokenLineError::Unsupported(String::from("q-refined bend at a non-slab wall")));
                                }
                                let m2 = [st.m[0] + tm.a as i64, st.m[1] + tm.b as i64];
                                if m2 == [0, 0] {
                                    continue;
                                }
                                let mut class = st.class;
                                add_class(&mut class, &tm.c, 1);
                                let term = QCoef::scalar(tc, h_cut);
                                let mut bends = st.bends.clone();
                                if !tm.is_one() {
                                    bends.push(Bend { before: at.clone(), point: at.clone(), cell, m: m2, term: term.clone() });
                                }
                                stack.push(State { pt: at.clone(), region: Region::Strips, m: m2, class, coef: st.coef.mul(&term), bends });
                            }
                        }
                        Hit::Slab(i) => {
                            // going down into the central cell
                            let slab = &self.s.slabs[i];
                            let (pn_index, _) = self.slab_piece(slab);
                            self.slab_bend(&st, &at, v, slab, Region::Piece(pn_index), Cell::Piece(pn_index), e, &mut stack)?;
                        }
                        Hit::Cut { .. } => unreachable!(),
                    }
                }
                Region::Piece(n) => {
                    let (s, hit) = self.piece_event(n, &st.pt, v)?;
                    let at = st.pt.offset(v, &s);
                    match hit {
                        Hit::Slab(i) => {
                            let slab = &self.s.slabs[i];
                            let strip = self.slab_strip(slab);
                            self.slab_bend(&st, &at, v, slab, Region::Strips, Cell::Strip(strip), e, &mut stack)?;
                        }
                        Hit::Cut { to } => {
                            let (map, dn, sign) = if to == n + 1 {
                                (f.cut_map(n), f.edge_dir(n), -1)
                            } else {
                                (f.cut_map(n - 1).inverse(), f.edge_dir(n - 1), 1)
                            };
                            let cut_n = if to == n + 1 { n } else { n - 1 };
                            let b = f.psi(cut_n, dn);
                            let mut class = st.class;
                            add_class(&mut class, &b, sign * det(dn, st.m) as i32);
                            let m2 = map.apply_dir(st.m);
                            let at2 = map.apply(&at);
                            let mut bends = st.bends.clone();
                            bends.push(Bend { before: at.clone(), point: at2.clone(), cell: Cell::Piece(to), m: m2, term: QCoef::one(h_cut) });
                            stack.push(State { pt: at2, region: Region::Piece(to), m: m2, class, coef: st.coef.clone(), bends });
                        }
                        Hit::Walls(_) => unreachable!(),
                    }
                }
            }
        }
        Ok(out)
    }

    /// Piece below a slab half, and the edge index.
    fn slab_piece(&self, slab: &Wall) -> (i64, i64) {
        let f = self.f();
        let n = f.strip_at(&slab.base.offset(slab.direction, &Rat::new(1, 4)).x);
        // half based at p_n runs along d_n into piece n; the other into piece n+1
        if slab.direction == f.edge_dir(n) {
            (n, n)
        } else {
            (n + 1, n)
        }
    }

    fn slab_strip(&self, slab: &Wall) -> i64 {
        self.slab_piece(slab).1
    }

    #[allow(clippy::too_many_arguments)]
    fn slab_bend(&self, st: &State, at: &Pt, v: IVec, slab: &Wall, region: Region, cell: Cell, e: i64, stack: &mut Vec<State>) -> Result<(), BrokenLineError> {
        let h_cut = self.opts.h_cut;
        let n = crossing_normal(slab.direction, &Pt::int(v[0], v[1]));
        let kexp = dot(n, st.m);
        debug_assert!(kexp > 0, "slab bend exponent must be positive");
        let (term_m, term_c) = slab.function.iter().find(|(m, _)| !m.is_one()).map(|(m, c)| (*m, c.clone())).expect("slab term");
        let mu = [term_m.a as i64, term_m.b as i64];
        let coeffs: Vec<QCoef> = if h_cut > 0 {
            quantum_bend_coeffs(kexp, kexp as u32, h_cut).iter().map(|s| QCoef::from_series(s, h_cut)).collect()
        } else {
            (0..=kexp).map(|j| QCoef::scalar(&crate::rat::binomial(kexp, j as u32), 0)).collect()
        };
        for (j, cj) in coeffs.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let j = j as i64;
            let m2 = [st.m[0] + j * mu[0], st.m[1] + j * mu[1]];
            if m2 == [0, 0] {
                continue;
            }
            let mut class = st.class;
            add_class(&mut class, &term_m.c, j as i32);
            let term = cj.mul(&QCoef::scalar(&term_c.pow(j as i32), h_cut));
            if self.order(e, cell, m2) > self.opts.k as i64 {
                continue;
            }
            let mut bends = st.bends.clone();
            if j > 0 {
                bends.push(Bend { before: at.clone(), point: at.clone(), cell, m: m2, term: term.clone() });
            }
            stack.push(State { pt: at.clone(), region: region.clone(), m: m2, class, coef: st.coef.mul(&term), bends });
        }
        Ok(())
    }
}

/// Kind of chamber an endpoint lies in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chamber {
    /// Above every bounded wall of a strip.
    Unbounded(i64),
    Central(i64),
    Bounded,
}

/// Classifies an endpoint.
pub fn chamber_of(s: &ScatteringDiagram, p: &Pt) -> Option<Chamber> {
    let f = &s.surface;
    match f.locate(p)? {
        Cell::Piece(n) => Some(Chamber::Central(n)),
        Cell::Strip(n) => {
            if p.y > top_of_walls(s) {
                Some(Chamber::Unbounded(n))
            } else {
                Some(Chamber::Bounded)
            }
        }
    }
}

/// Largest height reached by a bounded wall.
pub fn top_of_walls(s: &ScatteringDiagram) -> Rat {
    let mut top = Rat::zero();
    for w in &s.walls {
        for q in [Some(w.base.clone()), w.end_point()].into_iter().flatten() {
            if q.y > top {
                top = q.y.clone();
            }
        }
    }
    top
}

/// Deterministic generic endpoints in the unbounded chamber of strip 0.
pub fn unbounded_endpoints(s: &ScatteringDiagram) -> impl Iterator<Item = Pt> + '_ {
    let x0 = s.surface.origin[0];
    let top = &crate::surface::floor(&top_of_walls(s)) + 7;
    (0..24i64).map(move |j| Pt::new(&Rat::int(x0) + &Rat::new(37 + 3 * j, 101), Rat::int(top + j)))
}

/// Deterministic generic endpoints in the central cell (piece 0).
pub fn central_endpoints(s: &ScatteringDiagram) -> impl Iterator<Item = Pt> + '_ {
    let f = &s.surface;
    let p0 = f.vertex_pt(0);
    (0..24i64).map(move |j| Pt::new(&p0.x - &Rat::new(13 + j, 71), &p0.y - &Rat::new(29 + 2 * j, 97)))
}

/// A contribution of one broken line to a theta function at its endpoint.
#[derive(Clone, Debug)]
struct Contribution {
    q: i64,
    mono: Mono,
    coef: QCoef,
    trace: Trace,
}

fn contributions(tr: &Tracer, p: &Pt, m_b: IVec) -> Result<Vec<Contribution>, BrokenLineError> {
    let f = tr.f();
    let cell = f.locate(p).ok_or_else(|| non_generic("endpoint on the chain", p))?;
    let start = neg(m_b);
    // the reversed trace starts at order 0
    let e = f.phi(cell, start);
    let traces = tr.run(p, start, e, [0; MAX_RANK])?;
    let slope = match cell {
        Cell::Strip(n) => f.class_slope(n),
        Cell::Piece(_) => vec![0; f.picard_rank()],
    };
    let mut out = Vec::new();
    for t in traces {
        let last_m = t.bends.last().map_or(t.start_m, |b| b.m);
        let q = -last_m[1];
        let d = q - f.phi(cell, m_b);
        let mut c = t.class;
        for (i, v) in slope.iter().enumerate() {
            c[i] -= v * m_b[0] as i32;
        }
        let mono = Mono { a: m_b[0] as i32, b: m_b[1] as i32, d: d as i32, c, h: 0 };
        out.push(Contribution { q, mono, coef: t.coef.clone(), trace: t });
    }
    Ok(out)
}

fn to_broken_line(tr: &Tracer, c: &Contribution, endpoint: &Pt) -> BrokenLine {
    let f = tr.f();
    let t = &c.trace;
    let h_cut = tr.opts.h_cut;
    // reversed pieces: start at P with start_m, after each bend the new monomial
    let mut pts = vec![t.start.clone()];
    let mut ms = vec![t.start_m];
    let mut cells = vec![t.start_cell];
    let mut terms = Vec::new();
    for b in &t.bends {
        pts.push(b.point.clone());
        ms.push(b.m);
        cells.push(b.cell);
        terms.push(b.term.clone());
    }
    let n = ms.len();
    let mut segments = Vec::with_capacity(n);
    let mut coef = QCoef::one(h_cut);
    for i in (0..n).rev() {
        if i < n - 1 {
            coef = coef.mul(&terms[i]);
        }
        let m = neg(ms[i]);
        // the unbounded segment reports its finite end
        let start = if i < n - 1 { t.bends[i].before.clone() } else { pts[i].clone() };
        let cell = cells[i];
        let d = c.q - f.phi(cell, m);
        let mut qs = Series::zero(0, NO_CUT, h_cut);
        for (g, v) in coef.0.iter().enumerate() {
            qs.add_term(Mono::hbar(2 * g as u32), v.clone());
        }
        segments.push(Segment {
            start,
            direction: ms[i],
            mono: Mono { a: m[0] as i32, b: m[1] as i32, d: d as i32, c: [0; MAX_RANK], h: 0 },
            coeff: coef.0[0].clone(),
            q_coeff: qs,
        });
    }
    if let Some(last) = segments.last_mut() {
        last.mono = c.mono;
    }
    BrokenLine { segments, endpoint: endpoint.clone(), asymptotic_charge: c.q }
}

fn canonical_sort(lines: &mut [BrokenLine]) {
    lines.sort_by(|a, b| {
        a.segments
            .len()
            .cmp(&b.segments.len())
            .then_with(|| {
                let ka: Vec<(i32, i32, i32)> = a.segments.iter().map(|s| (s.mono.a, s.mono.b, s.mono.d)).collect();
                let kb: Vec<(i32, i32, i32)> = b.segments.iter().map(|s| (s.mono.a, s.mono.b, s.mono.d)).collect();
                ka.cmp(&kb)
            })
            .then_with(|| a.final_segment().coeff.cmp(&b.final_segment().coeff))
    });
}

fn candidate_monomials(s: &ScatteringDiagram, p: &Pt, q: i64, k: u32, radius: i64) -> Result<Vec<IVec>, BrokenLineError> {
    match chamber_of(s, p) {
        Some(Chamber::Unbounded(_)) => Ok((-(k as i64 - q)..=q).filter(|b| *b != 0).map(|b| [0, b]).collect()),
        Some(_) => {
            let mut v = Vec::new();
            for a in -radius..=radius {
                for b in -radius..=radius {
                    if a != 0 || b != 0 {
                        v.push([a, b]);
                    }
                }
            }
            Ok(v)
        }
        None => Err(non_generic("endpoint on the chain", p)),
    }
}

/// Broken lines for `theta_q` ending at `p`, with `t`-order at most `k`.
///
/// In an unbounded chamber only pure `y` endings are traced; elsewhere ending
/// exponents are searched in a growing box until the result is stable.
pub fn enumerate<E: Executor>(s: &ScatteringDiagram, p: &Pt, q: i64, opts: &TraceOptions, exec: &E) -> Result<Vec<BrokenLine>, BrokenLineError> {
    let tr = Tracer::new(s, opts.clone());
    let unbounded = matches!(chamber_of(s, p), Some(Chamber::Unbounded(_)));
    let mut radius = 2 * q + 2;
    let mut prev: Option<Vec<BrokenLine>> = None;
    loop {
        let cands = candidate_monomials(s, p, q, opts.k, radius)?;
        let results = exec.run(cands.len(), |i| contributions(&tr, p, cands[i]));
        let mut lines = Vec::new();
        for r in results {
            for c in r? {
                if c.q == q && c.mono.d <= opts.k as i32 {
                    lines.push(to_broken_line(&tr, &c, p));
                }
            }
        }
        canonical_sort(&mut lines);
        if unbounded {
            return Ok(lines);
        }
        if prev.as_ref().map_or(false, |pv| pv.len() == lines.len()) {
            return Ok(lines);
        }
        prev = Some(lines);
        radius += 2;
        if radius > 8 * q + 16 {
            return Err(BrokenLineError::Unsupported(String::from("ending exponents do not stabilise")));
        }
    }
}

/// `theta_q` at `p`: the sum of ending monomials, `t`-order at most `k`.
pub fn theta_at<E: Executor>(s: &ScatteringDiagram, p: &Pt, q: i64, opts: &TraceOptions, exec: &E) -> Result<Series, BrokenLineError> {
    let rank = s.surface.picard_rank();
    if q == 0 {
        return Ok(Series::one(rank, opts.k as i32, opts.h_cut));
    }
    let lines = enumerate(s, p, q, opts, exec)?;
    Ok(sum_lines(&lines, rank, opts))
}

fn sum_lines(lines: &[BrokenLine], rank: usize, opts: &TraceOptions) -> Series {
    let mut out = Series::zero(rank, opts.k as i32, opts.h_cut);
    for l in lines {
        let (m, c) = l.ending();
        for (hm, hc) in c.iter() {
            out.add_term(Mono { h: hm.h, ..m }, hc.clone());
        }
    }
    out
}

/// `theta_q` at the first generic point of the unbounded chamber over strip 0.
pub fn theta<E: Executor>(s: &ScatteringDiagram, q: i64, opts: &TraceOptions, exec: &E) -> Result<Series, BrokenLineError> {
    with_generic(unbounded_endpoints(s), |p| theta_at(s, p, q, opts, exec))
}

/// `theta_q` at the first generic point of the central cell.
pub fn theta_central<E: Executor>(s: &ScatteringDiagram, q: i64, opts: &TraceOptions, exec: &E) -> Result<Series, BrokenLineError> {
    with_generic(central_endpoints(s), |p| theta_at(s, p, q, opts, exec))
}

/// Tries endpoints in order until one is generic.
pub fn with_generic<T, I: Iterator<Item = Pt>, F: FnMut(&Pt) -> Result<T, BrokenLineError>>(pts: I, mut f: F) -> Result<T, BrokenLineError> {
    let mut last = BrokenLineError::NonGeneric(String::from("no endpoint tried"));
    for p in pts {
        match f(&p) {
            Err(BrokenLineError::NonGeneric(e)) => last = BrokenLineError::NonGeneric(e),
            other => return other,
        }
    }
    Err(last)
}

/// All thetas `theta_1..=theta_qmax` in the unbounded chamber from one pass:
/// each reversed trace from `y^p` reports its escape charge.
pub fn unbounded_thetas<E: Executor>(s: &ScatteringDiagram, qmax: i64, opts: &TraceOptions, exec: &E) -> Result<Vec<Series>, BrokenLineError> {
    let rank = s.surface.picard_rank();
    let k = opts.k as i64;
    with_generic(unbounded_endpoints(s), |p| {
        let tr = Tracer::new(s, opts.clone());
        let starts: Vec<i64> = (-qmax..=k - 1).filter(|b| *b != 0).collect();
        let results = exec.run(starts.len(), |i| contributions(&tr, p, [0, -starts[i]]));
        let mut out: Vec<Series> = (0..=qmax).map(|_| Series::zero(rank, opts.k as i32, opts.h_cut)).collect();
        out[0] = Series::one(rank, opts.k as i32, opts.h_cut);
        for r in results {
            for c in r? {
                if c.q >= 1 && c.q <= qmax && c.mono.d <= opts.k as i32 {
                    if c.mono.a != 0 {
                        return Err(BrokenLineError::Unsupported(String::from("non-parallel ending monomial in an unbounded chamber")));
                    }
                    for (g, v) in c.coef.0.iter().enumerate() {
                        out[c.q as usize].add_term(Mono { h: 2 * g as u32, ..c.mono }, v.clone());
                    }
                }
            }
        }
        Ok(out)
    })
}

/// Ending monomials with nonzero `x`-exponent found from an unbounded-chamber
/// endpoint, searching a box of radius `radius` (should be empty).
pub fn nonparallel_endings(s: &ScatteringDiagram, p: &Pt, radius: i64, opts: &TraceOptions) -> Result<Vec<Mono>, BrokenLineError> {
    let tr = Tracer::new(s, opts.clone());
    let mut found = Vec::new();
    for a in -radius..=radius {
        if a == 0 {
            continue;
        }
        for b in -radius..=radius {
            for c in contributions(&tr, p, [a, b])? {
                if c.mono.d <= opts.k as i32 && !c.coef.is_zero() {
                    found.push(c.mono);
                }
            }
        }
    }
    Ok(found)
}

/// Tropical count `R^trop_{p,q}`: the coefficient of `t^{p+q} y^{-p}` in
/// `theta_q`, summed over classes, at `h = 0`; returns `(R^trop, R^trop / p)`.
pub fn extract_r(theta_q: &Series, p: i64, q: i64) -> Result<(Rat, Rat), BrokenLineError> {
    if p <= 0 || q <= 0 {
        return Err(BrokenLineError::MissingEntry(alloc::format!("R_{{{},{}}} needs positive tangencies", p, q)));
    }
    let mut total = Rat::zero();
    for (m, c) in theta_q.iter() {
        if m.a == 0 && m.b as i64 == -p && m.d as i64 == p + q && m.h == 0 {
            total += c;
        }
    }
    let r = &total / &Rat::int(p);
    Ok((total, r))
}

/// Coefficients of `t^{p+q} y^{-p}` in `theta_q` per class and even `h`-power.
pub fn extract_r_classes(theta_q: &Series, p: i64, q: i64) -> BTreeMap<([i32; MAX_RANK], u32), Rat> {
    let mut out = BTreeMap::new();
    for (m, c) in theta_q.iter() {
        if m.a == 0 && m.b as i64 == -p && m.d as i64 == p + q {
            *out.entry((m.c, m.h)).or_insert_with(Rat::zero) += c;
        }
    }
    out
}

/// Combinatorial type of a tropical disk: vertex multiplicities, bounded leg
/// weights and the automorphism order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropCurveType {
    pub vertex_mults: Vec<i64>,
    pub leg_weights: Vec<i64>,
    pub aut: i64,
}

impl TropCurveType {
    pub fn new(vertex_mults: Vec<i64>, leg_weights: Vec<i64>, aut: i64) -> TropCurveType {
        assert!(aut > 0 && vertex_mults.iter().chain(leg_weights.iter()).all(|v| *v > 0), "curve type entries must be positive");
        TropCurveType { vertex_mults, leg_weights, aut }
    }

    /// Classical multiplicity: `prod m_V * prod (-1)^{w+1}/w^2 / |Aut|`.
    pub fn classical(&self) -> Rat {
        let mut r = Rat::new(1, self.aut);
        for m in &self.vertex_mults {
            r *= &Rat::int(*m);
        }
        for w in &self.leg_weights {
            let sign = if w % 2 == 1 { 1 } else { -1 };
            r *= &Rat::new(sign, w * w);
        }
        r
    }
}

/// q-refined multiplicity `(1/|Aut|) prod m_V(q) prod m_E(q)` as an `h`-series.
pub fn multiplicity_q(t: &TropCurveType, h_cut: u32) -> Series {
    let mut s = Series::one(0, NO_CUT, h_cut).scale(&Rat::new(1, t.aut));
    for m in &t.vertex_mults {
        s = &s * &vertex_kernel(*m, h_cut);
    }
    for w in &t.leg_weights {
        s = &s * &leg_kernel(*w, h_cut);
    }
    s
}

/// Palindromic Laurent polynomial in `q^{1/2}`: `(twice the q-exponent, coefficient)`.
pub fn laurent_to_hbar(terms: &[(i64, Rat)], h_cut: u32) -> Result<Series, BrokenLineError> {
    let mut map: BTreeMap<i64, Rat> = BTreeMap::new();
    for (k, c) in terms {
        *map.entry(*k).or_insert_with(Rat::zero) += c;
    }
    for (k, c) in &map {
        if map.get(&-k).cloned().unwrap_or_else(Rat::zero) != *c {
            return Err(BrokenLineError::Unsupported(String::from("Laurent multiplicity is not palindromic")));
        }
    }
    let mut s = Series::zero(0, NO_CUT, h_cut);
    for (k, c) in &map {
        s = &s + &half_power_cos(*k, h_cut).scale(c);
    }
    Ok(s)
}

/// An entry of a curve-type list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveContribution {
    Type(TropCurveType),
    /// Explicit multiplicity as a palindromic Laurent polynomial in `q^{1/2}`.
    Laurent(Vec<(i64, Rat)>),
}

/// Genus expansion `R^g_{p,q}`, `g = 0..=h_cut/2`, from weighted curve types.
pub fn genus_table(curves: &[(Rat, CurveContribution)], p: i64, h_cut: u32) -> Result<Vec<Rat>, BrokenLineError> {
    let mut total = Series::zero(0, NO_CUT, h_cut);
    for (w, c) in curves {
        let m = match c {
            CurveContribution::Type(t) => multiplicity_q(t, h_cut),
            CurveContribution::Laurent(l) => laurent_to_hbar(l, h_cut)?,
        };
        total = &total + &m.scale(w);
    }
    let inv_p = Rat::new(1, p);
    Ok((0..=h_cut / 2).map(|g| &total.coeff(&Mono::hbar(2 * g)) * &inv_p).collect())
}

/// Key of an invariant table entry.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct InvKey {
    pub p: i64,
    pub q: i64,
    pub class: [i32; MAX_RANK],
    pub genus: u32,
}

/// Tropical two-point counts `R^{g,trop}_{p,q}(beta)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantTable {
    pub entries: BTreeMap<InvKey, Rat>,
    pub rank: usize,
}

impl InvariantTable {
    /// Reads every `y^{-p}` coefficient of the given unbounded thetas
    /// (`thetas[q]`); `h^{2g}` coefficients become genus `g` entries.
    pub fn from_thetas(thetas: &[Series], rank: usize) -> InvariantTable {
        let mut t = InvariantTable { entries: BTreeMap::new(), rank };
        for (q, th) in thetas.iter().enumerate().skip(1) {
            for (m, c) in th.iter() {
                if m.b < 0 && m.a == 0 {
                    let key = InvKey { p: -m.b as i64, q: q as i64, class: m.c, genus: m.h / 2 };
                    *t.entries.entry(key).or_insert_with(Rat::zero) += c;
                }
            }
        }
        t
    }

    pub fn trop(&self, p: i64, q: i64, class: [i32; MAX_RANK], genus: u32) -> Rat {
        if p <= 0 || q == 0 {
            return Rat::zero();
        }
        self.entries.get(&InvKey { p, q, class, genus }).cloned().unwrap_or_else(Rat::zero)
    }

    /// `R = R^trop / p`.
    pub fn r(&self, p: i64, q: i64, class: [i32; MAX_RANK], genus: u32) -> Rat {
        if p <= 0 {
            return Rat::zero();
        }
        &self.trop(p, q, class, genus) / &Rat::int(p)
    }

    /// Sum over classes of the tropical counts.
    pub fn trop_total(&self, p: i64, q: i64, genus: u32) -> Rat {
        let mut s = Rat::zero();
        for (k, v) in &self.entries {
            if k.p == p && k.q == q && k.genus == genus {
                s += v;
            }
        }
        s
    }

    /// `sum_beta R^trop_{p,q}(beta) s^beta t^{p+q} h^{2g}`.
    pub fn series_r(&self, p: i64, q: i64, t_cut: i32, h_cut: u32) -> Series {
        let mut s = Series::zero(self.rank, t_cut, h_cut);
        if p <= 0 || q == 0 {
            return s;
        }
        for (k, v) in &self.entries {
            if k.p == p && k.q == q {
                s.add_term(Mono { a: 0, b: 0, d: (p + q) as i32, c: k.class, h: 2 * k.genus }, v.clone());
            }
        }
        s
    }
}

/// Structure constant `alpha^r_{p,q}`.
pub fn structure_constants(table: &InvariantTable, p: i64, q: i64, r: i64, t_cut: i32, h_cut: u32) -> Series {
    if r == p + q {
        return Series::one(table.rank, t_cut, h_cut);
    }
    if p == 0 || q == 0 {
        return Series::zero(table.rank, t_cut, h_cut);
    }
    &table.series_r(p - r, q, t_cut, h_cut) + &table.series_r(q - r, p, t_cut, h_cut)
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub ok: bool,
}

/// Result of `verify_theta_identities`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn first_failure(&self) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| !c.ok)
    }
}

/// Checks product rule, tropical Cadman-Chen and the recursion relating
/// the two-point series, from unbounded thetas `thetas[0..=qmax]` at order `k`.
pub fn verify_theta_identities(thetas: &[Series], rank: usize, k: u32) -> IdentityReport {
    let t_cut = k as i32;
    let h_cut = thetas.get(1).map_or(0, |t| t.h_cut());
    let table = InvariantTable::from_thetas(thetas, rank);
    let qmax = thetas.len() as i64 - 1;
    let mut rep = IdentityReport::default();
    let th = |r: i64| -> Series {
        if r == 0 {
            Series::one(rank, t_cut, h_cut)
        } else {
            thetas[r as usize].with_cuts(t_cut, h_cut)
        }
    };
    // (a) product rule
    for p in 1..=qmax {
        for q in p..=qmax {
            if p + q > qmax {
                continue;
            }
            let lhs = &th(p) * &th(q);
            let mut rhs = Series::zero(rank, t_cut, h_cut);
            for r in 0..=p + q {
                let a = structure_constants(&table, p, q, r, t_cut, h_cut);
                if a.is_zero() {
                    continue;
                }
                rhs = &rhs + &(&a * &th(r));
            }
            rep.checks.push(IdentityCheck { name: alloc::format!("theta_{} * theta_{}", p, q), ok: lhs == rhs });
        }
    }
    // (b) R^trop_{1,n} = n R^trop_{n,1}
    for n in 2..=(k as i64 - 1) {
        if n > qmax {
            break;
        }
        let lhs = table.series_r(1, n, t_cut, h_cut);
        let rhs = table.series_r(n, 1, t_cut, h_cut).scale(&Rat::int(n));
        if lhs.is_zero() && rhs.is_zero() {
            continue;
        }
        rep.checks.push(IdentityCheck { name: alloc::format!("R_1,{} = {} R_{},1", n, n, n), ok: lhs == rhs });
    }
    // (c) the relation from theta_1 * theta_kk at total tangency n + 1
    let rr = |a: i64, b: i64| table.series_r(a, b, t_cut, h_cut);
    for n in 2..=(k as i64 - 1) {
        for kk in 1..n {
            if kk + 1 > qmax {
                continue;
            }
            let mut lhs = rr(n - kk, kk + 1);
            for r in 1..kk {
                lhs = &lhs + &(&rr(kk - r, 1) * &rr(n - kk, r));
            }
            let mut rhs = &rr(n - kk + 1, kk) + &rr(n, 1);
            for a in 0..=(n - kk) {
                rhs = &rhs + &(&rr(a, 1) * &rr(n - kk - a, kk));
            }
            rep.checks.push(IdentityCheck { name: alloc::format!("relation n={} k={}", n, kk), ok: lhs == rhs });
        }
    }
    rep
}

/// Every entry of `thetas` is a polynomial in `y` (no `x`).
pub fn thetas_parallel(thetas: &[Series]) -> bool {
    thetas.iter().all(|t| t.iter().all(|(m, _)| m.a == 0))
}
