//! Consistent wall structures, built order by order, and transport of series
//! along paths.
//!
//! Internally wall functions are stored in the untwisted form: a term
//! `s^c w^m` stands for `t^{-phi_C(m)} s^{c - psi_C(m)} z^m` in whichever cell
//! `C` the wall is read, where `phi` is the polarization and `psi` the class
//! gauge of the surface. In this form wall functions carry no `t`, crossing a
//! kink line is the identity, and only the order of a monomial
//! (`-phi_C(m)`) depends on the cell. `Wall::z_function` converts back.
//!
//! Crossing convention: a path crossing a wall from the old chamber into the
//! new one applies `z^m -> z^m f^<n,m>` with `n` the primitive normal pointing
//! from the new chamber to the old (`t^{kink <n,m>}` extra for slabs).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::exec::Executor;
use crate::geom::{angle_cmp, det, dot, gcd, intersect, neg, param_on_line, primitive, IVec, Pt};
use crate::rat::Rat;
use crate::series::{Mono, Series, SeriesError, MAX_RANK, NO_CUT};
use crate::surface::{Cell, FanPicture};

/// Failures of scattering computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScatterError {
    Series(SeriesError),
    /// A loop defect that is not a sum of ray contributions.
    NotFactorable(String),
    /// Path touches a joint, singularity, wall end or cut.
    NonGenericPath(String),
    Unsupported(String),
}

impl fmt::Display for ScatterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScatterError::Series(e) => write!(f, "{}", e),
            ScatterError::NotFactorable(s) => write!(f, "defect not factorable: {}", s),
            ScatterError::NonGenericPath(s) => write!(f, "non-generic path: {}", s),
            ScatterError::Unsupported(s) => write!(f, "unsupported: {}", s),
        }
    }
}

impl From<SeriesError> for ScatterError {
    fn from(e: SeriesError) -> ScatterError {
        ScatterError::Series(e)
    }
}

/// A wall or slab half in the chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub base: Pt,
    /// Primitive direction; walls are `base + s * direction` for `0 <= s <= end`.
    pub direction: IVec,
    /// `None` for walls running to infinity.
    pub end: Option<Rat>,
    /// Untwisted function, constant term 1.
    pub function: Series,
    pub is_slab: bool,
    pub kink: i64,
    pub birth_order: u32,
}

impl Wall {
    pub fn point_at(&self, s: &Rat) -> Pt {
        self.base.offset(self.direction, s)
    }

    pub fn end_point(&self) -> Option<Pt> {
        self.end.as_ref().map(|e| self.point_at(e))
    }

    /// Parameter of `q` on the wall, if `q` lies on it.
    pub fn param_of(&self, q: &Pt) -> Option<Rat> {
        let s = param_on_line(&self.base, self.direction, q)?;
        if s.is_negative() {
            return None;
        }
        if let Some(e) = &self.end {
            if &s > e {
                return None;
            }
        }
        Some(s)
    }

    /// Primitive exponent of the function's monomials.
    pub fn m_prim(&self) -> IVec {
        if self.is_slab {
            self.direction
        } else {
            neg(self.direction)
        }
    }

    /// Least multiple `j` of the primitive exponent present in the function.
    pub fn min_multiple(&self) -> i64 {
        let mp = self.m_prim();
        self.function
            .iter()
            .filter(|(m, _)| !m.is_one())
            .map(|(m, _)| multiple_of(mp, [m.a as i64, m.b as i64]))
            .min()
            .unwrap_or(0)
    }

    /// The wall function as read in the z-form of `cell`.
    pub fn z_function(&self, f: &FanPicture, cell: Cell) -> Series {
        to_z_form(&self.function, f, cell)
    }

    /// The cell a wall starts into.
    pub fn first_cell(&self, f: &FanPicture) -> Cell {
        let probe = self.base.offset(self.direction, &Rat::new(1, 1_000_003));
        f.locate(&probe).unwrap_or(Cell::Strip(f.strip_at(&self.base.x)))
    }
}

fn multiple_of(prim: IVec, m: IVec) -> i64 {
    if prim[0] != 0 {
        m[0] / prim[0]
    } else {
        m[1] / prim[1]
    }
}

/// Converts an untwisted series (no `t` needed) to the z-form of `cell`.
pub fn to_z_form(s: &Series, f: &FanPicture, cell: Cell) -> Series {
    let slope = match cell {
        Cell::Strip(n) => f.class_slope(n),
        Cell::Piece(_) => vec![0; f.picard_rank()],
    };
    let mut out = Series::zero(s.rank(), NO_CUT, s.h_cut());
    if let Some((lo, hi)) = s.x_window() {
        out = out.with_window(lo, hi);
    }
    for (m, c) in s.iter() {
        let mv = [m.a as i64, m.b as i64];
        let mut z = *m;
        z.d = m.d - f.phi(cell, mv) as i32;
        for (i, v) in slope.iter().enumerate() {
            z.c[i] -= v * m.a;
        }
        out.add_term(z, c.clone());
    }
    out
}

/// Converts a z-form series in `cell` to the untwisted form.
pub fn to_w_form(s: &Series, f: &FanPicture, cell: Cell) -> Series {
    let slope = match cell {
        Cell::Strip(n) => f.class_slope(n),
        Cell::Piece(_) => vec![0; f.picard_rank()],
    };
    let mut out = Series::zero(s.rank(), NO_CUT, s.h_cut());
    if let Some((lo, hi)) = s.x_window() {
        out = out.with_window(lo, hi);
    }
    for (m, c) in s.iter() {
        let mv = [m.a as i64, m.b as i64];
        let mut w = *m;
        w.d = m.d + f.phi(cell, mv) as i32;
        for (i, v) in slope.iter().enumerate() {
            w.c[i] += v * m.a;
        }
        out.add_term(w, c.clone());
    }
    out
}

/// Grading of exponents at a point, used to truncate loop computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Grading {
    /// `<g, m> / den`.
    Linear(IVec, i64),
    /// Minimum of two linear gradings (points on a kink line).
    Min(IVec, IVec),
}

impl Grading {
    pub fn of(&self, m: IVec) -> i64 {
        match self {
            Grading::Linear(g, den) => {
                let v = dot(*g, m);
                debug_assert_eq!(v % den, 0);
                v / den
            }
            Grading::Min(g, h) => dot(*g, m).min(dot(*h, m)),
        }
    }

    fn strip(f: &FanPicture, n: i64) -> IVec {
        let d = f.edge_dir(n);
        [d[1], -d[0]]
    }

    /// Grading by `z`-order at a point above the chain.
    pub fn at_point(f: &FanPicture, p: &Pt) -> Grading {
        match f.kink_line_at(&p.x) {
            Some(n) => Grading::Min(Grading::strip(f, n - 1), Grading::strip(f, n)),
            None => Grading::Linear(Grading::strip(f, f.strip_at(&p.x)), 1),
        }
    }

    /// `i + j` for `m = i A + j B`.
    pub fn vertex(a: IVec, b: IVec) -> Grading {
        let k = det(a, b);
        Grading::Linear([b[1] - a[1], a[0] - b[0]], k)
    }
}

/// A ray out of a point carrying a function, for loop computations.
#[derive(Clone, Debug)]
pub struct LoopRay {
    pub dir: IVec,
    pub function: Series,
}

/// Puts the grading of each exponent on the `t` axis.
fn graded(f: &Series, g: &Grading, cut: i64) -> Series {
    let mut out = Series::zero(f.rank(), cut as i32, 0);
    for (m, c) in f.iter() {
        let mut mm = *m;
        mm.d = g.of([m.a as i64, m.b as i64]) as i32;
        out.add_term(mm, c.clone());
    }
    out
}

/// `sum c_m w^m f^<n,m>` for a graded series `r`.
fn apply_crossing(r: &Series, f: &Series, n: IVec, cache: &mut BTreeMap<i64, Series>) -> Result<Series, SeriesError> {
    let mut groups: BTreeMap<(i32, i32), Series> = BTreeMap::new();
    for (m, c) in r.iter() {
        groups
            .entry((m.a, m.b))
            .or_insert_with(|| Series::zero(r.rank(), r.t_cut(), r.h_cut()))
            .add_term(*m, c.clone());
    }
    let mut out = Series::zero(r.rank(), r.t_cut(), r.h_cut());
    for ((a, b), part) in groups {
        let k = n[0] * a as i64 + n[1] * b as i64;
        if k == 0 {
            out = &out + &part;
            continue;
        }
        if !cache.contains_key(&k) {
            cache.insert(k, f.pow_int(k)?);
        }
        out = &out + &(&part * &cache[&k]);
    }
    Ok(out)
}

/// Images `Theta(w^a) / w^a` for `a = (1,0), (0,1)` after a counterclockwise
/// loop crossing `rays` (sorted by angle), truncated at stored grade `cut`.
pub fn loop_images(rays: &[LoopRay], g: &Grading, cut: i64, rank: usize) -> Result<(Series, Series), SeriesError> {
    let mut rx = Series::one(rank, cut as i32, 0);
    let mut ry = rx.clone();
    for ray in rays {
        let f = graded(&ray.function, g, cut);
        let n = [ray.dir[1], -ray.dir[0]];
        let mut cache = BTreeMap::new();
        let tx = apply_crossing(&rx, &f, n, &mut cache)?;
        let ty = apply_crossing(&ry, &f, n, &mut cache)?;
        let fx = if n[0] == 0 { Series::one(rank, cut as i32, 0) } else { cache_pow(&f, n[0], &mut cache)? };
        let fy = if n[1] == 0 { Series::one(rank, cut as i32, 0) } else { cache_pow(&f, n[1], &mut cache)? };
        rx = &fx * &tx;
        ry = &fy * &ty;
    }
    Ok((rx, ry))
}

fn cache_pow(f: &Series, k: i64, cache: &mut BTreeMap<i64, Series>) -> Result<Series, SeriesError> {
    if !cache.contains_key(&k) {
        cache.insert(k, f.pow_int(k)?);
    }
    Ok(cache[&k].clone())
}

/// Terms of a loop image minus 1, keyed by `(exponent, class)` at true grade.
type Defect = BTreeMap<(IVec, [i32; MAX_RANK]), Rat>;

fn defect_at(r: &Series, g: &Grading) -> BTreeMap<i64, Defect> {
    let mut out: BTreeMap<i64, Defect> = BTreeMap::new();
    for (m, c) in r.iter() {
        if m.a == 0 && m.b == 0 && m.c.iter().all(|v| *v == 0) {
            continue;
        }
        let mv = [m.a as i64, m.b as i64];
        let gr = g.of(mv);
        let e = out.entry(gr).or_default().entry((mv, m.c)).or_insert_with(Rat::zero);
        *e += c;
    }
    for d in out.values_mut() {
        d.retain(|_, v| !v.is_zero());
    }
    out.retain(|_, d| !d.is_empty());
    out
}

/// New outgoing ray contributions cancelling the grade-`j` defect of a loop.
pub fn corrective_rays(rays: &[LoopRay], g: &Grading, j: i64, rank: usize) -> Result<Vec<(IVec, Series)>, ScatterError> {
    let (rx, ry) = loop_images(rays, g, j, rank)?;
    let dx = defect_at(&rx, g);
    let dy = defect_at(&ry, g);
    for gr in dx.keys().chain(dy.keys()) {
        if *gr < j {
            return Err(ScatterError::NotFactorable(alloc::format!("nonzero defect below grade {} at grade {}", j, gr)));
        }
    }
    let empty = Defect::new();
    let ex = dx.get(&j).unwrap_or(&empty);
    let ey = dy.get(&j).unwrap_or(&empty);
    let keys: BTreeSet<(IVec, [i32; MAX_RANK])> = ex.keys().chain(ey.keys()).cloned().collect();
    let mut by_dir: BTreeMap<IVec, Series> = BTreeMap::new();
    for key in keys {
        let (m, c) = key;
        let vx = ex.get(&key).cloned().unwrap_or_else(Rat::zero);
        let vy = ey.get(&key).cloned().unwrap_or_else(Rat::zero);
        let (mp, _) = primitive(m);
        let r = neg(mp);
        let n = [r[1], -r[0]];
        if &vx * &Rat::int(n[1]) != &vy * &Rat::int(n[0]) {
            return Err(ScatterError::NotFactorable(alloc::format!("defect at {:?} not parallel to its normal", m)));
        }
        let coef = if n[0] != 0 { -(&vx / &Rat::int(n[0])) } else { -(&vy / &Rat::int(n[1])) };
        let mono = Mono { a: m[0] as i32, b: m[1] as i32, d: 0, c, h: 0 };
        by_dir
            .entry(r)
            .or_insert_with(|| Series::one(rank, NO_CUT, 0))
            .add_term(mono, coef);
    }
    let mut out: Vec<(IVec, Series)> = by_dir.into_iter().collect();
    out.sort_by(|a, b| angle_cmp(a.0, b.0));
    Ok(out)
}

/// Sorts rays counterclockwise.
pub fn sort_rays(rays: &mut [LoopRay]) {
    rays.sort_by(|a, b| angle_cmp(a.dir, b.dir));
}

/// Scattering of the two slab lines through a chain vertex.
#[derive(Clone, Debug)]
pub struct VertexScattering {
    pub vertex: i64,
    pub kappa: i64,
    pub a: IVec,
    pub b: IVec,
    /// Outgoing rays `(direction, untwisted function)` including the two
    /// continuation rays, truncated at the requested order.
    pub rays: Vec<(IVec, Series)>,
}

/// Slab-half functions at vertex `v`: `(A, 1 + s^a w^A)` and `(B, 1 + s^b w^B)`.
pub fn vertex_slab_functions(f: &FanPicture, v: i64) -> ((IVec, Series), (IVec, Series)) {
    let r = f.picard_rank();
    let a = neg(f.edge_dir(v - 1));
    let b = f.edge_dir(v);
    let ca = f.psi(v - 1, a);
    let cb = f.psi(v, b);
    let fa = Series::from_terms(
        r,
        NO_CUT,
        0,
        [(Rat::one(), Mono::ONE), (Rat::one(), Mono::xy(a[0] as i32, a[1] as i32).with_class(&ca))],
    );
    let fb = Series::from_terms(
        r,
        NO_CUT,
        0,
        [(Rat::one(), Mono::ONE), (Rat::one(), Mono::xy(b[0] as i32, b[1] as i32).with_class(&cb))],
    );
    ((a, fa), (b, fb))
}

/// Completes the vertex `v` to `z`-order `k`.
pub fn vertex_scatter(f: &FanPicture, v: i64, k: u32) -> Result<VertexScattering, ScatterError> {
    let ((a, fa), (b, fb)) = vertex_slab_functions(f, v);
    let kappa = det(a, b);
    let g = Grading::vertex(a, b);
    let rank = f.picard_rank();
    let top = (2 * k as i64) / kappa;
    let mut out: BTreeMap<IVec, Series> = BTreeMap::new();
    for j in 2..=top {
        let mut rays = vec![
            LoopRay { dir: a, function: fa.clone() },
            LoopRay { dir: neg(a), function: fa.clone() },
            LoopRay { dir: b, function: fb.clone() },
            LoopRay { dir: neg(b), function: fb.clone() },
        ];
        for (d, s) in &out {
            rays.push(LoopRay { dir: *d, function: s.clone() });
        }
        sort_rays(&mut rays);
        for (d, s) in corrective_rays(&rays, &g, j, rank)? {
            let e = out.entry(d).or_insert_with(|| Series::one(rank, NO_CUT, 0));
            *e = &*e * &s;
        }
    }
    let zorder = |m: IVec| {
        let i = det(m, b) / kappa;
        let jj = det(a, m) / kappa;
        kappa * i.max(jj)
    };
    let mut rays = vec![(neg(a), fa.clone()), (neg(b), fb.clone())];
    for (d, s) in out {
        let kept = s.filter(|m, _| m.is_one() || zorder([m.a as i64, m.b as i64]) <= k as i64);
        if kept.len() > 1 {
            rays.push((d, kept));
        }
    }
    rays.sort_by(|x, y| angle_cmp(x.0, y.0));
    Ok(VertexScattering { vertex: v, kappa, a, b, rays })
}

/// Diagram of walls over the unrolled chart.
#[derive(Clone, Debug)]
pub struct ScatteringDiagram {
    pub surface: FanPicture,
    /// Slab halves: for each edge `e_n`, one half based at `p_n` and one at `p_{n+1}`.
    pub slabs: Vec<Wall>,
    pub walls: Vec<Wall>,
    pub order: u32,
    pub consistent: bool,
    pub h_cut: u32,
    /// Replication radius in periods.
    pub periods: i64,
}

fn slab_halves(f: &FanPicture, n: i64) -> [Wall; 2] {
    let r = f.picard_rank();
    let d = f.edge_dir(n);
    let b = f.psi(n, d);
    let nb: Vec<i32> = b.iter().map(|v| -v).collect();
    let near = Series::from_terms(r, NO_CUT, 0, [(Rat::one(), Mono::ONE), (Rat::one(), Mono::xy(d[0] as i32, d[1] as i32).with_class(&b))]);
    let far = Series::from_terms(
        r,
        NO_CUT,
        0,
        [(Rat::one(), Mono::ONE), (Rat::one(), Mono::xy(-d[0] as i32, -d[1] as i32).with_class(&nb))],
    );
    let half = Some(Rat::new(1, 2));
    [
        Wall { base: f.vertex_pt(n), direction: d, end: half.clone(), function: near, is_slab: true, kink: 1, birth_order: 0 },
        Wall { base: f.vertex_pt(n + 1), direction: neg(d), end: half, function: far, is_slab: true, kink: 1, birth_order: 0 },
    ]
}

/// Number of periods to replicate on each side for order `k`.
pub fn replication_radius(f: &FanPicture, k: u32) -> i64 {
    (k as i64 + 1 + f.period() - 1) / f.period() + 1
}

/// The slabs of `f` with their normalized functions; no other walls.
pub fn initial_structure(f: &FanPicture, h_cut: u32) -> ScatteringDiagram {
    let periods = replication_radius(f, 0);
    let mut d = ScatteringDiagram { surface: f.clone(), slabs: Vec::new(), walls: Vec::new(), order: 0, consistent: true, h_cut, periods };
    d.set_slabs(periods);
    d
}

impl ScatteringDiagram {
    fn set_slabs(&mut self, periods: i64) {
        let p = self.surface.period();
        self.slabs.clear();
        for n in -periods * p..(periods + 1) * p {
            let [a, b] = slab_halves(&self.surface, n);
            self.slabs.push(a);
            self.slabs.push(b);
        }
        self.periods = periods;
    }

    /// Slab halves whose edge lies in the fundamental domain.
    pub fn fundamental_slabs(&self) -> Vec<&Wall> {
        let p = self.surface.period();
        let x0 = Rat::int(self.surface.origin[0]);
        let x1 = Rat::int(self.surface.origin[0] + p);
        self.slabs
            .iter()
            .filter(|w| {
                let mid = w.base.offset(w.direction, &Rat::new(1, 4));
                mid.x > x0 && mid.x < x1
            })
            .collect()
    }

    /// Removes the slab on edge `e_n` (both halves); for consistency experiments.
    pub fn without_slab(&self, n: i64) -> ScatteringDiagram {
        let mut out = self.clone();
        let a = self.surface.vertex_pt(n);
        let b = self.surface.vertex_pt(n + 1);
        out.slabs.retain(|w| !((w.base == a && w.direction == self.surface.edge_dir(n)) || (w.base == b && w.direction == neg(self.surface.edge_dir(n)))));
        out
    }

    /// The q-refined function of a slab half, grading each power of its
    /// monomial by `t`; at `h = 0` it is `1 + s^c t z^m`.
    pub fn slab_q_function(&self, slab: &Wall, degree_cut: i32) -> Series {
        let (m, c) = slab.function.iter().find(|(m, _)| !m.is_one()).map(|(m, c)| (*m, c.clone())).expect("slab term");
        let cls: Vec<i32> = m.c[..self.surface.picard_rank()].to_vec();
        crate::series::qlog_slab(&c, &cls, &Mono { d: 1, c: [0; MAX_RANK], ..m }, self.surface.picard_rank(), degree_cut, self.h_cut)
    }

    /// z-form class lock: for every wall term, `E . class = t-order`, where
    /// `E . D_n = kappa_n` on the ray classes.
    pub fn class_lock_holds(&self) -> bool {
        let f = &self.surface;
        let degrees = class_degrees(f);
        self.walls.iter().all(|w| {
            let cell = w.first_cell(f);
            let z = w.z_function(f, cell);
            let ok = z.iter().filter(|(m, _)| !m.is_one()).all(|(m, _)| {
                let deg: i64 = (0..f.picard_rank()).map(|i| degrees[i] * m.c[i] as i64).sum();
                deg == m.d as i64
            });
            ok
        })
    }

    /// Walls with the same base, direction and extent multiplied together.
    pub fn merged_walls(&self) -> Vec<Wall> {
        let mut out: Vec<Wall> = Vec::new();
        for w in &self.walls {
            if let Some(o) = out.iter_mut().find(|o| o.base == w.base && o.direction == w.direction) {
                o.function = &o.function * &w.function;
                o.birth_order = o.birth_order.min(w.birth_order);
                o.end = match (&o.end, &w.end) {
                    (Some(a), Some(b)) => Some(if a > b { a.clone() } else { b.clone() }),
                    _ => None,
                };
            } else {
                out.push(w.clone());
            }
        }
        out
    }

    /// Walls crossed by a straight segment, with crossing parameters in `(0, 1)`.
    pub fn crossings(&self, from: &Pt, to: &Pt, include_slabs: bool) -> Result<Vec<(Rat, usize, bool)>, ScatterError> {
        let d = to - from;
        let mut out = Vec::new();
        let list: Vec<(usize, bool, &Wall)> = self
            .walls
            .iter()
            .enumerate()
            .map(|(i, w)| (i, false, w))
            .chain(self.slabs.iter().enumerate().filter(|_| include_slabs).map(|(i, w)| (i, true, w)))
            .collect();
        for (i, is_slab, w) in list {
            if let Some((s, u)) = seg_hit(from, &d, w) {
                if s.is_zero() || s == Rat::one() {
                    return Err(ScatterError::NonGenericPath(alloc::format!("endpoint on wall at {:?}", w.base)));
                }
                if u.is_zero() || w.end.as_ref() == Some(&u) {
                    if !is_slab || u.is_zero() {
                        return Err(ScatterError::NonGenericPath(alloc::format!("path meets wall end at {:?}", w.point_at(&u))));
                    }
                    // slab halves meet at the singularity
                    return Err(ScatterError::NonGenericPath(String::from("path meets a singularity")));
                }
                out.push((s, i, is_slab));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        for w in out.windows(2) {
            if w[0].0 == w[1].0 {
                let (wa, wb) = (self.wall_ref(w[0].1, w[0].2), self.wall_ref(w[1].1, w[1].2));
                if det(wa.direction, wb.direction) != 0 {
                    return Err(ScatterError::NonGenericPath(String::from("path passes through a joint")));
                }
            }
        }
        Ok(out)
    }

    fn wall_ref(&self, i: usize, slab: bool) -> &Wall {
        if slab {
            &self.slabs[i]
        } else {
            &self.walls[i]
        }
    }
}

/// Intersection of the segment `from + s d` (`0 <= s <= 1`) with a wall:
/// `(s, wall parameter)`.
fn seg_hit(from: &Pt, d: &Pt, w: &Wall) -> Option<(Rat, Rat)> {
    let dn = crate::geom::det_pt(d, &Pt::int(w.direction[0], w.direction[1]));
    if dn.is_zero() {
        return None;
    }
    let q = &w.base - from;
    let s = &crate::geom::det_pt(&q, &Pt::int(w.direction[0], w.direction[1])) / &dn;
    let u = &crate::geom::det_pt(&q, d) / &dn;
    if s.is_negative() || s > Rat::one() || u.is_negative() {
        return None;
    }
    if let Some(e) = &w.end {
        if &u > e {
            return None;
        }
    }
    Some((s, u))
}

/// `E`-degree of each basis class, solved from `E . D_n = kappa_n`.
pub fn class_degrees(f: &FanPicture) -> Vec<i64> {
    let r = f.picard_rank();
    let mut deg = vec![0i64; r];
    // basis vectors occur as ray classes in both builtins and their blow-ups;
    // fall back to a small linear solve otherwise
    for i in 0..r {
        let mut unit = vec![0i32; r];
        unit[i] = 1;
        if let Some(n) = (0..f.period()).find(|n| f.ray_class(*n) == unit.as_slice()) {
            deg[i] = f.kappa(n);
        }
    }
    for i in 0..r {
        if deg[i] == 0 {
            // solve using any ray whose class is supported on known entries plus i
            for n in 0..f.period() {
                let c = f.ray_class(n);
                if c[i] != 0 && (0..r).all(|k| k == i || c[k] == 0 || deg[k] != 0) {
                    let known: i64 = (0..r).filter(|k| *k != i).map(|k| deg[k] * c[k] as i64).sum();
                    deg[i] = (f.kappa(n) - known) / c[i] as i64;
                    break;
                }
            }
        }
    }
    deg
}

/// Far end of a wall from `base` in direction `dir` carrying `w^{j m}`
/// (`m = -dir`): the boundary of the first strip where the order exceeds `k`.
pub fn wall_end(f: &FanPicture, base: &Pt, dir: IVec, j: i64, k: u32) -> Option<Rat> {
    if dir[0] == 0 {
        return None;
    }
    let m = neg(dir);
    let mut n = match f.kink_line_at(&base.x) {
        Some(line) => {
            if dir[0] > 0 {
                line
            } else {
                line - 1
            }
        }
        None => f.strip_at(&base.x),
    };
    loop {
        let order = -j * det(f.edge_dir(n), m);
        let bx = if dir[0] > 0 { f.vertex(n + 1)[0] } else { f.vertex(n)[0] };
        if order > k as i64 {
            return Some(&(&Rat::int(bx) - &base.x) / &Rat::int(dir[0]));
        }
        n += if dir[0] > 0 { 1 } else { -1 };
    }
}

/// Diagnostics from `complete_to_order`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub joints_processed: usize,
    pub walls_added: usize,
}

struct JointIndex {
    lo: Rat,
    hi: Rat,
    vertices: BTreeSet<Pt>,
    points: BTreeMap<Pt, BTreeSet<usize>>,
}

impl JointIndex {
    fn in_range(&self, p: &Pt) -> bool {
        p.x >= self.lo && p.x < self.hi && !self.vertices.contains(p)
    }

    fn add_wall(&mut self, walls: &[Wall], i: usize) {
        let w = &walls[i];
        for (u_idx, u) in walls.iter().enumerate().take(i) {
            if let Some((s, r)) = intersect(&w.base, w.direction, &u.base, u.direction) {
                if s.is_negative() || r.is_negative() {
                    continue;
                }
                if let Some(e) = &w.end {
                    if &s > e {
                        continue;
                    }
                }
                if let Some(e) = &u.end {
                    if &r > e {
                        continue;
                    }
                }
                let p = w.point_at(&s);
                if !self.in_range(&p) {
                    continue;
                }
                let set = self.points.entry(p).or_default();
                set.insert(i);
                set.insert(u_idx);
            }
        }
        // collinear walls sharing existing joint points
        for (p, set) in self.points.iter_mut() {
            if !set.contains(&i) && w.param_of(p).is_some() {
                set.insert(i);
            }
        }
    }
}

/// Rays at a point from the walls containing it.
fn rays_at(walls: &[Wall], ids: &BTreeSet<usize>, p: &Pt) -> Vec<LoopRay> {
    let mut rays = Vec::new();
    for &i in ids {
        let w = &walls[i];
        let s = match w.param_of(p) {
            Some(s) => s,
            None => continue,
        };
        if s.is_zero() {
            rays.push(LoopRay { dir: w.direction, function: w.function.clone() });
        } else if w.end.as_ref() == Some(&s) {
            rays.push(LoopRay { dir: neg(w.direction), function: w.function.clone() });
        } else {
            rays.push(LoopRay { dir: w.direction, function: w.function.clone() });
            rays.push(LoopRay { dir: neg(w.direction), function: w.function.clone() });
        }
    }
    sort_rays(&mut rays);
    rays
}

fn min_grade(f: &Series, g: &Grading) -> i64 {
    f.iter().filter(|(m, _)| !m.is_one()).map(|(m, _)| g.of([m.a as i64, m.b as i64])).min().unwrap_or(i64::MAX / 4)
}

/// Whether two non-parallel rays can interact at grade `j`.
fn active(rays: &[LoopRay], g: &Grading, j: i64) -> bool {
    let mins: Vec<(IVec, i64)> = rays.iter().map(|r| (r.dir, min_grade(&r.function, g))).collect();
    for (i, (d1, g1)) in mins.iter().enumerate() {
        for (d2, g2) in mins.iter().skip(i + 1) {
            if det(*d1, *d2) != 0 && g1 + g2 <= j {
                return true;
            }
        }
    }
    false
}

impl ScatteringDiagram {
    fn replicate_wall(&self, w: &Wall, i: i64) -> Wall {
        let f = &self.surface;
        let a = f.periodicity().power(i);
        let total = f.class_slope(f.period());
        let mut function = Series::zero(w.function.rank(), NO_CUT, w.function.h_cut());
        for (m, c) in w.function.iter() {
            let mv = a.apply_dir([m.a as i64, m.b as i64]);
            let mut mm = Mono { a: mv[0] as i32, b: mv[1] as i32, ..*m };
            for (k, v) in total.iter().enumerate() {
                mm.c[k] += v * m.a * i as i32;
            }
            function.add_term(mm, c.clone());
        }
        Wall {
            base: a.apply(&w.base),
            direction: a.apply_dir(w.direction),
            end: w.end.clone(),
            function,
            is_slab: w.is_slab,
            kink: w.kink,
            birth_order: w.birth_order,
        }
    }
}

/// Builds the consistent structure to order `k`.
pub fn complete_to_order<E: Executor>(s0: &ScatteringDiagram, k: u32, exec: &E) -> Result<(ScatteringDiagram, BuildStats), ScatterError> {
    if k <= s0.order {
        return Ok((s0.clone(), BuildStats::default()));
    }
    let f = s0.surface.clone();
    let p = f.period();
    let rank = f.picard_rank();
    let periods = replication_radius(&f, k);
    let mut d = ScatteringDiagram { surface: f.clone(), slabs: Vec::new(), walls: Vec::new(), order: k, consistent: false, h_cut: s0.h_cut, periods };
    d.set_slabs(periods);
    // keep deletions made to the input's slabs
    let kept: BTreeSet<(Pt, IVec)> = s0.slabs.iter().map(|w| (w.base.clone(), w.direction)).collect();
    let lo_edge = -s0.periods * p;
    let hi_edge = (s0.periods + 1) * p;
    d.slabs.retain(|w| {
        let n = f.strip_at(&w.base.offset(w.direction, &Rat::new(1, 4)).x);
        n < lo_edge || n >= hi_edge || kept.contains(&(w.base.clone(), w.direction))
    });
    let slab_set: BTreeSet<(Pt, IVec)> = d.slabs.iter().map(|w| (w.base.clone(), w.direction)).collect();

    let mut stats = BuildStats::default();
    let mut fundamental: Vec<Wall> = Vec::new();
    for v in 0..p {
        let pv = f.vertex_pt(v);
        let ((a, _), (b, _)) = vertex_slab_functions(&f, v);
        if !slab_set.contains(&(pv.clone(), a)) || !slab_set.contains(&(pv.clone(), b)) {
            continue;
        }
        let vs = vertex_scatter(&f, v, k)?;
        for (dir, func) in vs.rays {
            let (dp, _) = primitive(dir);
            let tmp = Wall { base: pv.clone(), direction: dp, end: None, function: func.clone(), is_slab: false, kink: 0, birth_order: 0 };
            let j = tmp.min_multiple();
            let birth = {
                let g = Grading::at_point(&f, &pv.offset(dp, &Rat::new(1, 1_000_003)));
                min_grade(&func, &g)
            };
            let end = wall_end(&f, &pv, dp, j, k);
            fundamental.push(Wall { end, birth_order: birth.max(0) as u32, ..tmp });
        }
    }
    let lo = Rat::int(f.origin[0]);
    let hi = Rat::int(f.origin[0] + p);
    let vertices: BTreeSet<Pt> = (-(periods + 2) * p..(periods + 3) * p).map(|n| f.vertex_pt(n)).collect();
    let mut index = JointIndex { lo, hi, vertices, points: BTreeMap::new() };
    let add_all = |d: &mut ScatteringDiagram, index: &mut JointIndex, ws: &[Wall]| {
        for w in ws {
            for i in -periods..=periods {
                let copy = d.replicate_wall(w, i);
                d.walls.push(copy);
                let id = d.walls.len() - 1;
                index.add_wall(&d.walls, id);
            }
        }
    };
    add_all(&mut d, &mut index, &fundamental);
    stats.walls_added += fundamental.len();

    for j in 1..=k as i64 {
        let joints: Vec<(Pt, BTreeSet<usize>)> = index.points.iter().map(|(p, s)| (p.clone(), s.clone())).collect();
        let walls = &d.walls;
        let results = exec.run(joints.len(), |ji| -> Result<Vec<Wall>, ScatterError> {
            let (pt, ids) = &joints[ji];
            let g = Grading::at_point(&f, pt);
            let rays = rays_at(walls, ids, pt);
            if !active(&rays, &g, j) {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            for (dir, func) in corrective_rays(&rays, &g, j, rank)? {
                let tmp = Wall { base: pt.clone(), direction: dir, end: None, function: func, is_slab: false, kink: 0, birth_order: j as u32 };
                let m = tmp.min_multiple();
                let end = wall_end(&f, pt, dir, m, k);
                out.push(Wall { end, ..tmp });
            }
            Ok(out)
        });
        let mut fresh = Vec::new();
        for (ji, r) in results.into_iter().enumerate() {
            let ws = r?;
            if !ws.is_empty() {
                stats.joints_processed += 1;
                let _ = ji;
            }
            fresh.extend(ws);
        }
        stats.walls_added += fresh.len();
        add_all(&mut d, &mut index, &fresh);
    }
    d.consistent = true;
    Ok((d, stats))
}

/// Per-joint outcome of a consistency check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointReport {
    pub point: Pt,
    pub ok: bool,
    /// First order at which the loop differs from the identity.
    pub first_failure: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub joints: Vec<JointReport>,
}

impl ConsistencyReport {
    pub fn all_ok(&self) -> bool {
        self.joints.iter().all(|j| j.ok)
    }

    pub fn first_failure(&self) -> Option<u32> {
        self.joints.iter().filter_map(|j| j.first_failure).min()
    }
}

/// Checks every joint and chain vertex of the fundamental domain to the
/// diagram's order.
pub fn consistency_check<E: Executor>(s: &ScatteringDiagram, exec: &E) -> Result<ConsistencyReport, ScatterError> {
    consistency_check_to(s, s.order, exec)
}

/// Like `consistency_check`, checking loops up to an explicit order.
pub fn consistency_check_to<E: Executor>(s: &ScatteringDiagram, order: u32, exec: &E) -> Result<ConsistencyReport, ScatterError> {
    let f = &s.surface;
    let p = f.period();
    let k = order.max(1);
    let rank = f.picard_rank();
    let mut tasks: Vec<(Pt, Vec<LoopRay>, Grading, Option<(IVec, IVec)>)> = Vec::new();
    for v in 0..p {
        let pv = f.vertex_pt(v);
        let mut rays = Vec::new();
        for w in s.slabs.iter().chain(s.walls.iter()) {
            if w.base == pv {
                rays.push(LoopRay { dir: w.direction, function: w.function.clone() });
            }
        }
        if rays.is_empty() {
            continue;
        }
        sort_rays(&mut rays);
        let a = neg(f.edge_dir(v - 1));
        let b = f.edge_dir(v);
        tasks.push((pv, rays, Grading::vertex(a, b), Some((a, b))));
    }
    let lo = Rat::int(f.origin[0]);
    let hi = Rat::int(f.origin[0] + p);
    let vertices: BTreeSet<Pt> = (-(s.periods + 2) * p..(s.periods + 3) * p).map(|n| f.vertex_pt(n)).collect();
    let mut index = JointIndex { lo, hi, vertices, points: BTreeMap::new() };
    for i in 0..s.walls.len() {
        index.add_wall(&s.walls, i);
    }
    for (pt, ids) in index.points.iter() {
        let rays = rays_at(&s.walls, ids, pt);
        tasks.push((pt.clone(), rays, Grading::at_point(f, pt), None));
    }
    let results = exec.run(tasks.len(), |i| -> Result<JointReport, ScatterError> {
        let (pt, rays, g, vert) = &tasks[i];
        let cut = match vert {
            Some((a, b)) => 2 * k as i64 / det(*a, *b),
            None => k as i64,
        };
        let (rx, ry) = loop_images(rays, g, cut, rank)?;
        let mut worst: Option<u32> = None;
        for r in [&rx, &ry] {
            for (gr, defect) in defect_at(r, g) {
                if gr > cut || defect.is_empty() {
                    continue;
                }
                for ((m, _), _) in defect {
                    let order = match vert {
                        Some((a, b)) => {
                            let kk = det(*a, *b);
                            kk * (det(m, *b) / kk).max(det(*a, m) / kk)
                        }
                        None => gr,
                    };
                    if order <= k as i64 {
                        worst = Some(worst.map_or(order as u32, |w| w.min(order as u32)));
                    }
                }
            }
        }
        Ok(JointReport { point: pt.clone(), ok: worst.is_none(), first_failure: worst })
    });
    let mut joints = Vec::new();
    for r in results {
        joints.push(r?);
    }
    Ok(ConsistencyReport { joints })
}

/// A z-form wall for `cross`: function, slab flag and kink.
#[derive(Clone, Debug)]
pub struct ZWall {
    pub function: Series,
    pub is_slab: bool,
    pub kink: i64,
}

/// `z^m -> z^m f^<n,m>` (times `t^{kink <n,m>}` for slabs) applied termwise.
pub fn cross(val: &Series, wall: &ZWall, n: IVec) -> Result<Series, ScatterError> {
    let mut out = Series::zero(val.rank(), val.t_cut(), val.h_cut());
    if let Some((lo, hi)) = val.x_window() {
        out = out.with_window(lo, hi);
    }
    let mut cache: BTreeMap<i64, Series> = BTreeMap::new();
    let base = match val.x_window() {
        Some((lo, hi)) => wall.function.clone().with_cuts(val.t_cut(), val.h_cut()).with_window(lo - 64, hi + 64),
        None => wall.function.with_cuts(val.t_cut().saturating_add(64), val.h_cut()),
    };
    for (m, c) in val.iter() {
        let k = n[0] * m.a as i64 + n[1] * m.b as i64;
        if k == 0 {
            out.add_term(*m, c.clone());
            continue;
        }
        if !cache.contains_key(&k) {
            let mut fk = base.pow_int(k)?;
            if wall.is_slab {
                fk = fk.mul_mono(&Mono::t((wall.kink * k) as i32), &Rat::one());
            }
            cache.insert(k, fk);
        }
        for (fm, fc) in cache[&k].iter() {
            out.add_term(m.times(fm), c * fc);
        }
    }
    Ok(out)
}

/// Images of `x` and `y` under the composite of crossings listed in path
/// order, each given as a z-form function with its normal.
pub fn path_product(walls_in_order: &[(Series, IVec)], rank: usize, t_cut: i32) -> Result<(Series, Series), ScatterError> {
    let mut imgs = [
        Series::monomial(rank, t_cut, 0, Mono::xy(1, 0), Rat::one()),
        Series::monomial(rank, t_cut, 0, Mono::xy(0, 1), Rat::one()),
    ];
    for (f, n) in walls_in_order {
        let zw = ZWall { function: f.clone(), is_slab: false, kink: 0 };
        for img in imgs.iter_mut() {
            *img = cross(img, &zw, *n)?;
        }
    }
    let [x, y] = imgs;
    Ok((x, y))
}

/// Normal for a crossing with travel direction `v` over a wall along `r`,
/// pointing back into the old chamber.
pub fn crossing_normal(r: IVec, v: &Pt) -> IVec {
    let n = [r[1], -r[0]];
    let s = &(&Rat::int(n[0]) * &v.x) + &(&Rat::int(n[1]) * &v.y);
    if s.is_negative() {
        n
    } else {
        neg(n)
    }
}

/// Transports a z-form series along a polyline through the diagram.
///
/// The series is read in the z-form of the cell containing the first point;
/// the result is in the z-form of the cell of the last point. Kink lines,
/// slabs and walls are crossed in order; cuts of the central cell are not
/// allowed on the path.
pub fn transport_path(w: &Series, path: &[Pt], s: &ScatteringDiagram) -> Result<Series, ScatterError> {
    let f = &s.surface;
    if path.len() < 2 {
        return Ok(w.clone());
    }
    // a rank-0 input reads every wall with classes suppressed
    let classes = |s: Series| if w.rank() == 0 { s.forget_classes() } else { s };
    let mut cell = f.locate(&path[0]).ok_or_else(|| ScatterError::NonGenericPath(String::from("start point not in a cell")))?;
    let mut val = w.clone();
    for seg in path.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        let dv = b - a;
        let mut events: Vec<(Rat, Event)> = Vec::new();
        for (sp, i, slab) in s.crossings(a, b, true)? {
            events.push((sp, if slab { Event::Slab(i) } else { Event::Wall(i) }));
        }
        // kink lines above the chain
        if !dv.x.is_zero() {
            let (x0, x1) = if dv.x.is_negative() { (&b.x, &a.x) } else { (&a.x, &b.x) };
            let first = crate::surface::floor(&(x0 - &Rat::int(f.origin[0]))) + 1;
            let mut n = first;
            loop {
                let x = Rat::int(f.origin[0] + n);
                if &x >= x1 {
                    break;
                }
                let sp = &(&x - &a.x) / &dv.x;
                let pt = a.offset([0, 0], &Rat::zero());
                let q = Pt::new(x.clone(), &pt.y + &(&sp * &dv.y));
                if q.y > f.chain_y(&x) {
                    events.push((sp, Event::Kink(n)));
                } else if q.y == f.chain_y(&x) {
                    return Err(ScatterError::NonGenericPath(String::from("path meets a chain vertex")));
                }
                n += 1;
            }
        }
        events.sort_by(|x, y| x.0.cmp(&y.0));
        for (sp, ev) in events {
            match ev {
                Event::Wall(i) => {
                    let wall = &s.walls[i];
                    let zf = classes(wall.z_function(f, cell));
                    let n = crossing_normal(wall.direction, &dv);
                    val = cross(&val, &ZWall { function: zf, is_slab: false, kink: 0 }, n)?;
                }
                Event::Slab(i) => {
                    let slab = &s.slabs[i];
                    let n = crossing_normal(slab.direction, &dv);
                    let here = a.offset([0, 0], &Rat::zero());
                    let after = Pt::new(&here.x + &(&(&sp + &Rat::new(1, 1_000_003)) * &dv.x), &here.y + &(&(&sp + &Rat::new(1, 1_000_003)) * &dv.y));
                    let new_cell = f.locate(&after).ok_or_else(|| ScatterError::NonGenericPath(String::from("slab crossing leaves the chart")))?;
                    let wv = to_w_form(&val, f, cell);
                    let crossed = cross(&wv, &ZWall { function: classes(slab.function.clone()), is_slab: false, kink: 0 }, n)?;
                    val = classes(to_z_form(&crossed, f, new_cell)).truncate(w.t_cut(), w.h_cut());
                    if let Some((lo, hi)) = w.x_window() {
                        val = val.with_window(lo, hi);
                    }
                    cell = new_cell;
                }
                Event::Kink(n) => {
                    let new_cell = if dv.x.is_negative() { Cell::Strip(n - 1) } else { Cell::Strip(n) };
                    let wv = to_w_form(&val, f, cell);
                    val = classes(to_z_form(&wv, f, new_cell)).truncate(w.t_cut(), w.h_cut());
                    if let Some((lo, hi)) = w.x_window() {
                        val = val.with_window(lo, hi);
                    }
                    cell = new_cell;
                }
            }
        }
        if let Some(c) = f.locate(b) {
            if let (Cell::Piece(x), Cell::Piece(y)) = (c, cell) {
                if x != y {
                    return Err(ScatterError::Unsupported(String::from("path crosses a cut of the central cell")));
                }
            }
        }
    }
    Ok(val)
}

#[derive(Clone, Copy, Debug)]
enum Event {
    Wall(usize),
    Slab(usize),
    Kink(i64),
}

/// Greatest common divisor helper re-exported for callers building exponents.
pub fn lattice_index(m: IVec) -> i64 {
    gcd(m[0], m[1])
}
