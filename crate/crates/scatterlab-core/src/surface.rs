//! The unrolled integral-affine chart of a toric del Pezzo fan picture.
//!
//! The chart has `m_out = (0, 1)`. Its lower boundary is a concave chain of
//! vertices `p_n` joined by bounded edges `e_n = [p_n, p_n + d_n]` with
//! `d_n = (1, s_n)`. Above each edge sits the unbounded strip `U_n`, bounded by
//! the vertical rays `rho_n` and `rho_{n+1}`. Below the chain lies the central
//! cell, cut into quadrilateral pieces `[p_n, mid_n, c_n, mid_{n-1}]` around the
//! focus-focus singularities at the edge midpoints `mid_n`.
//!
//! The polarization is zero on the central cell and `det(d_n, m)` on `U_n`, so
//! every bounded edge has kink 1 and the vertex kinks are
//! `kappa_n = det(d_n, d_{n-1}) = s_{n-1} - s_n`.
//!
//! Chart constants are a reading of the paper's figures. For the projective
//! plane the Appendix A path sits at `x = -0.465` with `p_{-1} = (-1, 0)`,
//! `p_0 = (0, 0)` and singularity `(-1/2, 0)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::{det, mat_det, mat_mul, mat_vec, IVec, Mat2, Pt};
use crate::rat::Rat;

/// Failures when building or transforming fan pictures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceError {
    EdgeLength(i64),
    FanoViolation(String),
    BadCell(i64),
}

impl fmt::Display for SurfaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceError::EdgeLength(l) => write!(f, "bounded edge has affine length {} (need 1)", l),
            SurfaceError::FanoViolation(s) => write!(f, "Fano property violated: {}", s),
            SurfaceError::BadCell(c) => write!(f, "no unbounded cell {}", c),
        }
    }
}

/// A cell of the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    /// Unbounded strip above `e_n`.
    Strip(i64),
    /// Central piece containing `p_n`.
    Piece(i64),
}

/// Unimodular 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monodromy(pub Mat2);

impl Monodromy {
    pub fn new(m: Mat2) -> Monodromy {
        assert_eq!(mat_det(&m), 1, "monodromy must have determinant 1");
        Monodromy(m)
    }

    pub fn identity() -> Monodromy {
        Monodromy([[1, 0], [0, 1]])
    }

    pub fn compose(&self, o: &Monodromy) -> Monodromy {
        Monodromy(mat_mul(&self.0, &o.0))
    }

    pub fn apply(&self, v: IVec) -> IVec {
        mat_vec(&self.0, v)
    }
}

/// Checks both splittings `T'' = T * T' = T2 * T1` of the worm monodromy.
/// Arguments in order: `T`, `T'`, `T''`, `T1`, `T2`.
pub fn verify_worm(ts: &[Monodromy; 5]) -> bool {
    let [t, t1p, t2p, d1, d2] = ts;
    t.compose(t1p) == *t2p && d2.compose(d1) == *t2p
}

/// The matrices printed for the worm construction, in `verify_worm` order.
pub fn worm_matrices() -> [Monodromy; 5] {
    [
        Monodromy::new([[0, -1], [1, 2]]),
        Monodromy::new([[1, -1], [0, 1]]),
        Monodromy::new([[0, -1], [1, 1]]),
        Monodromy::new([[1, 0], [1, 1]]),
        Monodromy::new([[1, -1], [0, 1]]),
    ]
}

/// `kappa(m1, m2) = det(m1 | m2)`.
pub fn kink(m1: IVec, m2: IVec) -> i64 {
    det(m1, m2)
}

/// Integral-affine map `v -> A v + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub linear: Mat2,
    pub translation: IVec,
}

impl AffineMap {
    pub fn apply(&self, p: &Pt) -> Pt {
        let m = &self.linear;
        let x = &(&Rat::int(m[0][0]) * &p.x) + &(&Rat::int(m[0][1]) * &p.y);
        let y = &(&Rat::int(m[1][0]) * &p.x) + &(&Rat::int(m[1][1]) * &p.y);
        Pt::new(&x + &Rat::int(self.translation[0]), &y + &Rat::int(self.translation[1]))
    }

    pub fn apply_dir(&self, v: IVec) -> IVec {
        mat_vec(&self.linear, v)
    }

    /// `k`-fold composite (negative `k` for the inverse).
    pub fn power(&self, k: i64) -> AffineMap {
        let mut out = AffineMap { linear: [[1, 0], [0, 1]], translation: [0, 0] };
        let step = if k >= 0 { self.clone() } else { self.inverse() };
        for _ in 0..k.abs() {
            out = step.after(&out);
        }
        out
    }

    /// `self o other`.
    pub fn after(&self, o: &AffineMap) -> AffineMap {
        let t = mat_vec(&self.linear, o.translation);
        AffineMap {
            linear: mat_mul(&self.linear, &o.linear),
            translation: [t[0] + self.translation[0], t[1] + self.translation[1]],
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let li = crate::geom::mat_inv(&self.linear);
        let t = mat_vec(&li, self.translation);
        AffineMap { linear: li, translation: [-t[0], -t[1]] }
    }
}

/// Pullback of classes under a blow-up: old class vectors gain a zero entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pullback {
    pub old_rank: usize,
}

impl Pullback {
    pub fn apply(&self, beta: &[i32]) -> Vec<i32> {
        assert_eq!(beta.len(), self.old_rank);
        let mut v = beta.to_vec();
        v.push(0);
        v
    }
}

/// A focus-focus singularity on a bounded edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Singularity {
    pub position: Pt,
    pub invariant_direction: IVec,
    pub host_slab: i64,
}

/// Unrolled fan picture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanPicture {
    pub name: String,
    /// Vertices of the central Fano polygon in counterclockwise order;
    /// ray `i` corresponds to chart vertices `p_n` with `n = i mod P`.
    pub fan_rays: Vec<IVec>,
    /// Class label of the unbounded ray at each vertex.
    pub ray_classes: Vec<Vec<i32>>,
    pub class_names: Vec<String>,
    /// Chart position of `p_0`.
    pub origin: IVec,
    /// Slope of `d_0`.
    pub s0: i64,
    pub m_out: IVec,
}

impl FanPicture {
    pub fn period(&self) -> i64 {
        self.fan_rays.len() as i64
    }

    pub fn picard_rank(&self) -> usize {
        self.class_names.len()
    }

    fn idx(&self, n: i64) -> usize {
        n.rem_euclid(self.period()) as usize
    }

    /// Vertex kinks of the central polygon, `det(v_{i+1} - v_i, v_{i-1} - v_i)`.
    pub fn vertex_kinks(&self) -> Vec<i64> {
        let p = self.fan_rays.len();
        (0..p)
            .map(|i| {
                let v = self.fan_rays[i];
                let next = self.fan_rays[(i + 1) % p];
                let prev = self.fan_rays[(i + p - 1) % p];
                kink([next[0] - v[0], next[1] - v[1]], [prev[0] - v[0], prev[1] - v[1]])
            })
            .collect()
    }

    pub fn kappa(&self, n: i64) -> i64 {
        let k = self.fan_rays.len();
        let i = self.idx(n);
        let v = self.fan_rays[i];
        let next = self.fan_rays[(i + 1) % k];
        let prev = self.fan_rays[(i + k - 1) % k];
        kink([next[0] - v[0], next[1] - v[1]], [prev[0] - v[0], prev[1] - v[1]])
    }

    /// Class of the unbounded ray `rho_n`.
    pub fn ray_class(&self, n: i64) -> &[i32] {
        &self.ray_classes[self.idx(n)]
    }

    /// Sum of vertex kinks over one period.
    pub fn kink_sum(&self) -> i64 {
        self.vertex_kinks().iter().sum()
    }

    /// Slope of `d_n`; `s_n = s_{n-1} - kappa_n`.
    pub fn slope(&self, n: i64) -> i64 {
        let mut s = self.s0;
        if n > 0 {
            for i in 1..=n {
                s -= self.kappa(i);
            }
        } else {
            for i in (n + 1..=0).rev() {
                s += self.kappa(i);
            }
        }
        s
    }

    pub fn edge_dir(&self, n: i64) -> IVec {
        [1, self.slope(n)]
    }

    pub fn vertex(&self, n: i64) -> IVec {
        let mut p = self.origin;
        if n > 0 {
            for i in 0..n {
                let d = self.edge_dir(i);
                p = [p[0] + d[0], p[1] + d[1]];
            }
        } else {
            for i in (n..0).rev() {
                let d = self.edge_dir(i);
                p = [p[0] - d[0], p[1] - d[1]];
            }
        }
        p
    }

    pub fn vertex_pt(&self, n: i64) -> Pt {
        let v = self.vertex(n);
        Pt::int(v[0], v[1])
    }

    /// Singularity on `e_n`.
    pub fn mid(&self, n: i64) -> Pt {
        self.vertex_pt(n).midpoint(&self.vertex_pt(n + 1))
    }

    /// Image of the centre of the central cell in piece `n`.
    pub fn centre(&self, n: i64) -> Pt {
        let v = self.vertex(n);
        Pt::int(v[0] - self.m_out[0], v[1] - self.m_out[1])
    }

    pub fn singularity(&self, n: i64) -> Singularity {
        Singularity { position: self.mid(n), invariant_direction: self.edge_dir(n), host_slab: n }
    }

    /// Monodromy `m -> m - det(d_n, m) d_n` for crossing the cut of `mid_n`
    /// from piece `n` into piece `n + 1`.
    pub fn cut_monodromy(&self, n: i64) -> Monodromy {
        let [dx, dy] = self.edge_dir(n);
        Monodromy::new([[1 + dx * dy, -dx * dx], [dy * dy, 1 - dx * dy]])
    }

    /// Affine gluing of the cut at `mid_n`, piece `n` to piece `n + 1`.
    pub fn cut_map(&self, n: i64) -> AffineMap {
        let g = self.cut_monodromy(n).0;
        // mid_n is half-integral; use 2*mid for the fixed point
        let m2 = [2 * self.vertex(n)[0] + self.edge_dir(n)[0], 2 * self.vertex(n)[1] + self.edge_dir(n)[1]];
        let gm = mat_vec(&g, m2);
        let t = [m2[0] - gm[0], m2[1] - gm[1]];
        assert!(t[0] % 2 == 0 && t[1] % 2 == 0, "cut translation must be integral");
        AffineMap { linear: g, translation: [t[0] / 2, t[1] / 2] }
    }

    /// Periodicity map sending `p_n` to `p_{n+P}` and `d_n` to `d_{n+P}`.
    pub fn periodicity(&self) -> AffineMap {
        let k = self.kink_sum();
        let lin = [[1, 0], [-k, 1]];
        let p0 = self.origin;
        let pp = self.vertex(self.period());
        let lp0 = mat_vec(&lin, p0);
        AffineMap { linear: lin, translation: [pp[0] - lp0[0], pp[1] - lp0[1]] }
    }

    /// Polarization on a cell, as a linear functional on exponents.
    pub fn phi(&self, cell: Cell, m: IVec) -> i64 {
        match cell {
            Cell::Strip(n) => det(self.edge_dir(n), m),
            Cell::Piece(_) => 0,
        }
    }

    /// Partial sums `sum_{i=1}^n D_i` (negated sums for `n < 0`), the slope of
    /// the class gauge on strip `U_n` in the `x`-exponent.
    pub fn class_slope(&self, n: i64) -> Vec<i32> {
        let r = self.picard_rank();
        let mut acc = vec![0i32; r];
        if n > 0 {
            for i in 1..=n {
                for (a, d) in acc.iter_mut().zip(self.ray_class(i)) {
                    *a += *d;
                }
            }
        } else {
            for i in n + 1..=0 {
                for (a, d) in acc.iter_mut().zip(self.ray_class(i)) {
                    *a -= *d;
                }
            }
        }
        acc
    }

    /// Class gauge `psi_{U_n}(m) = m_x * class_slope(n)`.
    pub fn psi(&self, n: i64, m: IVec) -> Vec<i32> {
        self.class_slope(n).iter().map(|v| v * m[0] as i32).collect()
    }

    /// Strip index for an `x`-coordinate; points on `rho_n` report `n`.
    pub fn strip_at(&self, x: &Rat) -> i64 {
        let rel = x - &Rat::int(self.origin[0]);
        floor(&rel)
    }

    /// `Some(n)` if `x` lies on the vertical line of `rho_n`.
    pub fn kink_line_at(&self, x: &Rat) -> Option<i64> {
        let rel = x - &Rat::int(self.origin[0]);
        if rel.is_integer() {
            rel.to_i64()
        } else {
            None
        }
    }

    /// Height of the chain above `x`.
    pub fn chain_y(&self, x: &Rat) -> Rat {
        let n = self.strip_at(x);
        let p = self.vertex_pt(n);
        &p.y + &(&(x - &p.x) * &Rat::int(self.slope(n)))
    }

    /// Cell containing `q`, or `None` on the chain or outside the chart.
    pub fn locate(&self, q: &Pt) -> Option<Cell> {
        let cy = self.chain_y(&q.x);
        if q.y > cy {
            return Some(Cell::Strip(self.strip_at(&q.x)));
        }
        if q.y == cy {
            return None;
        }
        // pieces span x in [x(p_n) - 1/2, x(p_n) + 1/2]
        let rel = &(&q.x - &Rat::int(self.origin[0])) + &Rat::new(1, 2);
        let n = floor(&rel);
        let c = self.centre(n);
        let side = if q.x <= c.x { self.mid(n - 1) } else { self.mid(n) };
        // lower boundary of piece n is the polyline mid_{n-1} -> c_n -> mid_n
        let t = &(&q.x - &c.x) / &(&side.x - &c.x);
        let low = &c.y + &(&t * &(&side.y - &c.y));
        if q.x == c.x {
            return if q.y > c.y { Some(Cell::Piece(n)) } else { None };
        }
        if q.y > low {
            Some(Cell::Piece(n))
        } else {
            None
        }
    }

    /// The fundamental-domain slab indices `0..P`.
    pub fn fundamental_slabs(&self) -> Vec<i64> {
        (0..self.period()).collect()
    }

    pub fn is_asym_cyl(&self) -> bool {
        self.m_out == [0, 1] && (0..self.period()).all(|n| self.vertex(n)[0] + 1 == self.vertex(n + 1)[0])
    }

    /// Fano predicate: primitive polygon vertices, unimodular adjacent cones,
    /// positive kinks and the origin in the interior.
    pub fn is_fano(&self) -> bool {
        let p = self.fan_rays.len();
        if p < 3 {
            return false;
        }
        for i in 0..p {
            let v = self.fan_rays[i];
            let w = self.fan_rays[(i + 1) % p];
            if crate::geom::gcd(v[0], v[1]) != 1 || det(v, w) != 1 {
                return false;
            }
        }
        self.vertex_kinks().iter().all(|k| *k > 0)
    }

    /// Unbounded rays as `(base vertex index, class)` over one period.
    pub fn unbounded_rays(&self) -> Vec<(i64, Vec<i32>)> {
        (0..self.period()).map(|n| (n, self.ray_class(n).to_vec())).collect()
    }

    /// Class labels of the unbounded rays generate the class lattice.
    pub fn classes_generate(&self) -> bool {
        let r = self.picard_rank();
        // every basis vector must be an integer combination; check unimodular minors
        let rows: Vec<&Vec<i32>> = self.ray_classes.iter().collect();
        match r {
            1 => {
                let g = rows.iter().fold(0i64, |g, v| crate::geom::gcd(g, v[0] as i64));
                g == 1
            }
            2 => {
                let mut g = 0i64;
                for i in 0..rows.len() {
                    for j in 0..rows.len() {
                        g = crate::geom::gcd(g, det([rows[i][0] as i64, rows[i][1] as i64], [rows[j][0] as i64, rows[j][1] as i64]));
                    }
                }
                g == 1
            }
            _ => true,
        }
    }
}

/// Floor of a rational as an integer.
pub fn floor(r: &Rat) -> i64 {
    use num_integer::Integer;
    let (q, _) = r.numer().div_mod_floor(r.denom());
    num_traits::ToPrimitive::to_i64(&q).expect("coordinate fits in i64")
}

/// The projective plane: three vertices of kink 3, every ray labeled `L`.
pub fn builtin_p2() -> FanPicture {
    FanPicture {
        name: String::from("P2"),
        fan_rays: vec![[1, 0], [0, 1], [-1, -1]],
        ray_classes: vec![vec![1], vec![1], vec![1]],
        class_names: vec![String::from("L")],
        origin: [0, 0],
        s0: -3,
        m_out: [0, 1],
    }
}

/// The first Hirzebruch surface in the chart obtained by blowing up `p_0`'s
/// corner of the projective plane; rays labeled `C, L-C, L, L-C`.
pub fn builtin_f1() -> FanPicture {
    FanPicture {
        name: String::from("F1"),
        fan_rays: vec![[1, 1], [0, 1], [-1, -1], [1, 0]],
        ray_classes: vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, -1]],
        class_names: vec![String::from("L"), String::from("C")],
        origin: [-1, 0],
        s0: 0,
        m_out: [0, 1],
    }
}

/// Blows up the torus-fixed point of the unbounded cell `U_cell` by inserting
/// the fan ray `v_cell + v_{cell+1}`. The new vertex becomes index 0.
pub fn blow_up(f: &FanPicture, cell: i64) -> Result<(FanPicture, Pullback), SurfaceError> {
    let p = f.period();
    if cell < 0 || cell >= p {
        return Err(SurfaceError::BadCell(cell));
    }
    if !f.is_fano() {
        return Err(SurfaceError::FanoViolation(String::from("input is not Fano")));
    }
    let i = cell as usize;
    let j = ((cell + 1) % p) as usize;
    let (v1, v2) = (f.fan_rays[i], f.fan_rays[j]);
    let len = det(v1, v2);
    if len != 1 {
        return Err(SurfaceError::EdgeLength(len));
    }
    let r = f.picard_rank();
    let mut exc = vec![0i32; r + 1];
    exc[r] = 1;
    let widen = |c: &Vec<i32>| {
        let mut v = c.clone();
        v.push(0);
        v
    };
    let mut rays = vec![[v1[0] + v2[0], v1[1] + v2[1]]];
    let mut classes = vec![exc.clone()];
    let k = f.fan_rays.len();
    for step in 0..k {
        let idx = (j + step) % k;
        rays.push(f.fan_rays[idx]);
        let mut c = widen(&f.ray_classes[idx]);
        if idx == i || idx == j {
            c[r] -= 1;
        }
        classes.push(c);
    }
    let mut names = f.class_names.clone();
    names.push(if r == 1 { String::from("C") } else { alloc::format!("C{}", r) });
    let out = FanPicture {
        name: alloc::format!("{}-blowup", f.name),
        fan_rays: rays,
        ray_classes: classes,
        class_names: names,
        origin: [-1, 0],
        s0: 0,
        m_out: f.m_out,
    };
    if !out.is_fano() {
        return Err(SurfaceError::FanoViolation(alloc::format!("kinks {:?}", out.vertex_kinks())));
    }
    Ok((out, Pullback { old_rank: r }))
}

/// A slab copy produced by `replicate`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlabSeed {
    pub index: i64,
    pub start: Pt,
    pub end: Pt,
    pub singularity: Pt,
    pub direction: IVec,
}

/// Slabs and singularities of `k` periods on each side of the fundamental domain.
pub fn replicate(f: &FanPicture, k: u32) -> Vec<SlabSeed> {
    let p = f.period();
    let lo = -(k as i64) * p;
    let hi = (k as i64 + 1) * p;
    (lo..hi)
        .map(|n| SlabSeed {
            index: n,
            start: f.vertex_pt(n),
            end: f.vertex_pt(n + 1),
            singularity: f.mid(n),
            direction: f.edge_dir(n),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_chart_constants() {
        let f = builtin_p2();
        assert_eq!(f.vertex_kinks(), vec![3, 3, 3]);
        assert_eq!(f.vertex(-1), [-1, 0]);
        assert_eq!(f.vertex(1), [1, -3]);
        assert_eq!(f.edge_dir(-1), [1, 0]);
        assert_eq!(f.edge_dir(-2), [1, 3]);
        assert_eq!(f.mid(-1), Pt::ratio(-1, 2, 0, 1));
        let a = f.periodicity();
        assert_eq!(a.linear, [[1, 0], [-9, 1]]);
        assert_eq!(a.translation, [3, -18]);
        assert!(f.is_asym_cyl() && f.is_fano() && f.classes_generate());
    }

    #[test]
    fn f1_chart_constants() {
        let f = builtin_f1();
        let pts: Vec<IVec> = (-2..=4).map(|n| f.vertex(n)).collect();
        assert_eq!(pts, vec![[-3, -4], [-2, -1], [-1, 0], [0, 0], [1, -2], [2, -7], [3, -14]]);
        let a = f.periodicity();
        assert_eq!(a.linear, [[1, 0], [-8, 1]]);
        assert_eq!(a.translation, [4, -22]);
        assert!(f.is_asym_cyl() && f.is_fano() && f.classes_generate());
    }

    #[test]
    fn periodicity_moves_chain() {
        for f in [builtin_p2(), builtin_f1()] {
            let a = f.periodicity();
            for n in -5..5 {
                assert_eq!(a.apply(&f.vertex_pt(n)), f.vertex_pt(n + f.period()));
                assert_eq!(a.apply_dir(f.edge_dir(n)), f.edge_dir(n + f.period()));
            }
        }
    }

    #[test]
    fn cut_maps_centre_images() {
        let f = builtin_p2();
        for n in -4..4 {
            let g = f.cut_map(n);
            assert_eq!(g.apply(&f.centre(n)), f.centre(n + 1));
            assert_eq!(g.apply(&f.mid(n)), f.mid(n));
            assert_eq!(f.cut_monodromy(n).apply(f.edge_dir(n)), f.edge_dir(n));
        }
        assert_eq!(f.centre(0), Pt::int(0, -1));
        assert_eq!(f.centre(1), Pt::int(1, -4));
    }

    #[test]
    fn locate_cells() {
        let f = builtin_p2();
        assert_eq!(f.locate(&Pt::ratio(-93, 200, 5, 1)), Some(Cell::Strip(-1)));
        assert_eq!(f.locate(&Pt::ratio(-93, 200, -1, 20)), Some(Cell::Piece(0)));
        assert_eq!(f.locate(&Pt::ratio(-93, 200, -1, 10)), None);
        assert_eq!(f.locate(&Pt::ratio(-3, 5, -1, 10)), Some(Cell::Piece(-1)));
        assert_eq!(f.locate(&Pt::ratio(0, 1, -2, 1)), None);
        assert_eq!(f.locate(&Pt::ratio(-1, 2, 0, 1)), None);
    }

    #[test]
    fn kink_examples() {
        assert_eq!(kink([1, 0], [0, 1]), 1);
        assert_eq!(kink([-1, 1], [-2, -1]), 3);
    }

    #[test]
    fn blow_up_p2_is_f1() {
        let (g, pb) = blow_up(&builtin_p2(), 0).unwrap();
        let f1 = builtin_f1();
        assert_eq!(g.fan_rays, f1.fan_rays);
        assert_eq!(g.ray_classes, f1.ray_classes);
        assert_eq!(g.vertex_kinks(), vec![1, 2, 3, 2]);
        assert_eq!(pb.apply(&[3]), vec![3, 0]);
        assert_eq!(f1.kink_sum(), builtin_p2().kink_sum() - 1);
    }

    #[test]
    fn blow_up_rejects_non_fano() {
        let (f1, _) = blow_up(&builtin_p2(), 0).unwrap();
        // cell 0 joins kinks 1 and 2: the kink-1 vertex would drop to 0
        assert!(matches!(blow_up(&f1, 0), Err(SurfaceError::FanoViolation(_))));
        assert!(matches!(blow_up(&f1, 9), Err(SurfaceError::BadCell(9))));
    }

    #[test]
    fn worm_splittings() {
        let ts = worm_matrices();
        assert!(verify_worm(&ts));
        let id = Monodromy::identity();
        assert!(verify_worm(&[id; 5]));
        let mut swapped = ts;
        swapped.swap(3, 4);
        assert!(!verify_worm(&swapped));
    }

    #[test]
    fn replicate_counts() {
        let f = builtin_p2();
        assert_eq!(replicate(&f, 0).len(), 3);
        let seeds = replicate(&f, 2);
        assert_eq!(seeds.len(), 15);
        let a = f.periodicity();
        for s in &seeds {
            if let Some(t) = seeds.iter().find(|t| t.index == s.index + 3) {
                assert_eq!(a.apply_dir(s.direction), t.direction);
                assert_eq!(a.apply(&s.singularity), t.singularity);
            }
        }
    }
}
