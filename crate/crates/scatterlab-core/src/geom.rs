//! Exact plane geometry on rational points and integer directions.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Sub};

use crate::rat::Rat;

/// Integer lattice vector.
pub type IVec = [i64; 2];

/// A rational point of the chart.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pt {
    pub x: Rat,
    pub y: Rat,
}

impl Pt {
    pub fn new(x: Rat, y: Rat) -> Pt {
        Pt { x, y }
    }

    pub fn int(x: i64, y: i64) -> Pt {
        Pt { x: Rat::int(x), y: Rat::int(y) }
    }

    pub fn ratio(xn: i64, xd: i64, yn: i64, yd: i64) -> Pt {
        Pt { x: Rat::new(xn, xd), y: Rat::new(yn, yd) }
    }

    /// `self + s * v`.
    pub fn offset(&self, v: IVec, s: &Rat) -> Pt {
        Pt { x: &self.x + &(s * &Rat::int(v[0])), y: &self.y + &(s * &Rat::int(v[1])) }
    }

    pub fn shift(&self, v: IVec) -> Pt {
        self.offset(v, &Rat::one())
    }

    pub fn midpoint(&self, o: &Pt) -> Pt {
        let half = Rat::new(1, 2);
        Pt { x: (&self.x + &o.x) * &half, y: (&self.y + &o.y) * &half }
    }
}

impl fmt::Debug for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add<&Pt> for &Pt {
    type Output = Pt;
    fn add(self, o: &Pt) -> Pt {
        Pt { x: &self.x + &o.x, y: &self.y + &o.y }
    }
}

impl Sub<&Pt> for &Pt {
    type Output = Pt;
    fn sub(self, o: &Pt) -> Pt {
        Pt { x: &self.x - &o.x, y: &self.y - &o.y }
    }
}

pub fn det(a: IVec, b: IVec) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn dot(a: IVec, b: IVec) -> i64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn neg(a: IVec) -> IVec {
    [-a[0], -a[1]]
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Primitive vector along `v` and the index `g` with `v = g * prim`.
pub fn primitive(v: IVec) -> (IVec, i64) {
    let g = gcd(v[0], v[1]);
    assert!(g != 0, "zero vector has no primitive direction");
    ([v[0] / g, v[1] / g], g)
}

/// Rational determinant of two point differences.
pub fn det_pt(a: &Pt, b: &Pt) -> Rat {
    &(&a.x * &b.y) - &(&a.y * &b.x)
}

fn dir_pt(v: IVec) -> Pt {
    Pt::int(v[0], v[1])
}

/// Intersection of `p + s u` and `q + r v`: returns `(s, r)` or `None` if parallel.
pub fn intersect(p: &Pt, u: IVec, q: &Pt, v: IVec) -> Option<(Rat, Rat)> {
    let dn = det(u, v);
    if dn == 0 {
        return None;
    }
    let w = q - p;
    let dn = Rat::int(dn);
    let s = det_pt(&w, &dir_pt(v)) / dn.clone();
    let r = det_pt(&w, &dir_pt(u)) / dn;
    Some((s, r))
}

/// Whether `q` lies on the line `p + s u`, and if so the parameter `s`.
pub fn param_on_line(p: &Pt, u: IVec, q: &Pt) -> Option<Rat> {
    let w = q - p;
    if !det_pt(&w, &dir_pt(u)).is_zero() {
        return None;
    }
    Some(if u[0] != 0 { &w.x / &Rat::int(u[0]) } else { &w.y / &Rat::int(u[1]) })
}

/// Half-plane index of a direction for angular sorting: 0 for angles in `[0, pi)`.
fn half(v: IVec) -> u8 {
    if v[1] > 0 || (v[1] == 0 && v[0] > 0) {
        0
    } else {
        1
    }
}

/// Counterclockwise angular order starting from the positive x-axis.
pub fn angle_cmp(a: IVec, b: IVec) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| 0.cmp(&det(a, b)))
}

/// 2x2 integer matrix acting on column vectors.
pub type Mat2 = [[i64; 2]; 2];

pub fn mat_vec(m: &Mat2, v: IVec) -> IVec {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn mat_det(m: &Mat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Inverse of a unimodular matrix.
pub fn mat_inv(m: &Mat2) -> Mat2 {
    let d = mat_det(m);
    assert!(d == 1 || d == -1, "matrix is not unimodular");
    [[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_sort_ccw() {
        let mut v = alloc::vec![[0, -1], [1, 0], [-1, 1], [0, 1], [1, 1], [-1, -1], [1, -1], [-1, 0]];
        v.sort_by(|a, b| angle_cmp(*a, *b));
        assert_eq!(v, alloc::vec![[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]]);
    }

    #[test]
    fn line_intersection() {
        let (s, r) = intersect(&Pt::int(0, 0), [-1, 3], &Pt::int(-1, 0), [1, 3]).unwrap();
        assert_eq!(s, Rat::new(1, 2));
        assert_eq!(r, Rat::new(1, 2));
        assert!(intersect(&Pt::int(0, 0), [1, 1], &Pt::int(3, 0), [2, 2]).is_none());
    }

    #[test]
    fn unimodular_inverse() {
        let m = [[1, 0], [-9, 1]];
        assert_eq!(mat_mul(&m, &mat_inv(&m)), [[1, 0], [0, 1]]);
    }
}
