//! Small fixed-size linear algebra: 2-vectors, symmetric 2x2 matrices, a
//! closed-form symmetric eigendecomposition, and pairwise summation.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A 2-vector, used for data points, circle centers, gradients, and steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn rot90(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        *self = *self + rhs;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Symmetric 2x2 matrix with a single stored off-diagonal entry, so the
/// symmetry holds exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMat2 { xx, xy, yy }
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Frobenius norm.
    pub fn norm(self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }
}

/// A 2x2 matrix stored by columns; here always orthogonal (an eigenbasis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub col0: Vec2,
    pub col1: Vec2,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        col0: Vec2 { x: 1.0, y: 0.0 },
        col1: Vec2 { x: 0.0, y: 1.0 },
    };

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        self.col0 * v.x + self.col1 * v.y
    }

    /// Multiplies by the transpose, i.e. expresses `v` in this basis.
    pub fn tr_mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.col0.dot(v), self.col1.dot(v))
    }

    pub fn det(self) -> f64 {
        self.col0.x * self.col1.y - self.col1.x * self.col0.y
    }
}

/// Eigendecomposition H = Q diag(d1, d2) Q^T of a symmetric 2x2 matrix,
/// ordered d1 >= d2. Column `i` of `q` is the eigenvector of `d{i+1}`.
#[derive(Debug, Clone, Copy)]
pub struct Eigen2 {
    pub d1: f64,
    pub d2: f64,
    pub q: Mat2,
}

/// Closed-form eigendecomposition of a symmetric 2x2 matrix. `q` is always
/// a proper rotation; ties return the identity basis.
pub fn eig_sym_2x2(m: SymMat2) -> Eigen2 {
    let half_tr = 0.5 * (m.xx + m.yy);
    let half_diff = 0.5 * (m.xx - m.yy);
    let disc = (half_diff * half_diff + m.xy * m.xy).sqrt();
    let d1 = half_tr + disc;
    let d2 = half_tr - disc;

    if disc == 0.0 || (m.xy == 0.0 && m.xx >= m.yy) {
        return Eigen2 {
            d1,
            d2,
            q: Mat2::IDENTITY,
        };
    }
    if m.xy == 0.0 {
        // Diagonal with yy > xx: the major axis is y.
        let q = Mat2 {
            col0: Vec2::new(0.0, 1.0),
            col1: Vec2::new(-1.0, 0.0),
        };
        return Eigen2 { d1, d2, q };
    }

    // (H - d1 I) v = 0; take the row giving the larger null vector.
    let v_a = Vec2::new(m.xy, d1 - m.xx);
    let v_b = Vec2::new(d1 - m.yy, m.xy);
    let v = if v_a.norm_sq() >= v_b.norm_sq() {
        v_a
    } else {
        v_b
    };
    let v = v * (1.0 / v.norm());
    Eigen2 {
        d1,
        d2,
        q: Mat2 {
            col0: v,
            col1: v.rot90(),
        },
    }
}

/// Pairwise (cascade) summation of `f(i)` over `0..n`; error grows as
/// O(log n) in units of machine epsilon instead of O(n).
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    fn go<F: Fn(usize) -> f64>(f: &F, lo: usize, hi: usize) -> f64 {
        if hi - lo <= 16 {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            go(f, lo, mid) + go(f, mid, hi)
        }
    }
    go(&f, 0, n)
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_by(xs.len(), |i| xs[i])
}

/// Compensated (Neumaier) summation of `f(i)` over `0..n`: the result is
/// accurate to about one rounding of the exact sum, independent of `n`. Used
/// where comparisons between nearby evaluations must resolve differences of
/// a few ulps.
pub fn compensated_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for i in 0..n {
        let x = f(i);
        let t = sum + x;
        compensation += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + compensation
}
