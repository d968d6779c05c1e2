//! Wrong-valley detection and restart, plus the line fallback when no best
//! circle exists.
//!
//! The objective surface has two valleys stretching to infinity along the
//! data's minor axis. One leads to the minimum; in the other the objective
//! keeps decreasing forever and iterative fits diverge. Which side is wrong
//! is determined by the sign of mean(x^2 y) in the frame aligned with the
//! scatter matrix's major eigenvector.

use crate::error::{Error, Result};
use crate::geometry::{FitResult, Frame, NormalizedPointSet};
use crate::linalg::{eig_sym_2x2, pairwise_sum_by, Mat2, SymMat2, Vec2};

/// Iterates leaving the square [-L, L]^2 trigger the valley check.
pub const BOX_LIMIT: f64 = 100.0;

/// |xxy| at or below this floor (in the rotated frame) means the wrong
/// valley cannot be identified; a best-fitting circle may not exist.
pub const XXY_FLOOR: f64 = 1e-12;

/// Restart budget per fit; the restart point is in the right valley by
/// construction, so one restart should suffice.
pub const MAX_RESTARTS: usize = 2;

/// Scatter matrix of the centered data, from the cached moments.
pub fn scatter_matrix(data: &NormalizedPointSet) -> SymMat2 {
    let m = data.moments();
    SymMat2::new(m.xx, m.xy, m.yy)
}

/// Rotation aligning x with the data's major axis, plus the wrong-valley
/// sign: the wrong valley is where `z_sign * b < 0` in the rotated frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValleyFrame {
    /// Columns are the major and minor eigenvectors of the scatter matrix;
    /// always a proper rotation.
    pub rotation: Mat2,
    /// Sign (+1 or -1) of mean(x^2 y) over the rotated points.
    pub z_sign: f64,
}

/// Builds the rotated frame and the valley sign. Fails with
/// [`Error::AmbiguousValley`] when |xxy| is at or below [`XXY_FLOOR`].
pub fn build_valley_frame(data: &NormalizedPointSet) -> Result<ValleyFrame> {
    let rotation = eig_sym_2x2(scatter_matrix(data)).q;
    let pts = data.points();
    let n = pts.len();
    let xxy = pairwise_sum_by(n, |i| {
        let p = rotation.tr_mul_vec(pts[i]);
        p.x * p.x * p.y
    }) / n as f64;
    if xxy.abs() <= XXY_FLOOR {
        return Err(Error::AmbiguousValley);
    }
    Ok(ValleyFrame {
        rotation,
        z_sign: xxy.signum(),
    })
}

/// What the solver should do after an accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardAction {
    Proceed,
    /// Move the iterate to this point (the right valley) and continue.
    Restart(Vec2),
    /// No best circle exists; return the best-fitting line.
    LineFallback,
}

/// Divergence guard. Lazily orients the valleys the first time an iterate
/// leaves the box, then redirects wrong-valley iterates to `(0, Z L)` in the
/// rotated frame (mapped back), at most [`MAX_RESTARTS`] times.
#[derive(Debug, Default)]
pub struct ValleyGuard {
    frame: Option<Result<ValleyFrame>>,
    restarts: usize,
}

impl ValleyGuard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Restarts performed so far.
    pub fn restarts(&self) -> usize {
        self.restarts
    }

    /// Checks an accepted iterate `p`.
    pub fn check(&mut self, data: &NormalizedPointSet, p: Vec2) -> GuardAction {
        if p.x.abs() <= BOX_LIMIT && p.y.abs() <= BOX_LIMIT {
            return GuardAction::Proceed;
        }
        let frame = self.frame.get_or_insert_with(|| build_valley_frame(data));
        match frame {
            Err(_) => GuardAction::LineFallback,
            Ok(f) => {
                let rotated = f.rotation.tr_mul_vec(p);
                if f.z_sign * rotated.y < 0.0 {
                    if self.restarts >= MAX_RESTARTS {
                        return GuardAction::Proceed;
                    }
                    self.restarts += 1;
                    let restart = f.rotation.mul_vec(Vec2::new(0.0, f.z_sign * BOX_LIMIT));
                    GuardAction::Restart(restart)
                } else {
                    GuardAction::Proceed
                }
            }
        }
    }
}

/// Best-fitting line: through the origin (the raw centroid) along the major
/// eigenvector of the scatter matrix.
pub fn line_fit(data: &NormalizedPointSet) -> FitResult {
    let direction = eig_sym_2x2(scatter_matrix(data)).q.col0;
    FitResult::LineFound {
        point: Vec2::ZERO,
        direction,
        frame: Frame::Normalized,
    }
}
