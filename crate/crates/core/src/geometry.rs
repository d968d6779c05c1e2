//! Data model: observed point sets, the centering/scaling normalization, and
//! the reduced objective F(a,b) = a^2 + b^2 - rbar^2 obtained by eliminating
//! the radius through R = rbar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, pairwise_sum_by, Vec2};

/// Minimum number of points accepted by any fitting operation.
pub const MIN_POINTS: usize = 3;

/// A set of observed 2-D points in the raw (input) frame.
///
/// Construction only requires finite coordinates; the `n >= 3` requirement is
/// enforced at the fitting boundary (`normalize`), since point sets are also
/// used to represent degenerate inputs such as lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Vec2>,
}

impl PointSet {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateInput("non-finite coordinate"));
        }
        Ok(PointSet { points })
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(xy.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Mean Euclidean distance from `center` to the points.
    pub fn mean_distance_to(&self, center: Vec2) -> f64 {
        mean_distance(&self.points, center)
    }
}

fn mean_distance(points: &[Vec2], center: Vec2) -> f64 {
    pairwise_sum_by(points.len(), |i| (points[i] - center).norm()) / points.len() as f64
}

/// The centering/scaling transform applied to raw data before fitting:
/// x -> (x - x_mean) / scale, and its inverse for results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub x_mean: f64,
    pub y_mean: f64,
    /// RMS distance of the centered points from the origin; always > 0.
    pub scale: f64,
}

impl NormalizationTransform {
    pub const IDENTITY: NormalizationTransform = NormalizationTransform {
        x_mean: 0.0,
        y_mean: 0.0,
        scale: 1.0,
    };
}

/// Aggregate moments of the normalized data, computed once with pairwise
/// summation. `xx` etc. denote sample means: xx = mean(x^2), xxy = mean(x^2 y).
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    /// z_i = x_i^2 + y_i^2 per point.
    pub z: Vec<f64>,
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    /// mean(x^2 y); its sign locates the wrong valley.
    pub xxy: f64,
    /// mean(z); equals 1 up to round-off on normalized data.
    pub z_mean: f64,
}

/// Centered, unit-RMS-scaled data with cached moments. Only produced by
/// [`normalize`], which guarantees mean(x) = mean(y) ~ 0 and mean(z) ~ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPointSet {
    points: Vec<Vec2>,
    transform: NormalizationTransform,
    moments: Moments,
}

impl NormalizedPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn transform(&self) -> NormalizationTransform {
        self.transform
    }

    pub fn moments(&self) -> &Moments {
        &self.moments
    }
}

/// Centers the data on its centroid and scales it to unit RMS radius.
///
/// Rejects inputs with fewer than [`MIN_POINTS`] points and inputs whose
/// points all coincide (zero scale).
pub fn normalize(data: &PointSet) -> Result<NormalizedPointSet> {
    let n = data.len();
    if n < MIN_POINTS {
        return Err(Error::DegenerateInput("fewer than 3 points"));
    }
    let pts = data.points();
    let inv_n = 1.0 / n as f64;
    let x_mean = pairwise_sum_by(n, |i| pts[i].x) * inv_n;
    let y_mean = pairwise_sum_by(n, |i| pts[i].y) * inv_n;
    let scale_sq = pairwise_sum_by(n, |i| {
        let dx = pts[i].x - x_mean;
        let dy = pts[i].y - y_mean;
        dx * dx + dy * dy
    }) * inv_n;
    let scale = scale_sq.sqrt();
    if scale <= 0.0 {
        return Err(Error::DegenerateInput("all points coincide"));
    }

    let inv_s = 1.0 / scale;
    let points: Vec<Vec2> = pts
        .iter()
        .map(|p| Vec2::new((p.x - x_mean) * inv_s, (p.y - y_mean) * inv_s))
        .collect();

    let z: Vec<f64> = points.iter().map(|p| p.norm_sq()).collect();
    let xx = pairwise_sum_by(n, |i| points[i].x * points[i].x) * inv_n;
    let yy = pairwise_sum_by(n, |i| points[i].y * points[i].y) * inv_n;
    let xy = pairwise_sum_by(n, |i| points[i].x * points[i].y) * inv_n;
    let xxy = pairwise_sum_by(n, |i| points[i].x * points[i].x * points[i].y) * inv_n;
    let z_mean = pairwise_sum(&z) * inv_n;

    Ok(NormalizedPointSet {
        points,
        transform: NormalizationTransform {
            x_mean,
            y_mean,
            scale,
        },
        moments: Moments {
            z,
            xx,
            yy,
            xy,
            xxy,
            z_mean,
        },
    })
}

/// Coordinate frame a fitted circle or line is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Normalized,
    Raw,
}

/// A circle with center (a, b) and radius r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub frame: Frame,
}

impl Circle {
    pub fn normalized(a: f64, b: f64, r: f64) -> Self {
        Circle {
            a,
            b,
            r,
            frame: Frame::Normalized,
        }
    }

    pub fn raw(a: f64, b: f64, r: f64) -> Self {
        Circle {
            a,
            b,
            r,
            frame: Frame::Raw,
        }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.a, self.b)
    }

    pub fn params(&self) -> [f64; 3] {
        [self.a, self.b, self.r]
    }

    /// Maps a normalized-frame circle back to the raw frame:
    /// a -> S a + x_mean, b -> S b + y_mean, R -> S R.
    ///
    /// Panics if the circle is already in the raw frame.
    pub fn denormalized(&self, t: NormalizationTransform) -> Circle {
        assert_eq!(
            self.frame,
            Frame::Normalized,
            "denormalize requires a normalized-frame circle"
        );
        Circle {
            a: t.scale * self.a + t.x_mean,
            b: t.scale * self.b + t.y_mean,
            r: t.scale * self.r,
            frame: Frame::Raw,
        }
    }
}

/// Outcome of a fit: a circle, or the best-fitting line when no circle
/// exists (degenerate/collinear data).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitResult {
    #[serde(rename = "circle")]
    CircleFound(Circle),
    #[serde(rename = "line")]
    LineFound {
        point: Vec2,
        /// Unit direction vector of the line.
        direction: Vec2,
        frame: Frame,
    },
}

impl FitResult {
    pub fn circle(&self) -> Option<&Circle> {
        match self {
            FitResult::CircleFound(c) => Some(c),
            FitResult::LineFound { .. } => None,
        }
    }

    /// Maps a normalized-frame result back to the raw frame. Directions are
    /// unchanged (the transform is a uniform scaling plus translation).
    pub fn denormalized(&self, t: NormalizationTransform) -> FitResult {
        match *self {
            FitResult::CircleFound(c) => FitResult::CircleFound(c.denormalized(t)),
            FitResult::LineFound {
                point,
                direction,
                frame,
            } => {
                assert_eq!(frame, Frame::Normalized);
                FitResult::LineFound {
                    point: Vec2::new(t.scale * point.x + t.x_mean, t.scale * point.y + t.y_mean),
                    direction,
                    frame: Frame::Raw,
                }
            }
        }
    }
}

/// Mean distance rbar from `center` to the points: the optimal radius for
/// that center, obtained by solving dF/dR = 0.
pub fn radius_for_center(data: &NormalizedPointSet, center: Vec2) -> f64 {
    mean_distance(data.points(), center)
}

/// Reduced objective F(a,b) = a^2 + b^2 - rbar^2; valid on centered data,
/// where the -2a*mean(x) - 2b*mean(y) terms vanish.
pub fn reduced_objective(data: &NormalizedPointSet, center: Vec2) -> f64 {
    let rbar = radius_for_center(data, center);
    center.norm_sq() - rbar * rbar
}

/// Full geometric objective sum_i (r_i - rbar)^2 with R = rbar; used for
/// testing and reporting. Satisfies full = sum(z) + n * reduced on centered
/// data.
pub fn full_objective(data: &NormalizedPointSet, center: Vec2) -> f64 {
    let pts = data.points();
    let n = pts.len();
    let rbar = mean_distance(pts, center);
    pairwise_sum_by(n, |i| {
        let d = (pts[i] - center).norm() - rbar;
        d * d
    })
}
