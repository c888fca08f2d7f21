//! Planar rigid transforms and screw-motion interpolation.
//!
//! Poses live in SE(2) with the angle kept in `(-pi, pi]`. Interpolation
//! between two poses follows the screw motion `A(s) = A_start * exp(s * xi)`
//! with the twist `xi = log(A_start^-1 * A_goal)`, so intermediate poses trace
//! a circular arc about the screw center (or a straight line when the
//! relative rotation vanishes).

use serde::{Deserialize, Serialize};

/// Rotations below this magnitude use the translation-only limit of exp/log.
const SMALL_ANGLE: f64 = 1e-9;

/// Wrap an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let t = theta.rem_euclid(two_pi);
    if t > std::f64::consts::PI {
        t - two_pi
    } else {
        t
    }
}

/// Smallest signed difference `a - b`, wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

/// A planar pose: position in meters, heading in radians in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// A planar twist `(vx, vy, omega)` in the body frame of the starting pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist2 {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist2 {
    pub fn scaled(&self, s: f64) -> Twist2 {
        Twist2 {
            vx: self.vx * s,
            vy: self.vy * s,
            omega: self.omega * s,
        }
    }

    /// Exponential map se(2) -> SE(2).
    pub fn exp(&self) -> Pose2 {
        let w = self.omega;
        if w.abs() < SMALL_ANGLE {
            return Pose2::new(self.vx, self.vy, w);
        }
        let (sin_w, cos_w) = w.sin_cos();
        // V(w) maps the body-frame velocity to the displacement.
        let a = sin_w / w;
        let b = (1.0 - cos_w) / w;
        Pose2::new(
            a * self.vx - b * self.vy,
            b * self.vx + a * self.vy,
            normalize_angle(w),
        )
    }
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Pose2 {
        Pose2 {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn identity() -> Pose2 {
        Pose2 {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    /// Compose `self * other` (apply `other` in the frame of `self`).
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let (sin_t, cos_t) = self.theta.sin_cos();
        Pose2::new(
            self.x + cos_t * other.x - sin_t * other.y,
            self.y + sin_t * other.x + cos_t * other.y,
            self.theta + other.theta,
        )
    }

    pub fn inverse(&self) -> Pose2 {
        let (sin_t, cos_t) = self.theta.sin_cos();
        Pose2::new(
            -cos_t * self.x - sin_t * self.y,
            sin_t * self.x - cos_t * self.y,
            -self.theta,
        )
    }

    /// Map a point from the body frame to the world frame.
    pub fn transform_point(&self, px: f64, py: f64) -> (f64, f64) {
        let (sin_t, cos_t) = self.theta.sin_cos();
        (
            self.x + cos_t * px - sin_t * py,
            self.y + sin_t * px + cos_t * py,
        )
    }

    /// Logarithmic map SE(2) -> se(2).
    pub fn log(&self) -> Twist2 {
        let w = normalize_angle(self.theta);
        if w.abs() < SMALL_ANGLE {
            return Twist2 {
                vx: self.x,
                vy: self.y,
                omega: w,
            };
        }
        let (sin_w, cos_w) = w.sin_cos();
        let a = sin_w / w;
        let b = (1.0 - cos_w) / w;
        let det = a * a + b * b;
        // Inverse of V(w).
        Twist2 {
            vx: (a * self.x + b * self.y) / det,
            vy: (-b * self.x + a * self.y) / det,
            omega: w,
        }
    }

    /// Squared Euclidean distance between the position parts.
    pub fn position_dist_sq(&self, other: &Pose2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn position_dist(&self, other: &Pose2) -> f64 {
        self.position_dist_sq(other).sqrt()
    }
}

/// Screw interpolation between two poses at normalized time `s` in `[0, 1]`.
///
/// `s = 0` returns `a` exactly; `s = 1` recovers `b` up to rounding. The
/// translation-only case falls out of the small-angle limit of the twist
/// exponential.
pub fn interpolate_screw(a: &Pose2, b: &Pose2, s: f64) -> Pose2 {
    debug_assert!((0.0..=1.0).contains(&s), "s out of [0,1]: {s}");
    if s == 0.0 {
        return *a;
    }
    let twist = a.inverse().compose(b).log();
    a.compose(&twist.scaled(s).exp())
}
