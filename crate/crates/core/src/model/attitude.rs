use serde::{Deserialize, Serialize};

/// Satellite pointing attitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl Attitude {
    /// Boot attitude of every rollout.
    pub const ZERO: Attitude = Attitude {
        pitch: 0.0,
        roll: 0.0,
        yaw: 0.0,
    };

    pub const fn new(pitch: f64, roll: f64, yaw: f64) -> Self {
        Self { pitch, roll, yaw }
    }

    pub fn is_finite(&self) -> bool {
        self.pitch.is_finite() && self.roll.is_finite() && self.yaw.is_finite()
    }

    /// Sum of absolute per-axis differences.
    #[inline]
    pub fn angle_to(&self, other: &Attitude) -> f64 {
        transition_angle(self, other)
    }
}

/// Total maneuver angle between two attitudes: the L1 distance over pitch, roll and yaw.
#[inline]
pub fn transition_angle(a: &Attitude, b: &Attitude) -> f64 {
    (a.pitch - b.pitch).abs() + (a.roll - b.roll).abs() + (a.yaw - b.yaw).abs()
}

/// Attitude as a linear function of time elapsed since the window opens.
///
/// `start` is the attitude at `ws`; `rate` holds per-axis angular rates in degrees per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeProfile {
    pub start: Attitude,
    pub rate: Attitude,
}

impl AttitudeProfile {
    pub const fn constant(attitude: Attitude) -> Self {
        Self {
            start: attitude,
            rate: Attitude::ZERO,
        }
    }

    /// Profile moving linearly from `from` to `to` over `span` seconds.
    pub fn linear(from: Attitude, to: Attitude, span: f64) -> Self {
        Self {
            start: from,
            rate: Attitude::new(
                (to.pitch - from.pitch) / span,
                (to.roll - from.roll) / span,
                (to.yaw - from.yaw) / span,
            ),
        }
    }

    #[inline]
    pub fn at(&self, elapsed: f64) -> Attitude {
        Attitude {
            pitch: self.start.pitch + self.rate.pitch * elapsed,
            roll: self.start.roll + self.rate.roll * elapsed,
            yaw: self.start.yaw + self.rate.yaw * elapsed,
        }
    }

    /// Upper bound on how fast the L1 angle to any fixed attitude can change.
    pub fn angular_speed_bound(&self) -> f64 {
        self.rate.pitch.abs() + self.rate.roll.abs() + self.rate.yaw.abs()
    }
}
