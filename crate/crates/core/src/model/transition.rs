use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One linear piece of the maneuver-time function: `offset + angle / rate` on
/// `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSegment {
    #[serde(rename = "offset_s")]
    pub offset: f64,
    #[serde(rename = "rate_deg_per_s")]
    pub rate: f64,
    #[serde(rename = "lower_deg")]
    pub lower: f64,
    /// `None` marks the final, unbounded segment.
    #[serde(rename = "upper_deg")]
    pub upper: Option<f64>,
}

impl TransitionSegment {
    #[inline]
    fn eval(&self, angle: f64) -> f64 {
        self.offset + angle / self.rate
    }
}

/// Piecewise-linear attitude transition time as a function of the maneuver angle.
///
/// Segments are lower-inclusive and upper-exclusive, so at a shared boundary the
/// later segment applies. The function may be discontinuous at boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransitionModelFile", into = "TransitionModelFile")]
pub struct TransitionModel {
    segments: Vec<TransitionSegment>,
    jumps: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TransitionModelFile {
    segments: Vec<TransitionSegment>,
}

impl TryFrom<TransitionModelFile> for TransitionModel {
    type Error = Error;

    fn try_from(file: TransitionModelFile) -> Result<Self> {
        TransitionModel::new(file.segments)
    }
}

impl From<TransitionModel> for TransitionModelFile {
    fn from(model: TransitionModel) -> Self {
        TransitionModelFile {
            segments: model.segments,
        }
    }
}

impl TransitionModel {
    pub fn new(segments: Vec<TransitionSegment>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidTransition(msg));
        let Some(first) = segments.first() else {
            return bad("no segments".into());
        };
        if first.lower != 0.0 {
            return bad(format!("first segment starts at {} instead of 0", first.lower));
        }
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.rate > 0.0 && seg.rate.is_finite()) {
                return bad(format!("segment {i} has non-positive rate {}", seg.rate));
            }
            if !(seg.offset >= 0.0 && seg.offset.is_finite()) {
                return bad(format!("segment {i} has negative offset {}", seg.offset));
            }
            let last = i + 1 == segments.len();
            match (seg.upper, last) {
                (None, true) => {}
                (None, false) => return bad(format!("segment {i} is unbounded but not last")),
                (Some(_), true) => return bad("last segment must be unbounded".into()),
                (Some(upper), false) => {
                    if upper <= seg.lower {
                        return bad(format!("segment {i} has empty range"));
                    }
                    if segments[i + 1].lower != upper {
                        return bad(format!("gap or overlap between segments {i} and {}", i + 1));
                    }
                }
            }
        }
        let jumps = segments
            .windows(2)
            .filter_map(|w| {
                let at = w[1].lower;
                (w[0].eval(at) != w[1].eval(at)).then_some(at)
            })
            .collect();
        Ok(Self { segments, jumps })
    }

    /// Four-segment maneuver model: (5 s, 1 deg/s) below 15 deg, (10 s, 2 deg/s) below
    /// 40 deg, (16 s, 2.5 deg/s) below 90 deg, (22 s, 3 deg/s) beyond.
    pub fn standard() -> Self {
        let seg = |offset, rate, lower, upper| TransitionSegment {
            offset,
            rate,
            lower,
            upper,
        };
        Self::new(vec![
            seg(5.0, 1.0, 0.0, Some(15.0)),
            seg(10.0, 2.0, 15.0, Some(40.0)),
            seg(16.0, 2.5, 40.0, Some(90.0)),
            seg(22.0, 3.0, 90.0, None),
        ])
        .expect("standard transition model is well formed")
    }

    pub fn segments(&self) -> &[TransitionSegment] {
        &self.segments
    }

    fn segment_for(&self, angle: f64) -> &TransitionSegment {
        // Segments are contiguous from 0, so the last one whose lower bound is <= angle
        // is the one whose half-open range contains it.
        let idx = self.segments.partition_point(|s| s.lower <= angle);
        &self.segments[idx.saturating_sub(1)]
    }

    /// Transition time in seconds for a maneuver of `angle` degrees.
    #[inline]
    pub fn time(&self, angle: f64) -> f64 {
        self.segment_for(angle).eval(angle)
    }

    pub fn min_rate(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.rate)
            .fold(f64::INFINITY, f64::min)
    }

    /// Segment boundaries at which the left limit differs from the value.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Supremum of the transition time over angles in `[0, max_angle]`.
    ///
    /// Includes left limits at interior boundaries, so the bound holds even where the
    /// function drops across a boundary.
    pub fn supremum_up_to(&self, max_angle: f64) -> f64 {
        let mut sup = self.time(max_angle);
        for w in self.segments.windows(2) {
            if w[1].lower <= max_angle {
                sup = sup.max(w[0].eval(w[1].lower));
            }
        }
        sup
    }
}

impl Default for TransitionModel {
    fn default() -> Self {
        Self::standard()
    }
}
