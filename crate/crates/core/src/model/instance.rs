use serde::{Deserialize, Serialize};

use super::attitude::{Attitude, AttitudeProfile};
use super::transition::TransitionModel;
use crate::error::{Error, Result};

/// Version tag written into every instance and environment file.
pub const SCHEMA_VERSION: u32 = 1;

const BOUND_TOLERANCE: f64 = 1e-9;

/// A point target with its visible window and imaging requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: usize,
    /// Window start in seconds.
    pub ws: f64,
    /// Window end in seconds.
    pub we: f64,
    /// Imaging duration in seconds.
    pub du: f64,
    pub expected_profit: f64,
    /// Pointing attitude over `[ws, we]`.
    pub profile: AttitudeProfile,
}

impl Task {
    /// Attitude required to image this task at absolute time `t`.
    pub fn attitude_at(&self, t: f64) -> Result<Attitude> {
        if !(self.ws..=self.we).contains(&t) {
            return Err(Error::OutOfWindow {
                task: self.id,
                t,
                ws: self.ws,
                we: self.we,
            });
        }
        Ok(self.profile.at(t - self.ws))
    }

    /// Same as [`Task::attitude_at`] but extrapolates outside the window.
    #[inline]
    pub fn attitude_unchecked(&self, t: f64) -> Attitude {
        self.profile.at(t - self.ws)
    }

    /// Latest start that still finishes imaging inside the window.
    #[inline]
    pub fn latest_start(&self) -> f64 {
        self.we - self.du
    }
}

/// Symmetric maneuvering limits for pitch and roll, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeBounds {
    pub pitch_deg: f64,
    pub roll_deg: f64,
}

impl AttitudeBounds {
    pub const fn symmetric(limit_deg: f64) -> Self {
        Self {
            pitch_deg: limit_deg,
            roll_deg: limit_deg,
        }
    }

    fn contains(&self, att: &Attitude) -> bool {
        att.pitch.abs() <= self.pitch_deg + BOUND_TOLERANCE
            && att.roll.abs() <= self.roll_deg + BOUND_TOLERANCE
            && att.yaw.is_finite()
    }
}

/// A deterministic scheduling scenario.
///
/// Construct through [`Instance::new`], which validates every invariant and caches
/// derived quantities (maximum transition time and window-start ranks).
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    tasks: Vec<Task>,
    horizon: f64,
    mmc: f64,
    expected_rate: f64,
    transition: TransitionModel,
    bounds: AttitudeBounds,
    max_transition_time: f64,
    full_rank: Vec<usize>,
}

impl Instance {
    pub fn new(
        tasks: Vec<Task>,
        horizon: f64,
        mmc: f64,
        expected_rate: f64,
        transition: TransitionModel,
        bounds: AttitudeBounds,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if tasks.is_empty() {
            return bad("instance has no tasks".into());
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return bad(format!("horizon {horizon} must be positive"));
        }
        if !(mmc > 0.0 && mmc.is_finite()) {
            return bad(format!("memory capacity {mmc} must be positive"));
        }
        if !(expected_rate > 0.0 && expected_rate.is_finite()) {
            return bad(format!("expected rate {expected_rate} must be positive"));
        }
        if !(bounds.pitch_deg >= 0.0 && bounds.roll_deg >= 0.0) {
            return bad("attitude bounds must be non-negative".into());
        }
        let max_sweep = transition.min_rate();
        for (idx, task) in tasks.iter().enumerate() {
            let id = task.id;
            if id != idx {
                return bad(format!("task at position {idx} has id {id}"));
            }
            if !(0.0 <= task.ws && task.ws < task.we && task.we <= horizon) {
                return bad(format!(
                    "task {id} window [{}, {}] not inside [0, {horizon}]",
                    task.ws, task.we
                ));
            }
            if !(task.du > 0.0 && task.du <= task.we - task.ws) {
                return bad(format!("task {id} duration {} does not fit its window", task.du));
            }
            if !(task.expected_profit > 0.0 && task.expected_profit.is_finite()) {
                return bad(format!("task {id} expected profit must be positive"));
            }
            let (a, b) = (task.profile.at(0.0), task.profile.at(task.we - task.ws));
            if !(a.is_finite() && b.is_finite() && task.profile.rate.is_finite()) {
                return bad(format!("task {id} attitude profile is not finite"));
            }
            if !bounds.contains(&a) || !bounds.contains(&b) {
                return bad(format!("task {id} attitude leaves the maneuvering bounds"));
            }
            // Keeps the delay function strictly decreasing between transition-model
            // boundaries, which the earliest-start search relies on.
            if task.profile.angular_speed_bound() >= max_sweep {
                return bad(format!(
                    "task {id} attitude sweep rate {} deg/s is not below the slowest maneuver rate {max_sweep} deg/s",
                    task.profile.angular_speed_bound()
                ));
            }
        }

        let max_angle = max_transition_angle(&tasks, &bounds);
        let max_transition_time = transition.supremum_up_to(max_angle);

        let mut order: Vec<usize> = (0..tasks.len()).collect();
        order.sort_by(|&a, &b| tasks[a].ws.total_cmp(&tasks[b].ws).then(a.cmp(&b)));
        let mut full_rank = vec![0; tasks.len()];
        for (pos, &id) in order.iter().enumerate() {
            full_rank[id] = pos + 1;
        }

        Ok(Self {
            tasks,
            horizon,
            mmc,
            expected_rate,
            transition,
            bounds,
            max_transition_time,
            full_rank,
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    #[inline]
    pub fn task(&self, id: usize) -> &Task {
        &self.tasks[id]
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Scheduling horizon end (ST) in seconds.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Maximum memory capacity.
    pub fn mmc(&self) -> f64 {
        self.mmc
    }

    /// Expected memory write rate per second of imaging.
    pub fn expected_rate(&self) -> f64 {
        self.expected_rate
    }

    pub fn transition(&self) -> &TransitionModel {
        &self.transition
    }

    pub fn bounds(&self) -> AttitudeBounds {
        self.bounds
    }

    /// Longest maneuver the satellite can ever need.
    pub fn max_transition_time(&self) -> f64 {
        self.max_transition_time
    }

    /// 1-based position of the task among all tasks ordered by window start (ties by id).
    #[inline]
    pub fn full_rank(&self, id: usize) -> usize {
        self.full_rank[id]
    }

    #[inline]
    pub fn transition_time(&self, from: &Attitude, to: &Attitude) -> f64 {
        self.transition.time(from.angle_to(to))
    }
}

/// Largest attainable maneuver angle: full pitch and roll ranges plus the yaw spread
/// over every task (and the boot attitude).
fn max_transition_angle(tasks: &[Task], bounds: &AttitudeBounds) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
    for t in tasks {
        for att in [t.profile.at(0.0), t.profile.at(t.we - t.ws)] {
            lo = lo.min(att.yaw);
            hi = hi.max(att.yaw);
        }
    }
    2.0 * bounds.pitch_deg + 2.0 * bounds.roll_deg + (hi - lo)
}

/// One sampled world: realized profits, memory write rates and cloud visibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentRealization {
    pub seed: u64,
    pub actual_profit: Vec<f64>,
    #[serde(rename = "actual_rate_units_per_s")]
    pub actual_rate: Vec<f64>,
    pub visible: Vec<bool>,
}

impl EnvironmentRealization {
    /// Realization in which every task is visible and all quantities equal their expectations.
    pub fn expected(instance: &Instance) -> Self {
        Self {
            seed: 0,
            actual_profit: instance.tasks().iter().map(|t| t.expected_profit).collect(),
            actual_rate: vec![instance.expected_rate(); instance.len()],
            visible: vec![true; instance.len()],
        }
    }

    pub fn check_against(&self, instance: &Instance) -> Result<()> {
        let n = instance.len();
        if self.actual_profit.len() != n || self.actual_rate.len() != n || self.visible.len() != n {
            return Err(Error::InvalidEnvironment(format!(
                "vector lengths ({}, {}, {}) do not match {n} tasks",
                self.actual_profit.len(),
                self.actual_rate.len(),
                self.visible.len()
            )));
        }
        if let Some(i) = self.actual_profit.iter().position(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidEnvironment(format!("task {i} has invalid profit")));
        }
        if let Some(i) = self.actual_rate.iter().position(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidEnvironment(format!("task {i} has non-positive rate")));
        }
        Ok(())
    }

    /// Realized memory consumed by imaging task `id`.
    #[inline]
    pub fn memory_draw(&self, instance: &Instance, id: usize) -> f64 {
        self.actual_rate[id] * instance.task(id).du
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TaskRecord {
    id: usize,
    ws_s: f64,
    we_s: f64,
    du_s: f64,
    expected_profit: f64,
    pitch_start_deg: f64,
    pitch_rate_deg_per_s: f64,
    roll_start_deg: f64,
    roll_rate_deg_per_s: f64,
    yaw_start_deg: f64,
    yaw_rate_deg_per_s: f64,
}

/// On-disk layout of an instance.
#[derive(Serialize, Deserialize)]
pub(crate) struct InstanceRecord {
    schema_version: u32,
    horizon_s: f64,
    mmc_units: f64,
    expected_rate_units_per_s: f64,
    attitude_bounds: AttitudeBounds,
    transition: TransitionModel,
    tasks: Vec<TaskRecord>,
}

impl From<&Instance> for InstanceRecord {
    fn from(inst: &Instance) -> Self {
        let tasks = inst
            .tasks
            .iter()
            .map(|t| TaskRecord {
                id: t.id,
                ws_s: t.ws,
                we_s: t.we,
                du_s: t.du,
                expected_profit: t.expected_profit,
                pitch_start_deg: t.profile.start.pitch,
                pitch_rate_deg_per_s: t.profile.rate.pitch,
                roll_start_deg: t.profile.start.roll,
                roll_rate_deg_per_s: t.profile.rate.roll,
                yaw_start_deg: t.profile.start.yaw,
                yaw_rate_deg_per_s: t.profile.rate.yaw,
            })
            .collect();
        InstanceRecord {
            schema_version: SCHEMA_VERSION,
            horizon_s: inst.horizon,
            mmc_units: inst.mmc,
            expected_rate_units_per_s: inst.expected_rate,
            attitude_bounds: inst.bounds,
            transition: inst.transition.clone(),
            tasks,
        }
    }
}

impl TryFrom<InstanceRecord> for Instance {
    type Error = Error;

    fn try_from(rec: InstanceRecord) -> Result<Self> {
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: rec.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let tasks = rec
            .tasks
            .into_iter()
            .map(|t| Task {
                id: t.id,
                ws: t.ws_s,
                we: t.we_s,
                du: t.du_s,
                expected_profit: t.expected_profit,
                profile: AttitudeProfile {
                    start: Attitude::new(t.pitch_start_deg, t.roll_start_deg, t.yaw_start_deg),
                    rate: Attitude::new(
                        t.pitch_rate_deg_per_s,
                        t.roll_rate_deg_per_s,
                        t.yaw_rate_deg_per_s,
                    ),
                },
            })
            .collect();
        Instance::new(
            tasks,
            rec.horizon_s,
            rec.mmc_units,
            rec.expected_rate_units_per_s,
            rec.transition,
            rec.attitude_bounds,
        )
    }
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = InstanceRecord::deserialize(deserializer)?;
        Instance::try_from(rec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn constant_task(id: usize, ws: f64, we: f64, du: f64, att: Attitude) -> Task {
        Task {
            id,
            ws,
            we,
            du,
            expected_profit: 10.0,
            profile: AttitudeProfile::constant(att),
        }
    }

    fn single(bounds: AttitudeBounds) -> Result<Instance> {
        Instance::new(
            vec![constant_task(0, 0.0, 100.0, 10.0, Attitude::ZERO)],
            1000.0,
            100.0,
            1.0,
            TransitionModel::standard(),
            bounds,
        )
    }

    #[test]
    fn attitude_at_rejects_times_outside_window() {
        let task = Task {
            id: 0,
            ws: 0.0,
            we: 100.0,
            du: 10.0,
            expected_profit: 1.0,
            profile: AttitudeProfile::linear(
                Attitude::new(27.0, 5.0, 0.0),
                Attitude::new(-27.0, 5.0, 0.0),
                100.0,
            ),
        };
        assert_eq!(task.attitude_at(50.0).unwrap(), Attitude::new(0.0, 5.0, 0.0));
        assert_eq!(task.attitude_at(25.0).unwrap(), Attitude::new(13.5, 5.0, 0.0));
        assert!(matches!(task.attitude_at(100.5), Err(Error::OutOfWindow { .. })));
        assert!(matches!(task.attitude_at(-0.1), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn max_transition_time_from_bounds() {
        assert_eq!(single(AttitudeBounds::symmetric(27.0)).unwrap().max_transition_time(), 58.0);
        assert_eq!(single(AttitudeBounds::symmetric(0.0)).unwrap().max_transition_time(), 5.0);
        assert_eq!(single(AttitudeBounds::symmetric(10.0)).unwrap().max_transition_time(), 32.0);
    }

    #[test]
    fn rejects_invariant_violations() {
        let mk = |task: Task| {
            Instance::new(
                vec![task],
                1000.0,
                100.0,
                1.0,
                TransitionModel::standard(),
                AttitudeBounds::symmetric(27.0),
            )
        };
        assert!(mk(constant_task(0, 10.0, 5.0, 1.0, Attitude::ZERO)).is_err());
        assert!(mk(constant_task(0, 0.0, 5.0, 6.0, Attitude::ZERO)).is_err());
        assert!(mk(constant_task(0, 0.0, 2000.0, 6.0, Attitude::ZERO)).is_err());
        assert!(mk(constant_task(1, 0.0, 50.0, 6.0, Attitude::ZERO)).is_err());
        assert!(mk(constant_task(0, 0.0, 50.0, 6.0, Attitude::new(30.0, 0.0, 0.0))).is_err());
        let mut fast = constant_task(0, 0.0, 50.0, 6.0, Attitude::ZERO);
        fast.profile.rate.pitch = 1.0;
        assert!(mk(fast).is_err());
        let mut free = constant_task(0, 0.0, 50.0, 6.0, Attitude::ZERO);
        free.expected_profit = 0.0;
        assert!(mk(free).is_err());
    }

    #[test]
    fn full_rank_breaks_ties_by_id() {
        let inst = Instance::new(
            vec![
                constant_task(0, 50.0, 100.0, 10.0, Attitude::ZERO),
                constant_task(1, 10.0, 100.0, 10.0, Attitude::ZERO),
                constant_task(2, 50.0, 100.0, 10.0, Attitude::ZERO),
            ],
            1000.0,
            100.0,
            1.0,
            TransitionModel::standard(),
            AttitudeBounds::symmetric(27.0),
        )
        .unwrap();
        assert_eq!(
            (inst.full_rank(0), inst.full_rank(1), inst.full_rank(2)),
            (2, 1, 3)
        );
    }

    #[test]
    fn environment_length_mismatch_is_reported() {
        let inst = single(AttitudeBounds::symmetric(27.0)).unwrap();
        let mut env = EnvironmentRealization::expected(&inst);
        assert!(env.check_against(&inst).is_ok());
        env.visible.push(true);
        assert!(env.check_against(&inst).is_err());
    }
}
