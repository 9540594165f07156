//! Receding-horizon POMDP action selection over a Gaussian thermal belief.
//!
//! Each planning cycle scores a fixed set of constant-bank arcs against `N`
//! thermal hypotheses sampled from the belief. When the belief is still uncertain
//! (weighted covariance trace above the confidence threshold) the arc that leaves
//! the smallest expected trace after imagined EKF updates wins; otherwise the arc
//! with the largest expected altitude gain wins. Only the first part of the
//! chosen arc is flown before the next cycle replans.
//!
//! The same hypotheses are reused for every arc within a cycle.

use alloc::vec::Vec;

use crate::belief::{GaussianBelief, NoiseConfig, UncertaintyWeights};
use crate::dynamics::{predict_trajectory, ActionTrajectory, AirframeParams, PidState, RollAction, UavState, RECORD_DT};
use crate::environment::sink;
use crate::error::{ensure_positive, Error, Result};
use crate::thermal::{lift_unchecked, ThermalParams};
use crate::Vec2;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Candidate bank angles, rad.
    pub bank_angles: Vec<f64>,
    /// Explore horizon, s.
    pub t_explore: f64,
    /// Exploit horizon as a multiple of the explore horizon.
    pub exploit_extension: f64,
    /// Number of thermal hypotheses per cycle.
    pub n_samples: usize,
    /// Weighted-trace threshold below which the planner exploits.
    pub confidence_thres: f64,
    /// Trajectory sampling interval, s.
    pub dt_record: f64,
    pub weights: UncertaintyWeights,
    /// Still-air sink (m/s) charged to exploit arcs, scaled by load factor.
    /// `None` integrates thermal lift only.
    pub sink_correction: Option<f64>,
    /// Scores closer than this to the best count as ties.
    pub tie_epsilon: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            bank_angles: [-45.0, -30.0, -15.0, 0.0, 15.0, 30.0, 45.0]
                .iter()
                .map(|d: &f64| d.to_radians())
                .collect(),
            t_explore: 4.0,
            exploit_extension: 3.0,
            n_samples: 10,
            confidence_thres: 150.0,
            dt_record: RECORD_DT,
            weights: UncertaintyWeights::default(),
            sink_correction: Some(0.7),
            tie_epsilon: 1e-6,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self, airframe: &AirframeParams) -> Result<()> {
        if self.bank_angles.is_empty() {
            return Err(Error::InvalidConfig("bank angle list is empty"));
        }
        let has_zero = self.bank_angles.contains(&0.0);
        let symmetric = self
            .bank_angles
            .iter()
            .all(|b| self.bank_angles.iter().any(|o| (o + b).abs() < 1e-12));
        if !(has_zero || symmetric) {
            return Err(Error::InvalidConfig("bank angle list must contain 0 or be symmetric"));
        }
        if self.bank_angles.iter().any(|b| !(b.abs() <= airframe.max_bank + 1e-12)) {
            return Err(Error::InvalidConfig("bank angle exceeds airframe max bank"));
        }
        ensure_positive("t_explore", self.t_explore)?;
        ensure_positive("dt_record", self.dt_record)?;
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be positive"));
        }
        if !(self.exploit_extension >= 1.0) {
            return Err(Error::InvalidParameter { name: "exploit_extension", value: self.exploit_extension });
        }
        Ok(())
    }

    pub fn t_exploit(&self) -> f64 {
        self.t_explore * self.exploit_extension
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlannerMode {
    Explore,
    Exploit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerDecision {
    pub chosen_bank: f64,
    pub mode: PlannerMode,
    /// `(bank, score)` for every candidate, in configuration order.
    pub per_action_scores: Vec<(f64, f64)>,
}

/// Draws the cycle's thermal hypotheses. Failed draws are dropped.
pub fn sample_hypotheses<R: Rng + ?Sized>(
    cfg: &PlannerConfig,
    b: &GaussianBelief,
    rng: &mut R,
) -> Vec<ThermalParams> {
    let mut out = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        match b.sample_thermal(rng) {
            Ok(th) => out.push(th),
            Err(e) => log::warn!("dropping thermal hypothesis: {e}"),
        }
    }
    out
}

/// One planning cycle.
pub fn choose_action<R: Rng + ?Sized>(
    cfg: &PlannerConfig,
    uav: &UavState,
    pid: &PidState,
    b: &GaussianBelief,
    airframe: &AirframeParams,
    noise: &NoiseConfig,
    rng: &mut R,
) -> PlannerDecision {
    let hypotheses = sample_hypotheses(cfg, b, rng);
    let (mode, scores) = if b.uncertainty(&cfg.weights) < cfg.confidence_thres {
        (PlannerMode::Exploit, exploit_scores(cfg, uav, pid, airframe, &hypotheses))
    } else {
        (PlannerMode::Explore, explore_scores(cfg, uav, pid, b, airframe, noise, &hypotheses))
    };
    let chosen = select(cfg, &scores, mode);
    PlannerDecision {
        chosen_bank: cfg.bank_angles[chosen],
        mode,
        per_action_scores: cfg.bank_angles.iter().copied().zip(scores).collect(),
    }
}

/// Predicted arc for each configured bank, starting at the relative-frame origin.
pub fn action_trajectories(
    cfg: &PlannerConfig,
    uav: &UavState,
    pid: &PidState,
    airframe: &AirframeParams,
    duration: f64,
) -> Vec<ActionTrajectory> {
    let start = UavState { p: Vec2::zeros(), ..*uav };
    cfg.bank_angles
        .iter()
        .map(|&bank| {
            let action = RollAction { target_bank: bank, duration };
            predict_trajectory(airframe, &start, pid, &action, cfg.dt_record)
        })
        .collect()
}

/// Mean weighted trace left after imagined updates along each explore arc.
/// Lower is better.
pub fn explore_scores(
    cfg: &PlannerConfig,
    uav: &UavState,
    pid: &PidState,
    b: &GaussianBelief,
    airframe: &AirframeParams,
    noise: &NoiseConfig,
    hypotheses: &[ThermalParams],
) -> Vec<f64> {
    action_trajectories(cfg, uav, pid, airframe, cfg.t_explore)
        .iter()
        .map(|traj| {
            let mut total = 0.0;
            let mut used = 0usize;
            for th in hypotheses {
                match imagined_posterior(b, traj, th, noise, cfg.dt_record) {
                    Ok(post) => {
                        total += post.uncertainty(&cfg.weights);
                        used += 1;
                    }
                    Err(e) => log::warn!("explore chain dropped for bank {}: {e}", traj.target_bank),
                }
            }
            if used == 0 {
                f64::INFINITY
            } else {
                total / used as f64
            }
        })
        .collect()
}

/// Runs the belief through the noiseless observations `th` would produce along `traj`.
pub fn imagined_posterior(
    b: &GaussianBelief,
    traj: &ActionTrajectory,
    th: &ThermalParams,
    noise: &NoiseConfig,
    dt_record: f64,
) -> Result<GaussianBelief> {
    let mut belief = *b;
    for pair in traj.points.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        belief = belief.predict_shift(cur.p - prev.p, noise, dt_record);
        belief = belief.ekf_update(lift_unchecked(th, cur.p), noise)?;
    }
    Ok(belief)
}

/// Mean altitude gain (m) along each exploit arc. Higher is better.
pub fn exploit_scores(
    cfg: &PlannerConfig,
    uav: &UavState,
    pid: &PidState,
    airframe: &AirframeParams,
    hypotheses: &[ThermalParams],
) -> Vec<f64> {
    action_trajectories(cfg, uav, pid, airframe, cfg.t_exploit())
        .iter()
        .map(|traj| {
            if hypotheses.is_empty() {
                return f64::NEG_INFINITY;
            }
            let lift: f64 = hypotheses
                .iter()
                .map(|th| altitude_gain(traj, th, cfg.dt_record))
                .sum::<f64>()
                / hypotheses.len() as f64;
            lift - cfg.sink_correction.map_or(0.0, |s0| sink_along(traj, s0, cfg.dt_record))
        })
        .collect()
}

/// Right Riemann sum of the hypothesis' lift over the arc's waypoints after the start.
pub fn altitude_gain(traj: &ActionTrajectory, th: &ThermalParams, dt_record: f64) -> f64 {
    traj.points[1..].iter().map(|pt| lift_unchecked(th, pt.p) * dt_record).sum()
}

/// Load-factor-corrected sink accumulated along the arc, m.
pub fn sink_along(traj: &ActionTrajectory, sink_s0: f64, dt_record: f64) -> f64 {
    traj.points[1..]
        .iter()
        .map(|pt| sink(sink_s0, pt.phi) * dt_record)
        .sum()
}

/// Index of the winning action. Scores within `tie_epsilon` of the best tie;
/// ties go to the smallest |bank|, then to the earliest in the list.
pub fn select(cfg: &PlannerConfig, scores: &[f64], mode: PlannerMode) -> usize {
    let better = |a: f64, b: f64| match mode {
        PlannerMode::Explore => a < b,
        PlannerMode::Exploit => a > b,
    };
    let mut best = scores[0];
    for &s in &scores[1..] {
        if better(s, best) || best.is_nan() {
            best = s;
        }
    }
    let mut chosen: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        let tied = s == best || (s - best).abs() <= cfg.tie_epsilon;
        if !tied {
            continue;
        }
        chosen = match chosen {
            Some(c) if cfg.bank_angles[c].abs() <= cfg.bank_angles[i].abs() => Some(c),
            _ => Some(i),
        };
    }
    chosen.unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, Vector4};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn north(v: f64) -> UavState {
        UavState::level(Vec2::zeros(), v, 0.0, 100.0)
    }

    fn belief_with_trace(trace: f64) -> GaussianBelief {
        GaussianBelief {
            mean: Vector4::new(1.5, 80.0, 10.0, 10.0),
            cov: Matrix4::identity() * (trace / 4.0),
        }
    }

    #[test]
    fn gate_selects_mode_by_trace() {
        let cfg = PlannerConfig::default();
        let af = AirframeParams::default();
        let noise = NoiseConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = choose_action(&cfg, &north(9.0), &PidState::default(), &belief_with_trace(0.5 * cfg.confidence_thres), &af, &noise, &mut rng);
        assert_eq!(d.mode, PlannerMode::Exploit);
        let d = choose_action(&cfg, &north(9.0), &PidState::default(), &belief_with_trace(2.0 * cfg.confidence_thres), &af, &noise, &mut rng);
        assert_eq!(d.mode, PlannerMode::Explore);
        assert_eq!(d.per_action_scores.len(), cfg.bank_angles.len());
        assert!(d.per_action_scores.iter().all(|(_, s)| *s >= 0.0));
    }

    #[test]
    fn degenerate_belief_exploits() {
        let cfg = PlannerConfig::default();
        let b = GaussianBelief { mean: Vector4::new(1.5, 80.0, 0.0, 0.0), cov: Matrix4::zeros() };
        let d = choose_action(&cfg, &north(9.0), &PidState::default(), &b, &AirframeParams::default(), &NoiseConfig::default(), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(d.mode, PlannerMode::Exploit);
    }

    #[test]
    fn zero_strength_hypothesis_gains_nothing() {
        let cfg = PlannerConfig { sink_correction: None, ..Default::default() };
        let th = ThermalParams { w0: 0.0, r0: 50.0, center: Vec2::new(20.0, 0.0) };
        let s = exploit_scores(&cfg, &north(9.0), &PidState::default(), &AirframeParams::default(), &[th]);
        assert!(s.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tie_break_prefers_gentle_then_leftmost() {
        let cfg = PlannerConfig::default();
        assert_eq!(select(&cfg, &[1.0; 7], PlannerMode::Explore), 3);
        let cfg2 = PlannerConfig { bank_angles: [-30.0f64, 30.0].iter().map(|d| d.to_radians()).collect(), ..Default::default() };
        assert_eq!(select(&cfg2, &[2.0, 2.0], PlannerMode::Exploit), 0);
        assert_eq!(select(&cfg2, &[2.0, 3.0], PlannerMode::Exploit), 1);
        assert_eq!(select(&cfg2, &[2.0, 3.0], PlannerMode::Explore), 0);
    }

    #[test]
    fn hypotheses_are_shared_across_actions() {
        // Scoring consumes no randomness: the rng advances by the same amount
        // whether 7 or 2 actions are evaluated.
        let b = belief_with_trace(1000.0);
        let af = AirframeParams::default();
        let noise = NoiseConfig::default();
        let full = PlannerConfig::default();
        let few = PlannerConfig { bank_angles: alloc::vec![0.0, 0.5], ..Default::default() };
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        choose_action(&full, &north(9.0), &PidState::default(), &b, &af, &noise, &mut r1);
        choose_action(&few, &north(9.0), &PidState::default(), &b, &af, &noise, &mut r2);
        assert_eq!(r1.random::<u64>(), r2.random::<u64>());
    }

    #[test]
    fn config_validation() {
        let af = AirframeParams::default();
        assert!(PlannerConfig::default().validate(&af).is_ok());
        assert!(PlannerConfig { bank_angles: alloc::vec![], ..Default::default() }.validate(&af).is_err());
        assert!(PlannerConfig { bank_angles: alloc::vec![0.1, 0.2], ..Default::default() }.validate(&af).is_err());
        assert!(PlannerConfig { n_samples: 0, ..Default::default() }.validate(&af).is_err());
        assert!(PlannerConfig { exploit_extension: 0.5, ..Default::default() }.validate(&af).is_err());
        assert!(PlannerConfig { bank_angles: alloc::vec![-1.0, 0.0, 1.0], ..Default::default() }.validate(&af).is_err());
    }

    #[test]
    fn sink_grows_with_bank() {
        assert_eq!(sink(0.7, 0.0), 0.7);
        let s45 = sink(0.7, core::f64::consts::FRAC_PI_4);
        approx::assert_relative_eq!(s45, 0.7 * libm::pow(2.0, 0.75), epsilon = 1e-12);
    }
}
