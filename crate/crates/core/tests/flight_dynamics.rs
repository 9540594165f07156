mod oracles;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soar_core::dynamics::*;
use soar_core::environment::{env_step, Scenario, WorldState};
use soar_core::Vec2;

const BANKS_DEG: [f64; 7] = [0.0, 15.0, -15.0, 30.0, -30.0, 45.0, -45.0];

fn executed(airframe: &AirframeParams, s0: UavState, bank: f64, duration: f64) -> Vec<Vec2> {
    let sc = Scenario { turbulence_sigma: 0.0, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut w = WorldState::new(&sc, s0, &mut rng);
    let mut out = vec![w.uav.p];
    let n = (duration / CONTROL_DT).round() as usize;
    for k in 1..=n {
        w = env_step(&sc, airframe, &w, bank, CONTROL_DT, &mut rng);
        if k % 10 == 0 {
            out.push(w.uav.p);
        }
    }
    out
}

#[test]
fn prediction_matches_execution_over_twenty_seconds() {
    let airframe = AirframeParams::default();
    let s0 = UavState::level(Vec2::new(12.0, -40.0), 9.0, 0.7, 100.0);
    for deg in BANKS_DEG {
        let bank = deg.to_radians();
        let action = RollAction::new(bank, 20.0, airframe.max_bank).unwrap();
        let pred = predict_trajectory(&airframe, &s0, &PidState::default(), &action, RECORD_DT);
        let exec = executed(&airframe, s0, bank, 20.0);
        assert_eq!(pred.points.len(), exec.len());
        let worst = pred.points.iter().zip(&exec).map(|(a, b)| (a.p - b).norm()).fold(0.0, f64::max);
        assert!(worst < 0.1, "bank {deg}: {worst} m");
    }
}

#[test]
fn steady_turn_radius_follows_coordinated_turn_law() {
    let airframe = AirframeParams::default();
    let v = 9.0;
    for deg in [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, -15.0, -30.0, -45.0] {
        let phi: f64 = (deg as f64).to_radians();
        let expected = v * v / (STANDARD_GRAVITY * phi.tan().abs());
        // Settle for 20 s, then fit one full orbit.
        let period = 2.0 * std::f64::consts::PI * expected / v;
        let action = RollAction::new(phi, 20.0 + period, airframe.max_bank).unwrap();
        let traj = predict_trajectory(&airframe, &UavState::level(Vec2::zeros(), v, 0.0, 100.0), &PidState::default(), &action, CONTROL_DT);
        let orbit: Vec<Vec2> = traj.points.iter().filter(|p| p.t >= 20.0).map(|p| p.p).collect();
        let (_, r) = oracles::fit_circle(&orbit);
        assert!((r / expected - 1.0).abs() < 0.01, "bank {deg}: radius {r} vs {expected}");
        assert!((turn_radius(STANDARD_GRAVITY, phi, v) - expected).abs() < 1e-9 * expected);
    }
}

#[test]
fn roll_response_reaches_bank_without_large_overshoot() {
    let airframe = AirframeParams::default();
    let target = 45f64.to_radians();
    let action = RollAction::new(target, 5.0, airframe.max_bank).unwrap();
    let traj = predict_trajectory(&airframe, &UavState::level(Vec2::zeros(), 9.0, 0.0, 100.0), &PidState::default(), &action, CONTROL_DT);
    let t95 = traj.points.iter().find(|p| p.phi >= 0.95 * target).map(|p| p.t).unwrap();
    assert!((1.0..=2.0).contains(&t95), "t95 {t95}");
    let peak = traj.points.iter().map(|p| p.phi).fold(f64::MIN, f64::max);
    assert!(peak - target < 5f64.to_radians());
}

proptest! {
    #[test]
    fn mirrored_bank_mirrors_path(deg in 0.0..45.0f64, psi in -3.1..3.1f64, secs in 1.0..12.0f64) {
        let airframe = AirframeParams::default();
        let s0 = UavState::level(Vec2::zeros(), 9.0, psi, 100.0);
        let pid = PidState::default();
        let right = predict_trajectory(&airframe, &s0, &pid, &RollAction::new(deg.to_radians(), secs, airframe.max_bank).unwrap(), RECORD_DT);
        let left = predict_trajectory(&airframe, &s0, &pid, &RollAction::new(-deg.to_radians(), secs, airframe.max_bank).unwrap(), RECORD_DT);
        let h = Vec2::new(psi.sin(), psi.cos());
        for (a, b) in right.points.iter().zip(&left.points) {
            prop_assert!((a.phi + b.phi).abs() < 1e-9);
            // Along-track components agree, cross-track components are opposite.
            prop_assert!((a.p.dot(&h) - b.p.dot(&h)).abs() < 1e-6);
            let n = Vec2::new(h.y, -h.x);
            prop_assert!((a.p.dot(&n) + b.p.dot(&n)).abs() < 1e-6);
        }
    }

    #[test]
    fn speed_is_constant_along_any_arc(deg in -45.0..45.0f64, v in 6.0..15.0f64) {
        let airframe = AirframeParams::default();
        let traj = predict_trajectory(&airframe, &UavState::level(Vec2::zeros(), v, 0.0, 100.0), &PidState::default(), &RollAction::new(deg.to_radians(), 4.0, airframe.max_bank).unwrap(), CONTROL_DT);
        for pair in traj.points.windows(2) {
            prop_assert!(((pair[1].p - pair[0].p).norm() - v * CONTROL_DT).abs() < 1e-9);
        }
    }

    #[test]
    fn bank_never_exceeds_limit(deg in -90.0..90.0f64) {
        let airframe = AirframeParams::default();
        let mut s = UavState::level(Vec2::zeros(), 9.0, 0.0, 100.0);
        let mut pid = PidState::default();
        for _ in 0..500 {
            s = dynamics_step(&airframe, &s, &mut pid, deg.to_radians(), CONTROL_DT);
            prop_assert!(s.phi.abs() <= airframe.bank_limit() + 1e-12);
        }
    }
}
