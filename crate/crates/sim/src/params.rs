//! `KEY=VALUE` parameter files.

use std::collections::BTreeMap;
use std::path::Path;

use soar_core::mission::ThermalController;

use crate::config::SimConfig;
use crate::error::{Result, SimError};

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("SOAR_ENABLE", "1 enables thermal detection and thermalling"),
    ("SOAR_POMDP_ON", "1 selects POMDSoar, 0 the baseline circler (for `run`)"),
    ("SOAR_POMDP_HORI", "explore horizon, s"),
    ("SOAR_POMDP_EXT", "exploit horizon multiplier"),
    ("SOAR_POMDP_N", "thermal hypotheses per planning cycle"),
    ("SOAR_POMDP_BANKS", "comma-separated candidate bank angles, deg"),
    ("SOAR_POMDP_DT", "trajectory sampling interval, s"),
    ("SOAR_POMDP_PERIOD", "planner invocation period, s"),
    ("SOAR_POMDP_SINK", "1 charges bank-dependent sink to exploit arcs"),
    ("SOAR_CONF_THRES", "covariance-trace threshold for exploiting"),
    ("SOAR_ALT_MIN", "motor-on altitude, m"),
    ("SOAR_ALT_CUTOFF", "motor-off altitude, m"),
    ("SOAR_ALT_MAX", "thermalling ceiling, m"),
    ("SOAR_VSPEED", "filtered lift that triggers thermalling, m/s"),
    ("SOAR_EXIT_HOLD", "seconds of lost lift before leaving a thermal"),
    ("SOAR_I_MOMENT", "roll moment of inertia"),
    ("SOAR_ROLL_CLP", "roll damping derivative"),
    ("SOAR_K_ROLLDAMP", "roll damping scale"),
    ("SOAR_K_AILERON", "aileron effectiveness"),
    ("SOAR_NO_STALLPRV", "1 disables the stall-prevention bank limit"),
    ("SOAR_MAX_BANK", "maximum bank, deg"),
    ("RLL2SRV_P", "roll PID proportional gain"),
    ("RLL2SRV_I", "roll PID integral gain"),
    ("RLL2SRV_D", "roll PID derivative gain"),
    ("RLL2SRV_IMAX", "roll PID integrator limit"),
    ("SOAR_THML_RADIUS", "baseline circling radius, m"),
    ("SOAR_THML_KP", "baseline radial-error gain, deg/m"),
    ("SOAR_THML_KD", "baseline radial-rate gain, deg/(m/s)"),
    ("SOAR_THML_W0", "prior thermal strength, m/s"),
    ("SOAR_THML_R0", "prior thermal radius, m"),
    ("SOAR_THML_P_W0", "prior strength variance"),
    ("SOAR_THML_P_R0", "prior radius variance"),
    ("SOAR_THML_P_XY", "prior center variance per axis"),
    ("SOAR_THML_Q_W0", "strength process noise per second"),
    ("SOAR_THML_Q_R0", "radius process noise per second"),
    ("SOAR_THML_Q_XY", "center process noise per second"),
    ("SOAR_THML_R", "variometer noise variance"),
];

/// Parsed parameter file, in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamFile {
    pub values: BTreeMap<String, String>,
}

impl ParamFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Input { path: path.into(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let err = |msg: String| SimError::Param { path: origin.into(), line: i + 1, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected KEY=VALUE, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.iter().any(|(name, _)| *name == k) {
                return Err(err(format!("unknown key `{k}`")));
            }
            if k == "SOAR_POMDP_BANKS" {
                parse_banks(v).map_err(err)?;
            } else {
                v.parse::<f64>().map_err(|_| err(format!("`{k}` expects a number, got `{v}`")))?;
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(err(format!("duplicate key `{k}`")));
            }
        }
        Ok(Self { values })
    }

    fn num(&self, key: &str) -> Option<f64> {
        self.values.get(key).map(|v| v.parse().expect("validated at parse time"))
    }

    /// Overrides the matching fields of `cfg`.
    pub fn apply(&self, cfg: &mut SimConfig) -> Result<()> {
        let flag = |v: f64| v != 0.0;
        let m = &mut cfg.mission;
        let s = &mut cfg.soaring;
        let a = &mut cfg.airframe;
        for (key, value) in &self.values {
            if key == "SOAR_POMDP_BANKS" {
                s.planner.bank_angles = parse_banks(value).expect("validated at parse time");
                continue;
            }
            let v = self.num(key).expect("numeric key");
            match key.as_str() {
                "SOAR_ENABLE" => m.soaring_enabled = flag(v),
                "SOAR_POMDP_ON" => {
                    cfg.controller = if flag(v) { ThermalController::Pomdsoar } else { ThermalController::Baseline }
                }
                "SOAR_POMDP_HORI" => s.planner.t_explore = v,
                "SOAR_POMDP_EXT" => s.planner.exploit_extension = v,
                "SOAR_POMDP_N" => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(SimError::Scenario(format!("SOAR_POMDP_N must be a positive integer, got {v}")));
                    }
                    s.planner.n_samples = v as usize
                }
                "SOAR_POMDP_DT" => s.planner.dt_record = v,
                "SOAR_POMDP_PERIOD" => s.replan_period = v,
                "SOAR_POMDP_SINK" => cfg.sink_correction = flag(v),
                "SOAR_CONF_THRES" => s.planner.confidence_thres = v,
                "SOAR_ALT_MIN" => m.alt_min = v,
                "SOAR_ALT_CUTOFF" => m.alt_cutoff = v,
                "SOAR_ALT_MAX" => m.alt_max = v,
                "SOAR_VSPEED" => m.detect_threshold = v,
                "SOAR_EXIT_HOLD" => m.exit_hold = v,
                "SOAR_I_MOMENT" => a.i_x = v,
                "SOAR_ROLL_CLP" => a.c_lp = v,
                "SOAR_K_ROLLDAMP" => a.k_d = v,
                "SOAR_K_AILERON" => a.k_a = v,
                "SOAR_NO_STALLPRV" => a.stall_prevention = !flag(v),
                "SOAR_MAX_BANK" => a.max_bank = v.to_radians(),
                "RLL2SRV_P" => a.pid.kp = v,
                "RLL2SRV_I" => a.pid.ki = v,
                "RLL2SRV_D" => a.pid.kd = v,
                "RLL2SRV_IMAX" => a.pid.integrator_limit = v,
                "SOAR_THML_RADIUS" => s.baseline.circle_radius = v,
                "SOAR_THML_KP" => s.baseline.kp = v.to_radians(),
                "SOAR_THML_KD" => s.baseline.kd = v.to_radians(),
                "SOAR_THML_W0" => s.prior.mean[0] = v,
                "SOAR_THML_R0" => s.prior.mean[1] = v,
                "SOAR_THML_P_W0" => s.prior.cov[(0, 0)] = v,
                "SOAR_THML_P_R0" => s.prior.cov[(1, 1)] = v,
                "SOAR_THML_P_XY" => {
                    s.prior.cov[(2, 2)] = v;
                    s.prior.cov[(3, 3)] = v;
                }
                "SOAR_THML_Q_W0" => s.noise.q[0] = v,
                "SOAR_THML_Q_R0" => s.noise.q[1] = v,
                "SOAR_THML_Q_XY" => {
                    s.noise.q[2] = v;
                    s.noise.q[3] = v;
                }
                "SOAR_THML_R" => s.noise.r_obs = v,
                other => unreachable!("key {other} listed but not applied"),
            }
        }
        // The baseline shares the airframe's bank limit.
        s.baseline.max_bank = s.baseline.max_bank.min(a.max_bank);
        Ok(())
    }
}

fn parse_banks(v: &str) -> std::result::Result<Vec<f64>, String> {
    let banks: std::result::Result<Vec<f64>, _> = v.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match banks {
        Ok(b) if !b.is_empty() => Ok(b.into_iter().map(f64::to_radians).collect()),
        _ => Err(format!("SOAR_POMDP_BANKS expects comma-separated degrees, got `{v}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let p = ParamFile::parse("# header\n\nSOAR_POMDP_HORI = 5 # horizon\nSOAR_POMDP_BANKS=-30, 0, 30\n", "t").unwrap();
        assert_eq!(p.values.len(), 2);
        let mut cfg = SimConfig::default();
        p.apply(&mut cfg).unwrap();
        assert_eq!(cfg.soaring.planner.t_explore, 5.0);
        assert_eq!(cfg.soaring.planner.bank_angles.len(), 3);
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = ParamFile::parse("SOAR_ENABLE=1\nSOAR_BOGUS=2\n", "p.param").unwrap_err();
        assert_eq!(e.to_string(), "p.param:2: unknown key `SOAR_BOGUS`");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn rejects_malformed_values() {
        assert!(ParamFile::parse("SOAR_ALT_MIN=low\n", "p").is_err());
        assert!(ParamFile::parse("SOAR_ALT_MIN\n", "p").is_err());
        assert!(ParamFile::parse("SOAR_ALT_MIN=1\nSOAR_ALT_MIN=2\n", "p").is_err());
        assert!(ParamFile::parse("SOAR_POMDP_BANKS=a,b\n", "p").is_err());
    }

    #[test]
    fn every_key_applies() {
        let text: String = KEYS
            .iter()
            .map(|(k, _)| if *k == "SOAR_POMDP_BANKS" { format!("{k}=-30,0,30\n") } else { format!("{k}=1\n") })
            .collect();
        let mut cfg = SimConfig::default();
        ParamFile::parse(&text, "all").unwrap().apply(&mut cfg).unwrap();
        assert!(!cfg.airframe.stall_prevention);
        assert_eq!(cfg.controller, ThermalController::Pomdsoar);
    }

    #[test]
    fn stall_prevention_flag_is_inverted() {
        let mut cfg = SimConfig::default();
        ParamFile::parse("SOAR_NO_STALLPRV=0", "p").unwrap().apply(&mut cfg).unwrap();
        assert!(cfg.airframe.stall_prevention);
    }
}
