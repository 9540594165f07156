//! Gaussian belief over the thermal state and its EKF updates.
//!
//! State ordering is `(w0, r0, cx, cy)` with the center relative to the aircraft.
//! Thermal parameters are static in the air-mass frame, so the transition is the
//! identity apart from shifting the relative center opposite to the aircraft's
//! displacement. The observation is the netto lift at the aircraft, i.e. the lift
//! model evaluated at the origin.

use nalgebra::{Matrix4, RowVector4, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_positive, Error, Result};
use crate::thermal::{jacobian_unchecked, lift_unchecked, ThermalParams};
use crate::Vec2;

/// Lower bound on the estimated radius, m.
pub const R0_FLOOR: f64 = 1.0;
/// Diagonal jitter added once when a covariance fails to factor.
pub const COV_JITTER: f64 = 1e-9;

const R0: usize = 1;
const CX: usize = 2;
const CY: usize = 3;

/// Process and observation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Diagonal process noise per second of elapsed time.
    pub q: Vector4<f64>,
    /// Variometer noise variance, (m/s)^2.
    pub r_obs: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { q: Vector4::new(0.0004, 0.0004, 0.25, 0.25), r_obs: 0.04 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig("process noise must be non-negative"));
        }
        ensure_positive("r_obs", self.r_obs)
    }
}

/// Per-component weights applied to the covariance diagonal before taking the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyWeights(pub Vector4<f64>);

impl Default for UncertaintyWeights {
    fn default() -> Self {
        Self(Vector4::repeat(1.0))
    }
}

/// Gaussian belief `N(mean, cov)` over `(w0, r0, cx, cy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl Default for GaussianBelief {
    /// Prior for a freshly detected thermal: moderate strength, typical radius,
    /// centered on the aircraft.
    fn default() -> Self {
        Self {
            mean: Vector4::new(1.5, 80.0, 0.0, 0.0),
            cov: Matrix4::from_diagonal(&Vector4::new(1.0, 400.0, 400.0, 400.0)),
        }
    }
}

impl GaussianBelief {
    /// Builds a belief, symmetrizing `cov` and checking it is positive definite.
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("belief mean must be finite"));
        }
        let mut b = Self { mean, cov };
        b.mean[R0] = b.mean[R0].max(R0_FLOOR);
        b.condition()?;
        Ok(b)
    }

    /// The mean interpreted as a thermal hypothesis (relative frame).
    pub fn thermal(&self) -> ThermalParams {
        ThermalParams::from_state(&self.mean)
    }

    /// Estimated thermal center relative to the aircraft.
    pub fn center(&self) -> Vec2 {
        Vec2::new(self.mean[CX], self.mean[CY])
    }

    /// Transition for an aircraft displacement in the air-mass frame: the relative
    /// center moves the opposite way, strength and radius are unchanged, and
    /// `q * elapsed` is added to the covariance.
    pub fn predict_shift(&self, displacement: Vec2, noise: &NoiseConfig, elapsed: f64) -> Self {
        let mut next = *self;
        next.mean[CX] -= displacement.x;
        next.mean[CY] -= displacement.y;
        for i in 0..4 {
            next.cov[(i, i)] += noise.q[i] * elapsed;
        }
        next
    }

    /// EKF correction with one netto lift reading taken at the aircraft.
    pub fn ekf_update(&self, observed_lift: f64, noise: &NoiseConfig) -> Result<Self> {
        if !observed_lift.is_finite() {
            return Err(Error::NonFiniteObservation(observed_lift));
        }
        let th = self.thermal();
        let h = jacobian_unchecked(&th).transpose();
        let predicted = lift_unchecked(&th, Vec2::zeros());
        let mut next = self.update_linearized(&h, predicted, observed_lift, noise.r_obs)?;
        next.mean[R0] = next.mean[R0].max(R0_FLOOR);
        Ok(next)
    }

    /// Kalman correction for a scalar observation with row Jacobian `h` and
    /// predicted value `predicted`. For a truly linear map this is the exact
    /// Kalman update.
    pub fn update_linearized(
        &self,
        h: &RowVector4<f64>,
        predicted: f64,
        observed: f64,
        r_obs: f64,
    ) -> Result<Self> {
        let sigma_ht = self.cov * h.transpose();
        let innovation_var = (h * sigma_ht)[0] + r_obs;
        if !(innovation_var > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let gain = sigma_ht / innovation_var;
        let mut next = Self {
            mean: self.mean + gain * (observed - predicted),
            cov: (Matrix4::identity() - gain * h) * self.cov,
        };
        next.condition()?;
        Ok(next)
    }

    /// Draws one thermal hypothesis from the belief.
    pub fn sample_thermal<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ThermalParams> {
        let l = cholesky_with_jitter(&self.cov)?;
        let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x = self.mean + l * z;
        x[R0] = x[R0].max(R0_FLOOR);
        Ok(ThermalParams::from_state(&x))
    }

    /// Weighted trace of the covariance.
    pub fn uncertainty(&self, weights: &UncertaintyWeights) -> f64 {
        self.cov.diagonal().dot(&weights.0)
    }

    /// Symmetrizes the covariance and verifies it still factors.
    fn condition(&mut self) -> Result<()> {
        self.cov = (self.cov + self.cov.transpose()) * 0.5;
        if self.cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        if self.cov.cholesky().is_none() {
            self.cov += Matrix4::identity() * COV_JITTER;
            if self.cov.cholesky().is_none() {
                return Err(Error::NotPositiveDefinite);
            }
        }
        Ok(())
    }
}

fn cholesky_with_jitter(cov: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    if let Some(c) = cov.cholesky() {
        return Ok(c.l());
    }
    (cov + Matrix4::identity() * COV_JITTER)
        .cholesky()
        .map(|c| c.l())
        .ok_or(Error::NotPositiveDefinite)
}
