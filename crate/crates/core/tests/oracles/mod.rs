//! Reference computations that avoid the library's own code paths.
#![allow(dead_code)]

use nalgebra::{Matrix4, RowVector4, Vector4};
use soar_core::Vec2;

/// Bell-shaped lift written out directly.
pub fn lift(w0: f64, r0: f64, cx: f64, cy: f64, px: f64, py: f64) -> f64 {
    let dx = px - cx;
    let dy = py - cy;
    w0 * (-(dx * dx + dy * dy) / (r0 * r0)).exp()
}

/// Central finite differences of the lift at the origin with respect to
/// `(w0, r0, cx, cy)`, where `(cx, cy)` is the thermal relative to the aircraft.
pub fn jacobian_fd(state: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let h = 1e-5 * state[i].abs().max(1.0);
        let mut up = state;
        let mut dn = state;
        up[i] += h;
        dn[i] -= h;
        let f = |s: [f64; 4]| lift(s[0], s[1], s[2], s[3], 0.0, 0.0);
        out[i] = (f(up) - f(dn)) / (2.0 * h);
    }
    out
}

/// Kalman update in information form: `P' = (P^-1 + h^T h / r)^-1`,
/// `m' = P' (P^-1 m + h^T y / r)`, with `y` the observation of the linear map `h`.
pub fn kalman_information(
    mean: &Vector4<f64>,
    cov: &Matrix4<f64>,
    h: &RowVector4<f64>,
    y: f64,
    r: f64,
) -> (Vector4<f64>, Matrix4<f64>) {
    let info = gauss_jordan_inverse(cov);
    let post_info = info + h.transpose() * h / r;
    let post_cov = gauss_jordan_inverse(&post_info);
    let post_mean = post_cov * (info * mean + h.transpose() * (y / r));
    (post_mean, post_cov)
}

/// Plain Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &Matrix4<f64>) -> Matrix4<f64> {
    let mut a = [[0.0; 8]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = m[(i, j)];
        }
        a[i][4 + i] = 1.0;
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for row in 0..4 {
            if row != col {
                let f = a[row][col];
                let src = a[col];
                for (v, s) in a[row].iter_mut().zip(src) {
                    *v -= f * s;
                }
            }
        }
    }
    Matrix4::from_fn(|i, j| a[i][4 + j])
}

/// Posterior moments of a static thermal `(w0, r0, cx, cy)` (absolute center)
/// from noisy-lift observations, computed by iteratively zoomed dense grids.
pub struct GridPosterior {
    pub mean: [f64; 4],
    pub std: [f64; 4],
}

pub fn grid_posterior(
    prior_mean: [f64; 4],
    prior_std: [f64; 4],
    observations: &[(Vec2, f64)],
    r_obs: f64,
) -> GridPosterior {
    const N: usize = 17;
    let log_post = |x: [f64; 4]| {
        if x[1] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut l = 0.0;
        for i in 0..4 {
            let z = (x[i] - prior_mean[i]) / prior_std[i];
            l -= 0.5 * z * z;
        }
        for (p, y) in observations {
            let e = y - lift(x[0], x[1], x[2], x[3], p.x, p.y);
            l -= 0.5 * e * e / r_obs;
        }
        l
    };
    let mut center = prior_mean;
    let mut half: [f64; 4] = core::array::from_fn(|i| 4.0 * prior_std[i]);
    let mut result = GridPosterior { mean: center, std: prior_std };
    for _ in 0..12 {
        let axis = |i: usize, k: usize| center[i] - half[i] + 2.0 * half[i] * k as f64 / (N - 1) as f64;
        let mut pts = Vec::with_capacity(N.pow(4));
        let mut best = f64::NEG_INFINITY;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let x = [axis(0, a), axis(1, b), axis(2, c), axis(3, d)];
                        let l = log_post(x);
                        best = best.max(l);
                        pts.push((x, l));
                    }
                }
            }
        }
        let mut wsum = 0.0;
        let mut m1 = [0.0; 4];
        let mut m2 = [0.0; 4];
        for (x, l) in &pts {
            let w = (l - best).exp();
            wsum += w;
            for i in 0..4 {
                m1[i] += w * x[i];
                m2[i] += w * x[i] * x[i];
            }
        }
        let mean: [f64; 4] = core::array::from_fn(|i| m1[i] / wsum);
        let std: [f64; 4] = core::array::from_fn(|i| (m2[i] / wsum - mean[i] * mean[i]).max(0.0).sqrt());
        result = GridPosterior { mean, std };
        let cell: [f64; 4] = core::array::from_fn(|i| 2.0 * half[i] / (N - 1) as f64);
        // Resolved once every axis spans about +-5 sigma with at least 3 cells per sigma.
        let resolved = (0..4).all(|i| std[i] >= 1.5 * cell[i] && 6.0 * std[i] >= half[i]);
        if resolved {
            break;
        }
        center = mean;
        half = core::array::from_fn(|i| (6.0 * std[i]).max(half[i] / 4.0));
    }
    result
}

/// Sampled positions of a level circle flown clockwise at constant speed.
pub fn circle_positions(center: Vec2, radius: f64, speed: f64, dt: f64, n: usize) -> Vec<Vec2> {
    let omega = speed / radius;
    (0..n)
        .map(|k| {
            let a = omega * dt * k as f64;
            center + Vec2::new(radius * a.cos(), -radius * a.sin())
        })
        .collect()
}

/// Algebraic (Kasa) least-squares circle fit; returns (center, radius).
pub fn fit_circle(points: &[Vec2]) -> (Vec2, f64) {
    // Solve x^2 + y^2 + D x + E y + F = 0 in the least-squares sense.
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for p in points {
        let row = nalgebra::Vector3::new(p.x, p.y, 1.0);
        ata += row * row.transpose();
        atb += row * -(p.x * p.x + p.y * p.y);
    }
    let s = ata.lu().solve(&atb).expect("circle fit is singular");
    let c = Vec2::new(-s[0] / 2.0, -s[1] / 2.0);
    let r = (c.x * c.x + c.y * c.y - s[2]).sqrt();
    (c, r)
}

/// Distance from `p` to the segment `a`-`b`.
pub fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// Altitude change from flying a constant bank command for `duration` through
/// the simulated world containing only `thermal` (absolute air-mass frame),
/// with no turbulence and motor off.
pub fn flown_altitude_gain(
    airframe: &soaring::AirframeParams,
    uav: soaring::UavState,
    pid: soaring::PidState,
    thermal: soar_core::thermal::ThermalParams,
    bank: f64,
    duration: f64,
    sink_s0: f64,
) -> f64 {
    use soar_core::environment::{env_step, Scenario, ThermalSpec, WorldState};
    let sc = Scenario {
        thermals: vec![ThermalSpec { params: thermal, birth: 0.0, lifetime: 1e9, drift: Vec2::zeros() }],
        turbulence_sigma: 0.0,
        sink_s0,
        ..Default::default()
    };
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let mut w = WorldState::new(&sc, uav, &mut rng);
    w.pid = pid;
    let h0 = w.uav.h;
    let n = (duration / soaring::CONTROL_DT).round() as usize;
    for _ in 0..n {
        w = env_step(&sc, airframe, &w, bank, soaring::CONTROL_DT, &mut rng);
    }
    w.uav.h - h0
}

mod soaring {
    pub use soar_core::dynamics::{AirframeParams, PidState, UavState, CONTROL_DT};
}

/// EKF chain over noiseless readings of `truth` taken at `positions` (aircraft
/// path, any frame), using finite-difference Jacobians and the Joseph-form
/// covariance update. `mean` holds the center relative to `positions[0]`.
pub fn explore_chain(
    mean: Vector4<f64>,
    cov: Matrix4<f64>,
    q: Vector4<f64>,
    r: f64,
    dt: f64,
    positions: &[Vec2],
    truth_rel: [f64; 4],
) -> (Vector4<f64>, Matrix4<f64>) {
    let (mut m, mut p) = (mean, cov);
    for k in 1..positions.len() {
        let d = positions[k] - positions[k - 1];
        m[2] -= d.x;
        m[3] -= d.y;
        p += Matrix4::from_diagonal(&(q * dt));
        let off = positions[k] - positions[0];
        let y = lift(truth_rel[0], truth_rel[1], truth_rel[2], truth_rel[3], off.x, off.y);
        let j = jacobian_fd([m[0], m[1], m[2], m[3]]);
        let h = RowVector4::new(j[0], j[1], j[2], j[3]);
        let s = (h * p * h.transpose())[0] + r;
        let k_gain = p * h.transpose() / s;
        m += k_gain * (y - lift(m[0], m[1], m[2], m[3], 0.0, 0.0));
        let a = Matrix4::identity() - k_gain * h;
        p = a * p * a.transpose() + k_gain * k_gain.transpose() * r;
    }
    (m, p)
}

/// Closed-form mission length with no lift: glide from `h0` to `alt_min`, then
/// alternate motor climbs to `alt_cutoff` and glides back down until a climb
/// drains the battery.
pub fn energy_cycle_time(
    battery_j: f64,
    motor_w: f64,
    avionics_w: f64,
    climb_rate: f64,
    sink: f64,
    alt_min: f64,
    alt_cutoff: f64,
    h0: f64,
) -> f64 {
    let glide = |dh: f64| dh / sink;
    let mut t = glide(h0 - alt_min);
    let mut e = battery_j - avionics_w * t;
    if e <= 0.0 {
        return t + e / avionics_w;
    }
    let band = alt_cutoff - alt_min;
    let climb = band / climb_rate;
    let climb_j = (motor_w + avionics_w) * climb;
    loop {
        if e <= climb_j {
            return t + e / (motor_w + avionics_w);
        }
        e -= climb_j;
        t += climb;
        let g = glide(band);
        e -= avionics_w * g;
        t += g;
    }
}
