//! Measurement map and the three control layers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::delay_line::DelayLine;
use crate::synthesis::GainSet;

/// Geometry and layer-1 coefficients of the vehicle.
///
/// `a1[k]` is `a_{1,k+1}` (k = 0..5) and `a2[k]` is `a_{2,k+1}` (k = 0..6);
/// they are supplied from the vehicle model rather than derived here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantConfig<T> {
    /// Wheel radius, m.
    pub r_w: T,
    /// Half distance between the wheel hubs, m.
    pub b_w: T,
    pub a1: [T; 5],
    pub a2: [T; 6],
}

impl<T: Scalar> PlantConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_w > T::zero() && self.b_w > T::zero()) {
            return Err(Error::DegenerateConfig(
                "r_w and b_w must be positive".into(),
            ));
        }
        if self.a1[4] == T::zero() {
            return Err(Error::DegenerateConfig("a_{1,5} must be non-zero".into()));
        }
        if self.a2[5] == T::zero() {
            return Err(Error::DegenerateConfig("a_{2,6} must be non-zero".into()));
        }
        Ok(())
    }
}

/// Linear-velocity and heading-rate signals reconstructed from the
/// measurements: `ỹ₁, ỹ₁⁽¹⁾, ỹ₂⁽¹⁾, ỹ₂⁽²⁾`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OutputEstimates<T> {
    pub y1: T,
    pub y1_dot: T,
    pub y2_dot: T,
    pub y2_ddot: T,
}

/// Undelayed reduced-model state needed to synthesise the wheel channels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState<T> {
    pub y1: T,
    pub y1_dot: T,
    pub y2_dot: T,
    pub y2_ddot: T,
}

/// Wheel angular velocities `(ω_l, ω_r)` of a vehicle moving at `v` with
/// heading rate `φ̇`.
pub fn wheel_speeds<T: Scalar>(r_w: T, b_w: T, v: T, phi_dot: T) -> (T, T) {
    ((v - b_w * phi_dot) / r_w, (v + b_w * phi_dot) / r_w)
}

/// `ψ = (ω_l, ω_r, ω̇_l, ω̇_r, φ(t−τ), φ̇(t−τ))` from the current reduced state
/// and already-delayed heading samples.
pub fn measurements<T: Scalar>(
    r_w: T,
    b_w: T,
    current: &ReducedState<T>,
    phi_delayed: T,
    phi_dot_delayed: T,
) -> [T; 6] {
    let (wl, wr) = wheel_speeds(r_w, b_w, current.y1, current.y2_dot);
    let (al, ar) = wheel_speeds(r_w, b_w, current.y1_dot, current.y2_ddot);
    [wl, wr, al, ar, phi_delayed, phi_dot_delayed]
}

/// Measurement map with the heading channels read from their histories.
pub fn measurement_map<T: Scalar>(
    r_w: T,
    b_w: T,
    current: &ReducedState<T>,
    phi: &DelayLine<T>,
    phi_dot: &DelayLine<T>,
    tau: T,
    t: T,
) -> Result<[T; 6]> {
    Ok(measurements(
        r_w,
        b_w,
        current,
        phi.sample(t, tau)?,
        phi_dot.sample(t, tau)?,
    ))
}

/// `ỹ` signals from the wheel-channel measurements.
pub fn output_estimates<T: Scalar>(r_w: T, b_w: T, psi: &[T; 6]) -> OutputEstimates<T> {
    let two = T::lit(2.0);
    OutputEstimates {
        y1: r_w * (psi[0] + psi[1]) / two,
        y1_dot: r_w * (psi[2] + psi[3]) / two,
        y2_dot: r_w * (psi[1] - psi[0]) / (two * b_w),
        y2_ddot: r_w * (psi[3] - psi[2]) / (two * b_w),
    }
}

/// Third layer: `w̃₂ = k₁ψ₅ + k₂ψ₆ + g`.
pub fn layer3_command<T: Scalar>(k1: T, k2: T, psi5: T, psi6: T, g_out: T) -> T {
    k1 * psi5 + k2 * psi6 + g_out
}

/// Second layer in deviation form (nominal measurement terms vanish):
/// `w₂ = −ρ₁·y₂⁽¹⁾(t−τ) − ρ₀·y₂(t−τ) + κ·w̃₂`.
pub fn layer2_command<T: Scalar>(
    g: &GainSet<T>,
    w_tilde2: T,
    y2_delayed: T,
    y2_dot_delayed: T,
) -> T {
    -g.rho1 * y2_dot_delayed - g.rho0 * y2_delayed + g.kappa * w_tilde2
}

/// First-layer motor voltages `(u₁, u₂)`.
pub fn layer1_voltages<T: Scalar>(
    cfg: &PlantConfig<T>,
    g: &GainSet<T>,
    w1: T,
    w2: T,
    y: &OutputEstimates<T>,
) -> Result<(T, T)> {
    cfg.validate()?;
    let two = T::lit(2.0);
    let [a11, a12, a13, a14, a15] = cfg.a1;
    let [a21, a22, a23, a24, a25, a26] = cfg.a2;
    let d1 = two * a15;
    let d2 = two * a26;
    let (l01, l11, l02, l12) = (g.lambda01, g.lambda11, g.lambda02, g.lambda12);
    let OutputEstimates {
        y1,
        y1_dot,
        y2_dot,
        y2_ddot,
    } = *y;

    let u1 = l01 / d1 * w1
        + l02 / d2 * w2
        + a25 / d2 * y1_dot * y2_dot
        + a23 / d2 * y1 * y2_ddot
        + a13 / d1 * y2_dot * y2_ddot
        + (a21 - l12) / d2 * y2_ddot
        + (a11 - l11) / d1 * y1_dot
        + a14 / d1 * y2_dot * y2_dot
        + a24 / d2 * y1 * y2_dot
        + (a22 - l02) / d2 * y2_dot
        + (a12 - l01) / d1 * y1;
    let u2 = l01 / d1 * w1 - l02 / d2 * w2 - a25 / d2 * y1_dot * y2_dot - a23 / d2 * y1 * y2_ddot
        + a13 / d1 * y2_dot * y2_ddot
        + (a11 - l11) / d1 * y1_dot
        + a14 / d1 * y2_dot * y2_dot
        - a24 / d2 * y1 * y2_dot
        + (l02 - a22) / d2 * y2_dot
        + (a12 - l01) / d1 * y1;
    Ok((u1, u2))
}
