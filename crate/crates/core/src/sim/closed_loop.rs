//! Networked closed loop of the heading and linear-velocity channels.
//!
//! The two preinstalled layers reduce the vehicle to the decoupled inner
//! loop `y₁'' + λ₁₁y₁' + λ₀₁y₁ = λ₀₁w₁` and
//! `y₂''' + λ₁₂y₂'' + λ₀₂y₂' = λ₀₂w₂`; the second-layer law for `w₂`, the
//! third-layer law for `w̃₂` and the precompensator realisation close the
//! heading loop through the transmission delay.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Scalar};
use crate::sim::dde::{DdeRk4, RetardedSystem};
use crate::sim::laws::{
    layer1_voltages, layer2_command, layer3_command, measurements, output_estimates, PlantConfig,
    ReducedState,
};
use crate::sim::realization::{realize_g, GRealization, PA_ORDER};
use crate::sim::reference::analytic_reference;
use crate::synthesis::{build_inner_tf, derive_gains, ChiParams, GainSet, ModelSpec};

/// States beyond this magnitude are treated as divergence.
pub const STATE_BOUND: f64 = 1e12;

/// `level + step·u_s(t)`: constant before `t = 0`, stepped from `t = 0` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCommand<T> {
    pub level: T,
    pub step: T,
}

impl<T: Scalar> StepCommand<T> {
    pub fn new(level: T, step: T) -> Self {
        Self { level, step }
    }

    pub fn zero() -> Self {
        Self {
            level: T::zero(),
            step: T::zero(),
        }
    }

    /// `base·(1 + fraction·u_s(t))`.
    pub fn relative(base: T, fraction: T) -> Self {
        Self {
            level: base,
            step: base * fraction,
        }
    }

    pub fn at(&self, t: T) -> T {
        if t >= T::zero() {
            self.level + self.step
        } else {
            self.level
        }
    }

    pub fn final_value(&self) -> T {
        self.level + self.step
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario<T> {
    pub chi: ChiParams<T>,
    /// 1/s²
    pub lambda01: T,
    /// 1/s
    pub lambda11: T,
    pub model: ModelSpec<T>,
    /// Constant equalised transmission delay, s.
    pub tau: T,
    /// Integration step, s.
    pub h: T,
    /// s
    pub horizon: T,
    /// Linear-velocity command (m/s); its level is the operating point ȳ₁.
    pub w1: StepCommand<T>,
    /// Heading command (rad); its level is the operating point ȳ₂.
    pub r: StepCommand<T>,
    /// Initial heading deviation from equilibrium (rad), also applied to the
    /// pre-history.
    pub y2_offset: T,
    pub plant: Option<PlantConfig<T>>,
    /// Keep every n-th integration step in the trajectory.
    pub record_every: usize,
}

impl<T: Scalar + Coefficient> SimScenario<T> {
    /// Third-order model with time constants 0.04/0.05/0.06 s, `k₂ = 0.1`,
    /// 10% / 20% steps about the operating point (0.5 m/s, 0.5 rad),
    /// `h = 1e-4` s over 1.5 s.
    pub fn reference_case(tau: T) -> Self {
        let l = T::lit;
        Self {
            chi: ChiParams::new(l(1.42662), l(217.2061), l(676.2171), l(0.1)),
            lambda01: l(crate::synthesis::DEFAULT_LAMBDA01),
            lambda11: l(crate::synthesis::DEFAULT_LAMBDA11),
            model: ModelSpec::TimeConstants(vec![l(0.04), l(0.05), l(0.06)]),
            tau,
            h: l(1e-4),
            horizon: l(1.5),
            w1: StepCommand::relative(l(0.5), l(0.1)),
            r: StepCommand::relative(l(0.5), l(0.2)),
            y2_offset: T::zero(),
            plant: None,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_inner(true)
    }

    fn validate_inner(&self, check_model_timescale: bool) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.h > T::zero()) {
            return bad(format!("step h = {} must be positive", self.h));
        }
        if !(self.tau >= T::zero()) {
            return bad(format!("delay tau = {} must be non-negative", self.tau));
        }
        if !(self.horizon > T::zero()) {
            return bad(format!("horizon = {} must be positive", self.horizon));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        let slack = T::one() + T::lit(1e-9);
        if self.tau > T::zero() && self.h > self.tau / T::lit(10.0) * slack {
            return bad(format!(
                "step h = {} exceeds tau/10 = {}",
                self.h,
                self.tau / T::lit(10.0)
            ));
        }
        if check_model_timescale {
            let fastest = self.model.fastest_time_constant()?;
            if self.h > fastest / T::lit(20.0) * slack {
                return bad(format!(
                    "step h = {} exceeds T_min/20 = {}",
                    self.h,
                    fastest / T::lit(20.0)
                ));
            }
            let slowest = self.model.slowest_time_constant()?;
            if self.horizon < T::lit(10.0) * slowest / slack {
                return bad(format!(
                    "horizon = {} shorter than 10 x slowest time constant {}",
                    self.horizon, slowest
                ));
            }
        }
        if let Some(p) = &self.plant {
            p.validate()?;
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.h).round().to_usize().unwrap_or(0)
    }
}

/// One recorded instant of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample<T> {
    pub t: T,
    pub r: T,
    pub w1: T,
    pub w_tilde2: T,
    pub w2: T,
    pub y1: T,
    pub y2: T,
    pub y2dot: T,
    pub psi5: T,
    pub psi6: T,
    pub g_out: T,
    pub y2_ref: T,
    pub err: T,
    /// Motor voltages `(u₁, u₂)` when a plant configuration is present.
    pub u: Option<(T, T)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Outcome {
    Completed,
    /// Integration stopped at `t` because the state diverged.
    NonFinite {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub outcome: Outcome,
    pub gains: GainSet<T>,
    pub tau: T,
    pub h: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn ensure_finite(&self) -> Result<()> {
        match self.outcome {
            Outcome::Completed => Ok(()),
            Outcome::NonFinite { t } => Err(Error::NonFiniteState { t }),
        }
    }

    pub fn last(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }

    /// Largest `|y₂ − y₂,ref|` over the record.
    pub fn max_matching_error(&self) -> T {
        self.samples
            .iter()
            .map(|s| s.err.abs())
            .fold(T::zero(), T::max)
    }

    /// Time after which `y₂` stays within `band·|step|` of its final
    /// reference value.
    pub fn settling_time(&self, final_value: T, step: T, band: T) -> Option<T> {
        let tol = band * step.abs();
        let mut settle = None;
        for s in self.samples.iter().rev() {
            if (s.y2 - final_value).abs() > tol {
                return settle;
            }
            settle = Some(s.t);
        }
        settle
    }
}

/// State layout: `[y₁, y₁', y₂, y₂', y₂'', v₀ … vₙ₋₁]`.
/// Lagged layout: `[y₂, y₂', q⁽ᵒ⁾ for each delayed order o]`.
struct ClosedLoop<'a, T> {
    gains: GainSet<T>,
    real: GRealization<T>,
    w1: StepCommand<T>,
    r: StepCommand<T>,
    plant: Option<&'a PlantConfig<T>>,
    reference: Reference<'a, T>,
}

enum Reference<'a, T> {
    Analytic {
        model: &'a ModelSpec<T>,
        base: T,
    },
    /// The integrated model output `q` itself.
    ModelState,
}

const Y_STATES: usize = 5;

impl<T: Scalar> ClosedLoop<'_, T> {
    fn delayed_array(&self, lagged: &[T]) -> [T; PA_ORDER + 1] {
        let mut out = [T::zero(); PA_ORDER + 1];
        for (k, &o) in self.real.delayed_orders().iter().enumerate() {
            out[o] = lagged[2 + k];
        }
        out
    }

    /// `(q-derivatives, g, w̃₂, w₂)` at one instant.
    fn heading_signals(&self, t: T, x: &[T], lagged: &[T]) -> ([T; PA_ORDER + 1], T, T, T) {
        let r = self.r.at(t);
        let q = self.real.derivatives(&x[Y_STATES..], r);
        let g = self.real.output(&q, &self.delayed_array(lagged));
        let (psi5, psi6) = (lagged[0], lagged[1]);
        let wt2 = layer3_command(self.gains.k1, self.gains.k2, psi5, psi6, g);
        let w2 = layer2_command(&self.gains, wt2, psi5, psi6);
        (q, g, wt2, w2)
    }
}

impl<T: Scalar> RetardedSystem<T> for ClosedLoop<'_, T> {
    fn dim(&self) -> usize {
        Y_STATES + self.real.order()
    }

    fn lag_dim(&self) -> usize {
        2 + self.real.delayed_orders().len()
    }

    fn lagged_signals(&self, t: T, x: &[T], out: &mut [T]) {
        out[0] = x[2];
        out[1] = x[3];
        let q = self.real.derivatives(&x[Y_STATES..], self.r.at(t));
        for (k, &o) in self.real.delayed_orders().iter().enumerate() {
            out[2 + k] = q[o];
        }
    }

    fn rhs(&self, t: T, x: &[T], lagged: &[T], dx: &mut [T]) {
        let g = &self.gains;
        // linear-velocity channel
        dx[0] = x[1];
        dx[1] = g.lambda01 * (self.w1.at(t) - x[0]) - g.lambda11 * x[1];
        // heading channel
        let (_, _, _, w2) = self.heading_signals(t, x, lagged);
        dx[2] = x[3];
        dx[3] = x[4];
        dx[4] = -g.lambda12 * x[4] - g.lambda02 * x[3] + g.lambda02 * w2;
        self.real
            .state_derivative(&x[Y_STATES..], self.r.at(t), &mut dx[Y_STATES..]);
    }
}

impl<T: Scalar + Coefficient> ClosedLoop<'_, T> {
    fn sample(&self, t: T, x: &[T], lagged: &[T]) -> Result<Sample<T>> {
        let (q, g_out, wt2, w2) = self.heading_signals(t, x, lagged);
        let y2_ref = match &self.reference {
            Reference::Analytic { model, base } => {
                *base + analytic_reference(model, self.r.step, t)?
            }
            Reference::ModelState => q[0],
        };
        let w1 = self.w1.at(t);
        let u = match self.plant {
            Some(p) => {
                let current = ReducedState {
                    y1: x[0],
                    y1_dot: x[1],
                    y2_dot: x[3],
                    y2_ddot: x[4],
                };
                let psi = measurements(p.r_w, p.b_w, &current, lagged[0], lagged[1]);
                let est = output_estimates(p.r_w, p.b_w, &psi);
                Some(layer1_voltages(p, &self.gains, w1, w2, &est)?)
            }
            None => None,
        };
        Ok(Sample {
            t,
            r: self.r.at(t),
            w1,
            w_tilde2: wt2,
            w2,
            y1: x[0],
            y2: x[2],
            y2dot: x[3],
            psi5: lagged[0],
            psi6: lagged[1],
            g_out,
            y2_ref,
            err: x[2] - y2_ref,
            u,
        })
    }
}

/// Fixed-step RK4 simulation of the delayed closed loop.
///
/// Divergence is not an error here: the trajectory is truncated and
/// [`Trajectory::outcome`] records the instant.
pub fn integrate_closed_loop<T: Scalar + Coefficient>(
    sc: &SimScenario<T>,
) -> Result<Trajectory<T>> {
    run(sc, true)
}

fn run<T: Scalar + Coefficient>(
    sc: &SimScenario<T>,
    check_timescale: bool,
) -> Result<Trajectory<T>> {
    sc.validate_inner(check_timescale)?;
    let gains = derive_gains(&sc.chi, sc.lambda01, sc.lambda11)?;
    build_inner_tf(&gains)?;
    let real = realize_g(&sc.chi, &sc.model)?;
    let dc = sc.model.dc_gain()?;

    let reference = match analytic_reference(&sc.model, T::one(), sc.h) {
        Ok(_) => Reference::Analytic {
            model: &sc.model,
            base: dc * sc.r.level,
        },
        Err(Error::DegenerateTimeConstants) => Reference::ModelState,
        Err(e) => return Err(e),
    };
    let sys = ClosedLoop {
        gains,
        real,
        w1: sc.w1,
        r: sc.r,
        plant: sc.plant.as_ref(),
        reference,
    };

    let mut x0 = vec![
        sc.w1.level,
        T::zero(),
        dc * sc.r.level + sc.y2_offset,
        T::zero(),
        T::zero(),
    ];
    x0.extend(sys.real.steady_state(sc.r.level));
    let mut solver = DdeRk4::with_constant_history(&sys, T::zero(), x0, sc.h, sc.tau)?;

    let n = sc.steps();
    let bound = T::lit(STATE_BOUND);
    let mut samples = Vec::with_capacity(n / sc.record_every + 1);
    let mut outcome = Outcome::Completed;
    loop {
        if solver.steps() % sc.record_every == 0 {
            let lag = solver.lagged_now(&sys)?;
            samples.push(sys.sample(solver.t(), solver.state(), &lag)?);
        }
        if solver.steps() >= n {
            break;
        }
        solver.step(&sys)?;
        if solver.state().iter().any(|v| !(v.abs() <= bound)) {
            outcome = Outcome::NonFinite {
                t: solver.t().as_f64(),
            };
            break;
        }
    }
    Ok(Trajectory {
        samples,
        outcome,
        gains,
        tau: sc.tau,
        h: sc.h,
    })
}

/// Decay or growth of the unforced heading channel after an initial
/// perturbation, judged from `max |y₂|` over the last two fifths of the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeReport<T> {
    pub horizon: T,
    pub h: T,
    /// `max |y₂|` over `[0.6, 0.8)·horizon`.
    pub early: T,
    /// `max |y₂|` over `[0.8, 1]·horizon`.
    pub late: T,
    /// `ln(late/early) / (0.2·horizon)`, 1/s.
    pub rate: T,
    pub decays: bool,
    pub outcome: Outcome,
}

/// Horizon of the envelope test, `30/χ₁` seconds.
pub fn envelope_horizon<T: Scalar>(chi: &ChiParams<T>) -> T {
    T::lit(30.0) / chi.chi1
}

/// Step size used by the envelope test.
pub fn envelope_step<T: Scalar>(chi: &ChiParams<T>, tau: T) -> T {
    let fast = T::lit(0.5) / (chi.chi1 + chi.chi2 + chi.chi3.sqrt());
    let mut h = fast.min(envelope_horizon(chi) / T::lit(2000.0));
    if tau > T::zero() {
        h = h.min(tau / T::lit(10.0));
    }
    h
}

/// Simulates the unforced heading channel from `y₂(0) = perturbation` (held
/// constant over the pre-history) with zero commands.
pub fn unforced_envelope<T: Scalar + Coefficient>(
    chi: &ChiParams<T>,
    tau: T,
    perturbation: T,
) -> Result<EnvelopeReport<T>> {
    let horizon = envelope_horizon(chi);
    let h = envelope_step(chi, tau);
    let sc = SimScenario {
        chi: *chi,
        lambda01: T::lit(crate::synthesis::DEFAULT_LAMBDA01),
        lambda11: T::lit(crate::synthesis::DEFAULT_LAMBDA11),
        // never excited: r ≡ 0 keeps the model state at rest
        model: ModelSpec::TimeConstants(vec![T::one(), T::lit(1.5), T::lit(2.0)]),
        tau,
        h,
        horizon,
        w1: StepCommand::zero(),
        r: StepCommand::zero(),
        y2_offset: perturbation,
        plant: None,
        record_every: 1,
    };
    let traj = run(&sc, false)?;
    let window = |lo: T, hi: T| {
        traj.samples
            .iter()
            .filter(|s| s.t >= lo * horizon && s.t <= hi * horizon)
            .map(|s| s.y2.abs())
            .fold(T::zero(), T::max)
    };
    let early = window(T::lit(0.6), T::lit(0.8));
    let late = window(T::lit(0.8), T::one());
    let (rate, decays) = match traj.outcome {
        Outcome::Completed => {
            let rate = (late / early).ln() / (T::lit(0.2) * horizon);
            (rate, late < early || late == T::zero())
        }
        Outcome::NonFinite { .. } => (T::infinity(), false),
    };
    Ok(EnvelopeReport {
        horizon,
        h,
        early,
        late,
        rate,
        decays,
        outcome: traj.outcome,
    })
}
