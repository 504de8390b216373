//! Fixed-step classical RK4 for retarded systems with one constant delay.
//!
//! Delayed quantities are read from [`DelayLine`]s holding the grid history,
//! so every stage of a step only looks at times at least `τ − h` in the
//! past. With `h ≤ τ` that is always stored history, which makes the scheme
//! a method of steps with interpolated history.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::delay_line::{DelayLine, Prehistory};

/// `ẋ(t) = f(t, x(t), ℓ(t − τ))`, where `ℓ(t) = g(t, x(t))` are the signals
/// whose delayed copies enter the right-hand side.
pub trait RetardedSystem<T> {
    fn dim(&self) -> usize;
    fn lag_dim(&self) -> usize;
    fn lagged_signals(&self, t: T, x: &[T], out: &mut [T]);
    fn rhs(&self, t: T, x: &[T], lagged: &[T], dx: &mut [T]);
}

pub struct DdeRk4<T> {
    t0: T,
    h: T,
    tau: T,
    steps: usize,
    x: Vec<T>,
    lines: Vec<DelayLine<T>>,
    k: [Vec<T>; 4],
    stage: Vec<T>,
    lag: Vec<T>,
}

impl<T: Scalar> DdeRk4<T> {
    /// Starts at `(t0, x0)` with the given pre-history per lagged signal.
    pub fn new<S: RetardedSystem<T>>(
        sys: &S,
        t0: T,
        x0: Vec<T>,
        h: T,
        tau: T,
        prehistory: Vec<Prehistory<T>>,
    ) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::InvalidScenario(format!("step {h} must be positive")));
        }
        if !(tau >= T::zero()) {
            return Err(Error::InvalidScenario(format!(
                "delay {tau} must be non-negative"
            )));
        }
        if tau > T::zero() && tau < h {
            return Err(Error::InvalidScenario(format!(
                "delay {tau} shorter than the step {h}"
            )));
        }
        if x0.len() != sys.dim() || prehistory.len() != sys.lag_dim() {
            return Err(Error::InvalidScenario("dimension mismatch".into()));
        }
        let capacity = DelayLine::<T>::capacity_for(tau, h);
        let mut lines: Vec<DelayLine<T>> = prehistory
            .into_iter()
            .map(|p| DelayLine::new(t0, h, capacity, p))
            .collect();
        let mut lag = vec![T::zero(); sys.lag_dim()];
        sys.lagged_signals(t0, &x0, &mut lag);
        for (line, v) in lines.iter_mut().zip(&lag) {
            line.push(*v);
        }
        let n = sys.dim();
        Ok(Self {
            t0,
            h,
            tau,
            steps: 0,
            x: x0,
            lines,
            k: [
                vec![T::zero(); n],
                vec![T::zero(); n],
                vec![T::zero(); n],
                vec![T::zero(); n],
            ],
            stage: vec![T::zero(); n],
            lag,
        })
    }

    /// Pre-history held constant at the lagged signals of the initial state.
    pub fn with_constant_history<S: RetardedSystem<T>>(
        sys: &S,
        t0: T,
        x0: Vec<T>,
        h: T,
        tau: T,
    ) -> Result<Self> {
        let mut lag = vec![T::zero(); sys.lag_dim()];
        sys.lagged_signals(t0, &x0, &mut lag);
        let pre = lag.into_iter().map(Prehistory::Constant).collect();
        Self::new(sys, t0, x0, h, tau, pre)
    }

    pub fn t(&self) -> T {
        self.t0 + T::from_usize(self.steps).unwrap() * self.h
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> &[T] {
        &self.x
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// Delayed signals `ℓ(t − τ)` at time `t` for state `x`.
    fn lagged_into<S: RetardedSystem<T>>(
        lines: &[DelayLine<T>],
        tau: T,
        sys: &S,
        t: T,
        x: &[T],
        out: &mut [T],
    ) -> Result<()> {
        if tau == T::zero() {
            sys.lagged_signals(t, x, out);
            return Ok(());
        }
        for (o, line) in out.iter_mut().zip(lines) {
            *o = line.sample(t, tau)?;
        }
        Ok(())
    }

    /// Delayed signals at the current time.
    pub fn lagged_now<S: RetardedSystem<T>>(&self, sys: &S) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); sys.lag_dim()];
        Self::lagged_into(&self.lines, self.tau, sys, self.t(), &self.x, &mut out)?;
        Ok(out)
    }

    pub fn step<S: RetardedSystem<T>>(&mut self, sys: &S) -> Result<()> {
        let t = self.t();
        let h = self.h;
        let half = h / T::lit(2.0);
        let n = self.x.len();
        let [k1, k2, k3, k4] = &mut self.k;

        Self::lagged_into(&self.lines, self.tau, sys, t, &self.x, &mut self.lag)?;
        sys.rhs(t, &self.x, &self.lag, k1);

        for i in 0..n {
            self.stage[i] = self.x[i] + half * k1[i];
        }
        Self::lagged_into(
            &self.lines,
            self.tau,
            sys,
            t + half,
            &self.stage,
            &mut self.lag,
        )?;
        sys.rhs(t + half, &self.stage, &self.lag, k2);

        for i in 0..n {
            self.stage[i] = self.x[i] + half * k2[i];
        }
        Self::lagged_into(
            &self.lines,
            self.tau,
            sys,
            t + half,
            &self.stage,
            &mut self.lag,
        )?;
        sys.rhs(t + half, &self.stage, &self.lag, k3);

        for i in 0..n {
            self.stage[i] = self.x[i] + h * k3[i];
        }
        let t1 = self.t0 + T::from_usize(self.steps + 1).unwrap() * h;
        Self::lagged_into(&self.lines, self.tau, sys, t1, &self.stage, &mut self.lag)?;
        sys.rhs(t1, &self.stage, &self.lag, k4);

        let sixth = h / T::lit(6.0);
        for i in 0..n {
            self.x[i] = self.x[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
        self.steps += 1;

        sys.lagged_signals(t1, &self.x, &mut self.lag);
        for (line, v) in self.lines.iter_mut().zip(&self.lag) {
            line.push(*v);
        }
        Ok(())
    }
}

/// `ẏ(t) = −a·y(t − τ)` with a scalar state; the classic method-of-steps
/// calibration problem.
#[derive(Debug, Clone, Copy)]
pub struct LinearDelayDecay<T> {
    pub a: T,
}

impl<T: Scalar> RetardedSystem<T> for LinearDelayDecay<T> {
    fn dim(&self) -> usize {
        1
    }
    fn lag_dim(&self) -> usize {
        1
    }
    fn lagged_signals(&self, _t: T, x: &[T], out: &mut [T]) {
        out[0] = x[0];
    }
    fn rhs(&self, _t: T, _x: &[T], lagged: &[T], dx: &mut [T]) {
        dx[0] = -self.a * lagged[0];
    }
}
