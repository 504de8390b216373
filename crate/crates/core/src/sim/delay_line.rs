use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Values returned for query times before the first stored sample.
#[derive(Clone)]
pub enum Prehistory<T> {
    Constant(T),
    Function(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Scalar> Prehistory<T> {
    pub fn at(&self, t: T) -> T {
        match self {
            Prehistory::Constant(c) => *c,
            Prehistory::Function(f) => f(t),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Prehistory<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prehistory::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Prehistory::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Bounded history of a signal sampled on the uniform grid `t₀ + k·h`,
/// realising the delay operator `f(t − τ)` by cubic Lagrange interpolation.
#[derive(Clone, Debug)]
pub struct DelayLine<T> {
    t0: T,
    h: T,
    first_index: usize,
    values: VecDeque<T>,
    capacity: usize,
    prehistory: Prehistory<T>,
}

impl<T: Scalar> DelayLine<T> {
    /// `capacity` is the number of retained samples; size it as
    /// `max_delay / h` plus a few points for the interpolation stencil.
    pub fn new(t0: T, h: T, capacity: usize, prehistory: Prehistory<T>) -> Self {
        assert!(h > T::zero(), "sample spacing must be positive");
        let capacity = capacity.max(4);
        Self {
            t0,
            h,
            first_index: 0,
            values: VecDeque::with_capacity(capacity + 1),
            capacity,
            prehistory,
        }
    }

    /// Capacity large enough to serve delays up to `max_delay`.
    pub fn capacity_for(max_delay: T, h: T) -> usize {
        (max_delay / h).ceil().to_usize().unwrap_or(0) + 8
    }

    /// Appends the sample at the next grid time.
    pub fn push(&mut self, value: T) {
        self.values.push_back(value);
        if self.values.len() > self.capacity {
            self.values.pop_front();
            self.first_index += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn time_of(&self, index: usize) -> T {
        self.t0 + T::from_usize(index).unwrap() * self.h
    }

    pub fn oldest_time(&self) -> Option<T> {
        (!self.values.is_empty()).then(|| self.time_of(self.first_index))
    }

    pub fn newest_time(&self) -> Option<T> {
        (!self.values.is_empty()).then(|| self.time_of(self.first_index + self.values.len() - 1))
    }

    /// `f(t − τ)`.
    pub fn sample(&self, t: T, tau: T) -> Result<T> {
        self.at(t - tau)
    }

    /// Value at absolute time `q`.
    pub fn at(&self, q: T) -> Result<T> {
        if q < self.t0 {
            return Ok(self.prehistory.at(q));
        }
        let out_of_range = || Error::QueryOutOfRange {
            query: q.as_f64(),
            oldest: self.oldest_time().map(|t| t.as_f64()).unwrap_or(f64::NAN),
        };
        if self.values.is_empty() {
            return Err(out_of_range());
        }
        let u = (q - self.t0) / self.h;
        let first = T::from_usize(self.first_index).unwrap();
        let last = T::from_usize(self.first_index + self.values.len() - 1).unwrap();
        let slack = T::lit(1e-9);
        if u < first - slack || u > last + slack {
            return Err(out_of_range());
        }
        let n = self.values.len();
        let order = n.min(4);
        let idx = u.floor().to_usize().unwrap_or(0);
        let lo = self.first_index;
        let hi = self.first_index + n - order;
        let start = idx.saturating_sub(1).clamp(lo, hi);
        let x = u - T::from_usize(start).unwrap();
        let mut acc = T::zero();
        for i in 0..order {
            let mut w = T::one();
            let xi = T::from_usize(i).unwrap();
            for j in 0..order {
                if j != i {
                    let xj = T::from_usize(j).unwrap();
                    w = w * (x - xj) / (xi - xj);
                }
            }
            acc = acc + w * self.values[start - self.first_index + i];
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(h: f64, until: f64, f: impl Fn(f64) -> f64) -> DelayLine<f64> {
        let n = (until / h).round() as usize;
        let mut d = DelayLine::new(0.0, h, n + 8, Prehistory::Constant(f(0.0)));
        for k in 0..=n {
            d.push(f(k as f64 * h));
        }
        d
    }

    #[test]
    fn constant_signal() {
        let d = filled(0.01, 1.0, |_| 2.5);
        for &(t, tau) in &[(1.0, 0.3), (0.5, 0.123), (0.05, 0.2), (1.0, 0.0)] {
            assert!((d.sample(t, tau).unwrap() - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn ramp_is_exact() {
        let d = filled(1e-3, 1.0, |t| t);
        assert!((d.sample(1.0, 0.1).unwrap() - 0.9).abs() < 1e-12);
        assert!((d.sample(0.7777, 0.0311).unwrap() - 0.7466).abs() < 1e-12);
    }

    #[test]
    fn sine_within_interpolation_error() {
        let d = filled(1e-3, 2.0, |t| (5.0 * t).sin());
        let v = d.sample(2.0, 0.2).unwrap();
        assert!((v - 9f64.sin()).abs() < 1e-9);
        let v = d.sample(1.99951, 0.2).unwrap();
        assert!((v - (5.0 * 1.79951f64).sin()).abs() < 1e-9);
        // near the newest and oldest samples
        assert!((d.at(1.9996).unwrap() - (5.0 * 1.9996f64).sin()).abs() < 1e-9);
        assert!((d.at(0.0004).unwrap() - (5.0 * 0.0004f64).sin()).abs() < 1e-9);
    }

    #[test]
    fn prehistory_and_range() {
        let mut d = DelayLine::new(0.0, 0.1, 5, Prehistory::Function(Arc::new(|t: f64| -t)));
        assert_eq!(d.sample(0.0, 0.5).unwrap(), 0.5);
        assert!(matches!(d.at(0.1), Err(Error::QueryOutOfRange { .. })));
        for k in 0..20 {
            d.push(k as f64);
        }
        // only the last 5 samples (t = 1.5 .. 1.9) are retained
        assert_eq!(d.oldest_time(), Some(1.5));
        assert!((d.newest_time().unwrap() - 1.9).abs() < 1e-12);
        assert!(matches!(d.at(1.0), Err(Error::QueryOutOfRange { .. })));
        assert!(matches!(d.at(2.5), Err(Error::QueryOutOfRange { .. })));
        assert!((d.at(1.75).unwrap() - 17.5).abs() < 1e-9);
    }

    #[test]
    fn few_samples_lower_order() {
        let mut d = DelayLine::new(0.0, 1.0, 10, Prehistory::Constant(0.0));
        d.push(1.0);
        assert_eq!(d.at(0.0).unwrap(), 1.0);
        d.push(3.0);
        assert_eq!(d.at(0.5).unwrap(), 2.0);
    }
}
