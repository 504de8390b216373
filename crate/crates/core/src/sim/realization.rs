//! State realisation of the precompensator `G(s,z) = c·p_a(s,z)·H_m(s)`.
//!
//! `H_m = b(s)/a(s)` is realised in controllable canonical form driven by the
//! reference `r`. Because `deg a ≥ deg b + 3`, the model output `q = H_m r`
//! and its first three derivatives are algebraic functions of the state and
//! `r`, so `p_a` acts on `q` without differentiating any signal:
//!
//! `g(t) = c·Σ p_a[i,0]·q⁽ⁱ⁾(t) + c·Σ p_a[i,1]·q⁽ⁱ⁾(t − τ)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qp::QuasiPoly;
use crate::scalar::{Coefficient, Scalar};
use crate::synthesis::{pa_unchecked, validate_chi, ChiParams, ModelSpec};

/// Highest derivative of `q` needed (the s-degree of `p_a`).
pub const PA_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GRealization<T> {
    /// `a(s)`, ascending.
    den: Vec<T>,
    /// `b(s)`, ascending, padded to `den.len()`.
    num: Vec<T>,
    scale: T,
    /// `p_a` coefficients on `z⁰`, indexed by derivative order.
    undelayed: [T; PA_ORDER + 1],
    /// `p_a` coefficients on `z¹`.
    delayed: [T; PA_ORDER + 1],
    delayed_orders: Vec<usize>,
}

/// Builds the realisation after the same checks as the symbolic precompensator.
pub fn realize_g<T: Scalar + Coefficient>(
    p: &ChiParams<T>,
    model: &ModelSpec<T>,
) -> Result<GRealization<T>> {
    validate_chi(p).into_result()?;
    let tf = model.checked_tf()?;
    let den = tf.den().s_coeffs().expect("checked model is delay-free");
    let mut num = tf.num().s_coeffs().expect("checked model is delay-free");
    num.resize(den.len(), T::zero());
    GRealization::from_parts(den, num, p.precompensator_scale(), &pa_unchecked(p))
}

impl<T: Scalar + Coefficient> GRealization<T> {
    fn from_parts(den: Vec<T>, num: Vec<T>, scale: T, pa: &QuasiPoly<T>) -> Result<Self> {
        if pa.s_degree() > PA_ORDER || pa.z_degree() > 1 {
            return Err(Error::ShapeError(
                "characteristic polynomial too large".into(),
            ));
        }
        let mut undelayed = [T::zero(); PA_ORDER + 1];
        let mut delayed = [T::zero(); PA_ORDER + 1];
        for ((i, j), c) in pa.terms() {
            if j == 0 {
                undelayed[i as usize] = *c;
            } else {
                delayed[i as usize] = *c;
            }
        }
        let delayed_orders = (0..=PA_ORDER)
            .filter(|&i| delayed[i] != T::zero())
            .collect();
        Ok(Self {
            den,
            num,
            scale,
            undelayed,
            delayed,
            delayed_orders,
        })
    }
}

impl<T: Scalar> GRealization<T> {
    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// Derivative orders of `q` that enter delayed.
    pub fn delayed_orders(&self) -> &[usize] {
        &self.delayed_orders
    }

    fn lead(&self) -> T {
        self.den[self.order()]
    }

    /// `v⁽ⁿ⁾` of the canonical state, given the state and the input.
    fn top_derivative(&self, v: &[T], r: T) -> T {
        let n = self.order();
        let mut acc = r;
        for k in 0..n {
            acc = acc - self.den[k] * v[k];
        }
        acc / self.lead()
    }

    pub fn state_derivative(&self, v: &[T], r: T, dv: &mut [T]) {
        let n = self.order();
        dv[..n - 1].copy_from_slice(&v[1..n]);
        dv[n - 1] = self.top_derivative(v, r);
    }

    /// `[q, q', q'', q''']`.
    pub fn derivatives(&self, v: &[T], r: T) -> [T; PA_ORDER + 1] {
        let n = self.order();
        let top = self.top_derivative(v, r);
        let vd = |k: usize| if k < n { v[k] } else { top };
        let mut out = [T::zero(); PA_ORDER + 1];
        for (m, o) in out.iter_mut().enumerate() {
            *o = self
                .num
                .iter()
                .enumerate()
                .filter(|(i, _)| i + m <= n)
                .fold(T::zero(), |acc, (i, &b)| acc + b * vd(i + m));
        }
        out
    }

    /// Precompensator output from current and delayed model derivatives.
    pub fn output(&self, now: &[T; PA_ORDER + 1], delayed: &[T; PA_ORDER + 1]) -> T {
        let mut acc = T::zero();
        for i in 0..=PA_ORDER {
            acc = acc + self.undelayed[i] * now[i] + self.delayed[i] * delayed[i];
        }
        self.scale * acc
    }

    /// Equilibrium state for a constant input `r`.
    pub fn steady_state(&self, r: T) -> Vec<T> {
        let mut v = vec![T::zero(); self.order()];
        v[0] = r / self.den[0];
        v
    }

    /// Frequency response of the realisation at `s` and delay `τ`, computed
    /// from the state-space matrices (`(sI − A)⁻¹B` by elimination).
    pub fn frequency_response(&self, s: Complex<T>, tau: T) -> Complex<T> {
        let n = self.order();
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let re = |x: T| Complex::new(x, T::zero());
        // (sI − A) augmented with B
        let mut m = vec![vec![zero; n + 1]; n];
        for i in 0..n {
            m[i][i] = s;
            if i + 1 < n {
                m[i][i + 1] = -one;
            }
        }
        for k in 0..n {
            m[n - 1][k] = m[n - 1][k] + re(self.den[k] / self.lead());
        }
        m[n - 1][n] = re(T::one() / self.lead());
        let x = solve(m);

        // output rows: q⁽ᵐ⁾ = C_m x + D_m r
        let z = (-s * tau).exp();
        let mut total = zero;
        for mo in 0..=PA_ORDER {
            let mut c_row = vec![T::zero(); n];
            let mut d = T::zero();
            for (i, &b) in self.num.iter().enumerate() {
                let k = i + mo;
                if k < n {
                    c_row[k] = c_row[k] + b;
                } else if k == n {
                    for (j, c) in c_row.iter_mut().enumerate() {
                        *c = *c - b * self.den[j] / self.lead();
                    }
                    d = d + b / self.lead();
                }
            }
            let qm = c_row
                .iter()
                .zip(&x)
                .fold(re(d), |acc, (&c, &xi)| acc + xi * c);
            total = total + qm * (re(self.undelayed[mo]) + z * self.delayed[mo]);
        }
        total * self.scale
    }
}

/// Gaussian elimination with partial pivoting on an augmented `n × (n+1)` system.
fn solve<T: Scalar>(mut m: Vec<Vec<Complex<T>>>) -> Vec<Complex<T>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                let v = m[col][k];
                m[row][k] = m[row][k] - f * v;
            }
        }
    }
    let mut x = vec![Complex::new(T::zero(), T::zero()); n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}
