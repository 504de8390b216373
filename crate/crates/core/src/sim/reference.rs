//! Closed-form step responses used as references for the simulated outputs.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::{Coefficient, Scalar};
use crate::synthesis::ModelSpec;

/// Time constants closer than this (relatively) count as repeated.
pub const REPEATED_RTOL: f64 = 1e-12;

fn has_repeats<T: Scalar>(tcs: &[T]) -> bool {
    let tol = T::lit(REPEATED_RTOL);
    tcs.iter().enumerate().any(|(i, &a)| {
        tcs[i + 1..]
            .iter()
            .any(|&b| (a - b).abs() <= tol * a.abs().max(b.abs()))
    })
}

/// Unit step response of `1/∏(Tᵢs + 1)` for pairwise distinct `Tᵢ`:
/// `1 − Σ cᵢ e^{−t/Tᵢ}` with `cᵢ = Tᵢⁿ⁻¹ / ∏_{j≠i}(Tᵢ − Tⱼ)`.
pub fn distinct_step_response<T: Scalar>(tcs: &[T], t: T) -> Result<T> {
    if has_repeats(tcs) {
        return Err(Error::DegenerateTimeConstants);
    }
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let n = tcs.len() as i32;
    let mut y = T::one();
    for (i, &ti) in tcs.iter().enumerate() {
        let mut c = ti.powi(n - 1);
        for (j, &tj) in tcs.iter().enumerate() {
            if j != i {
                c = c / (ti - tj);
            }
        }
        y = y - c * (-t / ti).exp();
    }
    Ok(y)
}

/// Unit step response of `1/∏(Tᵢs + 1)` allowing repeated time constants,
/// from the Laurent expansion of `Y(s) = H(s)/s` at each pole.
pub fn repeated_step_response<T: Scalar>(tcs: &[T], t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    // group poles p = −1/T with multiplicities
    let tol = T::lit(REPEATED_RTOL);
    let mut groups: Vec<(T, usize)> = Vec::new();
    for &tc in tcs {
        match groups
            .iter_mut()
            .find(|(g, _)| (*g - tc).abs() <= tol * g.abs().max(tc.abs()))
        {
            Some(g) => g.1 += 1,
            None => groups.push((tc, 1)),
        }
    }
    let gain = tcs.iter().fold(T::one(), |acc, &tc| acc / tc);

    let mut y = T::one();
    for (gi, &(tc, m)) in groups.iter().enumerate() {
        let p = -tc.recip();
        // Taylor series of (s − p)^m·Y(s) around p, truncated to m terms
        let mut series = vec![T::zero(); m];
        series[0] = gain;
        let mul_inverse_linear = |series: &mut Vec<T>, root: T, power: usize| {
            // multiply by (s − root)^{−power}; with ε = s − p, 1/(d + ε) = Σ (−ε)^k / d^{k+1}
            let d = p - root;
            for _ in 0..power {
                let inv: Vec<T> = (0..m)
                    .map(|k| {
                        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                        sign / d.powi(k as i32 + 1)
                    })
                    .collect();
                let prev = series.clone();
                for (k, out) in series.iter_mut().enumerate() {
                    *out = (0..=k).fold(T::zero(), |acc, l| acc + prev[l] * inv[k - l]);
                }
            }
        };
        mul_inverse_linear(&mut series, T::zero(), 1);
        for (gj, &(tj, mj)) in groups.iter().enumerate() {
            if gj != gi {
                mul_inverse_linear(&mut series, -tj.recip(), mj);
            }
        }
        let mut poly_t = T::zero();
        let mut fact = T::one();
        for k in 0..m {
            if k > 0 {
                fact = fact * T::from_usize(k).unwrap();
            }
            poly_t = poly_t + series[m - 1 - k] * t.powi(k as i32) / fact;
        }
        y = y + (p * t).exp() * poly_t;
    }
    y
}

/// Unit step response of a general delay-free model with simple poles.
fn simple_pole_step_response<T: Scalar>(num: &[T], den: &[T], t: T) -> Result<T> {
    let poles = poly::roots(den);
    let tol = T::lit(1e-6);
    for (i, a) in poles.iter().enumerate() {
        if poles[i + 1..]
            .iter()
            .any(|b| (a - b).norm() <= tol * (T::one() + a.norm()))
        {
            return Err(Error::DegenerateTimeConstants);
        }
    }
    let eval = |c: &[T], s: Complex<T>| {
        c.iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &k| acc * s + k)
    };
    let dden: Vec<T> = den
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * T::from_usize(i).unwrap())
        .collect();
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let mut y = Complex::new(num[0] / den[0], T::zero());
    for &p in &poles {
        let residue = eval(num, p) / (p * eval(&dden, p));
        y = y + residue * (p * t).exp();
    }
    Ok(y.re)
}

/// Step response of `H_m` scaled by `amplitude` (the step size), at time `t`
/// after the step.
pub fn analytic_reference<T: Scalar + Coefficient>(
    model: &ModelSpec<T>,
    amplitude: T,
    t: T,
) -> Result<T> {
    let unit = match model {
        ModelSpec::TimeConstants(tcs) => match distinct_step_response(tcs, t) {
            Ok(v) => v,
            Err(Error::DegenerateTimeConstants) => repeated_step_response(tcs, t),
            Err(e) => return Err(e),
        },
        ModelSpec::Transfer(_) => {
            let tf = model.to_tf()?;
            let num = tf.num().s_coeffs().expect("delay-free");
            let den = tf.den().s_coeffs().expect("delay-free");
            simple_pole_step_response(&num, &den, t)?
        }
    };
    Ok(amplitude * unit)
}

/// Step response of `y'' + λ₁₁y' + λ₀₁y = λ₀₁w` from rest, scaled by `amplitude`.
pub fn second_order_step<T: Scalar>(lambda01: T, lambda11: T, amplitude: T, t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let half = lambda11 / T::lit(2.0);
    let disc = half * half - lambda01;
    let scale = lambda01.abs().max(half * half);
    let unit = if disc.abs() <= T::lit(1e-12) * scale {
        // repeated root −half
        T::one() - (-half * t).exp() * (T::one() + half * t)
    } else if disc > T::zero() {
        let sq = disc.sqrt();
        let (p1, p2) = (-half + sq, -half - sq);
        T::one() - (p2 * (p1 * t).exp() - p1 * (p2 * t).exp()) / (p2 - p1)
    } else {
        let wd = (-disc).sqrt();
        T::one() - (-half * t).exp() * ((wd * t).cos() + half / wd * (wd * t).sin())
    };
    amplitude * unit
}
