//! Univariate real-polynomial helpers: Routh–Hurwitz test and root finding.
//!
//! Coefficients are given in ascending powers of `s`.

use num_complex::Complex;

use crate::scalar::Scalar;

fn trim<T: Scalar>(ascending: &[T]) -> &[T] {
    let mut n = ascending.len();
    while n > 0 && ascending[n - 1] == T::zero() {
        n -= 1;
    }
    &ascending[..n]
}

/// True when every root lies strictly in the open left half-plane.
///
/// Marginal cases (a zero in the first column, roots on the imaginary axis)
/// are reported as not Hurwitz.
pub fn routh_hurwitz<T: Scalar>(ascending: &[T]) -> bool {
    let a = trim(ascending);
    if a.is_empty() {
        return false;
    }
    let n = a.len() - 1;
    if n == 0 {
        return true;
    }
    let sign = a[n].signum();
    // descending, sign-normalised
    let desc: Vec<T> = a.iter().rev().map(|&c| c * sign).collect();
    if desc.iter().any(|&c| c <= T::zero()) {
        return false;
    }
    let width = n / 2 + 1;
    let mut prev: Vec<T> = (0..width)
        .map(|k| desc.get(2 * k).copied().unwrap_or_else(T::zero))
        .collect();
    let mut cur: Vec<T> = (0..width)
        .map(|k| desc.get(2 * k + 1).copied().unwrap_or_else(T::zero))
        .collect();
    for _ in 1..n {
        if cur[0] <= T::zero() {
            return false;
        }
        let next: Vec<T> = (0..width)
            .map(|k| {
                let p1 = prev.get(k + 1).copied().unwrap_or_else(T::zero);
                let c1 = cur.get(k + 1).copied().unwrap_or_else(T::zero);
                (cur[0] * p1 - prev[0] * c1) / cur[0]
            })
            .collect();
        prev = cur;
        cur = next;
    }
    cur[0] > T::zero()
}

/// All complex roots by Aberth–Ehrlich iteration.
///
/// Accuracy degrades to roughly `ε^{1/m}` for a root of multiplicity `m`,
/// which is enough for the half-plane checks done with it.
pub fn roots<T: Scalar>(ascending: &[T]) -> Vec<Complex<T>> {
    let a = trim(ascending);
    if a.len() < 2 {
        return Vec::new();
    }
    let n = a.len() - 1;
    let lead = a[n];
    let monic: Vec<T> = a.iter().map(|&c| c / lead).collect();

    // Cauchy bound for the initial circle
    let radius = T::one()
        + monic[..n]
            .iter()
            .fold(T::zero(), |m, &c| if c.abs() > m { c.abs() } else { m });
    let two_pi = T::lit(std::f64::consts::TAU);
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let theta =
                two_pi * T::from_usize(k).unwrap() / T::from_usize(n).unwrap() + T::lit(0.4);
            Complex::from_polar(radius * T::lit(0.5), theta)
        })
        .collect();

    let eval = |x: Complex<T>| -> (Complex<T>, Complex<T>) {
        let mut p = Complex::new(T::one(), T::zero());
        let mut dp = Complex::new(T::zero(), T::zero());
        for &c in monic[..n].iter().rev() {
            dp = dp * x + p;
            p = p * x + Complex::new(c, T::zero());
        }
        (p, dp)
    };

    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..500 {
        let mut max_step = T::zero();
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex::new(T::zero(), T::zero());
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    repulsion = repulsion + (z[i] - zj).inv();
                }
            }
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * repulsion);
            z[i] = z[i] - step;
            let rel = step.norm() / (T::one() + z[i].norm());
            if rel > max_step {
                max_step = rel;
            }
        }
        if max_step < tol {
            break;
        }
    }
    z
}

/// Largest real part among the roots (`-∞` for constants).
pub fn spectral_abscissa<T: Scalar>(ascending: &[T]) -> T {
    roots(ascending)
        .into_iter()
        .map(|r| r.re)
        .fold(T::neg_infinity(), T::max)
}
