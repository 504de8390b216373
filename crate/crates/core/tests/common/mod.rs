//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library except for plain data types.

#![allow(dead_code)]

use delaymatch::ChiParams;
use num_complex::Complex64;
use rand::Rng;

pub const REF_CHI: (f64, f64, f64, f64) = (1.42662, 217.2061, 676.2171, 0.1);
pub const REF_TCS: [f64; 3] = [0.04, 0.05, 0.06];

pub fn ref_chi() -> ChiParams<f64> {
    let (a, b, c, k) = REF_CHI;
    ChiParams::new(a, b, c, k)
}

/// Crossing of `s² + χ₂s + χ₃e^{−sτ}` through the imaginary axis, from
/// `|jω(jω + χ₂)| = χ₃` and `arg(jω(jω + χ₂)) = π − ωτ`.
pub fn crossing_oracle(chi2: f64, chi3: f64) -> (f64, f64) {
    // ω⁴ + χ₂²ω² − χ₃² = 0 as a quadratic in ω²
    let b = chi2 * chi2;
    let disc = (b * b + 4.0 * chi3 * chi3).sqrt();
    // stable form of (−b + disc)/2
    let w2 = 2.0 * chi3 * chi3 / (b + disc);
    let w = w2.sqrt();
    let phase = std::f64::consts::PI - Complex64::new(-w2, chi2 * w).arg();
    (w, phase / w)
}

/// Brute-force crossing: smallest delay at which `|jω(jω+χ₂)| = χ₃` and the
/// phase condition hold, found by scanning ω on a log grid.
pub fn crossing_grid(chi2: f64, chi3: f64, points: usize) -> (f64, f64) {
    let (lo, hi) = (1e-3f64.ln(), (10.0 * chi2).ln());
    let mag = |w: f64| w * (w * w + chi2 * chi2).sqrt() - chi3;
    let mut prev = (lo.exp(), mag(lo.exp()));
    for k in 1..points {
        let w = (lo + (hi - lo) * k as f64 / (points - 1) as f64).exp();
        let m = mag(w);
        if prev.1 <= 0.0 && m > 0.0 {
            // bisection inside the bracketing cell
            let (mut a, mut b) = (prev.0, w);
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if mag(c) > 0.0 {
                    b = c;
                } else {
                    a = c;
                }
            }
            let wc = 0.5 * (a + b);
            let angle = (chi2 * wc).atan2(-wc * wc);
            return (wc, (std::f64::consts::PI - angle) / wc);
        }
        prev = (w, m);
    }
    panic!("no crossing on the grid");
}

/// Random parameters satisfying every synthesis constraint, spread so that
/// the crossing dynamics stay resolvable by a fixed-step simulation.
pub fn random_chi<R: Rng>(rng: &mut R) -> ChiParams<f64> {
    loop {
        let chi2 = rng.gen_range(5.0..300.0);
        let beta = rng.gen_range(0.05..0.95);
        let chi3 = beta * chi2 * chi2 / 4.0;
        let (w, _) = crossing_oracle(chi2, chi3);
        let chi1 = rng.gen_range(0.05..0.5) * w;
        let k2 = rng.gen_range(-0.5..0.5) / chi1;
        // keep χ₁ away from the roots of s² − χ₂s + χ₃
        let d = (chi2 * chi2 - 4.0 * chi3).sqrt();
        let (r1, r2) = ((chi2 - d) / 2.0, (chi2 + d) / 2.0);
        if ((chi1 - r1) / r1).abs() > 1e-3 && ((chi1 - r2) / r2).abs() > 1e-3 {
            return ChiParams::new(chi1, chi2, chi3, k2);
        }
    }
}

/// Step response of `1/∏(Tᵢs + 1)` for distinct time constants, by partial
/// fractions.
pub fn cascade_step(tcs: &[f64], t: f64) -> f64 {
    let n = tcs.len() as i32;
    let mut y = 1.0;
    for (i, &ti) in tcs.iter().enumerate() {
        let mut den = 1.0;
        for (j, &tj) in tcs.iter().enumerate() {
            if i != j {
                den *= ti - tj;
            }
        }
        y -= ti.powi(n - 1) / den * (-t / ti).exp();
    }
    y
}

/// `H_m(s) = 1/∏(Tᵢs + 1)`.
pub fn cascade_tf(tcs: &[f64], s: Complex64) -> Complex64 {
    tcs.iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &t| acc / (s * t + 1.0))
}

/// Closed form of `ẏ(t) = −y(t−1)`, `y ≡ 1` on `[−1, 0]`, on `[0, 3]`.
pub fn method_of_steps(t: f64) -> f64 {
    let mut y = 1.0 - t;
    if t > 1.0 {
        y += (t - 1.0).powi(2) / 2.0;
    }
    if t > 2.0 {
        y -= (t - 2.0).powi(3) / 6.0;
    }
    y
}

/// Plain RK4 on a linear ODE `x' = Ax + b`, used as a delay-free reference.
pub fn rk4_linear(a: &[Vec<f64>], b: &[f64], x0: &[f64], h: f64, steps: usize) -> Vec<Vec<f64>> {
    let n = x0.len();
    let f = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * x[j]).sum::<f64>() + b[i])
            .collect()
    };
    let mut x = x0.to_vec();
    let mut out = vec![x.clone()];
    for _ in 0..steps {
        let k1 = f(&x);
        let x2: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k1[i]).collect();
        let k2 = f(&x2);
        let x3: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k2[i]).collect();
        let k3 = f(&x3);
        let x4: Vec<f64> = (0..n).map(|i| x[i] + h * k3[i]).collect();
        let k4 = f(&x4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(x.clone());
    }
    out
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
