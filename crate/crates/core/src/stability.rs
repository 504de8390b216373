//! Delay-dependent stability of the characteristic quasi-polynomial, decided
//! independently of the closed-form delay bound.
//!
//! Only the quadratic factor `s² + χ₂s + zχ₃` depends on the delay; the
//! first-order factor `s + χ₁` is delay-free and Hurwitz for `χ₁ > 0`. A
//! root pair crosses the imaginary axis at `s = ±jω_c` when
//! `χ₃e^{-jωτ} = ω² − jχ₂ω`, which fixes both the crossing frequency and the
//! first crossing delay.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::routh_hurwitz;
use crate::qp::QuasiPoly;
use crate::scalar::{Coefficient, Scalar};

/// Relative tolerance used when recognising the `(s + χ₁)(s² + χ₂s + zχ₃)`
/// factor structure in a supplied quasi-polynomial.
pub const SHAPE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingPoint<T> {
    /// rad/s
    pub omega_c: T,
    /// s
    pub tau_cross: T,
}

pub fn crossing_point<T: Scalar>(chi2: T, chi3: T) -> Result<CrossingPoint<T>> {
    if !(chi2 > T::zero() && chi3 > T::zero()) {
        return Err(Error::ConstraintViolation {
            failed: vec!["crossing requires chi2 > 0 and chi3 > 0".into()],
        });
    }
    // |ω² − jχ₂ω| = χ₃  ⇒  ω⁴ + χ₂²ω² − χ₃² = 0
    let c2sq = chi2 * chi2;
    let root = c2sq.hypot(T::lit(2.0) * chi3);
    let omega_sq = T::lit(2.0) * chi3 * chi3 / (c2sq + root);
    let omega_c = omega_sq.sqrt();
    let tau_cross = (chi2 * omega_c).atan2(omega_sq) / omega_c;
    Ok(CrossingPoint { omega_c, tau_cross })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict<T> {
    pub stable: bool,
    /// `τ_cross − τ` (s); `-∞` when unstable already without delay.
    pub margin_metric: T,
}

/// Factor parameters `(χ₁, χ₂, χ₃)` recovered from a characteristic
/// quasi-polynomial of the form `c·(s + χ₁)(s² + χ₂s + zχ₃)`.
pub fn factor_shape<T: Scalar + Coefficient>(pa: &QuasiPoly<T>) -> Result<(T, T, T)> {
    if pa.s_degree() != 3 || pa.z_degree() > 1 {
        return Err(Error::ShapeError(format!(
            "expected s-degree 3 and z-degree at most 1, got {} and {}",
            pa.s_degree(),
            pa.z_degree()
        )));
    }
    let lead = pa.coeff(3, 0);
    for ((i, j), _) in pa.terms() {
        if j == 1 && i > 1 {
            return Err(Error::ShapeError(format!("unexpected term s^{i}z")));
        }
    }
    let c = |i, j| pa.coeff(i, j) / lead;
    let chi3 = c(1, 1);
    if chi3 == T::zero() {
        return Err(Error::ShapeError("no delayed s-term".into()));
    }
    let chi1 = c(0, 1) / chi3;
    let chi2 = c(2, 0) - chi1;
    let rtol = T::lit(SHAPE_RTOL);
    let expect_s = chi1 * chi2;
    let got_s = c(1, 0);
    if (got_s - expect_s).abs() > rtol * got_s.abs().max(expect_s.abs()).max(T::epsilon()) {
        return Err(Error::ShapeError(
            "s-coefficient does not match the factored form".into(),
        ));
    }
    if c(0, 0).abs() > rtol * c(0, 1).abs() {
        return Err(Error::ShapeError("undelayed constant term present".into()));
    }
    Ok((chi1, chi2, chi3))
}

/// Stability of `p_a` at constant delay `τ`.
///
/// Stable when the delay-free cubic passes Routh–Hurwitz and `τ` lies
/// strictly before the first crossing; `τ = τ_cross` counts as unstable.
/// Destabilisation at the first crossing is taken to be permanent.
pub fn stability_verdict<T: Scalar + Coefficient>(
    pa: &QuasiPoly<T>,
    tau: T,
) -> Result<StabilityVerdict<T>> {
    if !(tau >= T::zero()) {
        return Err(Error::InvalidScenario(format!("negative delay {tau}")));
    }
    let (chi1, chi2, chi3) = factor_shape(pa)?;
    let delay_free = pa
        .substitute_z(&T::one())
        .s_coeffs()
        .expect("z substituted");
    if !routh_hurwitz(&delay_free)
        || !(chi1 > T::zero())
        || !(chi2 > T::zero())
        || !(chi3 > T::zero())
    {
        return Ok(StabilityVerdict {
            stable: false,
            margin_metric: T::neg_infinity(),
        });
    }
    let cross = crossing_point(chi2, chi3)?;
    let margin = cross.tau_cross - tau;
    Ok(StabilityVerdict {
        stable: margin > T::zero(),
        margin_metric: margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{assemble_pa, ChiParams};
    use num_complex::Complex;

    fn reference() -> ChiParams<f64> {
        ChiParams::new(1.42662, 217.2061, 676.2171, 0.1)
    }

    #[test]
    fn crossing_satisfies_magnitude_and_phase() {
        let cp = crossing_point(217.2061f64, 676.2171).unwrap();
        let w = cp.omega_c;
        let lhs = 676.2171f64.powi(2);
        let rhs = w.powi(4) + 217.2061f64.powi(2) * w * w;
        assert!(((lhs - rhs) / lhs).abs() < 1e-10);
        let pc2 = QuasiPoly::from_terms([((2, 0), 1.0), ((1, 0), 217.2061), ((0, 1), 676.2171)]);
        let v = pc2.eval(Complex::new(0.0, w), cp.tau_cross);
        assert!(v.norm() < 1e-8 * 676.2171, "{}", v.norm());
    }

    #[test]
    fn surd_case() {
        // χ₃ = √2·χ₂² gives ω_c = χ₂
        let chi2 = 3.0;
        let cp = crossing_point(chi2, 2f64.sqrt() * chi2 * chi2).unwrap();
        assert!((cp.omega_c - chi2).abs() < 1e-12);
    }

    #[test]
    fn tau_cross_grows_as_chi3_shrinks() {
        let chi2: f64 = 217.2061;
        let taus: Vec<f64> = [10.0, 1.0, 0.1]
            .iter()
            .map(|f| {
                crossing_point(chi2, f * chi2 * chi2 / 100.0)
                    .unwrap()
                    .tau_cross
            })
            .collect();
        assert!(taus[0] < taus[1] && taus[1] < taus[2]);
    }

    #[test]
    fn non_positive_inputs_rejected() {
        assert!(crossing_point(0.0, 1.0).is_err());
        assert!(crossing_point(1.0, -1.0).is_err());
    }

    #[test]
    fn verdicts_around_crossing() {
        let pa = assemble_pa(&reference()).unwrap();
        let tc = crossing_point(217.2061, 676.2171).unwrap().tau_cross;
        assert!(stability_verdict(&pa, 0.0).unwrap().stable);
        assert!(stability_verdict(&pa, 0.45).unwrap().stable);
        assert!(!stability_verdict(&pa, 0.55).unwrap().stable);
        let at = stability_verdict(&pa, tc).unwrap();
        assert!(!at.stable);
        assert_eq!(at.margin_metric, 0.0);
    }

    #[test]
    fn shape_recovery_and_errors() {
        let pa = assemble_pa(&reference()).unwrap();
        let (c1, c2, c3) = factor_shape(&pa.scale(&2.0)).unwrap();
        assert!((c1 - 1.42662).abs() < 1e-12);
        assert!((c2 - 217.2061).abs() < 1e-10);
        assert!((c3 - 676.2171).abs() < 1e-10);

        let quad = QuasiPoly::from_s_coeffs(&[1.0, 2.0, 1.0]);
        assert!(matches!(
            stability_verdict(&quad, 0.1),
            Err(Error::ShapeError(_))
        ));
        let extra = &pa + &QuasiPoly::monomial(2, 1, 1.0);
        assert!(matches!(
            stability_verdict(&extra, 0.1),
            Err(Error::ShapeError(_))
        ));
        let detuned = &pa + &QuasiPoly::monomial(1, 0, 5.0);
        assert!(matches!(factor_shape(&detuned), Err(Error::ShapeError(_))));
    }
}
