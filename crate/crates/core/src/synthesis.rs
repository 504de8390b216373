//! Controller synthesis: design parameters → gains, characteristic
//! quasi-polynomial, delay bound and the exact-model-matching precompensator.
//!
//! The free design parameters are `χ₁, χ₂, χ₃` (poles of the delay-dependent
//! characteristic quasi-polynomial) and the static feedback gain `k₂`. Every
//! other gain of the second and third control layers follows from them.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly;
use crate::qp::{QuasiPoly, RationalTf};
use crate::scalar::{ulps, Coefficient, Scalar};

/// Relative tolerance of the `χ₁ ≠ quadratic root` exclusion.
pub const ROOT_EXCLUSION_RTOL: f64 = 1e-9;
/// Minimum `|1 − k₂χ₁|` accepted as "not equal to one".
pub const UNIT_PRODUCT_TOL: f64 = 1e-9;
/// Model poles must satisfy `Re(p) < -MODEL_STABILITY_MARGIN`.
pub const MODEL_STABILITY_MARGIN: f64 = 1e-9;
/// Two-route coefficient agreement required by [`build_inner_tf`].
pub const INNER_TF_MAX_ULPS: u64 = 2;

/// Default linear-velocity channel gains (critically damped at 10 rad/s).
pub const DEFAULT_LAMBDA01: f64 = 100.0;
pub const DEFAULT_LAMBDA11: f64 = 20.0;

/// Free design parameters.
///
/// Units: `chi1`, `chi2` in 1/s, `chi3` in 1/s², `k2` in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiParams<T> {
    pub chi1: T,
    pub chi2: T,
    pub chi3: T,
    pub k2: T,
}

impl<T: Scalar> ChiParams<T> {
    pub fn new(chi1: T, chi2: T, chi3: T, k2: T) -> Self {
        Self {
            chi1,
            chi2,
            chi3,
            k2,
        }
    }

    /// Real roots `(χ₂ ± √(χ₂² − 4χ₃))/2` of `s² − χ₂s + χ₃`, i.e. the
    /// negated poles of the delay-free quadratic factor. `None` when complex.
    pub fn quadratic_roots(&self) -> Option<(T, T)> {
        let disc = self.chi2 * self.chi2 - T::lit(4.0) * self.chi3;
        if disc < T::zero() {
            return None;
        }
        let sq = disc.sqrt();
        let plus = (self.chi2 + sq) / T::lit(2.0);
        // cancellation-free companion root
        let minus = if plus != T::zero() {
            self.chi3 / plus
        } else {
            T::zero()
        };
        Some((plus, minus))
    }

    /// `(1 − k₂χ₁)/(χ₁χ₃)`, the scalar in front of the precompensator.
    pub fn precompensator_scale(&self) -> T {
        (T::one() - self.k2 * self.chi1) / (self.chi1 * self.chi3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintCheck<T> {
    pub name: &'static str,
    pub passed: bool,
    /// Signed slack of the inequality; positive means satisfied.
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport<T> {
    pub checks: Vec<ConstraintCheck<T>>,
}

impl<T: Scalar> ConstraintReport<T> {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&ConstraintCheck<T>> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn into_result(self) -> Result<Self> {
        if self.all_passed() {
            Ok(self)
        } else {
            Err(Error::ConstraintViolation {
                failed: self.failures().into_iter().map(String::from).collect(),
            })
        }
    }
}

/// Evaluates every design constraint and reports its slack. Never fails;
/// downstream operations reject a report with failures.
pub fn validate_chi<T: Scalar>(p: &ChiParams<T>) -> ConstraintReport<T> {
    let mut checks = Vec::with_capacity(7);
    let mut push = |name, margin: T, passed: bool| {
        checks.push(ConstraintCheck {
            name,
            passed,
            margin,
        });
    };
    push("chi1_positive", p.chi1, p.chi1 > T::zero());
    push("chi2_positive", p.chi2, p.chi2 > T::zero());
    push("chi3_positive", p.chi3, p.chi3 > T::zero());

    let quarter = p.chi2 * p.chi2 / T::lit(4.0) - p.chi3;
    push(
        "chi3_below_quarter_chi2_squared",
        quarter,
        quarter > T::zero(),
    );

    let rtol = T::lit(ROOT_EXCLUSION_RTOL);
    match p.quadratic_roots() {
        Some((plus, minus)) => {
            for (name, root) in [
                ("chi1_not_upper_root", plus),
                ("chi1_not_lower_root", minus),
            ] {
                let scale = root.abs().max(p.chi1.abs());
                let rel = if scale > T::zero() {
                    (p.chi1 - root).abs() / scale
                } else {
                    T::zero()
                };
                push(name, rel - rtol, rel > rtol);
            }
        }
        None => {
            push("chi1_not_upper_root", T::infinity(), true);
            push("chi1_not_lower_root", T::infinity(), true);
        }
    }

    let unit = (T::one() - p.k2 * p.chi1).abs() - T::lit(UNIT_PRODUCT_TOL);
    push("k2_chi1_not_one", unit, unit > T::zero());
    ConstraintReport { checks }
}

/// All gains of the second and third control layers.
///
/// Units: `mu0`, `eta1`, `lambda12`, `lambda11` in 1/s; `eta0`, `lambda02`,
/// `lambda01` in 1/s²; `kappa`, `k1`, `rho0` dimensionless; `k2`, `rho1` in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainSet<T> {
    pub mu0: T,
    pub eta0: T,
    pub eta1: T,
    pub kappa: T,
    pub k1: T,
    pub k2: T,
    pub lambda02: T,
    pub lambda12: T,
    pub rho0: T,
    pub rho1: T,
    pub lambda01: T,
    pub lambda11: T,
}

pub fn derive_gains<T: Scalar>(p: &ChiParams<T>, lambda01: T, lambda11: T) -> Result<GainSet<T>> {
    validate_chi(p).into_result()?;
    let mut bad = Vec::new();
    if !(lambda01 > T::zero()) {
        bad.push("lambda01_positive".to_string());
    }
    if !(lambda11 > T::zero()) {
        bad.push("lambda11_positive".to_string());
    }
    if !bad.is_empty() {
        return Err(Error::ConstraintViolation { failed: bad });
    }

    let mu0 = p.chi1;
    let eta1 = p.chi2;
    let eta0 = p.chi3 / (T::one() - p.k2 * p.chi1);
    Ok(GainSet {
        mu0,
        eta0,
        eta1,
        kappa: eta0 / eta1,
        k1: p.k2 * mu0,
        k2: p.k2,
        lambda02: eta1 * mu0,
        lambda12: eta1 + mu0,
        rho0: eta0 / eta1,
        rho1: eta0 / (eta1 * mu0),
        lambda01,
        lambda11,
    })
}

/// `(s + χ₁)(s² + χ₂s + zχ₃)`.
pub fn assemble_pa<T: Scalar + Coefficient>(p: &ChiParams<T>) -> Result<QuasiPoly<T>> {
    validate_chi(p).into_result()?;
    Ok(pa_unchecked(p))
}

pub(crate) fn pa_unchecked<T: Scalar + Coefficient>(p: &ChiParams<T>) -> QuasiPoly<T> {
    let first = QuasiPoly::from_s_coeffs(&[p.chi1, T::one()]);
    let second = QuasiPoly::from_terms([((2, 0), T::one()), ((1, 0), p.chi2), ((0, 1), p.chi3)]);
    &first * &second
}

/// Delay bound of the characteristic quasi-polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayBound<T> {
    /// Pseudo-delay of the all-pass substitution at the crossing, in s.
    pub t_c: T,
    /// Stability is guaranteed for every constant delay in `[0, tau_max)`, in s.
    pub tau_max: T,
}

pub fn compute_tau_max<T: Scalar>(p: &ChiParams<T>) -> Result<DelayBound<T>> {
    validate_chi(p).into_result()?;
    let (c2, c3) = (p.chi2, p.chi3);
    let half = T::lit(0.5);
    let t_c = -c2.recip()
        + half * c2 / c3
        + half * (T::lit(4.0) / (c2 * c2) + (c2 * c2) / (c3 * c3)).sqrt();
    let omega = (c3 / (T::one() + t_c * c2)).sqrt();
    let tau_max = T::lit(2.0) * (t_c * omega).atan() / omega;
    Ok(DelayBound { t_c, tau_max })
}

/// Model transfer function `H_m(s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec<T> {
    /// `1 / ∏ (T_i s + 1)`, time constants in s.
    TimeConstants(Vec<T>),
    /// Explicit delay-free rational model.
    Transfer(RationalTf<T>),
}

impl<T: Scalar + Coefficient> ModelSpec<T> {
    pub fn to_tf(&self) -> Result<RationalTf<T>> {
        match self {
            ModelSpec::TimeConstants(tcs) => {
                if tcs.is_empty() {
                    return Err(Error::InvalidModel("no time constants".into()));
                }
                if let Some(bad) = tcs.iter().find(|t| !(**t > T::zero())) {
                    return Err(Error::InvalidModel(format!(
                        "time constant {bad} is not positive"
                    )));
                }
                let den = tcs.iter().fold(QuasiPoly::one(), |acc, &t| {
                    &acc * &QuasiPoly::from_s_coeffs(&[T::one(), t])
                });
                RationalTf::new(QuasiPoly::one(), den)
            }
            ModelSpec::Transfer(tf) => {
                if tf.num().z_degree() > 0 || tf.den().z_degree() > 0 {
                    return Err(Error::InvalidModel(
                        "model must not depend on the delay operator".into(),
                    ));
                }
                Ok(tf.clone())
            }
        }
    }

    /// Largest real part over the model poles.
    pub fn pole_abscissa(&self) -> Result<T> {
        let tf = self.to_tf()?;
        let den = tf.den().s_coeffs().expect("delay-free model");
        Ok(poly::spectral_abscissa(&den))
    }

    /// `H_m(0)`.
    pub fn dc_gain(&self) -> Result<T> {
        let tf = self.to_tf()?;
        Ok(tf.num().coeff(0, 0) / tf.den().coeff(0, 0))
    }

    /// Smallest time constant, or the fastest pole's inverse magnitude for
    /// explicit models.
    pub fn fastest_time_constant(&self) -> Result<T> {
        match self {
            ModelSpec::TimeConstants(tcs) => {
                self.to_tf()?;
                Ok(tcs.iter().copied().fold(T::infinity(), T::min))
            }
            ModelSpec::Transfer(tf) => {
                let den = tf.den().s_coeffs().ok_or_else(|| {
                    Error::InvalidModel("model must not depend on the delay operator".into())
                })?;
                let fastest = poly::roots(&den)
                    .into_iter()
                    .map(|r| r.norm())
                    .fold(T::zero(), T::max);
                Ok(if fastest > T::zero() {
                    fastest.recip()
                } else {
                    T::infinity()
                })
            }
        }
    }

    /// Slowest time constant (used for horizon sanity checks).
    pub fn slowest_time_constant(&self) -> Result<T> {
        match self {
            ModelSpec::TimeConstants(tcs) => {
                self.to_tf()?;
                Ok(tcs.iter().copied().fold(T::zero(), T::max))
            }
            ModelSpec::Transfer(tf) => {
                let den = tf.den().s_coeffs().ok_or_else(|| {
                    Error::InvalidModel("model must not depend on the delay operator".into())
                })?;
                let slowest = poly::roots(&den)
                    .into_iter()
                    .map(|r| r.norm())
                    .fold(T::infinity(), T::min);
                Ok(if slowest > T::zero() {
                    slowest.recip()
                } else {
                    T::infinity()
                })
            }
        }
    }

    /// Checks properness and stability, returning the transfer function.
    pub fn checked_tf(&self) -> Result<RationalTf<T>> {
        let tf = self.to_tf()?;
        let prop = tf.properness();
        if !prop.precompensator_ok {
            return Err(Error::NotProper {
                n_n: prop.n_n,
                n_d: prop.n_d,
            });
        }
        let den = tf.den().s_coeffs().expect("delay-free model");
        let abscissa = poly::spectral_abscissa(&den);
        if !(abscissa < -T::lit(MODEL_STABILITY_MARGIN)) {
            return Err(Error::UnstableModel {
                max_real_part: abscissa.as_f64(),
            });
        }
        Ok(tf)
    }
}

/// `G(s,z) = (1 − k₂χ₁)/(χ₁χ₃) · p_a(s,z) · H_m(s)`.
pub fn build_precompensator<T: Scalar + Coefficient>(
    p: &ChiParams<T>,
    model: &ModelSpec<T>,
) -> Result<RationalTf<T>> {
    validate_chi(p).into_result()?;
    let hm = model.checked_tf()?;
    let pa = pa_unchecked(p);
    let num = (&pa * hm.num()).scale(&p.precompensator_scale());
    RationalTf::new(num, hm.den().clone())
}

/// `H_{y,2} = 1 / ((s + μ₀)(s² + η₁s + η₀z))`, cross-checked against the
/// closed-loop form `s³ + λ₁₂s² + λ₀₂s + λ₀₂ρ₁zs + λ₀₂ρ₀z`.
pub fn build_inner_tf<T: Scalar + Coefficient>(g: &GainSet<T>) -> Result<RationalTf<T>> {
    let factored = &QuasiPoly::from_s_coeffs(&[g.mu0, T::one()])
        * &QuasiPoly::from_terms([((2, 0), T::one()), ((1, 0), g.eta1), ((0, 1), g.eta0)]);
    let closed_loop = QuasiPoly::from_terms([
        ((3, 0), T::one()),
        ((2, 0), g.lambda12),
        ((1, 0), g.lambda02),
        ((1, 1), g.lambda02 * g.rho1),
        ((0, 1), g.lambda02 * g.rho0),
    ]);
    let keys = [(3, 0), (2, 0), (1, 0), (1, 1), (0, 1)];
    for (i, j) in keys {
        let (a, b) = (factored.coeff(i, j), closed_loop.coeff(i, j));
        if ulps(a, b) > INNER_TF_MAX_ULPS {
            return Err(Error::GainInconsistency {
                term: format!("s^{i}z^{j}"),
                factored: a.as_f64(),
                closed_loop: b.as_f64(),
            });
        }
    }
    if factored.len() != keys.len() || closed_loop.len() != keys.len() {
        return Err(Error::GainInconsistency {
            term: "term set".into(),
            factored: factored.len() as f64,
            closed_loop: closed_loop.len() as f64,
        });
    }
    RationalTf::new(QuasiPoly::one(), factored)
}

/// Closed-loop response from the orientation command to the orientation
/// angle, assembled from the loop itself rather than from `p_a`:
///
/// `H_c = κλ₀₂H_{y,2}G / (1 − κλ₀₂H_{y,2}·z(k₁ + k₂s))`
pub fn closed_loop_response<T: Scalar + Coefficient>(
    g: &GainSet<T>,
    inner: &RationalTf<T>,
    precomp: &RationalTf<T>,
    s: Complex<T>,
    tau: T,
) -> Complex<T> {
    let z = (-s * tau).exp();
    let forward = inner.eval(s, tau) * (g.kappa * g.lambda02);
    let feedback = z * (s * g.k2 + g.k1);
    let one = Complex::new(T::one(), T::zero());
    forward * precomp.eval(s, tau) / (one - forward * feedback)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ChiParams<f64> {
        ChiParams::new(1.42662, 217.2061, 676.2171, 0.1)
    }

    #[test]
    fn reference_parameters_pass() {
        let r = validate_chi(&reference());
        assert!(r.all_passed(), "{:?}", r.failures());
        let q = r.get("chi3_below_quarter_chi2_squared").unwrap().margin;
        assert!((q - (217.2061f64.powi(2) / 4.0 - 676.2171)).abs() < 1e-9);
        assert!(q > 11_000.0);
    }

    #[test]
    fn boundary_quarter_fails() {
        let mut p = reference();
        p.chi3 = p.chi2 * p.chi2 / 4.0;
        let r = validate_chi(&p);
        assert_eq!(r.failures(), vec!["chi3_below_quarter_chi2_squared"]);
    }

    #[test]
    fn root_exclusion() {
        let mut p = reference();
        p.chi1 = (p.chi2 + (p.chi2 * p.chi2 - 4.0 * p.chi3).sqrt()) / 2.0;
        assert_eq!(validate_chi(&p).failures(), vec!["chi1_not_upper_root"]);
        let mut p = reference();
        p.chi1 = (p.chi2 - (p.chi2 * p.chi2 - 4.0 * p.chi3).sqrt()) / 2.0;
        assert_eq!(validate_chi(&p).failures(), vec!["chi1_not_lower_root"]);
    }

    #[test]
    fn unit_product_and_signs() {
        let mut p = reference();
        p.k2 = 1.0 / p.chi1;
        assert!(validate_chi(&p).failures().contains(&"k2_chi1_not_one"));
        let p = ChiParams::new(-1.0, 2.0, 0.5, 0.0);
        assert_eq!(validate_chi(&p).failures(), vec!["chi1_positive"]);
        assert!(derive_gains(&p, 100.0, 20.0).is_err());
        assert!(compute_tau_max(&p).is_err());
        assert!(assemble_pa(&p).is_err());
    }

    #[test]
    fn gains_at_zero_k2() {
        let mut p = reference();
        p.k2 = 0.0;
        let g = derive_gains(&p, 100.0, 20.0).unwrap();
        assert_eq!(g.k1, 0.0);
        assert_eq!(g.eta0, p.chi3);
    }

    #[test]
    fn lambda_channel_must_be_positive() {
        assert!(matches!(
            derive_gains(&reference(), 0.0, 20.0),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn model_checks() {
        let not_proper = ModelSpec::TimeConstants(vec![1.0, 1.0]);
        assert_eq!(
            build_precompensator(&reference(), &not_proper),
            Err(Error::NotProper { n_n: 0, n_d: 2 })
        );
        let unstable = ModelSpec::Transfer(
            RationalTf::new(
                QuasiPoly::one(),
                QuasiPoly::from_s_coeffs(&[-1.0, 1.0, 1.0, 1.0]),
            )
            .unwrap(),
        );
        assert!(matches!(
            build_precompensator(&reference(), &unstable),
            Err(Error::UnstableModel { .. })
        ));
        let marginal = ModelSpec::Transfer(
            RationalTf::new(
                QuasiPoly::one(),
                QuasiPoly::from_s_coeffs(&[0.0, 1.0, 2.0, 1.0]),
            )
            .unwrap(),
        );
        assert!(matches!(
            build_precompensator(&reference(), &marginal),
            Err(Error::UnstableModel { .. })
        ));
        assert!(ModelSpec::TimeConstants(vec![0.1, -0.2, 0.3])
            .to_tf()
            .is_err());
        let delayed = ModelSpec::Transfer(
            RationalTf::new(
                QuasiPoly::z(),
                QuasiPoly::from_s_coeffs(&[1.0, 1.0, 1.0, 1.0]),
            )
            .unwrap(),
        );
        assert!(matches!(delayed.to_tf(), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn precompensator_structure() {
        let model = ModelSpec::TimeConstants(vec![0.04, 0.05, 0.06]);
        let g = build_precompensator(&reference(), &model).unwrap();
        assert_eq!(g.n_n(), 3);
        assert_eq!(g.n_d(), 3);
        assert_eq!(g.num().z_degree(), 1);
        // G(0, 1) = 1 − k₂χ₁
        let dc = g.num().eval_at(&0.0, &1.0) / g.den().eval_at(&0.0, &1.0);
        assert!((dc - 0.857338).abs() < 1e-12);
    }

    #[test]
    fn time_constant_extremes() {
        let m = ModelSpec::TimeConstants(vec![0.04f64, 0.05, 0.06]);
        assert_eq!(m.fastest_time_constant().unwrap(), 0.04);
        assert_eq!(m.slowest_time_constant().unwrap(), 0.06);
        assert_eq!(m.dc_gain().unwrap(), 1.0);
        let tf = ModelSpec::Transfer(m.to_tf().unwrap());
        assert!((tf.fastest_time_constant().unwrap() - 0.04).abs() < 1e-9);
        assert!((tf.slowest_time_constant().unwrap() - 0.06).abs() < 1e-9);
    }

    #[test]
    fn single_precision_pipeline() {
        let p = ChiParams::<f32>::new(1.42662, 217.2061, 676.2171, 0.1);
        let bound = compute_tau_max(&p).unwrap();
        assert!((bound.tau_max - 0.5).abs() < 1e-4);
        let g = derive_gains(&p, 100.0, 20.0).unwrap();
        build_inner_tf(&g).unwrap();
    }
}
