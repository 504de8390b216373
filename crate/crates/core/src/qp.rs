//! Quasi-polynomials in `(s, z)` and rational transfer functions built from them.
//!
//! `z` stands for the delay operator `e^{-sτ}`. Coefficients live in a sparse
//! map keyed by `(s-power, z-power)` and are kept in canonical form: no
//! structural zeros are ever stored, so two polynomials are equal exactly when
//! their maps are.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Scalar};

#[derive(Clone, PartialEq)]
pub struct QuasiPoly<T> {
    coeffs: BTreeMap<(u32, u32), T>,
}

impl<T: Coefficient> QuasiPoly<T> {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c · s^s_pow · z^z_pow`
    pub fn monomial(s_pow: u32, z_pow: u32, c: T) -> Self {
        Self::from_terms([((s_pow, z_pow), c)])
    }

    /// The indeterminate `s`.
    pub fn s() -> Self {
        Self::monomial(1, 0, T::one())
    }

    /// The delay operator `z = e^{-sτ}`.
    pub fn z() -> Self {
        Self::monomial(0, 1, T::one())
    }

    /// Builds a polynomial from `((s_pow, z_pow), coefficient)` pairs.
    /// Repeated keys are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), T)>,
    {
        let mut coeffs: BTreeMap<(u32, u32), T> = BTreeMap::new();
        for (key, c) in terms {
            let entry = coeffs.entry(key).or_insert_with(T::zero);
            *entry = entry.clone() + c;
        }
        let mut p = Self { coeffs };
        p.canonicalize();
        p
    }

    /// Delay-free polynomial from coefficients in ascending powers of `s`.
    pub fn from_s_coeffs(ascending: &[T]) -> Self {
        Self::from_terms(
            ascending
                .iter()
                .enumerate()
                .map(|(i, c)| ((i as u32, 0), c.clone())),
        )
    }

    fn canonicalize(&mut self) {
        self.coeffs.retain(|_, c| !c.is_negligible());
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `s^s_pow z^z_pow` (zero when absent).
    pub fn coeff(&self, s_pow: u32, z_pow: u32) -> T {
        self.coeffs
            .get(&(s_pow, z_pow))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    /// Non-zero terms in ascending `(s_pow, z_pow)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &T)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of `s`; zero for the zero polynomial.
    pub fn s_degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|&(i, _)| i as usize)
            .max()
            .unwrap_or(0)
    }

    /// Highest power of `z`; zero for the zero polynomial.
    pub fn z_degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|&(_, j)| j as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::from_terms(self.terms().map(|(key, c)| (key, c.clone() * k.clone())))
    }

    /// Replaces `z` by a fixed value, leaving a polynomial in `s` alone.
    pub fn substitute_z(&self, z: &T) -> Self {
        Self::from_terms(self.terms().map(|((i, j), c)| {
            let mut zj = T::one();
            for _ in 0..j {
                zj = zj * z.clone();
            }
            ((i, 0), c.clone() * zj)
        }))
    }

    /// Ascending `s` coefficients of a delay-free polynomial, or `None` when
    /// any term carries `z`.
    pub fn s_coeffs(&self) -> Option<Vec<T>> {
        if self.z_degree() > 0 {
            return None;
        }
        let n = self.s_degree();
        Some((0..=n as u32).map(|i| self.coeff(i, 0)).collect())
    }

    /// Evaluates at given values of both indeterminates in the coefficient
    /// ring itself (exact for rationals).
    pub fn eval_at(&self, s: &T, z: &T) -> T {
        let mut acc = T::zero();
        for ((i, j), c) in self.terms() {
            let mut term = c.clone();
            for _ in 0..i {
                term = term * s.clone();
            }
            for _ in 0..j {
                term = term * z.clone();
            }
            acc = acc + term;
        }
        acc
    }
}

impl<T: Coefficient + Scalar> QuasiPoly<T> {
    /// `Σ c_ij s^i e^{-sτ j}` at complex frequency `s` and delay `τ ≥ 0`.
    pub fn eval(&self, s: Complex<T>, tau: T) -> Complex<T> {
        let z = (-s * tau).exp();
        self.eval_complex(s, z)
    }

    /// Evaluates with an explicit complex value for `z`.
    pub fn eval_complex(&self, s: Complex<T>, z: Complex<T>) -> Complex<T> {
        let sd = self.s_degree();
        let zd = self.z_degree();
        // Horner in s for each z power, then Horner in z
        let mut total = Complex::new(T::zero(), T::zero());
        for j in (0..=zd as u32).rev() {
            let mut inner = Complex::new(T::zero(), T::zero());
            for i in (0..=sd as u32).rev() {
                inner = inner * s + Complex::new(self.coeff(i, j), T::zero());
            }
            total = total * z + inner;
        }
        total
    }
}

impl<T: Coefficient> Default for QuasiPoly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Coefficient> Add for &QuasiPoly<T> {
    type Output = QuasiPoly<T>;
    fn add(self, rhs: Self) -> QuasiPoly<T> {
        QuasiPoly::from_terms(self.terms().chain(rhs.terms()).map(|(k, c)| (k, c.clone())))
    }
}

impl<T: Coefficient> Sub for &QuasiPoly<T> {
    type Output = QuasiPoly<T>;
    fn sub(self, rhs: Self) -> QuasiPoly<T> {
        self + &(-rhs)
    }
}

impl<T: Coefficient> Neg for &QuasiPoly<T> {
    type Output = QuasiPoly<T>;
    fn neg(self) -> QuasiPoly<T> {
        QuasiPoly::from_terms(self.terms().map(|(k, c)| (k, -c.clone())))
    }
}

impl<T: Coefficient> Mul for &QuasiPoly<T> {
    type Output = QuasiPoly<T>;
    /// Two-dimensional convolution of the coefficient maps.
    fn mul(self, rhs: Self) -> QuasiPoly<T> {
        let mut out: BTreeMap<(u32, u32), T> = BTreeMap::new();
        for ((ia, ja), ca) in self.terms() {
            for ((ib, jb), cb) in rhs.terms() {
                let entry = out.entry((ia + ib, ja + jb)).or_insert_with(T::zero);
                *entry = entry.clone() + ca.clone() * cb.clone();
            }
        }
        let mut p = QuasiPoly { coeffs: out };
        p.canonicalize();
        p
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Coefficient> $tr for QuasiPoly<T> {
            type Output = QuasiPoly<T>;
            fn $m(self, rhs: Self) -> QuasiPoly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Coefficient> Neg for QuasiPoly<T> {
    type Output = QuasiPoly<T>;
    fn neg(self) -> QuasiPoly<T> {
        -&self
    }
}

impl<T: Coefficient + fmt::Display> fmt::Display for QuasiPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j), c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            match i {
                0 => {}
                1 => write!(f, "·s")?,
                _ => write!(f, "·s^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "·z")?,
                _ => write!(f, "·z^{j}")?,
            }
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for QuasiPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(
                self.coeffs
                    .iter()
                    .map(|((i, j), c)| (format!("s^{i}z^{j}"), c)),
            )
            .finish()
    }
}

/// Degree bookkeeping for a transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Properness {
    pub n_n: usize,
    pub n_d: usize,
    /// `n_d ≥ n_n + 3`: multiplying by the cubic characteristic
    /// quasi-polynomial still leaves a proper precompensator.
    pub precompensator_ok: bool,
}

/// Ratio of two quasi-polynomials. No pole-zero cancellation is ever performed.
#[derive(Clone, PartialEq, Debug)]
pub struct RationalTf<T> {
    num: QuasiPoly<T>,
    den: QuasiPoly<T>,
}

impl<T: Coefficient> RationalTf<T> {
    pub fn new(num: QuasiPoly<T>, den: QuasiPoly<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidModel("zero denominator".into()));
        }
        Ok(Self { num, den })
    }

    pub fn from_poly(num: QuasiPoly<T>) -> Self {
        Self {
            num,
            den: QuasiPoly::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(QuasiPoly::one())
    }

    pub fn num(&self) -> &QuasiPoly<T> {
        &self.num
    }

    pub fn den(&self) -> &QuasiPoly<T> {
        &self.den
    }

    pub fn n_n(&self) -> usize {
        self.num.s_degree()
    }

    pub fn n_d(&self) -> usize {
        self.den.s_degree()
    }

    pub fn properness(&self) -> Properness {
        let (n_n, n_d) = (self.n_n(), self.n_d());
        Properness {
            n_n,
            n_d,
            precompensator_ok: n_d >= n_n + 3,
        }
    }

    pub fn scale(&self, k: &T) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    /// Value at a point of the coefficient field; `None` where the
    /// denominator vanishes.
    pub fn eval_at(&self, s: &T, z: &T) -> Option<T> {
        let d = self.den.eval_at(s, z);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval_at(s, z) / d)
        }
    }
}

impl<T: Coefficient + Scalar> RationalTf<T> {
    pub fn eval(&self, s: Complex<T>, tau: T) -> Complex<T> {
        let z = (-s * tau).exp();
        self.num.eval_complex(s, z) / self.den.eval_complex(s, z)
    }
}

impl<T: Coefficient> Mul for &RationalTf<T> {
    type Output = RationalTf<T>;
    fn mul(self, rhs: Self) -> RationalTf<T> {
        RationalTf {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
    }
}

impl<T: Coefficient> Mul for RationalTf<T> {
    type Output = RationalTf<T>;
    fn mul(self, rhs: Self) -> RationalTf<T> {
        &self * &rhs
    }
}
