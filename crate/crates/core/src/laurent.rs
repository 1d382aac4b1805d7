//! Laurent polynomials with exact rational coefficients, discrete B-splines
//! and Bezout duals.
//!
//! Everything stays in `BigRational` until [`LaurentPoly::eval_torus`] or
//! [`LaurentPoly::eval`] converts to floating point. Torus evaluation uses
//! `z = e^{-2πiw}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hilbert::C64;

/// `Σ_k coeffs[k] z^{min_deg + k}`, trimmed so that the first and last
/// stored coefficients are nonzero. The zero polynomial has no coefficients
/// and `min_deg = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    min_deg: i64,
    coeffs: Vec<BigRational>,
}

impl LaurentPoly {
    pub fn new(min_deg: i64, coeffs: Vec<BigRational>) -> Self {
        let Some(first) = coeffs.iter().position(|c| !c.is_zero()) else {
            return Self::zero();
        };
        let last = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(first);
        Self {
            min_deg: min_deg + first as i64,
            coeffs: coeffs[first..=last].to_vec(),
        }
    }

    pub fn from_integers(min_deg: i64, coeffs: &[i64]) -> Self {
        Self::new(
            min_deg,
            coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
        )
    }

    pub fn zero() -> Self {
        Self {
            min_deg: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(0, vec![c])
    }

    /// `c z^k`.
    pub fn monomial(c: BigRational, k: i64) -> Self {
        Self::new(k, vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_deg(&self) -> i64 {
        self.min_deg
    }

    pub fn max_deg(&self) -> i64 {
        self.min_deg + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `z^k`.
    pub fn coeff(&self, k: i64) -> BigRational {
        let idx = k - self.min_deg;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            BigRational::zero()
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            min_deg: self.min_deg + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// `P(z^{-1})`.
    pub fn reflect(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self {
            min_deg: -self.max_deg(),
            coeffs,
        }
    }

    /// `(power, value)` pairs in floating point.
    pub fn to_f64_terms(&self) -> Vec<(i64, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (self.min_deg + i as i64, to_f64(c)))
            .collect()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.to_f64_terms()
            .into_iter()
            .map(|(k, c)| z.powi(k as i32) * c)
            .sum()
    }

    /// `P(e^{-2πiw})`.
    pub fn eval_torus(&self, w: f64) -> C64 {
        self.to_f64_terms()
            .into_iter()
            .map(|(k, c)| {
                let phase = (k as f64 * w).rem_euclid(1.0);
                C64::from_polar(c, -2.0 * std::f64::consts::PI * phase)
            })
            .sum()
    }

    /// Real coefficients with `c_{-n} = c_n`, so the torus values are real.
    pub fn is_hermitian_symmetric(&self) -> bool {
        *self == self.reflect()
    }
}

pub fn to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.min_deg + i as i64;
            let magnitude = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            let power = match k {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{k}"),
            };
            if k == 0 {
                write!(f, "{}", fmt_rational(&magnitude))?;
            } else if magnitude.is_one() {
                write!(f, "{power}")?;
            } else {
                write!(f, "{} {power}", fmt_rational(&magnitude))?;
            }
        }
        Ok(())
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;

    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.min_deg.min(rhs.min_deg);
        let hi = self.max_deg().max(rhs.max_deg());
        let coeffs = (lo..=hi).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        LaurentPoly::new(lo, coeffs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            min_deg: self.min_deg,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;

    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly::new(self.min_deg + rhs.min_deg, poly_mul(&self.coeffs, &rhs.coeffs))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;

            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

// Ordinary polynomials, ascending coefficients, trimmed of trailing zeros.

type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Poly {
    let n = a.len().max(b.len());
    let zero = BigRational::zero();
    trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero))
            .collect(),
    )
}

/// `(q, r)` with `a = q b + r`, `deg r < deg b`.
fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Poly, Poly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let lead = b.last().expect("nonempty").clone();
    let mut quot = vec![BigRational::zero(); rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let factor = rem.last().expect("nonempty") / &lead;
        for (i, c) in b.iter().enumerate() {
            rem[shift + i] -= &factor * c;
        }
        quot[shift] = factor;
        rem.pop();
        rem = trim(rem);
    }
    (trim(quot), rem)
}

/// `(g, u, v)` with `u a + v b = g`, `g = gcd(a, b)` made monic.
fn extended_euclid(a: &[BigRational], b: &[BigRational]) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut u0, mut u1): (Poly, Poly) = (vec![BigRational::one()], Vec::new());
    let (mut v0, mut v1): (Poly, Poly) = (Vec::new(), vec![BigRational::one()]);
    while !r1.is_empty() {
        let (q, r) = poly_divmod(&r0, &r1);
        let u = poly_sub(&u0, &poly_mul(&q, &u1));
        let v = poly_sub(&v0, &poly_mul(&q, &v1));
        r0 = std::mem::replace(&mut r1, r);
        u0 = std::mem::replace(&mut u1, u);
        v0 = std::mem::replace(&mut v1, v);
    }
    let lead = r0.last().cloned().unwrap_or_else(BigRational::one);
    let scale = |p: Poly| -> Poly { p.into_iter().map(|c| c / &lead).collect() };
    (scale(r0), scale(u0), scale(v0))
}

/// `H₁, H₂` with `G₁H₁ + G₂H₂ = 1` exactly.
///
/// Euclid runs on `p_i = z^{-m_i} G_i`. Among all solutions the one with
/// `deg(z^{-m₂} H₂) < deg p₁` is returned, so `G₁ = 1` gives `(1, 0)`.
pub fn bezout(g1: &LaurentPoly, g2: &LaurentPoly) -> Result<(LaurentPoly, LaurentPoly)> {
    if g1.is_zero() || g2.is_zero() {
        return Err(Error::NotCoprime {
            factor: if g1.is_zero() { g2.to_string() } else { g1.to_string() },
        });
    }
    let (p1, p2) = (g1.coeffs.clone(), g2.coeffs.clone());
    let (g, _, v) = extended_euclid(&p1, &p2);
    if g.len() > 1 {
        return Err(Error::NotCoprime {
            factor: LaurentPoly::new(0, g).to_string(),
        });
    }
    let (_, v) = poly_divmod(&v, &p1);
    let (u, rest) = poly_divmod(&poly_sub(&[BigRational::one()], &poly_mul(&v, &p2)), &p1);
    debug_assert!(rest.is_empty());
    Ok((LaurentPoly::new(-g1.min_deg, u), LaurentPoly::new(-g2.min_deg, v)))
}

/// `G₁H₁ + G₂H₂ - 1`.
pub fn bezout_residual(g1: &LaurentPoly, g2: &LaurentPoly, h1: &LaurentPoly, h2: &LaurentPoly) -> LaurentPoly {
    &(&(g1 * h1) + &(g2 * h2)) - &LaurentPoly::one()
}

/// Central discrete B-spline `M_p` for odd node spacing `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteBSpline {
    k: usize,
    p: usize,
    values: Vec<BigInt>,
}

impl DiscreteBSpline {
    pub fn node_spacing(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.p
    }

    /// `p (K - 1) / 2`.
    pub fn half_support(&self) -> i64 {
        (self.p * (self.k - 1) / 2) as i64
    }

    /// Values on `-half_support..=half_support`.
    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn value(&self, n: i64) -> BigInt {
        let h = self.half_support();
        if n.abs() > h {
            BigInt::zero()
        } else {
            self.values[(n + h) as usize].clone()
        }
    }

    /// `Σ_n M_p(n) z^n`.
    pub fn as_laurent(&self) -> LaurentPoly {
        LaurentPoly::new(
            -self.half_support(),
            self.values.iter().map(|v| BigRational::from_integer(v.clone())).collect(),
        )
    }
}

/// `M_1 = 1` on `|n| ≤ (K-1)/2` and `M_p = M_1 ∗ … ∗ M_1`.
pub fn bspline(k: usize, p: usize) -> Result<DiscreteBSpline> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("node spacing K = {k} must be odd and at least 3")));
    }
    if p == 0 {
        return Err(Error::InvalidParameter("spline order must be positive".into()));
    }
    let box_filter = vec![BigInt::one(); k];
    let mut values = box_filter.clone();
    for _ in 1..p {
        let mut next = vec![BigInt::zero(); values.len() + k - 1];
        for (i, v) in values.iter().enumerate() {
            for (j, b) in box_filter.iter().enumerate() {
                next[i + j] += v * b;
            }
        }
        values = next;
    }
    Ok(DiscreteBSpline { k, p, values })
}

/// `G_i(z) = Σ_n M_p(nK + i) z^n`.
pub fn polyphase_sample(m: &DiscreteBSpline, i: usize) -> Result<LaurentPoly> {
    let k = m.k as i64;
    if i >= m.k {
        return Err(Error::InvalidParameter(format!("phase {i} must be below K = {k}")));
    }
    let h = m.half_support();
    let lo = (-h - i as i64).div_euclid(k);
    let hi = (h - i as i64).div_euclid(k);
    let coeffs = (lo..=hi)
        .map(|n| BigRational::from_integer(m.value(n * k + i as i64)))
        .collect();
    Ok(LaurentPoly::new(lo, coeffs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCertificate {
    pub min_value: f64,
    pub argmin: f64,
    pub strictly_positive: bool,
}

/// Minimum of `P(e^{-2πiw})` over `w = q / grid`.
pub fn positivity_certificate(p: &LaurentPoly, grid: usize) -> Result<PositivityCertificate> {
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    if !p.is_hermitian_symmetric() {
        return Err(Error::InvalidParameter(format!("{p} is not Hermitian symmetric")));
    }
    let (argmin, min_value) = (0..grid)
        .map(|q| {
            let w = q as f64 / grid as f64;
            (w, p.eval_torus(w).re)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    Ok(PositivityCertificate {
        min_value,
        argmin,
        strictly_positive: min_value > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn g1() -> LaurentPoly {
        LaurentPoly::from_integers(-1, &[4, 19, 4])
    }

    fn g2() -> LaurentPoly {
        LaurentPoly::from_integers(-1, &[10, 16, 1])
    }

    #[test]
    fn normalization() {
        let p = LaurentPoly::from_integers(-3, &[0, 0, 1, 2, 0]);
        assert_eq!(p.min_deg(), -1);
        assert_eq!(p.max_deg(), 0);
        assert_eq!(LaurentPoly::from_integers(5, &[0, 0]), LaurentPoly::zero());
        assert_eq!(LaurentPoly::zero().to_string(), "0");
    }

    #[test]
    fn bspline_values() {
        let ints = |m: &DiscreteBSpline| m.values().iter().map(|v| v.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(ints(&bspline(3, 1).unwrap()), vec![1, 1, 1]);
        assert_eq!(ints(&bspline(3, 2).unwrap()), vec![1, 2, 3, 2, 1]);
        let m4 = bspline(3, 4).unwrap();
        assert_eq!(ints(&m4), vec![1, 4, 10, 16, 19, 16, 10, 4, 1]);
        assert_eq!(m4.half_support(), 4);
        assert!(m4.value(5).is_zero() && m4.value(-5).is_zero());
        assert!(bspline(4, 2).is_err());
        assert!(bspline(1, 2).is_err());
        assert!(bspline(3, 0).is_err());
    }

    #[test]
    fn spline_polyphase() {
        let m4 = bspline(3, 4).unwrap();
        assert_eq!(polyphase_sample(&m4, 0).unwrap(), g1());
        assert_eq!(polyphase_sample(&m4, 1).unwrap(), g2());
        assert_eq!(polyphase_sample(&m4, 0).unwrap().to_string(), "4 z^-1 + 19 + 4 z");
        assert_eq!(polyphase_sample(&m4, 1).unwrap().to_string(), "10 z^-1 + 16 + z");
        assert_eq!(polyphase_sample(&bspline(3, 1).unwrap(), 0).unwrap(), LaurentPoly::one());
        assert!(polyphase_sample(&m4, 3).is_err());
    }

    #[test]
    fn spline_bezout() {
        let (h1, h2) = bezout(&g1(), &g2()).unwrap();
        assert_eq!(h1, LaurentPoly::new(1, vec![q(-38, 243), q(-5, 486)]));
        assert_eq!(h2, LaurentPoly::new(1, vec![q(79, 486), q(10, 243)]));
        assert_eq!(h1.to_string(), "-38/243 z - 5/486 z^2");
        assert_eq!(h2.to_string(), "79/486 z + 10/243 z^2");
        assert!(bezout_residual(&g1(), &g2(), &h1, &h2).is_zero());
    }

    #[test]
    fn trivial_bezout() {
        let g = LaurentPoly::from_integers(-2, &[3, 0, 7, 1]);
        let (h1, h2) = bezout(&LaurentPoly::one(), &g).unwrap();
        assert_eq!(h1, LaurentPoly::one());
        assert!(h2.is_zero());
    }

    #[test]
    fn common_factor_detected() {
        // (1 + z)(2 + z) and z^-1 (1 + z)(3 - z).
        let a = LaurentPoly::from_integers(0, &[2, 3, 1]);
        let b = LaurentPoly::from_integers(-1, &[3, 2, -1]);
        match bezout(&a, &b) {
            Err(Error::NotCoprime { factor }) => assert_eq!(factor, "1 + z"),
            other => panic!("expected NotCoprime, got {other:?}"),
        }
        assert!(bezout(&a, &LaurentPoly::zero()).is_err());
    }

    #[test]
    fn torus_evaluation() {
        assert_eq!(LaurentPoly::one().eval_torus(0.3), C64::new(1.0, 0.0));
        let z = LaurentPoly::from_integers(1, &[1]);
        assert!((z.eval_torus(0.25) - C64::new(0.0, -1.0)).norm() < 1e-15);
        for i in 0..50 {
            let w = i as f64 / 37.0;
            let expected = 19.0 + 8.0 * (2.0 * std::f64::consts::PI * w).cos();
            let v = g1().eval_torus(w);
            assert!((v.re - expected).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn positivity() {
        let cert = positivity_certificate(&g1(), 4096).unwrap();
        assert!((cert.min_value - 11.0).abs() < 1e-9);
        assert_eq!(cert.argmin, 0.5);
        assert!(cert.strictly_positive);
        let five = positivity_certificate(&LaurentPoly::from_integers(0, &[5]), 16).unwrap();
        assert_eq!(five.min_value, 5.0);
        let cos = positivity_certificate(&LaurentPoly::from_integers(-1, &[1, 0, 1]), 64).unwrap();
        assert!((cos.min_value + 2.0).abs() < 1e-12);
        assert_eq!(cos.argmin, 0.5);
        assert!(!cos.strictly_positive);
        assert!(positivity_certificate(&g2(), 64).is_err());
    }

    fn small_poly() -> impl Strategy<Value = LaurentPoly> {
        (-3i64..3, prop::collection::vec(-6i64..7, 0..5)).prop_map(|(m, c)| LaurentPoly::from_integers(m, &c))
    }

    proptest! {
        #[test]
        fn ring_laws(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
            prop_assert_eq!(&a * &LaurentPoly::one(), a.clone());
        }

        #[test]
        fn torus_homomorphism(a in small_poly(), b in small_poly(), w in 0.0f64..1.0) {
            let lhs = (&a * &b).eval_torus(w);
            let rhs = a.eval_torus(w) * b.eval_torus(w);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }

        #[test]
        fn bezout_exact(a in small_poly(), b in small_poly()) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            match bezout(&a, &b) {
                Ok((h1, h2)) => prop_assert!(bezout_residual(&a, &b, &h1, &h2).is_zero()),
                Err(Error::NotCoprime { .. }) => {
                    // A shared factor divides both exactly.
                    let (g, _, _) = extended_euclid(a.coeffs(), b.coeffs());
                    prop_assert!(g.len() > 1);
                    prop_assert!(poly_divmod(a.coeffs(), &g).1.is_empty());
                    prop_assert!(poly_divmod(b.coeffs(), &g).1.is_empty());
                }
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }

        #[test]
        fn bspline_symmetry(k in prop::sample::select(vec![3usize, 5, 7]), p in 1usize..6) {
            let m = bspline(k, p).unwrap();
            let h = m.half_support();
            for n in -h - 2..=h + 2 {
                prop_assert_eq!(m.value(n), m.value(-n));
                prop_assert_eq!(m.value(n).is_positive(), n.abs() <= h);
            }
            let total: BigInt = m.values().iter().sum();
            prop_assert_eq!(total, BigInt::from(k).pow(p as u32));
        }
    }
}
