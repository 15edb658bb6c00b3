//! Exact arithmetic in cyclotomic fields `Q(zeta_M)`.
//!
//! Every structure constant in this crate (the `q_ij`, cocycle values,
//! matrix entries) is a root of unity or a rational combination of them,
//! so all scalars live here. Elements are stored as the canonical residue
//! modulo the `M`-th cyclotomic polynomial: coefficient vectors of length
//! `phi(M)` over arbitrary-precision rationals. Two values are equal iff
//! their coefficient vectors agree after unifying conductors via the
//! standard embedding `zeta_M -> zeta_L^(L/M)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Int = BigInt;
pub type Rat = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("invalid conductor: conductor must be a positive integer")]
    InvalidConductor,
    #[error("division by zero")]
    DivisionByZero,
    #[error("not a root of unity")]
    NotARootOfUnity,
}

/// Euler totient by trial-division factorization. Conductors stay small
/// (products of the orders of finitely many roots of unity).
pub fn euler_phi(mut m: u64) -> u64 {
    assert!(m >= 1);
    let mut phi = 1u64;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut pk = 1u64;
            while m % p == 0 {
                m /= p;
                pk *= p;
            }
            phi *= pk - pk / p;
        }
        p += 1;
    }
    if m > 1 {
        phi *= m - 1;
    }
    phi
}

fn divisors(m: u64) -> Vec<u64> {
    let mut ds = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m % d == 0 {
            ds.push(d);
            if d != m / d {
                ds.push(m / d);
            }
        }
        d += 1;
    }
    ds.sort_unstable();
    ds
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Coefficients of the `m`-th cyclotomic polynomial, low degree first,
/// computed by dividing `x^m - 1` by all lower `Phi_d` and memoized.
fn cyclotomic_poly(m: u64) -> Arc<Vec<Int>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Int>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&m) {
        return p.clone();
    }
    let poly = if m == 1 {
        vec![Int::from(-1), Int::from(1)]
    } else {
        // x^m - 1
        let mut num = vec![Int::zero(); m as usize + 1];
        num[0] = Int::from(-1);
        num[m as usize] = Int::from(1);
        for d in divisors(m) {
            if d < m {
                num = int_poly_div_exact(&num, &cyclotomic_poly(d));
            }
        }
        num
    };
    let poly = Arc::new(poly);
    cache.lock().unwrap().insert(m, poly.clone());
    poly
}

/// Exact division of integer polynomials; divisor must be monic and divide.
fn int_poly_div_exact(num: &[Int], den: &[Int]) -> Vec<Int> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one());
    let mut rem: Vec<Int> = num.to_vec();
    let mut quot = vec![Int::zero(); dn - dd + 1];
    for i in (dd..=dn).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dd] = c.clone();
        for (j, d) in den.iter().enumerate() {
            rem[i - dd + j] -= &c * d;
        }
    }
    assert!(rem.iter().all(Zero::is_zero), "inexact polynomial division");
    quot
}

/// Remainder of a rational polynomial modulo a monic integer polynomial.
fn poly_rem(mut r: Vec<Rat>, modulus: &[Int]) -> Vec<Rat> {
    let dm = modulus.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let shift = r.len() - dm;
        for (j, c) in modulus.iter().take(dm).enumerate() {
            r[shift + j] -= &lead * Rat::from(c.clone());
        }
    }
    r.resize(dm, Rat::zero());
    r
}

/// An element of `Q(zeta_conductor)` in the canonical power basis
/// `1, zeta, ..., zeta^(phi-1)` of the residue ring modulo `Phi_M`.
#[derive(Debug, Clone)]
pub struct Cyclotomic {
    conductor: u64,
    coeffs: Vec<Rat>,
}

impl Cyclotomic {
    fn from_raw_powers(conductor: u64, raw: Vec<Rat>) -> Self {
        // Fold exponents mod M, then reduce modulo Phi_M.
        let m = conductor as usize;
        let mut folded = vec![Rat::zero(); m];
        for (e, c) in raw.into_iter().enumerate() {
            if !c.is_zero() {
                let idx = e % m;
                folded[idx] += c;
            }
        }
        let coeffs = poly_rem(folded, &cyclotomic_poly(conductor));
        Cyclotomic { conductor, coeffs }
    }

    pub fn zero() -> Self {
        Cyclotomic { conductor: 1, coeffs: vec![Rat::zero()] }
    }

    pub fn one() -> Self {
        Cyclotomic { conductor: 1, coeffs: vec![Rat::one()] }
    }

    pub fn from_rational(r: Rat) -> Self {
        Cyclotomic { conductor: 1, coeffs: vec![r] }
    }

    pub fn from_integer(k: i64) -> Self {
        Self::from_rational(Rat::from(Int::from(k)))
    }

    /// `zeta_M^k`, the primitive `M`-th root of unity raised to `k`.
    pub fn root_of_unity(conductor: u64, k: i64) -> Result<Self, ScalarError> {
        if conductor == 0 {
            return Err(ScalarError::InvalidConductor);
        }
        let e = k.rem_euclid(conductor as i64) as usize;
        let mut raw = vec![Rat::zero(); e + 1];
        raw[e] = Rat::one();
        Ok(Self::from_raw_powers(conductor, raw))
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The value as a rational, if it lies in `Q`.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-express in `Q(zeta_target)`; `target` must be a multiple of the
    /// current conductor. This is the ring embedding `zeta_M -> zeta_T^(T/M)`.
    pub fn promote(&self, target: u64) -> Self {
        if target == self.conductor {
            return self.clone();
        }
        assert!(
            target % self.conductor == 0,
            "conductor {} does not divide target {}",
            self.conductor,
            target
        );
        let step = (target / self.conductor) as usize;
        let mut raw = vec![Rat::zero(); target as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                raw[i * step] = c.clone();
            }
        }
        Self::from_raw_powers(target, raw)
    }

    fn unify(&self, other: &Self) -> (Self, Self, u64) {
        let l = lcm_u64(self.conductor, other.conductor);
        (self.promote(l), other.promote(l), l)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b, l) = self.unify(other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        Cyclotomic { conductor: l, coeffs: a.coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b, l) = self.unify(other);
        let mut raw = vec![Rat::zero(); a.coeffs.len() + b.coeffs.len()];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    raw[i + j] += x * y;
                }
            }
        }
        Self::from_raw_powers(l, raw)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in
    /// `Q[x]` against `Phi_M` (irreducible, so any nonzero residue is a unit).
    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let modulus: Vec<Rat> = cyclotomic_poly(self.conductor)
            .iter()
            .map(|c| Rat::from(c.clone()))
            .collect();
        // Invariants: r0 = s0 * self (mod Phi), r1 = s1 * self (mod Phi).
        let mut r0 = modulus;
        let mut r1 = self.coeffs.clone();
        trim(&mut r1);
        let mut s0 = vec![Rat::zero()];
        let mut s1 = vec![Rat::one()];
        while !r1.is_empty() {
            let (q, r) = rat_poly_divmod(&r0, &r1);
            let s = rat_poly_sub(&s0, &rat_poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 is a nonzero constant times gcd = constant.
        debug_assert_eq!(r0.len(), 1);
        let g = r0[0].clone();
        let coeffs: Vec<Rat> = s0.iter().map(|c| c / &g).collect();
        Ok(Self::from_raw_powers(
            self.conductor,
            coeffs,
        ))
    }

    pub fn pow(&self, k: i64) -> Result<Self, ScalarError> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut acc = Cyclotomic::one();
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Smallest `k >= 1` with `self^k = 1`. The roots of unity inside
    /// `Q(zeta_M)` form the group of order `lcm(2, M)`, so it suffices to
    /// scan the divisors of that bound.
    pub fn order(&self) -> Result<u64, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::NotARootOfUnity);
        }
        let bound = lcm_u64(2, self.conductor);
        for d in divisors(bound) {
            if self.pow(d as i64).unwrap().is_one() {
                return Ok(d);
            }
        }
        Err(ScalarError::NotARootOfUnity)
    }

    /// Writes the value as `zeta_m^u` with `m` its multiplicative order.
    pub fn as_root_power(&self) -> Result<(u64, u64), ScalarError> {
        let m = self.order()?;
        for u in 0..m {
            if u == 0 || m.gcd(&u) == 1 {
                if *self == Cyclotomic::root_of_unity(m, u as i64).unwrap() {
                    return Ok((m, u));
                }
            }
        }
        // Order m means the value is a primitive m-th root, so some
        // coprime exponent above must match.
        unreachable!("order computed but no primitive power matched")
    }

    /// A canonical `n`-th root of a root of unity: `zeta_(mn)^u` for
    /// `self = zeta_m^u`. Fails if the value is not a root of unity.
    pub fn nth_root(&self, n: u64) -> Result<Self, ScalarError> {
        if n == 0 {
            return Err(ScalarError::InvalidConductor);
        }
        let (m, u) = self.as_root_power()?;
        Cyclotomic::root_of_unity(m * n, u as i64)
    }
}

fn trim(p: &mut Vec<Rat>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn rat_poly_divmod(num: &[Rat], den: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut rem = num.to_vec();
    trim(&mut rem);
    let dd = den.len() - 1;
    let lead = &den[dd];
    if rem.len() <= dd {
        return (vec![], rem);
    }
    let mut quot = vec![Rat::zero(); rem.len() - dd];
    while rem.len() > dd {
        let c = rem.last().unwrap() / lead;
        let shift = rem.len() - 1 - dd;
        quot[shift] = c.clone();
        for (j, d) in den.iter().enumerate() {
            let v = &c * d;
            rem[shift + j] -= v;
        }
        trim(&mut rem);
    }
    (quot, rem)
}

fn rat_poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn rat_poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = a.to_vec();
    out.resize(out.len().max(b.len()), Rat::zero());
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (a, b, _) = self.unify(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclotomic {}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    write!(f, "z{}", self.conductor)?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
            first = false;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CycJson {
    conductor: u64,
    coeffs: Vec<(String, String)>,
}

impl Serialize for Cyclotomic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CycJson {
            conductor: self.conductor,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| (c.numer().to_string(), c.denom().to_string()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cyclotomic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = CycJson::deserialize(d)?;
        if raw.conductor == 0 {
            return Err(D::Error::custom("conductor must be positive"));
        }
        let phi = euler_phi(raw.conductor) as usize;
        if raw.coeffs.len() != phi {
            return Err(D::Error::custom(format!(
                "expected {} coefficients for conductor {}, got {}",
                phi,
                raw.conductor,
                raw.coeffs.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(phi);
        for (n, d) in raw.coeffs {
            let n: Int = n.parse().map_err(D::Error::custom)?;
            let d: Int = d.parse().map_err(D::Error::custom)?;
            if d.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            coeffs.push(Rat::new(n, d));
        }
        Ok(Cyclotomic { conductor: raw.conductor, coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zeta(m: u64, k: i64) -> Cyclotomic {
        Cyclotomic::root_of_unity(m, k).unwrap()
    }

    #[test]
    fn second_root_is_minus_one() {
        assert_eq!(zeta(2, 1), Cyclotomic::from_integer(-1));
    }

    #[test]
    fn full_rotation_is_one() {
        assert_eq!(zeta(6, 6), Cyclotomic::one());
    }

    #[test]
    fn quarter_roots_multiply_to_one() {
        // i * (-i) = 1
        assert_eq!(zeta(4, 1).mul(&zeta(4, 3)), Cyclotomic::one());
    }

    #[test]
    fn zeta3_sum_is_minus_one() {
        // 1 + z3 + z3^2 = 0
        assert_eq!(zeta(3, 1).add(&zeta(3, 2)), Cyclotomic::from_integer(-1));
    }

    #[test]
    fn one_is_multiplicative_identity() {
        let x = zeta(12, 5).add(&Cyclotomic::from_integer(3));
        assert_eq!(x.mul(&Cyclotomic::one()), x);
    }

    #[test]
    fn inverse_of_one_plus_i() {
        let x = Cyclotomic::one().add(&zeta(4, 1));
        let inv = x.inv().unwrap();
        // (1+i)^-1 = (1-i)/2
        let expect = Cyclotomic::one()
            .sub(&zeta(4, 1))
            .scale(&Rat::new(Int::from(1), Int::from(2)));
        assert_eq!(inv, expect);
        assert!(x.mul(&inv).is_one());
    }

    #[test]
    fn invert_zero_fails() {
        assert_eq!(Cyclotomic::zero().inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn zero_conductor_rejected() {
        assert_eq!(
            Cyclotomic::root_of_unity(0, 1),
            Err(ScalarError::InvalidConductor)
        );
    }

    #[test]
    fn orders() {
        assert_eq!(Cyclotomic::from_integer(-1).order(), Ok(2));
        assert_eq!(zeta(6, 2).order(), Ok(3));
        assert_eq!(
            Cyclotomic::from_integer(2).order(),
            Err(ScalarError::NotARootOfUnity)
        );
    }

    #[test]
    fn zeta6_squared_is_zeta3() {
        assert_eq!(zeta(6, 2), zeta(3, 1));
    }

    #[test]
    fn root_power_decomposition() {
        let x = zeta(12, 8); // = zeta_3^2
        assert_eq!(x.as_root_power().unwrap(), (3, 2));
        let r = x.nth_root(2).unwrap();
        assert_eq!(r.pow(2).unwrap(), x);
    }

    #[test]
    fn json_round_trip() {
        let x = zeta(8, 3).scale(&Rat::new(Int::from(-7), Int::from(3)));
        let s = serde_json::to_string(&x).unwrap();
        let y: Cyclotomic = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn json_rejects_bad_length() {
        let s = r#"{"conductor": 4, "coeffs": [["1","1"]]}"#;
        assert!(serde_json::from_str::<Cyclotomic>(s).is_err());
    }

    fn arb_cyc(m: u64) -> impl Strategy<Value = Cyclotomic> {
        let phi = euler_phi(m) as usize;
        proptest::collection::vec((-4i64..5, 1i64..4), phi).prop_map(move |cs| {
            let mut acc = Cyclotomic::zero();
            for (e, (n, d)) in cs.into_iter().enumerate() {
                let t = zeta(m, e as i64).scale(&Rat::new(Int::from(n), Int::from(d)));
                acc = acc.add(&t);
            }
            acc
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_axioms(a in arb_cyc(12), b in arb_cyc(12), c in arb_cyc(12)) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn inverse_round_trip(a in arb_cyc(12)) {
            prop_assume!(!a.is_zero());
            prop_assert!(a.mul(&a.inv().unwrap()).is_one());
        }

        #[test]
        fn promotion_is_ring_embedding(a in arb_cyc(6), b in arb_cyc(6)) {
            prop_assert_eq!(a.add(&b).promote(24), a.promote(24).add(&b.promote(24)));
            prop_assert_eq!(a.mul(&b).promote(24), a.promote(24).mul(&b.promote(24)));
        }

        #[test]
        fn order_formula(m in 1u64..30, k in 0i64..60) {
            let x = zeta(m, k);
            let g = m.gcd(&(k.rem_euclid(m as i64) as u64));
            prop_assert_eq!(x.order().unwrap(), m / g);
        }
    }
}
