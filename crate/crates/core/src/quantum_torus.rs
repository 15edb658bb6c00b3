//! Elements of the quantum torus `C_q` and its associative structure.
//!
//! An element is a finite sum of `coefficient * t^a` terms keyed by
//! multidegree. Products follow `t^a t^b = sigma(a,b) t^(a+b)`; the
//! center is spanned by the monomials with degree in `rad f` and the
//! commutator subspace by the rest, which gives the exact splitting
//! `C_q = [C_q, C_q] (+) Z(C_q)` termwise.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cyclotomic::Cyclotomic;
use crate::torus::{Degree, Torus, TorusError};

/// A finite sum of `coef * t^deg`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement {
    torus: Torus,
    terms: BTreeMap<Degree, Cyclotomic>,
}

impl TorusElement {
    pub fn zero(torus: &Torus) -> Self {
        TorusElement { torus: torus.clone(), terms: BTreeMap::new() }
    }

    pub fn one(torus: &Torus) -> Self {
        Self::monomial(torus, Cyclotomic::one(), Degree::zero(torus.rank()))
    }

    pub fn monomial(torus: &Torus, coef: Cyclotomic, deg: Degree) -> Self {
        assert_eq!(deg.len(), torus.rank(), "degree length mismatch");
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(deg, coef);
        }
        TorusElement { torus: torus.clone(), terms }
    }

    pub fn generator(torus: &Torus, j: usize) -> Self {
        Self::monomial(torus, Cyclotomic::one(), Degree::unit(torus.rank(), j))
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Degree, &Cyclotomic)> {
        self.terms.iter()
    }

    pub fn coeff(&self, deg: &Degree) -> Cyclotomic {
        self.terms.get(deg).cloned().unwrap_or_else(Cyclotomic::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Degree> {
        self.terms.keys()
    }

    fn add_term(&mut self, deg: Degree, coef: Cyclotomic) {
        if coef.is_zero() {
            return;
        }
        match self.terms.remove(&deg) {
            None => {
                self.terms.insert(deg, coef);
            }
            Some(old) => {
                let s = old.add(&coef);
                if !s.is_zero() {
                    self.terms.insert(deg, s);
                }
            }
        }
    }

    fn check_same_torus(&self, other: &Self) -> Result<(), TorusError> {
        if self.torus != other.torus {
            return Err(TorusError::MismatchedTorus);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, TorusError> {
        self.check_same_torus(other)?;
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(d.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TorusError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TorusElement {
            torus: self.torus.clone(),
            terms: self.terms.iter().map(|(d, c)| (d.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Cyclotomic) -> Self {
        if s.is_zero() {
            return Self::zero(&self.torus);
        }
        TorusElement {
            torus: self.torus.clone(),
            terms: self.terms.iter().map(|(d, c)| (d.clone(), c.mul(s))).collect(),
        }
    }

    /// Bilinear extension of `t^a t^b = sigma(a,b) t^(a+b)`.
    pub fn multiply(&self, other: &Self) -> Result<Self, TorusError> {
        self.check_same_torus(other)?;
        let mut out = Self::zero(&self.torus);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let s = self.torus.sigma(a, b)?;
                out.add_term(a + b, ca.mul(cb).mul(&s));
            }
        }
        Ok(out)
    }

    /// `[x, y] = xy - yx`.
    pub fn commutator(&self, other: &Self) -> Result<Self, TorusError> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// Inverse of the monomial `coef * t^deg`: `coef^-1 sigma(deg,deg) t^(-deg)`.
    pub fn monomial_inverse(
        torus: &Torus,
        coef: &Cyclotomic,
        deg: &Degree,
    ) -> Result<Self, TorusError> {
        let cinv = coef.inv().map_err(|_| {
            TorusError::InvalidQMatrix("division by zero in monomial inverse".into())
        })?;
        let s = torus.sigma(deg, deg)?;
        Ok(Self::monomial(torus, cinv.mul(&s), -deg))
    }

    /// Splits into `(central, commutator)` parts along the monomial
    /// grading: degrees inside `rad f` span the center, the rest span
    /// `[C_q, C_q]`.
    pub fn split_center(&self) -> (Self, Self) {
        let mut central = Self::zero(&self.torus);
        let mut comm = Self::zero(&self.torus);
        for (d, c) in &self.terms {
            if self.torus.in_radf(d) {
                central.terms.insert(d.clone(), c.clone());
            } else {
                comm.terms.insert(d.clone(), c.clone());
            }
        }
        (central, comm)
    }

    /// Total trace-style degree support bound, used by tests.
    pub fn max_degree(&self) -> i64 {
        self.terms.keys().map(Degree::linf).max().unwrap_or(0)
    }
}

impl fmt::Display for TorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (d, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*t^{d}")?;
        }
        Ok(())
    }
}

/// Wire format for torus elements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusElementJson {
    pub terms: Vec<TorusTermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusTermJson {
    pub exp: Vec<i64>,
    pub coef: Cyclotomic,
}

impl TorusElement {
    pub fn to_json(&self) -> TorusElementJson {
        TorusElementJson {
            terms: self
                .terms
                .iter()
                .map(|(d, c)| TorusTermJson { exp: d.0.clone(), coef: c.clone() })
                .collect(),
        }
    }

    pub fn from_json(torus: &Torus, json: &TorusElementJson) -> Result<Self, TorusError> {
        let mut out = Self::zero(torus);
        for t in &json.terms {
            if t.exp.len() != torus.rank() {
                return Err(TorusError::InvalidDegree {
                    expected: torus.rank(),
                    got: t.exp.len(),
                });
            }
            out.add_term(Degree(t.exp.clone()), t.coef.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::Rat;
    use crate::sample;
    use crate::torus::QMatrix;
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn t1() -> Torus {
        QMatrix::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn deg(v: &[i64]) -> Degree {
        Degree(v.to_vec())
    }

    fn mono(q: &Torus, k: i64, d: &[i64]) -> TorusElement {
        TorusElement::monomial(q, Cyclotomic::from_integer(k), deg(d))
    }

    #[test]
    fn generator_products() {
        let q = t1();
        let x = TorusElement::generator(&q, 0);
        let y = TorusElement::generator(&q, 1);
        assert_eq!(x.multiply(&y).unwrap(), mono(&q, 1, &[1, 1]));
        assert_eq!(y.multiply(&x).unwrap(), mono(&q, -1, &[1, 1]));
    }

    #[test]
    fn one_is_identity() {
        let q = t1();
        let x = mono(&q, 3, &[2, -1]).add(&mono(&q, -5, &[0, 4])).unwrap();
        assert_eq!(TorusElement::one(&q).multiply(&x).unwrap(), x);
        assert_eq!(x.multiply(&TorusElement::one(&q)).unwrap(), x);
    }

    #[test]
    fn commutators() {
        let q = t1();
        let x = TorusElement::generator(&q, 0);
        let y = TorusElement::generator(&q, 1);
        assert_eq!(x.commutator(&y).unwrap(), mono(&q, 2, &[1, 1]));
        let x2 = mono(&q, 1, &[2, 0]);
        assert!(x2.commutator(&y).unwrap().is_zero());
        assert!(x.commutator(&x).unwrap().is_zero());
    }

    #[test]
    fn monomial_inverses() {
        let q = t1();
        let x = mono(&q, 1, &[1, 1]);
        let inv = TorusElement::monomial_inverse(&q, &Cyclotomic::one(), &deg(&[1, 1])).unwrap();
        assert_eq!(inv, mono(&q, -1, &[-1, -1]));
        assert!(x.multiply(&inv).unwrap()
            .sub(&TorusElement::one(&q)).unwrap().is_zero());
        assert!(inv.multiply(&x).unwrap()
            .sub(&TorusElement::one(&q)).unwrap().is_zero());

        let e0 = TorusElement::monomial_inverse(&q, &Cyclotomic::one(), &Degree::zero(2)).unwrap();
        assert_eq!(e0, TorusElement::one(&q));

        let zq = QMatrix::new(2, 4, vec![vec![0, 1], vec![3, 0]]).unwrap();
        let z4 = Cyclotomic::root_of_unity(4, 1).unwrap();
        let inv = TorusElement::monomial_inverse(&zq, &z4, &deg(&[1, 0])).unwrap();
        assert_eq!(
            inv,
            TorusElement::monomial(&zq, z4.inv().unwrap(), deg(&[-1, 0]))
        );
    }

    #[test]
    fn invert_zero_coefficient_fails() {
        let q = t1();
        assert!(TorusElement::monomial_inverse(&q, &Cyclotomic::zero(), &deg(&[1, 0])).is_err());
    }

    #[test]
    fn split_center_examples() {
        let q = t1();
        let x = mono(&q, 1, &[2, 0]).add(&mono(&q, 1, &[1, 0])).unwrap();
        let (z, c) = x.split_center();
        assert_eq!(z, mono(&q, 1, &[2, 0]));
        assert_eq!(c, mono(&q, 1, &[1, 0]));

        let (z, c) = TorusElement::zero(&q).split_center();
        assert!(z.is_zero() && c.is_zero());

        let (z, c) = mono(&q, 1, &[1, 1]).split_center();
        assert!(z.is_zero());
        assert_eq!(c, mono(&q, 1, &[1, 1]));
    }

    #[test]
    fn mismatched_tori_rejected() {
        let a = TorusElement::one(&t1());
        let b = TorusElement::one(&QMatrix::new(2, 3, vec![vec![0, 1], vec![2, 0]]).unwrap());
        assert_eq!(a.multiply(&b).unwrap_err(), TorusError::MismatchedTorus);
    }

    #[test]
    fn associativity_on_random_triples() {
        let q = t1();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = sample::torus_element(&mut rng, &q, 3, 4);
            let y = sample::torus_element(&mut rng, &q, 3, 4);
            let z = sample::torus_element(&mut rng, &q, 3, 4);
            let lhs = x.multiply(&y).unwrap().multiply(&z).unwrap();
            let rhs = x.multiply(&y.multiply(&z).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn split_center_parts_behave() {
        let q = t1();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..25 {
            let x = sample::torus_element(&mut rng, &q, 4, 4);
            let (z, c) = x.split_center();
            assert_eq!(z.add(&c).unwrap(), x);
            for _ in 0..5 {
                let probe = sample::torus_element(&mut rng, &q, 3, 4);
                assert!(z.commutator(&probe).unwrap().is_zero());
            }
            // Every term of the commutator part is a combination of
            // single commutators: t^w = [t^u, t^v] / (sigma(u,v) - sigma(v,u))
            // with u a generator that fails to commute past w.
            for (w, coef) in c.terms() {
                let u = (0..q.rank())
                    .map(|i| Degree::unit(q.rank(), i))
                    .find(|u| !q.skew(u, w).unwrap().is_one())
                    .expect("noncentral degree must skew-pair with a generator");
                let v = w - &u;
                let gap = q.sigma(&u, &v).unwrap().sub(&q.sigma(&v, &u).unwrap());
                assert!(!gap.is_zero());
                let lhs = TorusElement::monomial(&q, Cyclotomic::one(), u.clone())
                    .commutator(&TorusElement::monomial(&q, Cyclotomic::one(), v.clone()))
                    .unwrap();
                let rebuilt = lhs.scale(&coef.mul(&gap.inv().unwrap()));
                assert_eq!(rebuilt, TorusElement::monomial(&q, coef.clone(), w.clone()));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let q = t1();
        let x = mono(&q, 2, &[1, -3])
            .add(&TorusElement::monomial(
                &q,
                Cyclotomic::from_rational(Rat::new(BigInt::from(1), BigInt::from(2))),
                deg(&[0, 0]),
            ))
            .unwrap();
        let j = serde_json::to_string(&x.to_json()).unwrap();
        let parsed: TorusElementJson = serde_json::from_str(&j).unwrap();
        assert_eq!(TorusElement::from_json(&q, &parsed).unwrap(), x);
    }
}
