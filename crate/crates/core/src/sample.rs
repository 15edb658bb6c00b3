//! Seeded random generators for the verification suites.
//!
//! Everything taking randomness goes through an explicit RNG so the CLI
//! and test suites reproduce bit-identical runs from a 64-bit seed.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::cyclotomic::Cyclotomic;
use crate::hc1::HC1Element;
use crate::linalg::Matrix;
use crate::quantum_torus::TorusElement;
use crate::toroidal::ToroidalElement;
use crate::torus::{Degree, Torus};

pub fn degree<R: Rng>(rng: &mut R, n: usize, bound: i64) -> Degree {
    Degree((0..n).map(|_| rng.random_range(-bound..=bound)).collect())
}

pub fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    let n = rng.random_range(-6i64..=6);
    let d = rng.random_range(1i64..=4);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A short rational combination of powers of `zeta_conductor`.
pub fn cyclotomic<R: Rng>(rng: &mut R, conductor: u64) -> Cyclotomic {
    let mut acc = Cyclotomic::zero();
    for _ in 0..rng.random_range(1..=2) {
        let k = rng.random_range(0..conductor.max(1)) as i64;
        let t = Cyclotomic::root_of_unity(conductor, k)
            .unwrap()
            .scale(&small_rational(rng));
        acc = acc.add(&t);
    }
    acc
}

pub fn nonzero_cyclotomic<R: Rng>(rng: &mut R, conductor: u64) -> Cyclotomic {
    loop {
        let c = cyclotomic(rng, conductor);
        if !c.is_zero() {
            return c;
        }
    }
}

pub fn root_of_unity<R: Rng>(rng: &mut R, conductor: u64) -> Cyclotomic {
    let k = rng.random_range(0..conductor) as i64;
    Cyclotomic::root_of_unity(conductor, k).unwrap()
}

pub fn torus_element<R: Rng>(
    rng: &mut R,
    torus: &Torus,
    max_terms: usize,
    deg_bound: i64,
) -> TorusElement {
    let mut acc = TorusElement::zero(torus);
    for _ in 0..rng.random_range(0..=max_terms) {
        let d = degree(rng, torus.rank(), deg_bound);
        let c = cyclotomic(rng, torus.conductor());
        acc = acc
            .add(&TorusElement::monomial(torus, c, d))
            .expect("same torus");
    }
    acc
}

/// A degree in `rad f` sampled from integer combinations of the basis.
pub fn radical_degree<R: Rng>(rng: &mut R, torus: &Torus, coef_bound: i64) -> Degree {
    let lat = torus.radf_basis();
    let mut v = vec![0i64; torus.rank()];
    for row in lat.basis() {
        let k = rng.random_range(-coef_bound..=coef_bound);
        for (slot, &b) in v.iter_mut().zip(row) {
            *slot += k * b;
        }
    }
    Degree(v)
}

pub fn matrix<R: Rng>(rng: &mut R, d: usize, conductor: u64) -> Matrix {
    Matrix::from_fn(d, d, |_, _| {
        if rng.random_bool(0.4) {
            Cyclotomic::zero()
        } else {
            cyclotomic(rng, conductor)
        }
    })
}

pub fn traceless_matrix<R: Rng>(rng: &mut R, d: usize, conductor: u64) -> Matrix {
    let mut m = matrix(rng, d, conductor);
    let mut partial = Cyclotomic::zero();
    for i in 0..d - 1 {
        partial = partial.add(m.get(i, i));
    }
    m.set(d - 1, d - 1, partial.neg());
    m
}

/// A random homogeneous element of the toroidal algebra satisfying the
/// trace-membership condition: a matrix term (traceless when the degree
/// is central), a derivation, or a central symbol.
pub fn toroidal_homogeneous<R: Rng>(
    rng: &mut R,
    torus: &Torus,
    d: usize,
    deg_bound: i64,
) -> ToroidalElement {
    match rng.random_range(0..10) {
        0 => {
            let mut out = ToroidalElement::zero(torus, d);
            for i in 1..=torus.rank() {
                if rng.random_bool(0.5) {
                    let c = cyclotomic(rng, torus.conductor());
                    out = out
                        .add(&ToroidalElement::derivation(torus, d, i).scale(&c))
                        .expect("same torus");
                }
            }
            out
        }
        1 => {
            let r = radical_degree(rng, torus, 1);
            let i = rng.random_range(1..=torus.rank());
            match HC1Element::symbol(torus, i, r) {
                Ok(sym) => ToroidalElement::from_hc1(
                    torus,
                    d,
                    sym.scale(&cyclotomic(rng, torus.conductor())),
                ),
                Err(_) => ToroidalElement::zero(torus, d),
            }
        }
        _ => {
            let a = degree(rng, torus.rank(), deg_bound);
            let x = if torus.in_radf(&a) {
                traceless_matrix(rng, d, torus.conductor())
            } else {
                matrix(rng, d, torus.conductor())
            };
            ToroidalElement::matrix_part(torus, d, x, a)
        }
    }
}

/// A random element with matrix part only, inside the pullback domain.
pub fn toroidal_matrix_only<R: Rng>(
    rng: &mut R,
    torus: &Torus,
    d: usize,
    deg_bound: i64,
) -> ToroidalElement {
    let mut out = ToroidalElement::zero(torus, d);
    for _ in 0..rng.random_range(1..=2) {
        let a = degree(rng, torus.rank(), deg_bound);
        let x = if torus.in_radf(&a) {
            traceless_matrix(rng, d, torus.conductor())
        } else {
            matrix(rng, d, torus.conductor())
        };
        out = out
            .add(&ToroidalElement::matrix_part(torus, d, x, a))
            .expect("same torus");
    }
    out
}

/// A pair of matrix terms whose bracket carries a nonzero central
/// cocycle term: opposite off-diagonal units at degrees summing into
/// the radical.
pub fn central_producing_pair<R: Rng>(
    rng: &mut R,
    torus: &Torus,
    d: usize,
    coef_bound: i64,
) -> (ToroidalElement, ToroidalElement) {
    let n = torus.rank();
    let r = radical_degree(rng, torus, coef_bound);
    let a = degree(rng, n, 2);
    let b = &r - &a;
    let i = rng.random_range(0..d);
    let j = (i + 1 + rng.random_range(0..d - 1)) % d;
    let x = ToroidalElement::matrix_part(torus, d, Matrix::unit(d, i, j), a);
    let y = ToroidalElement::matrix_part(torus, d, Matrix::unit(d, j, i), b);
    (x, y)
}
