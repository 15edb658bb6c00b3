//! Root data for the toroidal algebra: weights on the Cartan
//! `h = h_dot + span(c_i) + span(d_i)`, the invariant bilinear form,
//! real and null roots, reflections and the affine translation.
//!
//! Weights are stored in the basis `{alpha_i, delta_j, omega_j}` of
//! `h^*`. In that basis `lambda(c_j)` is the `omega_j` coordinate and
//! `lambda(d_j)` the `delta_j` coordinate, so the evaluations used by
//! the translation formula and integrality tests read off directly.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::Rat;
use crate::torus::Degree;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootError {
    #[error("weights live on different Cartans")]
    DimensionMismatch,
    #[error("null roots have no coroot")]
    NoCoroot,
    #[error("reflection is only defined for real roots")]
    NoReflection,
    #[error("translation requires the c_{0} coordinate to vanish")]
    HypothesisViolated(usize),
    #[error("finite root coordinates invalid for sl_{0}")]
    InvalidFiniteRoot(usize),
}

fn rat(n: i64) -> Rat {
    BigRational::from(BigInt::from(n))
}

/// A weight in the basis `{alpha_i (i < d), delta_j, omega_j (j <= n)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weight {
    pub finite: Vec<Rat>,
    pub delta: Vec<Rat>,
    pub omega: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct WeightJson {
    finite: Vec<(String, String)>,
    delta: Vec<(String, String)>,
    omega: Vec<(String, String)>,
}

fn rats_to_json(v: &[Rat]) -> Vec<(String, String)> {
    v.iter()
        .map(|r| (r.numer().to_string(), r.denom().to_string()))
        .collect()
}

fn rats_from_json<E: serde::de::Error>(v: &[(String, String)]) -> Result<Vec<Rat>, E> {
    v.iter()
        .map(|(n, d)| {
            let n: BigInt = n.parse().map_err(E::custom)?;
            let d: BigInt = d.parse().map_err(E::custom)?;
            if d.is_zero() {
                return Err(E::custom("zero denominator"));
            }
            Ok(BigRational::new(n, d))
        })
        .collect()
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WeightJson {
            finite: rats_to_json(&self.finite),
            delta: rats_to_json(&self.delta),
            omega: rats_to_json(&self.omega),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = WeightJson::deserialize(d)?;
        Ok(Weight {
            finite: rats_from_json(&raw.finite)?,
            delta: rats_from_json(&raw.delta)?,
            omega: rats_from_json(&raw.omega)?,
        })
    }
}

impl Weight {
    pub fn zero(d: usize, n: usize) -> Self {
        Weight {
            finite: vec![Rat::zero(); d - 1],
            delta: vec![Rat::zero(); n],
            omega: vec![Rat::zero(); n],
        }
    }

    pub fn d(&self) -> usize {
        self.finite.len() + 1
    }

    pub fn n(&self) -> usize {
        self.delta.len()
    }

    /// The simple root `alpha_i` (1-based).
    pub fn simple_root(d: usize, n: usize, i: usize) -> Self {
        let mut w = Self::zero(d, n);
        w.finite[i - 1] = Rat::one();
        w
    }

    /// `delta_j` (1-based).
    pub fn delta_basis(d: usize, n: usize, j: usize) -> Self {
        let mut w = Self::zero(d, n);
        w.delta[j - 1] = Rat::one();
        w
    }

    /// `omega_j` (1-based).
    pub fn omega_basis(d: usize, n: usize, j: usize) -> Self {
        let mut w = Self::zero(d, n);
        w.omega[j - 1] = Rat::one();
        w
    }

    /// The null root `delta_m = sum m_j delta_j`.
    pub fn null_root(d: usize, m: &Degree) -> Self {
        let mut w = Self::zero(d, m.len());
        for (slot, &v) in w.delta.iter_mut().zip(&m.0) {
            *slot = rat(v);
        }
        w
    }

    /// Fundamental weight `varpi_i` of `sl_d` (1-based): the unique
    /// finite weight with `varpi_i(alpha_j^vee) = delta_ij`.
    pub fn fundamental(d: usize, n: usize, i: usize) -> Self {
        let mut evals = vec![Rat::zero(); d - 1];
        evals[i - 1] = Rat::one();
        Self::from_coroot_evals(d, n, &evals)
    }

    /// Reconstructs a finite weight from its values on the simple
    /// coroots by inverting the Cartan matrix.
    pub fn from_coroot_evals(d: usize, n: usize, evals: &[Rat]) -> Self {
        assert_eq!(evals.len(), d - 1);
        // Solve C x = evals for the A_(d-1) Cartan matrix C.
        let k = d - 1;
        let mut aug: Vec<Vec<Rat>> = (0..k)
            .map(|i| {
                let mut row: Vec<Rat> = (0..k).map(|j| rat(cartan_entry(i, j))).collect();
                row.push(evals[i].clone());
                row
            })
            .collect();
        // Gaussian elimination on the tridiagonal system.
        for col in 0..k {
            let p = (col..k).find(|&r| !aug[r][col].is_zero()).expect("Cartan invertible");
            aug.swap(col, p);
            let inv = aug[col][col].recip();
            for v in aug[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..k {
                if r != col && !aug[r][col].is_zero() {
                    let f = aug[r][col].clone();
                    for j in 0..=k {
                        let s = &aug[col][j] * &f;
                        aug[r][j] -= s;
                    }
                }
            }
        }
        let mut w = Self::zero(d, n);
        for i in 0..k {
            w.finite[i] = aug[i][k].clone();
        }
        w
    }

    pub fn add(&self, other: &Self) -> Result<Self, RootError> {
        self.check(other)?;
        Ok(Weight {
            finite: zip_add(&self.finite, &other.finite),
            delta: zip_add(&self.delta, &other.delta),
            omega: zip_add(&self.omega, &other.omega),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RootError> {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Weight {
            finite: self.finite.iter().map(|v| v * s).collect(),
            delta: self.delta.iter().map(|v| v * s).collect(),
            omega: self.omega.iter().map(|v| v * s).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.finite.iter().all(Zero::is_zero)
            && self.delta.iter().all(Zero::is_zero)
            && self.omega.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) -> Result<(), RootError> {
        if self.d() != other.d() || self.n() != other.n() {
            return Err(RootError::DimensionMismatch);
        }
        Ok(())
    }

    /// `lambda(c_j)`, 1-based.
    pub fn eval_c(&self, j: usize) -> Rat {
        self.omega[j - 1].clone()
    }

    /// `lambda(d_j)`, 1-based.
    pub fn eval_d(&self, j: usize) -> Rat {
        self.delta[j - 1].clone()
    }
}

fn zip_add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn cartan_entry(i: usize, j: usize) -> i64 {
    if i == j {
        2
    } else if i.abs_diff(j) == 1 {
        -1
    } else {
        0
    }
}

/// A root of `sl_d` written on the simple-root basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteRoot {
    pub coords: Vec<i64>,
}

impl FiniteRoot {
    /// `epsilon_i - epsilon_j` (1-based, i != j).
    pub fn from_pair(d: usize, i: usize, j: usize) -> Result<Self, RootError> {
        if i == 0 || j == 0 || i > d || j > d || i == j {
            return Err(RootError::InvalidFiniteRoot(d));
        }
        let mut coords = vec![0i64; d - 1];
        let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        for slot in coords.iter_mut().take(hi - 1).skip(lo - 1) {
            *slot = sign;
        }
        Ok(FiniteRoot { coords })
    }

    /// All roots of `sl_d`.
    pub fn all(d: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for i in 1..=d {
            for j in 1..=d {
                if i != j {
                    out.push(Self::from_pair(d, i, j).unwrap());
                }
            }
        }
        out
    }

    /// The highest root `theta = epsilon_1 - epsilon_d`.
    pub fn highest(d: usize) -> Self {
        Self::from_pair(d, 1, d).unwrap()
    }

    pub fn as_weight(&self, n: usize) -> Weight {
        let d = self.coords.len() + 1;
        let mut w = Weight::zero(d, n);
        for (slot, &v) in w.finite.iter_mut().zip(&self.coords) {
            *slot = rat(v);
        }
        w
    }
}

/// A real root `alpha + delta_m` or a null root `delta_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Root {
    Real { alpha: FiniteRoot, m: Degree },
    Null { m: Degree },
}

impl Root {
    pub fn as_weight(&self, d: usize, n: usize) -> Weight {
        match self {
            Root::Real { alpha, m } => {
                let mut w = alpha.as_weight(n);
                for (slot, &v) in w.delta.iter_mut().zip(&m.0) {
                    *slot = rat(v);
                }
                let _ = d;
                w
            }
            Root::Null { m } => Weight::null_root(d, m),
        }
    }
}

/// The invariant symmetric form: `(alpha_i, alpha_j)` is the `A_(d-1)`
/// Cartan pairing, `(delta_i, omega_j) = delta_ij`, all other pairings of
/// the affine directions vanish.
pub fn inner(x: &Weight, y: &Weight) -> Result<Rat, RootError> {
    if x.d() != y.d() || x.n() != y.n() {
        return Err(RootError::DimensionMismatch);
    }
    let mut acc = Rat::zero();
    for (i, a) in x.finite.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in y.finite.iter().enumerate() {
            if !b.is_zero() {
                acc += a * b * rat(cartan_entry(i, j));
            }
        }
    }
    for j in 0..x.n() {
        acc += &x.delta[j] * &y.omega[j];
        acc += &x.omega[j] * &y.delta[j];
    }
    Ok(acc)
}

/// `lambda(gamma^vee)` for a real root `gamma = alpha + delta_m`:
/// the finite coroot evaluation plus `sum m_i lambda(c_i)`.
pub fn coroot_eval(lambda: &Weight, gamma: &Root) -> Result<Rat, RootError> {
    let Root::Real { alpha, m } = gamma else {
        return Err(RootError::NoCoroot);
    };
    if lambda.d() != alpha.coords.len() + 1 || lambda.n() != m.len() {
        return Err(RootError::DimensionMismatch);
    }
    // Simply laced: lambda(alpha^vee) = (lambda, alpha).
    let alpha_w = alpha.as_weight(lambda.n());
    let mut acc = inner(lambda, &alpha_w)?;
    for (j, &mj) in m.0.iter().enumerate() {
        if mj != 0 {
            acc += rat(mj) * lambda.eval_c(j + 1);
        }
    }
    Ok(acc)
}

/// `r_gamma(lambda) = lambda - lambda(gamma^vee) gamma`.
pub fn reflect(lambda: &Weight, gamma: &Root) -> Result<Weight, RootError> {
    if matches!(gamma, Root::Null { .. }) {
        return Err(RootError::NoReflection);
    }
    let e = coroot_eval(lambda, gamma)?;
    let g = gamma.as_weight(lambda.d(), lambda.n());
    lambda.sub(&g.scale(&e))
}

/// Affine translation from the `j`-th loop direction acting on weights
/// with trivial `c_j` action: `mu -> mu - mu(theta^vee) delta_j`.
pub fn translate(mu: &Weight, j: usize) -> Result<Weight, RootError> {
    if !mu.eval_c(j).is_zero() {
        return Err(RootError::HypothesisViolated(j));
    }
    let theta = Root::Real {
        alpha: FiniteRoot::highest(mu.d()),
        m: Degree::zero(mu.n()),
    };
    let e = coroot_eval(mu, &theta)?;
    let dj = Weight::delta_basis(mu.d(), mu.n(), j);
    mu.sub(&dj.scale(&e))
}

/// Dominant integrality: `lambda(alpha_i^vee)` is a non-negative integer
/// for every simple root.
pub fn is_dominant_integral(lambda: &Weight) -> bool {
    (1..lambda.d()).all(|i| {
        let gamma = Root::Real {
            alpha: FiniteRoot::from_pair(lambda.d(), i, i + 1).unwrap(),
            m: Degree::zero(lambda.n()),
        };
        let v = coroot_eval(lambda, &gamma).unwrap();
        v.is_integer() && !v.is_negative()
    })
}

/// Bounded-breadth orbit of a weight under the reflections in the given
/// real roots; stops once `budget` distinct weights have been seen.
pub fn weyl_orbit(lambda: &Weight, generators: &[Root], budget: usize) -> Vec<Weight> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::new();
    let mut frontier = vec![lambda.clone()];
    let key = |w: &Weight| format!("{w:?}");
    seen.insert(key(lambda));
    out.push(lambda.clone());
    while let Some(w) = frontier.pop() {
        if out.len() >= budget {
            break;
        }
        for g in generators {
            if let Ok(img) = reflect(&w, g) {
                if seen.insert(key(&img)) {
                    out.push(img.clone());
                    frontier.push(img);
                    if out.len() >= budget {
                        return out;
                    }
                }
            }
        }
    }
    out
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "finite{:?} delta{:?} omega{:?}",
            self.finite.iter().map(ToString::to_string).collect::<Vec<_>>(),
            self.delta.iter().map(ToString::to_string).collect::<Vec<_>>(),
            self.omega.iter().map(ToString::to_string).collect::<Vec<_>>())
    }
}
