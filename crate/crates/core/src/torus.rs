//! The rational quantum matrix `q` and its bilinear data on `Z^n`.
//!
//! A torus is described by a conductor `M` and an exponent matrix `e`
//! with `q_ij = zeta_M^(e_ij)`. The normal-ordering cocycle
//! `sigma(a,b) = prod_(j<i) q_ij^(a_i b_j)` gives `t^a t^b = sigma(a,b)
//! t^(a+b)`, and the alternating form `f(a,b) = sigma(a,b)/sigma(b,a)`
//! measures commutation. Its radical is an explicit sublattice computed
//! from the integer kernel of `e^T` modulo `M`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::{euler_phi, lcm_u64, Cyclotomic};
use crate::intmat::{self, IMat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TorusError {
    #[error("invalid degree: expected length {expected}, got {got}")]
    InvalidDegree { expected: usize, got: usize },
    #[error("invalid quantum matrix: {0}")]
    InvalidQMatrix(String),
    #[error("operands belong to different quantum tori")]
    MismatchedTorus,
    #[error("index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
}

/// A multidegree in `Z^n`, the grading group of the torus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Degree(pub Vec<i64>);

impl Degree {
    pub fn zero(n: usize) -> Self {
        Degree(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Degree(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn scaled(&self, k: i64) -> Self {
        Degree(self.0.iter().map(|v| k * v).collect())
    }
}

impl Add for &Degree {
    type Output = Degree;
    fn add(self, rhs: &Degree) -> Degree {
        Degree(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Degree {
    type Output = Degree;
    fn sub(self, rhs: &Degree) -> Degree {
        Degree(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Degree {
    type Output = Degree;
    fn neg(self) -> Degree {
        Degree(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Iterator over the integer box `[lo, hi]^n` in lexicographic order.
pub fn degree_box(n: usize, lo: i64, hi: i64) -> impl Iterator<Item = Degree> {
    let width = (hi - lo + 1) as u64;
    let total = width.checked_pow(n as u32).expect("box too large");
    (0..total).map(move |mut idx| {
        let mut v = vec![0i64; n];
        for slot in v.iter_mut().rev() {
            *slot = lo + (idx % width) as i64;
            idx /= width;
        }
        Degree(v)
    })
}

/// An integer sublattice of `Z^n` held as a row Hermite basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sublattice {
    ambient: usize,
    basis: Vec<Vec<i64>>,
}

impl Sublattice {
    pub fn from_generators(ambient: usize, gens: &[Vec<i64>]) -> Self {
        let mat: IMat = gens
            .iter()
            .map(|g| g.iter().map(|&v| v as i128).collect())
            .collect();
        let h = intmat::hnf_rows(&mat);
        Sublattice {
            ambient,
            basis: h
                .into_iter()
                .map(|r| r.into_iter().map(|v| v as i64).collect())
                .collect(),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// Membership by back-substitution against the echelon basis.
    pub fn contains(&self, a: &Degree) -> bool {
        let mut rem: Vec<i128> = a.0.iter().map(|&v| v as i128).collect();
        for row in &self.basis {
            let pivot_col = match row.iter().position(|&v| v != 0) {
                Some(c) => c,
                None => continue,
            };
            let p = row[pivot_col] as i128;
            if rem[pivot_col] % p != 0 {
                return false;
            }
            let q = rem[pivot_col] / p;
            if q != 0 {
                for (c, &v) in row.iter().enumerate() {
                    rem[c] -= q * v as i128;
                }
            }
        }
        rem.iter().all(|&v| v == 0)
    }

    /// Order of `Z^n / L` when finite: the product of the elementary
    /// divisors of the basis matrix.
    pub fn quotient_order(&self) -> Option<u128> {
        if self.rank() < self.ambient {
            return None;
        }
        let mat: IMat = self
            .basis
            .iter()
            .map(|r| r.iter().map(|&v| v as i128).collect())
            .collect();
        let d = intmat::smith_divisors(&mat);
        Some(d.iter().map(|&v| v as u128).product())
    }

    pub fn elementary_divisors(&self) -> Vec<i64> {
        let mat: IMat = self
            .basis
            .iter()
            .map(|r| r.iter().map(|&v| v as i128).collect())
            .collect();
        intmat::smith_divisors(&mat)
            .into_iter()
            .map(|v| v as i64)
            .collect()
    }
}

/// Serialized form of a torus configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusConfig {
    pub n: usize,
    pub conductor: u64,
    pub exps: Vec<Vec<i64>>,
}

/// The rational quantum matrix: `n`, a conductor `M`, and integer
/// exponents with `q_ij = zeta_M^(e_ij)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    n: usize,
    conductor: u64,
    exps: Vec<Vec<i64>>,
    radf: Sublattice,
}

pub type Torus = Arc<QMatrix>;

impl QMatrix {
    pub fn new(n: usize, conductor: u64, exps: Vec<Vec<i64>>) -> Result<Torus, TorusError> {
        if n < 2 {
            return Err(TorusError::InvalidQMatrix("rank must be at least 2".into()));
        }
        if conductor == 0 {
            return Err(TorusError::InvalidQMatrix("conductor must be positive".into()));
        }
        if exps.len() != n || exps.iter().any(|r| r.len() != n) {
            return Err(TorusError::InvalidQMatrix(format!(
                "exponent matrix must be {n}x{n}"
            )));
        }
        let m = conductor as i64;
        for i in 0..n {
            if exps[i][i].rem_euclid(m) != 0 {
                return Err(TorusError::InvalidQMatrix(format!(
                    "q_{}{} must be 1",
                    i + 1,
                    i + 1
                )));
            }
            for j in 0..n {
                if (exps[i][j] + exps[j][i]).rem_euclid(m) != 0 {
                    return Err(TorusError::InvalidQMatrix(format!(
                        "q_{}{} * q_{}{} must be 1",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let radf = compute_radf(n, conductor, &exps);
        let q = QMatrix { n, conductor, exps, radf };
        // The cocycle convention must reproduce the defining relation
        // t_i t_j = q_ij t_j t_i on every generator pair.
        for i in 0..n {
            for j in 0..n {
                let ei = Degree::unit(n, i);
                let ej = Degree::unit(n, j);
                let lhs = q.sigma(&ei, &ej).unwrap();
                let rhs = q.entry(i, j).mul(&q.sigma(&ej, &ei).unwrap());
                if lhs != rhs {
                    return Err(TorusError::InvalidQMatrix(format!(
                        "cocycle convention violates the defining relation at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Arc::new(q))
    }

    pub fn from_config(cfg: &TorusConfig) -> Result<Torus, TorusError> {
        Self::new(cfg.n, cfg.conductor, cfg.exps.clone())
    }

    pub fn config(&self) -> TorusConfig {
        TorusConfig {
            n: self.n,
            conductor: self.conductor,
            exps: self.exps.clone(),
        }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// `q_ij` as a scalar (zero-based indices).
    pub fn entry(&self, i: usize, j: usize) -> Cyclotomic {
        Cyclotomic::root_of_unity(self.conductor, self.exps[i][j]).expect("valid conductor")
    }

    fn check_degree(&self, a: &Degree) -> Result<(), TorusError> {
        if a.len() != self.n {
            return Err(TorusError::InvalidDegree { expected: self.n, got: a.len() });
        }
        Ok(())
    }

    /// Normal-ordering cocycle: `t^a t^b = sigma(a,b) t^(a+b)`.
    pub fn sigma(&self, a: &Degree, b: &Degree) -> Result<Cyclotomic, TorusError> {
        self.check_degree(a)?;
        self.check_degree(b)?;
        let m = self.conductor as i128;
        let mut exp: i128 = 0;
        for i in 1..self.n {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..i {
                if b.0[j] == 0 {
                    continue;
                }
                exp += (self.exps[i][j] as i128) * (a.0[i] as i128) * (b.0[j] as i128);
                exp = exp.rem_euclid(m);
            }
        }
        Ok(Cyclotomic::root_of_unity(self.conductor, exp as i64).expect("valid conductor"))
    }

    /// The alternating form `f(a,b) = sigma(a,b) sigma(b,a)^-1`, so that
    /// `t^a t^b = f(a,b) t^b t^a`.
    pub fn skew(&self, a: &Degree, b: &Degree) -> Result<Cyclotomic, TorusError> {
        self.check_degree(a)?;
        self.check_degree(b)?;
        let m = self.conductor as i128;
        let mut exp: i128 = 0;
        for j in 0..self.n {
            if a.0[j] == 0 {
                continue;
            }
            for i in 0..self.n {
                if b.0[i] == 0 {
                    continue;
                }
                exp += (self.exps[j][i] as i128) * (a.0[j] as i128) * (b.0[i] as i128);
                exp = exp.rem_euclid(m);
            }
        }
        Ok(Cyclotomic::root_of_unity(self.conductor, exp as i64).expect("valid conductor"))
    }

    /// Fast radical membership: `a` is in `rad f` iff `e^T a = 0 (mod M)`.
    pub fn in_radf(&self, a: &Degree) -> bool {
        debug_assert_eq!(a.len(), self.n);
        let m = self.conductor as i128;
        (0..self.n).all(|j| {
            let s: i128 = (0..self.n)
                .map(|i| (self.exps[i][j] as i128) * (a.0[i] as i128))
                .sum();
            s.rem_euclid(m) == 0
        })
    }

    pub fn radf_basis(&self) -> &Sublattice {
        &self.radf
    }

    /// Least `N_j >= 1` with `t_j^(N_j)` central; equals the lcm of the
    /// orders of the `q_ij` over `i`.
    pub fn min_central_power(&self, j: usize) -> Result<u64, TorusError> {
        if j == 0 || j > self.n {
            return Err(TorusError::IndexOutOfRange(j, self.n));
        }
        let mut acc = 1u64;
        for i in 0..self.n {
            acc = lcm_u64(acc, self.entry(i, j - 1).order().expect("roots of unity"));
        }
        Ok(acc)
    }

    pub fn central_powers(&self) -> Vec<u64> {
        (1..=self.n).map(|j| self.min_central_power(j).unwrap()).collect()
    }

    /// Degree of the field extension holding the structure constants.
    pub fn scalar_degree(&self) -> u64 {
        euler_phi(self.conductor)
    }
}

fn compute_radf(n: usize, conductor: u64, exps: &[Vec<i64>]) -> Sublattice {
    // Solve e^T a = 0 (mod M): kernel of the stacked system [e^T | M I].
    let m = conductor as i128;
    let mut stacked: IMat = Vec::with_capacity(n);
    for j in 0..n {
        let mut row: Vec<i128> = (0..n).map(|i| exps[i][j] as i128).collect();
        for k in 0..n {
            row.push(if k == j { m } else { 0 });
        }
        stacked.push(row);
    }
    let kernel = intmat::kernel_basis(&stacked);
    let gens: Vec<Vec<i64>> = kernel
        .into_iter()
        .map(|row| row[..n].iter().map(|&v| v as i64).collect())
        .collect();
    Sublattice::from_generators(n, &gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// n = 2, q_12 = -1.
    pub fn t1() -> Torus {
        QMatrix::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn zeta3_torus() -> Torus {
        QMatrix::new(2, 3, vec![vec![0, 1], vec![2, 0]]).unwrap()
    }

    fn commutative(n: usize) -> Torus {
        QMatrix::new(n, 1, vec![vec![0; n]; n]).unwrap()
    }

    fn deg(v: &[i64]) -> Degree {
        Degree(v.to_vec())
    }

    #[test]
    fn sigma_on_generators() {
        let q = t1();
        let e1 = Degree::unit(2, 0);
        let e2 = Degree::unit(2, 1);
        assert!(q.sigma(&e1, &e2).unwrap().is_one());
        assert_eq!(q.sigma(&e2, &e1).unwrap(), Cyclotomic::from_integer(-1));
        assert!(q.sigma(&Degree::zero(2), &deg(&[3, -2])).unwrap().is_one());
    }

    #[test]
    fn skew_matches_defining_relation() {
        let q = t1();
        assert_eq!(
            q.skew(&deg(&[1, 0]), &deg(&[0, 1])).unwrap(),
            Cyclotomic::from_integer(-1)
        );
        let a = deg(&[2, -3]);
        assert!(q.skew(&a, &a).unwrap().is_one());
        let b = deg(&[1, 4]);
        assert!(q.skew(&a, &b).unwrap().mul(&q.skew(&b, &a).unwrap()).is_one());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let q = t1();
        let err = q.sigma(&deg(&[1, 0, 0]), &deg(&[0, 1])).unwrap_err();
        assert_eq!(err, TorusError::InvalidDegree { expected: 2, got: 3 });
    }

    #[test]
    fn radf_of_t1_is_two_z_squared() {
        let q = t1();
        assert_eq!(q.radf_basis().basis(), &[vec![2, 0], vec![0, 2]]);
        assert!(q.in_radf(&deg(&[2, 0])));
        assert!(q.in_radf(&deg(&[-4, 2])));
        assert!(!q.in_radf(&deg(&[1, 0])));
        assert_eq!(q.radf_basis().quotient_order(), Some(4));
    }

    #[test]
    fn radf_of_commutative_torus_is_everything() {
        let q = commutative(3);
        assert_eq!(
            q.radf_basis().basis(),
            &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
    }

    #[test]
    fn radf_of_zeta3_torus() {
        let q = zeta3_torus();
        assert_eq!(q.radf_basis().basis(), &[vec![3, 0], vec![0, 3]]);
    }

    #[test]
    fn radical_membership_routes_agree() {
        let q = zeta3_torus();
        for a in degree_box(2, -4, 4) {
            assert_eq!(q.in_radf(&a), q.radf_basis().contains(&a), "at {a}");
        }
    }

    #[test]
    fn min_central_powers() {
        assert_eq!(t1().min_central_power(1).unwrap(), 2);
        assert_eq!(commutative(2).min_central_power(1).unwrap(), 1);
        let q = QMatrix::new(2, 6, vec![vec![0, 1], vec![5, 0]]).unwrap();
        assert_eq!(q.min_central_power(1).unwrap(), 6);
        assert_eq!(q.min_central_power(2).unwrap(), 6);
    }

    #[test]
    fn central_power_lands_in_radical() {
        for q in [t1(), zeta3_torus()] {
            for j in 1..=q.rank() {
                let nj = q.min_central_power(j).unwrap();
                let a = Degree::unit(q.rank(), j - 1).scaled(nj as i64);
                assert!(q.in_radf(&a));
                for k in 1..nj {
                    let b = Degree::unit(q.rank(), j - 1).scaled(k as i64);
                    assert!(!q.in_radf(&b), "t_{j}^{k} should not be central");
                }
            }
        }
    }

    #[test]
    fn invalid_matrices_rejected() {
        assert!(QMatrix::new(1, 2, vec![vec![0]]).is_err());
        // nonzero diagonal
        assert!(QMatrix::new(2, 2, vec![vec![1, 1], vec![1, 0]]).is_err());
        // not inverse-symmetric
        assert!(QMatrix::new(2, 4, vec![vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn quotient_order_matches_hermite_determinant() {
        let q = zeta3_torus();
        let lat = q.radf_basis();
        let det: i128 = lat
            .basis()
            .iter()
            .enumerate()
            .map(|(i, r)| r[i] as i128)
            .product();
        assert_eq!(lat.quotient_order(), Some(det as u128));
        let divisors = lat.elementary_divisors();
        let prod: i64 = divisors.iter().product();
        assert_eq!(prod as i128, det);
    }
}
