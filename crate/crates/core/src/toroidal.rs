//! The toroidal Lie algebra: matrices over the quantum torus, the
//! central extension by cyclic homology, and the degree derivations.
//!
//! Elements carry three parts: a finite sum of `X (x) t^a` with `X` a
//! `d x d` cyclotomic matrix, a central part in `HC_1(C_q)`, and a
//! derivation part on `d_1..d_n`. The bracket is
//!
//! ```text
//! [X(x)t^a, Y(x)t^b] = XY (x) t^a t^b - YX (x) t^b t^a
//!                      + Tr(XY) <t^a, t^b>   (gated to rad f)
//! [d_i, X(x)t^a]     = a_i X (x) t^a
//! [d_i, <t^a,t^b>]   = (a_i + b_i) <t^a,t^b>
//! ```
//!
//! with the central part bracketing to zero. Elements are held in
//! `gl_d(C_q)` coordinates; membership in `sl_d(C_q)` (trace inside
//! `[C_q, C_q]`) is a predicate checked at the boundaries rather than a
//! structural invariant, since intermediate results of a computation may
//! leave the trace condition.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cyclotomic::Cyclotomic;
use crate::hc1::{normalize_pair, HC1Element, HC1ElementJson};
use crate::linalg::{Matrix, MatrixJson};
use crate::quantum_torus::TorusElement;
use crate::roots::Root;
use crate::torus::{Degree, Torus, TorusError};

#[derive(Debug, Clone, PartialEq)]
pub struct ToroidalElement {
    torus: Torus,
    d: usize,
    mat: BTreeMap<Degree, Matrix>,
    hc: HC1Element,
    der: Vec<Cyclotomic>,
}

impl ToroidalElement {
    pub fn zero(torus: &Torus, d: usize) -> Self {
        assert!(d >= 2, "matrix rank must be at least 2");
        ToroidalElement {
            torus: torus.clone(),
            d,
            mat: BTreeMap::new(),
            hc: HC1Element::zero(torus),
            der: vec![Cyclotomic::zero(); torus.rank()],
        }
    }

    /// `X (x) t^a`.
    pub fn matrix_part(torus: &Torus, d: usize, x: Matrix, a: Degree) -> Self {
        assert_eq!((x.nrows(), x.ncols()), (d, d));
        assert_eq!(a.len(), torus.rank());
        let mut out = Self::zero(torus, d);
        if !x.is_zero() {
            out.mat.insert(a, x);
        }
        out
    }

    /// The derivation `d_i` (1-based).
    pub fn derivation(torus: &Torus, d: usize, i: usize) -> Self {
        let mut out = Self::zero(torus, d);
        out.der[i - 1] = Cyclotomic::one();
        out
    }

    pub fn from_hc1(torus: &Torus, d: usize, hc: HC1Element) -> Self {
        let mut out = Self::zero(torus, d);
        out.hc = hc;
        out
    }

    /// The central element `c_i` (1-based).
    pub fn central(torus: &Torus, d: usize, i: usize) -> Result<Self, TorusError> {
        Ok(Self::from_hc1(torus, d, HC1Element::central_generator(torus, i)?))
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn matrix_rank(&self) -> usize {
        self.d
    }

    pub fn matrix_terms(&self) -> impl Iterator<Item = (&Degree, &Matrix)> {
        self.mat.iter()
    }

    pub fn hc_part(&self) -> &HC1Element {
        &self.hc
    }

    pub fn der_part(&self) -> &[Cyclotomic] {
        &self.der
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_empty() && self.hc.is_zero() && self.der.iter().all(Cyclotomic::is_zero)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), TorusError> {
        if self.torus != other.torus || self.d != other.d {
            return Err(TorusError::MismatchedTorus);
        }
        Ok(())
    }

    fn add_matrix_term(&mut self, a: Degree, x: Matrix) {
        if x.is_zero() {
            return;
        }
        match self.mat.remove(&a) {
            None => {
                self.mat.insert(a, x);
            }
            Some(old) => {
                let s = old.add(&x);
                if !s.is_zero() {
                    self.mat.insert(a, s);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TorusError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, x) in &other.mat {
            out.add_matrix_term(a.clone(), x.clone());
        }
        out.hc = out.hc.add(&other.hc)?;
        for (slot, v) in out.der.iter_mut().zip(&other.der) {
            *slot = slot.add(v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TorusError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ToroidalElement {
            torus: self.torus.clone(),
            d: self.d,
            mat: self.mat.iter().map(|(a, x)| (a.clone(), x.neg())).collect(),
            hc: self.hc.neg(),
            der: self.der.iter().map(Cyclotomic::neg).collect(),
        }
    }

    pub fn scale(&self, s: &Cyclotomic) -> Self {
        if s.is_zero() {
            return Self::zero(&self.torus, self.d);
        }
        ToroidalElement {
            torus: self.torus.clone(),
            d: self.d,
            mat: self.mat.iter().map(|(a, x)| (a.clone(), x.scale(s))).collect(),
            hc: self.hc.scale(s),
            der: self.der.iter().map(|v| v.mul(s)).collect(),
        }
    }

    /// The full toroidal bracket.
    pub fn bracket(&self, other: &Self) -> Result<Self, TorusError> {
        self.check_compatible(other)?;
        let q = &self.torus;
        let mut out = Self::zero(q, self.d);

        // matrix x matrix, with the central cocycle term per monomial pair
        for (a, x) in &self.mat {
            for (b, y) in &other.mat {
                let sab = q.sigma(a, b)?;
                let sba = q.sigma(b, a)?;
                let xy = x.mul(y);
                let yx = y.mul(x);
                let m = xy.scale(&sab).sub(&yx.scale(&sba));
                out.add_matrix_term(a + b, m);
                let tr = xy.trace();
                if !tr.is_zero() {
                    out.hc = out.hc.add(&normalize_pair(q, &tr, a, b)?)?;
                }
            }
        }

        // derivations act on graded pieces
        let weight = |coefs: &[Cyclotomic], deg: &Degree| -> Cyclotomic {
            let mut acc = Cyclotomic::zero();
            for (c, &k) in coefs.iter().zip(&deg.0) {
                if k != 0 && !c.is_zero() {
                    acc = acc.add(&c.mul(&Cyclotomic::from_integer(k)));
                }
            }
            acc
        };
        for (b, y) in &other.mat {
            let w = weight(&self.der, b);
            if !w.is_zero() {
                out.add_matrix_term(b.clone(), y.scale(&w));
            }
        }
        for (a, x) in &self.mat {
            let w = weight(&other.der, a);
            if !w.is_zero() {
                out.add_matrix_term(a.clone(), x.scale(&w.neg()));
            }
        }
        for (i, r, c) in other.hc.terms() {
            let w = weight(&self.der, r);
            if !w.is_zero() {
                let sym = HC1Element::symbol(q, i, r.clone())?;
                out.hc = out.hc.add(&sym.scale(&c.mul(&w)))?;
            }
        }
        for (i, r, c) in self.hc.terms() {
            let w = weight(&other.der, r);
            if !w.is_zero() {
                let sym = HC1Element::symbol(q, i, r.clone())?;
                out.hc = out.hc.add(&sym.scale(&c.mul(&w).neg()))?;
            }
        }
        Ok(out)
    }

    /// `[[x,y],z] + [[y,z],x] + [[z,x],y]`; zero exactly when the data
    /// defines a Lie algebra.
    pub fn jacobi_residual(x: &Self, y: &Self, z: &Self) -> Result<Self, TorusError> {
        let a = x.bracket(y)?.bracket(z)?;
        let b = y.bracket(z)?.bracket(x)?;
        let c = z.bracket(x)?.bracket(y)?;
        a.add(&b)?.add(&c)
    }

    /// The element with central and derivation parts dropped.
    pub fn matrix_only(&self) -> Self {
        ToroidalElement {
            torus: self.torus.clone(),
            d: self.d,
            mat: self.mat.clone(),
            hc: HC1Element::zero(&self.torus),
            der: vec![Cyclotomic::zero(); self.torus.rank()],
        }
    }

    /// Trace of the matrix part as a torus element.
    pub fn trace(&self) -> TorusElement {
        let mut acc = TorusElement::zero(&self.torus);
        for (a, x) in &self.mat {
            let t = x.trace();
            if !t.is_zero() {
                acc = acc
                    .add(&TorusElement::monomial(&self.torus, t, a.clone()))
                    .expect("same torus");
            }
        }
        acc
    }

    /// Membership in `sl_d(C_q) + HC_1 + D`: the trace must lie in
    /// `[C_q, C_q]`, i.e. its central part vanishes.
    pub fn validate_membership(&self) -> bool {
        let (central, _) = self.trace().split_center();
        central.is_zero()
    }

    /// Projection onto the root space of `root`.
    ///
    /// Real roots `alpha + delta_m` with `alpha = eps_i - eps_j` pick the
    /// `E_ij` entry of the degree-`m` matrix. Null roots `delta_m` pick
    /// the diagonal at degree `m` together with the degree-`m` central
    /// part. The components over all roots plus the Cartan part sum back
    /// to the element.
    pub fn root_component(&self, root: &Root) -> Result<Self, TorusError> {
        let q = &self.torus;
        let mut out = Self::zero(q, self.d);
        match root {
            Root::Real { alpha, m } => {
                let Some((i, j)) = alpha_pair(&alpha.coords) else {
                    return Err(TorusError::InvalidQMatrix(
                        "not a root of sl_d".into(),
                    ));
                };
                if let Some(x) = self.mat.get(m) {
                    let e = x.get(i, j);
                    if !e.is_zero() {
                        let mut y = Matrix::zeros(self.d, self.d);
                        y.set(i, j, e.clone());
                        out.mat.insert(m.clone(), y);
                    }
                }
            }
            Root::Null { m } => {
                if m.is_zero() {
                    return Err(TorusError::InvalidQMatrix(
                        "delta_0 is not a root; use cartan_component".into(),
                    ));
                }
                if let Some(x) = self.mat.get(m) {
                    let mut y = Matrix::zeros(self.d, self.d);
                    let mut nonzero = false;
                    for i in 0..self.d {
                        let e = x.get(i, i);
                        if !e.is_zero() {
                            y.set(i, i, e.clone());
                            nonzero = true;
                        }
                    }
                    if nonzero {
                        out.mat.insert(m.clone(), y);
                    }
                }
                for (i, r, c) in self.hc.terms() {
                    if r == m {
                        let sym = HC1Element::symbol(q, i, r.clone())?;
                        out.hc = out.hc.add(&sym.scale(c))?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The degree-zero diagonal part plus the degree-zero central part
    /// and all derivations: the Cartan `h`.
    pub fn cartan_component(&self) -> Self {
        let q = &self.torus;
        let mut out = Self::zero(q, self.d);
        let zero = Degree::zero(q.rank());
        if let Some(x) = self.mat.get(&zero) {
            let mut y = Matrix::zeros(self.d, self.d);
            let mut nonzero = false;
            for i in 0..self.d {
                let e = x.get(i, i);
                if !e.is_zero() {
                    y.set(i, i, e.clone());
                    nonzero = true;
                }
            }
            if nonzero {
                out.mat.insert(zero.clone(), y);
            }
        }
        for (i, r, c) in self.hc.terms() {
            if r.is_zero() {
                let sym = HC1Element::symbol(q, i, r.clone()).expect("zero degree");
                out.hc = out.hc.add(&sym.scale(c)).expect("same torus");
            }
        }
        out.der = self.der.clone();
        out
    }
}

/// Recovers `(i, j)` from simple-root coordinates of `eps_i - eps_j`
/// (zero-based output), when the vector is a root of `sl_d`.
fn alpha_pair(coords: &[i64]) -> Option<(usize, usize)> {
    let d = coords.len() + 1;
    for i in 1..=d {
        for j in 1..=d {
            if i == j {
                continue;
            }
            let c = crate::roots::FiniteRoot::from_pair(d, i, j).ok()?;
            if c.coords == coords {
                return Some((i - 1, j - 1));
            }
        }
    }
    None
}

/// Basis of the Cartan subalgebra: the `d - 1` coroot matrices, the `n`
/// central elements and the `n` derivations; `2n + d - 1` elements.
pub fn cartan_basis(torus: &Torus, d: usize) -> Vec<ToroidalElement> {
    let n = torus.rank();
    let zero = Degree::zero(n);
    let mut out = Vec::with_capacity(2 * n + d - 1);
    for i in 0..d - 1 {
        let mut h = Matrix::zeros(d, d);
        h.set(i, i, Cyclotomic::one());
        h.set(i + 1, i + 1, Cyclotomic::from_integer(-1));
        out.push(ToroidalElement::matrix_part(torus, d, h, zero.clone()));
    }
    for i in 1..=n {
        out.push(ToroidalElement::central(torus, d, i).expect("valid index"));
    }
    for i in 1..=n {
        out.push(ToroidalElement::derivation(torus, d, i));
    }
    out
}

impl fmt::Display for ToroidalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, x) in &self.mat {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "[{x}](x)t^{a}")?;
            first = false;
        }
        if !self.hc.is_zero() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}", self.hc)?;
            first = false;
        }
        for (i, c) in self.der.iter().enumerate() {
            if !c.is_zero() {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "({c})*d{}", i + 1)?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Wire format for toroidal elements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToroidalElementJson {
    pub mat: Vec<ToroidalMatTermJson>,
    pub hc1: HC1ElementJson,
    pub der: Vec<Cyclotomic>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToroidalMatTermJson {
    pub entries: MatrixJson,
    pub exp: Vec<i64>,
}

impl ToroidalElement {
    pub fn to_json(&self) -> ToroidalElementJson {
        ToroidalElementJson {
            mat: self
                .mat
                .iter()
                .map(|(a, x)| ToroidalMatTermJson { entries: x.to_json(), exp: a.0.clone() })
                .collect(),
            hc1: self.hc.to_json(),
            der: self.der.clone(),
        }
    }

    pub fn from_json(
        torus: &Torus,
        d: usize,
        json: &ToroidalElementJson,
    ) -> Result<Self, TorusError> {
        let mut out = Self::zero(torus, d);
        for t in &json.mat {
            let m = Matrix::from_json(&t.entries);
            if (m.nrows(), m.ncols()) != (d, d) {
                return Err(TorusError::InvalidQMatrix(format!(
                    "matrix entries must be {d}x{d}"
                )));
            }
            if t.exp.len() != torus.rank() {
                return Err(TorusError::InvalidDegree {
                    expected: torus.rank(),
                    got: t.exp.len(),
                });
            }
            out.add_matrix_term(Degree(t.exp.clone()), m);
        }
        out.hc = HC1Element::from_json(torus, &json.hc1)?;
        if json.der.len() != torus.rank() {
            return Err(TorusError::InvalidDegree {
                expected: torus.rank(),
                got: json.der.len(),
            });
        }
        out.der = json.der.clone();
        Ok(out)
    }
}
