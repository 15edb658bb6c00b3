//! Finite-dimensional fiber quotients of the quantum torus and their
//! explicit matrix representations.
//!
//! Picking distinct nonzero scalars `a_jk` and the central powers
//! `N_j = min{N : t_j^N central}` defines `Q_j(t_j) = prod_k (t_j^(N_j) -
//! a_jk)` and the ideal they generate. The quotient splits across the
//! evaluation tuples `k = (k_1..k_n)` into fiber algebras with monomial
//! basis `t^e`, `0 <= e_j < N_j`, and the reduction `t_j^(N_j) = a_jk_j`.
//!
//! Evaluation values are restricted to roots of unity so every
//! eigenvalue needed by the Wedderburn splitting lies in a cyclotomic
//! field reached by explicit conductor enlargement; splittings stay
//! exact with no numerical eigensolvers.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::Cyclotomic;
use crate::linalg::{ColumnSolver, Matrix, Span};
use crate::toroidal::ToroidalElement;
use crate::torus::{Degree, Torus};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FiberError {
    #[error("invalid evaluation points: {0}")]
    InvalidPoints(String),
    #[error("point tuple out of range")]
    PointOutOfRange,
    #[error("fiber is not simple")]
    NotSimple,
    #[error("required root of unity is missing from the field")]
    FieldTooSmall,
    #[error("idempotent refinement did not reach a primitive idempotent")]
    RefinementFailed,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("element is outside the domain of the pullback (nonzero central or derivation part)")]
    NotInDomain,
}

/// Per-direction evaluation scalars `a_j1, ..., a_jM_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoints {
    per_j: Vec<Vec<Cyclotomic>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalPointsJson {
    pub points: Vec<Vec<Cyclotomic>>,
}

impl EvalPoints {
    pub fn new(torus: &Torus, per_j: Vec<Vec<Cyclotomic>>) -> Result<Self, FiberError> {
        if per_j.len() != torus.rank() {
            return Err(FiberError::InvalidPoints(format!(
                "need one point list per direction ({})",
                torus.rank()
            )));
        }
        for (j, pts) in per_j.iter().enumerate() {
            if pts.is_empty() {
                return Err(FiberError::InvalidPoints(format!(
                    "direction {} has no points",
                    j + 1
                )));
            }
            for (k, p) in pts.iter().enumerate() {
                if p.is_zero() {
                    return Err(FiberError::InvalidPoints("points must be nonzero".into()));
                }
                if p.order().is_err() {
                    return Err(FiberError::InvalidPoints(
                        "points must be roots of unity so the splitting stays exact".into(),
                    ));
                }
                for other in &pts[..k] {
                    if other == p {
                        return Err(FiberError::InvalidPoints(format!(
                            "repeated point in direction {}",
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(EvalPoints { per_j })
    }

    pub fn from_json(torus: &Torus, json: &EvalPointsJson) -> Result<Self, FiberError> {
        Self::new(torus, json.points.clone())
    }

    pub fn to_json(&self) -> EvalPointsJson {
        EvalPointsJson { points: self.per_j.clone() }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.per_j.iter().map(Vec::len).collect()
    }

    pub fn value(&self, j: usize, k: usize) -> &Cyclotomic {
        &self.per_j[j][k]
    }

    /// All index tuples in lexicographic order; `K = prod M_j` of them.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for pts in &self.per_j {
            let mut next = Vec::with_capacity(out.len() * pts.len());
            for prefix in &out {
                for k in 0..pts.len() {
                    let mut t = prefix.clone();
                    t.push(k);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
}

/// The fiber algebra at one evaluation tuple: an exact multiplication
/// table on the monomial basis.
pub struct FiberAlgebra {
    torus: Torus,
    dims: Vec<u64>,
    point: Vec<Cyclotomic>,
    dim: usize,
    strides: Vec<usize>,
    /// `table[a][b] = (scalar, index)` with `m_a m_b = scalar * m_index`.
    table: Vec<Vec<(Cyclotomic, usize)>>,
}

impl FiberAlgebra {
    pub fn build(torus: &Torus, pts: &EvalPoints, tuple: &[usize]) -> Result<Self, FiberError> {
        let n = torus.rank();
        if tuple.len() != n {
            return Err(FiberError::PointOutOfRange);
        }
        let counts = pts.counts();
        for (j, &k) in tuple.iter().enumerate() {
            if k >= counts[j] {
                return Err(FiberError::PointOutOfRange);
            }
        }
        let dims: Vec<u64> = (1..=n).map(|j| torus.min_central_power(j).unwrap()).collect();
        let point: Vec<Cyclotomic> = tuple
            .iter()
            .enumerate()
            .map(|(j, &k)| pts.value(j, k).clone())
            .collect();
        let dim: usize = dims.iter().map(|&v| v as usize).product();
        let mut strides = vec![0usize; n];
        let mut acc = 1usize;
        for j in (0..n).rev() {
            strides[j] = acc;
            acc *= dims[j] as usize;
        }
        let mut fiber = FiberAlgebra {
            torus: torus.clone(),
            dims,
            point,
            dim,
            strides,
            table: Vec::new(),
        };
        let mut table = Vec::with_capacity(dim);
        for a in 0..dim {
            let da = fiber.exps(a);
            let mut row = Vec::with_capacity(dim);
            for b in 0..dim {
                let db = fiber.exps(b);
                let s = torus.sigma(&da, &db).unwrap();
                let (red, idx) = fiber.reduce_degree(&(&da + &db));
                row.push((s.mul(&red), idx));
            }
            table.push(row);
        }
        fiber.table = table;
        Ok(fiber)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn central_powers(&self) -> &[u64] {
        &self.dims
    }

    pub fn point(&self) -> &[Cyclotomic] {
        &self.point
    }

    fn index(&self, e: &[u64]) -> usize {
        e.iter().zip(&self.strides).map(|(&v, &s)| v as usize * s).sum()
    }

    /// Exponent vector of a basis index as a degree.
    pub fn exps(&self, mut idx: usize) -> Degree {
        let n = self.dims.len();
        let mut out = vec![0i64; n];
        for j in (0..n).rev() {
            out[j] = (idx % self.dims[j] as usize) as i64;
            idx /= self.dims[j] as usize;
        }
        Degree(out)
    }

    /// Rewrites `t^c` as `scalar * m_idx` using `t_j^(N_j) = a_j`.
    pub fn reduce_degree(&self, c: &Degree) -> (Cyclotomic, usize) {
        let n = self.dims.len();
        let mut e = vec![0u64; n];
        let mut pows = vec![0i64; n];
        for j in 0..n {
            let nj = self.dims[j] as i64;
            let r = c.0[j].rem_euclid(nj);
            e[j] = r as u64;
            pows[j] = (c.0[j] - r) / nj;
        }
        // t^e * prod_j (t_j^(N_j))^(p_j) = S * t^c with S a sigma product;
        // central powers of a single generator need no internal cocycle.
        let mut scalar = Cyclotomic::one();
        let mut current = Degree(e.iter().map(|&v| v as i64).collect());
        for j in 0..n {
            if pows[j] == 0 {
                continue;
            }
            let step = Degree::unit(n, j).scaled(pows[j] * self.dims[j] as i64);
            scalar = scalar.mul(&self.torus.sigma(&current, &step).unwrap());
            current = &current + &step;
        }
        debug_assert_eq!(current, *c);
        let mut value = scalar.inv().expect("root of unity");
        for j in 0..n {
            if pows[j] != 0 {
                value = value.mul(&self.point[j].pow(pows[j]).expect("nonzero point"));
            }
        }
        (value, self.index(&e))
    }

    pub fn one(&self) -> Vec<Cyclotomic> {
        let mut v = vec![Cyclotomic::zero(); self.dim];
        v[0] = Cyclotomic::one();
        v
    }

    pub fn monomial(&self, idx: usize) -> Vec<Cyclotomic> {
        let mut v = vec![Cyclotomic::zero(); self.dim];
        v[idx] = Cyclotomic::one();
        v
    }

    pub fn mul(&self, x: &[Cyclotomic], y: &[Cyclotomic]) -> Vec<Cyclotomic> {
        let mut out = vec![Cyclotomic::zero(); self.dim];
        for (a, ca) in x.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in y.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let (s, idx) = &self.table[a][b];
                out[*idx] = out[*idx].add(&ca.mul(cb).mul(s));
            }
        }
        out
    }

    /// Matrix of left multiplication by `x`.
    pub fn left_mul_matrix(&self, x: &[Cyclotomic]) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for b in 0..self.dim {
            let col = self.mul(x, &self.monomial(b));
            for (i, v) in col.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, b, v);
                }
            }
        }
        m
    }

    /// Matrix of right multiplication by `x`.
    pub fn right_mul_matrix(&self, x: &[Cyclotomic]) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for b in 0..self.dim {
            let col = self.mul(&self.monomial(b), x);
            for (i, v) in col.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, b, v);
                }
            }
        }
        m
    }

    /// The image of `t_j` (already reduced when `N_j = 1`).
    fn generator(&self, j: usize) -> Vec<Cyclotomic> {
        let (scalar, idx) = self.reduce_degree(&Degree::unit(self.dims.len(), j));
        let mut v = vec![Cyclotomic::zero(); self.dim];
        v[idx] = scalar;
        v
    }

    fn is_scalar_multiple_of(&self, x: &[Cyclotomic], e: &[Cyclotomic]) -> Option<Cyclotomic> {
        // find a unit coordinate of e to fix the ratio
        let k = (0..self.dim).find(|&i| !e[i].is_zero())?;
        let ratio = x[k].mul(&e[k].inv().ok()?);
        let scaled: Vec<Cyclotomic> = e.iter().map(|v| v.mul(&ratio)).collect();
        if scaled.iter().zip(x).all(|(a, b)| a == b) {
            Some(ratio)
        } else {
            None
        }
    }
}

/// Wedderburn data for one fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WedderburnReport {
    pub center_dim: usize,
    pub blocks: usize,
    /// Common matrix size of the blocks, when uniform and square.
    pub size: Option<usize>,
    pub block_dims: Vec<usize>,
}

impl WedderburnReport {
    pub fn is_simple(&self) -> bool {
        self.center_dim == 1
    }
}

/// Center by a linear solve against the generators, then a complete
/// splitting of the center through Lagrange idempotents of central
/// monomials.
pub fn wedderburn(f: &FiberAlgebra) -> Result<WedderburnReport, FiberError> {
    let n = f.central_powers().len();
    // x central iff (L_j - R_j) x = 0 for every generator.
    let mut stacked = Matrix::zeros(n * f.dim(), f.dim());
    for j in 0..n {
        let g = f.generator(j);
        let l = f.left_mul_matrix(&g);
        let r = f.right_mul_matrix(&g);
        let d = l.sub(&r);
        for row in 0..f.dim() {
            for col in 0..f.dim() {
                stacked.set(j * f.dim() + row, col, d.get(row, col).clone());
            }
        }
    }
    let center = stacked.kernel_basis();
    let center_dim = center.len();

    // Split the identity along the center: central basis monomials each
    // satisfy a split squarefree power relation.
    let central_monomials: Vec<usize> = (0..f.dim())
        .filter(|&idx| f.torus.in_radf(&f.exps(idx)))
        .collect();
    if central_monomials.len() != center_dim {
        return Err(FiberError::InternalInconsistency(format!(
            "center solve found {center_dim} dimensions but {} central monomials",
            central_monomials.len()
        )));
    }

    let mut idempotents = vec![f.one()];
    for &zidx in &central_monomials {
        if zidx == 0 {
            continue; // identity splits nothing
        }
        let z = f.monomial(zidx);
        // Smallest K with z^K scalar; bounded by the fiber dimension.
        let mut k = 1usize;
        let mut zk = z.clone();
        let scalar = loop {
            if let Some(s) = f.is_scalar_multiple_of(&zk, &f.one()) {
                break s;
            }
            zk = f.mul(&zk, &z);
            k += 1;
            if k > f.dim() {
                return Err(FiberError::InternalInconsistency(
                    "central monomial has no scalar power".into(),
                ));
            }
        };
        let eigenvalues = split_values(&scalar, k as u64)?;
        let mut next = Vec::new();
        for e in &idempotents {
            for t in 0..eigenvalues.len() {
                let piece = lagrange_piece(f, e, &z, &eigenvalues, t)?;
                if piece.iter().any(|c| !c.is_zero()) {
                    next.push(piece);
                }
            }
        }
        idempotents = next;
    }

    let mut block_dims = Vec::with_capacity(idempotents.len());
    for e in &idempotents {
        let mut span = Span::new();
        for b in 0..f.dim() {
            span.insert(f.mul(&f.monomial(b), e));
        }
        block_dims.push(span.dim());
    }
    if block_dims.iter().sum::<usize>() != f.dim() {
        return Err(FiberError::InternalInconsistency(
            "central blocks do not fill the fiber".into(),
        ));
    }
    let sizes: Vec<Option<usize>> = block_dims.iter().map(|&d| exact_sqrt(d)).collect();
    let size = match sizes.split_first() {
        Some((first, rest)) if rest.iter().all(|s| s == first) => *first,
        _ => None,
    };
    if center_dim == 1 && size.is_none() {
        return Err(FiberError::InternalInconsistency(
            "simple fiber dimension is not a perfect square".into(),
        ));
    }
    Ok(WedderburnReport { center_dim, blocks: idempotents.len(), size, block_dims })
}

fn exact_sqrt(v: usize) -> Option<usize> {
    let r = (v as f64).sqrt().round() as usize;
    for c in r.saturating_sub(1)..=r + 1 {
        if c * c == v {
            return Some(c);
        }
    }
    None
}

/// The `K` roots of `x^K = scalar` for a root-of-unity scalar.
fn split_values(scalar: &Cyclotomic, k: u64) -> Result<Vec<Cyclotomic>, FiberError> {
    let base = scalar.nth_root(k).map_err(|_| FiberError::FieldTooSmall)?;
    (0..k)
        .map(|t| {
            let zk = Cyclotomic::root_of_unity(k, t as i64)
                .map_err(|_| FiberError::FieldTooSmall)?;
            Ok(base.mul(&zk))
        })
        .collect()
}

/// `e * prod_(r != t) (z - mu_r e) / (mu_t - mu_r)` for a central-in-the-
/// corner element `z` (the Lagrange projector onto the `mu_t` eigenspace).
fn lagrange_piece(
    f: &FiberAlgebra,
    e: &[Cyclotomic],
    z: &[Cyclotomic],
    values: &[Cyclotomic],
    t: usize,
) -> Result<Vec<Cyclotomic>, FiberError> {
    let mut acc = e.to_vec();
    for (r, mu) in values.iter().enumerate() {
        if r == t {
            continue;
        }
        let ze = f.mul(z, e);
        let shifted: Vec<Cyclotomic> = ze
            .iter()
            .zip(e)
            .map(|(a, b)| a.sub(&b.mul(mu)))
            .collect();
        let denom = values[t].sub(mu);
        let dinv = denom.inv().map_err(|_| {
            FiberError::InternalInconsistency("repeated eigenvalue in Lagrange split".into())
        })?;
        let factor: Vec<Cyclotomic> = shifted.iter().map(|v| v.mul(&dinv)).collect();
        acc = f.mul(&acc, &factor);
    }
    Ok(acc)
}

/// Images of the torus generators on an irreducible left module.
#[derive(Debug, Clone)]
pub struct MatrixRep {
    torus: Torus,
    dims: Vec<u64>,
    point: Vec<Cyclotomic>,
    size: usize,
    images: Vec<Matrix>,
}

impl MatrixRep {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn generator_image(&self, j: usize) -> &Matrix {
        &self.images[j]
    }

    pub fn point(&self) -> &[Cyclotomic] {
        &self.point
    }

    /// Image of the monomial `t^a = t_1^(a_1) ... t_n^(a_n)`.
    pub fn monomial_image(&self, a: &Degree) -> Matrix {
        let mut out = Matrix::identity(self.size);
        for (j, &aj) in a.0.iter().enumerate() {
            if aj == 0 {
                continue;
            }
            let m = if aj > 0 {
                self.images[j].pow(aj as u64)
            } else {
                // t_j^-1 = a_j^-1 t_j^(N_j - 1) in the fiber
                let inv = self.images[j]
                    .pow(self.dims[j] - 1)
                    .scale(&self.point[j].inv().expect("nonzero point"));
                inv.pow((-aj) as u64)
            };
            out = out.mul(&m);
        }
        out
    }

    fn verify(&self) -> Result<(), FiberError> {
        let n = self.images.len();
        for i in 0..n {
            for j in 0..n {
                let lhs = self.images[i].mul(&self.images[j]);
                let rhs = self.images[j].mul(&self.images[i]).scale(&self.torus.entry(i, j));
                if lhs != rhs {
                    return Err(FiberError::InternalInconsistency(format!(
                        "generator relation failed at ({i}, {j})"
                    )));
                }
            }
        }
        for j in 0..n {
            let p = self.images[j].pow(self.dims[j]);
            let want = Matrix::identity(self.size).scale(&self.point[j]);
            if p != want {
                return Err(FiberError::InternalInconsistency(format!(
                    "central power relation failed at {j}"
                )));
            }
        }
        Ok(())
    }
}

/// Explicit irreducible representation of a simple fiber: spectral
/// idempotents of the first generator by Lagrange interpolation, refined
/// along later generators when the first eigensplit is not primitive,
/// then the left module on the chosen idempotent.
pub fn irreducible_rep(f: &FiberAlgebra) -> Result<MatrixRep, FiberError> {
    let report = wedderburn(f)?;
    if !report.is_simple() {
        return Err(FiberError::NotSimple);
    }
    let size = report.size.expect("simple implies square");
    let n = f.central_powers().len();

    // Split along t_1.
    let a1 = &f.point()[0];
    let n1 = f.central_powers()[0];
    let values = split_values(a1, n1)?;
    let t1 = f.generator(0);
    let mut e = lagrange_piece(f, &f.one(), &t1, &values, 0)?;
    if e.iter().all(Cyclotomic::is_zero) {
        return Err(FiberError::InternalInconsistency(
            "vanishing spectral idempotent".into(),
        ));
    }

    // Refine inside the corner algebra while the left module is too big.
    for j in 1..n {
        if module_dim(f, &e) == size {
            break;
        }
        let o = f.torus.entry(0, j).order().expect("root of unity");
        let nj = f.central_powers()[j];
        debug_assert_eq!(nj % o, 0);
        let k = nj / o;
        if k <= 1 {
            continue;
        }
        // u = e t_j^o e commutes with t_1 and satisfies u^k = a_j e.
        let mut tjo = f.generator(j);
        let gj = tjo.clone();
        for _ in 1..o {
            tjo = f.mul(&tjo, &gj);
        }
        let u = f.mul(&f.mul(&e, &tjo), &e);
        if f.is_scalar_multiple_of(&u, &e).is_some() {
            continue;
        }
        let aj = &f.point()[j];
        let values = split_values(aj, k)?;
        for t in 0..values.len() {
            let piece = corner_lagrange(f, &e, &u, &values, t)?;
            if piece.iter().any(|c| !c.is_zero()) {
                e = piece;
                break;
            }
        }
    }
    let m = module_dim(f, &e);
    if m != size {
        return Err(FiberError::RefinementFailed);
    }

    // Basis of F e and the generator actions in coordinates.
    let mut span = Span::new();
    let mut chosen: Vec<Vec<Cyclotomic>> = Vec::new();
    for b in 0..f.dim() {
        let v = f.mul(&f.monomial(b), &e);
        if span.insert(v.clone()) {
            chosen.push(v);
        }
    }
    let basis = Matrix::from_rows(chosen.clone()).transpose();
    let solver = ColumnSolver::new(basis);
    let mut images = Vec::with_capacity(n);
    for j in 0..n {
        let g = f.generator(j);
        let mut img = Matrix::zeros(m, m);
        for (col, v) in chosen.iter().enumerate() {
            let w = f.mul(&g, v);
            let coords = solver.solve(&w).ok_or(FiberError::InternalInconsistency(
                "module basis is not invariant".into(),
            ))?;
            for (row, c) in coords.into_iter().enumerate() {
                if !c.is_zero() {
                    img.set(row, col, c);
                }
            }
        }
        images.push(img);
    }
    let rep = MatrixRep {
        torus: f.torus.clone(),
        dims: f.central_powers().to_vec(),
        point: f.point().to_vec(),
        size: m,
        images,
    };
    rep.verify()?;
    Ok(rep)
}

fn module_dim(f: &FiberAlgebra, e: &[Cyclotomic]) -> usize {
    let mut span = Span::new();
    for b in 0..f.dim() {
        span.insert(f.mul(&f.monomial(b), e));
    }
    span.dim()
}

/// Lagrange projector inside the corner algebra `e F e` whose unit is `e`.
fn corner_lagrange(
    f: &FiberAlgebra,
    e: &[Cyclotomic],
    u: &[Cyclotomic],
    values: &[Cyclotomic],
    t: usize,
) -> Result<Vec<Cyclotomic>, FiberError> {
    let mut acc = e.to_vec();
    for (r, mu) in values.iter().enumerate() {
        if r == t {
            continue;
        }
        let shifted: Vec<Cyclotomic> = u
            .iter()
            .zip(e)
            .map(|(a, b)| a.sub(&b.mul(mu)))
            .collect();
        let denom = values[t].sub(mu);
        let dinv = denom.inv().map_err(|_| {
            FiberError::InternalInconsistency("repeated eigenvalue in corner split".into())
        })?;
        let factor: Vec<Cyclotomic> = shifted.iter().map(|v| v.mul(&dinv)).collect();
        acc = f.mul(&acc, &factor);
    }
    Ok(acc)
}

/// Per-point summary of the full decomposition of `C_q / J`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberReport {
    pub k: Vec<usize>,
    pub dim: usize,
    pub center_dim: usize,
    pub blocks: usize,
    pub size: Option<usize>,
}

/// Wedderburn data for every evaluation tuple. Fibers are independent,
/// so the decomposition fans out with the `parallel` feature.
pub fn decompose_all(torus: &Torus, pts: &EvalPoints) -> Result<Vec<FiberReport>, FiberError> {
    let tuples = pts.tuples();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        tuples
            .par_iter()
            .map(|t| decompose_one(torus, pts, t))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        tuples.iter().map(|t| decompose_one(torus, pts, t)).collect()
    }
}

/// Sequential reference path for [`decompose_all`].
pub fn decompose_all_seq(
    torus: &Torus,
    pts: &EvalPoints,
) -> Result<Vec<FiberReport>, FiberError> {
    pts.tuples()
        .iter()
        .map(|t| decompose_one(torus, pts, t))
        .collect()
}

fn decompose_one(
    torus: &Torus,
    pts: &EvalPoints,
    tuple: &[usize],
) -> Result<FiberReport, FiberError> {
    let f = FiberAlgebra::build(torus, pts, tuple)?;
    let w = wedderburn(&f)?;
    Ok(FiberReport {
        k: tuple.to_vec(),
        dim: f.dim(),
        center_dim: w.center_dim,
        blocks: w.blocks,
        size: w.size,
    })
}

/// Irreducible representations at every evaluation tuple.
pub fn all_reps(torus: &Torus, pts: &EvalPoints) -> Result<Vec<MatrixRep>, FiberError> {
    pts.tuples()
        .iter()
        .map(|t| irreducible_rep(&FiberAlgebra::build(torus, pts, t)?))
        .collect()
}

/// The pullback homomorphism on the matrix part: per evaluation tuple,
/// `sum_a X_a (x) rep_k(t^a)` as a `(d * size)` square matrix. Defined on
/// elements with no central and no derivation part.
pub fn pi_tilde(x: &ToroidalElement, reps: &[MatrixRep]) -> Result<Vec<Matrix>, FiberError> {
    if !x.hc_part().is_zero() || x.der_part().iter().any(|c| !c.is_zero()) {
        return Err(FiberError::NotInDomain);
    }
    let d = x.matrix_rank();
    reps.iter()
        .map(|rep| {
            let mut acc = Matrix::zeros(d * rep.size(), d * rep.size());
            for (a, m) in x.matrix_terms() {
                acc = acc.add(&m.kron(&rep.monomial_image(a)));
            }
            Ok(acc)
        })
        .collect()
}

impl fmt::Debug for FiberAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiberAlgebra")
            .field("dims", &self.dims)
            .field("dim", &self.dim)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::torus::QMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn t1() -> Torus {
        QMatrix::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn ones(torus: &Torus) -> EvalPoints {
        EvalPoints::new(
            torus,
            vec![vec![Cyclotomic::one()]; torus.rank()],
        )
        .unwrap()
    }

    fn t1_fiber() -> FiberAlgebra {
        let q = t1();
        let pts = ones(&q);
        FiberAlgebra::build(&q, &pts, &[0, 0]).unwrap()
    }

    #[test]
    fn t1_fiber_shape() {
        let f = t1_fiber();
        assert_eq!(f.dim(), 4);
        assert_eq!(f.central_powers(), &[2, 2]);
    }

    #[test]
    fn fiber_relations() {
        let f = t1_fiber();
        let t1g = f.generator(0);
        let t2g = f.generator(1);
        // t1 t2 = -t2 t1
        let lhs = f.mul(&t1g, &t2g);
        let rhs: Vec<Cyclotomic> = f.mul(&t2g, &t1g).iter().map(Cyclotomic::neg).collect();
        assert_eq!(lhs, rhs);
        // t1^2 = 1
        assert_eq!(f.mul(&t1g, &t1g), f.one());
    }

    #[test]
    fn fiber_associativity_spot_check() {
        let q = t1();
        let pts = EvalPoints::new(
            &q,
            vec![
                vec![Cyclotomic::one()],
                vec![Cyclotomic::root_of_unity(3, 1).unwrap()],
            ],
        )
        .unwrap();
        let f = FiberAlgebra::build(&q, &pts, &[0, 0]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(51);
        for _ in 0..20 {
            let x: Vec<Cyclotomic> =
                (0..f.dim()).map(|_| sample::cyclotomic(&mut rng, 12)).collect();
            let y: Vec<Cyclotomic> =
                (0..f.dim()).map(|_| sample::cyclotomic(&mut rng, 12)).collect();
            let z: Vec<Cyclotomic> =
                (0..f.dim()).map(|_| sample::cyclotomic(&mut rng, 12)).collect();
            assert_eq!(f.mul(&f.mul(&x, &y), &z), f.mul(&x, &f.mul(&y, &z)));
        }
    }

    #[test]
    fn t1_wedderburn() {
        let w = wedderburn(&t1_fiber()).unwrap();
        assert_eq!(w.center_dim, 1);
        assert_eq!(w.blocks, 1);
        assert_eq!(w.size, Some(2));
    }

    #[test]
    fn zeta3_wedderburn() {
        let q = QMatrix::new(2, 3, vec![vec![0, 1], vec![2, 0]]).unwrap();
        let f = FiberAlgebra::build(&q, &ones(&q), &[0, 0]).unwrap();
        assert_eq!(f.dim(), 9);
        let w = wedderburn(&f).unwrap();
        assert_eq!((w.center_dim, w.blocks, w.size), (1, 1, Some(3)));
    }

    #[test]
    fn commutative_wedderburn_degenerates() {
        let q = QMatrix::new(2, 1, vec![vec![0, 0], vec![0, 0]]).unwrap();
        let f = FiberAlgebra::build(&q, &ones(&q), &[0, 0]).unwrap();
        assert_eq!(f.dim(), 1);
        let w = wedderburn(&f).unwrap();
        assert_eq!((w.center_dim, w.blocks, w.size), (1, 1, Some(1)));

        // two points per direction: 4 one-dimensional fibers
        let i = Cyclotomic::root_of_unity(4, 1).unwrap();
        let pts = EvalPoints::new(
            &q,
            vec![
                vec![Cyclotomic::one(), i.clone()],
                vec![Cyclotomic::one(), i],
            ],
        )
        .unwrap();
        let reports = decompose_all(&q, &pts).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.dim == 1 && r.size == Some(1)));
    }

    #[test]
    fn partially_degenerate_fiber_splits_into_blocks() {
        // q12 = q13 = -1, q23 = 1: the fiber has a two-dimensional
        // center and splits into two 2x2 blocks.
        let q = QMatrix::new(
            3,
            2,
            vec![vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]],
        )
        .unwrap();
        let f = FiberAlgebra::build(&q, &ones(&q), &[0, 0, 0]).unwrap();
        assert_eq!(f.dim(), 8);
        let w = wedderburn(&f).unwrap();
        assert_eq!(w.center_dim, 2);
        assert_eq!(w.blocks, 2);
        assert_eq!(w.size, Some(2));
        assert_eq!(w.block_dims, vec![4, 4]);
        assert!(irreducible_rep(&f).unwrap_err() == FiberError::NotSimple);
    }

    #[test]
    fn t1_irreducible_rep() {
        let f = t1_fiber();
        let rep = irreducible_rep(&f).unwrap();
        assert_eq!(rep.size(), 2);
        // trace of the image of t^(1,1) vanishes
        let m = rep.monomial_image(&Degree(vec![1, 1]));
        assert!(m.trace().is_zero());
        // and the image of t1 has eigenvalues +-1: trace 0, square 1
        let g1 = rep.generator_image(0);
        assert!(g1.trace().is_zero());
        assert_eq!(g1.pow(2), Matrix::identity(2));
    }

    #[test]
    fn rep_with_multiple_points_per_direction() {
        let q = t1();
        let minus = Cyclotomic::from_integer(-1);
        let pts = EvalPoints::new(
            &q,
            vec![
                vec![Cyclotomic::one(), minus.clone()],
                vec![Cyclotomic::one(), minus],
            ],
        )
        .unwrap();
        let reports = decompose_all(&q, &pts).unwrap();
        assert_eq!(reports.len(), 4);
        let total: usize = reports.iter().map(|r| r.dim).sum();
        assert_eq!(total, 16); // prod M_j N_j
        for rep in all_reps(&q, &pts).unwrap() {
            assert_eq!(rep.size(), 2);
        }
        assert_eq!(
            decompose_all_seq(&q, &pts).unwrap().len(),
            reports.len()
        );
    }

    #[test]
    fn refinement_reaches_primitive_idempotent() {
        // Two commuting 2x2 blocks inside rank 4: t1's eigensplit alone
        // is not primitive; the refinement walks to t3.
        let q = QMatrix::new(
            4,
            4,
            vec![
                vec![0, 2, 0, 0],
                vec![2, 0, 0, 0],
                vec![0, 0, 0, 1],
                vec![0, 0, 3, 0],
            ],
        )
        .unwrap();
        let f = FiberAlgebra::build(&q, &ones(&q), &[0, 0, 0, 0]).unwrap();
        assert_eq!(f.dim(), 64);
        let rep = irreducible_rep(&f).unwrap();
        assert_eq!(rep.size(), 8);
    }

    #[test]
    fn invalid_points_rejected() {
        let q = t1();
        let one = Cyclotomic::one;
        assert!(matches!(
            EvalPoints::new(&q, vec![vec![one(), one()], vec![one()]]),
            Err(FiberError::InvalidPoints(_))
        ));
        assert!(matches!(
            EvalPoints::new(&q, vec![vec![Cyclotomic::zero()], vec![one()]]),
            Err(FiberError::InvalidPoints(_))
        ));
        assert!(matches!(
            EvalPoints::new(&q, vec![vec![Cyclotomic::from_integer(2)], vec![one()]]),
            Err(FiberError::InvalidPoints(_))
        ));
    }

    #[test]
    fn pi_tilde_is_a_homomorphism() {
        let q = t1();
        let reps = all_reps(&q, &ones(&q)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(52);
        let mut central_pairs = 0;
        for trial in 0..60 {
            let (x, y) = if trial % 3 == 0 {
                let (x, y) = sample::central_producing_pair(&mut rng, &q, 2, 1);
                (x, y)
            } else {
                (
                    sample::toroidal_matrix_only(&mut rng, &q, 2, 2),
                    sample::toroidal_matrix_only(&mut rng, &q, 2, 2),
                )
            };
            let br = x.bracket(&y).unwrap();
            if !br.hc_part().is_zero() {
                central_pairs += 1;
            }
            let br_mat = br.matrix_only();
            let lhs = pi_tilde(&br_mat, &reps).unwrap();
            let px = pi_tilde(&x, &reps).unwrap();
            let py = pi_tilde(&y, &reps).unwrap();
            for ((l, a), b) in lhs.iter().zip(&px).zip(&py) {
                let rhs = a.mul(b).sub(&b.mul(a));
                assert_eq!(*l, rhs);
            }
        }
        assert!(central_pairs >= 10, "want central-term coverage, got {central_pairs}");
    }

    #[test]
    fn pi_tilde_domain_check() {
        let q = t1();
        let reps = all_reps(&q, &ones(&q)).unwrap();
        let c = ToroidalElement::central(&q, 2, 1).unwrap();
        assert_eq!(pi_tilde(&c, &reps).unwrap_err(), FiberError::NotInDomain);
        let d = ToroidalElement::derivation(&q, 2, 1);
        assert_eq!(pi_tilde(&d, &reps).unwrap_err(), FiberError::NotInDomain);
    }
}
