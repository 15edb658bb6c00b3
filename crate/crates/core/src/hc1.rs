//! Degree-1 cyclic homology of the quantum torus: the kernel of the
//! universal central extension of `sl_d(C_q)`.
//!
//! Elements are kept in a canonical normal form over the spanning symbols
//! `<t_i, t^r t_i^-1>` with `r` in `rad f`. A general pair `<t^a, t^b>`
//! reduces to these by
//!
//! ```text
//! <t^a, t^b> = sigma(a,b) * sum_i a_i <t_i, t^(a+b) t_i^-1>
//! ```
//!
//! and, for `r != 0`, the degree-`r` relation
//! `sum_i r_i <t_i, t^r t_i^-1> = 0` eliminates the pivot index
//! `min{i : r_i != 0}`, which matches the graded dimensions
//! `(0, n-1, n)` for `r` outside the radical, in it, or zero.
//!
//! [`bruteforce_dim`] recomputes those dimensions independently from the
//! defining subspace `J` spanned by `x@y + y@x` and
//! `xy@z + yz@x + zx@y`, by assembling all degree-`r` monomial tensors in
//! a finite window and row-reducing the relations exactly.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::Cyclotomic;
use crate::torus::{degree_box, Degree, Torus, TorusError};

/// An element of `HC_1(C_q)` in canonical coordinates: finitely many
/// `(generator index, radical degree) -> coefficient` entries where the
/// pivot index of each nonzero degree never occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct HC1Element {
    torus: Torus,
    terms: BTreeMap<(usize, Degree), Cyclotomic>,
}

fn pivot_index(r: &Degree) -> Option<usize> {
    r.0.iter().position(|&v| v != 0)
}

impl HC1Element {
    pub fn zero(torus: &Torus) -> Self {
        HC1Element { torus: torus.clone(), terms: BTreeMap::new() }
    }

    /// The central element `c_i = <t_i, t_i^-1>` (1-based index).
    pub fn central_generator(torus: &Torus, i: usize) -> Result<Self, TorusError> {
        Self::symbol(torus, i, Degree::zero(torus.rank()))
    }

    /// The canonicalized spanning symbol `<t_i, t^r t_i^-1>` (1-based `i`).
    pub fn symbol(torus: &Torus, i: usize, r: Degree) -> Result<Self, TorusError> {
        if i == 0 || i > torus.rank() {
            return Err(TorusError::IndexOutOfRange(i, torus.rank()));
        }
        if r.len() != torus.rank() {
            return Err(TorusError::InvalidDegree { expected: torus.rank(), got: r.len() });
        }
        if !torus.in_radf(&r) {
            return Err(TorusError::InvalidQMatrix(
                "symbol degree must lie in rad f".into(),
            ));
        }
        let mut out = Self::zero(torus);
        out.insert_symbol(i - 1, r, Cyclotomic::one());
        Ok(out)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates canonical terms as (1-based index, degree, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Degree, &Cyclotomic)> {
        self.terms.iter().map(|((i, r), c)| (i + 1, r, c))
    }

    fn add_raw(&mut self, key: (usize, Degree), coef: Cyclotomic) {
        if coef.is_zero() {
            return;
        }
        match self.terms.remove(&key) {
            None => {
                self.terms.insert(key, coef);
            }
            Some(old) => {
                let s = old.add(&coef);
                if !s.is_zero() {
                    self.terms.insert(key, s);
                }
            }
        }
    }

    /// Adds `coef * <t_(i0+1), t^r t^-1>` (0-based `i0`), eliminating the
    /// pivot index of `r` through the degree-`r` relation.
    fn insert_symbol(&mut self, i0: usize, r: Degree, coef: Cyclotomic) {
        if coef.is_zero() {
            return;
        }
        debug_assert!(self.torus.in_radf(&r));
        match pivot_index(&r) {
            None => self.add_raw((i0, r), coef),
            Some(p) if p == i0 => {
                // sum_k r_k <t_k, t^r t_k^-1> = 0 rewrites the pivot.
                let rp = r.0[p];
                for k in 0..r.len() {
                    if k == p || r.0[k] == 0 {
                        continue;
                    }
                    let ratio = BigRational::new(BigInt::from(-r.0[k]), BigInt::from(rp));
                    self.add_raw((k, r.clone()), coef.scale(&ratio));
                }
            }
            Some(_) => self.add_raw((i0, r), coef),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TorusError> {
        if self.torus != other.torus {
            return Err(TorusError::MismatchedTorus);
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_raw(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        HC1Element {
            torus: self.torus.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TorusError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Cyclotomic) -> Self {
        if s.is_zero() {
            return Self::zero(&self.torus);
        }
        HC1Element {
            torus: self.torus.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.mul(s))).collect(),
        }
    }

    /// `[d_i, -]` on central symbols: scales each degree-`r` term by `r_i`
    /// (1-based `i`).
    pub fn derivation_act(&self, i: usize) -> Result<Self, TorusError> {
        if i == 0 || i > self.torus.rank() {
            return Err(TorusError::IndexOutOfRange(i, self.torus.rank()));
        }
        let mut out = Self::zero(&self.torus);
        for ((j, r), c) in &self.terms {
            let factor = Cyclotomic::from_integer(r.0[i - 1]);
            out.add_raw((*j, r.clone()), c.mul(&factor));
        }
        Ok(out)
    }
}

/// Canonicalizes `c * <t^a, t^b>`: zero unless `a+b` lies in `rad f`,
/// otherwise the expansion of the pair through the spanning symbols.
pub fn normalize_pair(
    torus: &Torus,
    c: &Cyclotomic,
    a: &Degree,
    b: &Degree,
) -> Result<HC1Element, TorusError> {
    let n = torus.rank();
    if a.len() != n {
        return Err(TorusError::InvalidDegree { expected: n, got: a.len() });
    }
    if b.len() != n {
        return Err(TorusError::InvalidDegree { expected: n, got: b.len() });
    }
    let r = a + b;
    let mut out = HC1Element::zero(torus);
    if c.is_zero() || !torus.in_radf(&r) {
        return Ok(out);
    }
    let s = c.mul(&torus.sigma(a, b)?);
    for (i0, &ai) in a.0.iter().enumerate() {
        if ai != 0 {
            out.insert_symbol(i0, r.clone(), s.scale(&BigRational::from(BigInt::from(ai))));
        }
    }
    Ok(out)
}

/// Graded dimension of `HC_1(C_q)` at degree `r`.
pub fn graded_dim(torus: &Torus, r: &Degree) -> usize {
    if !torus.in_radf(r) {
        0
    } else if r.is_zero() {
        torus.rank()
    } else {
        torus.rank() - 1
    }
}

/// Independent dimension oracle for the degree-`r` piece of the cyclic
/// homology presented by `(C_q @ C_q) / J`.
///
/// The assembled span holds every tensor `t^a @ t^b` with `a + b = r` and
/// either side bounded by `D` in sup-norm (so the span is closed under
/// the swap `a <-> b`). Antisymmetry is folded into the indexing; the
/// cyclic relations with all three terms inside the span are row-reduced
/// over the cyclotomic field. Homology classes additionally have zero
/// total commutator: the map `x @ y -> [x, y]` kills every relation
/// (antisymmetry trivially, the cyclic one by `[xy,z] + [yz,x] + [zx,y]
/// = 0`), so it descends to the quotient, and the degree-`r` piece is its
/// kernel there. At radical degrees the map vanishes outright; elsewhere
/// it cuts one dimension. The result is an upper bound that is exact once
/// `D` is large enough for the degree in question.
pub fn bruteforce_dim(torus: &Torus, r: &Degree, support_bound: i64) -> usize {
    bruteforce_dim_impl(torus, r, support_bound)
}

/// Oracle over a batch of degrees; with the `parallel` feature the grid
/// fans out over rayon, and the output order always matches the input.
pub fn bruteforce_dims(torus: &Torus, rs: &[Degree], support_bound: i64) -> Vec<usize> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        rs.par_iter()
            .map(|r| bruteforce_dim_impl(torus, r, support_bound))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        bruteforce_dims_seq(torus, rs, support_bound)
    }
}

/// Sequential reference path for [`bruteforce_dims`].
pub fn bruteforce_dims_seq(torus: &Torus, rs: &[Degree], support_bound: i64) -> Vec<usize> {
    rs.iter()
        .map(|r| bruteforce_dim_impl(torus, r, support_bound))
        .collect()
}

#[derive(Clone, Copy)]
enum Slot {
    Basis(usize),
    Dead,
}

fn bruteforce_dim_impl(torus: &Torus, r: &Degree, support_bound: i64) -> usize {
    let n = torus.rank();
    assert_eq!(r.len(), n);
    let d = support_bound;

    // Support: first components with |a| <= D or |r - a| <= D, closed
    // under a <-> r - a.
    let mut support: BTreeSet<Degree> = BTreeSet::new();
    for a in degree_box(n, -d, d) {
        support.insert(r - &a);
        support.insert(a);
    }

    // Fold antisymmetry: t^a @ t^b = -t^b @ t^a pairs up a and r - a.
    let mut slots: BTreeMap<Degree, Slot> = BTreeMap::new();
    let mut basis_count = 0usize;
    for a in &support {
        let partner = r - a;
        if *a == partner {
            slots.insert(a.clone(), Slot::Dead);
        } else if partner < *a {
            continue; // handled when visiting the partner
        } else {
            slots.insert(a.clone(), Slot::Basis(basis_count));
            basis_count += 1;
        }
    }
    let resolved: BTreeMap<Degree, (usize, i8)> = support
        .iter()
        .filter_map(|a| {
            let partner = r - a;
            match slots.get(a) {
                Some(Slot::Basis(k)) => Some((a.clone(), (*k, 1))),
                Some(Slot::Dead) => None,
                None => match slots.get(&partner) {
                    Some(Slot::Basis(k)) => Some((a.clone(), (*k, -1))),
                    _ => None,
                },
            }
        })
        .collect();
    if basis_count == 0 {
        return 0;
    }

    // The commutator functional t^a @ t^b -> [t^a, t^b] is nonzero on the
    // span iff some live pair fails to commute; its kernel is the
    // homology piece, so all-commuting (radical) degrees keep the full
    // quotient and the rest lose one dimension.
    let commutator_nonzero = slots.iter().any(|(a, slot)| {
        matches!(slot, Slot::Basis(_)) && !torus.skew(a, &(r - a)).unwrap().is_one()
    });

    // Cyclic relations xy@z + yz@x + zx@y, parametrized so that the three
    // first components are (2r - p - s, p, s) with p, s in the support.
    let support_vec: Vec<Degree> = support.iter().cloned().collect();
    let two_r = r.scaled(2);
    let mut pivots: BTreeMap<usize, Vec<(usize, Cyclotomic)>> = BTreeMap::new();
    let mut rank = 0usize;
    let mut seen: HashSet<String> = HashSet::new();

    for p in &support_vec {
        for s in &support_vec {
            let c3 = &(&two_r - p) - s;
            if !support.contains(&c3) {
                continue;
            }
            let u = r - p;
            let v = r - s;
            let w = &(p + s) - r;
            let mut row: BTreeMap<usize, Cyclotomic> = BTreeMap::new();
            let push = |row: &mut BTreeMap<usize, Cyclotomic>, comp: &Degree, coef: Cyclotomic| {
                if let Some((idx, sign)) = resolved.get(comp) {
                    let signed = if *sign < 0 { coef.neg() } else { coef };
                    match row.remove(idx) {
                        None => {
                            if !signed.is_zero() {
                                row.insert(*idx, signed);
                            }
                        }
                        Some(old) => {
                            let sum = old.add(&signed);
                            if !sum.is_zero() {
                                row.insert(*idx, sum);
                            }
                        }
                    }
                }
            };
            push(&mut row, &c3, torus.sigma(&u, &v).unwrap());
            push(&mut row, p, torus.sigma(&v, &w).unwrap());
            push(&mut row, s, torus.sigma(&w, &u).unwrap());
            if row.is_empty() {
                continue;
            }

            // Normalize so the leading coefficient is 1, then dedup.
            let lead = row.iter().next().map(|(_, c)| c.clone()).unwrap();
            let inv = lead.inv().expect("leading coefficient nonzero");
            let norm: Vec<(usize, Cyclotomic)> = row
                .iter()
                .map(|(i, c)| (*i, c.mul(&inv).promote_for_key(torus.conductor())))
                .collect();
            let key = row_key(&norm);
            if !seen.insert(key) {
                continue;
            }

            if reduce_and_insert(norm, &mut pivots, &mut rank) && rank == basis_count {
                return 0;
            }
        }
    }
    basis_count - rank - usize::from(commutator_nonzero)
}

trait PromoteForKey {
    fn promote_for_key(&self, conductor: u64) -> Cyclotomic;
}

impl PromoteForKey for Cyclotomic {
    fn promote_for_key(&self, conductor: u64) -> Cyclotomic {
        let target = crate::cyclotomic::lcm_u64(self.conductor(), conductor);
        self.promote(target)
    }
}

fn row_key(row: &[(usize, Cyclotomic)]) -> String {
    let mut out = String::new();
    for (i, c) in row {
        out.push_str(&format!("{i}:{c};"));
    }
    out
}

/// Reduces a sparse row against the pivot table; inserts it (normalized)
/// when a fresh pivot column remains. Returns whether the rank grew.
fn reduce_and_insert(
    mut row: Vec<(usize, Cyclotomic)>,
    pivots: &mut BTreeMap<usize, Vec<(usize, Cyclotomic)>>,
    rank: &mut usize,
) -> bool {
    loop {
        let Some((lead, lead_c)) = row.first().cloned() else {
            return false;
        };
        match pivots.get(&lead) {
            Some(p) => {
                row = row_sub_scaled(&row, p, &lead_c);
            }
            None => {
                let inv = lead_c.inv().expect("nonzero pivot");
                let norm: Vec<(usize, Cyclotomic)> =
                    row.iter().map(|(i, c)| (*i, c.mul(&inv))).collect();
                pivots.insert(lead, norm);
                *rank += 1;
                return true;
            }
        }
    }
}

/// `row - factor * pivot`, both sorted sparse vectors; pivot is monic.
fn row_sub_scaled(
    row: &[(usize, Cyclotomic)],
    pivot: &[(usize, Cyclotomic)],
    factor: &Cyclotomic,
) -> Vec<(usize, Cyclotomic)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let mut i = 0;
    let mut j = 0;
    while i < row.len() || j < pivot.len() {
        if j == pivot.len() || (i < row.len() && row[i].0 < pivot[j].0) {
            out.push(row[i].clone());
            i += 1;
        } else if i == row.len() || pivot[j].0 < row[i].0 {
            let c = pivot[j].1.mul(factor).neg();
            if !c.is_zero() {
                out.push((pivot[j].0, c));
            }
            j += 1;
        } else {
            let c = row[i].1.sub(&pivot[j].1.mul(factor));
            if !c.is_zero() {
                out.push((row[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl fmt::Display for HC1Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, ((i, r), c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*<t{}, t^{} t{}^-1>", i + 1, r, i + 1)?;
        }
        Ok(())
    }
}

/// Wire format for `HC_1` elements; `i` is the 1-based generator index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HC1ElementJson {
    pub terms: Vec<HC1TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HC1TermJson {
    pub i: usize,
    pub r: Vec<i64>,
    pub coef: Cyclotomic,
}

impl HC1Element {
    pub fn to_json(&self) -> HC1ElementJson {
        HC1ElementJson {
            terms: self
                .terms
                .iter()
                .map(|((i, r), c)| HC1TermJson { i: i + 1, r: r.0.clone(), coef: c.clone() })
                .collect(),
        }
    }

    pub fn from_json(torus: &Torus, json: &HC1ElementJson) -> Result<Self, TorusError> {
        let mut out = Self::zero(torus);
        for t in &json.terms {
            let sym = Self::symbol(torus, t.i, Degree(t.r.clone()))?;
            out = out.add(&sym.scale(&t.coef))?;
        }
        Ok(out)
    }
}
