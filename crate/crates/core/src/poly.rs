//! Exact multivariate polynomials over graded generator families.
//!
//! A `Ring` fixes an ordered list of variables, each tagged with a generator
//! family, an index, and an *alphabet* (0 for the base/coefficient alphabet;
//! positive alphabets distinguish tensor-factor copies in doubled or
//! many-slot rings). A `Mono` is an exponent vector over those variables,
//! with its internal degree `u` and motivic weight `w` cached. A `Poly<C>`
//! is a finite sum of monomials with nonzero scalar coefficients, stored in
//! a `BTreeMap` so that iteration order — and hence every downstream
//! artifact — is canonical: graded by `u`, then lexicographic on exponents
//! with variables in ring order (family order as listed, index ascending).
//!
//! Rings come in three kinds: `Free` (no relations), `MotRelation`
//! (tau_n^2 = tau * xi_{n+1}), and `MotExterior` (tau_n^2 = 0).

use crate::error::{Error, Result};
use crate::grading::Family;
use crate::rat::is_two_local;
use num::rational::BigRational;
use num::traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Coefficient scalars: exact field (or 2-local ring) elements.
pub trait Scalar: Clone + Eq + Ord + std::fmt::Debug {
    fn one() -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Sum, with `None` meaning the coefficients cancelled.
    fn add(&self, other: &Self) -> Option<Self>;
    fn is_one(&self) -> bool;
    fn display(&self) -> String {
        format!("{self:?}")
    }
}

/// The field with two elements; only the nonzero value is ever stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct F2;

impl Scalar for F2 {
    fn one() -> Self {
        F2
    }
    fn neg(&self) -> Self {
        F2
    }
    fn mul(&self, _other: &Self) -> Self {
        F2
    }
    fn add(&self, _other: &Self) -> Option<Self> {
        None // 1 + 1 = 0
    }
    fn is_one(&self) -> bool {
        true
    }
}

/// Exact rationals (the 2-locality of cobar coefficients is asserted at the
/// points the contracts require it, not in the scalar type).
pub type Rat = BigRational;

impl Scalar for Rat {
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add(&self, other: &Self) -> Option<Self> {
        let s = self + other;
        if s.is_zero() {
            None
        } else {
            Some(s)
        }
    }
    fn is_one(&self) -> bool {
        <BigRational as One>::is_one(self)
    }
    fn display(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// One ring variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub family: Family,
    pub index: u32,
    pub alphabet: u8,
    pub u: i32,
    pub w: i32,
    pub t: i32,
}

impl VarInfo {
    pub fn display(&self) -> String {
        let base = format!("{}{}", self.family.symbol(), self.index);
        let base = if self.family == Family::TauBase {
            "tau".to_string()
        } else {
            base
        };
        if self.alphabet <= 1 {
            base
        } else {
            format!("{base}@{}", self.alphabet)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingKind {
    Free,
    /// tau_n^2 = tau * xi_{n+1}, applied within each alphabet (the tau on
    /// the right is the alphabet-0 ground variable).
    MotRelation,
    /// tau_n^2 = 0.
    MotExterior,
}

/// An ordered polynomial ring.
#[derive(Debug)]
pub struct Ring {
    pub name: String,
    pub vars: Vec<VarInfo>,
    pub kind: RingKind,
    pub max_u: i32,
    by_key: HashMap<(Family, u32, u8), usize>,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.vars == other.vars && self.kind == other.kind
    }
}
impl Eq for Ring {}

impl Ring {
    /// Build a ring on the given `(family, alphabet)` blocks. Within each
    /// block, generator indices run ascending while the generator's internal
    /// degree stays within `max_u` (`TauBase` contributes its single
    /// degree-0 variable).
    pub fn new(
        name: &str,
        blocks: &[(Family, u8)],
        max_u: i32,
        kind: RingKind,
    ) -> Arc<Ring> {
        let mut vars = Vec::new();
        for &(family, alphabet) in blocks {
            if family == Family::TauBase {
                vars.push(VarInfo {
                    family,
                    index: 0,
                    alphabet,
                    u: 0,
                    w: -1,
                    t: 0,
                });
                continue;
            }
            let n = family.count_through(max_u);
            for k in 0..n {
                let index = family.min_index() + k;
                vars.push(VarInfo {
                    family,
                    index,
                    alphabet,
                    u: family.u_degree(index),
                    w: family.w_degree(index),
                    t: family.t_degree(),
                });
            }
        }
        let by_key = vars
            .iter()
            .enumerate()
            .map(|(i, v)| ((v.family, v.index, v.alphabet), i))
            .collect();
        Arc::new(Ring {
            name: name.to_string(),
            vars,
            kind,
            max_u,
            by_key,
        })
    }

    pub fn var_position(&self, family: Family, index: u32, alphabet: u8) -> Option<usize> {
        self.by_key.get(&(family, index, alphabet)).copied()
    }

    /// The empty exponent vector.
    pub fn mono_one(&self) -> Mono {
        Mono {
            u: 0,
            w: 0,
            exps: vec![0u8; self.vars.len()].into_boxed_slice(),
        }
    }

    pub fn mono_var(&self, family: Family, index: u32, alphabet: u8) -> Result<Mono> {
        let pos = self.var_position(family, index, alphabet).ok_or_else(|| {
            Error::DegreeOutOfRange(format!(
                "ring {} has no variable {}{}@{}",
                self.name,
                family.symbol(),
                index,
                alphabet
            ))
        })?;
        let mut m = self.mono_one();
        m.exps[pos] = 1;
        let v = &self.vars[pos];
        m.u = v.u;
        m.w = v.w;
        Ok(m)
    }

    /// Multiply two monomials, applying the ring's relations.
    /// `Ok(None)` means the product is zero (exterior relation).
    pub fn mono_mul(&self, a: &Mono, b: &Mono) -> Result<Option<Mono>> {
        debug_assert_eq!(a.exps.len(), self.vars.len());
        debug_assert_eq!(b.exps.len(), self.vars.len());
        let mut exps = vec![0u8; self.vars.len()].into_boxed_slice();
        for i in 0..exps.len() {
            let sum = a.exps[i] as u16 + b.exps[i] as u16;
            if sum > u8::MAX as u16 {
                return Err(Error::Other(format!(
                    "exponent overflow on {} in ring {}",
                    self.vars[i].display(),
                    self.name
                )));
            }
            exps[i] = sum as u8;
        }
        let mut m = Mono {
            u: a.u + b.u,
            w: a.w + b.w,
            exps,
        };
        match self.kind {
            RingKind::Free => {}
            RingKind::MotExterior => {
                for (i, v) in self.vars.iter().enumerate() {
                    if v.family == Family::TauFam && m.exps[i] >= 2 {
                        return Ok(None);
                    }
                }
            }
            RingKind::MotRelation => {
                for i in 0..self.vars.len() {
                    let v = self.vars[i].clone();
                    if v.family == Family::TauFam && m.exps[i] >= 2 {
                        let pairs = m.exps[i] / 2;
                        m.exps[i] %= 2;
                        let tau_pos =
                            self.var_position(Family::TauBase, 0, 0).ok_or_else(|| {
                                Error::Other(format!(
                                    "ring {} applies the motivic relation but has no tau",
                                    self.name
                                ))
                            })?;
                        let xi_pos = self
                            .var_position(Family::Xi, v.index + 1, v.alphabet)
                            .ok_or_else(|| {
                                Error::DegreeOutOfRange(format!(
                                    "motivic relation needs xi{}@{} beyond ring {} bound",
                                    v.index + 1,
                                    v.alphabet,
                                    self.name
                                ))
                            })?;
                        let t = m.exps[tau_pos] as u16 + pairs as u16;
                        let x = m.exps[xi_pos] as u16 + pairs as u16;
                        if t > u8::MAX as u16 || x > u8::MAX as u16 {
                            return Err(Error::Other("exponent overflow in relation".into()));
                        }
                        m.exps[tau_pos] = t as u8;
                        m.exps[xi_pos] = x as u8;
                        // (u, w) are preserved by tau_n^2 = tau * xi_{n+1}.
                    }
                }
            }
        }
        Ok(Some(m))
    }
}

/// A monomial: exponents over a ring's variables, with graded data cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono {
    pub u: i32,
    pub w: i32,
    pub exps: Box<[u8]>,
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Graded, then lexicographic from the first (lowest-index) variable
        // with the larger exponent sorting earlier: z1^3 precedes z2.
        self.u
            .cmp(&other.u)
            .then_with(|| other.exps.cmp(&self.exps))
    }
}
impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Mono {
    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Novikov weight: total exponent over `q`/`v` variables.
    pub fn t_count(&self, ring: &Ring) -> i32 {
        self.exps
            .iter()
            .zip(&ring.vars)
            .map(|(&e, v)| e as i32 * v.t)
            .sum()
    }

    /// Total exponent of one family (any index) in one alphabet.
    pub fn family_degree(&self, ring: &Ring, family: Family, alphabet: u8) -> i32 {
        self.exps
            .iter()
            .zip(&ring.vars)
            .filter(|(_, v)| v.family == family && v.alphabet == alphabet)
            .map(|(&e, _)| e as i32)
            .sum()
    }

    pub fn exp_of(&self, ring: &Ring, family: Family, index: u32, alphabet: u8) -> u8 {
        ring.var_position(family, index, alphabet)
            .map(|p| self.exps[p])
            .unwrap_or(0)
    }

    /// Extract the part of this monomial lying in `alphabet`, re-expressed in
    /// `target` (which must contain each variable at `target_alphabet`).
    pub fn project(
        &self,
        ring: &Ring,
        alphabet: u8,
        target: &Ring,
        target_alphabet: u8,
    ) -> Result<Mono> {
        let mut m = target.mono_one();
        for (i, v) in ring.vars.iter().enumerate() {
            if v.alphabet != alphabet || self.exps[i] == 0 {
                continue;
            }
            let pos = target
                .var_position(v.family, v.index, target_alphabet)
                .ok_or_else(|| {
                    Error::Other(format!(
                        "projection: {} missing in ring {}",
                        v.display(),
                        target.name
                    ))
                })?;
            m.exps[pos] = self.exps[i];
            m.u += v.u * self.exps[i] as i32;
            m.w += v.w * self.exps[i] as i32;
        }
        Ok(m)
    }

    pub fn display(&self, ring: &Ring) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, v) in ring.vars.iter().enumerate() {
            match self.exps[i] {
                0 => {}
                1 => parts.push(v.display()),
                e => parts.push(format!("{}^{}", v.display(), e)),
            }
        }
        parts.join("*")
    }
}

/// A polynomial: canonical sparse sum of monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly<C: Scalar> {
    pub ring: Arc<Ring>,
    pub terms: BTreeMap<Mono, C>,
}

impl<C: Scalar> Poly<C> {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        Poly {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(ring.mono_one(), C::one());
        Poly {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn constant(ring: &Arc<Ring>, c: C) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(ring.mono_one(), c);
        Poly {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn from_mono(ring: &Arc<Ring>, m: Mono) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, C::one());
        Poly {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn gen(ring: &Arc<Ring>, family: Family, index: u32) -> Result<Self> {
        Ok(Self::from_mono(ring, ring.mono_var(family, index, 0)?))
    }

    pub fn gen_in(ring: &Arc<Ring>, family: Family, index: u32, alphabet: u8) -> Result<Self> {
        Ok(Self::from_mono(ring, ring.mono_var(family, index, alphabet)?))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: C) {
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                match e.get().add(&c) {
                    Some(s) => {
                        *e.get_mut() = s;
                    }
                    None => {
                        e.remove();
                    }
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ring, other.ring);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Poly::zero(&self.ring);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.mul(c));
        }
        out
    }

    pub fn mul_mono(&self, m: &Mono, c: &C) -> Result<Self> {
        let mut out = Poly::zero(&self.ring);
        for (a, ca) in &self.terms {
            if let Some(prod) = self.ring.mono_mul(a, m)? {
                out.add_term(prod, ca.mul(c));
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        debug_assert_eq!(self.ring, other.ring);
        let mut out = Poly::zero(&self.ring);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(prod) = self.ring.mono_mul(a, b)? {
                    out.add_term(prod, ca.mul(cb));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut out = Poly::one(&self.ring);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Internal degree if homogeneous, error otherwise.
    pub fn homogeneous_u(&self) -> Result<Option<i32>> {
        let mut u = None;
        for m in self.terms.keys() {
            match u {
                None => u = Some(m.u),
                Some(v) if v == m.u => {}
                Some(v) => {
                    return Err(Error::Grading(format!(
                        "mixed internal degrees {v} and {} in one polynomial",
                        m.u
                    )))
                }
            }
        }
        Ok(u)
    }

    /// Apply a ring homomorphism: each variable goes to `var_image`, each
    /// coefficient through `coeff_map` (returning `None` to kill it, e.g.
    /// reduction mod 2 of an even integer).
    pub fn eval_hom<C2: Scalar>(
        &self,
        target: &Arc<Ring>,
        mut var_image: impl FnMut(&VarInfo) -> Result<Poly<C2>>,
        mut coeff_map: impl FnMut(&C) -> Result<Option<C2>>,
    ) -> Result<Poly<C2>> {
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mapped = match coeff_map(c)? {
                Some(v) => v,
                None => continue,
            };
            let mut term = Poly::constant(target, mapped);
            for (i, v) in self.ring.vars.iter().enumerate() {
                if m.exps[i] == 0 {
                    continue;
                }
                let img = var_image(v)?;
                term = term.mul(&img.pow(m.exps[i] as u32)?)?;
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let coeff = display_coeff(c);
            let part = if m.is_one() {
                if coeff.is_empty() {
                    "1".to_string()
                } else {
                    coeff
                }
            } else if coeff.is_empty() {
                m.display(&self.ring)
            } else {
                format!("{}*{}", coeff, m.display(&self.ring))
            };
            parts.push(part);
        }
        parts.join(" + ")
    }
}

fn display_coeff<C: Scalar>(c: &C) -> String {
    if c.is_one() {
        String::new()
    } else {
        c.display()
    }
}

impl Poly<Rat> {
    /// True if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.denom().is_one())
    }

    /// True if every coefficient has odd denominator.
    pub fn is_two_local(&self) -> bool {
        self.terms.values().all(is_two_local)
    }

    /// Reduce an integral polynomial mod 2 into an F2 polynomial over
    /// `target` (same variables looked up by (family, index, alphabet)).
    pub fn reduce_mod2(&self, target: &Arc<Ring>) -> Result<Poly<F2>> {
        if !self.is_integral() {
            return Err(Error::NonIntegral(format!(
                "cannot reduce mod 2: {}",
                self.display()
            )));
        }
        let two: num::BigInt = 2.into();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            if (c.numer() % &two).is_zero() {
                continue;
            }
            let mut mono = target.mono_one();
            for (i, v) in self.ring.vars.iter().enumerate() {
                if m.exps[i] == 0 {
                    continue;
                }
                let pos = target
                    .var_position(v.family, v.index, v.alphabet)
                    .ok_or_else(|| {
                        Error::Other(format!(
                            "mod-2 target ring {} missing {}",
                            target.name,
                            v.display()
                        ))
                    })?;
                mono.exps[pos] = m.exps[i];
            }
            mono.u = m.u;
            mono.w = m.w;
            out.add_term(mono, F2);
        }
        Ok(out)
    }

    pub fn from_int(ring: &Arc<Ring>, n: i64) -> Self {
        if n == 0 {
            return Poly::zero(ring);
        }
        Poly::constant(ring, BigRational::from(num::BigInt::from(n)))
    }
}

/// Enumerate the canonical monomial basis of a ring in internal degree `u`,
/// optionally with exactly `t` Novikov factors (total `q`/`v` exponent).
///
/// `TauBase` variables never appear (tau powers belong to coefficients, not
/// basis monomials); in relation/exterior rings, `TauFam` exponents are
/// capped at 1 so only reduced monomials are produced. Results are sorted in
/// the canonical monomial order.
pub fn enumerate_basis(ring: &Arc<Ring>, u: i32, t: Option<i32>) -> Result<Vec<Mono>> {
    crate::grading::check_u_bound(u, ring.max_u)?;
    let mut out = Vec::new();
    let mut exps = vec![0u8; ring.vars.len()];
    // Recurse over variables in ring order; prune by remaining degree.
    fn rec(
        ring: &Ring,
        pos: usize,
        u_left: i32,
        t_left: Option<i32>,
        exps: &mut Vec<u8>,
        out: &mut Vec<Mono>,
    ) {
        if pos == ring.vars.len() {
            if u_left == 0 && t_left.unwrap_or(0) == 0 {
                let mut m = Mono {
                    u: 0,
                    w: 0,
                    exps: exps.clone().into_boxed_slice(),
                };
                for (i, v) in ring.vars.iter().enumerate() {
                    m.u += v.u * exps[i] as i32;
                    m.w += v.w * exps[i] as i32;
                }
                out.push(m);
            }
            return;
        }
        let v = &ring.vars[pos];
        if v.family == Family::TauBase {
            rec(ring, pos + 1, u_left, t_left, exps, out);
            return;
        }
        let mut cap = if v.u > 0 { u_left / v.u } else { i32::MAX };
        if matches!(ring.kind, RingKind::MotRelation | RingKind::MotExterior)
            && v.family == Family::TauFam
        {
            cap = cap.min(1);
        }
        if let Some(t) = t_left {
            if v.t > 0 {
                cap = cap.min(t);
            }
        } else if v.u == 0 {
            // Degree-0 generator without a t-budget would enumerate forever.
            cap = 0;
        }
        let cap = cap.clamp(0, u8::MAX as i32);
        for e in 0..=cap {
            exps[pos] = e as u8;
            let t_next = t_left.map(|t| t - e * v.t);
            if t_next.map_or(false, |t| t < 0) {
                break;
            }
            rec(ring, pos + 1, u_left - e * v.u, t_next, exps, out);
        }
        exps[pos] = 0;
    }
    rec(ring, 0, u, t, &mut exps, &mut out);
    out.sort();
    Ok(out)
}

/// Standard ring constructors used throughout the crate.
pub mod rings {
    use super::*;

    /// F2[z1, z2, ...] — the dual of the squares subalgebra.
    pub fn p_ring(max_u: i32) -> Arc<Ring> {
        Ring::new("P", &[(Family::Zeta, 0)], max_u, RingKind::Free)
    }

    /// F2-basis ring for the coefficient comodule Q = F2[q0, q1, ...].
    pub fn q_ring(max_u: i32) -> Arc<Ring> {
        Ring::new("Q", &[(Family::Q, 0)], max_u, RingKind::Free)
    }

    /// Z(2)[v1, v2, ...] — Hazewinkel coefficient ring (rational scalars).
    pub fn v_ring(max_u: i32) -> Arc<Ring> {
        Ring::new("V", &[(Family::V, 0)], max_u, RingKind::Free)
    }

    /// Slot template for the Hopf-algebroid cobar complex: t-monomials.
    pub fn t_ring(max_u: i32) -> Arc<Ring> {
        Ring::new("T", &[(Family::T, 0)], max_u, RingKind::Free)
    }

    /// F2[tau] — motivic ground coefficients.
    pub fn tau_ring() -> Arc<Ring> {
        Ring::new("M2", &[(Family::TauBase, 0)], 0, RingKind::Free)
    }

    /// Motivic dual Steenrod slot template:
    /// F2[tau][xi1, ...] tensor (tau0, tau1, ...) / (tau_n^2 = tau xi_{n+1}).
    pub fn amot_ring(max_u: i32) -> Arc<Ring> {
        Ring::new(
            "AMot",
            &[(Family::TauBase, 0), (Family::Xi, 0), (Family::TauFam, 0)],
            max_u,
            RingKind::MotRelation,
        )
    }

    /// Exterior quotient: Lambda_{F2[tau]}(tau0, tau1, ...).
    pub fn emot_ring(max_u: i32) -> Arc<Ring> {
        Ring::new(
            "EMot",
            &[(Family::TauBase, 0), (Family::TauFam, 0)],
            max_u,
            RingKind::MotExterior,
        )
    }

    /// Doubled rings for diagonals/coactions: alphabet 1 = left tensor
    /// factor, alphabet 2 = right tensor factor.
    pub fn p_double(max_u: i32) -> Arc<Ring> {
        Ring::new(
            "P(x)P",
            &[(Family::Zeta, 1), (Family::Zeta, 2)],
            max_u,
            RingKind::Free,
        )
    }

    /// Q (x) P for the coefficient coaction.
    pub fn q_coaction_ring(max_u: i32) -> Arc<Ring> {
        Ring::new(
            "Q(x)P",
            &[(Family::Q, 1), (Family::Zeta, 2)],
            max_u,
            RingKind::Free,
        )
    }

    /// Rational m-coefficient ring with `k` ordered t-alphabets:
    /// Q[m1, m2, ...][t^(1), ..., t^(k)].
    pub fn m_big_ring(max_u: i32, k: u8) -> Arc<Ring> {
        let mut blocks = vec![(Family::M, 0)];
        for a in 1..=k {
            blocks.push((Family::T, a));
        }
        Ring::new(&format!("M[t;{k}]"), &blocks, max_u, RingKind::Free)
    }

    /// v-coefficient ring with `k` ordered t-alphabets.
    pub fn v_big_ring(max_u: i32, k: u8) -> Arc<Ring> {
        let mut blocks = vec![(Family::V, 0)];
        for a in 1..=k {
            blocks.push((Family::T, a));
        }
        Ring::new(&format!("V[t;{k}]"), &blocks, max_u, RingKind::Free)
    }

    /// q-coefficient ring with `k` ordered zeta-alphabets, for iterated
    /// coactions (coefficients crossing several cobar slots).
    pub fn q_big_ring(max_u: i32, k: u8) -> Arc<Ring> {
        let mut blocks = vec![(Family::Q, 0)];
        for a in 1..=k {
            blocks.push((Family::Zeta, a));
        }
        Ring::new(&format!("Q[z;{k}]"), &blocks, max_u, RingKind::Free)
    }

    /// Doubled motivic ring for the A_Mot diagonal (tau is shared).
    pub fn amot_double(max_u: i32) -> Arc<Ring> {
        Ring::new(
            "AMot(x)AMot",
            &[
                (Family::TauBase, 0),
                (Family::Xi, 1),
                (Family::TauFam, 1),
                (Family::Xi, 2),
                (Family::TauFam, 2),
            ],
            max_u,
            RingKind::MotRelation,
        )
    }

    /// Doubled exterior motivic ring.
    pub fn emot_double(max_u: i32) -> Arc<Ring> {
        Ring::new(
            "EMot(x)EMot",
            &[
                (Family::TauBase, 0),
                (Family::TauFam, 1),
                (Family::TauFam, 2),
            ],
            max_u,
            RingKind::MotExterior,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::rings::*;
    use super::*;

    fn rat(n: i64) -> Rat {
        BigRational::from(num::BigInt::from(n))
    }

    #[test]
    fn enumerate_p_degree_4_and_6() {
        let p = p_ring(24);
        let b4 = enumerate_basis(&p, 4, None).unwrap();
        assert_eq!(b4.len(), 1);
        assert_eq!(b4[0].display(&p), "z1^2");
        let b6 = enumerate_basis(&p, 6, None).unwrap();
        let shown: Vec<_> = b6.iter().map(|m| m.display(&p)).collect();
        assert_eq!(shown, vec!["z1^3", "z2"]);
    }

    #[test]
    fn enumerate_q_with_t() {
        let q = q_ring(24);
        let b = enumerate_basis(&q, 2, Some(1)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].display(&q), "q1");
        let b = enumerate_basis(&q, 0, Some(3)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].display(&q), "q0^3");
        // Unbounded q0 powers are refused rather than looping: a t-budget is
        // mandatory for rings with degree-0 generators.
        let b = enumerate_basis(&q, 0, None).unwrap();
        assert_eq!(b.len(), 1); // only the empty monomial
        assert!(b[0].is_one());
    }

    #[test]
    fn enumerate_bound_error() {
        let p = p_ring(10);
        assert!(matches!(
            enumerate_basis(&p, 11, None),
            Err(Error::DegreeOutOfRange(_))
        ));
    }

    #[test]
    fn poly_mul_integral() {
        // (v1 + 2 t1)^2 = v1^2 + 4 v1 t1 + 4 t1^2 in Z[v][t].
        let r = v_big_ring(24, 1);
        let v1 = Poly::<Rat>::gen(&r, Family::V, 1).unwrap();
        let t1 = Poly::<Rat>::gen_in(&r, Family::T, 1, 1).unwrap();
        let sum = v1.add(&t1.scale(&rat(2)));
        let sq = sum.pow(2).unwrap();
        let expect = v1
            .pow(2)
            .unwrap()
            .add(&v1.mul(&t1).unwrap().scale(&rat(4)))
            .add(&t1.pow(2).unwrap().scale(&rat(4)));
        assert_eq!(sq, expect);
        assert!(sq.is_integral());
    }

    #[test]
    fn poly_mul_f2() {
        // (q1 + q0)^2 = q1^2 + q0^2 over F2.
        let q = q_ring(24);
        let q0 = Poly::<F2>::gen(&q, Family::Q, 0).unwrap();
        let q1 = Poly::<F2>::gen(&q, Family::Q, 1).unwrap();
        let sq = q0.add(&q1).pow(2).unwrap();
        assert_eq!(sq, q0.pow(2).unwrap().add(&q1.pow(2).unwrap()));
        assert_eq!(sq.terms.len(), 2);
    }

    #[test]
    fn motivic_relation() {
        // tau0^2 = tau * xi1 and tau1^2 = tau * xi2.
        let a = amot_ring(24);
        let tau0 = Poly::<F2>::gen(&a, Family::TauFam, 0).unwrap();
        let sq = tau0.pow(2).unwrap();
        assert_eq!(sq.display(), "tau*xi1");
        let tau1 = Poly::<F2>::gen(&a, Family::TauFam, 1).unwrap();
        assert_eq!(tau1.pow(2).unwrap().display(), "tau*xi2");
        // Degrees are preserved by the relation.
        let m = sq.terms.keys().next().unwrap();
        assert_eq!((m.u, m.w), (2, 0));
    }

    #[test]
    fn exterior_squares_vanish() {
        let e = emot_ring(24);
        let tau1 = Poly::<F2>::gen(&e, Family::TauFam, 1).unwrap();
        assert!(tau1.pow(2).unwrap().is_zero());
        let tau0 = Poly::<F2>::gen(&e, Family::TauFam, 0).unwrap();
        let prod = tau0.mul(&tau1).unwrap();
        assert_eq!(prod.terms.len(), 1);
    }

    #[test]
    fn reduced_motivic_basis() {
        // Degree-7 reduced monomials: tau2, tau0*xi2, tau0*xi1^3, tau1*xi1^2.
        let a = amot_ring(24);
        let b = enumerate_basis(&a, 7, None).unwrap();
        assert_eq!(b.len(), 4);
        for m in &b {
            assert_eq!(m.w, 3);
            assert_eq!(m.exp_of(&a, Family::TauBase, 0, 0), 0);
        }
    }

    #[test]
    fn mod2_reduction() {
        let r = v_big_ring(24, 1);
        let v1 = Poly::<Rat>::gen(&r, Family::V, 1).unwrap();
        let t1 = Poly::<Rat>::gen_in(&r, Family::T, 1, 1).unwrap();
        let sum = v1.add(&t1.scale(&rat(2)));
        let red = sum.reduce_mod2(&r).unwrap();
        assert_eq!(red.terms.len(), 1); // 2 t1 dies
        let back = enumerate_basis(&r, 2, None).unwrap();
        assert_eq!(back.len(), 2); // v1 and t1 both have degree 2
    }

    #[test]
    fn canonical_order_is_graded() {
        let p = p_ring(24);
        let mut monos = enumerate_basis(&p, 8, None).unwrap();
        let sorted = monos.clone();
        monos.sort();
        assert_eq!(monos, sorted);
        for w in monos.windows(2) {
            assert!(w[0] < w[1]);
            assert!(w[0].u <= w[1].u);
        }
    }
}
