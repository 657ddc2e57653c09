//! The (reduced, normalized) cobar complex in every context the crate
//! computes with.
//!
//! An element is a sum of terms `c [g1 | g2 | ... | gs]`: a coefficient in
//! the context's coefficient ring times a word of positive-degree monomials
//! from the context's slot template. Coefficients always sit canonically on
//! the LEFT of the word; constructors and the differential move any
//! coefficient arising further right across the intervening slots with the
//! crossing homomorphisms (`mu` for the Hopf algebroid, the iterated
//! coaction for comodule coefficients).
//!
//! The differential is
//!
//! `d(c[g1|...|gs]) = psi(c)[g1|...|gs] + sum_i (-1)^i c[g1|..|D(gi)|..|gs]`
//!
//! with `psi` the reduced coaction on the coefficient (prepending a slot;
//! absent for trivial comodules) and `D` the reduced diagonal. Signs only
//! matter in the rational Hopf-algebroid context.

use crate::error::{Error, Result};
use crate::grading::Family;
use crate::hopf::HopfCtx;
use crate::linalg::BitMatrix;
use crate::poly::{rings, Mono, Poly, Rat, Ring, Scalar, F2};
use num::BigInt;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Which cobar complex an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextId {
    /// Slots in P = F2[z1, z2, ...], coefficients in Q = F2[q0, q1, ...].
    SphereP,
    /// Slots in P, coefficients in Q/(q0).
    Mod2P,
    /// Slots in the exterior quotient E = F2[z1]/(z1^2), coefficients in Q.
    SphereE,
    /// Slots in E, coefficients in Q/(q0).
    Mod2E,
    /// The Hopf algebroid: slots in t-monomials, 2-local rational
    /// coefficients in the Hazewinkel polynomial ring.
    Bp,
    /// Mod-2 reduction of `Bp`: slots in t-monomials, coefficients in
    /// F2[v1, v2, ...].
    BpMod2,
    /// Motivic dual Steenrod algebra over F2[tau], trivial comodule.
    Mot,
    /// Its exterior quotient on tau0, tau1, ... over F2[tau].
    MotBpm,
}

impl ContextId {
    pub fn name(self) -> &'static str {
        match self {
            ContextId::SphereP => "sphere/P",
            ContextId::Mod2P => "mod2/P",
            ContextId::SphereE => "sphere/E",
            ContextId::Mod2E => "mod2/E",
            ContextId::Bp => "BP",
            ContextId::BpMod2 => "BP/2",
            ContextId::Mot => "motivic",
            ContextId::MotBpm => "motivic/BPM",
        }
    }

    /// True for the two contexts whose slots are restricted to z1.
    pub fn is_exterior_zeta(self) -> bool {
        matches!(self, ContextId::SphereE | ContextId::Mod2E)
    }

    /// True for the contexts whose coefficients omit q0.
    pub fn is_mod_q0(self) -> bool {
        matches!(self, ContextId::Mod2P | ContextId::Mod2E)
    }

    /// True for the trivial-comodule motivic contexts (no coefficient face).
    pub fn is_motivic(self) -> bool {
        matches!(self, ContextId::Mot | ContextId::MotBpm)
    }
}

/// A cobar word: the ordered slots, each a positive-degree monomial in the
/// context's slot template ring.
pub type Word = Box<[Mono]>;

/// A cobar element: canonical map from words to coefficient polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CobarElt<C: Scalar> {
    pub ctx: ContextId,
    pub s: u32,
    pub terms: BTreeMap<Word, Poly<C>>,
}

impl<C: Scalar> CobarElt<C> {
    pub fn zero(ctx: ContextId, s: u32) -> Self {
        CobarElt {
            ctx,
            s,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merge one term in, dropping the word if its coefficient cancels.
    pub fn add_term(&mut self, word: Word, coeff: Poly<C>) {
        debug_assert_eq!(word.len() as u32, self.s);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ctx, other.ctx);
        debug_assert_eq!(self.s, other.s);
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = CobarElt::zero(self.ctx, self.s);
        for (w, p) in &self.terms {
            out.add_term(w.clone(), p.scale(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = CobarElt::zero(self.ctx, self.s);
        for (w, p) in &self.terms {
            out.add_term(w.clone(), p.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// A finite F2 basis of one tridegree of a cobar complex.
#[derive(Debug, Clone)]
pub struct Block {
    pub ctx: ContextId,
    pub s: u32,
    pub u: i32,
    /// Novikov degree of the coefficient (None = all).
    pub t: Option<i32>,
    pub basis: Vec<(Word, Mono)>,
    index: HashMap<(Word, Mono), usize>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, w: &Word, m: &Mono) -> Option<usize> {
        self.index.get(&(w.clone(), m.clone())).copied()
    }
}

/// Shared context: rings plus memoized structure maps.
pub struct CobarCtx {
    pub hopf: Arc<HopfCtx>,
    /// Q with zeta-alphabets 1..=MAX_SLOTS for iterated coactions.
    pub qbig: Arc<Ring>,
}

impl CobarCtx {
    pub fn new(max_u: i32) -> Arc<CobarCtx> {
        let hopf = HopfCtx::new(max_u);
        let qbig = rings::q_big_ring(max_u, crate::hopf::MAX_SLOTS);
        Arc::new(CobarCtx { hopf, qbig })
    }

    pub fn max_u(&self) -> i32 {
        self.hopf.max_u
    }

    /// Slot template ring of a context.
    pub fn word_ring(&self, ctx: ContextId) -> &Arc<Ring> {
        match ctx {
            ContextId::SphereP | ContextId::Mod2P | ContextId::SphereE | ContextId::Mod2E => {
                &self.hopf.p
            }
            ContextId::Bp | ContextId::BpMod2 => &self.hopf.t,
            ContextId::Mot => &self.hopf.amot,
            ContextId::MotBpm => &self.hopf.emot,
        }
    }

    /// Coefficient ring of a context (monomial basis for F2 coefficients;
    /// the rational context scales these monomials by 2-local rationals).
    pub fn coeff_ring(&self, ctx: ContextId) -> &Arc<Ring> {
        match ctx {
            ContextId::SphereP | ContextId::Mod2P | ContextId::SphereE | ContextId::Mod2E => {
                &self.hopf.q
            }
            ContextId::Bp | ContextId::BpMod2 => &self.hopf.v,
            ContextId::Mot | ContextId::MotBpm => &self.hopf.tau,
        }
    }

    fn is_zeta1(&self, m: &Mono) -> bool {
        m.u == 2 && m.exp_of(&self.hopf.p, Family::Zeta, 1, 0) == 1
    }

    // -----------------------------------------------------------------------
    // Element constructors and checks
    // -----------------------------------------------------------------------

    /// The empty word.
    pub fn empty_word() -> Word {
        Vec::new().into()
    }

    /// The unit class [] with coefficient 1.
    pub fn unit_f2(&self, ctx: ContextId) -> CobarElt<F2> {
        let mut x = CobarElt::zero(ctx, 0);
        x.add_term(Self::empty_word(), Poly::one(self.coeff_ring(ctx)));
        x
    }

    pub fn unit_rat(&self) -> CobarElt<Rat> {
        let mut x = CobarElt::zero(ContextId::Bp, 0);
        x.add_term(Self::empty_word(), Poly::one(&self.hopf.v));
        x
    }

    /// The tower class: [z1], [t1], or [xi1] depending on context.
    pub fn h0_f2(&self, ctx: ContextId) -> Result<CobarElt<F2>> {
        let slot = match ctx {
            ContextId::SphereP | ContextId::Mod2P | ContextId::SphereE | ContextId::Mod2E => {
                self.hopf.p.mono_var(Family::Zeta, 1, 0)?
            }
            ContextId::BpMod2 => self.hopf.t.mono_var(Family::T, 1, 0)?,
            ContextId::Mot => self.hopf.amot.mono_var(Family::Xi, 1, 0)?,
            _ => {
                return Err(Error::Other(format!(
                    "no F2 tower class in context {}",
                    ctx.name()
                )))
            }
        };
        let mut x = CobarElt::zero(ctx, 1);
        x.add_term(Word::from([slot]), Poly::one(self.coeff_ring(ctx)));
        Ok(x)
    }

    pub fn h0_rat(&self) -> Result<CobarElt<Rat>> {
        let slot = self.hopf.t.mono_var(Family::T, 1, 0)?;
        let mut x = CobarElt::zero(ContextId::Bp, 1);
        x.add_term(Word::from([slot]), Poly::one(&self.hopf.v));
        Ok(x)
    }

    pub fn validate_f2(&self, x: &CobarElt<F2>) -> Result<()> {
        if x.ctx == ContextId::Bp {
            return Err(Error::Other("rational context passed as F2".into()));
        }
        let wring = self.word_ring(x.ctx);
        for (w, c) in &x.terms {
            if w.len() as u32 != x.s {
                return Err(Error::Grading(format!(
                    "word length {} in an s = {} element",
                    w.len(),
                    x.s
                )));
            }
            for slot in w.iter() {
                if slot.exps.len() != wring.vars.len() {
                    return Err(Error::Other(format!(
                        "slot from a foreign ring in context {}",
                        x.ctx.name()
                    )));
                }
                if slot.u <= 0 {
                    return Err(Error::Grading(format!(
                        "non-positive slot degree in context {}",
                        x.ctx.name()
                    )));
                }
                if x.ctx.is_exterior_zeta() && !self.is_zeta1(slot) {
                    return Err(Error::Grading(format!(
                        "slot {} is not z1 in exterior context",
                        slot.display(wring)
                    )));
                }
            }
            if x.ctx.is_mod_q0() {
                for m in c.terms.keys() {
                    if m.exp_of(&self.hopf.q, Family::Q, 0, 0) > 0 {
                        return Err(Error::Grading(
                            "q0-divisible coefficient in a mod-q0 context".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate_rat(&self, x: &CobarElt<Rat>) -> Result<()> {
        if x.ctx != ContextId::Bp {
            return Err(Error::Other(format!(
                "rational elements live in the Hopf-algebroid context, not {}",
                x.ctx.name()
            )));
        }
        for (w, c) in &x.terms {
            if w.len() as u32 != x.s {
                return Err(Error::Grading(format!(
                    "word length {} in an s = {} element",
                    w.len(),
                    x.s
                )));
            }
            for slot in w.iter() {
                if slot.u <= 0 {
                    return Err(Error::Grading("non-positive slot degree".into()));
                }
            }
            if !c.is_two_local() {
                return Err(Error::EvenDenominator(format!(
                    "coefficient {} is not 2-local",
                    c.display()
                )));
            }
        }
        Ok(())
    }

    /// The common (u, t) degree of all terms; None for zero or mixed.
    /// The t-degree counts Novikov generators in the coefficient.
    pub fn degree_f2(&self, x: &CobarElt<F2>) -> Option<(i32, i32)> {
        let mut seen: Option<(i32, i32)> = None;
        for (w, c) in &x.terms {
            let wu: i32 = w.iter().map(|m| m.u).sum();
            for m in c.terms.keys() {
                let d = (wu + m.u, m.t_count(&c.ring));
                match seen {
                    None => seen = Some(d),
                    Some(prev) if prev == d => {}
                    Some(_) => return None,
                }
            }
        }
        seen
    }

    pub fn degree_rat(&self, x: &CobarElt<Rat>) -> Option<i32> {
        let mut seen: Option<i32> = None;
        for (w, c) in &x.terms {
            let wu: i32 = w.iter().map(|m| m.u).sum();
            for m in c.terms.keys() {
                let d = wu + m.u;
                match seen {
                    None => seen = Some(d),
                    Some(prev) if prev == d => {}
                    Some(_) => return None,
                }
            }
        }
        seen
    }

    pub fn display_f2(&self, x: &CobarElt<F2>) -> String {
        self.display_impl(x.ctx, x.terms.iter().map(|(w, c)| (w, c.display())))
    }

    pub fn display_rat(&self, x: &CobarElt<Rat>) -> String {
        self.display_impl(x.ctx, x.terms.iter().map(|(w, c)| (w, c.display())))
    }

    fn display_impl<'a, I: Iterator<Item = (&'a Word, String)>>(
        &self,
        ctx: ContextId,
        terms: I,
    ) -> String {
        let wring = self.word_ring(ctx);
        let mut parts = Vec::new();
        for (w, coeff) in terms {
            let word = format!(
                "[{}]",
                w.iter().map(|m| m.display(wring)).collect::<Vec<_>>().join("|")
            );
            if coeff == "1" {
                parts.push(word);
            } else if coeff.contains('+') {
                parts.push(format!("({coeff})*{word}"));
            } else {
                parts.push(format!("{coeff}*{word}"));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    // -----------------------------------------------------------------------
    // Differentials
    // -----------------------------------------------------------------------

    /// Differential in the F2-coefficient contexts.
    pub fn differential_f2(&self, x: &CobarElt<F2>) -> Result<CobarElt<F2>> {
        self.validate_f2(x)?;
        if x.ctx == ContextId::BpMod2 {
            let lifted = self.lift_mod2_to_bp(x)?;
            let d = self.differential_rat(&lifted)?;
            return self.reduce_bp_mod2(&d);
        }
        let mut out = CobarElt::zero(x.ctx, x.s + 1);
        let s = x.s as usize;
        for (word, cpoly) in &x.terms {
            // Coefficient face: reduced coaction prepends a slot.
            if !x.ctx.is_motivic() {
                for qm in cpoly.terms.keys() {
                    let co = if x.ctx.is_mod_q0() {
                        self.hopf.coaction_q_mod_q0(qm)?
                    } else {
                        self.hopf.coaction_q(qm)?
                    };
                    for tm in co.terms.keys() {
                        let zpart = tm.project(&self.hopf.qp, 2, &self.hopf.p, 0)?;
                        if zpart.u == 0 {
                            continue; // the counit term c (x) 1
                        }
                        if x.ctx.is_exterior_zeta() && !self.is_zeta1(&zpart) {
                            continue; // projection to the exterior quotient
                        }
                        let qpart = tm.project(&self.hopf.qp, 1, &self.hopf.q, 0)?;
                        let mut w = Vec::with_capacity(s + 1);
                        w.push(zpart);
                        w.extend(word.iter().cloned());
                        out.add_term(w.into(), Poly::from_mono(&self.hopf.q, qpart));
                    }
                }
            }
            // Slot faces.
            for i in 0..s {
                match x.ctx {
                    ContextId::SphereP | ContextId::Mod2P => {
                        for (l, r) in self.hopf.diagonal_p_reduced(&word[i])? {
                            let mut w = Vec::with_capacity(s + 1);
                            w.extend(word[..i].iter().cloned());
                            w.push(l);
                            w.push(r);
                            w.extend(word[i + 1..].iter().cloned());
                            out.add_term(w.into(), cpoly.clone());
                        }
                    }
                    ContextId::SphereE | ContextId::Mod2E => {
                        // z1 is primitive in the exterior quotient.
                    }
                    ContextId::Mot | ContextId::MotBpm => {
                        let exterior = x.ctx == ContextId::MotBpm;
                        for (tau_pow, l, r) in
                            self.hopf.diagonal_mot_reduced(&word[i], exterior)?
                        {
                            let mut coeff = cpoly.clone();
                            if tau_pow > 0 {
                                let tau = self
                                    .hopf
                                    .tau
                                    .mono_var(Family::TauBase, 0, 0)?;
                                for _ in 0..tau_pow {
                                    coeff = coeff.mul_mono(&tau, &F2)?;
                                }
                            }
                            let mut w = Vec::with_capacity(s + 1);
                            w.extend(word[..i].iter().cloned());
                            w.push(l);
                            w.push(r);
                            w.extend(word[i + 1..].iter().cloned());
                            out.add_term(w.into(), coeff);
                        }
                    }
                    ContextId::Bp | ContextId::BpMod2 => unreachable!(),
                }
            }
        }
        Ok(out)
    }

    /// Differential in the rational Hopf-algebroid context, with exact signs
    /// and coefficient crossings.
    pub fn differential_rat(&self, x: &CobarElt<Rat>) -> Result<CobarElt<Rat>> {
        self.validate_rat(x)?;
        let mut out = CobarElt::zero(ContextId::Bp, x.s + 1);
        let s = x.s as usize;
        for (word, cpoly) in &x.terms {
            // Coefficient face: eta_R(c) - c with t-parts becoming slot 1.
            for (vm, c) in &cpoly.terms {
                let image = self
                    .hopf
                    .eta_r(&Poly::from_mono(&self.hopf.v, vm.clone()).scale(c))?;
                let mut trivial = Poly::zero(&self.hopf.v);
                for (bm, bc) in &image.terms {
                    let tpart = bm.project(&self.hopf.bigv, 1, &self.hopf.t, 0)?;
                    let vpart = bm.project(&self.hopf.bigv, 0, &self.hopf.v, 0)?;
                    if tpart.u == 0 {
                        trivial.add_term(vpart, bc.clone());
                        continue;
                    }
                    let mut w = Vec::with_capacity(s + 1);
                    w.push(tpart);
                    w.extend(word.iter().cloned());
                    out.add_term(
                        w.into(),
                        Poly::from_mono(&self.hopf.v, vpart).scale(bc),
                    );
                }
                // The t-trivial part of eta_R(c) is c itself (counit), so the
                // reduced coaction is exactly the positive-t part.
                debug_assert_eq!(
                    trivial,
                    Poly::from_mono(&self.hopf.v, vm.clone()).scale(c),
                    "counit identity failed in the coefficient face"
                );
            }
            // Slot faces with sign (-1)^i and leftward coefficient crossing.
            for i in 1..=s {
                let sign = if i % 2 == 1 { rat_int(-1) } else { rat_int(1) };
                for (ck, l, r) in self.hopf.diagonal_bp_reduced(&word[i - 1])? {
                    // ck sits between slots i-1 and i: cross it over i-1 slots.
                    let crossed = self.hopf.mu_poly((i - 1) as u8, &ck)?;
                    for (cm, cc) in &crossed.terms {
                        let vpart = cm.project(&self.hopf.bigv, 0, &self.hopf.v, 0)?;
                        let mut w = Vec::with_capacity(s + 1);
                        let mut dead = false;
                        for (j, slot) in word[..i - 1].iter().enumerate() {
                            let mult =
                                cm.project(&self.hopf.bigv, (j + 1) as u8, &self.hopf.t, 0)?;
                            match self.hopf.t.mono_mul(slot, &mult)? {
                                Some(prod) => w.push(prod),
                                None => {
                                    dead = true;
                                    break;
                                }
                            }
                        }
                        if dead {
                            continue;
                        }
                        w.push(l.clone());
                        w.push(r.clone());
                        w.extend(word[i..].iter().cloned());
                        let scalar = cc * &sign;
                        let coeff = cpoly
                            .mul(&Poly::from_mono(&self.hopf.v, vpart).scale(&scalar))?;
                        out.add_term(w.into(), coeff);
                    }
                }
            }
        }
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Products
    // -----------------------------------------------------------------------

    /// Iterated coaction of a coefficient monomial across `k` slots:
    /// the result lives in the big Q-ring with the q-part in alphabet 0 and
    /// slot multipliers in zeta-alphabets 1..=k.
    fn psi_iter(&self, qm: &Mono, k: u8, mod_q0: bool) -> Result<Poly<F2>> {
        let mut acc = Poly::from_mono(&self.qbig, qm.project(&self.hopf.q, 0, &self.qbig, 0)?);
        for a in (1..=k).rev() {
            acc = acc.eval_hom(
                &self.qbig,
                |var| {
                    if var.family == Family::Q && var.alphabet == 0 {
                        let g = self.hopf.coaction_q(&self.hopf.q.mono_var(
                            Family::Q,
                            var.index,
                            0,
                        )?)?;
                        g.eval_hom(
                            &self.qbig,
                            |w| match (w.family, w.alphabet) {
                                (Family::Q, 1) => {
                                    Poly::gen_in(&self.qbig, Family::Q, w.index, 0)
                                }
                                (Family::Zeta, 2) => {
                                    Poly::gen_in(&self.qbig, Family::Zeta, w.index, a)
                                }
                                _ => unreachable!(),
                            },
                            |_| Ok(Some(F2)),
                        )
                    } else {
                        Poly::gen_in(&self.qbig, var.family, var.index, var.alphabet)
                    }
                },
                |_| Ok(Some(F2)),
            )?;
        }
        if mod_q0 {
            let mut filtered = Poly::zero(&self.qbig);
            for (m, c) in acc.terms {
                if m.exp_of(&self.qbig, Family::Q, 0, 0) == 0 {
                    filtered.add_term(m, c);
                }
            }
            acc = filtered;
        }
        Ok(acc)
    }

    /// Chain-level product for F2 contexts. The right coefficient crosses
    /// the left word via the iterated coaction (or not at all for trivial
    /// comodules), multiplying into the slots it passes.
    pub fn product_f2(&self, x: &CobarElt<F2>, y: &CobarElt<F2>) -> Result<CobarElt<F2>> {
        if x.ctx != y.ctx {
            return Err(Error::Other(format!(
                "product across contexts {} and {}",
                x.ctx.name(),
                y.ctx.name()
            )));
        }
        if x.ctx == ContextId::BpMod2 {
            let lx = self.lift_mod2_to_bp(x)?;
            let ly = self.lift_mod2_to_bp(y)?;
            return self.reduce_bp_mod2(&self.product_rat(&lx, &ly)?);
        }
        self.validate_f2(x)?;
        self.validate_f2(y)?;
        let mut out = CobarElt::zero(x.ctx, x.s + y.s);
        let p = x.s as usize;
        for (wx, cx) in &x.terms {
            for (wy, cy) in &y.terms {
                if x.ctx.is_motivic() {
                    // Trivial comodule: concatenation, coefficient product.
                    let mut w = Vec::with_capacity(p + wy.len());
                    w.extend(wx.iter().cloned());
                    w.extend(wy.iter().cloned());
                    out.add_term(w.into(), cx.mul(cy)?);
                    continue;
                }
                for qm in cy.terms.keys() {
                    let crossed = self.psi_iter(qm, p as u8, x.ctx.is_mod_q0())?;
                    'term: for tm in crossed.terms.keys() {
                        let qpart = tm.project(&self.qbig, 0, &self.hopf.q, 0)?;
                        let mut w = Vec::with_capacity(p + wy.len());
                        for (j, slot) in wx.iter().enumerate() {
                            let mult =
                                tm.project(&self.qbig, (j + 1) as u8, &self.hopf.p, 0)?;
                            if x.ctx.is_exterior_zeta() {
                                // Slots are z1; any positive multiplier kills
                                // the term in the exterior quotient.
                                if mult.u > 0 {
                                    continue 'term;
                                }
                                w.push(slot.clone());
                            } else {
                                match self.hopf.p.mono_mul(slot, &mult)? {
                                    Some(prod) => w.push(prod),
                                    None => continue 'term,
                                }
                            }
                        }
                        w.extend(wy.iter().cloned());
                        out.add_term(
                            w.into(),
                            cx.mul(&Poly::from_mono(&self.hopf.q, qpart))?,
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    /// Chain-level product in the rational Hopf-algebroid context.
    pub fn product_rat(&self, x: &CobarElt<Rat>, y: &CobarElt<Rat>) -> Result<CobarElt<Rat>> {
        self.validate_rat(x)?;
        self.validate_rat(y)?;
        let mut out = CobarElt::zero(ContextId::Bp, x.s + y.s);
        let p = x.s as usize;
        for (wx, cx) in &x.terms {
            for (wy, cy) in &y.terms {
                let crossed = self.hopf.mu_poly(p as u8, cy)?;
                for (cm, cc) in &crossed.terms {
                    let vpart = cm.project(&self.hopf.bigv, 0, &self.hopf.v, 0)?;
                    let mut w = Vec::with_capacity(p + wy.len());
                    for (j, slot) in wx.iter().enumerate() {
                        let mult = cm.project(&self.hopf.bigv, (j + 1) as u8, &self.hopf.t, 0)?;
                        match self.hopf.t.mono_mul(slot, &mult)? {
                            Some(prod) => w.push(prod),
                            None => unreachable!("t-ring is free"),
                        }
                    }
                    w.extend(wy.iter().cloned());
                    let coeff = cx.mul(&Poly::from_mono(&self.hopf.v, vpart).scale(cc))?;
                    out.add_term(w.into(), coeff);
                }
            }
        }
        Ok(out)
    }

    /// Assemble a single product term whose written form carries a
    /// coefficient in front of each slot, e.g. [t1 | v1 t1], into canonical
    /// left-coefficient form by crossing each interior coefficient leftward.
    pub fn bp_assemble(&self, parts: &[(Poly<Rat>, Mono)]) -> Result<CobarElt<Rat>> {
        // accumulated terms: (global coefficient, slots so far)
        let mut acc: Vec<(Poly<Rat>, Vec<Mono>)> = vec![(Poly::one(&self.hopf.v), Vec::new())];
        for (i, (ci, slot)) in parts.iter().enumerate() {
            let crossed = self.hopf.mu_poly(i as u8, ci)?;
            let mut next = Vec::new();
            for (coeff, slots) in &acc {
                for (cm, cc) in &crossed.terms {
                    let vpart = cm.project(&self.hopf.bigv, 0, &self.hopf.v, 0)?;
                    let mut new_slots = Vec::with_capacity(i + 1);
                    for (j, s) in slots.iter().enumerate() {
                        let mult = cm.project(&self.hopf.bigv, (j + 1) as u8, &self.hopf.t, 0)?;
                        new_slots.push(self.hopf.t.mono_mul(s, &mult)?.expect("free ring"));
                    }
                    new_slots.push(slot.clone());
                    let c = coeff.mul(&Poly::from_mono(&self.hopf.v, vpart).scale(cc))?;
                    next.push((c, new_slots));
                }
            }
            acc = next;
        }
        let mut out = CobarElt::zero(ContextId::Bp, parts.len() as u32);
        for (c, slots) in acc {
            out.add_term(slots.into(), c);
        }
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Filtration, associated graded, lifts, reductions
    // -----------------------------------------------------------------------

    /// Novikov filtration of a rational element: the minimum over all terms
    /// of (2-adic valuation of the coefficient) + (v-degree). None for zero.
    pub fn filtration(&self, x: &CobarElt<Rat>) -> Result<Option<i64>> {
        self.validate_rat(x)?;
        let mut best: Option<i64> = None;
        for c in x.terms.values() {
            for (vm, coeff) in &c.terms {
                let nu = crate::rat::nu2_rational(coeff).ok_or_else(|| {
                    Error::Other("zero coefficient stored in polynomial".into())
                })?;
                let f = nu + vm.t_count(&self.hopf.v) as i64;
                best = Some(best.map_or(f, |b| b.min(f)));
            }
        }
        Ok(best)
    }

    /// v-degree filtration of a mod-2 element. None for zero.
    pub fn filtration_mod2(&self, x: &CobarElt<F2>) -> Option<i64> {
        let mut best: Option<i64> = None;
        for c in x.terms.values() {
            for vm in c.terms.keys() {
                let f = vm.t_count(&c.ring) as i64;
                best = Some(best.map_or(f, |b| b.min(f)));
            }
        }
        best
    }

    /// Project onto Novikov filtration exactly `f`, translating words t -> z
    /// and coefficients 2^a v^E -> q0^a q^E. Terms of lower filtration are an
    /// error; higher filtration is discarded.
    pub fn gr_project(&self, x: &CobarElt<Rat>, f: i64) -> Result<CobarElt<F2>> {
        self.validate_rat(x)?;
        let mut out = CobarElt::zero(ContextId::SphereP, x.s);
        for (word, c) in &x.terms {
            let zword: Vec<Mono> = word
                .iter()
                .map(|m| self.translate_slot(m, &self.hopf.t, Family::T, &self.hopf.p, Family::Zeta))
                .collect::<Result<_>>()?;
            for (vm, coeff) in &c.terms {
                let nu = crate::rat::nu2_rational(coeff)
                    .ok_or_else(|| Error::Other("zero coefficient".into()))?;
                let fil = nu + vm.t_count(&self.hopf.v) as i64;
                if fil < f {
                    return Err(Error::Grading(format!(
                        "term of filtration {fil} < {f} in associated-graded projection"
                    )));
                }
                if fil > f {
                    continue;
                }
                // q0^nu * q^E
                let mut qm = self.hopf.q.mono_one();
                let pos0 = self
                    .hopf
                    .q
                    .var_position(Family::Q, 0, 0)
                    .expect("q0 present");
                if nu > u8::MAX as i64 {
                    return Err(Error::Other("q0 exponent overflow".into()));
                }
                qm.exps[pos0] = nu as u8;
                for (i, v) in self.hopf.v.vars.iter().enumerate() {
                    if vm.exps[i] > 0 {
                        let pos = self
                            .hopf
                            .q
                            .var_position(Family::Q, v.index, 0)
                            .ok_or_else(|| {
                                Error::DegreeOutOfRange(format!("q{} out of ring", v.index))
                            })?;
                        qm.exps[pos] = vm.exps[i];
                        qm.u += v.u * vm.exps[i] as i32;
                    }
                }
                out.add_term(zword.clone().into(), Poly::from_mono(&self.hopf.q, qm));
            }
        }
        Ok(out)
    }

    /// Mod-2 associated graded: v-degree exactly `f`, words t -> z,
    /// coefficients v^E -> q^E (q0 never occurs).
    pub fn gr_project_mod2(&self, x: &CobarElt<F2>, f: i64) -> Result<CobarElt<F2>> {
        if x.ctx != ContextId::BpMod2 {
            return Err(Error::Other("gr_project_mod2 expects a BP/2 element".into()));
        }
        let mut out = CobarElt::zero(ContextId::Mod2P, x.s);
        for (word, c) in &x.terms {
            let zword: Vec<Mono> = word
                .iter()
                .map(|m| self.translate_slot(m, &self.hopf.t, Family::T, &self.hopf.p, Family::Zeta))
                .collect::<Result<_>>()?;
            for vm in c.terms.keys() {
                let fil = vm.t_count(&self.hopf.v) as i64;
                if fil < f {
                    return Err(Error::Grading(format!(
                        "term of filtration {fil} < {f} in associated-graded projection"
                    )));
                }
                if fil > f {
                    continue;
                }
                let qm = self.translate_slot(vm, &self.hopf.v, Family::V, &self.hopf.q, Family::Q)?;
                out.add_term(zword.clone().into(), Poly::from_mono(&self.hopf.q, qm));
            }
        }
        Ok(out)
    }

    fn translate_slot(
        &self,
        m: &Mono,
        from: &Arc<Ring>,
        from_fam: Family,
        to: &Arc<Ring>,
        to_fam: Family,
    ) -> Result<Mono> {
        let mut out = to.mono_one();
        for (i, v) in from.vars.iter().enumerate() {
            if m.exps[i] == 0 {
                continue;
            }
            if v.family != from_fam {
                return Err(Error::Other(format!(
                    "unexpected {} in slot translation",
                    v.display()
                )));
            }
            let pos = to.var_position(to_fam, v.index, 0).ok_or_else(|| {
                Error::DegreeOutOfRange(format!(
                    "{}{} missing in ring {}",
                    to_fam.symbol(),
                    v.index,
                    to.name
                ))
            })?;
            out.exps[pos] = m.exps[i];
            out.u += to.vars[pos].u * m.exps[i] as i32;
            out.w += to.vars[pos].w * m.exps[i] as i32;
        }
        Ok(out)
    }

    /// The multiplicative splitting of the associated graded: z -> t on
    /// words, q0 -> 2 and q_i -> v_i on coefficients.
    pub fn split_lift(&self, x: &CobarElt<F2>) -> Result<CobarElt<Rat>> {
        if x.ctx != ContextId::SphereP {
            return Err(Error::Other("split_lift expects a sphere/P element".into()));
        }
        let mut out = CobarElt::zero(ContextId::Bp, x.s);
        for (word, c) in &x.terms {
            let tword: Vec<Mono> = word
                .iter()
                .map(|m| self.translate_slot(m, &self.hopf.p, Family::Zeta, &self.hopf.t, Family::T))
                .collect::<Result<_>>()?;
            for qm in c.terms.keys() {
                let mut coeff = Poly::one(&self.hopf.v);
                let mut vm = self.hopf.v.mono_one();
                for (i, v) in self.hopf.q.vars.iter().enumerate() {
                    if qm.exps[i] == 0 {
                        continue;
                    }
                    if v.index == 0 {
                        coeff = coeff.scale(&Rat::from(BigInt::from(1) << qm.exps[i]));
                    } else {
                        let pos = self
                            .hopf
                            .v
                            .var_position(Family::V, v.index, 0)
                            .expect("v ring mirrors q ring");
                        vm.exps[pos] = qm.exps[i];
                        vm.u += v.u * qm.exps[i] as i32;
                    }
                }
                out.add_term(
                    tword.clone().into(),
                    coeff.mul(&Poly::from_mono(&self.hopf.v, vm))?,
                );
            }
        }
        Ok(out)
    }

    /// Splitting for the mod-2 tower: z -> t, q_i -> v_i (q0 must not occur).
    pub fn split_lift_mod2(&self, x: &CobarElt<F2>) -> Result<CobarElt<F2>> {
        if x.ctx != ContextId::Mod2P {
            return Err(Error::Other("split_lift_mod2 expects a mod2/P element".into()));
        }
        let mut out = CobarElt::zero(ContextId::BpMod2, x.s);
        for (word, c) in &x.terms {
            let tword: Vec<Mono> = word
                .iter()
                .map(|m| self.translate_slot(m, &self.hopf.p, Family::Zeta, &self.hopf.t, Family::T))
                .collect::<Result<_>>()?;
            for qm in c.terms.keys() {
                let vm = self.translate_slot(qm, &self.hopf.q, Family::Q, &self.hopf.v, Family::V)?;
                out.add_term(tword.clone().into(), Poly::from_mono(&self.hopf.v, vm));
            }
        }
        Ok(out)
    }

    /// Interpret a mod-2 element integrally (each basis monomial with
    /// coefficient 1).
    pub fn lift_mod2_to_bp(&self, x: &CobarElt<F2>) -> Result<CobarElt<Rat>> {
        if x.ctx != ContextId::BpMod2 {
            return Err(Error::Other("expected a BP/2 element".into()));
        }
        let mut out = CobarElt::zero(ContextId::Bp, x.s);
        for (word, c) in &x.terms {
            let mut coeff = Poly::zero(&self.hopf.v);
            for vm in c.terms.keys() {
                coeff.add_term(vm.clone(), rat_int(1));
            }
            out.add_term(word.clone(), coeff);
        }
        Ok(out)
    }

    /// Reduce a 2-local rational element mod 2.
    pub fn reduce_bp_mod2(&self, x: &CobarElt<Rat>) -> Result<CobarElt<F2>> {
        self.validate_rat(x)?;
        let mut out = CobarElt::zero(ContextId::BpMod2, x.s);
        for (word, c) in &x.terms {
            let red = crate::hopf::reduce_poly_mod2(c, &self.hopf.v)?;
            out.add_term(word.clone(), red);
        }
        Ok(out)
    }

    /// Reduce a sphere/P element modulo q0 (the map to the mod-2 theory).
    pub fn reduce_spherep_mod_q0(&self, x: &CobarElt<F2>) -> Result<CobarElt<F2>> {
        if x.ctx != ContextId::SphereP {
            return Err(Error::Other("expected a sphere/P element".into()));
        }
        let mut out = CobarElt::zero(ContextId::Mod2P, x.s);
        for (word, c) in &x.terms {
            let mut kept = Poly::zero(&self.hopf.q);
            for (m, _) in &c.terms {
                if m.exp_of(&self.hopf.q, Family::Q, 0, 0) == 0 {
                    kept.add_term(m.clone(), F2);
                }
            }
            out.add_term(word.clone(), kept);
        }
        Ok(out)
    }

    /// Restrict a sphere/P (or mod2/P) element to the exterior context:
    /// words survive exactly when every slot is z1.
    pub fn restrict_to_e(&self, x: &CobarElt<F2>) -> Result<CobarElt<F2>> {
        let target = match x.ctx {
            ContextId::SphereP => ContextId::SphereE,
            ContextId::Mod2P => ContextId::Mod2E,
            _ => {
                return Err(Error::Other(
                    "exterior restriction applies to P-contexts".into(),
                ))
            }
        };
        let mut out = CobarElt::zero(target, x.s);
        for (word, c) in &x.terms {
            if word.iter().all(|slot| self.is_zeta1(slot)) {
                out.add_term(word.clone(), c.clone());
            }
        }
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Finite blocks and matrices
    // -----------------------------------------------------------------------

    /// Enumerate all length-`s` words of total degree `u_w` in ring order.
    fn enumerate_words(&self, ctx: ContextId, s: u32, u_w: i32) -> Result<Vec<Word>> {
        let ring = self.word_ring(ctx).clone();
        if ctx.is_exterior_zeta() {
            return if u_w == 2 * s as i32 {
                let z1 = ring.mono_var(Family::Zeta, 1, 0)?;
                Ok(vec![vec![z1; s as usize].into()])
            } else {
                Ok(Vec::new())
            };
        }
        let mut out = Vec::new();
        let mut stack: Vec<Mono> = Vec::with_capacity(s as usize);
        self.words_rec(&ring, s, u_w, &mut stack, &mut out)?;
        Ok(out)
    }

    fn words_rec(
        &self,
        ring: &Arc<Ring>,
        remaining: u32,
        u_left: i32,
        stack: &mut Vec<Mono>,
        out: &mut Vec<Word>,
    ) -> Result<()> {
        if remaining == 0 {
            if u_left == 0 {
                out.push(stack.clone().into());
            }
            return Ok(());
        }
        // Each further slot needs degree >= 2 (minimum positive generator
        // degree in every slot template used here is 2? tau0 has degree 1).
        let min_slot = ring
            .vars
            .iter()
            .filter(|v| v.u > 0)
            .map(|v| v.u)
            .min()
            .unwrap_or(1);
        let reserve = min_slot * (remaining as i32 - 1);
        for d in min_slot..=(u_left - reserve) {
            for m in crate::poly::enumerate_basis(ring, d, None)? {
                stack.push(m);
                self.words_rec(ring, remaining - 1, u_left - d, stack, out)?;
                stack.pop();
            }
        }
        Ok(())
    }

    /// Build the finite F2 basis of one (s, u[, t]) piece of a cobar complex.
    /// `budget` bounds the number of basis elements.
    pub fn block(
        &self,
        ctx: ContextId,
        s: u32,
        u: i32,
        t: Option<i32>,
        budget: usize,
    ) -> Result<Block> {
        match ctx {
            ContextId::Bp => {
                return Err(Error::Other(
                    "the rational context has no finite F2 blocks".into(),
                ))
            }
            ContextId::Mot | ContextId::MotBpm => {
                return Err(Error::Other(
                    "motivic blocks are enumerated per weight; use mot_words".into(),
                ))
            }
            _ => {}
        }
        let coeff_ring = self.coeff_ring(ctx).clone();
        let mut basis = Vec::new();
        let min_u_w = 2 * s as i32;
        for u_w in min_u_w..=u {
            let u_c = u - u_w;
            let words = self.enumerate_words(ctx, s, u_w)?;
            if words.is_empty() {
                continue;
            }
            let mut coeffs = crate::poly::enumerate_basis(&coeff_ring, u_c, t)?;
            if ctx.is_mod_q0() {
                coeffs.retain(|m| m.exp_of(&coeff_ring, Family::Q, 0, 0) == 0);
            }
            for w in &words {
                for c in &coeffs {
                    basis.push((w.clone(), c.clone()));
                    if basis.len() > budget {
                        return Err(Error::Budget(format!(
                            "block {} s={s} u={u} t={t:?} exceeds budget {budget}",
                            ctx.name()
                        )));
                    }
                }
            }
        }
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, (w, m))| ((w.clone(), m.clone()), i))
            .collect();
        Ok(Block {
            ctx,
            s,
            u,
            t,
            basis,
            index,
        })
    }

    /// Encode an element as a packed vector over a block's basis.
    pub fn elt_to_vec(&self, x: &CobarElt<F2>, block: &Block) -> Result<Vec<u64>> {
        if x.ctx != block.ctx || x.s != block.s {
            return Err(Error::Grading("element does not match block".into()));
        }
        let mut bits = vec![false; block.dim()];
        for (w, c) in &x.terms {
            for m in c.terms.keys() {
                let idx = block.index_of(w, m).ok_or_else(|| {
                    Error::Grading(format!(
                        "term outside block (s={}, u={}, t={:?})",
                        block.s, block.u, block.t
                    ))
                })?;
                bits[idx] = !bits[idx];
            }
        }
        Ok(crate::linalg::pack_bits(&bits))
    }

    /// Decode a packed vector over a block's basis.
    pub fn vec_to_elt(&self, words: &[u64], block: &Block) -> CobarElt<F2> {
        let bits = crate::linalg::unpack_bits(words, block.dim());
        let coeff_ring = self.coeff_ring(block.ctx);
        let mut out = CobarElt::zero(block.ctx, block.s);
        for (i, &b) in bits.iter().enumerate() {
            if b {
                let (w, m) = &block.basis[i];
                out.add_term(w.clone(), Poly::from_mono(coeff_ring, m.clone()));
            }
        }
        out
    }

    /// The differential as a matrix in row semantics: row i is d(basis[i])
    /// expressed over `to.basis`.
    pub fn d_matrix(&self, from: &Block, to: &Block) -> Result<BitMatrix> {
        if to.s != from.s + 1 || to.u != from.u || to.t != from.t || to.ctx != from.ctx {
            return Err(Error::Grading(
                "differential matrix blocks are incompatible".into(),
            ));
        }
        let coeff_ring = self.coeff_ring(from.ctx);
        let mut m = BitMatrix::zero(from.dim(), to.dim().max(1));
        for (i, (w, cm)) in from.basis.iter().enumerate() {
            let mut x = CobarElt::zero(from.ctx, from.s);
            x.add_term(w.clone(), Poly::from_mono(coeff_ring, cm.clone()));
            let dx = self.differential_f2(&x)?;
            let v = self.elt_to_vec(&dx, to)?;
            if to.dim() > 0 {
                m.set_row(i, &v);
            }
        }
        Ok(m)
    }

    // -----------------------------------------------------------------------
    // Motivic word enumeration (coefficients are free F2[tau] modules)
    // -----------------------------------------------------------------------

    /// All words of the motivic contexts at (s, u), in canonical order.
    /// Monomials are reduced (tau-exponents 0/1, no ground tau).
    pub fn mot_words(&self, ctx: ContextId, s: u32, u: i32) -> Result<Vec<Word>> {
        if !ctx.is_motivic() {
            return Err(Error::Other("mot_words expects a motivic context".into()));
        }
        if s == 0 {
            return Ok(if u == 0 {
                vec![Self::empty_word()]
            } else {
                Vec::new()
            });
        }
        let ring = self.word_ring(ctx).clone();
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(s as usize);
        self.mot_words_rec(&ring, s, u, &mut stack, &mut out)?;
        Ok(out)
    }

    fn mot_words_rec(
        &self,
        ring: &Arc<Ring>,
        remaining: u32,
        u_left: i32,
        stack: &mut Vec<Mono>,
        out: &mut Vec<Word>,
    ) -> Result<()> {
        if remaining == 0 {
            if u_left == 0 {
                out.push(stack.clone().into());
            }
            return Ok(());
        }
        let reserve = remaining as i32 - 1; // tau0 has degree 1
        for d in 1..=(u_left - reserve) {
            for m in crate::poly::enumerate_basis(ring, d, None)? {
                stack.push(m);
                self.mot_words_rec(ring, remaining - 1, u_left - d, stack, out)?;
                stack.pop();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<CobarCtx> {
        CobarCtx::new(24)
    }

    fn tmono(c: &CobarCtx, exps: &[(u32, u8)]) -> Mono {
        let mut m = c.hopf.t.mono_one();
        for &(i, e) in exps {
            let pos = c.hopf.t.var_position(Family::T, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += c.hopf.t.vars[pos].u * e as i32;
        }
        m
    }

    fn zmono(c: &CobarCtx, exps: &[(u32, u8)]) -> Mono {
        let mut m = c.hopf.p.mono_one();
        for &(i, e) in exps {
            let pos = c.hopf.p.var_position(Family::Zeta, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += c.hopf.p.vars[pos].u * e as i32;
        }
        m
    }

    fn qmono(c: &CobarCtx, exps: &[(u32, u8)]) -> Mono {
        let mut m = c.hopf.q.mono_one();
        for &(i, e) in exps {
            let pos = c.hopf.q.var_position(Family::Q, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += c.hopf.q.vars[pos].u * e as i32;
        }
        m
    }

    fn vpoly(c: &CobarCtx, scalar: (i64, i64), exps: &[(u32, u8)]) -> Poly<Rat> {
        let mut m = c.hopf.v.mono_one();
        for &(i, e) in exps {
            let pos = c.hopf.v.var_position(Family::V, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += c.hopf.v.vars[pos].u * e as i32;
        }
        Poly::from_mono(&c.hopf.v, m).scale(&Rat::new(scalar.0.into(), scalar.1.into()))
    }

    #[test]
    fn crossing_example() {
        // [t1 | v1 t1] = v1 [t1|t1] + 2 [t1^2|t1].
        let c = ctx();
        let t1 = tmono(&c, &[(1, 1)]);
        let x = c
            .bp_assemble(&[
                (Poly::one(&c.hopf.v), t1.clone()),
                (vpoly(&c, (1, 1), &[(1, 1)]), t1.clone()),
            ])
            .unwrap();
        assert_eq!(
            c.display_rat(&x),
            "v1*[t1|t1] + 2*[t1^2|t1]"
        );
    }

    #[test]
    fn alpha2_cocycle_is_closed() {
        // d(v1^2 [t1] + 2 v1 [t1^2] + 4/3 [t1^3]) = 0 exactly.
        let c = ctx();
        let t1 = tmono(&c, &[(1, 1)]);
        let t1sq = tmono(&c, &[(1, 2)]);
        let t1cb = tmono(&c, &[(1, 3)]);
        let mut x = CobarElt::zero(ContextId::Bp, 1);
        x.add_term(Word::from([t1]), vpoly(&c, (1, 1), &[(1, 2)]));
        x.add_term(Word::from([t1sq]), vpoly(&c, (2, 1), &[(1, 1)]));
        x.add_term(Word::from([t1cb]), vpoly(&c, (4, 3), &[]));
        let d = c.differential_rat(&x).unwrap();
        assert!(d.is_zero(), "d(x) = {}", c.display_rat(&d));
    }

    #[test]
    fn d_squared_is_zero_rat() {
        let c = ctx();
        // A term that exercises the coefficient face, the diagonal, and the
        // crossing: v2 [t2] and also [t1 | t2].
        let t2 = tmono(&c, &[(2, 1)]);
        let t1 = tmono(&c, &[(1, 1)]);
        let mut x = CobarElt::zero(ContextId::Bp, 1);
        x.add_term(Word::from([t2.clone()]), vpoly(&c, (1, 1), &[(2, 1)]));
        let dd = c.differential_rat(&c.differential_rat(&x).unwrap()).unwrap();
        assert!(dd.is_zero(), "d^2 = {}", c.display_rat(&dd));

        let mut y = CobarElt::zero(ContextId::Bp, 2);
        y.add_term(Word::from([t1, t2]), vpoly(&c, (3, 1), &[(1, 1)]));
        let dd = c.differential_rat(&c.differential_rat(&y).unwrap()).unwrap();
        assert!(dd.is_zero(), "d^2 = {}", c.display_rat(&dd));
    }

    #[test]
    fn d_squared_is_zero_f2() {
        let c = ctx();
        // sphere/P with a q-coefficient.
        let mut x = CobarElt::zero(ContextId::SphereP, 1);
        x.add_term(
            Word::from([zmono(&c, &[(2, 1)])]),
            Poly::from_mono(&c.hopf.q, qmono(&c, &[(2, 1)])),
        );
        let dd = c.differential_f2(&c.differential_f2(&x).unwrap()).unwrap();
        assert!(dd.is_zero(), "d^2 = {}", c.display_f2(&dd));

        // motivic with the relation depositing tau.
        let tau2 = c.hopf.amot.mono_var(Family::TauFam, 2, 0).unwrap();
        let mut y = CobarElt::zero(ContextId::Mot, 1);
        y.add_term(Word::from([tau2]), Poly::one(&c.hopf.tau));
        let dd = c.differential_f2(&c.differential_f2(&y).unwrap()).unwrap();
        assert!(dd.is_zero(), "d^2 = {}", c.display_f2(&dd));
    }

    #[test]
    fn motivic_tau2_differential() {
        // d[tau2] = [xi2|tau0] + [xi1^2|tau1].
        let c = ctx();
        let tau2 = c.hopf.amot.mono_var(Family::TauFam, 2, 0).unwrap();
        let mut x = CobarElt::zero(ContextId::Mot, 1);
        x.add_term(Word::from([tau2]), Poly::one(&c.hopf.tau));
        let d = c.differential_f2(&x).unwrap();
        assert_eq!(c.display_f2(&d), "[xi1^2|tau1] + [xi2|tau0]");
    }

    #[test]
    fn sphere_p_face_structure() {
        // d(q2 []) = psi(q2) - q2 (x) 1 = q1 [z1^2] + q0 [z2].
        let c = ctx();
        let mut x = CobarElt::zero(ContextId::SphereP, 0);
        x.add_term(
            CobarCtx::empty_word(),
            Poly::from_mono(&c.hopf.q, qmono(&c, &[(2, 1)])),
        );
        let d = c.differential_f2(&x).unwrap();
        assert_eq!(c.display_f2(&d), "q1*[z1^2] + q0*[z2]");
    }

    #[test]
    fn exterior_context_margolis() {
        let c = ctx();
        // d(q1 [z1]) = q0 [z1|z1] in the exterior context.
        let z1 = zmono(&c, &[(1, 1)]);
        let mut x = CobarElt::zero(ContextId::SphereE, 1);
        x.add_term(
            Word::from([z1.clone()]),
            Poly::from_mono(&c.hopf.q, qmono(&c, &[(1, 1)])),
        );
        let d = c.differential_f2(&x).unwrap();
        assert_eq!(c.display_f2(&d), "q0*[z1|z1]");

        // d(q1^2 [z1]) = 0 there (the square lands on z1^2 = 0).
        let mut y = CobarElt::zero(ContextId::SphereE, 1);
        y.add_term(
            Word::from([z1]),
            Poly::from_mono(&c.hopf.q, qmono(&c, &[(1, 2)])),
        );
        assert!(c.differential_f2(&y).unwrap().is_zero());
    }

    #[test]
    fn products_append_tower_class() {
        let c = ctx();
        // (q1^2 []) * [z1] = q1^2 [z1]  (no slots to cross).
        let mut a = CobarElt::zero(ContextId::SphereP, 0);
        a.add_term(
            CobarCtx::empty_word(),
            Poly::from_mono(&c.hopf.q, qmono(&c, &[(1, 2)])),
        );
        let h0 = c.h0_f2(ContextId::SphereP).unwrap();
        let prod = c.product_f2(&a, &h0).unwrap();
        assert_eq!(c.display_f2(&prod), "q1^2*[z1]");

        // [z1] * (q1^2 []) crosses one slot:
        // psi(q1^2) = q1^2 (x) 1 + q0^2 (x) z1^2 gives q1^2 [z1] + q0^2 [z1^3].
        let prod2 = c.product_f2(&h0, &a).unwrap();
        assert_eq!(c.display_f2(&prod2), "q1^2*[z1] + q0^2*[z1^3]");
    }

    #[test]
    fn product_rat_crossing() {
        // [t1] * (v1 []) = v1 [t1] + 2 [t1^2].
        let c = ctx();
        let h0 = c.h0_rat().unwrap();
        let mut a = CobarElt::zero(ContextId::Bp, 0);
        a.add_term(CobarCtx::empty_word(), vpoly(&c, (1, 1), &[(1, 1)]));
        let prod = c.product_rat(&h0, &a).unwrap();
        assert_eq!(c.display_rat(&prod), "v1*[t1] + 2*[t1^2]");
    }

    #[test]
    fn product_is_a_derivation_target() {
        // d(x*y) = d(x)*y + (-1)^{|x|} x*d(y) in the rational context.
        let c = ctx();
        let t1 = tmono(&c, &[(1, 1)]);
        let t2 = tmono(&c, &[(2, 1)]);
        let mut x = CobarElt::zero(ContextId::Bp, 1);
        x.add_term(Word::from([t1]), vpoly(&c, (1, 1), &[(1, 1)]));
        let mut y = CobarElt::zero(ContextId::Bp, 1);
        y.add_term(Word::from([t2]), vpoly(&c, (1, 1), &[]));
        let lhs = c.differential_rat(&c.product_rat(&x, &y).unwrap()).unwrap();
        let rhs = c
            .product_rat(&c.differential_rat(&x).unwrap(), &y)
            .unwrap()
            .add(&c.product_rat(&x, &c.differential_rat(&y).unwrap()).unwrap().neg());
        assert_eq!(lhs, rhs, "Leibniz fails: {} vs {}", c.display_rat(&lhs), c.display_rat(&rhs));
    }

    #[test]
    fn filtration_and_gr() {
        let c = ctx();
        let t1 = tmono(&c, &[(1, 1)]);
        let t1sq = tmono(&c, &[(1, 2)]);
        let t1cb = tmono(&c, &[(1, 3)]);
        let mut x = CobarElt::zero(ContextId::Bp, 1);
        x.add_term(Word::from([t1]), vpoly(&c, (1, 1), &[(1, 2)]));
        x.add_term(Word::from([t1sq]), vpoly(&c, (2, 1), &[(1, 1)]));
        x.add_term(Word::from([t1cb]), vpoly(&c, (4, 3), &[]));
        assert_eq!(c.filtration(&x).unwrap(), Some(2));
        let gr = c.gr_project(&x, 2).unwrap();
        // v1^2 -> q1^2, 2 v1 -> q0 q1, 4/3 -> q0^2.
        assert_eq!(
            c.display_f2(&gr),
            "q1^2*[z1] + q0*q1*[z1^2] + q0^2*[z1^3]"
        );
        // Lower target filtration errors.
        assert!(matches!(c.gr_project(&x, 3), Err(Error::Grading(_))));

        // Round trip: split_lift is a section of gr at the same filtration.
        let lifted = c.split_lift(&gr).unwrap();
        assert_eq!(c.filtration(&lifted).unwrap(), Some(2));
        assert_eq!(c.gr_project(&lifted, 2).unwrap(), gr);
    }

    #[test]
    fn block_and_kernel() {
        let c = ctx();
        // s=1, u=4, t=1 over sphere/P: q1[z1] and q0[z1^2].
        let b = c.block(ContextId::SphereP, 1, 4, Some(1), 1 << 20).unwrap();
        assert_eq!(b.dim(), 2);
        // s=1, u=6, t=1: q0[z1^3], q0[z2], q1[z1^2] — and nothing else.
        let b6 = c.block(ContextId::SphereP, 1, 6, Some(1), 1 << 20).unwrap();
        assert_eq!(b6.dim(), 3);

        // s=1, u=2, t=0: the single class [z1] with trivial differential.
        let b1 = c.block(ContextId::SphereP, 1, 2, Some(0), 1 << 20).unwrap();
        assert_eq!(b1.dim(), 1);
        let b2 = c.block(ContextId::SphereP, 2, 2, Some(0), 1 << 20).unwrap();
        assert_eq!(b2.dim(), 0);
        let d = c.d_matrix(&b1, &b2).unwrap();
        assert_eq!(d.left_kernel().rows, 1);
    }

    #[test]
    fn block_budget() {
        let c = ctx();
        let err = c.block(ContextId::SphereP, 2, 12, None, 3);
        assert!(matches!(err, Err(Error::Budget(_))));
    }

    #[test]
    fn mot_words_degree_7() {
        let c = ctx();
        let w = c.mot_words(ContextId::Mot, 1, 7).unwrap();
        let shown: Vec<String> = w
            .iter()
            .map(|word| word[0].display(&c.hopf.amot))
            .collect();
        assert_eq!(shown.len(), 4);
        for name in ["tau2", "xi1^2*tau1", "xi1^3*tau0", "xi2*tau0"] {
            assert!(shown.contains(&name.to_string()), "{name} missing in {shown:?}");
        }
    }

    #[test]
    fn mod2_context_round_trip() {
        let c = ctx();
        // v1 [t1] reduces, lifts, and differentiates consistently.
        let t1 = tmono(&c, &[(1, 1)]);
        let mut x = CobarElt::zero(ContextId::Bp, 1);
        x.add_term(Word::from([t1]), vpoly(&c, (1, 1), &[(2, 1)]));
        let red = c.reduce_bp_mod2(&x).unwrap();
        assert_eq!(red.ctx, ContextId::BpMod2);
        // d commutes with reduction.
        let d_then_red = c.reduce_bp_mod2(&c.differential_rat(&x).unwrap()).unwrap();
        let red_then_d = c.differential_f2(&red).unwrap();
        assert_eq!(d_then_red, red_then_d);
    }
}
