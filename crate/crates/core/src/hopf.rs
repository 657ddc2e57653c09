//! Structure maps of the Hopf algebras and Hopf algebroid in play.
//!
//! * `P = F2[z1, z2, ...]`, the dual of the subalgebra of squares, with
//!   diagonal `D(z_n) = sum_{i+j=n} z_i (x) z_j^{2^i}`.
//! * `Q = F2[q0, q1, ...]`, the associated graded of the 2-adic filtration
//!   of `BP_*`, a P-comodule via `q_n -> sum q_i (x) z_j^{2^i}`.
//! * The Hopf algebroid `(BP_*, BP_*BP)` with Hazewinkel generators: all
//!   arithmetic is done rationally through the log coefficients `m_n`
//!   (`2 m_n = sum_{0<=i<n} m_i v_{n-i}^{2^i}`), with 2-locality or
//!   integrality asserted after converting back to the `v`-basis.
//! * The motivic dual Steenrod algebra over `F2[tau]` and its exterior
//!   quotient (whose cohomology hosts the collapsed comparison algebra).
//!
//! All maps land in "doubled" rings where alphabet 1 is the left tensor
//! factor and alphabet 2 the right one; `mu_of_m` provides the k-slot
//! embeddings used by the cobar complex to move coefficients across slots.

use crate::error::{Error, Result};
use crate::grading::Family;
use crate::poly::{rings, Mono, Poly, Rat, Ring, F2};
use num::BigInt;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// Maximum number of tensor slots supported by the shared big rings.
/// Cobar words reach length MAX_S + 1 after a differential; products of a
/// length-p word by a length-q word need p + q slots.
pub const MAX_SLOTS: u8 = 12;

fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

fn rat_half() -> Rat {
    Rat::new(BigInt::from(1), BigInt::from(2))
}

/// Shared rings and memoized structure maps for one degree bound.
pub struct HopfCtx {
    pub max_u: i32,
    // Base rings.
    pub p: Arc<Ring>,
    pub q: Arc<Ring>,
    pub v: Arc<Ring>,
    pub t: Arc<Ring>,
    pub tau: Arc<Ring>,
    pub amot: Arc<Ring>,
    pub emot: Arc<Ring>,
    // Doubled rings for diagonals/coactions.
    pub p2: Arc<Ring>,
    pub qp: Arc<Ring>,
    pub amot2: Arc<Ring>,
    pub emot2: Arc<Ring>,
    // Rational working rings: m- and v-coefficients with MAX_SLOTS t-alphabets.
    pub bigm: Arc<Ring>,
    pub bigv: Arc<Ring>,
    memos: Mutex<Memos>,
}

#[derive(Default)]
struct Memos {
    v_in_m: BTreeMap<u32, Poly<Rat>>,
    m_in_v: BTreeMap<u32, Poly<Rat>>,
    /// Full diagonal of t_n in bigm with left factor in alphabet 1, right in 2.
    dt_full: BTreeMap<u32, Poly<Rat>>,
    /// mu_k(m_n) in bigm: the image of m_n under k nested right units,
    /// with t-factors in alphabets 1..=k.
    mu_m: BTreeMap<(u8, u32), Poly<Rat>>,
    /// Reduced diagonal of a t-monomial: (v-coefficient, left, right) terms.
    dt_reduced: BTreeMap<Mono, Vec<(Poly<Rat>, Mono, Mono)>>,
}

impl HopfCtx {
    pub fn new(max_u: i32) -> Arc<HopfCtx> {
        Arc::new(HopfCtx {
            max_u,
            p: rings::p_ring(max_u),
            q: rings::q_ring(max_u),
            v: rings::v_ring(max_u),
            t: rings::t_ring(max_u),
            tau: rings::tau_ring(),
            amot: rings::amot_ring(max_u),
            emot: rings::emot_ring(max_u),
            p2: rings::p_double(max_u),
            qp: rings::q_coaction_ring(max_u),
            amot2: rings::amot_double(max_u),
            emot2: rings::emot_double(max_u),
            bigm: rings::m_big_ring(max_u, MAX_SLOTS),
            bigv: rings::v_big_ring(max_u, MAX_SLOTS),
            memos: Mutex::new(Memos::default()),
        })
    }

    // -----------------------------------------------------------------------
    // Diagonal of P and the coaction on Q
    // -----------------------------------------------------------------------

    /// D(z_n) in the doubled ring: sum_{i+j=n} z_i@1 * (z_j@2)^{2^i}.
    fn diagonal_p_gen(&self, n: u32) -> Result<Poly<F2>> {
        let mut out = Poly::zero(&self.p2);
        for i in 0..=n {
            let j = n - i;
            let mut term = Poly::one(&self.p2);
            if i > 0 {
                term = term.mul(&Poly::gen_in(&self.p2, Family::Zeta, i, 1)?)?;
            }
            if j > 0 {
                let e = 1u32 << i;
                term = term.mul(&Poly::gen_in(&self.p2, Family::Zeta, j, 2)?.pow(e)?)?;
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Diagonal of a monomial of P, in the doubled ring.
    pub fn diagonal_p(&self, m: &Mono) -> Result<Poly<F2>> {
        let mut out = Poly::one(&self.p2);
        for (pos, var) in self.p.vars.iter().enumerate() {
            for _ in 0..m.exps[pos] {
                out = out.mul(&self.diagonal_p_gen(var.index)?)?;
            }
        }
        Ok(out)
    }

    /// Reduced diagonal: both tensor factors of positive degree.
    pub fn diagonal_p_reduced(&self, m: &Mono) -> Result<Vec<(Mono, Mono)>> {
        let full = self.diagonal_p(m)?;
        let mut out = Vec::new();
        for mono in full.terms.keys() {
            let left = mono.project(&self.p2, 1, &self.p, 0)?;
            let right = mono.project(&self.p2, 2, &self.p, 0)?;
            if left.u > 0 && right.u > 0 {
                out.push((left, right));
            }
        }
        Ok(out)
    }

    /// Coaction on one q-generator: q_n -> sum_{i+j=n} q_i@1 * (z_j@2)^{2^i}.
    fn coaction_q_gen(&self, n: u32) -> Result<Poly<F2>> {
        let mut out = Poly::zero(&self.qp);
        for i in 0..=n {
            let j = n - i;
            let mut term = Poly::gen_in(&self.qp, Family::Q, i, 1)?;
            if j > 0 {
                let e = 1u32 << i;
                term = term.mul(&Poly::gen_in(&self.qp, Family::Zeta, j, 2)?.pow(e)?)?;
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Coaction on a monomial of Q (an algebra map).
    pub fn coaction_q(&self, m: &Mono) -> Result<Poly<F2>> {
        let mut out = Poly::one(&self.qp);
        for (pos, var) in self.q.vars.iter().enumerate() {
            for _ in 0..m.exps[pos] {
                out = out.mul(&self.coaction_q_gen(var.index)?)?;
            }
        }
        Ok(out)
    }

    /// Coaction with all q0-divisible left factors dropped (coefficients in
    /// Q/(q0)).
    pub fn coaction_q_mod_q0(&self, m: &Mono) -> Result<Poly<F2>> {
        let full = self.coaction_q(m)?;
        let mut out = Poly::zero(&self.qp);
        for (mono, c) in full.terms {
            if mono.exp_of(&self.qp, Family::Q, 0, 1) == 0 {
                out.add_term(mono, c);
            }
        }
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Hazewinkel generators and the right unit
    // -----------------------------------------------------------------------

    /// v_n as a polynomial in m1..m_n (integral):
    /// v_n = 2 m_n - sum_{1<=i<n} m_i v_{n-i}^{2^i}.
    pub fn v_in_m(&self, n: u32) -> Result<Poly<Rat>> {
        if let Some(p) = self.memos.lock().unwrap().v_in_m.get(&n) {
            return Ok(p.clone());
        }
        let mut acc = Poly::<Rat>::gen(&self.bigm, Family::M, n)?.scale(&rat_int(2));
        for i in 1..n {
            let mi = Poly::<Rat>::gen(&self.bigm, Family::M, i)?;
            let vj = self.v_in_m(n - i)?;
            let e = 1u32 << i;
            acc = acc.sub(&mi.mul(&vj.pow(e)?)?);
        }
        self.memos.lock().unwrap().v_in_m.insert(n, acc.clone());
        Ok(acc)
    }

    /// m_n as a rational polynomial in v1..v_n:
    /// m_n = (v_n + sum_{1<=i<n} m_i v_{n-i}^{2^i}) / 2.
    pub fn m_in_v(&self, n: u32) -> Result<Poly<Rat>> {
        if let Some(p) = self.memos.lock().unwrap().m_in_v.get(&n) {
            return Ok(p.clone());
        }
        let mut acc = Poly::<Rat>::gen(&self.bigv, Family::V, n)?;
        for i in 1..n {
            let mi = self.m_in_v(i)?;
            let vj = Poly::<Rat>::gen(&self.bigv, Family::V, n - i)?;
            let e = 1u32 << i;
            acc = acc.add(&mi.mul(&vj.pow(e)?)?);
        }
        let acc = acc.scale(&rat_half());
        self.memos.lock().unwrap().m_in_v.insert(n, acc.clone());
        Ok(acc)
    }

    /// Rewrite a bigm polynomial in the v-basis (bigv), eliminating all
    /// m-variables exactly. t-alphabet variables pass through unchanged.
    pub fn m_to_v(&self, p: &Poly<Rat>) -> Result<Poly<Rat>> {
        p.eval_hom(
            &self.bigv,
            |var| match var.family {
                Family::M => self.m_in_v(var.index),
                Family::T => Poly::gen_in(&self.bigv, Family::T, var.index, var.alphabet),
                _ => Err(Error::Other(format!(
                    "unexpected variable {} in m_to_v",
                    var.display()
                ))),
            },
            |c| Ok(Some(c.clone())),
        )
    }

    /// Rewrite a bigv polynomial through the m-basis (bigm).
    pub fn v_to_m(&self, p: &Poly<Rat>) -> Result<Poly<Rat>> {
        p.eval_hom(
            &self.bigm,
            |var| match var.family {
                Family::V => self.v_in_m(var.index),
                Family::T => Poly::gen_in(&self.bigm, Family::T, var.index, var.alphabet),
                _ => Err(Error::Other(format!(
                    "unexpected variable {} in v_to_m",
                    var.display()
                ))),
            },
            |c| Ok(Some(c.clone())),
        )
    }

    /// mu_k(m_n): the coefficient embedding across k tensor slots.
    /// mu_0(m_n) = m_n; mu_k(m_n) = sum_{i+j=n} mu_{k-1}(m_i) (t_j@k)^{2^i}.
    pub fn mu_of_m(&self, k: u8, n: u32) -> Result<Poly<Rat>> {
        if let Some(p) = self.memos.lock().unwrap().mu_m.get(&(k, n)) {
            return Ok(p.clone());
        }
        let out = if k == 0 {
            Poly::<Rat>::gen(&self.bigm, Family::M, n)?
        } else {
            let mut acc = Poly::zero(&self.bigm);
            for i in 0..=n {
                let j = n - i;
                let left = if i == 0 {
                    Poly::one(&self.bigm)
                } else {
                    self.mu_of_m(k - 1, i)?
                };
                let right = if j == 0 {
                    Poly::one(&self.bigm)
                } else {
                    let e = 1u32 << i;
                    // t_j^{2^i} may exceed the degree bound; that term then
                    // cannot contribute to any in-range computation, but the
                    // generator itself is present whenever 2(2^j - 1) <= max_u.
                    Poly::gen_in(&self.bigm, Family::T, j, k)?.pow(e)?
                };
                acc = acc.add(&left.mul(&right)?);
            }
            acc
        };
        self.memos.lock().unwrap().mu_m.insert((k, n), out.clone());
        Ok(out)
    }

    /// mu_k of a v-basis coefficient polynomial, returned in the v-basis:
    /// a sum of (v-coefficient) * (t-monomials in alphabets 1..=k).
    pub fn mu_poly(&self, k: u8, p: &Poly<Rat>) -> Result<Poly<Rat>> {
        let in_m = p.eval_hom(
            &self.bigm,
            |var| match var.family {
                Family::V => {
                    let vm = self.v_in_m(var.index)?;
                    vm.eval_hom(
                        &self.bigm,
                        |mv| match mv.family {
                            Family::M => self.mu_of_m(k, mv.index),
                            _ => unreachable!("v_in_m contains only m-variables"),
                        },
                        |c| Ok(Some(c.clone())),
                    )
                }
                Family::T => Poly::gen_in(&self.bigm, Family::T, var.index, var.alphabet),
                _ => Err(Error::Other(format!(
                    "unexpected variable {} in mu_poly",
                    var.display()
                ))),
            },
            |c| Ok(Some(c.clone())),
        )?;
        self.m_to_v(&in_m)
    }

    /// The right unit on a v-basis polynomial, with t-factors in alphabet 1.
    /// Input must be 2-local; output is checked 2-local.
    pub fn eta_r(&self, p: &Poly<Rat>) -> Result<Poly<Rat>> {
        if !p.is_two_local() {
            return Err(Error::EvenDenominator(format!(
                "right unit input must be 2-local: {}",
                p.display()
            )));
        }
        let out = self.mu_poly(1, p)?;
        if !out.is_two_local() {
            return Err(Error::NonIntegral(format!(
                "right unit produced a non-2-local result on {}",
                p.display()
            )));
        }
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Diagonal of the Hopf algebroid
    // -----------------------------------------------------------------------

    /// Full diagonal of t_n in bigm (alphabet 1 tensor alphabet 2), via
    /// D(t_n) = sum_{i+j+k=n} m_i t_j^{2^i} (x) t_k^{2^{i+j}}
    ///        - sum_{i=1..n} m_i (D t_{n-i})^{2^i}.
    fn diagonal_t_gen(&self, n: u32) -> Result<Poly<Rat>> {
        if let Some(p) = self.memos.lock().unwrap().dt_full.get(&n) {
            return Ok(p.clone());
        }
        let out = if n == 0 {
            Poly::one(&self.bigm)
        } else {
            let mut rhs = Poly::zero(&self.bigm);
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let k = n - i - j;
                    let mut term = if i == 0 {
                        Poly::one(&self.bigm)
                    } else {
                        Poly::<Rat>::gen(&self.bigm, Family::M, i)?
                    };
                    if j > 0 {
                        term = term
                            .mul(&Poly::gen_in(&self.bigm, Family::T, j, 1)?.pow(1 << i)?)?;
                    }
                    if k > 0 {
                        term = term
                            .mul(&Poly::gen_in(&self.bigm, Family::T, k, 2)?.pow(1 << (i + j))?)?;
                    }
                    rhs = rhs.add(&term);
                }
            }
            for i in 1..=n {
                let mi = Poly::<Rat>::gen(&self.bigm, Family::M, i)?;
                let lower = self.diagonal_t_gen(n - i)?;
                rhs = rhs.sub(&mi.mul(&lower.pow(1 << i)?)?);
            }
            rhs
        };
        self.memos.lock().unwrap().dt_full.insert(n, out.clone());
        Ok(out)
    }

    /// Full diagonal of a t-monomial (in the t template ring), in bigm.
    pub fn diagonal_bp_full(&self, m: &Mono) -> Result<Poly<Rat>> {
        let mut out = Poly::one(&self.bigm);
        for (pos, var) in self.t.vars.iter().enumerate() {
            for _ in 0..m.exps[pos] {
                out = out.mul(&self.diagonal_t_gen(var.index)?)?;
            }
        }
        Ok(out)
    }

    /// Reduced diagonal of a t-monomial with prefix coefficients in the
    /// v-basis: terms (c, left, right) with both sides of positive degree.
    /// The coefficient c appears to the LEFT of both slots (it has not yet
    /// been moved across earlier slots of a word; the cobar differential
    /// does that with `mu_poly`).
    pub fn diagonal_bp_reduced(&self, m: &Mono) -> Result<Vec<(Poly<Rat>, Mono, Mono)>> {
        if let Some(v) = self.memos.lock().unwrap().dt_reduced.get(m) {
            return Ok(v.clone());
        }
        let full = self.diagonal_bp_full(m)?;
        let in_v = self.m_to_v(&full)?;
        // Group by (left t-part, right t-part); coefficient = v-part.
        let mut grouped: BTreeMap<(Mono, Mono), Poly<Rat>> = BTreeMap::new();
        for (mono, c) in &in_v.terms {
            let left = mono.project(&self.bigv, 1, &self.t, 0)?;
            let right = mono.project(&self.bigv, 2, &self.t, 0)?;
            if left.u == 0 || right.u == 0 {
                continue;
            }
            let coeff = mono.project(&self.bigv, 0, &self.v, 0)?;
            grouped
                .entry((left, right))
                .or_insert_with(|| Poly::zero(&self.v))
                .add_term(coeff, c.clone());
        }
        let mut out = Vec::new();
        for ((l, r), c) in grouped {
            if c.is_zero() {
                continue;
            }
            if !c.is_two_local() {
                return Err(Error::NonIntegral(format!(
                    "reduced diagonal of {} has non-2-local coefficient {}",
                    m.display(&self.t),
                    c.display()
                )));
            }
            out.push((c, l, r));
        }
        self.memos
            .lock()
            .unwrap()
            .dt_reduced
            .insert(m.clone(), out.clone());
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Motivic diagonals
    // -----------------------------------------------------------------------

    /// D(xi_n) = sum_{i+j=n} (xi_j@1)^{2^i} (x) xi_i@2  (xi_0 = 1).
    fn diagonal_xi_gen(&self, n: u32) -> Result<Poly<F2>> {
        let mut out = Poly::zero(&self.amot2);
        for i in 0..=n {
            let j = n - i;
            let mut term = Poly::one(&self.amot2);
            if j > 0 {
                term = term.mul(&Poly::gen_in(&self.amot2, Family::Xi, j, 1)?.pow(1 << i)?)?;
            }
            if i > 0 {
                term = term.mul(&Poly::gen_in(&self.amot2, Family::Xi, i, 2)?)?;
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// D(tau_n) = tau_n (x) 1 + sum_{0<=i<=n} (xi_{n-i}@1)^{2^i} (x) tau_i@2.
    fn diagonal_taufam_gen(&self, n: u32) -> Result<Poly<F2>> {
        let mut out = Poly::gen_in(&self.amot2, Family::TauFam, n, 1)?;
        for i in 0..=n {
            let j = n - i;
            let mut term = Poly::gen_in(&self.amot2, Family::TauFam, i, 2)?;
            if j > 0 {
                term = term.mul(&Poly::gen_in(&self.amot2, Family::Xi, j, 1)?.pow(1 << i)?)?;
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Diagonal of a reduced monomial of the motivic dual Steenrod algebra.
    pub fn diagonal_amot(&self, m: &Mono) -> Result<Poly<F2>> {
        let mut out = Poly::one(&self.amot2);
        for (pos, var) in self.amot.vars.iter().enumerate() {
            for _ in 0..m.exps[pos] {
                let g = match var.family {
                    Family::Xi => self.diagonal_xi_gen(var.index)?,
                    Family::TauFam => self.diagonal_taufam_gen(var.index)?,
                    Family::TauBase => Poly::gen_in(&self.amot2, Family::TauBase, 0, 0)?,
                    _ => unreachable!(),
                };
                out = out.mul(&g)?;
            }
        }
        Ok(out)
    }

    /// Diagonal in the exterior quotient: every tau_n is primitive.
    pub fn diagonal_emot(&self, m: &Mono) -> Result<Poly<F2>> {
        let mut out = Poly::one(&self.emot2);
        for (pos, var) in self.emot.vars.iter().enumerate() {
            for _ in 0..m.exps[pos] {
                let g = match var.family {
                    Family::TauFam => {
                        let a = Poly::gen_in(&self.emot2, Family::TauFam, var.index, 1)?;
                        let b = Poly::gen_in(&self.emot2, Family::TauFam, var.index, 2)?;
                        a.add(&b)
                    }
                    Family::TauBase => Poly::gen_in(&self.emot2, Family::TauBase, 0, 0)?,
                    _ => unreachable!(),
                };
                out = out.mul(&g)?;
            }
        }
        Ok(out)
    }

    /// Reduced motivic diagonal: both factors of positive degree. Returns
    /// (tau-power, left, right) triples; the relation can deposit ground
    /// tau-powers which belong to the coefficient.
    pub fn diagonal_mot_reduced(
        &self,
        m: &Mono,
        exterior: bool,
    ) -> Result<Vec<(u8, Mono, Mono)>> {
        let (full, ring2, slot_ring) = if exterior {
            (self.diagonal_emot(m)?, &self.emot2, &self.emot)
        } else {
            (self.diagonal_amot(m)?, &self.amot2, &self.amot)
        };
        let mut out = Vec::new();
        for mono in full.terms.keys() {
            let left = mono.project(ring2, 1, slot_ring, 0)?;
            let right = mono.project(ring2, 2, slot_ring, 0)?;
            if left.u == 0 || right.u == 0 {
                continue;
            }
            let tau_pow = mono.exp_of(ring2, Family::TauBase, 0, 0);
            out.push((tau_pow, left, right));
        }
        Ok(out)
    }
}

/// Check that a rational polynomial is integral and return it; error with
/// the given label otherwise.
pub fn assert_integral(p: Poly<Rat>, label: &str) -> Result<Poly<Rat>> {
    if p.is_integral() {
        Ok(p)
    } else {
        Err(Error::NonIntegral(format!("{label}: {}", p.display())))
    }
}

/// Reduce a 2-local polynomial mod 2 onto the same ring (F2 coefficients):
/// terms with even numerator vanish; odd units become 1.
pub fn reduce_poly_mod2(p: &Poly<Rat>, target: &Arc<Ring>) -> Result<Poly<F2>> {
    // 2-local coefficients with odd denominator reduce via their numerator.
    let mut int_part = Poly::zero(&p.ring);
    for (m, c) in &p.terms {
        if !crate::rat::is_two_local(c) {
            return Err(Error::EvenDenominator(format!(
                "mod-2 reduction of non-2-local {}",
                p.display()
            )));
        }
        // c = a/b with b odd: mod 2 this is a * b^{-1} = a mod 2.
        int_part.add_term(m.clone(), Rat::from(c.numer().clone()));
    }
    int_part.reduce_mod2(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<HopfCtx> {
        HopfCtx::new(24)
    }

    #[test]
    fn diagonal_p_z2() {
        let c = ctx();
        let z2 = c.p.mono_var(Family::Zeta, 2, 0).unwrap();
        let d = c.diagonal_p(&z2).unwrap();
        // z2 (x) 1 + z1 (x) z1^2 + 1 (x) z2
        assert_eq!(d.terms.len(), 3);
        let red = c.diagonal_p_reduced(&z2).unwrap();
        assert_eq!(red.len(), 1);
        assert_eq!(red[0].0.display(&c.p), "z1");
        assert_eq!(red[0].1.display(&c.p), "z1^2");
    }

    #[test]
    fn diagonal_p_counit() {
        // (eps (x) 1) D = id: terms with trivial left factor must equal m.
        let c = ctx();
        for u in [2, 4, 6, 8, 14] {
            for m in crate::poly::enumerate_basis(&c.p, u, None).unwrap() {
                let d = c.diagonal_p(&m).unwrap();
                let mut counit_image = Vec::new();
                for mono in d.terms.keys() {
                    let left = mono.project(&c.p2, 1, &c.p, 0).unwrap();
                    if left.u == 0 {
                        counit_image.push(mono.project(&c.p2, 2, &c.p, 0).unwrap());
                    }
                }
                assert_eq!(counit_image, vec![m.clone()], "counit fails on {}", m.display(&c.p));
            }
        }
    }

    #[test]
    fn diagonal_p_coassociative() {
        let c = ctx();
        let p3 = Ring::new(
            "PxPxP",
            &[(Family::Zeta, 1), (Family::Zeta, 2), (Family::Zeta, 3)],
            c.max_u,
            crate::poly::RingKind::Free,
        );
        for u in [2, 4, 6, 8, 14, 16] {
            for m in crate::poly::enumerate_basis(&c.p, u, None).unwrap() {
                let d = c.diagonal_p(&m).unwrap();
                // (D (x) 1) D: expand alphabet-1 parts again.
                let left_assoc = d
                    .eval_hom(
                        &p3,
                        |var| match var.alphabet {
                            1 => {
                                let g = c.diagonal_p_gen(var.index).unwrap();
                                g.eval_hom(
                                    &p3,
                                    |w| Poly::gen_in(&p3, Family::Zeta, w.index, w.alphabet),
                                    |_| Ok(Some(F2)),
                                )
                            }
                            2 => Poly::gen_in(&p3, Family::Zeta, var.index, 3),
                            _ => unreachable!(),
                        },
                        |_| Ok(Some(F2)),
                    )
                    .unwrap();
                // (1 (x) D) D: expand alphabet-2 parts into alphabets 2,3.
                let right_assoc = d
                    .eval_hom(
                        &p3,
                        |var| match var.alphabet {
                            1 => Poly::gen_in(&p3, Family::Zeta, var.index, 1),
                            2 => {
                                let g = c.diagonal_p_gen(var.index).unwrap();
                                g.eval_hom(
                                    &p3,
                                    |w| {
                                        Poly::gen_in(
                                            &p3,
                                            Family::Zeta,
                                            w.index,
                                            if w.alphabet == 1 { 2 } else { 3 },
                                        )
                                    },
                                    |_| Ok(Some(F2)),
                                )
                            }
                            _ => unreachable!(),
                        },
                        |_| Ok(Some(F2)),
                    )
                    .unwrap();
                assert_eq!(left_assoc, right_assoc, "coassoc fails on {}", m.display(&c.p));
            }
        }
    }

    #[test]
    fn coaction_q2() {
        let c = ctx();
        let q2 = c.q.mono_var(Family::Q, 2, 0).unwrap();
        let psi = c.coaction_q(&q2).unwrap();
        // q2 (x) 1 + q1 (x) z1^2 + q0 (x) z2
        assert_eq!(psi.terms.len(), 3);
        let shown: Vec<String> = psi.terms.keys().map(|m| m.display(&c.qp)).collect();
        assert!(shown.contains(&"q2".to_string()));
        assert!(shown.contains(&"q1*z1@2^2".to_string()));
        assert!(shown.contains(&"q0*z2@2".to_string()));
        // mod q0: the q0 (x) z2 term drops.
        let red = c.coaction_q_mod_q0(&q2).unwrap();
        assert_eq!(red.terms.len(), 2);
    }

    #[test]
    fn hazewinkel_generators() {
        let c = ctx();
        // v1 = 2 m1.
        let v1 = c.v_in_m(1).unwrap();
        assert_eq!(v1.display(), "2*m1");
        // v2 = 2 m2 - 4 m1^3.
        let v2 = c.v_in_m(2).unwrap();
        let m1 = Poly::<Rat>::gen(&c.bigm, Family::M, 1).unwrap();
        let m2 = Poly::<Rat>::gen(&c.bigm, Family::M, 2).unwrap();
        let expect = m2.scale(&rat_int(2)).sub(&m1.pow(3).unwrap().scale(&rat_int(4)));
        assert_eq!(v2, expect);
        // m1 = v1 / 2.
        let m1v = c.m_in_v(1).unwrap();
        let v1p = Poly::<Rat>::gen(&c.bigv, Family::V, 1).unwrap();
        assert_eq!(m1v, v1p.scale(&rat_half()));
        // Round trip m -> v -> m is the identity for n <= 3.
        for n in 1..=3 {
            let roundtrip = c.m_to_v(&c.v_in_m(n).unwrap()).unwrap();
            let vn = Poly::<Rat>::gen(&c.bigv, Family::V, n).unwrap();
            assert_eq!(roundtrip, vn);
            let back = c.v_to_m(&c.m_in_v(n).unwrap()).unwrap();
            let mn = Poly::<Rat>::gen(&c.bigm, Family::M, n).unwrap();
            assert_eq!(back, mn);
        }
    }

    #[test]
    fn right_unit_values() {
        let c = ctx();
        let v1 = Poly::<Rat>::gen(&c.v, Family::V, 1).unwrap();
        let ev1 = c.eta_r(&v1).unwrap();
        // v1 + 2 t1.
        let v1b = Poly::<Rat>::gen(&c.bigv, Family::V, 1).unwrap();
        let t1 = Poly::<Rat>::gen_in(&c.bigv, Family::T, 1, 1).unwrap();
        assert_eq!(ev1, v1b.add(&t1.scale(&rat_int(2))));
        assert!(ev1.is_integral());

        // eta_R(1) = 1.
        let one = Poly::<Rat>::one(&c.v);
        assert_eq!(c.eta_r(&one).unwrap(), Poly::one(&c.bigv));

        // eta_R(v2) mod 2 = v2 + v1 t1^2 + v1^2 t1.
        let v2 = Poly::<Rat>::gen(&c.v, Family::V, 2).unwrap();
        let ev2 = c.eta_r(&v2).unwrap();
        assert!(ev2.is_integral());
        let red = reduce_poly_mod2(&ev2, &c.bigv).unwrap();
        let v2b = Poly::<Rat>::gen(&c.bigv, Family::V, 2).unwrap();
        let expect = v2b
            .add(&v1b.mul(&t1.pow(2).unwrap()).unwrap())
            .add(&v1b.pow(2).unwrap().mul(&t1).unwrap());
        assert_eq!(red, reduce_poly_mod2(&expect, &c.bigv).unwrap());

        // Non-2-local input errors.
        let half = Poly::constant(&c.v, rat_half());
        assert!(matches!(c.eta_r(&half), Err(Error::EvenDenominator(_))));
    }

    #[test]
    fn right_unit_is_ring_map() {
        let c = ctx();
        let v1 = Poly::<Rat>::gen(&c.v, Family::V, 1).unwrap();
        let v2 = Poly::<Rat>::gen(&c.v, Family::V, 2).unwrap();
        let a = v1.pow(2).unwrap().add(&v2.scale(&rat_int(3)));
        let b = v1.add(&Poly::from_int(&c.v, 5));
        let lhs = c.eta_r(&a.mul(&b).unwrap()).unwrap();
        let rhs = c.eta_r(&a).unwrap().mul(&c.eta_r(&b).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn right_unit_counit() {
        // Killing the t-variables recovers the identity.
        let c = ctx();
        let v2 = Poly::<Rat>::gen(&c.v, Family::V, 2).unwrap();
        let e = c.eta_r(&v2).unwrap();
        let killed = e
            .eval_hom(
                &c.bigv,
                |var| match var.family {
                    Family::T => Ok(Poly::zero(&c.bigv)),
                    _ => Poly::gen_in(&c.bigv, var.family, var.index, var.alphabet),
                },
                |cc| Ok(Some(cc.clone())),
            )
            .unwrap();
        assert_eq!(killed, Poly::<Rat>::gen(&c.bigv, Family::V, 2).unwrap());
    }

    #[test]
    fn right_unit_congruence() {
        // eta_R(v_{n+1}) = v_{n+1} + v_n t1^{2^n} - v_n^2 t1 mod (2, v1..v_{n-1}).
        let c = ctx();
        for n in 1..=2u32 {
            let e = c.eta_r(&Poly::<Rat>::gen(&c.v, Family::V, n + 1).unwrap()).unwrap();
            // Reduce mod 2 and mod (v1..v_{n-1}).
            let red = reduce_poly_mod2(&e, &c.bigv).unwrap();
            let mut filtered = Poly::<F2>::zero(&c.bigv);
            'term: for (m, _) in &red.terms {
                for lower in 1..n {
                    if m.exp_of(&c.bigv, Family::V, lower, 0) > 0 {
                        continue 'term;
                    }
                }
                filtered.add_term(m.clone(), F2);
            }
            let vn1 = Poly::<F2>::gen(&c.bigv, Family::V, n + 1).unwrap();
            let vn = Poly::<F2>::gen(&c.bigv, Family::V, n).unwrap();
            let t1 = Poly::<F2>::gen_in(&c.bigv, Family::T, 1, 1).unwrap();
            let expect = vn1
                .add(&vn.mul(&t1.pow(1 << n).unwrap()).unwrap())
                .add(&vn.pow(2).unwrap().mul(&t1).unwrap());
            assert_eq!(filtered, expect, "congruence fails for n = {n}");
        }
    }

    #[test]
    fn diagonal_t1_primitive_and_t2_reduced() {
        let c = ctx();
        let t1 = c.t.mono_var(Family::T, 1, 0).unwrap();
        assert!(c.diagonal_bp_reduced(&t1).unwrap().is_empty());

        // Reduced diagonal of t2: t1 (x) t1^2 - v1 (t1 (x) t1).
        let t2 = c.t.mono_var(Family::T, 2, 0).unwrap();
        let red = c.diagonal_bp_reduced(&t2).unwrap();
        assert_eq!(red.len(), 2);
        let shown: Vec<String> = red
            .iter()
            .map(|(cf, l, r)| format!("{} | {} (x) {}", cf.display(), l.display(&c.t), r.display(&c.t)))
            .collect();
        assert!(shown.iter().any(|s| s.contains("t1 (x) t1^2")));
        // The t1 (x) t1 coefficient is -v1.
        let t1t1 = red
            .iter()
            .find(|(_, l, r)| l.display(&c.t) == "t1" && r.display(&c.t) == "t1")
            .expect("t1 (x) t1 term present");
        let v1 = Poly::<Rat>::gen(&c.v, Family::V, 1).unwrap();
        assert_eq!(t1t1.0, v1.neg());
    }

    #[test]
    fn diagonal_t1_squared() {
        // Coefficient of t1 (x) t1 in D(t1^2) is 2.
        let c = ctx();
        let mut t1sq = c.t.mono_one();
        let pos = c.t.var_position(Family::T, 1, 0).unwrap();
        t1sq.exps[pos] = 2;
        t1sq.u = 4;
        let red = c.diagonal_bp_reduced(&t1sq).unwrap();
        assert_eq!(red.len(), 1);
        let (cf, l, r) = &red[0];
        assert_eq!((l.display(&c.t), r.display(&c.t)), ("t1".into(), "t1".into()));
        assert_eq!(cf, &Poly::constant(&c.v, rat_int(2)));
    }

    #[test]
    fn diagonal_bp_deg6_inventory() {
        // Among monomials of degree <= 6, exactly t1^2 and t2 have a
        // nonzero multiple of t1 (x) t1 in their reduced diagonal.
        let c = ctx();
        let mut with_t1t1 = Vec::new();
        for u in [2, 4, 6] {
            for m in crate::poly::enumerate_basis(&c.t, u, None).unwrap() {
                let red = c.diagonal_bp_reduced(&m).unwrap();
                if red
                    .iter()
                    .any(|(_, l, r)| l.display(&c.t) == "t1" && r.display(&c.t) == "t1")
                {
                    with_t1t1.push(m.display(&c.t));
                }
            }
        }
        assert_eq!(with_t1t1, vec!["t1^2".to_string(), "t2".to_string()]);
    }

    #[test]
    fn diagonal_bp_counit() {
        // (eps (x) 1) D = id on t-monomials: summing the terms whose left
        // t-part is trivial must give exactly 1 (x) m (eps kills positive
        // t's and is the identity on coefficients).
        let c = ctx();
        for u in [2, 4, 6, 8] {
            for m in crate::poly::enumerate_basis(&c.t, u, None).unwrap() {
                let full = c.diagonal_bp_full(&m).unwrap();
                let in_v = c.m_to_v(&full).unwrap();
                let mut counit = Poly::<Rat>::zero(&c.bigv);
                for (mono, cf) in &in_v.terms {
                    let left = mono.project(&c.bigv, 1, &c.t, 0).unwrap();
                    if left.u == 0 {
                        counit.add_term(mono.clone(), cf.clone());
                    }
                }
                let expect = Poly::<Rat>::from_mono(
                    &c.bigv,
                    m.project(&c.t, 0, &c.bigv, 2).unwrap(),
                );
                assert_eq!(counit, expect, "counit fails on {}", m.display(&c.t));
            }
        }
    }

    #[test]
    fn motivic_diagonals() {
        let c = ctx();
        // xi1 is primitive.
        let xi1 = c.amot.mono_var(Family::Xi, 1, 0).unwrap();
        assert!(c.diagonal_mot_reduced(&xi1, false).unwrap().is_empty());
        // D(tau1) = tau1 (x) 1 + xi1 (x) tau0 + 1 (x) tau1.
        let tau1 = c.amot.mono_var(Family::TauFam, 1, 0).unwrap();
        let d = c.diagonal_amot(&tau1).unwrap();
        assert_eq!(d.terms.len(), 3);
        let red = c.diagonal_mot_reduced(&tau1, false).unwrap();
        assert_eq!(red.len(), 1);
        assert_eq!(red[0].1.display(&c.amot), "xi1");
        assert_eq!(red[0].2.display(&c.amot), "tau0");
        assert_eq!(red[0].0, 0);
        // Exterior: tau2 is primitive.
        let tau2e = c.emot.mono_var(Family::TauFam, 2, 0).unwrap();
        assert!(c.diagonal_mot_reduced(&tau2e, true).unwrap().is_empty());
    }

    #[test]
    fn motivic_diagonal_is_algebra_map() {
        // D(tau0)^2 = D(tau0^2) = tau * D(xi1) in the doubled ring.
        let c = ctx();
        let tau0 = c.amot.mono_var(Family::TauFam, 0, 0).unwrap();
        let d0 = c.diagonal_amot(&tau0).unwrap();
        let sq = d0.mul(&d0).unwrap();
        let xi1 = c.amot.mono_var(Family::Xi, 1, 0).unwrap();
        let dxi = c.diagonal_amot(&xi1).unwrap();
        let tau = Poly::<F2>::gen_in(&c.amot2, Family::TauBase, 0, 0).unwrap();
        assert_eq!(sq, tau.mul(&dxi).unwrap());
    }
}
