//! The filtration layer between the integral and F2 worlds: Margolis
//! homology of the q-coefficient rings, h0-localization with certified
//! stabilization, the d1 differential computed by split lifting, minimal
//! tower-lifting searches, alpha-family detection, and E-infinity assembly
//! for the sphere and mod-2 contexts.

use crate::cobar::{CobarCtx, CobarElt, ContextId, Word};
use crate::error::{Error, Result};
use crate::ext::{ext_block, ExtBlock, Region};
use crate::grading::Family;
use crate::linalg::{pack_bits, BitMatrix};
use crate::poly::{enumerate_basis, Mono, Poly, Rat, Ring, F2};
use crate::sseq::{self, Derivation, GenSpec, MonoRing, SSDataset};
use num::BigInt;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// Small constructors
// ---------------------------------------------------------------------------

/// A monomial in the q-coefficient ring from (index, exponent) pairs.
pub fn q_mono(ring: &Arc<Ring>, pairs: &[(u32, u8)]) -> Result<Mono> {
    let mut m = ring.mono_one();
    for &(i, e) in pairs {
        let pos = ring
            .var_position(Family::Q, i, 0)
            .ok_or_else(|| Error::DegreeOutOfRange(format!("q{i} not in ring")))?;
        m.exps[pos] = e;
        m.u += ring.vars[pos].u * e as i32;
    }
    Ok(m)
}

/// A one-variable word slot: generator^exp in the given family.
fn slot(ring: &Arc<Ring>, family: Family, index: u32, exp: u8) -> Result<Mono> {
    let mut m = ring.mono_one();
    let pos = ring
        .var_position(family, index, 0)
        .ok_or_else(|| Error::DegreeOutOfRange(format!("{family:?}{index} not in ring")))?;
    m.exps[pos] = exp;
    m.u += ring.vars[pos].u * exp as i32;
    Ok(m)
}

/// The word [z1|z1|...|z1] of length n in a P-side context.
pub fn z1_word(cc: &CobarCtx, n: usize) -> Result<Word> {
    let z1 = slot(&cc.hopf.p, Family::Zeta, 1, 1)?;
    Ok(vec![z1; n].into())
}

fn t1_word(cc: &CobarCtx, n: usize) -> Result<Word> {
    let t1 = slot(&cc.hopf.t, Family::T, 1, 1)?;
    Ok(vec![t1; n].into())
}

// ---------------------------------------------------------------------------
// Reference cocycles (the verification-suite elements; also the inputs for
// the tower d1 facts)
// ---------------------------------------------------------------------------

/// The three item groups of the integral cocycle suite, in the BP cobar:
/// (1) the unit and [t1]; (2) v1^2[t1]+2v1[t1^2]+4/3[t1^3];
/// (3) v2[t1|t1]+v1[t1|t1^3]-v1[t1^2|t1^2]+v1[t1^3|t1]-3v1[t1|t2]
///     +2[t1|t1t2]+2[t1^2|t1^3]-2[t1^2|t2]+2[t1t2|t1].
pub fn bp_item_cocycles(cc: &CobarCtx) -> Result<[Vec<CobarElt<Rat>>; 3]> {
    let tr = &cc.hopf.t;
    let vr = &cc.hopf.v;
    let coeff = |scalar: i64, pairs: &[(u32, u8)]| -> Result<Poly<Rat>> {
        let mut m = vr.mono_one();
        for &(i, e) in pairs {
            let pos = vr
                .var_position(Family::V, i, 0)
                .ok_or_else(|| Error::DegreeOutOfRange(format!("v{i} not in ring")))?;
            m.exps[pos] = e;
            m.u += vr.vars[pos].u * e as i32;
        }
        Ok(Poly::from_mono(vr, m).scale(&rat_int(scalar)))
    };
    let word1 = |a: &[(u32, u8)]| -> Result<Word> {
        let mut m = tr.mono_one();
        for &(i, e) in a {
            let pos = tr.var_position(Family::T, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += tr.vars[pos].u * e as i32;
        }
        Ok(vec![m].into())
    };
    let word2 = |a: &[(u32, u8)], b: &[(u32, u8)]| -> Result<Word> {
        let mk = |pairs: &[(u32, u8)]| {
            let mut m = tr.mono_one();
            for &(i, e) in pairs {
                let pos = tr.var_position(Family::T, i, 0).unwrap();
                m.exps[pos] = e;
                m.u += tr.vars[pos].u * e as i32;
            }
            m
        };
        Ok(vec![mk(a), mk(b)].into())
    };

    let mut unit = CobarElt::zero(ContextId::Bp, 0);
    unit.add_term(CobarCtx::empty_word(), Poly::one(vr));
    let mut t1 = CobarElt::zero(ContextId::Bp, 1);
    t1.add_term(word1(&[(1, 1)])?, Poly::one(vr));

    let mut item2 = CobarElt::zero(ContextId::Bp, 1);
    item2.add_term(word1(&[(1, 1)])?, coeff(1, &[(1, 2)])?);
    item2.add_term(word1(&[(1, 2)])?, coeff(2, &[(1, 1)])?);
    let four_thirds = Poly::one(vr).scale(&Rat::new(BigInt::from(4), BigInt::from(3)));
    item2.add_term(word1(&[(1, 3)])?, four_thirds);

    let mut item3 = CobarElt::zero(ContextId::Bp, 2);
    item3.add_term(word2(&[(1, 1)], &[(1, 1)])?, coeff(1, &[(2, 1)])?);
    item3.add_term(word2(&[(1, 1)], &[(1, 3)])?, coeff(1, &[(1, 1)])?);
    item3.add_term(word2(&[(1, 2)], &[(1, 2)])?, coeff(-1, &[(1, 1)])?);
    item3.add_term(word2(&[(1, 3)], &[(1, 1)])?, coeff(1, &[(1, 1)])?);
    item3.add_term(word2(&[(1, 1)], &[(2, 1)])?, coeff(-3, &[(1, 1)])?);
    item3.add_term(word2(&[(1, 1)], &[(1, 1), (2, 1)])?, coeff(2, &[])?);
    item3.add_term(word2(&[(1, 2)], &[(1, 3)])?, coeff(2, &[])?);
    item3.add_term(word2(&[(1, 2)], &[(2, 1)])?, coeff(-2, &[])?);
    item3.add_term(word2(&[(1, 1), (2, 1)], &[(1, 1)])?, coeff(2, &[])?);

    Ok([vec![unit, t1], vec![item2], vec![item3]])
}

/// The three item groups of the F2 cocycle suite in the (P;Q) cobar:
/// (1) the unit and [z1]; (2) q1^2[z1]+q0q1[z1^2]+q0^2[z1^3];
/// (3) q2[z1|z1]+q1[z1|z1^3]+q1[z1^2|z1^2]+q1[z1^3|z1]+q1[z1|z2]
///     +q0[z1|z1z2]+q0[z1^2|z1^3]+q0[z1^2|z2]+q0[z1z2|z1].
pub fn sphere_item_cocycles(cc: &CobarCtx) -> Result<[Vec<CobarElt<F2>>; 3]> {
    let pr = &cc.hopf.p;
    let qr = &cc.hopf.q;
    let zslot = |pairs: &[(u32, u8)]| -> Result<Mono> {
        let mut m = pr.mono_one();
        for &(i, e) in pairs {
            let pos = pr.var_position(Family::Zeta, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += pr.vars[pos].u * e as i32;
        }
        Ok(m)
    };
    let qc = |pairs: &[(u32, u8)]| -> Result<Poly<F2>> {
        Ok(Poly::from_mono(qr, q_mono(qr, pairs)?))
    };

    let mut unit = CobarElt::zero(ContextId::SphereP, 0);
    unit.add_term(CobarCtx::empty_word(), Poly::one(qr));
    let h0 = cc.h0_f2(ContextId::SphereP)?;

    let mut item2 = CobarElt::zero(ContextId::SphereP, 1);
    item2.add_term(vec![zslot(&[(1, 1)])?].into(), qc(&[(1, 2)])?);
    item2.add_term(vec![zslot(&[(1, 2)])?].into(), qc(&[(0, 1), (1, 1)])?);
    item2.add_term(vec![zslot(&[(1, 3)])?].into(), qc(&[(0, 2)])?);

    let w = |a: &[(u32, u8)], b: &[(u32, u8)]| -> Result<Word> {
        Ok(vec![zslot(a)?, zslot(b)?].into())
    };
    let mut item3 = CobarElt::zero(ContextId::SphereP, 2);
    item3.add_term(w(&[(1, 1)], &[(1, 1)])?, qc(&[(2, 1)])?);
    item3.add_term(w(&[(1, 1)], &[(1, 3)])?, qc(&[(1, 1)])?);
    item3.add_term(w(&[(1, 2)], &[(1, 2)])?, qc(&[(1, 1)])?);
    item3.add_term(w(&[(1, 3)], &[(1, 1)])?, qc(&[(1, 1)])?);
    item3.add_term(w(&[(1, 1)], &[(2, 1)])?, qc(&[(1, 1)])?);
    item3.add_term(w(&[(1, 1)], &[(1, 1), (2, 1)])?, qc(&[(0, 1)])?);
    item3.add_term(w(&[(1, 2)], &[(1, 3)])?, qc(&[(0, 1)])?);
    item3.add_term(w(&[(1, 2)], &[(2, 1)])?, qc(&[(0, 1)])?);
    item3.add_term(w(&[(1, 1), (2, 1)], &[(1, 1)])?, qc(&[(0, 1)])?);

    Ok([vec![unit, h0], vec![item2], vec![item3]])
}

// ---------------------------------------------------------------------------
// Margolis homology
// ---------------------------------------------------------------------------

/// One bidegree of Margolis data for Q^t (or [Q/(q0)]^t when `mod_q0`):
/// the operator assembled from the exterior-subalgebra coaction, its
/// kernel/image dimensions, and the homology cross-checked against the
/// closed form (q0-free monomials; q1-exponent even unless `mod_q0`).
#[derive(Debug, Clone)]
pub struct MargolisData {
    pub t: i32,
    pub u: i32,
    pub mod_q0: bool,
    pub dim_domain: usize,
    pub dim_ker: usize,
    pub dim_im_in: usize,
    pub homology_dim: usize,
    pub basis: Vec<String>,
}

fn margolis_closed_basis(cc: &CobarCtx, t: i32, u: i32, mod_q0: bool) -> Result<Vec<Mono>> {
    let qr = &cc.hopf.q;
    let q0 = qr.var_position(Family::Q, 0, 0).expect("q0 present");
    let q1 = qr.var_position(Family::Q, 1, 0).expect("q1 present");
    Ok(enumerate_basis(qr, u, Some(t))?
        .into_iter()
        .filter(|m| m.exps[q0] == 0 && (mod_q0 || m.exps[q1] % 2 == 0))
        .collect())
}

fn module_basis(cc: &CobarCtx, t: i32, u: i32, mod_q0: bool) -> Result<Vec<Mono>> {
    let qr = &cc.hopf.q;
    let q0 = qr.var_position(Family::Q, 0, 0).expect("q0 present");
    Ok(enumerate_basis(qr, u, Some(t))?
        .into_iter()
        .filter(|m| !mod_q0 || m.exps[q0] == 0)
        .collect())
}

/// P1 assembled from the coaction: the coefficient of z1 in the coaction of
/// each basis monomial, restricted to the exterior subalgebra on z1.
fn p1_matrix(
    cc: &CobarCtx,
    domain: &[Mono],
    codomain: &[Mono],
    mod_q0: bool,
) -> Result<BitMatrix> {
    let qr = &cc.hopf.q;
    let qp = &cc.hopf.qp;
    let mut m = BitMatrix::zero(domain.len().max(1), codomain.len().max(1));
    let index: BTreeMap<&Mono, usize> = codomain.iter().zip(0..).collect();
    for (i, mono) in domain.iter().enumerate() {
        let co = if mod_q0 {
            cc.hopf.coaction_q_mod_q0(mono)?
        } else {
            cc.hopf.coaction_q(mono)?
        };
        for term in co.terms.keys() {
            // Keep terms whose zeta part is exactly z1^1 (the exterior
            // restriction drops z1^{>=2} and all other zeta generators).
            let mut z1_exp = 0u8;
            let mut other = false;
            for (pos, v) in qp.vars.iter().enumerate() {
                if v.family == Family::Zeta && term.exps[pos] > 0 {
                    if v.index == 1 && v.alphabet == 2 {
                        z1_exp = term.exps[pos];
                    } else {
                        other = true;
                    }
                }
            }
            if other || z1_exp != 1 {
                continue;
            }
            let left = term.project(qp, 1, qr, 0)?;
            let j = *index
                .get(&left)
                .ok_or_else(|| Error::Other("P1 image escaped the codomain".into()))?;
            m.set(i, j, !m.get(i, j));
        }
    }
    Ok(m)
}

/// Margolis data at one (t, u), with the operator homology checked against
/// the closed form. A mismatch is a hard error: it would falsify the
/// localization bookkeeping downstream.
pub fn margolis(cc: &CobarCtx, t: i32, u: i32, mod_q0: bool) -> Result<MargolisData> {
    let domain = module_basis(cc, t, u, mod_q0)?;
    let below = if u >= 2 {
        module_basis(cc, t, u - 2, mod_q0)?
    } else {
        Vec::new()
    };
    let above = module_basis(cc, t, u + 2, mod_q0)?;
    let out = p1_matrix(cc, &domain, &below, mod_q0)?;
    let inc = p1_matrix(cc, &above, &domain, mod_q0)?;
    let dim_ker = if domain.is_empty() {
        0
    } else {
        out.left_kernel().rows
    };
    let dim_im_in = if above.is_empty() { 0 } else { inc.rref().pivots.len() };
    // P1 o P1 = 0: image rows must be killed by the outgoing operator.
    for r in 0..above.len() {
        let img = inc.row_vec(r);
        let mut elt = vec![false; domain.len()];
        for (j, flag) in elt.iter_mut().enumerate() {
            *flag = (img[j / 64] >> (j % 64)) & 1 == 1;
        }
        let mut double = vec![0u64; out.words_per_row()];
        for (j, &f) in elt.iter().enumerate() {
            if f {
                for (d, s) in double.iter_mut().zip(out.row(j)) {
                    *d ^= s;
                }
            }
        }
        if double.iter().any(|&w| w != 0) {
            return Err(Error::Other(format!(
                "P1 squared is nonzero at (t={t}, u={u})"
            )));
        }
    }
    let homology_dim = dim_ker - dim_im_in;
    let closed = margolis_closed_basis(cc, t, u, mod_q0)?;
    if closed.len() != homology_dim {
        return Err(Error::Other(format!(
            "Margolis homology at (t={t}, u={u}, mod_q0={mod_q0}): operator gives {homology_dim}, closed form gives {}",
            closed.len()
        )));
    }
    Ok(MargolisData {
        t,
        u,
        mod_q0,
        dim_domain: domain.len(),
        dim_ker,
        dim_im_in,
        homology_dim,
        basis: closed.iter().map(|m| m.display(&cc.hopf.q)).collect(),
    })
}

/// Margolis homology dimension from the closed form alone (cheap; used as
/// the localization prediction).
pub fn margolis_dim(cc: &CobarCtx, t: i32, u: i32, mod_q0: bool) -> Result<usize> {
    Ok(margolis_closed_basis(cc, t, u, mod_q0)?.len())
}

// ---------------------------------------------------------------------------
// h0-localization
// ---------------------------------------------------------------------------

/// One bidegree of the localization map H(P;-) -> H(E;-).
#[derive(Debug, Clone)]
pub struct LocalizedGroup {
    pub s: u32,
    pub u: i32,
    pub t: i32,
    pub stem: i32,
    pub dim_source: usize,
    pub dim_target: usize,
    pub rank: usize,
    pub surjective: bool,
    pub bijective: bool,
    /// Inside the region where the restriction is provably an isomorphism
    /// (stem < 5s - 10).
    pub certified: bool,
    pub stable_dim: Option<usize>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LocalizeReport {
    pub mod2: bool,
    pub groups: BTreeMap<(u32, i32, i32), LocalizedGroup>,
    pub violations: Vec<String>,
}

/// Compute the localization map over a region, verifying the slope-1/5
/// surjectivity (stem < 5s-4) and bijectivity (stem < 5s-10) lines, the
/// Margolis prediction at certified bidegrees, and that h0-multiplication
/// between consecutive exterior-side groups is an isomorphism.
pub fn localize_h0(
    cc: &Arc<CobarCtx>,
    mod2: bool,
    region: Region,
    budget: usize,
) -> Result<LocalizeReport> {
    let (ctx_p, ctx_e) = if mod2 {
        (ContextId::Mod2P, ContextId::Mod2E)
    } else {
        (ContextId::SphereP, ContextId::SphereE)
    };
    let mut tasks = Vec::new();
    for s in 0..=region.max_s {
        for u in (2 * s as i32)..=region.max_u {
            for t in 0..=region.max_t {
                tasks.push((s, u, t));
            }
        }
    }
    let computed: Result<Vec<((u32, i32, i32), LocalizedGroup, Vec<String>)>> = tasks
        .par_iter()
        .map(|&(s, u, t)| -> Result<_> {
            let bp = ext_block(cc, ctx_p, s, u, Some(t), budget)?;
            let be = ext_block(cc, ctx_e, s, u, Some(t), budget)?;
            let mut rows = Vec::new();
            for i in 0..bp.dim() {
                let rep = bp.class_rep(cc, i);
                let restricted = cc.restrict_to_e(&rep)?;
                let coords = be.express(cc, &restricted)?.ok_or_else(|| {
                    Error::Other("restriction of a cocycle is not a cycle".into())
                })?;
                let mut packed = pack_bits(&coords);
                if packed.is_empty() {
                    packed.push(0);
                }
                rows.push(packed);
            }
            let rank = if rows.is_empty() {
                0
            } else {
                let mut m = BitMatrix::zero(rows.len(), be.dim().max(1));
                for (i, r) in rows.iter().enumerate() {
                    m.set_row(i, r);
                }
                m.rref().pivots.len()
            };
            let surjective = rank == be.dim();
            let bijective = surjective && bp.dim() == be.dim();
            let stem = u - s as i32;
            let si = s as i32;
            let certified = stem < 5 * si - 10;
            let mut violations = Vec::new();
            if stem < 5 * si - 4 && !surjective {
                violations.push(format!(
                    "(s={s}, u={u}, t={t}): stem {stem} < 5s-4 but restriction is not surjective"
                ));
            }
            if certified && !bijective {
                violations.push(format!(
                    "(s={s}, u={u}, t={t}): stem {stem} < 5s-10 but restriction is not bijective"
                ));
            }
            // Exterior-side dimension equals the Margolis prediction in
            // word lengths >= 1 (the chain model is Q tensor one word).
            if s >= 1 {
                let pred = margolis_dim(cc, t, u - 2 * s as i32, mod2)?;
                if pred != be.dim() {
                    violations.push(format!(
                        "(s={s}, u={u}, t={t}): exterior side has dim {}, Margolis predicts {pred}",
                        be.dim()
                    ));
                }
            }
            let names = if certified {
                margolis_closed_basis(cc, t, u - 2 * s as i32, mod2)?
                    .iter()
                    .map(|m| {
                        let base = m.display(&cc.hopf.q);
                        if base == "1" {
                            format!("h0^{s}")
                        } else {
                            format!("{base}*h0^{s}")
                        }
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let group = LocalizedGroup {
                s,
                u,
                t,
                stem,
                dim_source: bp.dim(),
                dim_target: be.dim(),
                rank,
                surjective,
                bijective,
                certified,
                stable_dim: certified.then_some(be.dim()),
                names,
            };
            Ok(((s, u, t), group, violations))
        })
        .collect();
    let mut groups = BTreeMap::new();
    let mut violations = Vec::new();
    for (key, group, v) in computed? {
        groups.insert(key, group);
        violations.extend(v);
    }
    // h0-multiplication between consecutive exterior-side groups is an
    // isomorphism for s >= 1 (h0 acts as the identity on ker/im).
    let h0 = cc.h0_f2(ctx_e)?;
    for (&(s, u, t), g) in groups.clone().iter() {
        if s == 0 || g.dim_target == 0 {
            continue;
        }
        let Some(next) = groups.get(&(s + 1, u + 2, t)) else {
            continue;
        };
        let be = ext_block(cc, ctx_e, s, u, Some(t), budget)?;
        let bn = ext_block(cc, ctx_e, s + 1, u + 2, Some(t), budget)?;
        let mut rows = Vec::new();
        for i in 0..be.dim() {
            let mapped = cc.product_f2(&be.class_rep(cc, i), &h0)?;
            let coords = bn
                .express(cc, &mapped)?
                .ok_or_else(|| Error::Other("h0-multiple is not a cycle".into()))?;
            let mut packed = pack_bits(&coords);
            if packed.is_empty() {
                packed.push(0);
            }
            rows.push(packed);
        }
        let mut m = BitMatrix::zero(rows.len().max(1), bn.dim().max(1));
        for (i, r) in rows.iter().enumerate() {
            m.set_row(i, r);
        }
        let rank = m.rref().pivots.len();
        if rank != be.dim() || next.dim_target != be.dim() {
            violations.push(format!(
                "(s={s}, u={u}, t={t}): h0-multiplication to (s={}, u={}) is not an isomorphism ({} -> {}, rank {rank})",
                s + 1,
                u + 2,
                g.dim_target,
                next.dim_target
            ));
        }
    }
    Ok(LocalizeReport {
        mod2,
        groups,
        violations,
    })
}

// ---------------------------------------------------------------------------
// d1 via split lifting
// ---------------------------------------------------------------------------

/// The d1 value of a cocycle class: the next-filtration graded piece of the
/// differential of its split lift.
#[derive(Debug, Clone)]
pub struct D1Outcome {
    pub zero: bool,
    pub coords: Vec<bool>,
    pub target_dim: usize,
    pub gr_rep: CobarElt<F2>,
}

/// d1 of an integral-context class given by a (P;Q)-cobar cocycle.
pub fn novikov_d1(cc: &CobarCtx, x: &CobarElt<F2>, budget: usize) -> Result<D1Outcome> {
    if x.ctx != ContextId::SphereP {
        return Err(Error::Other("novikov_d1 expects a sphere/P cocycle".into()));
    }
    if !cc.differential_f2(x)?.is_zero() {
        return Err(Error::Other("novikov_d1 input is not a cocycle".into()));
    }
    let (u, t) = cc
        .degree_f2(x)
        .ok_or_else(|| Error::Grading("inhomogeneous d1 input".into()))?;
    let target = ext_block(cc, ContextId::SphereP, x.s + 1, u, Some(t + 1), budget)?;
    let zero_outcome = |target: &ExtBlock| D1Outcome {
        zero: true,
        coords: vec![false; target.dim()],
        target_dim: target.dim(),
        gr_rep: CobarElt::zero(ContextId::SphereP, x.s + 1),
    };
    let lift = cc.split_lift(x)?;
    let dl = cc.differential_rat(&lift)?;
    let Some(fil) = cc.filtration(&dl)? else {
        return Ok(zero_outcome(&target));
    };
    if fil < (t + 1) as i64 {
        return Err(Error::Other(format!(
            "differential of the lift has filtration {fil} < t+1 = {} — the input was not a cocycle",
            t + 1
        )));
    }
    if fil > (t + 1) as i64 {
        return Ok(zero_outcome(&target));
    }
    let gr_rep = cc.gr_project(&dl, (t + 1) as i64)?;
    let coords = target
        .express(cc, &gr_rep)?
        .ok_or_else(|| Error::Other("d1 value is not a cycle — chain map violated".into()))?;
    let zero = coords.iter().all(|&b| !b);
    Ok(D1Outcome {
        zero,
        coords,
        target_dim: target.dim(),
        gr_rep: if zero {
            CobarElt::zero(ContextId::SphereP, x.s + 1)
        } else {
            gr_rep
        },
    })
}

/// d1 in the mod-2 context (lift to BP/2, differentiate, regrade).
pub fn novikov_d1_mod2(cc: &CobarCtx, x: &CobarElt<F2>, budget: usize) -> Result<D1Outcome> {
    if x.ctx != ContextId::Mod2P {
        return Err(Error::Other("novikov_d1_mod2 expects a mod-2/P cocycle".into()));
    }
    if !cc.differential_f2(x)?.is_zero() {
        return Err(Error::Other("novikov_d1_mod2 input is not a cocycle".into()));
    }
    let (u, t) = cc
        .degree_f2(x)
        .ok_or_else(|| Error::Grading("inhomogeneous d1 input".into()))?;
    let target = ext_block(cc, ContextId::Mod2P, x.s + 1, u, Some(t + 1), budget)?;
    let zero_outcome = |target: &ExtBlock| D1Outcome {
        zero: true,
        coords: vec![false; target.dim()],
        target_dim: target.dim(),
        gr_rep: CobarElt::zero(ContextId::Mod2P, x.s + 1),
    };
    let lift = cc.split_lift_mod2(x)?;
    let dl = cc.differential_f2(&lift)?;
    let Some(fil) = cc.filtration_mod2(&dl) else {
        return Ok(zero_outcome(&target));
    };
    if fil < (t + 1) as i64 {
        return Err(Error::Other(format!(
            "mod-2 lift differential has filtration {fil} < t+1 = {}",
            t + 1
        )));
    }
    if fil > (t + 1) as i64 {
        return Ok(zero_outcome(&target));
    }
    let gr_rep = cc.gr_project_mod2(&dl, (t + 1) as i64)?;
    let coords = target
        .express(cc, &gr_rep)?
        .ok_or_else(|| Error::Other("d1 value is not a cycle — chain map violated".into()))?;
    let zero = coords.iter().all(|&b| !b);
    Ok(D1Outcome {
        zero,
        coords,
        target_dim: target.dim(),
        gr_rep: if zero {
            CobarElt::zero(ContextId::Mod2P, x.s + 1)
        } else {
            gr_rep
        },
    })
}

/// Verify that d1 does not depend on the representative: perturb by up to
/// three coboundaries and compare class coordinates.
pub fn d1_rep_independent(cc: &CobarCtx, x: &CobarElt<F2>, budget: usize) -> Result<bool> {
    let base = novikov_d1(cc, x, budget)?;
    let (u, t) = cc
        .degree_f2(x)
        .ok_or_else(|| Error::Grading("inhomogeneous input".into()))?;
    if x.s == 0 {
        return Ok(true);
    }
    let prev = cc.block(ContextId::SphereP, x.s - 1, u, Some(t), budget)?;
    for i in 0..prev.dim().min(3) {
        let mut v = vec![false; prev.dim()];
        v[i] = true;
        let gen = cc.vec_to_elt(&pack_bits(&v), &prev);
        let boundary = cc.differential_f2(&gen)?;
        if boundary.is_zero() {
            continue;
        }
        let perturbed = x.add(&boundary);
        let other = novikov_d1(cc, &perturbed, budget)?;
        if other.coords != base.coords {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Minimal lifting exponent
// ---------------------------------------------------------------------------

/// Result of the tower-lifting search: the smallest N such that the
/// (n+1)-st localized tower generator times h0^N lifts across the
/// restriction map, together with the lift.
#[derive(Debug, Clone)]
pub struct LiftOutcome {
    pub n: u32,
    pub exponent: u32,
    pub u: i32,
    pub t: i32,
    pub lift: CobarElt<F2>,
    pub contains_required_term: bool,
}

/// Coefficient monomial and degree of the (n+1)-st generator of the
/// localized sphere algebra: q1^2 for n = 0, q_{n+1} for n >= 1.
fn tower_generator(cc: &CobarCtx, n: u32) -> Result<(Mono, i32)> {
    let qr = &cc.hopf.q;
    if n == 0 {
        Ok((q_mono(qr, &[(1, 2)])?, 2))
    } else {
        Ok((q_mono(qr, &[(n + 1, 1)])?, 1))
    }
}

/// Search N = 1..=8 for the smallest N with generator*h0^N in the image of
/// the restriction from H^N(P;-). Verifies that the lift's word expression
/// contains the required term generator*[z1]^N.
pub fn minimal_lift_exponent(cc: &CobarCtx, n: u32, budget: usize) -> Result<LiftOutcome> {
    let (gen_mono, t) = tower_generator(cc, n)?;
    let gen_u = gen_mono.u;
    for exponent in 1..=8u32 {
        let u = gen_u + 2 * exponent as i32;
        if u > cc.max_u() {
            return Err(Error::DegreeOutOfRange(format!(
                "lift search for n={n} needs u={u} > MAX_U={}",
                cc.max_u()
            )));
        }
        let bp = ext_block(cc, ContextId::SphereP, exponent, u, Some(t), budget)?;
        let be = ext_block(cc, ContextId::SphereE, exponent, u, Some(t), budget)?;
        let mut target = CobarElt::zero(ContextId::SphereE, exponent);
        target.add_term(
            z1_word(cc, exponent as usize)?,
            Poly::from_mono(&cc.hopf.q, gen_mono.clone()),
        );
        let tcoords = be
            .express(cc, &target)?
            .ok_or_else(|| Error::Other("tower element is not a cycle".into()))?;
        if tcoords.iter().all(|&b| !b) {
            return Err(Error::Other(format!(
                "tower element q-index {} h0^{exponent} is zero on the exterior side",
                n + 1
            )));
        }
        let mut m = BitMatrix::zero(bp.dim().max(1), be.dim().max(1));
        for i in 0..bp.dim() {
            let restricted = cc.restrict_to_e(&bp.class_rep(cc, i))?;
            let coords = be
                .express(cc, &restricted)?
                .ok_or_else(|| Error::Other("restriction is not a cycle".into()))?;
            for (j, &b) in coords.iter().enumerate() {
                if b {
                    m.set(i, j, true);
                }
            }
        }
        let mut packed = pack_bits(&tcoords);
        if packed.is_empty() {
            packed.push(0);
        }
        if let Some(x) = m.solve_left(&packed) {
            let mut lift = CobarElt::zero(ContextId::SphereP, exponent);
            for i in 0..bp.dim() {
                if (x[i / 64] >> (i % 64)) & 1 == 1 {
                    lift = lift.add(&bp.class_rep(cc, i));
                }
            }
            let word = z1_word(cc, exponent as usize)?;
            let contains_required_term = lift
                .terms
                .get(&word)
                .map(|c| c.terms.keys().any(|mono| *mono == gen_mono))
                .unwrap_or(false);
            if !contains_required_term {
                return Err(Error::Other(format!(
                    "lift found at N={exponent} but its [z1]^N coefficient misses the generator"
                )));
            }
            return Ok(LiftOutcome {
                n,
                exponent,
                u,
                t,
                lift,
                contains_required_term,
            });
        }
    }
    Err(Error::Solve(format!(
        "no lift for tower index {} within N <= 8",
        n + 1
    )))
}

// ---------------------------------------------------------------------------
// Tower d1 facts: the computed inputs to E-infinity assembly
// ---------------------------------------------------------------------------

/// Computed d1 behavior of the localized tower generators: d1 = 0 on the
/// q1^2- and q2-towers (via the verification-suite cocycles and their
/// h0-multiples), and d1(lift of q3 h0^N) detected by q2^2 h0^{N+1}.
#[derive(Debug, Clone)]
pub struct TowerD1Facts {
    pub q1sq_tower_zero: bool,
    pub q2_tower_zero: bool,
    pub lift: LiftOutcome,
    pub lift_d1_detected: bool,
}

/// Does the E-restriction of a (P;Q)-cobar element equal, in exterior-side
/// cohomology, the class with the given coefficient on the all-z1 word?
fn e_detects(
    cc: &CobarCtx,
    x: &CobarElt<F2>,
    coeff_pairs: &[(u32, u8)],
    budget: usize,
) -> Result<bool> {
    let restricted = cc.restrict_to_e(x)?;
    let (u, t) = cc
        .degree_f2(x)
        .ok_or_else(|| Error::Grading("inhomogeneous element".into()))?;
    let ctx_e = if x.ctx == ContextId::Mod2P {
        ContextId::Mod2E
    } else {
        ContextId::SphereE
    };
    let be = ext_block(cc, ctx_e, x.s, u, Some(t), budget)?;
    let mut expected = CobarElt::zero(ctx_e, x.s);
    expected.add_term(
        z1_word(cc, x.s as usize)?,
        Poly::from_mono(&cc.hopf.q, q_mono(&cc.hopf.q, coeff_pairs)?),
    );
    let a = be.express(cc, &restricted)?;
    let b = be.express(cc, &expected)?;
    match (a, b) {
        (Some(a), Some(b)) => Ok(a == b && b.iter().any(|&x| x)),
        _ => Ok(false),
    }
}

pub fn tower_d1_facts(cc: &CobarCtx, budget: usize) -> Result<TowerD1Facts> {
    let items = sphere_item_cocycles(cc)?;
    let h0 = cc.h0_f2(ContextId::SphereP)?;

    // q1^2-tower: the item-2 cocycle and one h0-multiple.
    let c2 = &items[1][0];
    let mut q1sq_tower_zero = novikov_d1(cc, c2, budget)?.zero;
    let c2h = cc.product_f2(c2, &h0)?;
    q1sq_tower_zero &= novikov_d1(cc, &c2h, budget)?.zero;

    // q2-tower: the item-3 cocycle and one h0-multiple.
    let c3 = &items[2][0];
    let mut q2_tower_zero = novikov_d1(cc, c3, budget)?.zero;
    let c3h = cc.product_f2(c3, &h0)?;
    q2_tower_zero &= novikov_d1(cc, &c3h, budget)?.zero;

    // q3-tower: lift q3 h0^N, differentiate, detect q2^2 h0^{N+1}.
    let lift = minimal_lift_exponent(cc, 2, budget)?;
    let d1 = novikov_d1(cc, &lift.lift, budget)?;
    let lift_d1_detected = !d1.zero
        && e_detects(cc, &d1.gr_rep, &[(2, 2)], budget)?;

    Ok(TowerD1Facts {
        q1sq_tower_zero,
        q2_tower_zero,
        lift,
        lift_d1_detected,
    })
}

// ---------------------------------------------------------------------------
// E-infinity assembly
// ---------------------------------------------------------------------------

/// The localized page assembly: E1 (h0 absorbed, coordinates (c1, t) with
/// c1 = u - 2s), its homology under the computed d1, the closed-form
/// expectation, and the degree argument that no later differential moves.
#[derive(Debug, Clone)]
pub struct EinftyAssembly {
    pub mod2: bool,
    pub e1: SSDataset,
    pub einfty: SSDataset,
    pub expected: SSDataset,
    pub mismatches: Vec<String>,
    pub degree_argument_ok: bool,
}

/// Assemble E2 = E-infinity of the localized page over the window
/// c1 <= c1_max, t <= t_max. The generator differentials are the computed
/// facts: d1 = 0 on q1^2 (or q1) and q2, and d1(q3) = q2^2 h0 from the
/// lifting search. The q4-tower starts at c1 = 30, outside any window this
/// engine accepts (MAX_U caps c1_max).
pub fn assemble_einfty(
    cc: &CobarCtx,
    mod2: bool,
    c1_max: i32,
    t_max: i32,
    facts: &TowerD1Facts,
    budget: usize,
) -> Result<EinftyAssembly> {
    if !facts.q1sq_tower_zero || !facts.q2_tower_zero || !facts.lift_d1_detected {
        return Err(Error::Other(
            "tower d1 facts do not support the assembly (a computed input failed)".into(),
        ));
    }
    if c1_max > cc.max_u() {
        return Err(Error::DegreeOutOfRange(format!(
            "c1_max {c1_max} exceeds MAX_U {}",
            cc.max_u()
        )));
    }
    // In the mod-2 context d1 also vanishes on the q1-tower: the lift of
    // q1 is v1, whose differential is 2 t1 = 0 mod 2. Verify rather than
    // assume.
    if mod2 {
        let mut q1elt = CobarElt::zero(ContextId::Mod2P, 0);
        q1elt.add_term(
            CobarCtx::empty_word(),
            Poly::from_mono(&cc.hopf.q, q_mono(&cc.hopf.q, &[(1, 1)])?),
        );
        let d = novikov_d1_mod2(cc, &q1elt, budget)?;
        if !d.zero {
            return Err(Error::Other("mod-2 q1-tower has nonzero d1".into()));
        }
    }
    let keep = move |d: &[i32]| (0..=c1_max).contains(&d[0]) && (0..=t_max).contains(&d[1]);
    let (e1_ring, base_name): (MonoRing, &str) = if mod2 {
        (
            MonoRing::new(vec![
                GenSpec::poly("q1", &[2, 1]),
                GenSpec::poly("q2", &[6, 1]),
                GenSpec::poly("q3", &[14, 1]),
            ])?,
            "mod2",
        )
    } else {
        (
            MonoRing::new(vec![
                GenSpec::poly("q1^2", &[4, 2]),
                GenSpec::poly("q2", &[6, 1]),
                GenSpec::poly("q3", &[14, 1]),
            ])?,
            "sphere",
        )
    };
    let bounds: Vec<u32> = e1_ring
        .gens
        .iter()
        .map(|g| (c1_max / g.degree[0]).max(0) as u32 + 1)
        .collect();
    let e1 = SSDataset::new(
        &format!("localized E1 ({base_name})"),
        &["c1", "t"],
        sseq::ring_table(&e1_ring, &bounds, &keep)?,
    );
    // d1(q3) = q2^2 (h0 absorbed); degree shift (-2, +1).
    let d1 = Derivation::new(
        &e1_ring,
        vec![None, None, Some(vec![vec![0, 2, 0]])],
    )?;
    let einfty = SSDataset::new(
        &format!("localized E-infinity ({base_name})"),
        &["c1", "t"],
        sseq::homology_table(&e1_ring, &d1, &bounds, &keep)?,
    );
    let expected_ring = if mod2 {
        MonoRing::new(vec![
            GenSpec::poly("q1", &[2, 1]),
            GenSpec::ext("q2", &[6, 1]),
        ])?
    } else {
        MonoRing::new(vec![
            GenSpec::poly("q1^2", &[4, 2]),
            GenSpec::ext("q2", &[6, 1]),
        ])?
    };
    let eb: Vec<u32> = expected_ring
        .gens
        .iter()
        .map(|g| (c1_max / g.degree[0]).max(0) as u32 + 1)
        .collect();
    let expected = SSDataset::new(
        &format!("closed form ({base_name})"),
        &["c1", "t"],
        sseq::ring_table(&expected_ring, &eb, &keep)?,
    );
    let mismatches = einfty.diff(&expected, &keep);
    // Degree argument: every surviving class sits on c1 - 2t in {0, 2}
    // (sphere) or {0, 2, 4} (mod 2); a later differential d_r (r >= 2)
    // changes c1 - 2t by -2 - 2r <= -6, leaving the occupied band, so
    // every class is a permanent cycle.
    let mut offsets: Vec<i32> = Vec::new();
    for (deg, &dim) in &einfty.table.dims {
        if dim > 0 {
            offsets.push(deg[0] - 2 * deg[1]);
        }
    }
    let degree_argument_ok = match (offsets.iter().min(), offsets.iter().max()) {
        (Some(&lo), Some(&hi)) => hi - 6 < lo,
        _ => true,
    };
    Ok(EinftyAssembly {
        mod2,
        e1,
        einfty,
        expected,
        mismatches,
        degree_argument_ok,
    })
}

/// Dimensionwise check that the sphere E-infinity includes into the mod-2
/// E-infinity as the even-q1-part (the map induced by the degree-preserving
/// inclusion of coefficient towers).
pub fn inclusion_check(sphere: &EinftyAssembly, mod2: &EinftyAssembly) -> Vec<String> {
    let mut out = Vec::new();
    if sphere.mod2 || !mod2.mod2 {
        out.push("inclusion_check called with mismatched contexts".into());
        return out;
    }
    for (deg, &dim) in &sphere.einfty.table.dims {
        let big = mod2.einfty.table.dim(deg);
        if dim > big {
            out.push(format!(
                "({}, {}): sphere dim {dim} exceeds mod-2 dim {big}",
                deg[0], deg[1]
            ));
        }
    }
    // The even part of the mod-2 page must be exactly the sphere page:
    // q1^b q2^eps has even b iff (c1 - 6 eps)/2 is even, and each (c1, t)
    // carries at most one monomial on either side.
    for (deg, &big) in &mod2.einfty.table.dims {
        let small = sphere.einfty.table.dim(deg);
        if big == 0 {
            continue;
        }
        let (c1, t) = (deg[0], deg[1]);
        let eps = c1 - 2 * t; // 4*eps in {0,4} => eps in {0,1}
        let even_q1 = match eps {
            0 => (t % 2) == 0,
            4 => ((t - 1) % 2) == 0,
            _ => false,
        };
        let expected_small = if even_q1 { big } else { 0 };
        if small != expected_small {
            out.push(format!(
                "({c1}, {t}): sphere dim {small}, expected {expected_small} from the even part of mod-2"
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Alpha-family detection
// ---------------------------------------------------------------------------

/// A verified alpha-family representative with its localized detection.
#[derive(Debug, Clone)]
pub struct AlphaRecord {
    pub s: u32,
    pub context: &'static str,
    pub representative: String,
    pub detector: String,
    pub filtration: i64,
}

fn binom(n: u32, k: u32) -> i64 {
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// Verify the family representative of index s and its localized detection:
/// odd s — ((v1+2t1)^s - v1^s)/2 is an integral cocycle detected by
/// q1^{s-1} h0; even s >= 6 — v1^{s-4} v2 [t1] + v1^{s-3}[t2] +
/// v1^{s-3}[t1^3] is a mod-2 cocycle detected by q1^{s-4} q2 h0; s = 4 —
/// the mod-2 representative with leading [t1^4] runs the product procedure
/// landing on v2[t1|t1|t1|t1], detected by q2 h0^4.
pub fn detect_alpha(cc: &CobarCtx, s: u32, budget: usize) -> Result<AlphaRecord> {
    if s == 0 || s == 2 {
        return Err(Error::Other(format!(
            "no detection claim is made for s = {s}"
        )));
    }
    let vr = &cc.hopf.v;
    if s % 2 == 1 {
        // ((v1 + 2 t1)^s - v1^s)/2 = sum_k C(s,k) 2^{k-1} v1^{s-k} [t1^k].
        let mut rep = CobarElt::zero(ContextId::Bp, 1);
        for k in 1..=s {
            let mut cm = vr.mono_one();
            if s > k {
                let pos = vr.var_position(Family::V, 1, 0).unwrap();
                cm.exps[pos] = (s - k) as u8;
                cm.u += vr.vars[pos].u * (s - k) as i32;
            }
            let scalar = rat_int(binom(s, k) * (1i64 << (k - 1)));
            let coeff = Poly::from_mono(vr, cm).scale(&scalar);
            let t1k = slot(&cc.hopf.t, Family::T, 1, k as u8)?;
            rep.add_term(vec![t1k].into(), coeff);
        }
        if !cc.differential_rat(&rep)?.is_zero() {
            return Err(Error::Other(format!(
                "odd-index representative s={s} is not a cocycle"
            )));
        }
        let fil = cc
            .filtration(&rep)?
            .ok_or_else(|| Error::Other("zero representative".into()))?;
        if fil != (s - 1) as i64 {
            return Err(Error::Other(format!(
                "odd-index representative s={s} has filtration {fil}, expected {}",
                s - 1
            )));
        }
        let gr = cc.gr_project(&rep, fil)?;
        if !e_detects(cc, &gr, &[(1, (s - 1) as u8)], budget)? {
            return Err(Error::Other(format!(
                "odd-index representative s={s} is not detected by q1^{}*h0",
                s - 1
            )));
        }
        let detector = if s == 1 {
            "h0".to_string()
        } else {
            format!("q1^{}*h0", s - 1)
        };
        return Ok(AlphaRecord {
            s,
            context: "integral",
            representative: cc.display_rat(&rep),
            detector,
            filtration: fil,
        });
    }
    if s == 4 {
        return detect_alpha_four(cc, budget);
    }
    if s < 4 {
        return Err(Error::Other("even-index representatives need s >= 4".into()));
    }
    // Even s >= 6, mod-2 representative.
    let vc = |pairs: &[(u32, u8)]| -> Result<Poly<F2>> {
        let mut m = vr.mono_one();
        for &(i, e) in pairs {
            let pos = vr.var_position(Family::V, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += vr.vars[pos].u * e as i32;
        }
        Ok(Poly::from_mono(vr, m))
    };
    let mut rep = CobarElt::zero(ContextId::BpMod2, 1);
    rep.add_term(
        vec![slot(&cc.hopf.t, Family::T, 1, 1)?].into(),
        vc(&[(1, (s - 4) as u8), (2, 1)])?,
    );
    rep.add_term(
        vec![slot(&cc.hopf.t, Family::T, 2, 1)?].into(),
        vc(&[(1, (s - 3) as u8)])?,
    );
    rep.add_term(
        vec![slot(&cc.hopf.t, Family::T, 1, 3)?].into(),
        vc(&[(1, (s - 3) as u8)])?,
    );
    if !cc.differential_f2(&rep)?.is_zero() {
        return Err(Error::Other(format!(
            "even-index representative s={s} is not a mod-2 cocycle"
        )));
    }
    let fil = cc
        .filtration_mod2(&rep)
        .ok_or_else(|| Error::Other("zero representative".into()))?;
    if fil != (s - 3) as i64 {
        return Err(Error::Other(format!(
            "even-index representative s={s} has filtration {fil}, expected {}",
            s - 3
        )));
    }
    let gr = cc.gr_project_mod2(&rep, fil)?;
    let mut pairs: Vec<(u32, u8)> = vec![(2, 1)];
    if s > 4 {
        pairs.push((1, (s - 4) as u8));
    }
    if !e_detects(cc, &gr, &pairs, budget)? {
        return Err(Error::Other(format!(
            "even-index representative s={s} is not detected by q1^{}*q2*h0",
            s - 4
        )));
    }
    Ok(AlphaRecord {
        s,
        context: "mod2",
        representative: cc.display_f2(&rep),
        detector: if s == 4 {
            "q2*h0".into()
        } else {
            format!("q1^{}*q2*h0", s - 4)
        },
        filtration: fil,
    })
}

/// The s = 4 procedure: verify the five-term mod-2 representative, then
/// multiply by [t1|t1|t1], correct the filtration-0 leading word with a
/// solved coboundary, and confirm the filtration-1 all-t1 part is exactly
/// v2[t1|t1|t1|t1].
fn detect_alpha_four(cc: &CobarCtx, budget: usize) -> Result<AlphaRecord> {
    let vr = &cc.hopf.v;
    let vc = |pairs: &[(u32, u8)]| -> Result<Poly<F2>> {
        let mut m = vr.mono_one();
        for &(i, e) in pairs {
            let pos = vr.var_position(Family::V, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += vr.vars[pos].u * e as i32;
        }
        Ok(Poly::from_mono(vr, m))
    };
    let tslot = |i: u32, e: u8| slot(&cc.hopf.t, Family::T, i, e);
    let mut rep = CobarElt::zero(ContextId::BpMod2, 1);
    rep.add_term(vec![tslot(1, 4)?].into(), Poly::one(vr));
    rep.add_term(vec![tslot(1, 1)?].into(), vc(&[(2, 1)])?);
    rep.add_term(vec![tslot(2, 1)?].into(), vc(&[(1, 1)])?);
    rep.add_term(vec![tslot(1, 3)?].into(), vc(&[(1, 1)])?);
    rep.add_term(vec![tslot(1, 2)?].into(), vc(&[(1, 2)])?);
    if !cc.differential_f2(&rep)?.is_zero() {
        return Err(Error::Other("s=4 representative is not a mod-2 cocycle".into()));
    }

    // Solve d y = [z1^4|z1|z1|z1] in the (P;Q^0) cobar.
    let pr = &cc.hopf.p;
    let z1 = slot(pr, Family::Zeta, 1, 1)?;
    let z14 = slot(pr, Family::Zeta, 1, 4)?;
    let mut h = CobarElt::zero(ContextId::SphereP, 4);
    h.add_term(vec![z14, z1.clone(), z1.clone(), z1].into(), Poly::one(&cc.hopf.q));
    let y = crate::ext::solve_coboundary(cc, &h, budget)?;
    let y2 = cc.split_lift_mod2(&cc.reduce_spherep_mod_q0(&y)?)?;

    // W = rep * [t1|t1|t1] + d(y'): filtration-0 part cancels.
    let mut h03 = CobarElt::zero(ContextId::BpMod2, 3);
    h03.add_term(t1_word(cc, 3)?, Poly::one(vr));
    let prod = cc.product_f2(&rep, &h03)?;
    let w = prod.add(&cc.differential_f2(&y2)?);
    let fil = cc
        .filtration_mod2(&w)
        .ok_or_else(|| Error::Other("s=4 product vanished entirely".into()))?;
    if fil < 1 {
        return Err(Error::Other(
            "s=4 procedure: leading word did not cancel (filtration 0 remains)".into(),
        ));
    }
    let gr = cc.gr_project_mod2(&w, 1)?;
    // The all-z1 part of the filtration-1 piece must be exactly q2 [z1;4].
    let all_z1 = z1_word(cc, 4)?;
    let mut pure = CobarElt::zero(ContextId::Mod2P, 4);
    for (word, coeff) in &gr.terms {
        if *word == all_z1 {
            pure.add_term(word.clone(), coeff.clone());
        }
    }
    let mut expected = CobarElt::zero(ContextId::Mod2P, 4);
    expected.add_term(
        all_z1,
        Poly::from_mono(&cc.hopf.q, q_mono(&cc.hopf.q, &[(2, 1)])?),
    );
    if pure != expected {
        return Err(Error::Other(format!(
            "s=4 procedure: single-t1 filtration-1 part is {} (expected q2*[z1|z1|z1|z1])",
            cc.display_f2(&pure)
        )));
    }
    // Class-level detection on the exterior side.
    if !e_detects(cc, &gr, &[(2, 1)], budget)? {
        return Err(Error::Other(
            "s=4 procedure: product class is not detected by q2*h0^4".into(),
        ));
    }
    Ok(AlphaRecord {
        s: 4,
        context: "mod2",
        representative: cc.display_f2(&rep),
        detector: "q2*h0^4".into(),
        filtration: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<CobarCtx> {
        CobarCtx::new(24)
    }

    const BUDGET: usize = 1 << 22;

    #[test]
    fn reference_cocycles_are_cocycles() {
        let cc = ctx();
        for group in bp_item_cocycles(&cc).unwrap() {
            for x in group {
                assert!(cc.differential_rat(&x).unwrap().is_zero());
            }
        }
        for group in sphere_item_cocycles(&cc).unwrap() {
            for x in group {
                assert!(cc.differential_f2(&x).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn margolis_examples() {
        let cc = ctx();
        let a = margolis(&cc, 2, 4, false).unwrap();
        assert_eq!(a.homology_dim, 1);
        assert_eq!(a.basis, vec!["q1^2"]);
        let b = margolis(&cc, 1, 0, false).unwrap();
        assert_eq!(b.homology_dim, 0, "q0 is hit by P1");
        assert_eq!(b.dim_ker, 1);
        let c = margolis(&cc, 0, 0, false).unwrap();
        assert_eq!(c.homology_dim, 1);
        // mod-q0 module: P1 vanishes, every q0-free monomial survives.
        let d = margolis(&cc, 1, 2, true).unwrap();
        assert_eq!(d.homology_dim, 1);
        assert_eq!(d.basis, vec!["q1"]);
        let e = margolis(&cc, 1, 0, true).unwrap();
        assert_eq!(e.homology_dim, 0);
    }

    #[test]
    fn margolis_region_cross_checks() {
        let cc = ctx();
        for t in 0..=4 {
            for u in (0..=16).step_by(2) {
                margolis(&cc, t, u, false).unwrap();
                margolis(&cc, t, u, true).unwrap();
            }
        }
    }

    #[test]
    fn d1_of_unit_tower_is_zero() {
        let cc = ctx();
        for t in 1..=3 {
            let mut x = CobarElt::zero(ContextId::SphereP, 0);
            x.add_term(
                CobarCtx::empty_word(),
                Poly::from_mono(&cc.hopf.q, q_mono(&cc.hopf.q, &[(0, t)]).unwrap()),
            );
            let d = novikov_d1(&cc, &x, BUDGET).unwrap();
            assert!(d.zero, "d1(q0^{t}) must vanish");
        }
    }

    #[test]
    fn d1_is_zero_on_first_towers() {
        let cc = ctx();
        let items = sphere_item_cocycles(&cc).unwrap();
        assert!(novikov_d1(&cc, &items[1][0], BUDGET).unwrap().zero);
        assert!(novikov_d1(&cc, &items[2][0], BUDGET).unwrap().zero);
        assert!(d1_rep_independent(&cc, &items[1][0], BUDGET).unwrap());
    }

    #[test]
    fn lift_exponents_for_low_towers() {
        let cc = ctx();
        let l0 = minimal_lift_exponent(&cc, 0, BUDGET).unwrap();
        assert_eq!(l0.exponent, 1);
        let l1 = minimal_lift_exponent(&cc, 1, BUDGET).unwrap();
        assert_eq!(l1.exponent, 2);
    }

    #[test]
    fn alpha_odd_examples() {
        let cc = ctx();
        let a1 = detect_alpha(&cc, 1, BUDGET).unwrap();
        assert_eq!(a1.detector, "h0");
        let a3 = detect_alpha(&cc, 3, BUDGET).unwrap();
        assert_eq!(a3.detector, "q1^2*h0");
        assert_eq!(a3.filtration, 2);
        assert!(detect_alpha(&cc, 2, BUDGET).is_err());
    }

    #[test]
    fn alpha_even_example() {
        let cc = ctx();
        let a6 = detect_alpha(&cc, 6, BUDGET).unwrap();
        assert_eq!(a6.detector, "q1^2*q2*h0");
        assert_eq!(a6.context, "mod2");
    }

    #[test]
    fn alpha_four_procedure() {
        let cc = ctx();
        let a4 = detect_alpha(&cc, 4, BUDGET).unwrap();
        assert_eq!(a4.detector, "q2*h0^4");
        assert_eq!(a4.context, "mod2");
    }

    #[test]
    fn tower_facts_and_assembly() {
        let cc = ctx();
        let facts = tower_d1_facts(&cc, BUDGET).unwrap();
        println!(
            "q3-tower lift: N = {}, u = {}, lift = {}",
            facts.lift.exponent,
            facts.lift.u,
            cc.display_f2(&facts.lift.lift)
        );
        assert!(facts.q1sq_tower_zero);
        assert!(facts.q2_tower_zero);
        assert!(facts.lift.exponent <= 5);
        assert!(facts.lift_d1_detected);
        let sphere = assemble_einfty(&cc, false, 20, 8, &facts, BUDGET).unwrap();
        assert!(sphere.mismatches.is_empty(), "{:?}", sphere.mismatches);
        assert!(sphere.degree_argument_ok);
        let mod2 = assemble_einfty(&cc, true, 20, 8, &facts, BUDGET).unwrap();
        assert!(mod2.mismatches.is_empty(), "{:?}", mod2.mismatches);
        assert!(mod2.degree_argument_ok);
        let incl = inclusion_check(&sphere, &mod2);
        assert!(incl.is_empty(), "{:?}", incl);
    }

    #[test]
    fn localize_small_region() {
        let cc = ctx();
        let region = Region {
            max_s: 5,
            max_u: 14,
            max_t: 4,
        };
        let report = localize_h0(&cc, false, region, BUDGET).unwrap();
        assert!(
            report.violations.is_empty(),
            "violations: {:?}",
            report.violations
        );
        let g = &report.groups[&(4, 12, 2)];
        assert!(g.certified);
        assert_eq!(g.stable_dim, Some(1));
        assert_eq!(g.names, vec!["q1^2*h0^4"]);
    }
}
