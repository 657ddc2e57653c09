//! Cohomology of the cobar complexes: graded pieces, canonical class bases,
//! products, coboundary solving, and matric-free triple Massey products
//! with computed indeterminacy.

use crate::cobar::{Block, CobarCtx, CobarElt, ContextId};
use crate::error::{Error, Result};
use crate::grading::Family;
use crate::linalg::{pack_bits, unpack_bits, BitMatrix, QuotientSpace};
use crate::poly::{Poly, F2};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

/// One cohomology group H^{s,u}(-, coefficient degree t) with a canonical
/// class basis.
pub struct ExtBlock {
    pub ctx: ContextId,
    pub s: u32,
    pub u: i32,
    pub t: Option<i32>,
    /// The underlying cochain basis.
    pub omega: Block,
    /// Cycles modulo boundaries with canonical representatives.
    pub space: QuotientSpace,
}

impl ExtBlock {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// The canonical cobar representative of class `i`.
    pub fn class_rep(&self, cc: &CobarCtx, i: usize) -> CobarElt<F2> {
        cc.vec_to_elt(&self.space.rep_vectors[i], &self.omega)
    }

    /// Coordinates of a cocycle's class; None if the element is not a cycle
    /// in this block (or lies outside it).
    pub fn express(&self, cc: &CobarCtx, x: &CobarElt<F2>) -> Result<Option<Vec<bool>>> {
        let v = cc.elt_to_vec(x, &self.omega)?;
        Ok(self.space.express(&v))
    }
}

/// Compute one cohomology block.
pub fn ext_block(
    cc: &CobarCtx,
    ctx: ContextId,
    s: u32,
    u: i32,
    t: Option<i32>,
    budget: usize,
) -> Result<ExtBlock> {
    let omega = cc.block(ctx, s, u, t, budget)?;
    let next = cc.block(ctx, s + 1, u, t, budget)?;
    let d_out = cc.d_matrix(&omega, &next)?;
    let kernel = d_out.left_kernel();
    let cycles: Vec<Vec<u64>> = (0..kernel.rows).map(|r| kernel.row_vec(r)).collect();
    let boundaries: Vec<Vec<u64>> = if s == 0 {
        Vec::new()
    } else {
        let prev = cc.block(ctx, s - 1, u, t, budget)?;
        let d_in = cc.d_matrix(&prev, &omega)?;
        (0..d_in.rows).map(|r| d_in.row_vec(r)).collect()
    };
    let space = QuotientSpace::new(omega.dim(), &cycles, &boundaries);
    Ok(ExtBlock {
        ctx,
        s,
        u,
        t,
        omega,
        space,
    })
}

/// A rectangular region of tridegrees.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub max_s: u32,
    pub max_u: i32,
    pub max_t: i32,
}

/// Dimensions of every group in a region, computed in parallel and collected
/// deterministically. Keys are (s, u, t); zero-dimensional groups are kept
/// so that consumers can verify vanishing.
pub fn dims_region(
    cc: &Arc<CobarCtx>,
    ctx: ContextId,
    region: Region,
    budget: usize,
) -> Result<BTreeMap<(u32, i32, i32), usize>> {
    let mut tasks = Vec::new();
    for s in 0..=region.max_s {
        for u in (2 * s as i32)..=region.max_u {
            for t in 0..=region.max_t {
                tasks.push((s, u, t));
            }
        }
    }
    let computed: Result<Vec<((u32, i32, i32), usize)>> = tasks
        .par_iter()
        .map(|&(s, u, t)| {
            ext_block(cc, ctx, s, u, Some(t), budget).map(|b| ((s, u, t), b.dim()))
        })
        .collect();
    Ok(computed?.into_iter().collect())
}

/// Multiply two cocycles and express the product in a target block.
pub fn multiply_classes(
    cc: &CobarCtx,
    x: &CobarElt<F2>,
    y: &CobarElt<F2>,
    target: &ExtBlock,
) -> Result<Option<Vec<bool>>> {
    let prod = cc.product_f2(x, y)?;
    target.express(cc, &prod)
}

/// Solve d(y) = rhs one filtration down; deterministic (free variables are
/// zero). Errors if rhs is not a coboundary.
pub fn solve_coboundary(
    cc: &CobarCtx,
    rhs: &CobarElt<F2>,
    budget: usize,
) -> Result<CobarElt<F2>> {
    if rhs.s == 0 {
        return Err(Error::Solve("cannot integrate an s = 0 element".into()));
    }
    let (u, t) = cc
        .degree_f2(rhs)
        .ok_or_else(|| Error::Grading("inhomogeneous right-hand side".into()))?;
    let from = cc.block(rhs.ctx, rhs.s - 1, u, Some(t), budget)?;
    let to = cc.block(rhs.ctx, rhs.s, u, Some(t), budget)?;
    let dm = cc.d_matrix(&from, &to)?;
    let v = cc.elt_to_vec(rhs, &to)?;
    let x = dm
        .solve_left(&v)
        .ok_or_else(|| Error::Solve(format!("{} is not a coboundary", cc.display_f2(rhs))))?;
    Ok(cc.vec_to_elt(&x, &from))
}

/// A triple Massey product with its indeterminacy subspace.
pub struct MasseyResult {
    /// Class coordinates of the computed representative in the target block.
    pub value: Vec<bool>,
    /// The representing cocycle a*u2 + u1*c.
    pub value_elt: CobarElt<F2>,
    /// Reduced row basis (packed over class coordinates) of a*H + H*c.
    pub indeterminacy: Vec<Vec<u64>>,
    /// Dimension of the target cohomology group.
    pub target_dim: usize,
}

impl MasseyResult {
    pub fn indeterminacy_dim(&self) -> usize {
        self.indeterminacy.len()
    }

    /// Is the class with the given coordinates a member of the Massey-product
    /// coset (value + indeterminacy)?
    pub fn contains(&self, coords: &[bool]) -> bool {
        debug_assert_eq!(coords.len(), self.value.len());
        let diff: Vec<bool> = coords
            .iter()
            .zip(&self.value)
            .map(|(a, b)| a ^ b)
            .collect();
        let mut v = pack_bits(&diff);
        if v.is_empty() {
            v.push(0);
        }
        for row in &self.indeterminacy {
            if let Some(p) = first_bit(row) {
                if (v[p / 64] >> (p % 64)) & 1 == 1 {
                    for (d, s) in v.iter_mut().zip(row) {
                        *d ^= s;
                    }
                }
            }
        }
        v.iter().all(|&w| w == 0)
    }
}

fn first_bit(v: &[u64]) -> Option<usize> {
    for (k, &w) in v.iter().enumerate() {
        if w != 0 {
            return Some(k * 64 + w.trailing_zeros() as usize);
        }
    }
    None
}

/// The triple Massey product <a, b, c> for cocycles with ab and bc
/// coboundaries. Returns the class of a*u2 + u1*c together with the full
/// indeterminacy a*H + H*c, both in the canonical basis of the target group.
pub fn massey(
    cc: &CobarCtx,
    a: &CobarElt<F2>,
    b: &CobarElt<F2>,
    c: &CobarElt<F2>,
    budget: usize,
) -> Result<MasseyResult> {
    for (label, x) in [("a", a), ("b", b), ("c", c)] {
        if !cc.differential_f2(x)?.is_zero() {
            return Err(Error::MasseyUndefined(format!("{label} is not a cocycle")));
        }
    }
    let ab = cc.product_f2(a, b)?;
    let bc = cc.product_f2(b, c)?;
    let u1 = solve_coboundary(cc, &ab, budget)
        .map_err(|e| Error::MasseyUndefined(format!("ab is not a coboundary: {e}")))?;
    let u2 = solve_coboundary(cc, &bc, budget)
        .map_err(|e| Error::MasseyUndefined(format!("bc is not a coboundary: {e}")))?;
    massey_with_system(cc, a, c, &u1, &u2, budget)
}

/// The Massey product evaluated on a caller-supplied defining system
/// (d u1 = ab, d u2 = bc are the caller's responsibility to have checked
/// against their own a, b, c; this recomputes and verifies closure).
pub fn massey_with_system(
    cc: &CobarCtx,
    a: &CobarElt<F2>,
    c: &CobarElt<F2>,
    u1: &CobarElt<F2>,
    u2: &CobarElt<F2>,
    budget: usize,
) -> Result<MasseyResult> {
    let w = cc.product_f2(a, u2)?.add(&cc.product_f2(u1, c)?);
    if !cc.differential_f2(&w)?.is_zero() {
        return Err(Error::MasseyUndefined(
            "a u2 + u1 c is not closed; the defining system is inconsistent".into(),
        ));
    }
    let (u, t) = cc
        .degree_f2(&w)
        .ok_or_else(|| Error::Grading("inhomogeneous Massey value".into()))?;
    let target = ext_block(cc, w.ctx, w.s, u, Some(t), budget)?;
    let value = target
        .express(cc, &w)?
        .ok_or_else(|| Error::MasseyUndefined("value is not a cycle of the block".into()))?;

    // Indeterminacy a*H(right) + H(left)*c.
    let (ua, ta) = cc.degree_f2(a).ok_or_else(|| Error::Grading("a inhomogeneous".into()))?;
    let (uc, tc) = cc.degree_f2(c).ok_or_else(|| Error::Grading("c inhomogeneous".into()))?;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let right = ext_block(cc, w.ctx, w.s - a.s, u - ua, Some(t - ta), budget)?;
    for i in 0..right.dim() {
        let g = right.class_rep(cc, i);
        if let Some(coords) = multiply_classes(cc, a, &g, &target)? {
            rows.push(pack_coords(&coords));
        } else {
            return Err(Error::Other("indeterminacy product is not a cycle".into()));
        }
    }
    let left = ext_block(cc, w.ctx, w.s - c.s, u - uc, Some(t - tc), budget)?;
    for i in 0..left.dim() {
        let g = left.class_rep(cc, i);
        if let Some(coords) = multiply_classes(cc, &g, c, &target)? {
            rows.push(pack_coords(&coords));
        } else {
            return Err(Error::Other("indeterminacy product is not a cycle".into()));
        }
    }
    let indeterminacy = reduce_rows(rows, target.dim());
    Ok(MasseyResult {
        value,
        value_elt: w,
        indeterminacy,
        target_dim: target.dim(),
    })
}

fn pack_coords(coords: &[bool]) -> Vec<u64> {
    let mut v = pack_bits(coords);
    if v.is_empty() {
        v.push(0);
    }
    v
}

/// Row-reduce a set of packed rows, returning the nonzero reduced basis.
fn reduce_rows(rows: Vec<Vec<u64>>, cols: usize) -> Vec<Vec<u64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut m = BitMatrix::zero(rows.len(), cols.max(1));
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, r);
    }
    let rr = m.rref();
    rr.pivots
        .iter()
        .map(|&(row, _)| rr.reduced.row_vec(row))
        .collect()
}

/// The class of [z1^{2^n}] (the n-th tower generator) in its block, if
/// nonzero.
pub fn hn_coords(cc: &CobarCtx, ctx: ContextId, n: u32, budget: usize) -> Result<Option<Vec<bool>>> {
    let u = 1 << (n + 1);
    let target = ext_block(cc, ctx, 1, u, Some(0), budget)?;
    let mut z = cc.hopf.p.mono_var(Family::Zeta, 1, 0)?;
    let pos = cc
        .hopf
        .p
        .var_position(Family::Zeta, 1, 0)
        .expect("z1 present");
    z.exps[pos] = 1 << n;
    z.u = 2 * (1 << n);
    let mut x = CobarElt::zero(ctx, 1);
    x.add_term(vec![z].into(), Poly::one(&cc.hopf.q));
    target.express(cc, &x)
}

/// Convert class coordinates to a packed vector (helper for consumers that
/// build spans of classes).
pub fn coords_to_packed(coords: &[bool]) -> Vec<u64> {
    pack_coords(coords)
}

/// Unpack helper mirroring `coords_to_packed`.
pub fn packed_to_coords(v: &[u64], dim: usize) -> Vec<bool> {
    unpack_bits(v, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Rat;

    fn ctx() -> Arc<CobarCtx> {
        CobarCtx::new(24)
    }

    fn qmono(cc: &CobarCtx, exps: &[(u32, u8)]) -> crate::poly::Mono {
        let mut m = cc.hopf.q.mono_one();
        for &(i, e) in exps {
            let pos = cc.hopf.q.var_position(Family::Q, i, 0).unwrap();
            m.exps[pos] = e;
            m.u += cc.hopf.q.vars[pos].u * e as i32;
        }
        m
    }

    fn zword(cc: &CobarCtx, slots: &[&[(u32, u8)]]) -> crate::cobar::Word {
        slots
            .iter()
            .map(|exps| {
                let mut m = cc.hopf.p.mono_one();
                for &(i, e) in *exps {
                    let pos = cc.hopf.p.var_position(Family::Zeta, i, 0).unwrap();
                    m.exps[pos] = e;
                    m.u += cc.hopf.p.vars[pos].u * e as i32;
                }
                m
            })
            .collect::<Vec<_>>()
            .into()
    }

    const BUDGET: usize = 1 << 22;

    #[test]
    fn h0_tower_base() {
        // H^{1,2}(Q^0) is one-dimensional, generated by [z1].
        let cc = ctx();
        let b = ext_block(&cc, ContextId::SphereP, 1, 2, Some(0), BUDGET).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(cc.display_f2(&b.class_rep(&cc, 0)), "[z1]");
        // h0 = [z1] is its generator.
        let h = hn_coords(&cc, ContextId::SphereP, 0, BUDGET).unwrap().unwrap();
        assert_eq!(h, vec![true]);
    }

    #[test]
    fn unit_group() {
        // H^{0,0}(Q^t) = <q0^t>.
        let cc = ctx();
        for t in 0..4 {
            let b = ext_block(&cc, ContextId::SphereP, 0, 0, Some(t), BUDGET).unwrap();
            assert_eq!(b.dim(), 1, "t = {t}");
        }
        // H^{0,u}(Q^t) = 0 for u > 0: q-monomials of positive degree are
        // never comodule-primitive.
        for (u, t) in [(2, 1), (4, 2), (6, 1)] {
            let b = ext_block(&cc, ContextId::SphereP, 0, u, Some(t), BUDGET).unwrap();
            assert_eq!(b.dim(), 0, "u = {u}, t = {t}");
        }
    }

    #[test]
    fn first_stem_groups() {
        let cc = ctx();
        // Sum over t of dim H^{1,4}: the stem-3 column at filtration 1.
        let mut total = 0;
        for t in 0..=4 {
            total += ext_block(&cc, ContextId::SphereP, 1, 4, Some(t), BUDGET)
                .unwrap()
                .dim();
        }
        assert_eq!(total, 2);
    }

    #[test]
    fn massey_first_periodic_family() {
        // <h1, q0^2, h0> contains q1^2 [z1] + q0 q1 [z1^2] + q0^2 [z1^3].
        let cc = ctx();
        let h0 = cc.h0_f2(ContextId::SphereP).unwrap();
        let mut h1 = CobarElt::zero(ContextId::SphereP, 1);
        h1.add_term(zword(&cc, &[&[(1, 2)]]), Poly::one(&cc.hopf.q));
        let mut q0sq = CobarElt::zero(ContextId::SphereP, 0);
        q0sq.add_term(CobarCtx::empty_word(), Poly::from_mono(&cc.hopf.q, qmono(&cc, &[(0, 2)])));

        let res = massey(&cc, &h1, &q0sq, &h0, BUDGET).unwrap();

        // The target cocycle.
        let mut target = CobarElt::zero(ContextId::SphereP, 1);
        target.add_term(zword(&cc, &[&[(1, 1)]]), Poly::from_mono(&cc.hopf.q, qmono(&cc, &[(1, 2)])));
        target.add_term(zword(&cc, &[&[(1, 2)]]), Poly::from_mono(&cc.hopf.q, qmono(&cc, &[(0, 1), (1, 1)])));
        target.add_term(zword(&cc, &[&[(1, 3)]]), Poly::from_mono(&cc.hopf.q, qmono(&cc, &[(0, 2)])));
        let tb = ext_block(&cc, ContextId::SphereP, 1, 6, Some(2), BUDGET).unwrap();
        let coords = tb.express(&cc, &target).unwrap().expect("target is a cycle");
        assert!(res.contains(&coords), "Massey coset misses the expected class");
    }

    #[test]
    fn massey_defining_system_shift() {
        // Changing the defining system by a cycle moves the value within the
        // indeterminacy coset. <[z1|z1], q0, [z1]> has u1 in cochain degree 1
        // where the cycle q0 [z1^2] provides a genuine shift.
        let cc = ctx();
        let h0 = cc.h0_f2(ContextId::SphereP).unwrap();
        let h0sq = cc.product_f2(&h0, &h0).unwrap();
        let mut q0 = CobarElt::zero(ContextId::SphereP, 0);
        q0.add_term(CobarCtx::empty_word(), Poly::from_mono(&cc.hopf.q, qmono(&cc, &[(0, 1)])));

        let ab = cc.product_f2(&h0sq, &q0).unwrap();
        let bc = cc.product_f2(&q0, &h0).unwrap();
        let u1 = solve_coboundary(&cc, &ab, BUDGET).unwrap();
        let u2 = solve_coboundary(&cc, &bc, BUDGET).unwrap();
        let base = massey_with_system(&cc, &h0sq, &h0, &u1, &u2, BUDGET).unwrap();

        // Shift u1 by the cycle q0 [z1^2] of the same degree.
        let mut shift = CobarElt::zero(ContextId::SphereP, 1);
        shift.add_term(zword(&cc, &[&[(1, 2)]]), Poly::from_mono(&cc.hopf.q, qmono(&cc, &[(0, 1)])));
        assert!(cc.differential_f2(&shift).unwrap().is_zero());
        let shifted =
            massey_with_system(&cc, &h0sq, &h0, &u1.add(&shift), &u2, BUDGET).unwrap();
        assert!(base.contains(&shifted.value));
        assert!(shifted.contains(&base.value));
        assert!(base.contains(&base.value));
    }

    #[test]
    fn region_dims_deterministic() {
        let cc = ctx();
        let region = Region {
            max_s: 2,
            max_u: 8,
            max_t: 3,
        };
        let a = dims_region(&cc, ContextId::SphereP, region, BUDGET).unwrap();
        let b = dims_region(&cc, ContextId::SphereP, region, BUDGET).unwrap();
        assert_eq!(a, b);
        // Spot checks: the unit and the tower class.
        assert_eq!(a[&(0, 0, 0)], 1);
        assert_eq!(a[&(1, 2, 0)], 1);
    }

    #[test]
    fn suspension_free_rational_sanity() {
        // The rational context cooperates with ext glue: gr of a split lift
        // of a canonical representative is the representative itself.
        let cc = ctx();
        let b = ext_block(&cc, ContextId::SphereP, 1, 2, Some(0), BUDGET).unwrap();
        let rep = b.class_rep(&cc, 0);
        let lift = cc.split_lift(&rep).unwrap();
        let fil = cc.filtration(&lift).unwrap().unwrap();
        assert_eq!(fil, 0);
        let back = cc.gr_project(&lift, 0).unwrap();
        assert_eq!(back, rep);
        let _: &CobarElt<Rat> = &lift;
    }
}
