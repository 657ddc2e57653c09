//! Multidegrees and generator families.
//!
//! Every object in the crate is graded by some subset of four integers:
//! cohomological degree `s`, Novikov weight `t` (number of `q`-factors, or
//! 2-adic filtration), internal degree `u`, and motivic weight `w`.
//! The stem is always the derived quantity `u - s`.

use crate::error::{Error, Result};

/// A full multidegree. `w` is only meaningful in motivic contexts and is
/// `None` elsewhere; `t` is only meaningful where a Novikov filtration
/// exists and is conventionally 0 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiDegree {
    pub s: i32,
    pub t: i32,
    pub u: i32,
    pub w: Option<i32>,
}

impl MultiDegree {
    pub fn new(s: i32, t: i32, u: i32) -> Self {
        MultiDegree { s, t, u, w: None }
    }

    pub fn with_weight(s: i32, t: i32, u: i32, w: i32) -> Self {
        MultiDegree { s, t, u, w: Some(w) }
    }

    /// The stem (topological dimension) is `u - s`.
    pub fn stem(&self) -> i32 {
        self.u - self.s
    }

    /// Coweight `stem - w`; only defined when a weight is present.
    pub fn coweight(&self) -> Option<i32> {
        self.w.map(|w| self.stem() - w)
    }
}

impl std::fmt::Display for MultiDegree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.w {
            Some(w) => write!(f, "(s={}, t={}, u={}, w={})", self.s, self.t, self.u, w),
            None => write!(f, "(s={}, t={}, u={})", self.s, self.t, self.u),
        }
    }
}

/// The families of polynomial generators used across the crate.
///
/// * `Zeta`  — dual Steenrod generators `z1, z2, ...` spanning the quotient
///   Hopf algebra of squares; `|z_i| = 2(2^i - 1)`.
/// * `Q`     — associated-graded coefficient generators `q0, q1, ...` with
///   `|q_i| = (t, u) = (1, 2(2^i - 1))`.
/// * `V`     — Hazewinkel generators `v1, v2, ...`, `|v_i| = 2(2^i - 1)`,
///   each contributing 1 to the 2-adic filtration.
/// * `M`     — rational log coefficients `m1, m2, ...`, same internal degree.
/// * `T`     — Hopf-algebroid generators `t1, t2, ...`, same internal degree.
/// * `Xi`    — motivic generators `xi_i`, `|xi_i| = (u, w) = (2^{i+1}-2, 2^i-1)`.
/// * `TauFam`— motivic generators `tau_i`, `|tau_i| = (2^{i+1}-1, 2^i-1)`.
/// * `TauBase` — the ground-ring variable `tau`, `|tau| = (0, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Zeta,
    Q,
    V,
    M,
    T,
    Xi,
    TauFam,
    TauBase,
}

impl Family {
    /// Smallest legal generator index for the family.
    pub fn min_index(self) -> u32 {
        match self {
            Family::Zeta | Family::V | Family::M | Family::T | Family::Xi => 1,
            Family::Q | Family::TauFam => 0,
            Family::TauBase => 0,
        }
    }

    /// Internal degree `u` of the `i`-th generator.
    pub fn u_degree(self, i: u32) -> i32 {
        match self {
            Family::Zeta | Family::Q | Family::V | Family::M | Family::T => {
                2 * ((1i32 << i) - 1)
            }
            Family::Xi => (1i32 << (i + 1)) - 2,
            Family::TauFam => (1i32 << (i + 1)) - 1,
            Family::TauBase => 0,
        }
    }

    /// Motivic weight `w` of the `i`-th generator (motivic families only).
    pub fn w_degree(self, i: u32) -> i32 {
        match self {
            Family::Xi | Family::TauFam => (1i32 << i) - 1,
            Family::TauBase => -1,
            // Non-motivic generators carry no weight; callers must not ask.
            _ => 0,
        }
    }

    /// Novikov weight `t` of one generator: 1 for `q`/`v` (each factor is one
    /// step of 2-adic filtration), 0 otherwise.
    pub fn t_degree(self) -> i32 {
        match self {
            Family::Q | Family::V => 1,
            _ => 0,
        }
    }

    /// Number of generators with internal degree at most `max_u`.
    /// This is the derived truncation constant for a given degree bound.
    pub fn count_through(self, max_u: i32) -> u32 {
        let mut n = 0u32;
        let mut i = self.min_index();
        while self.u_degree(i) <= max_u && i < 32 {
            n += 1;
            i += 1;
        }
        n
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Family::Zeta => "z",
            Family::Q => "q",
            Family::V => "v",
            Family::M => "m",
            Family::T => "t",
            Family::Xi => "xi",
            Family::TauFam => "tau",
            Family::TauBase => "tau",
        }
    }
}

/// Check a degree bound, producing the standard out-of-range error.
pub fn check_u_bound(u: i32, max_u: i32) -> Result<()> {
    if u > max_u {
        Err(Error::DegreeOutOfRange(format!(
            "requested internal degree {u} exceeds the configured bound {max_u}"
        )))
    } else if u < 0 {
        Err(Error::DegreeOutOfRange(format!(
            "internal degree must be non-negative, got {u}"
        )))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_degrees() {
        assert_eq!(Family::Zeta.u_degree(1), 2);
        assert_eq!(Family::Zeta.u_degree(2), 6);
        assert_eq!(Family::Zeta.u_degree(3), 14);
        assert_eq!(Family::Q.u_degree(0), 0);
        assert_eq!(Family::Q.u_degree(1), 2);
        assert_eq!(Family::Q.u_degree(2), 6);
        assert_eq!(Family::Q.u_degree(3), 14);
        assert_eq!(Family::Xi.u_degree(1), 2);
        assert_eq!(Family::Xi.w_degree(1), 1);
        assert_eq!(Family::Xi.u_degree(2), 6);
        assert_eq!(Family::Xi.w_degree(2), 3);
        assert_eq!(Family::TauFam.u_degree(0), 1);
        assert_eq!(Family::TauFam.w_degree(0), 0);
        assert_eq!(Family::TauFam.u_degree(2), 7);
        assert_eq!(Family::TauFam.w_degree(2), 3);
        assert_eq!(Family::TauBase.u_degree(0), 0);
        assert_eq!(Family::TauBase.w_degree(0), -1);
    }

    #[test]
    fn truncation_counts() {
        // Generators of internal degree <= 24: z1 (2), z2 (6), z3 (14).
        assert_eq!(Family::Zeta.count_through(24), 3);
        // q0, q1, q2, q3 have degrees 0, 2, 6, 14.
        assert_eq!(Family::Q.count_through(24), 4);
        assert_eq!(Family::Q.count_through(1), 1);
        // tau0..tau3 have degrees 1, 3, 7, 15.
        assert_eq!(Family::TauFam.count_through(24), 4);
    }

    #[test]
    fn stem_and_coweight() {
        let d = MultiDegree::with_weight(1, 0, 7, 4);
        assert_eq!(d.stem(), 6);
        assert_eq!(d.coweight(), Some(2));
        assert_eq!(MultiDegree::new(3, 1, 16).stem(), 13);
    }
}
