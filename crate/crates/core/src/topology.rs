//! Cohomological bookkeeping for a conifold `L` with `s` singular (CS) ends
//! and `l` asymptotically conical (AC) ends.
//!
//! Betti numbers are inputs. This module derives the dimensions that the
//! long exact sequences of the pairs `(L, Σ)` and `(L, Σ₀)` force on them,
//! and polices the inputs for consistency with those sequences. Here `Σ` is
//! the union of all links and `Σ₀` the union of the CS links.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConifoldTopology {
    pub m: usize,
    /// `b¹` of each CS link.
    pub cs_link_b1: Vec<usize>,
    /// `b¹` of each AC link.
    pub ac_link_b1: Vec<usize>,
    /// `dim H¹(L)`
    pub b1: usize,
    /// `dim H¹_c(L)`
    pub b1_c: usize,
    /// `dim H¹_{c,•}(L)`: support bounded away from the AC ends only.
    pub b1_c_bullet: Option<usize>,
    pub connected: bool,
}

impl ConifoldTopology {
    pub fn new(m: usize, cs_link_b1: Vec<usize>, ac_link_b1: Vec<usize>, b1: usize, b1_c: usize) -> Self {
        Self {
            m,
            cs_link_b1,
            ac_link_b1,
            b1,
            b1_c,
            b1_c_bullet: None,
            connected: true,
        }
    }

    pub fn compact(m: usize, b1: usize) -> Self {
        Self::new(m, Vec::new(), Vec::new(), b1, b1)
    }

    pub fn with_bullet(mut self, b1_c_bullet: usize) -> Self {
        self.b1_c_bullet = Some(b1_c_bullet);
        self
    }

    /// The cone `Σ × (0, ∞)` over a closed connected orientable link, seen
    /// as a conifold with one CS end and one AC end. Its compactly supported
    /// `H¹` is dual to `H^{m−1}(Σ) = ℝ`, and `H¹_{c,•}` vanishes.
    pub fn cone(m: usize, link_b1: usize) -> Self {
        Self::new(m, vec![link_b1], vec![link_b1], link_b1, 1).with_bullet(0)
    }

    pub fn s(&self) -> usize {
        self.cs_link_b1.len()
    }

    pub fn l(&self) -> usize {
        self.ac_link_b1.len()
    }

    pub fn e(&self) -> usize {
        self.s() + self.l()
    }

    pub fn is_compact(&self) -> bool {
        self.e() == 0
    }

    /// Every violated constraint; empty when the data is consistent.
    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    /// Turns the first violation into an error.
    pub fn check(&self) -> Result<()> {
        if self.m < 3 {
            return Err(Error::InvalidInput(format!("dimension m = {} is below 3", self.m)));
        }
        if !self.connected {
            return Err(Error::InvalidInput("L must be connected".into()));
        }
        match self.validate().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::InconsistentTopology(v.to_string())),
        }
    }
}

/// A failed consistency constraint and the sequence it comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: String,
    pub source: &'static str,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.constraint, self.source)
    }
}

const PAIR_SEQUENCE: &str = "exact sequence of the pair (L, Σ)";
const BULLET_SEQUENCE: &str = "exact sequence of the pair (L, Σ₀)";
const STANDING: &str = "standing assumptions";

pub fn validate(t: &ConifoldTopology) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut fail = |constraint: String, source| out.push(Violation { constraint, source });
    if t.m < 3 {
        fail(format!("m = {} must be at least 3", t.m), STANDING);
    }
    if !t.connected {
        fail("L must be connected".into(), STANDING);
    }
    let (s, e) = (t.s(), t.e());
    if e == 0 {
        if t.b1_c != t.b1 {
            fail(format!("compact L needs b1_c = b1, got {} and {}", t.b1_c, t.b1), PAIR_SEQUENCE);
        }
    } else {
        if t.b1_c + 1 < e {
            fail(format!("b1_c = {} must be at least e − 1 = {}", t.b1_c, e - 1), PAIR_SEQUENCE);
        } else {
            let ker = t.b1_c + 1 - e;
            let links: usize = t.cs_link_b1.iter().chain(&t.ac_link_b1).sum();
            if t.b1 < ker {
                fail(format!("b1 = {} is smaller than dim Ker ρ = {ker}", t.b1), PAIR_SEQUENCE);
            } else if t.b1 - ker > links {
                fail(
                    format!("image of ρ has dimension {} but the links only carry b1 = {links}", t.b1 - ker),
                    PAIR_SEQUENCE,
                );
            }
        }
    }
    if let Some(bullet) = t.b1_c_bullet {
        if s == 0 {
            if bullet != t.b1 {
                fail(format!("with no CS ends b1_c_bullet = {bullet} must equal b1 = {}", t.b1), BULLET_SEQUENCE);
            }
        } else if bullet + 1 < s {
            fail(format!("b1_c_bullet = {bullet} must be at least s − 1 = {}", s - 1), BULLET_SEQUENCE);
        } else {
            let ker = bullet + 1 - s;
            let links: usize = t.cs_link_b1.iter().sum();
            if t.b1 < ker {
                fail(format!("b1 = {} is smaller than dim H̃_{{0,•}} = {ker}", t.b1), BULLET_SEQUENCE);
            } else if t.b1 - ker > links {
                fail(
                    format!("image in H¹(Σ₀) has dimension {} but the CS links only carry b1 = {links}", t.b1 - ker),
                    BULLET_SEQUENCE,
                );
            }
        }
    }
    out
}

/// `dim H̃¹_c = b1_c − e + 1`, the kernel of `ρ: H¹(L) → H¹(Σ)`.
pub fn tilde_hc1_dim(b1_c: usize, e: usize) -> Result<usize> {
    if e == 0 {
        return Err(Error::InvalidInput("dim H̃¹_c needs at least one end".into()));
    }
    (b1_c + 1)
        .checked_sub(e)
        .ok_or_else(|| Error::InconsistentTopology(format!("b1_c = {b1_c} is below e − 1 = {}", e - 1)))
}

/// `dim H̃_{0,•} = b1_c_bullet − s + 1`, the kernel of `H¹(L) → H¹(Σ₀)`.
pub fn tilde_h0bullet_dim(b1_c_bullet: usize, s: usize) -> Result<usize> {
    if s == 0 {
        return Err(Error::InvalidInput("dim H̃_{0,•} needs at least one CS end".into()));
    }
    (b1_c_bullet + 1)
        .checked_sub(s)
        .ok_or_else(|| Error::InconsistentTopology(format!("b1_c_bullet = {b1_c_bullet} is below s − 1 = {}", s - 1)))
}

/// Which splitting of the closed 1-forms on `L` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockCase {
    Compact,
    /// AC ends only, negative weight.
    AcDecay,
    /// AC ends only, positive weight.
    AcGrowth,
    /// CS ends only, positive weight.
    CsGrowth,
    /// Positive weight at the CS ends, negative at the AC ends.
    CsacMixed,
    /// Positive weight at every end.
    CsacGrowth,
}

impl BlockCase {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockCase::Compact => "compact",
            BlockCase::AcDecay => "AC_decay",
            BlockCase::AcGrowth => "AC_growth",
            BlockCase::CsGrowth => "CS_growth",
            BlockCase::CsacMixed => "CSAC_mixed",
            BlockCase::CsacGrowth => "CSAC_growth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: &'static str,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyReport {
    pub case: BlockCase,
    /// `dim H̃¹_c` (all of `H¹(L)` when `L` is compact).
    pub dim_tilde_hc1: usize,
    /// `dim d(E_0)` with `E_0` the functions that are locally constant near
    /// the CS points.
    pub dim_e0_d: usize,
    pub dim_ker_rho: usize,
    /// The topological blocks of the splitting, in order.
    pub blocks: Vec<Block>,
}

impl CohomologyReport {
    pub fn total(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }
}

/// Dimensions of the topological blocks in the splitting of closed 1-forms
/// on `L` for the given weight regime.
pub fn decomposition_block_dims(t: &ConifoldTopology, case: BlockCase) -> Result<CohomologyReport> {
    t.check()?;
    let (s, l, e) = (t.s(), t.l(), t.e());
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{} blocks need {what}; got s = {s}, l = {l}", case.as_str())))
        }
    };
    match case {
        BlockCase::Compact => need(e == 0, "no ends")?,
        BlockCase::AcDecay | BlockCase::AcGrowth => need(s == 0 && l >= 1, "AC ends only")?,
        BlockCase::CsGrowth => need(l == 0 && s >= 1, "CS ends only")?,
        BlockCase::CsacMixed | BlockCase::CsacGrowth => need(l >= 1, "at least one AC end")?,
    }
    let ker_rho = if e == 0 { t.b1 } else { tilde_hc1_dim(t.b1_c, e)? };
    let dim_e0_d = match case {
        BlockCase::CsGrowth | BlockCase::CsacGrowth => s.saturating_sub(1),
        BlockCase::CsacMixed => s,
        _ => 0,
    };
    let block = |name, dim| Block { name, dim };
    let blocks = match case {
        BlockCase::Compact => vec![block("H¹(L)", t.b1)],
        BlockCase::AcDecay => vec![block("H̃¹_c", ker_rho), block("d(E_∞)", l - 1)],
        BlockCase::AcGrowth => vec![block("H¹(L)", t.b1)],
        BlockCase::CsGrowth => vec![block("Ker ρ", ker_rho), block("d(E_0)", s - 1)],
        BlockCase::CsacMixed => {
            // two routes to dim Ker(H¹_{•,c} → H¹(Σ₀)) must agree
            let via_blocks = ker_rho + (l - 1);
            let via_relative = t.b1_c - s;
            if via_blocks != via_relative {
                return Err(Error::InternalInconsistency(format!(
                    "H̃¹_c ⊕ E' has dimension {via_blocks}, relative sequence gives {via_relative}"
                )));
            }
            vec![block("H̃¹_c", ker_rho), block("E'", l - 1), block("d(E_0)", s)]
        }
        BlockCase::CsacGrowth => {
            let bullet = t
                .b1_c_bullet
                .ok_or_else(|| Error::InvalidInput("CSAC_growth blocks need b1_c_bullet".into()))?;
            let h0 = if s == 0 { t.b1 } else { tilde_h0bullet_dim(bullet, s)? };
            vec![block("H̃_{0,•}", h0), block("d(E_0) mod d(C)", s.saturating_sub(1))]
        }
    };
    Ok(CohomologyReport {
        case,
        dim_tilde_hc1: ker_rho,
        dim_e0_d,
        dim_ker_rho: ker_rho,
        blocks,
    })
}
