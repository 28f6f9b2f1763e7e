//! Condition (S) through the structured families
//! `ξ = (1_a·ε·1_b) ⊗ (ε·1_b) ⊗ ⋯` and `ξ = (1_c·ε) ⊗ ε ⊗ ⋯`.
//!
//! For these families `⟨ξ|x·ξ⟩ = δ^{-2m} F^m(x 1_a)` with `F(y) = A(y) 1_b`
//! (or `F = A` for a sink), so the normalized compression map can be iterated
//! on `B` without building `ξ`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{EdgeCorrespondence, TensorPowerVector, TensorPowers};
use crate::linalg::{max_abs, rank, re, C64};
use crate::qspace::{AlgebraElement, QuantumSpace};
use crate::{Config, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum FamilyKind {
    Pair { a: usize, b: usize },
    Sink { c: usize },
}

impl FamilyKind {
    /// Block whose corner the family compresses onto.
    pub fn source_block(&self) -> usize {
        match *self {
            FamilyKind::Pair { a, .. } => a,
            FamilyKind::Sink { c } => c,
        }
    }

    /// 1-based label such as `(1,2)` or `sink 3`.
    pub fn label(&self) -> String {
        match *self {
            FamilyKind::Pair { a, b } => format!("({},{})", a + 1, b + 1),
            FamilyKind::Sink { c } => format!("sink {}", c + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructuredFamily {
    pub kind: FamilyKind,
    pub length: usize,
}

impl StructuredFamily {
    pub fn new(kind: FamilyKind, length: usize, e: &EdgeCorrespondence, cfg: &Config) -> Result<Self> {
        let nb = e.space().num_blocks();
        if length == 0 {
            return Err(Error::InvalidFamily("length must be at least 1".into()));
        }
        match kind {
            FamilyKind::Pair { a, b } => {
                if a >= nb || b >= nb {
                    return Err(Error::BlockOutOfRange(a.max(b)));
                }
                if a == b {
                    return Err(Error::InvalidFamily("pair families need a != b".into()));
                }
            }
            FamilyKind::Sink { c } => {
                if c >= nb {
                    return Err(Error::BlockOutOfRange(c));
                }
                if !e.graph().quantum_sinks(cfg).contains(&c) {
                    return Err(Error::InvalidFamily(format!("block {} is not a quantum sink", c + 1)));
                }
            }
        }
        Ok(Self { kind, length })
    }

    /// The family vector over product labels of `E`.
    pub fn vector(&self, e: &EdgeCorrespondence, tp: &TensorPowers) -> TensorPowerVector {
        let space = e.space();
        let one = space.one();
        let (first, rest) = match self.kind {
            FamilyKind::Pair { a, b } => {
                let pb = space.block_unit(b);
                (e.generator(&space.block_unit(a), &pb), e.generator(&one, &pb))
            }
            FamilyKind::Sink { c } => (e.generator(&space.block_unit(c), &one), e.generator(&one, &one)),
        };
        let mut factors = vec![first.coeffs];
        factors.extend(std::iter::repeat_n(rest.coeffs, self.length - 1));
        tp.elementary(&factors)
    }
}

/// Matrix of `F`: `y ↦ A(y)1_b` for pairs, `A` for sinks.
fn step_matrix(e: &EdgeCorrespondence, kind: FamilyKind) -> DMatrix<C64> {
    let a = e.graph().adjacency().clone();
    match kind {
        FamilyKind::Pair { b, .. } => restrict_rows(e.space(), &a, b),
        FamilyKind::Sink { .. } => a,
    }
}

fn restrict_rows(space: &QuantumSpace, m: &DMatrix<C64>, block: usize) -> DMatrix<C64> {
    let range = space.blocks().block_range(block);
    DMatrix::from_fn(m.nrows(), m.ncols(), |p, q| if range.contains(&p) { m[(p, q)] } else { re(0.0) })
}

/// Unnormalized `⟨ξ|x·ξ⟩ = δ^{-2m} F^m(x 1_a)` as a matrix in `x`.
fn compression(e: &EdgeCorrespondence, fam: &StructuredFamily) -> DMatrix<C64> {
    let space = e.space();
    let f = step_matrix(e, fam.kind);
    let cut = restrict_rows(space, &DMatrix::identity(space.dim(), space.dim()), fam.kind.source_block());
    let mut m = cut;
    for _ in 0..fam.length {
        m = &f * m;
    }
    m * re(space.delta_sq().powi(-(fam.length as i32)))
}

/// `Φ(x) = ⟨ξ|x·ξ⟩ / ‖⟨ξ|ξ⟩‖` as a matrix over the standard units.
pub fn family_phi(e: &EdgeCorrespondence, fam: &StructuredFamily, cfg: &Config) -> Result<DMatrix<C64>> {
    let space = e.space();
    let m = compression(e, fam);
    let norm = space.norm(&space.apply(&m, &space.one()));
    if cfg.negligible(norm, 0.0) || norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(m * re(1.0 / norm))
}

/// `⟨ξ|x·ξ⟩` computed on the tensor power itself.
pub fn family_phi_direct(
    e: &EdgeCorrespondence,
    tp: &TensorPowers,
    fam: &StructuredFamily,
    x: &AlgebraElement,
) -> Result<AlgebraElement> {
    let xi = fam.vector(e, tp);
    let xxi = tp.left_act(x, &xi);
    let out = tp.partial_inner(&xi, &xxi)?;
    Ok(AlgebraElement::new(out.coeffs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockCertificate {
    /// 0-based block.
    pub block: usize,
    pub family: Option<FamilyKind>,
    /// Why each rejected candidate failed, in search order.
    pub rejected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionS {
    pub certified: bool,
    pub reason: Option<String>,
    pub blocks: Vec<BlockCertificate>,
}

/// Searches the structured families for every block over lengths `2..=m_max`.
pub fn condition_s_certificate(e: &EdgeCorrespondence, m_max: usize, cfg: &Config) -> Result<ConditionS> {
    let space = e.space();
    let nb = space.num_blocks();
    if !e.is_faithful(cfg) {
        return Ok(ConditionS {
            certified: false,
            reason: Some("left action is not injective".into()),
            blocks: Vec::new(),
        });
    }
    if m_max < 3 {
        return Err(Error::InvalidFamily("the window [2, m_max] needs m_max >= 3".into()));
    }
    let sinks = e.graph().quantum_sinks(cfg);
    // product labels for the spot check, skipped when over budget
    let spot = TensorPowers::build(e, 3.min(m_max), cfg).ok();
    let mut blocks = Vec::with_capacity(nb);
    for c in 0..nb {
        let mut candidates: Vec<FamilyKind> =
            (0..nb).filter(|&b| b != c).map(|b| FamilyKind::Pair { a: c, b }).collect();
        if sinks.contains(&c) {
            candidates.push(FamilyKind::Sink { c });
        }
        let mut rejected = Vec::new();
        let mut found = None;
        for kind in candidates {
            match check_family(e, kind, m_max, spot.as_ref(), cfg)? {
                None => {
                    found = Some(kind);
                    break;
                }
                Some(why) => rejected.push(format!("{}: {why}", kind.label())),
            }
        }
        blocks.push(BlockCertificate { block: c, family: found, rejected });
    }
    let certified = blocks.iter().all(|b| b.family.is_some());
    let reason = if certified {
        None
    } else if nb == 1 {
        Some("single block: no orthogonal central pair and no sink".into())
    } else {
        Some("some block has no certified family".into())
    };
    Ok(ConditionS { certified, reason, blocks })
}

/// `None` when the family passes every check; otherwise the first failure.
fn check_family(
    e: &EdgeCorrespondence,
    kind: FamilyKind,
    m_max: usize,
    spot: Option<&TensorPowers>,
    cfg: &Config,
) -> Result<Option<String>> {
    let space = e.space();
    let c = kind.source_block();
    let units: Vec<usize> = space.blocks().block_range(c).collect();
    let n = space.blocks().size(c);
    let mut maps = Vec::new();
    for m in 2..=m_max {
        let fam = StructuredFamily { kind, length: m };
        let phi = match family_phi(e, &fam, cfg) {
            Ok(p) => p,
            Err(Error::ZeroVector) => return Ok(Some(format!("zero vector at length {m}"))),
            Err(other) => return Err(other),
        };
        let restricted = DMatrix::from_fn(phi.nrows(), units.len(), |p, k| phi[(p, units[k])]);
        if rank(&restricted, cfg.tol.sqrt().min(1e-6)) != n * n {
            return Ok(Some(format!("not injective on the corner at length {m}")));
        }
        if let Some(why) = embedding_defect(space, &phi, c, cfg) {
            return Ok(Some(format!("{why} at length {m}")));
        }
        maps.push(restricted);
    }
    let repeats = (0..maps.len()).any(|i| {
        (i + 1..maps.len()).any(|j| cfg.negligible(max_abs(&(&maps[i] - &maps[j])), max_abs(&maps[i])))
    });
    if !repeats {
        return Ok(Some("no repetition of the normalized map inside the window".into()));
    }
    if let Some(tp) = spot {
        for m in 2..=tp.top() {
            let fam = StructuredFamily { kind, length: m };
            let check = tp.is_non_returning(&fam.vector(e, tp), cfg);
            match check {
                Ok(r) if !r.non_returning => {
                    return Ok(Some(format!("returning at length {m}")));
                }
                Ok(_) | Err(Error::BudgetExceeded(_)) => {}
                Err(other) => return Err(other),
            }
        }
    }
    Ok(None)
}

/// Checks `Φ(f*) = Φ(f)*` and `Φ(fg) = Φ(f)Φ(g)` on the matrix units of block `c`.
fn embedding_defect(space: &QuantumSpace, phi: &DMatrix<C64>, c: usize, cfg: &Config) -> Option<String> {
    let blocks = space.blocks();
    let n = blocks.size(c);
    let image = |p: usize| AlgebraElement::new(phi.column(p).into_owned());
    let scale = max_abs(phi);
    for i in 0..n {
        for j in 0..n {
            let p = blocks.index(c, i, j);
            let star_img = space.star(&image(p));
            if !cfg.negligible(star_img.sub(&image(blocks.index(c, j, i))).max_abs(), scale) {
                return Some("not *-preserving".into());
            }
            for l in 0..n {
                // e_ij e_jl = e_il, and e_ij e_kl = 0 for k ≠ j
                for k in 0..n {
                    let lhs = space.mul(&image(p), &image(blocks.index(c, k, l)));
                    let rhs = if k == j { image(blocks.index(c, i, l)) } else { space.zero() };
                    if !cfg.negligible(lhs.sub(&rhs).max_abs(), scale * scale) {
                        return Some("not multiplicative".into());
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
pub(crate) fn compression_for_tests(e: &EdgeCorrespondence, fam: &StructuredFamily) -> DMatrix<C64> {
    compression(e, fam)
}
