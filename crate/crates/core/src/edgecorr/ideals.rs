//! Ideals of `B` relative to `E`: Katsura, hereditary, saturated, minimality.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{EdgeCorrespondence, Ideal};
use crate::linalg::{null_space, rank, C64};
use crate::{Config, Error, Result};

/// `J_E = φ⁻¹(𝒦(E)) ∩ (ker φ)^⊥`; every operator is compact here, so this is
/// the complement of the blocks killed by the left action.
pub fn katsura_ideal(e: &EdgeCorrespondence, cfg: &Config) -> Ideal {
    let kernel = e.left_kernel(cfg);
    Ideal::new((0..e.space().num_blocks()).filter(|b| !kernel.contains(*b)).collect())
}

/// `I·E ⊆ E·I`.
pub fn is_hereditary(e: &EdgeCorrespondence, ideal: &Ideal, cfg: &Config) -> bool {
    let p = e.space().central_projection(ideal.blocks());
    let l = e.left_matrix(&p);
    let r = e.right_matrix(&p);
    let tol = rank_tol(cfg);
    let both = concat(&r, &l);
    rank(&both, tol) == rank(&r, tol)
}

/// Whenever `b ∈ J_E` and `b·E ⊆ E·I`, then `b ∈ I`.
pub fn is_saturated(e: &EdgeCorrespondence, ideal: &Ideal, cfg: &Config) -> bool {
    let space = e.space();
    let blocks = space.blocks();
    let k = e.dim();
    let r = e.right_matrix(&space.central_projection(ideal.blocks()));
    let span = e.span(&r, cfg);
    // projection onto the orthogonal complement of E·I
    let perp = DMatrix::<C64>::identity(k, k) - &span * span.adjoint();

    let katsura = katsura_ideal(e, cfg);
    let units: Vec<usize> = katsura.blocks().iter().flat_map(|&a| blocks.block_range(a)).collect();
    if units.is_empty() {
        return true;
    }
    // column u ↦ stack over basis ξ_k of P⊥ L(e_u) ξ_k
    let mut sys = DMatrix::<C64>::zeros(k * k, units.len());
    for (col, &u) in units.iter().enumerate() {
        let img = &perp * e.left_unit(u);
        for c in 0..k {
            for rw in 0..k {
                sys[(c * k + rw, col)] = img[(rw, c)];
            }
        }
    }
    let ns = null_space(&sys, rank_tol(cfg));
    // every solution must vanish off I
    units.iter().enumerate().all(|(row, &u)| {
        ideal.contains(blocks.unit(u).block)
            || ns.row(row).iter().all(|z| cfg.negligible(z.norm(), 1.0))
    })
}

/// Nontrivial ideals that are both hereditary and saturated, in lexicographic order.
pub fn scan_saturated_hereditary(e: &EdgeCorrespondence, cfg: &Config) -> Vec<Ideal> {
    proper_subsets(e.space().num_blocks())
        .into_iter()
        .filter(|i| is_hereditary(e, i, cfg) && is_saturated(e, i, cfg))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimality {
    pub minimal: bool,
    /// A nontrivial ideal with `A(J) ⊆ J`, when one exists.
    pub witness: Option<Ideal>,
}

/// Minimality of a full correspondence via invariant ideals of `A`.
pub fn is_minimal(e: &EdgeCorrespondence, cfg: &Config) -> Result<Minimality> {
    if !e.is_full(cfg) {
        return Err(Error::NotFull);
    }
    let witness = proper_subsets(e.space().num_blocks())
        .into_iter()
        .find(|j| e.graph().maps_ideal_into_itself(j, cfg));
    Ok(Minimality { minimal: witness.is_none(), witness })
}

/// Nonempty proper subsets of `0..d`, ordered by size then lexicographically.
pub(crate) fn proper_subsets(d: usize) -> Vec<Ideal> {
    let mut out: Vec<Ideal> = (1u64..(1u64 << d) - 1)
        .map(|mask| Ideal::new((0..d).filter(|b| mask >> b & 1 == 1).collect()))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

fn rank_tol(cfg: &Config) -> f64 {
    cfg.tol.sqrt().min(1e-6)
}

fn concat(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}
