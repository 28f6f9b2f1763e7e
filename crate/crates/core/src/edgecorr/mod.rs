//! The quantum edge correspondence `E ⊂ B ⊗ B` and its tensor powers.
//!
//! `E` is the span of `x·ε·y` inside `B ⊗ B`, carrying the bimodule actions
//! `a·(x⊗y) = (ax)⊗y`, `(x⊗y)·b = x⊗(yb)` and the `B`-valued inner product
//! `⟨x₁⊗y₁|x₂⊗y₂⟩ = y₁* ψ(x₁*x₂) y₂`. The ambient module norm on `B ⊗ B` is
//! definite, so `E` is an honest subspace and needs no quotient.
//!
//! Internally every level is stored in a basis that is orthonormal for the
//! scalar product `ψ(⟨·|·⟩)`; actions and the `B`-valued Gram are matrices in
//! that basis.

mod condition_s;
mod ideals;
mod periodic;
mod tensor;

pub use condition_s::{
    condition_s_certificate, family_phi, family_phi_direct, BlockCertificate, ConditionS,
    FamilyKind, StructuredFamily,
};
pub use ideals::{
    is_hereditary, is_minimal, is_saturated, katsura_ideal, scan_saturated_hereditary, Minimality,
};
pub use periodic::{aperiodicity_report, multiplicity_aperiodic, periodic_at, Aperiodicity, PeriodicOutcome};
pub use tensor::{Level, NonReturning, TensorPowerVector, TensorPowers};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{
    column_span, left_leg, max_abs, pivoted_orthonormalizer, rank, re, right_leg, C64,
};
use crate::qadj::QuantumGraph;
use crate::qspace::{AlgebraElement, QuantumSpace, TensorElement};
use crate::{Config, Error, Result};

/// Ideal of `B` spanned by the central summands of the listed blocks (0-based, sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Ideal {
    blocks: Vec<usize>,
}

impl Ideal {
    pub fn new(mut blocks: Vec<usize>) -> Self {
        blocks.sort_unstable();
        blocks.dedup();
        Self { blocks }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn contains(&self, b: usize) -> bool {
        self.blocks.binary_search(&b).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks reported 1-based, as in the usual `1_1, …, 1_d` labelling.
    pub fn one_based(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b + 1).collect()
    }
}

/// Coordinates over the orthonormal basis of an [`EdgeCorrespondence`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    pub coeffs: DVector<C64>,
}

#[derive(Debug, Clone)]
pub struct EdgeCorrespondence {
    graph: QuantumGraph,
    epsilon: TensorElement,
    /// Basis vectors as columns, each a row-major flattened element of `B ⊗ B`.
    basis: DMatrix<C64>,
    /// Scalar Gram of the basis under `ψ∘⟨·|·⟩` (the identity up to round-off).
    gram: DMatrix<C64>,
    /// Ambient scalar metric `W_p W_q` on `B ⊗ B`.
    metric2: Vec<f64>,
    left: Vec<DMatrix<C64>>,
    right: Vec<DMatrix<C64>>,
    bgram: Vec<DMatrix<C64>>,
}

impl EdgeCorrespondence {
    /// Builds `E` from the spanning set `e_p·ε·e_r` by Gram-rank reduction.
    pub fn build(graph: &QuantumGraph, cfg: &Config) -> Result<Self> {
        let space = graph.space();
        let d = space.dim();
        let epsilon = graph.epsilon_vector();
        if cfg.negligible(epsilon.max_abs(), 0.0) {
            return Err(Error::ZeroCorrespondence);
        }
        let w = space.metric();
        let metric2: Vec<f64> = (0..d * d).map(|k| w[k / d] * w[k % d]).collect();

        let gens = generators(space, &epsilon);
        let sgram = weighted_gram(&gens, &gens, &metric2);
        let c = pivoted_orthonormalizer(&sgram, cfg.rank_tol);
        if c.ncols() == 0 {
            return Err(Error::ZeroCorrespondence);
        }
        let basis = &gens * c;
        let gram = weighted_gram(&basis, &basis, &metric2);

        let mut e = Self {
            graph: graph.clone(),
            epsilon,
            basis,
            gram,
            metric2,
            left: Vec::new(),
            right: Vec::new(),
            bgram: Vec::new(),
        };
        for p in 0..d {
            let u = space.unit(p);
            let lm = left_leg(&space.left_mul_matrix(&u), &e.basis, d);
            let rm = right_leg(&space.right_mul_matrix(&u), &e.basis, d);
            e.left.push(e.coordinates_of(&lm));
            e.right.push(e.coordinates_of(&rm));
        }
        e.bgram = bgram_from_right(space, &e.right);
        Ok(e)
    }

    pub fn graph(&self) -> &QuantumGraph {
        &self.graph
    }

    pub fn space(&self) -> &QuantumSpace {
        self.graph.space()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn epsilon(&self) -> &TensorElement {
        &self.epsilon
    }

    /// Basis vectors as columns of row-major flattened `B ⊗ B` elements.
    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    /// Left action of the standard unit `e_p` on basis coordinates.
    pub fn left_unit(&self, p: usize) -> &DMatrix<C64> {
        &self.left[p]
    }

    pub fn right_unit(&self, p: usize) -> &DMatrix<C64> {
        &self.right[p]
    }

    /// `B`-valued Gram component: `⟨b_k|b_l⟩ = Σ_r bgram[r][(k,l)] e_r`.
    pub fn bgram_unit(&self, r: usize) -> &DMatrix<C64> {
        &self.bgram[r]
    }

    pub fn left_matrix(&self, x: &AlgebraElement) -> DMatrix<C64> {
        combine(&self.left, &x.coeffs, self.dim())
    }

    pub fn right_matrix(&self, y: &AlgebraElement) -> DMatrix<C64> {
        combine(&self.right, &y.coeffs, self.dim())
    }

    /// Ambient `B ⊗ B` element of a vector.
    pub fn ambient(&self, xi: &EdgeVector) -> TensorElement {
        TensorElement::from_vec(&(&self.basis * &xi.coeffs), self.space().dim())
    }

    /// Coordinates of an ambient element, failing if it leaves `E`.
    pub fn from_ambient(&self, t: &TensorElement, cfg: &Config) -> Result<EdgeVector> {
        let v = t.to_vec();
        let coeffs = self.coordinates_of(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()));
        let back = &self.basis * &coeffs;
        let residual = self.ambient_norm(&(&back - &v));
        if !cfg.negligible(residual, self.ambient_norm(&v)) {
            return Err(Error::NotInSpan(residual));
        }
        Ok(EdgeVector { coeffs: coeffs.column(0).into_owned() })
    }

    /// `x·ε·y` as an edge vector.
    pub fn generator(&self, x: &AlgebraElement, y: &AlgebraElement) -> EdgeVector {
        let space = self.space();
        let t = space.left_mul_matrix(x) * &self.epsilon.coeffs * space.right_mul_matrix(y).transpose();
        let v = TensorElement::new(t).to_vec();
        let c = self.coordinates_of(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()));
        EdgeVector { coeffs: c.column(0).into_owned() }
    }

    pub fn epsilon_vector(&self) -> EdgeVector {
        let one = self.space().one();
        self.generator(&one, &one)
    }

    /// `⟨ξ|η⟩ ∈ B`.
    pub fn inner_product(&self, xi: &EdgeVector, eta: &EdgeVector) -> AlgebraElement {
        bvalued(&self.bgram, &xi.coeffs, &eta.coeffs)
    }

    pub fn left_act(&self, x: &AlgebraElement, xi: &EdgeVector) -> EdgeVector {
        EdgeVector { coeffs: self.left_matrix(x) * &xi.coeffs }
    }

    pub fn right_act(&self, xi: &EdgeVector, y: &AlgebraElement) -> EdgeVector {
        EdgeVector { coeffs: self.right_matrix(y) * &xi.coeffs }
    }

    /// Left action computed in `B ⊗ B` and re-expressed in the basis; errors if it leaves `E`.
    pub fn left_act_ambient(&self, x: &AlgebraElement, xi: &EdgeVector, cfg: &Config) -> Result<EdgeVector> {
        let t = self.space().left_mul_matrix(x) * self.ambient(xi).coeffs;
        self.from_ambient(&TensorElement::new(t), cfg)
    }

    pub fn right_act_ambient(&self, xi: &EdgeVector, y: &AlgebraElement, cfg: &Config) -> Result<EdgeVector> {
        let t = self.ambient(xi).coeffs * self.space().right_mul_matrix(y).transpose();
        self.from_ambient(&TensorElement::new(t), cfg)
    }

    /// Ambient `B`-valued product `Σ_p ψ(e_p* e_p) ξ_p* η_p`, where `ξ = Σ_p e_p ⊗ ξ_p`.
    pub fn ambient_inner(&self, xi: &TensorElement, eta: &TensorElement) -> AlgebraElement {
        let space = self.space();
        let d = space.dim();
        let mut out = space.zero();
        for p in 0..d {
            let a = AlgebraElement::new(xi.coeffs.row(p).transpose());
            let b = AlgebraElement::new(eta.coeffs.row(p).transpose());
            let term = space.mul(&space.star(&a), &b);
            out = out.add(&term.scale(re(space.metric()[p])));
        }
        out
    }

    /// Inner product through the generator formula `δ⁻² y₁* A(x₁* x₂) y₂`, on
    /// coefficient vectors over the generators `e_p·ε·e_r` (index `p·d + r`).
    pub fn formula_inner(&self, c1: &DVector<C64>, c2: &DVector<C64>) -> AlgebraElement {
        let space = self.space();
        let d = space.dim();
        let inv = re(1.0 / space.delta_sq());
        let mut out = space.zero();
        for p in 0..d {
            for p2 in 0..d {
                let inner = space.mul(&space.star(&space.unit(p)), &space.unit(p2));
                if inner.max_abs() == 0.0 {
                    continue;
                }
                let a = self.graph.apply(&inner);
                for r in 0..d {
                    let x = c1[p * d + r];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let left = space.mul(&space.star(&space.unit(r)), &a);
                    for r2 in 0..d {
                        let y = c2[p2 * d + r2];
                        if y == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let term = space.mul(&left, &space.unit(r2));
                        out = out.add(&term.scale(x.conj() * y * inv));
                    }
                }
            }
        }
        out
    }

    /// Row-major flattened generators `e_p·ε·e_r` as columns (index `p·d + r`).
    pub fn generator_matrix(&self) -> DMatrix<C64> {
        generators(self.space(), &self.epsilon)
    }

    /// Residual of `φ(f_ij) = Σ_k θ(f_ik·ε, f_jk·ε)` over all adapted units.
    pub fn phi_compacts_check(&self) -> f64 {
        let space = self.space();
        let blocks = space.blocks().clone();
        let mut worst: f64 = 0.0;
        for a in 0..blocks.num_blocks() {
            let n = blocks.size(a);
            for i in 0..n {
                for j in 0..n {
                    let lhs = self.left_matrix(&space.adapted_unit(a, i, j));
                    let mut rhs = DMatrix::zeros(self.dim(), self.dim());
                    let one = space.one();
                    for k in 0..n {
                        let xi = self.generator(&space.adapted_unit(a, i, k), &one);
                        let eta = self.generator(&space.adapted_unit(a, j, k), &one);
                        rhs += self.theta(&xi, &eta);
                    }
                    worst = worst.max(max_abs(&(lhs - rhs)));
                }
            }
        }
        worst
    }

    /// Rank-one operator `ζ ↦ ξ·⟨η|ζ⟩` on basis coordinates.
    pub fn theta(&self, xi: &EdgeVector, eta: &EdgeVector) -> DMatrix<C64> {
        let k = self.dim();
        let mut out = DMatrix::zeros(k, k);
        for l in 0..k {
            let mut e = DVector::zeros(k);
            e[l] = re(1.0);
            let b = bvalued(&self.bgram, &eta.coeffs, &e);
            out.set_column(l, &(self.right_matrix(&b) * &xi.coeffs));
        }
        out
    }

    /// Blocks meeting the ideal `⟨E|E⟩`.
    pub fn inner_ideal(&self, cfg: &Config) -> Ideal {
        let space = self.space();
        let scale = self.bgram.iter().map(max_abs).fold(0.0, f64::max);
        let blocks = (0..space.num_blocks())
            .filter(|&a| {
                space
                    .blocks()
                    .block_range(a)
                    .any(|r| !cfg.negligible(max_abs(&self.bgram[r]), scale))
            })
            .collect();
        Ideal::new(blocks)
    }

    /// Blocks killed by the left action (`ker φ` is a sum of central summands).
    pub fn left_kernel(&self, cfg: &Config) -> Ideal {
        let space = self.space();
        let scale = self.left.iter().map(max_abs).fold(0.0, f64::max);
        let blocks = (0..space.num_blocks())
            .filter(|&a| {
                let unit = self.left_matrix(&space.block_unit(a));
                cfg.negligible(max_abs(&unit), scale)
            })
            .collect();
        Ideal::new(blocks)
    }

    /// Dimension of the left-action kernel as a subspace of `B`.
    pub fn left_kernel_dim(&self, cfg: &Config) -> usize {
        let d = self.space().dim();
        let k = self.dim();
        let stacked = DMatrix::from_fn(k * k, d, |row, p| self.left[p][(row / k, row % k)]);
        d - rank(&stacked, cfg.tol)
    }

    pub fn is_faithful(&self, cfg: &Config) -> bool {
        self.left_kernel(cfg).is_empty()
    }

    pub fn is_full(&self, cfg: &Config) -> bool {
        self.inner_ideal(cfg).len() == self.space().num_blocks()
    }

    /// Bimodule multiplicities `μ_ab = dim(1_a E 1_b) / (n_a n_b)`.
    pub fn multiplicity_matrix(&self) -> DMatrix<f64> {
        let space = self.space();
        let nb = space.num_blocks();
        DMatrix::from_fn(nb, nb, |a, b| {
            let p = self.left_matrix(&space.block_unit(a)) * self.right_matrix(&space.block_unit(b));
            let tr = p.trace().re;
            tr / (space.blocks().size(a) * space.blocks().size(b)) as f64
        })
    }

    /// `dim E^⊗n` predicted from the multiplicity matrix.
    pub fn predicted_power_dim(&self, n: usize) -> usize {
        let space = self.space();
        let nb = space.num_blocks();
        let mu = self.multiplicity_matrix().map(|x| x.round());
        let mut pow = DMatrix::<f64>::identity(nb, nb);
        for _ in 0..n {
            pow = &pow * &mu;
        }
        let mut total = 0.0;
        for a in 0..nb {
            for c in 0..nb {
                total += (space.blocks().size(a) * space.blocks().size(c)) as f64 * pow[(a, c)];
            }
        }
        total.round() as usize
    }

    /// Orthonormal (Euclidean in coordinates) basis of the span of given columns.
    pub(crate) fn span(&self, m: &DMatrix<C64>, cfg: &Config) -> DMatrix<C64> {
        column_span(m, cfg.tol.sqrt().min(1e-6))
    }

    fn coordinates_of(&self, ambient: &DMatrix<C64>) -> DMatrix<C64> {
        weighted_gram(&self.basis, ambient, &self.metric2)
    }

    fn ambient_norm(&self, v: &DVector<C64>) -> f64 {
        v.iter()
            .zip(self.metric2.iter())
            .map(|(z, w)| z.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }
}

/// `Σ_p x_p M_p`.
pub(crate) fn combine(mats: &[DMatrix<C64>], x: &DVector<C64>, k: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(k, k);
    for (m, &c) in mats.iter().zip(x.iter()) {
        if c != C64::new(0.0, 0.0) {
            out += m * c;
        }
    }
    out
}

/// `Σ_r (ξᴴ G_r η) e_r`.
pub(crate) fn bvalued(bgram: &[DMatrix<C64>], xi: &DVector<C64>, eta: &DVector<C64>) -> AlgebraElement {
    let xa = xi.adjoint();
    AlgebraElement::new(DVector::from_iterator(
        bgram.len(),
        bgram.iter().map(|g| (&xa * g * eta)[(0, 0)]),
    ))
}

/// `B`-valued Gram from the right action in an orthonormal basis:
/// `⟨ξ|η⟩_(a,i,j) = ψ(⟨ξ·e_ij|η⟩) / ρ_j`, i.e. `G_(a,i,j) = R(e_ij)ᴴ / ρ_j`.
pub(crate) fn bgram_from_right(space: &QuantumSpace, right: &[DMatrix<C64>]) -> Vec<DMatrix<C64>> {
    right
        .iter()
        .enumerate()
        .map(|(p, r)| r.adjoint() * re(1.0 / space.metric()[p]))
        .collect()
}

/// `Aᴴ diag(w) B`.
fn weighted_gram(a: &DMatrix<C64>, b: &DMatrix<C64>, w: &[f64]) -> DMatrix<C64> {
    let mut wb = b.clone();
    for (i, &wi) in w.iter().enumerate() {
        wb.row_mut(i).scale_mut(wi);
    }
    a.adjoint() * wb
}

fn generators(space: &QuantumSpace, epsilon: &TensorElement) -> DMatrix<C64> {
    let d = space.dim();
    let mut out = DMatrix::zeros(d * d, d * d);
    let lefts: Vec<_> = (0..d).map(|p| space.left_mul_matrix(&space.unit(p))).collect();
    let rights: Vec<_> = (0..d)
        .map(|r| space.right_mul_matrix(&space.unit(r)).transpose())
        .collect();
    for p in 0..d {
        let le = &lefts[p] * &epsilon.coeffs;
        for r in 0..d {
            let t = TensorElement::new(&le * &rights[r]);
            out.set_column(p * d + r, &t.to_vec());
        }
    }
    out
}

#[cfg(test)]
mod tests;
