//! Finite quantum sets `(B, ψ)`.
//!
//! `B = ⊕_a M_{n(a)}` is stored over its standard matrix units `e_ij^(a)`,
//! flattened block by block and row-major inside a block. The state is
//! `ψ(x) = Σ_a Tr(ρ_a x_a)` with `ρ_a` diagonal, and `L²(B, ψ)` carries
//! `⟨x|y⟩ = ψ(x*y)`. In these coordinates the GNS metric is diagonal:
//! `⟨e_ij|e_ij⟩ = ρ_j`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{max_abs, max_abs_vec, op_norm, re, C64, ONE, ZERO};
use crate::{Config, Error, Result};

/// Block sizes `[n(1), …, n(d)]` of `B ≅ ⊕ M_{n(a)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

/// Position of a standard matrix unit `e_ij^(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unit {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::EmptyBlocks);
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut dim = 0;
        for &n in &sizes {
            offsets.push(dim);
            dim += n * n;
        }
        Ok(Self { sizes, offsets, dim })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, block: usize) -> usize {
        self.sizes[block]
    }

    /// `Σ n(a)²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    #[inline]
    pub fn index(&self, block: usize, row: usize, col: usize) -> usize {
        self.offsets[block] + row * self.sizes[block] + col
    }

    pub fn unit(&self, p: usize) -> Unit {
        let block = match self.offsets.binary_search(&p) {
            Ok(b) => b,
            Err(b) => b - 1,
        };
        let n = self.sizes[block];
        let local = p - self.offsets[block];
        Unit { block, row: local / n, col: local % n }
    }

    /// Indices of the standard units lying in `block`.
    pub fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        let start = self.offsets[block];
        start..start + self.sizes[block] * self.sizes[block]
    }

    /// Index of `e_ji` given the index of `e_ij`.
    #[inline]
    pub fn transpose_index(&self, p: usize) -> usize {
        let u = self.unit(p);
        self.index(u.block, u.col, u.row)
    }
}

/// Element of `B`, coordinates over the standard matrix units.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: DVector<C64>,
}

impl AlgebraElement {
    pub fn new(coeffs: DVector<C64>) -> Self {
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { coeffs: &self.coeffs * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coeffs: &self.coeffs + &other.coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coeffs: &self.coeffs - &other.coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs_vec(&self.coeffs)
    }
}

/// Element of `B ⊗ B`; `coeffs[(p, q)]` multiplies `e_p ⊗ e_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorElement {
    pub coeffs: DMatrix<C64>,
}

impl TensorElement {
    pub fn new(coeffs: DMatrix<C64>) -> Self {
        Self { coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    /// Row-major flattening `p * dim + q`.
    pub fn to_vec(&self) -> DVector<C64> {
        let n = self.coeffs.nrows();
        DVector::from_fn(n * n, |k, _| self.coeffs[(k / n, k % n)])
    }

    pub fn from_vec(v: &DVector<C64>, dim: usize) -> Self {
        Self { coeffs: DMatrix::from_fn(dim, dim, |p, q| v[p * dim + q]) }
    }
}

/// A quantum set `(B, ψ)` with a δ-form ψ.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSpace {
    blocks: BlockStructure,
    rho: Vec<Vec<f64>>,
    delta_sq: f64,
    /// GNS metric `⟨e_p|e_p⟩`.
    metric: Vec<f64>,
}

impl QuantumSpace {
    /// Builds and validates a space from per-block diagonal density weights.
    pub fn new(blocks: BlockStructure, rho: Vec<Vec<f64>>, cfg: &Config) -> Result<Self> {
        let delta_sq = check_weights(&blocks, &rho, cfg)?;
        let mut metric = vec![0.0; blocks.dim()];
        for p in 0..blocks.dim() {
            let u = blocks.unit(p);
            metric[p] = rho[u.block][u.col];
        }
        let space = Self { blocks, rho, delta_sq, metric };
        space.validate_delta_form(cfg)?;
        Ok(space)
    }

    /// The unique tracial δ-form: `ρ_a = (n(a) / dim B) · I`, so `δ² = dim B`.
    pub fn tracial(sizes: Vec<usize>) -> Result<Self> {
        let blocks = BlockStructure::new(sizes)?;
        let dim = blocks.dim() as f64;
        let rho = blocks
            .sizes()
            .iter()
            .map(|&n| vec![n as f64 / dim; n])
            .collect();
        Self::new(blocks, rho, &Config::default())
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.dim()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.num_blocks()
    }

    pub fn rho(&self) -> &[Vec<f64>] {
        &self.rho
    }

    pub fn delta_sq(&self) -> f64 {
        self.delta_sq
    }

    pub fn metric(&self) -> &[f64] {
        &self.metric
    }

    /// Confirms the state invariants and `m ∘ m* = δ² id` on every standard unit.
    pub fn validate_delta_form(&self, cfg: &Config) -> Result<f64> {
        let delta_sq = check_weights(&self.blocks, &self.rho, cfg)?;
        let residual = self.mm_star_residual();
        if !cfg.negligible(residual, delta_sq) {
            return Err(Error::NotDeltaForm {
                block: 0,
                found: delta_sq + residual,
                expected: delta_sq,
            });
        }
        Ok(delta_sq)
    }

    /// `max_p ‖m(m*(e_p)) − δ² e_p‖_∞`.
    pub fn mm_star_residual(&self) -> f64 {
        (0..self.dim())
            .map(|p| {
                let e = self.unit(p);
                let back = self.multiply(&self.comultiply(&e));
                back.sub(&e.scale(re(self.delta_sq))).max_abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::new(DVector::zeros(self.dim()))
    }

    pub fn one(&self) -> AlgebraElement {
        let mut x = self.zero();
        for a in 0..self.num_blocks() {
            for i in 0..self.blocks.size(a) {
                x.coeffs[self.blocks.index(a, i, i)] = ONE;
            }
        }
        x
    }

    /// Standard matrix unit with flat index `p`.
    pub fn unit(&self, p: usize) -> AlgebraElement {
        let mut x = self.zero();
        x.coeffs[p] = ONE;
        x
    }

    /// Central projection `1_a`.
    pub fn block_unit(&self, block: usize) -> AlgebraElement {
        let mut x = self.zero();
        for i in 0..self.blocks.size(block) {
            x.coeffs[self.blocks.index(block, i, i)] = ONE;
        }
        x
    }

    /// Sum of `1_a` over the given blocks.
    pub fn central_projection(&self, blocks: &[usize]) -> AlgebraElement {
        blocks
            .iter()
            .fold(self.zero(), |acc, &a| acc.add(&self.block_unit(a)))
    }

    pub fn block_matrix(&self, x: &AlgebraElement, block: usize) -> DMatrix<C64> {
        let n = self.blocks.size(block);
        DMatrix::from_fn(n, n, |i, j| x.coeffs[self.blocks.index(block, i, j)])
    }

    pub fn from_block_matrices(&self, mats: &[DMatrix<C64>]) -> AlgebraElement {
        let mut x = self.zero();
        for (a, m) in mats.iter().enumerate() {
            let n = self.blocks.size(a);
            for i in 0..n {
                for j in 0..n {
                    x.coeffs[self.blocks.index(a, i, j)] = m[(i, j)];
                }
            }
        }
        x
    }

    pub fn mul(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut out = self.zero();
        for a in 0..self.num_blocks() {
            let n = self.blocks.size(a);
            let off = self.blocks.offset(a);
            for i in 0..n {
                for k in 0..n {
                    let xik = x.coeffs[off + i * n + k];
                    if xik == ZERO {
                        continue;
                    }
                    for j in 0..n {
                        out.coeffs[off + i * n + j] += xik * y.coeffs[off + k * n + j];
                    }
                }
            }
        }
        out
    }

    /// Involution `x ↦ x*`.
    pub fn star(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut out = self.zero();
        for p in 0..self.dim() {
            out.coeffs[self.blocks.transpose_index(p)] = x.coeffs[p].conj();
        }
        out
    }

    pub fn psi(&self, x: &AlgebraElement) -> C64 {
        let mut s = ZERO;
        for (a, w) in self.rho.iter().enumerate() {
            for (i, &r) in w.iter().enumerate() {
                s += x.coeffs[self.blocks.index(a, i, i)] * r;
            }
        }
        s
    }

    /// `⟨x|y⟩ = ψ(x*y)`.
    pub fn gns_inner(&self, x: &AlgebraElement, y: &AlgebraElement) -> C64 {
        x.coeffs
            .iter()
            .zip(y.coeffs.iter())
            .zip(self.metric.iter())
            .map(|((a, b), w)| a.conj() * b * *w)
            .sum()
    }

    /// C*-norm: the largest block operator norm.
    pub fn norm(&self, x: &AlgebraElement) -> f64 {
        (0..self.num_blocks())
            .map(|a| op_norm(&self.block_matrix(x, a)))
            .fold(0.0, f64::max)
    }

    /// Blocks on which `x` has an entry above `tol * max(1, |x|_∞)`.
    pub fn support(&self, x: &AlgebraElement, cfg: &Config) -> Vec<usize> {
        let scale = x.max_abs();
        (0..self.num_blocks())
            .filter(|&a| {
                self.blocks
                    .block_range(a)
                    .any(|p| !cfg.negligible(x.coeffs[p].norm(), scale))
            })
            .collect()
    }

    /// Matrix of `y ↦ x y` over the standard units.
    pub fn left_mul_matrix(&self, x: &AlgebraElement) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for q in 0..self.dim() {
            m.set_column(q, &self.mul(x, &self.unit(q)).coeffs);
        }
        m
    }

    /// Matrix of `y ↦ y x` over the standard units.
    pub fn right_mul_matrix(&self, x: &AlgebraElement) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for q in 0..self.dim() {
            m.set_column(q, &self.mul(&self.unit(q), x).coeffs);
        }
        m
    }

    /// `f_ij^(a) = ψ(e_ii)^{-1/2} e_ij ψ(e_jj)^{-1/2}`.
    pub fn adapted_unit(&self, block: usize, row: usize, col: usize) -> AlgebraElement {
        let w = &self.rho[block];
        let s = 1.0 / (w[row] * w[col]).sqrt();
        self.unit(self.blocks.index(block, row, col)).scale(re(s))
    }

    /// All adapted units in flat-index order.
    pub fn adapted_units(&self) -> Vec<AlgebraElement> {
        (0..self.dim())
            .map(|p| {
                let u = self.blocks.unit(p);
                self.adapted_unit(u.block, u.row, u.col)
            })
            .collect()
    }

    /// `m(Σ T_pq e_p ⊗ e_q) = Σ T_pq e_p e_q`.
    pub fn multiply(&self, t: &TensorElement) -> AlgebraElement {
        let mut out = self.zero();
        for a in 0..self.num_blocks() {
            let n = self.blocks.size(a);
            let off = self.blocks.offset(a);
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        out.coeffs[off + i * n + j] += t.coeffs[(off + i * n + k, off + k * n + j)];
                    }
                }
            }
        }
        out
    }

    /// GNS adjoint of [`Self::multiply`]: `m*(e_ij) = Σ_k ρ_k^{-1} e_ik ⊗ e_kj`.
    pub fn comultiply(&self, x: &AlgebraElement) -> TensorElement {
        let mut t = DMatrix::zeros(self.dim(), self.dim());
        for a in 0..self.num_blocks() {
            let n = self.blocks.size(a);
            let off = self.blocks.offset(a);
            for i in 0..n {
                for j in 0..n {
                    let c = x.coeffs[off + i * n + j];
                    if c == ZERO {
                        continue;
                    }
                    for k in 0..n {
                        t[(off + i * n + k, off + k * n + j)] += c / self.rho[a][k];
                    }
                }
            }
        }
        TensorElement::new(t)
    }

    /// GNS adjoint of a linear map given by its matrix over the standard units:
    /// `L* = W⁻¹ Lᴴ W` with `W` the diagonal GNS metric.
    pub fn adjoint_map(&self, l: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.dim();
        let lh = l.adjoint();
        DMatrix::from_fn(n, n, |p, q| lh[(p, q)] * (self.metric[q] / self.metric[p]))
    }

    /// Applies a linear map given as a matrix.
    pub fn apply(&self, l: &DMatrix<C64>, x: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(l * &x.coeffs)
    }
}

fn check_weights(blocks: &BlockStructure, rho: &[Vec<f64>], cfg: &Config) -> Result<f64> {
    if rho.len() != blocks.num_blocks() {
        return Err(Error::WeightShape(format!(
            "{} weight lists for {} blocks",
            rho.len(),
            blocks.num_blocks()
        )));
    }
    for (a, w) in rho.iter().enumerate() {
        if w.len() != blocks.size(a) {
            return Err(Error::WeightShape(format!(
                "block {a} has size {} but {} weights",
                blocks.size(a),
                w.len()
            )));
        }
        if let Some(&bad) = w.iter().find(|&&r| !r.is_finite() || r <= 0.0) {
            return Err(Error::NonInvertibleDensity { block: a, weight: bad });
        }
    }
    let total: f64 = rho.iter().flatten().sum();
    if !cfg.negligible((total - 1.0).abs(), 1.0) {
        return Err(Error::NotAState(total));
    }
    let sums: Vec<f64> = rho.iter().map(|w| w.iter().map(|r| 1.0 / r).sum()).collect();
    let delta_sq = sums[0];
    for (a, &s) in sums.iter().enumerate() {
        if !cfg.negligible((s - delta_sq).abs(), delta_sq) {
            return Err(Error::NotDeltaForm { block: a, found: s, expected: delta_sq });
        }
    }
    Ok(delta_sq)
}
