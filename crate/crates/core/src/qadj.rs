//! Quantum adjacency matrices and the standard families of quantum graphs.

use nalgebra::DMatrix;

use crate::edgecorr::Ideal;
use crate::linalg::{hermitian_eigen, max_abs, rank, re, C64, ONE};
use crate::qspace::{AlgebraElement, QuantumSpace, TensorElement};
use crate::{Config, Error, Result};

/// Linear map `A: B → B` as a matrix over the standard matrix units:
/// `A(e_q) = Σ_p matrix[(p, q)] e_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumAdjacency {
    pub matrix: DMatrix<C64>,
}

/// A quantum graph `(B, ψ, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGraph {
    space: QuantumSpace,
    adj: QuantumAdjacency,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SchurCheck {
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CpCheck {
    pub min_eigenvalue: f64,
    pub hermitian_residual: f64,
    pub pass: bool,
}

impl QuantumGraph {
    /// Builds a graph and checks quantum Schur idempotence and complete positivity.
    pub fn new(space: QuantumSpace, matrix: DMatrix<C64>, cfg: &Config) -> Result<Self> {
        let g = Self::unchecked(space, matrix)?;
        let schur = g.check_schur_idempotent(cfg);
        if !schur.pass {
            return Err(Error::NotSchurIdempotent(schur.residual));
        }
        let cp = g.check_cp(cfg);
        if !cp.pass {
            return Err(Error::NotCp(cp.min_eigenvalue));
        }
        Ok(g)
    }

    /// Pairs a space with a map without running the graph checks.
    pub fn unchecked(space: QuantumSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::Shape { found: matrix.shape(), expected: (d, d) });
        }
        Ok(Self { space, adj: QuantumAdjacency { matrix } })
    }

    pub fn space(&self) -> &QuantumSpace {
        &self.space
    }

    pub fn adjacency(&self) -> &DMatrix<C64> {
        &self.adj.matrix
    }

    pub fn delta_sq(&self) -> f64 {
        self.space.delta_sq()
    }

    pub fn apply(&self, x: &AlgebraElement) -> AlgebraElement {
        self.space.apply(&self.adj.matrix, x)
    }

    /// The same space with `A` replaced by its GNS adjoint.
    pub fn adjoint_graph(&self) -> Self {
        Self {
            space: self.space.clone(),
            adj: QuantumAdjacency { matrix: self.space.adjoint_map(&self.adj.matrix) },
        }
    }

    /// `A = 0`; accepted by validation but refused where faithfulness is needed.
    pub fn is_degenerate(&self, cfg: &Config) -> bool {
        cfg.negligible(max_abs(&self.adj.matrix), 0.0)
    }

    /// Evaluates `m(A ⊗ A)m*` against `δ² A` on every standard unit.
    pub fn check_schur_idempotent(&self, cfg: &Config) -> SchurCheck {
        let a = &self.adj.matrix;
        let at = a.transpose();
        let d2 = self.delta_sq();
        let mut residual: f64 = 0.0;
        for q in 0..self.space.dim() {
            let e = self.space.unit(q);
            let t = self.space.comultiply(&e);
            let lhs = self.space.multiply(&TensorElement::new(a * &t.coeffs * &at));
            let rhs = self.apply(&e).scale(re(d2));
            residual = residual.max(lhs.sub(&rhs).max_abs());
        }
        let scale = d2 * max_abs(a).max(1.0);
        SchurCheck { residual, pass: cfg.negligible(residual, scale) }
    }

    /// Choi element `Σ_{a,i,j} e_ij^(a) ⊗ A(e_ij^(a))` of `B ⊗ B`.
    pub fn choi_matrix(&self) -> TensorElement {
        TensorElement::new(self.adj.matrix.transpose())
    }

    /// Block `(a, b)` of the Choi element as a matrix on `ℂ^{n_a} ⊗ ℂ^{n_b}`.
    pub fn choi_block(&self, a: usize, b: usize) -> DMatrix<C64> {
        let blocks = self.space.blocks();
        let (na, nb) = (blocks.size(a), blocks.size(b));
        let choi = self.choi_matrix();
        DMatrix::from_fn(na * nb, na * nb, |r, c| {
            let (i, k) = (r / nb, r % nb);
            let (j, l) = (c / nb, c % nb);
            choi.coeffs[(blocks.index(a, i, j), blocks.index(b, k, l))]
        })
    }

    /// Complete positivity via positivity of the Choi element in `B ⊗ B`.
    pub fn check_cp(&self, cfg: &Config) -> CpCheck {
        let nb = self.space.num_blocks();
        let mut min_eig = f64::INFINITY;
        let mut herm: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for a in 0..nb {
            for b in 0..nb {
                let m = self.choi_block(a, b);
                herm = herm.max(max_abs(&(&m - m.adjoint())));
                let (values, _) = hermitian_eigen(&m);
                if let Some(&lo) = values.last() {
                    min_eig = min_eig.min(lo);
                }
                scale = scale.max(values.first().copied().unwrap_or(0.0).abs());
            }
        }
        let pass = cfg.negligible(herm, scale) && min_eig >= -cfg.tol * scale.max(1.0);
        CpCheck { min_eigenvalue: min_eig, hermitian_residual: herm, pass }
    }

    /// Kraus rank `d(A)`: rank of the Choi matrix. Single-block spaces only.
    pub fn kraus_rank(&self, cfg: &Config) -> Result<usize> {
        if self.space.num_blocks() != 1 {
            return Err(Error::MultiBlock(self.space.num_blocks()));
        }
        let cp = self.check_cp(cfg);
        if !cp.pass {
            return Err(Error::NotCp(cp.min_eigenvalue));
        }
        Ok(rank(&self.choi_block(0, 0), cfg.tol))
    }

    /// `ε = δ⁻² (id ⊗ A) m*(1)`.
    pub fn epsilon_vector(&self) -> TensorElement {
        let t = self.space.comultiply(&self.space.one());
        TensorElement::new(t.coeffs * self.adj.matrix.transpose() * re(1.0 / self.delta_sq()))
    }

    /// Blocks `a` whose central summand lies in `ker A`.
    pub fn quantum_sources(&self, cfg: &Config) -> Vec<usize> {
        let a = &self.adj.matrix;
        let scale = max_abs(a);
        let blocks = self.space.blocks();
        (0..blocks.num_blocks())
            .filter(|&b| {
                blocks
                    .block_range(b)
                    .all(|q| (0..a.nrows()).all(|p| cfg.negligible(a[(p, q)].norm(), scale)))
            })
            .collect()
    }

    /// Blocks `a` with `1_a · A(x) = 0` for every `x`.
    pub fn quantum_sinks(&self, cfg: &Config) -> Vec<usize> {
        let a = &self.adj.matrix;
        let scale = max_abs(a);
        let blocks = self.space.blocks();
        (0..blocks.num_blocks())
            .filter(|&b| {
                blocks
                    .block_range(b)
                    .all(|p| (0..a.ncols()).all(|q| cfg.negligible(a[(p, q)].norm(), scale)))
            })
            .collect()
    }

    /// Ideal `B·A(B)·B` as a set of blocks.
    pub fn range_ideal(&self, cfg: &Config) -> Ideal {
        let sinks = self.quantum_sinks(cfg);
        Ideal::new((0..self.space.num_blocks()).filter(|b| !sinks.contains(b)).collect())
    }

    /// `A(J) ⊆ J` for the ideal spanned by the given blocks.
    pub fn maps_ideal_into_itself(&self, ideal: &Ideal, cfg: &Config) -> bool {
        let a = &self.adj.matrix;
        let scale = max_abs(a);
        let blocks = self.space.blocks();
        ideal.blocks().iter().all(|&b| {
            blocks.block_range(b).all(|q| {
                (0..blocks.num_blocks())
                    .filter(|c| !ideal.contains(*c))
                    .all(|c| blocks.block_range(c).all(|p| cfg.negligible(a[(p, q)].norm(), scale)))
            })
        })
    }

    // ---- constructors ----

    /// Complete quantum graph `A(x) = δ² ψ(x) 1`.
    pub fn complete(space: QuantumSpace) -> Result<Self> {
        let d = space.dim();
        let one = space.one();
        let d2 = space.delta_sq();
        let mut m = DMatrix::zeros(d, d);
        for q in 0..d {
            let col = &one.coeffs * (space.psi(&space.unit(q)) * d2);
            m.set_column(q, &col);
        }
        Self::new(space, m, &Config::default())
    }

    /// Trivial quantum graph `A = id`.
    pub fn trivial(space: QuantumSpace) -> Result<Self> {
        let d = space.dim();
        Self::new(space, DMatrix::identity(d, d), &Config::default())
    }

    /// Rank-one graph `A(x) = T x T*` with `T ∈ B` given blockwise.
    /// Every block with `T_a ≠ 0` must satisfy `Tr(ρ_a⁻¹ T_a* T_a) = δ²`.
    pub fn rank_one(space: QuantumSpace, t_blocks: &[DMatrix<C64>], cfg: &Config) -> Result<Self> {
        let blocks = space.blocks().clone();
        if t_blocks.len() != blocks.num_blocks() {
            return Err(Error::NotBlockDiagonal);
        }
        for (a, t) in t_blocks.iter().enumerate() {
            let n = blocks.size(a);
            if t.shape() != (n, n) {
                return Err(Error::Shape { found: t.shape(), expected: (n, n) });
            }
            if max_abs(t) == 0.0 {
                continue;
            }
            let tt = t.adjoint() * t;
            let found: f64 = (0..n).map(|i| tt[(i, i)].re / space.rho()[a][i]).sum();
            if !cfg.negligible((found - space.delta_sq()).abs(), space.delta_sq()) {
                return Err(Error::TraceConstraintViolated {
                    block: a,
                    found,
                    expected: space.delta_sq(),
                });
            }
        }
        let t = space.from_block_matrices(t_blocks);
        let t_star = space.star(&t);
        let d = space.dim();
        let mut m = DMatrix::zeros(d, d);
        for q in 0..d {
            let img = space.mul(&space.mul(&t, &space.unit(q)), &t_star);
            m.set_column(q, &img.coeffs);
        }
        Self::new(space, m, cfg)
    }

    /// Classical graph on `ℂ^d` with the uniform state; `A(e_j) = Σ_i M_ij e_i`.
    pub fn classical(matrix: &[Vec<f64>]) -> Result<Self> {
        let m = classical_matrix(matrix)?;
        for row in matrix {
            if let Some(&bad) = row.iter().find(|&&x| x != 0.0 && x != 1.0) {
                return Err(Error::NotZeroOne(bad));
            }
        }
        let space = QuantumSpace::tracial(vec![1; matrix.len()])?;
        Self::new(space, m, &Config::default())
    }

    /// Classical matrix on `ℂ^d` without the 0/1 or Schur checks.
    pub fn classical_unchecked(matrix: &[Vec<f64>]) -> Result<Self> {
        let m = classical_matrix(matrix)?;
        let space = QuantumSpace::tracial(vec![1; matrix.len()])?;
        Self::unchecked(space, m)
    }

    /// `B = ⊕³ M_n` tracial, `A(x₁⊕x₂⊕x₃) = (x₁+x₂+x₃) ⊕ (x₁+x₂) ⊕ 0`.
    pub fn main_example(n: usize) -> Result<Self> {
        let space = QuantumSpace::tracial(vec![n, n, n])?;
        let pattern = [[1, 1, 1], [1, 1, 0], [0, 0, 0]];
        Self::block_pattern(space, &pattern.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    /// Graph on equal blocks that copies block `b` into block `a` whenever `pattern[a][b] = 1`.
    pub fn block_pattern(space: QuantumSpace, pattern: &[Vec<u8>]) -> Result<Self> {
        let blocks = space.blocks().clone();
        let nb = blocks.num_blocks();
        let n = blocks.size(0);
        if blocks.sizes().iter().any(|&s| s != n) || pattern.len() != nb {
            return Err(Error::MainExampleShape);
        }
        let d = space.dim();
        let mut m = DMatrix::zeros(d, d);
        for (a, row) in pattern.iter().enumerate() {
            if row.len() != nb {
                return Err(Error::MainExampleShape);
            }
            for (b, &on) in row.iter().enumerate() {
                if on == 0 {
                    continue;
                }
                for i in 0..n {
                    for j in 0..n {
                        m[(blocks.index(a, i, j), blocks.index(b, i, j))] = ONE;
                    }
                }
            }
        }
        Self::new(space, m, &Config::default())
    }
}

fn classical_matrix(matrix: &[Vec<f64>]) -> Result<DMatrix<C64>> {
    let d = matrix.len();
    if d == 0 {
        return Err(Error::EmptyBlocks);
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != d) {
        return Err(Error::Shape { found: (d, row.len()), expected: (d, d) });
    }
    Ok(DMatrix::from_fn(d, d, |i, j| re(matrix[i][j])))
}
