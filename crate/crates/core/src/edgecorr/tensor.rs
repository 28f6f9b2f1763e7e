//! Balanced tensor powers `E^⊗m` built level by level.
//!
//! Level `m` is spanned by `w ⊗ b_i` with `w` running over the basis of level
//! `m−1` and `b_i` over the basis of `E`; its scalar Gram is
//! `⟨w⊗b_i|w'⊗b_j⟩ = ψ(⟨b_i|⟨w|w'⟩·b_j⟩) = Σ_r G^{m−1}_r[w,w'] L_r[i,j]`.
//! Whitening that Gram gives an orthonormal basis `C` and coordinate map
//! `M = Cᴴ S`, from which the actions of the new level follow.
//!
//! Vectors are carried over product labels `(i₁, …, i_m)` of elementary
//! tensors of `E`-basis vectors, which makes splitting off legs trivial.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use std::sync::OnceLock;

use super::{bgram_from_right, bvalued, combine, EdgeCorrespondence};
use crate::linalg::{left_leg, mul_kron_identity, pivoted_orthonormalizer, re, right_leg, C64};
use crate::qspace::{AlgebraElement, QuantumSpace};
use crate::{Config, Error, Result};

/// One tensor power in an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Level {
    pub dim: usize,
    /// Left action of each standard unit.
    pub left: Vec<DMatrix<C64>>,
    /// Right action of each standard unit.
    pub right: Vec<DMatrix<C64>>,
    /// `⟨w_k|w_l⟩ = Σ_r bgram[r][(k,l)] e_r`.
    pub bgram: Vec<DMatrix<C64>>,
    /// Basis of this level as coefficients over `(previous basis) ⊗ (E basis)` labels.
    pub c: Option<DMatrix<C64>>,
    /// Coordinates of `(previous basis) ⊗ (E basis)` labels in this basis.
    pub m: Option<DMatrix<C64>>,
    /// Product labels to coordinates and back, built on first use.
    product: OnceLock<(DMatrix<C64>, DMatrix<C64>)>,
}

#[derive(Debug, Clone)]
pub struct TensorPowers {
    space: QuantumSpace,
    k1: usize,
    levels: Vec<Level>,
    faithful: bool,
    label_cap: usize,
}

/// Element of `E^⊗level` over product labels; level 0 holds an element of `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPowerVector {
    pub level: usize,
    pub coeffs: DVector<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonReturning {
    pub non_returning: bool,
    /// `m < 2`: nothing to check.
    pub vacuous: bool,
    /// The left action is not injective, so a positive answer is only sufficient.
    pub sufficient_only: bool,
    pub max_residual: f64,
}

impl TensorPowers {
    /// Levels `0..=top`.
    pub fn build(e: &EdgeCorrespondence, top: usize, cfg: &Config) -> Result<Self> {
        if top > cfg.level_cap {
            return Err(Error::BudgetExceeded(format!(
                "tensor level {top} above cap {}",
                cfg.level_cap
            )));
        }
        let space = e.space().clone();
        let k1 = e.dim();
        let mut levels = vec![level_zero(&space)];
        if top >= 1 {
            levels.push(Level {
                dim: k1,
                left: (0..space.dim()).map(|p| e.left_unit(p).clone()).collect(),
                right: (0..space.dim()).map(|p| e.right_unit(p).clone()).collect(),
                bgram: (0..space.dim()).map(|p| e.bgram_unit(p).clone()).collect(),
                c: None,
                m: None,
                product: OnceLock::from((DMatrix::identity(k1, k1), DMatrix::identity(k1, k1))),
            });
        }
        let mut tp = Self { space, k1, levels, faithful: e.is_faithful(cfg), label_cap: cfg.label_cap };
        for _ in 2..=top {
            tp.push_level(cfg)?;
        }
        Ok(tp)
    }

    fn push_level(&mut self, cfg: &Config) -> Result<()> {
        let prev = self.levels.last().expect("level 1 present");
        let k1 = self.k1;
        let labels = prev.dim * k1;
        if labels > cfg.label_cap {
            return Err(Error::BudgetExceeded(format!(
                "level {} needs {labels} spanning labels (cap {})",
                self.levels.len(),
                cfg.label_cap
            )));
        }
        let one = &self.levels[1];
        let mut s = DMatrix::zeros(labels, labels);
        for (g, l) in prev.bgram.iter().zip(one.left.iter()) {
            if g.iter().all(|z| z.norm() == 0.0) || l.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            s += g.kronecker(l);
        }
        let c = pivoted_orthonormalizer(&s, cfg.rank_tol);
        let m = adjoint_times(&c, &s);
        let left: Vec<_> = prev.left.iter().map(|l| &m * left_leg(l, &c, k1)).collect();
        let right: Vec<_> = one.right.iter().map(|r| &m * right_leg(r, &c, prev.dim)).collect();
        let bgram = bgram_from_right(&self.space, &right);
        self.levels.push(Level {
            dim: c.ncols(),
            left,
            right,
            bgram,
            c: Some(c),
            m: Some(m),
            product: OnceLock::new(),
        });
        Ok(())
    }

    pub fn space(&self) -> &QuantumSpace {
        &self.space
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, m: usize) -> &Level {
        &self.levels[m]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.dim).collect()
    }

    /// Dimension of `E`.
    pub fn edge_dim(&self) -> usize {
        self.k1
    }

    fn check_level(&self, m: usize) -> Result<()> {
        if m > self.top() {
            return Err(Error::LevelMismatch(format!("level {m} not built (top {})", self.top())));
        }
        Ok(())
    }

    /// `P_m` (product labels → coordinates) and `Q_m` (coordinates → product labels):
    /// `P_m = M_m (P_{m−1} ⊗ I)`, `Q_m = (Q_{m−1} ⊗ I) C_m`.
    fn product_maps(&self, m: usize) -> Result<(&DMatrix<C64>, &DMatrix<C64>)> {
        self.check_level(m)?;
        if m == 0 {
            return Err(Error::LevelMismatch("level 0 has no product labels".into()));
        }
        if let Some((p, q)) = self.levels[m].product.get() {
            return Ok((p, q));
        }
        if self.k1.pow(m as u32) > self.label_cap {
            return Err(Error::BudgetExceeded(format!(
                "product labels at level {m} exceed cap {}",
                self.label_cap
            )));
        }
        let (pp, pq) = self.product_maps(m - 1)?;
        let level = &self.levels[m];
        let (c, mm) = (level.c.as_ref().expect("built level"), level.m.as_ref().expect("built level"));
        let p = mul_kron_identity(mm, pp, self.k1);
        let q = left_leg(pq, c, self.k1);
        let (p, q) = level.product.get_or_init(|| (p, q));
        Ok((p, q))
    }

    /// Orthonormal-basis coordinates of a vector.
    pub fn coords(&self, v: &TensorPowerVector) -> Result<DVector<C64>> {
        if v.level == 0 {
            let w = self.space.metric();
            return Ok(DVector::from_iterator(w.len(), v.coeffs.iter().zip(w).map(|(c, w)| c * w.sqrt())));
        }
        let (p, _) = self.product_maps(v.level)?;
        Ok(p * &v.coeffs)
    }

    /// Vector with the given orthonormal-basis coordinates.
    pub fn from_coords(&self, level: usize, coords: &DVector<C64>) -> Result<TensorPowerVector> {
        if level == 0 {
            let w = self.space.metric();
            let c = DVector::from_iterator(w.len(), coords.iter().zip(w).map(|(c, w)| c / w.sqrt()));
            return Ok(TensorPowerVector { level, coeffs: c });
        }
        let (_, q) = self.product_maps(level)?;
        Ok(TensorPowerVector { level, coeffs: q * coords })
    }

    /// Elementary tensor of `E`-vectors given by their coordinates.
    pub fn elementary(&self, factors: &[DVector<C64>]) -> TensorPowerVector {
        let mut coeffs = DVector::from_element(1, re(1.0));
        for f in factors {
            coeffs = crate::linalg::kron_vec(&coeffs, f);
        }
        TensorPowerVector { level: factors.len(), coeffs }
    }

    /// `v ⊗ w`, with level-0 factors absorbed into the neighbouring action.
    pub fn tensor(&self, v: &TensorPowerVector, w: &TensorPowerVector) -> TensorPowerVector {
        match (v.level, w.level) {
            (0, _) => self.left_act(&AlgebraElement::new(v.coeffs.clone()), w),
            (_, 0) => self.right_act(v, &AlgebraElement::new(w.coeffs.clone())),
            _ => TensorPowerVector {
                level: v.level + w.level,
                coeffs: crate::linalg::kron_vec(&v.coeffs, &w.coeffs),
            },
        }
    }

    pub fn left_act(&self, x: &AlgebraElement, v: &TensorPowerVector) -> TensorPowerVector {
        if v.level == 0 {
            return TensorPowerVector { level: 0, coeffs: self.space.mul(x, &AlgebraElement::new(v.coeffs.clone())).coeffs };
        }
        let l = combine(&self.levels[1].left, &x.coeffs, self.k1);
        let inner = self.k1.pow(v.level as u32 - 1);
        let out = left_leg(&l, &DMatrix::from_column_slice(v.coeffs.len(), 1, v.coeffs.as_slice()), inner);
        TensorPowerVector { level: v.level, coeffs: out.column(0).into_owned() }
    }

    pub fn right_act(&self, v: &TensorPowerVector, y: &AlgebraElement) -> TensorPowerVector {
        if v.level == 0 {
            return TensorPowerVector { level: 0, coeffs: self.space.mul(&AlgebraElement::new(v.coeffs.clone()), y).coeffs };
        }
        let r = combine(&self.levels[1].right, &y.coeffs, self.k1);
        let outer = self.k1.pow(v.level as u32 - 1);
        let out = right_leg(&r, &DMatrix::from_column_slice(v.coeffs.len(), 1, v.coeffs.as_slice()), outer);
        TensorPowerVector { level: v.level, coeffs: out.column(0).into_owned() }
    }

    /// `⟨v|w⟩ ∈ B` for vectors of the same level.
    pub fn inner(&self, v: &TensorPowerVector, w: &TensorPowerVector) -> Result<AlgebraElement> {
        if v.level != w.level {
            return Err(Error::LevelMismatch(format!("{} vs {}", v.level, w.level)));
        }
        if v.level == 0 {
            let a = AlgebraElement::new(v.coeffs.clone());
            return Ok(self.space.mul(&self.space.star(&a), &AlgebraElement::new(w.coeffs.clone())));
        }
        let (x, y) = (self.coords(v)?, self.coords(w)?);
        Ok(bvalued(&self.levels[v.level].bgram, &x, &y))
    }

    /// `ψ(⟨v|v⟩)`.
    pub fn norm_sq(&self, v: &TensorPowerVector) -> Result<f64> {
        Ok(self.coords(v)?.norm_squared())
    }

    /// Equality in the Gram seminorm, which is definite since `ψ` is faithful.
    pub fn approx_eq(&self, v: &TensorPowerVector, w: &TensorPowerVector, cfg: &Config) -> Result<bool> {
        if v.level != w.level {
            return Err(Error::LevelMismatch(format!("{} vs {}", v.level, w.level)));
        }
        let diff = TensorPowerVector { level: v.level, coeffs: &v.coeffs - &w.coeffs };
        let scale = self.norm_sq(v)?.max(self.norm_sq(w)?).sqrt();
        Ok(cfg.negligible(self.norm_sq(&diff)?.sqrt(), scale))
    }

    /// Split after the first `n` legs: row `α` holds `tail_α` with `v = Σ_α w_α ⊗ tail_α`,
    /// `w_α` the orthonormal basis of level `n`.
    pub fn split(&self, v: &TensorPowerVector, n: usize) -> Result<DMatrix<C64>> {
        if n == 0 || n > v.level {
            return Err(Error::LevelMismatch(format!("cannot split level {} at {n}", v.level)));
        }
        let (p, _) = self.product_maps(n)?;
        let tail = self.k1.pow((v.level - n) as u32);
        let head = self.k1.pow(n as u32);
        let r = DMatrix::from_fn(head, tail, |h, t| v.coeffs[h * tail + t]);
        Ok(p * r)
    }

    /// Contracts the first `l.level` legs of `r` against `l`.
    pub fn partial_inner(&self, l: &TensorPowerVector, r: &TensorPowerVector) -> Result<TensorPowerVector> {
        let k = l.level;
        let m = r.level;
        if k > m {
            return Err(Error::LevelMismatch(format!("partial_inner of level {k} into {m}")));
        }
        if k == 0 {
            let ls = self.space.star(&AlgebraElement::new(l.coeffs.clone()));
            return Ok(self.left_act(&ls, r));
        }
        let x = self.coords(l)?;
        let t = self.split(r, k)?;
        let xa = x.adjoint();
        // β_s[α] = (xᴴ G_s)_α, the e_s-coefficient of ⟨l|w_α⟩
        let betas: Vec<DVector<C64>> =
            self.levels[k].bgram.iter().map(|g| (&xa * g).transpose()).collect();
        if k == m {
            let coeffs = DVector::from_iterator(betas.len(), betas.iter().map(|b| (b.transpose() * &t)[(0, 0)]));
            return Ok(TensorPowerVector { level: 0, coeffs });
        }
        let inner = self.k1.pow((m - k - 1) as u32);
        let mut out = DVector::zeros(t.ncols());
        for (beta, l1) in betas.iter().zip(self.levels[1].left.iter()) {
            if beta.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let u = t.transpose() * beta;
            let moved = left_leg(l1, &DMatrix::from_column_slice(u.len(), 1, u.as_slice()), inner);
            out += moved.column(0);
        }
        Ok(TensorPowerVector { level: m - k, coeffs: out })
    }

    /// Exact test of `t^m(ξ)* t^n(η) t^m(ξ) = 0` for all `0 < n < m` and all `η`.
    ///
    /// The operator is left multiplication by `ζ(η) = Σ_α ⟨tail_α|⟨w_α|η⟩·ξ⟩`,
    /// so it vanishes exactly when `ζ` does (given an injective left action).
    pub fn is_non_returning(&self, xi: &TensorPowerVector, cfg: &Config) -> Result<NonReturning> {
        let m = xi.level;
        let sufficient_only = !self.faithful;
        if m < 2 {
            return Ok(NonReturning { non_returning: true, vacuous: true, sufficient_only, max_residual: 0.0 });
        }
        let scale = self.norm_sq(xi)?;
        let d = self.space.dim();
        let mut worst: f64 = 0.0;
        for n in 1..m {
            let t = m - n;
            let kn = self.levels[n].dim;
            let (pn, _) = self.product_maps(n)?;
            let (pt, _) = self.product_maps(t)?;
            // ξ = Σ_α w_α ⊗ tail_α; row α of X holds the level-t coordinates of tail_α
            let x_conj = (self.split(xi, n)? * pt.transpose()).map(|z| z.conj());
            // Z_s: level-n coordinates of the rest after splitting e_s·ξ at t
            let zs: Vec<DMatrix<C64>> = (0..d)
                .map(|s| {
                    let shifted = self.left_act(&self.space.unit(s), xi);
                    Ok(pn * self.split(&shifted, t)?.transpose())
                })
                .collect::<Result<_>>()?;
            // ζ(w_j) = Σ_{α,s} G^n_s[α,j] ⟨tail_α|e_s·ξ⟩, and
            // ⟨tail_α|e_s·ξ⟩ = Σ_{s'} L^n_{s'} Z_s (G^t_{s'})ᵀ conj(x_α)
            let mut zeta = DMatrix::<C64>::zeros(kn, kn);
            for (s, z) in zs.iter().enumerate() {
                let gs = &self.levels[n].bgram[s];
                if is_zero(gs) || is_zero(z) {
                    continue;
                }
                let mut ys = DMatrix::<C64>::zeros(kn, kn);
                for (l, g) in self.levels[n].left.iter().zip(self.levels[t].bgram.iter()) {
                    if is_zero(l) || is_zero(g) {
                        continue;
                    }
                    ys += l * (z * (g.transpose() * x_conj.transpose()));
                }
                zeta += ys * gs;
            }
            let res = zeta.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
            worst = worst.max(res);
        }
        Ok(NonReturning {
            non_returning: cfg.negligible(worst, scale),
            vacuous: false,
            sufficient_only,
            max_residual: worst,
        })
    }
}

/// `Cᴴ S`, using only the nonzero rows of `C` (the pivots of the basis).
fn adjoint_times(c: &DMatrix<C64>, s: &DMatrix<C64>) -> DMatrix<C64> {
    let rows: Vec<usize> = (0..c.nrows()).filter(|&i| c.row(i).iter().any(|z| z.norm() != 0.0)).collect();
    let cj = c.select_rows(rows.iter());
    let sj = s.select_rows(rows.iter());
    cj.adjoint() * sj
}

fn is_zero(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.norm() == 0.0)
}

fn level_zero(space: &QuantumSpace) -> Level {
    let d = space.dim();
    let w = space.metric();
    let scaled = |m: DMatrix<C64>| DMatrix::from_fn(d, d, |s, t| m[(s, t)] * (w[s] / w[t]).sqrt());
    let left: Vec<_> = (0..d).map(|p| scaled(space.left_mul_matrix(&space.unit(p)))).collect();
    let right: Vec<_> = (0..d).map(|p| scaled(space.right_mul_matrix(&space.unit(p)))).collect();
    let bgram = bgram_from_right(space, &right);
    Level { dim: d, left, right, bgram, c: None, m: None, product: OnceLock::new() }
}
