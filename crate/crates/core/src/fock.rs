//! Truncated Fock module `F_N(E) = ⊕_{k=0}^N E^⊗k` and the Toeplitz
//! representation `(π̄, t̄)` on it.
//!
//! Operators are block-sparse over `(target level, source level)` and carry a
//! validity window: the largest source level on which the truncated matrix
//! agrees with the true operator. Creation operators fall off the top level,
//! so `t̄` is exact on sources `≤ N−1`; compositions shrink the window.
//! Identities are only compared inside the common window.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::edgecorr::{katsura_ideal, EdgeCorrespondence, EdgeVector, Ideal, TensorPowers};
use crate::linalg::{column_span, left_leg, max_abs, mul_kron_identity, projection_residual, re, C64};
use crate::qspace::AlgebraElement;
use crate::{Config, Error, Result};

/// Block-sparse operator on the truncated Fock module.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    blocks: BTreeMap<(usize, usize), DMatrix<C64>>,
    top: usize,
    /// Largest source level on which the matrix is exact.
    valid: usize,
    /// Smallest and largest level shift of the nonzero blocks.
    dmin: i32,
    dmax: i32,
}

impl FockOperator {
    fn empty(top: usize, valid: usize, dmin: i32, dmax: i32) -> Self {
        Self { blocks: BTreeMap::new(), top, valid, dmin, dmax }
    }

    pub fn block(&self, target: usize, source: usize) -> Option<&DMatrix<C64>> {
        self.blocks.get(&(target, source))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &DMatrix<C64>)> {
        self.blocks.iter()
    }

    /// Largest source level on which the operator is exact.
    pub fn valid_up_to(&self) -> usize {
        self.valid
    }

    fn insert(&mut self, target: usize, source: usize, m: DMatrix<C64>) {
        match self.blocks.get_mut(&(target, source)) {
            Some(existing) => *existing += m,
            None => {
                self.blocks.insert((target, source), m);
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let valid = (self.valid as i64 - other.dmax as i64).clamp(0, self.top as i64) as usize;
        let mut out = Self::empty(
            self.top,
            other.valid.min(valid),
            self.dmin + other.dmin,
            self.dmax + other.dmax,
        );
        for (&(j, k), b) in &other.blocks {
            for (&(i, j2), a) in self.blocks.range((0, j)..) {
                if j2 != j {
                    continue;
                }
                out.insert(i, k, a * b);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let valid = (self.valid as i64 + self.dmin as i64).clamp(0, self.top as i64) as usize;
        let mut out = Self::empty(self.top, valid, -self.dmax, -self.dmin);
        for (&(i, j), m) in &self.blocks {
            out.blocks.insert((j, i), m.adjoint());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.valid = self.valid.min(other.valid);
        out.dmin = self.dmin.min(other.dmin);
        out.dmax = self.dmax.max(other.dmax);
        for (&(i, j), m) in &other.blocks {
            out.insert(i, j, m.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(re(-1.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for m in out.blocks.values_mut() {
            *m *= s;
        }
        out
    }

    /// Largest entry over blocks whose source lies in `0..=window`.
    pub fn max_abs_on(&self, window: usize) -> f64 {
        self.blocks
            .iter()
            .filter(|((_, j), _)| *j <= window)
            .map(|(_, m)| max_abs(m))
            .fold(0.0, f64::max)
    }

    /// `max |self − other|` on the common validity window.
    pub fn distance(&self, other: &Self) -> f64 {
        let window = self.valid.min(other.valid);
        self.sub(other).max_abs_on(window)
    }
}

/// The truncated Fock module over an edge correspondence.
#[derive(Debug, Clone)]
pub struct FockTruncation {
    e: EdgeCorrespondence,
    tp: TensorPowers,
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToeplitzReport {
    /// `μ(T*⊗T)m* = π∘A`.
    pub pi_a: f64,
    /// `μ(T⊗T*)m* = ψ_t∘φ`.
    pub psi_phi: f64,
    /// `μ(ψ_tφ ⊗ T)m* = δ² T`.
    pub delta_t: f64,
    pub window: usize,
}

impl ToeplitzReport {
    pub fn max(&self) -> f64 {
        self.pi_a.max(self.psi_phi).max(self.delta_t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QckReport {
    pub qck1_residual: f64,
    /// Distance between the QCK2 defect and `π̄₀(A(x))`, worst basis `x`.
    pub qck2_defect_residual: f64,
    /// Largest QCK2 defect itself, to show it is genuinely nonzero.
    pub qck2_defect_norm: f64,
    /// Distance between `δ⁻² − μ(S⊗S*)m*(1)` and `δ⁻² P₀`.
    pub qck3_defect_residual: f64,
    /// Largest entry of the QCK3 defect outside level 0 (zero when it is supported on `P₀`).
    pub qck3_off_vacuum: f64,
    pub window: usize,
}

impl FockTruncation {
    pub fn new(e: &EdgeCorrespondence, n: usize, cfg: &Config) -> Result<Self> {
        let predicted: usize = (0..=n).map(|k| e.predicted_power_dim(k)).sum();
        if predicted > cfg.fock_dim_cap {
            return Err(Error::BudgetExceeded(format!(
                "Fock module of dimension {predicted} above cap {}",
                cfg.fock_dim_cap
            )));
        }
        let tp = TensorPowers::build(e, n, cfg)?;
        Ok(Self { e: e.clone(), tp, n })
    }

    pub fn correspondence(&self) -> &EdgeCorrespondence {
        &self.e
    }

    pub fn tensor_powers(&self) -> &TensorPowers {
        &self.tp
    }

    pub fn top(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> Vec<usize> {
        self.tp.dims()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().sum()
    }

    fn space_dim(&self) -> usize {
        self.e.space().dim()
    }

    /// `π̄(b)`: left action on every level.
    pub fn op_pi(&self, b: &AlgebraElement) -> FockOperator {
        let mut op = FockOperator::empty(self.n, self.n, 0, 0);
        for k in 0..=self.n {
            let level = self.tp.level(k);
            op.insert(k, k, crate::edgecorr::combine(&level.left, &b.coeffs, level.dim));
        }
        op
    }

    /// `π̄₀(b) = π̄(b) P₀`.
    pub fn op_pi0(&self, b: &AlgebraElement) -> FockOperator {
        let mut op = FockOperator::empty(self.n, self.n, 0, 0);
        let level = self.tp.level(0);
        op.insert(0, 0, crate::edgecorr::combine(&level.left, &b.coeffs, level.dim));
        op
    }

    /// Vacuum projection `P₀`.
    pub fn p0(&self) -> FockOperator {
        self.op_pi0(&self.e.space().one())
    }

    /// `t̄(ξ)η = ξ ⊗ η`, exact on source levels `≤ N−1`.
    pub fn op_t(&self, xi: &EdgeVector) -> FockOperator {
        let mut op = FockOperator::empty(self.n, self.n.saturating_sub(1), 1, 1);
        if self.n == 0 {
            return op;
        }
        let k1 = self.e.dim();
        let w = self.e.space().metric();
        // level 0 → 1: ξ ⊗ g_r = ξ · e_r / √ψ(e_r* e_r)
        let mut t0 = DMatrix::zeros(k1, self.space_dim());
        for (r, wr) in w.iter().enumerate() {
            t0.set_column(r, &(self.e.right_unit(r) * &xi.coeffs * re(1.0 / wr.sqrt())));
        }
        op.insert(1, 0, t0);
        let mut prev: Option<DMatrix<C64>> = None;
        for k in 1..self.n {
            let next = self.tp.level(k + 1);
            let m = next.m.as_ref().expect("level above 1 has coordinates");
            let tk = match &prev {
                // level 1 → 2: ξ ⊗ b_j is the label (ξ, j)
                None => {
                    let col = DMatrix::from_column_slice(k1, 1, xi.coeffs.as_slice());
                    mul_kron_identity(m, &col, k1)
                }
                // level k → k+1 through w_α = Σ C_k[(β,j),α] w'_β ⊗ b_j
                Some(p) => {
                    let c = self.tp.level(k).c.as_ref().expect("level above 1 has a basis");
                    mul_kron_identity(m, p, k1) * c
                }
            };
            op.insert(k + 1, k, tk.clone());
            prev = Some(tk);
        }
        op
    }

    /// `ψ_t̄(K)` for an operator `K` on `E` given on basis coordinates:
    /// `K ⊗ id` on the first leg of every level `≥ 1`, zero on the vacuum.
    pub fn op_psi_t(&self, kmat: &DMatrix<C64>) -> FockOperator {
        let mut op = FockOperator::empty(self.n, self.n, 0, 0);
        let k1 = self.e.dim();
        let mut prev: Option<DMatrix<C64>> = None;
        for k in 1..=self.n {
            let cur = match &prev {
                None => kmat.clone(),
                Some(p) => {
                    let level = self.tp.level(k);
                    let (m, c) = (level.m.as_ref().expect("coords"), level.c.as_ref().expect("basis"));
                    m * left_leg(p, c, k1)
                }
            };
            op.insert(k, k, cur.clone());
            prev = Some(cur);
        }
        op
    }

    /// `T(x) = t̄(x·ε)`.
    pub fn op_big_t(&self, x: &AlgebraElement) -> FockOperator {
        self.op_t(&self.e.generator(x, &self.e.space().one()))
    }

    /// `μ(F ⊗ G) m*(x) = Σ m*(x)_{pq} F(e_p) G(e_q)`.
    fn mu_pair<F, G>(&self, x: &AlgebraElement, f: F, g: G) -> FockOperator
    where
        F: Fn(usize) -> FockOperator,
        G: Fn(usize) -> FockOperator,
    {
        let space = self.e.space();
        let t = space.comultiply(x);
        let mut acc: Option<FockOperator> = None;
        for p in 0..space.dim() {
            for q in 0..space.dim() {
                let c = t.coeffs[(p, q)];
                if c.norm() == 0.0 {
                    continue;
                }
                let term = f(p).compose(&g(q)).scale(c);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
        }
        acc.unwrap_or_else(|| FockOperator::empty(self.n, self.n, 0, 0))
    }

    fn t_cache(&self) -> (Vec<FockOperator>, Vec<FockOperator>) {
        let space = self.e.space();
        let t: Vec<_> = (0..space.dim()).map(|p| self.op_big_t(&space.unit(p))).collect();
        // T*(e_p) = T(e_p*)*
        let ts: Vec<_> = (0..space.dim())
            .map(|p| t[space.blocks().transpose_index(p)].adjoint())
            .collect();
        (t, ts)
    }

    /// The three identities satisfied by `T` in any Toeplitz representation,
    /// checked on every adapted unit.
    pub fn verify_toeplitz_identities(&self) -> ToeplitzReport {
        let space = self.e.space();
        let g = self.e.graph();
        let (t, ts) = self.t_cache();
        let d2 = space.delta_sq();
        let mut report = ToeplitzReport { pi_a: 0.0, psi_phi: 0.0, delta_t: 0.0, window: self.n.saturating_sub(1) };
        let psi_phi = |p: usize| self.op_psi_t(&self.e.left_unit(p).clone());
        for f in space.adapted_units() {
            let lhs = self.mu_pair(&f, |p| ts[p].clone(), |q| t[q].clone());
            report.pi_a = report.pi_a.max(lhs.distance(&self.op_pi(&g.apply(&f))));

            let lhs = self.mu_pair(&f, |p| t[p].clone(), |q| ts[q].clone());
            report.psi_phi = report.psi_phi.max(lhs.distance(&self.op_psi_t(&self.e.left_matrix(&f))));

            let lhs = self.mu_pair(&f, psi_phi, |q| t[q].clone());
            report.delta_t = report.delta_t.max(lhs.distance(&self.op_big_t(&f).scale(re(d2))));
        }
        report
    }

    /// QCK1 for `S = δ⁻¹T`, and the exact QCK2 / QCK3 defects of the Fock representation.
    pub fn verify_qck(&self) -> QckReport {
        let space = self.e.space();
        let g = self.e.graph();
        let (t, ts) = self.t_cache();
        let inv = re(1.0 / space.delta_sq().sqrt());
        let s: Vec<_> = t.iter().map(|x| x.scale(inv)).collect();
        let ss: Vec<_> = ts.iter().map(|x| x.scale(inv)).collect();
        let blocks = space.blocks();

        // QCK1: Σ_{k,l} S(f_il) S*(f_lk) S(f_kj) = S(f_ij)
        let mut qck1: f64 = 0.0;
        for a in 0..blocks.num_blocks() {
            let n = blocks.size(a);
            let rho = &space.rho()[a];
            let sf = |i: usize, j: usize| s[blocks.index(a, i, j)].scale(re(1.0 / (rho[i] * rho[j]).sqrt()));
            let ssf = |i: usize, j: usize| ss[blocks.index(a, i, j)].scale(re(1.0 / (rho[i] * rho[j]).sqrt()));
            for i in 0..n {
                for j in 0..n {
                    let mut acc: Option<FockOperator> = None;
                    for k in 0..n {
                        for l in 0..n {
                            let term = sf(i, l).compose(&ssf(l, k)).compose(&sf(k, j));
                            acc = Some(match acc {
                                None => term,
                                Some(x) => x.add(&term),
                            });
                        }
                    }
                    let lhs = acc.expect("block is nonempty");
                    qck1 = qck1.max(lhs.distance(&sf(i, j)));
                }
            }
        }

        // QCK2 defect: μ(T*⊗T)m*(x) − μ(T⊗T*)m*(A x) = π̄₀(A x)
        let mut qck2: f64 = 0.0;
        let mut qck2_norm: f64 = 0.0;
        for p in 0..space.dim() {
            let x = space.unit(p);
            let ax = g.apply(&x);
            let first = self.mu_pair(&x, |p| ts[p].clone(), |q| t[q].clone());
            let second = self.mu_pair(&ax, |p| t[p].clone(), |q| ts[q].clone());
            let defect = first.sub(&second);
            let expected = self.op_pi0(&ax);
            qck2 = qck2.max(defect.distance(&expected));
            qck2_norm = qck2_norm.max(defect.max_abs_on(defect.valid_up_to()));
        }

        // QCK3 defect: δ⁻² − μ(S⊗S*)m*(1) = δ⁻² P₀
        let one = space.one();
        let sum = self.mu_pair(&one, |p| s[p].clone(), |q| ss[q].clone());
        let identity = self.op_pi(&one).scale(re(1.0 / space.delta_sq()));
        let defect = identity.sub(&sum);
        let expected = self.p0().scale(re(1.0 / space.delta_sq()));
        let qck3 = defect.distance(&expected);
        let off_vacuum = defect
            .blocks()
            .filter(|((i, j), _)| *i != 0 || *j != 0)
            .map(|(_, m)| max_abs(m))
            .fold(0.0, f64::max);

        QckReport {
            qck1_residual: qck1,
            qck2_defect_residual: qck2,
            qck2_defect_norm: qck2_norm,
            qck3_defect_residual: qck3,
            qck3_off_vacuum: off_vacuum,
            window: self.n.saturating_sub(1),
        }
    }

    /// `t̄^n(ξ)` restricted to the vacuum, for `ξ` given by level-`n` coordinates:
    /// column `r` is `ξ · g_r`.
    fn creation_from_vacuum(&self, n: usize, coords: &DVector<C64>) -> DMatrix<C64> {
        let level = self.tp.level(n);
        let w = self.e.space().metric();
        let mut out = DMatrix::zeros(level.dim, self.space_dim());
        for (r, wr) in w.iter().enumerate() {
            out.set_column(r, &(&level.right[r] * coords * re(1.0 / wr.sqrt())));
        }
        out
    }

    /// Orthonormal spans, block by block, of `t̄^n(ξ) π̄₀(b) t̄^m(η)*` over
    /// basis tensors `ξ, η`, `b` in `I`, and `n + m ≤ N − 1`. Each such operator
    /// lives in the single block (level `n`, level `m`).
    pub fn truncated_ideal_span(&self, ideal: &Ideal, cfg: &Config) -> Result<BTreeMap<(usize, usize), DMatrix<C64>>> {
        let space = self.e.space();
        let katsura = katsura_ideal(&self.e, cfg);
        if ideal.blocks().iter().any(|b| !katsura.contains(*b)) {
            return Err(Error::IdealNotInKatsura);
        }
        let units: Vec<usize> = ideal.blocks().iter().flat_map(|&a| space.blocks().block_range(a)).collect();
        let l0 = &self.tp.level(0).left;
        let mut spans = BTreeMap::new();
        let limit = self.n.saturating_sub(1);
        for n in 0..=limit {
            for m in 0..=(limit - n) {
                let (kn, km) = (self.tp.level(n).dim, self.tp.level(m).dim);
                let creators: Vec<DMatrix<C64>> = (0..kn).map(|i| self.creation_from_vacuum(n, &unit_vec(kn, i))).collect();
                let annihilators: Vec<DMatrix<C64>> =
                    (0..km).map(|j| self.creation_from_vacuum(m, &unit_vec(km, j)).adjoint()).collect();
                let count = kn * km * units.len();
                let mut gens = DMatrix::<C64>::zeros(kn * km, count);
                let mut col = 0;
                for c in &creators {
                    for &u in &units {
                        let cb = c * &l0[u];
                        for a in &annihilators {
                            let op = &cb * a;
                            gens.set_column(col, &DVector::from_iterator(kn * km, op.transpose().iter().copied()));
                            col += 1;
                        }
                    }
                }
                spans.insert((n, m), column_span(&gens, cfg.tol.sqrt().min(1e-6)));
            }
        }
        Ok(spans)
    }

    /// Least-squares residual of `π̄₀(1_q)` against the truncated span, relative
    /// to `‖π̄₀(1_q)‖`. No precondition on `q`: inside the ideal it is ~0.
    pub fn separation_residual(&self, ideal: &Ideal, q: usize, cfg: &Config) -> Result<f64> {
        let space = self.e.space();
        if q >= space.num_blocks() {
            return Err(Error::BlockOutOfRange(q));
        }
        let spans = self.truncated_ideal_span(ideal, cfg)?;
        let target = self.op_pi0(&space.block_unit(q));
        let mut residual_sq = 0.0;
        let mut norm_sq = 0.0;
        for ((i, j), m) in target.blocks() {
            let v = DVector::from_iterator(m.len(), m.transpose().iter().copied());
            norm_sq += v.norm_squared();
            residual_sq += match spans.get(&(*i, *j)) {
                Some(span) => projection_residual(span, &v).powi(2),
                None => v.norm_squared(),
            };
        }
        Ok((residual_sq / norm_sq).sqrt())
    }

    /// `true` when `π̄₀(1_q)` lies outside the truncated span generated by `I`.
    pub fn separation_check(&self, ideal: &Ideal, q: usize, cfg: &Config) -> Result<bool> {
        if q < self.e.space().num_blocks() && ideal.contains(q) {
            return Err(Error::QInIdeal(q));
        }
        Ok(self.separation_residual(ideal, q, cfg)? > cfg.tol)
    }
}

fn unit_vec(n: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::zeros(n);
    v[i] = re(1.0);
    v
}
