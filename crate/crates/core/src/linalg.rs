//! Dense complex helpers on top of nalgebra.
//!
//! Tensor-leg conventions: a vector over a product index `(α, i)` with
//! `α < outer` and `i < inner` stores entry `(α, i)` at `α * inner + i`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type C64 = num_complex::Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    // symmetrize against round-off before the solver sees it
    let h = (m + m.adjoint()) * re(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Rotate a vector so that its largest-magnitude entry is real positive.
/// Makes eigenvector output reproducible up to degenerate subspaces.
fn fix_phase(v: &mut DVector<C64>) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs + 1e-12 {
            best_abs = a;
            best = i;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Given a positive semidefinite Gram matrix `S` of a spanning family, returns
/// `C` whose columns are coefficient vectors of an orthonormal basis of the
/// span: `C^H S C = I`.
pub fn orthonormalizing_coefficients(gram: &DMatrix<C64>, rank_tol: f64) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(gram);
    let top = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return DMatrix::zeros(gram.nrows(), 0);
    }
    let keep: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] > rank_tol * top)
        .collect();
    let mut c = DMatrix::zeros(gram.nrows(), keep.len());
    for (dst, &i) in keep.iter().enumerate() {
        let scale = re(1.0 / values[i].sqrt());
        c.set_column(dst, &(vectors.column(i) * scale));
    }
    c
}

/// Same contract as [`orthonormalizing_coefficients`] but through a
/// rank-revealing pivoted Cholesky factorization, so the basis is supported on
/// a subset of the spanning labels. Much cheaper than an eigen-decomposition
/// for large Gram matrices. Pivoting stops once every remaining diagonal entry
/// is below `rel_tol` times the largest initial one.
pub fn pivoted_orthonormalizer(gram: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let n = gram.nrows();
    let mut diag: Vec<f64> = (0..n).map(|i| gram[(i, i)].re).collect();
    let top = diag.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let mut cols: Vec<DVector<C64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    loop {
        let mut best = None;
        let mut best_val = rel_tol * top;
        for i in 0..n {
            if !used[i] && diag[i] > best_val {
                best_val = diag[i];
                best = Some(i);
            }
        }
        let Some(piv) = best else { break };
        let mut l = gram.column(piv).into_owned();
        for c in &cols {
            let w = c[piv].conj();
            if w != ZERO {
                l.axpy(-w, c, ONE);
            }
        }
        l *= re(1.0 / best_val.sqrt());
        for i in 0..n {
            diag[i] -= l[i].norm_sqr();
        }
        used[piv] = true;
        pivots.push(piv);
        cols.push(l);
    }
    let r = pivots.len();
    // L_J: pivot rows of the factor, lower triangular in pivot order
    let lj = DMatrix::from_fn(r, r, |i, k| cols[k][pivots[i]]);
    let inv = lj
        .adjoint()
        .solve_upper_triangular(&DMatrix::identity(r, r))
        .expect("pivots are nonsingular");
    let mut c = DMatrix::zeros(n, r);
    for (i, &p) in pivots.iter().enumerate() {
        c.row_mut(p).copy_from(&inv.row(i));
    }
    c
}

/// `M (P ⊗ I_inner)` without forming the Kronecker product.
///
/// Columns of `M` are indexed `α * inner + i` with `α < P.nrows()`; columns of
/// the result `h * inner + i` with `h < P.ncols()`.
pub fn mul_kron_identity(m: &DMatrix<C64>, p: &DMatrix<C64>, inner: usize) -> DMatrix<C64> {
    assert_eq!(m.ncols(), p.nrows() * inner, "mul_kron_identity shape");
    let mut out = DMatrix::zeros(m.nrows(), p.ncols() * inner);
    for i in 0..inner {
        let mi = DMatrix::from_fn(m.nrows(), p.nrows(), |r, a| m[(r, a * inner + i)]);
        let prod = mi * p;
        for h in 0..p.ncols() {
            out.set_column(h * inner + i, &prod.column(h));
        }
    }
    out
}

/// Orthonormal basis (columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let gram = m.adjoint() * m;
    let (values, vectors) = hermitian_eigen(&gram);
    let top = values.first().copied().unwrap_or(0.0).max(1.0);
    let keep: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] <= rel_tol * rel_tol * top)
        .collect();
    let mut out = DMatrix::zeros(m.ncols(), keep.len());
    for (dst, &i) in keep.iter().enumerate() {
        out.set_column(dst, &vectors.column(i));
    }
    out
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Numerical rank: singular values above `rel_tol * σ_max` (and above `rel_tol` absolutely).
pub fn rank(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top <= rel_tol {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Operator (spectral) norm.
pub fn op_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(L ⊗ I_inner) V` for every column of `V`.
///
/// `L` may be rectangular; rows of `V` are indexed `α * inner + i` with
/// `α < L.ncols()`, rows of the output `β * inner + i` with `β < L.nrows()`.
pub fn left_leg(l: &DMatrix<C64>, v: &DMatrix<C64>, inner: usize) -> DMatrix<C64> {
    assert_eq!(v.nrows(), l.ncols() * inner, "left_leg shape");
    let mut out = DMatrix::zeros(l.nrows() * inner, v.ncols());
    for col in 0..v.ncols() {
        for alpha in 0..l.ncols() {
            for i in 0..inner {
                let x = v[(alpha * inner + i, col)];
                if x == ZERO {
                    continue;
                }
                for beta in 0..l.nrows() {
                    let w = l[(beta, alpha)];
                    if w != ZERO {
                        out[(beta * inner + i, col)] += w * x;
                    }
                }
            }
        }
    }
    out
}

/// `(I_outer ⊗ R) V` for every column of `V`.
pub fn right_leg(r: &DMatrix<C64>, v: &DMatrix<C64>, outer: usize) -> DMatrix<C64> {
    let inner_in = r.ncols();
    let inner_out = r.nrows();
    assert_eq!(v.nrows(), outer * inner_in, "right_leg shape");
    let mut out = DMatrix::zeros(outer * inner_out, v.ncols());
    for col in 0..v.ncols() {
        for alpha in 0..outer {
            for i in 0..inner_in {
                let x = v[(alpha * inner_in + i, col)];
                if x == ZERO {
                    continue;
                }
                for j in 0..inner_out {
                    let w = r[(j, i)];
                    if w != ZERO {
                        out[(alpha * inner_out + j, col)] += w * x;
                    }
                }
            }
        }
    }
    out
}

/// Kronecker product of two column vectors, first factor outermost.
pub fn kron_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Least-squares residual of `target` against the column span of `span`
/// (Euclidean). Returns `‖target‖` when the span is empty.
pub fn projection_residual(span_onb: &DMatrix<C64>, target: &DVector<C64>) -> f64 {
    if span_onb.ncols() == 0 {
        return target.norm();
    }
    let coeffs = span_onb.adjoint() * target;
    (target - span_onb * coeffs).norm()
}

/// Euclidean orthonormal basis of the column span of `m`.
pub fn column_span(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    // work on the smaller Gram side
    if m.ncols() <= m.nrows() {
        let c = orthonormalizing_coefficients(&(m.adjoint() * m), rel_tol * rel_tol);
        m * c
    } else {
        let (values, vectors) = hermitian_eigen(&(m * m.adjoint()));
        let top = values.first().copied().unwrap_or(0.0);
        let keep: Vec<usize> = (0..values.len())
            .filter(|&i| top > 0.0 && values[i] > rel_tol * rel_tol * top)
            .collect();
        let mut out = DMatrix::zeros(m.nrows(), keep.len());
        for (dst, &i) in keep.iter().enumerate() {
            out.set_column(dst, &vectors.column(i));
        }
        out
    }
}
