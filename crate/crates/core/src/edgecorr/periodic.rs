//! Periodicity: `E^⊗n ≅ B` as correspondences.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{bvalued, EdgeCorrespondence, TensorPowers};
use crate::linalg::{null_space, singular_values, C64};
use crate::{Config, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PeriodicOutcome {
    Periodic { witness_norm_sq: f64 },
    NotPeriodic,
    /// Dimensions match and the central subspace is nonzero, but every sample
    /// had a singular inner product.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Aperiodicity {
    /// A source or sink rules out periodicity, or the multiplicity matrix is not a permutation.
    AperiodicCertified { reason: String },
    NoPeriodUpToN { n: usize },
    PeriodicAt { n: usize },
    /// Some level in range could not be decided.
    Inconclusive { n: usize },
}

/// A nonnegative integer matrix `μ` with `μⁿ = I` is a permutation matrix, and
/// `E^⊗n ≅ B` forces `μⁿ = I`. So a non-permutation `μ` rules out every period.
pub fn multiplicity_aperiodic(e: &EdgeCorrespondence) -> bool {
    let mu = e.multiplicity_matrix();
    let nb = mu.nrows();
    let is_perm = (0..nb).all(|a| {
        let row_ones = (0..nb).filter(|&b| (mu[(a, b)] - 1.0).abs() < 1e-6).count();
        let row_zero = (0..nb).filter(|&b| mu[(a, b)].abs() < 1e-6).count();
        let col_ones = (0..nb).filter(|&b| (mu[(b, a)] - 1.0).abs() < 1e-6).count();
        row_ones == 1 && row_zero == nb - 1 && col_ones == 1
    });
    !is_perm
}

/// Tests `E^⊗n ≅ B`: equal dimension and a central `ω` with `⟨ω|ω⟩` invertible.
pub fn periodic_at(e: &EdgeCorrespondence, n: usize, cfg: &Config) -> Result<PeriodicOutcome> {
    let space = e.space();
    if n == 0 {
        return Ok(PeriodicOutcome::Periodic { witness_norm_sq: 1.0 });
    }
    if e.predicted_power_dim(n) != space.dim() {
        return Ok(PeriodicOutcome::NotPeriodic);
    }
    let tp = TensorPowers::build(e, n, cfg)?;
    let level = tp.level(n);
    if level.dim != space.dim() {
        return Ok(PeriodicOutcome::NotPeriodic);
    }
    let k = level.dim;
    let d = space.dim();
    // central vectors: (L_p − R_p) ω = 0 for every unit
    let mut stacked = DMatrix::<C64>::zeros(d * k, k);
    for p in 0..d {
        let diff = &level.left[p] - &level.right[p];
        stacked.rows_mut(p * k, k).copy_from(&diff);
    }
    let central = null_space(&stacked, cfg.tol.sqrt().min(1e-6));
    if central.ncols() == 0 {
        return Ok(PeriodicOutcome::NotPeriodic);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples.max(1) {
        let coeffs = DVector::<C64>::from_fn(central.ncols(), |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        let omega = &central * coeffs;
        let ip = bvalued(&level.bgram, &omega, &omega);
        let scale = ip.max_abs();
        let invertible = (0..space.num_blocks()).all(|a| {
            let s = singular_values(&space.block_matrix(&ip, a));
            s.last().is_some_and(|&lo| lo > cfg.tol.sqrt() * scale.max(1e-300))
        });
        if invertible {
            return Ok(PeriodicOutcome::Periodic { witness_norm_sq: omega.norm_squared() });
        }
    }
    Ok(PeriodicOutcome::Inconclusive)
}

/// Certified aperiodicity from a source or sink, otherwise a scan of `n = 1..=max_n`.
pub fn aperiodicity_report(e: &EdgeCorrespondence, max_n: usize, cfg: &Config) -> Result<Aperiodicity> {
    let g = e.graph();
    if !g.quantum_sources(cfg).is_empty() {
        return Ok(Aperiodicity::AperiodicCertified { reason: "graph has a quantum source".into() });
    }
    if !g.quantum_sinks(cfg).is_empty() {
        return Ok(Aperiodicity::AperiodicCertified { reason: "graph has a quantum sink".into() });
    }
    let mut undecided = None;
    for n in 1..=max_n {
        match periodic_at(e, n, cfg)? {
            PeriodicOutcome::Periodic { .. } => return Ok(Aperiodicity::PeriodicAt { n }),
            PeriodicOutcome::Inconclusive => {
                undecided.get_or_insert(n);
            }
            PeriodicOutcome::NotPeriodic => {}
        }
    }
    Ok(match undecided {
        Some(n) => Aperiodicity::Inconclusive { n },
        None => Aperiodicity::NoPeriodUpToN { n: max_n },
    })
}
