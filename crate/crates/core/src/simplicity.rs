//! Verdict engine: picks the applicable simplicity criterion for `O_{E_𝒢}` and
//! assembles the separation report against `O(𝒢)`.

use serde::Serialize;

use crate::edgecorr::{
    aperiodicity_report, condition_s_certificate, is_minimal, multiplicity_aperiodic, periodic_at,
    scan_saturated_hereditary, Aperiodicity, ConditionS, EdgeCorrespondence, Ideal, PeriodicOutcome,
};
use crate::qadj::QuantumGraph;
use crate::{Config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Simple,
    NotSimple,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Route {
    SingleBlockKraus,
    Schweizer,
    ConditionS,
}

/// What the verdict rests on. Every variant can be re-checked with [`SimplicityVerdict::recheck`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// `d(A)`, the Choi rank of `A` on a single block.
    KrausRank { rank: usize },
    /// A nontrivial ideal `J` (0-based blocks) with `A(J) ⊆ J`.
    InvariantIdeal { ideal: Ideal },
    /// Minimal, and aperiodic for the stated reason.
    MinimalAperiodic { aperiodicity: Aperiodicity },
    /// Minimal, and the left action has a kernel.
    MinimalNotFaithful { kernel: Ideal },
    /// Minimal, and the multiplicity matrix is not a permutation.
    MinimalMultiplicity { multiplicity: Vec<Vec<f64>> },
    /// Minimal, with `E^⊗n ≅ B` witnessed by a central vector.
    MinimalPeriodic { n: usize, witness_norm_sq: f64 },
    /// Condition (S) certificate and the (empty) list of saturated hereditary ideals.
    ConditionS { certificate: ConditionS, saturated_hereditary: Vec<Ideal> },
    Undecided { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplicityVerdict {
    pub verdict: Verdict,
    pub route: Route,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimplicityParams {
    pub m_max: usize,
    pub period_max: usize,
}

impl Default for SimplicityParams {
    fn default() -> Self {
        Self { m_max: 8, period_max: 4 }
    }
}

fn unknown(route: Route, reason: impl Into<String>) -> SimplicityVerdict {
    SimplicityVerdict { verdict: Verdict::Unknown, route, evidence: Evidence::Undecided { reason: reason.into() } }
}

fn route_for(g: &QuantumGraph, e: Option<&EdgeCorrespondence>, cfg: &Config) -> Route {
    if g.space().num_blocks() == 1 {
        Route::SingleBlockKraus
    } else if e.is_some_and(|e| e.is_full(cfg)) {
        Route::Schweizer
    } else {
        Route::ConditionS
    }
}

/// Runs the decision tree; budget failures become `UNKNOWN` with the reason.
pub fn certify_simplicity(g: &QuantumGraph, params: &SimplicityParams, cfg: &Config) -> SimplicityVerdict {
    let e = match EdgeCorrespondence::build(g, cfg) {
        Ok(e) => e,
        Err(err) => return unknown(route_for(g, None, cfg), err.to_string()),
    };
    let route = route_for(g, Some(&e), cfg);
    let attempt = match route {
        Route::SingleBlockKraus => single_block(g, cfg),
        Route::Schweizer => schweizer(&e, params, cfg),
        Route::ConditionS => condition_s_route(&e, params, cfg),
    };
    attempt.unwrap_or_else(|err| unknown(route, err.to_string()))
}

fn single_block(g: &QuantumGraph, cfg: &Config) -> Result<SimplicityVerdict> {
    let rank = g.kraus_rank(cfg)?;
    let verdict = if rank > 1 { Verdict::Simple } else { Verdict::NotSimple };
    Ok(SimplicityVerdict { verdict, route: Route::SingleBlockKraus, evidence: Evidence::KrausRank { rank } })
}

fn schweizer(e: &EdgeCorrespondence, params: &SimplicityParams, cfg: &Config) -> Result<SimplicityVerdict> {
    let route = Route::Schweizer;
    let minimality = is_minimal(e, cfg)?;
    if let Some(ideal) = minimality.witness {
        return Ok(SimplicityVerdict { verdict: Verdict::NotSimple, route, evidence: Evidence::InvariantIdeal { ideal } });
    }
    let simple = |evidence| Ok(SimplicityVerdict { verdict: Verdict::Simple, route, evidence });
    if !e.is_faithful(cfg) {
        return simple(Evidence::MinimalNotFaithful { kernel: e.left_kernel(cfg) });
    }
    if multiplicity_aperiodic(e) {
        let mu = e.multiplicity_matrix();
        let rows = (0..mu.nrows()).map(|a| mu.row(a).iter().copied().collect()).collect();
        return simple(Evidence::MinimalMultiplicity { multiplicity: rows });
    }
    match aperiodicity_report(e, params.period_max, cfg)? {
        a @ Aperiodicity::AperiodicCertified { .. } => simple(Evidence::MinimalAperiodic { aperiodicity: a }),
        Aperiodicity::PeriodicAt { n } => {
            let witness_norm_sq = match periodic_at(e, n, cfg)? {
                PeriodicOutcome::Periodic { witness_norm_sq } => witness_norm_sq,
                _ => unreachable!("periodicity search is seeded and deterministic"),
            };
            Ok(SimplicityVerdict {
                verdict: Verdict::NotSimple,
                route,
                evidence: Evidence::MinimalPeriodic { n, witness_norm_sq },
            })
        }
        Aperiodicity::NoPeriodUpToN { n } => {
            Ok(unknown(route, format!("minimal with no period up to {n}, aperiodicity not certified")))
        }
        Aperiodicity::Inconclusive { n } => Ok(unknown(route, format!("periodicity at level {n} undecided"))),
    }
}

fn condition_s_route(e: &EdgeCorrespondence, params: &SimplicityParams, cfg: &Config) -> Result<SimplicityVerdict> {
    let route = Route::ConditionS;
    if !e.is_faithful(cfg) {
        return Ok(unknown(route, "correspondence is neither full nor faithful"));
    }
    let certificate = condition_s_certificate(e, params.m_max, cfg)?;
    let saturated_hereditary = scan_saturated_hereditary(e, cfg);
    let verdict = if certificate.certified && saturated_hereditary.is_empty() {
        Verdict::Simple
    } else {
        Verdict::Unknown
    };
    Ok(SimplicityVerdict { verdict, route, evidence: Evidence::ConditionS { certificate, saturated_hereditary } })
}

impl SimplicityVerdict {
    /// Re-validates the evidence against its defining predicate.
    pub fn recheck(&self, g: &QuantumGraph, cfg: &Config) -> bool {
        let e = EdgeCorrespondence::build(g, cfg);
        match (&self.evidence, self.verdict) {
            (Evidence::KrausRank { rank }, v) => {
                g.kraus_rank(cfg).is_ok_and(|r| r == *rank) && (v == Verdict::Simple) == (*rank > 1)
            }
            (Evidence::InvariantIdeal { ideal }, Verdict::NotSimple) => {
                !ideal.is_empty() && ideal.len() < g.space().num_blocks() && g.maps_ideal_into_itself(ideal, cfg)
            }
            (Evidence::MinimalNotFaithful { kernel }, Verdict::Simple) => {
                e.is_ok_and(|e| !kernel.is_empty() && e.left_kernel(cfg) == *kernel)
            }
            (Evidence::MinimalMultiplicity { .. }, Verdict::Simple) => e.is_ok_and(|e| multiplicity_aperiodic(&e)),
            (Evidence::MinimalAperiodic { .. }, Verdict::Simple) => e.is_ok_and(|e| {
                !g.quantum_sources(cfg).is_empty() || !g.quantum_sinks(cfg).is_empty() || multiplicity_aperiodic(&e)
            }),
            (Evidence::MinimalPeriodic { n, .. }, Verdict::NotSimple) => {
                e.is_ok_and(|e| matches!(periodic_at(&e, *n, cfg), Ok(PeriodicOutcome::Periodic { .. })))
            }
            (Evidence::ConditionS { certificate, saturated_hereditary }, v) => e.is_ok_and(|e| {
                let again = scan_saturated_hereditary(&e, cfg);
                again == *saturated_hereditary
                    && (!certificate.certified || certificate.blocks.iter().all(|b| b.family.is_some()))
                    && (v == Verdict::Simple) == (certificate.certified && again.is_empty())
            }),
            (Evidence::Undecided { .. }, Verdict::Unknown) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Separated {
    True,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    /// 0-based block indices.
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    pub simplicity: SimplicityVerdict,
    pub separated: Separated,
    pub reason: Option<String>,
}

/// `O(𝒢) ≇ O_{E_𝒢}` holds when there are no sources, some sink, and `O_{E_𝒢}` is simple.
pub fn qck_separation(g: &QuantumGraph, params: &SimplicityParams, cfg: &Config) -> SeparationReport {
    let sources = g.quantum_sources(cfg);
    let sinks = g.quantum_sinks(cfg);
    let simplicity = certify_simplicity(g, params, cfg);
    let reason = if !sources.is_empty() {
        Some("graph has quantum sources".to_string())
    } else if sinks.is_empty() {
        Some("graph has no quantum sink".to_string())
    } else if simplicity.verdict != Verdict::Simple {
        Some("simplicity of the edge algebra is not established".to_string())
    } else {
        None
    };
    let separated = if reason.is_none() { Separated::True } else { Separated::Unknown };
    SeparationReport { sources, sinks, simplicity, separated, reason }
}
