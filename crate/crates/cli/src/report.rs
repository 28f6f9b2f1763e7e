//! Report records and the command runners behind the binary.

use std::fmt::Write as _;

use qcp_core::edgecorr::{aperiodicity_report, katsura_ideal, Aperiodicity};
use qcp_core::fock::{QckReport, ToeplitzReport};
use qcp_core::{Config, EdgeCorrespondence, FockTruncation, QuantumGraph, SeparationReport, SimplicityVerdict};
use serde::Serialize;

use crate::spec::GraphSpecFile;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRecord {
    pub delta_sq: f64,
    pub delta_form_residual: f64,
    pub schur_residual: f64,
    pub schur_pass: bool,
    pub cp_min_eigenvalue: f64,
    pub cp_pass: bool,
    pub zero_graph: bool,
}

/// Block sets are 0-based here; the text rendering prints 1-based labels.
#[derive(Debug, Clone, Serialize)]
pub struct CorrespondenceRecord {
    pub dim: usize,
    pub full: bool,
    pub faithful: bool,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    pub katsura: Vec<usize>,
    pub inner_ideal: Vec<usize>,
    pub range_ideal: Vec<usize>,
    pub kraus_rank: Option<usize>,
    pub multiplicity: Vec<Vec<f64>>,
    pub aperiodicity: Option<Aperiodicity>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationProbe {
    pub q: usize,
    pub separated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FockRecord {
    pub levels: usize,
    pub dims: Vec<usize>,
    pub phi_compacts_residual: f64,
    pub toeplitz: ToeplitzReport,
    pub qck: QckReport,
    /// `π̄₀(1_q)` against the truncated span generated by the range ideal, for
    /// every `q` outside it (empty unless the range ideal lies in the Katsura ideal).
    pub separation: Vec<SeparationProbe>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Params {
    pub tol: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub input: GraphSpecFile,
    pub params: Params,
    pub validation: ValidationRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correspondence: Option<CorrespondenceRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<SimplicityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<SeparationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock: Option<FockRecord>,
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn one_based(blocks: &[usize]) -> Vec<usize> {
    blocks.iter().map(|b| b + 1).collect()
}

pub fn validation(g: &QuantumGraph, cfg: &Config) -> ValidationRecord {
    let schur = g.check_schur_idempotent(cfg);
    let cp = g.check_cp(cfg);
    ValidationRecord {
        delta_sq: g.delta_sq(),
        delta_form_residual: g.space().mm_star_residual(),
        schur_residual: schur.residual,
        schur_pass: schur.pass,
        cp_min_eigenvalue: cp.min_eigenvalue,
        cp_pass: cp.pass,
        zero_graph: g.is_degenerate(cfg),
    }
}

pub fn correspondence(g: &QuantumGraph, period_max: usize, cfg: &Config) -> Option<CorrespondenceRecord> {
    let e = EdgeCorrespondence::build(g, cfg).ok()?;
    let mu = e.multiplicity_matrix();
    Some(CorrespondenceRecord {
        dim: e.dim(),
        full: e.is_full(cfg),
        faithful: e.is_faithful(cfg),
        sources: g.quantum_sources(cfg),
        sinks: g.quantum_sinks(cfg),
        katsura: katsura_ideal(&e, cfg).blocks().to_vec(),
        inner_ideal: e.inner_ideal(cfg).blocks().to_vec(),
        range_ideal: g.range_ideal(cfg).blocks().to_vec(),
        kraus_rank: g.kraus_rank(cfg).ok(),
        multiplicity: (0..mu.nrows()).map(|a| mu.row(a).iter().copied().collect()).collect(),
        aperiodicity: aperiodicity_report(&e, period_max, cfg).ok(),
    })
}

pub fn fock(g: &QuantumGraph, levels: usize, cfg: &Config) -> qcp_core::Result<FockRecord> {
    let e = EdgeCorrespondence::build(g, cfg)?;
    let f = FockTruncation::new(&e, levels, cfg)?;
    let katsura = katsura_ideal(&e, cfg);
    let range = g.range_ideal(cfg);
    let mut separation = Vec::new();
    if range.blocks().iter().all(|b| katsura.contains(*b)) {
        for q in (0..g.space().num_blocks()).filter(|q| !range.contains(*q)) {
            separation.push(SeparationProbe { q, separated: f.separation_check(&range, q, cfg)? });
        }
    }
    Ok(FockRecord {
        levels,
        dims: f.dims(),
        phi_compacts_residual: e.phi_compacts_check(),
        toeplitz: f.verify_toeplitz_identities(),
        qck: f.verify_qck(),
        separation,
    })
}

fn ideal_list(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

/// Plain-text rendering of a report.
pub fn render_text(r: &ReportFile) -> String {
    let mut out = String::new();
    let v = &r.validation;
    let _ = writeln!(out, "delta^2              {}", v.delta_sq);
    let _ = writeln!(out, "delta-form residual  {:.3e}", v.delta_form_residual);
    let _ = writeln!(out, "schur residual       {:.3e}  {}", v.schur_residual, pass(v.schur_pass));
    let _ = writeln!(out, "choi min eigenvalue  {:.3e}  {}", v.cp_min_eigenvalue, pass(v.cp_pass));
    if v.zero_graph {
        let _ = writeln!(out, "zero graph           yes");
    }
    if let Some(c) = &r.correspondence {
        let _ = writeln!(out, "dim E                {}", c.dim);
        let _ = writeln!(out, "full                 {}", c.full);
        let _ = writeln!(out, "faithful             {}", c.faithful);
        let _ = writeln!(out, "sources              {}", ideal_list(&one_based(&c.sources)));
        let _ = writeln!(out, "sinks                {}", ideal_list(&one_based(&c.sinks)));
        let _ = writeln!(out, "katsura ideal        {}", ideal_list(&one_based(&c.katsura)));
        if let Some(k) = c.kraus_rank {
            let _ = writeln!(out, "kraus rank           {k}");
        }
        if let Some(a) = &c.aperiodicity {
            let _ = writeln!(out, "periodicity          {}", serde_json::to_string(a).unwrap_or_default());
        }
    }
    if let Some(s) = &r.verdict {
        render_verdict(&mut out, s);
    }
    if let Some(s) = &r.separation {
        let _ = writeln!(out, "sources              {}", ideal_list(&one_based(&s.sources)));
        let _ = writeln!(out, "sinks                {}", ideal_list(&one_based(&s.sinks)));
        render_verdict(&mut out, &s.simplicity);
        let separated = serde_json::to_value(s.separated).ok().and_then(|x| x.as_str().map(String::from));
        let _ = writeln!(out, "separated            {}", separated.unwrap_or_default());
        if let Some(why) = &s.reason {
            let _ = writeln!(out, "reason               {why}");
        }
    }
    if let Some(f) = &r.fock {
        let _ = writeln!(out, "fock levels          {}  dims {:?}", f.levels, f.dims);
        let _ = writeln!(out, "phi compacts         {:.3e}", f.phi_compacts_residual);
        let _ = writeln!(out, "pi(A x)              {:.3e}", f.toeplitz.pi_a);
        let _ = writeln!(out, "psi_t(phi(x))        {:.3e}", f.toeplitz.psi_phi);
        let _ = writeln!(out, "delta^2 T(x)         {:.3e}", f.toeplitz.delta_t);
        let _ = writeln!(out, "QCK1                 {:.3e}", f.qck.qck1_residual);
        let _ = writeln!(out, "QCK2 defect          {:.3e}", f.qck.qck2_defect_residual);
        let _ = writeln!(out, "QCK3 defect          {:.3e}", f.qck.qck3_defect_residual);
        for p in &f.separation {
            let _ = writeln!(out, "separates block {}    {}", p.q + 1, p.separated);
        }
    }
    out
}

fn render_verdict(out: &mut String, s: &SimplicityVerdict) {
    let name = |x: serde_json::Value| x.as_str().map(String::from).unwrap_or_default();
    let verdict = serde_json::to_value(s.verdict).map(name).unwrap_or_default();
    let route = serde_json::to_value(s.route).map(name).unwrap_or_default();
    let _ = writeln!(out, "verdict              {verdict} via {route}");
    let _ = writeln!(out, "evidence             {}", serde_json::to_string(&s.evidence).unwrap_or_default());
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}
