//! JSON graph specification files.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qcp_core::qspace::BlockStructure;
use qcp_core::{Config, QuantumGraph, QuantumSpace};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: &str = "1";

/// Complex number as `[re, im]`.
pub type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpecFile {
    #[serde(default = "default_version")]
    pub format_version: String,
    pub blocks: Vec<usize>,
    pub state: StateSpec,
    pub adjacency: AdjacencySpec,
}

fn default_version() -> String {
    FORMAT_VERSION.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Tracial {},
    /// Diagonal density weights, one list per block.
    Explicit { weights: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdjacencySpec {
    /// `dim × dim` matrix over the standard units, blocks ascending, row-major in each block.
    Matrix { matrix: Vec<Vec<Pair>> },
    Complete {},
    Trivial {},
    /// `A(x) = T x T*` with `T` block diagonal on `⊕ ℂ^{n_a}`.
    RankOne { t: Vec<Vec<Pair>> },
    /// 0/1 matrix on `ℂ^d`.
    Classical { matrix: Vec<Vec<f64>> },
    MainExample { n: usize },
}

#[derive(Debug)]
pub enum SpecError {
    Parse(String),
    Validation(qcp_core::Error),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::Parse(msg) => write!(f, "parse error: {msg}"),
            SpecError::Validation(err) => write!(f, "validation error: {err}"),
        }
    }
}

impl std::error::Error for SpecError {}

impl From<qcp_core::Error> for SpecError {
    fn from(err: qcp_core::Error) -> Self {
        SpecError::Validation(err)
    }
}

pub fn parse_spec(text: &str) -> Result<GraphSpecFile, SpecError> {
    let spec: GraphSpecFile = serde_json::from_str(text)
        .map_err(|e| SpecError::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    if spec.format_version != FORMAT_VERSION {
        return Err(SpecError::Parse(format!("unsupported format_version {:?}", spec.format_version)));
    }
    Ok(spec)
}

fn shape_error(found: (usize, usize), expected: (usize, usize)) -> SpecError {
    SpecError::Validation(qcp_core::Error::Shape { found, expected })
}

fn complex_matrix(rows: &[Vec<Pair>], n: usize) -> Result<DMatrix<Complex64>, SpecError> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(shape_error((rows.len(), ncols), (n, n)));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(SpecError::Parse("matrix entries must be finite".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

fn pairs(m: &DMatrix<Complex64>) -> Vec<Vec<Pair>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

impl GraphSpecFile {
    pub fn space(&self, cfg: &Config) -> Result<QuantumSpace, SpecError> {
        let blocks = BlockStructure::new(self.blocks.clone())?;
        Ok(match &self.state {
            StateSpec::Tracial {} => QuantumSpace::tracial(self.blocks.clone())?,
            StateSpec::Explicit { weights } => {
                if weights.iter().flatten().any(|w| !w.is_finite()) {
                    return Err(SpecError::Parse("weights must be finite".into()));
                }
                QuantumSpace::new(blocks, weights.clone(), cfg)?
            }
        })
    }

    /// Builds and validates the graph.
    pub fn to_graph(&self, cfg: &Config) -> Result<QuantumGraph, SpecError> {
        let space = self.space(cfg)?;
        let graph = match &self.adjacency {
            AdjacencySpec::Matrix { matrix } => QuantumGraph::new(space.clone(), complex_matrix(matrix, space.dim())?, cfg)?,
            AdjacencySpec::Complete {} => QuantumGraph::complete(space)?,
            AdjacencySpec::Trivial {} => QuantumGraph::trivial(space)?,
            AdjacencySpec::RankOne { t } => {
                let total: usize = self.blocks.iter().sum();
                let t = complex_matrix(t, total)?;
                let mut parts = Vec::with_capacity(self.blocks.len());
                let mut off = 0;
                for &n in &self.blocks {
                    parts.push(t.view((off, off), (n, n)).into_owned());
                    off += n;
                }
                let mut rebuilt = DMatrix::zeros(total, total);
                let mut off = 0;
                for p in &parts {
                    rebuilt.view_mut((off, off), p.shape()).copy_from(p);
                    off += p.nrows();
                }
                if (&t - rebuilt).iter().any(|z| z.norm() > 0.0) {
                    return Err(qcp_core::Error::NotBlockDiagonal.into());
                }
                QuantumGraph::rank_one(space, &parts, cfg)?
            }
            AdjacencySpec::Classical { matrix } => {
                if self.blocks.iter().any(|&n| n != 1) {
                    return Err(qcp_core::Error::NotCommutative.into());
                }
                let d = self.blocks.len();
                if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                    return Err(shape_error((matrix.len(), matrix.first().map_or(0, Vec::len)), (d, d)));
                }
                QuantumGraph::classical(matrix)?
            }
            AdjacencySpec::MainExample { n } => {
                if self.blocks != vec![*n; 3] || !matches!(self.state, StateSpec::Tracial {}) {
                    return Err(qcp_core::Error::MainExampleShape.into());
                }
                QuantumGraph::main_example(*n)?
            }
        };
        Ok(graph)
    }

    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }
}

pub const EXAMPLE_NAMES: [&str; 6] = ["matrix", "complete", "trivial", "rank_one", "classical", "main_example"];

/// Built-in families. `main_example` and `classical` take their size from `n`
/// (blocks of size `n`, or `n` vertices) and ignore `blocks`.
pub fn example(name: &str, blocks: &[usize], n: usize) -> Result<GraphSpecFile, String> {
    let spec = |blocks: Vec<usize>, adjacency| GraphSpecFile {
        format_version: FORMAT_VERSION.into(),
        blocks,
        state: StateSpec::Tracial {},
        adjacency,
    };
    if blocks.is_empty() || blocks.contains(&0) {
        return Err("blocks must be a nonempty list of positive sizes".into());
    }
    Ok(match name {
        "complete" => spec(blocks.to_vec(), AdjacencySpec::Complete {}),
        "trivial" => spec(blocks.to_vec(), AdjacencySpec::Trivial {}),
        "main_example" if n == 0 => return Err("main_example needs n >= 1".into()),
        "main_example" => spec(vec![n; 3], AdjacencySpec::MainExample { n }),
        "rank_one" => {
            // cyclic shift in every block: unitary, so the trace constraint holds for the tracial state
            let total: usize = blocks.iter().sum();
            let mut t = DMatrix::zeros(total, total);
            let mut off = 0;
            for &b in blocks {
                for i in 0..b {
                    t[(off + (i + 1) % b, off + i)] = Complex64::new(1.0, 0.0);
                }
                off += b;
            }
            spec(blocks.to_vec(), AdjacencySpec::RankOne { t: pairs(&t) })
        }
        "classical" => {
            // directed cycle with a loop at the first vertex
            let d = n.max(1);
            let matrix = (0..d)
                .map(|i| (0..d).map(|j| if (j + 1) % d == i || (i == 0 && j == 0) { 1.0 } else { 0.0 }).collect())
                .collect();
            spec(vec![1; d], AdjacencySpec::Classical { matrix })
        }
        "matrix" => {
            // the complete graph written out explicitly
            let space = QuantumSpace::tracial(blocks.to_vec()).map_err(|e| e.to_string())?;
            let g = QuantumGraph::complete(space).map_err(|e| e.to_string())?;
            spec(blocks.to_vec(), AdjacencySpec::Matrix { matrix: pairs(g.adjacency()) })
        }
        other => return Err(format!("unknown example {other:?}; expected one of {}", EXAMPLE_NAMES.join(", "))),
    })
}
