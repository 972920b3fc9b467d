//! Directed random graph models and their randomly weighted adjacency matrices.
//!
//! Every vertex carries a Gaussian self-loop weight, and every directed edge
//! `u -> v` carries an independent standard normal weight stored at `A[u][v]`.
//! Absent edges are exact zeros. Two graph families are provided: the directed
//! Erdős–Rényi graph `G(n, p)` and the directed random geometric graph
//! `G(n, rho)` on the unit square (called "dRRG" for historical reasons). The
//! Poisson ensemble (diagonal) and real Ginibre ensemble (full) bound both
//! families and can be generated directly.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use faer::Mat;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counter-based seed: a master seed plus a ChaCha stream index.
///
/// Realization `i` of an ensemble uses stream `i` of the point's master seed,
/// so the matrices do not depend on how realizations are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphSeed {
    pub master: u64,
    pub stream: u64,
}

impl GraphSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

impl From<u64> for GraphSeed {
    fn from(master: u64) -> Self {
        Self { master, stream: 0 }
    }
}

/// Derives an independent master seed for the `index`-th child of `master`
/// (grid points of a sweep, bisection steps, ...).
///
/// Child seeds are read from a reserved ChaCha stream that realization
/// indices never reach.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(u64::MAX);
    rng.set_word_pos(2 * u128::from(index));
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphModel {
    Derg,
    Drrg,
    Pe,
    Rge,
}

impl GraphModel {
    /// Name of the control parameter, if the model has one.
    pub fn control_name(self) -> Option<&'static str> {
        match self {
            GraphModel::Derg => Some("p"),
            GraphModel::Drrg => Some("rho"),
            GraphModel::Pe | GraphModel::Rge => None,
        }
    }

    /// Valid range of the control parameter (closed).
    pub fn control_range(self) -> Option<(f64, f64)> {
        match self {
            GraphModel::Derg => Some((0.0, 1.0)),
            GraphModel::Drrg => Some((0.0, SQRT_2)),
            GraphModel::Pe | GraphModel::Rge => None,
        }
    }

    pub fn params(self, n: usize, control: Option<f64>) -> Result<GraphModelParams> {
        let params = match (self, control) {
            (GraphModel::Derg, Some(p)) => GraphModelParams::Derg { n, p },
            (GraphModel::Drrg, Some(rho)) => GraphModelParams::Drrg { n, rho },
            (GraphModel::Pe, None) => GraphModelParams::Pe { n },
            (GraphModel::Rge, None) => GraphModelParams::Rge { n },
            (model, Some(_)) => {
                return Err(Error::Parameter(format!(
                    "model {model} takes no control parameter"
                )))
            }
            (model, None) => {
                return Err(Error::Parameter(format!(
                    "model {model} requires {}",
                    model.control_name().unwrap_or("a control parameter")
                )))
            }
        };
        params.validate()?;
        Ok(params)
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphModel::Derg => "derg",
            GraphModel::Drrg => "drrg",
            GraphModel::Pe => "pe",
            GraphModel::Rge => "rge",
        })
    }
}

impl FromStr for GraphModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "derg" => Ok(GraphModel::Derg),
            "drrg" => Ok(GraphModel::Drrg),
            "pe" => Ok(GraphModel::Pe),
            "rge" => Ok(GraphModel::Rge),
            other => Err(Error::Parameter(format!(
                "unknown model '{other}' (expected derg, drrg, pe or rge)"
            ))),
        }
    }
}

/// A fully specified graph model: the family, its size and its control
/// parameter. `p` exists only for dERG and `rho` only for dRRG.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum GraphModelParams {
    Derg { n: usize, p: f64 },
    Drrg { n: usize, rho: f64 },
    Pe { n: usize },
    Rge { n: usize },
}

impl GraphModelParams {
    pub fn n(&self) -> usize {
        match *self {
            GraphModelParams::Derg { n, .. }
            | GraphModelParams::Drrg { n, .. }
            | GraphModelParams::Pe { n }
            | GraphModelParams::Rge { n } => n,
        }
    }

    pub fn model(&self) -> GraphModel {
        match self {
            GraphModelParams::Derg { .. } => GraphModel::Derg,
            GraphModelParams::Drrg { .. } => GraphModel::Drrg,
            GraphModelParams::Pe { .. } => GraphModel::Pe,
            GraphModelParams::Rge { .. } => GraphModel::Rge,
        }
    }

    /// The control parameter (`p` or `rho`), if any.
    pub fn control(&self) -> Option<f64> {
        match *self {
            GraphModelParams::Derg { p, .. } => Some(p),
            GraphModelParams::Drrg { rho, .. } => Some(rho),
            GraphModelParams::Pe { .. } | GraphModelParams::Rge { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 2 {
            return Err(Error::Parameter(format!("n = {n}, need n >= 2")));
        }
        match *self {
            GraphModelParams::Derg { p, .. } if !(0.0..=1.0).contains(&p) => {
                Err(Error::Parameter(format!("p = {p} is outside [0, 1]")))
            }
            GraphModelParams::Drrg { rho, .. } if !(0.0..=SQRT_2).contains(&rho) => Err(
                Error::Parameter(format!("rho = {rho} is outside [0, sqrt(2)]")),
            ),
            _ => Ok(()),
        }
    }

    pub fn generate(&self, seed: impl Into<GraphSeed>) -> Result<WeightedDigraph> {
        match *self {
            GraphModelParams::Derg { n, p } => generate_derg(n, p, seed),
            GraphModelParams::Drrg { n, rho } => generate_drrg(n, rho, seed),
            GraphModelParams::Pe { n } => generate_reference(ReferenceEnsemble::Pe, n, seed),
            GraphModelParams::Rge { n } => generate_reference(ReferenceEnsemble::Rge, n, seed),
        }
    }
}

impl fmt::Display for GraphModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphModelParams::Derg { n, p } => write!(f, "derg n={n} p={p}"),
            GraphModelParams::Drrg { n, rho } => write!(f, "drrg n={n} rho={rho}"),
            GraphModelParams::Pe { n } => write!(f, "pe n={n}"),
            GraphModelParams::Rge { n } => write!(f, "rge n={n}"),
        }
    }
}

/// Vertex positions of a random geometric graph, uniform on `[0, 1]^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexCloud {
    pub positions: Vec<[f64; 2]>,
}

impl VertexCloud {
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let positions = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        Self { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        let [xu, yu] = self.positions[u];
        let [xv, yv] = self.positions[v];
        (xu - xv).hypot(yu - yv)
    }
}

/// One realization of a randomly weighted directed graph.
#[derive(Clone, Debug)]
pub struct WeightedDigraph {
    pub params: GraphModelParams,
    pub n: usize,
    /// Dense `n x n` weighted adjacency matrix; `A[u][v] != 0` iff `u == v`
    /// or the edge `u -> v` exists.
    pub adjacency: Mat<f64>,
    /// Number of nonzero off-diagonal entries (directed edges).
    pub edge_count: usize,
    pub seed: GraphSeed,
    /// Vertex positions, for geometric graphs only.
    pub vertices: Option<VertexCloud>,
}

impl WeightedDigraph {
    /// Writes the nonzero entries as `u,v,w` triples.
    pub fn write_triples_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["u", "v", "w"])?;
        for u in 0..self.n {
            for v in 0..self.n {
                let w = self.adjacency[(u, v)];
                if w != 0.0 {
                    out.serialize((u, v, w))?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Directed Erdős–Rényi graph: each ordered pair `u != v` is an edge with
/// probability `p`, independently. `p = 0` and `p = 1` give the PE and RGE
/// limits.
pub fn generate_derg(n: usize, p: f64, seed: impl Into<GraphSeed>) -> Result<WeightedDigraph> {
    let params = GraphModelParams::Derg { n, p };
    params.validate()?;
    let seed = seed.into();
    let mut rng = seed.rng();
    let mut a = Mat::<f64>::zeros(n, n);
    let mut edge_count = 0;
    for u in 0..n {
        for v in 0..n {
            if u == v {
                a[(u, u)] = gaussian(&mut rng);
            } else if rng.random::<f64>() < p {
                a[(u, v)] = gaussian(&mut rng);
                edge_count += 1;
            }
        }
    }
    Ok(WeightedDigraph {
        params,
        n,
        adjacency: a,
        edge_count,
        seed,
        vertices: None,
    })
}

/// Directed random geometric graph: vertices uniform on the unit square, and
/// both `u -> v` and `v -> u` present iff their distance is strictly below
/// `rho`. The two directions get independent weights.
pub fn generate_drrg(n: usize, rho: f64, seed: impl Into<GraphSeed>) -> Result<WeightedDigraph> {
    let params = GraphModelParams::Drrg { n, rho };
    params.validate()?;
    let seed = seed.into();
    let mut rng = seed.rng();
    let cloud = VertexCloud::sample(n, &mut rng);
    let mut a = Mat::<f64>::zeros(n, n);
    for u in 0..n {
        a[(u, u)] = gaussian(&mut rng);
    }
    let mut edge_count = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            if cloud.distance(u, v) < rho {
                a[(u, v)] = gaussian(&mut rng);
                a[(v, u)] = gaussian(&mut rng);
                edge_count += 2;
            }
        }
    }
    Ok(WeightedDigraph {
        params,
        n,
        adjacency: a,
        edge_count,
        seed,
        vertices: Some(cloud),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceEnsemble {
    /// Poisson ensemble: diagonal matrix of i.i.d. standard normals.
    Pe,
    /// Real Ginibre ensemble: all `n^2` entries i.i.d. standard normal.
    Rge,
}

pub fn generate_reference(
    ensemble: ReferenceEnsemble,
    n: usize,
    seed: impl Into<GraphSeed>,
) -> Result<WeightedDigraph> {
    let params = match ensemble {
        ReferenceEnsemble::Pe => GraphModelParams::Pe { n },
        ReferenceEnsemble::Rge => GraphModelParams::Rge { n },
    };
    params.validate()?;
    let seed = seed.into();
    let mut rng = seed.rng();
    let mut a = Mat::<f64>::zeros(n, n);
    let edge_count = match ensemble {
        ReferenceEnsemble::Pe => {
            for u in 0..n {
                a[(u, u)] = gaussian(&mut rng);
            }
            0
        }
        ReferenceEnsemble::Rge => {
            for u in 0..n {
                for v in 0..n {
                    a[(u, v)] = gaussian(&mut rng);
                }
            }
            n * (n - 1)
        }
    };
    Ok(WeightedDigraph {
        params,
        n,
        adjacency: a,
        edge_count,
        seed,
        vertices: None,
    })
}

/// Mean out-degree excluding self-loops: nonzero off-diagonal entries over `n`.
pub fn measure_degree(g: &WeightedDigraph) -> f64 {
    let a = &g.adjacency;
    let mut edges = 0usize;
    for v in 0..a.ncols() {
        for u in 0..a.nrows() {
            if u != v && a[(u, v)] != 0.0 {
                edges += 1;
            }
        }
    }
    edges as f64 / g.n as f64
}
