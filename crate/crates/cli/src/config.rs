use std::path::PathBuf;

use clap::{Args, Subcommand};
use mfig_core::{Energy, Graph, MeanFunction, SearchParams};
use serde::{Deserialize, Serialize};

/// A fully resolved invocation. Reports embed it, and `--config` replays it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub common: Common,
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    /// `k<n>`, `path<n>`, `cycle<n>`, `q<d>` or `file:<edge list>`.
    #[arg(long, global = true, default_value = "k2")]
    pub graph: String,
    /// `arithmetic`, `geometric`, `logarithmic`, `spectral`, `tim` or `tim:C=<c>`.
    #[arg(long, global = true, default_value = "logarithmic")]
    pub mean: String,
    /// `shannon`, `quadratic`, or a JSON energy such as `{"kind":"linear","V":[0,1]}`.
    #[arg(long, global = true, default_value = "shannon")]
    pub energy: String,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// CSV path for traces and grids.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    /// Search margin: minimization runs over `{p_i >= margin}`.
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub margin: f64,
    /// Tolerance override for the command's pass criterion.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Lattice points per simplex edge for global searches.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, default_value_t = 16)]
    pub multistarts: usize,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Local or global curvature bound.
    Curvature {
        /// Point on the simplex, comma separated.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        /// Minimize over the simplex interior.
        #[arg(long)]
        global: bool,
        /// Test whether the curvature is constant on sampled points.
        #[arg(long)]
        constant: bool,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Two-point distance, curvature, upper bound and effectiveness.
    TwoPoint {
        /// Transport distance between `(a, 1 - a)` and `(b, 1 - b)`.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        distance: Option<Vec<f64>>,
        /// Curvature at `(x, 1 - x)`.
        #[arg(long)]
        kappa_at: Option<f64>,
        /// Curvature on `N` interior grid points, written to `--csv`.
        #[arg(long)]
        kappa_grid: Option<usize>,
        #[arg(long)]
        efct: bool,
    },
    /// Geodesic integration with a CSV trace.
    Geodesic {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        f: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
    /// Gradient flow with dissipation certificate.
    Flow {
        #[arg(long, value_delimiter = ',', required = true)]
        p0: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Curvature bound for the certificate; computed when absent.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Log-Sobolev inequality at sampled points.
    Lsi {
        /// Curvature bound; computed when absent.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Entropy power concavity along the heat flow.
    Costa {
        /// Start of the heat flow; defaults to `0.9,0.1` on two vertices.
        #[arg(long, value_delimiter = ',')]
        p0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// C4-property and product curvature bound.
    ProductCheck {
        #[arg(long, default_value = "k2")]
        g: String,
        #[arg(long, default_value = "k2")]
        h: String,
        /// Energy on the product vertex set, for non-entropy energies.
        #[arg(long)]
        product_energy: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        c4_samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Curvature { .. } => "curvature",
            Command::TwoPoint { .. } => "two-point",
            Command::Geodesic { .. } => "geodesic",
            Command::Flow { .. } => "flow",
            Command::Lsi { .. } => "lsi",
            Command::Costa { .. } => "costa",
            Command::ProductCheck { .. } => "product-check",
        }
    }

}

/// Input problem with a named field, so messages can point at the flag.
#[derive(Debug)]
pub struct UsageError {
    pub field: &'static str,
    pub msg: String,
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid --{}: {}", self.field, self.msg)
    }
}

pub fn usage(field: &'static str, msg: impl std::fmt::Display) -> UsageError {
    UsageError { field, msg: msg.to_string() }
}

fn size(spec: &str, prefix: &str) -> Option<usize> {
    spec.strip_prefix(prefix)?.parse().ok()
}

/// Parses `k<n> | path<n> | cycle<n> | q<d> | file:<path>`.
pub fn parse_graph(spec: &str, field: &'static str) -> Result<Graph, UsageError> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix("file:") {
        return Graph::read_edge_list(path).map_err(|e| usage(field, format!("{path}: {e}")));
    }
    let g = if let Some(n) = size(spec, "path") {
        Graph::path(n)
    } else if let Some(n) = size(spec, "cycle") {
        Graph::cycle(n)
    } else if let Some(n) = size(spec, "k") {
        Graph::complete(n)
    } else if let Some(d) = size(spec, "q") {
        Graph::hypercube(d)
    } else {
        return Err(usage(field, format!("unknown graph '{spec}'")));
    };
    g.map_err(|e| usage(field, e))
}

impl Common {
    pub fn graph(&self) -> Result<Graph, UsageError> {
        parse_graph(&self.graph, "graph")
    }

    pub fn energy(&self) -> Result<Energy, UsageError> {
        Energy::parse(&self.energy).map_err(|e| usage("energy", e))
    }

    pub fn mean(&self, energy: &Energy) -> Result<MeanFunction, UsageError> {
        MeanFunction::from_name(&self.mean, energy).map_err(|e| usage("mean", e))
    }

    pub fn search(&self) -> Result<SearchParams, UsageError> {
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err(usage("margin", format!("{} is outside (0, 1/2)", self.margin)));
        }
        Ok(SearchParams { grid_per_dim: self.grid, multistarts: self.multistarts, margin: self.margin, seed: self.seed })
    }
}
