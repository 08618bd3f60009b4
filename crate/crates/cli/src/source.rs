//! Loading a chain from a matrix file, an edge list, or a generator spec.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::Args;
use walkdet::graphs::{
    gen_cycle, gen_grid, gen_rgg, gen_watts_strogatz, lazy_walk_chain, uniform_walk_chain, Graph,
    DEFAULT_LAZINESS, DEFAULT_RGG_RADIUS, DEFAULT_WS_K, DEFAULT_WS_P,
};
use walkdet::io::{read_edge_list, read_matrix};
use walkdet::spectral::{validate_chain, MarkovChain};
use walkdet::Error;

use crate::CliError;

#[derive(Args, Debug, Clone)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceSel {
    /// Transition matrix file
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Edge-list file; the chain is the uniform walk on it
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Generated graph: cycle:N, grid:WxH, rgg:N[:RADIUS], ws:N[:K[:P]]
    #[arg(long = "gen", value_name = "SPEC")]
    pub generator: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ChainArgs {
    #[command(flatten)]
    pub source: SourceSel,
    /// Seed for rgg and ws generators
    #[arg(long, default_value_t = 0)]
    pub graph_seed: u64,
    /// Add a self-loop at every node of the graph (stay moves)
    #[arg(long)]
    pub self_loops: bool,
    /// Self-loop weight added when the walk is periodic
    #[arg(long, default_value_t = DEFAULT_LAZINESS)]
    pub lazy: f64,
    /// Fail on periodic walks instead of adding the self-loop
    #[arg(long)]
    pub no_lazy: bool,
}

/// A loaded chain and the self-loop weight applied to it, if any.
pub struct Loaded {
    pub chain: MarkovChain,
    pub laziness: Option<f64>,
}

fn open(path: &PathBuf) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))
}

fn parse_num<T: std::str::FromStr>(tok: &str, spec: &str) -> Result<T, CliError> {
    tok.parse()
        .map_err(|_| CliError::usage(format!("bad number {tok:?} in generator spec {spec:?}")))
}

/// `cycle:N`, `grid:WxH`, `rgg:N[:RADIUS]`, `ws:N[:K[:P]]`.
pub fn generate(spec: &str, seed: u64) -> Result<Graph, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let g = match parts.as_slice() {
        ["cycle", n] => gen_cycle(parse_num(n, spec)?),
        ["grid", dims] => {
            let (w, h) = dims
                .split_once('x')
                .ok_or_else(|| CliError::usage(format!("grid spec must be grid:WxH, got {spec:?}")))?;
            gen_grid(parse_num(w, spec)?, parse_num(h, spec)?)
        }
        ["rgg", n] => gen_rgg(parse_num(n, spec)?, DEFAULT_RGG_RADIUS, seed),
        ["rgg", n, r] => gen_rgg(parse_num(n, spec)?, parse_num(r, spec)?, seed),
        ["ws", n] => gen_watts_strogatz(parse_num(n, spec)?, DEFAULT_WS_K, DEFAULT_WS_P, seed),
        ["ws", n, k] => gen_watts_strogatz(parse_num(n, spec)?, parse_num(k, spec)?, DEFAULT_WS_P, seed),
        ["ws", n, k, p] => gen_watts_strogatz(parse_num(n, spec)?, parse_num(k, spec)?, parse_num(p, spec)?, seed),
        _ => return Err(CliError::usage(format!("unknown generator spec {spec:?}"))),
    };
    Ok(g?)
}

impl ChainArgs {
    pub fn load(&self) -> Result<Loaded, CliError> {
        if !(0.0..1.0).contains(&self.lazy) {
            return Err(CliError::usage(format!("--lazy must lie in [0, 1), got {}", self.lazy)));
        }
        let src = &self.source;
        if let Some(path) = &src.chain {
            let p = read_matrix(open(path)?)?;
            return self.with_fallback(validate_chain(&p), |eps| {
                let m = p.len();
                let lazy: Vec<Vec<f64>> = (0..m)
                    .map(|i| (0..m).map(|j| (1.0 - eps) * p[i][j] + if i == j { eps } else { 0.0 }).collect())
                    .collect();
                validate_chain(&lazy)
            });
        }
        let mut g = match (&src.graph, &src.generator) {
            (Some(path), _) => read_edge_list(open(path)?)?,
            (_, Some(spec)) => generate(spec, self.graph_seed)?,
            _ => return Err(CliError::usage("no chain source given".into())),
        };
        if self.self_loops {
            g = g.with_self_loops();
        }
        self.with_fallback(uniform_walk_chain(&g), |eps| lazy_walk_chain(&g, eps))
    }

    fn with_fallback(
        &self,
        first: walkdet::Result<MarkovChain>,
        lazy: impl FnOnce(f64) -> walkdet::Result<MarkovChain>,
    ) -> Result<Loaded, CliError> {
        match first {
            Ok(chain) => Ok(Loaded { chain, laziness: None }),
            Err(Error::NotAperiodic { period }) if !self.no_lazy && self.lazy > 0.0 => {
                eprintln!(
                    "warning: walk has period {period}; adding self-loops of weight {} (use --no-lazy to fail instead)",
                    self.lazy
                );
                Ok(Loaded {
                    chain: lazy(self.lazy)?,
                    laziness: Some(self.lazy),
                })
            }
            Err(e) => Err(e.into()),
        }
    }
}
