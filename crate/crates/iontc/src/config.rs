//! Run configuration files: flat `key = value` lines, `#` comments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use iontc_core::keyvalue::{parse_flat, Block};
use iontc_core::optimizer::OptimizerConfig;

/// Where an optimization starts, as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Random(usize),
    File(PathBuf),
}

impl InitSpec {
    pub fn parse(text: &str) -> Result<Self> {
        match text.strip_prefix("random:") {
            Some(m) => {
                let m: usize = m
                    .trim()
                    .parse()
                    .map_err(|_| anyhow!("bad pulse count in init '{text}'"))?;
                if m == 0 {
                    bail!("random start needs at least one pulse");
                }
                Ok(InitSpec::Random(m))
            }
            None if text.is_empty() => bail!("init is empty"),
            None => Ok(InitSpec::File(PathBuf::from(text))),
        }
    }
}

impl std::fmt::Display for InitSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitSpec::Random(m) => write!(f, "random:{m}"),
            InitSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub qubits: usize,
    /// Named target (`cnot:1,2`, `qec`, ...) or a matrix file path.
    pub target: String,
    pub init: InitSpec,
    pub optimizer: OptimizerConfig,
    /// Report path; defaults to the config path with extension `report`.
    pub report: Option<PathBuf>,
    /// Best-sequence path; defaults to the config path with extension `seq`.
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "qubits",
    "target",
    "init",
    "report",
    "output",
    "gamma",
    "alpha",
    "t_init",
    "cool_factor",
    "fixed_step",
    "prune_eps",
    "insert_period",
    "max_sweeps",
    "target_fidelity",
    "seed",
    "use_y",
    "polish_sweeps",
    "polish_gap",
    "refine_iters",
    "settle_tol",
];

fn field<T: FromStr>(block: &Block, key: &str, slot: &mut T) -> Result<()> {
    if let Some(raw) = block.get(key) {
        *slot = raw
            .parse()
            .map_err(|_| anyhow!("bad value '{raw}' for '{key}'"))?;
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let block = parse_flat(text)?;
        if let Some(e) = block
            .entries
            .iter()
            .find(|e| !KEYS.contains(&e.key.as_str()))
        {
            bail!("line {}: unknown key '{}'", e.line, e.key);
        }
        let mut qubits = 0usize;
        field(&block, "qubits", &mut qubits)?;
        let target = block.require("target")?.to_string();
        let init = InitSpec::parse(block.require("init")?)?;
        block.require("qubits")?;

        let mut o = OptimizerConfig::default();
        field(&block, "gamma", &mut o.gamma)?;
        field(&block, "alpha", &mut o.alpha)?;
        field(&block, "t_init", &mut o.t_init)?;
        field(&block, "cool_factor", &mut o.cool_factor)?;
        field(&block, "fixed_step", &mut o.fixed_step)?;
        field(&block, "prune_eps", &mut o.prune_eps)?;
        field(&block, "insert_period", &mut o.insert_period)?;
        field(&block, "max_sweeps", &mut o.max_sweeps)?;
        field(&block, "target_fidelity", &mut o.target_fidelity)?;
        field(&block, "seed", &mut o.seed)?;
        field(&block, "use_y", &mut o.use_y)?;
        field(&block, "polish_sweeps", &mut o.polish_sweeps)?;
        field(&block, "polish_gap", &mut o.polish_gap)?;
        field(&block, "refine_iters", &mut o.refine_iters)?;
        field(&block, "settle_tol", &mut o.settle_tol)?;
        o.validate()?;

        Ok(RunConfig {
            qubits,
            target,
            init,
            optimizer: o,
            report: block.get("report").map(PathBuf::from),
            output: block.get("output").map(PathBuf::from),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        // Relative paths inside a config are relative to the config file.
        if let InitSpec::File(p) = &cfg.init {
            cfg.init = InitSpec::File(base.join(p));
        }
        cfg.report = Some(base.join(cfg.report.take().unwrap_or_else(|| sibling(path, "report"))));
        cfg.output = Some(base.join(cfg.output.take().unwrap_or_else(|| sibling(path, "seq"))));
        if is_path_like(&cfg.target) {
            cfg.target = base.join(&cfg.target).display().to_string();
        }
        Ok(cfg)
    }

    /// Every setting as `key = value` lines, readable back by [`RunConfig::parse`].
    pub fn echo(&self) -> String {
        let o = &self.optimizer;
        let mut s = String::new();
        let mut put = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("qubits", &self.qubits);
        put("target", &self.target);
        put("init", &self.init);
        put("gamma", &o.gamma);
        put("alpha", &o.alpha);
        put("t_init", &o.t_init);
        put("cool_factor", &o.cool_factor);
        put("fixed_step", &o.fixed_step);
        put("prune_eps", &o.prune_eps);
        put("insert_period", &o.insert_period);
        put("max_sweeps", &o.max_sweeps);
        put("target_fidelity", &o.target_fidelity);
        put("seed", &o.seed);
        put("use_y", &o.use_y);
        put("polish_sweeps", &o.polish_sweeps);
        put("polish_gap", &o.polish_gap);
        put("refine_iters", &o.refine_iters);
        put("settle_tol", &o.settle_tol);
        s
    }
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    PathBuf::from(path.file_name().unwrap_or_default()).with_extension(ext)
}

/// Named targets never contain a path separator or a file extension dot.
pub fn is_path_like(target: &str) -> bool {
    target.contains('/') || target.contains('\\') || target.contains('.')
}
