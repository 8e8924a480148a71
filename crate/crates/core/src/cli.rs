//! Command-line driver: a JSON job description in, a JSON or CSV artifact out.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::criteria::{entanglement_witness, evaluate_criteria, ZERO_TOL_REL};
use crate::dynamics::{example_state, run_sweep_with_cap, Quantity, SweepSpec};
use crate::error::{Error, Result};
use crate::geometry::{incompatibility, qfim, qfim_and_uct, qfim_and_uct_pure, qfim_pure, Cutoffs};
use crate::invariance::{run_suite, SuiteConfig};
use crate::lie_basis::{
    build_collective_full, build_collective_symmetric, build_full_observable_basis, build_gellmann,
    build_spin1_dipole, build_su3_collective, verify_basis, LieBasis, DEFAULT_CAP,
};
use crate::states::{css, ghz_balanced, initial_example_state, level, level_css_mixture, noon, DensityMatrix, PureState};

const ABOUT: &str = "Quantum Fisher information, Uhlmann curvature and optimality criteria over Lie-algebra bases.";

const AFTER_HELP: &str = "\
The job is a JSON document with a `command` (basis, qfim, uct, criteria, witness,
invariance, sweep) and its parameters, either nested under `parameters` or at the
top level. Optional top-level keys: output_path, format, seed, cap, cutoffs.

Sweep CSV columns: alpha, beta, then any of lambda_max_g1, lambda_max_g2, gamma_g1,
gamma_g2, trace_g3, spectrum_g1_0..2, spectrum_g2_0..7, then rho_support_rel and
rank_rel. The remaining metadata is written next to the CSV as <output>.meta.json.

Exit status: 0 success, 1 I/O failure, 2 invalid usage or parameters,
3 dimension cap exceeded, 4 numerical failure.";

#[derive(Debug, Parser)]
#[command(name = "qgeom", version, about = ABOUT, after_help = AFTER_HELP)]
pub struct Cli {
    /// Job description (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; affects wall time only.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Cap on Hilbert-space dimension (generator count for su(D)).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Suppress the summary printed alongside a written artifact.
    #[arg(long)]
    pub quiet: bool,
    /// Omit the runtime from metadata so repeated runs are byte-identical.
    #[arg(long)]
    pub quiet_meta: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Basis,
    Qfim,
    Uct,
    Criteria,
    Witness,
    Invariance,
    Sweep,
}

impl Command {
    fn parse(name: &str) -> Result<Self> {
        serde_json::from_value(Value::String(name.to_string()))
            .map_err(|_| Error::InvalidParameter(format!("unknown command `{name}`")))
    }
}

const RESERVED: [&str; 7] = ["command", "parameters", "output_path", "format", "seed", "cap", "cutoffs"];

/// A parsed job.
#[derive(Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub parameters: Map<String, Value>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
    pub cap: usize,
    pub cutoffs: Cutoffs,
}

fn field<T: for<'de> Deserialize<'de>>(obj: &Map<String, Value>, key: &str) -> Result<Option<T>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| Error::InvalidParameter(format!("`{key}`: {e}"))),
    }
}

fn required<T: for<'de> Deserialize<'de>>(obj: &Map<String, Value>, key: &str) -> Result<T> {
    field(obj, key)?.ok_or_else(|| Error::InvalidParameter(format!("missing `{key}`")))
}

impl JobConfig {
    pub fn from_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidParameter("config must be a JSON object".into()))?;
        let command = Command::parse(&required::<String>(obj, "command")?)?;
        let mut parameters = match obj.get("parameters") {
            None => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return Err(Error::InvalidParameter("`parameters` must be an object".into())),
        };
        for (k, v) in obj {
            if !RESERVED.contains(&k.as_str()) {
                parameters.insert(k.clone(), v.clone());
            }
        }
        Ok(Self {
            command,
            parameters,
            output_path: field(obj, "output_path")?,
            format: field(obj, "format")?,
            seed: field(obj, "seed")?.unwrap_or(0),
            cap: field(obj, "cap")?.unwrap_or(DEFAULT_CAP),
            cutoffs: field(obj, "cutoffs")?.unwrap_or_default(),
        })
    }

    /// Canonical JSON form; keys are sorted, so it also feeds the config hash.
    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "parameters": self.parameters,
            "output_path": self.output_path,
            "format": self.format,
            "seed": self.seed,
            "cap": self.cap,
            "cutoffs": self.cutoffs,
        })
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_value().to_string().as_bytes());
        digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Sweep => Format::Csv,
            _ => Format::Json,
        })
    }
}

/// Single-particle amplitude: a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

fn amplitudes(values: Vec<Amplitude>) -> Vec<Complex<f64>> {
    values
        .into_iter()
        .map(|a| match a {
            Amplitude::Real(x) => Complex::new(x, 0.0),
            Amplitude::Complex([re, im]) => Complex::new(re, im),
        })
        .collect()
}

enum Probe {
    Pure(PureState<f64>),
    Mixed(DensityMatrix<f64>),
}

struct StateSpec {
    kind: String,
    d: usize,
    n: usize,
}

fn build_state(p: &Map<String, Value>, cap: usize) -> Result<(Probe, StateSpec)> {
    let kind: String = required(p, "state")?;
    let n: usize = required(p, "N")?;
    let fixed_qutrits = matches!(kind.as_str(), "initial" | "example");
    let d: usize = if fixed_qutrits { 3 } else { required(p, "d")? };
    if fixed_qutrits && field::<usize>(p, "d")?.is_some_and(|x| x != 3) {
        return Err(Error::InvalidParameter(format!("state `{kind}` is defined for d = 3")));
    }
    let vector = |key: &str, default: usize| -> Result<Vec<Complex<f64>>> {
        match field::<Vec<Amplitude>>(p, key)? {
            Some(v) => Ok(amplitudes(v)),
            None => Ok(level(d, default)),
        }
    };
    let probe = match kind.as_str() {
        "css" => Probe::Pure(css(n, &vector("psi", 0)?, cap)?),
        "noon" => Probe::Pure(noon(n, &vector("psi", 0)?, &vector("perp", d - 1)?, cap)?),
        "ghz" => Probe::Pure(ghz_balanced(d, n, cap)?),
        "initial" => Probe::Pure(initial_example_state(n, cap)?),
        "example" => {
            let alpha: f64 = field(p, "alpha")?.unwrap_or(0.0);
            let beta: f64 = field(p, "beta")?.unwrap_or(0.0);
            Probe::Pure(example_state(n, alpha, beta)?)
        }
        "mixture" => Probe::Mixed(level_css_mixture(d, n, required(p, "q")?, cap)?),
        other => return Err(Error::InvalidParameter(format!("unknown state `{other}`"))),
    };
    Ok((probe, StateSpec { kind, d, n }))
}

fn build_basis(p: &Map<String, Value>, state: Option<&StateSpec>, cap: usize) -> Result<LieBasis<f64>> {
    let family: Option<String> = field(p, "basis")?;
    let d: Option<usize> = field::<usize>(p, "d")?.or(state.map(|s| s.d));
    let n: Option<usize> = field::<usize>(p, "N")?.or(state.map(|s| s.n));
    let need = |x: Option<usize>, key: &str| x.ok_or_else(|| Error::InvalidParameter(format!("missing `{key}`")));
    let family = family.unwrap_or_else(|| if n.is_some() { "collective".into() } else { "gellmann".into() });
    match family.as_str() {
        "gellmann" => build_gellmann(need(d, "d")?),
        "collective" => build_collective_symmetric(need(d, "d")?, need(n, "N")?, cap),
        "g1" => build_spin1_dipole(need(n, "N")?, cap),
        "g2" => build_su3_collective(need(n, "N")?, cap),
        "g3" | "full" => {
            let dim = match field::<usize>(p, "D")? {
                Some(dim) => dim,
                None => build_collective_symmetric::<f64>(need(d, "d")?, need(n, "N")?, cap)?.hilbert_dim,
            };
            build_full_observable_basis(dim, cap)
        }
        "collective_full" => build_collective_full(need(d, "d")?, need(n, "N")?, cap),
        other => Err(Error::InvalidParameter(format!("unknown basis `{other}`"))),
    }
}

fn qfim_uct(probe: &Probe, basis: &LieBasis<f64>, cutoffs: &Cutoffs) -> Result<(crate::geometry::Qfim<f64>, crate::geometry::Uct<f64>)> {
    match probe {
        Probe::Pure(psi) => qfim_and_uct_pure(psi, basis),
        Probe::Mixed(rho) => qfim_and_uct(rho, basis, cutoffs),
    }
}

/// The result of a job before serialization.
pub enum Artifact {
    Json { result: Value, summary: Option<String> },
    Sweep(crate::dynamics::SweepResult),
}

/// Runs a job without touching the filesystem.
pub fn execute(config: &JobConfig) -> Result<Artifact> {
    let p = &config.parameters;
    let cap = config.cap;
    let cutoffs = &config.cutoffs;
    match config.command {
        Command::Basis => {
            let basis = build_basis(p, None, cap)?;
            let report = verify_basis(&basis);
            Ok(Artifact::Json {
                result: json!({ "basis": basis.to_document(), "report": report }),
                summary: Some(format!("{} generators, C = {}", basis.dim(), basis.norm_constant)),
            })
        }
        Command::Qfim => {
            let (probe, spec) = build_state(p, cap)?;
            let basis = build_basis(p, Some(&spec), cap)?;
            let f = match &probe {
                Probe::Pure(psi) => qfim_pure(psi, &basis)?,
                Probe::Mixed(rho) => qfim(rho, &basis, cutoffs)?,
            };
            let summary = format!("eigenvalues {:?}", f.eigenvalues);
            Ok(Artifact::Json {
                result: serde_json::to_value(f.to_document(cutoffs))?,
                summary: Some(summary),
            })
        }
        Command::Uct => {
            let (probe, spec) = build_state(p, cap)?;
            let basis = build_basis(p, Some(&spec), cap)?;
            let (f, u) = qfim_uct(&probe, &basis, cutoffs)?;
            let inc = match incompatibility(&f, &u, cutoffs.rank_rel) {
                Ok(r) => Some(r),
                Err(Error::UndefinedIncompatibility) => None,
                Err(e) => return Err(e),
            };
            let summary = match &inc {
                Some(r) => format!("gamma = {:e}", r.gamma),
                None => "gamma undefined (QFIM vanishes)".into(),
            };
            Ok(Artifact::Json {
                result: json!({ "uct": u.to_document(cutoffs), "incompatibility": inc }),
                summary: Some(summary),
            })
        }
        Command::Criteria | Command::Witness => {
            let (probe, spec) = build_state(p, cap)?;
            let basis = build_basis(p, Some(&spec), cap)?;
            let (f, _) = qfim_uct(&probe, &basis, cutoffs)?;
            if config.command == Command::Witness {
                let w = entanglement_witness(&f, spec.n, spec.d);
                let summary = format!("violated = {}, trace = {}, threshold = {}", w.violated, w.trace, w.threshold);
                return Ok(Artifact::Json {
                    result: json!({ "state": spec.kind, "witness": w }),
                    summary: Some(summary),
                });
            }
            let report = evaluate_criteria(&f, ZERO_TOL_REL).with_witness(spec.n, spec.d, f.lambda_max());
            let table = report.table();
            Ok(Artifact::Json {
                result: json!({ "state": spec.kind, "basis": basis.name, "criteria": report }),
                summary: Some(table),
            })
        }
        Command::Invariance => {
            let mut suite: SuiteConfig = serde_json::from_value(Value::Object(p.clone()))
                .map_err(|e| Error::InvalidParameter(format!("invariance parameters: {e}")))?;
            suite.seed = config.seed;
            suite.cutoffs = config.cutoffs;
            let report = run_suite(&suite)?;
            let summary = format!("pass = {} over {} cases", report.pass, report.cases.len());
            Ok(Artifact::Json {
                result: serde_json::to_value(&report)?,
                summary: Some(summary),
            })
        }
        Command::Sweep => {
            let n: usize = required(p, "N")?;
            let mut spec = match field::<String>(p, "grid")? {
                Some(name) => SweepSpec::preset(&name, n)?,
                None => SweepSpec::new(n, required(p, "alpha_grid")?, required(p, "beta_grid")?, Quantity::ALL.to_vec()),
            };
            if let Some(names) = field::<Vec<String>>(p, "quantities")? {
                spec.quantities = names.iter().map(|s| Quantity::parse(s)).collect::<Result<_>>()?;
            }
            spec.include_casimir = field(p, "include_casimir")?.unwrap_or(false);
            spec.cutoffs = config.cutoffs;
            Ok(Artifact::Sweep(run_sweep_with_cap(&spec, cap)?))
        }
    }
}

fn metadata(config: &JobConfig, runtime: Option<f64>) -> Value {
    let mut meta = json!({
        "tool": "qgeom",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command,
        "config_sha256": config.hash(),
        "cutoffs": config.cutoffs,
        "seed": config.seed,
        "cap": config.cap,
    });
    if let Some(t) = runtime {
        meta["runtime_seconds"] = json!(t);
    }
    meta
}

/// Serialized artifact plus an optional human-readable summary.
pub struct Rendered {
    pub body: Vec<u8>,
    pub metadata: Value,
    pub format: Format,
    pub summary: Option<String>,
}

pub fn render(config: &JobConfig, artifact: Artifact, runtime: Option<f64>) -> Result<Rendered> {
    let meta = metadata(config, runtime);
    let format = config.format();
    let (body, summary) = match (artifact, format) {
        (Artifact::Json { result, summary }, Format::Json) => {
            let doc = json!({ "metadata": meta, "result": result });
            (serde_json::to_vec_pretty(&doc)?, summary)
        }
        (Artifact::Json { .. }, Format::Csv) => {
            return Err(Error::InvalidParameter(format!(
                "csv output is only available for sweeps, not `{}`",
                serde_json::to_value(config.command)?.as_str().unwrap_or("?")
            )))
        }
        (Artifact::Sweep(mut sweep), Format::Json) => {
            sweep.metadata.seed = Some(config.seed);
            sweep.metadata.runtime_seconds = runtime.unwrap_or(0.0);
            let mut result = serde_json::to_value(&sweep)?;
            if runtime.is_none() {
                if let Some(m) = result.get_mut("metadata").and_then(Value::as_object_mut) {
                    m.remove("runtime_seconds");
                }
            }
            (serde_json::to_vec_pretty(&json!({ "metadata": meta, "result": result }))?, None)
        }
        (Artifact::Sweep(sweep), Format::Csv) => {
            let mut buf = Vec::new();
            sweep.write_csv(&mut buf)?;
            (buf, Some(format!("{} grid points", sweep.records.len())))
        }
    };
    Ok(Rendered {
        body,
        metadata: meta,
        format,
        summary,
    })
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn error_line(e: &Error) -> String {
    let msg = e.to_string().replace('\n', " ").replace('"', "'");
    format!("error code={} kind={} message=\"{}\"", e.exit_code(), e.kind(), msg)
}

fn run_cli(cli: &Cli) -> Result<()> {
    let text = std::fs::read_to_string(&cli.config)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
    let mut config = JobConfig::from_value(&value)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(cap) = cli.cap {
        config.cap = cap;
    }
    if let Some(format) = cli.format {
        config.format = Some(format);
    }
    if let Some(out) = &cli.output {
        config.output_path = Some(out.clone());
    }
    let start = Instant::now();
    let execute_job = || execute(&config);
    let artifact = match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("threads: {e}")))?
            .install(execute_job)?,
        None => execute_job()?,
    };
    let runtime = (!cli.quiet_meta).then(|| start.elapsed().as_secs_f64());
    let rendered = render(&config, artifact, runtime)?;
    match &config.output_path {
        Some(path) => {
            std::fs::write(path, &rendered.body)?;
            if rendered.format == Format::Csv {
                std::fs::write(sidecar(path), serde_json::to_vec_pretty(&rendered.metadata)?)?;
            }
            if !cli.quiet {
                if let Some(s) = &rendered.summary {
                    println!("{}", s.trim_end());
                }
            }
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(&rendered.body)?;
            if !rendered.body.ends_with(b"\n") {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs the job and returns the process exit status.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            e.exit_code()
        }
    }
}
