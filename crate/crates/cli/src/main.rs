//! `qmeas`: command-line front end for the measurement-semantics library.
//!
//! Configuration precedence: CLI flags > config file (`--config`, TOML) >
//! built-in defaults. The default output directory is taken from
//! `QMEAS_OUT_DIR` when set, else the current directory. Reports are
//! written atomically (temp file + rename) and are byte-identical for a
//! fixed config and seed.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 numerical
//! error, 4 I/O error.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qmeas_core::bell::{
    chsh_from_samples, chsh_terms, sample_outcome_pairs, singlet, ChshSetting,
    CorrelationEstimate,
};
use qmeas_core::coincidence::{
    generate_streams, run_window_sweep, write_clicks_csv, DelayModel, ReferenceDelayModel,
    SourceParams, SweepConfig, SweepReport, Window,
};
use qmeas_core::composite::{
    canonical_product_refinement, entangled_state, run_epr_scenario, CompositeSpace,
    EprScenarioReport, Side,
};
use qmeas_core::measurement::{
    conditional_probability, luders_measure, von_neumann_measure, QuantumState,
};
use qmeas_core::spectral::tensor_product;
use qmeas_core::{CVector, HermitianOperator};

const SCHEMA_VERSION: u32 = 1;
const DEFAULT_SEED: u64 = 42;
const OUT_DIR_ENV: &str = "QMEAS_OUT_DIR";

// ---------------------------------------------------------------------------
// errors and exit codes

enum CliError {
    Config(String),
    Numerical(qmeas_core::Error),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "error[config]: {msg}"),
            CliError::Numerical(e) => write!(f, "error[numerical]: {e}"),
            CliError::Io(e) => write!(f, "error[io]: {e}"),
        }
    }
}

impl From<qmeas_core::Error> for CliError {
    fn from(e: qmeas_core::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// CLI surface

#[derive(Parser)]
#[command(name = "qmeas", version, about = "Quantum measurement-semantics experiments")]
struct Cli {
    /// RNG seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML config file; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file path (overrides the config file and the default).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Two-postulate comparison on an entangled two-qubit state: remote
    /// sharpness under Lüders vs the undetermined von Neumann branch.
    EprDemo,
    /// Lüders vs von Neumann selective updates for a degenerate observable.
    PostulateCompare,
    /// Quantum CHSH correlations: analytic and sampled, per setting pair.
    Chsh,
    /// Event-based coincidence simulation over a list of time windows.
    WindowSweep,
    /// Conditional-probability table for two sharp qubit observables.
    Condprob,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::EprDemo => "epr-demo",
            Command::PostulateCompare => "postulate-compare",
            Command::Chsh => "chsh",
            Command::WindowSweep => "window-sweep",
            Command::Condprob => "condprob",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

// ---------------------------------------------------------------------------
// config file schema

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    epr_demo: Option<EprDemoParams>,
    postulate_compare: Option<PostulateCompareParams>,
    chsh: Option<ChshParams>,
    window_sweep: Option<WindowSweepParams>,
    condprob: Option<CondprobParams>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct EprDemoParams {
    /// Coefficients as [re, im]; normalized before use.
    c1: [f64; 2],
    c2: [f64; 2],
}

impl Default for EprDemoParams {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c1: [h, 0.0],
            c2: [h, 0.0],
        }
    }
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct PostulateCompareParams {
    /// State vector on the two-qubit product space as [re, im] entries;
    /// normalized before use. The measured observable is σ_z⊗I.
    coefficients: Vec<[f64; 2]>,
}

impl Default for PostulateCompareParams {
    fn default() -> Self {
        Self {
            coefficients: vec![[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
        }
    }
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct ChshParams {
    /// Analyzer angles [a, a', b, b'] in radians.
    angles: [f64; 4],
    n_samples: usize,
}

impl Default for ChshParams {
    fn default() -> Self {
        let t = ChshSetting::tsirelson();
        Self {
            angles: [t.a, t.a_prime, t.b, t.b_prime],
            n_samples: 100_000,
        }
    }
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct WindowSweepParams {
    n_pairs: usize,
    /// Seconds; `"inf"` (or an `inf` float) selects the match-all baseline.
    windows: Vec<Window>,
    /// Analyzer angles [a, a', b, b'] in radians.
    angles: [f64; 4],
    t0: f64,
    exponent: f64,
    mean_spacing: f64,
    jitter_scale: f64,
    /// Also write the four raw click streams as CSV next to the report.
    emit_clicks: bool,
}

impl Default for WindowSweepParams {
    fn default() -> Self {
        let c = SweepConfig::default();
        Self {
            n_pairs: c.n_pairs,
            windows: c.windows,
            angles: [c.settings.a, c.settings.a_prime, c.settings.b, c.settings.b_prime],
            t0: c.model.t0,
            exponent: c.model.exponent,
            mean_spacing: c.source.mean_spacing,
            jitter_scale: c.source.jitter_scale,
            emit_clicks: false,
        }
    }
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct CondprobParams {
    theta_a: f64,
    theta_b: f64,
    /// Qubit state as [re, im] entries; normalized before use.
    state: Vec<[f64; 2]>,
}

impl Default for CondprobParams {
    fn default() -> Self {
        Self {
            theta_a: 0.3,
            theta_b: 1.1,
            state: vec![[1.0, 0.0], [0.0, 0.0]],
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{p:?}: {e}")))
        }
    }
}

// ---------------------------------------------------------------------------
// validation helpers

fn require(cond: bool, msg: &str) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg.to_string()))
    }
}

fn finite_angles(angles: &[f64]) -> CliResult<()> {
    require(angles.iter().all(|a| a.is_finite()), "angles must be finite")
}

/// Normalize [re, im] coefficient pairs into a unit vector.
fn normalized_vector(coeffs: &[[f64; 2]]) -> CliResult<CVector> {
    require(
        coeffs.iter().flatten().all(|x| x.is_finite()),
        "coefficients must be finite",
    )?;
    let v = CVector::from_iterator(
        coeffs.len(),
        coeffs.iter().map(|c| Complex64::new(c[0], c[1])),
    );
    let norm = v.norm();
    require(norm > 0.0, "coefficients must not all be zero")?;
    Ok(v.map(|z| z / norm))
}

// ---------------------------------------------------------------------------
// output plumbing

struct OutputTarget {
    path: PathBuf,
}

impl OutputTarget {
    fn resolve(cli_out: Option<PathBuf>, file_out: Option<PathBuf>, name: &str, format: Format) -> Self {
        let path = cli_out.or(file_out).unwrap_or_else(|| {
            let dir = std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            let ext = match format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            dir.join(format!("{name}.{ext}"))
        });
        Self { path }
    }

    /// Atomic write: temp file in the target directory, then rename.
    fn write(&self, bytes: &[u8]) -> CliResult<()> {
        let dir = self.path.parent().filter(|p| !p.as_os_str().is_empty());
        let mut tmp = match dir {
            Some(d) => tempfile::NamedTempFile::new_in(d)?,
            None => tempfile::NamedTempFile::new_in(".")?,
        };
        tmp.write_all(bytes)?;
        tmp.persist(&self.path).map_err(|e| CliError::Io(e.error))?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema_version: u32,
    experiment: &'static str,
    seed: u64,
    report: T,
}

fn to_json<T: Serialize>(experiment: &'static str, seed: u64, report: T) -> CliResult<Vec<u8>> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        experiment,
        seed,
        report,
    };
    let mut bytes = serde_json::to_vec_pretty(&envelope)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_into_bytes<F>(build: F) -> CliResult<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        build(&mut w).map_err(|e| CliError::Config(format!("csv serialization failed: {e}")))?;
        w.flush()?;
    }
    Ok(buf)
}

// ---------------------------------------------------------------------------
// experiments

#[derive(Serialize)]
struct EprDemoReport {
    c1: [f64; 2],
    c2: [f64; 2],
    branches: Vec<EprBranchEntry>,
}

#[derive(Serialize)]
struct EprBranchEntry {
    outcome_index: usize,
    scenario: EprScenarioReport,
}

fn run_epr_demo(params: &EprDemoParams, seed: u64, format: Format) -> CliResult<Vec<u8>> {
    let c = normalized_vector(&[params.c1, params.c2])?;
    let a1 = HermitianOperator::pauli_z();
    let a2 = HermitianOperator::pauli_z();
    let space = CompositeSpace::from_observables(&a1, &a2)?;
    let state = entangled_state(c[0], c[1], 0, 1, &space)?;
    let mut branches = Vec::new();
    for outcome_index in 0..2 {
        branches.push(EprBranchEntry {
            outcome_index,
            scenario: run_epr_scenario(&state, &a1, &a2, outcome_index)?,
        });
    }
    let report = EprDemoReport {
        c1: [c[0].re, c[0].im],
        c2: [c[1].re, c[1].im],
        branches,
    };
    match format {
        Format::Json => to_json("epr-demo", seed, report),
        Format::Csv => csv_into_bytes(|w| {
            w.write_record([
                "outcome_index",
                "postulate",
                "outcome",
                "probability",
                "purity",
                "undetermined",
                "remote_variance",
                "element_of_reality",
            ])?;
            for entry in &report.branches {
                for (postulate, b) in [
                    ("luders", &entry.scenario.luders),
                    ("von_neumann", &entry.scenario.von_neumann),
                ] {
                    w.write_record([
                        entry.outcome_index.to_string(),
                        postulate.to_string(),
                        b.outcome.to_string(),
                        b.probability.to_string(),
                        b.purity.to_string(),
                        b.undetermined.to_string(),
                        b.remote_variance.to_string(),
                        b.element_of_reality_assigned.to_string(),
                    ])?;
                }
            }
            Ok(())
        }),
    }
}

#[derive(Serialize)]
struct PostulateCompareRow {
    outcome: f64,
    probability: f64,
    luders_purity: f64,
    von_neumann_purity: f64,
    von_neumann_undetermined: bool,
}

fn run_postulate_compare(
    params: &PostulateCompareParams,
    seed: u64,
    format: Format,
) -> CliResult<Vec<u8>> {
    require(
        params.coefficients.len() == 4,
        "postulate_compare.coefficients must have exactly 4 entries (two-qubit space)",
    )?;
    let v = normalized_vector(&params.coefficients)?;
    let state = QuantumState::pure(v)?;
    let space = CompositeSpace::standard(2, 2)?;
    let lifted = tensor_product(&HermitianOperator::pauli_z(), &HermitianOperator::identity(2))
        .decompose()?;
    let refinement = canonical_product_refinement(&lifted, &space, Side::First)?;
    let mut rows = Vec::new();
    for k in 0..lifted.branches().len() {
        let lu = match luders_measure(&state, &lifted, k) {
            Ok(r) => r,
            Err(qmeas_core::Error::ZeroProbabilityBranch { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let vn = von_neumann_measure(&state, &lifted, &refinement.family, k)?;
        rows.push(PostulateCompareRow {
            outcome: lu.outcome,
            probability: lu.probability,
            luders_purity: lu.post_state.state().purity(),
            von_neumann_purity: vn.post_state.state().purity(),
            von_neumann_undetermined: vn.post_state.is_undetermined(),
        });
    }
    match format {
        Format::Json => to_json("postulate-compare", seed, rows),
        Format::Csv => csv_into_bytes(|w| {
            w.write_record([
                "outcome",
                "probability",
                "luders_purity",
                "von_neumann_purity",
                "von_neumann_undetermined",
            ])?;
            for r in &rows {
                w.write_record([
                    r.outcome.to_string(),
                    r.probability.to_string(),
                    r.luders_purity.to_string(),
                    r.von_neumann_purity.to_string(),
                    r.von_neumann_undetermined.to_string(),
                ])?;
            }
            Ok(())
        }),
    }
}

#[derive(Serialize)]
struct ChshRow {
    theta_a: f64,
    theta_b: f64,
    e_quantum: f64,
    e_sampled: f64,
    n: usize,
    stderr: f64,
}

#[derive(Serialize)]
struct ChshReport {
    rows: Vec<ChshRow>,
    s_analytic: f64,
    s_sampled: f64,
    s_stderr: f64,
}

fn run_chsh(params: &ChshParams, seed: u64, format: Format) -> CliResult<Vec<u8>> {
    finite_angles(&params.angles)?;
    require(params.n_samples >= 2, "chsh.n_samples must be at least 2")?;
    let setting = ChshSetting {
        a: params.angles[0],
        a_prime: params.angles[1],
        b: params.angles[2],
        b_prime: params.angles[3],
    };
    let state = singlet();
    let e_quantum = chsh_terms(&state, &setting)?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut samples: [Vec<(i8, i8)>; 4] = Default::default();
    let mut rows = Vec::new();
    for (k, (ta, tb)) in setting.pairs().into_iter().enumerate() {
        samples[k] = sample_outcome_pairs(&state, ta, tb, params.n_samples, &mut rng)?;
        let CorrelationEstimate {
            value, n_pairs, std_error,
        } = qmeas_core::bell::correlation_estimate(&samples[k])
            .expect("n_samples >= 2 was validated");
        rows.push(ChshRow {
            theta_a: ta,
            theta_b: tb,
            e_quantum: e_quantum[k],
            e_sampled: value,
            n: n_pairs,
            stderr: std_error,
        });
    }
    let (s_sampled, s_stderr) = chsh_from_samples(&samples)?;
    let s_analytic = e_quantum[0] - e_quantum[1] + e_quantum[2] + e_quantum[3];
    let report = ChshReport {
        rows,
        s_analytic,
        s_sampled,
        s_stderr,
    };
    match format {
        Format::Json => to_json("chsh", seed, report),
        Format::Csv => csv_into_bytes(|w| {
            w.write_record(["theta_a", "theta_b", "E_quantum", "E_sampled", "n", "stderr"])?;
            for r in &report.rows {
                w.write_record([
                    r.theta_a.to_string(),
                    r.theta_b.to_string(),
                    r.e_quantum.to_string(),
                    r.e_sampled.to_string(),
                    r.n.to_string(),
                    r.stderr.to_string(),
                ])?;
            }
            Ok(())
        }),
    }
}

fn sweep_config(params: &WindowSweepParams, seed: u64) -> CliResult<SweepConfig> {
    require(params.n_pairs >= 1, "window_sweep.n_pairs must be at least 1")?;
    finite_angles(&params.angles)?;
    require(
        params.mean_spacing.is_finite() && params.mean_spacing > 0.0,
        "window_sweep.mean_spacing must be positive",
    )?;
    require(
        params.jitter_scale.is_finite() && params.jitter_scale >= 0.0,
        "window_sweep.jitter_scale must be non-negative",
    )?;
    let model = ReferenceDelayModel {
        t0: params.t0,
        exponent: params.exponent,
    };
    model
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(SweepConfig {
        n_pairs: params.n_pairs,
        master_seed: seed,
        settings: ChshSetting {
            a: params.angles[0],
            a_prime: params.angles[1],
            b: params.angles[2],
            b_prime: params.angles[3],
        },
        source: SourceParams {
            mean_spacing: params.mean_spacing,
            jitter_scale: params.jitter_scale,
        },
        model,
        windows: params.windows.clone(),
    })
}

fn sweep_csv(report: &SweepReport) -> CliResult<Vec<u8>> {
    csv_into_bytes(|w| {
        w.write_record([
            "window_s",
            "E_ab",
            "E_abp",
            "E_apb",
            "E_apbp",
            "S",
            "stderr_S",
            "matched_fraction",
        ])?;
        for row in &report.rows {
            let window = match row.window {
                Window::Finite(s) => s.to_string(),
                Window::MatchAllInOrder => "inf".to_string(),
            };
            w.write_record([
                window,
                row.correlations[0].to_string(),
                row.correlations[1].to_string(),
                row.correlations[2].to_string(),
                row.correlations[3].to_string(),
                row.s.to_string(),
                row.stderr_s.to_string(),
                row.matched_fraction.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn run_window_sweep_cmd(
    params: &WindowSweepParams,
    seed: u64,
    format: Format,
    target: &OutputTarget,
) -> CliResult<Vec<u8>> {
    let config = sweep_config(params, seed)?;
    let report = run_window_sweep(&config)?;
    if params.emit_clicks {
        let dir = target
            .path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let streams = generate_streams(&config)?;
        for (name, clicks) in [
            ("clicks_a", &streams.a),
            ("clicks_a_prime", &streams.a_prime),
            ("clicks_b", &streams.b),
            ("clicks_b_prime", &streams.b_prime),
        ] {
            let mut buf = Vec::new();
            write_clicks_csv(&mut buf, clicks)?;
            OutputTarget {
                path: dir.join(format!("{name}.csv")),
            }
            .write(&buf)?;
        }
    }
    match format {
        Format::Json => to_json("window-sweep", seed, report),
        Format::Csv => sweep_csv(&report),
    }
}

#[derive(Serialize)]
struct CondprobRow {
    a_index: usize,
    b_index: usize,
    p_b_given_a: f64,
    p_a_given_b: f64,
    overlap_sq: f64,
}

fn run_condprob(params: &CondprobParams, seed: u64, format: Format) -> CliResult<Vec<u8>> {
    finite_angles(&[params.theta_a, params.theta_b])?;
    require(params.state.len() == 2, "condprob.state must have 2 entries")?;
    let state = QuantumState::pure(normalized_vector(&params.state)?)?;
    let a = qmeas_core::bell::observable_from_angle(params.theta_a).decompose()?;
    let b = qmeas_core::bell::observable_from_angle(params.theta_b).decompose()?;
    let mut rows = Vec::new();
    for k in 0..2 {
        let ek = &a.branch_basis(k)[0];
        for m in 0..2 {
            let em = &b.branch_basis(m)[0];
            rows.push(CondprobRow {
                a_index: k,
                b_index: m,
                p_b_given_a: conditional_probability(&state, &a, k, &b, m)?,
                p_a_given_b: conditional_probability(&state, &b, m, &a, k)?,
                overlap_sq: em.dotc(ek).norm_sqr(),
            });
        }
    }
    match format {
        Format::Json => to_json("condprob", seed, rows),
        Format::Csv => csv_into_bytes(|w| {
            w.write_record(["a_index", "b_index", "p_b_given_a", "p_a_given_b", "overlap_sq"])?;
            for r in &rows {
                w.write_record([
                    r.a_index.to_string(),
                    r.b_index.to_string(),
                    r.p_b_given_a.to_string(),
                    r.p_a_given_b.to_string(),
                    r.overlap_sq.to_string(),
                ])?;
            }
            Ok(())
        }),
    }
}

// ---------------------------------------------------------------------------

fn run(cli: Cli) -> CliResult<PathBuf> {
    let file = load_config(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let format = cli.format.or(file.format).unwrap_or(Format::Json);
    let target = OutputTarget::resolve(cli.out, file.out, cli.command.name(), format);

    let bytes = match cli.command {
        Command::EprDemo => {
            run_epr_demo(&file.epr_demo.unwrap_or_default(), seed, format)?
        }
        Command::PostulateCompare => run_postulate_compare(
            &file.postulate_compare.unwrap_or_default(),
            seed,
            format,
        )?,
        Command::Chsh => run_chsh(&file.chsh.unwrap_or_default(), seed, format)?,
        Command::WindowSweep => run_window_sweep_cmd(
            &file.window_sweep.unwrap_or_default(),
            seed,
            format,
            &target,
        )?,
        Command::Condprob => run_condprob(&file.condprob.unwrap_or_default(), seed, format)?,
    };
    target.write(&bytes)?;
    Ok(target.path)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(path) => println!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
