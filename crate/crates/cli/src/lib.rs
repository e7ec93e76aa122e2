//! Command-line front end: simulations, comparisons, accuracy-window and
//! inertia studies, mode analysis and timing.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use sas_transim_core::cases::load_case;
use sas_transim_core::mmadm::{simulate_sas, HandoffMode, WindowConfig};
use sas_transim_core::netmodel::SystemModel;
use sas_transim_core::pipeline::{default_window, run_case, start_state, Engine};
use sas_transim_core::ra::{
    estimate_hmin, estimate_ra, mode_periods, ra_inputs_for, RaInputs, RaResult,
};
use sas_transim_core::rk4::{compare, integrate, ErrorReport, IntegratorConfig};
use sas_transim_core::trajectory::{fmt_sig, MachineState, Source, Trajectory};
use sas_transim_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "sas-transim",
    version,
    about = "Semi-analytic transient stability simulation"
)]
pub struct Cli {
    /// Worker threads for per-machine studies (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a case and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Compare two trajectory CSV files.
    Compare(CompareArgs),
    /// Per-machine accuracy window R_A.
    Ra(RaArgs),
    /// Minimum inertia meeting a target R_A.
    Hmin(HminArgs),
    /// Small-signal oscillation periods.
    Modes(ModesArgs),
    /// Time series evaluation against RK4.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Case file, or the name of a built-in case (smib, ieee9, ieee39).
    pub case: String,
    /// Override a generator inertia, `ID=H` (repeatable).
    #[arg(long = "inertia", value_parser = parse_assign)]
    pub inertia: Vec<(i64, f64)>,
    /// Reference generator id (default: the case's, else largest H).
    #[arg(long)]
    pub reference: Option<i64>,
    /// RK4 step, s, also used for the fault-on period.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Series terms N.
    #[arg(long, default_value_t = 3)]
    pub n_terms: usize,
    /// Window length, s (default: 0.8 times the system R_A).
    #[arg(long)]
    pub window: Option<f64>,
    /// Loss-of-accuracy threshold, rad/s.
    #[arg(long, default_value_t = 5.0)]
    pub iloa_max: f64,
    /// Cut windows early when the indicator exceeds the threshold.
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long, value_enum, default_value_t = HandoffArg::Analytic)]
    pub handoff: HandoffArg,
    /// Samples per window, counting the initial point.
    #[arg(long, default_value_t = 3)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HandoffArg {
    Analytic,
    TwoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Sas,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    /// State at the start of the post-disturbance period.
    Start,
    /// Pre-fault equilibrium at rest.
    Equilibrium,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, value_enum, default_value_t = EngineArg::Sas)]
    pub engine: EngineArg,
    /// Post-disturbance duration, s.
    #[arg(long, default_value_t = 3.0)]
    pub horizon: f64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write angles relative to the reference machine.
    #[arg(long)]
    pub relative: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Report angles relative to this generator id.
    #[arg(long)]
    pub reference: Option<i64>,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, Args)]
pub struct RaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 5.0)]
    pub iloa_max: f64,
    #[arg(long, value_enum, default_value_t = StateArg::Start)]
    pub state: StateArg,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, Args)]
pub struct HminArgs {
    /// Case file or built-in name; omit when `--inputs` is given.
    pub case: Option<String>,
    #[arg(long = "inertia", value_parser = parse_assign)]
    pub inertia: Vec<(i64, f64)>,
    #[arg(long)]
    pub reference: Option<i64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.2)]
    pub target_ra: f64,
    #[arg(long, default_value_t = 5.0)]
    pub iloa_max: f64,
    /// Report the largest per-machine value as the fleet minimum.
    #[arg(long)]
    pub fleet: bool,
    /// JSON file with explicit machine-versus-reference inputs.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Shorthand for `--inertia 3=H`.
    #[arg(long)]
    pub h3: Option<f64>,
    /// Network whose linearization is analysed, at the pre-fault angles.
    #[arg(long, value_enum, default_value_t = EpochArg::Post)]
    pub epoch: EpochArg,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EpochArg {
    Pre,
    Post,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Post-disturbance duration, s (default: one window).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Minimum wall time spent repeating each measurement, s.
    #[arg(long, default_value_t = 0.3)]
    pub min_time: f64,
    #[arg(long, value_enum, default_value_t = BenchFormat::Text)]
    pub format: BenchFormat,
}

fn parse_assign(s: &str) -> Result<(i64, f64), String> {
    let (id, h) = s
        .split_once('=')
        .ok_or_else(|| format!("expected ID=H, got `{s}`"))?;
    let id = id
        .trim()
        .parse()
        .map_err(|_| format!("bad generator id `{id}`"))?;
    let h = h.trim().parse().map_err(|_| format!("bad inertia `{h}`"))?;
    Ok((id, h))
}

/// Process exit code for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Runs one command and returns its standard output.
pub fn run(cli: Cli) -> anyhow::Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .context("cannot start worker threads")?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Ra(a) => cmd_ra(&a),
        Command::Hmin(a) => cmd_hmin(&a),
        Command::Modes(a) => cmd_modes(&a),
        Command::Bench(a) => cmd_bench(&a).map(|r| r.render(a.format)),
    })
}

fn check_positive(name: &str, v: f64) -> anyhow::Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")).into());
    }
    Ok(())
}

fn build_model(
    case: &str,
    inertia: &[(i64, f64)],
    reference: Option<i64>,
) -> anyhow::Result<SystemModel> {
    let mut c = load_case(case)?;
    for &(id, h) in inertia {
        c.set_inertia(id, h)?;
    }
    if let Some(r) = reference {
        if c.generator_index(r).is_none() {
            return Err(Error::Validation(format!("unknown reference generator {r}")).into());
        }
        c.reference = Some(r);
    }
    Ok(SystemModel::build(c)?)
}

fn rk_config(dt: f64) -> anyhow::Result<IntegratorConfig> {
    check_positive("dt", dt)?;
    Ok(IntegratorConfig::with_dt(dt))
}

fn window_config(
    model: &SystemModel,
    state: &MachineState,
    s: &SeriesArgs,
    horizon: f64,
) -> anyhow::Result<WindowConfig> {
    let t_init = match s.window {
        Some(w) => w,
        None => {
            let w = default_window(model, state, s.iloa_max)?;
            if w.is_finite() {
                w
            } else {
                horizon
            }
        }
    };
    let cfg = WindowConfig {
        n_terms: s.n_terms,
        t_init,
        i_loa_max: s.iloa_max,
        adaptive: s.adaptive,
        samples_per_window: s.samples,
        handoff: match s.handoff {
            HandoffArg::Analytic => HandoffMode::AnalyticDerivative,
            HandoffArg::TwoPoint => HandoffMode::TwoPoint,
        },
        reevaluate_ra: None,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<String> {
    check_positive("horizon", a.horizon)?;
    let rk = rk_config(a.model.dt)?;
    let model = build_model(&a.model.case, &a.model.inertia, a.model.reference)?;
    let engine = match a.engine {
        EngineArg::Rk4 => Engine::Rk4,
        EngineArg::Sas => {
            let state = start_state(&model, rk)?;
            Engine::Sas(window_config(&model, &state, &a.series, a.horizon)?)
        }
    };
    let run = run_case(&model, &engine, a.horizon, rk)?;
    let csv = if a.relative {
        run.full.to_relative_csv(model.reference)
    } else {
        run.full.to_csv()
    };
    let mut summary = String::new();
    match &engine {
        Engine::Sas(cfg) => {
            let _ = writeln!(
                summary,
                "engine sas: N = {}, T = {} s, windows = {}, adaptive cuts = {}",
                cfg.n_terms,
                fmt_sig(cfg.t_init),
                run.windows,
                run.adaptive_cuts
            );
        }
        Engine::Rk4 => {
            let _ = writeln!(
                summary,
                "engine rk4: dt = {} s, samples = {}",
                fmt_sig(rk.dt),
                run.post.len()
            );
        }
    }
    if let Some((t, s)) = run.full.last() {
        let r = model.reference;
        let rel: Vec<String> = (0..s.k())
            .filter(|&i| i != r)
            .map(|i| {
                format!(
                    "{}:{}",
                    model.machines[i].id,
                    fmt_sig(s.delta[i] - s.delta[r])
                )
            })
            .collect();
        let _ = writeln!(
            summary,
            "final relative angles at t = {} s vs generator {}: {}",
            fmt_sig(t),
            model.machines[r].id,
            rel.join(" ")
        );
    }
    match &a.out {
        Some(path) => {
            std::fs::write(path, csv)
                .with_context(|| format!("cannot write {}", path.display()))?;
            let _ = writeln!(summary, "wrote {}", path.display());
            Ok(summary)
        }
        None => {
            eprint!("{summary}");
            Ok(csv)
        }
    }
}

fn read_trajectory(path: &PathBuf) -> anyhow::Result<Trajectory> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(Trajectory::from_csv(&text, Source::Rk4).with_context(|| path.display().to_string())?)
}

/// Aligned text or CSV rendering of a table.
fn render_table(header: &[&str], rows: &[Vec<String>], format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&r.join(","));
                out.push('\n');
            }
        }
        TableFormat::Text => {
            let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for r in rows {
                for (w, c) in width.iter_mut().zip(r) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: Vec<&str>| -> String {
                let parts: Vec<String> = cells
                    .iter()
                    .zip(&width)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                parts.join("  ").trim_end().to_string() + "\n"
            };
            out.push_str(&line(header.to_vec()));
            for r in rows {
                out.push_str(&line(r.iter().map(String::as_str).collect()));
            }
        }
    }
    out
}

fn error_rows(rep: &ErrorReport, traj: &Trajectory) -> Vec<Vec<String>> {
    rep.machines
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != rep.reference)
        .map(|(i, m)| {
            vec![
                traj.id(i).to_string(),
                fmt_sig(m.max_abs),
                fmt_sig(m.rmse),
                fmt_sig(m.t_at_max),
            ]
        })
        .collect()
}

pub fn cmd_compare(a: &CompareArgs) -> anyhow::Result<String> {
    let ta = read_trajectory(&a.a)?;
    let tb = read_trajectory(&a.b)?;
    let reference =
        match a.reference {
            None => None,
            Some(id) => Some(ta.index_of_id(id).ok_or_else(|| {
                Error::Trajectory(format!("no machine {id} in {}", a.a.display()))
            })?),
        };
    let rep = compare(&ta, &tb, reference)?;
    let mut out = render_table(
        &["machine", "max_abs", "rmse", "t_at_max"],
        &error_rows(&rep, &ta),
        a.format,
    );
    if a.format == TableFormat::Text {
        let _ = writeln!(
            out,
            "max {} rad over {} samples",
            fmt_sig(rep.max_abs()),
            rep.samples
        );
    }
    Ok(out)
}

fn study_state(model: &SystemModel, which: StateArg, dt: f64) -> anyhow::Result<MachineState> {
    Ok(match which {
        StateArg::Start => start_state(model, rk_config(dt)?)?,
        StateArg::Equilibrium => model.equilibrium(),
    })
}

fn ra_row(id: i64, r: &RaResult) -> Vec<String> {
    vec![
        id.to_string(),
        fmt_sig(r.c1),
        fmt_sig(r.c2),
        fmt_sig(r.r_a),
        r.root_status.as_str().to_string(),
        fmt_sig(r.closed_form_discrepancy),
    ]
}

pub fn cmd_ra(a: &RaArgs) -> anyhow::Result<String> {
    check_positive("iloa-max", a.iloa_max)?;
    let model = build_model(&a.model.case, &a.model.inertia, a.model.reference)?;
    let state = study_state(&model, a.state, a.model.dt)?;
    let r = model.reference;
    let results: Vec<(usize, anyhow::Result<Option<RaResult>>)> = (0..model.k())
        .into_par_iter()
        .map(|i| {
            let res = if i == r
                || model.post.machine(i).infinite
                || model.post.network().mag(i, r) == 0.0
            {
                Ok(None)
            } else {
                estimate_ra(&ra_inputs_for(&model.post, &state, i, r, a.iloa_max))
                    .map(Some)
                    .map_err(Into::into)
            };
            (i, res)
        })
        .collect();
    let mut rows = Vec::new();
    let mut system = f64::INFINITY;
    for (i, res) in results {
        if let Some(res) = res? {
            system = system.min(res.r_a);
            rows.push(ra_row(model.machines[i].id, &res));
        }
    }
    let mut out = render_table(
        &[
            "machine",
            "c1",
            "c2",
            "R_A",
            "root_status",
            "closed_form_discrepancy",
        ],
        &rows,
        a.format,
    );
    if a.format == TableFormat::Text {
        let _ = writeln!(
            out,
            "reference generator {}; system R_A = {} s",
            model.machines[r].id,
            fmt_sig(system)
        );
    }
    Ok(out)
}

pub fn cmd_hmin(a: &HminArgs) -> anyhow::Result<String> {
    check_positive("target-ra", a.target_ra)?;
    check_positive("iloa-max", a.iloa_max)?;
    let mut rows: Vec<(String, anyhow::Result<f64>)> = Vec::new();
    if let Some(path) = &a.inputs {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let mut inputs: RaInputs = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        inputs.i_loa_max = a.iloa_max;
        rows.push((
            "inputs".into(),
            estimate_hmin(&inputs, a.target_ra).map_err(Into::into),
        ));
    } else {
        let case = a
            .case
            .as_deref()
            .ok_or_else(|| anyhow!(Error::InvalidArgument("give a case or --inputs".into())))?;
        let model = build_model(case, &a.inertia, a.reference)?;
        let state = start_state(&model, rk_config(a.dt)?)?;
        let r = model.reference;
        let machines: Vec<usize> = (0..model.k())
            .filter(|&i| {
                i != r && !model.post.machine(i).infinite && model.post.network().mag(i, r) != 0.0
            })
            .collect();
        rows = machines
            .par_iter()
            .map(|&i| {
                let inputs = ra_inputs_for(&model.post, &state, i, r, a.iloa_max);
                (
                    model.machines[i].id.to_string(),
                    estimate_hmin(&inputs, a.target_ra).map_err(Into::into),
                )
            })
            .collect();
    }
    let mut table = Vec::new();
    let mut fleet: Option<(String, f64)> = None;
    for (id, res) in rows {
        match res {
            Ok(h) => {
                if fleet.as_ref().is_none_or(|(_, best)| h > *best) {
                    fleet = Some((id.clone(), h));
                }
                table.push(vec![id, fmt_sig(h)]);
            }
            Err(e) => match e.downcast_ref::<Error>() {
                Some(Error::TargetUnreachable { .. }) => table.push(vec![id, "unreachable".into()]),
                _ => return Err(e),
            },
        }
    }
    let mut out = render_table(&["machine", "H_min"], &table, a.format);
    if a.fleet {
        match fleet {
            Some((id, h)) => {
                let _ = writeln!(out, "fleet H_min = {} s (machine {id})", fmt_sig(h));
            }
            None => bail!(Error::TargetUnreachable {
                target: a.target_ra,
                h_max: sas_transim_core::ra::H_SEARCH.1
            }),
        }
    }
    Ok(out)
}

pub fn cmd_modes(a: &ModesArgs) -> anyhow::Result<String> {
    let mut inertia = a.model.inertia.clone();
    if let Some(h) = a.h3 {
        inertia.push((3, h));
    }
    let model = build_model(&a.model.case, &inertia, a.model.reference)?;
    let eq = model.equilibrium();
    let rhs = match a.epoch {
        EpochArg::Pre => &model.pre,
        EpochArg::Post => &model.post,
    };
    let balanced = rhs.rebalanced_at(&eq.delta)?;
    let modes = mode_periods(&balanced, &eq)?;
    let rows: Vec<Vec<String>> = modes
        .periods
        .iter()
        .zip(&modes.frequencies)
        .zip(&modes.shapes)
        .enumerate()
        .map(|(k, ((p, w), shape))| {
            let dominant = shape
                .iter()
                .enumerate()
                .fold(
                    (0, 0.0f64),
                    |b, (i, v)| if v.abs() > b.1 { (i, v.abs()) } else { b },
                )
                .0;
            vec![
                (k + 1).to_string(),
                fmt_sig(*p),
                fmt_sig(*w),
                model.machines[dominant].id.to_string(),
            ]
        })
        .collect();
    Ok(render_table(
        &["mode", "period_s", "omega_rad_s", "dominant_machine"],
        &rows,
        a.format,
    ))
}

/// Timing of series evaluation against RK4 over the same horizon.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub offline_setup_s: f64,
    /// Seconds per window.
    pub online_eval_s: f64,
    pub rk4_s: f64,
    pub speed_ratio_vs_rk4: f64,
    pub windows: usize,
    #[serde(rename = "T_over_tau")]
    pub t_over_tau: f64,
    /// Window length, s.
    pub window_s: f64,
    pub horizon_s: f64,
    pub n_terms: usize,
}

impl BenchReport {
    pub fn render(&self, format: BenchFormat) -> String {
        match format {
            BenchFormat::Json => serde_json::to_string_pretty(self).expect("plain data") + "\n",
            BenchFormat::Text => {
                let mut out = String::new();
                let rows = [
                    ("offline_setup_s", fmt_sig(self.offline_setup_s)),
                    ("online_eval_s", fmt_sig(self.online_eval_s)),
                    ("rk4_s", fmt_sig(self.rk4_s)),
                    ("speed_ratio_vs_rk4", fmt_sig(self.speed_ratio_vs_rk4)),
                    ("windows", self.windows.to_string()),
                    ("T_over_tau", fmt_sig(self.t_over_tau)),
                    ("window_s", fmt_sig(self.window_s)),
                    ("horizon_s", fmt_sig(self.horizon_s)),
                    ("n_terms", self.n_terms.to_string()),
                ];
                for (k, v) in rows {
                    let _ = writeln!(out, "{k:<20}{v}");
                }
                out
            }
        }
    }
}

/// Mean wall time of `f`, repeated until `min_time` has elapsed (3 runs at least).
fn time_repeated<T>(
    min_time: Duration,
    mut f: impl FnMut() -> anyhow::Result<T>,
) -> anyhow::Result<f64> {
    let start = Instant::now();
    let mut reps = 0u32;
    while reps < 3 || start.elapsed() < min_time {
        std::hint::black_box(f()?);
        reps += 1;
    }
    Ok(start.elapsed().as_secs_f64() / f64::from(reps))
}

pub fn cmd_bench(a: &BenchArgs) -> anyhow::Result<BenchReport> {
    check_positive("min-time", a.min_time)?;
    let rk = rk_config(a.model.dt)?;
    let setup = Instant::now();
    let model = build_model(&a.model.case, &a.model.inertia, a.model.reference)?;
    let state = start_state(&model, rk)?;
    let provisional = a.horizon.unwrap_or(1.0);
    let cfg = window_config(&model, &state, &a.series, provisional)?;
    let offline = setup.elapsed().as_secs_f64();
    let horizon = a.horizon.unwrap_or(cfg.t_init);
    check_positive("horizon", horizon)?;

    let windows = simulate_sas(&model.post, &state, horizon, &cfg)?.windows;
    let min_time = Duration::from_secs_f64(a.min_time);
    let sas_total = time_repeated(min_time, || {
        Ok(simulate_sas(&model.post, &state, horizon, &cfg)?)
    })?;
    let quiet = IntegratorConfig {
        record_every: usize::MAX,
        ..rk
    };
    let rk4_s = time_repeated(min_time, || {
        Ok(integrate(&model.post, &state, horizon, quiet)?)
    })?;
    let tau = sas_total / windows as f64;
    Ok(BenchReport {
        offline_setup_s: offline,
        online_eval_s: tau,
        rk4_s,
        speed_ratio_vs_rk4: rk4_s / (windows as f64 * tau),
        windows,
        t_over_tau: cfg.t_init / tau,
        window_s: cfg.t_init,
        horizon_s: horizon,
        n_terms: cfg.n_terms,
    })
}
