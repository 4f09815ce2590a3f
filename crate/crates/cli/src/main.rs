use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use mpm_core::dynamics::{Controller, ModelKind, SystemModel, TraceReader};
use mpm_core::exec::{self, Parallelism};
use mpm_core::formula::{parse_spec, FormulaSpec, IndexSet};
use mpm_core::geometry::{Aabb, Resolution};
use mpm_core::monitor::{Monitor, VerdictKind};
use mpm_core::oracle::{compare, GridOptions, GridSystem};
use mpm_core::precompute::{compute_tables, Mode, PrecomputeOptions, SetTable};
use mpm_core::Error;

/// Exit status for configuration and input errors.
const EXIT_CONFIG: u8 = 2;
/// Exit status when a resource ceiling is hit.
const EXIT_CEILING: u8 = 3;

#[derive(Parser)]
#[command(name = "mpm", version, about = "Predictive STL monitoring over known dynamics")]
struct Cli {
    /// Worker threads (also MPM_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every computation on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build feasible and/or satisfiable set tables.
    Precompute(PrecomputeArgs),
    /// Monitor a trace against pre-computed tables.
    Monitor(MonitorArgs),
    /// Simulate the system under a controller and write a trace.
    Simulate(SimulateArgs),
    /// Write the 2-D projection of one table entry.
    Export(ExportArgs),
    /// Exhaustive grid reference tables, optionally compared to a table.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Feasible,
    Satisfiable,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeArg::Feasible => vec![Mode::Feasible],
            ModeArg::Satisfiable => vec![Mode::Satisfiable],
            ModeArg::Both => vec![Mode::Feasible, Mode::Satisfiable],
        }
    }
}

#[derive(Args)]
struct PrecomputeArgs {
    /// System config JSON, or a built-in model name.
    #[arg(long)]
    system: String,
    /// Formula file.
    #[arg(long)]
    formula: PathBuf,
    /// Resolution: one value or one per state dimension, comma separated.
    #[arg(long)]
    eps: Resolution,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// Output file; with `--mode both` the mode name is inserted before
    /// the extension. A `.gz` suffix compresses.
    #[arg(long)]
    out: PathBuf,
    /// Maximum boxes per entry.
    #[arg(long, default_value_t = 1_000_000)]
    ceiling: usize,
}

#[derive(Args)]
struct MonitorArgs {
    #[arg(long)]
    formula: PathBuf,
    /// Feasible table.
    #[arg(long)]
    table: PathBuf,
    /// Satisfiable table.
    #[arg(long)]
    satisfiable: Option<PathBuf>,
    /// System the tables should belong to; mismatches are reported.
    #[arg(long)]
    system: Option<String>,
    /// Trace CSV (`k,x0,...`), or `-` for standard input.
    #[arg(long, default_value = "-")]
    trace: String,
    /// One JSON object per line instead of `k,VERDICT,{I}`.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    system: String,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Vec<f64>,
    #[arg(long)]
    steps: usize,
    /// `constant:u0,u1`, `random:SEED` or `file:PATH`.
    #[arg(long)]
    controller: Controller,
    /// Output CSV (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Csv,
    Svg,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    k: usize,
    /// Remaining index set, e.g. `{1,2,3}`.
    #[arg(long)]
    set: IndexSet,
    /// One or two state dimensions to project on.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: ExportFormat,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    system: String,
    #[arg(long)]
    formula: PathBuf,
    /// Cell size; must divide the state domain evenly.
    #[arg(long)]
    cell: Resolution,
    /// Input grid spacing for box input sets.
    #[arg(long)]
    input_step: Option<Resolution>,
    #[arg(long, value_enum, default_value = "feasible")]
    mode: ModeArg,
    /// Write the grid table(s) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table to compare against the grid sets (mode taken from the table).
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Largest cells x inputs product.
    #[arg(long, default_value_t = 50_000_000)]
    limit: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.threads {
        Some(t) => {
            exec::configure_threads(t);
        }
        None => {
            exec::configure_threads_from_env();
        }
    }
    let par = if cli.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    let result = match cli.command {
        Command::Precompute(a) => precompute(a, par),
        Command::Monitor(a) => monitor(a),
        Command::Simulate(a) => simulate(a),
        Command::Export(a) => export(a),
        Command::Oracle(a) => oracle(a, par),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let ceiling = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<Error>(),
                    Some(Error::ResourceCeiling { .. } | Error::GridTooLarge { .. })
                )
            });
            ExitCode::from(if ceiling { EXIT_CEILING } else { EXIT_CONFIG })
        }
    }
}

fn load_system(s: &str) -> anyhow::Result<SystemModel> {
    let builtin: Option<ModelKind> = serde_json::from_value(serde_json::Value::String(s.into())).ok();
    match builtin {
        Some(kind) if !Path::new(s).exists() => Ok(SystemModel::builtin(kind)?),
        _ => SystemModel::load(s).with_context(|| format!("loading system {s}")),
    }
}

fn load_formula(path: &Path) -> anyhow::Result<FormulaSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_spec(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `t.json` becomes `t.feasible.json`; `t.json.gz` becomes `t.feasible.json.gz`.
fn mode_path(out: &Path, mode: Mode) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = [".json.gz", ".json", ".gz"]
        .into_iter()
        .find(|e| name.len() > e.len() && name.ends_with(e))
        .unwrap_or("");
    let stem = &name[..name.len() - ext.len()];
    out.with_file_name(format!("{stem}.{}{ext}", mode.name()))
}

fn precompute(a: PrecomputeArgs, par: Parallelism) -> anyhow::Result<u8> {
    let model = load_system(&a.system)?;
    let spec = load_formula(&a.formula)?;
    let mut opts = PrecomputeOptions::new(a.eps.clone()).with_parallelism(par);
    opts.entry_limit = a.ceiling;
    eprintln!(
        "config: system={} formula={} eps={} mode={:?} ceiling={} parallel={}",
        a.system,
        a.formula.display(),
        a.eps,
        a.mode.modes(),
        a.ceiling,
        par.is_parallel()
    );
    eprintln!("formula: {spec}");
    for mode in a.mode.modes() {
        let started = Instant::now();
        let (table, stats) = compute_tables(&model, &spec, mode, &opts)?;
        let path = if a.mode == ModeArg::Both {
            mode_path(&a.out, mode)
        } else {
            a.out.clone()
        };
        table.save(&path)?;
        let initial = table.entry(0, spec.all())?;
        println!(
            "{mode}: {} entries, {} boxes, initial volume {:.6}, discarded volume {:.6e}, {:.2}s -> {}",
            stats.entries,
            stats.boxes,
            initial.volume(),
            stats.reach.discarded_volume,
            started.elapsed().as_secs_f64(),
            path.display()
        );
        if mode == Mode::Feasible && initial.is_empty() {
            println!("warning: entry (0, {}) is empty; no initial state can meet the formula", spec.all());
        }
        for (k, set, s) in table.entries() {
            info!("({k}, {set}): {} boxes, volume {:.6}", s.len(), s.volume());
        }
    }
    Ok(0)
}

fn monitor(a: MonitorArgs) -> anyhow::Result<u8> {
    let spec = load_formula(&a.formula)?;
    let feasible = SetTable::load(&a.table)?;
    let satisfiable = a.satisfiable.as_ref().map(SetTable::load).transpose()?;
    if let Some(s) = &a.system {
        let model = load_system(s)?;
        for t in std::iter::once(&feasible).chain(satisfiable.as_ref()) {
            for w in t.digest_mismatches(&spec, &model) {
                eprintln!("warning: {w}");
            }
        }
    }
    let mut m = Monitor::new(&spec, &feasible, satisfiable.as_ref())?;

    let input: Box<dyn io::Read> = if a.trace == "-" {
        Box::new(io::stdin().lock())
    } else {
        Box::new(fs::File::open(&a.trace).with_context(|| format!("opening {}", a.trace))?)
    };
    let reader = TraceReader::new(input)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut last = None;
    for row in reader {
        let (k, x) = row?;
        if k != m.instant() {
            bail!(Error::Trace {
                row: k + 2,
                message: format!("expected instant {}, found {k}", m.instant()),
            });
        }
        let v = m.step(&x)?;
        if a.json {
            writeln!(out, "{}", serde_json::to_string(&v)?)?;
        } else {
            writeln!(out, "{v}")?;
        }
        out.flush()?;
        last = Some(v.verdict);
        if v.verdict.is_terminal() {
            break;
        }
    }
    Ok(match last {
        Some(VerdictKind::Completed | VerdictKind::SatisfiedGuaranteed) => 0,
        Some(VerdictKind::Violated) => 1,
        Some(VerdictKind::Feasible) | None => 4,
    })
}

fn simulate(mut a: SimulateArgs) -> anyhow::Result<u8> {
    let model = load_system(&a.system)?;
    eprintln!(
        "config: system={} x0={:?} steps={} controller={:?}",
        a.system, a.x0, a.steps, a.controller
    );
    let trace = model.simulate(&a.x0, &mut a.controller, a.steps)?;
    match &a.out {
        Some(p) => trace.save_csv(p)?,
        None => trace.write_csv(io::stdout().lock())?,
    }
    Ok(0)
}

fn export(a: ExportArgs) -> anyhow::Result<u8> {
    let table = SetTable::load(&a.table)?;
    let entry = table.entry(a.k, a.set)?;
    let n = entry.dim();
    if a.dims.is_empty() || a.dims.len() > 2 {
        bail!(Error::Config("--dims takes one or two dimensions".into()));
    }
    if let Some(&d) = a.dims.iter().find(|&&d| d >= n) {
        bail!(Error::Config(format!("dimension {d} out of range for a {n}-D table")));
    }
    let rects: Vec<Aabb> = entry.boxes().iter().map(|b| b.project(&a.dims)).collect();
    let file = fs::File::create(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    let mut w = BufWriter::new(file);
    match a.format {
        ExportFormat::Csv => write_csv(&mut w, &a.dims, &rects)?,
        ExportFormat::Svg => write_svg(&mut w, &rects)?,
    }
    w.flush()?;
    println!("{} rectangles -> {}", rects.len(), a.out.display());
    Ok(0)
}

fn write_csv(w: &mut impl Write, dims: &[usize], rects: &[Aabb]) -> io::Result<()> {
    let header: Vec<String> = dims.iter().flat_map(|d| [format!("x{d}_lo"), format!("x{d}_hi")]).collect();
    writeln!(w, "{}", header.join(","))?;
    for r in rects {
        let row: Vec<String> = r
            .intervals()
            .iter()
            .flat_map(|iv| [iv.lo.to_string(), iv.hi.to_string()])
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn write_svg(w: &mut impl Write, rects: &[Aabb]) -> io::Result<()> {
    let bound = rects.iter().skip(1).fold(rects.first().cloned(), |acc, r| acc.map(|a| a.hull(r)));
    let span = |r: &Aabb, d: usize| {
        if d < r.dim() {
            (r.interval(d).lo, r.interval(d).hi)
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1, y0, y1) = match &bound {
        Some(b) => {
            let (x0, x1) = span(b, 0);
            let (y0, y1) = span(b, 1);
            (x0, x1, y0, y1)
        }
        None => (0.0, 1.0, 0.0, 1.0),
    };
    let (wx, wy) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {} {wx} {wy}" width="600" height="{}">"#,
        -y1,
        (600.0 * wy / wx).clamp(60.0, 2400.0)
    )?;
    for r in rects {
        let (a, b) = span(r, 0);
        let (c, d) = span(r, 1);
        writeln!(
            w,
            r#"  <rect x="{a}" y="{}" width="{}" height="{}" fill="steelblue" fill-opacity="0.5"/>"#,
            -d,
            b - a,
            d - c
        )?;
    }
    writeln!(w, "</svg>")
}

fn oracle(a: OracleArgs, par: Parallelism) -> anyhow::Result<u8> {
    let model = load_system(&a.system)?;
    let spec = load_formula(&a.formula)?;
    let mut opts = GridOptions::new(a.cell.clone());
    opts.input_step = a.input_step.clone();
    opts.limit = a.limit;
    opts.parallelism = par;
    eprintln!(
        "config: system={} formula={} cell={} input_step={:?} limit={}",
        a.system,
        a.formula.display(),
        a.cell,
        a.input_step.as_ref().map(ToString::to_string),
        a.limit
    );
    let sys = GridSystem::new(&model, spec.horizon(), opts)?;
    println!("grid: {:?} cells", sys.grid().shape());

    let compared = a.compare.as_ref().map(SetTable::load).transpose()?;
    let mut modes = a.mode.modes();
    if let Some(t) = &compared {
        if !modes.contains(&t.mode()) {
            modes.push(t.mode());
        }
    }
    for mode in modes {
        let cells = sys.cell_sets(&spec, mode)?;
        if let Some(out) = &a.out {
            let path = if a.mode == ModeArg::Both { mode_path(out, mode) } else { out.clone() };
            sys.table(&spec, mode)?.save(&path)?;
            println!("{mode} grid table -> {}", path.display());
        }
        if let Some(t) = compared.as_ref().filter(|t| t.mode() == mode) {
            let report = compare(sys.grid(), t, &cells)?;
            println!("# {}", report.note);
            println!("k,I,table_cells,oracle_cells,table_not_in_oracle,oracle_not_in_table,table_to_oracle,oracle_to_table");
            let show = |d: Option<usize>| d.map_or("inf".to_string(), |d| d.to_string());
            for e in &report.entries {
                println!(
                    "{},\"{}\",{},{},{},{},{},{}",
                    e.k,
                    e.set,
                    e.table_cells,
                    e.oracle_cells,
                    e.table_not_in_oracle,
                    e.oracle_not_in_table,
                    show(e.table_to_oracle),
                    show(e.oracle_to_table)
                );
            }
            println!("table cells outside the oracle sets: {}", report.violations());
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_name_goes_before_the_extension() {
        let f = |s: &str| mode_path(Path::new(s), Mode::Feasible).display().to_string();
        assert_eq!(f("/tmp/di0.5.json"), "/tmp/di0.5.feasible.json");
        assert_eq!(f("t.json.gz"), "t.feasible.json.gz");
        assert_eq!(f("tables"), "tables.feasible");
    }
}
