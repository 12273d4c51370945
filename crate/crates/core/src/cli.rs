//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error |
//! | 2 | data or validation error |
//! | 3 | numeric failure (depletion, non-convergence, domain) |
//!
//! With `--json`, errors are written to stderr as one JSON object.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::atlas::{disaggregate_curve, reaggregate, ProxyWeights, RegionSet};
use crate::curveset::{sample, tabulate, Bound, CompositeCurve, TabulatedCurve, DEFAULT_GRID_POINTS};
use crate::distcore::DistributionKind;
use crate::error::Error;
use crate::fitter::{augment_with, fit_with, FitOptions, FitPoint, SATURATION_MULTIPLIER};
use crate::ingest::{build_all, BuildConfig, Database, Resource, GLOBAL};
use crate::ledger::LedgerState;

/// Environment variable naming the default data directory.
pub const DATA_ENV: &str = "RESCURVE_DATA";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rescurve", version, about = "Cost-supply curves for energy resources")]
struct Cli {
    /// Write errors to stderr as JSON and results to stdout as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the envelope database from a data directory.
    Build(BuildArgs),
    /// Marginal cost at a quantity, or quantity available at a cost.
    Eval(EvalArgs),
    /// Fit a distribution to (cost, cumulative quantity) points.
    Fit(FitArgs),
    /// Sum regional curves into other region groupings.
    Aggregate(AggregateArgs),
    /// Draw curves from resource envelopes.
    Sample(SampleArgs),
    /// Run a depletion ledger over a demand trajectory.
    Deplete(DepleteArgs),
    /// Write tabulated curves as CSV.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct Source {
    /// Data directory [default: $RESCURVE_DATA or the bundled tables].
    #[arg(long)]
    data: Option<PathBuf>,
    /// Database written by `build`; used instead of rebuilding from data.
    #[arg(long, conflicts_with = "data")]
    db: Option<PathBuf>,
    /// Configuration file of `key = value` overrides.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the build report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Selection {
    #[arg(long)]
    resource: Resource,
    #[arg(long, default_value = GLOBAL)]
    region: String,
    #[arg(long, default_value = "mode")]
    bound: Bound,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    sel: Selection,
    #[arg(long, conflicts_with = "at_cost", required_unless_present = "at_cost")]
    at_quantity: Option<f64>,
    #[arg(long)]
    at_cost: Option<f64>,
    /// Grid points used to invert the curve.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    kind: DistributionKind,
    /// CSV with columns `cost,quantity` (units in brackets allowed).
    #[arg(long)]
    points: PathBuf,
    /// Add the zero anchor and the saturation point before fitting.
    #[arg(long)]
    augment: bool,
    #[arg(long, default_value_t = 0.0)]
    a_hint: f64,
    #[arg(long, default_value_t = SATURATION_MULTIPLIER)]
    multiplier: f64,
    /// Weight residuals by the observed quantity.
    #[arg(long)]
    relative: bool,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    #[command(flatten)]
    source: Source,
    /// CSV `region,country` of the target grouping. Members may be countries
    /// or database region names.
    #[arg(long)]
    regions: PathBuf,
    /// CSV `country,weight` used to split database regions among countries
    /// [default: equal weights].
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    resource: Resource,
    #[arg(long, default_value = "mode")]
    bound: Bound,
    /// Directory for one tabulated CSV per target region.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to one resource [default: all].
    #[arg(long)]
    resource: Option<Resource>,
    #[arg(long, default_value = GLOBAL)]
    region: String,
    /// Directory for the sampled curves as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
}

#[derive(Debug, Args)]
struct DepleteArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    sel: Selection,
    /// CSV `period,quantity`: use in each period, in the curve's quantity
    /// unit. Negative quantities retire deployed flow.
    #[arg(long)]
    traj: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    resource: Option<Resource>,
    #[arg(long)]
    region: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
    NotConverged(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::NotConverged(_) => EXIT_NUMERIC,
            CliError::Lib(e) => exit_code(e),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::NotConverged(_) => "NotConverged",
            CliError::Lib(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::NotConverged(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Depletion { .. } => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

type CliResult = std::result::Result<(), CliError>;

/// Runs one command line. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let json = cli.json;
    let result = match cli.command {
        Command::Build(a) => cmd_build(a, json, out, err),
        Command::Eval(a) => cmd_eval(a, json, out),
        Command::Fit(a) => cmd_fit(a, out),
        Command::Aggregate(a) => cmd_aggregate(a, json, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Deplete(a) => cmd_deplete(a, out),
        Command::Export(a) => cmd_export(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if json {
                let body = serde_json::json!({
                    "error": e.kind(),
                    "message": e.message(),
                    "exit_code": e.code(),
                });
                let _ = writeln!(err, "{body}");
            } else {
                let _ = writeln!(err, "error: {}", e.message());
            }
            e.code()
        }
    }
}

/// `--data`, then `$RESCURVE_DATA`, then the tables shipped with the crate.
pub fn data_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(DATA_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"),
    }
}

fn load_config(path: Option<&Path>) -> Result<BuildConfig, CliError> {
    Ok(match path {
        Some(p) => BuildConfig::from_file(p)?,
        None => BuildConfig::default(),
    })
}

fn load_db(src: &Source) -> Result<Database, CliError> {
    if let Some(db) = &src.db {
        return Ok(Database::read_json(db)?);
    }
    let cfg = load_config(src.config.as_deref())?;
    Ok(build_all(&data_dir(src.data.as_deref()), &cfg)?.0)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> CliResult {
    let s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn cmd_build(a: BuildArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let cfg = load_config(a.config.as_deref())?;
    let (db, report) = build_all(&data_dir(a.data.as_deref()), &cfg)?;
    write_atomic(&a.out, db.to_json()?.as_bytes())?;
    if let Some(p) = &a.report {
        write_atomic(p, report.to_json().map_err(Error::from)?.as_bytes())?;
    }
    if json {
        print_json(out, &report)?;
    } else {
        write!(out, "{}", report.render())?;
    }
    writeln!(err, "wrote {}", a.out.display())?;
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    resource: Resource,
    region: &'a str,
    bound: Bound,
    cost: f64,
    quantity: f64,
    cost_unit: &'a str,
    quantity_unit: &'a str,
}

fn cmd_eval(a: EvalArgs, json: bool, out: &mut dyn Write) -> CliResult {
    let db = load_db(&a.source)?;
    let curve = db.curve(a.sel.resource, &a.sel.region, a.sel.bound)?;
    let (cost, quantity) = match (a.at_quantity, a.at_cost) {
        (Some(q), None) => {
            let table = curve.tabulate_default(a.grid)?;
            (table.invert(q)?, q)
        }
        (None, Some(c)) => (c, curve.cumulative(c)),
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --at-quantity and --at-cost".into(),
            ))
        }
    };
    if json {
        print_json(
            out,
            &EvalOutput {
                resource: a.sel.resource,
                region: &a.sel.region,
                bound: a.sel.bound,
                cost,
                quantity,
                cost_unit: &curve.units.cost,
                quantity_unit: &curve.units.quantity,
            },
        )
    } else if a.at_quantity.is_some() {
        writeln!(out, "{cost} {}", curve.units.cost)?;
        Ok(())
    } else {
        writeln!(out, "{quantity} {}", curve.units.quantity)?;
        Ok(())
    }
}

/// Reads `cost,quantity` points; header names may carry `[unit]` suffixes.
pub fn read_points(path: &Path) -> crate::error::Result<Vec<FitPoint>> {
    let source = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let headers: Vec<String> = rd
        .headers()
        .map_err(|e| Error::parse(&source, 1, e.to_string()))?
        .iter()
        .map(|h| h.split('[').next().unwrap_or("").trim().to_ascii_lowercase())
        .collect();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(&source, 1, format!("missing column '{name}'")))
    };
    let (ci, ni) = (col("cost")?, col("quantity")?);
    let mut pts = Vec::new();
    for rec in rd.records() {
        let rec =
            rec.map_err(|e| Error::parse(&source, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> crate::error::Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(&source, row, format!("'{s}' is not a number")))
        };
        pts.push(FitPoint::new(num(ci)?, num(ni)?));
    }
    Ok(pts)
}

fn cmd_fit(a: FitArgs, out: &mut dyn Write) -> CliResult {
    let mut pts = read_points(&a.points)?;
    if a.augment {
        pts = augment_with(&pts, a.a_hint, a.multiplier)?;
    }
    let opts = FitOptions {
        relative: a.relative,
        ..FitOptions::default()
    };
    let res = fit_with(a.kind, &pts, &opts)?;
    print_json(out, &res)?;
    if !res.converged {
        return Err(CliError::NotConverged(format!(
            "fit stopped after {} iterations without meeting the tolerance",
            res.iterations
        )));
    }
    Ok(())
}

fn cmd_aggregate(a: AggregateArgs, json: bool, out: &mut dyn Write) -> CliResult {
    let db = load_db(&a.source)?;
    let target = RegionSet::from_file(&a.regions)?;
    let rc = db.get(a.resource)?;
    let regional: BTreeMap<String, CompositeCurve> = rc
        .regions
        .iter()
        .map(|(g, env)| (g.clone(), env.curve(a.bound).clone()))
        .collect();
    let members_are_regions = target.countries().all(|m| regional.contains_key(m));
    let parts = if members_are_regions {
        regional
    } else {
        let dir = data_dir(a.source.data.as_deref());
        let shipped = RegionSet::from_file(&dir.join("regions.csv"))?;
        let weights = match &a.weights {
            Some(p) => ProxyWeights::from_file(p)?,
            None => ProxyWeights::equal(shipped.countries()),
        };
        let mut countries = BTreeMap::new();
        for def in &shipped.regions {
            let Some(curve) = regional.get(&def.name) else { continue };
            let w = weights.restricted(&def.members);
            if w.weights.is_empty() || !(w.total() > 0.0) {
                if curve.is_empty() {
                    continue;
                }
                return Err(Error::Weight(format!("no positive weights for members of {}", def.name)).into());
            }
            countries.extend(disaggregate_curve(curve, &w)?);
        }
        countries
    };
    let grouped = reaggregate(&parts, &target)?;
    #[derive(Serialize)]
    struct Row<'a> {
        region: &'a str,
        potential: f64,
        min_cost: Option<f64>,
        quantity_unit: &'a str,
    }
    let rows: Vec<Row> = grouped
        .iter()
        .map(|(g, c)| Row {
            region: g,
            potential: c.potential(),
            min_cost: c.min_c0(),
            quantity_unit: &rc.units.quantity,
        })
        .collect();
    if json {
        print_json(out, &rows)?;
    } else {
        writeln!(
            out,
            "region,potential [{}],min_cost [{}]",
            rc.units.quantity, rc.units.cost
        )?;
        for r in &rows {
            let mc = r.min_cost.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{}", csv_field(r.region), r.potential, mc)?;
        }
    }
    if let Some(dir) = &a.out {
        for (g, c) in &grouped {
            if !c.is_empty() {
                let t = c.tabulate_default(a.grid)?;
                write_atomic(&dir.join(format!("{}.csv", file_stem(g))), t.to_csv_string().as_bytes())?;
            }
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// File-name-safe version of a region or resource name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_curve(path: &Path, curve: &CompositeCurve, grid: usize) -> CliResult {
    let table = curve.tabulate_default(grid)?;
    write_atomic(path, table.to_csv_string().as_bytes())?;
    Ok(())
}

fn cmd_sample(a: SampleArgs, out: &mut dyn Write) -> CliResult {
    let db = load_db(&a.source)?;
    let resources: Vec<Resource> = match a.resource {
        Some(r) => vec![r],
        None => Resource::ALL.to_vec(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    writeln!(out, "draw,resource,region,u,total_potential,unit")?;
    for i in 0..a.n {
        for &r in &resources {
            let env = db.envelope(r, &a.region)?;
            let u: f64 = loop {
                let v: f64 = rng.gen();
                if v > 0.0 {
                    break v;
                }
            };
            let curve = sample(env, u)?;
            writeln!(
                out,
                "{i},{r},{},{u},{},{}",
                csv_field(&a.region),
                curve.potential(),
                curve.units.quantity
            )?;
            if let Some(dir) = &a.out {
                if !curve.is_empty() {
                    let name = format!("{r}_{}_draw{i}.csv", file_stem(&a.region));
                    write_curve(&dir.join(name), &curve, a.grid)?;
                }
            }
        }
    }
    Ok(())
}

/// Reads `period,quantity` rows.
pub fn read_trajectory(path: &Path) -> crate::error::Result<Vec<(String, f64)>> {
    let source = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let headers: Vec<String> = rd
        .headers()
        .map_err(|e| Error::parse(&source, 1, e.to_string()))?
        .iter()
        .map(|h| h.split('[').next().unwrap_or("").trim().to_ascii_lowercase())
        .collect();
    if headers.len() != 2 || headers[0] != "period" || headers[1] != "quantity" {
        return Err(Error::parse(&source, 1, "expected columns period,quantity"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec =
            rec.map_err(|e| Error::parse(&source, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        let q: f64 = rec[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(&source, row, format!("'{}' is not a number", &rec[1])))?;
        rows.push((rec[0].to_string(), q));
    }
    Ok(rows)
}

fn cmd_deplete(a: DepleteArgs, out: &mut dyn Write) -> CliResult {
    let db = load_db(&a.source)?;
    let traj = read_trajectory(&a.traj)?;
    let rc = db.get(a.sel.resource)?;
    let curve = db.curve(a.sel.resource, &a.sel.region, a.sel.bound)?;
    let id = format!("{} {}", a.sel.region, a.sel.bound);
    let mut state = LedgerState::new(a.sel.resource.as_str(), id, rc.nature, curve, a.grid)?;
    let u = &rc.units;
    writeln!(
        out,
        "period,quantity [{q}],cumulative [{q}],average_cost [{c}],marginal_cost [{c}],remaining [{q}]",
        q = u.quantity,
        c = u.cost
    )?;
    for (period, dq) in traj {
        let average = if dq >= 0.0 {
            let (next, avg) = state.consume(dq)?;
            state = next;
            Some(avg)
        } else {
            state = state.release(-dq)?;
            None
        };
        let marginal = match state.marginal_cost() {
            Ok(c) => c.to_string(),
            Err(Error::Depletion { .. }) => "inf".into(),
            Err(e) => return Err(e.into()),
        };
        writeln!(
            out,
            "{},{dq},{},{},{marginal},{}",
            csv_field(&period),
            state.q(),
            average.map(|v| v.to_string()).unwrap_or_default(),
            state.remaining()
        )?;
    }
    Ok(())
}

fn cmd_export(a: ExportArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let db = load_db(&a.source)?;
    let resources: Vec<Resource> = match a.resource {
        Some(r) => vec![r],
        None => Resource::ALL.to_vec(),
    };
    let mut written = 0;
    for r in resources {
        let rc = db.get(r)?;
        let mut regions: Vec<&str> = vec![GLOBAL];
        regions.extend(rc.regions.keys().map(String::as_str));
        if let Some(only) = &a.region {
            regions.retain(|g| g.eq_ignore_ascii_case(only));
            if regions.is_empty() {
                return Err(Error::Validation(format!("no {r} envelope for region '{only}'")).into());
            }
        }
        for g in regions {
            let env = rc.envelope(g).expect("region listed from the database");
            let range = env.default_range();
            for b in Bound::ALL {
                let curve = env.curve(b);
                let path = a.out.join(r.as_str()).join(format!("{}_{b}.csv", file_stem(g)));
                let Some((lo, hi)) = range.filter(|_| !curve.is_empty()) else {
                    writeln!(err, "skipped {}: empty curve", path.display())?;
                    continue;
                };
                let table: TabulatedCurve = tabulate(curve, lo, hi, a.grid)?;
                write_atomic(&path, table.to_csv_string().as_bytes())?;
                written += 1;
            }
        }
    }
    writeln!(out, "wrote {written} files to {}", a.out.display())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["rescurve", "frobnicate"]).0, EXIT_USAGE);
        assert_eq!(
            run_args(&["rescurve", "eval", "--resource", "hydro", "--bogus"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            run_args(&["rescurve", "eval", "--resource", "peat", "--at-cost", "1"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_args(&["rescurve", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn json_errors() {
        let (code, _, err) = run_args(&[
            "rescurve",
            "--json",
            "fit",
            "--kind",
            "h",
            "--points",
            "/nonexistent.csv",
        ]);
        assert_eq!(code, EXIT_DATA);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "MissingFile");
        assert_eq!(v["exit_code"], 2);
    }

    #[test]
    fn file_stems() {
        assert_eq!(file_stem("Rest Europe"), "Rest_Europe");
        assert_eq!(file_stem("EU-15"), "EU-15");
    }
}
