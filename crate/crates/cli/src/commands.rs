//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use hcsdr::init::parse_direction;
use hcsdr::realdata::{evaluate_real, RealDataReport};
use hcsdr::sim::{fmt17, run_experiment, ExpParam};
use hcsdr::{fit_direction, Dataset, FitResult, Initializer, SeedSpec, UnitDirection};
use rand::Rng;

use crate::config::Config;
use crate::failure::{Failure, OrFail, Outcome};
use crate::input::{read_table, Table};
use crate::manifest::RunManifest;
use crate::{Cli, Command, FitArgs, RealArgs, SimulateArgs};

/// Runs `cli`. `argv` is recorded in the manifest; `snapshot` replaces the
/// defaults and config file when replaying.
pub fn run(cli: Cli, argv: Vec<String>, snapshot: Option<Config>) -> Outcome<()> {
    let mut cfg = match (snapshot, &cli.config) {
        (Some(c), _) => c,
        (None, Some(path)) => Config::load(path).or_usage()?,
        (None, None) => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .or_data()?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::usage(anyhow!("--threads must be at least 1")));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Failure::usage(anyhow!(e)))?;

    let started = Instant::now();
    let name = command_name(&cli.command);
    let out = cli.out.clone();
    let (manifest_cfg, inputs, outputs) = match cli.command {
        Command::Fit(args) => fit(args, cfg, out.as_deref())?,
        Command::Simulate(args) => pool.install(|| simulate(args, cfg, out.as_deref()))?,
        Command::Real(args) => pool.install(|| real(args, cfg, out.as_deref()))?,
        Command::ShowConfig => show_config(cfg, out.as_deref())?,
        Command::Replay(args) => return replay(&args.manifest, out),
    };
    if let Some(dir) = out {
        let mut m = RunManifest::new(name, argv, &manifest_cfg);
        m.inputs = inputs;
        m.outputs = outputs;
        m.wall_clock_secs = started.elapsed().as_secs_f64();
        let path = m.write(&dir).or_data()?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fit(_) => "fit",
        Command::Simulate(_) => "simulate",
        Command::Real(_) => "real",
        Command::ShowConfig => "show-config",
        Command::Replay(_) => "replay",
    }
}

type Produced = (Config, Vec<PathBuf>, Vec<PathBuf>);

fn write_output(dir: &Path, name: &str, text: &str) -> Outcome<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display())).or_data()?;
    Ok(path)
}

fn replay(manifest: &Path, out: Option<PathBuf>) -> Outcome<()> {
    let m = RunManifest::read(manifest).or_usage()?;
    let mut argv = vec!["hcsdr".to_string()];
    argv.extend(m.argv.iter().cloned());
    let mut cli = <Cli as clap::Parser>::try_parse_from(&argv).map_err(|e| Failure::usage(anyhow!("{e}")))?;
    if let Command::Replay(_) = cli.command {
        return Err(Failure::usage(anyhow!("a replay manifest cannot be replayed")));
    }
    if out.is_some() {
        cli.out = out;
    }
    run(cli, m.argv, Some(m.config))
}

fn show_config(cfg: Config, out: Option<&Path>) -> Outcome<Produced> {
    let text = cfg.to_toml();
    print!("{text}");
    let mut outputs = Vec::new();
    if let Some(dir) = out {
        outputs.push(write_output(dir, "config.toml", &text)?);
    }
    Ok((cfg, Vec::new(), outputs))
}

/// Splits `table` into predictors and the response column.
fn to_dataset(table: &Table, target: &str) -> Outcome<(Dataset, Vec<String>)> {
    let t = table.column_index(target).or_data()?;
    let names: Vec<String> = table.columns.iter().enumerate().filter(|(j, _)| *j != t).map(|(_, c)| c.clone()).collect();
    let mut x = Vec::with_capacity(table.rows.len() * names.len());
    let mut y = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        x.extend(row.iter().enumerate().filter(|(j, _)| *j != t).map(|(_, v)| *v));
        y.push(row[t]);
    }
    Ok((Dataset::from_row_major(x, names.len(), y)?, names))
}

/// Adds `scale * sd_j * U(-1/2, 1/2)` to every entry of column `j`.
fn jitter(table: &mut Table, scale: f64, seed: SeedSpec) -> Outcome<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Failure::usage(anyhow!("--jitter must be a positive number")));
    }
    let mut rng = seed.rng();
    for j in 0..table.columns.len() {
        let col: Vec<f64> = table.rows.iter().map(|r| r[j]).collect();
        let (_, sd) = hcsdr::sim::mean_sd(&col);
        for row in &mut table.rows {
            row[j] += scale * sd * (rng.random::<f64>() - 0.5);
        }
    }
    Ok(())
}

fn parse_init(spec: &str, p: usize) -> Outcome<(Initializer, Option<f64>)> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}")).or_data()?;
        let v = parse_direction(&text)?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dir = UnitDirection::new(v)?;
        if dir.p() != p {
            return Err(Failure::data(anyhow!("{path} has {} coordinates, data has {p} predictors", dir.p())));
        }
        return Ok((Initializer::Given(dir), Some(norm)));
    }
    let tag: hcsdr::InitTag = spec.parse()?;
    let init: Option<Initializer> = tag.into();
    let init = init.ok_or_else(|| Failure::usage(anyhow!("use --init file:<path> for a given direction")))?;
    Ok((init, None))
}

fn fit(args: FitArgs, mut cfg: Config, out: Option<&Path>) -> Outcome<Produced> {
    if let Some(r) = args.restarts {
        cfg.fit.restarts = r;
    }
    if args.slices.is_some() {
        cfg.fit.slices = args.slices;
    }
    cfg.fit.validate()?;
    let mut table = read_table(&args.data, &args.drop).or_data()?;
    if let Some(scale) = args.jitter {
        jitter(&mut table, scale, SeedSpec::new(cfg.seed, 1))?;
    }
    let target = match &args.target {
        Some(t) => t.clone(),
        None => table.columns.last().cloned().ok_or_else(|| Failure::data(anyhow!("no columns")))?,
    };
    let (data, names) = to_dataset(&table, &target)?;
    let (init, given_norm) = parse_init(&args.init, data.p())?;
    let result = fit_direction(&data, &init, &cfg.fit, SeedSpec::new(cfg.seed, 0))?;
    print!("{}", fit_report(&result, &names, &target, data.n(), given_norm));

    let mut outputs = Vec::new();
    if let Some(dir) = out {
        let direction: String = result.direction.as_slice().iter().map(|v| fmt17(*v) + "\n").collect();
        outputs.push(write_output(dir, "direction.txt", &direction)?);
        let json = serde_json::to_string_pretty(&result).or_data()? + "\n";
        outputs.push(write_output(dir, "fit.json", &json)?);
    }
    Ok((cfg, vec![args.data], outputs))
}

fn fit_report(r: &FitResult, names: &[String], target: &str, n: usize, given_norm: Option<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "response     {target}");
    let _ = writeln!(s, "observations {n}");
    let _ = writeln!(s, "initializer  {}", r.initializer.label());
    if let Some(norm) = given_norm {
        if (norm - 1.0).abs() > 1e-10 {
            let _ = writeln!(s, "note         starting vector had norm {norm:.6}; renormalized");
        }
    }
    let _ = writeln!(s, "hellinger    {:.4}", r.hellinger);
    let _ = writeln!(s, "affinity     {:.4}", r.bhattacharyya);
    let _ = writeln!(s, "evaluations  {}", r.evaluations);
    let _ = writeln!(s, "\nstage      hellinger  affinity(raw)");
    for st in &r.stage_trace {
        let _ = writeln!(s, "{:<9} {:>10.4} {:>14.4}", st.stage, st.hellinger, st.affinity_raw);
    }
    let width = names.iter().map(String::len).max().unwrap_or(0).max(9);
    let _ = writeln!(s, "\n{:<width$}  direction", "predictor");
    for (name, v) in names.iter().zip(r.direction.as_slice()) {
        let _ = writeln!(s, "{name:<width$}  {v:>9.4}");
    }
    s
}

fn simulate(args: SimulateArgs, mut cfg: Config, out: Option<&Path>) -> Outcome<Produced> {
    let s = &mut cfg.simulate;
    if !args.models.is_empty() {
        s.models = args.models;
    }
    if !args.inits.is_empty() {
        s.inits = args.inits;
    }
    if !args.n.is_empty() {
        s.sample_sizes = args.n;
    }
    if !args.predictors.is_empty() {
        s.predictors = args.predictors;
    }
    if let Some(eta) = args.eta {
        s.eta = eta;
    }
    if args.exp_mean {
        s.exp_param = ExpParam::Mean;
    }
    match (args.quick, args.reps) {
        (true, Some(_)) => return Err(Failure::usage(anyhow!("--quick and --reps are exclusive"))),
        (true, None) => s.replications = 10,
        (false, Some(r)) => s.replications = r,
        (false, None) => {}
    }
    let summary = run_experiment(&cfg.grid())?;
    print!("{}", summary.to_table());
    let mut outputs = Vec::new();
    if let Some(dir) = out {
        outputs.push(write_output(dir, "summary.csv", &summary.to_csv())?);
        outputs.push(write_output(dir, "replications.csv", &summary.records_csv())?);
    }
    Ok((cfg, Vec::new(), outputs))
}

fn real(args: RealArgs, mut cfg: Config, out: Option<&Path>) -> Outcome<Produced> {
    let r = &mut cfg.real;
    if let Some(t) = args.target {
        r.target = t;
    }
    if !args.drop.is_empty() {
        r.drop = args.drop;
    }
    if let Some(n) = args.train_size {
        r.train_size = n;
    }
    if !args.inits.is_empty() {
        r.inits = args.inits;
    }
    if let Some(span) = args.span {
        r.span = span;
    }
    if r.target.is_empty() {
        return Err(Failure::usage(anyhow!("--target is required")));
    }
    let table = read_table(&args.data, &cfg.real.drop).or_data()?;
    table.column_index(&cfg.real.target).or_data()?;
    if cfg.real.train_size >= table.rows.len() {
        return Err(Failure::data(anyhow!(
            "train size {} leaves no test observations out of {}",
            cfg.real.train_size,
            table.rows.len()
        )));
    }
    let rd = hcsdr::realdata::RealDataConfig { drop: Vec::new(), ..cfg.real_data() };
    let report = evaluate_real(&table.columns, &table.rows, &rd)?;
    print!("{}", real_report(&report));
    let mut outputs = Vec::new();
    if let Some(dir) = out {
        let json = serde_json::to_string_pretty(&report).or_data()? + "\n";
        outputs.push(write_output(dir, "report.json", &json)?);
    }
    Ok((cfg, vec![args.data], outputs))
}

fn real_report(r: &RealDataReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "train {}  test {}", r.n_train, r.n_test);
    let _ = writeln!(s, "\n{:<8}{:>10}{:>12}{:>10}{:>12}", "method", "MSE", "MSE-HC", "H", "H-HC");
    for m in &r.methods {
        let _ = writeln!(
            s,
            "{:<8}{:>10.4}{:>12.4}{:>10.4}{:>12.4}",
            m.init.label(),
            m.mse_raw,
            m.mse_hc,
            m.hellinger_raw,
            m.hellinger_hc
        );
    }
    let width = r.predictors.iter().map(String::len).max().unwrap_or(0).max(9);
    let _ = write!(s, "\n{:<width$}", "predictor");
    for m in &r.methods {
        let _ = write!(s, "{:>10}{:>10}", m.init.label(), format!("{}-HC", m.init.label()));
    }
    let _ = writeln!(s);
    for (j, name) in r.predictors.iter().enumerate() {
        let _ = write!(s, "{name:<width$}");
        for m in &r.methods {
            let _ = write!(s, "{:>10.4}{:>10.4}", m.direction_raw.as_slice()[j], m.direction_hc.as_slice()[j]);
        }
        let _ = writeln!(s);
    }
    if r.methods.iter().any(|m| m.fallbacks > 0) {
        let total: usize = r.methods.iter().map(|m| m.fallbacks).sum();
        let _ = writeln!(s, "\n{total} test predictions fell back to a local mean");
    }
    s
}
