use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use caplab::config::Scenario;
use caplab::io;
use caplab::runner::{self, Outcome};
use caplab_core::analysis::{wirtinger_real, Rank, DEFAULT_MARGIN};
use caplab_core::analytic::AnalyticField;
use caplab_core::fixtures::{list_fixtures, Fixture};
use caplab_core::geometry::{boundary_values, rasterize, BoundaryMap, CapacitorSpec, Curve, GridSpec};
use caplab_core::laplace::{solve_complex, solve_dirichlet};
use caplab_core::levelset::{build_graph, component_through, structure_checks, trace_level};
use caplab_core::plaplace::{solve_p_dirichlet, PharmonicConfig};
use caplab_core::{ComplexField, Point, ScalarField, C64};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "caplab", version, about = "Harmonic and p-harmonic capacitor laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run scenario files and write field.csv, report.json, contours.json, critical.json.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory (one subdirectory per scenario when several are given).
        #[arg(long, default_value = "caplab-out")]
        out: PathBuf,
        /// Override the grid size of every scenario.
        #[arg(long)]
        grid: Option<usize>,
        /// Scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List the built-in fixtures, or print one as geometry JSON.
    Fixtures {
        /// Fixture (`name` or `name:k=v,...`) to print as geometry JSON.
        #[arg(long)]
        json: Option<String>,
    },
    /// Solve (or evaluate in closed form) a fixture and write its field CSV.
    DumpField {
        fixture: String,
        #[arg(long, default_value_t = 129)]
        grid: usize,
        /// Evaluate the closed-form field instead of solving.
        #[arg(long)]
        analytic: bool,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the level-set component through a seed and write contour JSON.
    Trace {
        /// A fixture, or `saddle:m=K` for Re(z^K) on the unit disk.
        field: String,
        /// Seed point `x,y`.
        #[arg(long, value_parser = parse_point, default_value = "0,0")]
        seed: Point,
        /// Level (defaults to the field value at the seed).
        #[arg(long, allow_hyphen_values = true)]
        level: Option<f64>,
        #[arg(long, default_value_t = 129)]
        grid: usize,
        #[arg(long)]
        analytic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
    Ok(Point::new(f(x)?, f(y)?))
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => print_out(text),
    }
}

/// Writes to stdout; a closed pipe (`caplab ... | head`) is not an error.
fn print_out(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn summarize(o: &Outcome) -> String {
    use std::fmt::Write;
    let r = &o.report;
    let verdict = if r.passed { "PASS" } else { "FAIL" };
    let mut s = format!("{}: {verdict} ({} checks)\n", r.scenario, r.checks.len());
    for c in r.checks.iter().filter(|c| !c.passed) {
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:e}"));
        let _ = writeln!(
            s,
            "  FAIL {}: measured {} {} {}{}",
            c.name,
            num(c.measured),
            c.relation,
            num(c.threshold),
            c.detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    s
}

fn run_cmd(configs: Vec<PathBuf>, out: PathBuf, grid: Option<usize>, jobs: usize) -> anyhow::Result<bool> {
    let mut scenarios = Vec::new();
    for path in &configs {
        let mut sc = Scenario::load(path)?;
        if let Some(n) = grid {
            sc.grid.n = n;
        }
        scenarios.push(sc.resolve()?);
    }
    let single = scenarios.len() == 1;
    let mut names = std::collections::BTreeSet::new();
    for sc in &scenarios {
        if !names.insert(sc.name.clone()) {
            bail!("duplicate scenario name '{}'", sc.name);
        }
    }
    let jobs = jobs.max(1);
    let results: Vec<anyhow::Result<Outcome>> = if jobs == 1 {
        scenarios.iter().map(|sc| Ok(runner::run(sc)?)).collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<anyhow::Result<Outcome>>>> = scenarios.iter().map(|_| Default::default()).collect();
        std::thread::scope(|s| {
            for _ in 0..jobs.min(scenarios.len()) {
                s.spawn(|| loop {
                    let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if k >= scenarios.len() {
                        break;
                    }
                    let r = runner::run(&scenarios[k]).map_err(anyhow::Error::from);
                    *slots[k].lock().expect("result slot") = Some(r);
                });
            }
        });
        slots.into_iter().map(|m| m.into_inner().expect("result slot").expect("every scenario ran")).collect()
    };
    let mut all = true;
    for (sc, r) in scenarios.iter().zip(results) {
        let o = r.with_context(|| format!("scenario '{}'", sc.name))?;
        let dir = if single { out.clone() } else { out.join(&sc.name) };
        o.write(&dir)?;
        print_out(&summarize(&o))?;
        all &= o.passed();
    }
    Ok(all)
}

/// Solved (or closed-form) real or complex field of a fixture.
fn fixture_field(f: &Fixture, n: usize, analytic: bool) -> anyhow::Result<(CapacitorSpec, ComplexField, Option<ScalarField>)> {
    let spec = f.spec()?;
    let mask = Arc::new(rasterize(&spec, &f.grid(n)?)?);
    if analytic {
        let a = f.analytic().with_context(|| format!("{} has no closed form", f.name()))?;
        let w = ComplexField::try_from_fn(mask, |p| a.eval(p.to_complex()).map(|v| v.value))?;
        let s = f.is_real().then(|| w.re());
        return Ok((spec, w, s));
    }
    let data = boundary_values(&spec, mask)?;
    if let Some(p) = f.p() {
        let (u, _) = solve_p_dirichlet(&data.re(), &PharmonicConfig::new(p)?)?;
        return Ok((spec, u.to_complex(), Some(u)));
    }
    if f.is_real() {
        let (u, _) = solve_dirichlet(&data.re())?;
        return Ok((spec, u.to_complex(), Some(u)));
    }
    let (w, _) = solve_complex(&data)?;
    Ok((spec, w, None))
}

fn trace_cmd(field: &str, seed: Point, level: Option<f64>, n: usize, analytic: bool, out: &Option<PathBuf>) -> anyhow::Result<bool> {
    let (u, holes, two_constant): (ScalarField, Vec<Point>, bool) = if let Some(rest) = field.strip_prefix("saddle") {
        let m: u32 = match rest.trim_start_matches(':').split_once('=') {
            Some(("m", v)) => v.trim().parse().context("saddle order")?,
            None if rest.is_empty() => 2,
            _ => bail!("expected saddle:m=K"),
        };
        let a = AnalyticField::saddle(m)?;
        let spec = CapacitorSpec::new(Curve::circle(Point::default(), 1.0, 1024)?, vec![], vec![], BoundaryMap::constant(C64::new(0.0, 0.0)))?;
        let mask = Arc::new(rasterize(&spec, &GridSpec::square(0.0, 0.0, 1.1, n)?)?);
        let u = ScalarField::try_from_fn(mask, |p| a.eval(p.to_complex()).map(|v| v.value.re))?;
        (u, vec![], false)
    } else {
        let f = Fixture::parse(field)?;
        let (spec, _, s) = fixture_field(&f, n, analytic)?;
        let u = s.with_context(|| format!("{} is complex; trace needs a real field", f.name()))?;
        let holes = spec.holes.iter().map(|c| c.interior_point()).collect();
        (u, holes, f.is_two_constant())
    };
    let rep = runner::critical_report(&wirtinger_real(&u), u.mask(), DEFAULT_MARGIN)?;
    let critical: Vec<Point> = rep.rank(Rank::Zero).map(|c| c.location).collect();
    let level = match level {
        Some(l) => l,
        None => u.interpolate(seed).context("seed outside the traced region")?,
    };
    let soup = trace_level(&u, level);
    let comp = component_through(&soup, seed, &critical, u.mask())?;
    let graph = build_graph(&comp, u.mask(), &holes);
    let h = u.grid().h();
    let dendrone = two_constant && critical.iter().any(|c| c.dist(seed) <= 2.0 * h);
    let checks = structure_checks(&graph, &comp, dendrone);
    emit(out, &io::to_json(&io::contours(&comp, &graph, &checks)))?;
    Ok(checks.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { configs, out, grid, jobs } => run_cmd(configs, out, grid, jobs),
        Cmd::Fixtures { json } => (|| {
            match json {
                Some(name) => print_out(&io::geometry_json(&Fixture::parse(&name)?.spec()?))?,
                None => {
                    let mut s = String::new();
                    for f in list_fixtures() {
                        s += &format!("{}  {}\n", f.name, f.summary);
                        for p in f.params {
                            s += &format!("    {:<6} default {:<5} {}\n", p.name, p.default, p.doc);
                        }
                    }
                    print_out(&s)?;
                }
            }
            Ok(true)
        })(),
        Cmd::DumpField { fixture, grid, analytic, out } => (|| {
            let f = Fixture::parse(&fixture)?;
            let (_, w, _) = fixture_field(&f, grid, analytic)?;
            emit(&out, &io::field_csv(&w))?;
            Ok(true)
        })(),
        Cmd::Trace { field, seed, level, grid, analytic, out } => trace_cmd(&field, seed, level, grid, analytic, &out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
