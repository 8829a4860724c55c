use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morsehb::circle::{circle_trajectories, signed_count_pos_to_neg, signed_count_same_sign, CircleMorseFunction, LocalType};
use morsehb::complex::{assemble_boundary, parse_complex, verify_d_squared, GradedComplex};
use morsehb::corpus::{corpus_list, corpus_run};
use morsehb::flow::integrate::{integrate_trajectory, Direction};
use morsehb::flow::profile::end_identity_residuals;
use morsehb::flow::shoot::count_m;
use morsehb::flow::{build_morse_data, convert_end, parse_flow_problem, ShootingConfig};
use morsehb::homology::{euler_characteristic, homology, morse_inequalities};
use morsehb::morse_data::{parse_morse_data, validate, MorseData};
use morsehb::Error;
use serde_json::json;

/// Morse homology of compact oriented manifolds with boundary.
#[derive(Parser)]
#[command(name = "morsehb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a Morse data file against every structural rule.
    Validate { file: PathBuf },
    /// Print the boundary matrices of the complex built from a Morse data file.
    Boundary {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check that consecutive boundary maps compose to zero.
    Verify { file: PathBuf },
    /// Integer homology of the complex.
    Homology {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Compute even if the boundary maps do not compose to zero.
        #[arg(long)]
        force: bool,
    },
    /// Compare generator counts with Betti numbers degree by degree.
    Inequalities {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        betti: Vec<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Alternating sum of generator counts.
    Euler { file: PathBuf },
    /// Trajectories and signed counts on a circle boundary component.
    Circle {
        /// Critical points as angle:value pairs.
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        orientation: i8,
        #[arg(long)]
        json: bool,
    },
    /// Gradient-flow computations on a flow problem.
    Flow {
        #[command(subcommand)]
        command: FlowCommand,
    },
    /// Change of radial variable between end types.
    ConvertEnd {
        #[arg(long, allow_negative_numbers = true)]
        from_a: f64,
        #[arg(long, allow_negative_numbers = true)]
        to_a: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        json: bool,
    },
    /// Built-in worked examples.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Args)]
struct Shooting {
    /// Radius of the sampled unstable sphere.
    #[arg(long)]
    eps: Option<f64>,
    /// Samples per one-dimensional sphere.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Shooting {
    fn config(&self) -> ShootingConfig {
        let mut cfg = ShootingConfig::from_env();
        if let Some(e) = self.eps {
            cfg.eps_shoot = e;
        }
        if let Some(n) = self.samples {
            cfg.samples = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum FlowCommand {
    /// Integrate one trajectory from chart coordinates theta,s.
    Trace {
        problem: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
        start: Vec<f64>,
        #[arg(long)]
        backward: bool,
        #[arg(long)]
        json: bool,
    },
    /// Signed count of trajectories between two critical points.
    Count {
        problem: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        shooting: Shooting,
    },
    /// Generate a complete Morse data file from the flow.
    Build {
        problem: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        #[command(flatten)]
        shooting: Shooting,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    List {
        #[arg(long)]
        json: bool,
    },
    Run {
        names: Vec<String>,
        #[arg(long)]
        use_flow: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        shooting: Shooting,
    },
}

enum Failure {
    /// Mathematical check failed; message already printed.
    Check,
    Usage(String),
    Err(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Err(e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_data(path: &Path) -> Result<MorseData, Failure> {
    Ok(parse_morse_data(&read(path)?)?)
}

/// Accepts either a Morse data file or a complex file.
fn load_complex(path: &Path) -> Result<GradedComplex, Failure> {
    let text = read(path)?;
    let is_complex = serde_json::from_str::<serde_json::Value>(&text)
        .map(|v| v.get("boundary").is_some())
        .unwrap_or(false);
    if is_complex {
        Ok(parse_complex(&text)?)
    } else {
        let data = parse_morse_data(&text)?;
        check_valid(&data)?;
        Ok(assemble_boundary(&data)?)
    }
}

fn check_valid(data: &MorseData) -> Outcome {
    let report = validate(data);
    if report.ok() {
        return Ok(());
    }
    for v in &report.violations {
        eprintln!("{}: {}", v.rule, v.message);
    }
    Err(Failure::Check)
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { file } => {
            let data = load_data(&file)?;
            check_valid(&data)?;
            println!("ok: {} critical points, no violations", data.points().len());
        }
        Command::Boundary { file, json } => {
            let cx = load_complex(&file)?;
            if json {
                print!("{}", cx.to_json());
            } else {
                for k in 1..=cx.dimension() {
                    let d = cx.boundary(k);
                    println!("d_{k}: C_{k} ({}) -> C_{} ({})", cx.rank(k), k - 1, cx.rank(k - 1));
                    println!("  columns: {}", cx.generators(k).join(" "));
                    println!("  rows:    {}", cx.generators(k - 1).join(" "));
                    for row in d.to_rows() {
                        let cells: Vec<String> = row.iter().map(|x| format!("{x:>3}")).collect();
                        println!("  [{}]", cells.join(""));
                    }
                }
            }
        }
        Command::Verify { file } => {
            let cx = load_complex(&file)?;
            let rep = verify_d_squared(&cx)?;
            match rep.failure {
                None => println!("ok: d o d = 0 in every degree"),
                Some(f) => {
                    println!("FAIL: d_{} o d_{} has entry {} at row {}, col {}", f.k - 1, f.k, f.value, f.row, f.col);
                    return Err(Failure::Check);
                }
            }
        }
        Command::Homology { file, json, force } => {
            let cx = load_complex(&file)?;
            let h = homology(&cx, force)?;
            if json {
                print!("{}", h.to_json());
            } else {
                print!("{h}");
            }
        }
        Command::Inequalities { file, betti, json } => {
            let data = load_data(&file)?;
            let lines = morse_inequalities(&data, &betti)?;
            let holds = lines.iter().all(|l| l.holds());
            if json {
                print_json(&json!({ "holds": holds, "degrees": lines }));
            } else {
                for l in &lines {
                    let status = if l.is_equality() { "equality" } else if l.holds() { "holds" } else { "VIOLATED" };
                    println!("k = {}: {} generators >= betti {}  {status}", l.degree, l.generators, l.betti);
                }
                if lines.iter().all(|l| l.is_equality()) {
                    println!("holds (equality) in all degrees");
                } else if holds {
                    println!("holds in all degrees");
                }
            }
            if !holds {
                return Err(Failure::Check);
            }
        }
        Command::Euler { file } => {
            let data = load_data(&file)?;
            check_valid(&data)?;
            println!("{}", euler_characteristic(&data));
        }
        Command::Circle { points, orientation, json } => {
            let mut samples = Vec::new();
            for p in &points {
                let (a, v) = p
                    .split_once(':')
                    .and_then(|(a, v)| Some((a.trim().parse::<f64>().ok()?, v.trim().parse::<f64>().ok()?)))
                    .ok_or_else(|| Failure::Usage(format!("expected angle:value, got `{p}`")))?;
                samples.push((a, v));
            }
            let f = CircleMorseFunction::from_samples("N", &samples, orientation)?;
            let trajectories = circle_trajectories(&f);
            let mut counts = Vec::new();
            for a in f.critical.iter().filter(|p| p.kind == LocalType::Max) {
                for b in f.critical.iter().filter(|p| p.kind == LocalType::Min) {
                    if !trajectories.iter().any(|t| t.from == a.id && t.to == b.id) {
                        continue;
                    }
                    let n = if (a.value > 0.0) == (b.value > 0.0) {
                        signed_count_same_sign(&f, &a.id, &b.id)?
                    } else {
                        signed_count_pos_to_neg(&f, &a.id, &b.id, orientation)?
                    };
                    counts.push(json!({ "from": a.id, "to": b.id, "count": n }));
                }
            }
            if json {
                print_json(&json!({ "function": f, "trajectories": trajectories, "counts": counts }));
            } else {
                for p in &f.critical {
                    println!("{:>4}  angle {:.6}  value {:+.6}  {:?}", p.id, p.angle, p.value, p.kind);
                }
                for t in &trajectories {
                    println!("{} -> {} ({:?})", t.from, t.to, t.direction);
                }
                for c in &counts {
                    println!("#N({}, {}) = {}", c["from"].as_str().unwrap(), c["to"].as_str().unwrap(), c["count"]);
                }
            }
        }
        Command::Flow { command } => flow(command)?,
        Command::ConvertEnd { from_a, to_a, r, json } => {
            let c = convert_end(from_a, to_a, r)?;
            let res = end_identity_residuals(from_a, to_a, r, 1.0)?;
            if json {
                print_json(&json!({ "r_bar": c.r_bar, "scale": c.scale, "residuals": res }));
            } else {
                println!("r_bar = {:.15}", c.r_bar);
                println!("g_N and f_N scale by {:.15}", c.scale);
                println!("identity residuals: {:.1e} {:.1e} {:.1e}", res[0], res[1], res[2]);
            }
        }
        Command::Corpus { command } => match command {
            CorpusCommand::List { json } => {
                let list = corpus_list();
                if json {
                    print_json(&list);
                } else {
                    for e in &list {
                        let betti: Vec<String> = e.reference.bettis().iter().map(u64::to_string).collect();
                        println!("{:<15} betti ({})  chi {}", e.name, betti.join(","), e.euler);
                    }
                }
            }
            CorpusCommand::Run { names, use_flow, json, shooting } => {
                let names = (!names.is_empty()).then_some(names);
                let rep = corpus_run(names.as_deref(), use_flow, &shooting.config())?;
                if json {
                    print!("{}", rep.to_json());
                } else {
                    for e in &rep.entries {
                        match &e.failed_stage {
                            None => println!("{:<15} pass  ({:.2}s)", e.name, e.wall_seconds),
                            Some(s) => println!("{:<15} FAIL at {s}: {}", e.name, e.error.as_deref().unwrap_or("")),
                        }
                    }
                }
                if !rep.passed() {
                    return Err(Failure::Check);
                }
            }
        },
    }
    Ok(())
}

fn flow(command: FlowCommand) -> Outcome {
    match command {
        FlowCommand::Trace { problem, start, backward, json } => {
            let fp = parse_flow_problem(&read(&problem)?)?;
            let [theta, s] = start[..] else {
                return Err(Failure::Usage("--start takes two numbers: theta,s".into()));
            };
            let dir = if backward { Direction::Backward } else { Direction::Forward };
            let tr = integrate_trajectory(&fp, [theta, s], dir, &ShootingConfig::from_env())?;
            if json {
                print_json(&tr);
            } else {
                let step = (tr.points.len() / 20).max(1);
                for (i, (t, p)) in tr.times.iter().zip(&tr.points).enumerate() {
                    if i % step == 0 || i + 1 == tr.points.len() {
                        println!("t = {t:>10.4}  theta = {:>10.6}  s = {:.3e}  f = {:.9}", p[0], p[1], tr.f_values[i]);
                    }
                }
                println!("limit: {:?}", tr.limit);
            }
        }
        FlowCommand::Count { problem, from, to, json, shooting } => {
            let fp = parse_flow_problem(&read(&problem)?)?;
            let res = count_m(&fp, &from, &to, &shooting.config())?;
            if json {
                print_json(&res);
            } else {
                println!("#M({from}, {to}) = {}", res.count);
                let c = &res.certificate;
                println!("samples {}, undecided {}", c.samples, c.undecided);
                for k in &c.classes {
                    println!("  trajectory at param {:.12}  sign {:+}  residual {:.1e}", k.param, k.sign, k.residual);
                }
            }
        }
        FlowCommand::Build { problem, output, shooting } => {
            let fp = parse_flow_problem(&read(&problem)?)?;
            let data = build_morse_data(&fp, &shooting.config())?;
            std::fs::write(&output, data.to_json()).map_err(|e| Failure::Usage(format!("{}: {e}", output.display())))?;
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Err(e)) => {
            eprintln!("error: {e}");
            match e {
                e if e.is_numerical() => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
