use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use recur::bits::{defusion, fusions};
use recur::kernel::{first_illegal, project_cell, project_thread, strip_prefix, winner, Game};
use recur::machines::{
    random_legal_environment, scripted_environment, silent_environment, simulate, Environment,
    Machine, SimConfig,
};
use recur::strategies::{catalog, counterstrategy_loop, synthesize, CATALOG};
use recur::syntax::{serialize_proof, validate_cirquent};
use recur::{
    check_formula_proof, check_proof, parse_cirquent, parse_formula, parse_proof, Bits, GameExpr,
    InfBits, Interpretation, Player, Proof, Reading, Run,
};

#[derive(Parser)]
#[command(
    name = "recur",
    version,
    about = "Cirquent proofs, recurrence games and the machines that play them"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Checks that a cirquent file is well formed.
    CheckCirquent { file: PathBuf },
    /// Checks every step of a proof.
    CheckProof {
        file: PathBuf,
        /// Also require the conclusion to be the clubsuit form of this formula.
        #[arg(long)]
        formula: Option<String>,
    },
    /// Checks a proof and stores it as a strategy usable by `simulate`.
    Synthesize {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plays a strategy against an environment.
    Simulate {
        /// A catalog name or a proof file.
        #[arg(long)]
        strategy: String,
        /// `silent`, `counter`, `random:SEED` or `script:FILE`.
        #[arg(long, default_value = "random:0")]
        env: String,
        /// Defaults to the game of the proof when the strategy is one.
        #[arg(long)]
        game: Option<String>,
        #[arg(long, value_enum, default_value = "new")]
        reading: ReadingArg,
        /// Atom templates, inline (`P=balance, Q=sum3`) or a file.
        #[arg(long, default_value = "")]
        interp: String,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 1)]
        fairness: usize,
        /// With a random environment, plays this many consecutive seeds.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Prints the cycle-by-cycle trace instead of the run.
        #[arg(long)]
        trace: bool,
    },
    /// Projects a run onto a thread, a cell or a component prefix.
    Project {
        run: PathBuf,
        #[arg(long, group = "onto")]
        thread: Option<String>,
        /// `a;x1,...,xn`
        #[arg(long, group = "onto")]
        cell: Option<String>,
        #[arg(long, group = "onto")]
        prefix: Option<String>,
    },
    /// Prints every n-fusion of the given strings.
    Fuse {
        #[arg(required = true)]
        bits: Vec<String>,
    },
    /// Prints the n-defusion of a string.
    Defuse { bits: String, n: usize },
    /// Decides who won a run.
    Winner {
        run: PathBuf,
        #[arg(long)]
        game: String,
        #[arg(long, value_enum, default_value = "new")]
        reading: ReadingArg,
        #[arg(long, default_value = "")]
        interp: String,
    },
    /// Lists the built-in strategies.
    Strategies,
}

/// `old-new` reads the two sides of a top-level disjunction differently.
#[derive(Clone, Copy, ValueEnum)]
enum ReadingArg {
    New,
    Old,
    OldNew,
    NewOld,
}

/// Failures that end in exit code 2.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<bool, Usage> {
    match cmd {
        Cmd::CheckCirquent { file } => {
            let c = parse_cirquent(&read(&file)?).with_context(|| file.display().to_string())?;
            Ok(match validate_cirquent(&c) {
                Ok(()) => {
                    println!("ok");
                    true
                }
                Err(v) => {
                    println!("rejected: {v}");
                    false
                }
            })
        }
        Cmd::CheckProof { file, formula } => {
            let p = load_proof(&file)?;
            let verdict = match formula {
                Some(f) => check_formula_proof(&parse_formula(&f).context("--formula")?, &p),
                None => check_proof(&p),
            };
            Ok(match verdict {
                Ok(()) => {
                    println!("ok: {} steps", p.steps.len());
                    true
                }
                Err(e) => {
                    println!("rejected: {e}");
                    false
                }
            })
        }
        Cmd::Synthesize { file, out } => {
            let p = load_proof(&file)?;
            if let Err(e) = check_proof(&p) {
                println!("rejected: {e}");
                return Ok(false);
            }
            synthesize(&p).map_err(|e| anyhow!("{e}"))?;
            fs::write(&out, serialize_proof(&p))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("ok: strategy stored in {}", out.display());
            Ok(true)
        }
        Cmd::Simulate {
            strategy,
            env,
            game,
            reading,
            interp,
            horizon,
            fairness,
            seeds,
            trace,
        } => {
            if horizon == 0 || fairness == 0 || seeds == 0 {
                return Err(anyhow!("--horizon, --fairness and --seeds must be positive").into());
            }
            let (machine, default_game) = load_strategy(&strategy)?;
            let g = match (game, default_game) {
                (Some(text), _) => game_expr(&text, reading)?,
                (None, Some(g)) => g,
                (None, None) => bail_usage("--game is required with a catalog strategy")?,
            };
            let itp = load_interp(&interp, &g)?;
            let cfg = SimConfig::new(horizon).fairness(fairness);
            let envs = env_specs(&env, seeds)?;
            let mut all_won = true;
            for (label, spec) in envs {
                let mut e = make_env(&spec, &g, &itp)?;
                let mut m = machine.clone();
                let sim = simulate(&mut *m, &mut *e, &cfg)?;
                let w = winner(&g, &itp, &sim.run)?;
                let bad = first_illegal(&g, &itp, &sim.run)?;
                if label.is_some() || seeds > 1 {
                    println!("# {}", label.unwrap_or_default());
                }
                if trace {
                    print!("{}", sim.trace_text());
                } else {
                    print!("{}", sim.run);
                }
                match bad {
                    Some(k) => println!("illegal: move {} by {}", k + 1, sim.run[k].player),
                    None => println!("legal"),
                }
                println!("winner: {w}");
                all_won &= w == Player::Top;
            }
            Ok(all_won)
        }
        Cmd::Project {
            run,
            thread,
            cell,
            prefix,
        } => {
            let r = load_run(&run)?;
            let out = if let Some(x) = thread {
                let x: InfBits = x.parse().context("--thread")?;
                project_thread(&r, &x)
            } else if let Some(spec) = cell {
                let (a, xs) = parse_cell(&spec).context("--cell")?;
                project_cell(&r, a, &xs)
            } else if let Some(a) = prefix {
                strip_prefix(&r, &a)
            } else {
                bail_usage("one of --thread, --cell or --prefix is required")?
            };
            print!("{out}");
            Ok(true)
        }
        Cmd::Fuse { bits } => {
            let xs = bits
                .iter()
                .map(|b| b.parse::<Bits>())
                .collect::<Result<Vec<_>, _>>()?;
            let all: Vec<String> = fusions(&xs)?.iter().map(Bits::to_string).collect();
            println!("{}", all.join(" "));
            Ok(true)
        }
        Cmd::Defuse { bits, n } => {
            let z: Bits = bits.parse()?;
            let parts: Vec<String> = defusion(&z, n)?.iter().map(Bits::to_string).collect();
            println!("{}", parts.join(" "));
            Ok(true)
        }
        Cmd::Winner {
            run,
            game,
            reading,
            interp,
        } => {
            let r = load_run(&run)?;
            let g = game_expr(&game, reading)?;
            let itp = load_interp(&interp, &g)?;
            match first_illegal(&g, &itp, &r)? {
                Some(k) => println!("illegal: move {} by {}", k + 1, r[k].player),
                None => println!("legal"),
            }
            let w = winner(&g, &itp, &r)?;
            println!("winner: {w}");
            Ok(w == Player::Top)
        }
        Cmd::Strategies => {
            for name in CATALOG {
                println!("{name}");
            }
            Ok(true)
        }
    }
}

fn bail_usage<T>(msg: &str) -> Result<T, Usage> {
    Err(Usage(anyhow!("{msg}")))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_proof(path: &Path) -> Result<Proof> {
    parse_proof(&read(path)?).with_context(|| path.display().to_string())
}

fn load_run(path: &Path) -> Result<Run> {
    read(path)?
        .parse()
        .with_context(|| path.display().to_string())
}

fn load_strategy(spec: &str) -> Result<(Box<dyn Machine>, Option<GameExpr>)> {
    if let Some(m) = catalog(spec) {
        return Ok((m, None));
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("`{spec}` is neither a built-in strategy nor a proof file");
    }
    let p = load_proof(path)?;
    check_proof(&p).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let sol = synthesize(&p).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok((sol.machine, Some(sol.game)))
}

fn game_expr(text: &str, reading: ReadingArg) -> Result<GameExpr> {
    let f = parse_formula(text).context("--game")?;
    let g = match reading {
        ReadingArg::New => Game::from_formula(&f, Reading::New),
        ReadingArg::Old => Game::from_formula(&f, Reading::Old),
        ReadingArg::OldNew | ReadingArg::NewOld => {
            let recur::Formula::Or(l, r) = &f else {
                bail!(
                    "--reading {} needs a top-level disjunction",
                    reading_name(reading)
                );
            };
            let (a, b) = match reading {
                ReadingArg::OldNew => (Reading::Old, Reading::New),
                _ => (Reading::New, Reading::Old),
            };
            Game::Or(
                Box::new(Game::from_formula(l, a)),
                Box::new(Game::from_formula(r, b)),
            )
        }
    };
    Ok(GameExpr::Plain(g))
}

fn reading_name(r: ReadingArg) -> &'static str {
    match r {
        ReadingArg::New => "new",
        ReadingArg::Old => "old",
        ReadingArg::OldNew => "old-new",
        ReadingArg::NewOld => "new-old",
    }
}

/// Inline spec or a file; atoms left out default to `balance`.
fn load_interp(spec: &str, g: &GameExpr) -> Result<Interpretation> {
    let text = if !spec.is_empty() && Path::new(spec).is_file() {
        read(Path::new(spec))?
    } else {
        spec.to_string()
    };
    let mut itp = Interpretation::parse(&text).context("--interp")?;
    for a in g.atoms() {
        if itp.get(&a).is_none() {
            itp.insert(a, recur::kernel::balance());
        }
    }
    Ok(itp)
}

enum EnvSpec {
    Silent,
    Counter,
    Random(u64),
    Script(Vec<(usize, Vec<String>)>),
}

fn env_specs(spec: &str, seeds: u64) -> Result<Vec<(Option<String>, EnvSpec)>> {
    if let Some(s) = spec.strip_prefix("random:") {
        let first: u64 = s.parse().with_context(|| format!("bad seed `{s}`"))?;
        return Ok((first..first + seeds)
            .map(|k| (Some(format!("seed {k}")), EnvSpec::Random(k)))
            .collect());
    }
    let one = match spec {
        "silent" => EnvSpec::Silent,
        "counter" => EnvSpec::Counter,
        _ => match spec.strip_prefix("script:") {
            Some(path) => EnvSpec::Script(parse_script(Path::new(path))?),
            None => bail!("unknown environment `{spec}`"),
        },
    };
    Ok(vec![(None, one)])
}

/// Lines `GRANT MOVE...`; `#` starts a comment.
fn parse_script(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let grant = words
            .next()
            .and_then(|w| w.parse::<usize>().ok())
            .filter(|&g| g > 0)
            .ok_or_else(|| anyhow!("{}:{}: expected a grant number", path.display(), no + 1))?;
        out.push((grant, words.map(String::from).collect()));
    }
    Ok(out)
}

fn make_env(spec: &EnvSpec, g: &GameExpr, itp: &Interpretation) -> Result<Box<dyn Environment>> {
    Ok(match spec {
        EnvSpec::Silent => Box::new(silent_environment()),
        EnvSpec::Counter => Box::new(counterstrategy_loop()),
        EnvSpec::Random(seed) => Box::new(random_legal_environment(*seed, g, itp)),
        EnvSpec::Script(s) => Box::new(scripted_environment(s.clone())),
    })
}

fn parse_cell(spec: &str) -> Result<(usize, Vec<InfBits>)> {
    let (a, xs) = spec
        .split_once(';')
        .ok_or_else(|| anyhow!("expected `a;x1,...,xn`, found `{spec}`"))?;
    let a: usize = a
        .trim()
        .parse()
        .with_context(|| format!("bad oformula index `{a}`"))?;
    let xs = xs
        .split(',')
        .map(|x| x.parse::<InfBits>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok((a, xs))
}
