use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use keepaway::formation::{enumerate_block_sets, find_formation, FormationSearch};
use keepaway::game::Game;
use keepaway::par::Execution;
use keepaway::playbook::{Playbook, PlaybookParams};
use keepaway::render;
use keepaway::sim::{
    events_to_jsonl, run_batch, run_episode, Action, EpisodeOptions, EvaderSpec, PursuerSpec,
};
use keepaway::solver::{solve, Decision, SolverParams};
use keepaway::thresholds::{threshold_csv, threshold_table};
use serde_json::json;

use crate::instance::resolve;
use crate::session::SessionStore;

/// Exit code for I/O, config and other runtime failures.
pub const EXIT_ERROR: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "keepaway", version, about = "Keep-away pursuit-evasion solver and simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// JSON game config.
    pub config: Option<PathBuf>,
    /// Regular layout shorthand, e.g. `--regular n=5 m=2 k=0.32`.
    #[arg(long, num_args = 1..)]
    pub regular: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide the game. Exit 0 pursuer win, 1 evader win, 2 undetermined.
    Solve(InstanceArgs),
    /// Formations for every block set of one size.
    Formations {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        size: usize,
    },
    /// Threshold table as CSV.
    Thresholds {
        #[arg(long, default_value_t = 5)]
        from: usize,
        #[arg(long, default_value_t = 15)]
        to: usize,
    },
    /// Play seeded episodes and summarize the outcomes.
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = PursuerArg::Strategy)]
        pursuer: PursuerArg,
        #[arg(long, value_enum, default_value_t = EvaderArg::Greedy)]
        evader: EvaderArg,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Defaults to 100 times the longest lane time.
        #[arg(long)]
        horizon: Option<f64>,
        /// Scripted evader moves: anchor indices or `w` for wait, comma separated.
        #[arg(long, default_value = "")]
        script: String,
        #[arg(long)]
        start: Option<usize>,
        /// Write the first episode's event log here (JSON lines).
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Write SVG drawings.
    Render {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum)]
        what: RenderArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Session journal (JSON lines); replayed on start when present.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PursuerArg {
    Strategy,
    Lion,
    Guards,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvaderArg {
    Greedy,
    Random,
    Script,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderArg {
    Formations,
    Transitions,
    Episode,
}

fn load(args: &InstanceArgs) -> Result<Game, String> {
    let cfg = resolve(args.config.as_deref(), &args.regular).map_err(|e| e.to_string())?;
    Game::new(cfg).map_err(|e| format!("malformed config: {e}"))
}

pub fn exit_code(d: Decision) -> i32 {
    match d {
        Decision::PursuerWin => 0,
        Decision::EvaderWin => 1,
        Decision::Undetermined => 2,
    }
}

pub fn parse_script(s: &str) -> Result<Vec<Action>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "w" | "wait" => Ok(Action::Wait),
            _ => t.parse().map(Action::Move).map_err(|_| format!("bad script token `{t}`")),
        })
        .collect()
}

/// Runs a command, writing results to `out`, and returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match cli.command {
        Command::Solve(args) => {
            let game = load(&args)?;
            let sol = solve(&game, &SolverParams::default());
            let text = serde_json::to_string_pretty(&sol.verdict).expect("verdicts serialize");
            writeln!(out, "{text}").map_err(io)?;
            Ok(exit_code(sol.verdict.outcome))
        }
        Command::Formations { instance, size } => {
            let game = load(&instance)?;
            if size == 0 || size >= game.n() {
                return Err(format!("size must be in 1..{}", game.n()));
            }
            let rows: Vec<_> = enumerate_block_sets(game.config(), size)
                .into_iter()
                .map(|bs| {
                    let (status, formation) = match find_formation(&game, &bs) {
                        FormationSearch::Feasible(f) => ("feasible", Some(f)),
                        FormationSearch::GreedyInfeasible => ("greedy_infeasible", None),
                        FormationSearch::Infeasible => ("infeasible", None),
                    };
                    json!({"block_set": bs, "status": status, "formation": formation})
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap()).map_err(io)?;
            Ok(0)
        }
        Command::Thresholds { from, to } => {
            if from < 2 || to < from {
                return Err("need 2 <= from <= to".into());
            }
            write!(out, "{}", threshold_csv(&threshold_table(from, to))).map_err(io)?;
            Ok(0)
        }
        Command::Simulate { instance, pursuer, evader, seeds, horizon, script, start, events, sequential } => {
            let game = Arc::new(load(&instance)?);
            let spec = pursuer_spec(&game, pursuer);
            let ev = match evader {
                EvaderArg::Greedy => EvaderSpec::Greedy,
                EvaderArg::Random => EvaderSpec::Random { wait_prob: 0.0 },
                EvaderArg::Script => EvaderSpec::Script { actions: parse_script(&script)?, cycle: true },
            };
            let horizon = horizon.unwrap_or(100.0 * game.max_lane_time());
            let exec = if sequential { Execution::Sequential } else { Execution::default() };
            if let Some(path) = events {
                let p = spec.build(&game).map_err(|e| e.to_string())?;
                let mut e = ev.build();
                let r = run_episode(game.clone(), p, e.as_mut(), EpisodeOptions { horizon, seed: 0, start })
                    .map_err(|e| e.to_string())?;
                std::fs::write(&path, events_to_jsonl(&r.events)).map_err(io)?;
            }
            let outs = run_batch(&game, &spec, &ev, 0..seeds, horizon, start, exec).map_err(|e| e.to_string())?;
            let wins = outs.iter().filter(|o| o.pursuers_win()).count();
            let times: Vec<f64> = outs.iter().filter_map(|o| o.capture_time).collect();
            let mean = if times.is_empty() { None } else { Some(times.iter().sum::<f64>() / times.len() as f64) };
            let summary = json!({
                "pursuer": format!("{pursuer:?}").to_lowercase(),
                "evader": format!("{evader:?}").to_lowercase(),
                "seeds": seeds,
                "horizon": horizon,
                "pursuer_wins": wins,
                "evader_survived": outs.len() - wins,
                "mean_capture_time": mean,
                "max_capture_time": times.iter().copied().reduce(f64::max),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&summary).unwrap()).map_err(io)?;
            Ok(0)
        }
        Command::Render { instance, what, out: dir, seed } => {
            let game = Arc::new(load(&instance)?);
            std::fs::create_dir_all(&dir).map_err(io)?;
            let files = render_files(&game, what, seed)?;
            for (name, svg) in &files {
                std::fs::write(dir.join(name), svg).map_err(io)?;
                writeln!(out, "{}", dir.join(name).display()).map_err(io)?;
            }
            Ok(0)
        }
        Command::Serve { bind, port, journal } => {
            let addr: std::net::SocketAddr =
                format!("{bind}:{port}").parse().map_err(|e| format!("bad address: {e}"))?;
            let store = match journal {
                Some(p) => SessionStore::with_journal(&p).map_err(io)?,
                None => SessionStore::new(),
            };
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(crate::http::serve(addr, Arc::new(store))).map_err(io)?;
            Ok(0)
        }
    }
}

fn pursuer_spec(game: &Game, kind: PursuerArg) -> PursuerSpec {
    match kind {
        PursuerArg::Strategy => {
            let sol = solve(game, &SolverParams::default());
            let pb = sol.playbook.unwrap_or_else(|| Playbook::build(game, &PlaybookParams::default()));
            PursuerSpec::Formation(Arc::new(pb))
        }
        PursuerArg::Lion => PursuerSpec::Lion,
        PursuerArg::Guards => PursuerSpec::Guards,
        PursuerArg::Random => PursuerSpec::Random,
    }
}

/// SVG files for `what`, as `(file name, contents)`.
pub fn render_files(game: &Arc<Game>, what: RenderArg, seed: u64) -> Result<Vec<(String, String)>, String> {
    let sol = solve(game, &SolverParams::default());
    match what {
        RenderArg::Formations | RenderArg::Transitions => {
            let strategy = sol.verdict.strategy().ok_or("no formation chain to draw for this instance")?;
            let mut files = render::strategy_svgs(game, strategy);
            let transitions = files.pop().expect("transitions panel");
            Ok(if what == RenderArg::Formations { files } else { vec![transitions] })
        }
        RenderArg::Episode => {
            let pb = sol.playbook.unwrap_or_else(|| Playbook::build(game, &PlaybookParams::default()));
            let policy = PursuerSpec::Formation(Arc::new(pb)).build(game).map_err(|e| e.to_string())?;
            let mut ev = EvaderSpec::Greedy.build();
            let horizon = 100.0 * game.max_lane_time();
            let r = run_episode(game.clone(), policy, ev.as_mut(), EpisodeOptions { horizon, seed, start: None })
                .map_err(|e| e.to_string())?;
            Ok(vec![("episode.svg".into(), render::episode_svg(game, &r.events, "episode"))])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("keepaway").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        let code = run(cli, &mut out).unwrap_or(EXIT_ERROR);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn solve_exit_codes() {
        assert_eq!(run_args(&["solve", "--regular", "n=5", "m=2", "k=0.32"]).0, 0);
        assert_eq!(run_args(&["solve", "--regular", "n=5", "m=2", "k=0.25"]).0, 1);
        let (code, text) = run_args(&["solve", "--regular", "n=7,m=3,k=0.2226"]);
        assert_ne!(code, 0);
        assert!(text.contains("\"outcome\""));
    }

    #[test]
    fn thresholds_csv() {
        let (code, text) = run_args(&["thresholds", "--from", "5", "--to", "11"]);
        assert_eq!(code, 0);
        assert!(text.contains(",0.323,"));
        assert_eq!(run_args(&["thresholds", "--from", "9", "--to", "3"]).0, EXIT_ERROR);
    }

    #[test]
    fn script_tokens() {
        assert_eq!(parse_script("3, w,2").unwrap(), vec![Action::Move(3), Action::Wait, Action::Move(2)]);
        assert!(parse_script("x").is_err());
        assert!(parse_script("").unwrap().is_empty());
    }

    #[test]
    fn formations_listing() {
        let (code, text) = run_args(&["formations", "--size", "2", "--regular", "n=5", "m=2", "k=0.32"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 5);
    }
}
