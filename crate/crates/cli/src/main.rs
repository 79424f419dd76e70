use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use trigrid::cocirc::{self, BoundaryData, Cocirculation};
use trigrid::criterion::{self, PuzzleSet};
use trigrid::feasibility::{self, FeasibilityResult};
use trigrid::grid::ConvexGrid;
use trigrid::io::{self, IoError};
use trigrid::puzzle::PuzzleError;
use trigrid::rational;
use trigrid::rigidity;
use trigrid::svg::{self, Drawing};

#[derive(Parser, Debug)]
#[command(name = "trigrid", version, about = "Concave cocirculations, puzzles and rigidity on convex triangular grids")]
struct Cli {
    /// Largest grid (in little triangles) for puzzle enumeration.
    #[arg(long, global = true, env = "TRIGRID_CAP", default_value_t = 25)]
    cap_triangles: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide whether a border extends to a concave cocirculation.
    Check(GridSigma),
    /// Like `check`, printing the extension when there is one.
    Extend(GridSigma),
    /// Enumerate the puzzles of a grid.
    Puzzles(GridOnly),
    /// Decide extendability by zero-sum, monotonicity and puzzle inequalities.
    Criterion(GridSigma),
    /// Index triples (I, J, K) of the puzzles of the size-n 3-side grid.
    Horn { n: usize },
    /// Rigidity, gentle circuits and (optionally) facet dimension per puzzle.
    Rigidity {
        #[command(flatten)]
        grid: GridOnly,
        #[arg(long)]
        face: bool,
    },
    /// Draw a grid, optionally with a puzzle, its gentle circuit and edge values.
    Render {
        #[command(flatten)]
        grid: GridOnly,
        #[arg(long)]
        puzzle: Option<String>,
        /// Draw puzzle number i of the enumeration instead of --puzzle.
        #[arg(long)]
        puzzle_index: Option<usize>,
        /// Border or cocirculation values to print on edges.
        #[arg(long)]
        values: Option<String>,
        /// Overlay a gentle circuit of the puzzle if it has one.
        #[arg(long)]
        circuit: bool,
    },
    /// Build a cocirculation or a sample border.
    Construct {
        #[command(flatten)]
        grid: GridOnly,
        #[arg(long, value_enum, default_value_t = Kind::Witness)]
        kind: Kind,
        #[arg(long, default_value = "1")]
        alpha: String,
    },
    /// Decide whether a border extends with discrepancy at least α on every
    /// normal tandem.
    Discrepancy {
        #[command(flatten)]
        gs: GridSigma,
        #[arg(long)]
        alpha: String,
    },
}

#[derive(clap::Args, Debug)]
struct GridOnly {
    /// `three_side:n`, `parallelogram:p,q`, `hexagon:s1,…,s6`, JSON, or a file.
    #[arg(long)]
    grid: String,
}

#[derive(clap::Args, Debug)]
struct GridSigma {
    #[command(flatten)]
    grid: GridOnly,
    /// Border document `{"values": {"a,b,dir": "p/q", …}}`, inline or a file.
    #[arg(long)]
    sigma: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Witness,
    Discrepancy,
    Feasible,
    Adversarial,
}

enum Output {
    Json(Value, u8),
    Svg(String),
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match run(&cli) {
        Ok(Output::Json(v, code)) => (pretty(&v), code),
        Ok(Output::Svg(s)) => (s, 0),
        Err(Failure(msg)) => {
            print!("{}", pretty(&io::error_doc(msg)));
            return ExitCode::from(2);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                print!("{}", pretty(&io::error_doc(format!("cannot write {path}: {e}"))));
                return ExitCode::from(2);
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
        }
    }
    ExitCode::from(code)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn load(g: &GridOnly) -> Result<ConvexGrid, IoError> {
    io::parse_grid(&g.grid)
}

fn load_sigma(gs: &GridSigma) -> Result<(ConvexGrid, BoundaryData), IoError> {
    let grid = load(&gs.grid)?;
    let sigma = io::parse_border(&grid, &io::read_arg(&gs.sigma)?)?;
    Ok((grid, sigma))
}

fn puzzles(grid: &ConvexGrid, cap: usize) -> Result<std::sync::Arc<PuzzleSet>, PuzzleError> {
    criterion::cached_puzzles(grid, cap)
}

fn extension(grid: &ConvexGrid, sigma: &BoundaryData, show_h: bool) -> Result<(Value, u8), Failure> {
    Ok(match feasibility::extend_to_concave(grid, sigma)? {
        FeasibilityResult::Extended(h) if show_h => (json!({"status": "feasible", "h": io::to_json(&h)}), 0),
        FeasibilityResult::Extended(_) => (json!({"status": "feasible"}), 0),
        FeasibilityResult::Certificate { k, violation } => (io::certificate_doc(grid, &k, &violation), 1),
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let cap = cli.cap_triangles;
    match &cli.cmd {
        Cmd::Check(gs) | Cmd::Extend(gs) => {
            let (grid, sigma) = load_sigma(gs)?;
            let (v, code) = extension(&grid, &sigma, matches!(cli.cmd, Cmd::Extend(_)))?;
            Ok(Output::Json(v, code))
        }
        Cmd::Puzzles(g) => {
            let grid = load(g)?;
            let set = puzzles(&grid, cap)?;
            let docs: Vec<Value> = set.puzzles.iter().enumerate().map(|(i, p)| io::puzzle_doc(&grid, i, p)).collect();
            Ok(Output::Json(json!({"count": docs.len(), "puzzles": docs}), 0))
        }
        Cmd::Criterion(gs) => {
            let (grid, sigma) = load_sigma(gs)?;
            let set = puzzles(&grid, cap)?;
            let report = criterion::check_border_with(&grid, &set, &sigma)?;
            let values: Vec<Value> = (0..set.puzzles.len())
                .map(|i| json!({"puzzle": i, "value": rational::format(&set.value(i, &sigma))}))
                .collect();
            let code = if report.feasible { 0 } else { 1 };
            Ok(Output::Json(json!({"report": io::to_json(&report), "puzzle_values": values}), code))
        }
        Cmd::Horn { n } => {
            if *n == 0 || n * n > cap {
                return Err(Failure(format!("n = {n} needs {} triangles; the cap is {cap}", n * n)));
            }
            let triples = criterion::horn_triples(*n, cap)?;
            let singles = criterion::single_triangle_triples(*n, cap)?;
            let all: Vec<Value> = triples.iter().map(|(t, i)| json!({"I": t.i, "J": t.j, "K": t.k, "puzzle": i})).collect();
            Ok(Output::Json(json!({"n": n, "triples": all, "single_triangle": io::to_json(&singles)}), 0))
        }
        Cmd::Rigidity { grid: g, face } => {
            let grid = load(g)?;
            let set = puzzles(&grid, cap)?;
            let records = rigidity::rigidity_report(&grid, &set, *face);
            let consistent = records.iter().all(rigidity::RigidityRecord::consistent);
            let docs: Vec<Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "puzzle": r.puzzle,
                        "boundary": {"plus": r.plus, "minus": r.minus},
                        "rigid": r.rigid,
                        "gentle_circuit": r.gentle_circuit.as_ref().map_or(json!(false), io::to_json),
                        "face_dim": r.face_dim,
                        "facet": r.facet,
                    })
                })
                .collect();
            let three_side = grid.three_side_size().is_some();
            let v = json!({"three_side": three_side, "consistent": consistent, "puzzles": docs});
            Ok(Output::Json(v, if consistent { 0 } else { 1 }))
        }
        Cmd::Render { grid: g, puzzle, puzzle_index, values, circuit } => {
            let grid = load(g)?;
            let p = match (puzzle, puzzle_index) {
                (Some(text), _) => Some(io::parse_puzzle(&grid, &io::read_arg(text)?)?),
                (None, Some(i)) => {
                    let set = puzzles(&grid, cap)?;
                    Some(set.puzzles.get(*i).cloned().ok_or_else(|| Failure(format!("no puzzle {i}")))?)
                }
                (None, None) => None,
            };
            let vals = match values {
                Some(text) => Some(io::from_json::<Cocirculation>(&io::read_arg(text)?)?.values),
                None => None,
            };
            let witness = match (&p, circuit) {
                (Some(p), true) => rigidity::gentle_circuit(&rigidity::build_g0(&grid, p)),
                _ => None,
            };
            let d = Drawing { puzzle: p.as_ref(), values: vals.as_ref(), circuit: witness.as_deref() };
            Ok(Output::Svg(svg::render(&grid, &d)))
        }
        Cmd::Construct { grid: g, kind, alpha } => {
            let grid = load(g)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let h = match kind {
                Kind::Witness => Some(cocirc::strict_concave_witness(&grid)),
                Kind::Discrepancy => Some(cocirc::constant_discrepancy_cocirculation(&grid, &io::parse_rational(alpha)?)),
                _ => None,
            };
            let v = match (h, kind) {
                (Some(h), _) => json!({"h": io::to_json(&h), "border": io::to_json(&cocirc::border(&grid, &h))}),
                (None, Kind::Feasible) => {
                    json!({"border": io::to_json(&BoundaryData::from_vec(&grid, &criterion::sample_feasible(&grid, &mut rng)))})
                }
                (None, _) => json!({
                    "border": io::to_json(&BoundaryData::from_vec(&grid, &criterion::sample_adversarial(&grid, &mut rng)))
                }),
            };
            Ok(Output::Json(v, 0))
        }
        Cmd::Discrepancy { gs, alpha } => {
            let (grid, sigma) = load_sigma(gs)?;
            let alpha = io::parse_rational(alpha)?;
            let lower = cocirc::constant_discrepancy_cocirculation(&grid, &alpha);
            let reduced = cocirc::reduce_discrepancy_problem(&grid, &sigma, &lower);
            let (mut v, code) = match feasibility::extend_to_concave(&grid, &reduced)? {
                FeasibilityResult::Extended(h) => (json!({"status": "feasible", "h": io::to_json(&h.add(&lower))}), 0),
                FeasibilityResult::Certificate { k, violation } => (io::certificate_doc(&grid, &k, &violation), 1),
            };
            v["alpha"] = json!(rational::format(&alpha));
            v["reduced_sigma"] = io::to_json(&reduced);
            Ok(Output::Json(v, code))
        }
    }
}
