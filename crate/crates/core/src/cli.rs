//! The `osl` command line: argument parsing, dispatch and error reporting.

use crate::brun::{brun_expand, brun_expand_ordered, diagnostics, pf_sample_seeded, positivity_onset};
use crate::decompose::{loop_decomposition, verify_decomposition};
use crate::error::{Category, OslError, Result};
use crate::foldlines::{rationalize, rose_to_rose};
use crate::graphs::generate::canonical_form;
use crate::graphs::graph::{format_half_edge, Graph, Path, Turn};
use crate::matrices::{fold_matrix, unfold_matrix, PosVector};
use crate::numeric::{self, format_float, format_rational, parse_rational, Float, Q};
use crate::ray::certify::certify_geodesic_with_precision;
use crate::ray::search::translation_identity;
use crate::ray::{density_search, Ray, RayConfig, RayMode, Target, TangentDatum};
use crate::serial::{matrix_rows, point_from_json, PointSpec, RayFile};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;

#[derive(Parser, Debug)]
#[command(name = "osl", version, about = "Brun expansions, fold lines and dense fold rays")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Config {
    /// Backend for reported distances and eigen data.
    #[arg(long, global = true, value_enum, default_value_t = Backend::Bigfloat)]
    backend: Backend,
    /// Big-float precision; defaults to OSL_PRECISION_BITS or 256.
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
    /// Seed for deterministic dithers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format for tabular reports; `ray plotdata` defaults to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Backend {
    Rational,
    Bigfloat,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Full,
    Theta,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Brun expansions.
    #[command(subcommand)]
    Brun(BrunCommand),
    /// Positive Brun matrix with PF eigenvector near a target.
    PfSample {
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 2000)]
        cap: usize,
    },
    /// Positive loop decomposition of a trivalent graph at a turn.
    Decompose {
        /// JSON file with `vertices` and `edges`.
        #[arg(long)]
        graph: String,
        #[arg(long, allow_hyphen_values = true)]
        turn: String,
    },
    /// Rose-to-rose fold lines.
    #[command(subcommand)]
    Foldline(FoldlineCommand),
    /// The dense fold ray.
    #[command(subcommand)]
    Ray(RayCommand),
    /// Fold and unfold matrices.
    #[command(subcommand)]
    Matrices(MatricesCommand),
}

#[derive(Subcommand, Debug)]
enum BrunCommand {
    /// Unordered steps with products and iterates, or the ordered variant
    Expand {
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long)]
        steps: usize,
        /// Use the ordered algorithm.
        #[arg(long)]
        ordered: bool,
    },
    /// Least step at which the Brun matrix turns positive
    Onset {
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = 200)]
        cap: usize,
    },
}

#[derive(Args, Debug)]
struct LineArgs {
    /// JSON point file (`graph`, `lengths`, optional `marking`).
    #[arg(long)]
    point: String,
    #[arg(long, allow_hyphen_values = true)]
    turn: String,
    /// Move the point by at most this simplicial distance to avoid ties.
    #[arg(long)]
    eps: Option<String>,
}

#[derive(Subcommand, Debug)]
enum FoldlineCommand {
    /// Line from the point's rose through its graph back to a rose
    RoseToRose {
        #[command(flatten)]
        line: LineArgs,
    },
    /// Point on the line at a given time
    Eval {
        #[command(flatten)]
        line: LineArgs,
        #[arg(long)]
        time: String,
    },
}

#[derive(Subcommand, Debug)]
enum RayCommand {
    /// Build a ray and write its file
    Generate {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Theta)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<String>,
    },
    /// Witness certificate and Lipschitz distance on [from, to]
    Certify {
        #[arg(long)]
        ray: String,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Search the ray for a segment near a target point or tangent
    Find {
        #[arg(long)]
        ray: String,
        #[arg(long)]
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        turn: Option<String>,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// CSV trajectory: simplex and normalized lengths per fold
    Plotdata {
        #[arg(long)]
        ray: String,
    },
}

#[derive(Subcommand, Debug)]
enum MatricesCommand {
    /// T_ij = I - e_ij
    Fold {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        dim: usize,
    },
    /// M_ij = I + e_ij
    Unfold {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        dim: usize,
    },
}

enum Output {
    Json(Value),
    Text(String),
}

impl Config {
    fn bits(&self) -> Result<usize> {
        match (self.backend, self.precision_bits) {
            (Backend::Rational, Some(_)) => Err(OslError::Usage("--precision-bits needs the bigfloat backend".into())),
            (_, Some(b)) if b < 64 => Err(OslError::Usage("precision must be at least 64 bits".into())),
            (_, Some(b)) => Ok(b),
            (_, None) => Ok(numeric::default_precision()),
        }
    }

    /// A big float with its precision tag, or null on the rational backend.
    fn float(&self, x: &Float) -> Result<Value> {
        let bits = self.bits()?;
        Ok(match self.backend {
            Backend::Rational => Value::Null,
            Backend::Bigfloat => json!({ "value": format_float(x, bits * 3 / 10), "bits": bits }),
        })
    }
}

fn parse_vector(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(parse_rational).collect()
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| OslError::Io(format!("{path}: {e}")))
}

fn strings(v: &[Q]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn path_strings(p: &Path) -> Vec<String> {
    p.iter().map(|&h| format_half_edge(h)).collect()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn brun(cmd: &BrunCommand) -> Result<Output> {
    Ok(Output::Json(match cmd {
        BrunCommand::Expand { vector, steps, ordered: false } => {
            let exp = brun_expand(&PosVector::new(parse_vector(vector)?)?, *steps)?;
            json!({
                "symbols": exp.symbols.iter().map(|s| [s.i, s.j]).collect::<Vec<_>>(),
                "iterates": exp.iterates.iter().map(|v| strings(v.entries())).collect::<Vec<_>>(),
                "product": matrix_rows(exp.last_product()),
                "degenerate": exp.degenerate,
                "diagnostics": to_value(&diagnostics(&exp)?),
            })
        }
        BrunCommand::Expand { vector, steps, ordered: true } => {
            let exp = brun_expand_ordered(&PosVector::new(parse_vector(vector)?)?, *steps)?;
            json!({
                "indices": exp.indices,
                "iterates": exp.iterates.iter().map(|v| strings(v.entries())).collect::<Vec<_>>(),
                "product": matrix_rows(exp.products.last().expect("A'_0 always present")),
                "degenerate": exp.degenerate,
            })
        }
        BrunCommand::Onset { vector, cap } => json!({ "onset": positivity_onset(&PosVector::new(parse_vector(vector)?)?, *cap)? }),
    }))
}

fn pf_sample(cfg: &Config, target: &str, eps: &str, cap: usize) -> Result<Output> {
    let target = PosVector::new(parse_vector(target)?)?;
    let s = pf_sample_seeded(&target, &parse_rational(eps)?, cap, cfg.seed)?;
    let bits = cfg.bits()?;
    Ok(Output::Json(json!({
        "symbols": s.symbols.iter().map(|x| [x.i, x.j]).collect::<Vec<_>>(),
        "matrix": matrix_rows(&s.matrix),
        "eigenvalue": cfg.float(&s.pf.eigenvalue)?,
        "eigenvector": s.pf.eigenvector.iter().map(|x| cfg.float(x)).collect::<Result<Vec<_>>>()?,
        "l1_distance": cfg.float(&s.pf.l1_distance_to(target.entries()).with_precision(bits).value())?,
        "perturbed_target": s.perturbed_target.as_deref().map(strings),
        "cone_diameter": format_rational(&s.diameter),
    })))
}

fn decompose(graph: &str, turn: &str) -> Result<Output> {
    let g: Graph = serde_json::from_str(&read(graph)?).map_err(|e| OslError::Parse(e.to_string()))?;
    let g = Graph::new(g.vertices, g.edges)?;
    let d = loop_decomposition(&g, &Turn::parse(turn)?)?;
    Ok(Output::Json(json!({
        "graph": to_value(&d.graph),
        "base": d.base,
        "turn": d.turn.to_string(),
        "loops": d.loops.iter().map(path_strings).collect::<Vec<_>>(),
        "flipped": d.flipped,
        "verified": verify_decomposition(&d),
    })))
}

fn foldline(cfg: &Config, cmd: &FoldlineCommand) -> Result<Output> {
    let args = match cmd {
        FoldlineCommand::RoseToRose { line } | FoldlineCommand::Eval { line, .. } => line,
    };
    let x = point_from_json(&read(&args.point)?)?;
    let turn = Turn::parse(&args.turn)?;
    let (through, line) = match &args.eps {
        Some(eps) => rationalize(&x, &turn, &parse_rational(eps)?)?,
        None => (x.clone(), rose_to_rose(&x, &turn)?),
    };
    Ok(Output::Json(match cmd {
        FoldlineCommand::RoseToRose { .. } => {
            let h = &line.change_of_metric;
            json!({
                "through": strings(&through.lengths),
                "x0": strings(&line.x0().lengths),
                "s": strings(&line.rose_to_graph.s),
                "top": to_value(&PointSpec::from(line.top.clone())),
                "terminal": strings(&line.terminal.lengths),
                "change_of_metric": matrix_rows(h),
                "determinant": h.determinant().to_string(),
                "automorphism": to_value(&line.automorphism),
                "top_time": format_rational(&line.top_time()),
                "extent": format_rational(&line.extent()),
                "graph_to_rose_folds": line.graph_to_rose.folds.len(),
                "proper": line.is_proper(),
                "distance": cfg.float(&numeric::ln_rational(&(line.x0().volume() / line.terminal.volume()), cfg.bits()?)?)?,
            })
        }
        FoldlineCommand::Eval { time, .. } => to_value(&PointSpec::from(line.eval(&parse_rational(time)?)?)),
    }))
}

fn load_ray(path: &str) -> Result<(RayFile, Ray)> {
    RayFile::load(&read(path)?)
}

fn write_or_return(out: &Option<String>, body: String, summary: Value) -> Result<Output> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| OslError::Io(format!("{path}: {e}")))?;
            Ok(Output::Json(summary))
        }
        None => Ok(Output::Text(body)),
    }
}

/// One row per fold start plus the end: step, simplex id, normalized lengths
/// and distance from the base.
fn plot_rows(cfg: &Config, ray: &Ray) -> Result<Vec<(usize, String, Vec<Q>, Value)>> {
    let bits = cfg.bits()?;
    let times: Vec<Q> = ray.folds.iter().map(|f| f.time.clone()).chain(std::iter::once(ray.extent())).collect();
    times
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let (_, p) = ray.eval_local(t)?;
            let id = canonical_form(&p.graph).iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(".");
            let v = p.volume();
            let lengths = p.lengths.iter().map(|x| x / &v).collect();
            let d = numeric::ln_rational(&(ray.base.volume() / ray.volume_at(t)?), bits)?;
            Ok((k, id, lengths, cfg.float(&d)?))
        })
        .collect()
}

fn ray(cfg: &Config, cmd: &RayCommand) -> Result<Output> {
    match cmd {
        RayCommand::Generate { rank, horizon, mode, out } => {
            let mode = match mode {
                ModeArg::Full => RayMode::Full,
                ModeArg::Theta => RayMode::Theta,
            };
            let (file, ray) = RayFile::generate(&RayConfig::new(*rank, mode), *horizon)?;
            let summary = json!({
                "rank": rank, "horizon": horizon, "blocks": ray.blocks.len(), "folds": ray.folds.len(),
                "extent": format_rational(&ray.extent()),
            });
            write_or_return(out, file.to_json() + "\n", summary)
        }
        RayCommand::Certify { ray, from, to } => {
            let (_, ray) = load_ray(ray)?;
            let s = from.as_deref().map(parse_rational).transpose()?.unwrap_or_default();
            let t = to.as_deref().map(parse_rational).transpose()?.unwrap_or_else(|| ray.extent());
            let c = certify_geodesic_with_precision(&ray, &s, &t, cfg.bits()?)?;
            let mut v = to_value(&c);
            if cfg.backend == Backend::Rational {
                v["distance"] = Value::Null;
            } else {
                v["distance"] = json!({ "value": c.distance, "bits": cfg.bits()? });
            }
            Ok(Output::Json(v))
        }
        RayCommand::Find { ray, target, turn, eps, budget } => {
            let (_, ray) = load_ray(ray)?;
            let point = point_from_json(&read(target)?)?;
            let target = match turn {
                Some(t) => Target::Tangent(TangentDatum::new(point, Turn::parse(t)?)?),
                None => Target::Point(point),
            };
            let hit = density_search(&ray, &target, &parse_rational(eps)?, *budget)?;
            Ok(Output::Json(json!({
                "fold": hit.fold,
                "milestone": hit.frame,
                "time": format_rational(&hit.time),
                "translation": to_value(&hit.translation),
                "lengths": strings(&hit.lengths),
                "squared_distance": format_rational(&hit.squared_distance),
                "distance": hit.distance,
                "scanned": hit.scanned,
                "translation_identity": translation_identity(&ray, &hit)?,
            })))
        }
        RayCommand::Plotdata { ray } => {
            let (_, ray) = load_ray(ray)?;
            let rows = plot_rows(cfg, &ray)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from("step,simplex,lengths,distance\n");
                    for (k, id, lengths, d) in rows {
                        let d = d.get("value").and_then(Value::as_str).unwrap_or("").to_string();
                        s += &format!("{k},{id},{},{d}\n", strings(&lengths).join(";"));
                    }
                    Ok(Output::Text(s))
                }
                Format::Json => Ok(Output::Json(Value::Array(
                    rows.into_iter()
                        .map(|(k, id, lengths, d)| json!({ "step": k, "simplex": id, "lengths": strings(&lengths), "distance": d }))
                        .collect(),
                ))),
            }
        }
    }
}

fn matrices(cmd: &MatricesCommand) -> Result<Output> {
    let m = match cmd {
        MatricesCommand::Fold { i, j, dim } => fold_matrix(*i, *j, *dim)?,
        MatricesCommand::Unfold { i, j, dim } => unfold_matrix(*i, *j, *dim)?,
    };
    Ok(Output::Json(json!({ "matrix": matrix_rows(&m), "determinant": m.determinant().to_string() })))
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let cfg = &cli.config;
    cfg.bits()?;
    if cfg.format == Some(Format::Csv) && !matches!(cli.command, Command::Ray(RayCommand::Plotdata { .. })) {
        return Err(OslError::Usage("csv output is only available for ray plotdata".into()));
    }
    match &cli.command {
        Command::Brun(c) => brun(c),
        Command::PfSample { target, eps, cap } => pf_sample(cfg, target, eps, *cap),
        Command::Decompose { graph, turn } => decompose(graph, turn),
        Command::Foldline(c) => foldline(cfg, c),
        Command::Ray(c) => ray(cfg, c),
        Command::Matrices(c) => matrices(c),
    }
}

fn category_name(c: Category) -> &'static str {
    match c {
        Category::Usage => "usage",
        Category::Domain => "domain",
        Category::NotFound => "not-found",
    }
}

fn report(err: &mut dyn Write, e: &OslError) -> i32 {
    let c = e.category();
    let body = json!({ "error": { "category": category_name(c), "kind": e.kind(), "message": e.to_string() } });
    let _ = writeln!(err, "{body}");
    c.exit_code()
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and a JSON error object to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            return report(err, &OslError::Usage(msg.trim().trim_start_matches("error: ").to_string()));
        }
    };
    match dispatch(&cli) {
        Ok(Output::Json(v)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("values serialize"));
            0
        }
        Ok(Output::Text(s)) => {
            let _ = write!(out, "{s}");
            0
        }
        Err(e) => report(err, &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("osl").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn brun_expand_example() {
        let (code, out, _) = call(&["brun", "expand", "--vector", "5/10,3/10,2/10", "--steps", "1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["symbols"], json!([[1, 2]]));
        assert_eq!(v["iterates"][1], json!(["1/5", "3/10", "1/5"]));
    }

    #[test]
    fn error_categories() {
        let (code, _, err) = call(&["matrices", "fold", "--i", "1", "--j", "1", "--dim", "3"]);
        assert_eq!(code, 3);
        let v: Value = serde_json::from_str(&err).unwrap();
        assert_eq!(v["error"]["category"], "domain");
        assert_eq!(call(&["matrices", "fold", "--bogus"]).0, 2);
        assert_eq!(call(&["--backend", "rational", "--precision-bits", "128", "matrices", "fold", "--i", "1", "--j", "2", "--dim", "2"]).0, 2);
    }
}
