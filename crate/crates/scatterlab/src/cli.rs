//! The `scatterlab` command line.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scatterlab_core::brokenlines::{
    central_endpoints, enumerate, genus_table, theta_at, unbounded_endpoints, with_generic, CurveContribution, TraceOptions, TropCurveType,
};
use scatterlab_core::geom::Pt;
use scatterlab_core::mirrormap::{gv_crosscheck, open_closed_maps, theorem_check};
use scatterlab_core::scattering::{complete_to_order, consistency_check, initial_structure, transport_path, ScatteringDiagram};
use scatterlab_core::surface::{blow_up, builtin_f1, builtin_p2, FanPicture};
use scatterlab_core::Rat;
use serde_json::json;

use crate::exec::Pool;
use crate::formats::{self, Viewport};
use crate::{fixtures, verify};

#[derive(Parser, Debug)]
#[command(name = "scatterlab", version, about = "Scattering diagrams, broken lines and mirror maps for toric del Pezzo surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a consistent scattering diagram and dump its walls.
    Scatter {
        #[command(flatten)]
        common: Common,
        /// Print the fan picture document instead of the diagram.
        #[arg(long)]
        fan_picture: bool,
    },
    /// Theta function and its broken lines at a point.
    Theta {
        #[command(flatten)]
        common: Common,
        /// Asymptotic charge `q` of `theta_q`.
        #[arg(long, default_value_t = 1)]
        q: i64,
    },
    /// The superpotential `theta_1`, with the mirror-map comparison for P^2.
    Potential {
        #[command(flatten)]
        common: Common,
    },
    /// Transport the reference potential along the reference path.
    Transport {
        #[command(flatten)]
        common: Common,
        /// Replay the printed wall sequence instead of a generated diagram.
        #[arg(long)]
        replay: bool,
    },
    /// Closed and open mirror maps.
    MirrorMap {
        #[arg(long, default_value_t = 8)]
        terms: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Genus expansion of tropical curve multiplicities.
    Multiplicity {
        /// Vertex multiplicities, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "row")]
        vertices: Vec<i64>,
        /// Bounded leg weights, comma separated.
        #[arg(long, value_delimiter = ',')]
        legs: Vec<i64>,
        #[arg(long, default_value_t = 1)]
        aut: i64,
        /// Leg tangency `p` dividing the total.
        #[arg(long, default_value_t = 1)]
        p: i64,
        /// A reference row `p,q` of the two-point tables instead.
        #[arg(long)]
        row: Option<String>,
        #[arg(long, default_value_t = 8)]
        hbar_order: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Blow up a corner of a fan picture, or run the Gopakumar-Vafa chain.
    Blowup {
        #[command(flatten)]
        common: Common,
        /// Unbounded cell whose corner is blown up.
        #[arg(long, default_value_t = 0)]
        cell: i64,
        /// Degree `d` of `dL - C` for the genus-1 Gopakumar-Vafa chain.
        #[arg(long)]
        gv_degree: Option<i64>,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        n0: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        n1: String,
    },
    /// Run golden verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Draw a diagram as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        /// `x0,y0,x1,y1` in chart coordinates.
        #[arg(long, allow_hyphen_values = true, default_value = "-3,-2,4,8")]
        viewport: String,
        #[arg(long, default_value_t = 60)]
        scale: i64,
        /// Overlay the broken lines of `theta_q` at the chamber point.
        #[arg(long)]
        lines: Option<i64>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// `p2`, `f1` or a fan picture JSON file.
    #[arg(long, default_value = "p2")]
    surface: String,
    #[arg(long, default_value_t = 3)]
    order: u32,
    #[arg(long, default_value_t = 0)]
    hbar_order: u32,
    /// Largest `|x|`-exponent kept when expanding negative powers.
    #[arg(long, default_value_t = 64)]
    x_window: i32,
    /// `unbounded`, `central` or a point `x,y`.
    #[arg(long, allow_hyphen_values = true, default_value = "unbounded")]
    chamber: String,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceChoice {
    P2,
    F1,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChamberChoice {
    Unbounded,
    Central,
    Point(Pt),
}

/// Settings shared by the diagram-based subcommands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub surface: SurfaceChoice,
    pub order: u32,
    pub hbar_order: u32,
    pub x_window: i32,
    pub chamber: ChamberChoice,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn parse_point(s: &str) -> Result<Pt> {
    let (x, y) = s.split_once(',').ok_or_else(|| anyhow!("expected x,y"))?;
    Ok(Pt::new(formats::parse_rat(x)?, formats::parse_rat(y)?))
}

impl RunConfig {
    fn from_common(c: &Common) -> Result<RunConfig, UsageError> {
        let surface = match c.surface.as_str() {
            "p2" => SurfaceChoice::P2,
            "f1" => SurfaceChoice::F1,
            path => SurfaceChoice::File(PathBuf::from(path)),
        };
        let chamber = match c.chamber.as_str() {
            "unbounded" => ChamberChoice::Unbounded,
            "central" => ChamberChoice::Central,
            p => ChamberChoice::Point(parse_point(p).map_err(|e| UsageError(format!("--chamber {}: {}", p, e)))?),
        };
        if c.x_window < 0 {
            return Err(UsageError(format!("--x-window {}: must be non-negative", c.x_window)));
        }
        Ok(RunConfig { surface, order: c.order, hbar_order: c.hbar_order, x_window: c.x_window, chamber, output: c.output.clone(), format: c.format })
    }

    fn fan_picture(&self) -> Result<FanPicture> {
        match &self.surface {
            SurfaceChoice::P2 => Ok(builtin_p2()),
            SurfaceChoice::F1 => Ok(builtin_f1()),
            SurfaceChoice::File(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                formats::fan_picture_from_json(&v)
            }
        }
    }
}

/// A usage problem detected after argument parsing; exits with code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Ok,
    Failed,
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn build(cfg: &RunConfig, pool: &Pool) -> Result<ScatteringDiagram> {
    let f = cfg.fan_picture()?;
    let (d, _) = complete_to_order(&initial_structure(&f, cfg.hbar_order), cfg.order, pool).map_err(|e| anyhow!("{}", e))?;
    Ok(d)
}

fn point_of(cfg: &RunConfig) -> Option<Pt> {
    match &cfg.chamber {
        ChamberChoice::Point(p) => Some(p.clone()),
        _ => None,
    }
}

fn endpoints<'a>(cfg: &RunConfig, d: &'a ScatteringDiagram) -> Box<dyn Iterator<Item = Pt> + 'a> {
    match &cfg.chamber {
        ChamberChoice::Unbounded => Box::new(unbounded_endpoints(d)),
        ChamberChoice::Central => Box::new(central_endpoints(d)),
        ChamberChoice::Point(p) => Box::new(std::iter::once(p.clone())),
    }
}

fn check_format(flag: Format, allowed: &[Format]) -> Result<(), UsageError> {
    if allowed.contains(&flag) {
        Ok(())
    } else {
        Err(UsageError(format!("--format {:?}: not supported by this subcommand", flag).to_lowercase()))
    }
}

fn cmd_scatter(cfg: &RunConfig, fan_only: bool, pool: &Pool) -> Result<Outcome> {
    check_format(cfg.format, &[Format::Text, Format::Json])?;
    if fan_only {
        let f = cfg.fan_picture()?;
        emit(&cfg.output, &pretty(&formats::fan_picture_json(&f)))?;
        return Ok(Outcome::Ok);
    }
    let d = build(cfg, pool)?;
    let text = match cfg.format {
        Format::Json => pretty(&formats::diagram_json(&d)),
        _ => {
            let v = formats::diagram_json(&d);
            let mut s = format!("{} order {} walls {}\n", d.surface.name, d.order, d.walls.len());
            for w in v["walls"].as_array().into_iter().flatten() {
                s.push_str(&format!("{} {} {}\n", w["base"], w["dir"], w["text"].as_str().unwrap_or("")));
            }
            s
        }
    };
    emit(&cfg.output, &text)?;
    Ok(Outcome::Ok)
}

fn cmd_theta(cfg: &RunConfig, q: i64, pool: &Pool) -> Result<Outcome> {
    check_format(cfg.format, &[Format::Text, Format::Json])?;
    if q < 0 {
        bail!(UsageError(format!("--q {}: must be non-negative", q)));
    }
    let d = build(cfg, pool)?;
    let opts = TraceOptions::new(cfg.order, cfg.hbar_order);
    let rank = d.surface.picard_rank();
    let (p, lines) = with_generic(endpoints(cfg, &d), |p| Ok((p.clone(), enumerate(&d, p, q, &opts, pool)?))).map_err(|e| anyhow!("{}", e))?;
    let th = theta_at(&d, &p, q, &opts, pool).map_err(|e| anyhow!("{}", e))?;
    let text = match cfg.format {
        Format::Json => pretty(&json!({
            "endpoint": formats::pt_json(&p),
            "q": q,
            "theta": formats::series_json(&th),
            "text": th.to_text(),
            "broken_lines": formats::broken_lines_json(&lines, rank),
        })),
        _ => format!("theta_{} at {:?} = {}\n{} broken lines\n", q, p, th.to_text(), lines.len()),
    };
    emit(&cfg.output, &text)?;
    Ok(Outcome::Ok)
}

fn cmd_potential(cfg: &RunConfig, pool: &Pool) -> Result<Outcome> {
    check_format(cfg.format, &[Format::Text, Format::Json])?;
    let d = build(cfg, pool)?;
    let opts = TraceOptions::new(cfg.order, cfg.hbar_order);
    let w = with_generic(endpoints(cfg, &d), |p| theta_at(&d, p, 1, &opts, pool)).map_err(|e| anyhow!("{}", e))?;
    let is_p2 = cfg.surface == SurfaceChoice::P2 && cfg.chamber == ChamberChoice::Unbounded;
    let check = if is_p2 { Some(theorem_check(&w, cfg.order / 3).map_err(|e| anyhow!("{}", e))?) } else { None };
    let text = match cfg.format {
        Format::Json => pretty(&json!({
            "potential": formats::series_json(&w),
            "text": w.to_text(),
            "mirror_map_agrees": check.as_ref().map(|c| c.ok()),
        })),
        _ => {
            let mut s = format!("W = {}\n", w.to_text());
            if let Some(c) = &check {
                s.push_str(&format!("W/y = M(Q) through Q^{}: {}\n", c.order, if c.ok() { "yes" } else { "no" }));
            }
            s
        }
    };
    emit(&cfg.output, &text)?;
    Ok(match check {
        Some(c) if !c.ok() => Outcome::Failed,
        _ => Outcome::Ok,
    })
}

fn cmd_transport(cfg: &RunConfig, replay: bool, pool: &Pool) -> Result<Outcome> {
    check_format(cfg.format, &[Format::Text, Format::Json])?;
    if cfg.surface != SurfaceChoice::P2 {
        bail!(UsageError(String::from("--surface: transport follows the reference path of p2")));
    }
    if (cfg.x_window as u32) < cfg.order {
        bail!(UsageError(format!("--x-window {}: must be at least --order {}", cfg.x_window, cfg.order)));
    }
    let (lo, hi) = (-cfg.x_window, cfg.x_window);
    let w = if replay {
        fixtures::replay(cfg.order as i32, lo, hi).map_err(|e| anyhow!("{}", e))?
    } else {
        let d = build(cfg, pool)?;
        let w0 = fixtures::start_potential(cfg.order as i32).with_window(lo, hi);
        transport_path(&w0, &fixtures::reference_path(), &d).map_err(|e| anyhow!("{}", e))?
    };
    let text = match cfg.format {
        Format::Json => pretty(&json!({"series": formats::series_json(&w), "text": w.to_text(), "window_reached": w.touches_window()})),
        _ => format!("{}\n", w.to_text()),
    };
    emit(&cfg.output, &text)?;
    Ok(Outcome::Ok)
}

fn cmd_mirror_map(terms: u32, format: Format, output: &Option<PathBuf>) -> Result<Outcome> {
    check_format(format, &[Format::Text, Format::Json])?;
    if terms == 0 {
        bail!(UsageError(String::from("--terms 0: need at least one term")));
    }
    let maps = open_closed_maps(terms).map_err(|e| anyhow!("{}", e))?;
    let m: Vec<Rat> = (0..=terms as i32).map(|k| maps.m.t_coeff(k)).collect();
    let text = match format {
        Format::Json => pretty(&json!({
            "M": m.iter().map(formats::rat_json).collect::<Vec<_>>(),
            "F": formats::series_json(&maps.f),
            "Q_of_z": formats::series_json(&maps.q_of_z),
            "z_of_Q": formats::series_json(&maps.z_of_q),
        })),
        _ => {
            let cs: Vec<String> = m.iter().map(|c| c.to_string()).collect();
            format!("{}\n", cs.join(" "))
        }
    };
    emit(output, &text)?;
    Ok(Outcome::Ok)
}

fn parse_row(s: &str) -> Result<(i64, i64)> {
    let (p, q) = s.split_once(',').ok_or_else(|| anyhow!("expected p,q"))?;
    Ok((p.trim().parse()?, q.trim().parse()?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_multiplicity(vertices: &[i64], legs: &[i64], aut: i64, p: i64, row: &Option<String>, hbar_order: u32, format: Format, output: &Option<PathBuf>) -> Result<Outcome> {
    check_format(format, &[Format::Text, Format::Csv, Format::Json])?;
    let (curves, p, label) = match row {
        Some(r) => {
            let (rp, rq) = parse_row(r).map_err(|e| UsageError(format!("--row {}: {}", r, e)))?;
            let found = fixtures::genus_rows().into_iter().find(|x| x.p == rp && x.q == rq);
            let row = found.ok_or_else(|| UsageError(format!("--row {}: no such reference row", r)))?;
            (row.curves, rp, format!("R_{},{}", rp, rq))
        }
        None => {
            if vertices.is_empty() || aut <= 0 || p <= 0 || vertices.iter().chain(legs).any(|v| *v <= 0) {
                bail!(UsageError(String::from("--vertices: need positive vertex multiplicities, leg weights, --aut and --p")));
            }
            let t = TropCurveType::new(vertices.to_vec(), legs.to_vec(), aut);
            (vec![(Rat::one(), CurveContribution::Type(t))], p, String::from("R"))
        }
    };
    let table = genus_table(&curves, p, hbar_order).map_err(|e| anyhow!("{}", e))?;
    let text = match format {
        Format::Json => pretty(&json!({"label": label, "genus": table.iter().map(formats::rat_json).collect::<Vec<_>>()})),
        Format::Csv => {
            let mut s = String::from("genus,value\n");
            for (g, v) in table.iter().enumerate() {
                s.push_str(&format!("{},{}\n", g, v));
            }
            s
        }
        _ => table.iter().enumerate().map(|(g, v)| format!("{}^{} = {}\n", label, g, v)).collect(),
    };
    emit(output, &text)?;
    Ok(Outcome::Ok)
}

fn cmd_blowup(cfg: &RunConfig, cell: i64, gv: Option<i64>, n0: &str, n1: &str, pool: &Pool) -> Result<Outcome> {
    check_format(cfg.format, &[Format::Text, Format::Json])?;
    if let Some(d) = gv {
        if d < 1 {
            bail!(UsageError(format!("--gv-degree {}: must be positive", d)));
        }
        let n0 = formats::parse_rat(n0).map_err(|e| UsageError(format!("--n0: {}", e)))?;
        let n1 = formats::parse_rat(n1).map_err(|e| UsageError(format!("--n1: {}", e)))?;
        let r = gv_crosscheck(&n0, &n1, d);
        let text = match cfg.format {
            Format::Json => pretty(&json!({"N0": formats::rat_json(&r.n0), "N1": formats::rat_json(&r.n1), "R1": formats::rat_json(&r.r_genus1)})),
            _ => format!("N0 = {}\nN1 = {}\nR1 = {}\n", r.n0, r.n1, r.r_genus1),
        };
        emit(&cfg.output, &text)?;
        return Ok(Outcome::Ok);
    }
    let f = cfg.fan_picture()?;
    let (b, pull) = blow_up(&f, cell).map_err(|e| UsageError(format!("--cell {}: {}", cell, e)))?;
    let (d, _) = complete_to_order(&initial_structure(&b, cfg.hbar_order), cfg.order, pool).map_err(|e| anyhow!("{}", e))?;
    let consistent = consistency_check(&d, pool).map_err(|e| anyhow!("{}", e))?.all_ok();
    let exc = verify::exceptional_wall(&d);
    let text = match cfg.format {
        Format::Json => pretty(&json!({
            "fan_picture": formats::fan_picture_json(&b),
            "old_rank": pull.old_rank,
            "consistent": consistent,
            "exceptional_wall": exc.as_ref().map(formats::series_json),
        })),
        _ => format!(
            "kinks {:?} -> {:?}\nconsistent to order {}: {}\nexceptional wall: {}\n",
            f.vertex_kinks(),
            b.vertex_kinks(),
            cfg.order,
            consistent,
            exc.map_or(String::from("none"), |s| s.to_text())
        ),
    };
    emit(&cfg.output, &text)?;
    Ok(if consistent { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_verify(suite: &str, format: Format, output: &Option<PathBuf>, pool: &Pool) -> Result<Outcome> {
    check_format(format, &[Format::Text, Format::Json])?;
    let suites = verify::Suite::parse(suite).ok_or_else(|| UsageError(format!("--suite {}: unknown suite", suite)))?;
    let bench = verify::Bench::new(pool);
    let reports: Vec<verify::SuiteReport> = suites.iter().map(|s| verify::run_suite(*s, &bench)).collect();
    let ok = reports.iter().all(|r| r.ok());
    let text = match format {
        Format::Json => pretty(&json!({"ok": ok, "suites": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()})),
        _ => reports.iter().map(|r| r.to_text()).collect(),
    };
    emit(output, &text)?;
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn parse_viewport(s: &str, scale: i64) -> Result<Viewport> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 || scale <= 0 {
        bail!("expected x0,y0,x1,y1 and a positive scale");
    }
    let v: Vec<Rat> = parts.iter().map(|p| formats::parse_rat(p)).collect::<Result<_>>()?;
    if v[0] >= v[2] || v[1] >= v[3] {
        bail!("empty viewport");
    }
    Ok(Viewport { x0: v[0].clone(), y0: v[1].clone(), x1: v[2].clone(), y1: v[3].clone(), scale })
}

fn cmd_render(cfg: &RunConfig, viewport: &str, scale: i64, lines: Option<i64>, pool: &Pool) -> Result<Outcome> {
    check_format(cfg.format, &[Format::Text, Format::Svg])?;
    let vp = parse_viewport(viewport, scale).map_err(|e| UsageError(format!("--viewport {}: {}", viewport, e)))?;
    let d = build(cfg, pool)?;
    let overlay = match lines {
        Some(q) => {
            let opts = TraceOptions::new(cfg.order, cfg.hbar_order);
            match point_of(cfg) {
                Some(p) => enumerate(&d, &p, q, &opts, pool),
                None => with_generic(endpoints(cfg, &d), |p| enumerate(&d, p, q, &opts, pool)),
            }
            .map_err(|e| anyhow!("{}", e))?
        }
        None => Vec::new(),
    };
    emit(&cfg.output, &formats::render_svg(&d, &vp, &overlay))?;
    Ok(Outcome::Ok)
}

fn dispatch(cli: Cli, pool: &Pool) -> Result<Outcome> {
    match cli.command {
        Command::Scatter { common, fan_picture } => cmd_scatter(&RunConfig::from_common(&common)?, fan_picture, pool),
        Command::Theta { common, q } => cmd_theta(&RunConfig::from_common(&common)?, q, pool),
        Command::Potential { common } => cmd_potential(&RunConfig::from_common(&common)?, pool),
        Command::Transport { common, replay } => cmd_transport(&RunConfig::from_common(&common)?, replay, pool),
        Command::MirrorMap { terms, format, output } => cmd_mirror_map(terms, format, &output),
        Command::Multiplicity { vertices, legs, aut, p, row, hbar_order, format, output } => {
            cmd_multiplicity(&vertices, &legs, aut, p, &row, hbar_order, format, &output)
        }
        Command::Blowup { common, cell, gv_degree, n0, n1 } => cmd_blowup(&RunConfig::from_common(&common)?, cell, gv_degree, &n0, &n1, pool),
        Command::Verify { suite, format, output } => cmd_verify(&suite, format, &output, pool),
        Command::Render { common, viewport, scale, lines } => cmd_render(&RunConfig::from_common(&common)?, &viewport, scale, lines, pool),
    }
}

/// Runs the command line; returns 0 on success, 1 when a verification or
/// computation fails and 2 on usage errors.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let pool = Pool::from_env();
    match dispatch(cli, &pool) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            eprintln!("error: {:#}", e);
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}
