//! Command-line front end: energies, asymptotic means, extensions and trace
//! checks on grid-map files, emitting CSV rows on stdout and JSON reports
//! on request.
//!
//! Exit codes: 0 success, 1 usage, 2 schema, 3 domain, 4 resolution.

mod repro;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

use w11ext_core::corpus::{generate, CorpusSpec, Family};
use w11ext_core::dyadic::{
    cube_extension, halfspace_extension, strip_extension, CubeBoundary, StripParams,
};
use w11ext_core::energy::{
    asymptotic_mean, integral_dist_to_point, small_r_sweep, theta, Quadrature,
};
use w11ext_core::error::{Error, Result};
use w11ext_core::num::Norm;
use w11ext_core::trace::trace_inequality_check;
use w11ext_core::{GridMap, Point, SlabMap};

#[derive(Parser)]
#[command(
    name = "w11ext",
    about = "Nonlocal energies and W^{1,1} trace/extension constructions for manifold-valued grid maps",
    version
)]
struct Cli {
    /// Worker threads (overrides W11EXT_THREADS; default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the CSV rows here instead of stdout
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integral of dist(u, b) over R^d (b defaults to the tail)
    Energy {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated coordinates of b
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Normalized nonlocal energy Theta(R) over a radius list
    Theta {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated cutoff radii
        #[arg(long = "R")]
        radii: String,
        #[arg(long, default_value = "euclidean")]
        norm: String,
        /// Supersampling factor per axis
        #[arg(long, default_value_t = 1)]
        supersample: u32,
        /// Treat the list as a decreasing small-r sweep (enforces r >= 2h)
        #[arg(long, default_value_t = false)]
        sweep: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Asymptotic mean along an increasing radius schedule
    Bbm {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated increasing radii
        #[arg(long)]
        schedule: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Join two boundary maps across a strip of height 2L
    ExtendStrip {
        #[arg(long)]
        u0: PathBuf,
        #[arg(long)]
        u1: PathBuf,
        #[arg(long = "L")]
        l: f64,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long = "h-fine")]
        h_fine: f64,
        /// Write the smoothed slab here
        #[arg(long)]
        slab: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Extend boundary data into the unit cube (constant p off two faces)
    ExtendCube {
        /// Data on the lo face of the transverse axis
        #[arg(long)]
        bottom: Option<PathBuf>,
        /// Data on the hi face of the transverse axis
        #[arg(long)]
        top: Option<PathBuf>,
        /// Base point p, comma-separated coordinates
        #[arg(long)]
        point: String,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long = "h-fine")]
        h_fine: f64,
        #[arg(long)]
        slab: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Extend a map to the half space via its asymptotic mean
    ExtendHalfspace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "L")]
        l: f64,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long = "h-fine")]
        h_fine: f64,
        /// Radius schedule for the asymptotic mean (defaults to multiples
        /// of the window diameter)
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        slab: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Trace-inequality ratios of a slab against a boundary map
    TraceCheck {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        u: PathBuf,
        /// Comma-separated radii
        #[arg(long)]
        r: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Generate a deterministic fixture map
    GenCorpus {
        /// constant | single-bump | multi-bump:k | smooth-sampled | two-valued-step
        #[arg(long)]
        family: String,
        #[arg(long)]
        manifold: String,
        /// Cells per axis, comma- or x-separated (e.g. 32 or 16x16)
        #[arg(long)]
        counts: String,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the fixed reproduction pipeline into a directory
    Repro {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::schema(format!("bad {what} entry {tok:?}")))
        })
        .collect()
}

fn parse_counts(s: &str) -> Result<Vec<usize>> {
    s.split(|c| c == ',' || c == 'x')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::schema(format!("bad cell count {tok:?}")))
        })
        .collect()
}

fn parse_norm(s: &str) -> Result<Norm> {
    match s {
        "euclidean" => Ok(Norm::Euclidean),
        "sup" => Ok(Norm::Sup),
        other => Err(Error::schema(format!("unknown norm {other:?} (euclidean or sup)"))),
    }
}

struct Emitter {
    rows: Vec<(String, String)>,
}

impl Emitter {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn row(&mut self, name: impl Into<String>, value: impl std::fmt::Display) {
        self.rows.push((name.into(), value.to_string()));
    }

    fn finish<T: Serialize>(self, out: &OutputArgs, report: &T) -> Result<()> {
        let mut csv = String::from("name,value\n");
        for (k, v) in &self.rows {
            csv.push_str(&format!("{k},{v}\n"));
        }
        match &out.csv {
            Some(path) => std::fs::write(path, csv)
                .map_err(|e| Error::schema(format!("write {}: {e}", path.display())))?,
            None => print!("{csv}"),
        }
        if let Some(path) = &out.report {
            let text = serde_json::to_string_pretty(report)
                .expect("report serialization cannot fail")
                + "\n";
            std::fs::write(path, text)
                .map_err(|e| Error::schema(format!("write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Energy { input, point, out } => {
            let u = GridMap::read_file(&input)?;
            let b = match point {
                Some(s) => Point(parse_f64_list(&s, "point")?),
                None => u.tail_point(),
            };
            let e = integral_dist_to_point(&u, &b)?;
            #[derive(Serialize)]
            struct Report {
                manifold: String,
                point: Vec<f64>,
                energy: w11ext_core::energy::EnergyValue,
            }
            let mut em = Emitter::new();
            em.row("integral_dist_to_point", e.value);
            em.finish(&out, &Report { manifold: u.manifold().id(), point: b.0, energy: e })
        }
        Cmd::Theta { input, radii, norm, supersample, sweep, out } => {
            let u = GridMap::read_file(&input)?;
            let rs = parse_f64_list(&radii, "radius")?;
            let norm = parse_norm(&norm)?;
            let quad = Quadrature::from_factor(supersample);
            let values: Vec<(f64, f64)> = if sweep {
                small_r_sweep(&u, &rs, norm, quad)?
            } else {
                rs.iter()
                    .map(|&r| Ok((r, theta(&u, r, norm, quad)?.value)))
                    .collect::<Result<_>>()?
            };
            #[derive(Serialize)]
            struct Report {
                norm: Norm,
                quadrature: Quadrature,
                values: Vec<(f64, f64)>,
            }
            let mut em = Emitter::new();
            for (r, v) in &values {
                em.row(format!("theta@{r}"), v);
            }
            em.finish(&out, &Report { norm, quadrature: quad, values })
        }
        Cmd::Bbm { input, schedule, out } => {
            let u = GridMap::read_file(&input)?;
            let rs = parse_f64_list(&schedule, "schedule")?;
            let rep = asymptotic_mean(&u, &rs)?;
            let mut em = Emitter::new();
            em.row("lhs", rep.lhs);
            for (k, r) in rep.big_r.iter().enumerate() {
                em.row(format!("rhs@{r}"), rep.rhs[k]);
            }
            em.finish(&out, &rep)
        }
        Cmd::ExtendStrip { u0, u1, l, n_max, h_fine, slab, out } => {
            let a = GridMap::read_file(&u0)?;
            let b = GridMap::read_file(&u1)?;
            let params = StripParams { l, n_max, h_fine, schedule: Default::default() };
            let ext = strip_extension(&a, &b, &params)?;
            if let Some(path) = slab {
                ext.slab.write_file(&path)?;
            }
            let mut em = Emitter::new();
            em.row("gamma", ext.report.gamma);
            em.row("gradient_energy", ext.report.gradient_energy);
            em.row("jump_total", ext.report.jump.total);
            em.row("jump_interface", ext.report.jump.interface);
            em.row("jump_parallel", ext.report.jump.parallel);
            em.row("jump_perpendicular", ext.report.jump.perpendicular);
            em.row("ratio_construction", ext.report.ratio_construction);
            em.finish(&out, &ext.report)
        }
        Cmd::ExtendCube { bottom, top, point, n_max, h_fine, slab, out } => {
            let p = Point(parse_f64_list(&point, "point")?);
            let bottom = bottom.map(|p| GridMap::read_file(&p)).transpose()?;
            let top = top.map(|p| GridMap::read_file(&p)).transpose()?;
            let d = bottom
                .as_ref()
                .or(top.as_ref())
                .map(|g| g.dim())
                .ok_or_else(|| Error::domain("extend-cube needs at least one data face"))?;
            let mut faces: Vec<Option<GridMap>> = vec![None; 2 * (d + 1)];
            faces[2 * d] = bottom;
            faces[2 * d + 1] = top;
            let boundary = CubeBoundary { faces };
            let (slab_map, rep) =
                cube_extension(&boundary, &p, n_max, h_fine, &Default::default())?;
            if let Some(path) = slab {
                slab_map.write_file(&path)?;
            }
            let mut em = Emitter::new();
            em.row("boundary_l1", rep.boundary_l1);
            em.row("gradient_energy", rep.gradient_energy);
            em.row("ratio", rep.ratio);
            em.finish(&out, &rep)
        }
        Cmd::ExtendHalfspace { input, l, n_max, h_fine, schedule, slab, out } => {
            let u = GridMap::read_file(&input)?;
            let rs = schedule.map(|s| parse_f64_list(&s, "schedule")).transpose()?;
            let params = StripParams { l, n_max, h_fine, schedule: Default::default() };
            let (slab_map, rep) = halfspace_extension(&u, &params, rs.as_deref())?;
            if let Some(path) = slab {
                slab_map.write_file(&path)?;
            }
            let mut em = Emitter::new();
            em.row("bbm_lhs", rep.bbm.lhs);
            em.row("theta_limit", rep.theta_limit);
            em.row("gradient_energy", rep.strip.gradient_energy);
            em.row("ratio_vs_theta_limit", rep.ratio_vs_theta_limit);
            em.finish(&out, &rep)
        }
        Cmd::TraceCheck { input, u, r, out } => {
            let slab = SlabMap::read_file(&input)?;
            let boundary = GridMap::read_file(&u)?;
            let rs = parse_f64_list(&r, "radius")?;
            let rep = trace_inequality_check(&slab, &boundary, &rs)?;
            let mut em = Emitter::new();
            for (k, r) in rep.r.iter().enumerate() {
                em.row(format!("ratio_pairs@{r}"), rep.ratio_boundary_pairs[k]);
                em.row(format!("ratio_to_slab@{r}"), rep.ratio_boundary_to_slab[k]);
            }
            em.finish(&out, &rep)
        }
        Cmd::GenCorpus { family, manifold, counts, h, seed, out } => {
            let spec = CorpusSpec {
                family: Family::parse(&family)?,
                manifold_id: manifold,
                counts: parse_counts(&counts)?,
                h,
                origin: None,
                seed,
            };
            let u = generate(&spec)?;
            u.write_file(&out)?;
            Ok(())
        }
        Cmd::Repro { seed, out } => {
            let written = repro::run(seed, &out)?;
            for name in written {
                println!("wrote {name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("W11EXT_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
