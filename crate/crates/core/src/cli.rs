//! Command-line front end. Exit codes: 0 success, 1 usage or input error, 2 numeric failure.

use crate::blaschke::{center_map, enumerate_boundary_markings};
use crate::census::{Census, CensusError};
use crate::dynamics::{default_windows, extract_schemes, label_basins, GenPolyMap, DEFAULT_MAX_ITER};
use crate::hubbard::build_tree;
use crate::moduli::{
    cubic_relation_residual, index_sum, lambdas_from_x, m2fm_residual, x_from_lambdas, MultiplierTriple,
    TotallyMarkedPoint,
};
use crate::parallel::{self, Execution};
use crate::poly::C64;
use crate::render::{render_dynamical_plane, render_parameter_plane, write_ppm, Family};
use crate::scheme::MappingScheme;
use crate::symmetry::{aut, enumerate_antilinear, gamma0, gamma_order, real_form_classes};
use crate::window::Window;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const THREADS_ENV: &str = "SCHEMELAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "schemelab", version, about = "Hyperbolic mapping schemes, their models and pictures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count reduced schemes by weight.
    Census {
        #[arg(long)]
        max_weight: u32,
        /// Print every scheme.
        #[arg(long)]
        list: bool,
        /// Print rows "w N_tree N1 N_c N" (the default).
        #[arg(long)]
        table: bool,
    },
    /// Scheme file utilities.
    Scheme {
        #[command(subcommand)]
        action: SchemeAction,
    },
    /// Symmetry group orders and real forms of a scheme.
    Symmetry { file: PathBuf },
    /// Blaschke model space.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Abstract Hubbard trees.
    Hubbard {
        #[command(subcommand)]
        action: HubbardAction,
    },
    /// Fixed-point multiplier algebra of quadratic rational maps.
    Moduli {
        #[command(subcommand)]
        action: ModuliAction,
    },
    /// Full and reduced scheme of a hyperbolic map.
    ExtractScheme {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 512)]
        res: usize,
        /// One window for every vertex; defaults to a disk containing the filled Julia set.
        #[arg(long)]
        window: Option<Window>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Parameter-plane picture of a family.
    ///
    /// Colors: black all critical orbits bounded, grey (200,200,200) some escape,
    /// white all escape. For rational_a: white when a/2 falls into the orbit
    /// 0 <-> infinity, black otherwise, red at the excluded value a = 1.
    Render {
        family: Family,
        #[command(flatten)]
        raster: RasterArgs,
    },
    /// Filled Julia set in one fiber; black pixels have bounded orbits.
    Julia {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 0)]
        vertex: usize,
        #[command(flatten)]
        raster: RasterArgs,
    },
}

#[derive(Debug, Subcommand)]
enum SchemeAction {
    Validate { file: PathBuf },
    Reduce { file: PathBuf },
    Dot { file: PathBuf },
    Iso { a: PathBuf, b: PathBuf },
}

#[derive(Debug, Subcommand)]
enum ModelAction {
    /// Center map and its boundary markings.
    Center { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum HubbardAction {
    Build {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Subcommand)]
enum ModuliAction {
    /// Residuals of the fixed-point relations.
    Check {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// Multipliers from totally marked coordinates.
    X2l {
        #[arg(allow_hyphen_values = true, num_args = 3)]
        x: Vec<String>,
    },
    /// Both coordinate preimages of a multiplier triple.
    L2x {
        #[arg(allow_hyphen_values = true, num_args = 3)]
        lambda: Vec<String>,
    },
}

#[derive(Debug, Args)]
struct MapArgs {
    /// Lines "id : c0 c1 ..." with complex literals like 1.5-0.2i.
    #[arg(long)]
    map: PathBuf,
    /// Scheme file; without it every vertex is fixed with weight equal to its coefficient count.
    #[arg(long)]
    scheme: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RasterArgs {
    #[arg(long)]
    window: Option<Window>,
    /// WxH or N for a square.
    #[arg(long, default_value = "512x512")]
    res: String,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numeric(e: impl std::fmt::Display) -> Failure {
    Failure::Numeric(e.to_string())
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("bad complex number '{s}'");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

/// Coefficient lists per vertex id from "id : c0 c1 ..." lines.
pub fn parse_map_file(text: &str) -> Result<Vec<Vec<C64>>, String> {
    let mut rows = std::collections::BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (id, rest) = body
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected 'id : coefficients'", k + 1))?;
        let id: usize = id.trim().parse().map_err(|_| format!("line {}: bad id", k + 1))?;
        let coeffs = rest
            .split_whitespace()
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("line {}: {e}", k + 1))?;
        if rows.insert(id, coeffs).is_some() {
            return Err(format!("line {}: duplicate id {id}", k + 1));
        }
    }
    if rows.is_empty() || rows.keys().enumerate().any(|(i, &id)| i != id) {
        return Err("ids must be 0..n-1".into());
    }
    Ok(rows.into_values().collect())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_scheme(path: &Path) -> Result<MappingScheme, Failure> {
    MappingScheme::parse(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_map(args: &MapArgs) -> Result<GenPolyMap, Failure> {
    let coeffs = parse_map_file(&read(&args.map)?).map_err(|e| usage(format!("{}: {e}", args.map.display())))?;
    let scheme = match &args.scheme {
        Some(p) => read_scheme(p)?,
        None => {
            let pairs: Vec<(u32, usize)> = coeffs.iter().enumerate().map(|(i, c)| (c.len() as u32, i)).collect();
            MappingScheme::from_pairs(&pairs).map_err(usage)?
        }
    };
    GenPolyMap::new(scheme, coeffs).map_err(usage)
}

fn parse_res(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || usage(format!("bad resolution '{s}'"));
    let (w, h) = match s.split_once(['x', 'X']) {
        Some((w, h)) => (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?),
        None => {
            let n = s.parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

fn fmt_c(z: C64) -> String {
    // Adding 0.0 turns -0.0 into 0.0.
    format!("{:.12}{:+.12}i", z.re + 0.0, z.im + 0.0)
}

fn census_failure(e: CensusError) -> Failure {
    usage(e)
}

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok()
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    parallel::init_threads(threads_from_env());
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| usage(e);
    match cmd {
        Command::Census { max_weight, list, table } => {
            let census = Census::default();
            if list {
                for w in 1..=max_weight {
                    for (k, s) in census.all(w).map_err(census_failure)?.iter().enumerate() {
                        writeln!(out, "# w={w} #{k}").map_err(io)?;
                        write!(out, "{}", s.serialize()).map_err(io)?;
                    }
                }
            }
            if table || !list {
                writeln!(out, "# w N_tree N1 N_c N").map_err(io)?;
                for r in census.table(max_weight).map_err(census_failure)? {
                    writeln!(out, "{} {} {} {} {}", r.w, r.n_trees, r.n1_trees, r.n_connected, r.n_total).map_err(io)?;
                }
            }
        }
        Command::Scheme { action } => match action {
            SchemeAction::Validate { file } => {
                let s = read_scheme(&file)?;
                writeln!(
                    out,
                    "valid: {} vertices, weight {}, {}",
                    s.len(),
                    s.total_weight(),
                    if s.is_reduced() { "reduced" } else { "not reduced" }
                )
                .map_err(io)?;
            }
            SchemeAction::Reduce { file } => write!(out, "{}", read_scheme(&file)?.reduce().serialize()).map_err(io)?,
            SchemeAction::Dot { file } => write!(out, "{}", read_scheme(&file)?.to_dot()).map_err(io)?,
            SchemeAction::Iso { a, b } => {
                let iso = read_scheme(&a)?.is_isomorphic(&read_scheme(&b)?);
                writeln!(out, "{}", if iso { "isomorphic" } else { "not isomorphic" }).map_err(io)?;
            }
        },
        Command::Symmetry { file } => {
            let s = read_scheme(&file)?;
            writeln!(out, "|Gamma| = {}", gamma_order(&s)).map_err(io)?;
            writeln!(out, "|Gamma0| = {}", gamma0(&s).len()).map_err(io)?;
            writeln!(out, "|Aut| = {}", aut(&s).len()).map_err(io)?;
            writeln!(out, "antilinear involutions = {}", enumerate_antilinear(&s).len()).map_err(io)?;
            for (k, c) in real_form_classes(&s).iter().enumerate() {
                writeln!(
                    out,
                    "real form {k}: iota = {:?}, signs = {:?}, members = {}",
                    c.signs.vertex_involution, c.signs.sigma, c.members
                )
                .map_err(io)?;
            }
        }
        Command::Model {
            action: ModelAction::Center { file },
        } => {
            let s = read_scheme(&file)?;
            let m = center_map(&s);
            for (v, b) in m.products.iter().enumerate() {
                writeln!(out, "{v}: z^{} -> {}", b.degree(), s.image(v)).map_err(io)?;
            }
            let marks = enumerate_boundary_markings(&m).map_err(numeric)?;
            writeln!(out, "markings = {}", marks.len()).map_err(io)?;
            for mk in &marks {
                let th: Vec<String> = mk.theta.iter().map(|t| format!("{t:.12}")).collect();
                writeln!(out, "  {}", th.join(" ")).map_err(io)?;
            }
        }
        Command::Hubbard {
            action: HubbardAction::Build { file, dot },
        } => {
            let s = read_scheme(&file)?;
            let t = build_tree(&s).map_err(usage)?;
            if dot {
                write!(out, "{}", t.to_dot()).map_err(io)?;
            } else {
                let kinds = t.kinds();
                for v in 0..t.len() {
                    writeln!(
                        out,
                        "{} d={} f={} {:?}",
                        t.labels[v], t.degrees[v], t.labels[t.map[v]], kinds[v]
                    )
                    .map_err(io)?;
                }
                for &(a, b) in &t.edges {
                    writeln!(out, "{} -- {}", t.labels[a], t.labels[b]).map_err(io)?;
                }
                let report = t.check_axioms();
                for c in &report.checks {
                    writeln!(out, "{:?}: {}", c.axiom, if c.passed { "pass" } else { "FAIL" }).map_err(io)?;
                }
            }
        }
        Command::Moduli { action } => moduli(action, out)?,
        Command::ExtractScheme {
            map,
            res,
            window,
            max_iter,
        } => {
            let f = load_map(&map)?;
            let windows = match window {
                Some(w) => {
                    w.check().map_err(usage)?;
                    vec![w; f.scheme().len()]
                }
                None => default_windows(&f),
            };
            let labels = label_basins(&f, &windows, res, max_iter, Execution::default()).map_err(numeric)?;
            let (full, reduced) = extract_schemes(&f, &labels).map_err(numeric)?;
            writeln!(out, "# full").map_err(io)?;
            write!(out, "{}", full.serialize()).map_err(io)?;
            writeln!(out, "# reduced").map_err(io)?;
            write!(out, "{}", reduced.serialize()).map_err(io)?;
        }
        Command::Render { family, raster } => {
            let (w, h) = parse_res(&raster.res)?;
            let window = raster.window.unwrap_or(family.default_window());
            window.check().map_err(usage)?;
            let img = render_parameter_plane(family, &window, w, h, raster.max_iter, Execution::default())
                .map_err(numeric)?;
            write_ppm(&img, &raster.output).map_err(usage)?;
        }
        Command::Julia { map, vertex, raster } => {
            let f = load_map(&map)?;
            if vertex >= f.scheme().len() {
                return Err(usage(format!("vertex {vertex} out of range")));
            }
            let (w, h) = parse_res(&raster.res)?;
            let window = match raster.window {
                Some(win) => win,
                None => Window::square(C64::new(0.0, 0.0), f.escape_radius()),
            };
            window.check().map_err(usage)?;
            let img = render_dynamical_plane(&f, vertex, &window, w, h, raster.max_iter, Execution::default())
                .map_err(numeric)?;
            write_ppm(&img, &raster.output).map_err(usage)?;
        }
    }
    Ok(())
}

fn parse3(v: &[String]) -> Result<[C64; 3], Failure> {
    let z: Vec<C64> = v.iter().map(|s| parse_complex(s)).collect::<Result<_, _>>().map_err(usage)?;
    z.try_into().map_err(|_| usage("expected three values"))
}

fn moduli(action: ModuliAction, out: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| usage(e);
    match action {
        ModuliAction::Check { alpha, beta, gamma } => {
            let l = parse3(&[alpha, beta, gamma])?;
            writeln!(out, "m2fm residual = {}", fmt_c(m2fm_residual(l))).map_err(io)?;
            writeln!(out, "cubic residual = {}", fmt_c(cubic_relation_residual(l))).map_err(io)?;
            match index_sum(&l) {
                Ok(s) => writeln!(out, "index sum = {}", fmt_c(s)).map_err(io)?,
                Err(e) => writeln!(out, "index sum undefined: {e}").map_err(io)?,
            }
        }
        ModuliAction::X2l { x } => {
            let l = lambdas_from_x(TotallyMarkedPoint(parse3(&x)?)).map_err(numeric)?;
            let s: Vec<String> = l.0.iter().map(|&z| fmt_c(z)).collect();
            writeln!(out, "{}", s.join(" ")).map_err(io)?;
        }
        ModuliAction::L2x { lambda } => {
            for x in x_from_lambdas(MultiplierTriple(parse3(&lambda)?)).map_err(numeric)? {
                let s: Vec<String> = x.0.iter().map(|&z| fmt_c(z)).collect();
                writeln!(out, "{}", s.join(" ")).map_err(io)?;
            }
        }
    }
    Ok(())
}
