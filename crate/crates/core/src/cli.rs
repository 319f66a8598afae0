//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numeric
//! failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{product_state, TlaState};
use crate::information::{info_surface_for, mutual_information, optimize_for, InfoMode, SurfacePoint};
use crate::liouvillian::{add_coherent_exchange, collective_decay_generator, exchange_factor, spectrum, DecayRates, Geometry, Orientation};
use crate::measurement::{joint_four_point, joint_two_point, JointDistribution};
use crate::propagator::{apply_to_state, quasi_stationary_map, singlet_probability, two_term_residual, ChannelMap};
use crate::{verify, Error, Mat16, Op4, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "twoatom", version, about = "Collective decay of two two-level atoms as an information channel")]
pub struct Cli {
    /// Output format for stdout results.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    /// Significant digits when printing numbers.
    #[arg(long, global = true, default_value_t = 9, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub digits: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Two,
    Four,
}

impl From<ModeArg> for InfoMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Two => InfoMode::Two,
            ModeArg::Four => InfoMode::Four,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relative photon-exchange rate g for phase delay φ = ω_a R / c.
    Exchange {
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        antiparallel: bool,
    },
    /// Heisenberg-picture generator in the pair operator basis (rows and columns from 1).
    Liouvillian {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        /// Strength of the coherent flip-flop term.
        #[arg(long, allow_hyphen_values = true)]
        gc: Option<f64>,
    },
    /// The 16 eigenvalues of the generator, by decreasing real part.
    Spectrum {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
    },
    /// Quasi-stationary state reached from a product state, and its singlet weight A.
    Steady {
        #[arg(long)]
        n1: f64,
        #[arg(long)]
        n2: f64,
        /// Coherence ρ₁₂ of the first atom.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c1: Option<C64>,
        /// Coherence ρ₁₂ of the second atom.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c2: Option<C64>,
        /// Exchange ratio, +1 or −1.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        g: f64,
    },
    /// Joint distribution of counted quanta, rows and columns ordered (excited, ground).
    Joint {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        n1: f64,
        #[arg(long)]
        n2: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c1: Option<C64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c2: Option<C64>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        g: f64,
    },
    /// Mutual information over a K × K grid of initial populations.
    InfoSurface {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// CSV destination with header n1,n2,info_bits.
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG heatmap.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        g: f64,
    },
    /// Maximum of the mutual information over initial populations.
    Optimize {
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Run every acceptance check and print a report.
    Verify,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(C64::new(parse(re)?, parse(im)?))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification,
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidTlaState(_)
            | Error::InvalidDensityMatrix(_)
            | Error::InvalidGeometry(_)
            | Error::ExchangeOutOfRange(_)
            | Error::NoDarkState { .. }
            | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Fixed significant-digit formatting with trailing zeros removed.
pub fn fmt_num(x: f64, digits: u8) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x.is_infinite() { format!("{x}") } else { "0".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", digits as usize - 1, x)
    };
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".into()
    } else {
        s
    }
}

struct Printer {
    format: Format,
    digits: u8,
}

impl Printer {
    fn num(&self, x: f64) -> String {
        fmt_num(x, self.digits)
    }

    /// JSON number rounded to the printing precision.
    fn jnum(&self, x: f64) -> Value {
        self.num(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
    }

    fn jc(&self, z: C64) -> Value {
        json!([self.jnum(z.re), self.jnum(z.im)])
    }

    fn matrix_csv<const N: usize>(&self, out: &mut dyn Write, m: &nalgebra::SMatrix<C64, N, N>) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "re", "im"])?;
        for i in 0..N {
            for j in 0..N {
                let z = m[(i, j)];
                w.write_record([(i + 1).to_string(), (j + 1).to_string(), self.num(z.re), self.num(z.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    fn matrix_json<const N: usize>(&self, m: &nalgebra::SMatrix<C64, N, N>) -> Value {
        Value::Array((0..N).map(|i| Value::Array((0..N).map(|j| self.jc(m[(i, j)])).collect())).collect())
    }

    fn write_json(&self, out: &mut dyn Write, v: &Value) -> Result<(), Failure> {
        serde_json::to_writer_pretty(&mut *out, v).map_err(|e| Failure::Usage(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }
}

fn state(n: f64, c: Option<C64>) -> Result<TlaState, Error> {
    TlaState::new(n, c.unwrap_or_default())
}

fn unit_map(g: f64) -> Result<ChannelMap, Error> {
    quasi_stationary_map(&collective_decay_generator(&DecayRates::unit(g)?))
}

fn joint_for(mode: ModeArg, n1: f64, n2: f64, c1: Option<C64>, c2: Option<C64>, g: f64) -> Result<JointDistribution, Error> {
    let rho = product_state(&state(n1, c1)?, &state(n2, c2)?);
    let map = unit_map(g)?;
    match mode {
        ModeArg::Two => joint_two_point(&rho, &map),
        ModeArg::Four => joint_four_point(&rho, &map),
    }
}

fn write_surface_csv(path: &Path, points: &[SurfacePoint], p: &Printer) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["n1", "n2", "info_bits"])?;
    for pt in points {
        w.write_record([p.num(pt.n1), p.num(pt.n2), p.num(pt.info_bits)])?;
    }
    w.flush()?;
    Ok(())
}

/// Static heatmap: `n1` along x, `n2` upward, dark gray at the minimum to
/// orange at the maximum.
pub fn surface_svg(points: &[SurfacePoint], grid: usize, title: &str, digits: u8) -> String {
    let cell = (480 / grid).max(1);
    let side = cell * grid;
    let (left, top) = (60, 40);
    let min = points.iter().map(|p| p.info_bits).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.info_bits).fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let lerp = |a: f64, b: f64, t: f64| (a + (b - a) * t).round() as u8;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        side + left + 20,
        side + top + 60
    ));
    s.push_str(&format!("<text x=\"{left}\" y=\"20\">{title}</text>\n"));
    for (idx, p) in points.iter().enumerate() {
        let (i, j) = (idx / grid, idx % grid);
        let t = (p.info_bits - min) / span;
        let (r, g, b) = (lerp(64.0, 255.0, t), lerp(64.0, 140.0, t), lerp(64.0, 0.0, t));
        s.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>\n",
            left + i * cell,
            top + (grid - 1 - j) * cell
        ));
    }
    let base = top + side;
    s.push_str(&format!("<text x=\"{left}\" y=\"{}\">n1 = 0</text>\n", base + 16));
    s.push_str(&format!("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">n1 = 1</text>\n", left + side, base + 16));
    s.push_str(&format!("<text x=\"4\" y=\"{base}\">n2 = 0</text>\n"));
    s.push_str(&format!("<text x=\"4\" y=\"{}\">n2 = 1</text>\n", top + 12));
    s.push_str(&format!(
        "<text x=\"{left}\" y=\"{}\">min {} bit, max {} bit</text>\n",
        base + 40,
        fmt_num(min, digits),
        fmt_num(max, digits)
    ));
    s.push_str("</svg>\n");
    s
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let p = Printer { format: cli.format, digits: cli.digits };
    match cli.command {
        Command::Exchange { phi, antiparallel } => {
            let orientation = if antiparallel { Orientation::Antiparallel } else { Orientation::Parallel };
            let g = exchange_factor(&Geometry::new(phi, orientation)?);
            match p.format {
                Format::Json => p.write_json(out, &json!({ "phi": p.jnum(phi), "antiparallel": antiparallel, "g": p.jnum(g) }))?,
                Format::Csv => writeln!(out, "phi,antiparallel,g\n{},{antiparallel},{}", p.num(phi), p.num(g))?,
                Format::Text => writeln!(out, "{}", p.num(g))?,
            }
        }
        Command::Liouvillian { g, gc } => {
            let mut gen = collective_decay_generator(&DecayRates::unit(g)?);
            if let Some(gc) = gc {
                gen = add_coherent_exchange(&gen, gc)?;
            }
            let m: &Mat16 = gen.matrix();
            match p.format {
                Format::Json => p.write_json(out, &json!({ "g": p.jnum(g), "gc": gc.map(|x| p.jnum(x)), "matrix": p.matrix_json(m) }))?,
                _ => p.matrix_csv(out, m)?,
            }
        }
        Command::Spectrum { g } => {
            let eigs = spectrum(&collective_decay_generator(&DecayRates::unit(g)?))?;
            match p.format {
                Format::Json => p.write_json(out, &json!({ "g": p.jnum(g), "eigenvalues": eigs.iter().map(|z| p.jc(*z)).collect::<Vec<_>>() }))?,
                _ => {
                    writeln!(out, "index,re,im")?;
                    for (k, z) in eigs.iter().enumerate() {
                        writeln!(out, "{},{},{}", k + 1, p.num(z.re), p.num(z.im))?;
                    }
                }
            }
        }
        Command::Steady { n1, n2, c1, c2, g } => {
            let (a, b) = (state(n1, c1)?, state(n2, c2)?);
            let rho = apply_to_state(&unit_map(g)?, &product_state(&a, &b))?;
            let closed = singlet_probability(&a, &b);
            let (weight, residual) = two_term_residual(&rho);
            let m: &Op4 = rho.matrix();
            match p.format {
                Format::Json => p.write_json(
                    out,
                    &json!({
                        "singlet_probability": p.jnum(closed),
                        "singlet_weight": p.jnum(weight),
                        "two_term_residual": p.jnum(residual),
                        "rho": p.matrix_json(m),
                    }),
                )?,
                Format::Csv => p.matrix_csv(out, m)?,
                Format::Text => {
                    writeln!(out, "A = {}", p.num(closed))?;
                    writeln!(out, "rho (basis gg, ge, eg, ee):")?;
                    for i in 0..4 {
                        let row: Vec<String> = (0..4).map(|j| fmt_complex(m[(i, j)], &p)).collect();
                        writeln!(out, "  {}", row.join("  "))?;
                    }
                }
            }
        }
        Command::Joint { mode, n1, n2, c1, c2, g } => {
            let j = joint_for(mode, n1, n2, c1, c2, g)?;
            let table = j.table();
            match p.format {
                Format::Json => {
                    let rows: Vec<Value> = table.iter().map(|r| Value::Array(r.iter().map(|&x| p.jnum(x)).collect())).collect();
                    p.write_json(
                        out,
                        &json!({
                            "mode": format!("{:?}", InfoMode::from(mode)).to_lowercase(),
                            "axes": j.axes(),
                            "order": ["excited", "ground"],
                            "table": rows,
                            "info_bits": p.jnum(mutual_information(&j).value_bits),
                        }),
                    )?
                }
                _ => {
                    for row in &table {
                        let cells: Vec<String> = row.iter().map(|&x| p.num(x)).collect();
                        writeln!(out, "{}", cells.join(","))?;
                    }
                }
            }
        }
        Command::InfoSurface { mode, grid, out: path, svg, g } => {
            let points = info_surface_for(&unit_map(g)?, mode.into(), grid)?;
            write_surface_csv(&path, &points, &p)?;
            if let Some(svg_path) = svg {
                let title = format!("mutual information, {} scheme (bits)", if mode == ModeArg::Two { "two-point" } else { "four-point" });
                std::fs::write(svg_path, surface_svg(&points, grid, &title, p.digits))?;
            }
            let best = points.iter().fold(points[0], |a, b| if b.info_bits > a.info_bits { *b } else { a });
            match p.format {
                Format::Json => p.write_json(out, &json!({ "points": points.len(), "max_bits": p.jnum(best.info_bits), "at": [p.jnum(best.n1), p.jnum(best.n2)] }))?,
                _ => writeln!(out, "{} points, grid maximum {} bit at n1 = {}, n2 = {}", points.len(), p.num(best.info_bits), p.num(best.n1), p.num(best.n2))?,
            }
        }
        Command::Optimize { mode } => {
            let report = optimize_for(&unit_map(1.0)?, mode.into())?;
            match p.format {
                Format::Json => p.write_json(
                    out,
                    &json!({
                        "mode": format!("{:?}", report.mode).to_lowercase(),
                        "value_bits": p.jnum(report.value_bits),
                        "points": report.points.iter().map(|q| json!({ "n1": p.jnum(q.n1), "n2": p.jnum(q.n2) })).collect::<Vec<_>>(),
                        "zero_plateaus": report.zero_plateaus.iter().map(|z| json!({ "fixed": z.fixed, "at": z.at, "range": [z.range.0, z.range.1] })).collect::<Vec<_>>(),
                    }),
                )?,
                Format::Csv => {
                    writeln!(out, "n1,n2,info_bits")?;
                    for q in &report.points {
                        writeln!(out, "{},{},{}", p.num(q.n1), p.num(q.n2), p.num(q.info_bits))?;
                    }
                }
                Format::Text => {
                    writeln!(out, "maximum {} bit", p.num(report.value_bits))?;
                    for q in &report.points {
                        writeln!(out, "  at n1 = {}, n2 = {}", p.num(q.n1), p.num(q.n2))?;
                    }
                    for z in &report.zero_plateaus {
                        writeln!(out, "zero information along {} = {} for the other population in [{}, {}]", z.fixed, z.at, z.range.0, z.range.1)?;
                    }
                }
            }
        }
        Command::Verify => {
            let outcomes = verify::run_all();
            write!(out, "{}", verify::format_report(&outcomes))?;
            if outcomes.iter().any(|o| !o.passed) {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn fmt_complex(z: C64, p: &Printer) -> String {
    if z.im == 0.0 {
        p.num(z.re)
    } else {
        format!("{}{}{}i", p.num(z.re), if z.im < 0.0 { "-" } else { "+" }, p.num(z.im.abs()))
    }
}

/// Parses `argv` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    let code = match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Verification) => EXIT_VERIFY,
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(err, "numeric failure: {msg}");
            EXIT_NUMERIC
        }
    };
    let _ = out.flush();
    code
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("twoatom").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.998_001_071_164_071_4, 9), "0.998001071");
        assert_eq!(fmt_num(0.25, 9), "0.25");
        assert_eq!(fmt_num(-0.0, 9), "0");
        assert_eq!(fmt_num(-1e-20, 9), "-1.00000000e-20");
        assert_eq!(fmt_num(1.0, 9), "1");
        assert_eq!(fmt_num(-1.5, 3), "-1.5");
        assert_eq!(fmt_num(123456.789, 4), "123457");
    }

    #[test]
    fn parse_complex_pairs() {
        assert_eq!(parse_complex("0.1,-0.2").unwrap(), C64::new(0.1, -0.2));
        assert!(parse_complex("0.1").is_err());
    }

    #[test]
    fn exchange_prints_value() {
        let (code, out, _) = run_str(&["exchange", "--phi", "0.1"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("0.998001"));
        let (_, out, _) = run_str(&["exchange", "--phi", "0.1", "--antiparallel"]);
        assert!(out.starts_with("-0.998001"));
    }

    #[test]
    fn joint_ground_state_table() {
        let (code, out, _) = run_str(&["joint", "--mode", "two", "--n1", "0", "--n2", "0"]);
        assert_eq!(code, 0);
        assert_eq!(out, "0,0\n0.25,0.75\n");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["exchange"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["joint", "--mode", "two", "--n1", "1.5", "--n2", "0"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["steady", "--n1", "0.5", "--n2", "0.5", "--g", "0.5"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn svg_has_annotations() {
        let pts = vec![
            SurfacePoint { n1: 0.0, n2: 0.0, info_bits: 0.0 },
            SurfacePoint { n1: 0.0, n2: 1.0, info_bits: 0.5 },
            SurfacePoint { n1: 1.0, n2: 0.0, info_bits: 0.25 },
            SurfacePoint { n1: 1.0, n2: 1.0, info_bits: 0.0 },
        ];
        let svg = surface_svg(&pts, 2, "t", 9);
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("min 0 bit, max 0.5 bit"));
        assert!(svg.contains("#ff8c00"));
    }
}
