//! The `giet` command line.
//!
//! Exit codes: 0 success, 1 contradiction found by cross-validation (or an
//! invalid map for `validate`), 2 uncertified decomposition, 3 denominator
//! cap exceeded, 64 usage error, 65 unreadable or invalid input data,
//! 66 missing input file, 73 output file not writable.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::decompose::{check_bounds, cross_validate, decompose};
use crate::ggiet::{GGiet, ItemKind, Layout};
use crate::induction::{classify_stability, default_window, inf_complete, iterate, renorm_limit, StopReason};
use crate::io::{MapFile, ReportFile};
use crate::orbit::classify_orbit;
use crate::scalar::{self, Scalar};
use crate::svg::render_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRADICTION: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NOINPUT: i32 = 66;
pub const EXIT_CANTCREAT: i32 = 73;

#[derive(Parser, Debug)]
#[command(name = "giet", version, about = "Interval exchange maps with gaps: induction and decomposition")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check a map file and list violations.
    Validate { file: PathBuf },
    /// Orbit of one point, as JSON.
    Orbit {
        file: PathBuf,
        /// "p/q", or a JSON object {"a": .., "b": .., "d": ..}.
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
    /// Table of induction steps.
    Induct {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Print both lines after each step.
        #[arg(long)]
        trace: bool,
    },
    /// Combinatorial rotation number prefix and stability verdicts, as JSON.
    Rotnum {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Stability window; defaults to 8 per letter.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Decomposition report, cross-validated against orbits.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        /// Sample points per region; 0 skips cross-validation.
        #[arg(long, default_value_t = 30)]
        validate_samples: usize,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Two-line SVG diagram, optionally with a decomposition.
    Render {
        file: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Counting bound checks of a report file.
    Bounds { report: PathBuf },
}

struct Failure(i32, String);

type Res = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_NOINPUT, format!("{}: {}", path.display(), e)))
}

fn load_map(path: &Path) -> Result<(MapFile, GGiet), Failure> {
    let text = read(path)?;
    let f = MapFile::parse(&text).map_err(|e| Failure(EXIT_DATA, format!("{}: {}", path.display(), e)))?;
    let m = f.to_map().map_err(|e| Failure(EXIT_DATA, format!("{}: {}", path.display(), e)))?;
    Ok((f, m))
}

fn load_report(path: &Path) -> Result<ReportFile, Failure> {
    let text = read(path)?;
    ReportFile::parse(&text).map_err(|e| Failure(EXIT_DATA, format!("{}: {}", path.display(), e)))
}

fn emit(out: &mut dyn Write, target: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match target {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure(EXIT_CANTCREAT, format!("{}: {}", p.display(), e))),
        None => {
            out.write_all(text.as_bytes()).ok();
            Ok(())
        }
    }
}

fn parse_point(s: &str) -> Result<Scalar, Failure> {
    if let Ok(x) = Scalar::parse_rational(s) {
        return Ok(x);
    }
    serde_json::from_str::<Scalar>(s).map_err(|e| Failure(EXIT_USAGE, format!("bad --point {:?}: {}", s, e)))
}

fn describe(l: &Layout) -> String {
    l.items()
        .iter()
        .map(|i| match &i.kind {
            ItemKind::Interval(a) => format!("{} {}", a, i.length),
            ItemKind::Gap => format!("gap {}", i.length),
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

fn validate_cmd(out: &mut dyn Write, file: &Path) -> Res {
    let text = read(file)?;
    let f = match MapFile::parse(&text) {
        Ok(f) => f,
        Err(e) => {
            writeln!(out, "{}: {}", file.display(), e).ok();
            return Ok(EXIT_CONTRADICTION);
        }
    };
    for n in f.canonicalization_notes() {
        writeln!(out, "note: {}", n).ok();
    }
    match f.to_map() {
        Ok(m) => {
            writeln!(out, "valid: d = {}, ambient {}", m.d(), m.ambient()).ok();
            Ok(EXIT_OK)
        }
        Err(crate::io::MapError::Invalid(vs)) => {
            for v in vs {
                writeln!(out, "violation: {}", v).ok();
            }
            Ok(EXIT_CONTRADICTION)
        }
        Err(e) => {
            writeln!(out, "{}: {}", file.display(), e).ok();
            Ok(EXIT_CONTRADICTION)
        }
    }
}

fn orbit_cmd(out: &mut dyn Write, file: &Path, point: &str, horizon: usize) -> Res {
    let (_, m) = load_map(file)?;
    let x = parse_point(point)?;
    let rec = classify_orbit(&m, &x, horizon).map_err(|e| Failure(EXIT_DATA, e.to_string()))?;
    writeln!(out, "{}", serde_json::to_string_pretty(&rec).unwrap()).ok();
    Ok(EXIT_OK)
}

fn induct_cmd(out: &mut dyn Write, file: &Path, steps: usize, trace: bool) -> Res {
    let (_, m) = load_map(file)?;
    let st = iterate(&m, steps).map_err(|e| Failure(EXIT_DATA, e.to_string()))?;
    writeln!(out, "n\tcase\twinner\tlambda\td\theights").ok();
    if trace {
        writeln!(out, "\ttop: {}\n\tbottom: {}", describe(m.top()), describe(m.bottom())).ok();
    }
    for (i, s) in st.steps.iter().enumerate() {
        let snap = &st.history[i + 1];
        let winner = s.winner.as_ref().map(|w| w.to_string()).unwrap_or_else(|| "-".into());
        let heights = snap.heights.iter().map(|(l, h)| format!("{}={}", l, h)).collect::<Vec<_>>().join(",");
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", i + 1, s.case, winner, s.lambda1, snap.map.d(), heights).ok();
        if trace {
            writeln!(out, "\ttop: {}\n\tbottom: {}", describe(snap.map.top()), describe(snap.map.bottom())).ok();
        }
    }
    match &st.stop {
        Some(StopReason::LastLetter(s)) => {
            writeln!(out, "stopped: last letter {} would be deleted ({})", s.deleted.as_deref().unwrap_or("?"), s.case)
                .ok();
        }
        Some(StopReason::Empty) => {
            writeln!(out, "stopped: no intervals left").ok();
        }
        None => {}
    }
    Ok(EXIT_OK)
}

fn rotnum_cmd(out: &mut dyn Write, file: &Path, steps: usize, window: Option<usize>) -> Res {
    let (_, m) = load_map(file)?;
    let st = iterate(&m, steps).map_err(|e| Failure(EXIT_DATA, e.to_string()))?;
    let w = window.unwrap_or_else(|| default_window(st.d()));
    let limit = renorm_limit(&st, w).ok();
    let doc = json!({
        "comb": m.comb(),
        "steps": st.n,
        "gamma": st.winner_stream,
        "reduced": st.reduced_stream,
        "stability": classify_stability(&st, w),
        "inf_complete": inf_complete(&st, w),
        "renorm_limit": limit,
        "certificate": st.certificate,
        "capped": st.capped,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).ok();
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn decompose_cmd(
    out: &mut dyn Write,
    err: &mut dyn Write,
    file: &Path,
    window: Option<usize>,
    max_steps: usize,
    samples: usize,
    horizon: usize,
    output: &Option<PathBuf>,
) -> Res {
    let (_, m) = load_map(file)?;
    let rep = decompose(&m, window.unwrap_or(0), max_steps).map_err(|e| Failure(EXIT_DATA, e.to_string()))?;
    let validation = (samples > 0).then(|| cross_validate(&rep, samples, horizon));
    let contradictions = validation.as_ref().map(|v| v.contradictions.len()).unwrap_or(0);
    let certified = rep.certified;
    let file_doc = ReportFile::new(rep, validation);
    emit(out, output, &file_doc.to_json())?;
    let r = &file_doc.report;
    writeln!(
        err,
        "p = {}, q = {}, transition parts = {}, certified = {}, contradictions = {}",
        r.p,
        r.q,
        r.transition.len(),
        certified,
        contradictions
    )
    .ok();
    Ok(if contradictions > 0 {
        EXIT_CONTRADICTION
    } else if !certified {
        EXIT_UNCERTIFIED
    } else {
        EXIT_OK
    })
}

fn render_cmd(out: &mut dyn Write, file: &Path, report: &Option<PathBuf>, output: &Option<PathBuf>) -> Res {
    let (f, m) = load_map(file)?;
    let rep = match report {
        Some(p) => Some(load_report(p)?.report),
        None => None,
    };
    if let Some(r) = &rep {
        if r.input != m {
            return Err(Failure(EXIT_DATA, "report was computed for a different map".into()));
        }
    }
    emit(out, output, &render_svg(&m, rep.as_ref(), f.colors.as_ref()))?;
    Ok(EXIT_OK)
}

fn bounds_cmd(out: &mut dyn Write, report: &Path) -> Res {
    let rf = load_report(report)?;
    let r = &rf.report;
    let b = check_bounds(r);
    let ok = |x: bool| if x { "ok" } else { "fails" };
    let (lhs, rhs) = (r.bounds.thm13_lhs, r.bounds.thm13_rhs);
    writeln!(out, "d = {}, p = {}, q = {}", r.input.d(), r.p, r.q).ok();
    writeln!(out, "weak: q = {} <= floor((d - p)/2) = {}: {}", lhs, rhs, ok(b.weak_ok)).ok();
    writeln!(out, "strict: q = {} < {}: {} (recorded only)", lhs, rhs, ok(b.strict_ok)).ok();
    writeln!(out, "ergodic: q = {} <= sum floor(d_i/2) = {}: {}", r.q, r.ergodic_bound, ok(b.ergodic_ok)).ok();
    for (i, g) in b.genera.iter().enumerate() {
        match g {
            Some(g) => writeln!(out, "quasiminimal base {}: genus {}", i + 1, g).ok(),
            None => writeln!(out, "quasiminimal base {}: genus undefined (gaps)", i + 1).ok(),
        };
    }
    for n in &b.notes {
        writeln!(out, "note: {}", n).ok();
    }
    Ok(EXIT_OK)
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write!(out, "{}", text).ok();
                    EXIT_OK
                }
                _ => {
                    write!(err, "{}", text).ok();
                    EXIT_USAGE
                }
            };
        }
    };
    if let Ok(v) = std::env::var("GIET_MAX_DENOM_BITS") {
        match v.trim().parse::<u64>() {
            Ok(bits) => scalar::set_max_denom_bits(bits),
            Err(_) => {
                writeln!(err, "GIET_MAX_DENOM_BITS must be a non-negative integer, got {:?}", v).ok();
                return EXIT_USAGE;
            }
        }
    }
    let res = match &cli.cmd {
        Cmd::Validate { file } => validate_cmd(out, file),
        Cmd::Orbit { file, point, horizon } => orbit_cmd(out, file, point, *horizon),
        Cmd::Induct { file, steps, trace } => induct_cmd(out, file, *steps, *trace),
        Cmd::Rotnum { file, steps, window } => rotnum_cmd(out, file, *steps, *window),
        Cmd::Decompose { file, window, max_steps, validate_samples, horizon, output } => {
            decompose_cmd(out, err, file, *window, *max_steps, *validate_samples, *horizon, output)
        }
        Cmd::Render { file, report, output } => render_cmd(out, file, report, output),
        Cmd::Bounds { report } => bounds_cmd(out, report),
    };
    if scalar::denom_cap_exceeded() {
        writeln!(err, "denominator cap GIET_MAX_DENOM_BITS exceeded; results are incomplete").ok();
        return EXIT_CAP;
    }
    match res {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            writeln!(err, "error: {}", msg).ok();
            code
        }
    }
}
