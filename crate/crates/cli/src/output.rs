//! Text emission: CSV/number formatting, human summaries, report files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use mdiqkd::scan::KeyRateResult;
use mdiqkd::types::Basis;
use mdiqkd::{Channel64, Profile64, Report64};

use crate::config::CliError;

/// Canonical number rendering shared by CSV and summaries: zero prints as
/// "0", small magnitudes use scientific notation, everything else uses the
/// shortest exact decimal. Round-trips bit-exactly through an f64 parse.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.abs() < 1e-3 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Write `text` to `path`, mapping failures to the I/O exit path.
pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Serialize a report as stable pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// One estimator's summary lines.
fn rate_lines(out: &mut String, name: &str, r: &KeyRateResult<f64>) {
    let _ = writeln!(
        out,
        "{name:<12} r = {} /pulse = {} bps   [{}]",
        fmt_num(r.r_per_pulse),
        fmt_num(r.r_bps),
        r.status.label()
    );
    let mut detail = format!(
        "             y11 >= {}   e11 <= {}",
        fmt_num(r.y11_lower),
        fmt_num(r.e11_upper)
    );
    if let Some((h, m)) = r.argmin {
        let _ = write!(detail, "   at (h, m) = ({}, {})", fmt_num(h), fmt_num(m));
    }
    let _ = writeln!(
        out,
        "{detail}   failure <= {}",
        fmt_num(r.composed_failure_probability)
    );
}

/// Human-readable evaluation summary for stdout.
pub fn evaluate_summary(
    report: &Report64,
    channel: &Channel64,
    mode: &str,
    grid: [usize; 2],
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "distance {} km, {} pulse pairs, mode {mode}, grid {}x{}",
        fmt_num(channel.distance_km),
        channel.n_total,
        grid[0],
        grid[1]
    );
    let _ = writeln!(
        out,
        "model truth: y11 = {}, e11 = {}",
        fmt_num(report.y11_true),
        fmt_num(report.e11_true)
    );
    rate_lines(&mut out, "double-scan", &report.double_scan);
    rate_lines(&mut out, "baseline", &report.baseline);
    out
}

/// Modeled per-pair observables as CSV, for plotting or cross-checking.
pub fn observables_csv(profile: &Profile64, channel: &Channel64) -> Result<String, CliError> {
    let obs =
        mdiqkd::channel::model_observables(profile, channel).map_err(crate::config::internal)?;
    let mut out = String::from("left,right,basis,q_gain,eq_err\n");
    for (l, r, basis, q, eq) in obs.rows() {
        let basis = match basis {
            Some(Basis::Zz) => "zz",
            Some(Basis::Xx) => "xx",
            None => "-",
        };
        let _ = writeln!(
            out,
            "{},{},{basis},{},{}",
            l.label(),
            r.label(),
            fmt_num(q),
            fmt_num(eq)
        );
    }
    Ok(out)
}

/// Scanned rate surface as CSV rows of (h, m, unclamped rate).
pub fn surface_csv(result: &KeyRateResult<f64>) -> Option<String> {
    let surface = result.surface.as_ref()?;
    let mut out = String::from("h,m,r_per_pulse\n");
    for p in surface {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(p.h),
            fmt_num(p.m),
            fmt_num(p.r_per_pulse)
        );
    }
    Some(out)
}

/// Header for sweep CSV output.
pub const SWEEP_HEADER: &str = "distance_km,method,r_per_pulse,r_bps,y11_lower,e11_upper,status";

/// One sweep CSV row.
pub fn sweep_row(distance_km: f64, r: &KeyRateResult<f64>) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        fmt_num(distance_km),
        r.method.label(),
        fmt_num(r.r_per_pulse),
        fmt_num(r.r_bps),
        fmt_num(r.y11_lower),
        fmt_num(r.e11_upper),
        r.status.label()
    )
}
