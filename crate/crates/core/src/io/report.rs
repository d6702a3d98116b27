use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fitting::FitReport;
use crate::numeric::format_f64;

/// Line separating the human-readable part of a report file from its JSON
/// copy.
pub const MACHINE_MARKER: &str = "#! machine";

/// `key = value ± ci68` lines for people, followed by the same report as JSON.
pub fn fit_report_to_text(report: &FitReport) -> String {
    let mut s = String::from("# odmr fit report\n");
    for p in &report.params {
        let _ = writeln!(s, "{} = {} ± {}", p.name, format_f64(p.value), format_f64(p.ci68));
    }
    let _ = writeln!(s, "residual_rms = {}", format_f64(report.residual_rms));
    let _ = writeln!(s, "chi_square = {}", format_f64(report.chi_square));
    let _ = writeln!(s, "n_points = {}", report.n_points);
    let _ = writeln!(s, "dof = {}", report.dof);
    let _ = writeln!(s, "converged = {}", report.converged);
    let _ = writeln!(s, "iterations = {}", report.iterations);
    for (lo, hi) in &report.excluded_ranges {
        let _ = writeln!(s, "excluded_mhz = {} {}", format_f64(*lo), format_f64(*hi));
    }
    if !report.unidentifiable.is_empty() {
        let _ = writeln!(s, "unidentifiable = {}", report.unidentifiable.join(", "));
    }
    for n in &report.notes {
        let _ = writeln!(s, "# note: {n}");
    }
    s.push_str(MACHINE_MARKER);
    s.push('\n');
    s.push_str(&serde_json::to_string_pretty(report).expect("report serialises"));
    s.push('\n');
    s
}

pub fn fit_report_from_text(text: &str) -> Result<FitReport> {
    let mut offset = 0;
    let mut found = None;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        offset += l.len();
        if l.trim() == MACHINE_MARKER {
            found = Some((offset, i + 1));
            break;
        }
    }
    let (pos, line) = found.ok_or_else(|| Error::Schema(format!("no `{MACHINE_MARKER}` block")))?;
    let json = &text[pos..];
    serde_json::from_str(json).map_err(|e| Error::Parse {
        line: line + e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn write_fit_report(path: &Path, report: &FitReport) -> Result<()> {
    std::fs::write(path, fit_report_to_text(report))?;
    Ok(())
}

pub fn read_fit_report(path: &Path) -> Result<FitReport> {
    fit_report_from_text(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::FitParam;

    #[test]
    fn round_trip_keeps_infinite_ci() {
        let rep = FitReport {
            params: vec![
                FitParam {
                    name: "a".into(),
                    value: 0.1 + 0.2,
                    ci68: 1e-17,
                },
                FitParam {
                    name: "b".into(),
                    value: -3.0,
                    ci68: f64::INFINITY,
                },
            ],
            residual_rms: 1.01,
            chi_square: 2.02,
            n_points: 2,
            dof: 0,
            converged: true,
            iterations: 4,
            excluded_ranges: vec![(2611.0, 2631.0)],
            unidentifiable: vec!["b".into()],
            notes: vec!["hello".into()],
        };
        let text = fit_report_to_text(&rep);
        assert!(text.contains("a = 0.30000000000000004 ± 1e-17"));
        assert!(text.contains("b = -3.0 ± inf"));
        assert_eq!(fit_report_from_text(&text).unwrap(), rep);
    }

    #[test]
    fn marker_mentioned_in_prose_is_skipped() {
        let rep = FitReport {
            params: vec![FitParam {
                name: "a".into(),
                value: 1.5,
                ci68: 0.1,
            }],
            residual_rms: 1.0,
            chi_square: 3.0,
            n_points: 4,
            dof: 3,
            converged: true,
            iterations: 2,
            excluded_ranges: vec![],
            unidentifiable: vec![],
            notes: vec![],
        };
        let text = format!(
            "# everything after {MACHINE_MARKER} is JSON\n{}",
            fit_report_to_text(&rep)
        );
        assert_eq!(fit_report_from_text(&text).unwrap(), rep);

        let broken = text.replace("\"dof\": 3", "\"dof\": x");
        let bad_line = broken.lines().position(|l| l.contains("\"dof\": x")).unwrap() + 1;
        match fit_report_from_text(&broken) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, bad_line),
            other => panic!("{other:?}"),
        }
    }
}
