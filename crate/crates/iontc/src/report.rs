//! Plain-text run reports with `CONFIG`, `TRACE` and `RESULT` sections.
//!
//! Floats are written in their shortest round-trip form, so equal runs give
//! byte-identical reports and the `CONFIG` section parses back as a config.

use std::fmt::Write as _;

use iontc_core::format_sequence;
use iontc_core::optimizer::OptimizationReport;

use crate::config::RunConfig;

pub fn render(config: &RunConfig, restarts: usize, report: &OptimizationReport) -> String {
    let mut s = String::from("CONFIG\n");
    s.push_str(&config.echo());
    let _ = writeln!(s, "# restarts = {restarts}");

    s.push_str("\nTRACE\n# sweep value penalty pulses\n");
    for p in &report.trace {
        let _ = writeln!(s, "{} {} {} {}", p.sweep, p.value, p.penalty, p.pulses);
    }

    s.push_str("\nRESULT\n");
    let mut put = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(s, "{k} = {v}");
    };
    put("terminated_by", &report.terminated_by);
    put("best_value", &report.best_value);
    put("best_normalized", &report.best_normalized);
    put("pulse_count", &report.pulse_count);
    put("sweeps_used", &report.sweeps_used);
    put("insertions_accepted", &report.insertions_accepted);
    put("initial_pulses", &report.initial_sequence.len());
    s.push_str("best_sequence:\n");
    s.push_str(&format_sequence(&report.best_sequence));
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}
