use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, pooled_wall_times, BatchResult, CellResult, HarnessError};
use crate::agent::{Condition, WallTimes};
use crate::domains::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Svg,
    Json,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Svg, ReportFormat::Json];
}

pub const CONDITION_COLORS: [(Condition, &str); 3] = [
    (Condition::HumanTn, "#1f77b4"),
    (Condition::LlmTn, "#2ca02c"),
    (Condition::NoTn, "#d62728"),
];

/// Runtime phases in stacking order, with their colors.
pub const PHASES: [(&str, &str); 4] = [
    ("action_llm", "#4c72b0"),
    ("verify_llm", "#dd8452"),
    ("environment", "#55a868"),
    ("solver", "#c44e52"),
];

fn phase_values(t: &WallTimes) -> [f64; 4] {
    [t.action_llm, t.verify_llm, t.environment, t.solver]
}

fn color(condition: Condition) -> &'static str {
    CONDITION_COLORS
        .iter()
        .find(|(c, _)| *c == condition)
        .map(|(_, hex)| *hex)
        .expect("every condition has a color")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Conditions in the order they first appear in the result.
fn conditions_in_order(cells: &[CellResult]) -> Vec<Condition> {
    let mut out = Vec::new();
    for c in cells {
        if !out.contains(&c.condition) {
            out.push(c.condition);
        }
    }
    out
}

fn write_results_csv(result: &BatchResult, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "domain",
        "params",
        "condition",
        "trials",
        "successes",
        "success_rate",
        "ci_low",
        "ci_high",
        "timeouts",
        "infra_errors",
        "mean_iterations",
        "mean_action_llm_s",
        "mean_verify_llm_s",
        "mean_environment_s",
        "mean_solver_s",
    ])?;
    for c in &result.cells {
        let times = c.mean_wall_times.map(|t| phase_values(&t));
        let mut row = vec![
            c.cell.domain().to_string(),
            c.cell.label(),
            c.condition.as_str().to_string(),
            c.trials.to_string(),
            c.successes.to_string(),
            opt(c.success_rate),
            opt(c.interval.map(|i| i.0)),
            opt(c.interval.map(|i| i.1)),
            c.timeouts.to_string(),
            c.infra_errors.to_string(),
            opt(c.mean_iterations),
        ];
        row.extend((0..4).map(|i| opt(times.map(|t| t[i]))));
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Per domain and condition means over every size in the batch.
fn pooled(result: &BatchResult) -> Vec<(Domain, Condition, usize, Option<WallTimes>)> {
    let mut keys: Vec<(Domain, Condition)> = Vec::new();
    for c in &result.cells {
        let key = (c.cell.domain(), c.condition);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(domain, condition)| {
            let group = || {
                result
                    .records
                    .iter()
                    .filter(move |r| r.cell.domain() == domain && r.condition == condition)
            };
            let episodes = group()
                .filter(|r| r.termination != crate::agent::Termination::InfrastructureError)
                .count();
            (domain, condition, episodes, pooled_wall_times(group()))
        })
        .collect()
}

fn write_runtime_csv(result: &BatchResult, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "domain",
        "condition",
        "episodes",
        "mean_action_llm_s",
        "mean_verify_llm_s",
        "mean_environment_s",
        "mean_solver_s",
        "mean_total_s",
    ])?;
    for (domain, condition, episodes, times) in pooled(result) {
        let mut row = vec![domain.to_string(), condition.as_str().to_string(), episodes.to_string()];
        match times {
            Some(t) => {
                row.extend(phase_values(&t).iter().map(|v| v.to_string()));
                row.push(t.total().to_string());
            }
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

const PLOT_TOP: f64 = 30.0;
const PLOT_HEIGHT: f64 = 240.0;
const PLOT_LEFT: f64 = 60.0;
const BAR_WIDTH: f64 = 22.0;
const GROUP_GAP: f64 = 26.0;

fn svg_header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" font-size="14" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn y_axis(out: &mut String, max: f64, ticks: usize, label: &str, right: f64) {
    let base = PLOT_TOP + PLOT_HEIGHT;
    let _ = writeln!(
        out,
        r#"<line x1="{PLOT_LEFT}" y1="{PLOT_TOP}" x2="{PLOT_LEFT}" y2="{base}" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{PLOT_LEFT}" y1="{base}" x2="{right}" y2="{base}" stroke="black"/>"#
    );
    for i in 0..=ticks {
        let v = max * i as f64 / ticks as f64;
        let y = base - PLOT_HEIGHT * i as f64 / ticks as f64;
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y}" x2="{PLOT_LEFT}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
            PLOT_LEFT - 4.0,
            PLOT_LEFT - 6.0,
            y + 4.0,
            trim_float(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text transform="translate(14 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        PLOT_TOP + PLOT_HEIGHT / 2.0,
        escape(label)
    );
}

fn trim_float(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn legend(out: &mut String, x: f64, entries: &[(String, &str)]) {
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, (name, fill)) in entries.iter().enumerate() {
        let y = PLOT_TOP + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y}" width="10" height="10" fill="{fill}"/><text class="legend-entry" data-name="{name}" x="{}" y="{}">{name}</text>"#,
            x + 14.0,
            y + 9.0,
        );
    }
    let _ = writeln!(out, "</g>");
}

/// Grouped success-rate bars per cell, one bar per condition, with Wilson
/// interval whiskers.
pub fn success_chart(result: &BatchResult) -> String {
    let conditions = conditions_in_order(&result.cells);
    let mut groups: Vec<_> = Vec::new();
    for c in &result.cells {
        if !groups.contains(&c.cell) {
            groups.push(c.cell);
        }
    }
    let group_width = BAR_WIDTH * conditions.len().max(1) as f64 + GROUP_GAP;
    let right = PLOT_LEFT + GROUP_GAP / 2.0 + group_width * groups.len() as f64;
    let width = right + 120.0;
    let height = PLOT_TOP + PLOT_HEIGHT + 50.0;
    let base = PLOT_TOP + PLOT_HEIGHT;
    let mut out = String::new();
    svg_header(&mut out, width, height, &format!("{}: success rate", result.name));
    y_axis(&mut out, 1.0, 5, "success rate", right);
    for (gi, cell) in groups.iter().enumerate() {
        let x0 = PLOT_LEFT + GROUP_GAP / 2.0 + group_width * gi as f64;
        for (ci, condition) in conditions.iter().enumerate() {
            let Some(c) = result
                .cells
                .iter()
                .find(|c| c.cell == *cell && c.condition == *condition)
            else {
                continue;
            };
            let Some(rate) = c.success_rate else { continue };
            let x = x0 + BAR_WIDTH * ci as f64;
            let h = PLOT_HEIGHT * rate;
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-cell="{}" data-condition="{}" data-rate="{rate}" x="{x}" y="{}" width="{}" height="{h}" fill="{}"/>"#,
                escape(&cell.to_string()),
                condition.as_str(),
                base - h,
                BAR_WIDTH - 2.0,
                color(*condition)
            );
            if let Some((lo, hi)) = c.interval {
                let cx = x + (BAR_WIDTH - 2.0) / 2.0;
                let (ylo, yhi) = (base - PLOT_HEIGHT * lo, base - PLOT_HEIGHT * hi);
                let _ = writeln!(
                    out,
                    r#"<g class="whisker" data-cell="{}" data-condition="{}" data-ci-low="{lo}" data-ci-high="{hi}" stroke="black"><line x1="{cx}" y1="{ylo}" x2="{cx}" y2="{yhi}"/><line x1="{}" y1="{ylo}" x2="{}" y2="{ylo}"/><line x1="{}" y1="{yhi}" x2="{}" y2="{yhi}"/></g>"#,
                    escape(&cell.to_string()),
                    condition.as_str(),
                    cx - 4.0,
                    cx + 4.0,
                    cx - 4.0,
                    cx + 4.0
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + BAR_WIDTH * conditions.len() as f64 / 2.0,
            base + 16.0,
            escape(&cell.label())
        );
    }
    let entries: Vec<(String, &str)> = conditions.iter().map(|c| (c.as_str().to_string(), color(*c))).collect();
    legend(&mut out, right + 16.0, &entries);
    out.push_str("</svg>\n");
    out
}

/// Stacked per-phase mean runtime per domain and condition, pooled over
/// every size in the batch.
pub fn runtime_chart(result: &BatchResult) -> String {
    let bars: Vec<_> = pooled(result)
        .into_iter()
        .filter_map(|(d, c, _, t)| t.map(|t| (d, c, t)))
        .collect();
    let max = bars.iter().map(|(_, _, t)| t.total()).fold(0.0, f64::max);
    let max = if max > 0.0 { max } else { 1.0 };
    let slot = BAR_WIDTH * 2.0 + 8.0;
    let right = PLOT_LEFT + 10.0 + slot * bars.len() as f64;
    let width = right + 130.0;
    let height = PLOT_TOP + PLOT_HEIGHT + 60.0;
    let base = PLOT_TOP + PLOT_HEIGHT;
    let mut out = String::new();
    svg_header(
        &mut out,
        width,
        height,
        &format!("{}: mean runtime per episode", result.name),
    );
    y_axis(&mut out, max, 4, "seconds", right);
    for (i, (domain, condition, times)) in bars.iter().enumerate() {
        let x = PLOT_LEFT + 10.0 + slot * i as f64;
        let mut y = base;
        for ((phase, fill), value) in PHASES.iter().zip(phase_values(times)) {
            let h = PLOT_HEIGHT * value / max;
            y -= h;
            let _ = writeln!(
                out,
                r#"<rect class="segment" data-domain="{domain}" data-condition="{}" data-phase="{phase}" data-seconds="{value}" x="{x}" y="{y}" width="{}" height="{h}" fill="{fill}"/>"#,
                condition.as_str(),
                BAR_WIDTH * 2.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{domain}</text><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x + BAR_WIDTH,
            base + 14.0,
            x + BAR_WIDTH,
            base + 28.0,
            condition.as_str()
        );
    }
    let entries: Vec<(String, &str)> = PHASES.iter().map(|(p, c)| (p.to_string(), *c)).collect();
    legend(&mut out, right + 16.0, &entries);
    out.push_str("</svg>\n");
    out
}

/// Writes the requested artifacts into `dir` and returns their paths.
pub fn emit_report(result: &BatchResult, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            ReportFormat::Csv => {
                let table = dir.join("results.csv");
                write_results_csv(result, &table)?;
                let runtime = dir.join("runtime_pooled.csv");
                write_runtime_csv(result, &runtime)?;
                written.extend([table, runtime]);
            }
            ReportFormat::Svg => {
                for (name, body) in [
                    ("success.svg", success_chart(result)),
                    ("runtime.svg", runtime_chart(result)),
                ] {
                    let path = dir.join(name);
                    fs::write(&path, body).map_err(io_err(&path))?;
                    written.push(path);
                }
            }
            ReportFormat::Json => {
                let path = dir.join("result.json");
                fs::write(&path, serde_json::to_string_pretty(result)?).map_err(io_err(&path))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
