//! Plain-text result tables with the columns Best μ, # iters. and Time(s).

use copostab_core::cpa::Status;

use crate::report::{scheme_label, RunReport, SweepReport};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub system: String,
    pub mode: String,
    pub scheme: String,
    pub dt: String,
    pub verdict: Status,
    pub margin: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub time_s: f64,
}

impl Row {
    pub fn from_report(r: &RunReport) -> Self {
        Self {
            system: r.input.name.clone(),
            mode: r.mode.to_string(),
            scheme: r.scheme.map_or("-".into(), |s| s.label()),
            dt: r.scheme.map_or("-".into(), |s| s.dt.to_string()),
            verdict: r.verdict,
            margin: r.margin,
            epsilon: r.epsilon,
            iterations: r.iterations,
            time_s: r.timings.total_s,
        }
    }

    fn best(&self) -> String {
        match self.verdict {
            Status::Feasible => format!("{:.3e}", self.margin),
            _ => format!("< {:e}", self.epsilon),
        }
    }
}

pub fn sweep_rows(s: &SweepReport) -> Vec<Row> {
    let scheme = scheme_label(s.theta);
    s.entries
        .iter()
        .map(|e| Row {
            system: s.input.name.clone(),
            mode: s.mode.to_string(),
            scheme: scheme.clone(),
            dt: e.dt.to_string(),
            verdict: e.verdict,
            margin: e.margin,
            epsilon: s.epsilon,
            iterations: e.iterations,
            time_s: e.time_s,
        })
        .collect()
}

fn verdict_name(s: Status) -> &'static str {
    match s {
        Status::Feasible => "feasible",
        Status::Infeasible => "infeasible",
        Status::IterationLimit => "iteration-limit",
    }
}

pub fn render(rows: &[Row]) -> String {
    let header = [
        "System", "Mode", "Scheme", "dt", "Verdict", "Best μ", "# iters.", "Time(s)",
    ];
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                r.system.clone(),
                r.mode.clone(),
                r.scheme.clone(),
                r.dt.clone(),
                verdict_name(r.verdict).into(),
                r.best(),
                r.iterations.to_string(),
                format!("{:.3}", r.time_s),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: Vec<&str>| -> String {
        let parts: Vec<String> = items
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(header.to_vec())];
    out.extend(
        cells
            .iter()
            .map(|r| line(r.iter().map(String::as_str).collect())),
    );
    out.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_align() {
        let row = Row {
            system: "cam31".into(),
            mode: "cqlf".into(),
            scheme: "explicit".into(),
            dt: "0.1".into(),
            verdict: Status::Feasible,
            margin: 0.04348,
            epsilon: 1e-6,
            iterations: 1,
            time_s: 0.0061,
        };
        let mut infeasible = row.clone();
        infeasible.verdict = Status::Infeasible;
        let text = render(&[row, infeasible]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(
            lines[0].contains("Best μ")
                && lines[0].contains("# iters.")
                && lines[0].contains("Time(s)")
        );
        assert!(lines[1].contains("4.348e-2"));
        assert!(lines[2].contains("< 1e-6"));
        let col = |l: &str| l.find("explicit").unwrap();
        assert_eq!(
            col(lines[0].replace("Scheme", "explicit").as_str()),
            col(lines[1])
        );
    }
}
