//! Report tables and the per-step bar chart.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::aggregate::{
    best_table, method_means, pairwise_tests, rank_scores, BestRow, MethodMean, PairwiseTest,
    RankTable, RANKED_STEPS,
};
use super::store::ResultsStore;
use crate::error::{Error, Result};
use crate::model::Step;

/// Chance level for six balanced classes.
pub const RANDOM_BASELINE: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    /// Aggregate stores that lack part of the 288-combination grid.
    pub partial: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOutcome {
    pub written: Vec<PathBuf>,
    /// Tables that could not be produced, with the reason.
    pub skipped: Vec<(String, String)>,
    pub best: Vec<BestRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn spec_columns(spec: &crate::model::CombinationSpec) -> String {
    Step::ALL
        .iter()
        .map(|&s| spec.method(s))
        .collect::<Vec<_>>()
        .join(",")
}

fn spec_header() -> String {
    Step::ALL.iter().map(|s| s.key()).collect::<Vec<_>>().join(",")
}

pub fn best_table_csv(rows: &[BestRow]) -> String {
    let mut out = format!("rank,{},mean_f1,sd_f1,n_subjects\n", spec_header());
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{},{}",
            r.rank,
            spec_columns(&r.spec),
            r.mean_f1,
            opt(r.sd_f1),
            r.n_subjects
        );
    }
    out
}

pub fn method_means_csv(means: &[MethodMean]) -> String {
    let mut out = String::from("step,method,subject,n_specs,mean_f1,sd_f1\n");
    for m in means {
        for (subject, v, n) in &m.per_subject {
            let _ = writeln!(out, "{},{},{subject},{n},{v:.6},", m.step.key(), m.method);
        }
        let n: usize = m.per_subject.iter().map(|p| p.2).sum();
        let _ = writeln!(out, "{},{},all,{n},{:.6},{}", m.step.key(), m.method, m.mean, opt(m.sd));
    }
    out
}

pub fn rank_table_csv(table: &RankTable) -> String {
    let mut out = String::from("step,method,score,pct_max,min_score,max_score,total_score\n");
    for r in &table.rows {
        let b = table
            .bounds
            .iter()
            .find(|(s, _)| *s == r.step)
            .map(|(_, b)| *b)
            .expect("bounds for every ranked step");
        let _ = writeln!(
            out,
            "{},{},{},{:.1},{},{},{}",
            r.step.key(),
            r.method,
            r.score,
            r.pct_max,
            b.min,
            b.max,
            b.total
        );
    }
    out
}

pub fn pairwise_csv(tests: &[PairwiseTest]) -> String {
    let mut out = String::from("step,method_a,method_b,n,mean_a,mean_b,t,df,p,p_bonferroni,cohens_d\n");
    for t in tests {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6},{},{:.6},{:.6},{}",
            t.step.key(),
            t.method_a,
            t.method_b,
            t.n,
            t.mean_a,
            t.mean_b,
            t.t,
            t.df,
            t.p,
            t.p_bonferroni,
            opt(t.cohens_d)
        );
    }
    out
}

fn step_title(step: Step) -> &'static str {
    match step {
        Step::Filtering => "GRF filtering",
        Step::Derivative => "Time derivative",
        Step::TimePoints => "Time normalization",
        Step::Reduction => "Data reduction",
        Step::WeightNorm => "Weight normalization",
        Step::Scaling => "Data scaling",
        Step::Classifier => "Classifier",
    }
}

/// Grouped bars of mean F1 (%) per method with the chance-level line.
pub fn fig3_svg(means: &[MethodMean]) -> String {
    let bar_w = 28.0;
    let gap = 6.0;
    let group_gap = 36.0;
    let left = 50.0;
    let top = 30.0;
    let plot_h = 260.0;
    let y = |pct: f64| top + plot_h * (1.0 - pct / 100.0);

    let mut bars = String::new();
    let mut x = left + group_gap / 2.0;
    for step in RANKED_STEPS {
        let ms: Vec<&MethodMean> = means.iter().filter(|m| m.step == step).collect();
        if ms.is_empty() {
            continue;
        }
        let start = x;
        for m in &ms {
            let pct = (m.mean * 100.0).clamp(0.0, 100.0);
            let _ = writeln!(
                bars,
                r#"<rect x="{x:.1}" y="{:.1}" width="{bar_w}" height="{:.1}" fill="steelblue"><title>{}={}: {pct:.1}%</title></rect>"#,
                y(pct),
                y(0.0) - y(pct),
                step.key(),
                m.method
            );
            let _ = writeln!(
                bars,
                r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end" transform="rotate(-45 {:.1} {:.1})">{}</text>"#,
                x + bar_w / 2.0,
                y(0.0) + 12.0,
                x + bar_w / 2.0,
                y(0.0) + 12.0,
                m.method
            );
            x += bar_w + gap;
        }
        let _ = writeln!(
            bars,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            (start + x - gap) / 2.0,
            top - 10.0,
            step_title(step)
        );
        x += group_gap;
    }
    let width = x + 10.0;
    let height = top + plot_h + 70.0;

    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif">
"#
    );
    for pct in [0.0, 20.0, 40.0, 60.0, 80.0, 100.0] {
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{pct:.0}</text>"##,
            width - 10.0,
            y(pct),
            y(pct),
            left - 6.0,
            y(pct) + 3.0
        );
    }
    svg.push_str(&bars);
    let base = y(RANDOM_BASELINE * 100.0);
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" x2="{:.1}" y1="{base:.1}" y2="{base:.1}" stroke="crimson" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}" font-size="10" fill="crimson" text-anchor="end">Random baseline = 16.7%</text>"#,
        width - 10.0,
        width - 12.0,
        base - 4.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" font-size="11" transform="rotate(-90 14 {:.1})" text-anchor="middle">mean F1 (%)</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn write(dir: &Path, name: &str, text: &str, out: &mut ReportOutcome) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    out.written.push(path);
    Ok(())
}

/// Writes best_table.csv, method_means.csv, rank_table.csv,
/// pairwise_tests.csv and fig3.svg. Tables whose preconditions fail are
/// listed in `skipped`; an empty store is an error.
pub fn write_report(store: &ResultsStore, out_dir: &Path, opts: ReportOptions) -> Result<ReportOutcome> {
    if store.mean_rows().next().is_none() {
        return Err(Error::Aggregation("results store has no mean rows to report".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut out = ReportOutcome {
        best: best_table(store, usize::MAX),
        ..Default::default()
    };
    write(out_dir, "best_table.csv", &best_table_csv(&out.best), &mut out)?;

    match method_means(store, opts.partial) {
        Ok(means) => {
            write(out_dir, "method_means.csv", &method_means_csv(&means), &mut out)?;
            write(out_dir, "fig3.svg", &fig3_svg(&means), &mut out)?;
            match pairwise_tests(&means) {
                Ok(tests) => write(out_dir, "pairwise_tests.csv", &pairwise_csv(&tests), &mut out)?,
                Err(e) => out.skipped.push(("pairwise_tests.csv".into(), e.to_string())),
            }
        }
        Err(e) => {
            for name in ["method_means.csv", "fig3.svg", "pairwise_tests.csv"] {
                out.skipped.push((name.into(), e.to_string()));
            }
        }
    }
    match rank_scores(store) {
        Ok(t) => write(out_dir, "rank_table.csv", &rank_table_csv(&t), &mut out)?,
        Err(e) => out.skipped.push(("rank_table.csv".into(), e.to_string())),
    }
    Ok(out)
}
