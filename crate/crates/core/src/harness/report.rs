//! Read-only aggregation of run directories into a markdown table plus a
//! plot-ready effective step-size CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::{RunRecord, SUMMARY_FILE, TRAJECTORY_FILE};
use crate::error::Result;
use crate::schedules::StepPolicy;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub markdown: String,
    /// run_id,iter,step_size,f
    pub steps_csv: String,
    /// Ids without a readable run directory; skipped with a warning.
    pub missing: Vec<String>,
}

struct Row {
    iter: usize,
    f: f64,
    step: f64,
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| rec.get(i).unwrap_or("").parse::<f64>().unwrap_or(f64::NAN);
        out.push(Row { iter: rec.get(0).unwrap_or("0").parse().unwrap_or(0), f: num(1), step: num(3) });
    }
    Ok(out)
}

/// Length of the prefix over which the step size never decreases.
fn monotone_prefix(rows: &[Row]) -> usize {
    rows.windows(2).take_while(|w| w[1].step >= w[0].step).count() + usize::from(!rows.is_empty())
}

fn is_adaptive(p: &StepPolicy) -> bool {
    match p {
        StepPolicy::TheoreticalAdaptive { .. } => true,
        StepPolicy::PracticalClipped { .. } => true,
        _ => false,
    }
}

pub fn emit_report(root: &Path, run_ids: &[String]) -> Result<Report> {
    let mut md = String::from(
        "| run | problem | policy | stop | iters | final f | final ‖∇f‖ | step non-decreasing for |\n\
         |---|---|---|---|---|---|---|---|\n",
    );
    let mut csv = String::from("run_id,iter,step_size,f\n");
    let mut missing = Vec::new();
    for id in run_ids {
        let dir = root.join(id);
        let loaded = fs::read_to_string(dir.join(SUMMARY_FILE))
            .ok()
            .and_then(|s| serde_json::from_str::<RunRecord>(&s).ok())
            .and_then(|r| read_rows(&dir.join(TRAJECTORY_FILE)).ok().map(|rows| (r, rows)));
        let Some((rec, rows)) = loaded else {
            eprintln!("warning: run '{id}' not found under {}, skipped", root.display());
            missing.push(id.clone());
            continue;
        };
        let s = &rec.summary;
        let mono = if is_adaptive(&rec.config.policy) {
            format!("{} / {}", monotone_prefix(&rows), rows.len())
        } else {
            "–".into()
        };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {:?} | {} | {:.6e} | {:.6e} | {} |",
            rec.run_id, s.problem_id, s.policy_id, s.stop_reason, s.iters, s.final_f, s.final_grad_norm, mono
        );
        for r in &rows {
            let _ = writeln!(csv, "{},{},{},{}", rec.run_id, r.iter, r.step, r.f);
        }
    }
    Ok(Report { markdown: md, steps_csv: csv, missing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{execute, ExperimentConfig};

    #[test]
    fn empty_and_single() {
        let dir = tempfile::tempdir().unwrap();
        let r = emit_report(dir.path(), &[]).unwrap();
        assert_eq!(r.markdown.lines().count(), 2);
        let cfg = ExperimentConfig::parse(
            "[problem]\nname = \"exp_quadratic\"\n[policy]\nkind = \"theoretical_adaptive\"\nH0 = 1.0\nH1 = 1.0\nf_star = 0.5\n[stop]\nmax_iters = 50\n",
        )
        .unwrap();
        let rec = execute(&cfg, dir.path()).unwrap();
        let r = emit_report(dir.path(), &[rec.run_id.clone(), "nope".into()]).unwrap();
        assert_eq!(r.missing, vec!["nope".to_string()]);
        assert_eq!(r.markdown.lines().count(), 3);
        assert!(r.markdown.contains(&format!("| {} |", rec.summary.iters)));
        // adaptive steps grow along the whole monotone descent
        assert!(r.markdown.contains("51 / 51"));
    }
}
