//! Acceptance criteria 1-9 on the desk configurations. One line per criterion and
//! configuration plus a summary line per criterion; written straight to stderr so the
//! table shows without --nocapture.

use sgsov::config::ModelConfig;
use sgsov::oracle::{self, ComparisonReport, Prepared, Tolerances};
use sgsov::Model64;
use std::io::Write;
use std::time::{Duration, Instant};

const SEED: u64 = 20240917;

/// Criteria that fail as specified and are documented in the README.
const KNOWN_FAILURES: &[(u8, &str)] = &[(3, "stretch")];

const CONFIGS: &[&str] = &["cfg-a", "cfg-b", "single-site", "stretch"];

const ALGEBRA_LIMIT: Duration = Duration::from_secs(10);
const PAIR_SWEEP_LIMIT: Duration = Duration::from_secs(120);
const SUITE_LIMIT: Duration = Duration::from_secs(300);

struct Outcome {
    criterion: u8,
    config: &'static str,
    pass: bool,
    detail: String,
}

fn line(s: &str) {
    let mut err = std::io::stderr();
    let _ = writeln!(err, "{s}");
}

fn describe(items: &[&ComparisonReport]) -> String {
    let failed: Vec<String> = items
        .iter()
        .filter(|r| !r.pass)
        .map(|r| {
            if r.label.contains("perturbed") {
                format!("{} ({:.2e}, required > {:.0e})", r.label, r.abs_err, r.tolerance)
            } else {
                format!("{} ({:.2e}, tol {:.0e})", r.label, r.rel_err, r.tolerance)
            }
        })
        .collect();
    if failed.is_empty() {
        let worst = items
            .iter()
            .filter(|r| !r.label.contains("perturbed") && r.tolerance > 0.0)
            .max_by(|a, b| (a.rel_err.min(a.abs_err) / a.tolerance).total_cmp(&(b.rel_err.min(b.abs_err) / b.tolerance)));
        match worst {
            Some(w) => format!("{} items; worst: {} at {:.2e} (tol {:.0e})", items.len(), w.label, w.rel_err.min(w.abs_err), w.tolerance),
            None => format!("{} items", items.len()),
        }
    } else {
        format!("{}/{} items failed: {}", failed.len(), items.len(), failed.join("; "))
    }
}

fn evaluate(name: &'static str, out: &mut Vec<Outcome>) {
    let model: Model64 = ModelConfig::preset(name).expect("preset").build().expect("valid preset");
    let tol = Tolerances::default();

    let t = Instant::now();
    let algebra = oracle::algebra_reports(&model, SEED, &tol);
    let algebra_time = t.elapsed();
    assert!(!algebra.is_empty());

    let t = Instant::now();
    let reports = oracle::verify_suite(&model, SEED, &tol);
    let suite_time = t.elapsed();

    for k in 1..=8u8 {
        let items: Vec<&ComparisonReport> = reports.iter().filter(|r| r.criterion == k).collect();
        let mut pass = !items.is_empty() && items.iter().all(|r| r.pass);
        let mut detail = describe(&items);
        if k == 1 {
            pass &= algebra_time < ALGEBRA_LIMIT;
            detail = format!("{detail}; algebra {:.2}s (limit {}s)", algebra_time.as_secs_f64(), ALGEBRA_LIMIT.as_secs());
        }
        if k == 8 && name == "cfg-a" {
            let st = Prepared::build(&model).expect("cfg-a spectrum");
            let t = Instant::now();
            let rows = oracle::ff_u_sweep(&st.basis, &st.states, &st.left, &st.right, 1, tol.ff_u).expect("pair sweep");
            let sweep = t.elapsed();
            let all = rows.len() == 729 && rows.iter().all(|r| r.pass);
            pass &= all && sweep < PAIR_SWEEP_LIMIT;
            detail = format!(
                "{detail}; full 729-pair ff_u sweep {} in {:.2}s (limit {}s)",
                if all { "ok" } else { "FAILED" },
                sweep.as_secs_f64(),
                PAIR_SWEEP_LIMIT.as_secs()
            );
        }
        out.push(Outcome { criterion: k, config: name, pass, detail });
    }

    let again = oracle::verify_suite(&model, SEED, &tol);
    let a: Vec<String> = reports.iter().map(ComparisonReport::to_json_line).collect();
    let b: Vec<String> = again.iter().map(ComparisonReport::to_json_line).collect();
    let identical = a == b;
    out.push(Outcome {
        criterion: 9,
        config: name,
        pass: identical && suite_time < SUITE_LIMIT,
        detail: format!(
            "rerun {} ({} reports); suite {:.1}s (limit {}s)",
            if identical { "identical" } else { "DIFFERS" },
            a.len(),
            suite_time.as_secs_f64(),
            SUITE_LIMIT.as_secs()
        ),
    });
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = vec![];
    for name in CONFIGS {
        evaluate(name, &mut outcomes);
    }
    outcomes.sort_by_key(|o| o.criterion);
    line("");
    line("acceptance criteria (seed 20240917)");
    for o in &outcomes {
        let known = KNOWN_FAILURES.contains(&(o.criterion, o.config));
        let status = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, documented)",
            (false, false) => "FAIL",
        };
        line(&format!("  criterion {} [{}] {}: {}", o.criterion, o.config, status, o.detail));
    }
    for k in 1..=9u8 {
        let failing: Vec<&str> = outcomes.iter().filter(|o| o.criterion == k && !o.pass).map(|o| o.config).collect();
        if failing.is_empty() {
            line(&format!("criterion {k}: PASS"));
        } else {
            line(&format!("criterion {k}: FAIL on {}", failing.join(", ")));
        }
    }
    let unexpected: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_FAILURES.contains(&(o.criterion, o.config)))
        .map(|o| format!("criterion {} [{}]: {}", o.criterion, o.config, o.detail))
        .collect();
    assert!(unexpected.is_empty(), "undocumented acceptance failures:\n{}", unexpected.join("\n"));
}
