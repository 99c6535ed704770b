//! Acceptance suite: one PASS/FAIL line per criterion. Tolerances, claim
//! counts and runtime budgets are pinned here so the library cannot loosen
//! them silently.

use std::process::ExitCode;

use igdyn::acceptance::{run_criterion, Comparison, CriterionOutcome, CRITERION_COUNT};

struct Pinned {
    id: u32,
    claims: usize,
    tolerances: &'static [f64],
    budget_seconds: f64,
}

const PINNED: [Pinned; 10] = [
    Pinned { id: 1, claims: 5, tolerances: &[1e-6], budget_seconds: 10.0 },
    Pinned { id: 2, claims: 10, tolerances: &[1e-6], budget_seconds: 5.0 },
    Pinned { id: 3, claims: 3, tolerances: &[1e-8], budget_seconds: 10.0 },
    Pinned { id: 4, claims: 2, tolerances: &[1e-6, 1e-9], budget_seconds: 10.0 },
    Pinned { id: 5, claims: 7, tolerances: &[0.05, 1e-6], budget_seconds: 30.0 },
    Pinned { id: 6, claims: 9, tolerances: &[0.05], budget_seconds: 60.0 },
    Pinned { id: 7, claims: 5, tolerances: &[0.05, 0.01], budget_seconds: 30.0 },
    Pinned { id: 8, claims: 3, tolerances: &[0.05], budget_seconds: 30.0 },
    Pinned { id: 9, claims: 9, tolerances: &[1e-5], budget_seconds: 10.0 },
    Pinned { id: 10, claims: 3, tolerances: &[1e-6, 1e-12, 0.0], budget_seconds: 10.0 },
];

fn pinning_problems(p: &Pinned, o: &CriterionOutcome) -> Vec<String> {
    let mut out = Vec::new();
    if o.budget_seconds != p.budget_seconds {
        out.push(format!("budget {} differs from pinned {}", o.budget_seconds, p.budget_seconds));
    }
    if o.claims.len() != p.claims {
        out.push(format!("{} claims, pinned {}", o.claims.len(), p.claims));
    }
    for c in &o.claims {
        if !p.tolerances.contains(&c.tolerance) {
            out.push(format!("claim `{}` uses tolerance {}", c.name, c.tolerance));
        }
        if c.comparison == Comparison::GreaterThan && c.tolerance != 0.0 {
            out.push(format!("claim `{}` is one-sided with a tolerance", c.name));
        }
    }
    out
}

fn main() -> ExitCode {
    assert_eq!(CRITERION_COUNT as usize, PINNED.len());
    let mut passed = 0;
    for p in &PINNED {
        let o = run_criterion(p.id).expect("criterion exists");
        let problems = pinning_problems(p, &o);
        let ok = o.pass() && problems.is_empty();
        let summary = o.summary();
        // a pinning problem fails a criterion whose claims all hold
        println!("{}", if ok { summary } else { summary.replacen("PASS", "FAIL", 1) });
        for problem in &problems {
            println!("    pinning: {problem}");
        }
        for note in &o.notes {
            println!("    note: {note}");
        }
        if ok {
            passed += 1;
        }
    }
    println!("acceptance: {passed}/{} criteria passed", PINNED.len());
    if passed == PINNED.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
