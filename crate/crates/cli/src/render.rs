//! Plain-text rendering of result documents.

use std::fmt::Write;

use aucpower::report::{
    AnticipatedAurocs, BinormalDocument, PilotDocument, PowerOutcome, SingleDocument,
};
use aucpower::{AurocEstimate, McConfig};

pub fn single(doc: &SingleDocument) -> String {
    let i = &doc.inputs;
    let r = &doc.results.result;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "AUROC {}, prevalence {}, 95% CI width {}",
        i.auroc, i.prevalence, i.ci_width
    );
    let _ = writeln!(
        s,
        "minimum sample size: {} ({} events)",
        r.n_total, r.n_events
    );
    let _ = writeln!(
        s,
        "standard error: {:.6} (target {:.6})",
        r.se_achieved, r.target_se
    );
    if let Some(note) = &doc.results.advisory {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

fn auroc_line(s: &mut String, name: &str, est: &Option<AurocEstimate>) {
    let _ = match est {
        Some(e) => writeln!(
            s,
            "  AUROC {name}: {:.4} (95% CI {:.4} to {:.4})",
            e.theta_hat, e.ci_low, e.ci_high
        ),
        None => writeln!(s, "  AUROC {name}: perfect separation, no interval"),
    };
}

fn config_line(s: &mut String, c: &McConfig) {
    let _ = writeln!(
        s,
        "seed {}, {} iterations, alpha {}",
        c.seed, c.iterations, c.alpha
    );
}

fn outcome(s: &mut String, o: &PowerOutcome) {
    match o {
        PowerOutcome::Power {
            estimate,
            expected_events,
        } => {
            let _ = writeln!(
                s,
                "power at N = {} ({} expected events): {:.4} (MC SE {:.4})",
                estimate.n, expected_events, estimate.power, estimate.mc_se
            );
        }
        PowerOutcome::Curve { points } => {
            let _ = writeln!(s, "{:>8}  {:>7}  {:>7}", "n", "power", "mc_se");
            for p in points {
                let _ = writeln!(s, "{:>8}  {:>7.4}  {:>7.4}", p.n, p.power, p.mc_se);
            }
        }
        PowerOutcome::MinN {
            n,
            expected_events,
            search,
        } => {
            let _ = writeln!(
                s,
                "minimum N for power {}: {} ({} expected events)",
                search.target_power, n, expected_events
            );
            let _ = writeln!(
                s,
                "power at N = {}: {:.4} (MC SE {:.4})",
                n, search.estimate.power, search.estimate.mc_se
            );
            let _ = writeln!(s, "evaluated:");
            for p in o.points() {
                let _ = writeln!(s, "{:>8}  {:.4}", p.n, p.power);
            }
        }
    }
}

pub fn pilot(doc: &PilotDocument) -> String {
    let p = &doc.inputs.pilot;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "pilot: {} rows ({} cases, {} controls), prevalence {:.4}",
        p.n_rows, p.n_cases, p.n_controls, p.prevalence
    );
    auroc_line(&mut s, "A", &p.auroc_a);
    auroc_line(&mut s, "B", &p.auroc_b);
    for d in &p.rows_dropped {
        let _ = writeln!(s, "  skipped line {}: {}", d.line, d.reason);
    }
    for w in &p.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
    match &doc.results.weights {
        Some(w) => {
            let _ = writeln!(
                s,
                "simulated prevalence {} (weights: case {:.6e}, control {:.6e}, total {}, case mass {})",
                doc.results.simulated_prevalence, w.case_weight, w.control_weight, w.total, w.case_mass
            );
        }
        None => {
            let _ = writeln!(s, "resampling rows uniformly");
        }
    }
    config_line(&mut s, &doc.inputs.config);
    outcome(&mut s, &doc.results.outcome);
    s
}

fn aurocs(s: &mut String, a: &AnticipatedAurocs) {
    let _ = writeln!(
        s,
        "anticipated AUROC: A {:.4}, B {:.4}",
        a.anticipated_auroc.a, a.anticipated_auroc.b
    );
    let _ = writeln!(
        s,
        "  without the orientation correction: A {:.4}, B {:.4}",
        a.anticipated_auroc_literal.a, a.anticipated_auroc_literal.b
    );
}

pub fn binormal(doc: &BinormalDocument) -> String {
    let mut s = String::new();
    aurocs(&mut s, &doc.results.aurocs);
    let _ = writeln!(s, "prevalence {}", doc.inputs.spec.phi);
    config_line(&mut s, &doc.inputs.config);
    outcome(&mut s, &doc.results.outcome);
    s
}
