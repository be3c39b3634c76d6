//! Scenario grids, anchor checks and invariant checks for a loaded model.

use std::fmt::Write as _;

use railbreak_core::{
    check_independence, evaluate_anchors, leg_contribution, morning_share_of_breaks, query_risk,
    rail, risk_ratio, AnchorResult, Conditions, Leg, Location, Provenance, RailBreakModel, Result,
    Season, TimeOfDay, DISTRIBUTION_TOL, IDENTITY_TOL,
};
use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Four significant digits, fixed-point.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (3 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Serialize)]
pub struct CellRow {
    pub season: Season,
    pub time: TimeOfDay,
    pub location: Location,
    pub risk: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    /// Absolute deviation from the identity.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn check(name: &'static str, error: f64, tolerance: f64) -> InvariantCheck {
    InvariantCheck {
        name,
        error,
        tolerance,
        passed: error <= tolerance,
    }
}

/// Algebraic identities every valid rail model satisfies.
pub fn invariant_checks(model: &RailBreakModel) -> Result<Vec<InvariantCheck>> {
    let joint = model.joint()?;
    let mut out = vec![check(
        "joint_sums_to_one",
        (joint.total() - 1.0).abs(),
        DISTRIBUTION_TOL,
    )];

    let worst_row = model
        .network()
        .variables()
        .iter()
        .zip(model.network().cpts())
        .map(|(v, cpt)| {
            cpt.marginalize(v.name()).map(|rows| {
                rows.values()
                    .iter()
                    .map(|s| (s - 1.0).abs())
                    .fold(0.0, f64::max)
            })
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(check("cpt_rows_normalized", worst_row, DISTRIBUTION_TOL));

    let overall = query_risk(model, &Conditions::none())?;
    let from_joint = joint.marginal(&[rail::RAIL_BREAK])?.values()[1];
    out.push(check(
        "query_matches_joint_marginal",
        (overall - from_joint).abs(),
        IDENTITY_TOL,
    ));

    let trip: f64 = Location::ALL
        .iter()
        .map(|&l| leg_contribution(model, &Leg::new(l)))
        .sum::<Result<f64>>()?;
    out.push(check(
        "trip_sum_identity",
        (trip - overall).abs(),
        DISTRIBUTION_TOL,
    ));

    let morning = Conditions::none().time(TimeOfDay::Morning);
    let p_morning = model.time_marginal()[TimeOfDay::Morning.index()];
    let bayes = query_risk(model, &morning)? * p_morning / overall;
    out.push(check(
        "bayes_rule_consistency",
        (bayes - morning_share_of_breaks(model)?).abs(),
        DISTRIBUTION_TOL,
    ));

    if model.is_factorized() {
        let (s, t, l) = (
            rail::season_variable(),
            rail::time_variable(),
            rail::location_variable(),
        );
        let independent = check_independence(&joint, &s, &t, None, DISTRIBUTION_TOL)?
            && check_independence(&joint, &s, &l, None, DISTRIBUTION_TOL)?
            && check_independence(&joint, &t, &l, None, DISTRIBUTION_TOL)?;
        out.push(InvariantCheck {
            name: "parents_pairwise_independent",
            error: if independent { 0.0 } else { 1.0 },
            tolerance: DISTRIBUTION_TOL,
            passed: independent,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub cells: Vec<CellRow>,
    pub summary: Vec<SummaryRow>,
    pub anchors: Vec<AnchorResult>,
    pub invariants: Vec<InvariantCheck>,
}

impl ScenarioReport {
    pub fn build(model: &RailBreakModel, provenance: Option<Provenance>) -> Result<Self> {
        let cells = rail::cells()
            .map(|(s, t, l)| {
                Ok(CellRow {
                    season: s,
                    time: t,
                    location: l,
                    risk: query_risk(model, &Conditions::cell(s, t, l))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut summary = vec![SummaryRow {
            name: "overall".into(),
            value: query_risk(model, &Conditions::none())?,
        }];
        for &s in Season::ALL {
            summary.push(SummaryRow {
                name: format!("season={s}"),
                value: query_risk(model, &Conditions::none().season(s))?,
            });
        }
        for &t in TimeOfDay::ALL {
            summary.push(SummaryRow {
                name: format!("time={t}"),
                value: query_risk(model, &Conditions::none().time(t))?,
            });
        }
        for &l in Location::ALL {
            summary.push(SummaryRow {
                name: format!("location={l}"),
                value: query_risk(model, &Conditions::none().location(l))?,
            });
        }
        let inland = Conditions::none().location(Location::Inland);
        let coastal = Conditions::none().location(Location::Coastal);
        summary.push(SummaryRow {
            name: "ratio inland/coastal".into(),
            value: risk_ratio(model, &inland, &coastal)?,
        });
        summary.push(SummaryRow {
            name: "p(time=morning | break)".into(),
            value: morning_share_of_breaks(model)?,
        });
        let trip: f64 = Location::ALL
            .iter()
            .map(|&l| leg_contribution(model, &Leg::new(l)))
            .sum::<Result<f64>>()?;
        summary.push(SummaryRow {
            name: "trip sum over sections".into(),
            value: trip,
        });

        Ok(Self {
            tool_version: TOOL_VERSION,
            provenance,
            cells,
            summary,
            anchors: evaluate_anchors(model)?,
            invariants: invariant_checks(model)?,
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p(break | season, time, location)");
        let _ = writeln!(
            out,
            "{:<14} {:<12} {:<13} {:>9}",
            "season", "time", "location", "risk"
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<14} {:<12} {:<13} {:>9}",
                c.season.label(),
                c.time.label(),
                c.location.label(),
                sig4(c.risk)
            );
        }
        let _ = writeln!(out, "\nsummary");
        for s in &self.summary {
            let _ = writeln!(out, "{:<28} {:>9}", s.name, sig4(s.value));
        }
        let _ = writeln!(out, "\nanchors");
        out.push_str(&render_anchors(&self.anchors));
        let _ = writeln!(out, "\ninvariants");
        out.push_str(&render_invariants(&self.invariants));
        out
    }
}

pub fn render_anchors(anchors: &[AnchorResult]) -> String {
    let mut out = String::new();
    for a in anchors {
        let _ = writeln!(
            out,
            "{:<34} {:>9} target {:>7} ± {:<7} residual {:+.2} tol  {}",
            a.name,
            sig4(a.value),
            a.target,
            a.tolerance,
            a.scaled_residual(),
            if a.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn render_invariants(checks: &[InvariantCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(
            out,
            "{:<34} error {:>10.3e} tol {:.0e}  {}",
            c.name,
            c.error,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}
