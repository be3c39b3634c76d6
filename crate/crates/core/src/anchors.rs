//! Published risk figures that a calibrated model must reproduce.

use serde::Serialize;

use crate::error::Result;
use crate::rail::{
    morning_share_of_breaks, query_risk, risk_ratio, Conditions, Location, RailBreakModel, Season,
    TimeOfDay,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnchorQuery {
    /// p(break | conditions)
    Risk { conditions: Conditions },
    /// p(break | numerator) / p(break | denominator)
    Ratio {
        numerator: Conditions,
        denominator: Conditions,
    },
    /// p(time = morning | break)
    MorningShareOfBreaks,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anchor {
    pub name: &'static str,
    pub query: AnchorQuery,
    pub target: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorResult {
    pub name: &'static str,
    pub target: f64,
    pub tolerance: f64,
    pub value: f64,
    pub passed: bool,
}

impl AnchorResult {
    /// Signed error in units of the tolerance.
    pub fn scaled_residual(&self) -> f64 {
        (self.value - self.target) / self.tolerance
    }
}

impl Anchor {
    pub fn evaluate(&self, model: &RailBreakModel) -> Result<AnchorResult> {
        let value = match &self.query {
            AnchorQuery::Risk { conditions } => query_risk(model, conditions)?,
            AnchorQuery::Ratio {
                numerator,
                denominator,
            } => risk_ratio(model, numerator, denominator)?,
            AnchorQuery::MorningShareOfBreaks => morning_share_of_breaks(model)?,
        };
        Ok(AnchorResult {
            name: self.name,
            target: self.target,
            tolerance: self.tolerance,
            value,
            passed: (value - self.target).abs() <= self.tolerance,
        })
    }
}

fn risk(name: &'static str, conditions: Conditions, target: f64, tolerance: f64) -> Anchor {
    Anchor {
        name,
        query: AnchorQuery::Risk { conditions },
        target,
        tolerance,
    }
}

/// The ten reference anchors: overall risk, seven scenarios, the inland/coastal
/// ratio and the morning share of breaks.
pub fn reference_anchors() -> Vec<Anchor> {
    use Location::*;
    use Season::*;
    use TimeOfDay::*;
    let c = Conditions::none;
    vec![
        risk("overall", c(), 0.019, 0.001),
        risk(
            "inland_winter",
            c().location(Inland).season(Winter),
            0.024,
            0.002,
        ),
        risk(
            "inland_late_winter",
            c().location(Inland).season(LateWinter),
            0.014,
            0.002,
        ),
        risk(
            "inland_early_summer",
            c().location(Inland).season(EarlySummer),
            0.003,
            0.001,
        ),
        risk(
            "coastal_not_morning",
            c().location(Coastal).time(NotMorning),
            0.007,
            0.001,
        ),
        risk(
            "inland_morning",
            c().location(Inland).time(Morning),
            0.030,
            0.002,
        ),
        risk(
            "inland_winter_morning",
            c().location(Inland).time(Morning).season(Winter),
            0.054,
            0.003,
        ),
        risk(
            "coastal_not_morning_early_summer",
            c().location(Coastal).time(NotMorning).season(EarlySummer),
            0.0007,
            0.0002,
        ),
        Anchor {
            name: "inland_coastal_ratio",
            query: AnchorQuery::Ratio {
                numerator: c().location(Inland),
                denominator: c().location(Coastal),
            },
            target: 10.0,
            tolerance: 1.5,
        },
        Anchor {
            name: "morning_share_of_breaks",
            query: AnchorQuery::MorningShareOfBreaks,
            target: 0.56,
            tolerance: 0.02,
        },
    ]
}

pub fn evaluate_anchors(model: &RailBreakModel) -> Result<Vec<AnchorResult>> {
    reference_anchors()
        .iter()
        .map(|a| a.evaluate(model))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_distinct_anchors() {
        let anchors = reference_anchors();
        assert_eq!(anchors.len(), 10);
        for (i, a) in anchors.iter().enumerate() {
            assert!(anchors[..i].iter().all(|b| b.name != a.name));
            assert!(a.tolerance > 0.0);
        }
    }
}
