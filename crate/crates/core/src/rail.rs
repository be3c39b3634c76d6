//! The four-variable rail-break network: Season, Time of day and Location all
//! point at Rail Break.
//!
//! `p(R = break)` is the probability that one train's exposure to one line
//! section is linked to a rail break occurring before or under the next loaded
//! train. Every query here is a conditional of that per-exposure probability.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{Evidence, Factor, Variable};
use crate::network::{BayesNet, Dag};

pub const SEASON: &str = "season";
pub const TIME: &str = "time";
pub const LOCATION: &str = "location";
pub const RAIL_BREAK: &str = "rail_break";

pub const NO_BREAK: &str = "no_break";
pub const BREAK: &str = "break";

/// Number of (S, T, L, R) cells.
pub const CELLS: usize = 48;

macro_rules! categorical {
    (
        $(#[$meta:meta])*
        $name:ident, $what:literal {
            $( $variant:ident = $label:literal, $alias:literal; )+
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $( $variant, )+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[ $( $name::$variant, )+ ];

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(i: usize) -> Option<Self> {
                Self::ALL.get(i).copied()
            }

            pub fn label(self) -> &'static str {
                match self {
                    $( $name::$variant => $label, )+
                }
            }

            pub fn alias(self) -> &'static str {
                match self {
                    $( $name::$variant => $alias, )+
                }
            }

            /// Strict lookup by canonical label only.
            pub fn from_label(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|v| v.label() == s)
            }

            pub fn legal_states() -> String {
                Self::ALL.iter().map(|v| v.label()).collect::<Vec<_>>().join(", ")
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        /// Accepts the canonical label, the short alias, or the label with hyphens.
        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let key = s.trim().to_ascii_lowercase().replace('-', "_");
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.label() == key || v.alias() == key)
                    .ok_or_else(|| Error::UnknownState {
                        variable: $what.to_string(),
                        state: s.to_string(),
                        legal: Self::legal_states(),
                    })
            }
        }
    };
}

categorical! {
    Season, "season" {
        EarlySummer = "early_summer", "s0";
        LateSummer = "late_summer", "s1";
        Winter = "winter", "s2";
        LateWinter = "late_winter", "s3";
    }
}

categorical! {
    TimeOfDay, "time" {
        Morning = "morning", "t0";
        NotMorning = "not_morning", "t1";
    }
}

categorical! {
    Location, "location" {
        Coastal = "coastal", "l0";
        SemiCoastal = "semi_coastal", "l1";
        Inland = "inland", "l2";
    }
}

pub fn season_variable() -> Variable {
    Variable::new(SEASON, Season::ALL.iter().map(|s| s.label())).expect("static states")
}

pub fn time_variable() -> Variable {
    Variable::new(TIME, TimeOfDay::ALL.iter().map(|s| s.label())).expect("static states")
}

pub fn location_variable() -> Variable {
    Variable::new(LOCATION, Location::ALL.iter().map(|s| s.label())).expect("static states")
}

pub fn break_variable() -> Variable {
    Variable::new(RAIL_BREAK, [NO_BREAK, BREAK]).expect("static states")
}

/// Row-major index of an (S, T, L) cell.
pub fn cell_index(s: Season, t: TimeOfDay, l: Location) -> usize {
    (s.index() * TimeOfDay::ALL.len() + t.index()) * Location::ALL.len() + l.index()
}

/// All 24 (S, T, L) cells in row-major order.
pub fn cells() -> impl Iterator<Item = (Season, TimeOfDay, Location)> {
    Season::ALL.iter().flat_map(|&s| {
        TimeOfDay::ALL
            .iter()
            .flat_map(move |&t| Location::ALL.iter().map(move |&l| (s, t, l)))
    })
}

/// p(R = break | S, T, L) for each of the 24 cells, indexed by [`cell_index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakCpt(pub [f64; 24]);

impl BreakCpt {
    pub fn get(&self, s: Season, t: TimeOfDay, l: Location) -> f64 {
        self.0[cell_index(s, t, l)]
    }

    pub fn set(&mut self, s: Season, t: TimeOfDay, l: Location, p: f64) {
        self.0[cell_index(s, t, l)] = p;
    }
}

/// Which way a model's network was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// p(R|S,T,L) p(S) p(T) p(L): the parentless S, T, L structure.
    Factorized,
    /// The normalized 48-cell count table held exactly as a chain S → T → L → R.
    FullJoint,
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMode::Factorized => "factorized",
            FitMode::FullJoint => "full_joint",
        })
    }
}

impl FromStr for FitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "factorized" => Ok(FitMode::Factorized),
            "full_joint" => Ok(FitMode::FullJoint),
            _ => Err(Error::InvalidQuery(format!(
                "unknown fit mode `{s}` (expected factorized or full_joint)"
            ))),
        }
    }
}

fn edge(p: &str, c: &str) -> (String, String) {
    (p.to_string(), c.to_string())
}

/// A Bayesian network over season, time, location and rail break.
///
/// Factorized models have exactly the edges S → R, T → R, L → R. Full-joint
/// models carry every lower-triangular edge so they can hold any joint.
#[derive(Debug, Clone, PartialEq)]
pub struct RailBreakModel {
    net: BayesNet,
    mode: FitMode,
}

impl RailBreakModel {
    pub fn factorized(
        season: [f64; 4],
        time: [f64; 2],
        location: [f64; 3],
        breaks: &BreakCpt,
    ) -> Result<Self> {
        let dag = Dag::new(
            [SEASON, TIME, LOCATION, RAIL_BREAK],
            [
                edge(SEASON, RAIL_BREAK),
                edge(TIME, RAIL_BREAK),
                edge(LOCATION, RAIL_BREAK),
            ],
        )?;
        let mut values = Vec::with_capacity(CELLS);
        for p in breaks.0 {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidCpt {
                    variable: RAIL_BREAK.into(),
                    reason: format!("break probability {p} outside [0, 1]"),
                });
            }
            values.push(1.0 - p);
            values.push(p);
        }
        let mut cpts = BTreeMap::new();
        cpts.insert(
            SEASON.to_string(),
            Factor::new(vec![season_variable()], season.to_vec())?,
        );
        cpts.insert(
            TIME.to_string(),
            Factor::new(vec![time_variable()], time.to_vec())?,
        );
        cpts.insert(
            LOCATION.to_string(),
            Factor::new(vec![location_variable()], location.to_vec())?,
        );
        cpts.insert(
            RAIL_BREAK.to_string(),
            Factor::new(
                vec![
                    season_variable(),
                    time_variable(),
                    location_variable(),
                    break_variable(),
                ],
                values,
            )?,
        );
        Ok(Self {
            net: BayesNet::new(dag, cpts)?,
            mode: FitMode::Factorized,
        })
    }

    /// Holds an arbitrary joint over (S, T, L, R) through the chain rule.
    pub fn from_joint(joint: &Factor) -> Result<Self> {
        let joint = joint.reorder(&[SEASON, TIME, LOCATION, RAIL_BREAK])?;
        let expected = [
            season_variable(),
            time_variable(),
            location_variable(),
            break_variable(),
        ];
        if joint.scope() != expected {
            return Err(Error::Structure(
                "joint does not range over the rail variables".into(),
            ));
        }
        let joint = joint.normalize()?;
        let dag = Dag::new(
            [SEASON, TIME, LOCATION, RAIL_BREAK],
            [
                edge(SEASON, TIME),
                edge(SEASON, LOCATION),
                edge(TIME, LOCATION),
                edge(SEASON, RAIL_BREAK),
                edge(TIME, RAIL_BREAK),
                edge(LOCATION, RAIL_BREAK),
            ],
        )?;
        let names = [SEASON, TIME, LOCATION, RAIL_BREAK];
        let mut cpts = BTreeMap::new();
        for k in 0..names.len() {
            let family = joint.marginal(&names[..=k])?;
            let cpt = if k == 0 {
                family
            } else {
                conditional_of_last(&family)?
            };
            cpts.insert(names[k].to_string(), cpt);
        }
        Ok(Self {
            net: BayesNet::new(dag, cpts)?,
            mode: FitMode::FullJoint,
        })
    }

    /// Wraps a network that ranges over exactly the four rail variables.
    pub fn from_network(net: BayesNet) -> Result<Self> {
        let expected = [
            season_variable(),
            time_variable(),
            location_variable(),
            break_variable(),
        ];
        for v in &expected {
            match net.variable(v.name()) {
                Some(u) if u == v => {}
                Some(_) => {
                    return Err(Error::Structure(format!(
                        "variable `{}` has non-standard states",
                        v.name()
                    )))
                }
                None => return Err(Error::Structure(format!("missing variable `{}`", v.name()))),
            }
        }
        if net.variables().len() != expected.len() {
            return Err(Error::Structure("network has extra variables".into()));
        }
        let mut parents = net.dag().parents(RAIL_BREAK);
        parents.sort_unstable();
        let factorized = net.dag().edges().len() == 3 && parents == [LOCATION, SEASON, TIME];
        let mode = if factorized {
            FitMode::Factorized
        } else {
            FitMode::FullJoint
        };
        Ok(Self { net, mode })
    }

    pub fn network(&self) -> &BayesNet {
        &self.net
    }

    pub fn mode(&self) -> FitMode {
        self.mode
    }

    pub fn is_factorized(&self) -> bool {
        self.mode == FitMode::Factorized
    }

    pub fn joint(&self) -> Result<Factor> {
        self.net.joint()
    }

    fn distribution(&self, name: &str) -> Vec<f64> {
        self.net
            .query(&[name], &Evidence::new())
            .expect("rail variables are present")
            .values()
            .to_vec()
    }

    pub fn season_marginal(&self) -> [f64; 4] {
        self.distribution(SEASON).try_into().expect("4 seasons")
    }

    pub fn time_marginal(&self) -> [f64; 2] {
        self.distribution(TIME).try_into().expect("2 time buckets")
    }

    pub fn location_marginal(&self) -> [f64; 3] {
        self.distribution(LOCATION).try_into().expect("3 sections")
    }

    /// p(R = break | s, t, l) for every cell.
    pub fn break_cpt(&self) -> Result<BreakCpt> {
        let mut out = BreakCpt([0.0; 24]);
        if self.is_factorized() {
            let cpt = self
                .net
                .cpt(RAIL_BREAK)
                .expect("rail_break has a CPT")
                .reorder(&[SEASON, TIME, LOCATION, RAIL_BREAK])?;
            for i in 0..24 {
                out.0[i] = cpt.values()[2 * i + 1];
            }
        } else {
            for (s, t, l) in cells() {
                out.set(s, t, l, query_risk(self, &Conditions::cell(s, t, l))?);
            }
        }
        Ok(out)
    }
}

/// p(last | rest) from a joint table whose last scope variable is the child.
fn conditional_of_last(family: &Factor) -> Result<Factor> {
    let child_card = family.scope().last().expect("nonempty").cardinality();
    let mut values = family.values().to_vec();
    for row in values.chunks_mut(child_card) {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        } else {
            // Unreachable parent row: any normalized row keeps the joint exact.
            row.iter_mut().for_each(|v| *v = 1.0 / child_card as f64);
        }
    }
    Factor::new(family.scope().to_vec(), values)
}

/// Optional evidence over the three parent variables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Conditions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub season: Option<Season>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeOfDay>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

impl Conditions {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn cell(s: Season, t: TimeOfDay, l: Location) -> Self {
        Self {
            season: Some(s),
            time: Some(t),
            location: Some(l),
        }
    }

    pub fn season(mut self, s: Season) -> Self {
        self.season = Some(s);
        self
    }

    pub fn time(mut self, t: TimeOfDay) -> Self {
        self.time = Some(t);
        self
    }

    pub fn location(mut self, l: Location) -> Self {
        self.location = Some(l);
        self
    }

    pub fn to_evidence(&self) -> Evidence {
        let mut e = Evidence::new();
        if let Some(s) = self.season {
            e.insert(SEASON, s.label());
        }
        if let Some(t) = self.time {
            e.insert(TIME, t.label());
        }
        if let Some(l) = self.location {
            e.insert(LOCATION, l.label());
        }
        e
    }
}

impl fmt::Display for Conditions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(l) = self.location {
            parts.push(format!("location={l}"));
        }
        if let Some(t) = self.time {
            parts.push(format!("time={t}"));
        }
        if let Some(s) = self.season {
            parts.push(format!("season={s}"));
        }
        if parts.is_empty() {
            f.write_str("(none)")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

/// p(R = break | evidence).
pub fn query_risk(model: &RailBreakModel, evidence: &Conditions) -> Result<f64> {
    let posterior = model.net.query(&[RAIL_BREAK], &evidence.to_evidence())?;
    Ok(posterior.values()[1])
}

/// p(T = morning | R = break): the share of breaks that happen in the morning.
pub fn morning_share_of_breaks(model: &RailBreakModel) -> Result<f64> {
    let posterior = model
        .net
        .query(&[TIME], &Evidence::new().with(RAIL_BREAK, BREAK))?;
    Ok(posterior.values()[TimeOfDay::Morning.index()])
}

pub fn risk_ratio(
    model: &RailBreakModel,
    numerator: &Conditions,
    denominator: &Conditions,
) -> Result<f64> {
    let den = query_risk(model, denominator)?;
    if !(den > 0.0) {
        return Err(Error::Ratio(format!("p(break | {denominator}) is zero")));
    }
    Ok(query_risk(model, numerator)? / den)
}

/// One section of a trip. Missing time or season is marginalized at the
/// model's own distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub location: Location,
    pub time: Option<TimeOfDay>,
    pub season: Option<Season>,
}

impl Leg {
    pub fn new(location: Location) -> Self {
        Self {
            location,
            time: None,
            season: None,
        }
    }

    pub fn at(location: Location, time: TimeOfDay, season: Season) -> Self {
        Self {
            location,
            time: Some(time),
            season: Some(season),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripAggregation {
    /// Sum of the per-leg terms.
    #[default]
    Additive,
    /// 1 - Π(1 - term). Not part of the original method; offered for comparison.
    ComplementProduct,
}

/// Per-leg term p(R = break, L = section | leg time, leg season).
pub fn leg_contribution(model: &RailBreakModel, leg: &Leg) -> Result<f64> {
    let mut evidence = Evidence::new();
    if let Some(t) = leg.time {
        evidence.insert(TIME, t.label());
    }
    if let Some(s) = leg.season {
        evidence.insert(SEASON, s.label());
    }
    let posterior = model.net.query(&[RAIL_BREAK, LOCATION], &evidence)?;
    let n = Location::ALL.len();
    Ok(posterior.values()[n + leg.location.index()])
}

/// Aggregated break risk over a trip of distinct sections.
pub fn trip_risk(
    model: &RailBreakModel,
    legs: &[Leg],
    aggregation: TripAggregation,
) -> Result<f64> {
    if legs.is_empty() {
        return Err(Error::Leg("a trip needs at least one leg".into()));
    }
    for (i, leg) in legs.iter().enumerate() {
        if legs[..i].iter().any(|l| l.location == leg.location) {
            return Err(Error::Leg(format!(
                "section `{}` appears twice",
                leg.location
            )));
        }
    }
    let terms: Vec<f64> = legs
        .iter()
        .map(|leg| leg_contribution(model, leg))
        .collect::<Result<_>>()?;
    Ok(match aggregation {
        TripAggregation::Additive => terms.iter().sum(),
        TripAggregation::ComplementProduct => 1.0 - terms.iter().map(|p| 1.0 - p).product::<f64>(),
    })
}

/// Enrichment of each bucket's break share over its share of time, renormalized.
pub fn normalized_percentage(break_share: &[f64], duration_share: &[f64]) -> Result<Vec<f64>> {
    if break_share.len() != duration_share.len() || break_share.is_empty() {
        return Err(Error::InvalidQuery(format!(
            "share lists must be nonempty and equally long ({} vs {})",
            break_share.len(),
            duration_share.len()
        )));
    }
    for (name, list) in [("break", break_share), ("duration", duration_share)] {
        let total: f64 = list.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidQuery(format!(
                "{name} shares sum to {total}, not 1"
            )));
        }
        if list.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidQuery(format!(
                "{name} shares must be nonnegative"
            )));
        }
    }
    if let Some(i) = duration_share.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::Division(format!("duration share {i} is zero")));
    }
    let enrichment: Vec<f64> = break_share
        .iter()
        .zip(duration_share)
        .map(|(b, d)| b / d)
        .collect();
    let total: f64 = enrichment.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Division("all break shares are zero".into()));
    }
    Ok(enrichment.iter().map(|e| e / total).collect())
}
