//! Count-and-normalize estimation from (S, T, L, R) exposure counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::rail::{
    break_variable, cell_index, cells, location_variable, season_variable, time_variable, BreakCpt,
    Location, RailBreakModel, Season, TimeOfDay, CELLS,
};

/// Default additive smoothing for CPT cells.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Exposure counts over the 48 (S, T, L, R) cells, row-major with R fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountTable {
    counts: Vec<u64>,
}

impl Default for CountTable {
    fn default() -> Self {
        Self {
            counts: vec![0; CELLS],
        }
    }
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() != CELLS {
            return Err(Error::Construction(format!(
                "count table needs {CELLS} cells, got {}",
                counts.len()
            )));
        }
        Ok(Self { counts })
    }

    fn index(s: Season, t: TimeOfDay, l: Location, broke: bool) -> usize {
        cell_index(s, t, l) * 2 + usize::from(broke)
    }

    pub fn get(&self, s: Season, t: TimeOfDay, l: Location, broke: bool) -> u64 {
        self.counts[Self::index(s, t, l, broke)]
    }

    pub fn set(&mut self, s: Season, t: TimeOfDay, l: Location, broke: bool, n: u64) {
        self.counts[Self::index(s, t, l, broke)] = n;
    }

    pub fn add(&mut self, s: Season, t: TimeOfDay, l: Location, broke: bool, n: u64) {
        self.counts[Self::index(s, t, l, broke)] += n;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn breaks(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).sum()
    }

    pub fn exposures(&self, s: Season, t: TimeOfDay, l: Location) -> u64 {
        self.get(s, t, l, false) + self.get(s, t, l, true)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidQuery(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )))
    }
}

/// Normalizes the whole table: (count + alpha) / (total + 48 alpha).
pub fn fit_full_joint(counts: &CountTable, alpha: f64) -> Result<Factor> {
    check_alpha(alpha)?;
    let total = counts.total() as f64 + alpha * CELLS as f64;
    if !(total > 0.0) {
        return Err(Error::Degenerate(
            "count table is empty and alpha is 0".into(),
        ));
    }
    let values = counts
        .counts()
        .iter()
        .map(|&c| (c as f64 + alpha) / total)
        .collect();
    Factor::new(
        vec![
            season_variable(),
            time_variable(),
            location_variable(),
            break_variable(),
        ],
        values,
    )
}

/// Marginals of S, T, L from counts and p(R | S, T, L) from per-cell break
/// fractions with additive smoothing.
pub fn fit_factorized(counts: &CountTable, alpha: f64) -> Result<RailBreakModel> {
    check_alpha(alpha)?;
    let total = counts.total();
    if total == 0 {
        return Err(Error::Degenerate("count table is empty".into()));
    }
    let mut season = [0.0; 4];
    let mut time = [0.0; 2];
    let mut location = [0.0; 3];
    let mut breaks = BreakCpt([0.0; 24]);
    for (s, t, l) in cells() {
        let n = counts.exposures(s, t, l);
        let k = counts.get(s, t, l, true);
        season[s.index()] += n as f64;
        time[t.index()] += n as f64;
        location[l.index()] += n as f64;
        let den = n as f64 + 2.0 * alpha;
        if !(den > 0.0) {
            return Err(Error::UndefinedConditional {
                cell: format!("season={s}, time={t}, location={l}"),
            });
        }
        breaks.set(s, t, l, (k as f64 + alpha) / den);
    }
    let total = total as f64;
    season.iter_mut().for_each(|v| *v /= total);
    time.iter_mut().for_each(|v| *v /= total);
    location.iter_mut().for_each(|v| *v /= total);
    RailBreakModel::factorized(season, time, location, &breaks)
}
