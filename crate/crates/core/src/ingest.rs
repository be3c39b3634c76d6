//! From break records and a train-schedule estimate to a [`CountTable`].
//!
//! Break records land in the (season, time bucket, section) cell of their
//! timestamp. Exposures come from the schedule: each section sees
//! `trains_per_day * period_days` trains, spread over the (season, bucket)
//! cells in proportion to the calendar time each cell covers.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::CountTable;
use crate::rail::{Location, Season, TimeOfDay};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
pub const CSV_HEADER: [&str; 4] = ["train_id", "timestamp", "section", "broke"];

/// One train's traversal of one section, flagged if it is linked to a break.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExposureRecord {
    pub train_id: String,
    pub timestamp: NaiveDateTime,
    pub section: Location,
    pub broke: bool,
}

/// Month → season and hour → time-bucket maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BucketSpec", into = "BucketSpec")]
pub struct BucketMaps {
    seasons: [Season; 12],
    hours: [TimeOfDay; 24],
}

impl Default for BucketMaps {
    /// Winter Apr–Jul, late winter Aug–Sep, early summer Oct–Dec, late summer
    /// Jan–Mar; morning is the half-open hour range [4, 11).
    fn default() -> Self {
        use Season::*;
        let seasons = [
            LateSummer,
            LateSummer,
            LateSummer,
            Winter,
            Winter,
            Winter,
            Winter,
            LateWinter,
            LateWinter,
            EarlySummer,
            EarlySummer,
            EarlySummer,
        ];
        let mut hours = [TimeOfDay::NotMorning; 24];
        hours[4..11].fill(TimeOfDay::Morning);
        Self { seasons, hours }
    }
}

impl BucketMaps {
    /// `seasons[m]` is the season of month `m + 1`; `hours[h]` the bucket of hour `h`.
    pub fn new(seasons: [Season; 12], hours: [TimeOfDay; 24]) -> Result<Self> {
        for s in Season::ALL {
            if !seasons.contains(s) {
                return Err(Error::Buckets(format!("season `{s}` has no months")));
            }
        }
        let morning = hours.iter().filter(|&&t| t == TimeOfDay::Morning).count();
        if morning == 0 || morning == 24 {
            return Err(Error::Buckets(
                "both time buckets need at least one hour".into(),
            ));
        }
        // Contiguous on the 24-hour circle: exactly one not-morning → morning edge.
        let starts = (0..24)
            .filter(|&h| {
                hours[h] == TimeOfDay::Morning && hours[(h + 23) % 24] == TimeOfDay::NotMorning
            })
            .count();
        if starts != 1 {
            return Err(Error::Buckets(
                "morning hours must form one contiguous range".into(),
            ));
        }
        Ok(Self { seasons, hours })
    }

    /// Morning is `[start, end)`, wrapping past midnight when `end < start`.
    pub fn with_morning(seasons: [Season; 12], start: u32, end: u32) -> Result<Self> {
        if start > 23 || end > 24 || start == end % 24 {
            return Err(Error::Buckets(format!(
                "invalid morning range [{start}, {end})"
            )));
        }
        let mut hours = [TimeOfDay::NotMorning; 24];
        let mut h = start;
        while h != end % 24 {
            hours[h as usize] = TimeOfDay::Morning;
            h = (h + 1) % 24;
        }
        Self::new(seasons, hours)
    }

    pub fn season_of_month(&self, month: u32) -> Result<Season> {
        assign_season(month, self)
    }

    pub fn bucket_of_hour(&self, hour: u32) -> Result<TimeOfDay> {
        assign_time_bucket(hour, self)
    }

    pub fn morning_range(&self) -> (u32, u32) {
        let start = (0..24)
            .find(|&h| {
                self.hours[h] == TimeOfDay::Morning
                    && self.hours[(h + 23) % 24] == TimeOfDay::NotMorning
            })
            .expect("validated") as u32;
        let len = self
            .hours
            .iter()
            .filter(|&&t| t == TimeOfDay::Morning)
            .count() as u32;
        (start, (start + len) % 24)
    }

    pub fn months_of(&self, season: Season) -> Vec<u32> {
        (1..=12)
            .filter(|&m| self.seasons[m as usize - 1] == season)
            .collect()
    }

    pub fn hours_of(&self, bucket: TimeOfDay) -> Vec<u32> {
        (0..24)
            .filter(|&h| self.hours[h as usize] == bucket)
            .collect()
    }
}

/// Serialized form of [`BucketMaps`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketSpec {
    /// Half-open `[start, end)` morning hours.
    pub morning: [u32; 2],
    pub seasons: SeasonMonths,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonMonths {
    pub early_summer: Vec<u32>,
    pub late_summer: Vec<u32>,
    pub winter: Vec<u32>,
    pub late_winter: Vec<u32>,
}

impl TryFrom<BucketSpec> for BucketMaps {
    type Error = Error;

    fn try_from(spec: BucketSpec) -> Result<Self> {
        let mut seasons: [Option<Season>; 12] = [None; 12];
        let lists = [
            (Season::EarlySummer, &spec.seasons.early_summer),
            (Season::LateSummer, &spec.seasons.late_summer),
            (Season::Winter, &spec.seasons.winter),
            (Season::LateWinter, &spec.seasons.late_winter),
        ];
        for (season, months) in lists {
            for &m in months {
                if !(1..=12).contains(&m) {
                    return Err(Error::Buckets(format!("month {m} out of range 1..=12")));
                }
                if let Some(prev) = seasons[m as usize - 1].replace(season) {
                    return Err(Error::Buckets(format!(
                        "month {m} assigned to both `{prev}` and `{season}`"
                    )));
                }
            }
        }
        let mut out = [Season::EarlySummer; 12];
        for (i, s) in seasons.iter().enumerate() {
            out[i] = s.ok_or_else(|| Error::Buckets(format!("month {} has no season", i + 1)))?;
        }
        Self::with_morning(out, spec.morning[0], spec.morning[1])
    }
}

impl From<BucketMaps> for BucketSpec {
    fn from(maps: BucketMaps) -> Self {
        let (start, end) = maps.morning_range();
        BucketSpec {
            morning: [start, if end == 0 { 24 } else { end }],
            seasons: SeasonMonths {
                early_summer: maps.months_of(Season::EarlySummer),
                late_summer: maps.months_of(Season::LateSummer),
                winter: maps.months_of(Season::Winter),
                late_winter: maps.months_of(Season::LateWinter),
            },
        }
    }
}

/// Train-flow estimate over an inclusive date range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleSpec", into = "ScheduleSpec")]
pub struct ScheduleConfig {
    trains_per_day: f64,
    period_start: NaiveDate,
    period_end: NaiveDate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub trains_per_day: f64,
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
}

impl TryFrom<ScheduleSpec> for ScheduleConfig {
    type Error = Error;

    fn try_from(s: ScheduleSpec) -> Result<Self> {
        Self::new(s.trains_per_day, s.period_start, s.period_end)
    }
}

impl From<ScheduleConfig> for ScheduleSpec {
    fn from(s: ScheduleConfig) -> Self {
        ScheduleSpec {
            trains_per_day: s.trains_per_day,
            period_start: s.period_start,
            period_end: s.period_end,
        }
    }
}

impl ScheduleConfig {
    pub fn new(
        trains_per_day: f64,
        period_start: NaiveDate,
        period_end: NaiveDate,
    ) -> Result<Self> {
        if !(trains_per_day.is_finite() && trains_per_day > 0.0) {
            return Err(Error::Schedule(format!(
                "trains_per_day must be positive, got {trains_per_day}"
            )));
        }
        if period_end < period_start {
            return Err(Error::Schedule(format!(
                "period {period_start}..{period_end} is empty"
            )));
        }
        Ok(Self {
            trains_per_day,
            period_start,
            period_end,
        })
    }

    pub fn trains_per_day(&self) -> f64 {
        self.trains_per_day
    }

    pub fn period_start(&self) -> NaiveDate {
        self.period_start
    }

    pub fn period_end(&self) -> NaiveDate {
        self.period_end
    }

    /// Days in the inclusive period.
    pub fn period_days(&self) -> u64 {
        (self.period_end - self.period_start).num_days() as u64 + 1
    }

    /// Exposures per section over the whole period, rounded to an integer.
    pub fn exposures_per_section(&self) -> u64 {
        (self.trains_per_day * self.period_days() as f64).round() as u64
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.period_start
            .iter_days()
            .take_while(move |d| *d <= self.period_end)
    }

    pub fn contains(&self, ts: &NaiveDateTime) -> bool {
        let d = ts.date();
        d >= self.period_start && d <= self.period_end
    }
}

pub fn assign_season(month: u32, maps: &BucketMaps) -> Result<Season> {
    if !(1..=12).contains(&month) {
        return Err(Error::Buckets(format!("month {month} out of range 1..=12")));
    }
    Ok(maps.seasons[month as usize - 1])
}

pub fn assign_time_bucket(hour: u32, maps: &BucketMaps) -> Result<TimeOfDay> {
    if hour > 23 {
        return Err(Error::Buckets(format!("hour {hour} out of range 0..=23")));
    }
    Ok(maps.hours[hour as usize])
}

/// Maps a position on the line to its section.
///
/// Accepts the yard endpoints `salkor` and `erts`, the named loops
/// `bamboesbaai` (loop 3) and `halfweg` (loop 10), and `loop_0`..`loop_21`.
/// A boundary loop belongs to the section further inland.
pub fn assign_section(position_label: &str) -> Result<Location> {
    let label = position_label.trim().to_ascii_lowercase();
    let loop_no = match label.as_str() {
        "salkor" => return Ok(Location::Coastal),
        "erts" => return Ok(Location::Inland),
        "bamboesbaai" => 3,
        "halfweg" => 10,
        other => other
            .strip_prefix("loop_")
            .and_then(|n| n.parse::<u32>().ok())
            .filter(|n| *n <= 21)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown position `{position_label}`")))?,
    };
    Ok(match loop_no {
        0..=2 => Location::Coastal,
        3..=9 => Location::SemiCoastal,
        _ => Location::Inland,
    })
}

/// Hours of calendar time in each (season, bucket) cell over the period.
fn calendar_hours(schedule: &ScheduleConfig, maps: &BucketMaps) -> [u64; 8] {
    let morning = maps.hours_of(TimeOfDay::Morning).len() as u64;
    let mut hours = [0u64; 8];
    for day in schedule.days() {
        let s = maps.seasons[day.month0() as usize];
        hours[s.index() * 2] += morning;
        hours[s.index() * 2 + 1] += 24 - morning;
    }
    hours
}

/// Splits `total` over `weights` by the largest-remainder method (exact integers).
fn largest_remainder(total: u64, weights: &[u64]) -> Vec<u64> {
    let denom: u128 = weights.iter().map(|&w| w as u128).sum();
    let mut out: Vec<u64> = weights
        .iter()
        .map(|&w| (total as u128 * w as u128 / denom) as u64)
        .collect();
    let mut order: Vec<(u128, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (total as u128 * w as u128 % denom, i))
        .collect();
    // Largest remainder first, lower index on ties.
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = total - out.iter().sum::<u64>();
    for &(_, i) in order.iter().take(short as usize) {
        out[i] += 1;
    }
    out
}

/// Builds the (S, T, L, R) count table. Records with `broke = false` are
/// ignored; non-break exposures come from the schedule.
pub fn build_counts(
    records: &[ExposureRecord],
    schedule: &ScheduleConfig,
    maps: &BucketMaps,
) -> Result<CountTable> {
    let hours = calendar_hours(schedule, maps);
    let per_cell = largest_remainder(schedule.exposures_per_section(), &hours);

    let mut breaks = [0u64; 24];
    for r in records.iter().filter(|r| r.broke) {
        if !schedule.contains(&r.timestamp) {
            return Err(Error::Inconsistent(format!(
                "break on train `{}` at {} lies outside the schedule period {}..{}",
                r.train_id,
                r.timestamp.format(TIMESTAMP_FORMAT),
                schedule.period_start(),
                schedule.period_end()
            )));
        }
        let s = assign_season(r.timestamp.month(), maps)?;
        let t = assign_time_bucket(r.timestamp.hour(), maps)?;
        breaks[crate::rail::cell_index(s, t, r.section)] += 1;
    }

    let mut table = CountTable::new();
    for (s, t, l) in crate::rail::cells() {
        let exposures = per_cell[s.index() * 2 + t.index()];
        let k = breaks[crate::rail::cell_index(s, t, l)];
        if k > exposures {
            return Err(Error::Inconsistent(format!(
                "cell season={s}, time={t}, location={l} has {k} breaks but only {exposures} exposures"
            )));
        }
        table.set(s, t, l, true, k);
        table.set(s, t, l, false, exposures - k);
    }
    Ok(table)
}

fn parse_row(record: &csv::StringRecord) -> std::result::Result<ExposureRecord, String> {
    if record.len() != CSV_HEADER.len() {
        return Err(format!(
            "expected {} fields, got {}",
            CSV_HEADER.len(),
            record.len()
        ));
    }
    let train_id = record[0].trim();
    if train_id.is_empty() {
        return Err("empty train_id".into());
    }
    let timestamp = NaiveDateTime::parse_from_str(record[1].trim(), TIMESTAMP_FORMAT)
        .map_err(|e| format!("bad timestamp `{}`: {e}", &record[1]))?;
    let section = Location::from_label(record[2].trim()).ok_or_else(|| {
        format!(
            "unknown section `{}` (expected one of {})",
            &record[2],
            Location::legal_states()
        )
    })?;
    let broke = match record[3].trim() {
        "0" => false,
        "1" => true,
        other => return Err(format!("broke must be 0 or 1, got `{other}`")),
    };
    Ok(ExposureRecord {
        train_id: train_id.to_string(),
        timestamp,
        section,
        broke,
    })
}

/// Parses the exposure CSV. Any malformed row fails the whole parse.
pub fn parse_exposures<R: Read>(input: R) -> Result<Vec<ExposureRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => h.map_err(|e| csv_error(e, 1))?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, got `{}`",
                CSV_HEADER.join(","),
                names.join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(e, 0))?;
        let line = row.position().map_or(0, |p| p.line());
        out.push(parse_row(&row).map_err(|message| Error::Parse { line, message })?);
    }
    Ok(out)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn read_exposures(path: &Path) -> Result<Vec<ExposureRecord>> {
    parse_exposures(std::fs::File::open(path)?)
}

pub fn write_exposures<W: Write>(records: &[ExposureRecord], output: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        let ts = r.timestamp.format(TIMESTAMP_FORMAT).to_string();
        writer
            .write_record([
                r.train_id.as_str(),
                ts.as_str(),
                r.section.label(),
                if r.broke { "1" } else { "0" },
            ])
            .map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn at(y: i32, m: u32, d: u32, h: u32) -> NaiveDateTime {
        date(y, m, d).and_hms_opt(h, 0, 0).unwrap()
    }

    #[test]
    fn default_season_map() {
        let maps = BucketMaps::default();
        assert_eq!(assign_season(5, &maps).unwrap(), Season::Winter);
        assert_eq!(assign_season(11, &maps).unwrap(), Season::EarlySummer);
        assert_eq!(assign_season(2, &maps).unwrap(), Season::LateSummer);
        assert_eq!(assign_season(8, &maps).unwrap(), Season::LateWinter);
        assert!(assign_season(0, &maps).is_err());
        assert!(assign_season(13, &maps).is_err());
    }

    #[test]
    fn default_time_buckets() {
        let maps = BucketMaps::default();
        assert_eq!(assign_time_bucket(7, &maps).unwrap(), TimeOfDay::Morning);
        assert_eq!(assign_time_bucket(4, &maps).unwrap(), TimeOfDay::Morning);
        assert_eq!(
            assign_time_bucket(11, &maps).unwrap(),
            TimeOfDay::NotMorning
        );
        assert_eq!(assign_time_bucket(3, &maps).unwrap(), TimeOfDay::NotMorning);
        assert!(assign_time_bucket(24, &maps).is_err());
        let frac = maps.hours_of(TimeOfDay::Morning).len() as f64 / 24.0;
        assert!((frac - 0.29).abs() < 0.005);
    }

    #[test]
    fn bucket_totality() {
        let maps = BucketMaps::default();
        let mut seen = std::collections::HashSet::new();
        for m in 1..=12 {
            for h in 0..24 {
                let pair = (
                    assign_season(m, &maps).unwrap(),
                    assign_time_bucket(h, &maps).unwrap(),
                );
                seen.insert(pair);
            }
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn bucket_validation() {
        let seasons = BucketMaps::default().seasons;
        let mut hours = [TimeOfDay::NotMorning; 24];
        hours[4] = TimeOfDay::Morning;
        hours[9] = TimeOfDay::Morning;
        assert!(BucketMaps::new(seasons, hours).is_err());
        // wrapping range is a single block
        assert!(BucketMaps::with_morning(seasons, 22, 3).is_ok());
        assert!(BucketMaps::with_morning(seasons, 4, 4).is_err());
        let mut no_winter = seasons;
        no_winter.iter_mut().for_each(|s| {
            if *s == Season::Winter {
                *s = Season::LateWinter
            }
        });
        assert!(BucketMaps::new(no_winter, BucketMaps::default().hours).is_err());
    }

    #[test]
    fn bucket_spec_round_trip() {
        let maps = BucketMaps::default();
        let json = serde_json::to_string(&maps).unwrap();
        let back: BucketMaps = serde_json::from_str(&json).unwrap();
        assert_eq!(back, maps);
        let overlap = r#"{"morning":[4,11],"seasons":{"early_summer":[10,11,12],"late_summer":[1,2,3,4],"winter":[4,5,6,7],"late_winter":[8,9]}}"#;
        assert!(serde_json::from_str::<BucketMaps>(overlap).is_err());
    }

    #[test]
    fn section_labels() {
        assert_eq!(assign_section("salkor").unwrap(), Location::Coastal);
        assert_eq!(assign_section("loop_2").unwrap(), Location::Coastal);
        assert_eq!(assign_section("loop_3").unwrap(), Location::SemiCoastal);
        assert_eq!(assign_section("loop_5").unwrap(), Location::SemiCoastal);
        assert_eq!(assign_section("loop_10").unwrap(), Location::Inland);
        assert_eq!(assign_section("Erts").unwrap(), Location::Inland);
        assert_eq!(assign_section("halfweg").unwrap(), Location::Inland);
        assert!(assign_section("loop_22").is_err());
        assert!(assign_section("midland").is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(ScheduleConfig::new(0.0, date(2014, 1, 1), date(2014, 1, 2)).is_err());
        assert!(ScheduleConfig::new(1.0, date(2014, 1, 2), date(2014, 1, 1)).is_err());
        let s = ScheduleConfig::new(10.0, date(2014, 1, 1), date(2014, 12, 31)).unwrap();
        assert_eq!(s.period_days(), 365);
    }

    #[test]
    fn no_breaks_case() {
        let schedule = ScheduleConfig::new(10.0, date(2014, 1, 1), date(2014, 4, 10)).unwrap();
        assert_eq!(schedule.period_days(), 100);
        let table = build_counts(&[], &schedule, &BucketMaps::default()).unwrap();
        assert_eq!(table.breaks(), 0);
        for l in Location::ALL {
            let total: u64 = crate::rail::cells()
                .filter(|c| c.2 == *l)
                .map(|(s, t, l)| table.get(s, t, l, false))
                .sum();
            assert_eq!(total, 1000);
        }
    }

    #[test]
    fn single_break_placement() {
        let schedule = ScheduleConfig::new(10.0, date(2014, 1, 1), date(2014, 12, 31)).unwrap();
        let rec = ExposureRecord {
            train_id: "T1".into(),
            timestamp: at(2014, 5, 7, 6),
            section: Location::Inland,
            broke: true,
        };
        let table = build_counts(&[rec], &schedule, &BucketMaps::default()).unwrap();
        assert_eq!(table.breaks(), 1);
        assert_eq!(
            table.get(Season::Winter, TimeOfDay::Morning, Location::Inland, true),
            1
        );
        assert_eq!(table.total(), 3 * 3650);
    }

    #[test]
    fn out_of_period_and_over_capacity() {
        let schedule = ScheduleConfig::new(1.0, date(2014, 1, 1), date(2014, 1, 10)).unwrap();
        let maps = BucketMaps::default();
        let outside = ExposureRecord {
            train_id: "T1".into(),
            timestamp: at(2015, 1, 1, 6),
            section: Location::Inland,
            broke: true,
        };
        assert!(matches!(
            build_counts(&[outside], &schedule, &maps),
            Err(Error::Inconsistent(_))
        ));
        let many: Vec<ExposureRecord> = (0..8)
            .map(|i| ExposureRecord {
                train_id: format!("T{i}"),
                timestamp: at(2014, 1, 2, 6),
                section: Location::Coastal,
                broke: true,
            })
            .collect();
        let err = build_counts(&many, &schedule, &maps)
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("season=late_summer, time=morning, location=coastal"),
            "{err}"
        );
    }

    #[test]
    fn largest_remainder_preserves_total() {
        assert_eq!(largest_remainder(10, &[1, 1, 1]), vec![4, 3, 3]);
        assert_eq!(largest_remainder(7, &[7, 17]), vec![2, 5]);
        assert_eq!(largest_remainder(0, &[3, 5]), vec![0, 0]);
    }

    #[test]
    fn parse_examples() {
        let header = "train_id,timestamp,section,broke\n";
        assert!(parse_exposures(header.as_bytes()).unwrap().is_empty());

        let one = format!("{header}T1001,2014-05-07T06:12:00,inland,1\n");
        let recs = parse_exposures(one.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].broke);
        assert_eq!(recs[0].section, Location::Inland);

        let bad = format!("{header}T1001,2014-05-07T06:12:00,midland,1\n");
        match parse_exposures(bad.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("midland"));
            }
            other => panic!("unexpected {other:?}"),
        }

        let bad_ts =
            format!("{header}T1,2014-05-07T06:12:00,inland,0\nT2,2014-13-07T06:12:00,inland,0\n");
        assert!(matches!(
            parse_exposures(bad_ts.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let bad_flag = format!("{header}T1,2014-05-07T06:12:00,inland,yes\n");
        assert!(matches!(
            parse_exposures(bad_flag.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_exposures("".as_bytes()).is_err());
        assert!(parse_exposures("a,b,c,d\n".as_bytes()).is_err());
    }

    #[test]
    fn write_then_parse() {
        let recs = vec![
            ExposureRecord {
                train_id: "T1".into(),
                timestamp: at(2014, 5, 7, 6),
                section: Location::SemiCoastal,
                broke: false,
            },
            ExposureRecord {
                train_id: "T2".into(),
                timestamp: at(2014, 11, 1, 23),
                section: Location::Coastal,
                broke: true,
            },
        ];
        let mut buf = Vec::new();
        write_exposures(&recs, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("train_id,timestamp,section,broke\n"));
        assert_eq!(parse_exposures(buf.as_slice()).unwrap(), recs);
    }
}
