use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

/// Simulation clock: whole minutes since 2023-01-01T00:00Z.
///
/// Serialized as an ISO-8601 UTC timestamp; parsed from either a timestamp
/// or a bare minute count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimTime(pub i64);

impl SimTime {
    pub fn epoch() -> DateTime<Utc> {
        NaiveDate::from_ymd_opt(2023, 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid epoch")
            .and_utc()
    }

    pub fn minutes(self) -> i64 {
        self.0
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Self::epoch() + Duration::minutes(self.0)
    }

    /// `None` unless the instant falls on a whole minute.
    pub fn from_datetime(t: DateTime<Utc>) -> Option<SimTime> {
        let d = t - Self::epoch();
        if d.num_seconds() % 60 != 0 || d.subsec_nanos() != 0 {
            return None;
        }
        Some(SimTime(d.num_minutes()))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::kb::format_datetime(&self.to_datetime()))
    }
}

impl FromStr for SimTime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(m) = s.parse::<i64>() {
            return Ok(SimTime(m));
        }
        crate::kb::parse_datetime(s)
            .and_then(SimTime::from_datetime)
            .ok_or_else(|| format!("{s:?} is neither a minute count nor a whole-minute ISO-8601 UTC timestamp"))
    }
}

impl Serialize for SimTime {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Accepts a timestamp string, a minute-count string, or a bare integer.
impl<'de> Deserialize<'de> for SimTime {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Minutes(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Minutes(m) => Ok(SimTime(m)),
            Raw::Text(text) => text.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::ops::Add<i64> for SimTime {
    type Output = SimTime;
    fn add(self, rhs: i64) -> SimTime {
        SimTime(self.0 + rhs)
    }
}

impl std::ops::Sub for SimTime {
    type Output = i64;
    fn sub(self, rhs: SimTime) -> i64 {
        self.0 - rhs.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{field}: {reason}")]
pub struct DomainViolation {
    pub field: &'static str,
    pub reason: String,
}

/// Metric bundle attached to a plan (expected) or an execution (real).
///
/// Invariants: duration > 0, energy >= 0, emissions >= 0, quality in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "PerformanceFields")]
pub struct Performance {
    #[serde(with = "rust_decimal::serde::float")]
    duration_min: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    energy_kwh: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    emissions: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    quality: Decimal,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PerformanceFields {
    #[serde(with = "rust_decimal::serde::float")]
    duration_min: Decimal,
    #[serde(with = "rust_decimal::serde::float")]
    energy_kwh: Decimal,
    #[serde(with = "rust_decimal::serde::float", default)]
    emissions: Decimal,
    #[serde(with = "rust_decimal::serde::float", default = "one")]
    quality: Decimal,
}

fn one() -> Decimal {
    Decimal::ONE
}

impl TryFrom<PerformanceFields> for Performance {
    type Error = DomainViolation;
    fn try_from(f: PerformanceFields) -> Result<Self, Self::Error> {
        Performance::new(f.duration_min, f.energy_kwh, f.emissions, f.quality)
    }
}

impl Performance {
    pub fn new(
        duration_min: Decimal,
        energy_kwh: Decimal,
        emissions: Decimal,
        quality: Decimal,
    ) -> Result<Self, DomainViolation> {
        let violation = |field, reason: &str| {
            Err(DomainViolation {
                field,
                reason: reason.into(),
            })
        };
        if duration_min <= Decimal::ZERO {
            return violation("durationMin", "must be > 0");
        }
        if energy_kwh < Decimal::ZERO {
            return violation("energyKwh", "must be >= 0");
        }
        if emissions < Decimal::ZERO {
            return violation("emissions", "must be >= 0");
        }
        if quality < Decimal::ZERO || quality > Decimal::ONE {
            return violation("quality", "must be within [0, 1]");
        }
        Ok(Performance {
            duration_min: duration_min.normalize(),
            energy_kwh: energy_kwh.normalize(),
            emissions: emissions.normalize(),
            quality: quality.normalize(),
        })
    }

    pub fn duration_min(&self) -> Decimal {
        self.duration_min
    }

    pub fn energy_kwh(&self) -> Decimal {
        self.energy_kwh
    }

    pub fn emissions(&self) -> Decimal {
        self.emissions
    }

    pub fn quality(&self) -> Decimal {
        self.quality
    }

    pub fn with_duration(self, duration_min: Decimal) -> Result<Self, DomainViolation> {
        Performance::new(duration_min, self.energy_kwh, self.emissions, self.quality)
    }

    pub fn with_energy(self, energy_kwh: Decimal) -> Result<Self, DomainViolation> {
        Performance::new(self.duration_min, energy_kwh, self.emissions, self.quality)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecStatus {
    Proposed,
    Planned,
    Running,
    Successful,
    Errored,
}

impl ExecStatus {
    pub const ALL: [ExecStatus; 5] = [
        ExecStatus::Proposed,
        ExecStatus::Planned,
        ExecStatus::Running,
        ExecStatus::Successful,
        ExecStatus::Errored,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExecStatus::Proposed => "proposed",
            ExecStatus::Planned => "planned",
            ExecStatus::Running => "running",
            ExecStatus::Successful => "successful",
            ExecStatus::Errored => "errored",
        }
    }

    /// proposed → planned → running → {successful, errored}
    pub fn can_become(self, next: ExecStatus) -> bool {
        use ExecStatus::*;
        matches!(
            (self, next),
            (Proposed, Planned) | (Planned, Running) | (Running, Successful) | (Running, Errored)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, ExecStatus::Successful | ExecStatus::Errored)
    }

    /// Position along the lifecycle; both terminal states share the last rank.
    pub fn rank(self) -> u8 {
        match self {
            ExecStatus::Proposed => 0,
            ExecStatus::Planned => 1,
            ExecStatus::Running => 2,
            ExecStatus::Successful | ExecStatus::Errored => 3,
        }
    }
}

impl fmt::Display for ExecStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExecStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExecStatus::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown status {s:?}"))
    }
}

/// Quantities an objective function can weigh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Metric {
    CompletionTime,
    EnergyKwh,
    Emissions,
    Quality,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::CompletionTime => "completionTime",
            Metric::EnergyKwh => "energyKwh",
            Metric::Emissions => "emissions",
            Metric::Quality => "quality",
        }
    }
}

impl FromStr for Metric {
    type Err = String;
    /// Accepts the canonical names plus `makespan` and `energy`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "completionTime" | "makespan" => Metric::CompletionTime,
            "energyKwh" | "energy" => Metric::EnergyKwh,
            "emissions" => Metric::Emissions,
            "quality" => Metric::Quality,
            other => return Err(format!("unknown metric {other:?}")),
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coefficient {
    pub metric: Metric,
    #[serde(with = "rust_decimal::serde::float")]
    pub value: Decimal,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim_time_round_trip() {
        let t = SimTime(100);
        assert_eq!(t.to_string(), "2023-01-01T01:40:00Z");
        assert_eq!(SimTime::from_datetime(t.to_datetime()), Some(t));
        let off = t.to_datetime() + Duration::seconds(30);
        assert_eq!(SimTime::from_datetime(off), None);
        assert_eq!("2023-01-01T01:40Z".parse::<SimTime>().unwrap(), t);
        assert_eq!("100".parse::<SimTime>().unwrap(), t);
        assert_eq!(serde_json::to_string(&t).unwrap(), r#""2023-01-01T01:40:00Z""#);
    }

    #[test]
    fn performance_domain() {
        let d = |v: i64| Decimal::from(v);
        assert!(Performance::new(d(-1), d(1), d(0), d(1)).is_err());
        assert!(Performance::new(d(0), d(1), d(0), d(1)).is_err());
        assert!(Performance::new(d(1), d(-1), d(0), d(1)).is_err());
        assert!(Performance::new(d(1), d(1), d(0), d(2)).is_err());
        let p = Performance::new(d(18), Decimal::new(11025, 2), d(0), d(1)).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"durationMin":18.0,"energyKwh":110.25,"emissions":0.0,"quality":1.0}"#
        );
        let back: Performance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Performance>(r#"{"durationMin":-1,"energyKwh":1}"#).is_err());
    }

    #[test]
    fn status_transitions() {
        use ExecStatus::*;
        assert!(Proposed.can_become(Planned));
        assert!(Running.can_become(Errored));
        assert!(!Planned.can_become(Successful));
        assert!(!Successful.can_become(Running));
        assert_eq!("running".parse::<ExecStatus>().unwrap(), Running);
    }

    #[test]
    fn metric_aliases() {
        assert_eq!("makespan".parse::<Metric>().unwrap(), Metric::CompletionTime);
        assert_eq!("energy".parse::<Metric>().unwrap(), Metric::EnergyKwh);
        assert!("speed".parse::<Metric>().is_err());
    }
}
