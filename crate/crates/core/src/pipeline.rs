//! Offloading techniques as ordered stage pipelines.
//!
//! Each technique is a fixed sequence of stages executed one after another;
//! the down time of an offload is the sum of its stage times.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Container offloading technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technique {
    /// Commit, save to a tarball, copy, load, start.
    SaveLoad,
    /// Export a flattened container, copy, import, start.
    ExportImport,
    /// Commit, push to a central registry, pull, start.
    PushPull,
    /// Checkpoint the running container and restore it from a shared dump.
    Criu,
}

impl Technique {
    pub const ALL: [Technique; 4] = [
        Technique::SaveLoad,
        Technique::ExportImport,
        Technique::PushPull,
        Technique::Criu,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Technique::SaveLoad => "save-load",
            Technique::ExportImport => "export-import",
            Technique::PushPull => "push-pull",
            Technique::Criu => "criu",
        }
    }

    pub fn is_stateful(self) -> bool {
        matches!(self, Technique::Criu)
    }
}

/// One step of an offload pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageId {
    Commit,
    Save,
    Export,
    Transfer,
    Import,
    Load,
    Push,
    Pull,
    Start,
    Checkpoint,
    Restore,
}

impl StageId {
    pub const ALL: [StageId; 11] = [
        StageId::Commit,
        StageId::Save,
        StageId::Export,
        StageId::Transfer,
        StageId::Import,
        StageId::Load,
        StageId::Push,
        StageId::Pull,
        StageId::Start,
        StageId::Checkpoint,
        StageId::Restore,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StageId::Commit => "commit",
            StageId::Save => "save",
            StageId::Export => "export",
            StageId::Transfer => "transfer",
            StageId::Import => "import",
            StageId::Load => "load",
            StageId::Push => "push",
            StageId::Pull => "pull",
            StageId::Start => "start",
            StageId::Checkpoint => "checkpoint",
            StageId::Restore => "restore",
        }
    }

    /// Where the stage does its work.
    pub fn site(self) -> StageSite {
        match self {
            StageId::Commit
            | StageId::Save
            | StageId::Export
            | StageId::Push
            | StageId::Checkpoint => StageSite::Source,
            StageId::Load
            | StageId::Import
            | StageId::Pull
            | StageId::Start
            | StageId::Restore => StageSite::Destination,
            StageId::Transfer => StageSite::Link,
        }
    }
}

/// Resource a stage executes on, relative to the offload direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageSite {
    Source,
    Destination,
    Link,
}

/// Direction of the offload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    CloudToFog,
    FogToCloud,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::CloudToFog, Direction::FogToCloud];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::CloudToFog => "cloud-to-fog",
            Direction::FogToCloud => "fog-to-cloud",
        }
    }
}

macro_rules! name_impls {
    ($ty:ty, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown {} `{s}`", $what)))
            }
        }
    };
}

pub(crate) use name_impls;

name_impls!(Technique, "technique");
name_impls!(StageId, "stage");
name_impls!(Direction, "direction");

/// Measured (or simulated) duration of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: StageId,
    pub seconds: f64,
}

impl StageTiming {
    pub fn new(stage: StageId, seconds: f64) -> Self {
        Self { stage, seconds }
    }
}

const SAVE_LOAD: [StageId; 5] = [
    StageId::Commit,
    StageId::Save,
    StageId::Transfer,
    StageId::Load,
    StageId::Start,
];
const EXPORT_IMPORT: [StageId; 4] = [
    StageId::Export,
    StageId::Transfer,
    StageId::Import,
    StageId::Start,
];
const PUSH_PULL: [StageId; 4] = [StageId::Commit, StageId::Push, StageId::Pull, StageId::Start];
// Container initialisation after restore is folded into the restore stage.
const CRIU: [StageId; 2] = [StageId::Checkpoint, StageId::Restore];

/// Ordered stages of a technique's pipeline.
pub fn stages_of(technique: Technique) -> &'static [StageId] {
    match technique {
        Technique::SaveLoad => &SAVE_LOAD,
        Technique::ExportImport => &EXPORT_IMPORT,
        Technique::PushPull => &PUSH_PULL,
        Technique::Criu => &CRIU,
    }
}

pub fn has_stage(technique: Technique, stage: StageId) -> bool {
    stages_of(technique).contains(&stage)
}

pub(crate) fn ensure_stage(technique: Technique, stage: StageId) -> Result<()> {
    if has_stage(technique, stage) {
        Ok(())
    } else {
        Err(Error::StageNotInTechnique { technique, stage })
    }
}

/// Reorders `timings` into pipeline order, checking that every stage of the
/// technique appears exactly once and nothing else does.
pub fn canonical_timings(timings: &[StageTiming], technique: Technique) -> Result<Vec<StageTiming>> {
    let stages = stages_of(technique);
    let mut slots: Vec<Option<f64>> = vec![None; stages.len()];
    for t in timings {
        let Some(pos) = stages.iter().position(|s| *s == t.stage) else {
            return Err(Error::UnknownStage {
                technique,
                stage: t.stage,
            });
        };
        if slots[pos].is_some() {
            return Err(Error::UnknownStage {
                technique,
                stage: t.stage,
            });
        }
        if !(t.seconds.is_finite() && t.seconds >= 0.0) {
            return Err(Error::InvalidTiming {
                stage: t.stage,
                seconds: t.seconds,
            });
        }
        slots[pos] = Some(t.seconds);
    }
    stages
        .iter()
        .zip(slots)
        .map(|(&stage, secs)| match secs {
            Some(seconds) => Ok(StageTiming { stage, seconds }),
            None => Err(Error::MissingStage { technique, stage }),
        })
        .collect()
}

/// Total down time of an offload: the sum of its stage times, accumulated in
/// pipeline order so the result does not depend on input order.
pub fn total_offload_time(timings: &[StageTiming], technique: Technique) -> Result<f64> {
    let ordered = canonical_timings(timings, technique)?;
    Ok(ordered.iter().fold(0.0, |acc, t| acc + t.seconds))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timings(stages: &[StageId], secs: &[f64]) -> Vec<StageTiming> {
        stages
            .iter()
            .zip(secs)
            .map(|(&s, &x)| StageTiming::new(s, x))
            .collect()
    }

    #[test]
    fn pipelines_match_offload_sums() {
        use StageId::*;
        assert_eq!(
            stages_of(Technique::SaveLoad),
            &[Commit, Save, Transfer, Load, Start]
        );
        assert_eq!(
            stages_of(Technique::ExportImport),
            &[Export, Transfer, Import, Start]
        );
        assert_eq!(stages_of(Technique::PushPull), &[Commit, Push, Pull, Start]);
        assert_eq!(stages_of(Technique::Criu), &[Checkpoint, Restore]);
    }

    #[test]
    fn every_stage_belongs_to_some_technique() {
        for s in StageId::ALL {
            assert!(Technique::ALL.iter().any(|&t| has_stage(t, s)), "{s}");
        }
    }

    #[test]
    fn sums() {
        let sl = stages_of(Technique::SaveLoad);
        assert_eq!(
            total_offload_time(&timings(sl, &[0.0; 5]), Technique::SaveLoad).unwrap(),
            0.0
        );
        assert_eq!(
            total_offload_time(&timings(sl, &[2.0, 3.0, 5.0, 4.0, 1.0]), Technique::SaveLoad)
                .unwrap(),
            15.0
        );
        let criu = stages_of(Technique::Criu);
        assert_eq!(
            total_offload_time(&timings(criu, &[1.5, 2.5]), Technique::Criu).unwrap(),
            4.0
        );
    }

    #[test]
    fn missing_and_unknown_stages() {
        let ei = &stages_of(Technique::ExportImport)[..3];
        let err = total_offload_time(&timings(ei, &[1.0; 3]), Technique::ExportImport).unwrap_err();
        assert!(matches!(
            err,
            Error::MissingStage {
                stage: StageId::Start,
                ..
            }
        ));

        let mut t = timings(stages_of(Technique::Criu), &[1.0, 1.0]);
        t.push(StageTiming::new(StageId::Start, 1.0));
        assert!(matches!(
            total_offload_time(&t, Technique::Criu),
            Err(Error::UnknownStage { .. })
        ));

        let dup = timings(&[StageId::Checkpoint, StageId::Checkpoint], &[1.0, 1.0]);
        assert!(matches!(
            total_offload_time(&dup, Technique::Criu),
            Err(Error::UnknownStage { .. })
        ));
    }

    #[test]
    fn rejects_negative_time() {
        let t = timings(stages_of(Technique::Criu), &[1.0, -0.5]);
        assert!(matches!(
            total_offload_time(&t, Technique::Criu),
            Err(Error::InvalidTiming { .. })
        ));
    }

    #[test]
    fn names_round_trip() {
        for t in Technique::ALL {
            assert_eq!(t.as_str().parse::<Technique>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{t}\""));
        }
        for s in StageId::ALL {
            assert_eq!(s.as_str().parse::<StageId>().unwrap(), s);
        }
        assert_eq!(
            serde_json::to_string(&Direction::FogToCloud).unwrap(),
            "\"fog-to-cloud\""
        );
    }
}
