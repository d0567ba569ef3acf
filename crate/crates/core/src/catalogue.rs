//! The 25 runtime and offline parameters that drive offload time, and the
//! per-stage subsets each individual stage model is allowed to see.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pipeline::{ensure_stage, Direction, StageId, Technique};

/// Bumped whenever parameter semantics or stage subsets change; persisted
/// estimators record the version they were trained against.
pub const CATALOGUE_VERSION: &str = "1.0";

pub const PARAMETER_COUNT: usize = 25;

macro_rules! parameters {
    ($($v:ident = $n:literal),* $(,)?) => {
        /// Identifier of one catalogue parameter, `P1` through `P25`.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[repr(u8)]
        pub enum ParameterId {
            $($v = $n),*
        }

        impl ParameterId {
            pub const ALL: [ParameterId; PARAMETER_COUNT] = [$(ParameterId::$v),*];
        }
    };
}

parameters! {
    P1 = 1, P2 = 2, P3 = 3, P4 = 4, P5 = 5, P6 = 6, P7 = 7, P8 = 8, P9 = 9,
    P10 = 10, P11 = 11, P12 = 12, P13 = 13, P14 = 14, P15 = 15, P16 = 16,
    P17 = 17, P18 = 18, P19 = 19, P20 = 20, P21 = 21, P22 = 22, P23 = 23,
    P24 = 24, P25 = 25,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Cloud,
    Fog,
    Container,
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterKind {
    RuntimeSystem,
    RuntimeProcess,
    Offline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Range {
    Percent,
    NonNegative,
    Positive,
}

/// Static description of a parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParameterInfo {
    pub id: ParameterId,
    pub description: &'static str,
    pub unit: &'static str,
    pub side: Side,
    pub kind: ParameterKind,
}

impl ParameterId {
    /// 1-based index.
    pub fn number(self) -> usize {
        self as usize
    }

    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_number(n: usize) -> Option<ParameterId> {
        (1..=PARAMETER_COUNT)
            .contains(&n)
            .then(|| ParameterId::ALL[n - 1])
    }

    /// Lower-case key used in JSON and CSV (`p1` .. `p25`).
    pub fn key(self) -> String {
        format!("p{}", self.number())
    }

    pub fn info(self) -> ParameterInfo {
        use ParameterKind::*;
        use Side::*;
        let n = self.number();
        let side = match n {
            1..=8 | 18..=20 => Cloud,
            9..=16 | 21..=23 => Fog,
            17 => Container,
            _ => Link,
        };
        let (description, unit, kind) = match n {
            1 | 9 => ("system CPU utilisation", "%", RuntimeSystem),
            2 | 10 => ("system memory utilisation", "%", RuntimeSystem),
            3 | 11 => ("system disk utilisation", "%", RuntimeSystem),
            4 | 12 => ("offloading process CPU utilisation", "%", RuntimeProcess),
            5 | 13 => ("offloading process memory utilisation", "%", RuntimeProcess),
            6 | 14 => ("offloading process disk throughput", "B/s", RuntimeProcess),
            7 | 15 => ("offloading process bytes sent", "KB/s", RuntimeProcess),
            8 | 16 => ("offloading process bytes received", "KB/s", RuntimeProcess),
            17 => ("container image size", "MB", Offline),
            18 | 21 => ("number of cores", "cores", Offline),
            19 | 22 => ("memory size", "GB", Offline),
            20 | 23 => ("hard disk size", "GB", Offline),
            24 => ("network bandwidth", "bit/s", Offline),
            _ => ("network latency", "ms", Offline),
        };
        ParameterInfo {
            id: self,
            description,
            unit,
            side,
            kind,
        }
    }

    fn range(self) -> Range {
        match self.number() {
            1..=5 | 9..=13 => Range::Percent,
            17..=24 => Range::Positive,
            _ => Range::NonNegative,
        }
    }

    /// Counterpart on the other side of the link; container and link
    /// parameters map to themselves. Applying it twice is the identity.
    pub fn mirror(self) -> ParameterId {
        let n = self.number();
        let m = match n {
            1..=8 => n + 8,
            9..=16 => n - 8,
            18..=20 => n + 3,
            21..=23 => n - 3,
            _ => n,
        };
        ParameterId::ALL[m - 1]
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.number())
    }
}

impl FromStr for ParameterId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix(['p', 'P'])
            .and_then(|d| d.parse::<usize>().ok())
            .and_then(ParameterId::from_number)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown parameter `{s}`")))
    }
}

impl Serialize for ParameterId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for ParameterId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Metadata for every parameter, in index order.
pub fn parameter_catalogue() -> Vec<ParameterInfo> {
    ParameterId::ALL.iter().map(|p| p.info()).collect()
}

/// Parameter metadata as a JSON document for documentation tooling.
pub fn parameter_catalogue_json() -> String {
    #[derive(Serialize)]
    struct Doc {
        catalogue_version: &'static str,
        parameters: Vec<ParameterInfo>,
    }
    serde_json::to_string_pretty(&Doc {
        catalogue_version: CATALOGUE_VERSION,
        parameters: parameter_catalogue(),
    })
    .expect("static catalogue serializes")
}

/// One value per parameter, each in its declared unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricVector([f64; PARAMETER_COUNT]);

impl Default for MetricVector {
    fn default() -> Self {
        Self([0.0; PARAMETER_COUNT])
    }
}

impl MetricVector {
    pub fn from_values(values: [f64; PARAMETER_COUNT]) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64; PARAMETER_COUNT] {
        &self.0
    }

    /// Values of `params`, in the given order.
    pub fn project(&self, params: &[ParameterId]) -> Vec<f64> {
        params.iter().map(|&p| self[p]).collect()
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        validate_metric_vector(self)
    }
}

impl Index<ParameterId> for MetricVector {
    type Output = f64;

    fn index(&self, p: ParameterId) -> &f64 {
        &self.0[p.index()]
    }
}

impl IndexMut<ParameterId> for MetricVector {
    fn index_mut(&mut self, p: ParameterId) -> &mut f64 {
        &mut self.0[p.index()]
    }
}

impl Serialize for MetricVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(PARAMETER_COUNT))?;
        for p in ParameterId::ALL {
            map.serialize_entry(&p.key(), &self[p])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MetricVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct MetricVisitor;

        impl<'de> Visitor<'de> for MetricVisitor {
            type Value = MetricVector;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object with numeric keys p1 .. p25")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<MetricVector, A::Error> {
                let mut slots = [None; PARAMETER_COUNT];
                while let Some(key) = map.next_key::<String>()? {
                    let p: ParameterId = key
                        .parse()
                        .map_err(|_| de::Error::unknown_field(&key, &["p1 .. p25"]))?;
                    if p.key() != key {
                        return Err(de::Error::unknown_field(&key, &["p1 .. p25"]));
                    }
                    if slots[p.index()].replace(map.next_value::<f64>()?).is_some() {
                        return Err(de::Error::custom(format!("duplicate key `{key}`")));
                    }
                }
                let mut out = [0.0; PARAMETER_COUNT];
                for (i, slot) in slots.iter().enumerate() {
                    out[i] = slot.ok_or_else(|| {
                        de::Error::custom(format!("missing key `{}`", ParameterId::ALL[i].key()))
                    })?;
                }
                Ok(MetricVector(out))
            }
        }

        d.deserialize_map(MetricVisitor)
    }
}

/// A single broken range rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub parameter: ParameterId,
    pub value: f64,
    pub rule: Rule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    NotFinite,
    OutOfPercentRange,
    Negative,
    NotPositive,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.parameter;
        match self.rule {
            Rule::NotFinite => write!(f, "{p} is not finite"),
            Rule::OutOfPercentRange => write!(f, "{p} out of [0,100]"),
            Rule::Negative => write!(f, "{p} must be non-negative"),
            Rule::NotPositive => write!(f, "{p} must be positive"),
        }
    }
}

/// Checks every range rule, reporting all violations rather than the first.
pub fn validate_metric_vector(v: &MetricVector) -> std::result::Result<(), Vec<Violation>> {
    let violations: Vec<_> = ParameterId::ALL
        .iter()
        .filter_map(|&p| {
            let x = v[p];
            let rule = if !x.is_finite() {
                Some(Rule::NotFinite)
            } else {
                match p.range() {
                    Range::Percent if !(0.0..=100.0).contains(&x) => Some(Rule::OutOfPercentRange),
                    Range::NonNegative if x < 0.0 => Some(Rule::Negative),
                    Range::Positive if x <= 0.0 => Some(Rule::NotPositive),
                    _ => None,
                }
            };
            rule.map(|rule| Violation {
                parameter: p,
                value: x,
                rule,
            })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Input set of the collective model: every parameter, in index order.
pub fn full_feature_set() -> Vec<ParameterId> {
    ParameterId::ALL.to_vec()
}

/// Parameters an individual stage model consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSubset {
    pub technique: Technique,
    pub stage: StageId,
    pub parameters: Vec<ParameterId>,
}

fn span(lo: usize, hi: usize) -> impl Iterator<Item = usize> {
    lo..=hi
}

/// Cloud-to-fog subsets, as parameter numbers.
fn cloud_to_fog_numbers(technique: Technique, stage: StageId) -> Vec<usize> {
    use StageId::*;
    use Technique::*;
    let source_disk = || span(1, 6).chain(span(17, 20)).collect::<Vec<_>>();
    let dest_disk = || span(9, 14).chain([17]).chain(span(21, 23)).collect::<Vec<_>>();
    let link = || vec![7, 8, 15, 16, 17, 24, 25];
    match (technique, stage) {
        (SaveLoad, Commit | Save) | (ExportImport, Export) | (PushPull, Commit) => source_disk(),
        (SaveLoad | ExportImport, Transfer) => link(),
        (SaveLoad, Load | Start) | (ExportImport, Import | Start) => dest_disk(),
        // The registry push runs on the source, so it takes the source block.
        (PushPull, Push) => span(1, 8).chain(span(17, 20)).chain([24, 25]).collect(),
        (PushPull, Pull) => span(9, 17).chain(span(21, 25)).collect(),
        (PushPull, Start) => span(9, 14).chain([17]).collect(),
        (Criu, Checkpoint) => span(1, 8).chain(span(17, 20)).collect(),
        (Criu, Restore) => span(9, 16).chain(span(21, 23)).collect(),
        _ => unreachable!("stage membership checked by caller"),
    }
}

/// Features for one stage model. Fog-to-cloud offloads run the source-side
/// stages on the fog, so cloud and fog parameter blocks are swapped.
pub fn feature_subset(
    technique: Technique,
    stage: StageId,
    direction: Direction,
) -> Result<FeatureSubset> {
    ensure_stage(technique, stage)?;
    let mut parameters: Vec<ParameterId> = cloud_to_fog_numbers(technique, stage)
        .into_iter()
        .map(|n| ParameterId::ALL[n - 1])
        .map(|p| match direction {
            Direction::CloudToFog => p,
            Direction::FogToCloud => p.mirror(),
        })
        .collect();
    parameters.sort();
    parameters.dedup();
    Ok(FeatureSubset {
        technique,
        stage,
        parameters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::stages_of;

    fn ids(ns: &[usize]) -> Vec<ParameterId> {
        ns.iter().map(|&n| ParameterId::from_number(n).unwrap()).collect()
    }

    #[test]
    fn full_set_is_p1_to_p25() {
        let f = full_feature_set();
        assert_eq!(f.len(), 25);
        assert_eq!(f[0], ParameterId::P1);
        assert_eq!(f[24], ParameterId::P25);
        assert_eq!(f, full_feature_set());
        assert_eq!(f.iter().filter(|&&p| p == ParameterId::P17).count(), 1);
    }

    #[test]
    fn subset_examples() {
        use Direction::*;
        let sub = |t, s, d| feature_subset(t, s, d).unwrap().parameters;
        assert_eq!(
            sub(Technique::SaveLoad, StageId::Transfer, CloudToFog),
            ids(&[7, 8, 15, 16, 17, 24, 25])
        );
        assert_eq!(
            sub(Technique::Criu, StageId::Checkpoint, CloudToFog),
            ids(&[1, 2, 3, 4, 5, 6, 7, 8, 17, 18, 19, 20])
        );
        assert_eq!(
            sub(Technique::PushPull, StageId::Start, CloudToFog),
            ids(&[9, 10, 11, 12, 13, 14, 17])
        );
        assert_eq!(
            sub(Technique::SaveLoad, StageId::Commit, FogToCloud),
            ids(&[9, 10, 11, 12, 13, 14, 17, 21, 22, 23])
        );
    }

    #[test]
    fn invalid_pairing_is_rejected() {
        let err = feature_subset(Technique::Criu, StageId::Transfer, Direction::CloudToFog)
            .unwrap_err();
        assert!(matches!(err, Error::StageNotInTechnique { .. }));
    }

    #[test]
    fn mirror_is_an_involution() {
        for p in ParameterId::ALL {
            assert_eq!(p.mirror().mirror(), p);
        }
        assert_eq!(ParameterId::P1.mirror(), ParameterId::P9);
        assert_eq!(ParameterId::P20.mirror(), ParameterId::P23);
        assert_eq!(ParameterId::P17.mirror(), ParameterId::P17);
        assert_eq!(ParameterId::P25.mirror(), ParameterId::P25);
    }

    #[test]
    fn subsets_sorted_and_unique() {
        for t in Technique::ALL {
            for &s in stages_of(t) {
                for d in Direction::ALL {
                    let p = feature_subset(t, s, d).unwrap().parameters;
                    assert!(p.windows(2).all(|w| w[0] < w[1]), "{t}/{s}/{d}");
                }
            }
        }
    }

    fn valid_vector() -> MetricVector {
        let mut v = MetricVector::default();
        for p in ParameterId::ALL {
            if p.range() == Range::Positive {
                v[p] = 1.0;
            }
        }
        v
    }

    #[test]
    fn validation_rules() {
        assert!(validate_metric_vector(&valid_vector()).is_ok());

        let mut v = valid_vector();
        v[ParameterId::P1] = 105.0;
        let errs = validate_metric_vector(&v).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "P1 out of [0,100]");

        let mut v = valid_vector();
        v[ParameterId::P24] = 0.0;
        v[ParameterId::P7] = -1.0;
        let msgs: Vec<_> = validate_metric_vector(&v)
            .unwrap_err()
            .iter()
            .map(|e| e.to_string())
            .collect();
        assert_eq!(msgs, ["P7 must be non-negative", "P24 must be positive"]);

        let mut v = valid_vector();
        v[ParameterId::P25] = f64::NAN;
        assert_eq!(
            validate_metric_vector(&v).unwrap_err()[0].rule,
            Rule::NotFinite
        );
    }

    #[test]
    fn metric_vector_json_requires_every_key() {
        let v = valid_vector();
        let json = serde_json::to_string(&v).unwrap();
        let back: MetricVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);

        let mut obj: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(&json).unwrap();
        obj.remove("p13");
        let err = serde_json::from_value::<MetricVector>(obj.clone().into()).unwrap_err();
        assert!(err.to_string().contains("p13"), "{err}");

        obj.insert("p13".into(), 1.0.into());
        obj.insert("p26".into(), 1.0.into());
        assert!(serde_json::from_value::<MetricVector>(obj.into()).is_err());
    }

    #[test]
    fn catalogue_json_lists_all_parameters() {
        let doc: serde_json::Value = serde_json::from_str(&parameter_catalogue_json()).unwrap();
        let params = doc["parameters"].as_array().unwrap();
        assert_eq!(params.len(), 25);
        assert_eq!(params[23]["id"], "p24");
        assert_eq!(params[23]["unit"], "bit/s");
        assert_eq!(params[0]["side"], "cloud");
        assert_eq!(params[16]["kind"], "offline");
    }
}
