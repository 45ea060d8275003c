//! JSON forms: rationals as `"p/q"` strings, points with an optional marking,
//! and ray files that carry their recipe.

use crate::error::{OslError, Result};
use crate::graphs::fold::FoldKind;
use crate::graphs::graph::Graph;
use crate::graphs::point::{Marking, Point};
use crate::matrices::IntMatrix;
use crate::numeric::{format_rational, parse_rational, Q};
use crate::ray::{generate_ray, Ray, RayConfig, RaySchedule};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `#[serde(with = "rational")]` for a single `Q`.
pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "rationals")]` for `Vec<Q>`.
pub mod rationals {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s)).collect::<Result<_>>().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "rational_rows")]` for `Vec<Vec<Q>>`.
pub mod rational_rows {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|row| row.iter().map(format_rational).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Q>>, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()
            .map_err(serde::de::Error::custom)
    }
}

/// Integer matrix rows as decimal strings.
pub fn matrix_rows(m: &IntMatrix) -> Vec<Vec<String>> {
    m.rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

/// On-disk point. Without a marking, the spanning-tree marking at vertex 0 is used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointSpec {
    pub graph: Graph,
    #[serde(with = "rationals")]
    pub lengths: Vec<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marking: Option<Marking>,
}

impl TryFrom<PointSpec> for Point {
    type Error = OslError;

    fn try_from(spec: PointSpec) -> Result<Point> {
        let marking = spec.marking.unwrap_or_else(|| Marking::spanning_tree(&spec.graph, 0));
        Point::new(spec.graph, spec.lengths, marking)
    }
}

impl From<Point> for PointSpec {
    fn from(p: Point) -> PointSpec {
        PointSpec { graph: p.graph, lengths: p.lengths, marking: Some(p.marking) }
    }
}

pub fn point_from_json(s: &str) -> Result<Point> {
    let spec: PointSpec = serde_json::from_str(s).map_err(|e| OslError::Parse(e.to_string()))?;
    Point::try_from(spec)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub block: usize,
    pub kind: FoldKind,
    pub turn: String,
    #[serde(with = "rational")]
    pub time: Q,
    #[serde(with = "rational")]
    pub amount: Q,
}

pub const RAY_FORMAT: &str = "osl-ray/1";

/// A generated ray as stored on disk: the recipe plus a summary that is
/// checked against a regeneration on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayFile {
    pub format: String,
    pub config: RayConfig,
    pub horizon: usize,
    #[serde(with = "rationals")]
    pub base: Vec<Q>,
    #[serde(with = "rational")]
    pub extent: Q,
    #[serde(with = "rational_rows")]
    pub milestones: Vec<Vec<Q>>,
    pub folds: Vec<FoldRecord>,
}

impl RayFile {
    pub fn new(config: &RayConfig, ray: &Ray) -> RayFile {
        RayFile {
            format: RAY_FORMAT.into(),
            config: config.clone(),
            horizon: ray.horizon,
            base: ray.base.lengths.clone(),
            extent: ray.extent(),
            milestones: ray.milestones.clone(),
            folds: ray
                .folds
                .iter()
                .map(|f| FoldRecord { block: f.block, kind: f.kind, turn: f.turn().to_string(), time: f.time.clone(), amount: f.amount.clone() })
                .collect(),
        }
    }

    /// Generates the ray of `config` up to `horizon` and its file.
    pub fn generate(config: &RayConfig, horizon: usize) -> Result<(RayFile, Ray)> {
        let schedule = RaySchedule::from_config(config)?;
        let ray = generate_ray(&schedule, horizon)?;
        Ok((RayFile::new(config, &ray), ray))
    }

    /// Parses a ray file, regenerates it and checks that both agree.
    pub fn load(json: &str) -> Result<(RayFile, Ray)> {
        let file: RayFile = serde_json::from_str(json).map_err(|e| OslError::Parse(e.to_string()))?;
        if file.format != RAY_FORMAT {
            return Err(OslError::Parse(format!("unknown ray format {:?}", file.format)));
        }
        let (fresh, ray) = RayFile::generate(&file.config, file.horizon)?;
        if fresh != file {
            return Err(OslError::Parse("ray file does not match its regenerated recipe".into()));
        }
        Ok((file, ray))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ray files serialize")
    }
}
