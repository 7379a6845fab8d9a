//! Instance files: a metric space plus a self-map plus free-form
//! metadata, as read and written by the command-line tools.
//!
//! The file layer ([`InstanceFile`]) is raw JSON shape; [`Instance`]
//! is the validated form the library operates on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::{GenConfig, GeneratedMap};
use crate::mapping::{MapError, MultiMap, SingleMap};
use crate::metric::{MetricError, MetricSpace, SpaceSpec};
use crate::scalar::{Scalar, Tolerance};

/// Map payload of an instance file; the two shapes are told apart by
/// their key (`target` vs `targets`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapKind {
    Single(SingleMap),
    Multi(MultiMap),
}

impl MapKind {
    pub fn point_count(&self) -> usize {
        match self {
            MapKind::Single(m) => m.point_count(),
            MapKind::Multi(m) => m.point_count(),
        }
    }

    pub fn to_multi(&self) -> MultiMap {
        match self {
            MapKind::Single(m) => m.lift(),
            MapKind::Multi(m) => m.clone(),
        }
    }

    /// The single-valued form, when there is one. A multivalued map
    /// whose images are all singletons counts.
    pub fn as_single(&self) -> Option<SingleMap> {
        match self {
            MapKind::Single(m) => Some(m.clone()),
            MapKind::Multi(m) => m.as_single(),
        }
    }
}

impl From<GeneratedMap> for MapKind {
    fn from(g: GeneratedMap) -> MapKind {
        match g {
            GeneratedMap::Single(s) => MapKind::Single(s),
            GeneratedMap::Multi(m) => MapKind::Multi(m),
        }
    }
}

/// Raw instance file: `{"space": {...}, "map": {...}, "metadata": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct InstanceFile<T: Scalar> {
    pub space: SpaceSpec<T>,
    pub map: MapKind,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError<T: Scalar> {
    #[error("space: {0}")]
    Space(#[from] MetricError<T>),
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("map covers {map_points} points but the space has {space_points}")]
    ArityMismatch {
        map_points: usize,
        space_points: usize,
    },
}

/// Validated instance: the space's invariants hold and the map matches
/// its point count.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T: Scalar> {
    pub space: MetricSpace<T>,
    pub map: MapKind,
    pub metadata: BTreeMap<String, String>,
}

impl<T: Scalar> InstanceFile<T> {
    pub fn new(space: &MetricSpace<T>, map: MapKind) -> Self {
        InstanceFile {
            space: space.to_spec(),
            map,
            metadata: BTreeMap::new(),
        }
    }

    /// Checks every invariant with the given comparison tolerance.
    pub fn validate(&self, tol: &Tolerance<T>) -> Result<Instance<T>, InstanceError<T>> {
        let space = MetricSpace::with_tolerance(
            self.space.dist.clone(),
            self.space.labels.clone(),
            tol,
        )?;
        if self.map.point_count() != space.point_count() {
            return Err(InstanceError::ArityMismatch {
                map_points: self.map.point_count(),
                space_points: space.point_count(),
            });
        }
        Ok(Instance {
            space,
            map: self.map.clone(),
            metadata: self.metadata.clone(),
        })
    }

    /// Validation with the matrix's default tolerance.
    pub fn validate_default(&self) -> Result<Instance<T>, InstanceError<T>> {
        let tol = Tolerance::for_matrix(&self.space.dist);
        self.validate(&tol)
    }
}

impl<T: Scalar> Instance<T> {
    pub fn multi(&self) -> MultiMap {
        self.map.to_multi()
    }

    pub fn to_file(&self) -> InstanceFile<T> {
        InstanceFile {
            space: self.space.to_spec(),
            map: self.map.clone(),
            metadata: self.metadata.clone(),
        }
    }
}

/// Builds the instance a generator recipe describes, with the recipe
/// echoed into the metadata.
pub fn instance_from_config(
    cfg: &GenConfig,
) -> Result<InstanceFile<f64>, crate::generate::GenError> {
    let (space, map) = cfg.build()?;
    let mut file = InstanceFile::new(&space, MapKind::from(map));
    file.metadata.insert(
        "config".to_string(),
        serde_json::to_string(cfg).expect("configs serialize"),
    );
    Ok(file)
}
