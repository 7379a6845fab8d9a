//! Single- and multivalued self-mappings of a finite point set, their
//! set images and iterates, and fixed/periodic point enumeration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::PointSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("a self-map needs at least one point")]
    Empty,
    #[error("target of point {point} references index {index}, but the map has {points} points")]
    TargetOutOfRange {
        point: usize,
        index: usize,
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SingleMapRepr {
    target: Vec<usize>,
}

/// Single-valued self-map: one target index per point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SingleMapRepr", into = "SingleMapRepr")]
pub struct SingleMap {
    target: Vec<usize>,
}

impl SingleMap {
    pub fn new(target: Vec<usize>) -> Result<Self, MapError> {
        if target.is_empty() {
            return Err(MapError::Empty);
        }
        let n = target.len();
        for (point, &index) in target.iter().enumerate() {
            if index >= n {
                return Err(MapError::TargetOutOfRange {
                    point,
                    index,
                    points: n,
                });
            }
        }
        Ok(SingleMap { target })
    }

    pub fn point_count(&self) -> usize {
        self.target.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.target[x]
    }

    pub fn iterate(&self, x: usize, k: usize) -> usize {
        let mut cur = x;
        for _ in 0..k {
            cur = self.target[cur];
        }
        cur
    }

    pub fn targets(&self) -> &[usize] {
        &self.target
    }

    /// Embeds the map into the multivalued world as singleton images.
    pub fn lift(&self) -> MultiMap {
        MultiMap {
            targets: self.target.iter().map(|&t| PointSet::singleton(t)).collect(),
        }
    }
}

impl TryFrom<SingleMapRepr> for SingleMap {
    type Error = MapError;

    fn try_from(repr: SingleMapRepr) -> Result<Self, Self::Error> {
        SingleMap::new(repr.target)
    }
}

impl From<SingleMap> for SingleMapRepr {
    fn from(m: SingleMap) -> SingleMapRepr {
        SingleMapRepr { target: m.target }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct MultiMapRepr {
    targets: Vec<Vec<usize>>,
}

/// Multivalued self-map: a nonempty point set per point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MultiMapRepr", into = "MultiMapRepr")]
pub struct MultiMap {
    targets: Vec<PointSet>,
}

impl MultiMap {
    pub fn new(targets: Vec<PointSet>) -> Result<Self, MapError> {
        if targets.is_empty() {
            return Err(MapError::Empty);
        }
        let n = targets.len();
        for (point, set) in targets.iter().enumerate() {
            if set.max_index() >= n {
                return Err(MapError::TargetOutOfRange {
                    point,
                    index: set.max_index(),
                    points: n,
                });
            }
        }
        Ok(MultiMap { targets })
    }

    /// Convenience constructor from raw member lists.
    pub fn from_members(targets: Vec<Vec<usize>>) -> Result<Self, MapError> {
        let sets = targets
            .into_iter()
            .map(PointSet::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| MapError::Empty)?;
        MultiMap::new(sets)
    }

    pub fn point_count(&self) -> usize {
        self.targets.len()
    }

    pub fn target(&self, x: usize) -> &PointSet {
        &self.targets[x]
    }

    pub fn targets(&self) -> &[PointSet] {
        &self.targets
    }

    /// True when every image is a singleton.
    pub fn is_single_valued(&self) -> bool {
        self.targets.iter().all(PointSet::is_singleton)
    }

    /// Collapses an all-singleton map back to its single-valued form.
    pub fn as_single(&self) -> Option<SingleMap> {
        if !self.is_single_valued() {
            return None;
        }
        Some(SingleMap {
            target: self.targets.iter().map(|s| s.members()[0]).collect(),
        })
    }

    /// Union of the images of all members of `a`.
    pub fn image(&self, a: &PointSet) -> PointSet {
        let n = self.point_count();
        assert!(a.max_index() < n, "point set exceeds the map's domain");
        let mut mask = vec![false; n];
        for x in a.iter() {
            for y in self.targets[x].iter() {
                mask[y] = true;
            }
        }
        let members: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        PointSet::new(members).expect("images of nonempty sets are nonempty")
    }

    /// `k`-fold set image of the single point `x`; `k` must be >= 1.
    pub fn power_image(&self, x: usize, k: usize) -> PointSet {
        assert!(k >= 1, "power image needs k >= 1");
        let mut cur = self.targets[x].clone();
        for _ in 1..k {
            cur = self.image(&cur);
        }
        cur
    }

    /// Points `x` with `x` in `T(x)`.
    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.point_count())
            .filter(|&x| self.targets[x].contains(x))
            .collect()
    }

    /// Points whose first return under iterated set images happens at
    /// step `k` exactly: `x` in `T^k {x}` and in no earlier power.
    pub fn periodic_points(&self, k: usize) -> Vec<usize> {
        assert!(k >= 1, "periods start at 1");
        let mut out = Vec::new();
        'points: for x in 0..self.point_count() {
            let mut cur = self.targets[x].clone();
            for _ in 1..k {
                if cur.contains(x) {
                    continue 'points;
                }
                cur = self.image(&cur);
            }
            if cur.contains(x) {
                out.push(x);
            }
        }
        out
    }
}

impl TryFrom<MultiMapRepr> for MultiMap {
    type Error = MapError;

    fn try_from(repr: MultiMapRepr) -> Result<Self, Self::Error> {
        let sets = repr
            .targets
            .into_iter()
            .map(PointSet::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| MapError::Empty)?;
        MultiMap::new(sets)
    }
}

impl From<MultiMap> for MultiMapRepr {
    fn from(m: MultiMap) -> MultiMapRepr {
        MultiMapRepr {
            targets: m.targets.into_iter().map(Vec::from).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multi(targets: &[&[usize]]) -> MultiMap {
        MultiMap::from_members(targets.iter().map(|t| t.to_vec()).collect()).unwrap()
    }

    #[test]
    fn lift_wraps_targets_in_singletons() {
        let identity = SingleMap::new(vec![0, 1, 2]).unwrap().lift();
        for i in 0..3 {
            assert_eq!(identity.target(i).members(), &[i]);
        }
        let constant = SingleMap::new(vec![0, 0, 0]).unwrap().lift();
        for i in 0..3 {
            assert_eq!(constant.target(i).members(), &[0]);
        }
        let m = SingleMap::new(vec![0, 0, 1]).unwrap().lift();
        assert_eq!(m.target(0).members(), &[0]);
        assert_eq!(m.target(1).members(), &[0]);
        assert_eq!(m.target(2).members(), &[1]);
    }

    #[test]
    fn image_examples() {
        let t = multi(&[&[0, 1], &[2], &[2]]);
        assert_eq!(
            t.image(&PointSet::new([0, 1]).unwrap()).members(),
            &[0, 1, 2]
        );
        assert_eq!(t.image(&PointSet::singleton(1)).members(), &[2]);
        let constant = multi(&[&[1], &[1], &[1]]);
        assert_eq!(
            constant.image(&PointSet::new([0, 2]).unwrap()).members(),
            &[1]
        );
    }

    #[test]
    fn power_image_examples() {
        let swap = multi(&[&[1], &[0]]);
        assert_eq!(swap.power_image(0, 1).members(), &[1]);
        assert_eq!(swap.power_image(0, 2).members(), &[0]);
        let constant = multi(&[&[1], &[1], &[1]]);
        for k in 1..5 {
            assert_eq!(constant.power_image(2, k).members(), &[1]);
        }
    }

    #[test]
    fn fixed_point_examples() {
        let identity = SingleMap::new(vec![0, 1, 2]).unwrap().lift();
        assert_eq!(identity.fixed_points(), vec![0, 1, 2]);
        let swap = multi(&[&[1], &[0]]);
        assert!(swap.fixed_points().is_empty());
        let t = multi(&[&[0, 1], &[2], &[2]]);
        assert_eq!(t.fixed_points(), vec![0, 2]);
    }

    #[test]
    fn periodic_point_examples() {
        let identity = SingleMap::new(vec![0, 1, 2]).unwrap().lift();
        assert_eq!(identity.periodic_points(1), vec![0, 1, 2]);
        assert!(identity.periodic_points(2).is_empty());

        let swap = multi(&[&[1], &[0]]);
        assert_eq!(swap.periodic_points(2), vec![0, 1]);

        let cycle3 = multi(&[&[1], &[2], &[0]]);
        assert!(cycle3.periodic_points(1).is_empty());
        assert!(cycle3.periodic_points(2).is_empty());
        assert_eq!(cycle3.periodic_points(3), vec![0, 1, 2]);
    }

    #[test]
    fn out_of_range_target_is_rejected() {
        let err = MultiMap::from_members(vec![vec![0], vec![2]]).unwrap_err();
        assert!(matches!(err, MapError::TargetOutOfRange { point: 1, .. }));
    }

    #[test]
    fn map_json_shapes() {
        let m = multi(&[&[0, 1], &[2], &[2]]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"targets":[[0,1],[2],[2]]}"#);
        let back: MultiMap = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);

        let s = SingleMap::new(vec![0, 0, 1]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"target":[0,0,1]}"#);
        let back: SingleMap = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }
}
