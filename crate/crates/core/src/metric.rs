//! Finite metric spaces and the set-distance primitives built on them.
//!
//! A [`MetricSpace`] is a validated square distance matrix. A
//! [`PointSet`] is a nonempty subset of its points kept in a canonical
//! strictly-increasing order, standing in for the nonempty closed
//! bounded subsets of the space (on a finite space that is simply
//! every nonempty subset).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{max_scalar, min_scalar, Scalar, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError<T: Scalar> {
    #[error("distance matrix is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("{labels} labels provided for {points} points")]
    LabelCount { labels: usize, points: usize },
    #[error("asymmetry at ({i},{j}): {a} != {b}")]
    Asymmetry { i: usize, j: usize, a: T, b: T },
    #[error("nonzero diagonal at ({i},{i}): {value}")]
    NonzeroDiagonal { i: usize, value: T },
    #[error("nonpositive off-diagonal at ({i},{j}): {value}")]
    NonpositiveOffDiagonal { i: usize, j: usize, value: T },
    #[error("triangle inequality violated at ({i},{j},{k}): d({i},{j}) exceeds d({i},{k}) + d({k},{j}) by {excess}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        excess: T,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PointSetError {
    #[error("point set must be nonempty")]
    Empty,
}

/// Nonempty set of point indices in canonical (strictly increasing)
/// form. Equality is list equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PointSet {
    members: Vec<usize>,
}

impl PointSet {
    /// Builds the canonical form: sorts and deduplicates the input.
    pub fn new(members: impl IntoIterator<Item = usize>) -> Result<Self, PointSetError> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(PointSetError::Empty);
        }
        Ok(PointSet { members })
    }

    pub fn singleton(point: usize) -> Self {
        PointSet {
            members: vec![point],
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }

    pub fn contains(&self, point: usize) -> bool {
        self.members.binary_search(&point).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn max_index(&self) -> usize {
        *self.members.last().expect("nonempty")
    }
}

impl TryFrom<Vec<usize>> for PointSet {
    type Error = PointSetError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        PointSet::new(v)
    }
}

impl From<PointSet> for Vec<usize> {
    fn from(s: PointSet) -> Vec<usize> {
        s.members
    }
}

/// Raw serialized shape of a metric space: `{"labels": [...], "dist": [[...]]}`
/// with `labels` optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub dist: Vec<Vec<T>>,
}

/// Finite metric space: point labels plus a validated distance matrix.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpec<T>", into = "SpaceSpec<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct MetricSpace<T: Scalar> {
    labels: Vec<String>,
    dist: Vec<Vec<T>>,
}

impl<T: Scalar> MetricSpace<T> {
    /// Validates a distance matrix with the default tolerance for the
    /// matrix (exact when every entry is exact).
    pub fn new(dist: Vec<Vec<T>>, labels: Option<Vec<String>>) -> Result<Self, MetricError<T>> {
        let tol = Tolerance::for_matrix(&dist);
        Self::with_tolerance(dist, labels, &tol)
    }

    /// Validates a distance matrix. The checks run in row-major scan
    /// order and report the first violation: per cell, symmetry, zero
    /// diagonal, and off-diagonal positivity; then the triangle
    /// inequality `d(i,j) <= d(i,k) + d(k,j)` over ordered triples,
    /// up to the tolerance slack.
    pub fn with_tolerance(
        dist: Vec<Vec<T>>,
        labels: Option<Vec<String>>,
        tol: &Tolerance<T>,
    ) -> Result<Self, MetricError<T>> {
        let n = dist.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (row, r) in dist.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != n {
                    return Err(MetricError::LabelCount {
                        labels: l.len(),
                        points: n,
                    });
                }
                l
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    if dist[i][i] != T::zero() {
                        return Err(MetricError::NonzeroDiagonal {
                            i,
                            value: dist[i][i].clone(),
                        });
                    }
                } else {
                    if dist[i][j] != dist[j][i] {
                        return Err(MetricError::Asymmetry {
                            i,
                            j,
                            a: dist[i][j].clone(),
                            b: dist[j][i].clone(),
                        });
                    }
                    if dist[i][j] <= T::zero() {
                        return Err(MetricError::NonpositiveOffDiagonal {
                            i,
                            j,
                            value: dist[i][j].clone(),
                        });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = dist[i][k].clone() + dist[k][j].clone();
                    if !tol.leq(&dist[i][j], &via) {
                        return Err(MetricError::TriangleViolation {
                            i,
                            j,
                            k,
                            excess: dist[i][j].clone() - via,
                        });
                    }
                }
            }
        }
        Ok(MetricSpace { labels, dist })
    }

    pub fn point_count(&self) -> usize {
        self.dist.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> T {
        self.dist[i][j].clone()
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.dist
    }

    pub fn max_entry(&self) -> T {
        let mut m = T::zero();
        for row in &self.dist {
            for v in row {
                m = max_scalar(m, v.clone());
            }
        }
        m
    }

    /// True when all indices of `set` address points of this space.
    pub fn admits(&self, set: &PointSet) -> bool {
        set.max_index() < self.point_count()
    }

    fn assert_set(&self, set: &PointSet) {
        assert!(
            self.admits(set),
            "point set index {} out of range for {} points",
            set.max_index(),
            self.point_count()
        );
    }

    /// Largest distance between a member of `a` and a member of `b`.
    /// Symmetric; collapses to the point metric on singletons.
    pub fn delta(&self, a: &PointSet, b: &PointSet) -> T {
        self.assert_set(a);
        self.assert_set(b);
        let mut best = T::zero();
        for x in a.iter() {
            for y in b.iter() {
                best = max_scalar(best, self.dist(x, y));
            }
        }
        best
    }

    /// Smallest distance from the point `x` to a member of `a`;
    /// zero exactly when `x` belongs to `a`.
    pub fn point_set_distance(&self, x: usize, a: &PointSet) -> T {
        assert!(x < self.point_count(), "point index out of range");
        self.assert_set(a);
        let mut it = a.iter();
        let first = it.next().expect("nonempty");
        let mut best = self.dist(x, first);
        for y in it {
            best = min_scalar(best, self.dist(x, y));
        }
        best
    }

    /// Sum of `delta` over all unordered pairs of the given sets.
    /// Requires at least two sets.
    pub fn total_pairwise(&self, sets: &[PointSet]) -> T {
        assert!(sets.len() >= 2, "total pairwise distance needs >= 2 sets");
        let mut sum = T::zero();
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                sum = sum + self.delta(&sets[i], &sets[j]);
            }
        }
        sum
    }

    /// Sum of the pairwise distances of `points` (the point version of
    /// [`total_pairwise`](Self::total_pairwise)).
    pub fn total_pairwise_points(&self, points: &[usize]) -> T {
        assert!(points.len() >= 2, "total pairwise distance needs >= 2 points");
        let mut sum = T::zero();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                sum = sum + self.dist(points[i], points[j]);
            }
        }
        sum
    }

    /// `d(a,b) + d(b,c) + d(a,c)`; the indices need not be distinct.
    pub fn perimeter(&self, a: usize, b: usize, c: usize) -> T {
        self.dist(a, b) + self.dist(b, c) + self.dist(a, c)
    }

    /// Largest pairwise distance within `a`; equals `delta(a, a)`.
    pub fn diameter_of(&self, a: &PointSet) -> T {
        self.delta(a, a)
    }

    pub fn to_spec(&self) -> SpaceSpec<T> {
        SpaceSpec {
            labels: Some(self.labels.clone()),
            dist: self.dist.clone(),
        }
    }
}

impl<T: Scalar> TryFrom<SpaceSpec<T>> for MetricSpace<T> {
    type Error = MetricError<T>;

    fn try_from(spec: SpaceSpec<T>) -> Result<Self, Self::Error> {
        MetricSpace::new(spec.dist, spec.labels)
    }
}

impl<T: Scalar> From<MetricSpace<T>> for SpaceSpec<T> {
    fn from(space: MetricSpace<T>) -> SpaceSpec<T> {
        space.to_spec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(coords: &[f64]) -> MetricSpace<f64> {
        let n = coords.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| (coords[i] - coords[j]).abs()).collect())
            .collect();
        MetricSpace::new(dist, None).unwrap()
    }

    fn set(members: &[usize]) -> PointSet {
        PointSet::new(members.iter().copied()).unwrap()
    }

    #[test]
    fn singleton_space_is_valid() {
        let s = MetricSpace::new(vec![vec![0.0]], None).unwrap();
        assert_eq!(s.point_count(), 1);
    }

    #[test]
    fn two_point_space_is_valid() {
        let s = MetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], None).unwrap();
        assert_eq!(s.point_count(), 2);
        assert_eq!(s.dist(0, 1), 1.0);
    }

    #[test]
    fn triangle_violation_names_the_first_offending_triple() {
        // d(0,2) = 3 > d(0,1) + d(1,2) = 2; first hit scanning (i,j,k)
        // row-major is (0,2,1).
        let err = MetricSpace::new(
            vec![
                vec![0.0, 1.0, 3.0],
                vec![1.0, 0.0, 1.0],
                vec![3.0, 1.0, 0.0],
            ],
            None,
        )
        .unwrap_err();
        match err {
            MetricError::TriangleViolation { i, j, k, excess } => {
                assert_eq!((i, j, k), (0, 2, 1));
                assert_eq!(excess, 1.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn asymmetry_reported_with_indices() {
        let err = MetricSpace::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]], None).unwrap_err();
        assert!(matches!(err, MetricError::Asymmetry { i: 0, j: 1, .. }));
    }

    #[test]
    fn nonzero_diagonal_and_nonpositive_off_diagonal() {
        let err = MetricSpace::new(vec![vec![1.0]], None).unwrap_err();
        assert!(matches!(err, MetricError::NonzeroDiagonal { i: 0, .. }));
        let err = MetricSpace::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], None).unwrap_err();
        assert!(matches!(
            err,
            MetricError::NonpositiveOffDiagonal { i: 0, j: 1, .. }
        ));
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let err = MetricSpace::new(vec![vec![0.0, 1.0], vec![1.0]], None).unwrap_err();
        assert!(matches!(
            err,
            MetricError::NotSquare {
                row: 1,
                len: 1,
                expected: 2
            }
        ));
    }

    #[test]
    fn delta_on_identical_singletons_is_zero() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(s.delta(&set(&[0]), &set(&[0])), 0.0);
    }

    #[test]
    fn delta_on_singletons_is_the_point_metric() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(s.delta(&set(&[0]), &set(&[2])), 3.0);
    }

    #[test]
    fn delta_takes_the_largest_cross_distance() {
        // Points 0, 1, 3 on the line; A = {0,1}, B = {1,3}: the four
        // cross distances are 1, 3, 0, 2, so delta is d(0,3) = 3.
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(s.delta(&set(&[0, 1]), &set(&[1, 2])), 3.0);
    }

    #[test]
    fn point_set_distance_zero_iff_member() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(s.point_set_distance(1, &set(&[0, 1])), 0.0);
        assert_eq!(s.point_set_distance(0, &set(&[1])), 1.0);
        // x at coordinate 3 against {0, 1}: min(3, 2) = 2.
        assert_eq!(s.point_set_distance(2, &set(&[0, 1])), 2.0);
    }

    #[test]
    fn total_pairwise_matches_hand_sums() {
        let s = line(&[0.0, 1.0, 3.0]);
        let singles = [set(&[0]), set(&[1]), set(&[2])];
        assert_eq!(s.total_pairwise(&singles), 6.0);
        assert_eq!(s.total_pairwise_points(&[0, 1, 2]), 6.0);
        let pair = [set(&[0, 1]), set(&[1, 2])];
        assert_eq!(s.total_pairwise(&pair), 3.0);
        let same = [set(&[0]), set(&[0]), set(&[0])];
        assert_eq!(s.total_pairwise(&same), 0.0);
    }

    #[test]
    fn perimeter_examples() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(s.perimeter(0, 0, 0), 0.0);
        assert_eq!(s.perimeter(0, 1, 2), 6.0);
        let s = line(&[0.0, 1.0]);
        assert_eq!(s.perimeter(0, 0, 1), 2.0);
    }

    #[test]
    fn point_set_canonical_form() {
        let s = PointSet::new([3, 1, 3, 0]).unwrap();
        assert_eq!(s.members(), &[0, 1, 3]);
        assert!(PointSet::new([]).is_err());
    }

    #[test]
    fn space_json_round_trip() {
        let s = line(&[0.0, 1.0, 3.0]);
        let json = serde_json::to_string(&s).unwrap();
        let back: MetricSpace<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn labels_default_to_indices() {
        let s: MetricSpace<f64> =
            serde_json::from_str(r#"{"dist": [[0.0, 1.0], [1.0, 0.0]]}"#).unwrap();
        assert_eq!(s.label(0), "0");
        assert_eq!(s.label(1), "1");
    }
}
