//! Seeded instance generators: spaces with controllable geometry and
//! maps with controllable likelihood of certifying into each class.
//!
//! Everything is a pure function of its arguments, so identical seeds
//! reproduce identical instances on every platform.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{MultiMap, SingleMap};
use crate::metric::{MetricSpace, PointSet};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("instance generation needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("hub index {hub} is out of range for {points} points")]
    HubOutOfRange { hub: usize, points: usize },
    #[error("cycle length {length} exceeds the point count {points}")]
    CycleTooLong { length: usize, points: usize },
    #[error("max_image must be at least 1")]
    EmptyImage,
    #[error("euclidean dimension must be at least 1")]
    ZeroDimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceFlavor {
    /// Points sampled uniformly in the unit cube of the given
    /// dimension, with Euclidean distances.
    Euclidean { dim: usize },
    /// Random symmetric weights repaired into a metric by the
    /// all-pairs shortest-path closure.
    ClosureRandom,
    /// Evenly spaced points on a line: `d(i, j) = |i - j|`.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapFlavor {
    /// Every point gets a uniformly chosen nonempty image of size at
    /// most `max_image`.
    UniformRandom { max_image: usize },
    /// Images huddle among the `spread + 1` points nearest the hub;
    /// `spread = 0` is the constant map to the hub.
    Hub { hub_index: usize, spread: usize },
    /// A uniformly random single-valued map.
    SingleRandom,
    /// The single-valued map sending every point one step along the
    /// cycle `0, 1, ..., length - 1, 0`.
    Cycle { length: usize },
}

/// Recipe for one random instance: a space flavor, a map flavor, and
/// the seed both draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub point_count: usize,
    pub flavor: SpaceFlavor,
    pub map_flavor: MapFlavor,
    pub seed: u64,
}

/// splitmix64 step; used to derive independent sub-seeds.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` points sampled in the unit cube with Euclidean distances. The
/// result always validates; in the (measure-zero) event of coincident
/// samples the points are redrawn from the same stream.
pub fn random_euclidean_space(n: usize, dim: usize, seed: u64) -> MetricSpace<f64> {
    assert!(n >= 1, "need at least one point");
    assert!(dim >= 1, "need at least one dimension");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let coords: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let dist: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        coords[i]
                            .iter()
                            .zip(&coords[j])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        if let Ok(space) = MetricSpace::new(dist, None) {
            return space;
        }
    }
}

/// Shortest-path closure of a symmetric nonnegative matrix with zero
/// diagonal; idempotent, and the identity on matrices that already
/// satisfy the triangle inequality.
pub fn metric_closure<T: Scalar>(mut dist: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let n = dist.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k].clone() + dist[k][j].clone();
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    dist
}

/// Random non-Euclidean metric: symmetric weights drawn uniformly from
/// `[0.5, 2.0]` (bounded away from zero), then repaired by the
/// shortest-path closure.
pub fn random_metric_space(n: usize, seed: u64) -> MetricSpace<f64> {
    assert!(n >= 2, "need at least two points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = vec![vec![0.0_f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.gen_range(0.5..2.0);
            dist[i][j] = w;
            dist[j][i] = w;
        }
    }
    let dist = metric_closure(dist);
    MetricSpace::new(dist, None).expect("closure output is a metric")
}

/// Evenly spaced line metric on `n` points.
pub fn line_space(n: usize) -> MetricSpace<f64> {
    assert!(n >= 1);
    let dist = (0..n)
        .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    MetricSpace::new(dist, None).expect("line distances form a metric")
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, max_size: usize) -> PointSet {
    let size = rng.gen_range(1..=max_size.min(n));
    let picked = index::sample(rng, n, size).into_vec();
    PointSet::new(picked).expect("sampled size is at least one")
}

/// Independent nonempty images of size at most `max_image`.
pub fn random_multimap(point_count: usize, max_image: usize, seed: u64) -> MultiMap {
    assert!(point_count >= 1);
    assert!(max_image >= 1, "images must be nonempty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = (0..point_count)
        .map(|_| random_subset(&mut rng, point_count, max_image))
        .collect();
    MultiMap::new(targets).expect("sampled indices are in range")
}

/// Uniformly random single-valued map.
pub fn random_single_map(point_count: usize, seed: u64) -> SingleMap {
    assert!(point_count >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = (0..point_count)
        .map(|_| rng.gen_range(0..point_count))
        .collect();
    SingleMap::new(target).expect("sampled indices are in range")
}

/// Map whose images are random nonempty subsets of the `spread + 1`
/// points nearest the hub (ties broken by index). `spread = 0` gives
/// the constant map to the hub.
pub fn hub_map<T: Scalar>(
    space: &MetricSpace<T>,
    hub: usize,
    spread: usize,
    seed: u64,
) -> MultiMap {
    let n = space.point_count();
    assert!(hub < n, "hub out of range");
    let mut by_distance: Vec<usize> = (0..n).collect();
    by_distance.sort_by(|&a, &b| {
        space
            .dist(hub, a)
            .partial_cmp(&space.dist(hub, b))
            .expect("validated distances are comparable")
            .then(a.cmp(&b))
    });
    let pool: Vec<usize> = by_distance.into_iter().take(spread + 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = (0..n)
        .map(|_| {
            let size = rng.gen_range(1..=pool.len());
            let picked = index::sample(&mut rng, pool.len(), size)
                .into_iter()
                .map(|i| pool[i]);
            PointSet::new(picked).expect("pool is nonempty")
        })
        .collect();
    MultiMap::new(targets).expect("pool indices are in range")
}

/// Map produced by a [`MapFlavor`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratedMap {
    Single(SingleMap),
    Multi(MultiMap),
}

impl GeneratedMap {
    pub fn to_multi(&self) -> MultiMap {
        match self {
            GeneratedMap::Single(s) => s.lift(),
            GeneratedMap::Multi(m) => m.clone(),
        }
    }
}

impl GenConfig {
    pub fn check(&self) -> Result<(), GenError> {
        if self.point_count < 2 {
            return Err(GenError::TooFewPoints(self.point_count));
        }
        match self.flavor {
            SpaceFlavor::Euclidean { dim } if dim == 0 => return Err(GenError::ZeroDimension),
            _ => {}
        }
        match self.map_flavor {
            MapFlavor::UniformRandom { max_image } if max_image == 0 => {
                Err(GenError::EmptyImage)
            }
            MapFlavor::Hub { hub_index, .. } if hub_index >= self.point_count => {
                Err(GenError::HubOutOfRange {
                    hub: hub_index,
                    points: self.point_count,
                })
            }
            MapFlavor::Cycle { length } if length == 0 || length > self.point_count => {
                Err(GenError::CycleTooLong {
                    length,
                    points: self.point_count,
                })
            }
            _ => Ok(()),
        }
    }

    /// Materializes the space and map this recipe describes. The space
    /// and the map draw from independently derived sub-seeds.
    pub fn build(&self) -> Result<(MetricSpace<f64>, GeneratedMap), GenError> {
        self.check()?;
        let space_seed = derive_seed(self.seed, 1);
        let map_seed = derive_seed(self.seed, 2);
        let space = match self.flavor {
            SpaceFlavor::Euclidean { dim } => {
                random_euclidean_space(self.point_count, dim, space_seed)
            }
            SpaceFlavor::ClosureRandom => random_metric_space(self.point_count, space_seed),
            SpaceFlavor::Line => line_space(self.point_count),
        };
        let map = match self.map_flavor {
            MapFlavor::UniformRandom { max_image } => {
                GeneratedMap::Multi(random_multimap(self.point_count, max_image, map_seed))
            }
            MapFlavor::Hub { hub_index, spread } => {
                GeneratedMap::Multi(hub_map(&space, hub_index, spread, map_seed))
            }
            MapFlavor::SingleRandom => {
                GeneratedMap::Single(random_single_map(self.point_count, map_seed))
            }
            MapFlavor::Cycle { length } => {
                let target = (0..self.point_count).map(|i| (i + 1) % length).collect();
                GeneratedMap::Single(SingleMap::new(target).expect("cycle stays in range"))
            }
        };
        Ok((space, map))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_banach, Parallelism};

    #[test]
    fn euclidean_spaces_validate_and_reproduce() {
        for seed in 0..20 {
            let a = random_euclidean_space(8, 2, seed);
            let b = random_euclidean_space(8, 2, seed);
            assert_eq!(a, b);
            assert_eq!(a.point_count(), 8);
        }
        let singleton = random_euclidean_space(1, 3, 5);
        assert_eq!(singleton.point_count(), 1);
    }

    #[test]
    fn closure_spaces_validate_and_reproduce() {
        for seed in 0..20 {
            let a = random_metric_space(7, seed);
            let b = random_metric_space(7, seed);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn closure_is_idempotent_and_fixes_metrics() {
        let line = line_space(4);
        let closed = metric_closure(line.matrix().to_vec());
        assert_eq!(closed, line.matrix());

        let broken = vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        let closed = metric_closure(broken);
        assert_eq!(closed[0][2], 2.0);
        let twice = metric_closure(closed.clone());
        assert_eq!(twice, closed);
        assert!(MetricSpace::new(closed, None).is_ok());
    }

    #[test]
    fn two_point_closure_keeps_the_sampled_weight() {
        let s = random_metric_space(2, 9);
        assert!(s.dist(0, 1) >= 0.5 && s.dist(0, 1) < 2.0);
    }

    #[test]
    fn multimaps_are_nonempty_and_deterministic() {
        let a = random_multimap(9, 3, 11);
        let b = random_multimap(9, 3, 11);
        assert_eq!(a, b);
        for x in 0..9 {
            assert!(!a.target(x).members().is_empty());
            assert!(a.target(x).len() <= 3);
        }
    }

    #[test]
    fn max_image_one_forces_a_lifted_single_map() {
        let m = random_multimap(6, 1, 3);
        assert!(m.is_single_valued());
    }

    #[test]
    fn hub_spread_zero_is_the_constant_map() {
        let space = random_euclidean_space(6, 2, 4);
        let m = hub_map(&space, 2, 0, 99);
        for x in 0..6 {
            assert_eq!(m.target(x).members(), &[2]);
        }
        assert_eq!(m.fixed_points(), vec![2]);
        let cert = certify_banach(&space, &m, Parallelism::Serial).unwrap();
        assert_eq!(cert.tightest, Some(0.0));
        assert!(cert.certified);
    }

    #[test]
    fn hub_pool_is_the_nearest_points() {
        let space = line_space(5);
        let m = hub_map(&space, 0, 1, 17);
        for x in 0..5 {
            for p in m.target(x).iter() {
                assert!(p <= 1, "pool of hub 0 with spread 1 is {{0, 1}}");
            }
        }
    }

    #[test]
    fn config_build_is_deterministic() {
        let cfg = GenConfig {
            point_count: 7,
            flavor: SpaceFlavor::Euclidean { dim: 2 },
            map_flavor: MapFlavor::UniformRandom { max_image: 2 },
            seed: 123,
        };
        let (s1, m1) = cfg.build().unwrap();
        let (s2, m2) = cfg.build().unwrap();
        assert_eq!(s1, s2);
        assert_eq!(m1, m2);
    }

    #[test]
    fn cycle_flavor_wraps_every_point_into_the_cycle() {
        let cfg = GenConfig {
            point_count: 5,
            flavor: SpaceFlavor::Line,
            map_flavor: MapFlavor::Cycle { length: 3 },
            seed: 0,
        };
        let (_, map) = cfg.build().unwrap();
        match map {
            GeneratedMap::Single(s) => assert_eq!(s.targets(), &[1, 2, 0, 1, 2]),
            GeneratedMap::Multi(_) => panic!("cycle flavor is single-valued"),
        }
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let bad = GenConfig {
            point_count: 1,
            flavor: SpaceFlavor::Line,
            map_flavor: MapFlavor::SingleRandom,
            seed: 0,
        };
        assert!(matches!(bad.check(), Err(GenError::TooFewPoints(1))));

        let bad = GenConfig {
            point_count: 4,
            flavor: SpaceFlavor::Line,
            map_flavor: MapFlavor::Hub {
                hub_index: 4,
                spread: 0,
            },
            seed: 0,
        };
        assert!(matches!(bad.check(), Err(GenError::HubOutOfRange { .. })));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = GenConfig {
            point_count: 6,
            flavor: SpaceFlavor::Euclidean { dim: 3 },
            map_flavor: MapFlavor::Hub {
                hub_index: 1,
                spread: 2,
            },
            seed: 77,
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: GenConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }
}
