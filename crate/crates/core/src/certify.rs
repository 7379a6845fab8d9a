//! Exhaustive membership checks for the contraction classes.
//!
//! Each class is an inequality `LHS <= c * RHS` quantified over a
//! finite tuple domain. Certification computes the minimal admissible
//! constant exactly: the largest `LHS/RHS` over tuples with `RHS > 0`.
//! Tuples with `RHS = 0 < LHS` disqualify the map outright; tuples
//! with `RHS = LHS = 0` are skipped and counted. The certificate
//! carries the tightest constant, the witness tuple realizing it, and
//! the verdict against the class's admissible supremum.
//!
//! Enumeration order is lexicographic (sorted index tuples for the
//! symmetric classes, row-major ordered pairs for the orbital ones).
//! Ties on the maximal ratio resolve to the lexicographically smallest
//! witness, which makes the parallel reduction agree with the serial
//! scan bit for bit.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{MultiMap, SingleMap};
use crate::metric::{MetricSpace, PointSet};
use crate::scalar::{two, Scalar};

/// Contraction class identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ClassId {
    Banach,
    Perimeter,
    TotalPairwise(usize),
    Orbital,
    Kannan,
    Chatterjea,
}

impl ClassId {
    /// Supremum of the class's admissible constant range.
    pub fn admissible_sup<T: Scalar>(&self) -> T {
        match self {
            ClassId::Kannan => two::<T>() / (two::<T>() + T::one()),
            ClassId::Chatterjea => T::one() / two::<T>(),
            _ => T::one(),
        }
    }

    /// True when the admissible range excludes zero (an open lower
    /// end). A tightest of exactly zero still certifies: any constant
    /// inside the open interval works.
    pub fn strict_positive_lower(&self) -> bool {
        matches!(self, ClassId::Chatterjea)
    }

    /// Smallest space the checker accepts.
    pub fn min_points(&self) -> usize {
        match self {
            ClassId::Perimeter => 3,
            ClassId::TotalPairwise(n) => *n,
            _ => 2,
        }
    }

    pub const ALL_FIXED: [ClassId; 5] = [
        ClassId::Banach,
        ClassId::Perimeter,
        ClassId::Orbital,
        ClassId::Kannan,
        ClassId::Chatterjea,
    ];
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassId::Banach => write!(f, "banach"),
            ClassId::Perimeter => write!(f, "perimeter"),
            ClassId::TotalPairwise(n) => write!(f, "total_pairwise({n})"),
            ClassId::Orbital => write!(f, "orbital"),
            ClassId::Kannan => write!(f, "kannan"),
            ClassId::Chatterjea => write!(f, "chatterjea"),
        }
    }
}

impl FromStr for ClassId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "banach" => Ok(ClassId::Banach),
            "perimeter" => Ok(ClassId::Perimeter),
            "orbital" => Ok(ClassId::Orbital),
            "kannan" => Ok(ClassId::Kannan),
            "chatterjea" => Ok(ClassId::Chatterjea),
            other => {
                if other == "total_pairwise" {
                    return Err("total_pairwise needs an arity, e.g. total_pairwise(4)".into());
                }
                let inner = other
                    .strip_prefix("total_pairwise(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| format!("unknown class '{other}'"))?;
                let n: usize = inner
                    .parse()
                    .map_err(|_| format!("bad total_pairwise arity '{inner}'"))?;
                if n < 2 {
                    return Err("total_pairwise arity must be >= 2".into());
                }
                Ok(ClassId::TotalPairwise(n))
            }
        }
    }
}

impl TryFrom<String> for ClassId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ClassId> for String {
    fn from(c: ClassId) -> String {
        c.to_string()
    }
}

/// Which pairs the Chatterjea checker quantifies over. The restricted
/// domain mirrors the Kannan one (`x != y`, `x` and `y` outside `Tx`);
/// the unrestricted domain takes every ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChatterjeaDomain {
    #[default]
    Restricted,
    Unrestricted,
}

/// How to drive the tuple enumeration. Serial and parallel runs yield
/// identical certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Serial,
    Parallel,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("{class} needs at least {needed} points, space has {actual}")]
    SpaceTooSmall {
        class: ClassId,
        needed: usize,
        actual: usize,
    },
    #[error("map covers {map_points} points but the space has {space_points}")]
    PointCountMismatch {
        map_points: usize,
        space_points: usize,
    },
}

/// Outcome of a contraction-class check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub class: ClassId,
    /// Minimal admissible constant; absent when no tuple had a
    /// positive right-hand side (empty or all-zero domain) or when a
    /// tuple disqualified the map outright.
    pub tightest: Option<T>,
    pub admissible_sup: T,
    pub strict_positive_lower: bool,
    pub certified: bool,
    /// Tuple realizing the tightest ratio, or the first tuple with
    /// `RHS = 0 < LHS` when the map is disqualified.
    pub witness: Option<Vec<usize>>,
    pub tuples_examined: u64,
    pub skipped_zero_zero: u64,
    pub domain_empty: bool,
    /// Set when the space is smaller than the class's intended
    /// setting (perimeter checks on exactly three points).
    pub below_cardinality_bound: bool,
}

#[derive(Debug, Clone)]
struct ScanAcc<T> {
    examined: u64,
    skipped: u64,
    best: Option<(T, Vec<usize>)>,
    disqualifier: Option<Vec<usize>>,
}

impl<T: Scalar> ScanAcc<T> {
    fn empty() -> Self {
        ScanAcc {
            examined: 0,
            skipped: 0,
            best: None,
            disqualifier: None,
        }
    }

    fn observe(&mut self, tuple: &[usize], lhs: T, rhs: T) {
        self.examined += 1;
        if rhs == T::zero() {
            if lhs == T::zero() {
                self.skipped += 1;
            } else {
                take_smaller_witness(&mut self.disqualifier, tuple);
            }
            return;
        }
        let ratio = lhs / rhs;
        match &mut self.best {
            None => self.best = Some((ratio, tuple.to_vec())),
            Some((b, w)) => {
                if ratio > *b || (ratio == *b && tuple < w.as_slice()) {
                    *b = ratio;
                    *w = tuple.to_vec();
                }
            }
        }
    }

    fn merge(mut self, other: ScanAcc<T>) -> ScanAcc<T> {
        self.examined += other.examined;
        self.skipped += other.skipped;
        if let Some(d) = other.disqualifier {
            take_smaller_witness(&mut self.disqualifier, &d);
        }
        match (&mut self.best, other.best) {
            (_, None) => {}
            (best @ None, found) => *best = found,
            (Some((b, w)), Some((ob, ow))) => {
                if ob > *b || (ob == *b && ow < *w) {
                    *b = ob;
                    *w = ow;
                }
            }
        }
        self
    }
}

fn take_smaller_witness(slot: &mut Option<Vec<usize>>, tuple: &[usize]) {
    match slot {
        None => *slot = Some(tuple.to_vec()),
        Some(cur) => {
            if tuple < cur.as_slice() {
                *cur = tuple.to_vec();
            }
        }
    }
}

fn scan<T, F>(tuples: Vec<Vec<usize>>, eval: F, par: Parallelism) -> ScanAcc<T>
where
    T: Scalar,
    F: Fn(&[usize]) -> (T, T) + Sync,
{
    match par {
        Parallelism::Serial => {
            let mut acc = ScanAcc::empty();
            for tuple in &tuples {
                let (lhs, rhs) = eval(tuple);
                acc.observe(tuple, lhs, rhs);
            }
            acc
        }
        Parallelism::Parallel => tuples
            .par_iter()
            .fold(ScanAcc::empty, |mut acc, tuple| {
                let (lhs, rhs) = eval(tuple);
                acc.observe(tuple, lhs, rhs);
                acc
            })
            .reduce(ScanAcc::empty, ScanAcc::merge),
    }
}

/// Certification verdict with a one-sided guard band: a tightest
/// constant within `default_unit_slack` of the supremum is treated as
/// not certified. Image tuples that merely permute existing distances
/// have a true constant of exactly the supremum, but their float sums
/// can round a few ulps below it; the band keeps such verdicts stable.
/// Exact scalar types have a zero band and compare strictly.
fn reaches_sup<T: Scalar>(tightest: &T, sup: &T) -> bool {
    *tightest >= sup.clone() - T::default_unit_slack()
}

fn build_certificate<T: Scalar>(
    class: ClassId,
    acc: ScanAcc<T>,
    below_cardinality_bound: bool,
) -> Certificate<T> {
    let sup = class.admissible_sup::<T>();
    let domain_empty = acc.examined == 0;
    let disqualified = acc.disqualifier.is_some();
    let certified = if disqualified {
        false
    } else {
        match &acc.best {
            Some((t, _)) => !reaches_sup(t, &sup),
            None => true,
        }
    };
    let (tightest, witness) = if disqualified {
        (None, acc.disqualifier)
    } else {
        match acc.best {
            Some((t, w)) => (Some(t), Some(w)),
            None => (None, None),
        }
    };
    Certificate {
        class,
        tightest,
        admissible_sup: sup,
        strict_positive_lower: class.strict_positive_lower(),
        certified,
        witness,
        tuples_examined: acc.examined,
        skipped_zero_zero: acc.skipped,
        domain_empty,
        below_cardinality_bound,
    }
}

fn check_sizes<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    class: ClassId,
) -> Result<(), CertifyError> {
    if map.point_count() != space.point_count() {
        return Err(CertifyError::PointCountMismatch {
            map_points: map.point_count(),
            space_points: space.point_count(),
        });
    }
    let needed = class.min_points();
    if space.point_count() < needed {
        return Err(CertifyError::SpaceTooSmall {
            class,
            needed,
            actual: space.point_count(),
        });
    }
    Ok(())
}

/// Image of every point and of every image, computed once per run.
struct ImageCache {
    tx: Vec<PointSet>,
    t2x: Vec<PointSet>,
}

impl ImageCache {
    fn new(map: &MultiMap) -> Self {
        let tx: Vec<PointSet> = (0..map.point_count())
            .map(|x| map.target(x).clone())
            .collect();
        let t2x = tx.iter().map(|s| map.image(s)).collect();
        ImageCache { tx, t2x }
    }
}

/// `delta(Tx, Ty) <= c * d(x, y)` over unordered pairs of distinct
/// points; certified when the tightest constant is below 1.
pub fn certify_banach<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    par: Parallelism,
) -> Result<Certificate<T>, CertifyError> {
    check_sizes(space, map, ClassId::Banach)?;
    let cache = ImageCache::new(map);
    let tuples: Vec<Vec<usize>> = (0..space.point_count()).combinations(2).collect();
    let acc = scan(
        tuples,
        |t| {
            let (x, y) = (t[0], t[1]);
            let lhs = space.delta(&cache.tx[x], &cache.tx[y]);
            let rhs = space.dist(x, y);
            (lhs, rhs)
        },
        par,
    );
    Ok(build_certificate(ClassId::Banach, acc, false))
}

/// Triangle-perimeter contraction over unordered triples of distinct
/// points: the delta-perimeter of the image triple against the
/// perimeter of the original one.
pub fn certify_perimeter<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    par: Parallelism,
) -> Result<Certificate<T>, CertifyError> {
    check_sizes(space, map, ClassId::Perimeter)?;
    let cache = ImageCache::new(map);
    let tuples: Vec<Vec<usize>> = (0..space.point_count()).combinations(3).collect();
    let acc = scan(
        tuples,
        |t| {
            let (x, y, z) = (t[0], t[1], t[2]);
            // Terms in unordered-pair order, so the three-point
            // total-pairwise check reproduces this one bit for bit.
            let lhs = space.delta(&cache.tx[x], &cache.tx[y])
                + space.delta(&cache.tx[x], &cache.tx[z])
                + space.delta(&cache.tx[y], &cache.tx[z]);
            let rhs = space.dist(x, y) + space.dist(x, z) + space.dist(y, z);
            (lhs, rhs)
        },
        par,
    );
    // The intended setting has more than three points; a three-point
    // space still runs but the certificate says so.
    let below = space.point_count() == 3;
    Ok(build_certificate(ClassId::Perimeter, acc, below))
}

/// Total-pairwise-distance contraction over unordered `n`-subsets of
/// distinct points.
pub fn certify_total_pairwise<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    n: usize,
    par: Parallelism,
) -> Result<Certificate<T>, CertifyError> {
    assert!(n >= 2, "total pairwise contraction needs n >= 2");
    check_sizes(space, map, ClassId::TotalPairwise(n))?;
    let cache = ImageCache::new(map);
    let tuples: Vec<Vec<usize>> = (0..space.point_count()).combinations(n).collect();
    let acc = scan(
        tuples,
        |t| {
            let images: Vec<PointSet> = t.iter().map(|&x| cache.tx[x].clone()).collect();
            let lhs = space.total_pairwise(&images);
            let rhs = space.total_pairwise_points(t);
            (lhs, rhs)
        },
        par,
    );
    Ok(build_certificate(ClassId::TotalPairwise(n), acc, false))
}

/// Outcome of the total-pairwise check over point multisets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultisetCheck<T> {
    pub n: usize,
    pub tightest: Option<T>,
    pub certified: bool,
    pub witness: Option<Vec<usize>>,
    pub tuples_examined: u64,
    pub skipped_zero_zero: u64,
}

/// Total-pairwise check over `n`-multisets of points with at least two
/// distinct members (image sets repeat accordingly, so `delta(A, A)`
/// diameters enter the left-hand side).
///
/// This is the quantity whose boundedness transfers certification
/// downward: a constant valid on the degenerate tuples with exactly
/// `k` distinct points bounds the `k`-point check. The plain
/// [`certify_total_pairwise`] constant does not — a pair can expand
/// while every distinct 4-subset still contracts on average.
pub fn certify_total_pairwise_multisets<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    n: usize,
    par: Parallelism,
) -> Result<MultisetCheck<T>, CertifyError> {
    assert!(n >= 2, "total pairwise contraction needs n >= 2");
    check_sizes(space, map, ClassId::TotalPairwise(2))?;
    let cache = ImageCache::new(map);
    let tuples: Vec<Vec<usize>> = (0..space.point_count())
        .combinations_with_replacement(n)
        .filter(|t| t.iter().any(|&p| p != t[0]))
        .collect();
    let acc = scan(
        tuples,
        |t| {
            let images: Vec<PointSet> = t.iter().map(|&x| cache.tx[x].clone()).collect();
            let lhs = space.total_pairwise(&images);
            let rhs = space.total_pairwise_points(t);
            (lhs, rhs)
        },
        par,
    );
    let sup = T::one();
    let certified = match &acc.best {
        Some((t, _)) => acc.disqualifier.is_none() && !reaches_sup(t, &sup),
        None => acc.disqualifier.is_none(),
    };
    let (tightest, witness) = match acc.disqualifier {
        Some(w) => (None, Some(w)),
        None => match acc.best {
            Some((t, w)) => (Some(t), Some(w)),
            None => (None, None),
        },
    };
    Ok(MultisetCheck {
        n,
        tightest,
        certified,
        witness,
        tuples_examined: acc.examined,
        skipped_zero_zero: acc.skipped,
    })
}

fn orbital_lhs<T: Scalar>(space: &MetricSpace<T>, cache: &ImageCache, x: usize, y: usize) -> T {
    space.delta(&cache.tx[x], &cache.t2x[x])
        + space.delta(&cache.t2x[x], &cache.tx[y])
        + space.delta(&cache.tx[y], &cache.tx[x])
}

/// Orbital triangular contraction: ties the orbit segment
/// `x, Tx, T^2 x` to a second point `y`, over ordered pairs with
/// `x != y` and `y` outside `Tx`.
pub fn certify_orbital<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    par: Parallelism,
) -> Result<Certificate<T>, CertifyError> {
    check_sizes(space, map, ClassId::Orbital)?;
    let cache = ImageCache::new(map);
    let n = space.point_count();
    let mut tuples = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x != y && !cache.tx[x].contains(y) {
                tuples.push(vec![x, y]);
            }
        }
    }
    let acc = scan(
        tuples,
        |t| {
            let (x, y) = (t[0], t[1]);
            let lhs = orbital_lhs(space, &cache, x, y);
            let rhs = space.point_set_distance(x, &cache.tx[x])
                + space.point_set_distance(y, &cache.tx[x])
                + space.dist(x, y);
            (lhs, rhs)
        },
        par,
    );
    Ok(build_certificate(ClassId::Orbital, acc, false))
}

/// Kannan-style variant: the orbital left-hand side against orbit
/// displacements, over ordered pairs with `x != y` and both `x` and
/// `y` outside `Tx`. Admissible constants stay below 2/3.
pub fn certify_kannan<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    par: Parallelism,
) -> Result<Certificate<T>, CertifyError> {
    check_sizes(space, map, ClassId::Kannan)?;
    let cache = ImageCache::new(map);
    let n = space.point_count();
    let mut tuples = Vec::new();
    for x in 0..n {
        if cache.tx[x].contains(x) {
            continue;
        }
        for y in 0..n {
            if x != y && !cache.tx[x].contains(y) {
                tuples.push(vec![x, y]);
            }
        }
    }
    let acc = scan(
        tuples,
        |t| {
            let (x, y) = (t[0], t[1]);
            let lhs = orbital_lhs(space, &cache, x, y);
            let rhs = space.point_set_distance(x, &cache.tx[x])
                + space.point_set_distance(y, &cache.tx[y])
                + space.delta(&cache.tx[x], &cache.t2x[x]);
            (lhs, rhs)
        },
        par,
    );
    Ok(build_certificate(ClassId::Kannan, acc, false))
}

/// Chatterjea-style variant: the orbital left-hand side against cross
/// distances, with admissible constants below 1/2. The domain defaults
/// to the Kannan one; [`ChatterjeaDomain::Unrestricted`] quantifies
/// over every ordered pair instead.
pub fn certify_chatterjea<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    domain: ChatterjeaDomain,
    par: Parallelism,
) -> Result<Certificate<T>, CertifyError> {
    check_sizes(space, map, ClassId::Chatterjea)?;
    let cache = ImageCache::new(map);
    let n = space.point_count();
    let mut tuples = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let admit = match domain {
                ChatterjeaDomain::Restricted => {
                    x != y && !cache.tx[x].contains(x) && !cache.tx[x].contains(y)
                }
                ChatterjeaDomain::Unrestricted => true,
            };
            if admit {
                tuples.push(vec![x, y]);
            }
        }
    }
    let acc = scan(
        tuples,
        |t| {
            let (x, y) = (t[0], t[1]);
            let lhs = orbital_lhs(space, &cache, x, y);
            let rhs = space.point_set_distance(x, &cache.tx[y])
                + space.point_set_distance(y, &cache.tx[x])
                + space.point_set_distance(x, &cache.t2x[x])
                + space.point_set_distance(y, &cache.t2x[x])
                + space.delta(&cache.tx[x], &cache.tx[y]);
            (lhs, rhs)
        },
        par,
    );
    Ok(build_certificate(ClassId::Chatterjea, acc, false))
}

/// Dispatch by class id.
pub fn certify<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    class: ClassId,
    chatterjea_domain: ChatterjeaDomain,
    par: Parallelism,
) -> Result<Certificate<T>, CertifyError> {
    match class {
        ClassId::Banach => certify_banach(space, map, par),
        ClassId::Perimeter => certify_perimeter(space, map, par),
        ClassId::TotalPairwise(n) => certify_total_pairwise(space, map, n, par),
        ClassId::Orbital => certify_orbital(space, map, par),
        ClassId::Kannan => certify_kannan(space, map, par),
        ClassId::Chatterjea => certify_chatterjea(space, map, chatterjea_domain, par),
    }
}

/// True when the map has no point of prime period two.
pub fn no_period2(map: &MultiMap) -> bool {
    map.periodic_points(2).is_empty()
}

/// True when `T(T(x)) != x` for every `x` with `Tx != x`.
pub fn condition_i(map: &SingleMap) -> bool {
    (0..map.point_count()).all(|x| {
        let tx = map.apply(x);
        tx == x || map.apply(tx) != x
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::MultiMap;

    fn line(coords: &[f64]) -> MetricSpace<f64> {
        let n = coords.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| (coords[i] - coords[j]).abs()).collect())
            .collect();
        MetricSpace::new(dist, None).unwrap()
    }

    fn multi(targets: &[&[usize]]) -> MultiMap {
        MultiMap::from_members(targets.iter().map(|t| t.to_vec()).collect()).unwrap()
    }

    /// `0 -> {0}, 1 -> {0}, 2 -> {1}` on the line `0, 1, 2`.
    fn line_map() -> (MetricSpace<f64>, MultiMap) {
        (line(&[0.0, 1.0, 2.0]), multi(&[&[0], &[0], &[1]]))
    }

    #[test]
    fn banach_constant_map_certifies_at_zero() {
        let s = line(&[0.0, 1.0, 2.0]);
        let t = multi(&[&[1], &[1], &[1]]);
        let c = certify_banach(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(0.0));
        assert!(c.certified);
        assert_eq!(c.tuples_examined, 3);
    }

    #[test]
    fn banach_identity_is_not_certified() {
        let s = line(&[0.0, 1.0]);
        let t = SingleMap::new(vec![0, 1]).unwrap().lift();
        let c = certify_banach(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(1.0));
        assert!(!c.certified);
    }

    #[test]
    fn banach_line_map_fails_at_the_adjacent_pair() {
        let (s, t) = line_map();
        let c = certify_banach(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(1.0));
        assert_eq!(c.witness, Some(vec![1, 2]));
        assert!(!c.certified);
    }

    #[test]
    fn banach_needs_two_points() {
        let s = MetricSpace::new(vec![vec![0.0]], None).unwrap();
        let t = multi(&[&[0]]);
        let err = certify_banach(&s, &t, Parallelism::Serial).unwrap_err();
        assert!(matches!(err, CertifyError::SpaceTooSmall { .. }));
    }

    #[test]
    fn perimeter_constant_map_certifies() {
        let s = line(&[0.0, 1.0, 2.0, 4.0]);
        let t = multi(&[&[2], &[2], &[2], &[2]]);
        let c = certify_perimeter(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(0.0));
        assert!(c.certified);
        assert!(!c.below_cardinality_bound);
    }

    #[test]
    fn perimeter_line_map_certifies_at_one_half() {
        // Single triple (0,1,2): images give 0 + 1 + 1 over 1 + 1 + 2.
        let (s, t) = line_map();
        let c = certify_perimeter(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(0.5));
        assert!(c.certified);
        assert!(c.below_cardinality_bound);
        assert_eq!(c.tuples_examined, 1);
    }

    #[test]
    fn perimeter_permutation_preserves_the_triple() {
        let s = MetricSpace::new(
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
            None,
        )
        .unwrap();
        let t = multi(&[&[1], &[2], &[0]]);
        let c = certify_perimeter(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(1.0));
        assert!(!c.certified);
    }

    #[test]
    fn total_pairwise_reduces_to_banach_and_perimeter() {
        let (s, t) = line_map();
        let banach = certify_banach(&s, &t, Parallelism::Serial).unwrap();
        let tp2 = certify_total_pairwise(&s, &t, 2, Parallelism::Serial).unwrap();
        assert_eq!(banach.tightest, tp2.tightest);
        assert_eq!(banach.certified, tp2.certified);
        assert_eq!(banach.witness, tp2.witness);
        assert_eq!(banach.tuples_examined, tp2.tuples_examined);

        let perim = certify_perimeter(&s, &t, Parallelism::Serial).unwrap();
        let tp3 = certify_total_pairwise(&s, &t, 3, Parallelism::Serial).unwrap();
        assert_eq!(perim.tightest, tp3.tightest);
        assert_eq!(perim.certified, tp3.certified);
    }

    #[test]
    fn total_pairwise_space_too_small() {
        let (s, t) = line_map();
        let err = certify_total_pairwise(&s, &t, 5, Parallelism::Serial).unwrap_err();
        assert!(matches!(
            err,
            CertifyError::SpaceTooSmall {
                needed: 5,
                actual: 3,
                ..
            }
        ));
    }

    #[test]
    fn orbital_constant_map_certifies_at_zero() {
        let s = line(&[0.0, 1.0, 2.0]);
        let t = multi(&[&[1], &[1], &[1]]);
        let c = certify_orbital(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(0.0));
        assert!(c.certified);
    }

    #[test]
    fn orbital_two_cycle_has_empty_domain() {
        let s = line(&[0.0, 1.0]);
        let t = multi(&[&[1], &[0]]);
        let c = certify_orbital(&s, &t, Parallelism::Serial).unwrap();
        assert!(c.domain_empty);
        assert!(c.certified);
        assert_eq!(c.tightest, None);
        assert_eq!(c.witness, None);
    }

    /// Independent enumeration of the orbital ratios for the line map,
    /// kept free of the certifier's scan machinery.
    fn brute_orbital_line() -> (f64, Vec<(usize, usize, f64)>) {
        let (s, t) = line_map();
        let mut ratios = Vec::new();
        let mut best = 0.0_f64;
        for x in 0..3 {
            for y in 0..3 {
                if x == y || t.target(x).contains(y) {
                    continue;
                }
                let tx = t.target(x).clone();
                let t2x = t.image(&tx);
                let ty = t.target(y).clone();
                let lhs = s.delta(&tx, &t2x) + s.delta(&t2x, &ty) + s.delta(&ty, &tx);
                let rhs =
                    s.point_set_distance(x, &tx) + s.point_set_distance(y, &tx) + s.dist(x, y);
                let r = lhs / rhs;
                ratios.push((x, y, r));
                if r > best {
                    best = r;
                }
            }
        }
        (best, ratios)
    }

    #[test]
    fn orbital_line_map_matches_the_exhaustive_ratios() {
        let (s, t) = line_map();
        let (best, ratios) = brute_orbital_line();
        let c = certify_orbital(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(best));
        assert!(c.certified);
        assert!(best < 1.0);
        assert_eq!(c.tuples_examined as usize, ratios.len());
        // Hand enumeration: ratios 0, 1/2, 1/2, 1/2 with the smallest
        // maximizing pair being (0, 2).
        assert_eq!(best, 0.5);
        assert_eq!(c.witness, Some(vec![0, 2]));
        assert_eq!(c.tuples_examined, 4);
    }

    #[test]
    fn kannan_constant_map_certifies_at_zero() {
        let s = line(&[0.0, 1.0, 2.0]);
        let t = multi(&[&[1], &[1], &[1]]);
        let c = certify_kannan(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(0.0));
        assert!(c.certified);
        // x = 1 is the image point and y = 1 sits in every Tx, so the
        // admissible pairs are (0,2) and (2,0).
        assert_eq!(c.tuples_examined, 2);
    }

    #[test]
    fn kannan_identity_is_vacuously_certified() {
        let s = line(&[0.0, 1.0, 2.0]);
        let t = SingleMap::new(vec![0, 1, 2]).unwrap().lift();
        let c = certify_kannan(&s, &t, Parallelism::Serial).unwrap();
        assert!(c.domain_empty);
        assert!(c.certified);
        assert!(!t.fixed_points().is_empty());
    }

    #[test]
    fn kannan_two_cycle_is_vacuously_certified() {
        let s = line(&[0.0, 1.0]);
        let t = multi(&[&[1], &[0]]);
        let c = certify_kannan(&s, &t, Parallelism::Serial).unwrap();
        assert!(c.domain_empty);
        assert!(c.certified);
        // The period-2 hypothesis fails here, so the absence of a
        // fixed point contradicts nothing.
        assert!(!no_period2(&t));
    }

    #[test]
    fn kannan_line_map_hits_the_ratio_bound() {
        let (s, t) = line_map();
        let c = certify_kannan(&s, &t, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(1.0));
        assert!(!c.certified);
    }

    #[test]
    fn chatterjea_constant_map_certifies() {
        let s = line(&[0.0, 1.0, 2.0]);
        let t = multi(&[&[1], &[1], &[1]]);
        let c =
            certify_chatterjea(&s, &t, ChatterjeaDomain::Restricted, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(0.0));
        assert!(c.certified);
    }

    #[test]
    fn chatterjea_identity_is_vacuously_certified() {
        let s = line(&[0.0, 1.0, 2.0]);
        let t = SingleMap::new(vec![0, 1, 2]).unwrap().lift();
        let c =
            certify_chatterjea(&s, &t, ChatterjeaDomain::Restricted, Parallelism::Serial).unwrap();
        assert!(c.domain_empty);
        assert!(c.certified);
    }

    /// Independent enumeration for the Chatterjea line-map check.
    fn brute_chatterjea_line() -> (f64, usize) {
        let (s, t) = line_map();
        let mut best = 0.0_f64;
        let mut count = 0;
        for x in 0..3 {
            for y in 0..3 {
                if x == y || t.target(x).contains(x) || t.target(x).contains(y) {
                    continue;
                }
                let tx = t.target(x).clone();
                let t2x = t.image(&tx);
                let ty = t.target(y).clone();
                let lhs = s.delta(&tx, &t2x) + s.delta(&t2x, &ty) + s.delta(&ty, &tx);
                let rhs = s.point_set_distance(x, &ty)
                    + s.point_set_distance(y, &tx)
                    + s.point_set_distance(x, &t2x)
                    + s.point_set_distance(y, &t2x)
                    + s.delta(&tx, &ty);
                count += 1;
                let r = lhs / rhs;
                if r > best {
                    best = r;
                }
            }
        }
        (best, count)
    }

    #[test]
    fn chatterjea_line_map_matches_the_exhaustive_ratios() {
        let (s, t) = line_map();
        let (best, count) = brute_chatterjea_line();
        let c =
            certify_chatterjea(&s, &t, ChatterjeaDomain::Restricted, Parallelism::Serial).unwrap();
        assert_eq!(c.tightest, Some(best));
        assert_eq!(c.tuples_examined as usize, count);
        assert_eq!(c.certified, best < 0.5);
        // Hand enumeration: both admissible pairs give 2/6.
        assert_eq!(best, 2.0 / 6.0);
        assert!(c.certified);
        assert_eq!(c.witness, Some(vec![1, 2]));
    }

    #[test]
    fn chatterjea_unrestricted_identity_hits_one_half() {
        let s = line(&[0.0, 1.0, 2.0]);
        let t = SingleMap::new(vec![0, 1, 2]).unwrap().lift();
        let c = certify_chatterjea(&s, &t, ChatterjeaDomain::Unrestricted, Parallelism::Serial)
            .unwrap();
        // Pairs with x = y contribute 0/0 and are skipped; distinct
        // pairs give exactly 2d/4d = 1/2, outside the open interval.
        assert_eq!(c.tightest, Some(0.5));
        assert!(!c.certified);
        assert_eq!(c.skipped_zero_zero, 3);
    }

    #[test]
    fn no_period2_examples() {
        assert!(!no_period2(&multi(&[&[1], &[0]])));
        assert!(no_period2(&multi(&[&[1], &[1], &[1]])));
        assert!(no_period2(&SingleMap::new(vec![0, 1, 2]).unwrap().lift()));
    }

    #[test]
    fn condition_i_examples() {
        assert!(condition_i(&SingleMap::new(vec![0, 1, 2]).unwrap()));
        assert!(!condition_i(&SingleMap::new(vec![1, 0]).unwrap()));
        assert!(condition_i(&SingleMap::new(vec![1, 2, 2]).unwrap()));
    }

    #[test]
    fn parallel_scan_matches_serial() {
        let (s, t) = line_map();
        for class in [
            ClassId::Banach,
            ClassId::Perimeter,
            ClassId::TotalPairwise(2),
            ClassId::TotalPairwise(3),
            ClassId::Orbital,
            ClassId::Kannan,
            ClassId::Chatterjea,
        ] {
            let a = certify(&s, &t, class, ChatterjeaDomain::Restricted, Parallelism::Serial)
                .unwrap();
            let b = certify(
                &s,
                &t,
                class,
                ChatterjeaDomain::Restricted,
                Parallelism::Parallel,
            )
            .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn class_id_string_round_trip() {
        for class in [
            ClassId::Banach,
            ClassId::Perimeter,
            ClassId::TotalPairwise(4),
            ClassId::Orbital,
            ClassId::Kannan,
            ClassId::Chatterjea,
        ] {
            let s = class.to_string();
            assert_eq!(s.parse::<ClassId>().unwrap(), class);
        }
        assert!("total_pairwise".parse::<ClassId>().is_err());
        assert!("total_pairwise(1)".parse::<ClassId>().is_err());
    }

    #[test]
    fn certificate_json_round_trip() {
        let (s, t) = line_map();
        let c = certify_perimeter(&s, &t, Parallelism::Serial).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: Certificate<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);
    }
}
