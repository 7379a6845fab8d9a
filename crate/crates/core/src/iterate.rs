//! Multivalued Picard iteration and the error bounds that come with a
//! certified contraction constant.
//!
//! An orbit picks one member of the current image per step under a
//! [`SelectionPolicy`] and stops on self-membership (fixed point), on a
//! revisited state (cycle), or when the step budget runs out. With a
//! certified class constant the orbit carries an a priori tail bound
//! `rate^n * p / (1 - rate)` and a per-step rate law on the class's
//! chained quantity.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::ClassId;
use crate::mapping::MultiMap;
use crate::metric::{MetricSpace, PointSet};
use crate::scalar::{two, Scalar, Tolerance};

/// How the next orbit point is chosen from the current image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Smallest member index.
    FirstIndex,
    /// Member closest to the current point; ties to the smaller index.
    Nearest,
    /// Member farthest from the current point; ties to the smaller index.
    Farthest,
    /// Uniform choice from a seeded generator. Singleton images do not
    /// consume randomness, so single-valued maps iterate exactly like
    /// `FirstIndex`.
    SeededRandom { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    FixedPoint { point: usize },
    Cycle { start: usize, length: usize },
    StepLimit,
}

/// Record of one Picard run: the visited points, the step distances
/// `d(x_i, x_{i+1})`, and how the run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace<T> {
    pub points: Vec<usize>,
    pub step_dists: Vec<T>,
    pub outcome: Outcome,
    pub steps_taken: usize,
    pub policy: SelectionPolicy,
}

impl<T: Scalar> OrbitTrace<T> {
    /// Re-verifies the membership `x_{i+1} in T(x_i)` for every
    /// recorded step.
    pub fn verify_membership(&self, map: &MultiMap) -> bool {
        self.points
            .windows(2)
            .all(|w| map.target(w[0]).contains(w[1]))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IterateError<T: Scalar> {
    #[error("constant {constant} lies outside [0, {sup}) for {class}")]
    OutOfRange {
        class: ClassId,
        constant: T,
        sup: T,
    },
    #[error("trace has {actual} points but {class} needs {needed}")]
    TraceTooShort {
        class: ClassId,
        needed: usize,
        actual: usize,
    },
}

struct Selector {
    rng: Option<ChaCha8Rng>,
}

impl Selector {
    fn new(policy: &SelectionPolicy) -> Self {
        let rng = match policy {
            SelectionPolicy::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
            _ => None,
        };
        Selector { rng }
    }

    fn pick<T: Scalar>(
        &mut self,
        space: &MetricSpace<T>,
        policy: &SelectionPolicy,
        current: usize,
        image: &PointSet,
    ) -> usize {
        let members = image.members();
        if members.len() == 1 {
            return members[0];
        }
        match policy {
            SelectionPolicy::FirstIndex => members[0],
            SelectionPolicy::Nearest => {
                let mut best = members[0];
                let mut best_d = space.dist(current, best);
                for &m in &members[1..] {
                    let d = space.dist(current, m);
                    if d < best_d {
                        best = m;
                        best_d = d;
                    }
                }
                best
            }
            SelectionPolicy::Farthest => {
                let mut best = members[0];
                let mut best_d = space.dist(current, best);
                for &m in &members[1..] {
                    let d = space.dist(current, m);
                    if d > best_d {
                        best = m;
                        best_d = d;
                    }
                }
                best
            }
            SelectionPolicy::SeededRandom { .. } => {
                let rng = self.rng.as_mut().expect("seeded policy has a generator");
                members[rng.gen_range(0..members.len())]
            }
        }
    }

    /// Generator position; pairs with the current point to identify a
    /// repeated iteration state.
    fn state(&self) -> u128 {
        self.rng.as_ref().map_or(0, ChaCha8Rng::get_word_pos)
    }
}

/// Runs the orbit `x_{n+1} in T(x_n)` from `x0`.
///
/// Stops at the first `x_i` with `x_i in T(x_i)`, at the first repeat
/// of an iteration state (point plus generator position, so a repeat
/// really does continue identically), or after `max_steps` selections.
pub fn picard_iterate<T: Scalar>(
    space: &MetricSpace<T>,
    map: &MultiMap,
    x0: usize,
    policy: &SelectionPolicy,
    max_steps: usize,
) -> OrbitTrace<T> {
    assert!(x0 < space.point_count(), "start point out of range");
    assert!(max_steps >= 1, "need at least one step of budget");
    assert_eq!(
        map.point_count(),
        space.point_count(),
        "map and space disagree on the point count"
    );

    let mut selector = Selector::new(policy);
    let mut points = vec![x0];
    let mut step_dists = Vec::new();
    let mut seen: HashMap<(usize, u128), usize> = HashMap::new();
    seen.insert((x0, selector.state()), 0);

    let outcome = loop {
        let current = *points.last().expect("nonempty");
        if map.target(current).contains(current) {
            break Outcome::FixedPoint { point: current };
        }
        if step_dists.len() == max_steps {
            break Outcome::StepLimit;
        }
        let next = selector.pick(space, policy, current, map.target(current));
        step_dists.push(space.dist(current, next));
        points.push(next);
        let here = points.len() - 1;
        if let Some(start) = seen.insert((next, selector.state()), here) {
            break Outcome::Cycle {
                start,
                length: here - start,
            };
        }
    };

    let steps_taken = step_dists.len();
    OrbitTrace {
        points,
        step_dists,
        outcome,
        steps_taken,
        policy: *policy,
    }
}

fn admissible<T: Scalar>(class: ClassId, constant: &T) -> bool {
    *constant >= T::zero() && *constant < class.admissible_sup::<T>()
}

/// Geometric rate the orbit obeys once the class inequality holds with
/// the given constant: `b/(2-b)` for Kannan, `g/(1-g)` for Chatterjea,
/// the constant itself otherwise. Always below one on the admissible
/// range.
pub fn effective_rate<T: Scalar>(class: ClassId, constant: T) -> Result<T, IterateError<T>> {
    if !admissible(class, &constant) {
        return Err(IterateError::OutOfRange {
            class,
            sup: class.admissible_sup::<T>(),
            constant,
        });
    }
    Ok(match class {
        ClassId::Kannan => constant.clone() / (two::<T>() - constant),
        ClassId::Chatterjea => constant.clone() / (T::one() - constant),
        _ => constant,
    })
}

/// Rate the class inequality actually forces on its chained quantity
/// per in-domain link. Equals [`effective_rate`] except for the Kannan
/// class: there the admissible-orbit algebra only yields `c / (2-2c)`,
/// and orbits of certified maps do overrun the nominal `c / (2-c)`.
/// Still below one across the admissible range.
pub fn chain_rate<T: Scalar>(class: ClassId, constant: T) -> Result<T, IterateError<T>> {
    if !admissible(class, &constant) {
        return Err(IterateError::OutOfRange {
            class,
            sup: class.admissible_sup::<T>(),
            constant,
        });
    }
    Ok(match class {
        ClassId::Kannan => constant.clone() / (two::<T>() - two::<T>() * constant),
        _ => effective_rate(class, constant)?,
    })
}

/// Head quantity `p` of the a priori bound, read off the trace prefix:
/// the first step for Banach/Kannan, the first orbit triangle for the
/// orbital and Chatterjea classes, and the total pairwise distance of
/// the first `n` points for the n-point classes (perimeter is the
/// three-point case).
pub fn initial_quantity_p<T: Scalar>(
    class: ClassId,
    space: &MetricSpace<T>,
    trace: &OrbitTrace<T>,
) -> Result<T, IterateError<T>> {
    let needed = match class {
        ClassId::Banach | ClassId::Kannan => 2,
        ClassId::Orbital | ClassId::Chatterjea | ClassId::Perimeter => 3,
        ClassId::TotalPairwise(n) => n,
    };
    if trace.points.len() < needed {
        return Err(IterateError::TraceTooShort {
            class,
            needed,
            actual: trace.points.len(),
        });
    }
    let pts = &trace.points;
    Ok(match class {
        ClassId::Banach | ClassId::Kannan => space.dist(pts[0], pts[1]),
        ClassId::Orbital | ClassId::Chatterjea | ClassId::Perimeter => {
            space.perimeter(pts[0], pts[1], pts[2])
        }
        ClassId::TotalPairwise(n) => space.total_pairwise_points(&pts[..n]),
    })
}

fn pow_usize<T: Scalar>(base: &T, n: usize) -> T {
    let mut acc = T::one();
    for _ in 0..n {
        acc = acc * base.clone();
    }
    acc
}

/// Tail estimate `rate^n * p / (1 - rate)`; for any trace whose step
/// distances obey `d_k <= rate^k * p` this bounds `d(x_m, x_n)` for
/// every `m > n`.
pub fn a_priori_bound<T: Scalar>(rate: &T, p: &T, n: usize) -> T {
    assert!(
        *rate >= T::zero() && *rate < T::one(),
        "rate must lie in [0, 1)"
    );
    pow_usize(rate, n) * p.clone() / (T::one() - rate.clone())
}

/// Smallest `n` with `a_priori_bound(rate, p, n) <= eps`; zero when
/// the head bound already satisfies it.
pub fn required_steps<T: Scalar>(rate: &T, p: &T, eps: &T) -> usize {
    assert!(
        *rate >= T::zero() && *rate < T::one(),
        "rate must lie in [0, 1)"
    );
    assert!(*p > T::zero(), "p must be positive");
    assert!(*eps > T::zero(), "eps must be positive");
    let head = p.clone() / (T::one() - rate.clone());
    let mut n = 0;
    let mut pow = T::one();
    // Mirrors a_priori_bound exactly: bound(n) = pow * p / (1 - rate).
    while pow.clone() * head.clone() > *eps {
        if *rate == T::zero() {
            return n + 1;
        }
        pow = pow * rate.clone();
        n += 1;
    }
    n
}

/// One link of the per-class rate law along a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateLawCheck<T> {
    /// Index `i` of the chained quantity the link compares against.
    pub index: usize,
    pub current: T,
    pub next: T,
    /// Whether the tuple feeding the link lies in the class domain;
    /// out-of-domain links carry no claim.
    pub in_domain: bool,
}

impl<T: Scalar> RateLawCheck<T> {
    pub fn holds(&self, rate: &T, tol: &Tolerance<T>) -> bool {
        !self.in_domain || tol.leq(&self.next, &(rate.clone() * self.current.clone()))
    }
}

/// Chained quantity `Q_i` whose geometric decay the class inequality
/// drives: the step distance for Banach and Kannan, the consecutive
/// orbit-triangle perimeter for the orbital/Chatterjea/perimeter
/// classes, and the total pairwise distance of a sliding window of
/// `n` consecutive points for the n-point class.
fn chained_quantity<T: Scalar>(
    class: ClassId,
    space: &MetricSpace<T>,
    pts: &[usize],
    i: usize,
) -> Option<T> {
    match class {
        ClassId::Banach | ClassId::Kannan => {
            (i + 1 < pts.len()).then(|| space.dist(pts[i], pts[i + 1]))
        }
        ClassId::Orbital | ClassId::Chatterjea | ClassId::Perimeter => {
            (i + 2 < pts.len()).then(|| space.perimeter(pts[i], pts[i + 1], pts[i + 2]))
        }
        ClassId::TotalPairwise(n) => {
            (i + n <= pts.len()).then(|| space.total_pairwise_points(&pts[i..i + n]))
        }
    }
}

fn link_in_domain(class: ClassId, map: &MultiMap, pts: &[usize], i: usize) -> bool {
    let distinct = |w: &[usize]| {
        w.iter()
            .enumerate()
            .all(|(a, &p)| w[..a].iter().all(|&q| q != p))
    };
    match class {
        ClassId::Banach => pts[i] != pts[i + 1],
        ClassId::Perimeter => distinct(&pts[i..i + 3]),
        ClassId::TotalPairwise(n) => distinct(&pts[i..i + n]),
        ClassId::Orbital => {
            let (x, y) = (pts[i], pts[i + 2]);
            x != y && !map.target(x).contains(y)
        }
        ClassId::Kannan | ClassId::Chatterjea => {
            let (x, y) = (pts[i], pts[i + 2]);
            x != y && !map.target(x).contains(x) && !map.target(x).contains(y)
        }
    }
}

/// All adjacent links `Q_{i+1}` vs `Q_i` of the class's chained
/// quantity along the trace, with the domain gate evaluated at `i`.
pub fn rate_law_checks<T: Scalar>(
    class: ClassId,
    space: &MetricSpace<T>,
    map: &MultiMap,
    trace: &OrbitTrace<T>,
) -> Vec<RateLawCheck<T>> {
    let pts = &trace.points;
    let mut out = Vec::new();
    let mut i = 0;
    while let (Some(current), Some(next)) = (
        chained_quantity(class, space, pts, i),
        chained_quantity(class, space, pts, i + 1),
    ) {
        // The orbital-style gates look two points ahead of i.
        let gate_ok = match class {
            ClassId::Orbital | ClassId::Kannan | ClassId::Chatterjea => {
                i + 2 < pts.len() && link_in_domain(class, map, pts, i)
            }
            _ => link_in_domain(class, map, pts, i),
        };
        out.push(RateLawCheck {
            index: i,
            current,
            next,
            in_domain: gate_ok,
        });
        i += 1;
    }
    out
}

/// For a fixed-point trace, the distances `d(x_n, x*)` paired with the
/// a priori bound at `n`. Empty for other outcomes.
pub fn bound_domination<T: Scalar>(
    space: &MetricSpace<T>,
    trace: &OrbitTrace<T>,
    rate: &T,
    p: &T,
) -> Vec<(usize, T, T)> {
    let terminal = match trace.outcome {
        Outcome::FixedPoint { point } => point,
        _ => return Vec::new(),
    };
    trace
        .points
        .iter()
        .enumerate()
        .map(|(n, &x)| (n, space.dist(x, terminal), a_priori_bound(rate, p, n)))
        .collect()
}
