//! Brute-force ground truth and empirical validation of the
//! fixed-point and periodic-point statements.
//!
//! The oracles here re-derive fixed and periodic points without the
//! mapping module's set machinery (raw index scans and bitmask power
//! iteration), so agreement between the two routes is evidence rather
//! than tautology. A [`ValidationReport`] gates each statement on its
//! hypothesis, checks the conclusion with the oracles, and flags any
//! hypothesis-holding instance whose conclusion fails as a
//! counterexample bundle carrying the full instance payload.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{
    certify_banach, certify_chatterjea, certify_kannan, certify_orbital, certify_perimeter,
    certify_total_pairwise, certify_total_pairwise_multisets, condition_i, no_period2,
    Certificate, CertifyError, ChatterjeaDomain, MultisetCheck, Parallelism,
};
use crate::generate::{derive_seed, GenConfig};
use crate::instance::{Instance, InstanceFile, MapKind};
use crate::mapping::MultiMap;
use crate::scalar::Scalar;

/// Fixed points by direct membership scan over the raw target lists.
pub fn brute_fixed_points(map: &MultiMap) -> Vec<usize> {
    let mut fixed = Vec::new();
    for x in 0..map.point_count() {
        let mut member = false;
        for y in map.target(x).members() {
            if *y == x {
                member = true;
            }
        }
        if member {
            fixed.push(x);
        }
    }
    fixed
}

/// Prime-period points for every period up to `k_max`, by bitmask
/// power iteration. A point has prime period `k` when its first
/// return under iterated set images happens at step `k`.
///
/// Supports spaces of at most 64 points.
pub fn brute_periodic(map: &MultiMap, k_max: usize) -> BTreeMap<usize, Vec<usize>> {
    let n = map.point_count();
    assert!(n <= 64, "bitmask oracle supports at most 64 points");
    assert!(k_max >= 1 && k_max <= n, "period range is 1..=point_count");
    let target_mask: Vec<u64> = (0..n)
        .map(|x| {
            let mut m = 0u64;
            for y in map.target(x).members() {
                m |= 1 << *y;
            }
            m
        })
        .collect();
    let mut out: BTreeMap<usize, Vec<usize>> = (1..=k_max).map(|k| (k, Vec::new())).collect();
    for x in 0..n {
        let mut cur = target_mask[x];
        for k in 1..=k_max {
            if cur & (1 << x) != 0 {
                out.get_mut(&k).expect("preallocated").push(x);
                break;
            }
            let mut next = 0u64;
            let mut m = cur;
            while m != 0 {
                let y = m.trailing_zeros() as usize;
                next |= target_mask[y];
                m &= m - 1;
            }
            cur = next;
        }
    }
    out
}

/// Identifier of a catalogued statement. The tags are stable across
/// the JSON interface and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum TheoremId {
    /// Single-valued perimeter contraction with the no-immediate-return
    /// condition has at least one and at most two fixed points.
    #[serde(rename = "T2_4_two_fixed_points")]
    TwoFixedPoints,
    /// An n-point total-pairwise contraction has a periodic point of
    /// prime period below n.
    #[serde(rename = "T3_5_periodic_exists")]
    PeriodicExists { n: usize },
    /// Single-valued perimeter contraction: fixed point iff no point
    /// of prime period two.
    #[serde(rename = "C3_10_single_perimeter_iff")]
    SinglePerimeterIff,
    /// Multivalued perimeter contraction: fixed point iff no point of
    /// prime period two.
    #[serde(rename = "C3_11_multi_perimeter_iff")]
    MultiPerimeterIff,
    /// Orbital contraction without prime-period-two points has a
    /// fixed point.
    #[serde(rename = "T4_3_orbital_fixed")]
    OrbitalFixed,
    /// Kannan-style variant of the same statement.
    #[serde(rename = "T5_4_kannan_fixed")]
    KannanFixed,
    /// Chatterjea-style variant of the same statement.
    #[serde(rename = "T6_4_chatterjea_fixed")]
    ChatterjeaFixed,
    /// A single-valued Banach contraction has exactly one fixed point.
    #[serde(rename = "C_banach_unique")]
    BanachUnique,
    /// The n-point inequality over point multisets implies
    /// certification at every k below n, with no larger constant.
    #[serde(rename = "P3_3_downward")]
    Downward { n: usize },
    /// Certification at m implies certification at every n above m,
    /// up to the space size.
    #[serde(rename = "P3_4_upward")]
    Upward { m: usize },
}

impl TheoremId {
    pub fn id_str(&self) -> &'static str {
        match self {
            TheoremId::TwoFixedPoints => "T2_4_two_fixed_points",
            TheoremId::PeriodicExists { .. } => "T3_5_periodic_exists",
            TheoremId::SinglePerimeterIff => "C3_10_single_perimeter_iff",
            TheoremId::MultiPerimeterIff => "C3_11_multi_perimeter_iff",
            TheoremId::OrbitalFixed => "T4_3_orbital_fixed",
            TheoremId::KannanFixed => "T5_4_kannan_fixed",
            TheoremId::ChatterjeaFixed => "T6_4_chatterjea_fixed",
            TheoremId::BanachUnique => "C_banach_unique",
            TheoremId::Downward { .. } => "P3_3_downward",
            TheoremId::Upward { .. } => "P3_4_upward",
        }
    }

    /// Parses an id string plus optional arity parameters, applying
    /// the defaults n = 3 (periodic existence), n = 4 (downward),
    /// m = 2 (upward).
    pub fn from_parts(id: &str, n: Option<usize>, m: Option<usize>) -> Result<Self, String> {
        match id {
            "T2_4_two_fixed_points" => Ok(TheoremId::TwoFixedPoints),
            "T3_5_periodic_exists" => Ok(TheoremId::PeriodicExists { n: n.unwrap_or(3) }),
            "C3_10_single_perimeter_iff" => Ok(TheoremId::SinglePerimeterIff),
            "C3_11_multi_perimeter_iff" => Ok(TheoremId::MultiPerimeterIff),
            "T4_3_orbital_fixed" => Ok(TheoremId::OrbitalFixed),
            "T5_4_kannan_fixed" => Ok(TheoremId::KannanFixed),
            "T6_4_chatterjea_fixed" => Ok(TheoremId::ChatterjeaFixed),
            "C_banach_unique" => Ok(TheoremId::BanachUnique),
            "P3_3_downward" => Ok(TheoremId::Downward { n: n.unwrap_or(4) }),
            "P3_4_upward" => Ok(TheoremId::Upward { m: m.unwrap_or(2) }),
            other => Err(format!("unknown theorem id '{other}'")),
        }
    }

    /// Smallest space the statement's checkers accept.
    pub fn min_points(&self) -> usize {
        match self {
            TheoremId::TwoFixedPoints
            | TheoremId::SinglePerimeterIff
            | TheoremId::MultiPerimeterIff => 3,
            TheoremId::PeriodicExists { n } | TheoremId::Downward { n } => *n,
            TheoremId::Upward { m } => m + 1,
            _ => 2,
        }
    }

    /// Statements about single-valued maps only.
    pub fn requires_single_valued(&self) -> bool {
        matches!(
            self,
            TheoremId::TwoFixedPoints | TheoremId::SinglePerimeterIff | TheoremId::BanachUnique
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoremId::PeriodicExists { n } => write!(f, "{}(n={n})", self.id_str()),
            TheoremId::Downward { n } => write!(f, "{}(n={n})", self.id_str()),
            TheoremId::Upward { m } => write!(f, "{}(m={m})", self.id_str()),
            _ => f.write_str(self.id_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "validated")]
    Validated,
    #[serde(rename = "hypothesis_not_met")]
    HypothesisNotMet,
    #[serde(rename = "COUNTEREXAMPLE")]
    Counterexample,
}

/// Everything the verdict was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Evidence<T: Scalar> {
    pub certificates: Vec<Certificate<T>>,
    /// Fixed points found by the brute oracle.
    pub fixed_points: Vec<usize>,
    /// Prime-period points found by the brute oracle, per period.
    pub periodic_points: BTreeMap<usize, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_i: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_period2: Option<bool>,
    /// Multiset-domain total-pairwise check, when the statement's
    /// hypothesis is about degenerate tuples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiset_check: Option<MultisetCheck<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Instance payload, embedded when the verdict is a counterexample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ValidationReport<T: Scalar> {
    pub theorem: TheoremId,
    pub hypothesis_held: bool,
    pub conclusion_held: bool,
    pub verdict: Verdict,
    pub evidence: Evidence<T>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidateError {
    #[error("{theorem} needs at least {needed} points, instance has {actual}")]
    Cardinality {
        theorem: String,
        needed: usize,
        actual: usize,
    },
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("generator: {0}")]
    Generate(#[from] crate::generate::GenError),
}

fn compose_verdict(hypothesis: bool, conclusion: bool) -> Verdict {
    match (hypothesis, conclusion) {
        (false, _) => Verdict::HypothesisNotMet,
        (true, true) => Verdict::Validated,
        (true, false) => Verdict::Counterexample,
    }
}

/// Checks one statement on one instance: hypothesis through the
/// certification module, conclusion through the brute oracles.
pub fn validate<T: Scalar>(
    instance: &Instance<T>,
    theorem: TheoremId,
) -> Result<ValidationReport<T>, ValidateError> {
    let points = instance.space.point_count();
    let needed = theorem.min_points();
    if points < needed {
        return Err(ValidateError::Cardinality {
            theorem: theorem.to_string(),
            needed,
            actual: points,
        });
    }
    let space = &instance.space;
    let multi = instance.multi();
    let single = instance.map.as_single();
    let par = Parallelism::Serial;

    let mut certificates = Vec::new();
    let mut notes = Vec::new();
    let mut cond_i = None;
    let mut no_p2 = None;
    let mut multiset_check = None;

    let single_ok = single.is_some();
    if theorem.requires_single_valued() && !single_ok {
        notes.push("map is not single-valued".to_string());
    }

    let hypothesis = match theorem {
        TheoremId::TwoFixedPoints => {
            let cert = certify_perimeter(space, &multi, par)?;
            if cert.below_cardinality_bound {
                notes.push("space is at the three-point floor of the perimeter class".into());
            }
            let certified = cert.certified;
            certificates.push(cert);
            let ci = single.as_ref().map(condition_i);
            cond_i = ci;
            single_ok && certified && ci.unwrap_or(false)
        }
        TheoremId::PeriodicExists { n } => {
            let cert = certify_total_pairwise(space, &multi, n, par)?;
            let certified = cert.certified;
            certificates.push(cert);
            certified
        }
        TheoremId::SinglePerimeterIff | TheoremId::MultiPerimeterIff => {
            let cert = certify_perimeter(space, &multi, par)?;
            if cert.below_cardinality_bound {
                notes.push("space is at the three-point floor of the perimeter class".into());
            }
            let certified = cert.certified;
            certificates.push(cert);
            if theorem == TheoremId::SinglePerimeterIff {
                single_ok && certified
            } else {
                certified
            }
        }
        TheoremId::OrbitalFixed => {
            let cert = certify_orbital(space, &multi, par)?;
            let certified = cert.certified;
            certificates.push(cert);
            let np2 = no_period2(&multi);
            no_p2 = Some(np2);
            certified && np2
        }
        TheoremId::KannanFixed => {
            let cert = certify_kannan(space, &multi, par)?;
            let certified = cert.certified;
            certificates.push(cert);
            let np2 = no_period2(&multi);
            no_p2 = Some(np2);
            certified && np2
        }
        TheoremId::ChatterjeaFixed => {
            let cert = certify_chatterjea(space, &multi, ChatterjeaDomain::Restricted, par)?;
            let certified = cert.certified;
            certificates.push(cert);
            let np2 = no_period2(&multi);
            no_p2 = Some(np2);
            certified && np2
        }
        TheoremId::BanachUnique => {
            let cert = certify_banach(space, &multi, par)?;
            let certified = cert.certified;
            certificates.push(cert);
            single_ok && certified
        }
        TheoremId::Downward { n } => {
            // The downward transfer needs the inequality on degenerate
            // tuples; the distinct-subset constant alone does not
            // bound the smaller arities.
            let check = certify_total_pairwise_multisets(space, &multi, n, par)?;
            let certified = check.certified;
            multiset_check = Some(check);
            certificates.push(certify_total_pairwise(space, &multi, n, par)?);
            certified
        }
        TheoremId::Upward { m } => {
            let cert = certify_total_pairwise(space, &multi, m, par)?;
            let certified = cert.certified;
            certificates.push(cert);
            certified
        }
    };

    let fixed = brute_fixed_points(&multi);
    let period_scope = match theorem {
        TheoremId::PeriodicExists { n } => n - 1,
        _ => 2.min(points),
    };
    let periodic = brute_periodic(&multi, period_scope);

    let conclusion = match theorem {
        TheoremId::TwoFixedPoints => !fixed.is_empty() && fixed.len() <= 2,
        TheoremId::PeriodicExists { n } => {
            (1..n).any(|k| periodic.get(&k).is_some_and(|v| !v.is_empty()))
        }
        TheoremId::SinglePerimeterIff | TheoremId::MultiPerimeterIff => {
            let has_fixed = !fixed.is_empty();
            let p2_empty = periodic.get(&2).is_none_or(Vec::is_empty);
            has_fixed == p2_empty
        }
        TheoremId::OrbitalFixed | TheoremId::KannanFixed | TheoremId::ChatterjeaFixed => {
            !fixed.is_empty()
        }
        TheoremId::BanachUnique => fixed.len() == 1,
        TheoremId::Downward { n } => {
            // Conclusion is gated on the hypothesis; when the multiset
            // check failed there is no constant to transfer.
            let base = multiset_check.as_ref().and_then(|c| c.tightest.clone());
            let slack = T::default_unit_slack();
            let mut ok = true;
            for k in 2..n {
                let cert = certify_total_pairwise(space, &multi, k, par)?;
                let tight = cert.tightest.clone().expect("positive denominator");
                if let Some(base) = &base {
                    ok &= cert.certified && tight <= base.clone() + slack.clone();
                }
                certificates.push(cert);
            }
            ok
        }
        TheoremId::Upward { m } => {
            let mut ok = true;
            for n in (m + 1)..=points {
                let cert = certify_total_pairwise(space, &multi, n, par)?;
                ok &= cert.certified;
                certificates.push(cert);
            }
            ok
        }
    };

    let verdict = compose_verdict(hypothesis, conclusion);
    let instance_payload = (verdict == Verdict::Counterexample).then(|| instance.to_file());

    Ok(ValidationReport {
        theorem,
        hypothesis_held: hypothesis,
        conclusion_held: conclusion,
        verdict,
        evidence: Evidence {
            certificates,
            fixed_points: fixed,
            periodic_points: periodic,
            condition_i: cond_i,
            no_period2: no_p2,
            multiset_check,
            notes,
            instance: instance_payload,
        },
    })
}

/// Sweep summary: verdict counts plus every counterexample bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SweepOutcome<T: Scalar> {
    pub theorem: TheoremId,
    pub instances: u64,
    pub validated: u64,
    pub hypothesis_not_met: u64,
    pub counterexamples: u64,
    pub reports: Vec<ValidationReport<T>>,
}

/// Generates `instance_count` instances from the recipe (per-instance
/// seeds derived from `seed` and the index), validates each against
/// the statement, and tallies the verdicts. Deterministic for a given
/// seed regardless of the execution mode.
pub fn sweep(
    cfg: &GenConfig,
    theorem: TheoremId,
    instance_count: usize,
    seed: u64,
    par: Parallelism,
) -> Result<SweepOutcome<f64>, ValidateError> {
    assert!(instance_count >= 1, "sweeps need at least one instance");
    cfg.check()?;
    if cfg.point_count < theorem.min_points() {
        return Err(ValidateError::Cardinality {
            theorem: theorem.to_string(),
            needed: theorem.min_points(),
            actual: cfg.point_count,
        });
    }

    let run_one = |i: usize| -> Result<ValidationReport<f64>, ValidateError> {
        let cfg_i = cfg.with_seed(derive_seed(seed, i as u64));
        let (space, map) = cfg_i.build()?;
        let instance = Instance {
            space,
            map: MapKind::from(map),
            metadata: BTreeMap::new(),
        };
        let report = validate(&instance, theorem)?;
        if report.verdict == Verdict::Counterexample {
            confirm_counterexample(&report);
        }
        Ok(report)
    };

    let reports: Vec<ValidationReport<f64>> = match par {
        Parallelism::Serial => (0..instance_count)
            .map(run_one)
            .collect::<Result<_, _>>()?,
        Parallelism::Parallel => (0..instance_count)
            .into_par_iter()
            .map(run_one)
            .collect::<Result<_, _>>()?,
    };

    let mut outcome = SweepOutcome {
        theorem,
        instances: instance_count as u64,
        validated: 0,
        hypothesis_not_met: 0,
        counterexamples: 0,
        reports: Vec::new(),
    };
    for report in reports {
        match report.verdict {
            Verdict::Validated => outcome.validated += 1,
            Verdict::HypothesisNotMet => outcome.hypothesis_not_met += 1,
            Verdict::Counterexample => {
                outcome.counterexamples += 1;
                outcome.reports.push(report);
            }
        }
    }
    Ok(outcome)
}

/// A counterexample bundle must survive a JSON round trip and
/// re-validate to the same verdict before it is reported.
fn confirm_counterexample(report: &ValidationReport<f64>) {
    let json = serde_json::to_string(report).expect("reports serialize");
    let back: ValidationReport<f64> = serde_json::from_str(&json).expect("reports parse");
    assert_eq!(*report, back, "counterexample bundle must round-trip");
    let file = report
        .evidence
        .instance
        .as_ref()
        .expect("counterexamples embed their instance");
    let instance = file
        .validate_default()
        .expect("embedded instance re-validates");
    let again = validate(&instance, report.theorem).expect("re-validation runs");
    assert_eq!(
        again.verdict,
        Verdict::Counterexample,
        "counterexample must re-validate to the same verdict"
    );
}
