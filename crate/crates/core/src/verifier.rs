//! Symbolic verification of a delivery schedule.
//!
//! All checks work on index sets only. A user `u` targeted in interval `s`
//! sees a term either because `u` belongs to the term's zero-forcing set, or
//! not at all (the beamformer nulls it at `T(s) \ R`). Every term that
//! reaches `u` and is not `u`'s own must be removable from `u`'s cache.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::delivery::{build_schedule, Demand, Schedule, TransmissionTerm, TransmissionVector};
use crate::dp_matrices::{circular_increment, generate_family};
use crate::error::Result;
use crate::placement::{build_placement_matrix, PlacementMatrix, SchemeParams};

const MAX_COUNTEREXAMPLES: usize = 32;

/// Where a check failed. `interval` and `term` are 1-based and absent when
/// the failure is a missing delivery rather than a faulty term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub interval: Option<usize>,
    pub term: Option<usize>,
    pub user: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed: true,
            counterexamples: Vec::new(),
        }
    }

    fn fail(&mut self, interval: Option<usize>, term: Option<usize>, user: usize, detail: String) {
        self.passed = false;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(Counterexample {
                interval,
                term,
                user,
                detail,
            });
        }
    }

    /// First counterexample in schedule order.
    pub fn first(&self) -> Option<&Counterexample> {
        self.counterexamples.first()
    }
}

/// How often a missing `(user, part)` pair is delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartAppearance {
    pub user: usize,
    pub part: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: SchemeParams,
    pub checks: Vec<CheckOutcome>,
    pub dof_per_interval: Vec<usize>,
    pub per_part_appearance_counts: Vec<PartAppearance>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let _ = writeln!(out, "scheme {p}");
        let _ = writeln!(
            out,
            "intervals: {}  DoF per interval: {}  subpacketization: {}",
            self.dof_per_interval.len(),
            dof_summary(&self.dof_per_interval),
            p.subpacketization()
        );
        for c in &self.checks {
            let _ = write!(out, "  [{}] {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            if let Some(cx) = c.first() {
                let _ = write!(out, " -- {}", describe(cx));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

fn dof_summary(dof: &[usize]) -> String {
    match (dof.iter().min(), dof.iter().max()) {
        (Some(lo), Some(hi)) if lo == hi => lo.to_string(),
        (Some(lo), Some(hi)) => format!("{lo}..{hi}"),
        _ => "-".into(),
    }
}

fn describe(cx: &Counterexample) -> String {
    let mut s = String::new();
    if let Some(i) = cx.interval {
        let _ = write!(s, "interval {i}, ");
    }
    if let Some(j) = cx.term {
        let _ = write!(s, "term {j}, ");
    }
    let _ = write!(s, "user {}: {}", cx.user, cx.detail);
    s
}

/// Served-user count of every interval plus the DoF verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofCheck {
    pub per_interval: Vec<usize>,
    pub outcome: CheckOutcome,
}

/// Each interval must serve `t + L` distinct users.
pub fn check_dof(schedule: &Schedule) -> DofCheck {
    let want = schedule.params.served_per_interval();
    let mut outcome = CheckOutcome::new("dof");
    let mut per_interval = Vec::with_capacity(schedule.vectors.len());
    for v in &schedule.vectors {
        let mut seen = BTreeSet::new();
        for (j, term) in v.terms.iter().enumerate() {
            if !seen.insert(term.user) {
                outcome.fail(Some(v.s), Some(j + 1), term.user, "user targeted twice in one interval".into());
            }
        }
        per_interval.push(seen.len());
        if seen.len() != want {
            let user = v.terms.first().map_or(0, |t| t.user);
            outcome.fail(
                Some(v.s),
                None,
                user,
                format!("{} distinct users served, expected {want}", seen.len()),
            );
        }
    }
    DofCheck { per_interval, outcome }
}

fn term_structure_fault(term: &TransmissionTerm, targeted: &BTreeSet<usize>, gain: usize, placement: &PlacementMatrix) -> Option<String> {
    if !term.reaches(term.user) {
        return Some(format!("intended user missing from zero-forcing set {:?}", term.zf_set));
    }
    if term.zf_set.len() != gain + 1 {
        return Some(format!("zero-forcing set {:?} has {} members, expected {}", term.zf_set, term.zf_set.len(), gain + 1));
    }
    if let Some(x) = term.zf_set.iter().find(|u| !targeted.contains(u)) {
        return Some(format!("zero-forcing set {:?} contains untargeted user {x}", term.zf_set));
    }
    if placement.is_cached(term.part, term.user) {
        return Some(format!("part {} is already cached by its intended user", term.part));
    }
    None
}

/// Symbolic decodability: every served user can strip all foreign terms that
/// reach it using its cache, and receives its own term unnulled.
pub fn check_decodability(schedule: &Schedule, placement: &PlacementMatrix) -> CheckOutcome {
    let gain = schedule.params.gain();
    let mut outcome = CheckOutcome::new("decodability");
    for v in &schedule.vectors {
        let targeted: BTreeSet<usize> = v.terms.iter().map(|t| t.user).collect();
        let mut own_count: BTreeMap<usize, usize> = BTreeMap::new();
        for (j, term) in v.terms.iter().enumerate() {
            *own_count.entry(term.user).or_default() += 1;
            if let Some(fault) = term_structure_fault(term, &targeted, gain, placement) {
                outcome.fail(Some(v.s), Some(j + 1), term.user, fault);
            }
            for &u in &targeted {
                if u != term.user && term.reaches(u) && !placement.is_cached(term.part, u) {
                    outcome.fail(
                        Some(v.s),
                        Some(j + 1),
                        u,
                        format!(
                            "interference from part {} of file {} is neither nulled nor cached",
                            term.part, term.file
                        ),
                    );
                }
            }
        }
        for (&u, &n) in &own_count {
            if n != 1 {
                outcome.fail(Some(v.s), None, u, format!("{n} terms intended for the same user"));
            }
        }
    }
    outcome
}

/// Indices (0-based) of the terms a served user still sees after removing
/// cached terms and terms the beamformers null at it. `None` when some term's
/// beamformer cannot exist (its set is not a `(t+1)`-subset of `T(s)`).
pub fn residual_terms(vector: &TransmissionVector, placement: &PlacementMatrix, gain: usize, user: usize) -> Option<Vec<usize>> {
    let targeted: BTreeSet<usize> = vector.terms.iter().map(|t| t.user).collect();
    let feasible = vector
        .terms
        .iter()
        .all(|t| t.zf_set.len() == gain + 1 && t.zf_set.iter().all(|u| targeted.contains(u)));
    if !feasible {
        return None;
    }
    Some(
        vector
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.reaches(user))
            .filter(|(_, t)| !placement.is_cached(t.part, user))
            .map(|(j, _)| j)
            .collect(),
    )
}

/// Decodability stated as "after cancellation and nulling exactly the user's
/// own term remains", for cross-checking [`check_decodability`].
pub fn decodable_by_residual(schedule: &Schedule, placement: &PlacementMatrix) -> bool {
    let gain = schedule.params.gain();
    schedule.vectors.iter().all(|v| {
        v.terms.iter().all(|own| match residual_terms(v, placement, gain, own.user) {
            Some(rest) => rest.len() == 1 && std::ptr::eq(&v.terms[rest[0]], own),
            None => false,
        })
    })
}

/// Coverage verdict and per-(user, part) delivery counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageCheck {
    pub outcome: CheckOutcome,
    pub counts: BTreeMap<(usize, usize), usize>,
}

/// Every `(user, part, subpart)` with `V[part, user] = 0` must be delivered
/// exactly once, with the user's demanded file. Within round `k` each user not
/// caching part `k` must receive part `k` exactly `L` times.
pub fn check_coverage(schedule: &Schedule, placement: &PlacementMatrix) -> CoverageCheck {
    let params = &schedule.params;
    let k_users = params.users();
    let subparts = params.served_per_interval();
    let mut outcome = CheckOutcome::new("coverage");
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for u in 1..=k_users {
        for p in 1..=placement.parts() {
            if !placement.is_cached(p, u) {
                counts.insert((u, p), 0);
            }
        }
    }

    let mut delivered: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for v in &schedule.vectors {
        for (j, term) in v.terms.iter().enumerate() {
            let loc = (Some(v.s), Some(j + 1), term.user);
            if term.user == 0 || term.user > k_users {
                outcome.fail(loc.0, loc.1, loc.2, "user index out of range".into());
                continue;
            }
            if term.file != schedule.demand.file_of(term.user) {
                outcome.fail(
                    loc.0,
                    loc.1,
                    loc.2,
                    format!("carries file {}, user demanded {}", term.file, schedule.demand.file_of(term.user)),
                );
            }
            match counts.get_mut(&(term.user, term.part)) {
                None => outcome.fail(
                    loc.0,
                    loc.1,
                    loc.2,
                    format!("part {} is cached or out of range; nothing to deliver", term.part),
                ),
                Some(c) => {
                    *c += 1;
                    if term.subpart == 0 || term.subpart > subparts {
                        outcome.fail(loc.0, loc.1, loc.2, format!("subpart {} outside 1..={subparts}", term.subpart));
                    } else if !delivered.insert((term.user, term.part, term.subpart)) {
                        outcome.fail(
                            loc.0,
                            loc.1,
                            loc.2,
                            format!("part {} subpart {} delivered twice", term.part, term.subpart),
                        );
                    }
                }
            }
        }
    }
    for (&(u, p), &c) in &counts {
        if c != subparts {
            outcome.fail(None, None, u, format!("part {p} delivered {c} times, expected {subparts}"));
        } else {
            for q in 1..=subparts {
                if !delivered.contains(&(u, p, q)) {
                    outcome.fail(None, None, u, format!("part {p} subpart {q} never delivered"));
                }
            }
        }
    }

    // per-round tallies
    let mut round_tally: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for v in &schedule.vectors {
        for t in v.terms.iter().filter(|t| t.part == v.round) {
            *round_tally.entry((v.round, t.user)).or_default() += 1;
        }
    }
    let rounds: BTreeSet<usize> = schedule.vectors.iter().map(|v| v.round).collect();
    for &r in &rounds {
        for u in 1..=k_users {
            if placement.is_cached(r, u) {
                continue;
            }
            let c = round_tally.get(&(r, u)).copied().unwrap_or(0);
            if c != params.antennas() {
                outcome.fail(
                    None,
                    None,
                    u,
                    format!("round {r}: own-round part received {c} times, expected L={}", params.antennas()),
                );
            }
        }
    }

    CoverageCheck { outcome, counts }
}

/// Vector count, interval numbering and term count per vector.
pub fn check_structure(schedule: &Schedule) -> CheckOutcome {
    let params = &schedule.params;
    let mut outcome = CheckOutcome::new("structure");
    if schedule.vectors.len() != params.intervals() {
        outcome.fail(
            None,
            None,
            0,
            format!("{} transmission vectors, expected K(K-t)={}", schedule.vectors.len(), params.intervals()),
        );
    }
    for (idx, v) in schedule.vectors.iter().enumerate() {
        if v.s != idx + 1 {
            outcome.fail(Some(idx + 1), None, 0, format!("interval labelled {}", v.s));
        }
        if v.terms.len() != params.served_per_interval() {
            outcome.fail(
                Some(v.s),
                None,
                v.terms.first().map_or(0, |t| t.user),
                format!("{} terms, expected t+L={}", v.terms.len(), params.served_per_interval()),
            );
        }
    }
    outcome
}

/// Interval `s + (K - t)` must be interval `s` with users, parts and
/// zero-forcing sets circularly incremented.
pub fn check_diagonal_shift(schedule: &Schedule) -> CheckOutcome {
    let params = &schedule.params;
    let k = params.users();
    let stride = k - params.gain();
    let mut outcome = CheckOutcome::new("diagonal_shift");
    let inc = |a: usize| circular_increment(a, k).ok();
    for (a, b) in schedule.vectors.iter().zip(schedule.vectors.iter().skip(stride)) {
        if a.terms.len() != b.terms.len() {
            outcome.fail(Some(b.s), None, 0, format!("term count differs from interval {}", a.s));
            continue;
        }
        for (j, (x, y)) in a.terms.iter().zip(&b.terms).enumerate() {
            let user = inc(x.user);
            let part = inc(x.part);
            let mut zf: Option<Vec<usize>> = x.zf_set.iter().map(|&u| inc(u)).collect();
            if let Some(z) = zf.as_mut() {
                z.sort_unstable();
            }
            let ok = user == Some(y.user)
                && part == Some(y.part)
                && zf.as_ref() == Some(&y.zf_set)
                && y.user >= 1
                && y.user <= k
                && y.file == schedule.demand.file_of(y.user);
            if !ok {
                outcome.fail(
                    Some(b.s),
                    Some(j + 1),
                    y.user,
                    format!("not the diagonal shift of interval {} term {}", a.s, j + 1),
                );
            }
        }
    }
    outcome
}

/// Runs every check on an existing schedule.
pub fn verify_schedule(schedule: &Schedule, placement: &PlacementMatrix) -> VerificationReport {
    let structure = check_structure(schedule);
    let dof = check_dof(schedule);
    let decodability = check_decodability(schedule, placement);
    let coverage = check_coverage(schedule, placement);
    let shift = check_diagonal_shift(schedule);
    let per_part_appearance_counts = coverage
        .counts
        .iter()
        .map(|(&(user, part), &count)| PartAppearance { user, part, count })
        .collect();
    VerificationReport {
        params: schedule.params,
        checks: vec![structure, dof.outcome, decodability, coverage.outcome, shift],
        dof_per_interval: dof.per_interval,
        per_part_appearance_counts,
    }
}

/// Builds placement, DP family and schedule for `(params, demand)` and verifies them.
pub fn verify_all(params: &SchemeParams, demand: &Demand) -> Result<VerificationReport> {
    let placement = build_placement_matrix(params);
    let family = generate_family(params);
    let schedule = build_schedule(params, &placement, &family, demand)?;
    Ok(verify_schedule(&schedule, &placement))
}
