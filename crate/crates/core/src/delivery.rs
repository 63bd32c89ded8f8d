//! Delivery schedule construction.
//!
//! Rounds `k = 1..=K` outer, DP rows `i = 1..=K-t` inner, one transmission
//! vector per row with one term per DP column. Each term carries the part it
//! delivers, the subpart taken from the per-(file, part) counter, and the
//! zero-forcing set of users at which it is *not* nulled.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dp_matrices::{DpFamily, IndexMatrix};
use crate::error::{Error, Result};
use crate::placement::{PlacementMatrix, SchemeParams};

/// Requested file of every user; `files[k - 1] = W(k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Demand {
    files: Vec<usize>,
}

impl Demand {
    /// `W(k) = k`, the all-distinct worst case.
    pub fn identity(params: &SchemeParams) -> Self {
        Demand {
            files: (1..=params.users()).collect(),
        }
    }

    /// Checks that every user maps to a file in `1..=N`. Injectivity is
    /// enforced by [`build_schedule`].
    pub fn new(params: &SchemeParams, files: Vec<usize>) -> Result<Self> {
        if files.len() != params.users() {
            return Err(Error::InvalidDemand(format!(
                "expected {} requests, got {}",
                params.users(),
                files.len()
            )));
        }
        if let Some((k, &f)) = files
            .iter()
            .enumerate()
            .find(|(_, &f)| f == 0 || f > params.library())
        {
            return Err(Error::InvalidDemand(format!(
                "user {} requests file {f}, outside 1..={}",
                k + 1,
                params.library()
            )));
        }
        Ok(Demand { files })
    }

    /// `W(user)`, 1-based.
    pub fn file_of(&self, user: usize) -> usize {
        self.files[user - 1]
    }

    pub fn files(&self) -> &[usize] {
        &self.files
    }

    /// First pair of users sharing a file, if any.
    pub fn first_duplicate(&self) -> Option<(usize, usize, usize)> {
        let mut seen = BTreeMap::new();
        for (idx, &f) in self.files.iter().enumerate() {
            if let Some(&first) = seen.get(&f) {
                return Some((f, first, idx + 1));
            }
            seen.insert(f, idx + 1);
        }
        None
    }
}

/// Identifies the unit-power symbol carried by a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId {
    pub file: usize,
    pub part: usize,
    pub subpart: usize,
}

/// One beamformed piece of a transmission: `W(user)_{part}^{subpart} v_{zf_set}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionTerm {
    pub user: usize,
    pub file: usize,
    pub part: usize,
    pub subpart: usize,
    /// Ascending.
    pub zf_set: Vec<usize>,
}

impl TransmissionTerm {
    pub fn symbol(&self) -> SymbolId {
        SymbolId {
            file: self.file,
            part: self.part,
            subpart: self.subpart,
        }
    }

    pub fn reaches(&self, user: usize) -> bool {
        self.zf_set.binary_search(&user).is_ok()
    }
}

/// The superposition `x(s)` sent during interval `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionVector {
    pub s: usize,
    pub round: usize,
    pub row: usize,
    pub terms: Vec<TransmissionTerm>,
}

impl TransmissionVector {
    /// `T(s)` in term order.
    pub fn targeted_users(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.user).collect()
    }
}

/// Complete delivery: `K(K - t)` transmission vectors in transmission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub params: SchemeParams,
    pub demand: Demand,
    pub vectors: Vec<TransmissionVector>,
}

impl Schedule {
    pub fn term_count(&self) -> usize {
        self.vectors.iter().map(|v| v.terms.len()).sum()
    }

    /// Vector for interval `s` (1-based).
    pub fn interval(&self, s: usize) -> &TransmissionVector {
        &self.vectors[s - 1]
    }
}

/// Subpart counters `q(n, p)`, one per (file, part).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterTable {
    parts: usize,
    counts: Vec<usize>,
}

impl CounterTable {
    pub fn get(&self, file: usize, part: usize) -> usize {
        self.counts[(file - 1) * self.parts + (part - 1)]
    }

    fn bump(&mut self, file: usize, part: usize) {
        self.counts[(file - 1) * self.parts + (part - 1)] += 1;
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.iter().copied()
    }
}

/// `q(n, p) = 1` for every file and part.
pub fn init_counters(params: &SchemeParams) -> CounterTable {
    CounterTable {
        parts: params.users(),
        counts: vec![1; params.library() * params.users()],
    }
}

/// `{usr}` plus every user on row `row` of `C_k` that caches `prt`.
pub fn generate_zf_set(
    round: usize,
    row: usize,
    usr: usize,
    prt: usize,
    users: &IndexMatrix,
    placement: &PlacementMatrix,
) -> Result<Vec<usize>> {
    let mut set = vec![usr];
    for &node in users.row(row) {
        if placement.is_cached(prt, node) {
            set.push(node);
        }
    }
    set.sort_unstable();
    set.dedup();
    let expected = placement.gain() + 1;
    if set.len() != expected {
        return Err(Error::ZfSetSizeViolation {
            round,
            row,
            user: usr,
            part: prt,
            size: set.len(),
            expected,
        });
    }
    Ok(set)
}

/// Runs the delivery procedure for an injective demand.
pub fn build_schedule(
    params: &SchemeParams,
    placement: &PlacementMatrix,
    family: &DpFamily,
    demand: &Demand,
) -> Result<Schedule> {
    if placement.parts() != params.users() || placement.users() != params.users() || placement.gain() != params.gain() {
        return Err(Error::InvalidPlacement(format!(
            "delivery needs a {k}x{k} placement with t={t}, got {}x{} with t={}",
            placement.parts(),
            placement.users(),
            placement.gain(),
            k = params.users(),
            t = params.gain()
        )));
    }
    if family.params() != params {
        return Err(Error::InfeasibleParams(format!(
            "DP family built for {}, schedule requested for {params}",
            family.params()
        )));
    }
    if demand.files().len() != params.users() {
        return Err(Error::InvalidDemand(format!(
            "expected {} requests, got {}",
            params.users(),
            demand.files().len()
        )));
    }
    if let Some((file, first, second)) = demand.first_duplicate() {
        return Err(Error::DuplicateDemand { file, first, second });
    }

    let limit = params.served_per_interval();
    let mut counters = init_counters(params);
    let mut vectors = Vec::with_capacity(params.intervals());
    let mut s = 0;
    for pair in family.pairs() {
        for i in 1..=pair.users.rows() {
            s += 1;
            let mut terms = Vec::with_capacity(limit);
            for j in 1..=pair.users.cols() {
                let usr = pair.users.get(i, j);
                let prt = pair.parts.get(i, j);
                let file = demand.file_of(usr);
                let subpart = counters.get(file, prt);
                if subpart > limit {
                    return Err(Error::SubpartOverflow { file, part: prt, limit });
                }
                let zf_set = generate_zf_set(pair.round, i, usr, prt, &pair.users, placement)?;
                terms.push(TransmissionTerm {
                    user: usr,
                    file,
                    part: prt,
                    subpart,
                    zf_set,
                });
                counters.bump(file, prt);
            }
            vectors.push(TransmissionVector {
                s,
                round: pair.round,
                row: i,
                terms,
            });
        }
    }
    Ok(Schedule {
        params: *params,
        demand: demand.clone(),
        vectors,
    })
}

/// Placement, DP family and schedule for the identity demand.
pub fn identity_schedule(params: &SchemeParams) -> Result<(PlacementMatrix, Schedule)> {
    let placement = crate::placement::build_placement_matrix(params);
    let family = crate::dp_matrices::generate_family(params);
    let schedule = build_schedule(params, &placement, &family, &Demand::identity(params))?;
    Ok((placement, schedule))
}
