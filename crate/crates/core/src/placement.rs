//! Scheme parameters, the circulant placement matrix and per-user cache contents.
//!
//! Every index exposed here is 1-based: users `1..=K`, parts `1..=K`,
//! subparts `1..=t+L`, files `1..=N`.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated `(K, L, t, N)` tuple.
///
/// Construction enforces `1 <= t <= L`, `t + L <= K` and `N >= K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SchemeParams {
    users: usize,
    antennas: usize,
    gain: usize,
    library: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "K")]
    users: usize,
    #[serde(rename = "L")]
    antennas: usize,
    #[serde(rename = "t")]
    gain: usize,
    #[serde(rename = "N")]
    library: usize,
}

impl TryFrom<RawParams> for SchemeParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        validate_params(raw.users, raw.antennas, raw.gain, raw.library)
    }
}

impl From<SchemeParams> for RawParams {
    fn from(p: SchemeParams) -> Self {
        RawParams {
            users: p.users,
            antennas: p.antennas,
            gain: p.gain,
            library: p.library,
        }
    }
}

/// Checks the feasibility conditions of the scheme and returns the validated tuple.
///
/// Arguments follow the order `(K, L, t, N)`.
pub fn validate_params(users: usize, antennas: usize, gain: usize, library: usize) -> Result<SchemeParams> {
    if users == 0 || antennas == 0 || library == 0 {
        return Err(Error::InfeasibleParams(format!(
            "K, L and N must be positive (got K={users}, L={antennas}, N={library})"
        )));
    }
    if gain < 1 {
        return Err(Error::InfeasibleParams("t >= 1 violated: caching gain must be at least 1".into()));
    }
    if gain > antennas {
        return Err(Error::InfeasibleParams(format!(
            "t <= L violated: t={gain} exceeds L={antennas}"
        )));
    }
    if gain + antennas > users {
        return Err(Error::InfeasibleParams(format!(
            "t + L <= K violated: t+L={} exceeds K={users}",
            gain + antennas
        )));
    }
    if library < users {
        return Err(Error::InfeasibleParams(format!(
            "N >= K violated: N={library} is smaller than K={users}"
        )));
    }
    Ok(SchemeParams {
        users,
        antennas,
        gain,
        library,
    })
}

impl SchemeParams {
    pub fn new(users: usize, antennas: usize, gain: usize, library: usize) -> Result<Self> {
        validate_params(users, antennas, gain, library)
    }

    /// `K`
    pub fn users(&self) -> usize {
        self.users
    }

    /// `L`
    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// `t`
    pub fn gain(&self) -> usize {
        self.gain
    }

    /// `N`
    pub fn library(&self) -> usize {
        self.library
    }

    /// Users served per transmission interval, `t + L`.
    pub fn served_per_interval(&self) -> usize {
        self.gain + self.antennas
    }

    /// Number of transmission intervals `S = K(K - t)`.
    pub fn intervals(&self) -> usize {
        self.users * (self.users - self.gain)
    }

    /// Number of pieces each file is split into, `K(t + L)`.
    pub fn subpacketization(&self) -> usize {
        self.users * self.served_per_interval()
    }

    /// Cache size as a fraction of the library, `M/N = t/K`.
    pub fn cache_fraction(&self) -> Ratio<usize> {
        Ratio::new(self.gain, self.users)
    }

    /// Iterates every valid `(K, t, L)` with `K <= max_users`, using `N = K`.
    pub fn enumerate(max_users: usize) -> impl Iterator<Item = SchemeParams> {
        (1..=max_users).flat_map(|k| {
            (1..=k).flat_map(move |l| {
                (1..=l).filter_map(move |t| SchemeParams::new(k, l, t, k).ok())
            })
        })
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "K={} L={} t={} N={}",
            self.users, self.antennas, self.gain, self.library
        )
    }
}

/// Binary `P x K` placement matrix. Row `p` lists which users cache part `p`.
///
/// Matrices produced by [`build_placement_matrix`] always have `P = K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlacementExport", into = "PlacementExport")]
pub struct PlacementMatrix {
    users: usize,
    gain: usize,
    parts: usize,
    // row-major, parts x users
    cells: Vec<bool>,
}

/// JSON shape of a placement matrix. `rows[p-1][k-1]` is `V[p, k]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacementExport {
    #[serde(rename = "K")]
    pub users: usize,
    pub t: usize,
    pub rows: Vec<Vec<u8>>,
}

impl From<PlacementMatrix> for PlacementExport {
    fn from(v: PlacementMatrix) -> Self {
        PlacementExport {
            users: v.users,
            t: v.gain,
            rows: v.rows(),
        }
    }
}

impl TryFrom<PlacementExport> for PlacementMatrix {
    type Error = Error;

    fn try_from(e: PlacementExport) -> Result<Self> {
        PlacementMatrix::from_rows(e.users, e.t, &e.rows)
    }
}

/// Builds the circulant placement matrix: row 1 holds ones in columns `1..=t`,
/// and each following row is the previous one shifted right by one.
pub fn build_placement_matrix(params: &SchemeParams) -> PlacementMatrix {
    let k = params.users();
    let t = params.gain();
    let mut cells = vec![false; k * k];
    for p in 0..k {
        for offset in 0..t {
            cells[p * k + (p + offset) % k] = true;
        }
    }
    PlacementMatrix {
        users: k,
        gain: t,
        parts: k,
        cells,
    }
}

impl PlacementMatrix {
    /// Accepts an externally supplied `P x K` matrix, checking that every row
    /// has `t` ones and every column has `Pt/K` ones.
    pub fn from_rows(users: usize, gain: usize, rows: &[Vec<u8>]) -> Result<Self> {
        let parts = rows.len();
        if users == 0 || parts == 0 {
            return Err(Error::InvalidPlacement("matrix must be non-empty".into()));
        }
        if !(parts * gain).is_multiple_of(users) {
            return Err(Error::InvalidPlacement(format!(
                "Pt/K must be an integer (P={parts}, t={gain}, K={users})"
            )));
        }
        let per_column = parts * gain / users;
        let mut cells = Vec::with_capacity(parts * users);
        for (p, row) in rows.iter().enumerate() {
            if row.len() != users {
                return Err(Error::InvalidPlacement(format!(
                    "row {} has {} entries, expected {users}",
                    p + 1,
                    row.len()
                )));
            }
            let mut ones = 0;
            for &x in row {
                match x {
                    0 => cells.push(false),
                    1 => {
                        ones += 1;
                        cells.push(true)
                    }
                    other => {
                        return Err(Error::InvalidPlacement(format!(
                            "row {} contains non-binary entry {other}",
                            p + 1
                        )))
                    }
                }
            }
            if ones != gain {
                return Err(Error::InvalidPlacement(format!(
                    "row {} has {ones} ones, expected t={gain}",
                    p + 1
                )));
            }
        }
        for k in 0..users {
            let ones = (0..parts).filter(|&p| cells[p * users + k]).count();
            if ones != per_column {
                return Err(Error::InvalidPlacement(format!(
                    "column {} has {ones} ones, expected Pt/K={per_column}",
                    k + 1
                )));
            }
        }
        Ok(PlacementMatrix {
            users,
            gain,
            parts,
            cells,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn gain(&self) -> usize {
        self.gain
    }

    /// `P`, the number of parts each file is divided into before subpart splitting.
    pub fn parts(&self) -> usize {
        self.parts
    }

    /// `V[part, user] == 1`, 1-based. Out-of-range indices read as not cached.
    pub fn is_cached(&self, part: usize, user: usize) -> bool {
        if part == 0 || user == 0 || part > self.parts || user > self.users {
            return false;
        }
        self.cells[(part - 1) * self.users + (user - 1)]
    }

    /// Raw `V[p, k]` as 0/1, 1-based.
    pub fn get(&self, part: usize, user: usize) -> u8 {
        u8::from(self.is_cached(part, user))
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.cells
            .chunks(self.users)
            .map(|r| r.iter().map(|&c| u8::from(c)).collect())
            .collect()
    }

    /// Parts cached by `user`, ascending.
    pub fn cached_parts(&self, user: usize) -> Vec<usize> {
        (1..=self.parts).filter(|&p| self.is_cached(p, user)).collect()
    }

    /// Users caching `part`, ascending.
    pub fn caching_users(&self, part: usize) -> Vec<usize> {
        (1..=self.users).filter(|&k| self.is_cached(part, k)).collect()
    }

    /// Plain 0/1 grid, one line per part.
    pub fn to_text_grid(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Cache contents `Z(k)` of a single user as `(file, part, subpart)` triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContents {
    user: usize,
    parts: Vec<usize>,
    entries: BTreeSet<(usize, usize, usize)>,
}

impl CacheContents {
    pub fn user(&self) -> usize {
        self.user
    }

    /// Cached part indices (the same for every file).
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn entries(&self) -> &BTreeSet<(usize, usize, usize)> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, file: usize, part: usize, subpart: usize) -> bool {
        self.entries.contains(&(file, part, subpart))
    }
}

/// Every `(n, p, q)` with `V[p, user] = 1`, for all files and subparts.
pub fn cache_contents(params: &SchemeParams, placement: &PlacementMatrix, user: usize) -> Result<CacheContents> {
    if user == 0 || user > params.users() {
        return Err(Error::UserOutOfRange {
            user,
            users: params.users(),
        });
    }
    let parts = placement.cached_parts(user);
    let subparts = params.served_per_interval();
    let mut entries = BTreeSet::new();
    for n in 1..=params.library() {
        for &p in &parts {
            for q in 1..=subparts {
                entries.insert((n, p, q));
            }
        }
    }
    Ok(CacheContents {
        user,
        parts,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> SchemeParams {
        validate_params(6, 3, 2, 6).unwrap()
    }

    #[test]
    fn example1_params() {
        let p = example1();
        assert_eq!(p.intervals(), 24);
        assert_eq!(p.subpacketization(), 30);
        assert_eq!(p.cache_fraction(), Ratio::new(1, 3));
    }

    #[test]
    fn rejects_infeasible_tuples() {
        let err = validate_params(6, 2, 3, 6).unwrap_err();
        assert!(err.to_string().contains("t <= L"), "{err}");
        assert!(validate_params(6, 3, 0, 6).unwrap_err().to_string().contains("t >= 1"));
        assert!(validate_params(6, 4, 3, 6).unwrap_err().to_string().contains("t + L <= K"));
        assert!(validate_params(6, 3, 2, 5).unwrap_err().to_string().contains("N >= K"));
        assert!(validate_params(0, 3, 2, 6).is_err());
    }

    #[test]
    fn k20_subpacketization() {
        assert_eq!(validate_params(20, 4, 2, 20).unwrap().subpacketization(), 120);
    }

    #[test]
    fn example1_matrix() {
        let v = build_placement_matrix(&example1());
        let expected: Vec<Vec<u8>> = vec![
            vec![1, 1, 0, 0, 0, 0],
            vec![0, 1, 1, 0, 0, 0],
            vec![0, 0, 1, 1, 0, 0],
            vec![0, 0, 0, 1, 1, 0],
            vec![0, 0, 0, 0, 1, 1],
            vec![1, 0, 0, 0, 0, 1],
        ];
        assert_eq!(v.rows(), expected);
    }

    #[test]
    fn t1_is_identity_pattern() {
        let v = build_placement_matrix(&validate_params(4, 1, 1, 4).unwrap());
        for p in 1..=4 {
            for k in 1..=4 {
                assert_eq!(v.is_cached(p, k), p == k);
            }
        }
    }

    #[test]
    fn k5_t2_sums() {
        let v = build_placement_matrix(&validate_params(5, 2, 2, 5).unwrap());
        assert_eq!(v.rows()[0], vec![1, 1, 0, 0, 0]);
        for p in 1..=5 {
            assert_eq!((1..=5).filter(|&k| v.is_cached(p, k)).count(), 2);
        }
        for k in 1..=5 {
            assert_eq!((1..=5).filter(|&p| v.is_cached(p, k)).count(), 2);
        }
    }

    #[test]
    fn cache_contents_example1() {
        let params = example1();
        let v = build_placement_matrix(&params);
        let z1 = cache_contents(&params, &v, 1).unwrap();
        assert_eq!(z1.parts(), &[1, 6]);
        for n in 1..=6 {
            for q in 1..=5 {
                assert!(z1.contains(n, 1, q) && z1.contains(n, 6, q));
            }
        }
        assert_eq!(z1.len(), 60);
        let z3 = cache_contents(&params, &v, 3).unwrap();
        assert_eq!(z3.parts(), &[2, 3]);
        assert_eq!(z3.len(), 60);
        assert!(matches!(
            cache_contents(&params, &v, 7),
            Err(Error::UserOutOfRange { user: 7, users: 6 })
        ));
        assert!(cache_contents(&params, &v, 0).is_err());
    }

    #[test]
    fn external_matrix_validation() {
        // 3 x 6 with t = 2: column sums Pt/K = 1
        let ok = vec![
            vec![1, 1, 0, 0, 0, 0],
            vec![0, 0, 1, 1, 0, 0],
            vec![0, 0, 0, 0, 1, 1],
        ];
        let v = PlacementMatrix::from_rows(6, 2, &ok).unwrap();
        assert_eq!(v.parts(), 3);
        let bad_col = vec![
            vec![1, 1, 0, 0, 0, 0],
            vec![1, 1, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 1, 1],
        ];
        assert!(PlacementMatrix::from_rows(6, 2, &bad_col).is_err());
        let bad_row = vec![vec![1, 1, 1, 0, 0, 0]; 2];
        assert!(PlacementMatrix::from_rows(6, 2, &bad_row).is_err());
        assert!(PlacementMatrix::from_rows(6, 2, &[vec![1, 2, 0, 0, 0, 0]]).is_err());
    }

    #[test]
    fn text_grid_has_one_line_per_part() {
        let grid = build_placement_matrix(&example1()).to_text_grid();
        assert_eq!(grid.lines().count(), 6);
        assert_eq!(grid.lines().next().unwrap(), "1 1 0 0 0 0");
    }

    #[test]
    fn enumerate_only_yields_valid() {
        let all: Vec<_> = SchemeParams::enumerate(6).collect();
        assert!(all.contains(&example1()));
        assert!(all.iter().all(|p| p.gain() <= p.antennas() && p.served_per_interval() <= p.users()));
        // K=2: (t,L)=(1,1); K=3: +0 new with t+L<=3 -> (1,1),(1,2)
        assert_eq!(SchemeParams::enumerate(3).count(), 1 + 2);
    }
}
