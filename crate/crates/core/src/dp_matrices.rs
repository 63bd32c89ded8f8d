//! Delivery Prime (DP) matrices.
//!
//! Round `k` of the delivery is driven by a pair `(R_k, C_k)` of
//! `(K - t) x (t + L)` matrices: row `i` of `C_k` lists the users targeted by
//! one transmission and the same row of `R_k` the part index sent to each.
//! `R_1` and `C_1` come from two fixed generators; every later round is the
//! elementwise circular increment of the previous one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::placement::SchemeParams;

/// `(a mod K) + 1` for `a` in `1..=K`.
pub fn circular_increment(a: usize, domain: usize) -> Result<usize> {
    if a == 0 || a > domain {
        return Err(Error::OutOfDomain { value: a, domain });
    }
    Ok(a % domain + 1)
}

/// Dense integer matrix with 1-based accessors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct IndexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<usize>,
}

impl IndexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IndexMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        assert!((1..=self.rows).contains(&i) && (1..=self.cols).contains(&j), "index ({i}, {j}) out of bounds");
        self.data[(i - 1) * self.cols + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: usize) {
        assert!((1..=self.rows).contains(&i) && (1..=self.cols).contains(&j), "index ({i}, {j}) out of bounds");
        self.data[(i - 1) * self.cols + (j - 1)] = value;
    }

    /// Row `i` (1-based) as a slice.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.data[(i - 1) * self.cols..i * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.data.chunks(self.cols.max(1)).map(<[usize]>::to_vec).collect()
    }

    /// Elementwise [`circular_increment`] in domain `domain`.
    pub fn circular_increment(&self, domain: usize) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|&a| circular_increment(a, domain))
            .collect::<Result<Vec<_>>>()?;
        Ok(IndexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

impl From<Vec<Vec<usize>>> for IndexMatrix {
    fn from(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<usize> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), n * cols, "ragged matrix");
        IndexMatrix { rows: n, cols, data }
    }
}

impl From<IndexMatrix> for Vec<Vec<usize>> {
    fn from(m: IndexMatrix) -> Self {
        m.to_rows()
    }
}

/// Part-index generator for round 1.
pub fn generate_r1(params: &SchemeParams) -> IndexMatrix {
    let k = params.users() as i64;
    let t = params.gain() as i64;
    let l = params.antennas() as i64;
    let mut r1 = IndexMatrix::zeros((k - t) as usize, (t + l) as usize);
    for j in 1..=t {
        for i in 1..=(k - 2 * t + j) {
            r1.set(i as usize, j as usize, (t + i) as usize);
        }
        // wraps past the parts user j caches and resumes at j + 1; empty when j == t
        for i in (k - 2 * t + j + 1)..=(k - t) {
            let value = j + (i - (k - 2 * t + j));
            r1.set(i as usize, j as usize, value as usize);
        }
    }
    for j in (t + 1)..=(t + l) {
        for i in 1..=(k - t) {
            r1.set(i as usize, j as usize, 1);
        }
    }
    r1
}

/// User-index generator for round 1.
pub fn generate_c1(params: &SchemeParams) -> IndexMatrix {
    let k = params.users();
    let t = params.gain();
    let l = params.antennas();
    let mut c1 = IndexMatrix::zeros(k - t, t + l);
    for j in 1..=t {
        for i in 1..=(k - t) {
            c1.set(i, j, j);
        }
    }
    for j in (t + 1)..=(t + l) {
        for i in 1..=(k - t) {
            let value = if j + i - 1 <= k { j + i - 1 } else { j + i - 1 - (k - t) };
            c1.set(i, j, value);
        }
    }
    c1
}

/// The `(R_k, C_k)` pair driving round `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpMatrixPair {
    pub round: usize,
    #[serde(rename = "R")]
    pub parts: IndexMatrix,
    #[serde(rename = "C")]
    pub users: IndexMatrix,
}

impl DpMatrixPair {
    /// The pair for the next round.
    pub fn increment(&self, domain: usize) -> Result<Self> {
        Ok(DpMatrixPair {
            round: self.round + 1,
            parts: self.parts.circular_increment(domain)?,
            users: self.users.circular_increment(domain)?,
        })
    }
}

/// All `K` DP pairs of a scheme, rounds `1..=K` in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpFamily {
    params: SchemeParams,
    pairs: Vec<DpMatrixPair>,
}

impl DpFamily {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn pairs(&self) -> &[DpMatrixPair] {
        &self.pairs
    }

    /// Pair for round `k` (1-based).
    pub fn round(&self, k: usize) -> &DpMatrixPair {
        &self.pairs[k - 1]
    }
}

pub fn generate_family(params: &SchemeParams) -> DpFamily {
    let k = params.users();
    let mut pairs = Vec::with_capacity(k);
    pairs.push(DpMatrixPair {
        round: 1,
        parts: generate_r1(params),
        users: generate_c1(params),
    });
    for _ in 1..k {
        let next = pairs
            .last()
            .expect("round 1 present")
            .increment(k)
            .expect("DP entries stay within 1..=K");
        pairs.push(next);
    }
    DpFamily {
        params: *params,
        pairs,
    }
}
