//! Noiseless (or noisy) numerical run of a schedule over random MISO channels.
//!
//! User `k` receives `y_k(s) = h_k^T x(s) + w_k(s)` where `x(s)` superimposes
//! one unit-norm zero-forcing beamformer per term. Receivers know every
//! equivalent channel `h_k^T v_R`, subtract the terms they hold in cache and
//! divide by their own equivalent channel.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::delivery::{build_schedule, Demand, Schedule, SymbolId, TransmissionVector};
use crate::dp_matrices::generate_family;
use crate::error::{Error, Result};
use crate::placement::{build_placement_matrix, cache_contents, CacheContents, PlacementMatrix, SchemeParams};

/// Maximum `|h_u^T v_R|` tolerated at a user the beamformer must null.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;
/// Maximum `| ||v_R|| - 1 |`.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Projection norms below this are treated as a degenerate channel.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// `K` channel vectors of length `L`, i.i.d. CN(0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    seed: u64,
    antennas: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    /// Wraps explicit channel vectors (all of equal length).
    pub fn from_vectors(vectors: Vec<Vec<Complex64>>) -> Self {
        let antennas = vectors.first().map_or(0, Vec::len);
        assert!(vectors.iter().all(|h| h.len() == antennas), "ragged channel matrix");
        ChannelRealization {
            seed: 0,
            antennas,
            vectors,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn users(&self) -> usize {
        self.vectors.len()
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// `h_user`, 1-based.
    pub fn vector(&self, user: usize) -> &[Complex64] {
        &self.vectors[user - 1]
    }

    /// `h_user^T v` (no conjugation).
    pub fn equivalent(&self, user: usize, v: &[Complex64]) -> Complex64 {
        self.vector(user).iter().zip(v).map(|(h, x)| h * x).sum()
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

pub fn sample_channels(users: usize, antennas: usize, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..users)
        .map(|_| (0..antennas).map(|_| complex_gaussian(&mut rng, 1.0)).collect())
        .collect();
    ChannelRealization {
        seed,
        antennas,
        vectors,
    }
}

fn keyed_rng(words: [u64; 4]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (chunk, w) in seed.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Unit-modulus symbol standing in for the modulated subpart `id`.
pub fn symbol(id: SymbolId, seed: u64) -> Complex64 {
    let mut rng = keyed_rng([seed, id.file as u64, id.part as u64, id.subpart as u64]);
    let phase: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(1.0, phase)
}

/// Unit-norm precoder for one term.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub zf_set: Vec<usize>,
    pub vector: Vec<Complex64>,
}

impl Beamformer {
    pub fn norm(&self) -> f64 {
        norm(&self.vector)
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = inner(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

/// Projects `conj(h_intended)` onto the subspace where `h_u^T v = 0` for
/// every `u` in `targeted \ zf_set`, then normalizes.
pub fn compute_beamformer(
    channels: &ChannelRealization,
    targeted: &[usize],
    zf_set: &[usize],
    intended: usize,
) -> Result<Beamformer> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for &u in targeted.iter().filter(|u| !zf_set.contains(u)) {
        let mut a: Vec<Complex64> = channels.vector(u).iter().map(Complex64::conj).collect();
        let original = norm(&a);
        project_out(&mut a, &basis);
        let n = norm(&a);
        if n > 1e-12 * original.max(f64::MIN_POSITIVE) {
            basis.push(a.into_iter().map(|x| x / n).collect());
        }
    }
    let mut v: Vec<Complex64> = channels.vector(intended).iter().map(Complex64::conj).collect();
    project_out(&mut v, &basis);
    let n = norm(&v);
    if n < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateChannel { norm: n });
    }
    for x in &mut v {
        *x /= n;
    }
    let mut zf_set = zf_set.to_vec();
    zf_set.sort_unstable();
    Ok(Beamformer { zf_set, vector: v })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub seed: u64,
    /// Per-user noise variance; `0` is the noiseless verification mode.
    pub noise_power: f64,
    pub residual_tolerance: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            seed: 0,
            noise_power: 0.0,
            residual_tolerance: 1e-9,
        }
    }
}

impl SimulationConfig {
    pub fn noiseless(seed: u64) -> Self {
        SimulationConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.noise_power.is_finite() || self.noise_power < 0.0 {
            return Err(Error::InfeasibleParams(format!(
                "noise power must be a finite value >= 0, got {}",
                self.noise_power
            )));
        }
        Ok(())
    }
}

/// Received scalar of every user `1..=K` for one transmission vector.
pub fn simulate_interval(
    channels: &ChannelRealization,
    vector: &TransmissionVector,
    beamformers: &[Beamformer],
    config: &SimulationConfig,
) -> Vec<Complex64> {
    assert_eq!(vector.terms.len(), beamformers.len(), "one beamformer per term");
    let antennas = channels.antennas();
    let mut x = vec![Complex64::new(0.0, 0.0); antennas];
    for (term, bf) in vector.terms.iter().zip(beamformers) {
        let sym = symbol(term.symbol(), config.seed);
        for (xa, va) in x.iter_mut().zip(&bf.vector) {
            *xa += sym * va;
        }
    }
    let mut noise_rng = keyed_rng([config.seed, vector.s as u64, u64::MAX, 0]);
    (1..=channels.users())
        .map(|u| {
            let y = channels.equivalent(u, &x);
            if config.noise_power > 0.0 {
                y + complex_gaussian(&mut noise_rng, config.noise_power)
            } else {
                y
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeResult {
    pub estimate: Complex64,
    pub residual: f64,
}

/// Cancels cached terms, equalizes by the own equivalent channel and compares
/// against the transmitted symbol. `equivalent[j]` is `h_user^T v_R` of term `j`.
pub fn decode_user(
    user: usize,
    received: Complex64,
    cache: &CacheContents,
    equivalent: &[Complex64],
    vector: &TransmissionVector,
    config: &SimulationConfig,
) -> Result<DecodeResult> {
    let own = vector
        .terms
        .iter()
        .position(|t| t.user == user)
        .ok_or(Error::NotTargeted {
            interval: vector.s,
            user,
        })?;
    let mut y = received;
    for (j, term) in vector.terms.iter().enumerate() {
        if j == own {
            continue;
        }
        if cache.contains(term.file, term.part, term.subpart) {
            y -= symbol(term.symbol(), config.seed) * equivalent[j];
        } else if term.reaches(user) {
            return Err(Error::MissingCacheEntry {
                interval: vector.s,
                user,
                file: term.file,
                part: term.part,
                subpart: term.subpart,
            });
        }
    }
    let estimate = y / equivalent[own];
    let truth = symbol(vector.terms[own].symbol(), config.seed);
    Ok(DecodeResult {
        estimate,
        residual: (estimate - truth).norm(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub max_residual: f64,
    pub intervals: usize,
    pub served_per_interval: usize,
    pub seed: u64,
    pub noise_power: f64,
    pub max_zf_leakage: f64,
    pub max_norm_error: f64,
    pub interval_success: Vec<bool>,
}

impl SimulationSummary {
    /// Every interval decoded within tolerance and every beamformer met its constraints.
    pub fn passed(&self) -> bool {
        self.interval_success.iter().all(|&ok| ok)
    }
}

/// Simulates every interval of `schedule` over the given channels.
pub fn simulate_schedule(
    schedule: &Schedule,
    placement: &PlacementMatrix,
    channels: &ChannelRealization,
    config: &SimulationConfig,
) -> Result<SimulationSummary> {
    config.validate()?;
    let params = &schedule.params;
    let caches = (1..=params.users())
        .map(|u| cache_contents(params, placement, u))
        .collect::<Result<Vec<_>>>()?;

    let mut max_residual: f64 = 0.0;
    let mut max_leakage: f64 = 0.0;
    let mut max_norm_error: f64 = 0.0;
    let mut served = usize::MAX;
    let mut interval_success = Vec::with_capacity(schedule.vectors.len());
    for vector in &schedule.vectors {
        let targeted = vector.targeted_users();
        let beamformers = vector
            .terms
            .iter()
            .map(|t| compute_beamformer(channels, &targeted, &t.zf_set, t.user))
            .collect::<Result<Vec<_>>>()?;

        let mut ok = true;
        for bf in &beamformers {
            let norm_err = (bf.norm() - 1.0).abs();
            max_norm_error = max_norm_error.max(norm_err);
            for &u in targeted.iter().filter(|u| !bf.zf_set.contains(u)) {
                let leak = channels.equivalent(u, &bf.vector).norm();
                max_leakage = max_leakage.max(leak);
                ok &= leak <= ORTHOGONALITY_TOLERANCE;
            }
            ok &= norm_err <= NORM_TOLERANCE;
        }

        let received = simulate_interval(channels, vector, &beamformers, config);
        let mut decoded = 0;
        for &u in &targeted {
            let eq: Vec<Complex64> = beamformers.iter().map(|bf| channels.equivalent(u, &bf.vector)).collect();
            let res = decode_user(u, received[u - 1], &caches[u - 1], &eq, vector, config)?;
            max_residual = max_residual.max(res.residual);
            if res.residual <= config.residual_tolerance {
                decoded += 1;
            } else {
                ok = false;
            }
        }
        served = served.min(decoded);
        interval_success.push(ok);
    }
    Ok(SimulationSummary {
        max_residual,
        intervals: schedule.vectors.len(),
        served_per_interval: if served == usize::MAX { 0 } else { served },
        seed: config.seed,
        noise_power: config.noise_power,
        max_zf_leakage: max_leakage,
        max_norm_error,
        interval_success,
    })
}

/// Builds the scheme for `(params, demand)`, samples channels from
/// `config.seed` and simulates all `K(K - t)` intervals.
pub fn run_full_simulation(params: &SchemeParams, demand: &Demand, config: &SimulationConfig) -> Result<SimulationSummary> {
    let placement = build_placement_matrix(params);
    let family = generate_family(params);
    let schedule = build_schedule(params, &placement, &family, demand)?;
    let channels = sample_channels(params.users(), params.antennas(), config.seed);
    simulate_schedule(&schedule, &placement, &channels, config)
}
