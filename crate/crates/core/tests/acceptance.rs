//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cachecast_core::channel_sim::{run_full_simulation, SimulationConfig};
use cachecast_core::delivery::{identity_schedule, Demand, TransmissionTerm};
use cachecast_core::dp_matrices::generate_family;
use cachecast_core::metrics::{comparison_table, metrics_alpha_beta, metrics_multiserver, metrics_new};
use cachecast_core::placement::{build_placement_matrix, validate_params, SchemeParams};
use cachecast_core::verifier::{check_coverage, check_decodability, check_dof};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed > limit {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn term(user: usize, part: usize, subpart: usize, zf: [usize; 3]) -> TransmissionTerm {
    TransmissionTerm {
        user,
        file: user,
        part,
        subpart,
        zf_set: zf.to_vec(),
    }
}

// A..F are users/files 1..6
const A: usize = 1;
const B: usize = 2;
const C: usize = 3;
const D: usize = 4;
const E: usize = 5;
const F: usize = 6;

fn golden_example() -> Outcome {
    let start = Instant::now();
    let params = validate_params(6, 3, 2, 6).map_err(|e| e.to_string())?;
    let v = build_placement_matrix(&params);
    let expected_v: Vec<Vec<u8>> = vec![
        vec![1, 1, 0, 0, 0, 0],
        vec![0, 1, 1, 0, 0, 0],
        vec![0, 0, 1, 1, 0, 0],
        vec![0, 0, 0, 1, 1, 0],
        vec![0, 0, 0, 0, 1, 1],
        vec![1, 0, 0, 0, 0, 1],
    ];
    ensure!(v.rows() == expected_v, "placement matrix differs: {:?}", v.rows());

    let fam = generate_family(&params);
    let r1 = vec![vec![3, 3, 1, 1, 1], vec![4, 4, 1, 1, 1], vec![5, 5, 1, 1, 1], vec![2, 6, 1, 1, 1]];
    let c1 = vec![vec![1, 2, 3, 4, 5], vec![1, 2, 4, 5, 6], vec![1, 2, 5, 6, 3], vec![1, 2, 6, 3, 4]];
    let r2 = vec![vec![4, 4, 2, 2, 2], vec![5, 5, 2, 2, 2], vec![6, 6, 2, 2, 2], vec![3, 1, 2, 2, 2]];
    let c2 = vec![vec![2, 3, 4, 5, 6], vec![2, 3, 5, 6, 1], vec![2, 3, 6, 1, 4], vec![2, 3, 1, 4, 5]];
    ensure!(fam.round(1).parts.to_rows() == r1, "R_1 differs");
    ensure!(fam.round(1).users.to_rows() == c1, "C_1 differs");
    ensure!(fam.round(2).parts.to_rows() == r2, "R_2 differs");
    ensure!(fam.round(2).users.to_rows() == c2, "C_2 differs");

    let (_, sched) = identity_schedule(&params).map_err(|e| e.to_string())?;
    let golden = [
        vec![
            term(A, 3, 1, [1, 3, 4]),
            term(B, 3, 1, [2, 3, 4]),
            term(C, 1, 1, [1, 2, 3]),
            term(D, 1, 1, [1, 2, 4]),
            term(E, 1, 1, [1, 2, 5]),
        ],
        vec![
            term(A, 4, 1, [1, 4, 5]),
            term(B, 4, 1, [2, 4, 5]),
            term(D, 1, 2, [1, 2, 4]),
            term(E, 1, 2, [1, 2, 5]),
            term(F, 1, 1, [1, 2, 6]),
        ],
        vec![
            term(A, 5, 1, [1, 5, 6]),
            term(B, 5, 1, [2, 5, 6]),
            term(E, 1, 3, [1, 2, 5]),
            term(F, 1, 2, [1, 2, 6]),
            term(C, 1, 2, [1, 2, 3]),
        ],
        vec![
            term(A, 2, 1, [1, 2, 3]),
            term(B, 6, 1, [1, 2, 6]),
            term(F, 1, 3, [1, 2, 6]),
            term(C, 1, 3, [1, 2, 3]),
            term(D, 1, 3, [1, 2, 4]),
        ],
    ];
    for (s, want) in golden.iter().enumerate() {
        ensure!(&sched.interval(s + 1).terms == want, "x({}) differs: {:?}", s + 1, sched.interval(s + 1).terms);
    }

    // (part, user) pairs served in intervals 1..8
    let cells: [[(usize, usize); 5]; 8] = [
        [(3, 1), (3, 2), (1, 3), (1, 4), (1, 5)],
        [(4, 1), (4, 2), (1, 4), (1, 5), (1, 6)],
        [(5, 1), (5, 2), (1, 5), (1, 6), (1, 3)],
        [(2, 1), (6, 2), (1, 6), (1, 3), (1, 4)],
        [(4, 2), (4, 3), (2, 4), (2, 5), (2, 6)],
        [(5, 2), (5, 3), (2, 5), (2, 6), (2, 1)],
        [(6, 2), (6, 3), (2, 6), (2, 1), (2, 4)],
        [(3, 2), (1, 3), (2, 1), (2, 4), (2, 5)],
    ];
    for (s, want) in cells.iter().enumerate() {
        let mut got: Vec<(usize, usize)> = sched.interval(s + 1).terms.iter().map(|t| (t.part, t.user)).collect();
        let mut want = want.to_vec();
        got.sort_unstable();
        want.sort_unstable();
        ensure!(got == want, "interval {} cells {:?}, expected {:?}", s + 1, got, want);
    }
    // round 2 ZF sets are the round 1 sets shifted by one
    for s in 1..=4 {
        for (x, y) in sched.interval(s).terms.iter().zip(&sched.interval(s + 4).terms) {
            let shifted: Vec<usize> = {
                let mut z: Vec<usize> = x.zf_set.iter().map(|u| u % 6 + 1).collect();
                z.sort_unstable();
                z
            };
            ensure!(shifted == y.zf_set, "interval {} zf set {:?} not a shift of {:?}", s + 4, y.zf_set, x.zf_set);
        }
    }
    within(start.elapsed(), Duration::from_millis(100))?;
    Ok(format!("V, R1/C1/R2/C2, x(1)-x(8) exact in {:?}", start.elapsed()))
}

fn full_dof_sweep() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    let mut intervals = 0;
    for params in SchemeParams::enumerate(15) {
        let (v, sched) = identity_schedule(&params).map_err(|e| format!("{params}: {e}"))?;
        ensure!(sched.vectors.len() == params.intervals(), "{params}: {} intervals", sched.vectors.len());
        let dof = check_dof(&sched);
        ensure!(dof.outcome.passed, "{params}: {:?}", dof.outcome.first());
        ensure!(
            dof.per_interval.iter().all(|&n| n == params.served_per_interval()),
            "{params}: served counts {:?}",
            dof.per_interval
        );
        let dec = check_decodability(&sched, &v);
        ensure!(dec.passed, "{params}: {:?}", dec.first());
        cases += 1;
        intervals += sched.vectors.len();
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{cases} parameter sets, {intervals} intervals, all serve t+L decodably in {:?}", start.elapsed()))
}

fn per_part_subpacketization() -> Outcome {
    let mut cases = 0;
    for params in SchemeParams::enumerate(15) {
        let (k, t, subparts) = (params.users(), params.gain(), params.served_per_interval());
        let (v, sched) = identity_schedule(&params).map_err(|e| format!("{params}: {e}"))?;
        let cov = check_coverage(&sched, &v);
        ensure!(cov.outcome.passed, "{params}: {:?}", cov.outcome.first());
        ensure!(cov.counts.values().all(|&c| c == subparts), "{params}: counts");

        // oracle: V[p, k] = 1 iff (k - p) mod K < t, enumerated directly
        let mut expected = Vec::new();
        for user in 1..=k {
            for part in 1..=k {
                if (user + k - part) % k >= t {
                    for q in 1..=subparts {
                        expected.push((user, user, part, q));
                    }
                }
            }
        }
        let mut got: Vec<(usize, usize, usize, usize)> = sched
            .vectors
            .iter()
            .flat_map(|x| x.terms.iter().map(|tm| (tm.user, tm.file, tm.part, tm.subpart)))
            .collect();
        got.sort_unstable();
        expected.sort_unstable();
        ensure!(got == expected, "{params}: term multiset differs from enumeration");
        // subparts of each (user, part) go out as 1..=t+L in transmission order
        for (user, part) in cov.counts.keys() {
            let order: Vec<usize> = sched
                .vectors
                .iter()
                .flat_map(|x| x.terms.iter())
                .filter(|tm| tm.user == *user && tm.part == *part)
                .map(|tm| tm.subpart)
                .collect();
            ensure!(order == (1..=subparts).collect::<Vec<_>>(), "{params}: ({user},{part}) order {order:?}");
        }
        cases += 1;
    }
    Ok(format!("{cases} parameter sets: every missing (user, part) appears exactly t+L times"))
}

fn numerical_decodability() -> Outcome {
    let start = Instant::now();
    let mut worst_residual: f64 = 0.0;
    let mut worst_leak: f64 = 0.0;
    for (k, l, t) in [(6, 3, 2), (10, 4, 2)] {
        let params = validate_params(k, l, t, k).map_err(|e| e.to_string())?;
        for seed in 0..5u64 {
            let s = run_full_simulation(&params, &Demand::identity(&params), &SimulationConfig::noiseless(seed))
                .map_err(|e| format!("{params} seed {seed}: {e}"))?;
            ensure!(s.max_residual <= 1e-9, "{params} seed {seed}: residual {:e}", s.max_residual);
            ensure!(s.max_zf_leakage <= 1e-10, "{params} seed {seed}: leakage {:e}", s.max_zf_leakage);
            ensure!(s.passed(), "{params} seed {seed}: interval failure");
            worst_residual = worst_residual.max(s.max_residual);
            worst_leak = worst_leak.max(s.max_zf_leakage);
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "max residual {worst_residual:.2e}, max ZF leakage {worst_leak:.2e} in {:?}",
        start.elapsed()
    ))
}

fn quantitative_comparisons() -> Outcome {
    let start = Instant::now();
    let int = |m: cachecast_core::metrics::SchemeMetrics| {
        m.subpacketization_integer().and_then(|n| n.to_u64()).unwrap_or(0)
    };
    let ms20 = int(metrics_multiserver(20, 2, 4).map_err(|e| e.to_string())?);
    let new20 = int(metrics_new(20, 2, 4).map_err(|e| e.to_string())?);
    ensure!(ms20 == 129_200 && new20 == 120, "K=20: {ms20} vs {new20}");
    let k50 = &comparison_table(2, 4, [50]).map_err(|e| e.to_string())?[0];
    ensure!(k50.ratio_floor().to_u64() == Some(66_211), "K=50 ratio {}", k50.ratio_decimal());
    let rows = comparison_table(2, 3, 5..=10).map_err(|e| e.to_string())?;
    let ms: Vec<u64> = rows.iter().filter_map(|r| r.subpack_ms.to_u64()).collect();
    let new: Vec<u64> = rows.iter().filter_map(|r| r.subpack_new.to_u64()).collect();
    ensure!(ms == [10, 45, 126, 280, 540, 945], "MS series {ms:?}");
    ensure!(new == [25, 30, 35, 40, 45, 50], "new series {new:?}");
    ensure!(ms[0] < new[0], "no crossover at K=5");
    ensure!(ms[1..].iter().zip(&new[1..]).all(|(m, n)| m > n), "MS not larger for K >= 6");
    within(start.elapsed(), Duration::from_millis(100))?;
    Ok("129200 vs 120, ratio floor 66211 at K=50, K=5..10 series exact, crossover at K=5".to_string())
}

fn identity_reduction() -> Outcome {
    let mut cases = 0;
    for params in SchemeParams::enumerate(30) {
        let (k, t, l) = (params.users() as u64, params.gain() as u64, params.antennas() as u64);
        let ab = metrics_alpha_beta(k, t, l, l, l).map_err(|e| e.to_string())?;
        let ms = metrics_multiserver(k, t, l).map_err(|e| e.to_string())?;
        ensure!(ab.subpacketization == ms.subpacketization, "{params}: {:?} vs {:?}", ab.subpacketization, ms.subpacketization);
        cases += 1;
    }
    Ok(format!("{cases} parameter sets with alpha = beta = L"))
}

fn fault_injection() -> Outcome {
    let params = validate_params(6, 3, 2, 6).map_err(|e| e.to_string())?;
    let (v, clean) = identity_schedule(&params).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let k = params.users();
    let mut detected = 0;
    let trials = 100;
    for trial in 0..trials {
        let mut sched = clean.clone();
        let s = rng.gen_range(0..sched.vectors.len());
        let j = rng.gen_range(0..params.served_per_interval());
        let tm = &mut sched.vectors[s].terms[j];
        let what = if trial % 2 == 0 {
            let slot = rng.gen_range(0..tm.zf_set.len());
            let outside: Vec<usize> = (1..=k).filter(|u| !tm.zf_set.contains(u)).collect();
            let replacement = outside[rng.gen_range(0..outside.len())];
            let before = tm.zf_set.clone();
            tm.zf_set[slot] = replacement;
            tm.zf_set.sort_unstable();
            format!("zf set {before:?} -> {:?}", tm.zf_set)
        } else {
            let before = tm.part;
            let mut p = rng.gen_range(1..=k);
            while p == before {
                p = rng.gen_range(1..=k);
            }
            tm.part = p;
            format!("part {before} -> {p}")
        };
        let dec = check_decodability(&sched, &v);
        let cov = check_coverage(&sched, &v).outcome;
        let located = [&dec, &cov]
            .iter()
            .filter(|c| !c.passed)
            .any(|c| c.first().is_some_and(|cx| cx.interval.is_some()));
        ensure!(located, "trial {trial}: corruption at interval {} term {} ({what}) went undetected", s + 1, j + 1);
        detected += 1;
    }
    Ok(format!("{detected}/{trials} corruptions detected with located counterexamples"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("golden reproduction at K=6, L=3, t=2", golden_example),
        ("DoF t+L in every interval, K <= 15", full_dof_sweep),
        ("subpacketization t+L per missing part, K <= 15", per_part_subpacketization),
        ("numerical decodability (noiseless ZF)", numerical_decodability),
        ("quantitative subpacketization comparisons", quantitative_comparisons),
        ("alpha = beta = L reduces to multi-server", identity_reduction),
        ("fault injection detection", fault_injection),
    ];
    let mut failures = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", idx + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL [{}] {name}: {why}", idx + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
