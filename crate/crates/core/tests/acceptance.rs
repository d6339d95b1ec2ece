//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. `ACCEPTANCE_ONLY=1,4` runs a subset.

use std::collections::HashSet;
use std::time::Instant;

use bilayer_core::code_sampler::{assemble_relay, sample_instance, CodeInstance};
use bilayer_core::density_evolution::{
    de_iterate_uncorrelated, lemma1_equivalence_check, region_scan, run_de, threshold_on_ray,
    DeConfig, DeParams, DeState,
};
use bilayer_core::ensemble::{presets, BilayerEnsemble, CheckCount};
use bilayer_core::gf2::{ml_erasure_decode, DenseGf2};
use bilayer_core::simulator::{
    ber_sweep, decode_trial, draw_trial_input, peel, peel_with_order, sweep_metadata,
    write_sweep_csv, PeelOrder, PreparedInstance,
};
use bilayer_core::sparse::SparseBinaryMatrix;
use bilayer_core::theory::{
    achievable_region_sd, df_rate_bounds, optimal_allocation, ChannelSet, Pentagon,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------- oracles

/// The five cut values at `(theta1, theta2, Rs1)`, written out from the
/// network's cut-set constraints with `H(U1|U2) = 1 - p`, `H(U1,U2) = 2 - p`.
fn cuts(ch: &ChannelSet, p: f64, t1: f64, t2: f64, rs1: f64) -> [f64; 5] {
    let hj = 2.0 - p;
    let rs2 = hj - rs1;
    let tr = 1.0 - t1 - t2;
    let div = |a: f64, b: f64| if b <= 0.0 { f64::INFINITY } else { a / b };
    let (c1r, c2r, c1d, c2d, crd) =
        (1.0 - ch.eps_s1r, 1.0 - ch.eps_s2r, 1.0 - ch.eps_s1d, 1.0 - ch.eps_s2d, 1.0 - ch.eps_rd);
    [
        div(t1 * c1r, rs1),
        div(t2 * c2r, rs2),
        div(t1 * c1d + tr * crd, rs1),
        div(t2 * c2d + tr * crd, rs2),
        (t1 * c1d + t2 * c2d + tr * crd) / hj,
    ]
}

/// Exhaustive search over the `theta1 x theta2 x Rs1` grid.
fn grid_rmax(ch: &ChannelSet, p: f64, step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    let hc = 1.0 - p;
    let nr = ((1.0 - hc) / step).round() as usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let (t1, t2) = (i as f64 / n as f64, j as f64 / n as f64);
            for m in 0..=nr {
                let rs1 = if nr == 0 { 1.0 } else { hc + (1.0 - hc) * m as f64 / nr as f64 };
                let v = cuts(ch, p, t1, t2, rs1).iter().copied().fold(f64::INFINITY, f64::min);
                best = best.max(v);
            }
        }
    }
    best
}

/// Random channels obeying the relay assumptions.
fn random_channels(rng: &mut ChaCha8Rng) -> ChannelSet {
    let e1r = rng.gen_range(0.05..0.6);
    let e2r = rng.gen_range(0.05..0.6);
    let e1d = e1r + rng.gen::<f64>() * (0.95 - e1r);
    let e2d = e2r + rng.gen::<f64>() * (0.95 - e2r);
    let erd = rng.gen::<f64>() * e1d.min(e2d) * 0.9;
    ChannelSet::new(e1r, e2r, e1d, e2d, erd).unwrap()
}

/// Single-user coupled recursion written out position by position.
fn single_layer_oracle(x: &[f64], l: u32, r: u32, w: usize, eps: f64) -> Vec<f64> {
    let len = x.len();
    let at = |i: isize| if i >= 0 && (i as usize) < len { x[i as usize] } else { 0.0 };
    let q = |c: isize| {
        let avg: f64 = (0..w).map(|k| at(c - k as isize)).sum::<f64>() / w as f64;
        1.0 - (1.0 - avg).powi(r as i32 - 1)
    };
    (0..len)
        .map(|t| {
            let avg: f64 = (0..w).map(|j| q((t + j) as isize)).sum::<f64>() / w as f64;
            eps * avg.powi(l as i32 - 1)
        })
        .collect()
}

/// Pentagon of Code A's tabulated rates.
fn code_a_pentagon(p: f64) -> Pentagon {
    let h = 1.0 - p / 2.0;
    let rates = presets::code_a()
        .rates(CheckCount::Occupied)
        .unwrap()
        .with_source_rates(h, h);
    achievable_region_sd(&rates, p, true).unwrap()
}

fn ray_t(params: &DeParams, origin: (f64, f64), dir: (f64, f64), tol: f64) -> f64 {
    threshold_on_ray(origin, dir, params, tol).unwrap().t
}

const RAYS: [(f64, f64); 5] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.5), (0.5, 1.0)];

// ---------------------------------------------------------------- criteria

fn c1_closed_form_vs_grid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let chans: Vec<ChannelSet> = (0..50).map(|_| random_channels(&mut rng)).collect();
    let (mut worst_gap, mut worst_id, mut bad_order) = (0.0f64, 0.0f64, 0usize);
    for ch in &chans {
        for p in [0.0, 0.2, 0.3, 0.5, 1.0] {
            let opt = optimal_allocation(ch, p).unwrap();
            worst_gap = worst_gap.max((opt.rmax - grid_rmax(ch, p, 0.005)).abs());
            let f = cuts(ch, p, opt.alloc.theta1, opt.alloc.theta2, opt.rs1);
            let lib = df_rate_bounds(&opt.alloc, opt.rs1, ch, p).unwrap();
            for i in 0..5 {
                if f[i].is_finite() {
                    worst_id = worst_id.max((f[i] - lib.0[i]).abs());
                }
            }
            // f1 = f2 = f5 = Rmax; an infinite cut belongs to a source with Rs = 0
            for i in [0, 1, 4] {
                if f[i].is_finite() {
                    worst_id = worst_id.max((f[i] - opt.rmax).abs());
                }
            }
            if f[2] < f[0] - 1e-9 || f[3] < f[1] - 1e-9 {
                bad_order += 1;
            }
        }
    }
    outcome(
        worst_gap <= 0.01 && worst_id <= 1e-9 && bad_order == 0,
        format!(
            "250 cases: max |closed - grid| = {worst_gap:.2e} (<= 1e-2), identity error {worst_id:.1e} (<= 1e-9), f3<f1 or f4<f2 in {bad_order} cases"
        ),
    )
}

fn c2_lemma1() -> Outcome {
    let mut worst_lib = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for (l, ls, r) in [(4u32, 2u32, 8u32), (6, 2, 12)] {
        for eps in [0.2, 0.4] {
            worst_lib = worst_lib.max(lemma1_equivalence_check(l, ls, r, 100, 5, eps, 200).unwrap());
            // bilayer DE against the written-out single-layer recursion
            let ens = BilayerEnsemble::symmetric(l, ls, r, r / 2, 100, 5, r as usize).unwrap();
            let params = DeParams::uncorrelated(ens);
            let mut bi = DeState::initial(&ens, [eps, eps], params.correlation);
            let mut single = vec![eps; 100];
            for _ in 0..200 {
                bi = de_iterate_uncorrelated(&bi, eps, eps, &ens);
                single = single_layer_oracle(&single, l + ls, r, 5, eps);
                for u in 0..2 {
                    for prof in [&bi.p[u], &bi.psynd[u]] {
                        for (a, b) in prof.iter().zip(&single) {
                            worst_oracle = worst_oracle.max((a - b).abs());
                        }
                    }
                }
            }
        }
    }
    outcome(
        worst_lib <= 1e-12 && worst_oracle <= 1e-12,
        format!("max profile difference {worst_lib:.1e} (library check), {worst_oracle:.1e} (oracle recursion), limit 1e-12"),
    )
}

fn c3_corollary1() -> Outcome {
    let mut ts = Vec::new();
    for (l, ls, r) in [(3u32, 1u32, 8u32), (4, 2, 12), (6, 2, 16)] {
        let ens = BilayerEnsemble::symmetric(l, ls, r, r / 2, 100, 8, r as usize).unwrap();
        ts.push(ray_t(&DeParams::uncorrelated(ens), (0.0, 0.0), (1.0, 1.0), 1e-4));
    }
    let monotone = ts.windows(2).all(|p| p[1] >= p[0] - 1e-4);
    let last = ts[2];
    outcome(
        monotone && (0.5 - last).abs() <= 0.02,
        format!(
            "diagonal thresholds {:.5} / {:.5} / {:.5} for l+ls = 4/6/8; largest {:.5} vs 0.5",
            ts[0], ts[1], ts[2], last
        ),
    )
}

fn ray_gaps(params: &DeParams, pent: &Pentagon, tol: f64) -> (f64, String) {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for dir in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        let t = ray_t(params, (0.0, 0.0), dir, tol);
        let te = pent.ray_exit((0.0, 0.0), dir).unwrap();
        // distance along the ray, in units of the erasure probability
        let gap = (te - t).abs() * dir.0.max(dir.1);
        worst = worst.max(gap);
        parts.push(format!("{dir:?}: {t:.4} vs {te:.4}"));
    }
    (worst, parts.join(", "))
}

fn c4_region_gap_l600() -> Outcome {
    let ens = presets::code_a();
    let params = DeParams::correlated(ens, 0.0).with_config(DeConfig {
        max_iters: 400_000,
        ..DeConfig::default()
    });
    let (gap, detail) = ray_gaps(&params, &code_a_pentagon(0.0), 1e-3);
    outcome(gap <= 0.025, format!("L=600: max gap {gap:.4} (<= 0.025); {detail}"))
}

fn c4_region_gap_l100() -> Outcome {
    let ens = presets::code_a().with_chain_length(100);
    let params = DeParams::correlated(ens, 0.0);
    let pent = code_a_pentagon(0.0);
    let (gap, detail) = ray_gaps(&params, &pent, 1e-4);
    let step = 0.02;
    let map = region_scan(step, &params).unwrap();
    let outside = map
        .points()
        .iter()
        .filter(|&&(x, y)| !pent.contains((x - step).max(0.0), (y - step).max(0.0)))
        .count();
    outcome(
        gap <= 0.05 && outside == 0,
        format!(
            "L=100: max gap {gap:.4} (<= 0.05); {detail}; {} scanned decodable points, {outside} outside the pentagon by more than the grid step",
            map.points().len()
        ),
    )
}

fn enlarged(base: &DeParams, corr: &DeParams, tol: f64) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for dir in RAYS {
        let t0 = ray_t(base, (0.0, 0.0), dir, tol);
        let t1 = ray_t(corr, (0.0, 0.0), dir, tol);
        ok &= t1 > t0 + tol;
        parts.push(format!("{:.3}->{:.3}", t0, t1));
    }
    (ok, parts.join(" "))
}

fn c5_correlation_enlarges() -> Outcome {
    let a = presets::code_a().with_chain_length(100);
    let b = presets::code_b().with_chain_length(100);
    let (ok_a, da) = enlarged(&DeParams::correlated(a, 0.0), &DeParams::correlated(a, 0.3), 1e-3);
    let (ok_b, db) = enlarged(&DeParams::correlated(b, 0.0), &DeParams::correlated(b, 0.2), 1e-3);
    outcome(
        ok_a && ok_b,
        format!("ray thresholds p=0 -> p>0, Code A (p=0.3): {da}; Code B (p=0.2): {db}"),
    )
}

fn c6_window_sweep() -> Outcome {
    let b = presets::code_b().with_chain_length(100);
    let params = |w: usize| DeParams::correlated(b.with_window(w), 0.2);
    let diag = |w: usize| ray_t(&params(w), (0.0, 0.0), (1.0, 1.0), 1e-4);
    let (d4, d8, d10) = (diag(4), diag(8), diag(10));
    let inside = RAYS
        .iter()
        .filter(|d| d.0 != d.1)
        .all(|&d| ray_t(&params(4), (0.0, 0.0), d, 1e-3) < ray_t(&params(10), (0.0, 0.0), d, 1e-3));
    outcome(
        inside && d10 - d4 >= 0.02 && (d8 - d10).abs() <= 0.01,
        format!(
            "Code B p=0.2 diagonal: w=4 {d4:.4}, w=8 {d8:.4}, w=10 {d10:.4}; deficit {:.4} (>= 0.02), |w8 - w10| {:.4} (<= 0.01), w=4 inside w=10 on all rays: {inside}",
            d10 - d4,
            (d8 - d10).abs()
        ),
    )
}

/// Design rate from the expected number of non-empty checks, enumerated
/// position by position: a check at position `c` is empty when all `r`
/// sockets point outside the chain.
fn enumerated_rate(l: u32, r: u32, len: usize, w: usize) -> f64 {
    let mut checks = 0.0;
    for c in 0..len + w - 1 {
        let outside = (0..w).filter(|&k| c < k || c - k >= len).count();
        checks += 1.0 - (outside as f64 / w as f64).powi(r as i32);
    }
    1.0 - f64::from(l) / f64::from(r) * checks / len as f64
}

fn c7_table() -> Outcome {
    let rt = |r: f64| r / (1.0 - r);
    let mut worst = 0.0f64;
    let mut mu_exact = true;
    let mut parts = Vec::new();
    for (name, ens, table) in [
        ("A", presets::code_a(), presets::CODE_A_TABLE),
        ("B", presets::code_b(), presets::CODE_B_TABLE),
    ] {
        let rates = ens.rates(CheckCount::Occupied).unwrap();
        // the realized rate of a sampled instance is the independent count
        let inst = sample_instance(&ens, 7).unwrap();
        let realized = |u: usize| 1.0 - inst.h[u].n_rows() as f64 / inst.n(u) as f64;
        let computed = [rates.rtilde1(), rates.rtilde2()];
        for u in 0..2 {
            let d = ens.first[u];
            let oracle = rt(enumerated_rate(d.l, d.r, ens.chain_length, ens.window));
            worst = worst.max((computed[u] - table[u]).abs());
            worst = worst.max((oracle - table[u]).abs());
            worst = worst.max((rt(realized(u)) - table[u]).abs());
        }
        mu_exact &= ens.mu(0) == table[4] && ens.mu(1) == table[5];
        parts.push(format!(
            "Code {name}: Rtilde = ({:.4}, {:.4}) sampled ({:.4}, {:.4}) table ({}, {}), mu = ({}, {})",
            rates.rtilde1(),
            rates.rtilde2(),
            rt(realized(0)),
            rt(realized(1)),
            table[0],
            table[1],
            ens.mu(0),
            ens.mu(1)
        ));
    }
    outcome(
        worst <= 0.01 && mu_exact,
        format!("max deviation {worst:.4} (<= 0.01); {}", parts.join("; ")),
    )
}

fn c8_monte_carlo() -> Outcome {
    let p = 0.3;
    let trials = 1000;
    let ens = presets::code_a().with_chain_length(100);
    let params = DeParams::correlated(ens, p);
    let inst = sample_instance(&ens, 11).unwrap();
    let rate = |e1: f64, e2: f64, point: u64| -> f64 {
        let ch = ChannelSet::new(0.3, 0.3, e1.min(1.0), e2.min(1.0), 0.0).unwrap();
        let row = ber_sweep(&inst, &[ch], p, trials, 1000 + point, true).unwrap()[0];
        row.ber_u1.max(row.ber_u2)
    };
    type Sweep = (&'static str, (f64, f64), Box<dyn Fn(f64) -> (f64, f64)>);
    let sweeps: [Sweep; 3] = [
        ("eps_s2d = eps_s1d", (0.0, 0.0), Box::new(|t| (t, t))),
        ("eps_s2d = 0.4", (0.0, 0.4), Box::new(|t| (t, 0.4))),
        ("eps_s2d = 0", (0.0, 0.0), Box::new(|t| (t, 0.0))),
    ];
    let dirs = [(1.0, 1.0), (1.0, 0.0), (1.0, 0.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (s, ((name, origin, at), dir)) in sweeps.iter().zip(dirs).enumerate() {
        let thr = ray_t(&params, *origin, dir, 1e-4);
        let seed = |i: u64| (s as u64) * 100 + i;
        let below = {
            let (a, b) = at(thr - 0.05);
            rate(a, b, seed(0))
        };
        let (mut lo, mut hi) = (thr - 0.05, thr + 0.05);
        let top = {
            let (a, b) = at(hi);
            rate(a, b, seed(1))
        };
        // widen the bracket downwards until it holds the crossing
        let mut low_rate = below;
        let mut extra = 0;
        while low_rate >= 0.1 && lo > thr - 0.2 {
            hi = lo;
            lo -= 0.05;
            extra += 1;
            let (a, b) = at(lo);
            low_rate = rate(a, b, seed(20 + extra));
        }
        let mid = if top < 0.1 || low_rate >= 0.1 {
            f64::INFINITY
        } else {
            for i in 0..5 {
                let m = 0.5 * (lo + hi);
                let (a, b) = at(m);
                if rate(a, b, seed(2 + i)) < 0.1 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            0.5 * (lo + hi)
        };
        let pass = below < 1e-3 && (mid - thr).abs() <= 0.05;
        ok &= pass;
        parts.push(format!(
            "{name}: DE {thr:.4}, crossing {mid:.4}, rate at thr-0.05 {below:.1e}"
        ));
    }
    outcome(ok, format!("{trials} trials/point; {}", parts.join("; ")))
}

fn small_instance(seed: u64) -> CodeInstance {
    let ens = BilayerEnsemble::symmetric(3, 1, 6, 3, 8, 3, 12).unwrap();
    sample_instance(&ens, seed).unwrap()
}

fn c9_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    // peeling confluence: 100 random orders agree with FIFO
    let inst = small_instance(1);
    let h = assemble_relay(&inst, &vec![0; inst.k()]).unwrap();
    let n = h.n_cols();
    let mut replays = 0;
    for _ in 0..10 {
        let erased: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < 0.45).collect();
        let zeros = vec![0u8; n];
        let rhs = vec![0u8; h.n_rows()];
        let fifo = peel(&h, &erased, &zeros, &rhs).unwrap();
        for k in 0..10 {
            let other =
                peel_with_order(&h, &erased, &zeros, &rhs, PeelOrder::Random(rng.gen::<u64>() ^ k)).unwrap();
            replays += 1;
            if other.residual != fifo.residual || other.values != fifo.values {
                failures.push("confluence");
            }
        }
    }

    // peeling against dense GF(2) elimination, random matrices <= 200 columns
    for _ in 0..40 {
        let cols = rng.gen_range(20..=200);
        let rows = rng.gen_range(cols / 4..cols);
        let adj: Vec<Vec<usize>> = (0..rows)
            .map(|_| (0..rng.gen_range(2..6)).map(|_| rng.gen_range(0..cols)).collect())
            .collect();
        let h = SparseBinaryMatrix::new(cols, adj).unwrap();
        let x = DenseGf2::from_sparse(&h).random_null_vector(&mut rng);
        let erased: Vec<usize> = (0..cols).filter(|_| rng.gen::<f64>() < 0.4).collect();
        let mut values = x.clone();
        for &e in &erased {
            values[e] = 0;
        }
        let rhs = vec![0u8; rows];
        let out = peel(&h, &erased, &values, &rhs).unwrap();
        let ml: std::collections::HashMap<usize, u8> =
            ml_erasure_decode(&h, &erased, &values, &rhs).unwrap().into_iter().collect();
        let wrong_value = out.recovered.iter().any(|&c| out.values[c] != x[c]);
        let not_ml = out.recovered.iter().any(|&c| ml.get(&c) != Some(&x[c]));
        if wrong_value || not_ml {
            failures.push("gf2 oracle");
        }
    }

    // all-zero vs random codeword: same residual, correct values elsewhere
    for trial in 0..20u64 {
        let inst = small_instance(100 + trial);
        let prep = PreparedInstance::new(&inst).unwrap();
        let ch = ChannelSet::new(0.15, 0.15, 0.5, 0.55, 0.0).unwrap();
        let input = draw_trial_input(&inst, &ch, 0.3, trial).unwrap();
        let relay = assemble_relay(&inst, &input.z).unwrap();
        let x = DenseGf2::from_sparse(&relay).random_null_vector(&mut rng);
        let n1 = inst.n(0);
        let cw = [x[..n1].to_vec(), x[n1..].to_vec()];
        let zero = decode_trial(&prep, &input, None, true).unwrap();
        let rand = decode_trial(&prep, &input, Some(&cw), true).unwrap();
        let residual: HashSet<usize> = rand.dest_residual.iter().copied().collect();
        let values_ok = rand.outcome.relay_success
            && (0..x.len()).all(|c| residual.contains(&c) || rand.dest_values[c] == x[c]);
        if zero.outcome != rand.outcome
            || zero.dest_residual != rand.dest_residual
            || (rand.outcome.relay_success && !values_ok)
        {
            failures.push("codeword equivalence");
        }
    }

    // DE monotonicity and down-closedness at random points
    let ens = BilayerEnsemble::symmetric(3, 1, 8, 4, 30, 4, 8).unwrap();
    for params in [DeParams::uncorrelated(ens), DeParams::correlated(ens, 0.3)] {
        for _ in 0..30 {
            let a = [rng.gen::<f64>(), rng.gen::<f64>()];
            let b = [a[0] * rng.gen::<f64>(), a[1] * rng.gen::<f64>()];
            let ra = run_de(&params, a).unwrap();
            let rb = run_de(&params, b).unwrap();
            if (ra.converged && !rb.converged)
                || rb.h[0] > ra.h[0] + 1e-9
                || rb.h[1] > ra.h[1] + 1e-9
            {
                failures.push("de monotonicity");
            }
        }
    }

    // byte-identical CSV across repeated runs and thread counts
    let inst = small_instance(5);
    let pts: Vec<ChannelSet> = [0.3, 0.5, 0.7]
        .iter()
        .map(|&e| ChannelSet::new(0.1, 0.1, e, e, 0.0).unwrap())
        .collect();
    let csv = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let rows = ber_sweep(&inst, &pts, 0.2, 40, 77, true).unwrap();
                let mut buf = Vec::new();
                write_sweep_csv(&mut buf, &rows, &sweep_metadata(&inst, 77, true)).unwrap();
                buf
            })
    };
    let first = csv(1);
    if first != csv(1) || first != csv(3) {
        failures.push("csv determinism");
    }

    failures.dedup();
    outcome(
        failures.is_empty(),
        format!(
            "{replays} confluence replays, 40 GF(2) comparisons, 20 random-codeword blocks, 60 DE spot checks, 3 CSV runs; failed: {failures:?}"
        ),
    )
}

fn main() {
    let only: Option<HashSet<String>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').map(|x| x.trim().to_string()).collect());
    let criteria: [(&str, &str, fn() -> Outcome); 10] = [
        ("1", "closed-form allocation vs grid oracle", c1_closed_form_vs_grid),
        ("2", "bilayer / single-layer DE equivalence", c2_lemma1),
        ("3", "diagonal threshold trend toward 0.5", c3_corollary1),
        ("4", "region gap at L=600", c4_region_gap_l600),
        ("4", "region gap and containment at L=100", c4_region_gap_l100),
        ("5", "correlation enlarges the DE region", c5_correlation_enlarges),
        ("6", "coupling window sweep", c6_window_sweep),
        ("7", "tabulated code rates", c7_table),
        ("8", "Monte-Carlo waterfall vs DE", c8_monte_carlo),
        ("9", "property suites", c9_properties),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(id)) {
            continue;
        }
        let t0 = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {id}: {name} ({:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
