//! Density evolution of the bilayer spatially-coupled ensemble on erasure
//! channels, with and without correlation between the two sources, plus
//! the threshold and region searches built on top of it.

use rayon::prelude::*;

use crate::ensemble::{BilayerEnsemble, Degrees};
use crate::error::DeError;

/// How the destination sees the systematic bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    /// Every code bit goes through its erasure channel.
    None,
    /// Systematic bits (a fraction `gamma[i]` of user `i`'s code bits) are
    /// punctured; with probability `p` a systematic bit is tied to the
    /// corresponding bit of the other user.
    Punctured { p: f64, gamma: [f64; 2] },
}

/// Stopping rule of a density-evolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    /// Decoding succeeds once every message is below this value.
    pub tol: f64,
    /// The run is stuck once no message moves by more than this value.
    pub stall_tol: f64,
    pub max_iters: usize,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            stall_tol: 1e-10,
            max_iters: 50_000,
        }
    }
}

/// Everything but the channel parameters of a density-evolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeParams {
    pub ensemble: BilayerEnsemble,
    pub correlation: Correlation,
    pub config: DeConfig,
}

impl DeParams {
    /// Independent sources, nothing punctured.
    pub fn uncorrelated(ensemble: BilayerEnsemble) -> Self {
        Self {
            ensemble,
            correlation: Correlation::None,
            config: DeConfig::default(),
        }
    }

    /// Punctured systematic bits with correlation `p`. The systematic
    /// fraction of each user is the asymptotic code rate `1 - l/r`.
    pub fn correlated(ensemble: BilayerEnsemble, p: f64) -> Self {
        let gamma = [1.0 - ensemble.first[0].load(), 1.0 - ensemble.first[1].load()];
        Self {
            ensemble,
            correlation: Correlation::Punctured { p, gamma },
            config: DeConfig::default(),
        }
    }

    pub fn with_config(mut self, config: DeConfig) -> Self {
        self.config = config;
        self
    }

    /// The relay decodes the first-layer codes only.
    pub fn relay(&self) -> Self {
        Self {
            ensemble: self.ensemble.first_layer_only(),
            ..*self
        }
    }

    fn validate(&self) -> Result<(), DeError> {
        self.ensemble.validate()?;
        if let Correlation::Punctured { p, gamma } = self.correlation {
            if !(0.0..=1.0).contains(&p) || gamma.iter().any(|g| !(0.0..=1.0).contains(g)) {
                return Err(DeError::Parameters(format!(
                    "correlation p = {p} and systematic fractions {gamma:?} must lie in [0, 1]"
                )));
            }
        }
        if !(self.config.tol > 0.0 && self.config.stall_tol > 0.0) {
            return Err(DeError::Parameters("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Erasure-probability profiles over the positions `1..=L` of the chain
/// (stored 0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct DeState {
    pub iteration: usize,
    /// Variable-to-check messages into the first layer.
    pub p: [Vec<f64>; 2],
    /// Variable-to-check messages into the syndrome layer.
    pub psynd: [Vec<f64>; 2],
    /// Erasure probability of a bit given only the code graph.
    pub pcorr: [Vec<f64>; 2],
}

impl DeState {
    /// Every message at its channel value; `pcorr` starts fully erased.
    pub fn initial(ensemble: &BilayerEnsemble, eps: [f64; 2], correlation: Correlation) -> Self {
        let len = ensemble.chain_length;
        let pref = |u: usize| match correlation {
            Correlation::None => eps[u],
            Correlation::Punctured { gamma, .. } => gamma[u] + (1.0 - gamma[u]) * eps[u],
        };
        let synd = |u: usize| {
            if ensemble.synd[u].is_empty() {
                vec![0.0; len]
            } else {
                vec![pref(u); len]
            }
        };
        Self {
            iteration: 0,
            p: [vec![pref(0); len], vec![pref(1); len]],
            psynd: [synd(0), synd(1)],
            pcorr: [vec![1.0; len], vec![1.0; len]],
        }
    }

    /// Largest message into either layer.
    pub fn max_message(&self) -> f64 {
        self.p
            .iter()
            .chain(self.psynd.iter())
            .flat_map(|v| v.iter())
            .fold(0.0, |a, &b| a.max(b))
    }

    /// Largest componentwise change relative to `other`.
    pub fn max_change(&self, other: &DeState) -> f64 {
        let pairs = self
            .p
            .iter()
            .zip(other.p.iter())
            .chain(self.psynd.iter().zip(other.psynd.iter()))
            .chain(self.pcorr.iter().zip(other.pcorr.iter()));
        pairs
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// EXIT values `h_i = (1/L) sum_t m_t`, with `m_t` the erasure
    /// probability of a bit given only the code graph.
    pub fn exit_values(&self) -> [f64; 2] {
        let mean = |v: &Vec<f64>| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        [mean(&self.pcorr[0]), mean(&self.pcorr[1])]
    }
}

/// `out[c] = (1/w) sum_{k<w} v[c-k]` over check positions `c < L+w-1`,
/// with `v` zero outside the chain.
fn to_checks(v: &[f64], window: usize, out: &mut [f64]) {
    let len = v.len();
    let w = window as f64;
    for (c, o) in out.iter_mut().enumerate() {
        let lo = c.saturating_sub(window - 1);
        let hi = c.min(len - 1);
        let mut s = 0.0;
        for x in &v[lo..=hi] {
            s += x;
        }
        *o = s / w;
    }
}

/// `out[t] = (1/w) sum_{j<w} q[t+j]` over variable positions `t < L`.
fn to_variables(q: &[f64], window: usize, out: &mut [f64]) {
    let w = window as f64;
    for (t, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for x in &q[t..t + window] {
            s += x;
        }
        *o = s / w;
    }
}

fn powi(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

/// Scratch buffers of one density-evolution run.
#[derive(Debug, Clone)]
struct Workspace {
    checks: Vec<f64>,
    q: Vec<f64>,
    synd_in: [Vec<f64>; 2],
    q_avg: [Vec<f64>; 2],
    qs_avg: [Vec<f64>; 2],
}

impl Workspace {
    fn new(len: usize, window: usize) -> Self {
        let nc = len + window - 1;
        Self {
            checks: vec![0.0; nc],
            q: vec![0.0; nc],
            synd_in: [vec![0.0; nc], vec![0.0; nc]],
            q_avg: [vec![0.0; len], vec![0.0; len]],
            qs_avg: [vec![1.0; len], vec![1.0; len]],
        }
    }
}

/// Writes the update of `state` into `next` and returns the largest message
/// of `next` together with the largest change from `state`.
fn step_into(
    state: &DeState,
    next: &mut DeState,
    ws: &mut Workspace,
    eps: [f64; 2],
    correlation: Correlation,
    ens: &BilayerEnsemble,
) -> (f64, f64) {
    let len = ens.chain_length;
    let w = ens.window;
    debug_assert!(state.p.iter().all(|v| v.len() == len));

    for u in 0..2 {
        let r = ens.first[u].r;
        to_checks(&state.p[u], w, &mut ws.checks);
        for (q, &x) in ws.q.iter_mut().zip(ws.checks.iter()) {
            *q = 1.0 - powi(1.0 - x, r - 1);
        }
        to_variables(&ws.q, w, &mut ws.q_avg[u]);
    }

    let layered = [!ens.synd[0].is_empty(), !ens.synd[1].is_empty()];
    for u in 0..2 {
        if layered[u] {
            to_checks(&state.psynd[u], w, &mut ws.synd_in[u]);
        }
    }
    for u in 0..2 {
        if !layered[u] {
            continue;
        }
        let v = 1 - u;
        let rs_own = ens.synd[u].r;
        let rs_other = if layered[v] { ens.synd[v].r } else { 0 };
        for c in 0..ws.q.len() {
            let other = if layered[v] { ws.synd_in[v][c] } else { 0.0 };
            ws.q[c] = 1.0 - powi(1.0 - ws.synd_in[u][c], rs_own - 1) * powi(1.0 - other, rs_other);
        }
        to_variables(&ws.q, w, &mut ws.qs_avg[u]);
    }

    let mut max_msg: f64 = 0.0;
    let mut change: f64 = 0.0;
    for u in 0..2 {
        let Degrees { l, .. } = ens.first[u];
        let ls = ens.synd[u].l;
        let other_corr = &state.pcorr[1 - u];
        for t in 0..len {
            let pref = match correlation {
                Correlation::None => eps[u],
                Correlation::Punctured { p, gamma } => {
                    gamma[u] * ((1.0 - p) + p * other_corr[t]) + (1.0 - gamma[u]) * eps[u]
                }
            };
            let qq = ws.q_avg[u][t];
            let qs = if layered[u] { ws.qs_avg[u][t] } else { 1.0 };
            let qs_all = powi(qs, ls);
            let p_new = pref * powi(qq, l - 1) * qs_all;
            let ps_new = if ls > 0 {
                pref * powi(qq, l) * powi(qs, ls - 1)
            } else {
                0.0
            };
            let pc_new = powi(qq, l) * qs_all;
            change = change
                .max((p_new - state.p[u][t]).abs())
                .max((ps_new - state.psynd[u][t]).abs())
                .max((pc_new - state.pcorr[u][t]).abs());
            max_msg = max_msg.max(p_new).max(ps_new);
            next.p[u][t] = p_new;
            next.psynd[u][t] = ps_new;
            next.pcorr[u][t] = pc_new;
        }
    }
    next.iteration = state.iteration + 1;
    (max_msg, change)
}

fn step(
    state: &DeState,
    eps: [f64; 2],
    correlation: Correlation,
    ens: &BilayerEnsemble,
) -> DeState {
    let mut next = state.clone();
    let mut ws = Workspace::new(ens.chain_length, ens.window);
    step_into(state, &mut next, &mut ws, eps, correlation, ens);
    next
}

/// One flooding update of the destination decoder for independent sources.
pub fn de_iterate_uncorrelated(
    state: &DeState,
    eps_s1d: f64,
    eps_s2d: f64,
    ensemble: &BilayerEnsemble,
) -> DeState {
    step(state, [eps_s1d, eps_s2d], Correlation::None, ensemble)
}

/// One flooding update with punctured systematic bits and correlation `p`;
/// `gamma_i` is the systematic fraction of user `i`.
pub fn de_iterate_correlated(
    state: &DeState,
    eps_s1d: f64,
    eps_s2d: f64,
    p: f64,
    gamma: [f64; 2],
    ensemble: &BilayerEnsemble,
) -> Result<DeState, DeError> {
    if ensemble.synd.iter().all(|d| !d.is_empty()) {
        ensemble.check_alignment()?;
    }
    Ok(step(
        state,
        [eps_s1d, eps_s2d],
        Correlation::Punctured { p, gamma },
        ensemble,
    ))
}

/// Outcome of a density-evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    /// Every message fell below the tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// EXIT values; zero when converged.
    pub h: [f64; 2],
    pub state: DeState,
}

impl DeResult {
    pub fn decodable(&self) -> bool {
        self.converged
    }
}

fn check_eps(eps: [f64; 2]) -> Result<(), DeError> {
    if eps.iter().all(|e| (0.0..=1.0).contains(e)) {
        Ok(())
    } else {
        Err(DeError::Parameters(format!(
            "erasure probabilities {eps:?} must lie in [0, 1]"
        )))
    }
}

/// Iterates to a fixed point: success once every message is below
/// `config.tol`, stuck once nothing moves by more than `config.stall_tol`.
pub fn run_de(params: &DeParams, eps: [f64; 2]) -> Result<DeResult, DeError> {
    params.validate()?;
    check_eps(eps)?;
    let ens = &params.ensemble;
    let cfg = params.config;
    let mut state = DeState::initial(ens, eps, params.correlation);
    let mut next = state.clone();
    let mut ws = Workspace::new(ens.chain_length, ens.window);
    for _ in 0..cfg.max_iters {
        let (max_msg, change) = step_into(&state, &mut next, &mut ws, eps, params.correlation, ens);
        std::mem::swap(&mut state, &mut next);
        if max_msg < cfg.tol {
            return Ok(DeResult {
                converged: true,
                iterations: state.iteration,
                h: [0.0, 0.0],
                state,
            });
        }
        if change < cfg.stall_tol {
            return Ok(DeResult {
                converged: false,
                iterations: state.iteration,
                h: state.exit_values(),
                state,
            });
        }
    }
    Err(DeError::NonConvergence {
        iterations: cfg.max_iters,
        last: Box::new(state),
    })
}

/// Decodability at one channel point; runs that never settle count as
/// failures.
pub fn is_decodable(params: &DeParams, eps: [f64; 2]) -> Result<bool, DeError> {
    match run_de(params, eps) {
        Ok(r) => Ok(r.converged),
        Err(DeError::NonConvergence { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Largest decodable step along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayThreshold {
    pub t: f64,
    /// Largest `t` keeping the point inside the unit square.
    pub t_max: f64,
    /// False when the origin itself is not decodable (then `t = 0`).
    pub origin_decodable: bool,
}

impl RayThreshold {
    pub fn point(&self, origin: (f64, f64), direction: (f64, f64)) -> (f64, f64) {
        (origin.0 + self.t * direction.0, origin.1 + self.t * direction.1)
    }
}

/// Bisects for the largest `t` (to `bisect_tol`) such that
/// `origin + t direction` is decodable. Relies on the decodable set being
/// closed under lowering either erasure probability.
pub fn threshold_on_ray(
    origin: (f64, f64),
    direction: (f64, f64),
    params: &DeParams,
    bisect_tol: f64,
) -> Result<RayThreshold, DeError> {
    let (dx, dy) = direction;
    if dx < 0.0 || dy < 0.0 || dx + dy <= 0.0 {
        return Err(DeError::Parameters(format!(
            "ray direction {direction:?} must be componentwise >= 0 and nonzero"
        )));
    }
    if !(bisect_tol > 0.0) {
        return Err(DeError::Parameters("bisection tolerance must be positive".into()));
    }
    check_eps([origin.0, origin.1])?;
    let limit = |o: f64, d: f64| if d > 0.0 { (1.0 - o) / d } else { f64::INFINITY };
    let t_max = limit(origin.0, dx).min(limit(origin.1, dy));
    let at = |t: f64| [(origin.0 + t * dx).min(1.0), (origin.1 + t * dy).min(1.0)];

    if !is_decodable(params, at(0.0))? {
        return Ok(RayThreshold {
            t: 0.0,
            t_max,
            origin_decodable: false,
        });
    }
    if is_decodable(params, at(t_max))? {
        return Ok(RayThreshold {
            t: t_max,
            t_max,
            origin_decodable: true,
        });
    }
    let (mut lo, mut hi) = (0.0, t_max);
    while hi - lo > bisect_tol {
        let mid = 0.5 * (lo + hi);
        if is_decodable(params, at(mid))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RayThreshold {
        t: lo,
        t_max,
        origin_decodable: true,
    })
}

/// Decodable points of the grid `{0, step, 2 step, ...}^2` (the last grid
/// value is clipped to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub step: f64,
    /// Grid values along each axis.
    pub axis: Vec<f64>,
    /// For each `eps1` column, the number of decodable `eps2` values
    /// counted from zero.
    pub heights: Vec<usize>,
}

impl RegionMap {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        j < self.heights[i]
    }

    /// All decodable grid points `(eps1, eps2)`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (i, &h) in self.heights.iter().enumerate() {
            for j in 0..h {
                out.push((self.axis[i], self.axis[j]));
            }
        }
        out
    }

    /// Boundary points: the highest decodable `eps2` in every non-empty column.
    pub fn boundary(&self) -> Vec<(f64, f64)> {
        self.heights
            .iter()
            .enumerate()
            .filter(|(_, &h)| h > 0)
            .map(|(i, &h)| (self.axis[i], self.axis[h - 1]))
            .collect()
    }
}

/// Grid values `0, step, ...` up to 1 inclusive.
pub fn grid_axis(step: f64) -> Vec<f64> {
    let n = (1.0 / step - 1e-9).ceil() as usize;
    (0..=n).map(|i| (i as f64 * step).min(1.0)).collect()
}

/// Scans the decodable region on a square grid. Each column is searched by
/// bisection over `eps2`, which is exact for a down-closed region; columns
/// run in parallel.
pub fn region_scan(grid_step: f64, params: &DeParams) -> Result<RegionMap, DeError> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(DeError::Parameters(format!(
            "grid step {grid_step} must lie in (0, 0.1]"
        )));
    }
    params.validate()?;
    let axis = grid_axis(grid_step);
    let heights = axis
        .par_iter()
        .map(|&e1| -> Result<usize, DeError> {
            // invariant: points below `lo` decodable, at `hi` and above not
            let (mut lo, mut hi) = (0usize, axis.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if is_decodable(params, [e1, axis[mid]])? {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RegionMap {
        step: grid_step,
        axis,
        heights,
    })
}

/// One point of an EXIT surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitPoint {
    pub eps1: f64,
    pub eps2: f64,
    pub h: [f64; 2],
    /// False when the run hit the iteration cap; `h` then comes from the
    /// last state.
    pub settled: bool,
}

/// EXIT values `h1, h2` over the grid `eps1 x eps2`.
pub fn exit_surface(
    params: &DeParams,
    eps1: &[f64],
    eps2: &[f64],
) -> Result<Vec<ExitPoint>, DeError> {
    let grid: Vec<(f64, f64)> = eps1
        .iter()
        .flat_map(|&a| eps2.iter().map(move |&b| (a, b)))
        .collect();
    grid.par_iter()
        .map(|&(a, b)| match run_de(params, [a, b]) {
            Ok(r) => Ok(ExitPoint {
                eps1: a,
                eps2: b,
                h: r.h,
                settled: true,
            }),
            Err(DeError::NonConvergence { last, .. }) => Ok(ExitPoint {
                eps1: a,
                eps2: b,
                h: last.exit_values(),
                settled: false,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Density evolution of the single-user `(l, r, L, w)` ensemble.
pub fn single_layer_step(p: &[f64], l: u32, r: u32, window: usize, eps: f64) -> Vec<f64> {
    let mut q = vec![0.0; p.len() + window - 1];
    to_checks(p, window, &mut q);
    for x in q.iter_mut() {
        *x = 1.0 - powi(1.0 - *x, r - 1);
    }
    let mut avg = vec![0.0; p.len()];
    to_variables(&q, window, &mut avg);
    avg.into_iter().map(|a| eps * powi(a, l - 1)).collect()
}

/// Whether the single-user ensemble decodes at erasure probability `eps`.
pub fn single_layer_decodable(
    l: u32,
    r: u32,
    chain_length: usize,
    window: usize,
    eps: f64,
    config: &DeConfig,
) -> bool {
    let mut p = vec![eps; chain_length];
    for _ in 0..config.max_iters {
        let next = single_layer_step(&p, l, r, window, eps);
        let change = next
            .iter()
            .zip(p.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        p = next;
        if p.iter().all(|&x| x < config.tol) {
            return true;
        }
        if change < config.stall_tol {
            return false;
        }
    }
    false
}

/// Threshold of the single-user ensemble by bisection on `eps`.
pub fn single_layer_threshold(
    l: u32,
    r: u32,
    chain_length: usize,
    window: usize,
    bisect_tol: f64,
) -> f64 {
    let cfg = DeConfig::default();
    let (mut lo, mut hi) = (0.0, 1.0);
    if single_layer_decodable(l, r, chain_length, window, hi, &cfg) {
        return hi;
    }
    while hi - lo > bisect_tol {
        let mid = 0.5 * (lo + hi);
        if single_layer_decodable(l, r, chain_length, window, mid, &cfg) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Runs the symmetric bilayer ensemble `(l, ls, r, r/2)` and the single-layer
/// `(l + ls, r)` ensemble side by side and returns the largest difference
/// between any bilayer message and the single-layer message over `iters`
/// iterations.
pub fn lemma1_equivalence_check(
    l: u32,
    ls: u32,
    r: u32,
    chain_length: usize,
    window: usize,
    eps: f64,
    iters: usize,
) -> Result<f64, DeError> {
    if r % 2 != 0 {
        return Err(DeError::Parameters(format!(
            "syndrome check degree r/2 needs an even r, got {r}"
        )));
    }
    let ens = BilayerEnsemble::symmetric(
        l,
        ls,
        r,
        r / 2,
        chain_length,
        window,
        r as usize,
    )?;
    let params = DeParams::uncorrelated(ens);
    check_eps([eps, eps])?;
    let mut bi = DeState::initial(&ens, [eps, eps], params.correlation);
    let mut single = vec![eps; chain_length];
    let mut worst: f64 = 0.0;
    for _ in 0..iters {
        bi = step(&bi, [eps, eps], Correlation::None, &ens);
        single = single_layer_step(&single, l + ls, r, window, eps);
        for u in 0..2 {
            let layers = if ls > 0 {
                vec![&bi.p[u], &bi.psynd[u]]
            } else {
                vec![&bi.p[u]]
            };
            for prof in layers {
                for (a, b) in prof.iter().zip(single.iter()) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::presets;

    fn small(l: u32, ls: u32, r: u32, rs: u32) -> BilayerEnsemble {
        BilayerEnsemble::symmetric(l, ls, r, rs, 20, 4, 60).unwrap()
    }

    #[test]
    fn erasure_free_channels_decode_at_once() {
        let params = DeParams::uncorrelated(small(4, 2, 8, 4));
        let res = run_de(&params, [0.0, 0.0]).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.h, [0.0, 0.0]);
        let one = de_iterate_uncorrelated(
            &DeState::initial(&params.ensemble, [0.0, 0.0], Correlation::None),
            0.0,
            0.0,
            &params.ensemble,
        );
        assert_eq!(one.max_message(), 0.0);
    }

    #[test]
    fn fully_erased_channels_do_not_decode() {
        let params = DeParams::uncorrelated(small(4, 2, 8, 4));
        let res = run_de(&params, [1.0, 1.0]).unwrap();
        assert!(!res.converged);
        assert!(res.h[0] > 0.5 && res.h[1] > 0.5);
    }

    #[test]
    fn correlation_prefactor_limits() {
        let ens = small(4, 2, 8, 4);
        let mut state = DeState::initial(&ens, [0.4, 0.4], Correlation::None);
        state.pcorr = [vec![0.0; 20], vec![0.0; 20]];
        state.p = [vec![1.0; 20], vec![1.0; 20]];
        state.psynd = state.p.clone();
        // far from the boundary all check messages are 1, so the new message
        // equals the prefactor
        let next = de_iterate_correlated(&state, 0.4, 0.4, 1.0, [0.5, 0.5], &ens).unwrap();
        assert!((next.p[0][10] - 0.5 * 0.4).abs() < 1e-15);
        let next = de_iterate_correlated(&state, 0.4, 0.4, 0.0, [0.5, 0.5], &ens).unwrap();
        assert!((next.p[0][10] - (0.5 + 0.5 * 0.4)).abs() < 1e-15);
    }

    #[test]
    fn misaligned_ensemble_rejected() {
        let mut ens = small(4, 2, 8, 4);
        ens.synd[1] = Degrees::new(1, 4);
        let state = DeState::initial(&ens, [0.3, 0.3], Correlation::None);
        assert!(de_iterate_correlated(&state, 0.3, 0.3, 0.2, [0.5, 0.5], &ens).is_err());
    }

    #[test]
    fn lemma1_small() {
        let d = lemma1_equivalence_check(4, 2, 8, 30, 4, 0.3, 200).unwrap();
        assert!(d <= 1e-12, "{d}");
        assert_eq!(lemma1_equivalence_check(4, 0, 8, 30, 4, 0.3, 50).unwrap(), 0.0);
        assert!(lemma1_equivalence_check(4, 2, 9, 30, 4, 0.3, 5).is_err());
    }

    #[test]
    fn ray_bounds() {
        let params = DeParams::uncorrelated(small(3, 1, 8, 4));
        let r = threshold_on_ray((0.0, 0.0), (1.0, 1.0), &params, 1e-3).unwrap();
        assert!(r.origin_decodable);
        assert!(r.t > 0.3 && r.t < 0.6, "{}", r.t);
        assert!(threshold_on_ray((0.0, 0.0), (-1.0, 1.0), &params, 1e-3).is_err());
        let bad = threshold_on_ray((1.0, 1.0), (1.0, 0.0), &params, 1e-3).unwrap();
        assert!(!bad.origin_decodable);
        assert_eq!(bad.t, 0.0);
    }

    #[test]
    fn region_is_down_closed_and_nonempty() {
        let params = DeParams::correlated(presets::code_a().with_chain_length(20), 0.3);
        let map = region_scan(0.1, &params).unwrap();
        assert!(map.contains(0, 0));
        assert!(!map.contains(10, 10));
        for w in map.heights.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn grid_axis_reaches_one() {
        let a = grid_axis(0.1);
        assert_eq!(a.len(), 11);
        assert_eq!(*a.last().unwrap(), 1.0);
        assert_eq!(grid_axis(0.03).last(), Some(&1.0));
    }
}
