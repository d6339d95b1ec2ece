//! Rate design for the bilayer construction: from link capacities to
//! component-code rates and the syndrome split, and from rates to integer
//! node degrees.

use num::integer::{gcd, lcm};

use crate::ensemble::{BilayerEnsemble, Degrees};
use crate::error::DesignError;
use crate::theory::{
    optimal_allocation_with, source_entropies, ChannelSet, RateBundle, TieBreak, TimeAllocation,
};

const EPS: f64 = 1e-12;

/// Largest accepted gap between a fitted rate and its target.
pub const FIT_TOLERANCE: f64 = 0.02;

/// Inputs of a rate design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub channels: ChannelSet,
    pub p: f64,
    /// Puncture all systematic bits. Forced on whenever `p > 0`.
    pub punctured: bool,
    /// Choice of `Rs1` when the optimum is flat along the corner segment.
    pub tie_break: TieBreak,
}

impl DesignSpec {
    pub fn new(channels: ChannelSet, p: f64) -> Self {
        Self {
            channels,
            p,
            punctured: p > 0.0,
            tie_break: TieBreak::default(),
        }
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn punctured(mut self, punctured: bool) -> Self {
        self.punctured = punctured;
        self
    }

    /// Whether the design punctures systematic bits.
    pub fn is_punctured(&self) -> bool {
        self.punctured || self.p > 0.0
    }
}

fn check_syndrome_rate(which: &'static str, value: f64) -> Result<f64, DesignError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(DesignError::InfeasibleDesign { which, value })
    }
}

fn no_relay_needed(ch: &ChannelSet) -> bool {
    (ch.c_s1r() - ch.c_s1d()).abs() <= EPS && (ch.c_s2r() - ch.c_s2d()).abs() <= EPS
}

/// Syndrome split `mu1` from `mu = mu1/mu2 = (C_s2r/C_s1r)(C_s1r - C_s1d)/(C_s2r - C_s2d)`.
fn split(ch: &ChannelSet) -> (f64, f64) {
    let num = (ch.c_s1r() - ch.c_s1d()) * ch.c_s2r();
    let other = (ch.c_s2r() - ch.c_s2d()) * ch.c_s1r();
    let mu1 = num / (num + other);
    (mu1, 1.0 - mu1)
}

/// Design for independent sources with unpunctured codes: the source codes
/// run at the source-relay capacities and the syndrome codes supply exactly
/// the missing `C_sir - C_sid` per source.
pub fn design_uncorrelated(channels: &ChannelSet) -> Result<RateBundle, DesignError> {
    channels.check_relay_assumptions()?;
    if no_relay_needed(channels) {
        return Err(DesignError::NoRelayNeeded);
    }
    let (c1r, c2r, c1d, c2d, crd) = (
        channels.c_s1r(),
        channels.c_s2r(),
        channels.c_s1d(),
        channels.c_s2d(),
        channels.c_rd(),
    );
    let kappa = c1r / c2r;
    let rsynd1 = check_syndrome_rate("Rsynd1", 1.0 - (2.0 * c1r - kappa * c2d - c1d))?;
    let rsynd2 = check_syndrome_rate("Rsynd2", 1.0 - (2.0 * c2r - c1d / kappa - c2d))?;
    let (mu1, mu2) = split(channels);
    let theta1 = crd / (crd * (1.0 + kappa) + (1.0 - rsynd1));
    Ok(RateBundle {
        rs1: 1.0,
        rs2: 1.0,
        r1: c1r,
        r2: c2r,
        rsynd1,
        rsynd2,
        mu1,
        mu2,
        punctured: false,
        rprime: Some(theta1 * c1r),
    })
}

/// Design for correlated sources with all systematic bits punctured. The
/// first-layer punctured rates are `C_sir / Rs_i*` at the optimal
/// source-coding rates; the syndrome rates follow from the optimal phase
/// split with the relay code at `C_rd`.
pub fn design_correlated(spec: &DesignSpec) -> Result<RateBundle, DesignError> {
    if !spec.is_punctured() {
        return design_uncorrelated(&spec.channels);
    }
    let ch = &spec.channels;
    let h = source_entropies(spec.p)?;
    let opt = optimal_allocation_with(ch, spec.p, spec.tie_break)?;
    if no_relay_needed(ch) {
        return Err(DesignError::NoRelayNeeded);
    }
    if opt.rs1 <= 0.0 {
        return Err(DesignError::Degenerate { source_index: 1 });
    }
    if opt.rs2 <= 0.0 {
        return Err(DesignError::Degenerate { source_index: 2 });
    }
    let (c1r, c2r, c1d, c2d) = (ch.c_s1r(), ch.c_s2r(), ch.c_s1d(), ch.c_s2d());
    let rt1 = c1r / opt.rs1;
    let rt2 = c2r / opt.rs2;
    let r1 = rt1 / (1.0 + rt1);
    let r2 = rt2 / (1.0 + rt2);
    let kp = opt.kappa_prime;
    let rsynd1 = check_syndrome_rate(
        "Rsynd1",
        1.0 - (1.0 - r1) * (h.h_joint / opt.rs1 * c1r - kp * c2d - c1d),
    )?;
    let rsynd2 = check_syndrome_rate(
        "Rsynd2",
        1.0 - (1.0 - r2) * (h.h_joint / opt.rs2 * c2r - c1d / kp - c2d),
    )?;
    let (mu1, mu2) = split(ch);
    Ok(RateBundle {
        rs1: opt.rs1,
        rs2: opt.rs2,
        r1,
        r2,
        rsynd1,
        rsynd2,
        mu1,
        mu2,
        punctured: true,
        rprime: Some(opt.rmax),
    })
}

/// Phase split realized by a rate bundle when the relay forwards its
/// syndrome bits with a code of rate `c_rd`.
pub fn implied_allocation(rates: &RateBundle, c_rd: f64) -> Result<TimeAllocation, DesignError> {
    if c_rd <= 0.0 || rates.r1 <= 0.0 || rates.r2 <= 0.0 {
        return Err(DesignError::BadParameters(
            "implied allocation needs positive rates and relay capacity".into(),
        ));
    }
    // lengths per information bit
    let (n1, n2) = (1.0 / rates.r1, 1.0 / rates.r2);
    let (tx1, tx2) = if rates.punctured {
        (n1 - 1.0, n2 - 1.0)
    } else {
        (n1, n2)
    };
    let nr = n1 * (1.0 - rates.rsynd1) / c_rd;
    let total = tx1 + tx2 + nr;
    Ok(TimeAllocation::new(tx1 / total, tx2 / total, nr / total)?)
}

/// Integer degrees realizing a rate bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeFit {
    pub first: [Degrees; 2],
    pub synd: [Degrees; 2],
    pub m: [usize; 2],
    pub target: RateBundle,
    /// Rates of the fitted degrees in the `L -> infinity` limit.
    pub achieved: RateBundle,
}

impl DegreeFit {
    pub fn mu1(&self) -> f64 {
        self.achieved.mu1
    }

    /// Worst rate gap over the four component codes.
    pub fn max_rate_gap(&self) -> f64 {
        [
            (self.target.r1, self.achieved.r1),
            (self.target.r2, self.achieved.r2),
            (self.target.rsynd1, self.achieved.rsynd1),
            (self.target.rsynd2, self.achieved.rsynd2),
        ]
        .iter()
        .map(|(t, a)| (t - a).abs())
        .fold(0.0, f64::max)
    }

    pub fn ensemble(
        &self,
        chain_length: usize,
        window: usize,
    ) -> Result<BilayerEnsemble, crate::error::EnsembleError> {
        BilayerEnsemble::new(self.first, self.synd, self.m, chain_length, window)
    }
}

/// Rates are compared after rounding to this grid so that exact rational
/// ties are recognized despite floating-point noise.
fn quantize(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

/// Best `(l, r)` with `r <= r_max` for rate `1 - l/r` near `target`:
/// smallest gap first, then the largest degrees.
fn fit_first_layer(target: f64, r_max: u32) -> Option<(Degrees, f64)> {
    let load = 1.0 - target;
    let mut best: Option<(Degrees, f64)> = None;
    for r in 3..=r_max {
        let l = ((load * f64::from(r)).round() as u32).clamp(2, r - 1);
        let gap = (1.0 - f64::from(l) / f64::from(r) - target).abs();
        let better = match best {
            None => true,
            Some((d, g)) => {
                quantize(gap) < quantize(g) || (quantize(gap) == quantize(g) && r > d.r)
            }
        };
        if better {
            best = Some((Degrees::new(l, r), gap));
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
struct SyndromeCandidate {
    synd: [Degrees; 2],
    mu_gap: f64,
    rate_gap: f64,
}

impl SyndromeCandidate {
    fn key(&self) -> (i64, i64, i64) {
        (
            quantize(self.mu_gap),
            quantize(self.rate_gap),
            -i64::from(self.synd[0].r + self.synd[1].r),
        )
    }
}

/// Best syndrome degree pair: the socket split `rs1 : rs2` closest to
/// `mu1 : mu2`, then the smallest rate gap, then the largest degrees.
fn fit_syndrome_layer(loads: [f64; 2], mu1: f64, r_max: u32) -> Option<SyndromeCandidate> {
    let mut best: Option<SyndromeCandidate> = None;
    let rs_range = |load: f64| -> Vec<u32> {
        if load <= EPS {
            vec![0]
        } else {
            (1..=r_max).collect()
        }
    };
    for rs1 in rs_range(loads[0]) {
        for rs2 in rs_range(loads[1]) {
            if rs1 + rs2 == 0 {
                continue;
            }
            let mut synd = [Degrees::NONE; 2];
            let mut rate_gap: f64 = 0.0;
            let mut ok = true;
            for (i, rs) in [rs1, rs2].into_iter().enumerate() {
                if rs == 0 {
                    continue;
                }
                let ls = (loads[i] * f64::from(rs)).round() as u32;
                if ls == 0 {
                    ok = false;
                    break;
                }
                rate_gap = rate_gap.max((f64::from(ls) / f64::from(rs) - loads[i]).abs());
                synd[i] = Degrees::new(ls, rs);
            }
            if !ok {
                continue;
            }
            let mu_gap = (f64::from(rs1) / f64::from(rs1 + rs2) - mu1).abs();
            let cand = SyndromeCandidate {
                synd,
                mu_gap,
                rate_gap,
            };
            if best.map_or(true, |b| cand.key() < b.key()) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Smallest `M` making `M l / r` an integer.
fn position_multiple(d: Degrees) -> usize {
    if d.is_empty() {
        1
    } else {
        (d.r / gcd(d.l, d.r)) as usize
    }
}

/// Variable nodes per position: the minimal pair satisfying the syndrome
/// alignment `M1 ls1/rs1 = M2 ls2/rs2` and integral check counts per
/// position, scaled uniformly until the smaller one reaches `m_base`.
pub fn aligned_m(first: [Degrees; 2], synd: [Degrees; 2], m_base: usize) -> [usize; 2] {
    let (mut m1, mut m2) = if synd[0].is_empty() || synd[1].is_empty() {
        (1usize, 1usize)
    } else {
        let a = synd[0].l as usize * synd[1].r as usize;
        let b = synd[1].l as usize * synd[0].r as usize;
        let g = gcd(a, b);
        (b / g, a / g)
    };
    // smallest lambda with lambda * m_i divisible by each required multiple
    let mut lambda = 1usize;
    for (i, m) in [m1, m2].into_iter().enumerate() {
        for d in [first[i], synd[i]] {
            let q = position_multiple(d);
            lambda = lcm(lambda, q / gcd(q, m));
        }
    }
    m1 *= lambda;
    m2 *= lambda;
    let smaller = m1.min(m2);
    let scale = m_base.div_ceil(smaller).max(1);
    [m1 * scale, m2 * scale]
}

/// Fits integer node degrees with check degrees at most `r_max` to a rate
/// bundle. Every component rate lands within [`FIT_TOLERANCE`] of its target.
pub fn fit_degrees(target: &RateBundle, r_max: u32, m_base: usize) -> Result<DegreeFit, DesignError> {
    if r_max < 4 {
        return Err(DesignError::BadParameters(format!("r_max = {r_max} < 4")));
    }
    if m_base < r_max as usize {
        return Err(DesignError::BadParameters(format!(
            "M_base = {m_base} < r_max = {r_max}"
        )));
    }
    let f1 = fit_first_layer(target.r1, r_max);
    let f2 = fit_first_layer(target.r2, r_max);
    let loads = [1.0 - target.rsynd1, 1.0 - target.rsynd2];
    let s = fit_syndrome_layer(loads, target.mu1, r_max);

    let build = |first: [Degrees; 2], synd: [Degrees; 2]| -> DegreeFit {
        let m = aligned_m(first, synd, m_base);
        let mut achieved = RateBundle {
            r1: 1.0 - first[0].load(),
            r2: 1.0 - first[1].load(),
            rsynd1: 1.0 - synd[0].load(),
            rsynd2: 1.0 - synd[1].load(),
            rprime: None,
            ..*target
        };
        let total = synd[0].r + synd[1].r;
        achieved.mu1 = f64::from(synd[0].r) / f64::from(total);
        achieved.mu2 = f64::from(synd[1].r) / f64::from(total);
        DegreeFit {
            first,
            synd,
            m,
            target: *target,
            achieved,
        }
    };

    match (f1, f2, s) {
        (Some((d1, g1)), Some((d2, g2)), Some(s)) => {
            let fit = build([d1, d2], s.synd);
            let worst = g1.max(g2).max(s.rate_gap);
            if worst <= FIT_TOLERANCE + EPS {
                Ok(fit)
            } else {
                Err(DesignError::InfeasibleFit {
                    r_max,
                    reason: format!("closest fit misses a target rate by {worst:.4}"),
                    best: Some(Box::new(fit)),
                })
            }
        }
        _ => Err(DesignError::InfeasibleFit {
            r_max,
            reason: "no admissible degree pair".into(),
            best: None,
        }),
    }
}
