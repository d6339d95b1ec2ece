//! Information-theoretic limits of the time-division two-source relay network
//! with erasure links: source entropies under the pairwise-equality correlation
//! model, decode-and-forward rate bounds, the optimal phase allocation and the
//! achievable erasure-probability pentagons for a given set of code rates.

use rayon::prelude::*;

use crate::error::TheoryError;

/// Slack used when checking closed-interval memberships of computed quantities.
const EPS: f64 = 1e-12;

fn check_unit(name: &'static str, value: f64) -> Result<f64, TheoryError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(TheoryError::OutOfRange {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Erasure probabilities of the five links of the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSet {
    pub eps_s1r: f64,
    pub eps_s2r: f64,
    pub eps_s1d: f64,
    pub eps_s2d: f64,
    pub eps_rd: f64,
}

impl ChannelSet {
    pub fn new(
        eps_s1r: f64,
        eps_s2r: f64,
        eps_s1d: f64,
        eps_s2d: f64,
        eps_rd: f64,
    ) -> Result<Self, TheoryError> {
        Ok(Self {
            eps_s1r: check_unit("eps_s1r", eps_s1r)?,
            eps_s2r: check_unit("eps_s2r", eps_s2r)?,
            eps_s1d: check_unit("eps_s1d", eps_s1d)?,
            eps_s2d: check_unit("eps_s2d", eps_s2d)?,
            eps_rd: check_unit("eps_rd", eps_rd)?,
        })
    }

    /// Builds a channel set from link capacities `1 - eps`.
    pub fn from_capacities(
        c_s1r: f64,
        c_s2r: f64,
        c_s1d: f64,
        c_s2d: f64,
        c_rd: f64,
    ) -> Result<Self, TheoryError> {
        Self::new(1.0 - c_s1r, 1.0 - c_s2r, 1.0 - c_s1d, 1.0 - c_s2d, 1.0 - c_rd)
    }

    pub fn symmetric(eps_sr: f64, eps_sd: f64, eps_rd: f64) -> Result<Self, TheoryError> {
        Self::new(eps_sr, eps_sr, eps_sd, eps_sd, eps_rd)
    }

    pub fn validate(&self) -> Result<(), TheoryError> {
        Self::new(
            self.eps_s1r,
            self.eps_s2r,
            self.eps_s1d,
            self.eps_s2d,
            self.eps_rd,
        )
        .map(|_| ())
    }

    pub fn c_s1r(&self) -> f64 {
        1.0 - self.eps_s1r
    }
    pub fn c_s2r(&self) -> f64 {
        1.0 - self.eps_s2r
    }
    pub fn c_s1d(&self) -> f64 {
        1.0 - self.eps_s1d
    }
    pub fn c_s2d(&self) -> f64 {
        1.0 - self.eps_s2d
    }
    pub fn c_rd(&self) -> f64 {
        1.0 - self.eps_rd
    }

    /// Capacity ordering required by the optimal allocation: every
    /// source-relay link and the relay-destination link are at least as good
    /// as the corresponding direct link, and both source-relay links carry
    /// something.
    pub fn check_relay_assumptions(&self) -> Result<(), TheoryError> {
        self.validate()?;
        let pairs = [
            ("C_s1r >= C_s1d", self.c_s1r(), self.c_s1d()),
            ("C_s2r >= C_s2d", self.c_s2r(), self.c_s2d()),
            ("C_rd >= C_s1d", self.c_rd(), self.c_s1d()),
            ("C_rd >= C_s2d", self.c_rd(), self.c_s2d()),
        ];
        for (what, big, small) in pairs {
            if big + EPS < small {
                return Err(TheoryError::Assumption(format!(
                    "{what} fails ({big} < {small})"
                )));
            }
        }
        if self.c_s1r() <= 0.0 || self.c_s2r() <= 0.0 {
            return Err(TheoryError::Assumption(
                "source-relay capacities must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Correlation between the two source sequences: each bit pair is forced
/// equal with probability `p`; `z` optionally holds one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    pub p: f64,
    pub z: Option<Vec<u8>>,
}

impl CorrelationModel {
    pub fn new(p: f64, z: Option<Vec<u8>>) -> Result<Self, TheoryError> {
        check_unit("p", p)?;
        if let Some(z) = &z {
            if let Some(bad) = z.iter().find(|&&b| b > 1) {
                return Err(TheoryError::OutOfRange {
                    name: "z entry",
                    value: f64::from(*bad),
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Self { p, z })
    }

    pub fn entropies(&self) -> SourceEntropies {
        // p was validated at construction
        SourceEntropies {
            h_cond: 1.0 - self.p,
            h_joint: 2.0 - self.p,
        }
    }
}

/// Entropies of the source pair in bits per source bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceEntropies {
    /// `H(U1|U2) = H(U2|U1)`.
    pub h_cond: f64,
    /// `H(U1, U2)`.
    pub h_joint: f64,
}

pub fn source_entropies(p: f64) -> Result<SourceEntropies, TheoryError> {
    check_unit("p", p)?;
    Ok(SourceEntropies {
        h_cond: 1.0 - p,
        h_joint: 2.0 - p,
    })
}

/// Fractions of the transmission block used by source 1, source 2 and the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAllocation {
    pub theta1: f64,
    pub theta2: f64,
    pub theta_r: f64,
}

impl TimeAllocation {
    pub fn new(theta1: f64, theta2: f64, theta_r: f64) -> Result<Self, TheoryError> {
        let ok = [theta1, theta2, theta_r]
            .iter()
            .all(|t| t.is_finite() && *t >= -EPS)
            && (theta1 + theta2 + theta_r - 1.0).abs() <= EPS;
        if ok {
            Ok(Self {
                theta1: theta1.max(0.0),
                theta2: theta2.max(0.0),
                theta_r: theta_r.max(0.0),
            })
        } else {
            Err(TheoryError::InvalidAllocation(theta1, theta2, theta_r))
        }
    }

    /// Allocation with `theta_r = 1 - theta1 - theta2`.
    pub fn from_sources(theta1: f64, theta2: f64) -> Result<Self, TheoryError> {
        Self::new(theta1, theta2, 1.0 - theta1 - theta2)
    }
}

/// Right-hand sides of the five decode-and-forward constraints on the
/// effective per-source rate. Index 0 and 1 are the source-relay cuts, 2 and
/// 3 the per-source destination cuts, 4 the sum cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds(pub [f64; 5]);

impl RateBounds {
    pub fn f(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    /// Achievable rate at this operating point.
    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `num / rs`, where a zero source-coding rate means the source sends no
/// compressed bits and the constraint is vacuous.
#[inline]
fn per_source(num: f64, rs: f64) -> f64 {
    if rs <= 0.0 {
        f64::INFINITY
    } else {
        num / rs
    }
}

#[inline]
fn bounds_raw(theta1: f64, theta2: f64, rs1: f64, h_joint: f64, ch: &ChannelSet) -> [f64; 5] {
    let theta_r = 1.0 - theta1 - theta2;
    let rs2 = h_joint - rs1;
    let relay = theta_r * ch.c_rd();
    [
        per_source(theta1 * ch.c_s1r(), rs1),
        per_source(theta2 * ch.c_s2r(), rs2),
        per_source(theta1 * ch.c_s1d() + relay, rs1),
        per_source(theta2 * ch.c_s2d() + relay, rs2),
        (theta1 * ch.c_s1d() + theta2 * ch.c_s2d() + relay) / h_joint,
    ]
}

/// Evaluates the five rate constraints at allocation `alloc` and
/// source-coding rate `rs1` (with `rs2 = H(U1,U2) - rs1`).
pub fn df_rate_bounds(
    alloc: &TimeAllocation,
    rs1: f64,
    channels: &ChannelSet,
    p: f64,
) -> Result<RateBounds, TheoryError> {
    let h = source_entropies(p)?;
    channels.validate()?;
    TimeAllocation::new(alloc.theta1, alloc.theta2, alloc.theta_r)?;
    if !(rs1 >= h.h_cond - EPS && rs1 <= 1.0 + EPS) {
        return Err(TheoryError::OutOfRange {
            name: "Rs1",
            value: rs1,
            lo: h.h_cond,
            hi: 1.0,
        });
    }
    let rs1 = rs1.clamp(h.h_cond, 1.0);
    Ok(RateBounds(bounds_raw(
        alloc.theta1,
        alloc.theta2,
        rs1,
        h.h_joint,
        channels,
    )))
}

/// Outcome of comparing `kappa = C_s1r/C_s2r` with
/// `nu = (C_rd - C_s1d)/(C_rd - C_s2d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KappaNu {
    /// `kappa > nu`: the achievable rate grows with `Rs1`, so source 1 is
    /// left uncompressed.
    KappaGreater,
    /// `kappa < nu`: the achievable rate falls with `Rs1`, so source 1 is
    /// compressed to `H(U1|U2)`.
    KappaLess,
    /// Every `Rs1` on the Slepian-Wolf corner segment is optimal.
    Tie,
}

/// How to pick `Rs1` when every point of the corner segment is optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// `Rs1 = H(U1|U2)`.
    #[default]
    ConditionalEntropy,
    /// `Rs1 = Rs2 = H(U1,U2)/2`, which keeps symmetric channels symmetric.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalAllocation {
    pub alloc: TimeAllocation,
    pub rs1: f64,
    pub rs2: f64,
    pub rmax: f64,
    pub case: KappaNu,
    pub kappa: f64,
    pub nu: f64,
    /// `kappa * (H(U1,U2)/Rs1 - 1)`, the ratio `theta2/theta1`; infinite when
    /// `Rs1 = 0`.
    pub kappa_prime: f64,
}

pub fn optimal_allocation(channels: &ChannelSet, p: f64) -> Result<OptimalAllocation, TheoryError> {
    optimal_allocation_with(channels, p, TieBreak::default())
}

/// Closed-form maximizer of `min(f1..f5)` over the phase split and the
/// Slepian-Wolf corner segment.
///
/// At the optimum the two source-relay cuts and the sum cut are tight. With
/// them tight the achievable rate is
/// `C_s1r C_rd / (alpha Rs1 + H(U1,U2) (kappa (C_rd - C_s2d) + C_s1r))`,
/// `alpha = (1 - kappa) C_rd - C_s1d + kappa C_s2d`, which is monotone in
/// `Rs1`; the sign of `alpha` picks the end of the segment.
pub fn optimal_allocation_with(
    channels: &ChannelSet,
    p: f64,
    tie: TieBreak,
) -> Result<OptimalAllocation, TheoryError> {
    let h = source_entropies(p)?;
    channels.check_relay_assumptions()?;
    let (c1r, c2r, c1d, c2d, crd) = (
        channels.c_s1r(),
        channels.c_s2r(),
        channels.c_s1d(),
        channels.c_s2d(),
        channels.c_rd(),
    );
    let kappa = c1r / c2r;
    let nu = (crd - c1d) / (crd - c2d);
    let alpha = (1.0 - kappa) * crd - c1d + kappa * c2d;
    let scale = 1.0 + kappa;
    let case = if alpha.abs() <= 1e-12 * scale {
        KappaNu::Tie
    } else if alpha > 0.0 {
        KappaNu::KappaLess
    } else {
        KappaNu::KappaGreater
    };
    let rs1 = match (case, tie) {
        (KappaNu::KappaLess, _) | (KappaNu::Tie, TieBreak::ConditionalEntropy) => h.h_cond,
        (KappaNu::KappaGreater, _) => 1.0,
        (KappaNu::Tie, TieBreak::Symmetric) => h.h_joint / 2.0,
    };
    let rs2 = h.h_joint - rs1;
    let alpha = if case == KappaNu::Tie { 0.0 } else { alpha };
    let denom = alpha * rs1 + h.h_joint * (kappa * (crd - c2d) + c1r);
    let rmax = c1r * crd / denom;
    let theta1 = rs1 * rmax / c1r;
    let theta2 = rs2 * rmax / c2r;
    let alloc = TimeAllocation::new(theta1, theta2, 1.0 - theta1 - theta2)?;
    let kappa_prime = if rs1 > 0.0 {
        kappa * (h.h_joint / rs1 - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(OptimalAllocation {
        alloc,
        rs1,
        rs2,
        rmax,
        case,
        kappa,
        nu,
        kappa_prime,
    })
}

/// Best grid point of the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub alloc: TimeAllocation,
    pub rs1: f64,
    pub rs2: f64,
    pub rmax: f64,
}

/// Exhaustive maximization of `min(f1..f5)` over a `theta1 x theta2 x Rs1`
/// grid of resolution `grid_step`. Halving the step never lowers the result.
pub fn brute_force_allocation(
    channels: &ChannelSet,
    p: f64,
    grid_step: f64,
) -> Result<GridOptimum, TheoryError> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(TheoryError::OutOfRange {
            name: "grid_step",
            value: grid_step,
            lo: 0.0,
            hi: 0.1,
        });
    }
    channels.validate()?;
    let h = source_entropies(p)?;
    let n = (1.0 / grid_step).round() as usize;
    let n = n.max(1);
    let span = 1.0 - h.h_cond;
    let mut rs_grid: Vec<f64> = (0..)
        .map(|m| h.h_cond + m as f64 * grid_step)
        .take_while(|r| *r < 1.0 - EPS)
        .collect();
    rs_grid.push(1.0);
    if span <= EPS {
        rs_grid = vec![1.0];
    }

    // (value, i, j, m): ties resolve to the lexicographically smallest index
    // so the reduction does not depend on the parallel split.
    let best = (0..=n)
        .into_par_iter()
        .map(|i| {
            let theta1 = i as f64 / n as f64;
            let mut best = (f64::NEG_INFINITY, i, 0usize, 0usize);
            for j in 0..=(n - i) {
                let theta2 = j as f64 / n as f64;
                for (m, &rs1) in rs_grid.iter().enumerate() {
                    let f = bounds_raw(theta1, theta2, rs1, h.h_joint, channels);
                    let v = f.iter().copied().fold(f64::INFINITY, f64::min);
                    if v > best.0 {
                        best = (v, i, j, m);
                    }
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2, b.3) < (a.1, a.2, a.3)) {
                    b
                } else {
                    a
                }
            },
        );
    let (rmax, i, j, m) = best;
    let theta1 = i as f64 / n as f64;
    let theta2 = j as f64 / n as f64;
    let rs1 = rs_grid[m];
    Ok(GridOptimum {
        alloc: TimeAllocation::new(theta1, theta2, 1.0 - theta1 - theta2)?,
        rs1,
        rs2: h.h_joint - rs1,
        rmax,
    })
}

/// Code rates of the bilayer construction together with the source-coding
/// rates they were designed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBundle {
    pub rs1: f64,
    pub rs2: f64,
    /// Unpunctured first-layer code rates `k/n_i`.
    pub r1: f64,
    pub r2: f64,
    /// Relay syndrome-code rates `1 - k_r/n_i`.
    pub rsynd1: f64,
    pub rsynd2: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// Whether all systematic bits are punctured.
    pub punctured: bool,
    /// Effective per-source rate `k/N` of the design, when the relay link is known.
    pub rprime: Option<f64>,
}

fn punctured_rate(r: f64) -> f64 {
    if r >= 1.0 {
        f64::INFINITY
    } else {
        r / (1.0 - r)
    }
}

impl RateBundle {
    /// The same code rates paired with other source-coding rates.
    pub fn with_source_rates(self, rs1: f64, rs2: f64) -> Self {
        Self { rs1, rs2, ..self }
    }

    pub fn rtilde1(&self) -> f64 {
        punctured_rate(self.r1)
    }
    pub fn rtilde2(&self) -> f64 {
        punctured_rate(self.r2)
    }

    /// Rate of the bilayer code seen by source `i` (1-based): `R_i - mu_i (1 - Rsynd_i)`.
    pub fn bilayer_rate(&self, i: usize) -> f64 {
        match i {
            1 => self.r1 - self.mu1 * (1.0 - self.rsynd1),
            _ => self.r2 - self.mu2 * (1.0 - self.rsynd2),
        }
    }

    /// Relative deviation of `(1-Rsynd1)/(1-Rsynd2)` from `R1/R2`.
    pub fn syndrome_ratio_error(&self) -> f64 {
        let lhs = (1.0 - self.rsynd1) * self.r2;
        let rhs = (1.0 - self.rsynd2) * self.r1;
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        (lhs - rhs).abs() / scale
    }

    /// Checks ranges, the syndrome split, the Slepian-Wolf relation for
    /// correlation `p` and the syndrome-rate ratio to relative tolerance `ratio_tol`.
    pub fn validate(&self, p: f64, ratio_tol: f64) -> Result<(), TheoryError> {
        for (name, v) in [
            ("R1", self.r1),
            ("R2", self.r2),
            ("Rsynd1", self.rsynd1),
            ("Rsynd2", self.rsynd2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("Rs1", self.rs1),
            ("Rs2", self.rs2),
        ] {
            if !(v.is_finite() && v >= -EPS && v <= 1.0 + EPS) {
                return Err(TheoryError::OutOfRange {
                    name,
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        if (self.mu1 + self.mu2 - 1.0).abs() > 1e-9 {
            return Err(TheoryError::InconsistentRates(format!(
                "mu1 + mu2 = {} != 1",
                self.mu1 + self.mu2
            )));
        }
        let h = source_entropies(p)?;
        if p > 0.0 && (self.rs1 + self.rs2 - h.h_joint).abs() > 1e-9 {
            return Err(TheoryError::InconsistentRates(format!(
                "Rs1 + Rs2 = {} != H(U1,U2) = {}",
                self.rs1 + self.rs2,
                h.h_joint
            )));
        }
        let err = self.syndrome_ratio_error();
        if err > ratio_tol {
            return Err(TheoryError::InconsistentRates(format!(
                "(1-Rsynd1)/(1-Rsynd2) deviates from R1/R2 by {err:.3e} (relative)"
            )));
        }
        Ok(())
    }
}

/// Achievable region of a pair of erasure probabilities: the pentagon with
/// corners `(0,0), (a,0), (a,b), (c,d), (0,d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pentagon {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Pentagon {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, TheoryError> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || c > a + EPS || b > d + EPS {
            return Err(TheoryError::InconsistentRates(format!(
                "pentagon corners a={a}, b={b}, c={c}, d={d} violate c <= a, b <= d"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn corners(&self) -> [(f64, f64); 5] {
        [
            (0.0, 0.0),
            (self.a, 0.0),
            (self.a, self.b),
            (self.c, self.d),
            (0.0, self.d),
        ]
    }

    /// Linear constraints `g . (x, y) <= h` whose intersection (with the
    /// positive quadrant) is the pentagon.
    fn half_planes(&self) -> [([f64; 2], f64); 3] {
        // (y - d)(a - c) <= (b - d)(x - c)
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        [
            ([1.0, 0.0], a),
            ([0.0, 1.0], d),
            ([-(b - d), a - c], d * (a - c) - (b - d) * c),
        ]
    }

    /// Closed membership test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        if x < -EPS || y < -EPS {
            return false;
        }
        self.half_planes()
            .iter()
            .all(|(g, h)| g[0] * x + g[1] * y <= h + 1e-12)
    }

    /// Largest `t >= 0` with `origin + t * direction` inside the pentagon,
    /// or `None` when the origin is outside.
    pub fn ray_exit(&self, origin: (f64, f64), direction: (f64, f64)) -> Option<f64> {
        if !self.contains(origin.0, origin.1) {
            return None;
        }
        let mut t = f64::INFINITY;
        for (g, h) in self.half_planes() {
            let rate = g[0] * direction.0 + g[1] * direction.1;
            if rate > 0.0 {
                let slack = h - (g[0] * origin.0 + g[1] * origin.1);
                t = t.min(slack.max(0.0) / rate);
            }
        }
        Some(t)
    }

    /// Whether `self` contains every corner of `other` (both are convex).
    pub fn contains_pentagon(&self, other: &Pentagon) -> bool {
        other
            .corners()
            .iter()
            .all(|&(x, y)| self.contains(x.max(0.0), y.max(0.0)))
    }
}

/// Achievable source-relay erasure region for the given rates.
pub fn achievable_region_sr(
    rates: &RateBundle,
    p: f64,
    punctured: bool,
) -> Result<Pentagon, TheoryError> {
    let h = source_entropies(p)?;
    rates.validate(p, REGION_RATIO_TOL)?;
    let (x1, x2) = if punctured {
        (rates.rtilde1(), rates.rtilde2())
    } else {
        (rates.r1, rates.r2)
    };
    Pentagon::new(
        1.0 - h.h_cond * x1,
        1.0 - x2,
        1.0 - x1,
        1.0 - h.h_cond * x2,
    )
}

/// Achievable source-destination erasure region for the given rates; the
/// relay's syndrome bits enlarge the per-source corners.
pub fn achievable_region_sd(
    rates: &RateBundle,
    p: f64,
    punctured: bool,
) -> Result<Pentagon, TheoryError> {
    let h = source_entropies(p)?;
    rates.validate(p, REGION_RATIO_TOL)?;
    let (x1, x2, relay1, relay2) = if punctured {
        (
            rates.rtilde1(),
            rates.rtilde2(),
            (1.0 - rates.rsynd1) / (1.0 - rates.r1),
            (1.0 - rates.rsynd2) / (1.0 - rates.r2),
        )
    } else {
        (rates.r1, rates.r2, 1.0 - rates.rsynd1, 1.0 - rates.rsynd2)
    };
    Pentagon::new(
        1.0 - (h.h_cond * x1 - relay1),
        1.0 - x2,
        1.0 - x1,
        1.0 - (h.h_cond * x2 - relay2),
    )
}

/// Rates realized by integer degrees at finite chain length satisfy the
/// syndrome-rate relation only approximately (the two first-layer codes lose
/// different fractions of rate to termination), so the region builders accept
/// a small relative deviation.
pub const REGION_RATIO_TOL: f64 = 0.02;
