//! The terminated `(l, r, L, w, M)` spatially-coupled ensemble and the
//! two-user bilayer ensemble built from four of them.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::error::EnsembleError;
use crate::theory::RateBundle;

/// How the check nodes of a terminated chain are counted.
///
/// Variables live at positions `1..=L` and checks at `1..=L+w-1`. Near the
/// two ends a check's sockets fall outside the chain with probability
/// `j/w`, so `2 * sum_{j<w} (j/w)^r` checks per unit of `M l / r` are
/// expected to be empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckCount {
    /// `L + 1 + w - 2 sum_{j=0}^{w-1} (j/w)^r`.
    #[default]
    Padded,
    /// `L + w - 1 - 2 sum_{j=0}^{w-1} (j/w)^r`: the occupied check positions
    /// minus the expected empty checks. This is the count the finite-length
    /// sampler realizes.
    Occupied,
}

impl CheckCount {
    fn positions(self, chain_length: usize, window: usize) -> i64 {
        let base = chain_length as i64 + window as i64;
        match self {
            CheckCount::Padded => base + 1,
            CheckCount::Occupied => base - 1,
        }
    }
}

fn validate(l: u32, r: u32, chain_length: usize, window: usize) -> Result<(), EnsembleError> {
    if l == 0 || r == 0 || l >= r {
        return Err(EnsembleError::Parameters(format!(
            "need 1 <= l < r, got (l, r) = ({l}, {r})"
        )));
    }
    if chain_length == 0 || window == 0 {
        return Err(EnsembleError::Parameters(format!(
            "need L >= 1 and w >= 1, got L = {chain_length}, w = {window}"
        )));
    }
    Ok(())
}

fn boundary_sum(r: u32, window: usize) -> f64 {
    let w = window as f64;
    (0..window).map(|j| (j as f64 / w).powi(r as i32)).sum()
}

/// Checks per variable node, `N_C / (M L)`.
fn check_ratio(l: u32, r: u32, chain_length: usize, window: usize, count: CheckCount) -> f64 {
    let span = count.positions(chain_length, window) as f64 - 2.0 * boundary_sum(r, window);
    f64::from(l) / f64::from(r) * span / chain_length as f64
}

/// Design rate `1 - N_C / N_V` of the terminated `(l, r, L, w)` ensemble.
pub fn design_rate(l: u32, r: u32, chain_length: usize, window: usize) -> Result<f64, EnsembleError> {
    design_rate_with(l, r, chain_length, window, CheckCount::default())
}

pub fn design_rate_with(
    l: u32,
    r: u32,
    chain_length: usize,
    window: usize,
    count: CheckCount,
) -> Result<f64, EnsembleError> {
    validate(l, r, chain_length, window)?;
    Ok(1.0 - check_ratio(l, r, chain_length, window, count))
}

/// `1 - l/r`, the rate of the underlying block ensemble.
pub fn design_rate_limit(l: u32, r: u32) -> Result<BigRational, EnsembleError> {
    validate(l, r, 1, 1)?;
    Ok(BigRational::one() - BigRational::new(BigInt::from(l), BigInt::from(r)))
}

/// The finite-`L` design rate as an exact rational.
pub fn design_rate_exact(
    l: u32,
    r: u32,
    chain_length: usize,
    window: usize,
    count: CheckCount,
) -> Result<BigRational, EnsembleError> {
    validate(l, r, chain_length, window)?;
    let w = BigInt::from(window);
    let denom = num::pow(w, r as usize);
    let mut numer = BigInt::zero();
    for j in 0..window {
        numer += num::pow(BigInt::from(j), r as usize);
    }
    let sum = BigRational::new(numer, denom);
    let span = BigRational::from_integer(BigInt::from(count.positions(chain_length, window)))
        - sum * BigInt::from(2);
    let ratio = BigRational::new(BigInt::from(l), BigInt::from(r)) * span
        / BigRational::from_integer(BigInt::from(chain_length));
    Ok(BigRational::one() - ratio)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Per-user design rate of the bilayer code: first-layer checks plus the
/// share `mu` of the syndrome checks, over `M L` variables.
#[allow(clippy::too_many_arguments)]
pub fn bilayer_design_rate(
    l: u32,
    ls: u32,
    r: u32,
    rs: u32,
    chain_length: usize,
    window: usize,
    mu: f64,
    count: CheckCount,
) -> Result<f64, EnsembleError> {
    validate(l, r, chain_length, window)?;
    if !(0.0..=1.0).contains(&mu) {
        return Err(EnsembleError::Parameters(format!("mu = {mu} outside [0, 1]")));
    }
    let first = check_ratio(l, r, chain_length, window, count);
    if ls == 0 {
        return Ok(1.0 - first);
    }
    if rs == 0 {
        return Err(EnsembleError::Parameters("syndrome check degree is zero".into()));
    }
    Ok(1.0 - first - mu * check_ratio(ls, rs, chain_length, window, count))
}

/// `L -> infinity` limit of [`bilayer_design_rate`]: `1 - l/r - mu ls/rs`.
pub fn bilayer_design_rate_limit(l: u32, ls: u32, r: u32, rs: u32, mu: f64) -> Result<f64, EnsembleError> {
    validate(l, r, 1, 1)?;
    let synd = if ls == 0 {
        0.0
    } else if rs == 0 {
        return Err(EnsembleError::Parameters("syndrome check degree is zero".into()));
    } else {
        f64::from(ls) / f64::from(rs)
    };
    Ok(1.0 - f64::from(l) / f64::from(r) - mu * synd)
}

/// Variable and check degree of one component ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Degrees {
    pub l: u32,
    pub r: u32,
}

impl Degrees {
    pub const NONE: Degrees = Degrees { l: 0, r: 0 };

    pub fn new(l: u32, r: u32) -> Self {
        Self { l, r }
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    /// Fraction of checks per variable, `l/r` (zero for an empty layer).
    pub fn load(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            f64::from(self.l) / f64::from(self.r)
        }
    }
}

/// The four component ensembles of the two-user bilayer code plus the
/// coupling parameters shared by all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BilayerEnsemble {
    /// First-layer (source) codes of users 1 and 2.
    pub first: [Degrees; 2],
    /// Second-layer (relay syndrome) codes of users 1 and 2.
    pub synd: [Degrees; 2],
    /// Variable nodes per position for each user.
    pub m: [usize; 2],
    pub chain_length: usize,
    pub window: usize,
}

impl BilayerEnsemble {
    pub fn new(
        first: [Degrees; 2],
        synd: [Degrees; 2],
        m: [usize; 2],
        chain_length: usize,
        window: usize,
    ) -> Result<Self, EnsembleError> {
        let ens = Self {
            first,
            synd,
            m,
            chain_length,
            window,
        };
        ens.validate()?;
        Ok(ens)
    }

    /// Both users share `(l, r)` and `(ls, rs)`.
    pub fn symmetric(
        l: u32,
        ls: u32,
        r: u32,
        rs: u32,
        chain_length: usize,
        window: usize,
        m: usize,
    ) -> Result<Self, EnsembleError> {
        let synd = if ls == 0 {
            Degrees::NONE
        } else {
            Degrees::new(ls, rs)
        };
        Self::new(
            [Degrees::new(l, r); 2],
            [synd; 2],
            [m; 2],
            chain_length,
            window,
        )
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        for d in self.first {
            validate(d.l, d.r, self.chain_length, self.window)?;
        }
        let layered = self.synd.iter().filter(|d| !d.is_empty()).count();
        for d in self.synd {
            if !d.is_empty() && d.r == 0 {
                return Err(EnsembleError::Parameters(
                    "syndrome variable degree without check degree".into(),
                ));
            }
        }
        if layered == 2 {
            self.check_alignment()?;
        }
        Ok(())
    }

    /// `M1 ls1/rs1 == M2 ls2/rs2`, compared exactly in integers.
    pub fn check_alignment(&self) -> Result<(), EnsembleError> {
        let [s1, s2] = self.synd;
        let lhs = self.m[0] as u128 * u128::from(s1.l) * u128::from(s2.r);
        let rhs = self.m[1] as u128 * u128::from(s2.l) * u128::from(s1.r);
        if lhs != rhs {
            return Err(EnsembleError::Alignment(
                self.m[0] as f64 * s1.load(),
                self.m[1] as f64 * s2.load(),
            ));
        }
        Ok(())
    }

    pub fn has_syndrome_layer(&self) -> bool {
        self.synd.iter().any(|d| !d.is_empty())
    }

    /// Share of each syndrome check's sockets attached to user `i` (0-based).
    pub fn mu(&self, i: usize) -> f64 {
        let total = self.synd[0].r + self.synd[1].r;
        if total == 0 {
            0.5
        } else {
            f64::from(self.synd[i].r) / f64::from(total)
        }
    }

    /// The same ensemble without the relay's syndrome layer.
    pub fn first_layer_only(&self) -> Self {
        Self {
            synd: [Degrees::NONE; 2],
            ..*self
        }
    }

    pub fn with_window(&self, window: usize) -> Self {
        Self { window, ..*self }
    }

    pub fn with_chain_length(&self, chain_length: usize) -> Self {
        Self {
            chain_length,
            ..*self
        }
    }

    pub fn with_m(&self, m: [usize; 2]) -> Self {
        Self { m, ..*self }
    }

    /// Code rates realized by the degrees at this chain length.
    pub fn rates(&self, count: CheckCount) -> Result<RateBundle, EnsembleError> {
        let (l_len, w) = (self.chain_length, self.window);
        let r1 = design_rate_with(self.first[0].l, self.first[0].r, l_len, w, count)?;
        let r2 = design_rate_with(self.first[1].l, self.first[1].r, l_len, w, count)?;
        let synd_rate = |d: Degrees| {
            if d.is_empty() {
                1.0
            } else {
                1.0 - check_ratio(d.l, d.r, l_len, w, count)
            }
        };
        Ok(RateBundle {
            rs1: 1.0,
            rs2: 1.0,
            r1,
            r2,
            rsynd1: synd_rate(self.synd[0]),
            rsynd2: synd_rate(self.synd[1]),
            mu1: self.mu(0),
            mu2: self.mu(1),
            punctured: true,
            rprime: None,
        })
    }

    /// Code rates in the `L -> infinity` limit.
    pub fn limit_rates(&self) -> RateBundle {
        let r = |d: Degrees| 1.0 - d.load();
        RateBundle {
            rs1: 1.0,
            rs2: 1.0,
            r1: r(self.first[0]),
            r2: r(self.first[1]),
            rsynd1: r(self.synd[0]),
            rsynd2: r(self.synd[1]),
            mu1: self.mu(0),
            mu2: self.mu(1),
            punctured: true,
            rprime: None,
        }
    }
}

/// The two tabulated reference ensembles.
pub mod presets {
    use super::{BilayerEnsemble, Degrees};

    /// Symmetric design: `(6,10)` for both sources, `(2,10)` syndrome codes.
    pub fn code_a() -> BilayerEnsemble {
        BilayerEnsemble {
            first: [Degrees::new(6, 10); 2],
            synd: [Degrees::new(2, 10); 2],
            m: [300, 300],
            chain_length: 600,
            window: 10,
        }
    }

    /// Asymmetric design: `(12,20)` / `(14,20)` sources, `(4,14)` / `(3,14)`
    /// syndrome codes. `M1 : M2 = 3 : 4` keeps the syndrome checks aligned.
    pub fn code_b() -> BilayerEnsemble {
        BilayerEnsemble {
            first: [Degrees::new(12, 20), Degrees::new(14, 20)],
            synd: [Degrees::new(4, 14), Degrees::new(3, 14)],
            m: [315, 420],
            chain_length: 600,
            window: 10,
        }
    }

    /// Rates listed alongside the reference ensembles:
    /// `(Rtilde1, Rtilde2, Rsynd1, Rsynd2, mu1, mu2)`.
    pub const CODE_A_TABLE: [f64; 6] = [0.6446, 0.6446, 0.7973, 0.7973, 0.5, 0.5];
    pub const CODE_B_TABLE: [f64; 6] = [0.6427, 0.4080, 0.7102, 0.7827, 0.5, 0.5];
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn limits() {
        let r = design_rate_limit(6, 10).unwrap();
        assert_eq!(r, BigRational::new(2.into(), 5.into()));
        assert_abs_diff_eq!(rational_to_f64(&r), 0.4);
        assert!(design_rate_limit(6, 6).is_err());
        assert!(design_rate(0, 6, 10, 2).is_err());
        assert!(design_rate(3, 6, 0, 2).is_err());
        assert!(design_rate(3, 6, 10, 0).is_err());
    }

    #[test]
    fn finite_chain_rates() {
        // independent evaluation of 1 - (l/r) (L + 1 + w - 2 sum (j/w)^r) / L
        let sum: f64 = (0..10).map(|j| (j as f64 / 10.0).powi(10)).sum();
        let expect = 1.0 - 0.6 * (611.0 - 2.0 * sum) / 600.0;
        let got = design_rate(6, 10, 600, 10).unwrap();
        assert_abs_diff_eq!(got, expect, epsilon = 1e-14);
        assert_abs_diff_eq!(got, 0.38998, epsilon = 1e-5);

        let s3: f64 = (0..3).map(|j| (j as f64 / 3.0).powi(6)).sum();
        let expect = 1.0 - 0.5 * (104.0 - 2.0 * s3) / 100.0;
        assert_abs_diff_eq!(design_rate(3, 6, 100, 3).unwrap(), expect, epsilon = 1e-14);
    }

    #[test]
    fn exact_matches_float() {
        for (l, r, big_l, w) in [(6, 10, 600, 10), (3, 6, 100, 3), (12, 20, 600, 10), (4, 8, 50, 5)] {
            for count in [CheckCount::Padded, CheckCount::Occupied] {
                let exact = design_rate_exact(l, r, big_l, w, count).unwrap();
                let float = design_rate_with(l, r, big_l, w, count).unwrap();
                assert_abs_diff_eq!(rational_to_f64(&exact), float, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn bilayer_reduces_and_limits() {
        for big_l in [10, 100, 600] {
            let single = design_rate(6, 10, big_l, 10).unwrap();
            let bl = bilayer_design_rate(6, 0, 10, 0, big_l, 10, 0.5, CheckCount::Padded).unwrap();
            assert_eq!(single, bl);
        }
        let lim = bilayer_design_rate_limit(4, 2, 8, 4, 0.5).unwrap();
        assert_abs_diff_eq!(lim, 0.25, epsilon = 1e-15);
        let far = bilayer_design_rate(4, 2, 8, 4, 1_000_000, 5, 0.5, CheckCount::Padded).unwrap();
        assert_abs_diff_eq!(far, 0.25, epsilon = 1e-5);
    }

    #[test]
    fn code_a_bilayer_rate_close_to_table() {
        let [rt, _, rsynd, _, mu, _] = presets::CODE_A_TABLE;
        let r = rt / (1.0 + rt);
        let table_bilayer = r - mu * (1.0 - rsynd);
        let got = bilayer_design_rate(6, 2, 10, 10, 600, 10, 0.5, CheckCount::Padded).unwrap();
        assert!((got - table_bilayer).abs() <= 0.01, "{got} vs {table_bilayer}");
    }

    #[test]
    fn presets_are_aligned() {
        presets::code_a().validate().unwrap();
        presets::code_b().validate().unwrap();
        assert!(presets::code_b().with_m([300, 300]).validate().is_err());
    }
}
