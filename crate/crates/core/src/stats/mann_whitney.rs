use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Result, TscvError};

/// Largest per-sample size for which the exact null distribution is used.
pub const EXACT_MAX_SAMPLE: usize = 12;

/// Direction of the alternative, stated for the first sample relative to the
/// second: `Greater` means sample A tends to exceed sample B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Greater,
    Less,
    TwoSided,
}

impl Alternative {
    pub fn flipped(self) -> Self {
        match self {
            Alternative::Greater => Alternative::Less,
            Alternative::Less => Alternative::Greater,
            Alternative::TwoSided => Alternative::TwoSided,
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::Greater => "greater",
            Alternative::Less => "less",
            Alternative::TwoSided => "two_sided",
        })
    }
}

impl FromStr for Alternative {
    type Err = TscvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            "two_sided" | "twosided" => Ok(Alternative::TwoSided),
            other => Err(TscvError::Config(format!("unknown alternative {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UMethod {
    Exact,
    NormalApprox,
}

/// How to pick the p-value method. `Auto` uses the exact distribution when
/// both samples are small and tie-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    /// U of the first sample.
    pub u_statistic: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    pub method: UMethod,
}

pub fn mann_whitney_u(a: &[f64], b: &[f64], alternative: Alternative) -> Result<UTestResult> {
    mann_whitney_u_with(a, b, alternative, MethodChoice::Auto)
}

pub fn mann_whitney_u_with(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
    choice: MethodChoice,
) -> Result<UTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(TscvError::Input("Mann-Whitney U needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(TscvError::Input("Mann-Whitney U samples contain NaN".into()));
    }
    let ranked = MidRanks::new(a, b);
    let (na, nb) = (a.len(), b.len());
    let rank_sum_a: f64 = ranked.ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;

    let method = match choice {
        MethodChoice::Auto if exact_eligible(na, nb, ranked.has_ties()) => UMethod::Exact,
        MethodChoice::Auto | MethodChoice::Normal => UMethod::NormalApprox,
        MethodChoice::Exact => {
            if ranked.has_ties() {
                return Err(TscvError::Input("exact Mann-Whitney U requires tie-free samples".into()));
            }
            if na > EXACT_MAX_SAMPLE || nb > EXACT_MAX_SAMPLE {
                return Err(TscvError::Input(format!(
                    "exact Mann-Whitney U limited to samples of at most {EXACT_MAX_SAMPLE}"
                )));
            }
            UMethod::Exact
        }
    };

    let p_value = match method {
        UMethod::Exact => exact_p(u, na, nb, alternative),
        UMethod::NormalApprox => normal_p(u, na, nb, ranked.tie_term, alternative),
    };
    Ok(UTestResult { u_statistic: u, p_value: p_value.clamp(0.0, 1.0), alternative, method })
}

pub fn exact_eligible(na: usize, nb: usize, has_ties: bool) -> bool {
    !has_ties && na <= EXACT_MAX_SAMPLE && nb <= EXACT_MAX_SAMPLE
}

struct MidRanks {
    /// Ranks of `a` followed by ranks of `b`.
    ranks: Vec<f64>,
    /// Sum of `t^3 - t` over tie groups.
    tie_term: f64,
}

impl MidRanks {
    fn new(a: &[f64], b: &[f64]) -> Self {
        let values: Vec<f64> = a.iter().chain(b).copied().collect();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let mut ranks = vec![0.0; values.len()];
        let mut tie_term = 0.0;
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
                j += 1;
            }
            // positions i..=j share the average of ranks i+1..=j+1
            let rank = (i + j + 2) as f64 / 2.0;
            for &idx in &order[i..=j] {
                ranks[idx] = rank;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        Self { ranks, tie_term }
    }

    fn has_ties(&self) -> bool {
        self.tie_term > 0.0
    }
}

/// Null distribution of U for tie-free samples: `counts[u]` is the number of
/// rank subsets of size `na` out of `na + nb` giving statistic `u`.
fn u_distribution(na: usize, nb: usize) -> Vec<u64> {
    let n = na + nb;
    let max_u = na * nb;
    // ways[j][u]: subsets of size j among ranks seen so far with U-contribution u.
    // Adding rank r to a subset of size j shifts U by (r - 1 - j).
    let mut ways = vec![vec![0u64; max_u + 1]; na + 1];
    ways[0][0] = 1;
    for r in 1..=n {
        for j in (1..=na.min(r)).rev() {
            let shift = r - j;
            if shift > nb {
                continue;
            }
            for u in (shift..=max_u).rev() {
                let add = ways[j - 1][u - shift];
                ways[j][u] += add;
            }
        }
    }
    ways.swap_remove(na)
}

fn exact_p(u: f64, na: usize, nb: usize, alternative: Alternative) -> f64 {
    let counts = u_distribution(na, nb);
    let total: u64 = counts.iter().sum();
    let u_obs = u.round() as usize;
    let upper: u64 = counts[u_obs..].iter().sum();
    let lower: u64 = counts[..=u_obs].iter().sum();
    let p_upper = upper as f64 / total as f64;
    let p_lower = lower as f64 / total as f64;
    match alternative {
        Alternative::Greater => p_upper,
        Alternative::Less => p_lower,
        Alternative::TwoSided => (2.0 * p_upper.min(p_lower)).min(1.0),
    }
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn normal_p(u: f64, na: usize, nb: usize, tie_term: f64, alternative: Alternative) -> f64 {
    let n = (na + nb) as f64;
    let (na, nb) = (na as f64, nb as f64);
    let mean = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        // every observation tied: no evidence in any direction
        return 1.0;
    }
    let sd = var.sqrt();
    match alternative {
        Alternative::Greater => normal_sf((u - mean - 0.5) / sd),
        Alternative::Less => normal_sf((mean - u - 0.5) / sd),
        Alternative::TwoSided => (2.0 * normal_sf(((u - mean).abs() - 0.5) / sd)).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Full enumeration of all C(n, na) rank assignments.
    fn brute_force_p(a: &[f64], b: &[f64], alt: Alternative) -> f64 {
        let na = a.len();
        let n = na + b.len();
        let u_obs = mann_whitney_u_with(a, b, alt, MethodChoice::Exact).unwrap().u_statistic;
        let (mut ge, mut le, mut total) = (0u64, 0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != na {
                continue;
            }
            let rank_sum: usize = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
            let u = rank_sum as f64 - (na * (na + 1)) as f64 / 2.0;
            total += 1;
            ge += (u >= u_obs) as u64;
            le += (u <= u_obs) as u64;
        }
        let (pg, pl) = (ge as f64 / total as f64, le as f64 / total as f64);
        match alt {
            Alternative::Greater => pg,
            Alternative::Less => pl,
            Alternative::TwoSided => (2.0 * pg.min(pl)).min(1.0),
        }
    }

    #[test]
    fn separated_samples_give_one_in_twenty() {
        let a = [0.1, 0.2, 0.3];
        let b = [0.4, 0.5, 0.6];
        let r = mann_whitney_u(&b, &a, Alternative::Greater).unwrap();
        assert_eq!(r.method, UMethod::Exact);
        assert_eq!(r.u_statistic, 9.0);
        assert!((r.p_value - 0.05).abs() < 1e-15, "{}", r.p_value);
        let swapped = mann_whitney_u(&a, &b, Alternative::Less).unwrap();
        assert_eq!(swapped.p_value, r.p_value);
    }

    #[test]
    fn identical_multisets_are_not_different() {
        let a = [0.3, 0.5, 0.5, 0.9, 0.1];
        let r = mann_whitney_u(&a, &a, Alternative::TwoSided).unwrap();
        assert!(r.p_value >= 0.99, "{r:?}");
        let tie_free = [0.1, 0.2, 0.3];
        let r = mann_whitney_u(&tie_free, &[0.15, 0.25, 0.35], Alternative::TwoSided).unwrap();
        assert!(r.p_value > 0.5);
    }

    #[test]
    fn u_statistics_sum_to_product() {
        let a = [0.2, 0.7, 0.7, 1.1, 3.0];
        let b = [0.7, 0.9, 2.0, 0.1];
        let ua = mann_whitney_u(&a, &b, Alternative::TwoSided).unwrap().u_statistic;
        let ub = mann_whitney_u(&b, &a, Alternative::TwoSided).unwrap().u_statistic;
        assert_eq!(ua + ub, 20.0);
    }

    #[test]
    fn exact_matches_enumeration() {
        let a = [0.31, 0.12, 0.95, 0.44, 0.28];
        let b = [0.51, 0.66, 0.07, 0.83];
        for alt in [Alternative::Greater, Alternative::Less, Alternative::TwoSided] {
            let p = mann_whitney_u(&a, &b, alt).unwrap().p_value;
            assert_eq!(p, brute_force_p(&a, &b, alt), "{alt}");
        }
    }

    #[test]
    fn distribution_counts_binomial_total() {
        let counts = u_distribution(6, 5);
        assert_eq!(counts.iter().sum::<u64>(), 462);
        assert_eq!(counts.first(), counts.last());
        let big = u_distribution(12, 12);
        assert_eq!(big.iter().sum::<u64>(), 2_704_156);
    }

    #[test]
    fn ties_force_normal_method() {
        let r = mann_whitney_u(&[1.0, 2.0, 2.0], &[2.0, 3.0], Alternative::Less).unwrap();
        assert_eq!(r.method, UMethod::NormalApprox);
        assert!(mann_whitney_u_with(&[1.0, 2.0], &[2.0], Alternative::Less, MethodChoice::Exact).is_err());
        let large: Vec<f64> = (0..13).map(f64::from).collect();
        let r = mann_whitney_u(&large, &[100.0], Alternative::Less).unwrap();
        assert_eq!(r.method, UMethod::NormalApprox);
    }

    #[test]
    fn exact_and_normal_agree_for_moderate_samples() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut worst = 0.0f64;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let na = rng.random_range(8..=12);
            let nb = rng.random_range(8..=12);
            let shift = rng.random_range(0.0..1.0);
            let a: Vec<f64> = (0..na).map(|_| rng.random::<f64>() + shift).collect();
            let b: Vec<f64> = (0..nb).map(|_| rng.random::<f64>()).collect();
            for alt in [Alternative::Greater, Alternative::Less, Alternative::TwoSided] {
                let exact = mann_whitney_u_with(&a, &b, alt, MethodChoice::Exact).unwrap().p_value;
                let normal = mann_whitney_u_with(&a, &b, alt, MethodChoice::Normal).unwrap().p_value;
                worst = worst.max((exact - normal).abs());
            }
        }
        assert!(worst <= 0.02, "largest gap {worst}");
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(mann_whitney_u(&[], &[1.0], Alternative::Greater).is_err());
        assert!(mann_whitney_u(&[1.0], &[], Alternative::Greater).is_err());
    }
}
