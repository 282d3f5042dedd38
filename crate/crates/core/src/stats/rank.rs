//! Rank-based tests.

use super::descriptive::pearson;
use super::effect::epsilon_squared;
use super::special::{chi2_sf, kolmogorov_sf, normal_sf, t_two_sided};
use super::{finite, Result, StatsError, TestResult};

/// Largest pooled size for which the exact Mann-Whitney p-value is used.
pub const EXACT_MAX_N: usize = 12;

/// Midranks (1-based) and the sizes of tie groups with more than one member.
pub fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share the average of ranks i+1..=j
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

fn tie_sum(ties: &[usize]) -> f64 {
    ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum()
}

/// Spearman rank correlation with a two-sided t-approximation p-value.
/// `extras["approximate"]` is 1 when n < 10.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewPairs(n));
    }
    let (rx, _) = average_ranks(&xs);
    let (ry, _) = average_ranks(&ys);
    let rho = pearson(&rx, &ry).ok_or(StatsError::ConstantInput)?;
    let df = (n - 2) as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided(rho * (df / (1.0 - rho * rho)).sqrt(), df)
    };
    let mut extras = std::collections::BTreeMap::new();
    extras.insert("approximate".into(), if n < 10 { 1.0 } else { 0.0 });
    Ok(TestResult {
        statistic: rho,
        p_value: p,
        n,
        extras,
    })
}

/// Kruskal-Wallis H with tie correction, chi-squared p-value, and
/// epsilon-squared (`epsilon_squared` clamped at 0, `epsilon_squared_raw`
/// unclamped).
pub fn kruskal_wallis<G: AsRef<[f64]>>(groups: &[G]) -> Result<TestResult> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    let cleaned: Vec<Vec<f64>> = groups.iter().map(|g| finite(g.as_ref())).collect();
    if let Some(i) = cleaned.iter().position(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup(i));
    }
    let pooled: Vec<f64> = cleaned.iter().flatten().copied().collect();
    let n = pooled.len();
    if n < k + 1 {
        return Err(StatsError::TooFewObservations { needed: k + 1, found: n });
    }
    let (ranks, ties) = average_ranks(&pooled);
    let nf = n as f64;
    let mut offset = 0;
    let mut sum = 0.0;
    for g in &cleaned {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let correction = 1.0 - tie_sum(&ties) / (nf * nf * nf - nf);
    let (h, p) = if correction <= 0.0 {
        (0.0, 1.0)
    } else {
        let h = (12.0 / (nf * (nf + 1.0)) * sum - 3.0 * (nf + 1.0)) / correction;
        let h = h.max(0.0);
        (h, chi2_sf(h, (k - 1) as f64))
    };
    let eps = epsilon_squared(h, k, n);
    let mut extras = std::collections::BTreeMap::new();
    extras.insert("epsilon_squared".into(), eps.max(0.0));
    extras.insert("epsilon_squared_raw".into(), eps);
    extras.insert("df".into(), (k - 1) as f64);
    extras.insert("k".into(), k as f64);
    Ok(TestResult {
        statistic: h,
        p_value: p,
        n,
        extras,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    /// Exact when the pooled size is at most [`EXACT_MAX_N`].
    Auto,
    Exact,
    /// Normal approximation with tie and continuity correction.
    Asymptotic,
}

/// Mann-Whitney U for sample `a` (count of pairs with a > b, ties half),
/// two-sided p, and rank-biserial 1 - 2U/(n_a n_b).
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<TestResult> {
    mann_whitney_with(a, b, PValueMethod::Auto)
}

pub fn mann_whitney_with(a: &[f64], b: &[f64], method: PValueMethod) -> Result<TestResult> {
    let a = finite(a);
    let b = finite(b);
    if a.is_empty() {
        return Err(StatsError::EmptyGroup(0));
    }
    if b.is_empty() {
        return Err(StatsError::EmptyGroup(1));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
    let (ranks, ties) = average_ranks(&pooled);
    let ra: f64 = ranks[..na].iter().sum();
    let u = ra - (na * (na + 1)) as f64 / 2.0;
    let mu = (na * nb) as f64 / 2.0;

    let exact = match method {
        PValueMethod::Auto => n <= EXACT_MAX_N,
        PValueMethod::Exact => true,
        PValueMethod::Asymptotic => false,
    };
    let p = if exact {
        exact_p(&ranks, na, (u - mu).abs())
    } else {
        let nf = n as f64;
        let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - tie_sum(&ties) / (nf * (nf - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let z = (((u - mu).abs() - 0.5) / var.sqrt()).max(0.0);
            (2.0 * normal_sf(z)).min(1.0)
        }
    };
    let mut extras = std::collections::BTreeMap::new();
    extras.insert("rank_biserial".into(), 1.0 - 2.0 * u / (na * nb) as f64);
    extras.insert("n_a".into(), na as f64);
    extras.insert("n_b".into(), nb as f64);
    extras.insert("exact".into(), if exact { 1.0 } else { 0.0 });
    Ok(TestResult {
        statistic: u,
        p_value: p,
        n,
        extras,
    })
}

/// Fraction of the C(n, n_a) rank assignments whose |U - mu| is at least the
/// observed deviation. Enumerates combinations in lexicographic order.
fn exact_p(ranks: &[f64], na: usize, observed_dev: f64) -> f64 {
    let n = ranks.len();
    let nb = n - na;
    let mu = (na * nb) as f64 / 2.0;
    let offset = (na * (na + 1)) as f64 / 2.0;
    let mut idx: Vec<usize> = (0..na).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        let r: f64 = idx.iter().map(|&i| ranks[i]).sum();
        let dev = (r - offset - mu).abs();
        total += 1;
        if dev >= observed_dev - 1e-9 {
            hits += 1;
        }
        // next combination
        let mut i = na;
        loop {
            if i == 0 {
                return hits as f64 / total as f64;
            }
            i -= 1;
            if idx[i] != i + n - na {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..na {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One-sample Kolmogorov-Smirnov test of values against Uniform(0, 1),
/// with the Stephens small-sample correction on the asymptotic p-value.
pub fn ks_uniform(values: &[f64]) -> Result<TestResult> {
    let mut v = finite(values);
    if v.is_empty() {
        return Err(StatsError::TooFewObservations { needed: 1, found: 0 });
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i as f64 + 1.0) / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        n: v.len(),
        extras: Default::default(),
    })
}
