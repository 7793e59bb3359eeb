use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// Pairs `(a, b)` with `a > b`, ties counting one half.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
}

/// Largest smaller sample for which the exact distribution is used.
pub const EXACT_LIMIT: usize = 8;

/// Two-sided Mann-Whitney U test. Exact when the smaller sample has at most
/// [`EXACT_LIMIT`] values and there are no ties, otherwise the normal
/// approximation with tie correction and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let (u, ties) = u_statistic(a, b)?;
    let exact = a.len().min(b.len()) <= EXACT_LIMIT && !ties;
    let p = if exact {
        exact_p(u, a.len(), b.len())
    } else {
        normal_p(a, b)?
    };
    Ok(MannWhitney { u, p, exact })
}

/// U from midranks, and whether the pooled sample has ties.
fn u_statistic(a: &[f64], b: &[f64]) -> Result<(f64, bool)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Stats(
            "Mann-Whitney U needs two nonempty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Stats("samples contain NaN".into()));
    }
    let ranks = midranks(a, b);
    let n = a.len() as f64;
    let rank_sum: f64 = ranks.ranks[..a.len()].iter().sum();
    Ok((
        rank_sum - n * (n + 1.0) / 2.0,
        ranks.tie_sizes.iter().any(|&t| t > 1),
    ))
}

struct Ranks {
    /// Pooled midranks, `a` first then `b`.
    ranks: Vec<f64>,
    tie_sizes: Vec<usize>,
}

fn midranks(a: &[f64], b: &[f64]) -> Ranks {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    Ranks { ranks, tie_sizes }
}

/// Number of arrangements giving each value of U, for sizes `n` and `m`.
fn u_counts(n: usize, m: usize) -> Vec<f64> {
    // f[i][j][u]: ways for i values of A and j of B to produce u.
    let mut f = vec![vec![vec![0.0f64; n * m + 1]; m + 1]; n + 1];
    for row in &mut f[0] {
        row[0] = 1.0;
    }
    for i in 1..=n {
        f[i][0][0] = 1.0;
        for j in 1..=m {
            for u in 0..=i * j {
                // largest value is from A (beats all j of B) or from B
                let from_a = if u >= j { f[i - 1][j][u - j] } else { 0.0 };
                f[i][j][u] = from_a + f[i][j - 1][u];
            }
        }
    }
    f[n][m].clone()
}

/// Exact two-sided p-value: twice the smaller tail, capped at one.
pub fn exact_p(u: f64, n: usize, m: usize) -> f64 {
    let counts = u_counts(n, m);
    let total: f64 = counts.iter().sum();
    let u = u.round() as usize;
    let lower: f64 = counts[..=u].iter().sum();
    let upper: f64 = counts[u..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn normal_p(a: &[f64], b: &[f64]) -> Result<f64> {
    let (u, _) = u_statistic(a, b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let total = n + m;
    let ties: f64 = midranks(a, b)
        .tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let correction = if total > 1.0 {
        ties / (total * (total - 1.0))
    } else {
        0.0
    };
    let variance = n * m / 12.0 * ((total + 1.0) - correction);
    if variance <= 0.0 {
        return Ok(1.0);
    }
    let z = ((u - n * m / 2.0).abs() - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok((2.0 * (1.0 - normal.cdf(z))).min(1.0))
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates every way of choosing A's ranks from 1..=n+m.
    fn brute_force_p(u: f64, n: usize, m: usize) -> f64 {
        let total = n + m;
        let (mut le, mut ge, mut all) = (0u64, 0u64, 0u64);
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let rank_sum: usize = (0..total)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| i + 1)
                .sum();
            let uu = rank_sum as f64 - (n * (n + 1)) as f64 / 2.0;
            all += 1;
            le += u64::from(uu <= u);
            ge += u64::from(uu >= u);
        }
        (2.0 * le.min(ge) as f64 / all as f64).min(1.0)
    }

    #[test]
    fn published_small_cases() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.exact);
        assert!((r.p - 0.1).abs() < 1e-12);
        let r = mann_whitney_u(&[5.0], &[1.0]).unwrap();
        assert_eq!((r.u, r.p), (1.0, 1.0));
    }

    #[test]
    fn exact_matches_enumeration() {
        for (n, m) in [(1, 1), (2, 3), (3, 3), (4, 5), (5, 5), (3, 7)] {
            for u in 0..=n * m {
                let got = exact_p(u as f64, n, m);
                let want = brute_force_p(u as f64, n, m);
                assert!((got - want).abs() < 1e-12, "n={n} m={m} u={u}");
            }
        }
    }

    #[test]
    fn identical_samples_are_not_different() {
        let a = [3.0, 3.0, 4.0, 7.0, 7.0, 9.0, 10.0, 10.0, 11.0, 12.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert!(!r.exact);
        assert!(r.p >= 0.99, "{}", r.p);
        let c = [2.0; 4];
        assert_eq!(mann_whitney_u(&c, &c).unwrap().p, 1.0);
    }

    #[test]
    fn empty_and_nan_rejected() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn large_samples_use_normal() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (10..30).map(f64::from).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(!r.exact);
        // 45 strict wins plus ten ties at one half
        assert_eq!(r.u, 50.0);
        assert!(r.p < 0.01);
    }

    #[test]
    fn mean_and_sd() {
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
    }
}
