use super::descriptive::{mean, sample_variance};
use super::{finite, Result, StatsError};

/// Kruskal-Wallis effect size (H - k + 1) / (N - k), unclamped.
pub fn epsilon_squared(h: f64, k: usize, n: usize) -> f64 {
    (h - k as f64 + 1.0) / (n as f64 - k as f64)
}

/// Cohen's d with the pooled (n - 1 weighted) standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = finite(a);
    let b = finite(b);
    for g in [&a, &b] {
        if g.len() < 2 {
            return Err(StatsError::TooFewObservations { needed: 2, found: g.len() });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled =
        (((na - 1.0) * sample_variance(&a) + (nb - 1.0) * sample_variance(&b)) / (na + nb - 2.0)).sqrt();
    if !(pooled >= 1e-12) {
        return Err(StatsError::DegeneratePooledSD);
    }
    Ok((mean(&a) - mean(&b)) / pooled)
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut out = vec![0.0; m];
    let mut running = 0.0f64;
    for (j, &i) in order.iter().enumerate() {
        let adj = ((m - j) as f64 * p_values[i]).min(1.0);
        running = running.max(adj);
        out[i] = running;
    }
    out
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(StatsError::LengthMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 || !nu.is_finite() || !nv.is_finite() {
        return Err(StatsError::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cohens_d_examples() {
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), -3.0);
        assert_eq!(cohens_d(&[2.0, 4.0], &[0.0, 0.0]).unwrap(), 3.0);
        let a = [1.0, 4.0, 2.0];
        assert_eq!(cohens_d(&a, &a).unwrap(), 0.0);
        assert_eq!(cohens_d(&[1.0, 1.0], &[1.0, 1.0]), Err(StatsError::DegeneratePooledSD));
        assert!(cohens_d(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn holm_examples() {
        assert_eq!(holm_adjust(&[0.03]), vec![0.03]);
        let adj = holm_adjust(&[0.01, 0.02, 0.04]);
        let expected = [0.03, 0.04, 0.04];
        for (a, e) in adj.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        let adj = holm_adjust(&[0.2, 1.0, 0.001]);
        assert_eq!(adj[1], 1.0);
        // original order is kept
        let adj = holm_adjust(&[0.04, 0.01, 0.02]);
        assert!((adj[0] - 0.04).abs() < 1e-15 && (adj[1] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn cosine_examples() {
        let u = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        let v = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!((cosine(&u, &v).unwrap() - 35.0 / 55.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), Err(StatsError::ZeroVector));
    }

    #[test]
    fn epsilon_squared_at_null_expectation_is_zero() {
        for k in 2..10 {
            assert_eq!(epsilon_squared((k - 1) as f64, k, 100), 0.0);
        }
    }

    proptest! {
        #[test]
        fn cohens_d_antisymmetric(a in prop::collection::vec(-100.0f64..100.0, 2..12),
                                  b in prop::collection::vec(-100.0f64..100.0, 2..12)) {
            if let (Ok(x), Ok(y)) = (cohens_d(&a, &b), cohens_d(&b, &a)) {
                prop_assert_eq!(x, -y);
            }
        }

        #[test]
        fn holm_is_monotone_and_bounded(p in prop::collection::vec(0.0f64..=1.0, 1..30)) {
            let adj = holm_adjust(&p);
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
            for w in order.windows(2) {
                prop_assert!(adj[w[0]] <= adj[w[1]]);
            }
            for (a, raw) in adj.iter().zip(&p) {
                prop_assert!(a >= raw && *a <= 1.0);
            }
        }
    }
}
