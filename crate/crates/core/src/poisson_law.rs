//! Exact Poisson counting law, used for closed-form event probabilities.

/// `P(N = k)` for `N ~ Poisson(mean)`.
pub fn pmf(k: i64, mean: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
    (k as f64 * mean.ln() - mean - ln_fact).exp()
}

/// `P(N <= k)`.
pub fn cdf(k: i64, mean: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut term = (-mean).exp();
    let mut acc = term;
    for i in 1..=k {
        term *= mean / i as f64;
        acc += term;
    }
    acc.min(1.0)
}

/// `P(N >= k)`, summed directly over the upper tail so that small tails keep
/// their relative precision.
pub fn upper_tail(k: i64, mean: f64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    if mean > k as f64 {
        return (1.0 - cdf(k - 1, mean)).max(0.0);
    }
    let mut term = pmf(k, mean);
    let mut acc = 0.0;
    let mut i = k;
    while term > 0.0 && (term > acc * 1e-18 || i < k + 5) {
        acc += term;
        i += 1;
        term *= mean / i as f64;
    }
    acc
}

/// Largest count worth enumerating: beyond it the tail mass is below 1e-17.
pub fn enumeration_cutoff(mean: f64) -> i64 {
    (mean + 14.0 * mean.sqrt() + 40.0).ceil() as i64
}

/// `E[g(N)]` by direct enumeration of the law.
pub fn expect<G: Fn(i64) -> f64>(mean: f64, g: G) -> f64 {
    (0..=enumeration_cutoff(mean)).map(|k| pmf(k, mean) * g(k)).sum()
}
