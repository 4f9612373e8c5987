//! Goodness-of-fit tests and confidence intervals.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square) or effective sample size (KS).
    pub df: f64,
}

impl TestResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

const MIN_EXPECTED: f64 = 5.0;

/// Merge adjacent cells so every expected count is at least 5; the last cell absorbs the tail.
fn merge_cells(observed: &[f64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&oi, &ei) in observed.iter().zip(expected) {
        o += oi;
        e += ei;
        if e >= MIN_EXPECTED {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
            *lo += o;
            *le += e;
        } else {
            obs.push(o);
            exp.push(e);
        }
    }
    (obs, exp)
}

fn chi_square_p(stat: f64, df: f64) -> f64 {
    if df < 1.0 {
        return 1.0;
    }
    let chi = ChiSquared::new(df).expect("positive degrees of freedom");
    (1.0 - chi.cdf(stat)).clamp(0.0, 1.0)
}

/// Chi-square goodness of fit of integer samples against a pmf on `0..pmf.len()`.
/// Mass beyond the pmf (and samples beyond it) fall into the last cell.
pub fn chi_square_pmf(samples: &[usize], pmf: &[f64]) -> Result<TestResult> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::InsufficientData(format!("chi-square needs n >= 100, got {n}")));
    }
    let k = pmf.len();
    let mut counts = vec![0.0; k];
    for &s in samples {
        counts[s.min(k - 1)] += 1.0;
    }
    let total: f64 = pmf.iter().sum();
    let mut expected: Vec<f64> = pmf.iter().map(|p| p * n as f64).collect();
    expected[k - 1] += (1.0 - total).max(0.0) * n as f64;
    let (obs, exp) = merge_cells(&counts, &expected);
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (obs.len() as f64 - 1.0).max(0.0);
    Ok(TestResult { statistic: stat, p_value: chi_square_p(stat, df), df })
}

/// Chi-square test of homogeneity between two integer samples.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> Result<TestResult> {
    if a.len() < 100 || b.len() < 100 {
        return Err(Error::InsufficientData("two-sample chi-square needs n >= 100 per side".into()));
    }
    let k = a.iter().chain(b).copied().max().unwrap_or(0) + 1;
    let mut ca = vec![0.0; k];
    let mut cb = vec![0.0; k];
    a.iter().for_each(|&x| ca[x] += 1.0);
    b.iter().for_each(|&x| cb[x] += 1.0);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    // Merge on pooled expected counts of the smaller side.
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut xa, mut xb) = (0.0, 0.0);
    for j in 0..k {
        xa += ca[j];
        xb += cb[j];
        let pooled = xa + xb;
        if pooled * na.min(nb) / n >= MIN_EXPECTED {
            cells.push((xa, xb));
            xa = 0.0;
            xb = 0.0;
        }
    }
    if xa + xb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += xa;
                last.1 += xb;
            }
            None => cells.push((xa, xb)),
        }
    }
    let mut stat = 0.0;
    for &(oa, ob) in &cells {
        let pooled = oa + ob;
        let ea = pooled * na / n;
        let eb = pooled * nb / n;
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let df = (cells.len() as f64 - 1.0).max(0.0);
    Ok(TestResult { statistic: stat, p_value: chi_square_p(stat, df), df })
}

/// Asymptotic Kolmogorov tail `P(K > x)`.
fn kolmogorov_tail(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.27 {
        return 1.0;
    }
    if x < 1.0 {
        // Small-x form of the series converges faster.
        let y = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (0..20).map(|k| ((2 * k + 1) as f64).powi(2) * y).map(f64::exp).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS p-value with the finite-sample correction of Stephens.
fn ks_p(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_tail((s + 0.12 + 0.11 / s) * d)
}

/// One-sample Kolmogorov–Smirnov test against a CDF.
///
/// The CDF may have atoms (left limits are taken from `cdf_left`); the test is then conservative.
pub fn ks_one_sample<F, G>(samples: &[f64], cdf: F, cdf_left: G) -> Result<TestResult>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let n = samples.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!("KS needs n >= 10, got {n}")));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        let below = i as f64 / nf;
        let upto = (j + 1) as f64 / nf;
        d = d.max((upto - cdf(x[i])).abs()).max((below - cdf_left(x[i])).abs());
        i = j + 1;
    }
    Ok(TestResult { statistic: d, p_value: ks_p(d, nf), df: nf })
}

/// One-sample KS against a continuous CDF.
pub fn ks_continuous<F: Fn(f64) -> f64 + Copy>(samples: &[f64], cdf: F) -> Result<TestResult> {
    ks_one_sample(samples, cdf, cdf)
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 10 || b.len() < 10 {
        return Err(Error::InsufficientData("two-sample KS needs n >= 10 per side".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    Ok(TestResult { statistic: d, p_value: ks_p(d, n_eff), df: n_eff })
}

/// Mean with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn overlaps(&self, other: &MeanCi) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }
}

pub const Z95: f64 = 1.959_963_984_540_054;

pub fn mean_ci(xs: &[f64]) -> MeanCi {
    let n = xs.len();
    if n == 0 {
        return MeanCi { mean: f64::NAN, half_width: f64::NAN, n };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        f64::NAN
    };
    MeanCi { mean, half_width: Z95 * (var / n as f64).sqrt(), n }
}

/// Batch-means interval for a correlated series (e.g. a long simulation run).
pub fn batch_means_ci(xs: &[f64], batches: usize) -> MeanCi {
    let size = xs.len() / batches.max(1);
    let means: Vec<f64> = xs.chunks_exact(size.max(1)).take(batches).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let ci = mean_ci(&means);
    MeanCi { mean: xs.iter().sum::<f64>() / xs.len() as f64, half_width: ci.half_width, n: xs.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Role, StreamKey};

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Classic critical values of the limiting distribution.
        assert!((kolmogorov_tail(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_tail(1.628) - 0.01).abs() < 5e-4);
        assert!((kolmogorov_tail(0.5) - 0.9639).abs() < 1e-3);
    }

    #[test]
    fn identical_samples_two_sample_p_is_one() {
        let xs: Vec<f64> = (0..200).map(|i| (i as f64).sin()).collect();
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let ks: Vec<usize> = (0..300).map(|i| i % 7).collect();
        assert!((chi_square_two_sample(&ks, &ks).unwrap().p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_consistency_rejection_rate() {
        let mut rng = StreamKey::new(11, 0).stream(Role::Auxiliary, 0);
        let trials = 400;
        let mut rejections = 0;
        for _ in 0..trials {
            let xs: Vec<f64> = (0..200).map(|_| rng.exp1()).collect();
            if !ks_continuous(&xs, |x| 1.0 - (-x).exp()).unwrap().passes(0.01) {
                rejections += 1;
            }
        }
        // Binomial(400, 0.01): mean 4, so 14 is far in the tail.
        assert!(rejections <= 14, "{rejections}");
    }

    #[test]
    fn power_against_shifted_law() {
        let mut rng = StreamKey::new(12, 0).stream(Role::Auxiliary, 0);
        let xs: Vec<f64> = (0..2000).map(|_| 0.2 + rng.exp1()).collect();
        assert!(!ks_continuous(&xs, |x| 1.0 - (-x.max(0.0)).exp()).unwrap().passes(0.01));
        let geo: Vec<usize> = (0..2000).map(|_| (rng.exp1() / 0.5) as usize).collect();
        let pmf: Vec<f64> = (0..30).map(|k| 0.5 * 0.5f64.powi(k)).collect();
        assert!(!chi_square_pmf(&geo, &pmf).unwrap().passes(0.01));
    }

    #[test]
    fn chi_square_accepts_true_pmf() {
        let mut rng = StreamKey::new(13, 0).stream(Role::Auxiliary, 0);
        let p = 0.4f64;
        let pmf: Vec<f64> = (0..60).map(|k| (1.0 - p) * p.powi(k)).collect();
        let xs: Vec<usize> = (0..5000)
            .map(|_| (rng.open01().ln() / p.ln()).floor() as usize)
            .collect();
        let r = chi_square_pmf(&xs, &pmf).unwrap();
        assert!(r.passes(0.001), "{r:?}");
    }

    #[test]
    fn small_samples_rejected() {
        assert!(matches!(chi_square_pmf(&[0; 10], &[1.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn ci_shrinks_like_root_n() {
        let mut rng = StreamKey::new(14, 0).stream(Role::Auxiliary, 0);
        let a: Vec<f64> = (0..4000).map(|_| rng.exp1()).collect();
        let w1 = mean_ci(&a[..2000]).half_width;
        let w2 = mean_ci(&a).half_width;
        assert!((w1 / w2 / 2f64.sqrt() - 1.0).abs() < 0.15);
    }
}
