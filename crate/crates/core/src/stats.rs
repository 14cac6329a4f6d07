//! Summary statistics and number formatting for experiment reports.

/// `x` with 9 significant digits in plain decimal notation.
pub fn decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let e = x.abs().log10().floor() as i32;
    let places = (8 - e).max(0) as usize;
    let s = format!("{x:.places$}");
    // Rounding can carry into a new leading digit, e.g. 9.999999999 -> 10.00000000.
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > 9 && places > 0 {
        let places = places - 1;
        format!("{x:.places$}")
    } else {
        s
    }
}

/// Linear-interpolation quantile of sorted data, `p` in [0, 1].
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(&sorted(xs), 0.5)
}

/// First and third quartiles.
pub fn quartiles(xs: &[f64]) -> (f64, f64) {
    let s = sorted(xs);
    (quantile(&s, 0.25), quantile(&s, 0.75))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; `None` below two observations.
pub fn stdev(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

pub fn stderr(xs: &[f64]) -> Option<f64> {
    stdev(xs).map(|s| s / (xs.len() as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
}

/// Ordinary least squares `y = intercept + slope x`. Standard errors are NaN
/// with only two points.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, intercept_se) = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let s2 = rss / (n - 2) as f64;
        ((s2 / sxx).sqrt(), (s2 * (1.0 / n as f64 + mx * mx / sxx)).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Some(LinearFit { slope, intercept, slope_se, intercept_se })
}

/// Upper tail `P(X >= x)` of a chi-square variable with `df` degrees of
/// freedom, by the Wilson-Hilferty cube-root normal approximation
/// (absolute error around 1e-3 for df above 30).
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let v = 2.0 / (9.0 * df);
    let z = ((x / df).cbrt() - (1.0 - v)) / v.sqrt();
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Pearson statistic against the uniform law on `counts.len()` cells.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

/// Total-variation distance between two count vectors, each normalized.
pub fn total_variation(a: &[u64], b: &[u64]) -> f64 {
    let (sa, sb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let len = a.len().max(b.len());
    let at = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    0.5 * (0..len).map(|i| (at(a, i) / sa - at(b, i) / sb).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_have_nine_significant_digits() {
        assert_eq!(decimal(0.381274365995048), "0.381274366");
        assert_eq!(decimal(151.36712345), "151.367123");
        assert_eq!(decimal(123456789.4), "123456789");
        assert_eq!(decimal(9.9999999996), "10.0000000");
        assert_eq!(decimal(0.000123456789012), "0.000123456789");
        assert_eq!(decimal(-2.5), "-2.50000000");
        assert_eq!(decimal(0.0), "0");
    }

    #[test]
    fn quantiles() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&xs), 2.5);
        assert_eq!(quartiles(&xs), (1.75, 3.25));
        assert_eq!(median(&[7.0]), 7.0);
        assert_eq!(stdev(&[7.0]), None);
        assert!((stdev(&[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 1.0).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
        assert!(fit_line(&[1.0, 2.0], &[3.0, 5.0]).unwrap().slope_se.is_nan());
        assert!(fit_line(&[1.0, 1.0], &[3.0, 5.0]).is_none());
    }

    #[test]
    fn chi_square_tail_matches_tables() {
        // Tabulated 5% and 1% critical values.
        for (df, x05, x01) in [(50.0, 67.505, 76.154), (100.0, 124.342, 135.807), (194.0, 227.496, 242.742)] {
            assert!((chi_square_sf(x05, df) - 0.05).abs() < 2e-3, "df={df}");
            assert!((chi_square_sf(x01, df) - 0.01).abs() < 1e-3, "df={df}");
        }
        assert!((chi_square_sf(194.0, 194.0) - 0.48).abs() < 0.02);
    }

    #[test]
    fn tv_distance() {
        assert_eq!(total_variation(&[1, 1], &[2, 2]), 0.0);
        assert_eq!(total_variation(&[1, 0], &[0, 1]), 1.0);
        assert!((total_variation(&[3, 1], &[1, 1, 2]) - 0.5).abs() < 1e-12);
    }
}
