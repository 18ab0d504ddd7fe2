//! Statistical base rules that produce a raw, pre-legibility binning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{infer_grain, quantile_sorted, SeriesProfile};
use crate::decimal::Dec;
use crate::scheme::{BinScheme, Grain, Provenance};

pub const FREEDMAN_DIACONIS: &str = "freedman_diaconis";
pub const SCOTT: &str = "scott";
pub const STURGES: &str = "sturges";
pub const CONSTANT: &str = "constant";

/// `⌈log2 n⌉ + 1`.
pub fn sturges_k(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::TooFew {
            what: "sturges rule",
            need: 1,
            got: 0,
        });
    }
    let ceil_log2 = (usize::BITS - (n - 1).leading_zeros()) as usize;
    Ok(ceil_log2 + 1)
}

/// Freedman-Diaconis width `2·IQR·n^(-1/3)`.
pub fn fd_width(profile: &SeriesProfile) -> Result<f64> {
    if profile.n < 2 {
        return Err(Error::TooFew {
            what: "freedman-diaconis rule",
            need: 2,
            got: profile.n,
        });
    }
    if profile.iqr <= 0.0 {
        return Err(Error::DegenerateSpread("interquartile range is zero"));
    }
    Ok(2.0 * profile.iqr / (profile.n as f64).cbrt())
}

/// Scott width `3.49·σ·n^(-1/3)`.
pub fn scott_width(profile: &SeriesProfile) -> Result<f64> {
    if profile.n < 2 {
        return Err(Error::TooFew {
            what: "scott rule",
            need: 2,
            got: profile.n,
        });
    }
    if profile.sd <= 0.0 {
        return Err(Error::DegenerateSpread("standard deviation is zero"));
    }
    Ok(3.49 * profile.sd / (profile.n as f64).cbrt())
}

/// Which statistical rule seeds the default pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseRule {
    /// Freedman-Diaconis, then Scott, then Sturges.
    #[default]
    Cascade,
    FreedmanDiaconis,
    Scott,
    Sturges,
}

/// A raw width and the id of the rule that produced it. `None` means the
/// data has no spread at all and belongs in a single bin.
pub fn base_width(profile: &SeriesProfile, rule: BaseRule) -> Result<Option<(f64, &'static str)>> {
    if profile.max <= profile.min {
        return Ok(None);
    }
    let sturges = || -> Result<(f64, &'static str)> {
        Ok((profile.range() / sturges_k(profile.n)? as f64, STURGES))
    };
    let picked = match rule {
        BaseRule::FreedmanDiaconis => (fd_width(profile)?, FREEDMAN_DIACONIS),
        BaseRule::Scott => (scott_width(profile)?, SCOTT),
        BaseRule::Sturges => sturges()?,
        BaseRule::Cascade => match fd_width(profile) {
            Ok(w) => (w, FREEDMAN_DIACONIS),
            Err(_) => match scott_width(profile) {
                Ok(w) => (w, SCOTT),
                Err(_) => sturges()?,
            },
        },
    };
    Ok(Some(picked))
}

pub fn equal_interval(profile: &SeriesProfile, k: usize) -> Result<BinScheme> {
    if k == 0 {
        return Err(Error::TooFew {
            what: "equal interval",
            need: 1,
            got: 0,
        });
    }
    if profile.max <= profile.min {
        return Err(Error::DegenerateSpread("min equals max"));
    }
    let width = profile.range() / k as f64;
    let mut edges: Vec<f64> = (0..k).map(|i| profile.min + width * i as f64).collect();
    edges.push(profile.max);
    BinScheme::new(
        edges,
        false,
        false,
        Provenance::Default("equal_interval".into()),
        profile.grain,
    )
}

fn sorted_finite(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidValue(format!("{v} is not finite")));
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

fn grain_of(xs: &[f64]) -> Grain {
    let decs: Vec<Dec> = xs.iter().filter_map(|&v| Dec::from_f64(v)).collect();
    infer_grain(&decs)
}

/// A rule result that may hold fewer bins than requested.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBins {
    pub scheme: BinScheme,
    /// Set when ties or too few distinct values forced fewer bins.
    pub reduced: bool,
}

/// Interior edges at the R-7 quantiles `i/k`, deduplicated.
pub fn quantile_breaks(values: &[f64], k: usize) -> Result<ReducedBins> {
    if k == 0 || values.len() < k {
        return Err(Error::TooFew {
            what: "quantile breaks",
            need: k.max(1),
            got: values.len(),
        });
    }
    let xs = sorted_finite(values)?;
    let (min, max) = (xs[0], xs[xs.len() - 1]);
    if max <= min {
        return Err(Error::DegenerateSpread("all values are equal"));
    }
    let mut edges = vec![min];
    for i in 1..k {
        let q = quantile_sorted(&xs, i as f64 / k as f64);
        if q > *edges.last().unwrap() && q < max {
            edges.push(q);
        }
    }
    edges.push(max);
    let reduced = edges.len() - 1 < k;
    let scheme = BinScheme::new(
        edges,
        false,
        false,
        Provenance::Default("quantile".into()),
        grain_of(&xs),
    )?;
    Ok(ReducedBins { scheme, reduced })
}

/// Optimal contiguous classes of sorted data.
#[derive(Debug, Clone, PartialEq)]
pub struct JenksBreaks {
    pub scheme: BinScheme,
    /// `[start, end)` ranges into the sorted input, one per class.
    pub classes: Vec<(usize, usize)>,
    /// Total within-class sum of squared deviations.
    pub objective: f64,
    pub reduced: bool,
}

/// Prefix sums over weighted distinct values, shifted for stability.
struct Moments {
    w: Vec<f64>,
    s: Vec<f64>,
    q: Vec<f64>,
}

impl Moments {
    fn new(values: &[f64], weights: &[f64]) -> Moments {
        let shift = values[values.len() / 2];
        let mut m = Moments {
            w: vec![0.0],
            s: vec![0.0],
            q: vec![0.0],
        };
        for (&v, &w) in values.iter().zip(weights) {
            let x = v - shift;
            m.w.push(m.w.last().unwrap() + w);
            m.s.push(m.s.last().unwrap() + w * x);
            m.q.push(m.q.last().unwrap() + w * x * x);
        }
        m
    }

    /// Sum of squared deviations of distinct values `[a, b)`.
    fn ssd(&self, a: usize, b: usize) -> f64 {
        let w = self.w[b] - self.w[a];
        let s = self.s[b] - self.s[a];
        let q = self.q[b] - self.q[a];
        (q - s * s / w).max(0.0)
    }
}

/// Fisher's exact dynamic program for Jenks natural breaks, `O(k·m²)` in
/// the number of distinct values `m`. Classes never split tied values.
/// Among equal-cost partitions the earliest break positions win.
pub fn jenks_breaks(values: &[f64], k: usize) -> Result<JenksBreaks> {
    if k == 0 {
        return Err(Error::TooFew {
            what: "jenks breaks",
            need: 1,
            got: 0,
        });
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let xs = sorted_finite(values)?;

    // Collapse ties into weighted distinct values.
    let mut distinct: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut starts: Vec<usize> = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        if distinct.last() == Some(&x) {
            *weights.last_mut().unwrap() += 1.0;
        } else {
            distinct.push(x);
            weights.push(1.0);
            starts.push(i);
        }
    }
    let m = distinct.len();
    let reduced = m < k;
    let k = k.min(m);
    let mom = Moments::new(&distinct, &weights);

    // cost[c][j]: best cost of the first j distinct values in c+1 classes.
    // split[c][j]: start of the last class in that optimum.
    let mut cost = vec![vec![f64::INFINITY; m + 1]; k];
    let mut split = vec![vec![0usize; m + 1]; k];
    for j in 1..=m {
        cost[0][j] = mom.ssd(0, j);
    }
    for c in 1..k {
        for j in (c + 1)..=m {
            let mut best = f64::INFINITY;
            let mut arg = c;
            for s in c..j {
                let v = cost[c - 1][s] + mom.ssd(s, j);
                // relative slack so float noise cannot reorder exact ties
                if best.is_infinite() || v < best - 1e-12 * best.abs().max(1.0) {
                    best = v;
                    arg = s;
                }
            }
            cost[c][j] = best;
            split[c][j] = arg;
        }
    }

    let mut bounds = vec![m];
    let mut j = m;
    for c in (1..k).rev() {
        j = split[c][j];
        bounds.push(j);
    }
    bounds.push(0);
    bounds.reverse();

    let classes: Vec<(usize, usize)> = bounds
        .windows(2)
        .map(|w| (starts[w[0]], if w[1] == m { xs.len() } else { starts[w[1]] }))
        .collect();
    let grain = grain_of(&xs);
    let mut edges: Vec<f64> = bounds[..k].iter().map(|&b| distinct[b]).collect();
    let top = distinct[m - 1];
    if edges[k - 1] < top {
        edges.push(top);
    } else {
        // the top class is the single value `top`; give it a grain-wide bin
        let past = Dec::from_f64(top)
            .and_then(|d| d.checked_add(grain.step()))
            .ok_or(Error::Overflow("jenks upper edge"))?;
        edges.push(past.to_f64());
    }
    let scheme = BinScheme::new(
        edges,
        false,
        false,
        Provenance::Default("jenks".into()),
        grain,
    )?;
    Ok(JenksBreaks {
        scheme,
        classes,
        objective: cost[k - 1][m],
        reduced,
    })
}

/// Edges at `mean ± j·sd` (or half-sd steps) clipped to the data extent.
pub fn stddev_breaks(profile: &SeriesProfile, half_widths: bool) -> Result<BinScheme> {
    if profile.sd <= 0.0 {
        return Err(Error::DegenerateSpread("standard deviation is zero"));
    }
    let step = if half_widths { profile.sd / 2.0 } else { profile.sd };
    let lo_j = ((profile.min - profile.mean) / step).floor() as i64;
    let hi_j = ((profile.max - profile.mean) / step).ceil() as i64;
    let mut edges = vec![profile.min];
    for j in lo_j..=hi_j {
        let e = profile.mean + j as f64 * step;
        if e > profile.min && e < profile.max {
            edges.push(e);
        }
    }
    edges.push(profile.max);
    BinScheme::new(
        edges,
        false,
        false,
        Provenance::Default(if half_widths { "stddev_half" } else { "stddev" }.into()),
        profile.grain,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prof(n: usize, iqr: f64, sd: f64) -> SeriesProfile {
        SeriesProfile {
            n,
            missing: 0,
            min: 0.0,
            max: 100.0,
            mean: 50.0,
            sd,
            iqr,
            grain: Grain::UNIT,
        }
    }

    fn extent(min: f64, max: f64, mean: f64, sd: f64) -> SeriesProfile {
        SeriesProfile {
            min,
            max,
            mean,
            ..prof(10, 1.0, sd)
        }
    }

    /// Every way to cut `xs` into `k` contiguous non-empty classes.
    fn brute_force(xs: &[f64], k: usize) -> (f64, Vec<usize>) {
        fn ssd(c: &[f64]) -> f64 {
            let m = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|x| (x - m) * (x - m)).sum()
        }
        fn go(xs: &[f64], from: usize, k: usize, cuts: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
            if k == 1 {
                let mut total = 0.0;
                let mut prev = 0;
                for &c in cuts.iter().chain(std::iter::once(&xs.len())) {
                    total += ssd(&xs[prev..c]);
                    prev = c;
                }
                if total < best.0 - 1e-9 {
                    *best = (total, cuts.clone());
                }
                return;
            }
            for c in (from + 1)..=(xs.len() - k + 1) {
                cuts.push(c);
                go(xs, c, k - 1, cuts, best);
                cuts.pop();
            }
        }
        let mut best = (f64::INFINITY, vec![]);
        go(xs, 0, k, &mut vec![], &mut best);
        best
    }

    #[test]
    fn sturges_examples() {
        assert_eq!(sturges_k(100).unwrap(), 8);
        assert_eq!(sturges_k(1).unwrap(), 1);
        assert_eq!(sturges_k(1024).unwrap(), 11);
        assert_eq!(sturges_k(1025).unwrap(), 12);
        assert!(sturges_k(0).is_err());
    }

    #[test]
    fn width_rule_examples() {
        assert!((fd_width(&prof(1000, 10.0, 1.0)).unwrap() - 2.0).abs() < 1e-12);
        assert!((fd_width(&prof(8, 4.0, 1.0)).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(fd_width(&prof(8, 0.0, 1.0)), Err(Error::DegenerateSpread(_))));
        assert!(matches!(fd_width(&prof(1, 3.0, 1.0)), Err(Error::TooFew { .. })));
        assert!((scott_width(&prof(1000, 1.0, 1.0)).unwrap() - 0.349).abs() < 1e-12);
        assert!((scott_width(&prof(8, 1.0, 2.0)).unwrap() - 3.49).abs() < 1e-12);
        assert!(matches!(scott_width(&prof(8, 1.0, 0.0)), Err(Error::DegenerateSpread(_))));
    }

    #[test]
    fn cascade_falls_back() {
        assert_eq!(base_width(&prof(8, 4.0, 2.0), BaseRule::Cascade).unwrap().unwrap().1, FREEDMAN_DIACONIS);
        assert_eq!(base_width(&prof(8, 0.0, 2.0), BaseRule::Cascade).unwrap().unwrap().1, SCOTT);
        assert_eq!(base_width(&prof(8, 0.0, 0.0), BaseRule::Cascade).unwrap().unwrap().1, STURGES);
        let w = base_width(&prof(100, 0.0, 0.0), BaseRule::Sturges).unwrap().unwrap();
        assert_eq!(w, (12.5, STURGES));
        let mut flat = prof(3, 0.0, 0.0);
        flat.max = flat.min;
        assert_eq!(base_width(&flat, BaseRule::Cascade).unwrap(), None);
    }

    #[test]
    fn equal_interval_examples() {
        let s = equal_interval(&extent(0.0, 100.0, 50.0, 1.0), 4).unwrap();
        assert_eq!(s.edges, vec![0.0, 25.0, 50.0, 75.0, 100.0]);
        let s = equal_interval(&extent(0.0, 1.0, 0.5, 1.0), 1).unwrap();
        assert_eq!(s.edges, vec![0.0, 1.0]);
        let s = equal_interval(&extent(-10.0, 10.0, 0.0, 1.0), 2).unwrap();
        assert_eq!(s.edges, vec![-10.0, 0.0, 10.0]);
        assert!(equal_interval(&extent(3.0, 3.0, 3.0, 1.0), 2).is_err());
        assert!(equal_interval(&extent(0.0, 1.0, 0.5, 1.0), 0).is_err());
    }

    #[test]
    fn quantile_examples() {
        let xs: Vec<f64> = (1..=10).map(f64::from).collect();
        let r = quantile_breaks(&xs, 2).unwrap();
        assert_eq!(r.scheme.edges, vec![1.0, 5.5, 10.0]);
        assert!(!r.reduced);
        assert_eq!(quantile_breaks(&xs, 1).unwrap().scheme.edges, vec![1.0, 10.0]);
        let r = quantile_breaks(&[1.0, 1.0, 1.0, 1.0, 2.0], 4).unwrap();
        assert!(r.reduced);
        assert!(r.scheme.bin_count() < 4);
        assert!(quantile_breaks(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn jenks_examples() {
        let j = jenks_breaks(&[1.0, 2.0, 3.0, 10.0, 11.0, 12.0], 2).unwrap();
        assert_eq!(j.classes, vec![(0, 3), (3, 6)]);
        assert_eq!(j.scheme.edges, vec![1.0, 10.0, 12.0]);
        assert_eq!(brute_force(&[1.0, 2.0, 3.0, 10.0, 11.0, 12.0], 2).1, vec![3]);

        let j = jenks_breaks(&[5.0, 1.0, 9.0], 1).unwrap();
        assert_eq!(j.classes, vec![(0, 3)]);
        assert_eq!(j.scheme.edges, vec![1.0, 9.0]);

        let j = jenks_breaks(&[1.0, 2.0, 8.0, 9.0, 10.0, 11.0], 2).unwrap();
        assert_eq!(j.classes, vec![(0, 2), (2, 6)]);
        assert_eq!(brute_force(&[1.0, 2.0, 8.0, 9.0, 10.0, 11.0], 2).1, vec![2]);
    }

    #[test]
    fn jenks_reduces_k_to_distinct_count() {
        let j = jenks_breaks(&[1.0, 1.0, 4.0, 4.0], 3).unwrap();
        assert!(j.reduced);
        assert_eq!(j.classes, vec![(0, 2), (2, 4)]);
        assert_eq!(j.scheme.edges, vec![1.0, 4.0, 5.0]);
        assert_eq!(j.objective, 0.0);
    }

    #[test]
    fn jenks_singleton_top_class() {
        let j = jenks_breaks(&[1.0, 2.0, 3.0, 100.0], 2).unwrap();
        assert_eq!(j.classes, vec![(0, 3), (3, 4)]);
        assert_eq!(j.scheme.edges, vec![1.0, 100.0, 101.0]);
    }

    #[test]
    fn stddev_examples() {
        let s = stddev_breaks(&extent(-3.0, 3.0, 0.0, 1.0), false).unwrap();
        assert_eq!(s.edges, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let s = stddev_breaks(&extent(6.0, 14.0, 10.0, 2.0), false).unwrap();
        assert_eq!(s.edges, vec![6.0, 8.0, 10.0, 12.0, 14.0]);
        let s = stddev_breaks(&extent(6.0, 14.0, 10.0, 2.0), true).unwrap();
        assert_eq!(s.edges, vec![6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0]);
        assert!(stddev_breaks(&extent(6.0, 14.0, 10.0, 0.0), false).is_err());
    }

    proptest! {
        #[test]
        fn jenks_matches_exhaustive_search(
            xs in prop::collection::vec(0u8..40, 2..=12),
            k in 1usize..=4,
        ) {
            let mut xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            xs.sort_by(f64::total_cmp);
            let distinct = {
                let mut d = xs.clone();
                d.dedup();
                d.len()
            };
            prop_assume!(distinct >= k && distinct >= 2);
            let j = jenks_breaks(&xs, k).unwrap();
            let (best, _) = brute_force(&xs, k);
            prop_assert!((j.objective - best).abs() <= 1e-9 * best.max(1.0), "{} vs {}", j.objective, best);
            prop_assert_eq!(j.classes.len(), k);
        }

        #[test]
        fn jenks_objective_non_increasing_in_k(xs in prop::collection::vec(-50i32..50, 6..30)) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            let mut prev = f64::INFINITY;
            for k in 1..=5 {
                if let Ok(j) = jenks_breaks(&xs, k) {
                    prop_assert!(j.objective <= prev + 1e-9);
                    prev = j.objective;
                }
            }
        }

        #[test]
        fn rule_schemes_cover_the_data(xs in prop::collection::vec(-1000i32..1000, 5..80), k in 1usize..6) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            let p = SeriesProfile::from_f64s(&xs).unwrap();
            prop_assume!(p.max > p.min);
            let mut schemes = vec![
                equal_interval(&p, k).unwrap(),
                quantile_breaks(&xs, k).unwrap().scheme,
                jenks_breaks(&xs, k).unwrap().scheme,
            ];
            if p.sd > 0.0 {
                schemes.push(stddev_breaks(&p, k % 2 == 0).unwrap());
            }
            for s in schemes {
                prop_assert!(s.validate().is_ok());
                prop_assert!(s.first_edge() <= p.min && s.last_edge() >= p.max);
            }
        }
    }
}
