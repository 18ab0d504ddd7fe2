//! Refinement passes that turn a raw statistical binning into human-legible
//! default bins: cap the bin count, respect the data grain, round widths to
//! nice numbers, keep zero on a boundary, and fold sparse tails into
//! open-ended bins.
//!
//! All edge arithmetic runs on [`Dec`], so an edge is either an exact
//! multiple of the grain or it is not.

use serde::{Deserialize, Serialize};

use crate::decimal::Dec;
use crate::error::{Error, Result};
use crate::ingest::SeriesProfile;
use crate::rules::{base_width, BaseRule, CONSTANT};
use crate::scheme::{assign, BinCounts, BinScheme, Grain, LabelFormat, Provenance};

/// Refuse to materialize more edges than this.
const MAX_EDGES: i128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    #[default]
    Histogram,
    ColorRamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LegibilityConfig {
    pub max_bins_color: usize,
    pub max_bins_histogram: usize,
    pub nice_multipliers: Vec<f64>,
    pub tail_fraction: f64,
    pub tail_min_run: usize,
    pub base_rule: BaseRule,
}

impl Default for LegibilityConfig {
    fn default() -> Self {
        LegibilityConfig {
            max_bins_color: 12,
            max_bins_histogram: 20,
            nice_multipliers: vec![1.0, 2.0, 2.5, 5.0],
            tail_fraction: 0.01,
            tail_min_run: 2,
            base_rule: BaseRule::Cascade,
        }
    }
}

impl LegibilityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_bins_color == 0 || self.max_bins_histogram == 0 {
            return Err(Error::InvalidConfig("max_bins must be at least 1".into()));
        }
        if self.nice_multipliers.is_empty() {
            return Err(Error::InvalidConfig("nice_multipliers is empty".into()));
        }
        if let Some(m) = self
            .nice_multipliers
            .iter()
            .find(|&&m| !(m > 0.0 && m <= 10.0))
        {
            return Err(Error::InvalidConfig(format!("nice multiplier {m} not in (0, 10]")));
        }
        if !(0.0..0.5).contains(&self.tail_fraction) {
            return Err(Error::InvalidConfig(format!(
                "tail_fraction {} not in [0, 0.5)",
                self.tail_fraction
            )));
        }
        if self.tail_min_run == 0 {
            return Err(Error::InvalidConfig("tail_min_run must be at least 1".into()));
        }
        Ok(())
    }

    pub fn max_bins(&self, purpose: Purpose) -> usize {
        match purpose {
            Purpose::Histogram => self.max_bins_histogram,
            Purpose::ColorRamp => self.max_bins_color,
        }
    }

    /// Multipliers as exact decimals, ascending.
    pub fn multipliers(&self) -> Vec<Dec> {
        let mut m: Vec<Dec> = self
            .nice_multipliers
            .iter()
            .filter_map(|&m| Dec::from_f64(m))
            .collect();
        m.sort();
        m.dedup();
        m
    }
}

/// `⌊log10 |x|⌋` for non-zero `x`.
fn floor_log10(x: Dec) -> i32 {
    let n = x.normalized();
    let digits = n.units().unsigned_abs().to_string().len() as i32;
    digits - 1 + n.exp()
}

/// Whether `s` is `m·10^k` for some multiplier `m`.
pub fn is_nice(s: Dec, multipliers: &[Dec]) -> bool {
    if s.is_zero() || s.is_negative() {
        return false;
    }
    let k = floor_log10(s);
    (k - 2..=k + 1).any(|p| {
        multipliers
            .iter()
            .any(|m| m.checked_mul(Dec::new(1, p)).is_some_and(|c| c == s))
    })
}

/// Smallest grain-compatible nice number `≥ x` (or `> x` when `strict`).
fn next_nice(x: Dec, strict: bool, grain: Grain, multipliers: &[Dec]) -> Option<Dec> {
    let k0 = floor_log10(x);
    let mut best: Option<Dec> = None;
    for k in (k0 - 2)..=(k0 + 24) {
        let p = Dec::new(1, k);
        for m in multipliers {
            let Some(c) = m.checked_mul(p) else { continue };
            let above = if strict { c > x } else { c >= x };
            if above && c.is_multiple_of(grain.step()) && best.is_none_or(|b| c < b) {
                best = Some(c);
            }
        }
        if let Some(b) = best {
            if floor_log10(b) < k {
                break;
            }
        }
    }
    best
}

/// Nice step for a grain whose mantissa no multiplier power can reach
/// (e.g. grain 3): a nice multiple of the grain itself.
fn grain_scaled_nice(x: Dec, strict: bool, grain: Grain, multipliers: &[Dec]) -> Option<Dec> {
    let ratio = Dec::from_f64(x.to_f64() / grain.step_f64())?;
    let unit = next_nice(ratio, false, Grain::UNIT, multipliers)?;
    let s = unit.checked_mul(grain.step())?;
    if strict && s <= x {
        let bumped = next_nice(unit, true, Grain::UNIT, multipliers)?;
        return bumped.checked_mul(grain.step());
    }
    Some(s)
}

fn nice_at_least(x: Dec, strict: bool, grain: Grain, multipliers: &[Dec]) -> Result<Dec> {
    next_nice(x, strict, grain, multipliers)
        .or_else(|| grain_scaled_nice(x, strict, grain, multipliers))
        .ok_or(Error::Overflow("nice step"))
}

/// Smallest `m·10^k ≥ raw_width` that is an exact multiple of the grain.
pub fn nice_step(raw_width: f64, grain: Grain, multipliers: &[Dec]) -> Result<Dec> {
    if !(raw_width > 0.0 && raw_width.is_finite()) {
        return Err(Error::InvalidValue(format!("width {raw_width} must be positive")));
    }
    if multipliers.is_empty() {
        return Err(Error::InvalidConfig("nice_multipliers is empty".into()));
    }
    let x = Dec::from_f64(raw_width).ok_or(Error::Overflow("nice step"))?;
    nice_at_least(x, false, grain, multipliers)
}

fn extent(profile: &SeriesProfile) -> Result<(Dec, Dec)> {
    let min = Dec::from_f64(profile.min).ok_or_else(|| Error::InvalidValue("min".into()))?;
    let max = Dec::from_f64(profile.max).ok_or_else(|| Error::InvalidValue("max".into()))?;
    Ok((min, max))
}

/// Multiples of `step` from `⌊min/step⌋` to `⌈max/step⌉`, at least one bin.
fn anchored_range(step: Dec, profile: &SeriesProfile) -> Result<(i128, i128)> {
    let (min, max) = extent(profile)?;
    let lo = min.div_floor(step).ok_or(Error::Overflow("anchor"))?;
    let hi = max.div_ceil(step).ok_or(Error::Overflow("anchor"))?;
    Ok((lo, hi.max(lo + 1)))
}

fn anchored_bin_count(step: Dec, profile: &SeriesProfile) -> Result<i128> {
    let (lo, hi) = anchored_range(step, profile)?;
    Ok(hi - lo)
}

/// Consecutive multiples of `step` covering `[min, max]`. Because every
/// edge is a multiple of the step, zero is an edge whenever the data
/// straddles it.
pub fn anchor_edges(step: Dec, profile: &SeriesProfile) -> Result<BinScheme> {
    if step.is_zero() || step.is_negative() {
        return Err(Error::InvalidValue(format!("step {step} must be positive")));
    }
    let (lo, hi) = anchored_range(step, profile)?;
    if hi - lo + 1 > MAX_EDGES {
        return Err(Error::InvalidValue(format!(
            "step {step} would produce {} bins",
            hi - lo
        )));
    }
    let edges = (lo..=hi)
        .map(|i| step.checked_mul_int(i).map(|d| d.to_f64()))
        .collect::<Option<Vec<f64>>>()
        .ok_or(Error::Overflow("anchor"))?;
    BinScheme::new(
        edges,
        false,
        false,
        Provenance::Default("anchored".into()),
        profile.grain,
    )
}

/// Snaps every edge to a multiple of `step`, half away from zero. The outer
/// edges only ever move outward, and edges that collide are merged.
pub fn snap_edges(scheme: &BinScheme, step: Dec, grain: Grain) -> Result<BinScheme> {
    scheme.validate()?;
    let original: Vec<Dec> = scheme
        .edges
        .iter()
        .map(|&e| Dec::from_f64(e).ok_or_else(|| Error::InvalidValue(format!("edge {e}"))))
        .collect::<Result<_>>()?;
    let mut snapped = original
        .iter()
        .map(|e| e.round_to_multiple(step))
        .collect::<Option<Vec<Dec>>>()
        .ok_or(Error::Overflow("grain rounding"))?;
    let last = snapped.len() - 1;
    if snapped[0] > original[0] {
        snapped[0] = step
            .checked_mul_int(original[0].div_floor(step).ok_or(Error::Overflow("grain rounding"))?)
            .ok_or(Error::Overflow("grain rounding"))?;
    }
    if snapped[last] < original[last] {
        snapped[last] = step
            .checked_mul_int(original[last].div_ceil(step).ok_or(Error::Overflow("grain rounding"))?)
            .ok_or(Error::Overflow("grain rounding"))?;
    }
    snapped.dedup();
    if snapped.len() < 2 {
        let past = snapped[0]
            .checked_add(step)
            .ok_or(Error::Overflow("grain rounding"))?;
        snapped.push(past);
    }
    BinScheme::new(
        snapped.iter().map(Dec::to_f64).collect(),
        scheme.open_low,
        scheme.open_high,
        scheme.provenance.clone(),
        grain,
    )
}

/// Snaps edges to the grain without shrinking coverage.
pub fn round_to_grain(scheme: &BinScheme, grain: Grain) -> Result<BinScheme> {
    snap_edges(scheme, grain.step(), grain)
}

/// The smallest nice step `≥ step` whose anchored edges give at most
/// `max_bins` bins over the data extent.
pub fn cap_bins(
    step: Dec,
    profile: &SeriesProfile,
    max_bins: usize,
    grain: Grain,
    multipliers: &[Dec],
) -> Result<Dec> {
    if max_bins == 0 {
        return Err(Error::InvalidConfig("max_bins must be at least 1".into()));
    }
    if anchored_bin_count(step, profile)? <= max_bins as i128 {
        return Ok(step);
    }
    // Any step below range/max_bins yields more than max_bins bins.
    let floor = Dec::from_f64(profile.range() / max_bins as f64)
        .ok_or(Error::Overflow("bin cap"))?
        .max(step);
    let mut s = nice_at_least(floor, false, grain, multipliers)?;
    while anchored_bin_count(s, profile)? > max_bins as i128 {
        s = nice_at_least(s, true, grain, multipliers)?;
    }
    Ok(s)
}

/// Merges sparse runs of bins at either end into open-ended tail bins.
///
/// A bin is sparse when it holds at most `tail_fraction·n` values; a run
/// must reach `tail_min_run` bins. At least one bin is always left outside
/// the tails, and a run never swallows a zero edge.
pub fn condense_tails(
    scheme: &BinScheme,
    counts: &BinCounts,
    cfg: &LegibilityConfig,
    grain: Grain,
) -> Result<BinScheme> {
    scheme.validate()?;
    if counts.counts.len() != scheme.bin_count() {
        return Err(Error::InvalidScheme("counts do not match scheme".into()));
    }
    let n = counts.total();
    if n == 0 {
        return Ok(scheme.clone());
    }
    let limit = cfg.tail_fraction * n as f64;
    let sparse = |c: u64| (c as f64) <= limit;
    let edges = &scheme.edges;
    let nb = scheme.bin_count();

    // High tail: bins nb-1, nb-2, ... Extending the run by one bin removes
    // the edge between them.
    let mut high = 0;
    while high < nb - 1 && sparse(counts.counts[nb - 1 - high]) {
        if high > 0 && edges[nb - high] == 0.0 {
            break;
        }
        high += 1;
    }
    let high = if high >= cfg.tail_min_run { high } else { 0 };

    // one bin must stay outside both tails
    let room = nb - high - 1;
    let mut low = 0;
    while low < room && sparse(counts.counts[low]) {
        if low > 0 && edges[low] == 0.0 {
            break;
        }
        low += 1;
    }
    let low = if low >= cfg.tail_min_run { low } else { 0 };

    if high == 0 && low == 0 {
        return Ok(scheme.clone());
    }
    let mut new_edges: Vec<f64> = Vec::with_capacity(edges.len());
    new_edges.push(edges[0]);
    let start = if low > 0 { low } else { 1 };
    let end = if high > 0 { nb - high } else { nb - 1 };
    new_edges.extend_from_slice(&edges[start..=end]);
    new_edges.push(edges[nb]);
    BinScheme::new(
        new_edges,
        scheme.open_low || low > 0,
        scheme.open_high || high > 0,
        scheme.provenance.clone(),
        grain,
    )
}

/// Full default pipeline: base rule width, grain floor, nice rounding,
/// purpose cap, zero-anchored edges, then tail condensation.
pub fn default_bins(
    profile: &SeriesProfile,
    values: &[f64],
    purpose: Purpose,
    cfg: &LegibilityConfig,
) -> Result<BinScheme> {
    cfg.validate()?;
    if profile.n == 0 || values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let grain = profile.grain;
    let multipliers = cfg.multipliers();
    let Some((width, rule)) = base_width(profile, cfg.base_rule)? else {
        let step = nice_step(grain.step_f64(), grain, &multipliers)?;
        return Ok(anchor_edges(step, profile)?.with_provenance(Provenance::Default(CONSTANT.into())));
    };
    let width = width.max(grain.step_f64());
    let step = nice_step(width, grain, &multipliers)?;
    let step = cap_bins(step, profile, cfg.max_bins(purpose), grain, &multipliers)?;
    let anchored = anchor_edges(step, profile)?;
    let counts = assign(values, &anchored)?;
    let scheme = condense_tails(&anchored, &counts, cfg, grain)?;
    Ok(scheme.with_provenance(Provenance::Default(rule.into())))
}

/// Which legibility properties a scheme satisfies against its data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegibilityReport {
    /// Every edge is a multiple of the data grain.
    pub grain: bool,
    /// Every bin width is a grain-compatible nice number.
    pub nice: bool,
    /// Zero is an edge whenever the data straddles it.
    pub zero: bool,
    /// The scheme spans the data, or the short side is open-ended.
    pub coverage: bool,
}

pub fn check_scheme(scheme: &BinScheme, profile: &SeriesProfile, cfg: &LegibilityConfig) -> LegibilityReport {
    let grain = profile.grain;
    let multipliers = cfg.multipliers();
    let nice = scheme.edges.windows(2).all(|w| {
        match (Dec::from_f64(w[0]), Dec::from_f64(w[1])) {
            (Some(a), Some(b)) => b
                .checked_sub(a)
                .is_some_and(|width| is_nice(width, &multipliers) && width.is_multiple_of(grain.step())),
            _ => false,
        }
    });
    let straddles = profile.min < 0.0 && profile.max > 0.0;
    LegibilityReport {
        grain: scheme.edges.iter().all(|&e| grain.divides(e)),
        nice,
        zero: !straddles || scheme.edges.contains(&0.0),
        coverage: (scheme.open_low || scheme.first_edge() <= profile.min)
            && (scheme.open_high || scheme.last_edge() >= profile.max),
    }
}

/// Rewrites each width as the nearest grain-compatible nice number (ties
/// go to the narrower), walking up from the first edge floored to the
/// grain. The last width grows when needed so the span never shrinks.
pub fn snap_to_nice(scheme: &BinScheme, grain: Grain, cfg: &LegibilityConfig) -> Result<BinScheme> {
    scheme.validate()?;
    let multipliers = cfg.multipliers();
    let overflow = || Error::Overflow("nice snapping");
    let edges: Vec<Dec> = scheme
        .edges
        .iter()
        .map(|&e| Dec::from_f64(e).ok_or_else(|| Error::InvalidValue(format!("edge {e}"))))
        .collect::<Result<_>>()?;
    let smallest = nice_at_least(grain.step(), false, grain, &multipliers)?;
    let first = grain
        .step()
        .checked_mul_int(edges[0].div_floor(grain.step()).ok_or_else(overflow)?)
        .ok_or_else(overflow)?;
    let last = edges.len() - 1;
    let mut out = vec![first];
    for i in 0..last {
        let width = edges[i + 1].checked_sub(edges[i]).ok_or_else(overflow)?;
        let up = nice_at_least(width, false, grain, &multipliers)?;
        let mut down = None;
        let mut d = smallest;
        while d <= width {
            down = Some(d);
            d = nice_at_least(d, true, grain, &multipliers)?;
        }
        let chosen = match down {
            Some(d) if width.checked_sub(d) <= up.checked_sub(width) => d,
            _ => up,
        };
        let prev = out[i];
        let mut e = prev.checked_add(chosen).ok_or_else(overflow)?;
        if i + 1 == last && e < edges[last] {
            let need = edges[last].checked_sub(prev).ok_or_else(overflow)?;
            e = prev
                .checked_add(nice_at_least(need, false, grain, &multipliers)?)
                .ok_or_else(overflow)?;
        }
        out.push(e);
    }
    BinScheme::new(
        out.iter().map(Dec::to_f64).collect(),
        scheme.open_low,
        scheme.open_high,
        scheme.provenance.clone(),
        grain,
    )
}

pub fn relabel(scheme: &BinScheme, grain: Grain) -> BinScheme {
    crate::scheme::label_bins(scheme, &LabelFormat { grain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::FREEDMAN_DIACONIS;
    use proptest::prelude::*;

    fn d(s: &str) -> Dec {
        Dec::parse(s).unwrap()
    }

    fn mults() -> Vec<Dec> {
        LegibilityConfig::default().multipliers()
    }

    fn span(min: f64, max: f64) -> SeriesProfile {
        SeriesProfile {
            n: 100,
            missing: 0,
            min,
            max,
            mean: (min + max) / 2.0,
            sd: 1.0,
            iqr: 1.0,
            grain: Grain::UNIT,
        }
    }

    fn scheme(edges: &[f64]) -> BinScheme {
        BinScheme::new(edges.to_vec(), false, false, Provenance::Manual, Grain::UNIT).unwrap()
    }

    #[test]
    fn nice_step_constants() {
        let tenth = Grain::from_f64(0.1).unwrap();
        assert_eq!(nice_step(9.0, Grain::UNIT, &mults()).unwrap(), d("10"));
        assert_eq!(nice_step(0.9, tenth, &mults()).unwrap(), d("1.0"));
        assert_eq!(nice_step(0.9, tenth, &mults()).unwrap().to_f64(), 1.0);
        assert_eq!(nice_step(4.0, Grain::UNIT, &mults()).unwrap(), d("5"));
        assert_eq!(nice_step(23.0, Grain::UNIT, &mults()).unwrap(), d("25"));
    }

    #[test]
    fn nice_step_respects_grain() {
        // 2.5 is not a multiple of 1
        assert_eq!(nice_step(2.1, Grain::UNIT, &mults()).unwrap(), d("5"));
        assert_eq!(nice_step(2.1, Grain::from_f64(0.1).unwrap(), &mults()).unwrap(), d("2.5"));
        assert_eq!(nice_step(0.3, Grain::UNIT, &mults()).unwrap(), d("1"));
        assert_eq!(nice_step(10.0, Grain::UNIT, &mults()).unwrap(), d("10"));
        let million = Grain::from_f64(1e6).unwrap();
        assert_eq!(nice_step(1.2e6, million, &mults()).unwrap(), d("2e6"));
        // grain 3 is reachable by no power of ten; fall back to nice multiples of it
        let three = Grain::from_f64(3.0).unwrap();
        assert_eq!(nice_step(4.0, three, &mults()).unwrap(), d("6"));
        assert!(nice_step(0.0, Grain::UNIT, &mults()).is_err());
    }

    #[test]
    fn anchor_examples() {
        assert_eq!(anchor_edges(d("5"), &span(-3.0, 7.0)).unwrap().edges, vec![-5.0, 0.0, 5.0, 10.0]);
        assert_eq!(
            anchor_edges(d("10"), &span(12.0, 47.0)).unwrap().edges,
            vec![10.0, 20.0, 30.0, 40.0, 50.0]
        );
        assert_eq!(anchor_edges(d("10"), &span(0.0, 10.0)).unwrap().edges, vec![0.0, 10.0]);
        assert_eq!(anchor_edges(d("1"), &span(7.0, 7.0)).unwrap().edges, vec![7.0, 8.0]);
        assert_eq!(
            anchor_edges(d("0.1"), &span(0.15, 0.42)).unwrap().edges,
            vec![0.1, 0.2, 0.3, 0.4, 0.5]
        );
    }

    #[test]
    fn round_to_grain_examples() {
        assert_eq!(round_to_grain(&scheme(&[0.5, 3.7]), Grain::UNIT).unwrap().edges, vec![0.0, 4.0]);
        assert_eq!(
            round_to_grain(&scheme(&[0.0, 5.0, 10.0]), Grain::UNIT).unwrap().edges,
            vec![0.0, 5.0, 10.0]
        );
        assert_eq!(round_to_grain(&scheme(&[1.2, 1.4]), Grain::UNIT).unwrap().edges, vec![1.0, 2.0]);
        assert_eq!(
            round_to_grain(&scheme(&[0.0, 2.4, 2.6, 9.0]), Grain::UNIT).unwrap().edges,
            vec![0.0, 2.0, 3.0, 9.0]
        );
    }

    #[test]
    fn cap_examples() {
        let g = Grain::UNIT;
        assert_eq!(cap_bins(d("5"), &span(0.0, 100.0), 12, g, &mults()).unwrap(), d("10"));
        assert_eq!(cap_bins(d("10"), &span(0.0, 100.0), 12, g, &mults()).unwrap(), d("10"));
        assert_eq!(cap_bins(d("10"), &span(0.0, 1000.0), 12, g, &mults()).unwrap(), d("100"));
    }

    /// The cap escalation written out: walk the nice ladder one rung at a time.
    #[test]
    fn cap_agrees_with_ladder_walk() {
        let ladder = [10.0, 20.0, 25.0, 50.0, 100.0];
        let p = span(0.0, 1000.0);
        let first_ok = ladder
            .iter()
            .find(|&&s| anchored_bin_count(Dec::from_f64(s).unwrap(), &p).unwrap() <= 12)
            .unwrap();
        assert_eq!(cap_bins(d("10"), &p, 12, Grain::UNIT, &mults()).unwrap().to_f64(), *first_ok);
    }

    fn counts(c: &[u64]) -> BinCounts {
        BinCounts {
            counts: c.to_vec(),
            below: 0,
            above: 0,
        }
    }

    #[test]
    fn condense_high_tail() {
        let s = scheme(&[0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
        let c = counts(&[30, 40, 28, 1, 0, 1]);
        let out = condense_tails(&s, &c, &LegibilityConfig::default(), Grain::UNIT).unwrap();
        assert_eq!(out.edges, vec![0.0, 10.0, 20.0, 30.0, 60.0]);
        assert!(out.open_high && !out.open_low);
        assert_eq!(out.labels.last().unwrap(), "≥ 30");
    }

    #[test]
    fn condense_leaves_dense_schemes_alone() {
        let s = scheme(&[0.0, 10.0, 20.0, 30.0]);
        let c = counts(&[10, 10, 10]);
        assert_eq!(condense_tails(&s, &c, &LegibilityConfig::default(), Grain::UNIT).unwrap(), s);
        // a single sparse bin is below the minimum run
        let c = counts(&[0, 200, 10]);
        assert_eq!(condense_tails(&s, &c, &LegibilityConfig::default(), Grain::UNIT).unwrap(), s);
    }

    #[test]
    fn condense_both_tails() {
        let s = scheme(&[0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0]);
        let c = counts(&[0, 1, 50, 47, 0, 1, 1]);
        let out = condense_tails(&s, &c, &LegibilityConfig::default(), Grain::UNIT).unwrap();
        assert_eq!(out.edges, vec![0.0, 20.0, 30.0, 40.0, 70.0]);
        assert!(out.open_low && out.open_high);
        assert_eq!(out.labels.first().unwrap(), "< 20");
        assert_eq!(assign(&[-5.0, 15.0, 25.0, 99.0], &out).unwrap().total(), 4);
    }

    #[test]
    fn condense_keeps_zero_edge() {
        let s = scheme(&[-20.0, -10.0, 0.0, 10.0, 20.0]);
        let c = counts(&[0, 0, 0, 300]);
        let out = condense_tails(&s, &c, &LegibilityConfig::default(), Grain::UNIT).unwrap();
        assert!(out.edges.contains(&0.0));
        assert_eq!(out.edges, vec![-20.0, 0.0, 10.0, 20.0]);
    }

    #[test]
    fn default_bins_constant_column() {
        let p = SeriesProfile::from_f64s(&[7.0, 7.0, 7.0]).unwrap();
        let s = default_bins(&p, &[7.0, 7.0, 7.0], Purpose::Histogram, &LegibilityConfig::default()).unwrap();
        assert_eq!(s.edges, vec![7.0, 8.0]);
        assert_eq!(s.provenance, Provenance::Default(CONSTANT.into()));
    }

    #[test]
    fn default_bins_color_ramp_cap() {
        let xs: Vec<f64> = (0..=1000).map(f64::from).collect();
        let p = SeriesProfile::from_f64s(&xs).unwrap();
        let s = default_bins(&p, &xs, Purpose::ColorRamp, &LegibilityConfig::default()).unwrap();
        assert!(s.bin_count() <= 12, "{:?}", s.edges);
        assert_eq!(s.provenance, Provenance::Default(FREEDMAN_DIACONIS.into()));
        let h = default_bins(&p, &xs, Purpose::Histogram, &LegibilityConfig::default()).unwrap();
        assert!(h.bin_count() <= 20);
    }

    #[test]
    fn default_bins_rejects_empty_and_bad_config() {
        let p = SeriesProfile::from_f64s(&[1.0, 2.0]).unwrap();
        assert!(default_bins(&p, &[], Purpose::Histogram, &LegibilityConfig::default()).is_err());
        let bad = LegibilityConfig {
            tail_fraction: 0.7,
            ..Default::default()
        };
        assert!(matches!(
            default_bins(&p, &[1.0, 2.0], Purpose::Histogram, &bad),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn nice_snapping() {
        let s = scheme(&[0.0, 18.0, 25.0, 35.0, 47.0]);
        let out = snap_to_nice(&s, Grain::UNIT, &LegibilityConfig::default()).unwrap();
        assert_eq!(out.edges, vec![0.0, 20.0, 25.0, 35.0, 55.0]);
        let s = scheme(&[3.0, 4.0, 100.0]);
        let out = snap_to_nice(&s, Grain::UNIT, &LegibilityConfig::default()).unwrap();
        assert_eq!(out.edges, vec![3.0, 4.0, 104.0]);
    }

    #[test]
    fn report_flags() {
        let p = span(-5.0, 45.0);
        let cfg = LegibilityConfig::default();
        let r = check_scheme(&scheme(&[-10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0]), &p, &cfg);
        assert!(r.grain && r.nice && r.zero && r.coverage);
        let r = check_scheme(&scheme(&[-6.0, 12.0, 45.0]), &p, &cfg);
        assert!(r.grain && !r.nice && !r.zero && r.coverage);
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        (1i32..6, -3i32..3).prop_flat_map(|(scale, grain_exp)| {
            prop::collection::vec(-(10i64.pow(scale as u32))..10i64.pow(scale as u32), 2..150).prop_map(
                move |v| {
                    v.into_iter()
                        .map(|u| Dec::new(u as i128, grain_exp).to_f64())
                        .collect()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn nice_snapping_gives_nice_widths(edges in proptest::collection::btree_set(-500i32..500, 2..8)) {
            let e: Vec<f64> = edges.into_iter().map(f64::from).collect();
            let out = snap_to_nice(&scheme(&e), Grain::UNIT, &LegibilityConfig::default()).unwrap();
            prop_assert_eq!(out.edges.len(), e.len());
            prop_assert!(out.edges[0] <= e[0] && out.edges[out.edges.len() - 1] >= e[e.len() - 1]);
            for w in out.widths() {
                prop_assert!(is_nice(Dec::from_f64(w).unwrap(), &mults()), "width {}", w);
            }
        }

        #[test]
        fn default_bins_invariants(xs in sample(), color in any::<bool>()) {
            let p = SeriesProfile::from_f64s(&xs).unwrap();
            let cfg = LegibilityConfig::default();
            let purpose = if color { Purpose::ColorRamp } else { Purpose::Histogram };
            let s = default_bins(&p, &xs, purpose, &cfg).unwrap();
            prop_assert!(s.validate().is_ok());
            prop_assert!(s.bin_count() <= cfg.max_bins(purpose));
            let r = check_scheme(&s, &p, &cfg);
            prop_assert!(r.grain && r.zero && r.coverage, "{:?} {:?}", r, s.edges);
            // inner widths all equal one nice step (outer widths too: condensing keeps nominal edges)
            let widths: Vec<Dec> = s.edges.windows(2)
                .map(|w| Dec::from_f64(w[1]).unwrap().checked_sub(Dec::from_f64(w[0]).unwrap()).unwrap())
                .collect();
            let step = widths.iter().min().copied().unwrap();
            prop_assert!(is_nice(step, &cfg.multipliers()));
            for w in &widths {
                prop_assert!(w.is_multiple_of(step));
            }
            prop_assert_eq!(assign(&xs, &s).unwrap().total(), xs.len() as u64);
            prop_assert_eq!(default_bins(&p, &xs, purpose, &cfg).unwrap(), s);
        }

        #[test]
        fn nice_step_is_minimal(raw in 0.001f64..1e6, grain_exp in -3i32..3) {
            let grain = Grain::power_of_ten(grain_exp).unwrap();
            let m = mults();
            let s = nice_step(raw, grain, &m).unwrap();
            prop_assert!(s.to_f64() >= raw);
            prop_assert!(s.is_multiple_of(grain.step()));
            prop_assert!(is_nice(s, &m));
            // fixed point
            prop_assert_eq!(nice_step(s.to_f64(), grain, &m).unwrap(), s);
            // brute force over the ladder: nothing nice and grain-compatible in [raw, s)
            for k in -6..8 {
                for mm in &m {
                    let c = mm.checked_mul(Dec::new(1, k)).unwrap();
                    if c.to_f64() >= raw && c.is_multiple_of(grain.step()) {
                        prop_assert!(c >= s, "{} beats {}", c, s);
                    }
                }
            }
        }

        #[test]
        fn round_to_grain_is_idempotent_and_covering(
            edges in prop::collection::btree_set(-10_000i32..10_000, 2..10),
        ) {
            let edges: Vec<f64> = edges.into_iter().map(|e| e as f64 / 100.0).collect();
            let s = scheme(&edges);
            let once = round_to_grain(&s, Grain::UNIT).unwrap();
            prop_assert!(once.first_edge() <= s.first_edge() && once.last_edge() >= s.last_edge());
            prop_assert!(once.edges.iter().all(|&e| Grain::UNIT.divides(e)));
            prop_assert_eq!(round_to_grain(&once, Grain::UNIT).unwrap(), once);
        }

        #[test]
        fn condensing_conserves_counts(xs in sample()) {
            let p = SeriesProfile::from_f64s(&xs).unwrap();
            let step = nice_step((p.range() / 15.0).max(p.grain.step_f64()), p.grain, &mults()).unwrap();
            let s = anchor_edges(step, &p).unwrap();
            let before = assign(&xs, &s).unwrap();
            let cfg = LegibilityConfig { tail_fraction: 0.05, ..Default::default() };
            let after = condense_tails(&s, &before, &cfg, p.grain).unwrap();
            prop_assert_eq!(assign(&xs, &after).unwrap().total(), before.total());
            prop_assert!(after.bin_count() >= 1);
        }
    }
}
