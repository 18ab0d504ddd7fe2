//! Bin schemes, grains, and assigning values to bins.
//!
//! Interval semantics: bin `i` covers `[edges[i], edges[i+1])`. The final
//! edge belongs to the last bin when the high side is closed, so the data
//! maximum is never dropped. Open tails extend the first/last bin to ±∞.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decimal::Dec;
use crate::error::{Error, Result};

/// The smallest meaningful increment of a column (1 for integers, 0.01 for cents).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grain {
    step: Dec,
}

impl Grain {
    pub const UNIT: Grain = Grain {
        step: Dec::new(1, 0),
    };

    /// Accepts any `m·10^k` with integer `m` in `[1, 10^9]` and `k` in `[-9, 12]`.
    pub fn new(step: Dec) -> Result<Grain> {
        let n = step.normalized();
        if n.units() <= 0 {
            return Err(Error::InvalidGrain(format!("step must be positive, got {step}")));
        }
        if n.units() > 1_000_000_000 || n.exp() < -9 {
            return Err(Error::InvalidGrain(format!("{step} is not m·10^k in range")));
        }
        // Exponents above 12 are fine if the mantissa can absorb the excess.
        let mut units = n.units();
        let mut exp = n.exp();
        while exp > 12 {
            units *= 10;
            exp -= 1;
            if units > 1_000_000_000 {
                return Err(Error::InvalidGrain(format!("{step} is not m·10^k in range")));
            }
        }
        Ok(Grain { step: n })
    }

    /// `10^exp`.
    pub fn power_of_ten(exp: i32) -> Result<Grain> {
        Grain::new(Dec::new(1, exp))
    }

    pub fn from_f64(step: f64) -> Result<Grain> {
        let d = Dec::from_f64(step)
            .ok_or_else(|| Error::InvalidGrain(format!("{step} is not finite")))?;
        Grain::new(d)
    }

    pub fn step(&self) -> Dec {
        self.step
    }

    pub fn step_f64(&self) -> f64 {
        self.step.to_f64()
    }

    /// Fractional digits needed to print multiples of this grain.
    pub fn decimals(&self) -> usize {
        self.step.frac_digits() as usize
    }

    pub fn divides(&self, v: f64) -> bool {
        Dec::from_f64(v).is_some_and(|d| d.is_multiple_of(self.step))
    }
}

impl Default for Grain {
    fn default() -> Self {
        Grain::UNIT
    }
}

impl fmt::Display for Grain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.step.fmt(f)
    }
}

impl Serialize for Grain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.step.to_f64())
    }
}

impl<'de> Deserialize<'de> for Grain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Grain::from_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Where a scheme came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ProvenanceRepr", try_from = "ProvenanceRepr")]
pub enum Provenance {
    Semantic(String),
    Default(String),
    Manual,
}

impl Provenance {
    pub fn kind(&self) -> &'static str {
        match self {
            Provenance::Semantic(_) => "semantic",
            Provenance::Default(_) => "default",
            Provenance::Manual => "manual",
        }
    }

    pub fn reference(&self) -> &str {
        match self {
            Provenance::Semantic(r) | Provenance::Default(r) => r,
            Provenance::Manual => "",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Manual => f.write_str("manual"),
            p => write!(f, "{}({})", p.kind(), p.reference()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProvenanceRepr {
    kind: String,
    #[serde(rename = "ref", default)]
    reference: String,
}

impl From<Provenance> for ProvenanceRepr {
    fn from(p: Provenance) -> Self {
        ProvenanceRepr {
            kind: p.kind().to_string(),
            reference: p.reference().to_string(),
        }
    }
}

impl TryFrom<ProvenanceRepr> for Provenance {
    type Error = String;

    fn try_from(r: ProvenanceRepr) -> std::result::Result<Self, String> {
        match r.kind.as_str() {
            "semantic" => Ok(Provenance::Semantic(r.reference)),
            "default" => Ok(Provenance::Default(r.reference)),
            "manual" => Ok(Provenance::Manual),
            other => Err(format!("unknown provenance kind {other:?}")),
        }
    }
}

/// Ordered bin edges plus tail flags, labels and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinScheme {
    pub edges: Vec<f64>,
    pub open_low: bool,
    pub open_high: bool,
    pub labels: Vec<String>,
    pub provenance: Provenance,
}

impl BinScheme {
    /// Builds a validated scheme with labels rendered at `grain`.
    pub fn new(
        edges: Vec<f64>,
        open_low: bool,
        open_high: bool,
        provenance: Provenance,
        grain: Grain,
    ) -> Result<BinScheme> {
        validate_edges(&edges)?;
        let scheme = BinScheme {
            edges,
            open_low,
            open_high,
            labels: Vec::new(),
            provenance,
        };
        Ok(label_bins(&scheme, &LabelFormat { grain }))
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len().saturating_sub(1)
    }

    pub fn first_edge(&self) -> f64 {
        self.edges[0]
    }

    pub fn last_edge(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn validate(&self) -> Result<()> {
        validate_edges(&self.edges)?;
        if self.labels.len() != self.bin_count() {
            return Err(Error::InvalidScheme(format!(
                "{} labels for {} bins",
                self.labels.len(),
                self.bin_count()
            )));
        }
        Ok(())
    }

    /// Widths of each bin, tails measured between their nominal edges.
    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> BinScheme {
        self.provenance = provenance;
        self
    }
}

pub(crate) fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidScheme(format!(
            "need at least 2 edges, got {}",
            edges.len()
        )));
    }
    if let Some(e) = edges.iter().find(|e| !e.is_finite()) {
        return Err(Error::InvalidScheme(format!("edge {e} is not finite")));
    }
    if let Some(w) = edges.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidScheme(format!(
            "edges must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Per-bin counts plus values falling outside closed tails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinCounts {
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl BinCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }
}

/// Index of the bin holding `v`, or `Err(below?)` when it falls outside.
pub(crate) fn locate(scheme: &BinScheme, v: f64) -> std::result::Result<usize, bool> {
    let edges = &scheme.edges;
    let last = edges.len() - 1;
    if v < edges[0] {
        return if scheme.open_low { Ok(0) } else { Err(true) };
    }
    if v >= edges[last] {
        return if scheme.open_high || v == edges[last] {
            Ok(last - 1)
        } else {
            Err(false)
        };
    }
    Ok(edges.partition_point(|&e| e <= v) - 1)
}

/// Counts each value into exactly one of: a bin, `below`, or `above`.
pub fn assign(values: &[f64], scheme: &BinScheme) -> Result<BinCounts> {
    validate_edges(&scheme.edges)?;
    let mut out = BinCounts {
        counts: vec![0; scheme.bin_count()],
        below: 0,
        above: 0,
    };
    for &v in values {
        if v.is_nan() {
            return Err(Error::InvalidValue("NaN cannot be binned".into()));
        }
        match locate(scheme, v) {
            Ok(i) => out.counts[i] += 1,
            Err(true) => out.below += 1,
            Err(false) => out.above += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelFormat {
    pub grain: Grain,
}

fn fmt_at(v: f64, decimals: usize) -> String {
    // `+ 0.0` folds -0.0 into 0.0.
    format!("{:.*}", decimals, v + 0.0)
}

/// Regenerates display labels from the edges.
///
/// When every edge is a grain multiple, bins print as inclusive ranges
/// (`20–29` for `[20, 30)` at grain 1). Otherwise they print half-open
/// (`[2.5, 7.5)`), with the closed final bin as `[a, b]`.
pub fn label_bins(scheme: &BinScheme, format: &LabelFormat) -> BinScheme {
    let grain = format.grain;
    let discrete = scheme.edges.iter().all(|&e| grain.divides(e));
    let decimals = if discrete {
        grain.decimals()
    } else {
        let edge_digits = scheme
            .edges
            .iter()
            .filter_map(|&e| Dec::from_f64(e))
            .map(|d| d.frac_digits() as usize)
            .max()
            .unwrap_or(0);
        edge_digits.clamp(grain.decimals(), 9)
    };
    let nb = scheme.bin_count();
    let labels = (0..nb)
        .map(|i| {
            let lo = scheme.edges[i];
            let hi = scheme.edges[i + 1];
            let low_tail = i == 0 && scheme.open_low;
            let high_tail = i + 1 == nb && scheme.open_high;
            match (low_tail, high_tail) {
                (true, true) => "all values".to_string(),
                (true, false) => format!("< {}", fmt_at(hi, decimals)),
                (false, true) => format!("≥ {}", fmt_at(lo, decimals)),
                (false, false) if discrete => {
                    let upper = Dec::from_f64(hi)
                        .and_then(|h| h.checked_sub(grain.step()))
                        .map(|d| d.to_f64())
                        .unwrap_or(hi);
                    if upper <= lo {
                        fmt_at(lo, decimals)
                    } else {
                        format!("{}–{}", fmt_at(lo, decimals), fmt_at(upper, decimals))
                    }
                }
                (false, false) => {
                    let close = if i + 1 == nb { ']' } else { ')' };
                    format!("[{}, {}{close}", fmt_at(lo, decimals), fmt_at(hi, decimals))
                }
            }
        })
        .collect();
    BinScheme {
        labels,
        ..scheme.clone()
    }
}
