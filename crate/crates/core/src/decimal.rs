//! Exact base-10 numbers held as scaled integers.
//!
//! A [`Dec`] is `units · 10^exp`. Grain checks, nice steps and anchored edges
//! are all computed on `Dec` so that "is this edge a multiple of 0.1" has an
//! exact answer. Conversion to `f64` goes through the decimal string, which
//! yields the closest double to the exact value.

use std::cmp::Ordering;
use std::fmt;

/// Largest exponent gap we are willing to align without giving up.
const MAX_ALIGN: u32 = 36;

#[derive(Debug, Clone, Copy)]
pub struct Dec {
    units: i128,
    exp: i32,
}

fn pow10(p: u32) -> Option<i128> {
    10i128.checked_pow(p)
}

impl Dec {
    pub const ZERO: Dec = Dec { units: 0, exp: 0 };

    pub const fn new(units: i128, exp: i32) -> Dec {
        Dec { units, exp }
    }

    pub fn from_int(v: i64) -> Dec {
        Dec::new(v as i128, 0)
    }

    pub fn units(&self) -> i128 {
        self.units
    }

    pub fn exp(&self) -> i32 {
        self.exp
    }

    /// Parses plain or scientific decimal notation (`-12.50`, `3e6`).
    /// The written scale is kept, so `"1.50"` displays as `1.50`.
    pub fn parse(s: &str) -> Option<Dec> {
        let s = s.trim();
        let (mantissa, exp_part) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        let (neg, body) = match mantissa.as_bytes().first()? {
            b'-' => (true, &mantissa[1..]),
            b'+' => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut units: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            units = units.checked_mul(10)?.checked_add((b - b'0') as i128)?;
        }
        let mut exp = -(frac_part.len() as i32);
        if let Some(e) = exp_part {
            let e: i32 = e.parse().ok()?;
            exp = exp.checked_add(e)?;
        }
        Some(Dec::new(if neg { -units } else { units }, exp))
    }

    /// The shortest decimal that round-trips to `v`.
    pub fn from_f64(v: f64) -> Option<Dec> {
        if !v.is_finite() {
            return None;
        }
        Dec::parse(&format!("{v:e}")).map(|d| d.normalized())
    }

    pub fn to_f64(&self) -> f64 {
        format!("{}e{}", self.units, self.exp)
            .parse()
            .unwrap_or(f64::NAN)
    }

    /// Strips trailing zeros from `units`; zero becomes `0e0`.
    pub fn normalized(&self) -> Dec {
        if self.units == 0 {
            return Dec::ZERO;
        }
        let mut d = *self;
        while d.units % 10 == 0 {
            d.units /= 10;
            d.exp += 1;
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.units == 0
    }

    pub fn is_negative(&self) -> bool {
        self.units < 0
    }

    /// Number of significant fractional digits.
    pub fn frac_digits(&self) -> u32 {
        let n = self.normalized();
        if n.exp < 0 {
            n.exp.unsigned_abs()
        } else {
            0
        }
    }

    /// Rewrites both operands at the smaller exponent.
    fn align(a: Dec, b: Dec) -> Option<(i128, i128, i32)> {
        let a = a.normalized();
        let b = b.normalized();
        let exp = a.exp.min(b.exp);
        let sa = (a.exp - exp) as u32;
        let sb = (b.exp - exp) as u32;
        if sa > MAX_ALIGN || sb > MAX_ALIGN {
            return None;
        }
        Some((
            a.units.checked_mul(pow10(sa)?)?,
            b.units.checked_mul(pow10(sb)?)?,
            exp,
        ))
    }

    pub fn checked_add(self, other: Dec) -> Option<Dec> {
        let (a, b, exp) = Dec::align(self, other)?;
        Some(Dec::new(a.checked_add(b)?, exp).normalized())
    }

    pub fn checked_sub(self, other: Dec) -> Option<Dec> {
        self.checked_add(Dec::new(other.units.checked_neg()?, other.exp))
    }

    pub fn checked_mul_int(self, k: i128) -> Option<Dec> {
        Some(Dec::new(self.units.checked_mul(k)?, self.exp).normalized())
    }

    pub fn checked_mul(self, other: Dec) -> Option<Dec> {
        Some(
            Dec::new(
                self.units.checked_mul(other.units)?,
                self.exp.checked_add(other.exp)?,
            )
            .normalized(),
        )
    }

    /// `⌊self / step⌋` for a positive `step`.
    pub fn div_floor(self, step: Dec) -> Option<i128> {
        let (a, b, _) = Dec::align(self, step)?;
        if b <= 0 {
            return None;
        }
        Some(a.div_euclid(b))
    }

    /// `⌈self / step⌉` for a positive `step`.
    pub fn div_ceil(self, step: Dec) -> Option<i128> {
        let (a, b, _) = Dec::align(self, step)?;
        if b <= 0 {
            return None;
        }
        let q = a.div_euclid(b);
        Some(if a.rem_euclid(b) == 0 { q } else { q + 1 })
    }

    /// Nearest multiple of `step`, ties rounded away from zero.
    pub fn round_to_multiple(self, step: Dec) -> Option<Dec> {
        let (a, b, _) = Dec::align(self, step)?;
        if b <= 0 {
            return None;
        }
        let q = a.div_euclid(b);
        let r = a.rem_euclid(b);
        let twice = r.checked_mul(2)?;
        let k = match twice.cmp(&b) {
            Ordering::Less => q,
            Ordering::Greater => q + 1,
            Ordering::Equal => {
                if a >= 0 {
                    q + 1
                } else {
                    q
                }
            }
        };
        step.checked_mul_int(k)
    }

    /// Exact divisibility; `false` on overflow.
    pub fn is_multiple_of(self, step: Dec) -> bool {
        match Dec::align(self, step) {
            Some((_, 0, _)) | None => false,
            Some((a, b, _)) => a % b == 0,
        }
    }

    /// Rounds half away from zero to `dp` fractional digits.
    pub fn round_dp(self, dp: u32) -> Dec {
        let target = -(dp as i32);
        if self.exp >= target {
            return self;
        }
        let shift = (target - self.exp) as u32;
        let Some(div) = pow10(shift) else {
            return Dec::ZERO;
        };
        let q = self.units / div;
        let r = self.units % div;
        let q = if r.unsigned_abs() * 2 >= div.unsigned_abs() {
            q + self.units.signum()
        } else {
            q
        };
        Dec::new(q, target).normalized()
    }

    pub fn abs(self) -> Dec {
        Dec::new(self.units.abs(), self.exp)
    }
}

impl PartialEq for Dec {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dec {}

impl PartialOrd for Dec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dec {
    fn cmp(&self, other: &Self) -> Ordering {
        match Dec::align(*self, *other) {
            Some((a, b, _)) => a.cmp(&b),
            // Alignment only fails for wildly different magnitudes, where
            // the doubles already order correctly.
            None => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl From<i64> for Dec {
    fn from(v: i64) -> Self {
        Dec::from_int(v)
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.units < 0 { "-" } else { "" };
        let digits = self.units.unsigned_abs().to_string();
        if self.exp >= 0 {
            write!(f, "{sign}{digits}{}", "0".repeat(self.exp as usize))
        } else {
            let frac = self.exp.unsigned_abs() as usize;
            if digits.len() > frac {
                let (i, r) = digits.split_at(digits.len() - frac);
                write!(f, "{sign}{i}.{r}")
            } else {
                write!(f, "{sign}0.{}{digits}", "0".repeat(frac - digits.len()))
            }
        }
    }
}
