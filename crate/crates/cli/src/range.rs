//! Parsers for list and range flags.

use serde::Serialize;

/// A `lo:hi:step` grid, or a single value written as `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.lo == self.hi {
            return vec![self.lo];
        }
        critwin::scaling::linear_grid(self.lo, self.hi, self.step).expect("validated when parsed")
    }
}

fn finite(text: &str) -> Result<f64, String> {
    let x: f64 = text.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{text}' is not finite"))
    }
}

pub fn parse_range(text: &str) -> Result<Range, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let range = match parts.as_slice() {
        [x] => {
            let x = finite(x)?;
            Range { lo: x, hi: x, step: 1.0 }
        }
        [lo, hi, step] => Range { lo: finite(lo)?, hi: finite(hi)?, step: finite(step)? },
        _ => return Err("expected lo:hi:step or a single value".into()),
    };
    if range.lo > range.hi {
        return Err(format!("lo = {} exceeds hi = {}", range.lo, range.hi));
    }
    if range.step <= 0.0 {
        return Err(format!("step must be positive, got {}", range.step));
    }
    if (range.hi - range.lo) / range.step > 1e7 {
        return Err("grid has more than 10^7 points".into());
    }
    Ok(range)
}

pub fn parse_finite(text: &str) -> Result<f64, String> {
    finite(text)
}

pub fn parse_positive(text: &str) -> Result<f64, String> {
    let x = finite(text)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

/// Moment indices `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Ks(pub Vec<u32>);

/// Comma-separated moment indices, each in `2..=12`.
pub fn parse_ks(text: &str) -> Result<Ks, String> {
    let ks = text
        .split(',')
        .map(|k| match k.trim().parse::<u32>() {
            Ok(k) if (2..=12).contains(&k) => Ok(k),
            _ => Err(format!("'{k}' is not a moment index in 2..=12")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ks.is_empty() {
        return Err("empty list".into());
    }
    Ok(Ks(ks))
}
