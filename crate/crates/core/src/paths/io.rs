//! Text formats for step paths.
//!
//! CSV layout:
//!
//! ```text
//! # horizon=1
//! epoch,value
//! 0,0
//! 0.5,1
//! 0.8,2.5
//! ```
//!
//! The `0,<base>` row carries the value at time 0. Floats are written in their
//! shortest round-trip form, so both formats round-trip bit-exactly.

use super::StepPath;
use crate::error::{Error, Result};

impl StepPath {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# horizon={}\nepoch,value\n0,{}\n", self.horizon(), self.base());
        for (e, v) in self.epochs().iter().zip(self.values()) {
            out.push_str(&format!("{e},{v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let horizon: f64 = lines
            .next()
            .and_then(|l| l.strip_prefix("# horizon="))
            .ok_or_else(|| bad("missing '# horizon=' line"))?
            .parse()
            .map_err(|_| bad("bad horizon"))?;
        if lines.next() != Some("epoch,value") {
            return Err(bad("missing 'epoch,value' header"));
        }
        let mut rows = Vec::new();
        for l in lines {
            let (a, b) = l.split_once(',').ok_or_else(|| bad("expected two columns"))?;
            let e: f64 = a.trim().parse().map_err(|_| bad("bad epoch"))?;
            let v: f64 = b.trim().parse().map_err(|_| bad("bad value"))?;
            rows.push((e, v));
        }
        let (base, rest) = match rows.split_first() {
            Some((&(0.0, v), rest)) => (v, rest),
            _ => (0.0, &rows[..]),
        };
        let (epochs, values) = rest.iter().copied().unzip();
        StepPath::with_base(horizon, base, epochs, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("paths serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
