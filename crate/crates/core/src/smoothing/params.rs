use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::corpus::{parse_num, WordId};
use crate::error::{Error, Result};

/// Held-out smoothing weights `sigma_k(w)` in `[0, 1]`, one per component
/// `k` and conditioning word `w`. Rows without a fitted value use the
/// per-component fallback.
///
/// A bigram interpolation has a single component; a mixed-order level of
/// order `m` has `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaParams {
    fallback: Vec<f64>,
    rows: BTreeMap<(usize, WordId), f64>,
}

/// Per-row interpolation weights of a smoothed bigram.
pub type InterpolationParams = SigmaParams;

/// `sigma_k(w)` for each skip component of a mixed-order level.
pub type MixedSmoothingParams = SigmaParams;

impl SigmaParams {
    /// Every row of every component set to `value`.
    pub fn constant(components: usize, value: f64) -> Result<Self> {
        check_sigma(value)?;
        if components == 0 {
            return Err(Error::param("at least one smoothing component is required"));
        }
        Ok(SigmaParams {
            fallback: vec![value; components],
            rows: BTreeMap::new(),
        })
    }

    pub fn components(&self) -> usize {
        self.fallback.len()
    }

    /// `sigma_k(w)`, `k` counted from 1.
    pub fn sigma(&self, k: usize, w: WordId) -> f64 {
        self.rows
            .get(&(k, w))
            .copied()
            .unwrap_or(self.fallback[k - 1])
    }

    pub fn fallback(&self, k: usize) -> f64 {
        self.fallback[k - 1]
    }

    pub fn set_fallback(&mut self, k: usize, value: f64) -> Result<()> {
        check_sigma(value)?;
        self.check_component(k)?;
        self.fallback[k - 1] = value;
        Ok(())
    }

    pub fn set(&mut self, k: usize, w: WordId, value: f64) -> Result<()> {
        check_sigma(value)?;
        self.check_component(k)?;
        self.rows.insert((k, w), value);
        Ok(())
    }

    /// Explicitly fitted rows, sorted by `(k, w)`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, WordId, f64)> + '_ {
        self.rows.iter().map(|(&(k, w), &s)| (k, w, s))
    }

    fn check_component(&self, k: usize) -> Result<()> {
        if (1..=self.components()).contains(&k) {
            Ok(())
        } else {
            Err(Error::param(format!("component {k} out of range")))
        }
    }

    /// ```text
    /// SIGMA v1
    /// fallback <k> <sigma>
    /// <k> <w> <sigma>
    /// ```
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "SIGMA v1")?;
        for (k, s) in self.fallback.iter().enumerate() {
            writeln!(out, "fallback {} {s}", k + 1)?;
        }
        for (k, w, s) in self.rows() {
            writeln!(out, "{k} {w} {s}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        const WHAT: &str = "sigma file";
        let mut lines = input.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("SIGMA v1") {
            return Err(Error::format(WHAT, 1, "expected SIGMA v1 header"));
        }
        let mut fallback = BTreeMap::new();
        let mut rows = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            let sigma = match fields.as_slice() {
                [] => continue,
                ["fallback", k, s] => {
                    let s = parse_num::<f64>(s, WHAT, lineno)?;
                    fallback.insert(parse_num::<usize>(k, WHAT, lineno)?, s);
                    s
                }
                [k, w, s] => {
                    let s = parse_num::<f64>(s, WHAT, lineno)?;
                    let key = (parse_num::<usize>(k, WHAT, lineno)?, parse_num(w, WHAT, lineno)?);
                    rows.insert(key, s);
                    s
                }
                _ => return Err(Error::format(WHAT, lineno, "expected `k w sigma`")),
            };
            if !(0.0..=1.0).contains(&sigma) {
                return Err(Error::format(WHAT, lineno, "sigma outside [0, 1]"));
            }
        }
        let m = fallback.len();
        if m == 0 || fallback.keys().copied().ne(1..=m) {
            return Err(Error::format(WHAT, 0, "fallback lines must cover components 1..m"));
        }
        if rows.keys().any(|&(k, _)| !(1..=m).contains(&k)) {
            return Err(Error::format(WHAT, 0, "row component out of range"));
        }
        Ok(SigmaParams {
            fallback: fallback.into_values().collect(),
            rows,
        })
    }
}

fn check_sigma(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::param(format!("sigma must lie in [0, 1], got {value}")))
    }
}

/// Stopping rule and tying for held-out EM fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iters: usize,
    /// Stop once no parameter moves by more than this.
    pub tol: f64,
    /// Share one value per component across all rows.
    pub tied: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iters: 50,
            tol: 1e-6,
            tied: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let mut p = SigmaParams::constant(2, 0.5).unwrap();
        p.set(1, 7, 0.25).unwrap();
        p.set(2, 3, 1.0).unwrap();
        p.set_fallback(2, 0.125).unwrap();
        let mut buf = Vec::new();
        p.write(&mut buf).unwrap();
        assert_eq!(SigmaParams::read(&buf[..]).unwrap(), p);
        assert_eq!(p.sigma(1, 7), 0.25);
        assert_eq!(p.sigma(1, 8), 0.5);
        assert_eq!(p.sigma(2, 8), 0.125);
    }

    #[test]
    fn rejects_out_of_range() {
        let mut p = SigmaParams::constant(1, 0.5).unwrap();
        assert!(p.set(1, 0, 1.5).is_err());
        assert!(p.set(2, 0, 0.5).is_err());
        assert!(SigmaParams::constant(1, -0.1).is_err());
        assert!(SigmaParams::read("SIGMA v1\nfallback 1 2.0\n".as_bytes()).is_err());
        assert!(SigmaParams::read("SIGMA v1\n1 3 0.5\n".as_bytes()).is_err());
    }
}
