//! One-port Touchstone ingest and banded comparison of reflection data.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ri,
    Ma,
    Db,
}

/// Reflection coefficient S11 against frequency, sorted by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Touchstone {
    pub freq_hz: Vec<f64>,
    pub s11: Vec<Complex64>,
    /// Reference impedance (Ω).
    pub z0: f64,
}

fn unit_scale(u: &str) -> Option<f64> {
    Some(match u {
        "HZ" => 1.0,
        "KHZ" => 1e3,
        "MHZ" => 1e6,
        "GHZ" => 1e9,
        _ => return None,
    })
}

impl Touchstone {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `.s1p` text. Defaults follow the format: GHz, S, MA, R 50.
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse { file: file.to_string(), line, reason };
        let mut scale = 1e9;
        let mut format = Format::Ma;
        let mut z0 = 50.0;
        let mut seen_option = false;
        let mut rows: Vec<(f64, Complex64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('!').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(opt) = line.strip_prefix('#') {
                if seen_option {
                    return Err(err(n, "second option line".into()));
                }
                seen_option = true;
                let mut toks = opt.split_whitespace().map(|t| t.to_ascii_uppercase());
                while let Some(t) = toks.next() {
                    if let Some(s) = unit_scale(&t) {
                        scale = s;
                        continue;
                    }
                    match t.as_str() {
                        "S" => {}
                        "Y" | "Z" | "H" | "G" => return Err(err(n, format!("parameter {t} is not supported, only S"))),
                        "RI" => format = Format::Ri,
                        "MA" => format = Format::Ma,
                        "DB" => format = Format::Db,
                        "R" => {
                            let v = toks.next().ok_or_else(|| err(n, "R without a value".into()))?;
                            z0 = v.parse().map_err(|_| err(n, format!("bad reference impedance `{v}`")))?;
                            if !(z0 > 0.0) {
                                return Err(err(n, "reference impedance must be positive".into()));
                            }
                        }
                        _ => return Err(err(n, format!("unknown option `{t}`"))),
                    }
                }
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| err(n, format!("not a number: `{t}`"))))
                .collect::<Result<_>>()?;
            if vals.len() != 3 {
                return Err(err(n, format!("expected 3 columns for a one-port file, found {}", vals.len())));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(err(n, "non-finite value".into()));
            }
            let f = vals[0] * scale;
            if let Some(&(last, _)) = rows.last() {
                if f <= last {
                    return Err(err(n, format!("frequency {f} Hz is not increasing")));
                }
            }
            let s = match format {
                Format::Ri => Complex64::new(vals[1], vals[2]),
                Format::Ma => Complex64::from_polar(vals[1], vals[2].to_radians()),
                Format::Db => Complex64::from_polar(10f64.powf(vals[1] / 20.0), vals[2].to_radians()),
            };
            rows.push((f, s));
        }
        if rows.len() < 2 {
            return Err(err(text.lines().count().max(1), "need at least two data points".into()));
        }
        let (freq_hz, s11) = rows.into_iter().unzip();
        Ok(Self { freq_hz, s11, z0 })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.freq_hz[0], *self.freq_hz.last().unwrap())
    }

    /// Linear interpolation of real and imaginary parts; `f` must lie in range.
    pub fn at(&self, f: f64) -> Complex64 {
        let k = self.freq_hz.partition_point(|&v| v < f);
        if k == 0 {
            return self.s11[0];
        }
        if k >= self.freq_hz.len() {
            return *self.s11.last().unwrap();
        }
        let (f0, f1) = (self.freq_hz[k - 1], self.freq_hz[k]);
        let t = (f - f0) / (f1 - f0);
        self.s11[k - 1] * (1.0 - t) + self.s11[k] * t
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# Hz S RI R {}\n", self.z0);
        for (f, v) in self.freq_hz.iter().zip(&self.s11) {
            s.push_str(&format!("{f:.6e} {:.9} {:.9}\n", v.re, v.im));
        }
        s
    }
}

/// Deviation of `b` from `a` over a common frequency grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparamDeviation {
    pub band: (f64, f64),
    pub points: usize,
    pub max_re: f64,
    pub rms_re: f64,
    pub max_im: f64,
    pub rms_im: f64,
}

/// Resamples both datasets onto the union of their frequencies inside the
/// shared range (clipped to `band`) and reports real/imaginary deviations.
pub fn compare_sparams(a: &Touchstone, b: &Touchstone, band: Option<(f64, f64)>) -> Result<SparamDeviation> {
    let (a0, a1) = a.range();
    let (b0, b1) = b.range();
    let (mut lo, mut hi) = (a0.max(b0), a1.min(b1));
    if lo >= hi {
        return Err(Error::Workflow(format!(
            "frequency ranges [{a0:e}, {a1:e}] and [{b0:e}, {b1:e}] Hz do not overlap"
        )));
    }
    if let Some((f0, f1)) = band {
        if !(f0 < f1) {
            return Err(crate::error::invalid("band", format!("empty band {f0:e}:{f1:e}")));
        }
        if f0 < lo || f1 > hi {
            return Err(Error::Workflow(format!(
                "band {f0:e}:{f1:e} Hz is not covered by both datasets ({lo:e}:{hi:e} Hz)"
            )));
        }
        lo = f0;
        hi = f1;
    }
    let mut grid: Vec<f64> =
        a.freq_hz.iter().chain(&b.freq_hz).copied().filter(|&f| f >= lo && f <= hi).chain([lo, hi]).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * y.abs());
    let (mut max_re, mut max_im, mut sre, mut sim) = (0.0f64, 0.0f64, 0.0, 0.0);
    for &f in &grid {
        let d = b.at(f) - a.at(f);
        max_re = max_re.max(d.re.abs());
        max_im = max_im.max(d.im.abs());
        sre += d.re * d.re;
        sim += d.im * d.im;
    }
    let n = grid.len() as f64;
    Ok(SparamDeviation {
        band: (lo, hi),
        points: grid.len(),
        max_re,
        rms_re: (sre / n).sqrt(),
        max_im,
        rms_im: (sim / n).sqrt(),
    })
}
