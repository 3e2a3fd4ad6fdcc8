//! CSV form of fit samples. The header selects the kind:
//! vector `x_um,z_um,re_bx_T,im_bx_T,re_bz_T,im_bz_T`,
//! magnitude `x_um,z_um,b_T`,
//! shift `x_um,z_um,lower,upper,drive_hz,power_db,shift_hz,sigma_hz`
//! with levels written `F:mF` and an empty sigma for none.

use num_complex::Complex64;

use super::fit::{Samples, ShiftChannel, ShiftSample};
use crate::atom::{HyperfineModel, Level, TransitionSpec};
use crate::error::{Error, Result};

const VECTOR: &str = "x_um,z_um,re_bx_T,im_bx_T,re_bz_T,im_bz_T";
const MAGNITUDE: &str = "x_um,z_um,b_T";
const SHIFT: &str = "x_um,z_um,lower,upper,drive_hz,power_db,shift_hz,sigma_hz";

fn level(l: Level) -> String {
    format!("{}:{}", l.f, l.m_f)
}

pub fn samples_to_csv(s: &Samples) -> String {
    let mut out = String::new();
    match s {
        Samples::Vector(v) => {
            out.push_str(VECTOR);
            out.push('\n');
            for ((x, z), b) in v {
                out.push_str(&format!("{x},{z},{:e},{:e},{:e},{:e}\n", b[0].re, b[0].im, b[1].re, b[1].im));
            }
        }
        Samples::Magnitude(v) => {
            out.push_str(MAGNITUDE);
            out.push('\n');
            for ((x, z), b) in v {
                out.push_str(&format!("{x},{z},{b:e}\n"));
            }
        }
        Samples::Shift { channels, samples } => {
            out.push_str(SHIFT);
            out.push('\n');
            for x in samples {
                let c = &channels[x.channel];
                let sigma = x.sigma_hz.map_or(String::new(), |v| format!("{v:e}"));
                out.push_str(&format!(
                    "{},{},{},{},{},{},{:e},{sigma}\n",
                    x.point.0,
                    x.point.1,
                    level(c.transition.lower),
                    level(c.transition.upper),
                    c.drive_hz,
                    c.power_db,
                    x.shift_hz
                ));
            }
        }
    }
    out
}

/// Reads samples; `#` lines are skipped. Shift channels are built with `model`
/// in order of first appearance.
pub fn samples_from_csv(text: &str, file: &str, model: &HyperfineModel) -> Result<Samples> {
    let err = |line: usize, reason: String| Error::Parse { file: file.to_string(), line, reason };
    let mut rows = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hline, header) = rows.next().ok_or_else(|| err(1, "no header".into()))?;
    let header = header.trim();
    let num = |n: usize, t: &str| t.trim().parse::<f64>().map_err(|_| err(n, format!("not a number: `{t}`")));
    let lvl = |n: usize, t: &str| -> Result<Level> {
        let (f, m) = t.trim().split_once(':').ok_or_else(|| err(n, format!("level `{t}` is not F:mF")))?;
        let p = |v: &str| v.parse::<i32>().map_err(|_| err(n, format!("level `{t}` is not F:mF")));
        Ok(Level::new(p(f)?, p(m)?))
    };
    let width = header.split(',').count();
    let mut cells = Vec::new();
    for (i, l) in rows {
        let c: Vec<&str> = l.split(',').collect();
        if c.len() != width {
            return Err(err(i + 1, format!("expected {width} columns, found {}", c.len())));
        }
        cells.push((i + 1, c));
    }
    let s = match header {
        VECTOR => Samples::Vector(
            cells
                .iter()
                .map(|(n, c)| {
                    let v: Vec<f64> = c.iter().map(|t| num(*n, t)).collect::<Result<_>>()?;
                    Ok(((v[0], v[1]), [Complex64::new(v[2], v[3]), Complex64::new(v[4], v[5])]))
                })
                .collect::<Result<_>>()?,
        ),
        MAGNITUDE => Samples::Magnitude(
            cells.iter().map(|(n, c)| Ok(((num(*n, c[0])?, num(*n, c[1])?), num(*n, c[2])?))).collect::<Result<_>>()?,
        ),
        SHIFT => {
            let mut keys: Vec<(TransitionSpec, f64, f64)> = Vec::new();
            let mut channels = Vec::new();
            let mut samples = Vec::new();
            for (n, c) in &cells {
                let t = TransitionSpec::new(lvl(*n, c[2])?, lvl(*n, c[3])?)?;
                let (drive, db) = (num(*n, c[4])?, num(*n, c[5])?);
                let channel = match keys.iter().position(|k| *k == (t, drive, db)) {
                    Some(k) => k,
                    None => {
                        channels.push(ShiftChannel::new(model, t, drive, db)?);
                        keys.push((t, drive, db));
                        keys.len() - 1
                    }
                };
                let sigma = if c[7].trim().is_empty() { None } else { Some(num(*n, c[7])?) };
                samples.push(ShiftSample {
                    point: (num(*n, c[0])?, num(*n, c[1])?),
                    channel,
                    shift_hz: num(*n, c[6])?,
                    sigma_hz: sigma,
                });
            }
            Samples::Shift { channels, samples }
        }
        other => return Err(err(hline + 1, format!("unrecognized header `{other}`"))),
    };
    Ok(s)
}
