use std::io::Write;

use super::TrainingSample;
use crate::error::{Error, Result};
use crate::eval::fmt_f64;

/// CSV with header `k,label,f0,...,f{len-1}`.
pub fn write_samples_csv<W: Write>(samples: &[TrainingSample], mut out: W) -> Result<()> {
    let width = samples.first().map_or(0, |s| s.features.len());
    let mut header = String::from("k,label");
    for i in 0..width {
        header.push_str(&format!(",f{i}"));
    }
    writeln!(out, "{header}")?;
    let mut line = String::new();
    for s in samples {
        if s.features.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: s.features.len(),
            });
        }
        line.clear();
        line.push_str(&s.k.to_string());
        line.push(',');
        line.push_str(&fmt_f64(s.label));
        for f in &s.features {
            line.push(',');
            line.push_str(&fmt_f64(*f));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn parse_samples_csv(text: &str) -> Result<Vec<TrainingSample>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty samples file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let width = cols.len().saturating_sub(2);
    let expected = (0..width).map(|i| format!("f{i}"));
    if cols.len() < 2 || cols[0] != "k" || cols[1] != "label" || !cols[2..].iter().copied().eq(expected) {
        return Err(Error::Parse("samples header must be k,label,f0,...".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = || Error::Parse(format!("samples line {}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != width + 2 {
                return Err(bad());
            }
            let reals = f[1..]
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(TrainingSample {
                k: f[0].parse().map_err(|_| bad())?,
                label: reals[0],
                features: reals[1..].to_vec(),
            })
        })
        .collect()
}
