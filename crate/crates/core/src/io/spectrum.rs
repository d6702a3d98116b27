use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::table::{parse_table, Table};
use crate::error::{Error, Result};
use crate::numeric::format_f64;

/// Acquisition settings attached to a spectrum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectrumMeta {
    pub power_mw: Option<f64>,
    pub rabi_mhz: Option<f64>,
    pub sample_id: Option<String>,
    pub delta_side_mhz: Option<f64>,
    /// Any other header keys, kept verbatim.
    pub extra: BTreeMap<String, String>,
}

/// A normalised ODMR trace.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Spectrum {
    pub freq_mhz: Vec<f64>,
    pub signal: Vec<f64>,
    pub sigma: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.freq_mhz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq_mhz.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.freq_mhz.len();
        if self.signal.len() != n || self.sigma.len() != n {
            return Err(Error::Schema(format!(
                "column lengths differ: freq {n}, signal {}, sigma {}",
                self.signal.len(),
                self.sigma.len()
            )));
        }
        if let Some(i) = self.freq_mhz.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Schema(format!(
                "freq_mhz not strictly increasing at row {}",
                i + 2
            )));
        }
        if self.sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Schema("sigma must be finite and > 0".into()));
        }
        if self.signal.iter().chain(&self.freq_mhz).any(|v| !v.is_finite()) {
            return Err(Error::Schema("non-finite value in spectrum".into()));
        }
        Ok(())
    }

    /// Copy keeping only rows where `keep` is true.
    pub fn filtered(&self, keep: impl Fn(f64) -> bool) -> Spectrum {
        let mut out = Spectrum {
            meta: self.meta.clone(),
            ..Spectrum::default()
        };
        for i in 0..self.len() {
            if keep(self.freq_mhz[i]) {
                out.freq_mhz.push(self.freq_mhz[i]);
                out.signal.push(self.signal[i]);
                out.sigma.push(self.sigma[i]);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# odmr spectrum\n");
        let m = &self.meta;
        let opt = |s: &mut String, k: &str, v: Option<f64>| {
            if let Some(v) = v {
                let _ = writeln!(s, "# {k} = {}", format_f64(v));
            }
        };
        opt(&mut s, "power_mw", m.power_mw);
        opt(&mut s, "rabi_mhz", m.rabi_mhz);
        if let Some(id) = &m.sample_id {
            let _ = writeln!(s, "# sample_id = {id}");
        }
        opt(&mut s, "delta_side_mhz", m.delta_side_mhz);
        for (k, v) in &m.extra {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s.push_str("freq_mhz signal sigma\n");
        for i in 0..self.len() {
            let _ = writeln!(
                s,
                "{} {} {}",
                format_f64(self.freq_mhz[i]),
                format_f64(self.signal[i]),
                format_f64(self.sigma[i])
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Spectrum> {
        let table = parse_table(text)?;
        let meta = meta_from(&table)?;
        let spec = Spectrum {
            freq_mhz: table.column("freq_mhz")?,
            signal: table.column("signal")?,
            sigma: table.column("sigma")?,
            meta,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn meta_from(table: &Table) -> Result<SpectrumMeta> {
    let mut meta = SpectrumMeta::default();
    for (key, value, line) in &table.header {
        let num = || {
            crate::numeric::parse_f64(value)
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: *line,
                    column: 1,
                    message: format!("header `{key}` is not a finite number: {value:?}"),
                })
        };
        match key.as_str() {
            "power_mw" => meta.power_mw = Some(num()?),
            "rabi_mhz" => meta.rabi_mhz = Some(num()?),
            "delta_side_mhz" => meta.delta_side_mhz = Some(num()?),
            "sample_id" => meta.sample_id = Some(value.clone()),
            _ => {
                meta.extra.insert(key.clone(), value.clone());
            }
        }
    }
    Ok(meta)
}

pub fn write_spectrum(path: &Path, spec: &Spectrum) -> Result<()> {
    spec.validate()?;
    std::fs::write(path, spec.to_text())?;
    Ok(())
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    Spectrum::from_text(&std::fs::read_to_string(path)?)
}
