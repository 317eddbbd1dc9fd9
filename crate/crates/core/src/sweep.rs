//! One-parameter sweeps and their tabular output.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::g2::{g2_bruteforce, g2_closed, CumulantMode, CumulantSpec};
use crate::model::{validity_ratio, LedModel, ModelParams, VALIDITY_WARNING};
use crate::montecarlo::{run_ensemble, MonteCarloConfig};
use crate::photon::{default_integration, mean_photon_closed, mean_photon_quadrature, ConvolutionMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// `2κ/γ⊥`
    KappaRatio,
    Pump,
    NThreshold,
    GammaPar,
    NEmitters,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::KappaRatio,
        SweepVariable::Pump,
        SweepVariable::NThreshold,
        SweepVariable::GammaPar,
        SweepVariable::NEmitters,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::KappaRatio => "kappa_ratio",
            SweepVariable::Pump => "pump",
            SweepVariable::NThreshold => "n_threshold",
            SweepVariable::GammaPar => "gamma_par",
            SweepVariable::NEmitters => "n_emitters",
        }
    }

    /// Copy of `base` with this variable set to `value`.
    pub fn apply(self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = *base;
        match self {
            SweepVariable::KappaRatio => p.kappa = 0.5 * value * p.gamma_perp,
            SweepVariable::Pump => p.pump = value,
            SweepVariable::NThreshold => p.n_threshold = value,
            SweepVariable::GammaPar => p.gamma_par = value,
            SweepVariable::NEmitters => p.n_emitters = value,
        }
        p
    }

    fn admits(self, value: f64) -> bool {
        value.is_finite()
            && match self {
                SweepVariable::Pump => value >= 0.0,
                SweepVariable::NEmitters => value >= 1.0,
                _ => value > 0.0,
            }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown sweep variable '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            _ => Err(Error::InvalidSpec(format!("unknown scale '{s}'"))),
        }
    }
}

/// Optional columns; the closed form is always computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Methods {
    pub quadrature: bool,
    pub cumulant: bool,
    pub montecarlo: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub scale: Scale,
    pub methods: Methods,
    pub mc_records: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(base: ModelParams, variable: SweepVariable, start: f64, stop: f64, steps: usize, scale: Scale) -> Self {
        SweepSpec { base, variable, start, stop, steps, scale, methods: Methods::default(), mc_records: 500, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidSpec(format!("steps must be >= 2, got {}", self.steps)));
        }
        for v in [self.start, self.stop] {
            if !self.variable.admits(v) {
                return Err(Error::InvalidSpec(format!("{} = {v} is outside its domain", self.variable)));
            }
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::InvalidSpec("log scale needs positive endpoints".into()));
        }
        if self.methods.montecarlo && self.mc_records < crate::montecarlo::MIN_RECORDS {
            return Err(Error::InvalidSpec(format!(
                "Monte Carlo needs at least {} records, got {}",
                crate::montecarlo::MIN_RECORDS,
                self.mc_records
            )));
        }
        // the base parameters other than the swept one must be valid on their own
        self.variable.apply(&self.base, self.start).validate().map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    /// Sweep values with both endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.steps - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub swept_var: SweepVariable,
    pub value: f64,
    pub n0: f64,
    pub delta_n: f64,
    pub n_closed: f64,
    pub g2_closed: f64,
    pub n_quad: Option<f64>,
    pub g2_cumulant: Option<f64>,
    pub g2_mc: Option<f64>,
    pub g2_mc_se: Option<f64>,
    pub validity_ratio: f64,
    /// `;`-separated warnings; empty when clean.
    pub flags: String,
}

impl SweepRow {
    /// Bitwise equality, treating equal NaN payloads as equal.
    pub fn same_bits(&self, other: &SweepRow) -> bool {
        let b = |x: f64| x.to_bits();
        let ob = |x: Option<f64>| x.map(f64::to_bits);
        self.swept_var == other.swept_var
            && b(self.value) == b(other.value)
            && b(self.n0) == b(other.n0)
            && b(self.delta_n) == b(other.delta_n)
            && b(self.n_closed) == b(other.n_closed)
            && b(self.g2_closed) == b(other.g2_closed)
            && ob(self.n_quad) == ob(other.n_quad)
            && ob(self.g2_cumulant) == ob(other.g2_cumulant)
            && ob(self.g2_mc) == ob(other.g2_mc)
            && ob(self.g2_mc_se) == ob(other.g2_mc_se)
            && b(self.validity_ratio) == b(other.validity_ratio)
            && self.flags == other.flags
    }
}

fn row_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn compute_row(spec: &SweepSpec, index: usize, value: f64) -> SweepRow {
    let params = spec.variable.apply(&spec.base, value);
    let validity = validity_ratio(&params);
    let mut flags = Vec::new();
    if validity > VALIDITY_WARNING {
        flags.push("validity".to_string());
    }
    let mut row = SweepRow {
        swept_var: spec.variable,
        value,
        n0: f64::NAN,
        delta_n: f64::NAN,
        n_closed: f64::NAN,
        g2_closed: f64::NAN,
        n_quad: None,
        g2_cumulant: None,
        g2_mc: None,
        g2_mc_se: None,
        validity_ratio: validity,
        flags: String::new(),
    };
    let model = match LedModel::new(params) {
        Ok(m) => m,
        Err(e) => {
            flags.push(flag_for(&e));
            row.n_quad = spec.methods.quadrature.then_some(f64::NAN);
            row.g2_cumulant = spec.methods.cumulant.then_some(f64::NAN);
            row.g2_mc = spec.methods.montecarlo.then_some(f64::NAN);
            row.g2_mc_se = spec.methods.montecarlo.then_some(f64::NAN);
            row.flags = flags.join(";");
            return row;
        }
    };
    let mean = mean_photon_closed(&model);
    row.n0 = mean.n0;
    row.delta_n = mean.delta_n;
    row.n_closed = mean.n_total;
    row.g2_closed = g2_closed(&model).g2;

    if spec.methods.quadrature {
        row.n_quad = Some(
            match mean_photon_quadrature(&model, ConvolutionMode::DeltaApprox, &default_integration(&model)) {
                Ok(q) => q.n_total,
                Err(e) => {
                    flags.push(flag_for(&e));
                    f64::NAN
                }
            },
        );
    }
    if spec.methods.cumulant {
        row.g2_cumulant = Some(match g2_bruteforce(&model, CumulantMode::Delta, &CumulantSpec::for_model(&model, 1e-8)) {
            Ok(g) => g.g2,
            Err(e) => {
                flags.push(flag_for(&e));
                f64::NAN
            }
        });
    }
    if spec.methods.montecarlo {
        let config = MonteCarloConfig::for_model(&model, spec.mc_records, row_seed(spec.seed, index));
        match run_ensemble(&model, &config) {
            Ok(e) => {
                row.g2_mc = Some(e.g2);
                row.g2_mc_se = Some(e.g2_se);
            }
            Err(e) => {
                flags.push(flag_for(&e));
                row.g2_mc = Some(f64::NAN);
                row.g2_mc_se = Some(f64::NAN);
            }
        }
    }
    row.flags = flags.join(";");
    row
}

fn flag_for(e: &Error) -> String {
    match e {
        Error::AboveThreshold { .. } => "above_threshold".into(),
        Error::NonConvergence { .. } => "non_convergence".into(),
        Error::TailTruncation { .. } => "tail_truncated".into(),
        Error::StepTooLarge { .. } => "step_too_large".into(),
        Error::InvalidParams(_) => "invalid_params".into(),
        other => format!("error:{}", other.to_string().replace([';', ',', '\n'], " ")),
    }
}

/// Rows are computed in parallel and returned in sweep order. Per-row
/// failures are recorded in `flags`; only an invalid spec is an error.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let values = spec.values();
    Ok(values.par_iter().enumerate().map(|(i, v)| compute_row(spec, i, *v)).collect())
}

const LEADING: [&str; 6] = ["swept_var", "value", "n0", "delta_n", "n_closed", "g2_closed"];

/// Column names for a table carrying the given methods.
pub fn csv_header(methods: &Methods) -> Vec<&'static str> {
    let mut h = LEADING.to_vec();
    if methods.quadrature {
        h.push("n_quad");
    }
    if methods.cumulant {
        h.push("g2_cumulant");
    }
    if methods.montecarlo {
        h.extend(["g2_mc", "g2_mc_se"]);
    }
    h.extend(["validity_ratio", "flags"]);
    h
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, rows: &[SweepRow], methods: &Methods) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(methods))?;
    for r in rows {
        let mut rec = vec![
            r.swept_var.name().to_string(),
            r.value.to_string(),
            r.n0.to_string(),
            r.delta_n.to_string(),
            r.n_closed.to_string(),
            r.g2_closed.to_string(),
        ];
        if methods.quadrature {
            rec.push(fmt_opt(r.n_quad));
        }
        if methods.cumulant {
            rec.push(fmt_opt(r.g2_cumulant));
        }
        if methods.montecarlo {
            rec.push(fmt_opt(r.g2_mc));
            rec.push(fmt_opt(r.g2_mc_se));
        }
        rec.push(r.validity_ratio.to_string());
        rec.push(r.flags.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table written by [`write_csv`]; the methods are inferred from the header.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<(Methods, Vec<SweepRow>)> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let has = |name: &str| header.iter().any(|h| h == name);
    let methods = Methods { quadrature: has("n_quad"), cumulant: has("g2_cumulant"), montecarlo: has("g2_mc") };
    let expected = csv_header(&methods);
    if header != expected {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let col = |name: &str| header.iter().position(|h| h == name).expect("checked header");
    let num = |rec: &csv::StringRecord, name: &str| -> Result<f64> {
        rec[col(name)].parse::<f64>().map_err(|e| Error::Parse(format!("{name}: {e}")))
    };
    let opt = |rec: &csv::StringRecord, name: &str| -> Result<Option<f64>> {
        if !has(name) || rec[col(name)].is_empty() {
            return Ok(None);
        }
        num(rec, name).map(Some)
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(SweepRow {
            swept_var: rec[col("swept_var")].parse()?,
            value: num(&rec, "value")?,
            n0: num(&rec, "n0")?,
            delta_n: num(&rec, "delta_n")?,
            n_closed: num(&rec, "n_closed")?,
            g2_closed: num(&rec, "g2_closed")?,
            n_quad: opt(&rec, "n_quad")?,
            g2_cumulant: opt(&rec, "g2_cumulant")?,
            g2_mc: opt(&rec, "g2_mc")?,
            g2_mc_se: opt(&rec, "g2_mc_se")?,
            validity_ratio: num(&rec, "validity_ratio")?,
            flags: rec[col("flags")].to_string(),
        });
    }
    Ok((methods, rows))
}

/// One JSON object per line. Non-finite values are written as strings.
pub fn write_records<W: Write>(mut out: W, rows: &[SweepRow]) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, &RecordLine::from(r))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(input: R) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RecordLine = serde_json::from_str(&line)?;
        rows.push(rec.into_row()?);
    }
    Ok(rows)
}

/// JSON has no NaN, so numbers travel as their shortest round-trip text.
#[derive(Serialize, Deserialize)]
struct RecordLine {
    swept_var: SweepVariable,
    value: String,
    n0: String,
    delta_n: String,
    n_closed: String,
    g2_closed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_quad: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2_cumulant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2_mc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2_mc_se: Option<String>,
    validity_ratio: String,
    flags: String,
}

impl From<&SweepRow> for RecordLine {
    fn from(r: &SweepRow) -> Self {
        let s = |x: f64| x.to_string();
        RecordLine {
            swept_var: r.swept_var,
            value: s(r.value),
            n0: s(r.n0),
            delta_n: s(r.delta_n),
            n_closed: s(r.n_closed),
            g2_closed: s(r.g2_closed),
            n_quad: r.n_quad.map(s),
            g2_cumulant: r.g2_cumulant.map(s),
            g2_mc: r.g2_mc.map(s),
            g2_mc_se: r.g2_mc_se.map(s),
            validity_ratio: s(r.validity_ratio),
            flags: r.flags.clone(),
        }
    }
}

impl RecordLine {
    fn into_row(self) -> Result<SweepRow> {
        let p = |x: &str| x.parse::<f64>().map_err(|e| Error::Parse(format!("'{x}': {e}")));
        let po = |x: Option<String>| x.map(|v| p(&v)).transpose();
        Ok(SweepRow {
            swept_var: self.swept_var,
            value: p(&self.value)?,
            n0: p(&self.n0)?,
            delta_n: p(&self.delta_n)?,
            n_closed: p(&self.n_closed)?,
            g2_closed: p(&self.g2_closed)?,
            n_quad: po(self.n_quad)?,
            g2_cumulant: po(self.g2_cumulant)?,
            g2_mc: po(self.g2_mc)?,
            g2_mc_se: po(self.g2_mc_se)?,
            validity_ratio: p(&self.validity_ratio)?,
            flags: self.flags,
        })
    }
}
