//! Sweep specification: the resolved set of knobs a command runs with,
//! assembled from command-line flags over optional `key=value` config
//! file entries over defaults (flags win).

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct SpecError(pub String);

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Rates,
    Gdof,
    Simulate,
    Bounds,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Rates => "rates",
            Mode::Gdof => "gdof",
            Mode::Simulate => "simulate",
            Mode::Bounds => "bounds",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    /// Explicit gains h11, h12, h21, h22.
    Explicit([Complex64; 4]),
    /// Seeded ensemble of unit-magnitude uniform-phase gains.
    Ensemble(u32),
}

/// Unresolved options as they arrive from the command line or a config
/// file; `None` means "not given here".
#[derive(Debug, Default, Clone)]
pub struct RawSpec {
    pub snr_db: Option<String>,
    pub rho: Option<String>,
    pub h11: Option<String>,
    pub h12: Option<String>,
    pub h21: Option<String>,
    pub h22: Option<String>,
    pub ensemble: Option<String>,
    pub p: Option<String>,
    pub n: Option<String>,
    pub r: Option<String>,
    pub trials: Option<String>,
    pub seed: Option<String>,
    pub noiseless: Option<String>,
    pub out: Option<String>,
    pub json_summary: Option<String>,
}

impl RawSpec {
    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn from_config_file(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpecError(format!("cannot read config {}: {e}", path.display())))?;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SpecError(format!(
                    "config line {} is not key=value: {line:?}",
                    lineno + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut raw = RawSpec::default();
        for (key, value) in map {
            let slot = match key.as_str() {
                "snr-db" => &mut raw.snr_db,
                "rho" => &mut raw.rho,
                "h11" => &mut raw.h11,
                "h12" => &mut raw.h12,
                "h21" => &mut raw.h21,
                "h22" => &mut raw.h22,
                "ensemble" => &mut raw.ensemble,
                "p" => &mut raw.p,
                "n" => &mut raw.n,
                "r" => &mut raw.r,
                "trials" => &mut raw.trials,
                "seed" => &mut raw.seed,
                "noiseless" => &mut raw.noiseless,
                "out" => &mut raw.out,
                "json-summary" => &mut raw.json_summary,
                other => return Err(SpecError(format!("unknown config key {other:?}"))),
            };
            *slot = Some(value);
        }
        Ok(raw)
    }

    /// Flags win over config entries.
    pub fn or(self, fallback: RawSpec) -> RawSpec {
        RawSpec {
            snr_db: self.snr_db.or(fallback.snr_db),
            rho: self.rho.or(fallback.rho),
            h11: self.h11.or(fallback.h11),
            h12: self.h12.or(fallback.h12),
            h21: self.h21.or(fallback.h21),
            h22: self.h22.or(fallback.h22),
            ensemble: self.ensemble.or(fallback.ensemble),
            p: self.p.or(fallback.p),
            n: self.n.or(fallback.n),
            r: self.r.or(fallback.r),
            trials: self.trials.or(fallback.trials),
            seed: self.seed.or(fallback.seed),
            noiseless: self.noiseless.or(fallback.noiseless),
            out: self.out.or(fallback.out),
            json_summary: self.json_summary.or(fallback.json_summary),
        }
    }
}

/// Fully resolved sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: Mode,
    pub snr_db: Vec<f64>,
    pub rho: Vec<f64>,
    pub source: ChannelSource,
    pub p: u32,
    pub n: usize,
    pub r: usize,
    pub trials: u64,
    pub seed: u64,
    pub noiseless: bool,
    pub out: Option<String>,
    pub json_summary: Option<String>,
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, SpecError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| SpecError(format!("bad {what} list {text:?}: {e}")))?;
    if values.is_empty() {
        return Err(SpecError(format!("{what} list is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SpecError(format!(
            "{what} list contains a non-finite value"
        )));
    }
    Ok(values)
}

pub fn parse_complex(text: &str, what: &str) -> Result<Complex64, SpecError> {
    let Some((re, im)) = text.split_once(',') else {
        return Err(SpecError(format!("{what} must be re,im (got {text:?})")));
    };
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|e| SpecError(format!("bad {what} real part: {e}")))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|e| SpecError(format!("bad {what} imaginary part: {e}")))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(SpecError(format!("{what} must be finite")));
    }
    Ok(Complex64::new(re, im))
}

fn parse_scalar<T: std::str::FromStr>(
    raw: &Option<String>,
    what: &str,
    default: T,
) -> Result<T, SpecError>
where
    T::Err: fmt::Display,
{
    match raw {
        None => Ok(default),
        Some(text) => text
            .trim()
            .parse::<T>()
            .map_err(|e| SpecError(format!("bad {what} value {text:?}: {e}"))),
    }
}

impl SweepSpec {
    /// Validates and fills defaults: SNR grid of 20..80 dB (single 80 dB
    /// point for simulate), rho = 1, a single-draw ensemble, p = 3,
    /// n = 1 = r, 10^4 trials, seed 0.
    pub fn resolve(mode: Mode, raw: RawSpec) -> Result<Self, SpecError> {
        let snr_db = match &raw.snr_db {
            Some(text) => parse_f64_list(text, "snr-db")?,
            None => match mode {
                Mode::Simulate => vec![80.0],
                _ => vec![20.0, 40.0, 60.0, 80.0],
            },
        };
        let rho = match &raw.rho {
            Some(text) => parse_f64_list(text, "rho")?,
            None => vec![1.0],
        };

        let gains = [&raw.h11, &raw.h12, &raw.h21, &raw.h22];
        let given = gains.iter().filter(|g| g.is_some()).count();
        let source = if given == 4 {
            let mut h = [Complex64::new(0.0, 0.0); 4];
            for (slot, (raw, name)) in h
                .iter_mut()
                .zip(gains.iter().zip(["h11", "h12", "h21", "h22"]))
            {
                *slot = parse_complex(raw.as_ref().unwrap(), name)?;
            }
            if raw.ensemble.is_some() {
                return Err(SpecError(
                    "give either explicit gains or --ensemble, not both".into(),
                ));
            }
            ChannelSource::Explicit(h)
        } else if given == 0 {
            let count: u32 = parse_scalar(&raw.ensemble, "ensemble", 1)?;
            if count == 0 {
                return Err(SpecError("ensemble count must be positive".into()));
            }
            ChannelSource::Ensemble(count)
        } else {
            return Err(SpecError(
                "explicit channels need all four of --h11 --h12 --h21 --h22".into(),
            ));
        };

        let p: u32 = parse_scalar(&raw.p, "p", 3)?;
        nccic_core::algebra::validate_modulus(p)
            .map_err(|e| SpecError(format!("bad field modulus: {e}")))?;
        let n: usize = parse_scalar(&raw.n, "n", 1)?;
        let r: usize = parse_scalar(&raw.r, "r", n)?;
        if n == 0 || r == 0 || r > n {
            return Err(SpecError(format!("need 1 <= r <= n, got r={r}, n={n}")));
        }
        let trials: u64 = parse_scalar(&raw.trials, "trials", 10_000)?;
        if trials == 0 {
            return Err(SpecError("trials must be positive".into()));
        }
        let seed: u64 = parse_scalar(&raw.seed, "seed", 0)?;
        let noiseless = match raw.noiseless.as_deref() {
            None => false,
            Some("" | "true" | "1" | "yes") => true,
            Some("false" | "0" | "no") => false,
            Some(other) => return Err(SpecError(format!("bad noiseless value {other:?}"))),
        };

        Ok(SweepSpec {
            mode,
            snr_db,
            rho,
            source,
            p,
            n,
            r,
            trials,
            seed,
            noiseless,
            out: raw.out,
            json_summary: raw.json_summary,
        })
    }

    /// Canonical one-line rendering, hashed into the CSV header so
    /// downstream files record what produced them.
    pub fn canonical_string(&self) -> String {
        let source = match &self.source {
            ChannelSource::Explicit(h) => format!(
                "explicit:{}",
                h.iter()
                    .map(|c| format!("{},{}", c.re, c.im))
                    .collect::<Vec<_>>()
                    .join(";")
            ),
            ChannelSource::Ensemble(k) => format!("ensemble:{k}"),
        };
        format!(
            "mode={} snr_db={:?} rho={:?} source={} p={} n={} r={} trials={} seed={} noiseless={}",
            self.mode.as_str(),
            self.snr_db,
            self.rho,
            source,
            self.p,
            self.n,
            self.r,
            self.trials,
            self.seed,
            self.noiseless
        )
    }

    pub fn fingerprint(&self) -> u64 {
        fnv1a64(self.canonical_string().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
