//! Benchmark sweep over images, noise densities, seeds and methods.
//!
//! Every `(image, method, density, seed)` tuple corrupts the clean image with
//! symmetric salt-and-pepper noise (`salt = pepper = density / 200`), restores
//! it and scores the result against the clean image. Rows are emitted in
//! canonical order (image, method, density, seed) followed, per
//! `(image, method, density)` group, by a mean row whose seed column reads
//! `mean`. Only the `runtime_s` column varies between identical runs.
//!
//! # Spec files
//!
//! A sweep can be described by `key = value` lines; `#` starts a comment and
//! list values are comma separated. Relative image and output paths are
//! resolved against the spec file's directory.
//!
//! ```text
//! images = goldhill.pgm, boat.pgm
//! densities = 30, 50, 80
//! seeds = 0, 1, 2, 3, 4
//! methods = pm, pm-ws, med, amf
//! output = report.csv
//! # optional tunables
//! alpha = 1
//! epsilon_coeff = 0.8
//! epsilon_window = area      # or: side
//! intensity_unit = normalized  # or: raw, or a positive number
//! max_window = 0             # 0 = unbounded; otherwise odd side length
//! amf_max_window = 7
//! ssim_mode = windowed       # or: global
//! parallel = true
//! ```

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{adaptive_median, median3x3};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::metrics::{QualityReport, SsimMode};
use crate::noise::{inject, NoiseParams};
use crate::pgm::read_pgm_file;
use crate::rbf::{NORMALIZED_UNIT, RAW_UNIT};
use crate::restore::{restore, EpsilonWindow, RestorationConfig};

pub const CSV_HEADER: &str = "image,method,density_pct,seed,mse,psnr_db,ssim,runtime_s";
pub const DEFAULT_DENSITIES: [f64; 10] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 95.0];
pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const DEFAULT_AMF_MAX_WINDOW: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// RBF interpolation followed by smoothing and outlier replacement.
    Pm,
    /// RBF interpolation only.
    PmWs,
    /// 3×3 median filter.
    Med,
    /// Adaptive median filter.
    Amf,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Pm, Method::PmWs, Method::Med, Method::Amf];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pm => "pm",
            Method::PmWs => "pm-ws",
            Method::Med => "med",
            Method::Amf => "amf",
        }
    }

    /// Restores `noisy`; the output is quantized to 8 bits.
    pub fn apply(self, noisy: &Image, cfg: &RestorationConfig, amf_max_window: usize) -> Result<Image> {
        match self {
            Method::Pm => restore(
                noisy,
                &RestorationConfig {
                    smoothing_enabled: true,
                    ..*cfg
                },
            ),
            Method::PmWs => restore(
                noisy,
                &RestorationConfig {
                    smoothing_enabled: false,
                    ..*cfg
                },
            ),
            Method::Med => Ok(median3x3(noisy).quantized()),
            Method::Amf => Ok(adaptive_median(noisy, amf_max_window)?.quantized()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pm" => Ok(Method::Pm),
            "pm-ws" | "pmws" | "pm_ws" => Ok(Method::PmWs),
            "med" => Ok(Method::Med),
            "amf" => Ok(Method::Amf),
            other => Err(Error::InvalidParameter(format!(
                "unknown method {other:?} (expected pm, pm-ws, med or amf)"
            ))),
        }
    }
}

impl FromStr for SsimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "windowed" => Ok(SsimMode::Windowed),
            "global" => Ok(SsimMode::Global),
            other => Err(Error::InvalidParameter(format!("unknown SSIM mode {other:?}"))),
        }
    }
}

impl FromStr for EpsilonWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "side" => Ok(EpsilonWindow::SideLength),
            "area" => Ok(EpsilonWindow::PixelCount),
            other => Err(Error::InvalidParameter(format!(
                "unknown epsilon window {other:?} (expected side or area)"
            ))),
        }
    }
}

/// `raw` (1), `normalized` (255) or a positive number.
pub fn parse_intensity_unit(s: &str) -> Result<f64> {
    let unit = match s.trim().to_ascii_lowercase().as_str() {
        "raw" => RAW_UNIT,
        "normalized" => NORMALIZED_UNIT,
        other => other
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("unknown intensity unit {other:?}")))?,
    };
    if unit > 0.0 && unit.is_finite() {
        Ok(unit)
    } else {
        Err(Error::InvalidParameter(format!(
            "intensity unit must be positive, got {unit}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSpec {
    pub images: Vec<PathBuf>,
    /// Percentages in `(0, 100]`.
    pub densities: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub output: Option<PathBuf>,
    pub restoration: RestorationConfig,
    pub amf_max_window: usize,
    pub ssim_mode: SsimMode,
    /// Run tuples concurrently. Row order is unaffected; runtimes are.
    pub parallel: bool,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            images: Vec::new(),
            densities: DEFAULT_DENSITIES.to_vec(),
            seeds: DEFAULT_SEEDS.to_vec(),
            methods: Method::ALL.to_vec(),
            output: None,
            restoration: RestorationConfig::default(),
            amf_max_window: DEFAULT_AMF_MAX_WINDOW,
            ssim_mode: SsimMode::Windowed,
            parallel: true,
        }
    }
}

fn parse_list<T, F>(value: &str, f: F) -> Result<Vec<T>>
where
    F: Fn(&str) -> Result<T>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect()
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::BenchSpec(format!("{key}: cannot parse {value:?}")))
}

/// Maps an odd window side (0 = unbounded) to a half-width limit.
pub fn max_half_width_from_side(side: usize) -> Result<Option<usize>> {
    match side {
        0 => Ok(None),
        s if s >= 3 && s % 2 == 1 => Ok(Some(s / 2)),
        s => Err(Error::InvalidParameter(format!(
            "window side must be 0 (unbounded) or odd and >= 3, got {s}"
        ))),
    }
}

impl BenchmarkSpec {
    /// Parses and validates a spec file body; relative paths are resolved
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let spec = BenchmarkSpec::parse_unvalidated(text, base_dir)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Like [`parse`](Self::parse) but leaves validation to the caller, so
    /// fields can still be overridden (e.g. from command-line flags).
    pub fn parse_unvalidated(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec = BenchmarkSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::BenchSpec(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "images" => spec.images = parse_list(value, |s| Ok(base_dir.join(s)))?,
                "densities" => spec.densities = parse_list(value, |s| parse_num("densities", s))?,
                "seeds" => spec.seeds = parse_list(value, |s| parse_num("seeds", s))?,
                "methods" => spec.methods = parse_list(value, Method::from_str)?,
                "output" => spec.output = Some(base_dir.join(value)),
                "alpha" => spec.restoration.alpha = parse_num(&key, value)?,
                "epsilon_coeff" => spec.restoration.epsilon_coefficient = parse_num(&key, value)?,
                "epsilon_window" => spec.restoration.epsilon_window = value.parse()?,
                "intensity_unit" => spec.restoration.intensity_unit = parse_intensity_unit(value)?,
                "max_window" => spec.restoration.max_half_width = max_half_width_from_side(parse_num(&key, value)?)?,
                "amf_max_window" => spec.amf_max_window = parse_num(&key, value)?,
                "ssim_mode" => spec.ssim_mode = value.parse()?,
                "parallel" => spec.parallel = parse_num(&key, value)?,
                _ => return Err(Error::BenchSpec(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        Ok(spec)
    }

    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let spec = BenchmarkSpec::from_file_unvalidated(path)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file_unvalidated<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        BenchmarkSpec::parse_unvalidated(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::BenchSpec("at least one image is required".into()));
        }
        self.validate_sweep()
    }

    fn validate_sweep(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::BenchSpec("at least one seed is required".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::BenchSpec("at least one method is required".into()));
        }
        if self.densities.is_empty() {
            return Err(Error::BenchSpec("at least one density is required".into()));
        }
        if let Some(d) = self.densities.iter().find(|d| !(**d > 0.0 && **d <= 100.0)) {
            return Err(Error::BenchSpec(format!("density {d} is outside (0, 100]")));
        }
        if self.amf_max_window < 3 || self.amf_max_window.is_multiple_of(2) {
            return Err(Error::BenchSpec(format!(
                "amf_max_window must be odd and >= 3, got {}",
                self.amf_max_window
            )));
        }
        self.restoration.validate()
    }
}

/// One line of the report. `seed == None` marks a mean row; `quality == None`
/// marks a failed run.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub method: Method,
    pub density_pct: f64,
    pub seed: Option<u64>,
    pub quality: Option<QualityReport>,
    pub runtime_s: f64,
}

impl BenchRow {
    pub fn is_mean(&self) -> bool {
        self.seed.is_none()
    }

    /// CSV fields, runtime excluded.
    pub fn deterministic_fields(&self) -> String {
        let seed = self.seed.map_or_else(|| "mean".to_string(), |s| s.to_string());
        let (mse, psnr, ssim) = match &self.quality {
            Some(q) => (format_g(q.mse), format_g(q.psnr), format_g(q.ssim)),
            None => ("nan".into(), "nan".into(), "nan".into()),
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.image,
            self.method,
            format_g(self.density_pct),
            seed,
            mse,
            psnr,
            ssim
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{},{}", row.deterministic_fields(), format_g(row.runtime_s));
        }
        out
    }

    pub fn mean_rows(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(|r| r.is_mean())
    }

    /// Mean row for one `(image, method, density)` group.
    pub fn mean(&self, image: &str, method: Method, density_pct: f64) -> Option<&BenchRow> {
        self.mean_rows()
            .find(|r| r.image == image && r.method == method && r.density_pct == density_pct)
    }
}

/// Formats like C's `%.6g`; infinities print as `inf`.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const SIG: usize = 6;
    let sci = format!("{:.*e}", SIG - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Loads every image of `spec` and runs the sweep.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchReport> {
    spec.validate()?;
    let images = spec
        .images
        .iter()
        .map(|p| Ok((image_id(p), read_pgm_file(p)?)))
        .collect::<Result<Vec<_>>>()?;
    run_on_images(spec, &images)
}

/// Runs the sweep on already-loaded `(id, clean image)` pairs; `spec.images`
/// is ignored.
pub fn run_on_images(spec: &BenchmarkSpec, images: &[(String, Image)]) -> Result<BenchReport> {
    spec.validate_sweep()?;
    if images.is_empty() {
        return Err(Error::BenchSpec("at least one image is required".into()));
    }
    let mut tuples = Vec::new();
    for (i, _) in images.iter().enumerate() {
        for &method in &spec.methods {
            for &density in &spec.densities {
                for &seed in &spec.seeds {
                    tuples.push((i, method, density, seed));
                }
            }
        }
    }
    let run = |&(i, method, density, seed): &(usize, Method, f64, u64)| -> Result<BenchRow> {
        let (id, clean) = &images[i];
        let noisy = inject(clean, &NoiseParams::symmetric(density, seed)?)?;
        let start = Instant::now();
        let restored = method.apply(&noisy, &spec.restoration, spec.amf_max_window);
        let runtime_s = start.elapsed().as_secs_f64();
        let quality = match restored {
            Ok(img) => Some(QualityReport::compute(clean, &img, spec.ssim_mode)?),
            Err(err) if err.is_numerical() => {
                log::warn!("{id} {method} {density}% seed {seed}: {err}");
                None
            }
            Err(err) => return Err(err),
        };
        Ok(BenchRow {
            image: id.clone(),
            method,
            density_pct: density,
            seed: Some(seed),
            quality,
            runtime_s,
        })
    };
    let runs: Vec<BenchRow> = if spec.parallel {
        tuples.par_iter().map(run).collect::<Result<_>>()?
    } else {
        tuples.iter().map(run).collect::<Result<_>>()?
    };

    let mut rows = Vec::with_capacity(runs.len() + runs.len() / spec.seeds.len());
    for group in runs.chunks(spec.seeds.len()) {
        rows.extend_from_slice(group);
        rows.push(mean_row(group));
    }
    Ok(BenchReport { rows })
}

fn mean_row(group: &[BenchRow]) -> BenchRow {
    let first = &group[0];
    let ok: Vec<&QualityReport> = group.iter().filter_map(|r| r.quality.as_ref()).collect();
    let quality = (!ok.is_empty()).then(|| {
        let n = ok.len() as f64;
        QualityReport {
            mse: ok.iter().map(|q| q.mse).sum::<f64>() / n,
            psnr: ok.iter().map(|q| q.psnr).sum::<f64>() / n,
            ssim: ok.iter().map(|q| q.ssim).sum::<f64>() / n,
        }
    });
    BenchRow {
        image: first.image.clone(),
        method: first.method,
        density_pct: first.density_pct,
        seed: None,
        quality,
        runtime_s: group.iter().map(|r| r.runtime_s).sum::<f64>() / group.len() as f64,
    }
}
