//! Experiment configs, run manifests, CSV emission and matrix export.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::groups::{GroupDescriptor, GroupElement};
use crate::linalg::CMatrix;
use crate::measurement::{Instrument, MeasurementOperator, SensingOperator};
use crate::rip::{Estimator, OperatorFamily, ScalingConfig, ScalingRow};
use crate::rng;
use crate::signal::SignalVector;
use crate::sparsity::SparsityModel;

pub const THREADS_ENV: &str = "RIP_LAB_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstrumentSpec {
    AllOnes,
    Identity,
    /// Standard normal `η`; scaling runs draw a fresh one per redraw.
    Gaussian {
        seed: u64,
        #[serde(default)]
        real: bool,
    },
    Functional {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    /// Real block map, one row per output coordinate.
    Block { rows: Vec<Vec<f64>> },
}

impl InstrumentSpec {
    /// Instrument on `C^n`; Gaussian rows are left unrealized.
    pub fn build(&self, n: usize) -> Result<Instrument> {
        let check = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: n,
                    actual: len,
                })
            }
        };
        match self {
            InstrumentSpec::AllOnes => Ok(Instrument::all_ones(n)),
            InstrumentSpec::Identity => Ok(Instrument::identity(n)),
            InstrumentSpec::Gaussian { seed, real } => Ok(Instrument::GaussianRow {
                seed: *seed,
                real: *real,
                eta: None,
            }),
            InstrumentSpec::Functional { re, im } => {
                check(re.len())?;
                if !im.is_empty() {
                    check(im.len())?;
                }
                let eta = re
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| Complex64::new(r, im.get(i).copied().unwrap_or(0.0)))
                    .collect();
                Instrument::functional(SignalVector::new(eta))
            }
            InstrumentSpec::Block { rows } => {
                for r in rows {
                    check(r.len())?;
                }
                Instrument::block(rows.iter().map(|r| SignalVector::from_real(r)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
}

/// A scaling experiment as written in a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub model: SparsityModel,
    /// Group spec such as `hw:64` or `pauli:2*pauli:2`.
    pub group: String,
    pub instrument: InstrumentSpec,
    #[serde(default)]
    pub operator: OperatorFamily,
    pub s_list: Vec<f64>,
    pub m_list: Vec<usize>,
    pub estimator: Estimator,
    pub redraws: usize,
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default)]
    pub delta_targets: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn at(path: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(path, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Checks every referenced spec and lowers to a [`ScalingConfig`].
    pub fn to_scaling(&self) -> Result<ScalingConfig> {
        if self.id.is_empty() {
            return Err(Error::config("id", "must be nonempty"));
        }
        let group: GroupDescriptor = self.group.parse().map_err(at("group"))?;
        group.validate().map_err(at("group"))?;
        self.model.validate().map_err(at("model"))?;
        if group.dim() != self.model.dim() {
            return Err(Error::config(
                "group",
                format!("acts on dimension {} but the model has {}", group.dim(), self.model.dim()),
            ));
        }
        let instrument = self.instrument.build(group.dim()).map_err(at("instrument"))?;
        if self.s_list.is_empty() || self.s_list.iter().any(|&s| s.is_nan() || s < 1.0) {
            return Err(Error::config("s_list", "needs at least one s ≥ 1"));
        }
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return Err(Error::config("m_list", "needs at least one m ≥ 1"));
        }
        if self.redraws == 0 {
            return Err(Error::config("redraws", "must be ≥ 1"));
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0 && z < 1.0) {
                return Err(Error::config("zeta", "must lie in (0, 1)"));
            }
        }
        if let Some((i, _)) = self.delta_targets.iter().enumerate().find(|(_, &d)| d.is_nan() || d <= 0.0) {
            return Err(Error::config(format!("delta_targets[{i}]"), "must be > 0"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be ≥ 1"));
        }
        let cfg = ScalingConfig {
            group,
            instrument,
            model: self.model.clone(),
            s_list: self.s_list.clone(),
            m_list: self.m_list.clone(),
            redraws: self.redraws,
            estimator: self.estimator,
            seed: self.seed,
            operator: self.operator,
        };
        cfg.validate().map_err(at("estimator"))?;
        Ok(cfg)
    }

    /// The config with run-local fields (threads, output paths) cleared.
    fn hashed_view(&self) -> Self {
        Self {
            output: OutputPaths::default(),
            threads: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSeeds {
    pub s: f64,
    pub m: usize,
    pub estimator_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<CellSeeds>,
    /// SHA-256 of the canonical JSON of the fields above.
    pub manifest_hash: String,
    /// Worker threads used; not part of the hash.
    pub threads: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, scaling: &ScalingConfig, threads: usize) -> Result<Self> {
        let config = config.hashed_view();
        let mut seeds = Vec::new();
        for (si, &s) in scaling.s_list.iter().enumerate() {
            for (mi, &m) in scaling.m_list.iter().enumerate() {
                seeds.push(CellSeeds {
                    s,
                    m,
                    estimator_seeds: (0..scaling.redraws)
                        .map(|r| scaling.estimator_seed(si, mi, r))
                        .collect(),
                });
            }
        }
        let body = serde_json::json!({
            "id": config.id,
            "version": crate::VERSION,
            "config": config,
            "seeds": seeds,
        });
        Ok(Self {
            id: config.id.clone(),
            version: crate::VERSION.to_string(),
            manifest_hash: sha256_hex(&serde_json::to_vec(&body)?),
            config,
            seeds,
            threads,
        })
    }
}

/// Thread count from, in order: explicit override, config, `RIP_LAB_THREADS`,
/// then the number of logical CPUs.
pub fn resolve_threads(explicit: Option<usize>, config: Option<usize>) -> Result<usize> {
    if let Some(t) = explicit.or(config) {
        return if t == 0 {
            Err(Error::InvalidParameter("thread count must be ≥ 1".into()))
        } else {
            Ok(t)
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug, Serialize)]
struct CsvRecord<'a> {
    model: &'a str,
    group: &'a str,
    s: f64,
    m: usize,
    trials: usize,
    delta_median: f64,
    q25: f64,
    q75: f64,
    seed: u64,
    manifest_hash: &'a str,
}

/// CSV sink that flushes after every row.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
    hash: String,
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W, hash: &str) -> Self {
        Self {
            writer: csv::Writer::from_writer(inner),
            hash: hash.to_string(),
        }
    }

    pub fn write(&mut self, row: &ScalingRow) -> Result<()> {
        self.writer.serialize(CsvRecord {
            model: &row.model,
            group: &row.group,
            s: row.s,
            m: row.m,
            trials: row.trials,
            delta_median: row.delta_median,
            q25: row.q25,
            q75: row.q75,
            seed: row.seed,
            manifest_hash: &self.hash,
        })?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Result of a scaling run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: Manifest,
    pub rows: Vec<ScalingRow>,
}

/// Runs a scaling experiment, streaming CSV rows to `sink` cell by cell.
///
/// The manifest is written first when `config.output.manifest` is set, so
/// an interrupted run leaves a manifest and every completed row on disk.
pub fn run_to<W: Write>(config: &ExperimentConfig, threads: Option<usize>, sink: W) -> Result<RunOutput> {
    let scaling = config.to_scaling()?;
    let threads = resolve_threads(threads, config.threads)?;
    let manifest = Manifest::new(config, &scaling, threads)?;
    if let Some(p) = &config.output.manifest {
        write_json(p, &manifest)?;
    }
    let mut csv = CsvSink::new(sink, &manifest.manifest_hash);
    let mut rows = Vec::new();
    for si in 0..scaling.s_list.len() {
        for mi in 0..scaling.m_list.len() {
            let values = with_threads(threads, || scaling.cell_values(si, mi))??;
            let row = scaling.summarize(si, mi, values);
            csv.write(&row)?;
            rows.push(row);
        }
    }
    Ok(RunOutput { manifest, rows })
}

/// Runs a scaling experiment into `config.output.csv`.
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunOutput> {
    let path = config
        .output
        .csv
        .as_ref()
        .ok_or_else(|| Error::config("output.csv", "no CSV path given"))?;
    run_to(config, threads, BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Selection {
    /// `m` Haar-random elements.
    Haar { m: usize },
    Explicit { elements: Vec<GroupElement> },
    /// Every pure modulation `(l, 0)` of a Heisenberg–Weyl group.
    AllModulations,
}

/// A single measurement operator to densify and export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpExportConfig {
    pub group: String,
    pub instrument: InstrumentSpec,
    pub selection: Selection,
    pub seed: u64,
}

impl OpExportConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<MeasurementOperator> {
        let group: GroupDescriptor = self.group.parse().map_err(at("group"))?;
        let n = group.dim();
        let instrument = self
            .instrument
            .build(n)
            .and_then(|i| i.realize(n))
            .and_then(Instrument::normalized)
            .map_err(at("instrument"))?;
        match &self.selection {
            Selection::Haar { m } => {
                if *m == 0 {
                    return Err(Error::config("selection.m", "must be ≥ 1"));
                }
                let mut r = rng::stream(self.seed, &[0]);
                MeasurementOperator::draw(group, instrument, *m, &mut r)
            }
            Selection::Explicit { elements } => {
                MeasurementOperator::from_elements(group, instrument, elements.clone()).map_err(at("selection"))
            }
            Selection::AllModulations => match group {
                GroupDescriptor::HeisenbergWeyl { n } => {
                    let elems = (0..n).map(|l| GroupElement::HeisenbergWeyl { l, k: 0 }).collect();
                    MeasurementOperator::from_elements(group, instrument, elems)
                }
                _ => Err(Error::config("selection", "all_modulations needs a Heisenberg–Weyl group")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub rows: usize,
    pub cols: usize,
    pub layout: String,
    pub dtype: String,
    pub data_file: String,
    pub data_sha256: String,
    pub manifest_hash: String,
    pub source: serde_json::Value,
}

/// Sidecar path `<data>.json`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `a` column-major as little-endian `(re, im)` f64 pairs, plus a
/// JSON header next to it.
pub fn export_matrix(a: &CMatrix, path: &Path, source: serde_json::Value) -> Result<MatrixHeader> {
    let mut bytes = Vec::with_capacity(a.len() * 16);
    for z in a.iter() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::write(path, &bytes)?;
    let data_sha256 = sha256_hex(&bytes);
    let body = serde_json::json!({ "rows": a.nrows(), "cols": a.ncols(), "data_sha256": data_sha256, "source": source });
    let header = MatrixHeader {
        rows: a.nrows(),
        cols: a.ncols(),
        layout: "column_major".into(),
        dtype: "complex128_le".into(),
        data_file: path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        data_sha256,
        manifest_hash: sha256_hex(&serde_json::to_vec(&body)?),
        source,
    };
    write_json(&sidecar_path(path), &header)?;
    Ok(header)
}

/// Reads a matrix written by [`export_matrix`].
pub fn import_matrix(path: &Path) -> Result<CMatrix> {
    let header: MatrixHeader = serde_json::from_reader(File::open(sidecar_path(path))?)?;
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != header.rows * header.cols * 16 {
        return Err(Error::DimensionMismatch {
            expected: header.rows * header.cols * 16,
            actual: bytes.len(),
        });
    }
    let vals: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(CMatrix::from_vec(header.rows, header.cols, vals))
}

/// Densifies the operator described by `config` and exports it.
pub fn export_operator(config: &OpExportConfig, path: &Path) -> Result<MatrixHeader> {
    let op = config.build()?;
    export_matrix(&op.to_dense(), path, serde_json::to_value(config)?)
}
