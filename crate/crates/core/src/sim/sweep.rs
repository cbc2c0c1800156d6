use super::{wilson_interval, SimConfig, SimContext, SimError, SimMetadata};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Trials dispatched together. Fixed so the early-stop cut lands on the
/// same trial whatever the worker count.
const CHUNK: u64 = 32;

/// Aggregated outcome at one TX-SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimPoint {
    pub tx_snr_db: f64,
    pub tb_errors: usize,
    pub tb_total: usize,
}

impl SimPoint {
    pub fn new(tx_snr_db: f64, tb_errors: usize, tb_total: usize) -> Self {
        assert!(tb_errors <= tb_total);
        Self { tx_snr_db, tb_errors, tb_total }
    }

    pub fn bler(&self) -> f64 {
        if self.tb_total == 0 {
            0.0
        } else {
            self.tb_errors as f64 / self.tb_total as f64
        }
    }

    /// Wilson 95% interval on the BLER.
    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.tb_errors, self.tb_total)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SimPoint>,
    pub metadata: SimMetadata,
}

#[cfg(feature = "parallel")]
type Pool = Option<rayon::ThreadPool>;
#[cfg(not(feature = "parallel"))]
type Pool = Option<()>;

fn run_chunk(pool: &Pool, ctx: &SimContext, snr_index: usize, range: std::ops::Range<u64>) -> Result<Vec<bool>, SimError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || range.into_par_iter().map(|t| ctx.run_trial(snr_index, t)).collect();
        match pool {
            Some(p) => p.install(run),
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = pool;
        range.map(|t| ctx.run_trial(snr_index, t)).collect()
    }
}

/// Runs every SNR point of `cfg`, calling `on_point` as each one finishes.
///
/// `threads` bounds the worker pool (`None` uses the global pool). Results
/// depend only on the config.
pub fn run_sweep(
    cfg: &SimConfig,
    threads: Option<usize>,
    mut on_point: impl FnMut(&SimPoint) -> Result<(), SimError>,
) -> Result<SweepResult, SimError> {
    let ctx = SimContext::new(cfg)?;
    #[cfg(feature = "parallel")]
    let pool: Pool = threads
        .map(|n| rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build())
        .transpose()
        .map_err(|e| SimError::Runtime(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let pool: Pool = threads.map(|_| ());

    let mut points = Vec::with_capacity(cfg.snr_points.len());
    for (s, &snr) in cfg.snr_points.iter().enumerate() {
        let (mut total, mut errors) = (0usize, 0usize);
        let mut next = 0u64;
        'point: while total < cfg.n_tbs && errors < cfg.max_errors {
            let end = (next + CHUNK).min(cfg.n_tbs as u64);
            for ok in run_chunk(&pool, &ctx, s, next..end)? {
                total += 1;
                errors += usize::from(!ok);
                if errors >= cfg.max_errors {
                    break 'point;
                }
            }
            next = end;
        }
        let p = SimPoint::new(snr, errors, total);
        on_point(&p)?;
        points.push(p);
    }
    Ok(SweepResult { points, metadata: ctx.metadata() })
}

/// Row-at-a-time CSV output, flushed after every point.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
    method: String,
    m_bits: u8,
    modulation: String,
    code_rate: f64,
}

pub const CSV_HEADER: [&str; 10] =
    ["method", "m_bits", "modulation", "code_rate", "tx_snr_db", "tb_total", "tb_errors", "bler", "ci_low", "ci_high"];

impl<W: Write> CsvSink<W> {
    pub fn new(writer: W, cfg: &SimConfig) -> Result<Self, SimError> {
        let mcs = cfg.mcs.resolve()?;
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(CSV_HEADER).map_err(csv_err)?;
        inner.flush()?;
        Ok(Self {
            inner,
            method: cfg.codec.method.as_str().into(),
            m_bits: cfg.codec.m_bits,
            modulation: mcs.modulation.to_string(),
            code_rate: mcs.code_rate.value(),
        })
    }

    pub fn write_point(&mut self, p: &SimPoint) -> Result<(), SimError> {
        let (lo, hi) = p.interval();
        self.inner
            .write_record([
                self.method.clone(),
                self.m_bits.to_string(),
                self.modulation.clone(),
                self.code_rate.to_string(),
                p.tx_snr_db.to_string(),
                p.tb_total.to_string(),
                p.tb_errors.to_string(),
                p.bler().to_string(),
                lo.to_string(),
                hi.to_string(),
            ])
            .map_err(csv_err)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W, SimError> {
        self.inner.into_inner().map_err(|e| SimError::Io(e.into_error()))
    }
}

fn csv_err(e: csv::Error) -> SimError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SimError::Io(io),
        other => SimError::Runtime(format!("{other:?}")),
    }
}

/// Writes a complete curve to `path`.
pub fn write_csv(path: &Path, cfg: &SimConfig, points: &[SimPoint]) -> Result<(), SimError> {
    let mut sink = CsvSink::new(std::fs::File::create(path)?, cfg)?;
    for p in points {
        sink.write_point(p)?;
    }
    Ok(())
}

/// Sidecar path for a CSV: `out.csv` → `out.meta.json`.
pub fn metadata_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn write_metadata(path: &Path, meta: &SimMetadata) -> Result<(), SimError> {
    let text = serde_json::to_string_pretty(meta).map_err(|e| SimError::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::CompressionConfig;

    fn quick(n_tbs: usize) -> SimConfig {
        let mut cfg = SimConfig::new(CompressionConfig::none(), 1, vec![200.0]);
        cfg.n_tbs = n_tbs;
        cfg
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let res = run_sweep(&quick(8), Some(1), |_| Ok(())).unwrap();
        assert_eq!(res.points, vec![SimPoint::new(200.0, 0, 8)]);
    }

    #[test]
    fn early_stop_is_exact() {
        let mut cfg = quick(100);
        cfg.snr_points = vec![-100.0];
        cfg.max_errors = 5;
        let mut seen = Vec::new();
        let res = run_sweep(&cfg, Some(2), |p| {
            seen.push(*p);
            Ok(())
        })
        .unwrap();
        assert_eq!(res.points, vec![SimPoint::new(-100.0, 5, 5)]);
        assert_eq!(seen, res.points);
    }

    #[test]
    fn csv_layout() {
        let cfg = quick(4);
        let mut sink = CsvSink::new(Vec::new(), &cfg).unwrap();
        sink.write_point(&SimPoint::new(3.5, 1, 4)).unwrap();
        let text = String::from_utf8(sink.into_inner().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("method,m_bits,modulation,code_rate,tx_snr_db,tb_total,tb_errors,bler,ci_low,ci_high"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&row[..8], ["none", "16", "QPSK", "0.1171875", "3.5", "4", "1", "0.25"]);
    }
}
