//! Seeded Monte Carlo link simulation.
//!
//! Each trial draws a level uniformly, a message uniformly within the level,
//! encodes it with the scheme under test, sends it through the channel and
//! decodes. Per-level counters collect message-bit errors and correct level
//! decisions.
//!
//! Trials are cut into fixed-size chunks. Chunk `j` of point `i` for scheme
//! `s` draws from the ChaCha8 stream `(s, i, j)` of the master seed, and the
//! per-chunk counters are summed, so results do not depend on the number of
//! worker threads.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baseline::BaselineCodebook;
use crate::channel::{AwgnChannel, ChannelModel, VlcIsiChannel};
use crate::codebook::{level_label, message_bits, verify_codebook, LayeredCodebook};
use crate::decoder::classify;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "scheme,channel,param,level,trials,bit_count,bit_errors,ber,class_hits,gca,gca_lo,gca_hi,ties,seed";

/// Trials per RNG stream.
pub const CHUNK_TRIALS: u64 = 2048;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    Baseline,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Proposed => "proposed",
            Scheme::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSelection {
    Proposed,
    Baseline,
    Both,
}

impl SchemeSelection {
    pub fn schemes(&self) -> Vec<Scheme> {
        match self {
            SchemeSelection::Proposed => vec![Scheme::Proposed],
            SchemeSelection::Baseline => vec![Scheme::Baseline],
            SchemeSelection::Both => vec![Scheme::Proposed, Scheme::Baseline],
        }
    }
}

impl std::str::FromStr for SchemeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proposed" => Ok(SchemeSelection::Proposed),
            "baseline" => Ok(SchemeSelection::Baseline),
            "both" => Ok(SchemeSelection::Both),
            other => Err(Error::Invalid(format!(
                "unknown scheme `{other}` (expected proposed, baseline or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Awgn,
    Vlc,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Vlc => "vlc",
        })
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "awgn" => Ok(ChannelKind::Awgn),
            "vlc" => Ok(ChannelKind::Vlc),
            other => Err(Error::Invalid(format!("unknown channel `{other}` (expected awgn or vlc)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub schemes: SchemeSelection,
    pub channel: ChannelKind,
    /// Eb/N0 values in dB (AWGN) or interference coefficients `h` (VLC).
    pub sweep: Vec<f64>,
    pub trials_per_point: u64,
    pub master_seed: u64,
    pub noise_sigma: f64,
    pub threshold: f64,
    /// 1-based levels written to the output.
    pub report_levels: Vec<usize>,
    pub workers: usize,
}

impl SimConfig {
    pub fn awgn(sweep: Vec<f64>) -> Self {
        Self {
            schemes: SchemeSelection::Both,
            channel: ChannelKind::Awgn,
            sweep,
            trials_per_point: 200_000,
            master_seed: 1,
            noise_sigma: VlcIsiChannel::DEFAULT_NOISE_SIGMA,
            threshold: VlcIsiChannel::DEFAULT_THRESHOLD,
            report_levels: vec![1, 4, 6],
            workers: 1,
        }
    }

    pub fn vlc(sweep: Vec<f64>) -> Self {
        Self {
            channel: ChannelKind::Vlc,
            ..Self::awgn(sweep)
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials_per_point = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_schemes(mut self, schemes: SchemeSelection) -> Self {
        self.schemes = schemes;
        self
    }

    pub fn with_levels(mut self, levels: Vec<usize>) -> Self {
        self.report_levels = levels;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_noise_sigma(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self, levels: usize) -> Result<()> {
        if self.trials_per_point == 0 {
            return Err(Error::Invalid("trials per point must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Invalid("sweep list is empty".into()));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let unordered = self.sweep.windows(2).any(|w| !(w[1] > w[0]));
        if unordered {
            return Err(Error::Invalid("sweep values must be strictly increasing".into()));
        }
        if self.report_levels.is_empty() {
            return Err(Error::Invalid("no levels selected for reporting".into()));
        }
        for &l in &self.report_levels {
            if l == 0 || l > levels {
                return Err(Error::LevelOutOfRange { level: l, levels });
            }
        }
        for &p in &self.sweep {
            self.channel_at(p)?;
        }
        Ok(())
    }

    pub fn channel_at(&self, param: f64) -> Result<ChannelModel> {
        Ok(match self.channel {
            ChannelKind::Awgn => ChannelModel::Awgn(AwgnChannel::new(param)?),
            ChannelKind::Vlc => {
                ChannelModel::Vlc(VlcIsiChannel::new(param, self.noise_sigma, self.threshold)?)
            }
        })
    }
}

/// Per-level counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelCounts {
    pub trials: u64,
    pub bit_count: u64,
    pub bit_errors: u64,
    pub class_hits: u64,
    pub ties: u64,
}

impl LevelCounts {
    fn merge(&mut self, other: &LevelCounts) {
        self.trials += other.trials;
        self.bit_count += other.bit_count;
        self.bit_errors += other.bit_errors;
        self.class_hits += other.class_hits;
        self.ties += other.ties;
    }

    pub fn ber(&self) -> f64 {
        if self.bit_count == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bit_count as f64
        }
    }

    pub fn gca(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.class_hits as f64 / self.trials as f64
        }
    }

    pub fn gca_interval(&self) -> (f64, f64) {
        wilson_interval(self.class_hits, self.trials, Z_95)
    }

    pub fn ber_interval(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.bit_count, Z_95)
    }
}

/// Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub scheme: Scheme,
    pub channel: ChannelKind,
    pub param: f64,
    pub level: usize,
    pub counts: LevelCounts,
    pub seed: u64,
}

impl SimRow {
    pub fn ber(&self) -> f64 {
        self.counts.ber()
    }

    pub fn gca(&self) -> f64 {
        self.counts.gca()
    }

    fn write_csv(&self, out: &mut String) {
        let c = &self.counts;
        let (lo, hi) = c.gca_interval();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6e},{},{:.6},{:.6},{:.6},{},{}",
            self.scheme,
            self.channel,
            self.param,
            level_label(self.level),
            c.trials,
            c.bit_count,
            c.bit_errors,
            c.ber(),
            c.class_hits,
            c.gca(),
            lo,
            hi,
            c.ties,
            self.seed
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub rows: Vec<SimRow>,
    pub metadata: Vec<(String, String)>,
}

impl SimResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            row.write_csv(&mut out);
        }
        out
    }

    /// `key=value` lines describing how the numbers were produced.
    pub fn metadata_text(&self) -> String {
        self.metadata.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn row(&self, scheme: Scheme, param: f64, level: usize) -> Option<&SimRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.param == param && r.level == level)
    }

    /// Rows of one scheme and level in sweep order.
    pub fn series(&self, scheme: Scheme, level: usize) -> Vec<&SimRow> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme && r.level == level)
            .collect()
    }
}

fn stream_id(scheme: Scheme, point: usize, chunk: u64) -> u64 {
    let s = match scheme {
        Scheme::Proposed => 0u64,
        Scheme::Baseline => 1u64,
    };
    (s << 62) | ((point as u64 & 0x3F_FFFF) << 40) | (chunk & 0xFF_FFFF_FFFF)
}

/// Bit errors between an estimated and a true message index. A decision for
/// a level with a different message width counts every bit as wrong.
fn message_bit_errors(true_index: usize, true_bits: usize, est_index: usize, est_bits: usize) -> u64 {
    if est_bits != true_bits {
        return true_bits as u64;
    }
    let mask = if true_bits >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << true_bits) - 1
    };
    ((true_index ^ est_index) & mask).count_ones() as u64
}

struct Link<'a> {
    scheme: Scheme,
    codebook: &'a LayeredCodebook,
    baseline: Option<&'a BaselineCodebook>,
    channel: ChannelModel,
}

impl Link<'_> {
    fn run_chunk(&self, rng: &mut ChaCha8Rng, trials: u64, counts: &mut [LevelCounts]) {
        let cb = self.codebook;
        let m = cb.levels();
        for _ in 0..trials {
            let level = rng.random_range(1..=m);
            let size = cb.group(level).len();
            let index = rng.random_range(0..size);
            let bits = message_bits(size);
            let (est_level, est_index, tie) = match self.scheme {
                Scheme::Proposed => {
                    let sent = cb.group(level)[index];
                    let r = self.channel.transmit(&sent, rng);
                    let out = classify(&r, cb).expect("codebook blocklength");
                    (out.level, out.message_index, out.tie)
                }
                Scheme::Baseline => {
                    let bcb = self.baseline.expect("baseline configured");
                    let sent = bcb.encode(level, index).expect("valid level and index");
                    let r = self.channel.transmit(&sent, rng);
                    let out = bcb.decode(&r).expect("baseline blocklength");
                    (out.level, out.message_index, out.tie)
                }
            };
            let est_bits = message_bits(cb.group(est_level).len());
            let c = &mut counts[level - 1];
            c.trials += 1;
            c.bit_count += bits as u64;
            c.bit_errors += message_bit_errors(index, bits, est_index, est_bits);
            c.class_hits += (est_level == level) as u64;
            c.ties += tie as u64;
        }
    }
}

/// Runs one channel point for one scheme and returns per-level counters
/// (least important level first).
pub fn run_point(
    cfg: &SimConfig,
    point_index: usize,
    scheme: Scheme,
    codebook: &LayeredCodebook,
    baseline: Option<&BaselineCodebook>,
    pool: Option<&rayon::ThreadPool>,
) -> Result<Vec<LevelCounts>> {
    let channel = cfg.channel_at(cfg.sweep[point_index])?;
    if scheme == Scheme::Baseline && baseline.is_none() {
        return Err(Error::Invalid("baseline scheme requested without a baseline codebook".into()));
    }
    let link = Link {
        scheme,
        codebook,
        baseline,
        channel,
    };
    let m = codebook.levels();
    let chunks = cfg.trials_per_point.div_ceil(CHUNK_TRIALS);
    let run = |chunk: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
        rng.set_stream(stream_id(scheme, point_index, chunk));
        let trials = CHUNK_TRIALS.min(cfg.trials_per_point - chunk * CHUNK_TRIALS);
        let mut counts = vec![LevelCounts::default(); m];
        link.run_chunk(&mut rng, trials, &mut counts);
        counts
    };
    let merge = |mut a: Vec<LevelCounts>, b: Vec<LevelCounts>| {
        for (x, y) in a.iter_mut().zip(&b) {
            x.merge(y);
        }
        a
    };
    let zero = || vec![LevelCounts::default(); m];
    Ok(match pool {
        Some(pool) => pool.install(|| (0..chunks).into_par_iter().map(run).reduce(zero, merge)),
        None => (0..chunks).map(run).fold(zero(), merge),
    })
}

/// Sweeps every configured scheme over every channel point.
///
/// Refuses to run on a codebook that fails [`verify_codebook`].
pub fn simulate(
    cfg: &SimConfig,
    codebook: &LayeredCodebook,
    baseline: Option<&BaselineCodebook>,
) -> Result<SimResult> {
    let report = verify_codebook(codebook);
    if !report.passed() {
        return Err(Error::Precondition(format!(
            "refusing to simulate an unverified codebook: {}",
            report
                .violations
                .first()
                .map(ToString::to_string)
                .unwrap_or_else(|| "metadata mismatch".into())
        )));
    }
    cfg.validate(codebook.levels())?;
    let schemes = cfg.schemes.schemes();
    if schemes.contains(&Scheme::Baseline) {
        let bcb = baseline
            .ok_or_else(|| Error::Invalid("baseline scheme requested without a baseline codebook".into()))?;
        let sizes_match = bcb.levels() == codebook.levels()
            && (1..=codebook.levels()).all(|l| bcb.group_size(l) == codebook.group(l).len());
        if !sizes_match {
            return Err(Error::Invalid(
                "baseline levels and group sizes must match the codebook".into(),
            ));
        }
    }

    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?,
        )
    } else {
        None
    };

    let mut rows = Vec::new();
    for &scheme in &schemes {
        for (i, &param) in cfg.sweep.iter().enumerate() {
            let counts = run_point(cfg, i, scheme, codebook, baseline, pool.as_ref())?;
            log::info!("{scheme} {}={param} done", cfg.channel);
            for &level in &cfg.report_levels {
                let c = counts[level - 1];
                if c.trials == 0 {
                    log::warn!(
                        "{scheme} {}={param}: no trials landed on level {}, row omitted",
                        cfg.channel,
                        level_label(level)
                    );
                    continue;
                }
                rows.push(SimRow {
                    scheme,
                    channel: cfg.channel,
                    param,
                    level,
                    counts: c,
                    seed: cfg.master_seed,
                });
            }
        }
    }

    let mut metadata = vec![
        ("ber_basis".to_string(), "message-bits".to_string()),
        ("level_prior".into(), "uniform".into()),
        ("channel".into(), cfg.channel.to_string()),
        ("trials_per_point".into(), cfg.trials_per_point.to_string()),
        ("master_seed".into(), cfg.master_seed.to_string()),
        ("chunk_trials".into(), CHUNK_TRIALS.to_string()),
        ("blocklength".into(), codebook.blocklength().to_string()),
        (
            "targets".into(),
            codebook
                .level_specs()
                .iter()
                .map(|s| s.target_t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
    ];
    match cfg.channel {
        ChannelKind::Awgn => metadata.push(("ebn0_basis".into(), "per-coded-bit".into())),
        ChannelKind::Vlc => {
            metadata.push(("vlc.noise_sigma".into(), cfg.noise_sigma.to_string()));
            metadata.push(("vlc.threshold".into(), cfg.threshold.to_string()));
            metadata.push(("vlc.guard".into(), "zero".into()));
        }
    }
    if let Some(bcb) = baseline.filter(|_| schemes.contains(&Scheme::Baseline)) {
        metadata.push((
            "baseline.indicator_distance".into(),
            bcb.indicators().min_distance().to_string(),
        ));
    }
    Ok(SimResult { rows, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(100, 100, Z_95);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.96 && lo < 0.97);
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        // Closed form: centre 0.5, half-width z/(1+z^2/n) * sqrt(0.0025 + z^2/40000).
        assert!((lo - 0.403_831).abs() < 1e-5, "{lo}");
        assert!((hi - 0.596_169).abs() < 1e-5, "{hi}");
        let (lo, _) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn message_bit_error_rules() {
        assert_eq!(message_bit_errors(5, 3, 5, 3), 0);
        assert_eq!(message_bit_errors(5, 3, 2, 3), 3);
        assert_eq!(message_bit_errors(5, 3, 13, 3), 0);
        assert_eq!(message_bit_errors(1, 3, 1, 2), 3);
    }

    #[test]
    fn stream_ids_are_distinct() {
        let mut ids = std::collections::HashSet::new();
        for scheme in [Scheme::Proposed, Scheme::Baseline] {
            for point in 0..20 {
                for chunk in 0..50 {
                    assert!(ids.insert(stream_id(scheme, point, chunk)));
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let ok = SimConfig::awgn(vec![0.0, 1.0]);
        assert!(ok.validate(6).is_ok());
        assert!(SimConfig::awgn(vec![1.0, 0.0]).validate(6).is_err());
        assert!(SimConfig::awgn(vec![]).validate(6).is_err());
        assert!(ok.clone().with_trials(0).validate(6).is_err());
        assert!(ok.clone().with_levels(vec![7]).validate(6).is_err());
        assert!(SimConfig::vlc(vec![-0.1]).validate(6).is_err());
    }
}
