//! Plain-text `key = value` configuration.
//!
//! Keys carry a section prefix (`codebook.`, `sim.`, `awgn.`, `vlc.`,
//! `baseline.`). `#` starts a comment. Lists are comma separated; numeric
//! sweeps may also be written `start:stop:step` (inclusive).
//!
//! ```text
//! codebook.n     = 45
//! codebook.t     = 1,1,2,3,5,7
//! codebook.sizes = 8
//! sim.channel    = vlc
//! vlc.h_list     = 0:0.4:0.05
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::construct::{CandidatePolicy, ConstructionConfig};
use crate::codebook::{level_label, parse_level_label};
use crate::error::{Error, Result};
use crate::sim::{ChannelKind, SimConfig};

const KEYS: &[&str] = &[
    "codebook.n",
    "codebook.t",
    "codebook.sizes",
    "codebook.policy",
    "codebook.seed",
    "codebook.budget",
    "codebook.inter_min",
    "codebook.path",
    "sim.scheme",
    "sim.channel",
    "sim.trials",
    "sim.seed",
    "sim.levels",
    "sim.workers",
    "awgn.ebn0_db_list",
    "vlc.h_list",
    "vlc.noise_sigma",
    "vlc.threshold",
    "baseline.t_map",
    "baseline.indicator_seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub construction: ConstructionConfig,
    /// Codebook file to load or write, resolved against the config file's
    /// directory when relative.
    pub codebook_path: Option<PathBuf>,
    /// Simulation settings; `sim.sweep` follows the selected channel.
    pub sim: SimConfig,
    pub awgn_sweep: Vec<f64>,
    pub vlc_sweep: Vec<f64>,
    /// BCH capability per level; defaults to the codebook targets.
    pub baseline_t_map: Option<Vec<usize>>,
    pub indicator_seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        let awgn_sweep = default_awgn_sweep();
        Self {
            construction: ConstructionConfig::reference(),
            codebook_path: None,
            sim: SimConfig::awgn(awgn_sweep.clone()),
            awgn_sweep,
            vlc_sweep: default_vlc_sweep(),
            baseline_t_map: None,
            indicator_seed: 7,
        }
    }
}

/// Eb/N0 from -8 dB to 8 dB in 1 dB steps.
pub fn default_awgn_sweep() -> Vec<f64> {
    (-8..=8).map(f64::from).collect()
}

/// `h` from 0 to 0.4 in steps of 0.05.
pub fn default_vlc_sweep() -> Vec<f64> {
    (0..=8).map(|i| round_sweep(i as f64 * 0.05)).collect()
}

fn round_sweep(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut seen = HashSet::new();
        let mut t_list: Option<(usize, Vec<usize>)> = None;
        let mut sizes: Option<(usize, Vec<usize>)> = None;
        let mut n: Option<usize> = None;
        let mut inter: Vec<(usize, InterOverride)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(line, format!("expected `key = value`, found `{content}`")))?;
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(Error::config(line, format!("unknown key `{key}`")));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::config(line, format!("duplicate key `{key}`")));
            }
            if value.is_empty() {
                return Err(Error::config(line, format!("`{key}` has no value")));
            }
            match key {
                "codebook.n" => n = Some(scalar(line, key, value)?),
                "codebook.t" => t_list = Some((line, usize_list(line, key, value)?)),
                "codebook.sizes" => sizes = Some((line, usize_list(line, key, value)?)),
                "codebook.policy" => {
                    cfg.construction.policy = value
                        .parse::<CandidatePolicy>()
                        .map_err(|e| Error::config(line, e.to_string()))?
                }
                "codebook.seed" => cfg.construction.seed = scalar(line, key, value)?,
                "codebook.budget" => cfg.construction.max_candidates = scalar(line, key, value)?,
                "codebook.inter_min" => {
                    for item in value.split(',') {
                        inter.push((line, inter_override(line, item)?));
                    }
                }
                "codebook.path" => cfg.codebook_path = Some(PathBuf::from(value)),
                "sim.scheme" => {
                    cfg.sim.schemes = value.parse().map_err(|e: Error| Error::config(line, e.to_string()))?
                }
                "sim.channel" => {
                    cfg.sim.channel = value.parse().map_err(|e: Error| Error::config(line, e.to_string()))?
                }
                "sim.trials" => cfg.sim.trials_per_point = scalar(line, key, value)?,
                "sim.seed" => cfg.sim.master_seed = scalar(line, key, value)?,
                "sim.levels" => {
                    cfg.sim.report_levels = value
                        .split(',')
                        .map(|s| {
                            parse_level_label(s)
                                .ok_or_else(|| Error::config(line, format!("`{}` is not a level", s.trim())))
                        })
                        .collect::<Result<_>>()?
                }
                "sim.workers" => {
                    let w: usize = scalar(line, key, value)?;
                    if w == 0 {
                        return Err(Error::config(line, "sim.workers must be at least 1"));
                    }
                    cfg.sim.workers = w;
                }
                "awgn.ebn0_db_list" => cfg.awgn_sweep = sweep(line, key, value)?,
                "vlc.h_list" => cfg.vlc_sweep = sweep(line, key, value)?,
                "vlc.noise_sigma" => cfg.sim.noise_sigma = scalar(line, key, value)?,
                "vlc.threshold" => cfg.sim.threshold = scalar(line, key, value)?,
                "baseline.t_map" => cfg.baseline_t_map = Some(usize_list(line, key, value)?),
                "baseline.indicator_seed" => cfg.indicator_seed = scalar(line, key, value)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        if n.is_some() || t_list.is_some() || sizes.is_some() {
            let default_levels: Vec<(usize, usize)> = cfg
                .construction
                .levels
                .iter()
                .map(|l| (l.target_t, l.group_size))
                .collect();
            let (t_line, ts) = t_list.unwrap_or((0, default_levels.iter().map(|l| l.0).collect()));
            let (s_line, ss) = sizes.unwrap_or((0, vec![default_levels[0].1]));
            let ss = match ss.len() {
                1 => vec![ss[0]; ts.len()],
                k if k == ts.len() => ss,
                k => {
                    return Err(Error::config(
                        s_line.max(t_line),
                        format!("codebook.sizes has {k} entries but codebook.t has {}", ts.len()),
                    ))
                }
            };
            let pairs: Vec<(usize, usize)> = ts.into_iter().zip(ss).collect();
            let blocklength = n.unwrap_or(cfg.construction.blocklength);
            let previous = cfg.construction.clone();
            cfg.construction = ConstructionConfig::new(blocklength, &pairs);
            cfg.construction.seed = previous.seed;
            cfg.construction.max_candidates = previous.max_candidates;
            if seen.contains("codebook.policy") {
                cfg.construction.policy = previous.policy;
            }
        }
        for (line, ((p, q), d)) in inter {
            let m = cfg.construction.levels.len();
            if p == q || p > m || q > m {
                return Err(Error::config(line, format!("inter_min names levels outside 1..={m}")));
            }
            cfg.construction.min_inter.push(((p, q), d));
        }
        cfg.construction
            .validate()
            .map_err(|e| Error::config(0, e.to_string()))?;

        if let Some(t_map) = &cfg.baseline_t_map {
            if t_map.len() != cfg.construction.levels.len() {
                return Err(Error::config(
                    0,
                    format!(
                        "baseline.t_map has {} entries for {} levels",
                        t_map.len(),
                        cfg.construction.levels.len()
                    ),
                ));
            }
        }
        let m = cfg.construction.levels.len();
        if !seen.contains("sim.levels") {
            cfg.sim.report_levels = default_report_levels(m);
        }
        if let Some(&bad) = cfg.sim.report_levels.iter().find(|&&l| l > m) {
            return Err(Error::config(
                0,
                format!("sim.levels names level {} but only {m} levels exist", level_label(bad)),
            ));
        }
        cfg.sim.sweep = match cfg.sim.channel {
            ChannelKind::Awgn => cfg.awgn_sweep.clone(),
            ChannelKind::Vlc => cfg.vlc_sweep.clone(),
        };
        cfg.sim.validate(m).map_err(|e| Error::config(0, e.to_string()))?;
        Ok(cfg)
    }

    /// Reads and parses `path`; a relative `codebook.path` is resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(0, format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(p), Some(dir)) = (&cfg.codebook_path, path.parent()) {
            if p.is_relative() {
                cfg.codebook_path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    /// Switches the simulated channel and its sweep.
    pub fn set_channel(&mut self, channel: ChannelKind) {
        self.sim.channel = channel;
        self.sim.sweep = match channel {
            ChannelKind::Awgn => self.awgn_sweep.clone(),
            ChannelKind::Vlc => self.vlc_sweep.clone(),
        };
    }

    /// BCH capability per level for the comparison scheme.
    pub fn baseline_t_map(&self) -> Vec<usize> {
        self.baseline_t_map
            .clone()
            .unwrap_or_else(|| self.construction.levels.iter().map(|l| l.target_t).collect())
    }
}

/// First, middle and last level (A, D, F for six levels).
pub fn default_report_levels(levels: usize) -> Vec<usize> {
    let mut out = vec![1, levels / 2 + 1, levels];
    out.sort_unstable();
    out.dedup();
    out.retain(|&l| l >= 1 && l <= levels);
    out
}

fn scalar<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(line, format!("`{key}`: cannot parse `{value}`")))
}

fn usize_list(line: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|s| scalar(line, key, s.trim())).collect()
}

fn sweep(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let start: f64 = scalar(line, key, start)?;
            let stop: f64 = scalar(line, key, stop)?;
            let step: f64 = scalar(line, key, step)?;
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            let bad_step = !(step > 0.0);
            if bad_step || stop < start {
                return Err(Error::config(line, format!("`{key}`: range needs start <= stop and step > 0")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| round_sweep(start + i as f64 * step)).collect())
        }
        [_] => value.split(',').map(|s| scalar(line, key, s.trim())).collect(),
        _ => Err(Error::config(line, format!("`{key}`: expected a list or start:stop:step"))),
    }
}

/// `((p, q), distance)`.
type InterOverride = ((usize, usize), usize);

fn inter_override(line: usize, item: &str) -> Result<InterOverride> {
    let bad = || Error::config(line, format!("inter_min entry `{}` must look like `A-F:20`", item.trim()));
    let (pair, d) = item.trim().split_once(':').ok_or_else(bad)?;
    let (p, q) = pair.split_once('-').ok_or_else(bad)?;
    let p = parse_level_label(p).ok_or_else(bad)?;
    let q = parse_level_label(q).ok_or_else(bad)?;
    let d = d.trim().parse().map_err(|_| bad())?;
    Ok(((p, q), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SchemeSelection;

    #[test]
    fn defaults_match_reference_layout() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg.construction, ConstructionConfig::reference());
        assert_eq!(cfg.sim.report_levels, vec![1, 4, 6]);
        assert_eq!(cfg.sim.sweep, default_awgn_sweep());
        assert_eq!(cfg.baseline_t_map(), vec![1, 1, 2, 3, 5, 7]);
        assert_eq!(default_vlc_sweep().last(), Some(&0.4));
        assert_eq!(default_vlc_sweep()[3], 0.15);
    }

    #[test]
    fn full_file() {
        let text = "\
# small test layout
codebook.n = 12
codebook.t = 1, 2
codebook.sizes = 4   # broadcast
codebook.policy = gray-code
codebook.inter_min = A-B:6
sim.channel = vlc
sim.scheme = proposed
sim.levels = A,B
sim.trials = 500
vlc.h_list = 0:0.2:0.1
vlc.noise_sigma = 0
";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.construction.blocklength, 12);
        assert_eq!(cfg.construction.levels[1].group_size, 4);
        assert_eq!(cfg.construction.policy, CandidatePolicy::GrayCode);
        assert_eq!(cfg.construction.min_inter, vec![((1, 2), 6)]);
        assert_eq!(cfg.sim.channel, ChannelKind::Vlc);
        assert_eq!(cfg.sim.schemes, SchemeSelection::Proposed);
        assert_eq!(cfg.sim.sweep, vec![0.0, 0.1, 0.2]);
        assert_eq!(cfg.sim.noise_sigma, 0.0);
        assert_eq!(cfg.sim.trials_per_point, 500);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Config::parse("sim.trials = 5\nsim.bogus = 1\n").unwrap_err();
        assert_eq!(err, Error::config(2, "unknown key `sim.bogus`"));
        let err = Config::parse("\n\nsim.trials = lots\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
        let err = Config::parse("sim.trials 5\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let err = Config::parse("sim.seed = 1\nsim.seed = 2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = Config::parse("codebook.t = 1,2\ncodebook.sizes = 1,2,3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
    }

    #[test]
    fn semantic_errors() {
        assert!(Config::parse("awgn.ebn0_db_list = 3,1\n").is_err());
        assert!(Config::parse("sim.levels = G\n").is_err());
        assert!(Config::parse("codebook.t = 3,1\n").is_err());
        assert!(Config::parse("baseline.t_map = 1,2\n").is_err());
        assert!(Config::parse("sim.workers = 0\n").is_err());
    }

    #[test]
    fn report_levels_for_other_layouts() {
        assert_eq!(default_report_levels(1), vec![1]);
        assert_eq!(default_report_levels(2), vec![1, 2]);
        assert_eq!(default_report_levels(3), vec![1, 2, 3]);
    }
}
