//! Tag-free nearest-group decoding.
//!
//! For a hard-decision received word `r` the decoder computes, for every
//! level `x`, the distance `d_x = min_{c in C_x} d(r, c)`, picks the level
//! with the smallest `d_x`, and then the closest codeword inside that level.
//! The codeword's position in its group is the recovered message index.
//!
//! Ties between levels resolve to the most important tied level; ties inside
//! a group resolve to the lowest list index. When the error weight is within
//! the transmitted level's correction radius and the levels are separated by
//! `d_AB >= 2 t_A + 1`, no tie can occur (see [`theorem1_check`]).

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codebook::{level_label, verify_codebook, LayeredCodebook};
use crate::codeword::{check_len, Codeword};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// Estimated 1-based level `ŝ`.
    pub level: usize,
    /// Estimated codeword `ĉ`, a member of `C_ŝ`.
    pub codeword: Codeword,
    /// Index of `ĉ` within its group, i.e. the recovered message.
    pub message_index: usize,
    /// `d_x` for every level, least important first.
    pub group_distances: Vec<usize>,
    /// Two or more levels shared the smallest distance.
    pub tie: bool,
}

impl DecodeResult {
    pub fn distance(&self) -> usize {
        self.group_distances[self.level - 1]
    }
}

/// Smallest distance from `r` to `group` and the first index attaining it.
pub fn group_min_distance(r: &Codeword, group: &[Codeword]) -> Result<(usize, usize)> {
    let first = group.first().ok_or(Error::EmptyGroup)?;
    check_len(r, first)?;
    Ok(scan_group(r, group))
}

#[inline]
fn scan_group(r: &Codeword, group: &[Codeword]) -> (usize, usize) {
    let mut best = (usize::MAX, 0);
    for (i, c) in group.iter().enumerate() {
        let d = r.distance_unchecked(c);
        if d < best.0 {
            best = (d, i);
            if d == 0 {
                break;
            }
        }
    }
    best
}

/// Nearest-group classification followed by in-group estimation.
pub fn classify(r: &Codeword, cb: &LayeredCodebook) -> Result<DecodeResult> {
    if r.len() != cb.blocklength() {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: cb.blocklength(),
        });
    }
    let scans: Vec<(usize, usize)> = cb.groups().iter().map(|g| scan_group(r, g)).collect();
    let min = scans.iter().map(|s| s.0).min().expect("codebook has at least one level");
    let tied = scans.iter().filter(|s| s.0 == min).count();
    // Most important tied level wins.
    let level = scans.iter().rposition(|s| s.0 == min).expect("minimum exists") + 1;
    let message_index = scans[level - 1].1;
    let group_distances = scans.into_iter().map(|s| s.0).collect();
    Ok(DecodeResult {
        level,
        codeword: cb.group(level)[message_index],
        message_index,
        group_distances,
        tie: tied > 1,
    })
}

/// First failure found by a theorem check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub level: usize,
    pub index: usize,
    pub error: Codeword,
    pub weight: usize,
    pub decoded_level: usize,
    pub decoded_codeword: Codeword,
    pub reason: String,
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "level {}[{}] with error {} (w={}) decoded to level {} word {}: {}",
            level_label(self.level),
            self.index,
            self.error,
            self.weight,
            level_label(self.decoded_level),
            self.decoded_codeword,
            self.reason
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TheoremReport {
    /// Error patterns decoded.
    pub checked: u64,
    /// Decodes that selected the wrong level (only meaningful for the
    /// out-of-radius check).
    pub misclassified: u64,
    pub counterexample: Option<Counterexample>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Calls `f` with every `n`-bit word of weight `w` (Gosper's hack).
fn for_each_weight(n: usize, w: usize, mut f: impl FnMut(u128) -> bool) {
    if w > n {
        return;
    }
    if w == 0 {
        f(0);
        return;
    }
    let limit: u128 = if n == 128 { u128::MAX } else { 1u128 << n };
    let mut v: u128 = if w == 128 { u128::MAX } else { (1u128 << w) - 1 };
    loop {
        if !f(v) {
            return;
        }
        let c = v & v.wrapping_neg();
        let Some(r) = v.checked_add(c) else { return };
        v = (((r ^ v) >> 2) / c) | r;
        if n < 128 && v >= limit {
            return;
        }
    }
}

fn theorem1_precondition(cb: &LayeredCodebook) -> Result<()> {
    for a in 1..=cb.levels() {
        let need = 2 * cb.target_t(a) + 1;
        for b in (1..=cb.levels()).filter(|&b| b != a) {
            let d = cb.inter_distance(a, b);
            if d < need {
                return Err(Error::Precondition(format!(
                    "d_{}{} = {d} < 2*t_{}+1 = {need}",
                    level_label(a),
                    level_label(b),
                    level_label(a)
                )));
            }
        }
    }
    Ok(())
}

fn check_within_radius(
    cb: &LayeredCodebook,
    level: usize,
    index: usize,
    error: Codeword,
    report: &mut TheoremReport,
) -> bool {
    let sent = cb.group(level)[index];
    let r = sent.xor_unchecked(&error);
    let out = classify(&r, cb).expect("lengths match");
    report.checked += 1;
    if out.level != level || out.codeword != sent {
        report.counterexample = Some(Counterexample {
            level,
            index,
            error,
            weight: error.weight(),
            decoded_level: out.level,
            decoded_codeword: out.codeword,
            reason: "error weight within t_A was not decoded to the transmitted codeword".into(),
        });
        return false;
    }
    true
}

/// Exhaustively decodes every codeword plus every error pattern of weight
/// `w <= min(t_A, max_weight_exhaustive)` and asserts the transmitted level
/// and codeword are recovered.
///
/// Requires `d_AB >= 2 t_A + 1` for every pair of levels.
pub fn theorem1_check(cb: &LayeredCodebook, max_weight_exhaustive: usize) -> Result<TheoremReport> {
    theorem1_check_sampled(cb, max_weight_exhaustive, 0, 0)
}

/// Like [`theorem1_check`], and additionally draws `samples` random error
/// patterns for every level and every weight in
/// `(max_weight_exhaustive, t_A]`.
pub fn theorem1_check_sampled(
    cb: &LayeredCodebook,
    max_weight_exhaustive: usize,
    samples: u64,
    seed: u64,
) -> Result<TheoremReport> {
    theorem1_precondition(cb)?;
    let n = cb.blocklength();
    let mut report = TheoremReport::default();
    for level in 1..=cb.levels() {
        let t = cb.target_t(level);
        for index in 0..cb.group(level).len() {
            for w in 0..=t.min(max_weight_exhaustive).min(n) {
                let mut ok = true;
                for_each_weight(n, w, |e| {
                    let error = Codeword::new(e, n).expect("pattern fits");
                    ok = check_within_radius(cb, level, index, error, &mut report);
                    ok
                });
                if !ok {
                    return Ok(report);
                }
            }
        }
        if samples > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(level as u64);
            for w in max_weight_exhaustive + 1..=t.min(n) {
                for _ in 0..samples {
                    let index = rng.random_range(0..cb.group(level).len());
                    let error = random_error(&mut rng, n, w);
                    if !check_within_radius(cb, level, index, error, &mut report) {
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Uniformly random `n`-bit error pattern of weight exactly `w`.
pub fn random_error<R: Rng + ?Sized>(rng: &mut R, n: usize, w: usize) -> Codeword {
    let mut e = Codeword::zeros(n).expect("valid blocklength");
    for pos in sample(rng, n, w) {
        e.flip(pos);
    }
    e
}

/// Checks a single out-of-radius decode against the false-selection bound.
/// Returns the reason if the decode is a violation.
pub fn theorem2_violation(
    cb: &LayeredCodebook,
    sent_level: usize,
    weight: usize,
    decoded_level: usize,
) -> Option<String> {
    if decoded_level == sent_level {
        return None;
    }
    let t_hat = cb.target_t(decoded_level);
    let d = cb.inter_distance(sent_level, decoded_level);
    if d > 2 * t_hat && t_hat >= weight {
        return Some(format!(
            "selected protected level {} (t={t_hat} >= w={weight}, d={d} >= {})",
            level_label(decoded_level),
            2 * t_hat + 1
        ));
    }
    if t_hat >= weight {
        return Some(format!(
            "misclassified to level {} with t={t_hat} >= w={weight}",
            level_label(decoded_level)
        ));
    }
    None
}

/// Monte Carlo check of the out-of-radius behaviour: transmit random
/// codewords with error weight `w` drawn uniformly from `(t_A, t_A + 3]`,
/// and whenever a wrong level `ŝ` is selected assert `t_ŝ < w` and that `ŝ`
/// is not a level with `d_Aŝ >= 2 t_ŝ + 1` and `t_ŝ >= w`.
///
/// The codebook must pass [`verify_codebook`].
pub fn theorem2_check(cb: &LayeredCodebook, trials: u64, seed: u64) -> Result<TheoremReport> {
    let verification = verify_codebook(cb);
    if !verification.passed() {
        return Err(Error::Precondition(format!(
            "codebook fails verification: {}",
            verification
                .violations
                .first()
                .map(ToString::to_string)
                .unwrap_or_else(|| "metadata mismatch".into())
        )));
    }
    let n = cb.blocklength();
    let m = cb.levels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = TheoremReport::default();
    for _ in 0..trials {
        let level = rng.random_range(1..=m);
        let t = cb.target_t(level);
        if t + 1 > n {
            continue;
        }
        let w = rng.random_range(t + 1..=(t + 3).min(n));
        let index = rng.random_range(0..cb.group(level).len());
        let error = random_error(&mut rng, n, w);
        let sent = cb.group(level)[index];
        let out = classify(&sent.xor_unchecked(&error), cb)?;
        report.checked += 1;
        if out.level != level {
            report.misclassified += 1;
            if let Some(reason) = theorem2_violation(cb, level, w, out.level) {
                report.counterexample = Some(Counterexample {
                    level,
                    index,
                    error,
                    weight: w,
                    decoded_level: out.level,
                    decoded_codeword: out.codeword,
                    reason,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<Codeword> {
        ws.iter().map(|w| w.parse().unwrap()).collect()
    }

    fn cw(s: &str) -> Codeword {
        s.parse().unwrap()
    }

    fn pair_book(t: (usize, usize)) -> LayeredCodebook {
        LayeredCodebook::new(7, vec![(t.0, words(&["0000000"])), (t.1, words(&["1111111"]))])
            .unwrap()
    }

    #[test]
    fn group_min_distance_examples() {
        let g = words(&["0000", "1111"]);
        assert_eq!(group_min_distance(&cw("0001"), &g), Ok((1, 0)));
        assert_eq!(group_min_distance(&cw("0000"), &words(&["0000"])), Ok((0, 0)));
        assert_eq!(group_min_distance(&cw("0110"), &g), Ok((2, 0)));
        assert_eq!(group_min_distance(&cw("0110"), &[]), Err(Error::EmptyGroup));
    }

    #[test]
    fn classify_examples() {
        let cb = pair_book((3, 3));
        let out = classify(&cw("0000011"), &cb).unwrap();
        assert_eq!(out.level, 1);
        assert_eq!(out.codeword, cw("0000000"));
        assert_eq!(out.group_distances, vec![2, 5]);
        assert!(!out.tie);

        let out = classify(&cw("1110111"), &cb).unwrap();
        assert_eq!((out.level, out.codeword), (2, cw("1111111")));
    }

    #[test]
    fn level_ties_go_to_the_more_important_level() {
        let cb = LayeredCodebook::new(4, vec![(0, words(&["0000"])), (0, words(&["1111"]))]).unwrap();
        let out = classify(&cw("0011"), &cb).unwrap();
        assert_eq!(out.level, 2);
        assert!(out.tie);
        assert_eq!(out.group_distances, vec![2, 2]);
    }

    #[test]
    fn tie_flag_cleared_by_closer_level() {
        let cb = LayeredCodebook::new(
            6,
            vec![
                (0, words(&["000000"])),
                (0, words(&["111000"])),
                (0, words(&["000111"])),
            ],
        )
        .unwrap();
        // Distances (2, 5, 1): no tie at the minimum.
        let out = classify(&cw("000011"), &cb).unwrap();
        assert_eq!(out.level, 3);
        assert!(!out.tie);
    }

    #[test]
    fn classify_rejects_wrong_length() {
        assert!(classify(&cw("000"), &pair_book((1, 1))).is_err());
    }

    #[test]
    fn weight_enumeration_counts() {
        let binom = |n: u64, k: u64| (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
        for n in [1usize, 5, 7, 12] {
            for w in 0..=n {
                let mut count = 0u64;
                for_each_weight(n, w, |e| {
                    assert_eq!(e.count_ones() as usize, w);
                    assert!(e < 1u128 << n);
                    count += 1;
                    true
                });
                assert_eq!(count, binom(n as u64, w as u64), "n={n} w={w}");
            }
        }
        let mut count = 0;
        for_each_weight(128, 1, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 128);
    }

    #[test]
    fn theorem1_on_complementary_pair() {
        let report = theorem1_check(&pair_book((3, 3)), 3).unwrap();
        assert!(report.passed());
        // 1 + 7 + 21 + 35 = 64 patterns per codeword.
        assert_eq!(report.checked, 128);
    }

    #[test]
    fn theorem1_precondition_names_distance() {
        let cb = LayeredCodebook::new(
            7,
            vec![(3, words(&["0000000"])), (3, words(&["0011111"]))],
        )
        .unwrap();
        match theorem1_check(&cb, 3) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("5 < 2*t_A+1 = 7"), "{msg}"),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn theorem2_weight_two_on_pair() {
        // t = (1, 3): a weight-2 error on level A cannot land in level B
        // because t_B = 3 >= 2 and d_AB = 7 >= 7.
        let cb = pair_book((1, 3));
        let sent = cb.group(1)[0];
        let mut count = 0;
        for_each_weight(7, 2, |e| {
            let error = Codeword::new(e, 7).unwrap();
            let out = classify(&sent.xor_unchecked(&error), &cb).unwrap();
            assert_eq!(out.level, 1, "error {error}");
            assert!(theorem2_violation(&cb, 1, 2, out.level).is_none());
            count += 1;
            true
        });
        assert_eq!(count, 21);
        let report = theorem2_check(&cb, 2_000, 5).unwrap();
        assert!(report.passed(), "{:?}", report.counterexample);
    }

    #[test]
    fn zero_error_is_identity() {
        let cb = pair_book((1, 3));
        for level in 1..=2 {
            for (i, c) in cb.group(level).iter().enumerate() {
                let out = classify(c, &cb).unwrap();
                assert_eq!((out.level, out.message_index, out.distance()), (level, i, 0));
            }
        }
    }

    #[test]
    fn violation_detector_flags_protected_levels() {
        let cb = pair_book((1, 3));
        assert!(theorem2_violation(&cb, 1, 2, 2).is_some());
        assert!(theorem2_violation(&cb, 2, 4, 1).is_none());
        assert!(theorem2_violation(&cb, 1, 2, 1).is_none());
    }
}
