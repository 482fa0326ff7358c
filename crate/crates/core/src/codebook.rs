//! Layered codebooks and their distance structure.
//!
//! A layered codebook is an ordered list of codeword groups `C_1..C_m`, one
//! per importance level, where a larger level index means a more important
//! message class. Two quantities govern its behaviour:
//!
//! * the intra-group minimum distance `d_min(C_x)`, which fixes the
//!   correction radius `t_x = floor((d_min - 1) / 2)` of level `x`;
//! * the inter-level distance `d_pq`, the smallest distance between any word
//!   of `C_p` and any word of `C_q`, which decides whether the receiver can
//!   tell the levels apart without a tag.
//!
//! [`verify_codebook`] recomputes both from scratch and reports every
//! violated constraint together with a witness pair.

use std::fmt;

use crate::codeword::{check_len, Codeword};
use crate::error::{Error, Result};

/// Design parameters of one importance level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelSpec {
    /// 1-based level index; larger is more important.
    pub level: usize,
    /// Target correction radius `t_x`.
    pub target_t: usize,
    /// Number of messages `N_x` in the level.
    pub group_size: usize,
}

impl LevelSpec {
    /// Smallest intra-group distance that guarantees `target_t` corrections.
    pub fn required_distance(&self) -> usize {
        2 * self.target_t + 1
    }
}

/// Checks the level-spec invariants: 1-based consecutive indices, non-zero
/// group sizes and non-decreasing targets.
pub fn validate_level_specs(specs: &[LevelSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Invalid("at least one level is required".into()));
    }
    for (i, spec) in specs.iter().enumerate() {
        if spec.level != i + 1 {
            return Err(Error::Invalid(format!(
                "level specs must be numbered 1..m in order, found {} at position {}",
                spec.level,
                i + 1
            )));
        }
        if spec.group_size == 0 {
            return Err(Error::Invalid(format!(
                "level {} has an empty group",
                level_label(spec.level)
            )));
        }
    }
    for pair in specs.windows(2) {
        if pair[1].target_t < pair[0].target_t {
            return Err(Error::Invalid(format!(
                "target t must be non-decreasing with importance: level {} has t={} but level {} has t={}",
                level_label(pair[0].level),
                pair[0].target_t,
                level_label(pair[1].level),
                pair[1].target_t
            )));
        }
    }
    Ok(())
}

/// Letter name of a 1-based level (`1 -> "A"`), falling back to `L<n>` past `Z`.
pub fn level_label(level: usize) -> String {
    if (1..=26).contains(&level) {
        char::from(b'A' + (level - 1) as u8).to_string()
    } else {
        format!("L{level}")
    }
}

/// Parses a level letter (`"D"`) or a 1-based number (`"4"`).
pub fn parse_level_label(s: &str) -> Option<usize> {
    let s = s.trim();
    if let Ok(n) = s.parse::<usize>() {
        return (n >= 1).then_some(n);
    }
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_alphabetic() => {
            Some((c.to_ascii_uppercase() as u8 - b'A') as usize + 1)
        }
        _ => s.strip_prefix('L').and_then(|n| n.parse().ok()),
    }
}

/// Bits needed to index a group of `group_size` messages (at least one).
pub fn message_bits(group_size: usize) -> usize {
    let bits = usize::BITS - group_size.saturating_sub(1).leading_zeros();
    (bits as usize).max(1)
}

/// `floor((d_min - 1) / 2)`.
pub fn correction_radius(d_min: usize) -> Result<usize> {
    if d_min == 0 {
        return Err(Error::ZeroDistance);
    }
    Ok((d_min - 1) / 2)
}

/// Minimum pairwise distance inside a group; `None` for a singleton group.
pub fn intra_group_dmin(group: &[Codeword]) -> Result<Option<usize>> {
    let first = group.first().ok_or(Error::EmptyGroup)?;
    for w in group {
        check_len(first, w)?;
    }
    let mut best: Option<usize> = None;
    for (i, u) in group.iter().enumerate() {
        for v in &group[i + 1..] {
            let d = u.distance_unchecked(v);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    Ok(best)
}

/// Smallest distance between a word of `group_p` and a word of `group_q`.
pub fn inter_level_distance(group_p: &[Codeword], group_q: &[Codeword]) -> Result<usize> {
    let first = group_p.first().ok_or(Error::EmptyGroup)?;
    if group_q.is_empty() {
        return Err(Error::EmptyGroup);
    }
    for w in group_p.iter().chain(group_q) {
        check_len(first, w)?;
    }
    Ok(cross_min(group_p, group_q).0)
}

fn cross_min(group_p: &[Codeword], group_q: &[Codeword]) -> (usize, usize, usize) {
    let mut best = (usize::MAX, 0, 0);
    for (i, u) in group_p.iter().enumerate() {
        for (j, v) in group_q.iter().enumerate() {
            let d = u.distance_unchecked(v);
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    best
}

fn intra_min(group: &[Codeword]) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for (i, u) in group.iter().enumerate() {
        for (j, v) in group.iter().enumerate().skip(i + 1) {
            let d = u.distance_unchecked(v);
            if best.map_or(true, |b| d < b.0) {
                best = Some((d, i, j));
            }
        }
    }
    best
}

/// An ordered list of codeword groups with their distance metadata.
///
/// The type only guarantees structural well-formedness (non-empty groups,
/// one blocklength). Distance constraints are checked by [`verify_codebook`],
/// so a corrupted codebook can still be loaded and diagnosed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredCodebook {
    blocklength: usize,
    groups: Vec<Vec<Codeword>>,
    level_specs: Vec<LevelSpec>,
    intra_dmin: Vec<Option<usize>>,
    inter_d: Vec<Vec<usize>>,
}

impl LayeredCodebook {
    /// Assembles a codebook from `(target_t, group)` pairs ordered from the
    /// least to the most important level.
    pub fn new(blocklength: usize, levels: Vec<(usize, Vec<Codeword>)>) -> Result<Self> {
        if blocklength == 0 || blocklength > crate::codeword::MAX_BLOCKLENGTH {
            return Err(Error::InvalidBlocklength(blocklength));
        }
        if levels.is_empty() {
            return Err(Error::Invalid("a codebook needs at least one level".into()));
        }
        let mut level_specs = Vec::with_capacity(levels.len());
        let mut groups = Vec::with_capacity(levels.len());
        for (i, (target_t, group)) in levels.into_iter().enumerate() {
            if group.is_empty() {
                return Err(Error::EmptyGroup);
            }
            for w in &group {
                if w.len() != blocklength {
                    return Err(Error::LengthMismatch {
                        left: blocklength,
                        right: w.len(),
                    });
                }
            }
            level_specs.push(LevelSpec {
                level: i + 1,
                target_t,
                group_size: group.len(),
            });
            groups.push(group);
        }
        let m = groups.len();
        let intra_dmin = groups.iter().map(|g| intra_min(g).map(|b| b.0)).collect();
        let mut inter_d = vec![vec![0; m]; m];
        for p in 0..m {
            for q in p + 1..m {
                let d = cross_min(&groups[p], &groups[q]).0;
                inter_d[p][q] = d;
                inter_d[q][p] = d;
            }
        }
        Ok(Self {
            blocklength,
            groups,
            level_specs,
            intra_dmin,
            inter_d,
        })
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    /// Number of levels `m`.
    pub fn levels(&self) -> usize {
        self.groups.len()
    }

    pub fn level_specs(&self) -> &[LevelSpec] {
        &self.level_specs
    }

    pub fn groups(&self) -> &[Vec<Codeword>] {
        &self.groups
    }

    /// Group `C_level` (1-based).
    pub fn group(&self, level: usize) -> &[Codeword] {
        &self.groups[level - 1]
    }

    pub fn target_t(&self, level: usize) -> usize {
        self.level_specs[level - 1].target_t
    }

    /// Stored `d_min(C_level)`; `None` for singleton groups.
    pub fn intra_dmin(&self, level: usize) -> Option<usize> {
        self.intra_dmin[level - 1]
    }

    /// Stored `d_pq` for two distinct 1-based levels.
    pub fn inter_distance(&self, p: usize, q: usize) -> usize {
        assert_ne!(p, q, "inter-level distance needs two distinct levels");
        self.inter_d[p - 1][q - 1]
    }

    /// Distance floor a level imposes on its neighbours under the strong
    /// separation rule: its actual `d_min`, but never below `2 t + 1`.
    /// A singleton group falls back to `2 t + 1`.
    pub fn separation_floor(&self, level: usize) -> usize {
        let design = self.level_specs[level - 1].required_distance();
        self.intra_dmin(level).map_or(design, |d| d.max(design))
    }

    pub fn total_codewords(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn codeword(&self, level: usize, index: usize) -> Result<Codeword> {
        if level == 0 || level > self.levels() {
            return Err(Error::LevelOutOfRange {
                level,
                levels: self.levels(),
            });
        }
        let group = self.group(level);
        group.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            size: group.len(),
        })
    }

    /// Returns `(level, index)` of a word if it belongs to the codebook.
    pub fn locate(&self, word: &Codeword) -> Option<(usize, usize)> {
        self.groups.iter().enumerate().find_map(|(x, g)| {
            g.iter().position(|w| w == word).map(|i| (x + 1, i))
        })
    }
}

/// Which rule a [`Violation`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// All codewords pairwise distinct across the whole codebook.
    Distinct,
    /// `t_1 <= t_2 <= ... <= t_m`.
    TargetOrder,
    /// `d_min(C_x) >= 2 t_x + 1`.
    IntraDistance,
    /// Weak separation: `d_pq >= 2 max(t_p, t_q) + 1`.
    InterWeak,
    /// Strong separation: `d_pq >= max(d_min(C_p), d_min(C_q))`.
    InterStrong,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Distinct => "distinct codewords",
            Rule::TargetOrder => "non-decreasing t",
            Rule::IntraDistance => "intra-level distance d_min >= 2t+1",
            Rule::InterWeak => "inter-level distance d_pq >= 2max(t_p,t_q)+1",
            Rule::InterStrong => "inter-level distance d_pq >= max(d_min(C_p),d_min(C_q))",
        })
    }
}

/// One failed constraint with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    /// 1-based levels involved (equal for intra-level rules).
    pub levels: (usize, usize),
    /// Offending codeword pair as `(index in first level, index in second)`.
    pub pair: Option<(usize, usize)>,
    pub words: Option<(Codeword, Codeword)>,
    pub distance: usize,
    pub required: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q) = self.levels;
        match self.rule {
            Rule::TargetOrder => write!(
                f,
                "{}: level {} has t={} above level {} with t={}",
                self.rule,
                level_label(p),
                self.distance,
                level_label(q),
                self.required
            ),
            _ => {
                write!(
                    f,
                    "{}: levels {}/{} distance {} < required {}",
                    self.rule,
                    level_label(p),
                    level_label(q),
                    self.distance,
                    self.required
                )?;
                if let (Some((i, j)), Some((u, v))) = (self.pair, self.words) {
                    write!(
                        f,
                        " (codeword {}[{}]={} vs {}[{}]={})",
                        level_label(p),
                        i,
                        u,
                        level_label(q),
                        j,
                        v
                    )?;
                }
                Ok(())
            }
        }
    }
}

/// Recomputed distance structure plus every violated constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub intra_dmin: Vec<Option<usize>>,
    pub inter_d: Vec<Vec<usize>>,
    /// Stored metadata disagreed with the recomputation.
    pub metadata_mismatch: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && !self.metadata_mismatch
    }

    pub fn rule_passed(&self, rule: Rule) -> bool {
        self.violations.iter().all(|v| v.rule != rule)
    }

    pub fn weak_rule_passed(&self) -> bool {
        self.rule_passed(Rule::InterWeak)
    }

    pub fn strong_rule_passed(&self) -> bool {
        self.rule_passed(Rule::InterStrong)
    }

    pub fn violations_of(&self, rule: Rule) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.rule == rule)
    }
}

/// Recomputes all distances of `cb` and checks every codebook constraint.
///
/// The weak and strong separation rules are reported separately. In the
/// strong rule a singleton group contributes its design distance `2t+1`, as
/// does a group whose measured `d_min` is below it, so the strong rule
/// always implies the weak one.
pub fn verify_codebook(cb: &LayeredCodebook) -> VerificationReport {
    let m = cb.levels();
    let specs = cb.level_specs();
    let mut violations = Vec::new();

    for pair in specs.windows(2) {
        if pair[1].target_t < pair[0].target_t {
            violations.push(Violation {
                rule: Rule::TargetOrder,
                levels: (pair[1].level, pair[0].level),
                pair: None,
                words: None,
                distance: pair[1].target_t,
                required: pair[0].target_t,
            });
        }
    }

    let intra: Vec<Option<(usize, usize, usize)>> =
        cb.groups().iter().map(|g| intra_min(g)).collect();
    let intra_dmin: Vec<Option<usize>> = intra.iter().map(|b| b.map(|b| b.0)).collect();

    for (x, best) in intra.iter().enumerate() {
        let group = cb.group(x + 1);
        // Duplicates within a group.
        for (i, u) in group.iter().enumerate() {
            for (j, v) in group.iter().enumerate().skip(i + 1) {
                if u == v {
                    violations.push(Violation {
                        rule: Rule::Distinct,
                        levels: (x + 1, x + 1),
                        pair: Some((i, j)),
                        words: Some((*u, *v)),
                        distance: 0,
                        required: 1,
                    });
                }
            }
        }
        if let Some((d, i, j)) = *best {
            let required = specs[x].required_distance();
            if d < required {
                violations.push(Violation {
                    rule: Rule::IntraDistance,
                    levels: (x + 1, x + 1),
                    pair: Some((i, j)),
                    words: Some((group[i], group[j])),
                    distance: d,
                    required,
                });
            }
        }
    }

    let floor = |x: usize| {
        let design = specs[x].required_distance();
        intra_dmin[x].map_or(design, |d| d.max(design))
    };

    let mut inter_d = vec![vec![0; m]; m];
    for p in 0..m {
        for q in p + 1..m {
            let (gp, gq) = (cb.group(p + 1), cb.group(q + 1));
            let (d, i, j) = cross_min(gp, gq);
            inter_d[p][q] = d;
            inter_d[q][p] = d;
            let witness = Some((gp[i], gq[j]));
            if d == 0 {
                violations.push(Violation {
                    rule: Rule::Distinct,
                    levels: (p + 1, q + 1),
                    pair: Some((i, j)),
                    words: witness,
                    distance: 0,
                    required: 1,
                });
            }
            let weak = 2 * specs[p].target_t.max(specs[q].target_t) + 1;
            if d < weak {
                violations.push(Violation {
                    rule: Rule::InterWeak,
                    levels: (p + 1, q + 1),
                    pair: Some((i, j)),
                    words: witness,
                    distance: d,
                    required: weak,
                });
            }
            let strong = floor(p).max(floor(q));
            if d < strong {
                violations.push(Violation {
                    rule: Rule::InterStrong,
                    levels: (p + 1, q + 1),
                    pair: Some((i, j)),
                    words: witness,
                    distance: d,
                    required: strong,
                });
            }
        }
    }

    let metadata_mismatch = intra_dmin != cb.intra_dmin || inter_d != cb.inter_d;

    VerificationReport {
        intra_dmin,
        inter_d,
        metadata_mismatch,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<Codeword> {
        ws.iter().map(|w| w.parse().unwrap()).collect()
    }

    #[test]
    fn correction_radius_examples() {
        assert_eq!(correction_radius(3), Ok(1));
        assert_eq!(correction_radius(7), Ok(3));
        assert_eq!(correction_radius(4), Ok(1));
        assert_eq!(correction_radius(0), Err(Error::ZeroDistance));
        for t in 0..=10 {
            assert_eq!(correction_radius(2 * t + 1), Ok(t));
            assert_eq!(correction_radius(2 * t + 2), Ok(t));
        }
    }

    #[test]
    fn intra_examples() {
        assert_eq!(intra_group_dmin(&words(&["000", "111"])), Ok(Some(3)));
        assert_eq!(
            intra_group_dmin(&words(&["0000", "0011", "1100"])),
            Ok(Some(2))
        );
        assert_eq!(intra_group_dmin(&words(&["0000"])), Ok(None));
        assert_eq!(intra_group_dmin(&[]), Err(Error::EmptyGroup));
    }

    #[test]
    fn inter_examples() {
        assert_eq!(
            inter_level_distance(&words(&["000"]), &words(&["111"])),
            Ok(3)
        );
        assert_eq!(
            inter_level_distance(&words(&["0000000"]), &words(&["1111111"])),
            Ok(7)
        );
        assert_eq!(
            inter_level_distance(&words(&["0000", "1111"]), &words(&["0011"])),
            Ok(2)
        );
        assert_eq!(
            inter_level_distance(&words(&["0000"]), &[]),
            Err(Error::EmptyGroup)
        );
        assert!(matches!(
            inter_level_distance(&words(&["000"]), &words(&["0000"])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn verify_passes_complementary_pair() {
        let cb = LayeredCodebook::new(
            7,
            vec![(1, words(&["0000000"])), (1, words(&["1111111"]))],
        )
        .unwrap();
        let report = verify_codebook(&cb);
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.inter_d[0][1], 7);
    }

    #[test]
    fn verify_reports_close_levels() {
        let cb = LayeredCodebook::new(
            7,
            vec![(1, words(&["0000000"])), (1, words(&["0000001"]))],
        )
        .unwrap();
        let report = verify_codebook(&cb);
        assert!(!report.passed());
        assert!(!report.weak_rule_passed());
        let v = report.violations_of(Rule::InterWeak).next().unwrap();
        assert_eq!((v.distance, v.required), (1, 3));
        assert_eq!(v.pair, Some((0, 0)));
        assert!(v.to_string().contains("0000001"));
    }

    #[test]
    fn strong_rule_uses_actual_dmin() {
        // d_min(C_1) = 5 but the levels are only 4 apart: the weak rule
        // (needs 3) passes while the strong rule (needs 5) fails.
        let cb = LayeredCodebook::new(
            8,
            vec![
                (1, words(&["00000000", "00011111"])),
                (1, words(&["11110000"])),
            ],
        )
        .unwrap();
        let report = verify_codebook(&cb);
        assert!(report.weak_rule_passed());
        assert!(!report.strong_rule_passed());
    }

    #[test]
    fn verify_flags_duplicates_and_order() {
        let cb = LayeredCodebook::new(
            3,
            vec![(2, words(&["000", "000"])), (1, words(&["000"]))],
        )
        .unwrap();
        let report = verify_codebook(&cb);
        assert!(!report.rule_passed(Rule::Distinct));
        assert!(!report.rule_passed(Rule::TargetOrder));
    }

    #[test]
    fn level_labels_round_trip() {
        for level in 1..=30 {
            assert_eq!(parse_level_label(&level_label(level)), Some(level));
        }
        assert_eq!(parse_level_label("d"), Some(4));
        assert_eq!(parse_level_label("0"), None);
    }

    #[test]
    fn level_spec_validation() {
        let ok = [
            LevelSpec { level: 1, target_t: 1, group_size: 2 },
            LevelSpec { level: 2, target_t: 3, group_size: 1 },
        ];
        assert!(validate_level_specs(&ok).is_ok());
        let decreasing = [
            LevelSpec { level: 1, target_t: 3, group_size: 2 },
            LevelSpec { level: 2, target_t: 1, group_size: 1 },
        ];
        assert!(validate_level_specs(&decreasing).is_err());
        let empty = [LevelSpec { level: 1, target_t: 0, group_size: 0 }];
        assert!(validate_level_specs(&empty).is_err());
    }
}
