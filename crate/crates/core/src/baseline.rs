//! Tag-based comparison scheme: a protection-level indicator followed by a
//! BCH(31, k) codeword.
//!
//! The receiver first decodes the 14-bit indicator by minimum distance over
//! the indicator book (ties to the more important level), then runs the BCH
//! decoder of the level it *believes* was sent. A corrupted indicator
//! therefore misroutes the payload to the wrong decoder.

use crate::bch::{BchCode, BCH_LENGTH};
use crate::codebook::{level_label, message_bits, LayeredCodebook};
use crate::codeword::Codeword;
use crate::construct::{greedy_code, CandidatePolicy};
use crate::error::{Error, Result};

pub const INDICATOR_LENGTH: usize = 14;
pub const BASELINE_BLOCKLENGTH: usize = INDICATOR_LENGTH + BCH_LENGTH;

/// One indicator word per level, chosen to maximise the minimum pairwise
/// distance by the same greedy search used for codebooks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorBook {
    words: Vec<Codeword>,
    min_distance: usize,
}

impl IndicatorBook {
    /// Tries `d = length, length-1, ...` and keeps the first distance for
    /// which the seeded greedy search finds `levels` words.
    pub fn search(levels: usize, length: usize, seed: u64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Invalid("indicator book needs at least one level".into()));
        }
        if levels == 1 {
            return Self::from_words(vec![Codeword::zeros(length)?]);
        }
        let budget = (levels as u64) << length.min(40);
        for d in (1..=length).rev() {
            if let Some(words) = greedy_code(length, levels, d, CandidatePolicy::SeededRandom, seed, budget)? {
                return Self::from_words(words);
            }
        }
        Err(Error::Invalid(format!(
            "cannot place {levels} distinct indicator words of length {length}"
        )))
    }

    pub fn from_words(words: Vec<Codeword>) -> Result<Self> {
        let min_distance = match crate::codebook::intra_group_dmin(&words)? {
            Some(0) => return Err(Error::Invalid("indicator words must be distinct".into())),
            Some(d) => d,
            None => words[0].len(),
        };
        Ok(Self { words, min_distance })
    }

    pub fn words(&self) -> &[Codeword] {
        &self.words
    }

    /// Indicator of a 1-based level.
    pub fn word(&self, level: usize) -> Codeword {
        self.words[level - 1]
    }

    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    pub fn length(&self) -> usize {
        self.words[0].len()
    }

    /// Nearest indicator: `(level, distance, tie)`, ties to the higher level.
    pub fn decode(&self, r: &Codeword) -> (usize, usize, bool) {
        let mut best = (usize::MAX, 0usize);
        let mut ties = 0;
        for (i, w) in self.words.iter().enumerate() {
            let d = r.distance_unchecked(w);
            if d < best.0 {
                best = (d, i + 1);
                ties = 1;
            } else if d == best.0 {
                best.1 = i + 1;
                ties += 1;
            }
        }
        (best.1, best.0, ties > 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineDecoded {
    /// Level selected from the indicator.
    pub level: usize,
    /// Decoded BCH message of the selected level, read as a message index.
    pub message_index: usize,
    /// Distance from the received indicator to the selected indicator word.
    pub indicator_distance: usize,
    /// The indicator was equidistant from two or more words.
    pub tie: bool,
    /// The BCH decoder flagged an uncorrectable pattern.
    pub bch_failed: bool,
}

impl BaselineDecoded {
    /// Received indicator matched a book word exactly.
    pub fn indicator_exact(&self) -> bool {
        self.indicator_distance == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineCodebook {
    indicators: IndicatorBook,
    codes: Vec<BchCode>,
    group_sizes: Vec<usize>,
}

impl BaselineCodebook {
    /// Levels from per-level BCH capabilities `t_map` and message counts.
    pub fn new(t_map: &[usize], group_sizes: &[usize], indicator_seed: u64) -> Result<Self> {
        if t_map.len() != group_sizes.len() {
            return Err(Error::Invalid(format!(
                "t map has {} levels but {} group sizes were given",
                t_map.len(),
                group_sizes.len()
            )));
        }
        let mut codes = Vec::with_capacity(t_map.len());
        for (i, (&t, &size)) in t_map.iter().zip(group_sizes).enumerate() {
            let code = BchCode::new(t)?;
            if size == 0 || (code.k() < usize::BITS as usize && size > 1usize << code.k()) {
                return Err(Error::Invalid(format!(
                    "level {} needs {size} messages but BCH(31,{}) carries {} bits",
                    level_label(i + 1),
                    code.k(),
                    code.k()
                )));
            }
            codes.push(code);
        }
        let indicators = IndicatorBook::search(t_map.len(), INDICATOR_LENGTH, indicator_seed)?;
        Ok(Self {
            indicators,
            codes,
            group_sizes: group_sizes.to_vec(),
        })
    }

    /// Same levels, targets and group sizes as a layered codebook.
    pub fn matching(cb: &LayeredCodebook, indicator_seed: u64) -> Result<Self> {
        let t_map: Vec<usize> = cb.level_specs().iter().map(|s| s.target_t).collect();
        let sizes: Vec<usize> = cb.level_specs().iter().map(|s| s.group_size).collect();
        Self::new(&t_map, &sizes, indicator_seed)
    }

    pub fn levels(&self) -> usize {
        self.codes.len()
    }

    pub fn indicators(&self) -> &IndicatorBook {
        &self.indicators
    }

    pub fn code(&self, level: usize) -> &BchCode {
        &self.codes[level - 1]
    }

    pub fn group_size(&self, level: usize) -> usize {
        self.group_sizes[level - 1]
    }

    pub fn blocklength(&self) -> usize {
        self.indicators.length() + BCH_LENGTH
    }

    /// `indicator(level) || BCH(message index zero-padded to k)`.
    pub fn encode(&self, level: usize, index: usize) -> Result<Codeword> {
        if level == 0 || level > self.levels() {
            return Err(Error::LevelOutOfRange {
                level,
                levels: self.levels(),
            });
        }
        let size = self.group_size(level);
        if index >= size {
            return Err(Error::IndexOutOfRange { index, size });
        }
        let payload = self.code(level).encode_value(index as u32)?;
        self.indicators
            .word(level)
            .concat(&Codeword::new(payload as u128, BCH_LENGTH)?)
    }

    pub fn decode(&self, r: &Codeword) -> Result<BaselineDecoded> {
        if r.len() != self.blocklength() {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: self.blocklength(),
            });
        }
        let (indicator, payload) = r.split_at(self.indicators.length())?;
        let (level, indicator_distance, tie) = self.indicators.decode(&indicator);
        let decoded = self.code(level).decode_value(payload.value() as u32);
        Ok(BaselineDecoded {
            level,
            message_index: decoded.message as usize,
            indicator_distance,
            tie,
            bch_failed: decoded.failed(),
        })
    }

    /// Message bits carried per block at `level`.
    pub fn message_bits(&self, level: usize) -> usize {
        message_bits(self.group_size(level))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> BaselineCodebook {
        BaselineCodebook::new(&[1, 1, 2, 3, 5, 7], &[8; 6], 7).unwrap()
    }

    #[test]
    fn indicator_book_is_well_separated() {
        let book = reference();
        let ind = book.indicators();
        assert_eq!(ind.words().len(), 6);
        assert!(ind.min_distance() >= 5, "d_ind = {}", ind.min_distance());
        assert_eq!(book.blocklength(), 45);
    }

    #[test]
    fn noiseless_round_trip() {
        let book = reference();
        for level in 1..=6 {
            for index in 0..8 {
                let c = book.encode(level, index).unwrap();
                assert_eq!(c.len(), 45);
                let out = book.decode(&c).unwrap();
                assert_eq!((out.level, out.message_index), (level, index));
                assert!(out.indicator_exact() && !out.bch_failed && !out.tie);
            }
        }
    }

    #[test]
    fn zero_message_payload_is_zero() {
        let book = reference();
        let c = book.encode(3, 0).unwrap();
        let (ind, payload) = c.split_at(14).unwrap();
        assert_eq!(ind, book.indicators().word(3));
        assert_eq!(payload.weight(), 0);
    }

    #[test]
    fn encode_rejects_bad_arguments() {
        let book = reference();
        assert!(matches!(book.encode(0, 0), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(book.encode(7, 0), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(book.encode(1, 8), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn corrupted_indicator_misroutes() {
        let book = reference();
        let ind = book.indicators();
        // Move the level-D indicator onto the level-F word by flipping the
        // positions where they differ; the receiver then uses the t=7 code.
        let (from, to) = (4, 6);
        let diff = ind.word(from).xor(&ind.word(to)).unwrap();
        let c = book.encode(from, 5).unwrap();
        let mut r = c;
        for i in 0..INDICATOR_LENGTH {
            if diff.bit(i) {
                r.flip(i);
            }
        }
        let out = book.decode(&r).unwrap();
        assert_eq!(out.level, to);
        // Flipping only up to half the distance keeps the right level.
        let mut r = c;
        let mut flipped = 0;
        for i in 0..INDICATOR_LENGTH {
            if diff.bit(i) && 2 * (flipped + 1) < diff.weight() {
                r.flip(i);
                flipped += 1;
            }
        }
        assert_eq!(book.decode(&r).unwrap().level, from);
    }

    #[test]
    fn payload_errors_within_t_are_corrected() {
        let book = reference();
        for level in 1..=6 {
            let t = book.code(level).t();
            let c = book.encode(level, 6).unwrap();
            let mut r = c;
            for k in 0..t {
                r.flip(INDICATOR_LENGTH + 3 * k);
            }
            let out = book.decode(&r).unwrap();
            assert_eq!((out.level, out.message_index), (level, 6));
        }
    }

    #[test]
    fn mismatched_maps_are_rejected() {
        assert!(BaselineCodebook::new(&[1, 2], &[8], 0).is_err());
        assert!(BaselineCodebook::new(&[4], &[8], 0).is_err());
        assert!(BaselineCodebook::new(&[7], &[65], 0).is_err());
    }

    #[test]
    fn indicator_ties_go_up() {
        let book = IndicatorBook::from_words(vec![
            "0000".parse().unwrap(),
            "1111".parse().unwrap(),
        ])
        .unwrap();
        assert_eq!(book.decode(&"0011".parse().unwrap()), (2, 2, true));
        assert_eq!(book.decode(&"0001".parse().unwrap()), (1, 1, false));
    }
}
