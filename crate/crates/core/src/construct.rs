//! Greedy construction of layered codebooks.
//!
//! Candidates are drawn from a deterministic [`CandidateOrder`]. Levels are
//! filled from the most important one down, and each slot takes the first
//! candidate in order that keeps every constraint satisfied against the words
//! already placed:
//!
//! * within level `x`, every pair is at least `2 t_x + 1` apart;
//! * between levels `x` and `y`, every pair is at least
//!   `max(floor_x, floor_y)` apart, where `floor` is the level's current
//!   measured `d_min` (never below `2t+1`);
//! * any per-pair minimum supplied in [`ConstructionConfig::min_inter`].
//!
//! The scan restarts at the head of the order for every slot. Adding a word
//! can lower a level's `d_min` and thereby relax its separation floor, so a
//! candidate rejected earlier may become admissible later.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codebook::{level_label, validate_level_specs, verify_codebook, LayeredCodebook, LevelSpec};
use crate::codeword::{Codeword, MAX_BLOCKLENGTH};
use crate::error::{Error, Result};

/// Largest blocklength the exhaustive orders accept.
pub const MAX_EXHAUSTIVE_BLOCKLENGTH: usize = 64;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidatePolicy {
    /// Integer order `0, 1, 2, ...`.
    Lexicographic,
    /// Reflected binary Gray code order.
    GrayCode,
    /// A keyed pseudo-random permutation of all `2^n` words.
    SeededRandom,
}

impl CandidatePolicy {
    pub fn is_exhaustive(&self) -> bool {
        !matches!(self, CandidatePolicy::SeededRandom)
    }
}

impl fmt::Display for CandidatePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidatePolicy::Lexicographic => "lexicographic",
            CandidatePolicy::GrayCode => "gray-code",
            CandidatePolicy::SeededRandom => "seeded-random",
        })
    }
}

impl FromStr for CandidatePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lexicographic" => Ok(CandidatePolicy::Lexicographic),
            "gray-code" => Ok(CandidatePolicy::GrayCode),
            "seeded-random" => Ok(CandidatePolicy::SeededRandom),
            other => Err(Error::Invalid(format!(
                "unknown candidate policy `{other}` (expected lexicographic, gray-code or seeded-random)"
            ))),
        }
    }
}

/// A deterministic, random-access ordering of `{0,1}^n`.
///
/// The seeded order is a bijection built from xor-with-key, multiplication
/// by an odd constant and xorshift steps, each invertible modulo `2^n`, so
/// it visits every word exactly once.
#[derive(Debug, Clone)]
pub struct CandidateOrder {
    n: usize,
    policy: CandidatePolicy,
    keys: [u128; 3],
    multipliers: [u128; 3],
}

impl CandidateOrder {
    pub fn new(n: usize, policy: CandidatePolicy, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_BLOCKLENGTH {
            return Err(Error::InvalidBlocklength(n));
        }
        if policy.is_exhaustive() && n > MAX_EXHAUSTIVE_BLOCKLENGTH {
            return Err(Error::Invalid(format!(
                "{policy} enumeration is limited to n <= {MAX_EXHAUSTIVE_BLOCKLENGTH}; use seeded-random for n={n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keys = [rng.random(), rng.random(), rng.random()];
        let multipliers = [rng.random::<u128>() | 1, rng.random::<u128>() | 1, rng.random::<u128>() | 1];
        Ok(Self {
            n,
            policy,
            keys,
            multipliers,
        })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn policy(&self) -> CandidatePolicy {
        self.policy
    }

    /// Number of words in the order, saturating at `u128::MAX` for `n = 128`.
    pub fn len(&self) -> u128 {
        if self.n >= 128 {
            u128::MAX
        } else {
            1u128 << self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn mask(&self) -> u128 {
        if self.n >= 128 {
            u128::MAX
        } else {
            (1u128 << self.n) - 1
        }
    }

    /// The `i`-th candidate; `i` must be below [`len`](Self::len).
    pub fn get(&self, i: u128) -> Codeword {
        let m = self.mask();
        debug_assert!(i & !m == 0);
        let value = match self.policy {
            CandidatePolicy::Lexicographic => i,
            CandidatePolicy::GrayCode => i ^ (i >> 1),
            CandidatePolicy::SeededRandom => {
                let shift = self.n / 2 + 1;
                let mut x = i & m;
                for r in 0..3 {
                    x = (x ^ self.keys[r]) & m;
                    x = x.wrapping_mul(self.multipliers[r]) & m;
                    x ^= x >> shift;
                }
                x
            }
        };
        Codeword::new(value, self.n).expect("candidate fits in n bits")
    }

    pub fn iter(&self) -> impl Iterator<Item = Codeword> + '_ {
        let len = self.len();
        (0..len).map(move |i| self.get(i))
    }
}

/// Ordered candidate stream for `{0,1}^n` under `policy`.
pub fn enumerate_candidates(n: usize, policy: CandidatePolicy, seed: u64) -> Result<CandidateOrder> {
    CandidateOrder::new(n, policy, seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionConfig {
    pub blocklength: usize,
    pub levels: Vec<LevelSpec>,
    pub policy: CandidatePolicy,
    /// Key for [`CandidatePolicy::SeededRandom`]; ignored by the exhaustive orders.
    pub seed: u64,
    /// Cap on candidates examined over the whole build.
    pub max_candidates: u64,
    /// Extra per-pair inter-level minimum distances, keyed by 1-based levels.
    pub min_inter: Vec<((usize, usize), usize)>,
    /// Worker threads for the candidate scan; the result does not depend on it.
    pub threads: usize,
}

impl ConstructionConfig {
    /// Levels from `(target_t, group_size)` pairs, least important first.
    pub fn new(blocklength: usize, levels: &[(usize, usize)]) -> Self {
        Self {
            blocklength,
            levels: levels
                .iter()
                .enumerate()
                .map(|(i, &(target_t, group_size))| LevelSpec {
                    level: i + 1,
                    target_t,
                    group_size,
                })
                .collect(),
            policy: if blocklength <= 24 {
                CandidatePolicy::Lexicographic
            } else {
                CandidatePolicy::SeededRandom
            },
            seed: 1,
            max_candidates: 200_000_000,
            min_inter: Vec::new(),
            threads: 1,
        }
    }

    /// The 45-bit, six-level layout used for the shipped codebook:
    /// `t = (1,1,2,3,5,7)` with eight codewords per level.
    pub fn reference() -> Self {
        Self::new(45, &[(1, 8), (1, 8), (2, 8), (3, 8), (5, 8), (7, 8)])
    }

    pub fn with_policy(mut self, policy: CandidatePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, max_candidates: u64) -> Self {
        self.max_candidates = max_candidates;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_min_inter(mut self, p: usize, q: usize, distance: usize) -> Self {
        self.min_inter.push(((p, q), distance));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocklength == 0 || self.blocklength > MAX_BLOCKLENGTH {
            return Err(Error::InvalidBlocklength(self.blocklength));
        }
        validate_level_specs(&self.levels)?;
        let total: u128 = self.levels.iter().map(|l| l.group_size as u128).sum();
        if self.blocklength < 128 && total > (1u128 << self.blocklength) {
            return Err(Error::Invalid(format!(
                "{total} codewords cannot fit in {{0,1}}^{}",
                self.blocklength
            )));
        }
        for spec in &self.levels {
            if spec.required_distance() > self.blocklength && spec.group_size > 1 {
                return Err(Error::Invalid(format!(
                    "level {} needs distance {} which exceeds n={}",
                    level_label(spec.level),
                    spec.required_distance(),
                    self.blocklength
                )));
            }
        }
        let m = self.levels.len();
        for &((p, q), _) in &self.min_inter {
            if p == q || p == 0 || q == 0 || p > m || q > m {
                return Err(Error::Invalid(format!(
                    "inter-level override {p}-{q} must name two distinct levels in 1..={m}"
                )));
            }
        }
        if self.policy.is_exhaustive() && self.blocklength > MAX_EXHAUSTIVE_BLOCKLENGTH {
            return Err(Error::Invalid(format!(
                "{} enumeration is limited to n <= {MAX_EXHAUSTIVE_BLOCKLENGTH}; use seeded-random",
                self.policy
            )));
        }
        Ok(())
    }
}

/// Why a build stopped before filling every slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfeasibilityReport {
    /// 1-based level whose slot could not be filled.
    pub level: usize,
    /// 0-based slot within that level.
    pub slot: usize,
    pub examined: u64,
    pub budget: u64,
    /// Candidate order ran out (as opposed to the budget).
    pub exhausted: bool,
    /// Codewords placed per level at the point of failure.
    pub placed: Vec<usize>,
}

impl fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "could not fill level {} slot {} after examining {} candidates ({}); placed per level: {:?}",
            level_label(self.level),
            self.slot,
            self.examined,
            if self.exhausted {
                "candidate space exhausted".to_string()
            } else {
                format!("budget {} reached", self.budget)
            },
            self.placed
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("infeasible: {0}")]
    Infeasible(InfeasibilityReport),
}

/// Placed words and their running distance metadata.
struct SearchState {
    required: Vec<usize>,
    groups: Vec<Vec<Codeword>>,
    dmin: Vec<Option<usize>>,
    inter: Vec<Vec<usize>>,
    overrides: Vec<Vec<usize>>,
}

impl SearchState {
    fn new(required: Vec<usize>, overrides: Vec<Vec<usize>>) -> Self {
        let m = required.len();
        Self {
            required,
            groups: vec![Vec::new(); m],
            dmin: vec![None; m],
            inter: vec![vec![usize::MAX; m]; m],
            overrides,
        }
    }

    fn floor_with(&self, x: usize, dmin: Option<usize>) -> usize {
        dmin.map_or(self.required[x], |d| d.max(self.required[x]))
    }

    /// Returns the new `d_min` of level `x` if `c` may join it.
    fn admissible(&self, x: usize, c: &Codeword) -> Option<Option<usize>> {
        let mut dmin = self.dmin[x];
        for u in &self.groups[x] {
            let d = c.distance_unchecked(u);
            if d < self.required[x] {
                return None;
            }
            dmin = Some(dmin.map_or(d, |b| b.min(d)));
        }
        let floor_x = self.floor_with(x, dmin);
        for (y, group) in self.groups.iter().enumerate() {
            if y == x || group.is_empty() {
                continue;
            }
            let need = floor_x
                .max(self.floor_with(y, self.dmin[y]))
                .max(self.overrides[x][y]);
            if self.inter[x][y] < need {
                return None;
            }
            if group.iter().any(|v| c.distance_unchecked(v) < need) {
                return None;
            }
        }
        Some(dmin)
    }

    fn place(&mut self, x: usize, c: Codeword, dmin: Option<usize>) {
        for (y, group) in self.groups.iter().enumerate() {
            if y == x {
                continue;
            }
            if let Some(d) = group.iter().map(|v| c.distance_unchecked(v)).min() {
                let cur = self.inter[x][y].min(d);
                self.inter[x][y] = cur;
                self.inter[y][x] = cur;
            }
        }
        self.dmin[x] = dmin;
        self.groups[x].push(c);
    }
}

enum ScanOutcome {
    Found(Codeword, Option<usize>),
    Budget,
    Exhausted,
}

/// First admissible candidate for level `x`, scanning from the head of the order.
fn scan(
    state: &SearchState,
    x: usize,
    order: &CandidateOrder,
    examined: &mut u64,
    budget: u64,
    pool: Option<&rayon::ThreadPool>,
) -> ScanOutcome {
    let total = order.len();
    let mut base: u128 = 0;
    while base < total {
        let remaining = budget.saturating_sub(*examined);
        if remaining == 0 {
            return ScanOutcome::Budget;
        }
        let len = (CHUNK as u128).min(total - base).min(remaining as u128) as u64;
        let test = |off: u64| state.admissible(x, &order.get(base + off as u128)).is_some();
        let hit = match pool {
            Some(pool) => pool.install(|| (0..len as usize).into_par_iter().position_first(|off| test(off as u64))),
            None => (0..len).position(test),
        };
        match hit {
            Some(off) => {
                *examined += off as u64 + 1;
                let c = order.get(base + off as u128);
                let dmin = state.admissible(x, &c).expect("re-check of accepted candidate");
                return ScanOutcome::Found(c, dmin);
            }
            None => {
                *examined += len;
                base += len as u128;
            }
        }
    }
    ScanOutcome::Exhausted
}

fn make_pool(threads: usize) -> Result<Option<rayon::ThreadPool>> {
    if threads <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))
}

/// Builds a layered codebook by greedy search, most important level first.
///
/// The result is re-verified with [`verify_codebook`] before it is returned.
pub fn build(cfg: &ConstructionConfig) -> Result<LayeredCodebook, BuildError> {
    cfg.validate()?;
    let m = cfg.levels.len();
    let order = CandidateOrder::new(cfg.blocklength, cfg.policy, cfg.seed)?;
    let mut overrides = vec![vec![0; m]; m];
    for &((p, q), d) in &cfg.min_inter {
        overrides[p - 1][q - 1] = overrides[p - 1][q - 1].max(d);
        overrides[q - 1][p - 1] = overrides[p - 1][q - 1];
    }
    let mut state = SearchState::new(
        cfg.levels.iter().map(LevelSpec::required_distance).collect(),
        overrides,
    );
    let pool = make_pool(cfg.threads)?;
    let mut examined = 0u64;

    for x in (0..m).rev() {
        for slot in 0..cfg.levels[x].group_size {
            match scan(&state, x, &order, &mut examined, cfg.max_candidates, pool.as_ref()) {
                ScanOutcome::Found(c, dmin) => state.place(x, c, dmin),
                outcome => {
                    return Err(BuildError::Infeasible(InfeasibilityReport {
                        level: x + 1,
                        slot,
                        examined,
                        budget: cfg.max_candidates,
                        exhausted: matches!(outcome, ScanOutcome::Exhausted),
                        placed: state.groups.iter().map(Vec::len).collect(),
                    }))
                }
            }
        }
        log::debug!(
            "level {} filled, d_min={:?}, {} candidates examined so far",
            level_label(x + 1),
            state.dmin[x],
            examined
        );
    }

    let levels = cfg
        .levels
        .iter()
        .zip(state.groups)
        .map(|(spec, group)| (spec.target_t, group))
        .collect();
    let cb = LayeredCodebook::new(cfg.blocklength, levels)?;
    let report = verify_codebook(&cb);
    if !report.passed() {
        return Err(BuildError::Invalid(Error::Invalid(format!(
            "constructed codebook failed verification: {}",
            report.violations[0]
        ))));
    }
    Ok(cb)
}

/// Greedy single-group code: `size` words of length `n` with pairwise
/// distance at least `min_distance`, or `None` within `budget`.
pub fn greedy_code(
    n: usize,
    size: usize,
    min_distance: usize,
    policy: CandidatePolicy,
    seed: u64,
    budget: u64,
) -> Result<Option<Vec<Codeword>>> {
    let order = CandidateOrder::new(n, policy, seed)?;
    let mut state = SearchState::new(vec![min_distance.max(1)], vec![vec![0]]);
    let mut examined = 0;
    for _ in 0..size {
        match scan(&state, 0, &order, &mut examined, budget, None) {
            ScanOutcome::Found(c, dmin) => state.place(0, c, dmin),
            _ => return Ok(None),
        }
    }
    Ok(state.groups.pop())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::Rule;
    use std::collections::HashSet;

    fn strings(order: &CandidateOrder) -> Vec<String> {
        order.iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn lexicographic_and_gray_orders() {
        let lex = enumerate_candidates(2, CandidatePolicy::Lexicographic, 0).unwrap();
        assert_eq!(strings(&lex), ["00", "01", "10", "11"]);
        let gray = enumerate_candidates(2, CandidatePolicy::GrayCode, 0).unwrap();
        assert_eq!(strings(&gray), ["00", "01", "11", "10"]);
    }

    #[test]
    fn seeded_order_is_a_permutation() {
        for n in [1, 2, 5, 11] {
            for seed in [0, 1, 99] {
                let order = enumerate_candidates(n, CandidatePolicy::SeededRandom, seed).unwrap();
                let seen: HashSet<_> = order.iter().collect();
                assert_eq!(seen.len() as u128, order.len(), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn seeded_order_45_bits_first_draws_distinct() {
        let order = enumerate_candidates(45, CandidatePolicy::SeededRandom, 1).unwrap();
        let first: Vec<_> = (0..3).map(|i| order.get(i)).collect();
        assert_eq!(first.iter().collect::<HashSet<_>>().len(), 3);
        assert!(first.iter().all(|c| c.len() == 45));
        let again = enumerate_candidates(45, CandidatePolicy::SeededRandom, 1).unwrap();
        assert_eq!(again.get(2), first[2]);
        let other = enumerate_candidates(45, CandidatePolicy::SeededRandom, 2).unwrap();
        assert_ne!((0..3).map(|i| other.get(i)).collect::<Vec<_>>(), first);
    }

    #[test]
    fn exhaustive_orders_refuse_long_words() {
        assert!(enumerate_candidates(65, CandidatePolicy::Lexicographic, 0).is_err());
        assert!(enumerate_candidates(65, CandidatePolicy::GrayCode, 0).is_err());
        assert!(enumerate_candidates(100, CandidatePolicy::SeededRandom, 0).is_ok());
    }

    #[test]
    fn single_level_n3() {
        let cfg = ConstructionConfig::new(3, &[(1, 2)]);
        let cb = build(&cfg).unwrap();
        let g = cb.group(1);
        assert_eq!(g.len(), 2);
        assert_eq!(cb.intra_dmin(1), Some(3));
        assert_eq!(g[0].to_string(), "000");
        assert_eq!(g[1].to_string(), "111");
    }

    /// Brute force: does any `(a, b, s)` with `a, b` in level 1 and `s` the
    /// level-2 singleton satisfy `d(a,b) >= 2t1+1` and both cross distances
    /// `>= max(d(a,b), 2t1+1, 2t2+1)`?
    fn two_plus_one_feasible(n: u32, t1: u32, t2: u32) -> bool {
        let d = |a: u32, b: u32| (a ^ b).count_ones();
        (0..1u32 << n).any(|s| {
            (0..1u32 << n).any(|a| {
                (a + 1..1u32 << n).any(|b| {
                    let dab = d(a, b);
                    let need = dab.max(2 * t1 + 1).max(2 * t2 + 1);
                    dab > 2 * t1 && d(a, s) >= need && d(b, s) >= need
                })
            })
        })
    }

    #[test]
    fn two_levels_n7_is_infeasible() {
        // Only one word of {0,1}^7 lies at distance 7 from the t=3 word, so
        // two t=1 words cannot both clear d_12 >= 7.
        assert!(!two_plus_one_feasible(7, 1, 3));
        let cfg = ConstructionConfig::new(7, &[(1, 2), (3, 1)]);
        match build(&cfg) {
            Err(BuildError::Infeasible(report)) => {
                assert_eq!((report.level, report.slot), (1, 1));
                assert!(report.exhausted);
                assert_eq!(report.placed, vec![1, 1]);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
        // One word per level is fine.
        let cb = build(&ConstructionConfig::new(7, &[(1, 1), (3, 1)])).unwrap();
        assert_eq!(cb.group(2)[0].to_string(), "0000000");
        assert_eq!(cb.group(1)[0].to_string(), "1111111");
    }

    #[test]
    fn feasibility_agrees_with_brute_force() {
        for n in 5..=9u32 {
            for (t1, t2) in [(0, 1), (1, 1), (1, 2), (1, 3), (2, 2)] {
                let cfg = ConstructionConfig::new(n as usize, &[(t1 as usize, 2), (t2 as usize, 1)]);
                let built = build(&cfg).is_ok();
                assert_eq!(built, two_plus_one_feasible(n, t1, t2), "n={n} t=({t1},{t2})");
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = ConstructionConfig::new(20, &[(1, 4), (3, 4)]).with_budget(10);
        match build(&cfg) {
            Err(BuildError::Infeasible(report)) => {
                assert!(!report.exhausted);
                assert_eq!(report.examined, 10);
            }
            other => panic!("expected budget failure, got {other:?}"),
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let decreasing = ConstructionConfig::new(10, &[(2, 2), (1, 2)]);
        assert!(matches!(build(&decreasing), Err(BuildError::Invalid(_))));
        let too_many = ConstructionConfig::new(2, &[(0, 5)]);
        assert!(matches!(build(&too_many), Err(BuildError::Invalid(_))));
        let bad_override = ConstructionConfig::new(10, &[(1, 2)]).with_min_inter(1, 1, 4);
        assert!(matches!(build(&bad_override), Err(BuildError::Invalid(_))));
    }

    #[test]
    fn min_inter_override_is_honoured() {
        let base = ConstructionConfig::new(12, &[(1, 3), (1, 3), (2, 2)]);
        let plain = build(&base).unwrap();
        let wide = build(&base.clone().with_min_inter(1, 3, 9)).unwrap();
        assert!(wide.inter_distance(1, 3) >= 9);
        assert!(verify_codebook(&wide).rule_passed(Rule::InterStrong));
        assert!(plain.inter_distance(1, 3) >= 5);
    }

    #[test]
    fn parallel_scan_matches_sequential() {
        let cfg = ConstructionConfig::new(30, &[(1, 4), (2, 4), (4, 3)]);
        let seq = build(&cfg).unwrap();
        let par = build(&cfg.clone().with_threads(4)).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn greedy_code_reaches_distance() {
        let words = greedy_code(14, 6, 7, CandidatePolicy::Lexicographic, 0, 1 << 20)
            .unwrap()
            .unwrap();
        assert_eq!(words.len(), 6);
        for (i, u) in words.iter().enumerate() {
            for v in &words[i + 1..] {
                assert!(u.distance_unchecked(v) >= 7);
            }
        }
        assert!(greedy_code(3, 3, 3, CandidatePolicy::Lexicographic, 0, 100)
            .unwrap()
            .is_none());
    }
}
