//! Code constructions: quasi-cyclic protograph lifting and random
//! irregular repeat-accumulate (IRA) codes.

use std::collections::HashSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LdpcCode;
use crate::error::{Error, Result};

/// Shift attempts per circulant before accepting a 4-cycle.
const SHIFT_RETRIES: usize = 200;

/// Outcome of a protograph lift.
#[derive(Debug, Clone)]
pub struct LiftedCode {
    pub code: LdpcCode,
    /// Circulant shifts per base entry, `(row, col, shifts)`.
    pub shifts: Vec<(usize, usize, Vec<usize>)>,
    /// Whether every 4-cycle was avoided (girth >= 6).
    pub girth_at_least_6: bool,
    /// 4-cycle-closing shift choices that had to be accepted.
    pub forced_four_cycles: usize,
}

#[derive(Clone, Copy)]
struct Circulant {
    row: usize,
    col: usize,
    shift: usize,
}

/// Circulants placed so far, indexed by base row and base column.
struct Placement {
    all: Vec<Circulant>,
    by_row: Vec<Vec<usize>>,
    by_col: Vec<Vec<usize>>,
}

impl Placement {
    fn new(rows: usize, cols: usize) -> Self {
        Placement {
            all: Vec::new(),
            by_row: vec![Vec::new(); rows],
            by_col: vec![Vec::new(); cols],
        }
    }

    fn push(&mut self, c: Circulant) {
        self.by_row[c.row].push(self.all.len());
        self.by_col[c.col].push(self.all.len());
        self.all.push(c);
    }

    /// Would adding `a` close a length-4 cycle? A cycle runs through
    /// circulants `a (r1,c1)`, `b (r1,c2)`, `c (r2,c2)`, `d (r2,c1)` with
    /// consecutive ones distinct, and closes iff `sa - sb + sc - sd = 0
    /// (mod z)`. `c` may be `a` itself when the block holds several edges.
    fn closes_four_cycle(&self, a: Circulant, z: usize) -> bool {
        let z = z as isize;
        let closes = |b: Circulant, c: Circulant, d: Circulant| {
            (a.shift as isize - b.shift as isize + c.shift as isize - d.shift as isize)
                .rem_euclid(z)
                == 0
        };
        for &ib in &self.by_row[a.row] {
            let b = self.all[ib];
            for &ic in &self.by_col[b.col] {
                if ic == ib {
                    continue;
                }
                let c = self.all[ic];
                for &id in &self.by_col[a.col] {
                    let d = self.all[id];
                    if id != ic && d.row == c.row && closes(b, c, d) {
                        return true;
                    }
                }
            }
            if b.col == a.col {
                for &id in &self.by_col[a.col] {
                    let d = self.all[id];
                    if d.row == a.row && closes(b, a, d) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Lifts a protograph base matrix with circulant permutations of size
/// `lift`. Entry `e > 1` places `e` distinct circulants in the same block.
/// Shifts are chosen at random (seeded) and re-drawn to avoid 4-cycles;
/// when that fails after bounded retries the first unused shift is kept,
/// a warning is logged and the report says so.
pub fn build_protograph(base: &[Vec<u32>], lift: usize, seed: u64) -> Result<LiftedCode> {
    if lift == 0 {
        return Err(Error::param("lifting_factor", "must be >= 1"));
    }
    let base_cols = base.first().map_or(0, Vec::len);
    if base.is_empty() || base_cols == 0 || base.iter().any(|r| r.len() != base_cols) {
        return Err(Error::Construction("base matrix must be non-empty and rectangular".into()));
    }
    for (r, row) in base.iter().enumerate() {
        for (c, &e) in row.iter().enumerate() {
            if e as usize > lift {
                return Err(Error::Construction(format!(
                    "base entry ({r},{c}) exceeds the lifting factor {lift}"
                )));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed = Placement::new(base.len(), base_cols);
    let mut shifts = Vec::new();
    let mut forced = 0;
    for (r, row) in base.iter().enumerate() {
        for (c, &entry) in row.iter().enumerate() {
            let mut used: Vec<usize> = Vec::new();
            for _ in 0..entry {
                let mut chosen = None;
                for _ in 0..SHIFT_RETRIES {
                    let shift = rng.random_range(0..lift);
                    if used.contains(&shift) {
                        continue;
                    }
                    if !placed.closes_four_cycle(Circulant { row: r, col: c, shift }, lift) {
                        chosen = Some(shift);
                        break;
                    }
                }
                let shift = chosen.unwrap_or_else(|| {
                    forced += 1;
                    (0..lift).find(|s| !used.contains(s)).expect("entry <= lift")
                });
                placed.push(Circulant { row: r, col: c, shift });
                used.push(shift);
            }
            if !used.is_empty() {
                shifts.push((r, c, used));
            }
        }
    }
    if forced > 0 {
        warn!("protograph lift by {lift}: {forced} circulants close 4-cycles; girth is 4");
    }

    let m = base.len() * lift;
    let n = base_cols * lift;
    let mut rows = vec![Vec::new(); m];
    for circ in &placed.all {
        for i in 0..lift {
            rows[circ.row * lift + i].push(circ.col * lift + (i + circ.shift) % lift);
        }
    }
    let tag = format!("protograph {}x{} lift {lift} seed {seed}", base.len(), base_cols);
    let code = LdpcCode::from_rows(n, rows, tag)?;
    Ok(LiftedCode {
        code,
        shifts,
        girth_at_least_6: forced == 0,
        forced_four_cycles: forced,
    })
}

/// Base matrix of an accumulate protograph: `info_cols` information
/// columns followed by a `checks x checks` dual-diagonal accumulator.
/// Information column `j` connects to every check `r` with
/// `r % info_cols == j` plus `extra` further evenly spread checks, giving
/// rate `info_cols / (info_cols + checks)` before lifting.
pub fn accumulate_base(info_cols: usize, checks: usize, info_degree: usize) -> Vec<Vec<u32>> {
    let mut base = vec![vec![0u32; info_cols + checks]; checks];
    for j in 0..info_cols {
        for t in 0..info_degree {
            let r = (j + t * checks / info_degree.max(1)) % checks;
            base[r][j] += 1;
        }
    }
    for r in 0..checks {
        base[r][info_cols + r] = 1;
        if r + 1 < checks {
            base[r + 1][info_cols + r] = 1;
        }
    }
    base
}

/// Random IRA code: `k` information bits, `m` checks, each information
/// column of weight `info_degree` (or, when `info_degree` has a
/// fractional part, a mix of the two neighbouring integer weights), and a
/// dual-diagonal accumulator over the parity bits.
///
/// Edges are placed greedily on the least-loaded checks in random order,
/// avoiding 4-cycles whenever possible. Deterministic in `seed`.
pub fn ira(k: usize, m: usize, info_degree: f64, seed: u64) -> Result<LdpcCode> {
    if k == 0 || m < 2 {
        return Err(Error::param("ira", "need k >= 1 and m >= 2"));
    }
    if !(info_degree >= 1.0) || info_degree > m as f64 {
        return Err(Error::param("info_degree", format!("must lie in [1, {m}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let low = info_degree.floor() as usize;
    let high_count = ((info_degree - low as f64) * k as f64).round() as usize;
    let mut degrees: Vec<usize> = (0..k).map(|j| if j < high_count { low + 1 } else { low }).collect();
    degrees.shuffle(&mut rng);

    let mut load = vec![0usize; m];
    let mut info_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    // check pairs already joined by some information column
    let mut pairs: HashSet<(u32, u32)> = HashSet::new();
    let mut order: Vec<usize> = (0..m).collect();

    for (j, &deg) in degrees.iter().enumerate() {
        let mut mine: Vec<usize> = Vec::with_capacity(deg);
        for _ in 0..deg {
            order.shuffle(&mut rng);
            order.sort_by_key(|&r| load[r]);
            let ok = |r: usize, strict: bool| {
                if mine.contains(&r) {
                    return false;
                }
                if !strict {
                    return true;
                }
                // parity column k+r joins checks r and r+1
                if mine.iter().any(|&o| o + 1 == r || r + 1 == o) {
                    return false;
                }
                mine.iter().all(|&o| !pairs.contains(&(o.min(r) as u32, o.max(r) as u32)))
            };
            let pick = order
                .iter()
                .copied()
                .find(|&r| ok(r, true))
                .or_else(|| order.iter().copied().find(|&r| ok(r, false)))
                .ok_or_else(|| Error::Construction("ran out of checks".into()))?;
            mine.push(pick);
            load[pick] += 1;
        }
        for (a, &x) in mine.iter().enumerate() {
            for &y in &mine[a + 1..] {
                pairs.insert((x.min(y) as u32, x.max(y) as u32));
            }
            info_rows[x].push(j);
        }
    }
    LdpcCode::from_accumulate_rows(
        k,
        info_rows,
        format!("ira k={k} m={m} dv={info_degree} seed={seed}"),
    )
}

/// IRA code of blocklength `n` and rate as close to `rate` as the integer
/// split allows.
pub fn ira_with_rate(n: usize, rate: f64, info_degree: f64, seed: u64) -> Result<LdpcCode> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::param("rate", "must lie in (0, 1)"));
    }
    let k = ((n as f64) * rate).round() as usize;
    let k = k.clamp(1, n.saturating_sub(2));
    ira(k, n - k, info_degree, seed)
}

/// Parameters of [`extended_ira`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendedIraParams {
    /// Blocklength.
    pub n: usize,
    /// Information bits.
    pub k: usize,
    /// Checks of the IRA core.
    pub core_checks: usize,
    /// Information-column weight inside the core.
    pub core_info_degree: f64,
    /// Core variables per extension check.
    pub extension_degree: usize,
    /// Relative preference of extension checks for information columns
    /// over core parity columns.
    pub info_weight: f64,
    pub seed: u64,
}

impl ExtendedIraParams {
    /// Low-rate code used by the examples and tests: `N = 512`,
    /// `K = 51` (rate ~1/10).
    pub fn low_rate_512() -> Self {
        ExtendedIraParams {
            n: 512,
            k: 51,
            core_checks: 30,
            core_info_degree: 3.0,
            extension_degree: 3,
            info_weight: 6.0,
            seed: 7,
        }
    }
}

/// IRA core extended by degree-one parity bits.
///
/// The first `k + core_checks` columns form an [`ira`] code. Every further
/// column is a parity bit that appears in exactly one extension check,
/// which also joins `extension_degree` core columns chosen greedily by
/// load (information columns weighted by `info_weight`), avoiding 4-cycles
/// where possible. The extension lowers the rate without adding degree-2
/// variables, which keeps belief propagation stable at low SNR.
pub fn extended_ira(p: &ExtendedIraParams) -> Result<LdpcCode> {
    let core_n = p.k + p.core_checks;
    if p.n <= core_n {
        return Err(Error::param("n", "must exceed k + core_checks"));
    }
    if p.extension_degree == 0 || p.extension_degree > core_n {
        return Err(Error::param("extension_degree", format!("must lie in [1, {core_n}]")));
    }
    if !(p.info_weight > 0.0) {
        return Err(Error::param("info_weight", "must be > 0"));
    }
    let core = ira(p.k, p.core_checks, p.core_info_degree, p.seed)?;
    let mut rows: Vec<Vec<usize>> = core
        .rows()
        .iter()
        .map(|r| r.iter().map(|&c| c as usize).collect())
        .collect();
    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    let add_pairs = |pairs: &mut HashSet<(usize, usize)>, row: &[usize]| {
        for (i, &a) in row.iter().enumerate() {
            for &b in &row[i + 1..] {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    };
    for r in &rows {
        add_pairs(&mut pairs, r);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5bd1_e995);
    let mut load = vec![0.0f64; core_n];
    let mut order: Vec<usize> = (0..core_n).collect();
    let mut forced = 0usize;
    for e in 0..p.n - core_n {
        let mut row: Vec<usize> = Vec::with_capacity(p.extension_degree + 1);
        for _ in 0..p.extension_degree {
            order.shuffle(&mut rng);
            let weight = |c: usize| load[c] / if c < p.k { p.info_weight } else { 1.0 };
            order.sort_by(|a, b| weight(*a).total_cmp(&weight(*b)));
            let fresh = |c: &usize| {
                !row.contains(c) && row.iter().all(|&o| !pairs.contains(&(o.min(*c), o.max(*c))))
            };
            let pick = match order.iter().copied().find(fresh) {
                Some(c) => c,
                None => {
                    forced += 1;
                    order.iter().copied().find(|c| !row.contains(c)).expect("degree <= core_n")
                }
            };
            load[pick] += 1.0;
            row.push(pick);
        }
        add_pairs(&mut pairs, &row);
        row.push(core_n + e);
        rows.push(row);
    }
    if forced > 0 {
        warn!("extended IRA: {forced} extension edges close 4-cycles");
    }
    let tag = format!(
        "extended-ira n={} k={} core={} dv={} de={} w={} seed={}",
        p.n, p.k, p.core_checks, p.core_info_degree, p.extension_degree, p.info_weight, p.seed
    );
    LdpcCode::from_rows(p.n, rows, tag)
}

/// Irregular code with the given variable-degree profile.
///
/// `profile` lists `(degree, fraction of columns)`; fractions are
/// normalised. Columns are filled in decreasing degree order, each edge
/// going to the least-loaded check that does not close a 4-cycle (ties
/// broken at random), in the spirit of progressive edge growth. The
/// encoder is derived by elimination.
pub fn irregular(n: usize, m: usize, profile: &[(usize, f64)], seed: u64) -> Result<LdpcCode> {
    if m == 0 || m >= n {
        return Err(Error::param("m", "must lie in [1, n)"));
    }
    let total: f64 = profile.iter().map(|p| p.1).sum();
    if profile.is_empty() || !(total > 0.0) || profile.iter().any(|&(d, f)| d == 0 || d > m || f < 0.0) {
        return Err(Error::param("profile", "degrees in [1, m] with non-negative fractions"));
    }
    let mut degrees = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &(d, f) in profile {
        acc += f / total;
        let upto = ((acc * n as f64).round() as usize).min(n);
        degrees.resize(upto.max(degrees.len()), d);
    }
    degrees.resize(n, profile.last().expect("non-empty").0);
    degrees.sort_unstable_by(|a, b| b.cmp(a));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..m).collect();
    let mut forced = 0usize;
    let mut mine: Vec<usize> = Vec::new();
    let mut blocked = vec![usize::MAX; m];
    for (col, &d) in degrees.iter().enumerate() {
        mine.clear();
        for _ in 0..d {
            order.shuffle(&mut rng);
            order.sort_by_key(|&r| rows[r].len());
            // checks sharing a column with one of ours would close a 4-cycle
            if let Some(&r) = mine.last() {
                for &v in &rows[r] {
                    for &r2 in &cols[v] {
                        blocked[r2] = col;
                    }
                }
            }
            let pick = order
                .iter()
                .copied()
                .find(|&r| blocked[r] != col && !mine.contains(&r))
                .or_else(|| {
                    forced += 1;
                    order.iter().copied().find(|r| !mine.contains(r))
                })
                .expect("d <= m");
            mine.push(pick);
            rows[pick].push(col);
            cols[col].push(pick);
        }
    }
    if forced > 0 {
        warn!("irregular code: {forced} edges close 4-cycles");
    }
    LdpcCode::from_rows(n, rows, format!("irregular n={n} m={m} profile={profile:?} seed={seed}"))
}

/// Variable-degree profile used for high-rate syndrome codes.
pub const HIGH_RATE_PROFILE: [(usize, f64); 2] = [(3, 0.7), (9, 0.3)];

/// High-rate code for syndrome decoding over a BSC: [`irregular`] with
/// [`HIGH_RATE_PROFILE`] and `round(n (1 - rate))` checks.
pub fn high_rate(n: usize, rate: f64, seed: u64) -> Result<LdpcCode> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::param("rate", "must lie in (0, 1)"));
    }
    let m = ((n as f64) * (1.0 - rate)).round().max(1.0) as usize;
    irregular(n, m, &HIGH_RATE_PROFILE, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_lift_reproduces_base() {
        let base = vec![vec![1, 1, 0, 1], vec![0, 1, 1, 1]];
        let lifted = build_protograph(&base, 1, 7).unwrap();
        let dense = lifted.code.to_dense();
        let expected: Vec<Vec<u8>> = base.iter().map(|r| r.iter().map(|&e| e as u8).collect()).collect();
        assert_eq!(dense, expected);
    }

    #[test]
    fn half_rate_lift_dimensions() {
        let lifted = build_protograph(&[vec![1, 1]], 128, 1).unwrap();
        assert_eq!(lifted.code.n(), 256);
        assert_eq!(lifted.code.m(), 128);
        assert_eq!(lifted.code.k(), 128);
        assert!((lifted.code.rate() - 0.5).abs() < 1e-15);
        assert!(lifted.girth_at_least_6);
    }

    #[test]
    fn lift_is_deterministic() {
        let base = accumulate_base(2, 6, 3);
        let a = build_protograph(&base, 16, 99).unwrap();
        let b = build_protograph(&base, 16, 99).unwrap();
        assert_eq!(a.code, b.code);
    }

    #[test]
    fn lifted_girth_is_checked() {
        let base = accumulate_base(2, 6, 3);
        let lifted = build_protograph(&base, 16, 3).unwrap();
        assert!(lifted.girth_at_least_6);
        assert!(lifted.code.girth(5).is_none());
    }

    #[test]
    fn infeasible_girth_is_reported() {
        // a 3x6 all-ones base cannot avoid 4-cycles with circulants of size 4
        let base = vec![vec![1; 6]; 3];
        let lifted = build_protograph(&base, 4, 0).unwrap();
        assert!(!lifted.girth_at_least_6);
        assert!(lifted.forced_four_cycles > 0);
        assert_eq!(lifted.code.girth(10), Some(4));
    }

    #[test]
    fn multi_edge_entries() {
        let lifted = build_protograph(&[vec![2, 1, 1]], 8, 5).unwrap();
        assert!(lifted.code.col(0).len() == 2);
        assert_eq!(lifted.shifts[0].2.len(), 2);
    }

    #[test]
    fn bad_lifts() {
        assert!(build_protograph(&[vec![1, 1]], 0, 0).is_err());
        assert!(build_protograph(&[vec![3, 1]], 2, 0).is_err());
        assert!(build_protograph(&[], 4, 0).is_err());
    }

    #[test]
    fn rate_one_fiftieth_code() {
        let base = accumulate_base(1, 49, 49);
        let lifted = build_protograph(&base, 10, 2024).unwrap();
        assert_eq!(lifted.code.n(), 500);
        assert_eq!(lifted.code.k(), 10);
        assert!((lifted.code.rate() - 1.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn ira_dimensions_and_encoding() {
        let code = ira(40, 60, 3.0, 1).unwrap();
        assert_eq!((code.n(), code.k(), code.m()), (100, 40, 60));
        let s: Vec<u8> = (0..40).map(|i| (i % 3 == 0) as u8).collect();
        let c = code.encode(&s).unwrap();
        assert!(code.is_codeword(&c));
        assert!(code.girth(5).is_none(), "4-cycle in a roomy IRA code");
        for j in 0..40 {
            assert_eq!(code.col(j).len(), 3);
        }
    }

    #[test]
    fn ira_fractional_degree() {
        let code = ira(100, 50, 3.5, 4).unwrap();
        let edges: usize = (0..100).map(|j| code.col(j).len()).sum();
        assert_eq!(edges, 350);
    }

    #[test]
    fn extended_ira_shape() {
        let p = ExtendedIraParams::low_rate_512();
        let code = extended_ira(&p).unwrap();
        assert_eq!((code.n(), code.k()), (512, 51));
        for c in 81..512 {
            assert_eq!(code.col(c).len(), 1, "column {c}");
        }
        assert!(code.girth(5).is_none());
        let s: Vec<u8> = (0..51).map(|i| (i % 5 == 1) as u8).collect();
        let c = code.encode(&s).unwrap();
        assert!(code.is_codeword(&c));
        assert_eq!(code.extract_info(&c), s);
    }

    #[test]
    fn extended_ira_rejects_bad_shapes() {
        let mut p = ExtendedIraParams::low_rate_512();
        p.n = 81;
        assert!(extended_ira(&p).is_err());
        let mut p = ExtendedIraParams::low_rate_512();
        p.extension_degree = 0;
        assert!(extended_ira(&p).is_err());
    }

    #[test]
    fn irregular_profile_is_respected() {
        let code = irregular(100, 50, &[(2, 0.5), (4, 0.5)], 3).unwrap();
        let mut twos = 0;
        let mut fours = 0;
        for c in 0..100 {
            match code.col(c).len() {
                2 => twos += 1,
                4 => fours += 1,
                d => panic!("unexpected degree {d}"),
            }
        }
        assert_eq!((twos, fours), (50, 50));
        assert_eq!(code.num_edges(), 300);
    }

    #[test]
    fn high_rate_code() {
        let code = high_rate(2000, 0.8, 11).unwrap();
        assert_eq!(code.m(), 400);
        assert!(code.rate() >= 0.8);
        assert!(high_rate(100, 1.0, 0).is_err());
        assert!(irregular(10, 10, &[(3, 1.0)], 0).is_err());
    }

    #[test]
    fn ira_rate_helper() {
        let code = ira_with_rate(2000, 0.8, 3.0, 9).unwrap();
        assert_eq!(code.k(), 1600);
        assert!((code.rate() - 0.8).abs() < 1e-12);
    }
}
