//! Closed lattice paths and their exponent profiles.
//!
//! A closed path of length `r` is a step sequence over `{-1, 0, +1}` summing to zero.
//! Placed at start site `j` it visits sites `j + i_l`, and its weight in a tridiagonal
//! matrix is the product of the entries it traverses:
//! `xi = prod_i a_i^{alpha_i} b_i^{2 gamma_i}`, where `alpha_i` counts flat steps at
//! site `i` and `gamma_i` counts up-steps leaving site `i`.
//!
//! Sites are 1-based matrix indices. For spectral-measure moments a path starting at
//! level 0 is placed at site 1, so level `l` corresponds to site `l + 1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::TridiagonalMatrix;

/// Longest path length the enumerators will produce.
pub const MAX_PATH_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Step {
    Down = -1,
    Flat = 0,
    Up = 1,
}

impl Step {
    pub fn delta(self) -> i32 {
        self as i8 as i32
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosedPath {
    steps: Vec<Step>,
}

impl ClosedPath {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let sum: i32 = steps.iter().map(|s| s.delta()).sum();
        if sum != 0 {
            return Err(Error::InvalidParameter(format!(
                "path is not closed: steps sum to {sum}"
            )));
        }
        Ok(Self { steps })
    }

    /// Parses a word over `U`, `F`, `D`.
    pub fn parse(word: &str) -> Result<Self> {
        let steps = word
            .chars()
            .map(|c| match c {
                'U' | 'u' => Ok(Step::Up),
                'F' | 'f' => Ok(Step::Flat),
                'D' | 'd' => Ok(Step::Down),
                _ => Err(Error::Parse(format!("bad step {c:?} in path {word:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Prefix sums `i_0 = 0, i_1, ..., i_r = 0`.
    pub fn levels(&self) -> Vec<i32> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut h = 0;
        out.push(h);
        for s in &self.steps {
            h += s.delta();
            out.push(h);
        }
        out
    }

    pub fn min_level(&self) -> i32 {
        self.levels().into_iter().min().unwrap_or(0)
    }

    pub fn max_level(&self) -> i32 {
        self.levels().into_iter().max().unwrap_or(0)
    }

    pub fn is_motzkin(&self) -> bool {
        self.min_level() >= 0
    }

    pub fn is_all_flat(&self) -> bool {
        self.steps.iter().all(|&s| s == Step::Flat)
    }
}

impl fmt::Display for ClosedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("()");
        }
        for s in &self.steps {
            f.write_str(match s {
                Step::Up => "U",
                Step::Flat => "F",
                Step::Down => "D",
            })?;
        }
        Ok(())
    }
}

/// Per-site exponents of a path, indexed by level relative to the start.
///
/// `alpha[k]` and `gamma[k]` belong to level `base + k`; the vectors cover
/// `i_min..=i_max` and nothing outside it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentProfile {
    base: i32,
    alpha: Vec<u32>,
    gamma: Vec<u32>,
}

impl ExponentProfile {
    pub fn base(&self) -> i32 {
        self.base
    }

    /// Highest level covered.
    pub fn top(&self) -> i32 {
        self.base + self.alpha.len() as i32 - 1
    }

    pub fn alpha(&self, level: i32) -> u32 {
        self.index(level).map_or(0, |k| self.alpha[k])
    }

    pub fn gamma(&self, level: i32) -> u32 {
        self.index(level).map_or(0, |k| self.gamma[k])
    }

    fn index(&self, level: i32) -> Option<usize> {
        let k = level - self.base;
        (k >= 0 && (k as usize) < self.alpha.len()).then_some(k as usize)
    }

    /// `(level, alpha, gamma)` for every level with a nonzero exponent.
    pub fn entries(&self) -> impl Iterator<Item = (i32, u32, u32)> + '_ {
        self.alpha
            .iter()
            .zip(&self.gamma)
            .enumerate()
            .filter(|(_, (a, g))| **a > 0 || **g > 0)
            .map(move |(k, (a, g))| (self.base + k as i32, *a, *g))
    }

    pub fn total_alpha(&self) -> u32 {
        self.alpha.iter().sum()
    }

    pub fn total_gamma(&self) -> u32 {
        self.gamma.iter().sum()
    }
}

pub fn exponent_profile(w: &ClosedPath) -> ExponentProfile {
    let levels = w.levels();
    let base = *levels.iter().min().unwrap();
    let top = *levels.iter().max().unwrap();
    let width = (top - base + 1) as usize;
    let mut alpha = vec![0; width];
    let mut gamma = vec![0; width];
    for (l, s) in w.steps().iter().enumerate() {
        let k = (levels[l] - base) as usize;
        match s {
            Step::Flat => alpha[k] += 1,
            Step::Up => gamma[k] += 1,
            Step::Down => {}
        }
    }
    ExponentProfile { base, alpha, gamma }
}

/// Start sites `j` for which `j + w` stays inside `1..=n`: `first..=last`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdmissibleWindow {
    pub first: i64,
    pub last: i64,
}

impl AdmissibleWindow {
    pub fn is_empty(&self) -> bool {
        self.first > self.last
    }

    pub fn contains(&self, j: i64) -> bool {
        self.first <= j && j <= self.last
    }

    pub fn starts(&self) -> std::ops::RangeInclusive<i64> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.last - self.first + 1) as usize
        }
    }
}

pub fn admissible_window(w: &ClosedPath, n: usize) -> AdmissibleWindow {
    AdmissibleWindow {
        first: 1 - w.min_level() as i64,
        last: n as i64 - w.max_level() as i64,
    }
}

fn check_cap(r: usize) -> Result<()> {
    if r > MAX_PATH_LEN {
        return Err(Error::PathCapExceeded {
            requested: r,
            cap: MAX_PATH_LEN,
        });
    }
    Ok(())
}

/// Every closed path of length `r`, in lexicographic step order (Down < Flat < Up).
pub fn enumerate_closed(r: usize) -> Result<Vec<ClosedPath>> {
    check_cap(r)?;
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(r);
    generate(r, 0, false, &mut buf, &mut out);
    Ok(out)
}

/// Closed paths of length `r` that never go below level 0.
pub fn enumerate_motzkin(r: usize) -> Result<Vec<ClosedPath>> {
    check_cap(r)?;
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(r);
    generate(r, 0, true, &mut buf, &mut out);
    Ok(out)
}

fn generate(r: usize, level: i32, nonneg: bool, buf: &mut Vec<Step>, out: &mut Vec<ClosedPath>) {
    let remaining = (r - buf.len()) as i32;
    if remaining == 0 {
        out.push(ClosedPath { steps: buf.clone() });
        return;
    }
    for step in [Step::Down, Step::Flat, Step::Up] {
        let next = level + step.delta();
        // must still be able to return to 0 with the steps left
        if next.abs() > remaining - 1 || (nonneg && next < 0) {
            continue;
        }
        buf.push(step);
        generate(r, next, nonneg, buf, out);
        buf.pop();
    }
}

/// `xi_{j+w}`: product of the matrix entries along `w` placed at start site `j`.
pub fn path_weight(w: &ClosedPath, j: i64, t: &TridiagonalMatrix) -> Result<f64> {
    if !admissible_window(w, t.n()).contains(j) {
        return Err(Error::Inadmissible { start: j, n: t.n() });
    }
    let mut site = j as usize;
    let mut prod = 1.0;
    for s in w.steps() {
        match s {
            Step::Flat => prod *= t.a(site),
            Step::Up => {
                prod *= t.b(site);
                site += 1;
            }
            Step::Down => {
                site -= 1;
                prod *= t.b(site);
            }
        }
    }
    Ok(prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_gbe;
    use crate::randsrc::RngStream;
    use std::collections::HashSet;

    /// Brute force over all 3^r step strings.
    fn brute_closed(r: usize) -> Vec<Vec<i32>> {
        let mut out = Vec::new();
        for code in 0..3usize.pow(r as u32) {
            let mut c = code;
            let steps: Vec<i32> = (0..r)
                .map(|_| {
                    let s = (c % 3) as i32 - 1;
                    c /= 3;
                    s
                })
                .collect();
            if steps.iter().sum::<i32>() == 0 {
                out.push(steps);
            }
        }
        out
    }

    fn motzkin_numbers(k: usize) -> Vec<u64> {
        let mut m = vec![1u64, 1];
        for n in 2..=k {
            let v = ((2 * n as u64 + 1) * m[n - 1] + (3 * n as u64 - 3) * m[n - 2]) / (n as u64 + 2);
            m.push(v);
        }
        m
    }

    fn central_trinomial(r: usize) -> u64 {
        // coefficient of x^r in (1 + x + x^2)^r
        let mut poly = vec![1u64];
        for _ in 0..r {
            let mut next = vec![0u64; poly.len() + 2];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] += c;
                next[i + 2] += c;
            }
            poly = next;
        }
        poly[r]
    }

    #[test]
    fn small_closed_counts() {
        assert_eq!(enumerate_closed(0).unwrap().len(), 1);
        let one = enumerate_closed(1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].is_all_flat());
        assert_eq!(enumerate_closed(2).unwrap().len(), 3);
        assert_eq!(enumerate_closed(4).unwrap().len(), brute_closed(4).len());
        assert_eq!(enumerate_closed(4).unwrap().len(), 19);
    }

    #[test]
    fn closed_matches_brute_force_and_is_duplicate_free() {
        for r in 0..=8 {
            let got = enumerate_closed(r).unwrap();
            let set: HashSet<_> = got.iter().cloned().collect();
            assert_eq!(set.len(), got.len());
            let want: HashSet<Vec<i32>> = brute_closed(r).into_iter().collect();
            let got: HashSet<Vec<i32>> = got
                .iter()
                .map(|w| w.steps().iter().map(|s| s.delta()).collect())
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn counts_match_classical_sequences() {
        let m = motzkin_numbers(12);
        for r in 0..=12 {
            assert_eq!(enumerate_motzkin(r).unwrap().len() as u64, m[r], "r = {r}");
            assert_eq!(enumerate_closed(r).unwrap().len() as u64, central_trinomial(r));
        }
        let firsts: Vec<usize> = (0..=6).map(|r| enumerate_motzkin(r).unwrap().len()).collect();
        assert_eq!(firsts, vec![1, 1, 2, 4, 9, 21, 51]);
    }

    #[test]
    fn motzkin_filter_of_closed() {
        for r in 0..=7 {
            let filtered: Vec<ClosedPath> = enumerate_closed(r)
                .unwrap()
                .into_iter()
                .filter(|w| w.is_motzkin())
                .collect();
            assert_eq!(filtered, enumerate_motzkin(r).unwrap());
        }
        let two: Vec<String> = enumerate_motzkin(2)
            .unwrap()
            .iter()
            .map(|w| w.to_string())
            .collect();
        assert_eq!(two, vec!["FF", "UD"]);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            enumerate_closed(17),
            Err(Error::PathCapExceeded { requested: 17, .. })
        ));
        assert!(enumerate_motzkin(17).is_err());
    }

    #[test]
    fn profiles() {
        let p = exponent_profile(&ClosedPath::parse("FF").unwrap());
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![(0, 2, 0)]);
        let p = exponent_profile(&ClosedPath::parse("UD").unwrap());
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![(0, 0, 1)]);
        let p = exponent_profile(&ClosedPath::parse("UFD").unwrap());
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![(0, 0, 1), (1, 1, 0)]);
        let p = exponent_profile(&ClosedPath::parse("DU").unwrap());
        assert_eq!(p.entries().collect::<Vec<_>>(), vec![(-1, 0, 1)]);
        assert_eq!(p.alpha(5), 0);
    }

    #[test]
    fn profile_invariants() {
        for r in 0..=10 {
            for w in enumerate_closed(r).unwrap() {
                let p = exponent_profile(&w);
                assert_eq!((p.total_alpha() + 2 * p.total_gamma()) as usize, r);
                assert!(w.max_level() - w.min_level() <= (r / 2) as i32);
                assert_eq!(p.base(), w.min_level());
                assert_eq!(p.top(), w.max_level());
                // up-steps from i equal down-steps from i+1
                let levels = w.levels();
                for lvl in w.min_level()..=w.max_level() {
                    let downs = w
                        .steps()
                        .iter()
                        .enumerate()
                        .filter(|(l, s)| **s == Step::Down && levels[*l] == lvl + 1)
                        .count() as u32;
                    assert_eq!(p.gamma(lvl), downs);
                }
            }
        }
    }

    #[test]
    fn windows() {
        let ud = ClosedPath::parse("UD").unwrap();
        let win = admissible_window(&ud, 5);
        assert_eq!((win.first, win.last), (1, 4));
        let f = ClosedPath::parse("F").unwrap();
        assert_eq!(admissible_window(&f, 5).starts(), 1..=5);
        for r in 1..=6 {
            for w in enumerate_closed(r).unwrap() {
                assert_eq!(!admissible_window(&w, 1).is_empty(), w.is_all_flat());
            }
        }
        let du = ClosedPath::parse("DU").unwrap();
        assert_eq!(admissible_window(&du, 5).starts(), 2..=5);
        assert!(admissible_window(&ClosedPath::parse("UUDD").unwrap(), 2).is_empty());
    }

    #[test]
    fn weights_and_trace_identity() {
        let mut s = RngStream::new(12, 0);
        let t = build_gbe(6, 1.5, &mut s).unwrap();
        let flat3 = ClosedPath::parse("FFF").unwrap();
        assert_eq!(path_weight(&flat3, 2, &t).unwrap(), t.a(2).powi(3));
        let ud = ClosedPath::parse("UD").unwrap();
        assert_eq!(path_weight(&ud, 3, &t).unwrap(), t.b(3) * t.b(3));
        assert!(path_weight(&ud, 6, &t).is_err());
        assert!(path_weight(&ud, 0, &t).is_err());

        for n in 1..=10usize {
            let t = build_gbe(n, 0.7, &mut s).unwrap();
            let dense = dense_power_traces(&t, 6);
            for r in 0..=6 {
                let mut total = 0.0;
                for w in enumerate_closed(r).unwrap() {
                    for j in admissible_window(&w, n).starts() {
                        total += path_weight(&w, j, &t).unwrap();
                    }
                }
                let want = dense[r];
                assert!((total - want).abs() < 1e-10 * want.abs().max(1.0), "n {n} r {r}");
            }
        }
    }

    fn dense_power_traces(t: &TridiagonalMatrix, rmax: usize) -> Vec<f64> {
        let n = t.n();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = t.diag()[i];
            if i + 1 < n {
                m[i][i + 1] = t.offdiag()[i];
                m[i + 1][i] = t.offdiag()[i];
            }
        }
        let mut p: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut out = vec![n as f64];
        for _ in 0..rmax {
            let mut q = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        q[i][j] += p[i][k] * m[k][j];
                    }
                }
            }
            p = q;
            out.push((0..n).map(|i| p[i][i]).sum());
        }
        out
    }
}
