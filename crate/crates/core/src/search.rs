//! Minimal filling architectures, unimodality checks and dimension tables.
//!
//! Filling is monotone in every width (zeroing weights embeds a narrower
//! network), so the filling widths form an up-set of the box `1 <= d_i <= cap_i`
//! and the search looks for its minimal elements. The part of the box not yet
//! known to dominate a minimal element is kept as a union of down-closed boxes
//! `[1, t]`, identified by their tops `t`:
//!
//! * if `t` does not fill, nothing below it does and the box is dropped;
//! * otherwise a coordinate-wise descent from `t` reaches a minimal element
//!   `m`, and every top `t >= m` is replaced by the tops
//!   `t` with coordinate `j` lowered to `m_j - 1`.
//!
//! The loop ends when no box is left, at which point every minimal element
//! has been found, independently of the order in which boxes are visited.
//!
//! Two sound reductions keep boxes small. A closed-form upper bound below the
//! ambient dimension settles a candidate without the oracle. And a width
//! `d_i` above `binomial(d_{i-1} + r - 1, r)` never helps: the `r`-th powers of
//! `d_{i-1}` inputs span at most that many dimensions, so tops are clipped to
//! it.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{ambient_dim, thm2_threshold, SegmentBounds};
use crate::dimension::{dimension, DimensionConfig, DimensionEstimate, FillingVerdict, Method};
use crate::error::{Error, Result};
use crate::network::Architecture;
use crate::poly::binomial;
use crate::seed::derive_seed_from;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub depth: usize,
    pub d0: usize,
    pub dh: usize,
    pub degree: u32,
    /// Per internal layer; defaults to the sufficient filling widths.
    pub width_cap: Option<Vec<usize>>,
    /// Maximum number of oracle calls.
    pub budget: usize,
    pub trials: usize,
    pub seed: u64,
    pub method: Method,
    /// Shuffles box and coordinate order; results must not depend on it.
    pub traversal_seed: Option<u64>,
}

impl SearchSpec {
    pub fn new(depth: usize, d0: usize, dh: usize, degree: u32) -> Self {
        Self {
            depth,
            d0,
            dh,
            degree,
            width_cap: None,
            budget: 20_000,
            trials: 3,
            seed: 0,
            method: Method::FiniteFieldStacked,
            traversal_seed: None,
        }
    }

    fn arch(&self, internal: &[usize]) -> Result<Architecture> {
        let mut w = Vec::with_capacity(self.depth + 1);
        w.push(self.d0);
        w.extend_from_slice(internal);
        w.push(self.dh);
        Architecture::new(w, self.degree)
    }

    /// Effective per-layer caps.
    pub fn caps(&self) -> Result<Vec<usize>> {
        if self.depth < 2 {
            return Err(Error::InvalidConfig("search needs depth >= 2".into()));
        }
        if self.degree < 2 {
            return Err(Error::InvalidConfig("search needs activation degree >= 2".into()));
        }
        if let Some(c) = &self.width_cap {
            if c.len() != self.depth - 1 || c.contains(&0) {
                return Err(Error::InvalidConfig(format!(
                    "width cap {c:?} must list {} positive widths",
                    self.depth - 1
                )));
            }
            return Ok(c.clone());
        }
        let probe = self.arch(&vec![1; self.depth - 1])?;
        (1..self.depth)
            .map(|j| {
                let t = thm2_threshold(&probe, self.depth - j);
                usize::try_from(t)
                    .ok()
                    .filter(|&t| t <= 1 << 16)
                    .ok_or_else(|| Error::InvalidConfig(format!("default cap for layer {j} is too large ({t})")))
            })
            .collect()
    }
}

/// Lowers each width to the largest useful value given the previous one.
fn clip(d0: usize, r: u32, top: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(top.len());
    let mut prev = d0;
    for &t in top {
        let useful = binomial((prev as u64) + u64::from(r) - 1, u64::from(r)).unwrap_or(u64::MAX);
        let v = (t as u64).min(useful) as usize;
        out.push(v);
        prev = v;
    }
    out
}

fn dominates(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// How a candidate's filling status was settled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    /// Closed-form upper bound below the ambient dimension.
    Bound { bound: u64 },
    Oracle { dim: u64, verdict: FillingVerdict, ranks: Vec<u64> },
}

impl Evidence {
    pub fn fills(&self) -> bool {
        matches!(self, Evidence::Oracle { verdict: FillingVerdict::Proved, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighbor {
    pub widths: Vec<usize>,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalArchitecture {
    pub widths: Vec<usize>,
    pub certification: FillingVerdict,
    pub dim: u64,
    /// Every single-coordinate decrement with its non-filling evidence.
    pub decrements: Vec<Neighbor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalFillingSet {
    pub depth: usize,
    pub d0: usize,
    pub dh: usize,
    pub degree: u32,
    pub ambient: u64,
    pub caps: Vec<usize>,
    pub architectures: Vec<MinimalArchitecture>,
    /// Set when the budget ran out; the list may then be incomplete.
    pub partial: bool,
    pub oracle_calls: usize,
    pub bound_pruned: usize,
}

impl MinimalFillingSet {
    pub fn widths(&self) -> BTreeSet<Vec<usize>> {
        self.architectures.iter().map(|a| a.widths.clone()).collect()
    }
}

struct Oracle<'a> {
    spec: &'a SearchSpec,
    ambient: u64,
    cache: HashMap<Vec<usize>, Evidence>,
    calls: usize,
    pruned: usize,
}

impl Oracle<'_> {
    fn evidence(&mut self, internal: &[usize]) -> Result<Evidence> {
        if let Some(e) = self.cache.get(internal) {
            return Ok(e.clone());
        }
        let arch = self.spec.arch(internal)?;
        let bound = SegmentBounds::new(&arch).total();
        let e = if bound < self.ambient {
            self.pruned += 1;
            Evidence::Bound { bound }
        } else {
            if self.calls >= self.spec.budget {
                return Err(Error::BudgetExceeded { budget: self.spec.budget });
            }
            self.calls += 1;
            let est = self.estimate(&arch)?;
            Evidence::Oracle {
                dim: est.dim,
                verdict: est.is_filling,
                ranks: est.trials.iter().map(|t| t.rank).collect(),
            }
        };
        self.cache.insert(internal.to_vec(), e.clone());
        Ok(e)
    }

    fn estimate(&self, arch: &Architecture) -> Result<DimensionEstimate> {
        let config = DimensionConfig {
            method: self.spec.method,
            trials: self.spec.trials,
            seed: derive_seed_from(self.spec.seed, arch.widths()),
            stop_on_full_rank: true,
            ..DimensionConfig::default()
        };
        dimension(arch, &config)
    }

    fn fills(&mut self, internal: &[usize]) -> Result<bool> {
        Ok(self.evidence(internal)?.fills())
    }
}

/// Coordinate-wise descent to a minimal filling element below `top` (which fills).
fn descend(oracle: &mut Oracle<'_>, top: &[usize], order: &[usize]) -> Result<Vec<usize>> {
    let mut cur = top.to_vec();
    for &j in order {
        // smallest v in [1, cur_j] that still fills, by bisection
        let (mut lo, mut hi) = (1usize, cur[j]);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let mut probe = cur.clone();
            probe[j] = mid;
            if oracle.fills(&probe)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        cur[j] = hi;
    }
    Ok(cur)
}

/// All coordinatewise-minimal filling width vectors inside the cap box.
///
/// On budget exhaustion the elements found so far are returned with
/// `partial = true`.
pub fn find_minimal_filling(spec: &SearchSpec) -> Result<MinimalFillingSet> {
    let caps = spec.caps()?;
    let ambient = ambient_dim(&spec.arch(&caps)?)?;
    let mut oracle = Oracle { spec, ambient, cache: HashMap::new(), calls: 0, pruned: 0 };
    let mut rng = spec.traversal_seed.map(ChaCha8Rng::seed_from_u64);
    let m = caps.len();

    let mut minimal: Vec<Vec<usize>> = Vec::new();
    let mut tops: Vec<Vec<usize>> = vec![clip(spec.d0, spec.degree, &caps)];
    let mut partial = false;

    while !tops.is_empty() {
        let pick = match rng.as_mut() {
            Some(r) => (0..tops.len()).collect::<Vec<_>>().choose(r).copied().expect("non-empty"),
            None => tops.len() - 1,
        };
        let top = tops.swap_remove(pick);
        let fills = match oracle.fills(&top) {
            Ok(f) => f,
            Err(Error::BudgetExceeded { .. }) => {
                partial = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if !fills {
            continue;
        }
        let mut order: Vec<usize> = (0..m).collect();
        if let Some(r) = rng.as_mut() {
            order.shuffle(r);
        }
        let found = match descend(&mut oracle, &top, &order) {
            Ok(v) => v,
            Err(Error::BudgetExceeded { .. }) => {
                partial = true;
                break;
            }
            Err(e) => return Err(e),
        };
        // split every box that still reaches above `found`
        let mut next = Vec::with_capacity(tops.len() + m);
        for t in tops.drain(..).chain(std::iter::once(top)) {
            if !dominates(&t, &found) {
                next.push(t);
                continue;
            }
            for j in 0..m {
                if found[j] >= 2 {
                    let mut s = t.clone();
                    s[j] = found[j] - 1;
                    next.push(clip(spec.d0, spec.degree, &s));
                }
            }
        }
        minimal.push(found);
        tops = prune_dominated(next);
    }

    minimal.sort();
    minimal.dedup();
    let mut architectures = Vec::with_capacity(minimal.len());
    for internal in &minimal {
        let mut decrements = Vec::new();
        let mut budget_hit = false;
        for j in 0..m {
            if internal[j] < 2 {
                continue;
            }
            let mut d = internal.clone();
            d[j] -= 1;
            match oracle.evidence(&d) {
                Ok(evidence) => decrements.push(Neighbor { widths: full(spec, &d), evidence }),
                Err(Error::BudgetExceeded { .. }) => {
                    budget_hit = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        partial |= budget_hit;
        let dim = match oracle.evidence(internal)? {
            Evidence::Oracle { dim, .. } => dim,
            Evidence::Bound { bound } => bound,
        };
        architectures.push(MinimalArchitecture {
            widths: full(spec, internal),
            certification: FillingVerdict::Proved,
            dim,
            decrements,
        });
    }

    Ok(MinimalFillingSet {
        depth: spec.depth,
        d0: spec.d0,
        dh: spec.dh,
        degree: spec.degree,
        ambient,
        caps,
        architectures,
        partial,
        oracle_calls: oracle.calls,
        bound_pruned: oracle.pruned,
    })
}

fn full(spec: &SearchSpec, internal: &[usize]) -> Vec<usize> {
    let mut w = Vec::with_capacity(internal.len() + 2);
    w.push(spec.d0);
    w.extend_from_slice(internal);
    w.push(spec.dh);
    w
}

/// Drops duplicate tops and tops whose box lies inside another's.
fn prune_dominated(mut tops: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    tops.sort();
    tops.dedup();
    // larger sums first so a dominating top is seen before what it covers
    tops.sort_by_key(|t| std::cmp::Reverse(t.iter().sum::<usize>()));
    let mut kept: Vec<Vec<usize>> = Vec::with_capacity(tops.len());
    for t in tops {
        if !kept.iter().any(|k| dominates(k, &t)) {
            kept.push(t);
        }
    }
    kept.sort();
    kept
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodalityViolation {
    pub widths: Vec<usize>,
    /// Position of a strict local minimum between larger widths.
    pub index: usize,
}

/// Width vectors that are not weakly increasing then weakly decreasing.
pub fn check_unimodality<'a>(widths: impl IntoIterator<Item = &'a [usize]>) -> Vec<UnimodalityViolation> {
    widths.into_iter().filter_map(|w| valley(w).map(|index| UnimodalityViolation { widths: w.to_vec(), index })).collect()
}

fn valley(w: &[usize]) -> Option<usize> {
    let mut descending_from: Option<usize> = None;
    for i in 1..w.len() {
        if w[i] < w[i - 1] {
            descending_from.get_or_insert(i);
        } else if w[i] > w[i - 1] && descending_from.is_some() {
            return Some(i - 1);
        }
    }
    None
}

/// Unimodality check on a search result.
pub fn check_set_unimodality(set: &MinimalFillingSet) -> Vec<UnimodalityViolation> {
    check_unimodality(set.architectures.iter().map(|a| a.widths.as_slice()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub widths: Vec<usize>,
    pub dims: Vec<u64>,
    pub estimates: Vec<DimensionEstimate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionTable {
    pub degrees: Vec<u32>,
    pub rows: Vec<TableRow>,
}

impl DimensionTable {
    /// One line per architecture, one column per degree.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("widths");
        for r in &self.degrees {
            out.push_str(&format!(",r={r}"));
        }
        out.push('\n');
        for row in &self.rows {
            let w: Vec<String> = row.widths.iter().map(usize::to_string).collect();
            out.push_str(&format!("\"({})\"", w.join(",")));
            for d in &row.dims {
                out.push_str(&format!(",{d}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Dimension of every `(architecture, degree)` cell; each cell's seed is
/// derived from `config.seed` and the cell so rows are independent.
pub fn dimension_table(archs: &[Vec<usize>], degrees: &[u32], config: &DimensionConfig) -> Result<DimensionTable> {
    let mut rows = Vec::with_capacity(archs.len());
    for widths in archs {
        let mut dims = Vec::with_capacity(degrees.len());
        let mut estimates = Vec::with_capacity(degrees.len());
        for &r in degrees {
            let arch = Architecture::new(widths.clone(), r)?;
            let mut key = widths.clone();
            key.push(r as usize);
            let cell = DimensionConfig { seed: derive_seed_from(config.seed, &key), ..config.clone() };
            let est = dimension(&arch, &cell)?;
            dims.push(est.dim);
            estimates.push(est);
        }
        rows.push(TableRow { widths: widths.clone(), dims, estimates });
    }
    Ok(DimensionTable { degrees: degrees.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodality_examples() {
        assert!(check_unimodality([[2usize, 3, 3, 3, 2, 1].as_slice()]).is_empty());
        let v = check_unimodality([[2usize, 3, 2, 3].as_slice()]);
        assert_eq!(v, vec![UnimodalityViolation { widths: vec![2, 3, 2, 3], index: 2 }]);
        assert!(check_unimodality([[4usize, 4, 4, 4].as_slice()]).is_empty());
        assert!(check_unimodality([[1usize, 2, 2, 5].as_slice(), [5usize, 3, 3, 1].as_slice()]).is_empty());
        assert_eq!(check_unimodality([[3usize, 2, 2, 4, 1].as_slice()])[0].index, 2);
    }

    #[test]
    fn clip_limits_useless_widths() {
        assert_eq!(clip(2, 2, &[5, 9, 9, 1]), vec![3, 6, 9, 1]);
        assert_eq!(clip(2, 3, &[10]), vec![4]);
    }

    #[test]
    fn prune_dominated_tops() {
        let t = prune_dominated(vec![vec![2, 2], vec![3, 1], vec![1, 1], vec![2, 2], vec![3, 2]]);
        assert_eq!(t, vec![vec![3, 2]]);
        let t = prune_dominated(vec![vec![2, 1], vec![1, 2]]);
        assert_eq!(t, vec![vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn default_caps_match_sufficient_widths() {
        // h = 3, d_0 = 2, d_h = 1, r = 2: d_2 >= min(4, 5), d_1 >= min(16, 3)
        assert_eq!(SearchSpec::new(3, 2, 1, 2).caps().unwrap(), vec![3, 4]);
        assert!(SearchSpec::new(1, 2, 1, 2).caps().is_err());
        let bad = SearchSpec { width_cap: Some(vec![3]), ..SearchSpec::new(3, 2, 1, 2) };
        assert!(bad.caps().is_err());
    }

    #[test]
    fn depth_three_table_row() {
        let set = find_minimal_filling(&SearchSpec::new(3, 2, 1, 2)).unwrap();
        assert_eq!(set.widths(), BTreeSet::from([vec![2, 2, 2, 1]]));
        assert!(!set.partial);
        let m = &set.architectures[0];
        assert_eq!(m.decrements.len(), 2);
        assert!(m.decrements.iter().all(|n| !n.evidence.fills()));
    }

    #[test]
    fn tiny_budget_is_partial() {
        let spec = SearchSpec { budget: 1, ..SearchSpec::new(4, 2, 1, 2) };
        let set = find_minimal_filling(&spec).unwrap();
        assert!(set.partial);
    }

    #[test]
    fn dimension_table_rows() {
        let t = dimension_table(&[vec![3, 2, 1]], &[2, 3], &DimensionConfig::default()).unwrap();
        assert_eq!(t.rows[0].dims, vec![5, 6]);
        assert_eq!(t.to_csv(), "widths,r=2,r=3\n\"(3,2,1)\",5,6\n");
    }
}
