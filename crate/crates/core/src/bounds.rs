//! Closed-form dimension formulas and filling predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Architecture;
use crate::poly::{binomial, MAX_BASIS_SIZE};

/// `binomial(n + d - 1, d)` saturating at `u64::MAX`; `None` if `d` itself overflowed.
fn forms_count(n: u64, d: Option<u64>) -> u64 {
    match (n, d) {
        (1, _) => 1,
        (_, None) => u64::MAX,
        (n, Some(d)) => n
            .checked_add(d - 1)
            .and_then(|top| binomial(top, d))
            .unwrap_or(u64::MAX),
    }
}

fn output_degree(arch: &Architecture) -> Option<u64> {
    u64::from(arch.degree()).checked_pow(u32::try_from(arch.depth() - 1).ok()?)
}

/// `d_h * binomial(d_0 + r^(h-1) - 1, r^(h-1))`, saturating.
pub fn ambient_dim_saturating(arch: &Architecture) -> u64 {
    let per_output = forms_count(arch.input_dim() as u64, output_degree(arch));
    per_output.saturating_mul(arch.output_dim() as u64)
}

/// Dimension of the ambient space of output maps.
///
/// Fails with `DegreeOverflow` when the per-output basis would exceed the
/// materialization guard.
pub fn ambient_dim(arch: &Architecture) -> Result<u64> {
    let per_output = forms_count(arch.input_dim() as u64, output_degree(arch));
    if per_output > MAX_BASIS_SIZE {
        return Err(Error::DegreeOverflow(format!(
            "{arch}: per-output basis exceeds {MAX_BASIS_SIZE} monomials"
        )));
    }
    Ok(per_output * arch.output_dim() as u64)
}

/// Parameter count minus the symmetry fiber, `d_h + sum_i (d_{i-1} - 1) d_i`.
pub fn fiber_bound(arch: &Architecture) -> u64 {
    let w = arch.widths();
    let sum: usize = w.windows(2).map(|p| (p[0] - 1) * p[1]).sum();
    (sum + arch.output_dim()) as u64
}

/// The naive upper bound: `min(fiber_bound, ambient)`.
pub fn naive_bound(arch: &Architecture) -> u64 {
    fiber_bound(arch).min(ambient_dim_saturating(arch))
}

/// Where sub-architecture dimensions came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubDimMode {
    /// Computed by the dimension oracle.
    Oracle,
    /// Upper bounds (naive, ambient, and recursive splits of the segment).
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitBound {
    pub k: usize,
    pub prefix: u64,
    pub suffix: u64,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursiveBound {
    pub best: u64,
    pub splits: Vec<SplitBound>,
    pub mode: SubDimMode,
}

/// `min_k dim(d_0..d_k) + dim(d_k..d_h) - d_k` with sub-dimensions supplied by `oracle`.
pub fn recursive_bound(
    arch: &Architecture,
    mut oracle: impl FnMut(&Architecture) -> Result<u64>,
) -> Result<RecursiveBound> {
    recursive_with(arch, SubDimMode::Oracle, |a| oracle(a))
}

/// [`recursive_bound`] where each segment is itself bounded recursively from
/// the closed forms.
pub fn recursive_bound_closed_form(arch: &Architecture) -> Result<RecursiveBound> {
    let table = SegmentBounds::new(arch);
    recursive_with(arch, SubDimMode::Bounds, |a| {
        // sub-architectures are contiguous slices; find the slice by width match
        Ok(table.lookup(a))
    })
}

fn recursive_with(
    arch: &Architecture,
    mode: SubDimMode,
    mut sub: impl FnMut(&Architecture) -> Result<u64>,
) -> Result<RecursiveBound> {
    let h = arch.depth();
    if h < 2 {
        return Err(Error::InvalidConfig(format!("recursive bound needs depth >= 2, got {arch}")));
    }
    let mut splits = Vec::with_capacity(h - 1);
    for k in 1..h {
        let prefix = sub(&arch.slice(0, k)?)?;
        let suffix = sub(&arch.slice(k, h)?)?;
        let value = (prefix + suffix).saturating_sub(arch.widths()[k] as u64);
        splits.push(SplitBound { k, prefix, suffix, value });
    }
    let best = splits.iter().map(|s| s.value).min().expect("h >= 2 gives a split");
    Ok(RecursiveBound { best, splits, mode })
}

/// Best closed-form bound for every contiguous segment `(d_a..d_b)`.
#[derive(Debug, Clone)]
pub struct SegmentBounds {
    widths: Vec<usize>,
    bound: Vec<Vec<u64>>,
}

impl SegmentBounds {
    pub fn new(arch: &Architecture) -> Self {
        let w = arch.widths().to_vec();
        let n = w.len();
        let mut bound = vec![vec![0u64; n]; n];
        for len in 1..n {
            for a in 0..n - len {
                let b = a + len;
                let seg = Architecture::new(w[a..=b].to_vec(), arch.degree()).expect("slice of a valid architecture");
                let mut best = naive_bound(&seg);
                for k in a + 1..b {
                    best = best.min((bound[a][k] + bound[k][b]).saturating_sub(w[k] as u64));
                }
                bound[a][b] = best;
            }
        }
        Self { widths: w, bound }
    }

    /// Bound for the whole architecture.
    pub fn total(&self) -> u64 {
        self.bound[0][self.widths.len() - 1]
    }

    pub fn segment(&self, a: usize, b: usize) -> u64 {
        self.bound[a][b]
    }

    fn lookup(&self, sub: &Architecture) -> u64 {
        let sw = sub.widths();
        let n = self.widths.len();
        for a in 0..n {
            let b = a + sw.len() - 1;
            if b < n && &self.widths[a..=b] == sw {
                return self.bound[a][b];
            }
        }
        unreachable!("sub-architecture is a slice of the table's architecture")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AhResult {
    /// `min(d_0 d_1, binomial(d_0 + r - 1, r))`.
    pub expected: u64,
    pub exceptional: bool,
    /// True dimension on the exceptional families.
    pub corrected: Option<u64>,
}

/// Dimensions of the four sporadic exceptional cases `(r, d_0, d_1, dim)`,
/// frozen from the Jacobian-rank oracle.
///
/// The quartic case in five variables is defective at 14 summands; at 15 the
/// oracle reaches full rank 70.
pub const AH_SPORADIC: [(u32, usize, usize, u64); 4] = [(3, 5, 7, 34), (4, 3, 5, 14), (4, 4, 9, 34), (4, 5, 14, 69)];

/// Dimension of sums of `d_1` `r`-th powers of linear forms in `d_0`
/// variables, i.e. of the shallow single-output architecture `(d_0, d_1, 1)`.
pub fn alexander_hirschowitz(d0: usize, d1: usize, r: u32) -> AhResult {
    let expected = ((d0 * d1) as u64).min(forms_count(d0 as u64, Some(u64::from(r))));
    if r == 2 && 2 <= d1 && d1 < d0 {
        let corrected = (d1 * d0) as u64 - binomial(d1 as u64, 2).expect("small");
        return AhResult { expected, exceptional: true, corrected: Some(corrected) };
    }
    if let Some(&(_, _, _, dim)) = AH_SPORADIC.iter().find(|&&(sr, s0, s1, _)| sr == r && s0 == d0 && s1 == d1) {
        return AhResult { expected, exceptional: true, corrected: Some(dim) };
    }
    AhResult { expected, exceptional: false, corrected: None }
}

/// Sufficient condition for filling: every
/// `d_{h-i} >= min(d_h r^(i d_0), binomial(r^(h-i) + d_0 - 1, r^(h-i)))`.
pub fn thm2_filling_guaranteed(arch: &Architecture) -> bool {
    if arch.degree() < 2 {
        return false;
    }
    (1..arch.depth()).all(|i| arch.widths()[arch.depth() - i] as u64 >= thm2_threshold(arch, i))
}

/// The width required at layer `h - i` by [`thm2_filling_guaranteed`].
pub fn thm2_threshold(arch: &Architecture, i: usize) -> u64 {
    let r = u64::from(arch.degree());
    let d0 = arch.input_dim() as u64;
    let dh = arch.output_dim() as u64;
    let by_power = u32::try_from(i as u64 * d0)
        .ok()
        .and_then(|e| r.checked_pow(e))
        .map_or(u64::MAX, |p| p.saturating_mul(dh));
    let deg = u32::try_from(arch.depth() - i).ok().and_then(|e| r.checked_pow(e));
    by_power.min(forms_count(d0, deg))
}

/// Internal layers `i` with `d_i <= 2 d_0 - 2`: asymptotic bottlenecks.
pub fn bottleneck_flags(arch: &Architecture) -> Vec<usize> {
    let d0 = arch.input_dim();
    if arch.degree() < 2 || d0 < 2 {
        return Vec::new();
    }
    (1..arch.depth()).filter(|&i| arch.widths()[i] <= 2 * d0 - 2).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub ambient: u64,
    pub naive: u64,
    /// Absent for single-layer architectures.
    pub recursive: Option<RecursiveBound>,
    pub ah: Option<AhResult>,
    pub thm2_filling_guaranteed: bool,
    pub bottleneck_hits: Vec<usize>,
    pub notes: Vec<String>,
}

/// All closed-form bounds; the recursive bound uses segment bounds.
pub fn bound_report(arch: &Architecture) -> Result<BoundReport> {
    let recursive = if arch.depth() >= 2 { Some(recursive_bound_closed_form(arch)?) } else { None };
    Ok(assemble(arch, recursive))
}

/// All closed-form bounds, with the recursive bound from oracle sub-dimensions.
pub fn bound_report_with_oracle(
    arch: &Architecture,
    oracle: impl FnMut(&Architecture) -> Result<u64>,
) -> Result<BoundReport> {
    let recursive = if arch.depth() >= 2 { Some(recursive_bound(arch, oracle)?) } else { None };
    Ok(assemble(arch, recursive))
}

fn assemble(arch: &Architecture, recursive: Option<RecursiveBound>) -> BoundReport {
    let ah = (arch.depth() == 2 && arch.output_dim() == 1)
        .then(|| alexander_hirschowitz(arch.input_dim(), arch.widths()[1], arch.degree()));
    let bottleneck_hits = bottleneck_flags(arch);
    let mut notes = Vec::new();
    if !bottleneck_hits.is_empty() {
        notes.push(format!(
            "layers {bottleneck_hits:?} have width <= 2*d_0 - 2 = {}: asymptotic bottlenecks (non-filling for all large depth)",
            2 * arch.input_dim() - 2
        ));
    }
    if arch.degree() >= 2 && arch.input_dim() >= 2 {
        let wide: Vec<usize> = (1..arch.depth()).filter(|&i| arch.widths()[i] == 2 * arch.input_dim()).collect();
        if !wide.is_empty() {
            notes.push(format!(
                "layers {wide:?} have width 2*d_0: not an asymptotic bottleneck if a conjecture on Hilbert functions of powers holds (informational)"
            ));
        }
    }
    BoundReport {
        ambient: ambient_dim_saturating(arch),
        naive: naive_bound(arch),
        recursive,
        ah,
        thm2_filling_guaranteed: thm2_filling_guaranteed(arch),
        bottleneck_hits,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(w: &str, r: u32) -> Architecture {
        Architecture::parse(w, r).unwrap()
    }

    #[test]
    fn ambient_examples() {
        assert_eq!(ambient_dim(&arch("2,2,3", 2)).unwrap(), 9);
        assert_eq!(ambient_dim(&arch("3,5,4", 1)).unwrap(), 12);
        assert_eq!(ambient_dim(&arch("2,2,2,1", 2)).unwrap(), 5);
        assert_eq!(ambient_dim(&arch("2,3,2", 3)).unwrap(), 8);
        assert!(matches!(ambient_dim(&arch("6,2,2,2,2,1", 6)), Err(Error::DegreeOverflow(_))));
        assert_eq!(ambient_dim(&arch("1,2,2,2,2,2,2,2,1", 9)).unwrap(), 1);
    }

    #[test]
    fn naive_examples() {
        assert_eq!(naive_bound(&arch("2,3,2", 6)), 9);
        assert_eq!(naive_bound(&arch("3,2,1", 2)), 6);
        assert_eq!(naive_bound(&arch("4,3", 2)), 12);
        assert_eq!(naive_bound(&arch("2,2,2,2,1", 2)), 8);
    }

    #[test]
    fn recursive_split_example() {
        // sub-dimensions: (2,3,2) -> 6, (2,3) -> 6 at r = 2
        let a = arch("2,3,2,3", 2);
        let rb = recursive_bound(&a, |sub| {
            Ok(match sub.widths() {
                [2, 3, 2] | [2, 3] => 6,
                _ => naive_bound(sub),
            })
        })
        .unwrap();
        let k2 = rb.splits.iter().find(|s| s.k == 2).unwrap();
        assert_eq!(k2.value, 10);
        assert!(rb.best <= 10);
    }

    #[test]
    fn recursive_shallow_is_naive() {
        for (w, r) in [("3,4,2", 2), ("2,5,3", 3), ("4,2,2", 2)] {
            let a = arch(w, r);
            let d = a.widths();
            let rb = recursive_bound(&a, |sub| Ok((sub.widths()[0] * sub.widths()[1]) as u64)).unwrap();
            assert_eq!(rb.best as usize, d[1] * d[0] + d[2] * d[1] - d[1]);
            assert_eq!(rb.best, fiber_bound(&a));
        }
    }

    #[test]
    fn recursive_needs_depth_two() {
        assert!(recursive_bound(&arch("3,4", 2), |_| Ok(0)).is_err());
    }

    #[test]
    fn ah_examples() {
        let a = alexander_hirschowitz(3, 2, 2);
        assert!(a.exceptional);
        assert_eq!(a.corrected, Some(5));
        let b = alexander_hirschowitz(3, 2, 3);
        assert_eq!(b, AhResult { expected: 6, exceptional: false, corrected: None });
        let c = alexander_hirschowitz(3, 5, 4);
        assert!(c.exceptional);
        assert_eq!(c.expected, 15);
        assert!(!alexander_hirschowitz(3, 3, 2).exceptional);
        assert!(!alexander_hirschowitz(3, 1, 2).exceptional);
        assert!(alexander_hirschowitz(5, 14, 4).exceptional);
        assert!(!alexander_hirschowitz(5, 15, 4).exceptional);
    }

    #[test]
    fn thm2_examples() {
        assert!(thm2_filling_guaranteed(&arch("2,3,4,1", 2)));
        assert!(!thm2_filling_guaranteed(&arch("2,2,2,1", 2)));
        assert_eq!(thm2_threshold(&arch("2,3,4,1", 2), 1), 4);
        assert_eq!(thm2_threshold(&arch("2,3,4,1", 2), 2), 3);
        assert!(!thm2_filling_guaranteed(&arch("2,3,4,1", 1)));
        // single layer: vacuous
        assert!(thm2_filling_guaranteed(&arch("2,3", 2)));
    }

    #[test]
    fn bottleneck_examples() {
        assert_eq!(bottleneck_flags(&arch("2,2,3,2,1", 2)), vec![1, 3]);
        assert!(bottleneck_flags(&arch("3,5,6,1", 2)).is_empty());
        assert_eq!(bottleneck_flags(&arch("2,2,2,2,1", 2)), vec![1, 2, 3]);
        assert!(bottleneck_flags(&arch("2,2,2,1", 1)).is_empty());
    }

    #[test]
    fn segment_bounds_never_exceed_naive() {
        let a = arch("2,3,3,4,4,2,1", 2);
        let s = SegmentBounds::new(&a);
        assert!(s.total() <= naive_bound(&a));
        assert_eq!(recursive_bound_closed_form(&a).unwrap().best.min(naive_bound(&a)), s.total());
    }
}
