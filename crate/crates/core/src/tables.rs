//! Reference tables with their expected values, and runners that regenerate
//! and diff them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dimension::{DimensionConfig, Method};
use crate::error::Result;
use crate::search::{check_set_unimodality, dimension_table, find_minimal_filling, DimensionTable, MinimalFillingSet, SearchSpec, UnimodalityViolation};

/// Degrees of the dimension table columns.
pub const DIM_TABLE_DEGREES: [u32; 5] = [2, 3, 4, 5, 6];

/// Rows of the dimension table: widths and the expected dimension per degree.
pub const DIM_TABLE: [(&[usize], [u64; 5]); 4] = [
    (&[3, 2, 1], [5, 6, 6, 6, 6]),
    (&[2, 3, 2], [6, 8, 9, 9, 9]),
    (&[2, 3, 2, 3], [10, 12, 13, 13, 13]),
    (&[2, 3, 2, 3, 4], [16, 21, 22, 22, 22]),
];

/// Minimal filling widths for `r = 2`, `d_0 = 2`, `d_h = 1`, by depth.
pub const FILLING_TABLE: [(usize, &[&[usize]]); 7] = [
    (3, &[&[2, 2, 2, 1]]),
    (4, &[&[2, 3, 3, 2, 1]]),
    (5, &[&[2, 3, 3, 3, 2, 1]]),
    (6, &[&[2, 3, 3, 4, 4, 2, 1]]),
    (7, &[&[2, 3, 4, 5, 6, 4, 2, 1]]),
    (8, &[&[2, 3, 4, 5, 7, 7, 6, 2, 1], &[2, 3, 5, 5, 7, 7, 5, 2, 1]]),
    (9, &[&[2, 3, 4, 8, 8, 8, 8, 8, 4, 1], &[2, 3, 4, 5, 8, 9, 8, 8, 4, 1]]),
];

/// Deepest row of the filling table run without `extended`.
pub const FILLING_TABLE_BASE_DEPTH: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDiff {
    pub widths: Vec<usize>,
    pub degree: u32,
    pub expected: u64,
    pub computed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimTableReport {
    pub table: DimensionTable,
    pub matched: usize,
    pub total: usize,
    pub mismatches: Vec<CellDiff>,
}

impl DimTableReport {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Recomputes the dimension table and compares every cell.
pub fn reproduce_dim_table(method: Method, seed: u64) -> Result<DimTableReport> {
    let archs: Vec<Vec<usize>> = DIM_TABLE.iter().map(|(w, _)| w.to_vec()).collect();
    let config = DimensionConfig { method, seed, ..DimensionConfig::default() };
    let table = dimension_table(&archs, &DIM_TABLE_DEGREES, &config)?;
    let mut mismatches = Vec::new();
    let mut total = 0;
    for (row, (_, expected)) in table.rows.iter().zip(DIM_TABLE.iter()) {
        for ((&computed, &expected), &degree) in row.dims.iter().zip(expected).zip(&DIM_TABLE_DEGREES) {
            total += 1;
            if computed != expected {
                mismatches.push(CellDiff { widths: row.widths.clone(), degree, expected, computed });
            }
        }
    }
    Ok(DimTableReport { matched: total - mismatches.len(), total, mismatches, table })
}

/// How a filling-table row is compared with the search result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowRule {
    /// The minimal set equals the listed vectors.
    Exact,
    /// Every listed vector is in the minimal set.
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingRowReport {
    pub depth: usize,
    pub rule: RowRule,
    pub expected: Vec<Vec<usize>>,
    pub missing: Vec<Vec<usize>>,
    /// Minimal elements not listed in the table.
    pub extra: Vec<Vec<usize>>,
    pub matches: bool,
    pub violations: Vec<UnimodalityViolation>,
    pub search: MinimalFillingSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingTableReport {
    pub extended: bool,
    pub rows: Vec<FillingRowReport>,
}

impl FillingTableReport {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }

    pub fn partial(&self) -> bool {
        self.rows.iter().any(|r| r.search.partial)
    }
}

/// Default oracle budget per filling-table row.
pub fn filling_row_budget(depth: usize) -> usize {
    if depth <= FILLING_TABLE_BASE_DEPTH {
        20_000
    } else {
        200_000
    }
}

/// Searches one filling-table depth and compares it with the listed vectors.
pub fn reproduce_filling_row(depth: usize, method: Method, seed: u64, budget: Option<usize>) -> Result<FillingRowReport> {
    let (_, listed) = FILLING_TABLE
        .iter()
        .find(|(h, _)| *h == depth)
        .ok_or_else(|| crate::Error::InvalidConfig(format!("no table row for depth {depth}")))?;
    let spec = SearchSpec {
        budget: budget.unwrap_or_else(|| filling_row_budget(depth)),
        seed,
        method,
        ..SearchSpec::new(depth, 2, 1, 2)
    };
    let search = find_minimal_filling(&spec)?;
    let found = search.widths();
    let expected: BTreeSet<Vec<usize>> = listed.iter().map(|w| w.to_vec()).collect();
    let rule = if depth <= FILLING_TABLE_BASE_DEPTH { RowRule::Exact } else { RowRule::Contains };
    let missing: Vec<Vec<usize>> = expected.difference(&found).cloned().collect();
    let extra: Vec<Vec<usize>> = found.difference(&expected).cloned().collect();
    let matches = !search.partial
        && match rule {
            RowRule::Exact => missing.is_empty() && extra.is_empty(),
            RowRule::Contains => missing.is_empty(),
        };
    Ok(FillingRowReport {
        depth,
        rule,
        expected: expected.into_iter().collect(),
        missing,
        extra,
        matches,
        violations: check_set_unimodality(&search),
        search,
    })
}

/// Depths `3..=7`, plus `8` and `9` when `extended`.
pub fn reproduce_filling_table(extended: bool, method: Method, seed: u64, budget: Option<usize>) -> Result<FillingTableReport> {
    let rows = FILLING_TABLE
        .iter()
        .map(|(h, _)| *h)
        .filter(|&h| extended || h <= FILLING_TABLE_BASE_DEPTH)
        .map(|h| reproduce_filling_row(h, method, seed, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(FillingTableReport { extended, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_table_reproduces() {
        let r = reproduce_dim_table(Method::FiniteFieldStacked, 0).unwrap();
        assert_eq!(r.total, 20);
        assert!(r.all_match(), "{:?}", r.mismatches);
    }

    #[test]
    fn shallow_filling_rows_match() {
        for h in 3..=6 {
            let row = reproduce_filling_row(h, Method::FiniteFieldStacked, 0, None).unwrap();
            assert!(row.matches, "depth {h}: missing {:?} extra {:?}", row.missing, row.extra);
            assert!(row.violations.is_empty());
        }
    }

    #[test]
    fn listed_vectors_have_listed_depth() {
        for (h, rows) in FILLING_TABLE {
            assert!(rows.iter().all(|w| w.len() == h + 1 && w[0] == 2 && w[h] == 1));
        }
    }
}
