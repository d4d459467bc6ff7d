use std::ops::{Index, IndexMut};

use super::field::{Field, PrimeField};
use crate::error::{Error, Result};

/// Dense row-major matrix over an exact field.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> ExactMatrix<F> {
    pub fn new(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Self {
        assert_eq!(rows * cols, data.len(), "data length must equal rows * cols");
        Self { field, rows, cols, data }
    }

    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        Self { field, rows, cols, data }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = m.field.one();
        }
        m
    }

    pub fn from_fn(field: F, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F::Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { field, rows, cols, data }
    }

    /// Builds a matrix from signed integers mapped into `field`.
    pub fn from_i64(field: F, rows: usize, cols: usize, values: &[i64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        let data = values.iter().map(|&v| field.from_i64(v)).collect();
        Self { field, rows, cols, data }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[F::Elem] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F::Elem] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.field.clone(), self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    /// Stacks `other` below `self`.
    pub fn vstack(mut self, other: &Self) -> Result<Self> {
        if self.cols != other.cols || self.field != other.field {
            return Err(Error::ShapeMismatch(format!(
                "cannot stack {}x{} on {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        self.data.extend_from_slice(&other.data);
        self.rows += other.rows;
        Ok(self)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if self.field != rhs.field {
            return Err(Error::FieldMismatch);
        }
        let f = &self.field;
        let mut out = Self::zeros(f.clone(), self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = f.mul_add(&out.data[i * rhs.cols + j], a, &rhs[(k, j)]);
                }
            }
        }
        Ok(out)
    }

    /// Exact rank over the matrix's field.
    pub fn rank(&self) -> usize {
        self.field.rank(self)
    }

    /// Solves `self * X = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        solve(self, rhs)
    }

    /// Applies `g` entrywise into another field.
    pub fn map_into<G: Field>(&self, target: G, mut g: impl FnMut(&F::Elem) -> G::Elem) -> ExactMatrix<G> {
        let data = self.data.iter().map(&mut g).collect();
        ExactMatrix { field: target, rows: self.rows, cols: self.cols, data }
    }
}

impl<F: Field> Index<(usize, usize)> for ExactMatrix<F> {
    type Output = F::Elem;
    fn index(&self, (i, j): (usize, usize)) -> &F::Elem {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<F: Field> IndexMut<(usize, usize)> for ExactMatrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F::Elem {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Exact rank of `m`.
pub fn rank<F: Field>(m: &ExactMatrix<F>) -> usize {
    m.rank()
}

/// Rank by ordinary row reduction; every pivot is inverted.
pub(crate) fn gaussian_rank<F: Field>(m: &ExactMatrix<F>) -> usize {
    let f = &m.field;
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !f.is_zero(&a[r * cols + c])) else {
            continue;
        };
        if piv != rank {
            for j in c..cols {
                a.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = f.inv(&a[rank * cols + c]).expect("pivot is nonzero");
        for j in c..cols {
            a[rank * cols + j] = f.mul(&a[rank * cols + j], &inv);
        }
        let (top, bottom) = a.split_at_mut((rank + 1) * cols);
        let pivot_row = &top[rank * cols..];
        for row in bottom.chunks_exact_mut(cols) {
            if f.is_zero(&row[c]) {
                continue;
            }
            let factor = f.neg(&row[c]);
            for j in c..cols {
                row[j] = f.mul_add(&row[j], &factor, &pivot_row[j]);
            }
        }
        rank += 1;
    }
    rank
}

/// Elimination over `F_p` with lazy reduction: non-pivot entries are kept
/// below `2p^2` and only pivot rows and multipliers are reduced.
pub(crate) fn prime_rank(f: &PrimeField, m: &ExactMatrix<PrimeField>) -> usize {
    let p = f.modulus();
    let p2 = p * p;
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut pivot = vec![0u32; cols];
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let mut piv = None;
        for r in rank..rows {
            let v = f.reduce_wide(a[r * cols + c]);
            a[r * cols + c] = v;
            if v != 0 && piv.is_none() {
                piv = Some(r);
            }
        }
        let Some(piv) = piv else { continue };
        if piv != rank {
            for j in c..cols {
                a.swap(piv * cols + j, rank * cols + j);
            }
        }
        for j in c..cols {
            pivot[j] = f.reduce_wide(a[rank * cols + j]) as u32;
        }
        let inv = f.inv(&u64::from(pivot[c])).expect("pivot is nonzero");
        for row in a[(rank + 1) * cols..].chunks_exact_mut(cols) {
            if row[c] == 0 {
                continue;
            }
            let factor = u64::from(f.neg(&f.mul(&row[c], &inv)) as u32);
            row[c] = 0;
            for (x, &v) in row[c + 1..].iter_mut().zip(&pivot[c + 1..]) {
                // branch-free `y mod' p2`: the sign bit of y - p2 marks y < p2
                let z = (*x + factor * u64::from(v)).wrapping_sub(p2);
                *x = z.wrapping_add(0u64.wrapping_sub(z >> 63) & p2);
            }
        }
        rank += 1;
    }
    rank
}

/// Gauss-Jordan solve of `m * X = b`.
pub fn solve<F: Field>(m: &ExactMatrix<F>, b: &ExactMatrix<F>) -> Result<ExactMatrix<F>> {
    if m.rows != m.cols {
        return Err(Error::ShapeMismatch(format!("solve needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    if b.rows != m.rows {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side has {} rows, matrix has {}",
            b.rows, m.rows
        )));
    }
    if m.field != b.field {
        return Err(Error::FieldMismatch);
    }
    let f = &m.field;
    let n = m.rows;
    let k = b.cols;
    let w = n + k;
    let mut a = Vec::with_capacity(n * w);
    for i in 0..n {
        a.extend_from_slice(m.row(i));
        a.extend_from_slice(b.row(i));
    }
    for c in 0..n {
        let piv = (c..n).find(|&r| !f.is_zero(&a[r * w + c])).ok_or(Error::SingularMatrix)?;
        if piv != c {
            for j in 0..w {
                a.swap(piv * w + j, c * w + j);
            }
        }
        let inv = f.inv(&a[c * w + c]).expect("pivot is nonzero");
        for j in c..w {
            a[c * w + j] = f.mul(&a[c * w + j], &inv);
        }
        let pivot_row: Vec<F::Elem> = a[c * w..(c + 1) * w].to_vec();
        for r in 0..n {
            if r == c || f.is_zero(&a[r * w + c]) {
                continue;
            }
            let factor = f.neg(&a[r * w + c]);
            for j in c..w {
                a[r * w + j] = f.mul_add(&a[r * w + j], &factor, &pivot_row[j]);
            }
        }
    }
    let data = (0..n).flat_map(|i| a[i * w + n..(i + 1) * w].to_vec()).collect();
    Ok(ExactMatrix::new(f.clone(), n, k, data))
}
