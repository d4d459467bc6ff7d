//! The polynomial network map `theta -> W_h rho_r ... rho_r W_1 x` and its
//! tensor-decomposition forms.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{ExactMatrix, Field, PrimeField};
use crate::error::{Error, Result};
use crate::poly::{HomogPoly, MonomialBasis, PolyVector, MAX_BASIS_SIZE};

/// Widths `(d_0, ..., d_h)` and activation degree `r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Architecture {
    widths: Vec<usize>,
    degree: u32,
}

impl Architecture {
    pub fn new(widths: Vec<usize>, degree: u32) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "architecture needs at least one layer, got widths {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidConfig(format!("zero width in {widths:?}")));
        }
        if degree == 0 {
            return Err(Error::InvalidConfig("activation degree must be at least 1".into()));
        }
        Ok(Self { widths, degree })
    }

    /// Parses a comma-separated width list such as `"2,3,2"`.
    pub fn parse(widths: &str, degree: u32) -> Result<Self> {
        let widths = widths
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidConfig(format!("malformed width {w:?} in {widths:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(widths, degree)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of layers `h`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        self.widths[self.depth()]
    }

    pub fn internal_widths(&self) -> &[usize] {
        &self.widths[1..self.depth()]
    }

    /// Degree `r^(h-1)` of the output polynomials.
    pub fn output_degree(&self) -> Result<u32> {
        let exp = u32::try_from(self.depth() - 1).unwrap_or(u32::MAX);
        self.degree
            .checked_pow(exp)
            .ok_or_else(|| Error::DegreeOverflow(format!("{}^{} overflows", self.degree, exp)))
    }

    /// Parameter count `sum_i d_i d_{i-1}`.
    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// Shape `(rows, cols)` of `W_i` for `i = 1..=h`.
    pub fn layer_shape(&self, i: usize) -> (usize, usize) {
        (self.widths[i], self.widths[i - 1])
    }

    /// `(d_a, ..., d_b)` at the same degree.
    pub fn slice(&self, a: usize, b: usize) -> Result<Self> {
        Self::new(self.widths[a..=b].to_vec(), self.degree)
    }

    pub fn with_widths(&self, widths: Vec<usize>) -> Result<Self> {
        Self::new(widths, self.degree)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.widths.iter().map(usize::to_string).collect();
        write!(f, "({}), r={}", ws.join(","), self.degree)
    }
}

/// Parses `"2,3,2"` into widths only.
pub fn parse_widths(s: &str) -> Result<Vec<usize>> {
    Architecture::parse(s, 1).map(|a| a.widths)
}

impl FromStr for Architecture {
    type Err = Error;

    /// Accepts `"2,3,2;r=3"` (degree defaults to 2 when absent).
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(";r=") {
            Some((w, r)) => {
                let r = r
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("malformed degree in {s:?}")))?;
                Self::parse(w, r)
            }
            None => Self::parse(s, 2),
        }
    }
}

/// Integer weights, kept so the same parameter point can be mapped into any field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerWeights {
    pub layers: Vec<Vec<i64>>,
}

impl IntegerWeights {
    /// Uniform integers in `[-bound, bound]`.
    pub fn sample(arch: &Architecture, bound: i64, rng: &mut impl Rng) -> Self {
        let layers = (1..=arch.depth())
            .map(|i| {
                let (r, c) = arch.layer_shape(i);
                (0..r * c).map(|_| rng.gen_range(-bound..=bound)).collect()
            })
            .collect();
        Self { layers }
    }

    pub fn into_field<F: Field>(&self, arch: &Architecture, field: &F) -> Result<WeightAssignment<F>> {
        if self.layers.len() != arch.depth() {
            return Err(Error::ShapeMismatch(format!(
                "{} weight layers for depth {}",
                self.layers.len(),
                arch.depth()
            )));
        }
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, vals)| {
                let (r, c) = arch.layer_shape(i + 1);
                if vals.len() != r * c {
                    return Err(Error::ShapeMismatch(format!("layer {} has {} weights, need {}", i + 1, vals.len(), r * c)));
                }
                Ok(ExactMatrix::from_i64(field.clone(), r, c, vals))
            })
            .collect::<Result<_>>()?;
        WeightAssignment::new(arch, layers)
    }
}

/// The weight matrices `W_1, ..., W_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment<F: Field> {
    layers: Vec<ExactMatrix<F>>,
}

impl<F: Field> WeightAssignment<F> {
    pub fn new(arch: &Architecture, layers: Vec<ExactMatrix<F>>) -> Result<Self> {
        if layers.len() != arch.depth() {
            return Err(Error::ShapeMismatch(format!("{} layers for depth {}", layers.len(), arch.depth())));
        }
        for (i, w) in layers.iter().enumerate() {
            if w.shape() != arch.layer_shape(i + 1) {
                return Err(Error::ShapeMismatch(format!(
                    "W_{} is {:?}, architecture needs {:?}",
                    i + 1,
                    w.shape(),
                    arch.layer_shape(i + 1)
                )));
            }
            if w.field() != layers[0].field() {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(Self { layers })
    }

    pub fn zeros(arch: &Architecture, field: F) -> Self {
        let layers = (1..=arch.depth())
            .map(|i| {
                let (r, c) = arch.layer_shape(i);
                ExactMatrix::zeros(field.clone(), r, c)
            })
            .collect();
        Self { layers }
    }

    /// `W_i` for `i = 1..=h`.
    pub fn layer(&self, i: usize) -> &ExactMatrix<F> {
        &self.layers[i - 1]
    }

    pub fn layer_mut(&mut self, i: usize) -> &mut ExactMatrix<F> {
        &mut self.layers[i - 1]
    }

    pub fn layers(&self) -> &[ExactMatrix<F>] {
        &self.layers
    }

    pub fn field(&self) -> &F {
        self.layers[0].field()
    }

    /// Weights flattened layer-major, row-major within a layer.
    pub fn flatten(&self) -> Vec<F::Elem> {
        self.layers.iter().flat_map(|w| w.data().iter().cloned()).collect()
    }
}

impl WeightAssignment<PrimeField> {
    /// Uniform sample over `F_p`.
    pub fn random(arch: &Architecture, field: PrimeField, rng: &mut impl Rng) -> Self {
        let layers = (1..=arch.depth())
            .map(|i| {
                let (r, c) = arch.layer_shape(i);
                let data = (0..r * c).map(|_| rng.gen_range(0..field.modulus())).collect();
                ExactMatrix::new(field, r, c, data)
            })
            .collect();
        Self { layers }
    }
}

fn check_shapes<F: Field>(arch: &Architecture, theta: &WeightAssignment<F>) -> Result<()> {
    if theta.layers.len() != arch.depth() {
        return Err(Error::ShapeMismatch(format!("{} layers for depth {}", theta.layers.len(), arch.depth())));
    }
    for (i, w) in theta.layers.iter().enumerate() {
        if w.shape() != arch.layer_shape(i + 1) {
            return Err(Error::ShapeMismatch(format!("W_{} has shape {:?}", i + 1, w.shape())));
        }
    }
    Ok(())
}

/// `z -> W z` on a vector of polynomials.
fn apply_linear<F: Field>(w: &ExactMatrix<F>, z: &[HomogPoly<F>]) -> Result<Vec<HomogPoly<F>>> {
    let f = w.field();
    let first = &z[0];
    (0..w.rows())
        .map(|j| {
            let mut acc = HomogPoly::zero(f.clone(), first.nvars(), first.degree())?;
            for (l, zl) in z.iter().enumerate() {
                acc.add_scaled(&w[(j, l)], zl)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Output polynomials of the network at `theta`: `d_h` forms of degree
/// `r^(h-1)` in `d_0` variables.
pub fn forward<F: Field>(arch: &Architecture, theta: &WeightAssignment<F>) -> Result<PolyVector<F>> {
    check_shapes(arch, theta)?;
    let degree = arch.output_degree()?;
    MonomialBasis::shared(arch.input_dim(), degree)?;
    let f = theta.field();
    let w1 = theta.layer(1);
    let mut z: Vec<HomogPoly<F>> = (0..w1.rows()).map(|j| HomogPoly::linear(f.clone(), w1.row(j))).collect::<Result<_>>()?;
    for i in 2..=arch.depth() {
        let a: Vec<HomogPoly<F>> = z.iter().map(|p| p.power(arch.degree())).collect::<Result<_>>()?;
        z = apply_linear(theta.layer(i), &a)?;
    }
    PolyVector::new(z)
}

/// Shallow network as a sum of `d_1` partially symmetric rank-one terms:
/// component `k` is `sum_i W2[k,i] (W1[i,:] . x)^r`.
pub fn forward_cp_shallow<F: Field>(w2: &ExactMatrix<F>, w1: &ExactMatrix<F>, r: u32) -> Result<PolyVector<F>> {
    if w2.cols() != w1.rows() {
        return Err(Error::ShapeMismatch(format!(
            "W2 has {} columns, W1 has {} rows",
            w2.cols(),
            w1.rows()
        )));
    }
    let f = w1.field();
    let powers: Vec<HomogPoly<F>> = (0..w1.rows())
        .map(|i| HomogPoly::linear(f.clone(), w1.row(i))?.power(r))
        .collect::<Result<_>>()?;
    let out = (0..w2.rows())
        .map(|k| {
            let mut acc = HomogPoly::zero(f.clone(), w1.cols(), r)?;
            for (i, term) in powers.iter().enumerate() {
                acc.add_scaled(&w2[(k, i)], term)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    PolyVector::new(out)
}

/// Row-wise Khatri-Rao power: row `i` becomes `vec(M[i,:]^{(x) r})`, with the
/// first tensor factor most significant.
pub fn khatri_rao_power<F: Field>(m: &ExactMatrix<F>, r: u32) -> Result<ExactMatrix<F>> {
    if r == 0 {
        return Err(Error::InvalidConfig("Khatri-Rao power needs r >= 1".into()));
    }
    let f = m.field();
    let cols = (m.cols() as u64)
        .checked_pow(r)
        .filter(|&c| c.saturating_mul(m.rows() as u64) <= MAX_BASIS_SIZE)
        .ok_or_else(|| Error::DegreeOverflow(format!("{} columns to the power {r}", m.cols())))? as usize;
    let mut data = Vec::with_capacity(m.rows() * cols);
    for i in 0..m.rows() {
        let mut row = vec![f.one()];
        for _ in 0..r {
            row = row
                .iter()
                .flat_map(|a| m.row(i).iter().map(move |b| f.mul(a, b)))
                .collect();
        }
        data.extend(row);
    }
    Ok(ExactMatrix::new(f.clone(), m.rows(), cols, data))
}

/// The network output via iterated Khatri-Rao powers followed by row
/// symmetrization. Each tensor entry indexed by a word over `{0..d_0}` is
/// accumulated into the monomial counting its letters, so no division occurs.
pub fn forward_khatri_rao<F: Field>(arch: &Architecture, theta: &WeightAssignment<F>) -> Result<PolyVector<F>> {
    check_shapes(arch, theta)?;
    let f = theta.field();
    let mut t = theta.layer(1).clone();
    for i in 2..=arch.depth() {
        t = theta.layer(i).mul(&khatri_rao_power(&t, arch.degree())?)?;
    }
    let n = arch.input_dim();
    let degree = arch.output_degree()?;
    let basis = MonomialBasis::shared(n, degree)?;
    let comps = (0..t.rows())
        .map(|k| {
            let mut coeffs = vec![f.zero(); basis.len()];
            for (idx, v) in t.row(k).iter().enumerate() {
                let mut exps = vec![0u32; n];
                let mut rest = idx;
                for _ in 0..degree {
                    exps[rest % n] += 1;
                    rest /= n;
                }
                let slot = basis.index_of(&exps).expect("word length equals degree");
                coeffs[slot] = f.add(&coeffs[slot], v);
            }
            HomogPoly::from_coeffs(f.clone(), basis.clone(), coeffs)
        })
        .collect::<Result<_>>()?;
    PolyVector::new(comps)
}

/// Hidden-unit rescaling and relabeling, one `(D_i, P_i)` per internal layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePermAction<F: Field> {
    /// Diagonal of `D_i` for `i = 1..h-1`.
    pub diagonals: Vec<Vec<F::Elem>>,
    /// `P_i` sends unit `j` to unit `perms[i-1][j]`.
    pub perms: Vec<Vec<usize>>,
}

impl<F: Field> ScalePermAction<F> {
    pub fn identity(arch: &Architecture, field: &F) -> Self {
        let diagonals = arch.internal_widths().iter().map(|&d| vec![field.one(); d]).collect();
        let perms = arch.internal_widths().iter().map(|&d| (0..d).collect()).collect();
        Self { diagonals, perms }
    }
}

impl ScalePermAction<PrimeField> {
    /// Nonzero uniform diagonals and uniform permutations.
    pub fn random(arch: &Architecture, field: PrimeField, rng: &mut impl Rng) -> Self {
        let diagonals = arch
            .internal_widths()
            .iter()
            .map(|&d| (0..d).map(|_| rng.gen_range(1..field.modulus())).collect())
            .collect();
        let perms = arch
            .internal_widths()
            .iter()
            .map(|&d| {
                let mut p: Vec<usize> = (0..d).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        Self { diagonals, perms }
    }
}

/// Applies `W_i <- P_i D_i W_i D_{i-1}^{-r} P_{i-1}^T` (with `D_0 = D_h = I`,
/// `P_0 = P_h = I`). The network output is unchanged.
pub fn apply_action<F: Field>(
    arch: &Architecture,
    theta: &WeightAssignment<F>,
    g: &ScalePermAction<F>,
) -> Result<WeightAssignment<F>> {
    check_shapes(arch, theta)?;
    let h = arch.depth();
    let internal = arch.internal_widths();
    if g.diagonals.len() != h - 1 || g.perms.len() != h - 1 {
        return Err(Error::ShapeMismatch(format!("action has {} layers, need {}", g.diagonals.len(), h - 1)));
    }
    let f = theta.field();
    let mut inv_pow = Vec::with_capacity(h - 1);
    for (li, (diag, perm)) in g.diagonals.iter().zip(&g.perms).enumerate() {
        if diag.len() != internal[li] || perm.len() != internal[li] {
            return Err(Error::ShapeMismatch(format!("action layer {} has wrong size", li + 1)));
        }
        let mut seen = vec![false; perm.len()];
        for &t in perm {
            if t >= perm.len() || std::mem::replace(&mut seen[t], true) {
                return Err(Error::InvalidConfig(format!("layer {} permutation is not a bijection", li + 1)));
            }
        }
        let inv = diag
            .iter()
            .enumerate()
            .map(|(j, d)| {
                f.inv(&f.pow(d, u64::from(arch.degree())))
                    .ok_or(Error::NonInvertibleDiagonal { layer: li + 1, index: j })
            })
            .collect::<Result<Vec<_>>>()?;
        inv_pow.push(inv);
    }
    let layers = (1..=h)
        .map(|i| {
            let w = theta.layer(i);
            let mut out = ExactMatrix::zeros(f.clone(), w.rows(), w.cols());
            for j in 0..w.rows() {
                let (row_to, row_scale) = if i < h { (g.perms[i - 1][j], Some(&g.diagonals[i - 1][j])) } else { (j, None) };
                for l in 0..w.cols() {
                    let (col_to, col_scale) = if i > 1 { (g.perms[i - 2][l], Some(&inv_pow[i - 2][l])) } else { (l, None) };
                    let mut v = w[(j, l)].clone();
                    if let Some(s) = row_scale {
                        v = f.mul(&v, s);
                    }
                    if let Some(s) = col_scale {
                        v = f.mul(&v, s);
                    }
                    out[(row_to, col_to)] = v;
                }
            }
            out
        })
        .collect();
    WeightAssignment::new(arch, layers)
}
