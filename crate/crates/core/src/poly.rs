//! Dense homogeneous polynomials over an exact field.
//!
//! A [`MonomialBasis`] lists every exponent vector of a fixed total degree in
//! a fixed number of variables, ordered lexicographically with larger leading
//! exponents first (graded-lex, since the degree is constant). Coefficient
//! vectors are indexed by that list.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::{ExactMatrix, Field};
use crate::error::{Error, Result};

/// Largest basis size that will be materialized.
pub const MAX_BASIS_SIZE: u64 = 1_000_000;
const MAX_VARS: usize = 8;
const EXP_BITS: u32 = 16;

/// `binomial(n, k)`, or `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of monomials of degree `d` in `n` variables, `binomial(n + d - 1, d)`.
pub fn monomial_count(n: usize, d: u64) -> Option<u64> {
    if n == 0 {
        return Some(u64::from(d == 0));
    }
    binomial(n as u64 + d - 1, d)
}

#[derive(Debug)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    exponents: Vec<Vec<u32>>,
    keys: Vec<u128>,
    index: HashMap<u128, usize>,
}

fn pack(exps: &[u32]) -> u128 {
    exps.iter().enumerate().fold(0u128, |acc, (j, &e)| acc | (u128::from(e) << (EXP_BITS * j as u32)))
}

impl MonomialBasis {
    /// Builds the basis, enforcing the size guard.
    pub fn new(nvars: usize, degree: u32) -> Result<Self> {
        if nvars == 0 || nvars > MAX_VARS {
            return Err(Error::DegreeOverflow(format!("{nvars} variables (supported: 1..={MAX_VARS})")));
        }
        if degree >= 1 << EXP_BITS {
            return Err(Error::DegreeOverflow(format!("degree {degree} exceeds {}", (1u32 << EXP_BITS) - 1)));
        }
        let size = monomial_count(nvars, u64::from(degree)).unwrap_or(u64::MAX);
        if size > MAX_BASIS_SIZE {
            return Err(Error::DegreeOverflow(format!(
                "N({degree}, {nvars}) = {} exceeds {MAX_BASIS_SIZE}",
                if size == u64::MAX { "overflow".to_string() } else { size.to_string() }
            )));
        }
        let mut exponents = Vec::with_capacity(size as usize);
        let mut current = vec![0u32; nvars];
        fill_lex(&mut exponents, &mut current, 0, degree);
        let keys: Vec<u128> = exponents.iter().map(|e| pack(e)).collect();
        let index = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        Ok(Self { nvars, degree, exponents, keys, index })
    }

    /// Process-wide cached basis.
    pub fn shared(nvars: usize, degree: u32) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<MonomialBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().expect("basis cache poisoned").get(&(nvars, degree)) {
            return Ok(Arc::clone(b));
        }
        let basis = Arc::new(Self::new(nvars, degree)?);
        cache
            .lock()
            .expect("basis cache poisoned")
            .entry((nvars, degree))
            .or_insert_with(|| Arc::clone(&basis));
        Ok(basis)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        if exps.len() != self.nvars || exps.iter().sum::<u32>() != self.degree {
            return None;
        }
        self.index.get(&pack(exps)).copied()
    }

    fn index_of_key(&self, key: u128) -> usize {
        self.index[&key]
    }
}

fn fill_lex(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_lex(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// A homogeneous polynomial as a dense coefficient vector over a shared basis.
#[derive(Debug, Clone)]
pub struct HomogPoly<F: Field> {
    field: F,
    basis: Arc<MonomialBasis>,
    coeffs: Vec<F::Elem>,
}

impl<F: Field> PartialEq for HomogPoly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.basis.nvars == other.basis.nvars
            && self.basis.degree == other.basis.degree
            && self.coeffs == other.coeffs
    }
}

impl<F: Field> HomogPoly<F> {
    pub fn zero(field: F, nvars: usize, degree: u32) -> Result<Self> {
        let basis = MonomialBasis::shared(nvars, degree)?;
        let coeffs = vec![field.zero(); basis.len()];
        Ok(Self { field, basis, coeffs })
    }

    pub fn constant(field: F, nvars: usize, c: F::Elem) -> Result<Self> {
        let basis = MonomialBasis::shared(nvars, 0)?;
        Ok(Self { field, basis, coeffs: vec![c] })
    }

    /// The coordinate `x_j` (zero-based).
    pub fn variable(field: F, nvars: usize, j: usize) -> Result<Self> {
        let mut exps = vec![0; nvars];
        exps[j] = 1;
        let mut p = Self::zero(field, nvars, 1)?;
        let idx = p.basis.index_of(&exps).expect("linear monomial exists");
        p.coeffs[idx] = p.field.one();
        Ok(p)
    }

    /// The linear form `sum_j w_j x_j`.
    pub fn linear(field: F, weights: &[F::Elem]) -> Result<Self> {
        let mut p = Self::zero(field, weights.len(), 1)?;
        for (j, w) in weights.iter().enumerate() {
            let mut exps = vec![0; weights.len()];
            exps[j] = 1;
            let idx = p.basis.index_of(&exps).expect("linear monomial exists");
            p.coeffs[idx] = w.clone();
        }
        Ok(p)
    }

    pub fn from_coeffs(field: F, basis: Arc<MonomialBasis>, coeffs: Vec<F::Elem>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Self { field, basis, coeffs })
    }

    /// Builds a polynomial from `(exponents, coefficient)` terms.
    pub fn from_terms(field: F, nvars: usize, degree: u32, terms: &[(&[u32], i64)]) -> Result<Self> {
        let mut p = Self::zero(field, nvars, degree)?;
        for (exps, c) in terms {
            let idx = p
                .basis
                .index_of(exps)
                .ok_or_else(|| Error::ShapeMismatch(format!("monomial {exps:?} not of degree {degree}")))?;
            let c = p.field.from_i64(*c);
            p.coeffs[idx] = p.field.add(&p.coeffs[idx], &c);
        }
        Ok(p)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.basis
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree
    }

    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, exps: &[u32]) -> Option<&F::Elem> {
        self.basis.index_of(exps).map(|i| &self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.field.is_zero(c))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.basis.nvars != other.basis.nvars {
            return Err(Error::ShapeMismatch(format!(
                "{} vs {} variables",
                self.basis.nvars, other.basis.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.degree() != other.degree() {
            return Err(Error::ShapeMismatch(format!("adding degrees {} and {}", self.degree(), other.degree())));
        }
        let f = &self.field;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f.add(a, b)).collect();
        Ok(Self { field: f.clone(), basis: Arc::clone(&self.basis), coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        let coeffs = self.coeffs.iter().map(|a| f.mul(a, c)).collect();
        Self { field: f.clone(), basis: Arc::clone(&self.basis), coeffs }
    }

    /// `self += c * other`, same degree.
    pub fn add_scaled(&mut self, c: &F::Elem, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        if self.degree() != other.degree() {
            return Err(Error::ShapeMismatch(format!("adding degrees {} and {}", self.degree(), other.degree())));
        }
        if self.field.is_zero(c) {
            return Ok(());
        }
        let f = &self.field;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = f.mul_add(a, c, b);
        }
        Ok(())
    }

    /// Product by exponent-vector convolution.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let basis = MonomialBasis::shared(self.nvars(), self.degree() + other.degree())?;
        let f = &self.field;
        let mut coeffs = vec![f.zero(); basis.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            let ka = self.basis.keys[i];
            for (j, b) in other.coeffs.iter().enumerate() {
                if f.is_zero(b) {
                    continue;
                }
                // packed exponent fields never carry since degrees fit in EXP_BITS
                let idx = basis.index_of_key(ka + other.basis.keys[j]);
                coeffs[idx] = f.mul_add(&coeffs[idx], a, b);
            }
        }
        Ok(Self { field: f.clone(), basis, coeffs })
    }

    /// `self^r` by repeated squaring.
    pub fn power(&self, r: u32) -> Result<Self> {
        let mut acc = Self::constant(self.field.clone(), self.nvars(), self.field.one())?;
        let mut base = self.clone();
        let mut e = r;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn evaluate(&self, x: &[F::Elem]) -> Result<F::Elem> {
        if x.len() != self.nvars() {
            return Err(Error::ShapeMismatch(format!("point has {} coordinates, need {}", x.len(), self.nvars())));
        }
        let f = &self.field;
        let powers = power_table(f, x, self.degree());
        let mut acc = f.zero();
        for (c, exps) in self.coeffs.iter().zip(self.basis.exponents()) {
            if f.is_zero(c) {
                continue;
            }
            acc = f.add(&acc, &f.mul(c, &monomial_value(f, &powers, exps)));
        }
        Ok(acc)
    }
}

fn power_table<F: Field>(f: &F, x: &[F::Elem], degree: u32) -> Vec<Vec<F::Elem>> {
    x.iter()
        .map(|xi| {
            let mut row = Vec::with_capacity(degree as usize + 1);
            row.push(f.one());
            for e in 0..degree as usize {
                row.push(f.mul(&row[e], xi));
            }
            row
        })
        .collect()
}

fn monomial_value<F: Field>(f: &F, powers: &[Vec<F::Elem>], exps: &[u32]) -> F::Elem {
    exps.iter()
        .enumerate()
        .fold(f.one(), |acc, (j, &e)| f.mul(&acc, &powers[j][e as usize]))
}

/// `V[i][j]` = value of the `j`-th basis monomial at `points[i]`.
pub fn monomial_eval_matrix<F: Field>(field: &F, basis: &MonomialBasis, points: &[Vec<F::Elem>]) -> Result<ExactMatrix<F>> {
    let mut data = Vec::with_capacity(points.len() * basis.len());
    for x in points {
        if x.len() != basis.nvars() {
            return Err(Error::ShapeMismatch(format!("point has {} coordinates, need {}", x.len(), basis.nvars())));
        }
        let powers = power_table(field, x, basis.degree());
        data.extend(basis.exponents().iter().map(|e| monomial_value(field, &powers, e)));
    }
    Ok(ExactMatrix::new(field.clone(), points.len(), basis.len(), data))
}

/// Several homogeneous polynomials sharing one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVector<F: Field> {
    components: Vec<HomogPoly<F>>,
}

impl<F: Field> PolyVector<F> {
    pub fn new(components: Vec<HomogPoly<F>>) -> Result<Self> {
        if let Some(first) = components.first() {
            for c in &components[1..] {
                first.check_compatible(c)?;
                if c.degree() != first.degree() {
                    return Err(Error::ShapeMismatch("components of differing degree".into()));
                }
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[HomogPoly<F>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<HomogPoly<F>> {
        self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.components.first().map(HomogPoly::degree)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(HomogPoly::is_zero)
    }

    /// All coefficients, component-major.
    pub fn flat_coeffs(&self) -> Vec<F::Elem> {
        self.components.iter().flat_map(|c| c.coeffs.iter().cloned()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PrimeField, Rationals};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp() -> PrimeField {
        PrimeField::new(1_048_583).unwrap()
    }

    fn random_poly(rng: &mut ChaCha8Rng, f: PrimeField, n: usize, d: u32) -> HomogPoly<PrimeField> {
        let basis = MonomialBasis::shared(n, d).unwrap();
        let coeffs = (0..basis.len()).map(|_| rng.gen_range(0..f.modulus())).collect();
        HomogPoly::from_coeffs(f, basis, coeffs).unwrap()
    }

    #[test]
    fn basis_sizes_match_closed_form() {
        for n in 1..=6 {
            for d in 0..=64u32 {
                let expect = monomial_count(n, u64::from(d)).unwrap();
                if expect > 200_000 {
                    continue;
                }
                let b = MonomialBasis::new(n, d).unwrap();
                assert_eq!(b.len() as u64, expect, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn basis_order_is_lex_descending() {
        let b = MonomialBasis::new(2, 2).unwrap();
        assert_eq!(b.exponents(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        let b = MonomialBasis::new(3, 1).unwrap();
        assert_eq!(b.exponents(), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let b = MonomialBasis::new(3, 2).unwrap();
        for w in b.exponents().windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn basis_guard() {
        assert!(matches!(MonomialBasis::new(6, 200), Err(Error::DegreeOverflow(_))));
        assert!(matches!(MonomialBasis::new(0, 2), Err(Error::DegreeOverflow(_))));
        assert!(MonomialBasis::new(1, 60_000).is_ok());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(64, 32), Some(1_832_624_140_942_590_534));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn multiply_variables() {
        let f = Rationals;
        let x1 = HomogPoly::variable(f, 2, 0).unwrap();
        let x2 = HomogPoly::variable(f, 2, 1).unwrap();
        let p = x1.multiply(&x2).unwrap();
        assert_eq!(p, HomogPoly::from_terms(f, 2, 2, &[(&[1, 1], 1)]).unwrap());
        let diff = x1.add(&x2).unwrap().multiply(&x1.sub(&x2).unwrap()).unwrap();
        assert_eq!(diff, HomogPoly::from_terms(f, 2, 2, &[(&[2, 0], 1), (&[0, 2], -1)]).unwrap());
    }

    #[test]
    fn square_of_linear_form() {
        let f = Rationals;
        let (a, b) = (7i64, -3i64);
        let lin = HomogPoly::linear(f, &[f.from_i64(a), f.from_i64(b)]).unwrap();
        let sq = lin.multiply(&lin).unwrap();
        let expect = HomogPoly::from_terms(f, 2, 2, &[(&[2, 0], a * a), (&[1, 1], 2 * a * b), (&[0, 2], b * b)]).unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn power_small_cases() {
        let f = Rationals;
        let s = HomogPoly::variable(f, 2, 0).unwrap().add(&HomogPoly::variable(f, 2, 1).unwrap()).unwrap();
        assert_eq!(s.power(0).unwrap(), HomogPoly::constant(f, 2, f.one()).unwrap());
        assert_eq!(s.power(1).unwrap(), s);
        assert_eq!(
            s.power(2).unwrap(),
            HomogPoly::from_terms(f, 2, 2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]).unwrap()
        );
    }

    #[test]
    fn power_matches_repeated_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = fp();
        let p = random_poly(&mut rng, f, 3, 2);
        let mut acc = HomogPoly::constant(f, 3, 1).unwrap();
        for r in 0..=8 {
            assert_eq!(p.power(r).unwrap(), acc, "r = {r}");
            acc = acc.multiply(&p).unwrap();
        }
    }

    #[test]
    fn field_mismatch_detected() {
        let a = HomogPoly::variable(fp(), 2, 0).unwrap();
        let b = HomogPoly::variable(PrimeField::new(1_048_589).unwrap(), 2, 0).unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::FieldMismatch)));
    }

    #[test]
    fn evaluate_basic() {
        let f = Rationals;
        let p = HomogPoly::from_terms(f, 2, 2, &[(&[1, 1], 1)]).unwrap();
        assert_eq!(p.evaluate(&[f.from_i64(2), f.from_i64(3)]).unwrap(), BigRational::from_integer(6.into()));
        assert!(p.evaluate(&[f.zero(), f.zero()]).unwrap() == f.zero());
        assert!(p.evaluate(&[f.zero()]).is_err());
    }

    #[test]
    fn homogeneity_of_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = fp();
        for d in 1..6 {
            let p = random_poly(&mut rng, f, 3, d);
            let x: Vec<u64> = (0..3).map(|_| rng.gen_range(0..f.modulus())).collect();
            let lambda = rng.gen_range(1..f.modulus());
            let scaled: Vec<u64> = x.iter().map(|v| f.mul(v, &lambda)).collect();
            let lhs = p.evaluate(&scaled).unwrap();
            let rhs = f.mul(&f.pow(&lambda, u64::from(d)), &p.evaluate(&x).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn eval_matrix_univariate() {
        let f = Rationals;
        let basis = MonomialBasis::new(1, 3).unwrap();
        let pts: Vec<Vec<BigRational>> = (1..=4).map(|v| vec![f.from_i64(v)]).collect();
        let v = monomial_eval_matrix(&f, &basis, &pts).unwrap();
        assert_eq!(v.shape(), (4, 1));
        for i in 0..4 {
            assert_eq!(v[(i, 0)], f.from_i64((i as i64 + 1).pow(3)));
        }
    }

    #[test]
    fn interpolation_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = fp();
        let p = random_poly(&mut rng, f, 3, 4);
        let basis = p.basis().clone();
        let pts: Vec<Vec<u64>> = (0..basis.len()).map(|_| (0..3).map(|_| rng.gen_range(0..f.modulus())).collect()).collect();
        let v = monomial_eval_matrix(&f, &basis, &pts).unwrap();
        let evals: Vec<u64> = pts.iter().map(|x| p.evaluate(x).unwrap()).collect();
        let b = ExactMatrix::new(f, evals.len(), 1, evals);
        let c = v.solve(&b).unwrap();
        assert_eq!(c.data(), p.coeffs());
    }

    #[test]
    fn duplicated_points_are_singular() {
        let f = fp();
        let basis = MonomialBasis::new(2, 3).unwrap();
        let mut pts: Vec<Vec<u64>> = (0..4).map(|i| vec![i + 1, 2 * i + 5]).collect();
        pts[3] = pts[0].clone();
        let v = monomial_eval_matrix(&f, &basis, &pts).unwrap();
        assert!(v.rank() < basis.len());
    }
}
