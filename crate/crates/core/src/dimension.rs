//! Dimension of the functional variety as the generic rank of the Jacobian of
//! the network map.
//!
//! Three engines build (a version of) the Jacobian at a random parameter:
//!
//! * [`jacobian_symbolic`]: reverse-mode differentiation with polynomial
//!   values, then coefficient extraction. Exact over the rationals.
//! * [`jacobian_ff_stacked`]: reverse-mode differentiation with scalar values
//!   over `F_p` at `M >= N` sample points; the stacked gradients have the same
//!   rank as the coefficient Jacobian whenever the sample points separate
//!   monomials.
//! * [`jacobian_ff_interpolated`]: the same gradients at exactly `N` points,
//!   converted back to monomial coefficients by solving the Vandermonde-like
//!   system.
//!
//! Rank at any parameter is a lower bound on the dimension, with equality at
//! generic parameters. A full-rank trial is therefore a proof of filling; a
//! deficient rank is only probabilistic evidence.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{random_prime, ExactMatrix, Field, FieldLabel, PrimeField, Rationals, PRIME_LOWER};
use crate::bounds::{ambient_dim, fiber_bound, naive_bound};
use crate::error::{Error, Result};
use crate::network::{Architecture, IntegerWeights, WeightAssignment};
use crate::poly::{monomial_eval_matrix, HomogPoly, MonomialBasis};
use crate::seed::derive_seed;

/// Integer weights for rational-mode trials are drawn from `[-B, B]`.
pub const RATIONAL_WEIGHT_BOUND: i64 = 1000;
/// Extra sample points beyond `N` in stacked mode.
pub const DEFAULT_SAMPLE_MARGIN: usize = 5;
/// Resampling attempts before interpolation gives up.
pub const INTERPOLATION_ATTEMPTS: usize = 10;
pub const DEFAULT_TRIALS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Method {
    #[default]
    #[serde(rename = "ff-stacked")]
    FiniteFieldStacked,
    #[serde(rename = "ff-interp")]
    FiniteFieldInterpolated,
    #[serde(rename = "symbolic")]
    Symbolic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::FiniteFieldStacked => "ff-stacked",
            Method::FiniteFieldInterpolated => "ff-interp",
            Method::Symbolic => "symbolic",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ff-stacked" => Ok(Method::FiniteFieldStacked),
            "ff-interp" => Ok(Method::FiniteFieldInterpolated),
            "symbolic" => Ok(Method::Symbolic),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// Coefficient Jacobian: row `k * N + m` is monomial `m` of output `k`,
/// column order is `W_1, ..., W_h`, each row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix<F: Field> {
    pub matrix: ExactMatrix<F>,
    /// `N`, monomials per output.
    pub monomials: usize,
}

impl<F: Field> JacobianMatrix<F> {
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
}

/// Column offsets of each layer in the parameter vector.
fn layer_offsets(arch: &Architecture) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(arch.depth());
    let mut acc = 0;
    for i in 1..=arch.depth() {
        offsets.push(acc);
        let (r, c) = arch.layer_shape(i);
        acc += r * c;
    }
    offsets
}

fn check_degree<F: Field>(field: &F, r: u32) -> Result<()> {
    if let FieldLabel::Prime { p } = field.label() {
        if u64::from(r) % p == 0 {
            return Err(Error::BadPrime { p, r });
        }
    }
    Ok(())
}

/// Reverse-mode differentiation over the polynomial ring, returning the
/// coefficient Jacobian over `theta`'s field.
pub fn jacobian_polynomial<F: Field>(arch: &Architecture, theta: &WeightAssignment<F>) -> Result<JacobianMatrix<F>> {
    let f = theta.field().clone();
    check_degree(&f, arch.degree())?;
    let n = arch.input_dim();
    let h = arch.depth();
    let r = arch.degree();
    let basis = MonomialBasis::shared(n, arch.output_degree()?)?;
    let big_n = basis.len();
    let offsets = layer_offsets(arch);
    let mut jac = ExactMatrix::zeros(f.clone(), arch.output_dim() * big_n, arch.param_count());

    // forward trace: inputs[i] = activations feeding W_{i+1}, deriv[i] = r z_i^(r-1)
    let mut inputs: Vec<Vec<HomogPoly<F>>> = Vec::with_capacity(h);
    inputs.push((0..n).map(|j| HomogPoly::variable(f.clone(), n, j)).collect::<Result<_>>()?);
    let mut deriv: Vec<Vec<HomogPoly<F>>> = vec![Vec::new()];
    let w1 = theta.layer(1);
    let mut z: Vec<HomogPoly<F>> = (0..w1.rows()).map(|j| HomogPoly::linear(f.clone(), w1.row(j))).collect::<Result<_>>()?;
    let r_elem = f.from_i64(i64::from(r));
    for i in 2..=h {
        let mut act = Vec::with_capacity(z.len());
        let mut der = Vec::with_capacity(z.len());
        for zj in &z {
            let pm1 = zj.power(r - 1)?;
            act.push(pm1.multiply(zj)?);
            der.push(pm1.scale(&r_elem));
        }
        inputs.push(act);
        deriv.push(der);
        let w = theta.layer(i);
        let first = &inputs[i - 1][0];
        z = (0..w.rows())
            .map(|j| {
                let mut acc = HomogPoly::zero(f.clone(), n, first.degree())?;
                for (l, a) in inputs[i - 1].iter().enumerate() {
                    acc.add_scaled(&w[(j, l)], a)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
    }

    for k in 0..arch.output_dim() {
        // delta[j] = d p_k / d z_i[j]
        let mut delta: Vec<Option<HomogPoly<F>>> = (0..arch.output_dim())
            .map(|j| (j == k).then(|| HomogPoly::constant(f.clone(), n, f.one())).transpose())
            .collect::<Result<_>>()?;
        for i in (1..=h).rev() {
            let w = theta.layer(i);
            for (j, dj) in delta.iter().enumerate() {
                let Some(dj) = dj else { continue };
                for (l, a) in inputs[i - 1].iter().enumerate() {
                    let grad = dj.multiply(a)?;
                    let col = offsets[i - 1] + j * w.cols() + l;
                    for (m, c) in grad.coeffs().iter().enumerate() {
                        jac[(k * big_n + m, col)] = c.clone();
                    }
                }
            }
            if i == 1 {
                break;
            }
            let mut next = Vec::with_capacity(w.cols());
            for l in 0..w.cols() {
                let mut g: Option<HomogPoly<F>> = None;
                for (j, dj) in delta.iter().enumerate() {
                    let Some(dj) = dj else { continue };
                    match &mut g {
                        Some(acc) => acc.add_scaled(&w[(j, l)], dj)?,
                        None => g = Some(dj.scale(&w[(j, l)])),
                    }
                }
                next.push(g.map(|g| g.multiply(&deriv[i - 1][l])).transpose()?);
            }
            delta = next;
        }
    }
    Ok(JacobianMatrix { matrix: jac, monomials: big_n })
}

/// Exact Jacobian over the rationals at integer weights.
pub fn jacobian_symbolic(arch: &Architecture, theta: &IntegerWeights) -> Result<JacobianMatrix<Rationals>> {
    jacobian_polynomial(arch, &theta.into_field(arch, &Rationals)?)
}

/// Scalar forward/backward pass at one point; writes `d p_k(x) / d theta`
/// into `rows[k]`.
fn gradients_at(arch: &Architecture, theta: &WeightAssignment<PrimeField>, x: &[u64], rows: &mut [&mut [u64]]) {
    let f = *theta.field();
    let h = arch.depth();
    let r = arch.degree();
    let offsets = layer_offsets(arch);
    let r_elem = f.from_i64(i64::from(r));
    let mut inputs: Vec<Vec<u64>> = Vec::with_capacity(h);
    let mut deriv: Vec<Vec<u64>> = vec![Vec::new()];
    inputs.push(x.to_vec());
    let mut z = matvec(&f, theta.layer(1), x);
    for i in 2..=h {
        let pm1: Vec<u64> = z.iter().map(|v| f.pow(v, u64::from(r - 1))).collect();
        inputs.push(z.iter().zip(&pm1).map(|(a, b)| f.mul(a, b)).collect());
        deriv.push(pm1.iter().map(|v| f.mul(v, &r_elem)).collect());
        z = matvec(&f, theta.layer(i), &inputs[i - 1]);
    }
    for (k, row) in rows.iter_mut().enumerate() {
        let mut delta = vec![0u64; arch.output_dim()];
        delta[k] = 1;
        for i in (1..=h).rev() {
            let w = theta.layer(i);
            let cols = w.cols();
            for (j, dj) in delta.iter().enumerate() {
                let base = offsets[i - 1] + j * cols;
                for (l, a) in inputs[i - 1].iter().enumerate() {
                    row[base + l] = f.mul(dj, a);
                }
            }
            if i == 1 {
                break;
            }
            let mut next = vec![0u64; cols];
            for (j, dj) in delta.iter().enumerate() {
                if *dj == 0 {
                    continue;
                }
                for (l, nl) in next.iter_mut().enumerate() {
                    *nl = f.mul_add(nl, &w[(j, l)], dj);
                }
            }
            for (nl, dl) in next.iter_mut().zip(&deriv[i - 1]) {
                *nl = f.mul(nl, dl);
            }
            delta = next;
        }
    }
}

fn matvec(f: &PrimeField, w: &ExactMatrix<PrimeField>, x: &[u64]) -> Vec<u64> {
    (0..w.rows())
        .map(|j| w.row(j).iter().zip(x).fold(0, |acc, (a, b)| f.mul_add(&acc, a, b)))
        .collect()
}

/// Gradients of every output at every point: row `k * M + j` is
/// `d p_k(points[j]) / d theta`.
pub fn jacobian_ff_stacked(
    arch: &Architecture,
    theta: &WeightAssignment<PrimeField>,
    points: &[Vec<u64>],
) -> Result<ExactMatrix<PrimeField>> {
    let f = *theta.field();
    f.check_degree(arch.degree())?;
    let m = points.len();
    let cols = arch.param_count();
    let dh = arch.output_dim();
    let mut out = ExactMatrix::zeros(f, dh * m, cols);
    let mut buf = vec![0u64; dh * cols];
    for (j, x) in points.iter().enumerate() {
        if x.len() != arch.input_dim() {
            return Err(Error::ShapeMismatch(format!("point has {} coordinates, need {}", x.len(), arch.input_dim())));
        }
        {
            let mut rows: Vec<&mut [u64]> = buf.chunks_exact_mut(cols).collect();
            gradients_at(arch, theta, x, &mut rows);
        }
        for k in 0..dh {
            out.row_mut(k * m + j).copy_from_slice(&buf[k * cols..(k + 1) * cols]);
        }
    }
    Ok(out)
}

/// Coefficient Jacobian over `F_p` recovered from point gradients.
pub fn jacobian_ff_interpolated(
    arch: &Architecture,
    theta: &WeightAssignment<PrimeField>,
    rng: &mut impl Rng,
) -> Result<JacobianMatrix<PrimeField>> {
    let f = *theta.field();
    f.check_degree(arch.degree())?;
    let basis = MonomialBasis::shared(arch.input_dim(), arch.output_degree()?)?;
    let big_n = basis.len();
    for _ in 0..INTERPOLATION_ATTEMPTS {
        let points = sample_points(&f, arch.input_dim(), big_n, rng);
        let v = monomial_eval_matrix(&f, &basis, &points)?;
        let stacked = jacobian_ff_stacked(arch, theta, &points)?;
        let mut blocks = Vec::with_capacity(arch.output_dim());
        let mut singular = false;
        for k in 0..arch.output_dim() {
            let rows: Vec<u64> = (k * big_n..(k + 1) * big_n).flat_map(|i| stacked.row(i).to_vec()).collect();
            let g = ExactMatrix::new(f, big_n, stacked.cols(), rows);
            match v.solve(&g) {
                Ok(c) => blocks.push(c),
                Err(Error::SingularMatrix) => {
                    singular = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if singular {
            continue;
        }
        let mut it = blocks.into_iter();
        let first = it.next().expect("at least one output");
        let matrix = it.try_fold(first, |acc, b| acc.vstack(&b))?;
        return Ok(JacobianMatrix { matrix, monomials: big_n });
    }
    Err(Error::InterpolationFailed { attempts: INTERPOLATION_ATTEMPTS })
}

fn sample_points(f: &PrimeField, n: usize, count: usize, rng: &mut impl Rng) -> Vec<Vec<u64>> {
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(0..f.modulus())).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FillingVerdict {
    /// Some trial reached ambient rank: a proof.
    Proved,
    /// No trial reached ambient rank: non-filling with probability one.
    ProbablyNot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    #[serde(with = "crate::report::decimal")]
    pub seed: u64,
    pub field: FieldLabel,
    pub rank: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub widths: Vec<usize>,
    pub degree: u32,
    pub dim: u64,
    pub ambient: u64,
    pub naive: u64,
    pub is_filling: FillingVerdict,
    pub method: Method,
    pub seed: u64,
    /// Sample points per trial (finite-field engines).
    pub sample_points: Option<usize>,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionConfig {
    pub method: Method,
    pub trials: usize,
    pub seed: u64,
    /// Fixed modulus for every finite-field trial instead of fresh random primes.
    pub prime: Option<u64>,
    pub sample_margin: usize,
    /// Skip remaining trials once one reaches ambient rank.
    pub stop_on_full_rank: bool,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        Self {
            method: Method::default(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            prime: None,
            sample_margin: DEFAULT_SAMPLE_MARGIN,
            stop_on_full_rank: false,
        }
    }
}

impl DimensionConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

fn trial_field(config: &DimensionConfig, rng: &mut ChaCha8Rng, r: u32) -> Result<PrimeField> {
    let field = match config.prime {
        Some(p) => PrimeField::new(p)?,
        None => random_prime(rng.gen(), PRIME_LOWER)?,
    };
    field.check_degree(r)?;
    Ok(field)
}

/// Rank of one randomized trial.
fn run_trial(arch: &Architecture, config: &DimensionConfig, rng: &mut ChaCha8Rng, suspicious_below: u64) -> Result<(FieldLabel, u64)> {
    match config.method {
        Method::Symbolic => {
            let theta = IntegerWeights::sample(arch, RATIONAL_WEIGHT_BOUND, rng);
            let rank = jacobian_symbolic(arch, &theta)?.rank() as u64;
            Ok((FieldLabel::Rational, rank))
        }
        Method::FiniteFieldInterpolated => {
            let field = trial_field(config, rng, arch.degree())?;
            let theta = WeightAssignment::random(arch, field, rng);
            let rank = jacobian_ff_interpolated(arch, &theta, rng)?.rank() as u64;
            Ok((field.label(), rank))
        }
        Method::FiniteFieldStacked => {
            let field = trial_field(config, rng, arch.degree())?;
            let theta = WeightAssignment::random(arch, field, rng);
            let basis = MonomialBasis::shared(arch.input_dim(), arch.output_degree()?)?;
            let count = basis.len() + config.sample_margin;
            let mut last = None;
            for _ in 0..INTERPOLATION_ATTEMPTS {
                let points = sample_points(&field, arch.input_dim(), count, rng);
                let rank = jacobian_ff_stacked(arch, &theta, &points)?.rank() as u64;
                if rank >= suspicious_below {
                    return Ok((field.label(), rank));
                }
                // low rank: make sure the points separate monomials before trusting it
                let v_rank = monomial_eval_matrix(&field, &basis, &points)?.rank();
                if v_rank == basis.len() {
                    return Ok((field.label(), rank));
                }
                last = Some(v_rank);
            }
            Err(Error::DegenerateSamples { rank: last.unwrap_or(0), needed: basis.len() })
        }
    }
}

/// Dimension as the maximum Jacobian rank over independent random trials.
pub fn dimension(arch: &Architecture, config: &DimensionConfig) -> Result<DimensionEstimate> {
    if config.trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is required".into()));
    }
    let ambient = ambient_dim(arch)?;
    let naive = naive_bound(arch);
    let fiber = fiber_bound(arch);
    let suspicious_below = naive.min(ambient);
    let mut trials = Vec::with_capacity(config.trials);
    for index in 0..config.trials {
        let seed = derive_seed(config.seed, index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (field, rank) = run_trial(arch, config, &mut rng, suspicious_below)?;
        assert!(
            rank <= naive && rank <= fiber,
            "{arch}: Jacobian rank {rank} exceeds the naive bound {naive}"
        );
        trials.push(TrialRecord { index, seed, field, rank });
        if config.stop_on_full_rank && rank == ambient {
            break;
        }
    }
    let dim = trials.iter().map(|t| t.rank).max().expect("at least one trial");
    let sample_points = match config.method {
        Method::Symbolic => None,
        Method::FiniteFieldStacked => Some(MonomialBasis::shared(arch.input_dim(), arch.output_degree()?)?.len() + config.sample_margin),
        Method::FiniteFieldInterpolated => Some(MonomialBasis::shared(arch.input_dim(), arch.output_degree()?)?.len()),
    };
    Ok(DimensionEstimate {
        widths: arch.widths().to_vec(),
        degree: arch.degree(),
        dim,
        ambient,
        naive,
        is_filling: if dim == ambient { FillingVerdict::Proved } else { FillingVerdict::ProbablyNot },
        method: config.method,
        seed: config.seed,
        sample_points,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(w: &str, r: u32) -> Architecture {
        Architecture::parse(w, r).unwrap()
    }

    fn dim_of(w: &str, r: u32, method: Method) -> u64 {
        dimension(&arch(w, r), &DimensionConfig { method, ..DimensionConfig::default() }).unwrap().dim
    }

    #[test]
    fn single_layer_jacobian_is_constant_identity_like() {
        let a = arch("3,2", 4);
        let theta = IntegerWeights::sample(&a, 9, &mut ChaCha8Rng::seed_from_u64(0));
        let j = jacobian_symbolic(&a, &theta).unwrap();
        assert_eq!(j.matrix.shape(), (6, 6));
        assert_eq!(j.matrix, ExactMatrix::identity(Rationals, 6));
        assert_eq!(j.rank(), 6);
        let f = PrimeField::new(1_048_583).unwrap();
        let jf = jacobian_ff_interpolated(&a, &theta.into_field(&a, &f).unwrap(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(jf.matrix, ExactMatrix::identity(f, 6));
    }

    #[test]
    fn zero_weights_give_zero_gradients() {
        let a = arch("2,3,2", 2);
        let f = PrimeField::new(1_048_583).unwrap();
        let theta = WeightAssignment::zeros(&a, f);
        let pts = sample_points(&f, 2, 8, &mut ChaCha8Rng::seed_from_u64(0));
        let m = jacobian_ff_stacked(&a, &theta, &pts).unwrap();
        assert!(m.is_zero());
        assert_eq!(m.rank(), 0);
    }

    #[test]
    fn bad_prime_rejected() {
        let a = arch("2,2,1", 2);
        let theta = WeightAssignment::zeros(&a, PrimeField::new(1_048_583).unwrap());
        assert!(jacobian_ff_stacked(&a, &theta, &[]).is_ok());
        let big = arch("2,2,1", 1_048_583);
        let theta = WeightAssignment::zeros(&big, PrimeField::new(1_048_583).unwrap());
        assert!(matches!(jacobian_ff_stacked(&big, &theta, &[]), Err(Error::BadPrime { .. })));
    }

    #[test]
    fn table_rows_small() {
        assert_eq!(dim_of("3,2,1", 2, Method::Symbolic), 5);
        assert_eq!(dim_of("2,3,2", 3, Method::Symbolic), 8);
        assert_eq!(dim_of("2,3,2,3", 2, Method::FiniteFieldStacked), 10);
        assert_eq!(dim_of("3,2,1", 4, Method::FiniteFieldStacked), 6);
        assert_eq!(dim_of("3,2,1", 2, Method::FiniteFieldInterpolated), 5);
    }

    #[test]
    fn filling_verdicts() {
        let e = dimension(&arch("2,2,2,1", 2), &DimensionConfig::default()).unwrap();
        assert_eq!((e.dim, e.ambient, e.is_filling), (5, 5, FillingVerdict::Proved));
        let e = dimension(&arch("2,2,2,2,1", 2), &DimensionConfig::default()).unwrap();
        // W_1 is a change of coordinates, so the output is F(l_1^2, l_2^2) with F
        // from the depth-3 family: 5 + 2 = 7, one below the naive bound
        assert_eq!((e.dim, e.ambient, e.is_filling), (7, 9, FillingVerdict::ProbablyNot));
        assert_eq!(e.trials.len(), 3);
        let primes: std::collections::HashSet<_> = e.trials.iter().map(|t| t.field).collect();
        assert_eq!(primes.len(), 3);
    }

    #[test]
    fn explicit_prime_and_validation() {
        let cfg = DimensionConfig { prime: Some(1_048_583), ..DimensionConfig::default() };
        let e = dimension(&arch("2,3,2", 2), &cfg).unwrap();
        assert!(e.trials.iter().all(|t| t.field == FieldLabel::Prime { p: 1_048_583 }));
        let bad = DimensionConfig { prime: Some(1_048_584), ..DimensionConfig::default() };
        assert!(matches!(dimension(&arch("2,3,2", 2), &bad), Err(Error::InvalidPrime { .. })));
        let none = DimensionConfig { trials: 0, ..DimensionConfig::default() };
        assert!(dimension(&arch("2,3,2", 2), &none).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let a = arch("2,3,2,3", 3);
        let c = DimensionConfig::with_seed(42);
        assert_eq!(dimension(&a, &c).unwrap(), dimension(&a, &c).unwrap());
    }

    #[test]
    fn method_round_trips_through_strings() {
        for m in [Method::FiniteFieldStacked, Method::FiniteFieldInterpolated, Method::Symbolic] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }
}
