use polynet::algebra::rational_to_integer;
use polynet::dimension::{jacobian_ff_interpolated, jacobian_ff_stacked, jacobian_polynomial, jacobian_symbolic};
use polynet::network::{apply_action, forward, forward_cp_shallow, forward_khatri_rao, ScalePermAction};
use polynet::{dimension, Architecture, DimensionConfig, Field, IntegerWeights, Method, MonomialBasis, PrimeField, WeightAssignment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 3] = [2_147_483_647, 2_147_483_629, 1_048_583];

fn arch(w: &str, r: u32) -> Architecture {
    Architecture::parse(w, r).unwrap()
}

#[test]
fn interpolated_matches_symbolic_entrywise() {
    for (w, r) in [("2,2,3", 2), ("2,3,2", 3), ("3,2,1", 2), ("2,2,2,1", 2), ("3,3,2", 2)] {
        let a = arch(w, r);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ints = IntegerWeights::sample(&a, 1000, &mut rng);
        let exact = jacobian_symbolic(&a, &ints).unwrap();
        for p in PRIMES {
            let f = PrimeField::new(p).unwrap();
            let theta = ints.into_field(&a, &f).unwrap();
            let interp = jacobian_ff_interpolated(&a, &theta, &mut rng).unwrap();
            assert_eq!(interp.matrix.shape(), exact.matrix.shape());
            for i in 0..exact.matrix.rows() {
                for j in 0..exact.matrix.cols() {
                    let z = rational_to_integer(&exact.matrix[(i, j)]).expect("integer weights give integer entries");
                    assert_eq!(f.from_bigint(&z), interp.matrix[(i, j)], "{w} r={r} p={p} entry ({i},{j})");
                }
            }
            assert_eq!(jacobian_polynomial(&a, &theta).unwrap().matrix, interp.matrix);
        }
    }
}

#[test]
fn stacked_rows_are_evaluated_coefficient_rows() {
    let a = arch("2,3,2", 2);
    let f = PrimeField::new(PRIMES[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let theta = WeightAssignment::random(&a, f, &mut rng);
    let coeff = jacobian_polynomial(&a, &theta).unwrap();
    let basis = MonomialBasis::shared(2, 2).unwrap();
    let points: Vec<Vec<u64>> = (0..4).map(|_| vec![rng.gen_range(0..f.modulus()), rng.gen_range(0..f.modulus())]).collect();
    let stacked = jacobian_ff_stacked(&a, &theta, &points).unwrap();
    for k in 0..2 {
        for (j, x) in points.iter().enumerate() {
            for c in 0..a.param_count() {
                let mut v = 0;
                for (m, e) in basis.exponents().iter().enumerate() {
                    let mono = x.iter().zip(e).fold(1, |acc, (xi, &ei)| f.mul(&acc, &f.pow(xi, u64::from(ei))));
                    v = f.mul_add(&v, &coeff.matrix[(k * basis.len() + m, c)], &mono);
                }
                assert_eq!(stacked[(k * points.len() + j, c)], v);
            }
        }
    }
}

#[test]
fn three_engines_agree_on_rank() {
    for (w, r) in [("3,2,1", 3), ("2,3,2", 2), ("2,2,2,1", 2), ("2,3,2,3", 2), ("3,3,1", 3)] {
        let a = arch(w, r);
        let dims: Vec<u64> = [Method::Symbolic, Method::FiniteFieldStacked, Method::FiniteFieldInterpolated]
            .into_iter()
            .map(|method| dimension(&a, &DimensionConfig { method, seed: 3, ..DimensionConfig::default() }).unwrap().dim)
            .collect();
        assert!(dims.windows(2).all(|p| p[0] == p[1]), "{w} r={r}: {dims:?}");
    }
}

#[test]
fn network_forms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for p in PRIMES {
        let f = PrimeField::new(p).unwrap();
        for (w, r) in [("2,2,2", 2), ("3,4,2", 3), ("2,3,1", 4), ("2,3,2,2", 2)] {
            let a = arch(w, r);
            let theta = WeightAssignment::random(&a, f, &mut rng);
            let direct = forward(&a, &theta).unwrap();
            assert_eq!(forward_khatri_rao(&a, &theta).unwrap(), direct, "{w}");
            if a.depth() == 2 {
                assert_eq!(forward_cp_shallow(theta.layer(2), theta.layer(1), r).unwrap(), direct, "{w}");
            }
        }
    }
}

#[test]
fn output_invariant_under_scale_permutation_actions() {
    let f = PrimeField::new(PRIMES[1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (w, r) in [("2,3,2", 2), ("2,3,4,1", 3), ("3,2,2,2", 2)] {
        let a = arch(w, r);
        let theta = WeightAssignment::random(&a, f, &mut rng);
        let out = forward(&a, &theta).unwrap();
        for _ in 0..20 {
            let g = ScalePermAction::random(&a, f, &mut rng);
            let moved = apply_action(&a, &theta, &g).unwrap();
            assert_ne!(moved, theta);
            assert_eq!(forward(&a, &moved).unwrap(), out);
        }
    }
}
