//! Seeded generators for randomized checks. Every randomized check in the crate
//! takes an explicit seed and draws from a ChaCha stream, so runs reproduce
//! bit-for-bit across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{ComplexMatrix, C64};

pub type CheckRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> CheckRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Entries uniform in the unit square of the complex plane.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    loop {
        let v = random_vector(rng, n);
        let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if len > 1e-3 {
            return v.into_iter().map(|z| z / len).collect();
        }
    }
}

/// Unitary from Gram-Schmidt on the columns of a random matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    loop {
        let m = random_matrix(rng, n, n);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v = m.column(j);
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
            let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if len < 1e-6 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|z| z / len).collect());
        }
        if ok {
            return ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// Random combination of the given basis with coefficients in the unit square.
pub fn random_combination(rng: &mut impl Rng, basis: &[ComplexMatrix]) -> ComplexMatrix {
    let (r, c) = basis.first().map_or((0, 0), ComplexMatrix::shape);
    let mut out = ComplexMatrix::zeros(r, c);
    for b in basis {
        out += &b.scale(random_complex(rng));
    }
    out
}

/// Random probability vector (nonnegative, summing to one).
pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}
