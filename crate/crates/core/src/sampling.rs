//! Random instances for property tests and sweeps.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dist::{ConditionalKernel, ProbabilityTable};
use crate::error::{Error, Result};
use crate::fourier::BooleanFunction;
use crate::schemes::{power_bound_check, BooleanMap, RandomizedScheme, SignedPermutation};

pub fn random_boolean_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BooleanFunction> {
    let bits: Vec<bool> = (0..1usize << n).map(|_| rng.gen()).collect();
    BooleanFunction::from_bits(n, |x| bits[x])
}

pub fn random_map<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Result<BooleanMap> {
    let images = (0..1usize << n_in).map(|_| rng.gen_range(0..1usize << n_out)).collect();
    BooleanMap::new(n_in, n_out, images)
}

pub fn random_bijection<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BooleanMap> {
    let mut images: Vec<usize> = (0..1usize << n).collect();
    images.shuffle(rng);
    BooleanMap::new(n, n, images)
}

pub fn random_signed_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SignedPermutation {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    let signs = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
    SignedPermutation { sigma, signs }
}

/// Swap the images of `swaps` random pairs of inputs.
pub fn perturb_map<R: Rng + ?Sized>(m: &BooleanMap, swaps: usize, rng: &mut R) -> Result<BooleanMap> {
    let mut images = m.images().to_vec();
    let len = images.len();
    for _ in 0..swaps {
        let (a, b) = (rng.gen_range(0..len), rng.gen_range(0..len));
        images.swap(a, b);
    }
    BooleanMap::new(m.n_in(), m.n_out(), images)
}

fn random_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    // normalized exponentials are uniform on the simplex
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Uniform draw from the simplex over `shape`.
pub fn random_table<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Result<ProbabilityTable> {
    let cells = shape.iter().product();
    let mut probs = random_weights(cells, rng);
    // renormalize so the sum is 1 to within rounding
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    ProbabilityTable::new(shape.to_vec(), probs)
}

pub fn random_kernel<R: Rng + ?Sized>(in_size: usize, out_size: usize, rng: &mut R) -> Result<ConditionalKernel> {
    let rows = (0..in_size).flat_map(|_| random_weights(out_size, rng)).collect();
    ConditionalKernel::new(in_size, out_size, rows)
}

pub fn random_randomized_scheme<R: Rng + ?Sized>(
    n: usize,
    a_size: usize,
    b_size: usize,
    rng: &mut R,
) -> Result<RandomizedScheme> {
    let a_dist = random_table(&[a_size], rng)?;
    let b_dist = random_table(&[b_size], rng)?;
    let f_by_a = (0..a_size).map(|_| random_map(n, n, rng)).collect::<Result<_>>()?;
    let g_by_b = (0..b_size).map(|_| random_map(n, n, rng)).collect::<Result<_>>()?;
    RandomizedScheme::new(a_dist, b_dist, f_by_a, g_by_b)
}

/// One candidate joint over `(X, Y, A, B)` with `A ⊥ B`, `X - A - B`,
/// `Y - B - A` and conditional correlations at most `1 - 2p`. Returns `None`
/// when the drawn moments do not form a valid distribution.
pub fn candidate_xyab<R: Rng + ?Sized>(p: f64, na: usize, nb: usize, rng: &mut R) -> Result<Option<ProbabilityTable>> {
    let pa = random_weights(na, rng);
    let pb = random_weights(nb, rng);
    let spread: f64 = rng.gen_range(0.0..0.6);
    let mx: Vec<f64> = (0..na).map(|_| rng.gen_range(-spread..=spread)).collect();
    let my: Vec<f64> = (0..nb).map(|_| rng.gen_range(-spread..=spread)).collect();
    let rho_max = 1.0 - 2.0 * p;
    let mut probs = vec![0.0; 4 * na * nb];
    for a in 0..na {
        for b in 0..nb {
            let rho = rho_max - rng.gen_range(0.0..0.2) * rng.gen::<f64>();
            let e = mx[a] * my[b] + rho * ((1.0 - mx[a] * mx[a]) * (1.0 - my[b] * my[b])).sqrt();
            for x in 0..2 {
                for y in 0..2 {
                    let (sx, sy) = (1.0 - 2.0 * x as f64, 1.0 - 2.0 * y as f64);
                    let cell = (1.0 + sx * mx[a] + sy * my[b] + sx * sy * e) / 4.0;
                    if cell < 0.0 {
                        return Ok(None);
                    }
                    probs[((x * 2 + y) * na + a) * nb + b] = pa[a] * pb[b] * cell;
                }
            }
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|c| *c /= total);
    Ok(Some(ProbabilityTable::new(vec![2, 2, na, nb], probs)?))
}

/// Rejection-sample a joint whose bias-bound premises hold with `ε <= eps_cap`.
pub fn admissible_xyab<R: Rng + ?Sized>(
    p: f64,
    eps_cap: f64,
    max_tries: usize,
    rng: &mut R,
) -> Result<ProbabilityTable> {
    for _ in 0..max_tries {
        let na = rng.gen_range(1..=3);
        let nb = rng.gen_range(1..=3);
        if let Some(t) = candidate_xyab(p, na, nb, rng)? {
            if power_bound_check(&t, p, eps_cap)?.premises_hold {
                return Ok(t);
            }
        }
    }
    Err(Error::invalid(format!("no admissible joint found in {max_tries} draws")))
}
