use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covering::SoftCoveringInstance;
use crate::dist::{kl_of, ConditionalKernel};
use crate::error::{Error, Result};

/// Default limit on `|U|^n * |X|^n` for exact divergence.
pub const COVERING_CELL_CAP: usize = 1 << 24;

/// Sequence index of `(s_0, ..., s_{n-1})` over an alphabet of size `k`:
/// `Σ_i s_i k^i`, so coordinate 0 is the least significant digit.
pub fn sequence_index(symbols: &[usize], k: usize) -> usize {
    symbols.iter().rev().fold(0, |acc, &s| acc * k + s)
}

pub fn sequence_symbols(mut index: usize, k: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let s = index % k;
            index /= k;
            s
        })
        .collect()
}

fn checked_pow(base: usize, n: usize, what: &'static str, cap: usize) -> Result<usize> {
    match base.checked_pow(n as u32) {
        Some(v) if v <= cap => Ok(v),
        _ => Err(Error::CapExceeded {
            what,
            requested: (base as u128).saturating_pow(n as u32),
            cap: cap as u128,
        }),
    }
}

/// Deterministic encoding `u^n -> w^n`, both as sequence indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    pub n: usize,
    pub w_size: usize,
    pub table: Vec<usize>,
}

impl Codebook {
    pub fn codeword(&self, u_index: usize) -> Vec<usize> {
        sequence_symbols(self.table[u_index], self.w_size, self.n)
    }
}

/// Draw `A(u^n) ~ Π_i p(w_i | u_i)` independently for every `u^n`.
///
/// Row `u^n` uses its own ChaCha stream keyed by `(seed, u^n)`, so the
/// result does not depend on evaluation order.
pub fn sample_codebook_from_kernel(kernel: &ConditionalKernel, n: usize, seed: u64, cap: usize) -> Result<Codebook> {
    let (nu, nw) = (kernel.in_size(), kernel.out_size());
    let rows = checked_pow(nu, n, "codebook rows", cap)?;
    checked_pow(nw, n, "codeword alphabet", usize::MAX)?;
    let table = (0..rows)
        .map(|u_index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u_index as u64);
            let us = sequence_symbols(u_index, nu, n);
            let ws: Vec<usize> = us.iter().map(|&u| draw(kernel.row(u), &mut rng)).collect();
            sequence_index(&ws, nw)
        })
        .collect();
    Ok(Codebook { n, w_size: nw, table })
}

pub fn sample_codebook(inst: &SoftCoveringInstance, n: usize, seed: u64) -> Result<Codebook> {
    sample_codebook_from_kernel(inst.w_given_u(), n, seed, COVERING_CELL_CAP)
}

fn draw<R: Rng>(row: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in row.iter().enumerate() {
        cum += p;
        if r < cum {
            return i;
        }
    }
    // rounding left r above the total: take the last supported symbol
    row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Kronecker product of per-coordinate rows, coordinate 0 least significant.
fn kron_into(rows: &[&[f64]], out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    for row in rows {
        let len = out.len();
        let mut next = Vec::with_capacity(len * row.len());
        for &r in *row {
            next.extend(out.iter().map(|&o| o * r));
        }
        *out = next;
    }
}

/// Exact `p_{X^n | A = cb}` indexed by sequence index.
pub fn output_distribution(inst: &SoftCoveringInstance, cb: &Codebook, cap: usize) -> Result<Vec<f64>> {
    let n = cb.n;
    let (nu, nw, nx) = (inst.u_size(), inst.w_size(), inst.x_size());
    if cb.w_size != nw {
        return Err(Error::invalid("codebook alphabet does not match the instance"));
    }
    let rows = checked_pow(nu, n, "codebook rows", usize::MAX)?;
    if cb.table.len() != rows {
        return Err(Error::ShapeMismatch {
            expected: vec![rows],
            found: vec![cb.table.len()],
        });
    }
    let outs = checked_pow(nx, n, "output sequences", cap)?;
    if (rows as u128) * (outs as u128) > cap as u128 {
        return Err(Error::CapExceeded {
            what: "soft-covering enumeration",
            requested: rows as u128 * outs as u128,
            cap: cap as u128,
        });
    }
    let p_u = inst.p_u().probs();
    let mut total = vec![0.0; outs];
    let mut prod = Vec::with_capacity(outs);
    for (u_index, &w_index) in cb.table.iter().enumerate() {
        let us = sequence_symbols(u_index, nu, n);
        let weight: f64 = us.iter().map(|&u| p_u[u]).product();
        if weight == 0.0 {
            continue;
        }
        let ws = sequence_symbols(w_index, nw, n);
        let rows: Vec<&[f64]> = us.iter().zip(&ws).map(|(&u, &w)| inst.x_given_uw().row(u * nw + w)).collect();
        kron_into(&rows, &mut prod);
        total.iter_mut().zip(&prod).for_each(|(t, p)| *t += weight * p);
    }
    Ok(total)
}

/// `D(p_{X^n | A = cb} ‖ target^{⊗n})` for a single-letter `target` over `X`.
pub fn covering_divergence_to(inst: &SoftCoveringInstance, cb: &Codebook, target: &[f64], cap: usize) -> Result<f64> {
    if target.len() != inst.x_size() {
        return Err(Error::ShapeMismatch {
            expected: vec![inst.x_size()],
            found: vec![target.len()],
        });
    }
    let p = output_distribution(inst, cb, cap)?;
    let mut q = Vec::new();
    kron_into(&vec![target; cb.n], &mut q);
    Ok(kl_of(&p, &q))
}

/// `D(p_{X^n | A = cb} ‖ p_X^{⊗n})` in bits.
pub fn covering_divergence(inst: &SoftCoveringInstance, cb: &Codebook) -> Result<f64> {
    let p_x = inst.p_x()?;
    covering_divergence_to(inst, cb, p_x.probs(), COVERING_CELL_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::instance::tests::noisy_w_instance;
    use crate::dist::ProbabilityTable;

    #[test]
    fn sequence_index_roundtrip() {
        assert_eq!(sequence_index(&[1, 0, 2], 3), 1 + 2 * 9);
        assert_eq!(sequence_symbols(19, 3, 3), vec![1, 0, 2]);
    }

    #[test]
    fn deterministic_kernel_gives_its_map() {
        let k = ConditionalKernel::deterministic(&[1, 0], 2).unwrap();
        let cb = sample_codebook_from_kernel(&k, 3, 9, 1 << 10).unwrap();
        for u in 0..8 {
            assert_eq!(cb.table[u], u ^ 7);
        }
    }

    #[test]
    fn same_seed_same_codebook() {
        let inst = noisy_w_instance(0.2);
        assert_eq!(sample_codebook(&inst, 5, 3).unwrap(), sample_codebook(&inst, 5, 3).unwrap());
        assert_ne!(sample_codebook(&inst, 5, 3).unwrap(), sample_codebook(&inst, 5, 4).unwrap());
    }

    #[test]
    fn codeword_frequencies_follow_kernel() {
        let k = ConditionalKernel::new(1, 3, vec![0.2, 0.3, 0.5]).unwrap();
        let mut counts = [0usize; 3];
        let draws = 10_000;
        for seed in 0..draws {
            counts[sample_codebook_from_kernel(&k, 1, seed, 4).unwrap().table[0]] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip([0.2, 0.3, 0.5])
            .map(|(&c, p)| {
                let e = p * draws as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 99.9% quantile of chi-square with 2 degrees of freedom
        assert!(chi2 < 13.8, "chi2 = {chi2}");
    }

    #[test]
    fn independent_output_has_zero_divergence() {
        let p_u = ProbabilityTable::uniform(2).unwrap();
        let x = ConditionalKernel::constant(4, &ProbabilityTable::from_vec(vec![0.3, 0.7]).unwrap()).unwrap();
        let inst = SoftCoveringInstance::new(p_u, ConditionalKernel::bsc(0.4).unwrap(), x).unwrap();
        let cb = sample_codebook(&inst, 4, 1).unwrap();
        assert!(covering_divergence(&inst, &cb).unwrap().abs() < 1e-12);
    }

    #[test]
    fn constant_codebook_with_copy_channel() {
        // X = W with p_X uniform; a constant codeword gives a point mass
        let half = ProbabilityTable::uniform(2).unwrap();
        let x = ConditionalKernel::deterministic(&[0, 1, 0, 1], 2).unwrap();
        let inst = SoftCoveringInstance::new(half.clone(), ConditionalKernel::constant(2, &half).unwrap(), x).unwrap();
        let n = 3;
        let cb = Codebook {
            n,
            w_size: 2,
            table: vec![5; 8],
        };
        // D(point mass ‖ uniform) = 1 bit per coordinate
        assert!((covering_divergence(&inst, &cb).unwrap() - n as f64).abs() < 1e-12);
    }

    #[test]
    fn average_over_all_codebooks_is_iid_marginal() {
        let inst = noisy_w_instance(0.1);
        let w_kernel = inst.w_given_u().clone();
        for n in 1..=2 {
            let rows = 1usize << n;
            let words = 1usize << n;
            let mut avg = vec![0.0; 1 << n];
            // every assignment of codewords to rows
            for assign in 0..words.pow(rows as u32) {
                let table = sequence_symbols(assign, words, rows);
                let prob: f64 = table
                    .iter()
                    .enumerate()
                    .map(|(u, &w)| {
                        let (us, ws) = (sequence_symbols(u, 2, n), sequence_symbols(w, 2, n));
                        us.iter().zip(&ws).map(|(&a, &b)| w_kernel.prob(a, b)).product::<f64>()
                    })
                    .product();
                let cb = Codebook { n, w_size: 2, table };
                let p = output_distribution(&inst, &cb, 1 << 10).unwrap();
                avg.iter_mut().zip(&p).for_each(|(a, x)| *a += prob * x);
            }
            let mut iid = Vec::new();
            kron_into(&vec![inst.p_x().unwrap().probs(); n], &mut iid);
            for (a, b) in avg.iter().zip(&iid) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cap_is_reported() {
        let inst = noisy_w_instance(0.2);
        let cb = sample_codebook(&inst, 6, 0).unwrap();
        let err = covering_divergence_to(&inst, &cb, &[0.5, 0.5], 100).unwrap_err();
        assert!(err.is_cap());
    }
}
