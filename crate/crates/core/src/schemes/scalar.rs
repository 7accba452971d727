use itertools::Itertools;
use pathfinding::prelude::{kuhn_munkres, Matrix};

use crate::dist::ConditionalKernel;
use crate::error::{Error, Result};
use crate::numeric::{bit_sign, CompensatedSum};
use crate::schemes::map::SignedPermutation;

/// Largest `n` for which the alignment is found by trying every permutation.
pub const EXHAUSTIVE_ALIGNMENT_MAX_N: usize = 8;

/// Largest `n` accepted (the kernel has `4^n` entries).
pub const SCALAR_APPROX_MAX_N: usize = 10;

/// Closest memoryless channel `Π_i q_i(x_i | u_{σ(i)})` to a block kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarApproximation {
    /// Output `i` is aligned with input `alignment.sigma[i]`; the sign is
    /// that of the correlation `E[X_i U_{σ(i)}]`.
    pub alignment: SignedPermutation,
    /// `channels[i]` is `q_i(x_i | u_{σ(i)})` as a 2x2 kernel, symbol 0 for `+1`.
    pub channels: Vec<ConditionalKernel>,
    /// `E_U d_TV(p(.|U^n), Π_i q_i(.|U_{σ(i)}))` for uniform `U^n`.
    pub expected_tv: f64,
    /// The total variation for each input `u^n`.
    pub tv_by_input: Vec<f64>,
    /// `|E[X_i U_j]|` summed along the alignment.
    pub alignment_score: f64,
}

impl ScalarApproximation {
    /// Empirical quantile of the per-input distance (nearest rank).
    pub fn tv_quantile(&self, level: f64) -> f64 {
        let mut v = self.tv_by_input.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        let k = ((level.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).clamp(1, v.len());
        v[k - 1]
    }
}

fn kernel_dim(kernel: &ConditionalKernel) -> Result<usize> {
    let len = kernel.in_size();
    if len != kernel.out_size() || !len.is_power_of_two() || len < 2 {
        return Err(Error::invalid(format!(
            "kernel must be 2^n x 2^n with n >= 1, got {} x {}",
            kernel.in_size(),
            kernel.out_size()
        )));
    }
    let n = len.trailing_zeros() as usize;
    if n > SCALAR_APPROX_MAX_N {
        return Err(Error::CapExceeded {
            what: "scalar approximation",
            requested: 1u128 << (2 * n),
            cap: 1u128 << (2 * SCALAR_APPROX_MAX_N),
        });
    }
    Ok(n)
}

/// Permutation maximizing `Σ_i score[i][σ(i)]`. Exhaustive search keeps the
/// lexicographically first maximizer; larger `n` uses the Hungarian method.
fn best_alignment(score: &[Vec<f64>]) -> Vec<usize> {
    let n = score.len();
    if n <= EXHAUSTIVE_ALIGNMENT_MAX_N {
        let mut best = (f64::NEG_INFINITY, (0..n).collect::<Vec<_>>());
        for perm in (0..n).permutations(n) {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| score[i][j]).sum();
            if total > best.0 + 1e-12 {
                best = (total, perm);
            }
        }
        return best.1;
    }
    // integer weights for the assignment solver
    let weights = Matrix::from_rows(
        score
            .iter()
            .map(|row| row.iter().map(|&s| (s * 1e12).round() as i64).collect::<Vec<_>>()),
    )
    .expect("square score matrix");
    kuhn_munkres(&weights).1
}

pub fn best_scalar_approximation(kernel: &ConditionalKernel) -> Result<ScalarApproximation> {
    let n = kernel_dim(kernel)?;
    let len = 1usize << n;
    let inv = 1.0 / len as f64;

    // mean[u][i] = E[X_i | U = u]
    let mut mean = vec![0.0; len * n];
    for u in 0..len {
        for (x, &k) in kernel.row(u).iter().enumerate() {
            if k == 0.0 {
                continue;
            }
            for i in 0..n {
                mean[u * n + i] += k * bit_sign(x, i);
            }
        }
    }
    let mut corr = vec![vec![0.0; n]; n];
    for (i, row) in corr.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            let acc: CompensatedSum = (0..len).map(|u| mean[u * n + i] * bit_sign(u, j)).collect();
            *c = acc.value() * inv;
        }
    }
    let score: Vec<Vec<f64>> = corr.iter().map(|r| r.iter().map(|c| c.abs()).collect()).collect();
    let sigma = best_alignment(&score);
    let alignment_score = sigma.iter().enumerate().map(|(i, &j)| score[i][j]).sum();
    let signs = sigma
        .iter()
        .enumerate()
        .map(|(i, &j)| if corr[i][j] < 0.0 { -1 } else { 1 })
        .collect();

    // plus[i][b] = Pr(X_i = +1 | U_{σ(i)} = b)
    let mut plus = vec![[0.0; 2]; n];
    for (i, pl) in plus.iter_mut().enumerate() {
        let j = sigma[i];
        for (b, slot) in pl.iter_mut().enumerate() {
            let acc: CompensatedSum = (0..len)
                .filter(|u| (u >> j) & 1 == b)
                .map(|u| mean[u * n + i])
                .collect();
            let cond_mean = acc.value() * 2.0 * inv;
            *slot = ((1.0 + cond_mean) / 2.0).clamp(0.0, 1.0);
        }
    }
    let channels = plus
        .iter()
        .map(|pl| ConditionalKernel::new(2, 2, vec![pl[0], 1.0 - pl[0], pl[1], 1.0 - pl[1]]))
        .collect::<Result<Vec<_>>>()?;

    let mut tv_by_input = Vec::with_capacity(len);
    let mut prod = vec![0.0; len];
    for u in 0..len {
        prod[0] = 1.0;
        for i in 0..n {
            let pp = plus[i][(u >> sigma[i]) & 1];
            let half = 1 << i;
            for x in 0..half {
                let base = prod[x];
                prod[x] = base * pp;
                prod[x | half] = base * (1.0 - pp);
            }
        }
        let tv: CompensatedSum = kernel.row(u).iter().zip(&prod).map(|(a, b)| (a - b).abs()).collect();
        tv_by_input.push(0.5 * tv.value());
    }
    let expected_tv = tv_by_input.iter().copied().collect::<CompensatedSum>().value() * inv;
    Ok(ScalarApproximation {
        alignment: SignedPermutation::new(sigma, signs)?,
        channels,
        expected_tv,
        tv_by_input,
        alignment_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::map::BooleanMap;

    /// Kernel of `X_i = BSC(e_i)(U_{perm[i]})`.
    fn product_kernel(perm: &[usize], e: &[f64]) -> ConditionalKernel {
        let n = perm.len();
        let len = 1 << n;
        let mut rows = vec![0.0; len * len];
        for u in 0..len {
            for x in 0..len {
                let mut p = 1.0;
                for i in 0..n {
                    let same = ((x >> i) & 1) == ((u >> perm[i]) & 1);
                    p *= if same { 1.0 - e[i] } else { e[i] };
                }
                rows[u * len + x] = p;
            }
        }
        ConditionalKernel::new(len, len, rows).unwrap()
    }

    #[test]
    fn product_of_bscs_is_exact() {
        let k = product_kernel(&[0, 1, 2], &[0.1, 0.2, 0.3]);
        let a = best_scalar_approximation(&k).unwrap();
        assert_eq!(a.alignment, SignedPermutation::identity(3));
        assert!(a.expected_tv < 1e-12);
        assert!((a.channels[1].prob(0, 1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn permuted_product_is_recovered() {
        let k = product_kernel(&[2, 0, 1], &[0.1, 0.05, 0.3]);
        let a = best_scalar_approximation(&k).unwrap();
        assert_eq!(a.alignment.sigma, vec![2, 0, 1]);
        assert!(a.expected_tv < 1e-12);
        // an anti-correlated coordinate keeps its sign
        let k = product_kernel(&[1, 0], &[0.9, 0.0]);
        let a = best_scalar_approximation(&k).unwrap();
        assert_eq!(a.alignment.signs, vec![-1, 1]);
        assert!(a.expected_tv < 1e-12);
    }

    #[test]
    fn parity_output_is_far_from_memoryless() {
        // X_0 = U_0 U_1, X_1 = U_1
        let m = BooleanMap::from_fn(2, 2, |x| ((x & 1) ^ (x >> 1 & 1)) | (x & 2)).unwrap();
        let rows: Vec<f64> = (0..4)
            .flat_map(|u| {
                let y = m.apply(u);
                (0..4).map(move |x| if y == x { 1.0 } else { 0.0 })
            })
            .collect();
        let a = best_scalar_approximation(&ConditionalKernel::new(4, 4, rows).unwrap()).unwrap();
        assert!(a.expected_tv > 0.4);
        assert!(a.tv_quantile(1.0) >= a.tv_quantile(0.1));
    }

    #[test]
    fn hungarian_path_matches_exhaustive() {
        let score = vec![
            vec![0.1, 0.9, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.3],
            vec![0.8, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.4, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1],
        ];
        assert_eq!(best_alignment(&score), vec![1, 0, 3, 2, 5, 4, 7, 6, 8]);
    }
}
