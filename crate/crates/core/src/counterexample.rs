//! Block-parity schemes: a DSBS simulation with small divergence whose `Y`
//! channel is far from every memoryless channel.
//!
//! The `n` coordinates are cut into consecutive blocks of `block_len`.
//! `X = U` everywhere. Inside a block, every coordinate but the last passes
//! `V_i` through a BSC(`q`). The last coordinate is `V_last` with probability
//! `1 - mu` and the product of the block's other `V_k` with probability `mu`,
//! one coin per block.

use crate::dist::{divergence_decomposition, dsbs, ConditionalKernel, DivergenceDecomposition, ProbabilityTable};
use crate::error::{check_range, Error, Result};
use crate::numeric::bit_sign;
use crate::schemes::{
    best_scalar_approximation, block_divergence, joint_index, pushforward_dsbs, split_joint_index, BooleanMap,
    RandomizedScheme, ScalarApproximation, SparseRows, SCHEME_CELL_CAP,
};

/// Largest `n` for [`BlockParityScheme::exact_metrics`].
pub const COUNTEREXAMPLE_MAX_N: usize = 10;

/// Largest block length for the per-block checks.
pub const MAX_BLOCK_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `q` and `mu` chosen so every coordinate flips with probability `p + delta`.
    Delta,
    /// `q` and `mu` supplied directly; the target stays DSBS(`p`).
    Epsilon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParityScheme {
    pub n: usize,
    pub block_len: usize,
    /// Crossover of the source DSBS.
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    /// Crossover of the target DSBS.
    pub target_flip: f64,
    pub variant: Variant,
}

fn check_layout(n: usize, block_len: usize) -> Result<()> {
    if !(2..=MAX_BLOCK_LEN).contains(&block_len) {
        return Err(Error::invalid(format!("block length must be in 2..={MAX_BLOCK_LEN}, got {block_len}")));
    }
    if n == 0 || !n.is_multiple_of(block_len) {
        return Err(Error::invalid(format!("block length {block_len} does not divide n = {n}")));
    }
    Ok(())
}

/// Scheme targeting DSBS(`p + delta`) with `q = delta/(1-2p)` and `mu = 2 delta/(1-2p)`.
pub fn build_scheme(n: usize, block_len: usize, p: f64, delta: f64) -> Result<BlockParityScheme> {
    check_layout(n, block_len)?;
    check_range("p", p, 0.0, 0.5, "[0, 0.5)")?;
    if p >= 0.5 {
        return Err(Error::Domain {
            name: "p",
            value: p,
            domain: "[0, 0.5)",
        });
    }
    check_range("delta", delta, 0.0, 0.5 - p, "[0, 1/2 - p]")?;
    Ok(BlockParityScheme {
        n,
        block_len,
        p,
        q: delta / (1.0 - 2.0 * p),
        mu: (2.0 * delta / (1.0 - 2.0 * p)).min(1.0),
        target_flip: p + delta,
        variant: Variant::Delta,
    })
}

/// Same construction with free `q` and `mu`, compared against DSBS(`p`).
pub fn build_epsilon_variant(n: usize, block_len: usize, p: f64, q: f64, mu: f64) -> Result<BlockParityScheme> {
    check_layout(n, block_len)?;
    check_range("p", p, 0.0, 0.5, "[0, 0.5]")?;
    check_range("q", q, 0.0, 0.5, "[0, 0.5]")?;
    check_range("mu", mu, 0.0, 1.0, "[0, 1]")?;
    Ok(BlockParityScheme {
        n,
        block_len,
        p,
        q,
        mu,
        target_flip: p,
        variant: Variant::Epsilon,
    })
}

/// Exact quantities for a [`BlockParityScheme`].
#[derive(Debug, Clone)]
pub struct CounterexampleMetrics {
    /// `Pr(X_i != Y_i)` for each coordinate.
    pub flip_probs: Vec<f64>,
    /// Direct `D(p_{X^n Y^n} ‖ DSBS(target_flip)^{⊗n})`.
    pub divergence_bits: f64,
    pub decomposition: DivergenceDecomposition,
    pub scalar: ScalarApproximation,
    /// `scalar.expected_tv`.
    pub scalar_tv: f64,
}

impl BlockParityScheme {
    pub fn blocks(&self) -> usize {
        self.n / self.block_len
    }

    /// Kernel of one block's `Y` given its `V`, over `2^block_len` symbols.
    pub fn block_kernel(&self) -> Result<ConditionalKernel> {
        let l = self.block_len;
        let len = 1usize << l;
        let last = 1usize << (l - 1);
        let mut rows = vec![0.0; len * len];
        for v in 0..len {
            let rest = v & (last - 1);
            let parity = (rest.count_ones() as usize & 1) << (l - 1);
            for noise in 0..last {
                let flips = noise.count_ones() as i32;
                let pn = self.q.powi(flips) * (1.0 - self.q).powi(l as i32 - 1 - flips);
                let head = rest ^ noise;
                rows[v * len + (head | (v & last))] += (1.0 - self.mu) * pn;
                rows[v * len + (head | parity)] += self.mu * pn;
            }
        }
        ConditionalKernel::new(len, len, rows)
    }

    fn check_n(&self) -> Result<()> {
        if self.n > COUNTEREXAMPLE_MAX_N {
            return Err(Error::CapExceeded {
                what: "block-parity enumeration",
                requested: 1u128 << (2 * self.n),
                cap: 1u128 << (2 * COUNTEREXAMPLE_MAX_N),
            });
        }
        Ok(())
    }

    fn y_rows(&self) -> Result<Vec<Vec<f64>>> {
        self.check_n()?;
        let block = self.block_kernel()?;
        let l = self.block_len;
        let mask = (1usize << l) - 1;
        Ok((0..1usize << self.n)
            .map(|v| {
                let mut row = vec![1.0];
                for b in 0..self.blocks() {
                    let br = block.row((v >> (b * l)) & mask);
                    let mut next = Vec::with_capacity(row.len() << l);
                    for &k in br {
                        next.extend(row.iter().map(|&r| r * k));
                    }
                    row = next;
                }
                row
            })
            .collect())
    }

    /// Kernel of `Y^n` given `V^n`.
    pub fn y_kernel(&self) -> Result<ConditionalKernel> {
        let rows = self.y_rows()?;
        let len = rows.len();
        ConditionalKernel::new(len, len, rows.into_iter().flatten().collect())
    }

    /// Law of `(X^n, Y^n)` in the block layout.
    pub fn joint(&self) -> Result<ProbabilityTable> {
        let kg: SparseRows = self
            .y_rows()?
            .into_iter()
            .map(|r| r.into_iter().enumerate().filter(|e| e.1 > 0.0).collect())
            .collect();
        let kf: SparseRows = (0..1usize << self.n).map(|u| vec![(u, 1.0)]).collect();
        pushforward_dsbs(self.n, self.p, &kf, &kg, SCHEME_CELL_CAP)
    }

    /// Law of one block's `(X, Y)` pair of sequences.
    pub fn block_joint(&self) -> Result<ProbabilityTable> {
        let l = self.block_len;
        let block = self.block_kernel()?;
        let kg: SparseRows = (0..1usize << l)
            .map(|v| block.row(v).iter().copied().enumerate().filter(|e| e.1 > 0.0).collect())
            .collect();
        let kf: SparseRows = (0..1usize << l).map(|u| vec![(u, 1.0)]).collect();
        pushforward_dsbs(l, self.p, &kf, &kg, SCHEME_CELL_CAP)
    }

    /// Largest gap between the joint and the product of its block laws.
    pub fn factorization_error(&self) -> Result<f64> {
        let joint = self.joint()?;
        let block = self.block_joint()?;
        let (n, l) = (self.n, self.block_len);
        let mask = (1usize << l) - 1;
        let mut worst = 0.0f64;
        for (k, &pj) in joint.probs().iter().enumerate() {
            let (x, y) = split_joint_index(n, k);
            let prod: f64 = (0..self.blocks())
                .map(|b| block.probs()[joint_index(l, (x >> (b * l)) & mask, (y >> (b * l)) & mask)])
                .product();
            worst = worst.max((pj - prod).abs());
        }
        Ok(worst)
    }

    /// `E[(Π_{k<last} X_k) Y_last]` within a block whose parity coin is set,
    /// paired with its predicted value `(1-2p)^(block_len-1)`.
    pub fn parity_correlation(&self) -> Result<(f64, f64)> {
        let forced = BlockParityScheme { mu: 1.0, ..self.clone() };
        let joint = forced.block_joint()?;
        let l = self.block_len;
        let mut acc = 0.0;
        for (k, &pr) in joint.probs().iter().enumerate() {
            let (x, y) = split_joint_index(l, k);
            let xs: f64 = (0..l - 1).map(|i| bit_sign(x, i)).product();
            acc += pr * xs * bit_sign(y, l - 1);
        }
        Ok((acc, (1.0 - 2.0 * self.p).powi(l as i32 - 1)))
    }

    /// The same scheme as a mixture of deterministic maps: `B` picks the
    /// noise pattern and the parity coins.
    pub fn as_randomized(&self) -> Result<RandomizedScheme> {
        self.check_n()?;
        let (n, l) = (self.n, self.block_len);
        let blocks = self.blocks();
        let noisy: Vec<usize> = (0..n).filter(|i| i % l != l - 1).collect();
        let outcomes = 1usize << (noisy.len() + blocks);
        let mut probs = Vec::with_capacity(outcomes);
        let mut maps = Vec::with_capacity(outcomes);
        for b in 0..outcomes {
            let (noise, coins) = (b & ((1 << noisy.len()) - 1), b >> noisy.len());
            let zn = noise.count_ones() as i32;
            let rc = coins.count_ones() as i32;
            probs.push(
                self.q.powi(zn)
                    * (1.0 - self.q).powi(noisy.len() as i32 - zn)
                    * self.mu.powi(rc)
                    * (1.0 - self.mu).powi(blocks as i32 - rc),
            );
            let flip_mask = noisy
                .iter()
                .enumerate()
                .fold(0usize, |m, (j, &i)| m | (((noise >> j) & 1) << i));
            maps.push(BooleanMap::from_fn(n, n, |v| {
                let mut y = v ^ flip_mask;
                for blk in (0..blocks).filter(|blk| (coins >> blk) & 1 == 1) {
                    let last = blk * l + l - 1;
                    let others = (v >> (blk * l)) & ((1 << (l - 1)) - 1);
                    y = (y & !(1 << last)) | ((others.count_ones() as usize & 1) << last);
                }
                y
            })?);
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        RandomizedScheme::new(
            ProbabilityTable::uniform(1)?,
            ProbabilityTable::from_vec(probs)?,
            vec![BooleanMap::identity(n)?],
            maps,
        )
    }

    pub fn exact_metrics(&self) -> Result<CounterexampleMetrics> {
        let joint = self.joint()?;
        let n = self.n;
        let flip_probs = (0..n)
            .map(|i| {
                let pair = joint.marginal(&[i, n + i])?;
                Ok(pair.probs()[1] + pair.probs()[2])
            })
            .collect::<Result<Vec<_>>>()?;
        let divergence_bits = block_divergence(&joint, n, self.target_flip)?;
        let decomposition = divergence_decomposition(&joint, &dsbs(self.target_flip)?)?;
        let scalar = best_scalar_approximation(&self.y_kernel()?)?;
        Ok(CounterexampleMetrics {
            flip_probs,
            divergence_bits,
            decomposition,
            scalar_tv: scalar.expected_tv,
            scalar,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::induced_joint_randomized;

    #[test]
    fn parameters_from_delta() {
        let s = build_scheme(8, 4, 0.1, 0.05).unwrap();
        assert!((s.q - 0.0625).abs() < 1e-15 && (s.mu - 0.125).abs() < 1e-15);
        let z = build_scheme(4, 2, 0.1, 0.0).unwrap();
        assert_eq!((z.q, z.mu), (0.0, 0.0));
        assert!(build_scheme(6, 4, 0.1, 0.05).is_err());
        assert!(build_scheme(4, 1, 0.1, 0.05).is_err());
        assert!(build_scheme(4, 2, 0.3, 0.25).is_err());
    }

    #[test]
    fn zero_delta_is_identity() {
        let m = build_scheme(4, 2, 0.1, 0.0).unwrap().exact_metrics().unwrap();
        assert!(m.divergence_bits.abs() < 1e-12);
        assert!(m.scalar_tv < 1e-12);
    }

    #[test]
    fn full_parity_on_pairs_copies_the_other_bit() {
        let s = build_epsilon_variant(2, 2, 0.1, 0.0, 1.0).unwrap();
        let k = s.block_kernel().unwrap();
        for v in 0..4 {
            let y = (v & 1) | ((v & 1) << 1);
            assert_eq!(k.prob(v, y), 1.0);
        }
    }

    #[test]
    fn delta_variant_hits_target_flip() {
        let s = build_scheme(6, 3, 0.1, 0.05).unwrap();
        let m = s.exact_metrics().unwrap();
        assert!(m.flip_probs.iter().all(|f| (f - 0.15).abs() < 1e-12));
        assert!(m.decomposition.marginal_divs.iter().all(|d| d.abs() < 1e-12));
        assert!((m.decomposition.total - m.divergence_bits).abs() < 1e-10);
        // only the last coordinate of a block carries dependence
        for (i, t) in m.decomposition.mi_terms.iter().enumerate() {
            if i % 3 != 2 {
                assert!(t.abs() < 1e-12, "coordinate {i}: {t}");
            }
        }
        assert!(s.factorization_error().unwrap() < 1e-12);
    }

    #[test]
    fn parity_correlation_decays_geometrically() {
        for l in 2..=6 {
            let s = build_scheme(l, l, 0.1, 0.05).unwrap();
            let (got, want) = s.parity_correlation().unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn randomized_form_gives_the_same_joint() {
        let s = build_scheme(4, 2, 0.15, 0.05).unwrap();
        let a = s.joint().unwrap();
        let b = induced_joint_randomized(&s.as_randomized().unwrap(), s.p).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn epsilon_variant_marginal_divergence_is_second_order() {
        let (p, q) = (0.2, 0.01);
        let s = build_epsilon_variant(4, 2, p, q, 0.0).unwrap();
        let m = s.exact_metrics().unwrap();
        let shift = q * (1.0 - 2.0 * p);
        let approx = shift * shift / (2.0 * p * (1.0 - p) * std::f64::consts::LN_2);
        assert!((m.decomposition.marginal_divs[0] / approx - 1.0).abs() < 0.1);
        assert!(m.decomposition.marginal_divs[1].abs() < 1e-15);
        let clean = build_epsilon_variant(4, 2, p, 0.0, 0.5).unwrap().exact_metrics().unwrap();
        // the parity coordinate still flips with probability p + mu (1/2 - p)
        assert!(clean.decomposition.marginal_divs[0].abs() < 1e-15);
        assert!(clean.scalar_tv > 0.05);
    }

    #[test]
    fn large_n_is_capped() {
        let s = build_scheme(12, 4, 0.1, 0.05).unwrap();
        assert!(s.exact_metrics().unwrap_err().is_cap());
    }
}
