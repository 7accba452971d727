use serde::{Deserialize, Serialize};

use crate::dist::{kl_of, ConditionalKernel, ProbabilityTable};
use crate::error::{check_range, Error, Result};
use crate::fourier::{
    correlated_expectation, dictator_distance_from_spectrum, BooleanFunction, DictatorDistance,
};
use crate::numeric::{reverse_bits, xlog2x, CompensatedSum};
use crate::schemes::map::BooleanMap;

/// Default cap on `4^n`, the number of `(x^n, y^n)` cells an exact
/// block computation may touch (`n <= 10`).
pub const SCHEME_CELL_CAP: usize = 1 << 20;

/// Sparse kernel rows: `rows[input]` lists `(output, probability)`.
pub type SparseRows = Vec<Vec<(usize, f64)>>;

/// Flat index of `(x^n, y^n)` in a block table over `(X_1..X_n, Y_1..Y_n)`.
#[inline]
pub fn joint_index(n: usize, x: usize, y: usize) -> usize {
    (reverse_bits(x, n) << n) | reverse_bits(y, n)
}

/// Inverse of [`joint_index`].
#[inline]
pub fn split_joint_index(n: usize, k: usize) -> (usize, usize) {
    (reverse_bits(k >> n, n), reverse_bits(k & ((1 << n) - 1), n))
}

pub(crate) fn check_cells(what: &'static str, n: usize, cap: usize) -> Result<()> {
    let requested = 1u128 << (2 * n as u32);
    if n > 31 || requested > cap as u128 {
        return Err(Error::CapExceeded {
            what,
            requested,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// `Pr(U^n = u, V^n = v)` under i.i.d. DSBS(`p`), indexed by `d_H(u, v)`.
pub(crate) fn dsbs_weights(n: usize, p: f64) -> Vec<f64> {
    let base = 1.0 / (1u64 << n) as f64;
    (0..=n)
        .map(|d| base * p.powi(d as i32) * (1.0 - p).powi((n - d) as i32))
        .collect()
}

/// DSBS(`q`)^{⊗n} in the block layout.
pub fn dsbs_block(n: usize, q: f64) -> Result<ProbabilityTable> {
    dsbs_block_capped(n, q, SCHEME_CELL_CAP)
}

pub fn dsbs_block_capped(n: usize, q: f64, cap: usize) -> Result<ProbabilityTable> {
    check_range("q", q, 0.0, 1.0, "[0, 1]")?;
    if n == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    check_cells("DSBS block table", n, cap)?;
    let w = dsbs_weights(n, q);
    let mask = (1usize << n) - 1;
    let probs = (0..1usize << (2 * n))
        .map(|k| w[((k >> n) ^ (k & mask)).count_ones() as usize])
        .collect();
    ProbabilityTable::new(vec![2; 2 * n], probs)
}

/// Exact law of `(X^n, Y^n)` when `X^n ~ kf(.|U^n)`, `Y^n ~ kg(.|V^n)` and
/// `(U^n, V^n)` is i.i.d. DSBS(`p`).
pub fn pushforward_dsbs(n: usize, p: f64, kf: &SparseRows, kg: &SparseRows, cap: usize) -> Result<ProbabilityTable> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    check_cells("induced joint", n, cap)?;
    let len = 1usize << n;
    if kf.len() != len || kg.len() != len {
        return Err(Error::invalid("kernel rows do not match the block length"));
    }
    let w = dsbs_weights(n, p);
    // m[u][y] = Pr(U = u, Y = y)
    let mut m = vec![CompensatedSum::new(); len * len];
    for (v, row) in kg.iter().enumerate() {
        for &(y, gy) in row {
            if gy == 0.0 {
                continue;
            }
            for u in 0..len {
                m[u * len + y].add(w[(u ^ v).count_ones() as usize] * gy);
            }
        }
    }
    let mut joint = vec![CompensatedSum::new(); len * len];
    for (u, row) in kf.iter().enumerate() {
        for &(x, fx) in row {
            if fx == 0.0 {
                continue;
            }
            for y in 0..len {
                joint[joint_index(n, x, y)].add(fx * m[u * len + y].value());
            }
        }
    }
    ProbabilityTable::new(vec![2; 2 * n], joint.iter().map(|c| c.value()).collect())
}

fn deterministic_rows(m: &BooleanMap) -> SparseRows {
    m.images().iter().map(|&y| vec![(y, 1.0)]).collect()
}

fn mixture_rows(dist: &ProbabilityTable, maps: &[BooleanMap]) -> SparseRows {
    let len = maps[0].images().len();
    let mut rows = vec![Vec::new(); len];
    for (u, row) in rows.iter_mut().enumerate() {
        let mut acc: Vec<(usize, f64)> = Vec::new();
        for (a, map) in maps.iter().enumerate() {
            let pa = dist.probs()[a];
            if pa == 0.0 {
                continue;
            }
            let y = map.apply(u);
            match acc.iter_mut().find(|(z, _)| *z == y) {
                Some(e) => e.1 += pa,
                None => acc.push((y, pa)),
            }
        }
        acc.sort_by_key(|e| e.0);
        *row = acc;
    }
    rows
}

fn sparse_to_kernel(n: usize, rows: &SparseRows) -> Result<ConditionalKernel> {
    let len = 1usize << n;
    let mut dense = vec![0.0; len * len];
    for (u, row) in rows.iter().enumerate() {
        for &(x, p) in row {
            dense[u * len + x] += p;
        }
    }
    ConditionalKernel::new(len, len, dense)
}

/// `X^n = f(U^n)`, `Y^n = g(V^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicScheme {
    pub n: usize,
    pub f: BooleanMap,
    pub g: BooleanMap,
}

impl DeterministicScheme {
    pub fn new(f: BooleanMap, g: BooleanMap) -> Result<Self> {
        let n = f.n_in();
        if [f.n_out(), g.n_in(), g.n_out()].iter().any(|&k| k != n) {
            return Err(Error::invalid("both maps must be n-bit to n-bit with the same n"));
        }
        Ok(Self { n, f, g })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(BooleanMap::identity(n)?, BooleanMap::identity(n)?)
    }

    pub fn f_kernel(&self) -> Result<ConditionalKernel> {
        sparse_to_kernel(self.n, &deterministic_rows(&self.f))
    }

    pub fn g_kernel(&self) -> Result<ConditionalKernel> {
        sparse_to_kernel(self.n, &deterministic_rows(&self.g))
    }
}

pub fn induced_joint(s: &DeterministicScheme, p: f64) -> Result<ProbabilityTable> {
    induced_joint_capped(s, p, SCHEME_CELL_CAP)
}

pub fn induced_joint_capped(s: &DeterministicScheme, p: f64, cap: usize) -> Result<ProbabilityTable> {
    pushforward_dsbs(s.n, p, &deterministic_rows(&s.f), &deterministic_rows(&s.g), cap)
}

/// `D(p_{X^n Y^n} || DSBS(q)^{⊗n})` for source DSBS(`p`).
pub fn simulation_divergence(s: &DeterministicScheme, p: f64, q: f64) -> Result<f64> {
    simulation_divergence_capped(s, p, q, SCHEME_CELL_CAP)
}

pub fn simulation_divergence_capped(s: &DeterministicScheme, p: f64, q: f64, cap: usize) -> Result<f64> {
    let joint = induced_joint_capped(s, p, cap)?;
    block_divergence(&joint, s.n, q)
}

/// Divergence of a block table from DSBS(`q`)^{⊗n}.
pub fn block_divergence(joint: &ProbabilityTable, n: usize, q: f64) -> Result<f64> {
    let target = dsbs_block_capped(n, q, joint.len().max(4))?;
    if joint.shape() != target.shape() {
        return Err(Error::ShapeMismatch {
            expected: target.shape().to_vec(),
            found: joint.shape().to_vec(),
        });
    }
    Ok(kl_of(joint.probs(), target.probs()))
}

/// `E d_H(f(U^n), g(V^n))` by enumeration.
pub fn expected_hamming(s: &DeterministicScheme, p: f64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    check_cells("expected Hamming distance", s.n, SCHEME_CELL_CAP)?;
    let len = 1usize << s.n;
    let w = dsbs_weights(s.n, p);
    let mut acc = CompensatedSum::new();
    for u in 0..len {
        let fu = s.f.apply(u);
        for v in 0..len {
            let d = (fu ^ s.g.apply(v)).count_ones();
            if d > 0 {
                acc.add(w[(u ^ v).count_ones() as usize] * d as f64);
            }
        }
    }
    Ok(acc.value())
}

/// Lower bound on [`simulation_divergence`] that is tight when both maps
/// are bijections:
/// `log2((1-q)/q) E d_H + n (log2((1-p)/(1-q)) - p log2((1-p)/p))`.
pub fn hamming_lower_bound(s: &DeterministicScheme, p: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain {
            name: "q",
            value: q,
            domain: "(0, 1)",
        });
    }
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    let ed = expected_hamming(s, p)?;
    // p log2((1-p)/p), continuous at the endpoints
    let p_llr = if p >= 1.0 { f64::NEG_INFINITY } else { p * (1.0 - p).log2() - xlog2x(p) };
    let n = s.n as f64;
    Ok(((1.0 - q) / q).log2() * ed + n * (((1.0 - p) / (1.0 - q)).log2() - p_llr))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateLevels {
    pub w0: f64,
    pub w1: f64,
    pub dictator: DictatorDistance,
}

impl CoordinateLevels {
    fn of(f: &BooleanFunction) -> Self {
        let spec = f.spectrum();
        let w = spec.level_weights();
        Self {
            w0: w[0],
            w1: w[1],
            dictator: dictator_distance_from_spectrum(&spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile {
    pub f: Vec<CoordinateLevels>,
    pub g: Vec<CoordinateLevels>,
    /// `Σ_i (W^0[f_i] + W^0[g_i])`.
    pub bias_sum: f64,
    /// `Σ_i (2 - W^1[f_i] - W^1[g_i])`.
    pub deficit_sum: f64,
}

impl LevelProfile {
    /// Bound on `bias_sum` for a scheme at divergence `d`.
    pub fn bias_bound(d: f64) -> f64 {
        4.0 * std::f64::consts::LN_2 * d
    }

    /// Bound on `deficit_sum` for a scheme at divergence `d` from DSBS(`p`).
    pub fn deficit_bound(d: f64, p: f64) -> f64 {
        2.0 * d / (p * (1.0 - 2.0 * p))
    }
}

pub fn level_profile(s: &DeterministicScheme) -> LevelProfile {
    let f: Vec<_> = s.f.components().iter().map(CoordinateLevels::of).collect();
    let g: Vec<_> = s.g.components().iter().map(CoordinateLevels::of).collect();
    let bias_sum = f.iter().chain(&g).map(|c| c.w0).collect::<CompensatedSum>().value();
    let deficit_sum = f.iter().chain(&g).map(|c| 1.0 - c.w1).collect::<CompensatedSum>().value();
    LevelProfile {
        f,
        g,
        bias_sum,
        deficit_sum,
    }
}

/// `X_i = f^A_i(U^n)`, `Y_i = g^B_i(V^n)` with independent local
/// randomness `A ~ a_dist`, `B ~ b_dist`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedScheme {
    pub n: usize,
    pub a_dist: ProbabilityTable,
    pub b_dist: ProbabilityTable,
    pub f_by_a: Vec<BooleanMap>,
    pub g_by_b: Vec<BooleanMap>,
}

impl RandomizedScheme {
    pub fn new(
        a_dist: ProbabilityTable,
        b_dist: ProbabilityTable,
        f_by_a: Vec<BooleanMap>,
        g_by_b: Vec<BooleanMap>,
    ) -> Result<Self> {
        if a_dist.arity() != 1 || b_dist.arity() != 1 {
            return Err(Error::invalid("local randomness laws must be one-coordinate tables"));
        }
        if f_by_a.len() != a_dist.len() || g_by_b.len() != b_dist.len() {
            return Err(Error::invalid("one map is needed per local-randomness symbol"));
        }
        let n = f_by_a[0].n_in();
        if f_by_a.iter().chain(&g_by_b).any(|m| m.n_in() != n || m.n_out() != n) {
            return Err(Error::invalid("all maps must be n-bit to n-bit with the same n"));
        }
        Ok(Self {
            n,
            a_dist,
            b_dist,
            f_by_a,
            g_by_b,
        })
    }

    pub fn from_deterministic(s: &DeterministicScheme) -> Self {
        let one = ProbabilityTable::uniform(1).expect("single symbol");
        Self {
            n: s.n,
            a_dist: one.clone(),
            b_dist: one,
            f_by_a: vec![s.f.clone()],
            g_by_b: vec![s.g.clone()],
        }
    }

    pub fn a_size(&self) -> usize {
        self.a_dist.len()
    }

    pub fn b_size(&self) -> usize {
        self.b_dist.len()
    }

    pub fn f_rows(&self) -> SparseRows {
        mixture_rows(&self.a_dist, &self.f_by_a)
    }

    pub fn g_rows(&self) -> SparseRows {
        mixture_rows(&self.b_dist, &self.g_by_b)
    }

    /// `p(x^n | u^n)` as a dense `2^n x 2^n` kernel.
    pub fn f_kernel(&self) -> Result<ConditionalKernel> {
        sparse_to_kernel(self.n, &self.f_rows())
    }

    pub fn g_kernel(&self) -> Result<ConditionalKernel> {
        sparse_to_kernel(self.n, &self.g_rows())
    }
}

pub fn induced_joint_randomized(s: &RandomizedScheme, p: f64) -> Result<ProbabilityTable> {
    induced_joint_randomized_capped(s, p, SCHEME_CELL_CAP)
}

pub fn induced_joint_randomized_capped(s: &RandomizedScheme, p: f64, cap: usize) -> Result<ProbabilityTable> {
    pushforward_dsbs(s.n, p, &s.f_rows(), &s.g_rows(), cap)
}

/// Law of `(X_i, Y_i, A, B)` over shape `[2, 2, |A|, |B|]`, symbol 0 for `+1`.
pub fn coordinate_joint(s: &RandomizedScheme, i: usize, p: f64) -> Result<ProbabilityTable> {
    if i >= s.n {
        return Err(Error::invalid(format!("coordinate {i} out of range for n = {}", s.n)));
    }
    check_range("p", p, 0.0, 0.5, "[0, 0.5]")?;
    let fa: Vec<BooleanFunction> = s.f_by_a.iter().map(|m| m.component(i)).collect();
    let gb: Vec<BooleanFunction> = s.g_by_b.iter().map(|m| m.component(i)).collect();
    let (na, nb) = (s.a_size(), s.b_size());
    let mut probs = vec![0.0; 4 * na * nb];
    for (a, f) in fa.iter().enumerate() {
        for (b, g) in gb.iter().enumerate() {
            let pab = s.a_dist.probs()[a] * s.b_dist.probs()[b];
            let (ef, eg) = (f.mean(), g.mean());
            let efg = correlated_expectation(f, g, p)?;
            for x in 0..2 {
                for y in 0..2 {
                    let (sx, sy) = (1.0 - 2.0 * x as f64, 1.0 - 2.0 * y as f64);
                    let cell = (1.0 + sx * ef + sy * eg + sx * sy * efg) / 4.0;
                    probs[((x * 2 + y) * na + a) * nb + b] = pab * cell.max(0.0);
                }
            }
        }
    }
    ProbabilityTable::new(vec![2, 2, na, nb], probs)
}

/// File form of a scheme: truth tables in hex, one per output coordinate.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SchemeFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_dist: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_dist: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f_by_a: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g_by_b: Vec<Vec<String>>,
}

/// A scheme read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Deterministic(DeterministicScheme),
    Randomized(RandomizedScheme),
}

fn map_to_hex(m: &BooleanMap) -> Vec<String> {
    m.components().iter().map(BooleanFunction::to_hex).collect()
}

fn map_from_hex(n: usize, hex: &[String], what: &str) -> Result<BooleanMap> {
    if hex.len() != n {
        return Err(Error::Parse(format!("{what}: expected {n} truth tables, got {}", hex.len())));
    }
    let comps = hex
        .iter()
        .enumerate()
        .map(|(i, h)| {
            BooleanFunction::from_hex(n, h).map_err(|e| Error::Parse(format!("{what}[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    BooleanMap::from_components(&comps)
}

impl Scheme {
    pub fn n(&self) -> usize {
        match self {
            Scheme::Deterministic(s) => s.n,
            Scheme::Randomized(s) => s.n,
        }
    }

    pub fn to_file(&self) -> SchemeFile {
        match self {
            Scheme::Deterministic(s) => SchemeFile {
                n: s.n,
                f: map_to_hex(&s.f),
                g: map_to_hex(&s.g),
                a_dist: None,
                b_dist: None,
                f_by_a: Vec::new(),
                g_by_b: Vec::new(),
            },
            Scheme::Randomized(s) => SchemeFile {
                n: s.n,
                f: Vec::new(),
                g: Vec::new(),
                a_dist: Some(s.a_dist.probs().to_vec()),
                b_dist: Some(s.b_dist.probs().to_vec()),
                f_by_a: s.f_by_a.iter().map(map_to_hex).collect(),
                g_by_b: s.g_by_b.iter().map(map_to_hex).collect(),
            },
        }
    }

    pub fn from_file(file: SchemeFile) -> Result<Self> {
        let n = file.n;
        if file.a_dist.is_none() && file.b_dist.is_none() {
            let f = map_from_hex(n, &file.f, "f")?;
            let g = map_from_hex(n, &file.g, "g")?;
            return Ok(Scheme::Deterministic(DeterministicScheme::new(f, g)?));
        }
        let a_dist = ProbabilityTable::from_vec(file.a_dist.unwrap_or_else(|| vec![1.0]))?;
        let b_dist = ProbabilityTable::from_vec(file.b_dist.unwrap_or_else(|| vec![1.0]))?;
        // a missing family falls back to the deterministic map
        let f_by_a = if file.f_by_a.is_empty() { vec![file.f.clone()] } else { file.f_by_a };
        let g_by_b = if file.g_by_b.is_empty() { vec![file.g.clone()] } else { file.g_by_b };
        let f_by_a = f_by_a
            .iter()
            .map(|h| map_from_hex(n, h, "f_by_a"))
            .collect::<Result<Vec<_>>>()?;
        let g_by_b = g_by_b
            .iter()
            .map(|h| map_from_hex(n, h, "g_by_b"))
            .collect::<Result<Vec<_>>>()?;
        Ok(Scheme::Randomized(RandomizedScheme::new(a_dist, b_dist, f_by_a, g_by_b)?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scheme serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SchemeFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{dsbs, kl_divergence};
    use crate::schemes::map::SignedPermutation;

    #[test]
    fn joint_index_layout() {
        // n = 2: coordinates (x1, x2, y1, y2), x1 = bit 0 of x
        assert_eq!(joint_index(2, 0b01, 0b00), 0b1000);
        assert_eq!(joint_index(2, 0b00, 0b10), 0b0001);
        for k in 0..16 {
            let (x, y) = split_joint_index(2, k);
            assert_eq!(joint_index(2, x, y), k);
        }
    }

    #[test]
    fn block_matches_grouped_product() {
        let want = dsbs(0.1).unwrap().product_extend_grouped(2).unwrap();
        let got = dsbs_block(2, 0.1).unwrap();
        for (a, b) in got.probs().iter().zip(want.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_and_signed_permutation_reproduce_source() {
        let target = dsbs_block(3, 0.2).unwrap();
        let id = induced_joint(&DeterministicScheme::identity(3).unwrap(), 0.2).unwrap();
        assert!(kl_divergence(&id, &target).unwrap() < 1e-14);
        let sp = SignedPermutation::new(vec![2, 0, 1], vec![-1, 1, -1]).unwrap().to_map().unwrap();
        let s = DeterministicScheme::new(sp.clone(), sp).unwrap();
        assert!(simulation_divergence(&s, 0.2, 0.2).unwrap() < 1e-14);
    }

    #[test]
    fn global_flip_gives_complement_source() {
        let s = DeterministicScheme::new(BooleanMap::identity(1).unwrap(), BooleanMap::flip_all(1).unwrap()).unwrap();
        let j = induced_joint(&s, 0.1).unwrap();
        assert!(kl_divergence(&j, &dsbs(0.9).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn identity_divergence_and_bound() {
        let s = DeterministicScheme::identity(1).unwrap();
        let d = simulation_divergence(&s, 0.1, 0.2).unwrap();
        assert!((d - 0.052_932_501_298_081_14).abs() < 1e-12);
        assert!((hamming_lower_bound(&s, 0.1, 0.2).unwrap() - d).abs() < 1e-12);
        assert!(hamming_lower_bound(&s, 0.1, 0.2).is_ok());
        assert!(hamming_lower_bound(&s, 0.1, 0.0).is_err());
        let s3 = DeterministicScheme::identity(3).unwrap();
        assert!(hamming_lower_bound(&s3, 0.2, 0.2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn constant_map_is_strictly_below() {
        let s = DeterministicScheme::new(BooleanMap::new(2, 2, vec![0; 4]).unwrap(), BooleanMap::identity(2).unwrap())
            .unwrap();
        let d = simulation_divergence(&s, 0.1, 0.2).unwrap();
        let b = hamming_lower_bound(&s, 0.1, 0.2).unwrap();
        assert!(b < d - 1e-6);
    }

    #[test]
    fn repeated_coordinate_has_positive_divergence() {
        let f = BooleanMap::from_fn(2, 2, |x| (x & 1) | ((x & 1) << 1)).unwrap();
        let s = DeterministicScheme::new(f, BooleanMap::identity(2).unwrap()).unwrap();
        assert!(simulation_divergence(&s, 0.1, 0.1).unwrap() > 0.1);
    }

    #[test]
    fn randomized_with_bsc_noise_convolves() {
        // g flips each coordinate independently with probability q
        let (n, p, q) = (2, 0.1_f64, 0.2_f64);
        let b_probs: Vec<f64> = (0..4)
            .map(|e: usize| q.powi(e.count_ones() as i32) * (1.0 - q).powi(2 - e.count_ones() as i32))
            .collect();
        let g_by_b = (0..4).map(|e| BooleanMap::from_fn(n, n, move |x| x ^ e).unwrap()).collect();
        let s = RandomizedScheme::new(
            ProbabilityTable::uniform(1).unwrap(),
            ProbabilityTable::from_vec(b_probs).unwrap(),
            vec![BooleanMap::identity(n).unwrap()],
            g_by_b,
        )
        .unwrap();
        let j = induced_joint_randomized(&s, p).unwrap();
        let conv = p * (1.0 - q) + q * (1.0 - p);
        assert!(kl_divergence(&j, &dsbs_block(n, conv).unwrap()).unwrap() < 1e-14);
        let cj = coordinate_joint(&s, 0, p).unwrap();
        assert_eq!(cj.shape(), &[2, 2, 1, 4]);
    }

    #[test]
    fn singleton_randomness_reduces_to_deterministic() {
        let f = BooleanMap::new(2, 2, vec![1, 0, 3, 3]).unwrap();
        let s = DeterministicScheme::new(f, BooleanMap::identity(2).unwrap()).unwrap();
        let r = RandomizedScheme::from_deterministic(&s);
        assert_eq!(induced_joint(&s, 0.3).unwrap(), induced_joint_randomized(&r, 0.3).unwrap());
    }

    #[test]
    fn level_profile_of_permutation_and_parity() {
        let lp = level_profile(&DeterministicScheme::identity(3).unwrap());
        assert_eq!((lp.bias_sum, lp.deficit_sum), (0.0, 0.0));
        let f = BooleanMap::from_fn(2, 2, |x| ((x & 1) ^ (x >> 1 & 1)) | (x & 2)).unwrap();
        let lp = level_profile(&DeterministicScheme::new(f, BooleanMap::identity(2).unwrap()).unwrap());
        assert_eq!(lp.f[0].w1, 0.0);
        assert_eq!(lp.deficit_sum, 1.0);
    }

    #[test]
    fn cap_is_enforced() {
        let s = DeterministicScheme::identity(3).unwrap();
        assert!(induced_joint_capped(&s, 0.1, 16).unwrap_err().is_cap());
    }

    #[test]
    fn scheme_json_roundtrip() {
        let f = BooleanMap::new(2, 2, vec![1, 0, 3, 2]).unwrap();
        let s = Scheme::Deterministic(DeterministicScheme::new(f, BooleanMap::identity(2).unwrap()).unwrap());
        let text = s.to_json();
        assert!(text.contains("\"f\""));
        assert_eq!(Scheme::from_json(&text).unwrap(), s);
        let r = Scheme::Randomized(RandomizedScheme::new(
            ProbabilityTable::from_vec(vec![0.25, 0.75]).unwrap(),
            ProbabilityTable::uniform(1).unwrap(),
            vec![BooleanMap::identity(2).unwrap(), BooleanMap::flip_all(2).unwrap()],
            vec![BooleanMap::identity(2).unwrap()],
        )
        .unwrap());
        assert_eq!(Scheme::from_json(&r.to_json()).unwrap(), r);
        assert!(Scheme::from_json("{\"n\": 2, \"f\": [\"z\", \"0\"], \"g\": []}").is_err());
    }
}
