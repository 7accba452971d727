use crate::error::{Error, Result};
use crate::fourier::{BooleanFunction, MAX_VARS};

/// Largest `n` accepted by [`preserves_hamming`].
pub const HAMMING_CHECK_MAX_N: usize = 6;

/// Map `{-1,+1}^n_in -> {-1,+1}^n_out`, stored as the image bit-vector of
/// every input bit-vector (bit `i` set means coordinate `i` is `-1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanMap {
    n_in: usize,
    n_out: usize,
    images: Vec<usize>,
}

impl BooleanMap {
    pub fn new(n_in: usize, n_out: usize, images: Vec<usize>) -> Result<Self> {
        if n_in == 0 || n_in > MAX_VARS || n_out == 0 || n_out > MAX_VARS {
            return Err(Error::invalid(format!("map dimensions {n_in} -> {n_out} out of range")));
        }
        if images.len() != 1 << n_in {
            return Err(Error::ShapeMismatch {
                expected: vec![1 << n_in],
                found: vec![images.len()],
            });
        }
        if let Some(&bad) = images.iter().find(|&&y| y >> n_out != 0) {
            return Err(Error::invalid(format!("image {bad:#b} has more than {n_out} bits")));
        }
        Ok(Self { n_in, n_out, images })
    }

    pub fn from_fn(n_in: usize, n_out: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::new(n_in, n_out, (0..1usize << n_in).map(f).collect())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |x| x)
    }

    /// Negate every coordinate.
    pub fn flip_all(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |x| x ^ ((1 << n) - 1))
    }

    /// Output coordinate `i` is the function `components[i]`.
    pub fn from_components(components: &[BooleanFunction]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::invalid("a map needs at least one output coordinate"))?;
        let n = first.n();
        if components.iter().any(|c| c.n() != n) {
            return Err(Error::invalid("component functions have different input sizes"));
        }
        Self::from_fn(n, components.len(), |x| {
            components
                .iter()
                .enumerate()
                .fold(0, |acc, (i, c)| acc | (c.bit(x) << i))
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn component(&self, i: usize) -> BooleanFunction {
        BooleanFunction::from_bits(self.n_in, |x| (self.images[x] >> i) & 1 == 1)
            .expect("n_in validated at construction")
    }

    pub fn components(&self) -> Vec<BooleanFunction> {
        (0..self.n_out).map(|i| self.component(i)).collect()
    }

    pub fn is_bijection(&self) -> bool {
        if self.n_in != self.n_out {
            return false;
        }
        let mut seen = vec![false; self.images.len()];
        self.images.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn compose(&self, inner: &BooleanMap) -> Result<Self> {
        if inner.n_out != self.n_in {
            return Err(Error::invalid("map dimensions do not compose"));
        }
        Self::from_fn(inner.n_in, self.n_out, |x| self.apply(inner.apply(x)))
    }
}

/// Output coordinate `i` is `signs[i] * u_{sigma[i]}` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    pub sigma: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(sigma: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = sigma.len();
        if signs.len() != n {
            return Err(Error::invalid("sigma and signs differ in length"));
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::invalid(format!("{sigma:?} is not a permutation")));
            }
        }
        if signs.iter().any(|&b| b != 1 && b != -1) {
            return Err(Error::invalid("signs must be +1 or -1"));
        }
        Ok(Self { sigma, signs })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            sigma: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn to_map(&self) -> Result<BooleanMap> {
        let n = self.n();
        BooleanMap::from_fn(n, n, |x| {
            (0..n).fold(0, |acc, i| {
                let bit = (x >> self.sigma[i]) & 1 ^ (self.signs[i] < 0) as usize;
                acc | (bit << i)
            })
        })
    }
}

/// Decompose `m` as a signed coordinate permutation, if it is one.
///
/// Each output coordinate must be a signed dictator (a first-level Fourier
/// coefficient of magnitude 1), and the source coordinates must be distinct.
pub fn is_signed_permutation(m: &BooleanMap) -> Option<SignedPermutation> {
    if m.n_in != m.n_out {
        return None;
    }
    let n = m.n_in;
    let mut sigma = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        let spec = m.component(i).spectrum();
        let j = (0..n).find(|&j| (spec.coeff(1 << j).abs() - 1.0).abs() < 1e-9)?;
        sigma.push(j);
        signs.push(if spec.coeff(1 << j) > 0.0 { 1 } else { -1 });
    }
    SignedPermutation::new(sigma, signs).ok()
}

/// True iff `d_H(m(x), m(y)) = d_H(x, y)` for every pair of inputs.
pub fn preserves_hamming(m: &BooleanMap) -> Result<bool> {
    if m.n_in > HAMMING_CHECK_MAX_N {
        return Err(Error::CapExceeded {
            what: "Hamming-preservation check",
            requested: 1u128 << (2 * m.n_in),
            cap: 1u128 << (2 * HAMMING_CHECK_MAX_N),
        });
    }
    let len = 1usize << m.n_in;
    for x in 0..len {
        for y in x + 1..len {
            if (m.apply(x) ^ m.apply(y)).count_ones() != (x ^ y).count_ones() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `Pr(|m^{-1}(m(U))| > 1)` for uniform `U`.
pub fn collision_probability(m: &BooleanMap) -> f64 {
    let mut counts = vec![0u32; 1 << m.n_out];
    for &y in &m.images {
        counts[y] += 1;
    }
    let colliding = m.images.iter().filter(|&&y| counts[y] > 1).count();
    colliding as f64 / m.images.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_signed_permutation() {
        let id = BooleanMap::identity(3).unwrap();
        assert_eq!(is_signed_permutation(&id), Some(SignedPermutation::identity(3)));
        assert!(preserves_hamming(&id).unwrap());
    }

    #[test]
    fn swap_with_flip_roundtrips() {
        let sp = SignedPermutation::new(vec![1, 0, 2], vec![1, -1, 1]).unwrap();
        let m = sp.to_map().unwrap();
        assert!(m.is_bijection());
        assert_eq!(is_signed_permutation(&m), Some(sp));
        assert!(preserves_hamming(&m).unwrap());
    }

    #[test]
    fn product_coordinate_is_not_dictator() {
        // x_0 = u_0 * u_1, x_1 = u_1
        let m = BooleanMap::from_fn(2, 2, |x| ((x & 1) ^ (x >> 1 & 1)) | (x & 2)).unwrap();
        assert!(m.is_bijection());
        assert_eq!(is_signed_permutation(&m), None);
        assert!(!preserves_hamming(&m).unwrap());
    }

    #[test]
    fn swapping_two_inputs_breaks_distances() {
        let m = BooleanMap::new(2, 2, vec![1, 0, 2, 3]).unwrap();
        assert!(!preserves_hamming(&m).unwrap());
        let constant = BooleanMap::new(2, 2, vec![0; 4]).unwrap();
        assert!(!preserves_hamming(&constant).unwrap());
        assert_eq!(collision_probability(&constant), 1.0);
    }

    #[test]
    fn components_roundtrip() {
        let m = BooleanMap::new(2, 2, vec![3, 0, 2, 1]).unwrap();
        assert_eq!(BooleanMap::from_components(&m.components()).unwrap(), m);
        assert!(BooleanMap::new(2, 2, vec![4, 0, 0, 0]).is_err());
        assert!(preserves_hamming(&BooleanMap::identity(7).unwrap()).unwrap_err().is_cap());
    }
}
