use crate::error::{Error, Result};
use crate::fourier::boolean::BooleanFunction;
use crate::numeric::CompensatedSum;

/// Walsh–Hadamard coefficients `f̂_S`, indexed by the subset bitmask `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    /// `W^k = Σ_{|S| = k} f̂_S²`.
    pub fn weight(&self, k: usize) -> Result<f64> {
        if k > self.n {
            return Err(Error::invalid(format!("level {k} exceeds n = {}", self.n)));
        }
        Ok(self.level_weights()[k])
    }

    pub fn level_weights(&self) -> Vec<f64> {
        let mut acc = vec![CompensatedSum::new(); self.n + 1];
        for (s, &c) in self.coeffs.iter().enumerate() {
            acc[s.count_ones() as usize].add(c * c);
        }
        acc.into_iter().map(|a| a.value()).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).collect::<CompensatedSum>().value()
    }
}

fn log2_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::invalid(format!("length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros() as usize)
}

fn butterfly(data: &mut [f64]) {
    let mut h = 1;
    while h < data.len() {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Fast transform `f̂_S = 2^-n Σ_u f(u) u^S` of a real table of length `2^n`.
pub fn wht(values: &[f64]) -> Result<FourierSpectrum> {
    let n = log2_len(values.len())?;
    let mut coeffs = values.to_vec();
    butterfly(&mut coeffs);
    let scale = 1.0 / values.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    Ok(FourierSpectrum { n, coeffs })
}

/// Quadratic-time transform, kept as an oracle for [`wht`].
pub fn wht_naive(values: &[f64]) -> Result<FourierSpectrum> {
    let n = log2_len(values.len())?;
    let len = values.len();
    let coeffs = (0..len)
        .map(|s| {
            let acc: CompensatedSum = values
                .iter()
                .enumerate()
                .map(|(x, &v)| if (x & s).count_ones() % 2 == 0 { v } else { -v })
                .collect();
            acc.value() / len as f64
        })
        .collect();
    Ok(FourierSpectrum { n, coeffs })
}

/// `f(u) = Σ_S f̂_S u^S`.
pub fn inverse_wht(spec: &FourierSpectrum) -> Vec<f64> {
    let mut values = spec.coeffs.clone();
    butterfly(&mut values);
    values
}

impl BooleanFunction {
    pub fn spectrum(&self) -> FourierSpectrum {
        wht(&self.to_f64()).expect("truth table length is a power of two")
    }
}

/// `W^k[f]`.
pub fn fourier_weight(spec: &FourierSpectrum, k: usize) -> Result<f64> {
    spec.weight(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_dictator() {
        let c = BooleanFunction::constant(3, 1).unwrap().spectrum();
        assert_eq!(c.coeff(0), 1.0);
        assert!(c.coeffs()[1..].iter().all(|&x| x == 0.0));
        let d = BooleanFunction::dictator(3, 0).unwrap().spectrum();
        assert_eq!(d.coeff(0b001), 1.0);
        assert_eq!(d.weight(1).unwrap(), 1.0);
        assert_eq!(d.weight(0).unwrap(), 0.0);
    }

    #[test]
    fn majority_of_three() {
        let s = BooleanFunction::majority(3).unwrap().spectrum();
        for m in [0b001, 0b010, 0b100] {
            assert_eq!(s.coeff(m), 0.5);
        }
        assert_eq!(s.coeff(0b111), -0.5);
        assert_eq!(s.coeff(0b011), 0.0);
        assert_eq!(s.level_weights(), vec![0.0, 0.75, 0.0, 0.25]);
    }

    #[test]
    fn fast_matches_naive_and_inverts() {
        let v: Vec<f64> = (0..16).map(|i| ((i * 7 + 3) % 5) as f64 - 2.0).collect();
        let a = wht(&v).unwrap();
        let b = wht_naive(&v).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
        let back = inverse_wht(&a);
        for (x, y) in back.iter().zip(&v) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(wht(&[1.0, 2.0, 3.0]).is_err());
        assert!(a.weight(5).is_err());
    }

    #[test]
    fn full_parity_is_top_level() {
        let s = BooleanFunction::parity(4, 0b1111).unwrap().spectrum();
        assert_eq!(fourier_weight(&s, 4).unwrap(), 1.0);
    }
}
