use crate::error::{Error, Result};

/// Largest `n` accepted for a truth table.
pub const MAX_VARS: usize = 24;

/// Boolean function `{-1,+1}^n -> {-1,+1}` stored as a truth table.
///
/// Input index `x` encodes `u_i = +1` when bit `i` of `x` is clear and
/// `u_i = -1` when it is set, so coordinate `i` is 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: usize,
    values: Vec<i8>,
}

fn check_vars(n: usize) -> Result<()> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::invalid(format!("number of variables must be in 1..={MAX_VARS}, got {n}")));
    }
    Ok(())
}

impl BooleanFunction {
    pub fn new(n: usize, values: Vec<i8>) -> Result<Self> {
        check_vars(n)?;
        if values.len() != 1 << n {
            return Err(Error::ShapeMismatch {
                expected: vec![1 << n],
                found: vec![values.len()],
            });
        }
        if let Some(i) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::invalid(format!("truth table entry {i} is {}, expected +1 or -1", values[i])));
        }
        Ok(Self { n, values })
    }

    /// Build from a predicate on the input index; `true` maps to `-1`.
    pub fn from_bits(n: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        check_vars(n)?;
        Ok(Self {
            n,
            values: (0..1usize << n).map(|x| if f(x) { -1 } else { 1 }).collect(),
        })
    }

    pub fn constant(n: usize, sign: i8) -> Result<Self> {
        check_vars(n)?;
        Self::new(n, vec![sign; 1 << n])
    }

    /// `u_j` (0-based `j`).
    pub fn dictator(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::invalid(format!("coordinate {j} out of range for n = {n}")));
        }
        Self::from_bits(n, |x| (x >> j) & 1 == 1)
    }

    /// Product of the coordinates in `mask`.
    pub fn parity(n: usize, mask: usize) -> Result<Self> {
        if n < usize::BITS as usize && mask >> n != 0 {
            return Err(Error::invalid(format!("mask {mask:#b} has bits beyond n = {n}")));
        }
        Self::from_bits(n, |x| (x & mask).count_ones() % 2 == 1)
    }

    /// Majority vote of an odd number of coordinates.
    pub fn majority(n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::invalid("majority needs an odd number of inputs"));
        }
        Self::from_bits(n, |x| 2 * x.count_ones() as usize > n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    #[inline]
    pub fn value(&self, x: usize) -> i8 {
        self.values[x]
    }

    /// Output bit (1 for `-1`).
    #[inline]
    pub fn bit(&self, x: usize) -> usize {
        (self.values[x] < 0) as usize
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as i64).sum::<i64>() as f64 / self.values.len() as f64
    }

    pub fn negate(&self) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|&v| -v).collect(),
        }
    }

    /// Big-endian hex of the `2^n`-bit truth table: bit `x` of the number
    /// is 1 when `f(x) = -1`. Uses `max(1, 2^n / 4)` digits.
    pub fn to_hex(&self) -> String {
        let len = 1usize << self.n;
        let digits = (len / 4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u32;
            for b in 0..4 {
                let x = d * 4 + b;
                if x < len && self.values[x] < 0 {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble, 16).expect("nibble < 16"));
        }
        out
    }

    pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
        check_vars(n)?;
        let hex = hex.trim();
        let hex = hex.strip_prefix("0x").unwrap_or(hex);
        let len = 1usize << n;
        let digits = (len / 4).max(1);
        if hex.len() != digits {
            return Err(Error::Parse(format!(
                "truth table for n = {n} needs {digits} hex digits, got {}",
                hex.len()
            )));
        }
        let mut values = vec![1i8; len];
        for (k, c) in hex.chars().rev().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            for b in 0..4 {
                let x = k * 4 + b;
                if nibble >> b & 1 == 1 {
                    if x >= len {
                        return Err(Error::Parse(format!("hex value has bits beyond 2^{n}")));
                    }
                    values[x] = -1;
                }
            }
        }
        Ok(Self { n, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tables() {
        assert!(BooleanFunction::new(2, vec![1, -1, 1]).is_err());
        assert!(BooleanFunction::new(1, vec![1, 0]).is_err());
        assert!(BooleanFunction::new(0, vec![1]).is_err());
    }

    #[test]
    fn encoding_of_dictator_and_majority() {
        let d = BooleanFunction::dictator(3, 1).unwrap();
        assert_eq!(d.values(), &[1, 1, -1, -1, 1, 1, -1, -1]);
        let m = BooleanFunction::majority(3).unwrap();
        assert_eq!(m.value(0b000), 1);
        assert_eq!(m.value(0b011), -1);
        assert_eq!(m.value(0b100), 1);
    }

    #[test]
    fn hex_format() {
        let d = BooleanFunction::dictator(3, 0).unwrap();
        // inputs 1, 3, 5, 7 map to -1
        assert_eq!(d.to_hex(), "aa");
        assert_eq!(BooleanFunction::from_hex(3, "aa").unwrap(), d);
        let one = BooleanFunction::dictator(1, 0).unwrap();
        assert_eq!(one.to_hex(), "2");
        assert!(BooleanFunction::from_hex(1, "4").is_err());
        assert!(BooleanFunction::from_hex(2, "g").is_err());
        assert!(BooleanFunction::from_hex(3, "a").is_err());
    }
}
