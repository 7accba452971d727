//! Walsh–Hadamard analysis of Boolean functions on `{-1,+1}^n`.

mod boolean;
mod transform;

pub use boolean::{BooleanFunction, MAX_VARS};
pub use transform::{fourier_weight, inverse_wht, wht, wht_naive, FourierSpectrum};

use crate::error::{check_range, Error, Result};
use crate::numeric::CompensatedSum;

/// Default largest `n` for [`correlated_expectation_direct`].
pub const DIRECT_ENUMERATION_CAP: usize = 12;

fn same_n(f: &BooleanFunction, g: &BooleanFunction) -> Result<()> {
    if f.n() != g.n() {
        return Err(Error::ShapeMismatch {
            expected: vec![f.n()],
            found: vec![g.n()],
        });
    }
    Ok(())
}

/// `E[f(U^n) g(V^n)]` for `(U^n, V^n)` i.i.d. DSBS(`p`), via the spectrum:
/// `Σ_S (1-2p)^|S| f̂_S ĝ_S`.
pub fn correlated_expectation(f: &BooleanFunction, g: &BooleanFunction, p: f64) -> Result<f64> {
    same_n(f, g)?;
    check_range("p", p, 0.0, 0.5, "[0, 0.5]")?;
    let (sf, sg) = (f.spectrum(), g.spectrum());
    let rho = 1.0 - 2.0 * p;
    let powers: Vec<f64> = (0..=f.n()).map(|k| rho.powi(k as i32)).collect();
    let acc: CompensatedSum = sf
        .coeffs()
        .iter()
        .zip(sg.coeffs())
        .enumerate()
        .map(|(s, (a, b))| powers[s.count_ones() as usize] * a * b)
        .collect();
    Ok(acc.value())
}

/// The same expectation by summing over all `4^n` input pairs.
pub fn correlated_expectation_direct(f: &BooleanFunction, g: &BooleanFunction, p: f64) -> Result<f64> {
    correlated_expectation_direct_capped(f, g, p, DIRECT_ENUMERATION_CAP)
}

pub fn correlated_expectation_direct_capped(
    f: &BooleanFunction,
    g: &BooleanFunction,
    p: f64,
    max_n: usize,
) -> Result<f64> {
    same_n(f, g)?;
    check_range("p", p, 0.0, 0.5, "[0, 0.5]")?;
    let n = f.n();
    if n > max_n {
        return Err(Error::CapExceeded {
            what: "direct correlated expectation",
            requested: 1u128 << (2 * n),
            cap: 1u128 << (2 * max_n),
        });
    }
    let len = 1usize << n;
    // probability of a pair at Hamming distance d
    let by_dist: Vec<f64> = (0..=n)
        .map(|d| p.powi(d as i32) * (1.0 - p).powi((n - d) as i32) / len as f64)
        .collect();
    let mut acc = CompensatedSum::new();
    for u in 0..len {
        let fu = f.value(u) as f64;
        for v in 0..len {
            let w = by_dist[(u ^ v).count_ones() as usize];
            if w != 0.0 {
                acc.add(w * fu * g.value(v) as f64);
            }
        }
    }
    Ok(acc.value())
}

/// Upper bound `½ Σ_k (1-2p)^k (W^k[f] + W^k[g])` on the correlated expectation.
pub fn corrbound_rhs(f: &BooleanFunction, g: &BooleanFunction, p: f64) -> Result<f64> {
    same_n(f, g)?;
    check_range("p", p, 0.0, 0.5, "[0, 0.5]")?;
    let (wf, wg) = (f.spectrum().level_weights(), g.spectrum().level_weights());
    let rho = 1.0 - 2.0 * p;
    let acc: CompensatedSum = (0..=f.n())
        .map(|k| rho.powi(k as i32) * (wf[k] + wg[k]))
        .collect();
    Ok(0.5 * acc.value())
}

/// Closest signed dictator `b·u_j` under the uniform measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictatorDistance {
    /// 0-based coordinate.
    pub coordinate: usize,
    pub sign: i8,
    /// `Pr(f(U^n) != sign·U_j) = (1 - |f̂_{j}|) / 2`.
    pub distance: f64,
}

/// Ties go to the smallest coordinate, then to the `+1` sign.
pub fn dictator_distance(f: &BooleanFunction) -> DictatorDistance {
    dictator_distance_from_spectrum(&f.spectrum())
}

pub fn dictator_distance_from_spectrum(spec: &FourierSpectrum) -> DictatorDistance {
    let mut best = (0usize, spec.coeff(1));
    for j in 1..spec.n() {
        let c = spec.coeff(1 << j);
        if c.abs() > best.1.abs() {
            best = (j, c);
        }
    }
    DictatorDistance {
        coordinate: best.0,
        sign: if best.1 < 0.0 { -1 } else { 1 },
        distance: (1.0 - best.1.abs()) / 2.0,
    }
}
