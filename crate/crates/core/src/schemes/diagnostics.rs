//! Finite-instance checks on joints of binary outputs and local randomness.

use crate::dist::{kl_of, ProbabilityTable};
use crate::error::{check_range, Error, Result};
use crate::numeric::{bit_sign, CompensatedSum};
use crate::schemes::scheme::{dsbs_block_capped, split_joint_index};

/// Tolerance on independence and Markov-chain premises.
pub const PREMISE_TOLERANCE: f64 = 1e-9;

/// Conditional variances at or below this are treated as degenerate.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

fn check_xyab(joint: &ProbabilityTable) -> Result<(usize, usize)> {
    let s = joint.shape();
    if s.len() != 4 || s[0] != 2 || s[1] != 2 {
        return Err(Error::invalid(format!(
            "expected a table over (X, Y, A, B) with binary X and Y, got shape {s:?}"
        )));
    }
    Ok((s[2], s[3]))
}

/// Conditional moments of a `(X, Y, A, B)` table, `X, Y` in `{+1, -1}`.
struct Moments {
    na: usize,
    nb: usize,
    pa: Vec<f64>,
    pb: Vec<f64>,
    pab: Vec<f64>,
    /// `E(X | A = a)`
    ex_a: Vec<f64>,
    /// `E(Y | B = b)`
    ey_b: Vec<f64>,
    /// `E(XY | A = a, B = b)`
    exy_ab: Vec<f64>,
}

impl Moments {
    fn of(joint: &ProbabilityTable) -> Result<Self> {
        let (na, nb) = check_xyab(joint)?;
        let p = |x: usize, y: usize, a: usize, b: usize| joint.probs()[((x * 2 + y) * na + a) * nb + b];
        let mut pab = vec![0.0; na * nb];
        let mut sx = vec![0.0; na];
        let mut sy = vec![0.0; nb];
        let mut sxy = vec![0.0; na * nb];
        for x in 0..2 {
            for y in 0..2 {
                let (vx, vy) = (bit_sign(x, 0), bit_sign(y, 0));
                for a in 0..na {
                    for b in 0..nb {
                        let m = p(x, y, a, b);
                        pab[a * nb + b] += m;
                        sx[a] += vx * m;
                        sy[b] += vy * m;
                        sxy[a * nb + b] += vx * vy * m;
                    }
                }
            }
        }
        let pa: Vec<f64> = (0..na).map(|a| (0..nb).map(|b| pab[a * nb + b]).sum()).collect();
        let pb: Vec<f64> = (0..nb).map(|b| (0..na).map(|a| pab[a * nb + b]).sum()).collect();
        let div = |s: f64, m: f64| if m > 0.0 { s / m } else { 0.0 };
        Ok(Self {
            na,
            nb,
            ex_a: sx.iter().zip(&pa).map(|(&s, &m)| div(s, m)).collect(),
            ey_b: sy.iter().zip(&pb).map(|(&s, &m)| div(s, m)).collect(),
            exy_ab: sxy.iter().zip(&pab).map(|(&s, &m)| div(s, m)).collect(),
            pa,
            pb,
            pab,
        })
    }
}

/// `ρ(X; Y | a, b)` per cell of `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCorrelation {
    pub a_size: usize,
    pub b_size: usize,
    /// `None` for cells with zero mass or zero conditional variance.
    pub cells: Vec<Option<f64>>,
}

impl ConditionalCorrelation {
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.cells[a * self.b_size + b]
    }

    /// Largest non-degenerate cell.
    pub fn max(&self) -> Option<f64> {
        self.cells.iter().flatten().copied().reduce(f64::max)
    }

    pub fn degenerate_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }
}

/// `(E(XY|a,b) - E(X|a) E(Y|b)) / sqrt(Var(X|a) Var(Y|b))` for every `(a, b)`.
pub fn conditional_correlation(joint: &ProbabilityTable) -> Result<ConditionalCorrelation> {
    let m = Moments::of(joint)?;
    let cells = (0..m.na)
        .flat_map(|a| (0..m.nb).map(move |b| (a, b)))
        .map(|(a, b)| {
            let (ex, ey) = (m.ex_a[a], m.ey_b[b]);
            let var = (1.0 - ex * ex) * (1.0 - ey * ey);
            if m.pab[a * m.nb + b] <= 0.0 || var <= DEGENERATE_VARIANCE {
                None
            } else {
                Some((m.exy_ab[a * m.nb + b] - ex * ey) / var.sqrt())
            }
        })
        .collect();
    Ok(ConditionalCorrelation {
        a_size: m.na,
        b_size: m.nb,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerBoundReport {
    pub independent: bool,
    pub markov: bool,
    /// `max(|E X|, |E Y|, |E XY - (1-2p)|)`.
    pub eps_measured: f64,
    pub correlation_ok: bool,
    pub premises_hold: bool,
    /// `E[E(X|A)^2 + E(Y|B)^2]`.
    pub lhs: f64,
    /// `2ε(1+ε)/(1-2p)` with `ε = eps_measured`.
    pub rhs: f64,
}

impl PowerBoundReport {
    /// False only when every premise holds and the bound fails.
    pub fn holds(&self) -> bool {
        !self.premises_hold || self.lhs <= self.rhs + 1e-12
    }
}

/// Check the bias bound for a joint over `(X, Y, A, B)`.
///
/// The premises are `A ⊥ B`, the chains `X - A - B` and `Y - B - A`, every
/// conditional correlation at most `1 - 2p`, and the measured `ε` at most
/// `eps_cap`. The report never asserts; callers use [`PowerBoundReport::holds`].
pub fn power_bound_check(joint: &ProbabilityTable, p: f64, eps_cap: f64) -> Result<PowerBoundReport> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            domain: "[0, 0.5)",
        });
    }
    let m = Moments::of(joint)?;
    let (na, nb) = (m.na, m.nb);
    let cell = |x: usize, y: usize, a: usize, b: usize| joint.probs()[((x * 2 + y) * na + a) * nb + b];

    let independent = (0..na).all(|a| (0..nb).all(|b| (m.pab[a * nb + b] - m.pa[a] * m.pb[b]).abs() <= PREMISE_TOLERANCE));
    let mut markov = true;
    for a in 0..na {
        for b in 0..nb {
            let w = m.pab[a * nb + b];
            if w <= 0.0 {
                continue;
            }
            // Pr(X = +1 | a, b) against Pr(X = +1 | a), same for Y with b
            let px_ab = (cell(0, 0, a, b) + cell(0, 1, a, b)) / w;
            let py_ab = (cell(0, 0, a, b) + cell(1, 0, a, b)) / w;
            let px_a = (1.0 + m.ex_a[a]) / 2.0;
            let py_b = (1.0 + m.ey_b[b]) / 2.0;
            if (px_ab - px_a).abs() > PREMISE_TOLERANCE || (py_ab - py_b).abs() > PREMISE_TOLERANCE {
                markov = false;
            }
        }
    }
    let ex: f64 = m.ex_a.iter().zip(&m.pa).map(|(e, w)| e * w).sum();
    let ey: f64 = m.ey_b.iter().zip(&m.pb).map(|(e, w)| e * w).sum();
    let exy: f64 = m.exy_ab.iter().zip(&m.pab).map(|(e, w)| e * w).sum();
    let eps_measured = ex.abs().max(ey.abs()).max((exy - (1.0 - 2.0 * p)).abs());
    let cc = conditional_correlation(joint)?;
    let correlation_ok = cc.max().is_none_or(|r| r <= 1.0 - 2.0 * p + PREMISE_TOLERANCE);
    let lhs = m.ex_a.iter().zip(&m.pa).map(|(e, w)| w * e * e).sum::<f64>()
        + m.ey_b.iter().zip(&m.pb).map(|(e, w)| w * e * e).sum::<f64>();
    let rhs = 2.0 * eps_measured * (1.0 + eps_measured) / (1.0 - 2.0 * p);
    Ok(PowerBoundReport {
        independent,
        markov,
        eps_measured,
        correlation_ok,
        premises_hold: independent && markov && correlation_ok && eps_measured <= eps_cap,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManouverReport {
    /// `(1/2ln2) Σ_i (E X_i Y_i - (1 - 2q))^2`.
    pub claim1: f64,
    /// `(1/2ln2) Σ_i E(X_i)^2`.
    pub claim2: f64,
    /// `D(p_{X^n Y^n} || DSBS(q)^{⊗n})`.
    pub divergence: f64,
    pub eps: f64,
}

impl ManouverReport {
    /// Both claims are at most the divergence.
    pub fn below_divergence(&self) -> bool {
        self.claim1 <= self.divergence + 1e-12 && self.claim2 <= self.divergence + 1e-12
    }

    /// When the divergence is at most `eps`, both claims are too.
    pub fn holds(&self) -> bool {
        self.divergence > self.eps || (self.claim1 <= self.eps + 1e-12 && self.claim2 <= self.eps + 1e-12)
    }
}

/// Bias and correlation claims for a block table over `(X_1..X_n, Y_1..Y_n)`
/// against the target DSBS(`target_flip`).
pub fn manouver_check(joint_n: &ProbabilityTable, target_flip: f64, eps: f64) -> Result<ManouverReport> {
    check_range("target_flip", target_flip, 0.0, 1.0, "[0, 1]")?;
    let arity = joint_n.arity();
    if arity == 0 || !arity.is_multiple_of(2) || joint_n.shape().iter().any(|&s| s != 2) {
        return Err(Error::invalid("expected a binary block table over (X^n, Y^n)"));
    }
    let n = arity / 2;
    let mut ex = vec![CompensatedSum::new(); n];
    let mut exy = vec![CompensatedSum::new(); n];
    for (k, &w) in joint_n.probs().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (x, y) = split_joint_index(n, k);
        for i in 0..n {
            ex[i].add(w * bit_sign(x, i));
            exy[i].add(w * bit_sign(x ^ y, i));
        }
    }
    let scale = 1.0 / (2.0 * std::f64::consts::LN_2);
    let rho = 1.0 - 2.0 * target_flip;
    let claim1 = scale * exy.iter().map(|c| (c.value() - rho).powi(2)).sum::<f64>();
    let claim2 = scale * ex.iter().map(|c| c.value().powi(2)).sum::<f64>();
    let target = dsbs_block_capped(n, target_flip, joint_n.len())?;
    let divergence = kl_of(joint_n.probs(), target.probs());
    Ok(ManouverReport {
        claim1,
        claim2,
        divergence,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::dsbs;
    use crate::schemes::scheme::{induced_joint, DeterministicScheme};

    /// `(X, Y)` from `xy` independent of `(A, B)` uniform on `2 x 2`.
    fn with_independent_ab(xy: &ProbabilityTable) -> ProbabilityTable {
        let ab = ProbabilityTable::uniform(4).unwrap().reshape(vec![2, 2]).unwrap();
        xy.product(&ab).unwrap()
    }

    #[test]
    fn independent_pair_has_zero_correlation() {
        let xy = ProbabilityTable::uniform(4).unwrap().reshape(vec![2, 2]).unwrap();
        let cc = conditional_correlation(&with_independent_ab(&xy)).unwrap();
        assert!(cc.cells.iter().all(|c| c.unwrap().abs() < 1e-15));
    }

    #[test]
    fn copy_has_unit_correlation() {
        let xy = dsbs(0.0).unwrap();
        let cc = conditional_correlation(&with_independent_ab(&xy)).unwrap();
        assert!(cc.cells.iter().all(|c| (c.unwrap() - 1.0).abs() < 1e-15));
        let constant = ProbabilityTable::new(vec![2, 2], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let cc = conditional_correlation(&with_independent_ab(&constant)).unwrap();
        assert_eq!(cc.degenerate_count(), 4);
        assert_eq!(cc.max(), None);
    }

    #[test]
    fn power_bound_trivial_case() {
        let p = 0.1;
        let r = power_bound_check(&with_independent_ab(&dsbs(p).unwrap()), p, 0.1).unwrap();
        assert!(r.premises_hold);
        assert!(r.lhs.abs() < 1e-15);
        assert!(r.holds());
    }

    #[test]
    fn power_bound_flags_excess_correlation() {
        let r = power_bound_check(&with_independent_ab(&dsbs(0.0).unwrap()), 0.1, 1.0).unwrap();
        assert!(!r.correlation_ok);
        assert!(!r.premises_hold);
        assert!(r.holds());
    }

    #[test]
    fn manouver_on_exact_source_and_mismatch() {
        let (n, p, q) = (3, 0.1, 0.2);
        let s = DeterministicScheme::identity(n).unwrap();
        let exact = manouver_check(&induced_joint(&s, p).unwrap(), p, 0.0).unwrap();
        assert!(exact.claim1 < 1e-20 && exact.claim2 < 1e-20);
        assert!(exact.holds());
        let r = manouver_check(&induced_joint(&s, p).unwrap(), q, 1.0).unwrap();
        let want = n as f64 * (2.0 * (q - p)).powi(2) / (2.0 * std::f64::consts::LN_2);
        assert!((r.claim1 - want).abs() < 1e-12);
        assert!(r.below_divergence());
    }
}
