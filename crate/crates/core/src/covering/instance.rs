use crate::dist::{entropy_of, ConditionalKernel, ProbabilityTable};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Number of points in [`gamma_grid`].
pub const GAMMA_GRID_POINTS: usize = 64;

/// A triple `(U, W, X)` with `W ~ p(w|u)` and `X ~ p(x|u,w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftCoveringInstance {
    p_u: ProbabilityTable,
    w_given_u: ConditionalKernel,
    /// Input index is `u * |W| + w`.
    x_given_uw: ConditionalKernel,
}

impl SoftCoveringInstance {
    pub fn new(p_u: ProbabilityTable, w_given_u: ConditionalKernel, x_given_uw: ConditionalKernel) -> Result<Self> {
        let nu = p_u.len();
        if p_u.arity() != 1 {
            return Err(Error::invalid("p_U must be one-dimensional"));
        }
        if w_given_u.in_size() != nu {
            return Err(Error::ShapeMismatch {
                expected: vec![nu],
                found: vec![w_given_u.in_size()],
            });
        }
        let nw = w_given_u.out_size();
        if x_given_uw.in_size() != nu * nw {
            return Err(Error::ShapeMismatch {
                expected: vec![nu * nw],
                found: vec![x_given_uw.in_size()],
            });
        }
        Ok(Self {
            p_u,
            w_given_u,
            x_given_uw,
        })
    }

    /// `U` uniform binary, `W` an independent fair bit and `X = BSC(e)(W)`.
    /// The rate gap is `h(e)`.
    pub fn noisy_codeword(e: f64) -> Result<Self> {
        let half = ProbabilityTable::uniform(2)?;
        let bsc = ConditionalKernel::bsc(e)?;
        let rows = [bsc.row(0), bsc.row(1), bsc.row(0), bsc.row(1)].concat();
        Self::new(half.clone(), ConditionalKernel::constant(2, &half)?, ConditionalKernel::new(4, 2, rows)?)
    }

    /// `U ~ Bern(p1)`, `W` an independent fair bit and `X = W`. The rate gap
    /// is `h(p1) - 1`, negative unless `p1 = 1/2`.
    pub fn copied_codeword(p1: f64) -> Result<Self> {
        let half = ProbabilityTable::uniform(2)?;
        Self::new(
            ProbabilityTable::from_vec(vec![1.0 - p1, p1])?,
            ConditionalKernel::constant(2, &half)?,
            ConditionalKernel::deterministic(&[0, 1, 0, 1], 2)?,
        )
    }

    pub fn p_u(&self) -> &ProbabilityTable {
        &self.p_u
    }

    pub fn w_given_u(&self) -> &ConditionalKernel {
        &self.w_given_u
    }

    pub fn x_given_uw(&self) -> &ConditionalKernel {
        &self.x_given_uw
    }

    pub fn u_size(&self) -> usize {
        self.p_u.len()
    }

    pub fn w_size(&self) -> usize {
        self.w_given_u.out_size()
    }

    pub fn x_size(&self) -> usize {
        self.x_given_uw.out_size()
    }

    /// Joint law over `(U, W, X)`.
    pub fn joint(&self) -> Result<ProbabilityTable> {
        let (nu, nw, nx) = (self.u_size(), self.w_size(), self.x_size());
        let mut probs = Vec::with_capacity(nu * nw * nx);
        for u in 0..nu {
            for w in 0..nw {
                let puw = self.p_u.probs()[u] * self.w_given_u.prob(u, w);
                probs.extend(self.x_given_uw.row(u * nw + w).iter().map(|k| puw * k));
            }
        }
        ProbabilityTable::new(vec![nu, nw, nx], probs)
    }

    pub fn p_x(&self) -> Result<ProbabilityTable> {
        self.joint()?.marginal(&[2])
    }

    /// `H(U) - I(X; U, W)` in bits.
    pub fn rate_gap(&self) -> Result<f64> {
        let joint = self.joint()?;
        let nx = self.x_size();
        // I(X; UW) = H(X) - H(X | UW)
        let h_x = entropy_of(joint.marginal(&[2])?.probs());
        let h_uwx = entropy_of(joint.probs());
        let h_uw = entropy_of(joint.reshape(vec![joint.len() / nx, nx])?.marginal(&[0])?.probs());
        let mi = h_x - (h_uwx - h_uw);
        Ok(entropy_of(self.p_u.probs()) - mi)
    }

    /// `log2 E[Z^γ]` with `Z = p(U) p(X|U,W) / p(X)`.
    pub fn gamma_exponent(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Domain {
                name: "gamma",
                value: gamma,
                domain: "(0, 1)",
            });
        }
        let (nw, nx) = (self.w_size(), self.x_size());
        let p_x = self.p_x()?;
        let mut acc = CompensatedSum::new();
        for (u, &pu) in self.p_u.probs().iter().enumerate() {
            for w in 0..nw {
                let puw = pu * self.w_given_u.prob(u, w);
                if puw == 0.0 {
                    continue;
                }
                for x in 0..nx {
                    let k = self.x_given_uw.prob(u * nw + w, x);
                    let px = p_x.probs()[x];
                    if k == 0.0 || px == 0.0 {
                        continue;
                    }
                    let z = pu * k / px;
                    acc.add(puw * k * z.powf(gamma));
                }
            }
        }
        Ok(acc.value().log2())
    }

    /// Smallest [`gamma_exponent`](Self::gamma_exponent) over [`gamma_grid`],
    /// as `(gamma, value)`.
    pub fn min_gamma_exponent(&self) -> Result<(f64, f64)> {
        let mut best = (f64::NAN, f64::INFINITY);
        for g in gamma_grid() {
            let v = self.gamma_exponent(g)?;
            if v < best.1 {
                best = (g, v);
            }
        }
        Ok(best)
    }
}

/// Log-spaced points in `(1e-3, 1 - 1e-3)`.
pub fn gamma_grid() -> Vec<f64> {
    let (lo, hi) = (1e-3f64.ln(), (1.0 - 1e-3f64).ln());
    let step = (hi - lo) / (GAMMA_GRID_POINTS - 1) as f64;
    (0..GAMMA_GRID_POINTS).map(|i| (lo + step * i as f64).exp()).collect()
}
