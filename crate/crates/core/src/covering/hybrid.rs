use crate::covering::codebook::{covering_divergence_to, sample_codebook_from_kernel};
use crate::covering::report::{run_sweep, ExperimentReport, SweepConfig};
use crate::covering::SoftCoveringInstance;
use crate::dist::{cross_source, gk_common_information, CommonPartDecomposition, ConditionalKernel, ProbabilityTable};
use crate::error::{check_range, Error, Result};

/// Common-part codebook followed by per-letter channels: both agents compute
/// `K` from their own observation, map `K^n` through a shared codebook to
/// `W^n`, and emit `X ~ p(x|u,w)` and `Y ~ p(y|v,w)`.
///
/// Cells of `p_UV` at or below the common-part threshold are treated as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridInstance {
    p_uv: ProbabilityTable,
    common: CommonPartDecomposition,
    w_given_k: ConditionalKernel,
    /// Input index is `u * |W| + w`.
    x_given_uw: ConditionalKernel,
    /// Input index is `v * |W| + w`.
    y_given_vw: ConditionalKernel,
}

impl HybridInstance {
    pub fn new(
        p_uv: ProbabilityTable,
        w_given_k: ConditionalKernel,
        x_given_uw: ConditionalKernel,
        y_given_vw: ConditionalKernel,
    ) -> Result<Self> {
        let common = gk_common_information(&p_uv)?;
        let (nu, nv) = (p_uv.shape()[0], p_uv.shape()[1]);
        let nw = w_given_k.out_size();
        let checks = [
            (w_given_k.in_size(), common.components()),
            (x_given_uw.in_size(), nu * nw),
            (y_given_vw.in_size(), nv * nw),
        ];
        for (found, expected) in checks {
            if found != expected {
                return Err(Error::ShapeMismatch {
                    expected: vec![expected],
                    found: vec![found],
                });
            }
        }
        Ok(Self {
            p_uv,
            common,
            w_given_k,
            x_given_uw,
            y_given_vw,
        })
    }

    /// Wyner scheme for DSBS(`q0`) run on the common part of
    /// [`cross_source`]`(p)`.
    ///
    /// `K = 0` draws `W` uniformly and both agents pass it through a
    /// BSC(`a`) with `2a(1-a) = q0`; the two singleton components emit a
    /// fixed bit on both sides. The induced pair is DSBS(`0.8 q0`).
    pub fn cross_source_wyner(p: f64, q0: f64) -> Result<Self> {
        check_range("q0", q0, 0.0, 0.5, "[0, 0.5]")?;
        let a = 0.5 - 0.5 * (1.0 - 2.0 * q0).sqrt();
        let w_given_k = ConditionalKernel::from_rows(vec![vec![0.5, 0.5], vec![1.0, 0.0], vec![1.0, 0.0]])?;
        let bsc = ConditionalKernel::bsc(a)?;
        let mut rows = Vec::new();
        for u in 0..4 {
            for w in 0..2 {
                rows.push(match u {
                    0 | 1 => bsc.row(w).to_vec(),
                    2 => vec![1.0, 0.0],
                    _ => vec![0.0, 1.0],
                });
            }
        }
        let channel = ConditionalKernel::from_rows(rows)?;
        Self::new(cross_source(p)?, w_given_k, channel.clone(), channel)
    }

    pub fn common_part(&self) -> &CommonPartDecomposition {
        &self.common
    }

    /// The soft-covering instance with `U <- K` and `X <- (X, Y)`, where the
    /// pair is indexed `x * |Y| + y`.
    pub fn tilde_instance(&self) -> Result<SoftCoveringInstance> {
        let (nu, nv) = (self.p_uv.shape()[0], self.p_uv.shape()[1]);
        let nw = self.w_given_k.out_size();
        let (nx, ny) = (self.x_given_uw.out_size(), self.y_given_vw.out_size());
        let nk = self.common.components();
        let mut rows = vec![0.0; nk * nw * nx * ny];
        for k in 0..nk {
            let pk = self.common.k_dist.probs()[k];
            for w in 0..nw {
                let row = &mut rows[(k * nw + w) * nx * ny..(k * nw + w + 1) * nx * ny];
                if pk == 0.0 {
                    row.fill(1.0 / (nx * ny) as f64);
                    continue;
                }
                for u in (0..nu).filter(|&u| self.common.f_map[u] == k) {
                    for v in 0..nv {
                        let puv = self.p_uv.probs()[u * nv + v] / pk;
                        if puv == 0.0 {
                            continue;
                        }
                        let (xr, yr) = (self.x_given_uw.row(u * nw + w), self.y_given_vw.row(v * nw + w));
                        for x in 0..nx {
                            for y in 0..ny {
                                row[x * ny + y] += puv * xr[x] * yr[y];
                            }
                        }
                    }
                }
            }
        }
        SoftCoveringInstance::new(
            self.common.k_dist.clone(),
            self.w_given_k.clone(),
            ConditionalKernel::new(nk * nw, nx * ny, rows)?,
        )
    }

    /// Single-letter law of `(X, Y)` produced by the channels.
    pub fn induced_pair(&self) -> Result<ProbabilityTable> {
        let (nx, ny) = (self.x_given_uw.out_size(), self.y_given_vw.out_size());
        self.tilde_instance()?.p_x()?.reshape(vec![nx, ny])
    }

    /// `H(K) - I(X, Y; K, W)`; the covering argument needs this positive.
    pub fn condition_gap(&self) -> Result<f64> {
        self.tilde_instance()?.rate_gap()
    }
}

/// Exact `D(p_{X^n Y^n | A} ‖ target^{⊗n})` over random common-part codebooks.
pub fn hybrid_experiment(h: &HybridInstance, target: &ProbabilityTable, config: &SweepConfig) -> Result<ExperimentReport> {
    if h.common.components() < 2 || h.common.entropy_bits <= 0.0 {
        return Err(Error::invalid("source has no common part"));
    }
    let inst = h.tilde_instance()?;
    if target.len() != inst.x_size() {
        return Err(Error::ShapeMismatch {
            expected: vec![inst.x_size()],
            found: vec![target.len()],
        });
    }
    let rows = run_sweep(config, |n, seed| {
        let cb = sample_codebook_from_kernel(inst.w_given_u(), n, seed, config.cap_cells)?;
        covering_divergence_to(&inst, &cb, target.probs(), config.cap_cells)
    })?;
    let mut report = ExperimentReport::new("hybrid", config.seed)
        .with_param("n_list", &config.n_list)
        .with_param("trials", config.trials)
        .with_param("cap_cells", config.cap_cells)
        .with_metric("common_information_bits", h.common.entropy_bits)
        .with_metric("condition_gap_bits", h.condition_gap()?);
    report.rows = rows;
    Ok(report)
}
