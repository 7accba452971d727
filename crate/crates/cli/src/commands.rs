use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use dsim_core::counterexample::{build_epsilon_variant, build_scheme, BlockParityScheme};
use dsim_core::covering::{
    covering_experiment, hybrid_experiment, ExperimentReport, HybridInstance, ReportRow, SoftCoveringInstance,
    SweepConfig, COVERING_CELL_CAP, REPORT_SCHEMA_VERSION,
};
use dsim_core::dist::{
    cross_source, dsbs, entropy, gk_common_information, maximal_correlation, mutual_information, wyner_dsbs,
    ProbabilityTable,
};
use dsim_core::schemes::{
    best_scalar_approximation, block_divergence, hamming_lower_bound, induced_joint_capped, induced_joint_randomized_capped,
    is_signed_permutation, level_profile, BooleanMap, DeterministicScheme, LevelProfile, ScalarApproximation, Scheme,
    SignedPermutation, SCALAR_APPROX_MAX_N, SCHEME_CELL_CAP,
};

use crate::config::{ConfigError, RunConfig};

/// What a subcommand produces.
pub enum Output {
    Record(Value),
    Report(ExperimentReport),
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

fn read_input(cfg: &RunConfig) -> Result<Option<String>> {
    cfg.input
        .as_ref()
        .map(|path| std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())))
        .transpose()
}

fn is_dsbs(t: &ProbabilityTable) -> Option<f64> {
    let c = t.probs();
    let sym = t.shape() == [2, 2]
        && (c[0] - c[3]).abs() < 1e-12
        && (c[1] - c[2]).abs() < 1e-12
        && (c[0] + c[1] - 0.5).abs() < 1e-12;
    sym.then(|| 2.0 * c[1])
}

pub fn info(cfg: &RunConfig) -> Result<Output> {
    let table = match (read_input(cfg)?, cfg.preset.as_deref()) {
        (Some(text), _) => ProbabilityTable::from_json(&text)?,
        (None, Some("dsbs")) => dsbs(cfg.p.unwrap_or(0.1))?,
        (None, Some("cross-source")) => cross_source(cfg.p.unwrap_or(0.1))?,
        (None, Some(other)) => bail!(invalid(format!("unknown preset {other:?}; expected dsbs or cross-source"))),
        (None, None) => bail!(invalid("info needs a table file or --preset")),
    };
    if table.arity() != 2 {
        bail!(invalid(format!("info needs a two-coordinate table, got shape {:?}", table.shape())));
    }
    let common = gk_common_information(&table)?;
    let crossover = is_dsbs(&table);
    Ok(Output::Record(json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "info",
        "shape": table.shape(),
        "entropy_bits": entropy(&table),
        "mutual_information_bits": mutual_information(&table)?,
        "maximal_correlation": maximal_correlation(&table)?,
        "gk_common_information_bits": common.entropy_bits,
        "gk_components": common.components(),
        "dsbs_crossover": crossover,
        "wyner_bits": crossover.map(wyner_dsbs).transpose()?,
    })))
}

#[derive(Serialize)]
struct ScalarSummary {
    expected_tv: f64,
    tv_median: f64,
    tv_q90: f64,
    alignment_sigma: Vec<usize>,
    alignment_signs: Vec<i8>,
}

impl From<ScalarApproximation> for ScalarSummary {
    fn from(a: ScalarApproximation) -> Self {
        Self {
            expected_tv: a.expected_tv,
            tv_median: a.tv_quantile(0.5),
            tv_q90: a.tv_quantile(0.9),
            alignment_sigma: a.alignment.sigma,
            alignment_signs: a.alignment.signs,
        }
    }
}

fn scalar_summary(kernel: dsim_core::dist::ConditionalKernel, n: usize) -> Result<Option<ScalarSummary>> {
    if n > SCALAR_APPROX_MAX_N {
        return Ok(None);
    }
    Ok(Some(best_scalar_approximation(&kernel)?.into()))
}

fn permutation_json(sp: &Option<SignedPermutation>) -> Value {
    match sp {
        Some(s) => json!({"sigma": s.sigma, "signs": s.signs}),
        None => Value::Null,
    }
}

fn preset_scheme(name: &str, n: usize) -> Result<Scheme> {
    let s = match name {
        "identity" => DeterministicScheme::identity(n)?,
        // last output coordinate is the parity of all inputs on both sides
        "parity" => {
            let last = 1usize << (n - 1);
            let m = BooleanMap::from_fn(n, n, |x| (x & !last) | ((x.count_ones() as usize & 1) * last))?;
            DeterministicScheme::new(m.clone(), m)?
        }
        other => bail!(invalid(format!("unknown preset {other:?}; expected identity or parity"))),
    };
    Ok(Scheme::Deterministic(s))
}

pub fn analyze_scheme(cfg: &RunConfig) -> Result<Output> {
    let scheme = match (read_input(cfg)?, cfg.preset.as_deref()) {
        (Some(text), _) => Scheme::from_json(&text)?,
        (None, Some(name)) => preset_scheme(name, cfg.n.unwrap_or(3))?,
        (None, None) => bail!(invalid("analyze-scheme needs a scheme file or --preset")),
    };
    let p = cfg.p.unwrap_or(0.1);
    let q = cfg.q.unwrap_or(p);
    let cap = cfg.cap_cells.unwrap_or(SCHEME_CELL_CAP);
    let n = scheme.n();
    let mut record = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "analyze-scheme",
        "n": n,
        "p": p,
        "q": q,
    });
    match &scheme {
        Scheme::Deterministic(s) => {
            let d = block_divergence(&induced_joint_capped(s, p, cap)?, n, q)?;
            let bound = if q > 0.0 && q < 1.0 { Some(hamming_lower_bound(s, p, q)?) } else { None };
            let (sf, sg) = (is_signed_permutation(&s.f), is_signed_permutation(&s.g));
            let verdict = matches!((&sf, &sg), (Some(a), Some(b)) if a == b);
            let lp = level_profile(s);
            let levels = |c: &[dsim_core::schemes::CoordinateLevels]| -> Vec<Value> {
                c.iter()
                    .map(|l| json!({"w0": l.w0, "w1": l.w1, "dictator_distance": l.dictator.distance}))
                    .collect()
            };
            let extra = json!({
                "kind": "deterministic",
                "simulation_divergence_bits": d,
                "hamming_lower_bound_bits": bound,
                "bound_equals_divergence": bound.map(|b| (b - d).abs() <= 1e-10 * d.abs().max(1.0)),
                "f_bijection": s.f.is_bijection(),
                "g_bijection": s.g.is_bijection(),
                "f_signed_permutation": permutation_json(&sf),
                "g_signed_permutation": permutation_json(&sg),
                "verdict": if verdict { "signed-permutation" } else { "not-signed-permutation" },
                "level_profile": {
                    "bias_sum": lp.bias_sum,
                    "deficit_sum": lp.deficit_sum,
                    "bias_bound": LevelProfile::bias_bound(d),
                    "deficit_bound": if p > 0.0 && p < 0.5 { Some(LevelProfile::deficit_bound(d, p)) } else { None },
                    "f": levels(&lp.f),
                    "g": levels(&lp.g),
                },
                "scalar_f": scalar_summary(s.f_kernel()?, n)?,
                "scalar_g": scalar_summary(s.g_kernel()?, n)?,
            });
            merge(&mut record, extra);
        }
        Scheme::Randomized(s) => {
            let d = block_divergence(&induced_joint_randomized_capped(s, p, cap)?, n, q)?;
            let extra = json!({
                "kind": "randomized",
                "simulation_divergence_bits": d,
                "scalar_f": scalar_summary(s.f_kernel()?, n)?,
                "scalar_g": scalar_summary(s.g_kernel()?, n)?,
            });
            merge(&mut record, extra);
        }
    }
    Ok(Output::Record(record))
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn sweep(cfg: &RunConfig, default_n: &[usize]) -> Result<SweepConfig> {
    Ok(SweepConfig {
        n_list: cfg.n_list(default_n)?,
        trials: cfg.trials()?,
        seed: cfg.seed(),
        cap_cells: cfg.cap_cells.unwrap_or(COVERING_CELL_CAP),
    })
}

pub fn soft_cover(cfg: &RunConfig) -> Result<Output> {
    let (inst, name) = match (read_input(cfg)?, cfg.preset.as_deref()) {
        (Some(text), _) => (SoftCoveringInstance::from_json(&text)?, "file".to_string()),
        (None, None | Some("positive-gap")) => (SoftCoveringInstance::noisy_codeword(0.2)?, "positive-gap".into()),
        (None, Some("negative-gap")) => (SoftCoveringInstance::copied_codeword(0.1)?, "negative-gap".into()),
        (None, Some(other)) => bail!(invalid(format!(
            "unknown preset {other:?}; expected positive-gap or negative-gap"
        ))),
    };
    let report = covering_experiment(&inst, &sweep(cfg, &[2, 4, 6, 8])?)?.with_param("instance", name);
    Ok(Output::Report(report))
}

pub fn hybrid(cfg: &RunConfig) -> Result<Output> {
    let p = cfg.p.unwrap_or(0.1);
    let q0 = cfg.q.unwrap_or(0.065);
    let h = HybridInstance::cross_source_wyner(p, q0)?;
    let target = match read_input(cfg)? {
        Some(text) => ProbabilityTable::from_json(&text)?,
        None => h.induced_pair()?,
    };
    let report = hybrid_experiment(&h, &target, &sweep(cfg, &[1, 2, 3, 4])?)?
        .with_param("p", p)
        .with_param("q", q0)
        .with_param("target", target.probs());
    Ok(Output::Report(report))
}

fn counterexample_scheme(cfg: &RunConfig) -> Result<BlockParityScheme> {
    let n = cfg.n.unwrap_or(8);
    let block_len = cfg.block_len.unwrap_or(4);
    let p = cfg.p.unwrap_or(0.1);
    let epsilon = match cfg.preset.as_deref() {
        None | Some("delta") => cfg.mu.is_some(),
        Some("epsilon") => true,
        Some(other) => bail!(invalid(format!("unknown preset {other:?}; expected delta or epsilon"))),
    };
    if epsilon {
        Ok(build_epsilon_variant(n, block_len, p, cfg.q.unwrap_or(0.0), cfg.mu.unwrap_or(0.0))?)
    } else {
        Ok(build_scheme(n, block_len, p, cfg.delta.unwrap_or(0.05))?)
    }
}

pub fn counterexample(cfg: &RunConfig) -> Result<Output> {
    let s = counterexample_scheme(cfg)?;
    let m = s.exact_metrics()?;
    let (measured, expected) = s.parity_correlation()?;
    let mut report = ExperimentReport::new("counterexample", cfg.seed())
        .with_param("n", s.n)
        .with_param("block_len", s.block_len)
        .with_param("p", s.p)
        .with_param("q", s.q)
        .with_param("mu", s.mu)
        .with_param("target_flip", s.target_flip)
        .with_param("variant", s.variant)
        .with_metric("flip_probs", &m.flip_probs)
        .with_metric("mi_terms", &m.decomposition.mi_terms)
        .with_metric("marginal_divs", &m.decomposition.marginal_divs)
        .with_metric("decomposition_total_bits", m.decomposition.total)
        .with_metric("scalar_tv", m.scalar_tv)
        .with_metric("parity_correlation", json!({"measured": measured, "expected": expected}))
        .with_metric("factorization_error", s.factorization_error()?);
    report.rows.push(ReportRow::from_values(s.n, &[m.divergence_bits])?);
    Ok(Output::Report(report))
}
