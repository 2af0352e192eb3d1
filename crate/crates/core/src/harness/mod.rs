//! Synthetic novelty experiments: scenario generation, detection, metric
//! reports and seed batteries.

mod detect;
mod generate;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compressor::{compress_len, ByteSequence, CompressError, CompressorId};
use crate::kg::{self, strip_novel, KgError, KnowledgeGraph};
use crate::mdl::{
    encode_hypothesis, fit_candidate, fit_family, Dataset, Family, MdlError, DEFAULT_EPSILON,
};
use crate::metrics::{
    adaptability_aeff, aggregate, experience_eff, priors_pd, red_estimate, AgentSnapshots,
    ByteAppend, Curriculum, Experience, KgUnion, MetricError, MetricReport, RedEstimators,
    StateFold, TaskReport, TaskSpec,
};
use crate::net::{encode_net, quantize, NetError};

pub use detect::{
    detect, mean_bits_per_point, Classification, FittedModel, MismatchReport, DEFAULT_MARGIN,
    DEFAULT_TAU,
};
pub use generate::{
    gen_kg_novelty, gen_net_novelty, gen_net_novelty_with, gen_regression_novelty,
    gen_regression_novelty_with, quadratic, sine, KgNovelty, NetNovelty, NetTraining,
    RegressionNovelty, Switch, NET_TARGET_MSE, REGRESSION_NOISE,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mdl(#[from] MdlError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Compress(#[from] CompressError),
    #[error("{task} network did not reach the target error: mse {mse}")]
    NotConverged { task: String, mse: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Short machine-readable kind for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Mdl(_) => "mdl",
            HarnessError::Net(_) => "network",
            HarnessError::Kg(_) => "kg",
            HarnessError::Metric(_) => "metric",
            HarnessError::Compress(_) => "compressor",
            HarnessError::NotConverged { .. } => "not_converged",
            HarnessError::Io(_) => "io",
        }
    }

    /// Whether the input was at fault rather than the computation.
    pub fn is_validation(&self) -> bool {
        match self {
            HarnessError::Config(_) => true,
            HarnessError::Metric(MetricError::Validation(_)) => true,
            HarnessError::Mdl(e) => matches!(
                e,
                MdlError::Dataset(_) | MdlError::TooFewPoints { .. } | MdlError::TermCount(_)
            ),
            HarnessError::Compress(e) => matches!(e, CompressError::UnknownBackend(_)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Kg,
    Regression,
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgParams {
    pub base_triples: usize,
    pub novel_triples: usize,
}

impl Default for KgParams {
    fn default() -> Self {
        Self {
            base_triples: 100,
            novel_triples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionParams {
    pub n_train: usize,
    pub n_test: usize,
    pub noise_sigma: f64,
    pub epsilon: f64,
    pub max_terms: usize,
    pub switch: Switch,
    /// Curriculum steps the novel batch is split into.
    pub batches: usize,
}

impl Default for RegressionParams {
    fn default() -> Self {
        Self {
            n_train: 200,
            n_test: 50,
            noise_sigma: REGRESSION_NOISE,
            epsilon: DEFAULT_EPSILON,
            max_terms: 8,
            switch: Switch::PolyToSine,
            batches: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    pub bits: u8,
    pub training: NetTraining,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            bits: 8,
            training: NetTraining::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    pub tau: f64,
    pub margin: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Where experience accumulation starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperienceStart {
    #[default]
    Pre,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumConfig {
    pub probability: f64,
    /// Reorders the scenario's curriculum; absent keeps the generated order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub id: String,
    pub theta: f64,
    pub omega: f64,
    #[serde(default = "default_curricula")]
    pub curricula: Vec<CurriculumConfig>,
}

fn default_curricula() -> Vec<CurriculumConfig> {
    vec![CurriculumConfig {
        probability: 1.0,
        shuffle_seed: None,
    }]
}

fn default_tasks() -> Vec<TaskConfig> {
    vec![TaskConfig {
        id: "task-0".into(),
        theta: 1.0,
        omega: 1.0,
        curricula: default_curricula(),
    }]
}

/// An experiment description. Task `i` draws its scenario with seed
/// `seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    #[serde(default = "default_backend")]
    pub backend: CompressorId,
    #[serde(default)]
    pub kg: KgParams,
    #[serde(default)]
    pub regression: RegressionParams,
    #[serde(default)]
    pub network: NetworkParams,
    #[serde(default)]
    pub detector: DetectorParams,
    #[serde(default)]
    pub experience_start: ExperienceStart,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<TaskConfig>,
}

fn default_backend() -> CompressorId {
    CompressorId::Lz
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            backend: default_backend(),
            kg: KgParams::default(),
            regression: RegressionParams::default(),
            network: NetworkParams::default(),
            detector: DetectorParams::default(),
            experience_start: ExperienceStart::default(),
            tasks: default_tasks(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.tasks.is_empty() {
            return bad("at least one task is required".into());
        }
        let mut ids = BTreeSet::new();
        for t in &self.tasks {
            if !ids.insert(t.id.as_str()) {
                return bad(format!("duplicate task id {:?}", t.id));
            }
            TaskSpec::new(t.id.clone(), t.theta, t.omega)?;
            if t.curricula.is_empty() {
                return bad(format!("task {} has no curricula", t.id));
            }
            for c in &t.curricula {
                Curriculum::new(vec![], c.probability)?;
            }
            let total: f64 = t.curricula.iter().map(|c| c.probability).sum();
            if total > 1.0 + crate::metrics::PROBABILITY_SLACK {
                return bad(format!(
                    "task {}: curriculum probabilities sum to {total}",
                    t.id
                ));
            }
        }
        match self.scenario {
            Scenario::Kg => {
                if self.kg.base_triples == 0 {
                    return bad("kg.base_triples must be at least 1".into());
                }
            }
            Scenario::Regression => {
                let r = &self.regression;
                if r.max_terms == 0 || r.max_terms > crate::mdl::MAX_TERMS {
                    return bad(format!(
                        "regression.max_terms {} outside 1..=255",
                        r.max_terms
                    ));
                }
                if r.n_train < 20 || r.n_train < r.max_terms + 1 {
                    return bad(format!("regression.n_train {} too small", r.n_train));
                }
                if r.n_test < r.max_terms + 1 {
                    return bad(format!(
                        "regression.n_test {} must exceed max_terms",
                        r.n_test
                    ));
                }
                if !(r.noise_sigma.is_finite() && r.noise_sigma > 0.0)
                    || !(r.epsilon.is_finite() && r.epsilon > 0.0)
                {
                    return bad(
                        "regression.noise_sigma and regression.epsilon must be positive".into(),
                    );
                }
                if r.batches == 0 || r.batches > r.n_test {
                    return bad(format!(
                        "regression.batches {} outside 1..=n_test",
                        r.batches
                    ));
                }
                let d = &self.detector;
                if !(d.tau.is_finite() && d.tau > 0.0) || !(d.margin.is_finite() && d.margin >= 0.0)
                {
                    return bad(
                        "detector.tau must be positive and detector.margin non-negative".into(),
                    );
                }
            }
            Scenario::Network => {
                let n = &self.network;
                if !(2..=16).contains(&n.bits) {
                    return bad(format!("network.bits {} outside 2..=16", n.bits));
                }
                if !(n.training.rate.is_finite() && n.training.rate > 0.0) {
                    return bad("network.rate must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the configuration with defaults filled in.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// Refits a fixed family and term count to the points seen so far. With
/// too few distinct points for the fit, the state encodes as `prior`.
#[derive(Debug, Clone)]
pub struct RegressionRefit {
    pub family: Family,
    pub terms: usize,
    pub epsilon: f64,
    pub prior: ByteSequence,
}

impl StateFold for RegressionRefit {
    type State = Vec<(f64, f64)>;

    fn encode(&self, state: &Self::State) -> Result<ByteSequence, MetricError> {
        let d = Dataset::new(state.clone(), self.epsilon)
            .map_err(|e| MetricError::Fold(e.to_string()))?;
        if d.distinct_x() < self.terms {
            return Ok(self.prior.clone());
        }
        let fit = fit_candidate(&d, self.family, self.terms)
            .map_err(|e| MetricError::Fold(e.to_string()))?;
        Ok(encode_hypothesis(&fit.hypothesis))
    }

    fn fold(&self, state: &Self::State, step: &ByteSequence) -> Result<Self::State, MetricError> {
        let batch = Dataset::from_csv(step.as_bytes(), self.epsilon)
            .map_err(|e| MetricError::Fold(e.to_string()))?;
        let mut next = state.clone();
        next.extend_from_slice(batch.points());
        Ok(next)
    }
}

/// Everything a scenario contributes to one task's metrics.
struct Artifacts {
    snapshots: AgentSnapshots,
    graphs: Option<(KnowledgeGraph, KnowledgeGraph)>,
    steps: Vec<ByteSequence>,
    learner: Learner,
    details: serde_json::Value,
}

enum Learner {
    Kg(KnowledgeGraph),
    Regression(RegressionRefit),
    Bytes(ByteSequence),
}

impl Learner {
    fn experience(
        &self,
        post: &ByteSequence,
        cur: &Curriculum,
        c: &CompressorId,
    ) -> Result<Experience, MetricError> {
        match self {
            Learner::Kg(start) => experience_eff(post, cur, &KgUnion, start, c),
            Learner::Regression(fold) => experience_eff(post, cur, fold, &Vec::new(), c),
            Learner::Bytes(start) => experience_eff(post, cur, &ByteAppend, start, c),
        }
    }
}

fn kg_artifacts(cfg: &ExperimentConfig, seed: u64) -> Result<Artifacts, HarnessError> {
    let g = gen_kg_novelty(seed, cfg.kg.base_triples, cfg.kg.novel_triples)?;
    let pretr = strip_novel(&g.post, &g.marks)?;
    let snapshots = AgentSnapshots {
        pre: kg::encode(&g.pre)?,
        pretr: kg::encode(&pretr)?,
        post: kg::encode(&g.post)?,
    };
    let details = json!({
        "seed": seed,
        "pre_triples": g.pre.triples().len(),
        "post_triples": g.post.triples().len(),
        "novel_entities": g.marks.entities.len(),
        "encoded_bytes": {"pre": snapshots.pre.len(), "post": snapshots.post.len()},
        "compressed_bits": {
            "pre": compress_len(&snapshots.pre, &cfg.backend)?.bits(),
            "post": compress_len(&snapshots.post, &cfg.backend)?.bits(),
        },
    });
    let start = match cfg.experience_start {
        ExperienceStart::Pre => g.pre.clone(),
        ExperienceStart::Empty => KnowledgeGraph::empty(),
    };
    Ok(Artifacts {
        snapshots,
        graphs: Some((pretr, g.post)),
        steps: g.curriculum,
        learner: Learner::Kg(start),
        details,
    })
}

fn regression_artifacts(cfg: &ExperimentConfig, seed: u64) -> Result<Artifacts, HarnessError> {
    let p = &cfg.regression;
    let data = gen_regression_novelty_with(
        seed,
        p.n_train,
        p.n_test,
        p.switch,
        p.noise_sigma,
        p.epsilon,
    )?;
    let pre_fit = fit_family(&data.train, Family::Polynomial, p.max_terms)?;
    let model = FittedModel::new(&data.train, pre_fit.clone())?;
    let same = model.detect(&data.test_same, cfg.detector.tau, cfg.detector.margin)?;
    let novel = model.detect(&data.test_novel, cfg.detector.tau, cfg.detector.margin)?;

    let post_fit = [Family::Polynomial, Family::Fourier]
        .into_iter()
        .map(|f| fit_family(&data.test_novel, f, p.max_terms))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .reduce(|best, f| if f.total < best.total { f } else { best })
        .expect("two families");
    let (family, terms) = (
        post_fit.hypothesis.family(),
        post_fit.hypothesis.term_count(),
    );
    let pretr = fit_candidate(&data.train, family, terms)?.hypothesis;

    let pre_bytes = encode_hypothesis(&pre_fit.hypothesis);
    let snapshots = AgentSnapshots {
        pre: pre_bytes.clone(),
        pretr: encode_hypothesis(&pretr),
        post: encode_hypothesis(&post_fit.hypothesis),
    };
    let pts = data.test_novel.points();
    let per = pts.len().div_ceil(p.batches);
    let steps = pts
        .chunks(per)
        .map(|c| {
            Ok(ByteSequence::new(
                Dataset::new(c.to_vec(), p.epsilon)?.to_csv(),
            ))
        })
        .collect::<Result<Vec<_>, MdlError>>()?;
    let prior = match cfg.experience_start {
        ExperienceStart::Pre => pre_bytes,
        ExperienceStart::Empty => ByteSequence::empty(),
    };
    let details = json!({
        "seed": seed,
        "pre_fit": pre_fit,
        "post_fit": post_fit,
        "pretr_hypothesis": pretr,
        "detector": {"same_regime": same, "novel_regime": novel},
    });
    Ok(Artifacts {
        snapshots,
        graphs: None,
        steps,
        learner: Learner::Regression(RegressionRefit {
            family,
            terms,
            epsilon: p.epsilon,
            prior,
        }),
        details,
    })
}

fn network_artifacts(cfg: &ExperimentConfig, seed: u64) -> Result<Artifacts, HarnessError> {
    let p = &cfg.network;
    let nets = gen_net_novelty_with(seed, &p.training)?;
    let enc =
        |n| -> Result<ByteSequence, NetError> { Ok(encode_net(&quantize(n, p.bits.into())?)) };
    let snapshots = AgentSnapshots {
        pre: enc(&nets.pre_net)?,
        pretr: enc(&nets.post_init)?,
        post: enc(&nets.post_net)?,
    };
    let steps = nets
        .post_task
        .examples()
        .into_iter()
        .map(|(x, t)| ByteSequence::new(x.iter().chain(&t).map(|&v| v as u8).collect::<Vec<_>>()))
        .collect();
    let details = json!({
        "seed": seed,
        "pre_mse": nets.pre_net.mse(&nets.pre_task.examples())?,
        "post_mse": nets.post_net.mse(&nets.post_task.examples())?,
        "encoded_bytes": {
            "pre": snapshots.pre.len(),
            "pretr": snapshots.pretr.len(),
            "post": snapshots.post.len(),
        },
    });
    let start = match cfg.experience_start {
        ExperienceStart::Pre => snapshots.pre.clone(),
        ExperienceStart::Empty => ByteSequence::empty(),
    };
    Ok(Artifacts {
        snapshots,
        graphs: None,
        steps,
        learner: Learner::Bytes(start),
        details,
    })
}

fn reorder(steps: &[ByteSequence], shuffle_seed: Option<u64>) -> Vec<ByteSequence> {
    let mut out = steps.to_vec();
    if let Some(s) = shuffle_seed {
        out.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    out
}

/// Runs every task of `cfg` and assembles the report.
///
/// The task-level `eeff`, `steps` and `aeff` are those of the task's most
/// probable curriculum (the first on ties); the aggregate weighs every
/// curriculum by its probability.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricReport, HarnessError> {
    cfg.validate()?;
    let c = &cfg.backend;
    let mut tasks = Vec::with_capacity(cfg.tasks.len());
    let mut weighted = Vec::with_capacity(cfg.tasks.len());
    let mut details = Vec::with_capacity(cfg.tasks.len());
    for (i, task) in cfg.tasks.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let art = match cfg.scenario {
            Scenario::Kg => kg_artifacts(cfg, seed)?,
            Scenario::Regression => regression_artifacts(cfg, seed)?,
            Scenario::Network => network_artifacts(cfg, seed)?,
        };
        let s = &art.snapshots;
        let est = red_estimate(s, art.graphs.as_ref().map(|(a, b)| (a, b)), c)?;
        let pd = priors_pd(s, c)?;

        let mut runs = Vec::with_capacity(task.curricula.len());
        for cc in &task.curricula {
            let cur = Curriculum::new(reorder(&art.steps, cc.shuffle_seed), cc.probability)?;
            let exp = if cur.steps.is_empty() {
                Experience {
                    eeff: 0.0,
                    steps: vec![],
                }
            } else {
                art.learner.experience(&s.post, &cur, c)?
            };
            let aeff = adaptability_aeff(est.red, pd, exp.eeff);
            runs.push((cur, exp, aeff));
        }
        let main = runs
            .iter()
            .enumerate()
            .reduce(|best, r| {
                if r.1 .0.probability > best.1 .0.probability {
                    r
                } else {
                    best
                }
            })
            .map(|(i, _)| i)
            .expect("validated non-empty");
        let (_, exp, aeff) = &runs[main];

        let mut flags = Vec::new();
        if let Some(f) = aeff.flag {
            flags.push(f.as_str().to_string());
        }
        if est.edit_script.is_some_and(|e| e < est.conditional) {
            flags.push("red_from_edit_script".to_string());
        }
        tasks.push(TaskReport {
            id: task.id.clone(),
            theta: task.theta,
            omega: task.omega,
            red: est.red,
            red_estimators: RedEstimators {
                conditional: est.conditional,
                edit_script: est.edit_script,
            },
            pd,
            eeff: exp.eeff,
            steps: exp.steps.clone(),
            aeff: *aeff,
            flags,
        });
        let spec = TaskSpec::new(task.id.clone(), task.theta, task.omega)?;
        weighted.push((
            spec,
            runs.into_iter().map(|(cur, _, a)| (cur, a.value)).collect(),
        ));
        details.push(art.details);
    }
    Ok(MetricReport {
        backend: c.to_string(),
        config_hash: cfg.hash(),
        tasks,
        aggregate: aggregate(&weighted)?,
        details: Some(json!({ "scenario": cfg.scenario, "tasks": details })),
    })
}

/// Runs `cfg` for seeds `cfg.seed .. cfg.seed + seeds` in parallel; results
/// come back in seed order.
pub fn battery(
    cfg: &ExperimentConfig,
    seeds: usize,
) -> Vec<(u64, Result<MetricReport, HarnessError>)> {
    (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let mut run = cfg.clone();
            run.seed = cfg.seed.wrapping_add(i);
            (run.seed, run_experiment(&run))
        })
        .collect()
}

/// Writes `report` to `path` through a temporary file in the same
/// directory, so readers never see a partial report.
pub fn write_report(path: &Path, report: &MetricReport) -> Result<(), HarnessError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(report.to_json().as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| HarnessError::Io(e.error))?;
    Ok(())
}
