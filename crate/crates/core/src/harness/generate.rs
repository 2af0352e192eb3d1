//! Seeded synthetic novelty scenarios.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::compressor::ByteSequence;
use crate::kg::{self, KnowledgeGraph, NovelMarks, Triple};
use crate::mdl::{Dataset, DEFAULT_EPSILON};
use crate::net::{train, DenseNetwork, NetTask};

use super::HarnessError;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// A pronounceable label of 2 to 4 consonant-vowel syllables.
fn label(rng: &mut impl Rng) -> String {
    let syllables = rng.random_range(2..=4);
    let mut s = String::with_capacity(2 * syllables);
    for _ in 0..syllables {
        s.push(*CONSONANTS.choose(rng).expect("non-empty") as char);
        s.push(*VOWELS.choose(rng).expect("non-empty") as char);
    }
    s
}

fn fresh_label(rng: &mut impl Rng, used: &mut BTreeSet<String>) -> String {
    loop {
        let l = label(rng);
        if used.insert(l.clone()) {
            return l;
        }
    }
}

/// Output of [`gen_kg_novelty`].
#[derive(Debug, Clone, PartialEq)]
pub struct KgNovelty {
    pub pre: KnowledgeGraph,
    pub post: KnowledgeGraph,
    pub marks: NovelMarks,
    /// One single-triple graph encoding per injected triple, shuffled.
    pub curriculum: Vec<ByteSequence>,
}

/// A random graph of `base_triples` triples, then `novel_triples` more,
/// each attaching a new entity to an existing one.
pub fn gen_kg_novelty(
    seed: u64,
    base_triples: usize,
    novel_triples: usize,
) -> Result<KgNovelty, HarnessError> {
    if base_triples == 0 {
        return Err(HarnessError::Config(
            "base_triples must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = BTreeSet::new();
    let n_entities = (base_triples * 3 / 5).max(4);
    let n_relations = (base_triples / 12 + 2).min(12);
    let entities: Vec<String> = (0..n_entities)
        .map(|_| fresh_label(&mut rng, &mut used))
        .collect();
    let relations: Vec<String> = (0..n_relations)
        .map(|_| fresh_label(&mut rng, &mut used))
        .collect();

    let mut triples = BTreeSet::new();
    while triples.len() < base_triples {
        let h = entities.choose(&mut rng).expect("non-empty");
        let t = entities.choose(&mut rng).expect("non-empty");
        if h != t {
            let r = relations.choose(&mut rng).expect("non-empty");
            triples.insert(Triple::new(h.clone(), r.clone(), t.clone()));
        }
    }
    let pre = KnowledgeGraph::from_triples(triples)?;

    let mut marks = NovelMarks::default();
    for _ in 0..novel_triples {
        let fresh = fresh_label(&mut rng, &mut used);
        let anchor = pre
            .entities()
            .choose(&mut rng)
            .expect("pre has entities")
            .clone();
        let r = pre
            .relations()
            .choose(&mut rng)
            .expect("pre has relations")
            .clone();
        let t = if rng.random_bool(0.5) {
            Triple::new(fresh.clone(), r, anchor)
        } else {
            Triple::new(anchor, r, fresh.clone())
        };
        marks.entities.push(fresh);
        marks.triples.push(t);
    }
    let post = pre.union(&KnowledgeGraph::from_triples(
        marks.triples.iter().cloned(),
    )?)?;

    let mut order = marks.triples.clone();
    order.shuffle(&mut rng);
    let curriculum = order
        .into_iter()
        .map(|t| kg::encode(&KnowledgeGraph::from_triples([t])?))
        .collect::<Result<_, _>>()?;
    Ok(KgNovelty {
        pre,
        post,
        marks,
        curriculum,
    })
}

/// The regime change applied to held-out regression data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Switch {
    /// Quadratic before, `sin(4x)` after.
    #[default]
    PolyToSine,
}

pub fn quadratic(x: f64) -> f64 {
    3.0 * x * x + 7.0 * x + 2.0
}

pub fn sine(x: f64) -> f64 {
    libm::sin(4.0 * x)
}

/// Output of [`gen_regression_novelty`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionNovelty {
    pub train: Dataset,
    pub test_same: Dataset,
    pub test_novel: Dataset,
}

/// Noise level and precision of generated regression data.
pub const REGRESSION_NOISE: f64 = 0.1;

/// Training and same-regime test data from the quadratic, novel test data
/// from the sine, all with x uniform on `[−1, 1]`.
pub fn gen_regression_novelty(
    seed: u64,
    n_train: usize,
    n_test: usize,
    switch: Switch,
) -> Result<RegressionNovelty, HarnessError> {
    gen_regression_novelty_with(
        seed,
        n_train,
        n_test,
        switch,
        REGRESSION_NOISE,
        DEFAULT_EPSILON,
    )
}

pub fn gen_regression_novelty_with(
    seed: u64,
    n_train: usize,
    n_test: usize,
    switch: Switch,
    noise_sigma: f64,
    epsilon: f64,
) -> Result<RegressionNovelty, HarnessError> {
    if n_train < 20 {
        return Err(HarnessError::Config(format!(
            "n_train must be at least 20, got {n_train}"
        )));
    }
    if n_test == 0 {
        return Err(HarnessError::Config("n_test must be at least 1".into()));
    }
    let noise = Normal::new(0.0, noise_sigma)
        .ok()
        .filter(|_| noise_sigma > 0.0)
        .ok_or_else(|| {
            HarnessError::Config(format!("noise sigma must be positive, got {noise_sigma}"))
        })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, f: fn(f64) -> f64| -> Result<Dataset, HarnessError> {
        let pts = (0..n)
            .map(|_| {
                let x = rng.random_range(-1.0..=1.0);
                (x, f(x) + noise.sample(&mut rng))
            })
            .collect();
        Ok(Dataset::new(pts, epsilon)?)
    };
    let novel_fn = match switch {
        Switch::PolyToSine => sine,
    };
    Ok(RegressionNovelty {
        train: draw(n_train, quadratic)?,
        test_same: draw(n_test, quadratic)?,
        test_novel: draw(n_test, novel_fn)?,
    })
}

/// Training schedule for the network scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetTraining {
    pub pre_epochs: usize,
    pub post_epochs: usize,
    pub rate: f64,
}

impl Default for NetTraining {
    fn default() -> Self {
        Self {
            pre_epochs: 5000,
            post_epochs: 20000,
            rate: 0.2,
        }
    }
}

/// Networks must reach this mean squared error on their task.
pub const NET_TARGET_MSE: f64 = 0.05;

/// Output of [`gen_net_novelty`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetNovelty {
    pub pre_task: NetTask,
    pub post_task: NetTask,
    pub pre_net: DenseNetwork,
    /// The post structure carrying the trained pre weights, before retraining.
    pub post_init: DenseNetwork,
    pub post_net: DenseNetwork,
}

/// A 2-4-1 network trained on XOR, then widened to 3-4-1 (the extra input
/// column drawn fresh) and retrained on 3-input parity.
pub fn gen_net_novelty(seed: u64) -> Result<NetNovelty, HarnessError> {
    gen_net_novelty_with(seed, &NetTraining::default())
}

pub fn gen_net_novelty_with(seed: u64, schedule: &NetTraining) -> Result<NetNovelty, HarnessError> {
    let (pre_task, post_task) = (NetTask::Xor, NetTask::Parity3);
    let converged = |net: DenseNetwork, task: NetTask| -> Result<DenseNetwork, HarnessError> {
        let mse = net.mse(&task.examples())?;
        if mse < NET_TARGET_MSE {
            Ok(net)
        } else {
            Err(HarnessError::NotConverged {
                task: format!("{task:?}"),
                mse,
            })
        }
    };

    let init = DenseNetwork::seeded(&[2, 4, 1], seed)?;
    let pre_net = converged(
        train(
            &init,
            &pre_task.examples(),
            schedule.pre_epochs,
            schedule.rate,
        )?,
        pre_task,
    )?;

    let fresh = DenseNetwork::seeded(&[3, 4, 1], seed ^ 0x9E37_79B9_7F4A_7C15)?;
    let mut first = fresh.weights()[0].clone();
    for o in 0..4 {
        first[o * 3] = pre_net.weights()[0][o * 2];
        first[o * 3 + 1] = pre_net.weights()[0][o * 2 + 1];
    }
    let post_init = DenseNetwork::new(
        vec![3, 4, 1],
        vec![first, pre_net.weights()[1].clone()],
        pre_net.biases().to_vec(),
    )?;
    let post_net = converged(
        train(
            &post_init,
            &post_task.examples(),
            schedule.post_epochs,
            schedule.rate,
        )?,
        post_task,
    )?;
    Ok(NetNovelty {
        pre_task,
        post_task,
        pre_net,
        post_init,
        post_net,
    })
}
