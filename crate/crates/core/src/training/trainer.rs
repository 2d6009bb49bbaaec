use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adadelta::{clip_global_norm, AdadeltaState, DEFAULT_EPS, DEFAULT_RHO};
use super::corpus::encode_pair;
use super::{PairCorpus, TrainingError, Vocab};
use crate::checkpoint::{write_atomic, ModelBundle};
use crate::numerics::{Tape, Tensor};
use crate::seq2seq::{Attention, BoundModel, ModelConfig, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub src_vocab_cap: usize,
    pub tgt_vocab_cap: usize,
    pub d_emb: usize,
    pub d_h: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub attention: Attention,
    pub max_decode_len: usize,
    pub epochs: usize,
    pub seed: u64,
    pub clip_norm: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            src_vocab_cap: 30_000,
            tgt_vocab_cap: 30_000,
            d_emb: 32,
            d_h: 64,
            enc_layers: 1,
            dec_layers: 1,
            attention: Attention::General,
            max_decode_len: 20,
            epochs: 10,
            seed: 1,
            clip_norm: 5.0,
            rho: DEFAULT_RHO,
            eps: DEFAULT_EPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Summed cross-entropy divided by target tokens (EOS included).
    pub mean_token_loss: f64,
    pub pairs: usize,
    pub tokens: usize,
}

/// Everything needed to continue training after a restart.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainState {
    pub v: u32,
    pub config: TrainConfig,
    pub epochs_done: usize,
    pub loss_log: Vec<EpochLoss>,
    pub optimizer: AdadeltaState,
    /// The model file contents, embedded.
    pub model: String,
}

/// Summed loss and gradient of every parameter for one pair.
pub fn loss_and_gradients(
    params: &ModelParams,
    src: &[usize],
    tgt: &[usize],
) -> Result<(f64, Vec<Tensor>), TrainingError> {
    let mut tape = Tape::new();
    let vars = params.bind(&mut tape);
    let model = BoundModel::from_vars(params, &vars);
    let loss = model.forward_loss(&mut tape, src, tgt)?;
    let grads = tape.backward(loss).map_err(crate::seq2seq::Seq2SeqError::from)?;
    let value = tape.value(loss).data()[0];
    Ok((value, vars.iter().map(|&v| grads.get(v)).collect()))
}

pub struct Trainer {
    config: TrainConfig,
    bundle: ModelBundle,
    optimizer: AdadeltaState,
    data: Vec<(Vec<usize>, Vec<usize>)>,
    loss_log: Vec<EpochLoss>,
}

impl Trainer {
    /// Build vocabularies from `corpus` and a seeded initial model.
    pub fn new(corpus: &PairCorpus, config: TrainConfig) -> Result<Self, TrainingError> {
        if corpus.is_empty() {
            return Err(TrainingError::EmptyCorpus);
        }
        let src_vocab = Vocab::build(corpus.sources(), config.src_vocab_cap)?;
        let tgt_vocab = Vocab::build(corpus.targets(), config.tgt_vocab_cap)?;
        let model_config = ModelConfig {
            src_vocab_size: src_vocab.len(),
            tgt_vocab_size: tgt_vocab.len(),
            d_emb: config.d_emb,
            d_h: config.d_h,
            enc_layers: config.enc_layers,
            dec_layers: config.dec_layers,
            attention: config.attention,
            max_decode_len: config.max_decode_len,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = ModelParams::initialize(&model_config, &mut rng)?;
        let bundle = ModelBundle {
            src_vocab,
            tgt_vocab,
            params,
        };
        Self::assemble(corpus, config, bundle, None, Vec::new())
    }

    /// Continue from a saved state; `corpus` must be the one training started with.
    pub fn resume(corpus: &PairCorpus, state: TrainState) -> Result<Self, TrainingError> {
        let bundle = ModelBundle::from_json(&state.model)?;
        Self::assemble(
            corpus,
            state.config,
            bundle,
            Some(state.optimizer),
            state.loss_log,
        )
    }

    fn assemble(
        corpus: &PairCorpus,
        config: TrainConfig,
        bundle: ModelBundle,
        optimizer: Option<AdadeltaState>,
        loss_log: Vec<EpochLoss>,
    ) -> Result<Self, TrainingError> {
        let data = corpus
            .pairs
            .iter()
            .map(|(s, t)| encode_pair(s, t, &bundle.src_vocab, &bundle.tgt_vocab))
            .collect::<Result<Vec<_>, _>>()?;
        let optimizer = match optimizer {
            Some(o) => o,
            None => AdadeltaState::new(bundle.params.tensors(), config.rho, config.eps)?,
        };
        Ok(Trainer {
            config,
            bundle,
            optimizer,
            data,
            loss_log,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.loss_log.len()
    }

    pub fn loss_log(&self) -> &[EpochLoss] {
        &self.loss_log
    }

    pub fn bundle(&self) -> &ModelBundle {
        &self.bundle
    }

    pub fn into_bundle(self) -> ModelBundle {
        self.bundle
    }

    /// One pass over the corpus in a seed-and-epoch-determined order.
    pub fn run_epoch(&mut self) -> Result<EpochLoss, TrainingError> {
        let epoch = self.loss_log.len() + 1;
        let mut order: Vec<usize> = (0..self.data.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        order.shuffle(&mut rng);

        let (mut total, mut tokens) = (0.0, 0);
        for i in order {
            let (src, tgt) = &self.data[i];
            let (loss, mut grads) = loss_and_gradients(&self.bundle.params, src, tgt)?;
            if !loss.is_finite() {
                return Err(TrainingError::Diverged { epoch });
            }
            clip_global_norm(&mut grads, self.config.clip_norm);
            self.optimizer.step(self.bundle.params.tensors_mut(), &grads)?;
            total += loss;
            tokens += tgt.len();
        }
        let entry = EpochLoss {
            epoch,
            mean_token_loss: total / tokens as f64,
            pairs: self.data.len(),
            tokens,
        };
        self.loss_log.push(entry.clone());
        Ok(entry)
    }

    pub fn state(&self) -> Result<TrainState, TrainingError> {
        Ok(TrainState {
            v: crate::checkpoint::FORMAT_VERSION,
            config: self.config.clone(),
            epochs_done: self.epochs_done(),
            loss_log: self.loss_log.clone(),
            optimizer: self.optimizer.clone(),
            model: self.bundle.to_json()?,
        })
    }

    /// Write `model.json` and `train_state.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), TrainingError> {
        std::fs::create_dir_all(dir)?;
        self.bundle.save(&dir.join(MODEL_FILE))?;
        let state = serde_json::to_vec(&self.state()?).map_err(crate::checkpoint::CheckpointError::from)?;
        write_atomic(&dir.join(STATE_FILE), &state)?;
        Ok(())
    }

    pub fn load_state(dir: &Path) -> Result<TrainState, TrainingError> {
        let text = std::fs::read_to_string(dir.join(STATE_FILE))?;
        Ok(serde_json::from_str(&text).map_err(crate::checkpoint::CheckpointError::from)?)
    }

    /// Run until `config.epochs` epochs are done, saving after each one when
    /// `checkpoint_dir` is set.
    pub fn run<F: FnMut(&EpochLoss)>(
        &mut self,
        checkpoint_dir: Option<&Path>,
        mut on_epoch: F,
    ) -> Result<(), TrainingError> {
        while self.epochs_done() < self.config.epochs {
            let entry = self.run_epoch()?;
            if let Some(dir) = checkpoint_dir {
                self.save(dir)?;
            }
            on_epoch(&entry);
        }
        Ok(())
    }
}

pub const MODEL_FILE: &str = "model.json";
pub const STATE_FILE: &str = "train_state.json";

pub struct TrainOutcome {
    pub bundle: ModelBundle,
    pub loss_log: Vec<EpochLoss>,
}

/// Train from scratch for `config.epochs` epochs.
pub fn train(
    corpus: &PairCorpus,
    config: TrainConfig,
    checkpoint_dir: Option<PathBuf>,
) -> Result<TrainOutcome, TrainingError> {
    let mut trainer = Trainer::new(corpus, config)?;
    trainer.run(checkpoint_dir.as_deref(), |_| {})?;
    let loss_log = trainer.loss_log().to_vec();
    Ok(TrainOutcome {
        bundle: trainer.into_bundle(),
        loss_log,
    })
}
