//! Frequency-upscaling ladder: per-stage training loops, neuron splitting
//! between stages, the step-decay learning-rate schedule, checkpoint
//! persistence and loss logging.

mod checkpoint;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC};

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::VelocityModel;
use crate::network::{
    adam_step, loss_and_gradient_range, AdamState, EncodedBatch, NetworkError, NetworkParams,
    PEConfig,
};
use crate::sampler::{draw_samples_with, SampleError, SamplingConfig};
use crate::splitting::{split_network, SplitConfig, SplitError};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss became non-finite at epoch {epoch}, step {step} (lr = {lr:.3e})")]
    NanLoss { epoch: usize, step: usize, lr: f64 },
    #[error("checkpoint encoding does not match the stage configuration: {0}")]
    PeMismatch(String),
    #[error("stage frequency {next} Hz must exceed checkpoint frequency {prev} Hz")]
    FrequencyNotIncreasing { prev: f64, next: f64 },
    #[error("invalid stage: {0}")]
    InvalidStage(String),
    #[error("parameters contain non-finite values")]
    NonFiniteParams,
    #[error("unsupported encoding for serialization: {0}")]
    UnsupportedEncoding(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One rung of the frequency ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStage {
    pub frequency_hz: f64,
    /// Offsprings per neuron when upscaling into this stage (1 = no split).
    pub split_factor: usize,
    pub num_samples: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_initial: f64,
    pub lr_decay_every_epochs: usize,
    pub lr_decay_factor: f64,
    pub seed: u64,
}

impl LadderStage {
    /// A stage with the baseline training hyperparameters: lr 1e-3 halving
    /// every 5000 epochs, full-batch steps.
    pub fn new(frequency_hz: f64, num_samples: usize, epochs: usize, seed: u64) -> Self {
        Self {
            frequency_hz,
            split_factor: 1,
            num_samples,
            epochs,
            batch_size: num_samples,
            lr_initial: 1e-3,
            lr_decay_every_epochs: 5000,
            lr_decay_factor: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.frequency_hz > 0.0) {
            return Err(TrainError::InvalidStage("frequency must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidStage("epochs must be >= 1".into()));
        }
        if self.num_samples == 0 {
            return Err(TrainError::InvalidStage("num_samples must be >= 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > self.num_samples {
            return Err(TrainError::InvalidStage(format!(
                "batch_size {} must be in 1..={}",
                self.batch_size, self.num_samples
            )));
        }
        if self.split_factor == 0 {
            return Err(TrainError::InvalidStage("split_factor must be >= 1".into()));
        }
        if !(self.lr_initial > 0.0) {
            return Err(TrainError::InvalidStage("lr_initial must be positive".into()));
        }
        if self.lr_decay_every_epochs == 0 {
            return Err(TrainError::InvalidStage(
                "lr_decay_every_epochs must be >= 1".into(),
            ));
        }
        if !(self.lr_decay_factor > 0.0) {
            return Err(TrainError::InvalidStage(
                "lr_decay_factor must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz
    }

    /// `lr_initial * factor^floor(epoch_index / decay_every)` for a 0-based
    /// epoch index.
    pub fn learning_rate(&self, epoch_index: usize) -> f64 {
        let k = (epoch_index / self.lr_decay_every_epochs) as i32;
        self.lr_initial * self.lr_decay_factor.powi(k)
    }

    pub fn steps_per_epoch(&self) -> usize {
        self.num_samples.div_ceil(self.batch_size)
    }
}

/// Loss curve entry; epochs are 1-based in records and files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct StageResult {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochRecord>,
    pub total_steps: u64,
}

/// How a stage obtains its initial parameters.
pub enum StageInit {
    Fresh {
        widths: Vec<usize>,
        pe: PEConfig,
        w0: f64,
        seed: u64,
    },
    Resume(Checkpoint),
}

/// Trains one stage: draws the seeded batch, runs
/// `epochs x ceil(N / batch)` Adam steps on the physics loss at the stage
/// frequency with the step-decay schedule, and records the loss once per
/// epoch. Deterministic for fixed seeds and chunk geometry.
pub fn run_stage(
    init: StageInit,
    stage: &LadderStage,
    model: &VelocityModel,
    sampling: &SamplingConfig,
) -> Result<StageResult, TrainError> {
    stage.validate()?;
    let (mut params, mut adam) = match init {
        StageInit::Fresh {
            widths,
            pe,
            w0,
            seed,
        } => {
            let params = NetworkParams::init_random(&widths, pe, w0, seed)?;
            let adam = AdamState::new(params.param_count());
            (params, adam)
        }
        StageInit::Resume(ckpt) => {
            let adam = ckpt
                .adam
                .unwrap_or_else(|| AdamState::new(ckpt.params.param_count()));
            if adam.param_count() != ckpt.params.param_count() {
                return Err(TrainError::PeMismatch(
                    "optimizer state does not match parameter count".into(),
                ));
            }
            (ckpt.params, adam)
        }
    };

    let omega = stage.omega();
    let batch = draw_samples_with(model, stage.num_samples, omega, sampling, stage.seed)?;
    let enc = EncodedBatch::new(&batch, &params.pe, omega);

    let n = batch.len();
    let steps_per_epoch = stage.steps_per_epoch();
    let mut history = Vec::with_capacity(stage.epochs);
    let mut total_steps = 0u64;

    for e in 0..stage.epochs {
        let lr = stage.learning_rate(e);
        let mut loss_sum = 0.0;
        for s in 0..steps_per_epoch {
            let lo = s * stage.batch_size;
            let hi = (lo + stage.batch_size).min(n);
            let (loss, grad) = loss_and_gradient_range(&params, &enc, lo..hi)?;
            if !loss.is_finite() {
                return Err(TrainError::NanLoss {
                    epoch: e + 1,
                    step: s + 1,
                    lr,
                });
            }
            adam_step(&mut adam, &mut params, &grad, lr)?;
            loss_sum += loss;
            total_steps += 1;
        }
        let record = EpochRecord {
            epoch: e + 1,
            loss: loss_sum / steps_per_epoch as f64,
            lr,
        };
        if stage.epochs >= 20 && (e + 1) % (stage.epochs / 10).max(1) == 0 {
            log::info!(
                "{} Hz stage: epoch {}/{} loss {:.6e} lr {:.2e}",
                stage.frequency_hz,
                e + 1,
                stage.epochs,
                record.loss,
                lr
            );
        }
        history.push(record);
    }

    Ok(StageResult {
        checkpoint: Checkpoint {
            params,
            frequency_hz: stage.frequency_hz,
            adam: Some(adam),
            seed: stage.seed,
        },
        history,
        total_steps,
    })
}

/// Grows a checkpoint into the next stage: splits the network, resets the
/// optimizer to zero moments and retags the frequency.
pub fn upscale(
    ckpt: Checkpoint,
    stage: &LadderStage,
    split: &SplitConfig,
) -> Result<Checkpoint, TrainError> {
    if !(stage.frequency_hz > ckpt.frequency_hz) {
        return Err(TrainError::FrequencyNotIncreasing {
            prev: ckpt.frequency_hz,
            next: stage.frequency_hz,
        });
    }
    let cfg = SplitConfig {
        factor: stage.split_factor,
        ..*split
    };
    let params = split_network(&ckpt.params, &cfg)?;
    Ok(Checkpoint {
        params,
        frequency_hz: stage.frequency_hz,
        adam: None,
        seed: stage.seed,
    })
}

/// Full ladder configuration.
#[derive(Debug, Clone)]
pub struct LadderConfig {
    /// Hidden widths of the first stage.
    pub widths: Vec<usize>,
    pub pe: PEConfig,
    pub w0: f64,
    /// Seed for the fresh initialization of the first stage.
    pub init_seed: u64,
    pub stages: Vec<LadderStage>,
    pub split: SplitConfig,
    pub sampling: SamplingConfig,
}

impl LadderConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.stages.is_empty() {
            return Err(TrainError::InvalidStage("ladder has no stages".into()));
        }
        for stage in &self.stages {
            stage.validate()?;
        }
        for pair in self.stages.windows(2) {
            if pair[1].frequency_hz <= pair[0].frequency_hz {
                return Err(TrainError::FrequencyNotIncreasing {
                    prev: pair[0].frequency_hz,
                    next: pair[1].frequency_hz,
                });
            }
        }
        Ok(())
    }
}

pub fn stage_checkpoint_path(out_dir: &Path, index: usize) -> PathBuf {
    out_dir.join(format!("stage_{index:02}.ckpt"))
}

pub fn stage_loss_path(out_dir: &Path, index: usize) -> PathBuf {
    out_dir.join(format!("loss_{index:02}.csv"))
}

/// Runs the whole ladder, persisting a checkpoint and a loss CSV per stage.
///
/// Stages whose checkpoint file already exists in `out_dir` are loaded
/// instead of re-trained, so an interrupted ladder resumes from the last
/// persisted stage bit-identically.
pub fn run_ladder(
    cfg: &LadderConfig,
    model: &VelocityModel,
    out_dir: &Path,
) -> Result<Vec<Checkpoint>, TrainError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut checkpoints: Vec<Checkpoint> = Vec::with_capacity(cfg.stages.len());

    for (i, stage) in cfg.stages.iter().enumerate() {
        let ckpt_path = stage_checkpoint_path(out_dir, i);
        if ckpt_path.exists() {
            let ckpt = load_checkpoint(&ckpt_path, cfg.pe.coord_scale)?;
            if ckpt.frequency_hz != stage.frequency_hz {
                return Err(TrainError::InvalidStage(format!(
                    "existing {} is tagged {} Hz but stage {i} expects {} Hz",
                    ckpt_path.display(),
                    ckpt.frequency_hz,
                    stage.frequency_hz
                )));
            }
            log::info!(
                "stage {i} ({} Hz): resuming from {}",
                stage.frequency_hz,
                ckpt_path.display()
            );
            checkpoints.push(ckpt);
            continue;
        }

        let init = match checkpoints.last() {
            None => StageInit::Fresh {
                widths: cfg.widths.clone(),
                pe: cfg.pe,
                w0: cfg.w0,
                seed: cfg.init_seed,
            },
            Some(prev) => {
                let split = SplitConfig {
                    // Stage index decorrelates the symmetry-breaking noise.
                    seed: cfg.split.seed.wrapping_add(i as u64),
                    ..cfg.split
                };
                StageInit::Resume(upscale(prev.clone(), stage, &split)?)
            }
        };
        log::info!(
            "stage {i}: training {} Hz, {} samples, {} epochs",
            stage.frequency_hz,
            stage.num_samples,
            stage.epochs
        );
        let result = run_stage(init, stage, model, &cfg.sampling)?;
        save_checkpoint(&result.checkpoint, &ckpt_path)?;
        write_loss_csv(&stage_loss_path(out_dir, i), &result.history)?;
        checkpoints.push(result.checkpoint);
    }
    Ok(checkpoints)
}

/// Loss history as `epoch,loss,lr` CSV.
pub fn write_loss_csv(path: &Path, history: &[EpochRecord]) -> Result<(), TrainError> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "epoch,loss,lr")?;
    for rec in history {
        writeln!(w, "{},{},{}", rec.epoch, rec.loss, rec.lr)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_loss_csv(path: &Path) -> Result<Vec<EpochRecord>, TrainError> {
    let reader = std::io::BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        if ln == 0 {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64, TrainError> {
            s.and_then(|v| v.parse().ok()).ok_or_else(|| {
                TrainError::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("bad loss CSV line {}", ln + 1),
                ))
            })
        };
        let epoch = parse(parts.next())? as usize;
        let loss = parse(parts.next())?;
        let lr = parse(parts.next())?;
        out.push(EpochRecord { epoch, loss, lr });
    }
    Ok(out)
}
