#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ndecode/encoder.hpp"
#include "ndecode/losses.hpp"
#include "ndecode/volume_pipeline.hpp"

namespace ndecode {

enum class Strategy { clip, bimixco_softclip };
enum class LossPhase { clip, bimixco, softclip };

const char* to_string(Strategy s) noexcept;
const char* to_string(LossPhase p) noexcept;
Strategy parse_strategy(const std::string& name);

struct OneCycleConfig {
  double warmup_frac = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;
};

struct TrainConfig {
  std::size_t batch_size = 300;
  double max_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::size_t epochs = 1;
  /// Pairs drawn per epoch; 0 means every training pair once.
  std::size_t epoch_pairs = 0;
  Strategy strategy = Strategy::clip;
  double tau = 0.01;
  double alpha = 0.15;
  bool softclip_bidirectional = true;
  OneCycleConfig schedule;
  std::uint64_t seed = 0;
  /// Evaluate retrieval on eval_pairs every this many epochs (0: only after the last epoch).
  std::size_t eval_every = 0;

  void validate() const;
};

/// Cosine warm-up from max_lr/div to max_lr over the first floor(warmup_frac * total) steps, then
/// cosine annealing to max_lr/div/final_div at the last step.
double onecycle_lr(std::size_t step, std::size_t total_steps, double max_lr, const OneCycleConfig& schedule = {});

struct OptimizerState {
  std::uint64_t step = 0;
  EncoderParams m;
  EncoderParams v;

  static OptimizerState zeros_like(const EncoderParams& params);
};

/// Decoupled weight decay, then a bias-corrected Adam update.
void adamw_step(EncoderParams& params, const EncoderParams& grads, OptimizerState& state, double lr,
                const TrainConfig& config);

/// BiMixCo for the first ceil(total/3) epochs, SoftCLIP afterwards.
LossPhase loss_phase(std::size_t epoch, std::size_t total_epochs);

struct StepRecord {
  std::uint64_t step = 0;
  std::size_t epoch = 0;
  LossPhase phase = LossPhase::clip;
  double lr = 0.0;
  double loss = 0.0;
  std::size_t batch_size = 0;
};

struct EpochSnapshot {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double eval_top1 = -1.0;  // -1 when not evaluated
  double eval_top3 = -1.0;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochSnapshot> epochs;

  /// "step,epoch,phase,lr,loss" lines, one per step.
  std::string log_lines() const;
};

struct TrainResult {
  EncoderParams params;
  TrainHistory history;
};

/// Steps in one epoch: ceil(epoch_pairs / batch_size); the short tail batch is kept.
std::size_t steps_per_epoch(std::size_t n_train_pairs, const TrainConfig& config);

/// Loss value and d loss / d (raw encoder output) for one batch under `phase`.
LossResult batch_loss(LossPhase phase, const EmbeddingBatch& raw_outputs, const EmbeddingBatch& targets,
                      const MixSpec* mix, const TrainConfig& config);

TrainResult train(const PairSet& train_pairs, const PairSet& eval_pairs, const EncoderParams& init,
                  const TrainConfig& config);

}  // namespace ndecode
