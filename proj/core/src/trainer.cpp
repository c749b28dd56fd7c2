#include "ndecode/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "ndecode/error.hpp"
#include "ndecode/retrieval.hpp"

namespace ndecode {

namespace {

constexpr std::uint64_t kShuffleTag = 0x53485546;  // "SHUF"
constexpr std::uint64_t kMixTag = 0x4d495843;      // "MIXC"

double cosine_ramp(double from, double to, double pct) {
  return to + (from - to) / 2.0 * (1.0 + std::cos(std::numbers::pi * pct));
}

// Draws pairs from a reshuffled-on-exhaustion permutation of [0, n).
class PairStream {
 public:
  PairStream(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    cursor_ = n;
  }

  std::size_t next() {
    if (cursor_ == order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    return order_[cursor_++];
  }

 private:
  std::vector<std::size_t> order_;
  std::mt19937_64 rng_;
  std::size_t cursor_ = 0;
};

RowMatrix gather_rows(const RowMatrix& m, const std::vector<std::size_t>& rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace

const char* to_string(Strategy s) noexcept {
  return s == Strategy::clip ? "clip" : "bimixco_softclip";
}

const char* to_string(LossPhase p) noexcept {
  switch (p) {
    case LossPhase::clip: return "clip";
    case LossPhase::bimixco: return "bimixco";
    case LossPhase::softclip: return "softclip";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "clip") return Strategy::clip;
  if (name == "bimixco_softclip") return Strategy::bimixco_softclip;
  fail(ErrorKind::config, "unknown strategy '" + name + "' (expected clip or bimixco_softclip)");
}

void TrainConfig::validate() const {
  require(batch_size >= 1, ErrorKind::config, "batch_size must be at least 1");
  require(max_lr > 0.0, ErrorKind::config, "max_lr must be positive");
  require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, ErrorKind::config, "betas must lie in (0, 1)");
  require(eps > 0.0, ErrorKind::config, "eps must be positive");
  require(weight_decay >= 0.0, ErrorKind::config, "weight_decay must be non-negative");
  require(epochs >= 1, ErrorKind::config, "epochs must be at least 1");
  require(tau > 0.0, ErrorKind::config, "tau must be positive");
  require(alpha > 0.0, ErrorKind::config, "alpha must be positive");
  require(schedule.warmup_frac >= 0.0 && schedule.warmup_frac < 1.0, ErrorKind::config,
          "warmup_frac must lie in [0, 1)");
  require(schedule.div_factor > 0.0 && schedule.final_div_factor > 0.0, ErrorKind::config,
          "OneCycle divisors must be positive");
}

double onecycle_lr(std::size_t step, std::size_t total_steps, double max_lr, const OneCycleConfig& schedule) {
  require(step < total_steps, ErrorKind::range,
          "step " + std::to_string(step) + " outside schedule of " + std::to_string(total_steps) + " steps");
  const double initial = max_lr / schedule.div_factor;
  const double final_lr = initial / schedule.final_div_factor;
  // Small epsilon so that e.g. 0.3 * 70 lands on 21, not 20.
  const auto peak = static_cast<std::size_t>(std::floor(schedule.warmup_frac * static_cast<double>(total_steps) + 1e-9));
  if (step == peak) return max_lr;
  if (step < peak) return cosine_ramp(initial, max_lr, static_cast<double>(step) / static_cast<double>(peak));
  const double pct = static_cast<double>(step - peak) / static_cast<double>(total_steps - 1 - peak);
  return cosine_ramp(max_lr, final_lr, pct);
}

OptimizerState OptimizerState::zeros_like(const EncoderParams& params) {
  return {0, params.zeros_like(), params.zeros_like()};
}

void adamw_step(EncoderParams& params, const EncoderParams& grads, OptimizerState& state, double lr,
                const TrainConfig& config) {
  require(grads.layer_dims == params.layer_dims && state.m.layer_dims == params.layer_dims &&
              state.v.layer_dims == params.layer_dims,
          ErrorKind::shape, "adamw_step: parameter, gradient and state shapes differ");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const double decay = 1.0 - lr * config.weight_decay;

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    p *= decay;
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.eps);
  };
  for (std::size_t l = 0; l < params.n_layers(); ++l) {
    update(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
    update(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
  }
}

LossPhase loss_phase(std::size_t epoch, std::size_t total_epochs) {
  require(epoch < total_epochs, ErrorKind::range,
          "epoch " + std::to_string(epoch) + " outside " + std::to_string(total_epochs) + " epochs");
  return epoch < (total_epochs + 2) / 3 ? LossPhase::bimixco : LossPhase::softclip;
}

std::string TrainHistory::log_lines() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& s : steps)
    os << s.step << ',' << s.epoch << ',' << to_string(s.phase) << ',' << s.lr << ',' << s.loss << '\n';
  return os.str();
}

std::size_t steps_per_epoch(std::size_t n_train_pairs, const TrainConfig& config) {
  const std::size_t per_epoch = config.epoch_pairs == 0 ? n_train_pairs : config.epoch_pairs;
  return (per_epoch + config.batch_size - 1) / config.batch_size;
}

LossResult batch_loss(LossPhase phase, const EmbeddingBatch& raw_outputs, const EmbeddingBatch& targets,
                      const MixSpec* mix, const TrainConfig& config) {
  if (phase == LossPhase::clip) return clip_loss(targets, raw_outputs, config.tau);

  LossConfig lc;
  lc.tau = config.tau;
  lc.alpha = config.alpha;
  lc.normalize = true;
  lc.softclip_bidirectional = config.softclip_bidirectional;
  const EmbeddingBatch p = normalize_rows(raw_outputs);
  const EmbeddingBatch t = normalize_rows(targets);
  LossResult r;
  if (phase == LossPhase::bimixco) {
    require(mix != nullptr, ErrorKind::contract, "BiMixCo phase needs a mix spec");
    r = bimixco_loss(p, t, *mix, lc);
  } else {
    r = softclip_loss(p, t, lc);
  }
  r.grad = normalize_rows_backward(raw_outputs, r.grad);
  return r;
}

TrainResult train(const PairSet& train_pairs, const PairSet& eval_pairs, const EncoderParams& init,
                  const TrainConfig& config) {
  config.validate();
  init.validate();
  require(!train_pairs.records.empty(), ErrorKind::config, "no training pairs");
  require(train_pairs.voxel_dim == init.input_dim(), ErrorKind::config,
          "training voxels have width " + std::to_string(train_pairs.voxel_dim) + ", encoder expects " +
              std::to_string(init.input_dim()));
  require(train_pairs.embed_dim == init.output_dim(), ErrorKind::config,
          "training embeddings have width " + std::to_string(train_pairs.embed_dim) + ", encoder produces " +
              std::to_string(init.output_dim()));
  if (!eval_pairs.records.empty()) {
    require(eval_pairs.voxel_dim == train_pairs.voxel_dim && eval_pairs.embed_dim == train_pairs.embed_dim,
            ErrorKind::config, "evaluation pairs have different dims from the training pairs");
    const auto train_ids = train_pairs.stimulus_ids();
    const std::set<StimulusId> train_set(train_ids.begin(), train_ids.end());
    for (StimulusId id : eval_pairs.stimulus_ids())
      require(!train_set.contains(id), ErrorKind::config,
              "evaluation stimulus " + std::to_string(id) + " also appears in training");
  }

  const RowMatrix voxels = train_pairs.voxel_matrix();
  const RowMatrix targets = train_pairs.embedding_matrix();
  const std::size_t n = train_pairs.records.size();
  const std::size_t per_epoch = config.epoch_pairs == 0 ? n : config.epoch_pairs;
  const std::size_t spe = steps_per_epoch(n, config);
  const std::size_t total_steps = spe * config.epochs;

  TrainResult result{init, {}};
  EncoderParams& params = result.params;
  OptimizerState state = OptimizerState::zeros_like(params);
  PairStream stream(n, derive_seed(config.seed, kShuffleTag));

  std::uint64_t step = 0;
  std::vector<std::size_t> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const LossPhase phase =
        config.strategy == Strategy::clip ? LossPhase::clip : loss_phase(epoch, config.epochs);
    double epoch_loss = 0.0;
    std::size_t remaining = per_epoch;
    while (remaining > 0) {
      const std::size_t b = std::min(config.batch_size, remaining);
      remaining -= b;
      batch.resize(b);
      for (auto& i : batch) i = stream.next();

      RowMatrix x = gather_rows(voxels, batch);
      const RowMatrix t = gather_rows(targets, batch);
      MixSpec mix;
      if (phase == LossPhase::bimixco) {
        mix = sample_mixspec(b, config.alpha, derive_seed(config.seed, kMixTag, step));
        x = mixco_mix(x, mix);
      }
      const ForwardTrace trace = mlp_forward_trace(params, x);
      if (!trace.output.allFinite()) throw DivergenceError(step);
      const LossResult loss = batch_loss(phase, trace.output, t, &mix, config);
      if (!std::isfinite(loss.loss) || !loss.grad.allFinite()) throw DivergenceError(step);

      const EncoderGradients grads = mlp_backward(params, trace, loss.grad);
      const double lr = onecycle_lr(static_cast<std::size_t>(step), total_steps, config.max_lr, config.schedule);
      adamw_step(params, grads.params, state, lr, config);

      result.history.steps.push_back({step, epoch, phase, lr, loss.loss, b});
      epoch_loss += loss.loss;
      ++step;
    }

    EpochSnapshot snap{epoch, epoch_loss / static_cast<double>(spe), -1.0, -1.0};
    const bool last = epoch + 1 == config.epochs;
    const bool due = config.eval_every > 0 && (epoch + 1) % config.eval_every == 0;
    if (!eval_pairs.records.empty() && (last || due)) {
      const RetrievalReport report = evaluate_encoder(params, eval_pairs);
      snap.eval_top1 = report.top1;
      snap.eval_top3 = report.top3;
    }
    result.history.epochs.push_back(snap);
  }
  return result;
}

}  // namespace ndecode
