#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <vector>

#include "geossl/augment.hpp"
#include "geossl/config.hpp"
#include "geossl/data.hpp"
#include "geossl/model.hpp"
#include "geossl/objectives.hpp"

namespace geossl::training {

/// Linear warmup to base_lr, then cosine decay to zero across the remaining
/// steps. lr_at(0) == 0 when warmup > 0; lr_at(total_steps) == 0.
double lr_at(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps,
             double base_lr);

struct CheckpointEntry {
    int epoch = 0;
    std::filesystem::path path;
    objectives::LossReport epoch_mean;
};

struct CheckpointSeries {
    std::vector<CheckpointEntry> entries;
};

struct TrainResult {
    CheckpointSeries series;
    std::vector<objectives::LossReport> epoch_means;
    std::string params_hash;
    std::string encoder_projector_hash;
    std::filesystem::path metrics_path;
    std::int64_t steps = 0;
};

/// Append-only per-step JSONL records: step, epoch, lr, l1, l2, total.
class MetricsWriter {
  public:
    explicit MetricsWriter(const std::filesystem::path& path);
    void write(std::int64_t step, int epoch, double lr, const objectives::LossReport& report);

  private:
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Checkpoints: one self-describing binary file per save. Parameters round-trip
// bit-exactly (raw float32 payload after a JSON header).
// ---------------------------------------------------------------------------

struct CheckpointMeta {
    config::ExperimentConfig cfg;
    int epoch = 0;
    std::int64_t step = 0;
    std::map<std::string, std::string> rng_states;
};

void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta,
                     model::Bundle& bundle, nn::Optimizer* optimizer);

/// Rebuilds the bundle (and optionally the optimizer state) recorded in the
/// file. Unknown or missing tensors raise IoError.
struct LoadedCheckpoint {
    CheckpointMeta meta;
    model::Bundle bundle;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);
/// Restores optimizer state captured by save_checkpoint (tensor payloads plus
/// scalar counters). Must be attached to the loaded bundle's params already.
void restore_optimizer(const std::filesystem::path& path, nn::Optimizer& optimizer);

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

class Trainer {
  public:
    Trainer(const config::ExperimentConfig& cfg, const data::DatasetHandle& dataset);

    /// One optimizer step on a batch of triples at the given learning rate.
    objectives::LossReport train_step(const std::vector<aug::ViewTriple>& batch, double lr);

    /// Full loop: per-epoch shuffling, metrics stream, checkpoint every
    /// cfg.checkpoint_every epochs plus epoch 0 and the final epoch.
    /// With resume = true, continues from the newest checkpoint in run_dir.
    TrainResult run(const std::filesystem::path& run_dir, bool resume = false);

    std::vector<aug::ViewTriple> make_batch(const std::vector<int>& indices);

    model::Bundle& bundle() { return *bundle_; }
    nn::Optimizer& optimizer() { return *optimizer_; }
    aug::TripleSampler& sampler() { return *sampler_; }
    const config::ExperimentConfig& cfg() const { return cfg_; }
    std::int64_t steps_per_epoch() const;

  private:
    objectives::LossReport step_simclr(const std::vector<aug::ViewTriple>& batch, double lr);
    objectives::LossReport step_byol(const std::vector<aug::ViewTriple>& batch, double lr);

    config::ExperimentConfig cfg_;
    const data::DatasetHandle* dataset_;
    std::unique_ptr<model::Bundle> bundle_;
    std::unique_ptr<nn::Optimizer> optimizer_;
    std::unique_ptr<aug::TripleSampler> sampler_;
    Rng rng_shuffle_;
    std::int64_t global_step_ = 0;
    int start_epoch_ = 0;
};

/// Convenience wrapper: construct a trainer and run it.
TrainResult run_training(const config::ExperimentConfig& cfg, const data::DatasetHandle& dataset,
                         const std::filesystem::path& run_dir, bool resume = false);

}  // namespace geossl::training
