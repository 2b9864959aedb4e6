#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "geossl/image.hpp"
#include "geossl/nn.hpp"
#include "geossl/util.hpp"

namespace geossl::data {

struct ChannelStats {
    std::array<float, 3> mean{0.5f, 0.5f, 0.5f};
    std::array<float, 3> stddev{0.25f, 0.25f, 0.25f};
};

struct DatasetHandle {
    std::string name;
    int num_classes = 0;
    int resolution = 32;
    ChannelStats stats;
    std::vector<Image> train_images;
    std::vector<int> train_labels;
    std::vector<Image> test_images;
    std::vector<int> test_labels;
    std::filesystem::path cache_dir;

    size_t train_size() const { return train_images.size(); }
    size_t test_size() const { return test_images.size(); }
};

struct DataOptions {
    std::filesystem::path root;  // archives live under <root>/<dataset>, cache under <root>/cache
    bool download = false;
    std::string url;  // archive URL override for fetch
    std::string expected_sha256;  // optional archive checksum for fetch
    int synthetic_train = 500;
    int synthetic_test = 200;
    std::uint64_t synthetic_seed = 7;
};

/// Dataset root from GEOSSL_DATA_ROOT, falling back to ./data.
std::filesystem::path default_data_root();

/// Supported names: cifar10, cifar100, svhn, svhn-6v9, synthetic-shapes,
/// synthetic-arrows. Benchmark sets decode from their published binary
/// layouts and are cached; a corrupted cache raises IntegrityError and is
/// removed so the next load rebuilds it.
DatasetHandle load_dataset(const std::string& name, const DataOptions& opts);

/// Keeps only the listed classes and remaps labels to [0, len).
DatasetHandle subset_classes(const DatasetHandle& handle, const std::vector<int>& classes);

/// Three shape classes (disc, square, triangle) with randomized position,
/// size and colour on noisy backgrounds. Pure function of its arguments.
DatasetHandle synthetic_shapes(int n_train, int n_test, std::uint64_t seed);

/// Two classes separated only by orientation: every odd-indexed image is the
/// 180-degree rotation of a fresh arrow canvas, so rotation-invariant
/// features cannot split them.
DatasetHandle synthetic_arrows(int n_train, int n_test, std::uint64_t seed);

/// Downloads (if allowed) and unpacks the archive for a benchmark dataset,
/// then builds the decoded cache. No-op for synthetic names.
void fetch_dataset(const std::string& name, const DataOptions& opts);

/// [N,3,H,W] tensor with per-channel normalization applied.
nn::Tensor pack_images(std::span<const Image> images, const ChannelStats& stats);

}  // namespace geossl::data
