#pragma once

// Tooth-state estimators. Both agents implement ToothStateEstimator so the
// orchestrator can run, fuse and replace them interchangeably.
//
//  - LandmarkAgent gates per-point landmark heatmaps with tooth presence
//    probabilities (CHaR conditioning), takes the argmax per channel and groups
//    the landmarks into tooth states. Heatmaps come from a HeatmapSource.
//  - SegmentationAgent groups points per tooth (ground-truth labels, or seeded
//    k-means when unlabeled) and extracts centroid + PCA frame per group.

#include "orthoplan/dental.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace orthoplan {

/// Thrown when an estimator cannot produce output; the orchestrator falls back.
class AgentUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AgentOutput {
    ArchState arch;
    std::map<FdiTooth, double> per_tooth_confidence;
    std::chrono::nanoseconds elapsed{0};
};

/// K rows (landmark channels) x (N + 1) columns, row-major. Column N is the null point.
class HeatmapSet {
public:
    HeatmapSet(std::size_t rows, std::size_t cols, std::vector<double> values);
    static HeatmapSet zeros(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t null_column() const { return cols_ - 1; }
    double at(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }
    double& at(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    const std::vector<double>& values() const { return values_; }

    bool operator==(const HeatmapSet&) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

/// Tooth presence probabilities indexed by arch slot (see FdiTooth::from_slot).
using PresenceVector = std::array<double, kSlotsPerArch>;

constexpr std::size_t channel_index(int slot, LandmarkGroup group) {
    return static_cast<std::size_t>(slot * kLandmarkGroups + static_cast<int>(group));
}

/// Centroid shifted by half the largest bounding-box edge along +y.
Vec3 null_point(const PointCloud& cloud);

/// Scales the real-point columns of channel (t, g) by p_t and the null column by 1 - p_t.
HeatmapSet char_condition(const HeatmapSet& raw, const PresenceVector& presence);

struct ExtractedLandmark {
    int slot;
    LandmarkGroup group;
    std::size_t column;
    Vec3 position;
    bool is_null;
};

/// Per-channel argmax over the conditioned heatmaps. Ties between real points go to the
/// lowest column; the null point wins any tie it is part of, so p_t = 0 always yields it.
/// Returns one entry per channel, in channel order.
std::vector<ExtractedLandmark> extract_landmarks(const HeatmapSet& conditioned,
                                                 const PointCloud& cloud, const Vec3& null_pt);

struct HeatmapPrediction {
    HeatmapSet heatmaps;
    PresenceVector presence{};
};

class HeatmapSource {
public:
    virtual ~HeatmapSource() = default;
    /// Throws AgentUnavailable when no prediction can be produced for this cloud.
    virtual HeatmapPrediction predict(const PointCloud& cloud) const = 0;
};

/// Gaussian bumps around known landmarks; stands in for a trained heatmap network.
class SyntheticOracleSource final : public HeatmapSource {
public:
    struct Options {
        double sigma_mm = 1.5;
        double heatmap_noise = 0.0;       // sd of additive noise, clamped at 0
        double presence_noise = 0.0;      // sd of |noise| pulled away from 0/1
        double presence_flip_prob = 0.0;  // chance of inverting a tooth's presence
        double null_level_present = 0.05;
        double null_level_absent = 1.0;
        std::uint64_t seed = 0;
    };

    SyntheticOracleSource(ArchState ground_truth, Options options);
    explicit SyntheticOracleSource(ArchState ground_truth)
        : SyntheticOracleSource(std::move(ground_truth), Options{}) {}

    HeatmapPrediction predict(const PointCloud& cloud) const override;

private:
    ArchState truth_;
    Options options_;
};

/// Reads precomputed heatmaps from a binary file on every prediction.
class FileHeatmapSource final : public HeatmapSource {
public:
    explicit FileHeatmapSource(std::filesystem::path path) : path_(std::move(path)) {}
    HeatmapPrediction predict(const PointCloud& cloud) const override;

private:
    std::filesystem::path path_;
};

// Heatmap file layout, little-endian:
//   offset  size        field
//   0       4           magic "OPHM"
//   4       4  u32      format version (1)
//   8       4  u32      K, landmark channels (80)
//   12      4  u32      N, real points (columns = N + 1)
//   16      16*8 f64    presence p_1..p_16
//   144     K*(N+1)*8   heatmap values, f64, row-major, null column last
void write_heatmap_file(const std::filesystem::path& path, const HeatmapPrediction& prediction);
/// Throws std::runtime_error on I/O failure or a malformed file.
HeatmapPrediction read_heatmap_file(const std::filesystem::path& path);

class ToothStateEstimator {
public:
    virtual ~ToothStateEstimator() = default;
    virtual std::string_view name() const = 0;
    virtual AgentOutput infer(const PointCloud& cloud) const = 0;
};

AgentOutput landmark_agent_infer(const PointCloud& cloud, const HeatmapSource& source);

class LandmarkAgent final : public ToothStateEstimator {
public:
    explicit LandmarkAgent(std::shared_ptr<const HeatmapSource> source);
    std::string_view name() const override { return "landmark"; }
    AgentOutput infer(const PointCloud& cloud) const override;

private:
    std::shared_ptr<const HeatmapSource> source_;
};

struct SegmentationOptions {
    // Confidence = clamp(points / full_confidence_points, min, max).
    double full_confidence_points = 200.0;
    double min_confidence = 0.3;
    double max_confidence = 0.99;
    // Unlabeled clouds only.
    bool clustering_enabled = true;
    int min_clusters = 8;
    int max_clusters = kSlotsPerArch;
    int kmeans_iterations = 60;
    std::uint64_t seed = 7;
};

AgentOutput segmentation_agent_infer(const PointCloud& cloud, const SegmentationOptions& options = {});

class SegmentationAgent final : public ToothStateEstimator {
public:
    explicit SegmentationAgent(SegmentationOptions options = {}) : options_(options) {}
    std::string_view name() const override { return "segmentation"; }
    AgentOutput infer(const PointCloud& cloud) const override;

private:
    SegmentationOptions options_;
};

}  // namespace orthoplan
