#include "orthoplan/agents.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace orthoplan {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t checked_product(std::size_t a, std::size_t b) {
    if (b != 0 && a > std::numeric_limits<std::size_t>::max() / b) {
        throw std::invalid_argument("heatmap dimensions overflow");
    }
    return a * b;
}

}  // namespace

HeatmapSet::HeatmapSet(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("heatmap set must be non-empty");
    if (values_.size() != checked_product(rows_, cols_)) {
        throw std::invalid_argument("heatmap value count does not match rows x cols");
    }
}

HeatmapSet HeatmapSet::zeros(std::size_t rows, std::size_t cols) {
    return HeatmapSet(rows, cols, std::vector<double>(checked_product(rows, cols), 0.0));
}

Vec3 null_point(const PointCloud& cloud) {
    if (cloud.points.empty()) throw std::invalid_argument("null point of an empty cloud");
    Vec3 lo = cloud.points.front();
    Vec3 hi = lo;
    Vec3 sum;
    for (const Vec3& p : cloud.points) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        sum += p;
    }
    const Vec3 c = sum / static_cast<double>(cloud.points.size());
    const Vec3 edge = hi - lo;
    const double extent = std::max({edge.x, edge.y, edge.z});
    return c + Vec3{0.0, extent / 2.0, 0.0};
}

HeatmapSet char_condition(const HeatmapSet& raw, const PresenceVector& presence) {
    if (raw.rows() != static_cast<std::size_t>(kLandmarkChannels)) {
        throw std::invalid_argument("heatmap set must have 80 landmark channels");
    }
    if (raw.cols() < 2) throw std::invalid_argument("heatmap set needs at least one real point");
    for (double p : presence) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("presence must lie in [0, 1]");
    }
    HeatmapSet out = raw;
    const std::size_t null_col = raw.null_column();
    for (std::size_t k = 0; k < raw.rows(); ++k) {
        const double p = presence[k / kLandmarkGroups];
        auto row = out.row(k);
        for (std::size_t i = 0; i < null_col; ++i) {
            if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
                throw std::invalid_argument("heatmap values must be finite and non-negative");
            }
            row[i] *= p;
        }
        row[null_col] *= (1.0 - p);
    }
    return out;
}

std::vector<ExtractedLandmark> extract_landmarks(const HeatmapSet& conditioned,
                                                 const PointCloud& cloud, const Vec3& null_pt) {
    if (conditioned.rows() != static_cast<std::size_t>(kLandmarkChannels)) {
        throw std::invalid_argument("heatmap set must have 80 landmark channels");
    }
    if (conditioned.cols() != cloud.points.size() + 1) {
        throw std::invalid_argument("heatmap columns must equal cloud size + 1");
    }
    std::vector<ExtractedLandmark> out;
    out.reserve(conditioned.rows());
    for (std::size_t k = 0; k < conditioned.rows(); ++k) {
        const auto row = conditioned.row(k);
        std::size_t best = 0;
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i] > row[best]) best = i;
        }
        if (row[conditioned.null_column()] >= row[best]) best = conditioned.null_column();
        const bool is_null = best == conditioned.null_column();
        out.push_back({static_cast<int>(k / kLandmarkGroups),
                       static_cast<LandmarkGroup>(k % kLandmarkGroups), best,
                       is_null ? null_pt : cloud.points[best], is_null});
    }
    return out;
}

SyntheticOracleSource::SyntheticOracleSource(ArchState ground_truth, Options options)
    : truth_(std::move(ground_truth)), options_(options) {
    if (!(options_.sigma_mm > 0.0)) throw std::invalid_argument("heatmap sigma must be positive");
}

HeatmapPrediction SyntheticOracleSource::predict(const PointCloud& cloud) const {
    if (cloud.arch != truth_.arch()) {
        throw AgentUnavailable("oracle heatmap source was built for the other arch");
    }
    if (cloud.points.empty()) throw AgentUnavailable("empty point cloud");

    std::mt19937_64 rng(options_.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PresenceVector presence{};
    for (int s = 0; s < kSlotsPerArch; ++s) {
        const bool present = truth_.is_present(FdiTooth::from_slot(cloud.arch, s));
        double p = present ? 1.0 : 0.0;
        if (options_.presence_noise > 0.0) {
            const double d = std::abs(gauss(rng)) * options_.presence_noise;
            p = std::clamp(present ? 1.0 - d : d, 0.0, 1.0);
        }
        if (options_.presence_flip_prob > 0.0 && unit(rng) < options_.presence_flip_prob) {
            p = 1.0 - p;
        }
        presence[static_cast<std::size_t>(s)] = p;
    }

    const std::size_t n = cloud.points.size();
    HeatmapSet heatmaps = HeatmapSet::zeros(static_cast<std::size_t>(kLandmarkChannels), n + 1);
    const double inv_two_sigma_sq = 1.0 / (2.0 * options_.sigma_mm * options_.sigma_mm);
    for (int s = 0; s < kSlotsPerArch; ++s) {
        const ToothState* tooth = truth_.find(FdiTooth::from_slot(cloud.arch, s));
        for (int g = 0; g < kLandmarkGroups; ++g) {
            const auto group = static_cast<LandmarkGroup>(g);
            auto row = heatmaps.row(channel_index(s, group));
            const Landmark* target = nullptr;
            if (tooth != nullptr && tooth->present) {
                for (const Landmark& lm : tooth->landmarks) {
                    if (lm.group == group) target = &lm;
                }
            }
            if (target != nullptr) {
                for (std::size_t i = 0; i < n; ++i) {
                    const Vec3 d = cloud.points[i] - target->position;
                    row[i] = std::exp(-dot(d, d) * inv_two_sigma_sq);
                }
                row[n] = options_.null_level_present;
            } else {
                row[n] = options_.null_level_absent;
            }
            if (options_.heatmap_noise > 0.0) {
                for (double& v : row) v = std::max(0.0, v + options_.heatmap_noise * gauss(rng));
            }
        }
    }
    return {std::move(heatmaps), presence};
}

HeatmapPrediction FileHeatmapSource::predict(const PointCloud& cloud) const {
    HeatmapPrediction prediction = [&] {
        try {
            return read_heatmap_file(path_);
        } catch (const std::exception& e) {
            throw AgentUnavailable(std::string("heatmap file unavailable: ") + e.what());
        }
    }();
    if (prediction.heatmaps.cols() != cloud.points.size() + 1) {
        throw AgentUnavailable("heatmap file was computed for a cloud of " +
                               std::to_string(prediction.heatmaps.cols() - 1) + " points, got " +
                               std::to_string(cloud.points.size()));
    }
    return prediction;
}

namespace {

constexpr std::array<char, 4> kHeatmapMagic{'O', 'P', 'H', 'M'};
constexpr std::uint32_t kHeatmapVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::ostream& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint64_t get_le(std::istream& in, int bytes) {
    std::array<unsigned char, 8> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), bytes);
    if (!in) throw std::runtime_error("heatmap file is truncated");
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | buf[static_cast<std::size_t>(i)];
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_le(in, 8)); }

}  // namespace

void write_heatmap_file(const std::filesystem::path& path, const HeatmapPrediction& prediction) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kHeatmapMagic.data(), kHeatmapMagic.size());
    put_u32(out, kHeatmapVersion);
    put_u32(out, static_cast<std::uint32_t>(prediction.heatmaps.rows()));
    put_u32(out, static_cast<std::uint32_t>(prediction.heatmaps.cols() - 1));
    for (double p : prediction.presence) put_f64(out, p);
    for (double v : prediction.heatmaps.values()) put_f64(out, v);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

HeatmapPrediction read_heatmap_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kHeatmapMagic) throw std::runtime_error("not a heatmap file");
    if (get_le(in, 4) != kHeatmapVersion) throw std::runtime_error("unsupported heatmap file version");
    const auto rows = static_cast<std::size_t>(get_le(in, 4));
    const auto n = static_cast<std::size_t>(get_le(in, 4));
    if (rows != static_cast<std::size_t>(kLandmarkChannels) || n == 0) {
        throw std::runtime_error("heatmap file has unexpected dimensions");
    }
    PresenceVector presence{};
    for (double& p : presence) p = get_f64(in);
    std::vector<double> values(checked_product(rows, n + 1));
    for (double& v : values) v = get_f64(in);
    return {HeatmapSet(rows, n + 1, std::move(values)), presence};
}

AgentOutput landmark_agent_infer(const PointCloud& cloud, const HeatmapSource& source) {
    const auto start = Clock::now();
    cloud.validate();
    HeatmapPrediction prediction = source.predict(cloud);

    const Vec3 null_pt = null_point(cloud);
    const HeatmapSet conditioned = char_condition(prediction.heatmaps, prediction.presence);
    const auto extracted = extract_landmarks(conditioned, cloud, null_pt);

    AgentOutput out{ArchState(cloud.arch), {}, {}};
    for (int s = 0; s < kSlotsPerArch; ++s) {
        std::vector<Landmark> landmarks;
        for (int g = 0; g < kLandmarkGroups; ++g) {
            const auto& lm = extracted[channel_index(s, static_cast<LandmarkGroup>(g))];
            if (!lm.is_null) landmarks.push_back({lm.group, lm.position});
        }
        const double p = prediction.presence[static_cast<std::size_t>(s)];
        ToothState state{.fdi = FdiTooth::from_slot(cloud.arch, s), .centroid = null_pt, .orientation = {}, .landmarks = {}};
        state.confidence = p;
        state.present = p >= 0.5 && !landmarks.empty();
        if (!landmarks.empty()) {
            std::vector<Vec3> positions;
            for (const Landmark& lm : landmarks) positions.push_back(lm.position);
            const PrincipalFrame frame = principal_axes(positions);
            state.centroid = frame.centroid;
            state.orientation = frame_orientation(frame);
            state.extents = frame.extents;
        }
        if (state.present) state.landmarks = std::move(landmarks);
        out.per_tooth_confidence.emplace(state.fdi, p);
        out.arch.put(std::move(state));
    }
    out.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    return out;
}

LandmarkAgent::LandmarkAgent(std::shared_ptr<const HeatmapSource> source) : source_(std::move(source)) {
    if (!source_) throw std::invalid_argument("landmark agent needs a heatmap source");
}

AgentOutput LandmarkAgent::infer(const PointCloud& cloud) const {
    try {
        return landmark_agent_infer(cloud, *source_);
    } catch (const AgentUnavailable&) {
        throw;
    } catch (const std::exception& e) {
        throw AgentUnavailable(std::string("landmark agent failed: ") + e.what());
    }
}

namespace {

ToothState state_from_points(FdiTooth fdi, std::span<const Vec3> points,
                             const SegmentationOptions& options) {
    const PrincipalFrame frame = principal_axes(points);
    ToothState state{.fdi = fdi, .centroid = frame.centroid, .orientation = {}, .landmarks = {}};
    state.orientation = frame_orientation(frame);
    state.extents = frame.extents;
    state.present = true;
    state.confidence =
        std::clamp(static_cast<double>(points.size()) / options.full_confidence_points,
                   options.min_confidence, options.max_confidence);
    return state;
}

struct Clustering {
    std::vector<int> assignment;
    std::vector<Vec3> centers;
    double score = -std::numeric_limits<double>::infinity();
};

// Lloyd iterations from centers seeded at equal quantiles of the arc order.
Clustering kmeans(const std::vector<Vec3>& points, const std::vector<std::size_t>& arc_order, int k,
                  const SegmentationOptions& options) {
    const std::size_t n = points.size();
    const auto kk = static_cast<std::size_t>(k);
    Clustering c;
    c.centers.resize(kk);
    c.assignment.assign(n, -1);
    for (std::size_t j = 0; j < kk; ++j) {
        const std::size_t lo = j * n / kk;
        const std::size_t hi = (j + 1) * n / kk;
        Vec3 sum;
        for (std::size_t i = lo; i < hi; ++i) sum += points[arc_order[i]];
        c.centers[j] = sum / static_cast<double>(hi - lo);
    }
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(k));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    for (int iter = 0; iter < options.kmeans_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < kk; ++j) {
                const Vec3 d = points[i] - c.centers[j];
                const double dd = dot(d, d);
                if (dd < best_d) {
                    best_d = dd;
                    best = static_cast<int>(j);
                }
            }
            if (c.assignment[i] != best) {
                c.assignment[i] = best;
                changed = true;
            }
        }
        std::vector<Vec3> sums(kk);
        std::vector<std::size_t> counts(kk, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto j = static_cast<std::size_t>(c.assignment[i]);
            sums[j] += points[i];
            ++counts[j];
        }
        for (std::size_t j = 0; j < kk; ++j) {
            if (counts[j] == 0) {
                c.centers[j] = points[pick(rng)];
                changed = true;
            } else {
                c.centers[j] = sums[j] / static_cast<double>(counts[j]);
            }
        }
        if (!changed) break;
    }

    // Calinski-Harabasz index selects k.
    Vec3 mean;
    for (const Vec3& p : points) mean += p;
    mean = mean / static_cast<double>(n);
    std::vector<std::size_t> counts(kk, 0);
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(c.assignment[i]);
        const Vec3 d = points[i] - c.centers[j];
        within += dot(d, d);
        ++counts[j];
    }
    double between = 0.0;
    for (std::size_t j = 0; j < kk; ++j) {
        const Vec3 d = c.centers[j] - mean;
        between += static_cast<double>(counts[j]) * dot(d, d);
    }
    if (k > 1 && n > kk && within > 0.0) {
        c.score = (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - kk));
    }
    return c;
}

AgentOutput cluster_unlabeled(const PointCloud& cloud, const SegmentationOptions& options) {
    const auto& pts = cloud.points;
    Vec3 sum;
    double min_y = pts.front().y;
    for (const Vec3& p : pts) {
        sum += p;
        min_y = std::min(min_y, p.y);
    }
    const double cx = sum.x / static_cast<double>(pts.size());

    // Arc coordinate: polar angle about a pivot on the posterior edge of the arch.
    std::vector<double> arc(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) arc[i] = std::atan2(pts[i].x - cx, pts[i].y - min_y);
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return arc[a] < arc[b]; });

    const int k_hi = std::min(options.max_clusters, static_cast<int>(pts.size()) - 1);
    const int k_lo = std::min(std::max(2, options.min_clusters), k_hi);
    if (k_hi < 2) throw std::invalid_argument("too few points to cluster");
    Clustering best;
    int best_k = k_lo;
    for (int k = k_lo; k <= k_hi; ++k) {
        Clustering c = kmeans(pts, order, k, options);
        if (c.score > best.score) {
            best = std::move(c);
            best_k = k;
        }
    }

    std::vector<std::vector<Vec3>> groups(static_cast<std::size_t>(best_k));
    std::vector<double> arc_sum(static_cast<std::size_t>(best_k), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto j = static_cast<std::size_t>(best.assignment[i]);
        groups[j].push_back(pts[i]);
        arc_sum[j] += arc[i];
    }
    std::vector<std::size_t> cluster_order;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (!groups[j].empty()) cluster_order.push_back(j);
    }
    std::stable_sort(cluster_order.begin(), cluster_order.end(), [&](std::size_t a, std::size_t b) {
        return arc_sum[a] / static_cast<double>(groups[a].size()) <
               arc_sum[b] / static_cast<double>(groups[b].size());
    });

    // Unfilled slots are assumed to be distal (third molars first).
    const int offset = (kSlotsPerArch - static_cast<int>(cluster_order.size())) / 2;
    AgentOutput out{ArchState(cloud.arch), {}, {}};
    for (std::size_t r = 0; r < cluster_order.size(); ++r) {
        const FdiTooth fdi = FdiTooth::from_slot(cloud.arch, offset + static_cast<int>(r));
        ToothState state = state_from_points(fdi, groups[cluster_order[r]], options);
        out.per_tooth_confidence.emplace(fdi, state.confidence);
        out.arch.put(std::move(state));
    }
    return out;
}

}  // namespace

AgentOutput segmentation_agent_infer(const PointCloud& cloud, const SegmentationOptions& options) {
    const auto start = Clock::now();
    cloud.validate();
    AgentOutput out{ArchState(cloud.arch), {}, {}};
    if (cloud.labels) {
        std::map<FdiTooth, std::vector<Vec3>> groups;
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            groups[(*cloud.labels)[i]].push_back(cloud.points[i]);
        }
        for (const auto& [fdi, points] : groups) {
            ToothState state = state_from_points(fdi, points, options);
            out.per_tooth_confidence.emplace(fdi, state.confidence);
            out.arch.put(std::move(state));
        }
    } else if (options.clustering_enabled) {
        out = cluster_unlabeled(cloud, options);
    } else {
        throw std::invalid_argument("unlabeled cloud and clustering disabled");
    }
    out.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    return out;
}

AgentOutput SegmentationAgent::infer(const PointCloud& cloud) const {
    try {
        return segmentation_agent_infer(cloud, options_);
    } catch (const std::exception& e) {
        throw AgentUnavailable(std::string("segmentation agent failed: ") + e.what());
    }
}

}  // namespace orthoplan
