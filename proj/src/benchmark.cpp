#include "orthoplan/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

namespace orthoplan {

namespace {

// Portable generator so scenarios are identical across standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double sign() { return (next() & 1U) != 0 ? 1.0 : -1.0; }
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    std::uint64_t state_;
};

struct ToothShape {
    double width_mm;  // mesiodistal
    double a;         // semi-axes along the tooth's mesiodistal, buccolingual and vertical axes
    double b;
    double c;
};

ToothShape tooth_shape(FdiTooth fdi) {
    static constexpr std::array<double, 8> kUpperWidth{8.5, 6.5, 7.5, 7.0, 6.5, 10.0, 9.0, 8.5};
    static constexpr std::array<double, 8> kLowerWidth{5.0, 5.5, 6.5, 7.0, 7.0, 11.0, 10.5, 10.0};
    const auto p = static_cast<std::size_t>(fdi.position() - 1);
    const double width = fdi.arch() == Arch::Upper ? kUpperWidth[p] : kLowerWidth[p];
    switch (tooth_type(fdi)) {
        case ToothType::Incisor: return {width, width / 2.0, 3.0, 5.0};
        case ToothType::Canine: return {width, width / 2.0, 4.0, 6.0};
        case ToothType::Premolar: return {width, width / 2.0, 4.5, 4.5};
        case ToothType::Molar: return {width, width / 2.0, 5.0, 4.0};
    }
    return {width, width / 2.0, 4.0, 4.0};
}

// Arc length of y = D (1 - (x/h)^2) from 0 to x >= 0.
double arc_length(double x, double k) {
    const double kx = k * x;
    return (kx * std::sqrt(1.0 + kx * kx) + std::asinh(kx)) / (2.0 * k);
}

double x_at_arc_length(double s, const ArchCurve& curve) {
    const double k = 2.0 * curve.depth_mm / (curve.half_width_mm * curve.half_width_mm);
    double lo = 0.0;
    double hi = s;  // arc length >= x
    for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        (arc_length(mid, k) < s ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct IdealPose {
    Vec3 centroid;
    UnitQuaternion orientation;
    double side;  // +1 patient left, -1 patient right
};

IdealPose ideal_pose(FdiTooth fdi, const ArchCurve& curve) {
    double s = 0.0;
    for (int p = 1; p < fdi.position(); ++p) s += tooth_shape(FdiTooth(fdi.quadrant() * 10 + p)).width_mm;
    s += tooth_shape(fdi).width_mm / 2.0;
    const double side = fdi.quadrant() == 2 || fdi.quadrant() == 3 ? 1.0 : -1.0;
    const double x = side * x_at_arc_length(s, curve);
    const double h = curve.half_width_mm;
    const double k = 2.0 * curve.depth_mm / (h * h);
    const Vec3 centroid{x, curve.depth_mm * (1.0 - (x / h) * (x / h)), 0.0};
    const double len = std::hypot(1.0, k * x);
    const Vec3 t{1.0 / len, -k * x / len, 0.0};  // along the curve toward patient left
    const Vec3 n{-t.y, t.x, 0.0};               // buccal
    const Vec3 up{0.0, 0.0, 1.0};               // apical
    // Columns are the tooth axes expressed in the arch frame.
    const Mat3 r{{{t.x, n.x, up.x}, {t.y, n.y, up.y}, {t.z, n.z, up.z}}};
    return {centroid, UnitQuaternion::from_rotation_matrix(r), side};
}

// Landmarks on the ellipsoid surface whose mean is the tooth centre.
std::vector<Landmark> landmarks_for(const ToothShape& shape, double side, const Vec3& centroid,
                                    const UnitQuaternion& q) {
    const double r = std::sqrt(15.0 / 16.0);
    const double eq = shape.c / 4.0;
    const std::array<std::pair<LandmarkGroup, Vec3>, 5> local{{
        {LandmarkGroup::Mesial, {-side * shape.a * r, 0.0, eq}},
        {LandmarkGroup::Distal, {side * shape.a * r, 0.0, eq}},
        {LandmarkGroup::Buccal, {0.0, shape.b * r, eq}},
        {LandmarkGroup::Lingual, {0.0, -shape.b * r, eq}},
        {LandmarkGroup::Occlusal, {0.0, 0.0, -shape.c}},
    }};
    std::vector<Landmark> out;
    for (const auto& [group, p] : local) out.push_back({group, centroid + q.rotate(p)});
    return out;
}

std::uint64_t splitmix_step(std::uint64_t& state) {
    SplitMix64 g(state);
    const std::uint64_t v = g.next();
    state += 0x9E3779B97F4A7C15ULL;
    return v;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double population_sd(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::string_view to_string(Archetype a) {
    switch (a) {
        case Archetype::Tapered: return "tapered";
        case Archetype::Ovoid: return "ovoid";
        case Archetype::Square: return "square";
        case Archetype::NarrowV: return "narrow_v";
    }
    return "?";
}

Archetype parse_archetype(std::string_view text) {
    for (Archetype a : {Archetype::Tapered, Archetype::Ovoid, Archetype::Square, Archetype::NarrowV}) {
        if (to_string(a) == text) return a;
    }
    throw std::invalid_argument("unknown arch archetype '" + std::string(text) + "'");
}

std::string_view to_string(CrowdingSeverity s) {
    switch (s) {
        case CrowdingSeverity::Mild: return "mild";
        case CrowdingSeverity::Moderate: return "moderate";
        case CrowdingSeverity::Severe: return "severe";
    }
    return "?";
}

CrowdingSeverity parse_severity_band(std::string_view text) {
    for (CrowdingSeverity s : {CrowdingSeverity::Mild, CrowdingSeverity::Moderate, CrowdingSeverity::Severe}) {
        if (to_string(s) == text) return s;
    }
    throw std::invalid_argument("unknown crowding severity '" + std::string(text) + "'");
}

ArchCurve arch_curve(Archetype a) {
    switch (a) {
        case Archetype::Tapered: return {22.0, 44.0};
        case Archetype::Ovoid: return {26.0, 40.0};
        case Archetype::Square: return {30.0, 34.0};
        case Archetype::NarrowV: return {19.0, 46.0};
    }
    return {26.0, 40.0};
}

SyntheticCase generate_scenario(const ScenarioSpec& spec, const SyntheticConfig& cfg) {
    if (spec.missing_count < 0 || spec.missing_count > 2) {
        throw std::invalid_argument("missing_count must lie in 0..2");
    }
    SplitMix64 rng(spec.seed);
    const ArchCurve curve = arch_curve(spec.archetype);
    const std::vector<FdiTooth> slots = [&] {
        std::vector<FdiTooth> v;
        for (int s = 0; s < kSlotsPerArch; ++s) v.push_back(FdiTooth::from_slot(spec.arch, s));
        return v;
    }();

    std::vector<bool> missing(kSlotsPerArch, false);
    while (true) {
        std::fill(missing.begin(), missing.end(), false);
        for (int picked = 0; picked < spec.missing_count;) {
            const int s = rng.uniform_int(0, kSlotsPerArch - 1);
            if (!missing[static_cast<std::size_t>(s)]) {
                missing[static_cast<std::size_t>(s)] = true;
                ++picked;
            }
        }
        // Slots 7 and 8 are the two central incisors.
        if (!(missing[7] && missing[8])) break;
    }

    const auto [lo, hi] = [&]() -> std::pair<double, double> {
        switch (spec.severity) {
            case CrowdingSeverity::Mild: return {0.25, cfg.mild_max_mm};
            case CrowdingSeverity::Moderate: return {cfg.mild_max_mm, cfg.moderate_max_mm};
            case CrowdingSeverity::Severe: return {cfg.moderate_max_mm, cfg.severe_max_mm};
        }
        return {0.25, cfg.mild_max_mm};
    }();
    const double total = rng.uniform(lo, hi);

    // Contacts between neighbouring present teeth; anterior contacts take most crowding.
    std::vector<std::size_t> contact_left;
    std::vector<double> weight;
    for (std::size_t s = 0; s + 1 < slots.size(); ++s) {
        if (missing[s] || missing[s + 1]) continue;
        const bool anterior = slots[s].position() <= 3 && slots[s + 1].position() <= 3;
        contact_left.push_back(s);
        weight.push_back(anterior ? rng.uniform(1.5, 3.0) : rng.uniform(0.2, 1.0));
    }
    const double weight_sum = std::accumulate(weight.begin(), weight.end(), 0.0);
    SyntheticCase out;
    out.spec = spec;
    std::vector<double> load(slots.size(), 0.0);
    for (std::size_t i = 0; i < contact_left.size(); ++i) {
        const double overlap = total * weight[i] / weight_sum;
        out.crowding.contact_overlap_mm.push_back(overlap);
        load[contact_left[i]] += 0.5 * overlap;
        load[contact_left[i] + 1] += 0.5 * overlap;
    }

    out.open_bite = rng.uniform() < cfg.open_bite_fraction;
    out.ground_truth = ArchState(spec.arch);
    out.ideal = ArchState(spec.arch);
    out.cloud.arch = spec.arch;
    std::vector<FdiTooth> labels;

    for (std::size_t s = 0; s < slots.size(); ++s) {
        const FdiTooth fdi = slots[s];
        const ToothShape shape = tooth_shape(fdi);
        const IdealPose ideal = ideal_pose(fdi, curve);
        const Vec3 t = ideal.orientation.rotate({1.0, 0.0, 0.0});
        const Vec3 n = ideal.orientation.rotate({0.0, 1.0, 0.0});
        if (missing[s]) {
            ToothState absent{.fdi = fdi, .centroid = ideal.centroid, .orientation = ideal.orientation,
                              .landmarks = {}};
            out.ground_truth.put(absent);
            out.ideal.put(absent);
            continue;
        }

        const double l = load[s];
        double vertical = -rng.uniform(0.0, 0.4);  // sits occlusally, needs intrusion
        if (out.open_bite && fdi.position() <= 2) vertical = rng.uniform(0.6, 1.4);
        const Vec3 current = ideal.centroid + (rng.sign() * 0.5 * l) * t +
                             (rng.sign() * l * rng.uniform(0.5, 1.0)) * n + Vec3{0.0, 0.0, vertical};
        const double tilt = std::min(5.0, 3.0 * l);
        const EulerAnglesDeg offset{rng.sign() * rng.uniform(0.0, tilt), rng.sign() * rng.uniform(0.0, tilt),
                                    rng.sign() * std::min(cfg.max_compensating_rotation_deg,
                                                          12.0 * l * rng.uniform(0.5, 1.5))};
        const UnitQuaternion e = euler_to_quaternion(offset);
        const UnitQuaternion q = ideal.orientation * e;

        ToothState truth{.fdi = fdi, .centroid = current, .orientation = q,
                         .landmarks = landmarks_for(shape, ideal.side, current, q)};
        truth.extents = {2.0 * shape.a, 2.0 * shape.b, 2.0 * shape.c};
        truth.confidence = 1.0;
        truth.present = true;
        out.ground_truth.put(truth);

        ToothState target = truth;
        target.centroid = ideal.centroid;
        target.orientation = ideal.orientation;
        target.landmarks = landmarks_for(shape, ideal.side, ideal.centroid, ideal.orientation);
        out.ideal.put(target);

        const Vec3 d = ideal.centroid - current;
        const EulerAnglesDeg back = quaternion_to_euler(e.conjugate());
        out.target_plan.add(fdi, {d.x, d.y, d.z, back.rx, back.ry, back.rz});

        const int pairs = rng.uniform_int(60, 147);
        for (int i = 0; i < pairs; ++i) {
            Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
            const double len = norm(dir);
            if (len < 1e-12) dir = {1.0, 0.0, 0.0};
            else dir = dir / len;
            const Vec3 offset_world = q.rotate({shape.a * dir.x, shape.b * dir.y, shape.c * dir.z});
            out.cloud.points.push_back(current + offset_world);
            out.cloud.points.push_back(current - offset_world);
            labels.push_back(fdi);
            labels.push_back(fdi);
        }
        for (const Landmark& lm : truth.landmarks) {
            out.cloud.points.push_back(lm.position);
            labels.push_back(fdi);
        }
    }
    out.cloud.labels = std::move(labels);
    return out;
}

std::vector<ScenarioSpec> enumerate_suite(int n, std::uint64_t master_seed) {
    if (n < 1) throw std::invalid_argument("suite size must be >= 1");
    constexpr int kCells = 4 * 3 * 3;
    std::vector<ScenarioSpec> suite;
    suite.reserve(static_cast<std::size_t>(n));
    std::uint64_t state = master_seed;
    for (int i = 0; i < n; ++i) {
        const int cell = i % kCells;
        ScenarioSpec spec;
        spec.archetype = static_cast<Archetype>(cell / 9);
        spec.severity = static_cast<CrowdingSeverity>((cell / 3) % 3);
        spec.missing_count = cell % 3;
        spec.arch = (i / kCells) % 2 == 0 ? Arch::Upper : Arch::Lower;
        spec.seed = splitmix_step(state);
        suite.push_back(spec);
    }
    return suite;
}

bool is_feasible(const TreatmentScore& score) {
    return score.count(Severity::Critical) == 0 && score.composite >= 60.0;
}

BenchmarkOptions benchmark_options(const AppConfig& cfg) {
    BenchmarkOptions o;
    o.scoring = cfg.scoring;
    o.segmentation = cfg.segmentation;
    o.heatmaps = cfg.heatmaps;
    o.heatmaps.heatmap_noise = cfg.benchmark.heatmap_noise;
    o.heatmaps.presence_noise = cfg.benchmark.presence_noise;
    o.heatmaps.presence_flip_prob = cfg.benchmark.presence_flip_prob;
    o.synthetic = cfg.benchmark.synthetic;
    o.workers = cfg.benchmark.workers;
    return o;
}

namespace {

double centroid_error(const ArchState& truth, const ArchState& estimate) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [fdi, t] : truth.teeth()) {
        const ToothState* e = estimate.find(fdi);
        if (!t.present || e == nullptr || !e->present) continue;
        sum += distance(t.centroid, e->centroid);
        ++count;
    }
    return count == 0 ? 0.0 : sum / count;
}

std::vector<ScenarioRow> run_scenario(std::size_t index, const ScenarioSpec& spec,
                                      const std::vector<FusionConfig>& modes, const BenchmarkOptions& options) {
    std::vector<ScenarioRow> rows;
    std::optional<SyntheticCase> sc;
    std::string generation_error;
    try {
        sc = options.generator ? options.generator(spec) : generate_scenario(spec, options.synthetic);
    } catch (const std::exception& e) {
        generation_error = std::string("scenario generation failed: ") + e.what();
    }

    std::optional<Orchestrator> orchestrator;
    if (sc) {
        SyntheticOracleSource::Options heatmaps = options.heatmaps;
        heatmaps.seed = spec.seed;
        orchestrator.emplace(std::make_shared<SegmentationAgent>(options.segmentation),
                             std::make_shared<LandmarkAgent>(
                                 std::make_shared<SyntheticOracleSource>(sc->ground_truth, heatmaps)));
    }

    for (const FusionConfig& mode : modes) {
        ScenarioRow row;
        row.index = index;
        row.mode = mode_name(mode);
        const auto start = std::chrono::steady_clock::now();
        if (!sc) {
            row.error = generation_error;
        } else {
            try {
                const PipelineResult result = orchestrator->run(mode, sc->cloud);
                const TreatmentScore score = score_plan(sc->target_plan, result.arch, sc->crowding, options.scoring);
                row.ok = true;
                row.composite = score.composite;
                row.grade = score.grade;
                row.feasible = is_feasible(score);
                row.critical = score.count(Severity::Critical);
                row.warnings = score.count(Severity::Warning);
                row.v1_score = score.v1_score;
                row.aligners = aligner_count(sc->target_plan, options.scoring.staging);
                row.centroid_error_mm = centroid_error(sc->ground_truth, result.arch);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<ScenarioSpec>& suite, const std::vector<FusionConfig>& modes,
                              const BenchmarkOptions& options) {
    if (suite.empty()) throw std::invalid_argument("benchmark suite is empty");
    if (modes.empty()) throw std::invalid_argument("no orchestrator modes selected");
    for (const FusionConfig& m : modes) m.validate();
    options.scoring.staging.validate();

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::vector<ScenarioRow>> per_scenario(suite.size());
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    const std::size_t workers =
        std::min(suite.size(), static_cast<std::size_t>(options.workers > 0 ? static_cast<unsigned>(options.workers) : hw));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < suite.size(); i = next++) {
            per_scenario[i] = run_scenario(i, suite[i], modes, options);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    BenchmarkReport report;
    report.n = suite.size();
    report.suite = suite;
    for (auto& rows : per_scenario) {
        for (auto& row : rows) report.rows.push_back(std::move(row));
    }
    for (const FusionConfig& mode : modes) {
        ModeStats st;
        st.mode = mode_name(mode);
        std::vector<double> quality;
        std::vector<double> v1;
        std::vector<double> aligners;
        std::vector<double> error;
        std::vector<double> seconds;
        std::size_t feasible = 0;
        for (const ScenarioRow& row : report.rows) {
            if (row.mode != st.mode) continue;
            ++st.n;
            seconds.push_back(row.seconds);
            if (!row.ok) continue;
            quality.push_back(row.composite);
            v1.push_back(row.v1_score);
            aligners.push_back(row.aligners);
            error.push_back(row.centroid_error_mm);
            feasible += row.feasible ? 1 : 0;
        }
        st.succeeded = quality.size();
        st.mean_quality = mean_of(quality);
        st.sd_quality = population_sd(quality);
        st.feasibility = st.succeeded == 0 ? 0.0 : static_cast<double>(feasible) / static_cast<double>(st.succeeded);
        st.mean_v1_score = mean_of(v1);
        st.mean_aligners = mean_of(aligners);
        st.mean_centroid_error_mm = mean_of(error);
        st.mean_seconds = mean_of(seconds);
        st.sd_seconds = population_sd(seconds);
        report.modes.push_back(std::move(st));
    }
    report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

Json to_json(const BenchmarkReport& report) {
    Json suite = Json::array();
    for (std::size_t i = 0; i < report.suite.size(); ++i) {
        const ScenarioSpec& s = report.suite[i];
        suite.push_back({{"index", i},
                         {"archetype", std::string(to_string(s.archetype))},
                         {"severity", std::string(to_string(s.severity))},
                         {"missing_count", s.missing_count},
                         {"arch", std::string(to_string(s.arch))},
                         {"seed", s.seed}});
    }
    Json modes = Json::array();
    Json mode_timing = Json::array();
    for (const ModeStats& m : report.modes) {
        modes.push_back({{"mode", m.mode},
                         {"n", m.n},
                         {"succeeded", m.succeeded},
                         {"failed", m.n - m.succeeded},
                         {"mean_quality", m.mean_quality},
                         {"sd_quality", m.sd_quality},
                         {"feasibility", m.feasibility},
                         {"mean_v1_score", m.mean_v1_score},
                         {"mean_aligners", m.mean_aligners},
                         {"mean_centroid_error_mm", m.mean_centroid_error_mm}});
        mode_timing.push_back({{"mode", m.mode}, {"mean_s", m.mean_seconds}, {"sd_s", m.sd_seconds}});
    }
    Json rows = Json::array();
    Json failures = Json::array();
    Json row_seconds = Json::array();
    for (const ScenarioRow& r : report.rows) {
        Json row = {{"index", r.index}, {"mode", r.mode}, {"ok", r.ok}};
        if (r.ok) {
            row.update({{"composite", r.composite},
                        {"grade", std::string(to_string(r.grade))},
                        {"feasible", r.feasible},
                        {"critical", r.critical},
                        {"warnings", r.warnings},
                        {"v1_score", r.v1_score},
                        {"aligners", r.aligners},
                        {"centroid_error_mm", r.centroid_error_mm}});
        } else {
            row["error"] = r.error;
            failures.push_back({{"index", r.index}, {"mode", r.mode}, {"error", r.error}});
        }
        rows.push_back(std::move(row));
        row_seconds.push_back(r.seconds);
    }
    return {{"schema_version", kSchemaVersion},
            {"n", report.n},
            {"master_seed", report.master_seed ? Json(*report.master_seed) : Json(nullptr)},
            {"feasibility_rule", "no critical findings and composite >= 60"},
            {"suite", suite},
            {"modes", modes},
            {"scenarios", rows},
            {"failures", failures},
            {"timing", {{"total_s", report.total_seconds}, {"modes", mode_timing}, {"scenario_s", row_seconds}}}};
}

std::string report_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "index,archetype,severity,missing_count,arch,seed,mode,ok,composite,grade,feasible,critical,warnings,"
           "v1_score,aligners,centroid_error_mm,seconds,error\n";
    std::array<char, 64> buf{};
    auto num = [&](double v) {
        std::snprintf(buf.data(), buf.size(), "%.10g", v);
        return std::string(buf.data());
    };
    for (const ScenarioRow& r : report.rows) {
        const ScenarioSpec& s = report.suite[r.index];
        std::string error = r.error;
        std::replace(error.begin(), error.end(), '"', '\'');
        out << r.index << ',' << to_string(s.archetype) << ',' << to_string(s.severity) << ',' << s.missing_count
            << ',' << to_string(s.arch) << ',' << s.seed << ',' << r.mode << ',' << (r.ok ? 1 : 0) << ','
            << num(r.composite) << ',' << (r.ok ? to_string(r.grade) : "") << ',' << (r.feasible ? 1 : 0) << ','
            << r.critical << ',' << r.warnings << ',' << num(r.v1_score) << ',' << r.aligners << ','
            << num(r.centroid_error_mm) << ',' << num(r.seconds) << ",\"" << error << "\"\n";
    }
    return out.str();
}

}  // namespace orthoplan
