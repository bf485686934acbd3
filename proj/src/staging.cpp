#include "orthoplan/staging.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace orthoplan {

void StagingConfig::validate() const {
    if (!(delta_trans_mm > 0.0) || !(delta_rot_deg > 0.0)) {
        throw std::invalid_argument("per-aligner budgets must be positive");
    }
    if (frames_per_aligner < 1) throw std::invalid_argument("frames per aligner must be >= 1");
    if (min_aligners < 1) throw std::invalid_argument("minimum aligner count must be >= 1");
    if (!(extrusion_start > 0.0 && extrusion_start < 1.0)) {
        throw std::invalid_argument("extrusion start must lie in (0, 1)");
    }
    if (!(over_engineering > 0.0)) throw std::invalid_argument("over-engineering factor must be positive");
}

int aligner_count(const MovementPlan& plan, const StagingConfig& cfg) {
    cfg.validate();
    double max_trans = 0.0;
    double max_rot = 0.0;
    for (const auto& [fdi, raw] : plan) {
        if (!raw.is_finite()) throw std::invalid_argument("plan contains a non-finite movement");
        const ToothMovement m = cfg.count_over_engineered ? raw.scaled(cfg.over_engineering) : raw;
        max_trans = std::max(max_trans, m.translation_norm());
        max_rot = std::max(max_rot, m.rotation_norm());
    }
    const double by_trans = std::ceil(max_trans / cfg.delta_trans_mm);
    const double by_rot = std::ceil(max_rot / cfg.delta_rot_deg);
    const double count = std::max({by_trans, by_rot, static_cast<double>(cfg.min_aligners)});
    if (count > 1e6) throw std::invalid_argument("plan needs an unreasonable number of aligners");
    return static_cast<int>(count);
}

double t_eff(double tz, double t, const StagingConfig& cfg) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("normalized time must lie in [0, 1]");
    if (tz < 0.0) {
        if (t < cfg.extrusion_start) return 0.0;
        return (t - cfg.extrusion_start) / (1.0 - cfg.extrusion_start);
    }
    return t;
}

namespace {

// Progress of the horizontal translation, vertical translation and rotation of one tooth.
struct Progress {
    double horizontal;
    double vertical;
    double rotation;
};

Progress progress(const ToothMovement& m, double t, const StagingConfig& cfg) {
    const double te = t_eff(m.tz, t, cfg);
    if (cfg.defer_vertical_only) return {t, te, t};
    return {te, te, te};
}

Vec3 displacement_at(const ToothMovement& m, const Progress& p) {
    return {m.tx * p.horizontal, m.ty * p.horizontal, m.tz * p.vertical};
}

double boundary_time(int stage, const StagingSummary& s, int frames_per_aligner) {
    return static_cast<double>(stage * frames_per_aligner) / static_cast<double>(s.frame_count);
}

StagingSummary empty_summary(const MovementPlan& plan, const StagingConfig& cfg) {
    StagingSummary s;
    s.aligner_count = aligner_count(plan, cfg);
    s.frame_count = s.aligner_count * cfg.frames_per_aligner;
    s.stage_max_displacement_mm.assign(static_cast<std::size_t>(s.aligner_count), 0.0);
    s.stage_max_rotation_deg.assign(static_cast<std::size_t>(s.aligner_count), 0.0);
    for (const auto& [fdi, m] : plan) {
        if (m.tz < 0.0) s.deferred_teeth.push_back(fdi);
    }
    return s;
}

}  // namespace

StagingSummary staging_summary_only(const MovementPlan& plan, const StagingConfig& cfg) {
    StagingSummary s = empty_summary(plan, cfg);
    for (const auto& [fdi, m] : plan) {
        const double rot_norm = m.rotation_norm();
        Progress prev = progress(m, 0.0, cfg);
        for (int i = 0; i < s.aligner_count; ++i) {
            const Progress next = progress(m, boundary_time(i + 1, s, cfg.frames_per_aligner), cfg);
            const Vec3 step{m.tx * (next.horizontal - prev.horizontal),
                            m.ty * (next.horizontal - prev.horizontal),
                            m.tz * (next.vertical - prev.vertical)};
            auto& disp = s.stage_max_displacement_mm[static_cast<std::size_t>(i)];
            auto& rot = s.stage_max_rotation_deg[static_cast<std::size_t>(i)];
            disp = std::max(disp, norm(step));
            rot = std::max(rot, rot_norm * std::abs(next.rotation - prev.rotation));
            prev = next;
        }
    }
    return s;
}

FrameSequence generate_frames(const ArchState& arch, const MovementPlan& plan, const StagingConfig& cfg) {
    for (const auto& [fdi, m] : plan) {
        if (!arch.is_present(fdi)) {
            throw std::invalid_argument("movement planned for tooth " + std::to_string(fdi.code()) +
                                        " which is not present in the arch");
        }
    }
    FrameSequence seq;
    seq.summary = empty_summary(plan, cfg);
    seq.aligners = seq.summary.aligner_count;
    seq.frames_per_aligner = cfg.frames_per_aligner;
    const int frame_count = seq.summary.frame_count;

    struct Track {
        FdiTooth fdi;
        ToothMovement movement;
        Vec3 start;
        UnitQuaternion initial;
        UnitQuaternion target;
        std::vector<double> rotation_progress;
    };
    std::vector<Track> tracks;
    for (const auto& [fdi, state] : arch.teeth()) {
        if (!state.present) continue;
        const ToothMovement* planned = plan.find(fdi);
        const ToothMovement m = planned != nullptr ? *planned : ToothMovement{};
        tracks.push_back({fdi, m, state.centroid, state.orientation,
                          state.orientation * euler_to_quaternion(m.rotation()), {}});
    }

    seq.frames.reserve(static_cast<std::size_t>(frame_count) + 1);
    for (int f = 0; f <= frame_count; ++f) {
        TreatmentFrame frame;
        frame.index = f;
        frame.t = static_cast<double>(f) / static_cast<double>(frame_count);
        for (Track& track : tracks) {
            const Progress p = progress(track.movement, frame.t, cfg);
            track.rotation_progress.push_back(p.rotation);
            frame.poses.emplace(track.fdi,
                                ToothPose{track.start + displacement_at(track.movement, p),
                                          slerp(track.initial, track.target, p.rotation)});
        }
        seq.frames.push_back(std::move(frame));
    }

    const int r = cfg.frames_per_aligner;
    for (int i = 0; i < seq.aligners; ++i) {
        const auto& a = seq.frames[static_cast<std::size_t>(i * r)];
        const auto& b = seq.frames[static_cast<std::size_t>((i + 1) * r)];
        auto& disp = seq.summary.stage_max_displacement_mm[static_cast<std::size_t>(i)];
        auto& rot = seq.summary.stage_max_rotation_deg[static_cast<std::size_t>(i)];
        for (const Track& track : tracks) {
            if (plan.find(track.fdi) == nullptr) continue;
            disp = std::max(disp, distance(a.poses.at(track.fdi).centroid, b.poses.at(track.fdi).centroid));
            const double dp = track.rotation_progress[static_cast<std::size_t>((i + 1) * r)] -
                              track.rotation_progress[static_cast<std::size_t>(i * r)];
            rot = std::max(rot, track.movement.rotation_norm() * std::abs(dp));
        }
    }
    return seq;
}

}  // namespace orthoplan
