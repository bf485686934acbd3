#pragma once

#include "orthoplan/dental.hpp"

#include <map>
#include <vector>

namespace orthoplan {

struct StagingConfig {
    double delta_trans_mm = 0.25;    // per-aligner translation budget
    double delta_rot_deg = 2.0;      // per-aligner rotation budget
    int frames_per_aligner = 3;
    int min_aligners = 20;
    double extrusion_start = 0.6;    // normalized time at which extrusion begins
    // Gate only the vertical component of an extruding tooth instead of all six DoF.
    bool defer_vertical_only = false;
    // Count aligners on over-engineered movements instead of raw ones.
    bool count_over_engineered = false;
    double over_engineering = 1.30;

    void validate() const;
};

/// max(ceil(max |T| / delta_trans), ceil(max |R| / delta_rot), min_aligners), where |T| is
/// the translation norm and |R| the Euler-angle vector norm of each tooth's movement.
int aligner_count(const MovementPlan& plan, const StagingConfig& cfg);

/// Effective progress of a tooth at normalized time t. Extruding teeth (tz < 0) hold
/// until extrusion_start and then catch up linearly; everything else moves with t.
double t_eff(double tz, double t, const StagingConfig& cfg);

struct ToothPose {
    Vec3 centroid;
    UnitQuaternion orientation;
};

struct TreatmentFrame {
    int index = 0;
    double t = 0.0;
    std::map<FdiTooth, ToothPose> poses;
};

/// Per-stage maxima are taken over teeth between consecutive aligner boundaries
/// (frames i*r and (i+1)*r). Rotation per stage is the Euler-vector norm of the
/// movement times the progress made in that stage.
struct StagingSummary {
    int aligner_count = 0;
    int frame_count = 0;
    std::vector<double> stage_max_displacement_mm;
    std::vector<double> stage_max_rotation_deg;
    std::vector<FdiTooth> deferred_teeth;
};

struct FrameSequence {
    int aligners = 0;
    int frames_per_aligner = 0;
    std::vector<TreatmentFrame> frames;  // F + 1 frames, t = index / F
    StagingSummary summary;
};

/// Interpolates every present tooth of `arch`; unplanned teeth stay put. Target
/// orientation is initial * euler_to_quaternion(rx, ry, rz). Throws
/// std::invalid_argument when a planned tooth is absent from the arch.
FrameSequence generate_frames(const ArchState& arch, const MovementPlan& plan, const StagingConfig& cfg);

/// Same aligner count and per-stage maxima as generate_frames, without building frames.
StagingSummary staging_summary_only(const MovementPlan& plan, const StagingConfig& cfg);

}  // namespace orthoplan
