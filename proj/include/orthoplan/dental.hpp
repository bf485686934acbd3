#pragma once

#include "orthoplan/geometry.hpp"

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orthoplan {

enum class Arch { Upper, Lower };

std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view text);

inline constexpr int kSlotsPerArch = 16;
inline constexpr int kLandmarkGroups = 5;
inline constexpr int kLandmarkChannels = kSlotsPerArch * kLandmarkGroups;  // 80

/// Permanent tooth in FDI two-digit notation (quadrant 1-4, position 1-8).
class FdiTooth {
public:
    /// Throws std::invalid_argument for anything outside 11-18, 21-28, 31-38, 41-48.
    explicit FdiTooth(int code);

    static bool is_valid(int code);
    /// Slot 0..15 runs along the arch from the patient's right third molar to the
    /// left third molar (18..11, 21..28 upper; 48..41, 31..38 lower).
    static FdiTooth from_slot(Arch arch, int slot);
    static std::vector<FdiTooth> all();
    static std::vector<FdiTooth> all(Arch arch);

    int code() const { return code_; }
    int quadrant() const { return code_ / 10; }
    int position() const { return code_ % 10; }
    Arch arch() const { return quadrant() <= 2 ? Arch::Upper : Arch::Lower; }
    int slot() const;
    /// Same position on the other side of the arch (11 <-> 21, 36 <-> 46).
    FdiTooth contralateral() const;

    auto operator<=>(const FdiTooth&) const = default;

private:
    int code_;
};

enum class ToothType { Incisor, Canine, Premolar, Molar };

std::string_view to_string(ToothType type);
ToothType tooth_type(FdiTooth fdi);
/// Validating overload for raw codes.
ToothType tooth_type(int fdi_code);

/// One column of the movement-limit table. Vertical limits and their
/// predictability apply to every tooth type.
struct MovementLimits {
    double tx_md_mm;
    double ty_bl_mm;
    double tz_intrusion_mm;
    double tz_extrusion_mm;
    double rx_torque_deg;
    double ry_tip_deg;
    double rz_rotation_deg;
    double eta_intrusion;
    double eta_extrusion;
};

MovementLimits limits_for(ToothType type);

enum class Axis { Tx, Ty, Tz, Rx, Ry, Rz };
inline constexpr std::array<Axis, 6> kAllAxes{Axis::Tx, Axis::Ty, Axis::Tz,
                                             Axis::Rx, Axis::Ry, Axis::Rz};
std::string_view to_string(Axis axis);

/// Limit for a signed component: Tz uses the intrusion limit for tz > 0 and the
/// extrusion limit for tz < 0.
double axis_limit(const MovementLimits& limits, Axis axis, double value);

/// Predictability (fraction of planned movement achieved) per movement class.
/// Intrusion and extrusion come from the limit table; the rest are configurable
/// defaults. Canines and premolars use `rotation_rounded` for Rz.
struct PredictabilityTable {
    double translation = 0.85;
    double intrusion = 0.69;
    double extrusion = 0.42;
    double torque = 0.50;
    double tip = 0.75;
    double rotation = 0.55;
    double rotation_rounded = 0.45;

    double eta(ToothType type, Axis axis, double value) const;
};

/// Signed 6-DoF movement. tz > 0 is intrusion, tz < 0 extrusion. Rotations are
/// intrinsic XYZ Euler angles in degrees, expressed in the tooth's local frame.
struct ToothMovement {
    double tx = 0.0;
    double ty = 0.0;
    double tz = 0.0;
    double rx = 0.0;
    double ry = 0.0;
    double rz = 0.0;

    double operator[](Axis axis) const;
    Vec3 translation() const { return {tx, ty, tz}; }
    EulerAnglesDeg rotation() const { return {rx, ry, rz}; }
    double translation_norm() const { return norm(translation()); }
    double rotation_norm() const { return norm(Vec3{rx, ry, rz}); }
    bool is_finite() const;
    ToothMovement scaled(double factor) const;

    bool operator==(const ToothMovement&) const = default;
};

class MovementPlan {
public:
    using Map = std::map<FdiTooth, ToothMovement>;

    MovementPlan() = default;
    explicit MovementPlan(Map entries) : entries_(std::move(entries)) {}

    /// Throws std::invalid_argument when the tooth already has an entry.
    void add(FdiTooth fdi, const ToothMovement& movement);
    void set(FdiTooth fdi, const ToothMovement& movement) { entries_.insert_or_assign(fdi, movement); }

    const Map& entries() const { return entries_; }
    const ToothMovement* find(FdiTooth fdi) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    bool operator==(const MovementPlan&) const = default;

private:
    Map entries_;
};

enum class LandmarkGroup { Mesial, Distal, Buccal, Lingual, Occlusal };
std::string_view to_string(LandmarkGroup group);
LandmarkGroup parse_landmark_group(std::string_view text);

struct Landmark {
    LandmarkGroup group;
    Vec3 position;
};

struct PointCloud {
    Arch arch = Arch::Upper;
    std::vector<Vec3> points;
    // Ground-truth per-point labels; synthetic data only.
    std::optional<std::vector<FdiTooth>> labels;

    /// Throws std::invalid_argument on an empty cloud, non-finite points, or a label
    /// vector whose length or arch disagrees with the cloud.
    void validate() const;
};

struct ToothState {
    FdiTooth fdi;
    Vec3 centroid;
    UnitQuaternion orientation;
    std::vector<Landmark> landmarks;
    std::array<double, 3> extents{};
    double confidence = 0.0;
    bool present = false;
    // Set when an estimator that should have refined this tooth failed.
    bool degraded = false;
};

class ArchState {
public:
    explicit ArchState(Arch arch = Arch::Upper) : arch_(arch) {}

    Arch arch() const { return arch_; }
    const std::map<FdiTooth, ToothState>& teeth() const { return teeth_; }

    /// Inserts or replaces. Throws std::invalid_argument for a tooth of the other arch
    /// or a state that breaks the confidence/landmark invariants.
    void put(ToothState state);
    const ToothState* find(FdiTooth fdi) const;
    bool is_present(FdiTooth fdi) const;
    std::size_t present_count() const;

private:
    Arch arch_;
    std::map<FdiTooth, ToothState> teeth_;
};

struct PlanNote {
    enum class Kind { AbsentTooth, NonFinite, WrongArch, EmptyPlan };
    Kind kind;
    std::optional<FdiTooth> fdi;
    std::string message;
};

/// Structural consistency of a plan against an arch; an empty result means valid.
std::vector<PlanNote> validate_plan(const MovementPlan& plan, const ArchState& arch);

}  // namespace orthoplan
