#include "orthoplan/dental.hpp"

#include <stdexcept>

namespace orthoplan {

std::string_view to_string(Arch arch) { return arch == Arch::Upper ? "upper" : "lower"; }

Arch parse_arch(std::string_view text) {
    if (text == "upper") return Arch::Upper;
    if (text == "lower") return Arch::Lower;
    throw std::invalid_argument("unknown arch '" + std::string(text) + "'");
}

bool FdiTooth::is_valid(int code) {
    const int quadrant = code / 10;
    const int position = code % 10;
    return quadrant >= 1 && quadrant <= 4 && position >= 1 && position <= 8;
}

FdiTooth::FdiTooth(int code) : code_(code) {
    if (!is_valid(code)) {
        throw std::invalid_argument("invalid FDI tooth code " + std::to_string(code));
    }
}

FdiTooth FdiTooth::from_slot(Arch arch, int slot) {
    if (slot < 0 || slot >= kSlotsPerArch) {
        throw std::invalid_argument("tooth slot out of range: " + std::to_string(slot));
    }
    const int right_quadrant = arch == Arch::Upper ? 1 : 4;
    const int left_quadrant = arch == Arch::Upper ? 2 : 3;
    if (slot < 8) return FdiTooth(right_quadrant * 10 + (8 - slot));
    return FdiTooth(left_quadrant * 10 + (slot - 7));
}

std::vector<FdiTooth> FdiTooth::all(Arch arch) {
    std::vector<FdiTooth> teeth;
    teeth.reserve(kSlotsPerArch);
    for (int s = 0; s < kSlotsPerArch; ++s) teeth.push_back(from_slot(arch, s));
    return teeth;
}

std::vector<FdiTooth> FdiTooth::all() {
    auto teeth = all(Arch::Upper);
    const auto lower = all(Arch::Lower);
    teeth.insert(teeth.end(), lower.begin(), lower.end());
    return teeth;
}

int FdiTooth::slot() const {
    const int q = quadrant();
    const bool right = q == 1 || q == 4;
    return right ? 8 - position() : 7 + position();
}

FdiTooth FdiTooth::contralateral() const {
    static constexpr std::array<int, 5> kMirror{0, 2, 1, 4, 3};
    return FdiTooth(kMirror[static_cast<std::size_t>(quadrant())] * 10 + position());
}

std::string_view to_string(ToothType type) {
    switch (type) {
        case ToothType::Incisor: return "incisor";
        case ToothType::Canine: return "canine";
        case ToothType::Premolar: return "premolar";
        case ToothType::Molar: return "molar";
    }
    return "unknown";
}

ToothType tooth_type(FdiTooth fdi) {
    const int p = fdi.position();
    if (p <= 2) return ToothType::Incisor;
    if (p == 3) return ToothType::Canine;
    if (p <= 5) return ToothType::Premolar;
    return ToothType::Molar;
}

ToothType tooth_type(int fdi_code) { return tooth_type(FdiTooth(fdi_code)); }

MovementLimits limits_for(ToothType type) {
    // Columns of the Glaser limit table; vertical limits are shared by all types.
    switch (type) {
        case ToothType::Incisor: return {4.0, 2.5, 2.0, 1.5, 15.0, 10.0, 45.0, 0.69, 0.42};
        case ToothType::Canine: return {3.5, 2.5, 2.0, 1.5, 12.0, 10.0, 40.0, 0.69, 0.42};
        case ToothType::Premolar: return {3.5, 3.0, 2.0, 1.5, 10.0, 10.0, 35.0, 0.69, 0.42};
        case ToothType::Molar: return {2.0, 2.5, 2.0, 1.5, 8.0, 8.0, 20.0, 0.69, 0.42};
    }
    throw std::invalid_argument("unknown tooth type");
}

std::string_view to_string(Axis axis) {
    switch (axis) {
        case Axis::Tx: return "tx";
        case Axis::Ty: return "ty";
        case Axis::Tz: return "tz";
        case Axis::Rx: return "rx";
        case Axis::Ry: return "ry";
        case Axis::Rz: return "rz";
    }
    return "?";
}

double axis_limit(const MovementLimits& limits, Axis axis, double value) {
    switch (axis) {
        case Axis::Tx: return limits.tx_md_mm;
        case Axis::Ty: return limits.ty_bl_mm;
        case Axis::Tz: return value < 0.0 ? limits.tz_extrusion_mm : limits.tz_intrusion_mm;
        case Axis::Rx: return limits.rx_torque_deg;
        case Axis::Ry: return limits.ry_tip_deg;
        case Axis::Rz: return limits.rz_rotation_deg;
    }
    throw std::invalid_argument("unknown axis");
}

double PredictabilityTable::eta(ToothType type, Axis axis, double value) const {
    switch (axis) {
        case Axis::Tx:
        case Axis::Ty: return translation;
        case Axis::Tz: return value < 0.0 ? extrusion : intrusion;
        case Axis::Rx: return torque;
        case Axis::Ry: return tip;
        case Axis::Rz:
            return type == ToothType::Canine || type == ToothType::Premolar ? rotation_rounded
                                                                            : rotation;
    }
    throw std::invalid_argument("unknown axis");
}

double ToothMovement::operator[](Axis axis) const {
    switch (axis) {
        case Axis::Tx: return tx;
        case Axis::Ty: return ty;
        case Axis::Tz: return tz;
        case Axis::Rx: return rx;
        case Axis::Ry: return ry;
        case Axis::Rz: return rz;
    }
    throw std::invalid_argument("unknown axis");
}

bool ToothMovement::is_finite() const {
    return std::isfinite(tx) && std::isfinite(ty) && std::isfinite(tz) && std::isfinite(rx) &&
           std::isfinite(ry) && std::isfinite(rz);
}

ToothMovement ToothMovement::scaled(double factor) const {
    return {tx * factor, ty * factor, tz * factor, rx * factor, ry * factor, rz * factor};
}

void MovementPlan::add(FdiTooth fdi, const ToothMovement& movement) {
    if (!entries_.emplace(fdi, movement).second) {
        throw std::invalid_argument("duplicate plan entry for tooth " + std::to_string(fdi.code()));
    }
}

const ToothMovement* MovementPlan::find(FdiTooth fdi) const {
    const auto it = entries_.find(fdi);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string_view to_string(LandmarkGroup group) {
    switch (group) {
        case LandmarkGroup::Mesial: return "mesial";
        case LandmarkGroup::Distal: return "distal";
        case LandmarkGroup::Buccal: return "buccal";
        case LandmarkGroup::Lingual: return "lingual";
        case LandmarkGroup::Occlusal: return "occlusal";
    }
    return "?";
}

LandmarkGroup parse_landmark_group(std::string_view text) {
    for (int g = 0; g < kLandmarkGroups; ++g) {
        const auto group = static_cast<LandmarkGroup>(g);
        if (to_string(group) == text) return group;
    }
    throw std::invalid_argument("unknown landmark group '" + std::string(text) + "'");
}

void PointCloud::validate() const {
    if (points.empty()) throw std::invalid_argument("point cloud is empty");
    for (const Vec3& p : points) {
        if (!is_finite(p)) throw std::invalid_argument("point cloud contains a non-finite point");
    }
    if (labels) {
        if (labels->size() != points.size()) {
            throw std::invalid_argument("label count does not match point count");
        }
        for (const FdiTooth& label : *labels) {
            if (label.arch() != arch) {
                throw std::invalid_argument("label " + std::to_string(label.code()) +
                                            " belongs to the other arch");
            }
        }
    }
}

void ArchState::put(ToothState state) {
    if (state.fdi.arch() != arch_) {
        throw std::invalid_argument("tooth " + std::to_string(state.fdi.code()) +
                                    " does not belong to the " + std::string(to_string(arch_)) +
                                    " arch");
    }
    if (!(state.confidence >= 0.0 && state.confidence <= 1.0)) {
        throw std::invalid_argument("tooth confidence must lie in [0, 1]");
    }
    if (!state.present && !state.landmarks.empty()) {
        throw std::invalid_argument("absent tooth cannot carry landmarks");
    }
    if (state.landmarks.size() > static_cast<std::size_t>(kLandmarkGroups)) {
        throw std::invalid_argument("a tooth carries at most five landmarks");
    }
    const FdiTooth key = state.fdi;
    teeth_.insert_or_assign(key, std::move(state));
}

const ToothState* ArchState::find(FdiTooth fdi) const {
    const auto it = teeth_.find(fdi);
    return it == teeth_.end() ? nullptr : &it->second;
}

bool ArchState::is_present(FdiTooth fdi) const {
    const ToothState* s = find(fdi);
    return s != nullptr && s->present;
}

std::size_t ArchState::present_count() const {
    std::size_t n = 0;
    for (const auto& [fdi, state] : teeth_) n += state.present ? 1 : 0;
    return n;
}

std::vector<PlanNote> validate_plan(const MovementPlan& plan, const ArchState& arch) {
    std::vector<PlanNote> notes;
    if (plan.empty()) {
        notes.push_back({PlanNote::Kind::EmptyPlan, std::nullopt, "plan has no movements"});
    }
    for (const auto& [fdi, movement] : plan) {
        const std::string tooth = std::to_string(fdi.code());
        if (fdi.arch() != arch.arch()) {
            notes.push_back({PlanNote::Kind::WrongArch, fdi,
                             "tooth " + tooth + " is not in the " +
                                 std::string(to_string(arch.arch())) + " arch"});
        } else if (!arch.is_present(fdi)) {
            notes.push_back({PlanNote::Kind::AbsentTooth, fdi,
                             "movement planned for absent tooth " + tooth});
        }
        if (!movement.is_finite()) {
            notes.push_back({PlanNote::Kind::NonFinite, fdi,
                             "movement for tooth " + tooth + " has a non-finite component"});
        }
    }
    return notes;
}

}  // namespace orthoplan
