#pragma once

// Composite biomechanical scoring.
//
// Six sub-scores in [0, 100] are combined with fixed weights into Q, then every
// Critical finding multiplies by 0.85 and every Warning by 0.97 to give Q*, which
// determines the letter grade. Movements are over-engineered (x1.30) before any
// evaluation. The legacy single-number score (mean per-axis limit ratio) is kept
// alongside for comparison.
//
// Sub-score formulas:
//   bio            100 * mean over (tooth, axis) of max(0, 1 - |1.3 m| / limit)
//   staging        100 * share of aligner stages within both per-aligner budgets
//   attachments    100 * (1 - teeth needing attachments / planned teeth)
//   ipr            100 * min(1, 0.5 mm * contacts / required space)
//   occlusion      100 * (1 - mean left/right translation asymmetry / 2 mm)
//   predictability 100 * magnitude-weighted mean predictability of all components

#include "orthoplan/dental.hpp"
#include "orthoplan/staging.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orthoplan {

enum class Severity { Critical, Warning, Info };
std::string_view to_string(Severity severity);
Severity parse_severity(std::string_view text);

namespace finding_codes {
inline constexpr std::string_view kExtrusionOverLimit = "EXTRUSION_OVER_LIMIT";
inline constexpr std::string_view kExtrusionLowPredictability = "EXTRUSION_LOW_PRED";
inline constexpr std::string_view kSimultaneousDistalization = "SIMULTANEOUS_DISTALIZATION";
inline constexpr std::string_view kAxisOverLimit = "AXIS_OVER_LIMIT";
inline constexpr std::string_view kAttachmentIndicated = "ATTACHMENT_INDICATED";

/// Codes allowed on Critical and Warning findings.
bool is_registered(std::string_view code);
}  // namespace finding_codes

struct Finding {
    Severity severity;
    std::string code;
    std::optional<FdiTooth> fdi;
    std::string message;
    std::optional<int> principle;

    bool operator==(const Finding&) const = default;
};

struct SubScores {
    double bio = 100.0;
    double staging = 100.0;
    double attachments = 100.0;
    double ipr = 100.0;
    double occlusion = 100.0;
    double predictability = 100.0;

    std::array<double, 6> as_array() const {
        return {bio, staging, attachments, ipr, occlusion, predictability};
    }
    bool operator==(const SubScores&) const = default;
};

// bio, staging, attachments, ipr, occlusion, predictability
inline constexpr std::array<double, 6> kCompositeWeights{0.30, 0.20, 0.15, 0.10, 0.10, 0.15};
inline constexpr double kCriticalPenalty = 0.85;
inline constexpr double kWarningPenalty = 0.97;
inline constexpr double kOverEngineering = 1.30;

enum class Grade { A, B, C, D, F };
std::string_view to_string(Grade grade);
Grade parse_grade(std::string_view text);
/// Closed lower bounds: A >= 90, B >= 75, C >= 60, D >= 40, else F.
Grade grade_for(double score);

struct TreatmentScore {
    SubScores sub;
    double composite_raw = 100.0;
    double composite = 100.0;
    Grade grade = Grade::A;
    std::vector<Finding> findings;
    double v1_score = 100.0;

    std::size_t count(Severity severity) const;
    bool operator==(const TreatmentScore&) const = default;
};

/// Planned interproximal overlap per contact (mm), from crowding analysis.
struct CrowdingMetadata {
    std::vector<double> contact_overlap_mm;
};

struct ScoringConfig {
    double over_engineering = kOverEngineering;
    double extrusion_critical_mm = 1.5;
    double molar_translation_mm = 1.5;
    int simultaneous_molars = 3;
    double attachment_rotation_deg = 15.0;
    double attachment_extrusion_mm = 0.5;
    double ipr_per_contact_mm = 0.5;
    double occlusion_asymmetry_mm = 2.0;
    PredictabilityTable eta;
    StagingConfig staging;
};

/// Thrown by score_plan when the plan does not fit the arch.
class PlanValidationError : public std::invalid_argument {
public:
    explicit PlanValidationError(std::vector<PlanNote> notes);
    const std::vector<PlanNote>& notes() const { return notes_; }

private:
    std::vector<PlanNote> notes_;
};

ToothMovement over_engineer(const ToothMovement& m, double factor = kOverEngineering);

/// Legacy score: 100 * mean over (tooth, axis) of max(0, 1 - |factor * m| / limit).
double v1_score(const MovementPlan& plan, double factor = kOverEngineering);

/// Push mechanics (extrusion), simultaneous molar movement and per-axis limit
/// breaches, all on over-engineered movements. Attachment indications are Info.
std::vector<Finding> evaluate_principles(const MovementPlan& plan, const ArchState& arch,
                                         const ScoringConfig& cfg = {});

SubScores sub_scores(const MovementPlan& plan, const ArchState& arch, const StagingSummary& staging,
                     const std::optional<CrowdingMetadata>& crowding, const ScoringConfig& cfg = {});

TreatmentScore composite(const SubScores& sub, std::vector<Finding> findings);

/// Full scoring pass. Throws PlanValidationError if validate_plan reports anything.
TreatmentScore score_plan(const MovementPlan& plan, const ArchState& arch,
                          const std::optional<CrowdingMetadata>& crowding = std::nullopt,
                          const ScoringConfig& cfg = {});

}  // namespace orthoplan
