#include "orthoplan/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace orthoplan {

namespace {

std::string format(const char* fmt, double a, double b = 0.0) {
    std::array<char, 160> buf{};
    std::snprintf(buf.data(), buf.size(), fmt, a, b);
    return buf.data();
}

bool needs_attachment(ToothType type, const ToothMovement& oe, const ScoringConfig& cfg) {
    const bool rounded = type == ToothType::Canine || type == ToothType::Premolar;
    if (rounded && std::abs(oe.rz) > cfg.attachment_rotation_deg) return true;
    return oe.tz < 0.0 && -oe.tz > cfg.attachment_extrusion_mm;
}

double bio_score(const MovementPlan& plan, double factor) {
    if (plan.empty()) return 100.0;
    double sum = 0.0;
    for (const auto& [fdi, m] : plan) {
        const MovementLimits limits = limits_for(tooth_type(fdi));
        const ToothMovement oe = over_engineer(m, factor);
        for (Axis axis : kAllAxes) {
            const double v = oe[axis];
            sum += std::max(0.0, 1.0 - std::abs(v) / axis_limit(limits, axis, v));
        }
    }
    return 100.0 * sum / static_cast<double>(plan.size() * kAllAxes.size());
}

}  // namespace

std::string_view to_string(Severity severity) {
    switch (severity) {
        case Severity::Critical: return "critical";
        case Severity::Warning: return "warning";
        case Severity::Info: return "info";
    }
    return "?";
}

Severity parse_severity(std::string_view text) {
    if (text == "critical") return Severity::Critical;
    if (text == "warning") return Severity::Warning;
    if (text == "info") return Severity::Info;
    throw std::invalid_argument("unknown severity '" + std::string(text) + "'");
}

bool finding_codes::is_registered(std::string_view code) {
    return code == kExtrusionOverLimit || code == kExtrusionLowPredictability ||
           code == kSimultaneousDistalization || code == kAxisOverLimit;
}

std::string_view to_string(Grade grade) {
    static constexpr std::array<std::string_view, 5> kNames{"A", "B", "C", "D", "F"};
    return kNames[static_cast<std::size_t>(grade)];
}

Grade parse_grade(std::string_view text) {
    for (Grade g : {Grade::A, Grade::B, Grade::C, Grade::D, Grade::F}) {
        if (to_string(g) == text) return g;
    }
    throw std::invalid_argument("unknown grade '" + std::string(text) + "'");
}

Grade grade_for(double score) {
    if (score >= 90.0) return Grade::A;
    if (score >= 75.0) return Grade::B;
    if (score >= 60.0) return Grade::C;
    if (score >= 40.0) return Grade::D;
    return Grade::F;
}

std::size_t TreatmentScore::count(Severity severity) const {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(),
                                                  [&](const Finding& f) { return f.severity == severity; }));
}

namespace {

std::string describe_notes(const std::vector<PlanNote>& notes) {
    std::string text = "plan is inconsistent with the arch";
    for (const PlanNote& note : notes) text += "; " + note.message;
    return text;
}

}  // namespace

PlanValidationError::PlanValidationError(std::vector<PlanNote> notes)
    : std::invalid_argument(describe_notes(notes)), notes_(std::move(notes)) {}

ToothMovement over_engineer(const ToothMovement& m, double factor) { return m.scaled(factor); }

double v1_score(const MovementPlan& plan, double factor) { return bio_score(plan, factor); }

std::vector<Finding> evaluate_principles(const MovementPlan& plan, const ArchState& /*arch*/,
                                         const ScoringConfig& cfg) {
    using namespace finding_codes;
    std::vector<Finding> findings;
    std::vector<FdiTooth> moving_molars;

    for (const auto& [fdi, m] : plan) {
        const ToothType type = tooth_type(fdi);
        const MovementLimits limits = limits_for(type);
        const ToothMovement oe = over_engineer(m, cfg.over_engineering);

        if (oe.tz < 0.0) {
            if (-oe.tz > cfg.extrusion_critical_mm) {
                findings.push_back({Severity::Critical, std::string(kExtrusionOverLimit), fdi,
                                    format("extrusion of %.2f mm (over-engineered) exceeds %.2f mm",
                                           -oe.tz, cfg.extrusion_critical_mm),
                                    1});
            }
            findings.push_back({Severity::Warning, std::string(kExtrusionLowPredictability), fdi,
                                format("extrusion is low-predictability for aligners (eta = %.2f)",
                                       cfg.eta.extrusion),
                                1});
        }
        for (Axis axis : kAllAxes) {
            const double v = oe[axis];
            // Extrusion breaches are reported as critical above.
            if (axis == Axis::Tz && v < 0.0) continue;
            const double limit = axis_limit(limits, axis, v);
            if (std::abs(v) > limit) {
                findings.push_back({Severity::Warning, std::string(kAxisOverLimit), fdi,
                                    std::string(to_string(axis)) +
                                        format(" movement %.2f exceeds the limit of %.2f", std::abs(v), limit),
                                    std::nullopt});
            }
        }
        if (needs_attachment(type, oe, cfg)) {
            findings.push_back({Severity::Info, std::string(kAttachmentIndicated), fdi,
                                "attachment recommended for this movement", std::nullopt});
        }
        if (type == ToothType::Molar && oe.translation_norm() > cfg.molar_translation_mm) {
            moving_molars.push_back(fdi);
        }
    }

    if (static_cast<int>(moving_molars.size()) >= cfg.simultaneous_molars) {
        std::string teeth;
        for (const FdiTooth fdi : moving_molars) teeth += (teeth.empty() ? "" : ", ") + std::to_string(fdi.code());
        findings.push_back({Severity::Warning, std::string(kSimultaneousDistalization), std::nullopt,
                            std::to_string(moving_molars.size()) +
                                " molars translate more than " + format("%.2f mm", cfg.molar_translation_mm) +
                                " simultaneously (" + teeth + "); anchorage at risk",
                            2});
    }
    return findings;
}

SubScores sub_scores(const MovementPlan& plan, const ArchState& arch, const StagingSummary& staging,
                     const std::optional<CrowdingMetadata>& crowding, const ScoringConfig& cfg) {
    SubScores s;
    s.bio = bio_score(plan, cfg.over_engineering);

    if (staging.aligner_count > 0) {
        int within = 0;
        for (int i = 0; i < staging.aligner_count; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            if (staging.stage_max_displacement_mm[idx] <= cfg.staging.delta_trans_mm + 1e-9 &&
                staging.stage_max_rotation_deg[idx] <= cfg.staging.delta_rot_deg + 1e-9) {
                ++within;
            }
        }
        s.staging = 100.0 * within / staging.aligner_count;
    }

    if (!plan.empty()) {
        std::size_t needing = 0;
        for (const auto& [fdi, m] : plan) {
            needing += needs_attachment(tooth_type(fdi), over_engineer(m, cfg.over_engineering), cfg) ? 1 : 0;
        }
        s.attachments =
            std::clamp(100.0 * (1.0 - static_cast<double>(needing) / static_cast<double>(plan.size())), 0.0, 100.0);
    }

    if (crowding) {
        double required = 0.0;
        for (double overlap : crowding->contact_overlap_mm) required += std::max(0.0, overlap);
        if (required > 0.0) {
            const double available = cfg.ipr_per_contact_mm * static_cast<double>(crowding->contact_overlap_mm.size());
            s.ipr = 100.0 * std::min(1.0, available / required);
        }
    }

    double asymmetry = 0.0;
    int pairs = 0;
    const int right_quadrant = arch.arch() == Arch::Upper ? 1 : 4;
    for (int position = 1; position <= 8; ++position) {
        const FdiTooth right(right_quadrant * 10 + position);
        const FdiTooth left = right.contralateral();
        if (!arch.is_present(right) || !arch.is_present(left)) continue;
        const ToothMovement* mr = plan.find(right);
        const ToothMovement* ml = plan.find(left);
        const double nr = mr != nullptr ? mr->translation_norm() : 0.0;
        const double nl = ml != nullptr ? ml->translation_norm() : 0.0;
        asymmetry += std::abs(nr - nl);
        ++pairs;
    }
    if (pairs > 0) {
        const double mean = asymmetry / pairs;
        s.occlusion = 100.0 * std::clamp(1.0 - mean / cfg.occlusion_asymmetry_mm, 0.0, 1.0);
    }

    double weighted = 0.0;
    double magnitude = 0.0;
    for (const auto& [fdi, m] : plan) {
        const ToothType type = tooth_type(fdi);
        const ToothMovement oe = over_engineer(m, cfg.over_engineering);
        for (Axis axis : kAllAxes) {
            const double v = oe[axis];
            weighted += std::abs(v) * cfg.eta.eta(type, axis, v);
            magnitude += std::abs(v);
        }
    }
    if (magnitude > 0.0) s.predictability = 100.0 * weighted / magnitude;
    return s;
}

TreatmentScore composite(const SubScores& sub, std::vector<Finding> findings) {
    const auto values = sub.as_array();
    for (double v : values) {
        if (!(v >= 0.0 && v <= 100.0)) throw std::invalid_argument("sub-scores must lie in [0, 100]");
    }
    int critical = 0;
    int warning = 0;
    for (const Finding& f : findings) {
        if (f.severity == Severity::Info) continue;
        if (!finding_codes::is_registered(f.code)) {
            throw std::invalid_argument("unregistered finding code '" + f.code + "'");
        }
        (f.severity == Severity::Critical ? critical : warning) += 1;
    }

    TreatmentScore score;
    score.sub = sub;
    double q = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) q += kCompositeWeights[i] * values[i];
    score.composite_raw = std::clamp(q, 0.0, 100.0);
    score.composite = score.composite_raw * std::pow(kCriticalPenalty, critical) * std::pow(kWarningPenalty, warning);
    score.grade = grade_for(score.composite);
    score.findings = std::move(findings);
    return score;
}

TreatmentScore score_plan(const MovementPlan& plan, const ArchState& arch,
                          const std::optional<CrowdingMetadata>& crowding, const ScoringConfig& cfg) {
    if (auto notes = validate_plan(plan, arch); !notes.empty()) {
        throw PlanValidationError(std::move(notes));
    }
    std::vector<Finding> findings = evaluate_principles(plan, arch, cfg);
    const StagingSummary staging = staging_summary_only(plan, cfg.staging);
    TreatmentScore score = composite(sub_scores(plan, arch, staging, crowding, cfg), std::move(findings));
    score.v1_score = v1_score(plan, cfg.over_engineering);
    return score;
}

}  // namespace orthoplan
