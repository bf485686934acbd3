#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace oracle {

Eigen3x3 jacobi_symmetric(std::array<std::array<double, 3>, 3> a) {
    std::array<std::array<double, 3>, 3> v{};
    for (int i = 0; i < 3; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if (off < 1e-30) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
    Eigen3x3 out;
    for (int i = 0; i < 3; ++i) {
        out.values[i] = a[order[i]][order[i]];
        for (int k = 0; k < 3; ++k) out.vectors[i][k] = v[k][order[i]];
    }
    return out;
}

std::array<std::array<double, 3>, 3> covariance(const std::vector<orthoplan::Vec3>& pts) {
    double mx = 0, my = 0, mz = 0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
        mz += p.z;
    }
    const double n = static_cast<double>(pts.size());
    mx /= n;
    my /= n;
    mz /= n;
    std::array<std::array<double, 3>, 3> c{};
    for (const auto& p : pts) {
        const double d[3] = {p.x - mx, p.y - my, p.z - mz};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c[i][j] += d[i] * d[j] / n;
    }
    return c;
}

std::size_t char_argmax(const std::vector<double>& raw, double presence) {
    const std::size_t null_col = raw.size() - 1;
    std::vector<double> gated(raw.size());
    for (std::size_t i = 0; i < null_col; ++i) gated[i] = raw[i] * presence;
    gated[null_col] = raw[null_col] * (1.0 - presence);

    std::size_t best = null_col;
    double best_value = gated[null_col];
    for (std::size_t i = 0; i < null_col; ++i) {
        // Strictly greater than the null and every earlier real point.
        bool wins = gated[i] > best_value;
        for (std::size_t j = 0; j < i && wins; ++j) wins = gated[i] > gated[j];
        if (wins) {
            best = i;
            best_value = gated[i];
        }
    }
    return best;
}

namespace {

enum Kind { kIncisor, kCanine, kPremolar, kMolar };

Kind kind_of(int fdi) {
    const int pos = fdi % 10;
    if (pos <= 2) return kIncisor;
    if (pos == 3) return kCanine;
    if (pos <= 5) return kPremolar;
    return kMolar;
}

// Horizontal and rotational limits per kind: tx, ty, rx, ry, rz.
constexpr double kLimitTable[4][5] = {
    {4.0, 2.5, 15.0, 10.0, 45.0},
    {3.5, 2.5, 12.0, 10.0, 40.0},
    {3.5, 3.0, 10.0, 10.0, 35.0},
    {2.0, 2.5, 8.0, 8.0, 20.0},
};
constexpr double kIntrusionLimit = 2.0;
constexpr double kExtrusionLimit = 1.5;

double limit_of(Kind k, int component, double value) {
    switch (component) {
        case 0: return kLimitTable[k][0];
        case 1: return kLimitTable[k][1];
        case 2: return value < 0 ? kExtrusionLimit : kIntrusionLimit;
        default: return kLimitTable[k][component - 1];
    }
}

double eta_of(Kind k, int component, double value) {
    if (component <= 1) return 0.85;
    if (component == 2) return value < 0 ? 0.42 : 0.69;
    if (component == 3) return 0.50;
    if (component == 4) return 0.75;
    return (k == kCanine || k == kPremolar) ? 0.45 : 0.55;
}

double len3(double a, double b, double c) { return std::sqrt(a * a + b * b + c * c); }

double gate(double tz, double t) {
    if (tz >= 0) return t;
    return t < 0.6 ? 0.0 : (t - 0.6) / 0.4;
}

}  // namespace

int aligners(const std::vector<PlanTooth>& plan) {
    double trans = 0.0;
    double rot = 0.0;
    for (const auto& p : plan) {
        trans = std::max(trans, len3(p.c[0], p.c[1], p.c[2]));
        rot = std::max(rot, len3(p.c[3], p.c[4], p.c[5]));
    }
    return std::max({static_cast<int>(std::ceil(trans / 0.25)), static_cast<int>(std::ceil(rot / 2.0)), 20});
}

ScoreResult score(const std::vector<PlanTooth>& plan, const std::vector<int>& present,
                  const std::optional<std::vector<double>>& contact_overlaps) {
    ScoreResult r;
    const double oe_factor = 1.3;

    // Findings.
    int moving_molars = 0;
    for (const auto& p : plan) {
        const Kind k = kind_of(p.fdi);
        std::array<double, 6> oe{};
        for (int i = 0; i < 6; ++i) oe[i] = oe_factor * p.c[i];
        if (oe[2] < 0) {
            r.warnings += 1;
            if (-oe[2] > 1.5) r.critical += 1;
        }
        for (int i = 0; i < 6; ++i) {
            if (i == 2 && oe[i] < 0) continue;
            if (std::abs(oe[i]) > limit_of(k, i, oe[i])) r.warnings += 1;
        }
        if (k == kMolar && len3(oe[0], oe[1], oe[2]) > 1.5) ++moving_molars;
    }
    if (moving_molars >= 3) r.warnings += 1;

    // Biomechanical.
    if (plan.empty()) {
        r.sub[0] = 100.0;
    } else {
        double acc = 0.0;
        for (const auto& p : plan) {
            for (int i = 0; i < 6; ++i) {
                const double v = oe_factor * p.c[i];
                acc += std::max(0.0, 1.0 - std::abs(v) / limit_of(kind_of(p.fdi), i, v));
            }
        }
        r.sub[0] = 100.0 * acc / (6.0 * static_cast<double>(plan.size()));
    }

    // Staging: stage s covers normalized time [s/A, (s+1)/A].
    const int a = aligners(plan);
    int ok = 0;
    for (int s = 0; s < a; ++s) {
        const double t0 = static_cast<double>(s) / a;
        const double t1 = static_cast<double>(s + 1) / a;
        double worst_d = 0.0;
        double worst_r = 0.0;
        for (const auto& p : plan) {
            const double dp = gate(p.c[2], t1) - gate(p.c[2], t0);
            worst_d = std::max(worst_d, len3(p.c[0], p.c[1], p.c[2]) * dp);
            worst_r = std::max(worst_r, len3(p.c[3], p.c[4], p.c[5]) * dp);
        }
        if (worst_d <= 0.25 + 1e-9 && worst_r <= 2.0 + 1e-9) ++ok;
    }
    r.sub[1] = 100.0 * ok / a;

    // Attachments.
    if (plan.empty()) {
        r.sub[2] = 100.0;
    } else {
        int need = 0;
        for (const auto& p : plan) {
            const Kind k = kind_of(p.fdi);
            const double rz = oe_factor * p.c[5];
            const double tz = oe_factor * p.c[2];
            if (((k == kCanine || k == kPremolar) && std::abs(rz) > 15.0) || tz < -0.5) ++need;
        }
        r.sub[2] = 100.0 - 100.0 * need / static_cast<double>(plan.size());
    }

    // IPR.
    r.sub[3] = 100.0;
    if (contact_overlaps) {
        double required = 0.0;
        for (double o : *contact_overlaps) required += std::max(0.0, o);
        if (required > 0.0) {
            r.sub[3] = 100.0 * std::min(1.0, 0.5 * static_cast<double>(contact_overlaps->size()) / required);
        }
    }

    // Occlusion: left/right pairs by position, both sides present.
    const std::set<int> have(present.begin(), present.end());
    auto planned_norm = [&](int fdi) {
        for (const auto& p : plan) {
            if (p.fdi == fdi) return len3(p.c[0], p.c[1], p.c[2]);
        }
        return 0.0;
    };
    const bool upper = !present.empty() && present.front() / 10 <= 2;
    double asym = 0.0;
    int pairs = 0;
    for (int pos = 1; pos <= 8; ++pos) {
        const int right = (upper ? 10 : 40) + pos;
        const int left = (upper ? 20 : 30) + pos;
        if (!have.count(right) || !have.count(left)) continue;
        asym += std::abs(planned_norm(right) - planned_norm(left));
        ++pairs;
    }
    r.sub[4] = pairs == 0 ? 100.0 : 100.0 * std::clamp(1.0 - (asym / pairs) / 2.0, 0.0, 1.0);

    // Predictability.
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : plan) {
        for (int i = 0; i < 6; ++i) {
            const double v = oe_factor * p.c[i];
            num += std::abs(v) * eta_of(kind_of(p.fdi), i, v);
            den += std::abs(v);
        }
    }
    r.sub[5] = den > 0.0 ? 100.0 * num / den : 100.0;

    const double w[6] = {0.30, 0.20, 0.15, 0.10, 0.10, 0.15};
    double q = 0.0;
    for (int i = 0; i < 6; ++i) q += w[i] * r.sub[i];
    r.raw = std::clamp(q, 0.0, 100.0);
    r.final_score = r.raw;
    for (int i = 0; i < r.critical; ++i) r.final_score *= 0.85;
    for (int i = 0; i < r.warnings; ++i) r.final_score *= 0.97;
    return r;
}

}  // namespace oracle
