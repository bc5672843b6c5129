#pragma once

// Violation evaluation, critical detection-efficiency and white-noise
// thresholds, normalized violations, asymptotic scaling checks and region
// scans, plus the CSV/JSON emitters behind the CLI.

#include "steerkit/assemblages.hpp"
#include "steerkit/matcore.hpp"
#include "steerkit/steering.hpp"

#include <nlohmann/json.hpp>

#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace steerkit {

/// "violated" requires beta > bound + this margin (the thresholds are strict
/// inequalities).
inline constexpr double VIOLATION_MARGIN = 1e-12;

struct ViolationReport {
    double beta = 0.0;
    double lhs_analytic = 0.0;  // the bound the verdict was taken against
    std::optional<double> lhs_exact;
    bool violated = false;
    double normalized_violation = 0.0;
};

struct ThresholdReport {
    int n = 0;
    int d = 0;
    double cos_theta = 0.0;
    std::optional<double> eta_critical;  // empty when unattainable
    std::optional<double> w_critical;
};

inline double normalized_violation(double beta, double lhs) {
    if (lhs <= 0.0) {
        throw std::invalid_argument("normalized_violation: bound must be positive");
    }
    return std::abs(beta) / std::abs(lhs);
}

/// beta = sum_{a,x} tr(F_{a|x} sigma_{a|x}) with the no-click row paired
/// against alpha * identity.
inline ViolationReport violation(const SteeringFunctional& f,
                                 const Assemblage& a, double bound) {
    if (f.dim != a.dim || f.n_settings() != a.n_settings()) {
        throw std::invalid_argument("violation: functional/assemblage mismatch");
    }
    Complex beta(0.0, 0.0);
    for (int x = 0; x < f.n_settings(); ++x) {
        const auto& row = a.members[static_cast<std::size_t>(x)];
        for (int outcome = 0; outcome < f.n_outcomes(); ++outcome) {
            beta += (f.click_ops[static_cast<std::size_t>(x)]
                               [static_cast<std::size_t>(outcome)] *
                     row[static_cast<std::size_t>(outcome)])
                        .trace();
        }
        if (a.has_no_click_row) {
            beta += f.alpha * row[static_cast<std::size_t>(f.dim)].trace();
        }
    }
    if (std::abs(beta.imag()) > 1e-10) {
        throw std::runtime_error("violation: non-real functional value");
    }
    ViolationReport report;
    report.beta = beta.real();
    report.lhs_analytic = bound;
    report.violated = report.beta > bound + VIOLATION_MARGIN;
    report.normalized_violation = normalized_violation(report.beta, bound);
    return report;
}

/// Closed-form quantum value n(eta + (1-eta)cos(theta)) on the maximally
/// entangled state.
inline double quantum_beta(int n, double cos_theta, double eta) {
    if (n < 2 || cos_theta < 0.0 || cos_theta > 1.0 || eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("quantum_beta: parameter out of range");
    }
    return n * (eta + (1.0 - eta) * cos_theta);
}

/// Closed-form quantum value on the isotropic state with noise w.
inline double quantum_beta_isotropic(int n, int d, double cos_theta, double eta,
                                     double w) {
    const double dd = static_cast<double>(d);
    return n * (eta * w + eta * (1.0 - w) / dd + (1.0 - eta) * cos_theta);
}

/// Critical detection efficiency for the isotropic state; empty when no
/// eta <= 1 can demonstrate steering.
inline std::optional<double> critical_eta(int n, int d, double cos_theta,
                                          double w) {
    if (cos_theta >= 1.0) {
        throw std::invalid_argument("critical_eta: cos_theta must be < 1");
    }
    const double denom =
        (1.0 - cos_theta) - (1.0 - w) * (1.0 - 1.0 / static_cast<double>(d));
    if (denom <= 0.0) return std::nullopt;
    const double eta = (1.0 - cos_theta) / (n * denom);
    if (eta > 1.0) return std::nullopt;
    return eta;
}

/// Critical white-noise level w_c at fixed eta; empty when unattainable.
inline std::optional<double> critical_w(int n, int d, double cos_theta,
                                        double eta) {
    if (eta <= 0.0 || eta > 1.0) {
        throw std::invalid_argument("critical_w: eta must lie in (0, 1]");
    }
    if (cos_theta >= 1.0) {
        throw std::invalid_argument("critical_w: cos_theta must be < 1");
    }
    const double w = 1.0 - (1.0 - 1.0 / (n * eta)) * (1.0 - cos_theta) /
                               (1.0 - 1.0 / static_cast<double>(d));
    if (w < 0.0 || w > 1.0) return std::nullopt;
    return w;
}

enum class FixedKind { Eta, W };

struct AsymptoticRow {
    int d = 0;
    int n = 0;
    double cos_theta = 0.0;
    double exact = 0.0;      // exact threshold from the closed form
    double predictor = 0.0;  // leading asymptotic term(s)
    double residual = 0.0;
    double scaled_residual = 0.0;  // residual * d^{3/2}
    double normalized_violation = 0.0;
};

/// For the MUB family (n = d+1, cos(theta) = 1/sqrt(d)): exact thresholds vs
/// their large-d expansions, with residuals scaled by d^{3/2}.
inline std::vector<AsymptoticRow> asymptotic_checks(
    const std::vector<int>& prime_dims, FixedKind kind, double value) {
    std::vector<AsymptoticRow> rows;
    for (int d : prime_dims) {
        if (!is_prime(d)) {
            throw std::invalid_argument("asymptotic_checks: dimensions must be prime");
        }
        AsymptoticRow row;
        row.d = d;
        row.n = d + 1;
        row.cos_theta = 1.0 / std::sqrt(static_cast<double>(d));
        if (kind == FixedKind::W) {
            const auto eta_c = critical_eta(row.n, d, row.cos_theta, value);
            row.exact = eta_c.value_or(std::numeric_limits<double>::quiet_NaN());
            row.predictor = 1.0 / (value * d);
            row.normalized_violation = normalized_violation(
                quantum_beta(row.n, row.cos_theta, 1.0),
                analytic_lhs_bound(row.n, row.cos_theta));
        } else {
            const auto w_c = critical_w(row.n, d, row.cos_theta, value);
            row.exact = w_c.value_or(std::numeric_limits<double>::quiet_NaN());
            row.predictor = 1.0 / std::sqrt(static_cast<double>(d)) +
                            (1.0 - value) / (value * d);
            row.normalized_violation = normalized_violation(
                quantum_beta(row.n, row.cos_theta, value),
                analytic_lhs_bound(row.n, row.cos_theta));
        }
        row.residual = row.exact - row.predictor;
        row.scaled_residual = row.residual * std::pow(static_cast<double>(d), 1.5);
        rows.push_back(row);
    }
    return rows;
}

struct ScanPoint {
    int d = 0;
    int n = 0;
    double eta = 0.0;
    double w = 0.0;
    double beta = 0.0;
    double bound = 0.0;
    bool violated = false;
    double normalized_violation = 0.0;
};

/// Evaluate the isotropic closed forms on an (eta, w) grid; row order is
/// eta-major then w, independent of execution order.
inline std::vector<ScanPoint> scan_region(int d, int n, double cos_theta,
                                          const std::vector<double>& eta_grid,
                                          const std::vector<double>& w_grid) {
    std::vector<ScanPoint> points;
    points.reserve(eta_grid.size() * w_grid.size());
    const double bound = analytic_lhs_bound(n, cos_theta);
    for (double eta : eta_grid) {
        for (double w : w_grid) {
            if (eta < 0.0 || eta > 1.0 || w < 0.0 || w > 1.0) {
                throw std::invalid_argument("scan_region: grid values outside [0, 1]");
            }
            ScanPoint p;
            p.d = d;
            p.n = n;
            p.eta = eta;
            p.w = w;
            p.beta = quantum_beta_isotropic(n, d, cos_theta, eta, w);
            p.bound = bound;
            p.violated = p.beta > bound + VIOLATION_MARGIN;
            p.normalized_violation = normalized_violation(p.beta, bound);
            points.push_back(p);
        }
    }
    return points;
}

inline std::string format_sig(double v, int digits = 12) {
    std::ostringstream out;
    out << std::setprecision(digits) << v;
    return out.str();
}

inline void write_scan_csv(const std::vector<ScanPoint>& points,
                           std::ostream& out) {
    out << "d,n,eta,w,beta,bound,violated,V\n";
    for (const auto& p : points) {
        out << p.d << ',' << p.n << ',' << format_sig(p.eta) << ','
            << format_sig(p.w) << ',' << format_sig(p.beta) << ','
            << format_sig(p.bound) << ',' << (p.violated ? 1 : 0) << ','
            << format_sig(p.normalized_violation) << '\n';
    }
}

inline nlohmann::json scan_to_json(const std::vector<ScanPoint>& points) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : points) {
        rows.push_back({{"d", p.d},
                        {"n", p.n},
                        {"eta", p.eta},
                        {"w", p.w},
                        {"beta", p.beta},
                        {"bound", p.bound},
                        {"violated", p.violated},
                        {"V", p.normalized_violation}});
    }
    return rows;
}

}  // namespace steerkit
