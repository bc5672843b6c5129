#pragma once

// Loss-tolerant linear steering functionals, their analytic LHS bound
// 1 + (n-1)cos(theta), and the exact LHS bound obtained by enumerating all
// (d+1)^n deterministic strategies and maximizing the operator norm of the
// per-strategy operator G.

#include "steerkit/matcore.hpp"
#include "steerkit/measurements.hpp"

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace steerkit {

struct SteeringFunctional {
    Eigen::Index dim = 0;
    /// Click operators indexed [setting][outcome]; rank-1 projectors.
    std::vector<std::vector<ComplexMatrix>> click_ops;
    /// Coefficient of the no-click operator alpha * identity.
    double alpha = 0.0;

    int n_settings() const { return static_cast<int>(click_ops.size()); }
    /// Click outcomes per setting; equals dim for functionals built from
    /// complete bases, but hand-built functionals may use fewer.
    int n_outcomes() const {
        return click_ops.empty() ? 0 : static_cast<int>(click_ops.front().size());
    }

    /// Maximal overlap sqrt(tr(Pi Pi')) between click operators of distinct
    /// settings.
    double max_overlap() const {
        if (n_settings() < 2) {
            throw std::invalid_argument(
                "SteeringFunctional::max_overlap: fewer than two settings");
        }
        double best = 0.0;
        for (std::size_t x = 0; x < click_ops.size(); ++x) {
            for (std::size_t y = x + 1; y < click_ops.size(); ++y) {
                for (const auto& p : click_ops[x]) {
                    for (const auto& q : click_ops[y]) {
                        const double t = std::abs((p * q).trace());
                        best = std::max(best, std::sqrt(t));
                    }
                }
            }
        }
        return std::min(best, 1.0);
    }
};

/// One outcome (possibly NO_CLICK) assigned to each setting.
struct DeterministicStrategy {
    std::vector<int> assignments;

    int no_click_count() const {
        int k = 0;
        for (int a : assignments) {
            if (a == NO_CLICK) ++k;
        }
        return k;
    }
};

struct LhsBoundReport {
    double analytic_bound = 0.0;
    double exact_bound = 0.0;
    DeterministicStrategy argmax_strategy;
    /// Max operator norm within the class of strategies with k no-clicks.
    std::map<int, double> per_class_max;
};

inline double rank1_projector_defect(const ComplexMatrix& p) {
    const double idem = (p * p - p).cwiseAbs().maxCoeff();
    const double tr = std::abs(p.trace() - Complex(1.0, 0.0));
    return std::max({idem, tr, hermiticity_defect(p)});
}

/// Eq.-style functional from a measurement set: clicks get the projectors
/// (or their computational-basis transposes), no-click gets alpha*identity.
/// alpha defaults to the set's maximal overlap cos(theta).
inline SteeringFunctional build_functional(const MeasurementSet& set,
                                           std::optional<double> alpha = {},
                                           bool use_transpose = false) {
    if (set.n_settings() < 2) {
        throw std::invalid_argument(
            "build_functional: at least two settings required");
    }
    const double cos_theta = max_overlap(set);
    const double a = alpha.value_or(cos_theta);
    if (a < 0.0 || a > 1.0) {
        throw std::invalid_argument("build_functional: alpha must lie in [0, 1]");
    }
    if (cos_theta >= 1.0 - 1e-12) {
        std::cerr << "warning: measurement set has cos(theta) = 1; the "
                     "resulting inequality is trivial (bound n) and can never "
                     "be violated\n";
    }
    SteeringFunctional f;
    f.dim = set.dim;
    f.alpha = a;
    for (int x = 0; x < set.n_settings(); ++x) {
        std::vector<ComplexMatrix> row;
        for (int outcome = 0; outcome < set.n_outcomes(); ++outcome) {
            ComplexMatrix p = set.projector_for(x, outcome);
            if (use_transpose) p = transpose(p);
            row.push_back(std::move(p));
        }
        f.click_ops.push_back(std::move(row));
    }
    return f;
}

/// Closed-form LHS bound 1 + (n-1) cos(theta).
inline double analytic_lhs_bound(int n, double cos_theta) {
    if (n < 2) throw std::invalid_argument("analytic_lhs_bound: n must be >= 2");
    if (cos_theta < 0.0 || cos_theta > 1.0) {
        throw std::invalid_argument("analytic_lhs_bound: cos_theta outside [0, 1]");
    }
    return 1.0 + (n - 1) * cos_theta;
}

/// G = sum over settings of the click operator picked by the strategy, with
/// alpha*identity for no-click slots.
inline ComplexMatrix strategy_operator(const SteeringFunctional& f,
                                       const DeterministicStrategy& s) {
    if (static_cast<int>(s.assignments.size()) != f.n_settings()) {
        throw std::invalid_argument("strategy_operator: strategy length mismatch");
    }
    ComplexMatrix g = ComplexMatrix::Zero(f.dim, f.dim);
    for (int x = 0; x < f.n_settings(); ++x) {
        const int a = s.assignments[static_cast<std::size_t>(x)];
        if (a == NO_CLICK) {
            g += f.alpha * identity(f.dim);
        } else if (a >= 0 && a < f.n_outcomes()) {
            g += f.click_ops[static_cast<std::size_t>(x)]
                           [static_cast<std::size_t>(a)];
        } else {
            throw std::invalid_argument("strategy_operator: invalid outcome label");
        }
    }
    return g;
}

namespace detail {

/// Strategies are enumerated in lexicographic order over the outcome alphabet
/// (0, ..., d-1, no-click): strategy index i in base (d+1), most significant
/// digit first, with digit d meaning no-click.
inline DeterministicStrategy strategy_from_index(std::uint64_t index, int n,
                                                 int d) {
    DeterministicStrategy s;
    s.assignments.assign(static_cast<std::size_t>(n), 0);
    for (int x = n - 1; x >= 0; --x) {
        const int digit = static_cast<int>(index % static_cast<std::uint64_t>(d + 1));
        s.assignments[static_cast<std::size_t>(x)] = (digit == d) ? NO_CLICK : digit;
        index /= static_cast<std::uint64_t>(d + 1);
    }
    return s;
}

struct ChunkResult {
    double max_norm = -1.0;
    std::uint64_t argmax_index = 0;
    std::map<int, double> per_class_max;
};

inline ChunkResult scan_strategies(const SteeringFunctional& f,
                                   std::uint64_t begin, std::uint64_t end) {
    const int n = f.n_settings();
    const int d = f.n_outcomes();
    ChunkResult result;
    for (std::uint64_t i = begin; i < end; ++i) {
        const DeterministicStrategy s = strategy_from_index(i, n, d);
        const double norm = op_norm_hermitian(strategy_operator(f, s));
        const int k = s.no_click_count();
        auto [it, inserted] = result.per_class_max.try_emplace(k, norm);
        if (!inserted && norm > it->second) it->second = norm;
        if (norm > result.max_norm) {
            result.max_norm = norm;
            result.argmax_index = i;
        }
    }
    return result;
}

inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("STEERKIT_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) {
            hw = static_cast<unsigned>(cap);
        }
    }
    return hw;
}

}  // namespace detail

inline constexpr std::uint64_t DEFAULT_ENUMERATION_GUARD = 10'000'000;

/// Exact LHS bound by full strategy enumeration: max over all (d+1)^n
/// deterministic strategies of the operator norm of G. Ties in the max are
/// broken by the lexicographically first strategy.
inline LhsBoundReport exact_lhs_bound(
    const SteeringFunctional& f,
    std::uint64_t guard = DEFAULT_ENUMERATION_GUARD) {
    const int n = f.n_settings();
    const int d = f.n_outcomes();
    std::uint64_t total = 1;
    for (int x = 0; x < n; ++x) {
        total *= static_cast<std::uint64_t>(d + 1);
        if (total > guard) {
            throw std::runtime_error(
                "exact_lhs_bound: enumeration guard exceeded; needs at least " +
                std::to_string(total) + " strategies (guard " +
                std::to_string(guard) + ")");
        }
    }

    const unsigned workers =
        total < 4096 ? 1u
                     : std::min<std::uint64_t>(detail::worker_count(), total);
    std::vector<detail::ChunkResult> chunks(workers);
    if (workers == 1) {
        chunks[0] = detail::scan_strategies(f, 0, total);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t step = (total + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t begin = w * step;
            const std::uint64_t end = std::min(total, begin + step);
            pool.emplace_back([&f, &chunks, w, begin, end] {
                chunks[w] = detail::scan_strategies(f, begin, end);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Reduction: prefer the larger max, then the smaller strategy index.
    // Chunks are in index order, so keeping the first winner on ties is
    // equivalent to lexicographic-first.
    LhsBoundReport report;
    double best = -1.0;
    std::uint64_t best_index = 0;
    for (const auto& chunk : chunks) {
        for (const auto& [k, v] : chunk.per_class_max) {
            auto [it, inserted] = report.per_class_max.try_emplace(k, v);
            if (!inserted && v > it->second) it->second = v;
        }
        if (chunk.max_norm > best) {
            best = chunk.max_norm;
            best_index = chunk.argmax_index;
        }
    }
    report.exact_bound = best;
    report.argmax_strategy = detail::strategy_from_index(best_index, n, d);
    report.analytic_bound = analytic_lhs_bound(n, f.max_overlap());
    return report;
}

/// Per-class upper bound on the operator norm of G for strategies with k
/// no-click slots: n*alpha for the all-no-click class, otherwise
/// k*alpha + 1 + (n-k-1)*cos(theta).
inline double class_bound(int k, int n, double alpha, double cos_theta) {
    if (k < 0 || k > n) throw std::invalid_argument("class_bound: k out of range");
    if (k == n) return n * alpha;
    return k * alpha + 1.0 + (n - k - 1) * cos_theta;
}

struct NormLemmaResult {
    double lhs = 0.0;    // exact operator norm of the projector sum
    double bound = 0.0;  // 1 + (l-1) * max pairwise overlap
};

/// Exact norm of a sum of rank-1 projectors vs the pairwise-overlap bound
/// 1 + (l-1)cos(phi); callers assert lhs <= bound + tolerance.
inline NormLemmaResult projector_sum_norm_check(
    const std::vector<ComplexMatrix>& projectors) {
    if (projectors.empty()) {
        throw std::invalid_argument("projector_sum_norm_check: empty input");
    }
    for (const auto& p : projectors) {
        if (rank1_projector_defect(p) > 1e-9) {
            throw std::invalid_argument(
                "projector_sum_norm_check: input is not a rank-1 projector");
        }
    }
    ComplexMatrix sum =
        ComplexMatrix::Zero(projectors[0].rows(), projectors[0].cols());
    for (const auto& p : projectors) sum += p;
    double cos_phi = 0.0;
    for (std::size_t i = 0; i < projectors.size(); ++i) {
        for (std::size_t j = i + 1; j < projectors.size(); ++j) {
            const double t = std::abs((projectors[i] * projectors[j]).trace());
            cos_phi = std::max(cos_phi, std::sqrt(t));
        }
    }
    NormLemmaResult result;
    result.lhs = op_norm_hermitian(sum);
    result.bound =
        1.0 + (static_cast<double>(projectors.size()) - 1.0) * std::min(cos_phi, 1.0);
    return result;
}

}  // namespace steerkit
