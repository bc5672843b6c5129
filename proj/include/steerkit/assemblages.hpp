#pragma once

// Bipartite states (maximally entangled, isotropic, Schmidt-rank-d) and the
// assemblages Alice's (lossy) measurements prepare for Bob, plus LHS-model
// assemblages for adversarial tests.

#include "steerkit/matcore.hpp"
#include "steerkit/measurements.hpp"
#include "steerkit/steering.hpp"

#include <nlohmann/json.hpp>

#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace steerkit {

struct BipartiteState {
    Eigen::Index dim = 0;  // local dimension, total space is dim^2
    std::optional<Ket> pure;
    std::optional<ComplexMatrix> density_rep;

    ComplexMatrix density() const {
        if (density_rep) return *density_rep;
        if (pure) return projector(*pure);
        throw std::logic_error("BipartiteState: empty representation");
    }
};

/// Conditional states sigma_{a|x} for Bob; click rows 0..d-1, optionally an
/// explicit no-click row at slot d.
struct Assemblage {
    Eigen::Index dim = 0;
    /// members[x] holds d click operators, plus one no-click operator when
    /// has_no_click_row is true.
    std::vector<std::vector<ComplexMatrix>> members;
    bool has_no_click_row = false;

    int n_settings() const { return static_cast<int>(members.size()); }

    /// Row sum for a setting; equal across settings for a valid assemblage.
    ComplexMatrix row_sum(int x) const {
        ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
        for (const auto& m : members.at(static_cast<std::size_t>(x))) total += m;
        return total;
    }

    ComplexMatrix reduced_state() const { return row_sum(0); }

    /// Max over settings of the operator-norm deviation of the row sums from
    /// the x = 0 row sum.
    double consistency_defect() const {
        const ComplexMatrix ref = row_sum(0);
        double worst = 0.0;
        for (int x = 1; x < n_settings(); ++x) {
            worst = std::max(worst, op_norm_hermitian(row_sum(x) - ref));
        }
        return worst;
    }
};

inline BipartiteState max_entangled(int d) {
    if (d < 2) throw std::invalid_argument("max_entangled: d must be >= 2");
    Ket psi = Ket::Zero(static_cast<Eigen::Index>(d) * d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i) psi(static_cast<Eigen::Index>(i) * d + i) = amp;
    BipartiteState state;
    state.dim = d;
    state.pure = psi;
    return state;
}

/// w-weighted mixture of the maximally entangled state with white noise.
inline BipartiteState isotropic(int d, double w) {
    if (w < 0.0 || w > 1.0) {
        throw std::invalid_argument("isotropic: w must lie in [0, 1]");
    }
    const BipartiteState phi = max_entangled(d);
    BipartiteState state;
    state.dim = d;
    state.density_rep = w * phi.density() +
                        (1.0 - w) / static_cast<double>(d * d) *
                            identity(static_cast<Eigen::Index>(d) * d);
    return state;
}

struct SchmidtState {
    BipartiteState state;
    /// Local filter D with |psi> = (D (x) 1)|phi+>.
    ComplexMatrix filter;
};

inline SchmidtState schmidt_state(const std::vector<double>& lambdas) {
    const int d = static_cast<int>(lambdas.size());
    if (d < 2) throw std::invalid_argument("schmidt_state: need at least 2 weights");
    double total = 0.0;
    for (double l : lambdas) {
        if (l <= 0.0) {
            throw std::invalid_argument(
                "schmidt_state: Schmidt coefficients must be strictly positive");
        }
        total += l;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("schmidt_state: weights must sum to 1");
    }
    Ket psi = Ket::Zero(static_cast<Eigen::Index>(d) * d);
    ComplexMatrix filter = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        psi(static_cast<Eigen::Index>(i) * d + i) =
            std::sqrt(lambdas[static_cast<std::size_t>(i)]);
        filter(i, i) = std::sqrt(d * lambdas[static_cast<std::size_t>(i)]);
    }
    SchmidtState out;
    out.state.dim = d;
    out.state.pure = psi;
    out.filter = filter;
    return out;
}

/// Lossless assemblage sigma_{a|x} = tr_A((Pi_{a|x} (x) 1) rho); click rows
/// only.
inline Assemblage assemble(const BipartiteState& state,
                           const MeasurementSet& set) {
    if (state.dim != set.dim) {
        throw std::invalid_argument("assemble: state/measurement dimension mismatch");
    }
    const ComplexMatrix rho = state.density();
    const Eigen::Index d = state.dim;
    Assemblage out;
    out.dim = d;
    for (int x = 0; x < set.n_settings(); ++x) {
        std::vector<ComplexMatrix> row;
        for (int a = 0; a < set.n_outcomes(); ++a) {
            row.push_back(partial_trace_A(
                kron(set.projector_for(x, a), identity(d)) * rho, d, d));
        }
        out.members.push_back(std::move(row));
    }
    return out;
}

/// Scale click rows by eta and add the no-click row (1-eta) sigma_R.
inline Assemblage apply_loss(const Assemblage& a, double eta) {
    if (eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("apply_loss: eta must lie in [0, 1]");
    }
    if (a.has_no_click_row) {
        throw std::invalid_argument("apply_loss: input must be lossless");
    }
    const ComplexMatrix sigma_r = a.reduced_state();
    Assemblage out;
    out.dim = a.dim;
    out.has_no_click_row = true;
    for (int x = 0; x < a.n_settings(); ++x) {
        std::vector<ComplexMatrix> row;
        for (const auto& m : a.members[static_cast<std::size_t>(x)]) {
            row.push_back(eta * m);
        }
        row.push_back((1.0 - eta) * sigma_r);
        out.members.push_back(std::move(row));
    }
    return out;
}

/// Direct construction of the assemblage from the isotropic state under
/// detection efficiency eta: clicks eta*w*Pi^T/d + eta(1-w) 1/d^2, no-click
/// (1-eta) 1/d. Equals apply_loss(assemble(isotropic(d, w), set), eta).
inline Assemblage noisy_lossy_assemblage(int d, const MeasurementSet& set,
                                         double eta, double w) {
    if (eta < 0.0 || eta > 1.0 || w < 0.0 || w > 1.0) {
        throw std::invalid_argument(
            "noisy_lossy_assemblage: eta and w must lie in [0, 1]");
    }
    if (set.dim != d) {
        throw std::invalid_argument("noisy_lossy_assemblage: dimension mismatch");
    }
    const double dd = static_cast<double>(d);
    Assemblage out;
    out.dim = d;
    out.has_no_click_row = true;
    for (int x = 0; x < set.n_settings(); ++x) {
        std::vector<ComplexMatrix> row;
        for (int a = 0; a < set.n_outcomes(); ++a) {
            row.push_back(eta * w / dd * transpose(set.projector_for(x, a)) +
                          eta * (1.0 - w) / (dd * dd) * identity(d));
        }
        row.push_back((1.0 - eta) / dd * identity(d));
        out.members.push_back(std::move(row));
    }
    return out;
}

/// LHS-model assemblage: convex mixture of deterministic strategies with
/// hidden states, sigma_{a|x} = sum_s p_s [a == s_x] rho_s. Always carries
/// the explicit no-click row.
inline Assemblage lhs_assemblage(
    const std::vector<double>& weights,
    const std::vector<DeterministicStrategy>& strategies,
    const std::vector<ComplexMatrix>& hidden_states) {
    if (weights.size() != strategies.size() ||
        weights.size() != hidden_states.size() || weights.empty()) {
        throw std::invalid_argument("lhs_assemblage: mismatched input lengths");
    }
    double total = 0.0;
    for (double p : weights) {
        if (p < 0.0) throw std::invalid_argument("lhs_assemblage: negative weight");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("lhs_assemblage: weights must sum to 1");
    }
    const Eigen::Index d = hidden_states[0].rows();
    const int n = static_cast<int>(strategies[0].assignments.size());
    for (const auto& rho : hidden_states) {
        if (rho.rows() != d || rho.cols() != d || !is_psd(rho) ||
            std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-9) {
            throw std::invalid_argument("lhs_assemblage: invalid hidden state");
        }
    }
    Assemblage out;
    out.dim = d;
    out.has_no_click_row = true;
    out.members.assign(
        static_cast<std::size_t>(n),
        std::vector<ComplexMatrix>(static_cast<std::size_t>(d) + 1,
                                   ComplexMatrix::Zero(d, d)));
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        if (static_cast<int>(strategies[s].assignments.size()) != n) {
            throw std::invalid_argument("lhs_assemblage: ragged strategy lengths");
        }
        for (int x = 0; x < n; ++x) {
            const int a = strategies[s].assignments[static_cast<std::size_t>(x)];
            const std::size_t slot = (a == NO_CLICK) ? static_cast<std::size_t>(d)
                                                     : static_cast<std::size_t>(a);
            out.members[static_cast<std::size_t>(x)][slot] +=
                weights[s] * hidden_states[s];
        }
    }
    return out;
}

/// Functional adapted to a Schmidt-rank-d state: click operators are the
/// normalized (D Pi D)^T with alpha recomputed as the primed overlap.
inline SteeringFunctional filtered_functional(const MeasurementSet& set,
                                              const std::vector<double>& lambdas) {
    if (set.n_settings() < 2) {
        throw std::invalid_argument(
            "filtered_functional: at least two settings required");
    }
    if (static_cast<Eigen::Index>(lambdas.size()) != set.dim) {
        throw std::invalid_argument(
            "filtered_functional: Schmidt rank must equal the dimension");
    }
    const ComplexMatrix filter = schmidt_state(lambdas).filter;
    SteeringFunctional f;
    f.dim = set.dim;
    for (int x = 0; x < set.n_settings(); ++x) {
        std::vector<ComplexMatrix> row;
        for (int a = 0; a < set.n_outcomes(); ++a) {
            ComplexMatrix primed =
                transpose(filter * set.projector_for(x, a) * filter);
            const double weight = primed.trace().real();
            if (weight <= 0.0) {
                throw std::invalid_argument(
                    "filtered_functional: filter annihilates a measurement "
                    "direction");
            }
            row.push_back(primed / weight);
        }
        f.click_ops.push_back(std::move(row));
    }
    f.alpha = f.max_overlap();
    return f;
}

inline nlohmann::json assemblage_to_json(const Assemblage& a) {
    nlohmann::json doc;
    doc["dim"] = a.dim;
    doc["n"] = a.n_settings();
    doc["has_no_click_row"] = a.has_no_click_row;
    nlohmann::json settings = nlohmann::json::array();
    for (const auto& row : a.members) {
        nlohmann::json ops = nlohmann::json::array();
        for (const auto& m : row) {
            nlohmann::json mat = nlohmann::json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                nlohmann::json mrow = nlohmann::json::array();
                for (Eigen::Index j = 0; j < m.cols(); ++j) {
                    mrow.push_back({m(i, j).real(), m(i, j).imag()});
                }
                mat.push_back(mrow);
            }
            ops.push_back(mat);
        }
        settings.push_back(ops);
    }
    doc["members"] = settings;
    return doc;
}

}  // namespace steerkit
