#pragma once

// Alice's measurement sets: orthonormal bases, mutually unbiased bases in
// prime dimension, inefficient (lossy) POVMs and the parent POVM that
// certifies joint measurability at eta <= 1/n.

#include "steerkit/matcore.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace steerkit {

/// Outcome label for a no-click event; click outcomes are 0..d-1.
inline constexpr int NO_CLICK = -1;

struct Basis {
    Eigen::Index dim = 0;
    std::vector<Ket> vectors;

    double orthonormality_defect() const {
        double worst = 0.0;
        for (std::size_t a = 0; a < vectors.size(); ++a) {
            for (std::size_t b = 0; b < vectors.size(); ++b) {
                const Complex g = vectors[a].dot(vectors[b]);
                const double target = (a == b) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(g - target));
            }
        }
        return worst;
    }

    bool is_orthonormal(double tol = 1e-9) const {
        return static_cast<Eigen::Index>(vectors.size()) == dim &&
               orthonormality_defect() <= tol;
    }

    ComplexMatrix projector_for(int outcome) const {
        return projector(vectors.at(static_cast<std::size_t>(outcome)));
    }
};

struct MeasurementSet {
    Eigen::Index dim = 0;
    std::vector<Basis> bases;

    int n_settings() const { return static_cast<int>(bases.size()); }
    int n_outcomes() const { return static_cast<int>(dim); }

    const ComplexMatrix projector_for(int setting, int outcome) const {
        return bases.at(static_cast<std::size_t>(setting)).projector_for(outcome);
    }
};

struct LossyPovm {
    double eta = 1.0;
    MeasurementSet base;

    /// POVM elements for one setting, click outcomes first, no-click last.
    std::vector<ComplexMatrix> elements(int setting) const {
        std::vector<ComplexMatrix> out;
        out.reserve(static_cast<std::size_t>(base.dim) + 1);
        for (int a = 0; a < base.n_outcomes(); ++a) {
            out.push_back(eta * base.projector_for(setting, a));
        }
        out.push_back((1.0 - eta) * identity(base.dim));
        return out;
    }
};

/// Parent POVM indexed by outcome strings over {0..d-1, NO_CLICK}^n.
/// Only nonzero elements are stored.
struct ParentPovm {
    Eigen::Index dim = 0;
    int n = 0;
    std::map<std::vector<int>, ComplexMatrix> elements;

    ComplexMatrix sum() const {
        ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
        for (const auto& [label, m] : elements) total += m;
        return total;
    }
};

inline bool is_prime(long n) {
    if (n < 2) return false;
    for (long p = 2; p * p <= n; ++p) {
        if (n % p == 0) return false;
    }
    return true;
}

/// d+1 mutually unbiased bases in prime dimension d: the computational basis
/// followed by the d quadratic-phase Fourier bases (for d = 2, the eigenbases
/// of Pauli Z, X, Y in that order).
inline MeasurementSet mub_prime(int d) {
    if (!is_prime(d)) {
        throw std::invalid_argument("mub_prime: dimension " + std::to_string(d) +
                                    " is not prime");
    }
    MeasurementSet set;
    set.dim = d;

    Basis computational;
    computational.dim = d;
    for (int a = 0; a < d; ++a) {
        Ket v = Ket::Zero(d);
        v(a) = 1.0;
        computational.vectors.push_back(v);
    }
    set.bases.push_back(computational);

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    if (d == 2) {
        // X then Y eigenbases.
        for (const Complex phase : {Complex(1, 0), Complex(0, 1)}) {
            Basis b;
            b.dim = 2;
            for (const double sign : {1.0, -1.0}) {
                Ket v(2);
                v << inv_sqrt_d, sign * phase * inv_sqrt_d;
                b.vectors.push_back(v);
            }
            set.bases.push_back(b);
        }
        return set;
    }

    const double two_pi_over_d = 2.0 * std::numbers::pi / d;
    for (int b = 0; b < d; ++b) {
        Basis basis;
        basis.dim = d;
        for (int a = 0; a < d; ++a) {
            Ket v(d);
            for (int k = 0; k < d; ++k) {
                const long exponent =
                    (static_cast<long>(b) * k * k + static_cast<long>(a) * k) % d;
                v(k) = std::polar(inv_sqrt_d, two_pi_over_d * exponent);
            }
            basis.vectors.push_back(v);
        }
        set.bases.push_back(basis);
    }
    return set;
}

/// True iff all bases are orthonormal and every cross-basis overlap-squared
/// is within tol of 1/d.
inline bool verify_mub(const MeasurementSet& set, double tol) {
    const double target = 1.0 / static_cast<double>(set.dim);
    for (const auto& basis : set.bases) {
        if (!basis.is_orthonormal(tol)) return false;
    }
    for (std::size_t x = 0; x < set.bases.size(); ++x) {
        for (std::size_t y = x + 1; y < set.bases.size(); ++y) {
            for (const auto& u : set.bases[x].vectors) {
                for (const auto& v : set.bases[y].vectors) {
                    const double overlap_sq = std::norm(u.dot(v));
                    if (std::abs(overlap_sq - target) > tol) return false;
                }
            }
        }
    }
    return true;
}

/// Maximal overlap cos(theta) = max |<e_a^x|e_a'^x'>| over distinct settings.
inline double max_overlap(const MeasurementSet& set) {
    if (set.n_settings() < 2) {
        throw std::invalid_argument(
            "max_overlap: undefined for fewer than two settings");
    }
    double best = 0.0;
    for (std::size_t x = 0; x < set.bases.size(); ++x) {
        for (std::size_t y = x + 1; y < set.bases.size(); ++y) {
            for (const auto& u : set.bases[x].vectors) {
                for (const auto& v : set.bases[y].vectors) {
                    best = std::max(best, std::abs(u.dot(v)));
                }
            }
        }
    }
    return std::min(best, 1.0);
}

inline LossyPovm lossy_povm(const MeasurementSet& set, double eta) {
    if (eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("lossy_povm: eta must lie in [0, 1]");
    }
    return LossyPovm{eta, set};
}

/// Parent POVM at eta = 1/n: the nonzero elements assign a real outcome to
/// exactly one setting and no-click to every other.
inline ParentPovm parent_povm(const MeasurementSet& set) {
    if (set.n_settings() < 1) {
        throw std::invalid_argument("parent_povm: empty measurement set");
    }
    ParentPovm parent;
    parent.dim = set.dim;
    parent.n = set.n_settings();
    const double weight = 1.0 / parent.n;
    for (int x = 0; x < parent.n; ++x) {
        for (int a = 0; a < set.n_outcomes(); ++a) {
            std::vector<int> label(static_cast<std::size_t>(parent.n), NO_CLICK);
            label[static_cast<std::size_t>(x)] = a;
            parent.elements[label] = weight * set.projector_for(x, a);
        }
    }
    return parent;
}

/// Parent POVM for inefficient measurements at any eta <= 1/n: single-click
/// strings carry eta * Pi, the all-no-click string absorbs (1 - n*eta).
inline ParentPovm parent_povm_at(const MeasurementSet& set, double eta) {
    const int n = set.n_settings();
    if (n < 1) throw std::invalid_argument("parent_povm_at: empty measurement set");
    if (eta < 0.0 || eta > 1.0 / n + 1e-15) {
        throw std::invalid_argument(
            "parent_povm_at: eta must lie in [0, 1/n]");
    }
    ParentPovm parent;
    parent.dim = set.dim;
    parent.n = n;
    for (int x = 0; x < n; ++x) {
        for (int a = 0; a < set.n_outcomes(); ++a) {
            std::vector<int> label(static_cast<std::size_t>(n), NO_CLICK);
            label[static_cast<std::size_t>(x)] = a;
            parent.elements[label] = eta * set.projector_for(x, a);
        }
    }
    const double leftover = 1.0 - n * eta;
    if (leftover > 1e-15) {
        parent.elements[std::vector<int>(static_cast<std::size_t>(n), NO_CLICK)] =
            leftover * identity(set.dim);
    }
    return parent;
}

/// Coarse-grain the parent POVM onto setting x; returns d+1 elements ordered
/// clicks first, no-click last.
inline std::vector<ComplexMatrix> marginalize(const ParentPovm& parent, int x) {
    if (x < 0 || x >= parent.n) {
        throw std::out_of_range("marginalize: setting index out of range");
    }
    const int d = static_cast<int>(parent.dim);
    std::vector<ComplexMatrix> out(static_cast<std::size_t>(d) + 1,
                                   ComplexMatrix::Zero(parent.dim, parent.dim));
    for (const auto& [label, m] : parent.elements) {
        const int a = label[static_cast<std::size_t>(x)];
        const std::size_t slot =
            (a == NO_CLICK) ? static_cast<std::size_t>(d)
                            : static_cast<std::size_t>(a);
        out[slot] += m;
    }
    return out;
}

/// Haar-like random orthonormal basis from a seeded complex Gaussian matrix.
inline Basis random_basis(int d, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("random_basis: dimension must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            g(i, j) = Complex(gauss(rng), gauss(rng));
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix column phases so the basis is a deterministic function of the seed.
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex rjj = r(j, j);
        if (std::abs(rjj) > 0) q.col(j) *= rjj / std::abs(rjj);
    }
    Basis basis;
    basis.dim = d;
    for (Eigen::Index j = 0; j < d; ++j) basis.vectors.push_back(q.col(j));
    return basis;
}

/// Drop later settings sharing a measurement direction with an earlier one,
/// until max_overlap < 1. Keeps earlier settings.
inline MeasurementSet drop_shared_direction_settings(const MeasurementSet& set,
                                                     double tol = 1e-9) {
    MeasurementSet kept;
    kept.dim = set.dim;
    for (const auto& candidate : set.bases) {
        bool shares = false;
        for (const auto& existing : kept.bases) {
            for (const auto& u : existing.vectors) {
                for (const auto& v : candidate.vectors) {
                    if (std::abs(u.dot(v)) >= 1.0 - tol) shares = true;
                }
            }
        }
        if (!shares) kept.bases.push_back(candidate);
    }
    return kept;
}

inline nlohmann::json bases_to_json(const MeasurementSet& set) {
    nlohmann::json doc;
    doc["dim"] = set.dim;
    doc["n"] = set.n_settings();
    nlohmann::json bases = nlohmann::json::array();
    for (const auto& basis : set.bases) {
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& v : basis.vectors) {
            nlohmann::json amps = nlohmann::json::array();
            for (Eigen::Index k = 0; k < v.size(); ++k) {
                amps.push_back({v(k).real(), v(k).imag()});
            }
            vectors.push_back(amps);
        }
        bases.push_back(vectors);
    }
    doc["bases"] = bases;
    return doc;
}

inline void save_bases(const MeasurementSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_bases: cannot open " + path);
    out << bases_to_json(set).dump(2) << "\n";
}

inline MeasurementSet bases_from_json(const nlohmann::json& doc) {
    MeasurementSet set;
    set.dim = doc.at("dim").get<Eigen::Index>();
    const int n = doc.at("n").get<int>();
    const auto& bases = doc.at("bases");
    if (static_cast<int>(bases.size()) != n) {
        throw std::runtime_error("basis file: 'n' does not match number of bases");
    }
    for (std::size_t x = 0; x < bases.size(); ++x) {
        Basis basis;
        basis.dim = set.dim;
        const auto& vectors = bases[x];
        if (static_cast<Eigen::Index>(vectors.size()) != set.dim) {
            throw std::runtime_error("basis file: basis " + std::to_string(x) +
                                     " has wrong number of vectors");
        }
        for (std::size_t a = 0; a < vectors.size(); ++a) {
            const auto& amps = vectors[a];
            if (static_cast<Eigen::Index>(amps.size()) != set.dim) {
                throw std::runtime_error("basis file: vector " + std::to_string(a) +
                                         " of basis " + std::to_string(x) +
                                         " has wrong dimension");
            }
            Ket v(set.dim);
            for (Eigen::Index k = 0; k < set.dim; ++k) {
                v(k) = Complex(amps[static_cast<std::size_t>(k)][0],
                               amps[static_cast<std::size_t>(k)][1]);
            }
            if (std::abs(v.norm() - 1.0) > 1e-8) {
                throw std::runtime_error("basis file: vector " + std::to_string(a) +
                                         " of basis " + std::to_string(x) +
                                         " is not normalized");
            }
            basis.vectors.push_back(v);
        }
        if (!basis.is_orthonormal(1e-8)) {
            throw std::runtime_error("basis file: basis " + std::to_string(x) +
                                     " is not orthonormal");
        }
        set.bases.push_back(basis);
    }
    return set;
}

inline MeasurementSet load_bases(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_bases: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_bases: parse failure in " + path + ": " +
                                 e.what());
    }
    return bases_from_json(doc);
}

}  // namespace steerkit
