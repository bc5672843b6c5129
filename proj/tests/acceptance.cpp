// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned in the checks below.

#include "steerkit/analysis.hpp"
#include "steerkit/assemblages.hpp"
#include "steerkit/matcore.hpp"
#include "steerkit/measurements.hpp"
#include "steerkit/steering.hpp"

#include <chrono>
#include <iostream>
#include <random>
#include <vector>

using namespace steerkit;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool ok,
            const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << criterion << ": "
              << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

Ket seeded_ket(Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Ket v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    v.normalize();
    return v;
}

MeasurementSet seeded_set(int d, int n, std::uint64_t seed) {
    MeasurementSet set;
    set.dim = d;
    for (int x = 0; x < n; ++x) {
        set.bases.push_back(random_basis(d, seed + static_cast<std::uint64_t>(x)));
    }
    return set;
}

double bisect_eta(const MeasurementSet& set, double w) {
    const int d = static_cast<int>(set.dim);
    const SteeringFunctional f = build_functional(set, {}, true);
    const double bound = analytic_lhs_bound(set.n_settings(), f.alpha);
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        if (violation(f, noisy_lossy_assemblage(d, set, mid, w), bound).violated) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double bisect_w(const MeasurementSet& set, double eta) {
    const int d = static_cast<int>(set.dim);
    const SteeringFunctional f = build_functional(set, {}, true);
    const double bound = analytic_lhs_bound(set.n_settings(), f.alpha);
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        if (violation(f, noisy_lossy_assemblage(d, set, eta, mid), bound).violated) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    for (int d : {2, 3, 5, 7, 11, 13}) {
        const double c = max_overlap(mub_prime(d));
        ok = ok && std::abs(c - 1.0 / std::sqrt(double(d))) <= 1e-9;
    }
    const double t = elapsed_s(start);
    report(1, "MUB overlap 1/sqrt(d) for d in {2,3,5,7,11,13}", ok && t < 1.0,
           "runtime " + format_sig(t, 3) + " s");
}

void criterion_2() {
    const SteeringFunctional f = build_functional(mub_prime(2));
    const LhsBoundReport r = exact_lhs_bound(f);
    const double expected = 1.0 + std::sqrt(2.0);
    const bool ok = std::abs(r.exact_bound - expected) <= 1e-9 &&
                    std::abs(r.analytic_bound - expected) <= 1e-9 &&
                    std::abs(r.per_class_max.at(0) -
                             (3.0 + std::sqrt(3.0)) / 2.0) <= 1e-9;
    report(2, "analytic vs exact LHS bound for d=2, n=3 MUBs", ok,
           "exact " + format_sig(r.exact_bound) + ", k=0 class " +
               format_sig(r.per_class_max.at(0)));
}

void criterion_3() {
    bool ok = true;
    std::string detail;
    for (int d : {2, 3, 5}) {
        const MeasurementSet set = mub_prime(d);
        const double found = bisect_eta(set, 1.0);
        const double expected = 1.0 / (d + 1);
        ok = ok && std::abs(found - expected) <= 1e-6;
        detail += "d=" + std::to_string(d) + ": " + format_sig(found, 7) + " ";
    }
    report(3, "violation threshold at eta = 1/n by bisection", ok, detail);
}

void criterion_4() {
    bool ok = true;
    for (int d : {2, 3, 5, 7, 11, 13}) {
        const int n = d + 1;
        const double c = 1.0 / std::sqrt(double(d));
        ok = ok && std::abs(quantum_beta(n, c, 1.0 / n) -
                            analytic_lhs_bound(n, c)) <= 1e-12;
    }
    for (int n : {2, 4, 6}) {
        for (double c : {0.05, 0.5, 0.95}) {
            ok = ok && std::abs(quantum_beta(n, c, 1.0 / n) -
                                analytic_lhs_bound(n, c)) <= 1e-12;
        }
    }
    report(4, "no violation exactly at eta = 1/n (boundary exactness)", ok);
}

void criterion_5() {
    const double c = 1.0 / std::sqrt(2.0);
    const double w_c = critical_w(3, 2, c, 1.0).value();
    const double w_bisect = bisect_w(mub_prime(2), 1.0);
    const bool ok =
        std::abs(w_c - 0.60948) <= 1e-4 && std::abs(w_c - w_bisect) <= 1e-5;
    report(5, "noise threshold w_c at eta = 1 for d=2, n=3", ok,
           "closed form " + format_sig(w_c, 7) + ", bisection " +
               format_sig(w_bisect, 7));
}

void criterion_6() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> axis;
    for (int i = 0; i < 101; ++i) axis.push_back(i / 100.0);
    long prev = -1;
    bool ok = true;
    std::string detail;
    for (int d : {2, 3, 5}) {
        const auto points =
            scan_region(d, d + 1, 1.0 / std::sqrt(double(d)), axis, axis);
        long count = 0;
        for (const auto& p : points) count += p.violated ? 1 : 0;
        ok = ok && count > prev;
        prev = count;
        detail += std::to_string(count) + "/10201 ";
    }
    const double t = elapsed_s(start);
    report(6, "demonstrable region grows with d on a 101x101 grid",
           ok && t < 5.0, detail + "runtime " + format_sig(t, 3) + " s");
}

void criterion_7() {
    const std::vector<int> primes = {3, 5, 7, 11, 13};
    bool ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : asymptotic_checks(primes, FixedKind::W, 0.9)) {
        const double rel = std::abs(row.exact * 0.9 * row.d - 1.0);
        ok = ok && rel < prev;
        prev = rel;
    }
    for (const auto& row : asymptotic_checks(primes, FixedKind::Eta, 1.0)) {
        const double scaled =
            std::abs(row.exact - 1.0 / std::sqrt(double(row.d))) * row.d;
        ok = ok && scaled < 2.0;
    }
    report(7, "asymptotic scaling of eta and w thresholds", ok);
}

void criterion_8() {
    bool ok = true;
    double prev = 0.0;
    std::string detail;
    for (int d : {2, 3, 5, 7, 11, 13}) {
        const double v = (d + 1) / (1.0 + std::sqrt(double(d)));
        ok = ok && v > prev;
        prev = v;
        if (d >= 5) ok = ok && v >= 0.9 * std::sqrt(double(d));
        detail += "V(" + std::to_string(d) + ")=" + format_sig(v, 4) + " ";
    }
    report(8, "unbounded normalized violation along the MUB family", ok, detail);
}

void criterion_9() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<int> pick_l(2, 6);
    std::uniform_int_distribution<int> pick_d(2, 8);
    bool ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int l = pick_l(rng);
        const int d = pick_d(rng);
        std::vector<ComplexMatrix> projectors;
        for (int i = 0; i < l; ++i) projectors.push_back(projector(seeded_ket(d, rng)));
        const auto r = projector_sum_norm_check(projectors);
        ok = ok && r.lhs <= r.bound + 1e-9;
    }
    {
        std::vector<ComplexMatrix> identical(5, projector(seeded_ket(4, rng)));
        const auto r = projector_sum_norm_check(identical);
        ok = ok && std::abs(r.lhs - r.bound) <= 1e-10 && std::abs(r.lhs - 5.0) <= 1e-10;
    }
    {
        std::vector<ComplexMatrix> orthogonal;
        for (int i = 0; i < 4; ++i) {
            Ket e = Ket::Zero(4);
            e(i) = 1.0;
            orthogonal.push_back(projector(e));
        }
        const auto r = projector_sum_norm_check(orthogonal);
        ok = ok && std::abs(r.lhs - 1.0) <= 1e-10 && std::abs(r.bound - 1.0) <= 1e-10;
    }
    const double t = elapsed_s(start);
    report(9, "projector-sum norm lemma on 1000 random instances",
           ok && t < 10.0, "runtime " + format_sig(t, 3) + " s");
}

void criterion_10() {
    bool ok = true;
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<int> pick_m(1, 5);
    std::uniform_real_distribution<double> uniform(0.01, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int d : {2, 3}) {
        const MeasurementSet set = mub_prime(d);
        const int n = set.n_settings();
        const SteeringFunctional f = build_functional(set);
        const LhsBoundReport r = exact_lhs_bound(f);
        std::uniform_int_distribution<int> pick_a(0, d);
        for (int trial = 0; trial < 500; ++trial) {
            const int m = pick_m(rng);
            std::vector<double> weights;
            std::vector<DeterministicStrategy> strategies;
            std::vector<ComplexMatrix> states;
            double total = 0.0;
            for (int i = 0; i < m; ++i) {
                weights.push_back(uniform(rng));
                total += weights.back();
                DeterministicStrategy s;
                for (int x = 0; x < n; ++x) {
                    const int a = pick_a(rng);
                    s.assignments.push_back(a == d ? NO_CLICK : a);
                }
                strategies.push_back(s);
                ComplexMatrix g(d, d);
                for (Eigen::Index p = 0; p < d; ++p) {
                    for (Eigen::Index q = 0; q < d; ++q) {
                        g(p, q) = Complex(gauss(rng), gauss(rng));
                    }
                }
                ComplexMatrix rho = g * g.adjoint();
                rho /= rho.trace();
                states.push_back(rho);
            }
            for (auto& p : weights) p /= total;
            const Assemblage a = lhs_assemblage(weights, strategies, states);
            ok = ok && violation(f, a, r.exact_bound).beta <= r.exact_bound + 1e-9;
        }
        const ComplexMatrix g = strategy_operator(f, r.argmax_strategy);
        const Assemblage witness =
            lhs_assemblage({1.0}, {r.argmax_strategy}, {projector(top_eigenvector(g))});
        ok = ok &&
             std::abs(violation(f, witness, r.exact_bound).beta - r.exact_bound) <=
                 1e-9;
    }
    report(10, "LHS soundness (500 random models per functional) and attainability",
           ok);
}

void criterion_11() {
    bool ok = true;
    for (int d : {2, 3, 5}) {
        const MeasurementSet set = mub_prime(d);
        const int n = set.n_settings();
        const ParentPovm parent = parent_povm(set);
        ok = ok && op_norm_hermitian(parent.sum() - identity(d)) <= 1e-10;
        for (const auto& [label, m] : parent.elements) ok = ok && is_psd(m);
        const LossyPovm lossy = lossy_povm(set, 1.0 / n);
        for (int x = 0; x < n; ++x) {
            const auto marginals = marginalize(parent, x);
            const auto expected = lossy.elements(x);
            for (std::size_t slot = 0; slot < marginals.size(); ++slot) {
                ok = ok &&
                     (marginals[slot] - expected[slot]).cwiseAbs().maxCoeff() <= 1e-12;
            }
        }
        const double eta = 1.0 / n + 0.01;
        const double c = max_overlap(set);
        ok = ok && quantum_beta(n, c, eta) > analytic_lhs_bound(n, c);
    }
    report(11, "parent POVM marginals and non-JM certificate above 1/n", ok);
}

void criterion_12() {
    MeasurementSet set = mub_prime(2);
    set.bases.resize(2);  // Z and X
    const std::vector<double> lambdas = {0.9, 0.1};
    const SteeringFunctional f = filtered_functional(set, lambdas);
    const double bound = analytic_lhs_bound(2, f.alpha);
    const Assemblage a =
        apply_loss(assemble(schmidt_state(lambdas).state, set), 0.75);
    const ViolationReport v = violation(f, a, bound);
    const double margin = v.beta - bound;
    report(12, "Schmidt-state steering with eta = 0.75 > 1/2", margin > 0.0,
           "margin " + format_sig(margin, 6));
}

void criterion_13() {
    bool ok = true;
    std::uint64_t seed = 90'000;
    for (int d : {2, 3, 5}) {
        std::vector<MeasurementSet> sets = {mub_prime(d)};
        for (int i = 0; i < 20; ++i) sets.push_back(seeded_set(d, 3, seed += 17));
        for (const auto& set : sets) {
            const Assemblage a = assemble(max_entangled(d), set);
            for (int x = 0; x < set.n_settings(); ++x) {
                for (int outcome = 0; outcome < d; ++outcome) {
                    ok = ok && (a.members[static_cast<std::size_t>(x)]
                                         [static_cast<std::size_t>(outcome)] -
                                transpose(set.projector_for(x, outcome)) / double(d))
                                       .cwiseAbs()
                                       .maxCoeff() <= 1e-12;
                }
            }
        }
    }
    report(13, "transpose law sigma_{a|x} = Pi^T/d on phi+", ok);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
