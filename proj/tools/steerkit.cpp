// steerkit command-line tool: LHS bounds, quantum violations, critical
// thresholds, region scans, joint-measurability certificates and the
// projector-sum norm check.

#include "steerkit/analysis.hpp"
#include "steerkit/assemblages.hpp"
#include "steerkit/matcore.hpp"
#include "steerkit/measurements.hpp"
#include "steerkit/steering.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace steerkit;

constexpr int EXIT_USAGE = 1;
constexpr int EXIT_NUMERICAL = 2;
constexpr int EXIT_GUARD = 3;

struct SetOptions {
    int d = 0;
    bool mub = false;
    int n = 0;  // 0 means "all available settings"
    std::string bases_path;
};

void add_set_options(CLI::App* cmd, SetOptions& opt) {
    cmd->add_option("--d", opt.d, "Local dimension (prime, with --mub)");
    cmd->add_flag("--mub", opt.mub, "Use the d+1 MUB measurements for prime d");
    cmd->add_option("--n", opt.n, "Restrict to the first n settings");
    cmd->add_option("--bases", opt.bases_path, "Basis-set JSON file");
}

MeasurementSet resolve_set(const SetOptions& opt) {
    MeasurementSet set;
    if (!opt.bases_path.empty()) {
        set = load_bases(opt.bases_path);
    } else if (opt.mub) {
        if (opt.d < 2) {
            throw std::invalid_argument("--mub requires --d with a prime dimension");
        }
        set = mub_prime(opt.d);
    } else {
        throw std::invalid_argument("either --mub (with --d) or --bases is required");
    }
    if (opt.n > 0) {
        if (opt.n > set.n_settings()) {
            throw std::invalid_argument("--n exceeds the available settings");
        }
        set.bases.resize(static_cast<std::size_t>(opt.n));
    }
    return set;
}

std::string strategy_to_string(const DeterministicStrategy& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.assignments.size(); ++i) {
        if (i > 0) out += ",";
        out += (s.assignments[i] == NO_CLICK)
                   ? "nc"
                   : std::to_string(s.assignments[i] + 1);
    }
    return out + ")";
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file " + path);
    return file;
}

int cmd_bound(const SetOptions& opt, double alpha_override, bool has_alpha,
              std::uint64_t guard, const std::string& format) {
    const MeasurementSet set = resolve_set(opt);
    std::optional<double> alpha;
    if (has_alpha) alpha = alpha_override;
    const SteeringFunctional f = build_functional(set, alpha);
    const LhsBoundReport report = exact_lhs_bound(f, guard);
    if (format == "json") {
        nlohmann::json doc;
        doc["d"] = set.dim;
        doc["n"] = set.n_settings();
        doc["alpha"] = f.alpha;
        doc["cos_theta"] = f.max_overlap();
        doc["analytic_bound"] = report.analytic_bound;
        doc["exact_bound"] = report.exact_bound;
        doc["argmax_strategy"] = strategy_to_string(report.argmax_strategy);
        nlohmann::json classes = nlohmann::json::object();
        for (const auto& [k, v] : report.per_class_max) {
            classes[std::to_string(k)] = v;
        }
        doc["per_class_max"] = classes;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "d = " << set.dim << ", n = " << set.n_settings()
                  << ", alpha = " << format_sig(f.alpha) << "\n";
        std::cout << "analytic bound: " << format_sig(report.analytic_bound) << "\n";
        std::cout << "exact bound:    " << format_sig(report.exact_bound) << "\n";
        std::cout << "argmax strategy: " << strategy_to_string(report.argmax_strategy)
                  << "\n";
        std::cout << "per-class maxima (k = no-click count):\n";
        for (const auto& [k, v] : report.per_class_max) {
            std::cout << "  k=" << k << ": " << format_sig(v) << "\n";
        }
    }
    return 0;
}

int cmd_violation(const SetOptions& opt, double eta, double w) {
    const MeasurementSet set = resolve_set(opt);
    const int d = static_cast<int>(set.dim);
    const SteeringFunctional f = build_functional(set, {}, /*use_transpose=*/true);
    const Assemblage a = noisy_lossy_assemblage(d, set, eta, w);
    const double bound = analytic_lhs_bound(set.n_settings(), f.alpha);
    const ViolationReport report = violation(f, a, bound);
    std::cout << "beta:     " << format_sig(report.beta) << "\n";
    std::cout << "bound:    " << format_sig(bound) << "\n";
    std::cout << "violated: " << (report.violated ? "yes" : "no") << "\n";
    std::cout << "V:        " << format_sig(report.normalized_violation) << "\n";
    return 0;
}

int cmd_critical(const SetOptions& opt, double eta, double w) {
    const MeasurementSet set = resolve_set(opt);
    const int n = set.n_settings();
    const int d = static_cast<int>(set.dim);
    const double cos_theta = max_overlap(set);
    std::cout << "d = " << d << ", n = " << n
              << ", cos_theta = " << format_sig(cos_theta) << "\n";
    const auto eta_c = critical_eta(n, d, cos_theta, w);
    std::cout << "eta_c (at w = " << format_sig(w) << "): "
              << (eta_c ? format_sig(*eta_c) : std::string("unattainable")) << "\n";
    const auto w_c = critical_w(n, d, cos_theta, eta);
    std::cout << "w_c (at eta = " << format_sig(eta) << "): "
              << (w_c ? format_sig(*w_c) : std::string("unattainable")) << "\n";
    return 0;
}

int cmd_scan_fig1(int d, int grid, const std::string& out_path) {
    if (d < 2 || grid < 2) {
        throw std::invalid_argument("scan --fig 1 requires --d >= 2 and --grid >= 2");
    }
    const MeasurementSet set = mub_prime(d);
    const double cos_theta = max_overlap(set);
    std::vector<double> axis;
    for (int i = 0; i < grid; ++i) {
        axis.push_back(static_cast<double>(i) / (grid - 1));
    }
    const auto points = scan_region(d, set.n_settings(), cos_theta, axis, axis);
    std::ofstream file;
    write_scan_csv(points, open_output(file, out_path));
    return 0;
}

int cmd_scan_fig2(const std::vector<int>& primes, double eta,
                  const std::string& out_path) {
    std::ofstream file;
    std::ostream& out = open_output(file, out_path);
    out << "d,n,eta,w_c\n";
    for (int d : primes) {
        const double cos_theta = 1.0 / std::sqrt(static_cast<double>(d));
        for (int n : {d + 1, 2}) {
            const auto w_c = critical_w(n, d, cos_theta, eta);
            out << d << ',' << n << ',' << format_sig(eta) << ','
                << (w_c ? format_sig(*w_c) : std::string("unattainable")) << '\n';
        }
    }
    return 0;
}

void print_matrix(const ComplexMatrix& m, std::ostream& out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << "    [";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out << ", ";
            out << format_sig(m(i, j).real(), 6) << (m(i, j).imag() >= 0 ? "+" : "")
                << format_sig(m(i, j).imag(), 6) << "i";
        }
        out << "]\n";
    }
}

int cmd_jm(const SetOptions& opt, double eta) {
    const MeasurementSet set = resolve_set(opt);
    const int n = set.n_settings();
    if (eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("jm: eta must lie in [0, 1]");
    }
    if (eta <= 1.0 / n + 1e-15) {
        const ParentPovm parent = parent_povm_at(set, eta);
        const double completeness =
            op_norm_hermitian(parent.sum() - identity(set.dim));
        double marginal_residual = 0.0;
        const LossyPovm lossy = lossy_povm(set, eta);
        for (int x = 0; x < n; ++x) {
            const auto marginals = marginalize(parent, x);
            const auto expected = lossy.elements(x);
            for (std::size_t slot = 0; slot < marginals.size(); ++slot) {
                marginal_residual = std::max(
                    marginal_residual,
                    op_norm_hermitian(marginals[slot] - expected[slot]));
            }
        }
        bool all_psd = true;
        for (const auto& [label, m] : parent.elements) {
            if (!is_psd(m)) all_psd = false;
        }
        std::cout << "JM certified: eta = " << format_sig(eta) << " <= 1/n = "
                  << format_sig(1.0 / n) << "\n";
        std::cout << "parent POVM (" << parent.elements.size()
                  << " nonzero elements):\n";
        for (const auto& [label, m] : parent.elements) {
            DeterministicStrategy s{label};
            std::cout << "  " << strategy_to_string(s) << ":\n";
            print_matrix(m, std::cout);
        }
        std::cout << "completeness residual: " << format_sig(completeness) << "\n";
        std::cout << "marginal residual:     " << format_sig(marginal_residual)
                  << "\n";
        if (!all_psd || completeness > 1e-10 || marginal_residual > 1e-12) {
            std::cerr << "error: parent POVM failed validation\n";
            return EXIT_NUMERICAL;
        }
        return 0;
    }
    const double cos_theta = max_overlap(set);
    const double beta = quantum_beta(n, cos_theta, eta);
    const double bound = analytic_lhs_bound(n, cos_theta);
    std::cout << "eta = " << format_sig(eta) << " > 1/n = " << format_sig(1.0 / n)
              << "\n";
    std::cout << "steering value on the maximally entangled state: "
              << format_sig(beta) << "\n";
    std::cout << "LHS bound: " << format_sig(bound) << "\n";
    if (beta > bound + VIOLATION_MARGIN) {
        std::cout << "non-JM certified: beta exceeds the LHS bound\n";
        return 0;
    }
    std::cout << "no certificate at these parameters\n";
    return EXIT_NUMERICAL;
}

int cmd_lemma(int trials, std::uint64_t seed, int identical, int orthogonal) {
    if (identical > 0) {
        const Basis b = random_basis(std::max(2, identical), seed);
        std::vector<ComplexMatrix> projectors(
            static_cast<std::size_t>(identical), projector(b.vectors[0]));
        const auto r = projector_sum_norm_check(projectors);
        std::cout << "identical projectors: lhs = " << format_sig(r.lhs)
                  << ", bound = " << format_sig(r.bound) << "\n";
        return std::abs(r.lhs - r.bound) <= 1e-10 ? 0 : EXIT_NUMERICAL;
    }
    if (orthogonal > 0) {
        const Basis b = random_basis(orthogonal, seed);
        std::vector<ComplexMatrix> projectors;
        for (const auto& v : b.vectors) projectors.push_back(projector(v));
        const auto r = projector_sum_norm_check(projectors);
        std::cout << "orthogonal projectors: lhs = " << format_sig(r.lhs)
                  << ", bound = " << format_sig(r.bound) << "\n";
        return std::abs(r.lhs - 1.0) <= 1e-10 && std::abs(r.bound - 1.0) <= 1e-10
                   ? 0
                   : EXIT_NUMERICAL;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_l(2, 6);
    std::uniform_int_distribution<int> pick_d(2, 8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        const int l = pick_l(rng);
        const int d = pick_d(rng);
        std::vector<ComplexMatrix> projectors;
        for (int i = 0; i < l; ++i) {
            Ket v(d);
            for (int k = 0; k < d; ++k) v(k) = Complex(gauss(rng), gauss(rng));
            v.normalize();
            projectors.push_back(projector(v));
        }
        const auto r = projector_sum_norm_check(projectors);
        if (r.lhs > r.bound + 1e-9) {
            std::cerr << "lemma violated at trial " << t << " (seed " << seed
                      << "): lhs = " << format_sig(r.lhs)
                      << " > bound = " << format_sig(r.bound) << "\n";
            return EXIT_NUMERICAL;
        }
    }
    std::cout << trials << " trials passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loss-tolerant steering inequalities toolkit"};
    app.require_subcommand(1);

    SetOptions set_opt;
    double eta = 1.0;
    double w = 1.0;
    double alpha_override = 0.0;
    std::uint64_t guard = steerkit::DEFAULT_ENUMERATION_GUARD;
    std::string format = "text";
    std::string out_path;
    int fig = 1;
    int grid = 101;
    std::vector<int> primes;
    int trials = 1000;
    std::uint64_t seed = 0;
    int identical = 0;
    int orthogonal = 0;

    auto* bound_cmd = app.add_subcommand("bound", "LHS bounds for a functional");
    add_set_options(bound_cmd, set_opt);
    auto* alpha_opt =
        bound_cmd->add_option("--alpha", alpha_override, "No-click coefficient");
    bound_cmd->add_option("--guard", guard, "Enumeration guard (strategy count)");
    bound_cmd->add_option("--format", format, "Output format (text|json)")
        ->check(CLI::IsMember({"text", "json"}));

    auto* violation_cmd =
        app.add_subcommand("violation", "Quantum violation under loss and noise");
    add_set_options(violation_cmd, set_opt);
    violation_cmd->add_option("--eta", eta, "Detection efficiency")
        ->check(CLI::Range(0.0, 1.0));
    violation_cmd->add_option("--w", w, "Isotropic-state visibility")
        ->check(CLI::Range(0.0, 1.0));

    auto* critical_cmd =
        app.add_subcommand("critical", "Critical efficiency and noise thresholds");
    add_set_options(critical_cmd, set_opt);
    critical_cmd->add_option("--eta", eta, "Fixed eta for the w threshold")
        ->check(CLI::Range(0.0, 1.0));
    critical_cmd->add_option("--w", w, "Fixed w for the eta threshold")
        ->check(CLI::Range(0.0, 1.0));

    auto* scan_cmd = app.add_subcommand("scan", "Region/threshold scans (CSV)");
    scan_cmd->add_option("--fig", fig, "1: (eta, w) region; 2: w_c vs dimension")
        ->check(CLI::IsMember({1, 2}));
    scan_cmd->add_option("--d", set_opt.d, "Dimension (fig 1)");
    scan_cmd->add_option("--grid", grid, "Grid resolution per axis (fig 1)");
    scan_cmd->add_option("--primes", primes, "Prime dimensions (fig 2)")
        ->delimiter(',');
    scan_cmd->add_option("--eta", eta, "Fixed eta (fig 2)")
        ->check(CLI::Range(0.0, 1.0));
    scan_cmd->add_option("--out", out_path, "Output CSV path (default stdout)");

    auto* jm_cmd = app.add_subcommand("jm", "Joint-measurability certificate");
    add_set_options(jm_cmd, set_opt);
    jm_cmd->add_option("--eta", eta, "Detection efficiency")
        ->check(CLI::Range(0.0, 1.0));

    auto* lemma_cmd =
        app.add_subcommand("lemma", "Projector-sum norm inequality check");
    lemma_cmd->add_option("--trials", trials, "Number of random trials");
    lemma_cmd->add_option("--seed", seed, "RNG seed");
    lemma_cmd->add_option("--identical", identical,
                          "Tight case: this many identical projectors");
    lemma_cmd->add_option("--orthogonal", orthogonal,
                          "Tight case: this many orthogonal projectors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bound_cmd->parsed()) {
            return cmd_bound(set_opt, alpha_override, alpha_opt->count() > 0, guard,
                             format);
        }
        if (violation_cmd->parsed()) return cmd_violation(set_opt, eta, w);
        if (critical_cmd->parsed()) return cmd_critical(set_opt, eta, w);
        if (scan_cmd->parsed()) {
            return fig == 1 ? cmd_scan_fig1(set_opt.d, grid, out_path)
                            : cmd_scan_fig2(primes, eta, out_path);
        }
        if (jm_cmd->parsed()) return cmd_jm(set_opt, eta);
        if (lemma_cmd->parsed()) return cmd_lemma(trials, seed, identical, orthogonal);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_USAGE;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << "\n";
        return what.find("guard") != std::string::npos ? EXIT_GUARD
                                                       : EXIT_NUMERICAL;
    }
    return EXIT_USAGE;
}
