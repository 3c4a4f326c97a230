// pfeig: Perron-Frobenius eigenvalue / eigenvector toolkit front end.
//
// Commands: solve, mc, conditions, example (bd | kernel). One JSON report
// per run on stdout (or --output). Exit codes: 0 success, 1 usage error,
// 2 model error (reducible matrix, A1 failure, bad certificate).

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfr/birthdeath.hpp"
#include "pfr/errors.hpp"
#include "pfr/exact.hpp"
#include "pfr/kernel.hpp"
#include "pfr/matrix.hpp"
#include "pfr/mc.hpp"
#include "pfr/minorize.hpp"
#include "pfr/twist.hpp"

using nlohmann::json;

namespace {

double now_ms() {
    using clk = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(
               clk::now().time_since_epoch())
        .count();
}

// JSON has no infinity; report unbounded quantities as null.
json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw pfr::Error(pfr::ErrorKind::parse,
                         "cannot open matrix file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

pfr::NonNegMatrix load_irreducible(const std::string& path,
                                   pfr::NormalizationResult& norm,
                                   pfr::GraphAnalysis& graph) {
    auto G = pfr::load_matrix(read_file(path));
    norm = pfr::normalize(G);
    graph = pfr::analyze_graph(norm.B);
    if (!graph.irreducible) {
        std::string msg = "matrix is reducible";
        if (graph.scc_witness)
            msg += ": no path from state " +
                   std::to_string(graph.scc_witness->first) + " to state " +
                   std::to_string(graph.scc_witness->second);
        throw pfr::Error(pfr::ErrorKind::reducible, msg);
    }
    return G;
}

void emit(const json& report, const std::string& output) {
    if (output.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out)
            throw pfr::Error(pfr::ErrorKind::parse,
                             "cannot open output file: " + output);
        out << report.dump(2) << "\n";
    }
}

json solution_json(const pfr::PFSolution& sol, double norm_s) {
    return {{"theta", sol.theta},
            {"lambda_star", norm_s * sol.lambda_star},
            {"z", sol.z},
            {"u_star", sol.u_star},
            {"eta_star", sol.eta_star}};
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// ---- solve -------------------------------------------------------------

int cmd_solve(const std::string& matrix_file, std::optional<int> z,
              double tol, const std::string& output, json& report) {
    double t0 = now_ms();
    pfr::NormalizationResult norm;
    pfr::GraphAnalysis graph;
    load_irreducible(matrix_file, norm, graph);
    report["config"] = {{"matrix_file", matrix_file},
                        {"z", z ? json(*z) : json(nullptr)},
                        {"tol", tol}};

    auto sol = pfr::solve_exact(norm.B, z, tol);
    auto td = pfr::taboo_decompose(norm.B, sol.z);
    auto gap = pfr::check_theorem3_gap(norm.B, td);
    auto tc = pfr::doob_transform(norm.B, sol);

    report["result"] = solution_json(sol, norm.s);
    json twist = {{"pi_star", tc.pi_star}, {"normalizer", tc.normalizer}};
    if (norm.B.size() <= 64) {
        auto dense = tc.P_star.to_dense();
        json rows = json::array();
        int n = tc.P_star.size();
        for (int i = 0; i < n; ++i)
            rows.push_back(std::vector<double>(dense.begin() + i * n,
                                               dense.begin() + (i + 1) * n));
        twist["p_star"] = rows;
    }
    report["result"]["twist"] = twist;
    report["diagnostics"] = {
        {"normalization_s", norm.s},
        {"period", graph.period},
        {"h_residual", sol.h_residual},
        {"eig_residual_u", sol.eig_residual_u},
        {"eig_residual_eta", sol.eig_residual_eta},
        {"stationarity_residual", pfr::verify_stationarity(tc)},
        {"theta1", gap.theta1},
        {"theta2", finite_or_null(gap.theta2)},
        {"theta_gap_satisfied", gap.satisfied},
        {"elapsed_ms", now_ms() - t0}};
    emit(report, output);
    return 0;
}

// ---- mc ----------------------------------------------------------------

int cmd_mc(const std::string& matrix_file, const pfr::McConfig& cfg,
           bool seed_given, double tol, const std::string& output,
           json& report) {
    double t0 = now_ms();
    if (cfg.n_cycles < 1)
        throw pfr::Error(pfr::ErrorKind::domain,
                         "n_cycles must be at least 1");
    pfr::NormalizationResult norm;
    pfr::GraphAnalysis graph;
    load_irreducible(matrix_file, norm, graph);
    report["config"] = {
        {"matrix_file", matrix_file},
        {"seed", cfg.seed},
        {"seed_source", seed_given ? "flag" : "entropy"},
        {"n_cycles", cfg.n_cycles},
        {"n_max", cfg.n_max},
        {"z", cfg.z_override ? json(*cfg.z_override) : json(nullptr)},
        {"ci_level", cfg.ci_level},
        {"threads", cfg.threads},
        {"tol", tol}};

    int z = cfg.z_override ? *cfg.z_override
                           : pfr::default_regeneration_state(norm.B);
    if (z < 0 || z >= norm.B.size())
        throw pfr::Error(pfr::ErrorKind::domain, "z out of range");
    auto chain = pfr::augment(norm.B);
    pfr::ChainSampler sampler(chain);
    auto samples = pfr::sample_cycles(sampler, z, cfg.seed, cfg.n_cycles,
                                      cfg.n_max, cfg.threads);
    auto saa = pfr::saa_solve_theta(samples, tol, cfg.ci_level);

    double lam = norm.s * std::exp(-saa.theta_hat);
    std::uint64_t truncated = 0;
    for (const auto& s : samples) truncated += s.truncated ? 1 : 0;

    int n = norm.B.size();
    std::uint64_t per_state = std::max<std::uint64_t>(1, cfg.n_cycles / 10);
    json u_hat = json::array();
    for (int x = 0; x < n; ++x) {
        auto e = pfr::estimate_u(sampler, z, x, saa.theta_hat, per_state,
                                 cfg.seed + 1 + x, cfg.n_max, cfg.threads);
        u_hat.push_back({{"value", e.value},
                         {"std_error", e.std_error},
                         {"n_samples", e.n_samples}});
    }
    json eta_hat = json::array();
    for (const auto& e : pfr::estimate_eta(samples, saa.theta_hat, n))
        eta_hat.push_back({{"value", e.value}, {"std_error", e.std_error}});

    report["result"] = {
        {"theta_hat", saa.theta_hat},
        {"lambda_star", lam},
        {"z", z},
        {"ci", {{"level", cfg.ci_level},
                {"theta_halfwidth", saa.ci_halfwidth},
                // lambda = s e^{-theta}: d lambda = -lambda d theta
                {"lambda_lo", lam * std::exp(-saa.ci_halfwidth)},
                {"lambda_hi", lam * std::exp(saa.ci_halfwidth)}}},
        {"u_star_hat", u_hat},
        {"eta_star_hat", eta_hat}};
    report["diagnostics"] = {
        {"normalization_s", norm.s},
        {"n_survived", saa.n_survived},
        {"truncated_fraction",
         static_cast<double>(truncated) / static_cast<double>(cfg.n_cycles)},
        {"h_prime", saa.h_prime},
        {"elapsed_ms", now_ms() - t0}};
    emit(report, output);
    return 0;
}

// ---- conditions --------------------------------------------------------

int cmd_conditions(const std::string& matrix_file, int m_max,
                   const std::string& output, json& report) {
    double t0 = now_ms();
    report["config"] = {{"matrix_file", matrix_file}, {"m_max", m_max}};
    auto G = pfr::load_matrix(read_file(matrix_file));
    auto norm = pfr::normalize(G);
    auto graph = pfr::analyze_graph(norm.B);

    json result = {{"irreducible", graph.irreducible},
                   {"period", graph.period}};
    if (graph.scc_witness)
        result["scc_witness"] = {graph.scc_witness->first,
                                 graph.scc_witness->second};
    if (graph.irreducible) {
        double rho = pfr::spectral_radius(norm.B);
        double theta1 = -std::log(rho);
        result["theta1"] = theta1;

        auto a3p = pfr::certify_A3prime(norm.B, m_max);
        json a3 = {{"found", a3p.cert.has_value()},
                   {"diagnostics", a3p.diagnostics}};
        if (a3p.cert) {
            const auto& c = *a3p.cert;
            a3["certificate"] = {{"v", c.v},     {"m", c.m},
                                 {"c1", c.c1},   {"c2", c.c2},
                                 {"delta", c.delta}, {"psi", c.psi}};
            result["theta_gap_bound"] =
                finite_or_null(pfr::theta_gap_bound(c, theta1));
        }
        result["a3prime"] = a3;

        auto td = pfr::taboo_decompose(norm.B,
                                       pfr::default_regeneration_state(norm.B));
        auto gap = pfr::check_theorem3_gap(norm.B, td);
        result["theorem3"] = {{"theta1", gap.theta1},
                              {"theta2", finite_or_null(gap.theta2)},
                              {"satisfied", gap.satisfied}};
    }
    report["result"] = result;
    report["diagnostics"] = {{"normalization_s", norm.s},
                             {"elapsed_ms", now_ms() - t0}};
    emit(report, output);
    return 0;
}

// ---- example bd --------------------------------------------------------

int cmd_example_bd(double p, int L, const std::string& boundary, double tol,
                   const std::string& output, json& report) {
    double t0 = now_ms();
    report["config"] = {{"name", "bd"},
                        {"p", p},
                        {"L", L},
                        {"boundary", boundary},
                        {"tol", tol}};
    auto mode = boundary == "reflecting" ? pfr::UpperBoundary::reflecting
                                         : pfr::UpperBoundary::killed;
    auto B = pfr::bd_matrix({p, L}, mode);
    auto graph = pfr::analyze_graph(B);
    auto sol = pfr::solve_exact(B, {}, tol);
    double lam_cf = pfr::closed_form_lambda(p);

    // closed forms are for the infinite chain at criticality; compare over a
    // window well inside the truncation, normalized at x = 1 (index 0)
    int window = std::min(20, L);
    double u_rel = 0.0, eta_rel = 0.0;
    json u_cmp = json::array();
    for (int x = 1; x <= window; ++x) {
        double u_num = sol.u_star[x - 1] / sol.u_star[0];
        double u_cf = pfr::closed_form_u(p, x) / pfr::closed_form_u(p, 1);
        double e_num = sol.eta_star[x - 1] / sol.eta_star[0];
        double e_cf = pfr::closed_form_eta(p, x) / pfr::closed_form_eta(p, 1);
        u_rel = std::max(u_rel, std::abs(u_num - u_cf) / u_cf);
        eta_rel = std::max(eta_rel, std::abs(e_num - e_cf) / e_cf);
        u_cmp.push_back({{"x", x}, {"u", u_num}, {"u_closed_form", u_cf}});
    }
    report["result"] = {{"lambda_L", sol.lambda_star},
                        {"closed_form_lambda", lam_cf},
                        {"lambda_gap", std::abs(sol.lambda_star - lam_cf)},
                        {"period", graph.period},
                        {"u_rel_err_max", u_rel},
                        {"eta_rel_err_max", eta_rel},
                        {"u_comparison", u_cmp},
                        {"z", sol.z}};
    report["diagnostics"] = {{"h_residual", sol.h_residual},
                             {"eig_residual_u", sol.eig_residual_u},
                             {"eig_residual_eta", sol.eig_residual_eta},
                             {"elapsed_ms", now_ms() - t0}};
    emit(report, output);
    return 0;
}

// ---- example kernel ----------------------------------------------------

int cmd_example_kernel(const std::string& kind, std::uint64_t cycles,
                       std::uint64_t seed, bool seed_given, int grid,
                       double kappa, int m, const std::string& output,
                       json& report) {
    double t0 = now_ms();
    report["config"] = {{"name", "kernel"},
                        {"kind", kind},
                        {"cycles", cycles},
                        {"seed", seed},
                        {"seed_source", seed_given ? "flag" : "entropy"},
                        {"grid", grid},
                        {"kappa", kappa},
                        {"m", m}};
    if (cycles < 1)
        throw pfr::Error(pfr::ErrorKind::domain, "cycles must be at least 1");

    pfr::KernelModel model;
    std::function<double(double, double)> density_1;
    std::optional<double> closed_form;
    if (kind == "uniform") {
        model = pfr::make_uniform_kill_kernel(kappa, m);
        density_1 = [kappa](double x, double y) {
            return pfr::uniform_kill_one_step_density(kappa, x, y);
        };
        closed_form = 1.0 - kappa;
    } else if (kind == "mixture") {
        model = pfr::make_gaussian_mixture_kernel();
        density_1 = pfr::gaussian_mixture_one_step_density;
    } else {
        throw pfr::Error(pfr::ErrorKind::domain,
                         "unknown kernel kind: " + kind);
    }

    std::vector<pfr::KernelPoint> query = {{0.25}, {0.5}, {0.75}};
    auto est = pfr::estimate_kernel_pf(model, cycles, seed, query);

    auto gridB = pfr::discretize_oracle(density_1, 0.0, 1.0, grid);
    double oracle = pfr::spectral_radius(gridB);

    json u_at = json::array();
    for (std::size_t i = 0; i < query.size(); ++i)
        u_at.push_back({{"x", query[i]},
                        {"value", est.u_at_points[i].value},
                        {"std_error", est.u_at_points[i].std_error}});

    report["result"] = {
        {"lambda_hat", est.lambda_star_B},
        {"ci_halfwidth", est.ci_halfwidth},
        {"theta_hat", est.theta_hat},
        {"theta_ci_halfwidth", est.theta_ci_halfwidth},
        {"grid_oracle_lambda", oracle},
        {"oracle_gap", std::abs(est.lambda_star_B - oracle)},
        {"within_3_halfwidths",
         std::abs(est.lambda_star_B - oracle) <= 3.0 * est.ci_halfwidth},
        {"u_at_points", u_at},
        {"eta_atoms", est.eta.atoms.size()},
        {"eta_total_mass", est.eta.total}};
    if (closed_form) report["result"]["closed_form_lambda"] = *closed_form;
    report["diagnostics"] = {
        {"n_survived", est.n_survived},
        {"truncated_fraction", est.truncated_fraction},
        {"c1", model.c1},
        {"c2", model.c2},
        {"elapsed_ms", now_ms() - t0}};
    emit(report, output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perron-Frobenius eigenvalue solver for nonnegative "
                 "matrices and sub-stochastic kernels"};
    app.require_subcommand(1);

    std::string matrix_file, output;
    std::optional<int> z;
    double tol = 1e-12;
    std::optional<std::uint64_t> seed_flag;
    int threads = 1;

    auto add_shared = [&](CLI::App* sub, bool with_matrix) {
        if (with_matrix)
            sub->add_option("matrix", matrix_file, "matrix file (coordinate "
                                                   "text format)")
                ->required();
        sub->add_option("--output", output, "write the report here instead "
                                            "of stdout");
        sub->add_option("--tol", tol, "root-finding tolerance");
        sub->add_option("--seed", seed_flag, "RNG seed (default: entropy, "
                                             "echoed in the report)");
        sub->add_option("--threads", threads, "worker threads for sampling");
        sub->add_option("--z", z, "regeneration state override");
    };

    auto* solve = app.add_subcommand("solve", "exact eigen-triple via the "
                                              "cycle transform");
    add_shared(solve, true);

    auto* mc = app.add_subcommand("mc", "Monte Carlo eigen-triple from "
                                        "regenerative cycles");
    add_shared(mc, true);
    std::uint64_t n_cycles = 100000;
    std::uint32_t n_max = 1000000;
    double ci_level = 0.95;
    mc->add_option("--cycles", n_cycles, "number of regenerative cycles");
    mc->add_option("--n-max", n_max, "per-cycle step cap");
    mc->add_option("--ci-level", ci_level, "confidence level");

    auto* cond = app.add_subcommand("conditions", "check irreducibility, "
                                                  "period, minorization, "
                                                  "and spectral gaps");
    add_shared(cond, true);
    int m_max = 6;
    cond->add_option("--m-max", m_max, "largest power tried for the "
                                       "minorization certificate");

    auto* example = app.add_subcommand("example", "built-in benchmark "
                                                  "models");
    example->require_subcommand(1);
    auto* bd = example->add_subcommand("bd", "killed birth-death chain vs "
                                             "closed forms");
    add_shared(bd, false);
    double p = 0.3;
    int L = 2000;
    std::string boundary = "killed";
    bd->add_option("--p", p, "up-step probability");
    bd->add_option("--L", L, "truncation level");
    bd->add_option("--boundary", boundary, "killed | reflecting")
        ->check(CLI::IsMember({"killed", "reflecting"}));

    auto* kern = example->add_subcommand("kernel", "continuous-state kernel "
                                                   "vs grid oracle");
    add_shared(kern, false);
    std::string kind = "mixture";
    std::uint64_t cycles = 100000;
    int grid = 200, km = 2;
    double kappa = 0.2;
    kern->add_option("--kind", kind, "mixture | uniform")
        ->check(CLI::IsMember({"mixture", "uniform"}));
    kern->add_option("--cycles", cycles, "number of split cycles");
    kern->add_option("--grid", grid, "oracle grid resolution");
    kern->add_option("--kappa", kappa, "per-step kill probability (uniform "
                                       "kernel)");
    kern->add_option("--m", km, "block length (uniform kernel)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::string command;
    if (solve->parsed()) command = "solve";
    else if (mc->parsed()) command = "mc";
    else if (cond->parsed()) command = "conditions";
    else if (bd->parsed()) command = "example bd";
    else command = "example kernel";

    json report = {{"schema_version", 1}, {"command", command}};
    try {
        if (solve->parsed())
            return cmd_solve(matrix_file, z, tol, output, report);
        if (mc->parsed()) {
            pfr::McConfig cfg;
            cfg.seed = resolve_seed(seed_flag);
            cfg.n_cycles = n_cycles;
            cfg.n_max = n_max;
            cfg.z_override = z;
            cfg.ci_level = ci_level;
            cfg.threads = threads;
            return cmd_mc(matrix_file, cfg, seed_flag.has_value(), tol,
                          output, report);
        }
        if (cond->parsed())
            return cmd_conditions(matrix_file, m_max, output, report);
        if (bd->parsed()) {
            if (!(p > 0.0 && p < 1.0))
                throw pfr::Error(pfr::ErrorKind::domain,
                                 "p must lie in (0, 1)");
            if (L < 2)
                throw pfr::Error(pfr::ErrorKind::domain,
                                 "L must be at least 2");
            return cmd_example_bd(p, L, boundary, tol, output, report);
        }
        return cmd_example_kernel(kind, cycles, resolve_seed(seed_flag),
                                  seed_flag.has_value(), grid, kappa, km,
                                  output, report);
    } catch (const pfr::Error& e) {
        report["error"] = {{"kind", pfr::kind_name(e.kind())},
                           {"message", e.what()}};
        std::cout << report.dump(2) << "\n";
        return e.is_usage() ? 1 : 2;
    } catch (const std::exception& e) {
        report["error"] = {{"kind", "internal"}, {"message", e.what()}};
        std::cout << report.dump(2) << "\n";
        return 2;
    }
}
