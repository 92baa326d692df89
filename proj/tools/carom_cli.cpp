// carom: fit scoring-streak models to innings histograms, recover the
// feasible scoring matrices, and generate synthetic score sheets.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible or
// non-convergent problem.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carom/carom.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInfeasible = 3;

carom::ScoreHistogram read_histogram(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw carom::ValidationError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return carom::parse_histogram(buf.str());
}

std::string percent_pm(double center, double halfwidth) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.1f%% ± %.1f%%", 100.0 * center,
                  100.0 * halfwidth);
    return buf;
}

json matrix_json(const carom::Mat2& k) {
    return json::array({json::array({k.k11, k.k12}), json::array({k.k21, k.k22})});
}

int default_shards() {
    if (const char* env = std::getenv("CAROM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

struct Flags {
    std::string input;
    std::vector<std::string> inputs;
    double rho1 = 0.0, rho2 = 0.0, m = 0.0;
    double p0 = 0.5;
    bool sweep_p0 = false;
    bool no_type_order = false;
    int grid = 512;
    int surface_grid = 161;
    double k11 = 0.0, k12 = 0.0, k21 = 0.0, k22 = 0.0;
    std::uint64_t seed = 0;
    std::int64_t innings = 1;
    int shards = default_shards();
    double lambda = -1.0;
    double dk1_min = -1.0, dk1_max = 1.0, dk2_min = -1.0, dk2_max = 1.0;
    bool log_space = false;
    std::string format = "json";
};

int cmd_fit(const Flags& f) {
    const carom::ScoreHistogram h = read_histogram(f.input);
    const double m = carom::mean_score(h);
    const carom::SurvivalCurve curve = carom::empirical_survival(h);
    carom::FitOptions opt;
    opt.log_space = f.log_space;
    const carom::FitReport report = carom::fit_markov2(curve, m, opt);
    json out{
        {"m", m},
        {"n_used", report.n_used},
        {"bernoulli", {{"lambda", report.bernoulli.model.lambda},
                       {"sse", report.bernoulli.sse}}},
        {"markov", {{"rho1", report.markov.rho1},
                    {"rho2", report.markov.rho2},
                    {"y", report.markov.y},
                    {"m", report.markov.m},
                    {"sse", report.markov.sse}}},
        {"converged", report.converged},
        {"restarts", report.restarts},
        {"degenerate", report.degenerate},
        {"effectively_bernoullian", report.effectively_bernoullian},
    };
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_recover(const Flags& f) {
    const carom::P0Policy policy =
        f.sweep_p0 ? carom::P0Policy::sweep() : carom::P0Policy::fixed(f.p0);
    carom::SweepOptions opt;
    opt.grid = f.grid;
    opt.require_easy_type_ordering = !f.no_type_order;
    const carom::IntervalMatrix iv =
        carom::feasible_region(f.rho1, f.rho2, f.m, policy, opt);
    const carom::Mat2 c = iv.center();
    const carom::Mat2 w = iv.halfwidth();
    const std::vector<std::vector<std::string>> percent{
        {percent_pm(c.k11, w.k11), percent_pm(c.k12, w.k12)},
        {percent_pm(c.k21, w.k21), percent_pm(c.k22, w.k22)}};
    if (f.format == "text") {
        std::cout << percent[0][0] << "   " << percent[0][1] << "\n"
                  << percent[1][0] << "   " << percent[1][1] << "\n";
        return 0;
    }
    json out{
        {"rho1", f.rho1},
        {"rho2", f.rho2},
        {"m", f.m},
        {"p0", f.sweep_p0 ? json{{"policy", "swept"}}
                          : json{{"policy", "fixed"}, {"value", f.p0}}},
        {"grid", f.grid},
        {"n_feasible", iv.n_feasible},
        {"lo", matrix_json(iv.lo)},
        {"hi", matrix_json(iv.hi)},
        {"center", matrix_json(c)},
        {"halfwidth", matrix_json(w)},
        {"percent", percent},
    };
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const Flags& f) {
    const carom::MarkovModel mm(carom::Mat2{f.k11, f.k12, f.k21, f.k22}, f.p0);
    const carom::ScoreHistogram h =
        carom::simulate_histogram(mm, f.innings, f.seed, f.shards);
    std::cout << carom::format_histogram(h);
    return 0;
}

int cmd_surface(const Flags& f) {
    const carom::OpponentSurface surf =
        carom::opponent_surface(f.rho1, f.rho2, {f.dk1_min, f.dk1_max},
                                {f.dk2_min, f.dk2_max}, f.p0, f.surface_grid);
    carom::write_surface_csv(std::cout, surf);
    return 0;
}

int cmd_dedim(const Flags& f) {
    const carom::ScoreHistogram h = read_histogram(f.input);
    double lambda = f.lambda;
    if (lambda < 0.0) {
        const double m = carom::mean_score(h);
        lambda = m / (m + 1.0);
    }
    const carom::DedimCurve curve =
        carom::dedimensionalize(carom::empirical_survival(h), lambda);
    carom::write_dedim_csv(std::cout, curve);
    return 0;
}

int cmd_composite(const Flags& f) {
    std::vector<carom::ScoreHistogram> hs;
    hs.reserve(f.inputs.size());
    for (const std::string& path : f.inputs) hs.push_back(read_histogram(path));
    std::cout << carom::format_histogram(
        carom::composite(std::span<const carom::ScoreHistogram>(hs)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scoring-streak statistics for carom billiards"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* fit = app.add_subcommand(
        "fit", "fit Bernoulli and two-type Markov models to a score sheet");
    fit->add_option("input", f.input, "score-sheet file (score count per line)")
        ->required();
    fit->add_flag("--log-space", f.log_space, "least squares in log(mu) space");

    CLI::App* recover = app.add_subcommand(
        "recover", "feasible scoring-matrix intervals for (rho1, rho2, m)");
    recover->add_option("--rho1", f.rho1)->required();
    recover->add_option("--rho2", f.rho2)->required();
    recover->add_option("--m", f.m)->required();
    recover->add_option("--p0", f.p0, "fixed initial-difficulty probability")
        ->capture_default_str();
    recover->add_flag("--sweep-p0", f.sweep_p0, "sweep p0 over [0, 1] instead");
    recover->add_option("--grid", f.grid, "sweep resolution per axis")
        ->capture_default_str();
    recover->add_flag("--no-type-order", f.no_type_order,
                      "drop the kappa1 <= kappa2 easy-type convention");
    recover->add_option("--format", f.format, "json or text")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();

    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo score sheet from a model");
    simulate->add_option("--k11", f.k11)->required();
    simulate->add_option("--k12", f.k12)->required();
    simulate->add_option("--k21", f.k21)->required();
    simulate->add_option("--k22", f.k22)->required();
    simulate->add_option("--p0", f.p0)->capture_default_str();
    simulate->add_option("--innings", f.innings)->required();
    simulate->add_option("--seed", f.seed)->capture_default_str();
    simulate->add_option("--shards", f.shards,
                         "parallel shards (default: CAROM_THREADS or 1)");

    CLI::App* surface = app.add_subcommand(
        "surface", "average vs opponent surface over (dk1, dk2), as CSV");
    surface->add_option("--rho1", f.rho1)->required();
    surface->add_option("--rho2", f.rho2)->required();
    surface->add_option("--p0", f.p0)->capture_default_str();
    surface->add_option("--grid", f.surface_grid)->capture_default_str();
    surface->add_option("--dk1-min", f.dk1_min)->capture_default_str();
    surface->add_option("--dk1-max", f.dk1_max)->capture_default_str();
    surface->add_option("--dk2-min", f.dk2_min)->capture_default_str();
    surface->add_option("--dk2-max", f.dk2_max)->capture_default_str();

    CLI::App* dedim = app.add_subcommand(
        "dedim", "dedimensionalized survival curve (nu, mu), as CSV");
    dedim->add_option("input", f.input)->required();
    dedim->add_option("--lambda", f.lambda,
                      "rescaling rate (default: m/(m+1) from the input)");

    CLI::App* comp = app.add_subcommand("composite", "merge score sheets");
    comp->add_option("inputs", f.inputs)->required()->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : kExitUsage;
    }

    // domain checks on the parsed flags, ahead of any computation
    auto usage = [](const std::string& msg) {
        std::cerr << "usage error: " << msg << "\n";
        return kExitUsage;
    };
    if (recover->parsed() || surface->parsed()) {
        if (!(f.rho1 > 0.0) || !(f.rho1 < 1.0) || !(f.rho2 > 0.0) || !(f.rho2 < 1.0))
            return usage("rho1 and rho2 must be in (0, 1)");
        if (!(f.rho1 < f.rho2)) return usage("rho1 must be below rho2");
    }
    if (recover->parsed() && !(f.m > 0.0)) return usage("m must be positive");
    if (recover->parsed() && f.grid < 100) return usage("grid must be >= 100");
    if (surface->parsed() && f.surface_grid < 2) return usage("grid must be >= 2");
    if ((recover->parsed() || simulate->parsed() || surface->parsed()) &&
        (!(f.p0 >= 0.0) || f.p0 > 1.0))
        return usage("p0 must be in [0, 1]");
    if (simulate->parsed()) {
        for (double v : {f.k11, f.k12, f.k21, f.k22})
            if (!(v >= 0.0) || v > 1.0) return usage("matrix entries must be in [0, 1]");
        if (f.k11 + f.k21 > 1.0 || f.k12 + f.k22 > 1.0)
            return usage("matrix columns must sum to at most 1");
        if (f.innings < 1) return usage("innings must be >= 1");
        if (f.shards < 1) return usage("shards must be >= 1");
    }
    if (dedim->parsed() && f.lambda >= 0.0 && (f.lambda == 0.0 || f.lambda >= 1.0))
        return usage("lambda must be in (0, 1)");

    try {
        if (fit->parsed()) return cmd_fit(f);
        if (recover->parsed()) return cmd_recover(f);
        if (simulate->parsed()) return cmd_simulate(f);
        if (surface->parsed()) return cmd_surface(f);
        if (dedim->parsed()) return cmd_dedim(f);
        if (comp->parsed()) return cmd_composite(f);
    } catch (const carom::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const carom::FitConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
