#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>

#include "config.hpp"
#include "vclab/asymptotics.hpp"
#include "vclab/cli.hpp"
#include "vclab/csv.hpp"
#include "vclab/errors.hpp"
#include "vclab/montecarlo.hpp"
#include "vclab/recursion.hpp"

namespace vclab {

namespace {

using nlohmann::json;
using cli::Field;
using cli::Kind;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Output to a file, or to the given stream for "-".
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path) {
        if (path == "-") {
            stream_ = &fallback;
            return;
        }
        file_.open(path);
        if (!file_) throw ValidationError("cannot open output file '" + path + "'");
        stream_ = &file_;
    }
    std::ostream& operator*() { return *stream_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

std::string quoted_list(const std::vector<std::size_t>& dims) {
    std::string s;
    for (auto n : dims) s += (s.empty() ? "" : " ") + std::to_string(n);
    return s;
}

void script_header(std::ostream& gp, const json& config, std::uint64_t seed) {
    csv::write_header(gp, config, seed);
    gp << "set datafile separator ','\n"
       << "set datafile commentschars '#'\n";
}

TrialOptions trial_options(const json& config) {
    TrialOptions t;
    t.probe = probe_from_string(cli::get_text(config, "probe"));
    t.budget = cli::get_count(config, "budget", 1);
    t.threads = static_cast<unsigned>(cli::get_count(config, "threads", 0));
    return t;
}

std::size_t load_to_p(double alpha, std::size_t n) {
    const auto p = std::lround(alpha * static_cast<double>(n));
    if (p < 1) {
        std::ostringstream msg;
        msg << "load " << alpha << " gives p < 1 at n = " << n;
        throw ValidationError(msg.str());
    }
    return static_cast<std::size_t>(p);
}

void write_phase_header(std::ostream& out) {
    out << "mode,rho_or_kappa,n,p,alpha,trials,sat_fraction,stderr,mean_count,count_stderr,seed\n";
}

void write_phase_rows(std::ostream& out, const ScanTarget& target, std::size_t n,
                      const std::vector<PhasePoint>& points, std::uint64_t seed) {
    for (const auto& pt : points)
        out << to_string(target.mode) << ',' << csv::number(target.parameter()) << ',' << n << ','
            << pt.p << ',' << csv::number(pt.alpha) << ',' << pt.trials << ','
            << csv::number(pt.sat_fraction) << ',' << csv::number(pt.std_error) << ','
            << csv::number(pt.mean_count) << ',' << csv::number(pt.count_std_error) << ',' << seed
            << '\n';
}

// ---- count ---------------------------------------------------------------

std::vector<Field> count_fields() {
    return {
        {"structure", Kind::object, nullptr, "structure spec, e.g. {\"k\":2,\"rho\":0.5}"},
        {"rho", Kind::real, nullptr, "uniform pair overlap (shorthand for k=2)"},
        {"n", Kind::int_list, json::array({3, 4, 5}), "dimensions, comma separated"},
        {"alpha", Kind::grid, "0.2..6", "loads: a..b (integer p), a..b:step or a list"},
        {"source", Kind::text, "recursion", "recursion, montecarlo or both"},
        {"trials", Kind::integer, 200, "Monte Carlo trials per point"},
        {"seed", Kind::integer, 1, "master seed"},
        {"margin", Kind::real, 0.0, "margin for Monte Carlo counts"},
        {"probe", Kind::text, "auto", "auto, enumeration, arrangement or random-classifier"},
        {"budget", Kind::integer, static_cast<int>(kDefaultEnumerationBudget),
         "largest p for sign enumeration"},
        {"threads", Kind::integer, 0, "worker threads (0: all cores)"},
        {"out", Kind::text, "-", "entropy CSV path (- for stdout)"},
        {"plot", Kind::text, nullptr, "gnuplot script path"},
        {"table", Kind::text, nullptr, "full recursion table CSV path"},
        {"summary", Kind::text, nullptr, "recursion table JSON summary path"},
    };
}

int cmd_count(const json& config, std::ostream& out, std::ostream& err) {
    const auto spec = cli::get_structure(config);
    const auto dims = cli::get_dims(config, "n");
    const auto grid = cli::parse_grid(config.at("alpha"), "alpha");
    const auto source = cli::get_text(config, "source");
    if (source != "recursion" && source != "montecarlo" && source != "both")
        throw ValidationError("field 'source' must be recursion, montecarlo or both");
    const bool use_recursion = source != "montecarlo";
    const bool use_mc = source != "recursion";
    const double margin = cli::get_real(config, "margin");
    if (margin < 0.0) throw ValidationError("field 'margin' must be nonnegative");
    if (use_recursion && margin > 0.0)
        throw ValidationError("the recursion counts zero-margin dichotomies; use source=montecarlo");
    const auto seed = cli::get_seed(config);
    const auto shown = cli::echoed(config);

    std::vector<std::vector<std::size_t>> loads;
    std::size_t p_max = 1;
    for (auto n : dims) {
        std::vector<std::size_t> ps;
        for (double a : grid.loads(n)) ps.push_back(load_to_p(a, n));
        if (ps.empty()) throw ValidationError("field 'alpha': empty load grid for n = " + std::to_string(n));
        p_max = std::max(p_max, *std::max_element(ps.begin(), ps.end()));
        loads.push_back(std::move(ps));
    }
    const std::size_t n_max = *std::max_element(dims.begin(), dims.end());

    std::unique_ptr<CountTable> table;
    if (use_recursion)
        table = std::make_unique<CountTable>(theta_coefficients(spec), static_cast<int>(n_max),
                                             static_cast<int>(p_max));

    Sink sink(cli::get_text(config, "out"), out);
    csv::write_header(*sink, shown, seed);
    *sink << "source,n,p,alpha,entropy,std_error\n";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto n = dims[i];
        for (auto p : loads[i]) {
            const double alpha = static_cast<double>(p) / static_cast<double>(n);
            if (use_recursion)
                *sink << "recursion," << n << ',' << p << ',' << csv::number(alpha) << ','
                      << csv::number(vc_entropy(*table, static_cast<int>(n), static_cast<int>(p)))
                      << ",0\n";
            if (use_mc) {
                const auto trials = cli::get_count(config, "trials", 2);
                // Each (n, p) cell gets its own stream of master seeds.
                const std::uint64_t cell_seed = seed ^ (std::uint64_t{n} << 40) ^ (std::uint64_t{p} << 20);
                const auto est =
                    estimate_mean_count(spec, n, p, trials, cell_seed, margin, trial_options(config));
                const double h = est.value > 0.0 ? std::log(est.value) : -std::numeric_limits<double>::infinity();
                const double se = est.value > 0.0 ? est.std_error / est.value : kNaN;
                *sink << "montecarlo," << n << ',' << p << ',' << csv::number(alpha) << ','
                      << csv::number(h) << ',' << csv::number(se) << '\n';
            }
        }
    }

    if (cli::has(config, "table")) {
        if (!table) throw ValidationError("field 'table' needs the recursion source");
        Sink t(cli::get_text(config, "table"), out);
        csv::write_header(*t, shown, seed);
        write_table_csv(*t, *table);
    }
    if (cli::has(config, "summary")) {
        if (!table) throw ValidationError("field 'summary' needs the recursion source");
        Sink s(cli::get_text(config, "summary"), out);
        auto j = table_summary(*table);
        j["tool"] = std::string("vclab ") + csv::kToolVersion;
        j["config"] = shown;
        j["seed"] = seed;
        *s << j.dump(2) << '\n';
    }
    if (cli::has(config, "plot")) {
        if (sink.path() == "-") throw ValidationError("field 'plot' needs 'out' to be a file");
        Sink gp(cli::get_text(config, "plot"), out);
        script_header(*gp, shown, seed);
        *gp << "set xlabel 'alpha = p/n'\n"
            << "set ylabel 'H = log C'\n"
            << "set key top right\n"
            << "dims = \"" << quoted_list(dims) << "\"\n"
            << "plot \\\n";
        if (use_recursion)
            *gp << "  for [d in dims] '" << sink.path()
                << "' using 4:((strcol(1) eq 'recursion' && $2 == d+0) ? $5 : 1/0) "
                   "with lines dashtype 2 title 'n='.d"
                << (use_mc ? ", \\\n" : "\n");
        if (use_mc)
            *gp << "  for [d in dims] '" << sink.path()
                << "' using 4:((strcol(1) eq 'montecarlo' && $2 == d+0) ? $5 : 1/0):6 "
                   "with yerrorbars pointtype 7 title 'MC n='.d\n";
    }
    (void)err;
    return 0;
}

// ---- phase-diagram -----------------------------------------------------------

std::vector<Field> phase_fields() {
    return {
        {"rho", Kind::real_list, "0..0.8:0.1", "overlaps: a..b:step or a list, in [0, 1)"},
        {"pairs", Kind::text, "40:20,6:3", "recursion crossing pairs n1:n2, comma separated"},
        {"mc-n", Kind::integer, 3, "dimension of the Monte Carlo layer"},
        {"mc-alpha", Kind::grid, "0.5..24", "Monte Carlo loads"},
        {"mc-trials", Kind::integer, 100, "Monte Carlo trials per point (0 skips the layer)"},
        {"seed", Kind::integer, 1, "master seed"},
        {"probe", Kind::text, "auto", "auto, enumeration, arrangement or random-classifier"},
        {"budget", Kind::integer, static_cast<int>(kDefaultEnumerationBudget),
         "largest p for sign enumeration"},
        {"threads", Kind::integer, 0, "worker threads (0: all cores)"},
        {"out", Kind::text, "phase", "output prefix"},
        {"plot", Kind::flag, true, "write <out>.gp"},
        {"quiet", Kind::flag, false, "no progress output"},
    };
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
    std::vector<std::pair<int, int>> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ValidationError("field 'pairs': expected n1:n2, got '" + item + "'");
        try {
            const int a = std::stoi(item.substr(0, colon));
            const int b = std::stoi(item.substr(colon + 1));
            if (a < 1 || b < 1 || a == b) throw ValidationError("");
            out.emplace_back(a, b);
        } catch (const std::exception&) {
            throw ValidationError("field 'pairs': expected distinct positive n1:n2, got '" + item + "'");
        }
    }
    return out;
}

int cmd_phase_diagram(const json& config, std::ostream& out, std::ostream& err) {
    const auto rhos = cli::parse_real_list(config.at("rho"), "rho");
    for (double rho : rhos)
        if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("field 'rho': values must lie in [0, 1)");
    const auto pairs = parse_pairs(cli::get_text(config, "pairs"));
    const auto mc_n = cli::get_count(config, "mc-n", 2);
    const auto mc_grid = cli::parse_grid(config.at("mc-alpha"), "mc-alpha");
    const auto mc_trials = cli::get_count(config, "mc-trials", 0);
    const auto seed = cli::get_seed(config);
    const auto prefix = cli::get_text(config, "out");
    const bool quiet = config.at("quiet").get<bool>();
    const auto shown = cli::echoed(config);

    Sink thresholds(prefix + "_thresholds.csv", out);
    csv::write_header(*thresholds, shown, seed);
    *thresholds << "rho,alpha_star,method,residual\n";
    Sink crossings(prefix + "_crossings.csv", out);
    csv::write_header(*crossings, shown, seed);
    *crossings << "rho,source,n1,n2,alpha,stderr\n";

    std::unique_ptr<Sink> mc;
    if (mc_trials > 0) {
        mc = std::make_unique<Sink>(prefix + "_mc.csv", out);
        csv::write_header(**mc, shown, seed);
        write_phase_header(**mc);
    }

    for (std::size_t r = 0; r < rhos.size(); ++r) {
        const double rho = rhos[r];
        const double psi = psi2(rho);
        const auto theta = make_theta({psi, 1.0, 1.0 - psi});
        const auto combinatorial = transition_load(psi, 1.0);
        const auto annealed = annealed_threshold_pairs(rho);
        for (const auto& t : {combinatorial, annealed})
            *thresholds << csv::number(rho) << ',' << csv::number(t.alpha_star) << ','
                        << to_string(t.method) << ',' << csv::number(t.residual) << '\n';

        for (auto [n1, n2] : pairs) {
            const AlphaWindow window{1.0, 3.0 * combinatorial.alpha_star + 5.0};
            double cross = kNaN;
            try {
                cross = crossing_load(theta, n1, n2, window);
            } catch (const NoCrossing&) {
            }
            *crossings << csv::number(rho) << ",recursion," << n1 << ',' << n2 << ','
                       << csv::number(cross) << ",0\n";
        }

        if (mc) {
            ScanOptions options;
            options.trials = trial_options(config);
            if (!quiet)
                options.progress = [&](std::size_t, const PhasePoint& pt) {
                    err << "[phase-diagram] rho=" << rho << " alpha=" << pt.alpha
                        << " sat=" << pt.sat_fraction << '\n';
                };
            const auto target = ScanTarget::pairs(StructureSpec::pair(rho));
            const auto grid = mc_grid.loads(mc_n);
            // Each rho gets its own master seed so layers stay independent.
            const std::uint64_t rho_seed = seed + 0x9e3779b97f4a7c15ull * r;
            const auto points = sat_fraction_scan(target, mc_n, grid, mc_trials, rho_seed, options);
            write_phase_rows(**mc, target, mc_n, points, rho_seed);
            double alpha = kNaN, se = kNaN;
            try {
                const auto c = crossover_load(points);
                alpha = c.alpha;
                se = c.std_error;
            } catch (const NoCrossing&) {
            }
            *crossings << csv::number(rho) << ",montecarlo," << mc_n << ",0," << csv::number(alpha)
                       << ',' << csv::number(se) << '\n';
        }
    }

    if (config.at("plot").get<bool>()) {
        Sink gp(prefix + ".gp", out);
        script_header(*gp, shown, seed);
        const std::string th = prefix + "_thresholds.csv";
        const std::string cr = prefix + "_crossings.csv";
        *gp << "set xlabel 'rho'\n"
            << "set ylabel 'alpha'\n"
            << "set key top left\n"
            << "plot '" << th << "' using 1:((strcol(3) eq 'combinatorial') ? $2 : 1/0) "
            << "with lines dashtype 2 title 'alpha*', \\\n"
            << "  '" << th << "' using 1:((strcol(3) eq 'annealed-pairs') ? $2 : 1/0) "
            << "with lines dashtype 3 title 'annealed', \\\n";
        for (std::size_t i = 0; i < pairs.size(); ++i)
            *gp << "  '" << cr << "' using 1:((strcol(2) eq 'recursion' && $3 == " << pairs[i].first
                << " && $4 == " << pairs[i].second << ") ? $5 : 1/0) with points pointtype "
                << (6 + 2 * i) << " title 'crossing " << pairs[i].first << "/" << pairs[i].second
                << "'" << (i + 1 < pairs.size() || mc ? ", \\\n" : "\n");
        if (mc)
            *gp << "  '" << cr << "' using 1:((strcol(2) eq 'montecarlo') ? $5 : 1/0):6 "
                << "with yerrorbars pointtype 7 title 'MC n=" << mc_n << "'\n";
    }
    return 0;
}

// ---- transition --------------------------------------------------------------

std::vector<Field> transition_fields() {
    return {
        {"rho", Kind::real_list, nullptr, "pair overlap(s)"},
        {"theta0", Kind::real, nullptr, "theta_0 directly (instead of rho)"},
        {"theta1", Kind::real, 1.0, "theta_1"},
        {"kappa", Kind::real_list, nullptr, "margin(s) for the annealed margin threshold"},
        {"method", Kind::text, nullptr, "combinatorial, annealed-pairs or annealed-margin"},
        {"format", Kind::text, "json", "json or csv"},
    };
}

json error_object(const std::string& kind, const std::string& message) {
    return {{"error", kind}, {"message", message}};
}

int cmd_transition(const json& config, std::ostream& out, std::ostream&) {
    const bool by_rho = cli::has(config, "rho");
    const bool by_theta = cli::has(config, "theta0");
    const bool by_kappa = cli::has(config, "kappa");
    if (by_rho + by_theta + by_kappa != 1)
        throw ValidationError("give exactly one of 'rho', 'theta0' or 'kappa'");
    std::string method = cli::has(config, "method") ? cli::get_text(config, "method")
                                                   : (by_kappa ? "annealed-margin" : "combinatorial");
    if (method != "combinatorial" && method != "annealed-pairs" && method != "annealed-margin")
        throw ValidationError("field 'method' must be combinatorial, annealed-pairs or annealed-margin");
    if (by_kappa != (method == "annealed-margin"))
        throw ValidationError("method '" + method + "' does not take " +
                              (by_kappa ? "'kappa'" : "an overlap"));
    if (by_theta && method != "combinatorial")
        throw ValidationError("'theta0' only works with the combinatorial method");
    const auto format = cli::get_text(config, "format");
    if (format != "json" && format != "csv") throw ValidationError("field 'format' must be json or csv");

    std::vector<double> params;
    if (by_theta) params.push_back(cli::get_real(config, "theta0"));
    else params = cli::parse_real_list(config.at(by_kappa ? "kappa" : "rho"), by_kappa ? "kappa" : "rho");
    const double theta1 = cli::get_real(config, "theta1");

    const auto solve = [&](double x) {
        if (method == "annealed-margin") return annealed_threshold_margin(x);
        if (method == "annealed-pairs") return annealed_threshold_pairs(x);
        if (by_theta) return transition_load(x, theta1);
        if (!(x >= -1.0 && x <= 1.0)) throw DomainError("overlap must lie in [-1, 1]");
        return transition_load(psi2(x), theta1);
    };

    int code = 0;
    json results = json::array();
    std::vector<std::string> rows;
    for (double x : params) {
        try {
            const auto r = solve(x);
            results.push_back(to_json(r));
            rows.push_back(csv::number(x) + ',' + csv::number(r.alpha_star) + ',' +
                           to_string(r.method) + ',' + csv::number(r.residual));
        } catch (const NoTransition& e) {
            code = 2;
            results.push_back(error_object("no-transition", e.what()));
            rows.push_back(csv::number(x) + ",inf," + method + ",nan");
        } catch (const DomainError& e) {
            code = std::max(code, 1);
            results.push_back(error_object("domain", e.what()));
            rows.push_back(csv::number(x) + ",nan," + method + ",nan");
        }
    }
    if (format == "csv") {
        csv::write_header(out, cli::echoed(config), 0);
        out << (by_kappa ? "kappa" : by_theta ? "theta0" : "rho") << ",alpha_star,method,residual\n";
        for (const auto& row : rows) out << row << '\n';
    } else {
        out << (results.size() == 1 ? results[0] : results).dump(2) << '\n';
    }
    return code;
}

// ---- mc ------------------------------------------------------------------------

std::vector<Field> mc_fields() {
    return {
        {"mode", Kind::text, "pairs", "pairs or margin"},
        {"structure", Kind::object, nullptr, "structure spec (pairs mode)"},
        {"rho", Kind::real, nullptr, "uniform pair overlap (pairs mode)"},
        {"kappa", Kind::real, nullptr, "margin (margin mode)"},
        {"n", Kind::integer, 3, "dimension"},
        {"alpha", Kind::grid, "1..8", "loads: a..b (integer p), a..b:step or a list"},
        {"trials", Kind::integer, 1000, "trials per load"},
        {"seed", Kind::integer, 1, "master seed"},
        {"probe", Kind::text, "auto", "auto, enumeration, arrangement or random-classifier"},
        {"budget", Kind::integer, static_cast<int>(kDefaultEnumerationBudget),
         "largest p for sign enumeration"},
        {"counts", Kind::flag, false, "also estimate mean admissible counts"},
        {"threads", Kind::integer, 0, "worker threads (0: all cores)"},
        {"out", Kind::text, "-", "CSV path (- for stdout)"},
        {"plot", Kind::text, nullptr, "gnuplot script path"},
        {"quiet", Kind::flag, false, "no progress output"},
    };
}

int cmd_mc(const json& config, std::ostream& out, std::ostream& err) {
    const auto mode = cli::get_text(config, "mode");
    const auto trials = cli::get_count(config, "trials", 1);
    const auto n = cli::get_count(config, "n", 1);
    const auto seed = cli::get_seed(config);
    std::unique_ptr<ScanTarget> target;
    if (mode == "pairs") {
        if (cli::has(config, "kappa")) throw ValidationError("pairs mode takes no 'kappa'");
        if (!cli::has(config, "rho") && !cli::has(config, "structure"))
            throw ValidationError("pairs mode needs 'rho' or 'structure'");
        target = std::make_unique<ScanTarget>(ScanTarget::pairs(cli::get_structure(config)));
    } else if (mode == "margin") {
        if (cli::has(config, "rho") || cli::has(config, "structure"))
            throw ValidationError("margin mode samples single points; drop 'rho'/'structure'");
        target = std::make_unique<ScanTarget>(ScanTarget::margin(cli::get_real(config, "kappa")));
    } else {
        throw ValidationError("field 'mode' must be pairs or margin");
    }
    const auto grid = cli::parse_grid(config.at("alpha"), "alpha").loads(n);
    if (grid.empty()) throw ValidationError("field 'alpha': empty load grid");

    ScanOptions options;
    options.trials = trial_options(config);
    options.with_counts = config.at("counts").get<bool>();
    if (!config.at("quiet").get<bool>())
        options.progress = [&](std::size_t i, const PhasePoint& pt) {
            err << "[mc] " << (i + 1) << '/' << grid.size() << " alpha=" << pt.alpha
                << " p=" << pt.p << " sat=" << pt.sat_fraction << '\n';
        };
    std::vector<PhasePoint> points;
    try {
        points = sat_fraction_scan(*target, n, grid, trials, seed, options);
    } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(std::string(e.what()) +
                             "; rerun with --probe random-classifier for a lower bound");
    }

    const auto shown = cli::echoed(config);
    Sink sink(cli::get_text(config, "out"), out);
    csv::write_header(*sink, shown, seed);
    write_phase_header(*sink);
    write_phase_rows(*sink, *target, n, points, seed);

    try {
        const auto c = crossover_load(points);
        err << "[mc] crossover alpha=" << csv::number(c.alpha) << " stderr=" << csv::number(c.std_error)
            << '\n';
    } catch (const NoCrossing&) {
        err << "[mc] sat fraction stays above 1/2 on this grid\n";
    }

    if (cli::has(config, "plot")) {
        if (sink.path() == "-") throw ValidationError("field 'plot' needs 'out' to be a file");
        Sink gp(cli::get_text(config, "plot"), out);
        script_header(*gp, shown, seed);
        *gp << "set xlabel 'alpha'\n"
            << "set ylabel 'SAT fraction'\n"
            << "set yrange [0:1.05]\n"
            << "plot '" << sink.path() << "' using 5:7:8 with yerrorbars pointtype 7 title '"
            << mode << ' ' << csv::number(target->parameter()) << "'\n";
    }
    return 0;
}

// ---- fss -------------------------------------------------------------------------

std::vector<Field> fss_fields() {
    return {
        {"rho", Kind::real, nullptr, "pair overlap (sets theta)"},
        {"theta0", Kind::real, nullptr, "theta_0 directly"},
        {"theta1", Kind::real, 1.0, "theta_1"},
        {"alpha-star", Kind::real, nullptr, "transition load (default: computed from theta)"},
        {"n", Kind::int_list, json::array({50, 100, 200}), "dimensions"},
        {"x", Kind::real_list, "-4..4:0.1", "rescaled loads x = (alpha/alpha* - 1) n^(1/nu)"},
        {"beta", Kind::real, 0.5, "exponent beta"},
        {"nu", Kind::real, 1.0, "exponent nu"},
        {"source", Kind::text, "asymptotic", "asymptotic or recursion"},
        {"out", Kind::text, "-", "CSV path (- for stdout)"},
        {"plot", Kind::text, nullptr, "gnuplot script path"},
    };
}

int cmd_fss(const json& config, std::ostream& out, std::ostream&) {
    if (cli::has(config, "rho") && cli::has(config, "theta0"))
        throw ValidationError("give either 'rho' or 'theta0', not both");
    if (!cli::has(config, "rho") && !cli::has(config, "theta0"))
        throw ValidationError(cli::has(config, "alpha-star")
                                  ? "fss needs 'rho' or 'theta0' to evaluate the curves"
                                  : "fss needs 'alpha-star' or a 'rho'/'theta0' to locate the transition");
    double theta0 = 0.0;
    if (cli::has(config, "rho")) {
        const double rho = cli::get_real(config, "rho");
        if (!(rho >= -1.0 && rho <= 1.0)) throw ValidationError("field 'rho' must lie in [-1, 1]");
        theta0 = psi2(rho);
    } else {
        theta0 = cli::get_real(config, "theta0");
    }
    const double theta1 = cli::get_real(config, "theta1");
    const double alpha_star = cli::has(config, "alpha-star") ? cli::get_real(config, "alpha-star")
                                                             : transition_load(theta0, theta1).alpha_star;
    const ScalingExponents exps{cli::get_real(config, "beta"), cli::get_real(config, "nu")};
    if (!(exps.nu > 0.0)) throw ValidationError("field 'nu' must be positive");
    const auto dims = cli::get_dims(config, "n");
    const auto xs = cli::parse_real_list(config.at("x"), "x");
    const auto source = cli::get_text(config, "source");
    if (source != "asymptotic" && source != "recursion")
        throw ValidationError("field 'source' must be asymptotic or recursion");

    std::unique_ptr<CountTable> table;
    if (source == "recursion") {
        const auto n_max = *std::max_element(dims.begin(), dims.end());
        const double x_max = *std::max_element(xs.begin(), xs.end());
        const double alpha_max = alpha_star * (1.0 + std::max(0.0, x_max));
        table = std::make_unique<CountTable>(make_theta({theta0, theta1, 1.0 - theta0}),
                                             static_cast<int>(n_max),
                                             static_cast<int>(std::ceil(alpha_max * n_max)) + 1);
    }

    std::vector<CurvePoint> curve;
    for (auto n : dims) {
        const double nd = static_cast<double>(n);
        for (double x : xs) {
            const double alpha = alpha_star * (1.0 + x / std::pow(nd, 1.0 / exps.nu));
            if (alpha * nd < 1.0) continue;
            const double lc = table ? table->interpolated_log_count(static_cast<int>(n), alpha)
                                    : asymptotic_log_count(alpha, nd, theta0, theta1);
            curve.push_back({nd, alpha, lc});
        }
    }
    const auto collapse = fss_rescale(curve, alpha_star, exps);

    auto shown = cli::echoed(config);
    shown["alpha-star"] = alpha_star;
    Sink sink(cli::get_text(config, "out"), out);
    csv::write_header(*sink, shown, 0);
    *sink << "# collapse_score: " << csv::number(collapse.score) << '\n';
    *sink << "n,alpha,log_count,x,log_y\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        *sink << static_cast<std::size_t>(curve[i].n) << ',' << csv::number(curve[i].alpha) << ','
              << csv::number(curve[i].log_count) << ',' << csv::number(collapse.points[i].x) << ','
              << csv::number(collapse.points[i].log_y) << '\n';
    if (sink.path() != "-")
        out << json{{"alpha_star", alpha_star}, {"collapse_score", collapse.score}}.dump() << '\n';

    if (cli::has(config, "plot")) {
        if (sink.path() == "-") throw ValidationError("field 'plot' needs 'out' to be a file");
        Sink gp(cli::get_text(config, "plot"), out);
        script_header(*gp, shown, 0);
        *gp << "set xlabel 'x'\n"
            << "set ylabel 'log C + (beta/nu) log n'\n"
            << "dims = \"" << quoted_list(dims) << "\"\n"
            << "plot for [d in dims] '" << sink.path()
            << "' using 4:($1 == d+0 ? $5 : 1/0) with lines title 'n='.d\n";
    }
    return 0;
}

// ---- psi -------------------------------------------------------------------------

std::vector<Field> psi_fields() {
    return {
        {"structure", Kind::object, nullptr, "structure spec"},
        {"rho", Kind::real, nullptr, "uniform pair overlap"},
        {"m", Kind::int_list, nullptr, "subset sizes (default 2..k)"},
        {"n", Kind::integer, nullptr, "ambient dimension (default k)"},
        {"samples", Kind::integer, 100000, "Monte Carlo samples"},
        {"seed", Kind::integer, 1, "master seed"},
        {"out", Kind::text, "-", "CSV path (- for stdout)"},
    };
}

int cmd_psi(const json& config, std::ostream& out, std::ostream&) {
    if (!cli::has(config, "structure") && !cli::has(config, "rho"))
        throw ValidationError("psi needs 'structure' or 'rho'");
    const auto spec = cli::get_structure(config);
    const std::size_t k = spec.k();
    if (k < 2) throw ValidationError("psi needs a multiplet with k >= 2");
    std::vector<std::size_t> ms;
    if (cli::has(config, "m")) ms = cli::get_dims(config, "m");
    else
        for (std::size_t m = 2; m <= k; ++m) ms.push_back(m);
    for (auto m : ms)
        if (m < 2 || m > k) throw ValidationError("field 'm': sizes must lie in [2, k]");
    const std::size_t n = cli::has(config, "n") ? cli::get_count(config, "n", 1) : k;
    if (n < k) throw ValidationError("field 'n' must be at least k");
    const auto samples = cli::get_count(config, "samples", 1);
    const auto seed = cli::get_seed(config);

    Sink sink(cli::get_text(config, "out"), out);
    csv::write_header(*sink, cli::echoed(config), seed);
    *sink << "m,psi,std_error,closed_form\n";
    for (auto m : ms) {
        Rng rng(seed, m);
        const auto est = psi_m_estimate(spec, m, n, samples, rng);
        const double closed = (k == 2 && m == 2) ? psi2(spec.pair_overlap()) : kNaN;
        *sink << m << ',' << csv::number(est.value) << ',' << csv::number(est.std_error) << ','
              << csv::number(closed) << '\n';
    }
    return 0;
}

struct Command {
    const char* name;
    const char* description;
    std::vector<Field> (*fields)();
    int (*run)(const json&, std::ostream&, std::ostream&);
};

const Command kCommands[] = {
    {"count", "entropy curves H(n, alpha n) from the recursion and/or Monte Carlo", count_fields,
     cmd_count},
    {"phase-diagram", "transition loads, crossings and SAT points against rho", phase_fields,
     cmd_phase_diagram},
    {"transition", "transition load as JSON (or CSV for a list)", transition_fields, cmd_transition},
    {"mc", "SAT fraction scan at fixed n", mc_fields, cmd_mc},
    {"fss", "finite-size rescaling and collapse score", fss_fields, cmd_fss},
    {"psi", "estimate psi_m for a structure", psi_fields, cmd_psi},
};

int exit_code(const std::exception& e) {
    if (dynamic_cast<const NoTransition*>(&e) || dynamic_cast<const BracketError*>(&e)) return 2;
    if (dynamic_cast<const BudgetExceeded*>(&e)) return 3;
    return 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"vclab: VC entropy of linear classifiers on structured data"};
    app.set_version_flag("--version", std::string("vclab ") + csv::kToolVersion);
    app.require_subcommand(1);

    std::vector<std::unique_ptr<cli::Options>> options;
    std::vector<CLI::App*> subs;
    for (const auto& c : kCommands) {
        auto* sub = app.add_subcommand(c.name, c.description);
        options.push_back(std::make_unique<cli::Options>(*sub, c.fields()));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        const std::string name = kCommands[i].name;
        try {
            const auto config = options[i]->resolve();
            return kCommands[i].run(config, out, err);
        } catch (const std::exception& e) {
            const int code = exit_code(e);
            if (name == "transition")
                out << error_object(code == 2 ? "no-transition" : code == 3 ? "budget" : "validation",
                                    e.what())
                           .dump(2)
                    << '\n';
            else
                err << "vclab " << name << ": " << e.what() << '\n';
            return code;
        }
    }
    return 1;
}

}  // namespace vclab
