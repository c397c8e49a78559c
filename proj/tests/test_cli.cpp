#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vclab/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "vclab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = vclab::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "vclab_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Data rows of a CSV with '#' comments, split on commas.
std::vector<std::vector<std::string>> rows(const std::string& text) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream cs(line);
        std::string cell;
        while (std::getline(cs, cell, ',')) cells.push_back(cell);
        out.push_back(cells);
    }
    return out;
}

}  // namespace

TEST_CASE("transition command") {
    auto r = run({"transition", "--rho", "0"});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["alpha_star"].get<double>() == doctest::Approx(4.86).epsilon(0.002));
    CHECK(j["method"] == "combinatorial");

    r = run({"transition", "--rho", "1"});
    CHECK(r.code == 2);
    j = nlohmann::json::parse(r.out);
    CHECK(j["error"] == "no-transition");

    r = run({"transition", "--kappa", "1", "--method", "annealed-margin"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["alpha_star"].get<double>() ==
          doctest::Approx(0.7672).epsilon(1e-4));

    r = run({"transition", "--rho", "0", "--method", "annealed-pairs"});
    CHECK(nlohmann::json::parse(r.out)["alpha_star"].get<double>() ==
          doctest::Approx(2.047).epsilon(1e-3));

    CHECK(run({"transition", "--kappa", "0"}).code == 2);
    CHECK(run({"transition"}).code == 1);
    CHECK(run({"transition", "--rho", "0", "--kappa", "1"}).code == 1);
    CHECK(run({"transition", "--rho", "0", "--method", "eq4"}).code == 1);

    r = run({"transition", "--rho", "0..0.8:0.2", "--format", "csv"});
    CHECK(r.code == 0);
    const auto table = rows(r.out);
    REQUIRE(table.size() == 5);
    CHECK(table[4][2] == "combinatorial");
}

TEST_CASE("count command") {
    auto r = run({"count", "--n", "3,4,5", "--alpha", "0.2..8"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# vclab ", 0) == 0);
    CHECK(r.out.find("# seed: 1\n") != std::string::npos);
    std::map<std::string, double> last;
    for (const auto& row : rows(r.out)) {
        const double h = std::stod(row[4]);
        if (last.count(row[1])) CHECK(h > last[row[1]]);
        last[row[1]] = h;
    }

    // Structured entropy falls again at large loads.
    r = run({"count", "--rho", "0.5", "--n", "5", "--alpha", "0.2..10"});
    REQUIRE(r.code == 0);
    const auto pts = rows(r.out);
    CHECK(std::stod(pts.back()[4]) < std::log(2.0));

    CHECK(run({"count", "--alpha", ""}).code == 1);
    CHECK(run({"count", "--structure", "{\"k\":3,\"rho\":0.2}"}).code == 1);
    CHECK(run({"count", "--margin", "0.1"}).code == 1);

    r = run({"count", "--rho", "0.5", "--n", "3", "--alpha", "1..2", "--source", "both",
             "--trials", "50"});
    REQUIRE(r.code == 0);
    CHECK(rows(r.out).size() == 8);

    const auto csv = scratch("count.csv");
    const auto gp = scratch("count.gp");
    const auto table = scratch("table.csv");
    const auto summary = scratch("summary.json");
    r = run({"count", "--out", csv.string(), "--plot", gp.string(), "--table", table.string(),
             "--summary", summary.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(gp).find(csv.string()) != std::string::npos);
    CHECK(slurp(table).find("n,p,alpha,log_count\n") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(summary));
    CHECK(j.contains("checksum"));
    CHECK(j["seed"] == 1);
}

TEST_CASE("config precedence and diagnostics") {
    const auto path = scratch("config.json");
    {
        std::ofstream out(path);
        out << "{\n  \"trials\": 7,\n  \"seed\": 5,\n  \"rho\": 0.5,\n  \"alpha\": \"1..2\"\n}\n";
    }
    auto r = run({"mc", "--config", path.string(), "--seed", "9", "--quiet"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"trials\":7") != std::string::npos);
    CHECK(r.out.find("\"seed\":9") != std::string::npos);
    CHECK(r.out.find("# seed: 9\n") != std::string::npos);
    for (const auto& row : rows(r.out)) {
        CHECK(row[5] == "7");
        CHECK(row[10] == "9");
    }

    {
        std::ofstream out(path);
        out << "{\n  \"trials\": 7,\n  \"seed\": ,\n}\n";
    }
    r = run({"mc", "--config", path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find(":3:") != std::string::npos);

    {
        std::ofstream out(path);
        out << "{\"trails\": 7}";
    }
    r = run({"mc", "--config", path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("trails") != std::string::npos);

    {
        std::ofstream out(path);
        out << "{\"trials\": \"many\"}";
    }
    r = run({"mc", "--config", path.string(), "--rho", "0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("trials") != std::string::npos);
}

TEST_CASE("mc command") {
    CHECK(run({"mc", "--rho", "0.5", "--trials", "0"}).code == 1);
    CHECK(run({"mc", "--trials", "10"}).code == 1);
    CHECK(run({"mc", "--mode", "margin", "--rho", "0.5"}).code == 1);

    auto r = run({"mc", "--rho", "0.5", "--alpha", "10", "--trials", "2", "--probe", "enumeration",
                  "--quiet"});
    CHECK(r.code == 3);
    CHECK(r.err.find("random-classifier") != std::string::npos);

    const std::vector<std::string> base{"mc", "--rho", "0.5", "--n", "3", "--alpha", "1..6",
                                        "--trials", "40", "--seed", "11", "--quiet"};
    auto one = base;
    one.insert(one.end(), {"--threads", "1"});
    auto three = base;
    three.insert(three.end(), {"--threads", "3"});
    const auto a = run(one);
    const auto b = run(three);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(run(one).out == a.out);

    const auto pts = rows(a.out);
    CHECK(pts.front()[0] == "pairs");
    CHECK(std::stod(pts.front()[6]) >= std::stod(pts.back()[6]));

    r = run({"mc", "--mode", "margin", "--kappa", "1", "--alpha", "0.5,1,2", "--trials", "20",
             "--counts"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("[mc] 3/3") != std::string::npos);
    CHECK(rows(r.out)[0][1] == "1");
    CHECK(rows(r.out)[0][8] != "nan");
}

TEST_CASE("fss command") {
    CHECK(run({"fss"}).code == 1);
    CHECK(run({"fss", "--alpha-star", "4.86"}).code == 1);

    const auto good = scratch("fss.csv");
    const auto flat = scratch("fss0.csv");
    auto r = run({"fss", "--rho", "0", "--out", good.string()});
    REQUIRE(r.code == 0);
    const double score = nlohmann::json::parse(r.out)["collapse_score"].get<double>();
    r = run({"fss", "--rho", "0", "--beta", "0", "--out", flat.string()});
    const double control = nlohmann::json::parse(r.out)["collapse_score"].get<double>();
    CHECK(score * 5.0 <= control);
    CHECK(slurp(good).find("# collapse_score: ") != std::string::npos);

    r = run({"fss", "--theta0", "0.5", "--n", "20,40", "--source", "recursion", "--x", "-2..2:0.5"});
    CHECK(r.code == 0);
    CHECK(rows(r.out).size() == 18);
}

TEST_CASE("psi command") {
    auto r = run({"psi", "--rho", "0.5", "--samples", "20000"});
    REQUIRE(r.code == 0);
    const auto pts = rows(r.out);
    REQUIRE(pts.size() == 1);
    CHECK(std::stod(pts[0][1]) == doctest::Approx(2.0 / 3.0).epsilon(0.02));
    CHECK(run({"psi"}).code == 1);
    CHECK(run({"psi", "--rho", "0.5", "--m", "3"}).code == 1);
}

TEST_CASE("phase-diagram command") {
    const auto prefix = scratch("phase").string();
    auto r = run({"phase-diagram", "--rho", "0,0.4,0.8", "--mc-trials", "20", "--mc-alpha",
                  "1..12", "--out", prefix, "--quiet"});
    REQUIRE(r.code == 0);
    const auto thresholds = rows(slurp(prefix + "_thresholds.csv"));
    REQUIRE(thresholds.size() == 6);
    for (std::size_t i = 0; i < thresholds.size(); i += 2)
        CHECK(std::stod(thresholds[i + 1][1]) < std::stod(thresholds[i][1]));
    CHECK(std::stod(thresholds[0][1]) == doctest::Approx(4.86).epsilon(0.002));
    CHECK(std::stod(thresholds[1][1]) == doctest::Approx(2.047).epsilon(0.001));

    const auto crossings = rows(slurp(prefix + "_crossings.csv"));
    REQUIRE(crossings.size() == 9);
    for (std::size_t i = 0; i < 3; ++i) {
        const double star = std::stod(thresholds[2 * i][1]);
        const double far = std::abs(std::stod(crossings[3 * i + 1][4]) - star);
        const double near = std::abs(std::stod(crossings[3 * i][4]) - star);
        CHECK(near < far);
    }
    CHECK(fs::exists(prefix + "_mc.csv"));
    CHECK(fs::exists(prefix + ".gp"));

    CHECK(run({"phase-diagram", "--rho", "1", "--out", prefix}).code == 1);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({"count", "--help"}).code == 0);
}
