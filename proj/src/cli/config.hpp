#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vclab/structure.hpp"

namespace vclab::cli {

enum class Kind { integer, real, text, flag, int_list, real_list, grid, object };

struct Field {
    std::string name;
    Kind kind;
    nlohmann::json fallback;  // null: unset
    std::string help;
};

// Options of one subcommand. Values resolve as flag > config file > default.
class Options {
public:
    Options(CLI::App& sub, std::vector<Field> fields);

    // After parsing: merges defaults, the --config file and explicit flags.
    nlohmann::json resolve() const;

private:
    CLI::App& sub_;
    std::vector<Field> fields_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, bool> flags_;
    std::string config_path_;
};

nlohmann::json read_config_file(const std::string& path);

// Load grid: "a..b" (integer p in [a n, b n] for each n), "a..b:step", a
// comma list, or a JSON array of numbers.
struct LoadGrid {
    bool integer_range = false;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;

    // Loads for dimension n; ranges give alpha = p / n for integer p.
    std::vector<double> loads(std::size_t n) const;
};

LoadGrid parse_grid(const nlohmann::json& value, const std::string& field);

// Plain numeric list ("0,0.2,0.4", "0..0.8:0.2" or an array).
std::vector<double> parse_real_list(const nlohmann::json& value, const std::string& field);

bool has(const nlohmann::json& config, const std::string& field);
double get_real(const nlohmann::json& config, const std::string& field);
std::int64_t get_int(const nlohmann::json& config, const std::string& field);
std::size_t get_count(const nlohmann::json& config, const std::string& field, std::size_t min);
std::uint64_t get_seed(const nlohmann::json& config);
std::string get_text(const nlohmann::json& config, const std::string& field);
std::vector<std::size_t> get_dims(const nlohmann::json& config, const std::string& field);

// Structure from "structure" (object) or "rho" (uniform pair); k=1 otherwise.
StructureSpec get_structure(const nlohmann::json& config);

// Resolved config without run-environment fields (threads).
nlohmann::json echoed(const nlohmann::json& config);

}  // namespace vclab::cli
