#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "vclab/errors.hpp"

namespace vclab::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    return parts;
}

double to_real(const std::string& text, const std::string& field) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw ValidationError("field '" + field + "': expected a number, got '" + text + "'");
    return v;
}

std::int64_t to_int(const std::string& text, const std::string& field) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw ValidationError("field '" + field + "': expected an integer, got '" + text + "'");
    return v;
}

nlohmann::json from_text(const Field& field, const std::string& text) {
    switch (field.kind) {
        case Kind::integer: return to_int(text, field.name);
        case Kind::real: return to_real(text, field.name);
        case Kind::int_list: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& part : split(text, ',')) arr.push_back(to_int(part, field.name));
            return arr;
        }
        case Kind::object:
            try {
                return nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error& e) {
                throw ValidationError("field '" + field.name + "': invalid JSON: " + e.what());
            }
        default: return text;
    }
}

void check_value(const Field& field, const nlohmann::json& v) {
    const auto fail = [&](const char* what) {
        throw ValidationError("config field '" + field.name + "': expected " + what + ", got " +
                              v.dump());
    };
    switch (field.kind) {
        case Kind::integer:
            if (!v.is_number_integer()) fail("an integer");
            break;
        case Kind::real:
            if (!v.is_number()) fail("a number");
            break;
        case Kind::text:
            if (!v.is_string()) fail("a string");
            break;
        case Kind::flag:
            if (!v.is_boolean()) fail("true or false");
            break;
        case Kind::int_list:
            if (v.is_number_integer()) break;
            if (!v.is_array()) fail("an integer or an array of integers");
            for (const auto& x : v)
                if (!x.is_number_integer()) fail("an integer or an array of integers");
            break;
        case Kind::real_list: parse_real_list(v, field.name); break;
        case Kind::grid: parse_grid(v, field.name); break;
        case Kind::object:
            if (!v.is_object()) fail("an object");
            break;
    }
}

}  // namespace

Options::Options(CLI::App& sub, std::vector<Field> fields) : sub_(sub), fields_(std::move(fields)) {
    sub_.add_option("--config", config_path_, "JSON config file (flags override its values)");
    for (const auto& f : fields_) {
        std::string help = f.help;
        if (!f.fallback.is_null()) help += " [default: " + f.fallback.dump() + "]";
        if (f.kind == Kind::flag)
            sub_.add_flag("--" + f.name, flags_[f.name], help);
        else
            sub_.add_option("--" + f.name, raw_[f.name], help);
    }
}

nlohmann::json Options::resolve() const {
    nlohmann::json config = nlohmann::json::object();
    for (const auto& f : fields_)
        if (!f.fallback.is_null()) config[f.name] = f.fallback;

    if (!config_path_.empty()) {
        const auto file = read_config_file(config_path_);
        for (const auto& [key, value] : file.items()) {
            const auto it = std::find_if(fields_.begin(), fields_.end(),
                                         [&](const Field& f) { return f.name == key; });
            if (it == fields_.end())
                throw ValidationError(config_path_ + ": unknown field '" + key + "' for command '" +
                                      sub_.get_name() + "'");
            if (value.is_null()) {
                config.erase(key);
                continue;
            }
            check_value(*it, value);
            config[key] = value;
        }
    }

    for (const auto& f : fields_) {
        if (sub_.count("--" + f.name) == 0) continue;
        if (f.kind == Kind::flag) {
            config[f.name] = flags_.at(f.name);
            continue;
        }
        const auto value = from_text(f, raw_.at(f.name));
        check_value(f, value);
        config[f.name] = value;
    }
    return config;
}

nlohmann::json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Byte offset to line:column.
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ValidationError(path + ":" + std::to_string(line) + ":" + std::to_string(column) +
                              ": invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ValidationError(path + ": config must be a JSON object");
    return j;
}

std::vector<double> LoadGrid::loads(std::size_t n) const {
    if (!integer_range) return values;
    std::vector<double> out;
    const auto first = static_cast<long long>(std::ceil(lo * n - 1e-9));
    const auto last = static_cast<long long>(std::floor(hi * n + 1e-9));
    for (long long p = std::max(first, 1LL); p <= last; ++p)
        out.push_back(static_cast<double>(p) / static_cast<double>(n));
    return out;
}

namespace {

// "a..b" or "a..b:step"; returns false if text is not a range.
bool parse_range(const std::string& text, const std::string& field, double& lo, double& hi,
                 double& step, bool& has_step) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) return false;
    lo = to_real(trim(text.substr(0, dots)), field);
    std::string rest = text.substr(dots + 2);
    const auto colon = rest.find(':');
    has_step = colon != std::string::npos;
    hi = to_real(trim(rest.substr(0, colon)), field);
    if (has_step) {
        step = to_real(trim(rest.substr(colon + 1)), field);
        if (!(step > 0.0)) throw ValidationError("field '" + field + "': range step must be positive");
    }
    if (!(hi >= lo)) throw ValidationError("field '" + field + "': range end is below its start");
    return true;
}

std::vector<double> stepped(double lo, double hi, double step) {
    std::vector<double> out;
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

std::vector<double> number_list(const nlohmann::json& value, const std::string& field) {
    std::vector<double> out;
    if (value.is_number()) {
        out.push_back(value.get<double>());
    } else if (value.is_array()) {
        for (const auto& x : value) {
            if (!x.is_number())
                throw ValidationError("field '" + field + "': array entries must be numbers");
            out.push_back(x.get<double>());
        }
    } else if (value.is_string()) {
        for (const auto& part : split(value.get<std::string>(), ','))
            if (!part.empty()) out.push_back(to_real(part, field));
    } else {
        throw ValidationError("field '" + field + "': expected a list of numbers");
    }
    return out;
}

}  // namespace

LoadGrid parse_grid(const nlohmann::json& value, const std::string& field) {
    LoadGrid grid;
    double lo = 0, hi = 0, step = 0;
    bool has_step = false;
    if (value.is_string() &&
        parse_range(value.get<std::string>(), field, lo, hi, step, has_step)) {
        if (has_step) {
            grid.values = stepped(lo, hi, step);
        } else {
            grid.integer_range = true;
            grid.lo = lo;
            grid.hi = hi;
        }
    } else {
        grid.values = number_list(value, field);
    }
    if (!grid.integer_range && grid.values.empty())
        throw ValidationError("field '" + field + "': empty load grid");
    for (double a : grid.values)
        if (!(a > 0.0)) throw ValidationError("field '" + field + "': loads must be positive");
    if (grid.integer_range && !(grid.lo > 0.0 || grid.hi > 0.0))
        throw ValidationError("field '" + field + "': empty load grid");
    return grid;
}

std::vector<double> parse_real_list(const nlohmann::json& value, const std::string& field) {
    double lo = 0, hi = 0, step = 0;
    bool has_step = false;
    if (value.is_string() && parse_range(value.get<std::string>(), field, lo, hi, step, has_step)) {
        if (!has_step)
            throw ValidationError("field '" + field + "': range needs a step, as in 0..0.8:0.2");
        return stepped(lo, hi, step);
    }
    auto out = number_list(value, field);
    if (out.empty()) throw ValidationError("field '" + field + "': empty list");
    return out;
}

bool has(const nlohmann::json& config, const std::string& field) {
    return config.contains(field) && !config.at(field).is_null();
}

double get_real(const nlohmann::json& config, const std::string& field) {
    if (!has(config, field)) throw ValidationError("missing field '" + field + "'");
    return config.at(field).get<double>();
}

std::int64_t get_int(const nlohmann::json& config, const std::string& field) {
    if (!has(config, field)) throw ValidationError("missing field '" + field + "'");
    return config.at(field).get<std::int64_t>();
}

std::size_t get_count(const nlohmann::json& config, const std::string& field, std::size_t min) {
    const auto v = get_int(config, field);
    if (v < static_cast<std::int64_t>(min))
        throw ValidationError("field '" + field + "' must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const nlohmann::json& config) {
    const auto& v = config.at("seed");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.get<std::int64_t>() < 0) throw ValidationError("field 'seed' must be nonnegative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
}

std::string get_text(const nlohmann::json& config, const std::string& field) {
    if (!has(config, field)) throw ValidationError("missing field '" + field + "'");
    return config.at(field).get<std::string>();
}

std::vector<std::size_t> get_dims(const nlohmann::json& config, const std::string& field) {
    if (!has(config, field)) throw ValidationError("missing field '" + field + "'");
    const auto& v = config.at(field);
    std::vector<std::size_t> out;
    const auto push = [&](std::int64_t n) {
        if (n < 1) throw ValidationError("field '" + field + "': dimensions must be positive");
        out.push_back(static_cast<std::size_t>(n));
    };
    if (v.is_array()) {
        for (const auto& x : v) push(x.get<std::int64_t>());
    } else {
        push(v.get<std::int64_t>());
    }
    if (out.empty()) throw ValidationError("field '" + field + "': empty list");
    return out;
}

StructureSpec get_structure(const nlohmann::json& config) {
    if (has(config, "structure") && has(config, "rho"))
        throw ValidationError("give either 'structure' or 'rho', not both");
    if (has(config, "structure")) return structure_from_json(config.at("structure"));
    if (has(config, "rho")) {
        const double rho = get_real(config, "rho");
        if (!(rho >= -1.0 && rho <= 1.0))
            throw ValidationError("field 'rho' must lie in [-1, 1]");
        return StructureSpec::pair(rho);
    }
    return StructureSpec::unstructured();
}

nlohmann::json echoed(const nlohmann::json& config) {
    auto copy = config;
    copy.erase("threads");
    return copy;
}

}  // namespace vclab::cli
