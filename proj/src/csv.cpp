#include "vclab/csv.hpp"

#include <cmath>
#include <locale>
#include <sstream>

namespace vclab::csv {

std::string number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s.precision(17);
    s << value;
    return s.str();
}

void write_header(std::ostream& out, const nlohmann::json& config, std::uint64_t seed) {
    out << "# vclab " << kToolVersion << '\n';
    out << "# config: " << config.dump() << '\n';
    out << "# seed: " << seed << '\n';
}

}  // namespace vclab::csv
