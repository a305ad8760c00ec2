#include "gradcheck_cmd.hpp"

#include "mrfe/config.hpp"
#include "mrfe/csv.hpp"
#include "mrfe/gradcheck.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

int run_gradcheck(std::uint64_t seed, double tolerance, const std::filesystem::path& out, std::ostream& log) {
    const auto cases = mrfe::gradcheck_suite(seed);
    std::filesystem::create_directories(out);
    std::ofstream file(out / "gradcheck.csv");
    mrfe::csv::write_row(file, {"case", "max_relative_error", "worst_parameter", "coordinates"});
    double worst = 0;
    for (const auto& c : cases) {
        char line[160];
        std::snprintf(line, sizeof line, "%-28s max relative error %.3e (%s, %zu coordinates)", c.name.c_str(),
                      c.result.max_relative_error, c.result.worst_parameter.c_str(), c.result.coordinates);
        log << line << '\n';
        mrfe::csv::write_row(file, {c.name, mrfe::format_double(c.result.max_relative_error), c.result.worst_parameter,
                                    std::to_string(c.result.coordinates)});
        worst = std::max(worst, c.result.max_relative_error);
    }
    char summary[96];
    std::snprintf(summary, sizeof summary, "max relative error %.3e (tolerance %.0e)", worst, tolerance);
    log << summary << '\n';
    return worst < tolerance ? 0 : 1;
}
