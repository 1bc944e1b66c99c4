#pragma once

#include <string>
#include <vector>

namespace varitherm::csv {

/// Format a double with full round-trip precision (17 significant digits).
std::string format(double value);

/// Write one CSV row; values formatted via format().
std::string row(const std::vector<double>& values);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

/// Parse a numeric CSV with a header line. Throws ParseError on malformed input.
Table read(const std::string& path);

}  // namespace varitherm::csv
