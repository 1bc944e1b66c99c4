#include "varitherm/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "varitherm/errors.hpp"

namespace varitherm::csv {

std::string format(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string row(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format(values[i]);
    }
    out += '\n';
    return out;
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open CSV file: " + path);
    Table table;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV file: " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": not a number: " + cell);
            }
        }
        if (values.size() != table.header.size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": wrong column count");
        table.rows.push_back(std::move(values));
    }
    return table;
}

}  // namespace varitherm::csv
