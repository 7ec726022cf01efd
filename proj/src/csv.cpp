#include "nearrep/csv.hpp"

#include "nearrep/errors.hpp"

#include <cstdio>
#include <fstream>

namespace nearrep::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_string(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw InvalidInput("csv: row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write(const std::filesystem::path& path, const Table& table) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << to_string(table);
    if (!f) throw Error("failed writing " + path.string());
}

}  // namespace nearrep::csv
