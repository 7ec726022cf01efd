#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nearrep::csv {

/// Shortest text that round-trips: 17 significant digits.
std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Header row plus comma-separated rows, newline-terminated.
std::string to_string(const Table& table);
void write(const std::filesystem::path& path, const Table& table);

}  // namespace nearrep::csv
