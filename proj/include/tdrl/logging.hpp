#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace tdrl {

/// Fixed-schema CSV writer: the header is set once at construction and every
/// row must carry exactly that many cells.
class CsvLogger {
public:
    CsvLogger(const std::filesystem::path& path, std::vector<std::string> columns);

    void row(const std::vector<double>& values);
    const std::vector<std::string>& columns() const { return columns_; }
    void flush();

private:
    std::vector<std::string> columns_;
    std::ofstream out_;
};

/// Formats a double the way the logger does (shortest round-trip-exact form).
std::string csv_number(double value);

} // namespace tdrl
