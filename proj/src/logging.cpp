#include "tdrl/logging.hpp"

#include "tdrl/error.hpp"

#include <cmath>
#include <cstdio>

namespace tdrl {

std::string csv_number(double value) {
    if (value == std::floor(value) && std::abs(value) < 1e15) {
        return std::to_string(static_cast<long long>(value));
    }
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.12g", value);
    return buffer;
}

CsvLogger::CsvLogger(const std::filesystem::path& path, std::vector<std::string> columns)
    : columns_(std::move(columns)), out_(path) {
    if (!out_) throw Error("CsvLogger: cannot open " + path.string());
    if (columns_.empty()) throw Error("CsvLogger: empty column list");
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << columns_[i];
    }
    out_ << '\n';
}

void CsvLogger::row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) {
        throw Error("CsvLogger: row has " + std::to_string(values.size()) + " cells, expected " +
                    std::to_string(columns_.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << csv_number(values[i]);
    }
    out_ << '\n';
}

void CsvLogger::flush() {
    out_.flush();
}

} // namespace tdrl
