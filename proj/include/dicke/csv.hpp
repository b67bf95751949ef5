// csv.hpp — deterministic CSV emission (17 significant digits)

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dicke/common.hpp"

namespace dicke::csv {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_index(std::size_t v) { return std::to_string(v); }

class Writer {
public:
    Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw ConfigError("cannot open output file: " + path.string());
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out_ << ',';
            out_ << cells[k];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

} // namespace dicke::csv
