#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosimlab/frequency_response.hpp"

namespace cosimlab {

/// Column-major table with a one-line header.
inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::span<const double>>& columns) {
    if (header.size() != columns.size()) {
        throw std::invalid_argument("write_csv: header and column counts differ");
    }
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) {
            throw std::invalid_argument("write_csv: columns differ in length");
        }
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out << (i ? "," : "") << columns[i][r];
        }
        out << '\n';
    }
}

/// omega, re, im, mag_db, phase_deg
inline void write_curve_csv(const std::filesystem::path& path, const FrequencyResponseCurve& curve) {
    std::vector<double> re, im, mag, phase;
    re.reserve(curve.size());
    im.reserve(curve.size());
    mag.reserve(curve.size());
    phase.reserve(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        re.push_back(curve.value[i].real());
        im.push_back(curve.value[i].imag());
        mag.push_back(curve.magnitude_db(i));
        phase.push_back(curve.phase_deg(i));
    }
    write_csv(path, {"omega", "re", "im", "mag_db", "phase_deg"}, {curve.omega, re, im, mag, phase});
}

}  // namespace cosimlab
