#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "tabsynth/table.hpp"

namespace tsupport {

// |a - b| <= tol (absolute).
inline bool within(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Relative closeness with an absolute floor, for gradient checks.
inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-9) {
    return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// Unique scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tabsynth_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline tabsynth::ColumnSpec cat_col(std::string name, std::vector<std::string> cats) {
    tabsynth::ColumnSpec c;
    c.name = std::move(name);
    c.kind = tabsynth::ColumnKind::categorical;
    c.categories = std::move(cats);
    return c;
}

inline tabsynth::ColumnSpec cont_col(std::string name) {
    tabsynth::ColumnSpec c;
    c.name = std::move(name);
    c.kind = tabsynth::ColumnKind::continuous;
    return c;
}

}  // namespace tsupport
