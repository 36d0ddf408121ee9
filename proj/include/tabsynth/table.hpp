#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tabsynth/common.hpp"

namespace tabsynth {

enum class ColumnKind { continuous, categorical };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    std::vector<std::string> categories;  // categorical only; sorted, unique

    int category_index(const std::string& value) const;  // -1 if absent
};

struct TableSchema {
    std::vector<ColumnSpec> columns;

    std::size_t column_count() const { return columns.size(); }
    int column_index(const std::string& name) const;  // -1 if absent
    std::vector<std::size_t> categorical_columns() const;
    std::size_t total_categories() const;

    // Column names unique, categories sorted+non-empty, >= 1 categorical column.
    void validate() const;

    bool operator==(const TableSchema&) const = default;
};

bool operator==(const ColumnSpec& a, const ColumnSpec& b);

// Column-major table storage: one vector per column. Continuous columns hold
// finite doubles, categorical columns hold in-range category indices.
struct Column {
    ColumnKind kind = ColumnKind::continuous;
    std::vector<double> reals;
    std::vector<std::int32_t> cats;

    std::size_t size() const { return kind == ColumnKind::continuous ? reals.size() : cats.size(); }
};

struct Table {
    TableSchema schema;
    std::vector<Column> columns;

    std::size_t row_count() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t column_count() const { return columns.size(); }

    double real_at(std::size_t row, std::size_t col) const { return columns[col].reals[row]; }
    std::int32_t cat_at(std::size_t row, std::size_t col) const { return columns[col].cats[row]; }

    void validate() const;  // arity, finiteness, index ranges

    // New table containing the given rows (duplicates allowed), in order.
    Table take_rows(const std::vector<std::size_t>& rows) const;
};

// Uniform row sample: without replacement if n <= row_count, with replacement
// otherwise. Deterministic for a fixed seed.
Table sample_rows(const Table& table, std::size_t n, std::uint64_t seed);

// Per-column independent permutation: preserves every marginal, destroys all
// dependencies. Used as the no-structure baseline in reports.
Table independence_shuffle(const Table& table, std::uint64_t seed);

}  // namespace tabsynth
