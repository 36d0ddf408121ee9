#include "tabsynth/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "tabsynth/rng.hpp"

namespace tabsynth {

int ColumnSpec::category_index(const std::string& value) const {
    auto it = std::lower_bound(categories.begin(), categories.end(), value);
    if (it == categories.end() || *it != value) return -1;
    return static_cast<int>(it - categories.begin());
}

bool operator==(const ColumnSpec& a, const ColumnSpec& b) {
    return a.name == b.name && a.kind == b.kind && a.categories == b.categories;
}

int TableSchema::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::size_t> TableSchema::categorical_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].kind == ColumnKind::categorical) out.push_back(i);
    return out;
}

std::size_t TableSchema::total_categories() const {
    std::size_t n = 0;
    for (const auto& c : columns)
        if (c.kind == ColumnKind::categorical) n += c.categories.size();
    return n;
}

void TableSchema::validate() const {
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (c.name.empty()) throw SchemaError("schema: empty column name");
        if (!seen.insert(c.name).second)
            throw SchemaError("schema: duplicate column name '" + c.name + "'");
        if (c.kind == ColumnKind::categorical) {
            if (c.categories.empty())
                throw SchemaError("schema: categorical column '" + c.name + "' has no categories");
            if (!std::is_sorted(c.categories.begin(), c.categories.end()))
                throw SchemaError("schema: categories of '" + c.name + "' must be sorted");
            if (std::adjacent_find(c.categories.begin(), c.categories.end()) != c.categories.end())
                throw SchemaError("schema: duplicate category in column '" + c.name + "'");
        } else if (!c.categories.empty()) {
            throw SchemaError("schema: continuous column '" + c.name + "' declares categories");
        }
    }
    if (categorical_columns().empty())
        throw SchemaError("schema: at least one categorical column is required");
}

void Table::validate() const {
    if (columns.size() != schema.columns.size())
        throw SchemaError("table: column count does not match schema");
    const std::size_t n = row_count();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto& spec = schema.columns[c];
        const auto& col = columns[c];
        if (col.kind != spec.kind) throw SchemaError("table: column kind mismatch in '" + spec.name + "'");
        if (col.size() != n) throw SchemaError("table: ragged column '" + spec.name + "'");
        if (col.kind == ColumnKind::continuous) {
            for (double v : col.reals)
                if (!std::isfinite(v))
                    throw SchemaError("table: non-finite value in column '" + spec.name + "'");
        } else {
            const auto k = static_cast<std::int32_t>(spec.categories.size());
            for (std::int32_t v : col.cats)
                if (v < 0 || v >= k)
                    throw SchemaError("table: category index out of range in column '" + spec.name + "'");
        }
    }
}

Table Table::take_rows(const std::vector<std::size_t>& rows) const {
    Table out;
    out.schema = schema;
    out.columns.resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out.columns[c].kind = columns[c].kind;
        if (columns[c].kind == ColumnKind::continuous) {
            out.columns[c].reals.reserve(rows.size());
            for (std::size_t r : rows) out.columns[c].reals.push_back(columns[c].reals[r]);
        } else {
            out.columns[c].cats.reserve(rows.size());
            for (std::size_t r : rows) out.columns[c].cats.push_back(columns[c].cats[r]);
        }
    }
    return out;
}

Table sample_rows(const Table& table, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_rows: n must be >= 1");
    const std::size_t total = table.row_count();
    if (total == 0) throw std::invalid_argument("sample_rows: empty table");
    RngStream rng(seed);
    std::vector<std::size_t> picks;
    picks.reserve(n);
    if (n <= total) {
        // Partial Fisher-Yates over row indices.
        std::vector<std::size_t> idx(total);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = i + rng.index(total - i);
            std::swap(idx[i], idx[j]);
            picks.push_back(idx[i]);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) picks.push_back(rng.index(total));
    }
    return table.take_rows(picks);
}

Table independence_shuffle(const Table& table, std::uint64_t seed) {
    RngStream rng(seed);
    const std::size_t n = table.row_count();
    Table out = table;
    for (auto& col : out.columns) {
        // Fisher-Yates, one fresh permutation per column.
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = rng.index(i);
            if (col.kind == ColumnKind::continuous)
                std::swap(col.reals[i - 1], col.reals[j]);
            else
                std::swap(col.cats[i - 1], col.cats[j]);
        }
    }
    return out;
}

}  // namespace tabsynth
