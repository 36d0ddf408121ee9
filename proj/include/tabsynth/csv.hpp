#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "tabsynth/table.hpp"

namespace tabsynth {

// Load a comma-delimited UTF-8 CSV with a header row. When no schema is given
// one is inferred: a column is continuous when >= 99% of its cells parse as
// numbers, categorical otherwise (categories = sorted distinct values).
// Missing (empty) cells are rejected with an error listing their locations.
Table load_csv(const std::filesystem::path& path, std::optional<TableSchema> schema = std::nullopt);
Table load_csv_stream(std::istream& in, std::optional<TableSchema> schema, const std::string& origin);

void write_csv(const Table& table, const std::filesystem::path& path);
void write_csv_stream(const Table& table, std::ostream& out);

// Schema file: JSON list of {name, kind, categories?}.
TableSchema load_schema_json(const std::filesystem::path& path);
std::string schema_to_json(const TableSchema& schema);
TableSchema schema_from_json(const std::string& text);

}  // namespace tabsynth
