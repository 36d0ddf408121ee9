#include "tabsynth/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tabsynth {

namespace {

// RFC-4180-ish field splitting: quoted fields may contain commas, doubled
// quotes escape a quote. No embedded newlines (tabular census exports).
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            if (!cur.empty())
                throw ParseError("csv line " + std::to_string(line_no) + ": stray quote");
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (quoted) throw ParseError("csv line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(begin, &end);
    if (errno == ERANGE) return false;
    if (end != begin + s.size()) return false;
    return std::isfinite(out);
}

std::string cell_ref(std::size_t line_no, const std::string& column) {
    return "line " + std::to_string(line_no) + " column '" + column + "'";
}

void append_csv_field(std::string& out, const std::string& field) {
    if (field.find_first_of(",\"\n") != std::string::npos) {
        out.push_back('"');
        for (char c : field) {
            if (c == '"') out.push_back('"');
            out.push_back(c);
        }
        out.push_back('"');
    } else {
        out += field;
    }
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
    return std::string(buf, res.ptr);
}

ColumnKind kind_from_string(const std::string& s) {
    if (s == "continuous") return ColumnKind::continuous;
    if (s == "categorical") return ColumnKind::categorical;
    throw ParseError("schema: unknown column kind '" + s + "'");
}

}  // namespace

Table load_csv_stream(std::istream& in, std::optional<TableSchema> schema, const std::string& origin) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(origin + ": empty file (no header row)");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line, line_no);
    const std::size_t ncols = header.size();
    if (ncols == 0) throw ParseError(origin + ": empty header row");

    std::vector<std::vector<std::string>> cells(ncols);
    std::vector<std::string> missing;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;  // trailing newline
        auto fields = split_csv_line(line, line_no);
        if (fields.size() != ncols)
            throw ParseError(origin + " line " + std::to_string(line_no) + ": expected " +
                             std::to_string(ncols) + " fields, got " + std::to_string(fields.size()));
        for (std::size_t c = 0; c < ncols; ++c) {
            if (fields[c].empty()) missing.push_back(cell_ref(line_no, header[c]));
            cells[c].push_back(std::move(fields[c]));
        }
    }
    if (!missing.empty()) {
        std::string msg = origin + ": missing values are not supported; offending cells:";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
        if (missing.size() > 20) msg += " (+" + std::to_string(missing.size() - 20) + " more)";
        throw ParseError(msg);
    }
    const std::size_t nrows = cells.empty() ? 0 : cells[0].size();
    if (nrows == 0) throw ParseError(origin + ": no data rows");

    TableSchema effective;
    if (schema) {
        effective = *schema;
        if (effective.columns.size() != ncols)
            throw SchemaError(origin + ": schema declares " + std::to_string(effective.columns.size()) +
                              " columns, file has " + std::to_string(ncols));
        for (std::size_t c = 0; c < ncols; ++c)
            if (effective.columns[c].name != header[c])
                throw SchemaError(origin + ": header '" + header[c] + "' does not match schema column '" +
                                  effective.columns[c].name + "'");
    } else {
        // Inference: continuous when >= 99% of cells parse as numbers.
        for (std::size_t c = 0; c < ncols; ++c) {
            std::size_t numeric = 0;
            double tmp;
            for (const auto& s : cells[c])
                if (parse_number(s, tmp)) ++numeric;
            ColumnSpec spec;
            spec.name = header[c];
            if (static_cast<double>(numeric) >= 0.99 * static_cast<double>(nrows)) {
                spec.kind = ColumnKind::continuous;
            } else {
                spec.kind = ColumnKind::categorical;
                std::set<std::string> distinct(cells[c].begin(), cells[c].end());
                spec.categories.assign(distinct.begin(), distinct.end());
            }
            effective.columns.push_back(std::move(spec));
        }
    }
    effective.validate();

    Table table;
    table.schema = effective;
    table.columns.resize(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
        const auto& spec = effective.columns[c];
        auto& col = table.columns[c];
        col.kind = spec.kind;
        if (spec.kind == ColumnKind::continuous) {
            col.reals.reserve(nrows);
            std::vector<std::string> bad;
            for (std::size_t r = 0; r < nrows; ++r) {
                double v;
                if (!parse_number(cells[c][r], v)) {
                    bad.push_back(cell_ref(r + 2, spec.name) + " value '" + cells[c][r] + "'");
                    v = 0.0;
                }
                col.reals.push_back(v);
            }
            if (!bad.empty()) {
                std::string msg = origin + ": non-numeric cells in continuous column '" + spec.name + "':";
                for (std::size_t i = 0; i < bad.size() && i < 10; ++i) msg += " " + bad[i];
                throw ParseError(msg);
            }
        } else {
            col.cats.reserve(nrows);
            for (std::size_t r = 0; r < nrows; ++r) {
                const int idx = spec.category_index(cells[c][r]);
                if (idx < 0)
                    throw SchemaError(origin + ": value '" + cells[c][r] + "' in column '" + spec.name +
                                      "' is not among the declared categories (line " + std::to_string(r + 2) + ")");
                col.cats.push_back(idx);
            }
        }
    }
    table.validate();
    return table;
}

Table load_csv(const std::filesystem::path& path, std::optional<TableSchema> schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return load_csv_stream(in, std::move(schema), path.filename().string());
}

void write_csv_stream(const Table& table, std::ostream& out) {
    std::string line;
    for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
        if (c) line.push_back(',');
        append_csv_field(line, table.schema.columns[c].name);
    }
    out << line << '\n';
    const std::size_t n = table.row_count();
    for (std::size_t r = 0; r < n; ++r) {
        line.clear();
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) line.push_back(',');
            const auto& spec = table.schema.columns[c];
            if (spec.kind == ColumnKind::continuous)
                line += format_double(table.real_at(r, c));
            else
                append_csv_field(line, spec.categories[table.cat_at(r, c)]);
        }
        out << line << '\n';
    }
}

void write_csv(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
    write_csv_stream(table, out);
}

std::string schema_to_json(const TableSchema& schema) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : schema.columns) {
        nlohmann::json item;
        item["name"] = c.name;
        item["kind"] = c.kind == ColumnKind::continuous ? "continuous" : "categorical";
        if (c.kind == ColumnKind::categorical) item["categories"] = c.categories;
        arr.push_back(std::move(item));
    }
    return arr.dump(2);
}

TableSchema schema_from_json(const std::string& text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema json: ") + e.what());
    }
    if (!arr.is_array()) throw ParseError("schema json: expected a list of column specs");
    TableSchema schema;
    for (const auto& item : arr) {
        ColumnSpec spec;
        spec.name = item.at("name").get<std::string>();
        spec.kind = kind_from_string(item.at("kind").get<std::string>());
        if (item.contains("categories"))
            spec.categories = item["categories"].get<std::vector<std::string>>();
        std::sort(spec.categories.begin(), spec.categories.end());
        schema.columns.push_back(std::move(spec));
    }
    schema.validate();
    return schema;
}

TableSchema load_schema_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return schema_from_json(ss.str());
}

}  // namespace tabsynth
