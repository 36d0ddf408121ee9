#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "support/test_util.hpp"
#include "tabsynth/csv.hpp"
#include "tabsynth/rng.hpp"

using namespace tabsynth;
using namespace tsupport;

namespace {

Table from_text(const std::string& text, std::optional<TableSchema> schema = std::nullopt) {
    std::istringstream in(text);
    return load_csv_stream(in, std::move(schema), "test.csv");
}

}  // namespace

TEST_CASE("inference on unambiguous columns") {
    const Table t = from_text("age,sex\n31,M\n25,F\n47,M\n");
    REQUIRE(t.schema.columns.size() == 2);
    CHECK(t.schema.columns[0].kind == ColumnKind::continuous);
    CHECK(t.schema.columns[1].kind == ColumnKind::categorical);
    CHECK(t.schema.columns[1].categories == std::vector<std::string>{"F", "M"});
    CHECK(t.row_count() == 3);
    CHECK(t.real_at(0, 0) == 31.0);
    CHECK(t.cat_at(0, 1) == 1);  // M after lexicographic ordering
}

TEST_CASE("declared schema missing a category is a schema violation") {
    TableSchema schema;
    schema.columns = {cont_col("age"), cat_col("sex", {"F", "M"})};
    CHECK_THROWS_AS(from_text("age,sex\n31,M\n25,X\n", schema), SchemaError);
    try {
        from_text("age,sex\n31,M\n25,X\n", schema);
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("X") != std::string::npos);
        CHECK(msg.find("sex") != std::string::npos);
    }
}

TEST_CASE("empty file and malformed rows are parse errors") {
    CHECK_THROWS_AS(from_text(""), ParseError);
    CHECK_THROWS_AS(from_text("a,b\n"), ParseError);  // header only, no data
    try {
        from_text("a,b\n1,x\n2\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("missing cells are rejected with their locations") {
    try {
        from_text("a,b\n1,x\n,y\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("missing") != std::string::npos);
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("'a'") != std::string::npos);
    }
}

TEST_CASE("quoted fields round-trip") {
    const Table t = from_text("name,n\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n");
    CHECK(t.schema.columns[0].categories == std::vector<std::string>{"a,b", "say \"hi\""});
}

TEST_CASE("numeric inference threshold keeps coded categoricals categorical") {
    // 50 rows, 2 non-numeric: 96% numeric -> categorical under the 99% rule.
    std::string text = "code,flag\n";
    for (int i = 0; i < 48; ++i) text += std::to_string(i % 7) + ",y\n";
    text += "zz,y\nqq,y\n";
    const Table t = from_text(text);
    CHECK(t.schema.columns[0].kind == ColumnKind::categorical);
}

TEST_CASE("csv write/load round-trip preserves values") {
    TempDir tmp;
    TableSchema schema;
    schema.columns = {cont_col("x"), cat_col("c", {"a", "b", "c c"})};
    Table t;
    t.schema = schema;
    t.columns.resize(2);
    t.columns[0].kind = ColumnKind::continuous;
    t.columns[1].kind = ColumnKind::categorical;
    RngStream rng(5);
    for (int i = 0; i < 200; ++i) {
        t.columns[0].reals.push_back(rng.normal() * 1e3);
        t.columns[1].cats.push_back(static_cast<std::int32_t>(rng.index(3)));
    }
    const auto path = tmp.path / "t.csv";
    write_csv(t, path);
    const Table back = load_csv(path, schema);
    REQUIRE(back.row_count() == t.row_count());
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        CHECK(back.real_at(r, 0) == t.real_at(r, 0));  // shortest round-trip formatting is exact
        CHECK(back.cat_at(r, 1) == t.cat_at(r, 1));
    }
}

TEST_CASE("schema json round-trip") {
    TableSchema schema;
    schema.columns = {cont_col("income"), cat_col("region", {"east", "north", "south", "west"})};
    const TableSchema back = schema_from_json(schema_to_json(schema));
    CHECK(back == schema);
}

TEST_CASE("sample_rows: exhaustive sample is a permutation") {
    Table t = from_text("x,c\n1,a\n2,b\n3,a\n4,b\n5,a\n");
    const Table s = sample_rows(t, 5, 99);
    std::multiset<double> orig(t.columns[0].reals.begin(), t.columns[0].reals.end());
    std::multiset<double> got(s.columns[0].reals.begin(), s.columns[0].reals.end());
    CHECK(orig == got);
}

TEST_CASE("sample_rows: 500 from 30000 rows are distinct and deterministic") {
    Table t;
    t.schema.columns = {cont_col("x"), cat_col("c", {"a"})};
    t.columns.resize(2);
    t.columns[0].kind = ColumnKind::continuous;
    t.columns[1].kind = ColumnKind::categorical;
    for (int i = 0; i < 30000; ++i) {
        t.columns[0].reals.push_back(i);
        t.columns[1].cats.push_back(0);
    }
    const Table a = sample_rows(t, 500, 7);
    const Table b = sample_rows(t, 500, 7);
    CHECK(a.row_count() == 500);
    std::set<double> distinct(a.columns[0].reals.begin(), a.columns[0].reals.end());
    CHECK(distinct.size() == 500);  // without replacement
    CHECK(a.columns[0].reals == b.columns[0].reals);
    const Table c = sample_rows(t, 500, 8);
    CHECK(a.columns[0].reals != c.columns[0].reals);
}

TEST_CASE("sample_rows: n greater than table samples with replacement; n=0 rejected") {
    Table t = from_text("x,c\n1,a\n2,b\n");
    CHECK_THROWS_AS(sample_rows(t, 0, 1), std::invalid_argument);
    const Table s = sample_rows(t, 10, 3);
    CHECK(s.row_count() == 10);
    for (double v : s.columns[0].reals) CHECK((v == 1.0 || v == 2.0));
}

TEST_CASE("independence_shuffle preserves marginals") {
    Table t = from_text("x,c\n1,a\n2,b\n3,a\n4,c\n");
    const Table s = independence_shuffle(t, 11);
    std::multiset<double> xs_o(t.columns[0].reals.begin(), t.columns[0].reals.end());
    std::multiset<double> xs_s(s.columns[0].reals.begin(), s.columns[0].reals.end());
    CHECK(xs_o == xs_s);
    std::multiset<int> cs_o(t.columns[1].cats.begin(), t.columns[1].cats.end());
    std::multiset<int> cs_s(s.columns[1].cats.begin(), s.columns[1].cats.end());
    CHECK(cs_o == cs_s);
}
