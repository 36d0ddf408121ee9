// Regenerates the bundled toy dataset (data/toy.csv): 5,000 rows with known
// dependencies. region drives employment, employment drives income and age.
//   region    ~ {north .4, south .3, east .2, west .1}
//   employed  ~ Bernoulli(p_region), p = {north .9, south .7, east .3, west .1}
//   income    ~ N(55, 8) employed, N(18, 5) unemployed  (bimodal overall)
//   age       ~ N(45, 10) employed, N(34, 9) unemployed

#include <cstdio>
#include <filesystem>

#include "tabsynth/csv.hpp"
#include "tabsynth/rng.hpp"

using namespace tabsynth;

int main(int argc, char** argv) {
    const std::filesystem::path out = argc > 1 ? argv[1] : "data/toy.csv";
    const std::size_t n = 5000;

    Table t;
    ColumnSpec age, income, region, employed;
    age.name = "age";
    income.name = "income";
    region.name = "region";
    region.kind = ColumnKind::categorical;
    region.categories = {"east", "north", "south", "west"};
    employed.name = "employed";
    employed.kind = ColumnKind::categorical;
    employed.categories = {"no", "yes"};
    t.schema.columns = {age, income, region, employed};
    t.columns.resize(4);
    t.columns[0].kind = ColumnKind::continuous;
    t.columns[1].kind = ColumnKind::continuous;
    t.columns[2].kind = ColumnKind::categorical;
    t.columns[3].kind = ColumnKind::categorical;

    RngStream rng(20240817);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        // categories are stored sorted: east=0, north=1, south=2, west=3
        int reg;
        double p_emp;
        if (u < 0.4) {
            reg = 1;  // north
            p_emp = 0.9;
        } else if (u < 0.7) {
            reg = 2;  // south
            p_emp = 0.7;
        } else if (u < 0.9) {
            reg = 0;  // east
            p_emp = 0.3;
        } else {
            reg = 3;  // west
            p_emp = 0.1;
        }
        const int emp = rng.uniform() < p_emp ? 1 : 0;
        const double income_v = emp ? rng.normal(55.0, 8.0) : rng.normal(18.0, 5.0);
        const double age_v = emp ? rng.normal(45.0, 10.0) : rng.normal(34.0, 9.0);
        t.columns[0].reals.push_back(age_v);
        t.columns[1].reals.push_back(income_v);
        t.columns[2].cats.push_back(reg);
        t.columns[3].cats.push_back(emp);
    }
    std::filesystem::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    write_csv(t, out);
    std::printf("wrote %zu rows to %s\n", n, out.string().c_str());
    return 0;
}
