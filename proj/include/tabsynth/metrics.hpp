#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabsynth/table.hpp"

namespace tabsynth {

struct RegressionSpec {
    std::string target;
    std::vector<std::string> predictors;
};

// Which columns feed each metric. The variable sets are dataset knowledge and
// live in the run config, not in code.
struct MetricSpec {
    std::vector<RegressionSpec> cio_regressions;
    std::vector<std::string> roc_columns;  // categorical; univariate + all bivariate pairs
    std::vector<std::string> tcap_keys;    // categorical
    std::string tcap_target;               // categorical, not among the keys

    void validate(const TableSchema& schema) const;
};

// One fitted regression: coefficient estimates and their 95% CI half-widths.
struct FittedRegression {
    std::vector<double> coef;
    std::vector<double> stderr_;
    bool ok = false;
    std::string note;  // failure reason when !ok
};

// OLS for continuous targets, binary logistic for 2-category targets.
FittedRegression fit_regression(const Table& table, const RegressionSpec& spec);

struct CioResult {
    double value = 0.0;                  // mean overlap over all usable coefficients
    std::size_t coefficients_used = 0;
    std::vector<double> per_coefficient;
    std::vector<std::string> warnings;   // skipped regressions/coefficients
};

// Overlap of two 95% confidence intervals per the two-sided ratio formula;
// negative when disjoint.
double interval_overlap(double lo_o, double hi_o, double lo_s, double hi_s);

CioResult cio(const Table& original, const Table& synthetic, const MetricSpec& spec);

struct RocResult {
    double value = 0.0;                    // pooled mean over per-table means
    std::vector<double> per_table;         // univariate tables first, then bivariate
    std::vector<std::string> table_names;
};

RocResult roc(const Table& original, const Table& synthetic, const MetricSpec& spec);

struct TcapResult {
    double raw = 0.0;
    double baseline = 0.0;
    double normalized = 0.0;
    std::size_t matched_records = 0;
    bool degenerate = false;  // no key matches (or baseline ~ 1): normalized forced to 0
};

TcapResult tcap(const Table& original, const Table& synthetic, std::span<const std::string> keys,
                const std::string& target);

struct UtilityResult {
    double cio = 0.0;
    double roc = 0.0;
    double utility = 0.0;  // (cio + roc) / 2
};

UtilityResult utility(const Table& original, const Table& synthetic, const MetricSpec& spec);

// lambda * (u_i - u_best) + max(r_best, 0) - max(r_i, 0); > 0 means the
// candidate beats the incumbent.
double improvement_score(std::pair<double, double> current_ur, std::pair<double, double> best_ur,
                         double lambda);

struct EvaluationReport {
    double cio = 0.0;
    double roc = 0.0;
    double utility = 0.0;
    double tcap_raw = 0.0;
    double tcap_baseline = 0.0;
    double risk = 0.0;  // normalized TCAP
    std::size_t n_eval = 0;
    CioResult cio_detail;
    RocResult roc_detail;
    TcapResult tcap_detail;

    std::string to_json() const;
    static EvaluationReport from_json(const std::string& text);
};

EvaluationReport evaluate_tables(const Table& original, const Table& synthetic,
                                 const MetricSpec& spec);

// Desk-scale objectives: synthesize n_eval rows, compare against an n_eval-row
// subsample of the original; returns (f_u, f_r). Deterministic under `seed`.
using RowSynthesizer = std::function<Table(std::size_t n, std::uint64_t seed)>;

std::pair<double, double> fast_objectives(const RowSynthesizer& synthesize, const Table& original,
                                          const MetricSpec& spec, std::size_t n_eval,
                                          std::uint64_t seed);

}  // namespace tabsynth
