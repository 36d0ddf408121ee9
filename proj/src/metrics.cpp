#include "tabsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "tabsynth/rng.hpp"

namespace tabsynth {

namespace {

constexpr double kZ95 = 1.959963984540054;  // two-sided 95% normal quantile

void require_categorical(const TableSchema& schema, const std::string& name, const char* where) {
    const int idx = schema.column_index(name);
    if (idx < 0) throw SchemaError(std::string(where) + ": unknown column '" + name + "'");
    if (schema.columns[static_cast<std::size_t>(idx)].kind != ColumnKind::categorical)
        throw SchemaError(std::string(where) + ": column '" + name + "' must be categorical");
}

// Dense design matrix with intercept; categorical predictors one-hot encoded
// with the first category as reference level.
struct Design {
    std::size_t n = 0, p = 0;
    std::vector<double> x;  // row-major n x p
    std::vector<double> y;
    bool logistic = false;
};

Design build_design(const Table& table, const RegressionSpec& spec) {
    const auto& schema = table.schema;
    const int tcol = schema.column_index(spec.target);
    if (tcol < 0) throw SchemaError("cio: unknown target column '" + spec.target + "'");
    Design d;
    d.n = table.row_count();
    d.p = 1;
    std::vector<int> pred_idx;
    for (const auto& name : spec.predictors) {
        const int c = schema.column_index(name);
        if (c < 0) throw SchemaError("cio: unknown predictor column '" + name + "'");
        pred_idx.push_back(c);
        const auto& col = schema.columns[static_cast<std::size_t>(c)];
        d.p += col.kind == ColumnKind::continuous ? 1 : col.categories.size() - 1;
    }
    d.x.assign(d.n * d.p, 0.0);
    d.y.resize(d.n);

    const auto& tspec = schema.columns[static_cast<std::size_t>(tcol)];
    if (tspec.kind == ColumnKind::categorical) {
        if (tspec.categories.size() != 2)
            throw SchemaError("cio: logistic regression target '" + spec.target +
                              "' must have exactly 2 categories");
        d.logistic = true;
        for (std::size_t r = 0; r < d.n; ++r)
            d.y[r] = table.cat_at(r, static_cast<std::size_t>(tcol)) == 1 ? 1.0 : 0.0;
    } else {
        for (std::size_t r = 0; r < d.n; ++r) d.y[r] = table.real_at(r, static_cast<std::size_t>(tcol));
    }
    for (std::size_t r = 0; r < d.n; ++r) {
        double* row = d.x.data() + r * d.p;
        row[0] = 1.0;
        std::size_t j = 1;
        for (int c : pred_idx) {
            const auto& cs = schema.columns[static_cast<std::size_t>(c)];
            if (cs.kind == ColumnKind::continuous) {
                row[j++] = table.real_at(r, static_cast<std::size_t>(c));
            } else {
                const auto cat = table.cat_at(r, static_cast<std::size_t>(c));
                if (cat > 0) row[j + static_cast<std::size_t>(cat) - 1] = 1.0;
                j += cs.categories.size() - 1;
            }
        }
    }
    return d;
}

// Cholesky solve of the symmetric system A x = b; also produces diag(A^-1).
// Returns false when A is not positive definite (singular design).
bool solve_spd(std::vector<double> a, std::size_t p, std::vector<double> b,
               std::vector<double>& solution, std::vector<double>& inv_diag) {
    // Factor A = L L^T in place.
    for (std::size_t j = 0; j < p; ++j) {
        double diag = a[j * p + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
        if (!(diag > 1e-12)) return false;
        const double l = std::sqrt(diag);
        a[j * p + j] = l;
        for (std::size_t i = j + 1; i < p; ++i) {
            double v = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
            a[i * p + j] = v / l;
        }
    }
    auto forward = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t k = 0; k < i; ++k) v[i] -= a[i * p + k] * v[k];
            v[i] /= a[i * p + i];
        }
    };
    auto backward = [&](std::vector<double>& v) {
        for (std::size_t i = p; i-- > 0;) {
            for (std::size_t k = i + 1; k < p; ++k) v[i] -= a[k * p + i] * v[k];
            v[i] /= a[i * p + i];
        }
    };
    solution = std::move(b);
    forward(solution);
    backward(solution);
    inv_diag.assign(p, 0.0);
    std::vector<double> e(p);
    for (std::size_t j = 0; j < p; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        forward(e);
        backward(e);
        inv_diag[j] = e[j];
    }
    return true;
}

double sigmoid_local(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

FittedRegression fit_ols(const Design& d) {
    FittedRegression out;
    const std::size_t n = d.n, p = d.p;
    if (n < p + 2) {
        out.note = "too few rows";
        return out;
    }
    std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = d.x.data() + r * p;
        for (std::size_t i = 0; i < p; ++i) {
            xty[i] += row[i] * d.y[r];
            for (std::size_t j = i; j < p; ++j) xtx[i * p + j] += row[i] * row[j];
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j) xtx[i * p + j] = xtx[j * p + i];
    std::vector<double> beta, inv_diag;
    if (!solve_spd(xtx, p, xty, beta, inv_diag)) {
        out.note = "singular design matrix";
        return out;
    }
    double rss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = d.x.data() + r * p;
        double pred = 0.0;
        for (std::size_t j = 0; j < p; ++j) pred += row[j] * beta[j];
        const double e = d.y[r] - pred;
        rss += e * e;
    }
    const double sigma2 = rss / static_cast<double>(n - p);
    out.coef = beta;
    out.stderr_.resize(p);
    for (std::size_t j = 0; j < p; ++j) out.stderr_[j] = std::sqrt(std::max(sigma2 * inv_diag[j], 0.0));
    out.ok = true;
    return out;
}

FittedRegression fit_logistic(const Design& d) {
    FittedRegression out;
    const std::size_t n = d.n, p = d.p;
    if (n < p + 2) {
        out.note = "too few rows";
        return out;
    }
    std::vector<double> beta(p, 0.0);
    std::vector<double> w(n), mu(n);
    std::vector<double> xtwx(p * p), grad(p), delta, inv_diag;
    for (int iter = 0; iter < 60; ++iter) {
        for (std::size_t r = 0; r < n; ++r) {
            const double* row = d.x.data() + r * p;
            double eta = 0.0;
            for (std::size_t j = 0; j < p; ++j) eta += row[j] * beta[j];
            mu[r] = sigmoid_local(eta);
            w[r] = std::max(mu[r] * (1.0 - mu[r]), 1e-10);
        }
        std::fill(xtwx.begin(), xtwx.end(), 0.0);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const double* row = d.x.data() + r * p;
            const double res = d.y[r] - mu[r];
            for (std::size_t i = 0; i < p; ++i) {
                grad[i] += row[i] * res;
                for (std::size_t j = i; j < p; ++j) xtwx[i * p + j] += w[r] * row[i] * row[j];
            }
        }
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < i; ++j) xtwx[i * p + j] = xtwx[j * p + i];
        if (!solve_spd(xtwx, p, grad, delta, inv_diag)) {
            out.note = "singular weighted design";
            return out;
        }
        double step = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            beta[j] += delta[j];
            step = std::max(step, std::abs(delta[j]));
        }
        double big = 0.0;
        for (double b : beta) big = std::max(big, std::abs(b));
        if (big > 30.0) {
            out.note = "separation (diverging coefficients)";
            return out;
        }
        if (step < 1e-10) {
            out.coef = beta;
            out.stderr_.resize(p);
            for (std::size_t j = 0; j < p; ++j) out.stderr_[j] = std::sqrt(std::max(inv_diag[j], 0.0));
            out.ok = true;
            return out;
        }
    }
    out.note = "IRLS did not converge";
    return out;
}

std::string pair_name(const std::string& a, const std::string& b) { return a + "*" + b; }

}  // namespace

void MetricSpec::validate(const TableSchema& schema) const {
    for (const auto& reg : cio_regressions) {
        if (schema.column_index(reg.target) < 0)
            throw SchemaError("metric spec: unknown cio target '" + reg.target + "'");
        if (reg.predictors.empty())
            throw SchemaError("metric spec: cio regression for '" + reg.target + "' has no predictors");
        for (const auto& pr : reg.predictors) {
            if (schema.column_index(pr) < 0)
                throw SchemaError("metric spec: unknown cio predictor '" + pr + "'");
            if (pr == reg.target)
                throw SchemaError("metric spec: target '" + reg.target + "' used as its own predictor");
        }
    }
    if (roc_columns.empty()) throw SchemaError("metric spec: roc_columns must not be empty");
    for (const auto& c : roc_columns) require_categorical(schema, c, "metric spec (roc)");
    if (tcap_keys.empty()) throw SchemaError("metric spec: tcap_keys must not be empty");
    for (const auto& c : tcap_keys) {
        require_categorical(schema, c, "metric spec (tcap keys)");
        if (c == tcap_target)
            throw SchemaError("metric spec: tcap target '" + tcap_target + "' cannot be a key");
    }
    require_categorical(schema, tcap_target, "metric spec (tcap target)");
}

FittedRegression fit_regression(const Table& table, const RegressionSpec& spec) {
    const Design d = build_design(table, spec);
    return d.logistic ? fit_logistic(d) : fit_ols(d);
}

double interval_overlap(double lo_o, double hi_o, double lo_s, double hi_s) {
    const double inter = std::min(hi_o, hi_s) - std::max(lo_o, lo_s);
    return 0.5 * (inter / (hi_o - lo_o) + inter / (hi_s - lo_s));
}

CioResult cio(const Table& original, const Table& synthetic, const MetricSpec& spec) {
    if (original.schema != synthetic.schema)
        throw SchemaError("cio: original and synthetic schemas differ");
    CioResult out;
    double total = 0.0;
    for (const auto& reg : spec.cio_regressions) {
        const auto fo = fit_regression(original, reg);
        const auto fs = fit_regression(synthetic, reg);
        if (!fo.ok || !fs.ok) {
            out.warnings.push_back("regression '" + reg.target + "' skipped: " +
                                   (fo.ok ? "" : "original: " + fo.note) +
                                   (fs.ok ? "" : " synthetic: " + fs.note));
            continue;
        }
        for (std::size_t j = 0; j < fo.coef.size(); ++j) {
            const double ho = kZ95 * fo.stderr_[j];
            const double hs = kZ95 * fs.stderr_[j];
            if (ho <= 0.0 || hs <= 0.0) {
                out.warnings.push_back("regression '" + reg.target + "' coefficient " +
                                       std::to_string(j) + " skipped: zero-width interval");
                continue;
            }
            const double ov = interval_overlap(fo.coef[j] - ho, fo.coef[j] + ho, fs.coef[j] - hs,
                                               fs.coef[j] + hs);
            out.per_coefficient.push_back(ov);
            total += ov;
            ++out.coefficients_used;
        }
    }
    if (out.coefficients_used == 0)
        throw MetricError("cio: no usable regression coefficients (all skipped)");
    out.value = total / static_cast<double>(out.coefficients_used);
    return out;
}

RocResult roc(const Table& original, const Table& synthetic, const MetricSpec& spec) {
    if (original.schema != synthetic.schema)
        throw SchemaError("roc: original and synthetic schemas differ");
    const auto& schema = original.schema;
    RocResult out;

    auto cell_ratio = [](double yo, double ys) {
        if (yo == 0.0 && ys == 0.0) return 1.0;  // agreement on absence
        return std::min(yo, ys) / std::max(yo, ys);
    };

    // Univariate frequency tables.
    for (const auto& name : spec.roc_columns) {
        const auto c = static_cast<std::size_t>(schema.column_index(name));
        const std::size_t k = schema.columns[c].categories.size();
        std::vector<double> co(k, 0.0), cs(k, 0.0);
        for (std::size_t r = 0; r < original.row_count(); ++r) co[original.cat_at(r, c)] += 1.0;
        for (std::size_t r = 0; r < synthetic.row_count(); ++r) cs[synthetic.cat_at(r, c)] += 1.0;
        double mean = 0.0;
        for (std::size_t i = 0; i < k; ++i) mean += cell_ratio(co[i], cs[i]);
        out.per_table.push_back(mean / static_cast<double>(k));
        out.table_names.push_back(name);
    }
    // Bivariate cross-tabulations over all unordered pairs.
    for (std::size_t a = 0; a < spec.roc_columns.size(); ++a) {
        for (std::size_t b = a + 1; b < spec.roc_columns.size(); ++b) {
            const auto ca = static_cast<std::size_t>(schema.column_index(spec.roc_columns[a]));
            const auto cb = static_cast<std::size_t>(schema.column_index(spec.roc_columns[b]));
            const std::size_t ka = schema.columns[ca].categories.size();
            const std::size_t kb = schema.columns[cb].categories.size();
            std::vector<double> co(ka * kb, 0.0), cs(ka * kb, 0.0);
            for (std::size_t r = 0; r < original.row_count(); ++r)
                co[static_cast<std::size_t>(original.cat_at(r, ca)) * kb + original.cat_at(r, cb)] += 1.0;
            for (std::size_t r = 0; r < synthetic.row_count(); ++r)
                cs[static_cast<std::size_t>(synthetic.cat_at(r, ca)) * kb + synthetic.cat_at(r, cb)] += 1.0;
            double mean = 0.0;
            for (std::size_t i = 0; i < co.size(); ++i) mean += cell_ratio(co[i], cs[i]);
            out.per_table.push_back(mean / static_cast<double>(co.size()));
            out.table_names.push_back(pair_name(spec.roc_columns[a], spec.roc_columns[b]));
        }
    }
    double total = 0.0;
    for (double v : out.per_table) total += v;
    out.value = total / static_cast<double>(out.per_table.size());
    return out;
}

TcapResult tcap(const Table& original, const Table& synthetic, std::span<const std::string> keys,
                const std::string& target) {
    if (original.schema != synthetic.schema)
        throw SchemaError("tcap: original and synthetic schemas differ");
    const auto& schema = original.schema;
    std::vector<std::size_t> key_cols;
    for (const auto& k : keys) {
        require_categorical(schema, k, "tcap");
        key_cols.push_back(static_cast<std::size_t>(schema.column_index(k)));
    }
    require_categorical(schema, target, "tcap");
    const auto tcol = static_cast<std::size_t>(schema.column_index(target));
    const std::size_t tk = schema.columns[tcol].categories.size();

    // Synthetic key combination -> per-target-value counts.
    std::map<std::vector<std::int32_t>, std::vector<double>> synth_index;
    std::vector<double> marginal(tk, 0.0);
    std::vector<std::int32_t> key(key_cols.size());
    for (std::size_t r = 0; r < synthetic.row_count(); ++r) {
        for (std::size_t i = 0; i < key_cols.size(); ++i) key[i] = synthetic.cat_at(r, key_cols[i]);
        auto& counts = synth_index.try_emplace(key, std::vector<double>(tk, 0.0)).first->second;
        counts[synthetic.cat_at(r, tcol)] += 1.0;
        marginal[synthetic.cat_at(r, tcol)] += 1.0;
    }
    const double synth_n = static_cast<double>(synthetic.row_count());
    for (auto& m : marginal) m /= synth_n;

    TcapResult out;
    double raw_sum = 0.0, base_sum = 0.0;
    for (std::size_t r = 0; r < original.row_count(); ++r) {
        for (std::size_t i = 0; i < key_cols.size(); ++i) key[i] = original.cat_at(r, key_cols[i]);
        const auto it = synth_index.find(key);
        if (it == synth_index.end()) continue;
        double match_total = 0.0;
        for (double c : it->second) match_total += c;
        const auto tval = original.cat_at(r, tcol);
        raw_sum += it->second[static_cast<std::size_t>(tval)] / match_total;
        base_sum += marginal[static_cast<std::size_t>(tval)];
        ++out.matched_records;
    }
    if (out.matched_records == 0) {
        out.degenerate = true;  // the adversary learns nothing
        return out;
    }
    out.raw = raw_sum / static_cast<double>(out.matched_records);
    out.baseline = base_sum / static_cast<double>(out.matched_records);
    if (out.baseline >= 1.0 - 1e-12) {
        out.degenerate = true;
        out.normalized = 0.0;
    } else {
        out.normalized = (out.raw - out.baseline) / (1.0 - out.baseline);
    }
    return out;
}

UtilityResult utility(const Table& original, const Table& synthetic, const MetricSpec& spec) {
    UtilityResult out;
    out.cio = cio(original, synthetic, spec).value;
    out.roc = roc(original, synthetic, spec).value;
    out.utility = 0.5 * (out.cio + out.roc);
    return out;
}

double improvement_score(std::pair<double, double> current_ur, std::pair<double, double> best_ur,
                         double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("improvement_score: lambda must be > 0");
    return lambda * (current_ur.first - best_ur.first) + std::max(best_ur.second, 0.0) -
           std::max(current_ur.second, 0.0);
}

std::string EvaluationReport::to_json() const {
    nlohmann::json j;
    j["cio"] = cio;
    j["roc"] = roc;
    j["utility"] = utility;
    j["tcap_raw"] = tcap_raw;
    j["tcap_baseline"] = tcap_baseline;
    j["risk"] = risk;
    j["n_eval"] = n_eval;
    j["cio_detail"] = {{"per_coefficient", cio_detail.per_coefficient},
                       {"coefficients_used", cio_detail.coefficients_used},
                       {"warnings", cio_detail.warnings}};
    j["roc_detail"] = {{"per_table", roc_detail.per_table}, {"table_names", roc_detail.table_names}};
    j["tcap_detail"] = {{"raw", tcap_detail.raw},
                        {"baseline", tcap_detail.baseline},
                        {"normalized", tcap_detail.normalized},
                        {"matched_records", tcap_detail.matched_records},
                        {"degenerate", tcap_detail.degenerate}};
    return j.dump(2);
}

EvaluationReport EvaluationReport::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("evaluation report json: ") + e.what());
    }
    EvaluationReport r;
    r.cio = j.at("cio").get<double>();
    r.roc = j.at("roc").get<double>();
    r.utility = j.at("utility").get<double>();
    r.tcap_raw = j.at("tcap_raw").get<double>();
    r.tcap_baseline = j.at("tcap_baseline").get<double>();
    r.risk = j.at("risk").get<double>();
    r.n_eval = j.at("n_eval").get<std::size_t>();
    const auto& cd = j.at("cio_detail");
    r.cio_detail.per_coefficient = cd.at("per_coefficient").get<std::vector<double>>();
    r.cio_detail.coefficients_used = cd.at("coefficients_used").get<std::size_t>();
    r.cio_detail.warnings = cd.at("warnings").get<std::vector<std::string>>();
    r.cio_detail.value = r.cio;
    const auto& rd = j.at("roc_detail");
    r.roc_detail.per_table = rd.at("per_table").get<std::vector<double>>();
    r.roc_detail.table_names = rd.at("table_names").get<std::vector<std::string>>();
    r.roc_detail.value = r.roc;
    const auto& td = j.at("tcap_detail");
    r.tcap_detail.raw = td.at("raw").get<double>();
    r.tcap_detail.baseline = td.at("baseline").get<double>();
    r.tcap_detail.normalized = td.at("normalized").get<double>();
    r.tcap_detail.matched_records = td.at("matched_records").get<std::size_t>();
    r.tcap_detail.degenerate = td.at("degenerate").get<bool>();
    return r;
}

EvaluationReport evaluate_tables(const Table& original, const Table& synthetic,
                                 const MetricSpec& spec) {
    spec.validate(original.schema);
    EvaluationReport rep;
    rep.cio_detail = cio(original, synthetic, spec);
    rep.roc_detail = roc(original, synthetic, spec);
    rep.tcap_detail = tcap(original, synthetic, spec.tcap_keys, spec.tcap_target);
    rep.cio = rep.cio_detail.value;
    rep.roc = rep.roc_detail.value;
    rep.utility = 0.5 * (rep.cio + rep.roc);
    rep.tcap_raw = rep.tcap_detail.raw;
    rep.tcap_baseline = rep.tcap_detail.baseline;
    rep.risk = rep.tcap_detail.normalized;
    rep.n_eval = synthetic.row_count();
    return rep;
}

std::pair<double, double> fast_objectives(const RowSynthesizer& synthesize, const Table& original,
                                          const MetricSpec& spec, std::size_t n_eval,
                                          std::uint64_t seed) {
    if (n_eval < 100) throw std::invalid_argument("fast_objectives: n_eval must be >= 100");
    const Table subsample = sample_rows(original, n_eval, splitmix64(seed ^ 0x5eedu));
    const Table synthetic = synthesize(n_eval, splitmix64(seed ^ 0x9e37u));
    const UtilityResult u = utility(subsample, synthetic, spec);
    const TcapResult t = tcap(subsample, synthetic, spec.tcap_keys, spec.tcap_target);
    return {u.utility, t.normalized};
}

}  // namespace tabsynth
