#include "tabsynth/transform.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tabsynth {

namespace {

double normal_pdf(double x, double mean, double std) {
    const double z = (x - mean) / std;
    return std::exp(-0.5 * z * z) / (std * 2.5066282746310005024);
}

}  // namespace

ContinuousEncoder fit_continuous_encoder(std::span<const double> values, int max_modes,
                                         double prune_threshold, std::uint64_t seed) {
    if (max_modes < 1) throw std::invalid_argument("fit_continuous_encoder: max_modes >= 1");
    std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() < 2)
        throw std::invalid_argument(
            "fit_continuous_encoder: column is constant; declare it categorical instead");

    VgmOptions opts;
    opts.max_components = max_modes;
    opts.seed = seed;
    auto comps = fit_variational_gmm(values, opts);

    ContinuousEncoder enc;
    double total = 0.0;
    for (const auto& c : comps) {
        if (c.weight <= prune_threshold) continue;
        enc.mode_means.push_back(c.mean);
        enc.mode_stds.push_back(std::max(c.stddev, 1e-12));
        enc.mode_weights.push_back(c.weight);
        total += c.weight;
    }
    if (enc.mode_means.empty()) {
        // All components below threshold: keep the heaviest one.
        const auto it = std::max_element(comps.begin(), comps.end(),
                                         [](const auto& a, const auto& b) { return a.weight < b.weight; });
        enc.mode_means.push_back(it->mean);
        enc.mode_stds.push_back(std::max(it->stddev, 1e-12));
        enc.mode_weights.push_back(1.0);
        total = 1.0;
    }
    for (auto& w : enc.mode_weights) w /= total;
    return enc;
}

int CondLayout::block_of_column(std::size_t schema_col) const {
    for (std::size_t b = 0; b < column.size(); ++b)
        if (column[b] == schema_col) return static_cast<int>(b);
    return -1;
}

CondLayout make_cond_layout(const TableSchema& schema) {
    CondLayout out;
    std::size_t off = 0;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        if (schema.columns[c].kind != ColumnKind::categorical) continue;
        out.column.push_back(c);
        out.offset.push_back(off);
        out.width.push_back(schema.columns[c].categories.size());
        off += schema.columns[c].categories.size();
    }
    out.total = off;
    return out;
}

void TableEncoder::build_layout() {
    layout_.blocks.clear();
    std::size_t off = 0;
    std::size_t enc_idx = 0;
    for (std::size_t c = 0; c < schema_.columns.size(); ++c) {
        EncodedBlock b;
        b.column = c;
        if (schema_.columns[c].kind == ColumnKind::continuous) {
            b.continuous = true;
            b.offset = off;  // scalar slot at offset, modes right after
            b.width = encoders_[enc_idx].mode_count();
            off += 1 + b.width;
            ++enc_idx;
        } else {
            b.continuous = false;
            b.offset = off;
            b.width = schema_.columns[c].categories.size();
            off += b.width;
        }
        layout_.blocks.push_back(b);
    }
    layout_.width = off;
    cond_ = make_cond_layout(schema_);
}

TableEncoder TableEncoder::fit(const Table& table, int max_modes, double prune_threshold,
                               std::uint64_t seed) {
    table.schema.validate();
    TableEncoder enc;
    enc.schema_ = table.schema;
    std::uint64_t salt = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.schema.columns[c].kind != ColumnKind::continuous) continue;
        auto fitted = fit_continuous_encoder(table.columns[c].reals, max_modes, prune_threshold,
                                             splitmix64(seed ^ ++salt));
        fitted.column = table.schema.columns[c].name;
        enc.encoders_.push_back(std::move(fitted));
    }
    enc.build_layout();
    return enc;
}

TableEncoder TableEncoder::from_parts(TableSchema schema, std::vector<ContinuousEncoder> encoders) {
    TableEncoder enc;
    enc.schema_ = std::move(schema);
    enc.encoders_ = std::move(encoders);
    enc.build_layout();
    return enc;
}

Matrix TableEncoder::encode_rows(const Table& table, std::span<const std::size_t> rows,
                                 RngStream& rng) const {
    if (table.schema != schema_)
        throw SchemaError("encode_rows: table schema does not match fitted encoder");
    Matrix out(rows.size(), layout_.width, 0.0);
    std::vector<double> density;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        auto row = out.row(i);
        std::size_t enc_idx = 0;
        for (const auto& block : layout_.blocks) {
            if (block.continuous) {
                const auto& e = encoders_[enc_idx++];
                const double v = table.real_at(r, block.column);
                const std::size_t k = e.mode_count();
                std::size_t mode = 0;
                if (k > 1) {
                    density.resize(k);
                    double total = 0.0;
                    for (std::size_t m = 0; m < k; ++m) {
                        density[m] = e.mode_weights[m] * normal_pdf(v, e.mode_means[m], e.mode_stds[m]);
                        total += density[m];
                    }
                    mode = total > 0.0 ? rng.pick_weighted(density, total)
                                       : static_cast<std::size_t>(std::max_element(e.mode_weights.begin(),
                                                                                   e.mode_weights.end()) -
                                                                  e.mode_weights.begin());
                }
                const double scalar =
                    std::clamp((v - e.mode_means[mode]) / (4.0 * e.mode_stds[mode]), -1.0, 1.0);
                row[block.offset] = scalar;
                row[block.offset + 1 + mode] = 1.0;
            } else {
                row[block.offset + static_cast<std::size_t>(table.cat_at(r, block.column))] = 1.0;
            }
        }
    }
    return out;
}

std::vector<double> TableEncoder::encode_row(const Table& table, std::size_t row, RngStream& rng) const {
    const std::size_t rows[1] = {row};
    Matrix m = encode_rows(table, rows, rng);
    return {m.row(0).begin(), m.row(0).end()};
}

Table TableEncoder::decode_rows(const Matrix& encoded) const {
    if (encoded.cols() != layout_.width)
        throw std::invalid_argument("decode_rows: encoded width " + std::to_string(encoded.cols()) +
                                    " does not match layout width " + std::to_string(layout_.width));
    Table out;
    out.schema = schema_;
    out.columns.resize(schema_.columns.size());
    const std::size_t n = encoded.rows();
    for (std::size_t c = 0; c < schema_.columns.size(); ++c) {
        out.columns[c].kind = schema_.columns[c].kind;
        if (schema_.columns[c].kind == ColumnKind::continuous)
            out.columns[c].reals.reserve(n);
        else
            out.columns[c].cats.reserve(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto row = encoded.row(i);
        std::size_t enc_idx = 0;
        for (const auto& block : layout_.blocks) {
            if (block.continuous) {
                const auto& e = encoders_[enc_idx++];
                std::size_t mode = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t m = 0; m < block.width; ++m) {
                    if (row[block.offset + 1 + m] > best) {
                        best = row[block.offset + 1 + m];
                        mode = m;
                    }
                }
                const double scalar = std::clamp(row[block.offset], -1.0, 1.0);
                out.columns[block.column].reals.push_back(scalar * 4.0 * e.mode_stds[mode] +
                                                          e.mode_means[mode]);
            } else {
                std::size_t cat = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t m = 0; m < block.width; ++m) {
                    if (row[block.offset + m] > best) {
                        best = row[block.offset + m];
                        cat = m;
                    }
                }
                out.columns[block.column].cats.push_back(static_cast<std::int32_t>(cat));
            }
        }
    }
    return out;
}

void CondvecSampler::finish_weights() {
    log_weight_.clear();
    log_weight_total_.clear();
    for (const auto& f : freq_) {
        std::vector<double> lw(f.size());
        double total = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            lw[i] = std::log1p(f[i]);
            total += lw[i];
        }
        log_weight_.push_back(std::move(lw));
        log_weight_total_.push_back(total);
    }
}

CondvecSampler CondvecSampler::build(const Table& table) {
    table.schema.validate();
    CondvecSampler s;
    s.layout_ = make_cond_layout(table.schema);
    const std::size_t n = table.row_count();
    s.freq_.resize(s.layout_.block_count());
    s.buckets_.resize(s.layout_.block_count());
    for (std::size_t b = 0; b < s.layout_.block_count(); ++b) {
        const std::size_t col = s.layout_.column[b];
        s.freq_[b].assign(s.layout_.width[b], 0.0);
        s.buckets_[b].assign(s.layout_.width[b], {});
        for (std::size_t r = 0; r < n; ++r) {
            const auto cat = static_cast<std::size_t>(table.cat_at(r, col));
            s.freq_[b][cat] += 1.0;
            s.buckets_[b][cat].push_back(r);
        }
    }
    s.finish_weights();
    return s;
}

CondvecSampler CondvecSampler::from_frequencies(const TableSchema& schema,
                                                std::vector<std::vector<double>> frequencies) {
    CondvecSampler s;
    s.layout_ = make_cond_layout(schema);
    if (frequencies.size() != s.layout_.block_count())
        throw std::invalid_argument("CondvecSampler: frequency block count mismatch");
    s.freq_ = std::move(frequencies);
    s.finish_weights();
    return s;
}

void CondvecSampler::fill_cond_rows(std::span<const ChosenCondition> chosen, Matrix& cond) const {
    cond = Matrix(chosen.size(), layout_.total, 0.0);
    for (std::size_t i = 0; i < chosen.size(); ++i)
        cond(i, layout_.offset[chosen[i].block] + static_cast<std::size_t>(chosen[i].category)) = 1.0;
}

void CondvecSampler::sample_condvec(std::size_t n, RngStream& rng, Matrix& cond,
                                    std::vector<ChosenCondition>& chosen) const {
    if (layout_.block_count() == 0)
        throw std::invalid_argument("sample_condvec: no categorical columns");
    chosen.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = rng.index(layout_.block_count());
        if (log_weight_total_[b] <= 0.0)
            throw std::invalid_argument("sample_condvec: column '" +
                                        std::to_string(layout_.column[b]) + "' has no observed categories");
        const std::size_t cat = rng.pick_weighted(log_weight_[b], log_weight_total_[b]);
        chosen[i] = {b, static_cast<std::int32_t>(cat)};
    }
    fill_cond_rows(chosen, cond);
}

void CondvecSampler::sample_real_matching(std::span<const ChosenCondition> chosen, RngStream& rng,
                                          std::vector<std::size_t>& rows, Matrix& cond_real) const {
    if (buckets_.empty())
        throw std::logic_error("sample_real_matching: sampler was not built from a table");
    rows.resize(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const auto& bucket = buckets_[chosen[i].block][static_cast<std::size_t>(chosen[i].category)];
        if (bucket.empty())
            throw std::logic_error("sample_real_matching: empty match set for chosen condition");
        rows[i] = bucket[rng.index(bucket.size())];
    }
    fill_cond_rows(chosen, cond_real);
}

std::pair<Matrix, std::vector<ChosenCondition>> sample_condvec(const Table& table, std::size_t n,
                                                               std::uint64_t seed) {
    auto sampler = CondvecSampler::build(table);
    RngStream rng(seed);
    Matrix cond;
    std::vector<ChosenCondition> chosen;
    sampler.sample_condvec(n, rng, cond, chosen);
    return {std::move(cond), std::move(chosen)};
}

std::pair<Table, Matrix> sample_real_matching(const Table& table,
                                              std::span<const ChosenCondition> chosen,
                                              std::uint64_t seed) {
    auto sampler = CondvecSampler::build(table);
    RngStream rng(seed);
    std::vector<std::size_t> rows;
    Matrix cond_real;
    sampler.sample_real_matching(chosen, rng, rows, cond_real);
    return {table.take_rows(rows), std::move(cond_real)};
}

}  // namespace tabsynth
