#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabsynth/gmm.hpp"
#include "tabsynth/matrix.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/table.hpp"

namespace tabsynth {

// Mode-specific normalization parameters for one continuous column.
struct ContinuousEncoder {
    std::string column;
    std::vector<double> mode_means;
    std::vector<double> mode_stds;     // > 0
    std::vector<double> mode_weights;  // normalized
    std::size_t mode_count() const { return mode_means.size(); }
};

ContinuousEncoder fit_continuous_encoder(std::span<const double> values, int max_modes,
                                         double prune_threshold = 0.005, std::uint64_t seed = 0);

// Position of one column's slots inside an encoded row. Continuous columns
// occupy [scalar][k mode slots]; categorical columns one block of |categories|.
struct EncodedBlock {
    std::size_t column = 0;  // schema column index
    bool continuous = false;
    std::size_t offset = 0;
    std::size_t width = 0;  // mode count or category count (excludes the scalar slot)
};

struct EncodedLayout {
    std::vector<EncodedBlock> blocks;  // schema order
    std::size_t width = 0;             // D_enc
};

// Layout of the conditional vector: one block per categorical column, blocks
// in schema order, width = total category count (D_cond).
struct CondLayout {
    std::vector<std::size_t> column;  // schema column index per block
    std::vector<std::size_t> offset;
    std::vector<std::size_t> width;
    std::size_t total = 0;

    std::size_t block_count() const { return column.size(); }
    int block_of_column(std::size_t schema_col) const;
};

CondLayout make_cond_layout(const TableSchema& schema);

// Fitted row <-> encoded-space mapping for a whole table.
class TableEncoder {
public:
    static TableEncoder fit(const Table& table, int max_modes = 10, double prune_threshold = 0.005,
                            std::uint64_t seed = 0);

    const TableSchema& schema() const { return schema_; }
    const EncodedLayout& layout() const { return layout_; }
    const CondLayout& cond_layout() const { return cond_; }
    std::size_t encoded_width() const { return layout_.width; }
    std::size_t cond_width() const { return cond_.total; }
    const std::vector<ContinuousEncoder>& continuous_encoders() const { return encoders_; }

    // Hard-encode the given rows of `table`; mode sampling uses `rng`.
    Matrix encode_rows(const Table& table, std::span<const std::size_t> rows, RngStream& rng) const;
    std::vector<double> encode_row(const Table& table, std::size_t row, RngStream& rng) const;

    // Inverse: argmax per block, scalar de-normalized within the argmax mode.
    Table decode_rows(const Matrix& encoded) const;

    // For (de)serialization.
    static TableEncoder from_parts(TableSchema schema, std::vector<ContinuousEncoder> encoders);

private:
    TableSchema schema_;
    std::vector<ContinuousEncoder> encoders_;  // one per continuous column, schema order
    EncodedLayout layout_;
    CondLayout cond_;

    void build_layout();
};

// One (column, category) condition, identified by cond-layout block index.
struct ChosenCondition {
    std::size_t block = 0;  // index into CondLayout blocks
    std::int32_t category = 0;
};

// Training-by-sampling: categorical column uniform, category by log(1+freq),
// matching real rows drawn uniformly within the (column, category) bucket.
class CondvecSampler {
public:
    static CondvecSampler build(const Table& table);
    static CondvecSampler from_frequencies(const TableSchema& schema,
                                           std::vector<std::vector<double>> frequencies);

    const CondLayout& layout() const { return layout_; }
    const std::vector<std::vector<double>>& frequencies() const { return freq_; }

    void sample_condvec(std::size_t n, RngStream& rng, Matrix& cond,
                        std::vector<ChosenCondition>& chosen) const;

    // Row indices into the table this sampler was built from; requires buckets.
    void sample_real_matching(std::span<const ChosenCondition> chosen, RngStream& rng,
                              std::vector<std::size_t>& rows, Matrix& cond_real) const;

    void fill_cond_rows(std::span<const ChosenCondition> chosen, Matrix& cond) const;

private:
    CondLayout layout_;
    std::vector<std::vector<double>> freq_;         // per block: raw category frequency
    std::vector<std::vector<double>> log_weight_;   // log(1 + freq)
    std::vector<double> log_weight_total_;          // per block
    std::vector<std::vector<std::vector<std::size_t>>> buckets_;  // block -> category -> rows

    void finish_weights();
};

// Conveniences matching the seed-based operation contracts.
std::pair<Matrix, std::vector<ChosenCondition>> sample_condvec(const Table& table, std::size_t n,
                                                               std::uint64_t seed);
std::pair<Table, Matrix> sample_real_matching(const Table& table,
                                              std::span<const ChosenCondition> chosen,
                                              std::uint64_t seed);

}  // namespace tabsynth
