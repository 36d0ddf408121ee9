#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tabsynth {

// One fitted mixture component of a 1-D variational Gaussian mixture.
struct GmmComponent {
    double mean = 0.0;
    double stddev = 1.0;
    double weight = 0.0;
};

struct VgmOptions {
    int max_components = 10;
    double weight_concentration = 0.001;  // stick-breaking concentration
    int max_iterations = 4000;            // redundant components merge slowly
    double tolerance = 1e-8;              // on per-iteration mean/weight drift
    std::size_t fit_subsample = 2500;     // quantile-stratified cap on fit points
    std::uint64_t seed = 0;               // k-means initialization
};

// Variational Bayesian Gaussian mixture (truncated stick-breaking prior) on
// 1-D data. Returns all components with their posterior-expected weights;
// callers prune low-weight components. Requires >= 2 distinct values.
std::vector<GmmComponent> fit_variational_gmm(std::span<const double> values, const VgmOptions& opts);

}  // namespace tabsynth
