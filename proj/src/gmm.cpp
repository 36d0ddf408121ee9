#include "tabsynth/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tabsynth/rng.hpp"

namespace tabsynth {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double digamma(double x) {
    // Shift into the asymptotic regime, then apply the standard expansion.
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
    return result;
}

// 1-D k-means for initial responsibilities: quantile seeding + Lloyd steps.
std::vector<int> kmeans_assign(std::span<const double> x, int k, std::uint64_t seed) {
    const std::size_t n = x.size();
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> centers(k);
    for (int j = 0; j < k; ++j) {
        const std::size_t pos = static_cast<std::size_t>((2.0 * j + 1.0) / (2.0 * k) * (n - 1));
        centers[j] = sorted[pos];
    }
    // Break ties between identical quantile seeds.
    RngStream rng(seed);
    for (int j = 1; j < k; ++j)
        if (centers[j] <= centers[j - 1])
            centers[j] = centers[j - 1] + 1e-9 * (1.0 + rng.uniform());

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 30; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double d = std::abs(x[i] - centers[j]);
                if (d < bestd) {
                    bestd = d;
                    best = j;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[assign[i]] += x[i];
            ++cnt[assign[i]];
        }
        for (int j = 0; j < k; ++j)
            if (cnt[j] > 0) centers[j] = sum[j] / static_cast<double>(cnt[j]);
        if (!changed) break;
    }
    return assign;
}

}  // namespace

std::vector<GmmComponent> fit_variational_gmm(std::span<const double> raw_values,
                                              const VgmOptions& opts) {
    if (raw_values.size() < 2)
        throw std::invalid_argument("fit_variational_gmm: need at least 2 values");
    if (opts.max_components < 1) throw std::invalid_argument("fit_variational_gmm: max_components >= 1");

    // Quantile-stratified subsample: sorted order statistics keep the shape of
    // the distribution while bounding the per-iteration cost.
    std::vector<double> values(raw_values.begin(), raw_values.end());
    std::sort(values.begin(), values.end());
    if (opts.fit_subsample > 0 && values.size() > opts.fit_subsample) {
        std::vector<double> picked;
        picked.reserve(opts.fit_subsample);
        const double stride = static_cast<double>(values.size()) /
                              static_cast<double>(opts.fit_subsample);
        for (std::size_t i = 0; i < opts.fit_subsample; ++i)
            picked.push_back(values[static_cast<std::size_t>((i + 0.5) * stride)]);
        values = std::move(picked);
    }
    const std::size_t n = values.size();

    double data_mean = 0.0;
    for (double v : values) data_mean += v;
    data_mean /= static_cast<double>(n);
    double data_var = 0.0;
    for (double v : values) data_var += (v - data_mean) * (v - data_mean);
    data_var /= static_cast<double>(n);
    if (data_var <= 0.0)
        throw std::invalid_argument("fit_variational_gmm: constant data (no variance)");

    const int k = opts.max_components;
    // Priors (Gaussian-Wishart in 1-D): mean prior at the data mean, scale
    // prior at the data variance.
    const double alpha0 = opts.weight_concentration;
    const double beta0 = 1.0;
    const double m0 = data_mean;
    const double nu0 = 1.0;
    const double winv0 = data_var;

    std::vector<double> resp(n * k, 0.0);
    {
        const auto assign = kmeans_assign(values, k, opts.seed);
        for (std::size_t i = 0; i < n; ++i) resp[i * k + assign[i]] = 1.0;
    }

    std::vector<double> nk(k), xbar(k), sk(k);
    std::vector<double> beta(k), m(k), nu(k), winv(k);
    std::vector<double> log_pi(k), exp_ln_lambda(k), weights(k);
    std::vector<double> gamma1(k), gamma2(k);
    std::vector<double> prev_m(k, std::numeric_limits<double>::infinity());
    std::vector<double> prev_w(k, std::numeric_limits<double>::infinity());

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        // M-step: responsibilities -> sufficient statistics -> posteriors.
        for (int j = 0; j < k; ++j) {
            double w = 0.0, s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w += resp[i * k + j];
                s += resp[i * k + j] * values[i];
            }
            nk[j] = w;
            xbar[j] = w > 1e-12 ? s / w : m0;
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = values[i] - xbar[j];
                var += resp[i * k + j] * d * d;
            }
            sk[j] = w > 1e-12 ? var / w : 0.0;
        }
        for (int j = 0; j < k; ++j) {
            beta[j] = beta0 + nk[j];
            m[j] = (beta0 * m0 + nk[j] * xbar[j]) / beta[j];
            nu[j] = nu0 + nk[j];
            const double diff = xbar[j] - m0;
            winv[j] = winv0 + nk[j] * sk[j] + (beta0 * nk[j] / beta[j]) * diff * diff;
        }
        // Stick-breaking weight expectations.
        double tail = std::accumulate(nk.begin(), nk.end(), 0.0);
        double acc_ln_1mv = 0.0;
        for (int j = 0; j < k; ++j) {
            tail -= nk[j];
            gamma1[j] = 1.0 + nk[j];
            gamma2[j] = alpha0 + tail;
            const double denom = digamma(gamma1[j] + gamma2[j]);
            log_pi[j] = digamma(gamma1[j]) - denom + acc_ln_1mv;
            acc_ln_1mv += digamma(gamma2[j]) - denom;
        }
        for (int j = 0; j < k; ++j)
            exp_ln_lambda[j] = digamma(0.5 * nu[j]) + std::log(2.0) - std::log(winv[j]);

        // E-step with log-sum-exp normalization.
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double d = values[i] - m[j];
                const double quad = 1.0 / beta[j] + nu[j] / winv[j] * d * d;
                const double lp = log_pi[j] + 0.5 * (exp_ln_lambda[j] - kLog2Pi) - 0.5 * quad;
                resp[i * k + j] = lp;
                mx = std::max(mx, lp);
            }
            double z = 0.0;
            for (int j = 0; j < k; ++j) z += std::exp(resp[i * k + j] - mx);
            const double logz = mx + std::log(z);
            for (int j = 0; j < k; ++j) resp[i * k + j] = std::exp(resp[i * k + j] - logz);
        }

        // Expected stick weights; convergence tracks both means and weights
        // since redundant components drain weight long after means settle.
        {
            double stick = 1.0;
            for (int j = 0; j < k; ++j) {
                const double ev = gamma1[j] / (gamma1[j] + gamma2[j]);
                weights[j] = ev * stick;
                stick *= (1.0 - ev);
            }
        }
        double delta = 0.0;
        for (int j = 0; j < k; ++j) {
            delta = std::max(delta, std::abs(m[j] - prev_m[j]));
            delta = std::max(delta, std::abs(weights[j] - prev_w[j]));
        }
        prev_m = m;
        prev_w = weights;
        if (delta < opts.tolerance) break;
    }

    // Posterior-expected mixture weights from the stick lengths.
    std::vector<GmmComponent> out(k);
    double stick = 1.0, total = 0.0;
    for (int j = 0; j < k; ++j) {
        const double ev = gamma1[j] / (gamma1[j] + gamma2[j]);
        out[j].weight = ev * stick;
        stick *= (1.0 - ev);
        out[j].mean = m[j];
        out[j].stddev = std::sqrt(winv[j] / nu[j]);
        total += out[j].weight;
    }
    for (auto& c : out) c.weight /= total;
    return out;
}

}  // namespace tabsynth
