#include "tabsynth/nsga2.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tabsynth {

double clip_risk(double f_r, double floor) { return std::max(f_r, floor); }

ObjectiveVector objectives_of(double f_u, double f_r, double risk_floor) {
    return {clip_risk(f_r, risk_floor), -f_u};
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.f1 > b.f1 || a.f2 > b.f2) return false;
    return a.f1 < b.f1 || a.f2 < b.f2;
}

SortResult non_dominated_sort(std::span<const ObjectiveVector> pop) {
    const std::size_t n = pop.size();
    SortResult out;
    out.rank.assign(n, 0);
    if (n == 0) return out;

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dom_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(pop[i], pop[j])) {
                dominated[i].push_back(j);
                ++dom_count[j];
            } else if (dominates(pop[j], pop[i])) {
                dominated[j].push_back(i);
                ++dom_count[i];
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dom_count[i] == 0) current.push_back(i);
    int rank = 1;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            out.rank[i] = rank;
            for (std::size_t j : dominated[i])
                if (--dom_count[j] == 0) next.push_back(j);
        }
        std::sort(next.begin(), next.end());
        out.fronts.push_back(std::move(current));
        current = std::move(next);
        ++rank;
    }
    return out;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), kInf);
        return dist;
    }
    auto objective = [&](std::size_t i, int k) { return k == 0 ? front[i].f1 : front[i].f2; };
    std::vector<std::size_t> order(n);
    for (int k = 0; k < 2; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return objective(a, k) < objective(b, k); });
        dist[order.front()] = kInf;
        dist[order.back()] = kInf;
        const double range = objective(order.back(), k) - objective(order.front(), k);
        if (range <= 0.0) continue;  // degenerate objective contributes nothing
        for (std::size_t p = 1; p + 1 < n; ++p) {
            const std::size_t i = order[p];
            if (dist[i] == kInf) continue;
            dist[i] += (objective(order[p + 1], k) - objective(order[p - 1], k)) / range;
        }
    }
    return dist;
}

SelectionResult select_survivors(std::span<const ObjectiveVector> pool, std::size_t mu) {
    const std::size_t n = pool.size();
    if (mu > n) throw std::invalid_argument("select_survivors: mu exceeds pool size");
    SelectionResult res;
    const SortResult sorted = non_dominated_sort(pool);
    res.rank = sorted.rank;
    res.crowd.assign(n, 0.0);
    for (const auto& front : sorted.fronts) {
        std::vector<ObjectiveVector> members;
        members.reserve(front.size());
        for (std::size_t i : front) members.push_back(pool[i]);
        const auto d = crowding_distance(members);
        for (std::size_t p = 0; p < front.size(); ++p) res.crowd[front[p]] = d[p];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (res.rank[a] != res.rank[b]) return res.rank[a] < res.rank[b];
        if (res.crowd[a] != res.crowd[b]) return res.crowd[a] > res.crowd[b];
        return a < b;
    });
    res.survivors.assign(order.begin(), order.begin() + mu);
    return res;
}

}  // namespace tabsynth
