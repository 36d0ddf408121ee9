#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tabsynth {

// Minimized objective pair: (clipped risk, negated utility).
struct ObjectiveVector {
    double f1 = 0.0;
    double f2 = 0.0;
};

double clip_risk(double f_r, double floor = 0.0);

ObjectiveVector objectives_of(double f_u, double f_r, double risk_floor = 0.0);

// a dominates b: <= in every component, < in at least one.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

struct SortResult {
    std::vector<std::vector<std::size_t>> fronts;  // indices; front 0 is non-dominated
    std::vector<int> rank;                         // 1-based rank per individual
};

SortResult non_dominated_sort(std::span<const ObjectiveVector> pop);

// Crowding distances for the members of one front (any order). Boundary
// members get +infinity; ties in an objective are broken by input position.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

struct SelectionResult {
    std::vector<std::size_t> survivors;  // mu pool indices, selection order
    std::vector<int> rank;               // per pool member
    std::vector<double> crowd;           // per pool member
};

// NSGA-II survivor selection over a pooled population: sort by (rank asc,
// crowding desc), stable tie break by pool index, keep the first mu.
SelectionResult select_survivors(std::span<const ObjectiveVector> pool, std::size_t mu);

}  // namespace tabsynth
