#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace segq {

// Buffer capacity K and thresholds L_1 < ... < L_{T-1} < K.
//
// Regions are 0-based here: region 0 covers lengths [0, L_1], region k covers
// [L_k + 1, L_{k+1}] and the last region ends at K. The length used to pick a
// region is the system length at service initiation; a post-departure length
// of 0 means the next packet starts service alone, which is also region 0.
class ThresholdPolicy {
public:
    ThresholdPolicy(int capacity, std::vector<int> thresholds);

    int capacity() const { return capacity_; }
    const std::vector<int>& thresholds() const { return thresholds_; }
    std::size_t region_count() const { return thresholds_.size() + 1; }

    std::size_t region_of(int length) const;

    // Inclusive [first, last] length range of a region.
    std::pair<int, int> region_range(std::size_t region) const;

    // Lower boundaries used by the delay staircase: 0, L_1, ..., L_{T-1}.
    int staircase_start(std::size_t region) const;

    // Sum of dist over each region's length range.
    std::vector<double> region_masses(std::span<const double> dist) const;

    friend bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;

private:
    int capacity_;
    std::vector<int> thresholds_;
};

// Checks ordering and bounds without throwing; used by the searches.
bool thresholds_valid(std::span<const int> thresholds, int capacity);

struct ArrivalSpec {
    explicit ArrivalSpec(double rate);
    double rate;
};

} // namespace segq
