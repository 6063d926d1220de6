#include "segq/policy.hpp"

#include <cmath>
#include <string>

#include "segq/error.hpp"

namespace segq {

bool thresholds_valid(std::span<const int> thresholds, int capacity)
{
    int previous = 0;
    for (int level : thresholds) {
        if (level <= previous || level >= capacity)
            return false;
        previous = level;
    }
    return true;
}

ThresholdPolicy::ThresholdPolicy(int capacity, std::vector<int> thresholds)
    : capacity_(capacity), thresholds_(std::move(thresholds))
{
    if (capacity_ < 1)
        throw InvalidArgument("capacity must be a positive integer, got " + std::to_string(capacity_));
    if (!thresholds_valid(thresholds_, capacity_))
        throw InvalidArgument("thresholds must satisfy 1 <= L_1 < L_2 < ... < L_{T-1} < K (K = " +
                              std::to_string(capacity_) + ")");
}

std::size_t ThresholdPolicy::region_of(int length) const
{
    if (length < 0 || length > capacity_)
        throw InvalidArgument("system length " + std::to_string(length) + " outside [0, K]");
    for (std::size_t k = 0; k < thresholds_.size(); ++k)
        if (length <= thresholds_[k])
            return k;
    return thresholds_.size();
}

std::pair<int, int> ThresholdPolicy::region_range(std::size_t region) const
{
    if (region >= region_count())
        throw InvalidArgument("region index " + std::to_string(region) + " out of range");
    const int first = region == 0 ? 0 : thresholds_[region - 1] + 1;
    const int last = region == thresholds_.size() ? capacity_ : thresholds_[region];
    return {first, last};
}

int ThresholdPolicy::staircase_start(std::size_t region) const
{
    if (region >= region_count())
        throw InvalidArgument("region index " + std::to_string(region) + " out of range");
    return region == 0 ? 0 : thresholds_[region - 1];
}

std::vector<double> ThresholdPolicy::region_masses(std::span<const double> dist) const
{
    if (dist.size() != static_cast<std::size_t>(capacity_) + 1)
        throw InvalidArgument("distribution length " + std::to_string(dist.size()) +
                              " does not match K + 1 = " + std::to_string(capacity_ + 1));
    std::vector<double> mass(region_count(), 0.0);
    for (std::size_t k = 0; k < mass.size(); ++k) {
        auto [first, last] = region_range(k);
        for (int i = first; i <= last; ++i)
            mass[k] += dist[static_cast<std::size_t>(i)];
    }
    return mass;
}

ArrivalSpec::ArrivalSpec(double rate_) : rate(rate_)
{
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw InvalidArgument("arrival rate must be positive and finite");
}

} // namespace segq
