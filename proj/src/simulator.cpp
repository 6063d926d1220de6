#include "segq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <variant>

#include <boost/math/distributions/students_t.hpp>

#include "segq/error.hpp"
#include "segq/queue_core.hpp"
#include "segq/random.hpp"

namespace segq {

namespace {

constexpr double never = std::numeric_limits<double>::infinity();

double sample_service(const ServiceDistribution& service, RandomStream& rng)
{
    const auto& law = service.law();
    if (const auto* e = std::get_if<Exponential>(&law))
        return rng.exponential(e->rate);
    if (const auto* d = std::get_if<Deterministic>(&law))
        return d->duration;
    const auto& erlang = std::get<Erlang>(law);
    double total = 0.0;
    for (int k = 0; k < erlang.stages; ++k)
        total += rng.exponential(erlang.rate);
    return total;
}

struct Packet {
    double arrival;
    bool empty_arrival;
};

// Observer of departures from one segmented queue.
struct DepartureEvent {
    double time;
    double arrival;
    bool empty_arrival;
    int region;
    double service;
};

// Event-driven single-server queue: the next departure is
// max(arrival, previous departure) + service, with the service law picked by
// the system length when the service starts.
class SegmentedQueue {
public:
    SegmentedQueue(const SimConfig& config, std::uint64_t stream_offset)
        : config_(config),
          arrivals_rng_(config.seed, streams::arrivals + stream_offset),
          services_rng_(config.seed, streams::services + stream_offset),
          limit_(config.policy.capacity() + 1)
    {
        next_arrival_ = arrivals_rng_.exponential(config_.arrivals.rate);
    }

    // Runs until `departures` packets have left; calls on_departure for each and
    // on_advance(from, to, length) before the clock moves.
    template <class Advance, class Depart, class Arrive>
    void run(std::uint64_t departures, Advance&& on_advance, Depart&& on_departure, Arrive&& on_arrival)
    {
        while (departures_ < departures) {
            if (next_arrival_ < next_departure_) {
                on_advance(now_, next_arrival_, in_system_);
                now_ = next_arrival_;
                ++arrivals_;
                const bool dropped = in_system_ == limit_;
                on_arrival(dropped);
                if (dropped) {
                    ++drops_;
                } else {
                    queue_.push_back({now_, in_system_ == 0});
                    ++in_system_;
                    if (in_system_ == 1)
                        start_service();
                }
                next_arrival_ = now_ + arrivals_rng_.exponential(config_.arrivals.rate);
            } else {
                on_advance(now_, next_departure_, in_system_);
                now_ = next_departure_;
                const Packet packet = queue_.front();
                queue_.pop_front();
                --in_system_;
                ++departures_;
                on_departure(DepartureEvent{now_, packet.arrival, packet.empty_arrival, current_region_,
                                            current_service_});
                if (in_system_ > 0)
                    start_service();
                else
                    next_departure_ = never;
            }
        }
    }

    std::uint64_t arrivals() const { return arrivals_; }
    std::uint64_t departures() const { return departures_; }
    std::uint64_t drops() const { return drops_; }
    int in_system() const { return in_system_; }
    double now() const { return now_; }

private:
    void start_service()
    {
        current_region_ = static_cast<int>(config_.policy.region_of(in_system_));
        current_service_ = sample_service(config_.services[static_cast<std::size_t>(current_region_)], services_rng_);
        next_departure_ = now_ + current_service_;
    }

    const SimConfig& config_;
    RandomStream arrivals_rng_;
    RandomStream services_rng_;
    int limit_;
    std::deque<Packet> queue_;
    double now_ = 0.0;
    double next_arrival_ = never;
    double next_departure_ = never;
    int in_system_ = 0;
    int current_region_ = 0;
    double current_service_ = 0.0;
    std::uint64_t arrivals_ = 0;
    std::uint64_t departures_ = 0;
    std::uint64_t drops_ = 0;
};

double t_quantile(int batches)
{
    boost::math::students_t dist(batches - 1);
    return boost::math::quantile(dist, 0.975);
}

} // namespace

void SimConfig::validate() const
{
    check_region_count(policy, services);
    if (horizon == 0)
        throw InvalidArgument("simulation horizon must be positive");
    if (warmup_departures() >= horizon)
        throw InvalidArgument("warm-up must be shorter than the horizon");
    if (horizon - warmup_departures() < 40)
        throw InvalidArgument("measurement window needs at least 40 departures");
    if (network) {
        if (network->queues < 1)
            throw InvalidArgument("network needs at least one queue");
        if (!(network->channel_rate > 0.0))
            throw InvalidArgument("channel rate must be positive");
    }
}

ConfidenceInterval batch_means(std::span<const double> values, int batches)
{
    if (batches < 2 || values.size() < static_cast<std::size_t>(batches))
        throw InvalidArgument("batch means needs at least as many values as batches");
    const std::size_t size = values.size() / static_cast<std::size_t>(batches);
    std::vector<double> means(static_cast<std::size_t>(batches));
    for (std::size_t b = 0; b < means.size(); ++b) {
        const auto first = values.begin() + static_cast<std::ptrdiff_t>(b * size);
        means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / static_cast<double>(size);
    }
    ConfidenceInterval ci;
    ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    const double batch_mean = std::accumulate(means.begin(), means.end(), 0.0) / batches;
    double var = 0.0;
    for (double m : means)
        var += (m - batch_mean) * (m - batch_mean);
    var /= batches - 1;
    ci.half_width = t_quantile(batches) * std::sqrt(var / batches);
    return ci;
}

double QueueSimStats::sojourn_laplace(double s) const
{
    if (sojourns.empty())
        throw InvalidArgument("sojourn samples were not recorded");
    double total = 0.0;
    for (double w : sojourns)
        total += std::exp(-s * w);
    return total / static_cast<double>(sojourns.size());
}

QueueSimStats simulate_queue(const SimConfig& config)
{
    config.validate();
    const int capacity = config.policy.capacity();
    const std::uint64_t warmup = config.warmup_departures();
    const std::uint64_t measured = config.horizon - warmup;
    constexpr int batches = 20;
    const std::uint64_t batch_size = measured / batches;

    QueueSimStats stats;
    stats.system_histogram.assign(static_cast<std::size_t>(capacity) + 2, 0.0);
    stats.buffer_histogram.assign(static_cast<std::size_t>(capacity) + 1, 0.0);
    stats.region_service_counts.assign(config.services.size(), 0);
    stats.nonempty_region_counts.assign(config.services.size(), 0);
    if (config.record_intervals)
        stats.intervals.reserve(measured);
    if (config.record_sojourns)
        stats.sojourns.reserve(measured);

    bool measuring = warmup == 0;
    double window_start = 0.0;
    double previous_departure = warmup == 0 ? 0.0 : never;
    double busy_time = 0.0;
    double area = 0.0;
    double sojourn_sum = 0.0;
    double service_sum = 0.0;
    double interval_sum = 0.0;
    double empty_sum = 0.0;
    double nonempty_sum = 0.0;
    std::vector<double> batch_sums(batches, 0.0);

    SegmentedQueue queue(config, 0);
    queue.run(
        config.horizon,
        [&](double from, double to, int length) {
            if (!measuring)
                return;
            const double dt = to - from;
            stats.system_histogram[static_cast<std::size_t>(length)] += dt;
            stats.buffer_histogram[static_cast<std::size_t>(std::max(length - 1, 0))] += dt;
            area += dt * length;
            if (length > 0)
                busy_time += dt;
        },
        [&](const DepartureEvent& event) {
            if (!measuring) {
                if (queue.departures() == warmup) {
                    measuring = true;
                    window_start = event.time;
                    previous_departure = event.time;
                }
                return;
            }
            const std::uint64_t index = stats.departures++;
            const double sojourn = event.time - event.arrival;
            const double interval = event.time - previous_departure;
            previous_departure = event.time;
            sojourn_sum += sojourn;
            service_sum += event.service;
            interval_sum += interval;
            if (index / batch_size < static_cast<std::uint64_t>(batches))
                batch_sums[index / batch_size] += sojourn;
            ++stats.region_service_counts[static_cast<std::size_t>(event.region)];
            if (event.empty_arrival) {
                ++stats.empty_departures;
                empty_sum += interval;
            } else {
                ++stats.nonempty_departures;
                nonempty_sum += interval;
                ++stats.nonempty_region_counts[static_cast<std::size_t>(event.region)];
            }
            if (config.record_intervals)
                stats.intervals.push_back({interval, event.empty_arrival, event.region});
            if (config.record_sojourns)
                stats.sojourns.push_back(sojourn);
        },
        [&](bool dropped) {
            if (!measuring)
                return;
            ++stats.window_arrivals;
            if (dropped)
                ++stats.window_drops;
        });

    stats.arrivals = queue.arrivals();
    stats.departures_total = queue.departures();
    stats.drops = queue.drops();
    stats.in_system_at_end = static_cast<std::uint64_t>(queue.in_system());

    const double window = queue.now() - window_start;
    const auto n = static_cast<double>(stats.departures);
    stats.observed_time = window;
    stats.mean_interdeparture = interval_sum / n;
    stats.mean_interdeparture_empty = stats.empty_departures ? empty_sum / static_cast<double>(stats.empty_departures) : 0.0;
    stats.mean_interdeparture_nonempty =
        stats.nonempty_departures ? nonempty_sum / static_cast<double>(stats.nonempty_departures) : 0.0;
    stats.busy_fraction = busy_time / window;
    stats.mean_service_time = service_sum / n;
    stats.time_average_in_system = area / window;
    stats.throughput = n / window;
    stats.blocking_fraction =
        stats.window_arrivals ? static_cast<double>(stats.window_drops) / static_cast<double>(stats.window_arrivals) : 0.0;
    double total_time = 0.0;
    for (double t : stats.system_histogram)
        total_time += t;
    for (auto& h : stats.system_histogram)
        h /= total_time;
    for (auto& h : stats.buffer_histogram)
        h /= total_time;

    stats.sojourn.mean = sojourn_sum / n;
    double batch_mean = 0.0;
    for (auto& sum : batch_sums) {
        sum /= static_cast<double>(batch_size);
        batch_mean += sum / batches;
    }
    double var = 0.0;
    for (double m : batch_sums)
        var += (m - batch_mean) * (m - batch_mean);
    var /= batches - 1;
    stats.sojourn.half_width = t_quantile(batches) * std::sqrt(var / batches);
    return stats;
}

NetworkSimStats simulate_network(const SimConfig& config)
{
    config.validate();
    if (!config.network)
        throw InvalidArgument("network simulation needs a network section");
    const NetworkConfig& net = *config.network;
    const auto queues = static_cast<std::size_t>(net.queues);

    // Packet arrival times at each channel buffer.
    std::vector<std::vector<double>> feeds(queues);
    for (std::size_t q = 0; q < queues; ++q) {
        const std::uint64_t offset = streams::network_stride * (q + 1);
        auto& feed = feeds[q];
        feed.reserve(config.horizon);
        if (net.feed == NetworkFeed::Poisson) {
            RandomStream rng(config.seed, streams::arrivals + offset);
            double t = 0.0;
            for (std::uint64_t k = 0; k < config.horizon; ++k) {
                t += rng.exponential(config.arrivals.rate);
                feed.push_back(t);
            }
        } else {
            SegmentedQueue queue(config, offset);
            queue.run(
                config.horizon, [](double, double, int) {},
                [&](const DepartureEvent& event) { feed.push_back(event.time); }, [](bool) {});
        }
    }

    double end = never;
    for (const auto& feed : feeds)
        end = std::min(end, feed.back());
    const double warm_time =
        end * static_cast<double>(config.warmup_departures()) / static_cast<double>(config.horizon);

    RandomStream slots(config.seed, streams::channel);
    const double slot_mean = 1.0 / net.channel_rate;
    std::vector<std::deque<double>> buffers(queues);
    std::vector<std::size_t> next(queues, 0);
    std::vector<std::uint64_t> visits(queues, 0);
    std::vector<std::uint64_t> sent(queues, 0);
    std::vector<double> waits;
    std::vector<double> sojourns;
    waits.reserve(config.horizon * queues);
    sojourns.reserve(config.horizon * queues);

    auto admit = [&](std::size_t q, double until) {
        const auto& feed = feeds[q];
        while (next[q] < feed.size() && feed[next[q]] <= until)
            buffers[q].push_back(feed[next[q]++]);
    };
    auto record = [&](double arrival, double start, double finish) {
        if (arrival < warm_time)
            return;
        waits.push_back(start - arrival);
        sojourns.push_back(finish - arrival);
    };

    double now = 0.0;
    std::size_t turn = 0;
    while (now < end) {
        const double slot = net.slot_mode == SlotMode::Exponential ? slots.exponential(net.channel_rate) : slot_mean;
        const double finish = now + slot;
        admit(turn, now);
        if (now >= warm_time)
            ++visits[turn];
        if (!buffers[turn].empty()) {
            const double arrival = buffers[turn].front();
            buffers[turn].pop_front();
            record(arrival, now, finish);
            if (now >= warm_time)
                ++sent[turn];
        } else if (next[turn] < feeds[turn].size() && feeds[turn][next[turn]] < finish) {
            // A packet reaching an idle queue during its own slot goes out in that slot.
            const double arrival = feeds[turn][next[turn]++];
            record(arrival, arrival, finish);
            if (now >= warm_time)
                ++sent[turn];
        }
        now = finish;
        turn = (turn + 1) % queues;
    }

    NetworkSimStats stats;
    stats.queues = net.queues;
    stats.packets = waits.size();
    stats.observed_time = now - warm_time;
    stats.wait = batch_means(waits);
    stats.sojourn = batch_means(sojourns);
    for (std::size_t q = 0; q < queues; ++q) {
        stats.visit_rates.push_back(static_cast<double>(visits[q]) / stats.observed_time);
        stats.transmit_rates.push_back(static_cast<double>(sent[q]) / stats.observed_time);
    }
    return stats;
}

EmpiricalDeparture empirical_interdeparture(std::span<const TaggedInterval> samples, double bin_width,
                                            AtomDetection detection)
{
    if (samples.empty())
        throw InvalidArgument("no inter-departure samples");
    if (!(bin_width > 0.0))
        throw InvalidArgument("bin width must be positive");
    const auto total = static_cast<double>(samples.size());

    std::vector<double> empty;
    std::vector<double> nonempty;
    for (const auto& s : samples)
        (s.empty_arrival ? empty : nonempty).push_back(s.duration);
    std::sort(empty.begin(), empty.end());
    std::sort(nonempty.begin(), nonempty.end());

    auto bin = [&](const std::vector<double>& values) {
        std::vector<EmpiricalMass> out;
        for (double v : values) {
            const double centre = (std::floor(v / bin_width) + 0.5) * bin_width;
            if (out.empty() || out.back().value != centre)
                out.push_back({centre, 0.0});
            out.back().mass += 1.0 / total;
        }
        return out;
    };
    auto cluster = [&](const std::vector<double>& values) {
        std::vector<EmpiricalMass> out;
        std::vector<double> sums;
        double last = -never;
        for (double v : values) {
            if (out.empty() || v - last > 1e-9 * std::max(1.0, std::abs(v))) {
                out.push_back({0.0, 0.0});
                sums.push_back(0.0);
            }
            sums.back() += v;
            out.back().mass += 1.0;
            last = v;
        }
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k].value = sums[k] / out[k].mass;
            out[k].mass /= total;
        }
        return out;
    };

    EmpiricalDeparture out;
    out.empty_fraction = static_cast<double>(empty.size()) / total;
    out.nonempty_fraction = static_cast<double>(nonempty.size()) / total;
    out.empty = bin(empty);
    if (detection == AtomDetection::Bins) {
        out.nonempty = bin(nonempty);
    } else {
        auto atoms = cluster(nonempty);
        constexpr std::size_t max_atoms = 64;
        if (detection == AtomDetection::Cluster || atoms.size() <= max_atoms) {
            out.nonempty = std::move(atoms);
            out.nonempty_atomic = true;
        } else {
            out.nonempty = bin(nonempty);
        }
    }
    return out;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty())
        throw InvalidArgument("no samples for the KS distance");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double distance = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        distance = std::max({distance, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return distance;
}

} // namespace segq
