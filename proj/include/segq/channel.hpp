#pragma once

#include <functional>

#include "segq/departure.hpp"

namespace segq {

// A channel server with packet rate `rate` polling `queues` identical queues
// in turn; each queue is attended at rate / queues.
struct ChannelSpec {
    ChannelSpec(double rate, int queues);

    double rate;
    int queues;

    double attended_rate() const { return rate / queues; }
};

struct ChannelResult {
    double sigma = 0.0;
    double wait = 0.0;    // sigma / ((1 - sigma) mu_c), time before transmission
    double sojourn = 0.0; // wait + 1 / mu_c
    int iterations = 0;
    bool used_bisection = false;
};

// Root in (0, 1) of sigma = A*(mu_c (1 - sigma)) for an inter-arrival LST A*.
// Fixed-point iteration from 0.5, falling back to bisection.
struct SigmaSolution {
    double sigma;
    int iterations;
    bool used_bisection;
};

SigmaSolution solve_sigma(const std::function<double(double)>& interarrival_lst, double mean_interarrival,
                          double attended_rate);
SigmaSolution solve_sigma(const DepartureModel& model, double attended_rate);

double channel_wait(double sigma, double attended_rate);
double channel_sojourn(double sigma, double attended_rate);

ChannelResult analyze_channel(const DepartureModel& model, const ChannelSpec& channel);

} // namespace segq
