#include "rwndq/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rwndq/errors.hpp"

namespace rwndq {

void FluidConfig::validate() const {
    if (tick_interval <= 0.0) throw InvalidConfig("tick_interval must be > 0");
    if (ticks_per_update < 1) throw InvalidConfig("ticks_per_update must be >= 1");
    if (buffer_bytes <= 0.0) throw InvalidConfig("buffer_bytes must be > 0");
    if (target_occupancy <= 0.0 || target_occupancy > 1.0) {
        throw InvalidConfig("target_occupancy must be in (0, 1]");
    }
    if (capacity <= 0.0) throw InvalidConfig("capacity must be > 0");
    if (rtt <= 0.0) throw InvalidConfig("rtt must be > 0");
    if (mss <= 0.0) throw InvalidConfig("mss must be > 0");
    if (horizon < 0.0) throw InvalidConfig("horizon must be >= 0");
}

int FluidConfig::delay_steps() const {
    return static_cast<int>(std::lround(rtt / (2.0 * tick_interval)));
}

FluidState::FluidState(const FluidConfig& cfg) {
    cfg.validate();
    window_ = cfg.target_bytes();  // w(0) = alpha * B
    slow_start_ = cfg.slow_start;
    delay_ = cfg.delay_steps();
    int qlen = std::max(cfg.ticks_per_update,
                        static_cast<int>(std::ceil(cfg.rtt / cfg.tick_interval))) + 1;
    queue_hist_.assign(qlen, 0.0);
    window_hist_.assign(delay_ + 1, window_);
}

double FluidState::queue_at(int j) const {
    int n = static_cast<int>(queue_hist_.size());
    return queue_hist_[((step_ - j) % n + n) % n];
}

double FluidState::window_at(int j) const {
    int n = static_cast<int>(window_hist_.size());
    return window_hist_[((step_ - j) % n + n) % n];
}

void FluidState::advance(const FluidConfig& cfg) {
    const double target = cfg.target_bytes();
    const double q_prev = queue_at(0);  // q(t - T) once the step lands

    // Increment tick: the sample feeding the update at t = kMT is
    // q(t - jT), j = 1..M.
    gamma_ += cfg.mss / cfg.ticks_per_update * (1.0 - q_prev / target);

    ++step_;

    if (step_ % cfg.ticks_per_update == 0) {
        window_ += slow_start_ ? 2.0 * cfg.mss : gamma_;
        if (q_prev >= target) {
            slow_start_ = false;
        }
        gamma_ = 0.0;
    }
    window_hist_[step_ % static_cast<long>(window_hist_.size())] = window_;

    const double w_delayed = window_at(delay_);
    double q = q_prev + cfg.tick_interval / cfg.rtt * w_delayed -
               cfg.capacity * cfg.tick_interval;
    queue_hist_[step_ % static_cast<long>(queue_hist_.size())] = std::max(q, 0.0);
}

void FluidState::prime(double window, double queue) {
    window_ = window;
    gamma_ = 0.0;
    std::fill(window_hist_.begin(), window_hist_.end(), window);
    std::fill(queue_hist_.begin(), queue_hist_.end(), queue);
}

std::vector<FluidSample> run_fluid(const FluidConfig& cfg) {
    cfg.validate();
    FluidState state(cfg);
    const long steps = static_cast<long>(std::floor(cfg.horizon / cfg.tick_interval + 1e-9));
    std::vector<FluidSample> series;
    series.reserve(static_cast<size_t>(std::max<long>(steps, 0)));
    for (long i = 1; i <= steps; ++i) {
        state.advance(cfg);
        series.push_back({static_cast<double>(i) * cfg.tick_interval,
                          state.window(), state.queue_at(0)});
    }
    return series;
}

std::optional<double> convergence_time(std::span<const FluidSample> series,
                                       double target, double band) {
    if (band <= 0.0 || band >= 1.0) {
        throw InvalidConfig("band must be in (0, 1)");
    }
    const double lo = target * (1.0 - band);
    const double hi = target * (1.0 + band);
    ptrdiff_t last_out = -1;
    for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(series.size()); ++i) {
        if (series[i].queue < lo || series[i].queue > hi) {
            last_out = i;
        }
    }
    if (last_out < 0) {
        return 0.0;  // in band from the start
    }
    if (last_out + 1 >= static_cast<ptrdiff_t>(series.size())) {
        return std::nullopt;
    }
    return series[last_out + 1].t;
}

std::vector<FluidSample> mean_queue_series(std::span<const FluidSample> series) {
    std::vector<FluidSample> out;
    out.reserve(series.size());
    double sum = 0.0;
    for (size_t i = 0; i < series.size(); ++i) {
        sum += series[i].queue;
        out.push_back({series[i].t, series[i].window, sum / static_cast<double>(i + 1)});
    }
    return out;
}

std::optional<double> first_reach_time(std::span<const FluidSample> series,
                                       double threshold) {
    for (const auto& s : series) {
        if (s.queue >= threshold) {
            return s.t;
        }
    }
    return std::nullopt;
}

void write_fluid_csv(std::ostream& out, std::span<const FluidSample> series) {
    out << "t_seconds,w_bytes,q_bytes,q_packets\n";
    char line[160];
    for (const auto& s : series) {
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g\n",
                      s.t, s.window, s.queue, s.queue / 1500.0);
        out << line;
    }
}

}  // namespace rwndq
