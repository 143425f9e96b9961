#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace rwndq {

// Discrete-time model of the window/queue control loop: a per-queue
// window w(t) updated every M ticks by the averaged drift from the target
// occupancy, feeding a fixed-RTT fluid queue
//   q(t) = [q(t-T) + (T/rtt) * w(t - rtt/2) - C*T]+
// All byte quantities are doubles.
struct FluidConfig {
    double tick_interval = 50e-6;     // T, seconds
    int ticks_per_update = 10;        // M
    double buffer_bytes = 83.0 * 1500.0;  // B
    double target_occupancy = 0.2;    // alpha
    double capacity = 1.25e9;         // C, bytes/second
    double rtt = 100e-6;              // seconds
    double mss = 1500.0;              // bytes (wire packet size)
    bool slow_start = true;
    double horizon = 1.0;             // seconds

    void validate() const;  // throws InvalidConfig
    bool operator==(const FluidConfig&) const = default;
    double target_bytes() const { return target_occupancy * buffer_bytes; }
    // Feedback delay of half an RTT, rounded to whole ticks.
    int delay_steps() const;
};

struct FluidSample {
    double t = 0.0;
    double window = 0.0;
    double queue = 0.0;
};

// Model state. Ring buffers hold enough queue history to serve the
// M-sample drift average and enough window history for the rtt/2 delay.
class FluidState {
  public:
    explicit FluidState(const FluidConfig& cfg);

    long step() const { return step_; }
    double window() const { return window_; }
    double gamma() const { return gamma_; }
    bool slow_start_active() const { return slow_start_; }

    // q(t - j*T); j = 0 is the most recent value.
    double queue_at(int j) const;
    // w(t - j*T).
    double window_at(int j) const;

    // Advances one tick: accumulates the drift increment, applies the
    // window update on epoch boundaries, then evolves the queue.
    void advance(const FluidConfig& cfg);

    // Pins the whole history to a constant (window, queue) point;
    // used to probe fixed points.
    void prime(double window, double queue);

  private:
    long step_ = 0;
    double window_ = 0.0;
    double gamma_ = 0.0;
    bool slow_start_ = false;
    int delay_ = 0;
    std::vector<double> queue_hist_;
    std::vector<double> window_hist_;
};

// Samples (t, w, q) every tick up to the horizon. t starts at one tick;
// a zero horizon yields an empty series. Deterministic: identical config
// gives a bit-identical series.
std::vector<FluidSample> run_fluid(const FluidConfig& cfg);

// First time after which the queue stays within
// [target*(1-band), target*(1+band)] for the rest of the series;
// 0 when the whole series is in band, nullopt when it never settles.
std::optional<double> convergence_time(std::span<const FluidSample> series,
                                       double target, double band);

// Running-mean queue trajectory: sample i carries the mean of q over
// samples 0..i. This is the quantity whose convergence the stability
// experiment examines; the raw series oscillates around the target.
std::vector<FluidSample> mean_queue_series(std::span<const FluidSample> series);

// First sample time with q >= threshold.
std::optional<double> first_reach_time(std::span<const FluidSample> series,
                                       double threshold);

// CSV columns: t_seconds,w_bytes,q_bytes,q_packets (1500-byte packets).
void write_fluid_csv(std::ostream& out, std::span<const FluidSample> series);

}  // namespace rwndq
