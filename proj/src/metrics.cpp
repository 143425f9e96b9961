#include "rwndq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rwndq/errors.hpp"

namespace rwndq {

double jain_index(std::span<const double> xs) {
    if (xs.empty()) {
        throw EmptyInput("jain_index over empty list");
    }
    double sum = 0.0, sq = 0.0;
    for (double x : xs) {
        sum += x;
        sq += x * x;
    }
    if (sq == 0.0) {
        return 0.0;  // all-zero allocation carries no fairness information
    }
    return sum * sum / (static_cast<double>(xs.size()) * sq);
}

FctStats fct_stats(std::span<const double> fct_seconds) {
    if (fct_seconds.empty()) {
        throw EmptyInput("fct_stats over empty list");
    }
    std::vector<double> sorted(fct_seconds.begin(), fct_seconds.end());
    std::sort(sorted.begin(), sorted.end());

    FctStats s;
    s.count = sorted.size();
    double sum = 0.0;
    for (double v : sorted) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(s.count);
    double var = 0.0;
    for (double v : sorted) {
        var += (v - s.mean) * (v - s.mean);
    }
    s.variance = var / static_cast<double>(s.count);
    s.max = sorted.back();
    // Nearest-rank percentile: ceil(0.99 n)-th smallest.
    size_t rank = static_cast<size_t>(
        std::ceil(0.99 * static_cast<double>(s.count)));
    s.p99 = sorted[std::max<size_t>(rank, 1) - 1];
    s.cdf.reserve(s.count);
    for (size_t i = 0; i < s.count; ++i) {
        s.cdf.emplace_back(sorted[i],
                           static_cast<double>(i + 1) / static_cast<double>(s.count));
    }
    return s;
}

std::vector<UtilSample> utilization(
    std::span<const std::pair<double, uint64_t>> dequeued_bytes,
    double capacity_bps, double bin) {
    std::vector<UtilSample> out;
    for (size_t i = 1; i < dequeued_bytes.size(); ++i) {
        double bits = 8.0 * static_cast<double>(dequeued_bytes[i].second -
                                                dequeued_bytes[i - 1].second);
        out.push_back({dequeued_bytes[i].first, bits / (capacity_bps * bin)});
    }
    return out;
}

double MetricsReport::avg_queue(double from, double to) const {
    if (queue_integral.size() < 2 || to <= from) {
        return 0.0;
    }
    auto value_at = [this](double t) {
        auto it = std::lower_bound(queue_integral.begin(), queue_integral.end(), t,
                                   [](const auto& s, double x) { return s.first < x; });
        if (it == queue_integral.begin()) return it->second;
        if (it == queue_integral.end()) return queue_integral.back().second;
        auto prev = std::prev(it);
        double span = it->first - prev->first;
        if (span <= 0.0) return it->second;
        double w = (t - prev->first) / span;
        return prev->second + w * (it->second - prev->second);
    };
    from = std::max(from, queue_integral.front().first);
    to = std::min(to, queue_integral.back().first);
    if (to <= from) {
        return 0.0;
    }
    return (value_at(to) - value_at(from)) / (to - from);
}

std::vector<std::pair<double, double>> MetricsReport::persistent_queue(
    double window) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& [t, integral] : queue_integral) {
        (void)integral;
        if (t < window) {
            continue;
        }
        out.emplace_back(t, avg_queue(t - window, t));
    }
    return out;
}

std::vector<double> MetricsReport::mice_fcts() const {
    std::vector<double> out;
    for (const auto& f : flows) {
        if (f.mouse && f.fct >= 0.0) {
            out.push_back(f.fct);
        }
    }
    return out;
}

size_t MetricsReport::total_mice() const {
    size_t n = 0;
    for (const auto& f : flows) {
        n += f.mouse ? 1 : 0;
    }
    return n;
}

double MetricsReport::elephant_jain() const {
    std::vector<double> xs;
    for (const auto& f : flows) {
        if (!f.mouse) {
            xs.push_back(f.goodput_bps);
        }
    }
    if (xs.empty()) {
        return 0.0;
    }
    return jain_index(xs);
}

namespace {
void put(std::ostream& out, const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    out << buf;
}
}  // namespace

void write_flows_csv(std::ostream& out, const MetricsReport& r) {
    out << "flow_id,type,start,fct,bytes,goodput\n";
    char line[256];
    for (const auto& f : r.flows) {
        if (f.fct >= 0.0) {
            std::snprintf(line, sizeof line, "%d,%s,%.9g,%.9g,%lld,%.9g\n",
                          f.flow_id, f.mouse ? "mouse" : "elephant", f.start, f.fct,
                          static_cast<long long>(f.bytes_acked), f.goodput_bps);
        } else {
            std::snprintf(line, sizeof line, "%d,%s,%.9g,,%lld,%.9g\n",
                          f.flow_id, f.mouse ? "mouse" : "elephant", f.start,
                          static_cast<long long>(f.bytes_acked), f.goodput_bps);
        }
        out << line;
    }
}

void write_queue_csv(std::ostream& out, const MetricsReport& r) {
    out << "t,Q_bytes,drops_cum\n";
    char line[128];
    for (const auto& s : r.queue) {
        std::snprintf(line, sizeof line, "%.9g,%lld,%llu\n", s.t,
                      static_cast<long long>(s.q_bytes),
                      static_cast<unsigned long long>(s.drops_cum));
        out << line;
    }
}

void write_util_csv(std::ostream& out, const MetricsReport& r) {
    out << "t,utilization\n";
    char line[96];
    for (const auto& s : r.util) {
        std::snprintf(line, sizeof line, "%.9g,%.9g\n", s.t, s.utilization);
        out << line;
    }
}

void write_port_csv(std::ostream& out, const MetricsReport& r) {
    out << "t,rwnd_bytes,flows,gamma_bytes,slow_start,Q_bytes\n";
    char line[160];
    for (const auto& s : r.port_series) {
        std::snprintf(line, sizeof line, "%.9g,%lld,%lld,%.9g,%d,%lld\n", s.t,
                      static_cast<long long>(s.rwnd), static_cast<long long>(s.flows),
                      s.gamma, s.slow_start ? 1 : 0, static_cast<long long>(s.q_bytes));
        out << line;
    }
}

void write_summary(std::ostream& out, const MetricsReport& r) {
    out << "flows: " << r.flows.size() << " (mice " << r.total_mice() << ")\n";
    out << "bottleneck_drops: " << r.bottleneck_drops << "\n";
    out << "total_drops: " << r.total_drops << "\n";
    out << "elephant_jain: ";
    put(out, "%.6g", r.elephant_jain());
    out << "\n";
    out << "avg_queue_bytes: ";
    put(out, "%.6g", r.avg_queue(0.0, r.duration));
    out << "\n";
    auto persistent = r.persistent_queue(r.persistent_window);
    if (!persistent.empty()) {
        out << "persistent_queue_bytes: ";
        put(out, "%.6g", persistent.back().second);
        out << "\n";
    }
    double util_sum = 0.0;
    for (const auto& u : r.util) {
        util_sum += u.utilization;
    }
    out << "mean_utilization: ";
    put(out, "%.6g", r.util.empty() ? 0.0 : util_sum / static_cast<double>(r.util.size()));
    out << "\n";
    auto fcts = r.mice_fcts();
    if (!fcts.empty()) {
        auto s = fct_stats(fcts);
        out << "mice_completed: " << s.count << " / " << r.total_mice() << "\n";
        out << "mice_fct_mean: ";
        put(out, "%.6g", s.mean);
        out << "\nmice_fct_p99: ";
        put(out, "%.6g", s.p99);
        out << "\nmice_fct_max: ";
        put(out, "%.6g", s.max);
        out << "\nmice_fct_variance: ";
        put(out, "%.6g", s.variance);
        out << "\n";
    } else {
        out << "mice_completed: 0 / " << r.total_mice() << "\n";
    }
}

}  // namespace rwndq
