#include "rwndq/runner.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rwndq/errors.hpp"
#include "rwndq/sim/engine.hpp"

namespace rwndq {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& v, int line) {
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ParseError(line, "expected a number, got '" + v + "'");
    }
    return d;
}

int64_t parse_int(const std::string& v, int line) {
    char* end = nullptr;
    long long n = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw ParseError(line, "expected an integer, got '" + v + "'");
    }
    return n;
}

bool parse_bool(const std::string& v, int line) {
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw ParseError(line, "expected on/off, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(trim(item), line));
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt(xs[i]);
    }
    return out;
}

void require(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) {
        throw ValidationError(field, msg);
    }
}

}  // namespace

RunSpec parse_scenario(std::string_view text) {
    RunSpec spec;
    ScenarioConfig& sc = spec.scenario;
    FluidConfig& fl = spec.fluid;

    std::string section;
    int line_no = 0;
    std::stringstream stream{std::string(text)};
    std::string raw;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto pos = line.find('#'); pos != std::string::npos) {
            line.erase(pos);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(line_no, "unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "topology" && section != "aqm" && section != "tcp" &&
                section != "elephants" && section != "mice" && section != "fluid") {
                throw ParseError(line_no, "unknown section [" + section + "]");
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, "expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw ParseError(line_no, "expected key = value");
        }
        const std::string field = section.empty() ? key : section + "." + key;

        if (section.empty()) {
            if (key == "mode") {
                if (val == "fluid") spec.mode = RunMode::Fluid;
                else if (val == "sim") spec.mode = RunMode::Sim;
                else if (val == "ab_compare") spec.mode = RunMode::AbCompare;
                else throw ValidationError(field, "must be fluid, sim or ab_compare");
            } else if (key == "seed") {
                int64_t s = parse_int(val, line_no);
                require(s >= 0, field, "must be >= 0");
                sc.seed = static_cast<uint64_t>(s);
            } else if (key == "duration") {
                sc.duration = parse_double(val, line_no);
                require(sc.duration > 0.0, field, "must be > 0");
            } else if (key == "metrics_bin") {
                sc.metrics_bin = parse_double(val, line_no);
                require(sc.metrics_bin > 0.0, field, "must be > 0");
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
        } else if (section == "topology") {
            auto& t = sc.topology;
            if (key == "senders") {
                t.n_senders = static_cast<int>(parse_int(val, line_no));
                require(t.n_senders >= 0, field, "must be >= 0");
            } else if (key == "sender_bps" || key == "sender_gbps") {
                t.sender_rate_bps = parse_double(val, line_no) * (key == "sender_gbps" ? 1e9 : 1.0);
                require(t.sender_rate_bps > 0.0, field, "must be > 0");
            } else if (key == "bottleneck_bps" || key == "bottleneck_gbps") {
                t.bottleneck_rate_bps =
                    parse_double(val, line_no) * (key == "bottleneck_gbps" ? 1e9 : 1.0);
                require(t.bottleneck_rate_bps > 0.0, field, "must be > 0");
            } else if (key == "rtt" || key == "rtt_us") {
                t.rtt = parse_double(val, line_no) * (key == "rtt_us" ? 1e-6 : 1.0);
                require(t.rtt > 0.0, field, "must be > 0");
            } else if (key == "rtt_spread") {
                t.rtt_spread = parse_double(val, line_no);
                require(t.rtt_spread >= 0.0 && t.rtt_spread < 2.0, field,
                        "must be in [0, 2)");
            } else if (key == "buffer_bytes") {
                t.buffer_bytes = parse_int(val, line_no);
                require(t.buffer_bytes > 0, field, "must be > 0");
            } else if (key == "buffer_pkts") {
                t.buffer_bytes = parse_int(val, line_no) * 1500;
                require(t.buffer_bytes > 0, field, "must be > 0");
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
        } else if (section == "aqm") {
            if (key == "kind") {
                if (val == "droptail") sc.aqm = AqmKind::DropTail;
                else if (val == "rwndq") sc.aqm = AqmKind::Rwndq;
                else throw ValidationError(field, "must be droptail or rwndq");
            } else if (key == "alpha") {
                sc.rwndq.target_occupancy = parse_double(val, line_no);
                require(sc.rwndq.target_occupancy > 0.0 && sc.rwndq.target_occupancy <= 1.0,
                        field, "must be in (0, 1]");
            } else if (key == "interval" || key == "interval_us") {
                sc.rwndq.increment_interval =
                    parse_double(val, line_no) * (key == "interval_us" ? 1e-6 : 1.0);
                require(sc.rwndq.increment_interval > 0.0, field, "must be > 0");
            } else if (key == "updates") {
                sc.rwndq.intervals_per_update = static_cast<int>(parse_int(val, line_no));
                require(sc.rwndq.intervals_per_update >= 1, field, "must be >= 1");
            } else if (key == "slow_start") {
                sc.rwndq.slow_start_enabled = parse_bool(val, line_no);
            } else if (key == "window_floor") {
                if (val == "auto") {
                    sc.rwndq.min_window_floor.reset();
                } else {
                    int64_t floor = parse_int(val, line_no);
                    require(floor >= 0, field, "must be >= 0 or auto");
                    sc.rwndq.min_window_floor = floor;
                }
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
        } else if (section == "tcp") {
            if (key == "mss") {
                sc.tcp.mss = parse_int(val, line_no);
                require(sc.tcp.mss >= 1 && sc.tcp.mss <= 0xFFFF - kHeaderBytes, field,
                        "out of range");
            } else if (key == "rto_min" || key == "rto_min_ms") {
                sc.tcp.rto_min = parse_double(val, line_no) * (key == "rto_min_ms" ? 1e-3 : 1.0);
                require(sc.tcp.rto_min > 0.0, field, "must be > 0");
            } else if (key == "window_scale") {
                int64_t ws = parse_int(val, line_no);
                require(ws >= 0 && ws <= kMaxWindowScale, field, "must be in [0, 14]");
                sc.tcp.window_scale = static_cast<uint8_t>(ws);
            } else if (key == "cc_disabled") {
                sc.tcp.cc_disabled = parse_bool(val, line_no);
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
        } else if (section == "elephants") {
            if (key == "count") {
                sc.elephants.count = static_cast<int>(parse_int(val, line_no));
                require(sc.elephants.count >= 0, field, "must be >= 0");
            } else if (key == "starts") {
                sc.elephants.starts = parse_list(val, line_no);
            } else if (key == "stops") {
                sc.elephants.stops = parse_list(val, line_no);
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
        } else if (section == "mice") {
            if (key == "count") {
                sc.mice.count = static_cast<int>(parse_int(val, line_no));
                require(sc.mice.count >= 0, field, "must be >= 0");
            } else if (key == "size_bytes") {
                sc.mice.transfer_bytes = parse_int(val, line_no);
                require(sc.mice.transfer_bytes >= 1, field, "must be >= 1");
            } else if (key == "epochs") {
                sc.mice.epochs = static_cast<int>(parse_int(val, line_no));
                require(sc.mice.epochs >= 1, field, "must be >= 1");
            } else if (key == "first_epoch") {
                sc.mice.first_epoch = parse_double(val, line_no);
                require(sc.mice.first_epoch >= 0.0, field, "must be >= 0");
            } else if (key == "epoch_interval") {
                sc.mice.epoch_interval = parse_double(val, line_no);
                require(sc.mice.epoch_interval > 0.0, field, "must be > 0");
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
        } else if (section == "fluid") {
            if (key == "buffer_bytes") {
                fl.buffer_bytes = parse_double(val, line_no);
                require(fl.buffer_bytes > 0.0, field, "must be > 0");
            } else if (key == "buffer_pkts") {
                fl.buffer_bytes = parse_double(val, line_no) * 1500.0;
                require(fl.buffer_bytes > 0.0, field, "must be > 0");
            } else if (key == "alpha") {
                fl.target_occupancy = parse_double(val, line_no);
                require(fl.target_occupancy > 0.0 && fl.target_occupancy <= 1.0, field,
                        "must be in (0, 1]");
            } else if (key == "tick" || key == "tick_us") {
                fl.tick_interval = parse_double(val, line_no) * (key == "tick_us" ? 1e-6 : 1.0);
                require(fl.tick_interval > 0.0, field, "must be > 0");
            } else if (key == "updates") {
                fl.ticks_per_update = static_cast<int>(parse_int(val, line_no));
                require(fl.ticks_per_update >= 1, field, "must be >= 1");
            } else if (key == "capacity_bps" || key == "capacity_gbps") {
                // capacity is stored in bytes/second
                double bps = parse_double(val, line_no) * (key == "capacity_gbps" ? 1e9 : 1.0);
                require(bps > 0.0, field, "must be > 0");
                fl.capacity = bps / 8.0;
            } else if (key == "rtt" || key == "rtt_us") {
                fl.rtt = parse_double(val, line_no) * (key == "rtt_us" ? 1e-6 : 1.0);
                require(fl.rtt > 0.0, field, "must be > 0");
            } else if (key == "mss") {
                fl.mss = parse_double(val, line_no);
                require(fl.mss > 0.0, field, "must be > 0");
            } else if (key == "slow_start") {
                fl.slow_start = parse_bool(val, line_no);
            } else if (key == "horizon") {
                fl.horizon = parse_double(val, line_no);
                require(fl.horizon >= 0.0, field, "must be >= 0");
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
        }
    }

    sc.normalize();
    if (spec.mode != RunMode::Fluid) {
        try {
            sc.validate();
        } catch (const Error& e) {
            throw ValidationError("scenario", e.what());
        }
    }
    try {
        fl.validate();
    } catch (const Error& e) {
        throw ValidationError("fluid", e.what());
    }
    return spec;
}

std::string serialize_scenario(const RunSpec& spec) {
    const ScenarioConfig& sc = spec.scenario;
    const FluidConfig& fl = spec.fluid;
    std::ostringstream out;
    out << "mode = "
        << (spec.mode == RunMode::Fluid ? "fluid"
            : spec.mode == RunMode::Sim ? "sim"
                                        : "ab_compare")
        << "\n";
    out << "seed = " << sc.seed << "\n";
    out << "duration = " << fmt(sc.duration) << "\n";
    out << "metrics_bin = " << fmt(sc.metrics_bin) << "\n";

    out << "\n[topology]\n";
    out << "senders = " << sc.topology.n_senders << "\n";
    out << "sender_bps = " << fmt(sc.topology.sender_rate_bps) << "\n";
    out << "bottleneck_bps = " << fmt(sc.topology.bottleneck_rate_bps) << "\n";
    out << "rtt = " << fmt(sc.topology.rtt) << "\n";
    out << "rtt_spread = " << fmt(sc.topology.rtt_spread) << "\n";
    out << "buffer_bytes = " << sc.topology.buffer_bytes << "\n";

    out << "\n[aqm]\n";
    out << "kind = " << (sc.aqm == AqmKind::Rwndq ? "rwndq" : "droptail") << "\n";
    out << "alpha = " << fmt(sc.rwndq.target_occupancy) << "\n";
    out << "interval = " << fmt(sc.rwndq.increment_interval) << "\n";
    out << "updates = " << sc.rwndq.intervals_per_update << "\n";
    out << "slow_start = " << (sc.rwndq.slow_start_enabled ? "on" : "off") << "\n";
    out << "window_floor = ";
    if (sc.rwndq.min_window_floor) {
        out << *sc.rwndq.min_window_floor;
    } else {
        out << "auto";
    }
    out << "\n";

    out << "\n[tcp]\n";
    out << "mss = " << sc.tcp.mss << "\n";
    out << "rto_min = " << fmt(sc.tcp.rto_min) << "\n";
    out << "window_scale = " << static_cast<int>(sc.tcp.window_scale) << "\n";
    out << "cc_disabled = " << (sc.tcp.cc_disabled ? "on" : "off") << "\n";

    out << "\n[elephants]\n";
    out << "count = " << sc.elephants.count << "\n";
    if (!sc.elephants.starts.empty()) {
        out << "starts = " << fmt_list(sc.elephants.starts) << "\n";
    }
    if (!sc.elephants.stops.empty()) {
        out << "stops = " << fmt_list(sc.elephants.stops) << "\n";
    }

    out << "\n[mice]\n";
    out << "count = " << sc.mice.count << "\n";
    out << "size_bytes = " << sc.mice.transfer_bytes << "\n";
    out << "epochs = " << sc.mice.epochs << "\n";
    out << "first_epoch = " << fmt(sc.mice.first_epoch) << "\n";
    out << "epoch_interval = " << fmt(sc.mice.epoch_interval) << "\n";

    out << "\n[fluid]\n";
    out << "buffer_bytes = " << fmt(fl.buffer_bytes) << "\n";
    out << "alpha = " << fmt(fl.target_occupancy) << "\n";
    out << "tick = " << fmt(fl.tick_interval) << "\n";
    out << "updates = " << fl.ticks_per_update << "\n";
    out << "capacity_bps = " << fmt(fl.capacity * 8.0) << "\n";
    out << "rtt = " << fmt(fl.rtt) << "\n";
    out << "mss = " << fmt(fl.mss) << "\n";
    out << "slow_start = " << (fl.slow_start ? "on" : "off") << "\n";
    out << "horizon = " << fmt(fl.horizon) << "\n";
    return out.str();
}

AbResult run_ab(const ScenarioConfig& rwndq_arm, const ScenarioConfig& droptail_arm) {
    if (rwndq_arm.seed != droptail_arm.seed) {
        throw ValidationError("seed", "A/B arms must use the same seed");
    }
    if (rwndq_arm.aqm != AqmKind::Rwndq || droptail_arm.aqm != AqmKind::DropTail) {
        throw ValidationError("aqm.kind", "arms must be rwndq vs droptail");
    }
    if (!(rwndq_arm.topology == droptail_arm.topology) ||
        rwndq_arm.duration != droptail_arm.duration ||
        !(rwndq_arm.elephants == droptail_arm.elephants) ||
        !(rwndq_arm.mice == droptail_arm.mice)) {
        throw ValidationError("scenario", "A/B arms must differ only in the AQM");
    }

    AbResult r;
    r.rwndq = sim::run_scenario(rwndq_arm);
    r.droptail = sim::run_scenario(droptail_arm);

    if (r.droptail.bottleneck_drops > 0) {
        r.summary.drop_reduction_pct =
            100.0 *
            (static_cast<double>(r.droptail.bottleneck_drops) -
             static_cast<double>(r.rwndq.bottleneck_drops)) /
            static_cast<double>(r.droptail.bottleneck_drops);
    }
    auto rw_fcts = r.rwndq.mice_fcts();
    auto dt_fcts = r.droptail.mice_fcts();
    if (!rw_fcts.empty() && !dt_fcts.empty()) {
        auto rw = fct_stats(rw_fcts);
        auto dt = fct_stats(dt_fcts);
        r.summary.fct_mean_delta = rw.mean - dt.mean;
        r.summary.fct_p99_delta = rw.p99 - dt.p99;
    }
    r.summary.jain_delta = r.rwndq.elephant_jain() - r.droptail.elephant_jain();
    return r;
}

AbResult run_ab(const ScenarioConfig& base) {
    ScenarioConfig rw = base;
    rw.aqm = AqmKind::Rwndq;
    ScenarioConfig dt = base;
    dt.aqm = AqmKind::DropTail;
    return run_ab(rw, dt);
}

void write_ab_summary(std::ostream& out, const AbResult& r) {
    char buf[128];
    out << "== rwndq ==\n";
    write_summary(out, r.rwndq);
    out << "\n== droptail ==\n";
    write_summary(out, r.droptail);
    out << "\n== comparison (rwndq vs droptail) ==\n";
    std::snprintf(buf, sizeof buf, "drop_reduction_pct: %.6g\n",
                  r.summary.drop_reduction_pct);
    out << buf;
    std::snprintf(buf, sizeof buf, "fct_mean_delta: %.6g\n", r.summary.fct_mean_delta);
    out << buf;
    std::snprintf(buf, sizeof buf, "fct_p99_delta: %.6g\n", r.summary.fct_p99_delta);
    out << buf;
    std::snprintf(buf, sizeof buf, "jain_delta: %.6g\n", r.summary.jain_delta);
    out << buf;
}

std::vector<std::filesystem::path> write_report_files(
    const std::filesystem::path& dir, const MetricsReport& report) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, auto writer) {
        auto path = dir / name;
        std::ofstream out(path);
        if (!out) {
            throw Error("cannot write " + path.string());
        }
        writer(out);
        written.push_back(path);
    };
    emit("flows.csv", [&](std::ostream& o) { write_flows_csv(o, report); });
    emit("queue.csv", [&](std::ostream& o) { write_queue_csv(o, report); });
    emit("util.csv", [&](std::ostream& o) { write_util_csv(o, report); });
    if (!report.port_series.empty()) {
        emit("port.csv", [&](std::ostream& o) { write_port_csv(o, report); });
    }
    emit("summary.txt", [&](std::ostream& o) { write_summary(o, report); });
    return written;
}

}  // namespace rwndq
