#include "phiprof/sampler.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <thread>
#include <utility>
#include <vector>

#include "phiprof/grammar.hpp"
#include "phiprof/parsers.hpp"

#if defined(__linux__)
#include <linux/perf_event.h>
#include <sys/ioctl.h>
#include <sys/syscall.h>
#endif

namespace phiprof {
namespace {

namespace chrono = std::chrono;
using Clock = chrono::steady_clock;

bool is_host(SamplerKind kind) { return kind != SamplerKind::kMicReplay; }

TimeAnchor fresh_anchor(const Clock::time_point& start) {
    TimeAnchor a;
    a.tfs = chrono::duration<double>(Clock::now() - start).count();
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    a.hour = tm.tm_hour;
    a.minute = tm.tm_min;
    a.second = tm.tm_sec;
    return a;
}

// The grammar stamps tfs at millisecond precision, so two anchors landing
// in the same millisecond would make the stream non-monotonic. Quantize
// every anchor to the grid and nudge collisions forward.
struct AnchorSequencer {
    long long last_ms = -1;

    long long sequence_ms(double tfs) {
        long long ms = std::llround(tfs * 1000.0);
        if (ms <= last_ms) ms = last_ms + 1;
        last_ms = ms;
        return ms;
    }

    // Live sampling stamps what actually happened: the measured instant.
    TimeAnchor measured(const Clock::time_point& start) {
        TimeAnchor a = fresh_anchor(start);
        a.tfs = static_cast<double>(sequence_ms(a.tfs)) / 1000.0;
        return a;
    }

    // Replay stamps its schedule: the stream reproduces the recorded
    // cadence for consumers, so the emitting thread's scheduling noise
    // must not leak into the anchors. Wall stamps derive from the same
    // schedule so a late wakeup cannot tear tfs and wall apart.
    TimeAnchor scheduled(const chrono::system_clock::time_point& wall_start,
                         double tick_s) {
        const long long ms = sequence_ms(tick_s);
        TimeAnchor a;
        a.tfs = static_cast<double>(ms) / 1000.0;
        const std::time_t t = chrono::system_clock::to_time_t(
            chrono::time_point_cast<chrono::system_clock::duration>(
                wall_start + chrono::milliseconds(ms)));
        std::tm tm{};
        localtime_r(&t, &tm);
        a.hour = tm.tm_hour;
        a.minute = tm.tm_min;
        a.second = tm.tm_sec;
        return a;
    }
};

// Sleeps toward the deadline in short slices so a stop request is honored
// well within the two-period promptness bound. The OS sleep can overrun by
// milliseconds, so the approach tightens near the deadline and finishes
// with a yield spin; sample cadence depends on hitting the tick closely.
void sleep_until_or_stop(const Clock::time_point& deadline,
                         const StopSignal& stop) {
    while (!stop.stop_requested()) {
        const auto now = Clock::now();
        if (now >= deadline) return;
        const auto remaining = deadline - now;
        if (remaining > chrono::milliseconds(2))
            std::this_thread::sleep_for(std::min<Clock::duration>(
                remaining - chrono::milliseconds(1), chrono::milliseconds(5)));
        else if (remaining > chrono::microseconds(300))
            std::this_thread::sleep_for(chrono::microseconds(100));
        else
            std::this_thread::yield();
    }
}

std::string read_text_file(const std::filesystem::path& path,
                           const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SamplerError(std::string("cannot read ") + what + " " +
                           path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return text;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw SamplerError("cannot write sampler output " + path.string());
    return out;
}

#if defined(__linux__)

// RAPL exposes cumulative microjoules per domain; power is the modular
// finite difference over the period, wrapping at max_energy_range_uj.
struct EnergyDomain {
    std::filesystem::path energy_file;
    unsigned long long max_range = 0;
    unsigned long long last = 0;

    unsigned long long read_raw() const {
        std::ifstream in(energy_file);
        unsigned long long v = 0;
        if (!(in >> v))
            throw SamplerError("platform energy interface unreadable: " +
                               energy_file.string());
        return v;
    }
    double delta_joules() {
        const unsigned long long now = read_raw();
        unsigned long long delta;
        if (now >= last)
            delta = now - last;
        else
            delta = now + (max_range - last);
        last = now;
        return static_cast<double>(delta) * 1e-6;
    }
};

struct RaplReader {
    std::vector<EnergyDomain> core;
    std::vector<EnergyDomain> dram;

    static std::string domain_name(const std::filesystem::path& dir) {
        std::ifstream in(dir / "name");
        std::string name;
        std::getline(in, name);
        return name;
    }

    static EnergyDomain open_domain(const std::filesystem::path& dir) {
        EnergyDomain d;
        d.energy_file = dir / "energy_uj";
        std::ifstream range(dir / "max_energy_range_uj");
        if (!(range >> d.max_range) || d.max_range == 0)
            throw SamplerError("platform energy interface unreadable: " +
                               (dir / "max_energy_range_uj").string());
        d.last = d.read_raw();
        return d;
    }

    static RaplReader open() {
        namespace fs = std::filesystem;
        const fs::path root = "/sys/class/powercap";
        RaplReader r;
        std::error_code ec;
        for (const auto& pkg : fs::directory_iterator(root, ec)) {
            if (domain_name(pkg.path()).rfind("package-", 0) != 0) continue;
            for (const auto& sub : fs::directory_iterator(pkg.path(), ec)) {
                if (!sub.is_directory()) continue;
                const std::string name = domain_name(sub.path());
                if (name == "core")
                    r.core.push_back(open_domain(sub.path()));
                else if (name == "dram")
                    r.dram.push_back(open_domain(sub.path()));
            }
        }
        if (r.core.empty() || r.dram.empty())
            throw SamplerError(
                "platform energy interface unavailable: no core+dram domains "
                "under " +
                root.string());
        return r;
    }

    // (core, dram) joules accumulated since the previous call.
    std::pair<double, double> read_delta() {
        double core_j = 0.0, dram_j = 0.0;
        for (EnergyDomain& d : core) core_j += d.delta_joules();
        for (EnergyDomain& d : dram) dram_j += d.delta_joules();
        return {core_j, dram_j};
    }
};

// One hardware event summed across every CPU in the package (the stream
// header records this aggregation choice).
class PerfCounter {
public:
    PerfCounter(const std::string& name, std::uint32_t type,
                std::uint64_t config) {
        perf_event_attr attr{};
        attr.size = sizeof attr;
        attr.type = type;
        attr.config = config;
        attr.disabled = 0;
        attr.exclude_kernel = 1;
        attr.exclude_hv = 1;
        const unsigned cpus = std::max(1u, std::thread::hardware_concurrency());
        for (unsigned cpu = 0; cpu < cpus; ++cpu) {
            const long fd = syscall(SYS_perf_event_open, &attr, -1,
                                    static_cast<int>(cpu), -1, 0);
            if (fd < 0) {
                const int err = errno;
                close_all();
                throw SamplerError("cannot open hardware counter '" + name +
                                   "' on cpu " + std::to_string(cpu) + ": " +
                                   std::strerror(err));
            }
            fds_.push_back(static_cast<int>(fd));
        }
    }
    PerfCounter(const PerfCounter&) = delete;
    PerfCounter& operator=(const PerfCounter&) = delete;
    PerfCounter(PerfCounter&& other) noexcept : fds_(std::move(other.fds_)) {
        other.fds_.clear();
        last_ = other.last_;
    }
    ~PerfCounter() { close_all(); }

    std::uint64_t delta() {
        std::uint64_t total = 0;
        for (int fd : fds_) {
            std::uint64_t v = 0;
            if (read(fd, &v, sizeof v) == sizeof v) total += v;
        }
        const std::uint64_t d = total - last_;
        last_ = total;
        return d;
    }

private:
    void close_all() {
        for (int fd : fds_) close(fd);
        fds_.clear();
    }
    std::vector<int> fds_;
    std::uint64_t last_ = 0;
};

PerfCounter open_named_counter(const std::string& name,
                               const CounterNames& names) {
    if (name == names.host_unhalted_cycles)
        return PerfCounter(name, PERF_TYPE_HARDWARE, PERF_COUNT_HW_CPU_CYCLES);
    if (name == names.host_llc_miss)
        return PerfCounter(name, PERF_TYPE_HW_CACHE,
                           PERF_COUNT_HW_CACHE_LL |
                               (PERF_COUNT_HW_CACHE_OP_READ << 8) |
                               (PERF_COUNT_HW_CACHE_RESULT_MISS << 16));
    throw SamplerError("no hardware event mapping for counter '" + name + "'");
}

std::size_t run_host_live(const SamplerSpec& spec, double period_s,
                          const StopSignal& stop) {
    RaplReader rapl = RaplReader::open();
    std::vector<std::pair<std::string, PerfCounter>> counters;
    for (const std::string& name :
         {spec.counter_names.host_llc_miss,
          spec.counter_names.host_unhalted_cycles})
        counters.emplace_back(name,
                              open_named_counter(name, spec.counter_names));
    for (auto& [name, counter] : counters) counter.delta();  // prime

    std::ofstream out = open_output(spec.output_path);
    out << "# host power/counter sampler, live, period "
        << grammar::format_tfs(period_s)
        << " s, counters package-aggregated\n";
    out.flush();

    const auto start = Clock::now();
    auto last_tick = start;
    AnchorSequencer anchors;
    std::size_t written = 0;
    for (std::size_t i = 0; !stop.stop_requested(); ++i) {
        sleep_until_or_stop(
            start + chrono::duration_cast<Clock::duration>(
                        chrono::duration<double>((i + 1) * period_s)),
            stop);
        if (stop.stop_requested()) break;
        const auto now = Clock::now();
        const double elapsed = chrono::duration<double>(now - last_tick).count();
        last_tick = now;

        HostPowerSample power;
        power.anchor = anchors.measured(start);
        const auto [core_j, dram_j] = rapl.read_delta();
        power.core_watts = core_j / elapsed;
        power.dram_watts = dram_j / elapsed;
        power.total_watts = power.core_watts + power.dram_watts;

        PerfSample perf;
        perf.anchor = power.anchor;
        for (auto& [name, counter] : counters)
            perf.counters[name] = counter.delta();

        out << grammar::host_line(power, perf) << '\n';
        out.flush();
        ++written;
    }
    return written;
}

#else

std::size_t run_host_live(const SamplerSpec&, double, const StopSignal&) {
    throw SamplerError(
        "platform energy interface unavailable on this operating system");
}

#endif  // __linux__

template <typename Payload, typename Emit>
std::size_t run_replay(const SamplerSpec& spec, double period_s,
                       const StopSignal& stop,
                       const std::vector<Payload>& payloads, Emit emit) {
    std::ofstream out = open_output(spec.output_path);
    out << "# " << (is_host(spec.kind) ? "host power/counter" : "mic power")
        << " sampler, replay of " << spec.source_path.filename().string()
        << ", period " << grammar::format_tfs(period_s) << " s\n";
    out.flush();

    const auto start = Clock::now();
    const auto wall_start = chrono::system_clock::now();
    AnchorSequencer anchors;
    std::size_t written = 0;
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        const double tick_s = static_cast<double>(i + 1) * period_s;
        sleep_until_or_stop(
            start + chrono::duration_cast<Clock::duration>(
                        chrono::duration<double>(tick_s)),
            stop);
        if (stop.stop_requested()) break;
        out << emit(payloads[i], anchors.scheduled(wall_start, tick_s)) << '\n';
        out.flush();
        ++written;
    }
    return written;
}

}  // namespace

std::string to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::kHostLive:
            return "host_live";
        case SamplerKind::kHostReplay:
            return "host_replay";
        case SamplerKind::kMicReplay:
            return "mic_replay";
    }
    return "unknown";
}

double effective_period_s(const SamplerSpec& spec) {
    double period = spec.period_s > 0.0
                        ? spec.period_s
                        : (is_host(spec.kind) ? kDefaultHostPeriodS
                                              : kDefaultMicPeriodS);
    if (const char* env = std::getenv("PHIPROF_SAMPLER_PERIOD_MS")) {
        char* end = nullptr;
        const double ms = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(ms > 0.0))
            throw SamplerError(std::string("bad PHIPROF_SAMPLER_PERIOD_MS '") +
                               env + "'");
        period = ms / 1000.0;
    }
    if (spec.kind == SamplerKind::kMicReplay &&
        period < kMicPeriodFloorS - 1e-12)
        throw SamplerError("mic sampler period " + grammar::format_tfs(period) +
                           " s is below the 50 ms update floor");
    return period;
}

std::size_t run_sampler(const SamplerSpec& spec, const StopSignal& stop) {
    const double period_s = effective_period_s(spec);
    auto parse_source = [&](auto parser) {
        const std::string text =
            read_text_file(spec.source_path, "replay source");
        try {
            return parser(text);
        } catch (const ParseError& e) {
            throw SamplerError("replay source " + spec.source_path.string() +
                               ": " + e.what());
        }
    };
    switch (spec.kind) {
        case SamplerKind::kHostLive:
            return run_host_live(spec, period_s, stop);
        case SamplerKind::kHostReplay: {
            const auto source = parse_source(
                [](const std::string& text) { return parse_host_sampler(text); });
            return run_replay(
                spec, period_s, stop, source,
                [](std::pair<HostPowerSample, PerfSample> sample,
                   const TimeAnchor& anchor) {
                    sample.first.anchor = anchor;
                    sample.second.anchor = anchor;
                    return grammar::host_line(sample.first, sample.second);
                });
        }
        case SamplerKind::kMicReplay: {
            const auto source = parse_source(
                [](const std::string& text) { return parse_mic_sampler(text); });
            return run_replay(spec, period_s, stop, source,
                              [](MicPowerSample sample,
                                 const TimeAnchor& anchor) {
                                  sample.anchor = anchor;
                                  return grammar::mic_line(sample);
                              });
        }
    }
    throw SamplerError("unknown sampler kind");
}

}  // namespace phiprof
