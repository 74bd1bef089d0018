#pragma once

// Shared scaffolding for the test binaries: scratch directories, tiny file
// helpers, fixture builders for consistent timelines and offload records.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "phiprof/model.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Unique scratch directory, removed (best effort) on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const unsigned n = counter++;
        path_ = fs::temp_directory_path() /
                ("phiprof-test-" + std::to_string(n) + "-" +
                 std::to_string(reinterpret_cast<std::uintptr_t>(this) & 0xffff));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

  private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

inline bool any_contains(const std::vector<std::string>& lines,
                         const std::string& needle) {
    for (const auto& l : lines)
        if (contains(l, needle)) return true;
    return false;
}

// Runs f, expecting it to throw E; returns the message (empty if nothing
// was thrown, so callers can assert on a substring and on non-emptiness in
// one go).
template <typename E, typename F>
std::string message_of(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    return {};
}

inline phiprof::TimeAnchor anchor(int h, int m, int s, double tfs) {
    phiprof::TimeAnchor a;
    a.hour = h;
    a.minute = m;
    a.second = s;
    a.tfs = tfs;
    return a;
}

// Timeline whose timers satisfy the accounting rules:
//   host_compute = position + velocity + redistribute - halo
//   loop >= host_compute + halo + reduce + mic + pci (within 2% slack)
inline phiprof::AppTimeline consistent_timeline(
    int rank, double position, double velocity, double redistribute,
    double halo, double reduce, double force, double inner_transfer,
    double loop) {
    phiprof::AppTimeline t;
    t.rank = rank;
    t.named_timers["position"] = position;
    t.named_timers["velocity"] = velocity;
    t.named_timers["redistribute"] = redistribute;
    t.named_timers["halo_exchange"] = halo;
    t.named_timers["reduce"] = reduce;
    t.named_timers["force"] = force;
    t.named_timers["inner_transfer"] = inner_transfer;
    t.named_timers["loop"] = loop;
    return t;
}

inline phiprof::OffloadRecord offload(int rank, int device, int tag,
                                      double cpu_s, double mic_s,
                                      std::uint64_t to_bytes = 0,
                                      std::uint64_t from_bytes = 0) {
    phiprof::OffloadRecord r;
    r.rank = rank;
    r.device_id = device;
    r.tag = tag;
    r.cpu_time_s = cpu_s;
    r.mic_time_s = mic_s;
    r.bytes_to_device = to_bytes;
    r.bytes_from_device = from_bytes;
    return r;
}

}  // namespace testutil
