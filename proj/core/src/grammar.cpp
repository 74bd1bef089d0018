#include "phiprof/grammar.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace phiprof {
namespace grammar {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, std::size_t line,
                    const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "bad " + what + " '" + tok + "'");
    }
}

std::uint64_t parse_u64(const std::string& tok, std::size_t line,
                        const std::string& what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, "bad " + what + " '" + tok + "'");
    return v;
}

int parse_int(const std::string& tok, std::size_t line,
              const std::string& what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, "bad " + what + " '" + tok + "'");
    return v;
}

// Splits "key=value"; returns false when '=' is absent.
bool split_kv(const std::string& tok, std::string& key, std::string& value) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= tok.size()) return false;
    key = tok.substr(0, eq);
    value = tok.substr(eq + 1);
    return true;
}

double expect_watt_field(const std::vector<std::string>& toks, std::size_t idx,
                         const std::string& key, std::size_t line) {
    if (idx >= toks.size())
        throw ParseError(line, "missing connector " + key);
    std::string k, v;
    if (!split_kv(toks[idx], k, v) || k != key)
        throw ParseError(line, "missing connector " + key + " (got '" +
                                   toks[idx] + "')");
    return parse_double(v, line, key);
}

}  // namespace

std::string format_wall(const TimeAnchor& a) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "[%02d:%02d:%02d]", a.hour, a.minute,
                  a.second);
    return buf;
}

std::string format_tfs(double tfs) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", tfs);
    return buf;
}

std::string format_watts(double w) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", w);
    return buf;
}

std::string format_app_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s);
    return buf;
}

std::string format_anchor(const TimeAnchor& a) {
    return format_wall(a) + " " + format_tfs(a.tfs);
}

TimeAnchor parse_anchor(const std::string& wall_token,
                        const std::string& tfs_token, std::size_t line) {
    TimeAnchor a;
    int h = 0, m = 0, s = 0;
    char extra = 0;
    if (std::sscanf(wall_token.c_str(), "[%2d:%2d:%2d%c", &h, &m, &s, &extra) !=
            4 ||
        extra != ']')
        throw ParseError(line, "bad wall clock '" + wall_token + "'");
    a.hour = h;
    a.minute = m;
    a.second = s;
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59)
        throw ParseError(line, "wall clock out of range '" + wall_token + "'");
    a.tfs = parse_double(tfs_token, line, "tfs");
    if (a.tfs < 0.0)
        throw ParseError(line, "negative tfs '" + tfs_token + "'");
    return a;
}

std::string host_line(const HostPowerSample& power, const PerfSample& perf) {
    std::ostringstream os;
    os << format_anchor(power.anchor) << " core=" << format_watts(power.core_watts)
       << " dram=" << format_watts(power.dram_watts);
    for (const auto& [name, delta] : perf.counters)
        os << ' ' << name << '=' << delta;
    return os.str();
}

std::string mic_line(const MicPowerSample& s) {
    std::ostringstream os;
    os << format_anchor(s.anchor) << " pcie=" << format_watts(s.pcie_watts)
       << " c2x3=" << format_watts(s.c2x3_watts)
       << " c2x4=" << format_watts(s.c2x4_watts);
    if (s.win0_watts && s.win1_watts) {
        os << " win0=" << format_watts(*s.win0_watts)
           << " win1=" << format_watts(*s.win1_watts);
    }
    return os.str();
}

std::vector<std::string> offload_lines(const OffloadRecord& r) {
    std::ostringstream prefix;
    prefix << '[' << r.rank << "] [Offload] [MIC " << r.device_id << "] [Tag "
           << r.tag << "] ";
    std::vector<std::string> out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.cpu_time_s);
    out.push_back(prefix.str() + "[CPU Time] " + buf + "(seconds)");
    std::snprintf(buf, sizeof buf, "%.6f", r.mic_time_s);
    out.push_back(prefix.str() + "[MIC Time] " + buf + "(seconds)");
    out.push_back(prefix.str() + "[CPU->MIC Data] " +
                  std::to_string(r.bytes_to_device) + "(bytes)");
    out.push_back(prefix.str() + "[MIC->CPU Data] " +
                  std::to_string(r.bytes_from_device) + "(bytes)");
    for (const auto& [name, value] : r.counters)
        out.push_back(prefix.str() + "[Counter " + name + "] " +
                      std::to_string(value) + "(count)");
    return out;
}

std::string app_timer_line(int rank, const std::string& name, double seconds) {
    return "[" + std::to_string(rank) + "] TIMER " + name + " " +
           format_app_seconds(seconds);
}

std::string app_event_line(int rank, const std::string& name,
                           const TimeAnchor& anchor) {
    return "[" + std::to_string(rank) + "] EVENT " + name + " " +
           format_anchor(anchor);
}

std::pair<HostPowerSample, PerfSample> parse_host_line(const std::string& line,
                                                       std::size_t line_no) {
    auto toks = split_ws(line);
    if (toks.size() < 4)
        throw ParseError(line_no, "short host sampler line '" + line + "'");
    HostPowerSample power;
    power.anchor = parse_anchor(toks[0], toks[1], line_no);
    std::string k, v;
    if (!split_kv(toks[2], k, v) || k != "core")
        throw ParseError(line_no, "expected core=<W>, got '" + toks[2] + "'");
    power.core_watts = parse_double(v, line_no, "core watts");
    if (!split_kv(toks[3], k, v) || k != "dram")
        throw ParseError(line_no, "expected dram=<W>, got '" + toks[3] + "'");
    power.dram_watts = parse_double(v, line_no, "dram watts");
    power.total_watts = power.core_watts + power.dram_watts;

    PerfSample perf;
    perf.anchor = power.anchor;
    for (std::size_t i = 4; i < toks.size(); ++i) {
        if (!split_kv(toks[i], k, v))
            throw ParseError(line_no, "bad counter token '" + toks[i] + "'");
        if (perf.counters.count(k))
            throw ParseError(line_no, "duplicate counter '" + k + "'");
        perf.counters[k] = parse_u64(v, line_no, "counter delta");
    }
    return {power, perf};
}

MicPowerSample parse_mic_line(const std::string& line, std::size_t line_no) {
    auto toks = split_ws(line);
    if (toks.size() < 2)
        throw ParseError(line_no, "short mic sampler line '" + line + "'");
    MicPowerSample s;
    s.anchor = parse_anchor(toks[0], toks[1], line_no);
    s.pcie_watts = expect_watt_field(toks, 2, "pcie", line_no);
    s.c2x3_watts = expect_watt_field(toks, 3, "c2x3", line_no);
    s.c2x4_watts = expect_watt_field(toks, 4, "c2x4", line_no);
    s.total_watts = s.pcie_watts + s.c2x3_watts + s.c2x4_watts;
    if (toks.size() >= 6) {
        std::string k, v;
        if (!split_kv(toks[5], k, v) || k != "win0")
            throw ParseError(line_no, "expected win0=<W>, got '" + toks[5] + "'");
        s.win0_watts = parse_double(v, line_no, "win0 watts");
        if (toks.size() < 7)
            throw ParseError(line_no, "win0 without win1");
        if (!split_kv(toks[6], k, v) || k != "win1")
            throw ParseError(line_no, "expected win1=<W>, got '" + toks[6] + "'");
        s.win1_watts = parse_double(v, line_no, "win1 watts");
        if (toks.size() > 7)
            throw ParseError(line_no, "trailing token '" + toks[7] + "'");
    } else if (toks.size() == 6) {
        throw ParseError(line_no, "win0 without win1");
    }
    return s;
}

namespace {

// Reads one "[...]" group starting at pos; advances pos past it and any
// following spaces.
std::string bracket_group(const std::string& line, std::size_t& pos,
                          std::size_t line_no) {
    if (pos >= line.size() || line[pos] != '[')
        throw ParseError(line_no, "expected '[' at column " +
                                      std::to_string(pos + 1) + " in '" + line +
                                      "'");
    auto close = line.find(']', pos);
    if (close == std::string::npos)
        throw ParseError(line_no, "unterminated bracket group in '" + line + "'");
    std::string inner = line.substr(pos + 1, close - pos - 1);
    pos = close + 1;
    while (pos < line.size() && line[pos] == ' ') ++pos;
    return inner;
}

}  // namespace

OffloadField parse_offload_line(const std::string& line, std::size_t line_no) {
    OffloadField f;
    std::size_t pos = 0;
    f.rank = parse_int(bracket_group(line, pos, line_no), line_no, "rank");
    std::string kw = bracket_group(line, pos, line_no);
    if (kw != "Offload")
        throw ParseError(line_no, "expected [Offload], got [" + kw + "]");
    std::string mic = bracket_group(line, pos, line_no);
    if (mic.rfind("MIC ", 0) != 0)
        throw ParseError(line_no, "expected [MIC <dev>], got [" + mic + "]");
    f.device = parse_int(mic.substr(4), line_no, "device id");
    std::string tag = bracket_group(line, pos, line_no);
    if (tag.rfind("Tag ", 0) != 0)
        throw ParseError(line_no, "expected [Tag <n>], got [" + tag + "]");
    f.tag = parse_int(tag.substr(4), line_no, "tag");
    f.field = bracket_group(line, pos, line_no);

    std::string rest = line.substr(pos);
    auto paren = rest.find('(');
    if (paren == std::string::npos || rest.back() != ')')
        throw ParseError(line_no, "expected <value>(<unit>), got '" + rest + "'");
    std::string value = rest.substr(0, paren);
    f.unit = rest.substr(paren + 1, rest.size() - paren - 2);

    if (f.field == "CPU Time" || f.field == "MIC Time") {
        if (f.unit != "seconds")
            throw ParseError(line_no, "expected (seconds) for [" + f.field +
                                          "], got (" + f.unit + ")");
        f.value = parse_double(value, line_no, f.field);
        if (f.value < 0.0)
            throw ParseError(line_no, "negative " + f.field);
    } else if (f.field == "CPU->MIC Data" || f.field == "MIC->CPU Data") {
        if (f.unit != "bytes")
            throw ParseError(line_no, "expected (bytes) for [" + f.field +
                                          "], got (" + f.unit + ")");
        f.uvalue = parse_u64(value, line_no, f.field);
    } else if (f.field.rfind("Counter ", 0) == 0) {
        if (f.unit != "count")
            throw ParseError(line_no, "expected (count) for [" + f.field +
                                          "], got (" + f.unit + ")");
        f.uvalue = parse_u64(value, line_no, f.field);
    } else {
        throw ParseError(line_no, "unknown offload field [" + f.field + "]");
    }
    return f;
}

AppLine parse_app_line(const std::string& line, std::size_t line_no) {
    AppLine out;
    std::size_t pos = 0;
    out.rank = parse_int(bracket_group(line, pos, line_no), line_no, "rank");
    auto toks = split_ws(line.substr(pos));
    if (toks.empty())
        throw ParseError(line_no, "missing TIMER/EVENT keyword");
    if (toks[0] == "TIMER") {
        if (toks.size() != 3)
            throw ParseError(line_no, "TIMER line needs <name> <seconds>");
        out.kind = AppLine::Kind::kTimer;
        out.name = toks[1];
        out.seconds = parse_double(toks[2], line_no, "timer seconds");
        if (out.seconds < 0.0)
            throw ParseError(line_no, "negative timer '" + toks[2] + "'");
    } else if (toks[0] == "EVENT") {
        if (toks.size() != 4)
            throw ParseError(line_no, "EVENT line needs <name> [HH:MM:SS] <tfs>");
        out.kind = AppLine::Kind::kEvent;
        out.name = toks[1];
        out.anchor = parse_anchor(toks[2], toks[3], line_no);
    } else {
        throw ParseError(line_no, "unknown app line keyword '" + toks[0] + "'");
    }
    return out;
}

bool is_comment_or_blank(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace grammar
}  // namespace phiprof
