#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rtfs/ingestion.hpp"
#include "rtfs/time_util.hpp"

namespace rtfs {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

[[noreturn]] void fail(std::size_t line, const std::string& field, const std::string& what)
{
    throw ParseError(field, line, 0, "trace line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view text, std::size_t line, const std::string& field)
{
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        fail(line, field, "malformed number '" + std::string(text) + "' in " + field);
    }
    return value;
}

double interpolate(const std::vector<double>& t, const std::vector<double>& v, double at)
{
    auto it = std::upper_bound(t.begin(), t.end(), at);
    if (it == t.begin()) {
        return v.front();
    }
    if (it == t.end()) {
        return v.back();
    }
    const auto hi = static_cast<std::size_t>(it - t.begin());
    const std::size_t lo = hi - 1;
    const double w = (at - t[lo]) / (t[hi] - t[lo]);
    return v[lo] + w * (v[hi] - v[lo]);
}

DisturbanceKind parse_kind(const std::string& text)
{
    if (text == "sudden-trip") {
        return DisturbanceKind::sudden_trip;
    }
    if (text == "ramp-down") {
        return DisturbanceKind::ramp_down;
    }
    throw ParseError("event_kind", 0, 0, "event_kind must be sudden-trip or ramp-down, got '" + text + "'");
}

} // namespace

const TraceChannel& TraceFile::channel(std::string_view name) const
{
    for (const auto& c : channels) {
        if (c.name == name) {
            return c;
        }
    }
    throw ParseError(std::string(name), 0, 0, "trace " + event_id + " has no channel '" + std::string(name) + "'");
}

bool TraceFile::has_channel(std::string_view name) const
{
    return std::any_of(channels.begin(), channels.end(), [&](const TraceChannel& c) { return c.name == name; });
}

FrequencyTrace TraceFile::frequency(std::string_view name) const
{
    FrequencyTrace trace{start_offset, time_step(), channel(name).values};
    if (auto v = check_trace(trace); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    return trace;
}

PowerTrace TraceFile::power(std::string_view name) const
{
    return PowerTrace{start_offset, time_step(), channel(name).values};
}

std::optional<std::string> TraceFile::meta(std::string_view key) const
{
    auto it = metadata.find(std::string(key));
    if (it == metadata.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<double> TraceFile::meta_number_or(std::string_view key) const
{
    auto text = meta(key);
    if (!text) {
        return std::nullopt;
    }
    return parse_double(*text, 0, std::string(key));
}

double TraceFile::meta_number(std::string_view key) const
{
    auto v = meta_number_or(key);
    if (!v) {
        throw ParseError(std::string(key), 0, 0, "trace " + event_id + " header is missing '" + std::string(key) + "'");
    }
    return *v;
}

TraceFile parse_trace_file(std::string_view text)
{
    TraceFile trace;
    std::vector<std::pair<std::string, std::string>> declared;  // name, unit
    bool have_start = false;
    bool have_rate = false;
    bool have_columns = false;
    std::vector<double> times;
    std::vector<std::vector<double>> columns;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            const std::string_view body = trim(line.substr(1));
            const std::size_t colon = body.find(':');
            if (colon == std::string_view::npos) {
                continue;  // free-form comment / format banner
            }
            const std::string key(trim(body.substr(0, colon)));
            const std::string value(trim(body.substr(colon + 1)));
            if (key == "event_id") {
                trace.event_id = value;
            } else if (key == "start_utc") {
                auto t = parse_utc(value);
                if (!t) {
                    fail(line_no, key, "bad start_utc '" + value + "'");
                }
                trace.start_utc = *t;
                have_start = true;
            } else if (key == "sample_rate_hz") {
                trace.sample_rate_hz = parse_double(value, line_no, key);
                if (!(trace.sample_rate_hz > 0.0)) {
                    fail(line_no, key, "sample rate must be positive");
                }
                have_rate = true;
            } else if (key == "channels") {
                for (auto item : split(value, ',')) {
                    const std::size_t open = item.find('[');
                    const std::size_t close = item.rfind(']');
                    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
                        declared.emplace_back(std::string(trim(item)), "");
                    } else {
                        declared.emplace_back(std::string(trim(item.substr(0, open))),
                                              std::string(item.substr(open + 1, close - open - 1)));
                    }
                }
            } else {
                trace.metadata[key] = value;
            }
            continue;
        }
        if (!have_columns) {
            if (declared.empty()) {
                fail(line_no, "channels", "header does not declare channels");
            }
            const auto names = split(line, ',');
            if (names.empty() || names.front() != "t") {
                fail(line_no, "t", "first column must be 't'");
            }
            for (const auto& [name, unit] : declared) {
                if (std::find(names.begin() + 1, names.end(), name) == names.end()) {
                    fail(line_no, name, "missing channel '" + name + "'");
                }
            }
            if (names.size() != declared.size() + 1) {
                fail(line_no, "channels", "column header does not match declared channels");
            }
            for (std::size_t i = 1; i < names.size(); ++i) {
                if (names[i] != declared[i - 1].first) {
                    fail(line_no, std::string(names[i]), "column order differs from declared channels");
                }
            }
            columns.assign(declared.size(), {});
            have_columns = true;
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != declared.size() + 1) {
            fail(line_no, "row", "expected " + std::to_string(declared.size() + 1) + " columns, got " +
                                      std::to_string(cells.size()));
        }
        const double t = parse_double(cells[0], line_no, "t");
        if (!times.empty() && !(t > times.back())) {
            fail(line_no, "t", t == times.back() ? "duplicate timestamp" : "timestamps are not increasing");
        }
        times.push_back(t);
        for (std::size_t c = 0; c < declared.size(); ++c) {
            columns[c].push_back(parse_double(cells[c + 1], line_no, declared[c].first));
        }
    }

    if (trace.event_id.empty()) {
        fail(line_no, "event_id", "header is missing event_id");
    }
    if (!have_start) {
        fail(line_no, "start_utc", "header is missing start_utc");
    }
    if (!have_rate) {
        fail(line_no, "sample_rate_hz", "header is missing sample_rate_hz");
    }
    if (!have_columns || times.size() < 2) {
        fail(line_no, "row", "trace needs at least two samples");
    }

    const double step = 1.0 / trace.sample_rate_hz;
    const double mean_step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (std::abs(mean_step / step - 1.0) > 1e-3) {
        fail(line_no, "sample_rate_hz", "declared sample rate does not match the data (mean step " +
                                            std::to_string(mean_step) + " s)");
    }
    bool uniform = true;
    double jitter = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && std::abs((times[i] - times[i - 1]) - step) > 1e-6 * step) {
            uniform = false;
        }
        jitter = std::max(jitter, std::abs(times[i] - (times.front() + step * static_cast<double>(i))));
    }
    trace.start_offset = times.front();

    if (uniform) {
        for (std::size_t c = 0; c < declared.size(); ++c) {
            trace.channels.push_back({declared[c].first, declared[c].second, std::move(columns[c])});
        }
        return trace;
    }
    if (jitter > kMaxTraceJitter) {
        fail(line_no, "t", "sample jitter of " + std::to_string(jitter * 1e3) + " ms exceeds 1 ms");
    }
    const auto count = static_cast<std::size_t>(std::floor((times.back() - times.front()) / step + 1e-9)) + 1;
    for (std::size_t c = 0; c < declared.size(); ++c) {
        TraceChannel channel{declared[c].first, declared[c].second, std::vector<double>(count)};
        for (std::size_t i = 0; i < count; ++i) {
            channel.values[i] = interpolate(times, columns[c], times.front() + step * static_cast<double>(i));
        }
        trace.channels.push_back(std::move(channel));
    }
    trace.resampled = true;
    return trace;
}

TraceFile load_trace_file(const std::filesystem::path& path)
{
    return parse_trace_file(read_text_file(path));
}

std::string serialize_trace_file(const TraceFile& trace)
{
    std::ostringstream out;
    out << "# rtfs-trace 1\n";
    out << "# event_id: " << trace.event_id << '\n';
    out << "# start_utc: " << format_utc(trace.start_utc) << '\n';
    char number[64];
    std::snprintf(number, sizeof number, "%.17g", trace.sample_rate_hz);
    out << "# sample_rate_hz: " << number << '\n';
    out << "# channels: ";
    for (std::size_t c = 0; c < trace.channels.size(); ++c) {
        out << (c ? ", " : "") << trace.channels[c].name << '[' << trace.channels[c].unit << ']';
    }
    out << '\n';
    for (const auto& [key, value] : trace.metadata) {
        out << "# " << key << ": " << value << '\n';
    }
    out << 't';
    for (const auto& c : trace.channels) {
        out << ',' << c.name;
    }
    out << '\n';
    for (std::size_t i = 0; i < trace.sample_count(); ++i) {
        std::snprintf(number, sizeof number, "%.9f", trace.start_offset + trace.time_step() * static_cast<double>(i));
        out << number;
        for (const auto& c : trace.channels) {
            std::snprintf(number, sizeof number, "%.17g", c.values[i]);
            out << ',' << number;
        }
        out << '\n';
    }
    return out.str();
}

DisturbanceRecord to_disturbance_record(const TraceFile& trace)
{
    DisturbanceRecord record;
    record.event_id = trace.event_id;
    record.frequency = trace.frequency();
    record.onset_time = trace.meta_number("onset_s");
    record.delta_p = trace.meta_number("delta_p_mw");
    record.pre_event_load_mw = trace.meta_number_or("pre_event_load_mw").value_or(0.0);
    record.ke_gen_at_event = trace.meta_number_or("ke_gen_mws").value_or(0.0);
    record.kind = parse_kind(trace.meta("event_kind").value_or("sudden-trip"));
    return record;
}

UnitEventTrace to_unit_event_trace(const TraceFile& trace)
{
    UnitStaticParams params;
    params.rated_mw = trace.meta_number("rated_mw");
    params.spinning_reserve_mw = trace.meta_number("spinning_reserve_mw");
    params.load_rejection_mw = trace.meta_number_or("load_rejection_mw").value_or(0.0);
    params.mdrr = trace.meta_number("mdrr");
    params.deadband_halfwidth = trace.meta_number_or("deadband_halfwidth").value_or(0.025);
    params.droop_fraction = trace.meta_number_or("droop_fraction").value_or(0.04);
    params.nominal_frequency = trace.meta_number_or("nominal_frequency").value_or(50.0);
    auto unit_id = trace.meta("unit_id");
    if (!unit_id) {
        throw ParseError("unit_id", 0, 0, "trace " + trace.event_id + " header is missing 'unit_id'");
    }
    UnitEventTrace out = make_unit_event_trace(*unit_id, trace.frequency(), trace.power("output_mw"),
                                               trace.meta_number("onset_s"), params);
    out.frequency_source = trace.meta("frequency_source").value_or("local");
    return out;
}

std::vector<FrequencyLoadPair> to_frequency_load_pairs(const TraceFile& trace)
{
    const auto& f = trace.channel("frequency").values;
    const auto& load = trace.channel("load_mw").values;
    const double onset = trace.meta_number_or("onset_s").value_or(trace.start_offset);
    std::vector<FrequencyLoadPair> pairs;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (trace.start_offset + trace.time_step() * static_cast<double>(i) + 1e-9 >= onset) {
            pairs.push_back({f[i], load[i]});
        }
    }
    return pairs;
}

} // namespace rtfs
