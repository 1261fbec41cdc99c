#include <fstream>

#include "json_util.hpp"
#include "rtfs/ingestion.hpp"

namespace rtfs {

ResultsStore::ResultsStore(std::filesystem::path directory)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw StorageError("cannot create results directory " + directory.string() + ": " + ec.message());
    }
    file_ = directory / "results-v1.jsonl";
}

void ResultsStore::store_result(const SimulationResult& result)
{
    const std::string line = result_to_json(result);
    std::lock_guard lock(mutex_);
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) {
        throw StorageError("results store unavailable: cannot open " + file_.string());
    }
    out << line << '\n';
    out.flush();
    if (!out) {
        throw StorageError("results store unavailable: write to " + file_.string() + " failed");
    }
}

std::vector<SimulationResult> ResultsStore::load_history(UtcTime from, UtcTime to) const
{
    std::vector<SimulationResult> out;
    std::lock_guard lock(mutex_);
    std::ifstream in(file_, std::ios::binary);
    if (!in) {
        return out;  // nothing stored yet
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto j = detail::parse_json_text(line);
        const auto t = parse_utc(j.value("snapshot_time", ""));
        if (!t) {
            throw StorageError("results store line " + std::to_string(line_no) + " has no snapshot_time");
        }
        if (*t < from || *t > to) {
            continue;
        }
        out.push_back(detail::result_from_json_value(j));
    }
    return out;
}

std::vector<ResultSummary> ResultsStore::list(UtcTime from, UtcTime to) const
{
    std::vector<ResultSummary> out;
    for (const auto& r : load_history(from, to)) {
        out.push_back({r.snapshot_time, r.scenario_label, r.nadir_hz, r.nadir_time, r.alarm});
    }
    return out;
}

} // namespace rtfs
