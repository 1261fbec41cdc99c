#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "rtfs/ingestion.hpp"

namespace rtfs {

using detail::Json;

namespace {

const std::set<std::string> kSnapshotKeys = {"schema_version",     "timestamp",
                                             "units",              "sdr_blocks",
                                             "system_load_mw",     "pre_contingency_frequency",
                                             "nominal_frequency",  "load_relief_factor",
                                             "load_inertia_override"};
const std::set<std::string> kUnitKeys = {"id",          "rated_mw",    "output_mw",          "kinetic_energy",
                                         "spinning_reserve_mw",        "load_rejection_mw",  "droop_enabled",
                                         "gain",        "time_constant", "mdrr",             "online"};
const std::set<std::string> kBlockKeys = {"id", "amount_mw", "trip_frequency", "pickup_delay", "armed"};

void collect_unknown(const Json& object, const std::set<std::string>& known, const std::string& path,
                     ParseMode mode, std::map<std::string, std::string>& unknown)
{
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (known.count(it.key()) != 0) {
            continue;
        }
        const std::string field = path + "/" + it.key();
        if (mode == ParseMode::strict) {
            detail::field_error(field, "unknown field");
        }
        unknown[field] = it.value().dump();
    }
}

GeneratorUnit parse_unit(const Json& j, const std::string& path)
{
    detail::object_at(j, path);
    GeneratorUnit u;
    u.id = detail::string_field(j, "id", path);
    u.rated_mw = detail::number(j, "rated_mw", path);
    u.output_mw = detail::number(j, "output_mw", path);
    u.kinetic_energy = detail::number(j, "kinetic_energy", path);
    u.spinning_reserve_mw = detail::number_or(j, "spinning_reserve_mw", path, 0.0);
    u.load_rejection_mw = detail::number_or(j, "load_rejection_mw", path, 0.0);
    u.droop_enabled = detail::boolean_or(j, "droop_enabled", path, false);
    u.gain = detail::number_or(j, "gain", path, 1.0);
    u.time_constant = detail::number_or(j, "time_constant", path, 1.0);
    u.mdrr = detail::number_or(j, "mdrr", path, 0.0);
    u.online = detail::boolean_or(j, "online", path, true);
    return u;
}

SdrBlock parse_block(const Json& j, const std::string& path)
{
    detail::object_at(j, path);
    SdrBlock b;
    b.id = detail::string_field(j, "id", path);
    b.amount_mw = detail::number(j, "amount_mw", path);
    b.trip_frequency = detail::number(j, "trip_frequency", path);
    b.pickup_delay = detail::number_or(j, "pickup_delay", path, 0.0);
    b.armed = detail::boolean_or(j, "armed", path, true);
    return b;
}

Json unit_to_json(const GeneratorUnit& u)
{
    return Json{{"id", u.id},
                {"rated_mw", u.rated_mw},
                {"output_mw", u.output_mw},
                {"kinetic_energy", u.kinetic_energy},
                {"spinning_reserve_mw", u.spinning_reserve_mw},
                {"load_rejection_mw", u.load_rejection_mw},
                {"droop_enabled", u.droop_enabled},
                {"gain", u.gain},
                {"time_constant", u.time_constant},
                {"mdrr", u.mdrr},
                {"online", u.online}};
}

Json snapshot_to_json(const SystemSnapshot& s)
{
    Json units = Json::array();
    for (const auto& u : s.units) {
        units.push_back(unit_to_json(u));
    }
    Json blocks = Json::array();
    for (const auto& b : s.sdr_blocks) {
        blocks.push_back(Json{{"id", b.id},
                              {"amount_mw", b.amount_mw},
                              {"trip_frequency", b.trip_frequency},
                              {"pickup_delay", b.pickup_delay},
                              {"armed", b.armed}});
    }
    Json j{{"schema_version", kSnapshotSchemaVersion},
           {"timestamp", format_utc(s.timestamp)},
           {"system_load_mw", s.system_load_mw},
           {"pre_contingency_frequency", s.pre_contingency_frequency},
           {"nominal_frequency", s.nominal_frequency},
           {"load_relief_factor", s.load_relief_factor},
           {"units", units},
           {"sdr_blocks", blocks}};
    if (s.load_inertia_override) {
        j["load_inertia_override"] = *s.load_inertia_override;
    }
    return j;
}

} // namespace

SnapshotDocument parse_snapshot_document(std::string_view text, ParseMode mode)
{
    const Json root = detail::parse_json_text(text);
    detail::object_at(root, "");

    SnapshotDocument doc;
    const Json* version = detail::member(root, "schema_version");
    if (version == nullptr) {
        detail::field_error("/schema_version", "required field missing");
    }
    if (!version->is_number_integer()) {
        detail::field_error("/schema_version", "expected an integer");
    }
    doc.schema_version = version->get<int>();
    if (doc.schema_version != kSnapshotSchemaVersion) {
        detail::field_error("/schema_version", "unsupported version " + std::to_string(doc.schema_version));
    }
    collect_unknown(root, kSnapshotKeys, "", mode, doc.unknown_fields);

    SystemSnapshot& s = doc.snapshot;
    s.timestamp = detail::time_field(root, "timestamp", "");
    s.system_load_mw = detail::number(root, "system_load_mw", "");
    s.nominal_frequency = detail::number_or(root, "nominal_frequency", "", 50.0);
    s.pre_contingency_frequency = detail::number_or(root, "pre_contingency_frequency", "", s.nominal_frequency);
    s.load_relief_factor = detail::number_or(root, "load_relief_factor", "", 2.0);
    s.load_inertia_override = detail::optional_number(root, "load_inertia_override", "");

    const Json* units = detail::member(root, "units");
    if (units == nullptr || !units->is_array()) {
        detail::field_error("/units", "expected an array of units");
    }
    for (std::size_t i = 0; i < units->size(); ++i) {
        const std::string path = "/units/" + std::to_string(i);
        s.units.push_back(parse_unit((*units)[i], path));
        collect_unknown((*units)[i], kUnitKeys, path, mode, doc.unknown_fields);
    }
    if (const Json* blocks = detail::member(root, "sdr_blocks")) {
        if (!blocks->is_array()) {
            detail::field_error("/sdr_blocks", "expected an array");
        }
        for (std::size_t i = 0; i < blocks->size(); ++i) {
            const std::string path = "/sdr_blocks/" + std::to_string(i);
            s.sdr_blocks.push_back(parse_block((*blocks)[i], path));
            collect_unknown((*blocks)[i], kBlockKeys, path, mode, doc.unknown_fields);
        }
    }
    return doc;
}

SystemSnapshot parse_snapshot(std::string_view text, ParseMode mode)
{
    return validate_snapshot(parse_snapshot_document(text, mode).snapshot);
}

std::string serialize_snapshot(const SystemSnapshot& snapshot)
{
    return snapshot_to_json(snapshot).dump(2);
}

std::string serialize_snapshot_document(const SnapshotDocument& document)
{
    Json j = snapshot_to_json(document.snapshot);
    for (const auto& [pointer, raw] : document.unknown_fields) {
        j[Json::json_pointer(pointer)] = Json::parse(raw);
    }
    return j.dump(2);
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

SystemSnapshot load_snapshot_file(const std::filesystem::path& path, ParseMode mode)
{
    return parse_snapshot(read_text_file(path), mode);
}

UnitParameterStore UnitParameterStore::parse(std::string_view text)
{
    const Json root = detail::parse_json_text(text);
    detail::object_at(root, "");
    const Json* units = detail::member(root, "units");
    UnitParameterStore store;
    if (units == nullptr) {
        return store;
    }
    detail::object_at(*units, "/units");
    for (auto it = units->begin(); it != units->end(); ++it) {
        const std::string path = "/units/" + it.key();
        detail::object_at(it.value(), path);
        UnitParameters p;
        p.gain = detail::optional_number(it.value(), "gain", path);
        p.time_constant = detail::optional_number(it.value(), "time_constant", path);
        p.mdrr = detail::optional_number(it.value(), "mdrr", path);
        p.kinetic_energy = detail::optional_number(it.value(), "kinetic_energy", path);
        store.units_[it.key()] = p;
    }
    return store;
}

UnitParameterStore UnitParameterStore::load(const std::filesystem::path& path)
{
    return parse(read_text_file(path));
}

std::string UnitParameterStore::serialize() const
{
    Json units = Json::object();
    for (const auto& [id, p] : units_) {
        Json entry = Json::object();
        if (p.gain) entry["gain"] = *p.gain;
        if (p.time_constant) entry["time_constant"] = *p.time_constant;
        if (p.mdrr) entry["mdrr"] = *p.mdrr;
        if (p.kinetic_energy) entry["kinetic_energy"] = *p.kinetic_energy;
        units[id] = entry;
    }
    return Json{{"schema_version", 1}, {"units", units}}.dump(2);
}

void UnitParameterStore::save(const std::filesystem::path& path) const
{
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StorageError("cannot write " + tmp.string());
        }
        out << serialize() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

void UnitParameterStore::set(const std::string& unit_id, const UnitParameters& params)
{
    units_[unit_id] = params;
}

void UnitParameterStore::set_lag(const std::string& unit_id, double gain, double time_constant)
{
    auto& entry = units_[unit_id];
    entry.gain = gain;
    entry.time_constant = time_constant;
}

const UnitParameters* UnitParameterStore::find(const std::string& unit_id) const
{
    auto it = units_.find(unit_id);
    return it == units_.end() ? nullptr : &it->second;
}

SystemSnapshot UnitParameterStore::apply(SystemSnapshot snapshot) const
{
    for (auto& unit : snapshot.units) {
        if (const UnitParameters* p = find(unit.id)) {
            unit.gain = p->gain.value_or(unit.gain);
            unit.time_constant = p->time_constant.value_or(unit.time_constant);
            unit.mdrr = p->mdrr.value_or(unit.mdrr);
            unit.kinetic_energy = p->kinetic_energy.value_or(unit.kinetic_energy);
        }
    }
    return snapshot;
}

} // namespace rtfs
