#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "matwheel/errors.hpp"
#include "matwheel/structure.hpp"

namespace matwheel {

namespace detail {

inline double require_finite_number(const nlohmann::json& j, const char* key) {
    if (!j.is_number()) throw MalformedRecord(std::string("\"") + key + "\" must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw MalformedRecord(std::string("\"") + key + "\" is not finite");
    return v;
}

inline const nlohmann::json& require_key(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw MalformedRecord(std::string("missing \"") + key + "\" key");
    return *it;
}

} // namespace detail

/// Parses one JSON-lines record. Required keys: id, lattice (3x3), species,
/// frac_coords, property. Optional: label_kind (default "real").
/// Fractional coordinates are wrapped into [0,1). Throws MalformedRecord.
inline PropertyRecord parse_structure_record(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedRecord("record line is not a JSON object");

    PropertyRecord rec;
    const auto& id = detail::require_key(j, "id");
    if (!id.is_string()) throw MalformedRecord("\"id\" must be a string");
    rec.structure.id = id.get<std::string>();

    const auto& lattice = detail::require_key(j, "lattice");
    if (!lattice.is_array() || lattice.size() != 3) throw MalformedRecord("\"lattice\" must be 3 rows");
    for (int r = 0; r < 3; ++r) {
        const auto& row = lattice[r];
        if (!row.is_array() || row.size() != 3) throw MalformedRecord("\"lattice\" rows must have 3 entries");
        for (int c = 0; c < 3; ++c) rec.structure.lattice[r][c] = detail::require_finite_number(row[c], "lattice");
    }

    const auto& species = detail::require_key(j, "species");
    if (!species.is_array() || species.empty()) throw MalformedRecord("\"species\" must be a non-empty array");
    for (const auto& z : species) {
        if (!z.is_number_integer()) throw MalformedRecord("\"species\" entries must be integers");
        const auto zi = z.get<long long>();
        if (zi < 1 || zi > 118) throw MalformedRecord("atomic number out of 1..118: " + std::to_string(zi));
        rec.structure.species.push_back(static_cast<int>(zi));
    }

    const auto& coords = detail::require_key(j, "frac_coords");
    if (!coords.is_array()) throw MalformedRecord("\"frac_coords\" must be an array");
    if (coords.size() != species.size())
        throw MalformedRecord("species and frac_coords have different lengths");
    for (const auto& triple : coords) {
        if (!triple.is_array() || triple.size() != 3)
            throw MalformedRecord("\"frac_coords\" entries must be [x,y,z]");
        Vec3 v{};
        for (int k = 0; k < 3; ++k) v[k] = detail::require_finite_number(triple[k], "frac_coords");
        rec.structure.frac_coords.push_back(v);
    }

    rec.property = detail::require_finite_number(detail::require_key(j, "property"), "property");

    if (auto it = j.find("label_kind"); it != j.end()) {
        if (!it->is_string()) throw MalformedRecord("\"label_kind\" must be a string");
        rec.label_kind = label_kind_from_string(it->get<std::string>());
    } else {
        rec.label_kind = LabelKind::Real;
    }

    rec.structure = wrap_coords(std::move(rec.structure));
    return rec;
}

/// Canonical one-line JSON form. Doubles use shortest round-trip formatting,
/// so serialize -> parse is lossless and re-serialization is byte-stable.
inline std::string serialize_record(const PropertyRecord& rec) {
    nlohmann::json j;
    j["id"] = rec.structure.id;
    nlohmann::json lattice = nlohmann::json::array();
    for (const auto& row : rec.structure.lattice) lattice.push_back({row[0], row[1], row[2]});
    j["lattice"] = std::move(lattice);
    j["species"] = rec.structure.species;
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& v : rec.structure.frac_coords) coords.push_back({v[0], v[1], v[2]});
    j["frac_coords"] = std::move(coords);
    j["property"] = rec.property;
    j["label_kind"] = to_string(rec.label_kind);
    return j.dump();
}

/// Reads a whole JSON-lines dataset file. Blank lines are skipped.
/// Throws IoError if the file cannot be opened, MalformedRecord on bad lines.
inline std::vector<PropertyRecord> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);
    std::vector<PropertyRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            records.push_back(parse_structure_record(line));
        } catch (const MalformedRecord& e) {
            throw MalformedRecord(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

/// Writes records in the canonical JSON-lines format (LF endings).
inline void write_dataset(const std::string& path, const std::vector<PropertyRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    for (const auto& rec : records) out << serialize_record(rec) << '\n';
    if (!out) throw IoError("failed writing dataset file: " + path);
}

} // namespace matwheel
