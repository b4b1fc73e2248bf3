#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "stubmine/report.hpp"

namespace stubmine {

// JSON array of row objects; an unbounded value serializes as the string
// "inf" to match the CSV convention.
inline nlohmann::ordered_json rows_to_json(const std::vector<ReportRow>& rows)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json obj;
        obj["alpha"] = row.alpha;
        obj["gamma"] = row.gamma;
        if (std::isinf(row.value)) {
            obj["value"] = "inf";
        } else {
            obj["value"] = row.value;
        }
        for (const auto& [name, v] : row.aux) obj[name] = v;
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline std::string to_json_string(const std::vector<ReportRow>& rows)
{
    return rows_to_json(rows).dump(2) + "\n";
}

inline std::vector<ReportRow> rows_from_json(const std::string& text)
{
    const auto arr = nlohmann::ordered_json::parse(text);
    std::vector<ReportRow> rows;
    for (const auto& obj : arr) {
        ReportRow row;
        row.alpha = obj.at("alpha").get<double>();
        row.gamma = obj.at("gamma").get<double>();
        const auto& v = obj.at("value");
        row.value = v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (it.key() == "alpha" || it.key() == "gamma" || it.key() == "value") continue;
            row.aux.emplace_back(it.key(), it.value().get<double>());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace stubmine
