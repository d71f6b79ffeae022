#include "dygrag/json_io.hpp"

#include "dygrag/error.hpp"

#include <cstdio>

namespace dygrag {

using nlohmann::json;

json anchor_to_json(const TimeAnchor& a) {
    json j = {{"kind", to_string(a.kind())}};
    if (a.start_day()) j["start_day"] = *a.start_day();
    if (a.end_day()) j["end_day"] = *a.end_day();
    if (a.granularity()) j["granularity"] = to_string(*a.granularity());
    j["surface"] = a.surface_text();
    return j;
}

TimeAnchor anchor_from_json(const json& j) {
    auto kind = anchor_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::Parse, "unknown anchor kind");
    auto surface = j.value("surface", std::string());
    if (*kind == AnchorKind::Static) return TimeAnchor::timeless(std::move(surface));
    auto g = granularity_from_string(j.at("granularity").get<std::string>());
    if (!g) throw Error(ErrorKind::Parse, "unknown granularity");
    auto start = j.at("start_day").get<DayNumber>();
    if (*kind == AnchorKind::Point) return TimeAnchor::point(start, *g, std::move(surface));
    return TimeAnchor::interval(start, j.at("end_day").get<DayNumber>(), *g, std::move(surface));
}

json deu_to_json(const DynamicEventUnit& d) {
    return {{"event_id", d.event_id},
            {"source_id", d.source_id},
            {"chunk_index", d.chunk_index},
            {"sentence", d.sentence},
            {"anchor", anchor_to_json(d.anchor)},
            {"entities", d.entities},
            {"entity_surfaces", d.entity_surfaces},
            {"info_score", d.info_score}};
}

DynamicEventUnit deu_from_json(const json& j) {
    DynamicEventUnit d;
    d.event_id = j.at("event_id").get<std::string>();
    d.source_id = j.at("source_id").get<std::string>();
    d.chunk_index = j.value("chunk_index", 0);
    d.sentence = j.at("sentence").get<std::string>();
    d.anchor = anchor_from_json(j.at("anchor"));
    for (const auto& e : j.at("entities")) d.entities.insert(e.get<std::string>());
    if (j.contains("entity_surfaces")) {
        d.entity_surfaces = j.at("entity_surfaces").get<std::vector<std::string>>();
    }
    d.info_score = j.at("info_score").get<int>();
    validate(d);
    return d;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace dygrag
