#pragma once

#include "dygrag/core.hpp"

#include <nlohmann/json.hpp>

namespace dygrag {

nlohmann::json anchor_to_json(const TimeAnchor& anchor);
TimeAnchor anchor_from_json(const nlohmann::json& j);

nlohmann::json deu_to_json(const DynamicEventUnit& deu);
DynamicEventUnit deu_from_json(const nlohmann::json& j);

/// "%.17g": enough digits to read back the identical double.
std::string format_double(double v);

}  // namespace dygrag
