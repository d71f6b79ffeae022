#pragma once

#include <string_view>

namespace dygrag::assets {

/// Prompt text shipped under assets/prompts, compiled into the library.
/// Known names: time_cot, extract_events, resolve_coreference, parse_query.
std::string_view get(std::string_view name);

}  // namespace dygrag::assets
