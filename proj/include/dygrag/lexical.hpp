#pragma once

#include <string_view>

namespace dygrag {

/// Fraction of the question's distinct content words that also appear in `passage`.
double lexical_overlap(std::string_view question, std::string_view passage);

}  // namespace dygrag
