#pragma once

#include <json.hpp>

#include "specmap/pipeline/workspace.hpp"

namespace specmap::pipeline {

/// Stats, picked point, reference spectrum and parameters of a single-reference
/// classification. The CLI writes this as stats.json; the service embeds it in
/// its response next to the encoded mask.
nlohmann::json describe(const SingleResult& result, const ClassifyParams& params);

/// Pretty-printed with a trailing newline; numbers use shortest round-trip form.
std::string to_text(const nlohmann::json& j);

} // namespace specmap::pipeline
