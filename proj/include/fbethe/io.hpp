#pragma once

#include "fbethe/diagnostics.hpp"
#include "fbethe/message_passing.hpp"
#include "fbethe/minimizer.hpp"
#include "fbethe/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace fbethe {

/// Parse or schema error in a model file; the message names the line (for
/// syntax errors) or the JSON path (for schema errors).
class ModelParseError : public InvalidModelError {
 public:
  using InvalidModelError::InvalidModelError;
};

/// Model file: {"n": int, "h": [..], "J": dense [[..]] or sparse
/// {"i": [..], "j": [..], "v": [..]} listing the upper triangle (i <= j)}.
GaussianModel parse_model_json(std::string_view text);
GaussianModel load_model(const std::filesystem::path& path);

/// Writes the sparse form with entries sorted by (i, j), i <= j.
std::string model_to_json(const GaussianModel& model, bool sparse = true);
void save_model(const GaussianModel& model, const std::filesystem::path& path, bool sparse = true);

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const DiagnosticsReport& report);
nlohmann::json to_json(const Moments& moments);
nlohmann::json to_json(const MinimizeResult& result);
nlohmann::json to_json(const MPResult& result);

/// Shortest decimal that round-trips a double ("%.17g").
std::string format_double(double x);

}  // namespace fbethe
