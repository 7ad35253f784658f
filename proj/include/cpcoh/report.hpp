#pragma once

#include <string>

#include <json.hpp>

#include "cpcoh/conditions.hpp"
#include "cpcoh/cp_model.hpp"

namespace cpcoh::report {

using nlohmann::json;

inline constexpr int kReportVersion = 1;

/// Serialises with 17 significant digits for floating-point values.
/// Non-finite numbers become null.
std::string dump(const json& j, int indent = 2);

/// Writes to a temporary sibling file, then renames it over `path`.
void write_atomic(const std::string& path, const std::string& contents);

json complex_to_json(const cplx& z);
json verdict_to_json(const conditions::Verdict& v);
/// Weights plus per-mode factors as [[re, im], ...] column lists.
json model_to_json(const CPModel& m);

}  // namespace cpcoh::report
