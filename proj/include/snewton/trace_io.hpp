#pragma once

// Serialization of traces and stability reports, and atomic file output.

#include "snewton/core.hpp"
#include "snewton/stability.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace snewton {

/// "%.17g"; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// Columns iter,f,F,gap,step_norm,sigma,rho,accepted. Inapplicable gap/rho
/// are empty; accepted is 1 or 0.
std::string trace_to_csv(const SolveTrace& trace);
nlohmann::json trace_to_json(const SolveTrace& trace);
nlohmann::json vector_to_json(const Vector& v);
nlohmann::json report_to_json(const StabilityReport& rep);

/// Writes to a temporary sibling then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace snewton
