#include "snewton/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snewton {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_to_csv(const SolveTrace& trace) {
  std::ostringstream os;
  os << "iter,f,F,gap,step_norm,sigma,rho,accepted\n";
  for (const auto& r : trace.records()) {
    os << r.iter << ',' << format_double(r.f_value) << ',' << format_double(r.composite_value) << ','
       << (r.gap ? format_double(*r.gap) : "") << ',' << format_double(r.step_norm) << ','
       << format_double(r.sigma) << ',' << (r.rho ? format_double(*r.rho) : "") << ','
       << (r.accepted ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  return num(*v);
}

}  // namespace

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

nlohmann::json trace_to_json(const SolveTrace& trace) {
  nlohmann::json j;
  j["solver"] = trace.solver();
  j["status"] = to_string(trace.status());
  j["warnings"] = trace.warnings();
  j["eta"] = opt(trace.eta());
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : trace.records()) {
    nlohmann::json o;
    o["iter"] = r.iter;
    o["f"] = num(r.f_value);
    o["F"] = num(r.composite_value);
    o["gap"] = opt(r.gap);
    o["step_norm"] = num(r.step_norm);
    o["sigma"] = num(r.sigma);
    o["rho"] = opt(r.rho);
    o["accepted"] = r.accepted;
    o["theta_achieved"] = opt(r.theta_achieved);
    o["newton_decrement"] = num(r.newton_decrement);
    o["wall_time"] = r.wall_time;
    o["x"] = vector_to_json(r.x);
    recs.push_back(std::move(o));
  }
  j["records"] = std::move(recs);
  return j;
}

nlohmann::json report_to_json(const StabilityReport& rep) {
  nlohmann::json j;
  j["constant_kind"] = to_string(rep.kind);
  j["parameter"] = std::isnan(rep.parameter) ? nlohmann::json(nullptr) : num(rep.parameter);
  j["estimate"] = num(rep.estimate);
  if (rep.witness) {
    j["witness_pair"] = {{"u", vector_to_json(rep.witness->u)}, {"v", vector_to_json(rep.witness->v)}};
  } else {
    j["witness_pair"] = nullptr;
  }
  j["samples_used"] = rep.samples_used;
  j["degenerate_pairs"] = rep.degenerate_pairs;
  j["analytic_bound"] = opt(rep.analytic_bound);
  return j;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace snewton
