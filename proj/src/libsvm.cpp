#include "snewton/errors.hpp"
#include "snewton/objectives.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace snewton {

namespace {

double parse_double(const std::string& tok, std::size_t line, const char* what) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + tok + "'", line);
  }
  if (used != tok.size() || !std::isfinite(v)) {
    throw ParseError(std::string("bad ") + what + " '" + tok + "'", line);
  }
  return v;
}

}  // namespace

LibsvmData read_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::map<long, double>> rows;
  std::vector<double> labels;
  long max_index = 0;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tok;
    if (!(ls >> tok)) continue;
    const double label = parse_double(tok, lineno, "label");
    std::map<long, double> row;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0) {
        throw ParseError("expected index:value, got '" + tok + "'", lineno);
      }
      long idx = 0;
      const char* first = tok.data();
      const char* last = tok.data() + colon;
      auto [ptr, ec] = std::from_chars(first, last, idx);
      if (ec != std::errc() || ptr != last || idx < 1) {
        throw ParseError("bad feature index in '" + tok + "'", lineno);
      }
      const double v = parse_double(tok.substr(colon + 1), lineno, "feature value");
      if (!row.emplace(idx, v).second) {
        throw ParseError("duplicate feature index " + std::to_string(idx), lineno);
      }
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
    labels.push_back(label > 0.0 ? 1.0 : -1.0);
  }
  if (rows.empty()) throw EmptyDataError("no data lines in " + path.string());
  if (max_index == 0) throw EmptyDataError("no features in " + path.string());

  LibsvmData out;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool nonzero = false;
    for (const auto& [idx, v] : rows[i]) nonzero = nonzero || v != 0.0;
    if (nonzero) {
      keep.push_back(i);
    } else {
      ++out.dropped_zero_rows;
    }
  }
  if (out.dropped_zero_rows > 0) {
    std::clog << "warning: " << path.string() << ": dropped " << out.dropped_zero_rows
              << " all-zero row(s)\n";
  }
  if (keep.empty()) throw EmptyDataError("all rows are zero in " + path.string());
  out.rows = Matrix::Zero(static_cast<Index>(keep.size()), max_index);
  out.labels.resize(static_cast<Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    for (const auto& [idx, v] : rows[keep[r]]) out.rows(static_cast<Index>(r), idx - 1) = v;
    out.labels[static_cast<Index>(r)] = labels[keep[r]];
  }
  return out;
}

std::shared_ptr<GlmObjective> load_libsvm(const std::filesystem::path& path, bool normalize,
                                          ScalarLink link, LibsvmOptions opts,
                                          std::optional<ProxTerm> regularizer) {
  LibsvmData data = read_libsvm(path);
  GlmOptions g;
  g.normalize = normalize;
  g.dual = opts.dual;
  g.labels = data.labels;
  g.regularizer = std::move(regularizer);
  g.info.name = path.stem().string() + "-" + link.name();
  return std::make_shared<GlmObjective>(std::move(data.rows), link, g);
}

}  // namespace snewton
