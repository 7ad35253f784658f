#include "cpcoh/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cpcoh/errors.hpp"
#include "cpcoh/htns_io.hpp"

namespace cpcoh::report {
namespace {

void emit(const json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
        emit(it.value(), indent, depth + 1, out);
      }
      out += nl + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short numeric arrays stay on one line.
      bool flat = j.size() <= 4;
      for (const auto& e : j) flat = flat && e.is_primitive();
      out += "[";
      if (!flat) out += nl;
      bool first = true;
      for (const auto& e : j) {
        if (!first) {
          out += ",";
          out += flat ? " " : nl;
        }
        first = false;
        if (!flat) out += pad;
        emit(e, indent, depth + 1, out);
      }
      if (!flat) out += nl + close_pad;
      out += "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? io::format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  out += "\n";
  return out;
}

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write '" + tmp + "'");
    f << contents;
    if (!f.flush()) throw FormatError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw FormatError("cannot move '" + tmp + "' to '" + path + "'");
  }
}

json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

json verdict_to_json(const conditions::Verdict& v) {
  json j = {{"holds", v.holds}, {"lhs", v.lhs}, {"relation", v.relation}, {"rhs", v.rhs}};
  if (v.flagged) j["flagged"] = true;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

json model_to_json(const CPModel& m) {
  json weights = json::array();
  for (const cplx& w : m.weights) weights.push_back(std::abs(w.imag()) == 0.0 ? json(w.real()) : complex_to_json(w));
  json factors = json::array();
  for (const Mat& a : m.factors) {
    json mode = json::array();
    for (Eigen::Index p = 0; p < a.cols(); ++p) {
      json col = json::array();
      for (Eigen::Index i = 0; i < a.rows(); ++i) col.push_back(complex_to_json(a(i, p)));
      mode.push_back(std::move(col));
    }
    factors.push_back(std::move(mode));
  }
  json dims = json::array();
  for (Index n : m.dims()) dims.push_back(n);
  return {{"rank", m.rank()}, {"dims", dims}, {"weights", weights}, {"factors", factors}};
}

}  // namespace cpcoh::report
