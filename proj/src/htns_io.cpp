#include "cpcoh/htns_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpcoh/errors.hpp"

namespace cpcoh::io {
namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    fail(std::string("unexpected end of input, expected ") + what);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("line " + std::to_string(line_no_) + ": " + msg);
  }

  double number(const std::string& tok) const {
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) fail("invalid number '" + tok + "'");
    if (!std::isfinite(v)) fail("non-finite number '" + tok + "'");
    return v;
  }

  Index count(const std::string& tok) const {
    unsigned long long v = 0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) fail("invalid count '" + tok + "'");
    return static_cast<Index>(v);
  }

  cplx entry() {
    const auto tok = next("an entry");
    if (tok.size() != 2) fail("expected 're im', got " + std::to_string(tok.size()) + " tokens");
    return {number(tok[0]), number(tok[1])};
  }

  std::vector<Index> header() {
    const auto first = next("the order d");
    if (first.size() != 1) fail("first line must hold only the order d");
    const Index d = count(first[0]);
    if (d < 1) fail("order d must be at least 1");
    const auto dims_tok = next("the dimensions");
    if (dims_tok.size() != d) fail("expected " + std::to_string(d) + " dimensions");
    std::vector<Index> dims;
    for (const auto& t : dims_tok) {
      dims.push_back(count(t));
      if (dims.back() < 1) fail("dimensions must be positive");
    }
    return dims;
  }

  void expect_end() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) fail("trailing data after the last entry");
    }
  }

 private:
  std::istream& in_;
  Index line_no_ = 0;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open '" + path + "'");
  return f;
}

void write_entry(std::ostream& out, const cplx& z) {
  out << format_double(z.real()) << ' ' << format_double(z.imag()) << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Hypermatrix read_htns(std::istream& in) {
  LineReader r(in);
  const auto dims = r.header();
  Index total = 1;
  for (Index n : dims) total *= n;
  std::vector<cplx> entries(total);
  for (Index i = 0; i < total; ++i) entries[i] = r.entry();
  r.expect_end();
  return Hypermatrix(dims, std::move(entries));
}

Hypermatrix read_htns_file(const std::string& path) {
  auto f = open_in(path);
  return read_htns(f);
}

void write_htns(std::ostream& out, const Hypermatrix& t) {
  out << t.order() << '\n';
  for (Index k = 0; k < t.order(); ++k) out << (k ? " " : "") << t.dim(k);
  out << '\n';
  for (const cplx& z : t.entries()) write_entry(out, z);
}

void write_htns_file(const std::string& path, const Hypermatrix& t) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write '" + path + "'");
  write_htns(f, t);
}

Mat read_matrix_file(const std::string& path) {
  const Hypermatrix t = read_htns_file(path);
  if (t.order() != 2) throw FormatError("'" + path + "' must hold a d = 2 tensor (an n x r factor matrix)");
  return t.unfold(0);
}

std::vector<std::vector<Vec>> read_dictionary(std::istream& in) {
  LineReader r(in);
  const auto dims = r.header();
  const auto m_tok = r.next("the atom count");
  if (m_tok.size() != 1) r.fail("atom count line must hold one integer");
  const Index m = r.count(m_tok[0]);
  if (m < 1) r.fail("dictionary needs at least one atom");
  std::vector<std::vector<Vec>> atoms(m);
  for (auto& atom : atoms)
    for (Index n : dims) {
      Vec v(static_cast<Eigen::Index>(n));
      for (Index i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = r.entry();
      atom.push_back(std::move(v));
    }
  r.expect_end();
  return atoms;
}

std::vector<std::vector<Vec>> read_dictionary_file(const std::string& path) {
  auto f = open_in(path);
  return read_dictionary(f);
}

void write_dictionary(std::ostream& out, const std::vector<std::vector<Vec>>& atoms) {
  require(!atoms.empty(), "cannot write an empty dictionary");
  out << atoms[0].size() << '\n';
  for (Index k = 0; k < atoms[0].size(); ++k) out << (k ? " " : "") << atoms[0][k].size();
  out << '\n' << atoms.size() << '\n';
  for (const auto& atom : atoms)
    for (const Vec& v : atom)
      for (Eigen::Index i = 0; i < v.size(); ++i) write_entry(out, v(i));
}

}  // namespace cpcoh::io
