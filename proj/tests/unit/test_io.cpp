#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpcoh/errors.hpp"
#include "cpcoh/htns_io.hpp"
#include "cpcoh/report.hpp"
#include "support.hpp"

using namespace cpcoh;

namespace {

Hypermatrix parse(const std::string& text) {
  std::istringstream in(text);
  return io::read_htns(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("HTNS1 round trip is bit exact") {
  Rng rng(81);
  Hypermatrix t = test::random_tensor({2, 3, 2}, rng);
  t[0] = cplx(1e-300, -0.1);
  t[1] = cplx(1.0 / 3.0, 12345678901234567.0);
  std::ostringstream out;
  io::write_htns(out, t);
  const Hypermatrix back = parse(out.str());
  CHECK(back.dims() == t.dims());
  for (Index i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
}

TEST_CASE("HTNS1 layout") {
  const Hypermatrix t = parse("2\n2 1\n1 0\n\n0 -2.5\n");
  CHECK(t.dims() == std::vector<Index>{2, 1});
  CHECK(t[1] == cplx(0.0, -2.5));
  std::ostringstream out;
  io::write_htns(out, t);
  CHECK(out.str() == "2\n2 1\n1 0\n0 -2.5\n");
}

TEST_CASE("malformed HTNS1 input is rejected with a line number") {
  CHECK(error_of("") .find("end of input") != std::string::npos);
  CHECK(error_of("2\n2\n").find("line 2") != std::string::npos);
  CHECK(error_of("1\n2\n1 0\n").find("end of input") != std::string::npos);
  CHECK(error_of("1\n1\n1 0 0\n").find("line 3") != std::string::npos);
  CHECK(error_of("1\n1\n1 x\n").find("invalid number") != std::string::npos);
  CHECK(error_of("1\n1\nnan 0\n").find("non-finite") != std::string::npos);
  CHECK(error_of("1\n1\n1 0\n2 0\n").find("trailing") != std::string::npos);
  CHECK(error_of("1\n0\n").find("positive") != std::string::npos);
  CHECK(error_of("-1\n1\n").find("invalid count") != std::string::npos);
}

TEST_CASE("dictionary round trip") {
  Rng rng(82);
  std::vector<std::vector<Vec>> atoms;
  for (int i = 0; i < 3; ++i) atoms.push_back({random_unit_vector(2, rng), random_unit_vector(3, rng)});
  std::ostringstream out;
  io::write_dictionary(out, atoms);
  std::istringstream in(out.str());
  const auto back = io::read_dictionary(in);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 2; ++k) CHECK(back[static_cast<Index>(i)][static_cast<Index>(k)] == atoms[static_cast<Index>(i)][static_cast<Index>(k)]);
}

TEST_CASE("matrix files must be two-way") {
  const auto dir = std::filesystem::temp_directory_path() / "cpcoh_io_test";
  std::filesystem::create_directories(dir);
  const std::string good = (dir / "m.htns").string(), bad = (dir / "t.htns").string();
  Hypermatrix m({2, 3});
  m[5] = 4.0;
  io::write_htns_file(good, m);
  io::write_htns_file(bad, Hypermatrix({1, 1, 1}));
  const Mat a = io::read_matrix_file(good);
  CHECK(a.rows() == 2);
  CHECK(a(1, 2) == cplx(4.0));
  CHECK_THROWS_AS(io::read_matrix_file(bad), FormatError);
  CHECK_THROWS_AS(io::read_htns_file((dir / "missing").string()), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("report writer uses 17 significant digits and null for non-finite values") {
  report::json j = {{"a", 0.1}, {"b", std::numeric_limits<double>::infinity()}, {"c", {1, 2}}};
  const std::string s = report::dump(j);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("\"b\": null") != std::string::npos);
  CHECK(s.find("[1, 2]") != std::string::npos);
  CHECK(report::json::parse(s)["a"].get<double>() == 0.1);
}

TEST_CASE("atomic write replaces the target") {
  const auto path = (std::filesystem::temp_directory_path() / "cpcoh_atomic.json").string();
  report::write_atomic(path, "one");
  report::write_atomic(path, "two");
  std::ifstream f(path);
  std::string s;
  f >> s;
  CHECK(s == "two");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}
