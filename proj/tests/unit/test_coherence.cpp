#include <doctest.h>

#include <numbers>

#include "cpcoh/coherence.hpp"
#include "cpcoh/errors.hpp"
#include "support.hpp"

using namespace cpcoh;

namespace {

FactorSet columns(std::initializer_list<std::initializer_list<double>> cols) {
  const auto n = static_cast<Eigen::Index>(cols.begin()->size());
  Mat a(n, static_cast<Eigen::Index>(cols.size()));
  Eigen::Index j = 0;
  for (const auto& c : cols) {
    Eigen::Index i = 0;
    for (double x : c) a(i++, j) = x;
    ++j;
  }
  return FactorSet::normalized(a);
}

}  // namespace

TEST_CASE("orthonormal basis has zero coherence") {
  const auto rep = coherence(FactorSet(Mat::Identity(3, 3)));
  CHECK(rep.mu == 0.0);
  CHECK(rep.omega_infinite);
  CHECK(std::isinf(relative_incoherence(0.0)));
  CHECK_FALSE(krank_lower_bound(rep).has_value());
}

TEST_CASE("duplicated vector has coherence one") {
  const auto rep = coherence(columns({{1, 0}, {1, 0}}));
  CHECK(rep.mu == doctest::Approx(1.0));
  CHECK(rep.omega == doctest::Approx(0.0));
  CHECK(kruskal_rank_bruteforce(columns({{1, 0, 0}, {0, 1, 0}, {1, 0, 0}})) == 1);
}

TEST_CASE("coherence of two vectors at sixty degrees") {
  const double t = std::numbers::pi / 3.0;
  const auto rep = coherence(columns({{1, 0}, {std::cos(t), std::sin(t)}}));
  CHECK(std::abs(rep.mu - 0.5) < 1e-15);
  CHECK(rep.omega == doctest::Approx(1.0));
  CHECK(rep.argpair == std::pair<Index, Index>{0, 1});
}

TEST_CASE("single vector is handled by convention") {
  const auto rep = coherence(columns({{1, 0}}));
  CHECK(rep.single_vector);
  CHECK(rep.mu == 0.0);
  CHECK(rep.omega_infinite);
}

TEST_CASE("pairwise scan and Gram matrix agree") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const FactorSet fs = FactorSet::normalized(test::random_matrix(4, 6, rng));
    const auto rep = coherence(fs);
    CHECK(std::abs(rep.mu - coherence_gram(fs)) < 1e-14);
    // Oracle: explicit double loop over |<a_i, a_j>|.
    double want = 0.0;
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j)
        if (i != j) want = std::max(want, std::abs(fs.vectors().col(i).dot(fs.vectors().col(j))));
    CHECK(std::abs(rep.mu - want) < 1e-14);
    CHECK(std::abs(rep.omega - (1.0 - rep.mu) / rep.mu) < 1e-12);
  }
}

TEST_CASE("coherence is invariant under a common unitary and per-vector phases") {
  Rng rng(22);
  const Mat a = FactorSet::normalized(test::random_matrix(4, 5, rng)).vectors();
  Mat b = random_unitary(4, rng) * a;
  for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j) *= std::polar(1.0, 0.3 * static_cast<double>(j));
  CHECK(std::abs(coherence(FactorSet(a)).mu - coherence(FactorSet::normalized(b)).mu) < 1e-12);
}

TEST_CASE("Kruskal rank of small sets") {
  CHECK(kruskal_rank_bruteforce(FactorSet(Mat::Identity(3, 3))) == 3);
  CHECK(spark_bruteforce(FactorSet(Mat::Identity(3, 3))) == 4);
  const FactorSet dep = columns({{1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  CHECK(kruskal_rank_bruteforce(dep) == 2);
  CHECK(spark_bruteforce(dep) == 3);
  // More vectors than the dimension: the full set is always dependent.
  Rng rng(23);
  const FactorSet wide = FactorSet::normalized(test::random_matrix(3, 5, rng));
  CHECK(kruskal_rank_bruteforce(wide) == 3);
  CHECK(spark_bruteforce(wide) == 4);
}

TEST_CASE("brute force refuses sets beyond the budget") {
  Rng rng(24);
  const FactorSet fs = FactorSet::normalized(test::random_matrix(3, 16, rng));
  CHECK_THROWS_AS(kruskal_rank_bruteforce(fs), BudgetExceeded);
  CHECK_THROWS_AS(spark_bruteforce(fs, 1e-8, 10), BudgetExceeded);
  CHECK(kruskal_rank_bruteforce(fs, 1e-8, 16) == 3);
}

TEST_CASE("coherence lower bound on the Kruskal rank") {
  CoherenceReport r;
  r.mu = 0.5;
  CHECK(krank_lower_bound(r) == 2);
  r.mu = 0.3;
  CHECK(krank_lower_bound(r) == 4);
  r.mu = 1.0 / 3.0;
  CHECK(krank_lower_bound(r) == 3);
}

TEST_CASE("Kruskal rank is at least ceil(1/mu) when it is below the span dimension") {
  Rng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const Index r = 4 + static_cast<Index>(trial % 5);
    const Index s = 1 + static_cast<Index>(trial) % std::min<Index>(r - 2, 4);
    const FactorSet fs(test::planted_dependent_set(6, r, s, rng));
    const Index k = kruskal_rank_bruteforce(fs);
    REQUIRE(k <= s);
    CHECK(k >= *krank_lower_bound(coherence(fs)));
    CHECK(spark_bruteforce(fs) == k + 1);
  }
}

TEST_CASE("generic sets sit at the span dimension, where the bound need not hold") {
  Rng rng(26);
  const FactorSet fs = FactorSet::normalized(test::random_matrix(8, 2, rng));
  CHECK(kruskal_rank_bruteforce(fs) == 2);
  CHECK(*krank_lower_bound(coherence(fs)) > 2);
}
