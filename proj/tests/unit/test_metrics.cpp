#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "rosecdl/errors.hpp"
#include "rosecdl/metrics.hpp"

using namespace rosecdl;
using namespace rosecdl::test;

namespace {

OutlierMask mask_of(std::vector<bool> flags) {
  OutlierMask m;
  m.patch_width = 1;
  m.flags = std::move(flags);
  return m;
}

std::vector<double> nested_loop_correlation(const std::vector<double>& d, const std::vector<double>& dh) {
  const long L = d.size(), Lh = dh.size(), T = std::max(L, Lh);
  std::vector<double> out(L + Lh - 1, 0.0);
  for (long t = 1; t <= L + Lh - 1; ++t)
    for (long l = 1; l <= L; ++l) {
      const long j = l - t + T;
      if (j >= 1 && j <= Lh) out[t - 1] += d[l - 1] * dh[j - 1];
    }
  return out;
}

}  // namespace

TEST_CASE("full correlation") {
  CHECK(full_correlation_1d(std::vector<double>{1.0}, std::vector<double>{1.0}) == std::vector<double>{1.0});
  const auto delta = full_correlation_1d(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0});
  CHECK(std::count(delta.begin(), delta.end(), 1.0) == 1);
  for (std::uint64_t id = 0; id < 20; ++id) {
    Rng rng = rng_for(id);
    for (auto [L, Lh] : {std::pair{5, 7}, std::pair{7, 5}, std::pair{4, 4}}) {
      const auto a = random_signal(1, L, rng), b = random_signal(1, Lh, rng);
      const std::vector<double> av(a.values().begin(), a.values().end()), bv(b.values().begin(), b.values().end());
      CHECK(full_correlation_1d(av, bv) == nested_loop_correlation(av, bv));
    }
  }
}

TEST_CASE("assignment against brute force") {
  for (std::uint64_t id = 0; id < 30; ++id) {
    Rng rng = rng_for(100 + id);
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    const std::size_t rows = dim(rng), cols = rows + dim(rng) - 1;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(rows * cols);
    for (double& v : w) v = u(rng);
    const auto pick = max_weight_assignment(w, rows, cols);
    REQUIRE(pick.size() == rows);
    double got = 0.0;
    for (std::size_t i = 0; i < rows; ++i) got += w[i * cols + pick[i]];
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1e300;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) s += w[i * cols + perm[i]];
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
    auto sorted = pick;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  }
}

TEST_CASE("recovery score invariances") {
  Rng rng = rng_for(1);
  const Dictionary d = random_dictionary(3, 2, 8, rng);

  Dictionary permuted(3, 2, 8);
  const std::size_t order[] = {2, 0, 1};
  for (std::size_t k = 0; k < 3; ++k) std::copy_n(d.atom(order[k]).begin(), 16, permuted.atom(k).begin());
  const RecoveryScore s = recovery_score(d, permuted);
  CHECK(s.score == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& [i, j] : s.assignment) CHECK(order[j] == i);

  Dictionary shifted(3, 2, 16);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t p = 0; p < 2; ++p)
      for (std::size_t l = 0; l < 8; ++l) shifted(k, p, (l + 3 + k) % 16) = d(k, p, l);
  CHECK(recovery_score(d, shifted).score == doctest::Approx(1.0).epsilon(1e-12));

  Dictionary scaled = d;
  for (double& v : scaled.values()) v *= 3.0;
  CHECK(recovery_score(d, scaled).score == doctest::Approx(1.0).epsilon(1e-12));

  Dictionary negated = d;
  for (double& v : negated.values()) v = -v;
  CHECK(recovery_score(d, negated).score < 1.0);

  const Dictionary other = random_dictionary(4, 2, 10, rng);
  const RecoveryScore one = recovery_score(d, other, 1), three = recovery_score(d, other, 3);
  CHECK(one.score == three.score);
  CHECK(one.correlation == three.correlation);
  CHECK_THROWS_AS(recovery_score(d, Dictionary(3, 1, 8)), DimensionError);
  CHECK_THROWS_AS(recovery_score(d, random_dictionary(2, 2, 8, rng)), DimensionError);
}

TEST_CASE("mask F1") {
  CHECK(mask_f1(mask_of({true, false, true}), mask_of({true, false, true})) == 1.0);
  CHECK(mask_f1(mask_of({true, false, false}), mask_of({false, true, false})) == 0.0);
  CHECK(mask_f1(mask_of({false, true, true, false}), mask_of({false, false, true, true})) == 0.5);
  CHECK(mask_f1(mask_of({false, false}), mask_of({false, false})) == 1.0);
  CHECK_THROWS_AS(mask_f1(mask_of({false}), mask_of({false, false})), DimensionError);
}

TEST_CASE("ROC AUC") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  CHECK(roc_auc(s, std::vector<bool>{false, false, true, true}) == 0.75);
  CHECK(roc_auc(s, std::vector<bool>{true, false, false, true}) == 0.5);
  CHECK(roc_auc(std::vector<double>{1, 2, 3, 4}, std::vector<bool>{false, false, true, true}) == 1.0);
  CHECK(roc_auc(std::vector<double>(6, 0.3), std::vector<bool>{true, false, true, false, false, true}) == 0.5);

  // Pairwise-count oracle on random data with ties.
  for (std::uint64_t id = 0; id < 20; ++id) {
    Rng rng = rng_for(200 + id);
    std::uniform_int_distribution<int> v(0, 5);
    std::bernoulli_distribution lab(0.3);
    std::vector<double> sc(50);
    std::vector<bool> lb(50);
    for (std::size_t i = 0; i < 50; ++i) {
      sc[i] = v(rng);
      lb[i] = lab(rng);
    }
    lb[0] = true;
    lb[1] = false;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
      for (std::size_t j = 0; j < 50; ++j)
        if (lb[i] && !lb[j]) {
          num += sc[i] > sc[j] ? 1.0 : sc[i] == sc[j] ? 0.5 : 0.0;
          den += 1.0;
        }
    CHECK(roc_auc(sc, lb) == doctest::Approx(num / den).epsilon(1e-14));
  }
  CHECK_THROWS_AS(roc_auc(std::vector<double>{1, 2}, std::vector<bool>{true, true}), UndefinedMetricError);
}
