#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "raretype/error.hpp"
#include "raretype/pitman.hpp"
#include "raretype/random.hpp"

using namespace raretype;
using doctest::Approx;

namespace {

double total_probability(std::size_t n, const PdParams& params) {
  double total = 0.0;
  PartitionEnumerator e(n);
  while (auto p = e.next()) total += std::exp(eppf_log(to_integer_partition(*p), params));
  return total;
}

}  // namespace

TEST_SUITE("pitman") {

TEST_CASE("parameter domain") {
  CHECK_NOTHROW(PdParams(0.5, -0.49));
  CHECK_THROWS_AS(PdParams(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(PdParams(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(PdParams(0.5, -0.5), DomainError);
  CHECK_THROWS_AS(PdParams(std::nan(""), 1.0), DomainError);
}

TEST_CASE("PopulationVector invariants") {
  CHECK_NOTHROW(PopulationVector({0.5, 0.3, 0.2}, 10));
  CHECK_THROWS_AS(PopulationVector({0.3, 0.5, 0.2}, 10), DomainError);
  CHECK_THROWS_AS(PopulationVector({0.5, 0.3}, 10), DomainError);
  CHECK_THROWS_AS(PopulationVector({1.0, 0.0}, 10), DomainError);
  CHECK_THROWS_AS(PopulationVector({}, 10), DomainError);
  CHECK_THROWS_AS(PopulationVector({1.0}, 0), DomainError);
  CHECK(PopulationVector({0.5, 0.25, 0.25}, 10).carriers(1) == 3);  // round(2.5)
}

TEST_CASE("log_rising_factorial") {
  CHECK(log_rising_factorial(-3.0, 0, 7.0) == 0.0);
  CHECK(log_rising_factorial(2.0, 3, 1.0) == Approx(std::log(24.0)).epsilon(1e-14));
  CHECK(log_rising_factorial(1.0, 2, 0.5) == Approx(std::log(1.5)).epsilon(1e-14));
  CHECK_THROWS_AS(log_rising_factorial(-0.5, 2, 1.0), DomainError);
  CHECK_THROWS_AS(log_rising_factorial(1.0, 3, -0.5), DomainError);  // 1, 0.5, 0
}

TEST_CASE("eppf_log small cases") {
  const PdParams params(0.3, 2.0);
  CHECK(eppf_log(IntegerPartition({1}, {1}), params) == 0.0);
  // Two singletons: the second customer opens a table.
  CHECK(eppf_log(IntegerPartition({1}, {2}), params) ==
        Approx(std::log((2.0 + 0.3) / (1.0 + 2.0))).epsilon(1e-14));
  CHECK(eppf_log(IntegerPartition({2}, {1}), params) ==
        Approx(std::log((1.0 - 0.3) / (1.0 + 2.0))).epsilon(1e-14));
}

TEST_CASE("eppf sums to one over all partitions of 4") {
  for (double alpha : {0.2, 0.5, 0.8})
    for (double theta : {-0.1, 1.0, 50.0})
      CHECK(std::abs(total_probability(4, PdParams(alpha, theta)) - 1.0) < 1e-12);
}

TEST_CASE("eppf matches the sequential seating product for every set partition") {
  // Also covers exchangeability: set partitions sharing (a, r) get the same
  // probability from the oracle regardless of block membership.
  for (std::size_t n = 1; n <= 6; ++n)
    for (double alpha : {0.15, 0.6})
      for (double theta : {-0.1, 3.0}) {
        PartitionEnumerator e(n);
        while (auto p = e.next()) {
          const double via_oracle = oracle::crp_path_probability(*p, alpha, theta);
          const double via_eppf = std::exp(eppf_log(to_integer_partition(*p), PdParams(alpha, theta)));
          CHECK(via_eppf == Approx(via_oracle).epsilon(1e-12));
        }
      }
}

TEST_CASE("sequential consistency with crp_predictive") {
  const std::vector<PdParams> grid{{0.25, 0.5}, {0.7, 10.0}, {0.5, -0.3}};
  for (const auto& params : grid) {
    for (std::size_t n = 1; n <= 7; ++n) {
      PartitionEnumerator e(n);
      while (auto p = e.next()) {
        const auto base = to_integer_partition(*p);
        const auto sizes64 = [&] {
          std::vector<std::uint64_t> s;
          for (auto x : p->block_sizes()) s.push_back(x);
          return s;
        }();
        const auto pred = crp_predictive(sizes64, params);
        for (std::size_t b = 0; b <= sizes64.size(); ++b) {
          auto grown = sizes64;
          if (b == sizes64.size())
            grown.push_back(1);
          else
            ++grown[b];
          const double lhs = eppf_log(IntegerPartition::from_block_sizes(grown), params);
          const double rhs = eppf_log(base, params) + std::log(pred[b]);
          CHECK(lhs == Approx(rhs).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("Db++ over Db+ is (1 - alpha) / (n + 1 + theta)") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> sizes(1 + gen() % 15);
    for (auto& s : sizes) s = 1 + gen() % 5;
    const auto db = IntegerPartition::from_block_sizes(sizes);
    const PdParams params(0.05 + 0.9 * (gen() % 1000) / 1000.0, 100.0 * (gen() % 1000) / 1000.0);
    const double diff = eppf_log(augment(db, AugmentMode::kSuspectAndTrace), params) -
                        eppf_log(augment(db, AugmentMode::kSuspectOnly), params);
    const double n = static_cast<double>(db.n());
    CHECK(diff == Approx(std::log((1.0 - params.alpha()) / (n + 1.0 + params.theta()))).epsilon(1e-12));
  }
}

TEST_CASE("crp_predictive") {
  const PdParams params(0.4, 1.5);
  const auto first = crp_predictive(std::vector<std::uint64_t>{}, params);
  CHECK(first == std::vector<double>{1.0});

  const auto second = crp_predictive(std::vector<std::uint64_t>{1}, params);
  CHECK(second[0] == Approx((1.0 - 0.4) / (1.0 + 1.5)));
  CHECK(second[1] == Approx((1.5 + 0.4) / (1.0 + 1.5)));

  const auto later = crp_predictive(std::vector<std::uint64_t>{5, 1, 2, 7}, params);
  CHECK(std::abs(std::accumulate(later.begin(), later.end(), 0.0) - 1.0) < 1e-12);
}

TEST_CASE("crp_sample structure and determinism") {
  const PdParams params(0.5, 1.0);
  const auto one = crp_sample(1, params, 99);
  CHECK(one.num_tables() == 1);
  CHECK(one.assignments == std::vector<std::size_t>{1});

  const auto plan = crp_sample(500, params, 7);
  CHECK(plan.assignments.front() == 1);
  std::size_t k = 0;
  std::vector<std::uint64_t> counts;
  for (auto y : plan.assignments) {
    CHECK(y <= k + 1);
    if (y == k + 1) {
      ++k;
      counts.push_back(0);
    }
    ++counts[y - 1];
  }
  CHECK(counts == plan.table_counts);
  CHECK(plan.to_integer_partition().n() == 500);

  const auto again = crp_sample(500, params, 7);
  CHECK(again.assignments == plan.assignments);
  CHECK(crp_sample(500, params, 8).assignments != plan.assignments);
  CHECK_THROWS_AS(crp_sample(0, params, 1), DomainError);
}

TEST_CASE("expected number of tables grows with alpha") {
  std::vector<double> means;
  for (double alpha : {0.2, 0.5, 0.8}) {
    double total = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s)
      total += static_cast<double>(crp_sample(200, PdParams(alpha, 5.0), s).num_tables());
    means.push_back(total / 200.0);
  }
  CHECK(means[0] < means[1]);
  CHECK(means[1] < means[2]);
}

TEST_CASE("crp partitions of 4 follow the eppf") {
  const PdParams params(0.3, 0.7);
  const auto all = enumerate_partitions(4);
  std::map<std::vector<std::vector<std::size_t>>, std::size_t> index;
  for (std::size_t i = 0; i < all.size(); ++i) index[all[i].blocks()] = i;
  std::vector<double> observed(all.size(), 0.0), expected(all.size());
  const int draws = 20000;
  for (int d = 0; d < draws; ++d)
    observed[index.at(crp_sample(4, params, derive_seed(123, d)).to_set_partition().blocks())] += 1;
  for (std::size_t i = 0; i < all.size(); ++i)
    expected[i] = draws * std::exp(eppf_log(to_integer_partition(all[i]), params));
  CHECK(oracle::chi_square_p_value(observed, expected) > 0.001);
}

TEST_CASE("gem_stick_breaking") {
  const PdParams params(0.4, 3.0);
  const auto single = gem_stick_breaking(params, 1, 5);
  CHECK(single.population.probs() == std::vector<double>{1.0});

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto draw = gem_stick_breaking(params, 200, seed);
    const auto& p = draw.population.probs();
    CHECK(std::is_sorted(p.begin(), p.end(), std::greater<>()));
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    CHECK(draw.tail_mass >= 0.0);
    CHECK(draw.tail_mass < 1.0);
  }
  CHECK(gem_stick_breaking(params, 50, 9).population.probs() ==
        gem_stick_breaking(params, 50, 9).population.probs());

  // With m = 1 the tail mass is 1 - V_1.
  double sum = 0.0;
  const int draws = 40000;
  for (int d = 0; d < draws; ++d) sum += 1.0 - gem_stick_breaking(params, 1, d).tail_mass;
  const double expected = (1.0 - 0.4) / (1.0 + 3.0);
  const double sd = std::sqrt(expected * (1 - expected) / (1.0 + 3.0 + 1.0));  // Beta variance
  CHECK(std::abs(sum / draws - expected) < 4.0 * sd / std::sqrt(draws));
}

TEST_CASE("beta and gamma variates have the right means") {
  Rng rng(42);
  for (auto [a, b] : {std::pair{0.3, 0.7}, std::pair{2.0, 5.0}, std::pair{0.05, 40.0}}) {
    double sum = 0.0;
    const int draws = 50000;
    for (int i = 0; i < draws; ++i) sum += rng.beta(a, b);
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    CHECK(std::abs(sum / draws - mean) < 5.0 * std::sqrt(var / draws));
  }
}

TEST_CASE("powerlaw_reference") {
  const auto half = powerlaw_reference(0.5, 1, 100);
  CHECK(half.front().second == 1.0);
  const double slope = (std::log(half[99].second) - std::log(half[9].second)) /
                       (std::log(100.0) - std::log(10.0));
  CHECK(slope == Approx(-2.0).epsilon(1e-12));

  const auto r = powerlaw_reference(0.51, 1, 50);
  const double s51 = (std::log(r[49].second) - std::log(r[0].second)) / std::log(50.0);
  CHECK(s51 == Approx(-1.0 / 0.51).epsilon(1e-12));
  CHECK(s51 == Approx(-1.9608).epsilon(1e-4));
  CHECK_THROWS_AS(powerlaw_reference(1.0, 1, 2), DomainError);
  CHECK_THROWS_AS(powerlaw_reference(0.5, 0, 2), DomainError);
}

TEST_CASE("ranked_frequencies") {
  LabeledSample s;
  for (const char* l : {"2", "4", "2", "4", "3", "3", "10", "13", "5", "4"}) s.labels.emplace_back(l);
  const auto freq = ranked_frequencies(s);
  const std::vector<double> expected{0.3, 0.2, 0.2, 0.1, 0.1, 0.1};
  REQUIRE(freq.size() == expected.size());
  for (std::size_t i = 0; i < freq.size(); ++i) CHECK(freq[i] == Approx(expected[i]));

  CHECK(ranked_frequencies(LabeledSample{{"a", "a"}}) == std::vector<double>{1.0});
  const auto plan = crp_sample(1000, PdParams(0.5, 10.0), 1);
  const auto f = ranked_frequencies(plan);
  CHECK(std::abs(std::accumulate(f.begin(), f.end(), 0.0) - 1.0) < 1e-12);
  CHECK(std::is_sorted(f.begin(), f.end(), std::greater<>()));
}

}  // TEST_SUITE
