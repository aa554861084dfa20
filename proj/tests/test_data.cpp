#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "ldm/data.hpp"
#include "ldm/error.hpp"
#include "ldm/random.hpp"
#include "oracles.hpp"

using namespace ldm;

TEST_CASE("rng stream matches a reference xorshift64* implementation") {
  // Values computed with an independent big-integer implementation.
  Rng a(0);
  CHECK(a.next() == 0x7bbcb40d550682d0ULL);
  CHECK(a.next() == 0xde7fe413d00cc9fdULL);
  CHECK(a.next() == 0xb3c638353c668c91ULL);
  Rng b(42);
  CHECK(b.next() == 0x31b0ece7c4f697a2ULL);
  CHECK(b.next() == 0x9008a3b1cb686f03ULL);
}

TEST_CASE("rng below stays in range and permutations are permutations") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(13) < 13);
  auto perm = random_permutation(50, rng);
  auto sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  for (int i = 0; i < 100; ++i) {
    const double u = rng.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("parse a single line with features") {
  auto d = parse_sparse_text("+1 1:0.5 3:1.2\n");
  REQUIRE(d.size() == 1);
  CHECK(d.labels[0] == 1);
  CHECK(d.dimension == 3);
  auto e = d.instances[0].entries();
  REQUIRE(e.size() == 2);
  CHECK(e[0].index == 1);
  CHECK(e[0].value == 0.5);
  CHECK(e[1].index == 3);
  CHECK(e[1].value == 1.2);
}

TEST_CASE("parse a featureless negative instance") {
  auto d = parse_sparse_text("-1\n");
  REQUIRE(d.size() == 1);
  CHECK(d.labels[0] == -1);
  CHECK(d.instances[0].empty());
  CHECK(d.dimension == 0);
}

TEST_CASE("two non-signed labels map by lexicographic order") {
  auto d = parse_sparse_text("1 1:1\n0 1:2\n1 2:1\n0\n");
  CHECK(d.labels == std::vector<int>{1, -1, 1, -1});
  auto e = parse_sparse_text("2 1:1\n1 1:2\n");
  CHECK(e.labels == std::vector<int>{1, -1});
  auto f = parse_sparse_text("1 1:1\n+1 1:2\n-1 1:3\n");
  CHECK(f.labels == std::vector<int>{1, 1, -1});
}

TEST_CASE("parse errors carry the line number") {
  auto expect_error = [](const std::string& text, const std::string& fragment) {
    try {
      parse_sparse_text(text);
      FAIL("expected DataError for: " << text);
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  expect_error("+1 1:1\n+1 3:1 2:1\n", "line 2");
  expect_error("+1 1:1\n-1 1:x\n", "line 2");
  expect_error("0 1:1\n1 1:1\n2 1:1\n", "line 3");
  expect_error("+1 0:1\n", "line 1");
  expect_error("+1 1:1 1:2\n", "line 1");
  CHECK_THROWS_AS(parse_sparse_text(""), DataError);
}

TEST_CASE("blank lines are skipped and line order is kept") {
  auto d = parse_sparse_text("\n+1 2:1\n\n-1 1:3\n");
  REQUIRE(d.size() == 2);
  CHECK(d.labels[0] == 1);
  CHECK(d.instances[1].entries()[0].value == 3.0);
}

TEST_CASE("serialize and parse round-trip on random files") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> value(-1e3, 1e3);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SparseVector> xs;
    std::vector<int> ys;
    for (int i = 0; i < 20; ++i) {
      std::vector<FeatureEntry> e;
      for (int k = 1; k <= 8; ++k) {
        if (coin(gen) == 0) e.push_back({k, value(gen)});
      }
      xs.emplace_back(std::move(e));
      ys.push_back(i % 3 == 0 ? -1 : 1);
    }
    auto d = make_dataset(xs, ys);
    const std::string text = serialize_sparse(d);
    auto back = parse_sparse_text(text);
    REQUIRE(back.size() == d.size());
    CHECK(back.labels == d.labels);
    CHECK(back.dimension == d.dimension);
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto a = d.instances[i].entries();
      auto b = back.instances[i].entries();
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].index == b[k].index);
        CHECK(a[k].value == b[k].value);
      }
    }
    CHECK(serialize_sparse(back) == text);
  }
}

TEST_CASE("non-signed label files round-trip after mapping") {
  auto d = parse_sparse_text("1 1:1\n0 1:2\n0 2:1\n1\n");
  auto back = parse_sparse_text(serialize_sparse(d));
  CHECK(back.labels == d.labels);
}

TEST_CASE("fit_normalizer includes implicit zeros") {
  auto d = parse_sparse_text("+1 1:2\n-1 1:4\n+1 2:1\n");
  auto map = fit_normalizer(d);
  CHECK(map.min(1) == 0.0);
  CHECK(map.max(1) == 4.0);
}

TEST_CASE("constant feature keeps a degenerate range") {
  auto d = parse_sparse_text("+1 1:3\n-1 1:3\n");
  auto map = fit_normalizer(d);
  CHECK(map.min(1) == 3.0);
  CHECK(map.max(1) == 3.0);
}

TEST_CASE("fit_normalizer equals a dense column scan") {
  std::mt19937_64 gen(5);
  auto d = oracle::random_dataset(gen, 25, 6, 2.0);
  auto map = fit_normalizer(d);
  auto x = oracle::dense(d);
  for (int k = 1; k <= 6; ++k) {
    CHECK(map.min(k) == x.row(k - 1).minCoeff());
    CHECK(map.max(k) == x.row(k - 1).maxCoeff());
  }
}

TEST_CASE("apply_normalizer endpoints, degenerate features and clamping") {
  NormalizationMap map({1.0, 5.0}, {3.0, 5.0});
  CHECK(map.transform(1, 3.0) == 1.0);
  CHECK(map.transform(1, 1.0) == 0.0);
  CHECK(map.transform(2, 5.0) == 0.0);
  CHECK(map.transform(1, 6.0) == 1.0);
  CHECK(map.transform(1, -10.0) == 0.0);
  CHECK(map.transform(3, 7.0) == 0.0);  // feature unseen while fitting
}

TEST_CASE("normalized fitting data lies in the unit interval") {
  std::mt19937_64 gen(9);
  auto d = oracle::random_dataset(gen, 40, 5, 3.0);
  auto map = fit_normalizer(d);
  auto n = apply_normalizer(map, d);
  auto x = oracle::dense(d);
  auto xn = oracle::dense(n, d.dimension);
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    const double lo = x.row(k).minCoeff(), hi = x.row(k).maxCoeff();
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      CHECK(xn(k, i) >= 0.0);
      CHECK(xn(k, i) <= 1.0);
      CHECK(xn(k, i) == doctest::Approx((x(k, i) - lo) / (hi - lo)).epsilon(1e-12));
    }
  }
}

TEST_CASE("implicit zeros of a feature with negative minimum are materialized") {
  auto d = parse_sparse_text("+1 1:-1\n-1 1:2\n+1 2:1\n");
  auto map = fit_normalizer(d);
  auto n = apply_normalizer(map, d);
  // Instance 3 has an implicit zero in feature 1: (0 - -1) / 3.
  auto e = n.instances[2].entries();
  REQUIRE(e.size() == 2);
  CHECK(e[0].index == 1);
  CHECK(e[0].value == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("make_folds sizes and determinism") {
  auto count = [](const FoldPlan& p) {
    std::vector<std::size_t> sizes(p.k, 0);
    for (auto f : p.assignment) ++sizes[f];
    return sizes;
  };
  auto p10 = make_folds(10, 5, 3);
  for (auto s : count(p10)) CHECK(s == 2);
  auto p7 = make_folds(7, 5, 3);
  auto sizes = count(p7);
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  CHECK(sizes == std::vector<std::size_t>{2, 2, 1, 1, 1});
  CHECK(make_folds(7, 5, 3).assignment == p7.assignment);
  CHECK(make_folds(50, 5, 4).assignment != make_folds(50, 5, 5).assignment);
  CHECK_THROWS_AS(make_folds(3, 5, 0), UsageError);
  CHECK_THROWS_AS(make_folds(3, 1, 0), UsageError);
}

TEST_CASE("folds partition the index set") {
  auto p = make_folds(23, 4, 8);
  std::vector<int> seen(23, 0);
  for (std::size_t f = 0; f < p.k; ++f) {
    auto members = p.members(f);
    auto rest = p.complement(f);
    CHECK(members.size() + rest.size() == 23);
    for (auto i : members) ++seen[i];
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("random_split sizes follow the ceiling rule") {
  auto s = random_split_indices(100, 0.5, 1);
  CHECK(s.train.size() == 50);
  CHECK(s.test.size() == 50);
  auto t = random_split_indices(3, 0.5, 1);
  CHECK(t.train.size() == 2);
  CHECK(t.test.size() == 1);
}

TEST_CASE("random_split is a deterministic partition of the multiset") {
  std::mt19937_64 gen(3);
  auto d = oracle::random_dataset(gen, 41, 3);
  auto [train, test] = random_split(d, 0.5, 17);
  auto [train2, test2] = random_split(d, 0.5, 17);
  CHECK(serialize_sparse(train) == serialize_sparse(train2));
  CHECK(serialize_sparse(test) == serialize_sparse(test2));
  std::map<std::string, int> counts;
  std::istringstream all(serialize_sparse(d));
  for (std::string line; std::getline(all, line);) ++counts[line];
  for (const auto* part : {&train, &test}) {
    std::istringstream in(serialize_sparse(*part));
    for (std::string line; std::getline(in, line);) --counts[line];
  }
  for (const auto& [line, c] : counts) CHECK(c == 0);
}

TEST_CASE("random_split rejects a single-class training part") {
  auto d = parse_sparse_text("+1 1:1\n+1 1:2\n+1 1:3\n-1 1:4\n");
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    try {
      auto parts = random_split(d, 0.25, seed);
      CHECK(parts.first.has_both_classes());
    } catch (const DataError&) {
      ++failures;
    }
  }
  CHECK(failures == 40);  // one training row can never hold both classes
}

TEST_CASE("sparse dot products ignore unseen dense indices") {
  SparseVector x({{1, 2.0}, {5, 3.0}});
  std::vector<double> w{1.0, 1.0};
  CHECK(dot(x, w) == 2.0);
  SparseVector y({{5, 1.0}, {6, 4.0}});
  CHECK(dot(x, y) == 3.0);
  CHECK(squared_distance(x, y) == 4.0 + 4.0 + 16.0);
}
