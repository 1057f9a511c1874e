#include <doctest.h>

#include <cmath>
#include <limits>

#include "hdloc/model.hpp"
#include "hdloc/rng.hpp"

using namespace hdloc;

namespace {

Matrix small_matrix() {
  Matrix m(4, 2);
  m << 1, 2, 3, 4, 5, 6, 7, 8;
  return m;
}

}  // namespace

TEST_CASE("validate builds a grouped sample") {
  const GroupedSample s = GroupedSample::validate(small_matrix(), {0, 0, 1, 1});
  CHECK(s.num_groups() == 2);
  CHECK(s.n() == 4);
  CHECK(s.p() == 2);
  CHECK(s.group_sizes() == std::vector<int>{2, 2});
  CHECK(s.group_rows()[0] == std::vector<int>{0, 1});
  CHECK(s.group_rows()[1] == std::vector<int>{2, 3});
}

TEST_CASE("labels are re-indexed densely in order of first appearance") {
  const GroupedSample s = GroupedSample::validate(small_matrix(), {5, 5, 9, 9});
  CHECK(s.labels() == std::vector<int>{0, 0, 1, 1});

  const GroupedSample t = GroupedSample::validate(small_matrix(), {9, 5, 9, 5});
  CHECK(t.labels() == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("re-indexing preserves group membership") {
  RngStream rng(7, {1});
  Matrix m(30, 3);
  std::vector<long> raw(30);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = rng.normal();
    raw[static_cast<std::size_t>(i)] = static_cast<long>(rng.below(3)) * 11 - 7;
  }
  const GroupedSample s = GroupedSample::validate(m, raw);
  // Same raw label <=> same dense label.
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      CHECK((raw[i] == raw[j]) ==
            (s.labels()[static_cast<std::size_t>(i)] ==
             s.labels()[static_cast<std::size_t>(j)]));
    }
  }
}

TEST_CASE("validation errors") {
  Matrix m = small_matrix();

  SUBCASE("non-finite entry") {
    m(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(GroupedSample::validate(m, {0, 0, 1, 1}), NonFiniteEntry);
    m(2, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(GroupedSample::validate(m, {0, 0, 1, 1}), NonFiniteEntry);
  }
  SUBCASE("group too small") {
    CHECK_THROWS_AS(GroupedSample::validate(m, {0, 0, 0, 1}), GroupTooSmall);
  }
  SUBCASE("single group") {
    CHECK_THROWS_AS(GroupedSample::validate(m, {3, 3, 3, 3}), SingleGroup);
  }
  SUBCASE("label count mismatch") {
    CHECK_THROWS_AS(GroupedSample::validate(m, {0, 0, 1}), LabelMismatch);
  }
}

TEST_CASE("weighted chi-square validates weights") {
  Vector ok(3);
  ok << 3.0, 1.0, 0.5;
  CHECK_NOTHROW(WeightedChiSquare{ok});

  Vector neg(2);
  neg << 1.0, -0.1;
  CHECK_THROWS_AS(WeightedChiSquare{neg}, ValidationError);

  Vector zero = Vector::Zero(4);
  CHECK_THROWS_AS(WeightedChiSquare{zero}, ValidationError);

  CHECK_THROWS_AS(WeightedChiSquare{Vector()}, ValidationError);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::ImhofExact, Method::WelchSatterthwaite2M,
                   Method::HallBuckleyEagleson3M, Method::Permutation,
                   Method::FExact, Method::NormalApprox}) {
    CHECK(method_from_name(method_name(m)) == m);
  }
  CHECK(!method_from_name("bogus").has_value());
}
