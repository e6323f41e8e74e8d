#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "picres/errors.hpp"
#include "picres/triangle.hpp"
#include "test_util.hpp"

using namespace picres;

namespace {

std::vector<RawCell> unit_cells(int J) {
  std::vector<RawCell> raw;
  for (Source s : {Source::P, Source::I})
    for (int i = 0; i <= J; ++i)
      for (int j = 0; j <= J - i; ++j) raw.push_back({i, j, s, 1.0});
  return raw;
}

ErrorKind kind_of(const std::vector<RawCell>& raw, std::string* msg = nullptr) {
  try {
    validate_triangle(raw);
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IOError;
}

}  // namespace

TEST_CASE("validate_triangle accepts a minimal complete pair") {
  const ClaimsTriangle t = validate_triangle(unit_cells(1));
  CHECK(t.J() == 1);
  CHECK(t.P(1, 0) == 1.0);
  CHECK(t.I(0, 1) == 1.0);
}

TEST_CASE("validate_triangle names the missing cell") {
  auto raw = unit_cells(1);
  raw.erase(std::remove_if(raw.begin(), raw.end(),
                           [](const RawCell& c) { return c.accident == 1 && c.development == 0 && c.source == Source::P; }),
            raw.end());
  std::string msg;
  CHECK(kind_of(raw, &msg) == ErrorKind::MissingCell);
  CHECK(msg.find("(1,0,P)") != std::string::npos);
}

TEST_CASE("validate_triangle rejects nonpositive values") {
  auto raw = unit_cells(1);
  for (auto& c : raw)
    if (c.accident == 0 && c.development == 0 && c.source == Source::I) c.value = -3.2;
  std::string msg;
  CHECK(kind_of(raw, &msg) == ErrorKind::NonPositiveValue);
  CHECK(msg.find("(0,0,I)") != std::string::npos);
}

TEST_CASE("validate_triangle shape and terminal checks") {
  auto raw = unit_cells(2);
  raw.erase(std::remove_if(raw.begin(), raw.end(), [](const RawCell& c) { return c.source == Source::I && c.development + c.accident == 2; }),
            raw.end());
  CHECK(kind_of(raw) == ErrorKind::ShapeMismatch);
  auto raw2 = unit_cells(1);
  for (auto& c : raw2)
    if (c.accident == 0 && c.development == 1 && c.source == Source::I) c.value = 2.0;
  CHECK(kind_of(raw2) == ErrorKind::TerminalMismatch);
  auto raw3 = unit_cells(1);
  raw3.push_back({1, 1, Source::P, 1.0});
  CHECK(kind_of(raw3) == ErrorKind::ShapeMismatch);
}

TEST_CASE("log_ratios on exact exponentials and constants") {
  MatrixXd P(2, 2), I(2, 2);
  P << std::exp(1.0), std::exp(2.0), 3.0, 0.0;
  I << 5.0, std::exp(2.0), 4.0, 0.0;
  const auto r = log_ratios(make_triangle(P, I));
  CHECK(r.xi(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.xi(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.zeta(0, 0) == doctest::Approx(std::log(5.0) - 2.0));

  MatrixXd C = MatrixXd::Constant(4, 4, 7.0);
  const auto rc = log_ratios(make_triangle(C, C));
  for (int i = 0; i <= 3; ++i)
    for (int j = 1; j <= 3 - i; ++j) CHECK(rc.xi(i, j) == 0.0);
}

TEST_CASE("cumulating log ratios round-trips log levels") {
  Rng rng = make_rng(11, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const int J = 1 + rep % 7;
    const ClaimsTriangle t = testutil::random_triangle(J, rng);
    const auto r = log_ratios(t);
    const MatrixXd lp = cumulate_payments(r);
    VectorXd diag(J + 1);
    for (int i = 0; i <= J; ++i) diag(i) = std::log(t.I(i, J - i));
    const MatrixXd li = cumulate_incurred(r, diag);
    for (int i = 0; i <= J; ++i)
      for (int j = 0; j <= J - i; ++j) {
        CHECK(std::abs(lp(i, j) - std::log(t.P(i, j))) <= 1e-10 * std::abs(std::log(t.P(i, j))));
        CHECK(std::abs(li(i, j) - std::log(t.I(i, j))) <= 1e-10 * std::abs(std::log(t.I(i, j))));
      }
  }
}

TEST_CASE("apply_permutation identity, reversal and inverse") {
  const std::vector<Cell> cells = {{0, 0, Source::P}, {0, 1, Source::P}, {1, 0, Source::P}};
  const VectorXd v = (VectorXd(3) << 1, 2, 3).finished();
  CHECK(apply_permutation(v, identity_plan(cells)) == v);
  const std::vector<Cell> rev(cells.rbegin(), cells.rend());
  const auto plan = make_plan(cells, rev);
  CHECK(apply_permutation(v, plan) == (VectorXd(3) << 3, 2, 1).finished());
  CHECK_THROWS_AS(apply_permutation(VectorXd(2), plan), Error);

  Rng rng = make_rng(5, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const int J = 1 + rep % 5;
    auto from = observed_cells_accident_major(J);
    auto to = from;
    std::shuffle(to.begin(), to.end(), rng);
    const auto p = make_plan(from, to);
    VectorXd x(from.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = std_normal(rng);
    CHECK(apply_permutation(apply_permutation(x, p), inverse_plan(p)) == x);
    const MatrixXd S = testutil::random_spd(static_cast<int>(from.size()), rng);
    CHECK(apply_permutation(apply_permutation(S, p), inverse_plan(p)) == S);
    // Composition acts like sequential application.
    auto to2 = from;
    std::shuffle(to2.begin(), to2.end(), rng);
    const auto q = make_plan(to, to2);
    CHECK(apply_permutation(x, compose(p, q)) == apply_permutation(apply_permutation(x, p), q));
  }
}

TEST_CASE("conjugated covariance follows the reordered vector") {
  Rng rng = make_rng(6, 0);
  const auto plan = blocked_plan(3);
  const int n = static_cast<int>(plan.total_len());
  const MatrixXd S = testutil::random_spd(n, rng);
  const MatrixXd T = apply_permutation(S, plan);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) CHECK(T(a, b) == S(plan.indices[a], plan.indices[b]));
}

TEST_CASE("named orderings") {
  const auto inter = ratio_cells_interleaved(2, 1);
  REQUIRE(inter.size() == 5);
  CHECK(inter[0] == Cell{1, 0, Source::P});
  CHECK(inter[1] == Cell{1, 1, Source::P});
  CHECK(inter[2] == Cell{1, 0, Source::I});
  const auto blocked = observed_cells_blocked(2);
  CHECK(blocked.front().source == Source::P);
  CHECK(blocked.back().source == Source::I);
  const auto uf = unobserved_first_cells(2, 2);
  CHECK(uf.size() == 5);
}

TEST_CASE("partition_observed_aux examples") {
  const auto p1 = partition_observed_aux(1);
  std::vector<Cell> aux1p, aux1i;
  for (const auto& c : p1.aux_payment_idx)
    if (c.accident == 1) aux1p.push_back(c);
  for (const auto& c : p1.aux_incurred_idx)
    if (c.accident == 1) aux1i.push_back(c);
  CHECK(aux1p == std::vector<Cell>{{1, 1, Source::P}});
  CHECK(aux1i.empty());

  const auto p2 = partition_observed_aux(2);
  std::set<Cell> pay2, inc2;
  for (const auto& c : p2.aux_payment_idx)
    if (c.accident == 2) pay2.insert(c);
  for (const auto& c : p2.aux_incurred_idx)
    if (c.accident == 2) inc2.insert(c);
  CHECK(pay2 == std::set<Cell>{{2, 1, Source::P}, {2, 2, Source::P}});
  CHECK(inc2 == std::set<Cell>{{2, 1, Source::I}});

  const auto p9 = partition_observed_aux(9);
  CHECK(p9.aux_payment_idx.size() == 45);
  CHECK(p9.aux_incurred_idx.size() == 36);
}

TEST_CASE("partition covers each accident year without overlap") {
  for (int J = 1; J <= 8; ++J) {
    const auto p = partition_observed_aux(J);
    std::set<Cell> all;
    std::size_t n = 0;
    for (const auto* list : {&p.observed_idx, &p.aux_payment_idx, &p.aux_incurred_idx})
      for (const auto& c : *list) {
        all.insert(c);
        ++n;
      }
    CHECK(all.size() == n);
    std::set<Cell> grid;
    for (int i = 0; i <= J; ++i)
      for (int j = 0; j <= J; ++j) {
        grid.insert({i, j, Source::P});
        if (j < J || i == 0) grid.insert({i, j, Source::I});
      }
    CHECK(all == grid);
    for (const auto& c : p.aux_incurred_idx) CHECK(c.development < J);
  }
}
