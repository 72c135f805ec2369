#include "cbr/errors.hpp"
#include "cbr/solvers.hpp"
#include "cbr/stopping.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <cmath>

using cbr::DataVector;
using cbr::ForwardOperator;
using cbr::ImageVector;
using cbr::IterationState;
using cbr::Matrix;
using cbr::NoiseModel;
using cbr::RuleKind;
using cbr::StoppingRule;
using cbr::Vector;

namespace {

ForwardOperator tiny() {
  Matrix h(2, 2);
  h << 1, 1, 1, 2;
  return ForwardOperator(h);
}

Vector vec(std::initializer_list<double> v) { return oracle::to_vector(oracle::Vec(v)); }

struct Case {
  RuleKind kind;
  bool gaussian;
  double lhs;
  double rhs;
};

}  // namespace

TEST_CASE("rule values on the 2x2 instance") {
  const auto op = tiny();
  const DataVector y(vec({3, 3}));
  const auto state = IterationState::start(op, ImageVector(vec({1, 1})));
  const Case cases[] = {
      {RuleKind::MorozovGaussian, true, 1.0, 2.0},
      {RuleKind::MorozovPoisson, false, 1.0, 5.0},
      {RuleKind::Pearson, false, 0.5, 2.0},
      {RuleKind::PoissonDiscrepancy, false, 3.0 * std::log(1.5) - 1.0, 1.0},
      {RuleKind::CbrGaussian, true, 2.0, 7.0},
      {RuleKind::CbrPoisson, false, 0.5, 8.0 / 3.0},
  };
  for (const auto& c : cases) {
    CAPTURE(cbr::to_string(c.kind));
    StoppingRule rule(c.kind, 1.0);
    const NoiseModel noise = c.gaussian ? NoiseModel::gaussian(1.0) : NoiseModel::poisson();
    const auto v = rule.evaluate(state, y, op, noise);
    CHECK(std::abs(v.lhs - c.lhs) < 1e-12);
    CHECK(std::abs(v.rhs - c.rhs) < 1e-12);
    CHECK(v.fired);
  }
}

TEST_CASE("tau scales the right-hand side only") {
  const auto op = tiny();
  const DataVector y(vec({3, 3}));
  const auto state = IterationState::start(op, ImageVector(vec({1, 1})));
  StoppingRule rule(RuleKind::CbrGaussian, 0.25);
  const auto v = rule.evaluate(state, y, op, NoiseModel::gaussian(1.0));
  CHECK(v.lhs == 2.0);
  CHECK(v.rhs == 1.75);
  CHECK_FALSE(v.fired);
}

TEST_CASE("ties fire") {
  const auto op = tiny();
  const DataVector y(vec({3, 3}));
  const auto state = IterationState::start(op, ImageVector(vec({1, 1})));
  // lhs = 1, rhs = tau * N * sigma^2 = 1
  StoppingRule rule(RuleKind::MorozovGaussian, 0.5);
  CHECK(rule.evaluate(state, y, op, NoiseModel::gaussian(1.0)).fired);
}

TEST_CASE("construction and compatibility") {
  CHECK_THROWS_AS(StoppingRule(RuleKind::CbrPoisson, 0.0), cbr::DomainError);
  CHECK_THROWS_AS(StoppingRule(RuleKind::CbrPoisson, -1.0), cbr::DomainError);
  CHECK_THROWS_AS(StoppingRule(RuleKind::L2Oracle, 1.0), cbr::DomainError);
  const auto g = NoiseModel::gaussian(1.0);
  const auto p = NoiseModel::poisson();
  CHECK(StoppingRule(RuleKind::MorozovGaussian, 1).compatible_with(g));
  CHECK_FALSE(StoppingRule(RuleKind::MorozovGaussian, 1).compatible_with(p));
  CHECK(StoppingRule(RuleKind::CbrGaussian, 1).compatible_with(g));
  for (auto k : {RuleKind::MorozovPoisson, RuleKind::Pearson, RuleKind::PoissonDiscrepancy,
                 RuleKind::CbrPoisson}) {
    CHECK(StoppingRule(k, 1).compatible_with(p));
    CHECK_FALSE(StoppingRule(k, 1).compatible_with(g));
  }
  const auto oracle_rule = StoppingRule::l2_oracle(ImageVector(vec({1, 1})));
  CHECK(oracle_rule.compatible_with(g));
  CHECK(oracle_rule.compatible_with(p));

  const auto op = tiny();
  auto rule = StoppingRule(RuleKind::CbrPoisson, 1.0);
  const auto state = IterationState::start(op, ImageVector(vec({1, 1})));
  CHECK_THROWS_AS(rule.evaluate(state, DataVector(vec({3, 3})), op, g), cbr::DomainError);
  IterationState zero = IterationState::start(op, ImageVector(vec({0, 0})));
  CHECK_THROWS_AS(rule.evaluate(zero, DataVector(vec({3, 3})), op, p), cbr::DomainError);
}

TEST_CASE("rule names round trip") {
  for (auto k : {RuleKind::MorozovGaussian, RuleKind::MorozovPoisson, RuleKind::Pearson,
                 RuleKind::PoissonDiscrepancy, RuleKind::CbrGaussian, RuleKind::CbrPoisson,
                 RuleKind::L2Oracle}) {
    CHECK(cbr::parse_rule_kind(cbr::to_string(k)) == k);
  }
  CHECK_FALSE(cbr::parse_rule_kind("cbr").has_value());
}

TEST_CASE("default tau") {
  const DataVector y(Vector::Constant(100, 4.0));
  CHECK(cbr::default_tau(RuleKind::CbrGaussian, NoiseModel::gaussian(10.0), y, 100) ==
        doctest::Approx(0.01).epsilon(1e-15));
  CHECK(cbr::default_tau(RuleKind::CbrPoisson, NoiseModel::poisson(), y, 100) == 0.25);
  CHECK(cbr::default_tau(RuleKind::Pearson, NoiseModel::poisson(), y, 100) == 1.0);
  CHECK(cbr::default_tau(RuleKind::MorozovGaussian, NoiseModel::gaussian(3.0), y, 100) == 1.0);
  CHECK_THROWS_AS(
      cbr::default_tau(RuleKind::CbrPoisson, NoiseModel::poisson(), DataVector(Vector::Zero(3)), 3),
      cbr::DomainError);
}

TEST_CASE("L2 oracle fires once the distance stops decreasing") {
  const auto op = tiny();
  const DataVector y(vec({3, 3}));
  auto rule = StoppingRule::l2_oracle(ImageVector(vec({1, 1})));
  CHECK(rule.lookback() == 1);
  auto s = IterationState::start(op, ImageVector(vec({1, 1})));
  rule.prime(s);
  s = cbr::isra_step(s, y, op);
  const auto v = rule.evaluate(s, y, op, NoiseModel::gaussian(1.0));
  CHECK(v.lhs == 0.0);
  CHECK(std::abs(v.rhs - std::sqrt(0.2 * 0.2 + 0.125 * 0.125)) < 1e-12);
  CHECK(v.fired);

  // Unprimed: nothing to compare against, so it cannot fire.
  auto fresh = StoppingRule::l2_oracle(ImageVector(vec({1, 1})));
  CHECK_FALSE(fresh.evaluate(s, y, op, NoiseModel::gaussian(1.0)).fired);
}

TEST_CASE("L2 oracle on exact data only fires at stagnation") {
  const auto op = cbr::build_dense_positive(15, 6, 21, 0.1);
  const ImageVector truth(oracle::to_vector(oracle::random_vec(6, 22, 0.5, 2.0)));
  const DataVector y = cbr::apply(op, truth);
  const auto result = cbr::run(op, y, NoiseModel::poisson(), cbr::SolverKind::Em,
                               StoppingRule::l2_oracle(truth), std::nullopt, 3000);
  const auto& recs = result.rule_trace.records;
  for (const auto& r : recs) {
    if (r.fired) CHECK(std::abs(r.rhs - r.lhs) < 1e-12);
  }
}

TEST_CASE("CBR rule values are bitwise the objective values") {
  const auto op = cbr::build_dense_positive(25, 9, 5, 0.05);
  const ImageVector x(oracle::to_vector(oracle::random_vec(9, 6, 0.0, 2.0)));
  const DataVector y(oracle::to_vector(oracle::random_vec(25, 7, 0.0, 8.0)));
  const auto state = IterationState::start(op, x);
  for (const auto& [kind, noise] :
       {std::pair{RuleKind::CbrGaussian, NoiseModel::gaussian(1.7)},
        std::pair{RuleKind::CbrPoisson, NoiseModel::poisson()}}) {
    StoppingRule rule(kind, 0.37);
    const auto v = rule.evaluate(state, y, op, noise);
    CHECK(v.lhs == cbr::cbr_residual(y, x, op, noise));
    CHECK(v.rhs == 0.37 * cbr::cbr_expected(x, op, noise));
  }
}

TEST_CASE("adapted Morozov scales as L^2 over L under data scaling") {
  const auto op = cbr::build_dense_positive(30, 12, 8, 0.05);
  const DataVector y(oracle::to_vector(oracle::random_vec(30, 9, 0.0, 5.0)));
  const ImageVector x0(Vector::Constant(12, 0.7));
  for (const double scale : {10.0, 1000.0}) {
    CAPTURE(scale);
    const DataVector ly(y.values() * scale);
    const auto base = cbr::run(op, y, NoiseModel::poisson(), cbr::SolverKind::Em,
                               StoppingRule(RuleKind::MorozovPoisson, 1e-12), x0, 60);
    const auto scaled = cbr::run(op, ly, NoiseModel::poisson(), cbr::SolverKind::Em,
                                 StoppingRule(RuleKind::MorozovPoisson, 1e-12), x0, 60);
    REQUIRE(base.rule_trace.records.size() == scaled.rule_trace.records.size());
    for (std::size_t k = 0; k < base.rule_trace.records.size(); ++k) {
      const auto& a = base.rule_trace.records[k];
      const auto& b = scaled.rule_trace.records[k];
      CHECK(oracle::rel_diff(b.lhs, scale * scale * a.lhs) < 1e-9);
      CHECK(oracle::rel_diff(b.rhs, scale * a.rhs) < 1e-9);
    }
  }
}
