#include "cbr/stopping.hpp"

#include "cbr/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace cbr {

namespace {

constexpr std::array<std::pair<RuleKind, std::string_view>, 7> kRuleNames{{
    {RuleKind::MorozovGaussian, "morozov_gaussian"},
    {RuleKind::MorozovPoisson, "morozov_poisson"},
    {RuleKind::Pearson, "pearson"},
    {RuleKind::PoissonDiscrepancy, "poisson_discrepancy"},
    {RuleKind::CbrGaussian, "cbr_gaussian"},
    {RuleKind::CbrPoisson, "cbr_poisson"},
    {RuleKind::L2Oracle, "l2_oracle"},
}};

double pearson_statistic(const DataVector& y, const Vector& forward) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < forward.size(); ++i) {
    if (!(forward[i] > 0.0)) throw DomainError("(Hx)_" + std::to_string(i) + " must be > 0");
    const double r = forward[i] - y.values()[i];
    total += r * r / forward[i];
  }
  return total;
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  for (const auto& [k, name] : kRuleNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<RuleKind> parse_rule_kind(std::string_view name) {
  for (const auto& [k, n] : kRuleNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::optional<int> RuleTrace::first_fired() const {
  for (const auto& r : records) {
    if (r.fired) return r.k;
  }
  return std::nullopt;
}

StoppingRule::StoppingRule(RuleKind kind, double tau) : kind_(kind), tau_(tau) {
  if (kind == RuleKind::L2Oracle) throw DomainError("L2Oracle needs a truth image; use l2_oracle()");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("tau must be a finite value > 0");
}

StoppingRule StoppingRule::l2_oracle(ImageVector truth) {
  StoppingRule rule(RuleKind::MorozovGaussian, 1.0);
  rule.kind_ = RuleKind::L2Oracle;
  rule.truth_ = std::move(truth);
  return rule;
}

bool StoppingRule::compatible_with(const NoiseModel& noise) const {
  switch (kind_) {
    case RuleKind::MorozovGaussian:
    case RuleKind::CbrGaussian:
      return noise.is_gaussian();
    case RuleKind::MorozovPoisson:
    case RuleKind::Pearson:
    case RuleKind::PoissonDiscrepancy:
    case RuleKind::CbrPoisson:
      return noise.is_poisson();
    case RuleKind::L2Oracle:
      return true;
  }
  return false;
}

void StoppingRule::prime(const IterationState& start) {
  if (kind_ != RuleKind::L2Oracle) return;
  previous_distance_ = (start.iterate.values() - truth_->values()).norm();
}

RuleValue StoppingRule::evaluate(const IterationState& state, const DataVector& y,
                                 const ForwardOperator& op, const NoiseModel& noise) {
  if (!compatible_with(noise)) {
    throw DomainError("rule " + name() + " cannot be used with " + noise.name() + " noise");
  }
  if (static_cast<Eigen::Index>(y.size()) != state.forward.size()) {
    throw DimensionError("data length does not match the iterate's forward image");
  }
  const auto n = static_cast<double>(y.size());
  RuleValue v;
  switch (kind_) {
    case RuleKind::MorozovGaussian:
      v.lhs = d_ls(y, state.forward);
      v.rhs = tau_ * n * noise.sigma() * noise.sigma();
      break;
    case RuleKind::MorozovPoisson:
      v.lhs = d_ls(y, state.forward);
      v.rhs = tau_ * state.forward.sum();
      break;
    case RuleKind::Pearson:
      v.lhs = pearson_statistic(y, state.forward);
      v.rhs = tau_ * n;
      break;
    case RuleKind::PoissonDiscrepancy:
      v.lhs = 2.0 / n * d_kl(y, state.forward);
      v.rhs = tau_;
      break;
    case RuleKind::CbrGaussian:
    case RuleKind::CbrPoisson:
      return decide(cbr_terms(y, state.iterate, state.forward, op, noise));
    case RuleKind::L2Oracle: {
      if (truth_->size() != state.iterate.size()) {
        throw DimensionError("L2Oracle truth length does not match the iterate");
      }
      const double current = (state.iterate.values() - truth_->values()).norm();
      // Without a previous distance there is nothing to compare against.
      v.lhs = previous_distance_.value_or(std::numeric_limits<double>::infinity());
      v.rhs = current;
      previous_distance_ = current;
      break;
    }
  }
  v.fired = v.lhs <= v.rhs;
  return v;
}

RuleValue StoppingRule::decide(const CbrTerms& terms) const {
  if (!is_cbr()) throw DomainError("rule " + name() + " is not a CBR rule");
  const double rhs = tau_ * terms.expected;
  return {terms.residual, rhs, terms.residual <= rhs};
}

double default_tau(RuleKind kind, const NoiseModel& noise, const DataVector& y,
                   std::size_t n_data) {
  switch (kind) {
    case RuleKind::CbrGaussian:
      if (!noise.is_gaussian()) throw DomainError("cbr_gaussian needs a Gaussian noise model");
      return 1.0 / (noise.sigma() * noise.sigma());
    case RuleKind::CbrPoisson: {
      const double total = y.sum();
      if (!(total > 0.0)) throw DomainError("default tau for cbr_poisson needs sum(y) > 0");
      return static_cast<double>(n_data) / total;
    }
    default:
      return 1.0;
  }
}

}  // namespace cbr
