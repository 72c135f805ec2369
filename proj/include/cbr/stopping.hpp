#pragma once

#include "cbr/iteration_state.hpp"
#include "cbr/objectives.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbr {

enum class RuleKind {
  MorozovGaussian,
  MorozovPoisson,
  Pearson,
  PoissonDiscrepancy,
  CbrGaussian,
  CbrPoisson,
  L2Oracle,
};

std::string_view to_string(RuleKind kind);
std::optional<RuleKind> parse_rule_kind(std::string_view name);

struct RuleValue {
  double lhs = 0.0;
  double rhs = 0.0;
  bool fired = false;
};

struct RuleRecord {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool fired = false;
};

struct RuleTrace {
  std::vector<RuleRecord> records;

  std::optional<int> first_fired() const;
};

/// A stopping rule of the form lhs(x^(k), y) <= rhs(x^(k), y), where rhs
/// is tau times the expected value of lhs for the discrepancy-type rules.
///
/// L2Oracle compares the distance to a known truth with the distance at
/// the previous iterate; it is reported as lhs = previous distance and
/// rhs = current distance, so it fires once the distance stops decreasing
/// and the iterate it selects is the previous one (see lookback()).
/// It is the only stateful rule; every run must own its instance.
class StoppingRule {
 public:
  /// Throws DomainError for tau <= 0 or for L2Oracle (use l2_oracle()).
  StoppingRule(RuleKind kind, double tau);
  static StoppingRule l2_oracle(ImageVector truth);

  RuleKind kind() const { return kind_; }
  double tau() const { return tau_; }
  std::string name() const { return std::string(to_string(kind_)); }
  const std::optional<ImageVector>& truth() const { return truth_; }

  bool compatible_with(const NoiseModel& noise) const;
  /// Number of iterations between the firing iterate and the one the rule selects.
  int lookback() const { return kind_ == RuleKind::L2Oracle ? 1 : 0; }

  /// Records the initial iterate; only L2Oracle uses it.
  void prime(const IterationState& start);
  RuleValue evaluate(const IterationState& state, const DataVector& y, const ForwardOperator& op,
                     const NoiseModel& noise);

  bool is_cbr() const { return kind_ == RuleKind::CbrGaussian || kind_ == RuleKind::CbrPoisson; }
  /// CBR rules only: the decision for terms computed by cbr_terms.
  RuleValue decide(const CbrTerms& terms) const;
  void reset() { previous_distance_.reset(); }

 private:
  RuleKind kind_;
  double tau_;
  std::optional<ImageVector> truth_;
  std::optional<double> previous_distance_;
};

/// CbrGaussian: 1/sigma^2. CbrPoisson: N / sum(y). Every other rule: 1.
double default_tau(RuleKind kind, const NoiseModel& noise, const DataVector& y,
                   std::size_t n_data);

}  // namespace cbr
