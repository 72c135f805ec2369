#pragma once

#include "cbr/iteration_state.hpp"
#include "cbr/objectives.hpp"
#include "cbr/stopping.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace cbr {

enum class SolverKind { Isra, Em };

std::string_view to_string(SolverKind kind);
std::optional<SolverKind> parse_solver_kind(std::string_view name);
/// ISRA pairs with Gaussian noise, EM with Poisson noise.
bool solver_matches(SolverKind solver, const NoiseModel& noise);

/// x * max(U, 0) / V. Clamping the numerator pins pixels whose
/// backprojected data is negative at zero.
ImageVector multiplicative_step(const ImageVector& x, const Vector& numerator,
                                const Vector& denominator);

/// ISRA update x <- x * H^T y / H^T H x, with H^T y computed once.
class IsraUpdate {
 public:
  IsraUpdate(const ForwardOperator& op, const DataVector& y);
  /// `backprojected`, if given, must equal H^T adjoint_input(state).
  IterationState operator()(const IterationState& state,
                            const Vector* backprojected = nullptr) const;
  /// The data-space vector whose backprojection the update needs: Hx.
  const Vector& adjoint_input(const IterationState& state) const { return state.forward; }

 private:
  const ForwardOperator* op_;
  Vector backprojected_data_;
};

/// EM / Richardson-Lucy update x <- x / H^T 1 * H^T (y / Hx).
class EmUpdate {
 public:
  /// Throws DomainError if y has a negative component.
  EmUpdate(const ForwardOperator& op, const DataVector& y);
  /// `backprojected`, if given, must equal H^T adjoint_input(state).
  IterationState operator()(const IterationState& state,
                            const Vector* backprojected = nullptr) const;
  /// y / Hx, with 0 where y is 0. Throws NumericalError if some
  /// (Hx)_i <= 1e-300 while y_i > 0.
  Vector adjoint_input(const IterationState& state) const;

 private:
  const ForwardOperator* op_;
  const DataVector* y_;
};

IterationState isra_step(const IterationState& state, const DataVector& y,
                         const ForwardOperator& op);
IterationState em_step(const IterationState& state, const DataVector& y,
                       const ForwardOperator& op);

/// Constant image scaled so that sum(H x0) = sum(max(y, 0)).
ImageVector flux_matched_start(const ForwardOperator& op, const DataVector& y,
                               std::optional<GridShape> shape = std::nullopt);

enum class StopReason { RuleFired, MaxIterations };
std::string_view to_string(StopReason reason);

struct ReconstructionResult {
  ImageVector final;
  int stop_iteration = 0;
  StopReason stop_reason = StopReason::MaxIterations;
  /// Objective (D_LS for ISRA, D_KL for EM) for k = 0 .. stop_iteration.
  std::vector<double> objective_trace;
  RuleTrace rule_trace;
  /// Iterate chosen by the rule; differs from `final` only for L2Oracle.
  ImageVector selected;
  int selected_iteration = 0;
};

inline constexpr int kDefaultMaxIterations = 5000;

/// Iterates from x0 (flux-matched flat start by default), evaluating the
/// rule after every completed update k >= 1, and stops at the first k where
/// it fires or at max_iter.
ReconstructionResult run(const ForwardOperator& op, const DataVector& y, const NoiseModel& noise,
                         SolverKind solver, StoppingRule rule,
                         std::optional<ImageVector> x0 = std::nullopt,
                         int max_iter = kDefaultMaxIterations);

/// Per-rule outcome when several rules watch the same iteration sequence.
struct TrackedRule {
  StoppingRule rule;
  RuleTrace trace;
  std::optional<int> fired_at;
  ImageVector selected;
  int selected_iteration = 0;
};

struct TrackingResult {
  std::vector<TrackedRule> rules;
  std::vector<double> objective_trace;
  ImageVector final;
  int iterations = 0;
};

enum class TrackUntil { AllFired, MaxIterations };

using IterateObserver = std::function<void(const IterationState&)>;

/// Runs one iteration sequence, evaluating every rule at each k >= 1.
/// Each rule's trace covers all iterations performed. With
/// TrackUntil::AllFired the loop ends once every rule has fired; a rule
/// that never fires selects the final iterate. The observer, if given,
/// sees every state including k = 0.
TrackingResult track(const ForwardOperator& op, const DataVector& y, const NoiseModel& noise,
                     SolverKind solver, std::vector<StoppingRule> rules,
                     std::optional<ImageVector> x0, int max_iter, TrackUntil until,
                     const IterateObserver& observer = {});

}  // namespace cbr
