#include "cbr/solvers.hpp"

#include "cbr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbr {

namespace {

constexpr double kTinyDenominator = 1e-300;

void require_data_length(const ForwardOperator& op, const DataVector& y) {
  if (y.size() != op.n_data()) {
    throw DimensionError("data length " + std::to_string(y.size()) +
                         " does not match operator N = " + std::to_string(op.n_data()));
  }
}

IterationState advance(const ForwardOperator& op, const IterationState& state, ImageVector next) {
  Vector forward = op.apply(next.values());
  return IterationState{std::move(next), state.k + 1, std::move(forward)};
}

double objective(SolverKind solver, const DataVector& y, const Vector& forward) {
  return solver == SolverKind::Isra ? d_ls(y, forward) : d_kl(y, forward);
}

}  // namespace

std::string_view to_string(SolverKind kind) { return kind == SolverKind::Isra ? "isra" : "em"; }

std::optional<SolverKind> parse_solver_kind(std::string_view name) {
  if (name == "isra") return SolverKind::Isra;
  if (name == "em") return SolverKind::Em;
  return std::nullopt;
}

bool solver_matches(SolverKind solver, const NoiseModel& noise) {
  return solver == SolverKind::Isra ? noise.is_gaussian() : noise.is_poisson();
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::RuleFired ? "rule_fired" : "max_iterations";
}

ImageVector multiplicative_step(const ImageVector& x, const Vector& numerator,
                                const Vector& denominator) {
  if (numerator.size() != static_cast<Eigen::Index>(x.size()) ||
      denominator.size() != static_cast<Eigen::Index>(x.size())) {
    throw DimensionError("multiplicative step: U, V and x must have equal length");
  }
  Vector next(denominator.size());
  for (Eigen::Index j = 0; j < next.size(); ++j) {
    if (!(denominator[j] >= kTinyDenominator)) {
      throw NumericalError("multiplicative step: V_" + std::to_string(j) +
                           " is below 1e-300 (degenerate denominator)");
    }
    const double u = numerator[j] > 0.0 ? numerator[j] : 0.0;
    next[j] = x.values()[j] * (u / denominator[j]);
  }
  return ImageVector(std::move(next), x.shape());
}

IsraUpdate::IsraUpdate(const ForwardOperator& op, const DataVector& y) : op_(&op) {
  require_data_length(op, y);
  backprojected_data_ = op.adjoint_apply(y.values());
}

IterationState IsraUpdate::operator()(const IterationState& state,
                                      const Vector* backprojected) const {
  if (backprojected) {
    return advance(*op_, state, multiplicative_step(state.iterate, backprojected_data_, *backprojected));
  }
  const Vector denominator = op_->adjoint_apply(state.forward);
  return advance(*op_, state, multiplicative_step(state.iterate, backprojected_data_, denominator));
}

EmUpdate::EmUpdate(const ForwardOperator& op, const DataVector& y) : op_(&op), y_(&y) {
  require_data_length(op, y);
  if (!y.nonnegative()) throw DomainError("EM needs nonnegative data");
}

Vector EmUpdate::adjoint_input(const IterationState& state) const {
  const Vector& forward = state.forward;
  Vector ratio(forward.size());
  for (Eigen::Index i = 0; i < forward.size(); ++i) {
    const double yi = y_->values()[i];
    if (yi == 0.0) {
      ratio[i] = 0.0;
    } else if (forward[i] <= kTinyDenominator) {
      throw NumericalError("EM step: (Hx)_" + std::to_string(i) + " <= 1e-300 with y_" +
                           std::to_string(i) + " > 0");
    } else {
      ratio[i] = yi / forward[i];
    }
  }
  return ratio;
}

IterationState EmUpdate::operator()(const IterationState& state,
                                    const Vector* backprojected) const {
  if (backprojected) {
    return advance(*op_, state, multiplicative_step(state.iterate, *backprojected, op_->column_sums()));
  }
  const Vector numerator = op_->adjoint_apply(adjoint_input(state));
  return advance(*op_, state, multiplicative_step(state.iterate, numerator, op_->column_sums()));
}

IterationState isra_step(const IterationState& state, const DataVector& y,
                         const ForwardOperator& op) {
  return IsraUpdate(op, y)(state);
}

IterationState em_step(const IterationState& state, const DataVector& y,
                       const ForwardOperator& op) {
  return EmUpdate(op, y)(state);
}

ImageVector flux_matched_start(const ForwardOperator& op, const DataVector& y,
                               std::optional<GridShape> shape) {
  require_data_length(op, y);
  const double flux = y.values().cwiseMax(0.0).sum();
  if (!(flux > 0.0)) throw DomainError("data has no positive component; cannot start iterations");
  const double level = flux / op.column_sums().sum();
  return ImageVector(Vector::Constant(static_cast<Eigen::Index>(op.n_params()), level), shape);
}

TrackingResult track(const ForwardOperator& op, const DataVector& y, const NoiseModel& noise,
                     SolverKind solver, std::vector<StoppingRule> rules,
                     std::optional<ImageVector> x0, int max_iter, TrackUntil until,
                     const IterateObserver& observer) {
  if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  if (!solver_matches(solver, noise)) {
    throw DomainError(std::string(to_string(solver)) + " cannot be paired with " + noise.name() +
                      " noise");
  }
  for (const auto& rule : rules) {
    if (!rule.compatible_with(noise)) {
      throw DomainError("rule " + rule.name() + " cannot be used with " + noise.name() + " noise");
    }
  }
  require_data_length(op, y);

  ImageVector start = x0 ? std::move(*x0) : flux_matched_start(op, y);
  if (start.size() != op.n_params()) {
    throw DimensionError("x0 length does not match operator M = " + std::to_string(op.n_params()));
  }

  std::optional<IsraUpdate> isra;
  std::optional<EmUpdate> em;
  if (solver == SolverKind::Isra) {
    isra.emplace(op, y);
  } else {
    em.emplace(op, y);
  }

  IterationState state = IterationState::start(op, std::move(start));
  TrackingResult result;
  result.objective_trace.reserve(static_cast<std::size_t>(max_iter) + 1);
  result.objective_trace.push_back(objective(solver, y, state.forward));
  if (observer) observer(state);

  result.rules.reserve(rules.size());
  for (auto& rule : rules) {
    rule.reset();
    rule.prime(state);
    result.rules.push_back(TrackedRule{std::move(rule), {}, std::nullopt, {}, 0});
  }

  // CBR rules and the next update both backproject a function of Hx; one
  // sweep over H serves both.
  std::optional<Vector> backprojected;
  std::size_t pending = result.rules.size();
  while (state.k < max_iter) {
    const Vector* shared = backprojected ? &*backprojected : nullptr;
    IterationState next = isra ? (*isra)(state, shared) : (*em)(state, shared);
    backprojected.reset();
    result.objective_trace.push_back(objective(solver, y, next.forward));
    if (observer) observer(next);

    std::optional<CbrTerms> terms;
    for (auto& tracked : result.rules) {
      RuleValue value;
      try {
        if (tracked.rule.is_cbr()) {
          if (!terms) {
            Vector adjoint;
            terms = cbr_terms(y, next.iterate, next.forward, op, noise,
                              isra ? isra->adjoint_input(next) : em->adjoint_input(next), adjoint);
            backprojected = std::move(adjoint);
          }
          value = tracked.rule.decide(*terms);
        } else {
          value = tracked.rule.evaluate(next, y, op, noise);
        }
      } catch (const Error& e) {
        throw NumericalError("rule " + tracked.rule.name() + " failed at k = " +
                             std::to_string(next.k) + ": " + e.what());
      }
      tracked.trace.records.push_back({next.k, value.lhs, value.rhs, value.fired});
      if (value.fired && !tracked.fired_at) {
        tracked.fired_at = next.k;
        tracked.selected = tracked.rule.lookback() > 0 ? state.iterate : next.iterate;
        tracked.selected_iteration = next.k - tracked.rule.lookback();
        --pending;
      }
    }
    state = std::move(next);
    if (until == TrackUntil::AllFired && pending == 0 && !result.rules.empty()) break;
  }

  for (auto& tracked : result.rules) {
    if (!tracked.fired_at) {
      tracked.selected = state.iterate;
      tracked.selected_iteration = state.k;
    }
  }
  result.iterations = state.k;
  result.final = std::move(state.iterate);
  return result;
}

ReconstructionResult run(const ForwardOperator& op, const DataVector& y, const NoiseModel& noise,
                         SolverKind solver, StoppingRule rule, std::optional<ImageVector> x0,
                         int max_iter) {
  std::vector<StoppingRule> rules;
  rules.push_back(std::move(rule));
  TrackingResult tracked =
      track(op, y, noise, solver, std::move(rules), std::move(x0), max_iter, TrackUntil::AllFired);
  TrackedRule& outcome = tracked.rules.front();

  ReconstructionResult result;
  result.final = std::move(tracked.final);
  result.stop_iteration = tracked.iterations;
  result.stop_reason = outcome.fired_at ? StopReason::RuleFired : StopReason::MaxIterations;
  result.objective_trace = std::move(tracked.objective_trace);
  result.rule_trace = std::move(outcome.trace);
  result.selected = std::move(outcome.selected);
  result.selected_iteration = outcome.selected_iteration;
  return result;
}

}  // namespace cbr
