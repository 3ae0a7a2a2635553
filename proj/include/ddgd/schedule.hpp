#pragma once

#include <string>

namespace ddgd {

enum class ScheduleKind {
  inverse_sqrt,  // a / sqrt(k+1)
  inverse,       // a / (k+1)
  inverse_pow,   // a / (k+1)^q
};

enum class PersistenceVerdict {
  satisfies_both,      // sum alpha = inf and sum alpha^2 < inf
  diverging_sum_only,  // sum alpha = inf but sum alpha^2 = inf too
  neither,             // sum alpha < inf
};

/// Diminishing step-size sequence alpha_k = scale / (k+1)^q.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::inverse_sqrt;
  double scale = 1.0;
  double exponent = 0.5;  // only used by inverse_pow

  static StepSchedule inverse_sqrt(double scale = 1.0);
  static StepSchedule inverse(double scale = 1.0);
  static StepSchedule inverse_pow(double scale, double exponent);

  double effective_exponent() const;
};

double alpha(const StepSchedule& s, long k);

/// Analytic p-series classification of the persistence conditions by the
/// decay exponent q: q in (0.5, 1] satisfies both, q <= 0.5 only has the
/// diverging sum, q > 1 has neither.
PersistenceVerdict persistence_check(const StepSchedule& s);

std::string to_string(ScheduleKind kind);
std::string to_string(PersistenceVerdict verdict);

}  // namespace ddgd
