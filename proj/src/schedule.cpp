#include "ddgd/schedule.hpp"

#include <cmath>

#include "ddgd/errors.hpp"

namespace ddgd {

namespace {

void validate(const StepSchedule& s) {
  if (s.scale <= 0.0) throw InputError("schedule scale must be positive");
  if (s.kind == ScheduleKind::inverse_pow && s.exponent <= 0.0) {
    throw InputError("schedule exponent must be positive");
  }
}

}  // namespace

StepSchedule StepSchedule::inverse_sqrt(double scale) {
  StepSchedule s{ScheduleKind::inverse_sqrt, scale, 0.5};
  validate(s);
  return s;
}

StepSchedule StepSchedule::inverse(double scale) {
  StepSchedule s{ScheduleKind::inverse, scale, 1.0};
  validate(s);
  return s;
}

StepSchedule StepSchedule::inverse_pow(double scale, double exponent) {
  StepSchedule s{ScheduleKind::inverse_pow, scale, exponent};
  validate(s);
  return s;
}

double StepSchedule::effective_exponent() const {
  switch (kind) {
    case ScheduleKind::inverse_sqrt:
      return 0.5;
    case ScheduleKind::inverse:
      return 1.0;
    case ScheduleKind::inverse_pow:
      return exponent;
  }
  return exponent;
}

double alpha(const StepSchedule& s, long k) {
  if (k < 0) throw InputError("iteration index must be nonnegative");
  validate(s);
  const double base = static_cast<double>(k) + 1.0;
  switch (s.kind) {
    case ScheduleKind::inverse_sqrt:
      return s.scale / std::sqrt(base);
    case ScheduleKind::inverse:
      return s.scale / base;
    case ScheduleKind::inverse_pow:
      return s.scale / std::pow(base, s.exponent);
  }
  return 0.0;
}

PersistenceVerdict persistence_check(const StepSchedule& s) {
  validate(s);
  const double q = s.effective_exponent();
  if (q > 1.0) return PersistenceVerdict::neither;
  if (q > 0.5) return PersistenceVerdict::satisfies_both;
  return PersistenceVerdict::diverging_sum_only;
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::inverse_sqrt:
      return "inverse_sqrt";
    case ScheduleKind::inverse:
      return "inverse";
    case ScheduleKind::inverse_pow:
      return "inverse_pow";
  }
  return "?";
}

std::string to_string(PersistenceVerdict verdict) {
  switch (verdict) {
    case PersistenceVerdict::satisfies_both:
      return "satisfies_both";
    case PersistenceVerdict::diverging_sum_only:
      return "diverging_sum_only";
    case PersistenceVerdict::neither:
      return "neither";
  }
  return "?";
}

}  // namespace ddgd
