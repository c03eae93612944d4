#include "dsmgame/load_shift.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace dsm {

namespace {

void check_nonnegative(const std::vector<double>& values, const std::string& what) {
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(what + ": entries must be finite and >= 0");
    }
  }
}

}  // namespace

TargetProfile build_target(const std::vector<double>& historical_totals,
                           const std::vector<std::pair<int, double>>& multipliers) {
  check_nonnegative(historical_totals, "build_target: historical totals");
  const int horizon = static_cast<int>(historical_totals.size());
  TargetProfile out{historical_totals};
  std::vector<bool> seen(historical_totals.size(), false);
  for (const auto& [hour, factor] : multipliers) {
    if (hour < 1 || hour > horizon) {
      throw ValidationError("build_target: hour " + std::to_string(hour) +
                            " outside 1.." + std::to_string(horizon));
    }
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
      throw ValidationError("build_target: negative factor at hour " + std::to_string(hour));
    }
    if (seen[hour - 1]) {
      throw ValidationError("build_target: duplicate multiplier for hour " +
                            std::to_string(hour));
    }
    seen[hour - 1] = true;
    out.target[hour - 1] = factor * historical_totals[hour - 1];
  }
  return out;
}

std::vector<int> participants_at(const JointAction& action, int hour, int sentinel) {
  if (hour < 1) throw ValidationError("participants_at: hour must be >= 1");
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(action.start_hour.size()); ++i) {
    const int a = action.start_hour[i];
    if (a != sentinel && a <= hour) out.push_back(i);
  }
  return out;
}

DsmSchedule shift_schedule(const std::vector<LoadProfile>& profiles,
                           const TargetProfile& target, const ShiftParams& params,
                           const JointAction& action) {
  const int n = static_cast<int>(profiles.size());
  const int horizon = static_cast<int>(target.target.size());
  if (horizon < 2) throw ValidationError("shift_schedule: horizon must be >= 2");
  if (static_cast<int>(params.gamma.size()) != n ||
      static_cast<int>(action.start_hour.size()) != n) {
    throw ValidationError("shift_schedule: profiles, gamma and action sizes differ");
  }
  if (!(params.price_scale > 0.0)) {
    throw ValidationError("shift_schedule: price scale must be > 0");
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(profiles[i].demand.size()) != horizon) {
      throw ValidationError("shift_schedule: profile '" + profiles[i].customer_id +
                            "' has " + std::to_string(profiles[i].demand.size()) +
                            " hours, target has " + std::to_string(horizon));
    }
    check_nonnegative(profiles[i].demand, "shift_schedule: demand of '" + profiles[i].customer_id + "'");
    if (!(params.gamma[i] > 0.0 && params.gamma[i] <= 1.0)) {
      throw ValidationError("shift_schedule: gamma must lie in (0,1]");
    }
    const int a = action.start_hour[i];
    if (a != params.sentinel_action && (a < 1 || a > horizon)) {
      throw ValidationError("shift_schedule: start hour " + std::to_string(a) +
                            " outside 1.." + std::to_string(horizon));
    }
  }
  check_nonnegative(target.target, "shift_schedule: target");

  DsmSchedule sched;
  sched.shifted.assign(n, std::vector<double>(horizon, 0.0));
  sched.reduction.assign(n, std::vector<double>(horizon, 0.0));
  sched.total_load.assign(horizon, 0.0);
  sched.baseline_total.assign(horizon, 0.0);
  for (int h = 0; h < horizon; ++h) {
    double d = 0.0;
    for (int i = 0; i < n; ++i) d += profiles[i].demand[h];
    sched.baseline_total[h] = d;
  }

  std::vector<bool> participates(n, false);
  for (int hour = 1; hour <= horizon; ++hour) {
    const int h = hour - 1;
    double carry = 0.0;
    if (hour >= 2) {
      for (int i = 0; i < n; ++i) carry += sched.reduction[i][h - 1];
    }
    sched.total_load[h] = sched.baseline_total[h] + carry;
    if (hour == horizon) break;  // the last hour only absorbs carry

    int active = 0;
    for (int i = 0; i < n; ++i) {
      participates[i] = action.start_hour[i] != params.sentinel_action &&
                        action.start_hour[i] <= hour;
      if (participates[i]) ++active;
    }
    if (active == 0 || !(target.target[h] < sched.total_load[h])) continue;

    double nonparticipating = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!participates[i]) nonparticipating += profiles[i].demand[h];
    }
    const double suggested = (target.target[h] - nonparticipating) / active;
    for (int i = 0; i < n; ++i) {
      if (!participates[i]) continue;
      const double excess = profiles[i].demand[h] - suggested;
      if (excess <= 0.0) continue;
      const double incoming = hour >= 2 ? sched.reduction[i][h - 1] : 0.0;
      const double available = profiles[i].demand[h] + incoming;
      sched.reduction[i][h] = std::min(params.gamma[i] * excess, available);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < horizon; ++h) {
      const double incoming = h >= 1 ? sched.reduction[i][h - 1] : 0.0;
      const double outgoing = h < horizon - 1 ? sched.reduction[i][h] : 0.0;
      sched.shifted[i][h] = (profiles[i].demand[h] + incoming) - outgoing;
      assert(sched.shifted[i][h] >= 0.0);
    }
  }
  return sched;
}

double price(double total_at_hour, double own_at_hour, double price_scale) {
  assert(own_at_hour >= 0.0 && total_at_hour >= own_at_hour);
  if (total_at_hour <= 0.0) return 0.0;
  return price_scale * own_at_hour / total_at_hour;
}

double bill(const DsmSchedule& schedule, int customer, double price_scale) {
  if (customer < 0 || customer >= static_cast<int>(schedule.shifted.size())) {
    throw ValidationError("bill: customer index out of range");
  }
  return bill_all(schedule, price_scale)[customer];
}

std::vector<double> bill_all(const DsmSchedule& schedule, double price_scale) {
  const int n = static_cast<int>(schedule.shifted.size());
  const int horizon = static_cast<int>(schedule.total_load.size());
  std::vector<double> out(n, 0.0);
  for (int h = 0; h < horizon; ++h) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += schedule.shifted[i][h];
    if (total <= 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const double own = schedule.shifted[i][h];
      out[i] += price_scale * own * own / total;
    }
  }
  return out;
}

}  // namespace dsm
