#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dsm {

// Thrown on any invalid input (bad dimensions, out-of-range parameters,
// malformed files). The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// One customer's hourly baseline demand in kWh, hours 1..H.
struct LoadProfile {
  std::string customer_id;
  std::vector<double> demand;
};

// Per-hour demand level the utility wants the grid to stay under, in kWh.
struct TargetProfile {
  std::vector<double> target;
};

// Parameters of the load shifting mechanism. `gamma[i]` in (0,1] is the
// fraction of its excess-over-average demand that customer i sheds at an
// over-target hour. `sentinel_action` is the start-hour value that encodes
// "do not participate" (conventionally the last hour H).
struct ShiftParams {
  std::vector<double> gamma;
  double price_scale = 1.0;
  int sentinel_action = 24;
};

// One start hour per customer (1-based). A customer participates from its
// start hour onward; the sentinel value opts out entirely.
struct JointAction {
  std::vector<int> start_hour;
};

// Result of running the shifting cascade for one joint action.
//
// `reduction[i][h]` is what customer i sheds at hour h+1 and carries into the
// next hour; `shifted[i][h]` is its resulting demand; `total_load[h]` is the
// hourly total including carry-over and `baseline_total[h]` the total before
// any shifting. All in kWh.
struct DsmSchedule {
  std::vector<std::vector<double>> shifted;    // y, N x H
  std::vector<std::vector<double>> reduction;  // r, N x H
  std::vector<double> total_load;              // per hour, with carry-over
  std::vector<double> baseline_total;          // per hour, before shifting
};

// Applies `factor` to the historical total at each listed hour, leaving the
// other hours untouched. Hours are 1-based; duplicate or out-of-range hours
// and negative factors are rejected.
TargetProfile build_target(const std::vector<double>& historical_totals,
                           const std::vector<std::pair<int, double>>& multipliers);

// Customers participating at hour h: start_hour <= h and not the sentinel.
// Returned indices are 0-based and sorted.
std::vector<int> participants_at(const JointAction& action, int hour, int sentinel);

// Runs the hour-by-hour cascade: at every over-target hour each participant
// sheds gamma * (demand - suggested average)^+ of its demand, clamped so the
// shifted demand stays nonnegative, and the shed amount is carried into the
// next hour. The final hour only absorbs carry, so each customer's daily
// total is conserved.
DsmSchedule shift_schedule(const std::vector<LoadProfile>& profiles,
                           const TargetProfile& target, const ShiftParams& params,
                           const JointAction& action);

// Proportional price per unit: scale * own / total, 0 when the hour is idle.
double price(double total_at_hour, double own_at_hour, double price_scale);

// Customer's one-day payment under a schedule: sum over hours of
// price(total, own) * own.
double bill(const DsmSchedule& schedule, int customer, double price_scale);

// Bills of all customers at once (shares the per-hour totals).
std::vector<double> bill_all(const DsmSchedule& schedule, double price_scale);

}  // namespace dsm
