#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

namespace robustfair {

/// Joint counts of (label, prediction, sensitive attribute), all binary.
struct GroupCounts {
  std::int64_t n[2][2][2] = {};  // n[y][yhat][s]
  std::int64_t total = 0;

  std::int64_t group_size(int s) const;
  std::int64_t positive_preds(int s) const;          // #(yhat=1, s)
  std::int64_t label_count(int y, int s) const;      // #(y, s)
  std::int64_t pred_count(int yhat, int s) const;    // #(yhat, s)
};

GroupCounts tally(std::span<const int> preds, std::span<const int> labels,
                  std::span<const int> sensitive);

/// A fairness gap, or empty when a conditioning group has no samples.
/// Defined gaps are computed from integer counts as
///   |n1*d0 - n0*d1| / (d1*d0)
/// so two computations from equal counts produce bit-identical doubles.
using Gap = std::optional<double>;

Gap make_gap(std::int64_t num1, std::int64_t den1, std::int64_t num0, std::int64_t den0);

/// | P(yhat=1 | s=1) - P(yhat=1 | s=0) |
Gap independence_gap(const GroupCounts& c);

/// Per true label y: | P(yhat=1 | Y=y, s=1) - P(yhat=1 | Y=y, s=0) |,
/// returned as (gap at Y=0, gap at Y=1).
std::pair<Gap, Gap> separation_gaps(const GroupCounts& c);

/// Per prediction yhat: | P(Y=1 | yhat, s=1) - P(Y=1 | yhat, s=0) |,
/// returned as (gap at yhat=0, gap at yhat=1).
std::pair<Gap, Gap> sufficiency_gaps(const GroupCounts& c);

struct FairnessReport {
  Gap independence;
  Gap separation_y0, separation_y1;
  Gap sufficiency_yhat0, sufficiency_yhat1;
};

/// All five gaps at once. strict = true turns any undefined gap into a
/// ValidationError instead of an empty value.
FairnessReport report_from_counts(const GroupCounts& c, bool strict = false);
FairnessReport fairness_report(std::span<const int> preds, std::span<const int> labels,
                               std::span<const int> sensitive, bool strict = false);

}  // namespace robustfair
