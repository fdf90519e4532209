#include "robustfair/fairness.hpp"

#include <cmath>
#include <cstdlib>
#include <tuple>

#include "robustfair/errors.hpp"

namespace robustfair {

std::int64_t GroupCounts::group_size(int s) const {
  return n[0][0][s] + n[0][1][s] + n[1][0][s] + n[1][1][s];
}

std::int64_t GroupCounts::positive_preds(int s) const { return n[0][1][s] + n[1][1][s]; }

std::int64_t GroupCounts::label_count(int y, int s) const { return n[y][0][s] + n[y][1][s]; }

std::int64_t GroupCounts::pred_count(int yhat, int s) const {
  return n[0][yhat][s] + n[1][yhat][s];
}

GroupCounts tally(std::span<const int> preds, std::span<const int> labels,
                  std::span<const int> sensitive) {
  if (preds.size() != labels.size() || preds.size() != sensitive.size())
    throw ValidationError("tally: sequences have different lengths");
  if (preds.empty()) throw ValidationError("tally: empty input");

  GroupCounts c;
  for (size_t i = 0; i < preds.size(); ++i) {
    const int yhat = preds[i];
    const int y = labels[i];
    const int s = sensitive[i];
    if ((yhat | y | s) & ~1)
      throw ValidationError("tally: values must be 0 or 1");
    ++c.n[y][yhat][s];
  }
  c.total = static_cast<std::int64_t>(preds.size());
  return c;
}

Gap make_gap(std::int64_t num1, std::int64_t den1, std::int64_t num0, std::int64_t den0) {
  if (den1 == 0 || den0 == 0) return std::nullopt;
  const std::int64_t cross = std::llabs(num1 * den0 - num0 * den1);
  return static_cast<double>(cross) / static_cast<double>(den1 * den0);
}

Gap independence_gap(const GroupCounts& c) {
  return make_gap(c.positive_preds(1), c.group_size(1), c.positive_preds(0), c.group_size(0));
}

std::pair<Gap, Gap> separation_gaps(const GroupCounts& c) {
  return {make_gap(c.n[0][1][1], c.label_count(0, 1), c.n[0][1][0], c.label_count(0, 0)),
          make_gap(c.n[1][1][1], c.label_count(1, 1), c.n[1][1][0], c.label_count(1, 0))};
}

std::pair<Gap, Gap> sufficiency_gaps(const GroupCounts& c) {
  return {make_gap(c.n[1][0][1], c.pred_count(0, 1), c.n[1][0][0], c.pred_count(0, 0)),
          make_gap(c.n[1][1][1], c.pred_count(1, 1), c.n[1][1][0], c.pred_count(1, 0))};
}

FairnessReport report_from_counts(const GroupCounts& c, bool strict) {
  FairnessReport r;
  r.independence = independence_gap(c);
  std::tie(r.separation_y0, r.separation_y1) = separation_gaps(c);
  std::tie(r.sufficiency_yhat0, r.sufficiency_yhat1) = sufficiency_gaps(c);
  if (strict) {
    if (!r.independence || !r.separation_y0 || !r.separation_y1 || !r.sufficiency_yhat0 ||
        !r.sufficiency_yhat1)
      throw ValidationError("fairness_report: undefined gap in strict mode");
  }
  return r;
}

FairnessReport fairness_report(std::span<const int> preds, std::span<const int> labels,
                               std::span<const int> sensitive, bool strict) {
  return report_from_counts(tally(preds, labels, sensitive), strict);
}

}  // namespace robustfair
