#include "mgrid/forecast.hpp"

#include "mgrid/error.hpp"

#include <cmath>
#include <string>

namespace mgrid::forecast {

LoadEstimate predict_next(const LoadHistory& history) {
  if (history.essential.size() != history.regular.size()) {
    throw InputError("load history classes have different lengths");
  }
  if (history.essential.size() < 2) throw InputError("forecast needs at least two observed hours");
  const std::size_t n = history.essential.size();
  return {0.5 * (history.essential[n - 1] + history.essential[n - 2]),
          0.5 * (history.regular[n - 1] + history.regular[n - 2])};
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.empty()) throw InputError("rmse of an empty series");
  if (actual.size() != predicted.size()) {
    throw InputError("rmse length mismatch: " + std::to_string(actual.size()) + " vs " +
                     std::to_string(predicted.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

WindowLoads fill_window_loads(const scenario::ScenarioWindow& window) {
  const auto& s = *window.series;
  const std::size_t end = window.start + window.length;
  auto observed = [&](std::size_t h) { return !s.comm_loss[h] || static_cast<long>(h) <= window.known_through; };

  // Believed values from hour 0 so that gaps starting before the window are
  // carried through consistently.
  LoadHistory believed;
  believed.essential.reserve(end);
  believed.regular.reserve(end);
  WindowLoads out;
  for (std::size_t h = 0; h < end; ++h) {
    double e = s.essential_load[h];
    double r = s.regular_load[h];
    const bool predicted = !observed(h);
    if (predicted) {
      if (believed.essential.size() < 2) {
        throw InputError("hour " + std::to_string(h) + " needs a forecast but fewer than two earlier hours exist");
      }
      const auto est = predict_next(believed);
      e = est.essential;
      r = est.regular;
    }
    believed.essential.push_back(e);
    believed.regular.push_back(r);
    if (h >= window.start) {
      out.essential.push_back(e);
      out.regular.push_back(r);
      out.forecast.push_back(predicted);
    }
  }
  return out;
}

std::optional<RmseReport> comm_loss_rmse(const scenario::ScenarioTimeSeries& series) {
  std::vector<double> act_e, act_r, act_t, pred_e, pred_r, pred_t;
  for (std::size_t h = 0; h < series.hours(); ++h) {
    if (!series.comm_loss[h]) continue;
    if (h < 2) throw InputError("comm-loss hour " + std::to_string(h) + " has fewer than two earlier hours");
    LoadHistory hist{{series.essential_load[h - 2], series.essential_load[h - 1]},
                     {series.regular_load[h - 2], series.regular_load[h - 1]}};
    const auto est = predict_next(hist);
    act_e.push_back(series.essential_load[h]);
    act_r.push_back(series.regular_load[h]);
    act_t.push_back(series.total_load(h));
    pred_e.push_back(est.essential);
    pred_r.push_back(est.regular);
    pred_t.push_back(est.essential + est.regular);
  }
  if (act_e.empty()) return std::nullopt;
  return RmseReport{act_e.size(), rmse(act_e, pred_e), rmse(act_r, pred_r), rmse(act_t, pred_t)};
}

}  // namespace mgrid::forecast
