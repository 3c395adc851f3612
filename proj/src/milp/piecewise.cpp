#include "mgrid/error.hpp"
#include "mgrid/milp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mgrid::milp {

PiecewiseEncoding encode_piecewise(MilpProblem& problem, VarId x, const PiecewiseCurve& curve,
                                   PiecewiseForm form, const std::string& name) {
  const auto& xv = problem.variable(x);
  if (xv.lower < curve.x_min() || xv.upper > curve.x_max()) {
    std::ostringstream msg;
    msg << "variable " << xv.name << " bounds [" << xv.lower << ", " << xv.upper << "] leave the curve domain ["
        << curve.x_min() << ", " << curve.x_max() << "]";
    throw InputError(msg.str());
  }
  const auto pts = curve.points();
  double y_lo = pts.front().y;
  double y_hi = pts.front().y;
  double magnitude = 0.0;
  for (const auto& p : pts) {
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
    magnitude = std::max({magnitude, std::abs(p.x), std::abs(p.y)});
  }
  // Activation rows are only valid when M covers every coordinate the
  // deactivated segments could be asked to absorb.
  if (form == PiecewiseForm::BigM && (magnitude > kBigM || (curve.x_max() - curve.x_min()) > kBigM ||
                                      (y_hi - y_lo) > kBigM)) {
    std::ostringstream msg;
    msg << "curve values up to " << magnitude << " are not dominated by Big-M = " << kBigM
        << "; rescale the curve before encoding";
    throw InputError(msg.str());
  }

  PiecewiseEncoding enc;
  enc.y = problem.add_variable(y_lo, y_hi, VarKind::Continuous, name + "_y");
  const std::size_t segs = curve.segments();
  std::vector<Term> choose;
  for (std::size_t b = 0; b < segs; ++b) {
    enc.segment.push_back(problem.add_binary(name + "_z" + std::to_string(b)));
    enc.weight.push_back(problem.add_variable(0.0, 1.0, VarKind::Continuous, name + "_w" + std::to_string(b)));
    choose.push_back({enc.segment.back(), 1.0});
  }
  problem.add_constraint(std::move(choose), Sense::Equal, 1.0, name + "_one");
  std::vector<double> order;
  for (std::size_t b = 0; b < segs; ++b) order.push_back(0.5 * (pts[b].x + pts[b + 1].x));
  if (segs >= 2) problem.add_sos1(enc.segment, std::move(order));

  if (form == PiecewiseForm::ConvexCombination) {
    std::vector<Term> x_row{{x, 1.0}};
    std::vector<Term> y_row{{enc.y, 1.0}};
    for (std::size_t b = 0; b < segs; ++b) {
      const auto& lo = pts[b];
      const auto& hi = pts[b + 1];
      problem.add_constraint({{enc.weight[b], 1.0}, {enc.segment[b], -1.0}}, Sense::LessEqual, 0.0,
                             name + "_act" + std::to_string(b));
      x_row.push_back({enc.segment[b], -lo.x});
      x_row.push_back({enc.weight[b], -(hi.x - lo.x)});
      y_row.push_back({enc.segment[b], -lo.y});
      y_row.push_back({enc.weight[b], -(hi.y - lo.y)});
    }
    problem.add_constraint(std::move(x_row), Sense::Equal, 0.0, name + "_x");
    problem.add_constraint(std::move(y_row), Sense::Equal, 0.0, name + "_yd");
    return enc;
  }

  for (std::size_t b = 0; b < segs; ++b) {
    const auto& lo = pts[b];
    const auto& hi = pts[b + 1];
    const auto tag = std::to_string(b);
    // |x - (lo.x + dx w_b)| <= M (1 - z_b), same for y.
    problem.add_constraint({{x, 1.0}, {enc.weight[b], -(hi.x - lo.x)}, {enc.segment[b], kBigM}}, Sense::LessEqual,
                           lo.x + kBigM, name + "_xu" + tag);
    problem.add_constraint({{x, 1.0}, {enc.weight[b], -(hi.x - lo.x)}, {enc.segment[b], -kBigM}},
                           Sense::GreaterEqual, lo.x - kBigM, name + "_xl" + tag);
    problem.add_constraint({{enc.y, 1.0}, {enc.weight[b], -(hi.y - lo.y)}, {enc.segment[b], kBigM}},
                           Sense::LessEqual, lo.y + kBigM, name + "_yu" + tag);
    problem.add_constraint({{enc.y, 1.0}, {enc.weight[b], -(hi.y - lo.y)}, {enc.segment[b], -kBigM}},
                           Sense::GreaterEqual, lo.y - kBigM, name + "_yl" + tag);
  }
  return enc;
}

}  // namespace mgrid::milp
