#include "bridgelab/report.hpp"

#include <cmath>

namespace bridgelab {

void Report::append(const Report& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  verdicts.insert(verdicts.end(), other.verdicts.begin(), other.verdicts.end());
}

bool Report::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

const Verdict* Report::find(const std::string& check) const {
  for (const auto& v : verdicts)
    if (v.check == check) return &v;
  return nullptr;
}

RateFit fit_rate(const std::vector<std::pair<int, double>>& series, double floor, int min_points) {
  std::vector<double> xs, ys;
  for (const auto& [n, value] : series) {
    if (!(value >= floor) || !std::isfinite(value)) break;
    xs.push_back(n);
    ys.push_back(std::log(value));
  }
  RateFit fit;
  fit.points = static_cast<int>(xs.size());
  if (fit.points < min_points) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.available = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace bridgelab
