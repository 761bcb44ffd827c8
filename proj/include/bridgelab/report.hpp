#pragma once

#include <string>
#include <vector>

namespace bridgelab {

/// Saturation floor for rate fits and ratio checks.
inline constexpr double kSaturationFloor = 1e-14;

struct Row {
  int step = 0;
  std::string metric;
  double value = 0.0;
};

struct Verdict {
  std::string check;
  bool pass = true;
  double worst = 0.0;
  std::string note;
};

/// Per-step diagnostic rows plus pass/fail verdicts.
struct Report {
  std::vector<Row> rows;
  std::vector<Verdict> verdicts;

  void add(int step, std::string metric, double value) { rows.push_back({step, std::move(metric), value}); }
  void verdict(std::string check, bool pass, double worst, std::string note = {}) {
    verdicts.push_back({std::move(check), pass, worst, std::move(note)});
  }
  void append(const Report& other);
  bool all_pass() const;
  const Verdict* find(const std::string& check) const;
};

struct RateFit {
  bool available = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Least-squares slope of log(value) against n. The window stops at the first value below
/// the saturation floor; fewer than `min_points` usable points leaves the fit unavailable.
RateFit fit_rate(const std::vector<std::pair<int, double>>& series, double floor = kSaturationFloor,
                 int min_points = 5);

}  // namespace bridgelab
