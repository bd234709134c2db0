#pragma once

// Quantitative check records shared by the library checks and the CLI reporting.

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace bosekit {

struct CheckReport {
  std::string name;
  std::string claim;  // self-describing statement of the asserted property
  std::vector<std::pair<std::string, double>> parameters;
  double value = 0.0;      // measured quantity (defect, norm, gap)
  double bound = 0.0;      // reference the value is compared against
  double tolerance = 0.0;  // pass ⇔ value ≤ bound + tolerance
  bool pass = false;
  double runtime_ms = 0.0;
};

inline CheckReport make_report(std::string name, std::string claim, double value, double bound,
                               double tolerance) {
  CheckReport r;
  r.name = std::move(name);
  r.claim = std::move(claim);
  r.value = value;
  r.bound = bound;
  r.tolerance = tolerance;
  r.pass = value <= bound + tolerance;
  return r;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(now - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace bosekit
