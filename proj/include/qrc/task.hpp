#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qrc/random.hpp"

namespace qrc {

// Uniform input density on [lower, upper].
struct InputDistribution {
  double lower = -1.0;
  double upper = 1.0;

  void validate() const;
  double density() const { return 1.0 / (upper - lower); }
  double sample(RandomStream& stream) const { return stream.uniform(lower, upper); }
};

// Target function f*(u). Copyable; holds a shared callable.
class Target {
 public:
  Target(std::string name, std::function<double(double)> fn, std::vector<double> discontinuities = {});

  // Sgn(u) = -1 for u < 0 and +1 for u >= 0.
  static Target sgn();
  // Piecewise-linear interpolation through (u_i, f_i), constant beyond the ends.
  static Target tabulated(std::vector<double> u, std::vector<double> f, std::string name = "samples");
  // Reads a two-column CSV (u,f) with an optional header line.
  static Target from_csv(const std::string& path);

  double operator()(double u) const { return scale_ * fn_(u); }
  Target scaled(double factor) const;

  const std::string& name() const noexcept { return name_; }
  double scale() const noexcept { return scale_; }
  // Points where the target jumps; quadrature panels should break there.
  const std::vector<double>& discontinuities() const noexcept { return discontinuities_; }

 private:
  std::string name_;
  std::function<double(double)> fn_;
  std::vector<double> discontinuities_;
  double scale_ = 1.0;
};

}  // namespace qrc
