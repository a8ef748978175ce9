#include "qrc/task.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "qrc/error.hpp"

namespace qrc {

void InputDistribution::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw ValidationError("input distribution needs finite lower < upper");
  }
}

Target::Target(std::string name, std::function<double(double)> fn, std::vector<double> discontinuities)
    : name_(std::move(name)), fn_(std::move(fn)), discontinuities_(std::move(discontinuities)) {
  if (!fn_) throw ValidationError("target function is empty");
}

Target Target::sgn() {
  return Target("sgn", [](double u) { return u >= 0.0 ? 1.0 : -1.0; }, {0.0});
}

Target Target::tabulated(std::vector<double> u, std::vector<double> f, std::string name) {
  if (u.size() != f.size() || u.size() < 2) throw ValidationError("tabulated target needs >= 2 (u, f) pairs");
  std::vector<std::size_t> order(u.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
  auto xs = std::make_shared<std::vector<double>>();
  auto ys = std::make_shared<std::vector<double>>();
  for (std::size_t i : order) {
    if (!std::isfinite(u[i]) || !std::isfinite(f[i])) throw ValidationError("tabulated target has non-finite values");
    if (!xs->empty() && u[i] == xs->back()) throw ValidationError("tabulated target has duplicate u values");
    xs->push_back(u[i]);
    ys->push_back(f[i]);
  }
  return Target(std::move(name), [xs, ys](double v) {
    if (v <= xs->front()) return ys->front();
    if (v >= xs->back()) return ys->back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs->begin(), xs->end(), v) - xs->begin());
    const std::size_t lo = hi - 1;
    const double t = (v - (*xs)[lo]) / ((*xs)[hi] - (*xs)[lo]);
    return (1.0 - t) * (*ys)[lo] + t * (*ys)[hi];
  });
}

Target Target::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open target samples file: " + path);
  std::vector<double> u, f;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double a = 0.0, b = 0.0;
    if (!(fields >> a >> b)) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ValidationError("malformed line in target samples file " + path + ": " + line);
    }
    first = false;
    u.push_back(a);
    f.push_back(b);
  }
  return tabulated(std::move(u), std::move(f), "samples:" + path);
}

Target Target::scaled(double factor) const {
  Target copy = *this;
  copy.scale_ *= factor;
  return copy;
}

}  // namespace qrc
