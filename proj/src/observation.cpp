#include "hivpip/observation.hpp"

#include <algorithm>
#include <cmath>

namespace hivpip {

void ObservationSet::validate() const {
  if (times.size() != values.size())
    throw std::invalid_argument("ObservationSet: times/values size mismatch");
  if (times.empty())
    throw std::invalid_argument("ObservationSet: no observations");
  if (!(0.0 <= t1 && t1 < t2))
    throw std::invalid_argument("ObservationSet: need 0 <= T1 < T2");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("ObservationSet: times must increase");
  if (times.front() < t1 - 1e-9 || times.back() > t2 + 1e-9)
    throw std::invalid_argument("ObservationSet: sample outside [T1,T2]");
}

double ObservationSet::value_at(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

void SmoothnessWeight::validate() const {
  if (!(0.0 < zeta && zeta < 1.0))
    throw std::invalid_argument("SmoothnessWeight: zeta must be in (0,1)");
  if (!(t1 < t2))
    throw std::invalid_argument("SmoothnessWeight: need T1 < T2");
}

double SmoothnessWeight::at(double t) const {
  if (t < t1 || t > t2) return 0.0;
  const double rho = 0.5 * zeta * (t2 - t1);
  double x = 1.0;
  if (t < t1 + rho)
    x = (t - t1) / rho;
  else if (t > t2 - rho)
    x = (t2 - t) / rho;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

}  // namespace hivpip
