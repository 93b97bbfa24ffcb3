#include "ridecast/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ridecast {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap360(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  return r >= 360.0 ? 0.0 : r;
}

}  // namespace

double haversine(LatLon a, LatLon b) {
  const double phi1 = a.latitude * kDegToRad;
  const double phi2 = b.latitude * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.longitude - a.longitude) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double initial_bearing(LatLon a, LatLon b) {
  const double phi1 = a.latitude * kDegToRad;
  const double phi2 = b.latitude * kDegToRad;
  const double dlambda = (b.longitude - a.longitude) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return wrap360(std::atan2(y, x) / kDegToRad);
}

double bearing_difference(double a_deg, double b_deg) {
  const double d = std::fabs(wrap360(b_deg) - wrap360(a_deg));
  return std::min(d, 360.0 - d);
}

LatLon destination(LatLon origin, double bearing_deg, double distance_m) {
  const double delta = distance_m / kEarthRadiusM;
  const double theta = bearing_deg * kDegToRad;
  const double phi1 = origin.latitude * kDegToRad;
  const double lambda1 = origin.longitude * kDegToRad;
  const double phi2 = std::asin(std::sin(phi1) * std::cos(delta) +
                                std::cos(phi1) * std::sin(delta) * std::cos(theta));
  const double lambda2 =
      lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                           std::cos(delta) - std::sin(phi1) * std::sin(phi2));
  double lon = lambda2 / kDegToRad;
  lon = std::fmod(lon + 540.0, 360.0) - 180.0;
  return {phi2 / kDegToRad, lon};
}

}  // namespace ridecast
