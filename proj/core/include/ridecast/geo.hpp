#pragma once

namespace ridecast {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct LatLon {
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine(LatLon a, LatLon b);

/// Initial great-circle bearing from a to b, degrees in [0, 360).
double initial_bearing(LatLon a, LatLon b);

/// Smallest absolute angle between two bearings: min(|b-a|, 360-|b-a|).
double bearing_difference(double a_deg, double b_deg);

/// Point reached by travelling `distance_m` from `origin` on `bearing_deg`.
LatLon destination(LatLon origin, double bearing_deg, double distance_m);

}  // namespace ridecast
