#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/ingest.hpp"

namespace ridecast {
namespace {

using boost::property_tree::ptree;

// Element name without any namespace prefix ("gpx:trkpt" -> "trkpt").
std::string_view local_name(const std::string& name) {
  const auto colon = name.rfind(':');
  return colon == std::string::npos ? std::string_view(name) : std::string_view(name).substr(colon + 1);
}

double coordinate(const ptree& attrs, const char* key, double limit) {
  const auto text = attrs.get_optional<std::string>(key);
  if (!text) throw Error(ErrorCode::MalformedFile, fmt::format("trkpt without '{}' attribute", key));
  const auto value = csv::parse_double(*text);
  if (!value || *value < -limit || *value > limit) {
    throw Error(ErrorCode::MalformedFile, fmt::format("trkpt {} out of range: '{}'", key, *text));
  }
  return *value;
}

void read_segment(const ptree& seg, std::vector<TrackPoint>& out) {
  for (const auto& [name, node] : seg) {
    if (local_name(name) != "trkpt") continue;
    TrackPoint p;
    const ptree empty;
    const auto& attrs = node.get_child("<xmlattr>", empty);
    p.latitude = coordinate(attrs, "lat", 90.0);
    p.longitude = coordinate(attrs, "lon", 180.0);
    for (const auto& [child, value] : node) {
      const auto tag = local_name(child);
      if (tag == "ele") {
        p.altitude = csv::parse_double(value.data());
      } else if (tag == "time") {
        p.timestamp = parse_datetime(value.data());
      }
    }
    if (p.timestamp && !out.empty() && out.back().timestamp && *p.timestamp < *out.back().timestamp) {
      throw Error(ErrorCode::MalformedFile, "track timestamps go backwards");
    }
    out.push_back(p);
  }
}

}  // namespace

std::vector<TrackPoint> parse_gpx(std::string_view bytes) {
  ptree tree;
  try {
    std::istringstream in{std::string(bytes)};
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw Error(ErrorCode::MalformedFile, e.what());
  }
  const ptree* root = nullptr;
  for (const auto& [name, node] : tree) {
    if (local_name(name) == "gpx") root = &node;
  }
  if (!root) throw Error(ErrorCode::MalformedFile, "document root is not <gpx>");

  std::vector<TrackPoint> points;
  try {
    for (const auto& [name, trk] : *root) {
      if (local_name(name) != "trk") continue;
      for (const auto& [seg_name, seg] : trk) {
        if (local_name(seg_name) == "trkseg") read_segment(seg, points);
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::MalformedFile, e.what());
  }
  if (points.empty()) throw Error(ErrorCode::EmptyTrack, "GPX contains no track points");
  return points;
}

std::vector<TrackPoint> read_gpx(const std::filesystem::path& path) {
  return parse_gpx(csv::read_text(path));
}

std::string write_gpx(std::span<const TrackPoint> points, std::string_view name) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<gpx version=\"1.1\" creator=\"ridecast\" xmlns=\"http://www.topografix.com/GPX/1/1\">\n";
  out += fmt::format("  <trk>\n    <name>{}</name>\n    <trkseg>\n", name);
  for (const auto& p : points) {
    out += fmt::format("      <trkpt lat=\"{}\" lon=\"{}\">", csv::format_double(p.latitude),
                       csv::format_double(p.longitude));
    if (p.altitude) out += fmt::format("<ele>{}</ele>", csv::format_double(*p.altitude));
    if (p.timestamp) out += fmt::format("<time>{}</time>", format_datetime(*p.timestamp));
    out += "</trkpt>\n";
  }
  out += "    </trkseg>\n  </trk>\n</gpx>\n";
  return out;
}

}  // namespace ridecast
