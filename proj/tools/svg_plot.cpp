#include "svg_plot.hpp"

#include <cstdio>
#include <sstream>

namespace vruik::cli {

namespace {

const char* track_color(ObjectClass c) {
  switch (c) {
    case ObjectClass::person: return "#1f77b4";
    case ObjectClass::bicycle: return "#2ca02c";
    case ObjectClass::cyclist: return "#ff7f0e";
  }
  return "#000000";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

void rect(std::ostringstream& os, const BoundingBox& b, double s, const char* stroke, const char* dash) {
  os << "  <rect x=\"" << num(b.x1 * s) << "\" y=\"" << num(b.y1 * s) << "\" width=\"" << num(b.width() * s)
     << "\" height=\"" << num(b.height() * s) << "\" fill=\"none\" stroke=\"" << stroke << "\"";
  if (dash) os << " stroke-dasharray=\"" << dash << "\"";
  os << "/>\n";
}

void objects(std::ostringstream& os, const std::map<std::string, ObjectAnnotation>& objs, const std::string& prefix,
             double s) {
  for (const auto& [id, o] : objs) {
    rect(os, o.box, s, "#d62728", "6,3");
    std::string label = prefix + id;
    if (o.intent) label += ": " + std::string(to_string(o.intent->lateral)) + ", " + std::string(to_string(o.intent->vertical));
    if (o.position) label += " (" + std::string(to_string(*o.position)) + ")";
    os << "  <text x=\"" << num(o.box.x1 * s) << "\" y=\"" << num(o.box.y1 * s - 4)
       << "\" font-size=\"12\" fill=\"#d62728\">" << escape(label) << "</text>\n";
  }
}

}  // namespace

std::string render_svg(const std::vector<Track>& tracks, const SceneAnnotation* sample, FrameSize frame,
                       double scale) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(frame.width * scale) << "\" height=\""
     << num(frame.height * scale) << "\">\n";
  os << "  <rect x=\"0\" y=\"0\" width=\"" << num(frame.width * scale) << "\" height=\"" << num(frame.height * scale)
     << "\" fill=\"#f7f7f7\" stroke=\"#999999\"/>\n";
  for (const auto& t : tracks) {
    if (t.observations.empty()) continue;
    const char* color = track_color(t.object_class);
    os << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& obs : t.observations) {
      const auto c = center(obs.box);
      os << num(c.x * scale) << "," << num(c.y * scale) << " ";
    }
    os << "\"/>\n";
    const auto& last = t.observations.back();
    rect(os, last.box, scale, color, nullptr);
    os << "  <text x=\"" << num(last.box.x1 * scale) << "\" y=\"" << num(last.box.y2 * scale + 12)
       << "\" font-size=\"11\" fill=\"" << color << "\">" << escape(t.id) << "</text>\n";
  }
  if (sample) {
    objects(os, sample->pedestrians, "P", scale);
    objects(os, sample->cyclists, "C", scale);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace vruik::cli
