#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "vruik/error.hpp"
#include "vruik/pipeline.hpp"

namespace vruik {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    // from_chars has no fraction syntax; accept "1/3" for the position boundaries.
    const auto slash = v.find('/');
    if (slash != std::string::npos)
      return to_double(key, trim(v.substr(0, slash))) / to_double(key, trim(v.substr(slash + 1)));
    throw InvalidInput("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw InvalidInput("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::vector<int> to_int_list(const std::string& key, std::string v) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw InvalidInput("config key '" + key + "': expected a list like [5, 10, 15]");
  v = v.substr(1, v.size() - 2);
  std::vector<int> out;
  std::stringstream in(v);
  for (std::string item; std::getline(in, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_int(key, item));
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

std::map<std::string, Setter> setters() {
  auto real = [](double PipelineConfig::*field) {
    return Setter([field](PipelineConfig& c, const std::string& k, const std::string& v) { c.*field = to_double(k, v); });
  };
  std::map<std::string, Setter> s;
  s["theta_iou"] = real(&PipelineConfig::theta_iou);
  s["dedup_iou"] = real(&PipelineConfig::dedup_iou);
  s["region_margin_frac"] = real(&PipelineConfig::region_margin_frac);
  s["block_size"] = [](PipelineConfig& c, const std::string& k, const std::string& v) { c.block_size = to_int(k, v); };
  s["search_radius"] = [](PipelineConfig& c, const std::string& k, const std::string& v) { c.search_radius = to_int(k, v); };
  s["frame.width"] = [](PipelineConfig& c, const std::string& k, const std::string& v) { c.frame.width = to_int(k, v); };
  s["frame.height"] = [](PipelineConfig& c, const std::string& k, const std::string& v) { c.frame.height = to_int(k, v); };
  s["key_frame"] = [](PipelineConfig& c, const std::string& k, const std::string& v) { c.key_frame = to_int(k, v); };
  s["flow_source"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
    if (v == "precomputed") c.flow_source = FlowSource::precomputed;
    else if (v == "block_matching") c.flow_source = FlowSource::block_matching;
    else throw InvalidInput("config key '" + k + "': expected precomputed or block_matching");
  };
  s["aggregator"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
    if (v == "median") c.aggregator = FlowAggregator::median;
    else if (v == "mean") c.aggregator = FlowAggregator::mean;
    else throw InvalidInput("config key '" + k + "': expected median or mean");
  };

#define VRUIK_REAL(section, member)                                                         \
  s[#section "." #member] = [](PipelineConfig& c, const std::string& k, const std::string& v) { \
    c.section.member = to_double(k, v);                                                     \
  }
#define VRUIK_INT(section, member)                                                          \
  s[#section "." #member] = [](PipelineConfig& c, const std::string& k, const std::string& v) { \
    c.section.member = to_int(k, v);                                                        \
  }
  VRUIK_REAL(curation, min_height_frac);
  VRUIK_REAL(curation, min_width_frac);
  VRUIK_REAL(curation, min_visible_frac);
  VRUIK_INT(curation, max_per_class);
  VRUIK_REAL(curation, cyclist_pair_iou);
  VRUIK_REAL(curation, cyclist_max_vertical_offset_px);
  VRUIK_REAL(link, w_s);
  VRUIK_REAL(link, w_t);
  VRUIK_REAL(link, d_base);
  VRUIK_REAL(link, d_per_frame);
  VRUIK_INT(link, t_max);
  VRUIK_REAL(link, theta_short);
  VRUIK_REAL(link, theta_long);
  VRUIK_INT(link, short_gap_frames);
  VRUIK_INT(link, motion_fit_window);
  VRUIK_REAL(intent, lateral_deadband_px);
  VRUIK_REAL(intent, lateral_deadband_frac_of_width);
  VRUIK_REAL(intent, vertical_scale_ratio_eps);
  VRUIK_REAL(intent, vertical_deadband_px);
  VRUIK_INT(intent, min_track_len);
  VRUIK_REAL(intent, left_boundary_frac);
  VRUIK_REAL(intent, right_boundary_frac);
#undef VRUIK_REAL
#undef VRUIK_INT
  s["intent.windows"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
    c.intent.windows = to_int_list(k, v);
  };
  return s;
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text, PipelineConfig base) {
  static const auto table = setters();
  std::istringstream in(text);
  std::string section;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    const std::string value = unquote(trim(line.substr(eq + 1)));
    auto it = table.find(key);
    if (it == table.end()) throw InvalidInput("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    it->second(base, key, value);
  }
  base.validate();
  return base;
}

}  // namespace vruik
