#include "vruik/formats.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vruik/error.hpp"

namespace vruik {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "flo I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.append(raw, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

BoundingBox box_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4)
    throw InvalidInput(where + ": box must be [x1, y1, x2, y2]");
  BoundingBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw InvalidInput(where + ": invalid box");
  return b;
}

ordered box_to(const BoundingBox& b) { return ordered::array({b.x1, b.y1, b.x2, b.y2}); }

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(number) + ": " + e.what(), line_offset + e.byte - 1);
    }
    fn(j, "line " + std::to_string(number));
  }
}

}  // namespace

std::string encode_flo(const FlowField& flow) {
  std::string out = "PIEH";
  put<std::int32_t>(out, flow.width());
  put<std::int32_t>(out, flow.height());
  for (const auto& v : flow.vectors()) {
    put<float>(out, v.dx);
    put<float>(out, v.dy);
  }
  return out;
}

FlowField decode_flo(const std::string& bytes) {
  if (bytes.size() < 12 || bytes.compare(0, 4, "PIEH") != 0) throw InvalidInput("not a .flo stream (bad magic)");
  const auto w = get<std::int32_t>(bytes, 4);
  const auto h = get<std::int32_t>(bytes, 8);
  if (w < 0 || h < 0) throw InvalidInput(".flo dimensions are negative");
  const std::size_t count = std::size_t(w) * std::size_t(h);
  if (bytes.size() != 12 + count * 8) throw InvalidInput(".flo payload size does not match header");
  std::vector<FlowVector> vectors(count);
  for (std::size_t i = 0; i < count; ++i) {
    vectors[i] = {get<float>(bytes, 12 + 8 * i), get<float>(bytes, 16 + 8 * i)};
  }
  return FlowField(w, h, std::move(vectors));
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(read_text_file(path)); }

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  write_text_file(path, encode_flo(flow));
}

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

GrayImage decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P5") throw InvalidInput("not a binary PGM (P5)");
  GrayImage img;
  try {
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    if (std::stoi(next_token()) != 255) throw InvalidInput("only 8-bit PGM is supported");
  } catch (const std::logic_error&) {
    throw InvalidInput("malformed PGM header");
  }
  ++pos;  // single whitespace before the raster
  const std::size_t count = std::size_t(img.width) * std::size_t(img.height);
  if (img.width <= 0 || img.height <= 0 || bytes.size() < pos + count) throw InvalidInput("truncated PGM raster");
  img.pixels.assign(bytes.begin() + std::ptrdiff_t(pos), bytes.begin() + std::ptrdiff_t(pos + count));
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(read_text_file(path)); }

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  write_text_file(path, encode_pgm(image));
}

std::vector<Track> parse_tracks(const std::string& text) {
  json doc = parse_json(text);
  if (doc.is_object()) doc = json::array({doc});
  if (!doc.is_array()) throw InvalidInput("tracks file must hold a track object or an array of them");
  std::vector<Track> tracks;
  for (const auto& j : doc) {
    try {
      Track t;
      t.id = j.at("track_id").is_string() ? j.at("track_id").get<std::string>() : j.at("track_id").dump();
      const auto cls = parse_object_class(j.at("class").get<std::string>());
      if (!cls) throw InvalidInput("track '" + t.id + "': unknown class");
      t.object_class = *cls;
      for (const auto& o : j.at("obs")) {
        t.observations.push_back(
            {o.at("frame").get<int>(), box_from(o.at("box"), "track '" + t.id + "'"), o.value("conf", 1.0)});
      }
      validate_track(t);
      tracks.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("malformed track: ") + e.what());
    }
  }
  return tracks;
}

std::string serialize_tracks(const std::vector<Track>& tracks) {
  ordered doc = ordered::array();
  for (const auto& t : tracks) {
    ordered j = ordered::object();
    j["track_id"] = t.id;
    j["class"] = std::string(to_string(t.object_class));
    ordered obs = ordered::array();
    for (const auto& o : t.observations) {
      ordered e = ordered::object();
      e["frame"] = o.frame;
      e["box"] = box_to(o.box);
      e["conf"] = o.confidence;
      obs.push_back(std::move(e));
    }
    j["obs"] = std::move(obs);
    doc.push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::vector<Track> read_tracks(const std::filesystem::path& path) { return parse_tracks(read_text_file(path)); }

void write_tracks(const std::vector<Track>& tracks, const std::filesystem::path& path) {
  write_text_file(path, serialize_tracks(tracks));
}

SynthScenario parse_scenario(const std::string& text) {
  const json j = parse_json(text);
  try {
    SynthScenario s;
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("frame")) s.frame = {j.at("frame").at(0).get<int>(), j.at("frame").at(1).get<int>()};
    s.n_frames = j.value("n_frames", s.n_frames);
    if (j.contains("camera_velocity"))
      s.camera_velocity = {j.at("camera_velocity").at(0).get<double>(), j.at("camera_velocity").at(1).get<double>()};
    s.noise_sigma = j.value("noise_sigma", 0.0);
    for (const auto& a : j.at("agents")) {
      SynthAgent agent;
      const auto cls = parse_object_class(a.value("class", std::string("person")));
      if (!cls) throw InvalidInput("scenario agent: unknown class");
      agent.object_class = *cls;
      agent.initial_box = box_from(a.at("box"), "scenario agent");
      if (a.contains("road_velocity"))
        agent.road_velocity = {a.at("road_velocity").at(0).get<double>(), a.at("road_velocity").at(1).get<double>()};
      agent.scale_rate = a.value("scale_rate", 0.0);
      s.agents.push_back(agent);
    }
    if (j.contains("fragmentation") && !j.at("fragmentation").is_null()) {
      const auto& f = j.at("fragmentation");
      s.fragmentation = Fragmentation{f.at("split_frame").get<int>(), f.at("gap").get<int>()};
    }
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed scenario: ") + e.what());
  }
}

std::string serialize_scenario(const SynthScenario& s) {
  ordered j = ordered::object();
  j["seed"] = s.seed;
  j["frame"] = ordered::array({s.frame.width, s.frame.height});
  j["n_frames"] = s.n_frames;
  j["camera_velocity"] = ordered::array({s.camera_velocity.x, s.camera_velocity.y});
  j["noise_sigma"] = s.noise_sigma;
  ordered agents = ordered::array();
  for (const auto& a : s.agents) {
    ordered e = ordered::object();
    e["class"] = std::string(to_string(a.object_class));
    e["box"] = box_to(a.initial_box);
    e["road_velocity"] = ordered::array({a.road_velocity.x, a.road_velocity.y});
    e["scale_rate"] = a.scale_rate;
    agents.push_back(std::move(e));
  }
  j["agents"] = std::move(agents);
  if (s.fragmentation)
    j["fragmentation"] = {{"split_frame", s.fragmentation->split_frame}, {"gap", s.fragmentation->gap}};
  return j.dump(2) + "\n";
}

std::vector<Detection> parse_detections(const std::string& text) {
  std::vector<Detection> out;
  for_each_line(text, [&](const json& j, const std::string& where) {
    try {
      Detection d;
      d.frame = j.at("frame").get<int>();
      const auto cls = parse_object_class(j.at("class").get<std::string>());
      if (!cls) throw InvalidInput(where + ": unknown class");
      d.object_class = *cls;
      d.box = box_from(j.at("box"), where);
      d.confidence = j.at("conf").get<double>();
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw InvalidInput(where + ": conf outside [0, 1]");
      out.push_back(d);
    } catch (const json::exception& e) {
      throw InvalidInput(where + ": " + e.what());
    }
  });
  return out;
}

std::string serialize_detections(const std::vector<Detection>& detections) {
  std::string out;
  for (const auto& d : detections) {
    ordered j = ordered::object();
    j["frame"] = d.frame;
    j["class"] = std::string(to_string(d.object_class));
    j["box"] = box_to(d.box);
    j["conf"] = d.confidence;
    out += j.dump() + "\n";
  }
  return out;
}

std::map<std::string, double> parse_scores(const std::string& text) {
  std::map<std::string, double> out;
  for_each_line(text, [&](const json& j, const std::string& where) {
    try {
      out[j.at("id").get<std::string>()] = j.at("score").get<double>();
    } catch (const json::exception& e) {
      throw InvalidInput(where + ": " + e.what());
    }
  });
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), std::streamsize(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace vruik
