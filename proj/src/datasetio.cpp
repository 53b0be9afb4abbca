#include "vruik/datasetio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vruik {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

constexpr const char* kPedestrians = "Pedestrians";
constexpr const char* kCyclists = "Cyclists";

class Validator {
 public:
  explicit Validator(bool fail_fast) : fail_fast_(fail_fast) {}

  void fail(const std::string& sample, const std::string& path, const std::string& message) {
    issues_.push_back({sample, path, message});
    if (fail_fast_) throw ValidationError(issues_);
  }

  std::vector<ValidationIssue>& issues() { return issues_; }

 private:
  bool fail_fast_;
  std::vector<ValidationIssue> issues_;
};

std::optional<std::string> string_field(const json& obj, const char* key, const std::string& sample,
                                        const std::string& path, Validator& v) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    v.fail(sample, path + key, "missing field");
    return std::nullopt;
  }
  if (!it->is_string()) {
    v.fail(sample, path + key, "expected a string");
    return std::nullopt;
  }
  return it->get<std::string>();
}

std::optional<ObjectAnnotation> parse_object(const json& obj, const std::string& sample,
                                             const std::string& path, Validator& v,
                                             std::vector<std::string>& flags) {
  if (!obj.is_object()) {
    v.fail(sample, path, "expected an object");
    return std::nullopt;
  }
  const std::size_t before = v.issues().size();
  ObjectAnnotation out;

  auto box = obj.find("Box");
  if (box == obj.end()) {
    v.fail(sample, path + "/Box", "missing field");
  } else if (!box->is_array() || box->size() != 4 ||
             !std::all_of(box->begin(), box->end(), [](const json& x) { return x.is_number(); })) {
    v.fail(sample, path + "/Box", "expected [x1, y1, x2, y2]");
  } else {
    out.box = {(*box)[0].get<double>(), (*box)[1].get<double>(), (*box)[2].get<double>(),
               (*box)[3].get<double>()};
    if (!out.box.valid()) v.fail(sample, path + "/Box", "box must be finite with x1 < x2 and y1 < y2");
  }

  auto intent = obj.find("Intent");
  if (intent == obj.end()) {
    v.fail(sample, path + "/Intent", "missing field");
  } else if (!intent->is_array() || (intent->size() != 0 && intent->size() != 2)) {
    v.fail(sample, path + "/Intent", "expected an empty list or [lateral, vertical]");
  } else if (intent->size() == 2) {
    const auto& lat = (*intent)[0];
    const auto& ver = (*intent)[1];
    auto l = lat.is_string() ? parse_lateral(lat.get<std::string>()) : std::nullopt;
    auto r = ver.is_string() ? parse_vertical(ver.get<std::string>()) : std::nullopt;
    if (!l) v.fail(sample, path + "/Intent/0", "not a lateral intent value");
    if (!r) v.fail(sample, path + "/Intent/1", "not a vertical intent value");
    if (l && r) out.intent = IntentLabel{*l, *r};
  } else {
    flags.push_back(sample + "/" + path + ": intent-empty");
  }

  if (auto pos = string_field(obj, "Position", sample, path + "/", v)) {
    if (!pos->empty()) {
      out.position = parse_position(*pos);
      if (!out.position) v.fail(sample, path + "/Position", "expected \"\", Left, Right or Front");
    }
  }
  if (auto desc = string_field(obj, "Description", sample, path + "/", v)) out.description = *desc;

  if (v.issues().size() != before) return std::nullopt;
  return out;
}

// Records keys repeated within one JSON object, which the DOM would merge.
struct DuplicateKeyTracker {
  std::vector<std::set<std::string>> open;
  std::vector<std::string> duplicates;

  bool operator()(int /*depth*/, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start: open.emplace_back(); break;
      case json::parse_event_t::object_end: open.pop_back(); break;
      case json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!open.empty() && !open.back().insert(key).second) duplicates.push_back(key);
        break;
      }
      default: break;
    }
    return true;
  }
};

ordered box_json(const BoundingBox& b) {
  ordered arr = ordered::array();
  for (double x : {b.x1, b.y1, b.x2, b.y2}) {
    if (std::nearbyint(x) == x && std::abs(x) < 9.0e15) {
      arr.push_back(static_cast<std::int64_t>(x));
    } else {
      arr.push_back(x);
    }
  }
  return arr;
}

ordered object_json(const ObjectAnnotation& o) {
  ordered j = ordered::object();
  j["Box"] = box_json(o.box);
  ordered intent = ordered::array();
  if (o.intent) {
    intent.push_back(std::string(to_string(o.intent->lateral)));
    intent.push_back(std::string(to_string(o.intent->vertical)));
  }
  j["Intent"] = intent;
  j["Position"] = o.position ? std::string(to_string(*o.position)) : std::string();
  j["Description"] = o.description;
  return j;
}

ordered objects_json(const std::map<std::string, ObjectAnnotation>& objects) {
  ordered j = ordered::object();
  for (const auto& [id, obj] : objects) j[id] = object_json(obj);
  return j;
}

}  // namespace

LoadedDataset parse_dataset(const std::string& text, const LoadOptions& options) {
  DuplicateKeyTracker tracker;
  json doc;
  try {
    doc = json::parse(text, std::ref(tracker));
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }

  Validator v(options.fail_fast);
  LoadedDataset out;
  for (const auto& key : tracker.duplicates) v.fail("", key, "duplicate key");
  if (!doc.is_object()) {
    v.fail("", "", "dataset must be a JSON object keyed by sample id");
    throw ValidationError(v.issues());
  }

  for (const auto& [id, sample] : doc.items()) {
    if (!sample.is_object()) {
      v.fail(id, "", "sample must be an object");
      continue;
    }
    const std::size_t before = v.issues().size();
    SceneAnnotation s;
    if (auto p = string_field(sample, "image_path", id, "", v)) s.image_path = *p;
    if (auto p = string_field(sample, "video_path", id, "", v)) s.video_path = *p;
    if (auto r = string_field(sample, "Risk", id, "", v)) {
      if (*r == "Yes") {
        s.risk = Risk::yes;
      } else if (*r == "No") {
        s.risk = Risk::no;
      } else {
        v.fail(id, "Risk", "expected \"Yes\" or \"No\"");
      }
    }
    for (const char* cls : {kPedestrians, kCyclists}) {
      auto it = sample.find(cls);
      if (it == sample.end()) {
        v.fail(id, cls, "missing field");
        continue;
      }
      if (!it->is_object()) {
        v.fail(id, cls, "expected an object keyed by object id");
        continue;
      }
      auto& target = std::string(cls) == kPedestrians ? s.pedestrians : s.cyclists;
      for (const auto& [oid, obj] : it->items()) {
        if (auto parsed = parse_object(obj, id, std::string(cls) + "/" + oid, v, out.flags))
          target.emplace(oid, std::move(*parsed));
      }
    }
    if (auto a = string_field(sample, "suggested_action", id, "", v)) s.suggested_action = *a;
    if (v.issues().size() == before) out.samples.emplace(id, std::move(s));
  }
  if (!v.issues().empty()) throw ValidationError(v.issues());
  return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading dataset '" + path.string() + "'");
  return parse_dataset(buf.str(), options);
}

std::string serialize_dataset(const Dataset& samples) {
  ordered doc = ordered::object();
  for (const auto& [id, s] : samples) {
    ordered j = ordered::object();
    j["image_path"] = s.image_path;
    j["video_path"] = s.video_path;
    j["Risk"] = s.risk == Risk::yes ? "Yes" : "No";
    j[kPedestrians] = objects_json(s.pedestrians);
    j[kCyclists] = objects_json(s.cyclists);
    j["suggested_action"] = s.suggested_action;
    doc[id] = std::move(j);
  }
  return doc.dump(4) + "\n";
}

void write_dataset(const Dataset& samples, const std::filesystem::path& path) {
  const std::string text = serialize_dataset(samples);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DatasetStats dataset_stats(const Dataset& samples) {
  DatasetStats st;
  st.samples = samples.size();
  for (const auto& [id, s] : samples) {
    (s.risk == Risk::yes ? st.risk_yes : st.risk_no)++;
    st.pedestrians += s.pedestrians.size();
    st.cyclists += s.cyclists.size();
    for (const auto* objects : {&s.pedestrians, &s.cyclists}) {
      for (const auto& [oid, o] : *objects) {
        if (o.intent) {
          ++st.lateral[o.intent->lateral];
          ++st.vertical[o.intent->vertical];
        } else {
          ++st.intent_empty;
        }
        if (o.position) ++st.position[*o.position];
      }
    }
  }
  return st;
}

}  // namespace vruik
