#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vruik/core.hpp"
#include "vruik/error.hpp"

namespace vruik {

/// One annotated object. `intent` and `position` are empty before the
/// annotation pipeline has run.
struct ObjectAnnotation {
  BoundingBox box;
  std::optional<IntentLabel> intent;
  std::optional<RelativePosition> position;
  std::string description;

  friend bool operator==(const ObjectAnnotation&, const ObjectAnnotation&) = default;
};

enum class Risk { yes, no };

struct SceneAnnotation {
  std::string image_path;
  std::string video_path;
  Risk risk{Risk::yes};
  std::map<std::string, ObjectAnnotation> pedestrians;
  std::map<std::string, ObjectAnnotation> cyclists;
  std::string suggested_action;

  bool has_objects() const noexcept { return !pedestrians.empty() || !cyclists.empty(); }

  friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

using Dataset = std::map<std::string, SceneAnnotation>;

struct LoadOptions {
  bool fail_fast{false};
};

struct LoadedDataset {
  Dataset samples;
  /// Informational notes such as "sample_n/Pedestrians/1: intent-empty".
  std::vector<std::string> flags;
};

/// Parses and validates a dataset document. Throws ParseError (with byte
/// offset) for malformed JSON and ValidationError listing every violation
/// (only the first with fail_fast).
LoadedDataset parse_dataset(const std::string& text, const LoadOptions& options = {});

/// parse_dataset on a file; IoError when it cannot be read.
LoadedDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

/// Canonical form: keys sorted, fixed field order, four-space indent,
/// integral coordinates written as integers, trailing newline.
std::string serialize_dataset(const Dataset& samples);

/// Writes serialize_dataset output; IoError with the path on failure.
void write_dataset(const Dataset& samples, const std::filesystem::path& path);

struct DatasetStats {
  std::size_t samples{0};
  std::size_t pedestrians{0};
  std::size_t cyclists{0};
  std::size_t risk_yes{0};
  std::size_t risk_no{0};
  std::size_t intent_empty{0};
  std::map<LateralIntent, std::size_t> lateral;
  std::map<VerticalIntent, std::size_t> vertical;
  std::map<RelativePosition, std::size_t> position;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats dataset_stats(const Dataset& samples);

}  // namespace vruik
