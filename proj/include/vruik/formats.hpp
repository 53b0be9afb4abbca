#pragma once

// File formats exchanged with upstream detectors, trackers and flow
// estimators.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vruik/core.hpp"
#include "vruik/curation.hpp"
#include "vruik/egomotion.hpp"
#include "vruik/synth.hpp"

namespace vruik {

// Middlebury .flo: "PIEH", int32 width, int32 height, then (dx, dy)
// float32 pairs row-major, all little-endian.
std::string encode_flo(const FlowField& flow);
FlowField decode_flo(const std::string& bytes);
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& flow, const std::filesystem::path& path);

// Binary 8-bit PGM (P5).
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(const std::string& bytes);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

// Tracks: JSON array of {"track_id", "class", "obs": [{"frame", "box", "conf"}]}.
// A single track object is also accepted on input.
std::vector<Track> parse_tracks(const std::string& text);
std::string serialize_tracks(const std::vector<Track>& tracks);
std::vector<Track> read_tracks(const std::filesystem::path& path);
void write_tracks(const std::vector<Track>& tracks, const std::filesystem::path& path);

// Detections: JSON Lines of {"frame", "class", "box", "conf"}.
std::vector<Detection> parse_detections(const std::string& text);
std::string serialize_detections(const std::vector<Detection>& detections);

// Synthetic scenario: {"seed", "frame": [w, h], "n_frames", "camera_velocity": [vx, vy],
// "noise_sigma", "agents": [{"class", "box", "road_velocity": [vx, vy], "scale_rate"}],
// "fragmentation": {"split_frame", "gap"} (optional)}.
SynthScenario parse_scenario(const std::string& text);
std::string serialize_scenario(const SynthScenario& scenario);

// External similarity scores: JSON Lines of {"id", "score"}.
std::map<std::string, double> parse_scores(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace vruik
