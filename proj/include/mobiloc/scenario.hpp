#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobiloc/geometry.hpp"

namespace mobiloc {

struct RadioConfig {
  // Nominal ranges per power level, strictly increasing.
  std::vector<double> level_ranges{15.0, 30.0};
  double doi = 0.0;       // degree of irregularity, in [0, 1)
  double fading_f = 0.0;  // fraction of stops lost per sensor, in [0, 1)

  bool operator==(const RadioConfig&) const = default;
};

enum class TrajectoryPattern { grid_sweep, random_waypoint, explicit_points };

std::string to_string(TrajectoryPattern pattern);
TrajectoryPattern trajectory_pattern_from_word(const std::string& word);

struct TrajectoryConfig {
  TrajectoryPattern pattern = TrajectoryPattern::grid_sweep;
  // 0 means "use the smallest level range"; resolve_scenario_defaults fills it.
  double step = 0.0;
  std::vector<Point2D> explicit_points;

  bool operator==(const TrajectoryConfig&) const = default;
};

struct ContentionConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double max_delay = 0.1;    // seconds
  double relay_range = 0.0;  // meters; 0 means "use the smallest level range"

  bool operator==(const ContentionConfig&) const = default;
};

// Switches for the constraint-extraction edge cases. Both default to the
// behaviour used throughout the experiments.
struct ExtractionOptions {
  // Emit a lower-only constraint for stops a sensor never heard at any level.
  bool lower_only = false;
  // For relay-only stops, derive the lower bound from unheard direct levels
  // instead of using 0.
  bool relay_lower_from_unheard = false;

  bool operator==(const ExtractionOptions&) const = default;
};

struct ScenarioConfig {
  double field_width = 100.0;
  double field_height = 100.0;
  std::uint64_t seed = 0;
  // Extra nodes deployed uniformly at random (outside obstacles) by the
  // harness, in addition to any listed explicitly.
  int random_nodes = 0;
  // Distance-to-obstacle threshold for flagging boundary nodes; 0 means "use
  // the smallest level range".
  double boundary_distance = 0.0;

  std::vector<SensorNode> nodes;
  std::vector<ObstaclePolygon> obstacles;
  RadioConfig radio;
  TrajectoryConfig trajectory;
  ContentionConfig contention;
  ExtractionOptions extraction;

  bool operator==(const ScenarioConfig&) const = default;
};

// Fills the zero sentinels (trajectory step, relay range, boundary distance)
// from the smallest level range and renormalizes beta to 1 - alpha after the
// near-equality check. Throws ValidationError if level_ranges is empty or
// alpha + beta is not 1 within 1e-12.
void resolve_scenario_defaults(ScenarioConfig& config);

// Checks every documented invariant; throws ValidationError naming the
// offending entity. Expects a resolved config (no zero sentinels).
void validate_scenario(const ScenarioConfig& config);

// Parse + resolve + validate. Throws ParseError (with file:line) or
// ValidationError.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& text, const std::string& label = "scenario");

// Serialization; load_scenario(save_scenario(c)) yields a config equal to c
// for any resolved valid c (doubles are written in shortest round-trip form).
std::string write_scenario(const ScenarioConfig& config);
void save_scenario(const ScenarioConfig& config, const std::string& path);

namespace detail {

// Minimal sectioned key/value reader shared by scenario and experiment files:
// [section] and repeated [[table]] headers, key = value lines, # comments.
struct ConfigEntry {
  std::string key;
  std::string raw;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  bool is_table = false;
  int line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(const std::string& key) const;
};

struct ConfigDoc {
  std::string label;
  std::vector<ConfigSection> sections;

  // nullptr when absent; ParseError when a singleton section repeats.
  const ConfigSection* find_unique(const std::string& name) const;
  std::vector<const ConfigSection*> tables(const std::string& name) const;
};

ConfigDoc parse_config_file(const std::string& path);
ConfigDoc parse_config_text(const std::string& text, const std::string& label);

// Scenario mapping over an already parsed doc; section names in skip are left
// for the caller (experiment files piggyback on the scenario format).
ScenarioConfig scenario_from_config_doc(const ConfigDoc& doc,
                                        const std::vector<std::string>& skip = {});

double parse_double(const ConfigEntry& entry, const std::string& where);
std::int64_t parse_int(const ConfigEntry& entry, const std::string& where);
std::uint64_t parse_uint64(const ConfigEntry& entry, const std::string& where);
bool parse_bool(const ConfigEntry& entry, const std::string& where);
std::string parse_word(const ConfigEntry& entry, const std::string& where);
std::vector<std::string> split_list(const ConfigEntry& entry, const std::string& where);
std::vector<double> parse_double_list(const ConfigEntry& entry, const std::string& where);
std::vector<std::string> parse_word_list(const ConfigEntry& entry, const std::string& where);
std::vector<Point2D> parse_point_list(const ConfigEntry& entry, const std::string& where);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace detail

}  // namespace mobiloc
