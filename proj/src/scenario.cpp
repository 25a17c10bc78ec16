#include "mobiloc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace mobiloc {

namespace detail {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_bare_word(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

[[noreturn]] void fail_at(const std::string& where, int line, const std::string& what) {
  throw ParseError(where + ":" + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_entry(const ConfigEntry& e, const std::string& where,
                             const std::string& what) {
  fail_at(where, e.line, "key '" + e.key + "': " + what);
}

}  // namespace

const ConfigEntry* ConfigSection::find(const std::string& key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

const ConfigSection* ConfigDoc::find_unique(const std::string& name) const {
  const ConfigSection* found = nullptr;
  for (const auto& s : sections) {
    if (s.name != name) continue;
    if (found) {
      fail_at(label, s.line, "section [" + name + "] appears more than once");
    }
    found = &s;
  }
  return found;
}

std::vector<const ConfigSection*> ConfigDoc::tables(const std::string& name) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections) {
    if (s.name == name) out.push_back(&s);
  }
  return out;
}

ConfigDoc parse_config_text(const std::string& text, const std::string& label) {
  ConfigDoc doc;
  doc.label = label;
  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  ConfigSection* current = nullptr;

  while (std::getline(in, raw_line)) {
    ++line_no;
    // Strip comments; the format has no quoted strings containing '#'.
    if (auto pos = raw_line.find('#'); pos != std::string::npos) {
      raw_line.erase(pos);
    }
    const std::string line = trim(raw_line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      const bool table = line.size() >= 2 && line[1] == '[';
      const std::string close = table ? "]]" : "]";
      if (line.size() < 2 + 2 * close.size() ||
          line.substr(line.size() - close.size()) != close) {
        fail_at(label, line_no, "malformed section header '" + line + "'");
      }
      const std::size_t open = table ? 2 : 1;
      const std::string name = trim(line.substr(open, line.size() - open - close.size()));
      if (!is_bare_word(name)) {
        fail_at(label, line_no, "malformed section name '" + name + "'");
      }
      doc.sections.push_back(ConfigSection{name, table, line_no, {}});
      current = &doc.sections.back();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail_at(label, line_no, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!is_bare_word(key)) {
      fail_at(label, line_no, "malformed key '" + key + "'");
    }
    if (value.empty()) {
      fail_at(label, line_no, "key '" + key + "' has an empty value");
    }
    if (!current) {
      fail_at(label, line_no, "key '" + key + "' appears before any section header");
    }
    if (current->find(key)) {
      fail_at(label, line_no,
              "key '" + key + "' repeated in section [" + current->name + "]");
    }
    current->entries.push_back(ConfigEntry{key, value, line_no});
  }
  return doc;
}

ConfigDoc parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

double parse_double(const ConfigEntry& e, const std::string& where) {
  double v = 0.0;
  const char* b = e.raw.data();
  const char* end = b + e.raw.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    fail_entry(e, where, "expected a finite number, got '" + e.raw + "'");
  }
  return v;
}

std::int64_t parse_int(const ConfigEntry& e, const std::string& where) {
  std::int64_t v = 0;
  const char* b = e.raw.data();
  const char* end = b + e.raw.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) {
    fail_entry(e, where, "expected an integer, got '" + e.raw + "'");
  }
  return v;
}

std::uint64_t parse_uint64(const ConfigEntry& e, const std::string& where) {
  std::uint64_t v = 0;
  const char* b = e.raw.data();
  const char* end = b + e.raw.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end) {
    fail_entry(e, where, "expected a non-negative integer, got '" + e.raw + "'");
  }
  return v;
}

bool parse_bool(const ConfigEntry& e, const std::string& where) {
  if (e.raw == "true") return true;
  if (e.raw == "false") return false;
  fail_entry(e, where, "expected true or false, got '" + e.raw + "'");
}

std::string parse_word(const ConfigEntry& e, const std::string& where) {
  if (e.raw.size() >= 2 && e.raw.front() == '"' && e.raw.back() == '"') {
    return e.raw.substr(1, e.raw.size() - 2);
  }
  if (!is_bare_word(e.raw)) {
    fail_entry(e, where, "expected a word, got '" + e.raw + "'");
  }
  return e.raw;
}

std::vector<std::string> split_list(const ConfigEntry& e, const std::string& where) {
  const std::string& raw = e.raw;
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
    fail_entry(e, where, "expected a [...] list, got '" + raw + "'");
  }
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '[') {
      ++depth;
      cur += c;
    } else if (c == ']') {
      if (--depth < 0) fail_entry(e, where, "unbalanced brackets in '" + raw + "'");
      cur += c;
    } else if (c == ',' && depth == 0) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) fail_entry(e, where, "unbalanced brackets in '" + raw + "'");
  cur = trim(cur);
  if (!cur.empty()) items.push_back(cur);
  for (const auto& item : items) {
    if (item.empty()) fail_entry(e, where, "empty element in list '" + raw + "'");
  }
  return items;
}

std::vector<double> parse_double_list(const ConfigEntry& e, const std::string& where) {
  std::vector<double> out;
  for (const auto& item : split_list(e, where)) {
    out.push_back(parse_double(ConfigEntry{e.key, item, e.line}, where));
  }
  return out;
}

std::vector<std::string> parse_word_list(const ConfigEntry& e, const std::string& where) {
  std::vector<std::string> out;
  for (const auto& item : split_list(e, where)) {
    out.push_back(parse_word(ConfigEntry{e.key, item, e.line}, where));
  }
  return out;
}

std::vector<Point2D> parse_point_list(const ConfigEntry& e, const std::string& where) {
  std::vector<Point2D> out;
  for (const auto& item : split_list(e, where)) {
    const ConfigEntry pair{e.key, item, e.line};
    const auto coords = parse_double_list(pair, where);
    if (coords.size() != 2) {
      fail_entry(e, where, "expected [x, y] pairs, got '" + item + "'");
    }
    out.push_back(Point2D{coords[0], coords[1]});
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, p);
}

}  // namespace detail

std::string to_string(TrajectoryPattern pattern) {
  switch (pattern) {
    case TrajectoryPattern::grid_sweep: return "grid_sweep";
    case TrajectoryPattern::random_waypoint: return "random_waypoint";
    case TrajectoryPattern::explicit_points: return "explicit";
  }
  return "grid_sweep";
}

TrajectoryPattern trajectory_pattern_from_word(const std::string& word) {
  if (word == "grid_sweep") return TrajectoryPattern::grid_sweep;
  if (word == "random_waypoint") return TrajectoryPattern::random_waypoint;
  if (word == "explicit") return TrajectoryPattern::explicit_points;
  throw ValidationError("unknown trajectory pattern '" + word +
                        "' (expected grid_sweep, random_waypoint, or explicit)");
}

void resolve_scenario_defaults(ScenarioConfig& config) {
  if (config.radio.level_ranges.empty()) {
    throw ValidationError("radio: level_ranges must not be empty");
  }
  const double r1 = config.radio.level_ranges.front();
  if (config.trajectory.step == 0.0) config.trajectory.step = r1;
  if (config.contention.relay_range == 0.0) config.contention.relay_range = r1;
  if (config.boundary_distance == 0.0) config.boundary_distance = r1;

  const double sum = config.contention.alpha + config.contention.beta;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("contention: alpha + beta must equal 1, got " +
                          detail::format_double(sum));
  }
  config.contention.beta = 1.0 - config.contention.alpha;
}

namespace {

bool inside_field(const Point2D& p, const ScenarioConfig& c) {
  return p.x >= 0.0 && p.x <= c.field_width && p.y >= 0.0 && p.y <= c.field_height;
}

std::string point_str(const Point2D& p) {
  return "(" + detail::format_double(p.x) + ", " + detail::format_double(p.y) + ")";
}

}  // namespace

void validate_scenario(const ScenarioConfig& c) {
  if (!(c.field_width > 0.0) || !(c.field_height > 0.0) || !std::isfinite(c.field_width) ||
      !std::isfinite(c.field_height)) {
    throw ValidationError("field: width and height must be positive and finite");
  }
  if (c.random_nodes < 0) {
    throw ValidationError("field: random_nodes must be non-negative");
  }
  if (!(c.boundary_distance > 0.0)) {
    throw ValidationError(
        "field: boundary_distance must be positive (0 requests the default; call "
        "resolve_scenario_defaults)");
  }

  const auto& lr = c.radio.level_ranges;
  if (lr.empty()) {
    throw ValidationError("radio: level_ranges must not be empty");
  }
  for (std::size_t i = 0; i < lr.size(); ++i) {
    if (!(lr[i] > 0.0) || !std::isfinite(lr[i])) {
      throw ValidationError("radio: level_ranges[" + std::to_string(i) +
                            "] must be positive and finite");
    }
    if (i > 0 && !(lr[i] > lr[i - 1])) {
      throw ValidationError("radio: level_ranges must be strictly increasing (index " +
                            std::to_string(i) + ")");
    }
  }
  if (!(c.radio.doi >= 0.0 && c.radio.doi < 1.0)) {
    throw ValidationError("radio: doi must be in [0, 1)");
  }
  if (!(c.radio.fading_f >= 0.0 && c.radio.fading_f < 1.0)) {
    throw ValidationError("radio: fading_f must be in [0, 1)");
  }

  if (c.trajectory.pattern == TrajectoryPattern::explicit_points) {
    if (c.trajectory.explicit_points.empty()) {
      throw ValidationError("trajectory: explicit pattern needs a non-empty points list");
    }
    for (std::size_t i = 0; i < c.trajectory.explicit_points.size(); ++i) {
      if (!inside_field(c.trajectory.explicit_points[i], c)) {
        throw ValidationError("trajectory: point " + std::to_string(i) + " at " +
                              point_str(c.trajectory.explicit_points[i]) +
                              " lies outside the field");
      }
    }
  } else {
    if (!(c.trajectory.step > 0.0) || !std::isfinite(c.trajectory.step)) {
      throw ValidationError(
          "trajectory: step must be positive (0 requests the default; call "
          "resolve_scenario_defaults)");
    }
    if (!c.trajectory.explicit_points.empty()) {
      throw ValidationError("trajectory: points list is only valid with pattern = explicit");
    }
  }

  const auto& ct = c.contention;
  if (!(ct.alpha >= 0.0) || !(ct.beta >= 0.0)) {
    throw ValidationError("contention: alpha and beta must be non-negative");
  }
  if (std::abs(ct.alpha + ct.beta - 1.0) > 1e-12) {
    throw ValidationError("contention: alpha + beta must equal 1, got " +
                          detail::format_double(ct.alpha + ct.beta));
  }
  if (!(ct.max_delay > 0.0)) {
    throw ValidationError("contention: max_delay must be positive");
  }
  if (!(ct.relay_range > 0.0)) {
    throw ValidationError(
        "contention: relay_range must be positive (0 requests the default; call "
        "resolve_scenario_defaults)");
  }

  for (std::size_t i = 0; i < c.obstacles.size(); ++i) {
    validate_polygon(c.obstacles[i], "obstacle " + std::to_string(i));
  }

  std::vector<int> ids;
  for (const auto& node : c.nodes) {
    const std::string who = "node " + std::to_string(node.id);
    if (std::find(ids.begin(), ids.end(), node.id) != ids.end()) {
      throw ValidationError(who + ": duplicate id");
    }
    ids.push_back(node.id);
    if (!std::isfinite(node.position.x) || !std::isfinite(node.position.y)) {
      throw ValidationError(who + ": position must be finite");
    }
    if (!inside_field(node.position, c)) {
      throw ValidationError(who + ": position " + point_str(node.position) +
                            " lies outside the field");
    }
    for (std::size_t k = 0; k < c.obstacles.size(); ++k) {
      if (point_strictly_inside(node.position, c.obstacles[k])) {
        throw ValidationError(who + ": position " + point_str(node.position) +
                              " lies inside obstacle " + std::to_string(k));
      }
    }
    if (!(node.initial_energy >= 0.0) || !std::isfinite(node.initial_energy)) {
      throw ValidationError(who + ": initial_energy must be non-negative and finite");
    }
    if (!(node.used_energy >= 0.0) || node.used_energy > node.initial_energy) {
      throw ValidationError(who + ": used_energy must lie in [0, initial_energy]");
    }
    if (node.num_neighbors && *node.num_neighbors < 0) {
      throw ValidationError(who + ": neighbors must be non-negative");
    }
  }
}

namespace {

using detail::ConfigEntry;
using detail::ConfigSection;

[[noreturn]] void unknown_key(const ConfigEntry& e, const ConfigSection& sec,
                              const std::string& where) {
  throw ParseError(where + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                   "' in section [" + sec.name + "]");
}

void read_field(const ConfigSection& sec, const std::string& where, ScenarioConfig& c) {
  for (const auto& e : sec.entries) {
    if (e.key == "width") {
      c.field_width = detail::parse_double(e, where);
    } else if (e.key == "height") {
      c.field_height = detail::parse_double(e, where);
    } else if (e.key == "seed") {
      c.seed = detail::parse_uint64(e, where);
    } else if (e.key == "random_nodes") {
      c.random_nodes = static_cast<int>(detail::parse_int(e, where));
    } else if (e.key == "boundary_distance") {
      c.boundary_distance = detail::parse_double(e, where);
    } else {
      unknown_key(e, sec, where);
    }
  }
}

void read_radio(const ConfigSection& sec, const std::string& where, RadioConfig& r) {
  for (const auto& e : sec.entries) {
    if (e.key == "level_ranges") {
      r.level_ranges = detail::parse_double_list(e, where);
    } else if (e.key == "doi") {
      r.doi = detail::parse_double(e, where);
    } else if (e.key == "fading_f") {
      r.fading_f = detail::parse_double(e, where);
    } else {
      unknown_key(e, sec, where);
    }
  }
}

void read_trajectory(const ConfigSection& sec, const std::string& where, TrajectoryConfig& t) {
  for (const auto& e : sec.entries) {
    if (e.key == "pattern") {
      t.pattern = trajectory_pattern_from_word(detail::parse_word(e, where));
    } else if (e.key == "step") {
      t.step = detail::parse_double(e, where);
    } else if (e.key == "points") {
      t.explicit_points = detail::parse_point_list(e, where);
    } else {
      unknown_key(e, sec, where);
    }
  }
}

void read_contention(const ConfigSection& sec, const std::string& where, ContentionConfig& ct) {
  for (const auto& e : sec.entries) {
    if (e.key == "alpha") {
      ct.alpha = detail::parse_double(e, where);
    } else if (e.key == "beta") {
      ct.beta = detail::parse_double(e, where);
    } else if (e.key == "max_delay") {
      ct.max_delay = detail::parse_double(e, where);
    } else if (e.key == "relay_range") {
      ct.relay_range = detail::parse_double(e, where);
    } else {
      unknown_key(e, sec, where);
    }
  }
}

void read_extraction(const ConfigSection& sec, const std::string& where, ExtractionOptions& x) {
  for (const auto& e : sec.entries) {
    if (e.key == "lower_only") {
      x.lower_only = detail::parse_bool(e, where);
    } else if (e.key == "relay_lower_from_unheard") {
      x.relay_lower_from_unheard = detail::parse_bool(e, where);
    } else {
      unknown_key(e, sec, where);
    }
  }
}

SensorNode read_node(const ConfigSection& sec, const std::string& where, int ordinal) {
  SensorNode node;
  node.id = ordinal;
  bool have_x = false, have_y = false;
  for (const auto& e : sec.entries) {
    if (e.key == "id") {
      node.id = static_cast<int>(detail::parse_int(e, where));
    } else if (e.key == "x") {
      node.position.x = detail::parse_double(e, where);
      have_x = true;
    } else if (e.key == "y") {
      node.position.y = detail::parse_double(e, where);
      have_y = true;
    } else if (e.key == "boundary") {
      node.is_boundary = detail::parse_bool(e, where);
    } else if (e.key == "initial_energy") {
      node.initial_energy = detail::parse_double(e, where);
    } else if (e.key == "used_energy") {
      node.used_energy = detail::parse_double(e, where);
    } else if (e.key == "neighbors") {
      node.num_neighbors = static_cast<int>(detail::parse_int(e, where));
    } else {
      unknown_key(e, sec, where);
    }
  }
  if (!have_x || !have_y) {
    throw ParseError(where + ":" + std::to_string(sec.line) + ": [[node]] needs x and y");
  }
  return node;
}

ObstaclePolygon read_obstacle(const ConfigSection& sec, const std::string& where) {
  ObstaclePolygon poly;
  for (const auto& e : sec.entries) {
    if (e.key == "vertices") {
      poly.vertices = detail::parse_point_list(e, where);
    } else {
      unknown_key(e, sec, where);
    }
  }
  if (poly.vertices.empty()) {
    throw ParseError(where + ":" + std::to_string(sec.line) + ": [[obstacle]] needs vertices");
  }
  return poly;
}

}  // namespace

namespace detail {

ScenarioConfig scenario_from_config_doc(const ConfigDoc& doc,
                                        const std::vector<std::string>& skip) {
  const std::string& label = doc.label;
  ScenarioConfig c;
  int node_ordinal = 0;

  for (const auto& sec : doc.sections) {
    if (std::find(skip.begin(), skip.end(), sec.name) != skip.end()) continue;
    const bool singleton = sec.name == "field" || sec.name == "radio" ||
                           sec.name == "trajectory" || sec.name == "contention" ||
                           sec.name == "extraction";
    const bool table = sec.name == "node" || sec.name == "obstacle";
    if (!singleton && !table) {
      throw ParseError(label + ":" + std::to_string(sec.line) + ": unknown section [" +
                       sec.name + "]");
    }
    if (singleton && sec.is_table) {
      throw ParseError(label + ":" + std::to_string(sec.line) + ": [" + sec.name +
                       "] is a singleton section, not a [[table]]");
    }
    if (table && !sec.is_table) {
      throw ParseError(label + ":" + std::to_string(sec.line) + ": use [[" + sec.name +
                       "]] (repeated table)");
    }

    if (sec.name == "field") {
      read_field(sec, label, c);
    } else if (sec.name == "radio") {
      read_radio(sec, label, c.radio);
    } else if (sec.name == "trajectory") {
      read_trajectory(sec, label, c.trajectory);
    } else if (sec.name == "contention") {
      read_contention(sec, label, c.contention);
    } else if (sec.name == "extraction") {
      read_extraction(sec, label, c.extraction);
    } else if (sec.name == "node") {
      c.nodes.push_back(read_node(sec, label, node_ordinal++));
    } else {
      c.obstacles.push_back(read_obstacle(sec, label));
    }
  }

  // Reject repeated singleton sections.
  for (const char* name : {"field", "radio", "trajectory", "contention", "extraction"}) {
    doc.find_unique(name);
  }

  resolve_scenario_defaults(c);
  validate_scenario(c);
  return c;
}

}  // namespace detail

ScenarioConfig parse_scenario(const std::string& text, const std::string& label) {
  return detail::scenario_from_config_doc(detail::parse_config_text(text, label));
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

namespace {

std::string points_repr(const std::vector<Point2D>& pts) {
  std::string out = "[";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ", ";
    out += "[" + detail::format_double(pts[i].x) + ", " + detail::format_double(pts[i].y) + "]";
  }
  return out + "]";
}

}  // namespace

std::string write_scenario(const ScenarioConfig& c) {
  using detail::format_double;
  std::ostringstream out;
  out << "[field]\n";
  out << "width = " << format_double(c.field_width) << "\n";
  out << "height = " << format_double(c.field_height) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "random_nodes = " << c.random_nodes << "\n";
  out << "boundary_distance = " << format_double(c.boundary_distance) << "\n";

  out << "\n[radio]\n";
  out << "level_ranges = [";
  for (std::size_t i = 0; i < c.radio.level_ranges.size(); ++i) {
    if (i) out << ", ";
    out << format_double(c.radio.level_ranges[i]);
  }
  out << "]\n";
  out << "doi = " << format_double(c.radio.doi) << "\n";
  out << "fading_f = " << format_double(c.radio.fading_f) << "\n";

  out << "\n[trajectory]\n";
  out << "pattern = " << to_string(c.trajectory.pattern) << "\n";
  out << "step = " << format_double(c.trajectory.step) << "\n";
  if (!c.trajectory.explicit_points.empty()) {
    out << "points = " << points_repr(c.trajectory.explicit_points) << "\n";
  }

  out << "\n[contention]\n";
  out << "alpha = " << format_double(c.contention.alpha) << "\n";
  out << "beta = " << format_double(c.contention.beta) << "\n";
  out << "max_delay = " << format_double(c.contention.max_delay) << "\n";
  out << "relay_range = " << format_double(c.contention.relay_range) << "\n";

  out << "\n[extraction]\n";
  out << "lower_only = " << (c.extraction.lower_only ? "true" : "false") << "\n";
  out << "relay_lower_from_unheard = "
      << (c.extraction.relay_lower_from_unheard ? "true" : "false") << "\n";

  for (const auto& node : c.nodes) {
    out << "\n[[node]]\n";
    out << "id = " << node.id << "\n";
    out << "x = " << format_double(node.position.x) << "\n";
    out << "y = " << format_double(node.position.y) << "\n";
    out << "boundary = " << (node.is_boundary ? "true" : "false") << "\n";
    out << "initial_energy = " << format_double(node.initial_energy) << "\n";
    out << "used_energy = " << format_double(node.used_energy) << "\n";
    if (node.num_neighbors) {
      out << "neighbors = " << *node.num_neighbors << "\n";
    }
  }

  for (const auto& poly : c.obstacles) {
    out << "\n[[obstacle]]\n";
    out << "vertices = " << points_repr(poly.vertices) << "\n";
  }
  return out.str();
}

void save_scenario(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(path + ": cannot open file for writing");
  }
  out << write_scenario(config);
}

}  // namespace mobiloc
