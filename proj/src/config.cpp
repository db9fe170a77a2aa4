#include "forcesim/config.hpp"

#include "forcesim/admittance.hpp"
#include "forcesim/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace forcesim {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<IniSection> parse_ini(std::string_view text) {
  std::vector<IniSection> out;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find_first_of("#;"); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigParse("unterminated section header", line_no);
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigParse("empty section name", line_no);
      if (!seen_sections.insert(name).second) throw ConfigParse("duplicate section", line_no, name);
      out.push_back(IniSection{name, line_no, {}});
      seen_keys.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParse("expected key = value", line_no);
    if (out.empty()) throw ConfigParse("key outside of any section", line_no);
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigParse("empty key", line_no);
    if (!seen_keys.insert(key).second) throw ConfigParse("duplicate key", line_no, out.back().name + "." + key);
    out.back().entries.push_back(IniEntry{std::move(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoFailure("cannot read " + path.string());
  return ss.str();
}

namespace {

struct Field {
  const IniSection& section;
  const IniEntry& entry;

  std::string name() const { return section.name + "." + entry.key; }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigParse(msg, entry.line, name()); }

  double number() const {
    double v = 0.0;
    const std::string& s = entry.value;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) fail("expected a number, got '" + s + "'");
    return v;
  }

  long long integer() const {
    long long v = 0;
    const std::string& s = entry.value;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    const long long v = integer();
    if (v < 0) fail("expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }

  bool boolean() const {
    const std::string& s = entry.value;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail("expected true or false, got '" + s + "'");
  }

  std::vector<std::string> words() const {
    std::vector<std::string> out;
    std::string cur;
    for (char c : entry.value) {
      if (c == ' ' || c == '\t' || c == ',') {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& w : words()) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
      if (ec != std::errc() || p != w.data() + w.size() || !std::isfinite(v)) fail("expected numbers, got '" + w + "'");
      out.push_back(v);
    }
    if (out.empty()) fail("expected at least one number");
    return out;
  }

  Vec3 vec3() const {
    const auto v = numbers();
    if (v.size() != 3) fail("expected three numbers");
    return {v[0], v[1], v[2]};
  }
};

using Binder = std::map<std::string, std::function<void(const Field&)>>;

void bind_section(const IniSection& s, const Binder& binder) {
  for (const auto& e : s.entries) {
    const Field f{s, e};
    const auto it = binder.find(e.key);
    if (it == binder.end()) f.fail("unknown key");
    it->second(f);
  }
}

std::optional<DisturbanceKind> parse_disturbance_kind(std::string_view s) {
  static const std::map<std::string, DisturbanceKind, std::less<>> kinds{
      {"raise", DisturbanceKind::Raise},       {"lower", DisturbanceKind::Lower},
      {"shift", DisturbanceKind::Shift},       {"tilt", DisturbanceKind::Tilt},
      {"force_pulse", DisturbanceKind::ForcePulse}, {"sinusoid", DisturbanceKind::Sinusoid}};
  const auto it = kinds.find(s);
  if (it == kinds.end()) return std::nullopt;
  return it->second;
}

constexpr double kDeg = std::numbers::pi / 180.0;

struct ScenarioBuilder {
  ScenarioConfig cfg;
  bool task_set = false;
  bool duration_set = false;

  /// Returns false when the section is not a scenario section.
  bool bind(const IniSection& s) {
    if (s.name == "scenario") {
      bind_section(s, Binder{
          {"task", [&](const Field& f) {
             const auto t = parse_task(f.entry.value);
             if (!t) f.fail("unknown task '" + f.entry.value + "' (expected MO, PH, WW or DO)");
             cfg.task = *t;
             task_set = true;
           }},
          {"mode", [&](const Field& f) {
             const auto m = parse_mode(f.entry.value);
             if (!m) f.fail("unknown controller mode '" + f.entry.value + "'");
             cfg.mode = *m;
           }},
          {"duration", [&](const Field& f) { cfg.duration = f.number(); duration_set = true; }},
          {"seed", [&](const Field& f) { cfg.seed = f.unsigned_integer(); }},
          {"dt", [&](const Field& f) { cfg.dt = f.number(); }},
          {"ticks_per_action", [&](const Field& f) { cfg.ticks_per_action = static_cast<int>(f.integer()); }},
          {"horizon", [&](const Field& f) {
             const long long h = f.integer();
             if (h < 1) f.fail("horizon must be >= 1");
             cfg.horizon = static_cast<std::size_t>(h);
           }},
          {"stop_on_success", [&](const Field& f) { cfg.stop_on_success = f.boolean(); }},
          {"disturbance_anchor", [&](const Field& f) {
             if (f.entry.value == "start") cfg.anchor = DisturbanceAnchor::EpisodeStart;
             else if (f.entry.value == "contact") cfg.anchor = DisturbanceAnchor::ContactStart;
             else f.fail("expected start or contact");
           }},
          {"disturbance_jitter", [&](const Field& f) { cfg.disturbance_jitter = f.number(); }},
      });
      return true;
    }
    if (s.name == "controller") {
      auto& a = cfg.admittance;
      bind_section(s, Binder{
          {"mass", [&](const Field& f) { a.mass = f.number(); }},
          {"stiffness", [&](const Field& f) { a.stiffness = f.number(); }},
          {"damping_ratio", [&](const Field& f) { a.damping_ratio = f.number(); }},
          {"rot_mass", [&](const Field& f) { a.rot_mass = f.number(); }},
          {"rot_stiffness", [&](const Field& f) { a.rot_stiffness = f.number(); }},
          {"tangent_scale", [&](const Field& f) { a.tangent_scale = f.number(); }},
          {"target_force", [&](const Field& f) { cfg.target_force = f.number(); }},
          {"force_deadband", [&](const Field& f) { a.force_deadband = f.number(); }},
          {"torque_deadband", [&](const Field& f) { a.torque_deadband = f.number(); }},
      });
      return true;
    }
    if (s.name == "environment") {
      auto& e = cfg.environment;
      bind_section(s, Binder{
          {"k_e", [&](const Field& f) { e.k_e = f.number(); }},
          {"coulomb_mu", [&](const Field& f) { e.coulomb_mu = f.number(); }},
          {"viscous_c", [&](const Field& f) { e.viscous_c = f.number(); }},
          {"randomize", [&](const Field& f) { e.randomize = f.boolean(); }},
      });
      return true;
    }
    if (s.name == "noise") {
      auto& n = cfg.noise;
      bind_section(s, Binder{
          {"pos_std", [&](const Field& f) { n.pos_std = f.number(); }},
          {"rot_std", [&](const Field& f) { n.rot_std = f.number(); }},
          {"normal_cone_std", [&](const Field& f) { n.normal_cone_std = f.number(); }},
          {"contact_flip_prob", [&](const Field& f) { n.contact_flip_prob = f.number(); }},
          {"seed", [&](const Field& f) { n.seed = f.unsigned_integer(); }},
      });
      return true;
    }
    if (s.name == "safety") {
      auto& l = cfg.safety;
      bind_section(s, Binder{
          {"force", [&](const Field& f) { l.force = f.number(); }},
          {"torque", [&](const Field& f) { l.torque = f.number(); }},
          {"debounce", [&](const Field& f) { l.debounce = f.number(); }},
      });
      return true;
    }
    if (s.name == "expert") {
      auto& x = cfg.expert;
      bind_section(s, Binder{
          {"step_period", [&](const Field& f) { x.step_period = f.number(); }},
          {"free_speed", [&](const Field& f) { x.free_speed = f.number(); }},
          {"hover", [&](const Field& f) { x.hover = f.number(); }},
          {"descent_speed", [&](const Field& f) { x.descent_speed = f.number(); }},
          {"insertion_speed", [&](const Field& f) { x.insertion_speed = f.number(); }},
          {"wipe_step", [&](const Field& f) { x.wiping.step = f.number(); }},
          {"press_depth", [&](const Field& f) { x.wiping.press_depth = f.number(); }},
          {"lane_overlap", [&](const Field& f) { x.wiping.lane_overlap = f.number(); }},
          {"door_step_deg", [&](const Field& f) { x.door_angular_step = f.number() * kDeg; }},
          {"microwave_target_deg", [&](const Field& f) { x.microwave_target = f.number() * kDeg; }},
          {"door_target_deg", [&](const Field& f) { x.door_target = f.number() * kDeg; }},
          {"handle_turn_deg", [&](const Field& f) { x.handle_turn = f.number() * kDeg; }},
      });
      return true;
    }
    if (s.name.rfind("disturbance.", 0) == 0) {
      DisturbanceEvent ev;
      bool kind_set = false;
      bind_section(s, Binder{
          {"kind", [&](const Field& f) {
             const auto k = parse_disturbance_kind(f.entry.value);
             if (!k) f.fail("unknown disturbance kind '" + f.entry.value + "'");
             ev.kind = *k;
             kind_set = true;
           }},
          {"start", [&](const Field& f) { ev.start = f.number(); }},
          {"duration", [&](const Field& f) { ev.duration = f.number(); }},
          {"magnitude", [&](const Field& f) { ev.magnitude = f.number(); }},
          {"ramp", [&](const Field& f) { ev.ramp = f.number(); }},
          {"direction", [&](const Field& f) { ev.direction = f.vec3(); }},
          {"omega", [&](const Field& f) { ev.omega = f.number(); }},
      });
      if (!kind_set) throw ConfigParse("missing required key", s.line, s.name + ".kind");
      try {
        ev.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigParse(e.what(), s.line, s.name);
      }
      cfg.disturbances.push_back(ev);
      return true;
    }
    return false;
  }

  ScenarioConfig finish() {
    if (!task_set) throw ConfigParse("missing required key", 0, "scenario.task");
    if (!duration_set) cfg.duration = task_time_limit(cfg.task);
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigParse(e.what(), 0, "scenario");
    } catch (const NonPositiveParameter& e) {
      throw ConfigParse(e.what(), 0, "scenario");
    }
    return cfg;
  }
};

[[noreturn]] void unknown_section(const IniSection& s) { throw ConfigParse("unknown section", s.line, s.name); }

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioBuilder b;
  for (const auto& s : parse_ini(text)) {
    if (!b.bind(s)) unknown_section(s);
  }
  return b.finish();
}

ScenarioConfig load_scenario(const std::filesystem::path& path) { return parse_scenario(read_text_file(path)); }

SuiteSpec parse_suite(std::string_view text) {
  ScenarioBuilder b;
  SuiteSpec spec;
  bool have_suite = false;
  for (const auto& s : parse_ini(text)) {
    if (b.bind(s)) continue;
    if (s.name != "suite") unknown_section(s);
    have_suite = true;
    bind_section(s, Binder{
        {"modes", [&](const Field& f) {
           spec.modes.clear();
           for (const auto& w : f.words()) {
             const auto m = parse_mode(w);
             if (!m) f.fail("unknown controller mode '" + w + "'");
             spec.modes.push_back(*m);
           }
         }},
        {"seeds", [&](const Field& f) {
           const long long n = f.integer();
           if (n < 0) f.fail("seeds must be >= 0");
           spec.seeds = static_cast<int>(n);
         }},
        {"seed_start", [&](const Field& f) { spec.seed_start = f.unsigned_integer(); }},
        {"undisturbed", [&](const Field& f) { spec.undisturbed = f.boolean(); }},
        {"disturbed", [&](const Field& f) { spec.disturbed = f.boolean(); }},
    });
  }
  if (!have_suite) throw ConfigParse("missing [suite] section", 0, "suite");
  spec.base = b.finish();
  return spec;
}

SuiteSpec load_suite(const std::filesystem::path& path) { return parse_suite(read_text_file(path)); }

std::vector<ScenarioConfig> expand_suite(const SuiteSpec& spec) {
  std::vector<ScenarioConfig> out;
  for (const auto mode : spec.modes) {
    for (int i = 0; i < spec.seeds; ++i) {
      ScenarioConfig c = spec.base;
      c.mode = mode;
      c.seed = spec.seed_start + static_cast<std::uint64_t>(i);
      if (spec.undisturbed) {
        ScenarioConfig u = c;
        u.disturbances.clear();
        out.push_back(std::move(u));
      }
      if (spec.disturbed && !c.disturbances.empty()) out.push_back(std::move(c));
    }
  }
  return out;
}

VerifySpec parse_verify(std::string_view text) {
  VerifySpec spec;
  std::vector<double> ms{0.5, 1.0, 2.0}, kes{100.0, 1000.0, 5000.0}, fhs{2.0, 4.0, 8.0}, ds;
  for (const auto& s : parse_ini(text)) {
    if (s.name != "verify") unknown_section(s);
    bind_section(s, Binder{
        {"m", [&](const Field& f) { ms = f.numbers(); }},
        {"d", [&](const Field& f) { ds = f.numbers(); }},
        {"k_e", [&](const Field& f) { kes = f.numbers(); }},
        {"f_H", [&](const Field& f) { fhs = f.numbers(); }},
        {"amplitude", [&](const Field& f) { spec.options.amplitude = f.number(); }},
        {"omega", [&](const Field& f) { spec.options.omega = f.number(); }},
        {"prop3_duration", [&](const Field& f) { spec.options.prop3_duration = f.number(); }},
        {"prop2_v0", [&](const Field& f) { spec.options.prop2_v0 = f.number(); }},
        {"dt", [&](const Field& f) { spec.settings.dt = f.number(); }},
    });
  }
  spec.grid.clear();
  try {
    for (double m : ms) {
      for (double k_e : kes) {
        for (double f_H : fhs) {
          for (double d : ds.empty() ? std::vector<double>{compute_damping(m, 50.0, 2.0)} : ds) {
            NormalDynamicsParams p;
            p.m = m;
            p.d = d;
            p.k_e = k_e;
            p.f_H = f_H;
            p.validate();
            spec.grid.push_back(p);
          }
        }
      }
    }
  } catch (const NonPositiveParameter& e) {
    throw ConfigParse(e.what(), 0, "verify");
  }
  if (!(spec.options.omega > 0.0)) throw ConfigParse("omega must be > 0", 0, "verify.omega");
  if (!(spec.settings.dt > 0.0)) throw ConfigParse("dt must be > 0", 0, "verify.dt");
  if (!(spec.options.prop3_duration > 0.0)) throw ConfigParse("prop3_duration must be > 0", 0, "verify.prop3_duration");
  return spec;
}

VerifySpec load_verify(const std::filesystem::path& path) { return parse_verify(read_text_file(path)); }

}  // namespace forcesim
