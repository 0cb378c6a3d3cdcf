// Copyright 2026 The cbfform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cbf/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cbf/errors.hpp"

namespace cbf {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json vecJson(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Collects schema problems with their JSON paths instead of stopping at the
// first one.
class Reader {
 public:
  std::vector<std::string>& problems() { return problems_; }

  void fail(const std::string& path, const std::string& what) { problems_.push_back(path + ": " + what); }

  const json* member(const json& obj, const std::string& path, const char* key, bool required = true) {
    if (!obj.is_object()) {
      fail(path, "expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + "." + key, "missing");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& obj, const std::string& path, const char* key, double fallback, bool required = true) {
    const json* v = member(obj, path, key, required);
    if (v == nullptr) return fallback;
    if (!v->is_number()) {
      fail(path + "." + key, "expected a number");
      return fallback;
    }
    return v->get<double>();
  }

  int integer(const json& obj, const std::string& path, const char* key, int fallback, bool required = true) {
    const json* v = member(obj, path, key, required);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return fallback;
    }
    return v->get<int>();
  }

  std::string string(const json& obj, const std::string& path, const char* key, std::string fallback,
                     bool required = true) {
    const json* v = member(obj, path, key, required);
    if (v == nullptr) return fallback;
    if (!v->is_string()) {
      fail(path + "." + key, "expected a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  Vec3 vec(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
      fail(path, "expected an array of 3 numbers");
      return Vec3::Zero();
    }
    return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  Vec3 vec(const json& obj, const std::string& path, const char* key, Vec3 fallback = Vec3::Zero(),
           bool required = true) {
    const json* v = member(obj, path, key, required);
    if (v == nullptr) return fallback;
    return vec(*v, path + "." + key);
  }

  std::vector<Vec3> vecList(const json& obj, const std::string& path, const char* key) {
    std::vector<Vec3> out;
    const json* v = member(obj, path, key);
    if (v == nullptr) return out;
    if (!v->is_array()) {
      fail(path + "." + key, "expected an array");
      return out;
    }
    for (std::size_t k = 0; k < v->size(); ++k) out.push_back(vec((*v)[k], fmt::format("{}.{}[{}]", path, key, k)));
    return out;
  }

 private:
  std::vector<std::string> problems_;
};

json omegaJson(const OmegaSignal& w) {
  return std::visit(
      Overloaded{
          [](const OmegaSignal::Zero&) { return json{{"type", "zero"}}; },
          [](const OmegaSignal::Constant& c) { return json{{"type", "constant"}, {"w", vecJson(c.w)}}; },
          [](const OmegaSignal::Sinusoidal& s) {
            return json{{"type", "sinusoidal"}, {"axis", vecJson(s.axis)}, {"bias", s.bias},
                        {"amplitude", s.amplitude}, {"freq", s.freq}, {"phase", s.phase}};
          },
          [](const OmegaSignal::PiecewiseConstant& p) {
            json values = json::array();
            for (const auto& v : p.values) values.push_back(vecJson(v));
            return json{{"type", "piecewise_constant"}, {"switches", p.switches}, {"values", values}};
          },
      },
      w.kind());
}

OmegaSignal readOmega(Reader& rd, const json& j, const std::string& path) {
  const std::string type = rd.string(j, path, "type", "zero");
  if (type == "zero") return OmegaSignal::zero();
  if (type == "constant") return OmegaSignal::constant(rd.vec(j, path, "w"));
  if (type == "sinusoidal") {
    OmegaSignal::Sinusoidal s;
    s.axis = rd.vec(j, path, "axis");
    s.bias = rd.number(j, path, "bias", 0.0, false);
    s.amplitude = rd.number(j, path, "amplitude", 0.0);
    s.freq = rd.number(j, path, "freq", 1.0);
    s.phase = rd.number(j, path, "phase", 0.0, false);
    return OmegaSignal(s);
  }
  if (type == "piecewise_constant") {
    OmegaSignal::PiecewiseConstant p;
    if (const json* sw = rd.member(j, path, "switches")) {
      if (sw->is_array()) {
        for (std::size_t k = 0; k < sw->size(); ++k) {
          if ((*sw)[k].is_number()) {
            p.switches.push_back((*sw)[k].get<double>());
          } else {
            rd.fail(fmt::format("{}.switches[{}]", path, k), "expected a number");
          }
        }
      } else {
        rd.fail(path + ".switches", "expected an array");
      }
    }
    p.values = rd.vecList(j, path, "values");
    if (p.values.empty()) p.values.push_back(Vec3::Zero());
    return OmegaSignal(p);
  }
  rd.fail(path + ".type", fmt::format("unknown angular-velocity signal '{}'", type));
  return OmegaSignal::zero();
}

json leaderJson(const LeaderTrajectory& l) {
  return std::visit(
      Overloaded{
          [](const LeaderTrajectory::Constant& c) { return json{{"type", "constant"}, {"position", vecJson(c.position)}}; },
          [](const LeaderTrajectory::ConstantVelocity& c) {
            return json{{"type", "constant_velocity"}, {"position", vecJson(c.position)}, {"velocity", vecJson(c.velocity)}};
          },
          [](const LeaderTrajectory::ConstantAcceleration& c) {
            return json{{"type", "constant_acceleration"},
                        {"position", vecJson(c.position)},
                        {"velocity", vecJson(c.velocity)},
                        {"acceleration", vecJson(c.acceleration)}};
          },
          [](const LeaderTrajectory::Sinusoidal& s) {
            return json{{"type", "sinusoidal"}, {"center", vecJson(s.center)}, {"amplitude", vecJson(s.amplitude)},
                        {"omega", vecJson(s.omega)}, {"phase", vecJson(s.phase)}};
          },
          [](const LeaderTrajectory::Sampled& s) {
            json pts = json::array();
            for (const auto& p : s.points) pts.push_back(vecJson(p));
            return json{{"type", "sampled"}, {"t0", s.t0}, {"dt", s.dt}, {"points", pts}};
          },
      },
      l.kind());
}

LeaderTrajectory readLeader(Reader& rd, const json& j, const std::string& path) {
  const std::string type = rd.string(j, path, "type", "constant");
  if (type == "constant") return LeaderTrajectory(LeaderTrajectory::Constant{rd.vec(j, path, "position")});
  if (type == "constant_velocity") {
    return LeaderTrajectory(LeaderTrajectory::ConstantVelocity{rd.vec(j, path, "position"), rd.vec(j, path, "velocity")});
  }
  if (type == "constant_acceleration") {
    return LeaderTrajectory(LeaderTrajectory::ConstantAcceleration{
        rd.vec(j, path, "position"), rd.vec(j, path, "velocity"), rd.vec(j, path, "acceleration")});
  }
  if (type == "sinusoidal") {
    return LeaderTrajectory(LeaderTrajectory::Sinusoidal{rd.vec(j, path, "center"), rd.vec(j, path, "amplitude"),
                                                         rd.vec(j, path, "omega"),
                                                         rd.vec(j, path, "phase", Vec3::Zero(), false)});
  }
  if (type == "sampled") {
    LeaderTrajectory::Sampled s;
    s.t0 = rd.number(j, path, "t0", 0.0, false);
    s.dt = rd.number(j, path, "dt", 0.1);
    s.points = rd.vecList(j, path, "points");
    if (s.points.size() < 4 || !(s.dt > 0.0)) {
      rd.fail(path, "sampled leader needs at least 4 points and dt > 0");
      return LeaderTrajectory();
    }
    return LeaderTrajectory(s);
  }
  rd.fail(path + ".type", fmt::format("unknown leader trajectory '{}'", type));
  return LeaderTrajectory();
}

std::string lineColumn(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("{}:{}", line, col);
}

}  // namespace

std::vector<std::string> Scenario::problems() const {
  std::vector<std::string> out = formation.problems();
  const int n = formation.n;
  for (auto& p : controller.problems(n)) out.push_back(std::move(p));
  for (auto& p : sim.problems(formation.r)) out.push_back(std::move(p));
  if (static_cast<int>(initial.agents.size()) != n) {
    out.push_back(fmt::format("initial: {} agents listed, formation has n = {}", initial.agents.size(), n));
    return out;
  }
  bool statesFinite = true;
  for (int i = 1; i <= n; ++i) {
    const auto& a = initial.agents[static_cast<std::size_t>(i - 1)];
    if (!a.p.allFinite() || !a.v.allFinite()) {
      out.push_back(fmt::format("initial: agent {} state is not finite", i));
      statesFinite = false;
    }
  }
  if (!statesFinite) return out;
  if (formation.problems().empty()) {
    const Vec3 dp = initial.agents[0].p - formation.leader.position(initial.t);
    const Vec3 dv = initial.agents[0].v - formation.leader.velocity(initial.t);
    if (dp.norm() > 1e-9 || dv.norm() > 1e-9) {
      out.push_back("initial: leader (agent 1) must start on its reference trajectory");
    }
  }
  // Start separation only needs a usable radius; judge it even when other fields are bad.
  if (std::isfinite(formation.r) && formation.r > 0.0) {
    const double floor = sim.problems(formation.r).empty() ? sim.floorFor(formation.r) : 0.0;
    for (int i = 2; i <= n; ++i) {
      const double d = (initial.agents[static_cast<std::size_t>(i - 1)].p - initial.agents[static_cast<std::size_t>(i - 2)].p).norm() -
                       formation.r;
      if (!(d > floor)) {
        out.push_back(fmt::format("initial: edge {} has d(0) = {} (agents must start more than r apart)", i, d));
      }
    }
  }
  return out;
}

void Scenario::validate() const {
  auto p = problems();
  if (!p.empty()) throw ValidationError(std::move(p));
}

json toJson(const Scenario& s) {
  json edges = json::array();
  for (const auto& e : s.formation.edges) {
    edges.push_back({{"c", e.c}, {"g_star", vecJson(e.gStar.vec())}, {"omega_star", omegaJson(e.omega)}});
  }
  json formation = {{"n", s.formation.n}, {"r", s.formation.r}, {"leader", leaderJson(s.formation.leader)},
                    {"edges", edges}};
  if (std::isfinite(s.formation.maxEdge)) formation["D"] = s.formation.maxEdge;
  json followers = json::array();
  for (const auto& g : s.controller.gains) {
    followers.push_back({{"k_p", g.kp}, {"k_v", g.kv}, {"k_o", g.ko}, {"eta_p", g.hp.eta}, {"eta_v", g.hv.eta}});
  }
  json positions = json::array();
  json velocities = json::array();
  for (const auto& a : s.initial.agents) {
    positions.push_back(vecJson(a.p));
    velocities.push_back(vecJson(a.v));
  }
  return json{
      {"label", s.label},
      {"formation", formation},
      {"controller", {{"variant", std::string(toString(s.controller.variant))}, {"followers", followers}}},
      {"sim",
       {{"dt", s.sim.dt},
        {"t_end", s.sim.tEnd},
        {"integrator", std::string(toString(s.sim.integrator))},
        {"d_floor", s.sim.dFloor},
        {"record_stride", s.sim.recordStride}}},
      {"initial", {{"t", s.initial.t}, {"positions", positions}, {"velocities", velocities}}},
  };
}

Scenario scenarioFromJson(const json& j) {
  Reader rd;
  Scenario s;
  s.label = rd.string(j, "$", "label", "unnamed", false);

  static const json kEmpty = json::object();
  const json* f = rd.member(j, "$", "formation");
  const json& fj = f != nullptr ? *f : kEmpty;
  s.formation.r = rd.number(fj, "$.formation", "r", 0.0);
  s.formation.maxEdge = rd.number(fj, "$.formation", "D", std::numeric_limits<double>::infinity(), false);
  if (const json* l = rd.member(fj, "$.formation", "leader")) s.formation.leader = readLeader(rd, *l, "$.formation.leader");
  if (const json* edges = rd.member(fj, "$.formation", "edges")) {
    if (!edges->is_array()) {
      rd.fail("$.formation.edges", "expected an array");
    } else {
      for (std::size_t k = 0; k < edges->size(); ++k) {
        const std::string path = fmt::format("$.formation.edges[{}]", k);
        const json& ej = (*edges)[k];
        FormationEdge edge;
        edge.c = rd.number(ej, path, "c", 0.0);
        const Vec3 g = rd.vec(ej, path, "g_star", Vec3::UnitX());
        if (std::abs(g.norm() - 1.0) > 1e-9) {
          rd.fail(path + ".g_star", fmt::format("must be a unit vector (norm {})", g.norm()));
        } else {
          edge.gStar = UnitVec3(g);
        }
        if (const json* w = rd.member(ej, path, "omega_star", false)) edge.omega = readOmega(rd, *w, path + ".omega_star");
        s.formation.edges.push_back(std::move(edge));
      }
    }
  }
  s.formation.n = static_cast<int>(s.formation.edges.size()) + 1;
  const int declaredN = rd.integer(fj, "$.formation", "n", s.formation.n, false);
  if (declaredN != s.formation.n) {
    rd.fail("$.formation.n", fmt::format("n = {} disagrees with {} edges (expected n = edges + 1)", declaredN,
                                         s.formation.edges.size()));
  }

  const json* c = rd.member(j, "$", "controller");
  const json& cj = c != nullptr ? *c : kEmpty;
  try {
    s.controller.variant = nominalVariantFromString(rd.string(cj, "$.controller", "variant", "distributed", false));
  } catch (const ValidationError& e) {
    rd.fail("$.controller.variant", e.problems().front());
  }
  if (const json* fl = rd.member(cj, "$.controller", "followers")) {
    if (!fl->is_array()) {
      rd.fail("$.controller.followers", "expected an array");
    } else {
      for (std::size_t k = 0; k < fl->size(); ++k) {
        const std::string path = fmt::format("$.controller.followers[{}]", k);
        const json& gj = (*fl)[k];
        FollowerGains g;
        g.kp = rd.number(gj, path, "k_p", 0.0);
        g.kv = rd.number(gj, path, "k_v", 0.0);
        g.ko = rd.number(gj, path, "k_o", 0.0);
        g.hp.eta = rd.number(gj, path, "eta_p", 1.0, false);
        g.hv.eta = rd.number(gj, path, "eta_v", 1.0, false);
        s.controller.gains.push_back(g);
      }
    }
  }

  if (const json* sj = rd.member(j, "$", "sim", false)) {
    s.sim.dt = rd.number(*sj, "$.sim", "dt", s.sim.dt, false);
    s.sim.tEnd = rd.number(*sj, "$.sim", "t_end", s.sim.tEnd, false);
    s.sim.dFloor = rd.number(*sj, "$.sim", "d_floor", s.sim.dFloor, false);
    s.sim.recordStride = rd.integer(*sj, "$.sim", "record_stride", s.sim.recordStride, false);
    try {
      s.sim.integrator = integratorFromString(rd.string(*sj, "$.sim", "integrator", "rk4", false));
    } catch (const ValidationError& e) {
      rd.fail("$.sim.integrator", e.problems().front());
    }
  }

  if (const json* ij = rd.member(j, "$", "initial")) {
    s.initial.t = rd.number(*ij, "$.initial", "t", 0.0, false);
    const auto p = rd.vecList(*ij, "$.initial", "positions");
    const auto v = rd.vecList(*ij, "$.initial", "velocities");
    if (p.size() != v.size()) {
      rd.fail("$.initial", fmt::format("{} positions but {} velocities", p.size(), v.size()));
    }
    for (std::size_t k = 0; k < std::min(p.size(), v.size()); ++k) s.initial.agents.push_back({p[k], v[k]});
  }

  auto problems = std::move(rd.problems());
  if (problems.empty()) problems = s.problems();
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return s;
}

Scenario parseScenario(std::string_view text, std::string_view sourceName) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}:{}: {}", sourceName, lineColumn(text, e.byte), e.what()));
  }
  return scenarioFromJson(j);
}

Scenario loadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseScenario(ss.str(), path.string());
}

bool operator==(const Scenario& a, const Scenario& b) { return toJson(a) == toJson(b); }

namespace {

double parseNumber(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError({fmt::format("override {}: '{}' is not a number", key, value)});
  }
  return out;
}

// Splits "k_o_3" into ("k_o", 3); returns index 0 without a suffix.
std::pair<std::string, int> splitAgentSuffix(std::string_view key) {
  const auto pos = key.rfind('_');
  if (pos != std::string_view::npos && pos + 1 < key.size()) {
    int idx = 0;
    const auto tail = key.substr(pos + 1);
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), idx);
    if (ec == std::errc() && ptr == tail.data() + tail.size()) return {std::string(key.substr(0, pos)), idx};
  }
  return {std::string(key), 0};
}

}  // namespace

void applyOverride(Scenario& s, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError({fmt::format("override '{}' must have the form key=value", assignment)});
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string_view value = assignment.substr(eq + 1);
  const int n = s.formation.n;
  const auto follower = [&](int i) -> FollowerGains& {
    if (i < 2 || i > n) throw ValidationError({fmt::format("override {}: follower index must be in 2..{}", key, n)});
    return s.controller.gains.at(static_cast<std::size_t>(i - 2));
  };

  const auto [base, idx] = splitAgentSuffix(key);
  static const std::vector<std::string> gainKeys = {"k_p", "k_v", "k_o", "eta_p", "eta_v"};
  if (std::find(gainKeys.begin(), gainKeys.end(), base) != gainKeys.end()) {
    const double v = parseNumber(key, value);
    const auto set = [&](FollowerGains& g) {
      if (base == "k_p") g.kp = v;
      if (base == "k_v") g.kv = v;
      if (base == "k_o") g.ko = v;
      if (base == "eta_p") g.hp.eta = v;
      if (base == "eta_v") g.hv.eta = v;
    };
    if (idx == 0) {
      for (auto& g : s.controller.gains) set(g);
    } else {
      set(follower(idx));
    }
  } else if (base == "c" && idx != 0) {
    follower(idx);
    s.formation.edges.at(static_cast<std::size_t>(idx - 2)).c = parseNumber(key, value);
  } else if (key.size() >= 3 && (key[0] == 'p' || key[0] == 'v') &&
             (key.back() == 'x' || key.back() == 'y' || key.back() == 'z')) {
    int agent = 0;
    const auto digits = key.substr(1, key.size() - 2);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), agent);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || agent < 1 || agent > n) {
      throw ValidationError({fmt::format("unknown override key '{}'", key)});
    }
    auto& a = s.initial.agents.at(static_cast<std::size_t>(agent - 1));
    Vec3& target = key[0] == 'p' ? a.p : a.v;
    target[key.back() - 'x'] = parseNumber(key, value);
  } else if (key == "r") {
    s.formation.r = parseNumber(key, value);
  } else if (key == "dt") {
    s.sim.dt = parseNumber(key, value);
  } else if (key == "t_end") {
    s.sim.tEnd = parseNumber(key, value);
  } else if (key == "d_floor") {
    s.sim.dFloor = parseNumber(key, value);
  } else if (key == "record_stride") {
    const double v = parseNumber(key, value);
    if (v != std::floor(v)) throw ValidationError({fmt::format("override {}: expected an integer", key)});
    s.sim.recordStride = static_cast<int>(v);
  } else if (key == "integrator") {
    s.sim.integrator = integratorFromString(value);
  } else if (key == "variant") {
    s.controller.variant = nominalVariantFromString(value);
  } else if (key == "label") {
    s.label = std::string(value);
  } else {
    throw ValidationError({fmt::format("unknown override key '{}'", key)});
  }
  s.validate();
}

namespace {

Scenario fourAgentPreset() {
  Scenario s;
  s.label = "paper-4agent";
  s.formation.n = 4;
  s.formation.r = 0.5;
  s.formation.maxEdge = 5.0;
  s.formation.leader = LeaderTrajectory(LeaderTrajectory::Constant{Vec3::Zero()});
  s.formation.edges = {
      {2.0, UnitVec3(1.0, 0.0, 0.0), OmegaSignal::zero()},
      {2.0, UnitVec3(0.0, 1.0, 0.0), OmegaSignal::zero()},
      {2.0, UnitVec3(0.0, 0.0, 1.0), OmegaSignal::zero()},
  };
  s.controller.variant = NominalVariant::Distributed;
  s.controller.gains = {
      {.kp = 10.0, .kv = 7.0, .ko = 7.0},
      {.kp = 14.0, .kv = 11.0, .ko = 11.0},
      {.kp = 16.0, .kv = 12.0, .ko = 12.0},
  };
  s.sim.dt = 0.01;
  s.sim.tEnd = 30.0;
  // Each follower starts on the far side of its predecessor, so the straight
  // nominal path cuts through the safety sphere.
  const Vec3 p2(-2.0, 0.3, 0.0);
  const Vec3 p3 = p2 + Vec3(0.3, -2.0, 0.2);
  const Vec3 p4 = p3 + Vec3(0.2, 0.3, -2.0);
  s.initial.agents = {
      {Vec3::Zero(), Vec3::Zero()},
      {p2, Vec3(0.2, 0.0, 0.0)},
      {p3, Vec3(-0.2, 0.0, 0.0)},
      {p4, Vec3(0.0, -1.0, 0.0)},
  };
  return s;
}

Scenario twoAgent() {
  Scenario s;
  s.label = "two-agent";
  s.formation.n = 2;
  s.formation.r = 0.5;
  s.formation.edges = {{2.0, UnitVec3(1.0, 0.0, 0.0), OmegaSignal::zero()}};
  s.controller.variant = NominalVariant::Centralized;
  s.controller.gains = {{.kp = 10.0, .kv = 7.0, .ko = 7.0}};
  s.sim.dt = 0.01;
  s.sim.tEnd = 20.0;
  s.initial.agents = {{Vec3::Zero(), Vec3::Zero()}, {Vec3(-2.0, 0.4, 0.1), Vec3(0.5, 0.0, 0.0)}};
  return s;
}

Scenario rotatingFourAgent() {
  Scenario s = fourAgentPreset();
  s.label = "rotating-4agent";
  s.formation.leader =
      LeaderTrajectory(LeaderTrajectory::ConstantVelocity{Vec3::Zero(), Vec3(0.2, 0.0, 0.0)});
  s.formation.edges[0].omega = OmegaSignal::constant(Vec3(0.0, 0.0, 0.3));
  s.formation.edges[1].omega = OmegaSignal(OmegaSignal::Sinusoidal{Vec3::UnitZ(), 0.0, 0.4, 0.5, 0.0});
  s.formation.edges[2].omega = OmegaSignal::zero();
  s.initial.agents[0].v = Vec3(0.2, 0.0, 0.0);
  return s;
}

}  // namespace

std::vector<std::string> presetNames() { return {"paper-4agent", "two-agent", "rotating-4agent"}; }

Scenario preset(std::string_view name) {
  Scenario s;
  if (name == "paper-4agent") {
    s = fourAgentPreset();
  } else if (name == "two-agent") {
    s = twoAgent();
  } else if (name == "rotating-4agent") {
    s = rotatingFourAgent();
  } else {
    throw ValidationError({fmt::format("unknown preset '{}'", name)});
  }
  s.validate();
  return s;
}

json runMetadata(const Scenario& s, const TrajectoryRecord& record, double wallTimeSeconds) {
  json j = {
      {"scenario_label", s.label},
      {"termination", std::string(toString(record.termination))},
      {"min_d", record.minD},
      {"max_abs_phi", record.maxAbsPhi},
      {"wall_time_s", wallTimeSeconds},
      {"config_echo", toJson(s)},
      {"rows", record.rows.size()},
      {"rhs_evaluations", record.rhsEvaluations},
  };
  if (record.violationEdge) j["violation_edge"] = *record.violationEdge;
  if (record.violationTime) j["violation_time"] = *record.violationTime;
  if (!record.message.empty()) j["message"] = record.message;
  if (!record.rows.empty()) {
    const auto errs = errorStates(record.finalState(), s.formation);
    json finalErr = json::array();
    for (const auto& e : errs) finalErr.push_back(e.pTilde.norm());
    j["final_position_error"] = finalErr;
  }
  return j;
}

}  // namespace cbf
