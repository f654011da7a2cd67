// Copyright 2026 The dwil Authors
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

#include "dwil/traj.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "dwil/error.h"
#include "dwil/rng.h"

namespace dwil {
namespace {

bool AllFinite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Parses "key=value" tokens following a leading keyword.
std::map<std::string, std::string> ParseHeader(const std::string& line,
                                               std::string_view keyword) {
  std::istringstream ss(line);
  std::string word;
  ss >> word;
  if (word != keyword) {
    throw FormatError("expected '" + std::string(keyword) + "' header, got '" +
                      line + "'");
  }
  std::map<std::string, std::string> fields;
  while (ss >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) {
      throw FormatError("malformed header field '" + word + "'");
    }
    fields[word.substr(0, eq)] = word.substr(eq + 1);
  }
  return fields;
}

const std::string& Field(const std::map<std::string, std::string>& fields,
                         const std::string& key) {
  auto it = fields.find(key);
  if (it == fields.end()) throw FormatError("missing header field '" + key + "'");
  return it->second;
}

long long ParseInt(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("invalid integer '" + std::string(text) + "'");
  }
  return value;
}

uint64_t ParseUint(std::string_view text) {
  uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("invalid unsigned integer '" + std::string(text) + "'");
  }
  return value;
}

bool NextLine(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

}  // namespace

std::string_view ToString(SourceTag tag) {
  switch (tag) {
    case SourceTag::kTargetOptimal:
      return "target-optimal";
    case SourceTag::kTargetSuboptimal:
      return "target-suboptimal";
    case SourceTag::kOtherDynamics:
      return "other-dynamics";
    case SourceTag::kUnknown:
      return "unknown";
  }
  return "unknown";
}

SourceTag ParseSourceTag(std::string_view text) {
  if (text == "target-optimal") return SourceTag::kTargetOptimal;
  if (text == "target-suboptimal") return SourceTag::kTargetSuboptimal;
  if (text == "other-dynamics") return SourceTag::kOtherDynamics;
  if (text == "unknown") return SourceTag::kUnknown;
  throw FormatError("unknown source tag '" + std::string(text) + "'");
}

std::string_view ToString(SetRole role) {
  return role == SetRole::kDemonstrations ? "demonstrations" : "feasible-samples";
}

SetRole ParseSetRole(std::string_view text) {
  if (text == "demonstrations") return SetRole::kDemonstrations;
  if (text == "feasible-samples") return SetRole::kFeasibleSamples;
  throw FormatError("unknown set role '" + std::string(text) + "'");
}

void Trajectory::Validate(int state_dim, int action_dim) const {
  if (states.size() < 2) {
    throw InvalidTrajectoryError("trajectory needs at least 2 states, has " +
                                 std::to_string(states.size()));
  }
  for (const State& s : states) {
    if (s.size() != state_dim) {
      throw DimensionError("state dimension " + std::to_string(s.size()) +
                           " != " + std::to_string(state_dim));
    }
    if (!AllFinite(s)) throw InvalidTrajectoryError("non-finite state entry");
  }
  if (!actions.empty()) {
    if (actions.size() != states.size() - 1) {
      throw InvalidTrajectoryError("trajectory has " +
                                   std::to_string(actions.size()) +
                                   " actions for " +
                                   std::to_string(states.size()) + " states");
    }
    for (const Action& a : actions) {
      if (a.size() != action_dim) {
        throw DimensionError("action dimension " + std::to_string(a.size()) +
                             " != " + std::to_string(action_dim));
      }
      if (!AllFinite(a)) throw InvalidTrajectoryError("non-finite action entry");
    }
  }
}

Trajectory Trajectory::WithoutActions() const {
  Trajectory copy;
  copy.states = states;
  copy.source = source;
  copy.seed = seed;
  return copy;
}

void TrajectorySet::Validate() const {
  for (const Trajectory& t : trajectories) {
    t.Validate(state_dim, action_dim);
    if (role == SetRole::kFeasibleSamples && !t.HasActions()) {
      throw InvalidTrajectoryError("feasible-sample trajectory without actions");
    }
  }
}

size_t TrajectorySet::TransitionCount() const {
  size_t n = 0;
  for (const Trajectory& t : trajectories) n += std::max(0, t.Horizon());
  return n;
}

std::vector<std::pair<State, State>> Transitions(const Trajectory& t) {
  if (t.states.size() < 2) {
    throw InvalidTrajectoryError("no transition in a trajectory with " +
                                 std::to_string(t.states.size()) + " states");
  }
  std::vector<std::pair<State, State>> pairs;
  pairs.reserve(t.states.size() - 1);
  for (size_t i = 0; i + 1 < t.states.size(); ++i) {
    pairs.emplace_back(t.states[i], t.states[i + 1]);
  }
  return pairs;
}

double MeanPairwiseDistance(const Trajectory& x, const Trajectory& y) {
  if (x.states.empty() || y.states.empty()) {
    throw InvalidTrajectoryError("distance between empty trajectories");
  }
  size_t m = std::min(x.states.size(), y.states.size());
  double sum = 0.0;
  for (size_t t = 0; t < m; ++t) {
    if (x.states[t].size() != y.states[t].size()) {
      throw DimensionError("state dimension mismatch at step " +
                           std::to_string(t));
    }
    sum += (x.states[t] - y.states[t]).norm();
  }
  return sum / static_cast<double>(m);
}

std::string Fingerprint(const TrajectorySet& set) {
  std::ostringstream out;
  WriteTrajectorySet(out, set);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a(out.str())));
  return hex;
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw FormatError("cannot format double");
  return std::string(buffer, ptr);
}

double ParseDouble(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

void WriteTrajectorySet(std::ostream& out, const TrajectorySet& set) {
  out << "trajset role=" << ToString(set.role) << " count=" << set.size()
      << " state_dim=" << set.state_dim << " action_dim=" << set.action_dim
      << "\n";
  for (const Trajectory& t : set.trajectories) {
    out << "traj state_dim=" << set.state_dim
        << " action_dim=" << set.action_dim
        << " source_tag=" << ToString(t.source) << " seed=" << t.seed
        << " steps=" << t.states.size()
        << " actions=" << (t.HasActions() ? 1 : 0) << "\n";
    for (size_t i = 0; i < t.states.size(); ++i) {
      std::string line;
      const State& s = t.states[i];
      for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (k > 0) line += ' ';
        line += FormatDouble(s[k]);
      }
      if (t.HasActions() && i < t.actions.size()) {
        const Action& a = t.actions[i];
        for (Eigen::Index k = 0; k < a.size(); ++k) {
          line += ' ';
          line += FormatDouble(a[k]);
        }
      }
      out << line << "\n";
    }
  }
}

TrajectorySet ReadTrajectorySet(std::istream& in) {
  std::string line;
  if (!NextLine(in, line)) throw FormatError("empty trajectory file");
  auto header = ParseHeader(line, "trajset");
  TrajectorySet set;
  set.role = ParseSetRole(Field(header, "role"));
  long long count = ParseInt(Field(header, "count"));
  set.state_dim = static_cast<int>(ParseInt(Field(header, "state_dim")));
  set.action_dim = static_cast<int>(ParseInt(Field(header, "action_dim")));
  if (count < 0 || set.state_dim <= 0 || set.action_dim < 0) {
    throw FormatError("invalid set header '" + line + "'");
  }
  set.trajectories.reserve(static_cast<size_t>(count));
  for (long long i = 0; i < count; ++i) {
    if (!NextLine(in, line)) {
      throw FormatError("expected " + std::to_string(count) +
                        " trajectories, found " + std::to_string(i));
    }
    auto th = ParseHeader(line, "traj");
    if (ParseInt(Field(th, "state_dim")) != set.state_dim ||
        ParseInt(Field(th, "action_dim")) != set.action_dim) {
      throw FormatError("trajectory dimensions disagree with set header");
    }
    Trajectory t;
    t.source = ParseSourceTag(Field(th, "source_tag"));
    t.seed = ParseUint(Field(th, "seed"));
    long long steps = ParseInt(Field(th, "steps"));
    bool has_actions = ParseInt(Field(th, "actions")) != 0;
    if (steps < 1) throw FormatError("trajectory with no states");
    t.states.reserve(static_cast<size_t>(steps));
    for (long long k = 0; k < steps; ++k) {
      if (!NextLine(in, line)) throw FormatError("truncated trajectory");
      std::vector<double> values;
      std::string_view rest(line);
      while (!rest.empty()) {
        size_t sp = rest.find(' ');
        values.push_back(ParseDouble(rest.substr(0, sp)));
        if (sp == std::string_view::npos) break;
        rest.remove_prefix(sp + 1);
      }
      bool with_action = has_actions && k + 1 < steps;
      size_t expected = set.state_dim + (with_action ? set.action_dim : 0);
      if (values.size() != expected) {
        throw FormatError("step line has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(expected));
      }
      t.states.push_back(Eigen::Map<State>(values.data(), set.state_dim));
      if (with_action) {
        t.actions.push_back(
            Eigen::Map<Action>(values.data() + set.state_dim, set.action_dim));
      }
    }
    set.trajectories.push_back(std::move(t));
  }
  return set;
}

void SaveTrajectorySet(const std::filesystem::path& path,
                       const TrajectorySet& set) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  WriteTrajectorySet(out, set);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

TrajectorySet LoadTrajectorySet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return ReadTrajectorySet(in);
}

}  // namespace dwil
