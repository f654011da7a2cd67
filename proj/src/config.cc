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

#include "dwil/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dwil/error.h"
#include "json.hpp"

namespace dwil {
namespace {

using Json = nlohmann::ordered_json;

// Reads members of one JSON object and reports any it did not consume.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Reader() = default;

  bool Has(const char* key) const { return j_.contains(key); }

  template <typename T>
  void Get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(Path(key) + ": " + e.what());
    }
  }

  const Json& Child(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string Path(const char* key) const { return path_ + "." + key; }

  void Finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key '" + path_ + "." + item.key() + "'");
      }
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json RectJson(const Rect& r) { return Json::array({r.x_min, r.y_min, r.x_max, r.y_max}); }

Rect ParseRect(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) {
    throw ConfigError(path + ": expected [x_min, y_min, x_max, y_max]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

Json TrainJson(const TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["batches_per_epoch"] = c.batches_per_epoch;
  j["loss"] = std::string(ToString(c.loss));
  j["seed"] = c.seed;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  return j;
}

void ReadTrain(Reader& r, TrainConfig& c) {
  r.Get("learning_rate", c.learning_rate);
  r.Get("batch_size", c.batch_size);
  r.Get("epochs", c.epochs);
  r.Get("batches_per_epoch", c.batches_per_epoch);
  std::string loss(ToString(c.loss));
  r.Get("loss", loss);
  c.loss = ParseLossKind(loss);
  r.Get("seed", c.seed);
  r.Get("beta1", c.beta1);
  r.Get("beta2", c.beta2);
  r.Get("epsilon", c.epsilon);
  r.Finish();
}

Json EnvJson(const EnvSpec& s) {
  Json j;
  j["family"] = std::string(ToString(s.family));
  j["variant"] = std::string(ToString(s.variant));
  j["horizon"] = s.horizon;
  j["dt"] = s.dt;
  j["gamma"] = s.gamma;
  j["seed"] = s.seed;
  if (s.family == EnvFamily::kDriving2D) {
    const Driving2DParams& p = s.driving;
    Json d;
    d["slow_speed"] = p.slow_speed;
    d["fast_speed"] = p.fast_speed;
    d["steer_limit"] = p.steer_limit;
    d["goal_center"] = Json::array({p.goal_center.x(), p.goal_center.y()});
    d["goal_radius"] = p.goal_radius;
    d["obstacle"] = RectJson(p.obstacle);
    d["world"] = RectJson(p.world);
    Json regions = Json::array();
    for (const Rect& r : p.start_regions) regions.push_back(RectJson(r));
    d["start_regions"] = regions;
    d["heading_min"] = p.heading_min;
    d["heading_max"] = p.heading_max;
    d["alpha_goal"] = p.alpha_goal;
    d["alpha_obstacle"] = p.alpha_obstacle;
    d["alpha_out"] = p.alpha_out;
    d["alpha_step"] = p.alpha_step;
    d["controller_gain"] = p.controller_gain;
    d["detour_margin"] = p.detour_margin;
    j["driving"] = d;
  } else {
    const Reacher1JParams& p = s.reacher;
    Json r;
    r["link_length"] = p.link_length;
    r["start_angle"] = p.start_angle;
    r["joint_limit"] = p.joint_limit;
    r["goal_wedge_halfangle"] = p.goal_wedge_halfangle;
    r["angular_speed_limit"] = p.angular_speed_limit;
    r["controller_gain"] = p.controller_gain;
    j["reacher"] = r;
  }
  return j;
}

// Missing members keep the values of `base`, or the family defaults when
// `base` is null or of another family.
EnvSpec ReadEnv(const Json& j, const std::string& path, const EnvSpec* base) {
  Reader r(j, path);
  std::string family = "driving2d";
  r.Get("family", family);
  EnvFamily fam = ParseEnvFamily(family);
  EnvSpec s = base && base->family == fam ? *base
              : fam == EnvFamily::kDriving2D ? DefaultDriving2D()
                                             : DefaultReacher1J();
  std::string variant(ToString(s.variant));
  r.Get("variant", variant);
  s.variant = ParseDynamicsVariant(variant);
  r.Get("horizon", s.horizon);
  r.Get("dt", s.dt);
  r.Get("gamma", s.gamma);
  r.Get("seed", s.seed);
  if (r.Has("driving")) {
    if (fam != EnvFamily::kDriving2D) {
      throw ConfigError(r.Path("driving") + ": only valid for driving2d");
    }
    Reader d(r.Child("driving"), r.Path("driving"));
    Driving2DParams& p = s.driving;
    d.Get("slow_speed", p.slow_speed);
    d.Get("fast_speed", p.fast_speed);
    d.Get("steer_limit", p.steer_limit);
    if (d.Has("goal_center")) {
      std::vector<double> g = d.Child("goal_center").get<std::vector<double>>();
      if (g.size() != 2) throw ConfigError(d.Path("goal_center") + ": need 2 values");
      p.goal_center = {g[0], g[1]};
    }
    d.Get("goal_radius", p.goal_radius);
    if (d.Has("obstacle")) p.obstacle = ParseRect(d.Child("obstacle"), d.Path("obstacle"));
    if (d.Has("world")) p.world = ParseRect(d.Child("world"), d.Path("world"));
    if (d.Has("start_regions")) {
      const Json& regions = d.Child("start_regions");
      if (!regions.is_array()) throw ConfigError(d.Path("start_regions") + ": expected a list");
      p.start_regions.clear();
      for (const Json& reg : regions) {
        p.start_regions.push_back(ParseRect(reg, d.Path("start_regions")));
      }
    }
    d.Get("heading_min", p.heading_min);
    d.Get("heading_max", p.heading_max);
    d.Get("alpha_goal", p.alpha_goal);
    d.Get("alpha_obstacle", p.alpha_obstacle);
    d.Get("alpha_out", p.alpha_out);
    d.Get("alpha_step", p.alpha_step);
    d.Get("controller_gain", p.controller_gain);
    d.Get("detour_margin", p.detour_margin);
    d.Finish();
  }
  if (r.Has("reacher")) {
    if (fam != EnvFamily::kReacher1J) {
      throw ConfigError(r.Path("reacher") + ": only valid for reacher1j");
    }
    Reader d(r.Child("reacher"), r.Path("reacher"));
    Reacher1JParams& p = s.reacher;
    d.Get("link_length", p.link_length);
    d.Get("start_angle", p.start_angle);
    d.Get("joint_limit", p.joint_limit);
    d.Get("goal_wedge_halfangle", p.goal_wedge_halfangle);
    d.Get("angular_speed_limit", p.angular_speed_limit);
    d.Get("controller_gain", p.controller_gain);
    d.Finish();
  }
  r.Finish();
  return s;
}

Json ConfigJson(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["target"] = EnvJson(c.target);
  j["demonstrator_variant"] = std::string(ToString(c.demonstrator_variant));
  j["mixture"] = {{"optimal", c.mixture.optimal},
                  {"suboptimal", c.mixture.suboptimal},
                  {"other_dynamics", c.mixture.other_dynamics}};
  j["num_demos"] = c.num_demos;
  j["num_feasible"] = c.num_feasible;
  const Corruption& k = c.suboptimal.corruption;
  j["suboptimal"] = {{"level_min", c.suboptimal.level_min},
                     {"level_max", c.suboptimal.level_max},
                     {"noise_scale", k.noise_scale},
                     {"noop_rate", k.noop_rate},
                     {"noop_min", k.noop_min},
                     {"noop_max", k.noop_max}};
  j["invdyn"] = {{"hidden", c.invdyn.hidden},
                 {"num_layers", c.invdyn.num_layers},
                 {"train", TrainJson(c.invdyn.train)}};
  j["policy"] = {{"hidden", c.policy.hidden},
                 {"num_layers", c.policy.num_layers},
                 {"train", TrainJson(c.policy.train)}};
  j["optimality"] = {{"sigma", c.optimality.sigma},
                     {"delta", c.optimality.delta},
                     {"gamma", c.optimality.gamma}};
  j["delta_s"] = c.delta_s;
  j["eval_episodes"] = c.eval_episodes;
  j["seed"] = c.seed;
  j["variants"] = c.variants;
  j["seeds"] = c.seeds;
  j["sweep"] = {{"parameter", c.sweep.parameter}, {"factors", c.sweep.factors}};
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig ReadConfig(const Json& j) {
  Reader r(j, "config");
  std::string family = "driving2d";
  if (r.Has("target") && j.at("target").is_object() &&
      j.at("target").contains("family")) {
    family = j.at("target").at("family").get<std::string>();
  }
  ExperimentConfig c = ParseEnvFamily(family) == EnvFamily::kDriving2D
                           ? DefaultDrivingExperiment()
                           : DefaultReacherExperiment();
  r.Get("name", c.name);
  if (r.Has("target")) c.target = ReadEnv(r.Child("target"), r.Path("target"), &c.target);
  std::string demonstrator(ToString(c.demonstrator_variant));
  r.Get("demonstrator_variant", demonstrator);
  c.demonstrator_variant = ParseDynamicsVariant(demonstrator);
  if (r.Has("mixture")) {
    Reader m(r.Child("mixture"), r.Path("mixture"));
    m.Get("optimal", c.mixture.optimal);
    m.Get("suboptimal", c.mixture.suboptimal);
    m.Get("other_dynamics", c.mixture.other_dynamics);
    m.Finish();
  }
  r.Get("num_demos", c.num_demos);
  r.Get("num_feasible", c.num_feasible);
  if (r.Has("suboptimal")) {
    Reader s(r.Child("suboptimal"), r.Path("suboptimal"));
    Corruption& k = c.suboptimal.corruption;
    s.Get("level_min", c.suboptimal.level_min);
    s.Get("level_max", c.suboptimal.level_max);
    s.Get("noise_scale", k.noise_scale);
    s.Get("noop_rate", k.noop_rate);
    s.Get("noop_min", k.noop_min);
    s.Get("noop_max", k.noop_max);
    s.Finish();
  }
  if (r.Has("invdyn")) {
    Reader s(r.Child("invdyn"), r.Path("invdyn"));
    s.Get("hidden", c.invdyn.hidden);
    s.Get("num_layers", c.invdyn.num_layers);
    if (s.Has("train")) {
      Reader t(s.Child("train"), s.Path("train"));
      ReadTrain(t, c.invdyn.train);
    }
    s.Finish();
  }
  if (r.Has("policy")) {
    Reader s(r.Child("policy"), r.Path("policy"));
    s.Get("hidden", c.policy.hidden);
    s.Get("num_layers", c.policy.num_layers);
    if (s.Has("train")) {
      Reader t(s.Child("train"), s.Path("train"));
      ReadTrain(t, c.policy.train);
    }
    s.Finish();
  }
  if (r.Has("optimality")) {
    Reader s(r.Child("optimality"), r.Path("optimality"));
    s.Get("sigma", c.optimality.sigma);
    s.Get("delta", c.optimality.delta);
    s.Get("gamma", c.optimality.gamma);
    s.Finish();
  }
  r.Get("delta_s", c.delta_s);
  r.Get("eval_episodes", c.eval_episodes);
  r.Get("seed", c.seed);
  r.Get("variants", c.variants);
  r.Get("seeds", c.seeds);
  if (r.Has("sweep")) {
    Reader s(r.Child("sweep"), r.Path("sweep"));
    s.Get("parameter", c.sweep.parameter);
    s.Get("factors", c.sweep.factors);
    s.Finish();
  }
  r.Get("output_dir", c.output_dir);
  r.Finish();
  c.Validate();
  return c;
}

Json ParseJson(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

ExperimentConfig BaseExperiment() {
  ExperimentConfig c;
  c.invdyn.train.epochs = 40;
  c.invdyn.train.batches_per_epoch = 20;
  c.policy.train.epochs = 200;
  c.policy.train.batches_per_epoch = 25;
  return c;
}

}  // namespace

EnvSpec ExperimentConfig::Demonstrator() const {
  return WithVariant(target, demonstrator_variant);
}

void ExperimentConfig::Validate() const {
  target.Validate();
  Demonstrator().Validate();
  const double parts[] = {mixture.optimal, mixture.suboptimal,
                          mixture.other_dynamics};
  for (double p : parts) {
    if (!(p >= 0.0)) throw ConfigError("mixture ratios must be non-negative");
  }
  if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
    throw ConfigError("mixture ratios must sum to 1");
  }
  if (num_demos < 1) throw ConfigError("num_demos must be at least 1");
  if (num_feasible < 1) throw ConfigError("num_feasible must be at least 1");
  if (!(suboptimal.level_min >= 0.0 &&
        suboptimal.level_max >= suboptimal.level_min &&
        suboptimal.level_max <= 1.0)) {
    throw ConfigError("suboptimal levels must satisfy 0 <= min <= max <= 1");
  }
  if (invdyn.hidden < 1 || invdyn.num_layers < 1 || policy.hidden < 1 ||
      policy.num_layers < 1) {
    throw ConfigError("network sizes must be positive");
  }
  invdyn.train.Validate();
  policy.train.Validate();
  optimality.Validate();
  if (!(delta_s > 0.0)) throw ConfigError("delta_s must be positive");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be at least 1");
  for (const std::string& v : variants) ParseVariant(v);
  if (sweep.parameter != "sigma" && sweep.parameter != "delta_s") {
    throw ConfigError("sweep.parameter must be sigma or delta_s");
  }
  for (double f : sweep.factors) {
    if (!(f > 0.0)) throw ConfigError("sweep factors must be positive");
  }
}

ExperimentConfig DefaultDrivingExperiment() {
  ExperimentConfig c = BaseExperiment();
  c.name = "driving2d";
  c.target = DefaultDriving2D(DynamicsVariant::kSlow);
  c.demonstrator_variant = DynamicsVariant::kFast;
  c.mixture = {0.30, 0.60, 0.10};
  // same ratios as the env defaults, on the scale of sigma
  Driving2DParams& p = c.target.driving;
  p.alpha_goal = 4000.0;
  p.alpha_obstacle = -2000.0;
  p.alpha_out = -2000.0;
  p.alpha_step = -40.0;
  c.optimality.sigma = 100.0;
  c.optimality.gamma = c.target.gamma;
  c.delta_s = 0.001;
  return c;
}

ExperimentConfig DefaultReacherExperiment() {
  ExperimentConfig c = BaseExperiment();
  c.name = "reacher1j";
  c.target = DefaultReacher1J(DynamicsVariant::kCounterClockwise);
  c.demonstrator_variant = DynamicsVariant::kClockwise;
  c.mixture = {0.05, 0.90, 0.05};
  // distances, and so returns, on the scale of sigma
  c.target.reacher.link_length = 10.0;
  c.optimality.sigma = 50.0;
  c.optimality.gamma = c.target.gamma;
  c.delta_s = 0.001;
  return c;
}

std::string ConfigToJson(const ExperimentConfig& config) {
  return ConfigJson(config).dump(2) + "\n";
}

ExperimentConfig ParseConfig(std::string_view json_text) {
  Json j = ParseJson(json_text);
  if (j.is_object() && j.contains("manifest") && j.contains("config")) {
    return ReadConfig(j.at("config"));
  }
  return ReadConfig(j);
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string EnvSpecToJson(const EnvSpec& spec) {
  return EnvJson(spec).dump(2) + "\n";
}

EnvSpec ParseEnvSpec(std::string_view json_text) {
  return ReadEnv(ParseJson(json_text), "env", nullptr);
}

}  // namespace dwil
