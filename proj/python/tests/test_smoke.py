# Copyright 2026 The dwil Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math

import numpy as np
import pytest

import dwil


def test_score_functions():
    assert dwil.feasibility_from_distance(0.2, 0.2, 0.6) == 1.0
    assert dwil.feasibility_from_distance(0.4, 0.2, 0.6) == pytest.approx(0.5, abs=1e-12)
    assert dwil.feasibility_from_distance(0.6, 0.2, 0.6) == 0.0
    assert dwil.optimality_score(5.0, 5.0, 7.0) == 1.0
    assert dwil.optimality_score(-2.0, 5.0, 7.0) == pytest.approx(math.exp(-0.5), abs=1e-12)
    with pytest.raises(dwil.Error):
        dwil.feasibility_from_distance(0.1, 0.5, 0.5)


def test_rectify_and_probabilities():
    s0 = np.array([[0.0, 0, 0], [0.1, 0, 0], [10, 0, 0]])
    best = dwil.rectify(np.array([99.0, 50.0, 50.0]), s0, np.array([1.0, 1.0, 1.0]), 1.0)
    assert best == [99.0, 99.0, 50.0]
    with pytest.raises(dwil.EmptySupportError):
        dwil.rectify(np.array([1.0]), s0[:1], np.array([0.0]), 1.0)
    p = dwil.transition_probabilities([1.0, 0.5], [4, 6])
    assert sum(p) == pytest.approx(1.0, abs=1e-12)
    assert sum(p[:4]) == pytest.approx(4 / 7, abs=1e-12)
    assert dwil.mixture_counts([0.3, 0.6, 0.1], 1000) == [300, 600, 100]


def test_environment():
    spec = dwil.EnvSpec("driving2d", "slow")
    s = dwil.reset(spec, 3)
    nxt, term = dwil.step(spec, s, np.array([0.0]))
    assert np.linalg.norm(nxt[:2] - s[:2]) == pytest.approx(0.1, abs=1e-12)
    assert term == "none"
    traj = dwil.rollout_optimal(spec, 3)
    assert traj.shape[1] == 3
    # Step reward -1 on every transition, +100 on the final goal transition.
    assert dwil.discounted_return(spec, traj, 1.0) == pytest.approx(101 - len(traj), abs=1e-9)
    with pytest.raises(dwil.ConfigError):
        dwil.EnvSpec("cartpole")


def test_config_round_trip():
    cfg = dwil.ExperimentConfig.driving()
    text = cfg.to_json()
    assert dwil.ExperimentConfig.from_json(text).to_json() == text
    bad = json.loads(text)
    bad["bogus"] = 1
    with pytest.raises(dwil.ConfigError):
        dwil.ExperimentConfig.from_json(json.dumps(bad))


def test_pipeline(tmp_path):
    cfg = dwil.ExperimentConfig.reacher()
    cfg.num_demos = 20
    cfg.num_feasible = 10
    cfg.eval_episodes = 2
    cfg.delta_s = 0.5
    cfg = dwil.ExperimentConfig.from_json(_shrink(cfg.to_json()))
    dwil.gen_demos(cfg, tmp_path)
    demos = dwil.load_trajectories(tmp_path / "demos.traj")
    assert len(demos) == 20
    assert not any(d["has_actions"] for d in demos)
    dwil.score(cfg, tmp_path)
    rows = (tmp_path / "scores.csv").read_text().splitlines()
    assert rows[0] == "id,source_tag,F,w_f,eta,f_rec,w_o,w"
    assert len(rows) == 21
    dwil.train_eval(cfg, "ours", tmp_path)
    assert (tmp_path / "results.csv").read_text().startswith("variant,seed,")
    with pytest.raises(dwil.Error):
        dwil.train_eval(cfg, "ours", tmp_path / "missing")


def _shrink(text):
    c = json.loads(text)
    c["invdyn"].update(hidden=16, num_layers=3)
    c["invdyn"]["train"].update(epochs=2, batches_per_epoch=2, batch_size=64)
    c["policy"].update(hidden=8)
    c["policy"]["train"].update(epochs=1, batches_per_epoch=2, batch_size=32)
    return json.dumps(c)
