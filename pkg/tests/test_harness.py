"""Config parsing, artifacts, Pareto extraction, SVG rendering, CLI."""

import csv
import json
import os
import xml.etree.ElementTree as ET
from dataclasses import replace

import numpy as np
import pytest

from bonn.cli import main
from bonn.config import ConfigError, TrainConfig, parse_config, resolve, write_config
from bonn.harness import (build_policy, dump_option_latents, load_run,
                          render_episode, run_sweep, run_train, trace_to_json)
from bonn.pareto import ParetoPoint, is_dominated, pareto_front
from bonn.render import PALETTE, UnsupportedEnvError, render_trajectory_svg


def tiny_config(tmp_path, **kw):
    base = dict(env="cartpole", iterations=2, batch=2, eval_episodes=3,
                max_steps=20, seed=1, out_dir=str(tmp_path / "run"))
    base.update(kw)
    return TrainConfig(**base)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestParseConfig:
    def test_stated_fields_and_defaults(self):
        cfg = parse_config("env = cartpole\nlambda = 0.5\nseed = 1")
        assert cfg.env == "cartpole"
        assert cfg.lam == 0.5
        assert cfg.seed == 1
        assert cfg.gamma == 0.99  # untouched default

    def test_range_error_names_key_and_line(self):
        with pytest.raises(ConfigError, match="line 2") as err:
            parse_config("env = cartpole\nlambda = -1")
        assert "lambda" in str(err.value)

    def test_empty_text_gives_defaults(self):
        cfg = parse_config("")
        assert cfg == TrainConfig()

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("learning = fast")

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("env cartpole")

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# a comment\n\nenv = rooms  # trailing\n")
        assert cfg.env == "rooms"

    def test_cli_overrides_win(self):
        cfg = parse_config("lambda = 0.5", {"lam": 2.0, "seed": 9})
        assert cfg.lam == 2.0
        assert cfg.seed == 9

    def test_bool_values(self):
        assert parse_config("force_full_obs = true").force_full_obs
        assert not parse_config("option_recurrent = 0").option_recurrent
        with pytest.raises(ConfigError):
            parse_config("force_full_obs = maybe")

    def test_round_trip_through_writer(self):
        cfg = resolve(parse_config("env = rooms\nk = 3\nlambda = 1.5"))
        again = resolve(parse_config(write_config(cfg)))
        assert cfg == again


class TestResolve:
    def test_env_defaults(self):
        cfg = resolve(TrainConfig(env="cartpole"))
        assert (cfg.n_x, cfg.n_y, cfg.n_gru) == (0, 5, 5)
        assert cfg.max_steps == 200
        cfg = resolve(TrainConfig(env="rooms", obs_mode="blind"))
        assert (cfg.n_x, cfg.n_y, cfg.n_gru) == (0, 20, 10)
        assert cfg.max_steps == 100
        cfg = resolve(TrainConfig(env="rooms", obs_mode="split", k=3))
        assert (cfg.n_x, cfg.n_y, cfg.n_gru) == (10, 10, 10)
        assert cfg.max_steps == 200
        cfg = resolve(TrainConfig(env="oracle-maze"))
        assert (cfg.n_x, cfg.n_y, cfg.n_gru) == (10, 0, 5)

    def test_split_only_for_rooms(self):
        with pytest.raises(ConfigError):
            resolve(TrainConfig(env="cartpole", obs_mode="split"))

    def test_discrete_needs_matching_widths(self):
        cfg = resolve(TrainConfig(env="rooms", k_options=9))  # n_y=20, n_gru=10
        with pytest.raises(ConfigError, match="dot product"):
            build_policy(cfg)

    def test_explicit_sizes_kept(self):
        cfg = resolve(TrainConfig(env="rooms", n_y=10, n_gru=10, k_options=9))
        assert build_policy(cfg).n_options == 9


class TestRunTrain:
    def test_zero_iterations_header_only_and_init_params(self, tmp_path):
        cfg = tiny_config(tmp_path, iterations=0, eval_episodes=0)
        run_train(cfg)
        rows = read_csv(tmp_path / "run" / "metrics.csv")
        assert len(rows) == 1
        assert rows[0][0] == "iteration"
        loaded_cfg, params = load_run(str(tmp_path / "run"))
        fresh = build_policy(loaded_cfg)
        for (n, a), (_, b) in zip(params.named_tensors(), fresh.named_tensors()):
            np.testing.assert_array_equal(a.values, b.values)

    def test_rerun_reproduces_numeric_fields(self, tmp_path):
        cfg1 = tiny_config(tmp_path, out_dir=str(tmp_path / "a"))
        cfg2 = tiny_config(tmp_path, out_dir=str(tmp_path / "b"))
        run_train(cfg1)
        run_train(cfg2)
        rows_a = read_csv(tmp_path / "a" / "metrics.csv")
        rows_b = read_csv(tmp_path / "b" / "metrics.csv")
        drop = rows_a[0].index("elapsed_s")
        for ra, rb in zip(rows_a, rows_b):
            assert ra[:drop] == rb[:drop]
        assert (tmp_path / "a" / "params.bin").read_bytes() == \
               (tmp_path / "b" / "params.bin").read_bytes()
        assert (tmp_path / "a" / "traces.jsonl").read_bytes() == \
               (tmp_path / "b" / "traces.jsonl").read_bytes()

    def test_metrics_row_per_iteration(self, tmp_path):
        cfg = tiny_config(tmp_path, iterations=4, eval_episodes=0)
        run_train(cfg)
        rows = read_csv(tmp_path / "run" / "metrics.csv")
        assert len(rows) == 5
        assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3"]

    def test_eval_artifacts_consistent(self, tmp_path):
        cfg = tiny_config(tmp_path, env="rooms", k=2, iterations=1,
                          eval_episodes=4, max_steps=15)
        run_train(cfg)
        out = tmp_path / "run"
        episodes = [json.loads(line) for line in open(out / "traces.jsonl")]
        assert len(episodes) == 4
        options = read_csv(out / "options.csv")
        acq_rows = options[1:]
        total_cost = sum(ep["cost"] for ep in episodes)
        sigma_sum = sum(s["sigma"] for ep in episodes for s in ep["steps"])
        assert total_cost == sigma_sum == len(acq_rows)
        # option vectors in the CSV match the traces bit for bit
        snap = {}
        for ep in episodes:
            for s in ep["steps"]:
                if s["sigma"] == 1:
                    snap[(ep["episode"], s["t"])] = s["o"]
        for row in acq_rows:
            key = (int(row[0]), int(row[1]))
            assert [float(v) for v in row[3:]] == snap[key]

    def test_options_csv_schema(self, tmp_path):
        cfg = tiny_config(tmp_path, env="rooms", iterations=0, eval_episodes=2,
                          n_gru=10, n_y=10, max_steps=10)
        run_train(cfg)
        header = read_csv(tmp_path / "run" / "options.csv")[0]
        assert header[:3] == ["episode", "t", "goal_annotation"]
        assert len(header) == 13
        assert header[3] == "o_1" and header[-1] == "o_10"


class TestPareto:
    def test_single_point(self):
        p = ParetoPoint(0.5, 0.1, 5.0)
        assert pareto_front([p]) == [p]

    def test_documented_example(self):
        pts = [ParetoPoint(0.1, 0.1, 5.0), ParetoPoint(0.5, 0.2, 4.0),
               ParetoPoint(1.0, 0.3, 6.0)]
        front = pareto_front(pts)
        assert pts[1] not in front
        assert pts[0] in front and pts[2] in front

    def test_duplicates_keep_first(self):
        a = ParetoPoint(0.1, 0.2, 3.0)
        b = ParetoPoint(0.2, 0.2, 3.0)
        front = pareto_front([a, b])
        assert front == [a]

    def test_brute_force_equivalence(self):
        rng = np.random.default_rng(0)
        for trial in range(1000):
            n = int(rng.integers(1, 12))
            pts = [ParetoPoint(0.0, float(c), float(r))
                   for c, r in zip(rng.integers(0, 5, n), rng.integers(0, 5, n))]
            front = pareto_front(pts)
            # oracle: quadratic dominance scan plus first-duplicate rule
            seen = set()
            expected = []
            for p in pts:
                if is_dominated(p, pts) or (p.cost, p.reward) in seen:
                    continue
                seen.add((p.cost, p.reward))
                expected.append(p)
            assert sorted((p.cost, p.reward) for p in front) == \
                   sorted((p.cost, p.reward) for p in expected)
            assert all(not is_dominated(p, front) for p in front)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            pareto_front([ParetoPoint(0.1, float("nan"), 1.0)])


class TestRender:
    def _episode(self, sigma0=1):
        return {"episode": 0, "return": -3.0, "cost": sigma0, "steps": [
            {"t": 0, "sigma": sigma0, "a": 3, "r": -1.0, "pos": [1, 1]},
            {"t": 1, "sigma": 0, "a": 3, "r": -1.0, "pos": [1, 2]},
        ]}

    def test_one_step_circle_iff_acquired(self):
        walls = np.zeros((3, 3), dtype=bool)
        svg = render_trajectory_svg(self._episode(1), walls)
        assert svg.count("<circle") == 1
        svg = render_trajectory_svg(self._episode(0), walls)
        assert svg.count("<circle") == 0

    def test_well_formed_xml_single_root(self):
        svg = render_trajectory_svg(self._episode(), np.zeros((3, 3), dtype=bool))
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")

    def test_circle_count_equals_cost(self, tmp_path):
        cfg = tiny_config(tmp_path, env="rooms", iterations=0, eval_episodes=3,
                          max_steps=12)
        run_train(cfg)
        out = str(tmp_path / "run")
        episodes = [json.loads(line) for line in open(os.path.join(out, "traces.jsonl"))]
        for ep in episodes:
            path = render_episode(out, ep["episode"])
            svg = open(path).read()
            assert svg.count("<circle") == ep["cost"]
            ET.fromstring(svg)

    def test_discrete_mode_colors_segments(self):
        episode = {"episode": 0, "return": 0.0, "cost": 2, "steps": [
            {"t": 0, "sigma": 1, "a": 1, "r": -1, "pos": [1, 1], "opt": 2, "o": [0.0]},
            {"t": 1, "sigma": 0, "a": 1, "r": -1, "pos": [2, 1]},
            {"t": 2, "sigma": 1, "a": 3, "r": -1, "pos": [3, 1], "opt": 5, "o": [0.0]},
            {"t": 3, "sigma": 0, "a": 3, "r": -1, "pos": [3, 2]},
        ]}
        svg = render_trajectory_svg(episode, np.zeros((5, 5), dtype=bool))
        assert PALETTE[2] in svg and PALETTE[5] in svg

    def test_unsupported_env(self, tmp_path):
        with pytest.raises(UnsupportedEnvError):
            render_trajectory_svg(self._episode(), None)
        episode = {"episode": 0, "return": 1.0, "cost": 0,
                   "steps": [{"t": 0, "sigma": 0, "a": 1, "r": 1.0}]}
        with pytest.raises(UnsupportedEnvError):
            render_trajectory_svg(episode, np.zeros((3, 3), dtype=bool))


class TestSweep:
    def test_single_point_sweep(self, tmp_path):
        cfg = tiny_config(tmp_path, iterations=1, eval_episodes=2,
                          out_dir=str(tmp_path / "sweep"))
        points, front = run_sweep(cfg, [0.5], [1])
        assert len(points) == 1 and front == points
        rows = read_csv(tmp_path / "sweep" / "pareto.csv")
        assert rows[0] == ["lambda", "obs_fraction", "mean_return", "seeds",
                           "failed", "non_dominated"]
        assert rows[1][-1] == "1"
        assert (tmp_path / "sweep" / "lam_0.5" / "seed_1" / "params.bin").exists()

    def test_empty_lists_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            run_sweep(tiny_config(tmp_path), [], [1])


class TestCli:
    def test_train_eval_render_happy_path(self, tmp_path, capsys):
        out = str(tmp_path / "cli_run")
        code = main(["train", "--env", "rooms", "--k", "2", "--iterations", "1",
                     "--batch", "2", "--eval-episodes", "2", "--seed", "3",
                     "--out-dir", out])
        assert code == 0
        assert os.path.exists(os.path.join(out, "metrics.csv"))
        assert main(["eval", "--out-dir", out, "--eval-episodes", "2"]) == 0
        assert main(["render", "--out-dir", out, "--episode", "1"]) == 0
        assert os.path.exists(os.path.join(out, "traj_ep1.svg"))

    def test_config_error_exit_code(self, tmp_path, capsys):
        assert main(["train", "--lambda", "-2", "--out-dir", str(tmp_path / "x")]) == 1
        assert main(["train", "--env", "cartpole", "--obs-mode", "split",
                     "--out-dir", str(tmp_path / "y")]) == 1
        assert main(["nonsense"]) == 1

    def test_runtime_error_exit_code(self, tmp_path, capsys):
        assert main(["eval", "--out-dir", str(tmp_path / "missing")]) == 2

    def test_config_file_with_overrides(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.txt"
        cfg_path.write_text("env = cartpole\niterations = 1\nbatch = 2\n"
                            f"eval_episodes = 2\nmax_steps = 10\n"
                            f"out_dir = {tmp_path / 'from_file'}\n")
        assert main(["train", "--config", str(cfg_path), "--seed", "5"]) == 0
        saved = open(tmp_path / "from_file" / "config.txt").read()
        assert "seed = 5" in saved

    def test_sweep_cli(self, tmp_path, capsys):
        out = str(tmp_path / "sweep_cli")
        code = main(["sweep", "--env", "cartpole", "--iterations", "1",
                     "--batch", "2", "--eval-episodes", "2", "--out-dir", out,
                     "--lambdas", "0.1,0.5", "--seeds", "1"])
        assert code == 0
        assert os.path.exists(os.path.join(out, "pareto.csv"))
