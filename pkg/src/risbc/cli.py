"""Command-line front end: train, eval, sweep, and oracle jobs.

Every run writes a ``run_manifest.json`` with the fully resolved config
and seed, and emits deterministic CSV (UTF-8, LF line endings, ``.``
decimal separator): identical seeds reproduce identical bytes.

Exit codes: 0 success, 2 config error, 3 checkpoint/artifact mismatch,
4 runtime numerical error (any NaN/inf aborts the run).  Failures print
one machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .agents import AllocAgent, PhaseAgent, train
from .channel import sample_realization
from .config import SystemConfig
from .errors import ArtifactMismatch, NumericalError
from .link import MODES, evaluate, objective
from .oracles import baseline_fixed, baseline_random, oracle_policy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARTIFACT = 3
EXIT_NUMERIC = 4

SWEEP_AXES = ("p_max", "m_tags", "p_c")
POLICIES = ("dqn", "oracle", "random", "fixed")

# fixed per-policy stream tags so adding or removing a policy never
# shifts another policy's random draws
_POLICY_STREAM = {"dqn": 1, "oracle": 2, "random": 3, "fixed": 4}

SWEEP_COLUMNS = "axis,axis_value,policy,mode,mean,std_err,n,feasible_frac,seed"
EVAL_COLUMNS = "index,policy,se,ee,feasible,objective"
TRAIN_LOG_COLUMNS = "sample_index,epsilon,mean_reward_window,feasible_fraction"


class ConfigError(ValueError):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.code = code
        self.detail = detail


@dataclass
class SweepSpec:
    """One trend study: vary a single config axis, evaluate policies."""

    axis: str
    values: list
    realizations_per_point: int
    policies: list[str]
    mode: str
    seed: int

    def validate(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ConfigError("spec_invalid", f"axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if len(self.values) == 0:
            raise ConfigError("spec_invalid", "values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("spec_invalid", "values must be strictly increasing")
        if self.realizations_per_point < 1:
            raise ConfigError("spec_invalid", "realizations_per_point must be >= 1")
        _check_policies(self.policies)
        if self.mode not in MODES:
            raise ConfigError("spec_invalid", f"mode must be one of {MODES}, got {self.mode!r}")


def _check_policies(policies) -> None:
    if len(policies) == 0:
        raise ConfigError("spec_invalid", "at least one policy required")
    bad = [p for p in policies if p not in POLICIES]
    if bad:
        raise ConfigError("spec_invalid", f"unknown policies {bad}; valid: {list(POLICIES)}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, command: str, cfg: SystemConfig, seed: int, extra: dict) -> None:
    payload = {
        "command": command,
        "seed": seed,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
    }
    payload.update(extra)
    _write_json(out_dir / "run_manifest.json", payload)


def _load_config(path: str) -> SystemConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config_not_found", str(p))
    try:
        return SystemConfig.from_json(p)
    except json.JSONDecodeError as exc:
        raise ConfigError("config_invalid_json", str(exc)) from exc
    except ValueError as exc:
        raise ConfigError("config_invalid", str(exc)) from exc


def _load_agents(checkpoint_dir: str, cfg: SystemConfig):
    """Load both agent checkpoints and verify they match the config."""
    cdir = Path(checkpoint_dir)
    phase_path = cdir / "phase_agent.json"
    alloc_path = cdir / "alloc_agent.json"
    for p in (phase_path, alloc_path):
        if not p.is_file():
            raise ArtifactMismatch(f"checkpoint not found: {p}")
    try:
        phase_agent = PhaseAgent.load(phase_path)
        alloc_agent = AllocAgent.load(alloc_path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ArtifactMismatch(f"checkpoint unreadable: {exc}") from exc
    if phase_agent.k_ris != cfg.k_ris or phase_agent.phase_levels != cfg.phase_levels:
        raise ArtifactMismatch(
            f"phase checkpoint K={phase_agent.k_ris}, L={phase_agent.phase_levels} "
            f"!= config K={cfg.k_ris}, L={cfg.phase_levels}"
        )
    if (
        alloc_agent.m_tags != cfg.m_tags
        or alloc_agent.n_alpha != len(cfg.alpha_grid)
        or alloc_agent.n_beta != len(cfg.beta_grid)
    ):
        raise ArtifactMismatch("alloc checkpoint action space does not match config grids")
    return phase_agent, alloc_agent


def _policy_result(policy, cfg, chan, mode, seed, index, agents):
    """(metrics, objective) for one policy on one realization."""
    rng = np.random.default_rng([seed, index, _POLICY_STREAM[policy]])
    if policy == "dqn":
        phase_agent, alloc_agent = agents
        pa = phase_agent.act_on(chan, 0.0, rng)
        aa = alloc_agent.act_on(chan, pa, 0.0, rng)
        metrics = evaluate(cfg, chan, pa, aa)
        return metrics, objective(metrics, mode)
    if policy == "oracle":
        res = oracle_policy(cfg, chan, mode)
    elif policy == "random":
        res = baseline_random(cfg, chan, rng, mode)
    else:
        res = baseline_fixed(cfg, chan, mode)
    return res.metrics, res.objective_value


def _check_finite(metrics, obj, where: str) -> None:
    if not (math.isfinite(metrics.se) and math.isfinite(metrics.ee) and math.isfinite(obj)):
        raise NumericalError(f"non-finite metric in {where}")


def run_train(cfg: SystemConfig, out_dir: Path, seed: int, mode: str) -> None:
    """Train both agents and write checkpoints plus the training log."""
    out_dir.mkdir(parents=True, exist_ok=True)
    result = train(cfg, seed, mode)
    result.phase_agent.save(out_dir / "phase_agent.json")
    result.alloc_agent.save(out_dir / "alloc_agent.json")
    _write_csv(
        out_dir / "train_log.csv",
        TRAIN_LOG_COLUMNS,
        [(r.sample_index, r.epsilon, r.mean_reward_window, r.feasible_fraction) for r in result.log],
    )
    _write_manifest(out_dir, "train", cfg, seed, {"mode": mode, "out": str(out_dir)})


def run_eval(
    cfg: SystemConfig,
    out_dir: Path,
    seed: int,
    mode: str,
    policies: list[str],
    n_test: int,
    checkpoint_dir: str | None,
) -> None:
    """Evaluate policies over n_test common realizations; write rows + summary."""
    _check_policies(policies)
    if n_test < 1:
        raise ConfigError("spec_invalid", "n_test must be >= 1")
    if "dqn" in policies and checkpoint_dir is None:
        raise ConfigError("checkpoints_required", "dqn policy needs --checkpoints")
    agents = _load_agents(checkpoint_dir, cfg) if "dqn" in policies else None
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    stats = {p: {"objective": [], "se": [], "ee": [], "feasible": 0} for p in policies}
    for i in range(n_test):
        chan = sample_realization(cfg, np.random.default_rng([seed, i, 0]))
        for policy in policies:
            metrics, obj = _policy_result(policy, cfg, chan, mode, seed, i, agents)
            _check_finite(metrics, obj, f"eval realization {i} policy {policy}")
            rows.append((i, policy, metrics.se, metrics.ee, metrics.feasible, obj))
            st = stats[policy]
            st["objective"].append(obj)
            st["se"].append(metrics.se)
            st["ee"].append(metrics.ee)
            st["feasible"] += int(metrics.feasible)

    _write_csv(out_dir / "eval_rows.csv", EVAL_COLUMNS, rows)

    summary = {"mode": mode, "seed": seed, "n_test": n_test, "policies": {}, "ratios": {}}
    for policy in policies:
        st = stats[policy]
        summary["policies"][policy] = {
            "mean_objective": float(np.mean(st["objective"])),
            "mean_se": float(np.mean(st["se"])),
            "mean_ee": float(np.mean(st["ee"])),
            "feasible_frac": st["feasible"] / n_test,
        }
    if "dqn" in policies and "oracle" in policies:
        oracle_mean = summary["policies"]["oracle"]["mean_objective"]
        if oracle_mean != 0.0:
            summary["ratios"]["dqn_over_oracle_objective"] = (
                summary["policies"]["dqn"]["mean_objective"] / oracle_mean
            )
    _write_json(out_dir / "eval_summary.json", summary)
    _write_manifest(out_dir, "eval", cfg, seed, {
        "mode": mode, "n_test": n_test, "policies": list(policies),
        "checkpoints": checkpoint_dir, "out": str(out_dir),
    })


def run_sweep(
    spec: SweepSpec,
    cfg: SystemConfig,
    out_dir: Path,
    checkpoint_dir: str | None,
) -> None:
    """One CSV row per (axis value, policy): mean objective and spread.

    All policies at one axis point share the same channel draws (common
    random numbers), and for the power axes the draws are shared across
    points too, since the realization stream depends only on the seed
    and realization index.
    """
    spec.validate()
    if "dqn" in spec.policies and checkpoint_dir is None:
        raise ConfigError("checkpoints_required", "dqn policy needs --checkpoints")
    rows = []
    for value in spec.values:
        if spec.axis == "m_tags":
            point_cfg = dataclasses.replace(cfg, m_tags=int(value))
        else:
            point_cfg = dataclasses.replace(cfg, **{spec.axis: float(value)})
        point_cfg.validate()
        agents = _load_agents(checkpoint_dir, point_cfg) if "dqn" in spec.policies else None

        objectives = {p: [] for p in spec.policies}
        feasible = {p: 0 for p in spec.policies}
        for i in range(spec.realizations_per_point):
            chan = sample_realization(point_cfg, np.random.default_rng([spec.seed, i, 0]))
            for policy in spec.policies:
                metrics, obj = _policy_result(policy, point_cfg, chan, spec.mode, spec.seed, i, agents)
                _check_finite(metrics, obj, f"sweep {spec.axis}={value} policy {policy}")
                objectives[policy].append(obj)
                feasible[policy] += int(metrics.feasible)

        n = spec.realizations_per_point
        for policy in spec.policies:
            vals = np.asarray(objectives[policy])
            std_err = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            rows.append((
                spec.axis, value, policy, spec.mode,
                float(vals.mean()), std_err, n, feasible[policy] / n, spec.seed,
            ))

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "sweep.csv", SWEEP_COLUMNS, rows)
    _write_manifest(out_dir, "sweep", cfg, spec.seed, {
        "sweep_spec": dataclasses.asdict(spec),
        "checkpoints": checkpoint_dir,
        "out": str(out_dir),
    })


def _load_sweep_spec(path: str, args) -> SweepSpec:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("spec_not_found", str(p))
    try:
        with open(p, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("spec_invalid_json", str(exc)) from exc
    if not isinstance(data, dict):
        raise ConfigError("spec_invalid", "sweep spec must be a JSON object")
    known = {"axis", "values", "realizations_per_point", "policies", "mode", "seed"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError("spec_invalid", f"unknown sweep spec keys: {sorted(unknown)}")
    for key in ("axis", "values", "realizations_per_point"):
        if key not in data:
            raise ConfigError("spec_invalid", f"sweep spec missing key {key!r}")
    return SweepSpec(
        axis=data["axis"],
        values=list(data["values"]),
        realizations_per_point=int(data["realizations_per_point"]),
        policies=list(data.get("policies", _split_policies(args.policies))),
        mode=str(data.get("mode", args.mode)),
        seed=int(data.get("seed", args.seed)),
    )


def _split_policies(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risbc",
        description="RIS-aided NOMA backscatter simulator and dual-DQN optimizer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, policies_default):
        p.add_argument("--config", required=True, help="path to SystemConfig JSON")
        p.add_argument("--seed", type=int, default=0, help="master RNG seed")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--mode", choices=list(MODES), default="ee", help="objective to optimize")
        if policies_default is not None:
            p.add_argument("--policies", default=policies_default,
                           help="comma-separated subset of dqn,oracle,random,fixed")

    p_train = sub.add_parser("train", help="train both agents, write checkpoints + log")
    common(p_train, None)

    p_eval = sub.add_parser("eval", help="evaluate policies on a common test set")
    common(p_eval, "oracle,random,fixed")
    p_eval.add_argument("--checkpoints", default=None, help="directory with agent checkpoints")
    p_eval.add_argument("--n-test", type=int, default=None,
                        help="test realizations (default: config test_samples)")

    p_sweep = sub.add_parser("sweep", help="trend study along one config axis")
    common(p_sweep, "oracle")
    p_sweep.add_argument("--spec", required=True, help="path to SweepSpec JSON")
    p_sweep.add_argument("--checkpoints", default=None, help="directory with agent checkpoints")

    p_oracle = sub.add_parser("oracle", help="oracle-only evaluation (no checkpoints)")
    common(p_oracle, None)
    p_oracle.add_argument("--n-test", type=int, default=None,
                          help="test realizations (default: config test_samples)")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        out_dir = Path(args.out)
        if args.command == "train":
            run_train(cfg, out_dir, args.seed, args.mode)
        elif args.command == "eval":
            n_test = args.n_test if args.n_test is not None else cfg.learning.test_samples
            policies = _split_policies(args.policies)
            if "dqn" in policies and args.checkpoints is None:
                raise ConfigError("checkpoints_required", "dqn policy needs --checkpoints")
            run_eval(cfg, out_dir, args.seed, args.mode, policies, n_test, args.checkpoints)
        elif args.command == "sweep":
            spec = _load_sweep_spec(args.spec, args)
            if "dqn" in spec.policies and args.checkpoints is None:
                raise ConfigError("checkpoints_required", "dqn policy needs --checkpoints")
            run_sweep(spec, cfg, out_dir, args.checkpoints)
        elif args.command == "oracle":
            n_test = args.n_test if args.n_test is not None else cfg.learning.test_samples
            run_eval(cfg, out_dir, args.seed, args.mode, ["oracle"], n_test, None)
    except ConfigError as exc:
        print(json.dumps({"error": exc.code, "detail": exc.detail}), file=sys.stderr)
        return EXIT_CONFIG
    except ArtifactMismatch as exc:
        print(json.dumps({"error": "artifact_mismatch", "detail": str(exc)}), file=sys.stderr)
        return EXIT_ARTIFACT
    except NumericalError as exc:
        print(json.dumps({"error": "numerical_error", "detail": str(exc)}), file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
