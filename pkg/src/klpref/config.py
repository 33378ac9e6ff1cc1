"""Experiment configuration: flat key-value text with section headers.

Grammar (INI dialect, parsed strictly):

    [instance]
    k = 5                  # context/action dimension
    n_actions = 6
    model = gp             # gp | bt
    truth_seed = 42        # optional; derived from master_seed when absent
    context = uniform      # uniform | finite
    n_contexts = 12        # finite contexts only

    [run]
    T = 2000               # online horizon (run-online / sweep-eta)
    m_grid = 128,256,512   # offline sample sizes (run-offline)
    repetitions = 5
    master_seed = 1
    eval_contexts = 200
    eval_every = 1
    output_dir = out
    workers = 1

    [sweep]                # sweep-eta only
    eta = 1,2,3

    [learner NAME]         # one section per learner
    algorithm = greedy-gp  # greedy-gp | greedy-bt | optimism-bt |
                           # tournament-gp | offline-gp | offline-bt
    eta = 1.0
    beta = 0.3             # optimism-bt only
    tournament_size = 3    # tournament-gp only
    refit_every = 1
    opt_max_iter = 500
    opt_tol = 1e-6

Parsed configs re-serialize to a canonical byte-stable form: fixed
section and key order, one ``key = value`` line each, sections separated
by a blank line.
"""

import configparser
import hashlib
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from klpref.errors import ConfigError
from klpref.estimation import OptimizerConfig
from klpref.learners import LearnerConfig, OFFLINE_ALGORITHMS, ONLINE_ALGORITHMS


@dataclass(frozen=True)
class InstanceSpec:
    k: int = 5
    n_actions: int = 6
    model: str = "gp"
    truth_seed: Optional[int] = None
    context: str = "uniform"
    n_contexts: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    instance: InstanceSpec
    learners: Tuple[Tuple[str, LearnerConfig], ...]
    T: Optional[int]
    m_grid: Tuple[int, ...]
    repetitions: int
    master_seed: int
    eval_contexts: int
    eval_every: int
    output_dir: str
    workers: int
    sweep_eta: Tuple[float, ...] = ()

    def canonical_text(self) -> str:
        lines = ["[instance]"]
        lines.append(f"k = {self.instance.k}")
        lines.append(f"n_actions = {self.instance.n_actions}")
        lines.append(f"model = {self.instance.model}")
        if self.instance.truth_seed is not None:
            lines.append(f"truth_seed = {self.instance.truth_seed}")
        lines.append(f"context = {self.instance.context}")
        if self.instance.context == "finite":
            lines.append(f"n_contexts = {self.instance.n_contexts}")
        lines.append("")
        lines.append("[run]")
        if self.T is not None:
            lines.append(f"T = {self.T}")
        if self.m_grid:
            lines.append("m_grid = " + ",".join(str(m) for m in self.m_grid))
        lines.append(f"repetitions = {self.repetitions}")
        lines.append(f"master_seed = {self.master_seed}")
        lines.append(f"eval_contexts = {self.eval_contexts}")
        lines.append(f"eval_every = {self.eval_every}")
        lines.append(f"output_dir = {self.output_dir}")
        lines.append(f"workers = {self.workers}")
        if self.sweep_eta:
            lines.append("")
            lines.append("[sweep]")
            lines.append("eta = " + ",".join(_fmt_float(e) for e in self.sweep_eta))
        for name, lc in self.learners:
            lines.append("")
            lines.append(f"[learner {name}]")
            lines.append(f"algorithm = {lc.algorithm}")
            lines.append(f"eta = {_fmt_float(lc.eta)}")
            if lc.algorithm == "optimism-bt":
                lines.append(f"beta = {_fmt_float(lc.beta)}")
            if lc.algorithm == "tournament-gp":
                lines.append(f"tournament_size = {lc.tournament_size}")
            lines.append(f"refit_every = {lc.refit_every}")
            lines.append(f"opt_max_iter = {lc.opt.max_iter}")
            lines.append(f"opt_tol = {_fmt_float(lc.opt.tol)}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("ascii")).hexdigest()[:16]


def _fmt_float(v: float) -> str:
    text = format(float(v), ".17g")
    return text


def _get(section, key, cast, default=None, *, where=""):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"missing key {key!r} in section {where}")
    raw = section[key]
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {where}:{key}: {raw!r} ({exc})") from exc


def _int_list(raw: str):
    return tuple(int(part.strip()) for part in raw.split(",") if part.strip())


def _float_list(raw: str):
    return tuple(float(part.strip()) for part in raw.split(",") if part.strip())


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    if "instance" not in parser:
        raise ConfigError("missing [instance] section")
    if "run" not in parser:
        raise ConfigError("missing [run] section")
    for section in parser.sections():
        head = section.split(None, 1)[0]
        if section not in ("instance", "run", "sweep") and head != "learner":
            raise ConfigError(f"unknown section [{section}]")

    inst_sec = parser["instance"]
    model = _get(inst_sec, "model", str, "gp", where="instance").strip()
    if model not in ("gp", "bt"):
        raise ConfigError(f"instance:model must be gp or bt, got {model!r}")
    context = _get(inst_sec, "context", str, "uniform", where="instance").strip()
    if context not in ("uniform", "finite"):
        raise ConfigError(f"instance:context must be uniform or finite, got {context!r}")
    truth_seed = (
        int(inst_sec["truth_seed"]) if "truth_seed" in inst_sec else None
    )
    instance = InstanceSpec(
        k=_get(inst_sec, "k", int, 5, where="instance"),
        n_actions=_get(inst_sec, "n_actions", int, 6, where="instance"),
        model=model,
        truth_seed=truth_seed,
        context=context,
        n_contexts=_get(inst_sec, "n_contexts", int, 0, where="instance"),
    )
    if instance.k < 1:
        raise ConfigError("instance:k must be positive")
    if instance.n_actions < 2:
        raise ConfigError("instance:n_actions must be at least 2")
    if context == "finite" and instance.n_contexts < 1:
        raise ConfigError("instance:n_contexts must be positive for finite contexts")

    run_sec = parser["run"]
    T = int(run_sec["T"]) if "T" in run_sec else None
    m_grid = _int_list(run_sec["m_grid"]) if "m_grid" in run_sec else ()
    repetitions = _get(run_sec, "repetitions", int, 5, where="run")
    if repetitions < 1:
        raise ConfigError("run:repetitions must be at least 1")
    eval_every = _get(run_sec, "eval_every", int, 1, where="run")
    if eval_every < 1:
        raise ConfigError("run:eval_every must be at least 1")
    if T is not None and T < 1:
        raise ConfigError("run:T must be at least 1")
    if any(m < 1 for m in m_grid):
        raise ConfigError("run:m_grid entries must be at least 1")

    sweep_eta: Tuple[float, ...] = ()
    if "sweep" in parser:
        sweep_eta = _float_list(_get(parser["sweep"], "eta", str, where="sweep"))
        if any(e <= 0 for e in sweep_eta):
            raise ConfigError("sweep:eta values must be positive")

    learners: List[Tuple[str, LearnerConfig]] = []
    for section in parser.sections():
        parts = section.split(None, 1)
        if parts[0] != "learner":
            continue
        if len(parts) != 2 or not parts[1].strip():
            raise ConfigError(f"learner section needs a name: [{section}]")
        name = parts[1].strip()
        if any(ch in name for ch in ", \t"):
            raise ConfigError(f"learner name {name!r} may not contain commas or spaces")
        sec = parser[section]
        algorithm = _get(sec, "algorithm", str, where=section).strip()
        if algorithm not in ONLINE_ALGORITHMS + OFFLINE_ALGORITHMS:
            raise ConfigError(f"{section}: unknown algorithm {algorithm!r}")
        if not algorithm.endswith(instance.model):
            raise ConfigError(
                f"{section}: algorithm {algorithm!r} does not match instance model "
                f"{instance.model!r}"
            )
        opt = OptimizerConfig(
            max_iter=_get(sec, "opt_max_iter", int, 500, where=section),
            tol=_get(sec, "opt_tol", float, 1e-6, where=section),
        )
        try:
            lc = LearnerConfig(
                algorithm=algorithm,
                eta=_get(sec, "eta", float, 1.0, where=section),
                beta=_get(sec, "beta", float, 0.0, where=section),
                tournament_size=_get(sec, "tournament_size", int, 1, where=section),
                refit_every=_get(sec, "refit_every", int, 1, where=section),
                opt=opt,
            )
        except ValueError as exc:
            raise ConfigError(f"{section}: {exc}") from exc
        learners.append((name, lc))

    if not learners:
        raise ConfigError("no [learner NAME] sections found")
    names = [name for name, _ in learners]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate learner names: {names}")

    return ExperimentConfig(
        instance=instance,
        learners=tuple(learners),
        T=T,
        m_grid=m_grid,
        repetitions=repetitions,
        master_seed=_get(run_sec, "master_seed", int, 0, where="run"),
        eval_contexts=_get(run_sec, "eval_contexts", int, 200, where="run"),
        eval_every=eval_every,
        output_dir=_get(run_sec, "output_dir", str, "out", where="run").strip(),
        workers=_get(run_sec, "workers", int, 1, where="run"),
        sweep_eta=sweep_eta,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def require_online(config: ExperimentConfig) -> None:
    if config.T is None:
        raise ConfigError("run:T is required for online experiments")
    for name, lc in config.learners:
        if lc.algorithm not in ONLINE_ALGORITHMS:
            raise ConfigError(f"learner {name}: {lc.algorithm} is not an online algorithm")


def require_offline(config: ExperimentConfig) -> None:
    if not config.m_grid:
        raise ConfigError("run:m_grid is required for offline experiments")
    for name, lc in config.learners:
        if lc.algorithm not in OFFLINE_ALGORITHMS:
            raise ConfigError(f"learner {name}: {lc.algorithm} is not an offline algorithm")


def require_sweep(config: ExperimentConfig) -> None:
    require_online(config)
    if not config.sweep_eta:
        raise ConfigError("[sweep] eta list is required for sweep-eta")
