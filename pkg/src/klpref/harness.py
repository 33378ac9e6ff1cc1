"""Experiment orchestration and CSV persistence.

Every experiment derives its randomness from one master seed: the ground
truth, the shared evaluation context set, the feature-mean estimate, and
each (learner, repetition) run get independent child seeds. Runs may be
scheduled on a thread pool; output rows are canonicalized by
(learner, seed, t) on flush, so files are byte-identical regardless of
scheduling.

Raw online schema:   learner,seed,t,x_hash,a1_idx,a2_idx,y,step_regret,cum_regret
Online summary:      learner,t,mean_step,std_step,mean_cum,std_cum,n_seeds
Raw offline schema:  learner,seed,m,gap
Offline summary:     learner,m,mean_gap,std_gap,n_seeds,slope
Eta-sweep files prepend an ``eta`` column to both online schemas.

Reals are written with 17 significant digits; standard deviations are
population standard deviations over the repetition seeds.
"""

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from klpref.config import ExperimentConfig
from klpref.core import Instance, make_instance
from klpref.evaluation import (
    EvalContextSet,
    RegretTrace,
    build_eval_context_set,
    delta_bt,
    delta_gp,
    step_evaluator,
)
from klpref.learners import LearnerConfig, run_offline, run_online
from klpref.seeding import seed_split

OUTPUT_DIR_ENV = "KLPREF_OUT_DIR"

RAW_ONLINE_HEADER = "learner,seed,t,x_hash,a1_idx,a2_idx,y,step_regret,cum_regret"
SUMMARY_ONLINE_HEADER = "learner,t,mean_step,std_step,mean_cum,std_cum,n_seeds"
RAW_OFFLINE_HEADER = "learner,seed,m,gap"
SUMMARY_OFFLINE_HEADER = "learner,m,mean_gap,std_gap,n_seeds,slope"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _context_hash(x: np.ndarray) -> str:
    return hashlib.sha256(x.tobytes()).hexdigest()[:16]


def build_instance(config: ExperimentConfig, eta: float = 1.0) -> Instance:
    spec = config.instance
    truth_seed = spec.truth_seed
    if truth_seed is None:
        truth_seed = seed_split(config.master_seed, 0, "truth")
    return make_instance(
        k=spec.k,
        n_actions=spec.n_actions,
        variant=spec.model,
        seed=truth_seed,
        eta=eta,
        n_finite_contexts=spec.n_contexts if spec.context == "finite" else 0,
    )


def _eta_variant(instance: Instance, eta: float) -> Instance:
    if instance.eta == eta:
        return instance
    return Instance(
        k=instance.k,
        actions=instance.actions,
        eta=eta,
        ref_policy=instance.ref_policy,
        params=instance.params,
        context_dist=instance.context_dist,
    )


def resolve_output_dir(config: ExperimentConfig, override: Optional[str] = None) -> Path:
    path = override or os.environ.get(OUTPUT_DIR_ENV) or config.output_dir
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


@dataclass
class OnlineRunResult:
    learner: str
    eta: float
    seed: int
    rows: List[Tuple[int, str, int, int, int, float, float]]
    trace: RegretTrace


def _run_one_online(
    instance: Instance,
    name: str,
    lc: LearnerConfig,
    T: int,
    seed: int,
    ctx_seed: int,
    ctxs: EvalContextSet,
    eval_every: int,
    phi_ref_seed: int,
    config_hash: str,
) -> OnlineRunResult:
    evaluator = step_evaluator(ctxs)
    try:
        logs, _ = run_online(
            instance,
            lc,
            T,
            seed,
            evaluator=evaluator,
            eval_every=eval_every,
            phi_ref_seed=phi_ref_seed,
            context_seed=ctx_seed,
        )
    except Exception as exc:
        raise RuntimeError(f"online run failed [{name} seed={seed}]: {exc}") from exc
    steps = np.array([log.step_regret for log in logs])
    trace = RegretTrace.from_steps(steps, seed, config_hash, instance.variant)
    rows = []
    for log, cum in zip(logs, trace.cumulative):
        if np.isnan(log.step_regret):
            continue
        rows.append(
            (log.t, _context_hash(log.x), log.a1_idx, log.a2_idx, log.y,
             log.step_regret, float(cum))
        )
    return OnlineRunResult(learner=name, eta=lc.eta, seed=seed, rows=rows, trace=trace)


def _schedule(jobs, workers: int):
    """Run zero-argument jobs, preserving submission order in the result."""
    if workers <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


def _online_jobs(
    config: ExperimentConfig, etas: Optional[Sequence[float]] = None
) -> List[OnlineRunResult]:
    base = build_instance(config)
    phi_ref_seed = seed_split(config.master_seed, 0, "context-sampling")
    eval_seed = seed_split(config.master_seed, 0, "eval-set")
    config_hash = config.config_hash()

    jobs = []
    ctxs_by_eta: Dict[float, EvalContextSet] = {}
    inst_by_eta: Dict[float, Instance] = {}
    for name, lc in config.learners:
        for eta in etas if etas is not None else (lc.eta,):
            lc_eta = replace(lc, eta=eta)
            if eta not in ctxs_by_eta:
                inst_by_eta[eta] = _eta_variant(base, eta)
                ctxs_by_eta[eta] = build_eval_context_set(
                    inst_by_eta[eta], config.eval_contexts, eval_seed
                )
            inst = inst_by_eta[eta]
            ctxs = ctxs_by_eta[eta]
            for rep in range(config.repetitions):
                # Learners share per-repetition streams (common random
                # numbers), so paired comparisons reflect the algorithms.
                seed = seed_split(config.master_seed, rep, "learner")
                ctx_seed = seed_split(config.master_seed, 1 + rep, "context-sampling")
                jobs.append(
                    (lambda inst=inst, name=name, lc_eta=lc_eta, seed=seed,
                            ctx_seed=ctx_seed, ctxs=ctxs:
                     _run_one_online(
                         inst, name, lc_eta, config.T, seed, ctx_seed, ctxs,
                         config.eval_every, phi_ref_seed, config_hash,
                     ))
                )
    return _schedule(jobs, config.workers)


def _write_csv(path: Path, header: str, rows: List[str]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _online_raw_rows(results: List[OnlineRunResult], with_eta: bool) -> List[str]:
    if with_eta:
        results = sorted(results, key=lambda r: (r.eta, r.learner, r.seed))
    else:
        results = sorted(results, key=lambda r: (r.learner, r.seed))
    out = []
    for res in results:
        prefix = (_fmt(res.eta) + ",") if with_eta else ""
        for t, xh, a1, a2, y, step, cum in res.rows:
            out.append(
                f"{prefix}{res.learner},{res.seed},{t},{xh},{a1},{a2},{y},"
                f"{_fmt(step)},{_fmt(cum)}"
            )
    return out


def _online_summary_rows(results: List[OnlineRunResult], with_eta: bool) -> List[str]:
    groups: Dict[Tuple, List[OnlineRunResult]] = {}
    for res in results:
        groups.setdefault((res.eta, res.learner), []).append(res)
    if with_eta:
        ordered = sorted(groups)
    else:
        ordered = sorted(groups, key=lambda key: key[1])
    out = []
    for (eta, learner) in ordered:
        runs = groups[(eta, learner)]
        t_values = [row[0] for row in runs[0].rows]
        steps = np.array([[row[5] for row in r.rows] for r in runs])
        cums = np.array([[row[6] for row in r.rows] for r in runs])
        prefix = (_fmt(eta) + ",") if with_eta else ""
        for j, t in enumerate(t_values):
            out.append(
                f"{prefix}{learner},{t},"
                f"{_fmt(steps[:, j].mean())},{_fmt(steps[:, j].std())},"
                f"{_fmt(cums[:, j].mean())},{_fmt(cums[:, j].std())},{len(runs)}"
            )
    return out


def run_online_experiment(config: ExperimentConfig, output_dir: Optional[str] = None):
    """Run all configured online learners; write raw and summary CSVs."""
    out = resolve_output_dir(config, output_dir)
    results = _online_jobs(config)
    raw_path = out / "raw_online.csv"
    summary_path = out / "summary_online.csv"
    _write_csv(raw_path, RAW_ONLINE_HEADER, _online_raw_rows(results, with_eta=False))
    _write_csv(
        summary_path, SUMMARY_ONLINE_HEADER, _online_summary_rows(results, with_eta=False)
    )
    return {"raw": raw_path, "summary": summary_path, "results": results}


def run_eta_sweep(config: ExperimentConfig, output_dir: Optional[str] = None):
    """Repeat the online run for every eta in the sweep list.

    The ground truth and evaluation contexts are pinned by the master
    seed, so curves differ only through the regularization strength.
    """
    out = resolve_output_dir(config, output_dir)
    results = _online_jobs(config, etas=config.sweep_eta)
    raw_path = out / "raw_eta_sweep.csv"
    summary_path = out / "summary_eta_sweep.csv"
    _write_csv(raw_path, "eta," + RAW_ONLINE_HEADER, _online_raw_rows(results, with_eta=True))
    _write_csv(
        summary_path,
        "eta," + SUMMARY_ONLINE_HEADER,
        _online_summary_rows(results, with_eta=True),
    )
    return {"raw": raw_path, "summary": summary_path, "results": results}


@dataclass
class OfflineRunResult:
    learner: str
    seed: int
    m: int
    gap: float


def _run_one_offline(instance, name, lc, m, seed, ctxs) -> OfflineRunResult:
    try:
        policy, _ = run_offline(instance, lc, m, seed)
        if instance.variant == "gp":
            gap = delta_gp(policy, instance, ctxs)
        else:
            gap = delta_bt(policy, instance, ctxs)
    except Exception as exc:
        raise RuntimeError(
            f"offline run failed [{name} m={m} seed={seed}]: {exc}"
        ) from exc
    return OfflineRunResult(learner=name, seed=seed, m=m, gap=gap)


def loglog_slope(ms: Sequence[int], gaps: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(gap) against log(m); None when
    underdetermined or any gap is non-positive."""
    if len(ms) < 2:
        return None
    gaps = np.asarray(gaps, dtype=np.float64)
    if np.any(gaps <= 0.0):
        return None
    lx = np.log(np.asarray(ms, dtype=np.float64))
    ly = np.log(gaps)
    lx = lx - lx.mean()
    return float((lx @ (ly - ly.mean())) / (lx @ lx))


def run_offline_experiment(config: ExperimentConfig, output_dir: Optional[str] = None):
    """Sample-complexity sweep: fit once per (m, seed) and record gaps."""
    out = resolve_output_dir(config, output_dir)
    base = build_instance(config)
    eval_seed = seed_split(config.master_seed, 0, "eval-set")

    jobs = []
    for name, lc in config.learners:
        inst = _eta_variant(base, lc.eta)
        ctxs = build_eval_context_set(inst, config.eval_contexts, eval_seed)
        for mi, m in enumerate(config.m_grid):
            for rep in range(config.repetitions):
                # Independent data per grid point, shared across learners.
                seed = seed_split(config.master_seed, mi * config.repetitions + rep, "learner")
                jobs.append(
                    (lambda inst=inst, name=name, lc=lc, m=m, seed=seed, ctxs=ctxs:
                     _run_one_offline(inst, name, lc, m, seed, ctxs))
                )
    results: List[OfflineRunResult] = _schedule(jobs, config.workers)

    results_sorted = sorted(results, key=lambda r: (r.learner, r.seed, r.m))
    raw_rows = [
        f"{r.learner},{r.seed},{r.m},{_fmt(r.gap)}" for r in results_sorted
    ]

    summary_rows = []
    learners = sorted({r.learner for r in results})
    slopes: Dict[str, Optional[float]] = {}
    for learner in learners:
        ms = sorted({r.m for r in results if r.learner == learner})
        means = []
        for m in ms:
            gaps = [r.gap for r in results if r.learner == learner and r.m == m]
            means.append(float(np.mean(gaps)))
        slopes[learner] = loglog_slope(ms, means)
        for m, mean in zip(ms, means):
            gaps = [r.gap for r in results if r.learner == learner and r.m == m]
            slope_text = "" if slopes[learner] is None else _fmt(slopes[learner])
            summary_rows.append(
                f"{learner},{m},{_fmt(mean)},{_fmt(np.std(gaps))},{len(gaps)},{slope_text}"
            )

    raw_path = out / "raw_offline.csv"
    summary_path = out / "summary_offline.csv"
    _write_csv(raw_path, RAW_OFFLINE_HEADER, raw_rows)
    _write_csv(summary_path, SUMMARY_OFFLINE_HEADER, summary_rows)
    return {
        "raw": raw_path,
        "summary": summary_path,
        "results": results,
        "slopes": slopes,
    }
