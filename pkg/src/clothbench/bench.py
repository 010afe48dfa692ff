"""Episode runner and evaluation harness: ties environments, policies, the
pick-adjustment pipeline and the metrics into seeded, reproducible runs."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import OracleFoldAgent
from .config import EnvSpec
from .data.trajectory import Trajectory, TrajectoryStep
from .metrics import (
    EpisodeRecord,
    EvalConfig,
    EvalMode,
    StepRecord,
    aggregate,
    judge_episode,
    shape_iou,
)
from .oracles.folding import FoldTask, max_steps
from .sim.env import PickPlaceAction
from .sim.grasp import GraspKind
from .vision.masks import NoClothVisibleError, pick_adjustment


@dataclass(frozen=True)
class RunOptions:
    adjust_position: bool = True
    adjust_orientation: bool = True
    collect_observations: bool = False
    crumple_intensity: float = 1.0


def eval_config_for(task: str, mode: EvalMode | None, episodes: int,
                    seed_base: int) -> EvalConfig:
    if task == "flatten":
        return EvalConfig(
            mode=mode or EvalMode.FLATTEN_SIM, episodes=episodes, seed_base=seed_base
        )
    fold = FoldTask(task)
    return EvalConfig(
        mode=EvalMode.FOLD,
        episodes=episodes,
        seed_base=seed_base,
        fold_step_cap=max_steps(fold),
    )


def run_episode(
    env_spec: EnvSpec,
    agent,
    task: str,
    seed: int,
    cfg: EvalConfig,
    options: RunOptions = RunOptions(),
):
    """One seeded episode; returns (EpisodeRecord, Trajectory | None).

    The pick-adjustment pipeline (snap into the eroded cloth mask, align the
    gripper to the local boundary) runs between the policy and the simulator,
    matching the deployment stack; both adjustments can be ablated.
    """
    env = env_spec.make_env()
    start = "flatten" if task == "flatten" else task
    env.reset(
        seed,
        start="crumpled" if task == "flatten" else "flat",
        intensity=options.crumple_intensity,
        face_colors=env_spec.face_colors(),
    )
    agent.reset(seed)

    goal = None
    if isinstance(agent, OracleFoldAgent):
        goal = agent.final_goal(env)
    elif task != "flatten":
        goal = OracleFoldAgent(FoldTask(task)).final_goal(env)

    record = EpisodeRecord(seed=seed, nc0=env.normalized_coverage())
    steps: list[TrajectoryStep] = []
    cov0 = env.coverage()
    cov_max = env.params.rest_area

    for index in range(cfg.step_cap):
        try:
            action = agent.step(env)
        except Exception as e:  # noqa: BLE001 - episode-level fault barrier
            record.error = f"{type(e).__name__}: {e}"
            break
        if action is None:
            break

        obs = env.observe() if (options.collect_observations
                                or options.adjust_position
                                or options.adjust_orientation) else None
        pick_uv, orientation = action.pick_uv, action.orientation
        if obs is not None and (options.adjust_position or options.adjust_orientation):
            try:
                pick_uv, orientation = pick_adjustment(
                    action.pick_uv,
                    obs.mask,
                    env.vision,
                    adjust_position=options.adjust_position,
                    adjust_orientation=options.adjust_orientation,
                )
            except NoClothVisibleError:
                pick_uv, orientation = action.pick_uv, action.orientation
        adjusted = PickPlaceAction(pick_uv, action.place_uv, orientation)

        result = env.step(adjusted)
        nc = env.normalized_coverage()
        ni = None
        if cov_max - cov0 > 1e-9:
            ni = max((env.coverage() - cov0) / (cov_max - cov0), -1.0)
        iou = None
        if goal is not None:
            iou = shape_iou(env.cloth_silhouette(), goal)
        record.steps.append(
            StepRecord(
                index=index,
                action=(
                    float(adjusted.pick_uv[0]),
                    float(adjusted.pick_uv[1]),
                    float(adjusted.place_uv[0]),
                    float(adjusted.place_uv[1]),
                    float(adjusted.orientation),
                ),
                outcome=result.outcome.kind.value,
                nc=nc,
                ni=ni,
                iou=iou,
            )
        )
        if options.collect_observations:
            steps.append(
                TrajectoryStep(
                    observation=obs,
                    action=np.array(record.steps[-1].action),
                    outcome=result.outcome.kind,
                    nc=nc,
                    iou=iou,
                )
            )
        if cfg.mode != EvalMode.FOLD and nc >= cfg.nc_threshold:
            break

    judge_episode(record, cfg)
    traj = None
    if options.collect_observations and steps:
        traj = Trajectory(
            steps=steps,
            seed=seed,
            config_hash=env_spec.config_hash(),
            oracle=type(agent).__name__,
            task=task,
            success=record.success,
            nc0=record.nc0,
        )
    return record, traj


@dataclass
class EvalReport:
    config: dict
    per_episode: list
    aggregate: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config,
                "per_episode": self.per_episode,
                "aggregate": self.aggregate,
            },
            sort_keys=True,
            indent=1,
        )

    def table(self) -> str:
        a = self.aggregate
        lines = [
            f"episodes          {a['episodes']}",
            f"success rate      {a['sr']:.3f}" if a["sr"] is not None else "success rate      n/a",
        ]
        if a["nc_mean"] is not None:
            lines.append(f"final NC          {a['nc_mean']:.3f} +/- {a['nc_std']:.3f}")
        if a["ni_mean"] is not None:
            lines.append(f"final NI          {a['ni_mean']:.3f} +/- {a['ni_std']:.3f}")
        if a["iou_mean"] is not None:
            lines.append(f"max IoU           {a['iou_mean']:.3f} +/- {a['iou_std']:.3f}")
        if a["steps_mean"] is not None:
            lines.append(f"steps to finish   {a['steps_mean']:.2f} +/- {a['steps_std']:.2f}")
        if a["errors"]:
            lines.append(f"episode errors    {a['errors']}")
        return "\n".join(lines)


def episode_record_to_dict(r: EpisodeRecord) -> dict:
    return {
        "seed": r.seed,
        "nc0": r.nc0,
        "success": r.success,
        "steps_to_success": r.steps_to_success,
        "reported_iou": r.reported_iou,
        "error": r.error,
        "steps": [dataclasses.asdict(s) for s in r.steps],
    }


def run_eval(
    env_spec: EnvSpec,
    agent_factory,
    task: str,
    cfg: EvalConfig,
    options: RunOptions = RunOptions(),
    config_echo: dict | None = None,
) -> EvalReport:
    """Seeded multi-episode evaluation.

    A policy failure marks that episode failed-with-error and the run
    continues.  Identical configuration and seeds give byte-identical
    reports.
    """
    records = []
    for i in range(cfg.episodes):
        seed = cfg.seed_base + i
        agent = agent_factory()
        record, _ = run_episode(env_spec, agent, task, seed, cfg, options)
        records.append(record)
    echo = dict(config_echo or {})
    echo.update(
        {
            "env": env_spec.to_dict(),
            "env_hash": env_spec.config_hash(),
            "task": task,
            "mode": cfg.mode.value,
            "episodes": cfg.episodes,
            "seed_base": cfg.seed_base,
            "adjust_position": options.adjust_position,
            "adjust_orientation": options.adjust_orientation,
        }
    )
    return EvalReport(
        config=echo,
        per_episode=[episode_record_to_dict(r) for r in records],
        aggregate=aggregate(records, cfg),
    )
