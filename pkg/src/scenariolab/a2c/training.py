"""A2C training loop, evaluation, and checkpoint IO."""
from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..env import Mode, ObservationConfig, RewardSpec, ScenarioEnv
from ..judgement import SourceExhausted
from ..levels import N_SLOTS
from ..metrics import ScenarioMetrics, scenario_metrics, summarize
from .nets import (
    Batch,
    PolicyParameters,
    clip_gradients,
    forward,
    global_norm,
    gradients,
    init_params,
    masked_probs,
    sample_actions,
)
from .returns import compute_returns

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.995
    n_steps: int = 128
    ent_coef: float = 0.02
    vf_coef: float = 0.5
    max_grad_norm: float = 1.0
    learning_rate: float = 5e-4
    adam_epsilon: float = 1e-7
    gae_lambda: float = 1.0
    total_steps: int = 2_000_000
    eval_interval: int = 1000
    n_envs: int = 1
    advantage_normalization: bool = False
    seed: int = 0
    hidden_dim: int = 64
    include_credit: bool = False

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    @property
    def obs_dim(self) -> int:
        return ObservationConfig(self.include_credit).length


class Adam:
    def __init__(self, params: PolicyParameters, lr: float, eps: float,
                 betas: tuple[float, float] = (0.9, 0.999)):
        self.lr = lr
        self.eps = eps
        self.b1, self.b2 = betas
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.weights.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.weights.items()}

    def step(self, params: PolicyParameters, grads: dict) -> None:
        self.t += 1
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        for k, g in grads.items():
            self.m[k] = self.b1 * self.m[k] + (1.0 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1.0 - self.b2) * g * g
            mhat = self.m[k] / bc1
            vhat = self.v[k] / bc2
            params.weights[k] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def a2c_update(params: PolicyParameters, batch: Batch, config: TrainConfig,
               optimizer: Adam | None = None) -> tuple[PolicyParameters, dict]:
    """One gradient step; returns the (mutated) params and loss breakdown."""
    if optimizer is None:
        optimizer = Adam(params, config.learning_rate, config.adam_epsilon)
    advantages = batch.advantages
    if config.advantage_normalization:
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)
        batch = Batch(batch.obs, batch.actions, batch.masks, advantages, batch.returns)
    grads, info = gradients(params, batch, config.ent_coef, config.vf_coef)
    if not np.isfinite(info["total_loss"]):
        raise TrainingDiverged(f"non-finite loss: {info}")
    grads, pre_norm = clip_gradients(grads, config.max_grad_norm)
    info["grad_norm_preclip"] = pre_norm
    info["grad_norm"] = global_norm(grads)
    optimizer.step(params, grads)
    return params, info


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(path, params: PolicyParameters, config: TrainConfig,
                    extra: dict | None = None) -> None:
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "config": asdict(config),
        "obs_dim": params.obs_dim,
        "hidden_dim": params.hidden_dim,
        "n_actions": params.n_actions,
        "weights": {k: v.tolist() for k, v in params.weights.items()},
        "extra": extra or {},
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> tuple[PolicyParameters, TrainConfig, dict]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('format_version')}")
    config = TrainConfig(**doc["config"])
    params = PolicyParameters(
        obs_dim=doc["obs_dim"],
        hidden_dim=doc["hidden_dim"],
        n_actions=doc["n_actions"],
        weights={k: np.asarray(v, dtype=np.float64) for k, v in doc["weights"].items()},
    )
    return params, config, doc.get("extra", {})


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepTrace:
    level: int
    max_confidence: float
    action_slot: int
    event: str


@dataclass
class EvalResult:
    aggregate: dict
    scenarios: list[ScenarioMetrics] = field(default_factory=list)
    steps: list[StepTrace] = field(default_factory=list)


def evaluate(
    params: PolicyParameters,
    source,
    n_scenarios: int,
    mode: Mode = Mode.TERMINATE_ON_WRONG,
    deterministic: bool = True,
    reward_spec: RewardSpec = RewardSpec(),
    seed: int = 0,
    trace: bool = False,
) -> EvalResult:
    """Play scenarios with the policy (greedy by default)."""
    if params.obs_dim == ObservationConfig(False).length:
        obs_config = ObservationConfig(False)
    elif params.obs_dim == ObservationConfig(True).length:
        obs_config = ObservationConfig(True)
    else:
        raise ValueError(f"checkpoint observation length {params.obs_dim} "
                         "matches no supported observation layout")
    env = ScenarioEnv(source, mode=mode, reward_spec=reward_spec,
                      obs_config=obs_config)
    rng = np.random.default_rng(seed)
    result = EvalResult(aggregate={})
    for _ in range(n_scenarios):
        try:
            _, obs = env.reset()
        except SourceExhausted:
            log.warning("evaluation source exhausted; stopping early")
            break
        done = False
        while not done:
            mask = env.valid_actions()
            cache = forward(params, obs[None, :])
            probs = masked_probs(cache["logits"], mask[None, :])[0]
            if deterministic:
                slot = int(np.argmax(probs))
            else:
                slot = int(sample_actions(probs[None, :], rng)[0])
            record = env.state.current_record
            outcome = env.step(slot)
            if trace:
                result.steps.append(StepTrace(
                    level=record.level_id,
                    max_confidence=record.max_confidence,
                    action_slot=slot,
                    event=outcome.event.value,
                ))
            obs = outcome.next_observation
            done = outcome.episode_done
        result.scenarios.append(scenario_metrics(env.state.events, reward_spec))
    result.aggregate = summarize(result.scenarios)
    return result


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass
class TrainResult:
    params: PolicyParameters
    config: TrainConfig
    global_step: int
    episodes: int
    metric_rows: list[dict]
    stopped_early: bool
    losses: dict


def _reset_env(env: ScenarioEnv):
    """Reset, reshuffling the source epoch if it ran dry."""
    try:
        return env.reset()
    except SourceExhausted:
        if hasattr(env.source, "reset_epoch"):
            env.source.reset_epoch()
            return env.reset()
        raise


def train(
    config: TrainConfig,
    source,
    reward_spec: RewardSpec = RewardSpec(),
    mode: Mode = Mode.TERMINATE_ON_WRONG,
    eval_source=None,
    eval_episodes: int = 32,
    stop_targets: dict | None = None,
    stop_window: int = 300,
    params: PolicyParameters | None = None,
    progress: bool = False,
) -> TrainResult:
    """Rollout/update loop until total_steps or the early-stop rule fires.

    ``stop_targets`` carries the benchmark means to beat on the training
    stream, {"is_correct_mean": ..., "tree_score_mean": ...}; training
    stops once the trailing ``stop_window`` episodes beat both.
    """
    rng = np.random.default_rng(config.seed)
    if params is None:
        params = init_params(config.obs_dim, config.hidden_dim, N_SLOTS, config.seed)
    optimizer = Adam(params, config.learning_rate, config.adam_epsilon)
    obs_config = ObservationConfig(config.include_credit)

    sources = [source]
    for i in range(1, config.n_envs):
        if not hasattr(source, "spawn"):
            raise ValueError("n_envs > 1 needs a source with .spawn()")
        sources.append(source.spawn(i))
    envs = [ScenarioEnv(s, mode=mode, reward_spec=reward_spec, obs_config=obs_config)
            for s in sources]
    obs = np.stack([_reset_env(e)[1] for e in envs])

    global_step = 0
    episodes = 0
    metric_rows: list[dict] = []
    interval_metrics: list[ScenarioMetrics] = []
    recent: deque[ScenarioMetrics] = deque(maxlen=stop_window)
    next_log = config.eval_interval
    stopped_early = False
    last_losses: dict = {}

    n_steps, n_envs = config.n_steps, config.n_envs
    while global_step < config.total_steps and not stopped_early:
        obs_buf = np.empty((n_steps, n_envs, config.obs_dim))
        act_buf = np.empty((n_steps, n_envs), dtype=np.int64)
        mask_buf = np.empty((n_steps, n_envs, N_SLOTS), dtype=bool)
        rew_buf = np.empty((n_steps, n_envs))
        done_buf = np.empty((n_steps, n_envs))
        val_buf = np.empty((n_steps, n_envs))

        for t in range(n_steps):
            masks = np.stack([e.valid_actions() for e in envs])
            cache = forward(params, obs)
            probs = masked_probs(cache["logits"], masks)
            actions = sample_actions(probs, rng)
            obs_buf[t], mask_buf[t] = obs, masks
            act_buf[t], val_buf[t] = actions, cache["values"]
            for i, env in enumerate(envs):
                outcome = env.step(int(actions[i]))
                rew_buf[t, i] = outcome.reward
                done_buf[t, i] = float(outcome.episode_done)
                if outcome.episode_done:
                    sm = scenario_metrics(env.state.events, reward_spec)
                    interval_metrics.append(sm)
                    recent.append(sm)
                    episodes += 1
                    _, obs_i = _reset_env(env)
                    obs[i] = obs_i
                else:
                    obs[i] = outcome.next_observation
            global_step += n_envs

        bootstrap = forward(params, obs)["values"]
        rets = np.empty_like(rew_buf)
        advs = np.empty_like(rew_buf)
        for i in range(n_envs):
            rets[:, i], advs[:, i] = compute_returns(
                rew_buf[:, i], val_buf[:, i], done_buf[:, i],
                float(bootstrap[i]), config.gamma, config.gae_lambda)

        batch = Batch(
            obs=obs_buf.reshape(-1, config.obs_dim),
            actions=act_buf.reshape(-1),
            masks=mask_buf.reshape(-1, N_SLOTS),
            advantages=advs.reshape(-1),
            returns=rets.reshape(-1),
        )
        params, last_losses = a2c_update(params, batch, config, optimizer)
        if not params.all_finite():
            raise TrainingDiverged("non-finite weights after update")

        while global_step >= next_log:
            step_tag = next_log
            for name, (mean, std) in _interval_rows(interval_metrics).items():
                metric_rows.append({"step": step_tag, "metric": name,
                                    "mean": mean, "std": std})
            interval_metrics = []
            if eval_source is not None:
                ev = evaluate(params, eval_source, eval_episodes,
                              reward_spec=reward_spec, seed=config.seed)
                for name in ("tree_score", "is_correct", "is_wrong", "gather_rate"):
                    metric_rows.append({
                        "step": step_tag, "metric": f"eval/{name}",
                        "mean": ev.aggregate[f"{name}_mean"],
                        "std": ev.aggregate[f"{name}_std"],
                    })
            if progress and step_tag % (config.eval_interval * 50) == 0:
                tail = [r for r in metric_rows if r["step"] == step_tag]
                log.info("step %d: %s", step_tag,
                         {r["metric"]: round(r["mean"], 4) for r in tail})
            if stop_targets and len(recent) == stop_window:
                mean_correct = float(np.mean([m.is_correct for m in recent]))
                mean_tree = float(np.mean([m.tree_score for m in recent]))
                if (mean_correct > stop_targets["is_correct_mean"]
                        and mean_tree > stop_targets["tree_score_mean"]):
                    stopped_early = True
            next_log += config.eval_interval

    return TrainResult(params=params, config=config, global_step=global_step,
                       episodes=episodes, metric_rows=metric_rows,
                       stopped_early=stopped_early, losses=last_losses)


def _interval_rows(group: list[ScenarioMetrics]) -> dict[str, tuple[float, float]]:
    out = {}
    if not group:
        return out
    for name in ("tree_score", "is_correct", "is_wrong", "gather_rate"):
        vals = np.array([getattr(m, name) for m in group], dtype=np.float64)
        out[f"train/{name}"] = (float(vals.mean()), float(vals.std()))
    return out
