"""Actor-critic MLP with masked categorical head, in plain numpy.

Two separate tanh towers (obs -> 64 -> 64) feed a 5-logit policy head
and a scalar value head.  Hidden layers use orthogonal init with gain
sqrt(2); the policy head uses gain 0.01 so the initial policy is close
to uniform over the valid slots, the value head gain 1.0.  Invalid
action slots receive probability exactly zero, not merely a large
negative logit, so they can never be sampled.

Gradients are computed analytically (see ``gradients``); float64
throughout keeps them in agreement with central finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..levels import N_SLOTS

HIDDEN = 64

ACTOR_KEYS = ("a_w1", "a_b1", "a_w2", "a_b2", "a_w3", "a_b3")
CRITIC_KEYS = ("c_w1", "c_b1", "c_w2", "c_b2", "c_w3", "c_b3")
PARAM_KEYS = ACTOR_KEYS + CRITIC_KEYS


def orthogonal(shape: tuple[int, int], gain: float, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(max(shape), min(shape)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return np.ascontiguousarray(gain * q[: shape[0], : shape[1]])


@dataclass
class PolicyParameters:
    obs_dim: int
    hidden_dim: int = HIDDEN
    n_actions: int = N_SLOTS
    weights: dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self) -> "PolicyParameters":
        return PolicyParameters(self.obs_dim, self.hidden_dim, self.n_actions,
                                {k: v.copy() for k, v in self.weights.items()})

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.weights.values())


def init_params(obs_dim: int, hidden_dim: int = HIDDEN,
                n_actions: int = N_SLOTS, seed: int = 0) -> PolicyParameters:
    rng = np.random.default_rng(seed)
    w = {}
    for prefix, head_gain, head_out in (("a", 0.01, n_actions), ("c", 1.0, 1)):
        w[f"{prefix}_w1"] = orthogonal((hidden_dim, obs_dim), np.sqrt(2.0), rng)
        w[f"{prefix}_b1"] = np.zeros(hidden_dim)
        w[f"{prefix}_w2"] = orthogonal((hidden_dim, hidden_dim), np.sqrt(2.0), rng)
        w[f"{prefix}_b2"] = np.zeros(hidden_dim)
        w[f"{prefix}_w3"] = orthogonal((head_out, hidden_dim), head_gain, rng)
        w[f"{prefix}_b3"] = np.zeros(head_out)
    return PolicyParameters(obs_dim, hidden_dim, n_actions, w)


def masked_probs(logits: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Softmax over valid slots only; invalid slots get exactly 0."""
    if not masks.any(axis=-1).all():
        raise ValueError("mask with no valid slot")
    shifted = logits - np.where(masks, logits, -np.inf).max(axis=-1, keepdims=True)
    exps = np.where(masks, np.exp(np.where(masks, shifted, 0.0)), 0.0)
    return exps / exps.sum(axis=-1, keepdims=True)


def forward(params: PolicyParameters, obs: np.ndarray) -> dict:
    """Run both towers on a batch (B, obs_dim); returns the full cache."""
    w = params.weights
    h1a = np.tanh(obs @ w["a_w1"].T + w["a_b1"])
    h2a = np.tanh(h1a @ w["a_w2"].T + w["a_b2"])
    logits = h2a @ w["a_w3"].T + w["a_b3"]
    h1c = np.tanh(obs @ w["c_w1"].T + w["c_b1"])
    h2c = np.tanh(h1c @ w["c_w2"].T + w["c_b2"])
    values = (h2c @ w["c_w3"].T + w["c_b3"]).reshape(-1)
    return {"obs": obs, "h1a": h1a, "h2a": h2a, "logits": logits,
            "h1c": h1c, "h2c": h2c, "values": values}


def policy_forward(params: PolicyParameters, observation: np.ndarray,
                   mask: np.ndarray) -> tuple[np.ndarray, float]:
    """Masked action distribution and value estimate for one observation."""
    observation = np.asarray(observation, dtype=np.float64)
    if observation.shape != (params.obs_dim,):
        raise ValueError(
            f"observation shape {observation.shape} != ({params.obs_dim},)")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (params.n_actions,):
        raise ValueError(f"mask must have {params.n_actions} slots")
    cache = forward(params, observation[None, :])
    probs = masked_probs(cache["logits"], mask[None, :])[0]
    return probs, float(cache["values"][0])


def sample_actions(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample one action per row; zero-probability slots are unreachable."""
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[0])
    idx = np.minimum((cdf <= u[:, None]).sum(axis=-1), probs.shape[1] - 1)
    rows = np.arange(probs.shape[0])
    # float boundary can only ever land on a zero-probability slot through
    # rounding of the cdf; redirect those draws to the row's mode
    hit_zero = probs[rows, idx] == 0.0
    if hit_zero.any():
        idx[hit_zero] = probs[hit_zero].argmax(axis=-1)
    return idx


def entropy(probs: np.ndarray) -> np.ndarray:
    logp = np.where(probs > 0, np.log(np.where(probs > 0, probs, 1.0)), 0.0)
    return -(probs * logp).sum(axis=-1)


@dataclass
class Batch:
    obs: np.ndarray         # (B, obs_dim)
    actions: np.ndarray     # (B,)
    masks: np.ndarray       # (B, n_actions) bool
    advantages: np.ndarray  # (B,)
    returns: np.ndarray     # (B,)


def loss(params: PolicyParameters, batch: Batch,
         ent_coef: float, vf_coef: float) -> tuple[float, dict]:
    """Total A2C loss (policy + vf_coef*value - ent_coef*entropy)."""
    cache = forward(params, batch.obs)
    probs = masked_probs(cache["logits"], batch.masks)
    b = np.arange(len(batch.actions))
    logp_chosen = np.log(probs[b, batch.actions])
    policy_loss = -float(np.mean(batch.advantages * logp_chosen))
    value_loss = float(np.mean((cache["values"] - batch.returns) ** 2))
    ent = float(np.mean(entropy(probs)))
    total = policy_loss + vf_coef * value_loss - ent_coef * ent
    return total, {"policy_loss": policy_loss, "value_loss": value_loss,
                   "entropy": ent, "total_loss": total}


def gradients(params: PolicyParameters, batch: Batch,
              ent_coef: float, vf_coef: float) -> tuple[dict, dict]:
    """Analytic gradients of ``loss`` w.r.t. every parameter."""
    w = params.weights
    cache = forward(params, batch.obs)
    probs = masked_probs(cache["logits"], batch.masks)
    n = len(batch.actions)
    b = np.arange(n)

    logp = np.where(probs > 0, np.log(np.where(probs > 0, probs, 1.0)), 0.0)
    ent_per = -(probs * logp).sum(axis=-1)

    onehot = np.zeros_like(probs)
    onehot[b, batch.actions] = 1.0
    # d(policy)/dlogits - ent_coef * d(entropy)/dlogits
    dlogits = (-batch.advantages[:, None] * (onehot - probs)
               + ent_coef * probs * (logp + ent_per[:, None])) / n
    dvalues = vf_coef * 2.0 * (cache["values"] - batch.returns) / n

    grads: dict[str, np.ndarray] = {}

    def backprop(prefix, h1, h2, dout):
        grads[f"{prefix}_w3"] = dout.T @ h2
        grads[f"{prefix}_b3"] = dout.sum(axis=0)
        dh2 = dout @ w[f"{prefix}_w3"]
        dpre2 = dh2 * (1.0 - h2 * h2)
        grads[f"{prefix}_w2"] = dpre2.T @ h1
        grads[f"{prefix}_b2"] = dpre2.sum(axis=0)
        dh1 = dpre2 @ w[f"{prefix}_w2"]
        dpre1 = dh1 * (1.0 - h1 * h1)
        grads[f"{prefix}_w1"] = dpre1.T @ batch.obs
        grads[f"{prefix}_b1"] = dpre1.sum(axis=0)

    backprop("a", cache["h1a"], cache["h2a"], dlogits)
    backprop("c", cache["h1c"], cache["h2c"], dvalues[:, None])

    policy_loss = -float(np.mean(batch.advantages * np.log(probs[b, batch.actions])))
    value_loss = float(np.mean((cache["values"] - batch.returns) ** 2))
    ent = float(np.mean(ent_per))
    info = {"policy_loss": policy_loss, "value_loss": value_loss, "entropy": ent,
            "total_loss": policy_loss + vf_coef * value_loss - ent_coef * ent}
    return grads, info


def global_norm(grads: dict) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_gradients(grads: dict, max_norm: float) -> tuple[dict, float]:
    """Scale all gradients so their global norm is at most max_norm."""
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        grads = {k: g * scale for k, g in grads.items()}
    return grads, norm
