"""n-step returns and generalized advantage estimation."""
from __future__ import annotations

import numpy as np


def compute_returns(
    rewards,
    values,
    dones,
    bootstrap_value: float,
    gamma: float,
    gae_lambda: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Bootstrapped returns and advantages over one rollout lane.

    ``dones[t]`` marks that the episode ended at step t, so nothing after
    t leaks into G_t.  With gae_lambda = 1 this reduces to plain
    discounted returns, G_t = r_t + gamma * (1 - done_t) * G_{t+1}, with
    advantage_t = G_t - values[t].
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    if not (rewards.shape == values.shape == dones.shape):
        raise ValueError("rewards, values and dones must be aligned")
    n = rewards.shape[0]
    advantages = np.zeros(n, dtype=np.float64)
    last_adv = 0.0
    for t in range(n - 1, -1, -1):
        nonterminal = 1.0 - dones[t]
        next_value = bootstrap_value if t == n - 1 else values[t + 1]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        last_adv = delta + gamma * gae_lambda * nonterminal * last_adv
        advantages[t] = last_adv
    returns = advantages + values
    return returns, advantages
