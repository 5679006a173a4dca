"""The scenario environment: a finite MDP over the five decision levels.

One episode is one scenario.  At each level the agent sees the current
judgement (padded confidence vector + level one-hot) and either commits
to a class or spends one of the level's five gather credits to redraw
the judgement.  Correct classifications advance the level (+1), wrong
ones cost -5 and either end the episode (TERMINATE_ON_WRONG) or advance
anyway (CONTINUE_THROUGH), and gathers cost -1 without advancing.

Instances are single-owner: hold one per worker, never share.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .judgement import JudgementRecord
from .levels import GATHER_SLOT, MAX_CLASSES, N_LEVELS, N_SLOTS, level_spec


class Mode(enum.Enum):
    TERMINATE_ON_WRONG = "terminate_on_wrong"
    CONTINUE_THROUGH = "continue_through"


class Event(enum.Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    GATHERED = "gathered"
    ILLEGAL_GATHER = "illegal_gather"


class EpisodeFinished(RuntimeError):
    """reset/step/valid_actions called on a finished episode."""


class InvalidAction(ValueError):
    """Action slot outside the current level's valid mask."""


@dataclass(frozen=True)
class RewardSpec:
    correct: float = 1.0
    wrong: float = -5.0
    gather: float = -1.0
    credits_per_level: int = 5

    def __post_init__(self):
        if not self.correct > 0 > self.gather > self.wrong:
            raise ValueError("expected correct > 0 > gather > wrong")
        if self.credits_per_level < 0:
            raise ValueError("credits_per_level must be >= 0")


@dataclass(frozen=True)
class ObservationConfig:
    """Observation layout: 4 padded confidences + 5 level one-hot
    (+ optionally the normalized remaining-credit count)."""

    include_credit: bool = False

    @property
    def length(self) -> int:
        return MAX_CLASSES + N_LEVELS + (1 if self.include_credit else 0)


@dataclass(frozen=True)
class DecisionEvent:
    level: int
    event: Event
    action_slot: int
    reward: float
    record_id: str
    ground_truth: int


@dataclass
class EnvState:
    current_level: int
    credits: int
    current_record: JudgementRecord
    accumulated_reward: float = 0.0
    events: list[DecisionEvent] = field(default_factory=list)
    done: bool = False


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    next_observation: np.ndarray | None
    event: Event
    episode_done: bool


def encode_observation(
    record: JudgementRecord,
    level: int,
    credits: int,
    config: ObservationConfig = ObservationConfig(),
) -> np.ndarray:
    """Pad confidences to 4, append the level one-hot (and credit share)."""
    if record.level_id != level:
        raise ValueError(f"record is for level {record.level_id}, not {level}")
    conf = np.asarray(record.confidences, dtype=np.float64)
    if conf.shape[0] > MAX_CLASSES:
        raise ValueError(f"confidence vector longer than {MAX_CLASSES}")
    obs = np.zeros(config.length, dtype=np.float64)
    obs[: conf.shape[0]] = conf
    obs[MAX_CLASSES + level - 1] = 1.0
    if config.include_credit:
        obs[-1] = credits / 5.0
    return obs


def valid_actions(state: EnvState) -> np.ndarray:
    """Boolean mask over the 5 canonical slots for the current state."""
    if state.done:
        raise EpisodeFinished("episode finished; no actions are valid")
    mask = np.zeros(N_SLOTS, dtype=bool)
    mask[: level_spec(state.current_level).n_classes] = True
    mask[GATHER_SLOT] = state.credits > 0
    return mask


class ScenarioEnv:
    """Steps one scenario at a time against a judgement source.

    ``source`` is anything with ``draw(level_id) -> JudgementRecord``.
    ``strict_gather`` controls what an out-of-credit gather does: end
    the episode (the environment's credit-exhaustion termination; the
    action is masked, so a mask-respecting agent never reaches it) or,
    when False, charge the gather penalty and stay put for robustness
    testing.
    """

    def __init__(
        self,
        source,
        mode: Mode = Mode.TERMINATE_ON_WRONG,
        reward_spec: RewardSpec = RewardSpec(),
        obs_config: ObservationConfig = ObservationConfig(),
        strict_gather: bool = True,
    ):
        self.source = source
        self.mode = mode
        self.reward_spec = reward_spec
        self.obs_config = obs_config
        self.strict_gather = strict_gather
        self.state: EnvState | None = None

    def reset(self) -> tuple[EnvState, np.ndarray]:
        record = self.source.draw(1)
        self.state = EnvState(
            current_level=1,
            credits=self.reward_spec.credits_per_level,
            current_record=record,
        )
        return self.state, self._observe()

    def _observe(self) -> np.ndarray:
        s = self.state
        return encode_observation(s.current_record, s.current_level, s.credits,
                                  self.obs_config)

    def valid_actions(self) -> np.ndarray:
        if self.state is None:
            raise EpisodeFinished("environment not reset")
        return valid_actions(self.state)

    def step(self, action_slot: int) -> StepOutcome:
        s = self.state
        if s is None or s.done:
            raise EpisodeFinished("step on a finished episode")
        if not 0 <= action_slot < N_SLOTS:
            raise InvalidAction(f"slot {action_slot} outside 0..{N_SLOTS - 1}")
        spec = level_spec(s.current_level)
        if action_slot != GATHER_SLOT and action_slot >= spec.n_classes:
            raise InvalidAction(
                f"slot {action_slot} is not a class of level {s.current_level}"
            )

        acted_level = s.current_level
        acted_record = s.current_record

        if action_slot == GATHER_SLOT:
            if s.credits > 0:
                reward, event = self.reward_spec.gather, Event.GATHERED
                s.credits -= 1
                s.current_record = self.source.draw(s.current_level)
                done = False
            elif self.strict_gather:
                # credit exhaustion ends the scenario without a decision
                reward, event, done = 0.0, Event.ILLEGAL_GATHER, True
            else:
                reward, event, done = self.reward_spec.gather, Event.ILLEGAL_GATHER, False
        elif action_slot == acted_record.ground_truth:
            reward, event = self.reward_spec.correct, Event.CORRECT
            done = self._advance()
        else:
            reward, event = self.reward_spec.wrong, Event.WRONG
            if self.mode is Mode.TERMINATE_ON_WRONG:
                done = True
            else:
                done = self._advance()

        s.accumulated_reward += reward
        s.events.append(
            DecisionEvent(
                level=acted_level,
                event=event,
                action_slot=action_slot,
                reward=reward,
                record_id=acted_record.record_id,
                ground_truth=acted_record.ground_truth,
            )
        )
        s.done = s.done or done
        next_obs = None if s.done else self._observe()
        return StepOutcome(reward=reward, next_observation=next_obs,
                           event=event, episode_done=s.done)

    def _advance(self) -> bool:
        """Move to the next level; True when the scenario is complete."""
        s = self.state
        if s.current_level == N_LEVELS:
            return True
        s.current_level += 1
        s.credits = self.reward_spec.credits_per_level
        s.current_record = self.source.draw(s.current_level)
        return False
