"""Session lifecycle for the human-operator survey.

The manager owns one CONTINUE_THROUGH environment per session so every
participant walks all five levels of each scenario.  Scoring goes
through exactly the same env/metrics code as the offline tools; the
service adds persistence and the per-level presentation mapping
(native action ids: classes in label order, gather last).
"""
from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from ..env import Event, Mode, RewardSpec, ScenarioEnv
from ..judgement import JudgementPool
from ..levels import GATHER_SLOT, level_spec
from ..metrics import ScenarioMetrics, comparison_table, scenario_metrics, summarize
from .store import EventLog, replay_events

ROLES = ("stakeholder", "volunteer", "victim")
MIN_SCORED_SCENARIOS = 2


class SessionError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Session:
    session_id: str
    role: str
    created_at: float
    env: ScenarioEnv
    scenario_index: int = 0            # 0 is the tutorial
    training_completed: bool = False
    finished: bool = False
    scenario_events_logged: int = 0
    completed_scenarios: list[list] = field(default_factory=list)  # scored only
    lock: threading.RLock = field(default_factory=threading.RLock)

    @property
    def is_training(self) -> bool:
        return self.scenario_index == 0

    @property
    def scenario_live(self) -> bool:
        return self.env.state is not None and not self.env.state.done


class SessionManager:
    def __init__(self, pool: JudgementPool, store: EventLog,
                 reward_spec: RewardSpec = RewardSpec(),
                 rl_baseline: dict | None = None, seed: int = 0):
        self.pool = pool
        self.store = store
        self.reward_spec = reward_spec
        self.rl_baseline = rl_baseline
        self.seed = seed
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self._session_counter = 0

    # -- lifecycle ---------------------------------------------------------

    def create_session(self, role: str) -> str:
        if role not in ROLES:
            raise SessionError(422, f"role must be one of {ROLES}")
        with self._registry_lock:
            self._session_counter += 1
            counter = self._session_counter
        session_id = uuid.uuid4().hex[:12]
        sampler = self.pool.sampler(seed=self.seed + counter, recycle=True)
        env = ScenarioEnv(sampler, mode=Mode.CONTINUE_THROUGH,
                          reward_spec=self.reward_spec)
        session = Session(session_id=session_id, role=role,
                          created_at=time.time(), env=env)
        with self._registry_lock:
            self.sessions[session_id] = session
        self.store.append({"type": "session_created", "session_id": session_id,
                           "role": role})
        return session_id

    def _get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionError(404, f"unknown session {session_id}")
        return session

    # -- survey flow -------------------------------------------------------

    def next_item(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.finished:
                raise SessionError(409, "session already finished")
            if not session.scenario_live:
                self._start_scenario(session)
            state = session.env.state
            record = state.current_record
            spec = level_spec(state.current_level)
            if state.current_level <= 3:
                payload = {"text": record.text, "image_uri": record.image_uri}
            else:
                payload = {"image_uri": record.image_uri}
            return {
                "scenario_index": session.scenario_index,
                "level": state.current_level,
                "payload": payload,
                "options": [
                    {"action": i, "label": label,
                     "available": True if i < spec.n_classes else state.credits > 0}
                    for i, label in enumerate(spec.option_labels())
                ],
                "credits_remaining": state.credits,
                "is_training": session.is_training,
                "scenario_score": state.accumulated_reward,
                "scored_scenarios_completed": len(session.completed_scenarios),
                "can_finish": len(session.completed_scenarios) >= MIN_SCORED_SCENARIOS,
            }

    def _start_scenario(self, session: Session) -> None:
        session.env.reset()
        session.scenario_events_logged = 0
        self.store.append({
            "type": "scenario_started", "session_id": session.session_id,
            "scenario_index": session.scenario_index,
            "is_training": session.is_training,
        })

    def submit_action(self, session_id: str, action: int) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.finished:
                raise SessionError(409, "session already finished")
            if not session.scenario_live:
                raise SessionError(409, "no scenario in progress; fetch next item")
            state = session.env.state
            spec = level_spec(state.current_level)
            if not 0 <= action <= spec.n_classes:
                raise SessionError(400, f"action {action} invalid for level "
                                        f"{state.current_level}")
            slot = GATHER_SLOT if action == spec.n_classes else action
            if slot == GATHER_SLOT and state.credits == 0:
                raise SessionError(400, "no gather credits left at this level")

            was_training = session.is_training
            outcome = session.env.step(slot)
            logged = state.events[-1]
            # persist before responding so a replay always covers the answer
            self.store.append({
                "type": "step", "session_id": session.session_id,
                "scenario_index": session.scenario_index,
                "is_training": session.is_training,
                "level": logged.level, "action_slot": logged.action_slot,
                "event": logged.event.value, "reward": logged.reward,
                "record_id": logged.record_id,
                "ground_truth": logged.ground_truth,
            })
            session.scenario_events_logged += 1

            scenario_done = outcome.episode_done
            if scenario_done:
                if not session.is_training:
                    session.completed_scenarios.append(list(state.events))
                else:
                    session.training_completed = True
                session.scenario_index += 1
                self.store.write_snapshot(self._snapshot())

            feedback = {
                Event.CORRECT: "Correct decision.",
                Event.WRONG: "Wrong decision.",
                Event.GATHERED: "Additional data gathered.",
                Event.ILLEGAL_GATHER: "No credits left.",
            }[outcome.event]
            return {
                "event": outcome.event.value,
                "reward": outcome.reward,
                "scenario_score": state.accumulated_reward,
                "scenario_done": scenario_done,
                "credits_remaining": state.credits,
                "is_training": was_training,
                "feedback": feedback,
                "scored_scenarios_completed": len(session.completed_scenarios),
                "can_finish": len(session.completed_scenarios) >= MIN_SCORED_SCENARIOS,
            }

    def finish_session(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.finished:
                raise SessionError(409, "session already finished")
            completed = len(session.completed_scenarios)
            if completed < MIN_SCORED_SCENARIOS:
                raise SessionError(
                    409, f"complete at least {MIN_SCORED_SCENARIOS} scenarios "
                         f"before finishing ({MIN_SCORED_SCENARIOS - completed} to go)")
            session.finished = True
            self.store.append({"type": "session_finished",
                               "session_id": session_id})
            summary = self.session_summary(session)
            self.store.write_snapshot(self._snapshot())
            return summary

    def session_summary(self, session: Session) -> dict:
        per_scenario = [scenario_metrics(evts, self.reward_spec)
                        for evts in session.completed_scenarios]
        per_level: dict[int, dict[str, int]] = {}
        for evts in session.completed_scenarios:
            for e in evts:
                bucket = per_level.setdefault(e.level, {"correct": 0, "wrong": 0,
                                                        "gathers": 0})
                if e.event is Event.CORRECT:
                    bucket["correct"] += 1
                elif e.event is Event.WRONG:
                    bucket["wrong"] += 1
                elif e.event is Event.GATHERED:
                    bucket["gathers"] += 1
        return {
            "session_id": session.session_id,
            "role": session.role,
            "per_scenario": [vars(m) for m in per_scenario],
            "totals": {
                **summarize(per_scenario),
                "total_score": sum(m.tree_score for m in per_scenario),
            },
            "insights": {"per_level": per_level},
        }

    def _snapshot(self) -> dict:
        return {
            "sessions": [
                {
                    "session_id": s.session_id,
                    "role": s.role,
                    "created_at": s.created_at,
                    "finished": s.finished,
                    "training_completed": s.training_completed,
                    "scored_scenarios": len(s.completed_scenarios),
                }
                for s in self.sessions.values()
            ]
        }

    # -- reporting ---------------------------------------------------------

    def comparison_report(self, role: str | None = None) -> dict:
        return build_comparison(self.store.read_all(), self.reward_spec,
                                self.rl_baseline, role)


def build_comparison(events: list[dict], reward_spec: RewardSpec = RewardSpec(),
                     rl_baseline: dict | None = None,
                     role: str | None = None) -> dict:
    """Role aggregates, per-role most-active participant, and the RL row."""
    replayed = replay_events(events)
    finished = {sid: info for sid, info in replayed.items() if info["finished"]}
    if not finished:
        return {"rows": []}

    def metrics_for(info) -> list[ScenarioMetrics]:
        return [scenario_metrics(evts, reward_spec) for evts in info["scenarios"]]

    groups: dict[str, list[ScenarioMetrics]] = {}
    roles = [role] if role else list(ROLES)
    for r in roles:
        members = {sid: info for sid, info in finished.items()
                   if info["role"] == r}
        collective: list[ScenarioMetrics] = []
        for info in members.values():
            collective.extend(metrics_for(info))
        label = r.capitalize()
        groups[f"{label} A (Collective)"] = collective
        if members:
            top_sid = max(members, key=lambda sid: len(members[sid]["scenarios"]))
            groups[f"{label} B (Most Scenarios)"] = metrics_for(members[top_sid])
        else:
            groups[f"{label} B (Most Scenarios)"] = []
    if role is None:
        all_metrics: list[ScenarioMetrics] = []
        for info in finished.values():
            all_metrics.extend(metrics_for(info))
        groups["All (Collective)"] = all_metrics

    rows = comparison_table(groups)
    if rl_baseline is not None:
        rows.append({"agent": "RL Agent",
                     "n_scenarios": rl_baseline.get("n_scenarios", 0),
                     "M.T.S": rl_baseline["M.T.S"],
                     "M.C.A": rl_baseline["M.C.A"],
                     "M.W.A": rl_baseline["M.W.A"],
                     "M.A.D": rl_baseline["M.A.D"]})
    return {"rows": rows}
