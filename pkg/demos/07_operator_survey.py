"""Drive the human-operator survey backend end to end, in process.

The HTTP app in scenariolab.service wraps exactly this manager; here we
call it directly: create a session, play the unscored tutorial, finish
two scored scenarios, and pull the comparison report.  Every number the
participant sees is computed by the same environment and metrics code
as the offline tools.
"""
import tempfile

from scenariolab import JudgementPool, JudgementRecord, level_spec
from scenariolab.metrics import format_comparison_text
from scenariolab.service import SessionManager
from scenariolab.service.store import EventLog

# a small validation pool; real deployments load recorded enabler output
records = {}
for lv in range(1, 6):
    n = level_spec(lv).n_classes
    conf = tuple(0.85 if i == 0 else 0.15 / (n - 1) for i in range(n))
    records[lv] = tuple(
        JudgementRecord(lv, conf, 0, f"val-{lv}-{i}", "val",
                        text=f"field report {lv}-{i}",
                        image_uri=f"/static/{lv}-{i}.png")
        for i in range(50)
    )
pool = JudgementPool(records)

store_dir = tempfile.mkdtemp(prefix="operator-store-")
manager = SessionManager(pool, EventLog(store_dir),
                         rl_baseline={"M.T.S": 1.4, "M.C.A": 0.88,
                                      "M.W.A": 0.12, "M.A.D": 0.0})

sid = manager.create_session("volunteer")
print("session:", sid)


def play_one(answers=None, gather_once_at=()):
    """Answer every level (class 0 unless told otherwise), with optional
    one-off gathers; answers maps level -> native class id."""
    answers = answers or {}
    pending_gathers = set(gather_once_at)
    while True:
        item = manager.next_item(sid)
        level = item["level"]
        if level in pending_gathers and item["credits_remaining"] > 0:
            pending_gathers.discard(level)
            action = level_spec(level).n_classes   # gather is the last option
        else:
            action = answers.get(level, 0)
        out = manager.submit_action(sid, action)
        print(f"  L{level} ({'tutorial' if item['is_training'] else 'scored'}): "
              f"action {action} -> {out['event']} {out['reward']:+.0f} "
              f"(score {out['scenario_score']:+.0f})")
        if out["scenario_done"]:
            return


print("\ntutorial scenario (not scored):")
play_one()

print("\nscored scenario 1 (one gather at level 2):")
play_one(gather_once_at={2})
print("\nscored scenario 2 (a wrong answer at level 3):")
play_one(answers={3: 1})

summary = manager.finish_session(sid)
print("\nfinal summary:")
print("  total score:", summary["totals"]["total_score"])
print("  per scenario:", [s["tree_score"] for s in summary["per_scenario"]])
print("  insights:", summary["insights"]["per_level"])

report = manager.comparison_report()
print("\n" + format_comparison_text(report["rows"]))
print("\nevent log at:", store_dir)
