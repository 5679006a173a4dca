"""Walk one scenario by hand.

A scenario is five decision levels: informativeness, humanitarian
category, ground damage, satellite damage, UAV damage.  At each level
the agent sees a 9-number observation (4 padded confidences + 5 level
one-hot) and picks a canonical action slot: 0..3 answer a class, 4
gathers fresh data for -1 (5 credits per level).
"""
import numpy as np

from scenariolab import Mode, ScenarioEnv, SynthConfig, SyntheticSource, level_spec

source = SyntheticSource(config=SynthConfig(seed=7))
env = ScenarioEnv(source, mode=Mode.TERMINATE_ON_WRONG)

state, obs = env.reset()
print("observation:", np.round(obs, 3))
print("level:", state.current_level, "credits:", state.credits)

# the mask says which slots are legal right now: 2 classes + gather
print("valid actions:", env.valid_actions())

# spend one credit to redraw the level-1 judgement
out = env.step(4)
print(f"\ngather -> reward {out.reward}, credits now {env.state.credits}")
print("fresh observation:", np.round(out.next_observation, 3))

# answer with the enabler's argmax until the scenario ends
while not env.state.done:
    record = env.state.current_record
    slot = int(np.argmax(record.confidences))
    labels = level_spec(record.level_id).class_labels
    out = env.step(slot)
    print(f"level {record.level_id}: answered '{labels[slot]}' "
          f"-> {out.event.value} ({out.reward:+.0f})")

print("\ntree score:", env.state.accumulated_reward)
print("event log:")
for e in env.state.events:
    print(f"  level {e.level}: {e.event.value:8s} slot={e.action_slot} "
          f"reward={e.reward:+.0f} record={e.record_id}")
