"""Dataflow-guided macro flipping on a hand-made floorplan.

One macro sits on the left with its pins facing away from everything it
talks to; the flipping pass mirrors it so the pins face the flow, and the
guard keeps a second, already-aligned macro untouched.

Run:  python demos/04_orientation_finetune.py
"""

from dfplace import decompose_dataflow_vectors, run_flipping_pass, total_hpwl
from dfplace.dataflow import MC, MM_DIRECT, DataflowEdge, DataflowGraph
from dfplace.placer import Floorplan, MacroPlacement

fp = Floorplan(
    outline=(120.0, 60.0),
    macro_placements={
        # pins near the left edge, but the connected cluster is far right
        0: MacroPlacement(10, 20, 14, 12, "N", ((1.5, 3.0), (1.5, 9.0))),
        # pins already face its cluster on the right
        1: MacroPlacement(40, 36, 12, 10, "N", ((11.0, 5.0),)),
    },
    cluster_positions={5: (100.0, 25.0), 6: (70.0, 42.0)},
    io_anchors={9: (0.0, 30.0)},
)
graph = DataflowGraph((
    DataflowEdge(MM_DIRECT, 0, 9, 2.0, 2),
    DataflowEdge(MC, 0, 5, 12.0, 12),
    DataflowEdge(MC, 0, 6, 4.0, 4),
    DataflowEdge(MC, 1, 6, 6.0, 6),
))

for macro_id in (0, 1):
    fv = decompose_dataflow_vectors(macro_id, graph, fp)
    print(f"macro {macro_id}: total vector = ({fv.v_t[0]:+.1f}, {fv.v_t[1]:+.1f})")

before = total_hpwl(fp, graph)
decisions = run_flipping_pass(fp, graph, guard=True)
after = total_hpwl(fp, graph)

print(f"\ntotal HPWL {before:.1f} -> {after:.1f}")
print("decisions (name mode xVt yVt dHPWL applied):")
for d in decisions:
    print(f"  {d.name} {d.mode} {d.x_vt:+.1f} {d.y_vt:+.1f} "
          f"{d.post_hpwl - d.pre_hpwl:+.2f} {d.applied}")
print("orientations:",
      {m: mp.orientation for m, mp in fp.macro_placements.items()})
