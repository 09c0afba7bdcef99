"""Parse a small netlist, bundle its buses and cluster it.

Run:  python demos/01_netlist_and_clusters.py
"""

import json

from dfplace import build_clusters, bundle_buses, compute_cluster_edges, parse_netlist
from dfplace.clustering import dump_clusters

doc = {
    "outline": {"width": 60.0, "height": 40.0},
    "masters": [
        {"name": "RAM", "width": 10, "height": 8, "kind": "macro",
         "pin_offsets": [["d", 0.5, 4.0], ["q", 9.5, 4.0]]},
        {"name": "LUT", "width": 1, "height": 1, "kind": "cell",
         "pin_offsets": [["a", 0.0, 0.5], ["y", 1.0, 0.5]]},
        {"name": "PAD", "width": 0, "height": 0, "kind": "io_pad",
         "pin_offsets": [["p", 0.0, 0.0]]},
    ],
    "instances": [
        {"name": "u_ram", "master": "RAM", "hierarchy_path": ["top", "mem"]},
        *[{"name": f"alu_c{i}", "master": "LUT", "hierarchy_path": ["top", "alu"]}
          for i in range(6)],
        {"name": "pad_w", "master": "PAD", "hierarchy_path": ["top"]},
    ],
    "nets": [
        # a 4-bit bus from the RAM to one ALU cell, emitted bit by bit
        *[{"base_name": f"data[{b}]", "driver": ["u_ram", "q"],
           "sinks": [["alu_c0", "a"]]} for b in range(4)],
        {"base_name": "req", "driver": ["pad_w", "p"], "sinks": [["alu_c1", "a"]]},
        {"base_name": "w0", "driver": ["alu_c1", "y"], "sinks": [["alu_c2", "a"]]},
    ],
    "io_side": {"pad_w": "W"},
}

netlist = parse_netlist(json.dumps(doc))
print(f"parsed {len(netlist.instances)} instances, {len(netlist.nets)} scalar nets")

netlist = bundle_buses(netlist)
print(f"after bus bundling: {len(netlist.nets)} nets")
for net in netlist.nets:
    print(f"  {net.base_name:<8} bit_width={net.bit_width}")

cn = build_clusters(netlist, min_cells=2, max_cells=50)
cn = compute_cluster_edges(netlist, cn)
print("\nclusters (id kind size area root):")
print(dump_clusters(cn), end="")
print("cluster edges (src -> dst, summed bit width):")
for src, dst, w in cn.edges:
    print(f"  {cn.label(src)} -> {cn.label(dst)}  {w}")
