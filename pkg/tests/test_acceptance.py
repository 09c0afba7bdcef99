"""Acceptance suite: one test per release criterion, with timing budgets.

Each test prints a PASS line with its measured runtime so the suite doubles
as a release report: ``pytest tests/test_acceptance.py -v -s``.
"""

import itertools
import json
import time

import numpy as np
import pytest

from dfplace import (
    build_clusters,
    bundle_buses,
    compute_cluster_edges,
    compute_loss,
    congestion,
    evaluate_sequence_pair,
    extract_dataflow,
    generate_design,
    global_place_clusters,
    hpwl,
    run_pipeline,
    run_sa,
    serialize_netlist,
    total_hpwl,
)
from dfplace.dataflow import MCC, MM_INDIRECT, classify_direct_edges, extract_indirect_mm
from dfplace.finetune import run_flipping_pass
from dfplace.pipeline import PipelineConfig
from dfplace.placer import (
    Floorplan,
    MacroPlacement,
    PlacerConfig,
    SaSchedule,
    SequencePair,
    macro_shapes,
    normalize_macro_area,
    two_hop_coefficient,
)
from dfplace.synth import random_netlist
from oracles import (
    any_overlap,
    congestion_deposit_brute,
    hpwl_brute,
    indirect_pairs_brute,
    two_hop_triples_brute,
)


class budget:
    """Context manager asserting a wall-clock limit and printing the verdict."""

    def __init__(self, name, seconds):
        self.name = name
        self.limit = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, *_):
        dt = time.perf_counter() - self.t0
        if exc_type is None:
            print(f"PASS {self.name} ({dt:.2f}s, budget {self.limit:.0f}s)")
            assert dt < self.limit, f"{self.name} exceeded budget: {dt:.2f}s"
        else:
            print(f"FAIL {self.name} ({dt:.2f}s, budget {self.limit:.0f}s)")
        return False


def test_criterion_1_hpwl_oracle():
    rng = np.random.default_rng(10)
    with budget("criterion 1: HPWL brute-force oracle x1000", 1.0):
        for _ in range(1000):
            pts = [
                (float(rng.uniform(-100, 100)), float(rng.uniform(-100, 100)))
                for _ in range(int(rng.integers(1, 51)))
            ]
            assert hpwl(pts) == hpwl_brute(pts)


def test_criterion_2_sequence_pair_soundness():
    rng = np.random.default_rng(11)
    with budget("criterion 2: 500 random sequence pairs overlap-free", 5.0):
        for _ in range(500):
            n = int(rng.integers(2, 13))
            sizes = [(float(rng.uniform(1, 10)), float(rng.uniform(1, 10)))
                     for _ in range(n)]
            sp = SequencePair(tuple(rng.permutation(n).tolist()),
                              tuple(rng.permutation(n).tolist()))
            xs, ys = evaluate_sequence_pair(sp, sizes)
            rects = [(xs[i], ys[i], sizes[i][0], sizes[i][1]) for i in range(n)]
            assert not any_overlap(rects)


def test_criterion_3_extraction_oracles():
    from test_dataflow import star_design
    with budget("criterion 3: extraction vs brute force x200 + star counts", 10.0):
        for seed in range(200):
            nl = bundle_buses(random_netlist(seed, n_cells=20, n_macros=4, n_nets=36))
            cn = compute_cluster_edges(nl, build_clusters(nl, 2, 10))
            assert len(cn.clusters) <= 12
            g = extract_dataflow(cn, nl)
            got_pairs = {(e.src, e.dst): e.weight for e in g.by_kind(MM_INDIRECT)}
            want_pairs = indirect_pairs_brute(cn, nl, 32, ("clk*", "rst*", "reset*"))
            assert got_pairs == pytest.approx(want_pairs)
            got_triples = {(e.src, e.via, e.dst): (e.first_hop, e.weight)
                           for e in g.by_kind(MCC)}
            want_triples = two_hop_triples_brute(cn, k=1.0)
            assert set(got_triples) == set(want_triples)
            for key, (first_hop, second_hop) in want_triples.items():
                assert got_triples[key][0] == pytest.approx(first_hop)
                assert got_triples[key][1] == pytest.approx(second_hop)
        for n in range(2, 9):
            nl, cn = star_design(n)
            g = extract_indirect_mm(classify_direct_edges(cn), cn, nl)
            assert len(g.by_kind(MM_INDIRECT)) == n * (n - 1) // 2


def test_criterion_4_area_normalization_and_two_hop_loss():
    with budget("criterion 4: area normalization + two-hop loss exactness", 5.0):
        rng = np.random.default_rng(12)
        for _ in range(200):
            areas = rng.uniform(0.5, 40.0, size=int(rng.integers(1, 15)))
            out = normalize_macro_area(areas)
            assert all(1.0 <= v <= 2.0 for v in out)
        assert normalize_macro_area([3.0, 9.0]) == [1.0, 2.0]
        assert normalize_macro_area([4.0, 4.0, 4.0]) == [1.0, 1.0, 1.0]
        assert normalize_macro_area([2.0, 6.0, 4.0])[2] == pytest.approx(1.5)

        # single two-hop edge: sqrt(first_hop*second_hop)/A' * WL, exact to 1e-12
        from dfplace.dataflow import DataflowEdge, DataflowGraph
        fp = Floorplan(
            (40.0, 40.0),
            {0: MacroPlacement(0, 0, 2, 2, "N", ((1.0, 1.0),))},
            {5: (4.0, 4.0), 6: (7.0, 5.0)},
        )
        graph = DataflowGraph((DataflowEdge(MCC, 0, 6, 9.0, 3, via=5, first_hop=4.0),))
        out = compute_loss(fp, graph, {0: 2.0})
        assert abs(out.loss_mcc - 30.0) <= 1e-12
        assert abs(two_hop_coefficient(4.0, 9.0, 2.0, "eq8") - 3.0) <= 1e-12


def three_macro_instance(seed):
    nl = bundle_buses(generate_design(
        n_modules=3, cells_per_module=10, macro_bus_width=12, io_bus_width=10,
        cc_bus_width=2, seed=seed,
    ))
    cn = compute_cluster_edges(nl, build_clusters(nl, 4, 40))
    graph = extract_dataflow(cn, nl)
    pos = global_place_clusters(graph, cn, nl.outline, 8, seed=seed)
    return nl, cn, graph, pos


def test_criterion_5_small_instance_optimality():
    wins = 0
    with budget("criterion 5: 3-macro SA optimality, 20 seeds", 30.0):
        for seed in range(20):
            nl, cn, graph, pos = three_macro_instance(seed)
            assert len(macro_shapes(cn)) == 3
            best = min(
                run_sa(SequencePair(p, q), graph, cn, nl.outline,
                       SaSchedule(moves_per_temp=0), 0, pos)[2].total
                for p in itertools.permutations(range(3))
                for q in itertools.permutations(range(3))
            )
            sp0 = SequencePair((0, 1, 2), (0, 1, 2))
            _, _, loss = run_sa(sp0, graph, cn, nl.outline, SaSchedule(), seed, pos)
            if loss.total <= best * (1 + 1e-9):
                wins += 1
        print(f"  optimal in {wins}/20 runs")
        assert wins >= 18


def paired_run(seed, aware):
    nl = bundle_buses(generate_design(
        n_modules=4, cells_per_module=16, macros_per_module=1,
        macro_bus_width=16, io_bus_width=24, cc_bus_width=1,
        internal_nets=4, mm_bus_width=2, seed=seed,
    ))
    cn = compute_cluster_edges(nl, build_clusters(nl, 4, 60))
    graph = extract_dataflow(cn, nl)
    if aware:
        cfg = PlacerConfig()
    else:  # direct macro-macro connections only
        cfg = PlacerConfig(mc_scale=0.0, mcc_scale=0.0, mm_indirect_scale=0.0)
    pos = global_place_clusters(graph, cn, nl.outline, 12, seed=seed)
    ids = sorted(macro_shapes(cn))
    sp = SequencePair(tuple(range(len(ids))), tuple(range(len(ids))))
    sched = SaSchedule(cooling=0.90, moves_per_temp=60)
    sp, fp, _ = run_sa(sp, graph, cn, nl.outline, sched, seed + 777, pos, cfg)
    run_flipping_pass(fp, graph, guard=True)
    return total_hpwl(fp, graph)


def test_criterion_6_dataflow_direction_check():
    wins = 0
    with budget("criterion 6: dataflow-aware beats agnostic, 20 pairs", 120.0):
        for seed in range(20):
            aware = paired_run(seed, aware=True)
            agnostic = paired_run(seed, aware=False)
            if aware < agnostic:
                wins += 1
        print(f"  dataflow-aware won {wins}/20 paired runs")
        assert wins >= 15


def test_criterion_7_flipping_stage():
    from test_finetune import random_flip_scene
    with budget("criterion 7: guarded flipping, 100 seeded runs", 30.0):
        for seed in range(100):
            fp, g = random_flip_scene(seed + 2000)
            before = total_hpwl(fp, g)
            log = run_flipping_pass(fp, g, guard=True)
            after = total_hpwl(fp, g)
            assert after <= before + 1e-9
            for d in log:
                if not d.applied:
                    continue
                mp = fp.macro_placements[d.macro_id]
                pcx, pcy = mp.pin_center()
                ccx, ccy = mp.center()
                sgn = lambda v: (v > 0) - (v < 0)
                assert sgn(d.x_vt) * sgn(pcx - ccx) >= 0
                assert sgn(d.y_vt) * sgn(pcy - ccy) >= 0
        # double-flip identity, exact
        from dfplace.finetune import compose_orientation
        fp, _ = random_flip_scene(1)
        mp = next(iter(fp.macro_placements.values()))
        before = mp.pin_center()
        for mode in ("FS", "FN"):
            mp.orientation = compose_orientation(mp.orientation, mode)
            mp.orientation = compose_orientation(mp.orientation, mode)
            assert mp.pin_center() == before


def test_criterion_8_congestion_conservation_and_monotonicity():
    from test_metrics import random_scene
    with budget("criterion 8: congestion conservation x100 + monotone capacity", 60.0):
        for seed in range(100):
            fp, g = random_scene(seed)
            bin_size = max(fp.outline) / 6
            grid, _ = congestion(fp, g, bin_size, 1.0)
            want = congestion_deposit_brute(
                fp, g, grid.x_edges.tolist(), grid.y_edges.tolist()
            )
            total_want = sum(sum(row) for row in want)
            got = float(grid.demand.sum())
            assert got == pytest.approx(total_want, rel=1e-9)
        fp, g = random_scene(4242, n_cells=12, n_edges=30)
        grid, _ = congestion(fp, g, max(fp.outline) / 6, 1.0)
        prev = None
        for cap in np.linspace(1e-9, float(grid.demand.max()) * 1.2, 5):
            _, ov = congestion(fp, g, max(fp.outline) / 6, cap)
            if prev is not None:
                assert ov <= prev + 1e-12
            prev = ov


def test_criterion_9_pipeline_determinism(tmp_path):
    nl = generate_design(n_modules=6, cells_per_module=166, macros_per_module=1,
                         macro_bus_width=8, io_bus_width=12, internal_nets=150,
                         seed=900)
    assert len(nl.instances) >= 1000
    design = tmp_path / "design.json"
    design.write_text(serialize_netlist(nl))
    cfg = {
        "netlist": str(design),
        "seed": 5,
        "clustering": {"min_cells": 20, "max_cells": 90},
        "gp": {"iterations": 10},
        "sa": {"cooling": 0.90, "moves_per_temp": 60, "rounds": 2},
    }
    watched = ("run.placement.txt", "run.placement.json", "run.report.txt",
               "run.report.json", "run.svg", "run.graph.txt", "run.clusters.txt")
    with budget("criterion 9: byte-identical pipeline runs (1k instances)", 60.0):
        cfg["out_dir"] = str(tmp_path / "a")
        run_pipeline(PipelineConfig.from_dict(cfg))
        cfg["out_dir"] = str(tmp_path / "b")
        run_pipeline(PipelineConfig.from_dict(cfg))
        for name in watched:
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b, f"{name} differs"


def test_criterion_10_extraction_overhead(tmp_path):
    nl = generate_design(n_modules=20, cells_per_module=498, macros_per_module=2,
                         macro_bus_width=16, io_bus_width=16, cc_bus_width=8,
                         internal_nets=450, mm_bus_width=2, shared_driver_nets=2,
                         include_clock=True, seed=1000)
    assert len(nl.instances) >= 10_000
    design = tmp_path / "big.json"
    design.write_text(serialize_netlist(nl))
    cfg = PipelineConfig.from_dict({
        "netlist": str(design),
        "out_dir": str(tmp_path / "out"),
        "seed": 2,
        "clustering": {"min_cells": 50, "max_cells": 500},
        "gp": {"iterations": 6},
        "sa": {"cooling": 0.80, "moves_per_temp": 20, "rounds": 1},
    })
    with budget("criterion 10: 10k-instance run, extraction under 10s", 600.0):
        res = run_pipeline(cfg)
        extract_seconds = res.timing.seconds["extract"]
        share = res.timing.extraction_share
        print(f"  extraction {extract_seconds:.2f}s, share {share:.1%} of pipeline")
        assert extract_seconds < 10.0
        assert "extract" in res.timing.shares
        timings = json.loads((tmp_path / "out" / "run.timings.json").read_text())
        assert "extraction_share" in timings
