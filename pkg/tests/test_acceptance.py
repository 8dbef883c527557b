"""Acceptance gate: one test per release criterion, each printing a
pass/fail line (run with `pytest tests/test_acceptance.py -v -s`)."""

import functools
import json
import time
from collections import defaultdict

import numpy as np

from red_sim.bench import Lcg64, builtin_benchmarks, run_suite, scale_channels
from red_sim.cli import main
from red_sim.costmodel import CostParams, cost_breakdown
from red_sim.dataflow import (
    InputKind,
    build_schedule,
    partition_modes,
    schedule_padding_free,
    schedule_zero_padding,
    schedule_zero_skipping,
    trace_of_schedule,
)
from red_sim.mapping import DesignKind, build_plan
from red_sim.tensor import (
    DeconvLayerSpec,
    Kernel4,
    Tensor3,
    deconv_oracle_zero_padding,
    output_shape,
    zero_redundancy_ratio,
)


def criterion(num, name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {num} [{name}]: FAIL")
                raise
            print(f"ACCEPTANCE {num} [{name}]: PASS")
        return wrapper
    return deco


@criterion(1, "oracle equivalence, 6 layers x 4 designs x 20 seeded inputs")
def test_criterion_1_oracle_equivalence():
    entries = builtin_benchmarks()
    t0 = time.perf_counter()
    # channel_scale 1/64 keeps all channel/filter counts at or below 8;
    # run_suite raises on any element mismatch against the oracle
    reports = run_suite(entries, channel_scale=1 / 64, trials=20, seed=42)
    elapsed = time.perf_counter() - t0
    assert len(reports) == 6
    for entry in entries:
        scaled = scale_channels(entry.spec, 1 / 64)
        assert scaled.channels <= 8 and scaled.filters <= 8
    # independent spot check outside run_suite for one layer and design
    spec = scale_channels(entries[2].spec, 1 / 64)
    rng = Lcg64(123)
    k = Kernel4(rng.ints((spec.kh, spec.kw, spec.channels, spec.filters)))
    t = Tensor3(rng.ints((spec.input_h, spec.input_w, spec.channels)))
    from red_sim.dataflow import execute
    got, _ = execute(build_plan(k, "red_folded", spec),
                     build_schedule(spec, "red_folded"), t)
    assert np.array_equal(got.data, deconv_oracle_zero_padding(t, k, spec).data)
    assert elapsed < 60.0, f"equivalence sweep took {elapsed:.1f}s (budget 60s)"


@criterion(2, "cycle-count formulas exact")
def test_criterion_2_cycle_counts():
    for entry in builtin_benchmarks():
        spec = entry.spec
        oh, ow, _ = output_shape(spec)
        s = spec.stride
        tiles = (-(-oh // s)) * (-(-ow // s))
        assert schedule_zero_padding(spec).cycle_count == oh * ow
        assert schedule_padding_free(spec).cycle_count == spec.input_h * spec.input_w
        assert schedule_zero_skipping(spec).cycle_count == tiles
        assert schedule_zero_skipping(spec, folded=True).cycle_count == 2 * tiles
    by_name = {e.name: e.spec for e in builtin_benchmarks()}
    gan1 = by_name["GAN_Deconv1"]
    assert schedule_zero_padding(gan1).cycle_count == 256
    assert schedule_padding_free(gan1).cycle_count == 64
    assert schedule_zero_skipping(gan1).cycle_count == 64
    fcn2 = by_name["FCN_Deconv2"]
    assert schedule_zero_padding(fcn2).cycle_count == 322624
    assert schedule_padding_free(fcn2).cycle_count == 4900
    assert schedule_zero_skipping(fcn2).cycle_count == 5041
    assert schedule_zero_skipping(fcn2, folded=True).cycle_count == 10082


@criterion(3, "mode decomposition sizes")
def test_criterion_3_mode_decomposition():
    part = partition_modes(DeconvLayerSpec(4, 4, 1, 3, 3, 1, 2))
    assert sorted(part.sizes.values()) == [1, 2, 2, 4]
    assert set(part.modes[(0, 0)]) == {(0, 0), (0, 2), (2, 0), (2, 2)}
    part16 = partition_modes(DeconvLayerSpec(70, 70, 1, 16, 16, 1, 8))
    assert len(part16.modes) == 64
    assert set(part16.sizes.values()) == {4}
    assert sum(part16.sizes.values()) == 256  # all 256 sub-crossbars covered


@criterion(4, "first-cycle input-sharing pattern 1/2/2/4")
def test_criterion_4_first_cycle_pattern():
    # K=3, s=2 toy layer cropped 2 on top/left: the padded image starts on an
    # original pixel, so cycle 1 is the interior sharing pattern.  Coordinates
    # are (row, col) into the input feature map; sub-crossbar n = i*kw + j.
    toy = DeconvLayerSpec(4, 4, 2, 3, 3, 2, 2, 2, 0, 2, 0)
    sched = schedule_zero_skipping(toy)
    first = sched.cycle == 0
    assert int(first.sum()) == 9
    assert (sched.kind[first] == InputKind.PIXEL).all()
    shared = defaultdict(set)
    for xb, a, b in zip(sched.crossbar[first], sched.src_a[first], sched.src_b[first]):
        shared[(int(a), int(b))].add(int(xb))
    assert len(shared) == 4
    assert sorted(len(v) for v in shared.values()) == [1, 2, 2, 4]
    assert shared[(0, 0)] == {0}
    assert shared[(0, 1)] == {1, 2}
    assert shared[(1, 0)] == {3, 6}
    assert shared[(1, 1)] == {4, 5, 7, 8}


@criterion(5, "zero-redundancy trends")
def test_criterion_5_redundancy():
    # the published 86.8% at stride 2 has no reproducible configuration and
    # is deliberately not asserted; the trend and asymptote checks stand in
    ratios = [
        zero_redundancy_ratio(DeconvLayerSpec(16, 16, 1, 2 * s, 2 * s, 1, s))
        for s in (2, 4, 8, 16, 32)
    ]
    assert all(a < b for a, b in zip(ratios, ratios[1:])), ratios
    assert ratios[-1] >= 0.995
    assert zero_redundancy_ratio(DeconvLayerSpec(2, 2, 1, 2, 2, 1, 2)) == 0.75


@criterion(6, "cost-model structure and qualitative orderings")
def test_criterion_6_cost_model():
    params = CostParams()
    per_layer = {}
    for entry in builtin_benchmarks():
        breakdowns = {}
        kernel = Kernel4(np.zeros(
            (entry.spec.kh, entry.spec.kw, entry.spec.channels, entry.spec.filters),
            dtype=np.int64))
        for design in DesignKind:
            plan = build_plan(kernel, design, entry.spec)
            trace = trace_of_schedule(build_schedule(entry.spec, design), plan)
            breakdowns[design] = cost_breakdown(trace, plan, params,
                                                layer=entry.name, spec=entry.spec)
        per_layer[entry.name] = breakdowns

    for name, bds in per_layer.items():
        for b in bds.values():
            # additivity to machine exactness, both equations
            lat, en = b.latency, b.energy
            assert lat.total == (lat.wd + lat.bd) + (lat.dec + lat.mux + lat.rc + lat.sa)
            assert en.total == (en.c + en.wd + en.bd) + (en.dec + en.mux + en.rc + en.sa)
        # identical array area across the three layouts (the folded variant
        # matches too whenever kh*kw is even and needs no zero half-sub)
        areas = {d: bds[d].area.array for d in bds}
        assert areas[DesignKind.ZERO_PADDING] == areas[DesignKind.PADDING_FREE]
        assert areas[DesignKind.ZERO_PADDING] == areas[DesignKind.RED]
        spec = bds[DesignKind.RED].spec
        if (spec.kh * spec.kw) % 2 == 0:
            assert areas[DesignKind.RED_FOLDED] == areas[DesignKind.RED]
        # qualitative orderings under the NON-CALIBRATED defaults
        assert bds[DesignKind.RED].latency.total < bds[DesignKind.ZERO_PADDING].latency.total, name
        pf_array = bds[DesignKind.PADDING_FREE].energy.array_part
        assert pf_array > bds[DesignKind.ZERO_PADDING].energy.array_part, name
        assert pf_array > bds[DesignKind.RED].energy.array_part, name
        assert bds[DesignKind.RED].area.total > bds[DesignKind.ZERO_PADDING].area.total, name

    # reports carry the published reference values next to computed ones
    reports = run_suite(builtin_benchmarks()[:1], channel_scale=1 / 128, trials=1)
    ref = reports[0].reference
    assert ref["speedup_vs_zero_padding"] == [3.69, 31.15]
    assert ref["energy_saving_pct_vs_zero_padding"] == [8.0, 88.36]
    assert ref["red_area_overhead_pct_vs_zero_padding"] == 21.41
    from red_sim.costmodel import summary_csv_rows
    header = summary_csv_rows(reports)[0]
    assert "reference_speedup_range" in header
    assert "speedup_vs_zero_padding" in header


@criterion(7, "byte-identical reports for identical config and seed")
def test_criterion_7_determinism(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "layers": [
            {"name": "toy3x2", "input": [4, 4, 2], "kernel": [3, 3, 2, 2],
             "stride": 2, "crop": [2, 0, 2, 0]},
            {"name": "small_gan", "input": [4, 4, 6], "kernel": [4, 4, 6, 5],
             "stride": 2, "crop": [1, 1, 1, 1]},
        ],
        "seed": 2024,
    }), encoding="utf-8")
    blobs = []
    for sub in ("run1", "run2"):
        out = tmp_path / sub
        assert main(["run", "--config", str(config), "--out", str(out)]) == 0
        assert main(["run", "--config", str(config), "--out", str(out),
                     "--format", "json"]) == 0
        blobs.append(tuple(
            (out / f).read_bytes()
            for f in ("breakdown.csv", "summary.csv", "report.json")
        ))
    assert blobs[0] == blobs[1]
