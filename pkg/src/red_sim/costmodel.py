"""Latency / energy / area aggregation and design comparison.

Costs aggregate an execution trace and a mapping plan into per-component
breakdowns:

    L_total = (L_wd + L_bd)_array + (L_dec + L_mux + L_rc + L_sa)_periphery
    E_total = (E_c + E_wd + E_bd)_array + (E_dec + E_mux + E_rc + E_sa)_periphery

Per-cycle latency is the critical path (max) across the crossbars active in
that cycle, since sub-crossbars operate simultaneously; a sum-based mode is
available for sensitivity checks.  Component scaling with array dimensions:

    wd ~ columns (each wordline loads every column)     bd ~ rows
    dec ~ log2(rows)      mux ~ log2(cols)      rc ~ columns
    sa ~ log2(cols) per activation, plus accumulation adds

Driver energy follows a base-linear-plus-quadratic law in the column count;
decoder energy follows the driven input width.  Padding-free's overlap-add
and crop post passes are charged to the read-circuit and shift-adder
components per value processed.

The shipped default coefficients are order-of-magnitude placeholders,
deliberately labeled NON-CALIBRATED: absolute outputs are only meaningful
for cross-design trend comparison.  Reports carry the published reference
comparison ranges next to the computed values so the trends can be eyeballed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, asdict

from .dataflow import ExecutionTrace
from .mapping import DesignKind, MappingPlan
from .tensor import DeconvLayerSpec

__all__ = [
    "CostParams",
    "DEFAULT_PARAMS_LABEL",
    "LatencyBreakdown",
    "EnergyBreakdown",
    "AreaBreakdown",
    "CostBreakdown",
    "DesignComparison",
    "ComparisonReport",
    "REFERENCE_COMPARISONS",
    "latency_of",
    "energy_of",
    "area_of",
    "cost_breakdown",
    "compare",
    "breakdown_csv_rows",
    "summary_csv_rows",
    "report_to_dict",
]


DEFAULT_PARAMS_LABEL = "NON-CALIBRATED defaults"

# Published reference results for this three-design comparison, shown in
# reports next to the computed trend values.  The shipped coefficients are
# not calibrated to reproduce them.
REFERENCE_COMPARISONS = {
    "speedup_vs_zero_padding": [3.69, 31.15],
    "energy_saving_pct_vs_zero_padding": [8.0, 88.36],
    "red_area_overhead_pct_vs_zero_padding": 21.41,
    "note": "published reference ranges; computed values use NON-CALIBRATED coefficients",
}


@dataclass(frozen=True)
class CostParams:
    """Per-activation cost coefficients.

    Latencies are seconds, energies joules, areas square micrometers.  The
    defaults are order-of-magnitude placeholders (NON-CALIBRATED): use them
    for cross-design trends, not absolute predictions.  `bit_serial_cycles`
    models input bit streaming as a uniform multiplier on cycle-derived
    latency and energy.
    """

    clock_hz: float = 2e9
    # latency
    t_wd: float = 2e-12   # per column
    t_bd: float = 1e-13   # per row
    t_dec: float = 2e-11  # per log2(rows)
    t_mux: float = 1e-11  # per log2(cols)
    t_rc: float = 1e-12   # per column / per value
    t_sa: float = 5e-12   # per log2(cols) / per value
    # energy; the decoder term carries most of the input-side cost, which is
    # what the split pixel-wise layout economizes on
    e_cell: float = 2e-16      # per active cell
    e_wd_base: float = 5e-15   # per column
    e_wd_quadratic: float = 5e-16  # per column^2
    e_bd_base: float = 5e-15
    e_bd_quadratic: float = 5e-16
    e_dec: float = 5e-14  # per driven wordline value
    e_mux: float = 1e-15  # per value read
    e_rc: float = 1e-14   # per value read / processed
    e_sa: float = 5e-15   # per value read, add, or post-op value
    # area (um^2 per cell / per port)
    a_cell: float = 0.1
    a_wd: float = 1.0
    a_bd: float = 0.8
    a_dec: float = 0.5
    a_mux: float = 0.6
    a_rc: float = 10.0
    a_sa: float = 5.0
    bit_serial_cycles: int = 1

    def __post_init__(self):
        if self.clock_hz <= 0:
            raise ValueError("clock_hz must be > 0")
        if self.bit_serial_cycles < 1:
            raise ValueError("bit_serial_cycles must be >= 1")
        for f in fields(self):
            if f.name in ("clock_hz", "bit_serial_cycles"):
                continue
            if getattr(self, f.name) < 0:
                raise ValueError(f"coefficient {f.name} must be >= 0")

    @classmethod
    def from_dict(cls, overrides: dict) -> "CostParams":
        known = {f.name for f in fields(cls)}
        for key in overrides:
            if key not in known:
                raise ValueError(f"unknown cost parameter: '{key}'")
        return cls(**overrides)

    def to_dict(self) -> dict:
        return asdict(self)


def _lg(x: int) -> int:
    """Logic-depth proxy: max(1, ceil(log2(x)))."""
    return max(1, math.ceil(math.log2(x))) if x > 1 else 1


_LAT_KEYS = ("wd", "bd", "dec", "mux", "rc", "sa")
_EN_KEYS = ("c", "wd", "bd", "dec", "mux", "rc", "sa")
_AREA_KEYS = ("array", "wd", "bd", "dec", "mux", "rc", "sa")


@dataclass(frozen=True)
class LatencyBreakdown:
    wd: float
    bd: float
    dec: float
    mux: float
    rc: float
    sa: float

    @property
    def array_part(self) -> float:
        return self.wd + self.bd

    @property
    def periphery_part(self) -> float:
        return self.dec + self.mux + self.rc + self.sa

    @property
    def total(self) -> float:
        return self.array_part + self.periphery_part

    def components(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in _LAT_KEYS}


@dataclass(frozen=True)
class EnergyBreakdown:
    c: float
    wd: float
    bd: float
    dec: float
    mux: float
    rc: float
    sa: float

    @property
    def array_part(self) -> float:
        return self.c + self.wd + self.bd

    @property
    def periphery_part(self) -> float:
        return self.dec + self.mux + self.rc + self.sa

    @property
    def total(self) -> float:
        return self.array_part + self.periphery_part

    def components(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in _EN_KEYS}


@dataclass(frozen=True)
class AreaBreakdown:
    array: float
    wd: float
    bd: float
    dec: float
    mux: float
    rc: float
    sa: float

    @property
    def array_part(self) -> float:
        return self.array

    @property
    def periphery_part(self) -> float:
        return self.wd + self.bd + self.dec + self.mux + self.rc + self.sa

    @property
    def total(self) -> float:
        return self.array_part + self.periphery_part

    def components(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in _AREA_KEYS}


@dataclass(frozen=True)
class CostBreakdown:
    design: DesignKind
    layer: str
    spec: DeconvLayerSpec
    cycle_count: int
    latency: LatencyBreakdown
    energy: EnergyBreakdown
    area: AreaBreakdown
    notes: str = "ideal signed cells; negative weights stored directly"


def _per_activation_latency(rows: int, cols: int, p: CostParams) -> dict[str, float]:
    return {
        "wd": p.t_wd * cols,
        "bd": p.t_bd * rows,
        "dec": p.t_dec * _lg(rows),
        "mux": p.t_mux * _lg(cols),
        "rc": p.t_rc * cols,
        "sa": p.t_sa * _lg(cols),
    }


def latency_of(
    trace: ExecutionTrace,
    plan: MappingPlan,
    params: CostParams,
    critical_path_mode: str = "max",
) -> LatencyBreakdown:
    """Total latency per the two-part breakdown.

    In "max" mode each active cycle costs the critical path over the active
    crossbars (one VMM each, simultaneous); in "sum" mode crossbar
    activations serialize, an upper-bound sensitivity view.
    """
    if critical_path_mode not in ("max", "sum"):
        raise ValueError(f"critical_path_mode must be 'max' or 'sum', got {critical_path_mode!r}")

    comp = {k: 0.0 for k in _LAT_KEYS}
    if critical_path_mode == "max":
        # every design here activates identically shaped arrays in a cycle,
        # so the per-cycle critical path is the costliest array in the plan
        best, best_total = None, -1.0
        for n in range(len(plan.crossbars)):
            row_sizes, col_sizes = plan.tile_grids[n]
            cand = _per_activation_latency(max(row_sizes), max(col_sizes), params)
            total = sum(cand.values())
            if total > best_total:
                best, best_total = cand, total
        if best is not None:
            for k in _LAT_KEYS:
                comp[k] = best[k] * trace.active_cycle_count
    else:
        acts = trace.vmm_activations_per_crossbar
        for n in range(len(plan.crossbars)):
            row_sizes, col_sizes = plan.tile_grids[n]
            tiles = len(row_sizes) * len(col_sizes)
            if tiles == 0 or acts[n] == 0:
                continue
            logical = int(acts[n]) // tiles
            cand = _per_activation_latency(max(row_sizes), max(col_sizes), params)
            for k in _LAT_KEYS:
                comp[k] += cand[k] * logical

    post = trace.post_ops.total_values
    comp["rc"] += params.t_rc * post
    comp["sa"] += params.t_sa * post

    bs = params.bit_serial_cycles
    return LatencyBreakdown(**{k: v * bs for k, v in comp.items()})


def energy_of(trace: ExecutionTrace, plan: MappingPlan, params: CostParams) -> EnergyBreakdown:
    """Total energy per the two-part breakdown; zero-vector assignments
    contribute nothing."""
    wd = bd = 0.0
    acts = trace.vmm_activations_per_crossbar
    for n in range(len(plan.crossbars)):
        row_sizes, col_sizes = plan.tile_grids[n]
        tiles = len(row_sizes) * len(col_sizes)
        if tiles == 0 or acts[n] == 0:
            continue
        logical = int(acts[n]) // tiles
        per_act = len(row_sizes) * sum(
            params.e_wd_base * cs + params.e_wd_quadratic * cs * cs for cs in col_sizes
        )
        wd += logical * per_act
        per_act_bd = len(row_sizes) * sum(
            params.e_bd_base * cs + params.e_bd_quadratic * cs * cs for cs in col_sizes
        )
        bd += logical * per_act_bd

    post = trace.post_ops.total_values
    bs = params.bit_serial_cycles
    return EnergyBreakdown(
        c=params.e_cell * trace.cell_activations * bs,
        wd=wd * bs,
        bd=bd * bs,
        dec=params.e_dec * trace.input_bits_driven * bs,
        mux=params.e_mux * trace.output_values_read * bs,
        rc=params.e_rc * (trace.output_values_read + post) * bs,
        sa=params.e_sa * (trace.output_values_read + trace.adds_performed + post) * bs,
    )


def area_of(plan: MappingPlan, params: CostParams) -> AreaBreakdown:
    """Array area from physical cells (design-invariant for a fixed kernel),
    periphery area from the plan's instance inventory port counts."""
    inv = plan.periphery_inventory
    return AreaBreakdown(
        array=params.a_cell * plan.cell_count,
        wd=params.a_wd * inv["wd"].ports,
        bd=params.a_bd * inv["bd"].ports,
        dec=params.a_dec * inv["dec"].ports,
        mux=params.a_mux * inv["mux"].ports,
        rc=params.a_rc * inv["rc"].ports,
        sa=params.a_sa * inv["sa"].ports,
    )


def cost_breakdown(
    trace: ExecutionTrace,
    plan: MappingPlan,
    params: CostParams,
    layer: str = "",
    spec: DeconvLayerSpec | None = None,
    critical_path_mode: str = "max",
) -> CostBreakdown:
    return CostBreakdown(
        design=plan.design,
        layer=layer,
        spec=spec,
        cycle_count=trace.cycle_count,
        latency=latency_of(trace, plan, params, critical_path_mode),
        energy=energy_of(trace, plan, params),
        area=area_of(plan, params),
    )


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else num / den


@dataclass(frozen=True)
class DesignComparison:
    design: DesignKind
    breakdown: CostBreakdown
    cycle_count: int
    normalized_latency: float | None
    normalized_energy: float | None
    normalized_area: float | None
    speedup_vs_baseline: float | None
    energy_saving_pct: float | None
    area_overhead_pct: float | None


@dataclass
class ComparisonReport:
    layer: str
    spec: DeconvLayerSpec | None
    baseline: DesignKind | None
    entries: dict[str, DesignComparison]
    params_label: str = DEFAULT_PARAMS_LABEL
    critical_path_mode: str = "max"
    reference: dict = field(default_factory=lambda: dict(REFERENCE_COMPARISONS))


def compare(
    breakdowns: dict[DesignKind, CostBreakdown] | list[CostBreakdown],
    baseline: DesignKind | None = DesignKind.ZERO_PADDING,
    params_label: str = DEFAULT_PARAMS_LABEL,
    critical_path_mode: str = "max",
) -> ComparisonReport:
    """Normalize per-design breakdowns against the baseline design's totals.

    Ratios against a zero total are reported as None (serialized as null or
    an empty CSV cell, never as infinities).
    """
    if not isinstance(breakdowns, dict):
        breakdowns = {b.design: b for b in breakdowns}
    if not breakdowns:
        raise ValueError("no breakdowns to compare")
    layers = {b.layer for b in breakdowns.values()}
    specs = {b.spec for b in breakdowns.values()}
    if len(layers) > 1 or len(specs) > 1:
        raise ValueError(f"breakdowns span multiple layers: {sorted(layers)}")

    base = breakdowns.get(baseline) if baseline is not None else None
    entries = {}
    for design, b in breakdowns.items():
        if base is None:
            norm_l = norm_e = norm_a = speed = save = over = None
        else:
            norm_l = _ratio(b.latency.total, base.latency.total)
            norm_e = _ratio(b.energy.total, base.energy.total)
            norm_a = _ratio(b.area.total, base.area.total)
            speed = _ratio(base.latency.total, b.latency.total)
            save = None if norm_e is None else (1.0 - norm_e) * 100.0
            over = None if norm_a is None else (norm_a - 1.0) * 100.0
        entries[design.value] = DesignComparison(
            design=design,
            breakdown=b,
            cycle_count=b.cycle_count,
            normalized_latency=norm_l,
            normalized_energy=norm_e,
            normalized_area=norm_a,
            speedup_vs_baseline=speed,
            energy_saving_pct=save,
            area_overhead_pct=over,
        )
    any_b = next(iter(breakdowns.values()))
    return ComparisonReport(
        layer=any_b.layer,
        spec=any_b.spec,
        baseline=baseline if base is not None else None,
        entries=entries,
        params_label=params_label,
        critical_path_mode=critical_path_mode,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt(value: float | None) -> str:
    return "" if value is None else str(value)


def breakdown_csv_rows(reports: list[ComparisonReport]) -> list[list[str]]:
    """Rows: design, layer, metric, component, value, normalized.

    `normalized` divides by the baseline design's total for that metric, so
    the baseline's own total rows normalize to exactly 1.0.
    """
    rows = [["design", "layer", "metric", "component", "value", "normalized"]]
    for report in reports:
        base = report.entries.get(report.baseline.value) if report.baseline else None
        base_totals = (
            {
                "latency": base.breakdown.latency.total,
                "energy": base.breakdown.energy.total,
                "area": base.breakdown.area.total,
            }
            if base
            else {}
        )
        for name, entry in report.entries.items():
            b = entry.breakdown
            for metric, part in (("latency", b.latency), ("energy", b.energy), ("area", b.area)):
                items = list(part.components().items()) + [("total", part.total)]
                for component, value in items:
                    denom = base_totals.get(metric)
                    norm = None if not denom else value / denom
                    rows.append([name, report.layer, metric, component, str(value), _fmt(norm)])
    return rows


def summary_csv_rows(reports: list[ComparisonReport]) -> list[list[str]]:
    """One row per (layer, design) with totals, baseline-normalized figures
    and the published reference ranges alongside."""
    ref = REFERENCE_COMPARISONS
    ref_speed = f"{ref['speedup_vs_zero_padding'][0]}-{ref['speedup_vs_zero_padding'][1]}"
    ref_save = (
        f"{ref['energy_saving_pct_vs_zero_padding'][0]}-"
        f"{ref['energy_saving_pct_vs_zero_padding'][1]}"
    )
    ref_area = str(ref["red_area_overhead_pct_vs_zero_padding"])
    rows = [[
        "layer", "design", "cycles", "latency_total_s", "energy_total_j",
        "area_total_um2", "speedup_vs_zero_padding", "reference_speedup_range",
        "energy_saving_pct", "reference_energy_saving_pct_range",
        "area_overhead_pct", "reference_red_area_overhead_pct", "params",
    ]]
    for report in reports:
        for name, entry in report.entries.items():
            b = entry.breakdown
            rows.append([
                report.layer, name, str(entry.cycle_count),
                str(b.latency.total), str(b.energy.total), str(b.area.total),
                _fmt(entry.speedup_vs_baseline), ref_speed,
                _fmt(entry.energy_saving_pct), ref_save,
                _fmt(entry.area_overhead_pct), ref_area,
                report.params_label,
            ])
    return rows


def report_to_dict(report: ComparisonReport) -> dict:
    """Plain-dict form for JSON serialization (stable under sort_keys)."""
    out = {
        "layer": report.layer,
        "baseline": report.baseline.value if report.baseline else None,
        "params_label": report.params_label,
        "critical_path_mode": report.critical_path_mode,
        "reference": report.reference,
        "designs": {},
    }
    for name, entry in report.entries.items():
        b = entry.breakdown
        out["designs"][name] = {
            "cycle_count": entry.cycle_count,
            "latency": {**b.latency.components(), "array_part": b.latency.array_part,
                        "periphery_part": b.latency.periphery_part, "total": b.latency.total},
            "energy": {**b.energy.components(), "array_part": b.energy.array_part,
                       "periphery_part": b.energy.periphery_part, "total": b.energy.total},
            "area": {**b.area.components(), "array_part": b.area.array_part,
                     "periphery_part": b.area.periphery_part, "total": b.area.total},
            "normalized": {
                "latency": entry.normalized_latency,
                "energy": entry.normalized_energy,
                "area": entry.normalized_area,
            },
            "speedup_vs_baseline": entry.speedup_vs_baseline,
            "energy_saving_pct": entry.energy_saving_pct,
            "area_overhead_pct": entry.area_overhead_pct,
            "notes": b.notes,
        }
    return out
