"""Per-cycle schedules and execution for the three crossbar designs.

Schedules are stored columnar (one numpy row per input assignment) so that
large layers stay cheap to generate, execute and dump:

* zero-padding: output_h*output_w cycles, each feeding the single tall
  crossbar one gathered kh*kw*C window of the padded image;
* padding-free: input_h*input_w cycles, each feeding the wide crossbar one
  C-vector input pixel, followed by an overlap-add and crop post pass;
* zero-skipping (pixel-wise layout): ceil(output_h/s)*ceil(output_w/s)
  cycles, each producing an s x s output tile.  Every output pixel in the
  tile belongs to one residue class (computation mode), and each kernel
  position of that mode contributes through its own sub-crossbar, fed the
  single original input pixel whose dilated coordinate lines up.  Input
  coordinates that fall off the input feature map become explicit
  zero-vector assignments: they keep the accumulation-group structure
  uniform but are skipped in activation counts.

Folding doubles the cycle count: even phases drive rows 0..C-1 of each
folded sub with the even original sub's input, odd phases drive rows
C..2C-1 with the odd original sub's input.

Output pixels are produced once each; the members of an output pixel's
accumulation group are exactly the sub-crossbars of its computation mode.
Cycles advance row-major over output tiles, so traces are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mapping import DesignKind, MappingPlan
from .tensor import DeconvLayerSpec, Tensor3, dilate_and_pad, output_shape

__all__ = [
    "InputKind",
    "ModePartition",
    "CycleSchedule",
    "PostOpCounts",
    "ExecutionTrace",
    "partition_modes",
    "schedule_zero_padding",
    "schedule_padding_free",
    "schedule_zero_skipping",
    "build_schedule",
    "validate_schedule",
    "trace_of_schedule",
    "execute",
    "dump_schedule_lines",
]


class InputKind:
    """Codes for the `kind` column of a schedule."""

    WINDOW = 0  # gathered kh*kw*C window of the padded image at (a, b)
    PIXEL = 1   # the C-vector of input pixel (a, b)
    ZERO = 2    # all-zero drive; skipped in activation counts


class Half:
    """Which wordline half a folded-phase assignment drives."""

    FULL = 0
    LOW = 1   # rows 0..C-1
    HIGH = 2  # rows C..2C-1


# ---------------------------------------------------------------------------
# Computation modes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModePartition:
    """The stride^2 residue classes of kernel positions.

    Mode (r_y, r_x) holds the kernel positions (i, j) with i = r_y (mod s)
    and j = r_x (mod s).  The modes are disjoint and cover the whole kernel;
    an output pixel is served by exactly one mode.
    """

    stride: int
    kh: int
    kw: int
    modes: dict[tuple[int, int], tuple[tuple[int, int], ...]]

    @property
    def sizes(self) -> dict[tuple[int, int], int]:
        return {key: len(val) for key, val in self.modes.items()}


def partition_modes(spec: DeconvLayerSpec) -> ModePartition:
    """Split the kernel positions into the stride^2 computation modes."""
    s, kh, kw = spec.stride, spec.kh, spec.kw
    modes = {}
    for ry in range(s):
        for rx in range(s):
            modes[(ry, rx)] = tuple(
                (i, j) for i in range(ry, kh, s) for j in range(rx, kw, s)
            )
    return ModePartition(stride=s, kh=kh, kw=kw, modes=modes)


# ---------------------------------------------------------------------------
# Schedules
# ---------------------------------------------------------------------------


@dataclass
class CycleSchedule:
    """Columnar per-cycle input assignments plus the accumulation groups.

    Assignment columns are parallel arrays sorted by (cycle, crossbar); each
    crossbar appears at most once per cycle.  `group_id` indexes the group
    table; every output pixel owns exactly one group (padding-free uses -1:
    its outputs accumulate through the overlap-add post pass instead).
    A group's members are the assignments carrying its id; for folded
    schedules they span the two phase cycles of one tile and the group is
    recorded on the completing (odd) phase.
    """

    design: DesignKind
    layer: DeconvLayerSpec
    cycle_count: int
    cycle: np.ndarray
    crossbar: np.ndarray
    kind: np.ndarray
    src_a: np.ndarray
    src_b: np.ndarray
    half: np.ndarray
    group_id: np.ndarray
    group_cycle: np.ndarray
    group_y: np.ndarray
    group_x: np.ndarray
    has_post_ops: bool = False

    @property
    def assignment_count(self) -> int:
        return len(self.cycle)

    @property
    def group_count(self) -> int:
        return len(self.group_cycle)


def _sorted_columns(cycle, crossbar, kind, a, b, half, group):
    order = np.lexsort((crossbar, cycle))
    return tuple(col[order] for col in (cycle, crossbar, kind, a, b, half, group))


def schedule_zero_padding(spec: DeconvLayerSpec) -> CycleSchedule:
    """One gathered window per cycle, row-major over output pixels."""
    oh, ow, _ = output_shape(spec)
    n = oh * ow
    t = np.arange(n, dtype=np.int64)
    y = (t // ow).astype(np.int32)
    x = (t % ow).astype(np.int32)
    return CycleSchedule(
        design=DesignKind.ZERO_PADDING,
        layer=spec,
        cycle_count=n,
        cycle=t,
        crossbar=np.zeros(n, dtype=np.int32),
        kind=np.full(n, InputKind.WINDOW, dtype=np.int8),
        src_a=y,
        src_b=x,
        half=np.zeros(n, dtype=np.int8),
        group_id=t.copy(),
        group_cycle=t.copy(),
        group_y=y.copy(),
        group_x=x.copy(),
    )


def schedule_padding_free(spec: DeconvLayerSpec) -> CycleSchedule:
    """One input pixel per cycle; overlap-add and crop run as post ops."""
    n = spec.input_h * spec.input_w
    t = np.arange(n, dtype=np.int64)
    return CycleSchedule(
        design=DesignKind.PADDING_FREE,
        layer=spec,
        cycle_count=n,
        cycle=t,
        crossbar=np.zeros(n, dtype=np.int32),
        kind=np.full(n, InputKind.PIXEL, dtype=np.int8),
        src_a=(t // spec.input_w).astype(np.int32),
        src_b=(t % spec.input_w).astype(np.int32),
        half=np.zeros(n, dtype=np.int8),
        group_id=np.full(n, -1, dtype=np.int64),
        group_cycle=np.empty(0, dtype=np.int64),
        group_y=np.empty(0, dtype=np.int32),
        group_x=np.empty(0, dtype=np.int32),
        has_post_ops=True,
    )


def _axis_contributions(n_out: int, k: int, stride: int, pad_lead: int, n_in: int):
    """All (out_coord, kernel_coord, in_coord) triples along one axis.

    Output coordinate y takes kernel coordinates i with y + i = pad_lead
    (mod stride); the matching input coordinate is (y + i - pad_lead) /
    stride, which may fall outside [0, n_in) at the borders.
    """
    ys, ks, ins = [], [], []
    out = np.arange(n_out, dtype=np.int64)
    for i in range(k):
        sel = out[(out + i - pad_lead) % stride == 0]
        ys.append(sel)
        ks.append(np.full(len(sel), i, dtype=np.int64))
        ins.append((sel + i - pad_lead) // stride)
    return np.concatenate(ys), np.concatenate(ks), np.concatenate(ins)


def schedule_zero_skipping(spec: DeconvLayerSpec, folded: bool = False) -> CycleSchedule:
    """RED's schedule: one s x s output tile per cycle, zeros skipped.

    Unfolded cycle count is ceil(output_h/s) * ceil(output_w/s); folding
    doubles it by splitting each cycle into a low-half and a high-half
    phase per the stacked sub-crossbar layout.
    """
    s = spec.stride
    oh, ow, _ = output_shape(spec)
    n_tx = -(-ow // s)
    n_ty = -(-oh // s)

    ry, ri, ra = _axis_contributions(oh, spec.kh, s, spec.pad_top, spec.input_h)
    cx, cj, cb = _axis_contributions(ow, spec.kw, s, spec.pad_left, spec.input_w)

    nr, nc = len(ry), len(cx)
    y = np.repeat(ry, nc)
    i = np.repeat(ri, nc)
    a = np.repeat(ra, nc)
    x = np.tile(cx, nr)
    j = np.tile(cj, nr)
    b = np.tile(cb, nr)

    cycle = (y // s) * n_tx + (x // s)
    crossbar = (i * spec.kw + j).astype(np.int32)
    in_range = (a >= 0) & (a < spec.input_h) & (b >= 0) & (b < spec.input_w)
    kind = np.where(in_range, InputKind.PIXEL, InputKind.ZERO).astype(np.int8)
    group = y * ow + x
    half = np.zeros(len(cycle), dtype=np.int8)

    if folded:
        phase = (crossbar % 2).astype(np.int64)
        cycle = 2 * cycle + phase
        half = np.where(phase == 0, Half.LOW, Half.HIGH).astype(np.int8)
        crossbar = (crossbar // 2).astype(np.int32)

    cycle, crossbar, kind, a32, b32, half, group = _sorted_columns(
        cycle, crossbar, kind, a.astype(np.int32), b.astype(np.int32), half, group
    )

    # group table covers every output pixel; a group completes in its tile's
    # (last phase) cycle
    gy, gx = np.divmod(np.arange(oh * ow, dtype=np.int64), ow)
    gcycle = (gy // s) * n_tx + (gx // s)
    if folded:
        gcycle = 2 * gcycle + 1

    n_cycles = n_ty * n_tx * (2 if folded else 1)
    return CycleSchedule(
        design=DesignKind.RED_FOLDED if folded else DesignKind.RED,
        layer=spec,
        cycle_count=n_cycles,
        cycle=cycle,
        crossbar=crossbar,
        kind=kind,
        src_a=a32,
        src_b=b32,
        half=half,
        group_id=group,
        group_cycle=gcycle,
        group_y=gy.astype(np.int32),
        group_x=gx.astype(np.int32),
    )


def build_schedule(spec: DeconvLayerSpec, design: DesignKind | str) -> CycleSchedule:
    design = DesignKind(design)
    if design is DesignKind.ZERO_PADDING:
        return schedule_zero_padding(spec)
    if design is DesignKind.PADDING_FREE:
        return schedule_padding_free(spec)
    return schedule_zero_skipping(spec, folded=design is DesignKind.RED_FOLDED)


def validate_schedule(schedule: CycleSchedule):
    """Schema checks: one VMM per crossbar per cycle, sane cycle indices,
    one accumulation group per output pixel."""
    if len(schedule.cycle):
        if schedule.cycle.min() < 0 or schedule.cycle.max() >= schedule.cycle_count:
            raise ValueError("assignment cycle index out of range")
        pair = schedule.cycle * (schedule.crossbar.max() + 1) + schedule.crossbar
        if len(np.unique(pair)) != len(pair):
            raise ValueError("a crossbar is assigned more than once in a cycle")
    oh, ow, _ = output_shape(schedule.layer)
    if schedule.has_post_ops:
        if schedule.group_count != 0:
            raise ValueError("post-op schedules must not carry accumulation groups")
        return
    if schedule.group_count != oh * ow:
        raise ValueError(
            f"expected one group per output pixel ({oh * ow}), got {schedule.group_count}"
        )
    coords = schedule.group_y.astype(np.int64) * ow + schedule.group_x
    if len(np.unique(coords)) != len(coords):
        raise ValueError("an output pixel appears in more than one group")


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PostOpCounts:
    """Padding-free only: values merged by overlap-add and trimmed by crop."""

    overlap_add_values: int = 0
    crop_values: int = 0

    @property
    def total_values(self) -> int:
        return self.overlap_add_values + self.crop_values


@dataclass
class ExecutionTrace:
    """Activity counts of one scheduled run, the cost model's input.

    Zero-vector assignments advance cycles but bear no activations; their
    accumulation-group slots contribute no adds.
    """

    cycle_count: int
    vmm_activations: int
    vmm_activations_per_crossbar: np.ndarray
    input_bits_driven: int
    output_values_read: int
    adds_performed: int
    cell_activations: int
    active_cycle_count: int
    post_ops: PostOpCounts = field(default_factory=PostOpCounts)


def trace_of_schedule(schedule: CycleSchedule, plan: MappingPlan) -> ExecutionTrace:
    """Activity counts implied by a schedule on a plan, independent of data."""
    _check_pair(plan, schedule)
    c = plan.kernel_dims[2]
    n_xbar = len(plan.crossbars)
    rows = np.array([x.rows for x in plan.crossbars], dtype=np.int64)
    cols = np.array([x.cols for x in plan.crossbars], dtype=np.int64)
    row_tiles = np.array([plan.row_tiles(n) for n in range(n_xbar)], dtype=np.int64)
    col_tiles = np.array([plan.col_tiles(n) for n in range(n_xbar)], dtype=np.int64)

    live = schedule.kind != InputKind.ZERO
    xb = schedule.crossbar[live]
    per_xbar_logical = np.bincount(xb, minlength=n_xbar).astype(np.int64)

    driven = np.where(
        schedule.kind[live] == InputKind.WINDOW, rows[xb], np.int64(c)
    ).astype(np.int64)
    # every column tile of a split array re-drives its rows
    input_bits = int((driven * col_tiles[xb]).sum())
    output_values = int((cols[xb] * row_tiles[xb]).sum())
    cells = int((driven * cols[xb]).sum())
    tile_adds = int(((row_tiles[xb] - 1) * cols[xb]).sum())

    group_adds = 0
    if schedule.group_count:
        gids = schedule.group_id[live]
        members = np.bincount(gids[gids >= 0], minlength=schedule.group_count)
        m_cols = plan.kernel_dims[3]
        group_adds = int(np.maximum(members - 1, 0).sum()) * m_cols

    active_cycles = int(len(np.unique(schedule.cycle[live])))

    post = PostOpCounts()
    if schedule.has_post_ops:
        spec = schedule.layer
        kh, kw, _, m = plan.kernel_dims
        oh, ow, _ = output_shape(spec)
        post = PostOpCounts(
            overlap_add_values=spec.input_h * spec.input_w * kh * kw * m,
            crop_values=(spec.full_h * spec.full_w - oh * ow) * m,
        )

    return ExecutionTrace(
        cycle_count=schedule.cycle_count,
        vmm_activations=int((per_xbar_logical * row_tiles * col_tiles).sum()),
        vmm_activations_per_crossbar=per_xbar_logical * row_tiles * col_tiles,
        input_bits_driven=input_bits,
        output_values_read=output_values,
        adds_performed=group_adds + tile_adds,
        cell_activations=cells,
        active_cycle_count=active_cycles,
        post_ops=post,
    )


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def _check_pair(plan: MappingPlan, schedule: CycleSchedule):
    if plan.design is not schedule.design:
        raise ValueError(
            f"plan design {plan.design} does not match schedule design {schedule.design}"
        )
    kh, kw, c, m = plan.kernel_dims
    spec = schedule.layer
    if (kh, kw, c, m) != (spec.kh, spec.kw, spec.channels, spec.filters):
        raise ValueError(
            f"plan kernel dims {(kh, kw, c, m)} do not match layer "
            f"{(spec.kh, spec.kw, spec.channels, spec.filters)}"
        )


def execute(
    plan: MappingPlan, schedule: CycleSchedule, input: Tensor3
) -> tuple[Tensor3, ExecutionTrace]:
    """Run every cycle's VMMs and sum the accumulation groups.

    The functional result equals the zero-padding oracle element-exactly in
    integer mode.  VMMs are evaluated in batched form per crossbar, which is
    arithmetic-identical to cycle order (integer adds commute); an array
    size cap changes only the trace accounting, since row/column tiles of a
    matrix partition its product exactly.
    """
    _check_pair(plan, schedule)
    spec = schedule.layer
    if input.shape != (spec.input_h, spec.input_w, spec.channels):
        raise ValueError(
            f"input shape {input.shape} does not match layer "
            f"({spec.input_h}, {spec.input_w}, {spec.channels})"
        )

    design = plan.design
    if design is DesignKind.ZERO_PADDING:
        out = _run_zero_padding(plan, schedule, input)
    elif design is DesignKind.PADDING_FREE:
        out = _run_padding_free(plan, schedule, input)
    elif design is DesignKind.RED:
        out = _run_pixel_wise(plan, schedule, input, folded=False)
    else:
        out = _run_pixel_wise(plan, schedule, input, folded=True)
    return Tensor3(out), trace_of_schedule(schedule, plan)


def _run_zero_padding(plan, schedule, input, gather_budget=4_000_000):
    spec = schedule.layer
    oh, ow, m = output_shape(spec)
    pad = dilate_and_pad(input, spec)
    c = spec.channels
    pw = spec.padded_w
    flat = pad.data.reshape(-1)
    w = plan.crossbars[0].weights

    ii, jj, cc = np.meshgrid(
        np.arange(spec.kh), np.arange(spec.kw), np.arange(c), indexing="ij"
    )
    offsets = ((ii * pw + jj) * c + cc).reshape(-1)  # window gather, row i*kw*C+j*C+c
    base = (schedule.src_a.astype(np.int64) * pw + schedule.src_b) * c
    chunk = max(1, min(8192, gather_budget // len(offsets)))

    out = np.empty((oh * ow, m), dtype=np.result_type(flat, w))
    for t0 in range(0, len(base), chunk):
        t1 = min(t0 + chunk, len(base))
        idx = base[t0:t1, None] + offsets[None, :]
        out[t0:t1] = flat[idx] @ w
    # cycle order is row-major over output pixels (group_id == cycle)
    return out.reshape(oh, ow, m)


def _run_padding_free(plan, schedule, input):
    spec = schedule.layer
    s = spec.stride
    oh, ow, m = output_shape(spec)
    kh, kw = spec.kh, spec.kw
    flat = input.data.reshape(spec.input_h * spec.input_w, spec.channels)
    w = plan.crossbars[0].weights
    res = (flat @ w).reshape(spec.input_h, spec.input_w, kh * kw, m)
    canvas = np.zeros((spec.full_h, spec.full_w, m), dtype=res.dtype)
    for i in range(kh):
        for j in range(kw):
            canvas[
                i : i + spec.dilated_h : s,
                j : j + spec.dilated_w : s,
                :,
            ] += res[:, :, i * kw + j, :]
    out = canvas[spec.crop_top : spec.crop_top + oh, spec.crop_left : spec.crop_left + ow, :]
    return np.ascontiguousarray(out)


def _run_pixel_wise(plan, schedule, input, folded: bool):
    spec = schedule.layer
    oh, ow, m = output_shape(spec)
    c = spec.channels
    flat = input.data.reshape(spec.input_h * spec.input_w, c)
    dtype = np.result_type(flat, plan.crossbars[0].weights)
    acc = np.zeros((oh * ow, m), dtype=dtype)

    order = np.argsort(schedule.crossbar, kind="stable")
    xb_sorted = schedule.crossbar[order]
    bounds = np.searchsorted(xb_sorted, np.arange(len(plan.crossbars) + 1))

    for n, xbar in enumerate(plan.crossbars):
        rows = order[bounds[n] : bounds[n + 1]]
        if len(rows) == 0:
            continue
        live = schedule.kind[rows] != InputKind.ZERO
        src = (
            schedule.src_a[rows][live].astype(np.int64) * spec.input_w
            + schedule.src_b[rows][live]
        )
        gids = schedule.group_id[rows]
        if folded:
            vecs = np.zeros((len(rows), 2 * c), dtype=dtype)
            halves = schedule.half[rows][live]
            pix = flat[src]
            lo = halves == Half.LOW
            rows_live = np.flatnonzero(live)
            vecs[rows_live[lo], :c] = pix[lo]
            vecs[rows_live[~lo], c:] = pix[~lo]
            out = vecs @ xbar.weights
            # one folded sub can hit the same pixel twice (its two phases),
            # so accumulate collision-safely
            np.add.at(acc, gids, out)
        else:
            vecs = np.zeros((len(rows), c), dtype=dtype)
            vecs[live] = flat[src]
            out = vecs @ xbar.weights
            # a sub serves at most one output pixel per cycle and distinct
            # tiles produce distinct pixels, so these group ids are unique
            acc[gids] += out
    return acc.reshape(oh, ow, m)


# ---------------------------------------------------------------------------
# Schedule dump
# ---------------------------------------------------------------------------

_KIND_NAMES = {
    (InputKind.WINDOW, Half.FULL): "window",
    (InputKind.PIXEL, Half.FULL): "pixel",
    (InputKind.PIXEL, Half.LOW): "pixel_lo",
    (InputKind.PIXEL, Half.HIGH): "pixel_hi",
    (InputKind.ZERO, Half.FULL): "zero",
    (InputKind.ZERO, Half.LOW): "zero_lo",
    (InputKind.ZERO, Half.HIGH): "zero_hi",
}


def dump_schedule_lines(schedule: CycleSchedule):
    """Stable text dump: per cycle, assignment lines then group lines.

    Assignment: cycle,crossbar_index,input_kind,a,b
    Group:      cycle,group_id,output_y,output_x,member_crossbars...
    Coordinates are 0-based (row, col); window coordinates address the
    padded image, pixel coordinates the original input feature map.
    """
    yield f"# design={schedule.design.value} cycles={schedule.cycle_count}"
    yield "# assignment: cycle,crossbar,kind,a,b  group: cycle,group,out_y,out_x,members..."

    cyc = schedule.cycle.tolist()
    xb = schedule.crossbar.tolist()
    kinds = [
        _KIND_NAMES[(k, h)] for k, h in zip(schedule.kind.tolist(), schedule.half.tolist())
    ]
    sa = schedule.src_a.tolist()
    sb = schedule.src_b.tolist()

    # group member lists in assignment order
    members: dict[int, list[int]] = {}
    for gid, x in zip(schedule.group_id.tolist(), xb):
        if gid >= 0:
            members.setdefault(gid, []).append(x)

    # groups keyed by completing cycle
    by_cycle: dict[int, list[int]] = {}
    for gid, gc in enumerate(schedule.group_cycle.tolist()):
        by_cycle.setdefault(gc, []).append(gid)

    gy = schedule.group_y.tolist()
    gx = schedule.group_x.tolist()

    n = len(cyc)
    pos = 0
    for t in range(schedule.cycle_count):
        while pos < n and cyc[pos] == t:
            yield f"{t},{xb[pos]},{kinds[pos]},{sa[pos]},{sb[pos]}"
            pos += 1
        for gid in sorted(by_cycle.get(t, ())):
            mem = ",".join(str(v) for v in members.get(gid, ()))
            yield f"{t},{gid},{gy[gid]},{gx[gid]},{mem}"
