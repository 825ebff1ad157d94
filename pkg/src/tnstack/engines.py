"""Batch contraction engines.

All engines answer the same question: given one shared core chain and B
sample chains of matching length and physical extents, produce the B
contraction values (scalars, or vectors when the core carries an output
leg). They differ in how the batch is traversed:

* contract_loop: one plain inner product per sample.
* contract_btn: contract the core against the block-diagonal stacked
  form of the batch, following a precomputed ContractionPlan (left-right
  sweep or greedy pairing).
* contract_ec: fuse the core into the batch site by site, then sweep the
  resulting chain of batched matrices with one batched matmul per bond.
* contract_ec_halving: same stage 1, but the interior matrices are
  multiplied pairwise in rounds, halving the chain each round.

Every engine reports wall time and the peak number of dense float64
elements it owned (inputs are not counted).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from time import perf_counter

import numpy as np

from .errors import DimensionError, HalvingFallback, MemoryGuardError, PlanError
from .meter import ElementMeter, LockedMeter
from .mps import Mps, MpsSpec, _check_pair, inner_product
from .stacking import StackedMps
from .tensor import batched_matmul

SWEEP_LR = "sweep_lr"
GREEDY = "greedy"


class Method(Enum):
    LP = "LP"
    BTN = "BTN"
    EC = "EC"
    EC_HALVING = "EC_HALVING"


@dataclass(frozen=True)
class EngineStats:
    seconds: float
    peak_elements: int


@dataclass(frozen=True)
class BatchResult:
    values: np.ndarray  # (B,) or (B, output_dim)
    method: Method
    stats: EngineStats


@dataclass(frozen=True)
class PlanStep:
    """Contract node `left` with node `right` into node `out`."""

    left: int
    right: int
    out: int
    elements: int  # dense size of the result


@dataclass(frozen=True)
class ContractionPlan:
    """Pairwise contraction schedule over the 2L-node sandwich network.

    Nodes 0..L-1 are the core units, nodes L..2L-1 the dense stacked
    sites, higher ids are intermediates. `legs` maps every node to its
    ordered (bond id, extent) pairs; bond ids tagged "dangle" survive to
    the final tensor. `predicted_peak` simulates the executor's element
    accounting over the schedule (core units are caller-owned and free).
    """

    strategy: str
    num_sites: int
    batch: int
    steps: tuple[PlanStep, ...]
    legs: dict
    predicted_peak: int


def _core_shapes(core) -> list[tuple[int, ...]]:
    if isinstance(core, Mps):
        return [u.shape for u in core.units]
    if isinstance(core, MpsSpec):
        return [tuple(s) for s in core.unit_shapes()]
    raise TypeError(f"core must be an Mps or MpsSpec, got {type(core).__name__}")


def _leaf_legs(core_shapes, stacked: StackedMps) -> dict:
    sites = len(core_shapes)
    legs = {}
    for j, shape in enumerate(core_shapes):
        lab = [
            (("core", j - 1), shape[0]) if j > 0 else (("dangle", "core_left"), shape[0]),
            (("phys", j), shape[1]),
            (("core", j), shape[2]) if j < sites - 1 else (("dangle", "core_right"), shape[2]),
        ]
        if len(shape) == 4:
            lab.append((("dangle", "out"), shape[3]))
        legs[j] = tuple(lab)
    for j in range(sites):
        shape = stacked.site_shape(j)
        lab = [(("phys", j), shape[0])]
        if sites == 1:
            lab.append((("dangle", "batch"), shape[1]))
        else:
            if j == 0:
                lab.append((("stk", 0), shape[1]))
            else:
                lab.append((("stk", j - 1), shape[1]))
                if j < sites - 1:
                    lab.append((("stk", j), shape[2]))
            if j == stacked.placement:
                lab.append((("dangle", "batch"), shape[-1]))
        legs[sites + j] = tuple(lab)
    return legs


def _merge_legs(la, lb):
    """Result legs, contracted bond ids, and result size of a pairwise step."""
    ids_a = {lid for lid, _ in la}
    shared = [lid for lid, _ in lb if lid in ids_a and lid[0] != "dangle"]
    shared_set = set(shared)
    out = tuple(p for p in la if p[0] not in shared_set)
    out += tuple(p for p in lb if p[0] not in shared_set)
    elements = 1
    for _, ext in out:
        elements *= ext
    return out, shared_set, elements


def _sweep_steps(legs, sites):
    """Per-site transfer matrices first, then absorb them left to right."""
    steps = []
    consumed = []
    next_id = 2 * sites
    transfers = []
    for j in range(sites):
        out_legs, shared, elements = _merge_legs(legs[j], legs[sites + j])
        legs[next_id] = out_legs
        steps.append(PlanStep(j, sites + j, next_id, elements))
        consumed.append(shared)
        transfers.append(next_id)
        next_id += 1
    env = transfers[0]
    for t in transfers[1:]:
        out_legs, shared, elements = _merge_legs(legs[env], legs[t])
        legs[next_id] = out_legs
        steps.append(PlanStep(env, t, next_id, elements))
        consumed.append(shared)
        env = next_id
        next_id += 1
    return steps, consumed


def _greedy_steps(legs, sites):
    """Repeatedly contract the bonded pair with the smallest result."""
    live = sorted(legs)
    steps = []
    consumed = []
    next_id = 2 * sites
    while len(live) > 1:
        best = None
        for ia, a in enumerate(live):
            for b in live[ia + 1 :]:
                out_legs, shared, elements = _merge_legs(legs[a], legs[b])
                if not shared:
                    continue
                key = (elements, a, b)
                if best is None or key < best[0]:
                    best = (key, a, b, out_legs, shared)
        if best is None:
            raise PlanError("network is disconnected; nothing left to contract")
        _, a, b, out_legs, shared = best
        legs[next_id] = out_legs
        steps.append(PlanStep(a, b, next_id, elements=best[0][0]))
        consumed.append(shared)
        live.remove(a)
        live.remove(b)
        live.append(next_id)
        live.sort()
        next_id += 1
    return steps, consumed


def _node_size(legs, nid) -> int:
    n = 1
    for _, ext in legs[nid]:
        n *= ext
    return n


def _simulate_peak(steps, legs, sites) -> int:
    """Replay the executor's element accounting without allocating."""
    live = 0
    peak = 0
    owned = set()
    seen = set()
    for st in steps:
        for nid in (st.left, st.right):
            if sites <= nid < 2 * sites and nid not in seen:
                seen.add(nid)
                owned.add(nid)
                live += _node_size(legs, nid)
                peak = max(peak, live)
        live += st.elements
        peak = max(peak, live)
        owned.add(st.out)
        for nid in (st.left, st.right):
            if nid in owned:
                live -= _node_size(legs, nid)
                owned.discard(nid)
    return peak


def plan_btn(core, stacked: StackedMps, strategy: str = GREEDY) -> ContractionPlan:
    """Schedule the contraction of a core chain against a stacked batch.

    `core` may be an Mps or just an MpsSpec; only shapes matter here.
    SWEEP_LR contracts each site's physical bond first and then absorbs
    the transfer matrices left to right; GREEDY always contracts the
    bonded pair whose result is smallest (ties broken by node id), which
    on thin-input batches finds far smaller intermediates.

    Raises:
        PlanError: shape disagreement between core and stacked sites, an
            unknown strategy, or an internal scheduling inconsistency.
    """
    shapes = _core_shapes(core)
    sites = len(shapes)
    if sites != stacked.num_sites:
        raise PlanError(
            f"core has {sites} sites, stacked batch has {stacked.num_sites}"
        )
    for j, shape in enumerate(shapes):
        if shape[1] != stacked.phys_dims[j]:
            raise PlanError(
                f"physical extent mismatch at site {j}: core {shape[1]}, "
                f"stacked {stacked.phys_dims[j]}"
            )
    legs = dict(_leaf_legs(shapes, stacked))
    if strategy == SWEEP_LR:
        steps, consumed = _sweep_steps(legs, sites)
    elif strategy == GREEDY:
        steps, consumed = _greedy_steps(legs, sites)
    else:
        raise PlanError(f"unknown strategy {strategy!r}; use SWEEP_LR or GREEDY")
    # schedule sanity: every interior bond consumed exactly once
    all_bonds = {
        lid for nid in range(2 * sites) for lid, _ in legs[nid] if lid[0] != "dangle"
    }
    used = [lid for group in consumed for lid in group]
    if sorted(used) != sorted(all_bonds):
        raise PlanError("schedule does not consume every bond exactly once")
    peak = _simulate_peak(steps, legs, sites)
    return ContractionPlan(
        strategy=strategy,
        num_sites=sites,
        batch=stacked.batch,
        steps=tuple(steps),
        legs=legs,
        predicted_peak=peak,
    )


def contract_btn(
    core: Mps,
    stacked: StackedMps,
    plan: ContractionPlan,
    element_guard: int | None = None,
) -> BatchResult:
    """Execute a ContractionPlan against actual tensors.

    Dense stacked sites are materialized the first time a step touches
    them and released once consumed. With `element_guard` set, any step
    result or materialized site larger than that many elements aborts
    with MemoryGuardError before the allocation happens.

    Raises:
        PlanError: the plan was built for different shapes.
        MemoryGuardError: see `element_guard`.
    """
    sites = core.num_sites
    if plan.num_sites != sites or stacked.num_sites != sites:
        raise PlanError(
            f"site count mismatch: plan {plan.num_sites}, core {sites}, "
            f"stacked {stacked.num_sites}"
        )
    if plan.batch != stacked.batch:
        raise PlanError(f"plan batch {plan.batch} != stacked batch {stacked.batch}")
    for j in range(sites):
        want = tuple(ext for _, ext in plan.legs[j])
        if want != core.units[j].shape:
            raise PlanError(
                f"plan expects core unit {j} of shape {want}, got {core.units[j].shape}"
            )
        want = tuple(ext for _, ext in plan.legs[sites + j])
        if want != stacked.site_shape(j):
            raise PlanError(
                f"plan expects stacked site {j} of shape {want}, got {stacked.site_shape(j)}"
            )
    meter = ElementMeter()
    t0 = perf_counter()
    tensors: dict[int, np.ndarray] = {}
    owned: set[int] = set()

    def fetch(nid: int) -> np.ndarray:
        if nid in tensors:
            return tensors[nid]
        if nid < sites:
            tensors[nid] = core.units[nid]
        elif nid < 2 * sites:
            size = _node_size(plan.legs, nid)
            if element_guard is not None and size > element_guard:
                raise MemoryGuardError(
                    f"stacked site {nid - sites} needs {size} elements, "
                    f"guard is {element_guard}"
                )
            arr = stacked.materialize_site(nid - sites)
            meter.alloc(arr)
            owned.add(nid)
            tensors[nid] = arr
        else:
            raise PlanError(f"step consumes node {nid} before it is produced")
        return tensors[nid]

    for st in plan.steps:
        if element_guard is not None and st.elements > element_guard:
            raise MemoryGuardError(
                f"step result needs {st.elements} elements, guard is {element_guard}"
            )
        ta = fetch(st.left)
        tb = fetch(st.right)
        la, lb = plan.legs[st.left], plan.legs[st.right]
        ids_b = {lid for lid, _ in lb}
        shared = [lid for lid, _ in la if lid in ids_b and lid[0] != "dangle"]
        pos_a = {lid: i for i, (lid, _) in enumerate(la)}
        pos_b = {lid: i for i, (lid, _) in enumerate(lb)}
        out = np.tensordot(
            ta, tb, axes=([pos_a[lid] for lid in shared], [pos_b[lid] for lid in shared])
        )
        meter.alloc(out)
        tensors[st.out] = out
        owned.add(st.out)
        for nid, t in ((st.left, ta), (st.right, tb)):
            del tensors[nid]
            if nid in owned:
                meter.free(t)
                owned.discard(nid)
    final = plan.steps[-1].out
    t = tensors[final]
    lf = plan.legs[final]
    names = [lid for lid, _ in lf]
    if ("dangle", "batch") not in names:
        raise PlanError("final tensor lost the batch axis")
    order = [names.index(("dangle", "batch"))]
    out_dim = core.output_dim
    if out_dim is not None:
        order.append(names.index(("dangle", "out")))
    order += [i for i in range(len(names)) if i not in order]
    shape = (stacked.batch,) if out_dim is None else (stacked.batch, out_dim)
    values = t.transpose(order).reshape(shape)
    return BatchResult(values, Method.BTN, EngineStats(perf_counter() - t0, meter.peak))


def contract_loop(core: Mps, samples, threads: int = 1) -> BatchResult:
    """Contract each sample against the core one at a time.

    `threads` > 1 fans the per-sample products out over a thread pool;
    values are bit-identical either way since each sample's arithmetic
    is unchanged.
    """
    samples = list(samples)
    if not samples:
        raise DimensionError("need at least one sample")
    for b, s in enumerate(samples):
        try:
            _check_pair(core, s)
        except DimensionError as exc:
            raise DimensionError(f"sample {b}: {exc}") from exc
    meter = LockedMeter() if threads > 1 else ElementMeter()
    t0 = perf_counter()
    batch = len(samples)
    out_dim = core.output_dim
    values = np.empty((batch,) if out_dim is None else (batch, out_dim))
    meter.alloc(values)
    if threads <= 1:
        for b, s in enumerate(samples):
            values[b] = inner_product(core, s, meter=meter)
    else:
        def work(b: int) -> None:
            values[b] = inner_product(core, samples[b], meter=meter)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(batch)))
    return BatchResult(values, Method.LP, EngineStats(perf_counter() - t0, meter.peak))


def ec_site_units(core: Mps, samples, meter=None) -> list[np.ndarray]:
    """Stage 1: fuse the core into the batch, one batched unit per site.

    Site j of the result has shape (B, Vl*Dl, Vr*Dr), the physical bond
    contracted away and the core/sample bond pairs fused; an output leg
    on the core's last unit folds into that unit's final axis.
    """
    samples = list(samples)
    if not samples:
        raise DimensionError("need at least one sample")
    for b, s in enumerate(samples):
        try:
            _check_pair(core, s)
        except DimensionError as exc:
            raise DimensionError(f"sample {b}: {exc}") from exc
    units = []
    batch = len(samples)
    for j in range(core.num_sites):
        cu = core.units[j]
        shapes = {s.units[j].shape for s in samples}
        if len(shapes) > 1:
            raise DimensionError(
                f"samples disagree on unit shape at site {j}: {sorted(shapes)}"
            )
        stack = np.stack([s.units[j] for s in samples])  # (B, Dl, k, Dr)
        if meter is not None:
            meter.alloc(stack)
        if cu.ndim == 3:
            t = np.einsum("ikj,bnkm->binjm", cu, stack, optimize=True)
            unit = t.reshape(batch, cu.shape[0] * stack.shape[1], cu.shape[2] * stack.shape[3])
        else:
            t = np.einsum("ikjo,bnkm->binjmo", cu, stack, optimize=True)
            unit = t.reshape(
                batch,
                cu.shape[0] * stack.shape[1],
                cu.shape[2] * stack.shape[3] * cu.shape[3],
            )
        if meter is not None:
            meter.alloc(t)
            meter.free(stack)
        units.append(unit)
    return units


def _batch_values(running: np.ndarray, output_dim: int | None) -> np.ndarray:
    batch = running.shape[0]
    if output_dim is None:
        return running.reshape(batch)
    return running.reshape(batch, output_dim)


def contract_ec(core: Mps, samples) -> BatchResult:
    """Stage-1 fusion followed by one batched matmul per bond, left to right."""
    meter = ElementMeter()
    t0 = perf_counter()
    units = ec_site_units(core, samples, meter=meter)
    running = units[0]
    for u in units[1:]:
        nxt = batched_matmul(running, u)
        meter.alloc(nxt)
        if running is not units[0]:
            meter.free(running)
        running = nxt
    values = _batch_values(running, core.output_dim)
    return BatchResult(values, Method.EC, EngineStats(perf_counter() - t0, meter.peak))


def contract_ec_halving(core: Mps, samples) -> BatchResult:
    """Stage-1 fusion, then pairwise rounds over the interior matrices.

    The interior stage-1 units are stacked and multiplied neighbor by
    neighbor, halving their count each round (an identity pads odd
    rounds); the two boundary units are applied last. Requires the
    interior units to be square and uniform.

    Raises:
        HalvingFallback: the interior units are not uniform squares.
    """
    meter = ElementMeter()
    t0 = perf_counter()
    units = ec_site_units(core, samples, meter=meter)
    batch = units[0].shape[0]
    if len(units) == 1:
        running = units[0]
    elif len(units) == 2:
        running = batched_matmul(units[0], units[1])
        meter.alloc(running)
    else:
        mids = units[1:-1]
        m = units[0].shape[2]
        for u in mids:
            if u.shape != (batch, m, m):
                raise HalvingFallback(
                    f"interior unit of shape {u.shape} breaks the uniform "
                    f"(B, {m}, {m}) square layout; use contract_ec"
                )
        block = np.stack(mids, axis=1)  # (B, n, m, m)
        meter.alloc(block)
        for u in mids:
            meter.free(u)
        while block.shape[1] > 1:
            if block.shape[1] % 2:
                pad = np.broadcast_to(np.eye(m), (batch, 1, m, m))
                grown = np.concatenate([block, pad], axis=1)
                meter.alloc(grown)
                meter.free(block)
                block = grown
            nxt = np.matmul(block[:, 0::2], block[:, 1::2])
            meter.alloc(nxt)
            meter.free(block)
            block = nxt
        head = batched_matmul(units[0], block[:, 0])
        meter.alloc(head)
        meter.free(block)
        running = batched_matmul(head, units[-1])
        meter.alloc(running)
        meter.free(head)
    values = _batch_values(running, core.output_dim)
    return BatchResult(
        values, Method.EC_HALVING, EngineStats(perf_counter() - t0, meter.peak)
    )
