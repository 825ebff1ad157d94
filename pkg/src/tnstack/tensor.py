"""Dense tensor contraction primitives.

Tensors are plain numpy ndarrays. A "bond" is a pair of axes, one on each
of two tensors, that share an extent and are summed over jointly.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import DimensionError, TensorAxisError, WiringError


def contract_pair(a, axes_a: Sequence[int], b, axes_b: Sequence[int]) -> np.ndarray:
    """Contract tensors `a` and `b` over the paired axes.

    `axes_a[i]` on `a` is summed against `axes_b[i]` on `b`. The result
    carries the remaining axes of `a` (in order) followed by the remaining
    axes of `b` (in order). Contracting all axes of both yields a 0-d array.

    Raises:
        TensorAxisError: an axis is out of range or listed twice, or the
            two axis lists differ in length.
        DimensionError: a paired bond has mismatched extents.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a = [int(x) for x in axes_a]
    axes_b = [int(x) for x in axes_b]
    if len(axes_a) != len(axes_b):
        raise TensorAxisError(
            f"axis lists differ in length: {len(axes_a)} vs {len(axes_b)}"
        )
    for name, tensor, axes in (("a", a, axes_a), ("b", b, axes_b)):
        for ax in axes:
            if not -tensor.ndim <= ax < tensor.ndim:
                raise TensorAxisError(
                    f"axis {ax} out of range for operand {name} with rank {tensor.ndim}"
                )
        norm = [ax % tensor.ndim for ax in axes]
        if len(set(norm)) != len(norm):
            raise TensorAxisError(f"duplicate axis in contraction list for operand {name}")
    for ax_a, ax_b in zip(axes_a, axes_b):
        if a.shape[ax_a] != b.shape[ax_b]:
            raise DimensionError(
                f"bond extent mismatch: axis {ax_a} of a has extent {a.shape[ax_a]}, "
                f"axis {ax_b} of b has extent {b.shape[ax_b]}"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def batched_matmul(a, b) -> np.ndarray:
    """Multiply two stacks of matrices slice by slice.

    `a` has shape (B, n, m) and `b` has shape (B, m, p); slice `t` of the
    (B, n, p) result is exactly `a[t] @ b[t]`.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 3 or b.ndim != 3:
        raise DimensionError(
            f"batched_matmul expects rank-3 operands, got ranks {a.ndim} and {b.ndim}"
        )
    if a.shape[0] != b.shape[0]:
        raise DimensionError(
            f"batch extents differ: {a.shape[0]} vs {b.shape[0]}"
        )
    if a.shape[2] != b.shape[1]:
        raise DimensionError(
            f"inner extents differ: {a.shape[2]} vs {b.shape[1]}"
        )
    return np.matmul(a, b)


Wire = tuple[tuple[int, int], tuple[int, int]]


def full_contract(units: Sequence[np.ndarray], wiring: Sequence[Wire]) -> np.ndarray:
    """Contract a list of tensors into one tensor along explicit wires.

    Each wire is ``((i, axis_i), (j, axis_j))`` and bonds an axis of unit
    `i` to an axis of unit `j`. Wires are processed in order; when a wire
    joins two nodes, every remaining wire between those same two nodes is
    contracted in the same step, so cycles between a pair are supported.
    Free axes keep unit order within each merge (left operand first).

    Raises:
        WiringError: an endpoint is out of range or used twice, a wire
            joins a node to itself, or the wiring leaves the network in
            more than one piece.
        DimensionError: a wire bonds axes of different extents.
    """
    arrays = [np.asarray(u) for u in units]
    if not arrays:
        raise WiringError("no units to contract")
    seen: set[tuple[int, int]] = set()
    for wire in wiring:
        for unit, axis in wire:
            if not 0 <= unit < len(arrays):
                raise WiringError(f"wire references unit {unit}, have {len(arrays)} units")
            if not 0 <= axis < arrays[unit].ndim:
                raise WiringError(
                    f"wire references axis {axis} of unit {unit} with rank {arrays[unit].ndim}"
                )
            if (unit, axis) in seen:
                raise WiringError(f"axis {axis} of unit {unit} appears in more than one wire")
            seen.add((unit, axis))
        (ui, ai), (uj, aj) = wire
        if arrays[ui].shape[ai] != arrays[uj].shape[aj]:
            raise DimensionError(
                f"wire ({ui},{ai})-({uj},{aj}) bonds extents "
                f"{arrays[ui].shape[ai]} and {arrays[uj].shape[aj]}"
            )

    # node state: tensor plus the original (unit, axis) label of each live axis
    nodes: dict[int, tuple[np.ndarray, list[tuple[int, int]]]] = {
        i: (arr, [(i, ax) for ax in range(arr.ndim)]) for i, arr in enumerate(arrays)
    }
    home = {i: i for i in range(len(arrays))}  # original unit -> current node
    pending = list(wiring)
    while pending:
        (ui, ai), (uj, aj) = pending.pop(0)
        na, nb = home[ui], home[uj]
        if na == nb:
            raise WiringError(
                f"wire ({ui},{ai})-({uj},{aj}) joins a node to itself; traces are not supported"
            )
        ta, labels_a = nodes.pop(na)
        tb, labels_b = nodes.pop(nb)
        # gather every wire between these two nodes, including the current one
        batch = [((ui, ai), (uj, aj))]
        rest = []
        for wire in pending:
            (wi, wa), (wj, wb) = wire
            if {home[wi], home[wj]} == {na, nb}:
                batch.append(wire if home[wi] == na else ((wj, wb), (wi, wa)))
            else:
                rest.append(wire)
        pending = rest
        axes_a = [labels_a.index(end_a) for end_a, _ in batch]
        axes_b = [labels_b.index(end_b) for _, end_b in batch]
        out = np.tensordot(ta, tb, axes=(axes_a, axes_b))
        labels = [lab for k, lab in enumerate(labels_a) if k not in set(axes_a)]
        labels += [lab for k, lab in enumerate(labels_b) if k not in set(axes_b)]
        nodes[na] = (out, labels)
        for unit, node in home.items():
            if node == nb:
                home[unit] = na
    if len(nodes) != 1:
        raise WiringError(f"wiring leaves {len(nodes)} disconnected pieces, expected 1")
    (tensor, _), = nodes.values()
    return tensor


def max_rel_deviation(a, b) -> float:
    """Largest entrywise |a - b| scaled by the largest magnitude present.

    Returns 0.0 when both operands are entirely zero. Shapes must match.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    scale = max(
        float(np.max(np.abs(a), initial=0.0)),
        float(np.max(np.abs(b), initial=0.0)),
    )
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - b)) / scale)
