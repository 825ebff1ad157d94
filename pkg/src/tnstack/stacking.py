"""Stack same-length chains into one block-diagonal batched chain.

Given B input chains that agree on length and physical extents, the
stacked object encodes all of them at once:

* site 0 concatenates the input row blocks along the right bond,
* interior sites hold each input's unit as a diagonal block over the
  concatenated (left, right) bond pair, every cross block exactly zero,
* one site carries an extra trailing "batch" axis of extent B; its
  slice b keeps only input b's block, so contracting the whole chain
  against a shared core yields the B per-input values side by side.

By default the batch axis sits on the last site, which then maps each
input's right boundary into its own column. Bond extents may differ
between inputs; blocks are laid out by running offset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .errors import DimensionError, OracleCapError, StackingError
from .mps import (
    DEFAULT_ORACLE_CAP,
    Mps,
    mps_to_full_tensor,
    unit_from_json_dict,
)
from .tensor import full_contract, max_rel_deviation

STACKED_JSON_VERSION = "stacked-mps-json v1"


@dataclass(frozen=True)
class StackPlacement:
    """Which site carries the batch axis."""

    site: int


class StackedMps:
    """Block-sparse batched chain; build through stack_mps.

    Keeps references to the input units (nothing is copied up front) and
    materializes dense per-site arrays on demand. Axis order of a
    materialized site is (phys, left, right) with boundary bond axes
    dropped and the batch axis, where present, appended last.
    """

    def __init__(self, inputs, placement: int) -> None:
        self.inputs = list(inputs)
        self.placement = placement
        sites = self.inputs[0].num_sites
        # per-site block offsets along the concatenated bonds, length B+1
        self.left_offsets = [
            list(accumulate([m.units[j].shape[0] for m in self.inputs], initial=0))
            for j in range(sites)
        ]
        self.right_offsets = [
            list(accumulate([m.units[j].shape[2] for m in self.inputs], initial=0))
            for j in range(sites)
        ]

    @property
    def batch(self) -> int:
        return len(self.inputs)

    @property
    def num_sites(self) -> int:
        return self.inputs[0].num_sites

    @property
    def phys_dims(self) -> tuple[int, ...]:
        return self.inputs[0].phys_dims

    def site_shape(self, j: int) -> tuple[int, ...]:
        """Dense shape of site j without materializing it."""
        k = self.phys_dims[j]
        last = self.num_sites - 1
        if self.num_sites == 1:
            return (k, self.batch)
        if j == 0:
            shape: tuple[int, ...] = (k, self.right_offsets[j][-1])
        elif j == last:
            shape = (k, self.left_offsets[j][-1])
        else:
            shape = (k, self.left_offsets[j][-1], self.right_offsets[j][-1])
        if j == self.placement:
            shape = shape + (self.batch,)
        return shape

    def site_shapes(self) -> list[tuple[int, ...]]:
        return [self.site_shape(j) for j in range(self.num_sites)]

    def block_window(self, j: int, b: int) -> tuple[slice, ...]:
        """Index window (without the phys or batch axis) of input b's block."""
        lo, ro = self.left_offsets[j], self.right_offsets[j]
        last = self.num_sites - 1
        if self.num_sites == 1:
            return ()
        if j == 0:
            return (slice(ro[b], ro[b + 1]),)
        if j == last:
            return (slice(lo[b], lo[b + 1]),)
        return (slice(lo[b], lo[b + 1]), slice(ro[b], ro[b + 1]))

    def materialize_site(self, j: int) -> np.ndarray:
        """Dense array for site j, off-block entries exactly zero."""
        out = np.zeros(self.site_shape(j))
        placed = j == self.placement
        last = self.num_sites - 1
        for b, m in enumerate(self.inputs):
            u = m.units[j]
            if self.num_sites == 1:
                block = u[0, :, 0]  # (k,)
            elif j == 0:
                block = u[0]  # (k, right)
            elif j == last:
                block = u[:, :, 0].T  # (k, left)
            else:
                block = u.transpose(1, 0, 2)  # (k, left, right)
            window = (slice(None),) + self.block_window(j, b)
            if placed:
                window = window + (b,)
            out[window] = block
        return out

    def to_json_dict(self) -> dict:
        return {
            "version": STACKED_JSON_VERSION,
            "B": self.batch,
            "placement": self.placement,
            "units": [
                [
                    {"shape": list(u.shape), "data": u.ravel(order="C").tolist()}
                    for u in m.units
                ]
                for m in self.inputs
            ],
        }


def stack_mps(inputs, placement: int | StackPlacement | None = None) -> StackedMps:
    """Stack chains into one block-diagonal batched chain.

    Args:
        inputs: non-empty sequence of chains agreeing on length and
            per-site physical extents. Bond extents may differ. Output
            legs are not stackable.
        placement: site index for the batch axis (or a StackPlacement);
            defaults to the last site.

    Raises:
        StackingError: empty input, mismatched lengths or physical
            extents, an output leg, or an out-of-range placement.
    """
    chains = list(inputs)
    if not chains:
        raise StackingError("need at least one chain to stack")
    sites = chains[0].num_sites
    for b, m in enumerate(chains):
        if m.num_sites != sites:
            raise StackingError(
                f"chain {b} has {m.num_sites} sites, chain 0 has {sites}"
            )
        if m.output_dim is not None:
            raise StackingError(f"chain {b} carries an output leg and cannot be stacked")
        for j, (k0, kb) in enumerate(zip(chains[0].phys_dims, m.phys_dims)):
            if k0 != kb:
                raise StackingError(
                    f"physical extent mismatch at site {j}: chain 0 has {k0}, chain {b} has {kb}"
                )
    if isinstance(placement, StackPlacement):
        placement = placement.site
    if placement is None:
        placement = sites - 1
    if not 0 <= placement < sites:
        raise StackingError(
            f"placement {placement} out of range for {sites} sites"
        )
    return StackedMps(chains, placement)


def stack_general_units(units, add_stack_leg: bool = False) -> np.ndarray:
    """Block-diagonal stack of same-shape units sharing axis 0.

    Axis 0 (the physical axis) is shared. Every remaining axis of the
    result concatenates the corresponding input axes, and input b fills
    block b of the generalized diagonal; everything off those blocks is
    zero. With `add_stack_leg`, a trailing axis of extent B is appended
    whose slice b holds only input b's block.

    Rank-1 units have no bond axes to concatenate, so they require the
    stack leg.
    """
    arrays = [np.asarray(u, dtype=np.float64) for u in units]
    if not arrays:
        raise StackingError("need at least one unit to stack")
    shape = arrays[0].shape
    for b, a in enumerate(arrays):
        if a.shape != shape:
            raise StackingError(
                f"unit {b} has shape {a.shape}, unit 0 has shape {shape}"
            )
    if len(shape) < 1:
        raise StackingError("units need at least a physical axis")
    bonds = shape[1:]
    if not bonds and not add_stack_leg:
        raise StackingError("rank-1 units can only be stacked with add_stack_leg=True")
    batch = len(arrays)
    out_shape = (shape[0],) + tuple(batch * n for n in bonds)
    if add_stack_leg:
        out_shape = out_shape + (batch,)
    out = np.zeros(out_shape)
    for b, a in enumerate(arrays):
        window = (slice(None),) + tuple(slice(b * n, (b + 1) * n) for n in bonds)
        if add_stack_leg:
            window = window + (b,)
        out[window] = a
    return out


def stacked_full_tensor(
    stacked: StackedMps, max_elements: int = DEFAULT_ORACLE_CAP
) -> np.ndarray:
    """Expand a stacked chain into its dense tensor, batch axis last.

    The result has shape (k_0, ..., k_{L-1}, B); slice [..., b] is the
    dense tensor of input b. Brute-force oracle, capped like
    mps_to_full_tensor.
    """
    elements = stacked.batch
    for k in stacked.phys_dims:
        elements *= k
    if elements > max_elements:
        raise OracleCapError(
            f"dense expansion needs {elements} elements, cap is {max_elements}"
        )
    sites = [stacked.materialize_site(j) for j in range(stacked.num_sites)]
    if stacked.num_sites == 1:
        return sites[0]
    wiring = []
    for j in range(stacked.num_sites - 1):
        right_axis = 1 if j == 0 else 2
        wiring.append(((j, right_axis), (j + 1, 1)))
    t = full_contract(sites, wiring)
    # free axes come out as (k_0 .. k_p, B, k_{p+1} .. k_{L-1})
    return np.moveaxis(t, stacked.placement + 1, -1)


@dataclass
class StackOracleReport:
    """Outcome of comparing a stacked chain against its inputs."""

    batch: int
    shape: tuple[int, ...]
    max_rel_deviation: float
    rel_tol: float
    passed: bool


def verify_stack_oracle(
    inputs,
    stacked: StackedMps,
    rel_tol: float = 1e-10,
    max_elements: int = DEFAULT_ORACLE_CAP,
) -> StackOracleReport:
    """Check that batch slice b of the stacked tensor equals input b.

    Both sides are expanded densely, so this is only usable on small
    chains; see the element cap.
    """
    got = stacked_full_tensor(stacked, max_elements=max_elements)
    want = np.stack(
        [mps_to_full_tensor(m, max_elements=max_elements) for m in inputs], axis=-1
    )
    if got.shape != want.shape:
        raise DimensionError(
            f"stacked tensor shape {got.shape} does not match inputs {want.shape}"
        )
    dev = max_rel_deviation(got, want)
    return StackOracleReport(stacked.batch, got.shape, dev, rel_tol, dev <= rel_tol)


def stacked_to_dense_mps(stacked: StackedMps) -> Mps:
    """Materialize every site and rewrap the result as a plain chain.

    The batch axis becomes the output leg of the last unit, so the dense
    chain contracts against a core exactly like the stacked form does.
    Only the default placement (batch axis on the last site) fits the
    chain layout.

    Raises:
        StackingError: the batch axis is not on the last site.
    """
    last = stacked.num_sites - 1
    if stacked.placement != last:
        raise StackingError(
            f"dense chain export needs the batch axis on the last site, "
            f"got placement {stacked.placement}"
        )
    units = []
    for j in range(stacked.num_sites):
        site = stacked.materialize_site(j)
        if stacked.num_sites == 1:
            units.append(site[None, :, None, :])  # (1, k, 1, B)
        elif j == 0:
            units.append(site[None])  # (1, k, right)
        elif j == last:
            units.append(site.transpose(1, 0, 2)[:, :, None, :])  # (left, k, 1, B)
        else:
            units.append(site.transpose(1, 0, 2))  # (left, k, right)
    return Mps(units)


def save_stacked_json(stacked: StackedMps, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(stacked.to_json_dict(), fh)
        fh.write("\n")


def load_stacked_json(path) -> StackedMps:
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    version = d.get("version")
    if version != STACKED_JSON_VERSION:
        raise ValueError(
            f"unsupported stacked format version {version!r}, expected {STACKED_JSON_VERSION!r}"
        )
    chains = [Mps([unit_from_json_dict(u) for u in row]) for row in d["units"]]
    if len(chains) != int(d["B"]):
        raise ValueError(f"B={d['B']} but {len(chains)} chains present")
    return stack_mps(chains, placement=int(d["placement"]))
