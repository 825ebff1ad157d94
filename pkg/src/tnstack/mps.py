"""Open-boundary matrix product chains and single-pair contraction.

A chain of length L is a list of rank-3 units; unit j has axes
(left_bond, phys, right_bond) and the two boundary bonds have extent 1.
The last unit may instead be rank 4, (left_bond, phys, right_bond, output),
in which case contraction against a plain chain yields a vector rather
than a scalar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, OracleCapError

MPS_JSON_VERSION = "mps-json v1"
DEFAULT_ORACLE_CAP = 10_000_000

SeedLike = int | tuple[int, ...]


@dataclass(frozen=True)
class MpsSpec:
    """Shape recipe for a uniform-bond chain.

    Attributes:
        sites: number of units (L >= 1).
        phys_dim: extent of every physical axis.
        bond_dim: extent of every interior bond.
        output_dim: extent of the output leg on the last unit, or None
            for a plain scalar-valued chain.
        seed: seed material for random generation; an int or a tuple of
            ints accepted by numpy's default_rng.
    """

    sites: int
    phys_dim: int
    bond_dim: int
    output_dim: int | None = None
    seed: SeedLike = 0

    def __post_init__(self) -> None:
        if self.sites < 1:
            raise DimensionError(f"sites must be >= 1, got {self.sites}")
        if self.phys_dim < 1 or self.bond_dim < 1:
            raise DimensionError(
                f"phys_dim and bond_dim must be >= 1, got {self.phys_dim} and {self.bond_dim}"
            )
        if self.output_dim is not None and self.output_dim < 1:
            raise DimensionError(f"output_dim must be >= 1 or None, got {self.output_dim}")

    def unit_shapes(self) -> list[tuple[int, ...]]:
        """Unit shapes in site order, boundary bonds pinned to extent 1."""
        left = [1] + [self.bond_dim] * (self.sites - 1)
        right = [self.bond_dim] * (self.sites - 1) + [1]
        shapes: list[tuple[int, ...]] = [
            (left[j], self.phys_dim, right[j]) for j in range(self.sites)
        ]
        if self.output_dim is not None:
            shapes[-1] = shapes[-1] + (self.output_dim,)
        return shapes


class Mps:
    """Chain of units with validated bond wiring.

    Units are coerced to float64. Validation pins the open boundary
    (extent-1 outer bonds), matching adjacent bond extents, and allows a
    rank-4 unit only in the last position.
    """

    def __init__(self, units) -> None:
        if not units:
            raise DimensionError("a chain needs at least one unit")
        arrays = [np.asarray(u, dtype=np.float64) for u in units]
        last = len(arrays) - 1
        for j, u in enumerate(arrays):
            if u.ndim == 4 and j == last:
                continue
            if u.ndim != 3:
                raise DimensionError(
                    f"unit {j} has rank {u.ndim}; expected 3 (or 4 at the last site)"
                )
        if arrays[0].shape[0] != 1:
            raise DimensionError(
                f"left boundary bond must have extent 1, got {arrays[0].shape[0]}"
            )
        if arrays[last].shape[2] != 1:
            raise DimensionError(
                f"right boundary bond must have extent 1, got {arrays[last].shape[2]}"
            )
        for j in range(last):
            if arrays[j].shape[2] != arrays[j + 1].shape[0]:
                raise DimensionError(
                    f"bond between units {j} and {j + 1} has extents "
                    f"{arrays[j].shape[2]} vs {arrays[j + 1].shape[0]}"
                )
        self.units = arrays

    @property
    def num_sites(self) -> int:
        return len(self.units)

    @property
    def phys_dims(self) -> tuple[int, ...]:
        return tuple(u.shape[1] for u in self.units)

    @property
    def output_dim(self) -> int | None:
        last = self.units[-1]
        return last.shape[3] if last.ndim == 4 else None

    def unit_shapes(self) -> list[tuple[int, ...]]:
        return [u.shape for u in self.units]


def random_mps(spec: MpsSpec) -> Mps:
    """Draw every unit entry i.i.d. uniform on [-1, 1).

    The same spec (including seed) always produces bit-identical units.
    """
    rng = np.random.default_rng(spec.seed)
    return Mps([rng.uniform(-1.0, 1.0, size=shape) for shape in spec.unit_shapes()])


def mps_to_full_tensor(m: Mps, max_elements: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Expand a chain into the dense tensor it represents.

    The result has one axis per site (the physical axes in site order)
    plus a trailing output axis when the last unit carries one. Intended
    as a brute-force oracle for small chains; the result size is capped.

    Raises:
        OracleCapError: the dense result would exceed `max_elements`.
    """
    elements = 1
    for k in m.phys_dims:
        elements *= k
    if m.output_dim is not None:
        elements *= m.output_dim
    if elements > max_elements:
        raise OracleCapError(
            f"dense expansion needs {elements} elements, cap is {max_elements}"
        )
    t = m.units[0][0]  # drop the left boundary axis: (k, right)
    for u in m.units[1:]:
        t = np.tensordot(t, u, axes=([t.ndim - 1], [0]))
    # drop the right boundary axis (position L when rank-3 ends the chain,
    # or just before the output axis otherwise)
    if m.output_dim is None:
        return t[..., 0]
    return np.squeeze(t, axis=t.ndim - 2)


def _check_pair(core: Mps, sample: Mps) -> None:
    if core.num_sites != sample.num_sites:
        raise DimensionError(
            f"site counts differ: {core.num_sites} vs {sample.num_sites}"
        )
    for j, (kc, ks) in enumerate(zip(core.phys_dims, sample.phys_dims)):
        if kc != ks:
            raise DimensionError(
                f"physical extents differ at site {j}: {kc} vs {ks}"
            )
    if sample.output_dim is not None:
        raise DimensionError("sample chain must not carry an output leg")


def inner_product(core: Mps, sample: Mps, meter=None):
    """Contract two chains over all physical axes.

    Per site, the physical bond is contracted first, fusing the two bond
    pairs into one transfer matrix of shape (Vl*Dl, Vr*Dr); the transfer
    chain is then swept left to right. Returns a float, or a vector of
    shape (output_dim,) when the core's last unit has an output leg.

    `meter`, when given, records every dense array this call allocates
    and releases (an ElementMeter).
    """
    _check_pair(core, sample)
    transfers = []
    for cu, iu in zip(core.units, sample.units):
        t = np.tensordot(cu, iu, axes=([1], [1]))
        if meter is not None:
            meter.alloc(t)
        if cu.ndim == 3:
            # (Vl, Vr, Dl, Dr) -> (Vl*Dl, Vr*Dr)
            fused = t.transpose(0, 2, 1, 3).reshape(
                cu.shape[0] * iu.shape[0], cu.shape[2] * iu.shape[2]
            )
        else:
            # (Vl, Vr, O, Dl, Dr) -> (Vl*Dl, Vr*Dr*O); Vr = Dr = 1 here
            fused = t.transpose(0, 3, 1, 4, 2).reshape(
                cu.shape[0] * iu.shape[0], cu.shape[2] * iu.shape[2] * cu.shape[3]
            )
        if meter is not None and not np.shares_memory(fused, t):
            meter.alloc(fused)
            meter.free(t)
        transfers.append(fused)
    env = transfers[0]
    for t in transfers[1:]:
        nxt = env @ t
        if meter is not None:
            meter.alloc(nxt)
            if env is not transfers[0]:
                meter.free(env)
        env = nxt
    if core.output_dim is None:
        result = float(env[0, 0])
    else:
        result = env[0].copy()
    if meter is not None:
        if env is not transfers[0]:
            meter.free(env)
        for t in transfers:
            meter.free(t)
    return result


def mps_to_json_dict(m: Mps) -> dict:
    return {
        "version": MPS_JSON_VERSION,
        "L": m.num_sites,
        "units": [
            {"shape": list(u.shape), "data": u.ravel(order="C").tolist()}
            for u in m.units
        ],
    }


def unit_from_json_dict(d: dict) -> np.ndarray:
    shape = tuple(int(x) for x in d["shape"])
    data = np.asarray(d["data"], dtype=np.float64)
    expected = int(np.prod(shape, dtype=np.int64)) if shape else 1
    if data.size != expected:
        raise ValueError(
            f"unit data length {data.size} does not match shape {shape}"
        )
    return data.reshape(shape)


def mps_from_json_dict(d: dict) -> Mps:
    version = d.get("version")
    if version != MPS_JSON_VERSION:
        raise ValueError(
            f"unsupported chain format version {version!r}, expected {MPS_JSON_VERSION!r}"
        )
    units = [unit_from_json_dict(u) for u in d["units"]]
    if len(units) != int(d["L"]):
        raise ValueError(f"L={d['L']} but {len(units)} units present")
    return Mps(units)


def save_mps_json(m: Mps, path) -> None:
    """Write a chain as JSON; float64 values round-trip exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mps_to_json_dict(m), fh)
        fh.write("\n")


def load_mps_json(path) -> Mps:
    with open(path, "r", encoding="utf-8") as fh:
        return mps_from_json_dict(json.load(fh))
