"""Target sets as membership oracles.

The recursion never needs a distance function, only the answer to "is
this state inside K".  Four representations cover the use cases: axis
aligned boxes (closed), finite unions, voxel masks for irregular
shapes, and complements.  Complements negate membership over all of
R^d; anything set-valued computed downstream is still only reported
within the solver's grid domain.
"""

import os

import numpy as np

from .errors import UsageError


class TargetSet:
    """Base class; subclasses implement vectorized membership."""

    dim = None

    def contains_many(self, pts):
        """Membership for each row of an (n, dim) array."""
        raise NotImplementedError

    def contains(self, s):
        s = np.asarray(s, dtype=np.float64)
        if s.ndim != 1 or s.shape[0] != self.dim:
            raise UsageError(
                f"state has shape {s.shape}, target expects vectors of length {self.dim}"
            )
        return bool(self.contains_many(s.reshape(1, -1))[0])

    def _check(self, pts):
        pts = np.asarray(pts, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise UsageError(
                f"expected points shaped (n, {self.dim}), got {pts.shape}"
            )
        return pts


class Box(TargetSet):
    """Closed axis-aligned box: lo <= s_i <= hi in every dimension."""

    def __init__(self, intervals):
        intervals = tuple((float(lo), float(hi)) for lo, hi in intervals)
        if not intervals:
            raise UsageError("box needs at least one interval")
        for j, (lo, hi) in enumerate(intervals):
            if hi < lo:
                raise UsageError(f"box interval {j} has lo > hi")
        self.intervals = intervals
        self.dim = len(intervals)
        self._lo = np.array([iv[0] for iv in intervals])
        self._hi = np.array([iv[1] for iv in intervals])

    def contains_many(self, pts):
        pts = self._check(pts)
        return np.all((pts >= self._lo) & (pts <= self._hi), axis=1)

    def __repr__(self):
        return f"Box({list(self.intervals)})"


class UnionSet(TargetSet):
    """Union of member sets; membership is the OR of the members."""

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise UsageError("union needs at least one member set")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise UsageError(f"union members disagree on dimension: {sorted(dims)}")
        self.members = members
        self.dim = members[0].dim

    def contains_many(self, pts):
        pts = self._check(pts)
        out = self.members[0].contains_many(pts)
        for m in self.members[1:]:
            out = out | m.contains_many(pts)
        return out

    def __repr__(self):
        return f"UnionSet({list(self.members)})"


class Complement(TargetSet):
    """Everything outside the inner set (complement over all of R^d)."""

    def __init__(self, inner):
        self.inner = inner
        self.dim = inner.dim

    def contains_many(self, pts):
        return ~self.inner.contains_many(pts)

    def __repr__(self):
        return f"Complement({self.inner!r})"


class VoxelMask(TargetSet):
    """Irregular set built from marked cells of a rectangular region.

    The region is split into cells_per_dim[i] equal cells per
    dimension.  Cells are half-open (closed below, open above) so every
    interior state belongs to exactly one cell; the last cell in each
    dimension is closed above so the region's upper face is covered.
    States outside the region are never members.
    """

    def __init__(self, bounds, cells_per_dim, bits):
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        cells = tuple(int(c) for c in cells_per_dim)
        if len(bounds) != len(cells):
            raise UsageError("voxel bounds and cell counts must have the same length")
        for j, ((lo, hi), c) in enumerate(zip(bounds, cells)):
            if hi <= lo:
                raise UsageError(f"voxel bounds must satisfy lo < hi (dimension {j})")
            if c < 1:
                raise UsageError(f"need at least one cell per dimension (dimension {j})")
        bits = np.ascontiguousarray(bits, dtype=bool)
        if bits.shape != cells:
            raise UsageError(
                f"bit array shaped {bits.shape} does not match cells {cells}"
            )
        self.bounds = bounds
        self.cells_per_dim = cells
        self.bits = bits
        self.dim = len(bounds)
        self._lo = np.array([b[0] for b in bounds])
        self._hi = np.array([b[1] for b in bounds])
        self._width = (self._hi - self._lo) / np.asarray(cells, dtype=float)

    def cell_of(self, s):
        """Index tuple of the cell containing an in-bounds state."""
        s = np.asarray(s, dtype=np.float64)
        idx = np.floor((s - self._lo) / self._width).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.cells_per_dim) - 1)
        return tuple(idx)

    def contains_many(self, pts):
        pts = self._check(pts)
        inside = np.all((pts >= self._lo) & (pts <= self._hi), axis=1)
        out = np.zeros(pts.shape[0], dtype=bool)
        if not inside.any():
            return out
        idx = np.floor((pts[inside] - self._lo) / self._width).astype(np.intp)
        # states exactly on the upper face fall into the last cell
        np.clip(idx, 0, np.asarray(self.cells_per_dim) - 1, out=idx)
        out[inside] = self.bits[tuple(idx.T)]
        return out

    def __repr__(self):
        marked = int(np.count_nonzero(self.bits))
        return (
            f"VoxelMask(cells={list(self.cells_per_dim)}, marked={marked})"
        )


def contains(target, s):
    """Membership of a single state in a target set."""
    return target.contains(s)


def voxel_from_cells(bounds, cells_per_dim, marked_cells):
    """Build a voxel mask with exactly the listed cells set."""
    cells = tuple(int(c) for c in cells_per_dim)
    bits = np.zeros(cells, dtype=bool)
    for tup in marked_cells:
        tup = tuple(int(i) for i in tup)
        if len(tup) != len(cells):
            raise UsageError(f"cell index {tup} has wrong length")
        for j, (i, c) in enumerate(zip(tup, cells)):
            if i < 0 or i >= c:
                raise UsageError(
                    f"cell index {tup} out of range in dimension {j} (0..{c - 1})"
                )
        bits[tup] = True
    return VoxelMask(bounds, cells, bits)


def complement_within(target):
    """Complement of a target set; double complement collapses."""
    if isinstance(target, Complement):
        return target.inner
    return Complement(target)


# ---------------------------------------------------------------------------
# voxel-mask text format
#
#   dims n1 ... nd
#   bounds lo1 hi1 ... lod hid
#   one line of 0/1 characters per hyper-row, last dimension fastest
# ---------------------------------------------------------------------------


def save_voxel_mask(mask, path):
    """Write a voxel mask; load_voxel_mask returns a bit-exact copy."""
    lines = ["dims " + " ".join(str(c) for c in mask.cells_per_dim)]
    lines.append(
        "bounds "
        + " ".join(f"{repr(float(lo))} {repr(float(hi))}" for lo, hi in mask.bounds)
    )
    rows = mask.bits.reshape(-1, mask.cells_per_dim[-1])
    for row in rows:
        lines.append("".join("1" if b else "0" for b in row))
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def load_voxel_mask(path):
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("dims ") or not lines[1].startswith("bounds "):
        raise UsageError(f"{path}: expected 'dims' then 'bounds' header lines")
    try:
        cells = [int(t) for t in lines[0].split()[1:]]
        vals = [float(t) for t in lines[1].split()[1:]]
    except ValueError as exc:
        raise UsageError(f"{path}: malformed header ({exc})") from exc
    if len(vals) != 2 * len(cells):
        raise UsageError(f"{path}: bounds line does not match dims line")
    bounds = list(zip(vals[0::2], vals[1::2]))
    n_rows = int(np.prod(cells[:-1])) if len(cells) > 1 else 1
    body = lines[2:]
    if len(body) != n_rows:
        raise UsageError(f"{path}: expected {n_rows} bit rows, found {len(body)}")
    width = cells[-1]
    bits = np.empty((n_rows, width), dtype=bool)
    for r, row in enumerate(body):
        if len(row) != width or set(row) - {"0", "1"}:
            raise UsageError(f"{path}: bit row {r} is not {width} chars of 0/1")
        bits[r] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) == ord("1")
    return VoxelMask(bounds, cells, bits.reshape(cells))
