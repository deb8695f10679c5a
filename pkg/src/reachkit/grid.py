"""Cartesian grids, multilinear interpolation and value fields.

A value field stores one scalar per node of a rectangular lattice,
row-major with the last dimension fastest.  Between nodes the field is
evaluated by multilinear interpolation over the 2^d corners of the
enclosing cell; queries outside the domain are clamped to it
componentwise, and batch lookups report how many points needed
clamping so an undersized domain shows up in the run diagnostics.

All arithmetic is 64-bit.  The interpolation accumulates the corner
sum left to right with nonnegative weights, so raising any corner
value can never lower the result; the recursion in the solver module
relies on that monotonicity.
"""

import os

import numpy as np

from .errors import UsageError

MODES = ("minimize", "maximize")


class Grid:
    """Node lattice over a box-shaped domain.

    Parameters
    ----------
    bounds : sequence of (lo, hi) pairs, one per dimension
    dims : sequence of node counts, each >= 2

    Spacing in dimension i is (hi - lo) / (dims[i] - 1).  Node 0 sits
    exactly on the lower bound and node dims[i]-1 exactly on the upper
    bound (axes come from np.linspace, which pins both endpoints).
    """

    def __init__(self, bounds, dims):
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        dims = tuple(int(n) for n in dims)
        if len(bounds) == 0:
            raise UsageError("grid needs at least one dimension")
        if len(bounds) != len(dims):
            raise UsageError(
                f"grid has {len(bounds)} bounds but {len(dims)} node counts"
            )
        for j, ((lo, hi), n) in enumerate(zip(bounds, dims)):
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise UsageError(f"grid bounds must satisfy lo < hi (dimension {j})")
            if n < 2:
                raise UsageError(f"grid needs at least 2 nodes per dimension (dimension {j})")
        self.bounds = bounds
        self.dims = dims
        self.lo = np.array([b[0] for b in bounds])
        self.hi = np.array([b[1] for b in bounds])
        self.spacing = (self.hi - self.lo) / (np.asarray(dims, dtype=float) - 1.0)
        self.axes = tuple(
            np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, dims)
        )
        self._node_matrix = None

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def n_nodes(self):
        return int(np.prod(self.dims))

    def node_matrix(self):
        """All node coordinates as an (n_nodes, ndim) array, C order.

        Cached; treat the result as read-only.
        """
        if self._node_matrix is None:
            mesh = np.meshgrid(*self.axes, indexing="ij")
            self._node_matrix = np.stack([m.ravel() for m in mesh], axis=1)
        return self._node_matrix

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.bounds == other.bounds
            and self.dims == other.dims
        )

    def __repr__(self):
        return f"Grid(bounds={list(self.bounds)}, dims={list(self.dims)})"


def node_coordinate(grid, idx):
    """Coordinate of the node at the given index tuple."""
    idx = tuple(int(i) for i in np.atleast_1d(idx))
    if len(idx) != grid.ndim:
        raise UsageError(f"index has {len(idx)} entries, grid has {grid.ndim} dimensions")
    for j, (i, n) in enumerate(zip(idx, grid.dims)):
        if i < 0 or i >= n:
            raise UsageError(f"node index {i} out of range [0, {n}) in dimension {j}")
    return np.array([grid.axes[j][i] for j, i in enumerate(idx)])


def saturation_value(dt, k):
    """The bound k*dt that a node which never reaches the target holds.

    Computed as a single rounded product so the bound is the closest
    double to the exact value; the solver keeps saturated nodes pinned
    to this number bitwise.
    """
    return float(np.float64(k) * np.float64(dt))


class ValueField:
    """Scalar field over a grid plus the metadata the recursion needs.

    values are stored as a C-contiguous float64 array shaped like
    grid.dims.  mode records which optimum built the field, dt the step
    length and k how many recursion steps produced it, so the covered
    horizon is k*dt.
    """

    def __init__(self, grid, values, mode, dt, k):
        if mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {mode!r}")
        dt = float(dt)
        k = int(k)
        if dt <= 0:
            raise UsageError("dt must be positive")
        if k < 0:
            raise UsageError("recursion count k cannot be negative")
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape != tuple(grid.dims):
            raise UsageError(
                f"values shaped {values.shape} do not match grid dims {tuple(grid.dims)}"
            )
        if not np.isfinite(values).all():
            raise UsageError("value field contains non-finite entries")
        self.grid = grid
        self.values = values
        self.mode = mode
        self.dt = dt
        self.k = k

    def horizon(self):
        """Accumulated horizon k*dt covered by this field."""
        return saturation_value(self.dt, self.k)

    def __repr__(self):
        return (
            f"ValueField(dims={list(self.grid.dims)}, mode={self.mode!r}, "
            f"dt={self.dt}, k={self.k})"
        )


def zero_field(grid, mode, dt):
    """The recursion's starting point: all nodes exactly zero, k=0."""
    return ValueField(grid, np.zeros(grid.dims), mode, dt, 0)


def _locate(grid, pts):
    """Cell indices and fractional offsets for a batch of query points.

    Returns (i0, frac, n_clamped) where i0[:, j] is the lower corner
    index along dimension j (capped at dims[j]-2 so i0+1 stays valid),
    frac in [0, 1] is the offset inside the cell, and n_clamped counts
    points with any component outside the domain.
    """
    d = grid.ndim
    n = pts.shape[0]
    i0 = np.empty((n, d), dtype=np.intp)
    frac = np.empty((n, d))
    outside = np.zeros(n, dtype=bool)
    for j in range(d):
        x = pts[:, j]
        lo, hi = grid.bounds[j]
        outside |= (x < lo) | (x > hi)
        t = (x - lo) / grid.spacing[j]
        np.clip(t, 0.0, grid.dims[j] - 1.0, out=t)
        cell = np.floor(t).astype(np.intp)
        np.minimum(cell, grid.dims[j] - 2, out=cell)
        i0[:, j] = cell
        frac[:, j] = t - cell
    return i0, frac, int(np.count_nonzero(outside))


def interpolate_many(field, pts):
    """Multilinear interpolation at many points.

    Parameters
    ----------
    field : ValueField
    pts : (n, ndim) array of query states

    Returns
    -------
    (values, n_clamped) : interpolated values and the number of query
    points that lay outside the domain and were clamped onto it.

    Cells whose corners all hold the same value return that value
    bitwise (no weight arithmetic), which keeps saturated regions of a
    value field exact.
    """
    grid = field.grid
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != grid.ndim:
        raise UsageError(f"expected points shaped (n, {grid.ndim}), got {pts.shape}")
    flat = field.values.ravel()
    i0, frac, n_clamped = _locate(grid, pts)
    d = grid.ndim
    # strides of the C-order flattening
    strides = np.empty(d, dtype=np.intp)
    strides[-1] = 1
    for j in range(d - 2, -1, -1):
        strides[j] = strides[j + 1] * grid.dims[j + 1]
    omf = 1.0 - frac
    base = i0 @ strides
    acc = np.zeros(pts.shape[0])
    cmin = None
    cmax = None
    for corner in range(1 << d):
        offset = 0
        w = None
        for j in range(d):
            if corner & (1 << (d - 1 - j)):
                offset += strides[j]
                wj = frac[:, j]
            else:
                wj = omf[:, j]
            w = wj.copy() if w is None else w * wj
        vals = flat[base + offset]
        if cmin is None:
            cmin, cmax = vals, vals
        else:
            cmin = np.minimum(cmin, vals)
            cmax = np.maximum(cmax, vals)
        acc += w * vals
    out = np.where(cmin == cmax, cmin, acc)
    return out, n_clamped


def interpolate(field, s):
    """Field value at a single state, or at each row of an (n, d) array.

    Out-of-domain queries are clamped to the domain componentwise, so
    interpolate(field, s) == interpolate(field, clamp(s)).
    """
    s = np.asarray(s, dtype=np.float64)
    single = s.ndim == 1
    pts = np.atleast_2d(s)
    vals, _ = interpolate_many(field, pts)
    return float(vals[0]) if single else vals


def level_mask(field, threshold, relation):
    """Boolean node mask: value <= threshold (relation "<=") or >= (">=").

    Comparisons are non-strict on purpose; set extraction in the solver
    documents the consequences for boundary nodes.
    """
    if relation == "<=":
        return field.values <= threshold
    if relation == ">=":
        return field.values >= threshold
    raise UsageError(f'relation must be "<=" or ">=", got {relation!r}')


# ---------------------------------------------------------------------------
# value-field file format
#
# Five ASCII header lines followed by the raw node values:
#   dims n1 ... nd
#   bounds lo1 hi1 ... lod hid
#   mode minimize|maximize
#   dt <float>
#   k <int>
# then n1*...*nd little-endian float64 values in storage order
# (row-major, last dimension fastest).  Floats in the header use the
# shortest decimal form that round-trips, so load(save(f)) is exact.
# ---------------------------------------------------------------------------


def save_field(field, path):
    """Write a value field to disk; the write is atomic (temp + rename)."""
    header = "dims " + " ".join(str(n) for n in field.grid.dims) + "\n"
    header += "bounds " + " ".join(
        f"{repr(float(lo))} {repr(float(hi))}" for lo, hi in field.grid.bounds
    ) + "\n"
    header += f"mode {field.mode}\n"
    header += f"dt {repr(float(field.dt))}\n"
    header += f"k {field.k}\n"
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(payload)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _header_line(raw, key, path):
    end = raw.find(b"\n")
    if end < 0:
        raise UsageError(f"{path}: truncated header, missing {key!r} line")
    line = raw[:end].decode("ascii", errors="replace")
    parts = line.split()
    if not parts or parts[0] != key:
        raise UsageError(f"{path}: expected header line {key!r}, found {line!r}")
    return parts[1:], raw[end + 1:]


def load_field(path):
    """Read a value field written by save_field."""
    with open(path, "rb") as fh:
        raw = fh.read()
    dims, raw = _header_line(raw, "dims", path)
    bounds, raw = _header_line(raw, "bounds", path)
    mode, raw = _header_line(raw, "mode", path)
    dt, raw = _header_line(raw, "dt", path)
    k, raw = _header_line(raw, "k", path)
    try:
        dims = [int(n) for n in dims]
        pairs = [float(b) for b in bounds]
        dt = float(dt[0])
        k = int(k[0])
    except (ValueError, IndexError) as exc:
        raise UsageError(f"{path}: malformed header value ({exc})") from exc
    if len(pairs) != 2 * len(dims):
        raise UsageError(f"{path}: bounds line does not match dims line")
    if len(mode) != 1 or mode[0] not in MODES:
        raise UsageError(f"{path}: bad mode line")
    grid = Grid(list(zip(pairs[0::2], pairs[1::2])), dims)
    count = grid.n_nodes
    values = np.frombuffer(raw, dtype="<f8", count=-1)
    if values.size != count:
        raise UsageError(
            f"{path}: payload holds {values.size} values, header promises {count}"
        )
    return ValueField(grid, values.reshape(dims).copy(), mode[0], dt, k)
