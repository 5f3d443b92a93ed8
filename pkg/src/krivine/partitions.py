"""Sign partitions of R and R^2, the sigma operator and the tiger iteration.

Grid functions live on N x N cell centers of [-R, R]^2; values[i, j] is the
sign at (x1_i, x2_j). Outside the square they extend by clamping to the
nearest cell.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import InvalidArgument, NumericError
from .hermite import hermite, odd_hermite_combination
from .quad import legendre_panel

H5_ALPHA = (0.0, 0.0, 1.0)  # coefficients of h1, h3, h5
TRUNCATION = 12.0


def _sign(v):
    return np.where(v >= 0, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class Halfplane:
    """sign of the last coordinate."""

    k: int = 2

    def curve(self, x1):
        return np.zeros_like(np.asarray(x1, dtype=float))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return _sign(x if self.k == 1 else x[..., -1])


@dataclass(frozen=True)
class OddGraph:
    """sign(x2 - eta*alpha(x1)) in the plane, sign(x - eta*alpha(x)) on the line.

    alpha[j] multiplies the odd Hermite polynomial h_{2j+1}.
    """

    eta: float
    alpha: tuple = H5_ALPHA
    k: int = 2

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if self.k not in (1, 2):
            raise InvalidArgument("dimension must be 1 or 2")

    def curve(self, x1):
        return self.eta * odd_hermite_combination(self.alpha, x1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.k == 1:
            return _sign(x - self.curve(x))
        return _sign(x[..., 1] - self.curve(x[..., 0]))

    def polynomial(self):
        """Monomial coefficients (ascending) of eta*alpha."""
        c = np.zeros(2 * len(self.alpha))
        for j, a in enumerate(self.alpha):
            hc = hermite(2 * j + 1).coeffs
            c[: hc.size] += a * hc
        return self.eta * c


@dataclass(frozen=True, eq=False)
class GridFunction:
    R: float
    values: np.ndarray
    odd: bool = False
    k: int = field(default=2, init=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidArgument("grid values must be a square array")
        if v.shape[0] < 16:
            raise InvalidArgument("grid resolution must be at least 16")
        if self.R <= 0:
            raise InvalidArgument("extent must be positive")
        if not np.all(np.abs(v) == 1):
            raise InvalidArgument("grid values must be +1 or -1")
        object.__setattr__(self, "values", v.astype(np.int8))
        if self.odd and not np.array_equal(self.values, -self.values[::-1, ::-1]):
            raise InvalidArgument("grid flagged odd but values are not antisymmetric")

    @property
    def N(self):
        return self.values.shape[0]

    def centers(self):
        return cell_centers(self.R, self.N)

    def index(self, t):
        h = 2.0 * self.R / self.N
        return np.clip(np.floor((np.asarray(t) + self.R) / h), 0, self.N - 1).astype(int)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.values[self.index(x[..., 0]), self.index(x[..., 1])]

    def __eq__(self, other):
        return (isinstance(other, GridFunction) and self.R == other.R
                and np.array_equal(self.values, other.values))

    def __neg__(self):
        return GridFunction(self.R, -self.values, self.odd)


GridSampled = GridFunction


def cell_centers(R, N):
    h = 2.0 * R / N
    c = -R + h * (np.arange(N) + 0.5)
    return 0.5 * (c - c[::-1])


def eval_partition(f, x):
    """Sign of f at a point or an array of points (last axis = coordinates)."""
    return f(x)


def sample(f, R, N):
    """GridFunction of f at the cell centers of [-R, R]^2."""
    if isinstance(f, GridFunction) and f.R == R and f.N == N:
        return f
    c = cell_centers(R, N)
    X1, X2 = np.meshgrid(c, c, indexing="ij")
    vals = f(np.stack([X1, X2], axis=-1))
    odd = isinstance(f, (Halfplane, OddGraph)) or getattr(f, "odd", False)
    odd = odd and np.array_equal(vals, -vals[::-1, ::-1])
    return GridFunction(R, vals, odd)


def random_grid(R, N, seed, odd=True):
    rng = np.random.default_rng(seed)
    v = np.where(rng.random((N, N)) < 0.5, -1, 1).astype(np.int8)
    if odd:
        if N % 2:
            raise InvalidArgument("odd extension needs an even resolution")
        v[:, N // 2:] = -v[::-1, N // 2 - 1::-1]
    return GridFunction(R, v, odd)


def breakpoints_1d(f):
    """Sign changes of a 1-D partition inside [-12, 12], sorted."""
    if isinstance(f, Halfplane):
        return np.array([0.0])
    if isinstance(f, OddGraph):
        c = f.polynomial()
        c[1] -= 1.0  # eta*alpha(x) - x
        c = np.trim_zeros(c, "b")
        if c.size <= 1:
            return np.array([0.0])
        r = np.roots(c[::-1])
        r = np.sort(r[np.abs(r.imag) < 1e-9].real)
        r = r[np.abs(r) < TRUNCATION]
        # odd roots only: where the sign actually changes
        keep = []
        for x in r:
            lo, hi = f(np.array(x - 1e-9)), f(np.array(x + 1e-9))
            if lo != hi:
                keep.append(x)
        return np.array(keep)
    raise InvalidArgument(f"no 1-D breakpoints for {type(f).__name__}")


def pieces_1d(f, R=TRUNCATION):
    """Intervals of constant sign of f on [-R, R] as (left, right, sign)."""
    b = breakpoints_1d(f)
    edges = np.concatenate([[-R], b[(b > -R) & (b < R)], [R]])
    # probe each piece at a finite interior point
    fin = np.clip(edges, -TRUNCATION - 1.0, TRUNCATION + 1.0)
    mids = 0.5 * (fin[:-1] + fin[1:])
    return edges[:-1], edges[1:], f(mids).astype(float)


class GridKernel:
    """Cell-integrated discretization of exp(-(x^2+y^2)/2) e^{ixy} for one axis.

    K[a, b] integrates the kernel over cell a times cell b, with the cells
    outside [-R, R] (out to the truncation extent) folded onto the edge cells
    by the clamping rule. Then for grid functions F, G

        B_K(F, G) = sum(G * Im(K^T F K))

    exactly, and sigma(F) = sign(Im(K^T F K)) maximizes G -> B_K(F, G).
    """

    def __init__(self, R, N, extent=TRUNCATION, sub=3):
        self.R, self.N = float(R), int(N)
        h = 2.0 * R / N
        pad = max(0, int(math.ceil((extent - R) / h)))
        left = -R - pad * h
        n_all = N + 2 * pad
        lo = left + h * np.arange(n_all)
        x, w = legendre_panel(lo, lo + h, sub)
        gw = (w * np.exp(-0.5 * x * x)).ravel()
        x = x.ravel()
        idx = np.clip(np.arange(n_all) - pad, 0, N - 1)
        C = np.zeros((N, N))
        S = np.zeros((N, N))
        rows = 96 * sub
        for s in range(0, x.size, rows):
            xs = x[s:s + rows]
            ph = np.outer(xs, x)
            blk_c = (gw[s:s + rows, None] * np.cos(ph) * gw[None, :])
            blk_s = (gw[s:s + rows, None] * np.sin(ph) * gw[None, :])
            na = xs.size // sub
            blk_c = blk_c.reshape(na, sub, n_all, sub).sum(axis=(1, 3))
            blk_s = blk_s.reshape(na, sub, n_all, sub).sum(axis=(1, 3))
            ia = idx[s // sub:s // sub + na]
            fold_c = np.zeros((na, N))
            fold_s = np.zeros((na, N))
            np.add.at(fold_c.T, idx, blk_c.T)
            np.add.at(fold_s.T, idx, blk_s.T)
            np.add.at(C, ia, fold_c)
            np.add.at(S, ia, fold_s)
        self.C = 0.5 * (C + C.T)
        self.S = 0.5 * (S + S.T)

    def scale(self, F):
        """Same integral with |f| and |kernel|: the size rounding errors are relative to."""
        A = np.abs(np.asarray(F, dtype=float))
        aC, aS = np.abs(self.C), np.abs(self.S)
        return aC @ A @ aS + aS @ A @ aC

    def inner(self, F):
        """Im(K^T F K): the sigma integral integrated over each output cell."""
        F = np.asarray(F, dtype=float)
        return self.C @ F @ self.S + self.S @ F @ self.C

    def bk(self, F, G):
        return float(np.sum(np.asarray(G, dtype=float) * self.inner(F)))


@lru_cache(maxsize=8)
def grid_kernel(R, N):
    return GridKernel(R, N)


def _as_grid(f, R, N):
    if f.k != 2:
        raise InvalidArgument("sigma acts on partitions of the plane")
    return sample(f, R, N)


def sigma(f, R, N, tie_tol=1e-14, diagnostics=None):
    """sigma(f)(y) = sign of the integral of f(x) exp(-|x|^2/2) sin<x,y> over cell y.

    A cell is a tie when the integral is below tie_tol relative to the
    integral of |f| |kernel|; ties resolve to +1.
    """
    if N > 2048:
        raise InvalidArgument("resolution above 2048 is not supported")
    g = _as_grid(f, R, N)
    kern = grid_kernel(float(R), int(N))
    S = kern.inner(g.values)
    ties = np.abs(S) <= tie_tol * kern.scale(g.values)
    if diagnostics is not None:
        diagnostics["ties"] = diagnostics.get("ties", 0) + int(ties.sum())
    vals = np.where(S >= 0, 1, -1).astype(np.int8)
    vals[ties] = 1
    odd = g.odd and np.array_equal(vals, -vals[::-1, ::-1])
    return GridFunction(g.R, vals, odd)


def grid_bk(f, g, R, N):
    F = _as_grid(f, R, N).values
    G = _as_grid(g, R, N).values
    return grid_kernel(float(R), int(N)).bk(F, G)


def tiger_iterate(f0, steps, R, N, tol=1e-6):
    """Iterates sigma^1..sigma^steps of f0 and v_j = B_K(s^j, s^{j+1})/(4 pi)."""
    if steps > 200 or steps < 0:
        raise InvalidArgument("steps must be in [0, 200]")
    kern = grid_kernel(float(R), int(N))
    cur = _as_grid(f0, R, N)
    iterates, values = [], []
    prev_val = -math.inf
    for j in range(steps):
        nxt = sigma(cur, R, N)
        v = kern.bk(cur.values, nxt.values) / (4 * math.pi)
        if v < prev_val - tol:
            raise NumericError(f"tiger iteration decreased at step {j}: {prev_val} -> {v}")
        prev_val = v
        iterates.append(nxt)
        values.append(v)
        cur = nxt
    return iterates, values


def render_pgm(g, path):
    """Binary PGM: 255 where the grid is +1, row 0 at x2 = +R."""
    img = np.where(g.values.T[::-1, :] > 0, 255, 0).astype(np.uint8)
    header = f"P5\n{g.N} {g.N}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.tobytes())
    return path


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)
