"""OPT(A) by enumeration, the semidefinite relaxation by low-rank block
coordinate ascent, and matrix / report file I/O.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import math

import numpy as np

from .errors import InvalidArgument, NumericError, ParseError

MAX_BRUTE = 26


@dataclass(frozen=True, eq=False)
class BilinearProblem:
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.size == 0:
            raise InvalidArgument("matrix must be 2-D and nonempty")
        if not np.all(np.isfinite(A)):
            raise InvalidArgument("matrix entries must be finite")
        object.__setattr__(self, "A", A)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    def value(self, eps, delta):
        return float(np.asarray(eps, dtype=float) @ self.A @ np.asarray(delta, dtype=float))


@dataclass
class GramSolution:
    X: np.ndarray   # m x d, unit rows
    Y: np.ndarray   # n x d, unit rows
    objective: float
    sweeps: int = 0
    restarts: int = 1
    degenerate: bool = False
    history: list = field(default_factory=list)

    def recompute(self, A):
        return float(np.sum(A * (self.X @ self.Y.T)))


def _signs(v):
    return np.where(v >= 0, 1, -1).astype(np.int8)


def brute_force_opt(prob):
    """Exact max of sum a_ij e_i d_j, enumerating signs of the smaller side.

    Returns (value, row signs, column signs). The other side is the sign of
    its linear form, ties to +1.
    """
    m, n = prob.m, prob.n
    if m + n > MAX_BRUTE:
        raise InvalidArgument(f"brute force needs m + n <= {MAX_BRUTE}")
    A = prob.A
    transpose = n < m
    B = A.T if transpose else A
    k = B.shape[0]
    # all sign vectors with the first sign fixed at +1 (value(-e) = value(e))
    codes = np.arange(2 ** (k - 1), dtype=np.int64)
    bits = (codes[:, None] >> np.arange(k - 1)) & 1
    E = np.concatenate([np.ones((codes.size, 1)), 1 - 2 * bits], axis=1)
    L = E @ B
    vals = np.sum(np.abs(L), axis=1)
    best = int(np.argmax(vals))
    e = E[best].astype(np.int8)
    d = _signs(L[best])
    if transpose:
        e, d = d, e
    return prob.value(e, d), e, d


def _orthonormal_start(rng, rows, d):
    V = rng.standard_normal((rows, d))
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _ascent(A, X, Y, sweeps, tol):
    """Alternate X <- normalize(A Y), Y <- normalize(A^T X); objective never decreases."""
    obj = float(np.sum(A * (X @ Y.T)))
    scale = float(np.sum(np.abs(A)))
    history = [obj]
    done = 0
    for done in range(1, sweeps + 1):
        for left in (True, False):
            G = A @ Y if left else A.T @ X
            norms = np.linalg.norm(G, axis=1)
            live = norms > 1e-300
            if left:
                X = X.copy()
                X[live] = G[live] / norms[live, None]
            else:
                Y = Y.copy()
                Y[live] = G[live] / norms[live, None]
        new = float(np.sum(A * (X @ Y.T)))
        if new < obj - 1e-12 * scale:
            raise NumericError(f"ascent objective decreased: {obj} -> {new}")
        history.append(new)
        if new - obj <= tol * max(1.0, abs(new)):
            obj = new
            break
        obj = new
    return X, Y, obj, done, history


def _sign_start(prob, d):
    """Rank-one vectors from a good sign assignment: exact when brute force is cheap."""
    if prob.m + prob.n <= 20:
        _, e, dl = brute_force_opt(prob)
    else:
        # power-iteration signs followed by alternating sign improvement
        u, _, vt = np.linalg.svd(prob.A)
        e = _signs(u[:, 0])
        for _ in range(100):
            dl = _signs(e @ prob.A)
            e2 = _signs(prob.A @ dl)
            if np.array_equal(e2, e):
                break
            e = e2
        dl = _signs(e @ prob.A)
    X = np.zeros((prob.m, d))
    Y = np.zeros((prob.n, d))
    X[:, 0] = e
    Y[:, 0] = dl
    return X, Y


def solve_sdp(prob, d=None, sweeps=2000, tol=1e-13, restarts=8, seed=0, workers=1):
    """SDP(A) = max sum a_ij <x_i, y_j> over unit vectors, by block coordinate ascent.

    Restart 0 starts from the rank-one embedding of a sign solution, so the
    estimate is never below that sign value; restarts r >= 1 start from
    random unit vectors seeded by (seed, r). The best restart wins, ties to
    the lowest index.
    """
    m, n = prob.m, prob.n
    need = min(m + n, math.ceil(math.sqrt(2 * (m + n))))
    d = m + n if d is None else int(d)
    if d < need:
        raise InvalidArgument(f"rank must be at least {need}")
    if sweeps < 1 or restarts < 1:
        raise InvalidArgument("sweeps and restarts must be positive")
    A = prob.A
    if not np.any(A):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
        return GramSolution(_orthonormal_start(rng, m, d), _orthonormal_start(rng, n, d), 0.0,
                            0, restarts, True)

    def run(r):
        if r == 0:
            X, Y = _sign_start(prob, d)
        else:
            rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
            X, Y = _orthonormal_start(rng, m, d), _orthonormal_start(rng, n, d)
        return _ascent(A, X, Y, sweeps, tol)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        results = list(ex.map(run, range(restarts)))
    best = max(range(restarts), key=lambda r: (results[r][2], -r))
    X, Y, obj, done, history = results[best]
    return GramSolution(X, Y, obj, done, restarts, False, history)


# ---------------------------------------------------------------- files

def parse_matrix(text, name="<matrix>"):
    lines = text.splitlines()
    rows = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise ParseError(f"{name}: empty matrix file", line=1)
    ln, head = rows[0]
    if len(head) != 2:
        raise ParseError("header must be 'm n'", line=ln)
    try:
        m, n = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("header must contain two integers", line=ln) from None
    if m < 1 or n < 1:
        raise ParseError("dimensions must be positive", line=ln)
    body = rows[1:]
    if len(body) != m:
        raise ParseError(f"expected {m} rows, found {len(body)}",
                         line=body[-1][0] if len(body) > m else len(lines) + 1)
    A = np.empty((m, n))
    for i, (ln, toks) in enumerate(body):
        if len(toks) != n:
            raise ParseError(f"expected {n} entries, found {len(toks)}", line=ln)
        for j, t in enumerate(toks):
            try:
                v = float(t.replace("−", "-"))
            except ValueError:
                raise ParseError(f"not a number: {t!r}", line=ln) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite entry {t!r}", line=ln)
            A[i, j] = v
    return BilinearProblem(A)


def load_matrix(path):
    with open(path) as fh:
        return parse_matrix(fh.read(), str(path))


def format_matrix(prob):
    lines = [f"{prob.m} {prob.n}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in prob.A]
    return "\n".join(lines) + "\n"


def save_matrix(path, prob):
    with open(path, "w") as fh:
        fh.write(format_matrix(prob))


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")


def save_report(path, report):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def sdp_report(prob, sol, opt=None, seed=0):
    rep = {"sdp": sol.objective, "seeds": [seed, sol.restarts], "sweeps": sol.sweeps}
    if opt is not None:
        rep["opt"] = opt
        rep["ratio"] = sol.objective / opt if opt else None
    return rep


def random_problem(m, n, seed, kind="gaussian"):
    rng = np.random.default_rng(seed)
    if kind == "sign":
        return BilinearProblem(np.where(rng.random((m, n)) < 0.5, -1.0, 1.0))
    return BilinearProblem(rng.standard_normal((m, n)))
