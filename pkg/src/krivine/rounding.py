"""Two-step rounding: a Gram-matrix transform of the SDP vectors through the
inverse series, then a random Gaussian projection read off by the halfplane
or quintic-curve sign rule.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .errors import InvalidArgument, NumericError
from .sdp import brute_force_opt, solve_sdp, MAX_BRUTE

BLOCK = 4096  # trials per seed block; fixed so results do not depend on threads
CLIP_WARN = 1e-6
CLIP_FAIL = 1e-3


@dataclass
class PreprocessedVectors:
    U: np.ndarray   # m x d
    V: np.ndarray   # n x d
    clip: float     # magnitude of the most negative eigenvalue removed
    diagnostics: dict = field(default_factory=dict)


@dataclass
class RoundingResult:
    eps: np.ndarray
    delta: np.ndarray
    best_value: float
    mean: float
    stderr: float
    trials: int
    seed: int
    sdp: float
    guarantee_c: float
    opt: float = None

    @property
    def ratio_vs_sdp(self):
        return self.best_value / self.sdp if self.sdp else None

    def to_json(self):
        rep = {"best_value": self.best_value, "mean": self.mean, "stderr": self.stderr,
               "sdp": self.sdp, "ratio_vs_sdp": self.ratio_vs_sdp,
               "guarantee_c": self.guarantee_c, "seed": self.seed, "trials": self.trials,
               "eps": [int(e) for e in self.eps], "delta": [int(d) for d in self.delta]}
        if self.opt is not None:
            rep["opt"] = self.opt
        return rep


def _series_gram(inv, gamma, T, absolute):
    a = np.abs(inv.coeffs) if absolute else inv.coeffs
    k = np.arange(1, 2 * a.size, 2)
    # Horner in T^2 on sum a_k gamma^k T^k
    c = a * gamma ** k
    T2 = T * T
    out = np.zeros_like(T)
    for ck in c[::-1]:
        out = out * T2 + ck
    return out * T


def preprocess(sol, scheme):
    """Unit vectors u_r, v_s with <u_r, v_s> = sum a_k gamma^k <x_r, y_s>^k."""
    if not scheme.valid:
        raise InvalidArgument("scheme is flagged invalid")
    X, Y = sol.X, sol.Y
    m, n = X.shape[0], Y.shape[0]
    P = np.clip(X @ X.T, -1, 1)
    Q = np.clip(Y @ Y.T, -1, 1)
    C = np.clip(X @ Y.T, -1, 1)
    inv, g = scheme.inverse, scheme.gamma
    K = np.empty((m + n, m + n))
    K[:m, :m] = _series_gram(inv, g, P, True)
    K[m:, m:] = _series_gram(inv, g, Q, True)
    K[:m, m:] = _series_gram(inv, g, C, False)
    K[m:, :m] = K[:m, m:].T
    K = 0.5 * (K + K.T)
    lam, W = np.linalg.eigh(K)
    clip = max(0.0, -float(lam[0]))
    if clip > CLIP_FAIL:
        raise NumericError(f"Gram matrix eigenvalue {lam[0]:.3g}: series truncation too coarse")
    if clip > CLIP_WARN:
        warnings.warn(f"clipped Gram eigenvalue {lam[0]:.3g}", RuntimeWarning)
    F = W * np.sqrt(np.clip(lam, 0, None))
    F /= np.linalg.norm(F, axis=1, keepdims=True)
    diag = {"min_eigenvalue": float(lam[0]), "diag_deviation": float(np.max(np.abs(np.diag(K) - 1)))}
    return PreprocessedVectors(F[:m], F[m:], clip, diag)


def identity_vectors(sol):
    """SDP vectors used as-is: plain hyperplane rounding."""
    return PreprocessedVectors(sol.X, sol.Y, 0.0, {})


def _draw(rng, Z, scheme, p, B):
    """Signs for B trials; Z stacks the row and column vectors.

    The coordinate read by the halfplane rule is drawn first, so a p = 0
    mixed scheme and the one-dimensional scheme share one random stream.
    """
    d = Z.shape[1]
    g2 = rng.standard_normal((B, d))
    s = g2 @ Z.T
    if scheme is None or scheme.k == 1:
        return np.where(s >= 0, 1, -1).astype(np.int8)
    g1 = rng.standard_normal((B, d))
    lam = rng.random(B) < p
    out = np.where(s >= 0, 1, -1).astype(np.int8)
    if lam.any():
        t = g1[lam] @ Z.T
        c = scheme.curve_constant
        curve = c * (t**5 - 10 * t**3 + 15 * t)
        out[lam] = np.where(s[lam] >= curve, 1, -1)
    return out


def _check_p(scheme, p):
    if not 0 <= p <= 1:
        raise InvalidArgument("p must be in [0, 1]")
    if scheme is not None and scheme.k not in (1, 2):
        raise InvalidArgument("projection dimension must be 1 or 2")


def project_and_round(pre, scheme, p, seed):
    """One draw of (eps, delta)."""
    _check_p(scheme, p)
    m = pre.U.shape[0]
    Z = np.vstack([pre.U, pre.V])
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    s = _draw(rng, Z, scheme, p, 1)[0]
    return s[:m], s[m:]


def _block(A, Z, scheme, p, seed, b, size):
    m = A.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
    S = _draw(rng, Z, scheme, p, size).astype(float)
    vals = np.einsum("bi,ij,bj->b", S[:, :m], A, S[:, m:])
    i = int(np.argmax(vals))
    return float(np.sum(vals)), float(np.sum(vals * vals)), float(vals[i]), S[i]


def sample_rounding(A, pre, scheme, p, trials, seed, workers=1):
    """Best assignment, mean and standard error over `trials` seeded draws."""
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    _check_p(scheme, p)
    Z = np.vstack([pre.U, pre.V])
    nb = (trials + BLOCK - 1) // BLOCK
    sizes = [min(BLOCK, trials - b * BLOCK) for b in range(nb)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        parts = list(ex.map(lambda b: _block(A, Z, scheme, p, seed, b, sizes[b]), range(nb)))
    tot = sum(q[0] for q in parts)
    tot2 = sum(q[1] for q in parts)
    bi = max(range(nb), key=lambda b: (parts[b][2], -b))
    mean = tot / trials
    var = max(0.0, tot2 / trials - mean * mean) * trials / max(1, trials - 1)
    m = A.shape[0]
    S = parts[bi][3].astype(np.int8)
    return S[:m], S[m:], parts[bi][2], mean, math.sqrt(var / trials)


def round_matrix(prob, scheme, p=None, trials=10000, seed=0, sol=None, workers=1, check=True):
    """SDP, preprocessing and `trials` draws; checks mean >= c SDP - 4 stderr.

    scheme None means hyperplane rounding of the raw SDP vectors.
    """
    if sol is None:
        sol = solve_sdp(prob, seed=seed, workers=workers)
    if scheme is None:
        pre, c, p = identity_vectors(sol), 0.0, 0.0
    else:
        pre, c = preprocess(sol, scheme), scheme.guarantee
        p = scheme.p if p is None else p
    e, d, best, mean, se = sample_rounding(prob.A, pre, scheme, p, trials, seed, workers)
    best = prob.value(e, d)
    opt = brute_force_opt(prob)[0] if prob.m + prob.n <= MAX_BRUTE else None
    res = RoundingResult(e, d, best, mean, se, trials, seed, sol.objective, c, opt)
    if check and scheme is not None and mean < c * sol.objective - 4 * se:
        raise NumericError(f"rounding mean {mean:.6g} below guarantee {c * sol.objective:.6g} "
                           f"minus 4 standard errors ({se:.3g})")
    return res
