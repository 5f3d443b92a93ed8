"""Odd power series: Taylor coefficients from contour samples, compositional
reversion, the normalization constant c(f, g), and gamma_p for the mixed
halfplane / quintic-curve scheme.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import json
import math

import numpy as np

from .errors import InvalidArgument, NumericError, RootOutsideDisk
from .kernel import DEFAULT, LOG1P2, transfer_delta, transfer_1d
from .partitions import Halfplane, OddGraph, H5_ALPHA

SCHEME_VERSION = 1
TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OddPowerSeries:
    """Coefficients (a1, a3, ..., a_{2N+1}) of an odd power series."""

    coeffs: np.ndarray
    sample_radius: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise InvalidArgument("coefficients must be a nonempty 1-D list")
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self):
        return self.coeffs.size - 1

    @property
    def degree(self):
        return 2 * self.N + 1

    @property
    def tail(self):
        return abs(self.coeffs[-1]) * self.sample_radius ** self.degree

    def dense(self):
        """Full coefficient vector indexed by power."""
        d = np.zeros(self.degree + 1)
        d[1::2] = self.coeffs
        return d

    def __call__(self, z):
        z = np.asarray(z)
        z2 = z * z
        out = np.zeros_like(z, dtype=np.result_type(z, float))
        for a in self.coeffs[::-1]:
            out = out * z2 + a
        return out * z

    def abs_sum(self, c):
        """sum |a_{2j+1}| c^{2j+1}."""
        k = np.arange(1, self.degree + 1, 2)
        return float(np.sum(np.abs(self.coeffs) * c ** k))

    def __eq__(self, other):
        return isinstance(other, OddPowerSeries) and np.array_equal(self.coeffs, other.coeffs)

    def to_list(self):
        return [float(a) for a in self.coeffs]


def from_dense(d, sample_radius=1.0):
    d = np.asarray(d, dtype=float)
    n = (d.size - 1) // 2
    return OddPowerSeries(d[1:2 * n + 2:2].copy(), sample_radius)


def arcsin_series(N):
    k = np.arange(N + 1)
    c = [math.comb(2 * j, j) / 4.0**j / (2 * j + 1) for j in k]
    return OddPowerSeries(np.array(c))


def sin_series(N, scale=1.0):
    """sin(scale z)."""
    c = [(-1) ** j * scale ** (2 * j + 1) / math.factorial(2 * j + 1) for j in range(N + 1)]
    return OddPowerSeries(np.array(c))


def identity_series(N):
    c = np.zeros(N + 1)
    c[0] = 1.0
    return OddPowerSeries(c)


# ---------------------------------------------------------------- contour extraction

def _contour_values(H, r, M, symmetric, workers):
    theta = 2 * math.pi * np.arange(M) / M
    z = r * np.exp(1j * theta)
    if not symmetric:
        pts = list(z)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return np.array(list(ex.map(H, pts)), dtype=complex)
    # H real and odd: H(conj z) = conj H(z), H(-z) = -H(z); a quarter circle suffices
    q = M // 4
    with ThreadPoolExecutor(max_workers=workers) as ex:
        first = np.array(list(ex.map(H, list(z[:q + 1]))), dtype=complex)
    vals = np.empty(M, dtype=complex)
    vals[:q + 1] = first
    j = np.arange(1, q)
    vals[2 * q - j] = -np.conj(first[j])  # pi - theta
    vals[2 * q] = -first[0]
    vals[2 * q + j] = -first[j]           # pi + theta
    vals[3 * q] = -first[q]
    vals[4 * q - j] = np.conj(first[j])   # -theta
    # spot check the assumed symmetry at two mirrored points
    for zz, want in ((z[q + 1], vals[q + 1]), (z[3 * q - 1], vals[3 * q - 1])):
        got = H(zz)
        if abs(got - want) > 1e-8 * max(1.0, abs(want)):
            raise NumericError(f"evaluator is not real-odd: {got} vs {want}", node=zz)
    return vals


def taylor_from_contour(H, r, N, M=None, symmetric=True, workers=1):
    """Odd Taylor coefficients a_1..a_{2N+1} of H from M samples on |z| = r.

    a_k = (1/(M r^k)) sum_j H(r e^{i theta_j}) e^{-i k theta_j}.
    """
    if not 0.5 <= r <= 0.95:
        raise InvalidArgument("sample radius must be in [0.5, 0.95]")
    if not 0 <= N <= 40:
        raise InvalidArgument("order N must be in [0, 40]")
    M = M or max(256, 8 * N)
    if M % 4:
        raise InvalidArgument("number of contour samples must be divisible by 4")
    vals = _contour_values(H, r, M, symmetric, workers)
    fft = np.fft.fft(vals) / M
    k = np.arange(2 * N + 2)
    a = fft[: 2 * N + 2] / r**k
    resid = max(float(np.max(np.abs(a.imag))), float(np.max(np.abs(a[0::2]))))
    if resid > 1e-8:
        raise NumericError(f"imaginary or even residue {resid:.3g}: evaluator is not real-odd")
    return OddPowerSeries(a.real[1::2].copy(), r)


# ---------------------------------------------------------------- series algebra

def _mul(a, b, n):
    return np.convolve(a, b)[:n]


def compose(s, t):
    """Dense coefficients of s(t(z)) truncated at the common degree."""
    n = max(s.degree, t.degree) + 1
    sd, td = s.dense(), np.zeros(n)
    td[: t.degree + 1] = t.dense()
    out = np.zeros(n)
    power = np.zeros(n)
    power[0] = 1.0
    for k in range(1, sd.size):
        power = _mul(power, td, n)
        out += sd[k] * power
    return out


def revert(s):
    """Compositional inverse by Lagrange inversion: b_n = [w^{n-1}] (w/s(w))^n / n."""
    a1 = s.coeffs[0]
    if a1 == 0:
        raise InvalidArgument("series with a1 = 0 is not invertible at the origin")
    n = s.degree + 1
    # w/s(w) = 1/(a1 + a3 w^2 + ...)
    q = s.dense()[1:]
    q = np.concatenate([q, np.zeros(n - q.size)])
    inv = np.zeros(n)
    inv[0] = 1.0 / q[0]
    for k in range(1, n):
        inv[k] = -np.dot(q[1:k + 1], inv[k - 1::-1][:k]) / q[0]
    out = np.zeros(n)
    power = np.zeros(n)
    power[0] = 1.0
    for m in range(1, n):
        power = _mul(power, inv, n)
        if m % 2:
            out[m] = power[m - 1] / m
    return from_dense(out, s.sample_radius)


def solve_c(s, radius=None):
    """Positive root of sum |a_{2j+1}| c^{2j+1} = 1 inside the validated disk.

    Bisection runs until the bracket stops shrinking in floating point, so
    the result is the float nearest the root of the truncated series.
    """
    if s.coeffs[0] == 0:
        raise InvalidArgument("a1 = 0")
    radius = s.sample_radius if radius is None else radius
    hi = 0.999 * radius
    if s.abs_sum(hi) < 1:
        raise RootOutsideDisk(f"sum |a| c^k < 1 at c = {hi:.6g}; root outside the validated disk")
    lo = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if s.abs_sum(mid) < 1:
            lo = mid
        else:
            hi = mid
    return lo if abs(s.abs_sum(lo) - 1) <= abs(s.abs_sum(hi) - 1) else hi


def is_alternating(s, tol=1e-12, noise=None):
    """sign(a_{2j+1}) = (-1)^j for every coefficient above tol (and above noise[j] if given)."""
    floor = np.full(s.coeffs.size, tol)
    if noise is not None:
        floor = np.maximum(floor, np.asarray(noise, dtype=float)[: s.coeffs.size])
    for j, a in enumerate(s.coeffs):
        if abs(a) < floor[j]:
            continue
        if np.sign(a) != (-1) ** j:
            return False
    return True


def coefficient_noise(inv, other):
    """Per-coefficient disagreement of two extractions of the same inverse series."""
    n = min(inv.coeffs.size, other.coeffs.size)
    d = np.full(inv.coeffs.size, np.inf)
    d[:n] = 4 * np.abs(inv.coeffs[:n] - other.coeffs[:n])
    return d


# ---------------------------------------------------------------- schemes

@dataclass
class KrivineScheme:
    """Everything the rounding pipeline needs.

    inverse: Taylor coefficients of the inverse transfer function.
    gamma: root of sum |a_k| gamma^k = 1.
    scale: factor turning gamma into the rounding guarantee (1 when the
    transfer function is the expectation, 2/pi when it is (pi/2) E).
    """

    name: str
    k: int
    p: float
    eta: float
    alpha: tuple
    inverse: OddPowerSeries
    gamma: float
    scale: float
    alternating: bool = False
    valid: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise InvalidArgument("scheme constant must lie in (0, 1)")

    @property
    def guarantee(self):
        return self.scale * self.gamma

    @property
    def curve_constant(self):
        """c with (Gu)_2 >= c (t^5 - 10 t^3 + 15 t): eta / (2 pi^{1/4} sqrt 15)."""
        return self.eta / (2 * math.pi**0.25 * math.sqrt(15))

    def to_json(self):
        return {
            "version": SCHEME_VERSION,
            "name": self.name,
            "k": self.k,
            "p": self.p,
            "eta": self.eta,
            "alpha": list(self.alpha),
            "inverse_coefficients": self.inverse.to_list(),
            "sample_radius": self.inverse.sample_radius,
            "gamma": self.gamma,
            "scale": self.scale,
            "guarantee": self.guarantee,
            "alternating": self.alternating,
            "valid": self.valid,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_json(cls, doc):
        if doc.get("version") != SCHEME_VERSION:
            raise InvalidArgument(f"unsupported scheme version {doc.get('version')!r}")
        try:
            return cls(doc["name"], int(doc["k"]), float(doc["p"]), float(doc["eta"]),
                       tuple(doc["alpha"]),
                       OddPowerSeries(np.array(doc["inverse_coefficients"], dtype=float),
                                      float(doc["sample_radius"])),
                       float(doc["gamma"]), float(doc["scale"]), bool(doc["alternating"]),
                       bool(doc["valid"]), dict(doc.get("diagnostics", {})))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgument(f"malformed scheme document: {e}") from e

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as e:
                raise InvalidArgument(f"{path}: {e}") from e
        return cls.from_json(doc)


def krivine_scheme(N=20, r=0.9):
    """k = 1, f = g = sign: H = (2/pi) arcsin, inverse sin(pi z/2), c = (2/pi) log(1+sqrt2).

    The coefficients come from contour extraction of the exact 1-D transfer
    function, not from the closed form.
    """
    sign = Halfplane(1)
    c, inv, noise = scheme_1d(sign, sign, r, N, with_noise=True)
    return KrivineScheme("krivine", 1, 0.0, 0.0, (), inv, c, 1.0, is_alternating(inv, noise=noise),
                         True, {"tail": float(inv.tail)})


EXTRACT_N = 31  # largest order served by the default 256 contour samples


@lru_cache(maxsize=16)
def _delta_coeffs(eta, alpha, r, cfg, workers):
    f = OddGraph(eta, alpha)
    H = lambda z: transfer_delta(f, f, z, cfg)
    return taylor_from_contour(H, r, EXTRACT_N, workers=workers).coeffs


def _check_order(N):
    if not 1 <= N <= EXTRACT_N:
        raise InvalidArgument(f"order N must be in [1, {EXTRACT_N}]")


def eta_series(eta, r=0.92, N=20, cfg=DEFAULT, alpha=H5_ALPHA, workers=1):
    """Taylor coefficients of H_eta = arcsin + (H_eta - arcsin)."""
    _check_order(N)
    d = _delta_coeffs(float(eta), tuple(alpha), float(r), cfg, workers)[: N + 1]
    return OddPowerSeries(arcsin_series(N).coeffs + d, r)


def mixed_series(eta, p, r=0.92, N=20, cfg=DEFAULT, alpha=H5_ALPHA, workers=1):
    """F_p = (1-p) arcsin + p H_eta = arcsin + p (H_eta - arcsin)."""
    _check_order(N)
    d = _delta_coeffs(float(eta), tuple(alpha), float(r), cfg, workers)[: N + 1]
    return OddPowerSeries(arcsin_series(N).coeffs + p * d, r)


def _inverse_with_tail(make, N, n_max, tol=TAIL_TOL):
    """Revert make(n) for the order closest to N whose inverse tail is below tol.

    Raising the order removes truncation error; lowering it removes the
    rounding noise that reversion amplifies in the highest coefficients.
    Orders are tried as N, N+2, ..., n_max, then N-2, N-4, ..., 4; if none
    passes, the one with the smallest tail is returned.
    """
    best = None
    for n in list(range(N, n_max + 1, 2)) + list(range(N - 2, 3, -2)):
        s = make(n)
        inv = revert(s)
        if inv.tail < tol:
            return s, inv, n
        if best is None or inv.tail < best[1].tail:
            best = (s, inv, n)
    return best


def gamma_p(eta, p, r=0.92, N=20, cfg=DEFAULT, alpha=H5_ALPHA, workers=1, refine=True):
    """gamma_p and the mixed scheme for F_p = (1-p) H_0 + p H_eta.

    The uncertainty estimate combines the change in gamma when the contour
    samples are recomputed with the coarser quadrature budget, and the change
    when the series is truncated at N - 5 instead of N. A root outside the
    validated disk raises RootOutsideDisk.
    """
    if not 0 <= p <= 1:
        raise InvalidArgument("p must be in [0, 1]")
    if not 0 < eta <= 0.5:
        raise InvalidArgument("eta must be in (0, 0.5]")
    if not 0.9 < r <= 0.95:
        raise InvalidArgument("sample radius must be in (0.9, 0.95]")
    s, inv, N = _inverse_with_tail(lambda n: mixed_series(eta, p, r, n, cfg, alpha, workers), N,
                                   EXTRACT_N)
    gamma = solve_c(inv)
    diag = {"N": N, "tail": float(inv.tail), "quadrature": cfg.to_json()}
    unc, noise = 0.0, None
    if refine:
        inv_coarse = revert(mixed_series(eta, p, r, N, cfg.coarser(), alpha, workers))
        noise = coefficient_noise(inv, inv_coarse)
        g_coarse = solve_c(inv_coarse)
        g_short = solve_c(revert(OddPowerSeries(s.coeffs[: N - 4], r)))
        diag.update(gamma_coarse=g_coarse, gamma_truncated=g_short)
        unc = abs(gamma - g_coarse) + abs(gamma - g_short) + 4 * np.finfo(float).eps
    diag["uncertainty"] = float(unc)
    diag["margin"] = gamma - LOG1P2
    diag["bound"] = math.pi / (2 * gamma)
    scheme = KrivineScheme("mixed", 2, float(p), float(eta), tuple(alpha), inv, gamma,
                           2 / math.pi, is_alternating(inv, noise=noise), True, diag)
    return gamma, scheme


def _extract_1d(f, g, r):
    return taylor_from_contour(lambda z: transfer_1d(f, g, z), r, EXTRACT_N)


def scheme_1d(f, g, r=0.9, N=20, with_noise=False):
    """c(f, g) and the inverse series for one-dimensional partitions, H the expectation.

    with_noise also returns a per-coefficient noise level from a second
    extraction at radius r - 0.1.
    """
    _check_order(N)
    full = _extract_1d(f, g, r)
    make = lambda n: OddPowerSeries(full.coeffs[: n + 1], r)
    _, inv, n = _inverse_with_tail(make, N, EXTRACT_N)
    c = solve_c(inv)
    if not with_noise:
        return c, inv
    other = revert(OddPowerSeries(_extract_1d(f, g, r - 0.1).coeffs[: n + 1], r))
    return c, inv, coefficient_noise(inv, other)
