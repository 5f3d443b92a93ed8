"""The kernel exp(-(|x|^2+|y|^2)/2) sin<x,y>, its bilinear form B_K, the
transfer functions H_{f,g} and H_eta, phi(eta), and the closed-form
constants used in the one-dimensional analysis.

Normalizations: h_fg is the expectation E[f g], so h_fg = (2/pi) arcsin for
f = g = sign. transfer and h_eta_complex use the (pi/2) E normalization in
which the halfplane gives arcsin exactly.

Two-dimensional partitions f = sign(x2 - a(x1)), g = sign(y2 - b(y1)) are
integrated in (x2, y2) in closed form up to one erf integral

    G(alpha, beta) = int_{-inf}^{alpha} exp(-x^2) erf(sqrt(q)(beta - z x)) dx,

with q = 1/(1 - z^2), leaving a Gaussian quadrature in (x1, y1).
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.special import erf, erfc, wofz

from .errors import InvalidArgument, NumericError
from .partitions import (GridFunction, Halfplane, OddGraph, TRUNCATION, grid_bk,
                         pieces_1d)
from .quad import legendre_panel

LOG1P2 = math.log1p(math.sqrt(2.0))
KRIVINE_BOUND = math.pi / (2.0 * LOG1P2)
SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelConfig:
    n_outer: int = 256     # trapezoid nodes per outer axis
    n_inner: int = 48      # Gauss-Legendre nodes for int_0^alpha
    n_base: int = 64       # Gauss-Legendre nodes for int_{-R}^0
    extent: float = TRUNCATION
    k: int = 2
    grid_R: float = 7.0    # grid used when a GridFunction is involved
    grid_N: int = 512

    def __post_init__(self):
        if min(self.n_outer, self.n_inner, self.n_base) < 16:
            raise InvalidArgument("quadrature orders must be at least 16")
        if self.extent < 8:
            raise InvalidArgument("truncation extent must be at least 8")

    def to_json(self):
        return {"n_outer": self.n_outer, "n_inner": self.n_inner, "n_base": self.n_base,
                "extent": self.extent}

    def coarser(self):
        """The budget used as the refinement comparison."""
        return KernelConfig(max(16, (3 * self.n_outer) // 4), max(16, (3 * self.n_inner) // 4),
                            max(16, (3 * self.n_base) // 4), self.extent, self.k,
                            self.grid_R, self.grid_N // 2)


DEFAULT = KernelConfig()


@dataclass(frozen=True)
class StripPoint:
    re: float
    im: float

    def __post_init__(self):
        if not abs(self.re) < 1:
            raise InvalidArgument(f"strip point needs |Re z| < 1, got {self.re}")

    @property
    def z(self):
        return complex(self.re, self.im)


def _as_complex(z):
    if isinstance(z, StripPoint):
        return z.z
    z = complex(z)
    if not abs(z.real) < 1:
        raise InvalidArgument(f"strip point needs |Re z| < 1, got {z}")
    return z


def strip_bound(z):
    """Upper bound on |H_eta(a+bi)| valid on the whole strip."""
    a, b = z.real, z.imag
    num = math.pi * ((1 + a) ** 2 + b * b) * ((1 - a) ** 2 + b * b)
    den = 2 * (1 - a * a) * math.sqrt((1 - a * a) ** 2 + b ** 4 + 2 * (1 + a * a) * b * b)
    return num / den


# ---------------------------------------------------------------- 2-D engine

def _curve(f):
    if isinstance(f, Halfplane):
        return None
    if isinstance(f, OddGraph):
        if f.eta == 0 or not any(f.alpha):
            return None
        return f.curve
    raise InvalidArgument(f"closed-form reduction needs Halfplane or OddGraph, got {type(f).__name__}")


@lru_cache(maxsize=32)
def _outer_nodes(z, n, L=9.0):
    """Nodes (x1, y1) and complex weights for exp(q(-x1^2 - y1^2 + 2 z x1 y1)).

    In u = (x1+y1)/sqrt2, v = (x1-y1)/sqrt2 the exponent is
    -u^2/(1+z) - v^2/(1-z). Each axis is scaled so the real part becomes
    exp(-s^2) and integrated by the trapezoid rule on [-L, L]; the imaginary
    part stays in the weight as a chirp. Gauss-Hermite converges far more
    slowly here once the curve a(x1) steepens.
    """
    s = np.linspace(-L, L, n)
    s = 0.5 * (s - s[::-1])
    w = (s[1] - s[0]) * np.exp(-s * s)
    A, B = 1.0 / (1.0 + z), 1.0 / (1.0 - z)
    u = s / math.sqrt(A.real)
    wu = w / math.sqrt(A.real) * np.exp(-1j * A.imag * u * u)
    v = s / math.sqrt(B.real)
    wv = w / math.sqrt(B.real) * np.exp(-1j * B.imag * v * v)
    x1 = (u[:, None] + v[None, :]) / math.sqrt(2.0)
    y1 = (u[:, None] - v[None, :]) / math.sqrt(2.0)
    W = wu[:, None] * wv[None, :]
    return x1, y1, W


def _G_base(beta, z, sq, cfg):
    """int_{-R}^0 exp(-x^2) erf(sqrt(q)(beta - z x)) dx."""
    x, w = legendre_panel(-cfg.extent, 0.0, cfg.n_base)
    return erf(sq * (beta[..., None] - z * x)) @ (w * np.exp(-x * x))


def _G_part(alpha, beta, z, sq, cfg):
    """int_0^alpha exp(-x^2) erf(sqrt(q)(beta - z x)) dx with alpha clipped."""
    a = np.clip(alpha, -cfg.extent, cfg.extent)
    x, w = legendre_panel(np.zeros_like(a), a, cfg.n_inner)
    return np.sum(w * np.exp(-x * x) * erf(sq * (beta[..., None] - z * x)), axis=-1)


def _transfer_parts(f, g, z, cfg):
    """(value of the partition pair, value of the halfplane pair) on the same nodes."""
    a_fun, b_fun = _curve(f), _curve(g)
    q = 1.0 / (1.0 - z * z)
    sq = np.sqrt(q)
    x1, y1, W = _outer_nodes(z, cfg.n_outer)
    pref = q / (2.0 * math.pi)
    base_G = _G_base(np.zeros(1), z, sq, cfg)[0]
    c = 2.0 * np.sqrt(math.pi / q)
    base = pref * np.sum(W) * c * base_G
    if a_fun is None and b_fun is None:
        return base, base
    alpha = np.zeros_like(x1) if a_fun is None else a_fun(x1)
    beta = np.zeros_like(y1) if b_fun is None else b_fun(y1)
    # I(alpha, beta) - I(0, 0), so the halfplane part cancels exactly
    dG = _G_base(beta, z, sq, cfg) - base_G + _G_part(alpha, beta, z, sq, cfg)
    dI = c * dG - (math.pi / sq) * erf(beta)
    diff = pref * np.sum(W * dI)
    vals = np.broadcast_to(diff, ())
    if not np.isfinite(vals):
        raise NumericError("non-finite transfer value", node=z)
    return base + diff, base


def transfer_delta(f, g, z, cfg=DEFAULT):
    """H_{f,g}(z) - arcsin(z) in the (pi/2) E normalization.

    The halfplane value on the same nodes is subtracted instead of arcsin,
    so only the partition-dependent part carries quadrature error.
    """
    z = _as_complex(z)
    full, base = _transfer_parts(f, g, z, cfg)
    return complex(full - base)


def transfer(f, g, z, cfg=DEFAULT):
    """(pi/2) E-normalized transfer function of two planar partitions, by quadrature."""
    z = _as_complex(z)
    full, _ = _transfer_parts(f, g, z, cfg)
    return complex(full)


def transfer_refined(f, g, z, cfg=DEFAULT, delta=False):
    """Value and the disagreement against the coarser budget."""
    fn = transfer_delta if delta else transfer
    a = fn(f, g, z, cfg)
    b = fn(f, g, z, cfg.coarser())
    return a, abs(a - b)


def h_eta_complex(eta, z, cfg=DEFAULT, alpha=None):
    """H_eta(z) for f_eta = sign(x2 - eta h5(x1)) on the strip |Re z| <= 0.95."""
    z = _as_complex(z)
    if eta < 0:
        raise InvalidArgument("eta must be nonnegative")
    if abs(z.real) > 0.95:
        raise InvalidArgument("|Re z| must be at most 0.95")
    f = OddGraph(eta) if alpha is None else OddGraph(eta, alpha)
    val = transfer(f, f, z, cfg)
    bound = strip_bound(z)
    if abs(val) > bound + 1e-6:
        raise NumericError(f"|H| = {abs(val):.6g} exceeds the analytic bound {bound:.6g}", node=z)
    return val


def phi(eta, cfg=DEFAULT, alpha=None):
    """phi(eta) = 4 pi H_eta(i)/i = B_K(f_eta, f_eta)."""
    if abs(eta) > 1:
        raise InvalidArgument("|eta| must be at most 1")
    return 4 * math.pi * LOG1P2 + phi_delta(eta, cfg, alpha)


def phi_delta(eta, cfg=DEFAULT, alpha=None):
    """phi(eta) - phi(0), with the halfplane part removed on the same nodes."""
    f = OddGraph(eta) if alpha is None else OddGraph(eta, alpha)
    d = transfer_delta(f, f, 1j, cfg)
    return 4 * math.pi * d.imag


def phi_derivative_check(cfg=DEFAULT, h=2.5e-4):
    """phi''(0) and phi''''(0) from phi(h), phi(2h), phi(4h).

    phi is even, so phi(eta) - phi(0) = c2 eta^2 + c4 eta^4 + c6 eta^6 + ...;
    the three samples determine (c2, c4, c6) and the eta^6 term drops out of
    the estimates. Returns (phi'', phi'''') = (2 c2, 24 c4).
    """
    etas = np.array([h, 2 * h, 4 * h])
    d = np.array([phi_delta(e, cfg) for e in etas])
    V = np.stack([etas**2, etas**4, etas**6], axis=1)
    c2, c4, c6 = np.linalg.solve(V, d)
    # the fit without the eta^6 term, from the two smallest samples, must roughly agree
    V2 = np.stack([etas[:2] ** 2, etas[:2] ** 4], axis=1)
    _, c4b = np.linalg.solve(V2, d[:2])
    if abs(24 * c4 - 24 * c4b) > 0.1 * abs(24 * c4):
        raise NumericError(f"Richardson sequence not converging: {24 * c4:.6g} vs {24 * c4b:.6g}")
    return float(2 * c2), float(24 * c4)


# ---------------------------------------------------------------- 1-D forms

def _fourier_tail(a, x):
    """int_a^inf exp(-y^2/2 + i x y) dy, stable for any sign of a."""
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    # for a >= 0 this is sqrt(pi/2) exp(-a^2/2 + i a x) w((x + i a)/sqrt2);
    # for a < 0 use the complement and reflect y -> -y
    neg = a < 0
    ap = np.where(neg, -a, a)
    xp = np.where(neg, -x, x)
    t = math.sqrt(math.pi / 2) * np.exp(-ap * ap / 2 + 1j * ap * xp) * wofz((xp + 1j * ap) / math.sqrt(2))
    return np.where(neg, SQRT_2PI * np.exp(-x * x / 2) - t, t)


def fourier_1d(g, x):
    """int g(y) exp(-y^2/2) e^{ixy} dy for a 1-D partition, exactly."""
    x = np.asarray(x, dtype=float)
    lo, hi, s = pieces_1d(g, math.inf)
    out = np.zeros(x.shape, dtype=complex)
    for a, b, sg in zip(lo, hi, s):
        upper = 0.0 if b == math.inf else _fourier_tail(b, x)
        lower = SQRT_2PI * np.exp(-x * x / 2) if a == -math.inf else _fourier_tail(a, x)
        out += sg * (lower - upper)
    return out


def _panels(lo, hi, s, extra=(), width=1.0, m=32):
    """Gauss-Legendre panels over the pieces of a 1-D partition, refined at `extra`."""
    xs, ws = [], []
    for a, b, sg in zip(lo, hi, s):
        a, b = max(a, -TRUNCATION), min(b, TRUNCATION)
        if b <= a:
            continue
        cuts = [c for c in extra if a < c < b]
        edges = np.array([a] + sorted(cuts) + [b])
        for l, r in zip(edges[:-1], edges[1:]):
            k = max(1, int(math.ceil((r - l) / width)))
            e = np.linspace(l, r, k + 1)
            x, w = legendre_panel(e[:-1], e[1:], m)
            xs.append(x.ravel())
            ws.append(sg * w.ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _bk_1d(f, g):
    lo, hi, s = pieces_1d(f, math.inf)
    x, w = _panels(lo, hi, s)
    return float(np.sum(w * np.exp(-x * x / 2) * fourier_1d(g, x).imag))


def _h_fg_1d(f, g, t, m=32):
    """E[f(X) g(Y)] for a t-correlated pair, via erf in the inner variable.

    Complex t (|t| < 1) continues the same integral analytically.
    """
    cplx = np.iscomplexobj(t) and complex(t).imag != 0
    if not cplx:
        t = float(np.real(t))
    q = 1.0 / (1.0 - t * t)
    sq = np.sqrt(complex(q)) if cplx else math.sqrt(q)
    glo, ghi, gs = pieces_1d(g, math.inf)
    if cplx:
        extra, width = [], 0.25
    else:
        extra = [b / t for b in ghi[:-1]] if t != 0 else []
        width = min(1.0, 4.0 / sq)
    lo, hi, s = pieces_1d(f, math.inf)
    x, w = _panels(lo, hi, s, extra, width, m)
    inner = np.zeros(x.shape, dtype=complex if cplx else float)
    for a, b, sg in zip(glo, ghi, gs):
        top = 1.0 if b == math.inf else erf(sq * (b - t * x))
        bot = -1.0 if a == -math.inf else erf(sq * (a - t * x))
        inner += sg * (top - bot)
    val = np.sum(w * np.exp(-x * x) * inner) / (2 * SQRT_PI)
    return complex(val) if cplx else float(val)


def transfer_1d(f, g, z):
    """H_{f,g}(z) for 1-D partitions, real or complex z."""
    return _h_fg_1d(f, g, z)


# ---------------------------------------------------------------- public forms

def bk_form(f, g, cfg=DEFAULT, check=True):
    """B_K(f, g) = int int f(x) g(y) exp(-(|x|^2+|y|^2)/2) sin<x,y> dx dy."""
    if f.k != g.k:
        raise InvalidArgument("partitions must have the same dimension")
    if f.k == 1:
        return _bk_1d(f, g)
    if isinstance(f, GridFunction) or isinstance(g, GridFunction):
        R = f.R if isinstance(f, GridFunction) else g.R
        N = f.N if isinstance(f, GridFunction) else g.N
        return grid_bk(f, g, R, N)
    val = 4 * math.pi * transfer(f, g, 1j, cfg).imag
    if check:
        coarse = 4 * math.pi * transfer(f, g, 1j, cfg.coarser()).imag
        if abs(val - coarse) > 1e-4 * max(abs(val), 1e-12):
            raise NumericError(f"B_K refinement disagreement {abs(val - coarse):.3g}")
    return val


def h_fg(f, g, t, cfg=DEFAULT, check=True):
    """H_{f,g}(t) = E[f(G1/sqrt2) g(t G1/sqrt2 + sqrt(1-t^2) G2/sqrt2)]."""
    if abs(t) > 0.99:
        raise InvalidArgument("|t| must be at most 0.99")
    if f.k != g.k:
        raise InvalidArgument("partitions must have the same dimension")
    if f.k == 1:
        return _h_fg_1d(f, g, t)
    val = 2.0 / math.pi * transfer(f, g, t, cfg).real
    if check:
        coarse = 2.0 / math.pi * transfer(f, g, t, cfg.coarser()).real
        if abs(val - coarse) > 1e-4 * max(abs(val), 1e-12):
            raise NumericError(f"H refinement disagreement {abs(val - coarse):.3g}")
    return val


def h_fg_monte_carlo(f, g, t, samples, seed, chunk=1_000_000):
    """Monte Carlo estimate of H_{f,g}(t) and its standard error."""
    rng = np.random.default_rng(seed)
    total, total2, done = 0.0, 0.0, 0
    k = f.k
    c = math.sqrt(1 - t * t)
    while done < samples:
        m = min(chunk, samples - done)
        G1 = rng.standard_normal((m, k)) / math.sqrt(2)
        G2 = rng.standard_normal((m, k)) / math.sqrt(2)
        x, y = (G1[:, 0], t * G1[:, 0] + c * G2[:, 0]) if k == 1 else (G1, t * G1 + c * G2)
        p = f(x).astype(float) * g(y)
        total += p.sum()
        total2 += (p * p).sum()
        done += m
    mean = total / samples
    var = total2 / samples - mean * mean
    return mean, math.sqrt(max(var, 0.0) / samples)


# ---------------------------------------------------------------- 1-D analysis constants

def m0_closed():
    return LOG1P2 / math.sqrt(2.0)


def m0_quadrature(n=200):
    """int_0^inf int_0^inf exp(-(x^2+y^2)/2) sin(xy) = B_K(sign, sign)/4."""
    return _bk_1d(Halfplane(k=1), Halfplane(k=1)) / 4.0


def m1_direct(m=24):
    """int_0^inf int_0^inf exp(-(x^2+y^2)/2) |sin(xy)|, splitting at the zeros of sin."""
    xs, wx = _panels([0.0], [TRUNCATION], [1.0], width=0.25, m=m)
    total = 0.0
    for x, w in zip(xs, wx):
        period = math.pi / x
        k = int(TRUNCATION / period)
        edges = np.minimum(np.arange(k + 2) * period, TRUNCATION)
        edges = np.unique(np.concatenate([edges, np.arange(0.0, TRUNCATION + 0.5, 0.5)]))
        y, wy = legendre_panel(edges[:-1], edges[1:], m)
        total += w * math.exp(-x * x / 2) * float(np.sum(wy * np.exp(-y * y / 2) * np.abs(np.sin(x * y))))
    return total


def _cos_power_integral(j):
    """int_0^inf int_0^inf exp(-(x^2+y^2)/2) cos(2xy)^j in closed form."""
    # cos^j = 2^-j sum_l binom(j, l) cos((j - 2l) t); full-plane integral of
    # exp(-(x^2+y^2)/2) cos(c xy) is 2 pi / sqrt(1 + c^2)
    s = 0.0
    for l in range(j + 1):
        c = 2.0 * (j - 2 * l)
        s += math.comb(j, l) * 2 * math.pi / math.sqrt(1 + c * c)
    return s / 2**j / 4.0


def m1_taylor_bound(n=11):
    """Upper bound on M1 from the degree 2n-1 Taylor polynomial of sqrt(1-x)."""
    total = 0.0
    coef = 1.0
    for k in range(2 * n):
        if k > 0:
            coef *= (k - 1.5) / k  # (-1)^k binom(1/2, k) recursively
        total += coef * _cos_power_integral(k)
    return total / math.sqrt(2.0)


def taylor_lower_h(y):
    y = np.asarray(y, dtype=float)
    return -y * np.exp(-y * y / 2) / 105 * (y**6 - 7 * y**4 + 35 * y**2 - 105)


def window_integral(z, m=32):
    """int_{z-1/4}^{z+1/4} h(y) dy with h the degree-7 Taylor lower bound."""
    y, w = legendre_panel(z - 0.25, z + 0.25, m)
    return float(np.sum(w * taylor_lower_h(y)))


def window_integral_closed_4_3():
    return (19047383 / 313528320) * math.exp(-169 / 288) + (131938921 / 313528320) * math.exp(-361 / 288)


def gaussian_tail(a):
    return math.sqrt(math.pi / 2) * float(erfc(a / math.sqrt(2)))


def gaussian_tail_bound(a):
    return 16.0 / (3.0 * math.e**2 * a**3)


def one_dim_constant_checks():
    m0 = m0_quadrature()
    m1 = m1_direct()
    return {
        "M0": m0,
        "M0_closed": m0_closed(),
        "M1_direct": m1,
        "M1_taylor_bound": m1_taylor_bound(11),
        "G_2_5": window_integral(0.4),
        "G_4_3": window_integral(4.0 / 3.0),
        "G_4_3_closed": window_integral_closed_4_3(),
        "tail": {a: (gaussian_tail(a), gaussian_tail_bound(a)) for a in (1.0, 2.0, 4.0)},
    }
