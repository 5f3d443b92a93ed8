"""Hermite polynomials orthonormal for the weight exp(-x^2), and numeric
checks of the Gaussian integral identities they satisfy.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .errors import InvalidArgument, NumericError
from .quad import gauss_hermite_rule, scaled_hermite_rule

PI_M14 = math.pi ** -0.25
H5_SCALE = 1.0 / (2.0 * math.pi ** 0.25 * math.sqrt(15.0))


@dataclass(frozen=True)
class HermitePoly:
    degree: int
    coeffs: np.ndarray  # ascending monomial coefficients, length degree+1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)


@lru_cache(maxsize=None)
def _coeff_table(mmax):
    # h_{m+1} = sqrt(2/(m+1)) x h_m - sqrt(m/(m+1)) h_{m-1}
    rows = [np.zeros(mmax + 1) for _ in range(mmax + 1)]
    rows[0][0] = PI_M14
    if mmax >= 1:
        rows[1][1] = math.sqrt(2.0) * PI_M14
    for m in range(1, mmax):
        nxt = np.zeros(mmax + 1)
        nxt[1:] = math.sqrt(2.0 / (m + 1)) * rows[m][:-1]
        nxt -= math.sqrt(m / (m + 1.0)) * rows[m - 1]
        rows[m + 1] = nxt
    return rows


def hermite(m):
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise InvalidArgument(f"degree must be a nonnegative integer, got {m!r}")
    if m > 60:
        raise InvalidArgument("degree above 60 is not supported")
    c = _coeff_table(60)[m][: m + 1].copy()
    return HermitePoly(int(m), c)


def h5(x):
    x = np.asarray(x)
    return (4.0 * x**5 - 20.0 * x**3 + 15.0 * x) * H5_SCALE


def hermite_values(nmax, x):
    """Rows h_0(x) .. h_nmax(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = PI_M14
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * PI_M14
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1.0)) * out[n - 1]
    return out


def hermite_functions(nmax, x):
    """Rows h_n(x) exp(-x^2/2); stable for large |x| and n."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = PI_M14 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1.0)) * out[n - 1]
    return out


def odd_hermite_combination(alpha, x):
    """sum_j alpha[j] h_{2j+1}(x)."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    vals = hermite_values(2 * alpha.size - 1, x)
    return np.tensordot(alpha, vals[1::2], axes=1)


def verify_orthonormality(max_degree, n=64):
    if max_degree > 20 or max_degree < 0:
        raise InvalidArgument("max_degree must be in [0, 20]")
    rule = gauss_hermite_rule(n)
    v = hermite_values(max_degree, rule.nodes)
    gram = (v * rule.weights) @ v.T
    return float(np.max(np.abs(gram - np.eye(max_degree + 1))))


def _refined(compute, n, rtol):
    a = compute(n)
    b = compute(2 * n)
    if abs(a - b) > rtol * max(abs(b), 1e-300):
        raise NumericError(f"quadrature refinement disagreement {abs(a - b):.3g}")
    return b


def h5_quartic_integral(n=32):
    r = gauss_hermite_rule(n)
    return float(np.sum(r.weights * h5(r.nodes) ** 4))


def h5_mixed_integral(n=200):
    r = scaled_hermite_rule(n)
    x = r.nodes
    w = r.weights * h5(x) ** 2
    return float(w @ np.cos(np.outer(x, x)) @ w)


def verify_h5_quartic(n1=32, n2=200):
    """Both h5 fourth-moment integrals: 4653/sqrt(pi) and 49 sqrt(2)."""
    q = _refined(h5_quartic_integral, n1, 1e-4)
    m = _refined(h5_mixed_integral, n2 // 2, 1e-4)
    return q, m


def verify_sine_eigenfunction(x, n=200):
    """|int exp(-y^2/2) h5(y) sin(xy) dy - sqrt(2 pi) exp(-x^2/2) h5(x)|."""
    if abs(x) > 8:
        raise InvalidArgument("|x| must be at most 8")
    r = scaled_hermite_rule(n)
    lhs = float(np.sum(r.weights * h5(r.nodes) * np.sin(x * r.nodes)))
    rhs = math.sqrt(2 * math.pi) * math.exp(-x * x / 2) * float(h5(x))
    return abs(lhs - rhs)


def fourier_gaussian_error(x, n=200):
    r = scaled_hermite_rule(n)
    lhs = float(np.sum(r.weights * np.cos(x * r.nodes)))
    return abs(lhs - math.sqrt(2 * math.pi) * math.exp(-x * x / 2))


def ab2_error(A, B, n=200):
    """Both sides of the exp(sqrt2 Ax + sqrt2 By) cos(xy) Gaussian identity."""
    r = scaled_hermite_rule(n)
    x = r.nodes
    wa = r.weights * np.exp(math.sqrt(2) * A * x)
    wb = r.weights * np.exp(math.sqrt(2) * B * x)
    lhs = float(wa @ np.cos(np.outer(x, x)) @ wb)
    rhs = math.sqrt(2) * math.pi * math.exp((A * A + B * B) / 2) * math.cos(A * B)
    return abs(lhs - rhs)


def generating_error(x, t, nmax=40):
    v = hermite_values(nmax, x)
    k = np.arange(nmax + 1)
    norms = np.array([math.sqrt(math.factorial(int(i))) for i in k])
    lhs = float(np.sum(v * t**k / norms))
    rhs = PI_M14 * math.exp(math.sqrt(2) * t * x - t * t / 2)
    return abs(lhs - rhs)
