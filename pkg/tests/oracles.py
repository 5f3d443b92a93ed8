"""Independent reference computations used only by the tests.

They share no code with the package beyond numpy/scipy.
"""

import math

import numpy as np
from scipy.special import erf

PI14 = math.pi ** -0.25


def h5(x):
    return (4 * x**5 - 20 * x**3 + 15 * x) / (2 * math.pi**0.25 * math.sqrt(15))


def _psi(nmax, x):
    """Orthonormal Hermite functions psi_n(x) = h_n(x) exp(-x^2/2)."""
    out = np.empty((nmax + 1, x.size))
    out[0] = PI14 * np.exp(-x * x / 2)
    if nmax >= 1:
        out[1] = math.sqrt(2) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def mehler_coeffs(eta, K, L=14.0, h=0.01):
    """Taylor coefficients c_0..c_K of (pi/2) E[f(X) f(Y)] for f = sign(x2 - eta h5(x1)).

    Mehler's formula expands the correlated Gaussian pair in Hermite
    products; the coefficient of t^k collects the squared Hermite moments of
    f of total degree k. Moments are integrated in closed form in x2 and by a
    fine trapezoid rule in x1.
    """
    x = np.arange(-L, L + h / 2, h)
    a = eta * h5(x)
    P = _psi(K, x)
    Pa = _psi(K, a)
    J = np.empty((K + 1, x.size))
    J[0] = -math.pi**0.25 * erf(a)
    for m in range(1, K + 1):
        J[m] = 2 * Pa[m - 1] * np.exp(-a * a / 2) / math.sqrt(2 * m)
    F = (P * np.exp(-x * x / 2) * h) @ J.T
    c = np.zeros(K + 1)
    for n in range(K + 1):
        for m in range(K + 1 - n):
            c[n + m] += 0.5 * F[n, m] ** 2
    return c


def mehler_eval(eta, t, K=80):
    c = mehler_coeffs(eta, K)
    return np.polynomial.polynomial.polyval(t, c)


def brute_h(f, g, t, n=64):
    """E[f(X) g(Y)] by a 4-D Gauss-Hermite tensor rule (weight exp(-|x|^2 - |w|^2)).

    X = x, Y = t x + sqrt(1 - t^2) w. Sign functions make this converge
    slowly, so it is a loose check only.
    """
    s, w = np.polynomial.hermite.hermgauss(n)
    w = w / math.sqrt(math.pi)
    X1, X2 = np.meshgrid(s, s, indexing="ij")
    W12 = np.outer(w, w)
    fx = f(np.stack([X1, X2], -1)).astype(float)
    r = math.sqrt(1 - t * t)
    total = 0.0
    for i in range(n):
        for j in range(n):
            y = np.stack([t * s[i] + r * X1, t * s[j] + r * X2], -1)
            total += W12[i, j] * fx[i, j] * float(np.sum(W12 * g(y)))
    return total


def arcsin_by_division(N):
    """arcsin coefficients by integrating the series of 1/sqrt(1-z^2), term by term.

    1/sqrt(1-u) is built by repeated squaring-root recurrence: b_0 = 1,
    b_k = b_{k-1} (2k-1)/(2k), not from the closed form.
    """
    b = [1.0]
    for k in range(1, N + 1):
        b.append(b[-1] * (2 * k - 1) / (2 * k))
    # check: (sum b_k u^k)^2 = 1/(1-u), i.e. all ones
    sq = np.convolve(b, b)[: N + 1]
    assert np.allclose(sq, 1.0)
    return np.array([b[k] / (2 * k + 1) for k in range(N + 1)])


def sdp_2x2_grid(A, n=4000):
    """max of sum a_ij <x_i, y_j> over unit vectors in the plane, by a dense angle grid.

    Rank two suffices for a 2 x 2 problem. One angle is fixed by rotation.
    """
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    best = -np.inf
    for b1 in th[:: max(1, n // 400)]:
        for b2 in th[:: max(1, n // 400)]:
            # rows fixed at angle 0 and a; columns b1, b2; optimize a on the fine grid
            v = (A[0, 0] * np.cos(b1) + A[0, 1] * np.cos(b2)
                 + A[1, 0] * np.cos(th - b1) + A[1, 1] * np.cos(th - b2))
            best = max(best, float(v.max()))
    return best


def bilinear_all_signs(A):
    """OPT by enumerating every row and column sign pattern."""
    m, n = A.shape
    best = -np.inf
    for e in range(2**m):
        es = np.array([1 if (e >> i) & 1 else -1 for i in range(m)])
        for d in range(2**n):
            ds = np.array([1 if (d >> j) & 1 else -1 for j in range(n)])
            best = max(best, float(es @ A @ ds))
    return best


_GLX, _GLW = np.polynomial.legendre.leggauss(80)


def _G(al, be, L=12.0):
    """int_{-L}^{al} exp(-x^2) erf((be - i x)/sqrt2) dx."""
    al = np.clip(al, -L, L)
    half = (al + L) / 2
    x = -L + half[..., None] * (_GLX + 1)
    val = np.exp(-x * x) * erf((be[..., None] - 1j * x) / math.sqrt(2))
    return (val * _GLW).sum(-1) * half


def bk_curve(eta, n=200, alpha_fn=h5):
    """B_K(f, f) for f = sign(x2 - eta alpha(x1)) by a Gauss-Hermite outer rule.

    The x2, y2 integrals are done in closed form in terms of erf of complex
    argument, a different reduction from the package's.
    """
    s, w = np.polynomial.hermite.hermgauss(n)
    x = s * math.sqrt(2)
    w = w * math.sqrt(2)
    a = eta * alpha_fn(x)
    AL, BE = np.meshgrid(a, a, indexing="ij")
    P = -math.sqrt(2 * math.pi) * (math.sqrt(math.pi) * erf(BE) - 2 * _G(AL, BE))
    X1, Y1 = np.meshgrid(x, x, indexing="ij")
    return float(w @ np.imag(np.exp(1j * X1 * Y1) * P) @ w)
