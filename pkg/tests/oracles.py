"""Reference computations independent of the code under test.

Frozen values were obtained once by direct evaluation of closed forms
(noted next to each) and are kept as literals so a regression in the
library cannot move both sides of a comparison.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate, special

from sparsevine import bicop
from sparsevine.bicop import BicopModel, FamilyId

# -2 [2 ln 0.1 + ln 0.19]: all-independence mBICV, d = 3, psi0 = 0.9
MBICV_INDEP_D3 = 12.5318
# -200 + 3 ln 1000
BIC_L100_P3_N1000 = -179.2767
# -2 ln(1 - 0.9)
INDEP_EDGE_M1 = 4.6052
# -2 ln(1 - 0.9^7) and -2 ln(0.9^7)
INDEP_EDGE_M7 = 1.3013
NONINDEP_EDGE_M7 = 1.4750
# sum_{m=1}^{4} (5 - m) 0.9^m
EXPECTED_NONINDEP_D5 = 8.1441
# 0.9 / sqrt(1000 ln 1000)
ALPHA_BOUND_N1000 = 0.0108
# (2 / pi) arcsin(0.2)
GAUSS_TAU_02 = 0.1282
# -0.5 ln(1 - 0.04)
GAUSS_MI_02 = 0.0204

# three moderate parameter values per family
PARAM_GRID = {
    FamilyId.GAUSSIAN: [(-0.6,), (0.2,), (0.75,)],
    FamilyId.STUDENT_T: [(-0.5, 4.0), (0.3, 8.0), (0.7, 15.0)],
    FamilyId.CLAYTON: [(0.5,), (2.0,), (5.0,)],
    FamilyId.GUMBEL: [(1.2,), (2.0,), (3.5,)],
    FamilyId.FRANK: [(-6.0,), (2.0,), (10.0,)],
    FamilyId.JOE: [(1.3,), (2.0,), (3.5,)],
}


def grid_models():
    """Every candidate (family, rotation) at each of its three grid parameters."""
    for fam, rot in bicop.ALL_CANDIDATES:
        for params in PARAM_GRID[fam]:
            yield BicopModel(fam, rot, params)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


def strip_h1(model: BicopModel, u: float, v: float, delta: float = 1e-6) -> float:
    """``(C(u + delta, v) - C(u - delta, v)) / (2 delta)`` with ``C`` the integrated density.

    The difference of the two CDF values is the integral of the density
    over the strip ``[u - delta, u + delta] x [0, v]``: adaptive quadrature
    in ``v``, five-point Gauss-Legendre across the strip.
    """
    total = 0.0
    for x, w in zip(_GL_X, _GL_W):
        s = u + delta * x
        inner, _ = integrate.quad(
            lambda t: float(bicop.pdf(model, s, t)), 0.0, v, epsabs=1e-13, epsrel=1e-12, limit=200
        )
        total += w * delta * inner
    return total / (2.0 * delta)


def _normal_score_grid(nodes: int, lim: float = 8.5):
    x, w = np.polynomial.legendre.leggauss(nodes)
    x, w = lim * x, lim * w
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w) * np.exp(-0.5 * (X**2 + Y**2)) / (2.0 * math.pi)
    return special.ndtr(X), special.ndtr(Y), W


def density_mass(model: BicopModel, nodes: int = 400) -> float:
    """Integral of the copula density over the unit square (normal-score substitution)."""
    U, V, W = _normal_score_grid(nodes)
    return float(np.sum(bicop.pdf(model, U.ravel(), V.ravel()) * W.ravel()))


def tau_quadrature(model: BicopModel, nodes: int = 400) -> float:
    """Kendall's tau as ``4 int C dC - 1`` by 2-d quadrature.

    Integrating by parts gives ``1 - 4 int int dC/du dC/dv du dv``; the
    partial derivatives are the h-functions, already checked against the
    integrated density.
    """
    U, V, W = _normal_score_grid(nodes)
    u, v = U.ravel(), V.ravel()
    h1 = bicop.hfunc1(model, u, v)  # dC/du
    h2 = bicop.hfunc2(model, u, v)  # dC/dv
    return float(1.0 - 4.0 * np.sum(h1 * h2 * W.ravel()))


def kendall_tau_b_bruteforce(x, y) -> float:
    """O(n^2) concordance count with the tau-b tie correction."""
    n = len(x)
    conc = disc = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = np.sign(x[i] - x[j])
            dy = np.sign(y[i] - y[j])
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif dx == dy:
                conc += 1
            else:
                disc += 1
    denom = math.sqrt((conc + disc + tx) * (conc + disc + ty))
    return (conc - disc) / denom if denom else 0.0


def brute_force_mst_weight(n: int, weights: dict) -> float:
    """Largest total weight over all spanning trees of the complete graph on ``n`` nodes."""
    pairs = list(weights)
    best = -math.inf
    for combo in itertools.combinations(pairs, n - 1):
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        ok = True
        for a, b in combo:
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            best = max(best, sum(weights[p] for p in combo))
    return best


def std_t_cdf_quadrature(x: float, nu: float) -> float:
    """CDF of the unit-variance t by integrating its density."""
    scale = math.sqrt((nu - 2.0) / nu)
    const = math.exp(special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu)) / math.sqrt(nu * math.pi) / scale

    def dens(s):
        z = s / scale
        return const * (1.0 + z * z / nu) ** (-0.5 * (nu + 1))

    val, _ = integrate.quad(dens, -np.inf, x, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def binomial_interval(n: int, p: float, level: float = 0.95) -> tuple[float, float]:
    """Exact (equal-tailed) acceptance interval for a binomial frequency ``k / n``."""
    from scipy import stats

    lo = stats.binom.ppf((1.0 - level) / 2.0, n, p)
    hi = stats.binom.isf((1.0 - level) / 2.0, n, p)
    return lo / n, hi / n
