"""Closed-form blocking models and a Monte-Carlo node simulator.

Traffic model: each of the N input fibers carries Bin(W, p) requests and each
request picks one of the D output links uniformly. Blocking is the expected
fraction of requests that cannot be assigned (0 when no request arrives).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from mgon.net.rng import make_rng
from mgon.oxc.assign import NodeSpec


def _log_binom_pmf(n: int, k: np.ndarray, p: float) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if p <= 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    if p >= 1.0:
        return np.where(k == n, 0.0, -np.inf)
    return (
        gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        + k * math.log(p) + (n - k) * math.log1p(-p)
    )


def _uniform_links(spec: NodeSpec) -> None:
    if len(set(spec.fibers)) != 1:
        raise ValueError("closed forms assume the same fiber count on every link")


def flex_blocking(spec: NodeSpec, p: float) -> float:
    """Fully flexible node: a link blocks only beyond its W*F capacity."""
    _uniform_links(spec)
    N, W, D = spec.N, spec.W, spec.D
    C = W * spec.fibers[0]
    NW = N * W
    if C >= NW or p <= 0.0:
        return 0.0
    terms = []
    lg = _log_binom_pmf(NW, np.arange(NW + 1), p)
    for g in range(C + 1, NW + 1):
        if not np.isfinite(lg[g]):
            continue
        n = np.arange(C + 1, g + 1)
        ln = _log_binom_pmf(g, n, 1.0 / D) + lg[g]
        terms.extend(((n - C) / g * np.exp(ln)).tolist())
    return min(1.0, D * math.fsum(terms))


def hier1_fiber_load_pmf(spec: NodeSpec, p: float) -> np.ndarray:
    """Distribution of the requests that land on one output fiber under random fiber choice.

    X ~ Bin(N, 1/F) input fibers pick the fiber, their R ~ Bin(W X, p) requests
    are thinned by 1/D towards the link.
    """
    _uniform_links(spec)
    N, W, D, F = spec.N, spec.W, spec.D, spec.fibers[0]
    out = np.zeros(N * W + 1)
    lx = _log_binom_pmf(N, np.arange(N + 1), 1.0 / F)
    for m in range(N + 1):
        if not np.isfinite(lx[m]):
            continue
        top = W * m
        n = np.arange(top + 1)[:, None]
        e = np.arange(top + 1)[None, :]
        # thinning kernel P(e | n) = Bin(n, 1/D) on the lower triangle
        kernel = np.where(e <= n, _log_binom_pmf_grid(n, e, 1.0 / D), -np.inf)
        lr = _log_binom_pmf(top, np.arange(top + 1), p)[:, None] + lx[m]
        out[: top + 1] += np.exp(kernel + lr).sum(axis=0)
    return out


def _log_binom_pmf_grid(n: np.ndarray, k: np.ndarray, p: float) -> np.ndarray:
    n = n.astype(float)
    k = k.astype(float)
    rest = np.clip(n - k, 0, None)
    if p >= 1.0:
        return np.where(rest == 0, 0.0, -np.inf) + 0 * k
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(rest + 1) + k * math.log(p) + rest * math.log1p(-p)


def hier1_blocking(spec: NodeSpec, p: float) -> float:
    """Random-fiber-selection node with one fiber per (input fiber, link) group.

    Per-fiber overflow (e - W) is divided by the node total g with the fiber
    load and the total treated as independent; summed over the N output fibers.
    """
    _uniform_links(spec)
    N, W = spec.N, spec.W
    NW = N * W
    if p <= 0.0:
        return 0.0
    pe = hier1_fiber_load_pmf(spec, p)
    pg = np.exp(_log_binom_pmf(NW, np.arange(NW + 1), p))
    terms = []
    for g in range(W + 1, NW + 1):
        e = np.arange(W + 1, g + 1)
        terms.extend(((e - W) / g * pe[W + 1 : g + 1] * pg[g]).tolist())
    return min(1.0, N * math.fsum(terms))


def blocking_analytic(spec: NodeSpec, p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    arch = spec.arch.lower()
    if arch in ("conv", "flex") or (arch == "hier" and spec.k >= 2):
        return flex_blocking(spec, p)
    if arch == "hier" and spec.k == 1:
        return hier1_blocking(spec, p)
    raise ValueError(f"no closed form for architecture {spec.arch!r} with k={spec.k}")


# -- exact references ---------------------------------------------------------


def _binom_exact(n: int, k: int, p: Fraction) -> Fraction:
    return math.comb(n, k) * p**k * (1 - p) ** (n - k)


def flex_blocking_exact(spec: NodeSpec, p: Fraction | float) -> Fraction:
    """Same sum as ``flex_blocking`` in rational arithmetic (small N*W only)."""
    p = Fraction(p)
    N, W, D = spec.N, spec.W, spec.D
    C = W * spec.fibers[0]
    NW = N * W
    invD = Fraction(1, D)
    total = Fraction(0)
    for g in range(C + 1, NW + 1):
        pg = _binom_exact(NW, g, p)
        for n in range(C + 1, g + 1):
            total += Fraction(n - C, g) * _binom_exact(g, n, invD) * pg
    return D * total


def hier1_blocking_exact(spec: NodeSpec, p: Fraction | float) -> Fraction:
    p = Fraction(p)
    N, W, D, F = spec.N, spec.W, spec.D, spec.fibers[0]
    NW = N * W
    pe = [Fraction(0)] * (NW + 1)
    for m in range(N + 1):
        px = _binom_exact(N, m, Fraction(1, F))
        for n in range(W * m + 1):
            pn = _binom_exact(W * m, n, p) * px
            for e in range(n + 1):
                pe[e] += _binom_exact(n, e, Fraction(1, D)) * pn
    total = Fraction(0)
    for g in range(W + 1, NW + 1):
        pg = _binom_exact(NW, g, p)
        for e in range(W + 1, g + 1):
            total += Fraction(e - W, g) * pe[e] * pg
    return N * total


def flex_blocking_enumerated(spec: NodeSpec, p: Fraction | float) -> Fraction:
    """E[blocked / offered] by listing every request pattern (tiny nodes only).

    Each of the N*W wavelength slots is idle (1-p) or carries a request to one
    of the D links (p/D each).
    """
    p = Fraction(p)
    N, W, D = spec.N, spec.W, spec.D
    C = W * spec.fibers[0]
    total = Fraction(0)
    for pattern in itertools.product(range(D + 1), repeat=N * W):
        per_link = [0] * D
        prob = Fraction(1)
        for x in pattern:
            if x == 0:
                prob *= 1 - p
            else:
                prob *= p / D
                per_link[x - 1] += 1
        offered = sum(per_link)
        if offered:
            total += prob * Fraction(sum(max(0, r - C) for r in per_link), offered)
    return total


# -- Monte Carlo --------------------------------------------------------------


@dataclass
class McResult:
    mean: float
    std_err: float
    trials: int
    offered: int

    @property
    def ci95(self) -> float:
        return 1.96 * self.std_err

    def band(self, sigmas: float = 3.0) -> float:
        """Half-width of the acceptance band around the mean.

        With zero observed blocking the standard error is 0; the band then
        falls back to the rule-of-three bound 3 / offered requests.
        """
        return max(sigmas * self.std_err, 3.0 / self.offered if self.offered else 1.0)


def simulate_blocking(spec: NodeSpec, p: float, trials: int, seed: int, method: str = "flex") -> McResult:
    """Per-trial blocked/offered ratio, averaged; ``method`` is flex, hrfs or hsa."""
    rng = make_rng(seed, "oxc-mc", method)
    N, W, D = spec.N, spec.W, spec.D
    F = spec.fibers
    n = rng.binomial(W, p, size=(trials, N))
    q = rng.multinomial(n, np.full(D, 1.0 / D))  # (trials, N, D)
    offered = q.sum(axis=(1, 2))
    if method == "flex":
        cap = np.array([W * f for f in F])
        blocked = np.maximum(q.sum(axis=1) - cap, 0).sum(axis=1)
    elif method == "hrfs":
        blocked = np.zeros(trials, dtype=np.int64)
        for d in range(D):
            choice = (rng.random((trials, N)) * F[d]).astype(np.int64)
            load = np.zeros((trials, F[d]), dtype=np.int64)
            np.add.at(load, (np.repeat(np.arange(trials), N), choice.ravel()), q[:, :, d].ravel())
            blocked += np.maximum(load - W, 0).sum(axis=1)
    elif method == "hsa":
        from mgon.oxc.assign import hsa_assign

        blocked = np.array([hsa_assign(spec, q[t]).blocked for t in range(trials)])
    else:
        raise ValueError(f"unknown method {method!r}")
    ratio = np.divide(blocked, offered, out=np.zeros(trials), where=offered > 0)
    return McResult(float(ratio.mean()), float(ratio.std(ddof=1) / math.sqrt(trials)), trials, int(offered.sum()))
