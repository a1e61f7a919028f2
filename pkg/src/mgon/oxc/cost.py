"""WSS cascade counts, power and capital cost of node architectures."""

from __future__ import annotations

import math

from mgon.oxc.assign import NodeSpec

WSS_PORT_WATTS, WSS_PORT_DOLLARS = 1.0, 1000.0
MEMS_PORT_WATTS, MEMS_PORT_DOLLARS = 0.25, 255.0
COUPLER_DOLLARS = 195.0


def s_exact(n: int, base: int = 4) -> int:
    """1 x base WSS units needed to build a 1 x n WSS by cascading.

    The last stage needs ceil(n/base) units, the stage feeding it
    ceil(that/base), and so on up to a single root unit.
    """
    if n < 1:
        raise ValueError("port count must be >= 1")
    total, level = 0, n
    while True:
        level = math.ceil(level / base)
        total += level
        if level == 1:
            return total


def s_approx(n: int) -> float:
    """Closed-form geometric approximation (n/3)(1 - (1/4)^log4(n))."""
    return n / 3.0 * (1.0 - 0.25 ** math.log(n, 4))


def wss_ports(n: int) -> int:
    return 4 * s_exact(n)


def cost_model(spec: NodeSpec) -> dict:
    """Component counts, power (W) and cost ($) for CONV, HIER(k) or FLEXBAND(B)."""
    N, D, k, B = spec.N, spec.D, spec.k, spec.B
    arch = spec.arch.lower()
    if arch in ("conv", "flex"):
        units = 2 * N * s_exact(N)
        wss, mems, couplers = 2 * N * wss_ports(N), 0, 0
    elif arch == "hier":
        units = N * s_exact(k * D)
        wss, mems, couplers = N * wss_ports(k * D), k * N * D * spec.fibers[0], N
    elif arch == "flexband":
        units = 2 * N
        wss, mems, couplers = 2 * N * B, B * N * N, B * N * N
    else:
        raise ValueError(f"unknown architecture {spec.arch!r}")
    power = wss * WSS_PORT_WATTS + mems * MEMS_PORT_WATTS
    capex = wss * WSS_PORT_DOLLARS + mems * MEMS_PORT_DOLLARS + couplers * COUPLER_DOLLARS
    return {
        "wss_units": units,
        "wss_ports": wss,
        "mems_ports": mems,
        "couplers": couplers,
        "power_watts": power,
        "capex_dollars": capex,
        "s_exact": s_exact(N),
        "s_approx": s_approx(N),
    }


def hier_savings(D: int, F: int, k: int = 2) -> tuple[float, float]:
    """(power, capex) of a conventional node minus a HIER(k) node of the same size."""
    N = D * F
    power = 2 * N * wss_ports(N) - N * wss_ports(k * D) - 0.25 * k * N * N
    capex = 2000 * N * wss_ports(N) - 1000 * N * wss_ports(k * D) - 255 * k * N * N - 195 * N
    return power, capex


def flexband_savings(N: int, B: int = 4) -> tuple[float, float]:
    """(power, capex) of a conventional node minus a flexible-waveband node."""
    power = 2 * N * wss_ports(N) - 2 * N * B - 0.25 * B * N * N
    capex = 2000 * N * wss_ports(N) - 2000 * N * B - (255 + 195) * B * N * N
    return power, capex
