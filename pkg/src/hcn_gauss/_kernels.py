"""Monte-Carlo hot kernels: numba JIT with a pure-numpy fallback.

The JIT path streams every base station through a counter-mixed splitmix64
substream per (replication, tier), so output is bit-identical regardless of
how many worker threads execute the replication loop.

Environment:
    HCN_GAUSS_BACKEND   "numba" | "numpy" | "auto" (default: numba if present)
    HCN_GAUSS_THREADS   caps numba worker threads; speed only, never bytes
"""

from __future__ import annotations

import math
import os
import sys
from typing import NamedTuple

import numpy as np

from .model import (
    Deterministic,
    Homogeneous2D,
    NakagamiPower,
    PathLossFamily,
    PowerRadial,
    RayleighPower,
    Scenario,
    _table_cumulative,
    radial_measure,
)

# Allow thread oversubscription before numba fixes its pool size at import.
_cap = os.environ.get("HCN_GAUSS_THREADS", "")
if _cap.isdigit() and int(_cap) > 0 and "numba" not in sys.modules \
        and "NUMBA_NUM_THREADS" not in os.environ:
    os.environ["NUMBA_NUM_THREADS"] = _cap

try:
    import numba as nb

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    nb = None
    HAS_NUMBA = False

CONSTRUCT_POISSON = 0
CONSTRUCT_FIXED = 1

_DIST_POWER = 0
_DIST_TABLE = 1
_PL_INV1P = 0
_PL_MIN1 = 1
_PL_SHIFTED = 2
_FAD_DET = 0
_FAD_RAYLEIGH = 1
_FAD_NAKAGAMI = 2
_FAD_RICIAN = 3

_PL_CODE = {
    PathLossFamily.INVERSE_ONE_PLUS_POWER: _PL_INV1P,
    PathLossFamily.MIN_ONE_INVERSE_POWER: _PL_MIN1,
    PathLossFamily.SHIFTED_INVERSE_POWER: _PL_SHIFTED,
}

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIXK1 = _U64(0xBF58476D1CE4E5B9)
_MIXK2 = _U64(0x94D049BB133111EB)
_INV53 = 1.1102230246251565e-16  # 2^-53
_TWO_PI = 6.283185307179586


def _make_exp_ziggurat() -> tuple[np.ndarray, np.ndarray]:
    """Layer edges and acceptance ratios for the 256-layer exponential
    ziggurat (Marsaglia-Tsang 2000 constants)."""
    layers = 256
    r = 7.69711747013104972
    v = 3.9496598225815571993e-3
    x = np.empty(layers + 1)
    x[0] = v * math.exp(r)
    x[1] = r
    for i in range(2, layers):
        x[i] = -math.log(v / x[i - 1] + math.exp(-x[i - 1]))
    x[layers] = 0.0
    return x, x[1:] / x[:-1]


_ZIG_X, _ZIG_RATIO = _make_exp_ziggurat()


class ScenarioPack(NamedTuple):
    """Flat, kernel-ready view of a scenario at a fixed truncation radius."""

    power: np.ndarray
    lam_n: np.ndarray
    fixed_m: np.ndarray
    dist_code: np.ndarray
    dist_p: np.ndarray
    pl_code: np.ndarray
    alpha: np.ndarray
    fast4: np.ndarray
    c4: np.ndarray
    fad_code: np.ndarray
    fad_a: np.ndarray
    fad_b: np.ndarray
    tab_off: np.ndarray
    tab_t: np.ndarray
    tab_mu: np.ndarray
    tab_cum: np.ndarray
    tab_total: np.ndarray
    tab_tail_c: np.ndarray
    tab_tail_p: np.ndarray
    radius: float


def _fading_codes(fading) -> tuple[int, float, float]:
    if isinstance(fading, Deterministic):
        return _FAD_DET, fading.gain, 0.0
    if isinstance(fading, RayleighPower):
        return _FAD_RAYLEIGH, fading.mean_power, 0.0
    if isinstance(fading, NakagamiPower):
        return _FAD_NAKAGAMI, fading.shape, fading.mean_power / fading.shape
    k = fading.k_factor
    return _FAD_RICIAN, math.sqrt(2.0 * k), fading.mean_power / (2.0 * (k + 1.0))


def pack_scenario(s: Scenario, radius: float) -> ScenarioPack:
    k_tiers = len(s.tiers)
    power = np.empty(k_tiers)
    lam_n = np.empty(k_tiers)
    fixed_m = np.empty(k_tiers, dtype=np.int64)
    dist_code = np.zeros(k_tiers, dtype=np.int64)
    dist_p = np.full(k_tiers, 2.0)
    pl_code = np.empty(k_tiers, dtype=np.int64)
    alpha = np.empty(k_tiers)
    fast4 = np.zeros(k_tiers, dtype=np.int64)
    c4 = np.zeros(k_tiers)
    fad_code = np.empty(k_tiers, dtype=np.int64)
    fad_a = np.zeros(k_tiers)
    fad_b = np.zeros(k_tiers)
    tab_t: list[np.ndarray] = []
    tab_mu: list[np.ndarray] = []
    tab_cum: list[np.ndarray] = []
    tab_total = np.zeros(k_tiers)
    tab_tail_c = np.zeros(k_tiers)
    tab_tail_p = np.ones(k_tiers)

    for k, tier in enumerate(s.tiers):
        power[k] = tier.power
        lam_n[k] = radial_measure(tier.intensity, tier.lam, radius)
        fixed_m[k] = int(math.ceil(lam_n[k]))
        pl_code[k] = _PL_CODE[tier.pathloss.family]
        alpha[k] = tier.pathloss.alpha
        fad_code[k], fad_a[k], fad_b[k] = _fading_codes(tier.fading)

        intensity = tier.intensity
        if isinstance(intensity, Homogeneous2D):
            dist_p[k] = 2.0
        elif isinstance(intensity, PowerRadial):
            dist_p[k] = intensity.exponent
        else:
            dist_code[k] = _DIST_TABLE
            ts, mus, cum = _table_cumulative(intensity)
            if radius <= ts[-1]:
                i = int(np.searchsorted(ts, radius, side="left"))
                if i > 0 and ts[min(i, len(ts) - 1)] != radius:
                    mu_r = float(np.interp(radius, ts, mus))
                    cum_r = radial_measure(intensity, 1.0, radius)
                    ts = np.append(ts[:i], radius)
                    mus = np.append(mus[:i], mu_r)
                    cum = np.append(cum[:i], cum_r)
                else:
                    ts, mus, cum = ts[:i + 1], mus[:i + 1], cum[:i + 1]
                tab_total[k] = cum[-1]
            else:
                tab_total[k] = radial_measure(intensity, 1.0, radius)
                if intensity.tail_coeff is not None and intensity.tail_coeff > 0.0:
                    tab_tail_c[k] = intensity.tail_coeff
                    tab_tail_p[k] = intensity.tail_exponent
            tab_t.append(ts)
            tab_mu.append(mus)
            tab_cum.append(cum)

        if (dist_code[k] == _DIST_POWER and dist_p[k] == 2.0
                and pl_code[k] == _PL_INV1P and alpha[k] == 4.0
                and fad_code[k] in (_FAD_DET, _FAD_RAYLEIGH)):
            fast4[k] = 1
            c4[k] = radius ** 4

    # rebuild table offsets cleanly (one slice per table tier, in tier order)
    off = [0]
    ti = 0
    for k in range(k_tiers):
        if dist_code[k] == _DIST_TABLE:
            off.append(off[-1] + len(tab_t[ti]))
            ti += 1
        else:
            off.append(off[-1])
    tab_off = np.asarray(off, dtype=np.int64)
    cat = (lambda parts: np.concatenate(parts) if parts else np.zeros(0))
    return ScenarioPack(power, lam_n, fixed_m, dist_code, dist_p, pl_code,
                        alpha, fast4, c4, fad_code, fad_a, fad_b, tab_off,
                        cat(tab_t), cat(tab_mu), cat(tab_cum), tab_total,
                        tab_tail_c, tab_tail_p, float(radius))


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @nb.njit(nb.uint64(nb.uint64), cache=True, inline="always")
    def _mix64(z):
        z = (z ^ (z >> _U64(30))) * _MIXK1
        z = (z ^ (z >> _U64(27))) * _MIXK2
        return z ^ (z >> _U64(31))

    @nb.njit(cache=True, inline="always")
    def _stream_seed(seed, rep, tier):
        h = _mix64(seed + _GOLDEN)
        h = _mix64(h ^ _mix64(_U64(rep) * _MIXK1 + _GOLDEN))
        return _mix64(h ^ _mix64(_U64(tier) * _MIXK2 + _GOLDEN))

    @nb.njit(cache=True, inline="always")
    def _next_unit(state):
        state = state + _GOLDEN
        z = _mix64(state)
        return (z >> _U64(11)) * _INV53, state

    @nb.njit(cache=True, inline="always")
    def _exp_std(state, zx, zr):
        """Standard exponential via the 256-layer ziggurat."""
        shift = 0.0
        while True:
            state = state + _GOLDEN
            z = _mix64(state)
            i = int(z & _U64(255))
            u = ((z >> _U64(11)) | _U64(1)) * _INV53
            x = u * zx[i]
            if u < zr[i]:
                return shift + x, state
            if i == 0:
                shift += zx[1]  # tail restart: X > r implies X - r ~ Exp(1)
                continue
            f_lo = math.exp(-zx[i])
            f_hi = math.exp(-zx[i + 1])
            u2, state = _next_unit(state)
            if f_hi - u2 * (f_hi - f_lo) < math.exp(-x):
                return shift + x, state

    @nb.njit(cache=True, inline="always")
    def _normal_std(state):
        u1, state = _next_unit(state)
        u2, state = _next_unit(state)
        r = math.sqrt(-2.0 * math.log1p(-u1))
        return r * math.cos(_TWO_PI * u2), state

    @nb.njit(cache=True)
    def _gamma_std(shape, state):
        """Gamma(shape, 1) via Marsaglia-Tsang squeeze (shape >= 0.5)."""
        boost = 1.0
        a = shape
        if a < 1.0:
            u, state = _next_unit(state)
            boost = (1.0 - u) ** (1.0 / a)
            a += 1.0
        d = a - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x, state = _normal_std(state)
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u, state = _next_unit(state)
            x2 = x * x
            if u < 1.0 - 0.0331 * x2 * x2:
                return boost * d * v, state
            if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
                return boost * d * v, state

    @nb.njit(cache=True)
    def _poisson(lam, state):
        if lam < 10.0:
            enlam = math.exp(-lam)
            n = 0
            prod = 1.0
            while True:
                u, state = _next_unit(state)
                prod *= u
                if prod > enlam:
                    n += 1
                else:
                    return n, state
        # Hormann's PTRS transformed rejection, valid for lam >= 10
        slam = math.sqrt(lam)
        loglam = math.log(lam)
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        invalpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2.0)
        while True:
            u, state = _next_unit(state)
            u -= 0.5
            v, state = _next_unit(state)
            us = 0.5 - abs(u)
            n = int(math.floor((2.0 * a / us + b) * u + lam + 0.43))
            if us >= 0.07 and v <= vr:
                return n, state
            if n < 0 or (us < 0.013 and v > us):
                continue
            if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                    <= n * loglam - lam - math.lgamma(n + 1.0)):
                return n, state

    @nb.njit(cache=True, inline="always")
    def _draw_fading(code, pa, pb, state, zx, zr):
        if code == 0:
            return pa, state
        if code == 1:
            e, state = _exp_std(state, zx, zr)
            return pa * e, state
        if code == 2:
            g, state = _gamma_std(pa, state)
            return pb * g, state
        z1, state = _normal_std(state)
        z2, state = _normal_std(state)
        z1 += pa
        return pb * (z1 * z1 + z2 * z2), state

    @nb.njit(cache=True, inline="always")
    def _g_eval(code, alpha, t):
        if code == 0:
            return 1.0 / (1.0 + t ** alpha)
        if code == 1:
            if t <= 1.0:
                return 1.0
            return t ** -alpha
        return (1.0 + t) ** -alpha

    @nb.njit(cache=True, inline="always")
    def _invert_table(u, off0, off1, total, tail_c, tail_p, radius,
                      tab_t, tab_mu, tab_cum):
        target = u * total
        last = off1 - 1
        if tail_c > 0.0 and target > tab_cum[last]:
            tl = tab_t[last]
            t = (tl ** tail_p
                 + tail_p * (target - tab_cum[last]) / tail_c) ** (1.0 / tail_p)
            return min(t, radius)
        lo, hi = off0, last  # rightmost knot with cum <= target
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if tab_cum[mid] <= target:
                lo = mid
            else:
                hi = mid - 1
        i = min(lo, last - 1)
        mu0 = tab_mu[i]
        seg = tab_t[i + 1] - tab_t[i]
        slope = (tab_mu[i + 1] - mu0) / seg
        y = target - tab_cum[i]
        disc = math.sqrt(max(mu0 * mu0 + 2.0 * slope * y, 0.0))
        denom = mu0 + disc
        d = 2.0 * y / denom if denom > 0.0 else 0.0
        return min(tab_t[i] + min(d, seg), radius)

    @nb.njit(nb.float64[:](
        nb.uint64, nb.int64, nb.int64,
        nb.float64[:], nb.float64[:], nb.int64[:],
        nb.int64[:], nb.float64[:], nb.int64[:], nb.float64[:],
        nb.int64[:], nb.float64[:],
        nb.int64[:], nb.float64[:], nb.float64[:],
        nb.int64[:], nb.float64[:], nb.float64[:], nb.float64[:],
        nb.float64[:], nb.float64[:], nb.float64[:],
        nb.float64, nb.float64[:], nb.float64[:]),
        parallel=True, cache=True, fastmath=True)
    def _mc_kernel(seed, reps, construction,
                   power, lam_n, fixed_m,
                   dist_code, dist_p, pl_code, alpha,
                   fast4, c4, fad_code, fad_a, fad_b,
                   tab_off, tab_t, tab_mu, tab_cum,
                   tab_total, tab_tail_c, tab_tail_p,
                   radius, zx, zr):
        out = np.empty(reps)
        n_tiers = power.shape[0]
        for r in nb.prange(reps):
            acc = 0.0
            for k in range(n_tiers):
                if lam_n[k] <= 0.0:
                    continue
                state = _stream_seed(seed, r, k)
                if construction == 0:
                    m, state = _poisson(lam_n[k], state)
                else:
                    m = fixed_m[k]
                sub = 0.0
                if fast4[k] == 1:
                    cc = c4[k]
                    if fad_code[k] == 1:
                        for _ in range(m):
                            u, state = _next_unit(state)
                            h, state = _exp_std(state, zx, zr)
                            sub += h / (1.0 + cc * u * u)
                        sub *= fad_a[k]
                    else:
                        for _ in range(m):
                            u, state = _next_unit(state)
                            sub += 1.0 / (1.0 + cc * u * u)
                        sub *= fad_a[k]
                else:
                    for _ in range(m):
                        u, state = _next_unit(state)
                        if dist_code[k] == 0:
                            t = radius * u ** (1.0 / dist_p[k])
                        else:
                            t = _invert_table(u, tab_off[k], tab_off[k + 1],
                                              tab_total[k], tab_tail_c[k],
                                              tab_tail_p[k], radius,
                                              tab_t, tab_mu, tab_cum)
                        g = _g_eval(pl_code[k], alpha[k], t)
                        h, state = _draw_fading(fad_code[k], fad_a[k], fad_b[k],
                                                state, zx, zr)
                        sub += h * g
                acc += power[k] * sub
            out[r] = acc
        return out

    @nb.njit(cache=True)
    def _sampler_probe(kind, n, seed, pa, pb, zx, zr):
        """Expose the kernel-internal samplers for statistical testing."""
        out = np.empty(n)
        state = _stream_seed(seed, 0, 0)
        for i in range(n):
            if kind == 0:
                v, state = _next_unit(state)
            elif kind == 1:
                v, state = _exp_std(state, zx, zr)
            elif kind == 2:
                v, state = _normal_std(state)
            elif kind == 3:
                v, state = _gamma_std(pa, state)
            else:
                m, state = _poisson(pa, state)
                v = float(m)
            out[i] = v
        return out


def sampler_probe(kind: str, n: int, seed: int = 1, pa: float = 0.0,
                  pb: float = 0.0) -> np.ndarray:
    codes = {"uniform": 0, "exponential": 1, "normal": 2, "gamma": 3, "poisson": 4}
    if not HAS_NUMBA:
        raise RuntimeError("sampler probe requires the numba backend")
    return _sampler_probe(codes[kind], n, _U64(np.uint64(seed)), pa, pb,
                          _ZIG_X, _ZIG_RATIO)


# ---------------------------------------------------------------------------
# backend selection and dispatch
# ---------------------------------------------------------------------------

def active_backend() -> str:
    """Resolve the simulation backend from HCN_GAUSS_BACKEND."""
    env = os.environ.get("HCN_GAUSS_BACKEND", "auto").strip().lower()
    if env in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if env == "numpy":
        return "numpy"
    if env == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("HCN_GAUSS_BACKEND=numba but numba is not importable")
        return "numba"
    raise ValueError(f"unknown HCN_GAUSS_BACKEND value {env!r}")


def thread_cap() -> int:
    env = os.environ.get("HCN_GAUSS_THREADS", "")
    limit = nb.config.NUMBA_NUM_THREADS if HAS_NUMBA else 1
    if env.isdigit() and int(env) > 0:
        return max(1, min(int(env), limit))
    return limit


def run_kernel(s: Scenario, radius: float, replications: int, seed: int,
               construction: int) -> np.ndarray:
    """Execute the JIT kernel for all replications (numba backend)."""
    if not HAS_NUMBA:
        raise RuntimeError("numba backend unavailable")
    nb.set_num_threads(thread_cap())
    p = pack_scenario(s, radius)
    return _mc_kernel(_U64(np.uint64(seed)), replications, construction,
                      p.power, p.lam_n, p.fixed_m, p.dist_code, p.dist_p,
                      p.pl_code, p.alpha, p.fast4, p.c4, p.fad_code, p.fad_a,
                      p.fad_b, p.tab_off, p.tab_t, p.tab_mu, p.tab_cum,
                      p.tab_total, p.tab_tail_c, p.tab_tail_p, p.radius,
                      _ZIG_X, _ZIG_RATIO)
