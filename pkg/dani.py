"""
Dani correspondence between approximation functions psi and rate functions r.

    lambda(t) = t - n r(t)     strictly increasing, unbounded
    L(t)      = t + m r(t)     nondecreasing
    psi(e^{lambda(t)}) = e^{-L(t)}

Everything is done in log space: log psi and the exponents lambda, L are what the
flow side (flowlab) consumes.
"""

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

DEFAULT_STEP = 0.01
DEFAULT_SPAN = 20.0
BISECT_XTOL = 1e-12
MAX_BRACKET = 1e6
QUAD_RTOL = 1e-6


class DomainError(ValueError):
    """Argument below the domain start of the function."""


class RateValidityError(ValueError):
    """Rate function violates lambda strictly increasing."""


class BracketError(RuntimeError):
    """Bisection bracket could not be found within the configured bounds."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


# --- approximation functions -------------------------------------------------

class ApproxFunction:
    """A continuous, positive, non-increasing psi on [x0, inf)."""

    x0: float = 1.0

    def log_psi_log(self, lx: float) -> float:
        """log psi(e^lx)."""
        raise NotImplementedError

    def log_psi(self, x: float) -> float:
        return self.log_psi_log(math.log(x))

    def log_psi_log_array(self, lx: np.ndarray) -> np.ndarray:
        return np.array([self.log_psi_log(float(v)) for v in np.ravel(lx)]).reshape(np.shape(lx))

    def describe(self) -> dict:
        raise NotImplementedError

    def _log_psi_extended(self, lx: float) -> float:
        # Constant continuation below x0 keeps psi non-increasing on (0, inf).
        return self.log_psi_log(max(lx, math.log(self.x0)))

    def scaled(self, factor: float) -> "ApproxFunction":
        return Scaled(self, factor)


@dataclass(frozen=True)
class PowerLaw(ApproxFunction):
    c: float
    delta: float
    x0: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"PowerLaw needs c > 0, got {self.c}")
        if self.delta < 0:
            raise ValueError(f"PowerLaw needs delta >= 0 to be non-increasing, got {self.delta}")
        if self.x0 <= 0:
            raise ValueError(f"Domain start must be positive, got {self.x0}")

    def log_psi_log(self, lx: float) -> float:
        return math.log(self.c) - self.delta * lx

    def log_psi_log_array(self, lx: np.ndarray) -> np.ndarray:
        return math.log(self.c) - self.delta * np.asarray(lx, dtype=float)

    def describe(self) -> dict:
        return {"kind": "power", "c": self.c, "delta": self.delta, "x0": self.x0}


@dataclass(frozen=True)
class Tabulated(ApproxFunction):
    """Breakpoints (x_i, psi_i) joined linearly in (log x, log psi); last segment extrapolated."""

    xs: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)
        if len(xs) < 2 or len(xs) != len(values):
            raise ValueError("Tabulated psi needs at least two (x, psi) breakpoints")
        if xs[0] <= 0 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("Tabulated x values must be positive and strictly increasing")
        if any(v <= 0 for v in values) or any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("Tabulated psi values must be positive and non-increasing")
        object.__setattr__(self, "_lx", np.log(np.array(xs)))
        object.__setattr__(self, "_lv", np.log(np.array(values)))

    @property
    def x0(self) -> float:
        return self.xs[0]

    def log_psi_log(self, lx: float) -> float:
        if lx <= self._lx[-1]:
            return float(np.interp(lx, self._lx, self._lv))
        slope = (self._lv[-1] - self._lv[-2]) / (self._lx[-1] - self._lx[-2])
        return float(self._lv[-1] + slope * (lx - self._lx[-1]))

    def log_psi_log_array(self, lx: np.ndarray) -> np.ndarray:
        lx = np.asarray(lx, dtype=float)
        slope = (self._lv[-1] - self._lv[-2]) / (self._lx[-1] - self._lx[-2])
        tail = self._lv[-1] + slope * (lx - self._lx[-1])
        return np.where(lx <= self._lx[-1], np.interp(lx, self._lx, self._lv), tail)

    def describe(self) -> dict:
        return {"kind": "tabulated", "xs": list(self.xs), "values": list(self.values)}


@dataclass(frozen=True)
class Scaled(ApproxFunction):
    base: ApproxFunction
    factor: float

    @property
    def x0(self) -> float:
        return self.base.x0

    def log_psi_log(self, lx: float) -> float:
        return math.log(self.factor) + self.base.log_psi_log(lx)

    def log_psi_log_array(self, lx: np.ndarray) -> np.ndarray:
        return math.log(self.factor) + self.base.log_psi_log_array(lx)

    def describe(self) -> dict:
        return {"kind": "scaled", "factor": self.factor, "base": self.base.describe()}


@dataclass(frozen=True)
class RateInduced(ApproxFunction):
    """psi recovered from a rate function: invert lambda, return e^{-L}."""

    rate: "RateFunction"

    @property
    def x0(self) -> float:
        return math.exp(self.rate.lam(self.rate.t0))

    def log_psi_log(self, lx: float) -> float:
        return -self.rate.big_l(self.rate.lam_inverse(lx))

    def describe(self) -> dict:
        return {"kind": "rate_induced", "rate": self.rate.describe()}


def eval_psi(f: ApproxFunction, x: float) -> float:
    if x < f.x0:
        raise DomainError(f"psi evaluated at x={x!r} below its domain start x0={f.x0!r}")
    return math.exp(f.log_psi(x))


def load_tabulated_csv(path: str) -> Tabulated:
    """Read a tabulated psi from a CSV with header columns x, psi."""
    xs, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "psi"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected CSV columns 'x' and 'psi'")
        for row in reader:
            xs.append(float(row["x"]))
            values.append(float(row["psi"]))
    return Tabulated(tuple(xs), tuple(values))


def psi_from_dict(data: dict) -> ApproxFunction:
    kind = data.get("kind", "power")
    if kind == "power":
        return PowerLaw(float(data["c"]), float(data["delta"]), float(data.get("x0", 1.0)))
    if kind == "tabulated":
        if "csv" in data:
            return load_tabulated_csv(data["csv"])
        return Tabulated(tuple(data["xs"]), tuple(data["values"]))
    raise ValueError(f"Unknown psi kind: {kind!r}")


# --- rate functions ----------------------------------------------------------

class RateFunction:
    m: int
    n: int
    t0: float

    def r(self, t: float) -> float:
        raise NotImplementedError

    def lam(self, t: float) -> float:
        return t - self.n * self.r(t)

    def big_l(self, t: float) -> float:
        return t + self.m * self.r(t)

    def lam_inverse(self, y: float) -> float:
        """The t >= t0 with lambda(t) = y, by monotone bisection."""
        if y < self.lam(self.t0) - 1e-12:
            raise DomainError(f"lambda^-1({y!r}) lies before t0={self.t0!r}")
        lo = self.t0
        width = 10.0 + abs(y)
        hi = lo + width
        while self.lam(hi) < y:
            width *= 2
            hi = lo + width
            if width > MAX_BRACKET:
                raise BracketError(f"lambda never reaches {y!r}")
        if self.lam(lo) >= y:
            return lo
        return optimize.bisect(lambda t: self.lam(t) - y, lo, hi, xtol=BISECT_XTOL)

    def grid(self) -> np.ndarray:
        raise NotImplementedError

    def check(self):
        """Raise RateValidityError if lambda is not strictly increasing on the grid."""
        lam = np.array([self.lam(t) for t in self.grid()])
        if np.any(np.diff(lam) <= 0):
            raise RateValidityError("lambda(t) = t - n r(t) is not strictly increasing")

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class AffineRate(RateFunction):
    slope: float
    intercept: float
    m: int
    n: int
    t0: float = 0.0
    span: float = DEFAULT_SPAN
    step: float = DEFAULT_STEP

    def r(self, t: float) -> float:
        return self.slope * t + self.intercept

    def grid(self) -> np.ndarray:
        count = int(round(self.span / self.step))
        return self.t0 + self.step * np.arange(count + 1)

    def check(self):
        if 1.0 - self.n * self.slope <= 0:
            raise RateValidityError(
                f"Affine rate slope {self.slope!r} makes lambda non-increasing (n={self.n})"
            )

    def describe(self) -> dict:
        return {"kind": "affine", "slope": self.slope, "intercept": self.intercept,
                "m": self.m, "n": self.n, "t0": self.t0}


@dataclass(frozen=True)
class SampledRate(RateFunction):
    ts: Tuple[float, ...]
    rs: Tuple[float, ...]
    m: int
    n: int

    def __post_init__(self):
        if len(self.ts) < 2 or len(self.ts) != len(self.rs):
            raise ValueError("Sampled rate needs at least two grid points")
        object.__setattr__(self, "_t", np.array(self.ts, dtype=float))
        object.__setattr__(self, "_r", np.array(self.rs, dtype=float))

    @property
    def t0(self) -> float:
        return self.ts[0]

    def r(self, t: float) -> float:
        ts, rs = self._t, self._r
        if t > ts[-1]:
            slope = (rs[-1] - rs[-2]) / (ts[-1] - ts[-2])
            return float(rs[-1] + slope * (t - ts[-1]))
        if t < ts[0]:
            slope = (rs[1] - rs[0]) / (ts[1] - ts[0])
            return float(rs[0] + slope * (t - ts[0]))
        return float(np.interp(t, ts, rs))

    def grid(self) -> np.ndarray:
        return self._t

    def describe(self) -> dict:
        return {"kind": "sampled", "m": self.m, "n": self.n, "t0": self.t0,
                "t_end": self.ts[-1], "points": len(self.ts)}


def start_time(f: ApproxFunction, m: int, n: int) -> float:
    """t0 = (m/(m+n)) log x0 - (n/(m+n)) log psi(x0)."""
    d = m + n
    return (m / d) * math.log(f.x0) - (n / d) * f.log_psi(f.x0)


def power_law_rate(c: float, delta: float, m: int, n: int, x0: float = 1.0,
                   span: float = DEFAULT_SPAN, step: float = DEFAULT_STEP) -> AffineRate:
    """Closed form r(t) = ((delta - 1) t - log c) / (m + delta n) for psi(x) = c x^-delta."""
    denom = m + delta * n
    if denom <= 0:
        raise RateValidityError(f"m + delta*n must be positive, got {denom!r}")
    t0 = start_time(PowerLaw(c, delta, x0), m, n)
    return AffineRate((delta - 1.0) / denom, -math.log(c) / denom, m, n, t0, span, step)


def _solve_rate(f: ApproxFunction, t: float, m: int, n: int) -> float:
    """Unique root rho of log psi(e^{t - n rho}) + t + m rho (strictly increasing in rho)."""
    def g(rho):
        return f._log_psi_extended(t - n * rho) + t + m * rho

    bound = 10.0 + abs(t)
    while g(-bound) > 0 or g(bound) < 0:
        bound *= 2
        if bound > MAX_BRACKET:
            raise BracketError(f"No bisection bracket for r({t!r}); psi outside representable range")
    return optimize.bisect(g, -bound, bound, xtol=BISECT_XTOL)


def psi_to_rate(f: ApproxFunction, m: int, n: int, span: float = DEFAULT_SPAN,
                step: float = DEFAULT_STEP) -> SampledRate:
    t0 = start_time(f, m, n)
    count = int(round(span / step))
    ts = t0 + step * np.arange(count + 1)
    rs = [_solve_rate(f, float(t), m, n) for t in ts]
    return SampledRate(tuple(float(t) for t in ts), tuple(rs), m, n)


def rate_to_psi(r: RateFunction, m: Optional[int] = None, n: Optional[int] = None) -> RateInduced:
    if (m is not None and m != r.m) or (n is not None and n != r.n):
        raise ValueError(f"Rate was built for (m, n)=({r.m}, {r.n}), not ({m}, {n})")
    r.check()
    return RateInduced(r)


def identity_residual(f: ApproxFunction, r: RateFunction, t: float) -> float:
    """|log psi(e^{lambda(t)}) + L(t)|; zero when the Dani identity holds at t."""
    return abs(f._log_psi_extended(r.lam(t)) + r.big_l(t))


def _quad(func, a: float, b: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(func, a, b, epsrel=QUAD_RTOL, limit=200)
        except integrate.IntegrationWarning as e:
            raise QuadratureError(f"Quadrature on [{a}, {b}] failed: {e}") from e
    if not math.isfinite(value):
        raise QuadratureError(f"Quadrature on [{a}, {b}] returned {value!r}")
    return value


def divergence_probe(f: ApproxFunction, r: RateFunction, X: float, T: float) -> Tuple[float, float]:
    """
    Partial integrals (int_{x0}^X psi, int_{t0}^T e^{-(m+n) r}).

    The psi integral is taken in u = log x so that large X stays well conditioned.
    Convergence is left for the caller to judge from the growth of these partials.
    """
    if X <= f.x0 or T <= r.t0:
        raise DomainError(f"Need X > x0={f.x0!r} and T > t0={r.t0!r}")
    d = r.m + r.n
    psi_part = _quad(lambda u: math.exp(f.log_psi_log(u) + u), math.log(f.x0), math.log(X))
    rate_part = _quad(lambda t: math.exp(-d * r.r(t)), r.t0, T)
    return psi_part, rate_part
