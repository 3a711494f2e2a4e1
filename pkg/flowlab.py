"""
Flow Lab - the dynamical side of the search.

Orbits a(kappa t) u(theta) gamma Gamma_N are sampled on a time grid; Delta along them
gives cusp excursions, time averages of cusp indicators estimate Haar masses, and two
cross-checks reconcile the flow with the direct search in diosearch.

theta is a 53-bit dyadic rational, so a single orbit stays generic only up to a
precision horizon. Long averaging horizons are covered by renewal windows: window j
observes the orbit of a derived theta_j on [burn_in, burn_in + window), and the last
window is cut short so that exactly T_horizon / step samples are averaged.
"""

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dani import ApproxFunction, psi_to_rate, start_time
from diosearch import ThetaMatrix, best_p_for_q, class_box, enumerate_solutions
from lattice import (
    DEFAULT_BUDGET,
    CongruenceClassPoint,
    LatticeElement,
    delta_value,
    in_eps_cusp,
    integer_det,
    is_primitive,
    primitive_representative,
    shortest_class_vector,
    unimodular_completion,
)
from numkit import CongruenceConstraint, WeightPair, condition_three_holds, theta_array
from run_log import warn

THETA_BITS = 53
# floor(2^53 (sqrt(5) - 1) / 2)
PHI_NUMERATOR = (math.isqrt(5 << (2 * THETA_BITS)) - (1 << THETA_BITS)) // 2
MIN_SAMPLES = 100
DEFAULT_SLACK = math.log(2.0)
CHECK_RTOL = 1e-9


class HorizonError(ValueError):
    """Requested horizon or window does not fit the orbit sampling constraints."""


@dataclass(frozen=True)
class OrbitSpec:
    """The orbit a(kappa t) u(theta) gamma Gamma_N, tracked through gamma e_1."""

    theta: Tuple[Tuple[float, ...], ...]
    gamma: Tuple[Tuple[int, ...], ...]
    N: int
    weights: WeightPair
    kappa: float = 1.0
    t_grid: Tuple[float, ...] = ()

    def __post_init__(self):
        th = theta_array(self.theta)
        object.__setattr__(self, "theta", tuple(tuple(float(x) for x in row) for row in th))
        gamma = tuple(tuple(int(x) for x in row) for row in np.asarray(self.gamma, dtype=object))
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if th.shape != (self.weights.m, self.weights.n):
            raise ValueError(f"theta shape {th.shape} does not match weights {self.weights.to_dict()}")
        if len(gamma) != self.weights.d or integer_det(gamma) != 1:
            raise ValueError(f"gamma must be a {self.weights.d}x{self.weights.d} integer matrix of det 1")
        if self.N < 1 or self.kappa <= 0:
            raise ValueError(f"Need N >= 1 and kappa > 0, got N={self.N}, kappa={self.kappa}")
        if any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ValueError("t_grid must be strictly increasing")

    @classmethod
    def for_class(cls, theta, v: Sequence[int], N: int, weights: Optional[WeightPair] = None,
                  kappa: float = 1.0, t_grid: Sequence[float] = ()) -> "OrbitSpec":
        th = theta_array(theta)
        weights = weights or WeightPair.uniform(*th.shape)
        gamma = unimodular_completion(primitive_representative(v, N))
        return cls(th, gamma, N, weights, kappa, tuple(t_grid))

    @property
    def class_vector(self) -> Tuple[int, ...]:
        """gamma e_1."""
        return tuple(row[0] for row in self.gamma)

    def with_theta(self, theta) -> "OrbitSpec":
        return replace(self, theta=theta)

    def point_at(self, t: float) -> CongruenceClassPoint:
        element = LatticeElement.from_orbit(t, self.weights, self.theta, self.gamma, self.kappa)
        e1 = tuple([1] + [0] * (self.weights.d - 1))
        return CongruenceClassPoint(element, self.N, e1)


@dataclass(frozen=True)
class ErgodicEstimate:
    T: float
    observable: str
    value: float
    samples: int

    def to_row(self) -> dict:
        return {"T": self.T, "observable": self.observable, "value": self.value, "samples": self.samples}


@dataclass(frozen=True)
class RenewalPlan:
    window: float = 10.0
    burn_in: float = 2.0
    step: float = 0.05

    def __post_init__(self):
        if self.step <= 0 or self.window < self.step or self.burn_in < 0:
            raise HorizonError(f"Invalid renewal plan {self}")

    def times(self) -> np.ndarray:
        return self.burn_in + self.step * np.arange(self.steps_per_window())

    def steps_per_window(self) -> int:
        return int(round(self.window / self.step))

    def window_sizes(self, T_horizon: float) -> List[int]:
        """Samples taken in each window; the last one stops at T_horizon."""
        full = self.steps_per_window()
        total = int(math.floor(T_horizon / self.step + 1e-9))
        return [min(full, total - j * full) for j in range(math.ceil(total / full))]

    def windows(self, T_horizon: float) -> int:
        return max(1, len(self.window_sizes(T_horizon)))


@dataclass
class CrosscheckVerdict:
    fired: int = 0
    passed: int = 0
    failed: int = 0
    details: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        return f"fired={self.fired} pass={self.passed} fail={self.failed}"

    def merge(self, other: "CrosscheckVerdict") -> "CrosscheckVerdict":
        return CrosscheckVerdict(self.fired + other.fired, self.passed + other.passed,
                                 self.failed + other.failed, self.details + other.details)


def precision_horizon(weights: WeightPair, kappa: float = 1.0) -> float:
    """Flow time after which 53-bit theta no longer separates orbit vectors."""
    return (THETA_BITS / 2) * math.log(2) / (kappa * float(np.max(weights.exponents())))


def check_plan(spec: OrbitSpec, plan: RenewalPlan):
    limit = precision_horizon(spec.weights, spec.kappa)
    if plan.burn_in + plan.window > limit:
        raise HorizonError(
            f"Window ends at t={plan.burn_in + plan.window!r}, beyond the precision horizon {limit:.3f}"
        )


def renewal_theta(theta, j: int) -> np.ndarray:
    """theta for renewal window j: entry-wise Weyl steps of the golden ratio on 53-bit numerators."""
    th = theta_array(theta)
    if j == 0:
        return th
    out = np.empty(th.shape)
    for idx, (pos, x) in enumerate(np.ndenumerate(th)):
        frac = Fraction(float(x)) % 1
        K = math.floor(frac * (1 << THETA_BITS))
        K_j = (K + j * PHI_NUMERATOR * (idx + 1)) % (1 << THETA_BITS)
        out[pos] = math.ldexp(float(K_j), -THETA_BITS)
    return out


def cusp_indicator(delta, eps: float):
    """Delta > log(1/eps): a sup-norm orbit vector shorter than eps."""
    return np.asarray(delta) > math.log(1.0 / eps)


def orbit_delta_series(spec: OrbitSpec, budget: int = DEFAULT_BUDGET) -> List[Tuple[float, float]]:
    return [(t, delta_value(spec.point_at(t), budget)) for t in spec.t_grid]


def window_deltas(spec: OrbitSpec, T_horizon: float, plan: RenewalPlan = RenewalPlan(),
                  budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Delta at the T_horizon / step sample times, renewal window after renewal window."""
    check_plan(spec, plan)
    sizes = plan.window_sizes(T_horizon)
    if sum(sizes) < MIN_SAMPLES:
        raise HorizonError(
            f"T_horizon={T_horizon!r} at step {plan.step!r} gives {sum(sizes)} orbit samples; "
            f"need at least {MIN_SAMPLES}"
        )
    times = plan.times()
    values = []
    for j, size in enumerate(sizes):
        s = spec.with_theta(renewal_theta(spec.theta, j))
        values.extend(delta_value(s.point_at(float(t)), budget) for t in times[:size])
    return np.array(values, dtype=float)


def _check_samples(deltas: np.ndarray):
    if deltas.size < MIN_SAMPLES:
        raise HorizonError(f"Only {deltas.size} orbit samples; need at least {MIN_SAMPLES}")


def cusp_mass_from_deltas(delta_arrays: Sequence[np.ndarray], eps_list: Sequence[float],
                          T_horizon: float) -> List[ErgodicEstimate]:
    """Time-and-sample average of the cusp indicator, one estimate per eps."""
    for eps in eps_list:
        if not 0 < eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
    for arr in delta_arrays:
        _check_samples(arr)
    flat = np.concatenate([np.ravel(a) for a in delta_arrays])
    return [
        ErgodicEstimate(T_horizon, f"cusp(eps={eps!r})", float(np.mean(cusp_indicator(flat, eps))), flat.size)
        for eps in eps_list
    ]


def cusp_mass_table(theta_samples: Sequence, N: int, gamma, T_horizon: float, eps_list: Sequence[float],
                    weights: Optional[WeightPair] = None, kappa: float = 1.0,
                    plan: RenewalPlan = RenewalPlan(), budget: int = DEFAULT_BUDGET) -> List[ErgodicEstimate]:
    if not theta_samples:
        raise ValueError("At least one theta sample is required")
    arrays = []
    for theta in theta_samples:
        th = theta_array(theta)
        spec = OrbitSpec(th, gamma, N, weights or WeightPair.uniform(*th.shape), kappa)
        arrays.append(window_deltas(spec, T_horizon, plan, budget))
    return cusp_mass_from_deltas(arrays, eps_list, T_horizon)


def estimate_cusp_mass(theta_samples: Sequence, N: int, gamma, T_horizon: float, eps: float,
                       weights: Optional[WeightPair] = None, kappa: float = 1.0,
                       plan: RenewalPlan = RenewalPlan(), budget: int = DEFAULT_BUDGET) -> ErgodicEstimate:
    """Estimate of the Haar mass of the eps-cusp (sup-norm convention) from orbit averages."""
    return cusp_mass_table(theta_samples, N, gamma, T_horizon, [eps], weights, kappa, plan, budget)[0]


def fit_tail_slope(Ts: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against T."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2 or np.any(values <= 0):
        raise ValueError("Need at least two positive estimates to fit a tail slope")
    slope, _ = np.polyfit(np.asarray(Ts, dtype=float), np.log(values), 1)
    return float(slope)


def joint_average(specs: Sequence[OrbitSpec], eps_list: Sequence[float], T_horizon: float,
                  plan: RenewalPlan = RenewalPlan(), budget: int = DEFAULT_BUDGET) -> Tuple[float, float]:
    """
    (time average of the product of cusp indicators, product of their time averages)
    along orbits that share theta.
    """
    if not specs or len(specs) != len(eps_list):
        raise ValueError("Need one eps per orbit spec")
    if any(s.theta != specs[0].theta for s in specs):
        raise ValueError("Coupled orbits must share theta")
    if not condition_three_holds([s.kappa for s in specs], [s.weights for s in specs]):
        warn("kappa_i (alpha_i, beta_i) is not componentwise increasing; the coupled orbits need not decorrelate")
    indicators = []
    for spec, eps in zip(specs, eps_list):
        deltas = window_deltas(spec, T_horizon, plan, budget)
        _check_samples(deltas)
        indicators.append(cusp_indicator(deltas, eps))
    joint = float(np.mean(np.logical_and.reduce(indicators)))
    product = float(np.prod([np.mean(ind) for ind in indicators]))
    return joint, product


def _corollary_search(th: ThetaMatrix, v: Sequence[int], N: int, wp: WeightPair, eps: float,
                      s: float, budget: int) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Primitive (p, q) = v mod N with |theta q + p|_alpha < eps e^-s and |q|_beta < eps e^s."""
    m, n = th.m, th.n
    alpha, beta = wp.alpha.as_array(), wp.beta.as_array()
    q_bound = eps * math.exp(s)
    r_bound = eps * math.exp(-s)
    half = [math.floor(q_bound ** b * (1 + CHECK_RTOL)) for b in beta]
    Q = class_box(half, v[m:], [N] * n, budget)
    if len(Q) == 0:
        return None
    res, slack = th.screen(Q, v[:m], [N] * m)
    ra_low = np.max(np.maximum(res - slack, 0.0) ** (1.0 / alpha), axis=1)
    qb = np.max(np.abs(Q).astype(float) ** (1.0 / beta), axis=1)
    keep = np.flatnonzero((qb < q_bound * (1 + CHECK_RTOL)) & (ra_low < r_bound * (1 + CHECK_RTOL)))
    S = th.scale
    for idx in keep:
        q = tuple(int(x) for x in Q[idx])
        xs = th.scaled_product(q)
        best = best_p_for_q(th, q, v[:m], [N] * m)
        options = []
        for j in range(m):
            near = [best[j] + k * N for k in (0, -1, 1)]
            options.append([
                pj for pj in near
                if math.ldexp(float(abs(xs[j] + pj * S)), -th.exponent) ** (1.0 / alpha[j]) < r_bound * (1 + CHECK_RTOL)
            ])
        for p in itertools.product(*options):
            if is_primitive(p + q):
                return tuple(p), q
    return None


def crosscheck_corollary(spec: OrbitSpec, eps: float, times: Sequence[float],
                         budget: int = DEFAULT_BUDGET) -> CrosscheckVerdict:
    """
    Whenever the orbit point at time t lies in the Euclidean eps-cusp, a box search must
    find a primitive (p, q) in P_N(gamma e_1) with
    |theta q + p|_alpha < eps e^(-kappa t) and |q|_beta < eps e^(kappa t).
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    th = ThetaMatrix(spec.theta)
    v = [x % spec.N for x in spec.class_vector]
    verdict = CrosscheckVerdict()
    for t in times:
        if not in_eps_cusp(spec.point_at(float(t)), eps, "euclid", budget):
            continue
        verdict.fired += 1
        found = _corollary_search(th, v, spec.N, spec.weights, eps, spec.kappa * float(t), budget)
        if found is None:
            verdict.failed += 1
            verdict.details.append({"check": "corollary", "t": float(t), "eps": eps, "passed": False})
        else:
            verdict.passed += 1
            p, q = found
            verdict.details.append({"check": "corollary", "t": float(t), "eps": eps, "passed": True,
                                    "p": list(p), "q": list(q)})
    return verdict


def crosscheck_dani(spec: OrbitSpec, psi: ApproxFunction, Tmax: float, slack: float = DEFAULT_SLACK,
                    step: float = 0.05, budget: int = DEFAULT_BUDGET) -> CrosscheckVerdict:
    """
    Reconcile solutions of |theta q + p|^m <= psi(|q|^n) with excursions Delta >= r(t).

    Forward: every primitive solution in the class gives Delta >= r(t) - slack at the t
    with e^lambda(t) = |q|^n. Converse: every grid crossing Delta >= r(t) has a minimizer
    whose q solves the inequality for psi scaled by e^(m slack).
    """
    wp = spec.weights
    m, n = wp.m, wp.n
    if wp != WeightPair.uniform(m, n) or spec.kappa != 1.0:
        raise ValueError("The Dani reconciliation is stated for equal weights and kappa = 1")
    rate = psi_to_rate(psi, m, n, span=max(Tmax - start_time(psi, m, n), step) + step, step=min(step, 0.01))
    if Tmax <= rate.t0:
        raise ValueError(f"Tmax={Tmax!r} must exceed the start time t0={rate.t0!r}")
    v = spec.class_vector
    cs = CongruenceConstraint(tuple([spec.N] * wp.d), tuple(x % spec.N for x in v))
    Qmax = int(math.floor(math.exp(rate.lam(Tmax) / n))) + 1
    verdict = CrosscheckVerdict()

    for rec in enumerate_solutions(spec.theta, psi, cs, Qmax, budget=budget):
        if not is_primitive(rec.p + rec.q):
            continue
        y = n * math.log(rec.qnorm)
        if y < rate.lam(rate.t0):
            continue
        t = rate.lam_inverse(y)
        if t > Tmax:
            continue
        delta = delta_value(spec.point_at(t), budget)
        ok = delta >= rate.r(t) - slack
        verdict.fired += 1
        verdict.passed += ok
        verdict.failed += not ok
        if not ok:
            verdict.details.append({"check": "dani_forward", "t": t, "q": list(rec.q),
                                    "delta": delta, "r": rate.r(t), "passed": False})

    wider = {rec.q for rec in enumerate_solutions(spec.theta, psi.scaled(math.exp(m * slack)), cs, Qmax,
                                                  budget=budget)}
    gamma = np.array(spec.gamma, dtype=object)
    for t in rate.t0 + step * np.arange(int(math.floor((Tmax - rate.t0) / step)) + 1):
        t = float(t)
        shortest = shortest_class_vector(spec.point_at(t), budget)
        if -math.log(shortest.value) < rate.r(t):
            continue
        pq = [int(x) for x in gamma.dot(np.array(shortest.w, dtype=object))]
        q = tuple(pq[m:])
        if not any(q) or float(max(abs(x) for x in q)) ** n < psi.x0:
            continue
        ok = q in wider
        verdict.fired += 1
        verdict.passed += ok
        verdict.failed += not ok
        if not ok:
            verdict.details.append({"check": "dani_converse", "t": t, "p": pq[:m], "q": list(q),
                                    "passed": False})
    return verdict
