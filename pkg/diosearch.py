"""
Diophantine Search - direct enumeration of congruence-constrained approximations.

theta is an m x n matrix of floats, i.e. dyadic rationals K / 2^E. Candidate q are
screened in bulk with numpy floats; every reported (p, q) is then re-derived from the
integer numerators so residuals and class memberships are exact.

Residuals in enumerate_solutions / thmA_witnesses use the sup norm on R^m; thmB_witnesses
uses the quasi-norms of each class' weight pair.
"""

import bisect
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dani import ApproxFunction, eval_psi
from lattice import DEFAULT_BUDGET, EnumerationBudgetError, is_primitive
from numkit import (
    CongruenceConstraint,
    DimensionError,
    WeightPair,
    condition_three_holds,
    dyadic_numerators,
    theta_array,
)
from run_log import warn

DEFAULT_GRID_STEP = 0.05
SCREEN_RTOL = 1e-9
SCREEN_ATOL = 1e-14
WITNESS_CHUNK = 1024


@dataclass(frozen=True)
class SolutionRecord:
    p: Tuple[int, ...]
    q: Tuple[int, ...]
    residual: float
    qnorm: float
    scale: float
    class_index: int = 0

    def to_row(self) -> dict:
        return {
            "class_index": self.class_index,
            "scale": self.scale,
            "p": " ".join(str(x) for x in self.p),
            "q": " ".join(str(x) for x in self.q),
            "residual": self.residual,
            "qnorm": self.qnorm,
        }


@dataclass(frozen=True)
class Witness:
    Q: float
    records: Tuple[SolutionRecord, ...]


@dataclass
class WitnessReport:
    witnesses: List[Witness] = field(default_factory=list)
    params: Dict = field(default_factory=dict)

    @property
    def Qs(self) -> List[float]:
        return [w.Q for w in self.witnesses]

    def to_rows(self) -> List[dict]:
        rows = []
        for w in self.witnesses:
            for rec in w.records:
                rows.append({"Q": w.Q, **rec.to_row()})
        return rows


@dataclass(frozen=True)
class WitnessClass:
    """One congruence class of a simultaneous search, with its weights and rate kappa."""

    constraint: CongruenceConstraint
    weights: WeightPair
    kappa: float = 1.0


class ThetaMatrix:
    """theta as floats together with its exact dyadic numerators."""

    def __init__(self, theta):
        self.values = theta_array(theta)
        self.m, self.n = self.values.shape
        self.numerators, self.exponent = dyadic_numerators(self.values)
        self.scale = 1 << self.exponent

    def scaled_product(self, q: Sequence[int]) -> List[int]:
        """2^E * (theta q), exactly."""
        return [
            sum(int(self.numerators[j, k]) * int(q[k]) for k in range(self.n))
            for j in range(self.m)
        ]

    def residual_vector(self, q: Sequence[int], p: Sequence[int]) -> List[float]:
        """|theta q + p| coordinate-wise, correctly rounded."""
        return [
            math.ldexp(float(abs(x + int(pj) * self.scale)), -self.exponent)
            for x, pj in zip(self.scaled_product(q), p)
        ]

    def screen(self, Q: np.ndarray, residues: Sequence[int], moduli: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Float residuals |theta q + p| for every row q of Q with p the nearest class member,
        and a per-entry upper bound on their rounding error.
        """
        X = Q.astype(float) @ self.values.T
        v = np.asarray(residues, dtype=float)
        N = np.asarray(moduli, dtype=float)
        P = v + N * np.ceil((-X - v) / N - 0.5)
        slack = SCREEN_ATOL * (1.0 + np.abs(Q).astype(float) @ np.abs(self.values).T)
        return np.abs(X + P), slack


def _check_constraint(cs: CongruenceConstraint, m: int, n: int):
    if cs.d != m + n:
        raise DimensionError(f"Constraint has {cs.d} coordinates, theta needs {m + n}")


def best_p_for_q(theta, q: Sequence[int], residues: Optional[Sequence[int]] = None,
                 moduli: Optional[Sequence[int]] = None) -> Tuple[int, ...]:
    """
    Coordinate-wise the member of v_j + N_j Z nearest to -(theta q)_j, ties toward the
    smaller p_j.
    """
    th = theta if isinstance(theta, ThetaMatrix) else ThetaMatrix(theta)
    residues = [0] * th.m if residues is None else list(residues)
    moduli = [1] * th.m if moduli is None else list(moduli)
    if len(q) != th.n or len(residues) != th.m or len(moduli) != th.m:
        raise DimensionError(f"q / residues / moduli do not match theta of shape {(th.m, th.n)}")
    S = th.scale
    p = []
    for x, v, N in zip(th.scaled_product(q), residues, moduli):
        # k = ceil(y - 1/2) with y = (-x/S - v) / N
        a = -2 * x - 2 * int(v) * S - int(N) * S
        b = 2 * int(N) * S
        k = -((-a) // b)
        p.append(int(v) + int(N) * k)
    return tuple(p)


def class_box(half_widths: Sequence[int], residues: Sequence[int], moduli: Sequence[int],
              budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Nonzero integer q with |q_j| <= half_widths[j] and q_j = residues[j] mod moduli[j], lexicographic."""
    axes = []
    for b, v, N in zip(half_widths, residues, moduli):
        b = int(b)
        if b < 0:
            return np.zeros((0, len(half_widths)), dtype=np.int64)
        start = -b + ((int(v) + b) % int(N))
        axes.append(np.arange(start, b + 1, int(N), dtype=np.int64))
    size = math.prod(len(a) for a in axes)
    if size > budget:
        raise EnumerationBudgetError(f"Search box holds {size} vectors, budget is {budget}")
    if size == 0:
        return np.zeros((0, len(half_widths)), dtype=np.int64)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    return grid[np.any(grid != 0, axis=1)]


def enumerate_solutions(theta, psi: ApproxFunction, cs: CongruenceConstraint, Qmax: int,
                        class_index: int = 0, budget: int = DEFAULT_BUDGET) -> List[SolutionRecord]:
    """
    All (p, q) with 0 < |q|_inf <= Qmax in the class of cs, p = best_p_for_q, and
    |theta q + p|^m <= psi(|q|^n). Sorted by |q|, then q.
    """
    if Qmax < 1:
        raise ValueError(f"Qmax must be at least 1, got {Qmax}")
    th = ThetaMatrix(theta)
    m, n = th.m, th.n
    _check_constraint(cs, m, n)
    Q = class_box([Qmax] * n, cs.residues[m:], cs.moduli[m:], budget)
    if len(Q) == 0:
        return []
    qnorm = np.max(np.abs(Q), axis=1).astype(float)
    in_domain = qnorm ** n >= psi.x0
    bound = np.zeros(len(Q))
    if in_domain.any():
        levels, inverse = np.unique(qnorm[in_domain], return_inverse=True)
        bound[in_domain] = np.exp(psi.log_psi_log_array(n * np.log(levels)) / m)[inverse]
    res, slack = th.screen(Q, cs.residues[:m], cs.moduli[:m])
    lowest = np.max(np.maximum(res - slack, 0.0), axis=1)
    keep = np.flatnonzero(in_domain & (lowest <= bound * (1 + SCREEN_RTOL)))

    records = []
    for idx in keep:
        q = tuple(int(x) for x in Q[idx])
        qn = float(max(abs(x) for x in q))
        x = qn ** n
        if x < psi.x0:
            continue
        p = best_p_for_q(th, q, cs.residues[:m], cs.moduli[:m])
        residual = max(th.residual_vector(q, p))
        if residual ** m <= eval_psi(psi, x):
            records.append(SolutionRecord(p, q, residual, qn, qn, class_index))
    records.sort(key=lambda r: (r.qnorm, r.q))
    return records


def count_growth(theta, psi: ApproxFunction, cs: CongruenceConstraint, Q_grid: Sequence[int],
                 budget: int = DEFAULT_BUDGET) -> List[Tuple[int, int]]:
    """Cumulative number of solutions with |q| <= Q, for each Q of the grid."""
    grid = sorted(int(Q) for Q in Q_grid)
    if not grid:
        return []
    norms = [r.qnorm for r in enumerate_solutions(theta, psi, cs, grid[-1], budget=budget)]
    return [(Q, bisect.bisect_right(norms, Q)) for Q in grid]


def _covering_intervals(th: ThetaMatrix, cs: CongruenceConstraint, c: float, exponent: float,
                        Qmax: int, class_index: int, budget: int):
    """
    For each admissible q, the integer range of Q with |q| <= Q <= Qmax and
    residual^m <= c Q^(-exponent n).
    """
    m, n = th.m, th.n
    Q = class_box([Qmax] * n, cs.residues[m:], cs.moduli[m:], budget)
    out = []
    if len(Q) == 0:
        return out
    qnorm = np.max(np.abs(Q), axis=1).astype(float)
    res, slack = th.screen(Q, cs.residues[:m], cs.moduli[:m])
    lowest = np.max(np.maximum(res - slack, 0.0), axis=1)
    bound = (c * qnorm ** (-exponent * n)) ** (1.0 / m)
    keep = np.flatnonzero(lowest <= bound * (1 + SCREEN_RTOL))

    def holds(residual: float, scale: int) -> bool:
        return residual ** m <= c * float(scale) ** (-exponent * n)

    for idx in keep:
        q = tuple(int(x) for x in Q[idx])
        lo = max(abs(x) for x in q)
        p = best_p_for_q(th, q, cs.residues[:m], cs.moduli[:m])
        residual = max(th.residual_vector(q, p))
        if residual == 0:
            hi = Qmax
        else:
            log_hi = (math.log(c) - m * math.log(residual)) / (exponent * n)
            hi = Qmax if log_hi >= math.log(Qmax) else int(math.floor(math.exp(log_hi)))
            while hi >= lo and not holds(residual, hi):
                hi -= 1
            while hi < Qmax and holds(residual, hi + 1):
                hi += 1
        if hi >= lo:
            out.append((lo, hi, SolutionRecord(p, q, residual, float(lo), float(lo), class_index)))
    out.sort(key=lambda item: (item[0], item[2].q))
    return out


def thmA_witnesses(theta, classes: Sequence[CongruenceConstraint], c: float, delta: float,
                   Qmax: int, budget: int = DEFAULT_BUDGET) -> WitnessReport:
    """
    Integer Q in [1, Qmax] at which class 1 has |q| <= Q with residual^m <= c Q^-n and
    every further class has |q| <= Q with residual^m <= c Q^(-delta n).
    """
    if not classes:
        raise ValueError("At least one congruence class is required")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if c <= 0 or Qmax < 1:
        raise ValueError(f"Need c > 0 and Qmax >= 1, got c={c}, Qmax={Qmax}")
    th = ThetaMatrix(theta)
    for cs in classes:
        _check_constraint(cs, th.m, th.n)

    covered = np.ones(Qmax + 1, dtype=bool)
    covered[0] = False
    per_class = []
    for i, cs in enumerate(classes):
        intervals = _covering_intervals(th, cs, c, 1.0 if i == 0 else delta, Qmax, i, budget)
        marks = np.zeros(Qmax + 2, dtype=np.int64)
        for lo, hi, _ in intervals:
            marks[lo] += 1
            marks[hi + 1] -= 1
        covered &= np.cumsum(marks)[: Qmax + 1] > 0
        per_class.append(intervals)

    Qs = np.flatnonzero(covered)
    chosen = []
    for intervals in per_class:
        lo = np.array([it[0] for it in intervals], dtype=np.int64)
        hi = np.array([it[1] for it in intervals], dtype=np.int64)
        picks = np.empty(len(Qs), dtype=np.int64)
        for start in range(0, len(Qs), WITNESS_CHUNK):
            block = Qs[start:start + WITNESS_CHUNK, None]
            picks[start:start + WITNESS_CHUNK] = np.argmax((lo <= block) & (hi >= block), axis=1)
        chosen.append((intervals, picks))

    witnesses = []
    for k, Qv in enumerate(Qs):
        recs = []
        for intervals, picks in chosen:
            base = intervals[picks[k]][2]
            recs.append(SolutionRecord(base.p, base.q, base.residual, base.qnorm, float(Qv), base.class_index))
        witnesses.append(Witness(float(Qv), tuple(recs)))
    params = {"kind": "thmA", "c": c, "delta": delta, "Qmax": Qmax,
              "classes": [cs.to_dict() for cs in classes]}
    return WitnessReport(witnesses, params)


def q_grid(Qmax: float, h: float = DEFAULT_GRID_STEP, Qmin: float = 1.0) -> np.ndarray:
    """Geometric grid e^{h k} covering [Qmin, Qmax]."""
    if h <= 0 or Qmin <= 0 or Qmax < Qmin:
        raise ValueError(f"Invalid grid: h={h}, Qmin={Qmin}, Qmax={Qmax}")
    k0 = math.ceil(math.log(Qmin) / h - 1e-12)
    k1 = math.floor(math.log(Qmax) / h + 1e-12)
    return np.exp(h * np.arange(k0, k1 + 1))


def _signless(rec: SolutionRecord) -> Tuple[int, ...]:
    vec = rec.p + rec.q
    neg = tuple(-x for x in vec)
    return min(vec, neg)


def _pick_distinct(options: List[List[SolutionRecord]]) -> Optional[List[SolutionRecord]]:
    """One record per class, pairwise distinct up to sign (backtracking)."""
    chosen: List[SolutionRecord] = []
    used = set()

    def place(i: int) -> bool:
        if i == len(options):
            return True
        for rec in options[i]:
            key = _signless(rec)
            if key in used:
                continue
            used.add(key)
            chosen.append(rec)
            if place(i + 1):
                return True
            used.discard(key)
            chosen.pop()
        return False

    return list(chosen) if place(0) else None


def _class_candidates(th: ThetaMatrix, wc: WitnessClass, eps: float, grid: np.ndarray,
                      class_index: int, require_primitive: bool, budget: int):
    m, n = th.m, th.n
    cs, wp, kappa = wc.constraint, wc.weights, wc.kappa
    alpha, beta = wp.alpha.as_array(), wp.beta.as_array()
    top = eps * grid[-1] ** kappa
    half = [math.floor(top ** b) for b in beta]
    Q = class_box(half, cs.residues[m:], cs.moduli[m:], budget)
    if len(Q) == 0:
        return [], np.zeros(0), np.zeros(0)

    res, slack = th.screen(Q, cs.residues[:m], cs.moduli[:m])
    with np.errstate(divide="ignore"):
        ra_low = np.max(np.maximum(res - slack, 0.0) ** (1.0 / alpha), axis=1)
        upper = np.where(ra_low > 0, (eps / np.where(ra_low > 0, ra_low, 1.0)) ** (1.0 / kappa), np.inf)
    qb = np.max(np.abs(Q).astype(float) ** (1.0 / beta), axis=1)
    lower = (qb / eps) ** (1.0 / kappa)
    need = np.maximum(lower * (1 - SCREEN_RTOL), grid[0])
    keep = np.flatnonzero((lower * (1 - SCREEN_RTOL) <= grid[-1]) & (upper * (1 + SCREEN_RTOL) >= need))

    recs, ra_list, qb_list = [], [], []
    for idx in keep:
        q = tuple(int(x) for x in Q[idx])
        p = best_p_for_q(th, q, cs.residues[:m], cs.moduli[:m])
        if require_primitive and not is_primitive(p + q):
            continue
        rv = th.residual_vector(q, p)
        ra = max(r ** (1.0 / a) for r, a in zip(rv, alpha))
        qbv = max(abs(x) ** (1.0 / b) for x, b in zip(q, beta))
        recs.append(SolutionRecord(p, q, ra, qbv, 0.0, class_index))
        ra_list.append(ra)
        qb_list.append(qbv)
    order = sorted(range(len(recs)), key=lambda i: (qb_list[i], recs[i].q))
    return ([recs[i] for i in order], np.array([ra_list[i] for i in order]),
            np.array([qb_list[i] for i in order]))


def thmB_witnesses(theta, classes: Sequence[WitnessClass], eps: float, Q_grid: Sequence[float],
                   require_primitive: bool = False, distinct: bool = False,
                   budget: int = DEFAULT_BUDGET) -> WitnessReport:
    """
    Q of the grid at which every class i has (p, q) in its congruence class with
    |theta q + p|_{alpha_i} <= eps Q^-kappa_i and |q|_{beta_i} <= eps Q^kappa_i.

    require_primitive keeps only primitive (p, q); distinct asks for one solution per
    class, pairwise different up to sign.
    """
    if not classes:
        raise ValueError("At least one congruence class is required")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if any(wc.kappa <= 0 for wc in classes):
        raise ValueError("Every kappa must be positive")
    th = ThetaMatrix(theta)
    for wc in classes:
        _check_constraint(wc.constraint, th.m, th.n)
        if (wc.weights.m, wc.weights.n) != (th.m, th.n):
            raise DimensionError(f"Weights {wc.weights.to_dict()} do not match theta of shape {(th.m, th.n)}")
    if not condition_three_holds([wc.kappa for wc in classes], [wc.weights for wc in classes]):
        warn("kappa_i (alpha_i, beta_i) is not componentwise increasing; joint statements need not apply")

    grid = np.sort(np.asarray(Q_grid, dtype=float))
    params = {"kind": "thmB", "eps": eps, "require_primitive": require_primitive,
              "distinct": distinct, "grid": [float(grid[0]), float(grid[-1]), len(grid)] if len(grid) else [],
              "classes": [{"constraint": wc.constraint.to_dict(), "weights": wc.weights.to_dict(),
                           "kappa": wc.kappa} for wc in classes]}
    if len(grid) == 0:
        return WitnessReport([], params)

    per_class = []
    for i, wc in enumerate(classes):
        recs, ra, qb = _class_candidates(th, wc, eps, grid, i, require_primitive, budget)
        per_class.append((recs, ra, qb, wc.kappa))

    witnesses = []
    for Qv in grid:
        options = []
        for recs, ra, qb, kappa in per_class:
            ok = np.flatnonzero((ra <= eps * Qv ** (-kappa)) & (qb <= eps * Qv ** kappa))
            if len(ok) == 0:
                break
            options.append([recs[j] for j in ok])
        if len(options) < len(per_class):
            continue
        picked = _pick_distinct(options) if distinct else [opts[0] for opts in options]
        if picked is None:
            continue
        recs = tuple(SolutionRecord(r.p, r.q, r.residual, r.qnorm, float(Qv), r.class_index) for r in picked)
        witnesses.append(Witness(float(Qv), recs))
    return WitnessReport(witnesses, params)
