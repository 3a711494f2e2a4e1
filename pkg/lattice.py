"""
Lattice Tools - integer-lattice machinery for the congruence quotient X_N.

Lattice vectors are COLUMNS: a point g Gamma_N is represented by a d x d matrix g
and the marked orbit g P_N(v) = { g w : w primitive, w = v mod N }.

Searching that orbit means writing w = v + N z and solving a closed-vector problem
for the lattice N g Z^d around the target -g v; the basis is LLL-reduced first and
then enumerated Fincke-Pohst style.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from numkit import (
    WeightPair,
    a_matrix,
    as_exact,
    check_unimodular,
    dyadic_numerators,
    euclid_norm,
    flow_exponents,
    sup_norm,
    theta_array,
    u_matrix,
)

DEFAULT_BUDGET = 10 ** 7
LLL_DELTA = 0.99
RADIUS_MARGIN = 1e-9
GOLDEN = (1 + 5 ** 0.5) / 2
MAX_REFINE = 8

Norm = Union[str, WeightPair]


class NotPrimitiveError(ValueError):
    """Vector is zero or its entries share a common factor."""


class SingularBasisError(ValueError):
    """Basis does not span R^d."""


class EnumerationBudgetError(RuntimeError):
    """Enumeration visited more nodes than the configured budget."""


# --- integer helpers ---------------------------------------------------------

def is_primitive(w: Sequence[int]) -> bool:
    entries = [int(x) for x in w]
    return any(entries) and reduce(math.gcd, entries, 0) == 1


def _egcd(a: int, b: int) -> Tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def integer_det(M) -> int:
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    A = [[int(x) for x in row] for row in np.asarray(M, dtype=object)]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def unimodular_completion(v: Sequence[int]) -> np.ndarray:
    """
    An integer matrix gamma with det 1 and gamma e_1 = v, for primitive v.

    Row operations U (each a 2x2 extended-gcd block, det 1) bring v to e_1; the
    inverse of U, accumulated alongside, is gamma.
    """
    v = [int(x) for x in v]
    if not is_primitive(v):
        raise NotPrimitiveError(f"{v} is not primitive")
    d = len(v)
    x = list(v)
    gamma = [[int(i == j) for j in range(d)] for i in range(d)]
    for j in range(1, d):
        a, b = x[0], x[j]
        if b == 0:
            continue
        g, s, t = _egcd(a, b)
        # M = [[s, t], [-b/g, a/g]] has det 1 and M (a, b) = (g, 0); gamma <- gamma M^-1
        ag, bg = a // g, b // g
        x[0], x[j] = g, 0
        for row in gamma:
            c0, cj = row[0], row[j]
            row[0], row[j] = c0 * ag + cj * bg, -c0 * t + cj * s
    if x[0] == -1:
        if d < 2:
            raise NotPrimitiveError("(-1) has no completion in SL_1(Z)")
        # diag(-1, -1, 1, ...) keeps det 1 and sends -e_1 to e_1
        for row in gamma:
            row[0], row[1] = -row[0], -row[1]
    out = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(d):
            out[i, j] = gamma[i][j]
    return out


def primitive_representative(v: Sequence[int], N: int, max_box: int = 64) -> Tuple[int, ...]:
    """A primitive w = v mod N, smallest in sup norm (ties lexicographic)."""
    v = [int(x) for x in v]
    d = len(v)
    if N == 1:
        return tuple(v) if is_primitive(v) else tuple([1] + [0] * (d - 1))
    if reduce(math.gcd, v, N) != 1:
        raise NotPrimitiveError(f"gcd({v}, {N}) != 1: class has no primitive vectors")
    base = [x % N for x in v]
    for k in range(max_box + 1):
        found = []
        for z in itertools.product(range(-k, k + 1), repeat=d):
            if max(abs(c) for c in z) != k:
                continue
            w = tuple(b + N * c for b, c in zip(base, z))
            if is_primitive(w):
                found.append((max(abs(c) for c in w), w))
        if found:
            return min(found)[1]
    raise NotPrimitiveError(f"No primitive representative of {v} mod {N} within box {max_box}")


# --- lattice points ----------------------------------------------------------

@dataclass(frozen=True)
class Provenance:
    """g = a_{alpha,beta}(kappa t) u(theta) gamma."""

    t: float
    wp: WeightPair
    theta: Tuple[Tuple[float, ...], ...]
    gamma: Tuple[Tuple[int, ...], ...]
    kappa: float = 1.0


class LatticeElement:
    """A unimodular lattice g Z^d, optionally remembering how g was built."""

    def __init__(self, g, provenance: Optional[Provenance] = None):
        # a(t) u(theta) gamma has det 1 exactly; float det of it loses digits as t grows
        self.g = np.asarray(g, dtype=float) if provenance is not None else check_unimodular(np.asarray(g, dtype=float))
        self.provenance = provenance
        if provenance is not None:
            self._theta_num, self._theta_exp = dyadic_numerators(provenance.theta)
            self._gamma = np.array(provenance.gamma, dtype=object)
            self._scale = np.exp(flow_exponents(provenance.kappa * provenance.t, provenance.wp))

    @classmethod
    def from_orbit(cls, t: float, wp: WeightPair, theta, gamma=None, kappa: float = 1.0):
        theta = theta_array(theta, wp.m, wp.n)
        if gamma is None:
            gamma = np.eye(wp.d, dtype=int)
        gamma_t = tuple(tuple(int(x) for x in row) for row in np.asarray(gamma, dtype=object))
        if integer_det(gamma_t) != 1:
            raise ValueError(f"gamma must lie in SL_d(Z), got {gamma_t}")
        g = a_matrix(t, wp, kappa) @ u_matrix(theta) @ np.array(gamma_t, dtype=float)
        prov = Provenance(float(t), wp, tuple(tuple(float(x) for x in row) for row in theta),
                          gamma_t, float(kappa))
        return cls(g, prov)

    @property
    def d(self) -> int:
        return self.g.shape[0]

    def image(self, W) -> np.ndarray:
        """
        g W for an integer vector or matrix W (columns).

        With provenance the inner product u(theta) gamma W is formed exactly on the
        dyadic numerators of theta, and only the diagonal flow is applied in float.
        """
        W = np.asarray(W, dtype=object)
        vector = W.ndim == 1
        if vector:
            W = W.reshape(-1, 1)
        if self.provenance is None:
            out = self.g @ W.astype(float)
        else:
            m = self.provenance.wp.m
            Y = self._gamma.dot(W)
            top = self._theta_num.dot(Y[m:]) + Y[:m] * (1 << self._theta_exp)
            inner = np.empty(Y.shape, dtype=float)
            inner[:m] = [[math.ldexp(float(x), -self._theta_exp) for x in row] for row in top]
            inner[m:] = [[float(x) for x in row] for row in Y[m:]]
            out = self._scale[:, None] * inner
        return out[:, 0] if vector else out


@dataclass(frozen=True)
class CongruenceClassPoint:
    """The point g Gamma_N together with the class P_N(v) whose images are tracked."""

    element: LatticeElement
    N: int
    v: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(x) for x in self.v))
        if self.N < 1:
            raise ValueError(f"Modulus must be positive, got {self.N}")
        if len(self.v) != self.element.d:
            raise ValueError(f"Class vector {self.v} does not match dimension {self.element.d}")
        if reduce(math.gcd, (x % self.N for x in self.v), self.N) != 1:
            raise NotPrimitiveError(f"P_{self.N}({self.v}) contains no primitive vector")


@dataclass(frozen=True)
class ShortVector:
    w: Tuple[int, ...]
    value: float


# --- norms -------------------------------------------------------------------

def norm_values(Y: np.ndarray, norm: Norm) -> np.ndarray:
    """Column-wise norm of a d x k float array."""
    Y = np.asarray(Y, dtype=float)
    if isinstance(norm, WeightPair):
        return np.max(np.abs(Y) ** (1.0 / norm.exponents())[:, None], axis=0)
    if norm == "sup":
        return sup_norm(Y, axis=0)
    if norm == "euclid":
        return euclid_norm(Y, axis=0)
    raise ValueError(f"Unknown norm {norm!r}; expected 'euclid', 'sup' or a WeightPair")


def _euclid_cover(norm: Norm, radius: float, d: int) -> float:
    """Euclidean radius of a ball containing the norm ball of the given radius."""
    if isinstance(norm, WeightPair):
        half_widths = radius ** norm.exponents()
        return float(np.sqrt(np.sum(half_widths ** 2)))
    if norm == "sup":
        return math.sqrt(d) * radius
    return radius


def _exact_below(g: np.ndarray, w: Sequence[int], norm: Norm, radius: float) -> Optional[bool]:
    """Decide ||g w|| < radius in rational arithmetic; None when the norm is not rational."""
    if norm not in ("sup", "euclid"):
        return None
    y = as_exact(g).dot(np.array([int(x) for x in w], dtype=object))
    bound = Fraction(radius)
    if norm == "sup":
        return max(abs(c) for c in y) < bound
    return sum(c * c for c in y) < bound * bound


# --- reduction and enumeration ----------------------------------------------

def _gso(B) -> Tuple[list, list]:
    d = B.shape[1]
    cols = [B[:, i] for i in range(d)]
    star, norms2 = [], []
    mu = [[0] * d for _ in range(d)]
    for i in range(d):
        v = cols[i].copy()
        for j in range(i):
            mu[i][j] = cols[i].dot(star[j]) / norms2[j]
            v = v - mu[i][j] * star[j]
        star.append(v)
        norms2.append(v.dot(v))
        if norms2[-1] == 0 or (not isinstance(norms2[-1], Fraction) and not math.isfinite(norms2[-1])):
            raise SingularBasisError("Basis vectors are linearly dependent")
    return mu, norms2


def lll_reduce(basis, delta: float = LLL_DELTA) -> Tuple[np.ndarray, np.ndarray]:
    """
    LLL-reduce the columns of a square basis.

    Integer/rational input (object dtype or integer dtype) is reduced exactly with
    Fractions; float input in double precision. Returns (reduced, T) with T an
    integer unimodular matrix and basis @ T = reduced.
    """
    if not 0.25 < delta < 1:
        raise ValueError(f"delta must lie in (0.25, 1), got {delta}")
    arr = np.asarray(basis)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"Basis must be square, got shape {arr.shape}")
    exact = arr.dtype == object or np.issubdtype(arr.dtype, np.integer)
    B = as_exact(arr) if exact else arr.astype(float).copy()
    if not exact:
        if not np.all(np.isfinite(B)) or np.linalg.det(B) == 0.0:
            raise SingularBasisError("Basis is numerically singular")
    d = B.shape[1]
    T = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(d):
            T[i, j] = int(i == j)

    mu, norms2 = _gso(B)
    k = 1
    while k < d:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j]) if exact else int(np.rint(mu[k][j]))
            if q:
                B[:, k] = B[:, k] - q * B[:, j]
                T[:, k] = T[:, k] - q * T[:, j]
                for i in range(j + 1):
                    mu[k][i] -= q * (mu[j][i] if i < j else 1)
        if norms2[k] >= (delta - mu[k][k - 1] ** 2) * norms2[k - 1]:
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            T[:, [k - 1, k]] = T[:, [k, k - 1]]
            mu, norms2 = _gso(B)
            k = max(k - 1, 1)
    return B, T


def _reduced_basis(pt: CongruenceClassPoint, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    """LLL basis of N g Z^d, recomputed through element.image until reduction is stable."""
    d = pt.element.d
    T = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(d):
            T[i, j] = int(i == j)
    B = pt.N * pt.element.image(T)
    for _ in range(MAX_REFINE):
        _, step = lll_reduce(B, delta)
        if all(step[i, j] == int(i == j) for i in range(d) for j in range(d)):
            break
        T = T.dot(step)
        B = pt.N * pt.element.image(T)
    return B, T


def _enumerate_box(B: np.ndarray, target: np.ndarray, radius: float, budget: int) -> List[Tuple[int, ...]]:
    """All integer z with ||B z - target||_2 <= radius (Fincke-Pohst on the QR factor)."""
    Q, R = np.linalg.qr(B)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1
    R = signs[:, None] * R
    y = signs * (Q.T @ target)
    d = B.shape[1]
    r2 = radius * radius
    z = [0] * d
    found: List[Tuple[int, ...]] = []
    nodes = 0

    def descend(i: int, partial: float):
        nonlocal nodes
        s = y[i] - sum(R[i, j] * z[j] for j in range(i + 1, d))
        rem = r2 - partial
        if rem < 0:
            return
        center = s / R[i, i]
        half = math.sqrt(rem) / R[i, i]
        for zi in range(math.ceil(center - half), math.floor(center + half) + 1):
            nodes += 1
            if nodes > budget:
                raise EnumerationBudgetError(f"Enumeration exceeded {budget} nodes")
            z[i] = zi
            diff = R[i, i] * zi - s
            total = partial + diff * diff
            if total > r2:
                continue
            if i == 0:
                found.append(tuple(z))
            else:
                descend(i - 1, total)
        z[i] = 0

    descend(d - 1, 0.0)
    return found


def _class_vectors(pt: CongruenceClassPoint, T: np.ndarray, zs: List[Tuple[int, ...]]) -> List[Tuple[int, ...]]:
    vs = np.array(pt.v, dtype=object)
    out = []
    for z in zs:
        w = tuple(int(x) for x in vs + pt.N * T.dot(np.array(z, dtype=object)))
        if is_primitive(w):
            out.append(w)
    return out


@dataclass(frozen=True)
class _Prepared:
    basis: np.ndarray
    transform: np.ndarray
    target: np.ndarray


def _prepare(pt: CongruenceClassPoint, delta: float) -> _Prepared:
    B, T = _reduced_basis(pt, delta)
    return _Prepared(B, T, -pt.element.image(np.array(pt.v, dtype=object)))


def _search(pt: CongruenceClassPoint, prep: _Prepared, norm: Norm, radius: float,
            budget: int) -> Optional[ShortVector]:
    cover = _euclid_cover(norm, radius, pt.element.d) * (1 + RADIUS_MARGIN) + RADIUS_MARGIN
    zs = _enumerate_box(prep.basis, prep.target, cover, budget)
    ws = _class_vectors(pt, prep.transform, zs)
    if not ws:
        return None
    values = norm_values(pt.element.image(np.array(ws, dtype=object).T), norm)
    best = None
    for w, val in zip(ws, values):
        val = float(val)
        if val >= radius:
            if abs(val - radius) > RADIUS_MARGIN * radius or pt.element.provenance is not None:
                continue
            if not _exact_below(pt.element.g, w, norm, radius):
                continue
        if best is None or (val, w) < (best.value, best.w):
            best = ShortVector(w, val)
    return best


def congruence_short_vector(
    pt: CongruenceClassPoint,
    norm: Norm,
    radius: float,
    budget: int = DEFAULT_BUDGET,
    delta: float = LLL_DELTA,
) -> Optional[ShortVector]:
    """
    The w in P_N(v) minimizing ||g w|| among those with ||g w|| < radius, or None.

    Ties are broken by the lexicographically smallest w.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return _search(pt, _prepare(pt, delta), norm, radius, budget)


def _seed_radius(pt: CongruenceClassPoint, prep: _Prepared) -> Optional[float]:
    """Sup norm of the best primitive class vector near the Babai point, if any."""
    d = pt.element.d
    base = np.rint(np.linalg.solve(prep.basis, prep.target)).astype(int)
    offsets = [np.zeros(d, dtype=int)]
    for i in range(d):
        for sgn in (1, -1):
            e = np.zeros(d, dtype=int)
            e[i] = sgn
            offsets.append(e)
    for i, j in itertools.combinations(range(d), 2):
        for si, sj in itertools.product((1, -1), repeat=2):
            e = np.zeros(d, dtype=int)
            e[i], e[j] = si, sj
            offsets.append(e)
    zs = [tuple(int(x) for x in base + off) for off in offsets]
    ws = _class_vectors(pt, prep.transform, zs)
    if not ws:
        return None
    values = norm_values(pt.element.image(np.array(ws, dtype=object).T), "sup")
    return float(np.min(values))


def shortest_class_vector(pt: CongruenceClassPoint, budget: int = DEFAULT_BUDGET,
                          delta: float = LLL_DELTA) -> ShortVector:
    """
    The w in P_N(v) with the smallest sup norm ||g w||.

    The search radius starts just above a known class vector and is shrunk by
    golden-ratio steps while the enumeration budget is exhausted; whatever a
    completed enumeration returns is optimal within its radius.
    """
    prep = _prepare(pt, delta)
    seed = _seed_radius(pt, prep)
    if seed is None:
        radius = float(np.max(np.abs(prep.basis)))
    else:
        radius = seed * (1 + RADIUS_MARGIN) + RADIUS_MARGIN
    shrunk = False
    while True:
        try:
            found = _search(pt, prep, "sup", radius, budget)
        except EnumerationBudgetError:
            shrunk = True
            radius /= GOLDEN
            continue
        if found is not None:
            return found
        if shrunk:
            raise EnumerationBudgetError(
                f"Shortest class vector lies beyond radius {radius!r} but enumerating there exceeds the budget"
            )
        radius *= GOLDEN


def delta_value(pt: CongruenceClassPoint, budget: int = DEFAULT_BUDGET, delta: float = LLL_DELTA) -> float:
    """-log of the shortest sup-norm vector in the marked orbit g P_N(v)."""
    return -math.log(shortest_class_vector(pt, budget, delta).value)


def in_eps_cusp(pt: CongruenceClassPoint, eps: float, norm: Norm = "euclid",
                budget: int = DEFAULT_BUDGET) -> bool:
    """True iff some w in P_N(v) has ||g w|| < eps."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return congruence_short_vector(pt, norm, eps, budget) is not None
