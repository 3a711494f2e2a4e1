"""
Numeric Kit - weights, quasi-norms and the matrices of the diagonal flow.

Everything in here is an immutable value or a pure function, so the other
modules (lattice, diosearch, flowlab) can share them freely across workers.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np


WEIGHT_SUM_TOL = 1e-12
DET_TOL = 1e-9
MAX_EXPONENT = 700.0


class DimensionError(ValueError):
    """Vector/weight lengths do not match."""


class WeightError(ValueError):
    """Weight entries are not a positive probability vector."""


class OverflowGuardError(ValueError):
    """A flow time would push exp() past the representable range."""


class EmptyClassError(ValueError):
    """The congruence class contains no primitive vectors."""


@dataclass(frozen=True)
class Weight:
    """A probability vector with positive entries."""

    entries: Tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise WeightError("Weight must have at least one entry.")
        if any(e <= 0 for e in entries):
            raise WeightError(f"Weight entries must be positive, got {entries}")
        if abs(sum(entries) - 1.0) > WEIGHT_SUM_TOL:
            raise WeightError(f"Weight entries must sum to 1, got {sum(entries)!r}")

    @classmethod
    def uniform(cls, k: int) -> "Weight":
        return cls(tuple([1.0 / k] * k))

    def __len__(self):
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)


@dataclass(frozen=True)
class WeightPair:
    """The pair (alpha, beta) fixing the quasi-norm on R^d and the flow a_{alpha,beta}."""

    alpha: Weight
    beta: Weight

    @classmethod
    def uniform(cls, m: int, n: int) -> "WeightPair":
        return cls(Weight.uniform(m), Weight.uniform(n))

    @property
    def m(self) -> int:
        return len(self.alpha)

    @property
    def n(self) -> int:
        return len(self.beta)

    @property
    def d(self) -> int:
        return self.m + self.n

    def exponents(self) -> np.ndarray:
        return np.concatenate([self.alpha.as_array(), self.beta.as_array()])

    @property
    def max_inverse_weight(self) -> float:
        return float(np.max(1.0 / self.exponents()))

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha.entries), "beta": list(self.beta.entries)}

    @classmethod
    def from_dict(cls, data: dict) -> "WeightPair":
        return cls(Weight(tuple(data["alpha"])), Weight(tuple(data["beta"])))


@dataclass(frozen=True)
class CongruenceConstraint:
    """Coordinate-wise congruence p_j = v_j mod N_j, q_j = v_{m+j} mod N_{m+j}."""

    moduli: Tuple[int, ...]
    residues: Tuple[int, ...]

    def __post_init__(self):
        moduli = tuple(int(x) for x in self.moduli)
        residues = tuple(int(x) for x in self.residues)
        object.__setattr__(self, "moduli", moduli)
        object.__setattr__(self, "residues", residues)
        if len(moduli) != len(residues):
            raise DimensionError(
                f"moduli and residues differ in length ({len(moduli)} vs {len(residues)})"
            )
        if any(nm < 1 for nm in moduli):
            raise ValueError(f"Moduli must be positive, got {moduli}")

    @classmethod
    def trivial(cls, d: int) -> "CongruenceConstraint":
        return cls(tuple([1] * d), tuple([0] * d))

    @property
    def d(self) -> int:
        return len(self.moduli)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.moduli)) == 1

    @property
    def modulus(self) -> int:
        """The common modulus; only defined once the constraint has been normalized."""
        if not self.is_uniform:
            raise ValueError(f"Constraint has mixed moduli {self.moduli}; normalize it first.")
        return self.moduli[0]

    def contains(self, w: Sequence[int]) -> bool:
        return all((int(x) - r) % nm == 0 for x, r, nm in zip(w, self.residues, self.moduli))

    def to_dict(self) -> dict:
        return {"moduli": list(self.moduli), "residues": list(self.residues)}

    @classmethod
    def from_dict(cls, data: dict) -> "CongruenceConstraint":
        return cls(tuple(data["moduli"]), tuple(data["residues"]))


@dataclass(frozen=True)
class NormalizedConstraints:
    constraints: Tuple[CongruenceConstraint, ...]
    modulus: int
    eps_factor: float


def _check_lengths(x: np.ndarray, k: int):
    if x.shape != (k,):
        raise DimensionError(f"Expected a vector of length {k}, got shape {x.shape}")


def quasi_norm(x: Sequence[float], w: Weight) -> float:
    """max_j |x_j|^(1/w_j); zero exactly at the zero vector."""
    x = np.asarray(x, dtype=float)
    _check_lengths(x, len(w))
    return float(np.max(np.abs(x) ** (1.0 / w.as_array())))


def weighted_vector_norm(vec: Sequence[float], wp: WeightPair) -> float:
    vec = np.asarray(vec, dtype=float)
    _check_lengths(vec, wp.d)
    return max(quasi_norm(vec[: wp.m], wp.alpha), quasi_norm(vec[wp.m:], wp.beta))


def sup_norm(vec, axis: Optional[int] = None):
    """max |x_j|; per column or row when an axis is given."""
    values = np.max(np.abs(np.asarray(vec, dtype=float)), axis=axis)
    return float(values) if axis is None else values


def euclid_norm(vec, axis: Optional[int] = None):
    values = np.linalg.norm(np.asarray(vec, dtype=float), axis=axis)
    return float(values) if axis is None else values


def check_unimodular(g: np.ndarray) -> np.ndarray:
    det = float(np.linalg.det(np.asarray(g, dtype=float)))
    if abs(det - 1.0) >= DET_TOL * max(1.0, abs(det)):
        raise ValueError(f"Matrix determinant {det!r} is not 1")
    return g


def theta_array(theta, m: Optional[int] = None, n: Optional[int] = None) -> np.ndarray:
    """Coerce scalars / nested lists into an m x n float matrix."""
    arr = np.atleast_2d(np.asarray(theta, dtype=float))
    if m is not None and n is not None and arr.shape != (m, n):
        arr = arr.reshape(m, n)
    return arr


def u_matrix(theta) -> np.ndarray:
    """[[Id_m, theta], [0, Id_n]]."""
    theta = theta_array(theta)
    m, n = theta.shape
    return np.block([
        [np.eye(m), theta],
        [np.zeros((n, m)), np.eye(n)],
    ])


def flow_exponents(t: float, wp: WeightPair) -> np.ndarray:
    """Diagonal exponents (t*alpha, -t*beta) of a_{alpha,beta}(t), guarded against overflow."""
    if abs(t) * wp.max_inverse_weight > MAX_EXPONENT:
        raise OverflowGuardError(
            f"|t|={abs(t)!r} exceeds the overflow guard for weights {wp.to_dict()}"
        )
    return np.concatenate([t * wp.alpha.as_array(), -t * wp.beta.as_array()])


def a_matrix(t: float, wp: WeightPair, kappa: float = 1.0) -> np.ndarray:
    return np.diag(np.exp(flow_exponents(kappa * t, wp)))


def condition_three_holds(kappas: Sequence[float], weight_pairs: Sequence[WeightPair]) -> bool:
    """kappa_i(alpha_i, beta_i) - kappa_{i-1}(alpha_{i-1}, beta_{i-1}) > 0 componentwise."""
    scaled = [k * wp.exponents() for k, wp in zip(kappas, weight_pairs)]
    return all(np.all(cur - prev > 0) for prev, cur in zip(scaled, scaled[1:]))


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def normalize_constraint(
    cs: Sequence[CongruenceConstraint],
    weights: Optional[Sequence[WeightPair]] = None,
) -> NormalizedConstraints:
    """
    Bring a family of constraints to a single modulus N = lcm of all moduli with
    gcd(v_i, N) = 1.

    Residue vectors are divided by gcd(v_i, N) before being reduced into [0, N).
    The returned eps_factor is N^r (r the largest inverse weight, 1 without weights)
    when any residue vector had to be divided, else 1.
    """
    if not cs:
        return NormalizedConstraints((), 1, 1.0)
    modulus = reduce(_lcm, (nm for c in cs for nm in c.moduli), 1)

    divided = False
    out: List[CongruenceConstraint] = []
    for c in cs:
        if modulus > 1 and all(v == 0 for v in c.residues):
            raise EmptyClassError(
                f"Residue vector is 0 modulo N={modulus}: no primitive vector in the class"
            )
        g = reduce(math.gcd, c.residues, modulus)
        if g > 1:
            divided = True
        residues = tuple((v // g) % modulus for v in c.residues)
        out.append(CongruenceConstraint(tuple([modulus] * c.d), residues))

    eps_factor = 1.0
    if divided:
        r = max(wp.max_inverse_weight for wp in weights) if weights else 1.0
        eps_factor = float(modulus) ** r
    return NormalizedConstraints(tuple(out), modulus, eps_factor)


def as_exact(matrix) -> np.ndarray:
    """Float/int matrix -> object array of Fractions (floats are dyadic, so this is exact)."""
    arr = np.asarray(matrix)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        if isinstance(x, Fraction):
            out[idx] = x
        elif isinstance(x, (int, np.integer)):
            out[idx] = Fraction(int(x))
        else:
            out[idx] = Fraction(float(x))
    return out


def dyadic_numerators(theta) -> Tuple[np.ndarray, int]:
    """
    Write every entry of theta as K / 2^E with a shared exponent E.

    Returns an object array of python ints K and the exponent E.
    """
    exact = as_exact(theta_array(theta))
    exponent = 0
    for x in exact.flat:
        exponent = max(exponent, x.denominator.bit_length() - 1)
    scale = 1 << exponent
    nums = np.empty(exact.shape, dtype=object)
    for idx, x in np.ndenumerate(exact):
        nums[idx] = x.numerator * (scale // x.denominator)
    return nums, exponent
