"""Exact exponential sums, Diophantine search, and covering measures.

Quadratic sums are evaluated through integer residues so moduli never
lose precision; the Weyl calibration sweeps rational phases exhaustively
and reports the worst observed ratio against the classical square-root
bound shape.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class PreconditionError(ValueError):
    """Inputs violate the hypotheses under which a law is asserted."""


# ---------------------------------------------------------------------------
# complete quadratic sums


@dataclass(frozen=True)
class GaussSumParams:
    """Phase data for sum_{l=1}^{q} e^{i 2 pi (b l + a l^2) / q}."""

    a: int
    b: int
    q: int

    def __post_init__(self):
        for name in ("a", "b", "q"):
            if not isinstance(getattr(self, name), int):
                raise ValueError(f"{name} must be an integer")
        if self.q < 1:
            raise ValueError("q must be a positive integer")


def gauss_sum(p: GaussSumParams) -> complex:
    """Complete quadratic sum with exact residue phases (q below 2^31)."""
    q = p.q
    if q >= 1 << 31:
        raise ValueError("q too large for exact residue arithmetic")
    l = np.arange(1, q + 1, dtype=np.int64)
    res = (p.b % q) * (l % q) + (p.a % q) * ((l * l) % q)
    res %= q
    counts = np.bincount(res, minlength=q)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    return complex(np.dot(counts, roots))


def gauss_modulus_law(p: GaussSumParams) -> bool:
    """Whether |gauss_sum| matches sqrt(2q) to 1e-9 sqrt(q).

    The law is asserted for q divisible by 4, a coprime to q, and even b;
    anything else raises PreconditionError rather than failing the law.
    """
    if p.q % 4 != 0:
        raise PreconditionError("q must be divisible by 4")
    if math.gcd(p.a, p.q) != 1:
        raise PreconditionError("a must be coprime to q")
    if p.b % 2 != 0:
        raise PreconditionError("b must be even")
    g = gauss_sum(p)
    return abs(abs(g) - math.sqrt(2.0 * p.q)) <= 1e-9 * math.sqrt(p.q)


# ---------------------------------------------------------------------------
# incomplete quadratic (Weyl) sums


@dataclass(frozen=True)
class WeylPhase:
    """Phase data for sum_{M <= n < M+N} e^{2 pi i (alpha n^2 + beta n)}.

    anchor, when given, is a reduced rational (a, q) with alpha within
    1/q^2 of a/q.
    """

    alpha: float | Fraction
    beta: float | Fraction
    M: int
    N: int
    anchor: tuple[int, int] | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.anchor is not None:
            a, q = self.anchor
            if q < 1:
                raise ValueError("anchor modulus must be >= 1")
            if math.gcd(a, q) != 1:
                raise ValueError("anchor must be a reduced fraction")
            if abs(float(self.alpha) - a / q) > 1.0 / q ** 2 + 1e-15:
                raise ValueError("alpha is not within 1/q^2 of its anchor")


def weyl_sum(w: WeylPhase) -> complex:
    """Evaluate the incomplete quadratic sum.

    Fraction-valued alpha and beta take an exact residue path; float
    phases are evaluated directly.
    """
    n = np.arange(w.M, w.M + w.N, dtype=np.int64)
    if isinstance(w.alpha, Fraction) and isinstance(w.beta, Fraction):
        L = math.lcm(w.alpha.denominator, w.beta.denominator)
        if L >= 1 << 31:
            raise ValueError("common denominator too large for residue arithmetic")
        A = (w.alpha.numerator * (L // w.alpha.denominator)) % L
        B = (w.beta.numerator * (L // w.beta.denominator)) % L
        nm = n % L
        res = (A * ((nm * nm) % L) + B * nm) % L
        counts = np.bincount(res, minlength=L)
        roots = np.exp(2j * np.pi * np.arange(L) / L)
        return complex(np.dot(counts, roots))
    phase = float(w.alpha) * n.astype(float) ** 2 + float(w.beta) * n.astype(float)
    return complex(np.sum(np.exp(2j * np.pi * phase)))


def weyl_bound_rhs(N: int, q: int) -> float:
    """Square-root bound shape (N/sqrt(q) + sqrt(q)) sqrt(log q); N at q=1."""
    if N < 1 or q < 1:
        raise ValueError("N and q must be positive integers")
    if q == 1:
        warnings.warn("q = 1 carries no cancellation; returning the trivial bound N",
                      stacklevel=2)
        return float(N)
    return (N / math.sqrt(q) + math.sqrt(q)) * math.sqrt(math.log(q))


def weyl_calibration(n_caps: Sequence[int] = (256, 4096), q_max: int = 64) -> dict[int, float]:
    """Worst |weyl_sum| / weyl_bound_rhs over an exhaustive rational sweep.

    Sweeps q = 2..q_max, reduced a/q, N over powers of two up to each
    cap, beta in {0, 1/3, 1/2}, and window starts 0 and -N//2.  Returns
    the running maximum per cap.
    """
    caps = sorted(set(int(c) for c in n_caps))
    if not caps or caps[0] < 1:
        raise ValueError("n_caps must be positive")
    betas = (Fraction(0), Fraction(1, 3), Fraction(1, 2))
    best = {cap: 0.0 for cap in caps}
    for q in range(2, q_max + 1):
        for a in range(1, q):
            if math.gcd(a, q) != 1:
                continue
            alpha = Fraction(a, q)
            N = 1
            while N <= caps[-1]:
                rhs = weyl_bound_rhs(N, q)
                for beta in betas:
                    for M in (0, -(N // 2)):
                        s = abs(weyl_sum(WeylPhase(alpha, beta, M, N, anchor=(a, q))))
                        ratio = s / rhs
                        for cap in caps:
                            if N <= cap and ratio > best[cap]:
                                best[cap] = ratio
                N *= 2
    return best


# ---------------------------------------------------------------------------
# summation by parts


def abel_sum_identity(a: Sequence[complex], h: Callable[[float], complex],
                      M: int, N: int) -> tuple[complex, complex]:
    """Both sides of summation by parts for sum_{n=M}^{M+N} a_n h(n).

    a holds the N+1 coefficients for indices M..M+N.  The right side is
    A(M+N) h(M+N) minus the partial sums against the exact unit
    increments of h.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    if len(a) != N + 1:
        raise ValueError("need exactly N+1 coefficients")
    coeff = np.asarray(a, dtype=complex)
    idx = np.arange(M, M + N + 1)
    hvals = np.array([h(int(n)) for n in idx], dtype=complex)
    lhs = complex(np.sum(coeff * hvals))
    partial = np.cumsum(coeff)
    if N == 0:
        return lhs, complex(partial[-1] * hvals[-1])
    increments = np.array([h(int(n) + 1) - h(int(n)) for n in idx[:-1]], dtype=complex)
    rhs = partial[-1] * hvals[-1] - complex(np.sum(partial[:-1] * increments))
    return lhs, complex(rhs)


# ---------------------------------------------------------------------------
# totient and simultaneous rational approximation


def totient(q: int) -> int:
    """Euler totient by trial-division factorization."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    result, n = q, q
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if n > 1:
        result -= result // n
    return result


def dirichlet_simultaneous(target: Sequence[float], Q: float) -> tuple[int, tuple[int, ...]]:
    """Smallest modulus q <= Q approximating every angle simultaneously.

    Returns (q, (a_1..a_k)) with |target_j - 2 pi a_j / q| bounded by
    2 pi / (q Q^{1/k}); existence follows from the lattice pigeonhole.
    """
    target = np.asarray(target, dtype=float)
    if target.ndim != 1 or target.size < 1:
        raise ValueError("target must be a nonempty vector of angles")
    if Q < 1.0:
        raise ValueError("Q must be >= 1")
    k = target.size
    alpha = target / TWO_PI
    tol_scale = Q ** (1.0 / k)
    for q in range(1, int(math.floor(Q)) + 1):
        a = np.round(q * alpha)
        if np.all(np.abs(target - TWO_PI * a / q) <= TWO_PI / (q * tol_scale)):
            return q, tuple(int(v) for v in a)
    raise RuntimeError("no admissible modulus found; the pigeonhole bound "
                       "should make this unreachable")


# ---------------------------------------------------------------------------
# cube unions and the scaled-union lower bound


@dataclass(frozen=True)
class CubeFamily:
    """Axis-aligned cubes (center, side) plus a shrink factor in (0, 1)."""

    cubes: tuple[tuple[tuple[float, ...], float], ...]
    scale: float

    def __post_init__(self):
        if not 0.0 < self.scale < 1.0:
            raise ValueError("scale must lie in (0, 1)")
        if len(self.cubes) == 0:
            raise ValueError("family must be nonempty")
        dim = len(self.cubes[0][0])
        for center, side in self.cubes:
            if len(center) != dim:
                raise ValueError("all cubes must share one dimension")
            if not side > 0.0:
                raise ValueError("cube sides must be positive")

    @property
    def dim(self) -> int:
        return len(self.cubes[0][0])


def _union_measure(boxes: list[tuple[np.ndarray, np.ndarray]]) -> float:
    """Exact measure of a union of boxes by coordinate sweep."""
    if not boxes:
        return 0.0
    dim = boxes[0][0].size
    if dim == 1:
        ivs = sorted((float(lo[0]), float(hi[0])) for lo, hi in boxes)
        total = 0.0
        cur_lo, cur_hi = ivs[0]
        for lo, hi in ivs[1:]:
            if lo > cur_hi:
                total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        return total + (cur_hi - cur_lo)
    cuts = sorted({float(lo[0]) for lo, _ in boxes} | {float(hi[0]) for _, hi in boxes})
    total = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        if right <= left:
            continue
        active = [(lo[1:], hi[1:]) for lo, hi in boxes
                  if lo[0] <= left and hi[0] >= right]
        if active:
            total += (right - left) * _union_measure(active)
    return total


def _family_boxes(fam: CubeFamily, side_factor: float):
    out = []
    for center, side in fam.cubes:
        c = np.asarray(center, dtype=float)
        h = 0.5 * side * side_factor
        out.append((c - h, c + h))
    return out


def vitali_scaled_union(fam: CubeFamily) -> tuple[float, float, float]:
    """(union, scaled union, covering lower bound) for a cube family.

    The bound scale^k 3^{-k} |union| (k the dimension) comes from a
    Vitali selection of disjoint cubes; the scaled union can never fall
    below it, which is asserted before returning.
    """
    union = _union_measure(_family_boxes(fam, 1.0))
    scaled = _union_measure(_family_boxes(fam, fam.scale))
    k = fam.dim
    bound = fam.scale ** k * 3.0 ** (-k) * union
    if scaled < bound * (1.0 - 1e-9):
        raise AssertionError(
            f"scaled union {scaled:g} fell below the covering bound {bound:g}")
    return union, scaled, bound
