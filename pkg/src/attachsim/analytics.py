"""Closed-form limit laws and constants for the attachment processes.

The greedy-algorithm fractions converge to roots of one-dimensional drift
functions, and the m=1 descendant fraction converges to a beta law:

* greedy matching, PAM:  h(z) = 2*(1 - z*(m+delta)/(2m+delta))**m - z - 1;
  the unmatched fraction tends to its unique root rho in (0,1), and the
  matched fraction to r = 1 - rho.
* greedy matching, UAM:  the matched fraction 2|M|/t tends to the unique
  positive root of 2*(1 - z**m) - z (equivalently 1 - root of
  2*(1-z)**m - z - 1).
* greedy independent set (either model): |I|/t tends to the root w_m of
  (1-w)**m - w; delta shifts only the convergence rate.
* descendant fraction, m=1: a two-component beta mixture for PAM, the
  minimum of r-1 uniforms (Beta(1, r-1)) for UAM; for m > 1 the fraction
  tends to 1.

Roots are found by plain bisection with a certified sign-change bracket.
The regularized incomplete beta is evaluated by the classic continued
fraction (modified Lentz) with log-gamma normalization, with an adaptive
Simpson fallback on the density; the two routes cross-validate in tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

DEFAULT_TOL = 1e-12


class ConstantKind(enum.Enum):
    PAM_MATCHING = "pam_matching"
    UAM_MATCHING = "uam_matching"
    INDEPENDENT = "independent"
    DESCENDANT = "descendant"


def drift_value(kind: ConstantKind, m: int, delta, x: float) -> float:
    """One-step expected-change coefficient at fraction x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"drift argument must lie in [0, 1], got {x}")
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    d = float(delta)
    if kind is ConstantKind.PAM_MATCHING:
        if d < -m:
            raise ValueError(f"delta must be >= -m, got {delta}")
        return 2.0 * (1.0 - (m + d) / (2 * m + d) * x) ** m - x - 1.0
    if kind is ConstantKind.UAM_MATCHING:
        return 2.0 * (1.0 - x) ** m - x - 1.0
    if kind is ConstantKind.INDEPENDENT:
        return (m + d) / (2 * m + d) * ((1.0 - x) ** m - x)
    if kind is ConstantKind.DESCENDANT:
        return (m + d) / (2 * m + d) * (1.0 - x - (1.0 - x) ** m)
    raise ValueError(f"unknown drift kind: {kind!r}")


@dataclass(frozen=True)
class LimitConstant:
    kind: ConstantKind
    m: int
    delta: Fraction
    value: float
    bracket: tuple[float, float]

    @property
    def bracket_width(self) -> float:
        return self.bracket[1] - self.bracket[0]


def _bisect_decreasing(f: Callable[[float], float], tol: float) -> tuple[float, float]:
    """Bracket the unique root of a decreasing f on [0,1] to width <= tol.

    Maintains f(lo) >= 0 >= f(hi); an exact zero collapses the bracket.
    """
    lo, hi = 0.0, 1.0
    flo, fhi = f(lo), f(hi)
    if flo < 0 or fhi > 0:
        raise ValueError("drift does not change sign on [0, 1]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float resolution floor
            break
        fm = f(mid)
        if fm == 0.0:
            return mid, mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def rho_pam_matching(m: int, delta, tol: float = DEFAULT_TOL) -> LimitConstant:
    """Limiting unmatched fraction rho for greedy matching on PAM.

    The matched fraction is 1 - rho. At the boundary delta == -m the drift
    degenerates to 1 - z and rho = 1 exactly.
    """
    delta = Fraction(delta)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if delta < -m:
        raise ValueError(f"delta must be >= -m, got {delta}")
    if delta == -m:
        return LimitConstant(ConstantKind.PAM_MATCHING, m, delta, 1.0, (1.0, 1.0))
    lo, hi = _bisect_decreasing(
        lambda z: drift_value(ConstantKind.PAM_MATCHING, m, delta, z), tol)
    return LimitConstant(ConstantKind.PAM_MATCHING, m, delta,
                         0.5 * (lo + hi), (lo, hi))


def r_uam_matching(m: int, tol: float = DEFAULT_TOL) -> LimitConstant:
    """Limiting matched fraction 2|M|/t for greedy matching on UAM: the
    unique positive root of 2*(1 - z**m) - z."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    lo, hi = _bisect_decreasing(lambda z: 2.0 * (1.0 - z**m) - z, tol)
    return LimitConstant(ConstantKind.UAM_MATCHING, m, Fraction(0),
                         0.5 * (lo + hi), (lo, hi))


def w_independent(m: int, tol: float = DEFAULT_TOL) -> LimitConstant:
    """Limiting insider fraction |I|/t for the greedy independent set, for
    both models: the root of (1-w)**m - w in (0, 1)."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    lo, hi = _bisect_decreasing(lambda w: (1.0 - w) ** m - w, tol)
    return LimitConstant(ConstantKind.INDEPENDENT, m, Fraction(0),
                         0.5 * (lo + hi), (lo, hi))


def asymptotic_constant(kind: ConstantKind, m: int) -> float:
    """Leading-order large-m expansion of the limit constant."""
    if kind is ConstantKind.PAM_MATCHING:
        return 1.0 - 2.0 * math.log(2.0) / m
    if kind is ConstantKind.UAM_MATCHING:
        return 1.0 - math.log(2.0) / m
    if kind is ConstantKind.INDEPENDENT:
        return math.log(m) / m
    raise ValueError(f"no asymptotic expansion for kind {kind!r}")


# ---------------------------------------------------------------------------
# Limit laws for the m=1 descendant fraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaComponent:
    weight: Fraction
    a: Fraction
    b: Fraction


@dataclass(frozen=True)
class BetaMixture:
    """Finite mixture of beta distributions on [0, 1]."""

    components: tuple[BetaComponent, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        if sum(c.weight for c in self.components) != 1:
            raise ValueError("mixture weights must sum to 1")
        for c in self.components:
            if c.a <= 0 or c.b <= 0 or c.weight < 0:
                raise ValueError(f"invalid beta component {c}")

    def cdf(self, x: float) -> float:
        x = min(1.0, max(0.0, x))
        return sum(float(c.weight) * betainc_regularized(float(c.a), float(c.b), x)
                   for c in self.components)

    def pdf(self, x: float) -> float:
        if not 0.0 < x < 1.0:
            return 0.0
        out = 0.0
        for c in self.components:
            a, b = float(c.a), float(c.b)
            lg = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
            out += float(c.weight) * math.exp(
                lg + (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x))
        return out

    def moment(self, ell: int) -> Fraction:
        return mixture_moment(self, ell)


@dataclass(frozen=True)
class PointMass:
    """Degenerate law at a single point (the m > 1 descendant limit)."""

    location: float

    def cdf(self, x: float) -> float:
        return 1.0 if x >= self.location else 0.0

    def moment(self, ell: int) -> Fraction:
        return Fraction(self.location) ** ell


DescendantLaw = Union[BetaMixture, PointMass]


def beta_mixture_descendant_law(r: int, delta) -> BetaMixture:
    """PAM m=1 limit law of X(t)/t for the descendant tree rooted at r >= 2:
    components (a=1, b=r-1/(2+delta)) and (a=(1+delta)/(2+delta), b=r),
    weighted by whether the root's own edge looped or attached."""
    delta = Fraction(delta)
    if delta <= -1:
        raise ValueError(f"m=1 law requires delta > -1, got {delta}")
    if r < 2:
        raise ValueError(f"mixture law requires root r >= 2, got {r}")
    two_d = 2 + delta
    w1 = (1 + delta) / (two_d * r - 1)
    w2 = two_d * (r - 1) / (two_d * r - 1)
    return BetaMixture((
        BetaComponent(w1, Fraction(1), r - 1 / two_d),
        BetaComponent(w2, (1 + delta) / two_d, Fraction(r)),
    ))


def min_uniform_law(r: int) -> BetaMixture:
    """UAM m=1 limit law of the descendant fraction for root r >= 2: the
    minimum of r-1 independent uniforms, i.e. Beta(1, r-1) with CDF
    1 - (1-x)**(r-1)."""
    if r < 2:
        raise ValueError(f"min-uniform law requires root r >= 2, got {r}")
    return BetaMixture((BetaComponent(Fraction(1), Fraction(1), Fraction(r - 1)),))


def descendant_limit_law(model, m: int, r: int, delta=0) -> DescendantLaw:
    """Limit law of the descendant fraction p_X for the given model/root."""
    from .process import Model  # local import to keep module deps one-way

    model = Model(model) if not isinstance(model, Model) else model
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if m > 1:
        if model is Model.PAM and Fraction(delta) <= -m:
            raise ValueError(f"delta must be > -m, got {delta}")
        return PointMass(1.0)
    if model is Model.PAM:
        return beta_mixture_descendant_law(r, delta)
    return min_uniform_law(r)


def mixture_moment(law: DescendantLaw, ell: int) -> Fraction:
    """Exact ell-th moment: weighted product formula
    prod_{j<ell} (a+j)/(a+b+j) per component."""
    if ell < 0:
        raise ValueError(f"moment order must be >= 0, got {ell}")
    if isinstance(law, PointMass):
        return law.moment(ell)
    total = Fraction(0)
    for c in law.components:
        term = Fraction(1)
        for j in range(ell):
            term *= (c.a + j) / (c.a + c.b + j)
        total += c.weight * term
    return total


def mixture_cdf(law: DescendantLaw, x: float) -> float:
    """CDF of the limit law at x (clamped to [0, 1])."""
    return law.cdf(min(1.0, max(0.0, x)))


# ---------------------------------------------------------------------------
# Regularized incomplete beta
# ---------------------------------------------------------------------------

_CF_MAX_ITER = 300
_CF_EPS = 1e-15
_CF_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for it in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * it
        aa = it * (b - it) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b), abs error <= 1e-9.

    Continued fraction on the fast-converging side of the split point
    (a+1)/(a+b+2); falls back to adaptive Simpson if the fraction stalls.
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                     + a * math.log(x) + b * math.log1p(-x))
    try:
        if x < (a + 1.0) / (a + b + 2.0):
            return front * _betacf(a, b, x) / a
        return 1.0 - front * _betacf(b, a, 1.0 - x) / b
    except ArithmeticError:
        return betainc_by_quadrature(a, b, x)


def _adaptive_simpson(f, lo, hi, fl, fm, fh, whole, tol, depth):
    mid = 0.5 * (lo + hi)
    lm = 0.5 * (lo + mid)
    rm = 0.5 * (mid + hi)
    flm = f(lm)
    frm = f(rm)
    left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm)
    right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_adaptive_simpson(f, lo, mid, fl, flm, fm, left, tol / 2.0, depth - 1)
            + _adaptive_simpson(f, mid, hi, fm, frm, fh, right, tol / 2.0, depth - 1))


def betainc_by_quadrature(a: float, b: float, x: float, tol: float = 1e-11) -> float:
    """I_x(a, b) by adaptive Simpson on the density.

    The integrable endpoint singularities (a < 1 or b < 1) are handled by a
    truncated binomial series on a short head/tail interval.
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x > (a + 1.0) / (a + b + 2.0):
        return 1.0 - betainc_by_quadrature(b, a, 1.0 - x, tol)
    lg = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    norm = math.exp(lg)

    def density(s: float) -> float:
        return norm * s ** (a - 1.0) * (1.0 - s) ** (b - 1.0)

    head = min(1e-3, 0.5 * x)
    # integral over [0, head]: expand (1-s)^(b-1) = sum C(b-1, k) (-s)^k
    series = 0.0
    coeff = 1.0
    for k in range(60):
        term = coeff * (-1.0) ** k * head ** (a + k) / (a + k)
        series += term
        if abs(term) < 1e-17 * max(abs(series), 1e-30):
            break
        coeff *= (b - 1.0 - k) / (k + 1.0)
    total = norm * series
    if x > head:
        fl, fm, fh = density(head), density(0.5 * (head + x)), density(x)
        whole = (x - head) / 6.0 * (fl + 4.0 * fm + fh)
        total += _adaptive_simpson(density, head, x, fl, fm, fh, whole, tol, 48)
    return total
