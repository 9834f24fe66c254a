"""Parameter pipeline for the reaction-convection-diffusion system.

The nonlinearities under study are

    f1(x1, x2) = p1*(q1 - x2)*exp(-k1/(1 + x1)),
    f2(x1, x2) = p2*(q2 - x1)*exp(-k2/(1 + x2)),

whose per-coordinate shape is governed by  g_k(z) = exp(-k/(1+z))/z.  For
k > 4, g_k has a relative minimum at s(k) and maximum at s_tilde(k), the two
roots of z^2 - (k-2)z + 1:

    s(k)       = ((k-2) - sqrt(k*(k-4))) / 2
    s_tilde(k) = ((k-2) + sqrt(k*(k-4))) / 2

so s*s_tilde = 1 and s + s_tilde = k - 2.  The pipeline derives capacity and
reaction coefficients

    q1 = r2*s_tilde(k2)*exp(1/beta2),    p1 = m2*exp(-1/beta2),
    q2 = r1*s_tilde(k1)*exp(1/beta1),    p2 = m1*exp(-1/beta1),

with r1 >= k1, r2 >= k2 and (m1, m2) inside the admissible open ranges below,
then checks the diffusion inequality that the four-solution theorem needs.

All arithmetic here is plain double precision with a 1e-12 guard band;
verdicts are tri-state (Pass / Fail / Unknown inside the band).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError
from .hypotheses import CertVerdict
from .interval import Interval

GUARD = 1e-12


def _strict(lhs: float, rhs: float) -> str:
    """Tri-state verdict for the strict inequality lhs < rhs."""
    if rhs - lhs > GUARD:
        return "Pass"
    if lhs - rhs > GUARD:
        return "Fail"
    return "Unknown"


def _combine(*statuses: str) -> str:
    if "Fail" in statuses:
        return "Fail"
    if "Unknown" in statuses:
        return "Unknown"
    return "Pass"


def g_eval(k: float, z: float) -> float:
    """g_k(z) = exp(-k/(1+z))/z for z > 0."""
    if not (z > 0.0):
        raise DomainError(f"g_k requires z > 0, got z={z}")
    return math.exp(-k / (1.0 + z)) / z


def s_pair(k: float) -> tuple[float, float]:
    """The stationary points (s, s_tilde) of g_k; requires k >= 4."""
    if k < 4.0:
        raise DomainError(f"s_pair requires k >= 4, got k={k}")
    disc = math.sqrt(k * (k - 4.0))
    return ((k - 2.0 - disc) / 2.0, (k - 2.0 + disc) / 2.0)


def monotonicity_profile(k: float, grid) -> list[int]:
    """Signs of the successive differences of g_k along a sorted positive grid."""
    grid = list(grid)
    if any(z <= 0.0 for z in grid):
        raise DomainError("grid values must be positive")
    vals = [g_eval(k, z) for z in grid]
    signs = []
    for prev, cur in zip(vals, vals[1:]):
        diff = cur - prev
        signs.append(0 if diff == 0.0 else (1 if diff > 0.0 else -1))
    return signs


def check_5_11(k1: float, k2: float) -> CertVerdict:
    """exp(-sqrt(k_j*(k_j-4))) < (s(k_j)/s_tilde(k_j)) * (k_i - 1)/k_i for both
    orderings of (j, i); the gate for nonempty admissible m-ranges."""
    if not (k1 > 4.0 and k2 > 4.0):
        raise DomainError(f"requires k1, k2 > 4, got k1={k1}, k2={k2}")
    s1, st1 = s_pair(k1)
    s2, st2 = s_pair(k2)
    lhs_a = math.exp(-math.sqrt(k1 * (k1 - 4.0)))
    rhs_a = (s1 / st1) * (k2 - 1.0) / k2
    lhs_b = math.exp(-math.sqrt(k2 * (k2 - 4.0)))
    rhs_b = (s2 / st2) * (k1 - 1.0) / k1
    va = _strict(lhs_a, rhs_a)
    vb = _strict(lhs_b, rhs_b)
    status = _combine(va, vb)
    witness = None
    note = ""
    if status == "Fail":
        if va == "Fail":
            witness = (lhs_a, rhs_a, lhs_a - rhs_a)
            note = "first inequality violated"
        else:
            witness = (lhs_b, rhs_b, lhs_b - rhs_b)
            note = "second inequality violated"
    return CertVerdict(status, witness, note=note)


def _m1_bounds(k1, k2, r1) -> tuple[float, float]:
    s2, st2 = s_pair(k2)
    _, st1 = s_pair(k1)
    lo = st2 / ((r1 - 1.0) * st1) * math.exp(k2 / (1.0 + st2))
    hi = s2 / (r1 * st1) * math.exp(k2 / (1.0 + s2))
    return lo, hi


def _m2_bounds(k1, k2, r2) -> tuple[float, float]:
    s1, st1 = s_pair(k1)
    _, st2 = s_pair(k2)
    lo = st1 / ((r2 - 1.0) * st2) * math.exp(k1 / (1.0 + st1))
    hi = s1 / (r2 * st2) * math.exp(k1 / (1.0 + s1))
    return lo, hi


def m_ranges(k1: float, k2: float, r1: float, r2: float
             ) -> tuple[Interval | None, Interval | None]:
    """Open admissible ranges for (m1, m2); None signals an empty range
    (lower >= upper), which happens exactly when the range's gate inequality
    fails."""
    if not (k1 > 4.0 and k2 > 4.0):
        raise DomainError(f"requires k1, k2 > 4, got k1={k1}, k2={k2}")
    if r1 < k1 or r2 < k2:
        raise DomainError(
            f"requires r1 >= k1 and r2 >= k2, got r1={r1}, k1={k1}, "
            f"r2={r2}, k2={k2}")
    lo1, hi1 = _m1_bounds(k1, k2, r1)
    lo2, hi2 = _m2_bounds(k1, k2, r2)
    range1 = Interval(lo1, hi1) if lo1 < hi1 else None
    range2 = Interval(lo2, hi2) if lo2 < hi2 else None
    return range1, range2


@dataclass(frozen=True)
class RcdParams:
    beta1: float
    beta2: float
    k1: float
    k2: float
    r1: float
    r2: float
    m1: float
    m2: float

    def __post_init__(self):
        if not (self.beta1 > 0.0 and self.beta2 > 0.0):
            raise DomainError("beta1 and beta2 must be positive")
        if not (self.k1 > 4.0 and self.k2 > 4.0):
            raise DomainError(
                f"k1 and k2 must exceed 4, got k1={self.k1}, k2={self.k2}")
        if self.r1 < self.k1 or self.r2 < self.k2:
            raise DomainError("need r1 >= k1 and r2 >= k2")
        if not (self.m1 > 0.0 and self.m2 > 0.0):
            raise DomainError("m1 and m2 must be positive")


@dataclass(frozen=True)
class DerivedParams:
    p1: float
    p2: float
    q1: float
    q2: float
    s1: float
    st1: float
    s2: float
    st2: float
    m1_range: Interval
    m2_range: Interval
    source: RcdParams


def f1_value(d: DerivedParams, x1: float, x2: float) -> float:
    return d.p1 * (d.q1 - x2) * math.exp(-d.source.k1 / (1.0 + x1))


def f2_value(d: DerivedParams, x1: float, x2: float) -> float:
    return d.p2 * (d.q2 - x1) * math.exp(-d.source.k2 / (1.0 + x2))


def scaled_ratios(d: DerivedParams) -> dict[str, float]:
    """The four ratios f_j(...)/threshold re-verified after construction:
    the first and third must be < 1, the second and fourth > 1."""
    c1 = d.st1 * math.exp(1.0 / d.source.beta1)
    c2 = d.st2 * math.exp(1.0 / d.source.beta2)
    return {
        "f1_small": f1_value(d, d.s1, 0.0) / d.s1,
        "f1_big": f1_value(d, d.st1, c2) / d.st1,
        "f2_small": f2_value(d, 0.0, d.s2) / d.s2,
        "f2_big": f2_value(d, c1, d.st2) / d.st2,
    }


def ratio_checks(d: DerivedParams) -> list[tuple[str, float, str]]:
    """(name, value, verdict) for the four scaled ratios; the *_small ones
    must sit strictly below 1 and the *_big ones strictly above."""
    ratios = scaled_ratios(d)
    out = []
    for name, want_small in (("f1_small", True), ("f1_big", False),
                             ("f2_small", True), ("f2_big", False)):
        value = ratios[name]
        status = _strict(value, 1.0) if want_small else _strict(1.0, value)
        out.append((name, value, status))
    return out


def build_params(p: RcdParams) -> DerivedParams:
    """Derive (p_j, q_j) from the admissible (m1, m2) and re-verify the
    scaled-ratio inequalities by direct evaluation."""
    range1, range2 = m_ranges(p.k1, p.k2, p.r1, p.r2)
    if range1 is None:
        raise ConfigError("empty admissible range for m1 (gate inequality fails)")
    if range2 is None:
        raise ConfigError("empty admissible range for m2 (gate inequality fails)")
    if not (range1.lo < p.m1 < range1.hi):
        bound = "lower" if p.m1 <= range1.lo else "upper"
        raise ConfigError(
            f"m1={p.m1} violates the {bound} bound of its admissible range "
            f"({range1.lo}, {range1.hi})")
    if not (range2.lo < p.m2 < range2.hi):
        bound = "lower" if p.m2 <= range2.lo else "upper"
        raise ConfigError(
            f"m2={p.m2} violates the {bound} bound of its admissible range "
            f"({range2.lo}, {range2.hi})")
    s1, st1 = s_pair(p.k1)
    s2, st2 = s_pair(p.k2)
    derived = DerivedParams(
        p1=p.m2 * math.exp(-1.0 / p.beta2),
        p2=p.m1 * math.exp(-1.0 / p.beta1),
        q1=p.r2 * st2 * math.exp(1.0 / p.beta2),
        q2=p.r1 * st1 * math.exp(1.0 / p.beta1),
        s1=s1, st1=st1, s2=s2, st2=st2,
        m1_range=range1, m2_range=range2, source=p)
    ratios = scaled_ratios(derived)
    for name, want_small in (("f1_small", True), ("f1_big", False),
                             ("f2_small", True), ("f2_big", False)):
        value = ratios[name]
        ok = value < 1.0 if want_small else value > 1.0
        if not ok:
            rel = "<" if want_small else ">"
            raise ConfigError(
                f"re-verification failed: {name} = {value} is not {rel} 1")
    return derived


def check_5_16(d: DerivedParams, beta1: float, beta2: float) -> CertVerdict:
    """beta_j - beta_j*exp(-1/beta_j) must exceed
    s_tilde(k_j) / f_j(evaluated at the theorem's corner); Pass needs both.

    The right-hand sides are beta-independent (the exp(1/beta) factors of
    p_j and q_j cancel at the corner), so they are taken from the closed
    form and the given betas enter the left side only."""
    lhs1 = beta1 - beta1 * math.exp(-1.0 / beta1)
    lhs2 = beta2 - beta2 * math.exp(-1.0 / beta2)
    rhs1, rhs2 = diffusion_thresholds(d)
    v1 = _strict(rhs1, lhs1)
    v2 = _strict(rhs2, lhs2)
    status = _combine(v1, v2)
    witness = None
    note = ""
    if status == "Fail":
        if v1 == "Fail":
            witness = (lhs1, rhs1, lhs1 - rhs1)
            note = "first component diffusion inequality violated"
        else:
            witness = (lhs2, rhs2, lhs2 - rhs2)
            note = "second component diffusion inequality violated"
    return CertVerdict(status, witness, note=note)


def diffusion_thresholds(d: DerivedParams) -> tuple[float, float]:
    """Right-hand sides of the diffusion inequality (beta-independent)."""
    rhs1 = d.st1 / (d.source.m2 * (d.source.r2 - 1.0) * d.st2
                    * math.exp(-d.source.k1 / (1.0 + d.st1)))
    rhs2 = d.st2 / (d.source.m1 * (d.source.r1 - 1.0) * d.st1
                    * math.exp(-d.source.k2 / (1.0 + d.st2)))
    return rhs1, rhs2


def _h(z: float) -> float:
    s, st = s_pair(z)
    return (s / st) * math.exp(math.sqrt(z * (z - 4.0))) - 4.0 / 3.0


def h_root_bracket(tol: float = 1e-10) -> tuple[float, float]:
    """Bisection bracket of the zero of h(z) = (s/s_tilde)*exp(sqrt(z(z-4))) - 4/3
    on [4, 6]; h is increasing there (asserted by sampling first)."""
    samples = [_h(4.0 + 2.0 * i / 100.0) for i in range(101)]
    if any(b < a for a, b in zip(samples, samples[1:])):
        raise AssertionError("h is not nondecreasing on [4, 6]")
    lo, hi = 4.0, 6.0
    flo = _h(lo)
    if flo > 0.0 or _h(hi) < 0.0:
        raise AssertionError("h does not change sign on [4, 6]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _h(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def h_root(tol: float = 1e-10) -> float:
    """Midpoint of the bisection bracket for the zero of h."""
    lo, hi = h_root_bracket(tol)
    return 0.5 * (lo + hi)
