"""Closed-form asymptotic predictions for the random (d+1)-uniform hypergraph.

Edge-probability families are explicit parametric forms; classification maps
each to the clause of the zero-one/convergence case analysis it falls in.
The clause layout over p, for arity parameter d:

* BB1  p well below n^-(d+1): empty models                      (zero-one)
* BB2  strictly between consecutive butterfly-appearance
       thresholds n^-(1+ld)/l                                   (zero-one)
* BB3  above every n^-(d+eps) but below n^-d                    (zero-one,
       not reachable from the parametric forms here)
* BB4  on a butterfly threshold p ~ c*n^-(1+ld)/l               (convergence)
* DJ   p ~ lambda*n^-d                                          (convergence)
* BC1  between n^-d and the log window                          (zero-one,
       not reachable parametrically)
* BC3  log window with d!/(v*+1) < C < d!/v*, v* >= 1           (zero-one)
* BC5  fine window p = (d!/v*)(log n + l log log n + c)/n^d     (convergence)
* BEYOND  log window with C > d! (and anything past it)         (zero-one)

Boundary parameter values that the case analysis resolves only through a
finer window (for example C exactly d!/v*) classify as "unclassified";
re-express them in the finer parametric form instead.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

from . import butterfly

__all__ = [
    "PowerLaw",
    "ButterflyWindow",
    "DoubleJump",
    "LogWindow",
    "FineWindow",
    "Custom",
    "Family",
    "Regime",
    "classify",
    "omega_of",
    "c_l_of",
    "expected_butterfly_components",
    "expected_marked_copies",
    "bb_lambda",
    "bc_lambda",
    "sigma_m_limit",
    "prob_Dl_limit",
    "mu_bounds",
    "connectivity_threshold",
    "parse_family",
    "family_to_string",
    "ZERO_ONE",
    "CONVERGENCE",
    "UNCLASSIFIED",
]

ZERO_ONE = "zero-one"
CONVERGENCE = "convergence"
UNCLASSIFIED = "unclassified"

_REL_TOL = 1e-12


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


@dataclass(frozen=True)
class PowerLaw:
    """p(n) = C * n^-alpha."""

    C: float
    alpha: float

    def __post_init__(self):
        if self.C <= 0 or self.alpha <= 0:
            raise ValueError("PowerLaw needs C > 0 and alpha > 0")

    def evaluate(self, n: int) -> float:
        return _clamp(self.C * float(n) ** -self.alpha)


@dataclass(frozen=True)
class ButterflyWindow:
    """p(n) = c * n^-(1+l*d)/l: the appearance threshold of order-l butterflies."""

    d: int
    l: int
    c: float

    def __post_init__(self):
        if self.d < 1 or self.l < 1 or self.c <= 0:
            raise ValueError("ButterflyWindow needs d >= 1, l >= 1, c > 0")

    @property
    def exponent(self) -> float:
        return (1 + self.l * self.d) / self.l

    def evaluate(self, n: int) -> float:
        return _clamp(self.c * float(n) ** -self.exponent)


@dataclass(frozen=True)
class DoubleJump:
    """p(n) = lam * n^-d."""

    d: int
    lam: float

    def __post_init__(self):
        if self.d < 1 or self.lam <= 0:
            raise ValueError("DoubleJump needs d >= 1 and lam > 0")

    def evaluate(self, n: int) -> float:
        return _clamp(self.lam * float(n) ** -self.d)


@dataclass(frozen=True)
class LogWindow:
    """p(n) = C * log(n) / n^d."""

    d: int
    C: float

    def __post_init__(self):
        if self.d < 1 or self.C <= 0:
            raise ValueError("LogWindow needs d >= 1 and C > 0")

    def evaluate(self, n: int) -> float:
        return _clamp(self.C * math.log(n) / float(n) ** self.d)


@dataclass(frozen=True)
class FineWindow:
    """p(n) = (d!/v*) * (log n + l*log log n + c) / n^d."""

    d: int
    v_star: int
    l: int
    c: float

    def __post_init__(self):
        if self.d < 1 or self.v_star < 1 or self.l < 0:
            raise ValueError("FineWindow needs d >= 1, v_star >= 1, l >= 0")

    def evaluate(self, n: int) -> float:
        if n < 3:
            raise ValueError("FineWindow needs n >= 3 (log log n)")
        ln = math.log(n)
        return _clamp(
            math.factorial(self.d)
            / self.v_star
            * (ln + self.l * math.log(ln) + self.c)
            / float(n) ** self.d
        )


@dataclass(frozen=True)
class Custom:
    """An arbitrary evaluator; usable for sampling but never classified."""

    fn: Callable[[int], float]
    label: str = "custom"

    def evaluate(self, n: int) -> float:
        return _clamp(float(self.fn(n)))


Family = PowerLaw | ButterflyWindow | DoubleJump | LogWindow | FineWindow | Custom


@dataclass(frozen=True)
class Regime:
    """Clause of the case analysis a family falls in, plus its law kind."""

    clause: str
    law: str
    l: int | None = None
    v_star: int | None = None
    description: str = ""


def _near(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=_REL_TOL, abs_tol=0.0)


def classify(family: Family, d: int) -> Regime:
    """Map a parametric family to its clause; boundary values are unclassified."""
    if isinstance(family, Custom):
        raise ValueError("Custom families cannot be classified")
    fam_d = getattr(family, "d", None)
    if fam_d is not None and fam_d != d:
        raise ValueError(f"family has d={fam_d}, classify called with d={d}")

    if isinstance(family, ButterflyWindow):
        return Regime(
            "BB4", CONVERGENCE, l=family.l,
            description=f"on the order-{family.l} butterfly threshold",
        )
    if isinstance(family, DoubleJump):
        return Regime("DJ", CONVERGENCE, description="double jump p ~ lam/n^d")
    if isinstance(family, FineWindow):
        return Regime(
            "BC5", CONVERGENCE, l=family.l, v_star=family.v_star,
            description="fine window with convergent c(n)",
        )
    if isinstance(family, LogWindow):
        dfac = float(math.factorial(d))
        if family.C > dfac and not _near(family.C, dfac):
            return Regime(
                "BEYOND", ZERO_ONE, v_star=0,
                description="log window above the connectivity constant",
            )
        # find v* >= 1 with d!/(v*+1) < C < d!/v*
        v_star = int(dfac // family.C)
        for cand in (v_star - 1, v_star, v_star + 1):
            if cand < 1:
                continue
            lo, hi = dfac / (cand + 1), dfac / cand
            if _near(family.C, lo) or _near(family.C, hi):
                return Regime(
                    UNCLASSIFIED, UNCLASSIFIED,
                    description=f"boundary C = {family.C}; use the fine window form",
                )
            if lo < family.C < hi:
                return Regime(
                    "BC3", ZERO_ONE, v_star=cand,
                    description=f"log window with d!/{cand + 1} < C < d!/{cand}",
                )
        return Regime(UNCLASSIFIED, UNCLASSIFIED, description="log window boundary")

    # PowerLaw
    alpha = family.alpha
    if alpha < d and not _near(alpha, d):
        return Regime(
            UNCLASSIFIED, UNCLASSIFIED,
            description="p = C n^-alpha with alpha < d lies outside the studied ranges",
        )
    if _near(alpha, d):
        return Regime("DJ", CONVERGENCE, description="double jump p ~ C/n^d")
    if alpha > d + 1 and not _near(alpha, d + 1):
        return Regime("BB1", ZERO_ONE, description="below the single-edge threshold")
    # alpha in (d, d+1]: either exactly d + 1/l or strictly between two such
    l_guess = max(1, round(1.0 / (alpha - d)))
    for cand in (l_guess - 1, l_guess, l_guess + 1):
        if cand >= 1 and _near(alpha, d + 1.0 / cand):
            return Regime(
                "BB4", CONVERGENCE, l=cand,
                description=f"on the order-{cand} butterfly threshold",
            )
    l_between = math.floor(1.0 / (alpha - d))
    return Regime(
        "BB2", ZERO_ONE, l=l_between,
        description=f"between the order-{l_between} and order-{l_between + 1} thresholds",
    )


# ---------------------------------------------------------------------------
# window coordinates
# ---------------------------------------------------------------------------


def omega_of(family: Family, n: int, v_star: int | None = None) -> float:
    """Second-order coordinate (v* n^d p/d! - log n)/log log n.

    v* comes from the family when it has one (the fine window); pass it
    explicitly otherwise (default 1).
    """
    if n < 3:
        raise ValueError("omega needs n >= 3")
    if v_star is None:
        v_star = getattr(family, "v_star", 1)
    d = getattr(family, "d", None)
    if d is None:
        raise ValueError("omega needs a family with an explicit d")
    p = family.evaluate(n)
    ln = math.log(n)
    return (v_star * float(n) ** d * p / math.factorial(d) - ln) / math.log(ln)


def c_l_of(family: Family, l: int, n: int) -> float:
    """Third-order coordinate c_l(n) = n^d (1+ld) p / d! - log n - l log log n."""
    if n < 3:
        raise ValueError("c_l needs n >= 3")
    d = getattr(family, "d", None)
    if d is None:
        raise ValueError("c_l needs a family with an explicit d")
    p = family.evaluate(n)
    ln = math.log(n)
    return (
        float(n) ** d * (1 + l * d) * p / math.factorial(d)
        - ln
        - l * math.log(ln)
    )


# ---------------------------------------------------------------------------
# expectations and Poisson means
# ---------------------------------------------------------------------------


def expected_butterfly_components(
    btype: butterfly.ButterflyType, n: int, p: float
) -> float:
    """First-moment count of components of this type:
    c * n^v/v! * p^l * exp(-p v n^d / d!)."""
    v = btype.vertex_count
    l = btype.order
    if p <= 0.0:
        return float(n) if l == 0 else 0.0
    log_term = (
        math.log(btype.labelled_count)
        + v * math.log(n)
        - math.lgamma(v + 1)
        + l * math.log(p)
        - p * v * float(n) ** btype.d / math.factorial(btype.d)
    )
    return math.exp(log_term)


def expected_marked_copies(
    mtype: butterfly.MarkedButterflyType, n: int, p: float
) -> float:
    """First-moment count of copies: (c/v!) n^v p^l (1-p)^(v* n^d / d!)."""
    v = mtype.vertex_count
    l = mtype.order
    if p <= 0.0:
        return float(n) if l == 0 else 0.0
    if p >= 1.0 and mtype.v_star >= 1:
        return 0.0
    damping = 0.0
    if mtype.v_star:
        damping = (
            mtype.v_star * float(n) ** mtype.d / math.factorial(mtype.d) * math.log1p(-p)
        )
    log_term = (
        math.log(mtype.labelled_count)
        - math.lgamma(v + 1)
        + v * math.log(n)
        + l * math.log(p)
        + damping
    )
    return math.exp(log_term)


def bb_lambda(btype: butterfly.ButterflyType, c: float) -> float:
    """Poisson mean of the type's component count on its appearance threshold
    p ~ c n^-(1+ld)/l: (c_i/v!) * c^l."""
    if btype.order < 1:
        raise ValueError("threshold means need order >= 1")
    v = btype.vertex_count
    return btype.labelled_count / math.factorial(v) * c**btype.order


def bc_lambda(mtype: butterfly.MarkedButterflyType, c: float) -> float:
    """Poisson mean of the marked-copy count in the fine window:
    (c_i/v!) * (d!/v*)^l * e^-c."""
    if mtype.v_star < 1:
        raise ValueError("the fine-window mean needs v* >= 1")
    v = mtype.vertex_count
    return (
        mtype.labelled_count
        / math.factorial(v)
        * (math.factorial(mtype.d) / mtype.v_star) ** mtype.order
        * math.exp(-c)
    )


def sigma_m_limit(lambdas: Sequence[float], m: Sequence[int]) -> float:
    """Limit of the joint event {count_i = m_i for all i}:
    prod_i e^-lambda_i lambda_i^m_i / m_i!."""
    if len(lambdas) != len(m):
        raise ValueError("lambdas and m must have equal length")
    out = 1.0
    for lam, mi in zip(lambdas, m):
        if lam < 0 or mi < 0:
            raise ValueError("lambdas and m must be nonnegative")
        if lam == 0.0:
            if mi:
                return 0.0
            continue
        out *= math.exp(-lam + mi * math.log(lam) - math.lgamma(mi + 1))
    return out


def _fully_marked_lambda_sum(d: int, l: int, c: float) -> float:
    total = 0.0
    for mt in butterfly.enumerate_marked_types(d, l, 1 + l * d, minimal_only=True):
        total += bc_lambda(mt, c)
    return total


def _bb_lambda_sum(d: int, l: int, c: float) -> float:
    return sum(bb_lambda(t, c) for t in butterfly.enumerate_types(d, l))


def prob_Dl_limit(d: int, l: int, family: Family) -> float:
    """Limiting probability of D_l, by the sign of c_l(n) for the family.

    Off-threshold families give 0 or 1; on the two threshold forms the limit
    is exp(-sum of the Poisson means over all order-l types), fully marked in
    the fine-window case.  l = 0 with the fine window reproduces the double
    exponential exp(-e^-c).
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if isinstance(family, Custom):
        raise ValueError("Custom families cannot be classified")
    fam_d = getattr(family, "d", None)
    if fam_d is not None and fam_d != d:
        raise ValueError(f"family has d={fam_d}, got d={d}")

    if isinstance(family, DoubleJump):
        return 0.0
    if isinstance(family, ButterflyWindow):
        if l == 0 or family.l > l:
            return 0.0  # c_l drifts to -infinity
        if family.l < l:
            return 1.0  # below the order-l appearance threshold
        return math.exp(-_bb_lambda_sum(d, l, family.c))
    if isinstance(family, LogWindow):
        boundary = math.factorial(d) / (1 + l * d)
        if _near(family.C, boundary):
            # c_l(n) = -l log log n: zero exactly when l = 0
            return math.exp(-_fully_marked_lambda_sum(d, 0, 0.0)) if l == 0 else 0.0
        return 1.0 if family.C > boundary else 0.0
    if isinstance(family, FineWindow):
        v = 1 + l * d
        if family.v_star > v:
            return 0.0
        if family.v_star < v:
            return 1.0
        if family.l > l:
            return 1.0
        if family.l < l:
            return 0.0
        return math.exp(-_fully_marked_lambda_sum(d, l, family.c))
    # PowerLaw
    alpha = family.alpha
    if _near(alpha, d) or alpha < d:
        # double jump or denser: a giant plus butterflies of every order
        # (alpha < d eventually exceeds the connectivity window: connected)
        return 0.0 if _near(alpha, d) else 1.0
    if l == 0:
        return 0.0  # below connectivity
    thr = (1 + l * d) / l
    if _near(alpha, thr):
        return math.exp(-_bb_lambda_sum(d, l, family.C))
    return 1.0 if alpha > thr else 0.0


def mu_bounds(d: int, l: int, n: int) -> tuple[float, float]:
    """(lower, upper) cutoff functions for the vertex count outside the giant:
    n^(d/(1+ld)) (log n)^(-1-ld) and n^(ld/(1+ld)) (log n)^(-l/(1+ld)).

    When c_l -> -infinity, mu eventually exceeds anything below the lower
    cutoff; when c_l -> +infinity, mu eventually stays below anything above
    the upper cutoff.
    """
    if n < 3:
        raise ValueError("mu_bounds needs n >= 3")
    if d < 1 or l < 0:
        raise ValueError("need d >= 1 and l >= 0")
    ln = math.log(n)
    v = 1 + l * d
    lower = float(n) ** (d / v) * ln ** (-(1 + l * d))
    upper = float(n) ** (l * d / v) * ln ** (-l / v)
    return lower, upper


def connectivity_threshold(d: int) -> LogWindow:
    """Representative threshold for connectivity: p = d! log n / n^d."""
    return LogWindow(d=d, C=float(math.factorial(d)))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_FAMILY_ALIASES = {
    "powerlaw": "powerlaw",
    "pl": "powerlaw",
    "butterflywindow": "bw",
    "bw": "bw",
    "doublejump": "dj",
    "dj": "dj",
    "logwindow": "logwindow",
    "lw": "logwindow",
    "finewindow": "finewindow",
    "fw": "finewindow",
}


def parse_family(text: str) -> Family:
    """Parse CLI forms like 'finewindow:d=1,vstar=2,l=1,c=0.0'."""
    m = re.fullmatch(r"\s*([a-zA-Z]+)\s*:\s*(.*)\s*", text)
    if not m:
        raise ValueError(f"cannot parse family {text!r}; expected 'name:key=value,...'")
    name = _FAMILY_ALIASES.get(m.group(1).lower())
    if name is None:
        raise ValueError(f"unknown family {m.group(1)!r}")
    kv: dict[str, float] = {}
    body = m.group(2)
    if body:
        for part in body.split(","):
            k, _, val = part.partition("=")
            if not _:
                raise ValueError(f"bad parameter {part!r}")
            kv[k.strip().lower()] = float(val)

    def take(key: str, *, integer: bool = False):
        if key not in kv:
            raise ValueError(f"family {name!r} needs parameter {key!r}")
        val = kv.pop(key)
        if integer:
            if val != int(val):
                raise ValueError(f"parameter {key!r} must be an integer")
            return int(val)
        return val

    try:
        if name == "powerlaw":
            fam: Family = PowerLaw(C=take("c"), alpha=take("alpha"))
        elif name == "bw":
            fam = ButterflyWindow(d=take("d", integer=True), l=take("l", integer=True), c=take("c"))
        elif name == "dj":
            fam = DoubleJump(d=take("d", integer=True), lam=take("lambda"))
        elif name == "logwindow":
            fam = LogWindow(d=take("d", integer=True), C=take("c"))
        else:
            fam = FineWindow(
                d=take("d", integer=True),
                v_star=take("vstar", integer=True),
                l=take("l", integer=True),
                c=take("c"),
            )
    except KeyError as exc:
        raise ValueError(str(exc)) from exc
    if kv:
        raise ValueError(f"unused parameters {sorted(kv)} for family {name!r}")
    return fam


def family_to_string(family: Family) -> str:
    if isinstance(family, PowerLaw):
        return f"powerlaw:C={family.C},alpha={family.alpha}"
    if isinstance(family, ButterflyWindow):
        return f"bw:d={family.d},l={family.l},c={family.c}"
    if isinstance(family, DoubleJump):
        return f"dj:d={family.d},lambda={family.lam}"
    if isinstance(family, LogWindow):
        return f"logwindow:d={family.d},C={family.C}"
    if isinstance(family, FineWindow):
        return f"finewindow:d={family.d},vstar={family.v_star},l={family.l},c={family.c}"
    return getattr(family, "label", "custom")
