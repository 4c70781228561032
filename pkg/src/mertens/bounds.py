"""Closed-form error bounds and the negativity certificate.

Rigor model: each bound is assembled from a handful of logarithms, square
roots and exponentials.  Every such quantity is correctly rounded or off by
at most an ulp in libm, so the log of a bound is known to within a few ulps of
the sum of the magnitudes of its parts.  That slack is added before the final
exponential, which is then pushed up once more by (1 + 2^-50).  Additions of
bounds use :func:`~mertens.ddarith.add_up`.  This is cheaper than interval
arithmetic and documented as the rigor model rather than a proof system.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from decimal import ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction

from .ddarith import ROUND_UP, add_up
from .errors import ConsistencyError, DomainError, ParameterError, VerdictError
from .specfun import KernelParams, log_sinh
from .zerosum import WeightedZeroSum

SCHEMA = "mh-report-v1"

# "1 + 5.4e-10" constant block of the mean-value inequality, rounded up.
RM_BLOCK = math.nextafter(float(Fraction(1) + Fraction("5.4e-10")), math.inf)
# Lemma constant for r_M(x) <= (1 + 5.3e-10) / (sqrt(x) log x), log x > 200.
RM_CONST = 1 + 5.3e-10

_SLACK = 8 * 2.0**-52


def _exp_up(*parts: float) -> float:
    """exp(sum(parts)) rounded up, allowing a few ulps of error in each part."""
    s = math.fsum(parts)
    slack = _SLACK * math.fsum(abs(p) for p in parts)
    if s + slack > 709.0:
        raise ParameterError("bound overflows binary64")
    return math.exp(s + slack) * ROUND_UP


def _log_sum_up(a: float, b: float) -> float:
    """Upper estimate of log(e^a + e^b)."""
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi)) * ROUND_UP + _SLACK * abs(hi)


def _log_cosh(x: float) -> float:
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def _dec(v) -> Decimal:
    if isinstance(v, Decimal):
        return v
    return Decimal(repr(v)) if isinstance(v, float) else Decimal(str(v))


@dataclass(frozen=True)
class CertificationInput:
    """Parameters of the mean-value inequality.

    ``omega`` and ``eps`` may be given as decimal strings; the interval
    endpoints are then exact decimals.
    """

    omega: float | str
    eps: float | str
    c: float
    H: float
    a: float
    h: int = 1
    T_sum: float | None = None

    def __post_init__(self):
        w, e = self.omega_f, self.eps_f
        if not (0.0 < e < 1e-3):
            raise ParameterError(f"hypothesis 0 < eps < 1e-3 violated (eps = {self.eps})")
        if not (math.isfinite(self.c) and self.c >= 3.0):
            raise ParameterError(f"hypothesis c >= 3 violated (c = {self.c})")
        if not (w - e > 200.0):
            raise ParameterError(f"hypothesis omega - eps > 200 violated (omega = {self.omega})")
        if not (self.H >= self.c / e):
            raise ParameterError(f"hypothesis H >= c/eps violated (H = {self.H:g}, c/eps = {self.c / e:g})")
        if not (0.0 < self.a < 1.0):
            raise ParameterError(f"hypothesis a in (0, 1) violated (a = {self.a})")
        if self.h not in (0, 1):
            raise ParameterError(f"RH flag h must be 0 or 1, got {self.h}")
        if self.T_sum is None:
            object.__setattr__(self, "T_sum", self.a * self.c / e)
        T = self.T_sum
        if not (0.0 < T <= self.c / e * (1 + 1e-15)):
            raise ParameterError(f"summation height must satisfy 0 < T <= c/eps, got {T:g}")
        if self.uses_tail:
            if not (self.a * self.c / e >= 1e3):
                raise ParameterError(f"hypothesis a c / eps >= 1e3 violated ({self.a * self.c / e:g})")
            if T < self.a * self.c / e * (1 - 1e-15):
                raise ParameterError(f"summation height {T:g} below a c/eps = {self.a * self.c / e:g}; tail not covered")

    @property
    def omega_f(self) -> float:
        return float(_dec(self.omega))

    @property
    def eps_f(self) -> float:
        return float(_dec(self.eps))

    @property
    def params(self) -> KernelParams:
        return KernelParams(self.c, self.eps_f)

    @property
    def uses_tail(self) -> bool:
        return self.T_sum is not None and self.T_sum < self.c / self.eps_f * (1 - 1e-15)

    def echo(self) -> dict:
        return {
            "omega": str(_dec(self.omega)),
            "eps": str(_dec(self.eps)),
            "c": self.c,
            "H": self.H,
            "a": self.a,
            "h": self.h,
            "T_sum": self.T_sum,
        }


def bound_e1(inp: CertificationInput) -> float:
    """0.33 e^{h w/2} e^{0.71 sqrt(c eps)} / sinh(c) log(3c) log(c/eps)."""
    c, e, w = inp.c, inp.eps_f, inp.omega_f
    return _exp_up(
        math.log(0.33),
        inp.h * w / 2,
        0.71 * math.sqrt(c * e),
        -log_sinh(c),
        math.log(math.log(3 * c)),
        math.log(math.log(c / e)),
    )


def bound_e2(inp: CertificationInput) -> float:
    """(3.36 + 126 eps)/(1000 w^2) + 2.8 (e/(2H))^{w/2-1} log H."""
    e, w, H = inp.eps_f, inp.omega_f, inp.H
    first = _exp_up(math.log(3.36 + 126 * e), -math.log(1000.0), -2 * math.log(w))
    if math.isinf(H):
        return first
    second = _exp_up(math.log(2.8), (w / 2 - 1) * (1 - math.log(2 * H)), math.log(math.log(H)))
    return add_up(first, second)


def bound_e3(inp: CertificationInput) -> float:
    """e^{w/2}/(1.99 H) log H (c e^{3.12 sqrt(c eps)}/(w sinh c) + (e eps/w)^{w/2})."""
    c, e, w, H = inp.c, inp.eps_f, inp.omega_f, inp.H
    b1 = math.log(c) + 3.12 * math.sqrt(c * e) - math.log(w) - log_sinh(c)
    b2 = (w / 2) * (1 + math.log(e) - math.log(w))
    return _exp_up(w / 2, -math.log(1.99), -math.log(H), math.log(math.log(H)), _log_sum_up(b1, b2))


def bound_ace_tail(inp: CertificationInput) -> float:
    """(0.32 + 3.51 c eps)/(c a^2) log(c/eps) cosh(c sqrt(1-a^2)) / sinh(c)."""
    c, e, a = inp.c, inp.eps_f, inp.a
    if not (a * c / e >= 1e3):
        raise ParameterError(f"tail bound needs a c / eps >= 1e3, got {a * c / e:g}")
    return _exp_up(
        math.log(0.32 + 3.51 * c * e),
        -math.log(c),
        -2 * math.log(a),
        math.log(math.log(c / e)),
        _log_cosh(c * math.sqrt(1 - a * a)),
        -log_sinh(c),
    )


def bound_rm(x_log: float) -> float:
    """Upper bound (1 + 5.3e-10) / (sqrt(x) log x) for the prime-power remainder, log x > 200."""
    if not x_log > 200:
        raise DomainError(f"remainder bound needs log x > 200, got {x_log}")
    return _exp_up(math.log(RM_CONST), -x_log / 2, -math.log(x_log))


# ---------------------------------------------------------------------------
# Certificate


@dataclass(frozen=True)
class CertificationReport:
    zero_sum: float
    e1: float
    e2: float
    e3: float
    ace_tail: float
    rm_term: float
    total_upper_bound: float
    verdict: str
    tail_used: bool = False
    sum_source: str = "computed"
    inputs: dict = field(default_factory=dict)

    @property
    def negative(self) -> bool:
        return self.verdict == "negative-certified"


def _fixed_part(inp: CertificationInput):
    e1, e2, e3 = bound_e1(inp), bound_e2(inp), bound_e3(inp)
    ace = bound_ace_tail(inp) if inp.uses_tail else 0.0
    return e1, e2, e3, ace


def certify(inp: CertificationInput, zsum: WeightedZeroSum | float) -> CertificationReport:
    """Upper bound for the kernel-weighted mean of the deviation.

    ``zsum`` is either a computed :class:`WeightedZeroSum` (checked against the
    inputs) or a bare number, which is recorded as an unverified override.
    """
    if isinstance(zsum, WeightedZeroSum):
        if zsum.omega != inp.omega_f:
            raise ConsistencyError(f"zero sum was taken at omega = {zsum.omega!r}, not {inp.omega_f!r}")
        if (zsum.params.c, zsum.params.eps) != (inp.c, inp.eps_f):
            raise ConsistencyError("zero sum kernel parameters differ from the certification input")
        if zsum.T != inp.T_sum:
            raise ConsistencyError(f"zero sum height {zsum.T:g} differs from T_sum = {inp.T_sum:g}")
        value, source = zsum.value, "computed"
    else:
        value, source = float(zsum), "override"
    e1, e2, e3, ace = _fixed_part(inp)
    total = add_up(value, RM_BLOCK, e1, e2, e3, ace)
    verdict = "negative-certified" if total < 0 else "inconclusive"
    return CertificationReport(value, e1, e2, e3, ace, RM_BLOCK, total, verdict, inp.uses_tail, source, inp.echo())


@dataclass(frozen=True)
class SignRegion:
    """Where the sign change sits and how long negativity persists (all in log x)."""

    x_lo: Decimal
    x_hi: Decimal
    persistence_log: float
    margin: Decimal


def clean_margin(total: float) -> Decimal:
    """|total| (1 - 1e-2), rounded down to two significant digits."""
    b = Decimal(repr(abs(total))) * Decimal("0.99")
    if b == 0:
        return Decimal(0)
    exp = b.adjusted() - 1
    return b.quantize(Decimal(1).scaleb(exp), rounding=ROUND_FLOOR)


def propagate_interval(report: CertificationReport, inp: CertificationInput, margin=None) -> SignRegion:
    """Theorem-style statement from a negative certificate.

    There is x in [e^{w-eps}, e^{w+eps}] with Delta_M(x) < -|total|/(sqrt(x) log x);
    integrating dt/(t log t) backwards shows negativity persists on
    [x - B sqrt(x), x] with B the cleaned margin, so the persistence length is
    at least exp(log B + (w - eps)/2).
    """
    if not report.negative:
        raise VerdictError("cannot propagate an inconclusive certificate")
    w, e = _dec(inp.omega), _dec(inp.eps)
    B = clean_margin(report.total_upper_bound) if margin is None else _dec(margin)
    if B <= 0:
        raise VerdictError("margin is zero; persistence length is -inf")
    with localcontext() as ctx:
        ctx.prec = 40
        p = B.ln() + (w - e) / 2
    plog = float(p)
    if Decimal(repr(plog)) > p:
        plog = math.nextafter(plog, -math.inf)
    return SignRegion(w - e, w + e, plog, B)


# ---------------------------------------------------------------------------
# JSON


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return json.dumps(str(v))
        return format(v, ".17g")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Decimal):
        return str(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return json.dumps(str(v))


def report_json(report: CertificationReport, region: SignRegion | None = None, extra: dict | None = None) -> str:
    """Serialize to the ``mh-report-v1`` schema (floats at 17 significant digits)."""
    doc = {"schema": SCHEMA, "input": report.inputs}
    body = asdict(report)
    body.pop("inputs")
    doc.update(body)
    doc["unverified_input"] = report.sum_source == "override"
    if region is not None:
        doc["sign_region"] = {
            "log_x_lo": region.x_lo,
            "log_x_hi": region.x_hi,
            "persistence_log": region.persistence_log,
            "margin": region.margin,
        }
    if extra:
        doc.update(extra)
    return _fmt(doc) + "\n"
