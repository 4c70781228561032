"""Error bounds, the certificate and its propagation to an x-interval."""

import json
import math
import random
from decimal import Decimal
from fractions import Fraction

import mpmath as mp
import pytest

from mertens.bounds import (
    RM_BLOCK,
    SCHEMA,
    CertificationInput,
    bound_ace_tail,
    bound_e1,
    bound_e2,
    bound_e3,
    bound_rm,
    certify,
    clean_margin,
    propagate_interval,
    report_json,
)
from mertens.errors import ConsistencyError, DomainError, ParameterError, VerdictError
from mertens.specfun import KernelParams
from mertens.zerosum import WeightedZeroSum

PAPER = dict(omega="495.702833137", eps="2.8e-8", c=280.0, H=1e11, a=0.4, h=1)


def paper_input(**kw):
    return CertificationInput(**{**PAPER, **kw})


# independent high-precision evaluations of the closed forms
def mp_e1(w, c, e, h):
    w, c, e = mp.mpf(w), mp.mpf(c), mp.mpf(e)
    return mp.mpf("0.33") * mp.exp(h * w / 2) * mp.exp(mp.mpf("0.71") * mp.sqrt(c * e)) / mp.sinh(c) * mp.log(3 * c) * mp.log(c / e)


def mp_e2(w, e, H):
    w, e, H = mp.mpf(w), mp.mpf(e), mp.mpf(H)
    return (mp.mpf("3.36") + 126 * e) / (1000 * w**2) + mp.mpf("2.8") * (mp.e / (2 * H)) ** (w / 2 - 1) * mp.log(H)


def mp_e3(w, c, e, H):
    w, c, e, H = mp.mpf(w), mp.mpf(c), mp.mpf(e), mp.mpf(H)
    br = c * mp.exp(mp.mpf("3.12") * mp.sqrt(c * e)) / (w * mp.sinh(c)) + (mp.e * e / w) ** (w / 2)
    return mp.exp(w / 2) / (mp.mpf("1.99") * H) * mp.log(H) * br


def mp_ace(c, e, a):
    c, e, a = mp.mpf(c), mp.mpf(e), mp.mpf(a)
    return (mp.mpf("0.32") + mp.mpf("3.51") * c * e) / (c * a**2) * mp.log(c / e) * mp.cosh(c * mp.sqrt(1 - a**2)) / mp.sinh(c)


# ---------------------------------------------------------------------------
# individual bounds


def test_paper_bounds():
    inp = paper_input()
    assert 1.0e-12 <= bound_e1(inp) <= 1.3e-12
    assert 1.3e-8 <= bound_e2(inp) <= 1.4e-8
    assert bound_e3(inp) <= 2e-24
    assert 1.0e-11 <= bound_ace_tail(inp) <= 1.3e-11


def test_e1_rh_flag_divides_by_exp_half_omega():
    one, zero = bound_e1(paper_input(h=1)), bound_e1(paper_input(h=0))
    assert zero == pytest.approx(one / math.exp(495.702833137 / 2), rel=1e-12)


@pytest.mark.parametrize("w,c,e,h", [(210.0, 3.0, 1e-4, 1), (495.702833137, 280.0, 2.8e-8, 1), (300.0, 50.0, 1e-6, 0)])
def test_e1_matches_oracle(w, c, e, h):
    with mp.workdps(50):
        ref = mp_e1(repr(w), c, repr(e), h)
    v = bound_e1(CertificationInput(repr(w), repr(e), c, 1e12, 0.5, h))
    assert float(ref) <= v <= float(ref) * (1 + 1e-12)


def test_e2_matches_oracle_and_limit():
    with mp.workdps(50):
        ref = mp_e2("210", "1e-4", "1e11")
    v = bound_e2(CertificationInput("210", "1e-4", 3.0, 1e11, 0.5))
    assert float(ref) <= v <= float(ref) * (1 + 1e-12)
    lim = bound_e2(CertificationInput("210", "1e-4", 3.0, math.inf, 0.5))
    assert lim == pytest.approx((3.36 + 126e-4) / (1000 * 210.0**2), rel=1e-14)
    assert lim >= (3.36 + 126e-4) / (1000 * 210.0**2)


def test_e3_matches_oracle_and_limit():
    with mp.workdps(50):
        ref = mp_e3("210", 3, "1e-4", "1e11")
    v = bound_e3(CertificationInput("210", "1e-4", 3.0, 1e11, 0.5))
    assert float(ref) <= v <= float(ref) * (1 + 1e-12)
    # eps -> 0: the bracket tends to c / (w sinh c)
    small = bound_e3(CertificationInput("210", "1e-15", 3.0, 1e16, 0.5))
    with mp.workdps(50):
        lim = mp.exp(105) / (mp.mpf("1.99") * mp.mpf("1e16")) * mp.log(mp.mpf("1e16")) * 3 / (210 * mp.sinh(3))
    assert small == pytest.approx(float(lim), rel=1e-6)


def test_ace_tail_matches_oracle_and_limit():
    with mp.workdps(50):
        ref = mp_ace(280, "2.8e-8", "0.5")
    v = bound_ace_tail(paper_input(a=0.5))
    assert float(ref) <= v <= float(ref) * (1 + 1e-12)
    # a -> 1: cosh(c sqrt(1 - a^2)) -> 1
    near = bound_ace_tail(paper_input(a=1 - 1e-15))
    with mp.workdps(50):
        lim = (mp.mpf("0.32") + mp.mpf("3.51") * 280 * mp.mpf("2.8e-8")) / 280 * mp.log(280 / mp.mpf("2.8e-8")) / mp.sinh(280)
    assert near == pytest.approx(float(lim), rel=1e-5)


def test_ace_tail_precondition():
    inp = CertificationInput("300", "1e-4", 3.0, 1e12, 0.01, T_sum=3e4)
    with pytest.raises(ParameterError):
        bound_ace_tail(inp)


def test_rm_bound():
    assert bound_rm(201.0) == pytest.approx((1 + 5.3e-10) * math.exp(-100.5) / 201, rel=1e-14)
    with mp.workdps(40):
        ref = (1 + mp.mpf("5.3e-10")) * mp.exp(-mp.mpf("495.7") / 2) / mp.mpf("495.7")
    assert float(ref) <= bound_rm(495.7) <= float(ref) * (1 + 1e-12)
    with pytest.raises(DomainError):
        bound_rm(200.0)


def test_monotonicity_on_grid():
    ws = [210.0, 300.0, 495.7]
    es = [1e-8, 1e-6, 1e-4]
    # e1 in eps follows the sign of d/de [0.71 sqrt(c e) + log log(c/e)], which is
    # 0.355 sqrt(c/e) - 1/(e log(c/e)); the log factor wins for small c e
    for w in ws:
        for c in (3.0, 30.0, 280.0):
            for e in (1e-8, 1e-6, 1e-4, 5e-4):
                e2 = e * 1.01
                base = dict(omega=w, c=c, H=max(1e12, c / e), a=0.5)
                v = bound_e1(CertificationInput(**base, eps=e, h=1))
                v2 = bound_e1(CertificationInput(**base, eps=e2, h=1))
                grows = 0.355 * math.sqrt(c * e2) * math.log(c / e2) > 1 and 0.355 * math.sqrt(c * e) * math.log(c / e) > 1
                falls = 0.355 * math.sqrt(c * e2) * math.log(c / e2) < 1 and 0.355 * math.sqrt(c * e) * math.log(c / e) < 1
                if grows:
                    assert v2 >= v
                if falls:
                    assert v2 <= v
                assert v >= bound_e1(CertificationInput(**base, eps=e, h=0))
    for e in es:
        Hs = [1e11, 1e12, 1e14]
        vals = [bound_e2(CertificationInput(300.0, e, 3.0, H, 0.5)) for H in Hs]
        assert all(x >= y for x, y in zip(vals, vals[1:]))
        vals = [bound_e2(CertificationInput(w, e, 3.0, 1e11, 0.5)) for w in ws]
        assert all(x >= y for x, y in zip(vals, vals[1:]))
    vals = [bound_ace_tail(paper_input(a=a)) for a in (0.2, 0.4, 0.6, 0.9)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_upward_rounding_random():
    rng = random.Random(20240601)
    with mp.workdps(60):
        for _ in range(100):
            w = rng.uniform(201.0, 700.0)
            e = 10 ** rng.uniform(-9, -3.1)
            c = rng.uniform(3.0, 300.0)
            H = max(c / e, 10 ** rng.uniform(9, 13))
            a = rng.uniform(0.05, 0.95)
            h = rng.randint(0, 1)
            inp = CertificationInput(w, e, c, H, a, h, T_sum=c / e)
            # every oracle argument is the exact binary value the code sees
            W, E = repr(w), repr(e)
            if h * w / 2 < 700:
                assert float(mp_e1(W, c, E, h)) <= bound_e1(inp)
            assert float(mp_e2(W, E, H)) <= bound_e2(inp)
            assert float(mp_e3(W, c, E, H)) <= bound_e3(inp)
            if a * c / e >= 1e3:
                assert float(mp_ace(c, E, a)) <= bound_ace_tail(inp)


# ---------------------------------------------------------------------------
# inputs


@pytest.mark.parametrize(
    "kw,needle",
    [
        (dict(eps="0.01"), "0 < eps < 1e-3"),
        (dict(c=2.0), "c >= 3"),
        (dict(omega="200"), "omega - eps > 200"),
        (dict(H=1e9), "H >= c/eps"),
        (dict(a=1.0), "a in (0, 1)"),
        (dict(a=1e-12), "a c / eps >= 1e3"),
    ],
)
def test_hypothesis_violations(kw, needle):
    with pytest.raises(ParameterError, match="hypothesis") as ei:
        paper_input(**kw)
    assert needle in str(ei.value)


def test_default_height_and_tail():
    inp = paper_input()
    assert inp.T_sum == pytest.approx(0.4 * 280 / 2.8e-8)
    assert inp.uses_tail
    assert not paper_input(T_sum=280 / 2.8e-8).uses_tail


# ---------------------------------------------------------------------------
# certificate


def test_paper_certificate():
    rep = certify(paper_input(), -1.00015419)
    assert rep.total_upper_bound < -0.000154
    assert rep.verdict == "negative-certified" and rep.negative
    assert rep.sum_source == "override" and rep.tail_used
    assert rep.rm_term == RM_BLOCK >= 1 + 5.4e-10


def test_empty_sum_is_inconclusive():
    rep = certify(paper_input(), 0.0)
    assert rep.verdict == "inconclusive"
    assert rep.total_upper_bound == pytest.approx(1.0, abs=1e-7)


def test_four_term_addition_oracle():
    inp = paper_input()
    rep = certify(inp, -1.0)
    exact = sum(Fraction(t) for t in (-1.0, RM_BLOCK, rep.e1, rep.e2, rep.e3, rep.ace_tail))
    tot = rep.total_upper_bound
    # smallest double at or above the exact sum
    assert Fraction(tot) >= exact > Fraction(math.nextafter(tot, -math.inf))
    assert tot == pytest.approx(5.4e-10 + 1.3674e-8 + 1.119e-12 + 1.159e-11, rel=1e-3)


@pytest.mark.parametrize("s,d", [(-1.0, -0.5), (-1.00015419, 1e-6), (0.25, -0.125), (-3.0, 2.0)])
def test_certificate_has_unit_slope(s, d):
    inp = paper_input()
    a, b = certify(inp, s), certify(inp, s + d)
    F = sum(Fraction(t) for t in (RM_BLOCK, a.e1, a.e2, a.e3, a.ace_tail))
    # each total is the upward rounding of (sum value + the same fixed part)
    for rep, v in ((a, s), (b, s + d)):
        t = rep.total_upper_bound
        assert Fraction(t) >= Fraction(v) + F > Fraction(math.nextafter(t, -math.inf))
    # s + d is itself rounded; the slope is measured against the inputs actually passed
    d_exact = float(Fraction(s + d) - Fraction(s))
    ulp = math.ulp(max(abs(a.total_upper_bound), abs(b.total_upper_bound)))
    assert abs((b.total_upper_bound - a.total_upper_bound) - d_exact) <= 2 * ulp


def test_consistency_checks():
    inp = paper_input(T_sum=4e9)
    p = KernelParams(280.0, 2.8e-8)
    ok = WeightedZeroSum(-1.0, 4e9, inp.omega_f, p, 1e-12, 5)
    assert certify(inp, ok).sum_source == "computed"
    with pytest.raises(ConsistencyError):
        certify(inp, WeightedZeroSum(-1.0, 4e9, 495.7, p, 1e-12))
    with pytest.raises(ConsistencyError):
        certify(inp, WeightedZeroSum(-1.0, 3e9, inp.omega_f, p, 1e-12))
    with pytest.raises(ConsistencyError):
        certify(inp, WeightedZeroSum(-1.0, 4e9, inp.omega_f, KernelParams(30.0, 2.8e-8), 1e-12))


# ---------------------------------------------------------------------------
# propagation


def test_paper_interval():
    inp = paper_input()
    reg = propagate_interval(certify(inp, -1.00015419), inp)
    assert reg.x_lo == Decimal("495.702833109")
    assert reg.x_hi == Decimal("495.702833165")
    assert reg.x_hi - reg.x_lo == 2 * Decimal("2.8e-8")
    assert reg.margin == Decimal("0.00015")
    assert reg.persistence_log >= 239.046541
    assert reg.persistence_log <= float(reg.x_hi)


def test_closed_form_interval():
    inp = CertificationInput("300", "1e-8", 280.0, 1e11, 0.4)
    reg = propagate_interval(certify(inp, -2.0), inp, margin="1e-4")
    assert (reg.x_lo, reg.x_hi) == (Decimal("299.99999999"), Decimal("300.00000001"))
    with mp.workdps(40):
        ref = mp.log(mp.mpf("1e-4")) + (mp.mpf(300) - mp.mpf("1e-8")) / 2
    assert reg.persistence_log <= float(ref)
    assert reg.persistence_log == pytest.approx(float(ref), rel=1e-15)


def test_propagation_errors():
    inp = paper_input()
    with pytest.raises(VerdictError):
        propagate_interval(certify(inp, 0.0), inp)
    with pytest.raises(VerdictError):
        propagate_interval(certify(inp, -2.0), inp, margin=0)


def test_clean_margin():
    assert clean_margin(-0.000154176) == Decimal("0.00015")
    assert clean_margin(-0.5) == Decimal("0.49")
    assert clean_margin(0.0) == 0


def test_report_json():
    inp = paper_input()
    rep = certify(inp, -1.00015419)
    reg = propagate_interval(rep, inp)
    text = report_json(rep, reg)
    doc = json.loads(text)
    assert doc["schema"] == SCHEMA == "mh-report-v1"
    assert doc["verdict"] == "negative-certified"
    assert doc["unverified_input"] is True
    for k in ("zero_sum", "e1", "e2", "e3", "ace_tail", "rm_term", "total_upper_bound"):
        assert doc[k] == getattr(rep, k)  # 17 digits round-trip exactly
    assert doc["input"]["omega"] == "495.702833137"
    assert Decimal(str(doc["sign_region"]["log_x_lo"])) == Decimal("495.702833109")
    assert report_json(rep, reg) == text
