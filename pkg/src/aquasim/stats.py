"""Welch's two-sample t-test with a self-contained Student-t distribution.

The t CDF is evaluated through the regularized incomplete beta function,

    P(T <= t) = 1 - I_x(df/2, 1/2) / 2,   x = df / (df + t^2),   t >= 0,

with I_x computed by its continued fraction (modified Lentz).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

MAX_ITER = 200
EPS = 1e-14
_TINY = 1e-300


class InsufficientDataError(ValueError):
    pass


class DomainError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


def mean_and_variance(values) -> tuple[float, float]:
    """Sample mean and unbiased (n - 1) variance, two-pass with exact summation."""
    xs = [float(v) for v in values]
    n = len(xs)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 values, got {n}")
    if not all(math.isfinite(x) for x in xs):
        raise ValueError("non-finite value in sample")
    mean = math.fsum(xs) / n
    dev = [x - mean for x in xs]
    # the second term corrects the rounding error left in ``mean``
    ss = math.fsum(d * d for d in dev) - math.fsum(dev) ** 2 / n
    return mean, max(ss, 0.0) / (n - 1)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz. Converges for x < (a+1)/(a+b+2)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise ConvergenceError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, xc: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``xc`` may pass ``1 - x`` when the caller knows it more accurately than the
    subtraction would give.
    """
    if xc is None:
        xc = 1.0 - x
    if not (0.0 <= x <= 1.0) or a <= 0 or b <= 0:
        raise DomainError(f"betainc domain: a={a}, b={b}, x={x}")
    if x == 0.0:
        return 0.0
    if xc == 0.0:
        return 1.0
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    log_front = a * math.log(x) + b * math.log(xc) - lbeta
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, xc) / b


def _tail_mass(t: float, df: float) -> float:
    """Two-sided tail mass P(|T| >= |t|) = I_x(df/2, 1/2)."""
    t2 = t * t
    denom = df + t2
    return betainc(df / 2.0, 0.5, df / denom, t2 / denom)


def student_t_cdf(t: float, df: float) -> float:
    if not df > 0:
        raise DomainError(f"df must be positive, got {df}")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    half = 0.5 * _tail_mass(t, df)
    return 1.0 - half if t >= 0 else half


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    df: float
    p_value: float
    mean_a: float
    mean_b: float
    n_a: int
    n_b: int
    degenerate: bool = False

    def to_json(self, metric: str) -> dict:
        out = {"metric": metric}
        out.update(asdict(self))
        if not math.isfinite(out["t_statistic"]):
            out["t_statistic"] = None
        if not out["degenerate"]:
            del out["degenerate"]
        return out


def welch_t(a, b, *, pooled: bool = False) -> TTestResult:
    """Two-sample t-test, two-sided.

    Welch's unequal-variance form by default; ``pooled=True`` gives Student's
    equal-variance test. Two zero-variance samples are reported with
    ``degenerate=True``: t = 0, p = 1 when the means agree, otherwise
    t = +/-inf, p = 0.
    """
    na, nb = len(a), len(b)
    mean_a, va = mean_and_variance(a)
    mean_b, vb = mean_and_variance(b)
    diff = mean_a - mean_b

    if va / na + vb / nb == 0.0:
        df = float(na + nb - 2)
        if diff == 0.0:
            return TTestResult(0.0, df, 1.0, mean_a, mean_b, na, nb, degenerate=True)
        return TTestResult(math.copysign(math.inf, diff), df, 0.0,
                           mean_a, mean_b, na, nb, degenerate=True)

    if pooled:
        df = float(na + nb - 2)
        sp2 = ((na - 1) * va + (nb - 1) * vb) / df
        se2 = sp2 * (1.0 / na + 1.0 / nb)
    else:
        qa, qb = va / na, vb / nb
        se2 = qa + qb
        # Welch-Satterthwaite on ratios so tiny variances cannot underflow to 0/0
        ra, rb = qa / max(qa, qb), qb / max(qa, qb)
        df = (ra + rb) ** 2 / (ra * ra / (na - 1) + rb * rb / (nb - 1))
    t = diff / math.sqrt(se2)
    p = 1.0 if t == 0.0 else min(1.0, max(0.0, _tail_mass(t, df)))
    return TTestResult(t, df, p, mean_a, mean_b, na, nb)


def rankdata(values) -> list[float]:
    """Average ranks (1-based), ties share the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation (Pearson correlation of average ranks)."""
    if len(x) != len(y) or len(x) < 2:
        raise InsufficientDataError("spearman needs two equal-length samples of size >= 2")
    rx, ry = rankdata(list(x)), rankdata(list(y))
    mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
    sxy = sum((p - mx) * (q - my) for p, q in zip(rx, ry))
    sxx = sum((p - mx) ** 2 for p in rx)
    syy = sum((q - my) ** 2 for q in ry)
    if sxx == 0 or syy == 0:
        return math.nan
    return sxy / math.sqrt(sxx * syy)
