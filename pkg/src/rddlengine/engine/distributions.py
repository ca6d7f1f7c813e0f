"""Samplers for every supported distribution family.

Draw accounting (uniforms consumed per sample) is fixed so that one seed
gives the same stream everywhere:

* Normal: Box-Muller, exactly 2 uniforms; the second variate is discarded.
* Gamma: Marsaglia-Tsang; every attempt consumes 3 uniforms (2 for the
  normal, 1 for the acceptance test) even when the candidate is rejected
  early; shape < 1 adds one more uniform for the power boost.
* Binomial: n <= 64 sums n Bernoulli draws; larger n uses one uniform and
  an inverse-CDF search.
* Poisson, Discrete, Bernoulli, Uniform, Exponential: one uniform.

Normal and MultivariateNormal take a variance/covariance, as RDDL does.
Exponential takes a scale (mean).  Student takes degrees of freedom only.
"""
from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np

from ..errors import SamplingError
from .rng import RandomSource

PROB_TOL = 1e-9
_TWO_PI = 2.0 * math.pi


def _fail(family: str, message: str, value) -> SamplingError:
    return SamplingError(f"{family}: {message} (got {value!r})")


def _real(family: str, x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise _fail(family, "numeric parameter required", x)
    x = float(x)
    if not math.isfinite(x):
        raise _fail(family, "parameter must be finite", x)
    return x


def bernoulli(rng: RandomSource, p) -> bool:
    p = _real("Bernoulli", p)
    if not 0.0 <= p <= 1.0:
        raise _fail("Bernoulli", "probability outside [0, 1]", p)
    return rng.uniform() < p


def standard_normal(rng: RandomSource) -> float:
    u1 = rng.uniform_pos()
    u2 = rng.uniform()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


def normal(rng: RandomSource, mean, var) -> float:
    mean = _real("Normal", mean)
    var = _real("Normal", var)
    if var < 0.0:
        raise _fail("Normal", "variance must be non-negative", var)
    return mean + math.sqrt(var) * standard_normal(rng)


def uniform(rng: RandomSource, low, high) -> float:
    low = _real("Uniform", low)
    high = _real("Uniform", high)
    if low > high:
        raise _fail("Uniform", "lower bound exceeds upper bound", (low, high))
    return low + (high - low) * rng.uniform()


def exponential(rng: RandomSource, scale) -> float:
    scale = _real("Exponential", scale)
    if scale <= 0.0:
        raise _fail("Exponential", "scale must be positive", scale)
    return -scale * math.log(rng.uniform_pos())


def gamma(rng: RandomSource, shape, scale, family: str = "Gamma") -> float:
    shape = _real(family, shape)
    scale = _real(family, scale)
    if shape <= 0.0:
        raise _fail(family, "shape must be positive", shape)
    if scale <= 0.0:
        raise _fail(family, "scale must be positive", scale)
    boost = 1.0
    if shape < 1.0:
        boost = rng.uniform_pos() ** (1.0 / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        z = standard_normal(rng)
        u = rng.uniform_pos()
        v = 1.0 + c * z
        if v <= 0.0:
            continue
        v = v * v * v
        if math.log(u) < 0.5 * z * z + d - d * v + d * math.log(v):
            return d * v * scale * boost


def beta(rng: RandomSource, a, b) -> float:
    x = gamma(rng, a, 1.0, "Beta")
    y = gamma(rng, b, 1.0, "Beta")
    return x / (x + y)


def student(rng: RandomSource, df) -> float:
    df = _real("Student", df)
    if df <= 0.0:
        raise _fail("Student", "degrees of freedom must be positive", df)
    z = standard_normal(rng)
    chi2 = gamma(rng, df / 2.0, 2.0, "Student")
    return z / math.sqrt(chi2 / df)


def poisson(rng: RandomSource, rate) -> int:
    rate = _real("Poisson", rate)
    if rate < 0.0:
        raise _fail("Poisson", "rate must be non-negative", rate)
    u = rng.uniform()
    if rate == 0.0:
        return 0
    log_rate = math.log(rate)
    log_p = -rate
    cdf = math.exp(log_p)
    k = 0
    limit = rate + 40.0 * math.sqrt(rate) + 100.0
    while cdf <= u and k < limit:
        k += 1
        log_p += log_rate - math.log(k)
        cdf += math.exp(log_p)
    return k


def binomial(rng: RandomSource, n, p) -> int:
    if isinstance(n, bool) or not isinstance(n, int):
        raise _fail("Binomial", "trial count must be an integer", n)
    if n < 0:
        raise _fail("Binomial", "trial count must be non-negative", n)
    p = _real("Binomial", p)
    if not 0.0 <= p <= 1.0:
        raise _fail("Binomial", "probability outside [0, 1]", p)
    if n <= 64:
        return sum(1 for _ in range(n) if rng.uniform() < p)
    u = rng.uniform()
    if p == 0.0:
        return 0
    if p == 1.0:
        return n
    log_p, log_q = math.log(p), math.log1p(-p)
    base = math.lgamma(n + 1)
    cdf = 0.0
    for k in range(n + 1):
        cdf += math.exp(base - math.lgamma(k + 1) - math.lgamma(n - k + 1)
                        + k * log_p + (n - k) * log_q)
        if cdf > u:
            return k
    return n


def normalized(family: str, probs: Sequence) -> List[float]:
    values = [_real(family, p) for p in probs]
    for p in values:
        if p < -PROB_TOL:
            raise _fail(family, "negative probability", p)
    total = math.fsum(values)
    if abs(total - 1.0) > PROB_TOL:
        raise _fail(family, "probabilities must sum to 1", total)
    return [max(p, 0.0) / total for p in values]


def discrete_index(rng: RandomSource, probs: Sequence, family: str = "Discrete") -> int:
    probs = normalized(family, probs)
    u = rng.uniform()
    cdf = 0.0
    for i, p in enumerate(probs):
        cdf += p
        if u < cdf:
            return i
    # u landed in the rounding gap above the last partial sum
    return max(i for i, p in enumerate(probs) if p > 0.0)


def dirichlet(rng: RandomSource, alpha: Sequence) -> List[float]:
    alpha = [_real("Dirichlet", a) for a in alpha]
    for a in alpha:
        if a <= 0.0:
            raise _fail("Dirichlet", "concentration must be positive", a)
    draws = [gamma(rng, a, 1.0, "Dirichlet") for a in alpha]
    total = math.fsum(draws)
    return [g / total for g in draws]


def multinomial(rng: RandomSource, trials, probs: Sequence) -> List[int]:
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 0:
        raise _fail("Multinomial", "trial count must be a non-negative integer", trials)
    probs = normalized("Multinomial", probs)
    counts = []
    remaining = trials
    mass = 1.0
    for p in probs[:-1]:
        if remaining == 0 or mass <= 0.0:
            counts.append(0)
            continue
        q = min(1.0, max(0.0, p / mass))
        k = binomial(rng, remaining, q)
        counts.append(k)
        remaining -= k
        mass -= p
    counts.append(remaining)
    return counts


def multivariate_normal(rng: RandomSource, mean: Sequence, cov) -> List[float]:
    mean = np.array([_real("MultivariateNormal", m) for m in mean])
    cov = np.array([[_real("MultivariateNormal", c) for c in row] for row in cov])
    n = len(mean)
    if cov.shape != (n, n):
        raise _fail("MultivariateNormal", "covariance shape mismatch", cov.shape)
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
        raise _fail("MultivariateNormal", "covariance must be symmetric", cov.tolist())
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        # positive semi-definite: fall back to a symmetric square root
        w, v = np.linalg.eigh(cov)
        if w.min() < -1e-10:
            raise _fail("MultivariateNormal", "covariance is not positive "
                        "semi-definite", float(w.min())) from None
        factor = v * np.sqrt(np.clip(w, 0.0, None))
    z = np.array([standard_normal(rng) for _ in range(n)])
    return [float(x) for x in mean + factor @ z]


SCALAR_SAMPLERS = {
    "Bernoulli": bernoulli,
    "Normal": normal,
    "Uniform": uniform,
    "Exponential": exponential,
    "Gamma": gamma,
    "Beta": beta,
    "Student": student,
    "Poisson": poisson,
    "Binomial": binomial,
}


def sample(family: str, params: Sequence, rng: RandomSource):
    """Draw once from a scalar family given already-evaluated parameters."""
    if family == "KronDelta":
        return params[0]
    if family == "DiracDelta":
        return _real("DiracDelta", params[0])
    sampler = SCALAR_SAMPLERS.get(family)
    if sampler is None:
        raise SamplingError(f"unknown distribution family {family!r}")
    return sampler(rng, *params)
