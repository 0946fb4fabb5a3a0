"""Stick-breaking factor laws and the analytic constants built from them.

A :class:`WLaw` describes the distribution of the factor ``W`` on (0, 1).
The sieve walk uses ``xi = -log W`` as step and ``eta = -log(1 - W)`` as
perturbation; :func:`moment_profile` returns the constants

* ``mu = E xi``, ``sigma2 = Var xi``,
* ``m_eta = E eta`` and ``E eta**a``,

and :func:`centering` gives ``mu**-1 * int_0^n P{eta <= y} dy``.

:class:`StepLaw` covers the generic (non-sieve) positive variables used to
drive renewal and perturbed walks directly, e.g. ``exp:1`` or ``const:1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special

__all__ = [
    "QuadratureError",
    "LawSpecError",
    "IneligibleLawError",
    "WLaw",
    "StepLaw",
    "MomentProfile",
    "parse_law",
    "parse_step_law",
    "quad",
    "sample_w",
    "sample_xi_eta",
    "moment_profile",
    "step_profile",
    "eta_cdf",
    "centering",
    "scales",
]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance."""


class LawSpecError(ValueError):
    """Malformed or out-of-range law specification."""


class IneligibleLawError(ValueError):
    """The law has zero step variance, so CLT/LIL scales are undefined."""


# ---------------------------------------------------------------------------
# quadrature


def quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    name: str = "integral",
    abs_tol: float = 1e-13,
    rel_tol: float = 1e-11,
) -> float:
    """``int_a^b f`` by QUADPACK (endpoint power singularities are fine).

    Raises :class:`QuadratureError` naming ``name`` when QUADPACK flags a
    problem and its error estimate is far above the requested tolerance.
    """
    if b == a:
        return 0.0
    out = integrate.quad(f, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=400, full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3 and err > 1e3 * max(abs_tol, rel_tol * abs(value)):
        msg = out[3].strip().splitlines()[0] if isinstance(out[3], str) else "no convergence"
        raise QuadratureError(f"{name}: {msg} on [{a:.6g}, {b:.6g}] (error estimate {err:.3g})")
    return value


def _tail_cutoff(sf: Callable[[float], float], level: float = 1e-17) -> float:
    """Smallest power-of-two ``y`` with ``sf(y) < level``."""
    y = 1.0
    while sf(y) >= level:
        y *= 2.0
        if y > 1e6:
            raise QuadratureError("tail cutoff: survival function does not decay")
    return y


def _integrate_halfline(
    g: Callable[[float], float], cutoff: float, rel_tol: float, name: str
) -> float:
    """Integrate ``g`` over ``[0, cutoff]`` split at 0, 1, 2, 4, ... ."""
    edges = [0.0, 1.0]
    while edges[-1] < cutoff:
        edges.append(edges[-1] * 2.0)
    return math.fsum(quad(g, lo, hi, name, 1e-15, rel_tol) for lo, hi in zip(edges[:-1], edges[1:]))


# ---------------------------------------------------------------------------
# law types

_KINDS = ("uniform", "beta", "twopoint", "det")


@dataclass(frozen=True)
class WLaw:
    """Distribution of the stick-breaking factor ``W`` on the open interval (0, 1).

    ``kind`` is one of ``uniform``, ``beta`` (params ``alpha, beta``),
    ``twopoint`` (params ``w1, w2, q`` with ``P{W = w1} = q``) and ``det``
    (param ``w``).
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise LawSpecError(f"unknown W-law kind {self.kind!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        need = {"uniform": 0, "beta": 2, "twopoint": 3, "det": 1}[self.kind]
        if len(p) != need:
            raise LawSpecError(f"{self.kind} takes {need} parameter(s), got {len(p)}")
        if not all(math.isfinite(v) for v in p):
            raise LawSpecError(f"non-finite parameter in {self.kind}{p}")
        if self.kind == "beta" and min(p) <= 0:
            raise LawSpecError("beta parameters must be positive")
        if self.kind == "twopoint":
            w1, w2, q = p
            if not (0 < w1 < 1 and 0 < w2 < 1 and 0 <= q <= 1):
                raise LawSpecError("twopoint needs w1, w2 in (0,1) and q in [0,1]")
        if self.kind == "det" and not 0 < p[0] < 1:
            raise LawSpecError("det needs w in (0,1)")

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + ":" + ",".join(repr(v) for v in self.params)

    def __str__(self) -> str:
        return self.name

    @property
    def lil_eligible(self) -> bool:
        """False exactly when ``Var |log W| = 0``."""
        if self.kind == "det":
            return False
        if self.kind == "twopoint":
            w1, w2, q = self.params
            return 0.0 < q < 1.0 and w1 != w2
        return True

    # atoms of W as (value, probability); None for continuous laws
    def atoms(self) -> list[tuple[float, float]] | None:
        if self.kind == "det":
            return [(self.params[0], 1.0)]
        if self.kind == "twopoint":
            w1, w2, q = self.params
            return [(w1, q), (w2, 1.0 - q)]
        return None

    # survival functions of xi = -log W and eta = -log(1 - W)
    def xi_sf(self, s: float) -> float:
        if s < 0:
            return 1.0
        atoms = self.atoms()
        if atoms is not None:
            return sum(pr for w, pr in atoms if -math.log(w) > s)
        w = math.exp(-s)
        if self.kind == "uniform":
            return w
        alpha, beta = self.params
        return float(special.betainc(alpha, beta, w))

    def eta_sf(self, s: float) -> float:
        if s < 0:
            return 1.0
        atoms = self.atoms()
        if atoms is not None:
            return sum(pr for w, pr in atoms if -math.log1p(-w) > s)
        v = math.exp(-s)  # P{1 - W < v}
        if self.kind == "uniform":
            return v
        alpha, beta = self.params
        return float(special.betainc(beta, alpha, v))


def parse_law(spec: str | WLaw) -> WLaw:
    """Parse ``uniform``, ``beta:2.0,3.0``, ``twopoint:0.3,0.7,0.5`` or ``det:0.5``."""
    if isinstance(spec, WLaw):
        return spec
    text = spec.strip().lower()
    kind, _, rest = text.partition(":")
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest else ()
    except ValueError:
        raise LawSpecError(f"cannot parse law parameters in {spec!r}") from None
    return WLaw(kind, params)


_STEP_KINDS = {"exp": 1, "const": 1, "gamma": 2, "unif": 2, "zero": 0}


@dataclass(frozen=True)
class StepLaw:
    """A nonnegative step or perturbation law for generic walks.

    ``exp:rate``, ``const:c``, ``gamma:shape,scale``, ``unif:a,b``, ``zero``.
    ``zero`` is only meaningful as a perturbation (it turns ``N`` into ``nu``).
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _STEP_KINDS:
            raise LawSpecError(f"unknown step law kind {self.kind!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if len(p) != _STEP_KINDS[self.kind]:
            raise LawSpecError(f"{self.kind} takes {_STEP_KINDS[self.kind]} parameter(s)")
        if self.kind in ("exp", "const", "gamma") and min(p) <= 0:
            raise LawSpecError(f"{self.kind} parameters must be positive")
        if self.kind == "unif" and not 0 <= p[0] < p[1]:
            raise LawSpecError("unif needs 0 <= a < b")

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + ":" + ",".join(repr(v) for v in self.params)

    def __str__(self) -> str:
        return self.name

    @property
    def mean(self) -> float:
        k, p = self.kind, self.params
        if k == "exp":
            return 1.0 / p[0]
        if k == "const":
            return p[0]
        if k == "gamma":
            return p[0] * p[1]
        if k == "unif":
            return 0.5 * (p[0] + p[1])
        return 0.0

    @property
    def var(self) -> float:
        k, p = self.kind, self.params
        if k == "exp":
            return 1.0 / p[0] ** 2
        if k == "gamma":
            return p[0] * p[1] ** 2
        if k == "unif":
            return (p[1] - p[0]) ** 2 / 12.0
        return 0.0

    def moment(self, a: float) -> float:
        k, p = self.kind, self.params
        if k == "exp":
            return math.gamma(a + 1.0) / p[0] ** a
        if k == "const":
            return p[0] ** a
        if k == "gamma":
            return math.exp(math.lgamma(p[0] + a) - math.lgamma(p[0])) * p[1] ** a
        if k == "unif":
            lo, hi = p
            return (hi ** (a + 1) - lo ** (a + 1)) / ((a + 1) * (hi - lo))
        return 0.0

    def cdf(self, y: float) -> float:
        k, p = self.kind, self.params
        if y < 0:
            return 0.0
        if k == "exp":
            return -math.expm1(-p[0] * y)
        if k == "const":
            return 1.0 if y >= p[0] else 0.0
        if k == "gamma":
            return float(special.gammainc(p[0], y / p[1]))
        if k == "unif":
            return min(1.0, max(0.0, (y - p[0]) / (p[1] - p[0])))
        return 1.0

    def integrated_cdf(self, n: float) -> float:
        """``int_0^n P{X <= y} dy``."""
        k, p = self.kind, self.params
        if n <= 0:
            return 0.0
        if k == "exp":
            r = p[0]
            return n + math.expm1(-r * n) / r
        if k == "const":
            return max(0.0, n - p[0])
        if k == "unif":
            lo, hi = p
            if n <= lo:
                return 0.0
            if n >= hi:
                return n - 0.5 * (lo + hi)
            return 0.5 * (n - lo) ** 2 / (hi - lo)
        if k == "zero":
            return n
        # gamma(k, scale): n F(n) - E[X; X <= n]
        shape, scale = p
        x = n / scale
        return n * float(special.gammainc(shape, x)) - shape * scale * float(special.gammainc(shape + 1.0, x))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        k, p = self.kind, self.params
        if k == "exp":
            return rng.standard_exponential(size) / p[0]
        if k == "const":
            return np.full(size, p[0])
        if k == "gamma":
            return rng.gamma(p[0], p[1], size)
        if k == "unif":
            return rng.uniform(p[0], p[1], size)
        return np.zeros(size)


def parse_step_law(spec: str | StepLaw) -> StepLaw:
    """Parse ``exp:1``, ``const:1``, ``gamma:2,0.5``, ``unif:0.5,1.5`` or ``zero``."""
    if isinstance(spec, StepLaw):
        return spec
    kind, _, rest = spec.strip().lower().partition(":")
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest else ()
    except ValueError:
        raise LawSpecError(f"cannot parse step law parameters in {spec!r}") from None
    return StepLaw(kind, params)


# ---------------------------------------------------------------------------
# sampling

_TINY = np.nextafter(0.0, 1.0)
_ONE_MINUS = np.nextafter(1.0, 0.0)


def _open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    # (k + 1/2) / 2**53 never hits 0 or 1
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k.astype(np.float64) + 0.5) * 2.0**-53


def sample_w(law: WLaw, rng: np.random.Generator, size: int | None = None):
    """Draw ``W`` from ``law``; a scalar when ``size`` is None."""
    n = 1 if size is None else size
    if law.kind == "uniform":
        w = _open_uniform(rng, n)
    elif law.kind == "beta":
        w = np.clip(rng.beta(law.params[0], law.params[1], n), _TINY, _ONE_MINUS)
    elif law.kind == "det":
        w = np.full(n, law.params[0])
    else:
        w1, w2, q = law.params
        w = np.where(rng.random(n) < q, w1, w2)
    return float(w[0]) if size is None else w


def sample_xi_eta(law: WLaw, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` pairs ``(xi, eta) = (-log W, -log(1 - W))`` from one ``W`` each."""
    w = sample_w(law, rng, size)
    return -np.log(w), -np.log1p(-w)


# ---------------------------------------------------------------------------
# constants


class MomentProfile(NamedTuple):
    mu: float
    sigma2: float
    m_eta: float
    eta_moment_a: float


@lru_cache(maxsize=256)
def moment_profile(law: WLaw, a: float = 1.0, method: str = "auto") -> MomentProfile:
    """Constants ``E xi``, ``Var xi``, ``E eta`` and ``E eta**a`` of ``law``.

    ``method="quad"`` forces the quadrature route even where a closed form is
    known (used to cross-check the two).
    """
    if a <= 0:
        raise ValueError("moment order a must be positive")
    atoms = law.atoms()
    if atoms is not None:
        mu = sum(pr * -math.log(w) for w, pr in atoms)
        m2 = sum(pr * math.log(w) ** 2 for w, pr in atoms)
        m_eta = sum(pr * -math.log1p(-w) for w, pr in atoms)
        eta_a = sum(pr * (-math.log1p(-w)) ** a for w, pr in atoms)
        return MomentProfile(mu, max(0.0, m2 - mu * mu), m_eta, eta_a)

    if method == "auto" and law.kind == "uniform":
        return MomentProfile(1.0, 1.0, 1.0, math.gamma(a + 1.0))

    closed_xi = method == "auto" and law.kind == "beta" and law.params[1] == 1.0
    if closed_xi:
        theta = law.params[0]
        mu, sigma2 = 1.0 / theta, 1.0 / theta**2
    else:
        cut = _tail_cutoff(law.xi_sf)
        mu = _integrate_halfline(law.xi_sf, cut, 1e-11, f"E|log W| for {law.name}")
        m2 = _integrate_halfline(
            lambda s: 2.0 * s * law.xi_sf(s), cut, 1e-11, f"E(log W)^2 for {law.name}"
        )
        sigma2 = m2 - mu * mu
    cut = _tail_cutoff(law.eta_sf)
    m_eta = _integrate_halfline(law.eta_sf, cut, 1e-11, f"E|log(1-W)| for {law.name}")
    if a == 1.0:
        eta_a = m_eta
    else:
        # E eta^a = int a s^(a-1) P{eta > s} ds; with s = v^q, q = ceil(a)/a,
        # the power of v becomes the integer ceil(a) - 1 (no endpoint singularity)
        k = math.ceil(a)
        q = k / a
        eta_a = _integrate_halfline(
            lambda v: k * v ** (k - 1) * law.eta_sf(v**q),
            cut ** (1.0 / q),
            1e-11,
            f"E|log(1-W)|^a for {law.name}",
        )
    return MomentProfile(mu, sigma2, m_eta, eta_a)


def step_profile(xi: StepLaw, eta: StepLaw | None = None, a: float = 1.0) -> MomentProfile:
    """Profile of a generic walk: ``mu``/``sigma2`` from ``xi``, eta moments from ``eta``."""
    if eta is None:
        return MomentProfile(xi.mean, xi.var, 0.0, 0.0)
    return MomentProfile(xi.mean, xi.var, eta.mean, eta.moment(a))


def eta_cdf(law: WLaw, y):
    """``P{|log(1 - W)| <= y}``; accepts scalars or arrays."""
    y = np.asarray(y, dtype=np.float64)
    v = -np.expm1(-np.maximum(y, 0.0))  # 1 - e^-y, the matching level of W
    if law.kind == "uniform":
        out = v
    elif law.kind == "beta":
        alpha, beta = law.params
        if beta == 1.0:
            out = v**alpha
        else:
            out = special.betainc(alpha, beta, v)
    else:
        out = np.zeros_like(y)
        for w, pr in law.atoms():
            out = out + pr * (y >= -math.log1p(-w))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=4096)
def _integrated_eta_sf(law: WLaw, n: float) -> float:
    """``int_0^n P{eta > y} dy``; the tail beyond the cutoff is below 1e-13 per unit."""
    cut = _tail_cutoff(law.eta_sf, 1e-13)
    hi = min(n, float(cut))
    edges = [0.0]
    step = 1.0
    while edges[-1] < hi:
        edges.append(min(hi, edges[-1] + step))
        step *= 2.0
    name = f"centering integral for {law.name}"
    return math.fsum(quad(law.eta_sf, lo, up, name, 1e-14, 1e-12) for lo, up in zip(edges[:-1], edges[1:]))


def centering(law: WLaw, n: float, method: str = "auto") -> float:
    """``mu**-1 * int_0^n P{|log(1 - W)| <= y} dy``."""
    if n < 0:
        raise ValueError("centering needs n >= 0")
    n = float(n)
    if n == 0.0:
        return 0.0
    mu = moment_profile(law).mu
    atoms = law.atoms()
    if atoms is not None:
        return sum(pr * max(0.0, n + math.log1p(-w)) for w, pr in atoms) / mu
    if method == "auto" and law.kind == "uniform":
        return n + math.expm1(-n)
    return (n - _integrated_eta_sf(law, n)) / mu


def scales(profile: MomentProfile, n: float) -> tuple[float, float]:
    """``(sqrt(sigma2 mu^-3 n), sqrt(2 sigma2 mu^-3 n log log n))`` for ``n >= 3``."""
    if not profile.sigma2 > 0:
        raise IneligibleLawError("LIL-ineligible law: Var|log W| = 0")
    if n < 3:
        raise ValueError("scales need n >= 3 so that log log n > 0")
    base = profile.sigma2 / profile.mu**3 * n
    return math.sqrt(base), math.sqrt(2.0 * base * math.log(math.log(n)))
