"""Additive walk ``S``, perturbed points ``S_k + eta_{k+1}`` and their counting functions.

A :class:`WalkPath` materializes steps in fixed-size blocks from its own
random stream, so the realized path depends only on ``(source, seed)`` and
never on the order or size of :meth:`WalkPath.extend` calls.

Counting queries at a deterministic point ``x`` use ``<= x`` with a relative
slack of ``TIE_RTOL``: lattice laws such as ``det:0.5`` put points exactly on
query values like ``log 8`` and accumulated rounding in ``S_k`` must not
decide those ties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .laws import StepLaw, WLaw, parse_law, parse_step_law, sample_xi_eta
from .seeding import WALK, stream

TIE_RTOL = 1e-12
BLOCK = 1024
MAX_STEPS = 10**9


class HorizonError(ValueError):
    """Query beyond the materialized horizon of a path."""


class WalkModeError(TypeError):
    """Sieve-only query on a generic walk."""


class WalkError(RuntimeError):
    """The walk failed to progress (step cap reached or a nonpositive step)."""


def tie(x):
    """Query point with the relative slack used for ``<=`` comparisons."""
    return x + TIE_RTOL * np.maximum(1.0, np.abs(x))


@dataclass(frozen=True)
class SieveSource:
    """Steps ``xi = -log W`` and perturbations ``eta = -log(1 - W)`` from one ``W``."""

    law: WLaw

    sieve = True

    def draw(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        return sample_xi_eta(self.law, rng, size)

    @property
    def name(self) -> str:
        return self.law.name


@dataclass(frozen=True)
class GenericSource:
    """Independent steps ``xi`` and perturbations ``eta``.

    Each block draws all of its ``xi`` values, then all of its ``eta`` values,
    from the path stream; ``xi_k`` and ``eta_k`` are therefore independent.
    Dependent pairs are available through :class:`SieveSource` only.
    """

    xi: StepLaw
    eta: StepLaw = StepLaw("zero")

    sieve = False

    def draw(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        return self.xi.sample(rng, size), self.eta.sample(rng, size)

    @property
    def name(self) -> str:
        return f"xi={self.xi.name};eta={self.eta.name}"


def make_source(spec) -> SieveSource | GenericSource:
    """A source from a W-law, a step law (renewal walk, ``eta = 0``) or an ``(xi, eta)`` pair."""
    if isinstance(spec, (SieveSource, GenericSource)):
        return spec
    if isinstance(spec, WLaw):
        return SieveSource(spec)
    if isinstance(spec, StepLaw):
        return GenericSource(spec)
    if isinstance(spec, tuple):
        return GenericSource(parse_step_law(spec[0]), parse_step_law(spec[1]))
    return SieveSource(parse_law(spec))


class WalkPath:
    """One realization of the walk, lazily extendable to any horizon.

    Parameters
    ----------
    source
        :class:`SieveSource`, :class:`GenericSource`, or anything
        :func:`make_source` accepts.
    seed
        Replicate seed; the path uses stream ``WALK`` of it.
    """

    def __init__(self, source, seed: int, *, block: int = BLOCK, max_steps: int = MAX_STEPS):
        self.source = make_source(source)
        self.seed = seed
        self.block = block
        self.max_steps = max_steps
        self._rng = stream(seed, WALK)
        self._pos = np.zeros(block + 1)
        self._xi = np.zeros(block + 1)
        self._eta = np.zeros(block + 1)
        self._len = 1  # S_0 = 0 only
        self._sorted = None
        self._sorted_len = -1
        self.horizon = 0.0
        self.extend(0.0)

    # -- materialization ---------------------------------------------------

    def _grow(self) -> None:
        if self._len + self.block > self.max_steps:
            raise WalkError(f"walk exceeded the step cap of {self.max_steps} steps")
        xi, eta = self.source.draw(self._rng, self.block)
        if not np.all(xi > 0):
            raise WalkError("nonpositive step drawn; xi must be strictly positive")
        need = self._len + self.block
        if need > self._pos.shape[0]:
            cap = max(need, 2 * self._pos.shape[0])
            for name in ("_pos", "_xi", "_eta"):
                old = getattr(self, name)
                new = np.zeros(cap)
                new[: self._len] = old[: self._len]
                setattr(self, name, new)
        lo = self._len
        # sequential accumulation from S_last: identical to one global cumsum
        self._pos[lo : need] = np.cumsum(np.concatenate(([self._pos[lo - 1]], xi)))[1:]
        # xi_{k+1}, eta_{k+1} stored at index k
        self._xi[lo - 1 : need - 1] = xi
        self._eta[lo - 1 : need - 1] = eta
        self._len = need

    def extend(self, horizon: float) -> "WalkPath":
        """Materialize until the last position exceeds ``horizon``; returns ``self``."""
        if not math.isfinite(horizon):
            raise WalkError(f"cannot extend to non-finite horizon {horizon}")
        while self._pos[self._len - 1] <= tie(horizon):
            self._grow()
        self.horizon = max(self.horizon, float(horizon))
        return self

    # -- views ---------------------------------------------------------------

    @property
    def positions(self) -> np.ndarray:
        """``S_0, ..., S_L`` with ``S_L`` beyond the horizon."""
        v = self._pos[: self._len]
        v.flags.writeable = False
        return v

    @property
    def steps(self) -> np.ndarray:
        """``xi_1, ..., xi_L``."""
        return self._xi[: self._len - 1]

    @property
    def perturbations(self) -> np.ndarray:
        """``eta_1, ..., eta_L`` (``eta_{k+1}`` pairs with ``S_k``)."""
        return self._eta[: self._len - 1]

    @property
    def perturbed(self) -> np.ndarray:
        """``S_k + eta_{k+1}`` for ``k = 0 .. L-1``, in walk order (not sorted)."""
        return self._pos[: self._len - 1] + self._eta[: self._len - 1]

    def _sorted_perturbed(self) -> np.ndarray:
        if self._sorted_len != self._len:
            self._sorted = np.sort(self.perturbed)
            self._sorted_len = self._len
        return self._sorted

    @property
    def steps_materialized(self) -> int:
        return self._len - 1

    # -- counts --------------------------------------------------------------

    def _check(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr < 0):
            raise ValueError("counting functions take x >= 0")
        if np.any(arr > self.horizon):
            raise HorizonError(f"horizon exceeded: x={np.max(arr)!r} > {self.horizon!r}")
        return arr

    def nu(self, x):
        """``nu(x) = #{k >= 0 : S_k <= x}``."""
        arr = self._check(x)
        out = np.searchsorted(self.positions, tie(arr), side="right")
        return int(out) if out.ndim == 0 else out

    def n_count(self, x):
        """``N(x) = #{k >= 0 : S_k + eta_{k+1} <= x}``."""
        arr = self._check(x)
        out = np.searchsorted(self._sorted_perturbed(), tie(arr), side="right")
        return int(out) if out.ndim == 0 else out

    def rho_star(self, x):
        """Number of boxes with frequency at least ``1/x``, as ``N(log x)``."""
        if not self.source.sieve:
            raise WalkModeError("rho_star needs a sieve-mode path")
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr < 1):
            raise ValueError("rho_star takes x >= 1")
        return self.n_count(np.log(arr) if arr.ndim else math.log(float(arr)))

    def increment_window(self, x: float, delta: float, renewal: bool = False) -> int:
        """``N(x) - N(x - delta)``, or ``nu(x) - nu(x - delta)`` with ``renewal=True``."""
        if not 0 < delta <= x:
            raise ValueError("increment_window needs 0 < delta <= x")
        count = self.nu if renewal else self.n_count
        return count(x) - count(x - delta)

    def log_frequencies(self) -> np.ndarray:
        """``log p*_k = -(S_{k-1} + eta_k)`` for the materialized boxes ``k = 1 .. L``."""
        if not self.source.sieve:
            raise WalkModeError("box frequencies exist only in sieve mode")
        return -self.perturbed
