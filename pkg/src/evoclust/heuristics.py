"""Pluggable modulator layer for the expansion filters and reassignment cap.

Two modes ship: ``default`` carries the tuned modulators; ``identity``
switches every modulator off so the acceptance tests reduce literally to
the raw standardized-deviation and shape-gap comparisons. The default
forms were chosen to satisfy the documented behavioral constraints
(maximal blur disables the distance filter; expansion 1 is unbounded
tolerance; the reassignment reach shrinks with dimensionality) and are
all numpy-ufunc compatible so the engine can apply them to whole
candidate batches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

_EPS_EXPANSION = 1e-6

HEURISTIC_MODES = ("default", "identity")


class HeuristicDomainError(ValueError):
    """An argument fell outside its documented domain."""


def _check_unit(name: str, value: ArrayLike) -> None:
    if np.any(np.asarray(value) < 0) or np.any(np.asarray(value) > 1):
        raise HeuristicDomainError(f"{name} must lie in [0, 1]")


def _default_h1(z: ArrayLike, blur: float) -> ArrayLike:
    """Attenuate the standardized deviation linearly with blur; 0 at blur=1."""
    _check_unit("blur", blur)
    return np.asarray(z) * (1.0 - blur) if np.ndim(z) else z * (1.0 - blur)


def _default_h2(expansion: float, density: ArrayLike) -> float:
    """Map expansion [0,1) onto an unbounded tolerance; density is accepted but unused."""
    _check_unit("expansion", expansion)
    return expansion / (1.0 - expansion + _EPS_EXPANSION)


def _default_h3(gap: ArrayLike) -> ArrayLike:
    if np.any(np.asarray(gap) < 0):
        raise HeuristicDomainError("pattern gap must be nonnegative")
    return gap


def _default_h4(scale: float, dim: int) -> float:
    """Reassignment distance cap: grows with dataset extent, shrinks with dimensionality."""
    if scale <= 0:
        raise HeuristicDomainError("scale must be positive")
    if dim < 1:
        raise HeuristicDomainError("dimensionality must be a positive integer")
    return 0.1 * np.sqrt(scale) / np.sqrt(dim)


def _identity_h1(z: ArrayLike, blur: float) -> ArrayLike:
    _check_unit("blur", blur)
    return z


def _identity_h2(expansion: float, density: ArrayLike) -> float:
    _check_unit("expansion", expansion)
    return expansion


def _identity_h3(gap: ArrayLike) -> ArrayLike:
    if np.any(np.asarray(gap) < 0):
        raise HeuristicDomainError("pattern gap must be nonnegative")
    return gap


def _identity_h4(scale: float, dim: int) -> float:
    if scale <= 0:
        raise HeuristicDomainError("scale must be positive")
    if dim < 1:
        raise HeuristicDomainError("dimensionality must be a positive integer")
    return np.inf


@dataclass(frozen=True)
class HeuristicSet:
    """The four modulators plus the mode tag used in run reports."""

    h1: Callable[[ArrayLike, float], ArrayLike]
    h2: Callable[[float, ArrayLike], float]
    h3: Callable[[ArrayLike], ArrayLike]
    h4: Callable[[float, int], float]
    mode: str

    @classmethod
    def from_mode(cls, mode: str = "default") -> "HeuristicSet":
        if mode == "default":
            return cls(_default_h1, _default_h2, _default_h3, _default_h4, "default")
        if mode == "identity":
            return cls(_identity_h1, _identity_h2, _identity_h3, _identity_h4, "identity")
        raise HeuristicDomainError(f"unknown heuristics mode {mode!r}")


def apply(hset: HeuristicSet, which: str, *args) -> float:
    """Evaluate one modulator by name; thin dispatch for tests and probes."""
    try:
        fn = {"h1": hset.h1, "h2": hset.h2, "h3": hset.h3, "h4": hset.h4}[which]
    except KeyError:
        raise HeuristicDomainError(f"unknown modulator {which!r}") from None
    return fn(*args)
