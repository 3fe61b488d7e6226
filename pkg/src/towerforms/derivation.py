"""The derivation into the finite Hilbert bimodule over the tower.

derive(a, n) collects the commutators of the level-n expectation of a
with every rank-one diagonal projection; the carrier is the direct sum of
2^n copies of the level-n algebra with componentwise left/right actions
and an algebra-valued inner product. The bimodule is a direct sum of
trivial bimodules by construction, which is the strong-locality witness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tower import AlgebraElement, element_to_json
from .expectations import cond_expect

__all__ = [
    "BimoduleVector",
    "derive",
    "bimodule_left",
    "bimodule_right",
    "bimodule_inner",
    "bimodule_to_json",
]


@dataclass(frozen=True, eq=False)
class BimoduleVector:
    """A sequence of 2^level elements at a common carrier level."""

    level: int
    components: tuple[AlgebraElement, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 2 ** self.level:
            raise ValueError(
                f"level-{self.level} vector needs {2 ** self.level} components, "
                f"got {len(comps)}"
            )
        carrier = comps[0].level
        if any(c.level != carrier for c in comps):
            raise ValueError("all components must live at one carrier level")
        object.__setattr__(self, "components", comps)

    @property
    def carrier_level(self) -> int:
        return self.components[0].level

    def __add__(self, other: "BimoduleVector") -> "BimoduleVector":
        self._check_compatible(other)
        return BimoduleVector(
            self.level,
            tuple(f + g for f, g in zip(self.components, other.components)),
        )

    def __sub__(self, other: "BimoduleVector") -> "BimoduleVector":
        self._check_compatible(other)
        return BimoduleVector(
            self.level,
            tuple(f - g for f, g in zip(self.components, other.components)),
        )

    def _check_compatible(self, other: "BimoduleVector") -> None:
        if self.level != other.level or self.carrier_level != other.carrier_level:
            raise ValueError(
                f"bimodule mismatch: level {self.level}/{other.level}, "
                f"carrier {self.carrier_level}/{other.carrier_level}"
            )


def derive(a: AlgebraElement, n: int) -> BimoduleVector:
    """Component j is [p_j, E_n a]; zero exactly when the level-n
    expectation of a is diagonal."""
    b = cond_expect(a, n).entries
    comps = []
    for j in range(2 ** n):
        c = np.zeros_like(b)
        c[j, :] = b[j, :]
        c[:, j] -= b[:, j]  # commutator p_j b - b p_j, row j minus column j
        comps.append(AlgebraElement(n, c))
    return BimoduleVector(n, tuple(comps))


def bimodule_left(a: AlgebraElement, f: BimoduleVector) -> BimoduleVector:
    """(a . f)(j) = a f(j)."""
    if a.level != f.carrier_level:
        raise ValueError(
            f"level mismatch: element at {a.level}, carrier at {f.carrier_level}"
        )
    return BimoduleVector(f.level, tuple(a @ c for c in f.components))


def bimodule_right(f: BimoduleVector, a: AlgebraElement) -> BimoduleVector:
    """(f . a)(j) = f(j) a."""
    if a.level != f.carrier_level:
        raise ValueError(
            f"level mismatch: element at {a.level}, carrier at {f.carrier_level}"
        )
    return BimoduleVector(f.level, tuple(c @ a for c in f.components))


def bimodule_inner(f: BimoduleVector, g: BimoduleVector) -> AlgebraElement:
    """Algebra-valued inner product sum_j f(j)* g(j); <f, f> is PSD."""
    f._check_compatible(g)
    total = None
    for cf, cg in zip(f.components, g.components):
        term = AlgebraElement(cf.level, cf.entries.conj().T @ cg.entries)
        total = term if total is None else total + term
    return total


def bimodule_to_json(f: BimoduleVector) -> list:
    return [element_to_json(c) for c in f.components]
