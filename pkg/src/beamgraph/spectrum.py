"""Shared spectrum container for both eigenvalue solvers.

Eigenvalues are kept twice: as the flat ascending list counted with
multiplicity (``values``, 1-based indexing via ``value_at``) and as clustered
``entries``.  Indexing with multiplicity is the convention every interlacing
statement in this package uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence


@dataclass(frozen=True)
class SpectrumEntry:
    value: float
    multiplicity: int
    # per-edge coefficient 4-vectors for each eigenfunction in the eigenspace,
    # referring to the solver's per-edge solution basis; None for fem results
    coefficients: tuple | None = None


@dataclass(frozen=True)
class Spectrum:
    values: tuple                    # ascending, with multiplicity
    entries: tuple                   # clustered (value, multiplicity) records
    method: str                      # "secular" | "fem"
    meta: Mapping
    vertex_values: tuple | None = None   # per flat index: {vertex_id: phi(v)}
    vectors: tuple | None = None         # solver-specific eigenvector data
    graph: object = None

    def __len__(self) -> int:
        return len(self.values)

    def value_at(self, k: int) -> float:
        """1-based eigenvalue lookup counted with multiplicity."""
        if not 1 <= k <= len(self.values):
            raise IndexError(f"eigenvalue index {k} outside computed depth {len(self.values)}")
        return self.values[k - 1]

    def zero_multiplicity(self, tol: float | None = None) -> int:
        """Dimension of the computed eigenspace at zero."""
        if tol is None:
            scale = max([1.0] + [abs(v) for v in self.values])
            tol = 1e-7 * scale
        return sum(1 for v in self.values if abs(v) <= tol)

    def counting(self, lam: float) -> int:
        """Number of eigenvalues <= lam, ties included."""
        if self.values and lam > self.values[-1]:
            raise ValueError(
                f"counting function requested at {lam} beyond computed range "
                f"{self.values[-1]}")
        return sum(1 for v in self.values if v <= lam)


def cluster_eigenvalues(values: Sequence[float], rel_tol: float,
                        coefficients: Sequence | None = None) -> tuple:
    """Group an ascending eigenvalue list into strictly increasing entries."""
    entries: list[SpectrumEntry] = []
    i = 0
    vals = list(values)
    while i < len(vals):
        j = i + 1
        scale = max(1.0, abs(vals[i]))
        while j < len(vals) and abs(vals[j] - vals[i]) <= rel_tol * scale:
            j += 1
        coeff = None
        if coefficients is not None:
            coeff = tuple(coefficients[i:j])
        entries.append(SpectrumEntry(value=float(vals[i]), multiplicity=j - i,
                                     coefficients=coeff))
        i = j
    return tuple(entries)


def merged_values(spectra: Sequence[Spectrum], count: int) -> tuple:
    """Sorted merge of several spectra (disjoint-union spectrum)."""
    allv = sorted(v for s in spectra for v in s.values)
    return tuple(allv[:count])
