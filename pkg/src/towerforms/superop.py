"""Linear maps on a fixed-level matrix space.

Maps are stored structurally (diagonal complement, double-commutator
families, Schur multipliers, tower projections, sums/compositions) and
materialized to a dense matrix on vectorized inputs only on demand.

Vectorization convention (normative for dense bodies and Choi blocks):
row stacking, ``vec(a) = a.reshape(-1)`` in C order, so the matrix unit
e_kl maps to the standard basis vector at index k*dim + l.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .report import PropertyReport
from .tower import AlgebraElement, random_matrix
from .expectations import diagonal_part, partial_trace_matrix

__all__ = [
    "DENSIFY_DIM_CAP",
    "SuperOperator",
    "IdentityMap",
    "ZeroMap",
    "DiagonalComplement",
    "SchurMultiplier",
    "TransposeMap",
    "DoubleCommutatorFamily",
    "DenseMap",
    "TowerProjection",
    "ScaledMap",
    "SumMap",
    "ComposedMap",
    "BlockwiseMap",
    "SemigroupMap",
    "SpectralResolution",
    "vec",
    "unvec",
    "apply",
    "densify",
    "spectral_resolve",
    "semigroup_apply",
    "choi_matrix",
    "choi_min_eigenvalue",
    "markov_check",
    "symmetry_conservativity_check",
    "square_matrix_to_json",
]

# Dense materialization cap: dim 64 = level 6 means a 4096 x 4096 dense body.
DENSIFY_DIM_CAP = 64


def vec(mat: np.ndarray) -> np.ndarray:
    """Row-stacking vectorization."""
    return np.asarray(mat).reshape(-1)


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim)


def _check_hermitian(mat: np.ndarray, what: str, tol: float = 1e-12) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.complex128)
    scale = 1.0 + np.abs(mat).max(initial=0.0)
    defect = np.abs(mat - mat.conj().T).max(initial=0.0)
    if defect > tol * scale:
        raise ValueError(f"{what} must be Hermitian (defect {defect:.3e})")
    return mat


class SuperOperator:
    """Base class: a linear map on the dim x dim complex matrices.

    Instances are immutable after construction; ``apply_matrix`` is a pure
    function of its input. Spectral resolutions are cached lazily.
    """

    hermiticity_preserving: bool = False

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        self.dim = int(dim)
        self._spectral: SpectralResolution | None = None

    @property
    def level(self) -> int:
        n = self.dim.bit_length() - 1
        if 2 ** n != self.dim:
            raise ValueError(f"dimension {self.dim} is not a power of two")
        return n

    def apply_matrix(self, mat: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class IdentityMap(SuperOperator):
    hermiticity_preserving = True

    def apply_matrix(self, mat):
        return np.array(mat, dtype=np.complex128)


class ZeroMap(SuperOperator):
    hermiticity_preserving = True

    def apply_matrix(self, mat):
        return np.zeros((self.dim, self.dim), dtype=np.complex128)


class DiagonalComplement(SuperOperator):
    """a -> a minus its diagonal part: the complement of the expectation
    onto the diagonal subalgebra. An orthogonal projection for the GNS
    inner product, with spectrum {0, 1}."""

    hermiticity_preserving = True

    def apply_matrix(self, mat):
        mat = np.asarray(mat, dtype=np.complex128)
        return mat - diagonal_part(mat)

    def diagonal_expectation(self, mat: np.ndarray) -> np.ndarray:
        return diagonal_part(np.asarray(mat, dtype=np.complex128))


class SchurMultiplier(SuperOperator):
    """Entrywise multiplication by a Hermitian coefficient matrix."""

    hermiticity_preserving = True

    def __init__(self, coeffs: np.ndarray):
        coeffs = _check_hermitian(coeffs, "Schur coefficient matrix")
        if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1]:
            raise ValueError("Schur coefficient matrix must be square")
        super().__init__(coeffs.shape[0])
        self.coeffs = coeffs

    def apply_matrix(self, mat):
        return self.coeffs * np.asarray(mat, dtype=np.complex128)


class TransposeMap(SuperOperator):
    """The transpose map: positive but not completely positive."""

    hermiticity_preserving = True

    def apply_matrix(self, mat):
        return np.asarray(mat, dtype=np.complex128).T.copy()


class DoubleCommutatorFamily(SuperOperator):
    """a -> sum_i [m_i, [m_i, a]] + h a + a h with Hermitian m_i and h.

    With all m_i the rank-one diagonal projections and h = 0 this equals
    twice the diagonal complement.
    """

    hermiticity_preserving = True

    def __init__(self, ms, h=None):
        mats = [m.entries if isinstance(m, AlgebraElement) else m for m in ms]
        if not mats:
            raise ValueError("need at least one commutator generator m_i")
        mats = [_check_hermitian(m, f"m_{i}") for i, m in enumerate(mats)]
        dim = mats[0].shape[0]
        if any(m.shape != (dim, dim) for m in mats):
            raise ValueError("all m_i must be square matrices of one dimension")
        super().__init__(dim)
        self.ms = tuple(mats)
        if h is None:
            self.h = None
        else:
            h = h.entries if isinstance(h, AlgebraElement) else h
            h = _check_hermitian(h, "h")
            if h.shape != (dim, dim):
                raise ValueError("h must match the dimension of the m_i")
            self.h = h

    def apply_matrix(self, mat):
        mat = np.asarray(mat, dtype=np.complex128)
        out = np.zeros_like(mat)
        for m in self.ms:
            c = m @ mat - mat @ m
            out += m @ c - c @ m
        if self.h is not None:
            out += self.h @ mat + mat @ self.h
        return out


class DenseMap(SuperOperator):
    """Dense dim^2 x dim^2 matrix acting on row-stacked inputs."""

    def __init__(self, matrix: np.ndarray, hermiticity_preserving: bool = False):
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("dense body must be square")
        dim = int(round(np.sqrt(matrix.shape[0])))
        if dim * dim != matrix.shape[0]:
            raise ValueError(
                f"dense body side {matrix.shape[0]} is not a perfect square"
            )
        super().__init__(dim)
        self.matrix = matrix
        self.hermiticity_preserving = bool(hermiticity_preserving)

    def apply_matrix(self, mat):
        return unvec(self.matrix @ vec(np.asarray(mat, dtype=np.complex128)), self.dim)


class TowerProjection(SuperOperator):
    """Orthogonal projection of the ambient level onto the embedded
    level-`target` subalgebra (condition down, embed back up)."""

    hermiticity_preserving = True

    def __init__(self, ambient_level: int, target_level: int):
        if not 0 <= target_level <= ambient_level:
            raise ValueError(
                f"need 0 <= target {target_level} <= ambient {ambient_level}"
            )
        super().__init__(2 ** ambient_level)
        self.ambient_level = int(ambient_level)
        self.target_level = int(target_level)

    def apply_matrix(self, mat):
        pt = partial_trace_matrix(
            np.asarray(mat, dtype=np.complex128), self.ambient_level, self.target_level
        )
        k = self.ambient_level - self.target_level
        if k == 0:
            return pt
        return np.kron(pt, np.eye(2 ** k))


class ScaledMap(SuperOperator):
    def __init__(self, factor: complex, inner: SuperOperator):
        super().__init__(inner.dim)
        self.factor = complex(factor)
        self.inner = inner
        self.hermiticity_preserving = (
            inner.hermiticity_preserving and self.factor.imag == 0.0
        )

    def apply_matrix(self, mat):
        return self.factor * self.inner.apply_matrix(mat)


class SumMap(SuperOperator):
    def __init__(self, terms):
        terms = tuple(terms)
        if not terms:
            raise ValueError("sum of zero maps is ambiguous; use ZeroMap")
        if len({t.dim for t in terms}) != 1:
            raise ValueError("sum terms must share one dimension")
        super().__init__(terms[0].dim)
        self.terms = terms
        self.hermiticity_preserving = all(t.hermiticity_preserving for t in terms)

    def apply_matrix(self, mat):
        out = self.terms[0].apply_matrix(mat)
        for t in self.terms[1:]:
            out = out + t.apply_matrix(mat)
        return out


class ComposedMap(SuperOperator):
    """Composition in the mathematical order: maps[0] o maps[1] o ... so the
    rightmost factor is applied first."""

    def __init__(self, maps):
        maps = tuple(maps)
        if not maps:
            raise ValueError("composition of zero maps is ambiguous; use IdentityMap")
        if len({m.dim for m in maps}) != 1:
            raise ValueError("composition factors must share one dimension")
        super().__init__(maps[0].dim)
        self.maps = maps
        self.hermiticity_preserving = all(m.hermiticity_preserving for m in maps)

    def apply_matrix(self, mat):
        out = np.asarray(mat, dtype=np.complex128)
        for m in reversed(self.maps):
            out = m.apply_matrix(out)
        return out


class BlockwiseMap(SuperOperator):
    """Apply an inner map to every d x d block of a (k*d) x (k*d) matrix.

    This is the canonical amplification of a map to k x k block matrices.
    """

    def __init__(self, inner: SuperOperator, k: int):
        if k < 1:
            raise ValueError(f"block count must be >= 1, got {k}")
        super().__init__(k * inner.dim)
        self.inner = inner
        self.k = int(k)
        self.hermiticity_preserving = inner.hermiticity_preserving

    def apply_matrix(self, mat):
        k, d = self.k, self.inner.dim
        mat = np.asarray(mat, dtype=np.complex128)
        out = np.empty_like(mat)
        for i in range(k):
            for j in range(k):
                out[i * d:(i + 1) * d, j * d:(j + 1) * d] = self.inner.apply_matrix(
                    mat[i * d:(i + 1) * d, j * d:(j + 1) * d]
                )
        return out


# --------------------------------------------------------------------------
# evaluation, densification, spectral analysis
# --------------------------------------------------------------------------


def apply(op: SuperOperator, a: AlgebraElement) -> AlgebraElement:
    """Evaluate a map on a level-tagged element."""
    if op.dim != a.dim:
        raise ValueError(
            f"level mismatch: map acts on dimension {op.dim}, element has {a.dim}"
        )
    return AlgebraElement(a.level, op.apply_matrix(a.entries))


def _check_budget(dim: int, max_dim: int, what: str) -> None:
    if dim > max_dim:
        side = dim * dim
        bytes_needed = 16 * side * side
        raise ValueError(
            f"{what} needs a {side} x {side} complex matrix "
            f"(~{bytes_needed / 2**30:.2f} GiB) for dimension {dim}; "
            f"cap is max_dim={max_dim}"
        )


def densify(op: SuperOperator, max_dim: int = DENSIFY_DIM_CAP) -> DenseMap:
    """Materialize the map as a dense matrix on row-stacked inputs by
    probing the matrix-unit basis."""
    if isinstance(op, DenseMap):
        return op
    _check_budget(op.dim, max_dim, "densification")
    d = op.dim
    dense = np.empty((d * d, d * d), dtype=np.complex128)
    probe = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        for l in range(d):
            probe[k, l] = 1.0
            dense[:, k * d + l] = vec(op.apply_matrix(probe))
            probe[k, l] = 0.0
    return DenseMap(dense, hermiticity_preserving=op.hermiticity_preserving)


@dataclass(frozen=True, eq=False)
class SpectralResolution:
    """Eigendecomposition of a GNS-self-adjoint map.

    eigenvalues are ascending; eigenvectors[k] is the matrix u_k, the
    family being orthonormal for the GNS inner product.
    """

    dim: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # shape (dim*dim, dim, dim)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    def coefficients(self, mat: np.ndarray) -> np.ndarray:
        """GNS coefficients <u_k, mat>_2."""
        return np.einsum("kij,ij->k", self.eigenvectors.conj(), mat) / self.dim

    def apply_function(self, func, mat: np.ndarray) -> np.ndarray:
        """Evaluate f(map) on mat through the spectral sum."""
        c = self.coefficients(np.asarray(mat, dtype=np.complex128))
        weights = func(self.eigenvalues) * c
        return np.einsum("k,kij->ij", weights, self.eigenvectors)

    def reconstruct(self, mat: np.ndarray) -> np.ndarray:
        return self.apply_function(lambda lam: lam, mat)


def spectral_resolve(
    op: SuperOperator,
    sym_tol: float = 1e-10,
    max_dim: int = DENSIFY_DIM_CAP,
) -> SpectralResolution:
    """Diagonalize a GNS-self-adjoint map.

    GNS self-adjointness is equivalent to Hermiticity of the dense body
    (the GNS inner product is a positive multiple of the Euclidean one on
    vectorized matrices); non-self-adjoint inputs are rejected with the
    largest asymmetry entry as witness.
    """
    if op._spectral is not None:
        return op._spectral
    dense = densify(op, max_dim=max_dim).matrix
    asym = np.abs(dense - dense.conj().T)
    defect = asym.max(initial=0.0)
    if defect > sym_tol * (1.0 + np.abs(dense).max(initial=0.0)):
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValueError(
            f"map is not GNS-self-adjoint: |D - D*| has max {defect:.3e} "
            f"at vectorized entry ({i}, {j})"
        )
    w, v = np.linalg.eigh(0.5 * (dense + dense.conj().T))
    d = op.dim
    vectors = (v.T.reshape(d * d, d, d)) * np.sqrt(d)
    res = SpectralResolution(dim=d, eigenvalues=w, eigenvectors=vectors)
    op._spectral = res
    return res


# --------------------------------------------------------------------------
# semigroups
# --------------------------------------------------------------------------


def _semigroup_matrix(
    op: SuperOperator, t: float, mat: np.ndarray, eig_tol: float = 1e-12
) -> np.ndarray:
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    mat = np.asarray(mat, dtype=np.complex128)
    if isinstance(op, DiagonalComplement):
        # e^{-t(I-B)} = e^{-t} id + (1 - e^{-t}) B since B is a projection
        decay = np.exp(-t)
        return decay * mat + (1.0 - decay) * op.diagonal_expectation(mat)
    res = spectral_resolve(op)
    if res.min_eigenvalue < -eig_tol:
        raise ValueError(
            f"generator is not positive: min eigenvalue {res.min_eigenvalue:.3e}"
        )
    return res.apply_function(lambda lam: np.exp(-t * lam), mat)


def semigroup_apply(
    op: SuperOperator, t: float, a: AlgebraElement, eig_tol: float = 1e-12
) -> AlgebraElement:
    """Evaluate e^{-t op} on an element.

    The generator must be GNS-self-adjoint and positive; the diagonal
    complement uses its projection closed form, everything else goes
    through the spectral resolution.
    """
    if op.dim != a.dim:
        raise ValueError(
            f"level mismatch: map acts on dimension {op.dim}, element has {a.dim}"
        )
    return AlgebraElement(a.level, _semigroup_matrix(op, t, a.entries, eig_tol))


class SemigroupMap(SuperOperator):
    """e^{-t generator} frozen at one time, usable wherever a map is
    expected (Choi certification in particular)."""

    def __init__(self, generator: SuperOperator, t: float, eig_tol: float = 1e-12):
        if t < 0:
            raise ValueError(f"semigroup time must be nonnegative, got {t}")
        super().__init__(generator.dim)
        self.generator = generator
        self.t = float(t)
        self.eig_tol = float(eig_tol)
        self.hermiticity_preserving = generator.hermiticity_preserving

    def apply_matrix(self, mat):
        return _semigroup_matrix(self.generator, self.t, mat, self.eig_tol)


# --------------------------------------------------------------------------
# Choi matrices and complete positivity
# --------------------------------------------------------------------------


def choi_matrix(op: SuperOperator, max_dim: int = DENSIFY_DIM_CAP) -> np.ndarray:
    """Block matrix whose (k, l) block is the image of the matrix unit e_kl.

    The map is completely positive iff the result is positive
    semidefinite.
    """
    _check_budget(op.dim, max_dim, "Choi matrix")
    d = op.dim
    choi = np.zeros((d * d, d * d), dtype=np.complex128)
    probe = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        for l in range(d):
            probe[k, l] = 1.0
            choi[k * d:(k + 1) * d, l * d:(l + 1) * d] = op.apply_matrix(probe)
            probe[k, l] = 0.0
    return choi


def choi_min_eigenvalue(
    op: SuperOperator, sym_tol: float = 1e-10, max_dim: int = DENSIFY_DIM_CAP
) -> float:
    """Smallest Choi eigenvalue; nonnegative up to tolerance iff the map is
    completely positive. Rejects maps whose Choi matrix is not Hermitian."""
    choi = choi_matrix(op, max_dim=max_dim)
    defect = np.abs(choi - choi.conj().T).max(initial=0.0)
    if defect > sym_tol * (1.0 + np.abs(choi).max(initial=0.0)):
        raise ValueError(
            f"Choi matrix is not Hermitian (defect {defect:.3e}); "
            "PSD test is undefined"
        )
    return float(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T))[0])


# --------------------------------------------------------------------------
# randomized semigroup suites
# --------------------------------------------------------------------------


def markov_check(
    op: SuperOperator,
    t_samples,
    n_samples: int,
    seed: int,
    tol: float,
) -> PropertyReport:
    """Sample contractions x with 0 <= x <= 1 and check that every Phi_t(x)
    keeps its spectrum inside [-tol, 1 + tol]."""
    t_samples = tuple(float(t) for t in t_samples)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    failures = 0
    for _ in range(n_samples):
        x = random_matrix(op.dim, "contraction", rng)
        margin = -np.inf
        for t in t_samples:
            y = _semigroup_matrix(op, t, x)
            ev = np.linalg.eigvalsh(0.5 * (y + y.conj().T))
            margin = max(margin, -ev[0], ev[-1] - 1.0)
        worst = max(worst, margin)
        if margin > tol:
            failures += 1
    return PropertyReport(
        suite="markov",
        level=op.level,
        samples=n_samples,
        failures=failures,
        worst_margin=float(worst),
        seed=seed,
        tol=tol,
    )


def symmetry_conservativity_check(
    op: SuperOperator,
    samples: int,
    seed: int,
    tol: float,
    t_samples=(0.1, 1.0, 10.0),
) -> PropertyReport:
    """Check trace symmetry tau(Phi_t(x) y) = tau(x Phi_t(y)) on random
    pairs and unit preservation Phi_t(1) = 1.

    A broken unit counts as one failure on top of the per-sample count.
    """
    t_samples = tuple(float(t) for t in t_samples)
    rng = np.random.default_rng(seed)
    d = op.dim
    eye = np.eye(d, dtype=np.complex128)

    conserv = -np.inf
    for t in t_samples:
        drift = np.abs(_semigroup_matrix(op, t, eye) - eye).max()
        conserv = max(conserv, float(drift))

    worst = conserv
    failures = 1 if conserv > tol else 0
    for _ in range(samples):
        x = random_matrix(d, "general", rng)
        y = random_matrix(d, "general", rng)
        margin = -np.inf
        for t in t_samples:
            lhs = np.trace(_semigroup_matrix(op, t, x) @ y) / d
            rhs = np.trace(x @ _semigroup_matrix(op, t, y)) / d
            margin = max(margin, abs(lhs - rhs))
        worst = max(worst, margin)
        if margin > tol:
            failures += 1
    return PropertyReport(
        suite="symmetry",
        level=op.level,
        samples=samples,
        failures=failures,
        worst_margin=float(worst),
        seed=seed,
        tol=tol,
    )


def square_matrix_to_json(mat: np.ndarray) -> dict:
    """Dense superoperator / Choi export: dimension-keyed matrix JSON."""
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("can only export square matrices")
    return {"dim": mat.shape[0], "re": mat.real.tolist(), "im": mat.imag.tolist()}
