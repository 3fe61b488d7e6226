"""Experiment harness: convergence tables, semigroup trajectories and the
randomized property suites with reproducible CSV/JSON output.

All output is deterministic for a fixed configuration: sampling is seeded
per suite and level, report files carry no timestamps, and floats are
written with their shortest round-trip representation.
"""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .report import PropertyReport
from .tower import AlgebraElement, gaussian_general, gns_inner, normalized_trace
from .expectations import cond_expect, project_P, project_Q
from .forms import (
    CompatibleFamily,
    FamilyCompatibilityError,
    QuadraticForm,
    build_from_family,
    commutator_form,
    commutator_form_eval,
    diagonal_form,
    dirichlet_check,
    eval_form,
    family_compatibility_margin,
)
from .derivation import bimodule_inner, bimodule_left, bimodule_right, derive
from .superop import (
    DiagonalComplement,
    DoubleCommutatorFamily,
    ScaledMap,
    SemigroupMap,
    TransposeMap,
    choi_min_eigenvalue,
    densify,
    markov_check,
    semigroup_apply,
    symmetry_conservativity_check,
)

__all__ = [
    "SUITE_NAMES",
    "RunConfig",
    "run_suite",
    "converge_table",
    "evolve_table",
    "write_table_csv",
    "write_reports",
    "CONVERGE_COLUMNS",
    "EVOLVE_COLUMNS",
]

SUITE_NAMES = (
    "dirichlet",
    "markov",
    "symmetry",
    "choi",
    "leibniz",
    "compatibility",
    "normalization-bridge",
    "convergence",
)


@dataclass(frozen=True)
class RunConfig:
    """Configuration of one harness run; see SUITE_NAMES for valid suites."""

    level: int = 4
    suites: tuple = SUITE_NAMES
    samples: int = 200
    seed: int = 7
    tol: float = 1e-10
    eig_tol: float = 1e-12
    times: tuple = (0.1, 1.0, 10.0)
    semigroup_level_cap: int = 3
    choi_level_cap: int = 3
    out_dir: str | None = None

    def __post_init__(self):
        if self.level < 1:
            raise ValueError(f"working level must be >= 1, got {self.level}")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        times = tuple(float(t) for t in self.times)
        if any(t < 0 for t in times):
            raise ValueError(f"time grid must be nonnegative, got {times}")
        if any(a > b for a, b in zip(times, times[1:])):
            raise ValueError(f"time grid must be ascending, got {times}")
        object.__setattr__(self, "times", times)
        suites = tuple(self.suites)
        if suites == ("all",):
            suites = SUITE_NAMES
        unknown = [s for s in suites if s not in SUITE_NAMES]
        if unknown:
            raise ValueError(
                f"unknown suite name(s) {unknown}; valid names: "
                f"{', '.join(SUITE_NAMES)} (or 'all')"
            )
        object.__setattr__(self, "suites", suites)


def _suite_seed(base: int, suite: str, level: int) -> int:
    """Stable per-suite, per-level child seed."""
    return (base + zlib.crc32(f"{suite}:{level}".encode())) % (2 ** 31)


# --------------------------------------------------------------------------
# individual suites
# --------------------------------------------------------------------------


def _run_dirichlet(cfg: RunConfig) -> list[PropertyReport]:
    reports = []
    for n in range(1, cfg.level + 1):
        reports.append(
            dirichlet_check(
                diagonal_form(n),
                samples=cfg.samples,
                seed=_suite_seed(cfg.seed, "dirichlet", n),
                tol=cfg.tol,
            )
        )
    return reports


def _run_markov(cfg: RunConfig) -> list[PropertyReport]:
    reports = []
    for n in range(1, min(cfg.level, cfg.semigroup_level_cap) + 1):
        reports.append(
            markov_check(
                DiagonalComplement(2 ** n),
                t_samples=cfg.times,
                n_samples=cfg.samples,
                seed=_suite_seed(cfg.seed, "markov", n),
                tol=cfg.tol,
            )
        )
    return reports


def _run_symmetry(cfg: RunConfig) -> list[PropertyReport]:
    reports = []
    for n in range(1, min(cfg.level, cfg.semigroup_level_cap) + 1):
        reports.append(
            symmetry_conservativity_check(
                DiagonalComplement(2 ** n),
                samples=cfg.samples,
                seed=_suite_seed(cfg.seed, "symmetry", n),
                tol=cfg.tol,
                t_samples=cfg.times,
            )
        )
    return reports


def _run_choi(cfg: RunConfig) -> list[PropertyReport]:
    """Semigroup maps of the diagonal generator must be completely
    positive; the transpose map is the injected negative control and must
    be flagged non-CP with smallest Choi eigenvalue -1."""
    reports = []
    for n in range(1, min(cfg.level, cfg.choi_level_cap) + 1):
        gen = DiagonalComplement(2 ** n)
        worst = -np.inf
        failures = 0
        for t in cfg.times:
            margin = -choi_min_eigenvalue(SemigroupMap(gen, t))
            worst = max(worst, margin)
            if margin > cfg.tol:
                failures += 1
        reports.append(
            PropertyReport(
                suite="choi",
                level=n,
                samples=len(cfg.times),
                failures=failures,
                worst_margin=float(worst),
                seed=cfg.seed,
                tol=cfg.tol,
            )
        )
    control = abs(choi_min_eigenvalue(TransposeMap(2)) + 1.0)
    reports.append(
        PropertyReport(
            suite="choi-transpose-control",
            level=1,
            samples=1,
            failures=0 if control <= cfg.tol else 1,
            worst_margin=float(control),
            seed=cfg.seed,
            tol=cfg.tol,
        )
    )
    return reports


def _run_leibniz(cfg: RunConfig) -> list[PropertyReport]:
    """Product rule for the derivation on pairs at its own level, plus the
    energy identity tau(<da, da>) = commutator energy for ambient samples."""
    reports = []
    for n in range(1, cfg.level + 1):
        seed = _suite_seed(cfg.seed, "leibniz", n)
        rng = np.random.default_rng(seed)
        worst = -np.inf
        failures = 0
        for _ in range(cfg.samples):
            a = AlgebraElement(n, gaussian_general(2 ** n, rng))
            b = AlgebraElement(n, gaussian_general(2 ** n, rng))
            lhs = derive(a @ b, n)
            rhs = bimodule_right(derive(a, n), b) + bimodule_left(a, derive(b, n))
            margin = max(
                np.abs(l.entries - r.entries).max(initial=0.0)
                for l, r in zip(lhs.components, rhs.components)
            )
            amb = AlgebraElement(cfg.level, gaussian_general(2 ** cfg.level, rng))
            df = derive(amb, n)
            energy = normalized_trace(bimodule_inner(df, df)).real
            margin = max(margin, abs(energy - commutator_form_eval(amb, n)))
            worst = max(worst, margin)
            if margin > cfg.tol:
                failures += 1
        reports.append(
            PropertyReport(
                suite="leibniz",
                level=n,
                samples=cfg.samples,
                failures=failures,
                worst_margin=float(worst),
                seed=seed,
                tol=cfg.tol,
            )
        )
    return reports


def _run_compatibility(cfg: RunConfig) -> list[PropertyReport]:
    """Commutator-form family: compatibility margin on full matrix-unit
    bases, recovery of the top form, and rejection of a x2-perturbed
    family as a negative control."""
    family = CompatibleFamily(
        tuple(commutator_form(n) for n in range(1, cfg.level + 1))
    )
    worst, _ = family_compatibility_margin(family)
    failures = 1 if worst > cfg.eig_tol else 0

    recovered = build_from_family(family, ambient_level=cfg.level, tol=cfg.eig_tol)
    direct = commutator_form(cfg.level)
    recovery_dev = np.abs(
        densify(recovered.generator).matrix - densify(direct.generator).matrix
    ).max(initial=0.0)
    worst = max(worst, float(recovery_dev))
    if recovery_dev > cfg.eig_tol:
        failures += 1

    if cfg.level >= 2:
        perturbed_forms = list(family.forms)
        perturbed_forms[1] = QuadraticForm(
            ScaledMap(2.0, perturbed_forms[1].generator), label="perturbed"
        )
        try:
            build_from_family(CompatibleFamily(tuple(perturbed_forms)))
        except FamilyCompatibilityError:
            pass
        else:
            failures += 1
    return [
        PropertyReport(
            suite="compatibility",
            level=cfg.level,
            samples=sum(4 ** n for n in range(1, cfg.level)),
            failures=failures,
            worst_margin=float(worst),
            seed=cfg.seed,
            tol=cfg.eig_tol,
        )
    ]


def _run_normalization_bridge(cfg: RunConfig) -> list[PropertyReport]:
    """The commutator sum equals twice the diagonal-form energy of the
    conditioned element, and the double-commutator generator over the
    diagonal projections densifies to exactly twice the diagonal
    complement."""
    reports = []
    for n in range(1, cfg.level + 1):
        seed = _suite_seed(cfg.seed, "normalization-bridge", n)
        rng = np.random.default_rng(seed)
        form_n = diagonal_form(n)
        worst = -np.inf
        failures = 0
        for _ in range(cfg.samples):
            a = AlgebraElement(cfg.level, gaussian_general(2 ** cfg.level, rng))
            bridge = abs(
                commutator_form_eval(a, n)
                - 2.0 * eval_form(form_n, cond_expect(a, n))
            )
            worst = max(worst, bridge)
            if bridge > cfg.eig_tol:
                failures += 1
        double = densify(DoubleCommutatorFamily(_diag_projections_nd(2 ** n))).matrix
        twice = 2.0 * densify(DiagonalComplement(2 ** n)).matrix
        generator_dev = float(np.abs(double - twice).max(initial=0.0))
        worst = max(worst, generator_dev)
        if generator_dev > cfg.eig_tol:
            failures += 1
        reports.append(
            PropertyReport(
                suite="normalization-bridge",
                level=n,
                samples=cfg.samples,
                failures=failures,
                worst_margin=float(worst),
                seed=seed,
                tol=cfg.eig_tol,
            )
        )
    return reports


def _diag_projections_nd(dim: int) -> list[np.ndarray]:
    ps = []
    for i in range(dim):
        p = np.zeros((dim, dim), dtype=np.complex128)
        p[i, i] = 1.0
        ps.append(p)
    return ps


def _run_convergence(cfg: RunConfig) -> list[PropertyReport]:
    """Restricted-energy chain for the diagonal form on random ambient
    elements: |sqrt(E_n) - sqrt(E)| <= sqrt(E(Q_n a)), the tail bound
    E(Q_n a) <= ||Q_n a||_2^2, and exactness at the top level."""
    seed = _suite_seed(cfg.seed, "convergence", cfg.level)
    rng = np.random.default_rng(seed)
    form = diagonal_form(cfg.level)
    worst = -np.inf
    failures = 0
    for _ in range(cfg.samples):
        a = AlgebraElement(cfg.level, gaussian_general(2 ** cfg.level, rng))
        energy = eval_form(form, a)
        margin = -np.inf
        top_tail = 0.0
        for n in range(1, cfg.level + 1):
            pa = project_P(a, n)
            qa = project_Q(a, n)
            e_n = eval_form(form, pa)
            e_q = eval_form(form, qa)
            chain = (
                abs(math.sqrt(max(e_n, 0.0)) - math.sqrt(max(energy, 0.0)))
                - math.sqrt(max(e_q, 0.0))
            )
            tail = e_q - gns_inner(qa, qa).real
            margin = max(margin, chain, tail)
            if n == cfg.level:
                top_tail = e_q
        worst = max(worst, margin, top_tail)
        if margin > cfg.tol or top_tail > cfg.eig_tol:
            failures += 1
    return [
        PropertyReport(
            suite="convergence",
            level=cfg.level,
            samples=cfg.samples,
            failures=failures,
            worst_margin=float(worst),
            seed=seed,
            tol=cfg.tol,
        )
    ]


_SUITE_RUNNERS = {
    "dirichlet": _run_dirichlet,
    "markov": _run_markov,
    "symmetry": _run_symmetry,
    "choi": _run_choi,
    "leibniz": _run_leibniz,
    "compatibility": _run_compatibility,
    "normalization-bridge": _run_normalization_bridge,
    "convergence": _run_convergence,
}


def run_suite(cfg: RunConfig) -> list[PropertyReport]:
    """Run the selected suites in registry order; write reports when
    cfg.out_dir is set. The caller decides the process exit status from
    the failure counts."""
    reports: list[PropertyReport] = []
    for name in SUITE_NAMES:
        if name in cfg.suites:
            reports.extend(_SUITE_RUNNERS[name](cfg))
    if cfg.out_dir is not None:
        write_reports(cfg.out_dir, reports)
    return reports


def write_reports(out_dir, reports: list[PropertyReport]) -> None:
    """One JSON file per report plus a CSV summary, byte-reproducible."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        (out / f"{rep.suite}-level{rep.level}.json").write_text(rep.to_json())
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["suite", "level", "samples", "failures", "worst_margin", "seed", "tol"]
        )
        for rep in reports:
            writer.writerow(
                [
                    rep.suite,
                    rep.level,
                    rep.samples,
                    rep.failures,
                    repr(rep.worst_margin),
                    rep.seed,
                    repr(rep.tol),
                ]
            )


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------

CONVERGE_COLUMNS = ("n", "E_n", "E_Q_n", "Q_n_norm_sq", "sqrt_gap")
EVOLVE_COLUMNS = ("t", "trace_re", "trace_im", "gns_norm", "energy", "min_eig", "max_eig")


def converge_table(cfg: RunConfig, a: AlgebraElement) -> list[dict]:
    """Rows (n, E_n(a), E(Q_n a), ||Q_n a||_2^2, |sqrt(E_n) - sqrt(E)|) for
    the diagonal form at the working level; the last row is exact."""
    if a.level != cfg.level:
        raise ValueError(
            f"input element has level {a.level}, configured working level is "
            f"{cfg.level}"
        )
    form = diagonal_form(cfg.level)
    energy = eval_form(form, a)
    rows = []
    for n in range(1, cfg.level + 1):
        pa = project_P(a, n)
        qa = project_Q(a, n)
        e_n = eval_form(form, pa)
        e_q = eval_form(form, qa)
        rows.append(
            {
                "n": n,
                "E_n": e_n,
                "E_Q_n": e_q,
                "Q_n_norm_sq": gns_inner(qa, qa).real,
                "sqrt_gap": abs(
                    math.sqrt(max(e_n, 0.0)) - math.sqrt(max(energy, 0.0))
                ),
            }
        )
    return rows


def evolve_table(a: AlgebraElement, t_grid) -> list[dict]:
    """Trajectory of a under the diagonal-complement semigroup at its own
    level; min/max eigenvalues refer to the Hermitian part."""
    gen = DiagonalComplement(a.dim)
    form = diagonal_form(a.level)
    rows = []
    for t in t_grid:
        y = semigroup_apply(gen, float(t), a)
        tr = normalized_trace(y)
        herm = 0.5 * (y.entries + y.entries.conj().T)
        ev = np.linalg.eigvalsh(herm)
        rows.append(
            {
                "t": float(t),
                "trace_re": tr.real,
                "trace_im": tr.imag,
                "gns_norm": math.sqrt(max(gns_inner(y, y).real, 0.0)),
                "energy": eval_form(form, y),
                "min_eig": float(ev[0]),
                "max_eig": float(ev[-1]),
            }
        )
    return rows


def write_table_csv(path, columns, rows) -> None:
    """CSV with a header row, '.' decimal separator, no locale anywhere."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns]
            )
