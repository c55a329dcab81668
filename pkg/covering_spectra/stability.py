"""Stability verdicts and bound ledgers for covers.

Every check records what the inequality claims next to what the computed
spectra show. A failed inequality raises BoundViolationError; equality is
recorded as tight.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .const import (
    DEFAULT_COUNT_MARGIN,
    DEFAULT_EPS_ZERO,
    DEFAULT_INTEGRAL_SAMPLES,
    DEFAULT_MAX_COSET_DEGREE,
    DEFAULT_MAX_INDEX_FREE,
    DEFAULT_MAX_INDEX_RELATOR,
    DEFAULT_SEED,
    DEFAULT_SIGMA_MAX_SIZE,
    DEFAULT_SIGMA_SEEDS,
    LAPLACE_GRAPH,
    MODE_CLOSED,
    MODE_OPEN,
    VERDICT_AMBIGUOUS,
    VERDICT_STABLE,
    VERDICT_STRICT,
    VERDICT_WEAK,
    WEAK_GAP_RATIO,
)
from .covering import Cover, Tower, fiber_diameter, preimage_components, subdomain_group
from .exceptions import (
    AmbiguousCountError,
    BoundViolationError,
    InvalidParamsError,
    RangeExceededError,
)
from .groups import (
    fixed_identity_coset,
    fixes_all_points,
    intermediate_count_check,
    labeled_action_count,
    min_generators_coset,
    orbits,
)
from .helpers import make_rng
from .models import Presentation, SurfaceComplex
from .nodal import NodalDecomposition, nodal_count_bound_data, nodal_decomposition
from .spectra import (
    LaplaceOperator,
    Spectrum,
    assemble,
    canonical_eigenvector,
    count_below,
    dirichlet_lambda0,
    lift,
    lowest_eigenpairs,
)
from .surface import induced_edges

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundEntry:
    """One inequality ``observed >= claimed``."""

    name: str
    claimed: float
    observed: float

    @property
    def holds(self) -> bool:
        return self.observed >= self.claimed

    @property
    def tight(self) -> bool:
        return self.observed == self.claimed

    def require(self) -> BoundEntry:
        if not self.holds:
            raise BoundViolationError(
                f"{self.name}: observed {self.observed:g} below claimed {self.claimed:g}",
                claimed=self.claimed,
                observed=self.observed,
            )
        return self

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "claimed": self.claimed, "observed": self.observed, "holds": self.holds,
                "tight": self.tight}


def _provenance(*spectra: Spectrum) -> dict[str, Any]:
    return {
        "seeds": [s.seed for s in spectra],
        "tols": [s.tol for s in spectra],
        "solvers": [s.solver for s in spectra],
    }


def spectrum_past(op: LaplaceOperator, lam: float, m: int, margin: float = DEFAULT_COUNT_MARGIN,
                  **solver: Any) -> Spectrum:
    """Lowest eigenpairs, doubling ``m`` until ``lam`` is certified."""
    m = max(1, min(m, op.dim))
    while True:
        s = lowest_eigenpairs(op, m, **solver)
        if s.certifies(lam, margin) or m == op.dim:
            return s
        m = min(2 * m, op.dim)


# -- verdicts --------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    target: dict[str, Any]
    counts: dict[str, int | None]
    verdict: str
    margin: float
    gap_ratio: float | None = None
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def unstable(self) -> bool:
        return self.verdict in (VERDICT_STRICT, VERDICT_WEAK)

    def to_dict(self) -> dict[str, Any]:
        return {
            "target": self.target,
            "counts": self.counts,
            "verdict": self.verdict,
            "margin": self.margin,
            "gap_ratio": self.gap_ratio,
            "provenance": self.provenance,
        }


def _gap_ratio(s: Spectrum, lam: float, margin: float) -> float:
    inside = [i for i, v in enumerate(s.eigenvalues) if abs(v - lam) <= margin]
    outside = [abs(float(v) - lam) for v in s.eigenvalues if abs(v - lam) > margin]
    if not outside:
        return np.inf
    noise = max([margin] + [s.error_bound(i) for i in inside])
    return min(outside) / noise


def stability_verdict(
    base: Spectrum,
    cover: Spectrum,
    target: int | tuple[float, float],
    margin: float = DEFAULT_COUNT_MARGIN,
) -> StabilityReport:
    """Compare eigenvalue counts of base and cover at lambda_k or on an interval [a, b].

    An integer target k means lambda = lambda_k of the base, counted from 0.
    """
    provenance = _provenance(base, cover)
    if isinstance(target, tuple):
        lo, hi = target
        if not 0 <= lo <= hi:
            raise InvalidParamsError(f"interval [{lo}, {hi}] is not a subset of [0, inf)")
        for s in (base, cover):
            if not s.certifies(hi, margin):
                raise RangeExceededError(f"spectrum does not reach {hi:.6g}")
        desc: dict[str, Any] = {"interval": [lo, hi]}
        try:
            n_base = count_below(base, hi, MODE_CLOSED, margin) - count_below(base, lo, MODE_OPEN, margin)
            n_cover = count_below(cover, hi, MODE_CLOSED, margin) - count_below(cover, lo, MODE_OPEN, margin)
        except AmbiguousCountError as err:
            _LOGGER.info("Interval verdict ambiguous near %.12g", err.eigenvalue)
            return StabilityReport(desc, {"base": None, "cover": None}, VERDICT_AMBIGUOUS, margin,
                                   provenance=provenance)
        BoundEntry("lifted interval count", n_base, n_cover).require()
        verdict = VERDICT_STABLE if n_cover == n_base else VERDICT_STRICT
        return StabilityReport(desc, {"base": n_base, "cover": n_cover}, verdict, margin, provenance=provenance)

    k = int(target)
    if not 0 <= k < base.count:
        raise RangeExceededError(f"lambda_{k} is not among the {base.count} computed base eigenvalues")
    lam = float(base.eigenvalues[k])
    desc = {"k": k, "lambda": lam}
    for s in (base, cover):
        if not s.certifies(lam, margin):
            raise RangeExceededError(f"spectrum does not reach lambda_{k} = {lam:.6g}")
    try:
        counts = {
            "base_open": count_below(base, lam, MODE_OPEN, margin),
            "cover_open": count_below(cover, lam, MODE_OPEN, margin),
            "base_closed": count_below(base, lam, MODE_CLOSED, margin),
            "cover_closed": count_below(cover, lam, MODE_CLOSED, margin),
        }
    except AmbiguousCountError as err:
        _LOGGER.info("Verdict at lambda_%d ambiguous near %.12g", k, err.eigenvalue)
        return StabilityReport(desc, {}, VERDICT_AMBIGUOUS, margin, provenance=provenance)
    BoundEntry("lifted closed count", counts["base_closed"], counts["cover_closed"]).require()
    BoundEntry("lifted open count", counts["base_open"], counts["cover_open"]).require()
    gap = None
    if counts["cover_closed"] == counts["base_closed"]:
        verdict = VERDICT_STABLE
    elif counts["cover_open"] > counts["base_open"]:
        verdict = VERDICT_STRICT
    else:
        gap = _gap_ratio(cover, lam, margin)
        verdict = VERDICT_WEAK if gap > WEAK_GAP_RATIO else VERDICT_AMBIGUOUS
    _LOGGER.debug("lambda_%d = %.6g: counts %s, verdict %s", k, lam, counts, verdict)
    return StabilityReport(desc, dict(counts), verdict, margin, gap, provenance)


def monotone_instability_check(
    base: Spectrum, cover: Spectrum, k_max: int, margin: float = DEFAULT_COUNT_MARGIN
) -> list[StabilityReport]:
    """Once lambda_k is unstable, every later lambda_l must be unstable too."""
    reports: list[StabilityReport] = []
    first_unstable: int | None = None
    for k in range(1, k_max + 1):
        try:
            report = stability_verdict(base, cover, k, margin)
        except RangeExceededError:
            break
        reports.append(report)
        if report.verdict == VERDICT_AMBIGUOUS:
            continue
        if first_unstable is not None and report.verdict == VERDICT_STABLE:
            raise BoundViolationError(f"lambda_{first_unstable} unstable but lambda_{k} stable")
        if report.unstable and first_unstable is None:
            first_unstable = k
    return reports


@dataclass(frozen=True)
class LiftingReport:
    indices: int
    max_excess: float
    entries: tuple[BoundEntry, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"indices": self.indices, "max_excess": self.max_excess,
                "entries": [e.to_dict() for e in self.entries]}


def lifting_check(base: Spectrum, cover: Spectrum, margin: float = DEFAULT_COUNT_MARGIN) -> LiftingReport:
    """lambda_k(M') <= lambda_k(M) and N_M(lambda) <= N_M'(lambda) on certified values."""
    n = min(base.count, cover.count)
    excess = 0.0
    for i in range(n):
        slack = base.error_bound(i) + cover.error_bound(i) + margin
        excess = max(excess, float(cover.eigenvalues[i] - base.eigenvalues[i]))
        BoundEntry(f"lambda_{i} lifted", float(cover.eigenvalues[i]), float(base.eigenvalues[i]) + slack).require()
    entries = []
    for lam in np.unique(np.round(base.eigenvalues, 12)):
        lam = float(lam)
        if not (base.certifies(lam, margin) and cover.certifies(lam, margin)):
            continue
        try:
            entry = BoundEntry(f"N({lam:.6g})", count_below(base, lam, MODE_CLOSED, margin),
                               count_below(cover, lam, MODE_CLOSED, margin))
        except AmbiguousCountError:
            continue
        entries.append(entry.require())
    return LiftingReport(indices=n, max_excess=excess, entries=tuple(entries))


# -- nodal lifting bound ---------------------------------------------------


@dataclass(frozen=True)
class NumbergReport:
    """Nodal domains of phi, their preimages and the eigenvalue gain they force."""

    value: float
    domains: int
    components: tuple[int, ...]
    sheets: tuple[tuple[int, ...], ...]
    dim_x: int
    dim_x_expected: int
    form_max: float
    integral_residual: float
    counts: dict[str, int]
    propagation: tuple[tuple[float, int], ...]
    entries: tuple[BoundEntry, ...]

    @property
    def gain(self) -> int:
        return sum(j - 1 for j in self.components)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.value,
            "nu": self.domains,
            "J": list(self.components),
            "k_ij": [list(row) for row in self.sheets],
            "gain": self.gain,
            "dim_X": self.dim_x,
            "dim_X_expected": self.dim_x_expected,
            "form_max": self.form_max,
            "integral_residual": self.integral_residual,
            "counts": self.counts,
            "propagation": [{"kappa": k, "gain": g} for k, g in self.propagation],
            "entries": [e.to_dict() for e in self.entries],
        }


def nodal_test_vectors(cov: Cover, d: NodalDecomposition, components: list[list[list[int]]]) -> np.ndarray:
    """Columns phi_ij: p*phi / k_ij on U_ij, zero on the other U_ik, p*phi / |p| elsewhere."""
    lifted = lift(cov, d.vector)
    nv = cov.base.num_vertices
    columns = []
    for dom, comps in zip(d.domains, components):
        over = cov.lift_vertices(dom.vertices)
        for comp in comps:
            vec = lifted / cov.degree
            vec[over] = 0.0
            k_ij = len(comp) // len(dom.vertices)
            vec[comp] = lifted[comp] / k_ij
            columns.append(vec)
    return np.column_stack(columns) if columns else np.zeros((cov.degree * nv, 0))


def _rank(matrix: np.ndarray, rtol: float = 1e-9) -> int:
    if matrix.size == 0:
        return 0
    sv = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(sv > rtol * max(sv[0], 1.0)))


def numberg_check(
    cov: Cover,
    base: Spectrum,
    cover: Spectrum,
    phi: np.ndarray,
    lam: float | None = None,
    margin: float = DEFAULT_COUNT_MARGIN,
    eps_zero: float = DEFAULT_EPS_ZERO,
    samples: int = DEFAULT_INTEGRAL_SAMPLES,
    seed: int | None = DEFAULT_SEED,
    kind: str = LAPLACE_GRAPH,
) -> NumbergReport:
    """N'(lambda-) >= N(lambda-) + sum_i (|J_i| - 1) for the nodal domains U_i of phi."""
    base_op = assemble(cov.base, kind)
    cover_op = assemble(cov.total, kind)
    if lam is None:
        lam = base_op.rayleigh(phi)
    d = nodal_decomposition(cov.base, phi, eps_zero)
    components = [preimage_components(cov, dom.vertices) for dom in d.domains]
    sheets = tuple(tuple(len(comp) // len(dom.vertices) for comp in comps)
                   for dom, comps in zip(d.domains, components))
    for dom, row in zip(d.domains, sheets):
        if sum(row) != cov.degree:
            raise BoundViolationError(f"sheet counts {row} over domain {dom.index} do not sum to {cov.degree}",
                                      claimed=cov.degree, observed=sum(row))
    j_sizes = tuple(len(comps) for comps in components)

    x = nodal_test_vectors(cov, d, components)
    rng = make_rng(seed)
    residual = 0.0
    for _ in range(samples):
        psi = rng.standard_normal(cov.base.num_vertices)
        expected = float(np.dot(d.vector * base_op.mass, psi))
        observed = x.T @ (lift(cov, psi) * cover_op.mass)
        residual = max(residual, float(np.max(np.abs(observed - expected))) if observed.size else 0.0)
    scale = max(1.0, float(np.sqrt(np.dot(d.vector * base_op.mass, d.vector))) * cov.base.num_vertices)
    if residual > 1e-9 * scale:
        raise BoundViolationError(f"test vectors miss the integral identity by {residual:.3e}", claimed=0.0,
                                  observed=residual)
    form = x.T @ (cover_op.stiffness @ x) - lam * (x.T @ (x * cover_op.mass[:, None]))
    form_max = float(np.max(np.linalg.eigvalsh((form + form.T) / 2))) if form.size else 0.0
    if form_max > 1e-8 * max(1.0, abs(lam)):
        _LOGGER.warning("Quadratic form is positive on the test space (%.3e); discrete nodal domains overlap", form_max)

    n_base = count_below(base, lam, MODE_OPEN, margin)
    n_cover = count_below(cover, lam, MODE_OPEN, margin)
    gain = sum(j - 1 for j in j_sizes)
    entries = [BoundEntry("open count gain", n_base + gain, n_cover).require()]

    groups = [subdomain_group(cov.base, dom.vertices, tree=cov.tree) for dom in d.domains]
    simply = sum(1 for words in groups if len(words) == 0)
    entries.append(BoundEntry("simply connected domains", n_base + simply * (cov.degree - 1), n_cover).require())

    stabilizer_gain = 0
    for dom, j, words in zip(d.domains, j_sizes, groups):
        n_orbits = len(orbits(cov.monodromy, words))
        if n_orbits != j:
            raise BoundViolationError(f"domain {dom.index}: {n_orbits} orbits but {j} preimage components",
                                      claimed=n_orbits, observed=j)
        if fixes_all_points(cov.monodromy, words):
            stabilizer_gain += cov.degree - 1
        elif cov.degree > 1 and fixed_identity_coset(cov.monodromy, words):
            stabilizer_gain += 1
    entries.append(BoundEntry("stabilizer gain", n_base + stabilizer_gain, n_cover).require())

    propagation = []
    for kappa in sorted({float(v) for v in base.eigenvalues if v > lam + margin}):
        if not (base.certifies(kappa, margin) and cover.certifies(kappa, margin)):
            break
        try:
            g = count_below(cover, kappa, MODE_OPEN, margin) - count_below(base, kappa, MODE_OPEN, margin)
        except AmbiguousCountError:
            continue
        entries.append(BoundEntry(f"gain at {kappa:.6g}", gain, g).require())
        propagation.append((kappa, g))

    return NumbergReport(
        value=float(lam),
        domains=d.nu,
        components=j_sizes,
        sheets=sheets,
        dim_x=_rank(x),
        dim_x_expected=sum(j_sizes) - d.nu + 1,
        form_max=form_max,
        integral_residual=residual,
        counts={"base_open": n_base, "cover_open": n_cover},
        propagation=tuple(propagation),
        entries=tuple(entries),
    )


@dataclass(frozen=True)
class NonanaReport:
    coset_generators: int
    budget: float
    domain_generators: int
    applicable: bool
    verdict: str

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.coset_generators, "budget": self.budget, "domain_generators": self.domain_generators,
                "applicable": self.applicable, "verdict": self.verdict}


def nonana_check(
    cov: Cover,
    base: Spectrum,
    cover: Spectrum,
    margin: float = DEFAULT_COUNT_MARGIN,
    eps_zero: float = DEFAULT_EPS_ZERO,
    max_degree: int = DEFAULT_MAX_COSET_DEGREE,
) -> NonanaReport:
    """A coset space needing more generators than the best nodal domain of lambda_1 rules out stability."""
    phi = canonical_eigenvector(base, int(base.cluster_ids[1]))
    data = nodal_count_bound_data(nodal_decomposition(cov.base, phi, eps_zero))
    k = min_generators_coset(cov.monodromy, max_degree)
    verdict = stability_verdict(base, cover, 1, margin).verdict
    applicable = k > data.domain_generators
    if applicable and verdict == VERDICT_STABLE:
        raise BoundViolationError(
            f"coset space needs {k} generators, nodal domain has {data.domain_generators}, yet lambda_1 is stable",
            claimed=data.domain_generators + 1,
            observed=k,
        )
    return NonanaReport(k, data.generator_budget, data.domain_generators, applicable, verdict)


# -- Dirichlet estimates ---------------------------------------------------


@dataclass(frozen=True)
class SigmaBound:
    """Upper bound on inf lambda_0(D) over domains D with at most ``ell`` loop generators."""

    ell: int
    value: float
    witness: tuple[int, ...]
    generators: int
    seeds: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"l": self.ell, "sigma": self.value, "witness": list(self.witness), "generators": self.generators,
                "seeds": list(self.seeds)}


def _grow(
    c: SurfaceComplex, op: LaplaceOperator, start: int, ell: int, max_size: int
) -> tuple[float, tuple[int, ...], int]:
    g = c.graph
    region = [start]
    members = {start}
    best = (dirichlet_lambda0(c, region, op=op), tuple(region), 0)
    limit = min(max_size, c.num_vertices - 1)
    while len(region) < limit:
        frontier = {w for v in region for w in g[v] if w not in members}
        ranked = sorted(frontier, key=lambda w: (-sum(1 for u in g[w] if u in members), w))
        for w in ranked:
            gens = len(subdomain_group(c, region + [w]))
            if gens <= ell:
                region.append(w)
                members.add(w)
                value = dirichlet_lambda0(c, region, op=op)
                if value < best[0]:
                    best = (value, tuple(sorted(region)), gens)
                break
        else:
            break
    return best


def sigma_upper_bounds(
    c: SurfaceComplex,
    ell: int,
    seeds: int = DEFAULT_SIGMA_SEEDS,
    max_size: int = DEFAULT_SIGMA_MAX_SIZE,
    seed: int | None = DEFAULT_SEED,
    kind: str = LAPLACE_GRAPH,
) -> SigmaBound:
    """Greedy region growth from seeded start vertices, keeping the smallest Dirichlet eigenvalue."""
    if ell < 0:
        raise InvalidParamsError("generator budget must be non-negative")
    op = assemble(c, kind)
    rng = make_rng(seed)
    starts = sorted(int(v) for v in rng.choice(c.num_vertices, size=min(seeds, c.num_vertices), replace=False))
    best = min((_grow(c, op, start, ell, max_size) for start in starts), key=lambda found: found[0])
    _LOGGER.debug("sigma_%d <= %.6g on %d vertices", ell, best[0], len(best[1]))
    return SigmaBound(ell=ell, value=best[0], witness=best[1], generators=best[2], seeds=tuple(starts))


@dataclass(frozen=True)
class NumberdReport:
    k: int
    ell: int
    sigma: float
    observed: int
    entries: tuple[BoundEntry, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "l": self.ell, "sigma": self.sigma, "observed": self.observed,
                "entries": [e.to_dict() for e in self.entries]}


def _non_adjacent(c: SurfaceComplex, family: Sequence[SigmaBound]) -> None:
    seen: set[int] = set()
    for member in family:
        verts = set(member.witness)
        if verts & seen:
            raise InvalidParamsError("domains of the family overlap")
        seen |= verts
    owner = {v: i for i, member in enumerate(family) for v in member.witness}
    for eid in induced_edges(c, owner):
        u, v = c.edges[eid]
        if owner[u] != owner[v]:
            raise InvalidParamsError(f"domains {owner[u]} and {owner[v]} are adjacent along edge {eid}")


def numberd_check(
    cov: Cover,
    cover: Spectrum,
    sigma: SigmaBound,
    k: int | None = None,
    family: Sequence[SigmaBound] = (),
    margin: float = DEFAULT_COUNT_MARGIN,
    max_degree: int = DEFAULT_MAX_COSET_DEGREE,
) -> NumberdReport:
    """At least k - l + 1 cover eigenvalues in [0, sigma_l]."""
    if k is None:
        k = min_generators_coset(cov.monodromy, max_degree)
    observed = count_below(cover, sigma.value, MODE_CLOSED, margin)
    entries = [BoundEntry("coset generator bound", max(k - sigma.ell + 1, 1), observed).require()]
    if sigma.witness:
        pieces = len(preimage_components(cov, sigma.witness))
        entries.append(BoundEntry("witness preimage components", pieces, observed).require())
    if family:
        _non_adjacent(cov.base, family)
        top = max(member.value for member in family)
        total = count_below(cover, top, MODE_CLOSED, margin)
        claimed = sum(max(k - len(subdomain_group(cov.base, m.witness, tree=cov.tree)) + 1, 1) for m in family)
        entries.append(BoundEntry("disjoint family", claimed, total).require())
        pieces = sum(len(preimage_components(cov, m.witness)) for m in family)
        entries.append(BoundEntry("family preimage components", pieces, total).require())
    return NumberdReport(k=k, ell=sigma.ell, sigma=sigma.value, observed=observed, entries=tuple(entries))


# -- towers ----------------------------------------------------------------


@dataclass(frozen=True)
class TowerTrajectory:
    index: int
    roof: float | None
    values: tuple[float, ...]
    open_counts: tuple[int, ...]
    diameters: tuple[float, ...]
    entries: tuple[BoundEntry, ...]
    roof_tol: float = 0.0

    @property
    def composite_unstable(self) -> tuple[bool, ...]:
        return tuple(n > self.open_counts[0] for n in self.open_counts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "l": self.index,
            "roof": self.roof,
            "roof_tol": self.roof_tol,
            "values": list(self.values),
            "open_counts": list(self.open_counts),
            "composite_unstable": list(self.composite_unstable),
            "fiber_diameters": list(self.diameters),
            "entries": [e.to_dict() for e in self.entries],
        }


def tower_experiment(
    t: Tower,
    index: int,
    roof: float | None = None,
    margin: float = DEFAULT_COUNT_MARGIN,
    kind: str = LAPLACE_GRAPH,
    *,
    roof_tol: float = 0.0,
    **solver: Any,
) -> TowerTrajectory:
    """lambda_l along the levels of a tower, with per-stage counts at lambda_l of the base.

    With a roof, the final level must satisfy lambda_l <= roof + roof_tol up to the
    solver error bound. Fiber diameters over vertex 0 must never shrink.
    """
    if t.height < 1:
        raise InvalidParamsError("tower needs at least one cover")
    values: list[float] = []
    spectra: list[Spectrum] = []
    for level in range(t.height + 1):
        op = assemble(t.complex(level), kind)
        if index >= op.dim:
            raise InvalidParamsError(f"level {level} has only {op.dim} eigenvalues")
        s = lowest_eigenpairs(op, index + 1, **solver)
        values.append(float(s.eigenvalues[index]))
        spectra.append(s)
    lam0 = values[0]
    counts = []
    for level, s in enumerate(spectra):
        if not s.certifies(lam0, margin):
            s = spectrum_past(assemble(t.complex(level), kind), lam0, 2 * s.count, margin, **solver)
        counts.append(count_below(s, lam0, MODE_OPEN, margin))

    entries = []
    for level in range(1, len(values)):
        slack = spectra[level].error_bound(index) + spectra[level - 1].error_bound(index) + margin
        entries.append(BoundEntry(f"level {level} lambda_{index} nonincreasing", values[level],
                                  values[level - 1] + slack).require())
        entries.append(BoundEntry(f"level {level} open count", counts[level - 1], counts[level]).require())
        if counts[level] > counts[level - 1]:
            for later in range(level, len(counts)):
                entries.append(BoundEntry(f"composite {later} unstable", counts[0] + 1, counts[later]).require())
    if roof is not None:
        ceiling = roof + roof_tol + spectra[-1].error_bound(index)
        entries.append(BoundEntry("final level below roof", values[-1], ceiling).require())
    diameters = tuple(fiber_diameter(t, level, 0) for level in range(t.height + 1))
    for level in range(1, len(diameters)):
        entries.append(BoundEntry(f"level {level} fiber diameter nondecreasing", diameters[level - 1],
                                  diameters[level]).require())
    _LOGGER.debug("Tower lambda_%d trajectory %s", index, values)
    return TowerTrajectory(index=index, roof=roof, values=tuple(values), open_counts=tuple(counts),
                           diameters=diameters, entries=tuple(entries), roof_tol=roof_tol)


# -- counting --------------------------------------------------------------


COUNT_ASSUMPTION = (
    "every index-n subgroup has a strictly lambda_1-unstable double cover on a suitable metric; "
    "analytic input, not recomputed"
)


@dataclass(frozen=True)
class CountLedger:
    n: int
    containment: dict[str, Any]
    labeled_n: int
    labeled_2n: int
    assumptions: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {**self.containment, "labeled_n": self.labeled_n, "labeled_2n": self.labeled_2n,
                "assumptions": list(self.assumptions)}


def count_experiment(
    p: Presentation,
    n: int,
    max_index_free: int = DEFAULT_MAX_INDEX_FREE,
    max_index_relator: int = DEFAULT_MAX_INDEX_RELATOR,
) -> CountLedger:
    """a(n), a(2n) and the implied lower bound u(2n) >= a(n) / (2n - 1)."""
    if n < 1:
        raise InvalidParamsError("index must be positive")
    bounds = {"max_index_free": max_index_free, "max_index_relator": max_index_relator}
    report = intermediate_count_check(p, n, **bounds)
    return CountLedger(
        n=n,
        containment=report.to_dict(),
        labeled_n=labeled_action_count(p, n, **bounds),
        labeled_2n=labeled_action_count(p, 2 * n, **bounds),
        assumptions=(COUNT_ASSUMPTION,),
    )


# -- Weyl ratio ------------------------------------------------------------


@dataclass(frozen=True)
class WeylCurve:
    points: tuple[tuple[float, int | None, int | None], ...]
    degree: int

    @property
    def ratios(self) -> list[float | None]:
        return [None if n is None or n2 is None or n == 0 else n2 / n for _, n, n2 in self.points]

    @property
    def first_above_one(self) -> float | None:
        for (lam, _, _), r in zip(self.points, self.ratios):
            if r is not None and r > 1:
                return lam
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "degree": self.degree,
            "points": [{"lambda": lam, "base": n, "cover": n2, "ratio": r}
                       for (lam, n, n2), r in zip(self.points, self.ratios)],
            "first_above_one": self.first_above_one,
        }


def weyl_ratio(
    base: Spectrum, cover: Spectrum, grid: Sequence[float], degree: int = 1, margin: float = DEFAULT_COUNT_MARGIN
) -> WeylCurve:
    """N'(lambda) / N(lambda) over a grid; uncertified or ambiguous points are left empty."""
    points = []
    for lam in grid:
        lam = float(lam)
        if not (base.certifies(lam, margin) and cover.certifies(lam, margin)):
            points.append((lam, None, None))
            continue
        try:
            points.append((lam, count_below(base, lam, MODE_CLOSED, margin),
                           count_below(cover, lam, MODE_CLOSED, margin)))
        except AmbiguousCountError:
            points.append((lam, None, None))
    return WeylCurve(points=tuple(points), degree=degree)
