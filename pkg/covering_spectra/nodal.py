"""Nodal domains of eigenvectors, their topology, and the covers they certify."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .const import DEFAULT_EPS_ZERO, MAX_ZERO_FRACTION, NON_ORIENTABLE
from .covering import abelian_cover_spec, cyclic_cover_spec
from .exceptions import (
    AllZeroError,
    BoundViolationError,
    InvalidParamsError,
    InvalidSignatureError,
    NoCocycleError,
    SingleDomainError,
    UnreliableDecompositionError,
)
from .homology import cohomology_basis, relation_matrix, subdomain_loops
from .models import CoverSpec, DomainTopology, SurfaceComplex, signature_mu
from .surface import classify_subsurface, induced_components, spanning_tree

_LOGGER = logging.getLogger(__name__)

MAX_PLAN_DEGREE = 64


@dataclass(frozen=True)
class NodalDomain:
    index: int
    sign: int
    vertices: tuple[int, ...]
    topology: DomainTopology

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.index, "sign": self.sign, "vertices": list(self.vertices),
                "topology": self.topology.to_dict()}


@dataclass(frozen=True)
class NodalDecomposition:
    """Strong nodal domains of a vector and its relative zero set."""

    vector: np.ndarray
    eps_zero: float
    zero_set: tuple[int, ...]
    domains: tuple[NodalDomain, ...]
    closed: bool
    euler: int

    @property
    def nu(self) -> int:
        return len(self.domains)

    @property
    def single_sign(self) -> bool:
        """Every domain has the same sign, as for a ground state."""
        return len({d.sign for d in self.domains}) == 1

    def domain(self, index: int) -> NodalDomain:
        if not 0 <= index < self.nu:
            raise InvalidParamsError(f"no nodal domain {index}; there are {self.nu}")
        return self.domains[index]

    def to_dict(self) -> dict[str, Any]:
        return {
            "nu": self.nu,
            "single_sign": self.single_sign,
            "eps_zero": self.eps_zero,
            "zero_set": list(self.zero_set),
            "domains": [d.to_dict() for d in self.domains],
        }


def nodal_decomposition(
    c: SurfaceComplex, phi: np.ndarray, eps_zero: float = DEFAULT_EPS_ZERO
) -> NodalDecomposition:
    """Split the vertices by the sign of ``phi``; |phi| <= eps * max|phi| is zero."""
    if not 0 < eps_zero < 0.1:
        raise InvalidParamsError("eps_zero must lie in (0, 0.1)")
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (c.num_vertices,):
        raise InvalidParamsError(f"vector of length {phi.shape} for {c.num_vertices} vertices")
    peak = float(np.max(np.abs(phi)))
    if peak == 0.0:
        raise AllZeroError("vector vanishes identically")
    zero = np.abs(phi) <= eps_zero * peak
    if zero.sum() > MAX_ZERO_FRACTION * c.num_vertices:
        raise UnreliableDecompositionError(f"{int(zero.sum())} of {c.num_vertices} vertices are in the zero set")
    signed: list[tuple[int, list[int]]] = []
    for sign in (1, -1):
        members = np.flatnonzero(~zero & (np.sign(phi) == sign))
        signed += [(sign, comp) for comp in induced_components(c, members.tolist())]
    signed.sort(key=lambda item: item[1][0])
    domains = tuple(
        NodalDomain(index=i, sign=sign, vertices=tuple(comp), topology=classify_subsurface(c, comp))
        for i, (sign, comp) in enumerate(signed)
    )
    _LOGGER.debug("Nodal decomposition: %d domains, %d zero vertices", len(domains), int(zero.sum()))
    if len({d.sign for d in domains}) == 1:
        _LOGGER.debug("All %d nodal domains share one sign", len(domains))
    return NodalDecomposition(
        vector=phi,
        eps_zero=eps_zero,
        zero_set=tuple(int(v) for v in np.flatnonzero(zero)),
        domains=domains,
        closed=not c.is_graph and not c.boundary_edges,
        euler=c.euler_characteristic(),
    )


@dataclass(frozen=True)
class NodalBoundData:
    nu: int
    chi_s: int
    best_domain: int
    chi_u: int
    surface_generators: int
    generator_budget: float
    domain_generators: int

    @property
    def within_budget(self) -> bool:
        return self.domain_generators <= self.generator_budget

    def to_dict(self) -> dict[str, Any]:
        return {
            "nu": self.nu,
            "chi_s": self.chi_s,
            "best_domain": self.best_domain,
            "chi_u": self.chi_u,
            "surface_generators": self.surface_generators,
            "generator_budget": self.generator_budget,
            "domain_generators": self.domain_generators,
            "within_budget": self.within_budget,
        }


def nodal_count_bound_data(d: NodalDecomposition) -> NodalBoundData:
    """Domain of largest Euler characteristic and the chi(S)/nu <= chi(U) <= 1 check."""
    if d.nu < 2:
        raise SingleDomainError("vector does not change sign")
    best = max(d.domains, key=lambda dom: (dom.topology.euler, -dom.index))
    chi_u = best.topology.euler
    if not d.euler / d.nu <= chi_u <= 1:
        raise BoundViolationError(
            f"best domain has chi={chi_u}, outside [{d.euler}/{d.nu}, 1]", claimed=d.euler / d.nu, observed=chi_u
        )
    surface_generators = 2 - d.euler if d.closed else 1 - d.euler
    budget = surface_generators / 2 if d.closed else (surface_generators + 1) / 2
    return NodalBoundData(
        nu=d.nu,
        chi_s=d.euler,
        best_domain=best.index,
        chi_u=chi_u,
        surface_generators=surface_generators,
        generator_budget=budget,
        domain_generators=1 - chi_u,
    )


def mu_formula(g: int, k: int, ell: int, orientable: bool) -> int:
    """Rank of the intersection map of a complement with signature (g, k, l)."""
    if min(g, k, ell) < 0 or k < 1 or (not orientable and g < 1):
        raise InvalidSignatureError(f"signature (g={g}, k={k}, l={ell}, orientable={orientable}) is not admissible")
    mu = signature_mu(g, k, ell, orientable)
    chi = 2 - (2 * g if orientable else g) - k - ell
    if mu < -chi or (mu == -chi) != (ell >= 1):
        raise BoundViolationError(f"mu={mu} against chi={chi} with l={ell}", claimed=-chi, observed=mu)
    return mu


# -- cocycles --------------------------------------------------------------


@dataclass(frozen=True)
class IntersectionCocycle:
    """Closed cochain supported off a nodal domain."""

    values: np.ndarray
    component: int
    modulus: int | None

    def to_dict(self) -> dict[str, Any]:
        support = np.flatnonzero(self.values)
        return {
            "component": self.component,
            "modulus": self.modulus,
            "support": {str(int(e)): int(self.values[e]) for e in support},
        }


@dataclass(frozen=True)
class ComplementComponent:
    index: int
    vertices: tuple[int, ...]
    topology: DomainTopology
    rank: int

    @property
    def mismatch(self) -> bool:
        return self.topology.mu is not None and self.topology.mu != self.rank

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.index, "size": len(self.vertices), "topology": self.topology.to_dict(), "rank": self.rank,
                "mismatch": self.mismatch}


def _normalise_off(c: SurfaceComplex, omega: np.ndarray, outside: list[int], modulus: int | None) -> np.ndarray:
    """Subtract a coboundary so ``omega`` vanishes on every edge inside ``outside``."""
    tree = spanning_tree(c, outside)
    f = np.zeros(c.num_vertices, dtype=np.int64)
    for v in tree.order[1:]:
        dart = tree.parent_dart[v]
        eid = dart if dart >= 0 else ~dart
        f[v] = f[c.dart_tail(dart)] + (omega[eid] if dart >= 0 else -omega[eid])
    ea = c.edge_array
    out = omega - (f[ea[:, 1]] - f[ea[:, 0]])
    return out % modulus if modulus else out


def _complement(
    c: SurfaceComplex, d: NodalDecomposition, domain_id: int
) -> tuple[list[ComplementComponent], list[IntersectionCocycle]]:
    dom = d.domain(domain_id)
    inside = set(dom.vertices)
    rest = [v for v in range(c.num_vertices) if v not in inside]
    if not rest:
        raise InvalidParamsError("nodal domain has an empty complement")
    modulus = 2 if c.orientation == NON_ORIENTABLE else None
    relations = relation_matrix(c)
    components: list[ComplementComponent] = []
    cocycles: list[IntersectionCocycle] = []
    for j, comp in enumerate(induced_components(c, rest)):
        members = set(comp)
        outside = [v for v in range(c.num_vertices) if v not in members]
        killed = subdomain_loops(c, outside, relations)
        basis = cohomology_basis(c, modulus, killed, relations)
        for omega in basis:
            cocycles.append(IntersectionCocycle(_normalise_off(c, omega, outside, modulus), j, modulus))
        record = ComplementComponent(index=j, vertices=tuple(comp), topology=classify_subsurface(c, comp),
                                     rank=len(basis))
        if record.mismatch:
            _LOGGER.warning("Complement component %d: %d cocycles but mu=%s", j, record.rank, record.topology.mu)
        components.append(record)
    return components, cocycles


def complement_components(c: SurfaceComplex, d: NodalDecomposition, domain_id: int) -> list[ComplementComponent]:
    return _complement(c, d, domain_id)[0]


def intersection_cocycles(c: SurfaceComplex, d: NodalDecomposition, domain_id: int) -> list[IntersectionCocycle]:
    """Closed cocycles dual to the circles of each complement component of a domain.

    Integer coefficients on orientable complexes, Z/2 otherwise. Each
    cocycle vanishes on every edge with both ends outside its component.
    """
    return _complement(c, d, domain_id)[1]


# -- cover plans -----------------------------------------------------------


@dataclass(frozen=True)
class UnstableCoverPlan:
    """Cyclic cover along one intersection cocycle, with predicted eigenvalue gains."""

    degree: int
    domain: int
    cocycles: tuple[IntersectionCocycle, ...]
    spec: CoverSpec
    full_spec: CoverSpec | None
    mu_used: int
    eps_zero: float
    eps_sensitive: bool

    @property
    def predicted_gain(self) -> int:
        return self.degree - 1

    @property
    def predicted_gain_full(self) -> int:
        return self.mu_used * (self.degree - 1)

    def predicted_bound(self, base_open_count: int) -> dict[str, int]:
        return {
            "single": base_open_count + self.predicted_gain,
            "full": base_open_count + self.predicted_gain_full,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "degree": self.degree,
            "domain": self.domain,
            "mu_used": self.mu_used,
            "eps_zero": self.eps_zero,
            "eps_sensitive": self.eps_sensitive,
            "predicted_gain": self.predicted_gain,
            "predicted_gain_full": self.predicted_gain_full,
            "cocycles": [w.to_dict() for w in self.cocycles],
            "cover": self.spec.to_dict(),
            "full_cover": self.full_spec.to_dict() if self.full_spec else None,
        }


def _mu_sum(c: SurfaceComplex, phi: np.ndarray, eps: float, anchor: int) -> int | None:
    try:
        d = nodal_decomposition(c, phi, eps)
    except (UnreliableDecompositionError, AllZeroError):
        return None
    for dom in d.domains:
        if anchor in dom.vertices:
            inside = set(dom.vertices)
            rest = [v for v in range(c.num_vertices) if v not in inside]
            return sum(classify_subsurface(c, comp).mu or 0 for comp in induced_components(c, rest))
    return None


def unstable_cover_plan(
    c: SurfaceComplex, d: NodalDecomposition, domain_id: int, n: int, eps_alternates: Sequence[float] | None = None
) -> UnstableCoverPlan:
    """Degree-n cyclic cover along the first intersection cocycle of a domain."""
    if n < 2:
        raise InvalidParamsError("plan degree must be at least 2")
    cocycles = intersection_cocycles(c, d, domain_id)
    if not cocycles:
        raise NoCocycleError(
            f"domain {domain_id} has no complement cocycle; every complement is a disc or exit annulus"
        )
    modulus = cocycles[0].modulus
    if modulus is not None and n != modulus:
        raise InvalidParamsError(f"mod-{modulus} cocycles only define degree-{modulus} covers")
    spec = cyclic_cover_spec(c, cocycles[0].values, n)
    full = None
    if n ** len(cocycles) <= MAX_PLAN_DEGREE:
        full = abelian_cover_spec(c, [w.values for w in cocycles], [n] * len(cocycles))

    anchor = d.domain(domain_id).vertices[0]
    alternates = eps_alternates if eps_alternates is not None else (d.eps_zero / 10, min(d.eps_zero * 10, 0.099))
    reference = _mu_sum(c, d.vector, d.eps_zero, anchor)
    sensitive = any(_mu_sum(c, d.vector, eps, anchor) != reference for eps in alternates)
    if sensitive:
        _LOGGER.warning("Complement mu of domain %d changes with eps_zero around %.1e", domain_id, d.eps_zero)
    return UnstableCoverPlan(
        degree=n,
        domain=domain_id,
        cocycles=tuple(cocycles),
        spec=spec,
        full_spec=full,
        mu_used=len(cocycles),
        eps_zero=d.eps_zero,
        eps_sensitive=sensitive,
    )
