"""Command-line entry point.

Subcommands are grouped by layer (surface, cover, group, spec, nodal, stab).
Every command reads JSON inputs, writes one artifact, and maps domain
errors to exit codes: 0 ok, 1 bound violated, 2 usage, 3 ambiguous count.
"""
from __future__ import annotations

import argparse
import logging
import re
from collections.abc import Sequence
from typing import Any

import numpy as np

from .config import RunConfig, load_config
from .const import (
    COEFFS_Z,
    COEFFS_Z2,
    EXIT_AMBIGUOUS,
    EXIT_OK,
    FORMAT_CSV,
    FORMAT_JSON,
    LAPLACE_COTANGENT,
    LAPLACE_GRAPH,
    PRESET_KINDS,
    VERDICT_AMBIGUOUS,
)
from .covering import Cover, abelian_tower, build_cover, cyclic_cover_spec, fiber_diameter, preimage_components
from .exceptions import InvalidParamsError, UsageError
from .groups import (
    abelian_mu,
    brute_force_abelian_mu,
    enumerate_index_n,
    fixed_identity_coset,
    fixes_all_points,
    hall_subgroup_counts,
    labeled_action_count,
    orbit_lower_bound_check,
    orbits,
)
from .helpers import cli_command, make_rng
from .homology import cohomology_basis, homology_h1, quotient_by_subdomain
from .models import AbelianInvariants, CosetAction, CoverSpec, Presentation, SubgroupWordSet, SurfaceComplex
from .nodal import complement_components, nodal_count_bound_data, nodal_decomposition, unstable_cover_plan
from .reports import envelope, read_payload, render, write_output
from .respec import random_respec_instance, respec_check, trivial_respec_instances
from .scheduler import batch_summary, load_jobs, run_batch
from .spectra import Spectrum, assemble, canonical_eigenvector, export_triplets, lowest_eigenpairs
from .stability import (
    count_experiment,
    lifting_check,
    monotone_instability_check,
    nonana_check,
    numberd_check,
    numberg_check,
    sigma_upper_bounds,
    spectrum_past,
    stability_verdict,
    tower_experiment,
    weyl_ratio,
)
from .surface import build_preset, classify_subsurface, euler_characteristic

_LOGGER = logging.getLogger(__name__)


# -- argument parsing helpers ----------------------------------------------


def _parse_ints(text: str) -> list[int]:
    """``"0,2,5-7"`` -> [0, 2, 5, 6, 7]."""
    out: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if span := re.fullmatch(r"(\d+)-(\d+)", part):
            out.extend(range(int(span[1]), int(span[2]) + 1))
            continue
        try:
            out.append(int(part))
        except ValueError as err:
            raise UsageError(f"not an integer list: {text!r}") from err
    return out


def _parse_words(text: str) -> SubgroupWordSet:
    """``"1,2,-1;2"`` -> words (1, 2, -1) and (2,)."""
    words = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        try:
            words.append(tuple(int(x) for x in part.split(",") if x.strip()))
        except ValueError as err:
            raise UsageError(f"not a word list: {text!r}") from err
    return SubgroupWordSet.from_words(words)


def _parse_target(text: str) -> int | tuple[float, float]:
    """``lambda3`` or ``3`` for lambda_3; ``a,b`` for an interval."""
    try:
        if "," in text:
            lo, hi = (float(x) for x in text.split(","))
            return lo, hi
        return int(text.removeprefix("lambda"))
    except ValueError as err:
        raise UsageError(f"target must be lambdaK, K or lo,hi; got {text!r}") from err


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _config(args: argparse.Namespace) -> RunConfig:
    return load_config(args.config).merged(
        {
            "m": args.m,
            "tol": args.tol,
            "seed": args.seed,
            "margin": args.margin,
            "eps_zero": args.eps_zero,
            "laplacian": args.laplacian,
            "output": args.output,
            "format": args.format,
            "jobs": args.jobs,
        }
    )


def _emit(cfg: RunConfig, kind: str, result: Any) -> None:
    write_output(render(envelope(kind, result, cfg), cfg.format), cfg.output)


# -- loading ---------------------------------------------------------------


def _load_complex(path: str) -> SurfaceComplex:
    return SurfaceComplex.from_dict(read_payload(path))


def _load_cover(args: argparse.Namespace) -> Cover:
    payload = read_payload(args.cover)
    spec = CoverSpec.from_dict(payload["spec"] if "spec" in payload else payload)
    if args.base:
        base = _load_complex(args.base)
    elif isinstance(payload.get("base"), dict):
        base = SurfaceComplex.from_dict(payload["base"])
    else:
        raise UsageError("cover file has no base complex; pass --base")
    return build_cover(base, spec)


def _load_presentation(args: argparse.Namespace) -> Presentation:
    if args.presentation:
        return Presentation.from_dict(read_payload(args.presentation))
    if args.free is not None:
        return Presentation.free(args.free)
    if args.surface is not None:
        return Presentation.surface(args.surface)
    raise UsageError("one of --presentation, --free or --surface is required")


def _spectrum(c: SurfaceComplex, cfg: RunConfig, m: int | None = None, past: float | None = None) -> Spectrum:
    op = assemble(c, cfg.laplacian)
    m = min(m or cfg.m, op.dim)
    if past is not None:
        return spectrum_past(op, past, m, cfg.margin, **cfg.solver)
    return lowest_eigenpairs(op, m, **cfg.solver)


def _eigenvector(s: Spectrum, index: int, cfg: RunConfig) -> np.ndarray:
    if not 0 <= index < s.count:
        raise InvalidParamsError(f"eigenvector {index} is not among {s.count} computed pairs")
    return canonical_eigenvector(s, int(s.cluster_ids[index]), seed=cfg.seed)


# -- surface ---------------------------------------------------------------


@cli_command
def _cmd_surface_make(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = build_preset(args.kind, _parse_ints(args.params))
    _emit(cfg, "complex", c.to_dict())
    return EXIT_OK


@cli_command
def _cmd_surface_classify(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    if args.vertices:
        result: dict[str, Any] = classify_subsurface(c, _parse_ints(args.vertices)).to_dict()
    else:
        result = {
            "chi": euler_characteristic(c),
            "orientation": c.orientation,
            "boundary_edges": len(c.boundary_edges),
            "connected": c.is_connected(),
        }
    _emit(cfg, "classification", result)
    return EXIT_OK


@cli_command
def _cmd_surface_homology(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    if args.subdomain:
        inv = quotient_by_subdomain(c, _parse_ints(args.subdomain), args.coeffs)
    else:
        inv = homology_h1(c, args.coeffs)
    _emit(cfg, "homology", inv.to_dict())
    return EXIT_OK


# -- cover -----------------------------------------------------------------


def _cover_result(cov: Cover) -> dict[str, Any]:
    return {
        "base": cov.base.to_dict(),
        "spec": cov.spec.to_dict(),
        "degree": cov.degree,
        "connected": cov.connected,
        "total": {"vertices": cov.total.num_vertices, "edges": cov.total.num_edges, "faces": cov.total.num_faces,
                  "name": cov.total.name},
    }


@cli_command
def _cmd_cover_build(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    if args.spec:
        spec = CoverSpec.from_dict(read_payload(args.spec))
    elif args.cyclic:
        basis = cohomology_basis(c)
        if not 0 <= args.cocycle < len(basis):
            raise InvalidParamsError(f"cocycle {args.cocycle} out of range; H^1 has rank {len(basis)}")
        spec = cyclic_cover_spec(c, basis[args.cocycle], args.cyclic)
    else:
        raise UsageError("one of --spec or --cyclic is required")
    _emit(cfg, "cover", _cover_result(build_cover(c, spec)))
    return EXIT_OK


@cli_command
def _cmd_cover_components(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cov = _load_cover(args)
    comps = preimage_components(cov, _parse_ints(args.vertices))
    _emit(cfg, "components", {"count": len(comps), "components": comps})
    return EXIT_OK


@cli_command
def _cmd_cover_tower(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    tower = abelian_tower(c, cohomology_basis(c), _parse_ints(args.schedule))
    levels = []
    for k in range(tower.height + 1):
        level = tower.complex(k)
        levels.append({
            "label": tower.labels[k - 1] if k else "",
            "degree": tower.degree(k),
            "vertices": level.num_vertices,
            "edges": level.num_edges,
            "fiber_diameter": fiber_diameter(tower, k, 0),
        })
    _emit(cfg, "tower", {"levels": levels})
    return EXIT_OK


# -- group -----------------------------------------------------------------


@cli_command
def _cmd_group_enum(args: argparse.Namespace) -> int:
    cfg = _config(args)
    p = _load_presentation(args)
    actions = enumerate_index_n(p, args.index, **cfg.enumeration)
    _emit(cfg, "subgroups", {
        "index": args.index,
        "count": len(actions),
        "labeled": labeled_action_count(p, args.index, **cfg.enumeration),
        "actions": [a.to_dict() for a in actions],
    })
    return EXIT_OK


@cli_command
def _cmd_group_orbits(args: argparse.Namespace) -> int:
    cfg = _config(args)
    a = CosetAction.from_dict(read_payload(args.action))
    gens = _parse_words(args.words)
    _emit(cfg, "orbits", {
        "orbits": orbits(a, gens),
        "fixes_basepoint": fixed_identity_coset(a, gens),
        "fixes_all": fixes_all_points(a, gens),
        "bound": orbit_lower_bound_check(a, gens, cfg.max_coset_degree).to_dict(),
    })
    return EXIT_OK


@cli_command
def _cmd_group_mu(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.factors:
        inv = AbelianInvariants.from_factors(_parse_ints(args.factors))
    elif args.complex:
        inv = homology_h1(_load_complex(args.complex))
    else:
        raise UsageError("one of --factors or --complex is required")
    result: dict[str, Any] = {"invariants": inv.to_dict(), "mu": abelian_mu(inv)}
    if args.brute:
        result["brute_force"] = brute_force_abelian_mu(inv.torsion)
    _emit(cfg, "abelian_mu", result)
    return EXIT_OK


@cli_command
def _cmd_group_count(args: argparse.Namespace) -> int:
    cfg = _config(args)
    p = _load_presentation(args)
    counts = [len(enumerate_index_n(p, n, **cfg.enumeration)) for n in range(1, args.index + 1)]
    result: dict[str, Any] = {"counts": counts}
    if not p.relators:
        result["hall"] = hall_subgroup_counts(p.rank, args.index)
    _emit(cfg, "subgroup_counts", result)
    return EXIT_OK


# -- spectra ---------------------------------------------------------------


@cli_command
def _cmd_spec_compute(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if not (args.cover or args.complex):
        raise UsageError("one of --complex or --cover is required")
    c = _load_cover(args).total if args.cover else _load_complex(args.complex)
    _emit(cfg, "spectrum", _spectrum(c, cfg).to_dict())
    return EXIT_OK


@cli_command
def _cmd_spec_export(args: argparse.Namespace) -> int:
    cfg = _config(args)
    op = assemble(_load_complex(args.complex), cfg.laplacian)
    _emit(cfg, "triplets", {"laplacian": cfg.laplacian, "dim": op.dim, "triplets": export_triplets(op)})
    return EXIT_OK


# -- nodal -----------------------------------------------------------------


@cli_command
def _cmd_nodal_analyze(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    phi = _eigenvector(_spectrum(c, cfg, m=max(cfg.m, args.index + 2)), args.index, cfg)
    d = nodal_decomposition(c, phi, cfg.eps_zero)
    result = d.to_dict()
    result["bound"] = nodal_count_bound_data(d).to_dict() if d.nu >= 2 else None
    result["complements"] = {
        str(dom.index): [comp.to_dict() for comp in complement_components(c, d, dom.index)]
        for dom in d.domains
    } if d.nu >= 2 else {}
    _emit(cfg, "nodal", result)
    return EXIT_OK


@cli_command
def _cmd_nodal_plan(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    phi = _eigenvector(_spectrum(c, cfg, m=max(cfg.m, args.index + 2)), args.index, cfg)
    d = nodal_decomposition(c, phi, cfg.eps_zero)
    _emit(cfg, "cover_plan", unstable_cover_plan(c, d, args.domain, args.degree).to_dict())
    return EXIT_OK


# -- stability -------------------------------------------------------------


def _pair(args: argparse.Namespace, cfg: RunConfig, index: int) -> tuple[Cover, Spectrum, Spectrum]:
    cov = _load_cover(args)
    base = _spectrum(cov.base, cfg, m=max(cfg.m, index + 2))
    if index >= base.count:
        raise InvalidParamsError(f"lambda_{index} is not among {base.count} base eigenvalues")
    lam = float(base.eigenvalues[index])
    if not base.certifies(lam, cfg.margin):
        base = _spectrum(cov.base, cfg, m=base.count, past=lam)
    return cov, base, _spectrum(cov.total, cfg, past=lam)


@cli_command
def _cmd_stab_verdict(args: argparse.Namespace) -> int:
    cfg = _config(args)
    target = _parse_target(args.target)
    if isinstance(target, tuple):
        cov = _load_cover(args)
        base = _spectrum(cov.base, cfg, past=target[1])
        cover = _spectrum(cov.total, cfg, past=target[1])
    else:
        cov, base, cover = _pair(args, cfg, target)
    report = stability_verdict(base, cover, target, cfg.margin)
    _emit(cfg, "verdict", report.to_dict())
    return EXIT_AMBIGUOUS if report.verdict == VERDICT_AMBIGUOUS else EXIT_OK


@cli_command
def _cmd_stab_numberg(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cov, base, cover = _pair(args, cfg, args.index)
    phi = _eigenvector(base, args.index, cfg)
    lam = float(base.eigenvalues[args.index])
    report = numberg_check(cov, base, cover, phi, lam, cfg.margin, cfg.eps_zero, seed=cfg.seed, kind=cfg.laplacian)
    _emit(cfg, "numberg", report.to_dict())
    return EXIT_OK


@cli_command
def _cmd_stab_numberd(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cov = _load_cover(args)
    sigma = sigma_upper_bounds(cov.base, args.ell, seed=cfg.seed, kind=cfg.laplacian)
    cover = _spectrum(cov.total, cfg, past=sigma.value)
    report = numberd_check(cov, cover, sigma, margin=cfg.margin, max_degree=cfg.max_coset_degree)
    _emit(cfg, "numberd", {**report.to_dict(), "witness": sigma.to_dict()})
    return EXIT_OK


@cli_command
def _cmd_stab_sigma(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    _emit(cfg, "sigma", sigma_upper_bounds(c, args.ell, seed=cfg.seed, kind=cfg.laplacian).to_dict())
    return EXIT_OK


@cli_command
def _cmd_stab_tower(args: argparse.Namespace) -> int:
    cfg = _config(args)
    c = _load_complex(args.complex)
    tower = abelian_tower(c, cohomology_basis(c), _parse_ints(args.schedule))
    result = tower_experiment(tower, args.index, args.roof, cfg.margin, cfg.laplacian, roof_tol=args.roof_tol,
                              **cfg.solver)
    _emit(cfg, "tower", result.to_dict())
    return EXIT_OK


@cli_command
def _cmd_stab_count(args: argparse.Namespace) -> int:
    cfg = _config(args)
    ledger = count_experiment(_load_presentation(args), args.index, **cfg.enumeration)
    _emit(cfg, "count", ledger.to_dict())
    return EXIT_OK


@cli_command
def _cmd_stab_respec(args: argparse.Namespace) -> int:
    cfg = _config(args)
    reports = [respec_check(inst).to_dict() for inst in trivial_respec_instances()]
    base_seed = cfg.seed or 0
    for i in range(args.random):
        inst = random_respec_instance(make_rng(base_seed + i), args.dim, seed=base_seed + i)
        reports.append(respec_check(inst).to_dict())
    _emit(cfg, "respec", {"instances": reports, "passed": all(r["pass"] for r in reports)})
    return EXIT_OK


@cli_command
def _cmd_stab_weyl(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cov = _load_cover(args)
    base = _spectrum(cov.base, cfg, m=cov.base.num_vertices)
    cover = _spectrum(cov.total, cfg, m=cov.total.num_vertices)
    if args.grid:
        grid = [float(x) for x in args.grid.split(",")]
    else:
        grid = list(np.linspace(0.0, float(base.eigenvalues[-1]), args.points))
    _emit(cfg, "weyl", weyl_ratio(base, cover, grid, cov.degree, cfg.margin).to_dict())
    return EXIT_OK


@cli_command
def _cmd_stab_checks(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cov = _load_cover(args)
    base = _spectrum(cov.base, cfg)
    cover = _spectrum(cov.total, cfg, past=float(base.eigenvalues[-1]))
    result = {
        "lifting": lifting_check(base, cover, cfg.margin).to_dict(),
        "monotone": [r.to_dict() for r in monotone_instability_check(base, cover, base.count - 1, cfg.margin)],
        "nonana": nonana_check(cov, base, cover, cfg.margin, cfg.eps_zero, cfg.max_coset_degree).to_dict(),
    }
    _emit(cfg, "checks", result)
    return EXIT_OK


@cli_command
def _cmd_stab_batch(args: argparse.Namespace) -> int:
    cfg = _config(args)
    results = run_batch(load_jobs(args.files), run_job, cfg.jobs)
    _emit(cfg, "batch", batch_summary(results))
    return max((r.exit_code for r in results.values()), default=EXIT_OK)


# -- parser ----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: $COVERING_SPECTRA_CONFIG)")
    common.add_argument("--output", "-o", help="output path (default: stdout)")
    common.add_argument("--format", choices=(FORMAT_JSON, FORMAT_CSV))
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--m", type=int, help="number of eigenpairs")
    common.add_argument("--margin", type=float, help="count margin around lambda")
    common.add_argument("--eps-zero", dest="eps_zero", type=float, help="relative zero threshold")
    common.add_argument("--laplacian", choices=(LAPLACE_GRAPH, LAPLACE_COTANGENT))
    common.add_argument("--jobs", type=int)
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def _presentation_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--presentation", help="presentation JSON {rank, relators}")
    p.add_argument("--free", type=int, help="free group of this rank")
    p.add_argument("--surface", type=int, help="closed orientable surface group of this genus")
    p.add_argument("--index", type=int, required=True)


def _cover_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cover", required=True, help="cover artifact or cover spec JSON")
    p.add_argument("--base", help="base complex JSON (if the cover file has none)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covering-spectra", description="Spectra of finite covers of surfaces")
    groups = parser.add_subparsers(dest="group", required=True)
    common = [_common()]

    surface = groups.add_parser("surface", help="build and inspect complexes").add_subparsers(dest="action",
                                                                                              required=True)
    p = surface.add_parser("make", parents=common, help="preset complex")
    p.add_argument("--kind", required=True, choices=PRESET_KINDS)
    p.add_argument("--params", required=True, help="comma-separated integers")
    p.set_defaults(func=_cmd_surface_make)
    p = surface.add_parser("classify", parents=common, help="Euler characteristic and signature")
    p.add_argument("--complex", required=True)
    p.add_argument("--vertices", help="classify the thickening of this vertex set")
    p.set_defaults(func=_cmd_surface_classify)
    p = surface.add_parser("homology", parents=common, help="first homology")
    p.add_argument("--complex", required=True)
    p.add_argument("--coeffs", choices=(COEFFS_Z, COEFFS_Z2), default=COEFFS_Z)
    p.add_argument("--subdomain", help="quotient by the loops of this vertex set")
    p.set_defaults(func=_cmd_surface_homology)

    cover = groups.add_parser("cover", help="covers and towers").add_subparsers(dest="action", required=True)
    p = cover.add_parser("build", parents=common, help="build a cover from a spec or a cocycle")
    p.add_argument("--complex", required=True)
    p.add_argument("--spec", help="cover spec JSON")
    p.add_argument("--cyclic", type=int, help="cyclic cover of this degree along a cocycle")
    p.add_argument("--cocycle", type=int, default=0, help="index into the integer cocycle basis")
    p.set_defaults(func=_cmd_cover_build)
    p = cover.add_parser("components", parents=common, help="components of a preimage")
    _cover_args(p)
    p.add_argument("--vertices", required=True)
    p.set_defaults(func=_cmd_cover_components)
    p = cover.add_parser("tower", parents=common, help="abelian tower of double covers")
    p.add_argument("--complex", required=True)
    p.add_argument("--schedule", required=True, help="cocycle index doubled at each level")
    p.set_defaults(func=_cmd_cover_tower)

    group = groups.add_parser("group", help="coset actions and subgroups").add_subparsers(dest="action",
                                                                                          required=True)
    p = group.add_parser("enum", parents=common, help="index-n subgroups")
    _presentation_args(p)
    p.set_defaults(func=_cmd_group_enum)
    p = group.add_parser("orbits", parents=common, help="orbits of a subgroup on cosets")
    p.add_argument("--action", required=True, help="coset action JSON {degree, perms}")
    p.add_argument("--words", default="", help="words like 1,2,-1;2")
    p.set_defaults(func=_cmd_group_orbits)
    p = group.add_parser("mu", parents=common, help="generator count of a finite abelian group")
    p.add_argument("--factors", help="cyclic factor orders")
    p.add_argument("--complex", help="use H1 of this complex")
    p.add_argument("--brute", action="store_true", help="cross-check on the regular action")
    p.set_defaults(func=_cmd_group_mu)
    p = group.add_parser("count", parents=common, help="subgroup counts a(1..n)")
    _presentation_args(p)
    p.set_defaults(func=_cmd_group_count)

    spec = groups.add_parser("spec", help="spectra").add_subparsers(dest="action", required=True)
    p = spec.add_parser("compute", parents=common, help="lowest eigenpairs")
    p.add_argument("--complex")
    p.add_argument("--cover")
    p.add_argument("--base")
    p.set_defaults(func=_cmd_spec_compute)
    p = spec.add_parser("export", parents=common, help="matrix triplets")
    p.add_argument("--complex", required=True)
    p.set_defaults(func=_cmd_spec_export)

    nodal = groups.add_parser("nodal", help="nodal domains").add_subparsers(dest="action", required=True)
    p = nodal.add_parser("analyze", parents=common, help="nodal domains of an eigenvector")
    p.add_argument("--complex", required=True)
    p.add_argument("--index", type=int, default=1)
    p.set_defaults(func=_cmd_nodal_analyze)
    p = nodal.add_parser("plan", parents=common, help="cyclic cover along an intersection cocycle")
    p.add_argument("--complex", required=True)
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--domain", type=int, default=0)
    p.add_argument("--degree", type=int, default=2)
    p.set_defaults(func=_cmd_nodal_plan)

    stab = groups.add_parser("stab", help="stability experiments").add_subparsers(dest="action", required=True)
    p = stab.add_parser("verdict", parents=common, help="stability at lambda_k or on an interval")
    _cover_args(p)
    p.add_argument("--target", default="lambda1", help="lambdaK, K or lo,hi")
    p.set_defaults(func=_cmd_stab_verdict)
    p = stab.add_parser("numberg", parents=common, help="nodal lifting bound")
    _cover_args(p)
    p.add_argument("--index", type=int, default=1)
    p.set_defaults(func=_cmd_stab_numberg)
    p = stab.add_parser("numberd", parents=common, help="coset generator bound below sigma_l")
    _cover_args(p)
    p.add_argument("--ell", type=int, default=0)
    p.set_defaults(func=_cmd_stab_numberd)
    p = stab.add_parser("sigma", parents=common, help="Dirichlet upper bound for sigma_l")
    p.add_argument("--complex", required=True)
    p.add_argument("--ell", type=int, default=0)
    p.set_defaults(func=_cmd_stab_sigma)
    p = stab.add_parser("tower", parents=common, help="lambda_l along an abelian tower")
    p.add_argument("--complex", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--roof", type=float, default=None, help="upper bound for the final level")
    p.add_argument("--roof-tol", dest="roof_tol", type=float, default=0.0)
    p.set_defaults(func=_cmd_stab_tower)
    p = stab.add_parser("count", parents=common, help="subgroup containment counts")
    _presentation_args(p)
    p.set_defaults(func=_cmd_stab_count)
    p = stab.add_parser("respec", parents=common, help="negative eigenspace dimension check")
    p.add_argument("--random", type=int, default=0, help="number of random instances")
    p.add_argument("--dim", type=int, default=50)
    p.set_defaults(func=_cmd_stab_respec)
    p = stab.add_parser("weyl", parents=common, help="count ratio over a lambda grid")
    _cover_args(p)
    p.add_argument("--grid", help="comma-separated lambda values")
    p.add_argument("--points", type=int, default=21)
    p.set_defaults(func=_cmd_stab_weyl)
    p = stab.add_parser("checks", parents=common, help="lifting, monotonicity and generator-count checks")
    _cover_args(p)
    p.set_defaults(func=_cmd_stab_checks)
    p = stab.add_parser("batch", parents=common, help="run job files concurrently")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_stab_batch)
    return parser


def _parse(argv: Sequence[str] | None) -> argparse.Namespace | int:
    try:
        return build_parser().parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_OK


def run_job(argv: Sequence[str]) -> int:
    """Dispatch one command inside a running process; logging stays as configured."""
    args = _parse(argv)
    if isinstance(args, int):
        return args
    return args.func(args)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parse(argv)
    if isinstance(args, int):
        return args
    _configure_logging(args.verbose)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
