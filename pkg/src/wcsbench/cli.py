"""Command-line front end.

Exit codes: 0 when every check passes (or the certificate is emitted),
1 when a mathematical check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Iterable, Optional, Sequence

from . import graded, power, states, wcs
from .report import DEFAULT_MAX_DIM, DEFAULT_TOLERANCE, CheckReport, combine
from .tensor_core import IndexPermutation

log = logging.getLogger("wcsbench")


@dataclass
class RunConfig:
    max_dim: int = DEFAULT_MAX_DIM
    cutoff: int = 8
    powers: list[int] = field(default_factory=lambda: [1, 2])
    tolerance: float = DEFAULT_TOLERANCE
    output: Optional[str] = None
    format: str = "text"
    stages: Optional[list[int]] = None
    levels: int = 4
    tamper: bool = False
    verbose: bool = False
    dense: bool = False

    def validate(self) -> None:
        if self.max_dim < 1:
            raise ValueError("--max-dim must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("--tolerance must be > 0")
        if self.cutoff < 1:
            raise ValueError("--cutoff must be >= 1")
        if not self.powers or any(p < 1 for p in self.powers):
            raise ValueError("--powers must be positive integers")
        if self.stages is not None and any(p < 1 for p in self.stages):
            raise ValueError("--stages must be positive integers")
        if self.levels < 0:
            raise ValueError("--levels must be >= 0")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("WCS_THREADS", "1")))
    except ValueError:
        return 1


def run_all(jobs: Sequence[Callable[[], CheckReport]]) -> list[CheckReport]:
    """Run independent checks, in parallel when ``WCS_THREADS`` > 1.

    Results keep the job order, so output is deterministic.
    """
    n = _threads()
    if n == 1 or len(jobs) < 2:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda job: job(), jobs))


def pairs_upto(limit: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(1, limit + 1) for b in range(1, limit // a + 1)]


def triples_upto(limit: int) -> list[tuple[int, int, int]]:
    return [(a, b, c) for a, b in pairs_upto(limit) for c in range(1, limit // (a * b) + 1)]


def _root_floor(x: int, k: int) -> int:
    """Largest ``r`` with ``r**k <= x``."""
    r = int(round(x ** (1.0 / k)))
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def _suite(name: str, jobs: Sequence[Callable[[], CheckReport]], cfg: RunConfig) -> CheckReport:
    reports = run_all(jobs)
    if cfg.verbose:
        for rep in reports:
            log.info(rep.summary())
    suite = combine(name, reports, cfg.tolerance)
    suite.note = f"{len(reports)} checks"
    return suite


def _tampered(p: IndexPermutation) -> IndexPermutation:
    return p.compose(IndexPermutation.transposition(p.size, 0, 1))


def suites_wcs(cfg: RunConfig) -> list[CheckReport]:
    m = cfg.max_dim
    exact = dict(max_dim=m, tolerance=cfg.tolerance)
    on_units = dict(exact, dense=cfg.dense)
    tamper_key = next(((a, b) for a, b in pairs_upto(m) if a * b >= 2), None) if cfg.tamper else None

    def r_job(a, b):
        r = _tampered(wcs.rmatrix(a, b)) if (a, b) == tamper_key else None
        return lambda: wcs.check_r_relation(a, b, r=r, **on_units)

    coassoc = [partial(wcs.check_weak_coassociativity, *t, **on_units) for t in triples_upto(m)]
    units = [partial(wcs.check_unit_conditions, a, **on_units) for a in range(1, m + 1)]
    hexagons = [partial(wcs.check_quasi_triangularity, *t, **exact) for t in triples_upto(m)]
    triangular = [partial(wcs.check_triangularity, *p, **exact) for p in pairs_upto(m)]
    return [
        _suite("weak coassociativity", coassoc, cfg),
        _suite("unit conditions", units, cfg),
        _suite("R-relation (local quasi-cocommutativity)", [r_job(a, b) for a, b in pairs_upto(m)], cfg),
        _suite("hexagons (local quasi-triangularity)", hexagons, cfg),
        _suite("triangularity", triangular, cfg),
    ]


def _naturality_report(limit: int, tol: float) -> CheckReport:
    rep = CheckReport(name="naturality at n=1", tolerance=tol, note="exact permutation equality")
    for a, b in pairs_upto(limit):
        rep.instances += 2
        if power.rmatrix_power(a, b, 1) != wcs.rmatrix(a, b):
            rep.fail(f"({a},{b})", "R^(a,b:1) differs from R^(a,b)")
        if not power.interleave(a, b, 1).is_identity():
            rep.fail(f"({a},{b})", "T^(1) is not the identity")
    return rep


def suites_power(cfg: RunConfig) -> list[CheckReport]:
    m = cfg.max_dim
    exact = dict(max_dim=m, tolerance=cfg.tolerance)
    on_units = dict(exact, dense=cfg.dense)
    out = [_naturality_report(m, cfg.tolerance)]
    for n in cfg.powers:
        base = _root_floor(m, n)
        pairs = pairs_upto(base)
        tamper_key = next(((a, b) for a, b in pairs if a * b >= 2), None) if cfg.tamper else None

        def r_job(a, b, n=n, key=tamper_key):
            r = _tampered(power.rmatrix_power(a, b, n)) if (a, b) == key else None
            return lambda: power.check_powered_r_relation(a, b, n, r=r, **on_units)

        op_compat = [partial(power.check_op_compatibility, a, b, n, **on_units) for a, b in pairs]
        triangular = [partial(power.check_powered_triangularity, *t, n, **exact) for t in triples_upto(base)]
        psi = [
            partial(power.check_psi_compatibility, a, b, n, **on_units)
            for a, b in pairs_upto(_root_floor(m, n + 1))
        ]
        out += [
            _suite(f"op-compatibility n={n}", op_compat, cfg),
            _suite(f"powered R-relation n={n}", [r_job(a, b) for a, b in pairs], cfg),
            _suite(f"powered hexagons and triangularity n={n}", triangular, cfg),
            _suite(f"psi compatibility n={n}", psi, cfg),
        ]
    return out


def stage_cutoff(cfg: RunConfig, power_: int) -> int:
    """The requested cutoff, lowered until the largest block fits the budget."""
    return max(1, min(cfg.cutoff, _root_floor(cfg.max_dim, power_)))


def _tampered_family(cutoff: int, power_: int) -> Optional[graded.BlockRMatrix]:
    if cutoff < 2:
        return None
    return graded.BlockRMatrix.standard(cutoff, power_).tampered((1, 2))


def suites_bialgebra(cfg: RunConfig) -> list[CheckReport]:
    m = cfg.max_dim
    exact = dict(max_dim=m, tolerance=cfg.tolerance)
    out = []
    for i in cfg.powers:
        n = stage_cutoff(cfg, i)
        r = _tampered_family(n, i) if cfg.tamper else None
        # psi_* raises the power, so its source cutoff must fit the next stage too
        n_next = min(n, _root_floor(m, i + 1))
        out += run_all([
            partial(graded.check_coassociativity_graded, n, i, **exact),
            partial(graded.check_quasi_cocommutativity, n, i, r=r, **exact),
            lambda n=n_next, i=i: graded.check_bialgebra_morphism(graded.psi_star(n, i), **exact),
        ])
    return out


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish_reports(command: str, cfg: RunConfig, reports: list[CheckReport]) -> int:
    ok = all(r.passed for r in reports)
    if cfg.format == "json":
        payload = {
            "command": command,
            "config": asdict(cfg),
            "reports": [r.to_dict() for r in reports],
            "pass": ok,
        }
        _emit(cfg, json.dumps(payload, indent=2) + "\n")
    else:
        lines = [r.summary() for r in reports]
        for r in reports:
            for f in r.failures:
                lines.append(f"    {r.name}: {f}")
        lines.append("ALL CHECKS PASSED" if ok else "CHECKS FAILED")
        _emit(cfg, "\n".join(lines) + "\n")
    return 0 if ok else 1


def cmd_verify_wcs(cfg: RunConfig) -> int:
    return _finish_reports("verify-wcs", cfg, suites_wcs(cfg))


def cmd_verify_power(cfg: RunConfig) -> int:
    return _finish_reports("verify-power", cfg, suites_power(cfg))


def cmd_verify_bialgebra(cfg: RunConfig) -> int:
    return _finish_reports("verify-bialgebra", cfg, suites_bialgebra(cfg))


def cmd_certificate(cfg: RunConfig) -> int:
    stage_powers = cfg.stages or cfg.powers
    cutoff = min(stage_cutoff(cfg, i) for i in stage_powers)
    r_blocks = {}
    if cfg.tamper:
        fam = _tampered_family(cutoff, stage_powers[0])
        if fam is not None:
            r_blocks[stage_powers[0]] = fam
    try:
        cert = states.build_obstruction_certificate(
            stage_powers, cutoff, cfg.levels, r_blocks=r_blocks, max_dim=cfg.max_dim, tolerance=cfg.tolerance
        )
    except states.CertificateRefused as exc:
        if cfg.format == "json":
            payload = {"refused": str(exc), "report": exc.report.to_dict() if exc.report else None}
            _emit(cfg, json.dumps(payload, indent=2) + "\n")
        else:
            lines = [f"CERTIFICATE REFUSED: {exc}"]
            if exc.report is not None:
                lines.append(exc.report.summary())
                lines += [f"    {f}" for f in exc.report.failures]
            _emit(cfg, "\n".join(lines) + "\n")
        return 1

    if cfg.format == "json":
        _emit(cfg, cert.to_json(indent=2) + "\n")
    else:
        left, right = cert.state_pair
        lines = [r.summary() for r in cert.stage_reports]
        lines.append(f"star states: slot vectors {left.period[0].real.astype(int).tolist()} vs "
                     f"{right.period[0].real.astype(int).tolist()} in every slot")
        lines.append(f"equivalent: {cert.verdict.equivalent}  period deficits: {cert.verdict.period_deficits}")
        for d in cert.diagnostics:
            lines.append(f"level {d['level']}: overlap={d['overlap']:.3g} trace_distance={d['trace_distance']:.12f}")
        lines.append(f"conclusion: {cert.conclusion.value}")
        _emit(cfg, "\n".join(lines) + "\n")
    return 0


COMMANDS = {
    "verify-wcs": cmd_verify_wcs,
    "verify-power": cmd_verify_power,
    "verify-bialgebra": cmd_verify_bialgebra,
    "certificate": cmd_certificate,
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM, help="composite dimension budget per check")
    common.add_argument("--cutoff", type=int, default=8, help="largest block index N of the graded algebras")
    common.add_argument("--powers", type=_int_list, default=[1, 2], help="tensor powers, e.g. '1,2'")
    common.add_argument("--stages", type=_int_list, default=None, help="certificate stages (default: --powers)")
    common.add_argument("--levels", type=int, default=4, help="finite levels for certificate diagnostics")
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--output", metavar="PATH", default=None)
    common.add_argument("-v", "--verbose", action="store_true", help="log every individual check")
    common.add_argument(
        "--dense", action="store_true", help="check on dense matrix units instead of sparse relabeling (slow)"
    )
    common.add_argument("--selftest-tamper", dest="tamper", action="store_true", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="wcsbench", description="Verify the matrix weakly coassociative system and its tensor powers."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-wcs", parents=[common], help="axioms of the base system")
    sub.add_parser("verify-power", parents=[common], help="tensor-power identities and embeddings")
    sub.add_parser("verify-bialgebra", parents=[common], help="graded bialgebra stages")
    sub.add_parser("certificate", parents=[common], help="non-quasi-cocommutativity certificate")
    return parser


def main(argv: Optional[Iterable[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(None if argv is None else list(argv))
    cfg = RunConfig(
        max_dim=args.max_dim,
        cutoff=args.cutoff,
        powers=args.powers,
        tolerance=args.tolerance,
        output=args.output,
        format=args.format,
        stages=args.stages,
        levels=args.levels,
        tamper=args.tamper,
        verbose=args.verbose,
        dense=args.dense,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))
    logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
