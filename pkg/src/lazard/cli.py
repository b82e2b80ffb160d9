"""Command-line front end: ``lazard <command> ...``.

Exit codes: 0 completed, 1 invalid input, 2 budget refusal. A report is
written to stdout on 0 and 2; errors go to stderr. Reports contain no
timings or paths beyond the command echo, so repeated runs with the same
arguments produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__
from .autbound import (
    DEFAULT_AUT_BUDGET,
    DEFAULT_NODE_BUDGET,
    aut_bruteforce,
    bound_chain,
    bound_report,
    inn_order,
    lie_matrix_automorphisms,
    stabilization_k,
    totient_ratio,
)
from .bch import bch_series, check_uniform_params, hall_basis, truncation_degree
from .cohomology import section_action, z1_space
from .corpus import ParsedRing, parse_ring
from .errors import BudgetExceeded, LazardError
from .group import check_group_axioms, lazard_group, ppower_subgroup, section_module
from .liering import INFINITE_VALUATION, LieRingData, ReducedLieRing, center_rank_table, derivations, uniformity, validate

BUDGET_ENV = "LAZARD_BUDGET"
EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    ring: str | None = None
    prime: int | None = None
    precision: int | None = None
    budget: int = DEFAULT_AUT_BUDGET
    node_budget: int = DEFAULT_NODE_BUDGET
    seconds: float | None = None
    format: str = "json"
    seed: int = 0
    options: dict = field(default_factory=dict)


@dataclass
class Report:
    command: dict
    input_digest: str | None
    seed: int
    status: str
    results: dict
    caveats: list

    def to_dict(self) -> dict:
        return {
            "toolVersion": __version__,
            "inputDigest": self.input_digest,
            "command": self.command,
            "seed": self.seed,
            "status": self.status,
            "caveats": self.caveats,
            "results": self.results,
        }

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2) + "\n"
        return "\n".join(_text_lines(self.to_dict())) + "\n"


class InputError(Exception):
    pass


def _text_lines(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            if isinstance(value, (dict, list)) and value:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(value)}")
    elif isinstance(obj, list):
        for value in obj:
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_text_lines(value, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(value)}")
    else:
        lines.append(pad + _scalar(obj))
    return lines


def _scalar(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return str(value)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _s(value):
    return "inf" if value == INFINITE_VALUATION else int(value)


# --- ring loading ----------------------------------------------------------------


def _load(cfg: RunConfig) -> ParsedRing:
    if cfg.ring is None:
        raise InputError("a ring JSON path is required")
    try:
        parsed = parse_ring(cfg.ring)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {cfg.ring}") from exc
    if cfg.prime is not None:
        d = parsed.data
        parsed = ParsedRing(LieRingData(d.rank, cfg.prime, d.brackets, d.label), parsed.digest)
    return parsed


def _uniform_ring(data: LieRingData, m: int):
    s, ok = uniformity(data)
    if not ok:
        raise InputError(f"ring is not uniform at p = {data.prime} (s = {_s(s)}); no group is attached")
    if m < 1:
        raise InputError("precision must be at least 1")
    return lazard_group(data, m)


# --- commands ----------------------------------------------------------------------


def cmd_check(cfg: RunConfig, parsed: ParsedRing, caveats: list) -> dict:
    data = parsed.data
    rep = validate(data)
    s, uniform = uniformity(data)
    out = {
        "label": data.label,
        "rank": data.rank,
        "prime": data.prime,
        "jacobi": {"valid": rep.valid, "triplesChecked": rep.triples_checked, "method": "exact"},
        "uniformity": {"s": _s(s), "uniform": uniform, "method": "exact"},
    }
    table = center_rank_table(data)
    out["centerRank"] = {"value": table[-1][1], "window": [t for t, _ in table], "method": "empirical"}
    caveats.append("empirical-z")
    return out


def cmd_bch(cfg: RunConfig, caveats: list) -> dict:
    p, k, s = cfg.options["prime"], cfg.options["precision"], cfg.options["svaluation"]
    try:
        check_uniform_params(p, s)
        cert = truncation_degree(p, k, s)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    D = cfg.options["degree"] or cert.degree
    series = bch_series(D)
    counts = {n: len(ws) for n, ws in hall_basis(D).items()}
    return {
        "degree": D,
        "hallCounts": [{"n": n, "count": counts[n]} for n in sorted(counts)],
        "coefficients": [
            {"word": str(w), "degree": w.degree, "coeff": _frac(c), "method": "exact"} for w, c in series.coefficients
        ],
        "certificate": cert.to_dict() | {"method": "exact"},
    }


def cmd_der(cfg: RunConfig, parsed: ParsedRing, caveats: list) -> dict:
    k = cfg.precision or 1
    mod = derivations(ReducedLieRing(parsed.data, k))
    return {
        "precision": k,
        "derExp": mod.der_order_exp,
        "innExp": mod.inn_order_exp,
        "h1Exp": mod.h1_order_exp,
        "method": "exact",
        "derGenerators": mod.matrices("der"),
    }


def cmd_group(cfg: RunConfig, parsed: ParsedRing, caveats: list) -> dict:
    m = cfg.precision or 1
    G = _uniform_ring(parsed.data, m)
    mode = cfg.options.get("verify", "auto")
    if mode == "exhaustive" and G.order > cfg.budget:
        raise BudgetExceeded(f"exhaustive check of a group of order {G.order} exceeds budget {cfg.budget}",
                             G.order, cfg.budget)
    axioms = check_group_axioms(G, mode, samples=cfg.options.get("samples", 100_000), seed=cfg.seed,
                                table_budget=cfg.budget)
    if axioms.method == "sampled":
        caveats.append("sampled-verification")
    filtration = [{"j": j, "indexExp": ppower_subgroup(G, j)[1], "method": "exact"} for j in range(m + 1)]
    return {
        "precision": m,
        "orderExp": {"value": G.order_exponent, "method": "exact"},
        "truncationDegree": G.certificate.degree,
        "filtration": filtration,
        "axioms": axioms.to_dict(),
    }


def cmd_cohomology(cfg: RunConfig, parsed: ParsedRing, caveats: list) -> dict:
    m = cfg.precision or 1
    i, j = cfg.options["window"]
    G = _uniform_ring(parsed.data, m)
    action = section_action(G, i, j)
    if G.order > cfg.budget:
        raise BudgetExceeded(f"group of order {G.order} exceeds budget {cfg.budget}", G.order, cfg.budget)
    sec = section_module(G, i, j, seed=cfg.seed)
    if "sampled" in sec.method:
        caveats.append("sampled-verification")
    out = z1_space(action).to_dict() | {"method": "exact"}
    out["window"] = [i, j]
    out["sectionCheck"] = {"abelian": sec.abelian, "intertwines": sec.intertwines, "method": sec.method,
                           "checked": sec.checked}
    return out


def cmd_aut(cfg: RunConfig, parsed: ParsedRing, caveats: list) -> dict:
    m = cfg.precision or 1
    G = _uniform_ring(parsed.data, m)
    res = aut_bruteforce(G, cfg.budget, node_budget=cfg.node_budget, seconds=cfg.seconds)
    out = {"precision": m, "aut": res.to_dict() | {"method": "exact", "search": res.method}}
    try:
        lie = lie_matrix_automorphisms(ReducedLieRing(parsed.data, m), node_budget=cfg.node_budget,
                                       seconds=cfg.seconds)
        out["lieMatrix"] = {"order": lie.order, "agrees": lie.order == res.order, "method": "exact"}
    except BudgetExceeded as exc:
        out["lieMatrix"] = {"order": None, "method": "refused", "note": str(exc)}
        caveats.append("budget-refusals")
    inn = inn_order(G, cfg.budget)
    out["innExp"] = {"value": inn.exponent, "centerExp": inn.center_exponent, "method": "exact"}
    out["totient"] = totient_ratio(G.p, G.order_exponent, res.order).to_dict() | {"method": "exact"}
    return out


def cmd_bound(cfg: RunConfig, parsed: ParsedRing | None, caveats: list) -> dict:
    o = cfg.options
    if parsed is None:
        if o.get("rank") is None or o.get("center_rank") is None or o.get("k") is None:
            raise InputError("symbolic bound needs --rank, --center-rank and --k")
        try:
            rep = bound_chain(o["rank"], o["center_rank"], o["k"], o["imax"], p=cfg.prime, aut_uk=o.get("aut_uk"),
                              aut_uk_method="supplied" if o.get("aut_uk") is not None else "unavailable")
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    else:
        rep = bound_report(parsed.data, o.get("k"), o["imax"], aut_budget=cfg.budget,
                           exact_levels=tuple(o.get("exact_levels") or ()), node_budget=cfg.node_budget)
        if rep.k_source == "stabilization":
            caveats.append("empirical-k")
        caveats.append("empirical-z")
    if any("unavailable" in c or "not brute-forced" in c for c in rep.caveats):
        caveats.append("budget-refusals")
    return rep.to_dict()


def cmd_report(cfg: RunConfig, parsed: ParsedRing, caveats: list) -> dict:
    out = {"check": cmd_check(cfg, parsed, caveats)}
    if not out["check"]["uniformity"]["uniform"]:
        raise InputError("ring is not uniform; the bound pipeline does not apply")
    stab = stabilization_k(parsed.data)
    out["stabilization"] = stab.to_dict()
    caveats.append("empirical-k")
    rep = bound_report(parsed.data, None, cfg.options.get("imax", 4), aut_budget=cfg.budget,
                       node_budget=cfg.node_budget)
    out["bound"] = rep.to_dict()
    if rep.aut_uk is not None and rep.k >= 1:
        out["totient"] = totient_ratio(parsed.data.prime, parsed.data.rank * rep.k, rep.aut_uk, rep.d, rep.z).to_dict()
        out["totient"]["method"] = "exact"
    else:
        caveats.append("budget-refusals")
    return out


RING_COMMANDS = {
    "check": cmd_check,
    "der": cmd_der,
    "group": cmd_group,
    "cohomology": cmd_cohomology,
    "aut-brute": cmd_aut,
    "report": cmd_report,
}


def run(cfg: RunConfig) -> tuple[Report | None, int, str]:
    """Execute one command; returns the report (None on invalid input), exit code and an error message."""
    echo = {k: v for k, v in asdict(cfg).items() if k not in ("options", "format")}
    echo.update({k: v for k, v in sorted(cfg.options.items())})
    caveats: list = []
    parsed = None
    try:
        if cfg.command == "bch":
            results = cmd_bch(cfg, caveats)
        elif cfg.command == "bound":
            parsed = _load(cfg) if cfg.ring is not None else None
            results = cmd_bound(cfg, parsed, caveats)
        else:
            parsed = _load(cfg)
            results = RING_COMMANDS[cfg.command](cfg, parsed, caveats)
    except BudgetExceeded as exc:
        results = {"refusal": str(exc), "needed": exc.needed, "budget": exc.budget, "method": "refused"}
        digest = parsed.digest if parsed is not None else None
        return Report(echo, digest, cfg.seed, "refused", results, sorted(set(caveats + ["budget-refusals"]))), \
            EXIT_BUDGET, str(exc)
    except (InputError, LazardError, ValueError) as exc:
        msg = str(exc)
        pointer = getattr(exc, "pointer", None)
        triple = getattr(exc, "triple", None)
        if pointer:
            msg += f" (at {pointer})"
        if triple:
            msg += f" (witness triple {triple})"
        return None, EXIT_INPUT, msg
    digest = parsed.digest if parsed is not None else None
    return Report(echo, digest, cfg.seed, "completed", results, sorted(set(caveats))), EXIT_OK, ""


# --- argument parsing --------------------------------------------------------------


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_AUT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise SystemExit(f"{BUDGET_ENV} must be a positive integer, got {raw!r}")
    if value <= 0:
        raise SystemExit(f"{BUDGET_ENV} must be a positive integer, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled verifications")
    common.add_argument("--budget", type=_positive(int), default=None,
                        help=f"element-count budget (default {DEFAULT_AUT_BUDGET}, or ${BUDGET_ENV})")
    common.add_argument("--node-budget", type=_positive(int), default=DEFAULT_NODE_BUDGET)
    common.add_argument("--seconds", type=_positive(float), default=None, help="wall-clock limit for searches")

    parser = argparse.ArgumentParser(prog="lazard", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lazard {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def ring_cmd(name, help_text, precision=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("ring", help="ring JSON file")
        p.add_argument("--prime", type=_positive(int), default=None, help="override the ring's prime")
        if precision:
            p.add_argument("--precision", type=_positive(int), default=None)
        return p

    ring_cmd("check", "validate a ring and report uniformity", precision=False)
    p = sub.add_parser("bch", parents=[common], help="BCH coefficients and truncation certificate")
    p.add_argument("--prime", type=_positive(int), required=True)
    p.add_argument("--precision", type=_positive(int), required=True)
    p.add_argument("--svaluation", type=int, required=True)
    p.add_argument("--degree", type=_positive(int), default=None)
    ring_cmd("der", "derivations and inner derivations mod p^K")
    p = ring_cmd("group", "build U_M and verify the group laws")
    p.add_argument("--verify", choices=("auto", "exhaustive", "sampled"), default="auto")
    p.add_argument("--samples", type=_positive(int), default=100_000)
    p = ring_cmd("cohomology", "H^1 of U_M on a section U^{p^I}/U^{p^J}")
    p.add_argument("--window", type=int, nargs=2, metavar=("I", "J"), required=True)
    ring_cmd("aut-brute", "|Aut(U_M)| by exhaustive search")
    p = sub.add_parser("bound", parents=[common], help="the |Aut(U_i)| bound chain")
    p.add_argument("ring", nargs="?", default=None, help="ring JSON file; omit for symbolic inputs")
    p.add_argument("--prime", type=_positive(int), default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--imax", type=_positive(int), default=4)
    p.add_argument("--exact-levels", type=_positive(int), nargs="*", default=[])
    p.add_argument("--rank", type=_positive(int), default=None, help="symbolic mode: d")
    p.add_argument("--center-rank", type=int, default=None, help="symbolic mode: z")
    p.add_argument("--aut-uk", type=_positive(int), default=None, help="symbolic mode: |Aut(U_k)| if known")
    p = ring_cmd("report", "full pipeline: check, stabilisation, bound", precision=False)
    p.add_argument("--imax", type=_positive(int), default=4)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = {"command", "ring", "prime", "precision", "budget", "node_budget", "seconds", "format", "seed"}
    ns = vars(args)
    options = {k: v for k, v in ns.items() if k not in base}
    if args.command == "bch":
        options.update(prime=args.prime, precision=args.precision)
    if "window" in options:
        options["window"] = list(options["window"])
    budget = args.budget if args.budget is not None else _default_budget()
    return RunConfig(
        command=args.command,
        ring=ns.get("ring"),
        prime=None if args.command == "bch" else ns.get("prime"),
        precision=None if args.command == "bch" else ns.get("precision"),
        budget=budget,
        node_budget=args.node_budget,
        seconds=args.seconds,
        format=args.format,
        seed=args.seed,
        options=options,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    report, code, msg = run(cfg)
    if report is not None:
        sys.stdout.write(report.render(cfg.format))
    if msg:
        print(f"lazard {cfg.command}: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
