"""``bellkit`` command line.

Exit codes: 0 success, 1 internal error, 2 invalid input, 3 nothing found
(no certificate, no local model, failed verification).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import io
from .config import FORMAT_VERSION
from .errors import BellkitError, InvalidInputError

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_NOT_FOUND = 0, 1, 2, 3


@dataclass
class CommandConfig:
    subcommand: str
    args: argparse.Namespace
    output: str | None = None
    overrides: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInputError(message)


def _budget_flags(p, seeded=True):
    p.add_argument("--seed", type=int, required=seeded, help="RNG seed (required)")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--sweeps", type=int, default=500)
    p.add_argument("--filters", type=int, default=200)
    p.add_argument("--eps", type=float, default=1e-10)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bellkit", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", help="write JSON here instead of standard output")
    common.add_argument("--tol", type=float)
    common.add_argument("--lp-tol", type=float)
    common.add_argument("--dim-cap", type=int)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="distribution and correlators of a measured state")
    p.add_argument("--state", required=True)
    p.add_argument("--assembly", required=True)
    p.add_argument("--inequality")

    p = sub.add_parser("reduce", parents=[common], help="split a measured state into qubit components")
    p.add_argument("--state", required=True)
    p.add_argument("--assembly", required=True)
    p.add_argument("--inequality")

    p = sub.add_parser("optimize", parents=[common], help="seesaw maximization of a WWZB score")
    p.add_argument("--state", required=True)
    p.add_argument("--inequality", help="WWZB inequality; omit to scan the whole family")
    _budget_flags(p)

    p = sub.add_parser("certify", parents=[common], help="search for a distillability certificate")
    p.add_argument("--state", required=True)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--inequality", help="WWZB inequality; omit to scan the whole family")
    _budget_flags(p)

    p = sub.add_parser("lvm-check", parents=[common], help="local model or separating functional")
    p.add_argument("--distribution", required=True)

    p = sub.add_parser("wwzb", parents=[common], help="list the family or check correlators")
    p.add_argument("--parties", type=int)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--list", action="store_true")
    group.add_argument("--correlators")

    p = sub.add_parser("embed", parents=[common], help="LOCC embedding of a filtered branch")
    p.add_argument("--state", required=True)
    p.add_argument("--slo", required=True)
    p.add_argument("--assembly", required=True)
    p.add_argument("--inequality", required=True)
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)

    p = sub.add_parser("verify", parents=[common], help="re-evaluate a certificate")
    p.add_argument("--certificate", required=True)
    p.add_argument("--state", help="state to verify against (default: the one stored in the certificate)")
    return parser


def _load(path, reader):
    return reader(io.read_json(path))


def _wwzb(path):
    from .wwzb import WwzbInequality

    ineq = _load(path, io.inequality_from_json)
    if not isinstance(ineq, WwzbInequality):
        raise InvalidInputError("this command needs a WWZB inequality")
    return ineq


def _budget(args):
    from .optimize import SearchBudget

    return SearchBudget(args.seed, args.restarts, args.sweeps, args.filters, args.eps)


def _report_json(report) -> dict:
    return {
        "format": FORMAT_VERSION,
        "type": "optimization-report",
        "best_score": report.best_score,
        "assembly": io.assembly_to_json(report.assembly) if report.assembly is not None else None,
        "inequality": io.inequality_to_json(report.inequality) if report.inequality is not None else None,
        "filter_kraus": io.kraus_to_json(report.filter) if report.filter is not None else None,
        "success_probability": report.success_probability,
        "iterations": report.iterations,
        "converged": report.converged,
        "trace": list(report.trace),
        "candidate": report.candidate,
    }


def _cmd_eval(args):
    from .correlations import born_distribution, correlators
    from .wwzb import WwzbInequality

    state = _load(args.state, io.state_from_json)
    assembly = _load(args.assembly, io.assembly_from_json)
    dist = born_distribution(state, assembly)
    c = correlators(dist)
    doc = {"format": FORMAT_VERSION, "type": "evaluation",
           "distribution": io.distribution_to_json(dist), "correlators": c.values.tolist()}
    if args.inequality:
        ineq = _load(args.inequality, io.inequality_from_json)
        if ineq.parties != state.parties:
            raise InvalidInputError("inequality and state have different party counts")
        if isinstance(ineq, WwzbInequality):
            doc["signed_score"] = ineq.signed_score(c)
            doc["score"] = abs(doc["signed_score"])
        else:
            doc["bell_value"] = float(np.sum(ineq.coeffs * dist.probs))
    return EXIT_OK, doc


def _cmd_reduce(args):
    from .jordan import best_block, component_scores, qubit_reduce

    state = _load(args.state, io.state_from_json)
    assembly = _load(args.assembly, io.assembly_from_json)
    red = qubit_reduce(state, assembly)
    comps = []
    for c in red.components:
        comps.append({"weight": c.weight, "blocks": list(c.blocks),
                      "state": io.state_to_json(c.state), "assembly": io.assembly_to_json(c.assembly)})
    doc = {"format": FORMAT_VERSION, "type": "qubit-reduction", "components": comps,
           "blocks_per_party": [len(b) for b in red.party_blocks]}
    if args.inequality:
        ineq = _wwzb(args.inequality)
        doc["scores"] = component_scores(red, ineq).tolist()
        doc["best_block"], doc["best_score"] = best_block(red, ineq)
    return EXIT_OK, doc


def _cmd_optimize(args):
    from .optimize import seesaw, seesaw_scan

    state = _load(args.state, io.state_from_json)
    if args.inequality:
        report = seesaw(state, _wwzb(args.inequality), _budget(args))
    else:
        report = seesaw_scan(state, _budget(args))
    return EXIT_OK, _report_json(report)


def _cmd_certify(args):
    from .protocols import NoCertificate, certify_distillability

    state = _load(args.state, io.state_from_json)
    ineq = _wwzb(args.inequality) if args.inequality else "scan"
    result = certify_distillability(state, args.copies, ineq, _budget(args))
    if isinstance(result, NoCertificate):
        return EXIT_NOT_FOUND, {"format": FORMAT_VERSION, "type": "no-certificate", "copies": result.copies,
                                "best_score": result.best_score, "seed": args.seed}
    return EXIT_OK, io.certificate_to_json(result, state)


def _cmd_lvm_check(args):
    from .correlations import LvmModel, lvm_feasibility

    dist = _load(args.distribution, io.distribution_from_json)
    result = lvm_feasibility(dist)
    if isinstance(result, LvmModel):
        return EXIT_OK, io.model_to_json(result)
    doc = {"format": FORMAT_VERSION, "type": "separating-functional",
           "functional": io.inequality_to_json(result),
           "min_slack": float(result.deterministic_slacks().min()),
           "value": float(np.sum(result.coeffs * dist.probs))}
    return EXIT_NOT_FOUND, doc


def _cmd_wwzb(args):
    from .wwzb import enumerate_wwzb, fourier_spectrum

    if args.list:
        if args.parties is None:
            raise InvalidInputError("--list needs --parties")
        records = [{"index": k, **io.inequality_to_json(q), "g": q.g.tolist()}
                   for k, q in enumerate(enumerate_wwzb(args.parties))]
        return EXIT_OK, {"format": FORMAT_VERSION, "type": "wwzb-list", "parties": args.parties,
                         "inequalities": records}
    c = _load(args.correlators, io.correlators_from_json)
    if args.parties is not None and args.parties != c.parties:
        raise InvalidInputError("--parties does not match the correlators")
    spectrum = fourier_spectrum(c)
    best = spectrum.best_inequality()
    total = spectrum.total()
    doc = {"format": FORMAT_VERSION, "type": "wwzb-check", "parties": c.parties,
           "xi": spectrum.xi.tolist(), "max_score": total, "best_inequality": io.inequality_to_json(best),
           "local": bool(total <= 1 + 1e-12)}
    return EXIT_OK, doc


def _cmd_embed(args):
    from .protocols import locc_embedding

    state = _load(args.state, io.state_from_json)
    emb = locc_embedding(state, _load(args.slo, io.slo_from_json), _load(args.assembly, io.assembly_from_json),
                         _wwzb(args.inequality), args.sign)
    doc = {"format": FORMAT_VERSION, "type": "locc-embedding", "success_probability": emb.success_probability,
           "branch_score": emb.branch_score, "embedded_score": emb.embedded_score,
           "predicted_score": emb.predicted_score, "state": io.state_to_json(emb.state),
           "assembly": io.assembly_to_json(emb.assembly)}
    return EXIT_OK, doc


def _cmd_verify(args):
    from .protocols import verify_certificate

    cert, stored = _load(args.certificate, io.certificate_from_json)
    state = _load(args.state, io.state_from_json) if args.state else stored
    if state is None:
        raise InvalidInputError("certificate has no embedded state; pass --state")
    v = verify_certificate(cert, state)
    doc = {"format": FORMAT_VERSION, "type": "verification", "ok": v.ok, "score": v.score,
           "group_size": v.group_size, "messages": list(v.messages)}
    return (EXIT_OK if v.ok else EXIT_NOT_FOUND), doc


COMMANDS = {
    "eval": _cmd_eval,
    "reduce": _cmd_reduce,
    "optimize": _cmd_optimize,
    "certify": _cmd_certify,
    "lvm-check": _cmd_lvm_check,
    "wwzb": _cmd_wwzb,
    "embed": _cmd_embed,
    "verify": _cmd_verify,
}

_OVERRIDES = {"tol": "BELLKIT_TOL", "lp_tol": "BELLKIT_LP_TOL", "dim_cap": "BELLKIT_DIM_CAP"}


def parse(argv) -> CommandConfig:
    args = build_parser().parse_args(argv)
    overrides = {env: str(getattr(args, key)) for key, env in _OVERRIDES.items() if getattr(args, key) is not None}
    return CommandConfig(args.subcommand, args, args.output, overrides)


def run(config: CommandConfig) -> tuple[int, dict]:
    """Execute one subcommand; tolerance overrides apply for the duration of the call."""
    saved = {k: os.environ.get(k) for k in config.overrides}
    os.environ.update(config.overrides)
    try:
        return COMMANDS[config.subcommand](config.args)
    finally:
        for k, v in saved.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v


def _error_doc(kind, message):
    return {"format": FORMAT_VERSION, "type": "error", "kind": kind, "message": message}


def main(argv=None) -> int:
    output = None
    try:
        config = parse(sys.argv[1:] if argv is None else argv)
        output = config.output
        code, doc = run(config)
    except (BellkitError, ValueError) as exc:
        code, doc = EXIT_INPUT, _error_doc(type(exc).__name__, str(exc))
    except Exception as exc:  # noqa: BLE001 - last-resort exit code contract
        code, doc = EXIT_INTERNAL, _error_doc(type(exc).__name__, str(exc))
    text = io.dumps(doc) + "\n"
    if doc["type"] == "error":
        sys.stderr.write(text)
    elif output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
