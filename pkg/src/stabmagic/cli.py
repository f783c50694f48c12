"""``magic`` command-line entry point.

Every subcommand prints (or writes with ``--report``) a JSON run report:
command, input digest, results, timings, version and seed. Exit codes are
0 for YES, PASS or a computed value, 2 for NO or a failed verification,
3 for a promise violation and 1 for errors.
"""

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MagicError

EXIT_OK, EXIT_ERROR, EXIT_NO, EXIT_PROMISE = 0, 1, 2, 3
_DECISION_EXIT = {"YES": EXIT_OK, "PASS": EXIT_OK, "NO": EXIT_NO, "FAIL": EXIT_NO, "PROMISE_VIOLATED": EXIT_PROMISE}


class ArgumentError(MagicError):
    code = "BAD_ARGUMENT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise MagicError(f"file not found: {path}", code="FILE_NOT_FOUND") from None
    except json.JSONDecodeError as exc:
        raise MagicError(f"{path} is not valid JSON: {exc}", code="MALFORMED_JSON") from None


def _load_state(path):
    from .pauli import density_from_dict

    return density_from_dict(_read_json(path))


def _digest(args) -> str:
    h = hashlib.sha256()
    for key in sorted(vars(args)):
        val = getattr(args, key)
        if key in ("func", "report", "jobs"):
            continue
        h.update(f"{key}={val!r};".encode())
        if isinstance(val, str) and key in ("state", "witness", "cnf", "artifact", "channel") and Path(val).exists():
            h.update(Path(val).read_bytes())
    return h.hexdigest()


# --- subcommands ---------------------------------------------------------------


def cmd_enumerate(args, rng):
    from .stabilizer import StateFamily, stabilizer_count

    fam = StateFamily(args.family, args.n)
    out = {"n": args.n, "family": fam.tag.value, "count": fam.size}
    if fam.tag.value == "ALL_STABILIZER":
        formula = stabilizer_count(args.n)
        if args.n <= 4:
            counted = sum(len(b) for _, b in fam.amplitudes())
            out["enumerated"] = counted
            out["matches_formula"] = counted == formula
        out["formula"] = formula
    if args.list:
        states = []
        for i, s in enumerate(fam.states(0, args.list)):
            states.append({"index": i, "generators": s.generator_labels})
        out["states"] = states
    return out, None


def cmd_monotone(args, rng):
    from .monotones import robustness_of_magic, stabilizer_fidelity, stabilizer_renyi_entropy, t_extended_robustness

    rho = _load_state(args.state)
    if args.measure == "sre":
        return {"measure": "sre", "alpha": args.alpha, "value": stabilizer_renyi_entropy(rho, args.alpha)}, None
    if args.measure == "fidelity":
        return {"measure": "fidelity", "value": stabilizer_fidelity(rho)}, None
    if args.measure == "robustness":
        cert = robustness_of_magic(rho, verbose=args.verbose)
    else:
        include = [rho.state_vector()] if args.include_state and rho.n_qubits == 1 else ()
        from .doped import build_doped_dictionary

        dic = None
        if args.t > 0:
            dic = build_doped_dictionary(rho.n_qubits, args.t, args.net_eps, include=include)
        cert = t_extended_robustness(rho, args.t, args.net_eps, dictionary=dic, verbose=args.verbose)
    return {"measure": args.measure, **cert.to_dict()}, None


def cmd_membership(args, rng):
    from .membership import decide_wmem

    rho = _load_state(args.state)
    if args.dict == "doped":
        from .doped import build_doped_dictionary, decide_doped_membership

        dic = build_doped_dictionary(rho.n_qubits, args.t, args.net_eps)
        verdict = decide_doped_membership(rho.matrix, dic, args.eps)
    else:
        verdict = decide_wmem(rho.matrix, args.eps)
    return verdict.to_dict(), verdict.decision.value


def cmd_witness(args, rng):
    from .membership import extract_witness

    rho = _load_state(args.state)
    rep = extract_witness(rho.matrix)
    return rep.to_dict(), None


def cmd_wwd(args, rng):
    from .membership import check_wwd_instance
    from .pauli import matrix_from_dict

    data = _read_json(args.witness)
    # accept a bare operator, a witness report, or a full run report
    data = data.get("results", data)
    data = data.get("witness", data)
    res = check_wwd_instance(matrix_from_dict(data), args.gamma, args.delta, scan=args.scan, rng=rng, jobs=args.jobs)
    out = res.to_dict()
    out["seed"] = args.seed
    return out, res.decision.value


def cmd_reduce(args, rng):
    from .reduction import parse_cnf, reduce_instance

    try:
        text = Path(args.cnf).read_text()
    except FileNotFoundError:
        raise MagicError(f"file not found: {args.cnf}", code="FILE_NOT_FOUND") from None
    art = reduce_instance(parse_cnf(text), args.vertices)
    payload = art.to_json()
    if args.out:
        Path(args.out).write_text(payload)
    return {
        "artifact": args.out,
        "artifact_sha256": hashlib.sha256(payload.encode()).hexdigest(),
        "vertices": art.vertices,
        "n_qubits": art.n_qubits,
        "var_to_edge": {str(k): list(v) for k, v in art.var_to_edge.items()},
        "gamma": art.gamma,
        "delta": art.delta,
        "norms": art.norms,
        "norm_H_inf": art.norm_H_inf,
    }, None


def cmd_verify(args, rng):
    from .reduction import ReductionArtifact, verify_stage

    art = ReductionArtifact.from_dict(_read_json(args.artifact))
    rep = verify_stage(art, args.stage, args.mode, rng=rng, jobs=args.jobs, long_running=args.long_running)
    out = rep.to_dict()
    out["seed"] = args.seed
    return out, "PASS" if rep.passed else "FAIL"


def cmd_doped(args, rng):
    from .doped import build_doped_dictionary, decide_doped_membership

    rho = _load_state(args.state)
    dic = build_doped_dictionary(rho.n_qubits, args.t, args.net_eps)
    verdict = decide_doped_membership(rho.matrix, dic, args.eps)
    out = verdict.to_dict()
    out["dictionary_size"] = len(dic)
    out["seeds"] = len(dic.seeds)
    return out, verdict.decision.value


def cmd_channel(args, rng):
    from .channels import QuantumChannel, classify_ctdspc

    ch = QuantumChannel.from_dict(_read_json(args.channel))
    verdict = classify_ctdspc(ch, args.t, args.net_eps, args.eps)
    return verdict.to_dict(), verdict.decision.value


# --- parser -------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="magic", description="Stabilizer-polytope and magic-state toolkit")
    p.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for family scans")
    common.add_argument("--report", help="write the run report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("enumerate", parents=[common], help="count or list a stabilizer family")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--family", default="ALL_STABILIZER",
                   choices=["ALL_STABILIZER", "GRAPH", "DOUBLED_GRAPH", "MAX_COHERENT", "OVERLAP_T"])
    s.add_argument("--list", type=int, default=0, help="also list the first K states")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("monotone", parents=[common], help="magic monotones of a state")
    s.add_argument("--measure", required=True, choices=["sre", "fidelity", "robustness", "t-robustness"])
    s.add_argument("--state", required=True)
    s.add_argument("--alpha", type=float, default=2.0)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--net-eps", type=float, default=0.3)
    s.add_argument("--include-state", action="store_true", help="seed the net with the input (1 qubit)")
    s.add_argument("--verbose", action="store_true", help="also report the one-sided dual")
    s.add_argument("--out", dest="report")
    s.set_defaults(func=cmd_monotone)

    s = sub.add_parser("membership", parents=[common], help="weak membership in the stabilizer polytope")
    s.add_argument("--state", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--dict", choices=["stab", "doped"], default="stab")
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--net-eps", type=float, default=0.3)
    s.set_defaults(func=cmd_membership)

    s = sub.add_parser("witness", parents=[common], help="separating witness W = rho - tau")
    s.add_argument("--state", required=True)
    s.add_argument("--out", dest="report")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("wwd", parents=[common], help="weak witness decision")
    s.add_argument("--witness", required=True)
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--scan", default="exhaustive",
                   help="exhaustive, graphs, doubled, coherent, overlap, sample:N or <family>:N")
    s.set_defaults(func=cmd_wwd)

    s = sub.add_parser("reduce", parents=[common], help="compile DIMACS 3-CNF into a WWD instance")
    s.add_argument("--cnf", required=True)
    s.add_argument("--vertices", type=int, default=None)
    s.add_argument("--out", help="artifact JSON path")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("verify-reduction", parents=[common], help="check one stage of an artifact")
    s.add_argument("--artifact", required=True)
    s.add_argument("--stage", required=True, choices=["H_2COPY", "H1_GRAPHS", "H2_COHERENT", "H3_OVERLAP", "H4_STAB"])
    s.add_argument("--mode", default="exhaustive", help="exhaustive or sample:N")
    s.add_argument("--long-running", action="store_true", help="allow the exhaustive six-qubit scan")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("doped", parents=[common], help="membership in the t-doped hull (net based)")
    s.add_argument("--state", required=True)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--net-eps", type=float, default=0.3)
    s.add_argument("--eps", type=float, required=True)
    s.set_defaults(func=cmd_doped)

    s = sub.add_parser("channel", help="channel tools")
    csub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = csub.add_parser("classify", parents=[common], help="(t-doped) stabilizer-preserving test")
    c.add_argument("--channel", required=True)
    c.add_argument("--t", type=int, default=0)
    c.add_argument("--net-eps", type=float, default=0.3)
    c.add_argument("--eps", type=float, required=True)
    c.set_defaults(func=cmd_channel)
    return p


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def run(argv=None):
    """Parse, dispatch and return ``(exit_code, report)``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    command = argv[0] if argv else None
    t0 = time.perf_counter()
    report = {"command": command, "version": __version__}
    try:
        args = build_parser().parse_args(argv)
        command = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
        report.update(command=command, seed=args.seed, inputs_digest=_digest(args))
        rng = np.random.default_rng(args.seed)
        results, decision = args.func(args, rng)
        report["results"] = results
        if decision is not None:
            report["decision"] = decision
        code = _DECISION_EXIT.get(decision, EXIT_OK)
    except MagicError as exc:
        report["error"] = {"code": exc.code, "message": str(exc)}
        code = EXIT_ERROR
        args = None
    except (ValueError, OSError) as exc:
        report["error"] = {"code": "INVALID_INPUT", "message": str(exc)}
        code = EXIT_ERROR
        args = None
    report["exit_code"] = code
    report["timings"] = {"total_s": round(time.perf_counter() - t0, 6)}
    report = _jsonable(report)
    dest = getattr(args, "report", None) if args is not None else None
    return code, report, dest


def main(argv=None) -> int:
    code, report, dest = run(argv)
    text = json.dumps(report, indent=1, sort_keys=True)
    if dest:
        Path(dest).write_text(text + "\n")
    else:
        print(text)
    if "error" in report:
        print(f"magic: error [{report['error']['code']}]: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
