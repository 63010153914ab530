"""Command-line scenario runner.

Every subcommand is deterministic for a given seed. Exit codes: 0 when all
checks pass, 1 when any check fails, 2 for usage and input errors.

CSV columns
    p1-sweep:      N, p1_simulated, p1_formula, abs_error, oracle_abs_error
    datahide:      N, success, oracle, abs_error (unlock sweep)
    fusion-table:  a, b, c, multiplicity (nonzero entries)
"""

import argparse
import datetime
import os
import sys
import time


from . import __version__
from .errors import SSRError
from .io import SCHEMA_VERSION, dumps, write_csv

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed_default():
    raw = os.environ.get("SSRSIM_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"SSRSIM_SEED must be an integer, got {raw!r}") from None


def _report(args, body, passed):
    report = {"schema_version": SCHEMA_VERSION, "command": args.command}
    if not args.no_timestamp:
        report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    report.update(body)
    report["passed"] = bool(passed)
    return report


def _emit_json(args, report):
    text = dumps(report) + "\n"
    if args.out and args.format == "json":
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(args, header, rows):
    stamp = None if args.no_timestamp else datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")

    def emit(f):
        if stamp:
            f.write(f"# {stamp}\n")
        write_csv(f, header, rows)

    if args.out:
        with open(args.out, "w", newline="") as f:
            emit(f)
    else:
        emit(sys.stdout)


# subcommands ---------------------------------------------------------------------------


def cmd_verify_props(args):
    from .groups import build_group
    from .reference import verify_minv_properties

    group = build_group(args.group)
    res = verify_minv_properties(group, trials=args.trials, seed=args.seed)
    worst = res["max_residual"]
    passed = worst <= args.tol
    print(f"max residual {worst:.3e} ({'pass' if passed else 'FAIL'} at tol {args.tol:g})", file=sys.stderr)
    _emit_json(args, _report(args, {"group": args.group, "trials": args.trials, "seed": args.seed, **res}, passed))
    return passed


def cmd_p1_sweep(args):
    from .reference import u1_coherence_protocol, u1_p1_oracle

    if args.n_min < 1 or args.n_max < args.n_min:
        raise UsageError("need 1 <= --n-min <= --n-max")
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        sim = u1_coherence_protocol(n)
        formula = 1 / (2 * n)
        rows.append((n, sim, formula, abs(sim - formula), abs(sim - u1_p1_oracle(n))))
    worst = max(max(r[3], r[4]) for r in rows)
    passed = worst <= args.tol
    header = ["N", "p1_simulated", "p1_formula", "abs_error", "oracle_abs_error"]
    if args.format == "csv":
        _emit_csv(args, header, rows)
        print(f"{len(rows)} rows, max abs error {worst:.3e}", file=sys.stderr)
    else:
        body = {"rows": [dict(zip(header, r)) for r in rows], "max_abs_error": worst}
        _emit_json(args, _report(args, body, passed))
    return passed


def cmd_bitcommit(args):
    from .attacks import (
        CommitmentPair,
        best_invariant_overlap,
        bob_fidelity_oracle,
        compensating_charge_attack,
        concealment_check,
        random_pair,
        steering_unitary,
        su2_hiding,
    )
    from .charges import charge_system
    from .linalg import rng_for

    cs = charge_system(args.system)
    shape = tuple(2 for _ in range(len(cs)))
    worst_conceal = 1.0
    worst_fid = 0.0
    all_concealing = True
    for k in range(args.trials):
        rng = rng_for(args.seed, 0, k)
        pair = random_pair(cs, shape, rng, concealing=True)
        all_concealing = all_concealing and concealment_check(pair)["concealing"]
        worst_conceal = min(worst_conceal, steering_unitary(pair).overlap)
        pair = random_pair(cs, shape, rng_for(args.seed, 1, k))
        worst_fid = max(worst_fid, abs(steering_unitary(pair).overlap - bob_fidelity_oracle(pair)))
    h = su2_hiding()
    pm = CommitmentPair(h.plus, h.minus)
    _, plain = best_invariant_overlap(h.plus, h.minus, 0)
    comp, _ = compensating_charge_attack(pm)
    checks = {
        "concealing_min_overlap": worst_conceal,
        "fidelity_max_abs_error": worst_fid,
        "su2_plain_overlap": plain,
        "su2_compensated_overlap": comp.overlap,
    }
    passed = all_concealing and (
        worst_conceal >= 1 - 1e-9 and worst_fid <= 1e-8 and plain <= 1e-10 and comp.overlap >= 1 - 1e-10
    )
    _emit_json(args, _report(args, {"system": cs.name, "trials": args.trials, "seed": args.seed, **checks}, passed))
    return passed


def cmd_datahide(args):
    from .attacks import HIDING_INSTANCES, data_hiding_analyze, data_hiding_unlock, data_hiding_unlock_oracle

    names = list(HIDING_INSTANCES) if args.instance == "all" else [args.instance]
    if any(n not in HIDING_INSTANCES for n in names):
        raise UsageError(f"--instance must be one of {sorted(HIDING_INSTANCES)} or all")
    analyses = {n: data_hiding_analyze(HIDING_INSTANCES[n](), samples=args.samples, seed=args.seed) for n in names}
    rows = []
    for n in range(1, args.n_max + 1):
        s, o = data_hiding_unlock(n), data_hiding_unlock_oracle(n)
        rows.append((n, s, o, abs(s - o)))
    mono = all(b[1] >= a[1] - 1e-12 for a, b in zip(rows, rows[1:]))
    ok = all(r["sample_agrees"] for a in analyses.values() for r in (a["alice"], a["bob"]))
    ok = ok and mono and max(r[3] for r in rows) <= 1e-10 and abs(rows[0][1] - 0.5) <= 1e-12
    if args.format == "csv":
        _emit_csv(args, ["N", "success", "oracle", "abs_error"], rows)
        return ok
    body = {
        "analyses": analyses,
        "unlock": {"exact": data_hiding_unlock("exact"), "monotone": mono, "rows": [list(r) for r in rows]},
    }
    _emit_json(args, _report(args, body, ok))
    return ok


def _load_protocol(spec):
    from .bundled import BUNDLED, bundled_protocol
    from .io import protocol_from_data, read_json

    if spec in BUNDLED:
        return bundled_protocol(spec)
    if not os.path.exists(spec):
        raise UsageError(f"no protocol file {spec!r} and no bundled protocol of that name ({sorted(BUNDLED)})")
    return protocol_from_data(read_json(spec))


def cmd_simulate(args):
    from .compiler import compile_to_uworld, random_uworld_cheat, translate_cheat_to_iworld, translate_cheat_to_uworld
    from .games import run_game, strategies_equivalent
    from .io import read_json, strategy_from_data
    from .linalg import rng_for

    p = _load_protocol(args.protocol)
    c = compile_to_uworld(p, reduce=True)
    src = c.source
    honest_dev = run_game(src).deviation(run_game(c.target), "joint")
    body = {"protocol": src.name, "charge_system": src.cs.name, "honest_deviation": honest_dev}
    passed = honest_dev <= 1e-12
    if args.cheat:
        if args.cheat == "random":
            ucheat = random_uworld_cheat(c, args.party, rng_for(args.seed))
            icheat = translate_cheat_to_iworld(c, ucheat)
        else:
            data = read_json(args.cheat)
            world = data.get("world", "U") if isinstance(data, dict) else "U"
            if world == "U":
                ucheat = strategy_from_data(data, c.target)
                icheat = translate_cheat_to_iworld(c, ucheat)
            else:
                icheat = strategy_from_data(data, src)
                ucheat = translate_cheat_to_uworld(c, icheat)
        _, dev = strategies_equivalent(c.target, ucheat, src, icheat)
        honest = "B" if ucheat.party == "A" else "A"
        du = run_game(c.target, **{"alice" if ucheat.party == "A" else "bob": ucheat})
        di = run_game(src, **{"alice" if icheat.party == "A" else "bob": icheat})
        body.update(
            {
                "cheater": ucheat.party,
                "honest_party": honest,
                "deviation": dev,
                "abort_uworld": du.abort,
                "abort_iworld": di.abort,
                "outcomes": [
                    {"outcome": k, "uworld": float(a), "iworld": float(b)} for k, (a, b) in enumerate(zip(du.probs, di.probs))
                ],
            }
        )
        passed = passed and dev <= args.tol
    _emit_json(args, _report(args, body, passed))
    return passed


def cmd_fusion_table(args):
    from .charges import charge_system

    cs = charge_system(args.system)
    rows = [
        (cs.labels[a], cs.labels[b], cs.labels[c], int(cs.fusion[a, b, c]))
        for a in range(len(cs))
        for b in range(len(cs))
        for c in range(len(cs))
        if cs.fusion[a, b, c]
    ]
    if args.format == "csv":
        _emit_csv(args, ["a", "b", "c", "multiplicity"], rows)
    else:
        _emit_json(args, _report(args, {"system": cs.to_data()}, True))
    return True


# wiring --------------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="ssrsim", description="Superselection-rule simulations and checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_, fmt="json"):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="64-bit seed (default $SSRSIM_SEED or 0)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=fmt)
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp so reruns are byte-identical")
        return p

    p = add("verify-props", cmd_verify_props, "reference-lift properties for a finite group")
    p.add_argument("--group", required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-10)

    p = add("p1-sweep", cmd_p1_sweep, "U(1) coherence-check failure probability vs reference size", fmt="csv")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-12)

    p = add("bitcommit", cmd_bitcommit, "steering attack on random and SU(2) commitments")
    p.add_argument("--system", default="s3")
    p.add_argument("--trials", type=int, default=200)

    p = add("datahide", cmd_datahide, "data-hiding analysis and unlock sweep")
    p.add_argument("--instance", default="all")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--n-max", type=int, default=64)

    p = add("simulate", cmd_simulate, "compile a protocol to the U-world and compare a cheat in both games")
    p.add_argument("--protocol", required=True, help="protocol file or bundled name")
    p.add_argument("--cheat", default=None, help="strategy file, or 'random'")
    p.add_argument("--party", choices=("A", "B"), default="A", help="cheater seat for --cheat random")
    p.add_argument("--tol", type=float, default=1e-10)

    p = add("fusion-table", cmd_fusion_table, "fusion multiplicities of a charge system", fmt="csv")
    p.add_argument("--system", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 2
        if args.seed is None:
            args.seed = _seed_default()
        start = time.perf_counter()
        passed = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SSRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"done in {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
