"""Command line front end.

Three subcommands:

 * run     -- execute one seeded protocol run, optionally exporting a
              JSONL transcript; exit 0 iff the run met its verdict
 * verify  -- re-check every proof in a transcript offline
 * replay  -- re-apply a transcript to a fresh chain and compare hashes
"""

import argparse
import json
import sys

from .harness import (
    ADVERSARY_MODES,
    RunConfig,
    TranscriptError,
    replay_transcript,
    run_experiment,
    verify_transcript,
)
from .contracts import CONTRACT_NAMES
from .group import GROUP_NAMES


def _parse_values(text: str):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("values must be comma-separated integers")


def _parse_aux(text: str):
    try:
        return tuple(bytes.fromhex(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("aux must be comma-separated hex strings")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pscsim",
        description="simulate private smart contract runs over committed coins",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one protocol run")
    run.add_argument("--values", type=_parse_values, default=None,
                     help="comma-separated party deposits, e.g. 0,5,3")
    run.add_argument("--contract", choices=CONTRACT_NAMES, default=None)
    run.add_argument("--ell", type=int, default=None, help="bit width of values")
    run.add_argument("--group", choices=GROUP_NAMES, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--adversary", choices=ADVERSARY_MODES, default=None)
    run.add_argument("--aux", type=_parse_aux, default=None,
                     help="comma-separated hex aux strings, one per party")
    run.add_argument("--finalizer", choices=("first", "all"), default=None)
    run.add_argument("--transcript", default=None, help="write a JSONL transcript")
    run.add_argument("--config", default=None, help="JSON file with run settings")
    run.add_argument("--quiet", action="store_true")

    verify = sub.add_parser("verify", help="re-verify all proofs in a transcript")
    verify.add_argument("transcript")
    verify.add_argument("--quiet", action="store_true")

    replay = sub.add_parser("replay", help="re-execute a transcript and check hashes")
    replay.add_argument("transcript")
    return parser


_FLAG_TO_FIELD = {
    "values": "values",
    "contract": "contract",
    "ell": "ell",
    "group": "group_name",
    "seed": "seed",
    "adversary": "adversary",
    "aux": "aux",
    "finalizer": "finalizer",
    "transcript": "transcript_path",
}


def _config_from_args(args) -> RunConfig:
    settings = {}
    if args.config:
        with open(args.config) as fh:
            settings = json.load(fh)
        if "aux" in settings:
            settings["aux"] = [a for a in settings["aux"]]
    base = RunConfig.from_dict(settings) if settings else None
    merged = base.to_dict() if base else RunConfig(values=()).to_dict()
    for flag, field_name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag)
        if value is not None:
            merged[field_name] = value
    cfg = RunConfig.from_dict(
        {
            **merged,
            "values": merged["values"],
            "aux": [
                a.hex() if isinstance(a, bytes) else a for a in merged["aux"]
            ],
        }
    )
    if not cfg.values:
        raise SystemExit("no values given: use --values or a config file")
    return cfg


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    result = run_experiment(cfg)
    report = result.report
    if not args.quiet:
        print(
            f"contract={cfg.contract} parties={len(cfg.values)} ell={cfg.ell} "
            f"group={cfg.group_name} seed={cfg.seed} adversary={cfg.adversary}"
        )
        for kind, sender, reason in report.outcomes:
            print(f"  {kind:<8} from {sender:<4} -> {reason}")
        print(f"final phase: {report.final_phase}")
        if report.out is not None:
            print(f"public output: {report.out!r}")
        recovered = ", ".join(
            f"{p}={v}" if v is not None else f"{p}=?"
            for p, v in report.recovered.items()
        )
        print(f"recovered payouts: {recovered}")
        if report.zero_sum_ok is not None:
            print(f"zero-sum: {'ok' if report.zero_sum_ok else 'VIOLATED'}")
        if report.expected_rejection_seen is not None:
            intact = (
                "state intact" if report.rejection_state_intact else "STATE CHANGED"
            )
            seen = "seen" if report.expected_rejection_seen else "MISSING"
            print(f"expected rejection: {seen} ({intact})")
        if cfg.transcript_path:
            print(f"transcript written to {cfg.transcript_path}")
        print(f"verdict: {'ok' if report.ok else 'FAILED'} "
              f"({report.duration_s:.3f}s)")
    return 0 if report.ok else 1


def _cmd_verify(args) -> int:
    try:
        report = verify_transcript(args.transcript)
    except (TranscriptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    passed = sum(1 for c in report.checks if c.ok is True)
    failed = [c for c in report.checks if c.ok is False]
    skipped = [c for c in report.checks if c.ok is None]
    if not args.quiet:
        for c in failed:
            print(f"line {c.line_no}: {c.label} FAILED")
        for c in skipped:
            print(f"line {c.line_no}: {c.label} skipped ({c.note})")
        for m in report.mismatches:
            print(f"mismatch: {m}")
    print(
        f"{passed} proofs pass, {len(failed)} fail, {len(skipped)} skipped; "
        f"outcomes {'consistent' if report.consistent else 'INCONSISTENT'}"
    )
    return 0 if report.consistent else 1


def _cmd_replay(args) -> int:
    try:
        report = replay_transcript(args.transcript)
    except (TranscriptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for d in report.divergences:
        print(d)
    print(
        f"replayed {report.messages} messages; final state hash "
        f"{report.final_state_hash[:16]}... "
        f"{'matches' if report.match else 'DIVERGES FROM'} the transcript"
    )
    return 0 if report.match else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    return _cmd_replay(args)


if __name__ == "__main__":
    sys.exit(main())
