"""Walk through one sealed-bid auction run and narrate each step.

Usage: python scripts/run_auction_demo.py [seed]

Shows what the chain sees (commitments only), what the evaluator
returns, and what each party recovers, then round-trips the transcript
through offline verification and replay.
"""

import sys
import tempfile

from pscsim import RunConfig, run_experiment, replay_transcript, verify_transcript


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 42
    values = (0, 180, 435, 301)  # seller deposit, then three sealed bids
    cfg = RunConfig(values=values, contract="auction", ell=10, seed=seed)
    result = run_experiment(cfg)
    report = result.report

    print(f"auction, seed {seed}: seller P1, bids {values[1:]}")
    print(f"session id: {report.contract_id[:16]}...")
    print()
    for event in result.events:
        o = event.outcome
        print(
            f"  on-chain message {event.seq}: {o.kind} from {event.sender}, "
            f"{len(event.payload)} bytes -> {o.reason}"
        )
    print()
    print(f"final phase: {report.final_phase}")
    print(f"public output (winner index): {report.out!r}")
    for party, value in report.recovered.items():
        print(f"  {party} recovers {value}")
    print(f"zero-sum holds: {report.zero_sum_ok}")

    with tempfile.NamedTemporaryFile(suffix=".jsonl", delete=False) as fh:
        path = fh.name
    from pscsim.harness import export_transcript

    export_transcript(result, path)
    vr = verify_transcript(path)
    ok = sum(1 for c in vr.checks if c.ok is True)
    print(f"offline verify: {ok}/{len(vr.checks)} proofs pass, "
          f"consistent={vr.consistent}")
    rr = replay_transcript(path)
    print(f"replay: {rr.messages} messages, hash match={rr.match}")
    return 0 if report.ok and vr.consistent and rr.match else 1


if __name__ == "__main__":
    sys.exit(main())
