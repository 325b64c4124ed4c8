"""Minimal bridge process for exercising the external-oracle protocol.

    python -m ftalloc.echo_oracle --Q 1000 --R 1.0
    python -m ftalloc.echo_oracle --bowl 0.5 0.3 0.2      # Q = R = 1 + |s - a|^2
    python -m ftalloc.echo_oracle --die-after 50           # exit mid-run
    python -m ftalloc.echo_oracle --malformed-after 3      # garbage line
    python -m ftalloc.echo_oracle --Q 0.5                  # invalid Q
"""
import argparse
import json
import sys


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--Q", type=float, default=1000.0)
    ap.add_argument("--R", type=float, default=1.0)
    ap.add_argument("--bowl", type=float, nargs=3, metavar=("A_L", "A_T", "A_R"))
    ap.add_argument("--die-after", type=int, default=None, help="exit after this many responses")
    ap.add_argument("--malformed-after", type=int, default=None, help="send garbage after this many responses")
    ap.add_argument("--error-after", type=int, default=None, help="send an error object after this many responses")
    ap.add_argument("--reentrant", action="store_true")
    args = ap.parse_args(argv)

    print(json.dumps({"protocol": "ftalloc-oracle/1", "reentrant": args.reentrant}), flush=True)
    served = 0
    for line in sys.stdin:
        if args.die_after is not None and served >= args.die_after:
            return 3
        req = json.loads(line)
        if args.malformed_after is not None and served >= args.malformed_after:
            print("this is not json", flush=True)
        elif args.error_after is not None and served >= args.error_after:
            print(json.dumps({"error": "estimator refused the budget"}), flush=True)
        elif args.bowl:
            v = 1.0 + sum((s - a) ** 2 for s, a in zip(req["s"], args.bowl))
            print(json.dumps({"Q": v, "R_seconds": v}), flush=True)
        else:
            print(json.dumps({"Q": args.Q, "R_seconds": args.R}), flush=True)
        served += 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
