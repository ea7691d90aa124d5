"""Command-line entry points.

Subcommands: `gen-params` (safe-prime search / parameter files), `demo`
(both roles in-process, transcript to stdout), `seller` / `buyer` (two
processes over TCP with binary framing), `verify` (replay a transcript
file), and `analyze` (incentive lemma, noise report, weight recovery).

Exit codes: 0 success/verified, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import random
import socket
import sys

from . import analysis
from .codec import (
    Message,
    TAG_COIN_PAIR,
    TAG_COMMIT,
    TAG_COMMIT_PROOF,
    TAG_OUTCOME,
    Transcript,
    transcript_dumps,
    transcript_loads,
)
from .errors import CodecError, VerificationFailed, ZkmechError
from .group import (
    GroupParams,
    RFC3526_MODP_2048,
    derive_generators,
    gen_params,
    load_params_file,
    params_from_modulus,
    save_params_file,
)
from .protocols import (
    BuyerSession,
    MechanismSpec,
    Outcome,
    SellerSession,
    run_local,
    verify_transcript,
)

TOY_Q = 23  # default desk-scale group
DEFAULT_CRS_SEED = bytes.fromhex(
    "8e4b1c2ff7a95d360b81e5c4a2d90377c6f1508e2ab4d96713c08f5be2a4d017"
)


def _role_rng(seed_hex: str | None, role: str) -> random.Random:
    if seed_hex is None:
        return random.SystemRandom()
    material = bytes.fromhex(seed_hex) + role.encode()
    return random.Random(int.from_bytes(hashlib.sha256(material).digest(), "big"))


def _resolve_group(args) -> tuple[GroupParams, bytes]:
    if getattr(args, "group", None):
        return load_params_file(args.group)
    if getattr(args, "toy", False):
        return params_from_modulus(TOY_Q), DEFAULT_CRS_SEED
    return params_from_modulus(RFC3526_MODP_2048), DEFAULT_CRS_SEED


MAX_BOUND = 1 << 16


def _check_bound(bound: int) -> int:
    if bound > MAX_BOUND:
        raise ZkmechError(f"H must be at most {MAX_BOUND}")
    return bound


def _spec_from_args(args) -> tuple[MechanismSpec, list[int]]:
    kind = args.example
    bound = _check_bound(args.bound)
    if kind in ("ex1", "ex4"):
        if args.price is None or args.value is None:
            raise ZkmechError(f"{kind} needs --price and --value")
        return MechanismSpec(kind, bound, (args.price,)), [args.value]
    if kind == "ex1multi":
        if args.price is None or not args.values:
            raise ZkmechError("ex1multi needs --price and --values v1,v2,...")
        bids = [int(x) for x in args.values.split(",")]
        return MechanismSpec(kind, bound, (args.price,), n_buyers=len(bids)), bids
    if kind in ("ex2", "ex3"):
        if args.s1 is None or args.s2 is None:
            raise ZkmechError(f"{kind} needs --s1 and --s2")
        spec = MechanismSpec(kind, bound, (args.s1, args.s2))
        if kind == "ex2":
            if not args.values:
                raise ZkmechError("ex2 needs --values v1,v2")
            values = [int(x) for x in args.values.split(",")]
        else:
            if args.value is None:
                raise ZkmechError("ex3 needs --value")
            values = [args.value]
        return spec, values
    raise ZkmechError(f"unknown example {kind!r}")


# -- socket framing ---------------------------------------------------------------


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise CodecError("connection closed mid-frame")
        buf += chunk
    return buf


def _recv_message(sock: socket.socket) -> Message:
    header = _recv_exact(sock, 5)
    length = int.from_bytes(header[1:], "big")
    return Message(header[0], _recv_exact(sock, length))


def _send_messages(sock: socket.socket, msgs: list[Message]) -> None:
    sock.sendall(b"".join(m.frame() for m in msgs))


def _parse_endpoint(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


# -- subcommands -------------------------------------------------------------------


def _cmd_gen_params(args) -> int:
    if args.bits == 2048 and not args.search:
        params = params_from_modulus(RFC3526_MODP_2048)
    else:
        start = int(args.start_seed, 16) if args.start_seed else None
        params = gen_params(args.bits, start=start)
    crs = bytes.fromhex(args.crs_seed) if args.crs_seed else random.SystemRandom().randbytes(32)
    if args.out:
        save_params_file(args.out, params, crs)
        print(f"wrote {args.out}")
    else:
        print(f"q={params.q}")
        print(f"p={params.p}")
        print(f"seed={crs.hex()}")
    return 0


def _print_outcome(outcome: Outcome, stream) -> None:
    print(f"trade={str(outcome.trade).lower()}", file=stream)
    if outcome.item is not None:
        print(f"item={outcome.item}", file=stream)
    print(f"payment={outcome.payment}", file=stream)
    if outcome.lottery is not None:
        print(f"lottery={','.join(map(str, outcome.lottery))}", file=stream)


def _cmd_demo(args) -> int:
    params, crs = _resolve_group(args)
    ref = derive_generators(params, crs)
    spec, values = _spec_from_args(args)
    outcome, transcript = run_local(
        ref,
        spec,
        values,
        _role_rng(args.seed, "seller"),
        _role_rng(args.seed, "buyer"),
    )
    text = transcript_dumps(transcript)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _print_outcome(outcome, sys.stderr)
    return 0


def _cmd_seller(args) -> int:
    if args.example == "ex1multi":
        raise ZkmechError("networked sessions support single-buyer examples only")
    params, crs = _resolve_group(args)
    ref = derive_generators(params, crs)
    kind = args.example
    bound = _check_bound(args.bound)
    if kind in ("ex2", "ex3"):
        spec = MechanismSpec(kind, bound, (args.s1, args.s2))
    else:
        spec = MechanismSpec(kind, bound, (args.price,))
    seller = SellerSession(ref, spec, _role_rng(args.seed, "seller"))
    host, port = _parse_endpoint(args.listen)
    ordered: list[Message] = []
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as srv:
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind((host, port))
        srv.listen(1)
        print(f"listening on {host}:{srv.getsockname()[1]}", file=sys.stderr)
        conn, peer = srv.accept()
        with conn:
            commit_msgs = seller.begin()
            ordered.extend(commit_msgs)
            _send_messages(conn, commit_msgs)
            report = _recv_message(conn)
            ordered.append(report)
            evidence = seller.receive_reports([report])
            ordered.extend(evidence)
            _send_messages(conn, evidence)
            if seller.awaiting_mask:
                mask = _recv_message(conn)
                ordered.append(mask)
                closing = seller.receive_mask(mask)
                ordered.extend(closing)
                _send_messages(conn, closing)
    transcript = Transcript(kind=kind, bound=bound, seed=crs, messages=ordered)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(transcript_dumps(transcript))
    _print_outcome(seller.outcome, sys.stdout)
    return 0


def _cmd_buyer(args) -> int:
    if args.example == "ex1multi":
        raise ZkmechError("networked sessions support single-buyer examples only")
    params, crs = _resolve_group(args)
    ref = derive_generators(params, crs)
    kind = args.example
    bound = _check_bound(args.bound)
    host, port = _parse_endpoint(args.connect)
    ordered: list[Message] = []
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.connect((host, port))
        expect = [TAG_COMMIT, TAG_COMMIT_PROOF] if kind == "ex3" else [TAG_COMMIT]
        commit_msgs = [_recv_message(sock) for _ in expect]
        ordered.extend(commit_msgs)
        # The value is requested only now, after the commitment is already
        # fixed on the wire.
        if args.interactive:
            raw = input("value: " if kind != "ex2" else "values (v1,v2): ")
            values = [int(x) for x in raw.split(",")]
        elif kind == "ex2":
            values = [int(x) for x in args.values.split(",")]
        else:
            values = [args.value]
        buyer = BuyerSession(ref, kind, bound, values, _role_rng(args.seed, "buyer"))
        reports = buyer.receive_commit(commit_msgs)
        ordered.extend(reports)
        _send_messages(sock, reports)
        batch = []
        while True:
            msg = _recv_message(sock)
            batch.append(msg)
            if msg.tag in (TAG_COIN_PAIR, TAG_OUTCOME):
                break
        ordered.extend(batch)
        if batch[-1].tag == TAG_COIN_PAIR:
            mask = buyer.receive_evidence(batch)
            ordered.append(mask)
            _send_messages(sock, [mask])
            batch = []
            while True:
                msg = _recv_message(sock)
                batch.append(msg)
                if msg.tag == TAG_OUTCOME:
                    break
            ordered.extend(batch)
            outcome = buyer.receive_final(batch)
        else:
            outcome = buyer.receive_final(batch)
    transcript = Transcript(kind=kind, bound=bound, seed=crs, messages=ordered)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(transcript_dumps(transcript))
    _print_outcome(outcome, sys.stdout)
    return 0


def _cmd_verify(args) -> int:
    params, _ = _resolve_group(args)
    try:
        with open(args.transcript, "r", encoding="ascii") as fh:
            transcript = transcript_loads(fh.read())
        ref = derive_generators(params, transcript.seed)
        outcome = verify_transcript(ref, transcript)
    except (CodecError, VerificationFailed, ZkmechError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    print("verified", file=sys.stderr)
    _print_outcome(outcome, sys.stdout)
    return 0


def _cmd_analyze(args) -> int:
    if args.what == "ic-lemma":
        holds = analysis.ex3_ic_lemma_check(args.bound)
        print(f"H={args.bound}")
        print(f"lemma_holds={str(holds).lower()}")
        return 0 if holds else 1
    if args.what == "noise":
        if args.eps is not None:
            eps = args.eps
        elif args.alpha is not None:
            eps = 1.0 - args.alpha
        else:
            eps = 0.1
        if args.alpha is not None and abs(args.alpha - (1.0 - eps)) > 1e-12:
            raise ZkmechError("--alpha and --eps are inconsistent (alpha = 1 - eps)")
        report = analysis.noise_ratio_report(
            eps,
            args.ell,
            args.samples,
            (-args.window, args.window),
            _role_rng(args.seed, "noise") if args.seed else random.Random(0xD1CE),
        )
        sys.stdout.write(report.render())
        return 0
    if args.what == "groves":
        rng = _role_rng(args.seed, "groves") if args.seed else random.Random(0x9805)
        ok = True
        for _ in range(args.trials):
            inst = analysis.random_groves_instance(args.n, args.outcomes, rng)
            outcome = analysis.groves_outcome(inst)
            ok = ok and analysis.groves_extract_weights(inst.valuations, outcome) == inst.weights
        print(f"trials={args.trials}")
        print(f"exact_recovery={str(ok).lower()}")
        return 0 if ok else 1
    raise ZkmechError(f"unknown analysis {args.what!r}")


# -- argument parsing ----------------------------------------------------------------


def _add_group_flags(sp) -> None:
    sp.add_argument("--group", help="parameter file (q=/p=/seed= lines)")
    sp.add_argument("--toy", action="store_true", help="use the q=23 desk-scale group")
    sp.add_argument("--seed", help="hex seed for deterministic private randomness")


def _add_spec_flags(sp) -> None:
    sp.add_argument("--example", required=True, choices=["ex1", "ex1multi", "ex2", "ex3", "ex4"])
    sp.add_argument("--H", dest="bound", type=int, default=8, help="price bound (power of two)")
    sp.add_argument("--price", type=int, help="hidden price (ex1, ex1multi, ex4)")
    sp.add_argument("--s1", type=int, help="first hidden price (ex2, ex3)")
    sp.add_argument("--s2", type=int, help="second hidden price (ex2, ex3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zkmech",
        description="Hidden-mechanism auctions with zero-knowledge verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen-params", help="generate or emit group parameters")
    sp.add_argument("--bits", type=int, required=True)
    sp.add_argument("--start-seed", help="hex start point for a deterministic search")
    sp.add_argument("--crs-seed", help="hex reference-string seed to embed")
    sp.add_argument("--search", action="store_true", help="search even at 2048 bits")
    sp.add_argument("--out", help="write a parameter file instead of stdout")
    sp.set_defaults(func=_cmd_gen_params)

    sp = sub.add_parser("demo", help="run both roles in-process")
    _add_spec_flags(sp)
    sp.add_argument("--value", type=int, help="buyer value (ex1, ex3, ex4)")
    sp.add_argument("--values", help="comma-separated values/bids (ex2, ex1multi)")
    sp.add_argument("--out", help="transcript file (default: stdout)")
    _add_group_flags(sp)
    sp.set_defaults(func=_cmd_demo)

    sp = sub.add_parser("seller", help="serve one session over TCP")
    _add_spec_flags(sp)
    sp.add_argument("--listen", required=True, help="host:port (empty host = loopback)")
    sp.add_argument("--out", help="transcript file")
    _add_group_flags(sp)
    sp.set_defaults(func=_cmd_seller)

    sp = sub.add_parser("buyer", help="join one session over TCP")
    _add_spec_flags(sp)
    sp.add_argument("--value", type=int, help="buyer value")
    sp.add_argument("--values", help="comma-separated values (ex2)")
    sp.add_argument("--connect", required=True, help="host:port")
    sp.add_argument("--interactive", action="store_true", help="prompt for the value")
    sp.add_argument("--out", help="transcript file")
    _add_group_flags(sp)
    sp.set_defaults(func=_cmd_buyer)

    sp = sub.add_parser("verify", help="re-verify a transcript file")
    sp.add_argument("transcript")
    _add_group_flags(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("analyze", help="run an analysis report")
    asub = sp.add_subparsers(dest="what", required=True)
    a = asub.add_parser("ic-lemma")
    a.add_argument("--H", dest="bound", type=int, default=8)
    a = asub.add_parser("noise")
    a.add_argument("--alpha", type=float, default=None)
    a.add_argument("--eps", type=float, default=None)
    a.add_argument("--ell", type=int, default=1)
    a.add_argument("--window", type=int, default=50)
    a.add_argument("--samples", type=int, default=100_000)
    a.add_argument("--seed")
    a = asub.add_parser("groves")
    a.add_argument("--n", type=int, default=3)
    a.add_argument("--outcomes", type=int, default=4)
    a.add_argument("--trials", type=int, default=100)
    a.add_argument("--seed")
    sp.set_defaults(func=_cmd_analyze)

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except ZkmechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
