"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from importlib import metadata
from pathlib import Path

from . import kem
from .estimator import failure_probability, gaussian_estimate
from .params import ALL_ROWS, PARAMETER_SETS, SEED_BYTES, ParameterSet, get_parameter_set
from .symmetric import shake128

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
KAT_SEED_BYTES = 48
KAT_FIELDS = ("count", "seed", "pk", "sk", "ct", "ss")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _hex_bytes(text: str, length: int, what: str) -> bytes:
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise UsageError(f"{what} is not valid hex") from None
    if len(raw) != length:
        raise UsageError(f"{what} must be {length} bytes, got {len(raw)}")
    return raw


def _read(path: str, length: int, what: str) -> bytes:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {what}: {exc}") from None
    if len(data) != length:
        raise UsageError(f"{what} must be {length} bytes, got {len(data)}")
    return data


def _params(name: str) -> ParameterSet:
    try:
        return get_parameter_set(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def split_keygen_seed(seed: bytes) -> tuple[bytes, bytes]:
    """(keyseed, zseed) from one 32-byte CLI seed."""
    out = shake128(b"keygen" + seed, 2 * SEED_BYTES)
    return out[:SEED_BYTES], out[SEED_BYTES:]


def kat_seeds(record_seed: bytes) -> tuple[bytes, bytes, bytes]:
    """(keyseed, zseed, mseed) from a 48-byte KAT record seed."""
    out = shake128(record_seed, 3 * SEED_BYTES)
    return out[:32], out[32:64], out[64:]


def kat_record_seed(master: bytes, index: int) -> bytes:
    return shake128(master + index.to_bytes(4, "little"), KAT_SEED_BYTES)


def kat_record(params: ParameterSet, count: int, seed: bytes) -> dict[str, str]:
    keyseed, zseed, mseed = kat_seeds(seed)
    pk, sk = kem.keygen(params, keyseed, zseed)
    ct, ss = kem.encaps(params, pk, mseed)
    return {"count": str(count), "seed": seed.hex(), "pk": pk.hex(), "sk": sk.hex(),
            "ct": ct.hex(), "ss": ss.hex()}


def format_kat(params: ParameterSet, records: list[dict[str, str]]) -> str:
    lines = [f"# {params.name} KAT", f"# version = {_version()}", ""]
    for rec in records:
        lines += [f"{key} = {rec[key]}" for key in KAT_FIELDS] + [""]
    return "\n".join(lines)


def parse_kat(text: str) -> tuple[str | None, list[dict[str, str]]]:
    """(parameter-set name from the header, records)."""
    name = None
    records: list[dict[str, str]] = []
    current: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if line.startswith("#"):
            words = line[1:].split()
            if lineno == 1 and len(words) == 2 and words[1] == "KAT":
                name = words[0]
            continue
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in KAT_FIELDS:
            raise UsageError(f"malformed KAT line {lineno}")
        if key == "count" and current:
            records.append(current)
            current = {}
        current[key] = value
    if current:
        records.append(current)
    return name, records


def verify_kat(params: ParameterSet, records: list[dict[str, str]]) -> list[str]:
    """Mismatch descriptions; empty when every record regenerates exactly."""
    problems = []
    for rec in records:
        if set(rec) != set(KAT_FIELDS):
            problems.append(f"record {rec.get('count', '?')}: missing fields")
            continue
        try:
            seed = bytes.fromhex(rec["seed"])
        except ValueError:
            problems.append(f"record {rec['count']}: bad seed hex")
            continue
        fresh = kat_record(params, int(rec["count"]), seed)
        for key in KAT_FIELDS[2:]:
            if fresh[key] != rec[key].lower():
                problems.append(f"record {rec['count']}: {key} mismatch")
    return problems


def cmd_keygen(args) -> int:
    params = _params(args.param)
    seed = _hex_bytes(args.seed, SEED_BYTES, "seed") if args.seed else os.urandom(SEED_BYTES)
    pk, sk = kem.keygen(params, *split_keygen_seed(seed))
    Path(args.out + ".pk").write_bytes(pk)
    Path(args.out + ".sk").write_bytes(sk)
    return EXIT_OK


def cmd_encaps(args) -> int:
    params = _params(args.param)
    pk = _read(args.pk, params.pk_bytes, "public key")
    mseed = _hex_bytes(args.seed, SEED_BYTES, "seed") if args.seed else os.urandom(SEED_BYTES)
    try:
        ct, ss = kem.encaps(params, pk, mseed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    Path(args.out + ".ct").write_bytes(ct)
    Path(args.out + ".ss").write_bytes(ss)
    return EXIT_OK


def cmd_decaps(args) -> int:
    params = _params(args.param)
    sk = _read(args.sk, params.sk_bytes, "secret key")
    ct = _read(args.ct, params.ct_bytes, "ciphertext")
    try:
        ss = kem.decaps(params, sk, ct)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(ss.hex())
    return EXIT_OK


def cmd_kat(args) -> int:
    params = _params(args.param)
    if args.verify:
        try:
            text = Path(args.verify).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read KAT file: {exc}") from None
        name, records = parse_kat(text)
        if name is not None and get_parameter_set(name) is not params:
            print(f"KAT file is for {name}, not {params.name}", file=sys.stderr)
            return EXIT_VERIFY
        problems = verify_kat(params, records)
        for problem in problems:
            print(problem, file=sys.stderr)
        print(f"{'FAIL' if problems else 'OK'}: {len(records)} records")
        return EXIT_VERIFY if problems else EXIT_OK
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    master = _hex_bytes(args.seed, KAT_SEED_BYTES, "seed") if args.seed else bytes(KAT_SEED_BYTES)
    records = [kat_record(params, i, kat_record_seed(master, i)) for i in range(args.count)]
    text = format_kat(params, records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_estimate(args) -> int:
    rows = ALL_ROWS if args.param == "all" else [_params(args.param)]
    print(f"{'parameter set':24s} {'log2 delta':>10s} {'gaussian':>9s} {'seconds':>8s}")
    for params in rows:
        start = time.perf_counter()
        report = failure_probability(params)
        elapsed = time.perf_counter() - start
        print(f"{params.name:24s} {report.log2_delta:10.1f} {gaussian_estimate(params):9.1f} "
              f"{elapsed:8.2f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    params = _params(args.param)
    if args.iters < 1:
        raise UsageError("--iters must be at least 1")
    seeds = [os.urandom(SEED_BYTES) for _ in range(args.iters)]
    timings = {}
    start = time.perf_counter_ns()
    keys = [kem.keygen(params, s, s) for s in seeds]
    timings["KeyGen"] = time.perf_counter_ns() - start
    start = time.perf_counter_ns()
    cts = [kem.encaps(params, pk, s)[0] for (pk, _), s in zip(keys, seeds)]
    timings["Encaps"] = time.perf_counter_ns() - start
    start = time.perf_counter_ns()
    for (_, sk), ct in zip(keys, cts):
        kem.decaps(params, sk, ct)
    timings["Decaps"] = time.perf_counter_ns() - start
    print(f"{params.name}: {args.iters} iterations")
    for op, total in timings.items():
        print(f"{op:8s} {total / args.iters / 1000:12.1f} us/op")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    names = ", ".join(sorted(PARAMETER_SETS))
    parser = _Parser(prog="ctru", description="CTRU / CNTR key encapsulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("keygen", help="generate a key pair")
    p.add_argument("--param", required=True, help=names)
    p.add_argument("--seed", help="32-byte hex seed (default: system RNG)")
    p.add_argument("--out", required=True, help="writes OUT.pk and OUT.sk")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encaps", help="encapsulate to a public key")
    p.add_argument("--param", required=True)
    p.add_argument("--pk", required=True)
    p.add_argument("--seed", help="32-byte hex message seed (default: system RNG)")
    p.add_argument("--out", required=True, help="writes OUT.ct and OUT.ss")
    p.set_defaults(func=cmd_encaps)

    p = sub.add_parser("decaps", help="decapsulate; prints the shared key in hex")
    p.add_argument("--param", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--ct", required=True)
    p.set_defaults(func=cmd_decaps)

    p = sub.add_parser("kat", help="generate or verify known-answer tests")
    p.add_argument("--param", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", help="48-byte hex master seed (default: zeros)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--verify", metavar="FILE", help="verify FILE instead of generating")
    p.set_defaults(func=cmd_kat)

    p = sub.add_parser("estimate", help="decryption failure probability")
    p.add_argument("--param", required=True, help=f"{names}, or all")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bench", help="time KeyGen / Encaps / Decaps")
    p.add_argument("--param", required=True)
    p.add_argument("--iters", type=int, default=100)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ctru: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
