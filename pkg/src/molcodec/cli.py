"""Command-line entry point: ``molcodec <command> ...``.

Tabular output is CSV with a header row.  Channel and run settings can come
from a ``key = value`` config file (``--config``); flags override it.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .channel import fast_counts, impulse_response, simulate, write_trace
from .detection import load_calibrations, save_calibrations
from .harness import (ANALYSES, BASELINE, DESK_MOLECULES, DESK_WORDS, PILOT_WORDS, WORD_LENGTH,
                      NormalizedConfig, calibrate, channel_for, channel_from, curve, evaluate,
                      normalize, read_config, scheme_stats, write_csv)
from .schemes import CODEBOOK_BUILDERS, SCHEMES, Scheme
from .source import DecodeError, EncodingError, resolve_alphabet


def _ints(text: str) -> list[int]:
    """``100,200`` or ``10:400:10`` (inclusive stop)."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


def _names(text: str) -> list[str]:
    names = [n.strip().lower() for n in text.split(",") if n.strip()]
    bad = [n for n in names if n not in SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown scheme(s): {', '.join(bad)}")
    return names


@contextmanager
def _out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _lines(path):
    text = sys.stdin.read() if path in (None, "-") else Path(path).read_text()
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def _parse_word(line: str, alphabet) -> tuple[str, ...]:
    # whitespace-separated symbols, or one character per symbol
    word = tuple(line.split()) if " " in line or "\t" in line else tuple(line)
    if alphabet.has_eof and (not word or word[-1] != alphabet.eof):
        word = word + (alphabet.eof,)
    return word


def _show_word(word, alphabet) -> str:
    sep = "" if all(len(s) == 1 for s in alphabet.symbols) else " "
    return sep.join(word)


def _config(args) -> dict:
    return read_config(args.config) if getattr(args, "config", None) else {}


def _setting(args, config, name, conv, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return conv(config[name]) if name in config else default


def _channel(args, config):
    return channel_from(config, D=args.D, r0=args.r0, rR=args.rR, ts=args.ts, dt=args.dt,
                        noise_variance=args.noise_variance,
                        molecules_per_one=getattr(args, "molecules_per_one", None))


# ---------------------------------------------------------------- commands

def cmd_codebook(args):
    alphabet = resolve_alphabet(args.alphabet)
    with _out(args.output) as fh:
        fh.write("scheme,symbol,probability,code\n")
        for kind in args.kind:
            book = CODEBOOK_BUILDERS[kind](alphabet)
            for s, p in zip(alphabet.symbols, alphabet.probs):
                fh.write(f"{kind},{s},{float(p):g},{book.codes[s]}\n")
    return 0


def cmd_encode(args):
    alphabet = resolve_alphabet(args.alphabet)
    scheme = Scheme(args.scheme, alphabet, args.precision)
    with _out(args.output) as fh:
        for line in _lines(args.input):
            fh.write(scheme.encode(_parse_word(line, alphabet)) + "\n")
    return 0


def cmd_decode(args):
    alphabet = resolve_alphabet(args.alphabet)
    scheme = Scheme(args.scheme, alphabet, args.precision)
    if not alphabet.has_eof and args.length_hint is None:
        print("error: alphabets without EOF need --length-hint", file=sys.stderr)
        return 2
    status = 0
    with _out(args.output) as fh:
        for bits in _lines(args.input):
            try:
                word = scheme.decode_strict(bits, args.length_hint or 8 * len(bits) + 64)
            except (DecodeError, ValueError) as exc:
                print(f"error: {bits}: {exc}", file=sys.stderr)
                status = 1
                continue
            fh.write(_show_word(word, alphabet) + "\n")
    return status


def cmd_stats(args):
    alphabet = resolve_alphabet(args.alphabet)
    with _out(args.output) as fh:
        fh.write("scheme,expected_bits,expected_ones,exact\n")
        for name in args.schemes:
            s = Scheme(name, alphabet, args.precision)
            st = scheme_stats(s, args.word_length, args.samples, args.seed)
            fh.write(f"{name},{st.expected_bits:.5f},{st.expected_ones:.5f},{int(s.exact_stats)}\n")
    return 0


def cmd_normalize(args):
    alphabet = resolve_alphabet(args.alphabet)
    config = _config(args)
    ts = _setting(args, config, "ts", int, 200)
    base = scheme_stats(Scheme(args.baseline, alphabet, args.precision), args.word_length,
                        args.samples, args.seed)
    with _out(args.output) as fh:
        fh.write("scheme,signal_interval_ms,molecule_factor,"
                 + ",".join(f"molecules_M{m}" for m in args.molecules) + "\n")
        for name in args.schemes:
            st = scheme_stats(Scheme(name, alphabet, args.precision), args.word_length,
                              args.samples, args.seed)
            cfgs = [normalize(base, NormalizedConfig(ts, m), st, m) for m in args.molecules]
            fh.write(f"{name},{cfgs[0].signal_interval},{cfgs[0].factor_display},"
                     + ",".join(str(c.molecules_per_one) for c in cfgs) + "\n")
    return 0


def _normalized_setup(args, alphabet, config):
    base = _channel(args, config)
    baseline = scheme_stats(Scheme(BASELINE, alphabet, args.precision), args.word_length,
                            args.samples, args.seed)
    out = {}
    for name in args.schemes:
        s = Scheme(name, alphabet, args.precision)
        st = scheme_stats(s, args.word_length, args.samples, args.seed)
        for m in args.molecules:
            params, cfg = channel_for(s, base, st, baseline, m)
            out[name, m] = (s, params, cfg)
    return out


def cmd_calibrate(args):
    alphabet = resolve_alphabet(args.alphabet)
    config = _config(args)
    table = {}
    with _out(args.report) as fh:
        fh.write("scheme,molecules,signal_interval_ms,molecules_per_one,a,spacing,min,pilot_ser\n")
        for (name, m), (s, params, cfg) in _normalized_setup(args, alphabet, config).items():
            cal = calibrate(s, params, args.pilots, args.word_length, args.seed,
                            args.rmin_mode, args.spacings, args.method)
            table[name, m] = cal.params
            p = cal.params
            fh.write(f"{name},{m},{params.ts},{params.molecules_per_one},{p.a:.3f},"
                     f"{p.spacing},{p.min},{cal.pilot_ser:.6f}\n")
    save_calibrations(args.output, table)
    return 0


def cmd_simulate(args):
    config = _config(args)
    params = _channel(args, config)
    bits = args.bits if args.bits is not None else "".join(_lines(args.input))
    if set(bits) - set("01"):
        print("error: bits must be 0/1", file=sys.stderr)
        return 2
    if args.method == "tracking":
        counts = simulate(bits, params, args.seed)
    else:
        counts = fast_counts(bits, params, np.random.default_rng(args.seed), impulse_response(params))
    with _out(args.output) as fh:
        write_trace(fh, counts)
    return 0


def cmd_evaluate(args):
    alphabet = resolve_alphabet(args.alphabet)
    config = _config(args)
    calibrations = load_calibrations(args.calibration) if args.calibration else {}
    with _out(args.output) as fh:
        fh.write("scheme,molecules,signal_interval_ms,molecules_per_one,a,spacing,min,wer,ser,words\n")
        for (name, m), (s, params, cfg) in _normalized_setup(args, alphabet, config).items():
            det = calibrations.get((name, m))
            if det is None:
                det = calibrate(s, params, args.pilots, args.word_length, args.seed,
                                args.rmin_mode, args.spacings, args.method).params
            rep = evaluate(s, params, det, args.word_length, args.words, args.seed,
                           args.rmin_mode, args.method)
            fh.write(f"{name},{m},{params.ts},{params.molecules_per_one},{det.a:.3f},{det.spacing},"
                     f"{det.min},{rep.wer:.6f},{rep.ser:.6f},{rep.words_sent}\n")
            fh.flush()
    return 0


def cmd_curve(args):
    alphabet = resolve_alphabet(args.alphabet)
    schemes = [Scheme(n, alphabet, args.precision) for n in args.schemes]
    rows = curve(args.analysis, schemes, args.lengths, args.samples, args.seed)
    with _out(args.output) as fh:
        write_csv(rows, fh)
    return 0


# ---------------------------------------------------------------- parser

def _add_channel(p):
    g = p.add_argument_group("channel (override the config file)")
    g.add_argument("--config", help="key = value settings file")
    g.add_argument("--D", type=float, help="diffusion coefficient, um^2/s")
    g.add_argument("--r0", type=float, help="transmitter distance, um")
    g.add_argument("--rR", type=float, help="receiver radius, um")
    g.add_argument("--ts", type=int, help="uncoded signal interval, ms")
    g.add_argument("--dt", type=float, help="simulation step, ms")
    g.add_argument("--noise-variance", dest="noise_variance", type=float)
    g.add_argument("--method", choices=("fast", "tracking"), default="fast",
                   help="impulse-response sampling or full particle tracking")


def _add_run(p, samples=10**5):
    p.add_argument("--alphabet", default="alphabet1", help="built-in name or definition file")
    p.add_argument("--schemes", type=_names, default=list(SCHEMES))
    p.add_argument("--word-length", type=int, default=WORD_LENGTH)
    p.add_argument("--samples", type=int, default=samples,
                   help="Monte Carlo words for arithmetic-code statistics")
    p.add_argument("--precision", type=int, default=20, help="coder register bits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="molcodec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codebook", help="print prefix codebooks")
    p.add_argument("--alphabet", default="alphabet1")
    p.add_argument("--kind", type=lambda t: [k.strip() for k in t.split(",")],
                   default=["huffman", "mohuffman", "mopc"],
                   help=f"comma list from {', '.join(CODEBOOK_BUILDERS)}")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_codebook)

    for name, func in (("encode", cmd_encode), ("decode", cmd_decode)):
        p = sub.add_parser(name, help=f"{name} one word per line")
        p.add_argument("--scheme", choices=SCHEMES, default="moapc")
        p.add_argument("--alphabet", default="alphabet1")
        p.add_argument("--precision", type=int, default=20)
        p.add_argument("-i", "--input", help="file, default stdin")
        p.add_argument("-o", "--output", help="file, default stdout")
        if name == "decode":
            p.add_argument("--length-hint", type=int,
                           help="symbols per word (needed without an EOF symbol)")
        p.set_defaults(func=func)

    p = sub.add_parser("stats", help="expected bits and 1-bits per word")
    _add_run(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("normalize", help="signal intervals and molecule counts")
    _add_run(p)
    p.add_argument("--baseline", choices=SCHEMES, default=BASELINE)
    p.add_argument("--molecules", type=_ints, default=list(DESK_MOLECULES))
    p.add_argument("--config")
    p.add_argument("--ts", type=int)
    p.set_defaults(func=cmd_normalize)

    for name, func in (("calibrate", cmd_calibrate), ("evaluate", cmd_evaluate)):
        p = sub.add_parser(name, help="pilot calibration" if name == "calibrate"
                           else "word and symbol error rates")
        _add_run(p)
        _add_channel(p)
        p.add_argument("--molecules", type=_ints, default=list(DESK_MOLECULES))
        p.add_argument("--pilots", type=int, default=PILOT_WORDS)
        p.add_argument("--rmin-mode", choices=("nonzero", "exclude_first"), default="nonzero")
        p.add_argument("--spacings", type=_ints,
                       help="spacing sweep, e.g. 2:40 (default 2 .. 2 x bits per symbol)")
        if name == "calibrate":
            p.add_argument("--report", help="CSV summary, default stdout")
            p.set_defaults(output="calibration.ini")
        else:
            p.add_argument("--words", type=int, default=DESK_WORDS)
            p.add_argument("--calibration", help="file written by 'calibrate'")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="received counts per signal interval")
    _add_channel(p)
    p.add_argument("--molecules-per-one", type=int)
    p.add_argument("--bits", help="bit string (or use --input)")
    p.add_argument("-i", "--input")
    p.add_argument("-o", "--output")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate, method="tracking")

    p = sub.add_parser("curve", help="length, 1-bit, accuracy or ratio curves")
    p.add_argument("analysis", choices=ANALYSES)
    p.add_argument("--alphabet", default="alphabet1")
    p.add_argument("--schemes", type=_names, default=["sac", "moac"])
    p.add_argument("--lengths", type=_ints, default=_ints("10:400:10"))
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--precision", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_curve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EncodingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
