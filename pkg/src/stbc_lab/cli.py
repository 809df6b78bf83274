"""Command line entry point ``stbc-lab``."""

import argparse
import ast
import csv
import json
import logging
import math
import operator
import sys

import numpy as np

from . import clifford, harness, stbc

log = logging.getLogger("stbc_lab")

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sqrt": math.sqrt, "atan": math.atan}
_CONSTS = {"pi": math.pi}


def parse_number(text):
    """Evaluate a small arithmetic expression such as ``sqrt(3/5)``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        raise ValueError(f"unsupported expression: {text!r}")

    try:
        return ev(ast.parse(str(text), mode="eval"))
    except SyntaxError as exc:
        raise ValueError(f"cannot parse number {text!r}") from exc


def parse_count(text):
    """Integer flag that also accepts forms like ``1e6``."""
    try:
        return int(text)
    except ValueError:
        pass
    value = parse_number(text)
    if not float(value).is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def parse_snr_grid(text):
    """``start:step:stop`` (stop inclusive) or a comma-separated list."""
    text = str(text).strip()
    if not text:
        return ()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0:
            raise ValueError(f"SNR range must be start:step:stop with step > 0, got {text!r}")
        start, step, stop = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(max(n, 0)))
    return tuple(float(p) for p in text.split(","))


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _matrix_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def weights_json(a=None, code=None):
    if code is not None:
        c = harness.make_code(code)
        return {
            "code": c.name,
            "T": c.T,
            "Nt": c.Nt,
            "stretch_k": c.stretch_k,
            "norm_const": c.norm_const,
            "weights": [_matrix_json(w) for w in c.weights],
        }
    gens = clifford.generate(a)
    out = {"a": a, "generators": [_matrix_json(m) for m in gens.matrices]}
    if a >= 2:
        t1, t2 = clifford.partition_terms(a)
        g1, g2 = clifford.build_partition(gens)
        out["groups"] = [
            [{"j_power": p, "product": list(idx), "matrix": _matrix_json(m)} for (p, idx), m in zip(t, g)]
            for t, g in ((t1, g1), (t2, g2))
        ]
    return out


def cmd_gen_weights(args):
    data = weights_json(a=args.a, code=args.code)
    text = json.dumps(data, indent=1)
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


def _term_label(p, idx):
    prefix = {0: "", 1: "j", 2: "-", 3: "-j"}[p % 4]
    return prefix + ("".join(f"R{i}" for i in idx) or "I")


def cmd_verify(args):
    gens = clifford.generate(args.a)
    viol = gens.invariant_violations()
    ok_gens = all(v < clifford.ALGEBRA_TOL for v in viol.values())
    print(f"generators a={args.a}: {len(gens)} matrices of size {gens.size}")
    for name, v in viol.items():
        print(f"  {name:15s} max violation {v:.3e}")
    print(f"  {'PASS' if ok_gens else 'FAIL'}")
    ok = ok_gens
    if args.a >= 2:
        t1, t2 = clifford.partition_terms(args.a)
        g1, g2 = clifford.build_partition(gens)
        res = clifford.check_intergroup(g1, g2)
        print("G1 = {" + ", ".join(_term_label(*t) for t in t1) + "}")
        print("G2 = {" + ", ".join(_term_label(*t) for t in t2) + "}")
        print(f"intergroup condition: max violation {res.max_violation:.3e} -> {'PASS' if res.passed else 'FAIL'}")
        rate_ok = len(g1) + len(g2) == 2 * gens.size
        print(f"|G1| + |G2| = {len(g1) + len(g2)} (rate one needs {2 * gens.size}) -> {'PASS' if rate_ok else 'FAIL'}")
        ok = ok and res.passed and rate_ok
    return 0 if ok else 1


def _build_code(args):
    k = parse_number(args.k) if args.k is not None else stbc.K_OPT
    phi = parse_number(args.phi) if getattr(args, "phi", None) is not None else stbc.PHI_OPT
    if args.code == "x1":
        return stbc.x1_code(k)
    if args.code == "x2":
        return stbc.x2_code(phi=phi, stretch_k=k)
    return stbc.x32_code(phi=phi, stretch_k=k)


def cmd_coding_gain(args):
    code = _build_code(args)
    res = stbc.coding_gain_details(
        code, stbc.constellation(args.qam), normalized=args.normalized, samples=args.samples, rng=args.seed
    )
    print(f"{res.value:.12g}")
    log.info("root %.12g over %d difference vectors", res.root, res.evaluations)
    return 0


def cmd_complexity(args):
    code = harness.make_code(args.code)
    c = stbc.worst_case_complexity(code.structure, args.qam)
    print(f"{c}  (= {c.evaluate(args.qam):g} at M={args.qam})")
    return 0


def _sim_config(args):
    return harness.SimConfig(
        code=args.code,
        M=args.qam,
        Nr=args.nr,
        snr_db=parse_snr_grid(args.snr),
        max_trials=args.trials,
        target_errors=args.errors,
        min_trials=args.min_trials,
        seed=args.seed,
        decoder=args.decoder,
        output=args.out,
        block_size=args.block_size,
    )


def cmd_simulate(args):
    cfg = _sim_config(args)
    result = harness.run_campaign(cfg)
    if not cfg.output:
        w = csv.writer(sys.stdout)
        w.writerow(harness.CSV_HEADER)
        w.writerows(result.rows())
    if args.dump_r:
        harness.dump_r(cfg, args.dump_r)
    return 0


def cmd_decode_trace(args):
    cfg = _sim_config(args)
    trace, res = harness.decode_trace(cfg, args.trace_snr, args.trial)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["level", "distance", "action"])
        for level, dist, action in trace:
            w.writerow([level, repr(float(dist)), action])
    finally:
        if args.out:
            fh.close()
    log.info("decoded %s, metric %.6g, %d visited nodes", res.s_hat.tolist(), res.metric, res.visited_nodes)
    return 0


def _add_sim_args(p, decoder_default="fast"):
    p.add_argument("--code", choices=sorted(harness.CODES), default="x1")
    p.add_argument("--qam", type=int, default=4)
    p.add_argument("--nr", type=int, default=2)
    p.add_argument("--snr", default="0:2:20")
    p.add_argument("--trials", type=parse_count, default=1_000_000)
    p.add_argument("--errors", type=parse_count, default=200)
    p.add_argument("--min-trials", type=parse_count, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decoder", choices=harness.DECODERS, default=decoder_default)
    p.add_argument("--block-size", type=int, default=1000)
    p.add_argument("--out")


def build_parser():
    parser = argparse.ArgumentParser(prog="stbc-lab", description=__doc__)
    parser.add_argument("--config", help="file of key = value lines overriding flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-weights", help="emit generator / weight matrices as JSON")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--a", type=int)
    src.add_argument("--code", choices=sorted(harness.CODES))
    p.add_argument("--emit", help="output path (default: stdout)")
    p.set_defaults(func=cmd_gen_weights, a=2)

    p = sub.add_parser("verify", help="check generator algebra and the group partition")
    p.add_argument("--a", type=int, default=2)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coding-gain", help="brute-force minimum determinant")
    p.add_argument("--code", choices=sorted(harness.CODES), default="x1")
    p.add_argument("--k", help="stretch factor, e.g. 'sqrt(3/5)'")
    p.add_argument("--phi", help="layer phase for x2/x32, e.g. 'atan(1/2)'")
    p.add_argument("--qam", type=int, default=4)
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--samples", type=parse_count)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_coding_gain)

    p = sub.add_parser("complexity", help="worst-case decoding complexity")
    p.add_argument("--code", choices=sorted(harness.CODES), default="x1")
    p.add_argument("--qam", type=int, default=4)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("simulate", help="BER / average complexity campaign")
    _add_sim_args(p)
    p.add_argument("--dump-r", help="write R factors of the first trials to CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decode-trace", help="per-node trace of one decoded trial")
    _add_sim_args(p)
    p.add_argument("--trace-snr", type=float, default=10.0)
    p.add_argument("--trial", type=int, default=0)
    p.set_defaults(func=cmd_decode_trace)
    return parser


def _apply_config(parser, args, argv):
    values = read_config(args.config)
    for key, raw in values.items():
        if not hasattr(args, key):
            parser.error(f"unknown config key {key!r}")
        current = getattr(args, key)
        if isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            value = parse_count(raw)
        else:
            value = raw
        setattr(args, key, value)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.config:
            _apply_config(parser, args, argv)
        return args.func(args)
    except (ValueError, clifford.UnsupportedSizeError, stbc.IntractableError, OSError) as exc:
        print(f"stbc-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
