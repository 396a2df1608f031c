"""Command-line front end: state file I/O, analysis commands, JSON reports.

Reports go to stdout as a single JSON object with stable field order; a short
human-readable summary goes to stderr. Exit codes: 0 success (the verdict
lives inside the report), 2 usage error, 3 input-validation error, 4 when
--strict is set and a solver verdict came back borderline.

State files carry explicit [re, im] pairs and mandatory dims:
{"dims": [2, 2], "label": "phi_plus", "matrix": [[[0.5, 0.0], ...], ...]}
with matrix[i][j] the (i, j) entry, row-major, factor 0 most significant.
Measurement files hold a list of POVMs in the same convention:
{"dim": 2, "povms": [[[[...]]], ...]}.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings

import numpy as np

from . import bell, entanglement, extendibility, sdp
from .states import DensityMatrix, bdsw_tripartite, bush_rumsfeld, max_entangled, random_density, werner


class InputError(ValueError):
    """Invalid input file or state; maps to exit code 3."""


def _matrix_to_pairs(mat: np.ndarray) -> list:
    return [[[float(entry.real), float(entry.imag)] for entry in row] for row in mat]


def _pairs_to_matrix(rows) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InputError(f"matrix must be nested [re, im] pairs, got shape {arr.shape}")
    return arr[:, :, 0] + 1j * arr[:, :, 1]


def state_payload(rho: DensityMatrix, label: str | None = None) -> dict:
    payload = {"dims": list(rho.dims)}
    if label:
        payload["label"] = label
    payload["matrix"] = _matrix_to_pairs(rho.mat)
    return payload


def save_state(rho: DensityMatrix, path: str, label: str | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(state_payload(rho, label), fh)
        fh.write("\n")


def load_state(path: str) -> DensityMatrix:
    """Parse and validate a state file; violations name the broken invariant."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(payload, dict) or "dims" not in payload or "matrix" not in payload:
        raise InputError(f"{path}: state files need 'dims' and 'matrix' fields")
    mat = _pairs_to_matrix(payload["matrix"])
    if mat.shape[0] != mat.shape[1]:
        raise InputError(f"{path}: matrix is {mat.shape[0]}x{mat.shape[1]}, not square")
    dims = payload["dims"]
    try:
        return DensityMatrix(tuple(int(d) for d in dims), mat)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_measurements(path: str) -> list[bell.Measurement]:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"cannot parse {path}: {exc}") from exc
    povms = payload.get("povms") if isinstance(payload, dict) else payload
    if not isinstance(povms, list) or not povms:
        raise InputError(f"{path}: expected a nonempty list of POVMs under 'povms'")
    out = []
    for idx, elements in enumerate(povms):
        try:
            out.append(bell.Measurement(tuple(_pairs_to_matrix(el) for el in elements)))
        except ValueError as exc:
            raise InputError(f"{path}: POVM {idx}: {exc}") from exc
    return out


def save_measurements(measurements, path: str) -> None:
    payload = {
        "dim": measurements[0].dim,
        "povms": [[_matrix_to_pairs(el) for el in m.elements] for m in measurements],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _sig12(value):
    """Report numbers at 12 significant digits."""
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _sig12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sig12(v) for v in value]
    return value


def _positive_int(minimum: int, name: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be >= {minimum}, got {value}")
        return value

    return parse


def _dims_list(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be comma-separated integers, got {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"dims must be positive, got {text!r}")
    return dims


def _index_list(text: str) -> tuple[int, ...]:
    try:
        idx = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"indices must be comma-separated integers, got {text!r}")
    if not idx or any(i < 0 for i in idx):
        raise argparse.ArgumentTypeError(f"indices must be >= 0, got {text!r}")
    return idx


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monogamy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a named state file")
    gen.add_argument("name", choices=["phi_plus", "werner", "bush_rumsfeld", "bdsw", "random"])
    gen.add_argument("-o", "--output", required=True)
    gen.add_argument("--d", type=_positive_int(2, "d"), default=2, help="local dimension for phi_plus")
    gen.add_argument("--p", type=float, default=0.5, help="werner mixing weight")
    gen.add_argument("--epsilon", type=float, default=0.5, help="bush_rumsfeld weight")
    gen.add_argument("--dims", type=_dims_list, default=(2, 2), help="random-state dims, e.g. 2,2")
    gen.add_argument("--seed", type=int, default=0)

    for name, extra in (("ppt", True), ("negativity", True)):
        cmd = sub.add_parser(name, help=f"{name} of a state file")
        cmd.add_argument("state")
        if extra:
            cmd.add_argument("--index", type=_positive_int(0, "index"), default=1, help="transposed subsystem")

    ext = sub.add_parser("extend", help="symmetric-extension feasibility")
    ext.add_argument("state")
    ext.add_argument("--k", type=_positive_int(2, "k"), required=True)
    ext.add_argument("--variant", choices=["perm", "marginals"], default="perm")
    ext.add_argument("--trace-out", type=_index_list, default=None, help="subsystems to trace out first, e.g. 2")
    ext.add_argument("--witness", help="write the extension witness state file here")
    ext.add_argument("--certificate", help="write the infeasibility certificate here")
    ext.add_argument("--strict", action="store_true", help="exit 4 on a borderline verdict")

    hier = sub.add_parser("hierarchy", help="extendibility for k = 2..kmax")
    hier.add_argument("state")
    hier.add_argument("--kmax", type=_positive_int(2, "kmax"), required=True)
    hier.add_argument("--variant", choices=["perm", "marginals"], default="perm")
    hier.add_argument("--trace-out", type=_index_list, default=None)
    hier.add_argument("--strict", action="store_true")

    chsh = sub.add_parser("chsh", help="maximal CHSH value of a two-qubit state")
    chsh.add_argument("state")
    chsh.add_argument("--trace-out", type=_index_list, default=None)

    lhv = sub.add_parser("lhv", help="build a hidden-variable model from a k-extension")
    lhv.add_argument("state")
    lhv.add_argument("--k", type=_positive_int(2, "k"), required=True)
    lhv.add_argument("--alice", required=True, help="Alice measurement file")
    lhv.add_argument("--bob", required=True, help="Bob measurement file (k POVMs)")
    lhv.add_argument("--strict", action="store_true")
    return parser


_GENERATORS = {
    "phi_plus": lambda args: max_entangled(args.d),
    "werner": lambda args: werner(args.p),
    "bush_rumsfeld": lambda args: bush_rumsfeld(args.epsilon),
    "bdsw": lambda args: bdsw_tripartite(),
    "random": lambda args: random_density(args.dims, args.seed),
}


def _cmd_gen(args):
    try:
        rho = _GENERATORS[args.name](args)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    save_state(rho, args.output, label=args.name)
    report = {
        "name": args.name,
        "output": args.output,
        "output_sha256": _digest(args.output),
        "dims": list(rho.dims),
    }
    return report, 0, f"wrote {args.name} (dims {list(rho.dims)}) to {args.output}"


def _cmd_ppt(args):
    rho = load_state(args.state)
    if args.index >= len(rho.dims):
        raise InputError(f"subsystem index {args.index} out of range for dims {rho.dims}")
    value = entanglement.ppt_min_eigenvalue(rho, args.index)
    verdict = "entangled" if value < -1e-9 else "ppt"
    report = {
        "input": {"path": args.state, "sha256": _digest(args.state)},
        "min_eigenvalue": value,
        "verdict": verdict,
    }
    return report, 0, f"min PT eigenvalue {value:.6g}: {verdict}"


def _cmd_negativity(args):
    rho = load_state(args.state)
    if args.index >= len(rho.dims):
        raise InputError(f"subsystem index {args.index} out of range for dims {rho.dims}")
    value = entanglement.negativity(rho, args.index)
    report = {
        "input": {"path": args.state, "sha256": _digest(args.state)},
        "negativity": value,
        "verdict": "entangled" if value > 1e-9 else "undetected",
    }
    return report, 0, f"negativity {value:.6g}"


def _check_bipartite(rho: DensityMatrix):
    if len(rho.dims) != 2:
        raise InputError(f"need a bipartite state, got dims {rho.dims}")


def _maybe_trace_out(rho: DensityMatrix, args) -> DensityMatrix:
    if getattr(args, "trace_out", None) is None:
        return rho
    try:
        return rho.partial_trace(args.trace_out)
    except (IndexError, ValueError) as exc:
        raise InputError(f"cannot trace out {list(args.trace_out)}: {exc}") from exc


def _cmd_extend(args):
    rho = _maybe_trace_out(load_state(args.state), args)
    _check_bipartite(rho)
    try:
        result = extendibility.check_extendible(rho, args.k, args.variant)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = {
        "input": {"path": args.state, "sha256": _digest(args.state)},
        "k": args.k,
        "variant": args.variant,
        "status": result.status,
        "margin": result.margin,
        "witness_path": None,
        "certificate_path": None,
    }
    if result.extension is not None and args.witness:
        save_state(result.extension, args.witness, label="extension-witness")
        report["witness_path"] = args.witness
    if result.certificate is not None and args.certificate:
        with open(args.certificate, "w") as fh:
            json.dump({"k": args.k, "variant": args.variant, "certificate": list(result.certificate)}, fh)
            fh.write("\n")
        report["certificate_path"] = args.certificate
    code = 4 if (args.strict and result.status == sdp.BORDERLINE) else 0
    return report, code, f"k={args.k} ({args.variant}): {result.status} (margin {result.margin:.6g})"


def _cmd_hierarchy(args):
    rho = _maybe_trace_out(load_state(args.state), args)
    _check_bipartite(rho)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        results = extendibility.hierarchy(rho, args.kmax, args.variant)
    notices = [str(w.message) for w in caught]
    report = {
        "input": {"path": args.state, "sha256": _digest(args.state)},
        "kmax": args.kmax,
        "variant": args.variant,
        "levels": [{"k": r.k, "status": r.status, "margin": r.margin} for r in results],
        "truncated": len(results) < args.kmax - 1,
        "notices": notices,
    }
    summary = ", ".join(f"k={r.k}:{r.status}" for r in results) or "no levels within cap"
    code = 4 if (args.strict and any(r.status == sdp.BORDERLINE for r in results)) else 0
    return report, code, summary


def _cmd_chsh(args):
    rho = _maybe_trace_out(load_state(args.state), args)
    if tuple(rho.dims) != (2, 2):
        raise InputError(f"chsh needs a two-qubit state, got dims {rho.dims}")
    value = bell.chsh_max_2qubit(rho)
    report = {
        "input": {"path": args.state, "sha256": _digest(args.state)},
        "chsh_max": value,
        "violates_local_bound": value > 2.0 + 1e-9,
    }
    return report, 0, f"maximal CHSH value {value:.6g}"


def _cmd_lhv(args):
    rho = load_state(args.state)
    _check_bipartite(rho)
    alice = load_measurements(args.alice)
    bob = load_measurements(args.bob)
    if len(bob) != args.k:
        raise InputError(f"need exactly k={args.k} Bob measurements, got {len(bob)}")
    try:
        scenario = bell.Scenario(alice, bob)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if scenario.dims != tuple(rho.dims):
        raise InputError(f"measurement dims {scenario.dims} do not match state dims {rho.dims}")
    try:
        result = extendibility.check_extendible(rho, args.k, extendibility.VARIANT_PERMUTATION)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = {
        "input": {"path": args.state, "sha256": _digest(args.state)},
        "k": args.k,
        "extendibility": result.status,
        "margin": result.margin,
    }
    summary = f"extendibility at k={args.k}: {result.status}"
    if result.extension is not None:
        model = bell.lhv_from_extension(result.extension, scenario)
        table_model = bell.lhv_table(model, scenario)
        table_quantum = bell.joint_table(rho, scenario)
        gap = float(np.abs(table_model.probs - table_quantum.probs).max())
        report["model"] = {
            "hidden_variables": len(model.lambdas),
            "table_max_deviation": gap,
        }
        summary += f"; LHV model with {len(model.lambdas)} variables reproduces the table within {gap:.3g}"
    code = 4 if (args.strict and result.status == sdp.BORDERLINE) else 0
    return report, code, summary


_COMMANDS = {
    "gen": _cmd_gen,
    "ppt": _cmd_ppt,
    "negativity": _cmd_negativity,
    "extend": _cmd_extend,
    "hierarchy": _cmd_hierarchy,
    "chsh": _cmd_chsh,
    "lhv": _cmd_lhv,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    start = time.perf_counter()
    try:
        report, code, summary = _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    echo = list(argv) if argv is not None else sys.argv[1:]
    report = {"command": echo, **{k: v for k, v in report.items() if k != "command"}}
    report["wall_clock_s"] = round(time.perf_counter() - start, 6)
    print(json.dumps(_sig12(report)))
    print(summary, file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())
