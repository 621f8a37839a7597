"""Command-line front end.

Subcommands
-----------
orthogonalize   dump the orthogonalized record structure per noise strength
sweep           fidelity curves and polynomial fits per recovery
syndrome-table  measurement table for the single-damping protocol
multicycle      repeated-QEC lifetime curves and exponential fit
check           run the certificate suite, nonzero exit on failure

Exit codes: 0 ok, 2 certificate or tolerance failure, 64 usage error.
All outputs are deterministic: identical configurations produce
byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments, metrics, ortho, recovery
from .channels import KrausChannel, PauliString, damping_channel, depolarizing
from .codes import (
    QuantumCode,
    leung_code,
    biconvex_code,
    load_code,
    six_qubit_code_group,
    stabilizer_codespace,
)
from .errors import SynqecError, ToleranceViolation
from .recovery import damping_weight_one_labels

USAGE_ERROR = 64
CERT_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def parse_grid(spec: str) -> list:
    """Parse "a:b:step" (inclusive of b up to rounding) or a single value."""
    parts = spec.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"grid must be 'a:b:step' or a single value, got {spec!r}")
    a, b, step = (float(x) for x in parts)
    if step <= 0 or b < a:
        raise ValueError(f"bad grid {spec!r}")
    n = int(round((b - a) / step))
    grid = [a + i * step for i in range(n + 1)]
    return [g for g in grid if g <= b + 1e-12]


def _make_code(name: str, param: float):
    if name == "leung":
        return leung_code()
    if name == "biconvex":
        return biconvex_code(param)
    if name == "six_qubit":
        return stabilizer_codespace(six_qubit_code_group())
    if name.startswith("file:"):
        return load_code(name[5:])
    raise ValueError(f"unknown code {name!r}")


def _make_noise(kind: str, param: float, n: int) -> KrausChannel:
    if kind == "ad":
        return damping_channel(param, n)
    if kind == "depolarizing":
        return depolarizing(param, n)
    raise ValueError(f"unknown noise {kind!r}")


def _resolve_order(args, code_name: str, noise_kind: str, noise: KrausChannel, code):
    """Processing order and support overrides for the orthogonalization."""
    if args.order_file:
        labels = [
            line.strip()
            for line in Path(args.order_file).read_text().splitlines()
            if line.strip()
        ]
        return labels, None
    if code_name == "leung" and noise_kind == "ad":
        return ortho.leung_damping_order(), None
    if code_name == "biconvex" and noise_kind == "ad":
        flow_a, flow_b = ortho.biconvex_damping_orders()
        if args.biconvex_flow == 1:
            return flow_a, None
        return flow_b, {"D_0101": ortho.logical_zero_override(code)}
    return ortho.weight_order(noise), None


def _build_recovery(kind: str, code, noise, orth):
    if kind == "petz":
        return recovery.petz(code, noise)
    if kind == "syndrome_petz":
        return recovery.syndrome_petz(code, orth)
    if kind == "polar":
        return recovery.polar_recovery(orth)
    if kind == "leung":
        return recovery.leung_recovery(code, noise)
    if kind == "lookup":
        group = six_qubit_code_group()
        errors = [
            PauliString(lab)
            for lab in _weight_limited_words(group.n, 2)
        ]
        return recovery.stabilizer_lookup_recovery(code, group, errors)
    raise ValueError(f"unknown recovery {kind!r}")


def _weight_limited_words(n: int, cap: int) -> list:
    import itertools

    words = []
    for letters in itertools.product("IXYZ", repeat=n):
        word = "".join(letters)
        if sum(c != "I" for c in word) <= cap:
            words.append(word)
    return words


def cmd_orthogonalize(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for param in args.grid:
        code = _make_code(args.code, param)
        noise = _make_noise(args.noise, param, code.n)
        order, overrides = _resolve_order(args, args.code, args.noise, noise, code)
        try:
            result = ortho.orthogonalize(
                noise, code, order=order, support_overrides=overrides, tol=args.tol
            )
        except ToleranceViolation as exc:
            print(f"certificate failure at {param}: {exc}", file=sys.stderr)
            return CERT_ERROR
        payload = {
            "code": args.code,
            "noise": args.noise,
            "param": param,
            "records": len(result.records),
            "labels": result.labels(),
            "support_ranks": [r.rank for r in result.records],
            "dropped": result.dropped,
            "max_orthogonality_residual": result.residuals["theorem1_max"],
        }
        path = out / f"orthogonalize_{args.code}_{args.noise}_{param:.6g}.json"
        path.write_text(json.dumps(payload, indent=1, sort_keys=True))
        print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rec_kind in args.recovery:
        f_ent, f_min = [], []
        skip_min = args.skip_fmin or (args.code == "six_qubit" and rec_kind == "petz"
                                      and args.noise == "depolarizing")
        try:
            for param in args.grid:
                code = _make_code(args.code, param)
                noise = _make_noise(args.noise, param, code.n)
                order, overrides = _resolve_order(args, args.code, args.noise, noise, code)
                orth = None
                if rec_kind in ("syndrome_petz", "polar"):
                    orth = ortho.orthogonalize(
                        noise, code, order=order, support_overrides=overrides
                    )
                if rec_kind == "petz" and args.code == "six_qubit" and args.noise == "depolarizing":
                    f_ent.append(metrics.petz_entanglement_fidelity(code, noise))
                else:
                    rec = _build_recovery(rec_kind, code, noise, orth)
                    f_ent.append(metrics.entanglement_fidelity(rec, noise, code))
                    if not skip_min:
                        value, _ = metrics.worst_case_fidelity(rec, noise, code)
                        f_min.append(value)
        except SynqecError as exc:
            print(f"builder failure for {rec_kind}: {exc}", file=sys.stderr)
            return CERT_ERROR
        report = metrics.FidelityReport(
            gamma_grid=list(args.grid),
            f_ent=f_ent,
            f_min=f_min if f_min else None,
            meta={"code": args.code, "noise": args.noise, "recovery": rec_kind},
        )
        if len(args.grid) >= 6:
            report.finalize_fits()
        stem = out / f"sweep_{args.code}_{args.noise}_{rec_kind}"
        stem.with_suffix(".csv").write_text(report.to_csv())
        stem.with_suffix(".json").write_text(report.to_json())
        print(f"wrote {stem}.csv and {stem}.json")
    return 0


def cmd_syndrome_table(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    param = args.grid[0]
    code = _make_code(args.code, param)
    noise = _make_noise(args.noise, param, code.n)
    labels = damping_weight_one_labels(noise)
    sub = KrausChannel(
        [noise.op_by_label(lab) for lab in labels],
        labels=labels,
        tp_class="TraceNonIncreasing",
    )
    # row order matching the published table: no damping, then qubits 1..4
    row_order = [labels[0]] + sorted(labels[1:], reverse=True)
    orth = ortho.orthogonalize(sub, code, order=row_order)
    table = recovery.syndrome_table(
        code,
        orth,
        primary=[PauliString("ZZII"), PauliString("IIZZ")],
        secondary=[PauliString("ZIII"), PauliString("IIIZ")],
    )
    path = out / f"syndrome_table_{args.code}.csv"
    path.write_text(table.to_csv())
    print(f"wrote {path}")
    return 0


def cmd_multicycle(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = parse_grid(args.delay_grid)
    cfg = experiments.MulticycleConfig(
        t1_us=args.t1_us,
        delay_grid_us=grid,
        cycles=args.cycles,
        recovery_time_us=args.dt_us,
        recovery_kind=args.recovery[0] if args.recovery else "syndrome_petz",
    )
    curve = experiments.run_multicycle(cfg)
    csv_lines = ["t_us,fidelity"] + [f"{t:.12g},{f:.12g}" for t, f in curve]
    (out / f"multicycle_N{args.cycles}.csv").write_text("\n".join(csv_lines) + "\n")
    fit = experiments.exp_fit(*zip(*curve), t1_hint=args.t1_us)
    (out / f"multicycle_N{args.cycles}_fit.json").write_text(
        json.dumps(fit.to_json_dict(), indent=1, sort_keys=True)
    )
    print(f"wrote multicycle_N{args.cycles}.csv and fit (T = {fit.T:.1f} us)")
    return 0


def _certificates() -> list:
    """(name, callable) pairs; each callable returns (ok, detail)."""
    import itertools

    from .linalg import min_eigenvalue, psd_power
    from .metrics import codespace_fidelity
    from .ortho import noise_on_code, orthogonalized_on_code
    from .recovery import (
        qec_matrix,
        qec_matrix_from_orth,
        optimality_check,
        restrict_recovery,
    )

    def leung_setup(g):
        code = leung_code()
        noise = damping_channel(g, 4)
        orth = ortho.orthogonalize(noise, code, order=ortho.leung_damping_order())
        return code, noise, orth

    def cert_theorem1():
        worst = 0.0
        for g in (0.01, 0.05, 0.1):
            _, _, orth = leung_setup(g)
            worst = max(worst, orth.residuals["theorem1_max"])
            code = biconvex_code(g)
            noise = damping_channel(g, 4)
            orth_b = ortho.orthogonalize(noise, code, order=ortho.biconvex_damping_orders()[0])
            worst = max(worst, orth_b.residuals["theorem1_max"])
        return worst < 1e-10, f"max residual {worst:.2e}"

    def cert_leung_structure():
        _, _, orth = leung_setup(0.1)
        ok = len(orth.records) == 10 and "D_0011" in orth.dropped
        return ok, f"{len(orth.records)} records, dropped {orth.dropped[:1]}"

    def cert_optimality():
        code, noise, orth = leung_setup(0.1)
        good = optimality_check(qec_matrix_from_orth(orth))
        bad = optimality_check(qec_matrix(code, list(noise.iter_dense())))
        return good < 1e-8 and bad > 1e-4, f"orthogonalized {good:.2e}, raw {bad:.2e}"

    def cert_appendix_c():
        code, noise, orth = leung_setup(0.1)
        gap = orth.residuals["m_minus_mtilde_min_eig"]
        inv_gap = min_eigenvalue(
            psd_power(orthogonalized_on_code(orth), -0.5)
            - psd_power(noise_on_code(noise, code.projector), -0.5)
        )
        return gap > -1e-10 and inv_gap > -1e-9, f"M-Mtilde {gap:.2e}, inverse roots {inv_gap:.2e}"

    def cert_petz_tp():
        code, noise, _ = leung_setup(0.1)
        rec = recovery.petz(code, noise)
        return True, f"TP defect {rec.diagnostics['tp_defect_on_support']:.2e}"

    def cert_syndrome_petz_structure():
        code, noise, orth = leung_setup(0.1)
        rec = recovery.syndrome_petz(code, orth)
        return True, f"projector defect {rec.diagnostics['projector_defect']:.2e}"

    def cert_readout():
        code, noise, orth = leung_setup(0.05)
        from .codes import leung_encoder

        u_en = leung_encoder()
        rec = recovery.syndrome_petz(code, orth)
        restricted = restrict_recovery(rec, [0, 1, 2, 3, 4])
        worst = max(
            abs(
                metrics.logical_readout_fidelity(code, noise, rec, u_en, m)
                - codespace_fidelity(code, noise, rec, m)
            )
            for m in (0, 1)
        )
        exact = abs(
            metrics.logical_readout_fidelity(code, noise, restricted, u_en, 1)
            - (1 - 0.05**2)
        )
        return worst < 1e-10 and exact < 1e-12, f"equality {worst:.2e}, 1-g^2 {exact:.2e}"

    def cert_theorem2():
        code, noise, orth = leung_setup(0.1)
        eta_p, eta_s, holds = metrics.theorem2_certificate(code, noise, orth)
        return holds, f"eta_P {eta_p:.4f}, 2 eta_s {2 * eta_s:.4f}"

    def cert_six_qubit():
        group = six_qubit_code_group()
        code = stabilizer_codespace(group)
        noise = depolarizing(0.05, 6)
        orth = ortho.orthogonalize(noise, code)
        return (
            len(orth.records) == 32,
            f"{len(orth.records)} records, theorem1 {orth.residuals['theorem1_max']:.2e}",
        )

    def cert_multicycle():
        from .channels import gamma_from_delay

        t1 = 155.0
        grid = [0.0, 10.0, 20.0, 30.0]
        cfg = experiments.MulticycleConfig(t1_us=t1, delay_grid_us=grid, cycles=1)
        curve = experiments.run_multicycle(cfg)
        worst = max(abs(f - (1 - gamma_from_delay(t, t1) ** 2)) for t, f in curve)
        return worst < 1e-10, f"pointwise {worst:.2e}"

    return [
        ("theorem1_orthogonality", cert_theorem1),
        ("leung_record_structure", cert_leung_structure),
        ("petz_optimality_condition", cert_optimality),
        ("appendix_psd_lemmas", cert_appendix_c),
        ("petz_trace_preserving", cert_petz_tp),
        ("syndrome_petz_projectors", cert_syndrome_petz_structure),
        ("readout_protocol", cert_readout),
        ("fidelity_loss_bound", cert_theorem2),
        ("six_qubit_records", cert_six_qubit),
        ("multicycle_single_cycle", cert_multicycle),
    ]


def cmd_check(args) -> int:
    failures = 0
    for name, fn in _certificates():
        try:
            ok, detail = fn()
        except SynqecError as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else CERT_ERROR


def build_parser() -> _Parser:
    parser = _Parser(prog="synqec")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_grid=True):
        p.add_argument("--code", default="leung",
                       help="leung | biconvex | six_qubit | file:PATH")
        p.add_argument("--noise", default="ad", choices=["ad", "depolarizing"])
        if needs_grid:
            p.add_argument("--param-grid", default="0.005:0.2:0.005",
                           help="noise strength grid 'a:b:step' or single value")
        p.add_argument("--order-file", default=None,
                       help="file with one operator label per line")
        p.add_argument("--biconvex-flow", type=int, default=2, choices=[1, 2])
        p.add_argument("--out-dir", default="out")
        p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("orthogonalize", help="dump orthogonalized record structure")
    common(p)
    p.set_defaults(func=cmd_orthogonalize)

    p = sub.add_parser("sweep", help="fidelity curves per recovery")
    common(p)
    p.add_argument("--recovery", nargs="+", default=["syndrome_petz"],
                   choices=["petz", "syndrome_petz", "polar", "leung", "lookup"])
    p.add_argument("--skip-fmin", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("syndrome-table", help="single-damping measurement table")
    common(p)
    p.set_defaults(func=cmd_syndrome_table)

    p = sub.add_parser("multicycle", help="repeated-QEC lifetime experiment")
    common(p, needs_grid=False)
    p.add_argument("--recovery", nargs="+", default=["syndrome_petz"],
                   choices=["petz", "syndrome_petz", "polar"])
    p.add_argument("--cycles", type=int, default=1)
    p.add_argument("--t1-us", type=float, default=155.0)
    p.add_argument("--delay-grid", default="0:34:2",
                   help="delay grid in microseconds, 'a:b:step'")
    p.add_argument("--dt-us", type=float, default=0.0)
    p.set_defaults(func=cmd_multicycle)

    p = sub.add_parser("check", help="run the certificate suite")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "param_grid"):
        try:
            args.grid = parse_grid(args.param_grid)
        except ValueError as exc:
            print(f"synqec: error: {exc}", file=sys.stderr)
            return USAGE_ERROR
        if not args.grid:
            print("synqec: error: empty parameter grid", file=sys.stderr)
            return USAGE_ERROR
    try:
        return args.func(args)
    except SynqecError as exc:
        print(f"synqec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return CERT_ERROR


if __name__ == "__main__":
    sys.exit(main())
