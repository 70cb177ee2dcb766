"""Command-line front end.

Every subcommand writes either CSV (header row, floats with 12 significant
digits, leaves in lexicographic record order) or a plain-text report with
fixed section headers. Output goes to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings

import numpy as np

from . import conditions, defects, network, schemes
from .gates import NodeParams, conditional_unitary, outcome_tree
from .kernel import InvalidInputError
from .states import RESOURCE_NAMES, TwoQubitResource, schmidt

FLOAT_FMT = ".12g"
PHASE_SETS = ("deterministic", "power2", "d3-constructed")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return format(0.0 if v == 0 else v, FLOAT_FMT)
    return str(x)


def record_label(record) -> str:
    """``((0,0),(1,1))`` -> ``"00.11"``."""
    return ".".join(f"{a}{b}" for a, b in record) if record else "-"


def write_csv(out, header, rows) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])


# --- argument helpers --------------------------------------------------------


def _positive_int(name: str, v: int, lo: int = 1) -> int:
    if v < lo:
        raise InvalidInputError(f"--{name} must be >= {lo}, got {v}")
    return v


def _finite(name: str, v: float) -> float:
    if not math.isfinite(v):
        raise InvalidInputError(f"--{name} must be finite")
    return v


def _phases(args) -> list[float] | None:
    if args.phi:
        return [_finite("phi", p) for p in args.phi]
    return None


def _scheme(args) -> schemes.Scheme:
    """Scheme from ``--set`` or explicit ``--phi`` values."""
    d = _positive_int("d", args.d, 2)
    phases = _phases(args)
    if args.set == "d3-constructed":
        if d != 3:
            raise InvalidInputError("the constructed scheme exists only for d = 3")
        if args.resource not in ("psi+", "psi-"):
            raise InvalidInputError("the constructed scheme uses a psi+ or psi- resource")
        return schemes.constructed_d3_scheme(args.xi, args.resource)
    res = TwoQubitResource.from_name(args.resource)
    if phases is None:
        if args.set == "deterministic":
            phases = schemes.deterministic_phase_set(d)
        elif args.set in (None, "power2"):
            phases = schemes.power_of_two_phase_set(d)
        else:
            raise InvalidInputError(f"unknown phase set {args.set!r}")
    return schemes.make_scheme(d, res, phases, args.postselect)


def _add_common(p, resource=True, xi=True, phases=True, postselect=True):
    p.add_argument("--d", type=int, default=3, help="qudit dimension")
    if resource:
        p.add_argument("--resource", choices=RESOURCE_NAMES, default="psi+")
    if xi:
        p.add_argument("--xi", type=float, default=20.0,
                       help="electron splitting over the net Ising coupling")
    if phases:
        p.add_argument("--set", choices=PHASE_SETS, default=None)
        p.add_argument("--phi", type=float, action="append", help="phase, repeatable")
    if postselect:
        p.add_argument("--postselect", choices=("none", "equal", "unequal"), default="none")
    p.add_argument("--out", default=None, help="output file (default stdout)")


# --- subcommands -------------------------------------------------------------


def cmd_sweep(args, out) -> None:
    d = _positive_int("d", args.d, 2)
    rnd = _positive_int("round", args.round)
    points = _positive_int("points", args.points, 2)
    fixed = _phases(args) or []
    if len(fixed) < rnd - 1:
        fixed += schemes.power_of_two_phase_set(d)[len(fixed):rnd - 1]
    if len(fixed) != rnd - 1:
        raise InvalidInputError(f"round {rnd} needs {rnd - 1} fixed phases, got {len(fixed)}")
    res = TwoQubitResource.from_name(args.resource)
    rows = schemes.sweep_expected_E(d, res, args.xi, fixed, points, args.postselect)
    write_csv(out, ["phi", "accumulated_phi", "expected_E", "success_probability"],
              [(r["phi"], r["accumulated"], r["expected_E"], r["success"]) for r in rows])


def cmd_scheme(args, out) -> None:
    sc = _scheme(args)
    if sc.status != "ok":
        print(f"warning: {sc.message}", file=sys.stderr)
    leaves = sc.leaves(args.xi)
    write_csv(out, ["record", "probability", "E"],
              [(record_label(lf.record), lf.probability, lf.ebits) for lf in leaves])


def cmd_table1(args, out) -> None:
    families = schemes.FAMILIES if args.resource == "both" else (args.resource,)
    rows = []
    for r in schemes.table1(range(2, args.d_max + 1), args.xi):
        for fam in families:
            st = r[fam]
            rows.append((r["d"], fam, r[f"xi_{'bell' if fam == 'bell' else 'cluster'}"],
                         r["nu_max"], st.expected_ebits, r["E_d"], st.ratio,
                         st.distinct_E_count, st.std_dev, st.merged_leaf_count))
    write_csv(out, ["d", "family", "xi", "nu_max", "E", "E_d", "ratio", "n_E", "sigma",
                    "n_merged"], rows)


def cmd_conditions(args, out) -> None:
    d = _positive_int("d", args.d, 2)
    sc = _scheme(args)
    its = list(sc.iterations)
    print("== allowed indices ==", file=out)
    print(f"d = {d}: first round k in {sorted(conditions.allowed_indices(d))}", file=out)
    print("== complete transfer ==", file=out)
    node = NodeParams(d, args.xi)
    states = [sc.initial]
    for i, spec in enumerate(its):
        prev = states[-1]
        ua = [conditional_unitary(node, j, spec.phi_a) for j in (0, 1)]
        ub = [conditional_unitary(node, j, spec.phi_b) for j in (0, 1)]
        rep = conditions.check_complete_transfer(prev, *ua, *ub)
        print(f"round {i + 1}: phi = {fmt(spec.phi_a)} complete = {rep.ok} "
              f"residual = {fmt(max(rep.residual_a, rep.residual_b))}"
              + (f" ({rep.reason})" if rep.reason else ""), file=out)
        nxt = outcome_tree(prev, [spec], node)
        if not nxt:
            break
        states.append(nxt[0].state)
    print("== final-round maximal-entanglement conditions ==", file=out)
    prev = states[len(its) - 1]
    spec = its[-1]
    ga = [conditional_unitary(node, j, spec.phi_a) for j in (0, 1)]
    gb = [conditional_unitary(node, j, spec.phi_b) for j in (0, 1)]
    ua, s_diag = conditions.calU_from_gates(prev, *ga, "a")
    ub, _ = conditions.calU_from_gates(prev, *gb, "b")
    if ua.shape[0] != d:
        print("previous state and gates do not span the full space; skipped", file=out)
        return
    rep = conditions.check_maxent_conditions(s_diag, ua, ub, spec.resource)
    print(f"regime = {rep.regime}", file=out)
    print(f"pairing ok = {rep.pairing.pairing_ok}", file=out)
    print(f"antidiagonal blocks ok = {all(rep.blocks.antidiagonal_ok)}", file=out)
    print(f"c = {fmt(rep.c)} P_eq = {fmt(rep.p_eq)}", file=out)
    for name in ("gen3a_residual", "gen3a_swapped_residual", "gen3b_residual",
                 "gen3b_swapped_residual"):
        print(f"{name} = {fmt(getattr(rep, name))}", file=out)
    print(f"all ok = {rep.all_ok}", file=out)
    print("== Schmidt spectrum before final round ==", file=out)
    print(" ".join(fmt(x) for x in schmidt(prev).chi), file=out)


def cmd_photonic(args, out) -> None:
    rows = []
    for sa in "+-":
        for sb in "+-":
            r = network.run_photonic(sa, sb)
            res = network.resource_from_photonic(r.resource, args.drive)
            fid = {n: network.fidelity(res, TwoQubitResource.from_name(n))
                   for n in RESOURCE_NAMES}
            rows.append((sa, sb, r.success_probability, r.bright_probability,
                         r.lost_probability, *(fid[n] for n in RESOURCE_NAMES)))
    write_csv(out, ["init_a", "init_b", "success", "bright", "lost",
                    *(f"F_{n}" for n in RESOURCE_NAMES)], rows)


def cmd_ghz(args, out) -> None:
    d = _positive_int("d", args.d, 2)
    m = _positive_int("nodes", args.nodes, 2)
    steps = network.ghz_chain_steps(m, d, TwoQubitResource.from_name(args.resource),
                                    args.postselect)
    nodes = NodeParams(d, args.xi)
    leaves = network.chain_tree(network.MultiQuditState.plus(m, d), steps, nodes)
    # chain records alternate (pair, outcome)
    rows = [(";".join(f"{p[0]}-{p[1]}:{o[0]}{o[1]}"
                      for p, o in zip(lf.record[0::2], lf.record[1::2])),
             lf.probability, network.ghz_fidelity(lf.state)) for lf in leaves]
    write_csv(out, ["record", "probability", "ghz_fidelity"], rows)


def cmd_perturbation(args, out) -> None:
    d = _positive_int("d", args.d, 2)
    sc = _scheme(args)
    zetas = args.zeta or [5e-4, 1.2e-3]
    rows = []
    for z in zetas:
        _finite("zeta", z)
        s = defects.entanglement_reduction(d, sc, z, args.xi)
        rows.append((z, s, s / z**2 if z else 0.0))
    write_csv(out, ["zeta", "shortfall", "shortfall_over_zeta2"], rows)


def cmd_defects(args, out) -> None:
    if args.model == "vsic":
        pts = _positive_int("points", args.points, 2)
        rows = []
        for i in range(pts):
            th = (math.pi / 2) * i / (pts - 1)
            t = defects.vsic_hyperfine(defects.VSiCParams(th))
            rows.append((th, *(t.elements[k] for k in ("zz", "zx", "xy", "xz", "xx"))))
        write_csv(out, ["theta1", "a_zz", "a_zx", "a_xy", "a_xz", "a_xx"], rows)
        return
    rows = []
    for s in args.strain or [0.0, 100.0, 50.0, 25.0]:
        p = defects.GeVParams(args.lam, complex(s, -0.5 * s), args.gammaB, args.A_par,
                              args.A_perp)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            r = defects.gev_effective(p)
        rows.append((s, r.residual, r.residual / np.linalg.norm(r.h_full),
                     r.off_diagonal_norm, r.regime_ok))
    write_csv(out, ["strain_alpha", "residual", "relative_residual", "offdiag_norm",
                    "regime_ok"], rows)


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qudit-transfer",
                                 description="Entanglement transfer into nuclear qudits.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="<E> versus the phase of one round")
    _add_common(p, phases=False)
    p.add_argument("--phi", type=float, action="append", help="fixed earlier phase")
    p.add_argument("--round", type=int, default=1)
    p.add_argument("--points", type=int, default=361)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scheme", help="leaf table of a phase set")
    _add_common(p)
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("table1", help="power-of-two scheme statistics for d = 2..d-max")
    p.add_argument("--resource", choices=("bell", "cluster", "both"), default="both")
    p.add_argument("--xi", type=float, default=20.0)
    p.add_argument("--d-max", type=int, default=16)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("conditions", help="transfer-condition report")
    _add_common(p)
    p.set_defaults(func=cmd_conditions)

    p = sub.add_parser("photonic", help="photonic resource generation")
    p.add_argument("--drive", choices=("none", "pi", "pi_half"), default="none")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_photonic)

    p = sub.add_parser("ghz", help="multi-node chain towards a GHZ state")
    _add_common(p, phases=False)
    p.set_defaults(postselect="equal")
    p.add_argument("--nodes", type=int, default=3)
    p.set_defaults(func=cmd_ghz)

    p = sub.add_parser("perturbation", help="shortfall from the flip-flop correction")
    _add_common(p)
    p.set_defaults(xi=0.0)
    p.add_argument("--zeta", type=float, action="append")
    p.set_defaults(func=cmd_perturbation)

    p = sub.add_parser("defects", help="defect-centre hyperfine models")
    p.add_argument("--model", choices=("vsic", "gev"), default="vsic")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--strain", type=float, action="append", help="GeV strain alpha")
    p.add_argument("--lam", type=float, default=181e3)
    p.add_argument("--gammaB", type=float, default=5e3)
    p.add_argument("--A-par", dest="A_par", type=float, default=50.0)
    p.add_argument("--A-perp", dest="A_perp", type=float, default=60.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_defects)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
