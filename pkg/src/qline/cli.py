"""Command-line front end.

    qline spectrum --q 2 --M 3
    qline eigfn --kind fock --m 2 --format csv --out h2.csv
    qline verify --suite all --format json
    qline moments --s 0 --J 10

Exit codes: 0 pass, 1 verification failure, 2 usage or parameter error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .eigenbasis import EigenproblemParams, eigenfunction
from .errors import ParameterError, QLineError
from .lattice import Lattice
from .oscillator import FOCK, NONFOCK, OscillatorParams, SpectrumLabel, energy
from .qcore import QParams, Tolerance
from .verify import (
    VerificationReport,
    algebra_check,
    completeness_sweep,
    connection_check,
    eigenvalue_check,
    fock_incompleteness,
    moment_indeterminacy,
    orthogonality_check,
    phi11_recurrence_check,
    shell_function,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("algebra", "eigenvalues", "orthogonality", "connection", "moments", "completeness", "all")
COMPLETENESS_CUTOFFS = ((0, 0), (2, 1), (4, 2), (6, 3), (8, 4))


@dataclass(frozen=True)
class CliConfig:
    q: float = 2.0
    gamma: float = 0.0
    xi0: Optional[float] = None
    window: Optional[int] = None
    tol: float = 1e-10
    format: str = "text"
    out: Optional[str] = None

    def build(self):
        """Validated ``(lattice, oscillator, eigenproblem, tolerance)``."""
        qp = QParams(self.q)
        lat = Lattice.symmetric(qp, xi0=self.xi0, K=self.window)
        op = OscillatorParams(qp, self.gamma)
        return lat, op, EigenproblemParams.from_lattice(lat, op), Tolerance(self.tol)

    def echo(self, lat: Lattice) -> dict:
        return {"q": lat.qp.q, "gamma": self.gamma, "xi0": lat.xi0, "window": lat.n_max, "tol": self.tol}


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _emit(text: str, config: CliConfig):
    if config.out is None:
        sys.stdout.write(text)
    else:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- commands ------------------------------------------------------------------------


def cmd_spectrum(config: CliConfig, M: int = 3) -> int:
    """Fock levels ``m = 0..M``, non-Fock levels ``m = -M..M`` and the
    accumulation point."""
    if M < 0:
        raise ParameterError(f"M must be nonnegative, got {M}")
    qp = QParams(config.q)
    labels = [SpectrumLabel.fock(m) for m in range(M + 1)]
    labels += [SpectrumLabel.nonfock(m, config.gamma) for m in range(-M, M + 1)]
    rows = [(lab.kind, lab.m, lab.epsilon(qp), energy(lab, qp)) for lab in labels]
    rows.append(("accumulation", "", 0.0, qp.accumulation_point))
    header = ("family", "m", "epsilon", "E")
    if config.format == "csv":
        text = _csv([(f, m, _fmt(e), _fmt(E)) for f, m, e, E in rows], header)
    elif config.format == "json":
        params = {"q": qp.q, "gamma": config.gamma}
        data = [dict(zip(header, (f, None if m == "" else m, e, E))) for f, m, e, E in rows]
        text = json.dumps({"params": params, "rows": data}, indent=2) + "\n"
    else:
        lines = [f"{'family':<13}{'m':>4}  {'epsilon':>22}  {'E':>22}"]
        lines += [f"{f:<13}{m!s:>4}  {e:>22.15g}  {E:>22.15g}" for f, m, e, E in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, config)
    return EXIT_PASS


def cmd_eigfn(config: CliConfig, label: SpectrumLabel, parity: Optional[int] = None) -> int:
    """Tabulate ``psi0 * h_m`` or ``psi0 * k_m`` over the lattice window."""
    lat, op, _, tol = config.build()
    ep = EigenproblemParams.from_lattice(lat, op, parity)
    f = eigenfunction(label, lat, ep, tol)
    if config.format == "json":
        rows = [{"sign": int(s), "n": int(n), "x": float(x), "re": v.real, "im": v.imag}
                for i, s in enumerate(lat.signs)
                for n, x, v in zip(f.indices, f.x[i], f.values[i])]
        text = json.dumps({"params": config.echo(lat), "label": str(label), "values": rows}, indent=2) + "\n"
    else:
        text = f.to_csv()
    _emit(text, config)
    return EXIT_PASS


def run_suite(config: CliConfig, suite: str, s_values=(0, 1), J: int = 10) -> VerificationReport:
    lat, op, ep, tol = config.build()
    rep = VerificationReport(f"verify.{suite}", config.echo(lat))
    want = SUITES[:-1] if suite == "all" else (suite,)
    if suite == "all" and not ep.calibrated:
        # these need the non-Fock family, which only exists on a calibrated lattice
        want = tuple(w for w in want if w not in ("moments", "completeness"))
        rep.note("lattice not calibrated: moments and completeness skipped")
    if "algebra" in want:
        rep.extend(algebra_check())
        rep.extend(phi11_recurrence_check(tol=tol))
    if "eigenvalues" in want:
        rep.extend(eigenvalue_check(lat, ep, tol=tol))
    if "orthogonality" in want:
        labels = [SpectrumLabel.fock(m) for m in range(6)]
        if ep.calibrated:
            labels += [SpectrumLabel.nonfock(m, op.gamma) for m in range(-3, 4)]
        rep.extend(orthogonality_check(labels, lat, ep, tol))
    if "connection" in want:
        rep.extend(connection_check(3, ep, tol, lat=lat))
    if "moments" in want:
        for s in s_values:
            rep.extend(moment_indeterminacy(s, J, lat, ep, tol))
    if "completeness" in want:
        rep.extend(completeness_sweep(shell_function(lat, ep, 0, tol), COMPLETENESS_CUTOFFS, lat, ep, tol))
        rep.extend(fock_incompleteness(lat, ep, tol=tol))
    return rep


def _emit_report(rep: VerificationReport, config: CliConfig):
    if config.format == "json":
        text = rep.to_json() + "\n"
    elif config.format == "csv":
        text = _csv([(c.id, _fmt(c.value), _fmt(c.tolerance), c.passed) for c in rep.checks],
                    ("id", "value", "tolerance", "pass"))
    else:
        text = rep.to_text() + "\n"
    _emit(text, config)
    if not rep.passed:
        print("failing checks: " + ", ".join(rep.failing()), file=sys.stderr)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_verify(config: CliConfig, suite: str = "all") -> int:
    return _emit_report(run_suite(config, suite), config)


def cmd_moments(config: CliConfig, s: int = 0, J: int = 10) -> int:
    lat, op, ep, tol = config.build()
    rep = VerificationReport("moments", config.echo(lat))
    rep.extend(moment_indeterminacy(s, J, lat, ep, tol))
    return _emit_report(rep, config)


# -- parsing -------------------------------------------------------------------------


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--q", type=float, default=2.0, help="deformation parameter q > 1 (default 2)")
    p.add_argument("--gamma", type=float, default=0.0, help="realization parameter gamma (default 0)")
    p.add_argument("--xi0", type=float, default=None,
                   help="lattice label in [1, q); default: the calibrated value")
    p.add_argument("--window", type=int, default=None,
                   help="index half-width K (default max(40, ceil(60/ln q)))")
    p.add_argument("--tol", type=float, default=1e-10, help="series truncation tolerance (default 1e-10)")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out", default=None, help="write output to this file instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="qline", description="Eigenbasis of the q-oscillator on the quantum line.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="tabulate both spectral families")
    sp.add_argument("--M", type=int, default=3, help="largest |m| listed (default 3)")

    ef = sub.add_parser("eigfn", parents=[common], help="export an eigenfunction as CSV")
    ef.add_argument("--kind", choices=(FOCK, NONFOCK), default=FOCK)
    ef.add_argument("--m", type=int, default=0)
    ef.add_argument("--parity", type=int, choices=(0, 1), default=None,
                    help="sublattice parity (default: the one with c = q**(-2 gamma))")

    vf = sub.add_parser("verify", parents=[common], help="run verification suites")
    vf.add_argument("--suite", choices=SUITES, default="all")

    mo = sub.add_parser("moments", parents=[common], help="moment invariance under the perturbed weight")
    mo.add_argument("--s", type=int, default=0, help="index of the perturbing non-Fock function")
    mo.add_argument("--J", type=int, default=10, help="highest moment order")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    config = CliConfig(args.q, args.gamma, args.xi0, args.window, args.tol, args.format, args.out)
    try:
        if args.command == "spectrum":
            return cmd_spectrum(config, args.M)
        if args.command == "eigfn":
            label = (SpectrumLabel.fock(args.m) if args.kind == FOCK
                     else SpectrumLabel.nonfock(args.m, args.gamma))
            return cmd_eigfn(config, label, args.parity)
        if args.command == "verify":
            return cmd_verify(config, args.suite)
        return cmd_moments(config, args.s, args.J)
    except QLineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
