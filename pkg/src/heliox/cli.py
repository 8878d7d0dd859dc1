"""Command-line front end: energies, entropies, Z sweeps, table reproduction.

Subcommands
-----------
energy     E(Z, omega) over a grid of charges and basis orders
entropy    ground-state solve plus entropy convergence ladder for one Z
sweep      entropies over a list/range of charges, CSV or JSON
reproduce  regenerate a reference table (table1, table2, table3, table5, fig1)

Everything is deterministic: identical manifests produce byte-identical CSV.
JSON output additionally carries wall time and the library version, which is
why those fields are not part of the CSV surface.  Exit codes: 0 success,
2 usage error, 3 numerical or convergence failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__, spectrum, variational
from .errors import HelioxError
from .spectrum import GridSpec, converge, partial_entropies, spectrum_for

# proportionality constant between the entropies at the high-Z end
RESCALE_CONSTANT = 6.856

# charges below this sit too close to the detachment threshold (bound state
# lost near Z ~ 0.911) for the default boxes to be trusted
Z_FLOOR = 0.95

DEFAULT_ENTROPY_OMEGA = 12  # highest order below the cap
TABLE_OMEGA = 14  # the published reference tables use this order

# printed cells of the energy table: basis orders per column Z = 1..5
TABLE1_CELLS = {1: (6, 8, 10, 12, 14), 2: (6, 8, 10, 12), 3: (6, 8, 10),
                4: (6, 8), 5: (6, 8)}
TABLE1_ROWS = (6, 8, 10, 12, 14)
TABLE2_OMEGAS = (6, 10, 14)
TABLE2_BOXES = (7.0, 9.0, 10.0)
TABLE3_LM_ROWS = (0, 1, 2, 3, 4, 5, 10, 14, 18, 20)
TABLE3_GRIDS = (300, 600, 1200)
REPRODUCE_IDS = ("table1", "table2", "table3", "table5", "fig1")


@dataclass
class RunManifest:
    """Validated inputs of one run; round-trips through the config format.

    Runs are seedless: results depend only on these fields.
    """

    command: str
    Z: tuple[float, ...] = (2.0,)
    omega: tuple[int, ...] | None = None
    mu: float | None = None
    R: float | None = None
    nm: int | None = None
    lmax: int | None = None
    tol_s: float = 1e-5
    tol_l: float = 1e-6
    fmt: str = "csv"
    out: str | None = None
    force_omega: bool = False
    table: str | None = None
    max_omega: int = 10

    def validate(self) -> None:
        if self.command not in ("energy", "entropy", "sweep", "reproduce"):
            raise ValueError(f"unknown command {self.command!r}")
        if not self.Z:
            raise ValueError("at least one Z value is required")
        if any(z <= 0.0 for z in self.Z):
            raise ValueError("Z values must be positive")
        if self.command == "sweep" and any(z <= Z_FLOOR for z in self.Z):
            raise ValueError(
                f"sweep refuses Z <= {Z_FLOOR}: this close to the critical "
                "charge (~0.911) the two-electron bound state is at risk and "
                "the default boxes are not validated"
            )
        if self.command == "entropy" and len(self.Z) != 1:
            raise ValueError("entropy takes exactly one Z (use sweep)")
        if self.omega is not None and any(o < 0 for o in self.omega):
            raise ValueError("omega must be non-negative")
        if self.mu is not None and self.mu <= 0.0:
            raise ValueError("mu must be positive")
        if self.R is not None and self.R <= 0.0:
            raise ValueError("R must be positive")
        if self.nm is not None and self.nm < 2:
            raise ValueError("nm must be at least 2")
        if self.lmax is not None and self.lmax < 0:
            raise ValueError("lmax must be non-negative")
        if self.tol_s <= 0.0 or self.tol_l <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt!r}")
        if self.command == "reproduce" and self.table not in REPRODUCE_IDS:
            raise ValueError(
                f"unknown table id {self.table!r}; choose from "
                + ", ".join(REPRODUCE_IDS)
            )

    def to_config(self) -> str:
        """Flat key=value text from which the manifest can be rebuilt."""
        lines = [f"command = {self.command}"]
        lines.append("Z = " + ",".join(repr(z) for z in self.Z))
        if self.omega is not None:
            lines.append("omega = " + ",".join(str(o) for o in self.omega))
        for key, val in (
            ("mu", self.mu),
            ("R", self.R),
            ("nm", self.nm),
            ("lmax", self.lmax),
            ("tol_s", repr(self.tol_s)),
            ("tol_l", repr(self.tol_l)),
            ("format", self.fmt),
            ("out", self.out),
            ("force_omega", str(self.force_omega).lower()),
            ("table", self.table),
            ("max_omega", self.max_omega),
        ):
            if val is not None:
                lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


def parse_config(text: str) -> dict[str, str]:
    """Parse flat key=value lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _parse_z_list(text: str) -> tuple[float, ...]:
    """Comma list ('1,2,3') or range ('1:5:0.5', inclusive end)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad Z range {text!r}, use start:stop[:step]")
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        if step <= 0.0 or stop < start:
            raise ValueError(f"bad Z range {text!r}")
        count = int(round((stop - start) / step))
        values = [round(start + i * step, 10) for i in range(count + 1)]
        return tuple(v for v in values if v <= stop + 1e-12)
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_omega_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def manifest_from_config(command: str, cfg: dict[str, str]) -> dict:
    """Config values as manifest keyword arguments."""
    kwargs: dict = {}
    if "Z" in cfg:
        kwargs["Z"] = _parse_z_list(cfg["Z"])
    if "omega" in cfg:
        kwargs["omega"] = _parse_omega_list(cfg["omega"])
    for key, conv in (
        ("mu", float),
        ("R", float),
        ("nm", int),
        ("lmax", int),
        ("tol_s", float),
        ("tol_l", float),
        ("max_omega", int),
    ):
        if key in cfg:
            kwargs[key] = conv(cfg[key])
    if "format" in cfg:
        kwargs["fmt"] = cfg["format"]
    if "out" in cfg:
        kwargs["out"] = cfg["out"]
    if "force_omega" in cfg:
        kwargs["force_omega"] = cfg["force_omega"].lower() in ("1", "true", "yes")
    if "table" in cfg:
        kwargs["table"] = cfg["table"]
    return kwargs


def manifest_round_trip(man: RunManifest) -> RunManifest:
    """Rebuild a manifest from its own config text (lossless by contract)."""
    cfg = parse_config(man.to_config())
    command = cfg.pop("command", man.command)
    return RunManifest(command=command, **manifest_from_config(command, cfg))


# ---------------------------------------------------------------------------
# result records and emission


@dataclass
class ResultRecord:
    """One computed row plus run metadata (JSON carries the full record)."""

    kind: str
    values: dict  # ordered column -> formatted string
    extra: dict = field(default_factory=dict)  # JSON-only payload


def _fmt(value: float, decimals: int) -> str:
    return f"{value:.{decimals}f}"


def _achieved_decimals(delta: float, lo: int = 4, hi: int = 9) -> int:
    """Digits supported by an achieved convergence delta; extra digits are
    truncated rather than printed."""
    if delta <= 0.0:
        return hi
    return max(lo, min(hi, math.ceil(-math.log10(delta))))


def _emit_csv(header: list[str], rows: list[list[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"wrote {out}", file=sys.stderr)


def _json_payload(man: RunManifest, rows: list[dict], extra: dict,
                  started: float) -> str:
    payload = {
        "command": man.command,
        "inputs": {
            "Z": list(man.Z),
            "omega": list(man.omega) if man.omega else None,
            "mu": man.mu,
            "R": man.R,
            "nm": man.nm,
            "lmax": man.lmax,
            "tol_s": man.tol_s,
            "tol_l": man.tol_l,
        },
        "results": rows,
        **extra,
        "wall_time_s": round(time.monotonic() - started, 3),
        "version": __version__,
    }
    return json.dumps(payload, indent=2) + "\n"


# ---------------------------------------------------------------------------
# computations shared by entropy / sweep / reproduce


def _ground_state(Z: float, omega: int, mu: float | None,
                  force: bool) -> variational.GroundState:
    if mu is not None:
        return variational.solve_at_mu(Z, omega, mu, force_omega=force)
    return variational.optimize_mu(Z, omega, force_omega=force)


def _entropy_schedule(man: RunManifest, Z: float):
    lmax = man.lmax if man.lmax is not None else 20
    if man.R is None and man.nm is None:
        return spectrum.default_schedule(Z, lmax=lmax)
    # pinned grid: keep a half-resolution rung so convergence is still checked
    default_final = spectrum.default_schedule(Z, lmax=lmax)[-1]
    R = man.R if man.R is not None else default_final[0]
    nm = man.nm if man.nm is not None else default_final[1]
    return [(R, max(2, nm // 2), lmax), (R, nm, lmax)]


def _entropy_result(man: RunManifest, Z: float, omega: int, force: bool):
    state = _ground_state(Z, omega, man.mu, force)
    result = converge(
        state.expansion,
        tol_S=man.tol_s,
        tol_L=man.tol_l,
        schedule=_entropy_schedule(man, Z),
    )
    return state, result


def _entropy_row(man: RunManifest, state, result) -> ResultRecord:
    last, prev = result.ladder[-1], result.ladder[-2]
    dp_s = _achieved_decimals(abs(last.S - prev.S))
    dp_l = _achieved_decimals(abs(last.L - prev.L))
    values = {
        "Z": f"{state.Z:g}",
        "omega": str(state.omega),
        "mu": _fmt(state.mu, 6),
        "energy_hartree": _fmt(state.energy, 9),
        "R": f"{last.R:g}",
        "n_m": str(last.n_m),
        "l_max": str(last.l_m),
        "S_bits": _fmt(result.S, dp_s),
        "L": _fmt(result.L, dp_l),
        "occupancy_deficit": f"{result.deficit:.2e}",
    }
    ladder = [
        {"R": rec.R, "n_m": rec.n_m, "l_m": rec.l_m,
         "S_bits": round(rec.S, 9), "L": round(rec.L, 9)}
        for rec in result.ladder
    ]
    return ResultRecord(kind="entropy", values=values,
                        extra={"ladder": ladder})


# ---------------------------------------------------------------------------
# subcommands


def cmd_energy(man: RunManifest) -> int:
    started = time.monotonic()
    omegas = man.omega if man.omega is not None else (10,)
    rows: list[ResultRecord] = []
    for Z in man.Z:
        for omega in omegas:
            state = _ground_state(Z, omega, man.mu, man.force_omega)
            rows.append(ResultRecord(
                kind="energy",
                values={
                    "Z": f"{Z:g}",
                    "omega": str(omega),
                    "mu": _fmt(state.mu, 6),
                    "energy_hartree": _fmt(state.energy, 9),
                },
            ))
    if man.fmt == "csv":
        header = list(rows[0].values)
        text = _emit_csv(header, [list(r.values.values()) for r in rows])
    else:
        text = _json_payload(
            man, [r.values for r in rows], {}, started)
    _write_output(text, man.out)
    return 0


def cmd_entropy(man: RunManifest) -> int:
    started = time.monotonic()
    omega = man.omega[0] if man.omega else DEFAULT_ENTROPY_OMEGA
    state, result = _entropy_result(man, man.Z[0], omega, man.force_omega)
    record = _entropy_row(man, state, result)
    if man.fmt == "csv":
        header = list(record.values) + ["ladder"]
        ladder_txt = ";".join(
            f"(R={rec.R:g} n_m={rec.n_m} l_m={rec.l_m} "
            f"S={rec.S:.9f} L={rec.L:.9f})"
            for rec in result.ladder
        )
        text = _emit_csv(header, [list(record.values.values()) + [ladder_txt]])
    else:
        text = _json_payload(
            man, [{**record.values, **record.extra}], {}, started)
    _write_output(text, man.out)
    return 0


def _sweep_one(man: RunManifest, Z: float):
    omega = man.omega[0] if man.omega else DEFAULT_ENTROPY_OMEGA
    return _entropy_result(man, Z, omega, man.force_omega)


def thread_count() -> int:
    env = os.environ.get("HELIOX_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def cmd_sweep(man: RunManifest) -> int:
    started = time.monotonic()
    # job pool over Z values; output is assembled in input order
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda z: _sweep_one(man, z), man.Z))
    rows: list[dict] = []
    for Z, (state, result) in zip(man.Z, results):
        last, prev = result.ladder[-1], result.ladder[-2]
        dp_s = _achieved_decimals(abs(last.S - prev.S))
        dp_l = _achieved_decimals(abs(last.L - prev.L))
        rows.append({
            "Z": f"{Z:g}",
            "S_bits": _fmt(result.S, dp_s),
            "L": _fmt(result.L, dp_l),
            "L_rescaled": _fmt(RESCALE_CONSTANT * result.L, dp_l),
            "ratio_S_over_L": _fmt(result.S / result.L, 4),
        })
    # the rescale factor is re-derived at the high-Z end when available
    factor = None
    for Z, (state, result) in zip(man.Z, results):
        if abs(Z - 5.0) < 1e-9:
            factor = result.S / result.L
    if man.fmt == "csv":
        header = list(rows[0])
        text = _emit_csv(header, [list(r.values()) for r in rows])
    else:
        text = _json_payload(
            man,
            rows,
            {
                "rescale_constant": RESCALE_CONSTANT,
                "rescale_factor_z5": (
                    round(factor, 4) if factor is not None else None
                ),
            },
            started,
        )
    _write_output(text, man.out)
    if factor is not None:
        print(
            f"rescale factor S/L at Z=5: {factor:.4f} "
            f"(constant {RESCALE_CONSTANT})",
            file=sys.stderr,
        )
    return 0


def _text_table(title: str, header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(header[c]), *(len(r[c]) for r in rows))
        for c in range(len(header))
    ]
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [title, line(header)]
    out.extend(line(r) for r in rows)
    return "\n".join(out) + "\n"


def _reproduce_table1(man: RunManifest):
    rows = []
    for omega in TABLE1_ROWS:
        cells = [str(omega)]
        for Z in (1, 2, 3, 4, 5):
            if omega in TABLE1_CELLS[Z] and omega <= man.max_omega:
                state = _ground_state(float(Z), omega, None,
                                      force=omega > variational.OMEGA_CAP)
                cells.append(f"{state.energy:.10g}")
            else:
                cells.append("")
        rows.append(cells)
    header = ["omega"] + [f"Z={z}" for z in (1, 2, 3, 4, 5)]
    title = ("Ground-state energies E(Z, omega) in hartree "
             f"(computed cells up to omega={man.max_omega})")
    return title, header, rows


def _reproduce_table2(man: RunManifest):
    rows = []
    for omega in TABLE2_OMEGAS:
        state = _ground_state(2.0, omega, None, force=omega > variational.OMEGA_CAP)
        cells = [f"omega={omega}"]
        for R in TABLE2_BOXES:
            spec = spectrum_for(
                state.expansion, GridSpec(R=R, n_m=1200), lmax=2)
            res = spectrum.entropies(spec)
            cells.append(f"{res.L:.7f}")
        rows.append(cells)
    header = [""] + [f"R={R:g}" for R in TABLE2_BOXES]
    title = "Helium linear entropy L vs box edge R and basis order"
    return title, header, rows


def _reproduce_table3(man: RunManifest):
    state = _ground_state(2.0, TABLE_OMEGA, None, force=True)
    partial = {}
    for n_m in TABLE3_GRIDS:
        spec = spectrum_for(
            state.expansion, GridSpec(R=10.0, n_m=n_m), lmax=max(TABLE3_LM_ROWS))
        s_part, _ = partial_entropies(spec)
        partial[n_m] = s_part
    rows = [
        [f"l_m={lm}"] + [f"{partial[n_m][lm]:.7f}" for n_m in TABLE3_GRIDS]
        for lm in TABLE3_LM_ROWS
    ]
    header = [""] + [f"n_m={n}" for n in TABLE3_GRIDS]
    title = ("Helium von Neumann entropy S (bits) vs angular and radial "
             "cutoffs at R=10")
    return title, header, rows


def _reproduce_table5(man: RunManifest):
    l_row, s_row = ["L"], ["S"]
    for Z in (1.0, 2.0, 3.0, 4.0, 5.0):
        state, result = _entropy_result(man, Z, TABLE_OMEGA, force=True)
        l_row.append(f"{result.L:.7f}")
        s_row.append(f"{result.S:.7f}")
    header = [""] + [f"Z={int(z)}" for z in (1, 2, 3, 4, 5)]
    title = "Entanglement entropies of the isoelectronic series"
    return title, header, [l_row, s_row]


def _reproduce_fig1(man: RunManifest):
    z_values = [round(0.1 * k, 1) for k in range(10, 51)]
    rows = []
    for Z in z_values:
        state = _ground_state(Z, 10, None, force=False)
        schedule = [
            (R, n_m, 8) for R, n_m, _ in spectrum.default_schedule(Z)[:2]
        ]
        result = converge(
            state.expansion, tol_S=1e-3, tol_L=1e-3, schedule=schedule)
        rows.append([
            f"{Z:g}",
            f"{result.S:.5f}",
            f"{RESCALE_CONSTANT * result.L:.5f}",
        ])
    header = ["Z", "S_bits", "L_rescaled"]
    title = ("Von Neumann entropy and rescaled linear entropy "
             f"({RESCALE_CONSTANT} L) over fractional Z "
             "(figure-resolution settings)")
    return title, header, rows


def cmd_reproduce(man: RunManifest) -> int:
    builder = {
        "table1": _reproduce_table1,
        "table2": _reproduce_table2,
        "table3": _reproduce_table3,
        "table5": _reproduce_table5,
        "fig1": _reproduce_fig1,
    }[man.table]
    title, header, rows = builder(man)
    sys.stdout.write(_text_table(title, header, rows))
    if man.out is not None:
        _write_output(_emit_csv(header, rows), man.out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heliox",
        description=(
            "Variational ground states and entanglement entropies of "
            "two-electron atoms."
        ),
    )
    parser.add_argument("--version", action="version",
                        version=f"heliox {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_grid=True):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--Z", help="charge, comma list, or start:stop:step")
        p.add_argument("--omega", help="basis order (comma list for energy)")
        p.add_argument("--mu", type=float,
                       help="fix the exponential parameter (skip optimization)")
        p.add_argument("--force-omega", action="store_true",
                       help=f"allow omega beyond the cap "
                            f"({variational.OMEGA_CAP}), with a warning")
        if with_grid:
            p.add_argument("--R", type=float, help="box edge in bohr")
            p.add_argument("--nm", type=int, help="grid intervals n_m")
            p.add_argument("--lmax", type=int, help="largest partial wave")
            p.add_argument("--tol-s", type=float,
                           help="convergence tolerance for S (bits)")
            p.add_argument("--tol-l", type=float,
                           help="convergence tolerance for L")
        p.add_argument("--format", choices=("csv", "json"), dest="fmt",
                       help="output format (default csv)")
        p.add_argument("--out", help="write output to this path")

    common(sub.add_parser("energy", help="ground-state energies E(Z, omega)"),
           with_grid=False)
    common(sub.add_parser("entropy",
                          help="entanglement entropies for one charge"))
    common(sub.add_parser("sweep", help="entropies over a list of charges"))
    rep = sub.add_parser("reproduce", help="regenerate a reference table")
    rep.add_argument("table", choices=REPRODUCE_IDS)
    rep.add_argument("--config", help="flat key=value config file")
    rep.add_argument("--max-omega", type=int, default=10,
                     help="largest basis order computed for table1 "
                          "(default 10; the full table needs 14)")
    rep.add_argument("--out", help="also write the table as CSV to this path")
    return parser


def build_manifest(args: argparse.Namespace) -> RunManifest:
    kwargs: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            kwargs.update(manifest_from_config(args.command,
                                               parse_config(fh.read())))
    if getattr(args, "Z", None):
        kwargs["Z"] = _parse_z_list(args.Z)
    if getattr(args, "omega", None):
        kwargs["omega"] = _parse_omega_list(args.omega)
    for attr, key in (("mu", "mu"), ("R", "R"), ("nm", "nm"),
                      ("lmax", "lmax"), ("tol_s", "tol_s"),
                      ("tol_l", "tol_l"), ("fmt", "fmt"), ("out", "out"),
                      ("max_omega", "max_omega")):
        val = getattr(args, attr, None)
        if val is not None:
            kwargs[key] = val
    if getattr(args, "force_omega", False):
        kwargs["force_omega"] = True
    if getattr(args, "table", None):
        kwargs["table"] = args.table
    man = RunManifest(command=args.command, **kwargs)
    man.validate()
    return man


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        man = build_manifest(args)
    except (ValueError, OSError) as err:
        parser.error(str(err))  # exits 2
    handler = {
        "energy": cmd_energy,
        "entropy": cmd_entropy,
        "sweep": cmd_sweep,
        "reproduce": cmd_reproduce,
    }[man.command]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return handler(man)
    except ValueError as err:
        parser.error(str(err))  # bad parameter discovered downstream
    except HelioxError as err:
        print(f"heliox: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
