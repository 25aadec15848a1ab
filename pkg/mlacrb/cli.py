# mlacrb/cli.py: command-line front end
#
# Each subcommand turns an ExperimentConfig into a Report (metadata lines,
# a header and rows).  Reports are built completely before anything is
# written, so output is produced single-threaded in a fixed order.

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from mlacrb.api import version
from mlacrb.design import match_design
from mlacrb.errors import (ConfigError, DomainError, Error, InfeasibleDesignError,
                           SingularityError, UnobservableError)
from mlacrb.fisher import crb_closed_mla, crb_closed_ula, crb_from_fim, fim_exact
from mlacrb.config import load_config
from mlacrb.gain import gain_grid
from mlacrb.link import snr_gamma
from mlacrb.simulate import McScenario, kinematic_predict, run_monte_carlo
from mlacrb.units import UNOBSERVABLE, adapt, dbm_to_watts, linear_to_db

__all__ = ["Report", "cmd_crb", "cmd_design", "cmd_gain", "cmd_mse", "main"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NO_ROWS = 3

# rows with |psi|^2 below this are left out of the closed-form discrepancy
GAIN_FLOOR_DB = -20.0


@dataclass
class Report:
    header: list
    rows: list = field(default_factory=list)
    meta: list = field(default_factory=list)
    table: list = None

    def note(self, key, value):
        self.meta.append((key, value))

    @property
    def has_values(self):
        return bool(self.rows)

    def write(self, stream):
        for key, value in self.meta:
            stream.write("# %s = %s\n" % (key, adapt(value)))
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([adapt(value) for value in row])


def _columns(mode, exact, closed, common=()):
    if mode == "exact":
        return list(common) + list(exact)
    if mode == "closed":
        return list(common) + list(closed)
    return list(common) + list(exact) + list(closed)


def _exact_pair(geom, target, gamma):
    fim = fim_exact(geom, target, 1.0)
    if fim.j_tt == 0.0:
        return 1.0 / (fim.j_rr * gamma), UNOBSERVABLE
    crb = crb_from_fim(fim).scaled(1.0 / gamma)
    return crb.crb_vr, crb.crb_vt


def _closed_pair(fn, *args):
    try:
        crb = fn(*args)
    except UnobservableError as exc:
        bound = getattr(exc, "radial_bound", None)
        return bound, UNOBSERVABLE
    return crb.crb_vr, crb.crb_vt


def cmd_crb(config, mode="both"):
    """Exact, closed-form and same-count ULA bounds over a range grid."""
    common = ("array", "M", "K", "L", "range_m", "fresnel_m", "below_fresnel")
    exact = ("crb_vr_exact", "crb_vt_exact")
    closed = ("crb_vr_closed", "crb_vt_closed", "crb_vr_ula", "crb_vt_ula")
    report = Report(_columns(mode, exact, closed, common) + ["status"])
    cpi, budget = config.cpi(), config.budget()
    ranges = config.crb_ranges()
    base = config.target()
    emitted = 0
    for name in config.get("crb", "arrays"):
        geom = config.geometry(name)
        d_f = geom.fresnel_distance
        report.note("fresnel_distance[%s]" % name, d_f)
        for r in ranges:
            target = replace(base, range=float(r))
            gamma = snr_gamma(budget, cpi, target.range)
            below = target.range < d_f
            if below:
                logger.warning("%s: r = %.6g m is inside the Fresnel distance %.6g m",
                               name, target.range, d_f)
            values, status = [], []
            if mode in ("both", "exact"):
                try:
                    values.extend(_exact_pair(geom, target, gamma))
                except SingularityError:
                    values.extend((None, None))
                    status.append("exact_singular")
            if mode in ("both", "closed"):
                for fn, args in (
                        (crb_closed_mla, (geom, target, gamma)),
                        (crb_closed_ula, (geom.num_elements, geom.element_spacing,
                                          target.range, target.angle, gamma))):
                    try:
                        values.extend(_closed_pair(fn, *args))
                    except SingularityError:
                        values.extend((None, None))
                        status.append("closed_singular")
            if any(v is not None for v in values):
                emitted += 1
            report.rows.append([name, geom.num_per_module, geom.num_modules,
                                geom.module_spacing, target.range, d_f, below]
                               + values + [";".join(dict.fromkeys(status)) or "ok"])
    if not emitted:
        report.rows = []
    return report


def cmd_gain(config, mode="both", threads=1):
    """Worst normalised array gain over a (delta_vr, delta_vt) grid, in dB."""
    name = config.get("gain", "array")
    geom = config.geometry(name)
    cpi = config.cpi()
    r = config.get("gain", "range") or geom.fresnel_distance
    target = config.target(r)
    points = config.get("gain", "points")
    dvr = np.linspace(-config.get("gain", "dvr_max"), config.get("gain", "dvr_max"), points)
    dvt = np.linspace(-config.get("gain", "dvt_max"), config.get("gain", "dvt_max"), points)
    report = Report(_columns(mode, ("gain_exact_db",), ("gain_dirichlet_db",),
                             ("delta_vr", "delta_vt")))
    report.note("array", name)
    report.note("range_m", r)
    report.note("fresnel_distance", geom.fresnel_distance)
    grids = []
    if mode in ("both", "exact"):
        grids.append(_db(gain_grid(geom, target, cpi, dvr, dvt, True, threads)))
    if mode in ("both", "closed"):
        grids.append(_db(gain_grid(geom, target, cpi, dvr, dvt, False, threads)))
    if len(grids) == 2:
        exact_db, closed_db = grids
        mask = exact_db > GAIN_FLOOR_DB
        worst = float(np.max(np.abs(exact_db - closed_db)[mask])) if mask.any() else 0.0
        report.note("max_discrepancy_db_above_%g_db" % GAIN_FLOOR_DB, worst)
    for i, vr in enumerate(dvr):
        for j, vt in enumerate(dvt):
            report.rows.append([float(vr), float(vt)] + [float(g[i, j]) for g in grids])
    return report


def _db(grid):
    with np.errstate(divide="ignore"):
        return linear_to_db(np.maximum(grid, 0.0))


def _scenario(config, name, transmit_power=None, range_=None):
    geom = config.geometry(name)
    cpi = config.cpi()
    state = config.target(range_)
    error_vr = config.get("mse", "prior_error_vr")
    error_vt = config.get("mse", "prior_error_vt")
    believed = state.with_velocity(state.radial_velocity - error_vr,
                                   state.transverse_velocity - error_vt)
    if config.get("mse", "predict"):
        # [target] is the previous CPI; both states advance one CPI
        truth = kinematic_predict(state, cpi)
        predicted = kinematic_predict(believed, cpi)
    else:
        truth, predicted = state, believed
    return McScenario(geometry=geom, truth=truth, predicted=predicted, cpi=cpi,
                      budget=config.budget(transmit_power),
                      init=(config.get("mse", "init_vr"), config.get("mse", "init_vt")),
                      search=config.search(), symbols=config.symbols())


def cmd_mse(config, mode="both", threads=1, seed=None):
    """Monte Carlo MSE of the velocity MLE against the bounds."""
    sweep = config.get("mse", "sweep")
    if sweep not in ("power", "distance"):
        raise ConfigError("sweep must be power or distance", section="mse", key="sweep")
    trials = config.get("mse", "trials")
    base_seed = config.get("mse", "seed") if seed is None else seed
    exact = ("crb_vr_exact", "crb_vt_exact")
    closed = ("crb_vr_closed", "crb_vt_closed")
    order = {"both": ("closed", "exact"), "exact": ("exact",), "closed": ("closed",)}[mode]
    columns = {"closed": closed, "exact": exact}
    report = Report(["array", "power_dbm", "trials", "mse_vr", "mse_vt"]
                    + [c for kind in order for c in columns[kind]]
                    + ["range_m", "bias_vr", "bias_vt", "failed_trials"])
    if sweep == "power":
        points = [(p, None) for p in config.get("mse", "powers")]
    else:
        power = config.text("link", "transmit_power")
        points = [(float(power), r) for r in config.get("mse", "ranges")]
    for name in config.get("mse", "arrays"):
        for power_dbm, r in points:
            try:
                scenario = _scenario(config, name, dbm_to_watts(power_dbm), r)
                stats = run_monte_carlo(scenario, trials, base_seed, threads)
            except DomainError as exc:
                logger.error("%s at %s dBm, r=%s: %s", name, power_dbm, r, exc)
                continue
            truth = scenario.truth
            gamma = snr_gamma(scenario.budget, scenario.cpi, truth.range)
            bounds = {}
            try:
                bounds["closed"] = _closed_pair(crb_closed_mla, scenario.geometry,
                                                truth, gamma)
            except SingularityError:
                bounds["closed"] = (None, None)
            try:
                bounds["exact"] = _exact_pair(scenario.geometry, truth, gamma)
            except SingularityError:
                bounds["exact"] = (None, None)
            row = [name, power_dbm, stats.num_trials, stats.mse_vr, stats.mse_vt]
            for kind in order:
                row.extend(bounds[kind])
            row.extend([truth.range, stats.bias_vr, stats.bias_vt, stats.failures])
            report.rows.append(row)
            logger.info("%s %g dBm r=%g: mse=(%.3g, %.3g) failed=%d", name, power_dbm,
                        truth.range, stats.mse_vr, stats.mse_vt, stats.failures)
    return report


def cmd_design(config):
    """Matched modular design against the reference ULA."""
    target = config.get("design", "per_module_count")
    if target != "min_antennas":
        try:
            target = int(target)
        except ValueError:
            raise ConfigError("per_module_count must be an integer or min_antennas",
                              section="design", key="per_module_count") from None
    result = match_design(config.get("design", "reference_count"),
                          config.get("design", "num_modules"),
                          target=target,
                          fraction=config.get("design", "fraction"),
                          rounding=config.get("design", "rounding"),
                          max_eta=config.get("design", "max_eta"),
                          wavelength=config.cpi().wavelength)
    header = ["M0", "K", "M_bar", "eta", "L_bar", "saving_pct",
              "transverse_ratio", "radial_penalty_db"]
    report = Report(header + ["eta_simplified", "L_bar_real", "rounding"])
    report.rows.append(list(result.as_row())
                       + [result.eta_simplified, result.spacing_real, result.rounding])
    report.table = _format_table(header, [result.as_row()])
    return report


def _format_table(header, rows):
    cells = [header] + [[adapt(round(v, 4) if isinstance(v, float) else v) for v in row]
                        for row in rows]
    widths = [max(len(str(row[i])) for row in cells) for i in range(len(header))]
    return ["  ".join(str(c).rjust(w) for c, w in zip(row, widths)) for row in cells]


def _add_common(parser):
    parser.add_argument("--config", metavar="PATH", help="INI experiment file")
    parser.add_argument("--out", metavar="CSV", default="-",
                        help="output file, '-' for stdout (default)")
    parser.add_argument("--seed", type=int, help="base seed, overrides mse.seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override one setting")
    only = parser.add_mutually_exclusive_group()
    only.add_argument("--exact-only", dest="mode", action="store_const",
                      const="exact", default="both")
    only.add_argument("--closed-only", dest="mode", action="store_const", const="closed")
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true")
    noise.add_argument("-q", "--quiet", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mlacrb",
        description="Velocity bounds, array gain, MLE Monte Carlo and antenna-"
                    "saving designs for near-field modular linear arrays.")
    parser.add_argument("--version", action="version", version="%(prog)s " + version)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True
    for name, help_text in (("crb", "bounds versus range for each configured array"),
                            ("gain", "worst array gain over a velocity-mismatch grid"),
                            ("mse", "Monte Carlo MSE of the velocity MLE"),
                            ("design", "antenna-saving modular design")):
        _add_common(commands.add_parser(name, help=help_text))
    return parser


def _configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("mlacrb").setLevel(level)


def _run(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append("mse.seed=%d" % args.seed)
    config = load_config(args.config, overrides)
    for name, value in config.resolved():
        logger.info("%s = %s", name, value)
    if args.command == "crb":
        report = cmd_crb(config, args.mode)
    elif args.command == "gain":
        report = cmd_gain(config, args.mode, args.threads)
    elif args.command == "mse":
        report = cmd_mse(config, args.mode, args.threads)
    else:
        report = cmd_design(config)
    report.meta = ([("mlacrb_version", version), ("command", args.command)]
                   + config.resolved() + report.meta)
    return report


def main(argv=None):
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        report = _run(args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (InfeasibleDesignError, SingularityError) as exc:
        logger.error("%s", exc)
        return EXIT_NO_ROWS
    except Error as exc:
        logger.error("%s", exc)
        return EXIT_FAILURE
    if not report.has_values:
        logger.error("no rows to write")
        return EXIT_NO_ROWS
    if args.out == "-":
        report.write(sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            report.write(fh)
        for line in report.table or ():
            print(line)
    return EXIT_OK
