"""Command-line front end: `biortho <command> [options]`.

Each command is a provider with its own defaults; the service layers
provider defaults < `--config` JSON file < explicit flags, runs the
provider and maps library exceptions to exit codes.
"""

import argparse
import logging
import sys
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.bimoments.moments import write_table_csv
from src.biorthogonal.recurrence import recurrence_coeffs, recurrence_residuals, verify_cd
from src.biorthogonal.system import build_system, kernel, rational_parts
from src.conformal.curve import trace_curve
from src.conformal.maps import ConformalMap, critical_points
from src.core.config import commandParamConfig, commonDefaults
from src.core.errors import (
    BiorthoError,
    ConfigError,
    DegeneratePoint,
    IrrationalTheta,
    ValidationError,
)
from src.core.validation import MeasureCache, ValidationSuite
from src.equilibrium.measure import euler_lagrange_grids, verify_euler_lagrange
from src.numerics.precision import PrecisionContext
from src.potentials.potential import Potential, Weight, parse_potential, parse_weight
from src.sampler.chain import EnsembleConfig, ks_against_measure, run_chain
from src.utils.io_utils import load_json_config, report_entry, write_csv, write_report

logger = logging.getLogger(__name__)

PROGRAM_NAME = "biortho"

Theta = Union[Fraction, float]

# Soft window for the sampler's acceptance rate
ACCEPTANCE_WINDOW = (0.1, 0.7)
KS_TOLERANCE = 0.1


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass
class RunConfig:
    command: str
    theta: Theta
    params: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Any:
        return self.params[name]

    def get(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    @property
    def theta_float(self) -> float:
        return float(self.theta)

    def echo(self) -> Dict[str, Any]:
        """Everything that determines the output, for the CSV comment line."""
        echoed = {k: v for k, v in self.params.items() if k not in ("log_level", "config")}
        echoed["command"] = self.command
        echoed["theta"] = str(self.theta)
        return echoed


@dataclass
class CommandResult:
    command: str
    exit_code: int = 0
    rows_written: int = 0
    outputs: Tuple[str, ...] = ()
    metadata: Optional[Dict[str, Any]] = None


# ============================================================================
# PARSING HELPERS
# ============================================================================

def parse_theta(value: Any) -> Theta:
    """`a/b` and integer text give an exact Fraction, decimal text a float."""
    try:
        if isinstance(value, Fraction):
            theta = value
        elif isinstance(value, bool):
            raise ConfigError(f"theta must be a number, got {value!r}")
        elif isinstance(value, int):
            theta = Fraction(value)
        elif isinstance(value, float):
            theta = value
        else:
            text = str(value).strip()
            if "/" in text or text.lstrip("+").isdigit():
                theta = Fraction(text)
            else:
                theta = float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse theta from {value!r}") from exc
    if not theta >= 1:
        raise ConfigError(f"theta must be >= 1, got {theta}")
    return theta


def _checks_list(text: str) -> List[str]:
    return [name.strip() for name in text.split(",") if name.strip()]


def check_parameter_ranges(params: Dict[str, Any]) -> Dict[str, Any]:
    """Coerce numeric options to their types and check them against commandParamConfig."""
    checked = dict(params)
    for name, (low, high), default in commandParamConfig():
        value = checked.get(name)
        if value is None:
            continue
        as_float = default is None or isinstance(default, float)
        if isinstance(value, bool):
            raise ConfigError(f"--{name.replace('_', '-')} must be numeric, got {value!r}")
        try:
            value = float(value) if as_float else int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"--{name.replace('_', '-')}: cannot use {value!r}") from exc
        if not low <= value <= high:
            raise ConfigError(f"--{name.replace('_', '-')}={value} outside [{low}, {high}]")
        checked[name] = value
    return checked


def param_defaults(*names: str) -> Dict[str, Any]:
    table = {name: default for name, _, default in commandParamConfig()}
    return {name: table[name] for name in names}


class ArgumentParser(argparse.ArgumentParser):
    """argparse whose usage errors raise ConfigError instead of exiting with 2."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# ============================================================================
# INTERFACES (CONTRACTS)
# ============================================================================

class CommandProvider(ABC):
    name: str = ""
    help: str = ""
    requires_rational_theta: bool = False

    @abstractmethod
    def run(self, config: RunConfig) -> CommandResult:
        pass

    @abstractmethod
    def get_supported_parameters(self) -> Dict[str, Any]:
        pass

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        pass

    # ---- shared resolution of the weight / potential options ----------------

    @staticmethod
    def potential(config: RunConfig) -> Potential:
        if config["potential"] is not None:
            return parse_potential(config["potential"])
        if config["weight"] is not None:
            return parse_weight(config["weight"]).potential
        raise ConfigError(f"{config.command} needs --potential or --weight")

    @staticmethod
    def weight(config: RunConfig) -> Weight:
        potential = None
        if config["potential"] is not None:
            potential = parse_potential(config["potential"])
        return parse_weight(config["weight"], potential, config["alpha"])

    @staticmethod
    def context(config: RunConfig) -> PrecisionContext:
        return PrecisionContext(mantissa_bits=config["precision"])


# ============================================================================
# BIORTHOGONAL COMMANDS
# ============================================================================

class PolysProvider(CommandProvider):
    name = "polys"
    help = "coefficients of p_j and q_j"

    def get_supported_parameters(self) -> Dict[str, Any]:
        return {**param_defaults("jmax"), "table": None}

    def add_arguments(self, parser):
        parser.add_argument("--jmax", type=int)
        parser.add_argument("--table", help="also write the bimoment table to this CSV")

    def run(self, config: RunConfig) -> CommandResult:
        system = build_system(self.weight(config), config.theta, config["jmax"], self.context(config))

        def rows():
            for j in range(system.jmax + 1):
                for power in range(j + 1):
                    yield j, power, system.p_coeffs[j][power], system.q_coeffs[j][power], system.kappa[j]

        count = write_csv(config["out"], ("j", "power", "p_coeff", "q_coeff", "kappa"), rows(),
                          config.echo())
        outputs = (config["out"],)
        if config["table"]:
            write_table_csv(system.table, config["table"], config.echo())
            outputs += (config["table"],)
        return CommandResult(self.name, rows_written=count, outputs=outputs)


class RecurrenceProvider(CommandProvider):
    name = "recurrence"
    help = "recurrence coefficients u_j(k), v_j(k) and identity residuals"
    requires_rational_theta = True

    def get_supported_parameters(self) -> Dict[str, Any]:
        return param_defaults("k_max", "tol")

    def add_arguments(self, parser):
        parser.add_argument("--k-max", dest="k_max", type=int)
        parser.add_argument("--tol", type=float)

    def run(self, config: RunConfig) -> CommandResult:
        a, b = rational_parts(config.theta)
        k_max = config["k_max"]
        system = build_system(self.weight(config), config.theta, k_max + max(a, b), self.context(config))
        worst = 0.0
        rows = []
        for k in range(k_max + 1):
            coeffs = recurrence_coeffs(system, k)
            residuals = recurrence_residuals(system, k)
            worst = max(worst, *(float(r) for r in residuals))
            for j in range(a + b + 1):
                rows.append((k, j, coeffs.u[j], coeffs.v[j], *residuals))
        header = ("k", "j", "u", "v", "p_residual", "q_residual", "symmetry_residual")
        count = write_csv(config["out"], header, rows, config.echo())
        if worst > config["tol"]:
            raise ValidationError(f"recurrence residual {worst:.3g} exceeds {config['tol']:.3g}")
        return CommandResult(self.name, rows_written=count, outputs=(config["out"],),
                             metadata={"max_residual": worst})


class CdCheckProvider(CommandProvider):
    name = "cd-check"
    help = "Christoffel-Darboux residuals at random points of (0, 5)^2"
    requires_rational_theta = True

    def get_supported_parameters(self) -> Dict[str, Any]:
        return param_defaults("n", "points", "seed", "tol")

    def add_arguments(self, parser):
        parser.add_argument("--n", type=int)
        parser.add_argument("--points", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--tol", type=float)

    def run(self, config: RunConfig) -> CommandResult:
        a, _ = rational_parts(config.theta)
        n = config["n"]
        system = build_system(self.weight(config), config.theta, n + a, self.context(config))
        rng = np.random.Generator(np.random.PCG64(config["seed"]))
        rows = []
        for x, y in rng.uniform(0.0, 5.0, (config["points"], 2)):
            try:
                rows.append((float(x), float(y), verify_cd(system, n, float(x), float(y))))
            except DegeneratePoint:
                logger.debug("skipping degenerate pair (%g, %g)", x, y)
        count = write_csv(config["out"], ("x", "y", "residual"), rows, config.echo())
        worst = max((float(r[2]) for r in rows), default=0.0)
        logger.info("cd-check: max residual %.3g over %d points", worst, count)
        if worst > config["tol"]:
            raise ValidationError(f"Christoffel-Darboux residual {worst:.3g} exceeds {config['tol']:.3g}")
        return CommandResult(self.name, rows_written=count, outputs=(config["out"],),
                             metadata={"max_residual": worst})


class KernelProvider(CommandProvider):
    name = "kernel"
    help = "correlation kernel K_n on a square grid"

    def get_supported_parameters(self) -> Dict[str, Any]:
        return {**param_defaults("n", "xmax"), "grid": 20}

    def add_arguments(self, parser):
        parser.add_argument("--n", type=int)
        parser.add_argument("--grid", type=int)
        parser.add_argument("--xmax", type=float)

    def run(self, config: RunConfig) -> CommandResult:
        n = config["n"]
        system = build_system(self.weight(config), config.theta, max(n - 1, 1), self.context(config))
        xs = config["xmax"] * (np.arange(config["grid"]) + 0.5) / config["grid"]

        def rows():
            for x in xs:
                for y in xs:
                    yield float(x), float(y), kernel(system, n, float(x), float(y))

        count = write_csv(config["out"], ("x", "y", "K"), rows(), config.echo())
        return CommandResult(self.name, rows_written=count, outputs=(config["out"],))


# ============================================================================
# EQUILIBRIUM COMMANDS
# ============================================================================

class CurveProvider(CommandProvider):
    name = "curve"
    help = "trace the curve on which the conformal map is real"

    def get_supported_parameters(self) -> Dict[str, Any]:
        return {**param_defaults("c", "c0", "c1", "nodes"), "kind": "hard"}

    def add_arguments(self, parser):
        parser.add_argument("--kind", choices=("hard", "soft"))
        parser.add_argument("--c", type=float)
        parser.add_argument("--c0", type=float)
        parser.add_argument("--c1", type=float)
        parser.add_argument("--nodes", type=int)

    def run(self, config: RunConfig) -> CommandResult:
        if config["kind"] == "soft":
            if config["c0"] is None or config["c1"] is None:
                raise ConfigError("a soft-edge curve needs --c0 and --c1")
            m = ConformalMap.soft(config.theta_float, config["c0"], config["c1"])
        else:
            m = ConformalMap.hard(config.theta_float, config["c"])
        curve = trace_curve(m, config["nodes"])
        crit = critical_points(m)
        logger.info("curve endpoints s=%g -> %g and s=%g -> %g", crit.left_point, crit.left_image,
                    crit.s_b, crit.image_b)
        count = write_csv(config["out"], ("phi", "re_s", "im_s", "J_of_s"), curve.rows(), config.echo())
        return CommandResult(self.name, rows_written=count, outputs=(config["out"],))


class EquilibriumProvider(CommandProvider):
    name = "eq"
    help = "equilibrium density, edge regime and Euler-Lagrange constant"

    def __init__(self, cache: MeasureCache):
        self._cache = cache

    def get_supported_parameters(self) -> Dict[str, Any]:
        return param_defaults("grid", "el_points")

    def add_arguments(self, parser):
        parser.add_argument("--grid", type=int)
        parser.add_argument("--el-points", dest="el_points", type=int)

    def run(self, config: RunConfig) -> CommandResult:
        measure = self._cache.get(self.potential(config), config.theta_float)
        if config["el_points"] > 0:
            report = verify_euler_lagrange(measure, *euler_lagrange_grids(measure, config["el_points"]))
            logger.info("Euler-Lagrange: max deviation %.3g, min slack %.3g",
                        report.max_dev_on_support, report.min_slack_off_support)
        summary = measure.summary()
        columns = ("regime", "a", "b", "c_or_c0", "c1", "d1", "d2", "ell")
        rows = ((x, psi, *(summary[k] for k in columns)) for x, psi in measure.psi_grid(config["grid"]))
        count = write_csv(config["out"], ("x", "psi") + columns, rows, config.echo())
        return CommandResult(self.name, rows_written=count, outputs=(config["out"],), metadata=summary)


class SampleProvider(CommandProvider):
    name = "sample"
    help = "Metropolis samples of the n-particle ensemble"

    def __init__(self, cache: MeasureCache):
        self._cache = cache

    def get_supported_parameters(self) -> Dict[str, Any]:
        return {**param_defaults("sweeps", "burn_in", "thinning", "seed"), "n": 50, "ks": False}

    def add_arguments(self, parser):
        parser.add_argument("--n", type=int)
        parser.add_argument("--sweeps", type=int)
        parser.add_argument("--burn-in", dest="burn_in", type=int)
        parser.add_argument("--thinning", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--ks", action="store_true",
                            help="compare pooled particles with the equilibrium measure")

    def run(self, config: RunConfig) -> CommandResult:
        V = self.potential(config)
        cfg = EnsembleConfig.for_equilibrium(config["n"], config.theta_float, V,
                                             alpha=config["alpha"] or 0.0, seed=config["seed"])
        result = run_chain(cfg, config["sweeps"], config["burn_in"], config["thinning"])
        header = ("sweep",) + tuple(f"lambda_{i + 1}" for i in range(cfg.n_particles))
        rows = ((index, *row) for index, row in enumerate(result.samples))
        count = write_csv(config["out"], header, rows, config.echo())

        low, high = ACCEPTANCE_WINDOW
        if not low <= result.acceptance_rate <= high:
            logger.warning("acceptance rate %.3f outside [%g, %g]", result.acceptance_rate, low, high)
        entries = [report_entry("acceptance_rate", low <= result.acceptance_rate <= high,
                                result.acceptance_rate, list(ACCEPTANCE_WINDOW))]
        metadata = {"acceptance_rate": result.acceptance_rate}
        if config["ks"]:
            distance = ks_against_measure(result, self._cache.get(V, config.theta_float))
            logger.info("KS distance to the equilibrium measure: %.4f", distance)
            entries.append(report_entry("ks", distance <= KS_TOLERANCE, distance, KS_TOLERANCE))
            metadata["ks"] = distance
        outputs = (config["out"],)
        if config["report"]:
            write_report(config["report"], entries, config.echo())
            outputs += (config["report"],)
        return CommandResult(self.name, rows_written=count, outputs=outputs, metadata=metadata)


class ValidateProvider(CommandProvider):
    name = "validate"
    help = "run the invariant suite and write a JSON report"

    def __init__(self, cache: MeasureCache):
        self._cache = cache

    def get_supported_parameters(self) -> Dict[str, Any]:
        return {**param_defaults("points", "seed", "sweeps", "burn_in", "thinning"),
                "checks": None, "report": "validation_report.json"}

    def add_arguments(self, parser):
        parser.add_argument("--checks", type=_checks_list, help="comma-separated subset of checks")
        parser.add_argument("--points", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--sweeps", type=int)
        parser.add_argument("--burn-in", dest="burn_in", type=int)
        parser.add_argument("--thinning", type=int)

    def run(self, config: RunConfig) -> CommandResult:
        suite = ValidationSuite(precision=config["precision"], points=config["points"],
                                seed=config["seed"], sweeps=config["sweeps"],
                                burn_in=config["burn_in"], thinning=config["thinning"],
                                cache=self._cache)
        checks = config["checks"]
        if isinstance(checks, str):
            checks = _checks_list(checks)
        results = suite.run(checks)
        entries = [report_entry(r.check_name, r.passed, r.value, r.tolerance) for r in results]
        failures = write_report(config["report"], entries, config.echo())
        if failures:
            logger.error("%d of %d checks failed", failures, len(entries))
        return CommandResult(self.name, exit_code=1 if failures else 0, rows_written=len(entries),
                             outputs=(config["report"],), metadata={"failures": failures})


# ============================================================================
# SERVICE
# ============================================================================

class CommandService:

    def __init__(self):
        self._cache = MeasureCache()
        self.providers: Dict[str, CommandProvider] = {}
        for provider in (PolysProvider(), RecurrenceProvider(), CdCheckProvider(), KernelProvider(),
                         CurveProvider(), EquilibriumProvider(self._cache),
                         SampleProvider(self._cache), ValidateProvider(self._cache)):
            self.providers[provider.name] = provider

    def build_parser(self) -> ArgumentParser:
        common = ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
        common.add_argument("--theta", help="a/b for an exact rational, or a decimal")
        common.add_argument("--potential", help="linear:rho, quadratic:tau,rho or polynomial:v0,v1,...")
        common.add_argument("--weight", help="weight alias, e.g. laguerre")
        common.add_argument("--alpha", type=float)
        common.add_argument("--precision", type=int, help="mantissa bits")
        common.add_argument("--out", help="CSV path (stdout when omitted)")
        common.add_argument("--report", help="JSON report path")
        common.add_argument("--config", help="JSON file of option values; flags win")
        common.add_argument("--log-level", dest="log_level")

        parser = ArgumentParser(prog=PROGRAM_NAME, description=__doc__.splitlines()[0])
        subparsers = parser.add_subparsers(dest="command", metavar="command")
        subparsers.required = True
        for name, provider in self.providers.items():
            sub = subparsers.add_parser(name, parents=[common], help=provider.help,
                                        argument_default=argparse.SUPPRESS)
            provider.add_arguments(sub)
        return parser

    def configure(self, command: str, flags: Dict[str, Any]) -> RunConfig:
        provider = self.providers.get(command)
        if provider is None:
            raise ConfigError(f"unknown command {command!r}")
        params = {**commonDefaults(), **provider.get_supported_parameters()}
        flags = dict(flags)
        config_path = flags.pop("config", None)
        if config_path:
            from_file = load_json_config(config_path)
            file_command = from_file.pop("command", command)
            if file_command != command:
                raise ConfigError(f"{config_path} is a {file_command!r} recipe, not {command!r}")
            unknown = sorted(set(from_file) - set(params))
            if unknown:
                raise ConfigError(f"{config_path}: unknown options {unknown} for {command}")
            params.update(from_file)
            params["config"] = config_path
        params.update(flags)
        params = check_parameter_ranges(params)
        theta = parse_theta(params.pop("theta"))
        if provider.requires_rational_theta and rational_parts(theta) is None:
            raise IrrationalTheta(f"{command} needs an exact rational theta such as 3/2, got {theta}")
        return RunConfig(command=command, theta=theta, params=params)

    def run(self, config: RunConfig) -> CommandResult:
        start = time.perf_counter()
        result = self.providers[config.command].run(config)
        elapsed = time.perf_counter() - start
        stats = self.get_cache_stats()
        logger.info("%s: %d rows in %.2fs (measure cache %d hits, %d misses)", config.command,
                    result.rows_written, elapsed, stats["cache_hits"], stats["cache_misses"])
        result.metadata = {**(result.metadata or {}), "elapsed": elapsed, "measure_cache": stats}
        return result

    def get_cache_stats(self) -> Dict[str, Any]:
        return self._cache.get_cache_stats()


# ============================================================================
# ENTRY POINT
# ============================================================================

def configure_logging(level_name: str) -> None:
    level = logging.getLevelName(str(level_name).upper())
    if not isinstance(level, int):
        raise ConfigError(f"unknown log level {level_name!r}")
    logging.getLogger().setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    service = CommandService()
    try:
        namespace = vars(service.build_parser().parse_args(argv))
        command = namespace.pop("command")
        config = service.configure(command, namespace)
        configure_logging(config["log_level"])
        return service.run(config).exit_code
    except BiorthoError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
