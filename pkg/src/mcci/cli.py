"""Command line interface.

::

    mcci ci two-sample sleep.csv --alpha .05 --seed s1
    mcci test one-sample darwin.csv --eta 0
    mcci oracle one-sample darwin.csv --alpha .05
    mcci coverage one-sample --replications 500 --output json
    mcci --config previous_output.json

Exit codes: 0 success, 2 bad input, 3 unmet precondition (for example
``alpha`` at or below the smallest attainable P-value), 4 a requested
endpoint came out infinite.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

from . import __version__
from .confidence import CONVENTIONS, SIDES, freeze, pvalue_function, shift_interval, tail_for
from .coverage import MODELS as COVERAGE_MODELS
from .coverage import NOISES, CoverageConfig, run_coverage, run_subuniformity
from .data_io import parse_one_sample_csv, parse_two_sample_csv
from .exceptions import InputError, MCCIError
from .oracle import full_group_interval, full_group_pvalue
from .rng import GENERATORS
from .shift_models import STATISTICS

COMMANDS = ("ci", "test", "oracle", "coverage")
MODELS = ("one-sample", "two-sample")

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_UNBOUNDED = 0, 2, 3, 4


@dataclass
class RunSpec:
    """Everything needed to repeat a run; the JSON output embeds it."""

    command: str
    model: str
    input: Optional[str] = None
    alpha: float = 0.05
    N: int = 10_000
    seed: str = "0"
    e: float = 1e-8
    side: str = "two-sided"
    convention: str = "bonferroni"
    statistic: str = "difference"
    eta: Optional[float] = None
    treatment_label: Optional[str] = None
    generator: str = "sha256"
    threads: Optional[int] = None
    output: str = "text"
    theta: float = 0.0
    n: int = 10
    m: Optional[int] = None
    replications: int = 1000
    noise: str = "uniform_symmetric"
    scale: float = 1.0
    subuniformity: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.model not in MODELS:
            raise InputError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.command != "coverage" and not self.input:
            raise InputError(f"{self.command} needs an input file")
        if self.command == "test" and self.eta is None:
            raise InputError("test needs --eta")
        if self.statistic == "studentized" and self.model == "one-sample":
            raise InputError("the Studentized statistic is only available for two-sample data")

    @classmethod
    def from_document(cls, doc: dict) -> "RunSpec":
        """Rebuild from a JSON output document (unknown keys are ignored)."""
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in doc.items() if k in names}
        if "model" in kwargs and kwargs["model"] in COVERAGE_MODELS:
            kwargs["model"] = kwargs["model"].replace("_", "-")
        return cls(**kwargs)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default .05)")
    p.add_argument("--n-replicates", dest="N", type=int, default=10_000,
                   help="Monte Carlo replicates N (default 10000)")
    p.add_argument("--seed", default="0", help="generator seed; 'hex:...' for raw bytes")
    p.add_argument("--tol", dest="e", type=float, default=1e-8, help="bisection tolerance e")
    p.add_argument("--side", choices=SIDES, default="two-sided")
    p.add_argument("--convention", choices=CONVENTIONS, default="bonferroni")
    p.add_argument("--statistic", choices=STATISTICS, default="difference")
    p.add_argument("--eta", type=float, default=None, help="hypothesized shift (test)")
    p.add_argument("--treatment-label", default=None,
                   help="label of the treated group (default: first label in the file)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("--generator", choices=sorted(GENERATORS), default="sha256",
                   help="sha256 (portable, default) or pcg64 (fast)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcci",
        description="Conservative confidence sets by inverting Monte Carlo tests.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None,
                        help="repeat the run described by a JSON output document")
    sub = parser.add_subparsers(dest="command")
    helps = {
        "ci": "confidence bound or interval from Monte Carlo draws",
        "test": "Monte Carlo P-value at one shift",
        "oracle": "exact full-group interval (small data only)",
        "coverage": "simulation check of coverage",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("model", choices=MODELS)
        if name != "coverage":
            p.add_argument("input", help="CSV file")
        _common_flags(p)
        if name == "coverage":
            p.add_argument("--theta", type=float, default=0.0, help="true shift")
            p.add_argument("--n", type=int, default=10, help="sample size")
            p.add_argument("--m", type=int, default=None, help="treated units (default n // 2)")
            p.add_argument("--replications", type=int, default=1000)
            p.add_argument("--noise", choices=NOISES, default="uniform_symmetric")
            p.add_argument("--scale", type=float, default=1.0)
            p.add_argument("--subuniformity", action="store_true",
                           help="also tabulate the P-value CDF at the true shift")
    return parser


def _spec_from_args(ns: argparse.Namespace) -> RunSpec:
    names = {f.name for f in fields(RunSpec)}
    return RunSpec(**{k: v for k, v in vars(ns).items() if k in names})


def _load(spec: RunSpec):
    if spec.model == "one-sample":
        return parse_one_sample_csv(spec.input)
    return parse_two_sample_csv(spec.input, spec.treatment_label)


def _json_number(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    return v


def _encode(obj):
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, bytes):
        return "hex:" + obj.hex()
    return _json_number(obj)


def _unbounded(side: str, lower, upper) -> bool:
    lo_bad = lower is not None and math.isinf(lower) and side in ("two-sided", "lower")
    hi_bad = upper is not None and math.isinf(upper) and side in ("two-sided", "upper")
    return lo_bad or hi_bad


def execute(spec: RunSpec) -> tuple[int, dict]:
    """Run a validated spec; returns the exit code and the output document."""
    spec.validate()
    doc = asdict(spec)
    doc.pop("output")
    doc.pop("threads")
    if spec.command != "coverage":
        for key in ("theta", "n", "m", "replications", "noise", "scale", "subuniformity"):
            doc.pop(key)
    doc.update(version=__version__, lower=None, upper=None, p_value=None, evaluations=None,
               diagnostics=[])
    code = EXIT_OK

    if spec.command == "coverage":
        cfg = CoverageConfig(
            model=spec.model.replace("-", "_"), theta_true=spec.theta, n=spec.n, m=spec.m,
            noise=spec.noise, scale=spec.scale, replications=spec.replications,
            alpha=spec.alpha, N=spec.N, base_seed=spec.seed, generator=spec.generator,
            tol=spec.e, convention=spec.convention,
        )
        report = run_coverage(cfg)
        rep = report.as_dict()
        rep.pop("seconds")
        doc["coverage"] = rep
        if spec.subuniformity:
            doc["pvalue_cdf"] = run_subuniformity(cfg).as_dict()
        return code, doc

    data = _load(spec)
    doc["n_observations"] = data.n
    if spec.model == "two-sample":
        doc["n_treated"] = data.m

    if spec.command == "oracle":
        if spec.eta is not None:
            doc["p_value"] = full_group_pvalue(data, spec.eta, tail_for(spec.side, spec.convention))
        res = full_group_interval(data, spec.alpha, spec.convention, spec.side)
        doc["N"] = res.N
        doc.update(lower=res.lower, upper=res.upper, lower_closed=res.lower_closed,
                   upper_closed=res.upper_closed, evaluations=res.evaluations,
                   diagnostics=list(res.diagnostics))
        for key in ("seed", "e", "generator", "statistic", "threads"):
            doc.pop(key, None)
    elif spec.command == "test":
        draws = freeze(data, spec.N, spec.seed, spec.generator, spec.threads,
                       keep_assignments=spec.statistic == "studentized")
        p = pvalue_function(data, draws, spec.side, spec.convention, spec.statistic)
        doc.update(p_value=p(spec.eta), evaluations=1)
    else:
        res = shift_interval(data, spec.alpha, spec.N, spec.seed, spec.e, spec.side,
                             spec.convention, spec.generator, spec.statistic, spec.threads)
        doc.update(lower=res.lower, upper=res.upper, evaluations=res.evaluations,
                   p_at_eta0=res.p_at_eta0, diagnostics=list(res.diagnostics))

    if spec.command != "test" and _unbounded(spec.side, doc["lower"], doc["upper"]):
        code = EXIT_UNBOUNDED
        doc["diagnostics"].append("unbounded")
    return code, doc


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render_text(doc: dict) -> str:
    lines = [f"{doc['command']} {doc['model']}" + (f" ({doc['input']})" if doc.get("input") else "")]
    if doc["command"] == "coverage":
        cov = doc["coverage"]
        lines.append(f"coverage {cov['empirical_coverage']:.4f} over R={cov['R']} "
                     f"(threshold {1 - doc['alpha'] - 3 * cov['binomial_se']:.4f}, "
                     f"{'pass' if cov['passed'] else 'FAIL'})")
        lines.append(f"mean length {_fmt(cov['mean_length'])}, unbounded {cov['unbounded']}, "
                     f"empty {cov['empty']}")
        if "pvalue_cdf" in doc:
            for p, f, b in doc["pvalue_cdf"]["rows"]:
                lines.append(f"  P(p <= {p:g}) = {f:.4f}  (bound {b:.4f})")
        return "\n".join(lines)
    if doc.get("p_value") is not None:
        lines.append(f"p-value at eta={_fmt(doc['eta'])}: {_fmt(doc['p_value'])}")
    if doc["command"] != "test":
        level = 100 * (1 - doc["alpha"])
        lines.append(f"{level:g}% {doc['side']} confidence set: [{_fmt(doc['lower'])}, {_fmt(doc['upper'])}]")
    lines.append(f"N={doc['N']}" + (f", evaluations={doc['evaluations']}" if doc.get("evaluations") else ""))
    if doc["diagnostics"]:
        lines.append("diagnostics: " + ", ".join(doc["diagnostics"]))
    return "\n".join(lines)


def dumps(doc: dict) -> str:
    """Deterministic JSON: sorted keys, infinities as strings."""
    return json.dumps(_encode(doc), sort_keys=True, allow_nan=False)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.config:
            with open(ns.config, encoding="utf-8") as fh:
                spec = RunSpec.from_document(json.load(fh))
            if ns.command is not None:
                raise InputError("--config replaces the subcommand; give one or the other")
            spec.output = "json"
        elif ns.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_INPUT
        else:
            spec = _spec_from_args(ns)
        start = time.perf_counter()
        code, doc = execute(spec)
        doc["wall_time_ms"] = round(1000 * (time.perf_counter() - start), 3)
    except (InputError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"mcci: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MCCIError as exc:
        print(f"mcci: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(dumps(doc) if spec.output == "json" else render_text(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
