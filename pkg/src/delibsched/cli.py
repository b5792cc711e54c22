"""Command-line front end.

Exit codes: 0 success, 1 oracle mismatch, 2 unreadable or invalid input,
3 unbounded horizon, 4 oracle size guard exceeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from importlib import resources
from typing import IO, Iterator

from .dp import PolicyTable, resolve_horizon, solve, table_to_csv, table_to_text
from .execute import (
    DeliberationState,
    Outcome,
    OutcomeError,
    apply_outcome,
    initial_state,
    next_action,
    simulate,
)
from .model import INFINITE, InstanceError, ProblemInstance, UnboundedHorizonError, parse_instance
from .oracle import OracleSizeError, enumerate_optimal
from .render import format_decimal

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNBOUNDED, EXIT_GUARD = 0, 1, 2, 3, 4


@dataclass
class CliConfig:
    subcommand: str
    instance: str | None = None
    horizon: int | str | None = None
    seed: int = 0
    runs: int = 100_000
    out: str | None = None
    script: str | None = None
    format: str = "csv"


def demo_text() -> str:
    return resources.files("delibsched").joinpath("data/demo.inst").read_text(encoding="utf-8")


def _horizon_arg(text: str) -> int | str:
    if text == INFINITE:
        return INFINITE
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer or 'inf', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("horizon must be nonnegative")
    return value


def _seed_arg(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _runs_arg(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("runs must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delibsched", description="Optimal generate-and-test deliberation policies.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, *, runs=False, script=False, fmt=False):
        p.add_argument("instance", help="instance file")
        p.add_argument("--horizon", type=_horizon_arg, help="override the instance horizon (integer or 'inf')")
        p.add_argument("--out", help="output path")
        if runs:
            p.add_argument("--runs", type=_runs_arg, default=100_000)
            p.add_argument("--seed", type=_seed_arg, default=0)
        if script:
            p.add_argument("--script", help="file of observed outcomes, one line per step")
        if fmt:
            p.add_argument("--format", choices=("csv", "text"), default="csv")

    common(sub.add_parser("solve", help="build the policy table"), fmt=True)
    common(sub.add_parser("simulate", help="Monte Carlo runs of the optimal policy"), runs=True)
    common(sub.add_parser("advise", help="step through deliberation with observed outcomes"), script=True)
    common(sub.add_parser("oracle-check", help="compare the table value with brute-force enumeration"))
    sub.add_parser("demo", help="print the two-method example and its table")
    return parser


def _load(config: CliConfig) -> ProblemInstance:
    with open(config.instance, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _solve(config: CliConfig, instance: ProblemInstance, out: IO[str]) -> PolicyTable:
    requested = instance.horizon if config.horizon is None else config.horizon
    K = resolve_horizon(instance, requested)
    if requested == INFINITE:
        print(f"horizon inf -> K'={K}", file=out)
    return solve(instance, K)


def _summary(table: PolicyTable) -> str:
    value, action = table.root()
    return f"value={value.numerator}/{value.denominator} ({format_decimal(value)}) action={action} K={table.K}"


def cmd_solve(config: CliConfig, out: IO[str]) -> int:
    instance = _load(config)
    table = _solve(config, instance, out)
    rendered = table_to_csv(table) if config.format == "csv" else table_to_text(table)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        out.write(rendered)
    print(_summary(table), file=out)
    return EXIT_OK


def cmd_simulate(config: CliConfig, out: IO[str]) -> int:
    instance = _load(config)
    table = _solve(config, instance, out)
    result = simulate(instance, table, seed=config.seed, n_runs=config.runs)
    out.write(result.report())
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(result.first_trace.to_text())
    return EXIT_OK


def parse_outcome_line(instance: ProblemInstance, action, line: str) -> Outcome:
    """``exec=<int> [delib=<int>] [res=<int>]``; a bare integer is the exec cost.

    A field may be omitted when the method's distribution for it is a point mass.
    """
    fields: dict[str, int] = {}
    for tok in line.split():
        key, sep, val = tok.partition("=")
        if not sep:
            key, val = "exec", tok
        if key not in ("exec", "delib", "res"):
            raise OutcomeError(f"unknown field {key!r}")
        if key in fields:
            raise OutcomeError(f"duplicate field {key!r}")
        try:
            fields[key] = int(val)
        except ValueError:
            raise OutcomeError(f"{key} must be an integer, got {val!r}") from None
    m = instance.method(action.method)
    for key, dist in (("delib", m.delib_cost), ("res", m.resource)):
        if key not in fields:
            if not dist.is_point_mass():
                raise OutcomeError(f"{key}=<int> required for {m.label}")
            fields[key] = dist.min_value
    return Outcome(delib=fields["delib"], resource=fields["res"], exec=fields.get("exec"))


def _state_line(state: DeliberationState) -> str:
    return (
        f"state k={state.k_remaining} c={state.incumbent_cost} r={state.resource_remaining} "
        f"delib={state.delib_cost_accrued} source={state.source_label}"
    )


def _outcome_lines(stream: IO[str], prompt: IO[str] | None) -> Iterator[str]:
    while True:
        if prompt is not None:
            prompt.write("outcome> ")
            prompt.flush()
        line = stream.readline()
        if not line:
            return
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def run_advise(instance: ProblemInstance, table: PolicyTable, stream: IO[str], out: IO[str], prompt: IO[str] | None = None) -> DeliberationState:
    state = initial_state(instance, table)
    lines = _outcome_lines(stream, prompt)
    while True:
        print(_state_line(state), file=out)
        action = next_action(table, state)
        print(f"action {action}", file=out)
        if action.is_halt:
            break
        while True:
            line = next(lines, None)
            if line is None:
                print("# outcome stream ended; halting", file=out)
                print("action H", file=out)
                print(f"EXECUTE source={state.source_label} cost={state.incumbent_cost}", file=out)
                return state
            try:
                state = apply_outcome(instance, state, action, parse_outcome_line(instance, action, line))
                break
            except OutcomeError as exc:
                print(f"error: {exc}", file=out)
        if state.interrupted:
            print("# interrupted: resource exhausted", file=out)
    print(f"EXECUTE source={state.source_label} cost={state.incumbent_cost}", file=out)
    return state


def cmd_advise(config: CliConfig, out: IO[str]) -> int:
    instance = _load(config)
    table = _solve(config, instance, out)
    if config.script:
        with open(config.script, encoding="utf-8") as fh:
            run_advise(instance, table, fh, out)
    else:
        prompt = sys.stderr if sys.stdin.isatty() else None
        run_advise(instance, table, sys.stdin, out, prompt)
    return EXIT_OK


def cmd_oracle_check(config: CliConfig, out: IO[str]) -> int:
    instance = _load(config)
    table = _solve(config, instance, out)
    oracle_value, _ = enumerate_optimal(instance, table.K)
    dp_value = table.root()[0]
    verdict = "PASS" if dp_value == oracle_value else "FAIL"
    print(
        f"dp={dp_value.numerator}/{dp_value.denominator} oracle={oracle_value.numerator}/{oracle_value.denominator} {verdict}",
        file=out,
    )
    return EXIT_OK if verdict == "PASS" else EXIT_FAIL


def cmd_demo(config: CliConfig, out: IO[str]) -> int:
    text = demo_text()
    instance = parse_instance(text)
    table = solve(instance)
    out.write("# instance\n")
    out.write(text)
    out.write("\n# optimal policy table\n")
    out.write(table_to_csv(table))
    out.write("\n")
    out.write(table_to_text(table))
    print(_summary(table), file=out)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "advise": cmd_advise,
    "oracle-check": cmd_oracle_check,
    "demo": cmd_demo,
}


def main(argv: list[str] | None = None, out: IO[str] | None = None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    config = CliConfig(**{k.replace("-", "_"): v for k, v in vars(args).items()})
    try:
        return COMMANDS[config.subcommand](config, out)
    except UnboundedHorizonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNBOUNDED
    except OracleSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
