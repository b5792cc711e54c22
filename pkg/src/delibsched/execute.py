"""Running a policy table online: controller state, step application, simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .dp import PolicyTable
from .model import HALT, Action, ProblemInstance, Variant
from .render import format_decimal
from .rng import Sampler, run_seeds, splitmix64, splitmix64_array, stream_seed

DRAWS_PER_STEP = 3  # delib cost, resource, exec cost, always in that order


class OutcomeError(ValueError):
    """An observed outcome cannot have come from the evaluated method."""


@dataclass(frozen=True)
class DeliberationState:
    k_remaining: int
    incumbent_cost: int
    resource_remaining: int = 0
    delib_cost_accrued: int = 0
    # None while the alternative solution is held, else (method id, step number)
    incumbent_source: tuple[int, int] | None = None
    steps_taken: int = 0
    interrupted: bool = False

    @property
    def source_label(self) -> str:
        return "Alt" if self.incumbent_source is None else f"M{self.incumbent_source[0]}"


@dataclass(frozen=True)
class Outcome:
    delib: int = 0
    resource: int = 0
    exec: int | None = None


def initial_state(instance: ProblemInstance, table: PolicyTable) -> DeliberationState:
    return DeliberationState(
        k_remaining=table.K,
        incumbent_cost=instance.alt_cost,
        resource_remaining=instance.resource_limit if table.variant is Variant.FULL else 0,
    )


def _r_index(table: PolicyTable, state: DeliberationState) -> int | None:
    return state.resource_remaining if table.variant is Variant.FULL else None


def next_action(table: PolicyTable, state: DeliberationState) -> Action:
    """Table action for the current state; HALT once steps run out or after an interruption.

    Reads only the state, so callers may hand in externally changed incumbent
    cost or resource and get the re-planned action without recomputation.
    """
    table._index(state.k_remaining, state.incumbent_cost, _r_index(table, state))
    if state.k_remaining == 0 or state.interrupted:
        return HALT
    return table.action(state.k_remaining, state.incumbent_cost, _r_index(table, state))


def apply_outcome(instance: ProblemInstance, state: DeliberationState, action: Action, outcome: Outcome) -> DeliberationState:
    if action.is_halt:
        raise ValueError("HALT has no outcome to apply")
    if state.k_remaining <= 0:
        raise ValueError("no steps remaining")
    m = instance.method(action.method)
    if outcome.delib not in m.delib_cost:
        raise OutcomeError(f"delib={outcome.delib} outside the support of {m.label} ({m.delib_cost.values})")
    if outcome.resource not in m.resource:
        raise OutcomeError(f"res={outcome.resource} outside the support of {m.label} ({m.resource.values})")
    interrupted = outcome.resource > state.resource_remaining
    if not interrupted:
        if outcome.exec is None:
            raise OutcomeError(f"exec cost missing for completed evaluation of {m.label}")
        if outcome.exec not in m.exec_cost:
            raise OutcomeError(f"exec={outcome.exec} outside the support of {m.label} ({m.exec_cost.values})")

    step = state.steps_taken + 1
    new = replace(
        state,
        k_remaining=state.k_remaining - 1,
        delib_cost_accrued=state.delib_cost_accrued + outcome.delib,
        steps_taken=step,
    )
    if interrupted:
        return replace(new, resource_remaining=0, interrupted=True)
    new = replace(new, resource_remaining=state.resource_remaining - outcome.resource)
    if outcome.exec <= state.incumbent_cost:
        new = replace(new, incumbent_cost=outcome.exec, incumbent_source=(m.id, step))
    return new


def advise_step(instance, table, state, outcome: Outcome | None) -> tuple[Action, DeliberationState]:
    """Recommend the next action and, unless it is HALT, apply the observed outcome to it."""
    action = next_action(table, state)
    if action.is_halt:
        return action, state
    if outcome is None:
        raise ValueError(f"an outcome is needed for {action}")
    return action, apply_outcome(instance, state, action, outcome)


@dataclass(frozen=True)
class StepRecord:
    before: DeliberationState
    action: Action
    delib: int
    resource: int
    completed: bool
    exec: int | None
    after: DeliberationState


@dataclass
class ExecutionTrace:
    steps: list[StepRecord] = field(default_factory=list)
    final: DeliberationState | None = None

    @property
    def source(self) -> str:
        return self.final.source_label

    @property
    def exec_cost(self) -> int:
        return self.final.incumbent_cost

    @property
    def total_delib(self) -> int:
        return self.final.delib_cost_accrued

    @property
    def total_cost(self) -> int:
        return self.total_delib + self.exec_cost

    def actions(self) -> list[Action]:
        return [s.action for s in self.steps] + [HALT]

    def to_text(self) -> str:
        lines = []
        for i, s in enumerate(self.steps, start=1):
            b = s.before
            lines.append(
                "\t".join(
                    str(v)
                    for v in (
                        i,
                        b.k_remaining,
                        b.incumbent_cost,
                        b.resource_remaining,
                        s.action,
                        s.delib,
                        s.resource,
                        "done" if s.completed else "interrupted",
                        "-" if s.exec is None else s.exec,
                        s.after.incumbent_cost,
                    )
                )
            )
        lines.append(f"TOTAL delib={self.total_delib} exec={self.exec_cost} total={self.total_cost} source={self.source}")
        return "\n".join(lines) + "\n"


OutcomeSource = Callable[[DeliberationState, Action], Outcome]


def run_policy(instance: ProblemInstance, table: PolicyTable, outcomes: OutcomeSource, state: DeliberationState | None = None) -> ExecutionTrace:
    """Drive the controller until it halts, pulling one outcome per evaluation."""
    state = initial_state(instance, table) if state is None else state
    trace = ExecutionTrace()
    while True:
        action = next_action(table, state)
        if action.is_halt:
            break
        outcome = outcomes(state, action)
        after = apply_outcome(instance, state, action, outcome)
        exec_cost = None if after.interrupted else outcome.exec
        trace.steps.append(StepRecord(state, action, outcome.delib, outcome.resource, not after.interrupted, exec_cost, after))
        state = after
    trace.final = state
    return trace


class _Samplers:
    def __init__(self, instance: ProblemInstance):
        self.delib = [Sampler(m.delib_cost) for m in instance.methods]
        self.res = [Sampler(m.resource) for m in instance.methods]
        self.exec = [Sampler(m.exec_cost) for m in instance.methods]


def sampled_run(instance: ProblemInstance, table: PolicyTable, seed: int, run_index: int = 0) -> ExecutionTrace:
    """Replay run ``run_index`` of :func:`simulate` one step at a time."""
    samplers = _Samplers(instance)
    stream = stream_seed(seed, run_index)

    def draw(state: DeliberationState, action: Action) -> Outcome:
        i = action.method - 1
        n = DRAWS_PER_STEP * state.steps_taken
        return Outcome(
            delib=samplers.delib[i].sample(splitmix64(stream, n)),
            resource=samplers.res[i].sample(splitmix64(stream, n + 1)),
            exec=samplers.exec[i].sample(splitmix64(stream, n + 2)),
        )

    return run_policy(instance, table, draw)


def simulate_totals(instance: ProblemInstance, table: PolicyTable, seed: int, n_runs: int) -> np.ndarray:
    """Realised total cost of each of ``n_runs`` independent runs (vectorised)."""
    if n_runs <= 0:
        raise ValueError("n_runs must be positive")
    samplers = _Samplers(instance)
    seeds = run_seeds(seed, n_runs)
    k = np.full(n_runs, table.K, dtype=np.int64)
    c = np.full(n_runs, instance.alt_cost, dtype=np.int64)
    r = np.full(n_runs, instance.resource_limit if table.variant is Variant.FULL else 0, dtype=np.int64)
    delib = np.zeros(n_runs, dtype=np.int64)
    active = k > 0

    for step in range(table.K):
        act = np.zeros(n_runs, dtype=np.int64)
        act[active] = table.actions[k[active], c[active], r[active]]
        if not act.any():
            break
        n = DRAWS_PER_STEP * step
        stopped = act == 0
        for i in np.unique(act[act > 0]):
            sel = np.flatnonzero(act == i)
            s = seeds[sel]
            delib[sel] += samplers.delib[i - 1].sample_array(splitmix64_array(s, n))
            rho = samplers.res[i - 1].sample_array(splitmix64_array(s, n + 1))
            x = samplers.exec[i - 1].sample_array(splitmix64_array(s, n + 2))
            cut = rho > r[sel]
            stopped[sel[cut]] = True
            r[sel] = np.where(cut, 0, r[sel] - rho)
            c[sel] = np.where(~cut & (x <= c[sel]), x, c[sel])
        k[act > 0] -= 1
        active &= ~stopped & (k > 0)

    return delib + c


@dataclass(frozen=True)
class SimulationResult:
    n_runs: int
    seed: int
    mean: Fraction
    variance: Fraction
    std_error: float
    root_value: Fraction
    first_trace: ExecutionTrace

    def report(self) -> str:
        return "\n".join(
            [
                f"runs={self.n_runs} seed={self.seed}",
                f"mean={format_decimal(self.mean)} variance={format_decimal(self.variance)} se={self.std_error:.6g}",
                f"table_value={self.root_value.numerator}/{self.root_value.denominator} ({format_decimal(self.root_value)})",
                f"first_run_total={self.first_trace.total_cost} source={self.first_trace.source}",
            ]
        ) + "\n"


def simulate(instance: ProblemInstance, table: PolicyTable, seed: int = 0, n_runs: int = 100_000) -> SimulationResult:
    """Monte Carlo estimate of the policy's expected total cost.

    Statistics are aggregated exactly, so the result does not depend on run
    order. Sample variance uses ``n - 1`` and is 0 for a single run.
    """
    totals = simulate_totals(instance, table, seed, n_runs).astype(object)
    s1 = int(totals.sum())
    s2 = int((totals * totals).sum())
    mean = Fraction(s1, n_runs)
    variance = Fraction(s2 - s1 * mean, n_runs - 1) if n_runs > 1 else Fraction(0)
    return SimulationResult(
        n_runs=n_runs,
        seed=seed,
        mean=mean,
        variance=variance,
        std_error=math.sqrt(variance / n_runs),
        root_value=table.root()[0],
        first_trace=sampled_run(instance, table, seed, 0),
    )
