"""Damped Newton solver for period systems.

Newton runs in log coordinates u_k = log|x_k| because solved parameter
vectors span many decades (10^-13 up to 0.5) in near-geometric progression;
additive steps in linear coordinates would break the ordering chain on the
first iteration.  Signs are fixed per variable (a-parameters positive,
b-parameters negative), so log coordinates lose nothing.

Steps are halved until the residual norm decreases and the ordering chain
stays strict.  Working precision doubles whenever the linear solve loses
more than half its digits, which is the escalation the reference solutions
themselves needed as the genus grew.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import exp, log, lu_solve, matrix, mp, mpf

from .families import (
    FamilySpec,
    OrderingError,
    PeriodSystem,
    StructuralError,
    instantiate,
    residual_vector,
)
from .numerics import (
    ConfigurationError,
    parse_decimal,
    to_decimal_string,
    working_precision,
)
from .quadrature import QuadratureError


class SolverError(RuntimeError):
    """Base class for solve failures that carry diagnostic state."""


class JacobianError(SolverError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class NonConvergenceError(SolverError):
    """Iteration cap or stall; carries the best iterate seen."""

    def __init__(self, message: str, best_params: tuple, residual_history: list):
        super().__init__(message)
        self.best_params = best_params
        self.residual_history = residual_history


class StructuralFailureError(SolverError):
    """No damping factor kept the parameter ordering strict."""

    def __init__(self, message: str, params: tuple, residual_history: list):
        super().__init__(message)
        self.params = params
        self.residual_history = residual_history


@dataclass(frozen=True)
class SolveOptions:
    target_residual: mpf | None = None  # default 10^(10 - initial_precision)
    max_iterations: int = 60
    initial_precision: int = 30
    max_precision: int = 120
    damping: int = 20

    def __post_init__(self) -> None:
        if self.initial_precision > self.max_precision:
            raise ConfigurationError("initial precision exceeds the maximum")
        if self.target_residual is not None and not self.target_residual > 0:
            raise ConfigurationError("target residual must be positive")

    def resolved_target(self) -> mpf:
        if self.target_residual is not None:
            return self.target_residual
        with working_precision(self.initial_precision):
            return mpf(10) ** (10 - self.initial_precision)


@dataclass(frozen=True)
class Solution:
    """A solved parameter vector with enough context to re-verify it."""

    spec: FamilySpec
    params: tuple[str, ...]  # decimal strings, ordered like spec.param_names
    pinned: tuple[str, str] | None
    residuals: tuple[str, ...]
    residual_norm: mpf
    precision_used: int
    iteration_count: int

    def param(self, name: str) -> str:
        return self.params[self.spec.param_names.index(name)]


def _evaluate(spec: FamilySpec, xs: list, digits: int):
    wd, system = instantiate(spec, xs, digits)
    res = residual_vector(wd, system, digits)
    with working_precision(digits):
        norm = max(abs(r) for r in res)
    return system, res, norm


def jacobian(
    spec: FamilySpec, xs: list, free_idx: list[int], digits: int
) -> matrix:
    """Central finite differences of the residual in log coordinates.

    Entry (j, k) is dE_j/du_k with u_k = log|x_k|, so columns are computed
    from multiplicative perturbations x_k * exp(+-h), h = 10^(-digits/3).
    """
    with working_precision(digits):
        h = mpf(10) ** (-mpf(digits) / 3)
    n_eq = None
    cols = []
    for k in free_idx:
        step = h
        for attempt in (0, 1):
            try:
                plus = list(xs)
                minus = list(xs)
                with working_precision(digits):
                    plus[k] = xs[k] * exp(step)
                    minus[k] = xs[k] * exp(-step)
                _, res_p, _ = _evaluate(spec, plus, digits)
                _, res_m, _ = _evaluate(spec, minus, digits)
                break
            except (OrderingError, QuadratureError, StructuralError) as exc:
                if attempt == 1:
                    raise JacobianError(
                        f"residual evaluation failed while differencing "
                        f"{spec.param_names[k]}: {exc}",
                        index=k,
                    ) from exc
                with working_precision(digits):
                    step = step / 8
        with working_precision(digits):
            cols.append([(rp - rm) / (2 * step) for rp, rm in zip(res_p, res_m)])
        n_eq = len(cols[-1])
    with working_precision(digits):
        J = matrix(n_eq, len(free_idx))
        for c, col in enumerate(cols):
            for r, v in enumerate(col):
                J[r, c] = v
    return J


def _decimal_params(spec: FamilySpec, xs: list, digits: int) -> tuple[str, ...]:
    return tuple(to_decimal_string(x, digits) for x in xs)


def _check_square(system: PeriodSystem, free_idx: list[int], label: str) -> None:
    if len(system.equations) != len(free_idx):
        raise ConfigurationError(
            f"{label}: {len(system.equations)} equations but {len(free_idx)} "
            f"free variables; pin variables until the system is square"
        )


def solve_period_problem(
    spec: FamilySpec,
    seed,
    opts: SolveOptions | None = None,
    pin: str | None = None,
) -> Solution:
    """Drive the period residuals to the target norm starting from seed.

    seed follows spec.param_names (decimal strings or numbers).  pin names
    a variable held at its seed value, which is how the one-parameter
    families are made square.
    """
    opts = opts or SolveOptions()
    P = opts.initial_precision
    target = opts.resolved_target()

    names = spec.param_names
    if pin is not None and pin not in names:
        raise ConfigurationError(f"cannot pin {pin!r}; variables are {names}")
    free_idx = [i for i, name in enumerate(names) if name != pin]

    with working_precision(P):
        xs = [
            parse_decimal(x, P) if isinstance(x, str) else mpf(x) for x in seed
        ]

    system, res, norm = _evaluate(spec, xs, P)
    _check_square(system, free_idx, spec.label)

    history = [norm]
    best_xs, best_norm, best_P = list(xs), norm, P
    iterations = 0

    while True:
        if norm <= target:
            final_res = res
            return Solution(
                spec=spec,
                params=_decimal_params(spec, xs, P),
                pinned=None if pin is None else (pin, to_decimal_string(xs[names.index(pin)], P)),
                residuals=tuple(to_decimal_string(r, P) for r in final_res),
                residual_norm=norm,
                precision_used=P,
                iteration_count=iterations,
            )
        if iterations >= opts.max_iterations:
            raise NonConvergenceError(
                f"{spec.label}: no convergence to {to_decimal_string(target, 6)} "
                f"in {opts.max_iterations} iterations (best {to_decimal_string(best_norm, 6)})",
                best_params=_decimal_params(spec, best_xs, best_P),
                residual_history=history,
            )

        J = jacobian(spec, xs, free_idx, P)
        with working_precision(P):
            rhs = matrix([-r for r in res])
            delta = lu_solve(J, rhs)
            # Linear-solve digit loss: if J*delta + res is far above the
            # rounding floor relative to res, the step direction lost digits.
            lin_res = J * delta + matrix(res)
            res_scale = max(abs(r) for r in res)
            lin_scale = max(abs(lin_res[i]) for i in range(lin_res.rows))
            if lin_scale > 0 and res_scale > 0:
                lost = P + float(log(lin_scale / res_scale) / log(10))
            else:
                lost = 0.0

        if lost > P / 2 and P < opts.max_precision:
            P = min(2 * P, opts.max_precision)
            system, res, norm = _evaluate(spec, xs, P)
            history.append(norm)
            continue

        lam = mpf(1)
        accepted = False
        saw_non_ordering_failure = False
        for _ in range(opts.damping + 1):
            trial = list(xs)
            with working_precision(P):
                for col, i in enumerate(free_idx):
                    trial[i] = xs[i] * exp(lam * delta[col])
            try:
                system, res_t, norm_t = _evaluate(spec, trial, P)
            except OrderingError:
                lam = lam / 2
                continue
            except (QuadratureError, StructuralError):
                saw_non_ordering_failure = True
                lam = lam / 2
                continue
            saw_non_ordering_failure = True
            if norm_t < norm:
                xs, res, norm = trial, res_t, norm_t
                accepted = True
                break
            lam = lam / 2
        if not accepted:
            if not saw_non_ordering_failure:
                raise StructuralFailureError(
                    f"{spec.label}: ordering chain broken at every damping factor",
                    params=_decimal_params(spec, xs, P),
                    residual_history=history,
                )
            raise NonConvergenceError(
                f"{spec.label}: damping exhausted without residual decrease "
                f"at {to_decimal_string(norm, 6)}",
                best_params=_decimal_params(spec, best_xs, best_P),
                residual_history=history,
            )

        iterations += 1
        history.append(norm)
        if norm < best_norm:
            best_xs, best_norm, best_P = list(xs), norm, P


@dataclass(frozen=True)
class Branch:
    """Continuation result: solutions for the pin values actually reached."""

    solutions: tuple[Solution, ...]
    failure: str | None = None


def continue_family(
    spec: FamilySpec,
    pin_name: str,
    pin_schedule,
    seed,
    opts: SolveOptions | None = None,
) -> Branch:
    """Solve along a monotone schedule of pin values, chaining seeds.

    The first solve starts from seed with its pin entry replaced by
    pin_schedule[0]; every later solve starts from the previous solution.
    The branch truncates at the first failure.
    """
    opts = opts or SolveOptions()
    schedule = list(pin_schedule)
    if not schedule:
        raise ConfigurationError("empty pin schedule")
    names = spec.param_names
    if pin_name not in names:
        raise ConfigurationError(f"cannot pin {pin_name!r}; variables are {names}")
    with working_precision(opts.initial_precision):
        vals = [mpf(str(v)) if not isinstance(v, mpf) else v for v in schedule]
        if len(vals) > 1:
            diffs = [b - a for a, b in zip(vals, vals[1:])]
            if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
                raise ConfigurationError("pin schedule must be strictly monotone")

    pin_idx = names.index(pin_name)
    current_seed = list(seed)
    solutions: list[Solution] = []
    for value in schedule:
        current_seed[pin_idx] = value
        try:
            sol = solve_period_problem(spec, current_seed, opts, pin=pin_name)
        except (SolverError, OrderingError, ConfigurationError) as exc:
            return Branch(
                solutions=tuple(solutions),
                failure=f"pin {pin_name}={value}: {exc}",
            )
        solutions.append(sol)
        current_seed = list(sol.params)
    return Branch(solutions=tuple(solutions))
