"""The DEMO transaction pattern as a transition table."""

from __future__ import annotations

from enum import Enum
from typing import Iterable

from demobpr.model import StepKind


class TransactionState(str, Enum):
    INITIAL = "Initial"
    REQUESTED = "Requested"
    PROMISED = "Promised"
    DECLINED = "Declined"
    QUIT = "Quit"
    EXECUTED = "Executed"
    STATED = "Stated"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    STOPPED = "Stopped"

    @property
    def terminal(self) -> bool:
        return self in TERMINAL_STATES


TERMINAL_STATES = frozenset(
    {TransactionState.ACCEPTED, TransactionState.QUIT, TransactionState.STOPPED}
)

S = TransactionState
K = StepKind

TRANSITIONS: dict[tuple[TransactionState, StepKind], TransactionState] = {
    (S.INITIAL, K.RQ): S.REQUESTED,
    (S.REQUESTED, K.PM): S.PROMISED,
    (S.REQUESTED, K.DC): S.DECLINED,
    (S.DECLINED, K.QT): S.QUIT,
    (S.DECLINED, K.RQ): S.REQUESTED,
    (S.PROMISED, K.EX): S.EXECUTED,
    (S.EXECUTED, K.ST): S.STATED,
    (S.STATED, K.AC): S.ACCEPTED,
    (S.STATED, K.RJ): S.REJECTED,
    (S.REJECTED, K.ST): S.STATED,
    (S.REJECTED, K.SP): S.STOPPED,
}

del S, K


class InvalidTransition(ValueError):
    def __init__(self, state: TransactionState, step: StepKind) -> None:
        super().__init__(f"step {step.value!r} is not allowed in state {state.value}")
        self.state = state
        self.step = step


def pattern_next(state: TransactionState, step: StepKind | str) -> TransactionState:
    """Return the state reached by performing ``step`` in ``state``.

    Raises InvalidTransition for any pair outside the table.
    """
    step = StepKind.parse(step) if isinstance(step, str) else step
    try:
        return TRANSITIONS[(state, step)]
    except KeyError:
        raise InvalidTransition(state, step) from None


def run_trace(steps: Iterable[StepKind | str]) -> TransactionState:
    state = TransactionState.INITIAL
    for step in steps:
        state = pattern_next(state, step)
    return state


def trace_valid(steps: Iterable[StepKind | str]) -> bool:
    try:
        run_trace(steps)
    except InvalidTransition:
        return False
    return True
