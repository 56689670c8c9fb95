from typing import Any, Callable, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from backend.strategies.initialization import (
    centroid_representatives,
    ebmalr_outlier_filter,
    init_random,
    rd_initialize,
)
from backend.strategies.pool import PoolState, StrategyError
from backend.strategies.selection import select_emcm, select_gs, select_qbc, select_rd

StrategyKind = Literal[
    "BL", "QBC", "EMCM", "EEMCM", "GS", "RD", "RD-QBC", "RD-EMCM", "RD-GS", "E1", "E2", "E3"
]

# the nine strategies of the main comparison, in table order
MAIN_STRATEGIES = ["BL", "QBC", "EMCM", "EEMCM", "GS", "RD", "RD-QBC", "RD-EMCM", "RD-GS"]
ABLATION_STRATEGIES = ["BL", "E1", "E2", "E3", "RD-EMCM"]

RD_OPTIONS = {"RD": 1, "RD-QBC": 2, "RD-EMCM": 3, "RD-GS": 4, "E2": 1}


class StrategySpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: StrategyKind
    name: Optional[str] = None
    committee_size: int = Field(default=4, ge=2)
    ebmalr_gamma: float = Field(default=0.05, ge=0, lt=0.5)

    @model_validator(mode="before")
    @classmethod
    def default_name(cls, data: Any) -> Any:
        # a bare string is shorthand for {"kind": ...}
        if isinstance(data, str):
            data = {"kind": data}
        if isinstance(data, dict) and not data.get("name"):
            data = {**data, "name": data.get("kind")}
        return data

    @property
    def rd_option(self) -> Optional[int]:
        return RD_OPTIONS.get(self.kind)


def _eemcm_initialize(spec: StrategySpec, state: PoolState) -> List[int]:
    survivors, clustering = ebmalr_outlier_filter(state, state.d, spec.ebmalr_gamma)
    return centroid_representatives(clustering, survivors, state.X)


_INITIALIZERS: Dict[str, Callable[[StrategySpec, PoolState], List[int]]] = {
    "random": lambda spec, state: init_random(state, state.d),
    "rd": lambda spec, state: rd_initialize(state, state.d),
    "ebmalr": _eemcm_initialize,
}

_INITIALIZATION = {
    "BL": "random", "QBC": "random", "EMCM": "random", "GS": "random",
    "E2": "random", "E3": "random",
    "RD": "rd", "RD-QBC": "rd", "RD-EMCM": "rd", "RD-GS": "rd", "E1": "rd",
    "EEMCM": "ebmalr",
}


def _next_index(spec: StrategySpec, state: PoolState) -> int:
    kind = spec.kind
    if kind in RD_OPTIONS:
        return select_rd(state, len(state.labeled) + 1, RD_OPTIONS[kind], spec.committee_size)

    candidates = state.unlabeled()
    if candidates.size == 0:
        raise StrategyError("No unlabeled samples remain")
    if kind in ("BL", "E1"):
        return int(state.rng.choice(candidates))
    if kind == "QBC":
        return select_qbc(state, candidates, spec.committee_size)
    if kind in ("EMCM", "EEMCM", "E3"):
        return select_emcm(state, candidates, spec.committee_size)
    return select_gs(state, candidates)


def run_strategy(spec: StrategySpec, pool: PoolState, M: int) -> List[int]:
    """Run one strategy from an unlabeled pool until M samples are labeled; returns the query order."""
    d = pool.d
    if pool.labeled:
        raise StrategyError("run_strategy expects a pool without labels")
    if M < d:
        raise StrategyError(f"Budget M={M} is smaller than the initialization size d={d}")
    if M > pool.active().size:
        raise StrategyError(f"Budget M={M} exceeds the {pool.active().size} selectable samples")

    for index in _INITIALIZERS[_INITIALIZATION[spec.kind]](spec, pool):
        pool.query(index)
    while len(pool.labeled) < M:
        pool.query(_next_index(spec, pool))
    return list(pool.labeled)
