from typing import Dict, Any, Optional, Union, Sequence, Mapping
from typing import TypedDict, Literal
from types import MappingProxyType

import numpy as np

InfoDict = Dict[str, Any]
InfoDictIn = Mapping[str, Any]

# an immutable empty dict (e.g. for argument defaults)
empty_dict: InfoDictIn = MappingProxyType({})

ChartDict = InfoDict
ChartDictIn = InfoDictIn

# single-key mapping {family_name: options}
ChartsDict = Dict[str, Optional[ChartDict]]

# A scalar or p-vector, in process units
VectorLike = Union[float, Sequence[float], np.ndarray]

DepthName = Literal["spatial", "tukey", "simplicial", "oja"]
DenominatorMode = Literal["retained_count", "nominal_fraction"]
Phase = Literal["I", "II"]
LiteralFalse = Literal[False]


class OutlierDict(TypedDict, total=False):
    count: int
    shift: VectorLike
    scale: float


class ScenarioDict(TypedDict, total=False):
    dimension: int
    mean: VectorLike
    cov: Union[float, Sequence[Sequence[float]]]
    shift: VectorLike
    outliers: Optional[OutlierDict]
    size: int
    phase1: int
    phase2_cap: int
    replications: int
    seed: Optional[int]
    contaminate_phase1: bool


class SimulateDict(TypedDict, total=False):
    scenario: ScenarioDict
    scenarios: Dict[str, Optional[ScenarioDict]]
    charts: Dict[str, ChartsDict]
    progress: bool


class QQDict(TypedDict, total=False):
    subgroups: int
    size: int
    alpha: float
    seed: Optional[int]


class InputDict(TypedDict, total=False):
    chart: ChartsDict
    seed: Optional[int]
    output: Optional[str]
    force: bool
    debug: Union[bool, int, str]
    simulate: SimulateDict
    qq: Union[bool, QQDict]
    version: Optional[str]
