"""Domain models package."""
from halpern_rates.models.curvature import ComparisonTriangle, Curvature, GeodesicConfig, ModelPoint
from halpern_rates.models.ball import ConvexBall
from halpern_rates.models.maps import Composition, GeodesicPull, NonexpansiveMap, Rotation
from halpern_rates.models.schedule import EpsilonModulus, LambdaRule, ModuliSchedule, ThetaRule
from halpern_rates.models.bigcount import BigCount, TinyReal
from halpern_rates.models.gfunction import GFunction
from halpern_rates.models.trace import IterationTrace
from halpern_rates.models.browder import BrowderPoint
from halpern_rates.models.triangle import SCQuantities, TriangleConfig
from halpern_rates.models.experiment import ExperimentConfig

__all__ = [
    "ComparisonTriangle",
    "Curvature",
    "GeodesicConfig",
    "ModelPoint",
    "ConvexBall",
    "Composition",
    "GeodesicPull",
    "NonexpansiveMap",
    "Rotation",
    "EpsilonModulus",
    "LambdaRule",
    "ModuliSchedule",
    "ThetaRule",
    "BigCount",
    "TinyReal",
    "GFunction",
    "IterationTrace",
    "BrowderPoint",
    "SCQuantities",
    "TriangleConfig",
    "ExperimentConfig",
]
