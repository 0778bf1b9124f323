"""Services package - geometry, iteration, rates and experiments."""
from halpern_rates.services.geometry_service import GeometryService
from halpern_rates.services.map_service import MapService
from halpern_rates.services.schedule_service import ScheduleService
from halpern_rates.services.iteration_service import IterationService
from halpern_rates.services.browder_service import BrowderService
from halpern_rates.services.rate_service import RateService
from halpern_rates.services.tower_service import TowerService
from halpern_rates.services.oracle_service import OracleService
from halpern_rates.services.fuzz_service import FuzzService
from halpern_rates.services.experiment_service import ExperimentService

__all__ = [
    "GeometryService",
    "MapService",
    "ScheduleService",
    "IterationService",
    "BrowderService",
    "RateService",
    "TowerService",
    "OracleService",
    "FuzzService",
    "ExperimentService",
]
