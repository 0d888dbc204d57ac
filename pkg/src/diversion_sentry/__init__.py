"""Online detection of uranium diversion from shipment duration and power records."""
from .core import (
    LabeledSeries,
    RngStream,
    ShipmentObservation,
    ShipmentSeries,
    energy_of,
    parse_series,
    serialize_series,
)
from .detectors import GCusumDetector, GMCusumDetector, KSDetector, MCusumDetector, ShiftSpec
from .simulator import ScenarioConfig, default_paper_scenario, generate, generate_training_and_test

__version__ = "0.1.0"
