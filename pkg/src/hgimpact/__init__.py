"""Simulator of the full mercury impact chain for power plant retrofit
scenarios: speciated emission deltas, gridded transport and deposition,
food-chain exposure, dose-response endpoints, and source-receptor attribution
of the resulting health changes.
"""

from .errors import (
    CflError,
    ConfigError,
    IngestError,
    OutsideDomainError,
    PipelineError,
    StageError,
)
from .exposure import (
    FOREIGN,
    ExposureState,
    FoodBaseline,
    IntakeProfile,
    TradeShares,
    edi,
    exposure_chain,
    food_delta,
    trade_mix,
)
from .health import (
    AttributionTensor,
    DoseResponse,
    HealthOutcome,
    RankReport,
    attribute,
    cvd_endpoint,
    group_inventory,
    health_outcome,
    iq_endpoint,
    rank_report,
)
from .ingest import BundleValidationError, DataBundle, Violation, ingest, validate_bundle
from .inventory import (
    ApcdConfig,
    CAPACITY_CLASSES,
    Measure,
    NegativeReductionWarning,
    Plant,
    ProvinceParams,
    Status,
    build_inventory,
    capacity_class,
    emission_delta_apcd,
    emission_delta_pge,
    emission_sus,
    group_totals,
    pge_coal_saved_tons,
)
from .scenario import (
    RunDiff,
    RunRecord,
    Scenario,
    compare,
    load_record,
    parse_scenario,
    parse_scenario_file,
    run,
    save_record,
    select_plants,
)
from .species import HG0, HG2, HGP, SPECIES, SpeciatedMass
from .transport import (
    DepositionField,
    GridSpec,
    OUTSIDE,
    SourceReceptorMatrix,
    TransportParams,
    aggregate_to_provinces,
    build_srm,
    load_srm,
    max_stable_dt,
    rasterize_emissions,
    save_srm,
    simulate,
)

__version__ = "0.1.0"
