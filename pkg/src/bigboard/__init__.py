"""bigboard: a shared situation-awareness board for network operations.

A single authoritative server holds the network topology, the live alert
set, flow pipes between sub-zones, and the manager-controlled view (active
mission areas and overlay queries). Consoles submit commands over HTTP,
follow the totally ordered delta stream, and render identical boards from
identical sequence numbers, verified by canonical state digests.
"""

from .alerts import (
    Alert,
    AlertCategory,
    AlertStatus,
    AlertStore,
    AggregateBadge,
    Subject,
    SubjectKind,
    Ticket,
    TicketState,
    affected_assets,
    aggregate_badges,
    classify_mission_impact,
)
from .client import BoardClient, LocalBoard, ServerUnavailable
from .config import ServerConfig, load_config
from .errors import (
    AuthorizationError,
    BigBoardError,
    CommandRejected,
    ConfigError,
    DeltaGapError,
    JournalCorruption,
    QueryError,
    ReplicaDivergence,
    StaleSubscription,
    TopologyError,
    TransitionError,
    ValidationError,
)
from .journal import Journal
from .overlay import (
    MAX_ACTIVE_QUERIES,
    BoardLayers,
    BoardView,
    MenuEntry,
    QueryHighlight,
    build_menu,
    compute_strip,
    derive_layers,
    individual_badges,
    menu_window,
)
from .pipes import Pipe, PipeColor, PipeStore, pipe_color, quantize_fraction, visible_pipes
from .query import (
    FunctionalQuery,
    evaluate_query,
    format_query,
    parse_query,
)
from .render import render_board_svg, render_text
from .rng import SplitMix64
from .scenario import (
    BASE_AT,
    ScenarioConfig,
    fixture_topology,
    generate_fixture,
    make_boston_fixture,
    run_scenario,
    stream_bytes,
)
from .server import BoardHTTPServer, BoardRequestHandler, BoardServer, Delta
from .state import (
    BoardState,
    ClientIdentity,
    Command,
    CommandKind,
    Role,
    VIEW_CONTROL_KINDS,
)
from .topology import (
    Asset,
    MissionArea,
    SubZone,
    SubZoneKind,
    Topology,
    Zone,
    load_topology,
    mission_dependency_set,
    subzones_touching,
)

__version__ = "0.1.0"
