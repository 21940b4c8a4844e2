"""Threshold key exchange over keyring overlays on wireless meshes."""

__version__ = "0.1.0"

from .adversary import (
    AdversarySpec,
    ReliabilityParams,
    attack_sweep,
    compromise,
    count_secure_paths,
    crossing_fraction,
    de_step_census,
    mitm_outcome,
    monte_carlo_reliability,
    reliability_analytic,
)
from .crypto import (
    SECP256K1,
    TOY_GROUP,
    AuthenticationError,
    KeyPair,
    SchnorrGroup,
    asym_decrypt,
    asym_encrypt,
    derive_pairwise,
    keygen,
    sign,
    sym_decrypt,
    sym_encrypt,
    verify,
)
from .netmodel import (
    Keyring,
    OverlayGraph,
    PhysicalTopology,
    assign_keyrings,
    build_overlay,
    generate_topology,
    load_network,
    overlay_edge_probability,
    save_network,
)
from .paths import (
    Path,
    max_vertex_disjoint_paths,
    path_length_stats,
    shortest_physical_path,
)
from .protocol import (
    InsufficientDisjointPathsError,
    Network,
    PathPlan,
    PhysicalUnreachableError,
    ProtocolError,
    SessionConfig,
    SessionReport,
    plan_paths,
    run_session,
)
from .sharing import (
    DEFAULT_PRIME,
    InsufficientSharesError,
    PrimeField,
    Share,
    reconstruct,
    reconstruct_secret_bytes,
    share_secret_bytes,
)

__all__ = [
    "AdversarySpec",
    "AuthenticationError",
    "DEFAULT_PRIME",
    "InsufficientDisjointPathsError",
    "InsufficientSharesError",
    "KeyPair",
    "Keyring",
    "Network",
    "OverlayGraph",
    "Path",
    "PathPlan",
    "PhysicalTopology",
    "PhysicalUnreachableError",
    "PrimeField",
    "ProtocolError",
    "ReliabilityParams",
    "SECP256K1",
    "SchnorrGroup",
    "SessionConfig",
    "SessionReport",
    "Share",
    "TOY_GROUP",
    "assign_keyrings",
    "asym_decrypt",
    "asym_encrypt",
    "attack_sweep",
    "build_overlay",
    "compromise",
    "count_secure_paths",
    "crossing_fraction",
    "de_step_census",
    "derive_pairwise",
    "generate_topology",
    "keygen",
    "load_network",
    "max_vertex_disjoint_paths",
    "mitm_outcome",
    "monte_carlo_reliability",
    "overlay_edge_probability",
    "path_length_stats",
    "plan_paths",
    "reconstruct",
    "reconstruct_secret_bytes",
    "reliability_analytic",
    "run_session",
    "save_network",
    "share_secret_bytes",
    "shortest_physical_path",
    "sign",
    "sym_decrypt",
    "sym_encrypt",
    "verify",
]
