from .app import create_app
from .config import ConfigError, ServiceConfig, build_engine, load_config
from .engine import EditRow, ExplainEngine, NeighborLink, ServiceError, shared_neighbor_links

__all__ = [
    "ConfigError",
    "EditRow",
    "ExplainEngine",
    "NeighborLink",
    "ServiceConfig",
    "ServiceError",
    "build_engine",
    "create_app",
    "load_config",
    "shared_neighbor_links",
]
