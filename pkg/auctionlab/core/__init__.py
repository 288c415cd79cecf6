from .config import Settings, settings
from .exceptions import AuctionLabError, ConfigError, NumericError

__all__ = ["Settings", "settings", "AuctionLabError", "ConfigError", "NumericError"]
