"""PMU placement and false-data-injection defense games on DC power grids."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(name: str) -> Path:
    """Path to a bundled grid fixture such as 'ieee14.grid'."""
    return Path(resources.files(__package__) / "data" / name)
