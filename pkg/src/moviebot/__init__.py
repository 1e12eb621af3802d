"""Conversational movie recommendation research platform."""

from importlib import resources

__version__ = "0.1.0"


def data_path(name: str):
    """Filesystem path of a bundled data asset."""
    path = resources.files("moviebot").joinpath("data", name)
    if not path.is_file():
        raise FileNotFoundError(f"no bundled data asset named {name!r}")
    return path
