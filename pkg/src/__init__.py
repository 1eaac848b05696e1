"""mopf - distributed multi-area DC optimal power flow over critical regions."""

__version__ = "0.1.0"
