from .interface import CLIInterface

__all__ = ["CLIInterface"]
