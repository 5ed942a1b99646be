"""Choose visual symbols for letters so that likely letter pairs are hard to confuse."""

__version__ = "0.1.0"
