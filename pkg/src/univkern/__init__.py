"""Universal, characteristic and C0-universal kernels on the real line.

Modules
-------
measures
    Signed measures (atoms plus gridded densities) and their transforms.
kernels
    Translation-invariant, Hilbert-Schmidt, polynomial and weighted-polynomial kernels.
classify
    Tri-state rule engine with a frozen rulebook.
probe
    Least-squares denseness probes, witness measures and MMD tables.
cli
    TOML-configured command-line runner.
"""

from .tristate import Tri

__all__ = ["Tri"]
__version__ = "0.1.0"
