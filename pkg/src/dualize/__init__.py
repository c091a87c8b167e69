"""Natural and strong dualities for finite algebras, checked by bounded search."""

from .algebra import FiniteAlgebra, FiniteStructure, PartialOperation, Relation
from .catalog import FIXTURE_NAMES, load_fixture
from .definability import AlterEgo
from .errors import BoundExceeded, InputError, PreconditionFailure

__version__ = "0.1.0"

__all__ = ["AlterEgo", "BoundExceeded", "FIXTURE_NAMES", "FiniteAlgebra", "FiniteStructure",
           "InputError", "PartialOperation", "PreconditionFailure", "Relation", "load_fixture"]
