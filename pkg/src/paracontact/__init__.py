"""Numerical verification engine for paracontact conformal geometry."""

from .errors import *  # noqa: F401,F403
from .jets import Jet, coordinates, jet_space  # noqa: F401
from .structures import StructureSpec, check_compatibility, evaluate, load_spec, polynomial_spec  # noqa: F401
from .connection import solve_connection, verify_axioms  # noqa: F401
from .report import ResidualReport  # noqa: F401

__version__ = "0.1.0"
