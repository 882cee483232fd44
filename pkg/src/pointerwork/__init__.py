__version__ = "0.1.0"

from . import errors
from . import hilbert
from . import model
from . import propagate
from . import eval
from . import work
from . import params
from . import get
from . import plot
from . import run
