from .operators import *
from .linalg import *
