from .model import *
from .states import *
