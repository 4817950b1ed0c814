from . import norm
from . import compose
from . import bh
